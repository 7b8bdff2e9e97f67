use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_entropic-ot"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_density(dir: &Path, name: &str, n: usize, f: impl Fn(f64) -> f64) -> PathBuf {
    let mut body = String::from("x,density\n");
    let h = 1.0 / n as f64;
    let vals: Vec<f64> = (0..n).map(|i| f((i as f64 + 0.5) * h)).collect();
    let mass: f64 = vals.iter().sum::<f64>() * h;
    for (i, v) in vals.iter().enumerate() {
        body.push_str(&format!("{},{}\n", (i as f64 + 0.5) * h, v / mass));
    }
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn setup() -> tempfile::TempDir {
    let d = tempfile::tempdir().unwrap();
    write_density(d.path(), "one.csv", 16, |_| 1.0);
    write_density(d.path(), "mu.csv", 24, |x| 1.0 + (6.0 * x).sin().powi(2));
    write_density(d.path(), "nu.csv", 24, |x| 0.2 + x * x);
    d
}

#[test]
fn uniform_fixed_point_report() {
    let d = setup();
    let o = run(d.path(), &["solve", "--mu", "one.csv", "--nu", "one.csv", "--cost", "zero", "--gamma", "0.5", "--quiet"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let r = read_json(&d.path().join("report.json"));
    assert!(r["gap"].as_f64().unwrap().abs() <= 1e-12);
    assert_eq!(r["mode"], "log");
    assert_eq!(r["provenance"]["mode"]["source"], "default");
    assert_eq!(r["provenance"]["gamma"]["source"], "flag");
    for key in ["iterations", "residuals", "primal", "dual", "gap", "optimality_residual", "gauge_constant"] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
    // keys come out sorted
    let text = fs::read_to_string(d.path().join("report.json")).unwrap();
    let order: Vec<usize> = ["\"dual\"", "\"gap\"", "\"iterations\"", "\"primal\"", "\"provenance\"", "\"residuals\""]
        .iter()
        .map(|k| text.find(k).unwrap())
        .collect();
    assert!(order.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn reruns_are_byte_identical() {
    let d = setup();
    let args = ["solve", "--mu", "mu.csv", "--nu", "nu.csv", "--gamma", "0.1", "--plan", "plan.csv", "--quiet"];
    assert_eq!(code(&run(d.path(), &args)), 0);
    let first = (fs::read(d.path().join("report.json")).unwrap(), fs::read(d.path().join("plan.csv")).unwrap());
    assert_eq!(code(&run(d.path(), &args)), 0);
    let second = (fs::read(d.path().join("report.json")).unwrap(), fs::read(d.path().join("plan.csv")).unwrap());
    assert_eq!(first, second);
    let plan = String::from_utf8(first.1).unwrap();
    assert!(plan.starts_with("x,y,density\n"));
    assert_eq!(plan.lines().count(), 1 + 24 * 24);
}

#[test]
fn parameter_errors_name_every_flag() {
    let d = setup();
    let o = run(d.path(), &["solve", "--mu", "mu.csv", "--nu", "nu.csv", "--gamma", "-1", "--tol", "0"]);
    assert_eq!(code(&o), 3);
    let e = stderr(&o);
    assert!(e.contains("--gamma") && e.contains("--tol"), "{e}");
    assert!(!d.path().join("report.json").exists());

    let o = run(d.path(), &["solve", "--mu", "mu.csv", "--nu", "nu.csv"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("--gamma is required"));
}

#[test]
fn missing_files_and_usage_errors() {
    let d = setup();
    let o = run(d.path(), &["solve", "--mu", "nope.csv", "--nu", "nu.csv", "--gamma", "1"]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("nope.csv"));
    assert_eq!(code(&run(d.path(), &["transport"])), 2);
    assert_eq!(code(&run(d.path(), &["solve", "--gamma", "abc"])), 2);
    let o = run(d.path(), &["solve", "--mu", "mu.csv", "--nu", "nu.csv", "--gamma", "1", "--cost", "file:missing.csv"]);
    assert_eq!(code(&o), 4);
}

#[test]
fn flags_override_config() {
    let d = setup();
    fs::write(d.path().join("cfg.json"), r#"{"gamma": 0.3, "tol": 1e-8, "mu": "mu.csv", "nu": "nu.csv", "max_iter": 5000}"#).unwrap();
    let o = run(d.path(), &["--config", "cfg.json", "solve", "--gamma", "0.2", "--quiet"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = read_json(&d.path().join("report.json"));
    assert_eq!(r["gamma"], 0.2);
    let p = &r["provenance"];
    assert_eq!(p["gamma"]["source"], "flag");
    assert_eq!(p["tol"]["source"], "config");
    assert_eq!(p["tol"]["value"], 1e-8);
    assert_eq!(p["max-iter"]["value"], 5000);
    assert_eq!(p["mu"]["source"], "config");

    fs::write(d.path().join("bad.json"), r#"{"gamma": "x", "colour": 1}"#).unwrap();
    let o = run(d.path(), &["--config", "bad.json", "solve", "--mu", "mu.csv", "--nu", "nu.csv"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("colour"));
}

#[test]
fn outputs_are_all_or_nothing() {
    let d = setup();
    fs::write(d.path().join("blocker"), "not a directory").unwrap();
    let o = run(d.path(), &["solve", "--mu", "mu.csv", "--nu", "nu.csv", "--gamma", "0.5", "--plan", "blocker/plan.csv"]);
    assert_eq!(code(&o), 6);
    assert!(stderr(&o).contains("blocker"));
    assert!(!d.path().join("report.json").exists());

    // not converged: nothing written
    let o = run(d.path(), &["solve", "--mu", "mu.csv", "--nu", "nu.csv", "--gamma", "0.01", "--max-iter", "2"]);
    assert_eq!(code(&o), 5);
    assert!(!d.path().join("report.json").exists());
}

#[test]
fn out_dir_is_created() {
    let d = setup();
    let o = run(d.path(), &["--out-dir", "results/run1", "solve", "--mu", "mu.csv", "--nu", "nu.csv", "--gamma", "0.5", "--mode", "direct"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = read_json(&d.path().join("results/run1/report.json"));
    assert_eq!(r["mode"], "direct");
    assert_eq!(r["provenance"]["out-dir"]["value"], "results/run1");
}

#[test]
fn gamma_limit_writes_one_row_per_point() {
    let d = tempfile::tempdir().unwrap();
    let args = [
        "gamma-limit", "--mu", "atoms:0:0.5,1:0.5", "--nu", "atoms:0.25:0.5,0.75:0.5", "--cost", "sqdist",
        "--schedule", "coupled:c=1:gammas=0.2,0.1,0.05,0.025", "--n", "256", "--out", "sweep.csv", "--quiet",
    ];
    let o = run(d.path(), &args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(d.path().join("sweep.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[0], "gamma,delta,regularized_value,reference,gap_to_reference,entropy_mu_delta,entropy_nu_delta,status");
    for l in &lines[1..] {
        let f: Vec<&str> = l.split(',').collect();
        assert_eq!(f.len(), 8);
        assert_eq!(f[3].parse::<f64>().unwrap(), 0.0625);
        assert_eq!(f[7], "converged");
    }

    // threaded runs give the same bytes
    let mut threaded = args.to_vec();
    threaded.extend(["--threads", "3"]);
    let at = threaded.iter().position(|a| *a == "sweep.csv").unwrap();
    threaded[at] = "threaded.csv";
    assert_eq!(code(&run(d.path(), &threaded)), 0);
    assert_eq!(fs::read(d.path().join("threaded.csv")).unwrap(), text.as_bytes());
}

#[test]
fn gamma_limit_rejects_bad_setups() {
    let d = tempfile::tempdir().unwrap();
    let base = ["gamma-limit", "--mu", "atoms:0.5", "--nu", "atoms:0.5"];
    let with = |extra: &[&str]| {
        let mut a = base.to_vec();
        a.extend_from_slice(extra);
        run(d.path(), &a)
    };
    // grid too coarse for the mollifier
    assert_eq!(code(&with(&["--schedule", "coupled:gammas=0.01", "--n", "64"])), 3);
    assert_eq!(code(&with(&["--schedule", "coupled:gammas=0.1", "--cost", "file:c.csv"])), 3);
    let o = with(&["--schedule", "linear:gammas=0.1", "--n", "1"]);
    assert_eq!(code(&o), 3);
    let e = stderr(&o);
    assert!(e.contains("--schedule") && e.contains("--n"), "{e}");
    assert_eq!(code(&with(&["--schedule", "coupled:gammas=0.1", "--mu", "atoms.csv"])), 2);
}

#[test]
fn sweep_gamma_rows_and_threads() {
    let d = setup();
    let args = ["sweep-gamma", "--mu", "mu.csv", "--nu", "nu.csv", "--gammas", "1,0.3,0.1", "--quiet"];
    assert_eq!(code(&run(d.path(), &args)), 0);
    let serial = fs::read_to_string(d.path().join("sweep.csv")).unwrap();
    assert_eq!(serial.lines().count(), 4);
    assert!(serial.starts_with("gamma,iterations,primal,dual,gap,transport_cost,entropy_term,status\n"));
    let mut a = args.to_vec();
    a.extend(["--threads", "2", "--out", "t.csv"]);
    assert_eq!(code(&run(d.path(), &a)), 0);
    assert_eq!(serial, fs::read_to_string(d.path().join("t.csv")).unwrap());
}

#[test]
fn norms_and_entropy() {
    let d = setup();
    let o = run(d.path(), &["orlicz-norm", "--young", "log", "--input", "one.csv"]);
    assert_eq!(code(&o), 0);
    let v: f64 = String::from_utf8_lossy(&o.stdout).trim().parse().unwrap();
    assert!((v - 0.567143290409784).abs() < 1e-9);
    let o = run(d.path(), &["orlicz-norm", "--young", "exp", "--input", "one.csv", "--out", "n.json", "--quiet"]);
    assert_eq!(code(&o), 0);
    let j = read_json(&d.path().join("n.json"));
    assert!((j["value"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(j["young"], "PhiExp");
    assert_eq!(code(&run(d.path(), &["orlicz-norm", "--young", "cosh", "--input", "one.csv"])), 3);

    fs::write(d.path().join("two.csv"), "x,density\n0.25,2\n0.75,2\n").unwrap();
    let o = run(d.path(), &["entropy", "--input", "two.csv"]);
    let v: f64 = String::from_utf8_lossy(&o.stdout).trim().parse().unwrap();
    assert!((v - 2.0 * 2f64.ln()).abs() < 1e-12);
}

#[test]
fn check_optimality_passes_on_a_converged_solve() {
    let d = setup();
    let o = run(d.path(), &["check-optimality", "--mu", "mu.csv", "--nu", "nu.csv", "--gamma", "0.2"]);
    assert_eq!(code(&o), 0, "{}{}", String::from_utf8_lossy(&o.stdout), stderr(&o));
    let j = read_json(&d.path().join("checks.json"));
    assert_eq!(j["all_hold"], true);
    assert_eq!(j["checks"]["support"]["holds"], true);
    assert!(j["report"]["iterations"].as_u64().unwrap() > 0);

    let names: Vec<&String> = j["checks"].as_object().unwrap().keys().collect();
    assert_eq!(names.len(), 8, "{names:?}");
    assert!(j["checks"].as_object().unwrap().values().all(|c| c["holds"] == true));
}
