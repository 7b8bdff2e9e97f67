use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use entropic_ot::gamma::{PointStatus, Schedule, SweepPoint, SweepSetup};
use entropic_ot::orlicz::{check_projection_bound, DEFAULT_NORM_TOL};
use entropic_ot::sinkhorn::potential_bounds;
use entropic_ot::{
    luxemburg_norm, neg_entropy, primal_parts, solve, support_check, AtomicMeasure, CostField,
    Grid1D, GridMeasure, Mode, Solution, SolveOptions, SolveReport, DEFAULT_MASS_TOL,
};
use serde_json::{json, Map, Value};

use crate::cli::{Cli, EntropyArgs, GammaLimitArgs, NormArgs, OptsArgs, ProblemArgs, SolveArgs, SweepGammaArgs};
use crate::config::Resolver;
use crate::error::{CliError, CliResult};
use crate::io::{csv_bytes, fmt_f64, json_bytes, read_atoms, read_cost, read_density, read_function, Outputs};
use crate::syntax::{
    mode_name, parse_atoms, parse_cost, parse_domain, parse_gammas, parse_mode, parse_schedule,
    parse_young, AtomSpec, CostSpec,
};

const SUPPORT_THRESHOLD: f64 = 1e-300;
const SANDWICH_SLACK: f64 = 1e-9;

struct Globals {
    out_dir: PathBuf,
    quiet: bool,
    threads: usize,
}

impl Globals {
    fn output(&self, name: &str) -> PathBuf {
        let p = Path::new(name);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.out_dir.join(p)
        }
    }

    fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", msg.as_ref());
        }
    }
}

fn globals(r: &mut Resolver, cli: &Cli) -> Globals {
    let out_dir = r.string("out-dir", cli.out_dir.clone(), Some(".")).unwrap_or_else(|| ".".into());
    let quiet = r.bool("quiet", cli.quiet);
    let threads = r.usize("threads", cli.threads, Some(1)).unwrap_or(1);
    if threads == 0 {
        r.error("--threads must be at least 1");
    }
    Globals { out_dir: out_dir.into(), quiet, threads: threads.max(1) }
}

fn solve_options(r: &mut Resolver, args: &OptsArgs) -> SolveOptions {
    let defaults = SolveOptions::default();
    let tol = r.positive("tol", args.tol, Some(defaults.tol));
    let max_iter = r.usize("max-iter", args.max_iter, Some(defaults.max_iter));
    if max_iter == Some(0) {
        r.error("--max-iter must be at least 1");
    }
    let mode = r.string("mode", args.mode.clone(), Some(mode_name(defaults.mode)));
    let mode = r.parsed("mode", mode, parse_mode);
    SolveOptions {
        tol: tol.unwrap_or(defaults.tol),
        max_iter: max_iter.unwrap_or(defaults.max_iter),
        mode: mode.unwrap_or(defaults.mode),
        ..defaults
    }
}

/// A density problem as configured: file paths and parsed specs.
struct Problem {
    mu: PathBuf,
    nu: PathBuf,
    cost: CostSpec,
}

fn problem(r: &mut Resolver, args: &ProblemArgs) -> Option<Problem> {
    let mu = r.required("mu", args.mu.clone()).map(PathBuf::from);
    let nu = r.required("nu", args.nu.clone()).map(PathBuf::from);
    let cost = r.string("cost", args.cost.clone(), Some("sqdist"));
    let cost = r.parsed("cost", cost, parse_cost);
    for p in mu.iter().chain(&nu) {
        r.input_file(p);
    }
    if let Some(CostSpec::File(p)) = &cost {
        r.input_file(p);
    }
    Some(Problem { mu: mu?, nu: nu?, cost: cost? })
}

fn load(p: &Problem) -> CliResult<(GridMeasure, GridMeasure, CostField)> {
    let mu = read_density(&p.mu)?;
    let nu = read_density(&p.nu)?;
    let (g1, g2) = (*mu.grid(), *nu.grid());
    let cost = match &p.cost {
        CostSpec::Rule(rule) => CostField::from_rule(*rule, g1, g2)?,
        CostSpec::Zero => CostField::from_values(g1, g2, vec![0.0; g1.len() * g2.len()])?,
        CostSpec::File(path) => read_cost(path, g1, g2)?,
    };
    Ok((mu, nu, cost))
}

fn floats(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|x| json!(x)).collect())
}

fn report_json(report: &SolveReport, gamma: f64, mode: Mode) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("converged".into(), json!(true));
    m.insert("dual".into(), json!(report.dual_value));
    m.insert("gamma".into(), json!(gamma));
    m.insert("gap".into(), json!(report.gap));
    m.insert("gauge_constant".into(), json!(report.gauge_constant));
    m.insert("iterations".into(), json!(report.iterations));
    m.insert("mode".into(), json!(mode_name(mode)));
    m.insert("optimality_residual".into(), floats(&[report.optimality_residual.0, report.optimality_residual.1]));
    m.insert("primal".into(), json!(report.primal_value));
    m.insert("residuals".into(), floats(&report.residual_history));
    m
}

fn with_provenance(mut m: Map<String, Value>, provenance: BTreeMap<String, Value>) -> Value {
    m.insert("provenance".into(), Value::Object(provenance.into_iter().collect()));
    Value::Object(m)
}

fn plan_csv(sol: &Solution) -> Vec<u8> {
    let (g1, g2) = (sol.plan.grid1(), sol.plan.grid2());
    let n2 = g2.len();
    let rows: Vec<Vec<String>> = sol
        .plan
        .values()
        .iter()
        .enumerate()
        .map(|(k, v)| vec![fmt_f64(g1.center(k / n2)), fmt_f64(g2.center(k % n2)), fmt_f64(*v)])
        .collect();
    csv_bytes(&["x", "y", "density"], &rows)
}

fn summary(sol: &Solution) -> String {
    let r = &sol.report;
    format!(
        "converged in {} iterations: primal {} dual {} gap {:e}",
        r.iterations, r.primal_value, r.dual_value, r.gap
    )
}

fn commit(g: &Globals, outputs: Outputs) -> CliResult<()> {
    let paths: Vec<String> = outputs.paths().map(|p| p.display().to_string()).collect();
    outputs.commit()?;
    for p in paths {
        g.say(format!("wrote {p}"));
    }
    Ok(())
}

pub fn solve_cmd(cli: &Cli, args: &SolveArgs, config: Map<String, Value>) -> CliResult<()> {
    let mut r = Resolver::new(config);
    let g = globals(&mut r, cli);
    let prob = problem(&mut r, &args.problem);
    let gamma = r.required_positive("gamma", args.gamma);
    let opts = solve_options(&mut r, &args.opts);
    let out = r.string("out", args.out.clone(), Some("report.json"));
    let plan = r.string("plan", args.plan.clone(), None);
    let provenance = r.finish()?;
    let (prob, gamma, out) = (prob.unwrap(), gamma.unwrap(), out.unwrap());

    let (mu, nu, cost) = load(&prob)?;
    let sol = solve(&mu, &nu, &cost, gamma, &opts)?;
    g.say(summary(&sol));
    let mut outputs = Outputs::default();
    outputs.add(g.output(&out), json_bytes(&with_provenance(report_json(&sol.report, gamma, opts.mode), provenance)));
    if let Some(p) = plan {
        outputs.add(g.output(&p), plan_csv(&sol));
    }
    commit(&g, outputs)
}

/// Evaluates `f(0..n)` on `threads` workers; results keep index order.
fn parallel_map<T: Send>(n: usize, threads: usize, f: impl Fn(usize) -> T + Sync) -> Vec<T> {
    if threads <= 1 || n <= 1 {
        return (0..n).map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let mut slots: Vec<Option<T>> = (0..n).map(|_| None).collect();
    let done: Vec<Vec<(usize, T)>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..threads.min(n))
            .map(|_| {
                s.spawn(|| {
                    let mut mine = Vec::new();
                    loop {
                        let k = next.fetch_add(1, Ordering::Relaxed);
                        if k >= n {
                            break mine;
                        }
                        mine.push((k, f(k)));
                    }
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    for (k, v) in done.into_iter().flatten() {
        slots[k] = Some(v);
    }
    slots.into_iter().map(|s| s.expect("every index is claimed once")).collect()
}

pub fn sweep_gamma_cmd(cli: &Cli, args: &SweepGammaArgs, config: Map<String, Value>) -> CliResult<()> {
    let mut r = Resolver::new(config);
    let g = globals(&mut r, cli);
    let prob = problem(&mut r, &args.problem);
    let gammas = r.required("gammas", args.gammas.clone());
    let gammas = r.parsed("gammas", gammas, parse_gammas);
    let opts = solve_options(&mut r, &args.opts);
    let out = r.string("out", args.out.clone(), Some("sweep.csv"));
    r.finish()?;
    let (prob, gammas, out) = (prob.unwrap(), gammas.unwrap(), out.unwrap());

    let (mu, nu, cost) = load(&prob)?;
    let results = parallel_map(gammas.len(), g.threads, |k| solve(&mu, &nu, &cost, gammas[k], &opts));
    let mut failed = Vec::new();
    let rows: Vec<Vec<String>> = gammas
        .iter()
        .zip(&results)
        .map(|(gamma, res)| match res {
            Ok(sol) => {
                let (transport, entropy) = primal_parts(&sol.plan, &cost);
                let rep = &sol.report;
                vec![
                    fmt_f64(*gamma),
                    rep.iterations.to_string(),
                    fmt_f64(rep.primal_value),
                    fmt_f64(rep.dual_value),
                    fmt_f64(rep.gap),
                    fmt_f64(transport),
                    fmt_f64(gamma * entropy),
                    "converged".into(),
                ]
            }
            Err(e) => {
                failed.push(format!("gamma={gamma}: {e}"));
                let mut row = vec![fmt_f64(*gamma), "0".into()];
                row.extend(std::iter::repeat_n(fmt_f64(f64::NAN), 5));
                row.push(format!("failed: {e}"));
                row
            }
        })
        .collect();
    let header = ["gamma", "iterations", "primal", "dual", "gap", "transport_cost", "entropy_term", "status"];
    let mut outputs = Outputs::default();
    outputs.add(g.output(&out), csv_bytes(&header, &rows));
    commit(&g, outputs)?;
    g.say(format!("{} of {} points converged", gammas.len() - failed.len(), gammas.len()));
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::NotConverged(failed.join("\n")))
    }
}

fn atoms(r: &mut Resolver, key: &str, flag: Option<String>) -> Option<AtomSpec> {
    let raw = r.required(key, flag);
    let spec = r.parsed(key, raw, parse_atoms)?;
    if let AtomSpec::File(p) = &spec {
        r.input_file(p);
    }
    Some(spec)
}

fn load_atoms(spec: AtomSpec) -> CliResult<AtomicMeasure> {
    match spec {
        AtomSpec::Inline(m) => Ok(m),
        AtomSpec::File(p) => read_atoms(&p),
    }
}

fn sweep_row(p: &SweepPoint) -> Vec<String> {
    vec![
        fmt_f64(p.gamma),
        fmt_f64(p.delta),
        fmt_f64(p.regularized_value),
        fmt_f64(p.unregularized_reference),
        fmt_f64(p.gap_to_reference()),
        fmt_f64(p.entropy_of_smoothed_marginals.0),
        fmt_f64(p.entropy_of_smoothed_marginals.1),
        match &p.status {
            PointStatus::Converged => "converged".into(),
            PointStatus::Failed(e) => format!("failed: {e}"),
        },
    ]
}

pub fn gamma_limit_cmd(cli: &Cli, args: &GammaLimitArgs, config: Map<String, Value>) -> CliResult<()> {
    let mut r = Resolver::new(config);
    let g = globals(&mut r, cli);
    let mu = atoms(&mut r, "mu", args.mu.clone());
    let nu = atoms(&mut r, "nu", args.nu.clone());
    let cost = r.string("cost", args.cost.clone(), Some("sqdist"));
    let rule = match r.parsed("cost", cost, parse_cost) {
        Some(CostSpec::Rule(rule)) => Some(rule),
        Some(_) => {
            r.error("--cost: gamma-limit needs a closed-form cost rule (sqdist, abs or power:P)");
            None
        }
        None => None,
    };
    let schedule = r.required("schedule", args.schedule.clone());
    let schedule = r.parsed("schedule", schedule, parse_schedule);
    if let Some(s) = &schedule {
        if s.is_empty() {
            r.error("--schedule is empty");
        }
    }
    let n = r.usize("n", args.n, Some(256));
    if matches!(n, Some(k) if k < 2) {
        r.error("--n must be at least 2");
    }
    let domain = r.string("domain", args.domain.clone(), Some("0:1"));
    let domain = r.parsed("domain", domain, parse_domain);
    let d1 = r.string("domain1", args.domain1.clone(), None);
    let d1 = r.parsed("domain1", d1, parse_domain).or(domain);
    let d2 = r.string("domain2", args.domain2.clone(), None);
    let d2 = r.parsed("domain2", d2, parse_domain).or(domain);
    let opts = solve_options(&mut r, &args.opts);
    let out = r.string("out", args.out.clone(), Some("sweep.csv"));
    r.finish()?;

    let (n, out) = (n.unwrap(), out.unwrap());
    let grid = |(lo, hi): (f64, f64)| Grid1D::new(lo, hi, n);
    let (g1, g2) = (grid(d1.unwrap())?, grid(d2.unwrap())?);
    let (mu, nu) = (load_atoms(mu.unwrap())?, load_atoms(nu.unwrap())?);
    let schedule: Schedule = schedule.unwrap();
    let setup = SweepSetup::new(mu, nu, rule.unwrap(), g1, g2, schedule, opts)?;
    let points = parallel_map(setup.schedule().len(), g.threads, |k| setup.point(k));

    let header = [
        "gamma",
        "delta",
        "regularized_value",
        "reference",
        "gap_to_reference",
        "entropy_mu_delta",
        "entropy_nu_delta",
        "status",
    ];
    let rows: Vec<Vec<String>> = points.iter().map(sweep_row).collect();
    let mut outputs = Outputs::default();
    outputs.add(g.output(&out), csv_bytes(&header, &rows));
    commit(&g, outputs)?;
    let failed: Vec<String> = points
        .iter()
        .filter_map(|p| match &p.status {
            PointStatus::Failed(e) => Some(format!("gamma={} delta={}: {e}", p.gamma, p.delta)),
            PointStatus::Converged => None,
        })
        .collect();
    for p in &points {
        g.say(format!(
            "gamma {} delta {}: value {} (reference {})",
            p.gamma, p.delta, p.regularized_value, p.unregularized_reference
        ));
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::NotConverged(failed.join("\n")))
    }
}

fn input(r: &mut Resolver, flag: Option<String>) -> Option<PathBuf> {
    let p = r.required("input", flag).map(PathBuf::from)?;
    r.input_file(&p);
    Some(p)
}

pub fn orlicz_norm_cmd(cli: &Cli, args: &NormArgs, config: Map<String, Value>) -> CliResult<()> {
    let mut r = Resolver::new(config);
    let g = globals(&mut r, cli);
    let young = r.required("young", args.young.clone());
    let young = r.parsed("young", young, parse_young);
    let path = input(&mut r, args.input.clone());
    let tol = r.positive("tol", args.tol, Some(DEFAULT_NORM_TOL));
    let out = r.string("out", args.out.clone(), None);
    let provenance = r.finish()?;
    let (young, path, tol) = (young.unwrap(), path.unwrap(), tol.unwrap());

    let f = read_function(&path)?;
    let norm = luxemburg_norm(&f, young, tol)?;
    if !g.quiet {
        println!("{}", fmt_f64(norm.value));
    }
    if let Some(out) = out {
        let mut m = Map::new();
        m.insert("bracket".into(), floats(&[norm.bracket.0, norm.bracket.1]));
        m.insert("iterations".into(), json!(norm.iterations));
        m.insert("value".into(), json!(norm.value));
        m.insert("young".into(), json!(young.name()));
        let mut outputs = Outputs::default();
        outputs.add(g.output(&out), json_bytes(&with_provenance(m, provenance)));
        commit(&g, outputs)?;
    }
    Ok(())
}

pub fn entropy_cmd(cli: &Cli, args: &EntropyArgs, config: Map<String, Value>) -> CliResult<()> {
    let mut r = Resolver::new(config);
    let g = globals(&mut r, cli);
    let path = input(&mut r, args.input.clone());
    let out = r.string("out", args.out.clone(), None);
    let provenance = r.finish()?;

    let m = read_density(&path.unwrap())?;
    let e = neg_entropy(&m);
    if !g.quiet {
        println!("{}", fmt_f64(e));
    }
    if let Some(out) = out {
        let mut j = Map::new();
        j.insert("lower_bound".into(), json!(-m.grid().length() / std::f64::consts::E));
        j.insert("neg_entropy".into(), json!(e));
        j.insert("total_mass".into(), json!(m.total_mass()));
        let mut outputs = Outputs::default();
        outputs.add(g.output(&out), json_bytes(&with_provenance(j, provenance)));
        commit(&g, outputs)?;
    }
    Ok(())
}

struct Check {
    name: &'static str,
    value: f64,
    limit: f64,
    holds: bool,
}

fn checks(sol: &Solution, mu: &GridMeasure, nu: &GridMeasure, gamma: f64, tol: f64) -> CliResult<Vec<Check>> {
    let r = &sol.report;
    let (r1, r2) = r.optimality_residual;
    let gap_limit = (1e-6f64).max(10.0 * tol);
    // primal - dual = gamma (sum log a (row error) + sum log b (column error)),
    // so the gap is nonnegative only up to the remaining marginal errors
    let max_abs = |v: &[f64]| v.iter().filter(|x| x.is_finite()).fold(0.0f64, |m, x| m.max(x.abs()));
    let gap_floor = -(gamma * (max_abs(&sol.state.log_a) * r1 + max_abs(&sol.state.log_b) * r2) * (1.0 + 1e-6) + 1e-12);
    let support = support_check(&sol.plan, mu, nu, SUPPORT_THRESHOLD);
    let sandwich = potential_bounds(&sol.potentials, &sol.state, &sol.kernel, mu, gamma, SANDWICH_SLACK);
    let projection = check_projection_bound(&sol.plan, DEFAULT_NORM_TOL)?;
    let mass = (sol.plan.total_mass() - 1.0).abs();
    Ok(vec![
        Check { name: "first_marginal_residual", value: r1, limit: tol, holds: r1 <= tol },
        Check { name: "second_marginal_residual", value: r2, limit: tol, holds: r2 <= tol },
        Check { name: "duality_gap", value: r.gap, limit: gap_limit, holds: r.gap >= gap_floor && r.gap <= gap_limit },
        Check { name: "plan_mass", value: mass, limit: DEFAULT_MASS_TOL.max(10.0 * tol), holds: mass <= DEFAULT_MASS_TOL.max(10.0 * tol) },
        Check { name: "support", value: f64::from(u8::from(support)), limit: 1.0, holds: support },
        Check {
            name: "potential_sandwich",
            value: sandwich.max_violation,
            limit: SANDWICH_SLACK * (1.0 + sandwich.k),
            holds: sandwich.holds,
        },
        Check {
            name: "projection_bound_first",
            value: projection.first.lhs,
            limit: projection.first.rhs,
            holds: projection.first.holds,
        },
        Check {
            name: "projection_bound_second",
            value: projection.second.lhs,
            limit: projection.second.rhs,
            holds: projection.second.holds,
        },
    ])
}

pub fn check_optimality_cmd(cli: &Cli, args: &SolveArgs, config: Map<String, Value>) -> CliResult<()> {
    let mut r = Resolver::new(config);
    let g = globals(&mut r, cli);
    let prob = problem(&mut r, &args.problem);
    let gamma = r.required_positive("gamma", args.gamma);
    let opts = solve_options(&mut r, &args.opts);
    let out = r.string("out", args.out.clone(), Some("checks.json"));
    let plan = r.string("plan", args.plan.clone(), None);
    let provenance = r.finish()?;
    let (prob, gamma, out) = (prob.unwrap(), gamma.unwrap(), out.unwrap());

    let (mu, nu, cost) = load(&prob)?;
    let sol = solve(&mu, &nu, &cost, gamma, &opts)?;
    g.say(summary(&sol));
    let list = checks(&sol, &mu, &nu, gamma, opts.tol)?;
    let mut cm = Map::new();
    for c in &list {
        cm.insert(c.name.into(), json!({"holds": c.holds, "limit": c.limit, "value": c.value}));
        g.say(format!("{} {}: {} (limit {})", if c.holds { "ok  " } else { "FAIL" }, c.name, c.value, c.limit));
    }
    let failed: Vec<String> = list
        .iter()
        .filter(|c| !c.holds)
        .map(|c| format!("{}: {} against limit {}", c.name, c.value, c.limit))
        .collect();
    let mut m = Map::new();
    m.insert("all_hold".into(), json!(failed.is_empty()));
    m.insert("checks".into(), Value::Object(cm));
    m.insert("report".into(), Value::Object(report_json(&sol.report, gamma, opts.mode)));
    let mut outputs = Outputs::default();
    outputs.add(g.output(&out), json_bytes(&with_provenance(m, provenance)));
    if let Some(p) = plan {
        outputs.add(g.output(&p), plan_csv(&sol));
    }
    commit(&g, outputs)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::ChecksFailed(failed))
    }
}
