//! Inline argument syntaxes: cost specs, atom lists, schedules, domains.

use std::path::PathBuf;

use entropic_ot::gamma::Schedule;
use entropic_ot::{Atom, AtomicMeasure, CostRule, Mode, YoungFunction, DEFAULT_MASS_TOL};

#[derive(Debug, Clone, PartialEq)]
pub enum CostSpec {
    Rule(CostRule),
    Zero,
    File(PathBuf),
}

/// `sqdist`, `abs`, `power:P`, `zero` or `file:PATH`.
pub fn parse_cost(s: &str) -> Result<CostSpec, String> {
    match s {
        "sqdist" => return Ok(CostSpec::Rule(CostRule::SquaredDistance)),
        "abs" => return Ok(CostSpec::Rule(CostRule::AbsDistance)),
        "zero" => return Ok(CostSpec::Zero),
        _ => {}
    }
    if let Some(path) = s.strip_prefix("file:") {
        if path.is_empty() {
            return Err("cost file path is empty".into());
        }
        return Ok(CostSpec::File(path.into()));
    }
    if let Some(p) = s.strip_prefix("power:") {
        let p = p.strip_prefix("p=").unwrap_or(p);
        let p: f64 = p.parse().map_err(|_| format!("bad exponent in cost `{s}`"))?;
        if !(p > 0.0 && p.is_finite()) {
            return Err(format!("cost exponent must be positive, got {p}"));
        }
        return Ok(CostSpec::Rule(CostRule::Power(p)));
    }
    Err(format!("unknown cost `{s}` (expected sqdist, abs, power:P, zero or file:PATH)"))
}

pub fn parse_mode(s: &str) -> Result<Mode, String> {
    match s {
        "log" => Ok(Mode::Log),
        "direct" => Ok(Mode::Direct),
        _ => Err(format!("unknown mode `{s}` (expected log or direct)")),
    }
}

pub fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Log => "log",
        Mode::Direct => "direct",
    }
}

pub fn parse_young(s: &str) -> Result<YoungFunction, String> {
    match s {
        "log" => Ok(YoungFunction::PhiLog),
        "exp" => Ok(YoungFunction::PhiExp),
        "solver" => Ok(YoungFunction::PhiSolver),
        _ => Err(format!("unknown Young function `{s}` (expected log, exp or solver)")),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AtomSpec {
    Inline(AtomicMeasure),
    File(PathBuf),
}

/// `atoms:X:M,X:M,...` (a lone `atoms:X` is a unit point mass), otherwise a
/// CSV path with columns `x,mass`.
pub fn parse_atoms(s: &str) -> Result<AtomSpec, String> {
    let Some(list) = s.strip_prefix("atoms:") else {
        return Ok(AtomSpec::File(s.into()));
    };
    let items: Vec<&str> = list.split(',').collect();
    let mut atoms = Vec::with_capacity(items.len());
    for item in &items {
        let mut parts = item.split(':');
        let loc = parts.next().unwrap_or("");
        let location: f64 = loc.trim().parse().map_err(|_| format!("bad atom location `{loc}` in `{s}`"))?;
        let mass = match (parts.next(), items.len()) {
            (Some(m), _) => m.trim().parse().map_err(|_| format!("bad atom mass `{m}` in `{s}`"))?,
            (None, 1) => 1.0,
            (None, _) => return Err(format!("atom `{item}` needs a mass (X:M)")),
        };
        if parts.next().is_some() {
            return Err(format!("atom `{item}` has too many fields"));
        }
        atoms.push(Atom { location, mass });
    }
    AtomicMeasure::new(atoms, DEFAULT_MASS_TOL)
        .map(AtomSpec::Inline)
        .map_err(|e| format!("{s}: {e}"))
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad {what} `{t}`")))
        .collect()
}

/// `coupled:c=C:gammas=G,G,...` (c defaults to 1), `power:c=C:p=P:gammas=...`
/// or `pairs:G/D,G/D,...`.
pub fn parse_schedule(s: &str) -> Result<Schedule, String> {
    let mut fields = s.split(':');
    let kind = fields.next().unwrap_or("");
    if kind == "pairs" {
        let body = fields.collect::<Vec<_>>().join(":");
        let pairs = body
            .split(',')
            .map(|p| {
                let (g, d) = p.split_once('/').ok_or_else(|| format!("pair `{p}` is not GAMMA/DELTA"))?;
                let g = g.trim().parse::<f64>().map_err(|_| format!("bad gamma `{g}`"))?;
                let d = d.trim().parse::<f64>().map_err(|_| format!("bad delta `{d}`"))?;
                Ok((g, d))
            })
            .collect::<Result<Vec<_>, String>>()?;
        return Ok(Schedule(pairs));
    }
    let (mut c, mut p, mut gammas) = (None, None, None);
    for f in fields {
        let (k, v) = f.split_once('=').ok_or_else(|| format!("schedule field `{f}` is not KEY=VALUE"))?;
        match k {
            "c" => c = Some(v.parse::<f64>().map_err(|_| format!("bad c `{v}`"))?),
            "p" => p = Some(v.parse::<f64>().map_err(|_| format!("bad p `{v}`"))?),
            "gammas" => gammas = Some(parse_list(v, "gamma")?),
            _ => return Err(format!("unknown schedule field `{k}`")),
        }
    }
    let gammas = gammas.ok_or("schedule needs gammas=...")?;
    match kind {
        "coupled" if p.is_none() => Ok(Schedule::coupled(c.unwrap_or(1.0), &gammas)),
        "coupled" => Err("coupled schedules take no exponent; use power:".into()),
        "power" => Ok(Schedule::power(c.unwrap_or(1.0), p.ok_or("power schedule needs p=...")?, &gammas)),
        _ => Err(format!("unknown schedule kind `{kind}` (expected coupled, power or pairs)")),
    }
}

/// Comma-separated positive reals.
pub fn parse_gammas(s: &str) -> Result<Vec<f64>, String> {
    let v = parse_list(s, "gamma")?;
    if v.iter().any(|g| !(*g > 0.0 && g.is_finite())) {
        return Err("every gamma must be positive".into());
    }
    Ok(v)
}

/// `LO:HI` with `LO < HI`.
pub fn parse_domain(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("domain `{s}` is not LO:HI"))?;
    let lo: f64 = lo.trim().parse().map_err(|_| format!("bad domain bound `{lo}`"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("bad domain bound `{hi}`"))?;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(format!("domain `{s}` needs finite LO < HI"));
    }
    Ok((lo, hi))
}
