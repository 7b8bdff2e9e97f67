//! Young functions of the `L log L` / `L_exp` pair, Luxemburg norms and the
//! neg-entropy functional on sampled functions.
//!
//! On a grid every function is piecewise constant, so the modular
//! `sum_i Phi(|f_i| / gamma) * w` is the exact integral and the norms
//! computed here are exact up to the bisection tolerance.

use crate::error::{Error, Result};
use crate::math::{exp, ln, xlogx};
use crate::measure::{GridFunction, GridMeasure, ProductDensity};

/// Default relative bisection tolerance.
pub const DEFAULT_NORM_TOL: f64 = 1e-10;
/// Upper bound on bisection steps after bracketing.
pub const MAX_BISECTION_STEPS: usize = 200;

const BRACKET_FLOOR: f64 = 1e-300;
const BRACKET_CEIL: f64 = 1e300;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YoungFunction {
    /// `s log+ s`, the Young function of `L log L`.
    PhiLog,
    /// `s` on `[0, 1]`, `e^(s-1)` above; the Young function of `L_exp`.
    PhiExp,
    /// `PhiExp` extended by `+inf` on the negative axis; used for the scaling
    /// substitution `e^(alpha/gamma) = PhiSolver(u)`.
    PhiSolver,
}

impl YoungFunction {
    pub fn name(self) -> &'static str {
        match self {
            YoungFunction::PhiLog => "PhiLog",
            YoungFunction::PhiExp => "PhiExp",
            YoungFunction::PhiSolver => "PhiSolver",
        }
    }

    /// Evaluation on `[0, inf)`; callers guarantee the sign.
    fn eval_nonneg(self, s: f64) -> f64 {
        match self {
            YoungFunction::PhiLog => {
                if s > 1.0 {
                    s * ln(s)
                } else {
                    0.0
                }
            }
            YoungFunction::PhiExp | YoungFunction::PhiSolver => {
                if s <= 1.0 {
                    s
                } else {
                    exp(s - 1.0)
                }
            }
        }
    }

    /// Generalized inverse `sup { s >= 0 : Phi(s) <= t }` for `t > 0`.
    pub fn inverse(self, t: f64) -> Result<f64> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Domain {
                function: "Young function inverse",
                argument: t,
            });
        }
        Ok(match self {
            YoungFunction::PhiExp | YoungFunction::PhiSolver => phi_solver_inverse(t)?,
            YoungFunction::PhiLog => {
                // s log s = t has a unique root in (1, 1 + t] since s log s >= s - 1.
                let (mut lo, mut hi) = (1.0_f64, 1.0 + t);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid * ln(mid) <= t {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo <= f64::EPSILON * hi {
                        break;
                    }
                }
                0.5 * (lo + hi)
            }
        })
    }
}

/// Evaluates a Young function.
///
/// `PhiLog` and `PhiExp` are only defined on `[0, inf)`; `PhiSolver` takes
/// the value `+inf` on the negative axis.
pub fn young_eval(phi: YoungFunction, s: f64) -> Result<f64> {
    if s.is_nan() {
        return Err(Error::Domain {
            function: phi.name(),
            argument: s,
        });
    }
    if s < 0.0 {
        return match phi {
            YoungFunction::PhiSolver => Ok(f64::INFINITY),
            _ => Err(Error::Domain {
                function: phi.name(),
                argument: s,
            }),
        };
    }
    Ok(phi.eval_nonneg(s))
}

/// `log(PhiSolver(s))`: `log s` on `(0, 1)`, `s - 1` from 1 on, `-inf` for
/// `s <= 0`.
pub fn psi_solver(s: f64) -> f64 {
    if s <= 0.0 {
        f64::NEG_INFINITY
    } else if s < 1.0 {
        ln(s)
    } else {
        s - 1.0
    }
}

/// Inverse of `PhiSolver` on `[0, inf)`.
pub fn phi_solver_inverse(t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain {
            function: "PhiSolver inverse",
            argument: t,
        });
    }
    Ok(if t <= 1.0 { t } else { 1.0 + ln(t) })
}

/// Inverse of `PsiSolver` on the real line, with `-inf` mapped to 0.
pub fn psi_solver_inverse(t: f64) -> f64 {
    if t < 0.0 {
        exp(t)
    } else {
        t + 1.0
    }
}

/// Anything that can be read as samples with a scalar quadrature weight.
pub trait Sampled {
    fn samples(&self) -> &[f64];
    fn cell_weight(&self) -> f64;
    /// Lebesgue measure of the underlying domain.
    fn domain_measure(&self) -> f64;
}

/// Marker for sampled objects whose values are nonnegative densities.
pub trait Density: Sampled {}

impl Sampled for GridFunction {
    fn samples(&self) -> &[f64] {
        self.values()
    }
    fn cell_weight(&self) -> f64 {
        self.grid().h()
    }
    fn domain_measure(&self) -> f64 {
        self.grid().length()
    }
}

impl Sampled for GridMeasure {
    fn samples(&self) -> &[f64] {
        self.density()
    }
    fn cell_weight(&self) -> f64 {
        self.grid().h()
    }
    fn domain_measure(&self) -> f64 {
        self.grid().length()
    }
}

impl Sampled for ProductDensity {
    fn samples(&self) -> &[f64] {
        self.values()
    }
    fn cell_weight(&self) -> f64 {
        ProductDensity::cell_weight(self)
    }
    fn domain_measure(&self) -> f64 {
        self.grid1().length() * self.grid2().length()
    }
}

impl Density for GridMeasure {}
impl Density for ProductDensity {}

/// `sum_i f_i log f_i * w` with `0 log 0 = 0`.
pub fn neg_entropy<D: Density + ?Sized>(m: &D) -> f64 {
    m.samples().iter().map(|f| xlogx(*f)).sum::<f64>() * m.cell_weight()
}

/// Outcome of a Luxemburg norm bisection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormResult {
    pub value: f64,
    /// Final bracket; the modular exceeds 1 at `lo` and is at most 1 at `hi`.
    pub bracket: (f64, f64),
    pub iterations: usize,
}

/// `sum_i Phi(|f_i| / gamma) * w`.
pub fn modular(values: &[f64], weight: f64, phi: YoungFunction, gamma: f64) -> f64 {
    values
        .iter()
        .map(|f| phi.eval_nonneg(f.abs() / gamma))
        .sum::<f64>()
        * weight
}

/// Luxemburg norm `inf { gamma > 0 : sum Phi(|f| / gamma) w <= 1 }`.
pub fn luxemburg_norm<S: Sampled + ?Sized>(
    f: &S,
    phi: YoungFunction,
    tol: f64,
) -> Result<NormResult> {
    luxemburg_norm_of_samples(f.samples(), f.cell_weight(), phi, tol)
}

/// [`luxemburg_norm`] on raw samples with cell weight `weight`.
pub fn luxemburg_norm_of_samples(
    values: &[f64],
    weight: f64,
    phi: YoungFunction,
    tol: f64,
) -> Result<NormResult> {
    if !(tol > 0.0) {
        return Err(Error::param("norm tolerance must be positive"));
    }
    if !(weight > 0.0) || !weight.is_finite() {
        return Err(Error::param("cell weight must be positive"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("cannot take the norm of non-finite samples"));
    }
    if values.iter().all(|v| *v == 0.0) {
        return Ok(NormResult {
            value: 0.0,
            bracket: (0.0, 0.0),
            iterations: 0,
        });
    }
    let fits = |gamma: f64| modular(values, weight, phi, gamma) <= 1.0;

    // The modular is nonincreasing in gamma: grow or shrink geometrically
    // from 1 until the bracket [lo, hi] has fits(hi) and !fits(lo).
    let mut iterations = 0;
    let (mut lo, mut hi);
    if fits(1.0) {
        hi = 1.0;
        loop {
            lo = 0.5 * hi;
            iterations += 1;
            if lo < BRACKET_FLOOR {
                return Err(Error::NotBracketable);
            }
            if !fits(lo) {
                break;
            }
            hi = lo;
        }
    } else {
        lo = 1.0;
        loop {
            hi = 2.0 * lo;
            iterations += 1;
            if hi > BRACKET_CEIL {
                return Err(Error::NotBracketable);
            }
            if fits(hi) {
                break;
            }
            lo = hi;
        }
    }

    let mut steps = 0;
    while hi - lo > tol * lo && steps < MAX_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if fits(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        steps += 1;
    }
    Ok(NormResult {
        value: 0.5 * (lo + hi),
        bracket: (lo, hi),
        iterations: iterations + steps,
    })
}

/// Closed form of the norm of the constant 1 on a domain of measure `len`
/// for a strictly increasing (on the relevant range) Young function:
/// `1 / Phi^{-1}(1 / len)`.
pub fn indicator_norm(phi: YoungFunction, len: f64) -> Result<f64> {
    if !(len > 0.0) {
        return Err(Error::param("domain measure must be positive"));
    }
    Ok(1.0 / phi.inverse(1.0 / len)?)
}

/// A checked inequality `lhs <= rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl BoundCheck {
    fn new(lhs: f64, rhs: f64, tol: f64) -> Self {
        BoundCheck {
            lhs,
            rhs,
            holds: lhs <= rhs * (1.0 + tol) + tol,
        }
    }
}

/// The marginal norm bounds, one per coordinate projection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionBound {
    pub first: BoundCheck,
    pub second: BoundCheck,
}

impl ProjectionBound {
    pub fn holds(&self) -> bool {
        self.first.holds && self.second.holds
    }
}

/// `||P_i p||_{PhiLog} <= max(1, L(Omega_{3-i})) ||p||_{PhiLog}` for both
/// marginals.
pub fn check_projection_bound(p: &ProductDensity, tol: f64) -> Result<ProjectionBound> {
    let plan_norm = luxemburg_norm(p, YoungFunction::PhiLog, tol)?.value;
    let (m1, m2) = p.marginals();
    let lhs1 = luxemburg_norm(&m1, YoungFunction::PhiLog, tol)?.value;
    let lhs2 = luxemburg_norm(&m2, YoungFunction::PhiLog, tol)?.value;
    Ok(ProjectionBound {
        first: BoundCheck::new(lhs1, p.grid2().length().max(1.0) * plan_norm, tol),
        second: BoundCheck::new(lhs2, p.grid1().length().max(1.0) * plan_norm, tol),
    })
}

/// `min(1, L(Omega_1)) ||beta + mean(alpha)||_{PhiExp} <= ||alpha (+) beta||_{PhiExp}`
/// where `(alpha (+) beta)(x, y) = alpha(x) + beta(y)`.
pub fn check_oplus_bound(alpha: &GridFunction, beta: &GridFunction, tol: f64) -> Result<BoundCheck> {
    let shift = alpha.mean();
    let shifted: alloc::vec::Vec<f64> = beta.values().iter().map(|b| b + shift).collect();
    let shifted_norm =
        luxemburg_norm_of_samples(&shifted, beta.grid().h(), YoungFunction::PhiExp, tol)?.value;
    let lhs = alpha.grid().length().min(1.0) * shifted_norm;

    let mut sum = alloc::vec::Vec::with_capacity(alpha.values().len() * beta.values().len());
    for a in alpha.values() {
        sum.extend(beta.values().iter().map(|b| a + b));
    }
    let rhs = luxemburg_norm_of_samples(
        &sum,
        alpha.grid().h() * beta.grid().h(),
        YoungFunction::PhiExp,
        tol,
    )?
    .value;
    Ok(BoundCheck::new(lhs, rhs, tol))
}

/// For a norm of at least one, the modular dominates the norm:
/// `sum Phi(|u|) w >= ||u||_Phi`. `None` when the norm is below one and the
/// estimate does not apply.
pub fn check_modular_bound<S: Sampled + ?Sized>(
    u: &S,
    phi: YoungFunction,
    tol: f64,
) -> Result<Option<BoundCheck>> {
    let norm = luxemburg_norm(u, phi, tol)?.value;
    if norm < 1.0 {
        return Ok(None);
    }
    // Stated as lhs <= rhs: ||u|| <= modular.
    let value = modular(u.samples(), u.cell_weight(), phi, 1.0);
    Ok(Some(BoundCheck::new(norm, value, tol)))
}
