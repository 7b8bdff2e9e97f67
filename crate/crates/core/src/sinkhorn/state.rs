use alloc::vec::Vec;

use super::kernel::GibbsKernel;
use crate::math::{exp, ln, logsumexp};
use crate::measure::GridMeasure;

/// Scaling variables `a = PhiSolver(u1)`, `b = PhiSolver(u2)` with their
/// logarithms. A zero scaling has logarithm `-inf`.
///
/// In log-domain runs `a` or `b` may overflow to `+inf` while the
/// logarithms stay finite; all diagnostics in this crate read the
/// logarithms.
#[derive(Debug, Clone, PartialEq)]
pub struct DualState {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub log_a: Vec<f64>,
    pub log_b: Vec<f64>,
}

impl DualState {
    pub fn from_scalings(a: Vec<f64>, b: Vec<f64>) -> Self {
        let log_a = a.iter().map(|v| ln(*v)).collect();
        let log_b = b.iter().map(|v| ln(*v)).collect();
        DualState { a, b, log_a, log_b }
    }

    pub fn from_logs(log_a: Vec<f64>, log_b: Vec<f64>) -> Self {
        let a = log_a.iter().map(|v| exp(*v)).collect();
        let b = log_b.iter().map(|v| exp(*v)).collect();
        DualState { a, b, log_a, log_b }
    }

    /// `(a / k, k * b)`: the gauge transformation. The assembled plan and
    /// the dual value do not change.
    pub fn rescaled(&self, k: f64) -> DualState {
        let log_k = ln(k);
        if self.is_finite() && k.is_finite() && k > 0.0 {
            DualState {
                a: self.a.iter().map(|v| v / k).collect(),
                b: self.b.iter().map(|v| v * k).collect(),
                log_a: self.log_a.iter().map(|v| v - log_k).collect(),
                log_b: self.log_b.iter().map(|v| v + log_k).collect(),
            }
        } else {
            self.shifted_log(log_k)
        }
    }

    /// Gauge transformation by `exp(log_k)`, computed from the logarithms.
    pub fn shifted_log(&self, log_k: f64) -> DualState {
        DualState::from_logs(
            self.log_a.iter().map(|v| v - log_k).collect(),
            self.log_b.iter().map(|v| v + log_k).collect(),
        )
    }

    /// Whether both scaling vectors are finite (no overflow).
    pub fn is_finite(&self) -> bool {
        self.a.iter().chain(&self.b).all(|v| v.is_finite())
    }

    /// `log(a_i K_ij b_j)`.
    pub(crate) fn log_plan_entry(&self, kernel: &GibbsKernel, i: usize, j: usize) -> f64 {
        self.log_a[i] + kernel.log_values()[i * self.log_b.len() + j] + self.log_b[j]
    }
}

/// Rescales `state` so that `sum_i a_i h1 = 1`. Returns the new state and
/// the additive shift `ln(sum_i a_i h1)` that was removed from `log a`.
pub fn normalize_gauge_with_shift(state: &DualState, h1: f64) -> (DualState, f64) {
    let log_mass = logsumexp(state.log_a.iter().copied()) + ln(h1);
    let mass: f64 = state.a.iter().sum::<f64>() * h1;
    if mass.is_finite() && mass > 0.0 && state.is_finite() {
        if mass == 1.0 {
            return (state.clone(), 0.0);
        }
        (state.rescaled(mass), ln(mass))
    } else {
        (state.shifted_log(log_mass), log_mass)
    }
}

/// Fixes the gauge by `sum_i a_i h1 = 1`. The plan and dual value are
/// unchanged.
pub fn normalize_gauge(state: &DualState, h1: f64) -> DualState {
    normalize_gauge_with_shift(state, h1).0
}

/// Back-substituted potentials `alpha = gamma log a`, `beta = gamma log b`
/// (`-inf` where the scaling vanishes).
#[derive(Debug, Clone, PartialEq)]
pub struct Potentials {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

pub fn potentials_from_state(state: &DualState, gamma: f64) -> Potentials {
    Potentials {
        alpha: state.log_a.iter().map(|l| gamma * l).collect(),
        beta: state.log_b.iter().map(|l| gamma * l).collect(),
    }
}

/// Two-sided bound `log mu - K <= alpha / gamma <= log mu + K` on the
/// support of `mu`, with `K` derived from the extreme values `c_lo`, `c_hi`
/// of `x_i -> sum_j K_ij b_j h2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialBounds {
    pub log_c_lo: f64,
    pub log_c_hi: f64,
    /// `max(|log c_lo|, |log c_hi|)`.
    pub k: f64,
    /// Largest positive part of `|alpha_i / gamma - log mu_i| - K` on the
    /// support.
    pub max_violation: f64,
    pub holds: bool,
}

/// Checks the potential sandwich for the first potential.
pub fn potential_bounds(
    potentials: &Potentials,
    state: &DualState,
    kernel: &GibbsKernel,
    mu: &GridMeasure,
    gamma: f64,
    slack: f64,
) -> PotentialBounds {
    let ln_h2 = ln(kernel.grid2().h());
    let (mut log_c_lo, mut log_c_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for row in kernel.log_rows() {
        let r = logsumexp(row.iter().zip(&state.log_b).map(|(k, b)| k + b)) + ln_h2;
        log_c_lo = log_c_lo.min(r);
        log_c_hi = log_c_hi.max(r);
    }
    let k = log_c_lo.abs().max(log_c_hi.abs());
    let mut max_violation: f64 = 0.0;
    for i in mu.support() {
        let d = (potentials.alpha[i] / gamma - ln(mu.density()[i])).abs();
        max_violation = max_violation.max(d - k);
    }
    PotentialBounds {
        log_c_lo,
        log_c_hi,
        k,
        max_violation,
        holds: k.is_finite() && max_violation <= slack * (1.0 + k),
    }
}
