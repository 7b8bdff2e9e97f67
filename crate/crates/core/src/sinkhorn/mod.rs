//! Alternating scaling (Sinkhorn) iteration for the entropically
//! regularized transport problem
//!
//! ```text
//! min  sum c_ij pi_ij w + gamma sum pi_ij (log pi_ij - 1) w
//! s.t. sum_j pi_ij h2 = mu_i,  sum_i pi_ij h1 = nu_j
//! ```
//!
//! in the substituted dual variables `a = PhiSolver(u1)`, `b =
//! PhiSolver(u2)`. The optimal plan is `pi_ij = a_i K_ij b_j` with the Gibbs
//! kernel `K = exp(-c / gamma)`; each half step solves one optimality
//! equation exactly, the other is used as the stopping criterion.

mod kernel;
mod objective;
mod state;

use alloc::boxed::Box;
use alloc::vec::Vec;

pub use kernel::{gibbs_kernel, GibbsKernel};
pub use objective::{dual_value, optimality_residual, primal_parts, primal_value, support_check};
pub use state::{
    normalize_gauge, normalize_gauge_with_shift, potential_bounds, potentials_from_state,
    DualState, PotentialBounds, Potentials,
};

use crate::cost::CostField;
use crate::error::{Error, Result, Side};
use crate::math::{exp, ln, logsumexp};
use crate::measure::{Grid1D, GridMeasure, ProductDensity, DEFAULT_MASS_TOL};

/// A transport plan is a density on the product grid.
pub type TransportPlan = ProductDensity;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Scalings updated via log-sum-exp; safe for small `gamma`.
    #[default]
    Log,
    /// Plain multiplicative updates. Kept for cross-checks; overflows for
    /// small `gamma`.
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Stop once the L1 error of the second marginal falls below this.
    pub tol: f64,
    pub max_iter: usize,
    pub mode: Mode,
    /// Allowed deviation of the input masses from one.
    pub mass_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-9,
            max_iter: 100_000,
            mode: Mode::Log,
            mass_tol: DEFAULT_MASS_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// L1 error of the second marginal after every first-marginal update.
    pub residual_history: Vec<f64>,
    pub primal_value: f64,
    pub dual_value: f64,
    /// `primal_value - dual_value`.
    pub gap: f64,
    pub optimality_residual: (f64, f64),
    /// Shift `K` removed from `log a` (and added to `log b`) to reach
    /// `sum_i a_i h1 = 1`.
    pub gauge_constant: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub plan: TransportPlan,
    /// Gauge-normalized scalings.
    pub state: DualState,
    pub potentials: Potentials,
    pub report: SolveReport,
    /// Kernel used by the run, for further diagnostics.
    pub kernel: GibbsKernel,
}

/// Solves the regularized problem in the mode selected by `opts.mode`.
pub fn solve(
    mu: &GridMeasure,
    nu: &GridMeasure,
    cost: &CostField,
    gamma: f64,
    opts: &SolveOptions,
) -> Result<Solution> {
    match opts.mode {
        Mode::Log => solve_logdomain(mu, nu, cost, gamma, opts),
        Mode::Direct => solve_direct(mu, nu, cost, gamma, opts),
    }
}

/// Multiplicative scaling updates.
pub fn solve_direct(
    mu: &GridMeasure,
    nu: &GridMeasure,
    cost: &CostField,
    gamma: f64,
    opts: &SolveOptions,
) -> Result<Solution> {
    let kernel = prepare(mu, nu, cost, gamma, opts)?;
    let h1 = mu.grid().h();
    let h2 = nu.grid().h();
    let mut b: Vec<f64> = nu
        .density()
        .iter()
        .map(|v| if *v > 0.0 { 1.0 } else { 0.0 })
        .collect();
    let mut history = Vec::new();
    let mut a = Vec::new();
    for it in 1..=opts.max_iter {
        a = scale(mu.density(), &row_products(&kernel, &b), h2, it, Side::First)?;
        let col = col_products(&kernel, &a);
        let residual: f64 = b
            .iter()
            .zip(&col)
            .zip(nu.density())
            .map(|((b, k), n)| (b * k * h1 - n).abs())
            .sum::<f64>()
            * h2;
        if !residual.is_finite() {
            return Err(Error::Overflow { iteration: it });
        }
        history.push(residual);
        if residual < opts.tol {
            return Ok(finish(kernel, cost, mu, nu, DualState::from_scalings(a, b), history, Mode::Direct));
        }
        b = scale(nu.density(), &col, h1, it, Side::Second)?;
    }
    let sol = finish(kernel, cost, mu, nu, DualState::from_scalings(a, b), history, Mode::Direct);
    Err(Error::NotConverged(Box::new(sol.report)))
}

/// Log-domain scaling updates: `log a_i = log mu_i - logsumexp_j(-c_ij/gamma
/// + log b_j) - log h2`, and symmetrically for `b`.
pub fn solve_logdomain(
    mu: &GridMeasure,
    nu: &GridMeasure,
    cost: &CostField,
    gamma: f64,
    opts: &SolveOptions,
) -> Result<Solution> {
    let kernel = prepare(mu, nu, cost, gamma, opts)?;
    let h1 = mu.grid().h();
    let h2 = nu.grid().h();
    let log_nu: Vec<f64> = nu.density().iter().map(|v| ln(*v)).collect();
    let mut log_b: Vec<f64> = log_nu
        .iter()
        .map(|l| if *l > f64::NEG_INFINITY { 0.0 } else { f64::NEG_INFINITY })
        .collect();
    let mut history = Vec::new();
    let mut log_a = Vec::new();
    for it in 1..=opts.max_iter {
        log_a = log_scale(mu.density(), &log_row_reduce(&kernel, &log_b), h2, it, Side::First)?;
        let col = log_col_reduce(&kernel, &log_a);
        let residual: f64 = log_b
            .iter()
            .zip(&col)
            .zip(nu.density())
            .map(|((lb, lk), n)| (exp(lb + lk + ln(h1)) - n).abs())
            .sum::<f64>()
            * h2;
        if !residual.is_finite() {
            return Err(Error::Overflow { iteration: it });
        }
        history.push(residual);
        if residual < opts.tol {
            return Ok(finish(kernel, cost, mu, nu, DualState::from_logs(log_a, log_b), history, Mode::Log));
        }
        log_b = log_scale(nu.density(), &col, h1, it, Side::Second)?;
    }
    let sol = finish(kernel, cost, mu, nu, DualState::from_logs(log_a, log_b), history, Mode::Log);
    Err(Error::NotConverged(Box::new(sol.report)))
}

/// First half step: `a_i = mu_i / sum_j K_ij b_j h2` on the support of
/// `mu`, zero elsewhere.
pub fn sinkhorn_step_a(kernel: &GibbsKernel, b: &[f64], mu: &GridMeasure) -> Result<Vec<f64>> {
    check_len(b.len(), kernel.shape().1)?;
    check_len(mu.density().len(), kernel.shape().0)?;
    scale(mu.density(), &row_products(kernel, b), kernel.grid2().h(), 0, Side::First)
}

/// Second half step: `b_j = nu_j / sum_i K_ij a_i h1`.
pub fn sinkhorn_step_b(kernel: &GibbsKernel, a: &[f64], nu: &GridMeasure) -> Result<Vec<f64>> {
    check_len(a.len(), kernel.shape().0)?;
    check_len(nu.density().len(), kernel.shape().1)?;
    scale(nu.density(), &col_products(kernel, a), kernel.grid1().h(), 0, Side::Second)
}

/// [`sinkhorn_step_a`] on logarithms.
pub fn sinkhorn_log_step_a(kernel: &GibbsKernel, log_b: &[f64], mu: &GridMeasure) -> Result<Vec<f64>> {
    check_len(log_b.len(), kernel.shape().1)?;
    check_len(mu.density().len(), kernel.shape().0)?;
    log_scale(mu.density(), &log_row_reduce(kernel, log_b), kernel.grid2().h(), 0, Side::First)
}

/// [`sinkhorn_step_b`] on logarithms.
pub fn sinkhorn_log_step_b(kernel: &GibbsKernel, log_a: &[f64], nu: &GridMeasure) -> Result<Vec<f64>> {
    check_len(log_a.len(), kernel.shape().0)?;
    check_len(nu.density().len(), kernel.shape().1)?;
    log_scale(nu.density(), &log_col_reduce(kernel, log_a), kernel.grid1().h(), 0, Side::Second)
}

/// `pi_ij = a_i K_ij b_j`.
pub fn assemble_plan(state: &DualState, kernel: &GibbsKernel, mode: Mode) -> TransportPlan {
    let (n1, n2) = kernel.shape();
    let mut values = Vec::with_capacity(n1 * n2);
    match mode {
        Mode::Direct if state.is_finite() => {
            for (a, row) in state.a.iter().zip(kernel.rows()) {
                values.extend(row.iter().zip(&state.b).map(|(k, b)| a * k * b));
            }
        }
        _ => {
            for i in 0..n1 {
                values.extend((0..n2).map(|j| exp(state.log_plan_entry(kernel, i, j))));
            }
        }
    }
    ProductDensity::from_raw(*kernel.grid1(), *kernel.grid2(), values)
}

fn check_len(got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::param("vector length does not match the kernel"));
    }
    Ok(())
}

fn same_grid(a: &Grid1D, b: &Grid1D) -> bool {
    let scale = a.length().max(1.0);
    a.len() == b.len()
        && (a.lo() - b.lo()).abs() <= 1e-12 * scale
        && (a.hi() - b.hi()).abs() <= 1e-12 * scale
}

fn prepare(
    mu: &GridMeasure,
    nu: &GridMeasure,
    cost: &CostField,
    gamma: f64,
    opts: &SolveOptions,
) -> Result<GibbsKernel> {
    if !(opts.tol > 0.0) {
        return Err(Error::param("tol must be positive"));
    }
    if opts.max_iter == 0 {
        return Err(Error::param("max_iter must be positive"));
    }
    if !mu.is_probability(opts.mass_tol) || !nu.is_probability(opts.mass_tol) {
        return Err(Error::param("both marginals must be probability measures"));
    }
    if !same_grid(mu.grid(), cost.grid1()) || !same_grid(nu.grid(), cost.grid2()) {
        return Err(Error::param("cost grid does not match the marginals"));
    }
    gibbs_kernel(cost, gamma)
}

fn finish(
    kernel: GibbsKernel,
    cost: &CostField,
    mu: &GridMeasure,
    nu: &GridMeasure,
    raw: DualState,
    residual_history: Vec<f64>,
    mode: Mode,
) -> Solution {
    let gamma = kernel.gamma();
    let (state, gauge_constant) = normalize_gauge_with_shift(&raw, mu.grid().h());
    let plan = assemble_plan(&state, &kernel, mode);
    let primal = primal_value(&plan, cost, gamma);
    let dual = dual_value(&state, &kernel, mu, nu);
    let optimality = optimality_residual(&state, &kernel, mu, nu);
    let potentials = potentials_from_state(&state, gamma);
    Solution {
        plan,
        potentials,
        report: SolveReport {
            iterations: residual_history.len(),
            residual_history,
            primal_value: primal,
            dual_value: dual,
            gap: primal - dual,
            optimality_residual: optimality,
            gauge_constant,
        },
        state,
        kernel,
    }
}

/// `sum_j K_ij v_j` for every row.
fn row_products(kernel: &GibbsKernel, v: &[f64]) -> Vec<f64> {
    kernel
        .rows()
        .map(|row| row.iter().zip(v).map(|(k, x)| k * x).sum())
        .collect()
}

/// `sum_i v_i K_ij` for every column.
fn col_products(kernel: &GibbsKernel, v: &[f64]) -> Vec<f64> {
    let mut out = alloc::vec![0.0; kernel.shape().1];
    for (x, row) in v.iter().zip(kernel.rows()) {
        if *x == 0.0 {
            continue;
        }
        for (o, k) in out.iter_mut().zip(row) {
            *o += x * k;
        }
    }
    out
}

/// `logsumexp_j(log K_ij + v_j)` for every row.
pub(crate) fn log_row_reduce(kernel: &GibbsKernel, v: &[f64]) -> Vec<f64> {
    kernel
        .log_rows()
        .map(|row| logsumexp(row.iter().zip(v).map(|(k, x)| k + x)))
        .collect()
}

/// `logsumexp_i(v_i + log K_ij)` for every column, in two passes over the
/// rows.
pub(crate) fn log_col_reduce(kernel: &GibbsKernel, v: &[f64]) -> Vec<f64> {
    let n2 = kernel.shape().1;
    let mut max = alloc::vec![f64::NEG_INFINITY; n2];
    for (x, row) in v.iter().zip(kernel.log_rows()) {
        if *x == f64::NEG_INFINITY {
            continue;
        }
        for (m, k) in max.iter_mut().zip(row) {
            *m = m.max(x + k);
        }
    }
    let mut sum = alloc::vec![0.0; n2];
    for (x, row) in v.iter().zip(kernel.log_rows()) {
        if *x == f64::NEG_INFINITY {
            continue;
        }
        for ((s, k), m) in sum.iter_mut().zip(row).zip(&max) {
            *s += exp(x + k - m);
        }
    }
    max.iter()
        .zip(&sum)
        .map(|(m, s)| if *m == f64::NEG_INFINITY { *m } else { m + ln(*s) })
        .collect()
}

fn scale(marginal: &[f64], denom: &[f64], h: f64, iteration: usize, side: Side) -> Result<Vec<f64>> {
    marginal
        .iter()
        .zip(denom)
        .enumerate()
        .map(|(index, (m, d))| {
            if *m == 0.0 {
                return Ok(0.0);
            }
            let den = d * h;
            if !(den > 0.0) {
                return Err(Error::DivergedScaling {
                    iteration,
                    side,
                    index,
                });
            }
            let v = m / den;
            if !v.is_finite() {
                return Err(Error::Overflow { iteration });
            }
            Ok(v)
        })
        .collect()
}

fn log_scale(marginal: &[f64], log_denom: &[f64], h: f64, iteration: usize, side: Side) -> Result<Vec<f64>> {
    let ln_h = ln(h);
    marginal
        .iter()
        .zip(log_denom)
        .enumerate()
        .map(|(index, (m, ld))| {
            if *m == 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
            if !ld.is_finite() {
                return Err(Error::DivergedScaling {
                    iteration,
                    side,
                    index,
                });
            }
            Ok(ln(*m) - ld - ln_h)
        })
        .collect()
}

#[cfg(test)]
mod tests;
