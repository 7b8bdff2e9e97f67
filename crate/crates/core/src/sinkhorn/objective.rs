//! Objective values and optimality diagnostics.

use super::kernel::GibbsKernel;
use super::state::DualState;
use crate::cost::CostField;
use crate::math::{exp, ln, logsumexp};
use crate::measure::{GridMeasure, ProductDensity};

/// Primal objective
/// `sum c_ij pi_ij w + gamma sum pi_ij (log pi_ij - 1) w`, `w = h1 h2`,
/// with `0 (log 0 - 1) = 0`.
pub fn primal_value(plan: &ProductDensity, cost: &CostField, gamma: f64) -> f64 {
    let (transport, entropy) = primal_parts(plan, cost);
    transport + gamma * entropy
}

/// `(sum c pi w, sum pi (log pi - 1) w)`.
pub fn primal_parts(plan: &ProductDensity, cost: &CostField) -> (f64, f64) {
    let w = plan.cell_weight();
    let mut transport = 0.0;
    let mut entropy = 0.0;
    for (p, c) in plan.values().iter().zip(cost.values()) {
        if *p > 0.0 {
            transport += c * p;
            entropy += p * (ln(*p) - 1.0);
        }
    }
    (transport * w, entropy * w)
}

/// Dual objective in the scaling variables,
/// `-gamma [ sum a_i K_ij b_j w - sum log(a_i) mu_i h1 - sum log(b_j) nu_j h2 ]`.
///
/// Cells where the marginal vanishes contribute nothing to the log terms.
/// Returns `-inf` (dual infeasible) when a scaling vanishes on the support
/// of its marginal.
pub fn dual_value(state: &DualState, kernel: &GibbsKernel, mu: &GridMeasure, nu: &GridMeasure) -> f64 {
    let gamma = kernel.gamma();
    let (h1, h2) = (mu.grid().h(), nu.grid().h());
    let mut coupling = 0.0;
    for (i, row) in kernel.log_rows().enumerate() {
        let la = state.log_a[i];
        if la == f64::NEG_INFINITY {
            continue;
        }
        for (lk, lb) in row.iter().zip(&state.log_b) {
            if *lb != f64::NEG_INFINITY {
                coupling += exp(la + lk + lb);
            }
        }
    }
    coupling *= h1 * h2;
    let mut first = 0.0;
    for i in mu.support() {
        if state.log_a[i] == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        first += state.log_a[i] * mu.density()[i];
    }
    let mut second = 0.0;
    for j in nu.support() {
        if state.log_b[j] == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        second += state.log_b[j] * nu.density()[j];
    }
    -gamma * (coupling - first * h1 - second * h2)
}

/// L1 violations of the two optimality equations
/// `a_i sum_j K_ij b_j h2 = mu_i` and `b_j sum_i K_ij a_i h1 = nu_j`,
/// restricted to the supports of the marginals.
pub fn optimality_residual(
    state: &DualState,
    kernel: &GibbsKernel,
    mu: &GridMeasure,
    nu: &GridMeasure,
) -> (f64, f64) {
    let (n1, n2) = kernel.shape();
    let (h1, h2) = (mu.grid().h(), nu.grid().h());
    let (ln_h1, ln_h2) = (ln(h1), ln(h2));

    let mut r1 = 0.0;
    for (i, row) in kernel.log_rows().enumerate() {
        let m = mu.density()[i];
        if m > 0.0 {
            let lse = logsumexp(row.iter().zip(&state.log_b).map(|(k, b)| k + b));
            r1 += (exp(state.log_a[i] + lse + ln_h2) - m).abs();
        }
    }

    let mut col_max = alloc::vec![f64::NEG_INFINITY; n2];
    for (i, row) in kernel.log_rows().enumerate() {
        let la = state.log_a[i];
        if la == f64::NEG_INFINITY {
            continue;
        }
        for (m, lk) in col_max.iter_mut().zip(row) {
            *m = m.max(la + lk);
        }
    }
    let mut col_sum = alloc::vec![0.0; n2];
    for i in 0..n1 {
        let la = state.log_a[i];
        if la == f64::NEG_INFINITY {
            continue;
        }
        let row = &kernel.log_values()[i * n2..(i + 1) * n2];
        for j in 0..n2 {
            if col_max[j] > f64::NEG_INFINITY {
                col_sum[j] += exp(la + row[j] - col_max[j]);
            }
        }
    }
    let mut r2 = 0.0;
    for j in nu.support() {
        let lse = if col_max[j] == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            col_max[j] + ln(col_sum[j])
        };
        r2 += (exp(state.log_b[j] + lse + ln_h1) - nu.density()[j]).abs();
    }
    (r1 * h1, r2 * h2)
}

/// Whether `plan_ij > threshold` holds exactly on `supp mu x supp nu`.
pub fn support_check(plan: &ProductDensity, mu: &GridMeasure, nu: &GridMeasure, threshold: f64) -> bool {
    let (n1, n2) = plan.shape();
    if n1 != mu.density().len() || n2 != nu.density().len() {
        return false;
    }
    plan.rows().enumerate().all(|(i, row)| {
        row.iter().enumerate().all(|(j, p)| {
            let inside = mu.density()[i] > 0.0 && nu.density()[j] > 0.0;
            (*p > threshold) == inside
        })
    })
}
