//! Exact unregularized transport between atomic measures in one dimension.

use crate::cost::CostRule;
use crate::error::{Error, Result};
use crate::measure::AtomicMeasure;

/// Largest instance accepted by [`brute_force_ot`] (8! = 40320 couplings).
pub const BRUTE_FORCE_MAX_ATOMS: usize = 8;

/// Optimal cost for `c(x, y) = h(x - y)` with convex `h`, via the monotone
/// (north-west corner) coupling of the sorted atoms.
pub fn unregularized_ot_1d(mu: &AtomicMeasure, nu: &AtomicMeasure, rule: CostRule) -> Result<f64> {
    if !rule.is_convex_in_difference() {
        return Err(Error::param(
            "monotone coupling is only optimal for convex costs; use brute_force_ot",
        ));
    }
    let (xs, ys) = (mu.atoms(), nu.atoms());
    let (mut i, mut j) = (0, 0);
    let (mut ra, mut rb) = (xs[0].mass, ys[0].mass);
    let mut total = 0.0;
    while i < xs.len() && j < ys.len() {
        let c = rule.eval(xs[i].location, ys[j].location);
        if ra < rb {
            total += ra * c;
            rb -= ra;
            i += 1;
            ra = xs.get(i).map_or(0.0, |a| a.mass);
        } else if rb < ra {
            total += rb * c;
            ra -= rb;
            j += 1;
            rb = ys.get(j).map_or(0.0, |a| a.mass);
        } else {
            total += ra * c;
            i += 1;
            j += 1;
            ra = xs.get(i).map_or(0.0, |a| a.mass);
            rb = ys.get(j).map_or(0.0, |a| a.mass);
        }
    }
    Ok(total)
}

/// Exact optimum over all permutation couplings of two measures made of
/// the same number of equal-mass atoms. Any cost function is allowed.
pub fn brute_force_ot<F>(mu: &AtomicMeasure, nu: &AtomicMeasure, cost: F) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    let n = mu.len();
    if nu.len() != n {
        return Err(Error::param("brute force needs the same number of atoms on both sides"));
    }
    if n > BRUTE_FORCE_MAX_ATOMS {
        return Err(Error::param("brute force is limited to 8 atoms"));
    }
    let share = 1.0 / n as f64;
    if mu
        .atoms()
        .iter()
        .chain(nu.atoms())
        .any(|a| (a.mass - share).abs() > 1e-12)
    {
        return Err(Error::param("brute force needs equal-mass atoms"));
    }
    let xs = mu.atoms();
    let ys = nu.atoms();
    let value = |perm: &[usize]| -> f64 {
        xs.iter()
            .zip(perm)
            .map(|(x, &p)| x.mass * cost(x.location, ys[p].location))
            .sum()
    };

    // Heap's algorithm, iterative form.
    let mut perm: [usize; BRUTE_FORCE_MAX_ATOMS] = [0, 1, 2, 3, 4, 5, 6, 7];
    let perm = &mut perm[..n];
    let mut counters = [0usize; BRUTE_FORCE_MAX_ATOMS];
    let mut best = value(perm);
    let mut k = 1;
    while k < n {
        if counters[k] < k {
            if k % 2 == 0 {
                perm.swap(0, k);
            } else {
                perm.swap(counters[k], k);
            }
            best = best.min(value(perm));
            counters[k] += 1;
            k = 1;
        } else {
            counters[k] = 0;
            k += 1;
        }
    }
    Ok(best)
}
