//! Mollification of singular marginals and `(gamma, delta)` sweeps toward
//! the unregularized limit.

mod mollifier;
mod oracle;
mod sweep;

pub use mollifier::{
    bump_profile, smooth_atoms, smooth_coupling, smooth_density, smooth_marginal, ExtendedDomain,
    MarginalInput, Mollifier,
};
pub use oracle::{brute_force_ot, unregularized_ot_1d, BRUTE_FORCE_MAX_ATOMS};
pub use sweep::{gamma_sweep, PointStatus, Schedule, SweepPoint, SweepSetup};

use crate::math::{exp, ln};

/// Lower bound on the entropic term of the recovery sequence built from
/// a coupling smoothed at scale `delta` by `mollifier` (1D x 1D):
/// `-gamma (1 + 2 log delta - log C)` with `C = (e^-1 / Z)^2`.
pub fn recovery_entropy_bound(gamma: f64, delta: f64, mollifier: &Mollifier) -> f64 {
    let c = exp(-1.0) / mollifier.normalization();
    -gamma * (1.0 + 2.0 * ln(delta) - 2.0 * ln(c))
}
