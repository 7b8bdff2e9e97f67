//! Entropically regularized optimal transport between densities on compact
//! intervals.
//!
//! The crate is `no_std` (it needs `alloc`) and is organized bottom-up:
//!
//! * [`measure`]: uniform grids, sampled densities, product densities,
//!   marginals and atomic measures.
//! * [`orlicz`]: the Young functions of `L log L` and `L_exp`, Luxemburg
//!   norms by bisection, neg-entropy and executable norm inequalities.
//! * [`cost`]: closed-form cost rules and their evaluation on product grids.
//! * [`sinkhorn`]: Gibbs kernels, the alternating scaling iteration (direct
//!   and log-domain), primal and dual objectives and optimality diagnostics.
//! * [`gamma`]: mollifiers, smoothing of singular marginals, exact
//!   unregularized 1D oracles and coupled `(gamma, delta)` sweeps.
//!
//! File formats and the command-line driver live in the `entropic-ot-cli`
//! companion crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod cost;
mod error;
pub mod gamma;
pub(crate) mod math;
pub mod measure;
pub mod orlicz;
pub mod sinkhorn;

pub use cost::{CostField, CostRule};
pub use error::{Error, Result, Side};
pub use measure::{
    marginals, product_measure, total_mass, Atom, AtomicMeasure, Grid1D, GridFunction,
    GridMeasure, ProductDensity, DEFAULT_MASS_TOL,
};
pub use orlicz::{luxemburg_norm, neg_entropy, young_eval, NormResult, YoungFunction};
pub use sinkhorn::{
    dual_value, gibbs_kernel, normalize_gauge, optimality_residual, potentials_from_state,
    primal_parts, primal_value, solve, solve_direct, solve_logdomain, support_check, DualState, GibbsKernel,
    Mode, Potentials, Solution, SolveOptions, SolveReport, TransportPlan,
};
