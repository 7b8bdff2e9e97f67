use alloc::vec::Vec;

use crate::cost::CostField;
use crate::error::{Error, Result};
use crate::math::exp;
use crate::measure::Grid1D;

/// The Gibbs kernel `K_ij = exp(-c_ij / gamma)`, kept both as values and as
/// exponents `-c_ij / gamma` for log-domain work.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsKernel {
    grid1: Grid1D,
    grid2: Grid1D,
    gamma: f64,
    values: Vec<f64>,
    log_values: Vec<f64>,
}

/// Assembles the Gibbs kernel of `cost` at regularization `gamma`.
pub fn gibbs_kernel(cost: &CostField, gamma: f64) -> Result<GibbsKernel> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::param("gamma must be positive and finite"));
    }
    let log_values: Vec<f64> = cost.values().iter().map(|c| -c / gamma).collect();
    let values = log_values.iter().map(|l| exp(*l)).collect();
    Ok(GibbsKernel {
        grid1: *cost.grid1(),
        grid2: *cost.grid2(),
        gamma,
        values,
        log_values,
    })
}

impl GibbsKernel {
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn grid1(&self) -> &Grid1D {
        &self.grid1
    }

    pub fn grid2(&self) -> &Grid1D {
        &self.grid2
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.grid1.len(), self.grid2.len())
    }

    /// `exp(-c / gamma)`; entries may underflow to zero for small `gamma`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `-c / gamma`, always finite.
    pub fn log_values(&self) -> &[f64] {
        &self.log_values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid2.len() + j]
    }

    pub(crate) fn rows(&self) -> core::slice::Chunks<'_, f64> {
        self.values.chunks(self.grid2.len())
    }

    pub(crate) fn log_rows(&self) -> core::slice::Chunks<'_, f64> {
        self.log_values.chunks(self.grid2.len())
    }
}
