//! Transport costs on product grids.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::powf;
use crate::measure::Grid1D;

/// Closed-form costs `c(x, y) = h(x - y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostRule {
    /// `(x - y)^2`
    SquaredDistance,
    /// `|x - y|`
    AbsDistance,
    /// `|x - y|^p`, `p > 0`
    Power(f64),
}

impl CostRule {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let d = x - y;
        match *self {
            CostRule::SquaredDistance => d * d,
            CostRule::AbsDistance => d.abs(),
            CostRule::Power(p) => powf(d.abs(), p),
        }
    }

    /// Whether `h` in `c(x, y) = h(x - y)` is convex, which makes the
    /// monotone coupling optimal in one dimension.
    pub fn is_convex_in_difference(&self) -> bool {
        match *self {
            CostRule::SquaredDistance | CostRule::AbsDistance => true,
            CostRule::Power(p) => p >= 1.0,
        }
    }
}

/// Cost values `c(x_i, y_j)` on a product grid (row-major), together with
/// the rule that produced them when there is one.
#[derive(Debug, Clone, PartialEq)]
pub struct CostField {
    grid1: Grid1D,
    grid2: Grid1D,
    values: Vec<f64>,
    rule: Option<CostRule>,
}

impl CostField {
    pub fn from_rule(rule: CostRule, grid1: Grid1D, grid2: Grid1D) -> Result<Self> {
        if let CostRule::Power(p) = rule {
            if !(p > 0.0) || !p.is_finite() {
                return Err(Error::param("cost exponent must be positive"));
            }
        }
        let mut values = Vec::with_capacity(grid1.len() * grid2.len());
        for x in grid1.centers() {
            values.extend(grid2.centers().map(|y| rule.eval(x, y)));
        }
        Ok(CostField {
            grid1,
            grid2,
            values,
            rule: Some(rule),
        })
    }

    /// Tabulated costs, e.g. read from a file. They have no closed form and
    /// cannot be extended to larger domains.
    pub fn from_values(grid1: Grid1D, grid2: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid1.len() * grid2.len() {
            return Err(Error::param("cost table does not match the product grid"));
        }
        if values.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::param("costs must be finite and nonnegative"));
        }
        Ok(CostField {
            grid1,
            grid2,
            values,
            rule: None,
        })
    }

    pub fn grid1(&self) -> &Grid1D {
        &self.grid1
    }

    pub fn grid2(&self) -> &Grid1D {
        &self.grid2
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rule(&self) -> Option<CostRule> {
        self.rule
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid2.len() + j]
    }

    pub fn transpose(&self) -> CostField {
        let (n1, n2) = (self.grid1.len(), self.grid2.len());
        let mut values = alloc::vec![0.0; n1 * n2];
        for i in 0..n1 {
            for j in 0..n2 {
                values[j * n1 + i] = self.values[i * n2 + j];
            }
        }
        CostField {
            grid1: self.grid2,
            grid2: self.grid1,
            values,
            rule: None,
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}
