//! Uniform grids on intervals and the discrete measures living on them.
//!
//! Densities are stored at cell centers; every integral is a midpoint sum
//! with the scalar cell weight `h` (or `h1 * h2` on product grids).

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Default relative tolerance for "this is a probability measure".
pub const DEFAULT_MASS_TOL: f64 = 1e-10;

/// `n` equal cells covering `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    lo: f64,
    hi: f64,
    n: usize,
}

impl Grid1D {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::param("grid endpoints must be finite"));
        }
        if hi <= lo {
            return Err(Error::param("grid requires hi > lo"));
        }
        if n == 0 {
            return Err(Error::param("grid requires at least one cell"));
        }
        Ok(Grid1D { lo, hi, n })
    }

    /// Recovers the grid from its (uniformly spaced) cell centers.
    pub fn from_centers(centers: &[f64], rel_tol: f64) -> Result<Self> {
        if centers.len() < 2 {
            return Err(Error::param("need at least two cell centers to infer a grid"));
        }
        let n = centers.len();
        let h = (centers[n - 1] - centers[0]) / (n - 1) as f64;
        if !(h > 0.0) {
            return Err(Error::param("cell centers must be strictly increasing"));
        }
        let lo = centers[0] - 0.5 * h;
        let grid = Grid1D::new(lo, lo + n as f64 * h, n)?;
        for (i, &x) in centers.iter().enumerate() {
            if (x - grid.center(i)).abs() > rel_tol * h {
                return Err(Error::param("cell centers are not uniformly spaced"));
            }
        }
        Ok(grid)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Cell width, which is also the quadrature weight.
    pub fn h(&self) -> f64 {
        (self.hi - self.lo) / self.n as f64
    }

    /// Lebesgue measure of the interval.
    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn center(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.h()
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + Clone + '_ {
        (0..self.n).map(move |i| self.center(i))
    }

    /// The sub-grid made of cells `start..start + len`.
    pub fn window(&self, start: usize, len: usize) -> Result<Grid1D> {
        if len == 0 || start + len > self.n {
            return Err(Error::param("window exceeds the grid"));
        }
        let h = self.h();
        Grid1D::new(
            self.lo + start as f64 * h,
            self.lo + (start + len) as f64 * h,
            len,
        )
    }
}

/// A real-valued function sampled at the centers of a grid. Values may be
/// negative; this is the carrier for potentials and `L_exp` functions.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid1D,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::param("value count does not match the grid"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("function values must be finite"));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Result<Self> {
        GridFunction::new(grid, grid.centers().map(f).collect())
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Average value over the interval.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.h() / self.grid.length()
    }
}

/// A nonnegative density on a grid (the discrete stand-in for `mu` or `nu`).
#[derive(Debug, Clone, PartialEq)]
pub struct GridMeasure {
    grid: Grid1D,
    density: Vec<f64>,
}

impl GridMeasure {
    pub fn new(grid: Grid1D, density: Vec<f64>) -> Result<Self> {
        if density.len() != grid.len() {
            return Err(Error::param("density length does not match the grid"));
        }
        if density.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(Error::param("densities must be finite and nonnegative"));
        }
        Ok(GridMeasure { grid, density })
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Result<Self> {
        GridMeasure::new(grid, grid.centers().map(f).collect())
    }

    pub fn uniform(grid: Grid1D, height: f64) -> Result<Self> {
        GridMeasure::new(grid, alloc::vec![height; grid.len()])
    }

    /// Like [`GridMeasure::new`] but insists on unit mass within `mass_tol`.
    pub fn probability(grid: Grid1D, density: Vec<f64>, mass_tol: f64) -> Result<Self> {
        let m = GridMeasure::new(grid, density)?;
        if !m.is_probability(mass_tol) {
            return Err(Error::param("measure does not have unit mass"));
        }
        Ok(m)
    }

    /// Rescales a density of positive mass to unit mass.
    pub fn normalized(grid: Grid1D, density: Vec<f64>) -> Result<Self> {
        let m = GridMeasure::new(grid, density)?;
        let mass = m.total_mass();
        if !(mass > 0.0) {
            return Err(Error::param("cannot normalize a measure of zero mass"));
        }
        Ok(m.scaled(1.0 / mass))
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn total_mass(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.grid.h()
    }

    pub fn is_probability(&self, mass_tol: f64) -> bool {
        (self.total_mass() - 1.0).abs() <= mass_tol
    }

    pub fn scaled(&self, factor: f64) -> GridMeasure {
        GridMeasure {
            grid: self.grid,
            density: self.density.iter().map(|d| d * factor).collect(),
        }
    }

    pub fn as_function(&self) -> GridFunction {
        GridFunction {
            grid: self.grid,
            values: self.density.clone(),
        }
    }

    /// Indices `i` with a strictly positive density.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.density
            .iter()
            .enumerate()
            .filter(|(_, d)| **d > 0.0)
            .map(|(i, _)| i)
    }

    /// The smallest contiguous window holding the support, with the offset
    /// of its first cell. `None` for the zero measure.
    pub fn trim_to_support(&self) -> Option<(usize, GridMeasure)> {
        let first = self.density.iter().position(|d| *d > 0.0)?;
        let last = self.density.iter().rposition(|d| *d > 0.0)?;
        let len = last - first + 1;
        let grid = self.grid.window(first, len).ok()?;
        Some((
            first,
            GridMeasure {
                grid,
                density: self.density[first..=last].to_vec(),
            },
        ))
    }
}

/// Total mass `sum_i density_i * h`.
pub fn total_mass(m: &GridMeasure) -> f64 {
    m.total_mass()
}

/// A nonnegative density on the product of two grids, stored row-major
/// (`values[i * n2 + j]` sits at `(x_i, y_j)`).
#[derive(Debug, Clone, PartialEq)]
pub struct ProductDensity {
    grid1: Grid1D,
    grid2: Grid1D,
    values: Vec<f64>,
}

impl ProductDensity {
    pub fn new(grid1: Grid1D, grid2: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid1.len() * grid2.len() {
            return Err(Error::param("value count does not match the product grid"));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::param("product densities must be finite and nonnegative"));
        }
        Ok(ProductDensity {
            grid1,
            grid2,
            values,
        })
    }

    pub(crate) fn from_raw(grid1: Grid1D, grid2: Grid1D, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid1.len() * grid2.len());
        ProductDensity {
            grid1,
            grid2,
            values,
        }
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

    pub fn shape(&self) -> (usize, usize) {
        (self.grid1.len(), self.grid2.len())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid2.len() + j]
    }

    pub fn rows(&self) -> core::slice::Chunks<'_, f64> {
        self.values.chunks(self.grid2.len())
    }

    pub fn cell_weight(&self) -> f64 {
        self.grid1.h() * self.grid2.h()
    }

    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_weight()
    }

    pub fn transpose(&self) -> ProductDensity {
        let (n1, n2) = self.shape();
        let mut values = alloc::vec![0.0; n1 * n2];
        for i in 0..n1 {
            for j in 0..n2 {
                values[j * n1 + i] = self.values[i * n2 + j];
            }
        }
        ProductDensity {
            grid1: self.grid2,
            grid2: self.grid1,
            values,
        }
    }

    pub fn marginals(&self) -> (GridMeasure, GridMeasure) {
        let (n1, n2) = self.shape();
        let (h1, h2) = (self.grid1.h(), self.grid2.h());
        let mut first = alloc::vec![0.0; n1];
        let mut second = alloc::vec![0.0; n2];
        for (i, row) in self.rows().enumerate() {
            first[i] = row.iter().sum::<f64>() * h2;
            for (acc, v) in second.iter_mut().zip(row) {
                *acc += v;
            }
        }
        for s in &mut second {
            *s *= h1;
        }
        (
            GridMeasure {
                grid: self.grid1,
                density: first,
            },
            GridMeasure {
                grid: self.grid2,
                density: second,
            },
        )
    }
}

/// First and second marginals (pushforwards under the coordinate
/// projections).
pub fn marginals(p: &ProductDensity) -> (GridMeasure, GridMeasure) {
    p.marginals()
}

/// The tensor product `m1 (x) m2`.
pub fn product_measure(m1: &GridMeasure, m2: &GridMeasure) -> ProductDensity {
    let mut values = Vec::with_capacity(m1.density.len() * m2.density.len());
    for a in &m1.density {
        values.extend(m2.density.iter().map(|b| a * b));
    }
    ProductDensity::from_raw(m1.grid, m2.grid, values)
}

/// A point mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

/// A finite sum of point masses with unit total mass, kept sorted by
/// location.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMeasure {
    atoms: Vec<Atom>,
}

impl AtomicMeasure {
    pub fn new(mut atoms: Vec<Atom>, mass_tol: f64) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::param("an atomic measure needs at least one atom"));
        }
        if atoms
            .iter()
            .any(|a| !a.location.is_finite() || !a.mass.is_finite() || a.mass <= 0.0)
        {
            return Err(Error::param("atoms need finite locations and positive masses"));
        }
        let mass: f64 = atoms.iter().map(|a| a.mass).sum();
        if (mass - 1.0).abs() > mass_tol {
            return Err(Error::param("atom masses must sum to one"));
        }
        atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
        Ok(AtomicMeasure { atoms })
    }

    /// A single unit atom.
    pub fn dirac(location: f64) -> Result<Self> {
        AtomicMeasure::new(
            alloc::vec![Atom {
                location,
                mass: 1.0
            }],
            0.0,
        )
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Whether every atom lies in `[lo, hi]` of the grid.
    pub fn within(&self, grid: &Grid1D) -> bool {
        self.atoms
            .iter()
            .all(|a| a.location >= grid.lo() && a.location <= grid.hi())
    }
}
