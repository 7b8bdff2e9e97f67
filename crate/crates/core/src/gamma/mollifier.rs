use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{ceil, exp, floor};
use crate::measure::{AtomicMeasure, Grid1D, GridMeasure, ProductDensity};

/// Minimum number of quadrature nodes for the normalization constant.
const MIN_QUADRATURE_NODES: usize = 256;
const INV_E: f64 = 0.36787944117144233;

/// The standard bump `s -> exp(-1 / (1 - s^2))` on `(-1, 1)`, zero outside.
pub fn bump_profile(s: f64) -> f64 {
    if s.abs() < 1.0 {
        exp(-1.0 / (1.0 - s * s))
    } else {
        0.0
    }
}

/// `B_delta(x) = profile(x / delta) / (delta Z)`, a smooth nonnegative
/// kernel supported on `[-delta, delta]` with unit integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mollifier {
    delta: f64,
    z: f64,
}

impl Mollifier {
    /// `Z` is computed by the midpoint rule at a quarter of `working_h`
    /// (and never with fewer than 256 nodes across the support).
    pub fn new(delta: f64, working_h: f64) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::param("mollifier width must be positive"));
        }
        if !(working_h > 0.0) {
            return Err(Error::param("working grid width must be positive"));
        }
        let ds = 0.25 * working_h / delta;
        let nodes = (ceil(2.0 / ds) as usize).max(MIN_QUADRATURE_NODES);
        let ds = 2.0 / nodes as f64;
        let z = (0..nodes)
            .map(|k| bump_profile(-1.0 + (k as f64 + 0.5) * ds))
            .sum::<f64>()
            * ds;
        Ok(Mollifier { delta, z })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Normalization constant of the profile, about 0.443994.
    pub fn normalization(&self) -> f64 {
        self.z
    }

    pub fn eval(&self, x: f64) -> f64 {
        bump_profile(x / self.delta) / (self.delta * self.z)
    }

    /// `sup B_delta = e^{-1} / (delta Z)`.
    pub fn sup_norm(&self) -> f64 {
        INV_E / (self.delta * self.z)
    }

    /// Kernel weights on `grid` for a unit mass at `x0`, renormalized so
    /// that their midpoint sum is exactly one. Returns the first index and
    /// the weights (as densities).
    fn weights_at(&self, grid: &Grid1D, x0: f64) -> Result<(usize, Vec<f64>)> {
        let h = grid.h();
        let first = floor((x0 - self.delta - grid.lo()) / h).max(0.0) as usize;
        let last = (ceil((x0 + self.delta - grid.lo()) / h).max(0.0) as usize).min(grid.len());
        let mut w: Vec<f64> = (first..last).map(|i| self.eval(grid.center(i) - x0)).collect();
        let total = w.iter().sum::<f64>() * h;
        if !(total > 0.0) {
            return Err(Error::param("mollifier is not resolved by the grid"));
        }
        for v in &mut w {
            *v /= total;
        }
        Ok((first, w))
    }
}

/// A grid enlarged on both sides by whole cells so that smoothing with
/// kernels of width up to the margin stays inside it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtendedDomain {
    original: Grid1D,
    extended: Grid1D,
    offset: usize,
}

impl ExtendedDomain {
    pub fn new(original: Grid1D, margin: f64) -> Result<Self> {
        if !(margin >= 0.0) || !margin.is_finite() {
            return Err(Error::param("extension margin must be nonnegative"));
        }
        let h = original.h();
        let cells = ceil(margin / h - 1e-9).max(0.0) as usize;
        let pad = cells as f64 * h;
        let extended = Grid1D::new(
            original.lo() - pad,
            original.hi() + pad,
            original.len() + 2 * cells,
        )?;
        Ok(ExtendedDomain {
            original,
            extended,
            offset: cells,
        })
    }

    pub fn original(&self) -> &Grid1D {
        &self.original
    }

    pub fn extended(&self) -> &Grid1D {
        &self.extended
    }

    /// Index of the first original cell inside the extended grid.
    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn margin(&self) -> f64 {
        self.offset as f64 * self.original.h()
    }
}

/// What gets smoothed: point masses or a density on the original grid.
#[derive(Debug, Clone, Copy)]
pub enum MarginalInput<'a> {
    Atoms(&'a AtomicMeasure),
    Grid(&'a GridMeasure),
}

/// `B_delta * m~` on the extended grid, where `m~` is `m` extended by zero.
/// Mass is preserved exactly up to rounding.
pub fn smooth_marginal(m: MarginalInput<'_>, delta: f64, ext: &ExtendedDomain) -> Result<GridMeasure> {
    let mollifier = Mollifier::new(delta, ext.extended().h())?;
    match m {
        MarginalInput::Atoms(atoms) => smooth_atoms(atoms, &mollifier, ext),
        MarginalInput::Grid(density) => smooth_density(density, &mollifier, ext),
    }
}

fn check_margin(mollifier: &Mollifier, ext: &ExtendedDomain) -> Result<()> {
    if mollifier.delta() > ext.margin() * (1.0 + 1e-12) {
        return Err(Error::param("mollifier width exceeds the extension margin"));
    }
    Ok(())
}

pub fn smooth_atoms(m: &AtomicMeasure, mollifier: &Mollifier, ext: &ExtendedDomain) -> Result<GridMeasure> {
    check_margin(mollifier, ext)?;
    if !m.within(ext.original()) {
        return Err(Error::param("atoms must lie in the original domain"));
    }
    let grid = *ext.extended();
    let mut density = alloc::vec![0.0; grid.len()];
    for atom in m.atoms() {
        let (first, w) = mollifier.weights_at(&grid, atom.location)?;
        for (d, v) in density[first..].iter_mut().zip(&w) {
            *d += atom.mass * v;
        }
    }
    GridMeasure::new(grid, density)
}

pub fn smooth_density(m: &GridMeasure, mollifier: &Mollifier, ext: &ExtendedDomain) -> Result<GridMeasure> {
    check_margin(mollifier, ext)?;
    let orig = ext.original();
    if m.grid().len() != orig.len() || (m.grid().lo() - orig.lo()).abs() > 1e-12 * orig.length() {
        return Err(Error::param("density must live on the original grid"));
    }
    let grid = *ext.extended();
    let h = grid.h();
    // Offsets are shared by every source cell: one kernel stencil.
    let radius = ceil(mollifier.delta() / h) as usize;
    let mut stencil: Vec<f64> = (0..=2 * radius)
        .map(|r| mollifier.eval((r as f64 - radius as f64) * h))
        .collect();
    let total = stencil.iter().sum::<f64>() * h;
    if !(total > 0.0) {
        return Err(Error::param("mollifier is not resolved by the grid"));
    }
    for s in &mut stencil {
        *s /= total;
    }
    let mut density = alloc::vec![0.0; grid.len()];
    let src_h = orig.h();
    for (k, d) in m.density().iter().enumerate() {
        if *d == 0.0 {
            continue;
        }
        let center = k + ext.offset();
        let mass = d * src_h;
        for (r, s) in stencil.iter().enumerate() {
            let idx = center + r;
            if idx < radius || idx - radius >= grid.len() {
                continue;
            }
            density[idx - radius] += mass * s;
        }
    }
    GridMeasure::new(grid, density)
}

/// `G_delta * pi` for a discrete coupling `pi = sum m_k delta_(x_k, y_k)`
/// with `G_delta(x, y) = B_delta(x) B_delta(y)`, on the product of the
/// extended grids.
pub fn smooth_coupling(
    coupling: &[(f64, f64, f64)],
    mollifier: &Mollifier,
    ext1: &ExtendedDomain,
    ext2: &ExtendedDomain,
) -> Result<ProductDensity> {
    check_margin(mollifier, ext1)?;
    check_margin(mollifier, ext2)?;
    let (g1, g2) = (*ext1.extended(), *ext2.extended());
    let n2 = g2.len();
    let mut values = alloc::vec![0.0; g1.len() * n2];
    for &(x, y, mass) in coupling {
        if !(mass >= 0.0) {
            return Err(Error::param("coupling masses must be nonnegative"));
        }
        let (f1, w1) = mollifier.weights_at(&g1, x)?;
        let (f2, w2) = mollifier.weights_at(&g2, y)?;
        for (di, u) in w1.iter().enumerate() {
            let row = (f1 + di) * n2;
            for (dj, v) in w2.iter().enumerate() {
                values[row + f2 + dj] += mass * u * v;
            }
        }
    }
    ProductDensity::new(g1, g2, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Atom;

    #[test]
    fn normalization_constant() {
        let m = Mollifier::new(0.1, 0.001).unwrap();
        assert!((m.normalization() - 0.4439938161680794).abs() < 1e-9);
    }

    #[test]
    fn unit_integral_on_a_fine_grid() {
        let delta = 0.05;
        let g = Grid1D::new(-0.2, 0.2, 1024).unwrap();
        let m = Mollifier::new(delta, g.h()).unwrap();
        let total: f64 = g.centers().map(|x| m.eval(x)).sum::<f64>() * g.h();
        assert!((total - 1.0).abs() < 1e-6);
        assert!(g.centers().all(|x| m.eval(x) >= 0.0));
        assert_eq!(m.eval(0.05), 0.0);
        assert_eq!(m.eval(-0.06), 0.0);
    }

    #[test]
    fn extension_keeps_original_centers() {
        let g = Grid1D::new(0.0, 1.0, 20).unwrap();
        let e = ExtendedDomain::new(g, 0.12).unwrap();
        assert!(e.margin() >= 0.12);
        assert_eq!(e.offset(), 3);
        for i in 0..20 {
            assert!((e.extended().center(i + e.offset()) - g.center(i)).abs() < 1e-14);
        }
    }

    #[test]
    fn single_atom_keeps_unit_mass_near_atom() {
        let g = Grid1D::new(0.0, 1.0, 200).unwrap();
        let e = ExtendedDomain::new(g, 0.1).unwrap();
        let atom = AtomicMeasure::dirac(0.37).unwrap();
        let s = smooth_marginal(MarginalInput::Atoms(&atom), 0.08, &e).unwrap();
        assert!((s.total_mass() - 1.0).abs() < 1e-12);
        for (x, d) in s.grid().centers().zip(s.density()) {
            if *d > 0.0 {
                assert!((x - 0.37).abs() < 0.08);
            }
        }
    }

    #[test]
    fn two_atoms_split_mass() {
        let g = Grid1D::new(0.0, 1.0, 400).unwrap();
        let e = ExtendedDomain::new(g, 0.05).unwrap();
        let atoms = AtomicMeasure::new(
            alloc::vec![Atom { location: 0.0, mass: 0.5 }, Atom { location: 1.0, mass: 0.5 }],
            1e-12,
        )
        .unwrap();
        let s = smooth_marginal(MarginalInput::Atoms(&atoms), 0.05, &e).unwrap();
        let h = s.grid().h();
        let left: f64 = s
            .grid()
            .centers()
            .zip(s.density())
            .filter(|(x, _)| *x < 0.5)
            .map(|(_, d)| d * h)
            .sum();
        assert!((left - 0.5).abs() < 1e-6);
        assert!((s.total_mass() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn rejects_width_beyond_margin() {
        let g = Grid1D::new(0.0, 1.0, 100).unwrap();
        let e = ExtendedDomain::new(g, 0.05).unwrap();
        let atom = AtomicMeasure::dirac(0.5).unwrap();
        assert!(smooth_marginal(MarginalInput::Atoms(&atom), 0.2, &e).is_err());
    }

    #[test]
    fn density_smoothing_converges_in_l1() {
        let g = Grid1D::new(0.0, 1.0, 2000).unwrap();
        let e = ExtendedDomain::new(g, 0.2).unwrap();
        let u = GridMeasure::uniform(g, 1.0).unwrap();
        let mut last = f64::INFINITY;
        for delta in [0.2, 0.1, 0.05, 0.025, 0.0125] {
            let s = smooth_marginal(MarginalInput::Grid(&u), delta, &e).unwrap();
            assert!((s.total_mass() - 1.0).abs() < 1e-6);
            let ext = e.extended();
            let l1: f64 = (0..ext.len())
                .map(|i| {
                    let orig = if i >= e.offset() && i < e.offset() + g.len() { 1.0 } else { 0.0 };
                    (s.density()[i] - orig).abs()
                })
                .sum::<f64>()
                * ext.h();
            assert!(l1 < last);
            last = l1;
        }
        assert!(last < 0.02);
    }

    #[test]
    fn coupling_smoothing_has_the_right_marginals() {
        let g = Grid1D::new(0.0, 1.0, 100).unwrap();
        let e = ExtendedDomain::new(g, 0.1).unwrap();
        let m = Mollifier::new(0.1, e.extended().h()).unwrap();
        let p = smooth_coupling(&[(0.0, 1.0, 0.5), (1.0, 0.0, 0.5)], &m, &e, &e).unwrap();
        assert!((p.total_mass() - 1.0).abs() < 1e-12);
        let atoms = AtomicMeasure::new(
            alloc::vec![Atom { location: 0.0, mass: 0.5 }, Atom { location: 1.0, mass: 0.5 }],
            1e-12,
        )
        .unwrap();
        let s = smooth_atoms(&atoms, &m, &e).unwrap();
        let (m1, _) = p.marginals();
        for (x, y) in m1.density().iter().zip(s.density()) {
            assert!((x - y).abs() < 1e-10);
        }
    }
}
