//! Independent oracles and instance generators shared by the integration
//! tests. Nothing here calls into the solver.
#![allow(dead_code)]

use entropic_ot::{CostField, Grid1D, GridMeasure};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unit(n: usize) -> Grid1D {
    Grid1D::new(0.0, 1.0, n).unwrap()
}

/// A normalized mixture of one to three Gaussians on `grid` with a small
/// positive floor, so every cell carries mass.
pub fn smooth_density(rng: &mut ChaCha8Rng, grid: Grid1D) -> GridMeasure {
    let bumps: Vec<(f64, f64, f64)> = (0..rng.random_range(1..=3))
        .map(|_| {
            (
                rng.random_range(0.2..0.8),
                rng.random_range(0.05..0.2),
                rng.random_range(0.5..2.0),
            )
        })
        .collect();
    let values = grid
        .centers()
        .map(|x| {
            0.02 + bumps
                .iter()
                .map(|&(m, s, w)| w * (-0.5 * ((x - m) / s).powi(2)).exp())
                .sum::<f64>()
        })
        .collect();
    GridMeasure::normalized(grid, values).unwrap()
}

/// Positive random density, normalized.
pub fn positive_density(rng: &mut ChaCha8Rng, grid: Grid1D) -> GridMeasure {
    let values = (0..grid.len()).map(|_| rng.random_range(0.2..2.0)).collect();
    GridMeasure::normalized(grid, values).unwrap()
}

/// Root of `w e^w = 1` by Newton's method from 0.5.
pub fn lambert_w1() -> f64 {
    let mut w: f64 = 0.5;
    for _ in 0..100 {
        let f = w * w.exp() - 1.0;
        let step = f / (w.exp() * (1.0 + w));
        w -= step;
        if step.abs() < 1e-17 {
            break;
        }
    }
    w
}

/// Minimizes the discrete regularized primal
/// `sum (c pi + gamma pi (log pi - 1)) h1 h2` over positive arrays with
/// the given marginals, by projected gradient descent with Armijo
/// backtracking. The feasible set is affine, so projecting the gradient
/// onto zero row and column sums (double centering) keeps the marginals
/// fixed; the product `mu x nu` is a feasible start.
pub fn projected_gradient_primal(mu: &GridMeasure, nu: &GridMeasure, cost: &CostField, gamma: f64) -> f64 {
    let (n1, n2) = (mu.grid().len(), nu.grid().len());
    let w = mu.grid().h() * nu.grid().h();
    let c = cost.values();
    let objective = |p: &[f64]| -> f64 {
        p.iter()
            .zip(c)
            .map(|(&p, &c)| (c * p + gamma * p * (p.ln() - 1.0)) * w)
            .sum()
    };
    let mut p: Vec<f64> = (0..n1 * n2)
        .map(|k| mu.density()[k / n2] * nu.density()[k % n2])
        .collect();
    let mut value = objective(&p);
    let mut step = 1.0;
    for _ in 0..200_000 {
        let g: Vec<f64> = p.iter().zip(c).map(|(&p, &c)| w * (c + gamma * p.ln())).collect();
        let row: Vec<f64> = (0..n1).map(|i| g[i * n2..(i + 1) * n2].iter().sum::<f64>() / n2 as f64).collect();
        let col: Vec<f64> = (0..n2).map(|j| (0..n1).map(|i| g[i * n2 + j]).sum::<f64>() / n1 as f64).collect();
        let all = row.iter().sum::<f64>() / n1 as f64;
        let d: Vec<f64> = (0..n1 * n2)
            .map(|k| -(g[k] - row[k / n2] - col[k % n2] + all))
            .collect();
        let slope: f64 = d.iter().zip(&g).map(|(d, g)| d * g).sum();
        if -slope < 1e-30 {
            break;
        }
        step *= 2.0;
        loop {
            let trial: Vec<f64> = p.iter().zip(&d).map(|(p, d)| p + step * d).collect();
            if trial.iter().all(|&t| t > 0.0) {
                let v = objective(&trial);
                if v <= value + 1e-4 * step * slope {
                    p = trial;
                    value = v;
                    break;
                }
            }
            step *= 0.5;
            if step < 1e-300 {
                return value;
            }
        }
    }
    value
}
