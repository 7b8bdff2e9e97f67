use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::mollifier::{smooth_atoms, ExtendedDomain, Mollifier};
use super::oracle::{brute_force_ot, unregularized_ot_1d};
use crate::cost::{CostField, CostRule};
use crate::error::{Error, Result};
use crate::math::powf;
use crate::measure::{AtomicMeasure, Grid1D, GridMeasure};
use crate::orlicz::{luxemburg_norm, neg_entropy, YoungFunction, DEFAULT_NORM_TOL};
use crate::sinkhorn::{primal_parts, solve, SolveOptions};

/// Ordered list of `(gamma, delta)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule(pub Vec<(f64, f64)>);

impl Schedule {
    /// `delta = c * gamma`.
    pub fn coupled(c: f64, gammas: &[f64]) -> Self {
        Schedule(gammas.iter().map(|g| (*g, c * g)).collect())
    }

    /// `delta = c * gamma^p`.
    pub fn power(c: f64, p: f64, gammas: &[f64]) -> Self {
        Schedule(gammas.iter().map(|g| (*g, c * powf(*g, p))).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_delta(&self) -> f64 {
        self.0.iter().map(|p| p.1).fold(0.0, f64::max)
    }

    pub fn min_delta(&self) -> f64 {
        self.0.iter().map(|p| p.1).fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PointStatus {
    Converged,
    Failed(String),
}

/// Outcome of one `(gamma, delta)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub gamma: f64,
    pub delta: f64,
    /// `F_gamma` of the computed plan: transport cost plus entropy term.
    pub regularized_value: f64,
    /// Optimal unregularized cost between the unsmoothed marginals.
    pub unregularized_reference: f64,
    /// `sum c pi w`.
    pub transport_cost: f64,
    /// `gamma sum pi (log pi - 1) w`.
    pub entropy_term: f64,
    /// `-gamma |extended domain|`, the floor for `entropy_term`.
    pub entropy_floor: f64,
    pub entropy_of_smoothed_marginals: (f64, f64),
    /// `PhiLog` Luxemburg norms of the smoothed marginals.
    pub llogl_norms: (f64, f64),
    pub iterations: usize,
    pub status: PointStatus,
}

impl SweepPoint {
    pub fn gap_to_reference(&self) -> f64 {
        self.regularized_value - self.unregularized_reference
    }

    pub fn converged(&self) -> bool {
        self.status == PointStatus::Converged
    }
}

/// Everything a sweep needs, validated once. Points are independent and
/// can be evaluated in any order (or concurrently) with [`SweepSetup::point`].
#[derive(Debug, Clone)]
pub struct SweepSetup {
    mu: AtomicMeasure,
    nu: AtomicMeasure,
    rule: CostRule,
    ext1: ExtendedDomain,
    ext2: ExtendedDomain,
    schedule: Schedule,
    reference: f64,
    solver: SolveOptions,
}

impl SweepSetup {
    /// Validates the schedule against the grids: every `delta` must be
    /// resolved (`h <= delta / 4`) and fit in the extension, which is sized
    /// by the largest `delta`.
    pub fn new(
        mu: AtomicMeasure,
        nu: AtomicMeasure,
        rule: CostRule,
        domain1: Grid1D,
        domain2: Grid1D,
        schedule: Schedule,
        solver: SolveOptions,
    ) -> Result<Self> {
        if schedule.is_empty() {
            return Err(Error::param("sweep schedule is empty"));
        }
        if schedule
            .0
            .iter()
            .any(|(g, d)| !(*g > 0.0 && g.is_finite() && *d > 0.0 && d.is_finite()))
        {
            return Err(Error::param("schedule entries need positive gamma and delta"));
        }
        let min_delta = schedule.min_delta();
        if domain1.h() > 0.25 * min_delta || domain2.h() > 0.25 * min_delta {
            return Err(Error::param(
                "grid does not resolve the mollifier: need h <= delta / 4 for every delta",
            ));
        }
        if !mu.within(&domain1) || !nu.within(&domain2) {
            return Err(Error::param("atoms must lie inside their domains"));
        }
        let reference = if rule.is_convex_in_difference() {
            unregularized_ot_1d(&mu, &nu, rule)?
        } else {
            brute_force_ot(&mu, &nu, |x, y| rule.eval(x, y))?
        };
        let margin = schedule.max_delta();
        Ok(SweepSetup {
            ext1: ExtendedDomain::new(domain1, margin)?,
            ext2: ExtendedDomain::new(domain2, margin)?,
            mu,
            nu,
            rule,
            schedule,
            reference,
            solver,
        })
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn reference(&self) -> f64 {
        self.reference
    }

    pub fn extended_domains(&self) -> (&ExtendedDomain, &ExtendedDomain) {
        (&self.ext1, &self.ext2)
    }

    /// Smoothed marginals `(mu_delta, nu_delta)` on the extended grids.
    pub fn smoothed_marginals(&self, delta: f64) -> Result<(GridMeasure, GridMeasure)> {
        let m1 = Mollifier::new(delta, self.ext1.extended().h())?;
        let m2 = Mollifier::new(delta, self.ext2.extended().h())?;
        Ok((
            smooth_atoms(&self.mu, &m1, &self.ext1)?,
            smooth_atoms(&self.nu, &m2, &self.ext2)?,
        ))
    }

    /// Solves the point at schedule position `index`.
    pub fn point(&self, index: usize) -> SweepPoint {
        let (gamma, delta) = self.schedule.0[index];
        let floor = -gamma * self.ext1.extended().length() * self.ext2.extended().length();
        let mut point = SweepPoint {
            gamma,
            delta,
            regularized_value: f64::NAN,
            unregularized_reference: self.reference,
            transport_cost: f64::NAN,
            entropy_term: f64::NAN,
            entropy_floor: floor,
            entropy_of_smoothed_marginals: (f64::NAN, f64::NAN),
            llogl_norms: (f64::NAN, f64::NAN),
            iterations: 0,
            status: PointStatus::Converged,
        };
        if let Err(e) = self.fill(&mut point) {
            point.status = PointStatus::Failed(e.to_string());
        }
        point
    }

    fn fill(&self, point: &mut SweepPoint) -> Result<()> {
        let (mu_d, nu_d) = self.smoothed_marginals(point.delta)?;
        point.entropy_of_smoothed_marginals = (neg_entropy(&mu_d), neg_entropy(&nu_d));
        point.llogl_norms = (
            luxemburg_norm(&mu_d, YoungFunction::PhiLog, DEFAULT_NORM_TOL)?.value,
            luxemburg_norm(&nu_d, YoungFunction::PhiLog, DEFAULT_NORM_TOL)?.value,
        );
        // The plan vanishes off supp mu_delta x supp nu_delta, so solving on
        // the support windows is the same problem on a smaller grid.
        let (_, mu_w) = mu_d
            .trim_to_support()
            .ok_or_else(|| Error::param("smoothed marginal vanished"))?;
        let (_, nu_w) = nu_d
            .trim_to_support()
            .ok_or_else(|| Error::param("smoothed marginal vanished"))?;
        let cost = CostField::from_rule(self.rule, *mu_w.grid(), *nu_w.grid())?;
        let sol = solve(&mu_w, &nu_w, &cost, point.gamma, &self.solver)?;
        let (transport, entropy) = primal_parts(&sol.plan, &cost);
        point.transport_cost = transport;
        point.entropy_term = point.gamma * entropy;
        point.regularized_value = transport + point.gamma * entropy;
        point.iterations = sol.report.iterations;
        Ok(())
    }

    /// All points in schedule order.
    pub fn run(&self) -> Vec<SweepPoint> {
        (0..self.schedule.len()).map(|k| self.point(k)).collect()
    }
}

/// Smooths both marginals for every `(gamma, delta)` in `schedule`, solves
/// the regularized problem between them on the extended domains and
/// records the objective next to the unregularized optimum.
///
/// Failed points are kept (with [`PointStatus::Failed`]) so that the sweep
/// continues; setup errors are returned directly.
pub fn gamma_sweep(
    mu: &AtomicMeasure,
    nu: &AtomicMeasure,
    rule: CostRule,
    domain1: Grid1D,
    domain2: Grid1D,
    schedule: &Schedule,
    solver: &SolveOptions,
) -> Result<Vec<SweepPoint>> {
    let setup = SweepSetup::new(
        mu.clone(),
        nu.clone(),
        rule,
        domain1,
        domain2,
        schedule.clone(),
        *solver,
    )?;
    Ok(setup.run())
}
