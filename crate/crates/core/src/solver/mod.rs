//! Numerical solution of the likelihood equations.
//!
//! The equations are solved in a birational chart ([`chart`]) in which each
//! sign orbit of matrices is a single point. Solutions on the main component
//! are harvested by monodromy ([`monodromy`]); [`multistart`] provides an
//! independent Newton-based oracle for small `n`.

pub mod certify;
pub mod chart;
pub mod classify;
pub mod dedup;
pub mod monodromy;
pub mod multistart;
pub mod newton;
pub mod tracker;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::linalg::{equilibrate, inverse_condition, max_abs, solve, weighted_norm, CVector};
use crate::model::{principal_minors, DataVector, SymMatrix};
use crate::{Result, C64};

pub use certify::{distinctness_check, CertificationReport, PointCertificate};
pub use chart::{from_reparam, grad_system, to_reparam, DataPath, LikelihoodHomotopy, LikelihoodSystem, ReparamPoint};
pub use classify::{classify, gradient_residual, mark_global_maxima, CriticalPoint, PointFlags, PointKind};
pub use dedup::deduplicate;
pub use monodromy::{
    monodromy_solve, monodromy_solve_with_progress, parameter_homotopy, HomotopyRun, LoopProgress, MonodromyResult, StopReason,
};
pub use multistart::{multistart_solve, MultistartReport};
pub use newton::{newton_refine, NewtonOptions, NewtonReport, System};
pub use tracker::{track_path, Homotopy, PathEnd, TrackFailure, TrackerOptions};

/// Tolerances and limits shared by the numerical solvers.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub seed: u64,
    /// Relative chart-coordinate distance below which two solutions are merged.
    pub dedup_tol: f64,
    /// Chart residual (data scaled to unit l1 norm) required of every solution.
    pub residual_tol: f64,
    /// Consecutive monodromy loops without new solutions before giving up.
    pub stall_loops: usize,
    pub max_loops: usize,
    /// Re-runs of a failed path with a perturbed (gamma) detour.
    pub gamma_retries: usize,
    /// Stop once this many solutions are known; `None` uses the ML degree table.
    pub target_count: Option<usize>,
    pub imag_tol: f64,
    /// Positive-definiteness floor, relative to `1 + max |θ_ij|`.
    pub eigen_floor: f64,
    pub tracker: TrackerOptions,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            seed: 1,
            dedup_tol: 1e-8,
            residual_tol: 1e-12,
            stall_loops: 10,
            max_loops: 500,
            gamma_retries: 3,
            target_count: None,
            imag_tol: 1e-8,
            eigen_floor: 1e-10,
            tracker: TrackerOptions::default(),
        }
    }
}

/// A refined solution of the chart system.
#[derive(Clone, Debug)]
pub struct ChartSolution {
    /// Coordinates in the chart the solution was computed in.
    pub point: ReparamPoint,
    /// Canonical sign-orbit representative.
    pub theta: SymMatrix,
    /// Chart residual for the unit-l1 scaled data.
    pub residual: f64,
    pub quadratic: bool,
    /// Coordinates in the chart rooted at vertex 1 followed by the principal
    /// minors; the comparison key for deduplication.
    pub key: Vec<C64>,
}

impl ChartSolution {
    pub(crate) fn new(point: ReparamPoint, residual: f64, quadratic: bool) -> Result<Self> {
        let theta = canonical_representative(&from_reparam(&point, None)?);
        let key = solution_key(&theta);
        Ok(ChartSolution { point, theta, residual, quadratic, key })
    }
}

pub(crate) fn solution_key(theta: &SymMatrix) -> Vec<C64> {
    let mut key = to_reparam(theta, 0).coords;
    key.extend_from_slice(principal_minors(theta).values());
    key
}

/// Scales data to unit l1 norm; the critical points do not change.
pub fn normalize_data(u: &DataVector) -> DataVector {
    let s = u.l1_norm();
    if s > 0.0 {
        u.scaled(C64::new(1.0 / s, 0.0))
    } else {
        u.clone()
    }
}

/// Sign-orbit representative with the first nonzero entry above the diagonal
/// in each column having positive real part (positive imaginary part on ties).
pub fn canonical_representative(theta: &SymMatrix) -> SymMatrix {
    let n = theta.n();
    let tiny = 1e-14 * (1.0 + theta.max_abs());
    let mut signs = vec![1.0; n];
    for j in 1..n {
        if let Some(i) = (0..j).find(|&i| theta.get(i, j).norm() > tiny) {
            let z = theta.get(i, j) * signs[i];
            let positive = if z.re.abs() > tiny { z.re > 0.0 } else { z.im > 0.0 };
            signs[j] = if positive { 1.0 } else { -1.0 };
        }
    }
    theta.conjugate_by_signs(&signs)
}

pub(crate) fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub(crate) fn random_data<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DataVector {
    let values = (0..1usize << n).map(|_| complex_normal(rng)).collect();
    normalize_data(&DataVector::from_mask_order(n, values).expect("valid length"))
}

/// Solutions whose equilibrated chart Jacobian has a smaller reciprocal
/// condition number are treated as singular and discarded.
pub(crate) const SINGULAR_RCOND: f64 = 1e-12;

/// Largest weighted Newton correction allowed at a refined solution.
const MAX_FINAL_STEP: f64 = 1e-8;

/// Refines `y` on the chart system for (already scaled) data `u` and rejects
/// points where the chart Jacobian is numerically singular.
pub(crate) fn refine_solution(u: &DataVector, root: usize, y: &CVector, tol: f64) -> Option<ChartSolution> {
    let sys = LikelihoodSystem::new(u.clone(), root);
    let report = newton_refine(&sys, y, NewtonOptions { tol, max_iter: 15 }).ok()?;
    let (point, residual, next_step) = polish(&sys, report.point, report.residual);
    // near infinity the gradient is small but Newton keeps moving by O(1)
    if !(next_step <= MAX_FINAL_STEP) {
        return None;
    }
    let (_, j) = sys.residual_and_jacobian(&point).ok()?;
    if inverse_condition(&equilibrate(&j, &point)) <= SINGULAR_RCOND {
        return None;
    }
    ChartSolution::new(sys.point(&point), residual, report.quadratic).ok()
}

/// A few extra Newton steps past the residual tolerance, kept while they
/// shrink; ill-conditioned solutions can still move noticeably at that point.
/// Also returns the weighted size of the next Newton correction.
fn polish(sys: &LikelihoodSystem, mut y: CVector, mut residual: f64) -> (CVector, f64, f64) {
    let mut last_step = f64::INFINITY;
    for _ in 0..4 {
        let Ok((f, j)) = sys.residual_and_jacobian(&y) else { break };
        let Some(d) = solve(&j, &f) else { break };
        let step = weighted_norm(&d, &y);
        if !(step < 0.5 * last_step) || step < 1e-16 {
            return (y, residual, step);
        }
        let next = &y - &d;
        let Ok(r) = sys.residual(&next).map(|f| max_abs(f.as_slice())) else { break };
        if !(r <= 10.0 * residual.max(1e-300)) {
            return (y, residual, step);
        }
        y = next;
        residual = r;
        last_step = step;
    }
    (y, residual, last_step)
}
