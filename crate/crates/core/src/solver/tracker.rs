//! Predictor-corrector path tracking for parameter homotopies.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::linalg::{max_abs, solve, weighted_norm, CMatrix, CVector};
use crate::solver::newton::{newton_refine, NewtonOptions, System};
use crate::{DppError, Result, C64};

/// A family of square systems `H(y, t)`.
pub trait Homotopy: Sync {
    fn dim(&self) -> usize;
    fn residual(&self, y: &CVector, t: f64) -> Result<CVector>;
    fn residual_and_jacobian(&self, y: &CVector, t: f64) -> Result<(CVector, CMatrix)>;
    /// `∂H/∂y` and `∂H/∂t`.
    fn jacobian_and_dt(&self, y: &CVector, t: f64) -> Result<(CMatrix, CVector)>;
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct TrackerOptions {
    pub initial_step: f64,
    pub max_step: f64,
    pub min_step: f64,
    /// Weighted size of the final corrector update required to accept a step.
    pub corrector_tol: f64,
    pub max_corrector_iters: usize,
    pub max_steps: usize,
    /// Residual for the Newton refinement at the end of the path.
    pub end_tol: f64,
    /// Coordinates beyond this modulus count as divergence.
    pub divergence_bound: f64,
}

impl Default for TrackerOptions {
    fn default() -> Self {
        TrackerOptions {
            initial_step: 0.01,
            max_step: 0.1,
            min_step: 1e-12,
            corrector_tol: 1e-9,
            max_corrector_iters: 3,
            max_steps: 20_000,
            end_tol: 1e-12,
            divergence_bound: 1e12,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    StepUnderflow,
    Divergence,
    MaxSteps,
    EndgameFailed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrackFailure {
    pub kind: FailureKind,
    /// Fraction of the path completed.
    pub progress: f64,
}

impl fmt::Display for TrackFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} at {:.3e} of the path", self.kind, self.progress)
    }
}

impl From<TrackFailure> for DppError {
    fn from(e: TrackFailure) -> Self {
        DppError::PathFailure(e.to_string())
    }
}

#[derive(Clone, Debug)]
pub struct PathEnd {
    pub point: CVector,
    pub residual: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

/// `H(·, t)` as a plain system, for the end refinement.
struct Frozen<'a, H: ?Sized> {
    h: &'a H,
    t: f64,
}

impl<H: Homotopy + ?Sized> System for Frozen<'_, H> {
    fn dim(&self) -> usize {
        self.h.dim()
    }
    fn residual(&self, y: &CVector) -> Result<CVector> {
        self.h.residual(y, self.t)
    }
    fn residual_and_jacobian(&self, y: &CVector) -> Result<(CVector, CMatrix)> {
        self.h.residual_and_jacobian(y, self.t)
    }
}

/// Tangent `dy/dt = -H_y^{-1} H_t`.
fn tangent<H: Homotopy + ?Sized>(h: &H, y: &CVector, t: f64) -> Option<CVector> {
    let (j, dt) = h.jacobian_and_dt(y, t).ok()?;
    solve(&j, &(-dt))
}

fn rk4<H: Homotopy + ?Sized>(h: &H, y: &CVector, t: f64, dt: f64) -> Option<CVector> {
    let half = C64::new(dt / 2.0, 0.0);
    let k1 = tangent(h, y, t)?;
    let k2 = tangent(h, &(y + &k1 * half), t + dt / 2.0)?;
    let k3 = tangent(h, &(y + &k2 * half), t + dt / 2.0)?;
    let k4 = tangent(h, &(y + &k3 * C64::new(dt, 0.0)), t + dt)?;
    Some(y + (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * C64::new(dt / 6.0, 0.0))
}

fn correct<H: Homotopy + ?Sized>(h: &H, mut y: CVector, t: f64, opts: &TrackerOptions) -> Option<CVector> {
    let mut last = f64::INFINITY;
    for _ in 0..opts.max_corrector_iters {
        let (f, j) = h.residual_and_jacobian(&y, t).ok()?;
        let d = solve(&j, &f)?;
        let size = weighted_norm(&d, &y);
        if !size.is_finite() || size > 0.5 * last || (last.is_infinite() && size > 0.1) {
            return None;
        }
        y -= d;
        last = size;
        if size < opts.corrector_tol {
            return Some(y);
        }
    }
    None
}

/// Tracks a solution of `H(·, t0)` to `t1`: 4th-order Runge-Kutta predictor,
/// Newton corrector, step halved on rejection and grown by 1.5 after three
/// consecutive acceptances.
pub fn track_path<H: Homotopy + ?Sized>(
    h: &H,
    start: &CVector,
    t0: f64,
    t1: f64,
    opts: &TrackerOptions,
) -> std::result::Result<PathEnd, TrackFailure> {
    let span = t1 - t0;
    let mut s = 0.0;
    let mut y = start.clone();
    let mut step = opts.initial_step;
    let (mut accepted, mut rejected, mut streak) = (0usize, 0usize, 0usize);
    let fail = |kind, s| TrackFailure { kind, progress: s };
    while s < 1.0 {
        if accepted + rejected >= opts.max_steps {
            return Err(fail(FailureKind::MaxSteps, s));
        }
        let ds = step.min(1.0 - s);
        let t = t0 + s * span;
        let t_next = if ds == 1.0 - s { t1 } else { t0 + (s + ds) * span };
        let outcome = rk4(h, &y, t, t_next - t).and_then(|pred| correct(h, pred, t_next, opts));
        match outcome {
            Some(next) => {
                if max_abs(next.as_slice()) > opts.divergence_bound {
                    return Err(fail(FailureKind::Divergence, s));
                }
                y = next;
                s = if ds == 1.0 - s { 1.0 } else { s + ds };
                accepted += 1;
                streak += 1;
                if streak >= 3 {
                    step = (step * 1.5).min(opts.max_step);
                    streak = 0;
                }
            }
            None => {
                rejected += 1;
                streak = 0;
                step /= 2.0;
                if step < opts.min_step {
                    return Err(fail(FailureKind::StepUnderflow, s));
                }
            }
        }
    }
    let end = newton_refine(&Frozen { h, t: t1 }, &y, NewtonOptions { tol: opts.end_tol, max_iter: 12 })
        .map_err(|_| fail(FailureKind::EndgameFailed, 1.0))?;
    Ok(PathEnd { point: end.point, residual: end.residual, accepted_steps: accepted, rejected_steps: rejected })
}
