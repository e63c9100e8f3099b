//! Newton's method for square complex systems.

use serde::Serialize;

use crate::linalg::{max_abs, solve, weighted_norm, CMatrix, CVector};
use crate::{DppError, Result};

/// A square system `F(y) = 0`.
pub trait System: Sync {
    fn dim(&self) -> usize;
    fn residual(&self, y: &CVector) -> Result<CVector>;
    fn residual_and_jacobian(&self, y: &CVector) -> Result<(CVector, CMatrix)>;
}

#[derive(Clone, Copy, Debug)]
pub struct NewtonOptions {
    /// Stop once `max |F(y)|` drops below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { tol: 1e-12, max_iter: 20 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NewtonReport {
    #[serde(skip)]
    pub point: CVector,
    pub iterations: usize,
    pub residual: f64,
    /// Weighted size of the last Newton step.
    pub last_step: f64,
    /// Step sizes shrank quadratically over the final iterations.
    pub quadratic: bool,
}

/// Quadratic convergence shows up as contraction ratios `q_k = ‖Δ_k‖/‖Δ_{k-1}‖`
/// with `q_k ≈ q_{k-1}²`; linear convergence keeps `q_k ≈ q_{k-1}`. Steps at
/// rounding level carry no information and are skipped.
fn quadratic_observed(steps: &[f64]) -> bool {
    const FLOOR: f64 = 1e-14;
    let useful: Vec<f64> = steps.iter().copied().filter(|s| *s > FLOOR).collect();
    if useful.len() >= 3 {
        let k = useful.len() - 1;
        let q1 = useful[k - 1] / useful[k - 2];
        let q2 = useful[k] / useful[k - 1];
        return q1 < 0.5 && q2 <= 4.0 * q1 * q1 + 1e-12;
    }
    // short runs: the step after the informative ones fell to rounding level
    let dropped = steps.len() > useful.len();
    dropped && useful.last().is_none_or(|&s| s < 1e-4)
}

/// Newton iteration from `start` until the residual falls below `opts.tol`.
pub fn newton_refine<S: System + ?Sized>(sys: &S, start: &CVector, opts: NewtonOptions) -> Result<NewtonReport> {
    let mut y = start.clone();
    let mut steps = Vec::new();
    for it in 0..=opts.max_iter {
        let (f, j) = sys.residual_and_jacobian(&y)?;
        let res = max_abs(f.as_slice());
        if !res.is_finite() {
            return Err(DppError::MaxIterations { iterations: it, residual: res });
        }
        if res < opts.tol {
            return Ok(NewtonReport {
                point: y,
                iterations: it,
                residual: res,
                last_step: steps.last().copied().unwrap_or(0.0),
                quadratic: steps.is_empty() || quadratic_observed(&steps),
            });
        }
        if it == opts.max_iter {
            return Err(DppError::MaxIterations { iterations: it, residual: res });
        }
        let delta = solve(&j, &f).ok_or(DppError::SingularJacobian)?;
        steps.push(weighted_norm(&delta, &y));
        y -= delta;
    }
    unreachable!("loop returns on its last iteration")
}

/// Newton with backtracking on `‖F‖`, for starts far from any solution.
pub fn damped_newton<S: System + ?Sized>(sys: &S, start: &CVector, opts: NewtonOptions) -> Result<NewtonReport> {
    let mut y = start.clone();
    let (mut f, mut j) = sys.residual_and_jacobian(&y)?;
    let mut res = max_abs(f.as_slice());
    let mut steps = Vec::new();
    for it in 0..opts.max_iter {
        if res < opts.tol {
            return Ok(NewtonReport {
                point: y,
                iterations: it,
                residual: res,
                last_step: steps.last().copied().unwrap_or(0.0),
                quadratic: steps.is_empty() || quadratic_observed(&steps),
            });
        }
        let delta = solve(&j, &f).ok_or(DppError::SingularJacobian)?;
        let mut lambda = 1.0;
        loop {
            let trial = &y - &delta * crate::C64::new(lambda, 0.0);
            if let Ok((f2, j2)) = sys.residual_and_jacobian(&trial) {
                let r2 = max_abs(f2.as_slice());
                if r2.is_finite() && r2 < res {
                    steps.push(weighted_norm(&delta, &y) * lambda);
                    y = trial;
                    f = f2;
                    j = j2;
                    res = r2;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-3 {
                return Err(DppError::MaxIterations { iterations: it, residual: res });
            }
        }
    }
    if res < opts.tol {
        return Ok(NewtonReport {
            point: y,
            iterations: opts.max_iter,
            residual: res,
            last_step: steps.last().copied().unwrap_or(0.0),
            quadratic: quadratic_observed(&steps),
        });
    }
    Err(DppError::MaxIterations { iterations: opts.max_iter, residual: res })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::C64;

    /// z² = 2 and w³ = z as a toy system.
    struct Toy;

    impl System for Toy {
        fn dim(&self) -> usize {
            2
        }
        fn residual(&self, y: &CVector) -> Result<CVector> {
            Ok(CVector::from_vec(vec![y[0] * y[0] - 2.0, y[1] * y[1] * y[1] - y[0]]))
        }
        fn residual_and_jacobian(&self, y: &CVector) -> Result<(CVector, CMatrix)> {
            let j = CMatrix::from_row_slice(
                2,
                2,
                &[y[0] * 2.0, C64::new(0.0, 0.0), C64::new(-1.0, 0.0), y[1] * y[1] * 3.0],
            );
            Ok((self.residual(y)?, j))
        }
    }

    #[test]
    fn converges_quadratically() {
        let root = CVector::from_vec(vec![C64::new(2f64.sqrt(), 0.0), C64::new(2f64.powf(1.0 / 6.0), 0.0)]);
        let start = root.map(|z| z + 1e-3);
        let r = newton_refine(&Toy, &start, NewtonOptions { tol: 1e-14, max_iter: 10 }).unwrap();
        assert!(r.iterations <= 6);
        assert!(r.quadratic);
        assert!((r.point - root).norm() < 1e-13);
    }

    #[test]
    fn exact_start_is_unchanged() {
        let root = CVector::from_vec(vec![C64::new(2f64.sqrt(), 0.0), C64::new(2f64.powf(1.0 / 6.0), 0.0)]);
        let r = newton_refine(&Toy, &root, NewtonOptions { tol: 1e-12, max_iter: 10 }).unwrap();
        assert_eq!(r.iterations, 0);
        assert_eq!(r.point, root);
    }

    #[test]
    fn singular_jacobian_reported() {
        let start = CVector::from_vec(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        assert!(matches!(
            newton_refine(&Toy, &start, NewtonOptions::default()),
            Err(DppError::SingularJacobian)
        ));
    }
}
