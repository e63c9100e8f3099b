//! Reality, definiteness and Hessian-inertia classification of critical points.

use nalgebra::SymmetricEigen;
use serde::Serialize;

use crate::combinatorics::SetPartition;
use crate::model::{gradient, hessian, loglike_parametric, principal_minors, sign_orbit, DataVector, SymMatrix};
use crate::solver::SolverOptions;
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PointKind {
    LocalMax,
    Saddle,
    LocalMin,
    Degenerate,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PointFlags {
    /// Θ is real after choosing the canonical sign representative.
    pub is_real: bool,
    /// The principal minors are real; Θ may still be complex (purely imaginary
    /// off-diagonal entries square to reals).
    pub implicit_real: bool,
    pub is_positive_definite: bool,
    /// Inertia of the Hessian; only defined for real points.
    pub kind: Option<PointKind>,
    pub is_global_max: bool,
}

#[derive(Clone, Debug)]
pub struct CriticalPoint {
    pub theta: SymMatrix,
    /// `max |∂L/∂θ_ij| / Σ |u_I|` for the data as given.
    pub residual: f64,
    /// Log-likelihood, when Θ is real and every minor carrying data is positive.
    pub value: Option<f64>,
    pub flags: PointFlags,
    pub origin: SetPartition,
    /// Number of distinct matrices in the sign orbit of `theta`.
    pub orbit_size: usize,
    /// 2 for the double root of a degenerate closed-form block, else 1.
    pub multiplicity: usize,
    /// Off-diagonal entries (1-based) inside a block of `origin` that vanish.
    pub accidental_zeros: Vec<(usize, usize)>,
}

/// Relative gradient norm `max |∂L/∂θ_ij| / Σ |u_I|`.
pub fn gradient_residual(theta: &SymMatrix, u: &DataVector) -> Result<f64> {
    let g = gradient(theta, u)?;
    let scale = u.l1_norm();
    Ok(if scale > 0.0 { g.max_abs() / scale } else { g.max_abs() })
}

fn inertia(theta: &SymMatrix, u: &DataVector) -> Result<PointKind> {
    let h = hessian(theta, u)?.map(|z| z.re);
    let eig = SymmetricEigen::new(h).eigenvalues;
    let scale = eig.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let tiny = 1e-8 * scale;
    Ok(if scale == 0.0 || eig.iter().any(|l| l.abs() <= tiny) {
        PointKind::Degenerate
    } else if eig.iter().all(|&l| l < 0.0) {
        PointKind::LocalMax
    } else if eig.iter().all(|&l| l > 0.0) {
        PointKind::LocalMin
    } else {
        PointKind::Saddle
    })
}

fn positive_definite(theta: &SymMatrix, floor: f64) -> bool {
    let eig = SymmetricEigen::new(theta.real_part()).eigenvalues;
    eig.iter().all(|&l| l > floor * (1.0 + theta.max_abs()))
}

/// Classifies a critical point. Real points are snapped to their real part;
/// the given member of the sign orbit is kept.
pub fn classify(theta: &SymMatrix, u: &DataVector, origin: SetPartition, opts: &SolverOptions) -> Result<CriticalPoint> {
    let mut theta = theta.clone();
    let minors = principal_minors(&theta);
    let scale = 1.0 + minors.values().iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let implicit_real = minors.values().iter().all(|z| z.im.abs() <= opts.imag_tol * scale);
    let is_real = theta.is_real(opts.imag_tol);
    if is_real {
        theta = theta.real_projection();
    }
    let residual = gradient_residual(&theta, u)?;
    let (value, kind, is_positive_definite) = if is_real {
        let value = if u.is_real() { loglike_parametric(&theta, u).ok() } else { None };
        (value, Some(inertia(&theta, u)?), positive_definite(&theta, opts.eigen_floor))
    } else {
        (None, None, false)
    };
    let orbit_size = sign_orbit(&theta).len();
    Ok(CriticalPoint {
        theta,
        residual,
        value,
        flags: PointFlags { is_real, implicit_real, is_positive_definite, kind, is_global_max: false },
        origin,
        orbit_size,
        multiplicity: 1,
        accidental_zeros: Vec::new(),
    })
}

/// Flags the local maxima whose value is within relative `1e-9` of the best one.
pub fn mark_global_maxima(points: &mut [CriticalPoint]) {
    let best = points
        .iter()
        .filter(|p| p.flags.kind == Some(PointKind::LocalMax))
        .filter_map(|p| p.value)
        .fold(f64::NEG_INFINITY, f64::max);
    if !best.is_finite() {
        return;
    }
    for p in points.iter_mut() {
        p.flags.is_global_max = p.flags.kind == Some(PointKind::LocalMax)
            && p.value.is_some_and(|v| (v - best).abs() <= 1e-9 * (1.0 + best.abs()));
    }
}
