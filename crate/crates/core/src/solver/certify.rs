//! Distinctness of numerical solutions via Newton-Kantorovich balls.
//!
//! We use the affine-covariant form of the theorem. At an approximate zero `y`
//! of `F`, let `β = ‖J(y)⁻¹ F(y)‖` be the Newton step length and `ω` a
//! Lipschitz constant of `x ↦ J(y)⁻¹ J(x)` near `y`. If `h = ω β ≤ 1/2` there
//! is a true zero within `r = (1 - √(1 - 2h)) / ω` of `y`, unique within
//! `(1 + √(1 - 2h)) / ω`. Two points whose balls are disjoint approximate
//! distinct zeros. All quantities are taken after scaling each coordinate by
//! `1 + |y_k|`. `ω` is estimated by finite differences of `J` with a safety
//! factor, so the result is a numerical check rather than a proof.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::linalg::{max_abs, singular_values, solve, CMatrix, CVector};
use crate::model::{DataVector, SymMatrix};
use crate::solver::chart::LikelihoodSystem;
use crate::solver::newton::System;
use crate::solver::{complex_normal, normalize_data, to_reparam};
use crate::{DppError, Result, C64};

/// Points with a relative residual above this are not certified.
pub const RESIDUAL_GATE: f64 = 1e-6;
const OMEGA_SAFETY: f64 = 2.0;

#[derive(Clone, Debug, Serialize)]
pub struct PointCertificate {
    /// Chart (1-based root) with the strongest certificate; `None` when the
    /// point is singular in every chart.
    pub chart_root: Option<usize>,
    pub residual: f64,
    pub beta: f64,
    /// `‖J(y)⁻¹‖` in scaled coordinates; reported, not used in `h`.
    pub eta: f64,
    pub omega: f64,
    pub h: f64,
    /// Radius of the ball known to contain a zero; `None` when uncertified.
    pub radius: Option<f64>,
    pub uniqueness_radius: Option<f64>,
    pub certified: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificationReport {
    pub points: Vec<PointCertificate>,
    /// Index pairs whose balls overlap or involve an uncertified point.
    pub overlapping_pairs: Vec<(usize, usize)>,
    pub all_distinct: bool,
}

impl CertificationReport {
    pub fn require_all_distinct(&self) -> Result<()> {
        if let Some(&(i, j)) = self.overlapping_pairs.first() {
            return Err(DppError::InconclusiveBall { i, j });
        }
        match self.points.iter().position(|p| !p.certified) {
            Some(k) => Err(DppError::InvalidInput(format!("point {k} fails the Kantorovich condition in every chart"))),
            None => Ok(()),
        }
    }
}

impl PointCertificate {
    fn irregular() -> Self {
        PointCertificate {
            chart_root: None,
            residual: f64::NAN,
            beta: f64::NAN,
            eta: f64::INFINITY,
            omega: f64::NAN,
            h: f64::INFINITY,
            radius: None,
            uniqueness_radius: None,
            certified: false,
        }
    }
}

fn operator_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Coordinate scaling `D = diag(1 + |y_k|)` and equation scaling `R` at a point.
struct Scaling {
    d: Vec<f64>,
    r: Vec<f64>,
}

impl Scaling {
    fn at(j: &CMatrix, y: &CVector) -> Self {
        let d: Vec<f64> = y.iter().map(|z| 1.0 + z.norm()).collect();
        let r = (0..j.nrows())
            .map(|i| {
                let s = (0..j.ncols()).fold(0.0f64, |a, k| a.max(j[(i, k)].norm() * d[k]));
                if s > 0.0 { 1.0 / s } else { 1.0 }
            })
            .collect();
        Scaling { d, r }
    }

    /// `R J D`.
    fn apply(&self, j: &CMatrix) -> CMatrix {
        CMatrix::from_fn(j.nrows(), j.ncols(), |i, k| j[(i, k)] * (self.r[i] * self.d[k]))
    }
}

fn omega_estimate(sys: &LikelihoodSystem, y: &CVector, jz: &CMatrix, sc: &Scaling) -> Option<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6b61_6e74);
    let delta = 1e-6;
    let mut w: f64 = 0.0;
    for _ in 0..4 {
        let v = CVector::from_fn(y.len(), |_, _| complex_normal(&mut rng));
        let v = &v / C64::new(v.norm(), 0.0);
        let step = CVector::from_fn(y.len(), |i, _| v[i] * (delta * sc.d[i]));
        let (_, j2) = sys.residual_and_jacobian(&(y + step)).ok()?;
        let change = sc.apply(&j2) - jz;
        let mut m = CMatrix::zeros(change.nrows(), change.ncols());
        for c in 0..change.ncols() {
            m.set_column(c, &solve(jz, &change.column(c).into_owned())?);
        }
        w = w.max(operator_norm(&m) / delta);
    }
    Some(OMEGA_SAFETY * w.max(f64::MIN_POSITIVE))
}

/// Certificate in the scaled coordinates `z = D⁻¹ (y - y₀)`, in which the ball
/// radii are measured.
fn certify_point(sys: &LikelihoodSystem, y: &CVector) -> Option<(PointCertificate, Vec<f64>)> {
    let (f, j) = sys.residual_and_jacobian(y).ok()?;
    let sc = Scaling::at(&j, y);
    let jz = sc.apply(&j);
    let fz = CVector::from_fn(f.len(), |i, _| f[i] * sc.r[i]);
    let s = singular_values(&jz);
    let smin = *s.last()?;
    if !(smin > 1e-13 * s[0]) {
        return None;
    }
    let eta = 1.0 / smin;
    let beta = solve(&jz, &fz)?.norm();
    let omega = omega_estimate(sys, y, &jz, &sc)?;
    let residual = max_abs(f.as_slice());
    let h = omega * beta;
    let ok = residual <= RESIDUAL_GATE && h <= 0.5;
    let disc = (1.0 - 2.0 * h).max(0.0).sqrt();
    let cert = PointCertificate {
        chart_root: None,
        residual,
        beta,
        eta,
        omega,
        h,
        radius: ok.then(|| (1.0 - disc) / omega),
        uniqueness_radius: ok.then(|| (1.0 + disc) / omega),
        certified: ok,
    };
    Some((cert, sc.d))
}

/// A ball of radius `r` in scaled coordinates bounds coordinate `k` by `r d_k`;
/// two boxes that are disjoint in some coordinate contain different zeros.
fn separated(yi: &CVector, ri: f64, di: &[f64], yj: &CVector, rj: f64, dj: &[f64]) -> bool {
    (0..yi.len()).any(|k| (yi[k] - yj[k]).norm() > ri * di[k] + rj * dj[k])
}

type ChartEntry = (CVector, PointCertificate, Vec<f64>);

/// Checks that `points` approximate pairwise distinct solutions of the
/// likelihood equations for `u`. Each point is certified in every chart in
/// which it is a regular point; a pair counts as distinct when some chart
/// certifies both points and separates their balls.
#[allow(clippy::needless_range_loop)]
pub fn distinctness_check(points: &[SymMatrix], u: &DataVector) -> Result<CertificationReport> {
    let n = u.n();
    if let Some(p) = points.iter().find(|p| p.n() != n) {
        return Err(DppError::InvalidInput(format!("point of size {} for data of size {n}", p.n())));
    }
    let data = normalize_data(u);
    // charts[root][i]: point i in that chart and its certificate, if regular there
    let charts: Vec<Vec<Option<ChartEntry>>> = (0..n)
        .map(|root| {
            let sys = LikelihoodSystem::new(data.clone(), root);
            points
                .iter()
                .map(|p| {
                    let y = to_reparam(p, root).to_vector();
                    certify_point(&sys, &y).map(|(c, d)| (y, c, d))
                })
                .collect()
        })
        .collect();
    let mut certs = Vec::with_capacity(points.len());
    for i in 0..points.len() {
        let best = (0..n)
            .filter_map(|root| charts[root][i].as_ref().map(|(_, c, _)| (root, c)))
            .min_by(|a, b| (!a.1.certified, a.1.h).partial_cmp(&(!b.1.certified, b.1.h)).expect("finite h"));
        certs.push(match best {
            Some((root, c)) => PointCertificate { chart_root: Some(root + 1), ..c.clone() },
            None => PointCertificate::irregular(),
        });
    }
    let mut overlapping = Vec::new();
    for i in 0..points.len() {
        for k in i + 1..points.len() {
            let apart = charts.iter().any(|chart| match (&chart[i], &chart[k]) {
                (Some((yi, ci, di)), Some((yk, ck, dk))) => match (ci.radius, ck.radius) {
                    (Some(ri), Some(rk)) => separated(yi, ri, di, yk, rk, dk),
                    _ => false,
                },
                _ => false,
            });
            if !apart {
                overlapping.push((i, k));
            }
        }
    }
    let all_distinct = overlapping.is_empty() && certs.iter().all(|c| c.certified);
    Ok(CertificationReport { points: certs, overlapping_pairs: overlapping, all_distinct })
}
