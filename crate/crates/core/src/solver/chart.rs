//! Birational chart on which the principal-minor map is injective.
//!
//! For a root vertex `r` the chart coordinates are the diagonal entries
//! `θ_ii` together with
//!
//! * `x_rj = θ_rj²` for edges at the root, and
//! * `x_ij = θ_ij θ_ri θ_rj` for all other pairs.
//!
//! The inverse map takes `θ_rj = ±√x_rj` and `θ_ij = x_ij / (θ_ri θ_rj)`. Any
//! consistent choice of square roots gives a matrix in the same sign orbit, so
//! principal minors (and hence the likelihood) are rational functions of the
//! chart coordinates and do not depend on the branch.

use crate::combinatorics::all_subsets;
use crate::linalg::{CMatrix, CVector};
use crate::model::{num_params, param_pairs, DataVector, LogDetCache, SymMatrix};
use crate::solver::newton::System;
use crate::solver::tracker::Homotopy;
use crate::{DppError, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Point in the chart rooted at `root` (0-based). Coordinates follow the
/// matrix parameter order: `θ_11, ..., θ_nn`, then `x_ij` for `i < j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReparamPoint {
    pub n: usize,
    pub root: usize,
    pub coords: Vec<C64>,
}

impl ReparamPoint {
    pub fn diag(&self, i: usize) -> C64 {
        self.coords[i]
    }

    pub fn x(&self, i: usize, j: usize) -> C64 {
        self.coords[crate::model::param_index(self.n, i, j)]
    }

    pub fn to_vector(&self) -> CVector {
        CVector::from_column_slice(&self.coords)
    }
}

/// Chart coordinates of `theta` in the chart rooted at `root`. Defined for every
/// matrix; only the inverse needs `x_rj != 0`.
pub fn to_reparam(theta: &SymMatrix, root: usize) -> ReparamPoint {
    let n = theta.n();
    let coords = param_pairs(n)
        .into_iter()
        .map(|(i, j)| {
            if i == j {
                theta.get(i, i)
            } else if i == root || j == root {
                let t = theta.get(i, j);
                t * t
            } else {
                theta.get(i, j) * theta.get(root, i) * theta.get(root, j)
            }
        })
        .collect();
    ReparamPoint { n, root, coords }
}

fn root_edges(p: &ReparamPoint, signs: Option<&[f64]>) -> Result<Vec<C64>> {
    // θ_rj for every j (entry at r unused)
    let mut out = vec![ZERO; p.n];
    for (j, slot) in out.iter_mut().enumerate() {
        if j == p.root {
            continue;
        }
        let x = p.x(p.root, j);
        if x == ZERO {
            let (a, b) = if p.root < j { (p.root, j) } else { (j, p.root) };
            return Err(DppError::ZeroChartCoordinate { root: p.root + 1, i: a + 1, j: b + 1 });
        }
        let s = signs.map_or(1.0, |s| s[j]);
        *slot = x.sqrt() * s;
    }
    Ok(out)
}

/// Maps chart coordinates back to a matrix. `signs[j]` selects the branch of
/// `√x_rj` (entries at the root are ignored); `None` uses principal roots.
pub fn from_reparam(p: &ReparamPoint, signs: Option<&[f64]>) -> Result<SymMatrix> {
    let n = p.n;
    let edges = root_edges(p, signs)?;
    let mut theta = SymMatrix::zeros(n);
    for (i, j) in param_pairs(n) {
        let v = if i == j {
            p.diag(i)
        } else if i == p.root {
            edges[j]
        } else if j == p.root {
            edges[i]
        } else {
            p.x(i, j) / (edges[i] * edges[j])
        };
        theta.set(i, j, v);
    }
    Ok(theta)
}

/// Matrix, Jacobian `∂θ/∂y` and second derivatives of the inverse chart map.
pub(crate) struct ChartEval {
    pub theta: SymMatrix,
    pub jac: CMatrix,
    /// `(θ parameter k, y index a, y index b, ∂²θ_k/∂y_a∂y_b)` with `a <= b`.
    pub second: Vec<(usize, usize, usize, C64)>,
}

pub(crate) fn chart_eval(p: &ReparamPoint) -> Result<ChartEval> {
    let n = p.n;
    let m = num_params(n);
    let r = p.root;
    let theta = from_reparam(p, None)?;
    let idx = |i: usize, j: usize| crate::model::param_index(n, i, j);
    let mut jac = CMatrix::zeros(m, m);
    let mut second = Vec::new();
    for (k, (i, j)) in param_pairs(n).into_iter().enumerate() {
        if i == j {
            jac[(k, k)] = C64::new(1.0, 0.0);
        } else if i == r || j == r {
            let a = theta.get(i, j);
            let x = p.coords[k];
            jac[(k, k)] = 0.5 / a;
            second.push((k, k, k, -0.25 / (a * x)));
        } else {
            let (a, b) = (theta.get(r, i), theta.get(r, j));
            let (kri, krj) = (idx(r, i), idx(r, j));
            let (xri, xrj) = (p.coords[kri], p.coords[krj]);
            let t = theta.get(i, j);
            jac[(k, k)] = 1.0 / (a * b);
            jac[(k, kri)] = -t / (2.0 * xri);
            jac[(k, krj)] = -t / (2.0 * xrj);
            let push = |v: &mut Vec<_>, y1: usize, y2: usize, val: C64| {
                v.push((k, y1.min(y2), y1.max(y2), val));
            };
            push(&mut second, k, kri, -1.0 / (2.0 * xri * a * b));
            push(&mut second, k, krj, -1.0 / (2.0 * xrj * a * b));
            push(&mut second, kri, kri, 0.75 * t / (xri * xri));
            push(&mut second, krj, krj, 0.75 * t / (xrj * xrj));
            push(&mut second, kri, krj, 0.25 * t / (xri * xrj));
        }
    }
    Ok(ChartEval { theta, jac, second })
}

/// Chart gradient `J^T g` and, optionally, chart Hessian
/// `J^T H J + Σ_k g_k ∇²θ_k` for data `u`.
fn chart_derivatives(
    ev: &ChartEval,
    cache: &LogDetCache,
    u: &DataVector,
    want_hessian: bool,
) -> Result<(CVector, Option<CMatrix>)> {
    let g = CVector::from_vec(cache.gradient(u)?);
    let grad = ev.jac.transpose() * &g;
    if !want_hessian {
        return Ok((grad, None));
    }
    let h = cache.hessian(u)?;
    let mut hy = ev.jac.transpose() * h * &ev.jac;
    for &(k, a, b, v) in &ev.second {
        let c = g[k] * v;
        hy[(a, b)] += c;
        if a != b {
            hy[(b, a)] += c;
        }
    }
    Ok((grad, Some(hy)))
}

/// The likelihood equations `∇_y L_u = 0` in the chart rooted at `root`, a
/// square rational system in `n(n+1)/2` unknowns.
#[derive(Clone, Debug)]
pub struct LikelihoodSystem {
    pub root: usize,
    pub data: DataVector,
}

impl LikelihoodSystem {
    pub fn new(data: DataVector, root: usize) -> Self {
        LikelihoodSystem { root, data }
    }

    pub fn n(&self) -> usize {
        self.data.n()
    }

    pub fn point(&self, y: &CVector) -> ReparamPoint {
        ReparamPoint { n: self.n(), root: self.root, coords: y.iter().copied().collect() }
    }
}

/// Builds the system of likelihood equations for data `u` in the chart rooted at `root`.
pub fn grad_system(u: &DataVector, root: usize) -> LikelihoodSystem {
    LikelihoodSystem::new(u.clone(), root)
}

impl System for LikelihoodSystem {
    fn dim(&self) -> usize {
        num_params(self.n())
    }

    fn residual(&self, y: &CVector) -> Result<CVector> {
        let ev = chart_eval(&self.point(y))?;
        let cache = LogDetCache::for_data(&ev.theta, &self.data)?;
        Ok(chart_derivatives(&ev, &cache, &self.data, false)?.0)
    }

    fn residual_and_jacobian(&self, y: &CVector) -> Result<(CVector, CMatrix)> {
        let ev = chart_eval(&self.point(y))?;
        let cache = LogDetCache::for_data(&ev.theta, &self.data)?;
        let (f, j) = chart_derivatives(&ev, &cache, &self.data, true)?;
        Ok((f, j.expect("requested")))
    }
}

/// The linear map `u ↦ ∇_y L_u(y)` as an `m x 2^n` matrix (columns in mask order).
pub fn gradient_columns(y: &ReparamPoint) -> Result<CMatrix> {
    let n = y.n;
    let ev = chart_eval(y)?;
    let cache = LogDetCache::full(&ev.theta)?;
    let mut cols = CMatrix::zeros(num_params(n), 1 << n);
    for s in all_subsets(n) {
        let e = DataVector::unit(n, s);
        let (g, _) = chart_derivatives(&ev, &cache, &e, false)?;
        cols.set_column(s.index(), &g);
    }
    Ok(cols)
}

/// A path in data space, `u(t) = (1 - t) from + t to + t (1 - t) detour`.
#[derive(Clone, Debug)]
pub struct DataPath {
    pub from: DataVector,
    pub to: DataVector,
    pub detour: Option<DataVector>,
}

impl DataPath {
    pub fn straight(from: DataVector, to: DataVector) -> Self {
        DataPath { from, to, detour: None }
    }

    pub fn at(&self, t: f64) -> DataVector {
        let base = self.from.combine(C64::new(1.0 - t, 0.0), &self.to, C64::new(t, 0.0));
        match &self.detour {
            Some(w) => base.combine(C64::new(1.0, 0.0), w, C64::new(t * (1.0 - t), 0.0)),
            None => base,
        }
    }

    pub fn derivative(&self, t: f64) -> DataVector {
        let base = self.from.combine(C64::new(-1.0, 0.0), &self.to, C64::new(1.0, 0.0));
        match &self.detour {
            Some(w) => base.combine(C64::new(1.0, 0.0), w, C64::new(1.0 - 2.0 * t, 0.0)),
            None => base,
        }
    }

    pub fn reversed(&self) -> DataPath {
        DataPath { from: self.to.clone(), to: self.from.clone(), detour: self.detour.clone() }
    }
}

/// Parameter homotopy `H(y, t) = ∇_y L_{u(t)}(y)` along a data path.
#[derive(Clone, Debug)]
pub struct LikelihoodHomotopy {
    pub n: usize,
    pub root: usize,
    pub path: DataPath,
}

impl LikelihoodHomotopy {
    pub fn new(path: DataPath, root: usize) -> Self {
        LikelihoodHomotopy { n: path.from.n(), root, path }
    }

    fn point(&self, y: &CVector) -> ReparamPoint {
        ReparamPoint { n: self.n, root: self.root, coords: y.iter().copied().collect() }
    }
}

impl Homotopy for LikelihoodHomotopy {
    fn dim(&self) -> usize {
        num_params(self.n)
    }

    fn residual(&self, y: &CVector, t: f64) -> Result<CVector> {
        let u = self.path.at(t);
        let ev = chart_eval(&self.point(y))?;
        let cache = LogDetCache::full(&ev.theta)?;
        Ok(chart_derivatives(&ev, &cache, &u, false)?.0)
    }

    fn residual_and_jacobian(&self, y: &CVector, t: f64) -> Result<(CVector, CMatrix)> {
        let u = self.path.at(t);
        let ev = chart_eval(&self.point(y))?;
        let cache = LogDetCache::full(&ev.theta)?;
        let (f, j) = chart_derivatives(&ev, &cache, &u, true)?;
        Ok((f, j.expect("requested")))
    }

    fn jacobian_and_dt(&self, y: &CVector, t: f64) -> Result<(CMatrix, CVector)> {
        let u = self.path.at(t);
        let du = self.path.derivative(t);
        let ev = chart_eval(&self.point(y))?;
        let cache = LogDetCache::full(&ev.theta)?;
        let (_, j) = chart_derivatives(&ev, &cache, &u, true)?;
        let (dt, _) = chart_derivatives(&ev, &cache, &du, false)?;
        Ok((j.expect("requested"), dt))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{principal_minors, sign_orbit};

    fn real(n: usize, rows: &[f64]) -> SymMatrix {
        SymMatrix::from_real(n, rows).unwrap()
    }

    #[test]
    fn chart_monomials() {
        let theta = real(3, &[1., 2., 3., 2., 1., 5., 3., 5., 1.]);
        let p = to_reparam(&theta, 0);
        assert_eq!(p.x(0, 1), C64::new(4.0, 0.0));
        assert_eq!(p.x(0, 2), C64::new(9.0, 0.0));
        assert_eq!(p.x(1, 2), C64::new(30.0, 0.0));
    }

    #[test]
    fn chart_boundary() {
        let theta = real(3, &[1., 0., 0., 0., 2., 0., 0., 0., 3.]);
        let p = to_reparam(&theta, 0);
        assert!(matches!(
            from_reparam(&p, None),
            Err(DppError::ZeroChartCoordinate { root: 1, i: 1, j: 2 })
        ));
    }

    #[test]
    fn round_trip_lands_in_orbit() {
        let theta = real(4, &[3., -1., 2., 0.5, -1., 4., 1., -2., 2., 1., 5., 1.5, 0.5, -2., 1.5, 6.]);
        for root in 0..4 {
            let back = from_reparam(&to_reparam(&theta, root), None).unwrap();
            let orbit = sign_orbit(&theta);
            assert!(orbit.iter().any(|m| (0..10).all(|k| (m.params()[k] - back.params()[k]).norm() < 1e-12)));
            let (a, b) = (principal_minors(&theta), principal_minors(&back));
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!((x - y).norm() < 1e-10 * (1.0 + x.norm()));
            }
        }
    }

    #[test]
    fn n2_closed_form_solves_chart_system() {
        let (e, a, b, ab) = (3.0, 5.0, 7.0, 4.0);
        let u = DataVector::from_graded_real(2, &[e, a, b, ab]).unwrap();
        let sys = grad_system(&u, 0);
        let y = CVector::from_vec(vec![
            C64::new(a / e, 0.0),
            C64::new(b / e, 0.0),
            C64::new((a * b - e * ab) / (e * e), 0.0),
        ]);
        let f = sys.residual(&y).unwrap();
        assert!(f.iter().all(|z| z.norm() < 1e-12), "{f}");
    }
}
