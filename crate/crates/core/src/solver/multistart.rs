//! Newton's method from many random complex starts. Slow and without any
//! completeness guarantee, but independent of the monodromy machinery and of
//! the chart derivatives, which makes it useful as a cross-check for small `n`.
//!
//! Each start goes through up to three solvers on the gradient in matrix
//! entries and stops at the first that ends on a full-support solution:
//!
//! 1. damped Newton on the gradient `F`;
//! 2. damped Newton on `F` with its denominators cleared, which removes the
//!    poles that cut up the Newton basins of `F`;
//! 3. the Newton flow, as the homotopy `F(y) - (1 - t) F(y₀)`.
//!
//! Block-diagonal critical points (some `θ_ij = 0`) are critical for all data
//! and attract many starts; they leave every chart and are dropped. Solutions
//! next to a vanishing minor have small basins under all three methods.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::combinatorics::SubsetIndex;
use crate::model::{gradient, hessian, num_params, partition_function, principal_minors, DataVector, SymMatrix};
use crate::solver::dedup::cluster;
use crate::linalg::{CMatrix, CVector};
use crate::solver::newton::{damped_newton, NewtonOptions, System};
use crate::solver::tracker::{track_path, Homotopy, TrackerOptions};
use crate::solver::{complex_normal, normalize_data, refine_solution, to_reparam, ChartSolution, SolverOptions};
use crate::{Result, C64};

#[derive(Clone, Debug, Serialize)]
pub struct MultistartReport {
    pub starts: usize,
    pub converged: usize,
    pub failed: usize,
    /// Distinct solutions, each with the number of starts that reached it or
    /// its conjugate.
    #[serde(skip)]
    pub solutions: Vec<(ChartSolution, usize)>,
}

/// Ratio of the data mass on sets containing `i` to the mass on sets avoiding it;
/// the maximum likelihood diagonal when all off-diagonal entries vanish.
fn marginal_scales(u: &DataVector) -> Vec<f64> {
    let n = u.n();
    (1..=n)
        .map(|i| {
            let (mut inside, mut outside) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
            for (mask, v) in u.values().iter().enumerate() {
                if SubsetIndex::from_mask(mask as u32).contains(i) {
                    inside += v;
                } else {
                    outside += v;
                }
            }
            let r = inside.norm() / outside.norm();
            if r.is_finite() && r > 0.0 {
                r
            } else {
                1.0
            }
        })
        .collect()
}

fn random_start(rng: &mut ChaCha8Rng, scales: &[f64]) -> SymMatrix {
    let n = scales.len();
    let mut theta = SymMatrix::zeros(n);
    for i in 0..n {
        theta.set(i, i, (complex_normal(rng) * 0.7).exp() * scales[i]);
        for j in i + 1..n {
            theta.set(i, j, complex_normal(rng) * (scales[i] * scales[j]).sqrt() * 0.7);
        }
    }
    theta
}

/// `∇_θ L_u(θ) = 0` in the original matrix entries, with the model Hessian
/// as Jacobian. Independent of the chart derivatives used elsewhere.
struct EntrySystem<'a> {
    u: &'a DataVector,
}

impl System for EntrySystem<'_> {
    fn dim(&self) -> usize {
        num_params(self.u.n())
    }
    fn residual(&self, y: &CVector) -> Result<CVector> {
        let theta = SymMatrix::from_params(self.u.n(), y.iter().copied().collect())?;
        Ok(CVector::from_vec(gradient(&theta, self.u)?.params().to_vec()))
    }
    fn residual_and_jacobian(&self, y: &CVector) -> Result<(CVector, CMatrix)> {
        let theta = SymMatrix::from_params(self.u.n(), y.iter().copied().collect())?;
        Ok((CVector::from_vec(gradient(&theta, self.u)?.params().to_vec()), hessian(&theta, self.u)?))
    }
}

const HOMOTOPY_STEPS: usize = 60;

/// The gradient with denominators cleared: `G = (D / c) F` with `D` the product
/// of `det(Θ + Id)` and every minor that carries data, `c = D(y₀)`. `G` has no
/// poles, so its Newton basins differ from those of `F`.
struct ClearedSystem<'a> {
    sys: &'a EntrySystem<'a>,
    c: C64,
}

impl ClearedSystem<'_> {
    fn denominator(&self, y: &CVector) -> Result<C64> {
        let theta = SymMatrix::from_params(self.sys.u.n(), y.iter().copied().collect())?;
        let p = principal_minors(&theta);
        let mut d = partition_function(&theta);
        for (v, m) in self.sys.u.values().iter().zip(p.values()).skip(1) {
            if v.norm() > 0.0 {
                d *= m;
            }
        }
        Ok(d)
    }

    /// `∇ log D`: a sum of unit-data gradients, corrected for the `det(Θ + Id)` terms.
    fn log_gradient(&self, y: &CVector) -> Result<CVector> {
        let u = self.sys.u;
        let theta = SymMatrix::from_params(u.n(), y.iter().copied().collect())?;
        let grad = |mask: usize| -> Result<CVector> {
            let e = DataVector::unit(u.n(), SubsetIndex::from_mask(mask as u32));
            Ok(CVector::from_vec(gradient(&theta, &e)?.params().to_vec()))
        };
        // gradient of the empty set's unit data is -∇ log det(Θ + Id)
        let shift = grad(0)?;
        let mut g = -&shift;
        for (mask, v) in u.values().iter().enumerate().skip(1) {
            if v.norm() > 0.0 {
                g += grad(mask)? - &shift;
            }
        }
        Ok(g)
    }
}

impl System for ClearedSystem<'_> {
    fn dim(&self) -> usize {
        self.sys.dim()
    }
    fn residual(&self, y: &CVector) -> Result<CVector> {
        Ok(self.sys.residual(y)? * (self.denominator(y)? / self.c))
    }
    fn residual_and_jacobian(&self, y: &CVector) -> Result<(CVector, CMatrix)> {
        let (f, j) = self.sys.residual_and_jacobian(y)?;
        let s = self.denominator(y)? / self.c;
        let g = self.log_gradient(y)?;
        Ok((&f * s, (j + &f * g.transpose()) * s))
    }
}

/// `F(y) - (1 - t) F(y₀)`: follows the Newton flow from `y₀` to a zero of `F`.
struct NewtonHomotopy<'a> {
    sys: &'a EntrySystem<'a>,
    f0: CVector,
}

impl Homotopy for NewtonHomotopy<'_> {
    fn dim(&self) -> usize {
        self.sys.dim()
    }
    fn residual(&self, y: &CVector, t: f64) -> Result<CVector> {
        Ok(self.sys.residual(y)? - &self.f0 * C64::new(1.0 - t, 0.0))
    }
    fn residual_and_jacobian(&self, y: &CVector, t: f64) -> Result<(CVector, CMatrix)> {
        let (f, j) = self.sys.residual_and_jacobian(y)?;
        Ok((f - &self.f0 * C64::new(1.0 - t, 0.0), j))
    }
    fn jacobian_and_dt(&self, y: &CVector, _t: f64) -> Result<(CMatrix, CVector)> {
        let (_, j) = self.sys.residual_and_jacobian(y)?;
        Ok((j, self.f0.clone()))
    }
}

/// Runs `num_starts` random complex starts, refines every converged end point
/// in a chart and returns the distinct solutions. For real data the conjugate
/// of each solution is added as well.
pub fn multistart_solve(u: &DataVector, num_starts: usize, opts: &SolverOptions) -> Result<MultistartReport> {
    let target = normalize_data(u);
    let scales = marginal_scales(&target);
    let starts: Vec<SymMatrix> = (0..num_starts)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add((k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)));
            random_start(&mut rng, &scales)
        })
        .collect();
    let sys = EntrySystem { u: &target };
    let to_chart = |end: &CVector| -> Option<ChartSolution> {
        let theta = SymMatrix::from_params(target.n(), end.iter().copied().collect()).ok()?;
        // entries that vanish leave every chart; such points are not counted
        let root = (0..target.n()).find(|&root| to_reparam(&theta, root).coords.iter().all(|z| z.norm() > 1e-10))?;
        refine_solution(&target, root, &to_reparam(&theta, root).to_vector(), opts.residual_tol)
    };
    let ends: Vec<Option<ChartSolution>> = starts
        .par_iter()
        .map(|theta| {
            let y0 = CVector::from_vec(theta.params().to_vec());
            let plain = || damped_newton(&sys, &y0, NewtonOptions { tol: 1e-10, max_iter: 30 }).ok().map(|r| r.point);
            let cleared = || {
                let unit = ClearedSystem { sys: &sys, c: C64::new(1.0, 0.0) };
                let c = unit.denominator(&y0).ok().filter(|c| c.norm() > 0.0)?;
                damped_newton(&ClearedSystem { sys: &sys, c }, &y0, NewtonOptions { tol: 1e-12, max_iter: 40 })
                    .ok()
                    .map(|r| r.point)
            };
            let flow = || {
                let h = NewtonHomotopy { sys: &sys, f0: sys.residual(&y0).ok()? };
                let topts = TrackerOptions {
                    max_steps: HOMOTOPY_STEPS,
                    max_step: 0.25,
                    initial_step: 0.05,
                    end_tol: 1e-10,
                    ..opts.tracker
                };
                track_path(&h, &y0, 0.0, 1.0, &topts).ok().map(|e| e.point)
            };
            plain()
                .and_then(|e| to_chart(&e))
                .or_else(|| cleared().and_then(|e| to_chart(&e)))
                .or_else(|| flow().and_then(|e| to_chart(&e)))
        })
        .collect();
    let mut converged: Vec<ChartSolution> = ends.into_iter().flatten().collect();
    let count = converged.len();
    if target.is_real() {
        // real equations: solutions come in conjugate pairs
        let conjugates: Vec<ChartSolution> = converged
            .iter()
            .filter_map(|s| {
                let y: CVector = s.point.to_vector().map(|z| z.conj());
                refine_solution(&target, s.point.root, &y, opts.residual_tol)
            })
            .collect();
        converged.extend(conjugates);
    }
    let solutions = cluster(converged, |s| &s.key, |s| s.residual, opts.dedup_tol);
    Ok(MultistartReport { starts: num_starts, converged: count, failed: num_starts - count, solutions })
}
