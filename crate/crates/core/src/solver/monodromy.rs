//! Monodromy solving on the main component of the likelihood correspondence.
//!
//! The likelihood equations `∇_y L_u(y) = A(y) u` are linear in the data. A
//! seed pair is made by fixing a random complex chart point `y*` and taking a
//! random `u*` in the kernel of `A(y*)`. Random triangular loops in data space
//! based at `u*` permute the solutions of the `u*` system; tracking every known
//! solution around every loop harvests the rest. A final parameter homotopy
//! carries the solutions from `u*` to the target data.

use std::collections::VecDeque;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::decoupling::MlDegreeTable;
use crate::linalg::{kernel_basis, rel_distance, CVector};
use crate::model::{num_params, DataVector};
use crate::solver::chart::{gradient_columns, DataPath, LikelihoodHomotopy};
use crate::solver::tracker::{track_path, TrackerOptions};
use crate::solver::{
    complex_normal, from_reparam, normalize_data, random_data, refine_solution, to_reparam, ChartSolution,
    ReparamPoint, SolverOptions,
};
use crate::{DppError, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    TargetCountReached,
    StallLimit,
    MaxLoops,
}

#[derive(Clone, Debug, Serialize)]
pub struct HomotopyRun {
    pub seed: u64,
    pub loops: usize,
    /// Distinct solutions known at the base data.
    pub base_solutions: usize,
    /// Distinct solutions carried to the target data.
    pub solutions_found: usize,
    pub target_count: Option<usize>,
    pub stop_reason: StopReason,
    pub loop_paths_tracked: usize,
    pub loop_path_failures: usize,
    /// Final-homotopy paths that failed in every chart on the last path tried.
    pub final_path_failures: usize,
    /// Final-homotopy paths that needed a non-default chart root (1-based roots).
    pub chart_fallbacks: Vec<usize>,
}

impl HomotopyRun {
    /// The run stopped short of a known target count.
    pub fn is_incomplete(&self) -> bool {
        self.target_count.is_some_and(|t| self.solutions_found < t)
    }
}

#[derive(Clone, Debug)]
pub struct MonodromyResult {
    pub run: HomotopyRun,
    pub solutions: Vec<ChartSolution>,
}

impl MonodromyResult {
    /// Fails with `StallWithoutTarget` when fewer than the known ML degree were found.
    pub fn require_complete(self) -> Result<Self> {
        if let Some(t) = self.run.target_count.filter(|&t| self.run.solutions_found < t) {
            return Err(DppError::StallWithoutTarget { found: self.run.solutions_found, expected: t });
        }
        Ok(self)
    }
}

struct Loop {
    a: DataVector,
    b: DataVector,
}

fn track_loop(base: &DataVector, lp: &Loop, y: &CVector, tracker: &TrackerOptions) -> Option<CVector> {
    let legs = [
        DataPath::straight(base.clone(), lp.a.clone()),
        DataPath::straight(lp.a.clone(), lp.b.clone()),
        DataPath::straight(lp.b.clone(), base.clone()),
    ];
    let mut y = y.clone();
    for leg in legs {
        let h = LikelihoodHomotopy::new(leg, 0);
        y = track_path(&h, &y, 0.0, 1.0, tracker).ok()?.point;
    }
    Some(y)
}

/// Random seed pair `(y*, u*)` with `∇_y L_{u*}(y*) = 0`.
fn seed_pair(rng: &mut ChaCha8Rng, n: usize, tol: f64) -> Result<(DataVector, ChartSolution)> {
    let m = num_params(n);
    for _ in 0..20 {
        let coords: Vec<C64> = (0..m).map(|_| complex_normal(rng)).collect();
        let y = ReparamPoint { n, root: 0, coords };
        let a = gradient_columns(&y)?;
        let basis = kernel_basis(&a, 1e-12);
        if basis.len() != (1 << n) - m {
            continue;
        }
        let mut u = CVector::zeros(1 << n);
        for b in &basis {
            u += b * complex_normal(rng);
        }
        let u = normalize_data(&DataVector::from_mask_order(n, u.iter().copied().collect())?);
        if let Some(sol) = refine_solution(&u, 0, &y.to_vector(), tol) {
            return Ok((u, sol));
        }
    }
    Err(DppError::PathFailure("could not construct a monodromy seed pair".into()))
}

/// Tracks one base solution to the target along `path`, trying each chart
/// root in turn until a refined endpoint is obtained.
fn final_path(start: &ChartSolution, path: &DataPath, opts: &SolverOptions) -> Option<ChartSolution> {
    let theta = from_reparam(&start.point, None).ok()?;
    (0..path.from.n()).find_map(|root| {
        let y0 = to_reparam(&theta, root).to_vector();
        let h = LikelihoodHomotopy::new(path.clone(), root);
        let end = track_path(&h, &y0, 0.0, 1.0, &opts.tracker).ok()?;
        refine_solution(&path.to, root, &end.point, opts.residual_tol)
    })
}

/// Loop paths tracked per parallel batch.
const BATCH: usize = 256;

/// State of a monodromy run, reported after every batch of loop paths.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LoopProgress {
    pub loops: usize,
    /// False while the newest loop still has paths queued.
    pub loop_finished: bool,
    pub base_solutions: usize,
    pub loops_without_new: usize,
    pub paths_tracked: usize,
    pub path_failures: usize,
}

/// Solves `∇L_u = 0` on the main component by monodromy followed by a
/// parameter homotopy to `u`. Returns refined, deduplicated chart solutions.
pub fn monodromy_solve(u: &DataVector, opts: &SolverOptions) -> Result<MonodromyResult> {
    monodromy_solve_with_progress(u, opts, &mut |_| {})
}

/// [`monodromy_solve`], calling `progress` after every batch of loop paths.
pub fn monodromy_solve_with_progress(
    u: &DataVector,
    opts: &SolverOptions,
    progress: &mut dyn FnMut(LoopProgress),
) -> Result<MonodromyResult> {
    let n = u.n();
    let target_count = opts.target_count.or_else(|| MlDegreeTable::default().get(n).ok().map(|m| m as usize));
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let (base, seed_sol) = seed_pair(&mut rng, n, opts.residual_tol)?;

    let mut sols: Vec<ChartSolution> = vec![seed_sol];
    let mut loops: Vec<Loop> = Vec::new();
    let (mut tracked, mut failures, mut stall) = (0usize, 0usize, 0usize);
    let reached = |count: usize| target_count.is_some_and(|t| count >= t);

    let stop_reason = loop {
        if reached(sols.len()) {
            break StopReason::TargetCountReached;
        }
        if stall >= opts.stall_loops {
            break StopReason::StallLimit;
        }
        if loops.len() >= opts.max_loops {
            break StopReason::MaxLoops;
        }
        loops.push(Loop { a: random_data(&mut rng, n), b: random_data(&mut rng, n) });
        let before = sols.len();
        // (solution, loop) pairs still to be tracked
        let mut pending: VecDeque<(usize, usize)> = (0..sols.len()).map(|s| (s, loops.len() - 1)).collect();
        while !pending.is_empty() && !reached(sols.len()) {
            let batch: Vec<(usize, usize)> = pending.drain(..pending.len().min(BATCH)).collect();
            let ends: Vec<Option<CVector>> = batch
                .par_iter()
                .map(|&(s, l)| track_loop(&base, &loops[l], &sols[s].point.to_vector(), &opts.tracker))
                .collect();
            tracked += batch.len();
            for end in ends {
                let Some(y) = end else {
                    failures += 1;
                    continue;
                };
                let Some(sol) = refine_solution(&base, 0, &y, opts.residual_tol) else {
                    failures += 1;
                    continue;
                };
                let known = sols
                    .iter()
                    .any(|s| rel_distance(&s.point.coords, &sol.point.coords) < opts.dedup_tol);
                if !known {
                    sols.push(sol);
                    let idx = sols.len() - 1;
                    pending.extend((0..loops.len()).map(|l| (idx, l)));
                }
            }
            if !pending.is_empty() {
                progress(LoopProgress {
                    loops: loops.len(),
                    loop_finished: false,
                    base_solutions: sols.len(),
                    loops_without_new: stall,
                    paths_tracked: tracked,
                    path_failures: failures,
                });
            }
        }
        stall = if sols.len() > before { 0 } else { stall + 1 };
        progress(LoopProgress {
            loops: loops.len(),
            loop_finished: true,
            base_solutions: sols.len(),
            loops_without_new: stall,
            paths_tracked: tracked,
            path_failures: failures,
        });
    };

    // Every base solution is carried along the straight segment and then, while
    // some endpoints are still missing (failed or jumped paths), along detours.
    let target = normalize_data(u);
    let mut solutions: Vec<ChartSolution> = Vec::new();
    let mut final_failures = 0;
    for attempt in 0..=opts.gamma_retries {
        if solutions.len() >= sols.len() {
            break;
        }
        let detour = (attempt > 0).then(|| random_data(&mut rng, n));
        let path = DataPath { from: base.clone(), to: target.clone(), detour };
        let ends: Vec<Option<ChartSolution>> = sols.par_iter().map(|s| final_path(s, &path, opts)).collect();
        final_failures = ends.iter().filter(|e| e.is_none()).count();
        for sol in ends.into_iter().flatten() {
            match solutions.iter_mut().find(|s| rel_distance(&s.key, &sol.key) < opts.dedup_tol) {
                Some(known) if sol.residual < known.residual => *known = sol,
                Some(_) => {}
                None => solutions.push(sol),
            }
        }
    }
    let chart_fallbacks: Vec<usize> =
        solutions.iter().filter(|s| s.point.root != 0).map(|s| s.point.root + 1).collect();

    let run = HomotopyRun {
        seed: opts.seed,
        loops: loops.len(),
        base_solutions: sols.len(),
        solutions_found: solutions.len(),
        target_count,
        stop_reason,
        loop_paths_tracked: tracked,
        loop_path_failures: failures,
        final_path_failures: final_failures,
        chart_fallbacks,
    };
    Ok(MonodromyResult { run, solutions })
}

/// Tracks the solutions of one data vector to another, in the chart rooted at vertex 1.
pub fn parameter_homotopy(
    from: &DataVector,
    to: &DataVector,
    starts: &[CVector],
    tracker: &TrackerOptions,
) -> Vec<std::result::Result<CVector, crate::solver::TrackFailure>> {
    let h = LikelihoodHomotopy::new(DataPath::straight(from.clone(), to.clone()), 0);
    starts.par_iter().map(|y| track_path(&h, y, 0.0, 1.0, tracker).map(|e| e.point)).collect()
}
