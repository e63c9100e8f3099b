//! Block-diagonal (partially decoupled) critical points.
//!
//! If `Θ = Θ_{π_1} ⊕ … ⊕ Θ_{π_k}` for a set partition `π`, the log-likelihood
//! splits as a sum of log-likelihoods of the blocks for the restricted data
//! `v^(i)_J = Σ { u_I : I ∩ π_i = J }`, and a block-diagonal matrix is critical
//! exactly when each block is critical for its restricted data. Blocks of size
//! one and two have closed forms; larger blocks are solved numerically.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::combinatorics::{enumerate_set_partitions, SetPartition, SubsetIndex};
use crate::model::{sign_orbit, DataVector, SymMatrix};
use crate::solver::classify::{classify, CriticalPoint};
use crate::solver::{monodromy_solve, HomotopyRun, SolverOptions};
use crate::{DppError, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Established symbolically.
    Proven,
    /// A lower bound found numerically and believed to be exact.
    NumericallySupported,
}

/// Known ML degrees `μ_n` of the implicit model.
#[derive(Clone, Debug)]
pub struct MlDegreeTable {
    entries: Vec<(usize, u64, Provenance)>,
}

impl Default for MlDegreeTable {
    fn default() -> Self {
        MlDegreeTable {
            entries: vec![
                (1, 1, Provenance::Proven),
                (2, 1, Provenance::Proven),
                (3, 13, Provenance::Proven),
                (4, 3526, Provenance::NumericallySupported),
            ],
        }
    }
}

impl MlDegreeTable {
    pub fn get(&self, n: usize) -> Result<u64> {
        self.entries.iter().find(|e| e.0 == n).map(|e| e.1).ok_or(DppError::MissingMlDegree(n))
    }

    pub fn provenance(&self, n: usize) -> Option<Provenance> {
        self.entries.iter().find(|e| e.0 == n).map(|e| e.2)
    }

    pub fn max_known(&self) -> usize {
        self.entries.iter().map(|e| e.0).max().unwrap_or(0)
    }
}

/// Marginal data on `block`: `v_J = Σ { u_I : I ∩ block = J }`, indexed by
/// subsets of `block` relabelled to `1..=|block|` in increasing order.
pub fn restrict_data(u: &DataVector, block: SubsetIndex) -> Result<DataVector> {
    if block.is_empty() {
        return Err(DppError::EmptyBlock);
    }
    let n = u.n();
    if block.mask() >> n != 0 {
        return Err(DppError::InvalidInput(format!("block {block} is not a subset of [{n}]")));
    }
    let positions = block.positions();
    let mut v = vec![C64::new(0.0, 0.0); 1 << positions.len()];
    for (mask, value) in u.values().iter().enumerate() {
        let local = positions
            .iter()
            .enumerate()
            .filter(|(_, &p)| mask & (1 << p) != 0)
            .fold(0usize, |acc, (k, _)| acc | (1 << k));
        v[local] += value;
    }
    DataVector::from_mask_order(positions.len(), v)
}

/// The critical point `θ = v_1 / v_∅` of a one-element block.
pub fn block1_mle(v: &DataVector) -> Result<C64> {
    if v.n() != 1 {
        return Err(DppError::InvalidInput("block1_mle needs data on one element".into()));
    }
    let (v0, v1) = (v.values()[0], v.values()[1]);
    if v0.norm() == 0.0 {
        return Err(DppError::ZeroDenominator);
    }
    Ok(v1 / v0)
}

/// The critical points of a two-element block, each with its multiplicity:
/// `θ_11 = v_1/v_∅`, `θ_22 = v_2/v_∅`, `θ_12 = ±√(v_1 v_2 - v_∅ v_12)/v_∅`.
/// A vanishing radicand gives a single diagonal matrix of multiplicity 2.
pub fn block2_mle(v: &DataVector) -> Result<Vec<(SymMatrix, usize)>> {
    if v.n() != 2 {
        return Err(DppError::InvalidInput("block2_mle needs data on two elements".into()));
    }
    let [v0, v1, v2, v12] = [v.values()[0], v.values()[1], v.values()[2], v.values()[3]];
    if v0.norm() == 0.0 {
        return Err(DppError::ZeroDenominator);
    }
    let radicand = v1 * v2 - v0 * v12;
    let mut theta = SymMatrix::zeros(2);
    theta.set(0, 0, v1 / v0);
    theta.set(1, 1, v2 / v0);
    if radicand.norm() <= 1e-14 * ((v1 * v2).norm() + (v0 * v12).norm()) {
        return Ok(vec![(theta, 2)]);
    }
    let off = radicand.sqrt() / v0;
    let mut minus = theta.clone();
    theta.set(0, 1, off);
    minus.set(0, 1, -off);
    Ok(vec![(theta, 1), (minus, 1)])
}

/// Critical matrices of one block for its restricted data.
#[derive(Clone, Debug)]
pub struct BlockCriticalSet {
    pub block: SubsetIndex,
    /// Every critical matrix, with full sign orbits, and its multiplicity.
    pub points: Vec<(SymMatrix, usize)>,
    pub run: Option<HomotopyRun>,
}

/// Numerical solver for blocks with three or more elements. Implementations
/// return one representative per sign orbit.
pub trait BlockSolver: Sync {
    fn solve_block(&self, v: &DataVector) -> Result<(Vec<SymMatrix>, Option<HomotopyRun>)>;
}

/// Solves blocks by monodromy on the main component.
pub struct MonodromyBlockSolver {
    pub opts: SolverOptions,
}

impl BlockSolver for MonodromyBlockSolver {
    fn solve_block(&self, v: &DataVector) -> Result<(Vec<SymMatrix>, Option<HomotopyRun>)> {
        let result = monodromy_solve(v, &self.opts)?;
        Ok((result.solutions.into_iter().map(|s| s.theta).collect(), Some(result.run)))
    }
}

/// The critical set of `block` for data `u` on the full ground set.
pub fn solve_block(u: &DataVector, block: SubsetIndex, solver: &dyn BlockSolver) -> Result<BlockCriticalSet> {
    let v = restrict_data(u, block)?;
    let (points, run) = match block.len() {
        1 => {
            let theta = SymMatrix::from_params(1, vec![block1_mle(&v)?])?;
            (vec![(theta, 1)], None)
        }
        2 => (block2_mle(&v)?, None),
        _ => {
            let (reps, run) = solver.solve_block(&v)?;
            let points = reps.iter().flat_map(sign_orbit).map(|m| (m, 1)).collect();
            (points, run)
        }
    };
    Ok(BlockCriticalSet { block, points, run })
}

/// `⊕ Θ_i`, placing each block matrix on the rows and columns of its block.
pub fn direct_sum(n: usize, parts: &[(SubsetIndex, &SymMatrix)]) -> SymMatrix {
    let mut theta = SymMatrix::zeros(n);
    for (block, m) in parts {
        let pos = block.positions();
        for (a, &i) in pos.iter().enumerate() {
            for (b, &j) in pos.iter().enumerate().skip(a) {
                theta.set(i, j, m.get(a, b));
            }
        }
    }
    theta
}

/// Off-diagonal entries inside a block of `partition` with
/// `|θ_ij| ≤ 1e-8 (1 + max |θ|)`, as 1-based pairs.
pub fn accidental_zeros(theta: &SymMatrix, partition: &SetPartition) -> Vec<(usize, usize)> {
    let tiny = 1e-8 * (1.0 + theta.max_abs());
    let mut out = Vec::new();
    for block in partition.blocks() {
        let pos = block.positions();
        for (a, &i) in pos.iter().enumerate() {
            for &j in &pos[a + 1..] {
                if theta.get(i, j).norm() <= tiny {
                    out.push((i + 1, j + 1));
                }
            }
        }
    }
    out
}

/// Result of assembling the critical points with block structure `partition`.
#[derive(Clone, Debug)]
pub struct Assembly {
    pub partition: SetPartition,
    pub points: Vec<CriticalPoint>,
    /// Homotopy runs for the numerically solved blocks.
    pub runs: Vec<(SubsetIndex, HomotopyRun)>,
}

/// Direct sums over the Cartesian product of the per-block critical sets.
pub fn assemble_decouplings(
    u: &DataVector,
    partition: &SetPartition,
    solver: &dyn BlockSolver,
    opts: &SolverOptions,
) -> Result<Assembly> {
    let sets = partition
        .blocks()
        .iter()
        .map(|&b| solve_block(u, b, solver))
        .collect::<Result<Vec<_>>>()?;
    assemble_from_sets(u, partition, &sets, opts)
}

pub(crate) fn assemble_from_sets(
    u: &DataVector,
    partition: &SetPartition,
    sets: &[BlockCriticalSet],
    opts: &SolverOptions,
) -> Result<Assembly> {
    let n = u.n();
    let mut combos: Vec<Vec<usize>> = vec![Vec::new()];
    for set in sets {
        combos = combos
            .into_iter()
            .flat_map(|c| {
                (0..set.points.len()).map(move |k| {
                    let mut c = c.clone();
                    c.push(k);
                    c
                })
            })
            .collect();
    }
    let mut points = Vec::with_capacity(combos.len());
    for combo in combos {
        let parts: Vec<(SubsetIndex, &SymMatrix)> =
            sets.iter().zip(&combo).map(|(s, &k)| (s.block, &s.points[k].0)).collect();
        let multiplicity = sets.iter().zip(&combo).map(|(s, &k)| s.points[k].1).product();
        let theta = direct_sum(n, &parts);
        let mut point = classify(&theta, u, partition.clone(), opts)?;
        point.multiplicity = multiplicity;
        point.accidental_zeros = accidental_zeros(&point.theta, partition);
        points.push(point);
    }
    let runs = sets.iter().filter_map(|s| s.run.clone().map(|r| (s.block, r))).collect();
    Ok(Assembly { partition: partition.clone(), points, runs })
}

/// Expected number of critical matrices with block structure exactly `π`:
/// `Π_i 2^{|π_i| - 1} μ_{|π_i|}`.
pub fn partition_summand(partition: &SetPartition, table: &MlDegreeTable) -> Result<u64> {
    partition.blocks().iter().try_fold(1u64, |acc, b| {
        let r = b.len();
        let term = table.get(r)?.checked_mul(1 << (r - 1)).ok_or(DppError::Overflow("critical point count"))?;
        acc.checked_mul(term).ok_or(DppError::Overflow("critical point count"))
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PartitionCount {
    pub partition: String,
    pub count: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriticalPointCount {
    pub n: usize,
    pub total: u64,
    pub summands: Vec<PartitionCount>,
    /// Whether some ML degree used is only numerically supported.
    pub conditional: bool,
}

/// Number of complex critical matrices for generic data, summed over all set partitions.
pub fn count_critical_points(n: usize, table: &MlDegreeTable) -> Result<CriticalPointCount> {
    let partitions = enumerate_set_partitions(n)?;
    let mut summands = Vec::with_capacity(partitions.len());
    let mut total = 0u64;
    for p in &partitions {
        let count = partition_summand(p, table)?;
        total = total.checked_add(count).ok_or(DppError::Overflow("critical point count"))?;
        summands.push(PartitionCount { partition: p.to_string(), count });
    }
    let conditional = (1..=n).any(|r| table.provenance(r) == Some(Provenance::NumericallySupported));
    Ok(CriticalPointCount { n, total, summands, conditional })
}

/// Solves each distinct block once and assembles every partition.
pub fn assemble_all(u: &DataVector, solver: &dyn BlockSolver, opts: &SolverOptions) -> Result<Vec<Assembly>> {
    let partitions = enumerate_set_partitions(u.n())?;
    let mut cache: BTreeMap<u32, BlockCriticalSet> = BTreeMap::new();
    for p in &partitions {
        for &b in p.blocks() {
            if let std::collections::btree_map::Entry::Vacant(slot) = cache.entry(b.mask()) {
                slot.insert(solve_block(u, b, solver)?);
            }
        }
    }
    partitions
        .iter()
        .map(|p| {
            let sets: Vec<BlockCriticalSet> = p.blocks().iter().map(|b| cache[&b.mask()].clone()).collect();
            assemble_from_sets(u, p, &sets, opts)
        })
        .collect()
}
