//! Complete lists of critical points for one data vector.
//!
//! `Component::Main` solves the likelihood equations on the main component
//! and lists one representative per sign orbit (the chart solutions).
//! `Component::All` lists every critical matrix: each set partition
//! contributes the direct sums of its blocks' critical sets, with full sign
//! orbits, so the listing can be compared with the generic count directly.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::combinatorics::{enumerate_set_partitions, SetPartition, SubsetIndex};
use crate::decoupling::{accidental_zeros, assemble_all, partition_summand, MlDegreeTable, MonodromyBlockSolver};
use crate::model::DataVector;
use crate::solver::{classify, mark_global_maxima, monodromy_solve, CriticalPoint, HomotopyRun, PointKind, SolverOptions};
use crate::{DppError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Main,
    All,
}

impl FromStr for Component {
    type Err = DppError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "main" => Ok(Component::Main),
            "all" => Ok(Component::All),
            other => Err(DppError::InvalidInput(format!("unknown component {other:?} (expected main or all)"))),
        }
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Component::Main => "main",
            Component::All => "all",
        })
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CensusSummary {
    pub total: usize,
    /// Sum of multiplicities.
    pub total_with_multiplicity: usize,
    pub real: usize,
    pub implicit_real: usize,
    pub complex: usize,
    pub positive_definite: usize,
    pub local_max: usize,
    pub global_max: usize,
    pub saddle: usize,
    pub local_min: usize,
    pub degenerate: usize,
    pub with_accidental_zeros: usize,
}

impl CensusSummary {
    pub fn of(points: &[CriticalPoint]) -> Self {
        let mut s = CensusSummary { total: points.len(), ..Default::default() };
        for p in points {
            s.total_with_multiplicity += p.multiplicity;
            s.real += p.flags.is_real as usize;
            s.implicit_real += p.flags.implicit_real as usize;
            s.complex += !p.flags.is_real as usize;
            s.positive_definite += p.flags.is_positive_definite as usize;
            s.global_max += p.flags.is_global_max as usize;
            s.with_accidental_zeros += !p.accidental_zeros.is_empty() as usize;
            match p.flags.kind {
                Some(PointKind::LocalMax) => s.local_max += 1,
                Some(PointKind::Saddle) => s.saddle += 1,
                Some(PointKind::LocalMin) => s.local_min += 1,
                Some(PointKind::Degenerate) => s.degenerate += 1,
                None => {}
            }
        }
        s
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PartitionReport {
    pub partition: String,
    /// Generic count, when every needed ML degree is known.
    pub expected: Option<u64>,
    pub found: usize,
    pub found_with_multiplicity: usize,
    pub real: usize,
    pub positive_definite: usize,
}

impl PartitionReport {
    fn new(partition: &SetPartition, expected: Option<u64>, points: &[CriticalPoint]) -> Self {
        PartitionReport {
            partition: partition.to_string(),
            expected,
            found: points.len(),
            found_with_multiplicity: points.iter().map(|p| p.multiplicity).sum(),
            real: points.iter().filter(|p| p.flags.is_real).count(),
            positive_definite: points.iter().filter(|p| p.flags.is_positive_definite).count(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockRun {
    pub block: String,
    pub run: HomotopyRun,
}

#[derive(Clone, Debug)]
pub struct Census {
    pub n: usize,
    pub component: Component,
    pub data: DataVector,
    pub points: Vec<CriticalPoint>,
    pub summary: CensusSummary,
    pub partitions: Vec<PartitionReport>,
    pub runs: Vec<BlockRun>,
    /// Every partition reached its generic count (when known).
    pub complete: bool,
}

fn compare_points(order: &[SetPartition], a: &CriticalPoint, b: &CriticalPoint) -> Ordering {
    let rank = |p: &CriticalPoint| order.iter().position(|q| *q == p.origin).unwrap_or(usize::MAX);
    rank(a)
        .cmp(&rank(b))
        .then_with(|| match (a.value, b.value) {
            (Some(x), Some(y)) => y.total_cmp(&x),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => Ordering::Equal,
        })
        .then_with(|| {
            a.theta
                .params()
                .iter()
                .zip(b.theta.params())
                .map(|(x, y)| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        })
}

/// Sorts by origin partition (listing order), value descending with
/// complex points last, then entries lexicographically.
pub fn sort_points(points: &mut [CriticalPoint]) -> Result<()> {
    let Some(n) = points.first().map(|p| p.theta.n()) else { return Ok(()) };
    let order = enumerate_set_partitions(n)?;
    points.sort_by(|a, b| compare_points(&order, a, b));
    Ok(())
}

/// Computes the census of critical points of `L_u`.
pub fn solve_census(u: &DataVector, component: Component, opts: &SolverOptions) -> Result<Census> {
    let n = u.n();
    let table = MlDegreeTable::default();
    let (mut points, partitions, runs) = match component {
        Component::Main => {
            let trivial = SetPartition::trivial(n);
            let result = monodromy_solve(u, opts)?;
            let mut points = Vec::with_capacity(result.solutions.len());
            for s in &result.solutions {
                let mut p = classify(&s.theta, u, trivial.clone(), opts)?;
                p.accidental_zeros = accidental_zeros(&p.theta, &trivial);
                points.push(p);
            }
            let report = PartitionReport::new(&trivial, table.get(n).ok(), &points);
            let full = SubsetIndex::from_mask((1u32 << n) - 1);
            (points, vec![report], vec![BlockRun { block: full.label(), run: result.run }])
        }
        Component::All => {
            let solver = MonodromyBlockSolver { opts: opts.clone() };
            let assemblies = assemble_all(u, &solver, opts)?;
            let mut points = Vec::new();
            let mut reports = Vec::new();
            let mut runs: Vec<BlockRun> = Vec::new();
            for a in assemblies {
                reports.push(PartitionReport::new(&a.partition, partition_summand(&a.partition, &table).ok(), &a.points));
                for (block, run) in a.runs {
                    if !runs.iter().any(|r| r.block == block.label()) {
                        runs.push(BlockRun { block: block.label(), run });
                    }
                }
                points.extend(a.points);
            }
            (points, reports, runs)
        }
    };
    mark_global_maxima(&mut points);
    sort_points(&mut points)?;
    let complete = partitions.iter().all(|r| r.expected.is_none_or(|e| r.found_with_multiplicity as u64 >= e));
    Ok(Census {
        n,
        component,
        data: u.clone(),
        summary: CensusSummary::of(&points),
        points,
        partitions,
        runs,
        complete,
    })
}
