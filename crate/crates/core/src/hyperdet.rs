//! Implicit checks for `n = 3`: the 2x2x2 hyperdeterminant, its gradient, the
//! 3x8 criticality matrix and flattening ranks.
//!
//! A tensor entry `p_ijk` is the coordinate of the subset containing element 1
//! iff `i = 1`, element 2 iff `j = 1` and element 3 iff `k = 1`, so it shares
//! mask indexing with [`MinorVector`](crate::model::MinorVector).

use serde::Serialize;

use crate::linalg::{numerical_rank, singular_values, CMatrix};
use crate::model::{DataVector, MinorVector};
use crate::{DppError, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Mask index of the binary string `ijk`.
const fn idx(i: usize, j: usize, k: usize) -> usize {
    i | (j << 1) | (k << 2)
}

/// The quartic, term by term: coefficient and the four (mask) indices multiplied.
const TERMS: [(f64, [usize; 4]); 12] = [
    (1.0, [idx(0, 0, 0), idx(0, 0, 0), idx(1, 1, 1), idx(1, 1, 1)]),
    (1.0, [idx(0, 0, 1), idx(0, 0, 1), idx(1, 1, 0), idx(1, 1, 0)]),
    (1.0, [idx(0, 1, 1), idx(0, 1, 1), idx(1, 0, 0), idx(1, 0, 0)]),
    (1.0, [idx(0, 1, 0), idx(0, 1, 0), idx(1, 0, 1), idx(1, 0, 1)]),
    (4.0, [idx(0, 0, 0), idx(0, 1, 1), idx(1, 0, 1), idx(1, 1, 0)]),
    (4.0, [idx(0, 0, 1), idx(0, 1, 0), idx(1, 0, 0), idx(1, 1, 1)]),
    (-2.0, [idx(0, 0, 0), idx(0, 0, 1), idx(1, 1, 0), idx(1, 1, 1)]),
    (-2.0, [idx(0, 0, 0), idx(0, 1, 0), idx(1, 0, 1), idx(1, 1, 1)]),
    (-2.0, [idx(0, 0, 0), idx(0, 1, 1), idx(1, 0, 0), idx(1, 1, 1)]),
    (-2.0, [idx(0, 0, 1), idx(0, 1, 0), idx(1, 0, 1), idx(1, 1, 0)]),
    (-2.0, [idx(0, 0, 1), idx(0, 1, 1), idx(1, 0, 0), idx(1, 1, 0)]),
    (-2.0, [idx(0, 1, 0), idx(0, 1, 1), idx(1, 0, 0), idx(1, 0, 1)]),
];

/// A 2x2x2 tensor in mask order.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor222 {
    entries: [C64; 8],
}

impl Tensor222 {
    pub fn new(entries: [C64; 8]) -> Self {
        Tensor222 { entries }
    }

    /// Entries listed as `p_000, p_100, p_010, p_001, p_110, p_101, p_011, p_111`
    /// (the graded subset order).
    pub fn from_graded(graded: &[C64]) -> Result<Self> {
        let m = MinorVector::from_graded(3, graded)?;
        Ok(Self::from(&m))
    }

    pub fn from_real_graded(graded: &[f64]) -> Result<Self> {
        let g: Vec<C64> = graded.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_graded(&g)
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> C64 {
        self.entries[idx(i, j, k)]
    }

    pub fn entries(&self) -> &[C64; 8] {
        &self.entries
    }

    /// Relabels the tensor axes: new axis `a` is old axis `perm[a]`.
    pub fn permute_axes(&self, perm: [usize; 3]) -> Tensor222 {
        let mut out = [ZERO; 8];
        for (mask, slot) in out.iter_mut().enumerate() {
            let bits = [mask & 1, (mask >> 1) & 1, (mask >> 2) & 1];
            let mut old = [0usize; 3];
            for a in 0..3 {
                old[perm[a]] = bits[a];
            }
            *slot = self.entries[idx(old[0], old[1], old[2])];
        }
        Tensor222 { entries: out }
    }

    /// The `2 x 4` flattening along `axis` (0, 1 or 2).
    pub fn flattening(&self, axis: usize) -> CMatrix {
        let mut m = CMatrix::zeros(2, 4);
        for mask in 0..8 {
            let row = (mask >> axis) & 1;
            let others: Vec<usize> = (0..3).filter(|&a| a != axis).map(|a| (mask >> a) & 1).collect();
            m[(row, others[0] | (others[1] << 1))] = self.entries[mask];
        }
        m
    }
}

impl From<&MinorVector> for Tensor222 {
    fn from(p: &MinorVector) -> Self {
        let mut entries = [ZERO; 8];
        entries.copy_from_slice(&p.values()[..8]);
        Tensor222 { entries }
    }
}

/// The hyperdeterminant `Det(p)`.
pub fn hyperdet(p: &Tensor222) -> C64 {
    TERMS
        .iter()
        .map(|(c, ix)| ix.iter().fold(C64::new(*c, 0.0), |acc, &i| acc * p.entries[i]))
        .sum()
}

/// `∂Det/∂p_I` for all eight coordinates, in mask order.
pub fn hyperdet_gradient(p: &Tensor222) -> [C64; 8] {
    let mut g = [ZERO; 8];
    for (c, ix) in TERMS.iter() {
        for drop in 0..4 {
            let partial = ix
                .iter()
                .enumerate()
                .filter(|(pos, _)| *pos != drop)
                .fold(C64::new(*c, 0.0), |acc, (_, &i)| acc * p.entries[i]);
            g[ix[drop]] += partial;
        }
    }
    g
}

/// Sum of absolute values of the twelve monomials; the natural scale for `Det`.
pub fn hyperdet_scale(p: &Tensor222) -> f64 {
    TERMS
        .iter()
        .map(|(c, ix)| c.abs() * ix.iter().map(|&i| p.entries[i].norm()).product::<f64>())
        .sum()
}

#[derive(Clone, Debug, Serialize)]
pub struct RankReport {
    /// Rows `u`, `p`, `p ∘ ∇Det`, each scaled to unit norm (mask order).
    #[serde(skip)]
    pub matrix: CMatrix,
    pub singular_values: Vec<f64>,
    pub rank: usize,
}

/// Relative singular-value threshold used for numerical ranks.
pub const RANK_TOL: f64 = 1e-10;

/// The 3x8 matrix whose rank drops to at most 2 at critical points of the
/// implicit likelihood on the hyperdeterminant hypersurface. Each row is
/// normalized before the singular values are taken.
pub fn critical_rank_matrix(p: &Tensor222, u: &DataVector) -> Result<RankReport> {
    if u.n() != 3 {
        return Err(DppError::InvalidInput("rank condition is defined for n = 3".into()));
    }
    let grad = hyperdet_gradient(p);
    let rows: [Vec<C64>; 3] = [
        u.values().to_vec(),
        p.entries.to_vec(),
        (0..8).map(|i| p.entries[i] * grad[i]).collect(),
    ];
    let mut m = CMatrix::zeros(3, 8);
    for (r, row) in rows.iter().enumerate() {
        let norm = row.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let f = if norm > 0.0 { 1.0 / norm } else { 1.0 };
        for (c, z) in row.iter().enumerate() {
            m[(r, c)] = z * f;
        }
    }
    let s = singular_values(&m);
    let rank = numerical_rank(&s, RANK_TOL);
    Ok(RankReport { matrix: m, singular_values: s, rank })
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct AdmissibilityReport {
    /// Graded labels of vanishing coordinates.
    pub zero_coordinates: Vec<String>,
    pub zero_sum: bool,
    /// Numerical rank of each of the three 2x4 flattenings.
    pub flattening_ranks: [usize; 3],
    /// No zero coordinate and nonzero sum.
    pub admissible: bool,
}

/// Support and flattening-rank screen.
pub fn support_and_singularity_screen(p: &Tensor222) -> AdmissibilityReport {
    let scale = p.entries.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let tiny = 1e-14 * scale.max(f64::MIN_POSITIVE);
    let zero_coordinates: Vec<String> = crate::combinatorics::canonical_order(3)
        .expect("n = 3 in range")
        .into_iter()
        .filter(|s| p.entries[s.index()].norm() <= tiny)
        .map(|s| s.to_string())
        .collect();
    let sum: C64 = p.entries.iter().sum();
    let zero_sum = sum.norm() <= tiny;
    let mut flattening_ranks = [0; 3];
    for (axis, r) in flattening_ranks.iter_mut().enumerate() {
        *r = numerical_rank(&singular_values(&p.flattening(axis)), RANK_TOL);
    }
    AdmissibilityReport {
        admissible: zero_coordinates.is_empty() && !zero_sum,
        zero_coordinates,
        zero_sum,
        flattening_ranks,
    }
}
