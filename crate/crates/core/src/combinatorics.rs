//! Subsets of `[n] = {1, ..., n}` and set partitions of `[n]`.
//!
//! Subsets are stored as bitmasks (bit `i - 1` set iff `i` is a member). All
//! vectors indexed by subsets are stored in mask order internally; the graded
//! order returned by [`canonical_order`] is used for every external listing.

use std::fmt;

use crate::{DppError, Result};

/// A subset of `[n]` encoded as a bitmask.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetIndex(u32);

impl SubsetIndex {
    pub const EMPTY: SubsetIndex = SubsetIndex(0);

    pub fn from_mask(mask: u32) -> Self {
        SubsetIndex(mask)
    }

    /// Builds a subset from 1-based element labels.
    pub fn from_elements(elements: &[usize]) -> Self {
        SubsetIndex(elements.iter().fold(0, |m, &e| m | (1 << (e - 1))))
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Membership of the 1-based element `e`.
    pub fn contains(self, e: usize) -> bool {
        e >= 1 && self.0 & (1 << (e - 1)) != 0
    }

    pub fn is_subset_of(self, other: SubsetIndex) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn intersect(self, other: SubsetIndex) -> SubsetIndex {
        SubsetIndex(self.0 & other.0)
    }

    /// Sorted 1-based elements.
    pub fn elements(self) -> Vec<usize> {
        (0..32).filter(|b| self.0 & (1 << b) != 0).map(|b| b + 1).collect()
    }

    /// Sorted 0-based positions, convenient for matrix indexing.
    pub fn positions(self) -> Vec<usize> {
        (0..32).filter(|b| self.0 & (1 << b) != 0).collect()
    }

    /// Digit-string label, e.g. `"13"`; the empty set is `""`.
    pub fn label(self) -> String {
        self.elements()
            .iter()
            .map(|e| {
                if *e < 10 {
                    e.to_string()
                } else {
                    format!("({e})")
                }
            })
            .collect()
    }

    /// Parses a digit-string label over `[n]`. Accepts `""` and `"∅"` for the empty set.
    pub fn parse(label: &str, n: usize) -> Result<Self> {
        let mut mask = 0u32;
        if label == "∅" {
            return Ok(SubsetIndex::EMPTY);
        }
        for ch in label.chars() {
            let e = ch
                .to_digit(10)
                .ok_or_else(|| DppError::InvalidInput(format!("bad subset label {label:?}")))?
                as usize;
            if e == 0 || e > n {
                return Err(DppError::InvalidInput(format!(
                    "element {e} of {label:?} outside [{n}]"
                )));
            }
            let bit = 1 << (e - 1);
            if mask & bit != 0 {
                return Err(DppError::InvalidInput(format!("repeated element in {label:?}")));
            }
            mask |= bit;
        }
        Ok(SubsetIndex(mask))
    }
}

impl fmt::Display for SubsetIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            f.write_str("∅")
        } else {
            f.write_str(&self.label())
        }
    }
}

fn check_range(n: usize, min: usize, max: usize) -> Result<()> {
    if n < min || n > max {
        Err(DppError::DimensionOutOfRange { n, min, max })
    } else {
        Ok(())
    }
}

/// All subsets of `[n]`, sorted by cardinality and then lexicographically by
/// their sorted elements: `∅, 1, 2, 3, 12, 13, 23, 123` for `n = 3`.
pub fn canonical_order(n: usize) -> Result<Vec<SubsetIndex>> {
    check_range(n, 1, 16)?;
    let mut subsets: Vec<SubsetIndex> = (0..1u32 << n).map(SubsetIndex).collect();
    subsets.sort_by_cached_key(|s| (s.len(), s.elements()));
    Ok(subsets)
}

/// All subsets of `[n]` in mask order (no range check beyond the mask width).
pub(crate) fn all_subsets(n: usize) -> impl Iterator<Item = SubsetIndex> {
    (0..1u32 << n).map(SubsetIndex)
}

/// A set partition of `[n]` with blocks in canonical order (sorted by minimum element).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SetPartition {
    n: usize,
    blocks: Vec<SubsetIndex>,
}

impl SetPartition {
    /// Builds a partition from arbitrary blocks, validating disjointness and coverage.
    pub fn new(n: usize, blocks: Vec<SubsetIndex>) -> Result<Self> {
        let full = (1u32 << n) - 1;
        let mut seen = 0u32;
        for b in &blocks {
            if b.is_empty() {
                return Err(DppError::EmptyBlock);
            }
            if b.mask() & seen != 0 || !b.is_subset_of(SubsetIndex(full)) {
                return Err(DppError::InvalidInput(format!(
                    "blocks do not form a partition of [{n}]"
                )));
            }
            seen |= b.mask();
        }
        if seen != full {
            return Err(DppError::InvalidInput(format!("blocks do not cover [{n}]")));
        }
        let mut blocks = blocks;
        blocks.sort_by_key(|b| b.mask().trailing_zeros());
        Ok(SetPartition { n, blocks })
    }

    /// The one-block partition `{[n]}`.
    pub fn trivial(n: usize) -> Self {
        SetPartition { n, blocks: vec![SubsetIndex((1u32 << n) - 1)] }
    }

    /// The all-singletons partition.
    pub fn singletons(n: usize) -> Self {
        SetPartition { n, blocks: (0..n).map(|i| SubsetIndex(1 << i)).collect() }
    }

    /// Decodes a restricted growth string (`rgs[0] == 0`, `rgs[i] <= 1 + max(rgs[..i])`).
    pub fn from_rgs(rgs: &[usize]) -> Self {
        let k = rgs.iter().max().map_or(0, |m| m + 1);
        let mut blocks = vec![SubsetIndex(0); k];
        for (i, &b) in rgs.iter().enumerate() {
            blocks[b].0 |= 1 << i;
        }
        SetPartition { n: rgs.len(), blocks }
    }

    /// Parses the `"12|3"` syntax.
    pub fn parse(spec: &str, n: usize) -> Result<Self> {
        let blocks = spec
            .split('|')
            .map(|b| {
                let b = b.trim();
                if b.is_empty() {
                    Err(DppError::EmptyBlock)
                } else {
                    SubsetIndex::parse(b, n)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        SetPartition::new(n, blocks)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[SubsetIndex] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn is_trivial(&self) -> bool {
        self.blocks.len() == 1
    }

    /// Index of the block containing the 1-based element `e`.
    pub fn block_of(&self, e: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.contains(e))
    }

    /// Restricted growth string of this partition.
    pub fn rgs(&self) -> Vec<usize> {
        (1..=self.n).map(|e| self.block_of(e).unwrap_or(usize::MAX)).collect()
    }
}

impl fmt::Display for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = self.blocks.iter().map(|b| b.label()).collect();
        f.write_str(&labels.join("|"))
    }
}

/// Every set partition of `[n]`, ordered by number of blocks (descending) and
/// then by restricted growth string. For `n = 3`:
/// `1|2|3, 12|3, 13|2, 1|23, 123`.
pub fn enumerate_set_partitions(n: usize) -> Result<Vec<SetPartition>> {
    check_range(n, 1, 10)?;
    let mut out = Vec::new();
    let mut rgs = vec![0usize; n];
    // prefix maxima: max_before[i] = max(rgs[..i])
    let mut max_before = vec![0usize; n];
    loop {
        out.push(SetPartition::from_rgs(&rgs));
        // next RGS in lexicographic order
        let mut i = n - 1;
        loop {
            if i == 0 {
                out.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.rgs().cmp(&b.rgs())));
                return Ok(out);
            }
            if rgs[i] <= max_before[i] {
                rgs[i] += 1;
                break;
            }
            i -= 1;
        }
        for j in i + 1..n {
            max_before[j] = max_before[j - 1].max(rgs[j - 1]);
            rgs[j] = 0;
        }
    }
}

/// Bell number `B_n` via the Bell triangle.
pub fn bell_number(n: usize) -> Result<u64> {
    if n == 0 {
        return Err(DppError::DimensionOutOfRange { n, min: 1, max: 25 });
    }
    let mut row: Vec<u64> = vec![1];
    for _ in 1..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().expect("row nonempty"));
        for &x in &row {
            let v = next
                .last()
                .expect("row nonempty")
                .checked_add(x)
                .ok_or(DppError::Overflow("Bell number"))?;
            next.push(v);
        }
        row = next;
    }
    Ok(*row.last().expect("row nonempty"))
}
