//! The DPP model: principal minors, partition function, both forms of the
//! log-likelihood and its first and second derivatives.
//!
//! Matrix parameters are ordered diagonal first, then off-diagonal pairs
//! `(i, j)`, `i < j`, lexicographically. This order is shared by
//! [`SymMatrix::params`], the gradient and the Hessian.

use nalgebra::DMatrix;

use crate::combinatorics::{all_subsets, SubsetIndex};
use crate::linalg::CMatrix;
use crate::{DppError, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Number of free entries of a symmetric `n x n` matrix.
pub fn num_params(n: usize) -> usize {
    n * (n + 1) / 2
}

/// `(row, col)` of each parameter, 0-based, in parameter order.
pub fn param_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
    for i in 0..n {
        for j in i + 1..n {
            pairs.push((i, j));
        }
    }
    pairs
}

/// Parameter index of entry `(i, j)` (0-based, either order).
pub fn param_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    if i == j {
        i
    } else {
        // pairs (a, b) with a < i come first: sum_{a<i} (n - 1 - a)
        n + i * (2 * n - i - 1) / 2 + (j - i - 1)
    }
}

/// Symmetric `n x n` matrix with complex entries, stored by its free parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    n: usize,
    params: Vec<C64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix { n, params: vec![ZERO; num_params(n)] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.params[i] = ONE;
        }
        m
    }

    pub fn from_params(n: usize, params: Vec<C64>) -> Result<Self> {
        if n == 0 || params.len() != num_params(n) {
            return Err(DppError::InvalidInput(format!(
                "expected {} parameters for n = {n}, got {}",
                num_params(n),
                params.len()
            )));
        }
        Ok(SymMatrix { n, params })
    }

    /// Builds a matrix from full rows, checking symmetry to relative tolerance `tol`.
    #[allow(clippy::needless_range_loop)]
    pub fn from_rows(rows: &[Vec<C64>], tol: f64) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(DppError::InvalidInput("matrix must be square and nonempty".into()));
        }
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                let (a, b) = (rows[i][j], rows[j][i]);
                if (a - b).norm() > tol * (1.0 + a.norm().max(b.norm())) {
                    return Err(DppError::InvalidInput(format!(
                        "matrix is not symmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
                m.set(i, j, (a + b) * 0.5);
            }
        }
        Ok(m)
    }

    /// Builds a real matrix from row-major entries.
    pub fn from_real(n: usize, row_major: &[f64]) -> Result<Self> {
        if row_major.len() != n * n {
            return Err(DppError::InvalidInput(format!("expected {} entries", n * n)));
        }
        let rows: Vec<Vec<C64>> = row_major
            .chunks(n)
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows, 1e-12)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn params(&self) -> &[C64] {
        &self.params
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.params[param_index(self.n, i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        let k = param_index(self.n, i, j);
        self.params[k] = v;
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j)).collect()).collect()
    }

    pub fn to_dmatrix(&self) -> CMatrix {
        CMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// Principal submatrix on the (0-based) positions of `subset`.
    pub fn submatrix(&self, subset: SubsetIndex) -> CMatrix {
        let pos = subset.positions();
        CMatrix::from_fn(pos.len(), pos.len(), |a, b| self.get(pos[a], pos[b]))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.params.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn max_imag(&self) -> f64 {
        self.params.iter().fold(0.0, |m, z| m.max(z.im.abs()))
    }

    /// Whether all imaginary parts are below `tol * (1 + max |entry|)`.
    pub fn is_real(&self, tol: f64) -> bool {
        self.max_imag() <= tol * (1.0 + self.max_abs())
    }

    /// Drops imaginary parts.
    pub fn real_projection(&self) -> SymMatrix {
        SymMatrix { n: self.n, params: self.params.iter().map(|z| C64::new(z.re, 0.0)).collect() }
    }

    pub fn real_part(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j).re)
    }

    /// `D Θ D` for the diagonal sign matrix `D = diag(signs)`.
    pub fn conjugate_by_signs(&self, signs: &[f64]) -> SymMatrix {
        let mut m = self.clone();
        for (k, (i, j)) in param_pairs(self.n).into_iter().enumerate() {
            m.params[k] = self.params[k] * (signs[i] * signs[j]);
        }
        m
    }
}

/// A data vector `u`, one (possibly complex) count per subset of `[n]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DataVector {
    n: usize,
    values: Vec<C64>,
    total: C64,
}

impl DataVector {
    /// Builds from values in mask order.
    pub fn from_mask_order(n: usize, values: Vec<C64>) -> Result<Self> {
        if n == 0 || n > 16 || values.len() != 1 << n {
            return Err(DppError::InvalidInput(format!(
                "data vector for n = {n} needs {} entries, got {}",
                1usize.checked_shl(n as u32).unwrap_or(0),
                values.len()
            )));
        }
        let total = values.iter().sum();
        Ok(DataVector { n, values, total })
    }

    /// Builds from values listed in graded order (`∅, 1, 2, ..., 12, ...`).
    pub fn from_graded(n: usize, graded: &[C64]) -> Result<Self> {
        let order = crate::combinatorics::canonical_order(n)?;
        if graded.len() != order.len() {
            return Err(DppError::InvalidInput(format!(
                "data vector for n = {n} needs {} entries, got {}",
                order.len(),
                graded.len()
            )));
        }
        let mut values = vec![ZERO; order.len()];
        for (s, &v) in order.iter().zip(graded) {
            values[s.index()] = v;
        }
        Self::from_mask_order(n, values)
    }

    pub fn from_graded_real(n: usize, graded: &[f64]) -> Result<Self> {
        let g: Vec<C64> = graded.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_graded(n, &g)
    }

    /// The indicator vector of one subset.
    pub fn unit(n: usize, subset: SubsetIndex) -> Self {
        let mut values = vec![ZERO; 1 << n];
        values[subset.index()] = ONE;
        DataVector { n, values, total: ONE }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, s: SubsetIndex) -> C64 {
        self.values[s.index()]
    }

    /// Values in mask order.
    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// Sample size `|u| = Σ u_I`.
    pub fn total(&self) -> C64 {
        self.total
    }

    /// `Σ |u_I|`, used to make residuals scale-free.
    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).sum()
    }

    pub fn graded(&self) -> Vec<C64> {
        crate::combinatorics::canonical_order(self.n)
            .expect("dimension validated on construction")
            .iter()
            .map(|s| self.values[s.index()])
            .collect()
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|z| z.im == 0.0)
    }

    pub fn scaled(&self, f: C64) -> DataVector {
        DataVector {
            n: self.n,
            values: self.values.iter().map(|v| v * f).collect(),
            total: self.total * f,
        }
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: C64, other: &DataVector, b: C64) -> DataVector {
        let values: Vec<C64> = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        let total = values.iter().sum();
        DataVector { n: self.n, values, total }
    }
}

/// Unnormalized principal minors `det(Θ_I)`, in mask order; homogeneous
/// coordinates of a point in projective space.
#[derive(Clone, Debug, PartialEq)]
pub struct MinorVector {
    n: usize,
    values: Vec<C64>,
}

impl MinorVector {
    pub fn new(n: usize, values: Vec<C64>) -> Result<Self> {
        if n == 0 || n > 16 || values.len() != 1 << n {
            return Err(DppError::InvalidInput(format!("minor vector for n = {n} has wrong length")));
        }
        Ok(MinorVector { n, values })
    }

    pub fn from_graded(n: usize, graded: &[C64]) -> Result<Self> {
        let d = DataVector::from_graded(n, graded)?;
        Ok(MinorVector { n, values: d.values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, s: SubsetIndex) -> C64 {
        self.values[s.index()]
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn graded(&self) -> Vec<C64> {
        crate::combinatorics::canonical_order(self.n)
            .expect("dimension validated on construction")
            .iter()
            .map(|s| self.values[s.index()])
            .collect()
    }

    pub fn scaled(&self, f: C64) -> MinorVector {
        MinorVector { n: self.n, values: self.values.iter().map(|v| v * f).collect() }
    }
}

fn det(m: CMatrix) -> C64 {
    if m.nrows() == 0 {
        ONE
    } else {
        m.lu().determinant()
    }
}

/// All `2^n` principal minors of `theta`; the empty minor is 1.
pub fn principal_minors(theta: &SymMatrix) -> MinorVector {
    let values = all_subsets(theta.n).map(|s| det(theta.submatrix(s))).collect();
    MinorVector { n: theta.n, values }
}

/// `Z = det(Θ + Id)`.
pub fn partition_function(theta: &SymMatrix) -> C64 {
    det(theta.to_dmatrix() + CMatrix::identity(theta.n, theta.n))
}

fn check_dims(theta_n: usize, u: &DataVector) -> Result<()> {
    if theta_n != u.n {
        return Err(DppError::InvalidInput(format!(
            "matrix has n = {theta_n} but data has n = {}",
            u.n
        )));
    }
    Ok(())
}

fn real_positive(z: C64) -> bool {
    z.re > 0.0 && z.im.abs() <= 1e-12 * z.norm()
}

/// Parametric log-likelihood on the real branch:
/// `Σ u_I log det(Θ_I) - |u| log det(Θ + Id)`. Terms with `u_I = 0` are skipped.
pub fn loglike_parametric(theta: &SymMatrix, u: &DataVector) -> Result<f64> {
    check_dims(theta.n, u)?;
    if !u.is_real() {
        return Err(DppError::InvalidInput("real log-likelihood needs real data".into()));
    }
    let minors = principal_minors(theta);
    let z = partition_function(theta);
    let mut value = 0.0;
    for s in all_subsets(theta.n) {
        let w = u.get(s).re;
        if w == 0.0 {
            continue;
        }
        let m = minors.get(s);
        if !real_positive(m) {
            return Err(DppError::NonpositiveMinor { subset: s.to_string() });
        }
        value += w * m.re.ln();
    }
    if !real_positive(z) {
        return Err(DppError::NonpositiveMinor { subset: "Z".into() });
    }
    Ok(value - u.total().re * z.re.ln())
}

/// Parametric log-likelihood with principal-branch complex logarithms.
pub fn loglike_parametric_complex(theta: &SymMatrix, u: &DataVector) -> Result<C64> {
    check_dims(theta.n, u)?;
    let minors = principal_minors(theta);
    let z = partition_function(theta);
    let mut value = ZERO;
    for s in all_subsets(theta.n) {
        let w = u.get(s);
        if w == ZERO {
            continue;
        }
        let m = minors.get(s);
        if m == ZERO {
            return Err(DppError::ZeroMinor { subset: s.to_string() });
        }
        value += w * m.ln();
    }
    if z == ZERO {
        return Err(DppError::ZeroMinor { subset: "Z".into() });
    }
    Ok(value - u.total() * z.ln())
}

/// Implicit log-likelihood `Σ u_I log p_I - |u| log Σ p_I` on the real branch.
/// Invariant under `p -> λ p` for `λ > 0`.
pub fn loglike_implicit(p: &MinorVector, u: &DataVector) -> Result<f64> {
    if p.n != u.n {
        return Err(DppError::InvalidInput("minor and data dimensions differ".into()));
    }
    if !u.is_real() {
        return Err(DppError::InvalidInput("real log-likelihood needs real data".into()));
    }
    let sum: C64 = p.values.iter().sum();
    if sum == ZERO {
        return Err(DppError::ZeroSum);
    }
    if !real_positive(sum) {
        return Err(DppError::InvalidInput("coordinate sum is not positive".into()));
    }
    let mut value = 0.0;
    for s in all_subsets(p.n) {
        let w = u.get(s).re;
        if w == 0.0 {
            continue;
        }
        let c = p.get(s);
        if c == ZERO {
            return Err(DppError::ZeroCoordinate { subset: s.to_string() });
        }
        if !real_positive(c) {
            return Err(DppError::NonpositiveMinor { subset: s.to_string() });
        }
        value += w * c.re.ln();
    }
    Ok(value - u.total().re * sum.re.ln())
}

/// Implicit log-likelihood with principal-branch complex logarithms.
pub fn loglike_implicit_complex(p: &MinorVector, u: &DataVector) -> Result<C64> {
    if p.n != u.n {
        return Err(DppError::InvalidInput("minor and data dimensions differ".into()));
    }
    let sum: C64 = p.values.iter().sum();
    if sum == ZERO {
        return Err(DppError::ZeroSum);
    }
    let mut value = ZERO;
    for s in all_subsets(p.n) {
        let w = u.get(s);
        if w == ZERO {
            continue;
        }
        let c = p.get(s);
        if c == ZERO {
            return Err(DppError::ZeroCoordinate { subset: s.to_string() });
        }
        value += w * c.ln();
    }
    Ok(value - u.total() * sum.ln())
}

/// Inverses of every needed principal submatrix and of `Θ + Id`, from which
/// gradients and Hessians of `Σ w_I log det(Θ_I) - |w| log Z` follow for any
/// weight vector `w`.
pub(crate) struct LogDetCache {
    n: usize,
    /// Per subset (mask order): global parameter index of each local pair, and `Θ_I^{-1}`.
    blocks: Vec<Option<BlockInverse>>,
    z: BlockInverse,
}

struct BlockInverse {
    /// `(local a, local b, global parameter)` for local `a <= b`.
    pairs: Vec<(usize, usize, usize)>,
    inv: CMatrix,
}

impl BlockInverse {
    fn new(n: usize, positions: &[usize], m: CMatrix) -> Option<Self> {
        let k = positions.len();
        let lu = m.lu();
        let inv = lu.solve(&CMatrix::identity(k, k))?;
        if inv.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return None;
        }
        let mut pairs = Vec::with_capacity(k * (k + 1) / 2);
        for a in 0..k {
            for b in a..k {
                pairs.push((a, b, param_index(n, positions[a], positions[b])));
            }
        }
        Some(BlockInverse { pairs, inv })
    }

    fn add_gradient(&self, w: C64, out: &mut [C64]) {
        for &(a, b, k) in &self.pairs {
            let c = if a == b { 1.0 } else { 2.0 };
            out[k] += w * self.inv[(a, b)] * c;
        }
    }

    /// Adds `-w * tr(B E_β B E_α)` for all parameter pairs inside this block.
    fn add_hessian(&self, w: C64, out: &mut CMatrix) {
        let b = &self.inv;
        for &(a1, b1, k1) in &self.pairs {
            for &(a2, b2, k2) in &self.pairs {
                if k2 < k1 {
                    continue;
                }
                let alpha: &[(usize, usize)] = if a1 == b1 { &[(a1, a1)] } else { &[(a1, b1), (b1, a1)] };
                let beta: &[(usize, usize)] = if a2 == b2 { &[(a2, a2)] } else { &[(a2, b2), (b2, a2)] };
                let mut t = ZERO;
                for &(p, q) in alpha {
                    for &(r, s) in beta {
                        t += b[(q, r)] * b[(s, p)];
                    }
                }
                out[(k1, k2)] -= w * t;
                if k1 != k2 {
                    out[(k2, k1)] -= w * t;
                }
            }
        }
    }
}

impl LogDetCache {
    /// Inverts `Θ_I` for every nonempty `I` with `needed(I)`, and `Θ + Id`.
    pub(crate) fn new(theta: &SymMatrix, needed: impl Fn(SubsetIndex) -> bool) -> Result<Self> {
        let n = theta.n;
        let mut blocks = Vec::with_capacity(1 << n);
        for s in all_subsets(n) {
            if s.is_empty() || !needed(s) {
                blocks.push(None);
                continue;
            }
            let pos = s.positions();
            let inv = BlockInverse::new(n, &pos, theta.submatrix(s))
                .ok_or_else(|| DppError::SingularMinor { subset: s.to_string() })?;
            blocks.push(Some(inv));
        }
        let all: Vec<usize> = (0..n).collect();
        let z = BlockInverse::new(n, &all, theta.to_dmatrix() + CMatrix::identity(n, n))
            .ok_or_else(|| DppError::SingularMinor { subset: "Θ+Id".into() })?;
        Ok(LogDetCache { n, blocks, z })
    }

    /// Cache covering every subset.
    pub(crate) fn full(theta: &SymMatrix) -> Result<Self> {
        Self::new(theta, |_| true)
    }

    /// Cache covering the support of `u`.
    pub(crate) fn for_data(theta: &SymMatrix, u: &DataVector) -> Result<Self> {
        Self::new(theta, |s| u.get(s) != ZERO)
    }

    pub(crate) fn gradient(&self, u: &DataVector) -> Result<Vec<C64>> {
        let mut g = vec![ZERO; num_params(self.n)];
        for (mask, block) in self.blocks.iter().enumerate() {
            let w = u.values[mask];
            if w == ZERO || mask == 0 {
                continue;
            }
            let block = block.as_ref().ok_or_else(|| DppError::SingularMinor {
                subset: SubsetIndex::from_mask(mask as u32).to_string(),
            })?;
            block.add_gradient(w, &mut g);
        }
        self.z.add_gradient(-u.total(), &mut g);
        Ok(g)
    }

    pub(crate) fn hessian(&self, u: &DataVector) -> Result<CMatrix> {
        let m = num_params(self.n);
        let mut h = CMatrix::zeros(m, m);
        for (mask, block) in self.blocks.iter().enumerate() {
            let w = u.values[mask];
            if w == ZERO || mask == 0 {
                continue;
            }
            let block = block.as_ref().ok_or_else(|| DppError::SingularMinor {
                subset: SubsetIndex::from_mask(mask as u32).to_string(),
            })?;
            block.add_hessian(w, &mut h);
        }
        self.z.add_hessian(-u.total(), &mut h);
        Ok(h)
    }
}

/// Partial derivatives `∂L/∂θ_ij` of the parametric log-likelihood, returned
/// as a symmetric matrix of partials (entry `(i, j)` is the derivative with
/// respect to the shared parameter `θ_ij = θ_ji`).
pub fn gradient(theta: &SymMatrix, u: &DataVector) -> Result<SymMatrix> {
    check_dims(theta.n, u)?;
    let cache = LogDetCache::for_data(theta, u)?;
    SymMatrix::from_params(theta.n, cache.gradient(u)?)
}

/// Hessian of the parametric log-likelihood in parameter order.
pub fn hessian(theta: &SymMatrix, u: &DataVector) -> Result<DMatrix<C64>> {
    check_dims(theta.n, u)?;
    let cache = LogDetCache::for_data(theta, u)?;
    cache.hessian(u)
}

/// The matrices `D Θ D` over diagonal sign matrices `D` modulo `D ~ -D`, with
/// exact duplicates removed. The first element is `Θ` itself.
pub fn sign_orbit(theta: &SymMatrix) -> Vec<SymMatrix> {
    let n = theta.n;
    let mut out: Vec<SymMatrix> = Vec::with_capacity(1 << (n - 1));
    for bits in 0..1u32 << (n - 1) {
        let signs: Vec<f64> = (0..n)
            .map(|i| if i > 0 && bits & (1 << (i - 1)) != 0 { -1.0 } else { 1.0 })
            .collect();
        let m = theta.conjugate_by_signs(&signs);
        if !out.contains(&m) {
            out.push(m);
        }
    }
    out
}
