//! Oracles and fixtures shared by the integration tests. Nothing here calls
//! the library's own determinant or minor code.

#![allow(dead_code)]

use dpp_core::model::{DataVector, SymMatrix};
use dpp_core::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Determinant by cofactor expansion along the first row.
pub fn cofactor_det(m: &[Vec<C64>]) -> C64 {
    let k = m.len();
    if k == 0 {
        return C64::new(1.0, 0.0);
    }
    let mut total = C64::new(0.0, 0.0);
    for col in 0..k {
        let minor: Vec<Vec<C64>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(c, _)| *c != col).map(|(_, z)| *z).collect())
            .collect();
        let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
        total += m[0][col] * sign * cofactor_det(&minor);
    }
    total
}

/// `det Θ_I` for the subset with bit mask `mask`.
pub fn oracle_minor(theta: &SymMatrix, mask: usize) -> C64 {
    let idx: Vec<usize> = (0..theta.n()).filter(|i| mask & (1 << i) != 0).collect();
    let sub: Vec<Vec<C64>> = idx.iter().map(|&i| idx.iter().map(|&j| theta.get(i, j)).collect()).collect();
    cofactor_det(&sub)
}

/// `Σ u_I log det Θ_I - |u| log det(Θ + Id)` from cofactor determinants and
/// principal-branch logarithms.
pub fn oracle_loglike(theta: &SymMatrix, u: &DataVector) -> C64 {
    let n = theta.n();
    let mut shifted = theta.rows();
    for (i, row) in shifted.iter_mut().enumerate() {
        row[i] += 1.0;
    }
    let mut value = C64::new(0.0, 0.0);
    for mask in 0..1usize << n {
        let w = u.values()[mask];
        if w != C64::new(0.0, 0.0) {
            value += w * oracle_minor(theta, mask).ln();
        }
    }
    value - u.total() * cofactor_det(&shifted).ln()
}

/// Random real symmetric matrix with diagonal dominance, so all minors are positive.
pub fn random_pd(r: &mut ChaCha8Rng, n: usize) -> SymMatrix {
    let mut theta = SymMatrix::zeros(n);
    for i in 0..n {
        theta.set(i, i, C64::new(n as f64 + r.random_range(0.5..3.0), 0.0));
        for j in i + 1..n {
            theta.set(i, j, C64::new(r.random_range(-1.0..1.0), 0.0));
        }
    }
    theta
}

pub fn random_complex_matrix(r: &mut ChaCha8Rng, n: usize) -> SymMatrix {
    let mut theta = SymMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            theta.set(i, j, C64::new(r.random_range(-2.0..2.0), r.random_range(-2.0..2.0)));
        }
    }
    theta
}

/// Random positive integer counts in graded order.
pub fn random_counts(r: &mut ChaCha8Rng, n: usize, max: u32) -> DataVector {
    let g: Vec<f64> = (0..1usize << n).map(|_| r.random_range(1..=max) as f64).collect();
    DataVector::from_graded_real(n, &g).unwrap()
}

pub fn graded(n: usize, values: &[f64]) -> DataVector {
    DataVector::from_graded_real(n, values).unwrap()
}

pub fn kernel_minors() -> DataVector {
    graded(3, &[1., 8., 22., 18., 151., 135., 360., 2412.])
}

pub fn symmetric() -> DataVector {
    graded(3, &[1., 5., 5., 5., 5., 5., 5., 1.])
}

pub fn zero_entry() -> DataVector {
    graded(3, &[2., 1., 3., 7., 9., 10., 19., 22.])
}

pub fn real_matrix(n: usize, rows: &[f64]) -> SymMatrix {
    SymMatrix::from_real(n, rows).unwrap()
}

/// Largest entrywise distance between `a` and the closest member of the sign orbit of `b`.
pub fn orbit_distance(a: &SymMatrix, b: &SymMatrix) -> f64 {
    dpp_core::model::sign_orbit(b)
        .iter()
        .map(|m| a.params().iter().zip(m.params()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min)
}

/// Closed-form chart solution for `n = 2`: `θ_11 = u_1/u_∅`, `θ_22 = u_2/u_∅`,
/// `x_12 = (u_1 u_2 - u_∅ u_12)/u_∅²`.
pub fn n2_closed_form(u: &DataVector) -> [C64; 3] {
    let v = u.values();
    let (e, a, b, ab) = (v[0], v[1], v[2], v[3]);
    [a / e, b / e, (a * b - e * ab) / (e * e)]
}

pub fn data_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}
