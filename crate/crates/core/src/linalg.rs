//! Small dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::C64;

pub(crate) type CMatrix = DMatrix<C64>;
pub(crate) type CVector = DVector<C64>;

/// Max-norm of a complex vector.
pub(crate) fn max_abs(v: &[C64]) -> f64 {
    v.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Max over components of `|a_k - b_k| / (1 + max(|a_k|, |b_k|))`.
pub(crate) fn rel_distance(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm() / (1.0 + x.norm().max(y.norm())))
        .fold(0.0, f64::max)
}

/// Weighted max-norm `max_k |d_k| / (1 + |y_k|)` used for step control.
pub(crate) fn weighted_norm(d: &CVector, y: &CVector) -> f64 {
    d.iter()
        .zip(y.iter())
        .map(|(a, b)| a.norm() / (1.0 + b.norm()))
        .fold(0.0, f64::max)
}

/// Solves `a x = b` by LU with partial pivoting; `None` when `a` is numerically singular.
pub(crate) fn solve(a: &CMatrix, b: &CVector) -> Option<CVector> {
    let lu = a.clone().lu();
    let x = lu.solve(b)?;
    if x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Some(x)
    } else {
        None
    }
}

/// Singular values in descending order.
pub(crate) fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// `J diag(1 + |y_k|)` with each row scaled to unit max-norm; removes the
/// coordinate and equation scalings that make raw condition numbers meaningless.
pub(crate) fn equilibrate(j: &CMatrix, y: &CVector) -> CMatrix {
    let mut m = j.clone();
    for (k, mut col) in m.column_iter_mut().enumerate() {
        col *= C64::new(1.0 + y[k].norm(), 0.0);
    }
    for mut row in m.row_iter_mut() {
        let s = row.iter().fold(0.0f64, |a, z| a.max(z.norm()));
        if s > 0.0 {
            row /= C64::new(s, 0.0);
        }
    }
    m
}

/// Reciprocal condition number `σ_min / σ_max` (0 for an empty or zero matrix).
pub(crate) fn inverse_condition(a: &CMatrix) -> f64 {
    let s = singular_values(a);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if hi > 0.0 && lo.is_finite() => lo / hi,
        _ => 0.0,
    }
}

/// Numerical rank: number of singular values above `rel_tol` times the largest.
pub(crate) fn numerical_rank(singular: &[f64], rel_tol: f64) -> usize {
    match singular.first() {
        Some(&s0) if s0 > 0.0 => singular.iter().filter(|&&s| s > rel_tol * s0).count(),
        _ => 0,
    }
}

/// Basis of the right kernel of a wide matrix via reduced row echelon form
/// with partial pivoting.
pub(crate) fn kernel_basis(a: &CMatrix, rel_tol: f64) -> Vec<CVector> {
    let (rows, cols) = a.shape();
    let mut m = a.clone();
    let scale = m.iter().fold(0.0f64, |s, z| s.max(z.norm())).max(f64::MIN_POSITIVE);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (best, val) = (r..rows)
            .map(|i| (i, m[(i, c)].norm()))
            .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if val <= rel_tol * scale {
            continue;
        }
        m.swap_rows(r, best);
        let p = m[(r, c)];
        for j in 0..cols {
            m[(r, j)] /= p;
        }
        for i in 0..rows {
            if i != r {
                let f = m[(i, c)];
                if f != C64::new(0.0, 0.0) {
                    for j in 0..cols {
                        let v = m[(r, j)];
                        m[(i, j)] -= f * v;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = CVector::zeros(cols);
            v[f] = C64::new(1.0, 0.0);
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[(row, f)];
            }
            v
        })
        .collect()
}
