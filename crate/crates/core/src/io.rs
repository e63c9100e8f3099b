//! JSON input and output.
//!
//! Matrix files look like `{"n": 3, "entries": [[8, 5, 3], [5, 22, 6], [3, 6, 18]]}`.
//! Data files give either `"u_graded"` (values in graded subset order) or
//! `"u"`, a map from subset labels such as `""`, `"1"`, `"13"` to values;
//! missing subsets count as zero. Any scalar may be a number or a
//! `[re, im]` pair. Complex output is always written as `[re, im]`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::census::Census;
use crate::combinatorics::SubsetIndex;
use crate::model::{DataVector, MinorVector, SymMatrix};
use crate::solver::CriticalPoint;
use crate::{DppError, Result, C64};

/// Entries of an input matrix must agree with their transposes to this
/// relative tolerance.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(untagged)]
enum Scalar {
    Real(f64),
    Complex([f64; 2]),
}

impl From<Scalar> for C64 {
    fn from(s: Scalar) -> C64 {
        match s {
            Scalar::Real(x) => C64::new(x, 0.0),
            Scalar::Complex([re, im]) => C64::new(re, im),
        }
    }
}

#[derive(Deserialize)]
struct MatrixFile {
    n: Option<usize>,
    entries: Vec<Vec<Scalar>>,
}

#[derive(Deserialize)]
struct DataFile {
    n: usize,
    u: Option<BTreeMap<String, Scalar>>,
    u_graded: Option<Vec<Scalar>>,
}

pub fn c64_json(z: C64) -> Value {
    json!([z.re, z.im])
}

fn matrix_from_file(m: MatrixFile) -> Result<SymMatrix> {
    let rows: Vec<Vec<C64>> = m.entries.into_iter().map(|r| r.into_iter().map(C64::from).collect()).collect();
    if let Some(n) = m.n.filter(|&n| n != rows.len()) {
        return Err(DppError::InvalidInput(format!("matrix has {} rows but n = {n}", rows.len())));
    }
    SymMatrix::from_rows(&rows, SYMMETRY_TOL)
}

/// Parses a matrix file.
pub fn parse_matrix(text: &str) -> Result<SymMatrix> {
    matrix_from_file(serde_json::from_str(text)?)
}

/// Parses one or more matrices: a matrix file, a single emitted critical
/// point, or a census (every entry of `"points"`).
pub fn parse_matrices(text: &str) -> Result<Vec<SymMatrix>> {
    let value: Value = serde_json::from_str(text)?;
    match value.get("points") {
        Some(Value::Array(points)) => points
            .iter()
            .map(|p| matrix_from_file(serde_json::from_value(p.clone())?))
            .collect(),
        Some(_) => Err(DppError::InvalidInput("\"points\" must be an array".into())),
        None => Ok(vec![matrix_from_file(serde_json::from_value(value)?)?]),
    }
}

/// Parses a data file.
pub fn parse_data(text: &str) -> Result<DataVector> {
    let f: DataFile = serde_json::from_str(text)?;
    match (f.u, f.u_graded) {
        (Some(map), None) => {
            let mut values = vec![C64::new(0.0, 0.0); 1usize.checked_shl(f.n as u32).unwrap_or(0)];
            if values.is_empty() || f.n > 16 {
                return Err(DppError::DimensionOutOfRange { n: f.n, min: 1, max: 16 });
            }
            for (label, v) in map {
                values[SubsetIndex::parse(&label, f.n)?.index()] = v.into();
            }
            DataVector::from_mask_order(f.n, values)
        }
        (None, Some(graded)) => {
            let g: Vec<C64> = graded.into_iter().map(C64::from).collect();
            DataVector::from_graded(f.n, &g)
        }
        _ => Err(DppError::InvalidInput("data file needs exactly one of \"u\" and \"u_graded\"".into())),
    }
}

pub fn read_file(path: &std::path::Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

pub fn matrix_json(theta: &SymMatrix) -> Value {
    let entries: Vec<Vec<Value>> = theta.rows().into_iter().map(|r| r.into_iter().map(c64_json).collect()).collect();
    json!({ "n": theta.n(), "entries": entries })
}

pub fn graded_json(values: &[C64]) -> Vec<Value> {
    values.iter().copied().map(c64_json).collect()
}

pub fn data_json(u: &DataVector) -> Value {
    json!({ "n": u.n(), "u_graded": graded_json(&u.graded()) })
}

pub fn minors_json(p: &MinorVector) -> Value {
    json!({ "n": p.n(), "p_graded": graded_json(&p.graded()) })
}

#[derive(Serialize)]
struct PointOut<'a> {
    n: usize,
    entries: Vec<Vec<Value>>,
    residual: f64,
    value: Option<f64>,
    flags: &'a crate::solver::PointFlags,
    origin: String,
    orbit_size: usize,
    multiplicity: usize,
    accidental_zeros: &'a [(usize, usize)],
}

/// A critical point; the `n` and `entries` fields make it a valid matrix file.
pub fn point_json(p: &CriticalPoint) -> Value {
    let out = PointOut {
        n: p.theta.n(),
        entries: p.theta.rows().into_iter().map(|r| r.into_iter().map(c64_json).collect()).collect(),
        residual: p.residual,
        value: p.value,
        flags: &p.flags,
        origin: p.origin.to_string(),
        orbit_size: p.orbit_size,
        multiplicity: p.multiplicity,
        accidental_zeros: &p.accidental_zeros,
    };
    serde_json::to_value(out).expect("serializable")
}

pub fn census_json(c: &Census) -> Value {
    json!({
        "n": c.n,
        "component": c.component,
        "data": data_json(&c.data),
        "complete": c.complete,
        "summary": c.summary,
        "partitions": c.partitions,
        "runs": c.runs,
        "points": c.points.iter().map(point_json).collect::<Vec<_>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip() {
        let m = parse_matrix(r#"{"n": 2, "entries": [[1, [2, 0.5]], [[2, 0.5], 3]]}"#).unwrap();
        assert_eq!(m.get(0, 1), C64::new(2.0, 0.5));
        let again = parse_matrix(&matrix_json(&m).to_string()).unwrap();
        assert_eq!(again, m);
        assert!(parse_matrix(r#"{"entries": [[1, 2], [2.1, 3]]}"#).is_err());
        assert!(parse_matrix(r#"{"n": 3, "entries": [[1, 2], [2, 3]]}"#).is_err());
    }

    #[test]
    fn data_forms_agree() {
        let a = parse_data(r#"{"n": 2, "u_graded": [1, 2, 3, 4]}"#).unwrap();
        let b = parse_data(r#"{"n": 2, "u": {"": 1, "1": 2, "2": 3, "12": 4}}"#).unwrap();
        assert_eq!(a, b);
        let sparse = parse_data(r#"{"n": 2, "u": {"12": 4}}"#).unwrap();
        assert_eq!(sparse.total(), C64::new(4.0, 0.0));
        assert!(parse_data(r#"{"n": 2, "u": {"3": 1}}"#).is_err());
        assert!(parse_data(r#"{"n": 2, "u_graded": [1, 2, 3]}"#).is_err());
        assert!(parse_data(r#"{"n": 2}"#).is_err());
    }
}
