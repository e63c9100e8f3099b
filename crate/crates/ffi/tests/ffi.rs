//! The C interface called from Rust: handles, status codes, error messages,
//! and the generated header.

use std::ffi::CStr;
use std::process::Command;
use std::ptr;

use dpp_ffi::*;

fn last_error() -> Option<String> {
    let p = dpp_last_error();
    (!p.is_null()).then(|| unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned())
}

fn matrix(n: usize, rows: &[f64]) -> *mut DppMatrix {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { dpp_matrix_new_real(n, rows.as_ptr(), &mut m) }, DppStatus::Ok);
    m
}

fn data(n: usize, graded: &[f64]) -> *mut DppData {
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { dpp_data_new_real(n, graded.as_ptr(), &mut d) }, DppStatus::Ok);
    d
}

const KERNEL: [f64; 9] = [8., 5., 3., 5., 22., 6., 3., 6., 18.];
const MINORS: [f64; 8] = [1., 8., 22., 18., 151., 135., 360., 2412.];

#[test]
fn minors_partition_function_and_likelihood() {
    let m = matrix(3, &KERNEL);
    let d = data(3, &MINORS);
    let (mut re, mut im) = ([0.0; 8], [0.0; 8]);
    unsafe {
        assert_eq!(dpp_matrix_dim(m), 3);
        assert_eq!(dpp_principal_minors(m, re.as_mut_ptr(), im.as_mut_ptr(), 8), DppStatus::Ok);
        for (a, b) in re.iter().zip(MINORS) {
            assert!((a - b).abs() < 1e-9 * b);
        }
        assert!(im.iter().all(|x| *x == 0.0));

        let (mut zr, mut zi) = (0.0, 0.0);
        assert_eq!(dpp_partition_function(m, &mut zr, &mut zi), DppStatus::Ok);
        assert!((zr - MINORS.iter().sum::<f64>()).abs() < 1e-8 && zi == 0.0);

        let mut value = 0.0;
        assert_eq!(dpp_loglike(m, d, &mut value), DppStatus::Ok);
        let expected: f64 = MINORS.iter().map(|u| u * (u / zr).ln()).sum();
        assert!((value - expected).abs() < 1e-9 * expected.abs());

        let mut residual = 1.0;
        assert_eq!(dpp_gradient_residual(m, d, &mut residual), DppStatus::Ok);
        assert!(residual < 1e-12);

        let (mut er, mut ei) = (0.0, 0.0);
        assert_eq!(dpp_matrix_get(m, 0, 1, &mut er, &mut ei), DppStatus::Ok);
        assert_eq!((er, ei), (5.0, 0.0));

        // the data's own kernel has vanishing hyperdeterminant
        let mut h = 1.0;
        assert_eq!(dpp_hyperdet(MINORS.as_ptr(), &mut h), DppStatus::Ok);
        assert!(h.abs() < 1e-6);

        dpp_matrix_free(m);
        dpp_data_free(d);
    }
}

#[test]
fn counts() {
    let mut out = 0u64;
    unsafe {
        assert_eq!(dpp_count_critical_points(3, &mut out), DppStatus::Ok);
        assert_eq!(out, 59);
        assert_eq!(dpp_count_critical_points(4, &mut out), DppStatus::Ok);
        assert_eq!(out, 28441);
        assert_eq!(dpp_count_critical_points(5, &mut out), DppStatus::Unsupported);
        assert!(last_error().unwrap().contains('5'));
        assert_eq!(dpp_bell_number(5, &mut out), DppStatus::Ok);
        assert_eq!(out, 52);
    }
    assert!(last_error().is_none());
}

#[test]
fn solve_and_read_census() {
    let d = data(3, &[1., 5., 5., 5., 5., 5., 5., 1.]);
    let mut c = ptr::null_mut();
    unsafe {
        assert_eq!(dpp_solve(d, false, 1, &mut c), DppStatus::Ok);
        assert!(dpp_census_complete(c));
        assert_eq!(dpp_census_len(c), 13);
        let mut pd = 0;
        let mut global = 0;
        for k in 0..13 {
            let mut f = DppPointFlags::default();
            assert_eq!(dpp_census_flags(c, k, &mut f), DppStatus::Ok);
            assert!(f.residual < 1e-8);
            pd += f.is_positive_definite as usize;
            global += f.is_global_max as usize;
            if f.is_global_max {
                assert!(f.has_value && (f.value + 63.46051485).abs() < 1e-6);
            }
            let mut p = ptr::null_mut();
            assert_eq!(dpp_census_point(c, k, &mut p), DppStatus::Ok);
            let mut r = 1.0;
            assert_eq!(dpp_gradient_residual(p, d, &mut r), DppStatus::Ok);
            assert!(r < 1e-8);
            dpp_matrix_free(p);
        }
        assert_eq!((pd, global), (11, 2));

        let mut f = DppPointFlags::default();
        assert_eq!(dpp_census_flags(c, 13, &mut f), DppStatus::InvalidInput);

        let json = dpp_census_to_json(c);
        assert!(!json.is_null());
        let v: serde_json::Value = serde_json::from_str(CStr::from_ptr(json).to_str().unwrap()).unwrap();
        assert_eq!(v["points"].as_array().unwrap().len(), 13);
        dpp_string_free(json);

        dpp_census_free(c);
        dpp_data_free(d);
    }
}

#[test]
fn invalid_arguments_report_status_and_message() {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(dpp_matrix_new_real(2, ptr::null(), &mut m), DppStatus::NullOrLength);
        assert!(m.is_null());
        assert!(last_error().unwrap().contains("entries"));

        let asymmetric = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(dpp_matrix_new_real(2, asymmetric.as_ptr(), &mut m), DppStatus::InvalidInput);
        assert!(last_error().is_some());
        assert_eq!(dpp_matrix_new_real(0, asymmetric.as_ptr(), &mut m), DppStatus::InvalidInput);

        let mut value = 0.0;
        assert_eq!(dpp_loglike(ptr::null(), ptr::null(), &mut value), DppStatus::NullOrLength);

        // an indefinite matrix has no real likelihood
        let m = matrix(2, &[1.0, 3.0, 3.0, 1.0]);
        let d = data(2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(dpp_loglike(m, d, &mut value), DppStatus::InvalidInput);

        // wrong output length
        let (mut re, mut im) = ([0.0; 8], [0.0; 8]);
        assert_eq!(dpp_principal_minors(m, re.as_mut_ptr(), im.as_mut_ptr(), 8), DppStatus::NullOrLength);
        assert_eq!(dpp_matrix_get(m, 2, 0, &mut value, &mut value), DppStatus::InvalidInput);

        // data and matrix sizes must agree
        let d3 = data(3, &MINORS);
        assert_eq!(dpp_gradient_residual(m, d3, &mut value), DppStatus::InvalidInput);

        assert_eq!(dpp_census_len(ptr::null()), 0);
        assert!(!dpp_census_complete(ptr::null()));
        assert!(dpp_census_to_json(ptr::null()).is_null());

        dpp_matrix_free(m);
        dpp_data_free(d);
        dpp_data_free(d3);
        // null is accepted by every free function
        dpp_matrix_free(ptr::null_mut());
        dpp_data_free(ptr::null_mut());
        dpp_census_free(ptr::null_mut());
        dpp_string_free(ptr::null_mut());
    }
}

#[test]
fn errors_are_per_thread() {
    let mut out = 0u64;
    assert_eq!(unsafe { dpp_count_critical_points(6, &mut out) }, DppStatus::Unsupported);
    let other = std::thread::spawn(last_error).join().unwrap();
    assert!(other.is_none());
    assert!(last_error().is_some());
}

const HEADER: &str = include_str!("../include/dpp.h");

#[test]
fn header_declares_every_export() {
    let source = include_str!("../src/lib.rs");
    let exports: Vec<&str> = source
        .split("extern \"C\" fn ")
        .skip(1)
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 20);
    for name in exports {
        assert!(HEADER.contains(&format!("{name}(")), "{name} missing from header");
    }
    for ty in ["typedef struct DppMatrix DppMatrix;", "typedef struct DppCensus DppCensus;", "DPP_STATUS_OK = 0"] {
        assert!(HEADER.contains(ty), "{ty}");
    }
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let dir = std::path::Path::new(env!("CARGO_TARGET_TMPDIR"));
    let src = dir.join("use_header.c");
    std::fs::write(
        &src,
        "#include \"dpp.h\"\nint main(void) { DppMatrix *m = NULL; double k[1] = {2.0};\n\
         DppStatus s = dpp_matrix_new_real(1, k, &m); dpp_matrix_free(m); return s == DPP_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    for (compiler, extra) in [("cc", vec!["-std=c99"]), ("c++", vec!["-x", "c++"])] {
        let status = Command::new(compiler)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-I", include])
            .args(&extra)
            .arg(&src)
            .status();
        match status {
            Ok(s) => assert!(s.success(), "{compiler} rejected the header"),
            Err(_) => eprintln!("{compiler} not available; header compile check skipped"),
        }
    }
}
