//! Acceptance checks. Each test prints one `PASS` or `FAIL` line straight to
//! stdout (bypassing the test harness capture) and then asserts.

mod common;

use std::io::Write;

use common::*;
use dpp_core::census::{solve_census, Census, Component};
use dpp_core::combinatorics::SetPartition;
use dpp_core::decoupling::{count_critical_points, MlDegreeTable};
use dpp_core::hyperdet::{critical_rank_matrix, hyperdet, hyperdet_scale, Tensor222};
use dpp_core::model::{principal_minors, SymMatrix};
use dpp_core::solver::{monodromy_solve, monodromy_solve_with_progress, multistart_solve, to_reparam, CriticalPoint, SolverOptions};

fn report(label: &str, ok: bool, detail: String) {
    let line = format!("{} [{label}] {detail}\n", if ok { "PASS" } else { "FAIL" });
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
    assert!(ok, "{label}: {detail}");
}

fn census(u: &dpp_core::model::DataVector, component: Component) -> Census {
    solve_census(u, component, &SolverOptions::default()).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

fn has_entry(points: &[CriticalPoint], i: usize, j: usize, value: f64, tol: f64) -> bool {
    // off-diagonal signs are only defined up to the sign orbit
    points.iter().any(|p| {
        let z = p.theta.get(i, j);
        z.im.abs() < tol && close(z.re.abs(), value.abs(), tol)
    })
}

#[test]
fn c1_main_component_count_on_random_integer_data() {
    let mut r = rng(2024);
    let mut counts = Vec::new();
    for _ in 0..5 {
        let u = random_counts(&mut r, 3, 50);
        counts.push(monodromy_solve(&u, &SolverOptions::default()).unwrap().solutions.len());
    }
    report("1", counts.iter().all(|&c| c == 13), format!("main-component solutions for 5 random integer vectors: {counts:?}"));
}

#[test]
fn c2_all_components_census() {
    let c = census(&kernel_minors(), Component::All);
    let found: Vec<usize> = c.partitions.iter().map(|p| p.found_with_multiplicity).collect();
    let ok = c.complete && found == vec![1, 2, 2, 2, 52] && found.iter().sum::<usize>() == 59;
    report("2", ok, format!("all critical matrices by partition: {found:?}, total {}", found.iter().sum::<usize>()));
}

#[test]
fn c3_kernel_minors_maxima() {
    let c = census(&kernel_minors(), Component::Main);
    let target = real_matrix(3, &[8., 5., 3., 5., 22., 6., 3., 6., 18.]);
    let global: Vec<&CriticalPoint> = c.points.iter().filter(|p| p.flags.is_global_max).collect();
    let global_ok = global.len() == 1 && orbit_distance(&global[0].theta, &target) < 1e-6;
    let pd_other = c.points.iter().filter(|p| p.flags.is_positive_definite && !p.flags.is_global_max).count();
    let named = has_entry(&c.points, 0, 0, 7.72799090116006, 1e-9);
    report(
        "3",
        global_ok && pd_other == 4 && named,
        format!("global maximum at the data's own kernel: {global_ok}; other PD points: {pd_other}; θ11 = 7.72799090116006 present: {named}"),
    );
}

#[test]
fn c4_symmetric_data_census() {
    let c = census(&symmetric(), Component::Main);
    let s = &c.summary;
    let entries = has_entry(&c.points, 0, 1, 5.265758657, 1e-8) && has_entry(&c.points, 0, 1, -0.840402407, 1e-8);
    let global: Vec<f64> = c.points.iter().filter(|p| p.flags.is_global_max).filter_map(|p| p.value).collect();
    let global_ok = global.len() == 2 && global.iter().all(|v| close(*v, -63.46051485, 1e-9));
    let five: Vec<f64> = c
        .points
        .iter()
        .filter(|p| close(p.theta.get(0, 0).re, 5.0, 1e-8) && p.theta.get(0, 0).im.abs() < 1e-8)
        .filter_map(|p| p.value)
        .collect();
    let five_ok = !five.is_empty() && five.iter().all(|v| close(*v, -63.63109767, 1e-9));
    let ok = s.complex == 2 && s.positive_definite == 11 && s.local_max == 5 && entries && global_ok && five_ok;
    report(
        "4",
        ok,
        format!(
            "complex {}, PD {}, local maxima {}, global maxima {:?}, θ12 values present: {entries}, θ11 = 5 values {:?}",
            s.complex, s.positive_definite, s.local_max, global, five
        ),
    );
}

#[test]
fn c5_accidental_zero() {
    let c = census(&zero_entry(), Component::All);
    let target = real_matrix(3, &[2., 0., 2., 0., 4., 3., 2., 3., 7.]);
    let hit = c.points.iter().find(|p| orbit_distance(&p.theta, &target) < 1e-8);
    let detail = match hit {
        Some(p) => format!(
            "{} points; known point residual {:.1e}, accidental zeros {:?}, origin {}",
            c.points.len(),
            p.residual,
            p.accidental_zeros,
            p.origin
        ),
        None => format!("{} points; known point missing", c.points.len()),
    };
    let ok = c.points.len() == 59
        && hit.is_some_and(|p| p.residual < 1e-10 && p.accidental_zeros == vec![(1, 2)] && p.origin == SetPartition::trivial(3));
    report("5", ok, detail);
}

#[test]
fn c6_generic_counts() {
    let table = MlDegreeTable::default();
    let totals: Vec<u64> = (2..=4).map(|n| count_critical_points(n, &table).unwrap().total).collect();
    let mut summands: Vec<u64> = count_critical_points(4, &table).unwrap().summands.iter().map(|s| s.count).collect();
    summands.sort_unstable_by(|a, b| b.cmp(a));
    let expected = vec![28208, 52, 52, 52, 52, 4, 4, 4, 2, 2, 2, 2, 2, 2, 1];
    report("6", totals == vec![3, 59, 28441] && summands == expected, format!("totals for n = 2, 3, 4: {totals:?}; n = 4 summands {summands:?}"));
}

#[test]
fn c7_n2_three_way_agreement() {
    let mut r = rng(77);
    let opts = SolverOptions::default();
    let mut worst = 0.0f64;
    let mut bad = 0;
    let mut fewest_hits = usize::MAX;
    for trial in 0..100 {
        let u = random_counts(&mut r, 2, 100);
        let exact = n2_closed_form(&u);
        let distance = |theta: &SymMatrix| {
            let y = to_reparam(theta, 0).coords;
            y.iter().zip(&exact).map(|(a, b)| (a - b).norm() / (1.0 + b.norm())).fold(0.0, f64::max)
        };
        let mono = monodromy_solve(&u, &SolverOptions { seed: trial, ..opts.clone() }).unwrap();
        let multi = multistart_solve(&u, 500, &SolverOptions { seed: trial, ..opts.clone() }).unwrap();
        fewest_hits = fewest_hits.min(multi.converged);
        if mono.solutions.len() != 1 || multi.solutions.len() != 1 {
            bad += 1;
            continue;
        }
        worst = worst.max(distance(&mono.solutions[0].theta)).max(distance(&multi.solutions[0].0.theta));
    }
    report(
        "7",
        bad == 0 && worst < 1e-10,
        format!(
            "100 vectors, wrong solution counts {bad}, largest relative deviation {worst:.1e}, fewest converged starts {fewest_hits}/500"
        ),
    );
}

#[test]
fn c8_invariants_at_solutions() {
    // hyperdeterminant and rank condition at every main-component solution of the three examples,
    // plus minors against the cofactor oracle
    let mut worst_rank = 0.0f64;
    let mut worst_det = 0.0f64;
    let mut max_rank = 0;
    let mut worst_minor = 0.0f64;
    for u in [kernel_minors(), symmetric(), zero_entry()] {
        for s in monodromy_solve(&u, &SolverOptions::default()).unwrap().solutions {
            let p = principal_minors(&s.theta);
            let t = Tensor222::from(&p);
            worst_det = worst_det.max(hyperdet(&t).norm() / hyperdet_scale(&t));
            let rank = critical_rank_matrix(&t, &u).unwrap();
            worst_rank = worst_rank.max(rank.singular_values[2] / rank.singular_values[0]);
            max_rank = max_rank.max(rank.rank);
            for mask in 0..8 {
                let o = oracle_minor(&s.theta, mask);
                worst_minor = worst_minor.max((p.values()[mask] - o).norm() / (1.0 + o.norm()));
            }
        }
    }
    let mut r = rng(88);
    for n in 1..=5 {
        for _ in 0..20 {
            let theta = random_complex_matrix(&mut r, n);
            let p = principal_minors(&theta);
            for mask in 0..1usize << n {
                let o = oracle_minor(&theta, mask);
                worst_minor = worst_minor.max((p.values()[mask] - o).norm() / (1.0 + o.norm()));
            }
        }
    }
    let ok = max_rank <= 2 && worst_rank < 1e-8 && worst_det < 1e-10 && worst_minor < 1e-12;
    report(
        "8",
        ok,
        format!("rank ≤ {max_rank} (σ3/σ1 ≤ {worst_rank:.1e}), relative hyperdet ≤ {worst_det:.1e}, minor error ≤ {worst_minor:.1e}"),
    );
}

#[test]
#[ignore = "long-running: monodromy for n = 4"]
fn c9_n4_main_component() {
    let mut r = rng(4);
    let u = random_counts(&mut r, 4, 50);
    let start = std::time::Instant::now();
    let run = monodromy_solve_with_progress(&u, &SolverOptions::default(), &mut |p| {
        let line = format!("  n = 4 after {:?}: {p:?}\n", start.elapsed());
        let _ = std::io::stderr().lock().write_all(line.as_bytes());
    })
    .unwrap();
    report(
        "9",
        run.solutions.len() == 3526,
        format!(
            "n = 4 main component: {} solutions ({} at the base point), stop reason {:?}, {} loops, {:?}",
            run.solutions.len(),
            run.run.base_solutions,
            run.run.stop_reason,
            run.run.loops,
            start.elapsed()
        ),
    );
}
