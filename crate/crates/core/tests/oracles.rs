//! Independent checks of the solver and the exact-design search against
//! brute force and hand-coded linear algebra.

use pairdesign::exact::{construct_design, psi_exact};
use pairdesign::measure::{criterion_trace, info_matrix, DesignMeasure, SolverOptions};
use pairdesign::pipeline::Problem;
use pairdesign::reference::MEASURE_3X3_BASELINE;
use pairdesign::{notation, ExactDesign, FactorialSpec, Parametrization};

/// Gauss-Jordan inverse with partial pivoting.
fn inverse(mut a: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut inv: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect())
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        inv.swap(col, piv);
        let p = a[col][col];
        assert!(p.abs() > 1e-12, "singular");
        for j in 0..n {
            a[col][j] /= p;
            inv[col][j] /= p;
        }
        for i in 0..n {
            if i != col {
                let f = a[i][col];
                for j in 0..n {
                    a[i][j] -= f * a[col][j];
                    inv[i][j] -= f * inv[col][j];
                }
            }
        }
    }
    inv
}

/// tr(M⁻¹W) for M = Σ π_k x_k x_kᵀ, assembled straight from the rows.
fn trace_by_hand(rows: &[Vec<f64>], masses: &[f64], w: &[f64]) -> f64 {
    let d = rows[0].len();
    let mut m = vec![vec![0.0; d]; d];
    for (x, &p) in rows.iter().zip(masses) {
        for i in 0..d {
            for j in 0..d {
                m[i][j] += p * x[i] * x[j];
            }
        }
    }
    let inv = inverse(m);
    (0..d).map(|i| inv[i][i] * w[i]).sum()
}

#[test]
fn published_3x3_baseline_measure_trace_matches_direct_evaluation() {
    let problem = Problem::uniform(&[3, 3], Parametrization::Baseline, &[1.0, 1.0]).unwrap();
    let mut masses = vec![0.0; problem.space.n_pairs()];
    for cat in MEASURE_3X3_BASELINE {
        for (a, b) in notation::parse_pair_list(problem.space.spec(), cat.pairs).unwrap() {
            masses[problem.space.position_of(&a, &b).unwrap()] = cat.mass;
        }
    }
    // The published masses are rounded, so renormalize for the library path.
    let total: f64 = masses.iter().sum();
    let masses: Vec<f64> = masses.iter().map(|m| m / total).collect();
    let measure = DesignMeasure::new(masses.clone()).unwrap();
    let lib = criterion_trace(&info_matrix(&measure, &problem.regressors).unwrap(), &problem.weights).unwrap();
    let oracle = trace_by_hand(problem.regressors.rows(), &masses, problem.weights.diag());
    assert!((lib - oracle).abs() < 1e-10 * oracle, "{lib} vs {oracle}");

    let optimal = problem.solve(SolverOptions::default()).unwrap();
    // Rounded masses are near-optimal, so the trace is within a hair of t0.
    assert!(optimal.criterion <= lib + 1e-9);
    assert!((lib - optimal.criterion) / optimal.criterion < 1e-5);
    assert!((optimal.criterion - 66.468_256_201_128_92).abs() < 1e-8);
}

/// Minimizes tr(M(π)⁻¹) for 2x2 over the six-pair simplex by pattern search
/// on mass transfers between pairs.
fn pattern_search_2x2(rows: &[Vec<f64>], w: &[f64]) -> f64 {
    let p = rows.len();
    let mut pi = vec![1.0 / p as f64; p];
    let mut best = trace_by_hand(rows, &pi, w);
    let mut step = 0.1;
    while step > 1e-13 {
        let mut improved = false;
        for i in 0..p {
            for j in 0..p {
                if i == j || pi[j] < step {
                    continue;
                }
                let mut trial = pi.clone();
                trial[i] += step;
                trial[j] -= step;
                let t = trace_by_hand(rows, &trial, w);
                if t < best {
                    best = t;
                    pi = trial;
                    improved = true;
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    best
}

#[test]
fn solver_matches_pattern_search_on_2x2() {
    for param in [Parametrization::Baseline, Parametrization::AllToNext] {
        for w in [[1.0, 1.0], [1.0, 3.0], [2.0, 0.5]] {
            let problem = Problem::uniform(&[2, 2], param, &w).unwrap();
            let report = problem.solve(SolverOptions::default()).unwrap();
            let oracle = pattern_search_2x2(problem.regressors.rows(), problem.weights.diag());
            assert!(
                (report.criterion - oracle).abs() < 1e-7 * oracle,
                "{param} {w:?}: solver {} vs search {oracle}",
                report.criterion
            );
        }
    }
    let problem = Problem::uniform(&[2, 2], Parametrization::Baseline, &[1.0, 1.0]).unwrap();
    let t0 = problem.solve(SolverOptions::default()).unwrap().criterion;
    assert!((t0 - (6.0 + 2.0 * 3f64.sqrt())).abs() < 1e-9);
}

fn compositions(n: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 1 {
        return vec![vec![n]];
    }
    let mut out = Vec::new();
    for x in 0..=n {
        for mut rest in compositions(n - x, parts - 1) {
            rest.insert(0, x);
            out.push(rest);
        }
    }
    out
}

#[test]
fn construction_is_exhaustively_optimal_for_2x2() {
    let expected = [(3u32, 4.0), (4, 2.5), (5, 2.0), (6, 1.583_333_333_333_333_3)];
    for (param, w) in [
        (Parametrization::Baseline, [1.0, 1.0]),
        (Parametrization::AllToNext, [1.0, 1.0]),
        (Parametrization::Baseline, [1.0, 4.0]),
    ] {
        let spec = FactorialSpec::uniform(vec![2, 2], param).unwrap();
        let problem = Problem::new(&spec, &w).unwrap();
        for (n, published) in expected {
            let all = compositions(n, 6);
            let oracle = all
                .iter()
                .filter_map(|f| {
                    let d = ExactDesign::new(f.clone()).unwrap();
                    psi_exact(&d, &problem.regressors, &problem.weights).ok()
                })
                .fold(f64::INFINITY, f64::min);
            let built = construct_design(&spec, &w, n as usize, SolverOptions::default()).unwrap();
            let psi = psi_exact(&built.design, &problem.regressors, &problem.weights).unwrap();
            assert!(
                (psi - oracle).abs() <= 1e-10 * oracle,
                "{param} {w:?} N={n}: {psi} vs {oracle}"
            );
            if w == [1.0, 1.0] {
                assert!((oracle - published).abs() < 1e-12, "N={n}: {oracle}");
            }
        }
    }
    assert_eq!(compositions(4, 6).len(), 126);
    assert_eq!(compositions(6, 6).len(), 462);
}
