use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use pairdesign::dye::{color_balance, dye_info_matrix, eff_dye, nearly_symmetric_assignment, DyeAssignment};
use pairdesign::exact::{efficiency, psi_exact, step_down, step_up, ExactDesign};
use pairdesign::measure::{MultiplicativeSolver, SolverOptions};
use pairdesign::pipeline::Problem;
use pairdesign::robustness::{eff_sharp, pair_variances, solve_gls_measure, PairVariances, VarianceProfile};
use pairdesign::{enumerate_treatments, pair_contrast, tau_coefficients, theta_layout, FactorialSpec, Parametrization};

fn param() -> impl Strategy<Value = Parametrization> {
    prop_oneof![Just(Parametrization::Baseline), Just(Parametrization::AllToNext)]
}

/// Small factorial specs with mixed parametrizations.
fn spec(max_levels: usize, max_factors: usize) -> impl Strategy<Value = FactorialSpec> {
    prop::collection::vec((2..=max_levels, param()), 1..=max_factors).prop_filter_map("valid spec", |fs| {
        let (levels, params): (Vec<_>, Vec<_>) = fs.into_iter().unzip();
        FactorialSpec::new(levels, params).ok().filter(|s| s.n_params() >= 1)
    })
}

fn weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.25f64..4.0, n)
}

/// A spec, its weights, and a nonsingular design: a star on the first
/// treatment plus random extra slides.
fn problem_and_design() -> impl Strategy<Value = (FactorialSpec, Vec<f64>, Vec<u32>)> {
    spec(3, 2).prop_flat_map(|s| {
        let n = s.n_factors();
        let p = s.n_pairs();
        (Just(s), weights(n), prop::collection::vec(0u32..3, p))
    })
}

fn with_star(problem: &Problem, extra: &[u32]) -> ExactDesign {
    let mut f = extra.to_vec();
    let v = problem.space.treatments().len();
    for t in 1..v {
        f[problem.space.pair_position(t, 0).unwrap()] += 1;
    }
    ExactDesign::new(f).unwrap()
}

fn treatments_triple(s: &FactorialSpec) -> impl Strategy<Value = (usize, usize, usize)> {
    let v = s.n_treatments();
    (0..v, 0..v, 0..v)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn contrasts_are_antisymmetric_and_telescope(
        (s, (a, b, c)) in spec(4, 3).prop_flat_map(|s| { let t = treatments_triple(&s); (Just(s), t) })
    ) {
        prop_assume!(a != b && b != c && a != c);
        let layout = theta_layout(&s);
        let (ta, tb, tc) = (s.treatment_at(a), s.treatment_at(b), s.treatment_at(c));
        let ab = pair_contrast(&s, &layout, &ta, &tb).unwrap();
        let ba = pair_contrast(&s, &layout, &tb, &ta).unwrap();
        prop_assert_eq!(&ab, &ba.negated());
        let bc = pair_contrast(&s, &layout, &tb, &tc).unwrap();
        let ac = pair_contrast(&s, &layout, &ta, &tc).unwrap();
        let sum: Vec<i8> = ab.coeffs().iter().zip(bc.coeffs()).map(|(x, y)| x + y).collect();
        prop_assert_eq!(sum, ac.coeffs().to_vec());
    }

    #[test]
    fn two_level_parametrizations_coincide(n in 1usize..=4, mix in prop::collection::vec(param(), 4)) {
        let base = FactorialSpec::uniform(vec![2; n], Parametrization::Baseline).unwrap();
        let mixed = FactorialSpec::new(vec![2; n], mix[..n].to_vec()).unwrap();
        let (lb, lm) = (theta_layout(&base), theta_layout(&mixed));
        let ts = enumerate_treatments(&base);
        for i in 0..ts.len() {
            for j in 0..i {
                prop_assert_eq!(
                    pair_contrast(&base, &lb, &ts[i], &ts[j]).unwrap(),
                    pair_contrast(&mixed, &lm, &ts[i], &ts[j]).unwrap()
                );
            }
        }
    }

    #[test]
    fn tau_coefficient_matrix_is_invertible(s in spec(4, 3)) {
        let ts = enumerate_treatments(&s);
        let v = ts.len();
        let rows: Vec<f64> = ts
            .iter()
            .flat_map(|t| tau_coefficients(&s, t).unwrap().into_iter().map(f64::from))
            .collect();
        let m = DMatrix::from_row_slice(v, v, &rows);
        // 0/1 triangular structure up to ordering: determinant is ±1.
        prop_assert!((m.determinant().abs() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn efficiency_is_in_unit_interval((s, w, extra) in problem_and_design()) {
        let problem = Problem::new(&s, &w).unwrap();
        let d = with_star(&problem, &extra);
        let opt = problem.solve(SolverOptions::with_epsilon(1e-10)).unwrap();
        let eff = efficiency(&d, &opt, &problem.regressors, &problem.weights).unwrap();
        prop_assert!(eff > 0.0 && eff <= 1.0 + 1e-9, "Eff = {}", eff);
    }

    #[test]
    fn replication_scales_psi_and_keeps_efficiency((s, w, extra) in problem_and_design(), r in 2u32..4) {
        let problem = Problem::new(&s, &w).unwrap();
        let d = with_star(&problem, &extra);
        let rd = ExactDesign::new(d.freqs().iter().map(|f| f * r).collect()).unwrap();
        let psi = psi_exact(&d, &problem.regressors, &problem.weights).unwrap();
        let rpsi = psi_exact(&rd, &problem.regressors, &problem.weights).unwrap();
        prop_assert!((rpsi * f64::from(r) - psi).abs() < 1e-9 * psi);
        prop_assert!((d.n_slides() as f64 * psi - rd.n_slides() as f64 * rpsi).abs() < 1e-9 * psi * d.n_slides() as f64);
    }

    #[test]
    fn greedy_steps_pick_the_best_single_move((s, w, extra) in problem_and_design()) {
        let problem = Problem::new(&s, &w).unwrap();
        let d = with_star(&problem, &extra);
        let (r, wm) = (&problem.regressors, &problem.weights);
        let n = d.n_slides();

        let up = step_up(&d, n + 1, r, wm).unwrap();
        let chosen = psi_exact(&up, r, wm).unwrap();
        for k in 0..r.count() {
            let mut f = d.freqs().to_vec();
            f[k] += 1;
            let alt = psi_exact(&ExactDesign::new(f).unwrap(), r, wm).unwrap();
            prop_assert!(chosen <= alt * (1.0 + 1e-10));
        }

        let down = step_down(&d, n - 1, r, wm);
        let feasible: Vec<f64> = (0..r.count())
            .filter(|&k| d.freqs()[k] > 0)
            .filter_map(|k| {
                let mut f = d.freqs().to_vec();
                f[k] -= 1;
                ExactDesign::new(f).ok().and_then(|e| psi_exact(&e, r, wm).ok())
            })
            .collect();
        match down {
            Ok(dd) => {
                let chosen = psi_exact(&dd, r, wm).unwrap();
                let best = feasible.iter().copied().fold(f64::INFINITY, f64::min);
                prop_assert!(chosen <= best * (1.0 + 1e-10));
            }
            Err(_) => prop_assert!(feasible.is_empty()),
        }
    }

    #[test]
    fn dye_downdate_matches_schur_complement((s, w, extra) in problem_and_design(), flips in prop::collection::vec(any::<bool>(), 64)) {
        let problem = Problem::new(&s, &w).unwrap();
        let d = with_star(&problem, &extra);
        let signs: Vec<i8> = (0..d.n_slides()).map(|i| if flips[i % flips.len()] { 1 } else { -1 }).collect();
        let q = DyeAssignment::new(signs.clone()).unwrap();
        let a = dye_info_matrix(&d, &q, &problem.regressors).unwrap();

        let x = d.design_matrix(&problem.regressors);
        let qv = DVector::from_iterator(signs.len(), signs.iter().map(|&s| f64::from(s)));
        let xtq = x.transpose() * &qv;
        let direct = x.transpose() * &x - &xtq * xtq.transpose() / qv.dot(&qv);
        prop_assert!((a.matrix() - direct).abs().max() < 1e-9);
    }

    #[test]
    fn nearly_symmetric_colors_balance_every_treatment((s, w, extra) in problem_and_design()) {
        let problem = Problem::new(&s, &w).unwrap();
        let d = with_star(&problem, &extra);
        let q = nearly_symmetric_assignment(&d, &problem.space);
        let bal = color_balance(&d, &q, &problem.space).unwrap();
        for (t, &r) in d.replication(&problem.space).iter().enumerate() {
            prop_assert_eq!(bal.difference(t).unsigned_abs(), u64::from(r % 2));
        }
        let opt = problem.solve(SolverOptions::with_epsilon(1e-9)).unwrap();
        if let Ok(ed) = eff_dye(&d, &q, &opt, &problem.regressors, &problem.weights) {
            let e = efficiency(&d, &opt, &problem.regressors, &problem.weights).unwrap();
            prop_assert!(ed <= e + 1e-10);
        }
    }

    #[test]
    fn multiplicative_iterates_descend_and_conserve_mass(s in spec(3, 3), w in weights(3), eps in 1e-10f64..1e-6) {
        let problem = Problem::new(&s, &w[..s.n_factors()]).unwrap();
        let mut solver = MultiplicativeSolver::new(&problem.regressors, &problem.weights).unwrap();
        let mut prev = solver.criterion();
        let mut steps = 0;
        while solver.gap() > eps && steps < 200_000 {
            solver.step().unwrap();
            steps += 1;
            prop_assert!(solver.criterion() <= prev * (1.0 + 1e-12), "criterion rose");
            prev = solver.criterion();
            prop_assert!((solver.masses().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(solver.masses().iter().all(|&m| m >= 0.0));
        }
        let report = problem.solve(SolverOptions::with_epsilon(eps)).unwrap();
        prop_assert!(report.gap <= eps);
        prop_assert!(report.criterion <= prev * (1.0 + 1e-9));
    }

    #[test]
    fn eff_sharp_reduces_to_eff_for_flat_profiles((s, w, extra) in problem_and_design(), level in 0.0f64..5.0) {
        let problem = Problem::new(&s, &w).unwrap();
        let d = with_star(&problem, &extra);
        let opts = SolverOptions::with_epsilon(1e-12);
        let opt = problem.solve(opts).unwrap();
        let eff = efficiency(&d, &opt, &problem.regressors, &problem.weights).unwrap();
        let profile = VarianceProfile::constant(&problem.space, level).unwrap();
        let sharp = problem.eff_sharp(&d, &profile, opts).unwrap();
        prop_assert!((sharp - eff).abs() < 1e-8, "{} vs {}", sharp, eff);
    }

    #[test]
    fn eff_sharp_is_invariant_to_scaling((s, w, extra) in problem_and_design(), ratios in prop::collection::vec(0.0f64..6.0, 9), c in 0.1f64..10.0) {
        let problem = Problem::new(&s, &w).unwrap();
        let d = with_star(&problem, &extra);
        let v = problem.space.treatments().len();
        let profile = VarianceProfile::positional(&problem.space, ratios[..v].to_vec()).unwrap();
        let pv = pair_variances(&profile, &problem.space).unwrap();
        let opts = SolverOptions::with_epsilon(1e-12);
        let (r, wm) = (&problem.regressors, &problem.weights);
        let gls = solve_gls_measure(r, wm, &pv, opts).unwrap();
        let base = eff_sharp(&d, &pv, &gls, r, wm).unwrap();

        let scaled = PairVariances { a_sq: pv.a_sq.iter().map(|a| a * c).collect() };
        let gls_s = solve_gls_measure(r, wm, &scaled, opts).unwrap();
        let by_v = eff_sharp(&d, &scaled, &gls_s, r, wm).unwrap();
        prop_assert!((by_v - base).abs() < 1e-7, "{} vs {}", by_v, base);

        let w2: Vec<f64> = w.iter().map(|x| x * c).collect();
        let p2 = Problem::new(&s, &w2).unwrap();
        let gls_w = solve_gls_measure(&p2.regressors, &p2.weights, &pv, opts).unwrap();
        let by_w = eff_sharp(&d, &pv, &gls_w, &p2.regressors, &p2.weights).unwrap();
        prop_assert!((by_w - base).abs() < 1e-7, "{} vs {}", by_w, base);
        prop_assert!(base > 0.0 && base <= 1.0 + 1e-9);
    }
}
