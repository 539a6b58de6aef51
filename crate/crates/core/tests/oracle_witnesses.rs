//! Tightness witnesses, limiting behaviour and negative controls for the
//! empirical oracle.

use num_traits::Signed;

use sos_rates::certify::{rate_formula, step_contraction};
use sos_rates::numeric::{int, rat, to_f64, Rational};
use sos_rates::oracle::{
    check_against_bound, constraint_audit, run, trace_csv, two_eigenvalue_quadratic, zigzag_start, RunOptions,
    TestFunction,
};
use sos_rates::scenarios::{build_default, AlgorithmSpec, FunctionClass, MetricKind};

fn els_rate(mu: i64, l: i64) -> Rational {
    let r = rat(l - mu, l + mu);
    &r * &r
}

#[test]
fn steepest_descent_zigzag_attains_the_bound_every_step() {
    for (mu, l) in [(1, 10), (1, 100), (2, 3)] {
        let f = two_eigenvalue_quadratic(int(mu), int(l)).unwrap();
        let x0: Vec<Rational> = zigzag_start(&int(mu), &int(l)).iter().map(|v| v * int(l)).collect();
        let trace = run(&AlgorithmSpec::gd_els(), &f, &x0, 6, &RunOptions::default()).unwrap();
        let bound = els_rate(mu, l);
        for k in 0..6 {
            assert_eq!(&trace.values[k + 1] / &trace.values[k], bound, "(mu, L) = ({mu}, {l}), step {k}");
        }
        let report = check_against_bound(&trace, to_f64(&bound), MetricKind::ObjectiveAccuracy, 1e-10);
        assert!(report.passed);
        assert!((report.max_ratio.unwrap() - to_f64(&bound)).abs() < 1e-10);
    }
}

#[test]
fn zigzag_in_floating_point_matches_to_1e_10() {
    let f = two_eigenvalue_quadratic(1.0, 10.0).unwrap();
    let trace = run(&AlgorithmSpec::gd_els(), &f, &[10.0, 1.0], 10, &RunOptions::default()).unwrap();
    let report = check_against_bound(&trace, 81.0 / 121.0, MetricKind::ObjectiveAccuracy, 1e-10);
    assert_eq!(report.ratios.len(), 10);
    for (_, r) in &report.ratios {
        assert!((r - 81.0 / 121.0).abs() < 1e-10);
    }
}

#[test]
fn proximal_exact_search_is_tight_with_zero_nonsmooth_part() {
    let (mu, l) = (1, 10);
    let f = TestFunction::composite(vec![int(mu), int(l)], vec![int(0), int(0)], int(0)).unwrap();
    let trace = run(&AlgorithmSpec::pgm_els(), &f, &[int(10), int(1)], 5, &RunOptions::default()).unwrap();
    for k in 0..5 {
        assert_eq!(&trace.values[k + 1] / &trace.values[k], els_rate(mu, l));
    }
}

#[test]
fn constant_step_attains_the_contraction_on_a_one_dimensional_quadratic() {
    let class = FunctionClass::smooth(int(1), int(10)).unwrap();
    for gamma in [rat(1, 20), rat(2, 11), rat(19, 100)] {
        let rho = step_contraction(&class, &gamma);
        let worst = if (int(1) - &gamma * &class.mu).abs() >= (int(1) - &gamma * &class.l).abs() {
            class.mu.clone()
        } else {
            class.l.clone()
        };
        let f = TestFunction::quadratic(vec![worst], vec![int(0)]).unwrap();
        let spec = AlgorithmSpec::gd_constant(gamma.clone());
        let trace = run(&spec, &f, &[int(1)], 3, &RunOptions::default()).unwrap();
        let report = check_against_bound(&trace, to_f64(&(&rho * &rho)), MetricKind::DistanceSquared, 1e-12);
        assert!(report.passed);
        for k in 0..3 {
            let d = |i: usize| &trace.points[i][0] * &trace.points[i][0];
            assert_eq!(d(k + 1) / d(k), &rho * &rho, "gamma = {gamma}");
        }
    }
}

#[test]
fn descent_methods_pass_the_trivial_bound() {
    let f = TestFunction::quadratic(vec![1.0, 3.0, 10.0], vec![0.5, -1.0, 2.0]).unwrap();
    for spec in [
        AlgorithmSpec::gd_els(),
        AlgorithmSpec::gd_armijo(rat(1, 10), rat(1, 4), int(2)),
        AlgorithmSpec::gd_goldstein(int(0), rat(1, 4)),
        AlgorithmSpec::gd_wolfe(rat(1, 4), rat(3, 4)),
    ] {
        let trace = run(&spec, &f, &[3.0, -2.0, 1.0], 8, &RunOptions::default()).unwrap();
        assert!(check_against_bound(&trace, 1.0, MetricKind::ObjectiveAccuracy, 0.0).passed);
        assert!(trace.values.windows(2).all(|w| w[1] <= w[0]));
    }
}

#[test]
fn proximal_constant_step_respects_the_gradient_norm_bound() {
    let class = FunctionClass::composite(int(1), int(10)).unwrap();
    let gamma = rat(2, 11);
    let spec = AlgorithmSpec::pgm_constant(gamma.clone());
    let f = TestFunction::composite(vec![int(1), rat(7, 2), int(10)], vec![int(2), rat(-1, 3), rat(1, 5)], rat(1, 2))
        .unwrap();
    f.check_class(&class).unwrap();
    let trace = run(&spec, &f, &[int(-3), int(4), rat(1, 7)], 6, &RunOptions::default()).unwrap();
    let bound = rate_formula(spec.kind, &class, &spec).unwrap();
    let report = check_against_bound(&trace, to_f64(&bound), MetricKind::GradientNormSquared, 1e-12);
    assert!(report.passed, "{report:?}");
}

#[test]
fn armijo_ratios_respect_the_bound() {
    let class = FunctionClass::smooth(int(1), int(10)).unwrap();
    let spec = AlgorithmSpec::gd_armijo(int(0), rat(1, 4), int(2));
    let bound = rate_formula(spec.kind, &class, &spec).unwrap();
    assert_eq!(bound, int(1) - int(4) * rat(1, 4) * rat(3, 4) / int(20));
    let f = two_eigenvalue_quadratic(1.0, 10.0).unwrap();
    let trace = run(&spec, &f, &[10.0, 1.0], 20, &RunOptions::default()).unwrap();
    let report = check_against_bound(&trace, to_f64(&bound), MetricKind::ObjectiveAccuracy, 1e-12);
    assert!(report.passed, "{report:?}");
}

/// As the condition number and the backtracking factor approach one with
/// `epsilon = 1/2`, a single Armijo step lands (almost) on the minimizer.
#[test]
fn armijo_single_step_ratio_vanishes_in_the_limit() {
    let mut previous = f64::INFINITY;
    for gap in [1e-1, 1e-2, 1e-3] {
        let l = 1.0 + gap;
        let eta = 1.0 + gap;
        let spec = AlgorithmSpec::gd_armijo(
            int(0),
            rat(1, 2),
            Rational::from_float(eta).unwrap(),
        );
        let f = TestFunction::quadratic(vec![1.0, l], vec![0.0, 0.0]).unwrap();
        let opts = RunOptions { initial_step: Some(2.0 / l), max_trials: 10_000, ..RunOptions::default() };
        let trace = run(&spec, &f, &[1.0, 1.0], 1, &opts).unwrap();
        let ratio = trace.values[1] / trace.values[0];
        assert!(ratio < previous);
        previous = ratio;
    }
    assert!(previous < 1e-5, "ratio {previous}");
}

#[test]
fn corrupted_gradient_is_flagged() {
    let class = FunctionClass::smooth(int(1), int(10)).unwrap();
    let spec = AlgorithmSpec::gd_els();
    let f = TestFunction::quadratic(vec![int(1), int(4), int(10)], vec![int(0), int(1), int(-1)]).unwrap();
    let mut trace = run(&spec, &f, &[int(2), int(-1), int(3)], 1, &RunOptions::default()).unwrap();
    let problem = build_default(&class, &spec).unwrap();
    assert!(constraint_audit(&trace, &problem, 0.0).unwrap().passed());
    // scaling preserves both orthogonality equalities, so only the
    // interpolation conditions can notice
    trace.gradients[1] = trace.gradients[1].iter().map(|g| g * int(30)).collect();
    let audit = constraint_audit(&trace, &problem, 0.0).unwrap();
    let flagged: Vec<String> = audit.violations().into_iter().map(|(_, name)| name).collect();
    assert!(!flagged.is_empty());
    // h2 and h5 pair x_k with x_star and never see g_k1
    assert!(flagged.iter().all(|n| n.starts_with('h') && n != "h2" && n != "h5"), "{flagged:?}");
}

#[test]
fn csv_export_columns() {
    let f = two_eigenvalue_quadratic(1.0, 10.0).unwrap();
    let trace = run(&AlgorithmSpec::gd_els(), &f, &[10.0, 1.0], 3, &RunOptions::default()).unwrap();
    let csv = trace_csv(&trace, MetricKind::ObjectiveAccuracy);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("step,f,dist_sq,grad_sq,gamma,ratio"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first.len(), 6);
    let ratio: f64 = first[5].parse().unwrap();
    assert!((ratio - 81.0 / 121.0).abs() < 1e-9);
    assert_eq!(first[1].parse::<f64>().unwrap(), 55.0);
}
