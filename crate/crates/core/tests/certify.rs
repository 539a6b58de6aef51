//! Exact verification of the catalogued certificates.

mod common;

use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{class_for, ALL_KINDS};
use sos_rates::certify::{
    catalog, compare_armijo, rate_formula, verify_psd_both, verify_scenario, verify_values, AnalyticCertificate,
    CertifyError,
};
use sos_rates::numeric::{int, rat, Rational};
use sos_rates::polyform::CoefficientKey;
use sos_rates::scenarios::{build_default, noise_factor, AlgorithmKind, AlgorithmSpec, FunctionClass};

fn smooth(mu: i64, l: i64) -> FunctionClass {
    FunctionClass::smooth(int(mu), int(l)).unwrap()
}

fn composite(mu: i64, l: i64) -> FunctionClass {
    FunctionClass::composite(int(mu), int(l)).unwrap()
}

fn pick(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> i64 {
    rng.gen_range(lo..=hi)
}

/// A random admissible rational instance of `kind`.
fn draw(kind: AlgorithmKind, rng: &mut ChaCha8Rng) -> (FunctionClass, AlgorithmSpec) {
    let mu = rat(pick(rng, 1, 9), pick(rng, 1, 4));
    let l = &mu + rat(pick(rng, 1, 60), pick(rng, 1, 5));
    let frac = |rng: &mut ChaCha8Rng| {
        let d = pick(rng, 2, 20);
        rat(pick(rng, 1, d - 1), d)
    };
    let spec = match kind {
        AlgorithmKind::GdEls => AlgorithmSpec::gd_els(),
        AlgorithmKind::PgmEls => AlgorithmSpec::pgm_els(),
        AlgorithmKind::GdConstant => AlgorithmSpec::gd_constant(int(2) / &l * frac(rng)),
        AlgorithmKind::PgmConstant => AlgorithmSpec::pgm_constant(int(2) / &l * frac(rng)),
        AlgorithmKind::GdArmijo => {
            let delta = rat(pick(rng, 0, 18), 20);
            let epsilon = noise_factor(&delta) * frac(rng);
            AlgorithmSpec::gd_armijo(delta, epsilon, int(1) + rat(pick(rng, 1, 30), 8))
        }
        AlgorithmKind::GdGoldstein => {
            // delta < sqrt(5) - 2 ~ 0.236
            let delta = rat(pick(rng, 0, 23), 100);
            let lower = int(1) - noise_factor(&delta);
            let epsilon = &lower + (rat(1, 2) - &lower) * frac(rng);
            AlgorithmSpec::gd_goldstein(delta, epsilon)
        }
        AlgorithmKind::GdWolfe => {
            let c1 = frac(rng);
            let c2 = &c1 + (int(1) - &c1) * frac(rng);
            AlgorithmSpec::gd_wolfe(c1, c2)
        }
    };
    (class_for(kind, mu, l), spec)
}

#[test]
fn every_scenario_verifies_at_random_rational_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for kind in ALL_KINDS {
        for _ in 0..24 {
            let (class, spec) = draw(kind, &mut rng);
            spec.validate(&class).unwrap();
            let report = verify_scenario(&class, &spec).unwrap();
            assert!(report.passed(), "{}", report.to_text());
            assert!(report.values.sigma.iter().all(|s| !s.is_negative()));
            assert!(report.values.gram.is_symmetric());
        }
    }
}

#[test]
fn perturbed_multiplier_surfaces_in_its_own_coefficient() {
    let class = smooth(1, 10);
    let spec = AlgorithmSpec::gd_els();
    let problem = build_default(&class, &spec).unwrap();
    let mut values = catalog("gd_els").unwrap().evaluate(&class, &spec).unwrap();
    assert_eq!(values.theta[1], rat(-2, 11));
    values.theta[1] += rat(1, 1000);
    let report = verify_values(&values, &problem).unwrap();
    assert!(!report.holds);
    assert_eq!(report.discrepancies.len(), 1, "{:?}", report.discrepancies);
    assert_eq!(report.discrepancies[0].0, CoefficientKey::pair("g_k", "g_k1"));
}

#[test]
fn wolfe_identity_and_rate() {
    let class = smooth(1, 4);
    let spec = AlgorithmSpec::gd_wolfe(rat(1, 4), rat(1, 2));
    let report = verify_scenario(&class, &spec).unwrap();
    assert!(report.passed());
    assert!(report.identity.discrepancies.is_empty());
    assert_eq!(report.values.t, rat(15, 16));
}

#[test]
fn gd_els_catalog_values() {
    let values = catalog("gd_els").unwrap().evaluate(&smooth(1, 10), &AlgorithmSpec::gd_els()).unwrap();
    assert_eq!(values.t, rat(81, 121));
    assert_eq!(values.theta, vec![int(-1), rat(-2, 11)]);
    let report = verify_scenario(&smooth(1, 10), &AlgorithmSpec::gd_els()).unwrap();
    assert!(report.identity.holds && report.identity.discrepancies.is_empty());
}

#[test]
fn pgm_els_multiplier_on_the_step_pair() {
    let values = catalog("pgm_els").unwrap().evaluate(&composite(1, 3), &AlgorithmSpec::pgm_els()).unwrap();
    assert_eq!(values.sigma[11], rat(3, 4));
    assert_eq!(values.t, rat(1, 4));
}

#[test]
fn explicit_sos_form_matches_the_gram_block() {
    for l in [4, 9] {
        let report = verify_scenario(&smooth(1, l), &AlgorithmSpec::gd_els()).unwrap();
        assert_eq!(report.sos_matches, Some(true), "L = {l}");
    }
}

#[test]
fn gram_blocks_are_psd_by_both_methods() {
    let values = catalog("gd_els").unwrap().evaluate(&smooth(1, 3), &AlgorithmSpec::gd_els()).unwrap();
    assert_eq!(values.gram.rows(), 5);
    let (ldl, charpoly) = verify_psd_both(&values.gram).unwrap();
    assert!(ldl.is_psd && charpoly.is_psd);

    for l in [3, 10] {
        let values = catalog("pgm_els").unwrap().evaluate(&composite(1, l), &AlgorithmSpec::pgm_els()).unwrap();
        assert_eq!(values.gram.rows(), 9);
        let (ldl, charpoly) = verify_psd_both(&values.gram).unwrap();
        assert!(ldl.is_psd && charpoly.is_psd, "L = {l}");
        let report = verify_scenario(&composite(1, l), &AlgorithmSpec::pgm_els()).unwrap();
        assert!(report.passed(), "{}", report.to_text());
    }
}

#[test]
fn rate_formula_special_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let mu = rat(pick(&mut rng, 1, 5), 1);
        let l = &mu + int(pick(&mut rng, 1, 30));
        let class = FunctionClass::smooth(mu.clone(), l.clone()).unwrap();
        let eps = rat(pick(&mut rng, 1, 19), 20);
        let eta = int(1) + rat(pick(&mut rng, 1, 10), 4);
        let armijo = rate_formula(AlgorithmKind::GdArmijo, &class, &AlgorithmSpec::gd_armijo(int(0), eps.clone(), eta.clone())).unwrap();
        assert_eq!(armijo, int(1) - int(4) * &mu * &eps * (int(1) - &eps) / (&eta * &l));

        let eps = rat(pick(&mut rng, 1, 49), 100);
        let goldstein = rate_formula(AlgorithmKind::GdGoldstein, &class, &AlgorithmSpec::gd_goldstein(int(0), eps.clone())).unwrap();
        assert_eq!(goldstein, int(1) - int(4) * &mu * &eps * &eps / &l);
    }
    let gd = rate_formula(AlgorithmKind::GdConstant, &smooth(1, 10), &AlgorithmSpec::gd_constant(rat(2, 11))).unwrap();
    assert_eq!(gd, rat(81, 121));
}

#[test]
fn rate_formula_rejects_inadmissible_parameters() {
    let err = rate_formula(AlgorithmKind::GdConstant, &smooth(1, 10), &AlgorithmSpec::gd_constant(rat(1, 4))).unwrap_err();
    assert!(err.to_string().contains("gamma"), "{err}");
    let err = rate_formula(AlgorithmKind::GdWolfe, &smooth(1, 10), &AlgorithmSpec::gd_wolfe(rat(1, 2), rat(1, 4))).unwrap_err();
    assert!(err.to_string().contains("c1"), "{err}");
}

#[test]
fn armijo_comparison_examples() {
    let c = compare_armijo(0.25, 2.0, 10.0).unwrap();
    assert!((c.t_new - 0.9625).abs() < 1e-15);
    assert!((c.t_ly.unwrap() - 0.975).abs() < 1e-15);
    assert_eq!(c.new_below_ly, Some(true));
    assert_eq!(c.t_nemi, None);

    let half = compare_armijo(0.5, 1.5, 4.0).unwrap();
    assert_eq!(half.t_ly, None);
    assert_eq!(half.new_at_most_nemi, Some(true));

    let limit = compare_armijo(0.5, 1.0 + 1e-6, 1.0 + 1e-6).unwrap();
    assert!(limit.t_new.abs() < 1e-4);
    assert!((limit.t_nemi.unwrap() - 0.5).abs() < 1e-4);
}

#[test]
fn unknown_scenario_lists_the_catalog() {
    let err = catalog("heavy_ball").unwrap_err();
    assert!(matches!(err, CertifyError::UnknownScenario { .. }));
    let text = err.to_string();
    for kind in ALL_KINDS {
        assert!(text.contains(kind.key()), "{text}");
        assert_eq!(AnalyticCertificate::for_kind(kind).key(), kind.key());
    }
}

#[test]
fn rates_are_contractions() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for kind in ALL_KINDS {
        for _ in 0..10 {
            let (class, spec) = draw(kind, &mut rng);
            let t: Rational = rate_formula(kind, &class, &spec).unwrap();
            assert!(t >= int(0) && t < int(1), "{kind}: {t}");
        }
    }
}
