//! Randomized oracle batteries: runs on random class members, each audited
//! against its scenario constraints and certified contraction factor.

use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sos_rates::certify::rate_formula;
use sos_rates::numeric::{int, rat, to_f64, Numeric, Rational};
use sos_rates::oracle::{check_against_bound, constraint_audit, run, NoiseModel, RunOptions, TestFunction};
use sos_rates::scenarios::{build_default, AlgorithmKind, AlgorithmSpec, FunctionClass};

pub const RUNS: usize = 100;
const STEPS: usize = 3;
/// Slack allowed on every measured contraction ratio.
pub const BOUND_TOL: f64 = 1e-8;

fn random_rational(rng: &mut ChaCha8Rng, lo: i64, hi: i64, den: i64) -> Rational {
    rat(rng.gen_range(lo * den..=hi * den), den)
}

fn random_class(rng: &mut ChaCha8Rng, composite: bool) -> FunctionClass {
    let mu = [rat(1, 2), int(1), int(2)][rng.gen_range(0..3)].clone();
    let kappa = rat(rng.gen_range(3..=40), 2);
    FunctionClass::new(mu.clone(), mu * kappa, composite).unwrap()
}

/// Spectrum containing both endpoints of the class (when the dimension allows)
/// plus random interior curvatures.
fn random_member(rng: &mut ChaCha8Rng, class: &FunctionClass, l1: Option<Rational>) -> TestFunction<Rational> {
    let dim = rng.gen_range(1..=4);
    let spectrum: Vec<Rational> = (0..dim)
        .map(|i| match i {
            0 => class.l.clone(),
            1 => class.mu.clone(),
            _ => &class.mu + (&class.l - &class.mu) * rat(rng.gen_range(0..=8), 8),
        })
        .collect();
    let shift = (0..dim).map(|_| random_rational(rng, -3, 3, 4)).collect();
    let f = match l1 {
        Some(w) => TestFunction::composite(spectrum, shift, w),
        None => TestFunction::quadratic(spectrum, shift),
    }
    .unwrap();
    f.check_class(class).unwrap();
    f
}

fn to_float(f: &TestFunction<Rational>) -> TestFunction<f64> {
    let conv = |v: &[Rational]| v.iter().map(to_f64).collect::<Vec<_>>();
    match f.l1_weight() {
        Some(w) => TestFunction::composite(conv(f.spectrum()), conv(f.shift()), to_f64(w)).unwrap(),
        None => TestFunction::quadratic(conv(f.spectrum()), conv(f.shift())).unwrap(),
    }
}

fn random_spec(rng: &mut ChaCha8Rng, kind: AlgorithmKind, class: &FunctionClass) -> AlgorithmSpec {
    loop {
        let delta = [int(0), rat(1, 10), rat(1, 5)][rng.gen_range(0..3)].clone();
        let spec = match kind {
            AlgorithmKind::GdEls => AlgorithmSpec::gd_els(),
            AlgorithmKind::PgmEls => AlgorithmSpec::pgm_els(),
            AlgorithmKind::GdConstant => AlgorithmSpec::gd_constant(int(2) / &class.l * rat(rng.gen_range(1..20), 20)),
            AlgorithmKind::PgmConstant => AlgorithmSpec::pgm_constant(int(2) / &class.l * rat(rng.gen_range(1..20), 20)),
            AlgorithmKind::GdArmijo => {
                AlgorithmSpec::gd_armijo(delta, rat(rng.gen_range(1..10), 20), rat(rng.gen_range(11..40), 10))
            }
            AlgorithmKind::GdGoldstein => AlgorithmSpec::gd_goldstein(delta, rat(rng.gen_range(1..10), 20)),
            AlgorithmKind::GdWolfe => {
                let c1 = rat(rng.gen_range(1..9), 10);
                let c2 = &c1 + (int(1) - &c1) * rat(rng.gen_range(1..10), 10);
                AlgorithmSpec::gd_wolfe(c1, c2)
            }
        };
        if spec.validate(class).is_ok() {
            return spec;
        }
    }
}

fn random_start(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Rational> {
    (0..dim).map(|_| random_rational(rng, -5, 5, 3)).collect()
}

fn noise_for(run_index: usize) -> NoiseModel {
    match run_index % 3 {
        0 => NoiseModel::Shrink,
        1 => NoiseModel::RandomUnit { seed: run_index as u64 },
        _ => NoiseModel::WorstAxis,
    }
}

/// Totals over one battery.
#[derive(Debug, Default, Clone, Copy, PartialEq)]
pub struct BatteryOutcome {
    pub runs: usize,
    pub violations: usize,
    pub bound_failures: usize,
    /// Largest `ratio - bound` seen over all steps.
    pub worst_excess: f64,
}

impl BatteryOutcome {
    pub fn clean(&self) -> bool {
        self.violations == 0 && self.bound_failures == 0
    }

    fn add(&mut self, run: RunOutcome) {
        self.runs += 1;
        self.violations += run.violations;
        self.bound_failures += usize::from(!run.bound_passed);
        self.worst_excess = if self.runs == 1 { run.excess } else { self.worst_excess.max(run.excess) };
    }
}

struct RunOutcome {
    violations: usize,
    bound_passed: bool,
    excess: f64,
}

/// Audits one run and checks its ratios; violations of constraints listed in
/// `ignore` are not counted.
fn audit_run<T: Numeric>(
    f: &TestFunction<T>,
    x0: &[T],
    class: &FunctionClass,
    spec: &AlgorithmSpec,
    opts: &RunOptions<T>,
    tol: f64,
    ignore: &[&str],
) -> RunOutcome {
    let problem = build_default(class, spec).unwrap();
    let trace = run(spec, f, x0, STEPS, opts).unwrap();
    let audit = constraint_audit(&trace, &problem, tol).unwrap();
    let bound = rate_formula(spec.kind, class, spec).unwrap().to_f64().unwrap();
    let check = check_against_bound(&trace, bound, spec.kind.default_metric(), BOUND_TOL);
    if !check.passed {
        eprintln!("{spec:?} on {f:?} from {x0:?}: {check:?}");
    }
    let violations: Vec<_> = audit.violations().into_iter().filter(|(_, name)| !ignore.contains(&name.as_str())).collect();
    if !violations.is_empty() {
        eprintln!("{spec:?} on {f:?} from {x0:?}: {violations:?}");
    }
    RunOutcome {
        violations: violations.len(),
        bound_passed: check.passed,
        excess: check.max_ratio.map_or(f64::NEG_INFINITY, |r| r - bound),
    }
}

/// Rational runs with no noise. PGM-ELS runs use `b = 0`, where the exact
/// step keeps the line-search equalities.
pub fn exact_battery(kind: AlgorithmKind, seed: u64) -> BatteryOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut outcome = BatteryOutcome::default();
    for _ in 0..RUNS {
        let class = random_class(&mut rng, kind.is_composite());
        let l1 = kind.is_composite().then(|| random_rational(&mut rng, 0, 2, 4));
        let l1 = if kind == AlgorithmKind::PgmEls { l1.map(|_| Rational::zero()) } else { l1 };
        let f = random_member(&mut rng, &class, l1);
        let spec = random_spec(&mut rng, kind, &class);
        let x0 = random_start(&mut rng, f.dim());
        outcome.add(audit_run(&f, &x0, &class, &spec, &RunOptions::default(), 0.0, &[]));
    }
    outcome
}

/// Floating-point runs cycling through the noise models, audited to
/// `1e-9 (1 + |F(x_0)|)`.
pub fn float_battery(kind: AlgorithmKind, seed: u64, ignore: &[&str]) -> BatteryOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut outcome = BatteryOutcome::default();
    for i in 0..RUNS {
        let class = random_class(&mut rng, kind.is_composite());
        let l1 = kind.is_composite().then(|| random_rational(&mut rng, 0, 2, 4));
        let f = to_float(&random_member(&mut rng, &class, l1));
        let spec = random_spec(&mut rng, kind, &class);
        let x0: Vec<f64> = random_start(&mut rng, f.dim()).iter().map(to_f64).collect();
        let opts = RunOptions { noise: noise_for(i), ..RunOptions::default() };
        let scale = 1.0 + f.value(&x0).abs();
        outcome.add(audit_run(&f, &x0, &class, &spec, &opts, 1e-9 * scale, ignore));
    }
    outcome
}
