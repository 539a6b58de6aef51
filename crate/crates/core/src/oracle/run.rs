//! Runs the catalogued algorithms on a [`TestFunction`] and records
//! everything the scenario constraints refer to.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::function::{is_zero_vec, Optimum, TestFunction};
use super::OracleError;
use crate::numeric::{dot, int, Numeric, Rational};
use crate::scenarios::{AlgorithmKind, AlgorithmSpec};

/// Inexact search direction `d = -g + e` with `||e|| <= delta ||g||`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseModel {
    /// `d = -(1 - delta) g`; exact in rational arithmetic.
    Shrink,
    /// `e = delta ||g|| u` with `u` uniform on the sphere.
    RandomUnit { seed: u64 },
    /// `e = delta ||g|| sign(g_i) e_i` on the largest gradient entry: the
    /// axis-aligned error that removes the most descent.
    WorstAxis,
}

/// How the proximal exact line search minimizes `F` along the prox path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProxSearch {
    /// The path is piecewise linear in `gamma` for an l1 term, so `F` is
    /// piecewise quadratic: minimize each piece in closed form.
    Piecewise,
    /// Golden-section search on `[0, 4/mu]`.
    GoldenSection,
}

#[derive(Debug, Clone)]
pub struct RunOptions<T> {
    pub noise: NoiseModel,
    pub prox_search: ProxSearch,
    /// First trial step of the backtracking searches; `10 / L_max` if unset.
    pub initial_step: Option<T>,
    /// Cap on trial steps per line search.
    pub max_trials: usize,
    /// Interval tolerance of the golden-section search.
    pub golden_tol: f64,
}

impl<T> Default for RunOptions<T> {
    fn default() -> Self {
        Self {
            noise: NoiseModel::Shrink,
            prox_search: ProxSearch::Piecewise,
            initial_step: None,
            max_trials: 200,
            golden_tol: 1e-12,
        }
    }
}

/// Iterates `x_0 .. x_N` with their data. Vectors indexed by step have
/// length `N`; those indexed by iterate have length `N + 1`.
#[derive(Debug, Clone)]
pub struct RunTrace<T> {
    pub kind: AlgorithmKind,
    pub points: Vec<Vec<T>>,
    /// Total objective `F(x_k)`.
    pub values: Vec<T>,
    /// Smooth part `a(x_k)` (equals `values` for smooth functions).
    pub smooth_values: Vec<T>,
    /// Nonsmooth part `b(x_k)` (zero for smooth functions).
    pub nonsmooth_values: Vec<T>,
    /// `grad a(x_k)`
    pub gradients: Vec<Vec<T>>,
    /// `s_k in d b(x_k)`: the prox subgradient for `k >= 1`, the one
    /// nearest to `-grad a(x_0)` at `k = 0`; zero for smooth functions.
    pub subgradients: Vec<Vec<T>>,
    pub steps: Vec<T>,
    /// Search directions actually used (`-g_k` without noise).
    pub directions: Vec<Vec<T>>,
    pub optimum: Optimum<T>,
}

impl<T: Numeric> RunTrace<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn step_count(&self) -> usize {
        self.steps.len()
    }
}

fn axpy<T: Numeric>(x: &[T], a: &T, d: &[T]) -> Vec<T> {
    x.iter().zip(d).map(|(xi, di)| xi.clone() + a.clone() * di.clone()).collect()
}

fn neg<T: Numeric>(v: &[T]) -> Vec<T> {
    v.iter().map(|x| -x.clone()).collect()
}

fn norm_sq<T: Numeric>(v: &[T]) -> T {
    dot(v, v)
}

fn noisy_direction<T: Numeric>(g: &[T], delta: &T, noise: NoiseModel, rng: &mut ChaCha8Rng) -> Result<Vec<T>, OracleError> {
    if delta.is_zero() || is_zero_vec(g) {
        return Ok(neg(g));
    }
    let one = T::one();
    match noise {
        NoiseModel::Shrink => Ok(g.iter().map(|gi| -(one.clone() - delta.clone()) * gi.clone()).collect()),
        NoiseModel::RandomUnit { .. } | NoiseModel::WorstAxis => {
            let gnorm = norm_sq(g).try_sqrt().ok_or(OracleError::NeedsSquareRoot)?;
            let radius = delta.clone() * gnorm;
            let u: Vec<T> = match noise {
                NoiseModel::WorstAxis => {
                    let (i, _) = g.iter().enumerate().fold((0, T::zero()), |(bi, bv), (i, gi)| {
                        if gi.abs() > bv {
                            (i, gi.abs())
                        } else {
                            (bi, bv)
                        }
                    });
                    let mut u = vec![T::zero(); g.len()];
                    u[i] = if g[i].strictly_negative() { -one.clone() } else { one.clone() };
                    u
                }
                _ => {
                    let raw: Vec<f64> = loop {
                        let v: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                        let n2: f64 = v.iter().map(|x| x * x).sum();
                        if n2 > 1e-6 && n2 <= 1.0 {
                            let n = n2.sqrt();
                            break v.into_iter().map(|x| x / n).collect();
                        }
                    };
                    raw.into_iter()
                        .map(|x| T::from_rational(&Rational::from_float(x).expect("finite")))
                        .collect()
                }
            };
            Ok(g.iter().zip(&u).map(|(gi, ui)| -gi.clone() + radius.clone() * ui.clone()).collect())
        }
    }
}

struct Searcher<'a, T> {
    f: &'a TestFunction<T>,
    opts: &'a RunOptions<T>,
    kind: AlgorithmKind,
}

impl<T: Numeric> Searcher<'_, T> {
    fn initial_step(&self) -> T {
        self.opts
            .initial_step
            .clone()
            .unwrap_or_else(|| T::from_i64(10) / self.f.largest_curvature())
    }

    fn failed(&self, what: &str, step: usize) -> OracleError {
        OracleError::LineSearch {
            kind: self.kind,
            step,
            detail: format!("{what} after {} trials", self.opts.max_trials),
        }
    }

    /// Largest step (up to a factor eta) with
    /// `f(x + gamma d) <= f(x) - eps gamma ||d||^2`, so that `eta gamma`
    /// violates it.
    fn armijo(&self, x: &[T], d: &[T], eps: &T, eta: &T, step: usize) -> Result<T, OracleError> {
        let fx = self.f.value(x);
        let dd = norm_sq(d);
        let accepts = |gamma: &T| self.f.value(&axpy(x, gamma, d)) <= fx.clone() - eps.clone() * gamma.clone() * dd.clone();
        let mut gamma = self.initial_step();
        if accepts(&gamma) {
            // grow until the next trial fails, keeping the last success
            for _ in 0..self.opts.max_trials {
                let next = gamma.clone() * eta.clone();
                if !accepts(&next) {
                    return Ok(gamma);
                }
                gamma = next;
            }
            return Err(self.failed("no rejected step while growing", step));
        }
        for _ in 0..self.opts.max_trials {
            gamma = gamma / eta.clone();
            if accepts(&gamma) {
                return Ok(gamma);
            }
        }
        Err(self.failed("no accepted step while backtracking", step))
    }

    /// Bracketing search for a step passing `too_long` and `too_short`
    /// tests; `too_long(gamma)` means shrink, `too_short(gamma)` means grow.
    fn bracket(
        &self,
        step: usize,
        too_long: impl Fn(&T) -> bool,
        too_short: impl Fn(&T) -> bool,
    ) -> Result<T, OracleError> {
        let two = T::from_i64(2);
        let mut lo = T::zero();
        let mut hi: Option<T> = None;
        let mut gamma = self.initial_step();
        for _ in 0..self.opts.max_trials {
            if too_long(&gamma) {
                hi = Some(gamma.clone());
            } else if too_short(&gamma) {
                lo = gamma.clone();
            } else {
                return Ok(gamma);
            }
            gamma = match &hi {
                Some(h) => (lo.clone() + h.clone()) / two.clone(),
                None => gamma * two.clone(),
            };
        }
        Err(self.failed("bracketing did not terminate", step))
    }

    fn goldstein(&self, x: &[T], d: &[T], eps: &T, step: usize) -> Result<T, OracleError> {
        let fx = self.f.value(x);
        let dd = norm_sq(d);
        let one = T::one();
        let change = |gamma: &T| self.f.value(&axpy(x, gamma, d)) - fx.clone();
        self.bracket(
            step,
            |g| change(g) > -(eps.clone() * g.clone() * dd.clone()),
            |g| change(g) < -((one.clone() - eps.clone()) * g.clone() * dd.clone()),
        )
    }

    fn wolfe(&self, x: &[T], g: &[T], c1: &T, c2: &T, step: usize) -> Result<T, OracleError> {
        let fx = self.f.value(x);
        let gg = norm_sq(g);
        let d = neg(g);
        self.bracket(
            step,
            |gamma| self.f.value(&axpy(x, gamma, &d)) > fx.clone() - c1.clone() * gamma.clone() * gg.clone(),
            |gamma| dot(&self.f.smooth_gradient(&axpy(x, gamma, &d)), g) > c2.clone() * gg.clone(),
        )
    }

    /// Exact minimizer of `F(prox_{gamma b}(x - gamma r))` over `gamma >= 0`;
    /// the smallest one on ties.
    fn piecewise(&self, x: &[T], r: &[T]) -> T {
        let zero = T::zero();
        let two = T::from_i64(2);
        let w = self.f.l1_weight().cloned().unwrap_or_else(T::zero);
        // coordinate i changes regime where |x_i - gamma r_i| = gamma w
        let mut breaks: Vec<T> = x
            .iter()
            .zip(r)
            .flat_map(|(xi, ri)| [ri.clone() + w.clone(), ri.clone() - w.clone()].map(|d| (xi.clone(), d)))
            .filter(|(_, d)| !d.is_zero())
            .map(|(xi, d)| xi / d)
            .filter(|g| g.strictly_positive())
            .collect();
        breaks.push(zero.clone());
        breaks.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
        breaks.dedup();
        let phi = |g: &T| self.f.value(&self.f.prox(&axpy(x, &(-g.clone()), r), g));
        let mut best = (zero.clone(), phi(&zero));
        // ties go to the smallest step; in floating point a candidate must
        // win by more than rounding, or a flat tail would capture the search
        let rel = T::from_rational(&Rational::from_float(8.0 * f64::EPSILON).expect("finite"));
        let slack = |v: &T| if T::EXACT { T::zero() } else { rel.clone() * (T::one() + v.abs()) };
        for (i, lo) in breaks.iter().enumerate() {
            let hi = breaks.get(i + 1);
            let probe = match hi {
                Some(h) => (lo.clone() + h.clone()) / two.clone(),
                None => lo.clone() + T::one(),
            };
            // on this piece prox(x - gamma r) = p + gamma q with fixed signs
            let (mut quad, mut lin) = (zero.clone(), zero.clone());
            for (k, (xi, ri)) in x.iter().zip(r).enumerate() {
                let y = xi.clone() - probe.clone() * ri.clone();
                let cut = probe.clone() * w.clone();
                let sign = if y > cut {
                    T::one()
                } else if y < -cut {
                    -T::one()
                } else {
                    continue;
                };
                let q = -(ri.clone() + sign.clone() * w.clone());
                let lam = self.f.spectrum()[k].clone();
                quad = quad + lam.clone() * q.clone() * q.clone() / two.clone();
                lin = lin + lam * q.clone() * (xi.clone() - self.f.shift()[k].clone()) + sign * w.clone() * q;
            }
            let candidate = if quad.strictly_positive() {
                let mut g = -lin / (two.clone() * quad);
                if g < *lo {
                    g = lo.clone();
                }
                match hi {
                    Some(h) if g > *h => h.clone(),
                    _ => g,
                }
            } else if lin.strictly_negative() {
                // a decreasing linear piece cannot be unbounded on a bounded-below F
                hi.cloned().unwrap_or_else(|| lo.clone())
            } else {
                lo.clone()
            };
            let value = phi(&candidate);
            if value < best.1.clone() - slack(&best.1) {
                best = (candidate, value);
            }
        }
        best.0
    }

    /// Minimizes `F(prox_{gamma b}(x - gamma r))` over `gamma in [0, 4/mu]`.
    fn golden_section(&self, x: &[T], r: &[T]) -> T {
        let phi = |gamma: &T| {
            let y = axpy(x, &(-gamma.clone()), r);
            self.f.value(&self.f.prox(&y, gamma))
        };
        let ratio = T::from_rational(&Rational::from_float(0.618_033_988_749_894_9).expect("finite"));
        let tol = T::from_rational(&Rational::from_float(self.opts.golden_tol).expect("finite"));
        let mut a = T::zero();
        let mut b = T::from_i64(4) / self.f.smallest_curvature();
        let mut c = b.clone() - ratio.clone() * (b.clone() - a.clone());
        let mut d = a.clone() + ratio.clone() * (b.clone() - a.clone());
        let (mut fc, mut fd) = (phi(&c), phi(&d));
        while b.clone() - a.clone() > tol {
            if fc <= fd {
                b = d;
                d = c.clone();
                fd = fc;
                c = b.clone() - ratio.clone() * (b.clone() - a.clone());
                fc = phi(&c);
            } else {
                a = c;
                c = d.clone();
                fc = fd;
                d = a.clone() + ratio.clone() * (b.clone() - a.clone());
                fd = phi(&d);
            }
        }
        (a + b) / T::from_i64(2)
    }
}

/// Runs `steps` iterations of the algorithm described by `spec` from `x0`.
pub fn run<T: Numeric>(
    spec: &AlgorithmSpec,
    f: &TestFunction<T>,
    x0: &[T],
    steps: usize,
    opts: &RunOptions<T>,
) -> Result<RunTrace<T>, OracleError> {
    if steps == 0 {
        return Err(OracleError::InvalidRun("at least one step is required".into()));
    }
    if x0.len() != f.dim() {
        return Err(OracleError::InvalidRun(format!("x0 has dimension {}, expected {}", x0.len(), f.dim())));
    }
    if x0.iter().any(|v| !v.as_f64().is_finite()) {
        return Err(OracleError::InvalidRun("x0 is not finite".into()));
    }
    if spec.kind.is_composite() != f.is_composite() {
        return Err(OracleError::InvalidRun(format!(
            "{} needs a {} test function",
            spec.kind,
            if spec.kind.is_composite() { "composite" } else { "smooth" }
        )));
    }
    let p = |r: &Rational| T::from_rational(r);
    let searcher = Searcher { f, opts, kind: spec.kind };
    let mut rng = ChaCha8Rng::seed_from_u64(match opts.noise {
        NoiseModel::RandomUnit { seed } => seed,
        _ => 0,
    });

    let mut x = x0.to_vec();
    let g0 = f.smooth_gradient(&x);
    let mut trace = RunTrace {
        kind: spec.kind,
        values: vec![f.value(&x)],
        smooth_values: vec![f.smooth_value(&x)],
        nonsmooth_values: vec![f.nonsmooth_value(&x)],
        subgradients: vec![f.nearest_subgradient(&x, &g0)],
        gradients: vec![g0],
        points: vec![x.clone()],
        steps: Vec::with_capacity(steps),
        directions: Vec::with_capacity(steps),
        optimum: f.minimizer(),
    };

    for k in 0..steps {
        let g = trace.gradients[k].clone();
        let (gamma, direction, next, sbar) = match spec.kind {
            AlgorithmKind::GdConstant
            | AlgorithmKind::GdEls
            | AlgorithmKind::GdArmijo
            | AlgorithmKind::GdGoldstein
            | AlgorithmKind::GdWolfe => {
                let d = match spec.kind {
                    AlgorithmKind::GdArmijo | AlgorithmKind::GdGoldstein => noisy_direction(&g, &p(&spec.delta()), opts.noise, &mut rng)?,
                    _ => neg(&g),
                };
                let gamma = if is_zero_vec(&d) {
                    T::zero()
                } else {
                    match spec.kind {
                        AlgorithmKind::GdConstant => p(spec.gamma()?),
                        AlgorithmKind::GdEls => norm_sq(&g) / dot(&g, &f.hessian_apply(&g)),
                        AlgorithmKind::GdArmijo => searcher.armijo(&x, &d, &p(spec.epsilon()?), &p(spec.eta()?), k)?,
                        AlgorithmKind::GdGoldstein => searcher.goldstein(&x, &d, &p(spec.epsilon()?), k)?,
                        _ => searcher.wolfe(&x, &g, &p(spec.c1()?), &p(spec.c2()?), k)?,
                    }
                };
                let next = axpy(&x, &gamma, &d);
                (gamma, d, next, None)
            }
            AlgorithmKind::PgmConstant | AlgorithmKind::PgmEls => {
                let gamma = if spec.kind == AlgorithmKind::PgmConstant {
                    p(spec.gamma()?)
                } else if f.l1_weight().is_some_and(|w| !w.is_zero()) {
                    match opts.prox_search {
                        ProxSearch::Piecewise => searcher.piecewise(&x, &g),
                        ProxSearch::GoldenSection => searcher.golden_section(&x, &g),
                    }
                } else if is_zero_vec(&g) {
                    T::zero()
                } else {
                    norm_sq(&g) / dot(&g, &f.hessian_apply(&g))
                };
                let y = axpy(&x, &(-gamma.clone()), &g);
                let next = f.prox(&y, &gamma);
                // sbar = (y - x_{k+1}) / gamma lies in d b(x_{k+1})
                let sbar = if gamma.is_zero() {
                    f.nearest_subgradient(&next, &f.smooth_gradient(&next))
                } else {
                    y.iter().zip(&next).map(|(yi, ni)| (yi.clone() - ni.clone()) / gamma.clone()).collect()
                };
                let d = next.iter().zip(&x).map(|(a, b)| a.clone() - b.clone()).collect();
                (gamma, d, next, Some(sbar))
            }
        };
        x = next;
        let gx = f.smooth_gradient(&x);
        trace.subgradients.push(sbar.unwrap_or_else(|| vec![T::zero(); x.len()]));
        trace.values.push(f.value(&x));
        trace.smooth_values.push(f.smooth_value(&x));
        trace.nonsmooth_values.push(f.nonsmooth_value(&x));
        trace.gradients.push(gx);
        trace.points.push(x.clone());
        trace.steps.push(gamma);
        trace.directions.push(direction);
    }
    Ok(trace)
}

/// `x0` of the classical zig-zag: `(1/mu, 1/L)` up to scale, which makes
/// steepest descent with exact steps attain the worst ratio every step.
pub fn zigzag_start<T: Numeric>(mu: &T, l: &T) -> Vec<T> {
    vec![T::one() / mu.clone(), T::one() / l.clone()]
}

/// Default trial step expressed as an exact rational, for reporting.
pub fn default_initial_step(l_max: &Rational) -> Rational {
    int(10) / l_max
}
