//! Constraint generation for each (function class, algorithm, metric) triple.
//!
//! Symbol conventions: for plain smooth problems the three points are
//! `k`, `k1` (the next iterate) and `star` with values `f_*`, points `x_*`
//! and gradients `g_*`. Composite problems split the value into `a_*`
//! (smooth part, gradient `r_*`) and `b_*` (convex part, subgradient `s_*`,
//! with `sbar_k1` the subgradient produced by the proximal step).
//! Constraints are always listed over ordered pairs in the order
//! `(k,k1) (k,star) (k1,k) (k1,star) (star,k) (star,k1)`.

pub mod config;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::numeric::{int, Rational};
use crate::polyform::{PolyError, StructuredPolynomial, VarCatalog, VecExpr};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScenarioError {
    #[error("invalid function class: {0}")]
    InvalidClass(String),
    #[error("{scenario}: hypothesis violated: {hypothesis}")]
    Hypothesis { scenario: AlgorithmKind, hypothesis: String },
    #[error("{scenario}: missing parameter {parameter}")]
    MissingParameter { scenario: AlgorithmKind, parameter: &'static str },
    #[error("{scenario}: the contraction factor requires mu > 0")]
    StrongConvexityRequired { scenario: AlgorithmKind },
    #[error("metric {metric} is not compatible with {scenario} (expected {expected})")]
    IncompatibleMetric { scenario: AlgorithmKind, metric: MetricKind, expected: MetricKind },
    #[error("{scenario} requires a {} function class", if *.composite { "composite" } else { "non-composite" })]
    CompositeMismatch { scenario: AlgorithmKind, composite: bool },
    #[error("interpolability needs at least two points, got {0}")]
    TooFewPoints(usize),
    #[error("unknown algorithm {name:?}; expected one of {}", AlgorithmKind::ALL.map(|k| k.key()).join(", "))]
    UnknownAlgorithm { name: String },
    #[error("unknown metric {0:?}; expected objective_accuracy, distance_squared or gradient_norm_squared")]
    UnknownMetric(String),
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// `(mu, L)` and whether the objective is a composite `a + b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionClass {
    pub mu: Rational,
    pub l: Rational,
    pub composite: bool,
}

impl FunctionClass {
    pub fn new(mu: Rational, l: Rational, composite: bool) -> Result<Self, ScenarioError> {
        if mu < Rational::zero() {
            return Err(ScenarioError::InvalidClass(format!("mu = {mu} must be nonnegative")));
        }
        if l <= mu {
            return Err(ScenarioError::InvalidClass(format!("L = {l} must exceed mu = {mu}")));
        }
        Ok(Self { mu, l, composite })
    }

    pub fn smooth(mu: Rational, l: Rational) -> Result<Self, ScenarioError> {
        Self::new(mu, l, false)
    }

    pub fn composite(mu: Rational, l: Rational) -> Result<Self, ScenarioError> {
        Self::new(mu, l, true)
    }

    /// `1 / (2 (1 - mu/L)) = L / (2 (L - mu))`
    pub fn alpha(&self) -> Rational {
        &self.l / (int(2) * (&self.l - &self.mu))
    }

    /// Condition number `L / mu`, defined for `mu > 0`.
    pub fn kappa(&self) -> Option<Rational> {
        (!self.mu.is_zero()).then(|| &self.l / &self.mu)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AlgorithmKind {
    GdConstant,
    GdEls,
    GdArmijo,
    GdGoldstein,
    GdWolfe,
    PgmConstant,
    PgmEls,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 7] = [
        Self::GdEls,
        Self::GdConstant,
        Self::GdArmijo,
        Self::GdGoldstein,
        Self::GdWolfe,
        Self::PgmConstant,
        Self::PgmEls,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Self::GdConstant => "gd_constant",
            Self::GdEls => "gd_els",
            Self::GdArmijo => "gd_armijo",
            Self::GdGoldstein => "gd_goldstein",
            Self::GdWolfe => "gd_wolfe",
            Self::PgmConstant => "pgm_constant",
            Self::PgmEls => "pgm_els",
        }
    }

    pub fn is_composite(self) -> bool {
        matches!(self, Self::PgmConstant | Self::PgmEls)
    }

    /// The metric paired with this algorithm in the catalogued results.
    pub fn default_metric(self) -> MetricKind {
        match self {
            Self::GdConstant => MetricKind::DistanceSquared,
            Self::PgmConstant => MetricKind::GradientNormSquared,
            _ => MetricKind::ObjectiveAccuracy,
        }
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for AlgorithmKind {
    type Err = ScenarioError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().replace('-', "_").to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|k| k.key() == norm)
            .ok_or_else(|| ScenarioError::UnknownAlgorithm { name: s.to_string() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricKind {
    ObjectiveAccuracy,
    DistanceSquared,
    GradientNormSquared,
}

impl MetricKind {
    pub fn key(self) -> &'static str {
        match self {
            Self::ObjectiveAccuracy => "objective_accuracy",
            Self::DistanceSquared => "distance_squared",
            Self::GradientNormSquared => "gradient_norm_squared",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for MetricKind {
    type Err = ScenarioError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().replace('-', "_").to_ascii_lowercase();
        [Self::ObjectiveAccuracy, Self::DistanceSquared, Self::GradientNormSquared]
            .into_iter()
            .find(|m| m.key() == norm)
            .ok_or_else(|| ScenarioError::UnknownMetric(s.to_string()))
    }
}

/// Algorithm and its parameters. Unused parameters stay `None`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgorithmSpec {
    pub kind: AlgorithmKind,
    pub gamma: Option<Rational>,
    pub epsilon: Option<Rational>,
    pub eta: Option<Rational>,
    pub delta: Option<Rational>,
    pub c1: Option<Rational>,
    pub c2: Option<Rational>,
}

impl AlgorithmSpec {
    pub fn bare(kind: AlgorithmKind) -> Self {
        Self {
            kind,
            gamma: None,
            epsilon: None,
            eta: None,
            delta: None,
            c1: None,
            c2: None,
        }
    }

    pub fn gd_els() -> Self {
        Self::bare(AlgorithmKind::GdEls)
    }

    pub fn pgm_els() -> Self {
        Self::bare(AlgorithmKind::PgmEls)
    }

    pub fn gd_constant(gamma: Rational) -> Self {
        Self { gamma: Some(gamma), ..Self::bare(AlgorithmKind::GdConstant) }
    }

    pub fn pgm_constant(gamma: Rational) -> Self {
        Self { gamma: Some(gamma), ..Self::bare(AlgorithmKind::PgmConstant) }
    }

    pub fn gd_armijo(delta: Rational, epsilon: Rational, eta: Rational) -> Self {
        Self {
            delta: Some(delta),
            epsilon: Some(epsilon),
            eta: Some(eta),
            ..Self::bare(AlgorithmKind::GdArmijo)
        }
    }

    pub fn gd_goldstein(delta: Rational, epsilon: Rational) -> Self {
        Self {
            delta: Some(delta),
            epsilon: Some(epsilon),
            ..Self::bare(AlgorithmKind::GdGoldstein)
        }
    }

    pub fn gd_wolfe(c1: Rational, c2: Rational) -> Self {
        Self { c1: Some(c1), c2: Some(c2), ..Self::bare(AlgorithmKind::GdWolfe) }
    }

    fn need<'a>(&self, v: &'a Option<Rational>, parameter: &'static str) -> Result<&'a Rational, ScenarioError> {
        v.as_ref().ok_or(ScenarioError::MissingParameter { scenario: self.kind, parameter })
    }

    pub fn gamma(&self) -> Result<&Rational, ScenarioError> {
        self.need(&self.gamma, "gamma")
    }
    pub fn epsilon(&self) -> Result<&Rational, ScenarioError> {
        self.need(&self.epsilon, "epsilon")
    }
    pub fn eta(&self) -> Result<&Rational, ScenarioError> {
        self.need(&self.eta, "eta")
    }
    /// Noise level; absent means noiseless.
    pub fn delta(&self) -> Rational {
        self.delta.clone().unwrap_or_else(Rational::zero)
    }
    pub fn c1(&self) -> Result<&Rational, ScenarioError> {
        self.need(&self.c1, "c1")
    }
    pub fn c2(&self) -> Result<&Rational, ScenarioError> {
        self.need(&self.c2, "c2")
    }

    fn violated(&self, hypothesis: impl Into<String>) -> ScenarioError {
        ScenarioError::Hypothesis { scenario: self.kind, hypothesis: hypothesis.into() }
    }

    /// Checks the strict parameter hypotheses of the scenario's theorem.
    pub fn validate(&self, class: &FunctionClass) -> Result<(), ScenarioError> {
        if self.kind.is_composite() != class.composite {
            return Err(ScenarioError::CompositeMismatch { scenario: self.kind, composite: self.kind.is_composite() });
        }
        if class.mu.is_zero() {
            return Err(ScenarioError::StrongConvexityRequired { scenario: self.kind });
        }
        let zero = Rational::zero();
        let one = Rational::one();
        match self.kind {
            AlgorithmKind::GdEls | AlgorithmKind::PgmEls => {}
            AlgorithmKind::GdConstant | AlgorithmKind::PgmConstant => {
                let g = self.gamma()?;
                if !(*g > zero && *g < int(2) / &class.l) {
                    return Err(self.violated(format!("0 < gamma < 2/L (gamma = {g})")));
                }
            }
            AlgorithmKind::GdArmijo => {
                let (d, e, h) = (self.delta(), self.epsilon()?, self.eta()?);
                if !(d >= zero && d < one) {
                    return Err(self.violated(format!("0 <= delta < 1 (delta = {d})")));
                }
                let cap = noise_factor(&d);
                if !(*e > zero && *e < cap) {
                    return Err(self.violated(format!("0 < epsilon < (1-delta)/(1+delta)^2 = {cap} (epsilon = {e})")));
                }
                if *h <= one {
                    return Err(self.violated(format!("eta > 1 (eta = {h})")));
                }
            }
            AlgorithmKind::GdGoldstein => {
                let (d, e) = (self.delta(), self.epsilon()?);
                // delta < sqrt(5) - 2  <=>  (delta + 2)^2 < 5
                let shifted = &d + int(2);
                if !(d >= zero && &shifted * &shifted < int(5)) {
                    return Err(self.violated(format!("0 <= delta < sqrt(5) - 2 (delta = {d})")));
                }
                let lower = &one - noise_factor(&d);
                let half = Rational::new(1.into(), 2.into());
                if !(*e > lower && *e < half) {
                    return Err(self.violated(format!(
                        "1 - (1-delta)/(1+delta)^2 = {lower} < epsilon < 1/2 (epsilon = {e})"
                    )));
                }
            }
            AlgorithmKind::GdWolfe => {
                let (c1, c2) = (self.c1()?, self.c2()?);
                if !(*c1 > zero && c1 < c2 && *c2 < one) {
                    return Err(self.violated(format!("0 < c1 < c2 < 1 (c1 = {c1}, c2 = {c2})")));
                }
            }
        }
        Ok(())
    }
}

/// `(1 - delta) / (1 + delta)^2`
pub fn noise_factor(delta: &Rational) -> Rational {
    let one = Rational::one();
    let p = &one + delta;
    (&one - delta) / (&p * &p)
}

/// Coefficient `c` of the derived line-search inequality `f_k - f_k1 - c ||g_k||^2 >= 0`.
pub fn line_search_coefficient(spec: &AlgorithmSpec, class: &FunctionClass) -> Result<Rational, ScenarioError> {
    let one = Rational::one();
    let two = int(2);
    let l = &class.l;
    match spec.kind {
        AlgorithmKind::GdArmijo => {
            let (d, e, h) = (spec.delta(), spec.epsilon()?, spec.eta()?);
            let od = &one - &d;
            Ok(&two * e * &od * &od / (h * l) * (noise_factor(&d) - e))
        }
        AlgorithmKind::GdGoldstein => {
            let (d, e) = (spec.delta(), spec.epsilon()?);
            let od = &one - &d;
            Ok(&two * e * &od * &od / l * (noise_factor(&d) - (&one - e)))
        }
        AlgorithmKind::GdWolfe => {
            let (c1, c2) = (spec.c1()?, spec.c2()?);
            Ok(c1 * (&one - c2) / l)
        }
        other => Err(ScenarioError::Hypothesis {
            scenario: other,
            hypothesis: "not a line-search scenario".into(),
        }),
    }
}

/// Symbols attached to one point: function value, location and (sub)gradient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSymbols {
    pub value: String,
    pub point: String,
    pub gradient: String,
}

impl PointSymbols {
    pub fn new(value: &str, point: &str, gradient: &str) -> Self {
        Self {
            value: value.into(),
            point: point.into(),
            gradient: gradient.into(),
        }
    }
}

fn ordered_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
}

/// Smooth strongly convex interpolation inequalities, one per ordered pair:
/// `f_i - f_j - <g_j, x_i - x_j> - alpha (|g_i - g_j|^2 / L + mu |x_i - x_j|^2
/// - 2 (mu/L) <g_j - g_i, x_j - x_i>) >= 0`.
pub fn interpolability(
    catalog: &Arc<VarCatalog>,
    class: &FunctionClass,
    points: &[PointSymbols],
) -> Result<Vec<StructuredPolynomial>, ScenarioError> {
    if points.len() < 2 {
        return Err(ScenarioError::TooFewPoints(points.len()));
    }
    if class.l <= class.mu {
        return Err(ScenarioError::InvalidClass("mu must be below L".into()));
    }
    let alpha = class.alpha();
    let inv_l = Rational::one() / &class.l;
    let mu_over_l = &class.mu / &class.l;
    ordered_pairs(points.len())
        .map(|(i, j)| {
            let (pi, pj) = (&points[i], &points[j]);
            let dx = VecExpr::var(&pi.point) - VecExpr::var(&pj.point);
            let dg = VecExpr::var(&pi.gradient) - VecExpr::var(&pj.gradient);
            StructuredPolynomial::builder(catalog)
                .scalar(&pi.value, Rational::one())
                .scalar(&pj.value, -Rational::one())
                .inner(-Rational::one(), &VecExpr::var(&pj.gradient), &dx)
                .norm_sq(-(&alpha * &inv_l), &dg)
                .norm_sq(-(&alpha * &class.mu), &dx)
                // -2 (mu/L) <g_j - g_i, x_j - x_i> = -2 (mu/L) <dg, dx>
                .inner(&alpha * int(2) * &mu_over_l, &dg, &dx)
                .build()
                .map_err(ScenarioError::from)
        })
        .collect()
}

/// Convex subgradient inequalities `b_i - b_j - <s_j, x_i - x_j> >= 0`, one
/// per ordered pair.
pub fn convex_interpolability(
    catalog: &Arc<VarCatalog>,
    points: &[PointSymbols],
) -> Result<Vec<StructuredPolynomial>, ScenarioError> {
    if points.len() < 2 {
        return Err(ScenarioError::TooFewPoints(points.len()));
    }
    ordered_pairs(points.len())
        .map(|(i, j)| {
            let (pi, pj) = (&points[i], &points[j]);
            let dx = VecExpr::var(&pi.point) - VecExpr::var(&pj.point);
            StructuredPolynomial::builder(catalog)
                .scalar(&pi.value, Rational::one())
                .scalar(&pj.value, -Rational::one())
                .inner(-Rational::one(), &VecExpr::var(&pj.gradient), &dx)
                .build()
                .map_err(ScenarioError::from)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedPolynomial {
    pub name: String,
    pub poly: StructuredPolynomial,
}

/// A vector symbol replaced before building the SDP.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Elimination {
    pub target: String,
    pub replacement: VecExpr,
}

/// Output of [`algorithm_constraints`], on the full (pre-elimination) catalog.
#[derive(Debug, Clone)]
pub struct AlgorithmConstraints {
    pub equalities: Vec<NamedPolynomial>,
    pub inequalities: Vec<NamedPolynomial>,
    pub eliminations: Vec<Elimination>,
}

/// Scenario parameters carried by a [`RateProblem`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub class: FunctionClass,
    pub spec: AlgorithmSpec,
    pub metric: MetricKind,
}

/// Solver-ready description: prove `t * gain - loss >= 0` on the set cut out
/// by the inequalities and equalities.
#[derive(Debug, Clone)]
pub struct RateProblem {
    pub catalog: Arc<VarCatalog>,
    pub gain: StructuredPolynomial,
    pub loss: StructuredPolynomial,
    pub inequalities: Vec<NamedPolynomial>,
    pub equalities: Vec<NamedPolynomial>,
    pub eliminations: Vec<Elimination>,
    pub scenario: Option<Scenario>,
}

impl RateProblem {
    /// A problem assembled by hand (no scenario parameters attached).
    pub fn custom(
        gain: StructuredPolynomial,
        loss: StructuredPolynomial,
        inequalities: Vec<NamedPolynomial>,
        equalities: Vec<NamedPolynomial>,
    ) -> Result<Self, ScenarioError> {
        let catalog = Arc::clone(gain.catalog());
        for p in std::iter::once(&loss).chain(inequalities.iter().map(|n| &n.poly)).chain(equalities.iter().map(|n| &n.poly)) {
            StructuredPolynomial::combine(&[(Rational::one(), &gain), (Rational::one(), p)])?;
        }
        Ok(Self {
            catalog,
            gain,
            loss,
            inequalities,
            equalities,
            eliminations: Vec::new(),
            scenario: None,
        })
    }

    /// `t * gain - loss`
    pub fn rate_polynomial(&self, t: &Rational) -> StructuredPolynomial {
        StructuredPolynomial::combine(&[(t.clone(), &self.gain), (-Rational::one(), &self.loss)])
            .expect("gain and loss share a catalog")
    }

    pub fn key(&self) -> Option<AlgorithmKind> {
        self.scenario.as_ref().map(|s| s.spec.kind)
    }

    /// The same problem with one inequality removed.
    pub fn without_inequality(&self, index: usize) -> Self {
        let mut out = self.clone();
        out.inequalities.remove(index);
        out
    }
}

fn named(prefix: &str, start: usize, polys: Vec<StructuredPolynomial>) -> Vec<NamedPolynomial> {
    polys
        .into_iter()
        .enumerate()
        .map(|(i, poly)| NamedPolynomial { name: format!("{prefix}{}", start + i), poly })
        .collect()
}

fn smooth_catalog() -> Arc<VarCatalog> {
    VarCatalog::new(["f_star", "f_k", "f_k1"], ["x_star", "x_k", "x_k1", "g_star", "g_k", "g_k1"])
        .expect("static catalog")
}

fn composite_catalog() -> Arc<VarCatalog> {
    VarCatalog::new(
        ["a_star", "a_k", "a_k1", "b_star", "b_k", "b_k1"],
        ["x_star", "x_k", "x_k1", "r_star", "r_k", "r_k1", "s_star", "s_k", "sbar_k1"],
    )
    .expect("static catalog")
}

fn smooth_points() -> [PointSymbols; 3] {
    [
        PointSymbols::new("f_k", "x_k", "g_k"),
        PointSymbols::new("f_k1", "x_k1", "g_k1"),
        PointSymbols::new("f_star", "x_star", "g_star"),
    ]
}

fn composite_points() -> ([PointSymbols; 3], [PointSymbols; 3]) {
    (
        [
            PointSymbols::new("a_k", "x_k", "r_k"),
            PointSymbols::new("a_k1", "x_k1", "r_k1"),
            PointSymbols::new("a_star", "x_star", "r_star"),
        ],
        [
            PointSymbols::new("b_k", "x_k", "s_k"),
            PointSymbols::new("b_k1", "x_k1", "sbar_k1"),
            PointSymbols::new("b_star", "x_star", "s_star"),
        ],
    )
}

fn v(name: &str) -> VecExpr {
    VecExpr::var(name)
}

/// Algorithm-specific equalities, extra inequalities and eliminations on the
/// scenario's full catalog. Inequality and equality names continue the
/// numbering after the interpolability conditions.
pub fn algorithm_constraints(
    spec: &AlgorithmSpec,
    class: &FunctionClass,
    catalog: &Arc<VarCatalog>,
) -> Result<AlgorithmConstraints, ScenarioError> {
    spec.validate(class)?;
    let one = Rational::one();
    let mut eqs = Vec::new();
    let mut ineqs = Vec::new();
    let mut elim = Vec::new();
    let gd_first_ineq = 7;
    match spec.kind {
        AlgorithmKind::GdEls => {
            eqs.push(StructuredPolynomial::inner(catalog, &v("g_k1"), &(v("x_k1") - v("x_k")))?);
            eqs.push(StructuredPolynomial::inner(catalog, &v("g_k1"), &v("g_k"))?);
        }
        AlgorithmKind::GdConstant => {
            let gamma = spec.gamma()?;
            elim.push(Elimination { target: "x_k1".into(), replacement: v("x_k") - gamma * &v("g_k") });
        }
        AlgorithmKind::GdArmijo | AlgorithmKind::GdGoldstein | AlgorithmKind::GdWolfe => {
            let c = line_search_coefficient(spec, class)?;
            ineqs.push(
                StructuredPolynomial::builder(catalog)
                    .scalar("f_k", one.clone())
                    .scalar("f_k1", -one.clone())
                    .norm_sq(-c, &v("g_k"))
                    .build()?,
            );
        }
        AlgorithmKind::PgmConstant => {
            let gamma = spec.gamma()?;
            elim.push(Elimination {
                target: "x_k1".into(),
                replacement: v("x_k") - gamma * &(v("r_k") + v("sbar_k1")),
            });
            elim.push(Elimination { target: "s_star".into(), replacement: -v("r_star") });
        }
        AlgorithmKind::PgmEls => {
            let step = v("r_k") + v("sbar_k1");
            let next = v("r_k1") + v("sbar_k1");
            eqs.push(StructuredPolynomial::inner(catalog, &next, &step)?);
            eqs.push(StructuredPolynomial::inner(catalog, &next, &(v("x_k1") - v("x_k")))?);
            let opt = v("r_star") + v("s_star");
            eqs.push(StructuredPolynomial::inner(catalog, &opt, &opt)?);
        }
    }
    if !spec.kind.is_composite() {
        elim.insert(0, Elimination { target: "g_star".into(), replacement: VecExpr::zero() });
    }
    Ok(AlgorithmConstraints {
        equalities: named("v", 1, eqs),
        inequalities: named("h", gd_first_ineq, ineqs),
        eliminations: elim,
    })
}

fn metric_pair(
    metric: MetricKind,
    catalog: &Arc<VarCatalog>,
) -> Result<(StructuredPolynomial, StructuredPolynomial), ScenarioError> {
    let one = Rational::one();
    let b = || StructuredPolynomial::builder(catalog);
    let pair = match metric {
        MetricKind::ObjectiveAccuracy if catalog.scalar_index("f_k").is_some() => (
            b().scalar("f_k", one.clone()).scalar("f_star", -one.clone()).build()?,
            b().scalar("f_k1", one.clone()).scalar("f_star", -one.clone()).build()?,
        ),
        MetricKind::ObjectiveAccuracy => {
            let value = |suffix: &str, w: Rational, builder: crate::polyform::PolyBuilder| {
                builder.scalar(&format!("a_{suffix}"), w.clone()).scalar(&format!("b_{suffix}"), w)
            };
            (
                value("star", -one.clone(), value("k", one.clone(), b())).build()?,
                value("star", -one.clone(), value("k1", one.clone(), b())).build()?,
            )
        }
        MetricKind::DistanceSquared => (
            b().norm_sq(one.clone(), &(v("x_k") - v("x_star"))).build()?,
            b().norm_sq(one.clone(), &(v("x_k1") - v("x_star"))).build()?,
        ),
        MetricKind::GradientNormSquared => (
            b().norm_sq(one.clone(), &(v("r_k") + v("s_k"))).build()?,
            b().norm_sq(one.clone(), &(v("r_k1") + v("sbar_k1"))).build()?,
        ),
    };
    Ok(pair)
}

/// Assembles the full scenario and applies every elimination.
pub fn build_scenario(
    class: &FunctionClass,
    spec: &AlgorithmSpec,
    metric: MetricKind,
) -> Result<RateProblem, ScenarioError> {
    let expected = spec.kind.default_metric();
    if metric != expected {
        return Err(ScenarioError::IncompatibleMetric { scenario: spec.kind, metric, expected });
    }
    spec.validate(class)?;
    let catalog = if spec.kind.is_composite() { composite_catalog() } else { smooth_catalog() };
    let mut inequalities = if spec.kind.is_composite() {
        let (smooth, convex) = composite_points();
        let mut h = interpolability(&catalog, class, &smooth)?;
        h.extend(convex_interpolability(&catalog, &convex)?);
        named("h", 1, h)
    } else {
        named("h", 1, interpolability(&catalog, class, &smooth_points())?)
    };
    let alg = algorithm_constraints(spec, class, &catalog)?;
    inequalities.extend(alg.inequalities);
    let mut equalities = alg.equalities;
    let (mut gain, mut loss) = metric_pair(metric, &catalog)?;

    let mut current = catalog;
    for e in &alg.eliminations {
        let reduced = current.without_vector(&e.target)?;
        let sub = |p: &StructuredPolynomial| p.substitute_into(&e.target, &e.replacement, &reduced);
        gain = sub(&gain)?;
        loss = sub(&loss)?;
        for n in inequalities.iter_mut().chain(equalities.iter_mut()) {
            n.poly = sub(&n.poly)?;
        }
        current = reduced;
    }
    // an equality that became identically zero carries no information
    equalities.retain(|n| !n.poly.is_zero());
    Ok(RateProblem {
        catalog: current,
        gain,
        loss,
        inequalities,
        equalities,
        eliminations: alg.eliminations,
        scenario: Some(Scenario { class: class.clone(), spec: spec.clone(), metric }),
    })
}

/// [`build_scenario`] with the algorithm's default metric.
pub fn build_default(class: &FunctionClass, spec: &AlgorithmSpec) -> Result<RateProblem, ScenarioError> {
    build_scenario(class, spec, spec.kind.default_metric())
}
