//! Closed-form certificates for the seven catalogued scenarios and their
//! exact verification.
//!
//! Every certificate supplies `t`, the multipliers and a Gram block built
//! independently of the identity it must satisfy (from an explicit sum of
//! squares, or a hard-coded matrix), so [`verify_identity`] is a genuine
//! check: `t gain - loss - sum sigma h - sum theta v` must equal the Gram
//! form exactly, coefficient by coefficient.

mod armijo;
mod psd;

use std::fmt::{self, Write as _};
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::numeric::{fmt_rational, int, rational_sqrt, Rational};
use crate::polyform::{CoefficientKey, PolyError, StructuredPolynomial, VarCatalog, VecExpr};
use crate::ratmat::RatMatrix;
use crate::scenarios::{line_search_coefficient, noise_factor, AlgorithmKind, AlgorithmSpec, FunctionClass, RateProblem, ScenarioError};

pub use armijo::{compare_armijo, ArmijoComparison};
pub use psd::{characteristic_polynomial, verify_psd, verify_psd_both, PsdMethod, PsdVerdict, PsdWitness};

#[derive(Debug, thiserror::Error)]
pub enum CertifyError {
    #[error("unknown scenario {key:?}; available: {}", available.join(", "))]
    UnknownScenario { key: String, available: Vec<&'static str> },
    #[error("matrix is {rows}x{cols} and not symmetric")]
    NotSymmetric { rows: usize, cols: usize },
    #[error("PSD methods disagree (ldl: {ldl}, charpoly: {charpoly})")]
    PsdMethodsDisagree { ldl: bool, charpoly: bool },
    #[error("multiplier {name} = {value} is negative")]
    NegativeMultiplier { name: String, value: Rational },
    #[error("certificate is for {certificate} but the problem is {problem}")]
    ScenarioMismatch { certificate: AlgorithmKind, problem: String },
    #[error("{what} has length {got}, expected {want}")]
    Dimension { what: &'static str, got: usize, want: usize },
    #[error("invalid comparison input: {0}")]
    InvalidComparison(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// One weighted square `weight * ||vector||^2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SosTerm {
    pub weight: Rational,
    pub vector: VecExpr,
}

/// A certificate evaluated at rational parameters.
#[derive(Debug, Clone)]
pub struct CertificateValues {
    pub kind: AlgorithmKind,
    pub t: Rational,
    pub sigma: Vec<Rational>,
    pub theta: Vec<Rational>,
    pub catalog: Arc<VarCatalog>,
    /// Gram block over `catalog.vectors()`, symmetric.
    pub gram: RatMatrix,
    /// Explicit sum of squares, when one is available at these parameters.
    pub sos_form: Option<Vec<SosTerm>>,
}

impl CertificateValues {
    /// The Gram block of the explicit sum of squares.
    pub fn sos_gram(&self) -> Result<Option<RatMatrix>, CertifyError> {
        let Some(terms) = &self.sos_form else {
            return Ok(None);
        };
        Ok(Some(gram_of(&self.catalog, terms)?))
    }
}

/// Handle on one catalogued certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnalyticCertificate {
    kind: AlgorithmKind,
}

/// Looks up a certificate by scenario key (`gd_els`, `pgm_constant`, ...).
pub fn catalog(key: &str) -> Result<AnalyticCertificate, CertifyError> {
    key.parse::<AlgorithmKind>()
        .map(|kind| AnalyticCertificate { kind })
        .map_err(|_| CertifyError::UnknownScenario {
            key: key.to_string(),
            available: AlgorithmKind::ALL.iter().map(|k| k.key()).collect(),
        })
}

impl AnalyticCertificate {
    pub fn for_kind(kind: AlgorithmKind) -> Self {
        Self { kind }
    }

    pub fn kind(&self) -> AlgorithmKind {
        self.kind
    }

    pub fn key(&self) -> &'static str {
        self.kind.key()
    }

    pub fn rate(&self, class: &FunctionClass, spec: &AlgorithmSpec) -> Result<Rational, CertifyError> {
        self.check_spec(spec)?;
        rate_formula(self.kind, class, spec)
    }

    fn check_spec(&self, spec: &AlgorithmSpec) -> Result<(), CertifyError> {
        if spec.kind == self.kind {
            Ok(())
        } else {
            Err(CertifyError::ScenarioMismatch {
                certificate: self.kind,
                problem: spec.kind.key().to_string(),
            })
        }
    }

    /// Evaluates every component; rejects negative multipliers.
    pub fn evaluate(&self, class: &FunctionClass, spec: &AlgorithmSpec) -> Result<CertificateValues, CertifyError> {
        self.check_spec(spec)?;
        spec.validate(class)?;
        let values = match self.kind {
            AlgorithmKind::GdEls => gd_els(class)?,
            AlgorithmKind::GdConstant => gd_constant(class, spec)?,
            AlgorithmKind::GdArmijo | AlgorithmKind::GdGoldstein | AlgorithmKind::GdWolfe => line_search(class, spec)?,
            AlgorithmKind::PgmConstant => pgm_constant(class, spec)?,
            AlgorithmKind::PgmEls => pgm_els(class)?,
        };
        for (i, s) in values.sigma.iter().enumerate() {
            if s.is_negative() {
                return Err(CertifyError::NegativeMultiplier {
                    name: format!("sigma{}", i + 1),
                    value: s.clone(),
                });
            }
        }
        debug_assert!(values.gram.is_symmetric());
        Ok(values)
    }
}

fn smooth_vectors(with_next: bool) -> Vec<&'static str> {
    if with_next {
        vec!["x_star", "x_k", "x_k1", "g_k", "g_k1"]
    } else {
        vec!["x_star", "x_k", "g_k", "g_k1"]
    }
}

fn smooth_catalog(with_next: bool) -> Result<Arc<VarCatalog>, CertifyError> {
    Ok(VarCatalog::new(vec!["f_star", "f_k", "f_k1"], smooth_vectors(with_next))?)
}

fn composite_catalog(full: bool) -> Result<Arc<VarCatalog>, CertifyError> {
    let scalars = vec!["a_star", "a_k", "a_k1", "b_star", "b_k", "b_k1"];
    let vectors = if full {
        vec!["x_star", "x_k", "x_k1", "r_star", "r_k", "r_k1", "s_star", "s_k", "sbar_k1"]
    } else {
        vec!["x_star", "x_k", "r_star", "r_k", "r_k1", "s_k", "sbar_k1"]
    };
    Ok(VarCatalog::new(scalars, vectors)?)
}

fn gram_of(catalog: &Arc<VarCatalog>, terms: &[SosTerm]) -> Result<RatMatrix, CertifyError> {
    let mut b = StructuredPolynomial::builder(catalog);
    for term in terms {
        b = b.norm_sq(term.weight.clone(), &term.vector);
    }
    Ok(b.build()?.gram().clone())
}

fn v(name: &str) -> VecExpr {
    VecExpr::var(name)
}

fn zeros(n: usize) -> Vec<Rational> {
    vec![Rational::zero(); n]
}

/// `max(|1 - gamma mu|, |1 - gamma L|)`
pub fn step_contraction(class: &FunctionClass, gamma: &Rational) -> Rational {
    let one = Rational::one();
    let a = (&one - gamma * &class.mu).abs();
    let b = (&one - gamma * &class.l).abs();
    if a > b {
        a
    } else {
        b
    }
}

fn gd_els(class: &FunctionClass) -> Result<CertificateValues, CertifyError> {
    let (mu, l) = (&class.mu, &class.l);
    let two = int(2);
    let s = l + mu;
    let d = l - mu;
    let s2 = &s * &s;
    let ratio = &d / &s;
    let mut sigma = zeros(6);
    sigma[0] = ratio.clone();
    sigma[4] = &two * mu * &d / &s2;
    sigma[5] = &two * mu / &s;
    let theta = vec![-Rational::one(), -&two / &s];

    let lm = l * mu;
    let upper = vec![
        // row x_star
        &two * l * l * mu * mu / (&s2 * &d),
        -(l * mu * mu) / &s2,
        -(l * mu * mu) / (&s * &d),
        &lm / &s2,
        &lm / (&s * &d),
        // row x_k
        &lm * (l + int(3) * mu) / (&two * &s2),
        -&lm / (&two * &s),
        -(mu * (int(3) * l + mu)) / (&two * &s2),
        -mu / (&two * &s),
        // row x_k1
        &lm / (&two * &d),
        mu / (&two * &s),
        -mu / (&two * &d),
        // row g_k
        (l + int(3) * mu) / (&two * &s2),
        Rational::one() / (&two * &s),
        // row g_k1
        Rational::one() / (&two * &d),
    ];
    let catalog = smooth_catalog(true)?;
    Ok(CertificateValues {
        kind: AlgorithmKind::GdEls,
        t: &ratio * &ratio,
        sigma,
        theta,
        gram: RatMatrix::from_upper_triangle(5, &upper),
        sos_form: gd_els_sos(class),
        catalog,
    })
}

/// `(mu sqrt(kappa) / 4) (|q1|^2 / (sqrt(kappa) + 1) + |q2|^2 / (sqrt(kappa) - 1))`,
/// available when `sqrt(kappa)` and `sqrt(L mu)` are rational.
fn gd_els_sos(class: &FunctionClass) -> Option<Vec<SosTerm>> {
    let (mu, l) = (&class.mu, &class.l);
    let kappa = l / mu;
    let rk = rational_sqrt(&kappa)?;
    let rlm = rational_sqrt(&(l * mu))?;
    let one = Rational::one();
    let inv = &one / &rlm;
    let kp1 = &kappa + &one;
    let up = (&rk + &one) * (&rk + &one) / &kp1;
    let down = (&rk - &one) * (&rk - &one) / &kp1;
    let xk = v("x_k") - v("x_star");
    let xk1 = v("x_k1") - v("x_star");
    let gk = &inv * &v("g_k");
    let gk1 = &inv * &v("g_k1");
    let q1 = -(&up * &(xk.clone() - gk.clone())) + (xk1.clone() + gk1.clone());
    // the two summands of q2 enter with opposite signs; a plus here breaks the
    // identity with the Gram block at every kappa
    let q2 = &down * &(xk + gk) - (xk1 - gk1);
    let w = mu * &rk / int(4);
    Some(vec![
        SosTerm {
            weight: &w / (&rk + &one),
            vector: q1,
        },
        SosTerm {
            weight: &w / (&rk - &one),
            vector: q2,
        },
    ])
}

fn gd_constant(class: &FunctionClass, spec: &AlgorithmSpec) -> Result<CertificateValues, CertifyError> {
    let (mu, l) = (&class.mu, &class.l);
    let gamma = spec.gamma()?;
    let rho = step_contraction(class, gamma);
    let two = int(2);
    let mut sigma = zeros(6);
    sigma[1] = &two * gamma * &rho;
    sigma[4] = sigma[1].clone();
    let threshold = &two / (l + mu);
    let m = if gamma <= &threshold { mu } else { l };
    let weight = gamma * (&two - gamma * (l + mu)).abs() / (l - mu);
    let sos = vec![SosTerm {
        weight,
        vector: v("g_k") - m * &(v("x_k") - v("x_star")),
    }];
    let catalog = smooth_catalog(false)?;
    Ok(CertificateValues {
        kind: AlgorithmKind::GdConstant,
        t: &rho * &rho,
        sigma,
        theta: Vec::new(),
        gram: gram_of(&catalog, &sos)?,
        sos_form: Some(sos),
        catalog,
    })
}

fn line_search(class: &FunctionClass, spec: &AlgorithmSpec) -> Result<CertificateValues, CertifyError> {
    let (mu, l) = (&class.mu, &class.l);
    let c = line_search_coefficient(spec, class)?;
    let two_mu_c = int(2) * mu * &c;
    let mut sigma = zeros(7);
    sigma[4] = two_mu_c.clone();
    sigma[6] = Rational::one();
    let sos = vec![SosTerm {
        weight: &c * l / (l - mu),
        vector: v("g_k") + mu * &(v("x_star") - v("x_k")),
    }];
    let catalog = smooth_catalog(true)?;
    Ok(CertificateValues {
        kind: spec.kind,
        t: Rational::one() - two_mu_c,
        sigma,
        theta: Vec::new(),
        gram: gram_of(&catalog, &sos)?,
        sos_form: Some(sos),
        catalog,
    })
}

fn pgm_constant(class: &FunctionClass, spec: &AlgorithmSpec) -> Result<CertificateValues, CertifyError> {
    let (mu, l) = (&class.mu, &class.l);
    let gamma = spec.gamma()?;
    let rho = step_contraction(class, gamma);
    let two = int(2);
    let mut sigma = zeros(12);
    sigma[0] = &two * &rho / gamma;
    sigma[2] = sigma[0].clone();
    sigma[6] = &two * &rho * &rho / gamma;
    sigma[8] = sigma[6].clone();
    let threshold = &two / (l + mu);
    let m = if gamma <= &threshold { mu } else { l };
    let step = v("r_k") + v("sbar_k1");
    let sos = vec![
        SosTerm {
            weight: &rho * &rho,
            vector: v("s_k") - v("sbar_k1"),
        },
        SosTerm {
            weight: (&two - gamma * (l + mu)).abs() / (gamma * (l - mu)),
            vector: v("r_k") - v("r_k1") - &(m * gamma) * &step,
        },
    ];
    let catalog = composite_catalog(false)?;
    Ok(CertificateValues {
        kind: AlgorithmKind::PgmConstant,
        t: &rho * &rho,
        sigma,
        theta: Vec::new(),
        gram: gram_of(&catalog, &sos)?,
        sos_form: Some(sos),
        catalog,
    })
}

fn pgm_els(class: &FunctionClass) -> Result<CertificateValues, CertifyError> {
    let (mu, l) = (&class.mu, &class.l);
    let two = int(2);
    let s = l + mu;
    let d = l - mu;
    let s2 = &s * &s;
    let ratio = &d / &s;
    let lm = l * mu;
    let mut sigma = zeros(12);
    sigma[0] = ratio.clone();
    sigma[4] = &two * mu * &d / &s2;
    sigma[5] = &two * mu / &s;
    sigma[6] = &ratio * &ratio;
    sigma[11] = int(4) * &lm / &s2;
    let theta = vec![-&two / &s, -Rational::one(), Rational::zero()];
    let z = Rational::zero;
    let upper = vec![
        // row x_star
        &two * l * l * mu * mu / (&s2 * &d),
        -(l * mu * mu) / &s2,
        -(l * mu * mu) / (&d * &s),
        -(&two * l * mu * mu) / (&s2 * &d),
        &lm / &s2,
        &lm / (&d * &s),
        z(),
        z(),
        &two * &lm / &s2,
        // row x_k
        &lm * (l + int(3) * mu) / (&two * &s2),
        -&lm / (&two * &s),
        mu * mu / &s2,
        -(mu * (int(3) * l + mu)) / (&two * &s2),
        -mu / (&two * &s),
        z(),
        z(),
        -(&two * &lm) / &s2,
        // row x_k1
        &lm / (&two * &d),
        mu * mu / (&d * &s),
        mu / (&two * &s),
        -mu / (&two * &d),
        z(),
        z(),
        z(),
        // row r_star
        &two * &lm / (&s2 * &d),
        -mu / &s2,
        -mu / (&d * &s),
        z(),
        z(),
        z(),
        // row r_k
        (l + int(3) * mu) / (&two * &s2),
        Rational::one() / (&two * &s),
        z(),
        z(),
        Rational::one() / &s,
        // row r_k1
        Rational::one() / (&two * &d),
        z(),
        z(),
        Rational::one() / &s,
        // row s_star
        z(),
        z(),
        z(),
        // row s_k
        z(),
        z(),
        // row sbar_k1
        &two / &s,
    ];
    Ok(CertificateValues {
        kind: AlgorithmKind::PgmEls,
        t: &ratio * &ratio,
        sigma,
        theta,
        gram: RatMatrix::from_upper_triangle(9, &upper),
        sos_form: None,
        catalog: composite_catalog(true)?,
    })
}

/// Closed-form contraction factor of each scenario.
pub fn rate_formula(kind: AlgorithmKind, class: &FunctionClass, spec: &AlgorithmSpec) -> Result<Rational, CertifyError> {
    if spec.kind != kind {
        return Err(CertifyError::ScenarioMismatch {
            certificate: kind,
            problem: spec.kind.key().to_string(),
        });
    }
    spec.validate(class)?;
    let (mu, l) = (&class.mu, &class.l);
    let one = Rational::one();
    let four = int(4);
    Ok(match kind {
        AlgorithmKind::GdConstant | AlgorithmKind::PgmConstant => {
            let rho = step_contraction(class, spec.gamma()?);
            &rho * &rho
        }
        AlgorithmKind::GdEls | AlgorithmKind::PgmEls => {
            let r = (l - mu) / (l + mu);
            &r * &r
        }
        AlgorithmKind::GdArmijo => {
            let (d, e, h) = (spec.delta(), spec.epsilon()?, spec.eta()?);
            let od = &one - &d;
            &one - &four * mu * e * &od * &od / (h * l) * (noise_factor(&d) - e)
        }
        AlgorithmKind::GdGoldstein => {
            let (d, e) = (spec.delta(), spec.epsilon()?);
            let od = &one - &d;
            &one - &four * mu * e * &od * &od / l * (noise_factor(&d) - (&one - e))
        }
        AlgorithmKind::GdWolfe => {
            let (c1, c2) = (spec.c1()?, spec.c2()?);
            &one - int(2) * mu * c1 * (&one - c2) / l
        }
    })
}

/// Outcome of an exact identity check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityReport {
    pub holds: bool,
    /// Every nonzero coefficient of
    /// `t gain - loss - sum sigma h - sum theta v - Gram(Q)`.
    pub discrepancies: Vec<(CoefficientKey, Rational)>,
}

/// Checks `t gain - loss = sum sigma h + sum theta v + Gram(Q)` exactly for
/// the certificate evaluated at the problem's own parameters.
pub fn verify_identity(cert: &AnalyticCertificate, problem: &RateProblem) -> Result<IdentityReport, CertifyError> {
    let scenario = problem.scenario.as_ref().ok_or_else(|| CertifyError::ScenarioMismatch {
        certificate: cert.kind,
        problem: "a custom problem".into(),
    })?;
    let values = cert.evaluate(&scenario.class, &scenario.spec)?;
    verify_values(&values, problem)
}

/// [`verify_identity`] for explicit (possibly perturbed) values.
pub fn verify_values(values: &CertificateValues, problem: &RateProblem) -> Result<IdentityReport, CertifyError> {
    if *values.catalog != *problem.catalog {
        return Err(PolyError::CatalogMismatch {
            expected_scalars: problem.catalog.scalars().to_vec(),
            expected_vectors: problem.catalog.vectors().to_vec(),
            found_scalars: values.catalog.scalars().to_vec(),
            found_vectors: values.catalog.vectors().to_vec(),
        }
        .into());
    }
    let check = |what, got: usize, want: usize| {
        if got == want {
            Ok(())
        } else {
            Err(CertifyError::Dimension { what, got, want })
        }
    };
    check("sigma", values.sigma.len(), problem.inequalities.len())?;
    check("theta", values.theta.len(), problem.equalities.len())?;

    let catalog = &problem.catalog;
    let gram_poly = StructuredPolynomial::from_parts(catalog, Rational::zero(), zeros(catalog.scalars().len()), values.gram.clone())?;
    let minus_one = -Rational::one();
    let mut terms: Vec<(Rational, &StructuredPolynomial)> =
        vec![(values.t.clone(), &problem.gain), (minus_one.clone(), &problem.loss), (minus_one, &gram_poly)];
    terms.extend(values.sigma.iter().zip(&problem.inequalities).map(|(s, h)| (-s.clone(), &h.poly)));
    terms.extend(values.theta.iter().zip(&problem.equalities).map(|(s, e)| (-s.clone(), &e.poly)));
    let residual = StructuredPolynomial::combine(&terms)?;
    let discrepancies = residual.coefficients();
    Ok(IdentityReport {
        holds: discrepancies.is_empty(),
        discrepancies,
    })
}

/// Full exact check of one scenario at one parameter point.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub kind: AlgorithmKind,
    pub params: Vec<(String, Rational)>,
    pub values: CertificateValues,
    pub rate: Rational,
    pub identity: IdentityReport,
    pub ldl: PsdVerdict,
    pub charpoly: PsdVerdict,
    /// Whether the explicit SOS form (if any) reproduces the Gram block.
    pub sos_matches: Option<bool>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.identity.holds && self.ldl.is_psd && self.charpoly.is_psd && self.sos_matches != Some(false) && self.rate == self.values.t
    }

    /// Structured plain-text rendering, stable for golden files.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scenario {}", self.kind.key());
        for (name, value) in &self.params {
            let _ = writeln!(out, "param {name} {}", fmt_rational(value));
        }
        let _ = writeln!(out, "rate {}", fmt_rational(&self.rate));
        let _ = writeln!(out, "t {}", fmt_rational(&self.values.t));
        for (i, s) in self.values.sigma.iter().enumerate() {
            let _ = writeln!(out, "sigma{} {}", i + 1, fmt_rational(s));
        }
        for (i, s) in self.values.theta.iter().enumerate() {
            let _ = writeln!(out, "theta{} {}", i + 1, fmt_rational(s));
        }
        let _ = writeln!(out, "identity {}", if self.identity.holds { "holds" } else { "fails" });
        for (key, value) in &self.identity.discrepancies {
            let _ = writeln!(out, "residual {key} {}", fmt_rational(value));
        }
        for verdict in [&self.ldl, &self.charpoly] {
            let signs: Vec<String> = verdict.signs().iter().map(i8::to_string).collect();
            let _ = writeln!(
                out,
                "psd {} {} signs {}",
                verdict.method,
                if verdict.is_psd { "yes" } else { "no" },
                signs.join(" ")
            );
        }
        if let Some(m) = self.sos_matches {
            let _ = writeln!(out, "sos_form {}", if m { "matches" } else { "differs" });
        }
        let _ = writeln!(out, "verdict {}", if self.passed() { "pass" } else { "fail" });
        out
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Named parameters of a scenario, in a fixed order.
pub fn parameter_list(class: &FunctionClass, spec: &AlgorithmSpec) -> Vec<(String, Rational)> {
    let mut out = vec![("mu".to_string(), class.mu.clone()), ("L".to_string(), class.l.clone())];
    let optional = [
        ("gamma", &spec.gamma),
        ("epsilon", &spec.epsilon),
        ("eta", &spec.eta),
        ("delta", &spec.delta),
        ("c1", &spec.c1),
        ("c2", &spec.c2),
    ];
    for (name, value) in optional {
        if let Some(v) = value {
            out.push((name.to_string(), v.clone()));
        }
    }
    out
}

/// Builds the scenario, evaluates its certificate and checks everything.
pub fn verify_scenario(class: &FunctionClass, spec: &AlgorithmSpec) -> Result<VerificationReport, CertifyError> {
    let cert = AnalyticCertificate::for_kind(spec.kind);
    let problem = crate::scenarios::build_default(class, spec)?;
    let values = cert.evaluate(class, spec)?;
    let identity = verify_values(&values, &problem)?;
    let (ldl, charpoly) = verify_psd_both(&values.gram)?;
    let sos_matches = values.sos_gram()?.map(|g| g == values.gram);
    Ok(VerificationReport {
        kind: spec.kind,
        params: parameter_list(class, spec),
        rate: rate_formula(spec.kind, class, spec)?,
        values,
        identity,
        ldl,
        charpoly,
        sos_matches,
    })
}
