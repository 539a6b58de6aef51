//! `key = value` scenario descriptors.
//!
//! ```text
//! # comment
//! class.mu = 1
//! class.L = 10
//! alg.kind = gd_armijo
//! alg.epsilon = 0.25
//! alg.eta = 2
//! ```
//!
//! Recognized keys: `class.mu`, `class.L`, `class.composite`, `alg.kind`,
//! `alg.gamma`, `alg.epsilon` (or `alg.eps`), `alg.eta`, `alg.delta`,
//! `alg.c1`, `alg.c2`, `metric` (or `metric.kind`). Numbers are parsed as
//! exact rationals.

use super::{AlgorithmKind, AlgorithmSpec, FunctionClass, MetricKind, ScenarioError};
use crate::numeric::{parse_rational, Rational};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScenarioConfig {
    pub mu: Option<Rational>,
    pub l: Option<Rational>,
    pub composite: Option<bool>,
    pub kind: Option<AlgorithmKind>,
    pub gamma: Option<Rational>,
    pub epsilon: Option<Rational>,
    pub eta: Option<Rational>,
    pub delta: Option<Rational>,
    pub c1: Option<Rational>,
    pub c2: Option<Rational>,
    pub metric: Option<MetricKind>,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let mut cfg = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| ScenarioError::Config { line, message };
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got {content:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let num = || parse_rational(value).map_err(|e| err(e.to_string()));
            match key {
                "class.mu" => cfg.mu = Some(num()?),
                "class.L" | "class.l" => cfg.l = Some(num()?),
                "class.composite" => {
                    cfg.composite = Some(match value {
                        "true" | "1" | "yes" => true,
                        "false" | "0" | "no" => false,
                        _ => return Err(err(format!("expected a boolean, got {value:?}"))),
                    })
                }
                "alg.kind" => cfg.kind = Some(value.parse().map_err(|e: ScenarioError| err(e.to_string()))?),
                "alg.gamma" => cfg.gamma = Some(num()?),
                "alg.epsilon" | "alg.eps" => cfg.epsilon = Some(num()?),
                "alg.eta" => cfg.eta = Some(num()?),
                "alg.delta" => cfg.delta = Some(num()?),
                "alg.c1" => cfg.c1 = Some(num()?),
                "alg.c2" => cfg.c2 = Some(num()?),
                "metric" | "metric.kind" => {
                    cfg.metric = Some(value.parse().map_err(|e: ScenarioError| err(e.to_string()))?)
                }
                _ => return Err(err(format!("unknown key {key:?}"))),
            }
        }
        Ok(cfg)
    }

    /// Fields set in `overrides` replace those in `self`.
    pub fn merged(self, overrides: ScenarioConfig) -> Self {
        Self {
            mu: overrides.mu.or(self.mu),
            l: overrides.l.or(self.l),
            composite: overrides.composite.or(self.composite),
            kind: overrides.kind.or(self.kind),
            gamma: overrides.gamma.or(self.gamma),
            epsilon: overrides.epsilon.or(self.epsilon),
            eta: overrides.eta.or(self.eta),
            delta: overrides.delta.or(self.delta),
            c1: overrides.c1.or(self.c1),
            c2: overrides.c2.or(self.c2),
            metric: overrides.metric.or(self.metric),
        }
    }

    /// Resolves to validated scenario parameters. The composite flag and the
    /// metric default to the algorithm's own.
    pub fn resolve(&self) -> Result<(FunctionClass, AlgorithmSpec, MetricKind), ScenarioError> {
        let missing = |what: &str| ScenarioError::Config { line: 0, message: format!("missing {what}") };
        let kind = self.kind.ok_or_else(|| missing("alg.kind"))?;
        let mu = self.mu.clone().ok_or_else(|| missing("class.mu"))?;
        let l = self.l.clone().ok_or_else(|| missing("class.L"))?;
        let class = FunctionClass::new(mu, l, self.composite.unwrap_or(kind.is_composite()))?;
        let spec = AlgorithmSpec {
            kind,
            gamma: self.gamma.clone(),
            epsilon: self.epsilon.clone(),
            eta: self.eta.clone(),
            delta: self.delta.clone(),
            c1: self.c1.clone(),
            c2: self.c2.clone(),
        };
        spec.validate(&class)?;
        Ok((class, spec, self.metric.unwrap_or(kind.default_metric())))
    }
}
