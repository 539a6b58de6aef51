//! Flags and config file resolved into scenario parameters and sweep axes.

use num_traits::{One, Zero};
use sos_rates::numeric::{int, parse_rational, Rational};
use sos_rates::scenarios::config::ScenarioConfig;
use sos_rates::scenarios::{AlgorithmKind, AlgorithmSpec, FunctionClass, MetricKind};

use crate::args::Flags;
use crate::CliError;

const DEFAULT_COUNT: usize = 10;

/// Parameters that may be given as a flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Param {
    Mu,
    L,
    Kappa,
    Gamma,
    Epsilon,
    Eta,
    Delta,
    C1,
    C2,
}

impl Param {
    pub const ALL: [Param; 9] =
        [Param::Mu, Param::L, Param::Kappa, Param::Gamma, Param::Epsilon, Param::Eta, Param::Delta, Param::C1, Param::C2];

    pub fn column(self) -> &'static str {
        match self {
            Param::Mu => "mu",
            Param::L => "L",
            Param::Kappa => "kappa",
            Param::Gamma => "gamma",
            Param::Epsilon => "epsilon",
            Param::Eta => "eta",
            Param::Delta => "delta",
            Param::C1 => "c1",
            Param::C2 => "c2",
        }
    }

    fn flag(self) -> &'static str {
        match self {
            Param::Mu => "--mu",
            Param::L => "--L",
            Param::Kappa => "--kappa",
            Param::Gamma => "--gamma",
            Param::Epsilon => "--eps",
            Param::Eta => "--eta",
            Param::Delta => "--delta",
            Param::C1 => "--c1",
            Param::C2 => "--c2",
        }
    }

    fn raw(self, flags: &Flags) -> Option<&str> {
        match self {
            Param::Mu => flags.mu.as_deref(),
            Param::L => flags.l.as_deref(),
            Param::Kappa => flags.kappa.as_deref(),
            Param::Gamma => flags.gamma.as_deref(),
            Param::Epsilon => flags.epsilon.as_deref(),
            Param::Eta => flags.eta.as_deref(),
            Param::Delta => flags.delta.as_deref(),
            Param::C1 => flags.c1.as_deref(),
            Param::C2 => flags.c2.as_deref(),
        }
    }

    fn set(self, cfg: &mut ScenarioConfig, value: Rational) {
        let slot = match self {
            Param::Mu => &mut cfg.mu,
            Param::L => &mut cfg.l,
            // resolved into L once mu is known
            Param::Kappa => return,
            Param::Gamma => &mut cfg.gamma,
            Param::Epsilon => &mut cfg.epsilon,
            Param::Eta => &mut cfg.eta,
            Param::Delta => &mut cfg.delta,
            Param::C1 => &mut cfg.c1,
            Param::C2 => &mut cfg.c2,
        };
        *slot = Some(value);
    }
}

/// `count` evenly spaced exact values from `start` to `stop` inclusive.
pub fn parse_range(text: &str) -> Result<Vec<Rational>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let num = |s: &str| parse_rational(s).map_err(|e| e.to_string());
    let (start, stop, count) = match parts.as_slice() {
        [a, b] => (num(a)?, num(b)?, DEFAULT_COUNT),
        [a, b, n] => (num(a)?, num(b)?, n.trim().parse::<usize>().map_err(|_| format!("bad count {n:?}"))?),
        _ => return Err(format!("expected start:stop[:count], got {text:?}")),
    };
    match count {
        0 => Err("range count must be positive".into()),
        1 => Ok(vec![start]),
        n => {
            let step = (&stop - &start) / int(n as i64 - 1);
            Ok((0..n).map(|i| &start + &step * int(i as i64)).collect())
        }
    }
}

/// One admissible scenario instance.
#[derive(Debug, Clone)]
pub struct Instance {
    pub class: FunctionClass,
    pub spec: AlgorithmSpec,
    pub metric: MetricKind,
    /// `L / mu` when `--kappa` was used.
    pub kappa: Option<Rational>,
}

impl Instance {
    /// Parameter columns with their values, in [`Param::ALL`] order.
    pub fn params(&self) -> Vec<(Param, Option<Rational>)> {
        let s = &self.spec;
        let kappa = self.kappa.clone().or_else(|| self.class.kappa());
        vec![
            (Param::Mu, Some(self.class.mu.clone())),
            (Param::L, Some(self.class.l.clone())),
            (Param::Kappa, kappa),
            (Param::Gamma, s.gamma.clone()),
            (Param::Epsilon, s.epsilon.clone()),
            (Param::Eta, s.eta.clone()),
            (Param::Delta, s.delta.clone()),
            (Param::C1, s.c1.clone()),
            (Param::C2, s.c2.clone()),
        ]
    }
}

/// Fixed parameters plus the axes a sweep ranges over.
#[derive(Debug, Clone)]
pub struct Settings {
    base: ScenarioConfig,
    kappa: Option<Rational>,
    axes: Vec<(Param, Vec<Rational>)>,
}

impl Settings {
    pub fn from_flags(flags: &Flags, config_text: Option<&str>) -> Result<Self, CliError> {
        let file = match config_text {
            Some(text) => ScenarioConfig::parse(text)?,
            None => ScenarioConfig::default(),
        };
        let mut overrides = ScenarioConfig {
            kind: flags.alg.as_deref().map(str::parse::<AlgorithmKind>).transpose()?,
            metric: flags.metric.as_deref().map(str::parse::<MetricKind>).transpose()?,
            ..ScenarioConfig::default()
        };
        let mut kappa = None;
        let mut axes = Vec::new();
        for param in Param::ALL {
            let Some(raw) = param.raw(flags) else { continue };
            if raw.contains(':') {
                let values = parse_range(raw).map_err(|e| CliError::Config(format!("{}: {e}", param.flag())))?;
                axes.push((param, values));
            } else {
                let value = parse_rational(raw).map_err(|e| CliError::Config(format!("{}: {e}", param.flag())))?;
                if param == Param::Kappa {
                    kappa = Some(value);
                } else {
                    param.set(&mut overrides, value);
                }
            }
        }
        let mut base = file.merged(overrides);
        let kappa_given = kappa.is_some() || axes.iter().any(|(p, _)| *p == Param::Kappa);
        let l_given = flags.l.is_some();
        if kappa_given && l_given {
            return Err(CliError::Config("give either --L or --kappa, not both".into()));
        }
        if kappa_given {
            // --kappa replaces any L from the config file
            base.l = None;
            if base.mu.is_none() {
                base.mu = Some(Rational::one());
            }
        }
        if base.kind.is_none() {
            return Err(CliError::Config("missing --alg".into()));
        }
        Ok(Self { base, kappa, axes })
    }

    /// Number of grid points.
    pub fn grid_len(&self) -> usize {
        self.axes.iter().map(|(_, v)| v.len()).product()
    }

    /// The single instance described by scalar flags.
    pub fn instance(&self) -> Result<Instance, CliError> {
        if let Some((param, _)) = self.axes.first() {
            return Err(CliError::Config(format!("{} takes a single value here; ranges are for sweep", param.flag())));
        }
        self.resolve(self.base.clone(), self.kappa.clone())
    }

    /// Every grid point in row-major order (last axis fastest).
    pub fn grid(&self) -> Result<Vec<Instance>, CliError> {
        let mut out = Vec::with_capacity(self.grid_len());
        for index in 0..self.grid_len() {
            let mut cfg = self.base.clone();
            let mut kappa = self.kappa.clone();
            let mut rest = index;
            for (param, values) in self.axes.iter().rev() {
                let value = values[rest % values.len()].clone();
                rest /= values.len();
                if *param == Param::Kappa {
                    kappa = Some(value);
                } else {
                    param.set(&mut cfg, value);
                }
            }
            out.push(self.resolve(cfg, kappa).map_err(|e| CliError::Config(format!("grid point {index}: {e}")))?);
        }
        Ok(out)
    }

    fn resolve(&self, mut cfg: ScenarioConfig, kappa: Option<Rational>) -> Result<Instance, CliError> {
        if let Some(k) = &kappa {
            let mu = cfg.mu.clone().unwrap_or_else(Rational::one);
            if mu.is_zero() {
                return Err(CliError::Config("--kappa needs mu > 0".into()));
            }
            cfg.l = Some(mu * k);
        }
        let (class, spec, metric) = cfg.resolve()?;
        let kind = spec.kind;
        let unused = [
            (Param::Gamma, &spec.gamma, matches!(kind, AlgorithmKind::GdConstant | AlgorithmKind::PgmConstant)),
            (Param::Epsilon, &spec.epsilon, matches!(kind, AlgorithmKind::GdArmijo | AlgorithmKind::GdGoldstein)),
            (Param::Eta, &spec.eta, kind == AlgorithmKind::GdArmijo),
            (Param::Delta, &spec.delta, matches!(kind, AlgorithmKind::GdArmijo | AlgorithmKind::GdGoldstein)),
            (Param::C1, &spec.c1, kind == AlgorithmKind::GdWolfe),
            (Param::C2, &spec.c2, kind == AlgorithmKind::GdWolfe),
        ];
        for (param, value, used) in unused {
            if value.is_some() && !used {
                return Err(CliError::Config(format!("{} does not apply to {}", param.flag(), kind.key())));
            }
        }
        Ok(Instance { class, spec, metric, kappa })
    }
}
