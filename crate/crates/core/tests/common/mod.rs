//! Parameter grids shared by the integration tests.

#![allow(dead_code)]

pub mod battery;

use sos_rates::numeric::{int, rat, Rational};
use sos_rates::scenarios::{AlgorithmKind, AlgorithmSpec, FunctionClass};

pub const ALL_KINDS: [AlgorithmKind; 7] = [
    AlgorithmKind::GdConstant,
    AlgorithmKind::GdEls,
    AlgorithmKind::GdArmijo,
    AlgorithmKind::GdGoldstein,
    AlgorithmKind::GdWolfe,
    AlgorithmKind::PgmConstant,
    AlgorithmKind::PgmEls,
];

pub fn class_for(kind: AlgorithmKind, mu: Rational, l: Rational) -> FunctionClass {
    FunctionClass::new(mu, l, kind.is_composite()).unwrap()
}

/// One representative admissible instance per scenario at `(mu, L) = (1, 10)`.
pub fn representative(kind: AlgorithmKind) -> (FunctionClass, AlgorithmSpec) {
    let spec = match kind {
        AlgorithmKind::GdConstant => AlgorithmSpec::gd_constant(rat(1, 10)),
        AlgorithmKind::GdEls => AlgorithmSpec::gd_els(),
        AlgorithmKind::GdArmijo => AlgorithmSpec::gd_armijo(int(0), rat(1, 4), int(2)),
        AlgorithmKind::GdGoldstein => AlgorithmSpec::gd_goldstein(int(0), rat(1, 4)),
        AlgorithmKind::GdWolfe => AlgorithmSpec::gd_wolfe(rat(1, 4), rat(1, 2)),
        AlgorithmKind::PgmConstant => AlgorithmSpec::pgm_constant(rat(1, 10)),
        AlgorithmKind::PgmEls => AlgorithmSpec::pgm_els(),
    };
    (class_for(kind, int(1), int(10)), spec)
}

/// Ten admissible instances per scenario, spread over the parameter ranges.
pub fn grid(kind: AlgorithmKind) -> Vec<(FunctionClass, AlgorithmSpec)> {
    let base = || class_for(kind, int(1), int(10));
    match kind {
        AlgorithmKind::GdEls | AlgorithmKind::PgmEls => [
            (1, 2),
            (1, 3),
            (1, 5),
            (1, 10),
            (1, 20),
            (1, 50),
            (1, 100),
            (2, 3),
            (3, 7),
            (5, 6),
        ]
        .into_iter()
        .map(|(mu, l)| {
            let spec = if kind == AlgorithmKind::GdEls { AlgorithmSpec::gd_els() } else { AlgorithmSpec::pgm_els() };
            (class_for(kind, int(mu), int(l)), spec)
        })
        .collect(),
        AlgorithmKind::GdConstant | AlgorithmKind::PgmConstant => (1..=10)
            .map(|i| {
                // gamma = (2/L) * i/11 covers both branches of the contraction
                let gamma = rat(2, 10) * rat(i, 11);
                let spec = if kind == AlgorithmKind::GdConstant {
                    AlgorithmSpec::gd_constant(gamma)
                } else {
                    AlgorithmSpec::pgm_constant(gamma)
                };
                (base(), spec)
            })
            .collect(),
        AlgorithmKind::GdArmijo => [
            (0, 1, 4, 2),
            (0, 1, 2, 3),
            (0, 3, 4, 3),
            (1, 1, 4, 2),
            (1, 1, 2, 5),
            (2, 1, 4, 3),
            (2, 1, 2, 2),
            (0, 1, 10, 11),
            (1, 3, 5, 4),
            (3, 1, 5, 2),
        ]
        .into_iter()
        .map(|(d, en, ed, eta)| (base(), AlgorithmSpec::gd_armijo(rat(d, 10), rat(en, ed), rat(eta * 10 + 5, 10))))
        .collect(),
        AlgorithmKind::GdGoldstein => [(0, 1, 4), (0, 1, 10), (0, 2, 5), (0, 9, 20), (1, 1, 4), (1, 2, 5), (1, 9, 20), (2, 2, 5), (2, 9, 20), (0, 1, 100)]
            .into_iter()
            .map(|(d, en, ed)| (base(), AlgorithmSpec::gd_goldstein(rat(d, 100), rat(en, ed))))
            .collect(),
        AlgorithmKind::GdWolfe => [(1, 2), (1, 5), (1, 9), (2, 5), (3, 4), (4, 5), (5, 9), (1, 3), (6, 7), (2, 3)]
            .into_iter()
            .map(|(a, b)| (base(), AlgorithmSpec::gd_wolfe(rat(a, 10), rat(b, 10))))
            .collect(),
    }
}
