//! Algebraic laws of structured polynomials on random rational instances.

use std::sync::Arc;

use proptest::prelude::*;

use sos_rates::numeric::{int, rat, Rational};
use sos_rates::polyform::{Assignment, Monomial, StructuredPolynomial, VarCatalog, VecExpr};
use sos_rates::scenarios::{build_default, AlgorithmSpec, FunctionClass};

const SCALARS: [&str; 2] = ["a", "b"];
const VECTORS: [&str; 3] = ["u", "v", "w"];

fn catalog() -> Arc<VarCatalog> {
    VarCatalog::new(SCALARS, VECTORS).unwrap()
}

/// Raw coefficients: constant, one per scalar, one per ordered vector pair.
fn coefficients() -> impl Strategy<Value = Vec<(i64, i64)>> {
    prop::collection::vec((-20i64..20, 1i64..6), 1 + SCALARS.len() + VECTORS.len() * VECTORS.len())
}

fn poly(catalog: &Arc<VarCatalog>, raw: &[(i64, i64)], with_constant: bool) -> StructuredPolynomial {
    let mut it = raw.iter().map(|&(p, q)| rat(p, q));
    let c = it.next().unwrap();
    let mut b = StructuredPolynomial::builder(catalog);
    if with_constant {
        b = b.constant(c);
    }
    for s in SCALARS {
        b = b.scalar(s, it.next().unwrap());
    }
    for x in VECTORS {
        for y in VECTORS {
            b = b.inner(it.next().unwrap(), &VecExpr::var(x), &VecExpr::var(y));
        }
    }
    b.build().unwrap()
}

fn assignment(values: &[(i64, i64)], n: usize) -> Assignment<Rational> {
    let mut it = values.iter().cycle().map(|&(p, q)| rat(p, q));
    let mut a = Assignment::new();
    for s in SCALARS {
        a = a.scalar(s, it.next().unwrap());
    }
    for x in VECTORS {
        a = a.vector(x, (0..n).map(|_| it.next().unwrap()).collect());
    }
    a
}

fn eval_monomials(p: &StructuredPolynomial, a: &Assignment<Rational>) -> Rational {
    let var = |name: &str| a.scalars.get(name).cloned().unwrap_or_else(|| a.vectors[name][0].clone());
    p.expand_univariate()
        .into_iter()
        .map(|(m, c)| match m {
            Monomial::One => c,
            Monomial::Linear(s) => c * var(&s),
            Monomial::Quadratic(x, y) => c * var(&x) * var(&y),
        })
        .sum()
}

proptest! {
    #[test]
    fn univariate_expansion_evaluates_like_the_structured_form(raw in coefficients(), values in prop::collection::vec((-9i64..9, 1i64..4), 5)) {
        let p = poly(&catalog(), &raw, true);
        let a = assignment(&values, 1);
        prop_assert_eq!(p.evaluate(&a).unwrap(), eval_monomials(&p, &a));
    }

    #[test]
    fn evaluation_is_dimension_free(raw in coefficients(), values in prop::collection::vec((-9i64..9, 1i64..4), 11)) {
        // stacking n one-dimensional copies sums the homogeneous part
        let p = poly(&catalog(), &raw, false);
        for n in 2..=3 {
            let a = assignment(&values, n);
            let mut total = p.evaluate(&a).unwrap();
            let mut slices = Vec::new();
            for k in 0..n {
                let mut s = Assignment::new();
                for name in SCALARS {
                    s = s.scalar(name, if k == 0 { a.scalars[name].clone() } else { int(0) });
                }
                for name in VECTORS {
                    s = s.vector(name, vec![a.vectors[name][k].clone()]);
                }
                slices.push(p.evaluate(&s).unwrap());
            }
            total -= slices.into_iter().sum::<Rational>();
            prop_assert_eq!(total, int(0));
        }
    }

    #[test]
    fn combine_is_bilinear(raw in coefficients(), a in (-9i64..9, 1i64..5), b in (-9i64..9, 1i64..5)) {
        let c = catalog();
        let p = poly(&c, &raw, true);
        let (a, b) = (rat(a.0, a.1), rat(b.0, b.1));
        let split = StructuredPolynomial::combine(&[(a.clone(), &p), (b.clone(), &p)]).unwrap();
        let joined = StructuredPolynomial::combine(&[(a + b, &p)]).unwrap();
        prop_assert_eq!(&split, &joined);
        prop_assert!(split.gram().is_symmetric());
    }

    #[test]
    fn substitution_commutes_with_combination(
        p_raw in coefficients(),
        q_raw in coefficients(),
        w in (-9i64..9, 1i64..5),
        r in ((-5i64..5, 1i64..4), (-5i64..5, 1i64..4)),
    ) {
        let c = catalog();
        let (p, q) = (poly(&c, &p_raw, true), poly(&c, &q_raw, true));
        let w = rat(w.0, w.1);
        let replacement = VecExpr::term(rat(r.0.0, r.0.1), "u") + VecExpr::term(rat(r.1.0, r.1.1), "v");
        let reduced = c.without_vector("w").unwrap();
        let sub = |x: &StructuredPolynomial| x.substitute_into("w", &replacement, &reduced).unwrap();
        let combined_first = sub(&StructuredPolynomial::combine(&[(w.clone(), &p), (int(1), &q)]).unwrap());
        let substituted_first = StructuredPolynomial::combine(&[(w, &sub(&p)), (int(1), &sub(&q))]).unwrap();
        prop_assert!(combined_first.gram().is_symmetric());
        prop_assert_eq!(combined_first, substituted_first);
    }
}

/// The coefficient of `x_star * g_k` in the two interpolation conditions that
/// involve it, as in the hand-derived coefficient-matching row
/// `0 = 2 Q - 2 alpha (mu/L)(sigma_2 + sigma_5) - sigma_5`.
#[test]
fn interpolation_cross_coefficients() {
    let class = FunctionClass::smooth(int(1), int(3)).unwrap();
    let problem = build_default(&class, &AlgorithmSpec::gd_els()).unwrap();
    let alpha = class.alpha();
    let cross = &alpha * int(2) * rat(1, 3);
    let key = Monomial::product("x_star", "g_k");
    let coefficient = |i: usize| problem.inequalities[i].poly.expand_univariate().get(&key).cloned().unwrap_or_else(|| int(0));
    assert_eq!(coefficient(1), -cross.clone());
    assert_eq!(coefficient(4), -cross - int(1));
}
