//! Exact positive-semidefiniteness tests for rational symmetric matrices.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{One, Signed, Zero};

use super::CertifyError;
use crate::numeric::{int, Rational};
use crate::ratmat::RatMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsdMethod {
    /// Symmetric-pivoted LDLᵀ elimination.
    RationalLdl,
    /// Sign pattern of the characteristic polynomial.
    CharpolyDescartes,
}

impl fmt::Display for PsdMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PsdMethod::RationalLdl => "rational_ldl",
            PsdMethod::CharpolyDescartes => "charpoly_descartes",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PsdWitness {
    /// Pivots in elimination order, each tagged with its original index.
    /// A failed run ends at the offending pivot or zero-diagonal row.
    Pivots(Vec<(usize, Rational)>),
    /// Coefficients of `det(xI - M)` from the leading one down.
    Charpoly(Vec<Rational>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PsdVerdict {
    pub is_psd: bool,
    pub method: PsdMethod,
    pub witness: PsdWitness,
}

impl PsdVerdict {
    /// Sign of each witness entry (`-1`, `0` or `1`).
    pub fn signs(&self) -> Vec<i8> {
        let values: Vec<&Rational> = match &self.witness {
            PsdWitness::Pivots(p) => p.iter().map(|(_, v)| v).collect(),
            PsdWitness::Charpoly(c) => c.iter().collect(),
        };
        values
            .into_iter()
            .map(|v| match v.cmp(&Rational::zero()) {
                Ordering::Less => -1,
                Ordering::Equal => 0,
                Ordering::Greater => 1,
            })
            .collect()
    }
}

fn require_symmetric(m: &RatMatrix) -> Result<(), CertifyError> {
    if m.is_symmetric() {
        Ok(())
    } else {
        Err(CertifyError::NotSymmetric {
            rows: m.rows(),
            cols: m.cols(),
        })
    }
}

pub fn verify_psd(m: &RatMatrix, method: PsdMethod) -> Result<PsdVerdict, CertifyError> {
    require_symmetric(m)?;
    Ok(match method {
        PsdMethod::RationalLdl => ldl_verdict(m),
        PsdMethod::CharpolyDescartes => charpoly_verdict(m),
    })
}

/// Both verdicts; errors if they disagree, which would be a bug.
pub fn verify_psd_both(m: &RatMatrix) -> Result<(PsdVerdict, PsdVerdict), CertifyError> {
    let ldl = verify_psd(m, PsdMethod::RationalLdl)?;
    let cp = verify_psd(m, PsdMethod::CharpolyDescartes)?;
    if ldl.is_psd != cp.is_psd {
        return Err(CertifyError::PsdMethodsDisagree {
            ldl: ldl.is_psd,
            charpoly: cp.is_psd,
        });
    }
    Ok((ldl, cp))
}

/// Eliminates on the largest remaining diagonal entry. The matrix is PSD iff
/// every pivot is positive until the remaining block is exactly zero; a
/// negative diagonal, or a zero diagonal with a nonzero entry in its row,
/// refutes it.
fn ldl_verdict(m: &RatMatrix) -> PsdVerdict {
    let n = m.rows();
    let mut a = m.clone();
    let mut active: Vec<usize> = (0..n).collect();
    let mut pivots = Vec::new();
    let verdict = |is_psd, pivots| PsdVerdict {
        is_psd,
        method: PsdMethod::RationalLdl,
        witness: PsdWitness::Pivots(pivots),
    };
    while !active.is_empty() {
        if let Some(&neg) = active.iter().find(|&&i| a.get(i, i).is_negative()) {
            pivots.push((neg, a.get(neg, neg).clone()));
            return verdict(false, pivots);
        }
        // zero diagonal: its whole active row must vanish
        for &i in &active {
            if a.get(i, i).is_zero() && active.iter().any(|&j| !a.get(i, j).is_zero()) {
                pivots.push((i, Rational::zero()));
                return verdict(false, pivots);
            }
        }
        let best = active
            .iter()
            .copied()
            .max_by(|&i, &j| a.get(i, i).cmp(a.get(j, j)))
            .expect("active is nonempty");
        let d = a.get(best, best).clone();
        if d.is_zero() {
            // every remaining diagonal is zero, so the rest is zero
            break;
        }
        pivots.push((best, d.clone()));
        active.retain(|&i| i != best);
        for &i in &active {
            let f = a.get(i, best) / &d;
            if f.is_zero() {
                continue;
            }
            for &j in &active {
                let v = a.get(i, j) - &f * a.get(best, j);
                a.set(i, j, v);
            }
        }
    }
    verdict(true, pivots)
}

/// Coefficients of `det(xI - M)` (leading coefficient first) by the
/// Faddeev–LeVerrier recursion, exact over the rationals.
pub fn characteristic_polynomial(m: &RatMatrix) -> Vec<Rational> {
    let n = m.rows();
    // c[k] is the coefficient of x^(n-k)
    let mut c = vec![Rational::one()];
    let mut mk = RatMatrix::zeros(n, n);
    let identity = RatMatrix::identity(n);
    for k in 1..=n {
        mk = m.mul(&mk).add_scaled(&c[k - 1], &identity);
        let ck = -m.mul(&mk).trace() / int(k as i64);
        c.push(ck);
    }
    c
}

/// A real-rooted polynomial has only nonnegative roots iff its coefficients
/// weakly alternate in sign (Descartes); symmetric matrices are real-rooted.
fn charpoly_verdict(m: &RatMatrix) -> PsdVerdict {
    let c = characteristic_polynomial(m);
    let is_psd = c.iter().enumerate().all(|(k, ck)| {
        // the coefficient of x^(n-k) must have sign (-1)^k or be zero
        if k % 2 == 0 {
            !ck.is_negative()
        } else {
            !ck.is_positive()
        }
    });
    PsdVerdict {
        is_psd,
        method: PsdMethod::CharpolyDescartes,
        witness: PsdWitness::Charpoly(c),
    }
}
