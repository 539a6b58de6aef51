//! Exact rational reduction of an [`SdpProblem`] to a free-variable conic
//! program.
//!
//! 1. The equality rows are solved exactly: `x = x0 + N w`.
//! 2. Any LMI diagonal entry that vanishes identically in `w` forces its
//!    whole row to zero (trivial facial reduction); those entries become new
//!    equalities and the row is dropped. Repeat until stable.
//! 3. Directions of `w` invisible to every cone constraint are removed; if
//!    the objective moves along one of them the problem is unbounded.

use num_traits::{One, Signed, Zero};

use super::{LmiSense, SdpProblem};
use crate::numeric::Rational;
use crate::ratmat::{rref, RatMatrix};

/// Affine matrix `constant + sum_k w_k * coefficients[k]`.
#[derive(Debug, Clone)]
pub(crate) struct AffineLmi {
    pub constant: RatMatrix,
    pub coefficients: Vec<RatMatrix>,
}

#[derive(Debug, Clone)]
pub(crate) struct Reduced {
    /// Particular solution of the equality rows.
    pub x0: Vec<Rational>,
    /// `x = x0 + basis * w`; `basis` is `n_vars x k`.
    pub basis: RatMatrix,
    /// Objective as a function of `w`.
    pub objective: Vec<Rational>,
    pub objective_offset: Rational,
    /// Rows `x0[i] + basis[i, :] w >= 0` of the nonnegative variables that
    /// still depend on `w`.
    pub nonneg_rows: Vec<usize>,
    /// LMI in `w`, always in the `>= 0` sense, over the kept block indices.
    pub lmi: AffineLmi,
    pub kept: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum PresolveOutcome {
    Infeasible(String),
    Unbounded,
}

fn lmi_psd_sense(sdp: &SdpProblem) -> (RatMatrix, Vec<RatMatrix>) {
    let flip = matches!(sdp.sense, LmiSense::Nsd);
    let w = if flip { -Rational::one() } else { Rational::one() };
    (
        sdp.lmi_constant.scale(&w),
        sdp.lmi_coefficients.iter().map(|m| m.scale(&w)).collect(),
    )
}

/// Solves `A x = b` exactly: particular solution and null-space basis.
fn affine_solution(
    rows: &[(Vec<Rational>, Rational)],
    n: usize,
) -> Result<(Vec<Rational>, RatMatrix), PresolveOutcome> {
    let mut aug = RatMatrix::zeros(rows.len(), n + 1);
    for (i, (coeffs, rhs)) in rows.iter().enumerate() {
        for (j, c) in coeffs.iter().enumerate() {
            aug.set(i, j, c.clone());
        }
        aug.set(i, n, rhs.clone());
    }
    let (r, pivots) = rref(&aug);
    if pivots.last() == Some(&n) {
        return Err(PresolveOutcome::Infeasible("inconsistent equality rows".into()));
    }
    let mut x0 = vec![Rational::zero(); n];
    for (row, &col) in pivots.iter().enumerate() {
        x0[col] = r.get(row, n).clone();
    }
    let free: Vec<usize> = (0..n).filter(|j| !pivots.contains(j)).collect();
    let mut basis = RatMatrix::zeros(n, free.len());
    for (k, &f) in free.iter().enumerate() {
        basis.set(f, k, Rational::one());
        for (row, &col) in pivots.iter().enumerate() {
            basis.set(col, k, -r.get(row, f).clone());
        }
    }
    Ok((x0, basis))
}

fn restrict(m: &RatMatrix, idx: &[usize]) -> RatMatrix {
    let mut out = RatMatrix::zeros(idx.len(), idx.len());
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate() {
            out.set(a, b, m.get(i, j).clone());
        }
    }
    out
}

fn lmi_in_w(f0: &RatMatrix, fs: &[RatMatrix], x0: &[Rational], basis: &RatMatrix) -> AffineLmi {
    let mut constant = f0.clone();
    for (x, f) in x0.iter().zip(fs) {
        if !x.is_zero() {
            constant = constant.add_scaled(x, f);
        }
    }
    let coefficients = (0..basis.cols())
        .map(|k| {
            let mut m = RatMatrix::zeros(f0.rows(), f0.cols());
            for (i, f) in fs.iter().enumerate() {
                let c = basis.get(i, k);
                if !c.is_zero() {
                    m = m.add_scaled(c, f);
                }
            }
            m
        })
        .collect();
    AffineLmi { constant, coefficients }
}

pub(crate) fn presolve(sdp: &SdpProblem) -> Result<Reduced, PresolveOutcome> {
    let n = sdp.variables.len();
    let (f0_full, fs_full) = lmi_psd_sense(sdp);
    let mut rows: Vec<(Vec<Rational>, Rational)> = sdp
        .equalities
        .iter()
        .map(|r| (r.coefficients.clone(), r.rhs.clone()))
        .collect();
    let mut kept: Vec<usize> = (0..f0_full.rows()).collect();

    let (x0, basis, lmi) = loop {
        let (x0, basis) = affine_solution(&rows, n)?;
        let f0 = restrict(&f0_full, &kept);
        let fs: Vec<RatMatrix> = fs_full.iter().map(|f| restrict(f, &kept)).collect();
        let lmi = lmi_in_w(&f0, &fs, &x0, &basis);
        let mut forced = None;
        for a in 0..kept.len() {
            let diag = lmi.constant.get(a, a);
            let varies = lmi.coefficients.iter().any(|m| !m.get(a, a).is_zero());
            if !varies {
                if diag.is_negative() {
                    return Err(PresolveOutcome::Infeasible(format!(
                        "LMI diagonal {} is the negative constant {diag}",
                        kept[a]
                    )));
                }
                if diag.is_zero() {
                    forced = Some(a);
                    break;
                }
            }
        }
        let Some(a) = forced else {
            break (x0, basis, lmi);
        };
        // the whole row must vanish: F0[a, b] + sum_i x_i F_i[a, b] = 0
        for b in 0..kept.len() {
            if b == a {
                continue;
            }
            let coeffs: Vec<Rational> = fs.iter().map(|f| f.get(a, b).clone()).collect();
            let rhs = -f0.get(a, b).clone();
            if coeffs.iter().all(Zero::is_zero) {
                if !rhs.is_zero() {
                    return Err(PresolveOutcome::Infeasible(format!(
                        "LMI row {} has a zero diagonal but a nonzero constant off-diagonal",
                        kept[a]
                    )));
                }
                continue;
            }
            rows.push((coeffs, rhs));
        }
        kept.remove(a);
    };

    // nonnegativity rows that still depend on w
    let mut nonneg_rows = Vec::new();
    for (i, var) in sdp.variables.iter().enumerate() {
        if !var.nonneg {
            continue;
        }
        if (0..basis.cols()).all(|k| basis.get(i, k).is_zero()) {
            if x0[i].is_negative() {
                return Err(PresolveOutcome::Infeasible(format!(
                    "{} is fixed at the negative value {}",
                    var.name, x0[i]
                )));
            }
        } else {
            nonneg_rows.push(i);
        }
    }

    let objective_offset = sdp.objective.iter().zip(&x0).fold(Rational::zero(), |acc, (c, x)| acc + c * x);
    let objective: Vec<Rational> = (0..basis.cols())
        .map(|k| {
            sdp.objective
                .iter()
                .enumerate()
                .fold(Rational::zero(), |acc, (i, c)| acc + c * basis.get(i, k))
        })
        .collect();

    // columns of the cone map, one row per scalar it touches
    let k = basis.cols();
    let dim = lmi.constant.rows();
    let n_rows = nonneg_rows.len() + dim * (dim + 1) / 2;
    let mut g = RatMatrix::zeros(n_rows, k);
    for (r, &i) in nonneg_rows.iter().enumerate() {
        for c in 0..k {
            g.set(r, c, basis.get(i, c).clone());
        }
    }
    let mut r = nonneg_rows.len();
    for a in 0..dim {
        for b in a..dim {
            for c in 0..k {
                g.set(r, c, lmi.coefficients[c].get(a, b).clone());
            }
            r += 1;
        }
    }
    let (gr, pivots) = rref(&g);
    for c in (0..k).filter(|c| !pivots.contains(c)) {
        // column c = sum_p gr[row(p), c] * column p
        let mut reduced_cost = objective[c].clone();
        for (row, &p) in pivots.iter().enumerate() {
            reduced_cost -= gr.get(row, c) * &objective[p];
        }
        if !reduced_cost.is_zero() {
            return Err(PresolveOutcome::Unbounded);
        }
    }
    let mut basis_kept = RatMatrix::zeros(n, pivots.len());
    for (new, &p) in pivots.iter().enumerate() {
        for i in 0..n {
            basis_kept.set(i, new, basis.get(i, p).clone());
        }
    }
    Ok(Reduced {
        x0,
        objective: pivots.iter().map(|&p| objective[p].clone()).collect(),
        objective_offset,
        nonneg_rows,
        lmi: AffineLmi {
            constant: lmi.constant,
            coefficients: pivots.iter().map(|&p| lmi.coefficients[p].clone()).collect(),
        },
        basis: basis_kept,
        kept,
    })
}
