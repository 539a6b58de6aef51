//! SDPA sparse text export of the presolved program, for feeding the same
//! instance to an external solver.
//!
//! SDPA form: minimize `c . w` subject to `sum_k w_k F_k - F_0 ⪰ 0`. Block 1
//! is the Gram block (after facial reduction), block 2 is diagonal and holds
//! the remaining nonnegativity rows. Equalities are already eliminated.

use std::fmt::Write as _;

use num_traits::Zero;

use super::presolve::{presolve, PresolveOutcome};
use super::SdpProblem;
use crate::numeric::{to_f64, Rational};

/// Renders the reduced problem, or an error message if presolve already decided it
/// (infeasible or unbounded). The header comment lists how to map the SDPA
/// variables back: `x = x0 + N w`.
pub fn write_sdpa(sdp: &SdpProblem) -> Result<String, String> {
    let red = presolve(sdp).map_err(|outcome| match outcome {
        PresolveOutcome::Infeasible(why) => format!("infeasible during presolve: {why}"),
        PresolveOutcome::Unbounded => "unbounded during presolve".to_string(),
    })?;
    let k = red.basis.cols();
    let d = red.lmi.constant.rows();
    let nn = red.nonneg_rows.len();

    let mut out = String::new();
    let _ = writeln!(out, "\"reduced certificate SDP, objective offset {}", to_f64(&red.objective_offset));
    let kept: Vec<&str> = red.kept.iter().map(|&i| sdp.block_labels[i].as_str()).collect();
    let _ = writeln!(out, "* gram block rows kept: {}", kept.join(" "));
    for (i, var) in sdp.variables.iter().enumerate() {
        let coeffs: Vec<String> = (0..k).map(|c| format!("{}", to_f64(red.basis.get(i, c)))).collect();
        let _ = writeln!(out, "* {} = {} + [{}] . w", var.name, to_f64(&red.x0[i]), coeffs.join(" "));
    }
    let mut blocks = Vec::new();
    if d > 0 {
        blocks.push(d as i64);
    }
    if nn > 0 {
        blocks.push(-(nn as i64));
    }
    let _ = writeln!(out, "{k}");
    let _ = writeln!(out, "{}", blocks.len());
    let _ = writeln!(out, "{}", blocks.iter().map(i64::to_string).collect::<Vec<_>>().join(" "));
    let _ = writeln!(out, "{}", red.objective.iter().map(|c| to_f64(c).to_string()).collect::<Vec<_>>().join(" "));

    let diag_block = if d > 0 { 2 } else { 1 };
    let mut entry = |mat: usize, block: usize, i: usize, j: usize, v: &Rational| {
        if !v.is_zero() {
            let _ = writeln!(out, "{mat} {block} {} {} {}", i + 1, j + 1, to_f64(v));
        }
    };
    // F_0 = -constant
    for i in 0..d {
        for j in i..d {
            entry(0, 1, i, j, &-red.lmi.constant.get(i, j).clone());
        }
    }
    for (r, &i) in red.nonneg_rows.iter().enumerate() {
        entry(0, diag_block, r, r, &-red.x0[i].clone());
    }
    for c in 0..k {
        for i in 0..d {
            for j in i..d {
                entry(c + 1, 1, i, j, red.lmi.coefficients[c].get(i, j));
            }
        }
        for (r, &i) in red.nonneg_rows.iter().enumerate() {
            entry(c + 1, diag_block, r, r, red.basis.get(i, c));
        }
    }
    Ok(out)
}
