//! A small dense interior-point solver for cone programs over products of
//! the nonnegative orthant and positive semidefinite cones.
//!
//! Intended for problems with at most a few hundred variables, where dense
//! factorizations are cheap and robustness matters more than scale.

pub mod cone;
mod scaling;
mod solver;

pub use cone::{smat, svec, svec_index, svec_len, svec_weight, ConeDims};
pub use solver::{ConeProblem, Settings, Solution, Status};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConicError {
    #[error("dimension mismatch for {what}: got {got:?}, expected {want:?}")]
    Dimension {
        what: &'static str,
        got: (usize, usize),
        want: (usize, usize),
    },
    #[error("problem data contains non-finite entries")]
    NonFinite,
}
