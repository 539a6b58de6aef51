//! Cone bookkeeping: the product of a nonnegative orthant and a list of
//! positive semidefinite blocks, stored as one flat vector.
//!
//! PSD blocks use the scaled lower-triangular `svec` layout (column-major,
//! off-diagonals multiplied by `sqrt(2)`) so that the Euclidean inner product
//! of two svecs equals the trace inner product of the matrices.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use std::f64::consts::SQRT_2;

/// Shape of the cone `K = R^p_+ x S^{d_1}_+ x ... x S^{d_k}_+`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConeDims {
    pub nonneg: usize,
    pub psd: Vec<usize>,
}

impl ConeDims {
    pub fn new(nonneg: usize, psd: Vec<usize>) -> Self {
        Self { nonneg, psd }
    }

    /// Length of a flat cone vector.
    pub fn len(&self) -> usize {
        self.nonneg + self.psd.iter().map(|&d| svec_len(d)).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Barrier degree: number of orthant entries plus the order of every block.
    pub fn degree(&self) -> usize {
        self.nonneg + self.psd.iter().sum::<usize>()
    }

    /// Offsets of each PSD block inside the flat vector.
    pub(crate) fn psd_offsets(&self) -> Vec<(usize, usize)> {
        let mut off = self.nonneg;
        self.psd
            .iter()
            .map(|&d| {
                let start = off;
                off += svec_len(d);
                (start, d)
            })
            .collect()
    }

    /// The cone identity `e` (ones on the orthant, identity matrices on the blocks).
    pub fn identity(&self) -> DVector<f64> {
        let mut e = DVector::zeros(self.len());
        for i in 0..self.nonneg {
            e[i] = 1.0;
        }
        for (off, d) in self.psd_offsets() {
            let blk = svec(&DMatrix::identity(d, d));
            e.rows_mut(off, blk.len()).copy_from(&blk);
        }
        e
    }

    /// Smallest "eigenvalue" of a cone vector: the minimum orthant entry or
    /// block eigenvalue. Returns `+inf` for the empty cone.
    pub fn min_eigenvalue(&self, v: &DVector<f64>) -> f64 {
        let mut m = f64::INFINITY;
        for i in 0..self.nonneg {
            m = m.min(v[i]);
        }
        for (off, d) in self.psd_offsets() {
            let mat = smat(&v.rows(off, svec_len(d)).into_owned(), d);
            let eig = SymmetricEigen::new(mat).eigenvalues;
            m = m.min(eig.min());
        }
        m
    }
}

pub fn svec_len(d: usize) -> usize {
    d * (d + 1) / 2
}

/// Scaled lower-triangle vectorization of a symmetric matrix.
pub fn svec(m: &DMatrix<f64>) -> DVector<f64> {
    let d = m.nrows();
    let mut out = DVector::zeros(svec_len(d));
    let mut k = 0;
    for j in 0..d {
        for i in j..d {
            out[k] = if i == j {
                m[(i, i)]
            } else {
                SQRT_2 * 0.5 * (m[(i, j)] + m[(j, i)])
            };
            k += 1;
        }
    }
    out
}

/// Inverse of [`svec`].
pub fn smat(v: &DVector<f64>, d: usize) -> DMatrix<f64> {
    debug_assert_eq!(v.len(), svec_len(d));
    let mut m = DMatrix::zeros(d, d);
    let mut k = 0;
    for j in 0..d {
        for i in j..d {
            if i == j {
                m[(i, i)] = v[k];
            } else {
                let x = v[k] / SQRT_2;
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
            k += 1;
        }
    }
    m
}

/// Index of entry `(i, j)` (any order) inside an svec of order `d`.
pub fn svec_index(d: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i >= j { (i, j) } else { (j, i) };
    // columns 0..j hold d + (d-1) + ... + (d-j+1) entries
    let column_start = j * d - j * j.saturating_sub(1) / 2;
    column_start + (i - j)
}

/// Weight applied to entry `(i, j)` by [`svec`] (1 on the diagonal, `sqrt(2)` off it).
pub fn svec_weight(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        SQRT_2
    }
}

/// Jordan product `u o v` on the cone algebra.
pub(crate) fn jordan_product(dims: &ConeDims, u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(u.len());
    for i in 0..dims.nonneg {
        out[i] = u[i] * v[i];
    }
    for (off, d) in dims.psd_offsets() {
        let n = svec_len(d);
        let um = smat(&u.rows(off, n).into_owned(), d);
        let vm = smat(&v.rows(off, n).into_owned(), d);
        let p = (&um * &vm + &vm * &um) * 0.5;
        out.rows_mut(off, n).copy_from(&svec(&p));
    }
    out
}
