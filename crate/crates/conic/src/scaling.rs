//! Nesterov–Todd scaling for the product cone.
//!
//! For the current pair `(s, z)` the scaling `W` satisfies
//! `W^{-T} s = W z = lambda`, with `lambda` diagonal in every block.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::cone::{smat, svec, svec_len, ConeDims};

#[derive(Debug, Clone)]
struct PsdScaling {
    offset: usize,
    dim: usize,
    r: DMatrix<f64>,
    r_inv: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct NtScaling {
    nonneg_d: DVector<f64>,
    blocks: Vec<PsdScaling>,
    /// Scaled point as a flat cone vector (diagonal in every PSD block).
    pub(crate) lambda: DVector<f64>,
    /// Eigenvalues of each PSD block of `lambda`.
    lambda_blocks: Vec<DVector<f64>>,
    nonneg: usize,
}

/// A factor `L` with `L L^T = M`; Cholesky when possible, otherwise a
/// symmetric square root with eigenvalues clamped away from zero.
fn psd_factor(m: &DMatrix<f64>) -> DMatrix<f64> {
    if let Some(ch) = m.clone().cholesky() {
        return ch.l();
    }
    let eig = SymmetricEigen::new(m.clone());
    let floor = 1e-300_f64;
    let sq = eig.eigenvalues.map(|v| v.max(floor).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&sq)
}

impl NtScaling {
    pub(crate) fn new(dims: &ConeDims, s: &DVector<f64>, z: &DVector<f64>) -> Option<Self> {
        let p = dims.nonneg;
        let mut nonneg_d = DVector::zeros(p);
        let mut lambda = DVector::zeros(dims.len());
        for i in 0..p {
            if !(s[i] > 0.0 && z[i] > 0.0) {
                return None;
            }
            nonneg_d[i] = (s[i] / z[i]).sqrt();
            lambda[i] = (s[i] * z[i]).sqrt();
        }
        let mut blocks = Vec::with_capacity(dims.psd.len());
        let mut lambda_blocks = Vec::with_capacity(dims.psd.len());
        for (off, d) in dims.psd_offsets() {
            let n = svec_len(d);
            let sm = smat(&s.rows(off, n).into_owned(), d);
            let zm = smat(&z.rows(off, n).into_owned(), d);
            let ls = psd_factor(&sm);
            let lz = psd_factor(&zm);
            let svd = (lz.transpose() * &ls).svd(true, true);
            let vt = svd.v_t?;
            let sing = svd.singular_values;
            if sing.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
                return None;
            }
            let inv_sqrt = sing.map(|v| 1.0 / v.sqrt());
            let r = &ls * vt.transpose() * DMatrix::from_diagonal(&inv_sqrt);
            let r_inv = r.clone().try_inverse()?;
            let lam_mat = DMatrix::from_diagonal(&sing);
            lambda.rows_mut(off, n).copy_from(&svec(&lam_mat));
            lambda_blocks.push(sing);
            blocks.push(PsdScaling {
                offset: off,
                dim: d,
                r,
                r_inv,
            });
        }
        Some(Self {
            nonneg_d,
            blocks,
            lambda,
            lambda_blocks,
            nonneg: p,
        })
    }

    fn map_blocks(
        &self,
        v: &DVector<f64>,
        orthant: impl Fn(f64, f64) -> f64,
        block: impl Fn(&PsdScaling, &DMatrix<f64>) -> DMatrix<f64>,
    ) -> DVector<f64> {
        let mut out = DVector::zeros(v.len());
        for i in 0..self.nonneg {
            out[i] = orthant(v[i], self.nonneg_d[i]);
        }
        for b in &self.blocks {
            let n = svec_len(b.dim);
            let m = smat(&v.rows(b.offset, n).into_owned(), b.dim);
            out.rows_mut(b.offset, n).copy_from(&svec(&block(b, &m)));
        }
        out
    }

    /// `W v`
    pub(crate) fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        self.map_blocks(v, |x, d| x * d, |b, m| b.r.transpose() * m * &b.r)
    }

    /// `W^T v`
    pub(crate) fn apply_t(&self, v: &DVector<f64>) -> DVector<f64> {
        self.map_blocks(v, |x, d| x * d, |b, m| &b.r * m * b.r.transpose())
    }

    /// `W^{-1} v`
    pub(crate) fn apply_inv(&self, v: &DVector<f64>) -> DVector<f64> {
        self.map_blocks(v, |x, d| x / d, |b, m| b.r_inv.transpose() * m * &b.r_inv)
    }

    /// `W^{-T} v`
    pub(crate) fn apply_inv_t(&self, v: &DVector<f64>) -> DVector<f64> {
        self.map_blocks(v, |x, d| x / d, |b, m| &b.r_inv * m * b.r_inv.transpose())
    }

    /// `lambda o v`
    pub(crate) fn lambda_product(&self, v: &DVector<f64>) -> DVector<f64> {
        self.lambda_elementwise(v, |a, b| 0.5 * (a + b))
    }

    /// Solves `lambda o x = v` for `x`.
    pub(crate) fn lambda_divide(&self, v: &DVector<f64>) -> DVector<f64> {
        self.lambda_elementwise(v, |a, b| 2.0 / (a + b))
    }

    fn lambda_elementwise(&self, v: &DVector<f64>, weight: impl Fn(f64, f64) -> f64) -> DVector<f64> {
        let mut out = DVector::zeros(v.len());
        for i in 0..self.nonneg {
            let l = self.lambda[i];
            out[i] = v[i] * weight(l, l);
        }
        for (b, lam) in self.blocks.iter().zip(&self.lambda_blocks) {
            let mut k = b.offset;
            for j in 0..b.dim {
                for i in j..b.dim {
                    out[k] = v[k] * weight(lam[i], lam[j]);
                    k += 1;
                }
            }
        }
        out
    }

    /// Largest `alpha` keeping `lambda + alpha * dv` inside the cone,
    /// where `dv` is a direction already expressed in scaled coordinates.
    pub(crate) fn max_step(&self, dv: &DVector<f64>) -> f64 {
        let mut alpha = f64::INFINITY;
        for i in 0..self.nonneg {
            if dv[i] < 0.0 {
                alpha = alpha.min(-self.lambda[i] / dv[i]);
            }
        }
        for (b, lam) in self.blocks.iter().zip(&self.lambda_blocks) {
            let n = svec_len(b.dim);
            let dm = smat(&dv.rows(b.offset, n).into_owned(), b.dim);
            let scale = lam.map(|v| 1.0 / v.sqrt());
            let mut t = dm;
            for i in 0..b.dim {
                for j in 0..b.dim {
                    t[(i, j)] *= scale[i] * scale[j];
                }
            }
            let min_eig = SymmetricEigen::new(t).eigenvalues.min();
            if min_eig < 0.0 {
                alpha = alpha.min(-1.0 / min_eig);
            }
        }
        alpha
    }
}
