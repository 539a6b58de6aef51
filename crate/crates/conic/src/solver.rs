//! Homogeneous self-dual primal-dual interior-point method with
//! Nesterov–Todd scaling and a Mehrotra predictor-corrector.
//!
//! Solves
//!
//! ```text
//! minimize    c'x
//! subject to  G x + s = h,  A x = b,  s in K
//! ```
//!
//! together with its dual
//!
//! ```text
//! maximize    -h'z - b'y
//! subject to  G'z + A'y + c = 0,  z in K.
//! ```

use nalgebra::{DMatrix, DVector};

use crate::cone::ConeDims;
use crate::scaling::NtScaling;
use crate::ConicError;

/// Merit bound for an iterate reported as almost optimal.
const ALMOST_MERIT: f64 = 1e2;
/// Merit bound for an iterate still worth returning after a stall.
const STALL_MERIT: f64 = 1e3;

/// Problem data. `a` may have zero rows; `g` must have `cones.len()` rows.
#[derive(Debug, Clone)]
pub struct ConeProblem {
    pub c: DVector<f64>,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub g: DMatrix<f64>,
    pub h: DVector<f64>,
    pub cones: ConeDims,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub feastol: f64,
    pub abstol: f64,
    pub reltol: f64,
    pub max_iter: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            feastol: 1e-8,
            abstol: 1e-8,
            reltol: 1e-8,
            max_iter: 100,
        }
    }
}

impl Settings {
    /// All three tolerances set to `tol`.
    pub fn with_tolerance(tol: f64) -> Self {
        Self {
            feastol: tol,
            abstol: tol,
            reltol: tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    /// The best iterate meets every stopping test within a factor of 100
    /// but the solve could not tighten it further.
    AlmostOptimal,
    MaxIterations,
    NumericalError,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub status: Status,
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub s: DVector<f64>,
    pub z: DVector<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub iterations: usize,
    /// Relative primal residual at termination.
    pub primal_residual: f64,
    /// Relative dual residual at termination.
    pub dual_residual: f64,
    /// Duality gap `s'z` at termination.
    pub gap: f64,
}

/// Factorized scaled KKT matrix `[0 A' Gs'; A 0 0; Gs 0 -I]`, `Gs = W^{-T} G`.
struct Kkt {
    n: usize,
    p: usize,
    mat: DMatrix<f64>,
    lu: nalgebra::linalg::FullPivLU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl Kkt {
    fn new(a: &DMatrix<f64>, gs: &DMatrix<f64>, reg: f64) -> Self {
        let n = gs.ncols();
        let p = a.nrows();
        let m = gs.nrows();
        let dim = n + p + m;
        let mut mat = DMatrix::zeros(dim, dim);
        mat.view_mut((n, 0), (p, n)).copy_from(a);
        mat.view_mut((0, n), (n, p)).copy_from(&a.transpose());
        mat.view_mut((n + p, 0), (m, n)).copy_from(gs);
        mat.view_mut((0, n + p), (n, m)).copy_from(&gs.transpose());
        for i in 0..m {
            mat[(n + p + i, n + p + i)] = -1.0;
        }
        let mut factored = mat.clone();
        for i in 0..n {
            factored[(i, i)] += reg;
        }
        for i in 0..p {
            factored[(n + i, n + i)] -= reg;
        }
        let lu = factored.full_piv_lu();
        Self { n, p, mat, lu }
    }

    /// Solves with a few rounds of iterative refinement against the
    /// unregularized matrix.
    fn solve(&self, rhs: &DVector<f64>) -> Option<DVector<f64>> {
        let mut x = self.lu.solve(rhs)?;
        for _ in 0..3 {
            let r = rhs - &self.mat * &x;
            if r.amax() <= 1e-15 * (1.0 + rhs.amax()) {
                break;
            }
            let dx = self.lu.solve(&r)?;
            x += dx;
        }
        if x.iter().all(|v| v.is_finite()) {
            Some(x)
        } else {
            None
        }
    }

    fn split(&self, v: &DVector<f64>) -> (DVector<f64>, DVector<f64>, DVector<f64>) {
        let (n, p) = (self.n, self.p);
        let m = v.len() - n - p;
        (
            v.rows(0, n).into_owned(),
            v.rows(n, p).into_owned(),
            v.rows(n + p, m).into_owned(),
        )
    }
}

fn stack(parts: &[&DVector<f64>]) -> DVector<f64> {
    let len = parts.iter().map(|p| p.len()).sum();
    let mut out = DVector::zeros(len);
    let mut off = 0;
    for p in parts {
        out.rows_mut(off, p.len()).copy_from(p);
        off += p.len();
    }
    out
}

fn scale_columns(w: &NtScaling, g: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(g.nrows(), g.ncols());
    for j in 0..g.ncols() {
        let col = w.apply_inv_t(&g.column(j).into_owned());
        out.set_column(j, &col);
    }
    out
}

struct Direction {
    dx: DVector<f64>,
    dy: DVector<f64>,
    dz: DVector<f64>,
    ds: DVector<f64>,
    dtau: f64,
    dkappa: f64,
}

impl ConeProblem {
    fn validate(&self) -> Result<(), ConicError> {
        let n = self.c.len();
        let m = self.cones.len();
        let check = |what: &'static str, got: (usize, usize), want: (usize, usize)| {
            if got == want {
                Ok(())
            } else {
                Err(ConicError::Dimension { what, got, want })
            }
        };
        check("A", self.a.shape(), (self.b.len(), n))?;
        check("G", self.g.shape(), (m, n))?;
        check("h", (self.h.len(), 1), (m, 1))?;
        if self.c.iter().chain(self.a.iter()).chain(self.b.iter()).chain(self.g.iter()).chain(self.h.iter()).any(|v| !v.is_finite()) {
            return Err(ConicError::NonFinite);
        }
        Ok(())
    }

    /// Runs the interior-point method.
    pub fn solve(&self, settings: &Settings) -> Result<Solution, ConicError> {
        self.validate()?;
        Ok(Engine::new(self, settings).run())
    }
}

struct Engine<'a> {
    pb: &'a ConeProblem,
    st: &'a Settings,
    resx0: f64,
    resy0: f64,
    resz0: f64,
}

impl<'a> Engine<'a> {
    fn new(pb: &'a ConeProblem, st: &'a Settings) -> Self {
        Self {
            pb,
            st,
            resx0: pb.c.norm().max(1.0),
            resy0: pb.b.norm().max(1.0),
            resz0: pb.h.norm().max(1.0),
        }
    }

    fn kkt(&self, w: Option<&NtScaling>) -> Kkt {
        let gs = match w {
            Some(w) => scale_columns(w, &self.pb.g),
            None => self.pb.g.clone(),
        };
        Kkt::new(&self.pb.a, &gs, 0.0)
    }

    fn kkt_solve(&self, w: Option<&NtScaling>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
        let k = self.kkt(w);
        if let Some(x) = k.solve(rhs) {
            return Some(x);
        }
        let gs = match w {
            Some(w) => scale_columns(w, &self.pb.g),
            None => self.pb.g.clone(),
        };
        Kkt::new(&self.pb.a, &gs, 1e-10).solve(rhs)
    }

    fn shift_interior(&self, v: &mut DVector<f64>) {
        let dims = &self.pb.cones;
        let m = dims.min_eigenvalue(v);
        if m.is_finite() && m <= 0.0 {
            *v += dims.identity() * (1.0 - m);
        } else if m.is_finite() && m < 1e-8 {
            *v += dims.identity() * 1e-8;
        }
    }

    fn initial_point(&self) -> Option<(DVector<f64>, DVector<f64>, DVector<f64>, DVector<f64>)> {
        let n = self.pb.c.len();
        let p = self.pb.b.len();
        let m = self.pb.h.len();
        let primal = self.kkt_solve(None, &stack(&[&DVector::zeros(n), &self.pb.b, &self.pb.h]))?;
        let (x, _, zp) = split3(&primal, n, p);
        let mut s = -zp;
        let dual = self.kkt_solve(None, &stack(&[&(-&self.pb.c), &DVector::zeros(p), &DVector::zeros(m)]))?;
        let (_, y, mut z) = split3(&dual, n, p);
        self.shift_interior(&mut s);
        self.shift_interior(&mut z);
        Some((x, y, s, z))
    }

    fn run(&self) -> Solution {
        let pb = self.pb;
        let dims = &pb.cones;
        let n = pb.c.len();
        let p = pb.b.len();
        let m = dims.len();
        let degree = dims.degree() as f64;

        let Some((mut x, mut y, mut s, mut z)) = self.initial_point() else {
            return self.finish(Status::NumericalError, 0, zeros(n), zeros(p), zeros(m), zeros(m), 1.0);
        };
        let (mut tau, mut kappa) = (1.0_f64, 1.0_f64);
        // lowest merit seen so far; merit <= 1 means all stopping tests pass
        let mut best: Option<(f64, DVector<f64>, DVector<f64>, DVector<f64>, DVector<f64>, f64, usize)> = None;

        for iter in 0..=self.st.max_iter {
            // residuals of the homogeneous system
            let rx = &pb.a.transpose() * &y + &pb.g.transpose() * &z + &pb.c * tau;
            let ry = &pb.b * tau - &pb.a * &x;
            let rz = &s + &pb.g * &x - &pb.h * tau;
            let cx = pb.c.dot(&x);
            let by = pb.b.dot(&y);
            let hz = pb.h.dot(&z);
            let rt = kappa + cx + by + hz;
            let gap = s.dot(&z);
            let mu = (gap + tau * kappa) / (degree + 1.0);

            let pcost = cx / tau;
            let dcost = -(by + hz) / tau;
            let pres = (ry.norm() / self.resy0).max(rz.norm() / self.resz0) / tau;
            let dres = rx.norm() / self.resx0 / tau;
            let gap_t = gap / (tau * tau);
            let relgap = if pcost < 0.0 {
                Some(gap_t / -pcost)
            } else if dcost > 0.0 {
                Some(gap_t / dcost)
            } else {
                None
            };
            let dual_ray = (&pb.a.transpose() * &y + &pb.g.transpose() * &z).norm() / self.resx0;
            let primal_ray = ((&pb.a * &x).norm() / self.resy0).max((&pb.g * &x + &s).norm() / self.resz0);
            let pinfres = if hz + by < 0.0 { Some(dual_ray / -(hz + by)) } else { None };
            let dinfres = if cx < 0.0 { Some(primal_ray / -cx) } else { None };

            if pres <= self.st.feastol
                && dres <= self.st.feastol
                && (gap_t <= self.st.abstol || relgap.is_some_and(|r| r <= self.st.reltol))
            {
                return self.finish_scaled(Status::Optimal, iter, x, y, s, z, tau, pres, dres);
            }
            if let Some(r) = pinfres {
                if r <= self.st.feastol {
                    let scale = 1.0 / -(hz + by);
                    return self.finish_ray(Status::PrimalInfeasible, iter, zeros(n), y * scale, zeros(m), z * scale);
                }
            }
            if let Some(r) = dinfres {
                if r <= self.st.feastol {
                    let scale = 1.0 / -cx;
                    return self.finish_ray(Status::DualInfeasible, iter, x * scale, zeros(p), s * scale, zeros(m));
                }
            }
            if iter == self.st.max_iter {
                break;
            }
            let gap_score = (gap_t / self.st.abstol).min(relgap.map_or(f64::INFINITY, |r| r / self.st.reltol));
            let merit = (pres / self.st.feastol).max(dres / self.st.feastol).max(gap_score);
            let best_merit = best.as_ref().map_or(f64::INFINITY, |b| b.0);
            if merit < best_merit {
                best = Some((merit, x.clone(), y.clone(), s.clone(), z.clone(), tau, iter));
            } else if best_merit <= STALL_MERIT && merit > 1e3 * best_merit {
                // accuracy is being lost faster than progress is made
                break;
            }

            let Some(w) = NtScaling::new(dims, &s, &z) else {
                break;
            };
            let kkt = {
                let gs = scale_columns(&w, &pb.g);
                let k = Kkt::new(&pb.a, &gs, 0.0);
                if k.lu.is_invertible() {
                    k
                } else {
                    Kkt::new(&pb.a, &gs, 1e-10)
                }
            };
            let lam = w.lambda.clone();
            let lam_sq = w.lambda_product(&lam);

            // u1 solves K u1 = (-c, b, h) (the coefficient of dtau)
            let Some(u1) = kkt.solve(&stack(&[&(-&pb.c), &pb.b, &w.apply_inv_t(&pb.h)])) else {
                break;
            };
            let (x1, y1, z1s) = kkt.split(&u1);
            let z1 = w.apply_inv(&z1s);

            let solve_dir = |ds_target: &DVector<f64>, dkappa_target: f64, eta: f64| -> Option<Direction> {
                let dx_r = -&rx * eta;
                let dy_r = -&ry * eta;
                let dz_r = -&rz * eta;
                let dt_r = -rt * eta;
                // eliminating ds = W'(lambda \ ds_target - W dz) leaves
                // G dx - W'W dz = dz_r - W'(lambda \ ds_target) + h dtau
                let lds = w.lambda_divide(ds_target);
                let r3 = &dz_r - w.apply_t(&lds);
                let rhs = stack(&[&dx_r, &(-&dy_r), &w.apply_inv_t(&r3)]);
                let u0 = kkt.solve(&rhs)?;
                let (x0, y0, z0s) = kkt.split(&u0);
                let z0 = w.apply_inv(&z0s);
                let num = -dt_r + dkappa_target / tau + pb.c.dot(&x0) + pb.b.dot(&y0) + pb.h.dot(&z0);
                let den = kappa / tau - (pb.c.dot(&x1) + pb.b.dot(&y1) + pb.h.dot(&z1));
                let dtau = num / den;
                let dx = x0 + &x1 * dtau;
                let dy = y0 + &y1 * dtau;
                let dz = z0 + &z1 * dtau;
                let ds = w.apply_t(&(&lds - w.apply(&dz)));
                let dkappa = (dkappa_target - kappa * dtau) / tau;
                Some(Direction { dx, dy, dz, ds, dtau, dkappa })
            };

            let step_len = |d: &Direction| -> f64 {
                let a_s = w.max_step(&w.apply_inv_t(&d.ds));
                let a_z = w.max_step(&w.apply(&d.dz));
                let mut a = a_s.min(a_z);
                if d.dtau < 0.0 {
                    a = a.min(-tau / d.dtau);
                }
                if d.dkappa < 0.0 {
                    a = a.min(-kappa / d.dkappa);
                }
                a
            };

            // predictor
            let Some(aff) = solve_dir(&(-&lam_sq), -tau * kappa, 1.0) else {
                break;
            };
            let alpha_aff = step_len(&aff).min(1.0);
            let sigma = (1.0 - alpha_aff).powi(3);

            // corrector
            let ds_aff = w.apply_inv_t(&aff.ds);
            let dz_aff = w.apply(&aff.dz);
            let cross = crate::cone::jordan_product(dims, &ds_aff, &dz_aff);
            let target = -&lam_sq + dims.identity() * (sigma * mu) - cross;
            let kappa_target = -tau * kappa + sigma * mu - aff.dtau * aff.dkappa;
            let Some(dir) = solve_dir(&target, kappa_target, 1.0 - sigma) else {
                break;
            };
            let alpha = (0.99 * step_len(&dir)).min(1.0);
            if !(alpha > 1e-14) {
                break;
            }
            x += &dir.dx * alpha;
            y += &dir.dy * alpha;
            z += &dir.dz * alpha;
            s += &dir.ds * alpha;
            tau += dir.dtau * alpha;
            kappa += dir.dkappa * alpha;
            if !(tau > 0.0 && kappa > 0.0) || x.iter().chain(z.iter()).any(|v| !v.is_finite()) {
                break;
            }
        }

        match best {
            Some((merit, x, y, s, z, tau, it)) if merit <= ALMOST_MERIT => {
                self.finish_scaled(Status::AlmostOptimal, it, x, y, s, z, tau, f64::NAN, f64::NAN)
            }
            Some((merit, x, y, s, z, tau, it)) if merit <= STALL_MERIT => {
                self.finish_scaled(Status::MaxIterations, it, x, y, s, z, tau, f64::NAN, f64::NAN)
            }
            _ => self.finish_scaled(Status::NumericalError, self.st.max_iter, x, y, s, z, tau, f64::NAN, f64::NAN),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn finish_scaled(
        &self,
        status: Status,
        iterations: usize,
        x: DVector<f64>,
        y: DVector<f64>,
        s: DVector<f64>,
        z: DVector<f64>,
        tau: f64,
        pres: f64,
        dres: f64,
    ) -> Solution {
        let (x, y, s, z) = (x / tau, y / tau, s / tau, z / tau);
        let gap = s.dot(&z);
        let pb = self.pb;
        let (pres, dres) = if pres.is_nan() {
            (
                ((&pb.a * &x - &pb.b).norm() / self.resy0).max((&pb.g * &x + &s - &pb.h).norm() / self.resz0),
                (&pb.a.transpose() * &y + &pb.g.transpose() * &z + &pb.c).norm() / self.resx0,
            )
        } else {
            (pres, dres)
        };
        Solution {
            status,
            primal_objective: pb.c.dot(&x),
            dual_objective: -(pb.b.dot(&y) + pb.h.dot(&z)),
            x,
            y,
            s,
            z,
            iterations,
            primal_residual: pres,
            dual_residual: dres,
            gap,
        }
    }

    fn finish_ray(
        &self,
        status: Status,
        iterations: usize,
        x: DVector<f64>,
        y: DVector<f64>,
        s: DVector<f64>,
        z: DVector<f64>,
    ) -> Solution {
        Solution {
            status,
            primal_objective: f64::NAN,
            dual_objective: f64::NAN,
            x,
            y,
            s,
            z,
            iterations,
            primal_residual: f64::NAN,
            dual_residual: f64::NAN,
            gap: f64::NAN,
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(
        &self,
        status: Status,
        iterations: usize,
        x: DVector<f64>,
        y: DVector<f64>,
        s: DVector<f64>,
        z: DVector<f64>,
        tau: f64,
    ) -> Solution {
        self.finish_scaled(status, iterations, x, y, s, z, tau, f64::NAN, f64::NAN)
    }
}

fn zeros(n: usize) -> DVector<f64> {
    DVector::zeros(n)
}

fn split3(v: &DVector<f64>, n: usize, p: usize) -> (DVector<f64>, DVector<f64>, DVector<f64>) {
    let m = v.len() - n - p;
    (
        v.rows(0, n).into_owned(),
        v.rows(n, p).into_owned(),
        v.rows(n + p, m).into_owned(),
    )
}
