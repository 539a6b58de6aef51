//! Degree-1 SOS certificate search.
//!
//! The certificate identity is
//! `t * gain - loss = sum sigma_i h_i + sum theta_j v_j + Gram(Q_G)`
//! with `sigma >= 0`, `theta` free and `Q_G` positive semidefinite over the
//! vector symbols. Matching linear coefficients gives one equality row per
//! scalar symbol; matching Gram parts defines `Q_G` as an affine function of
//! `(t, sigma, theta)`, so a single conic solve minimizes `t`.
//!
//! The same feasible set is reached from the other side by dualizing the
//! performance-estimation relaxation (see [`PepPrimal`]).

mod presolve;
mod sdpa;

use std::fmt;

use conic::{svec_index, svec_weight, ConeDims, ConeProblem, Settings, Status};
use nalgebra::{DMatrix, DVector};
use num_traits::{One, Zero};

use crate::numeric::{from_f64, to_f64, Rational};
use crate::polyform::StructuredPolynomial;
use crate::ratmat::{rref, RatMatrix};
use crate::scenarios::RateProblem;

pub use sdpa::write_sdpa;

#[derive(Debug, thiserror::Error)]
pub enum CertSearchError {
    #[error("constraint {name} has the nonzero constant term {value}; only homogeneous constraints are supported")]
    NonzeroConstant { name: String, value: Rational },
    #[error("multiplier vector for {what} has length {got}, expected {want}")]
    Dimension { what: &'static str, got: usize, want: usize },
    #[error("t = {0} is not a finite number")]
    NonFiniteTarget(f64),
    #[error(transparent)]
    Conic(#[from] conic::ConicError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LmiSense {
    /// `F(x) ⪰ 0`
    Psd,
    /// `F(x) ⪯ 0`
    Nsd,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SdpVariable {
    pub name: String,
    pub nonneg: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearRow {
    pub label: String,
    pub coefficients: Vec<Rational>,
    pub rhs: Rational,
}

/// Positions of the certificate unknowns inside [`SdpProblem::variables`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableRoles {
    pub t: usize,
    pub sigma: Vec<usize>,
    pub theta: Vec<usize>,
}

/// Small SDP in exact arithmetic:
/// minimize `objective . x` subject to the equality rows, nonnegativity of
/// flagged variables, and `F0 + sum_i x_i F_i` in the cone given by `sense`.
#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub variables: Vec<SdpVariable>,
    pub roles: VariableRoles,
    pub objective: Vec<Rational>,
    pub equalities: Vec<LinearRow>,
    pub lmi_constant: RatMatrix,
    pub lmi_coefficients: Vec<RatMatrix>,
    pub sense: LmiSense,
    /// One label per LMI row: the vector symbols.
    pub block_labels: Vec<String>,
}

impl SdpProblem {
    pub fn psd_block_dim(&self) -> usize {
        self.lmi_constant.rows()
    }

    pub fn scalar_vars(&self) -> &[SdpVariable] {
        &self.variables
    }

    /// `F0 + sum x_i F_i`, evaluated in floating point.
    pub fn lmi_value(&self, x: &[f64]) -> DMatrix<f64> {
        let d = self.psd_block_dim();
        DMatrix::from_fn(d, d, |i, j| {
            self.lmi_coefficients
                .iter()
                .zip(x)
                .fold(to_f64(self.lmi_constant.get(i, j)), |acc, (f, xi)| acc + xi * to_f64(f.get(i, j)))
        })
    }

    /// Largest violation of the equality rows at `x`.
    pub fn equality_residual(&self, x: &[f64]) -> f64 {
        self.equalities
            .iter()
            .map(|row| {
                let lhs: f64 = row.coefficients.iter().zip(x).map(|(c, xi)| to_f64(c) * xi).sum();
                (lhs - to_f64(&row.rhs)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Copy with `t` pinned to `t_fixed` and the objective replaced by
    /// `sum sigma_i`.
    pub fn with_fixed_t(&self, t_fixed: &Rational) -> Self {
        let mut out = self.clone();
        let mut coefficients = vec![Rational::zero(); self.variables.len()];
        coefficients[self.roles.t] = Rational::one();
        out.equalities.push(LinearRow {
            label: "t fixed".into(),
            coefficients,
            rhs: t_fixed.clone(),
        });
        out.objective = vec![Rational::zero(); self.variables.len()];
        for &i in &self.roles.sigma {
            out.objective[i] = Rational::one();
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverStatus {
    Optimal,
    Infeasible,
    /// The objective is unbounded below on the feasible set.
    Unbounded,
    NumericalTrouble,
}

impl SolverStatus {
    pub fn key(self) -> &'static str {
        match self {
            SolverStatus::Optimal => "optimal",
            SolverStatus::Infeasible => "infeasible",
            SolverStatus::Unbounded => "unbounded",
            SolverStatus::NumericalTrouble => "numerical_trouble",
        }
    }
}

impl fmt::Display for SolverStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    /// Largest violation of the scalar matching rows.
    pub equality: f64,
    /// Smallest eigenvalue of the Gram block (nonnegative up to tolerance).
    pub gram_min_eigenvalue: f64,
}

/// Numerical certificate. When `status` is not optimal, `t` is NaN and the
/// vectors are empty: no rate is ever reported without a solved SDP.
#[derive(Debug, Clone)]
pub struct RateResult {
    pub status: SolverStatus,
    pub t: f64,
    pub sigma: Vec<f64>,
    pub theta: Vec<f64>,
    pub gram_block: DMatrix<f64>,
    pub residuals: Residuals,
    pub objective: f64,
    pub iterations: usize,
    pub sigma_names: Vec<String>,
    pub theta_names: Vec<String>,
    pub vector_symbols: Vec<String>,
    /// Why the solve did not finish, for non-optimal results.
    pub detail: Option<String>,
}

impl RateResult {
    fn failed(sdp: &SdpProblem, status: SolverStatus, detail: String, iterations: usize) -> Self {
        Self {
            status,
            t: f64::NAN,
            sigma: Vec::new(),
            theta: Vec::new(),
            gram_block: DMatrix::zeros(0, 0),
            residuals: Residuals {
                equality: f64::NAN,
                gram_min_eigenvalue: f64::NAN,
            },
            objective: f64::NAN,
            iterations,
            sigma_names: names(sdp, &sdp.roles.sigma),
            theta_names: names(sdp, &sdp.roles.theta),
            vector_symbols: sdp.block_labels.clone(),
            detail: Some(detail),
        }
    }

    /// Equality rows and Gram positivity hold to `tol`, relative to the
    /// size of the Gram block.
    pub fn within_tolerance(&self, tol: f64) -> bool {
        let scale = self.gram_block.amax().max(1.0);
        self.residuals.equality <= tol * scale && self.residuals.gram_min_eigenvalue >= -tol * scale
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolverStatus::Optimal
    }

    /// Multiplier of the inequality with the given label (`"h3"` or
    /// `"sigma3"`).
    pub fn sigma_of(&self, name: &str) -> Option<f64> {
        let want = name.strip_prefix('h').map(|rest| format!("sigma{rest}"));
        self.sigma_names
            .iter()
            .position(|n| n == name || Some(n) == want.as_ref())
            .and_then(|i| self.sigma.get(i).copied())
    }
}

fn names(sdp: &SdpProblem, idx: &[usize]) -> Vec<String> {
    idx.iter().map(|&i| sdp.variables[i].name.clone()).collect()
}

fn multiplier_name(prefix: &str, constraint: &str) -> String {
    let digits: String = constraint.chars().skip_while(|c| !c.is_ascii_digit()).collect();
    if digits.is_empty() {
        format!("{prefix}_{constraint}")
    } else {
        format!("{prefix}{digits}")
    }
}

fn check_homogeneous(name: &str, p: &StructuredPolynomial) -> Result<(), CertSearchError> {
    if p.constant().is_zero() {
        Ok(())
    } else {
        Err(CertSearchError::NonzeroConstant {
            name: name.to_string(),
            value: p.constant().clone(),
        })
    }
}

fn check_problem(problem: &RateProblem) -> Result<(), CertSearchError> {
    check_homogeneous("gain", &problem.gain)?;
    check_homogeneous("loss", &problem.loss)?;
    for c in problem.inequalities.iter().chain(&problem.equalities) {
        check_homogeneous(&c.name, &c.poly)?;
    }
    Ok(())
}

fn variable_layout(problem: &RateProblem, t_nonneg: bool) -> (Vec<SdpVariable>, VariableRoles) {
    let mut variables = vec![SdpVariable {
        name: "t".into(),
        nonneg: t_nonneg,
    }];
    let mut sigma = Vec::new();
    for h in &problem.inequalities {
        sigma.push(variables.len());
        variables.push(SdpVariable {
            name: multiplier_name("sigma", &h.name),
            nonneg: true,
        });
    }
    let mut theta = Vec::new();
    for v in &problem.equalities {
        theta.push(variables.len());
        variables.push(SdpVariable {
            name: multiplier_name("theta", &v.name),
            nonneg: false,
        });
    }
    (variables, VariableRoles { t: 0, sigma, theta })
}

/// Structured degree-1 SOS program: minimize `t` subject to the scalar
/// matching rows and `Q_G(t, sigma, theta) ⪰ 0`.
pub fn build_sos_sdp(problem: &RateProblem) -> Result<SdpProblem, CertSearchError> {
    check_problem(problem)?;
    let (variables, roles) = variable_layout(problem, false);
    let n = variables.len();
    let catalog = &problem.catalog;

    // t*gain - sum sigma h - sum theta v = loss on every scalar symbol
    let signed: Vec<(usize, Rational, &StructuredPolynomial)> = std::iter::once((roles.t, Rational::one(), &problem.gain))
        .chain(roles.sigma.iter().zip(&problem.inequalities).map(|(&i, h)| (i, -Rational::one(), &h.poly)))
        .chain(roles.theta.iter().zip(&problem.equalities).map(|(&i, v)| (i, -Rational::one(), &v.poly)))
        .collect();

    let equalities = catalog
        .scalars()
        .iter()
        .enumerate()
        .map(|(s, name)| {
            let mut coefficients = vec![Rational::zero(); n];
            for (i, w, p) in &signed {
                coefficients[*i] = w * &p.linear()[s];
            }
            LinearRow {
                label: name.clone(),
                coefficients,
                rhs: problem.loss.linear()[s].clone(),
            }
        })
        .collect();

    let mut lmi_coefficients = vec![RatMatrix::zeros(catalog.vectors().len(), catalog.vectors().len()); n];
    for (i, w, p) in &signed {
        lmi_coefficients[*i] = p.gram().scale(w);
    }
    Ok(SdpProblem {
        objective: unit(n, roles.t),
        variables,
        roles,
        equalities,
        lmi_constant: problem.loss.gram().scale(&-Rational::one()),
        lmi_coefficients,
        sense: LmiSense::Psd,
        block_labels: catalog.vectors().to_vec(),
    })
}

fn unit(n: usize, i: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); n];
    v[i] = Rational::one();
    v
}

/// Performance-estimation relaxation in Gram form, with budget `R`:
/// maximize `loss(f, G)` subject to `h_i(f, G) >= 0`, `v_j(f, G) = 0`,
/// `gain(f, G) <= R` and `G ⪰ 0`, where every polynomial is read as
/// `<c, f> + <C, G>`.
#[derive(Debug, Clone)]
pub struct PepPrimal<'a> {
    pub problem: &'a RateProblem,
    pub budget: Rational,
}

impl<'a> PepPrimal<'a> {
    pub fn new(problem: &'a RateProblem) -> Result<Self, CertSearchError> {
        check_problem(problem)?;
        Ok(Self {
            problem,
            budget: Rational::one(),
        })
    }

    /// Lagrangian dual. Multipliers: `sigma_i >= 0` for `h_i`, `theta_j`
    /// free for `v_j` and `t >= 0` for the budget. Stationarity in `f`
    /// gives `loss + sum sigma h + sum theta v - t gain = 0` on linear
    /// parts; boundedness over `G ⪰ 0` gives the same combination of Gram
    /// parts `⪯ 0`. The dual value is `t * R`.
    pub fn lagrangian_dual(&self) -> SdpProblem {
        let problem = self.problem;
        let (variables, roles) = variable_layout(problem, true);
        let n = variables.len();
        let nv = problem.catalog.vectors().len();

        let mut terms: Vec<(usize, Rational, &StructuredPolynomial)> = vec![(roles.t, -Rational::one(), &problem.gain)];
        terms.extend(roles.sigma.iter().zip(&problem.inequalities).map(|(&i, h)| (i, Rational::one(), &h.poly)));
        terms.extend(roles.theta.iter().zip(&problem.equalities).map(|(&i, v)| (i, Rational::one(), &v.poly)));

        let equalities = problem
            .catalog
            .scalars()
            .iter()
            .enumerate()
            .map(|(s, name)| {
                let mut coefficients = vec![Rational::zero(); n];
                for (i, w, p) in &terms {
                    coefficients[*i] = w * &p.linear()[s];
                }
                LinearRow {
                    label: name.clone(),
                    coefficients,
                    rhs: -problem.loss.linear()[s].clone(),
                }
            })
            .collect();
        let mut lmi_coefficients = vec![RatMatrix::zeros(nv, nv); n];
        for (i, w, p) in &terms {
            lmi_coefficients[*i] = p.gram().scale(w);
        }
        let mut objective = vec![Rational::zero(); n];
        objective[roles.t] = self.budget.clone();
        SdpProblem {
            variables,
            roles,
            objective,
            equalities,
            lmi_constant: problem.loss.gram().clone(),
            lmi_coefficients,
            sense: LmiSense::Nsd,
            block_labels: problem.catalog.vectors().to_vec(),
        }
    }

    /// Solves the relaxation directly over `(f, G)`.
    pub fn solve(&self, tol: f64) -> Result<PepPrimalResult, CertSearchError> {
        let problem = self.problem;
        let ns = problem.catalog.scalars().len();
        let nv = problem.catalog.vectors().len();
        let ng = nv * (nv + 1) / 2;
        let n = ns + ng;

        // <p, (f, G)> in (f, lower triangle of G) coordinates; the svec
        // weights are irrational and only applied in floating point, which
        // rescales columns without changing their dependencies
        let row_of = |p: &StructuredPolynomial| -> Vec<Rational> {
            let mut r: Vec<Rational> = p.linear().to_vec();
            r.resize(n, Rational::zero());
            for j in 0..nv {
                for i in j..nv {
                    r[ns + svec_index(nv, i, j)] = p.gram().get(i, j).clone();
                }
            }
            r
        };
        let to_row = |p: &StructuredPolynomial| -> Vec<f64> {
            let exact = row_of(p);
            let mut r: Vec<f64> = exact.iter().map(to_f64).collect();
            for j in 0..nv {
                for i in j..nv {
                    r[ns + svec_index(nv, i, j)] *= svec_weight(i, j);
                }
            }
            r
        };

        // invisible directions (e.g. a common shift of all function values)
        let mut stacked: Vec<Vec<Rational>> = problem.equalities.iter().map(|v| row_of(&v.poly)).collect();
        stacked.extend(problem.inequalities.iter().map(|h| row_of(&h.poly)));
        stacked.push(row_of(&problem.gain));
        for k in 0..ng {
            stacked.push(unit(n, ns + k));
        }
        let objective_exact = row_of(&problem.loss);
        let keep = match independent_columns(&RatMatrix::from_rows(stacked), &objective_exact) {
            Some(keep) => keep,
            None => {
                return Ok(PepPrimalResult {
                    status: SolverStatus::Unbounded,
                    value: f64::INFINITY,
                    gram: DMatrix::zeros(nv, nv),
                    scalars: vec![f64::NAN; ns],
                })
            }
        };
        let project = |r: Vec<f64>| -> Vec<f64> { keep.iter().map(|&k| r[k]).collect() };
        let m = keep.len();

        let c = DVector::from_vec(project(to_row(&problem.loss)).into_iter().map(|v| -v).collect());
        let a_rows: Vec<Vec<f64>> = problem.equalities.iter().map(|v| project(to_row(&v.poly))).collect();
        let mut g_rows: Vec<Vec<f64>> = problem
            .inequalities
            .iter()
            .map(|h| project(to_row(&h.poly)).into_iter().map(|v| -v).collect())
            .collect();
        let mut h_vals = vec![0.0; g_rows.len()];
        g_rows.push(project(to_row(&problem.gain)));
        h_vals.push(to_f64(&self.budget));
        for k in 0..ng {
            let mut r = vec![0.0; n];
            r[ns + k] = -1.0;
            g_rows.push(project(r));
            h_vals.push(0.0);
        }
        let cones = ConeDims::new(problem.inequalities.len() + 1, vec![nv]);
        let cone_problem = ConeProblem {
            c,
            a: rows_to_matrix(&a_rows, m),
            b: DVector::zeros(a_rows.len()),
            g: rows_to_matrix(&g_rows, m),
            h: DVector::from_vec(h_vals),
            cones,
        };
        let sol = cone_problem.solve(&Settings::with_tolerance(tol))?;
        let status = map_status(sol.status);
        let mut full = vec![0.0; n];
        for (k, &col) in keep.iter().enumerate() {
            full[col] = sol.x[k];
        }
        let gram = conic::smat(&DVector::from_vec(full[ns..].to_vec()), nv);
        Ok(PepPrimalResult {
            status,
            value: if status == SolverStatus::Optimal { -sol.primal_objective } else { f64::NAN },
            gram,
            scalars: full[..ns].to_vec(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct PepPrimalResult {
    pub status: SolverStatus,
    /// Worst-case `loss` under `gain <= 1`.
    pub value: f64,
    pub gram: DMatrix<f64>,
    pub scalars: Vec<f64>,
}

/// PEP-dual SDP with budget `R = 1`; its LMI is the negation of the SOS
/// Gram constraint.
pub fn build_pep_dual(problem: &RateProblem) -> Result<SdpProblem, CertSearchError> {
    Ok(PepPrimal::new(problem)?.lagrangian_dual())
}

/// Evaluates `-(F0 + sum x_i F_i)` for an `Nsd` problem, or the matrix
/// itself for a `Psd` one: the Gram block in the SOS orientation.
pub fn gram_orientation(sdp: &SdpProblem, x: &[f64]) -> DMatrix<f64> {
    let m = sdp.lmi_value(x);
    match sdp.sense {
        LmiSense::Psd => m,
        LmiSense::Nsd => -m,
    }
}

/// Column indices of `m` forming a basis of its column space, or `None`
/// when some dependent column direction changes `objective` (unbounded).
fn independent_columns(m: &RatMatrix, objective: &[Rational]) -> Option<Vec<usize>> {
    let (r, pivots) = rref(m);
    for c in (0..m.cols()).filter(|c| !pivots.contains(c)) {
        let mut reduced = objective[c].clone();
        for (row, &p) in pivots.iter().enumerate() {
            reduced -= r.get(row, c) * &objective[p];
        }
        if !reduced.is_zero() {
            return None;
        }
    }
    Some(pivots)
}

fn rows_to_matrix(rows: &[Vec<f64>], cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j])
}

fn map_status(status: Status) -> SolverStatus {
    match status {
        Status::Optimal => SolverStatus::Optimal,
        Status::PrimalInfeasible => SolverStatus::Infeasible,
        Status::DualInfeasible => SolverStatus::Unbounded,
        // promoted only after the certificate residuals are checked
        Status::AlmostOptimal | Status::MaxIterations | Status::NumericalError => SolverStatus::NumericalTrouble,
    }
}

/// Free-variable conic form of a presolved problem:
/// minimize `c . w` with `h - G w` in (orthant x PSD).
fn conic_form(red: &presolve::Reduced) -> ConeProblem {
    let k = red.basis.cols();
    let d = red.lmi.constant.rows();
    let n_nonneg = red.nonneg_rows.len();
    let n_rows = n_nonneg + d * (d + 1) / 2;
    let mut g = DMatrix::zeros(n_rows, k);
    let mut h = DVector::zeros(n_rows);
    for (r, &i) in red.nonneg_rows.iter().enumerate() {
        h[r] = to_f64(&red.x0[i]);
        for c in 0..k {
            g[(r, c)] = -to_f64(red.basis.get(i, c));
        }
    }
    for j in 0..d {
        for i in j..d {
            let r = n_nonneg + svec_index(d, i, j);
            let w = svec_weight(i, j);
            h[r] = w * to_f64(red.lmi.constant.get(i, j));
            for c in 0..k {
                g[(r, c)] = -w * to_f64(red.lmi.coefficients[c].get(i, j));
            }
        }
    }
    ConeProblem {
        c: DVector::from_iterator(k, red.objective.iter().map(to_f64)),
        a: DMatrix::zeros(0, k),
        b: DVector::zeros(0),
        g,
        h,
        cones: ConeDims::new(n_nonneg, if d > 0 { vec![d] } else { vec![] }),
    }
}

fn assemble(sdp: &SdpProblem, x: Vec<f64>, status: SolverStatus, iterations: usize) -> RateResult {
    let gram_block = gram_orientation(sdp, &x);
    let gram_min_eigenvalue = if gram_block.nrows() == 0 {
        0.0
    } else {
        gram_block.clone().symmetric_eigenvalues().min()
    };
    let objective = sdp.objective.iter().zip(&x).map(|(c, xi)| to_f64(c) * xi).sum();
    RateResult {
        status,
        t: x[sdp.roles.t],
        sigma: sdp.roles.sigma.iter().map(|&i| x[i]).collect(),
        theta: sdp.roles.theta.iter().map(|&i| x[i]).collect(),
        residuals: Residuals {
            equality: sdp.equality_residual(&x),
            gram_min_eigenvalue,
        },
        gram_block,
        objective,
        iterations,
        sigma_names: names(sdp, &sdp.roles.sigma),
        theta_names: names(sdp, &sdp.roles.theta),
        vector_symbols: sdp.block_labels.clone(),
        detail: None,
    }
}

/// Solves the SDP once; `t` enters affinely so no bisection is needed.
pub fn solve_rate(sdp: &SdpProblem, tol: f64) -> Result<RateResult, CertSearchError> {
    let red = match presolve::presolve(sdp) {
        Ok(red) => red,
        Err(presolve::PresolveOutcome::Infeasible(why)) => {
            return Ok(RateResult::failed(sdp, SolverStatus::Infeasible, why, 0));
        }
        Err(presolve::PresolveOutcome::Unbounded) => {
            return Ok(RateResult::failed(
                sdp,
                SolverStatus::Unbounded,
                "objective decreases along a direction no constraint sees".into(),
                0,
            ));
        }
    };
    let k = red.basis.cols();
    let x0: Vec<f64> = red.x0.iter().map(to_f64).collect();
    if k == 0 {
        // every unknown is pinned by the equality rows
        let lmi = red.lmi.constant.to_f64_rows();
        let d = lmi.len();
        let min_eig = if d == 0 {
            0.0
        } else {
            DMatrix::from_fn(d, d, |i, j| lmi[i][j]).symmetric_eigenvalues().min()
        };
        return Ok(if min_eig >= 0.0 {
            assemble(sdp, x0, SolverStatus::Optimal, 0)
        } else {
            RateResult::failed(sdp, SolverStatus::Infeasible, "pinned point violates the LMI".into(), 0)
        });
    }
    let sol = conic_form(&red).solve(&Settings::with_tolerance(tol))?;
    let status = map_status(sol.status);
    if status != SolverStatus::Optimal && sol.status != Status::AlmostOptimal {
        return Ok(RateResult::failed(
            sdp,
            status,
            format!("conic solver stopped with {:?} after {} iterations", sol.status, sol.iterations),
            sol.iterations,
        ));
    }
    let x: Vec<f64> = (0..sdp.variables.len())
        .map(|i| x0[i] + (0..k).map(|c| to_f64(red.basis.get(i, c)) * sol.x[c]).sum::<f64>())
        .collect();
    let result = assemble(sdp, x, SolverStatus::Optimal, sol.iterations);
    if sol.status == Status::AlmostOptimal && !result.within_tolerance(10.0 * tol) {
        return Ok(RateResult::failed(
            sdp,
            SolverStatus::NumericalTrouble,
            format!(
                "solver stalled with residuals {:?} after {} iterations",
                result.residuals, sol.iterations
            ),
            sol.iterations,
        ));
    }
    Ok(result)
}

/// Minimizes `sum sigma_i` with `t` fixed at `t_fixed` (which should carry a
/// little slack above the optimum).
pub fn sparsify_multipliers(sdp: &SdpProblem, t_fixed: f64, tol: f64) -> Result<RateResult, CertSearchError> {
    let t = from_f64(t_fixed).ok_or(CertSearchError::NonFiniteTarget(t_fixed))?;
    solve_rate(&sdp.with_fixed_t(&t), tol)
}

/// Largest coefficient of `t gain - loss - sum sigma h - sum theta v -
/// Gram(Q)` for a numerical certificate, computed straight from the
/// polynomials rather than from the SDP rows.
pub fn certificate_residual(problem: &RateProblem, result: &RateResult) -> Result<f64, CertSearchError> {
    let want = |what, got: usize, want: usize| {
        if got == want {
            Ok(())
        } else {
            Err(CertSearchError::Dimension { what, got, want })
        }
    };
    want("sigma", result.sigma.len(), problem.inequalities.len())?;
    want("theta", result.theta.len(), problem.equalities.len())?;
    let nv = problem.catalog.vectors().len();
    want("gram block", result.gram_block.nrows(), nv)?;

    let mut terms: Vec<(f64, &StructuredPolynomial)> = vec![(result.t, &problem.gain), (-1.0, &problem.loss)];
    terms.extend(result.sigma.iter().zip(&problem.inequalities).map(|(s, h)| (-s, &h.poly)));
    terms.extend(result.theta.iter().zip(&problem.equalities).map(|(s, v)| (-s, &v.poly)));

    let mut worst: f64 = 0.0;
    let constant: f64 = terms.iter().map(|(w, p)| w * to_f64(p.constant())).sum();
    worst = worst.max(constant.abs());
    for s in 0..problem.catalog.scalars().len() {
        let v: f64 = terms.iter().map(|(w, p)| w * to_f64(&p.linear()[s])).sum();
        worst = worst.max(v.abs());
    }
    for i in 0..nv {
        for j in 0..nv {
            let v: f64 = terms.iter().map(|(w, p)| w * to_f64(p.gram().get(i, j))).sum::<f64>() - result.gram_block[(i, j)];
            worst = worst.max(v.abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{int, rat};
    use crate::scenarios::{build_default, AlgorithmSpec, FunctionClass};

    fn gd_els() -> RateProblem {
        build_default(&FunctionClass::smooth(int(1), int(10)).unwrap(), &AlgorithmSpec::gd_els()).unwrap()
    }

    #[test]
    fn gd_els_shape() {
        let sdp = build_sos_sdp(&gd_els()).unwrap();
        assert_eq!(sdp.equalities.len(), 3);
        assert_eq!(sdp.psd_block_dim(), 5);
        assert_eq!(sdp.roles.sigma.len(), 6);
        assert_eq!(sdp.roles.theta.len(), 2);
    }

    #[test]
    fn dual_lmi_is_negated() {
        let p = gd_els();
        let sos = build_sos_sdp(&p).unwrap();
        let dual = build_pep_dual(&p).unwrap();
        assert_eq!(dual.lmi_constant, sos.lmi_constant.scale(&int(-1)));
        for (a, b) in dual.lmi_coefficients.iter().zip(&sos.lmi_coefficients) {
            assert_eq!(*a, b.scale(&int(-1)));
        }
        assert!(dual.variables[dual.roles.t].nonneg);
        assert!(!sos.variables[sos.roles.t].nonneg);
    }

    #[test]
    fn gd_els_rate() {
        let p = gd_els();
        let r = solve_rate(&build_sos_sdp(&p).unwrap(), 1e-8).unwrap();
        assert!(r.is_optimal(), "{r:?}");
        assert!((r.t - 81.0 / 121.0).abs() < 1e-6, "t = {}", r.t);
        assert!(certificate_residual(&p, &r).unwrap() < 1e-7);
        let _ = rat(1, 2);
    }
}
