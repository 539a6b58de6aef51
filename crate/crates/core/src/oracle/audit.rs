//! Per-step contraction ratios and constraint audits on a [`RunTrace`].

use std::fmt::Write as _;

use super::{OracleError, RunTrace};
use crate::numeric::{dot, from_f64, Numeric};
use crate::polyform::{Assignment, VecExpr};
use crate::scenarios::{MetricKind, RateProblem};

fn diff<T: Numeric>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(x, y)| x.clone() - y.clone()).collect()
}

fn sum<T: Numeric>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(x, y)| x.clone() + y.clone()).collect()
}

/// Value of `metric` at iterate `k`.
pub fn metric_value<T: Numeric>(trace: &RunTrace<T>, metric: MetricKind, k: usize) -> T {
    match metric {
        MetricKind::ObjectiveAccuracy => trace.values[k].clone() - trace.optimum.value.clone(),
        MetricKind::DistanceSquared => {
            let d = diff(&trace.points[k], &trace.optimum.point);
            dot(&d, &d)
        }
        MetricKind::GradientNormSquared => {
            let g = sum(&trace.gradients[k], &trace.subgradients[k]);
            dot(&g, &g)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExcludedStep {
    pub step: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct BoundReport {
    pub metric: MetricKind,
    pub bound: f64,
    pub tol: f64,
    /// `(step k, m_{k+1} / m_k)` for every step that was not excluded.
    pub ratios: Vec<(usize, f64)>,
    pub max_ratio: Option<f64>,
    pub excluded: Vec<ExcludedStep>,
    pub passed: bool,
}

/// Compares each ratio `m_{k+1} / m_k` with `bound + tol`. Steps starting at
/// the optimum are excluded; in floating point so are steps whose metric has
/// fallen below `1e-12` of its initial value, where rounding dominates.
pub fn check_against_bound<T: Numeric>(trace: &RunTrace<T>, bound: f64, metric: MetricKind, tol: f64) -> BoundReport {
    let initial = metric_value(trace, metric, 0).as_f64().abs();
    let floor = if T::EXACT { 0.0 } else { 1e-12 * initial };
    let mut ratios = Vec::new();
    let mut excluded = Vec::new();
    for k in 0..trace.step_count() {
        let now = metric_value(trace, metric, k);
        if now.is_zero() {
            excluded.push(ExcludedStep { step: k, reason: "iterate is optimal".into() });
            continue;
        }
        if now.as_f64().abs() <= floor {
            excluded.push(ExcludedStep { step: k, reason: "metric below the rounding floor".into() });
            continue;
        }
        let next = metric_value(trace, metric, k + 1);
        ratios.push((k, (next / now).as_f64()));
    }
    let max_ratio = ratios.iter().map(|&(_, r)| r).fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.max(r))));
    BoundReport {
        metric,
        bound,
        tol,
        passed: max_ratio.map_or(true, |m| m <= bound + tol),
        ratios,
        max_ratio,
        excluded,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintValue {
    pub name: String,
    pub value: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone)]
pub struct StepAudit {
    pub step: usize,
    pub inequalities: Vec<ConstraintValue>,
    pub equalities: Vec<ConstraintValue>,
    /// `||target - replacement||^2` for each elimination the scenario used.
    pub eliminations: Vec<ConstraintValue>,
}

impl StepAudit {
    pub fn violations(&self) -> impl Iterator<Item = &ConstraintValue> {
        self.inequalities
            .iter()
            .chain(&self.equalities)
            .chain(&self.eliminations)
            .filter(|c| !c.satisfied)
    }
}

#[derive(Debug, Clone)]
pub struct AuditReport {
    pub tol: f64,
    pub steps: Vec<StepAudit>,
}

impl AuditReport {
    pub fn violation_count(&self) -> usize {
        self.steps.iter().map(|s| s.violations().count()).sum()
    }

    pub fn passed(&self) -> bool {
        self.violation_count() == 0
    }

    /// `(step, constraint name)` of every violation.
    pub fn violations(&self) -> Vec<(usize, String)> {
        self.steps
            .iter()
            .flat_map(|s| s.violations().map(move |c| (s.step, c.name.clone())))
            .collect()
    }
}

/// Every symbol of the scenario catalogs at the pair `(x_k, x_{k+1})`.
fn step_assignment<T: Numeric>(trace: &RunTrace<T>, k: usize) -> Assignment<T> {
    let opt = &trace.optimum;
    let a = Assignment::new()
        .vector("x_star", opt.point.clone())
        .vector("x_k", trace.points[k].clone())
        .vector("x_k1", trace.points[k + 1].clone());
    if trace.kind.is_composite() {
        a.scalar("a_star", opt.smooth_value.clone())
            .scalar("a_k", trace.smooth_values[k].clone())
            .scalar("a_k1", trace.smooth_values[k + 1].clone())
            .scalar("b_star", opt.nonsmooth_value.clone())
            .scalar("b_k", trace.nonsmooth_values[k].clone())
            .scalar("b_k1", trace.nonsmooth_values[k + 1].clone())
            .vector("r_star", opt.gradient.clone())
            .vector("r_k", trace.gradients[k].clone())
            .vector("r_k1", trace.gradients[k + 1].clone())
            .vector("s_star", opt.subgradient.clone())
            .vector("s_k", trace.subgradients[k].clone())
            .vector("sbar_k1", trace.subgradients[k + 1].clone())
    } else {
        a.scalar("f_star", opt.value.clone())
            .scalar("f_k", trace.values[k].clone())
            .scalar("f_k1", trace.values[k + 1].clone())
            .vector("g_star", opt.gradient.clone())
            .vector("g_k", trace.gradients[k].clone())
            .vector("g_k1", trace.gradients[k + 1].clone())
    }
}

fn evaluate_vec<T: Numeric>(e: &VecExpr, a: &Assignment<T>, dim: usize) -> Result<Vec<T>, OracleError> {
    let mut out = vec![T::zero(); dim];
    for (name, c) in e.terms() {
        let v = a
            .vectors
            .get(name)
            .ok_or_else(|| crate::polyform::PolyError::MissingAssignment(name.to_string()))?;
        let c = T::from_rational(c);
        for (o, vi) in out.iter_mut().zip(v) {
            *o = o.clone() + c.clone() * vi.clone();
        }
    }
    Ok(out)
}

/// Evaluates every `h_i` (must be `>= -tol`), every `v_j` and every
/// elimination residual (must be within `tol` of zero) at each step.
pub fn constraint_audit<T: Numeric>(trace: &RunTrace<T>, problem: &RateProblem, tol: f64) -> Result<AuditReport, OracleError> {
    if let Some(kind) = problem.key() {
        if kind != trace.kind {
            return Err(OracleError::Mismatch { trace: trace.kind.to_string(), problem: kind.to_string() });
        }
    }
    let dim = trace.points.first().map_or(0, Vec::len);
    // compare in the trace's own arithmetic so exact runs stay exact
    let tol_t = T::from_rational(&from_f64(tol).ok_or_else(|| OracleError::InvalidRun("tolerance is not finite".into()))?);
    let mut steps = Vec::with_capacity(trace.step_count());
    for k in 0..trace.step_count() {
        let a = step_assignment(trace, k);
        let inequalities = problem
            .inequalities
            .iter()
            .map(|h| {
                let value = h.poly.evaluate(&a)?;
                let satisfied = value >= -tol_t.clone();
                Ok(ConstraintValue { name: h.name.clone(), value: value.as_f64(), satisfied })
            })
            .collect::<Result<Vec<_>, OracleError>>()?;
        let equalities = problem
            .equalities
            .iter()
            .map(|v| {
                let value = v.poly.evaluate(&a)?;
                let satisfied = value.abs() <= tol_t;
                Ok(ConstraintValue { name: v.name.clone(), value: value.as_f64(), satisfied })
            })
            .collect::<Result<Vec<_>, OracleError>>()?;
        let eliminations = problem
            .eliminations
            .iter()
            .map(|e| {
                let target = a
                    .vectors
                    .get(&e.target)
                    .ok_or_else(|| crate::polyform::PolyError::MissingAssignment(e.target.clone()))?;
                let gap = diff(target, &evaluate_vec(&e.replacement, &a, dim)?);
                let value = dot(&gap, &gap);
                let satisfied = value <= tol_t;
                Ok(ConstraintValue { name: e.target.clone(), value: value.as_f64(), satisfied })
            })
            .collect::<Result<Vec<_>, OracleError>>()?;
        steps.push(StepAudit { step: k, inequalities, equalities, eliminations });
    }
    Ok(AuditReport { tol, steps })
}

/// CSV with header `step,f,dist_sq,grad_sq,gamma,ratio`; `ratio` is the
/// metric ratio from step `k` to `k + 1` and is empty on the last row and
/// on rows starting at the optimum.
pub fn trace_csv<T: Numeric>(trace: &RunTrace<T>, metric: MetricKind) -> String {
    let mut out = String::from("step,f,dist_sq,grad_sq,gamma,ratio\n");
    for k in 0..trace.len() {
        let gamma = trace.steps.get(k).map(|g| format!("{:.8e}", g.as_f64())).unwrap_or_default();
        let ratio = if k + 1 < trace.len() {
            let now = metric_value(trace, metric, k);
            if now.is_zero() {
                String::new()
            } else {
                format!("{:.8e}", (metric_value(trace, metric, k + 1) / now).as_f64())
            }
        } else {
            String::new()
        };
        let _ = writeln!(
            out,
            "{k},{:.8e},{:.8e},{:.8e},{gamma},{ratio}",
            trace.values[k].as_f64(),
            metric_value(trace, MetricKind::DistanceSquared, k).as_f64(),
            metric_value(trace, MetricKind::GradientNormSquared, k).as_f64(),
        );
    }
    out
}
