//! The four verbs. Each is a composition of library calls; the only work
//! done here is tabulation.

use rayon::prelude::*;
use sos_rates::certify::{compare_armijo, rate_formula, verify_scenario};
use sos_rates::certsearch::{build_sos_sdp, solve_rate, RateResult, SolverStatus};
use sos_rates::numeric::{parse_rational, to_f64};
use sos_rates::oracle::{
    check_against_bound, constraint_audit, metric_value, run, trace_csv, two_eigenvalue_quadratic, zigzag_start,
    NoiseModel, RunOptions, TestFunction,
};
use sos_rates::scenarios::{build_scenario, AlgorithmKind, MetricKind};

use crate::args::{Flags, Format};
use crate::output::{Cell, Table};
use crate::settings::{Instance, Settings};
use crate::CliError;

/// Slack on each measured contraction ratio in `simulate`.
const BOUND_TOL: f64 = 1e-8;
/// Relative slack of the constraint audit in `simulate`.
const AUDIT_TOL: f64 = 1e-9;

/// Rendered output plus the condition that decides the exit status.
pub struct Outcome {
    pub text: String,
    pub failure: Option<CliError>,
}

fn status_failure(status: SolverStatus, context: &str) -> Option<CliError> {
    match status {
        SolverStatus::Optimal => None,
        SolverStatus::Infeasible => Some(CliError::Infeasible(context.to_string())),
        SolverStatus::Unbounded | SolverStatus::NumericalTrouble => {
            Some(CliError::NumericalTrouble(format!("{context}: solver reported {status}")))
        }
    }
}

fn param_columns(inst: &Instance) -> (Vec<String>, Vec<Cell>) {
    inst.params()
        .into_iter()
        .filter_map(|(p, v)| v.map(|v| (p.column().to_string(), Cell::Float(to_f64(&v)))))
        .unzip()
}

fn solve(inst: &Instance, tol: f64) -> Result<RateResult, CliError> {
    let problem = build_scenario(&inst.class, &inst.spec, inst.metric)?;
    Ok(solve_rate(&build_sos_sdp(&problem)?, tol)?)
}

pub fn rate(settings: &Settings, flags: &Flags) -> Result<Outcome, CliError> {
    let inst = settings.instance()?;
    let result = solve(&inst, flags.tol)?;
    let formula = rate_formula(inst.spec.kind, &inst.class, &inst.spec)?;
    let formula_f = to_f64(&formula);
    let (names, values) = param_columns(&inst);
    let mut table = Table::new(["scenario".to_string(), "metric".to_string()].into_iter().chain(names).chain(
        ["t_sdp", "t_formula", "t_formula_exact", "gap", "status"].map(String::from),
    ));
    let mut row = vec![Cell::Text(inst.spec.kind.key().into()), Cell::Text(inst.metric.key().into())];
    row.extend(values);
    row.extend([
        Cell::Float(result.t),
        Cell::Float(formula_f),
        Cell::Exact(formula),
        Cell::Float((result.t - formula_f).abs()),
        Cell::Text(result.status.key().into()),
    ]);
    table.push(row);
    Ok(Outcome { text: table.render(flags.format), failure: status_failure(result.status, inst.spec.kind.key()) })
}

pub fn verify(settings: &Settings, flags: &Flags) -> Result<Outcome, CliError> {
    let inst = settings.instance()?;
    if inst.metric != inst.spec.kind.default_metric() {
        return Err(CliError::Config(format!(
            "the {} certificate is stated for the {} metric",
            inst.spec.kind.key(),
            inst.spec.kind.default_metric().key()
        )));
    }
    let report = verify_scenario(&inst.class, &inst.spec)?;
    let text = match flags.format {
        Format::Text => report.to_text(),
        format => {
            let names = report.params.iter().map(|(n, _)| n.clone());
            let mut table = Table::new(
                ["scenario".to_string()]
                    .into_iter()
                    .chain(names)
                    .chain(["rate", "t", "identity", "residuals", "ldl", "charpoly", "sos_form", "verdict"].map(String::from)),
            );
            let mut row = vec![Cell::Text(report.kind.key().into())];
            row.extend(report.params.iter().map(|(_, v)| Cell::Exact(v.clone())));
            let yes_no = |b: bool| Cell::Text(if b { "yes" } else { "no" }.into());
            row.extend([
                Cell::Exact(report.rate.clone()),
                Cell::Exact(report.values.t.clone()),
                Cell::Text(if report.identity.holds { "holds" } else { "fails" }.into()),
                Cell::Count(report.identity.discrepancies.len()),
                yes_no(report.ldl.is_psd),
                yes_no(report.charpoly.is_psd),
                report.sos_matches.map_or(Cell::Missing, |m| Cell::Text(if m { "matches" } else { "differs" }.into())),
                Cell::Text(if report.passed() { "pass" } else { "fail" }.into()),
            ]);
            table.push(row);
            table.render(format)
        }
    };
    let failure = (!report.passed()).then(|| CliError::Verification(report.kind.key().to_string()));
    Ok(Outcome { text, failure })
}

pub const SWEEP_COLUMNS: [&str; 18] = [
    "index", "scenario", "mu", "L", "kappa", "gamma", "epsilon", "eta", "delta", "c1", "c2", "t_sdp", "t_formula", "gap",
    "t_new", "t_ly", "t_nemi", "status",
];

pub fn sweep(settings: &Settings, flags: &Flags) -> Result<Outcome, CliError> {
    let grid = settings.grid()?;
    // rows come back in grid order whatever the completion order
    let rows: Vec<Result<(Vec<Cell>, SolverStatus), CliError>> = grid
        .par_iter()
        .enumerate()
        .map(|(index, inst)| {
            let result = solve(inst, flags.tol)?;
            let formula = to_f64(&rate_formula(inst.spec.kind, &inst.class, &inst.spec)?);
            let mut row = vec![Cell::Count(index), Cell::Text(inst.spec.kind.key().into())];
            row.extend(inst.params().into_iter().map(|(_, v)| v.map_or(Cell::Missing, |v| Cell::Float(to_f64(&v)))));
            row.extend([Cell::Float(result.t), Cell::Float(formula), Cell::Float((result.t - formula).abs())]);
            if inst.spec.kind == AlgorithmKind::GdArmijo {
                let kappa = inst.class.kappa().expect("mu > 0 for Armijo");
                let c = compare_armijo(to_f64(inst.spec.epsilon()?), to_f64(inst.spec.eta()?), to_f64(&kappa))?;
                let opt = |x: Option<f64>| x.map_or(Cell::Missing, Cell::Float);
                row.extend([Cell::Float(c.t_new), opt(c.t_ly), opt(c.t_nemi)]);
            } else {
                row.extend([Cell::Missing, Cell::Missing, Cell::Missing]);
            }
            row.push(Cell::Text(result.status.key().into()));
            Ok((row, result.status))
        })
        .collect();
    let mut table = Table::new(SWEEP_COLUMNS);
    let mut failure = None;
    for (index, row) in rows.into_iter().enumerate() {
        let (row, status) = row?;
        // infeasibility outranks numerical trouble in the exit status
        match (status_failure(status, &format!("grid point {index}")), &failure) {
            (Some(f @ CliError::Infeasible(_)), None | Some(CliError::NumericalTrouble(_))) => failure = Some(f),
            (Some(f), None) => failure = Some(f),
            _ => {}
        }
        table.push(row);
    }
    Ok(Outcome { text: table.render(flags.format), failure })
}

pub fn simulate(settings: &Settings, flags: &Flags) -> Result<Outcome, CliError> {
    let inst = settings.instance()?;
    let problem = build_scenario(&inst.class, &inst.spec, inst.metric)?;
    let (mu, l) = (to_f64(&inst.class.mu), to_f64(&inst.class.l));
    let lambda = flags
        .lambda
        .as_deref()
        .map(|s| parse_rational(s).map(|r| to_f64(&r)))
        .transpose()
        .map_err(|e| CliError::Config(format!("--lambda: {e}")))?;
    let quadratic = two_eigenvalue_quadratic(mu, l)?;
    let f = match (inst.class.composite, lambda) {
        (true, w) => TestFunction::composite(quadratic.spectrum().to_vec(), quadratic.shift().to_vec(), w.unwrap_or(0.0))?,
        (false, None) => quadratic,
        (false, Some(_)) => return Err(CliError::Config(format!("--lambda does not apply to {}", inst.spec.kind.key()))),
    };
    if flags.steps == 0 {
        return Err(CliError::Config("--steps must be positive".into()));
    }
    let opts = RunOptions { noise: NoiseModel::RandomUnit { seed: flags.seed }, ..RunOptions::default() };
    let x0 = zigzag_start(&mu, &l);
    let trace = run(&inst.spec, &f, &x0, flags.steps, &opts)?;
    let bound = to_f64(&rate_formula(inst.spec.kind, &inst.class, &inst.spec)?);
    let check = check_against_bound(&trace, bound, inst.metric, BOUND_TOL);
    let audit = constraint_audit(&trace, &problem, AUDIT_TOL * (1.0 + f.value(&x0).abs()))?;

    let text = match flags.format {
        Format::Csv => trace_csv(&trace, inst.metric),
        Format::JsonLines => trace_table(&trace, inst.metric).to_json_lines(),
        Format::Text => {
            let (names, values) = param_columns(&inst);
            let mut table = Table::new(["scenario".to_string(), "metric".to_string()].into_iter().chain(names).chain(
                ["steps", "bound", "max_ratio", "excluded_steps", "audit_violations", "verdict"].map(String::from),
            ));
            let mut row = vec![Cell::Text(inst.spec.kind.key().into()), Cell::Text(inst.metric.key().into())];
            row.extend(values);
            row.extend([
                Cell::Count(flags.steps),
                Cell::Float(bound),
                check.max_ratio.map_or(Cell::Missing, Cell::Float),
                Cell::Count(check.excluded.len()),
                Cell::Count(audit.violation_count()),
                Cell::Text(if check.passed { "pass" } else { "fail" }.into()),
            ]);
            table.push(row);
            table.to_text()
        }
    };
    let failure = (!check.passed).then(|| CliError::Verification(format!("{}: a step exceeded the bound", inst.spec.kind.key())));
    Ok(Outcome { text, failure })
}

/// The quantities of `trace_csv` as a table.
fn trace_table(trace: &sos_rates::oracle::RunTrace<f64>, metric: MetricKind) -> Table {
    let mut table = Table::new(["step", "f", "dist_sq", "grad_sq", "gamma", "ratio"]);
    for k in 0..trace.len() {
        let ratio = if k + 1 < trace.len() {
            let now = metric_value(trace, metric, k);
            if now == 0.0 {
                Cell::Missing
            } else {
                Cell::Float(metric_value(trace, metric, k + 1) / now)
            }
        } else {
            Cell::Missing
        };
        table.push(vec![
            Cell::Count(k),
            Cell::Float(trace.values[k]),
            Cell::Float(metric_value(trace, MetricKind::DistanceSquared, k)),
            Cell::Float(metric_value(trace, MetricKind::GradientNormSquared, k)),
            trace.steps.get(k).map_or(Cell::Missing, |g| Cell::Float(*g)),
            ratio,
        ]);
    }
    table
}
