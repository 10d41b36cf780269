use depolarb_core::analytic::{
    case_a, case_b, cost_case_a, cost_case_b, cost_ml_with_prior, cost_series, ml_guesses,
    MixtureStrategy, TwoQubitCase,
};
use depolarb_core::bayes::{solve, verify_optimality, Prior};
use depolarb_core::channel::{output_case_a, output_case_b, MatrixPolynomial, MixtureKind};
use depolarb_core::linalg::{herm_eig, ComplexMatrix};
use depolarb_core::mc::{simulate_mixture, simulate_two_qubit};
use depolarb_core::poly::to_f64;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::output::{matrix_json, Cell, Table};

pub const MAX_M: usize = 200;
pub const MIN_TRIALS: u64 = 10_000;
/// W⁽⁰⁾ eigenvalues at or below this are treated as outside its support.
const SUPPORT_TOL: f64 = 1e-12;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(depolarb_core::Error),
}

impl From<depolarb_core::Error> for CliError {
    fn from(e: depolarb_core::Error) -> Self {
        CliError::Numerical(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numerical(e) => write!(f, "numerical failure: {e}"),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PriorKind {
    Full,
    Narrow,
}

impl PriorKind {
    pub fn build(self, d: usize) -> CliResult<Prior> {
        match self {
            PriorKind::Full => Prior::full(d).map_err(|e| CliError::Usage(e.to_string())),
            PriorKind::Narrow => Ok(Prior::narrow()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Strategy {
    EntOne,
    EntBoth,
    Sep,
    Ml,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum CaseArg {
    A,
    B,
}

impl From<CaseArg> for TwoQubitCase {
    fn from(c: CaseArg) -> Self {
        match c {
            CaseArg::A => TwoQubitCase::A,
            CaseArg::B => TwoQubitCase::B,
        }
    }
}

fn family(case: TwoQubitCase, x: f64) -> CliResult<MatrixPolynomial> {
    let f = match case {
        TwoQubitCase::A => output_case_a(x),
        TwoQubitCase::B => output_case_b(x),
    };
    f.map_err(|e| CliError::Usage(e.to_string()))
}

fn check_x(x: f64) -> CliResult<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        usage(format!("--x {x} outside [0, 1]"))
    }
}

/// Points of `[0, 1]` spaced by `step`; exact fractions `i/n` when `1/step` is an integer.
fn x_grid(step: f64) -> CliResult<Vec<f64>> {
    if !(step > 0.0 && step <= 1.0) {
        return usage(format!("--x-step {step} must lie in (0, 1]"));
    }
    let inv = 1.0 / step;
    let n = inv.round();
    if (inv - n).abs() < 1e-9 {
        let n = n as usize;
        Ok((0..=n).map(|i| i as f64 / n as f64).collect())
    } else {
        let n = (inv + 1e-12).floor() as usize;
        Ok((0..=n).map(|i| i as f64 * step).collect())
    }
}

pub fn cost_x(d: usize, step: f64) -> CliResult<Table> {
    if d != 2 {
        return usage("cost-x describes qubit probes; use --d 2");
    }
    let rows = x_grid(step)?
        .into_iter()
        .map(|x| vec![Cell::Real(x), Cell::Real(cost_case_a(x)), Cell::Real(cost_case_b(x))])
        .collect();
    Ok(Table {
        header: vec!["x", "cost_case_a", "cost_case_b"],
        rows,
    })
}

pub fn cost_m(d: usize, m_max: usize, prior: PriorKind) -> CliResult<Table> {
    if d < 2 {
        return usage(format!("--d {d} < 2"));
    }
    if !(1..=MAX_M).contains(&m_max) {
        return usage(format!("--m-max {m_max} outside 1..={MAX_M}"));
    }
    let p = prior.build(d)?;
    let rows = (1..=m_max)
        .into_par_iter()
        .map(|m| {
            let series = |kind| -> CliResult<f64> {
                Ok(cost_series(&MixtureStrategy::new(kind, d, m)?, &p).cost)
            };
            let ml = cost_ml_with_prior(m, d, &p)?;
            Ok(vec![
                Cell::Int(m as u64),
                Cell::Real(series(MixtureKind::EntOne)?),
                Cell::Real(series(MixtureKind::EntBoth)?),
                Cell::Real(series(MixtureKind::Sep)?),
                Cell::Real(ml.formula),
                Cell::Real(ml.exact),
            ])
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(Table {
        header: vec!["M", "C1", "C2", "C_SEP", "C_ML_formula", "C_ML_exact"],
        rows,
    })
}

/// Largest entry of `P (a − b) P` with `P` the projector onto the range of `w0`.
fn support_discrepancy(w0: &ComplexMatrix, a: &ComplexMatrix, b: &ComplexMatrix) -> CliResult<f64> {
    let eig = herm_eig(w0)?;
    let n = w0.rows();
    let mut p = ComplexMatrix::zeros(n, n);
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam > SUPPORT_TOL {
            p = &p + &ComplexMatrix::outer(&eig.eigenvectors.column(k));
        }
    }
    let diff = a - b;
    Ok(p.matmul(&diff).matmul(&p).max_norm())
}

pub fn theta_op(case: TwoQubitCase, x: f64, prior: PriorKind, grid: usize) -> CliResult<Value> {
    check_x(x)?;
    if grid < 2 {
        return usage(format!("--grid {grid} < 2"));
    }
    let p = prior.build(2)?;
    let fam = family(case, x)?;
    let sol = solve(&fam, &p)?;
    let report = verify_optimality(&fam, &p, &sol.pom, grid)?;

    let closed = match prior {
        PriorKind::Narrow => None,
        PriorKind::Full => Some(match case {
            TwoQubitCase::A => {
                let r = case_a(x)?;
                (r.theta_matrix, r.guesses.to_vec(), r.cost)
            }
            TwoQubitCase::B => {
                let r = case_b(x)?;
                (r.theta_matrix.clone(), r.guesses().to_vec(), r.cost)
            }
        }),
    };
    let (closed_json, max_disc, support_disc) = match &closed {
        None => (Value::Null, Value::Null, Value::Null),
        Some((theta, guesses, cost)) => (
            json!({
                "theta_matrix": matrix_json(theta),
                "guesses": guesses,
                "cost": cost,
            }),
            json!(sol.theta_op.max_abs_diff(theta)),
            json!(support_discrepancy(&sol.moments.w0, &sol.theta_op, theta)?),
        ),
    };

    Ok(json!({
        "case": case,
        "x": x,
        "prior": { "lower": p.lower_f64(), "upper": p.upper_f64() },
        "theta_matrix": matrix_json(&sol.theta_op),
        "guesses": sol.pom.guesses(),
        "projector_ranks": sol.pom.ranks(),
        "cost": sol.cost,
        "optimality_report": report,
        "closed_form": closed_json,
        "max_discrepancy": max_disc,
        "support_discrepancy": support_disc,
    }))
}

/// What `simulate` runs: a single-copy two-qubit probe or a multi-copy strategy.
#[derive(Debug, Clone, Copy)]
pub enum Experiment {
    TwoQubit { case: TwoQubitCase, x: f64 },
    Mixture { strategy: Strategy, d: usize, pairs: usize },
}

#[derive(Debug, Clone)]
pub struct SimOutcome {
    pub report: depolarb_core::mc::SimReport,
    pub analytic: f64,
    pub z_score: f64,
    pub description: Value,
}

impl SimOutcome {
    pub fn to_json(&self) -> Value {
        json!({
            "experiment": self.description,
            "report": self.report,
            "analytic": self.analytic,
            "z_score": self.z_score,
        })
    }

    pub fn to_table(&self) -> Table {
        Table {
            header: vec!["trials", "empirical_cost", "std_error", "seed", "analytic", "z_score"],
            rows: vec![vec![
                Cell::Int(self.report.trials),
                Cell::Real(self.report.empirical_cost),
                Cell::Real(self.report.std_error),
                Cell::Int(self.report.seed),
                Cell::Real(self.analytic),
                Cell::Real(self.z_score),
            ]],
        }
    }
}

pub fn simulate(exp: Experiment, prior: PriorKind, trials: u64, seed: u64) -> CliResult<SimOutcome> {
    if trials < MIN_TRIALS {
        return usage(format!("--trials {trials} < {MIN_TRIALS}"));
    }
    let (report, analytic, description) = match exp {
        Experiment::TwoQubit { case, x } => {
            check_x(x)?;
            let p = prior.build(2)?;
            let sol = solve(&family(case, x)?, &p)?;
            let r = simulate_two_qubit(case, x, &sol.pom, &p, trials, seed)?;
            (r, sol.cost, json!({ "case": case, "x": x }))
        }
        Experiment::Mixture { strategy, d, pairs } => {
            if d < 2 {
                return usage(format!("--d {d} < 2"));
            }
            if !(1..=MAX_M).contains(&pairs) {
                return usage(format!("--pairs {pairs} outside 1..={MAX_M}"));
            }
            let p = prior.build(d)?;
            let (kind, name) = match strategy {
                Strategy::EntOne => (MixtureKind::EntOne, "ent-one"),
                Strategy::EntBoth => (MixtureKind::EntBoth, "ent-both"),
                Strategy::Sep | Strategy::Ml => (MixtureKind::Sep, "sep"),
            };
            let s = MixtureStrategy::new(kind, d, pairs)?;
            let (guesses, target, label) = if strategy == Strategy::Ml {
                let g: Vec<f64> = ml_guesses(s.copies(), d).iter().map(to_f64).collect();
                (g, cost_ml_with_prior(pairs, d, &p)?.exact, "ml")
            } else {
                let c = cost_series(&s, &p);
                (c.guesses, c.cost, name)
            };
            let r = simulate_mixture(&s, &guesses, &p, trials, seed)?;
            (r, target, json!({ "strategy": label, "d": d, "pairs": pairs }))
        }
    };
    Ok(SimOutcome {
        z_score: (report.empirical_cost - analytic) / report.std_error,
        report,
        analytic,
        description,
    })
}
