use std::path::Path;

use frontsys_core::analysis::{certify_global, decay_diagnostic, DecayReport};
use frontsys_core::cascade::{run_cascade, CascadeError, CascadeResult};
use frontsys_core::problem::InitialData;
use frontsys_core::solver::run_mms;
use frontsys_core::verify::property_suite;
use frontsys_core::{simulate, ProblemSpec, RunStatus, RunVerdict, SolverError, StopReason, Trajectory};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::config::{Config, ConfigError};
use crate::output::{self, RegimeRow};

/// Tail share of the time window used by the decay diagnostic.
pub const DECAY_TAIL: f64 = 0.2;

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(SolverError),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Config(_) | CommandError::Io(_) => 1,
            CommandError::Numerical(_) => 2,
        }
    }
}

impl From<SolverError> for CommandError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Config(msg) => CommandError::Config(ConfigError::Invalid {
                field: "solver".into(),
                message: msg,
            }),
            other => CommandError::Numerical(other),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct VerdictFile<'a> {
    pub spec: &'a ProblemSpec,
    pub initial: &'a InitialData,
    pub shifts: (f64, f64),
    pub status: RunStatus,
    pub stop: StopReason,
    pub t_reached: f64,
    pub verdict: RunVerdict,
    pub decay: Option<DecayReport>,
    pub decay_error: Option<String>,
    pub clamp_events: u64,
    pub node_updates: u64,
    pub floored_speeds: u64,
    pub warnings: &'a [String],
}

fn write_run(out: &Path, traj: &Trajectory, initial: &InitialData) -> Result<RunVerdict, CommandError> {
    let verdict = certify_global(traj);
    let (decay, decay_error) = match decay_diagnostic(traj, DECAY_TAIL) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    output::write(out, "front.csv", &output::front_csv(traj))?;
    output::write(out, "snapshots.csv", &output::snapshots_csv(traj))?;
    output::write_json(
        out,
        "verdict.json",
        &VerdictFile {
            spec: &traj.spec,
            initial,
            shifts: traj.shifts,
            status: traj.status,
            stop: traj.stop,
            t_reached: traj.t_last(),
            verdict: verdict.clone(),
            decay,
            decay_error,
            clamp_events: traj.clamp_events,
            node_updates: traj.node_updates,
            floored_speeds: traj.floored_speeds,
            warnings: &traj.warnings,
        },
    )?;
    Ok(verdict)
}

pub fn simulate_cmd(config: &Config, out: &Path) -> Result<i32, CommandError> {
    let problem = config.problem()?;
    let solver = config.solver()?;
    let traj = simulate(&problem, &solver, (0.0, 0.0))?;
    for w in &traj.warnings {
        eprintln!("warning: {w}");
    }
    let verdict = write_run(out, &traj, &problem.data)?;
    println!("{} at t = {} (status {:?})", verdict.kind(), traj.t_last(), traj.status);
    Ok(0)
}

fn sorted_axis(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn sweep_cell(config: &Config, p: f64, q: f64, amplitude: f64) -> RegimeRow {
    let mut row = RegimeRow {
        p,
        q,
        amplitude,
        verdict: String::new(),
        status: String::new(),
        t_reached: None,
        sup_end: None,
        eps: None,
        error: String::new(),
    };
    let run = || -> Result<(Trajectory, RunVerdict), CommandError> {
        let (family, _) = config.family()?.expect("checked by Config::sweep");
        let spec = ProblemSpec { p, q, ..config.spec()? };
        let problem = config.problem_with(spec, InitialData::family(family, amplitude))?;
        let traj = simulate(&problem, &config.solver()?, (0.0, 0.0))?;
        let verdict = certify_global(&traj);
        Ok((traj, verdict))
    };
    match run() {
        Ok((traj, verdict)) => {
            row.status = format!("{:?}", traj.status);
            row.t_reached = Some(traj.t_last());
            row.sup_end = traj.sup_u.last().zip(traj.sup_v.last()).map(|(u, v)| u.max(*v));
            if let RunVerdict::GlobalCertified { eps1, .. } = verdict {
                row.eps = Some(eps1);
            }
            row.verdict = verdict.kind().to_string();
        }
        Err(e) => {
            row.verdict = "Failed".into();
            row.error = e.to_string();
        }
    }
    row
}

pub fn sweep_rows(config: &Config) -> Result<Vec<RegimeRow>, CommandError> {
    let sweep = config.sweep()?;
    config.solver()?;
    let mut cells = Vec::new();
    for &p in &sorted_axis(&sweep.p) {
        for &q in &sorted_axis(&sweep.q) {
            for &a in &sorted_axis(&sweep.amplitude) {
                cells.push((p, q, a));
            }
        }
    }
    Ok(cells.par_iter().map(|&(p, q, a)| sweep_cell(config, p, q, a)).collect())
}

pub fn sweep_cmd(config: &Config, out: &Path) -> Result<i32, CommandError> {
    let rows = sweep_rows(config)?;
    output::write(out, "regime_map.csv", &output::regime_csv(&rows))?;
    let failed = rows.iter().filter(|r| !r.error.is_empty()).count();
    println!("{} cells, {failed} failed", rows.len());
    Ok(0)
}

#[derive(Debug, Serialize)]
struct CascadeSummary<'a> {
    spec: &'a ProblemSpec,
    schedule: &'a [u32],
    tol: f64,
    delegated: bool,
    warnings: &'a [String],
    differences: &'a [f64],
    differences_non_increasing: bool,
    ordering_holds: bool,
    converged_at: Option<u32>,
    outcome: String,
}

fn write_cascade(out: &Path, config: &Config, result: &CascadeResult, outcome: String) -> Result<(), CommandError> {
    let levels: Vec<_> = result.levels.iter().map(|l| (l.n, l.shift, &l.trajectory)).collect();
    output::write(out, "levels.csv", &output::levels_csv(&levels))?;
    output::write(out, "front.csv", &output::front_csv(result.limit()))?;
    output::write(out, "snapshots.csv", &output::snapshots_csv(result.limit()))?;
    output::write_json(
        out,
        "cascade.json",
        &CascadeSummary {
            spec: &result.limit().spec,
            schedule: &config.cascade.schedule,
            tol: config.cascade.tol,
            delegated: result.delegated,
            warnings: &result.warnings,
            differences: &result.differences,
            differences_non_increasing: result.differences_non_increasing(),
            ordering_holds: result.ordering_holds(),
            converged_at: result.converged_at,
            outcome,
        },
    )?;
    Ok(())
}

/// Exit 0 when the ordering holds (converged or not), 4 on an ordering violation.
pub fn cascade_cmd(config: &Config, out: &Path) -> Result<i32, CommandError> {
    let problem = config.problem()?;
    let solver = config.solver()?;
    match run_cascade(&problem, &solver, &config.cascade.schedule, config.cascade.tol) {
        Ok(result) => {
            for w in &result.warnings {
                eprintln!("warning: {w}");
            }
            if result.delegated {
                write_cascade(out, config, &result, "delegated".into())?;
                println!("single unshifted run");
            } else {
                write_cascade(out, config, &result, "converged".into())?;
                println!("converged at n = {:?}", result.converged_at);
            }
            Ok(0)
        }
        Err(e @ CascadeError::NoConvergence { .. }) => {
            let message = e.to_string();
            let CascadeError::NoConvergence { result, .. } = e else { unreachable!() };
            eprintln!("warning: {message}");
            write_cascade(out, config, &result, message)?;
            Ok(0)
        }
        Err(e @ CascadeError::OrderingViolation { .. }) => {
            let message = e.to_string();
            let CascadeError::OrderingViolation { result, .. } = e else { unreachable!() };
            eprintln!("error: {message}");
            write_cascade(out, config, &result, message)?;
            Ok(4)
        }
        Err(CascadeError::InvalidSchedule(msg)) => Err(ConfigError::Invalid {
            field: "cascade".into(),
            message: msg,
        }
        .into()),
        Err(CascadeError::Solver(e)) => Err(e.into()),
    }
}

/// Exit 0 all green, 3 only tolerance-sensitive failures, 4 otherwise.
pub fn verify_cmd(config: &Config, out: &Path) -> Result<i32, CommandError> {
    let report = property_suite(config.verify);
    for c in &report.checks {
        println!("{:<28} {:<20} {}", c.name, format!("{:?}", c.status), c.detail);
    }
    output::write_json(out, "verify.json", &report)?;
    Ok(report.exit_code())
}

pub fn mms_cmd(config: &Config, out: &Path) -> Result<i32, CommandError> {
    let table = run_mms(&config.spec()?, &config.mms)?;
    output::write(out, "convergence.csv", &output::convergence_csv(&table))?;
    println!("final order_u = {:?}", table.final_order_u());
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_by_error_kind() {
        let nan = SolverError::NonFiniteValue { t: 0.5, component: "w" };
        assert_eq!(CommandError::from(nan).exit_code(), 2);
        let cfg = SolverError::Config("n must be at least 8".into());
        let err = CommandError::from(cfg);
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().starts_with("solver:"));
    }

    #[test]
    fn axes_are_sorted_and_deduplicated() {
        assert_eq!(sorted_axis(&[2.0, 0.5, 1.0, 2.0]), vec![0.5, 1.0, 2.0]);
    }
}
