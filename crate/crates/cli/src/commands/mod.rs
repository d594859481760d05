//! Subcommands. Each one validates its flags, computes a table and leaves
//! writing to the caller.

mod analysis;
mod simulate;
mod trajectory;

use anyhow::Result;
use clap::Subcommand;
use neurodyn::{Cell, Table, Trajectory};

use crate::fail::invalid;
use crate::output::OutputArgs;

pub use analysis::{DeepLogitArgs, HingeCompareArgs, PhaseScanArgs, StarvationArgs, TimeRatioArgs};
pub use simulate::SimulateArgs;
pub use trajectory::TrajectoryArgs;

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Logit trajectory of one mode under cross-entropy or hinge loss.
    #[command(allow_negative_numbers = true)]
    Trajectory(TrajectoryArgs),
    /// Predicted and integrated fate of every initialization on a (y0, z0) grid.
    #[command(allow_negative_numbers = true)]
    PhaseScan(PhaseScanArgs),
    /// Time to reach confidence 1 - delta under cross-entropy and hinge loss.
    #[command(allow_negative_numbers = true)]
    HingeCompare(HingeCompareArgs),
    /// Ratio of the times two classes need to reach confidence 1 - delta.
    #[command(allow_negative_numbers = true)]
    TimeRatio(TimeRatioArgs),
    /// Gradient-starvation bounds, bound surfaces and trajectories.
    #[command(allow_negative_numbers = true)]
    Starvation(StarvationArgs),
    /// Logit of an aligned deep network.
    #[command(allow_negative_numbers = true)]
    DeepLogit(DeepLogitArgs),
    /// SGD on a small two-layer ReLU network.
    #[command(allow_negative_numbers = true)]
    Simulate(SimulateArgs),
}

/// A computed table plus an optional remark for the summary line.
pub struct Output {
    pub table: Table,
    pub note: Option<String>,
}

impl Output {
    fn plain(table: Table) -> Self {
        Self { table, note: None }
    }
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Trajectory(_) => "trajectory",
            Command::PhaseScan(_) => "phase-scan",
            Command::HingeCompare(_) => "hinge-compare",
            Command::TimeRatio(_) => "time-ratio",
            Command::Starvation(_) => "starvation",
            Command::DeepLogit(_) => "deep-logit",
            Command::Simulate(_) => "simulate",
        }
    }

    pub fn output(&self) -> &OutputArgs {
        match self {
            Command::Trajectory(a) => &a.output,
            Command::PhaseScan(a) => &a.output,
            Command::HingeCompare(a) => &a.output,
            Command::TimeRatio(a) => &a.output,
            Command::Starvation(a) => &a.output,
            Command::DeepLogit(a) => &a.output,
            Command::Simulate(a) => a.output(),
        }
    }

    /// Cheap checks that need no numerics.
    pub fn validate(&self) -> Result<()> {
        match self {
            Command::Trajectory(a) => a.validate(),
            Command::PhaseScan(a) => a.validate(),
            Command::HingeCompare(a) => a.validate(),
            Command::TimeRatio(a) => a.validate(),
            Command::Starvation(a) => a.validate(),
            Command::DeepLogit(a) => a.validate(),
            Command::Simulate(a) => a.validate(),
        }
    }

    pub fn run(&self) -> Result<Output> {
        self.validate()?;
        match self {
            Command::Trajectory(a) => a.run(),
            Command::PhaseScan(a) => a.run(),
            Command::HingeCompare(a) => a.run(),
            Command::TimeRatio(a) => a.run(),
            Command::Starvation(a) => a.run(),
            Command::DeepLogit(a) => a.run(),
            Command::Simulate(a) => a.run(),
        }
    }
}

/// Row times `0, step, 2 step, ..` ending exactly at `t_end`.
fn sample_times(t_end: f64, step: f64) -> Vec<f64> {
    let n = (t_end / step * (1.0 - 1e-12)).ceil() as usize;
    (0..=n).map(|i| if i == n { t_end } else { i as f64 * step }).collect()
}

/// Integration step dividing the row spacing, and how many steps per row.
fn substeps(step: f64, ode_step: f64) -> (f64, usize) {
    let k = (step / ode_step * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    (step / k as f64, k)
}

fn num_row(values: &[f64]) -> Vec<Cell> {
    values.iter().map(|&v| Cell::Num(v)).collect()
}

fn check_grid(t_end: f64, step: f64, ode_step: Option<f64>) -> Result<()> {
    crate::fail::non_negative("t-end", t_end)?;
    crate::fail::positive("step", step)?;
    if let Some(h) = ode_step {
        crate::fail::positive("ode-step", h)?;
    }
    if t_end / step > 1e7 {
        return Err(invalid(format!("--t-end / --step asks for more than 1e7 rows ({t_end} / {step})")));
    }
    Ok(())
}

/// `t` plus the named columns of `traj`, in the given order.
fn select(traj: &Trajectory, columns: &[(&str, &str)]) -> Result<Table> {
    let idx: Vec<usize> = columns
        .iter()
        .map(|(src, _)| traj.column_index(src).ok_or_else(|| invalid(format!("missing column {src}"))))
        .collect::<Result<_>>()?;
    let mut names = vec!["t"];
    names.extend(columns.iter().map(|(_, dst)| *dst));
    let mut table = Table::new(names);
    for (t, s) in traj.rows() {
        let mut row = vec![Cell::Num(t)];
        row.extend(idx.iter().map(|&i| Cell::Num(s[i])));
        table.push(row);
    }
    Ok(table)
}
