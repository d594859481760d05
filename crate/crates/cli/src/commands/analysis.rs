use anyhow::Result;
use clap::Args;
use neurodyn::bce::convergence_time_ratio;
use neurodyn::deep::{aligned_initial_logit, deep_logit_system, solve_deep_logit, time_to_deep_logit};
use neurodyn::hinge::{compare_losses, timings_to_table};
use neurodyn::ode::richardson_refine;
use neurodyn::phase::{records_to_table, scan, ScanSpec};
use neurodyn::specfn::sigmoid;
use neurodyn::starvation::{
    applicable_bound, bound_surface, integrate_starvation, integrate_to_tstar, surface_to_table, table1,
};
use neurodyn::{ClassLabel, ClassSpec, DeepConfig, StarvationConfig, Table};

use super::{check_grid, num_row, substeps, Output};
use crate::fail::{below, fraction, invalid, positive};
use crate::output::OutputArgs;

#[derive(Args, Debug, Clone, PartialEq)]
pub struct PhaseScanArgs {
    #[arg(long, default_value_t = 0.7)]
    pub norm: f64,
    /// Points per axis.
    #[arg(long, default_value_t = 41)]
    pub grid: usize,
    /// The grid covers [-range, range] on both axes.
    #[arg(long, default_value_t = 2.0)]
    pub range: f64,
    #[arg(long, default_value_t = 4000.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub step: f64,
    /// Scan the class-2 diagram (z axis mirrored).
    #[arg(long)]
    pub class2: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

impl PhaseScanArgs {
    pub fn validate(&self) -> Result<()> {
        positive("norm", self.norm)?;
        positive("range", self.range)?;
        positive("t-end", self.t_end)?;
        positive("step", self.step)?;
        if self.grid == 0 || self.grid > 1001 {
            return Err(invalid(format!("--grid must lie in 1..=1001, got {}", self.grid)));
        }
        Ok(())
    }

    pub fn run(&self) -> Result<Output> {
        let records = scan(&ScanSpec {
            norm: self.norm,
            grid: self.grid,
            range: self.range,
            t_end: self.t_end,
            step: self.step,
            class2: self.class2,
        })?;
        let off: Vec<_> = records.iter().filter(|r| r.region.boundary.is_none()).collect();
        let agree = off.iter().filter(|r| r.agree).count();
        Ok(Output {
            table: records_to_table(&records),
            note: Some(format!("{agree}/{} off-asymptote points agree", off.len())),
        })
    }
}

fn default_deltas() -> Vec<f64> {
    vec![0.3, 0.1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6]
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct HingeCompareArgs {
    #[arg(long, default_value_t = 0.1)]
    pub u0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub norm: f64,
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    #[arg(long, value_delimiter = ',', default_values_t = default_deltas())]
    pub deltas: Vec<f64>,
    /// Use the clipped hinge output, which never passes the margin.
    #[arg(long)]
    pub clipped: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

impl HingeCompareArgs {
    pub fn validate(&self) -> Result<()> {
        positive("u0", self.u0)?;
        positive("norm", self.norm)?;
        fraction("p", self.p)?;
        for &d in &self.deltas {
            below("deltas", d, 0.5)?;
        }
        Ok(())
    }

    pub fn run(&self) -> Result<Output> {
        let rows = compare_losses(self.u0, self.norm, self.p, &self.deltas, self.clipped)?;
        Ok(Output::plain(timings_to_table(&rows)))
    }
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct TimeRatioArgs {
    #[arg(long, default_value_t = 1.0)]
    pub norm1: f64,
    #[arg(long, default_value_t = 1.0)]
    pub norm2: f64,
    /// Frequency of class 1; class 2 has 1 - p.
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    #[arg(long, default_value_t = 0.1)]
    pub u0: f64,
    /// Magnitude of the class-2 starting logit.
    #[arg(long, default_value_t = 0.1)]
    pub v0: f64,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1e-2, 1e-4, 1e-6])]
    pub deltas: Vec<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

impl TimeRatioArgs {
    pub fn validate(&self) -> Result<()> {
        positive("norm1", self.norm1)?;
        positive("norm2", self.norm2)?;
        below("p", self.p, 1.0)?;
        positive("u0", self.u0)?;
        positive("v0", self.v0)?;
        for &d in &self.deltas {
            below("deltas", d, 0.5)?;
        }
        Ok(())
    }

    pub fn run(&self) -> Result<Output> {
        let c1 = ClassSpec::new(self.norm1, self.p, ClassLabel::One)?;
        let c2 = ClassSpec::new(self.norm2, 1.0 - self.p, ClassLabel::Two)?;
        let mut table = Table::new(["delta", "t1", "t2", "exact", "approx"]);
        for &d in &self.deltas {
            let r = convergence_time_ratio(&c1, &c2, self.u0, self.v0, d)?;
            table.push(num_row(&[d, r.t1, r.t2, r.exact, r.approx]));
        }
        Ok(Output::plain(table))
    }
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct StarvationArgs {
    /// The bound for the reference (delta, lambda) grid.
    #[arg(long, conflicts_with = "trajectory")]
    pub table1: bool,
    /// Integrate one (lambda, delta) system instead of a bound surface.
    #[arg(long)]
    pub trajectory: bool,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.5, 0.2, 0.1, 0.01])]
    pub lambdas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.01, 1e-4])]
    pub deltas: Vec<f64>,
    /// Frequency of the shared feature, for --trajectory.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Target confidence gap, for --trajectory.
    #[arg(long, default_value_t = 0.01)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.1)]
    pub alpha0: f64,
    #[arg(long, default_value_t = 0.005)]
    pub beta0: f64,
    #[arg(long, default_value_t = 0.1)]
    pub z0: f64,
    /// Relaxed bound with z* = sqrt(L) instead of the integrated z at t*.
    #[arg(long)]
    pub fair_init: bool,
    /// End of the trajectory; defaults to t*.
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub ode_step: f64,
    #[arg(long, default_value_t = 1.0)]
    pub norm1: f64,
    #[arg(long, default_value_t = 1.0)]
    pub norm2: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

impl StarvationArgs {
    fn config(&self) -> Result<StarvationConfig> {
        let lambda = self
            .lambda
            .ok_or_else(|| invalid("--lambda is required with --trajectory"))?;
        Ok(StarvationConfig::new(lambda, self.delta, self.alpha0, self.beta0, self.z0)?
            .with_feature_norms(self.norm1, self.norm2)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trajectory {
            self.config()?;
            check_grid(self.t_end.unwrap_or(0.0), self.step, Some(self.ode_step))?;
            return Ok(());
        }
        if self.norm1 != 1.0 || self.norm2 != 1.0 || self.t_end.is_some() || self.lambda.is_some() {
            return Err(invalid("--lambda, --t-end, --norm1 and --norm2 need --trajectory"));
        }
        if self.table1 {
            return Ok(());
        }
        for &l in &self.lambdas {
            fraction("lambdas", l)?;
        }
        for &d in &self.deltas {
            below("deltas", d, 0.5)?;
        }
        positive("z0", self.z0)
    }

    pub fn run(&self) -> Result<Output> {
        if self.table1 {
            return Ok(Output::plain(table1()));
        }
        if !self.trajectory {
            let points = bound_surface(&self.lambdas, &self.deltas, self.alpha0, self.beta0, self.z0, self.fair_init)?;
            return Ok(Output::plain(surface_to_table(&points)));
        }
        let config = self.config()?;
        let (t_star, at) = integrate_to_tstar(&config)?;
        let t_end = self.t_end.unwrap_or(t_star);
        let (h, k) = substeps(self.step, self.ode_step);
        let traj = integrate_starvation(&config, t_end, h)?.thinned(k);
        let bound = applicable_bound(&config, at.z)?;
        Ok(Output {
            table: traj.to_table(),
            note: Some(format!(
                "t* = {t_star:.6}, probe confidence {:.6} against bound {bound:.6}",
                at.conf_x2
            )),
        })
    }
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct DeepLogitArgs {
    /// Number of layers.
    #[arg(long, default_value_t = 3)]
    pub depth: usize,
    #[arg(long, default_value_t = 1.0)]
    pub norm: f64,
    #[arg(long, conflicts_with = "z0")]
    pub u0: Option<f64>,
    /// Common initial weight of an aligned network; sets u0.
    #[arg(long)]
    pub z0: Option<f64>,
    #[arg(long, default_value_t = 10.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub ode_step: f64,
    /// Integrate at two step sizes and report the discrepancy.
    #[arg(long)]
    pub refine: bool,
    /// Report the time to reach each of these logits instead of a trajectory.
    #[arg(long, value_delimiter = ',')]
    pub levels: Vec<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

impl DeepLogitArgs {
    fn config(&self) -> Result<DeepConfig> {
        let u0 = match (self.u0, self.z0) {
            (Some(u), None) => u,
            (None, Some(z)) => aligned_initial_logit(z, self.norm, self.depth)?,
            _ => return Err(invalid("give one of --u0 or --z0")),
        };
        Ok(DeepConfig::new(self.depth, self.norm, u0)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.config()?;
        check_grid(self.t_end, self.step, Some(self.ode_step))?;
        if self.refine && !self.levels.is_empty() {
            return Err(invalid("--refine applies to trajectories, not --levels"));
        }
        Ok(())
    }

    pub fn run(&self) -> Result<Output> {
        let config = self.config()?;
        let (h, k) = substeps(self.step, self.ode_step);
        if !self.levels.is_empty() {
            let mut table = Table::new(["level", "t"]);
            for &level in &self.levels {
                table.push(num_row(&[level, time_to_deep_logit(&config, level, 1e6, h)?]));
            }
            return Ok(Output::plain(table));
        }
        let (traj, note) = if self.refine {
            let fine = richardson_refine(&deep_logit_system(&config), &[config.u0], self.t_end, h)?;
            let d = fine.meta.discrepancy.unwrap_or(0.0);
            (fine.thinned(2 * k), Some(format!("step-halving discrepancy {d:.1e}")))
        } else {
            (solve_deep_logit(&config, self.t_end, h)?.thinned(k), None)
        };
        let mut table = Table::new(["t", "u", "confidence"]);
        for (t, s) in traj.rows() {
            table.push(num_row(&[t, s[0], sigmoid(s[0])]));
        }
        Ok(Output { table, note })
    }
}
