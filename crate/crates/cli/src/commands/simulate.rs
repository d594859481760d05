use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Subcommand, ValueEnum};
use neurodyn::simulator::{
    compliant_init, degenerate_setup, make_dataset, make_multiclass_dataset, mode_fleet, starvation_experiment,
    train_with_observer, FleetSpec, Loss, Mode, ModeMonitor, Sampling, SeparableDataset, TrainConfig,
};
use neurodyn::starvation::starvation_bound;
use neurodyn::{Cell, Table};
use rayon::prelude::*;

use super::{num_row, Output};
use crate::fail::{below, fraction, invalid, positive};
use crate::output::OutputArgs;

#[derive(Args, Debug, Clone, PartialEq)]
pub struct SimulateArgs {
    #[command(subcommand)]
    pub experiment: Experiment,
}

#[derive(Subcommand, Debug, Clone, PartialEq)]
pub enum Experiment {
    /// Train one network and record the logit of each class's first point.
    #[command(allow_negative_numbers = true)]
    Logit(LogitArgs),
    /// Frequent and rare feature competing for one neuron.
    #[command(allow_negative_numbers = true)]
    Starvation(SimStarvationArgs),
    /// Many seeded runs checked for mode independence after every step.
    #[command(allow_negative_numbers = true)]
    ModeFleet(FleetArgs),
}

impl SimulateArgs {
    pub fn output(&self) -> &OutputArgs {
        match &self.experiment {
            Experiment::Logit(a) => &a.output,
            Experiment::Starvation(a) => &a.output,
            Experiment::ModeFleet(a) => &a.output,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.experiment {
            Experiment::Logit(a) => a.validate(),
            Experiment::Starvation(a) => a.validate(),
            Experiment::ModeFleet(a) => a.validate(),
        }
    }

    pub fn run(&self) -> Result<Output> {
        match &self.experiment {
            Experiment::Logit(a) => a.run(),
            Experiment::Starvation(a) => a.run(),
            Experiment::ModeFleet(a) => a.run(),
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Setup {
    /// One point per class on the degenerate hyperbola (--norm, --z0).
    Degenerate,
    /// Cone dataset with a random compliant initialization.
    Random,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossArg {
    Bce,
    Hinge,
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct LogitArgs {
    #[arg(long, value_enum, default_value_t = Setup::Degenerate)]
    pub setup: Setup,
    #[arg(long, default_value_t = 1.0)]
    pub norm: f64,
    #[arg(long, default_value_t = 0.5)]
    pub z0: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 8)]
    pub dim: usize,
    /// Points per class.
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    /// Cone half-angle in degrees.
    #[arg(long, default_value_t = 30.0)]
    pub angle: f64,
    #[arg(long, default_value_t = 4)]
    pub hidden: usize,
    /// More than two classes switches to a softmax output.
    #[arg(long, default_value_t = 2)]
    pub classes: usize,
    /// Train on this dataset instead of generating one.
    #[arg(long)]
    pub dataset_in: Option<PathBuf>,
    /// Also write the dataset used.
    #[arg(long)]
    pub dataset_out: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 10_000)]
    pub steps: u64,
    /// Draw class 1 with this probability instead of uniformly over points.
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, value_enum, default_value_t = LossArg::Bce)]
    pub loss: LossArg,
    #[arg(long, default_value_t = 100)]
    pub record_every: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

impl LogitArgs {
    pub fn validate(&self) -> Result<()> {
        positive("lr", self.lr)?;
        if self.record_every == 0 {
            return Err(invalid("--record-every must be at least 1"));
        }
        if let Some(p) = self.p {
            below("p", p, 1.0)?;
        }
        match self.setup {
            Setup::Degenerate => {
                positive("norm", self.norm)?;
                positive("z0", self.z0)?;
                if self.dataset_in.is_some() {
                    return Err(invalid("--dataset-in needs --setup random"));
                }
            }
            Setup::Random => {
                if self.classes < 2 {
                    return Err(invalid(format!("--classes must be at least 2, got {}", self.classes)));
                }
                if self.loss == LossArg::Hinge && self.classes > 2 {
                    return Err(invalid("hinge loss needs --classes 2"));
                }
            }
        }
        Ok(())
    }

    fn dataset(&self) -> Result<SeparableDataset> {
        if let Some(path) = &self.dataset_in {
            let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            return Ok(SeparableDataset::read_json(BufReader::new(file))?);
        }
        let range = (0.5, 1.5);
        Ok(if self.classes == 2 {
            make_dataset(self.seed, self.dim, self.n, self.angle, range)?
        } else {
            make_multiclass_dataset(self.seed, self.dim, self.classes, self.n, self.angle, range)?
        })
    }

    pub fn run(&self) -> Result<Output> {
        let (params, ds) = match self.setup {
            Setup::Degenerate => degenerate_setup(self.norm, self.z0)?,
            Setup::Random => {
                let ds = self.dataset()?;
                let multi = ds.num_classes() > 2;
                (compliant_init(&ds, self.hidden, multi, self.seed)?, ds)
            }
        };
        if let Some(path) = &self.dataset_out {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            ds.write_json(BufWriter::new(file))?;
        }
        let mode = match ds.num_classes() {
            2 => Mode::Binary,
            c => Mode::MultiClass(c),
        };
        let config = TrainConfig {
            sampling: self.p.map_or(Sampling::Uniform, Sampling::PerClassRate),
            loss: match self.loss {
                LossArg::Bce => Loss::Bce,
                LossArg::Hinge => Loss::Hinge,
            },
            mode,
            record_every: self.record_every,
            ..TrainConfig::new(self.lr, self.steps, self.seed)
        };
        let mut monitor = ModeMonitor::new(&ds);
        let result = train_with_observer(&params, &ds, &config, |s, p| monitor.observe(s, p))?;
        let report = monitor.report();
        Ok(Output {
            table: result.history.to_table(),
            note: Some(format!("{} mode-independence violations", report.violations())),
        })
    }
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct SimStarvationArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.5, 0.2, 0.1])]
    pub lambdas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.01])]
    pub deltas: Vec<f64>,
    /// Seeds per cell, counting up from --seed.
    #[arg(long, default_value_t = 1)]
    pub runs: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    #[arg(long, default_value_t = 2_000_000)]
    pub max_steps: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

impl SimStarvationArgs {
    pub fn validate(&self) -> Result<()> {
        positive("lr", self.lr)?;
        for &l in &self.lambdas {
            fraction("lambdas", l)?;
        }
        for &d in &self.deltas {
            below("deltas", d, 0.5)?;
        }
        if self.runs == 0 {
            return Err(invalid("--runs must be at least 1"));
        }
        Ok(())
    }

    pub fn run(&self) -> Result<Output> {
        let cells: Vec<(f64, f64, u64)> = self
            .lambdas
            .iter()
            .flat_map(|&l| self.deltas.iter().map(move |&d| (l, d)))
            .flat_map(|(l, d)| (0..self.runs).map(move |r| (l, d, self.seed + r)))
            .collect();
        let rows: Vec<Vec<Cell>> = cells
            .par_iter()
            .map(|&(lambda, delta, seed)| {
                let o = starvation_experiment(lambda, delta, seed, self.lr, self.max_steps)?;
                let mut row = vec![Cell::Num(lambda), Cell::Num(delta), Cell::Int(seed as i64), Cell::Int(o.steps as i64)];
                row.extend(num_row(&[o.conf_x1, o.conf_both, o.conf_probe, starvation_bound(lambda, delta)?]));
                Ok(row)
            })
            .collect::<Result<_>>()?;
        let mut table = Table::new(["lambda", "delta", "seed", "steps", "conf_x1", "conf_both", "conf_probe", "bound"]);
        for r in rows {
            table.push(r);
        }
        Ok(Output::plain(table))
    }
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct FleetArgs {
    #[arg(long, default_value_t = 1000)]
    pub runs: usize,
    /// Hidden sizes, cycled over runs.
    #[arg(long, value_delimiter = ',', default_values_t = vec![2, 4, 8])]
    pub hidden: Vec<usize>,
    /// Softmax runs over this many classes; binary if absent.
    #[arg(long)]
    pub classes: Option<usize>,
    #[arg(long, default_value_t = 8)]
    pub dim: usize,
    /// Points per class.
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long, default_value_t = 200)]
    pub steps: u64,
    #[arg(long, default_value_t = 0.1)]
    pub lr: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

impl FleetArgs {
    pub fn validate(&self) -> Result<()> {
        positive("lr", self.lr)?;
        if self.runs == 0 || self.hidden.is_empty() {
            return Err(invalid("--runs and --hidden must be non-empty"));
        }
        Ok(())
    }

    pub fn run(&self) -> Result<Output> {
        let s = mode_fleet(&FleetSpec {
            runs: self.runs,
            hidden: self.hidden.clone(),
            classes: self.classes,
            dim: self.dim,
            n_per_class: self.n,
            steps: self.steps,
            learning_rate: self.lr,
            seed: self.seed,
        })?;
        let mut table = Table::new(["runs", "failed_runs", "checks", "activation_violations", "sign_violations"]);
        table.push(vec![
            s.runs.into(),
            s.failed_runs.into(),
            (s.report.checks as i64).into(),
            (s.report.activation_violations as i64).into(),
            (s.report.sign_violations as i64).into(),
        ]);
        Ok(Output::plain(table))
    }
}
