use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use neurodyn::bce::{
    convergence_bound, degenerate_curve, evolve, hyperbolic_trajectory, orthogonal_class_rate, solve_multi_neuron,
    solve_relaxed_h2, solve_top_left, time_to_logit, top_left_system,
};
use neurodyn::hinge::{hinge_batch_classify, hinge_trajectory, time_to_margin};
use neurodyn::ode::{integrate, richardson_refine};
use neurodyn::simulator::SeparableDataset;
use neurodyn::specfn::{sigmoid, sigmoid_inverse};
use neurodyn::{Branch, ClassLabel, ScalarState, Table};

use super::{check_grid, num_row, sample_times, select, substeps, Output};
use crate::fail::{fraction, invalid, positive};
use crate::output::OutputArgs;

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossArg {
    Bce,
    Hinge,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// One mode, one repeated input.
    Single,
    /// Cross-entropy from the wrong side of the top-left asymptote (u0 < 0).
    TopLeft,
    /// Several neurons sharing one input (--u0s).
    MultiNeuron,
    /// A class of --m orthogonal points trained in full batch.
    Orthogonal,
    /// A row that is also active on an orthogonal class-2 point.
    RelaxedH2,
    /// Hinge loss on a class of several points (--dataset, --w0).
    Batch,
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct TrajectoryArgs {
    #[arg(long, value_enum, default_value_t = LossArg::Bce)]
    pub loss: LossArg,
    #[arg(long, value_enum, default_value_t = Model::Single)]
    pub model: Model,
    /// Initial logit. Without --y0/--z0 the mode starts on the degenerate
    /// hyperbola. Class 2 starts below zero.
    #[arg(long)]
    pub u0: Option<f64>,
    #[arg(long)]
    pub y0: Option<f64>,
    #[arg(long)]
    pub z0: Option<f64>,
    /// Input norm.
    #[arg(long, default_value_t = 1.0)]
    pub norm: f64,
    /// Class frequency; time runs `p` times slower for the class.
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    #[arg(long, default_value_t = 10.0)]
    pub t_end: f64,
    /// Spacing between output rows.
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    /// Largest step for the models that are integrated numerically.
    #[arg(long, default_value_t = 1e-3)]
    pub ode_step: f64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub class: u8,
    /// Initial per-neuron logits for the multi-neuron model.
    #[arg(long, value_delimiter = ',')]
    pub u0s: Vec<f64>,
    /// Number of orthogonal points.
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    #[arg(long)]
    pub alpha0: Option<f64>,
    #[arg(long)]
    pub beta0: Option<f64>,
    /// Dataset JSON whose first class feeds the batch model.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub w0: Vec<f64>,
    /// Query vector for the batch model; defaults to the sum of the class.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub query: Vec<f64>,
    /// Stop when the confidence reaches this value instead of at --t-end.
    #[arg(long)]
    pub until_confidence: Option<f64>,
    /// Add the logarithmic growth bound as a `bound` column.
    #[arg(long)]
    pub bound: bool,
    /// Integrate at two step sizes and report the discrepancy.
    #[arg(long)]
    pub refine: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn need(v: Option<f64>, flag: &str, model: &str) -> Result<f64> {
    v.ok_or_else(|| invalid(format!("--{flag} is required for the {model} model")))
}

impl TrajectoryArgs {
    fn label(&self) -> ClassLabel {
        if self.class == 1 {
            ClassLabel::One
        } else {
            ClassLabel::Two
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("norm", self.norm)?;
        fraction("p", self.p)?;
        check_grid(self.t_end, self.step, Some(self.ode_step))?;
        let bce_only = matches!(self.model, Model::TopLeft | Model::MultiNeuron | Model::Orthogonal | Model::RelaxedH2);
        if bce_only && self.loss != LossArg::Bce {
            return Err(invalid(format!("the {:?} model needs --loss bce", self.model)));
        }
        if self.model == Model::Batch && self.loss != LossArg::Hinge {
            return Err(invalid("the batch model needs --loss hinge"));
        }
        if self.refine && self.model != Model::TopLeft {
            return Err(invalid("--refine applies to the top-left model"));
        }
        if self.bound && !(self.model == Model::Single && self.loss == LossArg::Bce && self.y0.is_none()) {
            return Err(invalid("--bound needs the single cross-entropy model started from --u0"));
        }
        if let Some(c) = self.until_confidence {
            if !(self.model == Model::Single && self.loss == LossArg::Bce && self.y0.is_none()) {
                return Err(invalid("--until-confidence needs the single cross-entropy model started from --u0"));
            }
            if !(c > 0.5 && c < 1.0) {
                return Err(invalid(format!("--until-confidence must lie in (0.5, 1), got {c}")));
            }
        }
        if self.class == 2 && self.model != Model::Single {
            return Err(invalid("--class 2 applies to the single model"));
        }
        match self.model {
            Model::Single => match (self.u0, self.y0, self.z0) {
                (Some(_), None, None) | (None, Some(_), Some(_)) => Ok(()),
                _ => Err(invalid("give either --u0 or both --y0 and --z0")),
            },
            Model::TopLeft | Model::Orthogonal => need(self.u0, "u0", "chosen").map(|_| ()),
            Model::MultiNeuron if self.u0s.is_empty() => Err(invalid("--u0s is required for the multi-neuron model")),
            Model::RelaxedH2 => {
                need(self.alpha0, "alpha0", "relaxed-h2")?;
                need(self.beta0, "beta0", "relaxed-h2")?;
                need(self.z0, "z0", "relaxed-h2").map(|_| ())
            }
            Model::Batch => {
                if self.dataset.is_none() || self.w0.is_empty() {
                    return Err(invalid("--dataset and --w0 are required for the batch model"));
                }
                need(self.z0, "z0", "batch").map(|_| ())
            }
            _ => Ok(()),
        }
    }

    pub fn run(&self) -> Result<Output> {
        match (self.model, self.loss) {
            (Model::Single, LossArg::Bce) => self.single_bce(),
            (Model::Single, LossArg::Hinge) => self.single_hinge(),
            (Model::TopLeft, _) => self.top_left(),
            (Model::MultiNeuron, _) => self.multi_neuron(),
            (Model::Orthogonal, _) => self.orthogonal(),
            (Model::RelaxedH2, _) => self.relaxed_h2(),
            (Model::Batch, _) => self.batch(),
        }
    }

    /// `(y0, z0)` of the class-1 problem: class 2 is the mirror image in `z`.
    fn mirrored_start(&self) -> Result<(f64, f64)> {
        let s = self.label().sign();
        match (self.u0, self.y0, self.z0) {
            (Some(u0), None, None) => {
                let m = s * u0;
                if m <= 0.0 {
                    return Err(invalid(format!(
                        "--u0 must be {} for class {}",
                        if s > 0.0 { "positive" } else { "negative" },
                        self.class
                    )));
                }
                Ok(((m * self.norm).sqrt(), (m / self.norm).sqrt()))
            }
            (None, Some(y0), Some(z0)) => Ok((y0, s * z0)),
            _ => Err(invalid("give either --u0 or both --y0 and --z0")),
        }
    }

    fn single_bce(&self) -> Result<Output> {
        let label = self.label();
        let s = label.sign();
        let (y0, z0) = self.mirrored_start()?;
        let state0 = ScalarState::new(y0, z0, self.norm)?;
        let rate = self.norm * self.p;

        if state0.branch == Branch::Degenerate {
            let margin0 = self.u0.map_or(state0.logit(), |u| s * u);
            let t_end = match self.until_confidence {
                Some(c) => {
                    let target = sigmoid_inverse(c)?;
                    if target < margin0 {
                        return Err(invalid(format!("--until-confidence {c} is already met at the start")));
                    }
                    time_to_logit(margin0, target, rate)?
                }
                None => self.t_end,
            };
            let times = sample_times(t_end, self.step);
            let curve = degenerate_curve(label, s * margin0, rate, &times)?;
            let mut cols = vec!["t", "u", "confidence"];
            if self.bound {
                cols.push("bound");
            }
            let mut table = Table::new(cols);
            for pt in &curve {
                let mut row = vec![pt.t, pt.u, pt.p_correct];
                if self.bound {
                    row.push(convergence_bound(margin0, rate, pt.t)?);
                }
                table.push(num_row(&row));
            }
            return Ok(Output::plain(table));
        }

        let (h, k) = substeps(self.step, self.ode_step);
        let traj = hyperbolic_trajectory(&state0, self.norm, self.p, self.t_end, h, k)?;
        let mut table = Table::new(["t", "u", "confidence", "y", "z"]);
        for (t, st) in traj.rows() {
            let margin = st[1] * st[2];
            table.push(num_row(&[t, s * margin, sigmoid(margin), st[1], s * st[2]]));
        }
        // Independent end-point solve as a consistency figure.
        let end = evolve(&state0, self.norm, self.p, self.t_end)?;
        let last = traj.last_state();
        let gap = (end.logit() - last[1] * last[2]).abs();
        Ok(Output {
            table,
            note: Some(format!("end-point solve differs by {gap:.1e}")),
        })
    }

    fn single_hinge(&self) -> Result<Output> {
        let s = self.label().sign();
        let (y0, z0) = self.mirrored_start()?;
        let traj = hinge_trajectory(y0, z0, self.norm, self.p, self.t_end, self.step)?;
        let (ui, mi) = (traj.column_index("u").unwrap(), traj.column_index("margin").unwrap());
        let mut table = Table::new(["t", "u", "confidence", "margin"]);
        for (t, st) in traj.rows() {
            table.push(num_row(&[t, s * st[ui], sigmoid(st[ui]), st[mi]]));
        }
        let t_m = time_to_margin(y0, z0, self.norm, self.p)?;
        Ok(Output {
            table,
            note: Some(format!("margin reached at t = {t_m}")),
        })
    }

    fn top_left(&self) -> Result<Output> {
        let u0 = need(self.u0, "u0", "top-left")?;
        if u0 >= 0.0 {
            return Err(invalid(format!("--u0 must be negative for the top-left model, got {u0}")));
        }
        let rate = self.norm * self.p;
        let system = top_left_system(rate);
        let (h, k) = substeps(self.step, self.ode_step);
        let (traj, mut note) = if self.refine {
            let fine = richardson_refine(&system, &[u0], self.t_end, h)?;
            let d = fine.meta.discrepancy.unwrap_or(0.0);
            (fine.thinned(2 * k), format!("step-halving discrepancy {d:.1e}, "))
        } else {
            (integrate(&system, &[u0], self.t_end, h)?.thinned(k), String::new())
        };
        let end = solve_top_left(u0, rate, self.t_end)?;
        note.push_str(&format!("end-point solve differs by {:.1e}", (end - traj.last_state()[0]).abs()));
        let note = Some(note);
        let mut table = Table::new(["t", "u", "confidence"]);
        for (t, st) in traj.rows() {
            table.push(num_row(&[t, st[0], sigmoid(st[0])]));
        }
        Ok(Output { table, note })
    }

    fn multi_neuron(&self) -> Result<Output> {
        let (h, k) = substeps(self.step, self.ode_step);
        let traj = solve_multi_neuron(&self.u0s, self.norm * self.p, self.t_end, h)?.thinned(k);
        let sum = traj.column_index("sum").unwrap();
        let mut names = vec!["t".to_string(), "u".into(), "confidence".into()];
        names.extend((1..=self.u0s.len()).map(|i| format!("u{i}")));
        let mut table = Table::new(names);
        for (t, st) in traj.rows() {
            let mut row = vec![t, st[sum], sigmoid(st[sum])];
            row.extend_from_slice(&st[..sum]);
            table.push(num_row(&row));
        }
        Ok(Output::plain(table))
    }

    fn orthogonal(&self) -> Result<Output> {
        let u0 = need(self.u0, "u0", "orthogonal")?;
        let rate = 0.5 * orthogonal_class_rate(self.m, self.norm)? * self.p;
        let curve = degenerate_curve(ClassLabel::One, u0, rate, &sample_times(self.t_end, self.step))?;
        let mut table = Table::new(["t", "u", "confidence"]);
        for pt in curve {
            table.push(num_row(&[pt.t, pt.u, pt.p_correct]));
        }
        Ok(Output::plain(table))
    }

    fn relaxed_h2(&self) -> Result<Output> {
        let (h, k) = substeps(self.step, self.ode_step);
        let traj = solve_relaxed_h2(
            need(self.alpha0, "alpha0", "relaxed-h2")?,
            need(self.beta0, "beta0", "relaxed-h2")?,
            need(self.z0, "z0", "relaxed-h2")?,
            self.t_end,
            h,
        )?
        .thinned(k)
        .with_derived("confidence", |_, s| sigmoid(s[3]));
        let table = select(
            &traj,
            &[("alpha_z", "u"), ("confidence", "confidence"), ("alpha", "alpha"), ("beta", "beta"), ("z", "z")],
        )?;
        Ok(Output::plain(table))
    }

    fn batch(&self) -> Result<Output> {
        let path = self.dataset.as_ref().expect("validated");
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        let ds = SeparableDataset::read_json(BufReader::new(file))?;
        let points = ds.class1();
        let z0 = need(self.z0, "z0", "batch")?;
        let query = if self.query.is_empty() {
            (0..ds.dim()).map(|j| points.iter().map(|x| x[j]).sum()).collect()
        } else {
            self.query.clone()
        };
        let mut table = Table::new(["t", "u", "confidence"]);
        for t in sample_times(self.t_end, self.step) {
            let u = hinge_batch_classify(points, &self.w0, z0, t, &query)?;
            table.push(num_row(&[t, u, sigmoid(u)]));
        }
        Ok(Output::plain(table))
    }
}
