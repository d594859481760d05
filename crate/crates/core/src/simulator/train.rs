//! Seeded SGD training loop with logit history.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dataset::SeparableDataset;
use super::network::{sgd_step, Loss, NetworkParams, OutputWeights};
use crate::error::{ensure, Error, Result};
use crate::table::Table;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sampling {
    /// Uniform over all points.
    Uniform,
    /// The first class with probability `p`, then a uniform point in it.
    PerClassRate(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Binary,
    MultiClass(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub steps: u64,
    pub seed: u64,
    pub sampling: Sampling,
    pub loss: Loss,
    pub mode: Mode,
    /// Logits are recorded at step 0 and every `record_every` steps.
    pub record_every: u64,
}

impl TrainConfig {
    pub fn new(learning_rate: f64, steps: u64, seed: u64) -> Self {
        Self {
            learning_rate,
            steps,
            seed,
            sampling: Sampling::Uniform,
            loss: Loss::Bce,
            mode: Mode::Binary,
            record_every: 1,
        }
    }

    pub fn validate(&self, params: &NetworkParams, dataset: &SeparableDataset) -> Result<()> {
        ensure(
            self.learning_rate > 0.0 && self.learning_rate.is_finite(),
            "learning_rate",
            self.learning_rate,
            "learning_rate > 0",
        )?;
        ensure(self.record_every >= 1, "record_every", self.record_every as f64, "record_every >= 1")?;
        let classes = match (self.mode, &params.z) {
            (Mode::Binary, OutputWeights::Binary(_)) => 2,
            (Mode::MultiClass(c), OutputWeights::MultiClass(z)) if z.len() == c => c,
            _ => return Err(Error::InvalidInput("training mode does not match the output layer".into())),
        };
        if dataset.num_classes() != classes {
            return Err(Error::InvalidInput(format!(
                "dataset has {} classes, network has {classes}",
                dataset.num_classes()
            )));
        }
        if dataset.dim() != params.dim() {
            return Err(Error::InvalidInput(format!(
                "dataset dimension {} does not match network input {}",
                dataset.dim(),
                params.dim()
            )));
        }
        if let Sampling::PerClassRate(p) = self.sampling {
            ensure(p > 0.0 && p < 1.0, "p", p, "0 < p < 1")?;
            if classes != 2 {
                return Err(Error::InvalidInput("per-class rate sampling needs two classes".into()));
            }
        }
        if self.loss == Loss::Hinge && classes != 2 {
            return Err(Error::InvalidInput("hinge loss needs a binary output".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistoryRecord {
    pub step: u64,
    /// Updates made so far with points of each class.
    pub updates: Vec<u64>,
    /// Logit of each class's first point.
    pub logits: Vec<f64>,
    pub confidences: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LogitHistory {
    pub records: Vec<HistoryRecord>,
}

impl LogitHistory {
    /// Long format, columns `step, class, logit, confidence`; classes are
    /// numbered from 1.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["step", "class", "logit", "confidence"]);
        for r in &self.records {
            for (k, (u, p)) in r.logits.iter().zip(&r.confidences).enumerate() {
                t.push(vec![(r.step as i64).into(), (k + 1).into(), (*u).into(), (*p).into()]);
            }
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainResult {
    pub params: NetworkParams,
    pub history: LogitHistory,
}

fn record(params: &NetworkParams, dataset: &SeparableDataset, step: u64, updates: &[u64]) -> HistoryRecord {
    let reps = (0..dataset.num_classes()).map(|k| (k, &dataset.class(k)[0]));
    let (logits, confidences) = reps
        .map(|(k, x)| (params.logit(x, k), params.confidence(x, k)))
        .unzip();
    HistoryRecord {
        step,
        updates: updates.to_vec(),
        logits,
        confidences,
    }
}

/// Draws the class and point index of the next sample.
pub(crate) fn draw(rng: &mut ChaCha8Rng, dataset: &SeparableDataset, sampling: Sampling) -> (usize, usize) {
    match sampling {
        Sampling::Uniform => {
            let mut i = rng.random_range(0..dataset.len());
            for (k, class) in dataset.classes().iter().enumerate() {
                if i < class.len() {
                    return (k, i);
                }
                i -= class.len();
            }
            unreachable!()
        }
        Sampling::PerClassRate(p) => {
            let k = if rng.random::<f64>() < p { 0 } else { 1 };
            (k, rng.random_range(0..dataset.class(k).len()))
        }
    }
}

pub fn train(params0: &NetworkParams, dataset: &SeparableDataset, config: &TrainConfig) -> Result<TrainResult> {
    train_with_observer(params0, dataset, config, |_, _| {})
}

/// [`train`], calling `observer(step, params)` on the initial parameters
/// and after every update.
pub fn train_with_observer(
    params0: &NetworkParams,
    dataset: &SeparableDataset,
    config: &TrainConfig,
    mut observer: impl FnMut(u64, &NetworkParams),
) -> Result<TrainResult> {
    params0.validate()?;
    config.validate(params0, dataset)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = params0.clone();
    let mut updates = vec![0u64; dataset.num_classes()];
    let mut history = LogitHistory::default();
    history.records.push(record(&params, dataset, 0, &updates));
    observer(0, &params);
    for step in 1..=config.steps {
        let (k, i) = draw(&mut rng, dataset, config.sampling);
        sgd_step(&mut params, &dataset.class(k)[i], k, config.learning_rate, config.loss)?;
        updates[k] += 1;
        observer(step, &params);
        if step % config.record_every == 0 || step == config.steps {
            history.records.push(record(&params, dataset, step, &updates));
        }
    }
    if params.w.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { t: config.steps as f64 });
    }
    Ok(TrainResult { params, history })
}
