//! Ready-made training scenarios.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::dataset::{make_dataset, make_multiclass_dataset, SeparableDataset};
use super::modes::{compliant_init, ModeMonitor, ModeReport};
use super::network::{sgd_step, Loss, NetworkParams, OutputWeights};
use super::train::{train_with_observer, Mode, Sampling, TrainConfig};
use crate::error::{ensure, Error, Result};

/// One point per class, `x = (norm, 0)` and `-x`, and two neurons on the
/// degenerate hyperbola `y0 = norm z0`. The class-1 logit starts at
/// `norm z0^2` and the class-2 logit at its negative.
pub fn degenerate_setup(norm: f64, z0: f64) -> Result<(NetworkParams, SeparableDataset)> {
    ensure(norm > 0.0 && norm.is_finite(), "norm", norm, "norm > 0")?;
    ensure(z0 > 0.0 && z0.is_finite(), "z0", z0, "z0 > 0")?;
    let dataset = SeparableDataset::new(vec![vec![vec![norm, 0.0]], vec![vec![-norm, 0.0]]])?;
    let params = NetworkParams::new(
        vec![vec![z0, 0.0], vec![-z0, 0.0]],
        OutputWeights::Binary(vec![z0, -z0]),
        vec![vec![0], vec![1]],
    )?;
    Ok((params, dataset))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarvationInit {
    pub alpha0: f64,
    pub beta0: f64,
    pub z0: f64,
}

impl Default for StarvationInit {
    fn default() -> Self {
        Self {
            alpha0: 0.1,
            beta0: 0.005,
            z0: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarvationOutcome {
    pub steps: u64,
    /// Confidence on `(e1, 0)`.
    pub conf_x1: f64,
    /// Confidence on `(e1, e2)`.
    pub conf_both: f64,
    /// Confidence on the probe `(0, e2)`.
    pub conf_probe: f64,
    pub alpha: f64,
    pub beta: f64,
    pub z: f64,
}

/// [`starvation_experiment_from`] with the default initialization.
pub fn starvation_experiment(lambda: f64, delta: f64, seed: u64, lr: f64, max_steps: u64) -> Result<StarvationOutcome> {
    starvation_experiment_from(StarvationInit::default(), lambda, delta, seed, lr, max_steps)
}

/// Trains on `e1 + e2` (probability `lambda`) or `e1` for class 1 and `-e1`
/// for class 2, each class drawn with probability 1/2, until every class-1
/// pattern has confidence `1 - delta`. Reports the confidence on `e2` alone.
pub fn starvation_experiment_from(
    init: StarvationInit,
    lambda: f64,
    delta: f64,
    seed: u64,
    lr: f64,
    max_steps: u64,
) -> Result<StarvationOutcome> {
    ensure(lambda > 0.0 && lambda <= 1.0, "lambda", lambda, "0 < lambda <= 1")?;
    ensure(delta > 0.0 && delta < 0.5, "delta", delta, "0 < delta < 0.5")?;
    ensure(lr > 0.0 && lr.is_finite(), "lr", lr, "lr > 0")?;
    ensure(init.alpha0 > 0.0, "alpha0", init.alpha0, "alpha0 > 0")?;
    ensure(init.alpha0 + init.beta0 > 0.0, "beta0", init.beta0, "alpha0 + beta0 > 0")?;
    ensure(init.z0 > 0.0, "z0", init.z0, "z0 > 0")?;
    let both = [1.0, 1.0];
    let alone = [1.0, 0.0];
    let negative = [-1.0, 0.0];
    let probe = [0.0, 1.0];
    let mut params = NetworkParams::new(
        vec![vec![init.alpha0, init.beta0], vec![-init.alpha0, 0.0]],
        OutputWeights::Binary(vec![init.z0, -init.z0]),
        vec![vec![0], vec![1]],
    )?;
    let target = 1.0 - delta;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for step in 1..=max_steps {
        if rng.random::<f64>() < 0.5 {
            let x = if rng.random::<f64>() < lambda { &both } else { &alone };
            sgd_step(&mut params, x, 0, lr, Loss::Bce)?;
            let c1 = params.confidence(&alone, 0);
            let c12 = params.confidence(&both, 0);
            if c1.min(c12) >= target {
                let OutputWeights::Binary(z) = &params.z else { unreachable!() };
                return Ok(StarvationOutcome {
                    steps: step,
                    conf_x1: c1,
                    conf_both: c12,
                    conf_probe: params.confidence(&probe, 0),
                    alpha: params.w[0][0],
                    beta: params.w[0][1],
                    z: z[0],
                });
            }
        } else {
            sgd_step(&mut params, &negative, 1, lr, Loss::Bce)?;
        }
    }
    Err(Error::Horizon { t_max: max_steps as f64 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FleetSpec {
    pub runs: usize,
    /// Hidden sizes, cycled across runs.
    pub hidden: Vec<usize>,
    /// `None` for binary runs, `Some(C)` for softmax runs over `C` classes.
    pub classes: Option<usize>,
    pub dim: usize,
    pub n_per_class: usize,
    pub steps: u64,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for FleetSpec {
    fn default() -> Self {
        Self {
            runs: 1000,
            hidden: vec![2, 4, 8],
            classes: None,
            dim: 8,
            n_per_class: 10,
            steps: 200,
            learning_rate: 0.1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FleetSummary {
    pub runs: usize,
    pub failed_runs: usize,
    pub report: ModeReport,
}

/// Trains `runs` independent networks from random compliant
/// initializations on fresh datasets and checks mode independence after
/// every step. Run `i` uses seed `spec.seed + i`.
pub fn mode_fleet(spec: &FleetSpec) -> Result<FleetSummary> {
    ensure(spec.runs >= 1, "runs", spec.runs as f64, "runs >= 1")?;
    if spec.hidden.is_empty() {
        return Err(Error::InvalidInput("need at least one hidden size".into()));
    }
    let reports: Vec<ModeReport> = (0..spec.runs)
        .into_par_iter()
        .map(|i| {
            let seed = spec.seed.wrapping_add(i as u64);
            let hidden = spec.hidden[i % spec.hidden.len()];
            let (dataset, mode) = match spec.classes {
                None => (make_dataset(seed, spec.dim, spec.n_per_class, 30.0, (0.5, 1.5))?, Mode::Binary),
                Some(c) => (
                    make_multiclass_dataset(seed, spec.dim, c, spec.n_per_class, 10.0, (0.5, 1.5))?,
                    Mode::MultiClass(c),
                ),
            };
            let params = compliant_init(&dataset, hidden, spec.classes.is_some(), seed)?;
            let config = TrainConfig {
                mode,
                sampling: Sampling::Uniform,
                record_every: spec.steps.max(1),
                ..TrainConfig::new(spec.learning_rate, spec.steps, seed)
            };
            let mut monitor = ModeMonitor::new(&dataset);
            train_with_observer(&params, &dataset, &config, |s, p| monitor.observe(s, p))?;
            Ok(monitor.report())
        })
        .collect::<Result<_>>()?;
    let mut total = ModeReport::default();
    let mut failed = 0;
    for r in &reports {
        if r.violations() > 0 {
            failed += 1;
        }
        total.merge(r);
    }
    Ok(FleetSummary {
        runs: spec.runs,
        failed_runs: failed,
        report: total,
    })
}
