//! Initializations that separate the classes onto disjoint hidden neurons,
//! and the check that training keeps them separated.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::dataset::SeparableDataset;
use super::network::{NetworkParams, OutputWeights};
use crate::error::{Error, Result};

const MAX_INIT_ATTEMPTS: usize = 1000;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Every point of class `k` activates exactly the rows in cell `k`.
fn row_respects_cell(row: &[f64], dataset: &SeparableDataset, own: usize) -> bool {
    dataset.classes().iter().enumerate().all(|(k, class)| {
        class
            .iter()
            .all(|x| if k == own { dot(row, x) > 0.0 } else { dot(row, x) <= 0.0 })
    })
}

/// Random parameters under which each class activates only its own cell of
/// hidden neurons and the output weights carry the cell's sign. Neuron `i`
/// belongs to class `i mod C`.
///
/// In binary mode the output is a vector, positive on the first cell. With
/// `multiclass` it is a `C x h` matrix, positive on `(c, i)` for `i` in cell
/// `c` and non-positive elsewhere.
pub fn compliant_init(dataset: &SeparableDataset, hidden: usize, multiclass: bool, seed: u64) -> Result<NetworkParams> {
    let c = dataset.num_classes();
    if !multiclass && c != 2 {
        return Err(Error::InvalidInput("binary output needs a two-class dataset".into()));
    }
    if hidden < c.max(2) {
        return Err(Error::InvalidInput(format!("need at least {} hidden neurons", c.max(2))));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = dataset.dim();
    let partition: Vec<Vec<usize>> = (0..c).map(|k| (k..hidden).step_by(c).collect()).collect();
    let means: Vec<Vec<f64>> = dataset
        .classes()
        .iter()
        .map(|class| {
            let mut m: Vec<f64> = (0..d).map(|j| class.iter().map(|x| x[j]).sum()).collect();
            let n = dot(&m, &m).sqrt();
            m.iter_mut().for_each(|v| *v /= n);
            m
        })
        .collect();

    let mut w = Vec::with_capacity(hidden);
    for i in 0..hidden {
        let own = i % c;
        let row = (0..MAX_INIT_ATTEMPTS)
            .map(|_| {
                let scale: f64 = rng.random_range(0.2..1.0);
                means[own]
                    .iter()
                    .map(|m| scale * (m + 0.05 * rng.sample::<f64, _>(StandardNormal)))
                    .collect::<Vec<f64>>()
            })
            .find(|row| row_respects_cell(row, dataset, own))
            .ok_or_else(|| Error::Dataset("could not draw a row active on its class only".into()))?;
        w.push(row);
    }
    let z = if multiclass {
        OutputWeights::MultiClass(
            (0..c)
                .map(|k| {
                    (0..hidden)
                        .map(|i| {
                            if i % c == k {
                                rng.random_range(0.2..1.0)
                            } else {
                                -rng.random_range(0.0..0.5)
                            }
                        })
                        .collect()
                })
                .collect(),
        )
    } else {
        OutputWeights::Binary(
            (0..hidden)
                .map(|i| {
                    let m: f64 = rng.random_range(0.2..1.0);
                    if i % 2 == 0 {
                        m
                    } else {
                        -m
                    }
                })
                .collect(),
        )
    };
    NetworkParams::new(w, z, partition)
}

/// Negates hidden row `row`, so that it fires on the other class instead.
pub fn make_cross_active(params: &mut NetworkParams, row: usize) {
    params.w[row].iter_mut().for_each(|v| *v = -*v);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ModeReport {
    pub checks: u64,
    /// (point, step) pairs whose active set differs from the class's cell.
    pub activation_violations: u64,
    /// (weight, step) pairs whose sign differs from the cell's sign.
    pub sign_violations: u64,
    pub first_violation: Option<u64>,
}

impl ModeReport {
    pub fn violations(&self) -> u64 {
        self.activation_violations + self.sign_violations
    }

    pub fn merge(&mut self, other: &ModeReport) {
        self.checks += other.checks;
        self.activation_violations += other.activation_violations;
        self.sign_violations += other.sign_violations;
        self.first_violation = match (self.first_violation, other.first_violation) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
    }
}

/// Accumulates a [`ModeReport`] over successive parameter snapshots.
#[derive(Debug)]
pub struct ModeMonitor<'a> {
    dataset: &'a SeparableDataset,
    report: ModeReport,
}

impl<'a> ModeMonitor<'a> {
    pub fn new(dataset: &'a SeparableDataset) -> Self {
        Self {
            dataset,
            report: ModeReport::default(),
        }
    }

    pub fn observe(&mut self, step: u64, params: &NetworkParams) {
        let cell_of = |i: usize| params.partition.iter().position(|cell| cell.contains(&i)).unwrap();
        let mut bad_act = 0;
        for (k, class) in self.dataset.classes().iter().enumerate() {
            for x in class {
                let ok = params
                    .preactivations(x)
                    .iter()
                    .enumerate()
                    .all(|(i, &p)| if cell_of(i) == k { p > 0.0 } else { p <= 0.0 });
                if !ok {
                    bad_act += 1;
                }
            }
        }
        let bad_sign = match &params.z {
            OutputWeights::Binary(z) => z
                .iter()
                .enumerate()
                .filter(|&(i, &v)| if cell_of(i) == 0 { v <= 0.0 } else { v >= 0.0 })
                .count(),
            OutputWeights::MultiClass(z) => z
                .iter()
                .enumerate()
                .flat_map(|(c, row)| row.iter().enumerate().map(move |(i, &v)| (c, i, v)))
                .filter(|&(c, i, v)| if cell_of(i) == c { v <= 0.0 } else { v > 0.0 })
                .count(),
        } as u64;
        self.report.checks += 1;
        self.report.activation_violations += bad_act;
        self.report.sign_violations += bad_sign;
        if bad_act + bad_sign > 0 && self.report.first_violation.is_none() {
            self.report.first_violation = Some(step);
        }
    }

    pub fn report(&self) -> ModeReport {
        self.report
    }
}

/// Checks each snapshot of `history` (indexed by step) against the
/// partition stored in the parameters.
pub fn check_mode_independence(history: &[NetworkParams], dataset: &SeparableDataset) -> ModeReport {
    let mut monitor = ModeMonitor::new(dataset);
    for (step, p) in history.iter().enumerate() {
        monitor.observe(step as u64, p);
    }
    monitor.report()
}
