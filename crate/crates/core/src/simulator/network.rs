//! One-hidden-layer ReLU network and its single-sample SGD update.

use crate::error::{Error, Result};
use crate::specfn::sigmoid;

/// Output layer: a vector for a binary sigmoid output, a `C x h` matrix for
/// a softmax over `C` classes.
#[derive(Debug, Clone, PartialEq)]
pub enum OutputWeights {
    Binary(Vec<f64>),
    MultiClass(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Loss {
    Bce,
    Hinge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    /// `h` rows of length `d`.
    pub w: Vec<Vec<f64>>,
    pub z: OutputWeights,
    /// Hidden indices assigned to each class; disjoint and covering `0..h`.
    pub partition: Vec<Vec<usize>>,
}

impl NetworkParams {
    pub fn new(w: Vec<Vec<f64>>, z: OutputWeights, partition: Vec<Vec<usize>>) -> Result<Self> {
        let p = Self { w, z, partition };
        p.validate()?;
        Ok(p)
    }

    pub fn hidden(&self) -> usize {
        self.w.len()
    }

    pub fn dim(&self) -> usize {
        self.w.first().map_or(0, Vec::len)
    }

    pub fn classes(&self) -> usize {
        match &self.z {
            OutputWeights::Binary(_) => 2,
            OutputWeights::MultiClass(z) => z.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.hidden();
        if h < 2 {
            return Err(Error::InvalidInput(format!("need at least 2 hidden neurons, got {h}")));
        }
        let d = self.dim();
        if d == 0 || self.w.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidInput("hidden rows must share a non-zero dimension".into()));
        }
        match &self.z {
            OutputWeights::Binary(z) if z.len() != h => {
                return Err(Error::InvalidInput(format!("z has length {}, expected {h}", z.len())));
            }
            OutputWeights::MultiClass(z) if z.len() < 2 || z.iter().any(|r| r.len() != h) => {
                return Err(Error::InvalidInput(format!("Z must be C x {h} with C >= 2")));
            }
            _ => {}
        }
        if self.partition.len() != self.classes() {
            return Err(Error::InvalidInput(format!(
                "partition has {} cells for {} classes",
                self.partition.len(),
                self.classes()
            )));
        }
        let mut seen = vec![false; h];
        for &i in self.partition.iter().flatten() {
            if i >= h || seen[i] {
                return Err(Error::InvalidInput(format!("partition index {i} is out of range or repeated")));
            }
            seen[i] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidInput("partition does not cover every hidden neuron".into()));
        }
        let finite = self.w.iter().flatten().all(|v| v.is_finite())
            && match &self.z {
                OutputWeights::Binary(z) => z.iter().all(|v| v.is_finite()),
                OutputWeights::MultiClass(z) => z.iter().flatten().all(|v| v.is_finite()),
            };
        if !finite {
            return Err(Error::InvalidInput("weights must be finite".into()));
        }
        Ok(())
    }

    /// `W x`.
    pub fn preactivations(&self, x: &[f64]) -> Vec<f64> {
        self.w.iter().map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    /// Pre-softmax outputs: one value in binary mode, `C` otherwise.
    pub fn outputs(&self, x: &[f64]) -> Vec<f64> {
        let hidden: Vec<f64> = self.preactivations(x).into_iter().map(|v| v.max(0.0)).collect();
        match &self.z {
            OutputWeights::Binary(z) => vec![dot(z, &hidden)],
            OutputWeights::MultiClass(z) => z.iter().map(|r| dot(r, &hidden)).collect(),
        }
    }

    /// Logit of `x` for `class` (0-based): the signed output in binary mode,
    /// the class's own output in multi-class mode.
    pub fn logit(&self, x: &[f64], class: usize) -> f64 {
        let out = self.outputs(x);
        match &self.z {
            OutputWeights::Binary(_) => out[0],
            OutputWeights::MultiClass(_) => out[class],
        }
    }

    /// Probability assigned to the correct class.
    pub fn confidence(&self, x: &[f64], class: usize) -> f64 {
        let out = self.outputs(x);
        match &self.z {
            OutputWeights::Binary(_) => sigmoid(if class == 0 { out[0] } else { -out[0] }),
            OutputWeights::MultiClass(_) => softmax(&out)[class],
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn softmax(v: &[f64]) -> Vec<f64> {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = v.iter().map(|x| (x - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// One SGD step on `(x, class)`, with `class` 0-based (0 is the positive
/// class in binary mode). Gradients are backpropagated through the ReLU
/// gate, so only rows active on `x` move.
///
/// Hinge loss is only defined for the binary output; its subgradient is the
/// label sign until the margin `s F(x) >= 1` is met, and zero after.
pub fn sgd_step(params: &mut NetworkParams, x: &[f64], class: usize, learning_rate: f64, loss: Loss) -> Result<()> {
    if x.len() != params.dim() {
        return Err(Error::InvalidInput(format!(
            "sample has dimension {}, network expects {}",
            x.len(),
            params.dim()
        )));
    }
    if class >= params.classes() {
        return Err(Error::InvalidInput(format!("class index {class} out of range")));
    }
    let pre = params.preactivations(x);
    let hidden: Vec<f64> = pre.iter().map(|v| v.max(0.0)).collect();
    // Per-row backpropagated signal, before the ReLU gate.
    let back: Vec<f64> = match &mut params.z {
        OutputWeights::Binary(z) => {
            let f = dot(z, &hidden);
            let delta = match loss {
                Loss::Bce => {
                    if class == 0 {
                        sigmoid(-f)
                    } else {
                        -sigmoid(f)
                    }
                }
                Loss::Hinge => {
                    let s = if class == 0 { 1.0 } else { -1.0 };
                    if s * f < 1.0 {
                        s
                    } else {
                        0.0
                    }
                }
            };
            if delta == 0.0 {
                return Ok(());
            }
            let back = z.iter().map(|zi| delta * zi).collect();
            for (zi, a) in z.iter_mut().zip(&hidden) {
                *zi += learning_rate * delta * a;
            }
            back
        }
        OutputWeights::MultiClass(z) => {
            if loss != Loss::Bce {
                return Err(Error::InvalidInput("hinge loss needs a binary output".into()));
            }
            let out: Vec<f64> = z.iter().map(|r| dot(r, &hidden)).collect();
            let mut delta = softmax(&out);
            for (c, d) in delta.iter_mut().enumerate() {
                *d = if c == class { 1.0 - *d } else { -*d };
            }
            let h = hidden.len();
            let back = (0..h).map(|i| (0..z.len()).map(|c| delta[c] * z[c][i]).sum()).collect();
            for (row, d) in z.iter_mut().zip(&delta) {
                for (zi, a) in row.iter_mut().zip(&hidden) {
                    *zi += learning_rate * d * a;
                }
            }
            back
        }
    };
    for ((row, p), b) in params.w.iter_mut().zip(&pre).zip(&back) {
        if *p > 0.0 {
            let g = learning_rate * b;
            for (wi, xi) in row.iter_mut().zip(x) {
                *wi += g * xi;
            }
        }
    }
    Ok(())
}
