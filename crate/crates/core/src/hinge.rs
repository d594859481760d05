//! Single-mode dynamics under the hinge loss.
//!
//! Before the margin is met the flow is linear, `y' = |x|^2 z p`,
//! `z' = y p`, with the same conserved hyperbola as cross-entropy. Once
//! `u = y z` reaches 1 every gradient vanishes and the weights freeze.

use crate::bce::{from_angle, initial_angle, time_to_logit, Branch, ScalarState};
use crate::error::{ensure, Error, Result};
use crate::ode::{Trajectory, TrajectoryMeta};
use crate::phase::{classify, PhaseKind};
use crate::specfn::confidence_logit;
use crate::table::Table;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HingeState {
    pub y: f64,
    pub z: f64,
    pub c: f64,
    pub branch: Branch,
    pub margin_reached: bool,
}

impl HingeState {
    pub fn logit(&self) -> f64 {
        self.y * self.z
    }
}

fn check(state0: &ScalarState, norm: f64, rate_scale: f64) -> Result<()> {
    ensure(rate_scale > 0.0 && rate_scale <= 1.0, "rate_scale", rate_scale, "0 < p <= 1")?;
    let region = classify(state0.y, state0.z, norm)?;
    if region.kind != PhaseKind::Solves {
        return Err(Error::Region {
            found: region.kind,
            required: PhaseKind::Solves,
        });
    }
    Ok(())
}

fn margin_time(state0: &ScalarState, norm: f64, rate_scale: f64) -> f64 {
    let u0 = state0.logit();
    if u0 >= 1.0 {
        return 0.0;
    }
    let speed = 2.0 * rate_scale * norm;
    match state0.branch {
        Branch::Degenerate => (1.0 / u0).ln() / speed,
        _ => ((2.0 * norm / state0.c).asinh() - initial_angle(state0, norm)) / speed,
    }
}

/// Time at which the logit first reaches 1; zero if it starts there.
pub fn time_to_margin(y0: f64, z0: f64, norm: f64, rate_scale: f64) -> Result<f64> {
    let s = ScalarState::new(y0, z0, norm)?;
    check(&s, norm, rate_scale)?;
    Ok(margin_time(&s, norm, rate_scale))
}

/// Weights at time `t`. After the margin time the state returned is the one
/// at the margin, so it is constant bit for bit.
pub fn hinge_state(y0: f64, z0: f64, norm: f64, rate_scale: f64, t: f64) -> Result<HingeState> {
    let s = ScalarState::new(y0, z0, norm)?;
    check(&s, norm, rate_scale)?;
    ensure(t >= 0.0 && t.is_finite(), "t", t, "t >= 0")?;
    let t_m = margin_time(&s, norm, rate_scale);
    let tau = t.min(t_m);
    let (y, z) = match s.branch {
        _ if tau == 0.0 => (y0, z0),
        Branch::Degenerate => {
            let g = (rate_scale * norm * tau).exp();
            (y0 * g, z0 * g)
        }
        _ => from_angle(&s, norm, initial_angle(&s, norm) + 2.0 * rate_scale * norm * tau),
    };
    Ok(HingeState {
        y,
        z,
        c: s.c,
        branch: s.branch,
        margin_reached: t >= t_m,
    })
}

/// Logit `min(1, u(t))` of the clipped hinge flow.
pub fn solve_hinge(y0: f64, z0: f64, norm: f64, rate_scale: f64, t: f64) -> Result<f64> {
    let s = ScalarState::new(y0, z0, norm)?;
    check(&s, norm, rate_scale)?;
    ensure(t >= 0.0 && t.is_finite(), "t", t, "t >= 0")?;
    let t_m = margin_time(&s, norm, rate_scale);
    if t >= t_m {
        return Ok(1.0);
    }
    let arg = 2.0 * rate_scale * norm * t;
    let u = match s.branch {
        Branch::Degenerate => s.logit() * arg.exp(),
        _ => s.c / (2.0 * norm) * (initial_angle(&s, norm) + arg).sinh(),
    };
    Ok(u.min(1.0))
}

/// Samples `y, z, u` and the margin flag every `step` up to `t_end`.
pub fn hinge_trajectory(y0: f64, z0: f64, norm: f64, rate_scale: f64, t_end: f64, step: f64) -> Result<Trajectory> {
    ensure(step > 0.0 && step.is_finite(), "step", step, "step > 0")?;
    ensure(t_end >= 0.0 && t_end.is_finite(), "t_end", t_end, "t_end >= 0")?;
    let mut traj = Trajectory::new(
        ["y", "z", "u", "margin"].iter().map(|s| s.to_string()).collect(),
        TrajectoryMeta {
            solver: "closed form".into(),
            step,
            label: "hinge".into(),
            discrepancy: None,
        },
    );
    let n = (t_end / step * (1.0 - 1e-12)).ceil() as usize;
    for i in 0..=n {
        let t = if i == n { t_end } else { i as f64 * step };
        let h = hinge_state(y0, z0, norm, rate_scale, t)?;
        let u = solve_hinge(y0, z0, norm, rate_scale, t)?;
        traj.push(t, &[h.y, h.z, u, if h.margin_reached { 1.0 } else { 0.0 }]);
    }
    Ok(traj)
}

/// Times for cross-entropy and hinge training to reach confidence `1 - delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossTiming {
    pub delta: f64,
    pub t_bce: f64,
    pub t_hinge: f64,
}

/// For each `delta`, the time both losses need to bring a degenerate logit
/// from `u0` to `log((1 - delta) / delta)`.
///
/// The hinge time uses the unclipped exponential `u0 e^(2 |x| p t)`. With
/// `clipped`, targets above the margin are unreachable and report infinity.
pub fn compare_losses(u0: f64, norm: f64, p: f64, deltas: &[f64], clipped: bool) -> Result<Vec<LossTiming>> {
    ensure(u0 > 0.0 && u0.is_finite(), "u0", u0, "u0 > 0")?;
    ensure(norm > 0.0, "norm", norm, "norm > 0")?;
    ensure(p > 0.0 && p <= 1.0, "p", p, "0 < p <= 1")?;
    let rate = norm * p;
    deltas
        .iter()
        .map(|&delta| {
            ensure(delta > 0.0 && delta < 0.5, "delta", delta, "0 < delta < 0.5")?;
            let target = confidence_logit(delta)?;
            ensure(target >= u0, "delta", delta, "a target logit of at least u0")?;
            let t_bce = time_to_logit(u0, target, rate)?;
            let t_hinge = if clipped && target > 1.0 {
                f64::INFINITY
            } else {
                (target / u0).ln() / (2.0 * rate)
            };
            Ok(LossTiming { delta, t_bce, t_hinge })
        })
        .collect()
}

pub fn timings_to_table(rows: &[LossTiming]) -> Table {
    let mut t = Table::new(["delta", "t_bce", "t_hinge"]);
    for r in rows {
        t.push(vec![r.delta.into(), r.t_bce.into(), r.t_hinge.into()]);
    }
    t
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Geometry of one class under full-batch hinge training.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchClassSummary {
    /// `X`, the sum of the class's points.
    pub sum_vector: Vec<f64>,
    pub sum_vector_norm: f64,
    /// `X.x_i / |X|^2` per point.
    pub projector_coeffs: Vec<f64>,
    /// `w0_perp . x_i` per point.
    pub residual_inner: Vec<f64>,
    /// Component of `w0` orthogonal to `X`; it never changes.
    pub w0_perp: Vec<f64>,
}

impl BatchClassSummary {
    pub fn new(class_points: &[Vec<f64>], w0: &[f64]) -> Result<Self> {
        if class_points.is_empty() {
            return Err(Error::InvalidInput("class has no points".into()));
        }
        let d = w0.len();
        if class_points.iter().any(|x| x.len() != d) {
            return Err(Error::InvalidInput(format!("every point must have dimension {d}")));
        }
        let mut sum = vec![0.0; d];
        for x in class_points {
            for (s, v) in sum.iter_mut().zip(x) {
                *s += v;
            }
        }
        let norm_sq = dot(&sum, &sum);
        if !(norm_sq > 0.0) {
            return Err(Error::InvalidInput("class points sum to the zero vector".into()));
        }
        let k = dot(w0, &sum) / norm_sq;
        let w0_perp: Vec<f64> = w0.iter().zip(&sum).map(|(w, s)| w - k * s).collect();
        Ok(Self {
            projector_coeffs: class_points.iter().map(|x| dot(&sum, x) / norm_sq).collect(),
            residual_inner: class_points.iter().map(|x| dot(&w0_perp, x)).collect(),
            sum_vector_norm: norm_sq.sqrt(),
            sum_vector: sum,
            w0_perp,
        })
    }
}

/// Network output on `query` after full-batch hinge training of one class
/// for time `t`, `u_t (X.q) / |X|^2 + z_t (w0_perp . q)`. The class
/// dynamics reduce to a single mode with input `X`; they stop when its
/// logit reaches 1.
pub fn hinge_batch_classify(class_points: &[Vec<f64>], w0: &[f64], z0: f64, t: f64, query: &[f64]) -> Result<f64> {
    let summary = BatchClassSummary::new(class_points, w0)?;
    if query.len() != w0.len() {
        return Err(Error::InvalidInput(format!("query must have dimension {}", w0.len())));
    }
    let norm = summary.sum_vector_norm;
    let y0 = dot(w0, &summary.sum_vector);
    let state = hinge_state(y0, z0, norm, 1.0, t)?;
    let proj = dot(&summary.sum_vector, query) / (norm * norm);
    Ok(state.logit() * proj + state.z * dot(&summary.w0_perp, query))
}
