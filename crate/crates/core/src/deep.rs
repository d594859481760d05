//! Logit ODE of an aligned deep network.
//!
//! With `N` weight layers whose scalar weights all start equal to `z0`, the
//! layers stay equal and the logit `u = |x| z^N` obeys
//!
//! ```text
//! u' = N |x|^(2/N) u^(2 - 2/N) / (1 + e^u)
//! ```
//!
//! At `N = 2` this is the single-hidden-layer equation.

use crate::error::{ensure, Result};
use crate::ode::{self, OdeSystem, Trajectory};
use crate::specfn::sigmoid;

/// Below this the power term is treated as zero.
const TINY_LOGIT: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeepConfig {
    pub depth_n: usize,
    pub norm: f64,
    pub u0: f64,
}

impl DeepConfig {
    pub fn new(depth_n: usize, norm: f64, u0: f64) -> Result<Self> {
        let c = Self { depth_n, norm, u0 };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.depth_n >= 2, "depth_n", self.depth_n as f64, "N >= 2")?;
        ensure(self.norm > 0.0 && self.norm.is_finite(), "norm", self.norm, "norm > 0")?;
        ensure(self.u0 > 0.0 && self.u0.is_finite(), "u0", self.u0, "u0 > 0")
    }
}

/// `|x| z0^N`.
pub fn aligned_initial_logit(z0: f64, norm: f64, depth_n: usize) -> Result<f64> {
    ensure(z0 > 0.0 && z0.is_finite(), "z0", z0, "z0 > 0")?;
    ensure(norm > 0.0, "norm", norm, "norm > 0")?;
    ensure(depth_n >= 1, "depth_n", depth_n as f64, "N >= 1")?;
    Ok(norm * z0.powi(depth_n as i32))
}

pub fn deep_logit_system(config: &DeepConfig) -> OdeSystem<impl Fn(f64, &[f64], &mut [f64])> {
    let n = config.depth_n as f64;
    let gain = n * config.norm.powf(2.0 / n);
    let power = 2.0 - 2.0 / n;
    OdeSystem::new(1, format!("deep logit, N = {}", config.depth_n), move |_t, x: &[f64], d: &mut [f64]| {
        let u = x[0];
        d[0] = if u < TINY_LOGIT {
            0.0
        } else {
            gain * (power * u.ln()).exp() * sigmoid(-u)
        };
    })
}

/// Logit trajectory with a single column `u`.
pub fn solve_deep_logit(config: &DeepConfig, t_end: f64, step: f64) -> Result<Trajectory> {
    config.validate()?;
    let raw = ode::integrate(&deep_logit_system(config), &[config.u0], t_end, step)?;
    Ok(ode::relabel(raw, &["u"]))
}

/// First time the logit reaches `level`, searched up to `t_max`.
pub fn time_to_deep_logit(config: &DeepConfig, level: f64, t_max: f64, step: f64) -> Result<f64> {
    config.validate()?;
    ensure(level.is_finite(), "level", level, "a finite level")?;
    if level <= config.u0 {
        return Ok(0.0);
    }
    let (t, _) = ode::integrate_until(&deep_logit_system(config), &[config.u0], step, t_max, 1e-10, |s| s[0] - level)?;
    Ok(t)
}
