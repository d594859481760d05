//! Gradient starvation between two features of the same class.
//!
//! Class-1 samples are `(x1, x2)` with probability `lambda` and `(x1, 0)`
//! otherwise. Writing `alpha = w.x1` and `beta = w.x2` for the active hidden
//! row and `z` for its output weight, training follows
//!
//! ```text
//! alpha' = lambda z s(a + b) + (1 - lambda) z s(a)
//! beta'  = lambda z s(a + b)
//! z'     = lambda (alpha + beta) s(a + b) + (1 - lambda) alpha s(a)
//! ```
//!
//! with `s(v) = sigma(-z v)`. Since `beta' <= lambda alpha'`, once `x1`
//! alone is classified with confidence `1 - delta` the probe `(0, x2)` is
//! at most `sigma(lambda log((1 - delta) / delta))`.

use rayon::prelude::*;

use crate::error::{ensure, Result};
use crate::ode::{self, OdeSystem, Trajectory};
use crate::specfn::{confidence_logit, sigmoid};
use crate::table::Table;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarvationConfig {
    pub lambda: f64,
    pub delta: f64,
    pub alpha0: f64,
    pub beta0: f64,
    pub z0: f64,
    /// `(|x1|, |x2|)`; the squared norms scale the `alpha` and `beta` rates.
    pub feature_norms: (f64, f64),
}

impl StarvationConfig {
    pub fn new(lambda: f64, delta: f64, alpha0: f64, beta0: f64, z0: f64) -> Result<Self> {
        let c = Self {
            lambda,
            delta,
            alpha0,
            beta0,
            z0,
            feature_norms: (1.0, 1.0),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn with_feature_norms(mut self, n1: f64, n2: f64) -> Result<Self> {
        self.feature_norms = (n1, n2);
        self.validate()?;
        Ok(self)
    }

    /// `lambda = 0` is accepted for integration (the rare feature is never
    /// seen) but not by the bounds.
    pub fn validate(&self) -> Result<()> {
        ensure((0.0..=1.0).contains(&self.lambda), "lambda", self.lambda, "0 <= lambda <= 1")?;
        ensure(self.delta > 0.0 && self.delta < 0.5, "delta", self.delta, "0 < delta < 0.5")?;
        ensure(self.alpha0.is_finite(), "alpha0", self.alpha0, "a finite value")?;
        ensure(self.beta0.is_finite(), "beta0", self.beta0, "a finite value")?;
        ensure(self.z0 > 0.0 && self.z0.is_finite(), "z0", self.z0, "z0 > 0")?;
        let (n1, n2) = self.feature_norms;
        ensure(n1 > 0.0 && n1.is_finite(), "feature_norms.0", n1, "norm > 0")?;
        ensure(n2 > 0.0 && n2.is_finite(), "feature_norms.1", n2, "norm > 0")
    }

    /// True when `beta0 <= lambda alpha0`, the case covered by the plain bound.
    pub fn ordered(&self) -> bool {
        self.beta0 <= self.lambda * self.alpha0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarvationState {
    pub t: f64,
    pub alpha: f64,
    pub beta: f64,
    pub z: f64,
    pub conf_both: f64,
    pub conf_x1: f64,
    pub conf_x2: f64,
}

impl StarvationState {
    pub fn new(t: f64, alpha: f64, beta: f64, z: f64) -> Self {
        Self {
            t,
            alpha,
            beta,
            z,
            conf_both: sigmoid(z * (alpha + beta)),
            conf_x1: sigmoid(z * alpha),
            conf_x2: sigmoid(z * beta),
        }
    }
}

fn check_bound_args(lambda: f64, delta: f64) -> Result<f64> {
    ensure(lambda > 0.0 && lambda <= 1.0, "lambda", lambda, "0 < lambda <= 1")?;
    ensure(delta > 0.0 && delta < 1.0, "delta", delta, "0 < delta < 1")?;
    confidence_logit(delta)
}

/// `sigma(lambda log((1 - delta) / delta))`.
pub fn starvation_bound(lambda: f64, delta: f64) -> Result<f64> {
    let l = check_bound_args(lambda, delta)?;
    Ok(sigmoid(lambda * l))
}

/// `sigma(lambda L + z_star (beta0 - lambda alpha0))`, valid for any
/// initialization.
pub fn starvation_bound_relaxed(lambda: f64, delta: f64, z_star: f64, alpha0: f64, beta0: f64) -> Result<f64> {
    let l = check_bound_args(lambda, delta)?;
    ensure(z_star > 0.0 && z_star.is_finite(), "z_star", z_star, "z_star > 0")?;
    Ok(sigmoid(lambda * l + z_star * (beta0 - lambda * alpha0)))
}

/// Relaxed bound under the assumption `z* = alpha*`, which with
/// `z* alpha* = L` gives `z* = sqrt(L)`.
pub fn starvation_bound_fair_init(lambda: f64, delta: f64, alpha0: f64, beta0: f64) -> Result<f64> {
    let l = check_bound_args(lambda, delta)?;
    starvation_bound_relaxed(lambda, delta, l.sqrt(), alpha0, beta0)
}

/// The bound that applies to `config`: the plain one when
/// `beta0 <= lambda alpha0`, the relaxed one at `z_star` otherwise.
pub fn applicable_bound(config: &StarvationConfig, z_star: f64) -> Result<f64> {
    if config.ordered() {
        starvation_bound(config.lambda, config.delta)
    } else {
        starvation_bound_relaxed(config.lambda, config.delta, z_star, config.alpha0, config.beta0)
    }
}

pub fn starvation_system(config: &StarvationConfig) -> OdeSystem<impl Fn(f64, &[f64], &mut [f64])> {
    let lambda = config.lambda;
    let (n1, n2) = config.feature_norms;
    let (s1, s2) = (n1 * n1, n2 * n2);
    OdeSystem::new(3, "gradient starvation", move |_t, x: &[f64], d: &mut [f64]| {
        let (a, b, z) = (x[0], x[1], x[2]);
        let both = lambda * sigmoid(-z * (a + b));
        let alone = (1.0 - lambda) * sigmoid(-z * a);
        d[0] = s1 * z * (both + alone);
        d[1] = s2 * z * both;
        d[2] = (a + b) * both + a * alone;
    })
}

/// Trajectory with columns `alpha, beta, z, conf_both, conf_x1, conf_x2`.
pub fn integrate_starvation(config: &StarvationConfig, t_end: f64, step: f64) -> Result<Trajectory> {
    config.validate()?;
    let raw = ode::integrate(
        &starvation_system(config),
        &[config.alpha0, config.beta0, config.z0],
        t_end,
        step,
    )?;
    Ok(ode::relabel(raw, &["alpha", "beta", "z"])
        .with_derived("conf_both", |_, s| sigmoid(s[2] * (s[0] + s[1])))
        .with_derived("conf_x1", |_, s| sigmoid(s[2] * s[0]))
        .with_derived("conf_x2", |_, s| sigmoid(s[2] * s[1])))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TstarOptions {
    pub step: f64,
    pub t_max: f64,
    pub time_tol: f64,
}

impl Default for TstarOptions {
    fn default() -> Self {
        Self {
            step: 1e-3,
            t_max: 1e5,
            time_tol: 1e-8,
        }
    }
}

/// First time `z alpha` reaches `log((1 - delta) / delta)`.
pub fn integrate_to_tstar(config: &StarvationConfig) -> Result<(f64, StarvationState)> {
    integrate_to_tstar_with(config, &TstarOptions::default())
}

pub fn integrate_to_tstar_with(config: &StarvationConfig, opts: &TstarOptions) -> Result<(f64, StarvationState)> {
    config.validate()?;
    let target = confidence_logit(config.delta)?;
    let (t, s) = ode::integrate_until(
        &starvation_system(config),
        &[config.alpha0, config.beta0, config.z0],
        opts.step,
        opts.t_max,
        opts.time_tol,
        |s| s[2] * s[0] - target,
    )?;
    Ok((t, StarvationState::new(t, s[0], s[1], s[2])))
}

pub const TABLE1_LAMBDAS: [f64; 4] = [0.5, 0.2, 0.1, 0.01];
pub const TABLE1_DELTAS: [f64; 2] = [0.01, 1e-4];

/// Bound on the probe confidence for every `(delta, lambda)` pair of the
/// reference grid. Columns `delta, lambda, bound, percent`.
pub fn table1() -> Table {
    let mut t = Table::new(["delta", "lambda", "bound", "percent"]);
    for &delta in &TABLE1_DELTAS {
        for &lambda in &TABLE1_LAMBDAS {
            let b = starvation_bound(lambda, delta).expect("reference grid is in range");
            t.push(vec![delta.into(), lambda.into(), b.into(), (100.0 * b).into()]);
        }
    }
    t
}

/// One row of a bound surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub lambda: f64,
    pub delta: f64,
    pub bound: f64,
    pub bound_relaxed: f64,
    pub conf_x2_at_tstar: f64,
    pub t_star: f64,
}

/// Bounds and the integrated probe confidence over a `lambda x delta` grid.
/// With `fair_init` the relaxed bound uses `z* = sqrt(L)` instead of the
/// observed `z` at `t*`.
pub fn bound_surface(
    lambdas: &[f64],
    deltas: &[f64],
    alpha0: f64,
    beta0: f64,
    z0: f64,
    fair_init: bool,
) -> Result<Vec<SurfacePoint>> {
    let cells: Vec<(f64, f64)> = lambdas
        .iter()
        .flat_map(|&l| deltas.iter().map(move |&d| (l, d)))
        .collect();
    cells
        .par_iter()
        .map(|&(lambda, delta)| {
            let config = StarvationConfig::new(lambda, delta, alpha0, beta0, z0)?;
            let (t_star, state) = integrate_to_tstar(&config)?;
            let bound_relaxed = if fair_init {
                starvation_bound_fair_init(lambda, delta, alpha0, beta0)?
            } else {
                starvation_bound_relaxed(lambda, delta, state.z, alpha0, beta0)?
            };
            Ok(SurfacePoint {
                lambda,
                delta,
                bound: starvation_bound(lambda, delta)?,
                bound_relaxed,
                conf_x2_at_tstar: state.conf_x2,
                t_star,
            })
        })
        .collect()
}

pub fn surface_to_table(points: &[SurfacePoint]) -> Table {
    let mut t = Table::new(["lambda", "delta", "bound", "bound_relaxed", "conf_x2_at_tstar", "t_star"]);
    for p in points {
        t.push(vec![
            p.lambda.into(),
            p.delta.into(),
            p.bound.into(),
            p.bound_relaxed.into(),
            p.conf_x2_at_tstar.into(),
            p.t_star.into(),
        ]);
    }
    t
}
