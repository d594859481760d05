//! Continuous-time dynamics of a single class mode under binary
//! cross-entropy.
//!
//! For one datapoint `x` of class 1, the active hidden row `w` and its
//! output weight `z` obey
//!
//! ```text
//! y' = |x|^2 z sigma(-y z),    z' = y sigma(-y z),    y = w.x
//! ```
//!
//! so `y^2 - |x|^2 z^2` is conserved. On the degenerate hyperbola the logit
//! `u = y z` solves `u' = 2 |x| u sigma(-u)`, whose solution is the inverse
//! of `log(u) + Ei(u)`. Class frequency `p` rescales time, so the solvers
//! below take an effective `rate = |x| p`.

use crate::error::{ensure, Error, Result};
use crate::ode::{self, OdeSystem, Trajectory, DEFAULT_STEP};
use crate::phase::{classify, PhaseKind};
use crate::specfn::{confidence_logit, ei, inverse_log_plus_ei, log_plus_ei, sigmoid};

/// Relative tolerance under which `|y^2 - |x|^2 z^2|` counts as zero.
pub const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClassLabel {
    One,
    Two,
}

impl ClassLabel {
    /// +1 for class 1, -1 for class 2.
    pub fn sign(self) -> f64 {
        match self {
            ClassLabel::One => 1.0,
            ClassLabel::Two => -1.0,
        }
    }

    pub fn index(self) -> usize {
        match self {
            ClassLabel::One => 1,
            ClassLabel::Two => 2,
        }
    }
}

/// Input norm and frequency of one class made of a single repeated vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassSpec {
    pub norm: f64,
    pub frequency: f64,
    pub label: ClassLabel,
}

impl ClassSpec {
    pub fn new(norm: f64, frequency: f64, label: ClassLabel) -> Result<Self> {
        ensure(norm > 0.0 && norm.is_finite(), "norm", norm, "norm > 0")?;
        ensure((0.0..=1.0).contains(&frequency), "frequency", frequency, "0 <= p <= 1")?;
        Ok(Self {
            norm,
            frequency,
            label,
        })
    }

    /// `|x| p`, the factor by which this class's clock runs.
    pub fn rate(&self) -> f64 {
        self.norm * self.frequency
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `y^2 = |x|^2 z^2`.
    Degenerate,
    /// `y^2 > |x|^2 z^2`.
    AboveAsymptote,
    /// `y^2 < |x|^2 z^2`.
    BelowAsymptote,
}

/// `(y, z)` of one mode together with its conserved hyperbola.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarState {
    pub y: f64,
    pub z: f64,
    /// `|y^2 - |x|^2 z^2|`
    pub c: f64,
    pub branch: Branch,
}

impl ScalarState {
    pub fn new(y: f64, z: f64, norm: f64) -> Result<Self> {
        ensure(norm > 0.0 && norm.is_finite(), "norm", norm, "norm > 0")?;
        ensure(y.is_finite(), "y", y, "a finite value")?;
        ensure(z.is_finite(), "z", z, "a finite value")?;
        let a = y * y;
        let b = norm * norm * z * z;
        let diff = a - b;
        let branch = if diff.abs() <= DEGENERACY_TOL * (a + b) {
            Branch::Degenerate
        } else if diff > 0.0 {
            Branch::AboveAsymptote
        } else {
            Branch::BelowAsymptote
        };
        Ok(Self {
            y,
            z,
            c: diff.abs(),
            branch,
        })
    }

    pub fn logit(&self) -> f64 {
        self.y * self.z
    }

    /// Signed invariant `y^2 - |x|^2 z^2`.
    pub fn invariant(&self, norm: f64) -> f64 {
        self.y * self.y - norm * norm * self.z * self.z
    }
}

/// A sample of a logit trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogitPoint {
    pub t: f64,
    pub u: f64,
    /// Probability assigned to the correct class.
    pub p_correct: f64,
}

impl LogitPoint {
    pub fn new(t: f64, u: f64, label: ClassLabel) -> Self {
        Self {
            t,
            u,
            p_correct: sigmoid(label.sign() * u),
        }
    }
}

/// Degenerate-case logit `u(t)` for class 1, starting at `u0 > 0`.
pub fn solve_degenerate(u0: f64, rate: f64, t: f64) -> Result<f64> {
    ensure(u0 > 0.0 && u0.is_finite(), "u0", u0, "u0 > 0")?;
    ensure(rate > 0.0 && rate.is_finite(), "rate", rate, "rate > 0")?;
    ensure(t >= 0.0 && t.is_finite(), "t", t, "t >= 0")?;
    if t == 0.0 {
        return Ok(u0);
    }
    inverse_log_plus_ei(2.0 * rate * t + log_plus_ei(u0)?)
}

/// Degenerate-case logit for either class. Class 2 starts from `v0 < 0`
/// and follows the mirror image `-u(t)` of the class-1 solution.
pub fn solve_degenerate_for(label: ClassLabel, logit0: f64, rate: f64, t: f64) -> Result<f64> {
    match label {
        ClassLabel::One => solve_degenerate(logit0, rate, t),
        ClassLabel::Two => {
            ensure(logit0 < 0.0, "v0", logit0, "v0 < 0 for class 2")?;
            Ok(-solve_degenerate(-logit0, rate, t)?)
        }
    }
}

/// Time for the degenerate logit to go from `u0` to `uf`.
pub fn time_to_logit(u0: f64, uf: f64, rate: f64) -> Result<f64> {
    ensure(u0 > 0.0 && u0.is_finite(), "u0", u0, "u0 > 0")?;
    ensure(uf >= u0, "uf", uf, "uf >= u0")?;
    ensure(rate > 0.0 && rate.is_finite(), "rate", rate, "rate > 0")?;
    if uf == u0 {
        return Ok(0.0);
    }
    Ok(((uf / u0).ln() + ei(uf)? - ei(u0)?) / (2.0 * rate))
}

/// Samples the degenerate solution of one class at the given times.
pub fn degenerate_curve(label: ClassLabel, logit0: f64, rate: f64, times: &[f64]) -> Result<Vec<LogitPoint>> {
    times
        .iter()
        .map(|&t| Ok(LogitPoint::new(t, solve_degenerate_for(label, logit0, rate, t)?, label)))
        .collect()
}

/// Upper bound `2 log(|x| t + e^{u0/2})` on the degenerate logit.
pub fn convergence_bound(u0: f64, norm: f64, t: f64) -> Result<f64> {
    ensure(u0 > 0.0 && u0.is_finite(), "u0", u0, "u0 > 0")?;
    ensure(norm > 0.0, "norm", norm, "norm > 0")?;
    ensure(t >= 0.0, "t", t, "t >= 0")?;
    Ok(2.0 * (norm * t + (0.5 * u0).exp()).ln())
}

fn require_solves(state: &ScalarState, norm: f64) -> Result<()> {
    let region = classify(state.y, state.z, norm)?;
    if region.kind != PhaseKind::Solves {
        return Err(Error::Region {
            found: region.kind,
            required: PhaseKind::Solves,
        });
    }
    Ok(())
}

/// Initial hyperbolic angle. Carries the sign of the initial logit so that
/// starts with `z0 < 0` reproduce `u0`.
pub(crate) fn initial_angle(state: &ScalarState, norm: f64) -> f64 {
    let root_c = state.c.sqrt();
    match state.branch {
        Branch::AboveAsymptote => 2.0 * (norm * state.z / root_c).asinh(),
        Branch::BelowAsymptote => 2.0 * (state.y / root_c).asinh(),
        Branch::Degenerate => unreachable!("no angle on the degenerate hyperbola"),
    }
}

/// Maps the hyperbolic angle back to `(y, z)` on the branch of `state0`.
pub(crate) fn from_angle(state0: &ScalarState, norm: f64, theta: f64) -> (f64, f64) {
    let root_c = state0.c.sqrt();
    let (ch, sh) = ((0.5 * theta).cosh(), (0.5 * theta).sinh());
    match state0.branch {
        Branch::AboveAsymptote => (root_c * ch, root_c / norm * sh),
        Branch::BelowAsymptote => (root_c * sh, root_c / norm * ch),
        Branch::Degenerate => unreachable!(),
    }
}

/// Angle flow `theta' = 2 |x| sigma(-c sinh(theta) / 2|x|)`.
fn angle_system(c: f64, norm: f64) -> OdeSystem<impl Fn(f64, &[f64], &mut [f64])> {
    let k = c / (2.0 * norm);
    OdeSystem::new(1, "hyperbolic angle", move |_t, x: &[f64], d: &mut [f64]| {
        d[0] = 2.0 * norm * sigmoid(-k * x[0].sinh());
    })
}

fn check_hyperbolic(state0: &ScalarState, norm: f64, rate_scale: f64) -> Result<()> {
    ensure(rate_scale > 0.0 && rate_scale <= 1.0, "rate_scale", rate_scale, "0 < p <= 1")?;
    if state0.branch == Branch::Degenerate {
        return Err(Error::InvalidInput(
            "degenerate hyperbola (c = 0) has no angle parametrization; use solve_degenerate".into(),
        ));
    }
    require_solves(state0, norm)
}

/// Non-degenerate solution: integrates the hyperbolic angle with RK4 over
/// the rescaled time `rate_scale * t` and maps back to `(y, z)`.
pub fn solve_hyperbolic(state0: &ScalarState, norm: f64, rate_scale: f64, t: f64) -> Result<ScalarState> {
    solve_hyperbolic_with_step(state0, norm, rate_scale, t, DEFAULT_STEP)
}

pub fn solve_hyperbolic_with_step(
    state0: &ScalarState,
    norm: f64,
    rate_scale: f64,
    t: f64,
    step: f64,
) -> Result<ScalarState> {
    check_hyperbolic(state0, norm, rate_scale)?;
    ensure(t >= 0.0 && t.is_finite(), "t", t, "t >= 0")?;
    if t == 0.0 {
        return Ok(*state0);
    }
    let theta0 = initial_angle(state0, norm);
    let theta = ode::integrate_to_end(&angle_system(state0.c, norm), &[theta0], rate_scale * t, step)?[0];
    let (y, z) = from_angle(state0, norm, theta);
    Ok(ScalarState {
        y,
        z,
        c: state0.c,
        branch: state0.branch,
    })
}

/// Non-degenerate trajectory with columns `theta, y, z, u` on the
/// (unscaled) training-time axis.
pub fn hyperbolic_trajectory(
    state0: &ScalarState,
    norm: f64,
    rate_scale: f64,
    t_end: f64,
    step: f64,
    record_every: usize,
) -> Result<Trajectory> {
    check_hyperbolic(state0, norm, rate_scale)?;
    let theta0 = initial_angle(state0, norm);
    let raw = ode::integrate_sampled(
        &angle_system(state0.c, norm),
        &[theta0],
        rate_scale * t_end,
        rate_scale * step,
        record_every,
    )?;
    let mut out = Trajectory::new(
        ["theta", "y", "z", "u"].iter().map(|s| s.to_string()).collect(),
        raw.meta.clone(),
    );
    for (tau, s) in raw.rows() {
        let (y, z) = from_angle(state0, norm, s[0]);
        out.push(tau / rate_scale, &[s[0], y, z, y * z]);
    }
    Ok(out)
}

/// Evolves any solvable initialization: the closed form on the degenerate
/// hyperbola, the angle integration elsewhere.
pub fn evolve(state0: &ScalarState, norm: f64, rate_scale: f64, t: f64) -> Result<ScalarState> {
    if state0.branch != Branch::Degenerate {
        return solve_hyperbolic(state0, norm, rate_scale, t);
    }
    require_solves(state0, norm)?;
    ensure(rate_scale > 0.0 && rate_scale <= 1.0, "rate_scale", rate_scale, "0 < p <= 1")?;
    let u = solve_degenerate(state0.logit(), norm * rate_scale, t)?;
    Ok(ScalarState {
        y: (u * norm).sqrt(),
        z: (u / norm).sqrt(),
        c: state0.c,
        branch: Branch::Degenerate,
    })
}

/// Exact and approximate ratio `t2* / t1*` of the times both classes need
/// to reach confidence `1 - delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeRatio {
    pub exact: f64,
    pub approx: f64,
    pub t1: f64,
    pub t2: f64,
}

/// Convergence-time ratio between two degenerate classes starting at
/// `u0 > 0` (class 1) and `v0 = -v0_abs` (class 2), with `u0 <= v0_abs`.
pub fn convergence_time_ratio(
    class1: &ClassSpec,
    class2: &ClassSpec,
    u0: f64,
    v0_abs: f64,
    delta: f64,
) -> Result<TimeRatio> {
    ensure(delta > 0.0 && delta < 0.5, "delta", delta, "0 < delta < 0.5")?;
    ensure(u0 > 0.0, "u0", u0, "u0 > 0")?;
    ensure(v0_abs >= u0, "v0_abs", v0_abs, "|v0| >= u0")?;
    let p = class1.frequency;
    if (p + class2.frequency - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "class frequencies {} and {} do not sum to 1",
            p, class2.frequency
        )));
    }
    ensure(p > 0.0 && p < 1.0, "p", p, "0 < p < 1")?;
    let target = confidence_logit(delta)?;
    ensure(target >= v0_abs, "delta", delta, "a confidence not already met at v0")?;

    let t1 = time_to_logit(u0, target, class1.rate())?;
    let t2 = time_to_logit(v0_abs, target, class2.rate())?;
    Ok(TimeRatio {
        exact: t2 / t1,
        approx: class1.norm / class2.norm * p / (1.0 - p),
        t1,
        t2,
    })
}

/// Logit started on `y = -|x| z` (top-left quadrant): integrates
/// `u' = -2 rate u sigma(-u)`; `u` rises toward 0 without reaching it.
pub fn solve_top_left(u0: f64, rate: f64, t: f64) -> Result<f64> {
    solve_top_left_with_step(u0, rate, t, DEFAULT_STEP)
}

pub fn solve_top_left_with_step(u0: f64, rate: f64, t: f64, step: f64) -> Result<f64> {
    ensure(u0 < 0.0 && u0.is_finite(), "u0", u0, "u0 < 0")?;
    ensure(rate > 0.0 && rate.is_finite(), "rate", rate, "rate > 0")?;
    ensure(t >= 0.0 && t.is_finite(), "t", t, "t >= 0")?;
    if t == 0.0 {
        return Ok(u0);
    }
    Ok(ode::integrate_to_end(&top_left_system(rate), &[u0], t, step)?[0])
}

pub fn top_left_system(rate: f64) -> OdeSystem<impl Fn(f64, &[f64], &mut [f64])> {
    OdeSystem::new(1, "top-left logit", move |_t, x: &[f64], d: &mut [f64]| {
        d[0] = -2.0 * rate * x[0] * sigmoid(-x[0]);
    })
}

/// Bounds on the time the top-left logit needs to rise from `u0` to `u`
/// (`u0 <= u < 0`): `L / (2 rate) <= t <= L / rate` with
/// `L = log(-u0) - log(-u)`. The lower bound diverges as `u -> 0`.
pub fn top_left_time_bounds(u0: f64, u: f64, rate: f64) -> Result<(f64, f64)> {
    ensure(u0 < 0.0, "u0", u0, "u0 < 0")?;
    ensure(u >= u0 && u < 0.0, "u", u, "u0 <= u < 0")?;
    ensure(rate > 0.0, "rate", rate, "rate > 0")?;
    let l = (-u0).ln() - (-u).ln();
    Ok((l / (2.0 * rate), l / rate))
}

/// `h` active neurons on one class, all on degenerate hyperbolas. Columns
/// `u1..uh` and their `sum`, which follows the single-neuron equation.
pub fn solve_multi_neuron(u0s: &[f64], rate: f64, t_end: f64, step: f64) -> Result<Trajectory> {
    if u0s.is_empty() {
        return Err(Error::InvalidInput("need at least one neuron".into()));
    }
    for &u in u0s {
        ensure(u > 0.0 && u.is_finite(), "u0", u, "every u0 > 0")?;
    }
    ensure(rate > 0.0, "rate", rate, "rate > 0")?;
    let h = u0s.len();
    let sys = OdeSystem::new(h, "per-neuron logits", move |_t, x: &[f64], d: &mut [f64]| {
        let s = sigmoid(-x.iter().sum::<f64>());
        for (di, xi) in d.iter_mut().zip(x) {
            *di = 2.0 * rate * xi * s;
        }
    });
    let raw = ode::integrate(&sys, u0s, t_end, step)?;
    let names: Vec<String> = (1..=h).map(|i| format!("u{i}")).collect();
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    Ok(ode::relabel(raw, &names).with_derived("sum", |_, s| s.iter().sum()))
}

/// Degenerate logit growth rate `2 sqrt(m) |x|` for a class of `m` mutually
/// orthogonal points of equal norm trained in full batch. The logit is
/// [`solve_degenerate`] with `rate = sqrt(m) |x|`.
pub fn orthogonal_class_rate(m: usize, norm: f64) -> Result<f64> {
    ensure(m >= 1, "m", m as f64, "m >= 1")?;
    ensure(norm > 0.0, "norm", norm, "norm > 0")?;
    Ok(2.0 * (m as f64).sqrt() * norm)
}

/// Row `w = alpha x1 + beta x2 + ...` that is also active on an orthogonal
/// class-2 point `x2` (unit norms). The `beta` direction only updates while
/// `beta > 0`. Columns `alpha, beta, z, alpha_z`.
pub fn solve_relaxed_h2(alpha0: f64, beta0: f64, z0: f64, t_end: f64, step: f64) -> Result<Trajectory> {
    ensure(alpha0 > 0.0, "alpha0", alpha0, "alpha0 > 0")?;
    ensure(beta0 >= 0.0, "beta0", beta0, "beta0 >= 0")?;
    ensure(z0 > 0.0, "z0", z0, "z0 > 0")?;
    let raw = ode::integrate(&relaxed_h2_system(), &[alpha0, beta0, z0], t_end, step)?;
    Ok(ode::relabel(raw, &["alpha", "beta", "z"]).with_derived("alpha_z", |_, s| s[0] * s[2]))
}

fn relaxed_h2_system() -> OdeSystem<impl Fn(f64, &[f64], &mut [f64])> {
    OdeSystem::new(3, "relaxed H2 competition", |_t, x: &[f64], d: &mut [f64]| {
        let (a, b, z) = (x[0], x[1], x[2]);
        let pull = sigmoid(-z * a);
        let push = if b > 0.0 { sigmoid(z * b) } else { 0.0 };
        d[0] = z * pull;
        d[1] = -z * push;
        d[2] = a * pull - b * push;
    })
}
