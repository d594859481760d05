//! Fixed-step classical Runge–Kutta integration.
//!
//! This is the reference solver every closed form is checked against, and
//! the only solver for the systems that have no closed form. Steps are
//! fixed so that two runs with the same inputs are bit-identical.

use crate::error::{ensure, Error, Result};
use crate::table::Table;

/// Default step for oracle duty.
pub const DEFAULT_STEP: f64 = 1e-4;

/// An autonomous or time-dependent system `x' = f(t, x)`.
pub struct OdeSystem<F> {
    dimension: usize,
    description: String,
    rhs: F,
}

impl<F> OdeSystem<F>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    pub fn new(dimension: usize, description: impl Into<String>, rhs: F) -> Self {
        assert!(dimension > 0, "an ODE system needs at least one component");
        Self {
            dimension,
            description: description.into(),
            rhs,
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// Writes `f(t, x)` into `out`.
    pub fn eval(&self, t: f64, x: &[f64], out: &mut [f64]) {
        (self.rhs)(t, x, out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMeta {
    pub solver: String,
    pub step: f64,
    pub label: String,
    /// Max pointwise step-halving discrepancy, set by [`richardson_refine`].
    pub discrepancy: Option<f64>,
}

/// Time-stamped samples of a state vector, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    values: Vec<f64>,
    columns: Vec<String>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn new(columns: Vec<String>, meta: TrajectoryMeta) -> Self {
        assert!(!columns.is_empty());
        Self {
            times: Vec::new(),
            values: Vec::new(),
            columns,
            meta,
        }
    }

    /// Appends a row. Times must be strictly increasing.
    pub fn push(&mut self, t: f64, state: &[f64]) {
        assert_eq!(state.len(), self.width(), "row width mismatch");
        if let Some(&last) = self.times.last() {
            assert!(t > last, "trajectory times must increase ({t} after {last})");
        }
        self.times.push(t);
        self.values.extend_from_slice(state);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn state(&self, i: usize) -> &[f64] {
        let w = self.width();
        &self.values[i * w..(i + 1) * w]
    }

    pub fn last_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    pub fn last_time(&self) -> f64 {
        *self.times.last().expect("empty trajectory")
    }

    pub fn rows(&self) -> impl Iterator<Item = (f64, &[f64])> + '_ {
        self.times
            .iter()
            .copied()
            .zip(self.values.chunks_exact(self.width()))
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Copies out one column by name.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.column_index(name)?;
        Some(self.rows().map(|(_, s)| s[j]).collect())
    }

    /// Returns a copy with an extra column computed from each row.
    pub fn with_derived(&self, name: &str, f: impl Fn(f64, &[f64]) -> f64) -> Trajectory {
        let mut columns = self.columns.clone();
        columns.push(name.to_string());
        let mut out = Trajectory::new(columns, self.meta.clone());
        let mut row = Vec::with_capacity(self.width() + 1);
        for (t, s) in self.rows() {
            row.clear();
            row.extend_from_slice(s);
            row.push(f(t, s));
            out.times.push(t);
            out.values.extend_from_slice(&row);
        }
        out
    }

    /// Keeps every `every`-th row plus the final one.
    pub fn thinned(&self, every: usize) -> Trajectory {
        let every = every.max(1);
        let mut out = Trajectory::new(self.columns.clone(), self.meta.clone());
        let n = self.len();
        for (i, (t, s)) in self.rows().enumerate() {
            if i % every == 0 || i + 1 == n {
                out.push(t, s);
            }
        }
        out
    }

    pub fn to_table(&self) -> Table {
        let mut columns = vec!["t".to_string()];
        columns.extend(self.columns.iter().cloned());
        let mut table = Table::new(columns);
        for (t, s) in self.rows() {
            let mut row = Vec::with_capacity(s.len() + 1);
            row.push(t.into());
            row.extend(s.iter().map(|&v| v.into()));
            table.push(row);
        }
        table
    }
}

/// Single-step RK4 workspace bound to a system.
pub struct Rk4<'a, F> {
    system: &'a OdeSystem<F>,
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl<'a, F> Rk4<'a, F>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    pub fn new(system: &'a OdeSystem<F>) -> Self {
        let n = system.dimension();
        Self {
            system,
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }

    /// Advances `x` from `t` to `t + h` in place.
    pub fn step(&mut self, t: f64, x: &mut [f64], h: f64) {
        let sys = self.system;
        let n = x.len();
        sys.eval(t, x, &mut self.k1);
        for i in 0..n {
            self.tmp[i] = x[i] + 0.5 * h * self.k1[i];
        }
        sys.eval(t + 0.5 * h, &self.tmp, &mut self.k2);
        for i in 0..n {
            self.tmp[i] = x[i] + 0.5 * h * self.k2[i];
        }
        sys.eval(t + 0.5 * h, &self.tmp, &mut self.k3);
        for i in 0..n {
            self.tmp[i] = x[i] + h * self.k3[i];
        }
        sys.eval(t + h, &self.tmp, &mut self.k4);
        for i in 0..n {
            x[i] += h / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }
}

fn validate<F>(system: &OdeSystem<F>, initial: &[f64], t_end: f64, step: f64) -> Result<()>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    ensure(step > 0.0 && step.is_finite(), "step", step, "step > 0")?;
    ensure(t_end > 0.0 && t_end.is_finite(), "t_end", t_end, "t_end > 0")?;
    if initial.len() != system.dimension() {
        return Err(Error::InvalidInput(format!(
            "initial state has {} components, system '{}' has {}",
            initial.len(),
            system.description(),
            system.dimension()
        )));
    }
    let mut d = vec![0.0; initial.len()];
    system.eval(0.0, initial, &mut d);
    if initial.iter().chain(&d).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { t: 0.0 });
    }
    Ok(())
}

/// Number of steps of size `step` needed to reach `t_end`, the last one
/// possibly shortened.
fn step_count(t_end: f64, step: f64) -> usize {
    ((t_end / step) * (1.0 - 1e-12)).ceil().max(1.0) as usize
}

fn time_at(i: usize, n: usize, t_end: f64, step: f64) -> f64 {
    if i >= n {
        t_end
    } else {
        i as f64 * step
    }
}

fn default_columns(dim: usize) -> Vec<String> {
    (0..dim).map(|i| format!("x{i}")).collect()
}

/// Integrates from `t = 0` to exactly `t_end`, recording every step.
pub fn integrate<F>(system: &OdeSystem<F>, initial: &[f64], t_end: f64, step: f64) -> Result<Trajectory>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    integrate_sampled(system, initial, t_end, step, 1)
}

/// As [`integrate`] but records only every `record_every`-th step (and
/// always the first and last state).
pub fn integrate_sampled<F>(
    system: &OdeSystem<F>,
    initial: &[f64],
    t_end: f64,
    step: f64,
    record_every: usize,
) -> Result<Trajectory>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    validate(system, initial, t_end, step)?;
    let record_every = record_every.max(1);
    let mut traj = Trajectory::new(
        default_columns(system.dimension()),
        TrajectoryMeta {
            solver: "rk4".into(),
            step,
            label: system.description().to_string(),
            discrepancy: None,
        },
    );
    traj.push(0.0, initial);
    let n = step_count(t_end, step);
    let mut x = initial.to_vec();
    let mut rk = Rk4::new(system);
    for i in 0..n {
        let t = time_at(i, n, t_end, step);
        let t_next = time_at(i + 1, n, t_end, step);
        rk.step(t, &mut x, t_next - t);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { t: t_next });
        }
        if (i + 1) % record_every == 0 || i + 1 == n {
            traj.push(t_next, &x);
        }
    }
    Ok(traj)
}

/// Integrates to `t_end` and returns only the final state.
pub fn integrate_to_end<F>(system: &OdeSystem<F>, initial: &[f64], t_end: f64, step: f64) -> Result<Vec<f64>>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    validate(system, initial, t_end, step)?;
    let n = step_count(t_end, step);
    let mut x = initial.to_vec();
    let mut rk = Rk4::new(system);
    for i in 0..n {
        let t = time_at(i, n, t_end, step);
        let t_next = time_at(i + 1, n, t_end, step);
        rk.step(t, &mut x, t_next - t);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { t: t_next });
        }
    }
    Ok(x)
}

/// Integrates until `event(x)` first becomes non-negative and returns the
/// crossing time and state.
///
/// The crossing is located by bisection on the length of the last step,
/// re-stepping from the bracketing state, down to `time_tol`.
pub fn integrate_until<F, E>(
    system: &OdeSystem<F>,
    initial: &[f64],
    step: f64,
    t_max: f64,
    time_tol: f64,
    event: E,
) -> Result<(f64, Vec<f64>)>
where
    F: Fn(f64, &[f64], &mut [f64]),
    E: Fn(&[f64]) -> f64,
{
    validate(system, initial, t_max, step)?;
    if event(initial) >= 0.0 {
        return Ok((0.0, initial.to_vec()));
    }
    let n = step_count(t_max, step);
    let mut x = initial.to_vec();
    let mut trial = x.clone();
    let mut rk = Rk4::new(system);
    for i in 0..n {
        let t = time_at(i, n, t_max, step);
        let t_next = time_at(i + 1, n, t_max, step);
        trial.copy_from_slice(&x);
        rk.step(t, &mut trial, t_next - t);
        if trial.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { t: t_next });
        }
        if event(&trial) >= 0.0 {
            let (mut lo, mut hi) = (0.0, t_next - t);
            let mut best = trial.clone();
            while hi - lo > time_tol {
                let mid = 0.5 * (lo + hi);
                trial.copy_from_slice(&x);
                rk.step(t, &mut trial, mid);
                if event(&trial) >= 0.0 {
                    hi = mid;
                    best.copy_from_slice(&trial);
                } else {
                    lo = mid;
                }
            }
            return Ok((t + hi, best));
        }
        x.copy_from_slice(&trial);
    }
    Err(Error::Horizon { t_max })
}

/// Runs [`integrate`] at `step` and `step / 2` and returns the half-step
/// trajectory, with the largest discrepancy between the two at the coarse
/// grid times stored in `meta.discrepancy`.
pub fn richardson_refine<F>(system: &OdeSystem<F>, initial: &[f64], t_end: f64, step: f64) -> Result<Trajectory>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let coarse = integrate(system, initial, t_end, step)?;
    let mut fine = integrate(system, initial, t_end, step / 2.0)?;
    let last_fine = fine.len() - 1;
    let mut worst: f64 = 0.0;
    for (k, (t, s)) in coarse.rows().enumerate() {
        let j = if k + 1 == coarse.len() { last_fine } else { 2 * k };
        debug_assert_eq!(fine.times()[j], t);
        for (a, b) in s.iter().zip(fine.state(j)) {
            worst = worst.max((a - b).abs());
        }
    }
    fine.meta.solver = "rk4-richardson".into();
    fine.meta.discrepancy = Some(worst);
    Ok(fine)
}

/// Labels the columns of a trajectory produced by the generic integrator.
pub(crate) fn relabel(mut traj: Trajectory, names: &[&str]) -> Trajectory {
    assert_eq!(names.len(), traj.width());
    traj.columns = names.iter().map(|s| s.to_string()).collect();
    traj
}
