//! Fate of a single BCE mode as a function of its initialization `(y0, z0)`.
//!
//! With `y = w.x` the pre-activation along the datapoint and `z` the output
//! weight, the pair moves on the hyperbola `y^2 - |x|^2 z^2 = const`. The
//! two asymptotes `y = +-|x| z` through the origin split the upper half-plane
//! into the region that solves the task and the region where the ReLU dies.

use std::fmt;

use rayon::prelude::*;

use crate::error::{ensure, Result};
use crate::ode::{OdeSystem, Rk4};
use crate::specfn::sigmoid;
use crate::table::Table;

/// Relative tolerance for "on an asymptote".
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Logit above which a trajectory counts as having solved the task.
pub const SOLVED_LOGIT: f64 = 10.0;
/// `|logit|` below which a shrinking trajectory may count as collapsing to 0.
pub const COLLAPSE_LOGIT: f64 = 1e-3;
/// A collapsing trajectory must also have shrunk its squared radius
/// `y^2 + |x|^2 z^2` by this factor. Dying trajectories pass through `u = 0`
/// too, but stay at squared radius `>= c`.
pub const COLLAPSE_RADIUS_SQ: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhaseKind {
    /// `y0 <= 0`: the unit is inactive and never updates.
    Frozen,
    /// The trajectory reaches `y = 0` and the unit dies.
    Dies,
    /// Exactly on `y = -|x| z` with `z < 0`: the logit creeps up to 0.
    ConvergesToZero,
    /// The logit grows without bound.
    Solves,
}

impl PhaseKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PhaseKind::Frozen => "frozen",
            PhaseKind::Dies => "dies",
            PhaseKind::ConvergesToZero => "converges_to_zero",
            PhaseKind::Solves => "solves",
        }
    }
}

impl fmt::Display for PhaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// On `y = |x| z`.
    OnAsymptotePositive,
    /// On `y = -|x| z`.
    OnAsymptoteNegative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseRegion {
    pub kind: PhaseKind,
    pub boundary: Option<Boundary>,
}

/// Classifies an initialization of a class-1 mode.
pub fn classify(y0: f64, z0: f64, norm: f64) -> Result<PhaseRegion> {
    ensure(norm > 0.0 && norm.is_finite(), "norm", norm, "norm > 0")?;
    ensure(y0.is_finite(), "y0", y0, "a finite value")?;
    ensure(z0.is_finite(), "z0", z0, "a finite value")?;

    let scale = y0.abs() + norm * z0.abs();
    let on_pos = (y0 - norm * z0).abs() <= BOUNDARY_TOL * scale;
    let on_neg = (y0 + norm * z0).abs() <= BOUNDARY_TOL * scale;
    let boundary = if on_pos {
        Some(Boundary::OnAsymptotePositive)
    } else if on_neg {
        Some(Boundary::OnAsymptoteNegative)
    } else {
        None
    };

    let kind = if y0 <= 0.0 {
        PhaseKind::Frozen
    } else if z0 >= 0.0 {
        PhaseKind::Solves
    } else if on_neg {
        PhaseKind::ConvergesToZero
    } else if y0 > -norm * z0 {
        PhaseKind::Solves
    } else {
        PhaseKind::Dies
    };
    Ok(PhaseRegion { kind, boundary })
}

/// What the integrated trajectory actually did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservedFate {
    Frozen,
    Dies,
    ConvergesToZero,
    Solves,
    /// None of the thresholds was met before `t_end`.
    Undecided,
}

impl ObservedFate {
    pub fn as_str(self) -> &'static str {
        match self {
            ObservedFate::Frozen => "frozen",
            ObservedFate::Dies => "dies",
            ObservedFate::ConvergesToZero => "converges_to_zero",
            ObservedFate::Solves => "solves",
            ObservedFate::Undecided => "undecided",
        }
    }

    fn matches(self, kind: PhaseKind) -> bool {
        matches!(
            (self, kind),
            (ObservedFate::Frozen, PhaseKind::Frozen)
                | (ObservedFate::Dies, PhaseKind::Dies)
                | (ObservedFate::ConvergesToZero, PhaseKind::ConvergesToZero)
                | (ObservedFate::Solves, PhaseKind::Solves)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FateReport {
    pub region: PhaseRegion,
    pub observed: ObservedFate,
    pub agree: bool,
    /// Time at which the fate was decided (or `t_end`).
    pub decided_at: f64,
    pub final_y: f64,
    pub final_z: f64,
}

/// The BCE mode flow with the ReLU gate: once `y <= 0` nothing moves.
pub fn gated_bce_system(norm: f64) -> OdeSystem<impl Fn(f64, &[f64], &mut [f64])> {
    let nsq = norm * norm;
    OdeSystem::new(2, "bce mode (y, z), relu-gated", move |_t, x: &[f64], d: &mut [f64]| {
        let (y, z) = (x[0], x[1]);
        if y <= 0.0 {
            d[0] = 0.0;
            d[1] = 0.0;
        } else {
            let s = sigmoid(-y * z);
            d[0] = nsq * z * s;
            d[1] = y * s;
        }
    })
}

/// Integrates the gated flow from `(y0, z0)` and compares the observed fate
/// with [`classify`].
pub fn verify_fate(y0: f64, z0: f64, norm: f64, t_end: f64, step: f64) -> Result<FateReport> {
    let region = classify(y0, z0, norm)?;
    ensure(step > 0.0 && step.is_finite(), "step", step, "step > 0")?;
    ensure(t_end > 0.0 && t_end.is_finite(), "t_end", t_end, "t_end > 0")?;

    let system = gated_bce_system(norm);
    let mut rk = Rk4::new(&system);
    let mut x = [y0, z0];
    let radius0 = y0 * y0 + norm * norm * z0 * z0;
    let mut prev_u = (y0 * z0).abs();
    let n = (t_end / step).ceil() as usize;

    let mut observed = ObservedFate::Undecided;
    let mut t = 0.0;
    for i in 0..n {
        let before = x;
        rk.step(t, &mut x, step);
        t = (i + 1) as f64 * step;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(crate::Error::NonFinite { t });
        }
        if i == 0 && x == before {
            observed = ObservedFate::Frozen;
            break;
        }
        let (y, z) = (x[0], x[1]);
        if y <= 0.0 {
            observed = ObservedFate::Dies;
            break;
        }
        let u = y * z;
        if u > SOLVED_LOGIT {
            observed = ObservedFate::Solves;
            break;
        }
        let radius = y * y + norm * norm * z * z;
        if u.abs() < COLLAPSE_LOGIT && u.abs() < prev_u && radius < COLLAPSE_RADIUS_SQ * radius0 {
            observed = ObservedFate::ConvergesToZero;
            break;
        }
        prev_u = u.abs();
    }
    Ok(FateReport {
        region,
        observed,
        agree: observed.matches(region.kind),
        decided_at: t,
        final_y: x[0],
        final_z: x[1],
    })
}

/// One row of a phase-diagram scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FateRecord {
    pub y0: f64,
    pub z0: f64,
    pub norm: f64,
    pub region: PhaseRegion,
    pub observed: ObservedFate,
    pub agree: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSpec {
    pub norm: f64,
    /// Points per axis.
    pub grid: usize,
    /// The grid covers `[-range, range]^2`.
    pub range: f64,
    pub t_end: f64,
    pub step: f64,
    /// Scan the class-2 diagram, obtained by mirroring the `z` axis.
    pub class2: bool,
}

impl Default for ScanSpec {
    fn default() -> Self {
        Self {
            norm: 0.7,
            grid: 41,
            range: 2.0,
            t_end: 4000.0,
            step: 1e-2,
            class2: false,
        }
    }
}

/// `grid` evenly spaced values on `[-range, range]`, computed so that
/// rational grid points come out as the nearest double.
pub fn grid_values(grid: usize, range: f64) -> Vec<f64> {
    if grid == 1 {
        return vec![0.0];
    }
    let m = (grid - 1) as f64;
    (0..grid)
        .map(|i| range * (2.0 * i as f64 - m) / m)
        .collect()
}

/// Classifies and integrates every point of a square grid, in parallel.
/// Rows are ordered by `y0` then `z0`.
pub fn scan(spec: &ScanSpec) -> Result<Vec<FateRecord>> {
    ensure(spec.grid >= 1, "grid", spec.grid as f64, "grid >= 1")?;
    ensure(spec.range > 0.0, "range", spec.range, "range > 0")?;
    let values = grid_values(spec.grid, spec.range);
    let points: Vec<(f64, f64)> = values
        .iter()
        .flat_map(|&y| values.iter().map(move |&z| (y, z)))
        .collect();
    points
        .par_iter()
        .map(|&(y0, z0)| {
            let zm = if spec.class2 { -z0 } else { z0 };
            let report = verify_fate(y0, zm, spec.norm, spec.t_end, spec.step)?;
            Ok(FateRecord {
                y0,
                z0,
                norm: spec.norm,
                region: report.region,
                observed: report.observed,
                agree: report.agree,
            })
        })
        .collect()
}

/// CSV schema: `y0, z0, norm, region, observed, agree`.
pub fn records_to_table(records: &[FateRecord]) -> Table {
    let mut table = Table::new(["y0", "z0", "norm", "region", "observed", "agree"]);
    for r in records {
        table.push(vec![
            r.y0.into(),
            r.z0.into(),
            r.norm.into(),
            r.region.kind.as_str().into(),
            r.observed.as_str().into(),
            r.agree.into(),
        ]);
    }
    table
}
