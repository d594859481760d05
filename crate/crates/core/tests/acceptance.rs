//! End-to-end acceptance checks. Runs as a plain binary so that every
//! criterion prints a PASS/FAIL line whether or not output is captured.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{deep_layers, hinge_vector, logit_flow, rk4_end, rk4_path, Lcg};
use neurodyn::bce::{
    convergence_bound, convergence_time_ratio, hyperbolic_trajectory, solve_degenerate, ClassLabel, ClassSpec,
    ScalarState,
};
use neurodyn::deep::{aligned_initial_logit, solve_deep_logit, DeepConfig};
use neurodyn::hinge::{compare_losses, solve_hinge, time_to_margin};
use neurodyn::ode::integrate_sampled;
use neurodyn::phase::{gated_bce_system, scan, PhaseKind, ScanSpec};
use neurodyn::simulator::{
    compliant_init, degenerate_setup, make_cross_active, make_dataset, mode_fleet, starvation_experiment, train,
    train_with_observer, FleetSpec, ModeMonitor, Sampling, TrainConfig,
};
use neurodyn::starvation::{
    integrate_to_tstar, starvation_bound, starvation_bound_relaxed, table1, StarvationConfig,
};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn table_reproduction() -> Outcome {
    let expect = [91.0, 71.0, 61.0, 51.0, 99.0, 86.0, 72.0, 52.0];
    let t = table1();
    let worst = t
        .rows()
        .iter()
        .zip(&expect)
        .map(|(r, e)| (r[3].as_f64().unwrap() - e).abs())
        .fold(0.0, f64::max);
    check(t.len() == 8 && worst <= 0.5, format!("max deviation {worst:.3} points"))
}

const GRID_U0: [f64; 3] = [0.1, 0.5, 1.0];
const GRID_RATE: [f64; 4] = [0.5, 0.7, 1.0, 2.0];

fn grid_times() -> impl Iterator<Item = (usize, f64)> {
    // Oracle step 1e-4, sampled every 0.5 time units.
    (0..=40).map(|k| (k * 5000, k as f64 * 0.5))
}

fn closed_form_vs_oracle() -> Outcome {
    let mut worst = 0.0f64;
    for &u0 in &GRID_U0 {
        for &rate in &GRID_RATE {
            let path = rk4_path(&logit_flow(rate), &[u0], 20.0, 200_000);
            for (i, t) in grid_times() {
                let u = solve_degenerate(u0, rate, t).map_err(|e| e.to_string())?;
                worst = worst.max((u - path[i][0]).abs());
            }
        }
    }
    check(worst <= 1e-7, format!("max abs error {worst:.2e}"))
}

fn invariant_conservation() -> Outcome {
    let mut rng = Lcg(2024);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let y0 = rng.range(0.05, 2.0);
        let z0 = rng.range(-2.0, 2.0);
        let norm = rng.range(0.2, 2.0);
        let c0 = y0 * y0 - norm * norm * z0 * z0;
        let traj = integrate_sampled(&gated_bce_system(norm), &[y0, z0], 10.0, 1e-4, 100).map_err(|e| e.to_string())?;
        for (_, s) in traj.rows() {
            worst = worst.max((s[0] * s[0] - norm * norm * s[1] * s[1] - c0).abs());
        }
        if c0.abs() > 1e-3 && y0 > norm * z0.abs() {
            let s0 = ScalarState::new(y0, z0, norm).map_err(|e| e.to_string())?;
            let traj = hyperbolic_trajectory(&s0, norm, 1.0, 10.0, 1e-3, 100)
                .map_err(|e| e.to_string())?;
            let (y, z) = (traj.column("y").unwrap(), traj.column("z").unwrap());
            for (a, b) in y.iter().zip(&z) {
                worst = worst.max((a * a - norm * norm * b * b - c0).abs());
            }
        }
    }
    check(worst <= 1e-7, format!("max drift {worst:.2e} over 50 runs"))
}

fn phase_agreement() -> Outcome {
    let records = scan(&ScanSpec::default()).map_err(|e| e.to_string())?;
    let off: Vec<_> = records.iter().filter(|r| r.region.boundary.is_none()).collect();
    let agree = off.iter().filter(|r| r.agree).count();
    let kinds = [PhaseKind::Frozen, PhaseKind::Dies, PhaseKind::ConvergesToZero, PhaseKind::Solves];
    let all_present = kinds.iter().all(|k| records.iter().any(|r| r.region.kind == *k));
    check(
        records.len() == 41 * 41 && agree == off.len() && all_present,
        format!("{agree}/{} off-band points agree, all four regions present: {all_present}", off.len()),
    )
}

fn convergence_bound_holds() -> Outcome {
    let mut violations = 0;
    let mut samples = 0;
    for &u0 in &GRID_U0 {
        for &rate in &GRID_RATE {
            for (_, t) in grid_times() {
                let u = solve_degenerate(u0, rate, t).map_err(|e| e.to_string())?;
                let b = convergence_bound(u0, rate, t).map_err(|e| e.to_string())?;
                samples += 1;
                let ok = if t == 0.0 { (u - b).abs() <= 1e-12 } else { u < b };
                if !ok {
                    violations += 1;
                }
            }
        }
    }
    check(violations == 0, format!("{violations} violations in {samples} samples"))
}

fn time_ratio() -> Outcome {
    let mut worst_equal = 0.0f64;
    let mut worst_unequal = 0.0f64;
    for &(n1, n2) in &[(1.0, 1.0), (2.0, 1.0), (0.7, 1.3)] {
        for &p in &[0.3, 0.5, 0.7] {
            let c1 = ClassSpec::new(n1, p, ClassLabel::One).map_err(|e| e.to_string())?;
            let c2 = ClassSpec::new(n2, 1.0 - p, ClassLabel::Two).map_err(|e| e.to_string())?;
            for &u0 in &[0.05, 0.1, 0.3] {
                let r = convergence_time_ratio(&c1, &c2, u0, u0, 1e-6).map_err(|e| e.to_string())?;
                worst_equal = worst_equal.max((r.exact - n1 / n2 * p / (1.0 - p)).abs());
                for &delta in &[1e-4, 1e-6] {
                    let r = convergence_time_ratio(&c1, &c2, u0, 2.0 * u0, delta).map_err(|e| e.to_string())?;
                    worst_unequal = worst_unequal.max((r.exact / r.approx - 1.0).abs());
                }
            }
        }
    }
    check(
        worst_equal <= 1e-9 && worst_unequal <= 0.05,
        format!("equal start error {worst_equal:.1e}, unequal start relative gap {:.2}%", 100.0 * worst_unequal),
    )
}

fn deep_consistency() -> Outcome {
    let c = DeepConfig::new(2, 1.3, 0.2).map_err(|e| e.to_string())?;
    let traj = solve_deep_logit(&c, 8.0, 1e-4).map_err(|e| e.to_string())?;
    let mut shallow = 0.0f64;
    for (t, s) in traj.rows() {
        shallow = shallow.max((s[0] - solve_degenerate(0.2, 1.3, t).unwrap()).abs());
    }
    let (norm, z0) = (0.8, 0.6);
    let start = vec![z0, z0, norm * z0];
    let path = rk4_path(&deep_layers(norm), &start, 5.0, 50_000);
    let u0 = aligned_initial_logit(z0, norm, 3).map_err(|e| e.to_string())?;
    let scalar = solve_deep_logit(&DeepConfig::new(3, norm, u0).map_err(|e| e.to_string())?, 5.0, 1e-4)
        .map_err(|e| e.to_string())?;
    let mut layered = 0.0f64;
    for (k, s) in path.iter().enumerate() {
        layered = layered.max((s.iter().product::<f64>() - scalar.state(k)[0]).abs());
    }
    check(
        shallow <= 1e-7 && layered <= 1e-6,
        format!("two layers {shallow:.1e}, three layers vs per-layer {layered:.1e}"),
    )
}

fn hinge_dynamics() -> Outcome {
    // Vector oracle: three points summing to X in five dimensions.
    let sum = vec![1.1, 0.4, -0.2, 0.3, 0.5];
    let norm = sum.iter().map(|v| v * v).sum::<f64>().sqrt();
    let (w0, z0, p) = (vec![0.2, 0.1, 0.0, -0.1, 0.2], 0.3, 0.5);
    let y0: f64 = w0.iter().zip(&sum).map(|(a, b)| a * b).sum();
    let t_m = time_to_margin(y0, z0, norm, p).map_err(|e| e.to_string())?;
    let mut start = w0.clone();
    start.push(z0);
    let mut vector_err = 0.0f64;
    for k in 1..=10 {
        let t = t_m * k as f64 / 11.0;
        let o = rk4_end(&hinge_vector(sum.clone(), p), &start, t, 20_000);
        let u = o[5] * o[..5].iter().zip(&sum).map(|(a, b)| a * b).sum::<f64>();
        vector_err = vector_err.max((solve_hinge(y0, z0, norm, p, t).unwrap() - u).abs());
    }

    let (n, p2, zc) = (1.3, 0.4, 0.3);
    let tc = time_to_margin(n * zc, zc, n, p2).map_err(|e| e.to_string())?;
    let u0 = n * zc * zc;
    let mut slope_err = 0.0f64;
    for k in 1..20 {
        let t = tc * k as f64 / 20.0;
        let slope = (solve_hinge(n * zc, zc, n, p2, t).unwrap().ln() - u0.ln()) / t;
        slope_err = slope_err.max((slope - 2.0 * p2 * n).abs());
    }

    let deltas = [0.3, 0.1, 1e-2, 1e-3, 1e-4, 1e-6];
    let mut slower = 0;
    let mut cells = 0;
    for &u0 in &[0.05, 0.1, 0.2] {
        for &norm in &[0.5, 1.0, 2.0] {
            for &p in &[0.3, 0.5, 0.7] {
                for r in compare_losses(u0, norm, p, &deltas, false).map_err(|e| e.to_string())? {
                    cells += 1;
                    if r.t_hinge >= r.t_bce {
                        slower += 1;
                    }
                }
            }
        }
    }
    check(
        vector_err <= 1e-7 && slope_err <= 1e-9 && slower == 0,
        format!("vector oracle {vector_err:.1e}, slope {slope_err:.1e}, hinge not faster in {slower}/{cells} cells"),
    )
}

fn starvation_trajectory_bound() -> Outcome {
    let lambdas = [0.05, 0.1, 0.2, 0.5, 0.9];
    let deltas = [0.01, 1e-3, 1e-4];
    let mut ordered = 0;
    let mut relaxed = 0;
    let mut violations = 0;
    for &(a0, b0, z0) in &[(0.1, 0.005, 0.1), (0.1, 0.05, 0.1)] {
        for &lambda in &lambdas {
            for &delta in &deltas {
                let c = StarvationConfig::new(lambda, delta, a0, b0, z0).map_err(|e| e.to_string())?;
                let (_, s) = integrate_to_tstar(&c).map_err(|e| e.to_string())?;
                let bound = if c.ordered() {
                    ordered += 1;
                    starvation_bound(lambda, delta)
                } else {
                    relaxed += 1;
                    starvation_bound_relaxed(lambda, delta, s.z, a0, b0)
                }
                .map_err(|e| e.to_string())?;
                if s.conf_x2 > bound {
                    violations += 1;
                }
            }
        }
    }
    check(
        violations == 0,
        format!("{violations} violations ({ordered} plain-bound cells, {relaxed} relaxed-bound cells)"),
    )
}

fn mode_fleets() -> Outcome {
    let binary = mode_fleet(&FleetSpec::default()).map_err(|e| e.to_string())?;
    let multi = mode_fleet(&FleetSpec {
        runs: 100,
        hidden: vec![3, 6],
        classes: Some(3),
        dim: 5,
        ..FleetSpec::default()
    })
    .map_err(|e| e.to_string())?;

    let ds = make_dataset(99, 8, 10, 30.0, (0.5, 1.5)).map_err(|e| e.to_string())?;
    let mut params = compliant_init(&ds, 4, false, 99).map_err(|e| e.to_string())?;
    make_cross_active(&mut params, 0);
    let mut monitor = ModeMonitor::new(&ds);
    train_with_observer(&params, &ds, &TrainConfig::new(0.1, 200, 99), |s, p| monitor.observe(s, p))
        .map_err(|e| e.to_string())?;
    let control = monitor.report().violations();

    check(
        binary.runs == 1000 && binary.report.violations() == 0 && multi.report.violations() == 0 && control > 0,
        format!(
            "binary {} violations in {} runs, multi-class {} in {} runs, negative control {control}",
            binary.report.violations(),
            binary.runs,
            multi.report.violations(),
            multi.runs
        ),
    )
}

/// Largest relative gap between simulated class-1 logits and the closed
/// form, at 10 checkpoints evenly spaced in nominal time up to 20, with
/// time measured as `lr * (class-1 updates)`.
fn continuous_gap(lr: f64) -> Result<f64, String> {
    let (params, ds) = degenerate_setup(1.0, 0.5).map_err(|e| e.to_string())?;
    let steps = (20.0 / (lr * 0.5)).round() as u64;
    let config = TrainConfig {
        sampling: Sampling::PerClassRate(0.5),
        record_every: steps / 10,
        ..TrainConfig::new(lr, steps, 11)
    };
    let run = train(&params, &ds, &config).map_err(|e| e.to_string())?;
    let checkpoints = &run.history.records[1..];
    if checkpoints.len() != 10 {
        return Err(format!("expected 10 checkpoints, got {}", checkpoints.len()));
    }
    let mut worst = 0.0f64;
    for r in checkpoints {
        let exact = solve_degenerate(0.25, 1.0, lr * r.updates[0] as f64).map_err(|e| e.to_string())?;
        worst = worst.max((r.logits[0] - exact).abs() / exact);
    }
    Ok(worst)
}

fn continuous_limit() -> Outcome {
    let g1 = continuous_gap(1e-4)?;
    let g2 = continuous_gap(5e-5)?;
    let ratio = g2 / g1;
    check(
        g1 <= 0.01 && (0.4..=0.6).contains(&ratio),
        format!("gap {g1:.2e} at lr 1e-4, {g2:.2e} at 5e-5 (ratio {ratio:.3})"),
    )
}

fn starvation_experiment_probe() -> Outcome {
    let o = starvation_experiment(0.1, 1e-4, 7, 0.01, 2_000_000).map_err(|e| e.to_string())?;
    check(
        o.conf_probe <= 0.75,
        format!("probe confidence {:.4} after {} steps", o.conf_probe, o.steps),
    )
}

type Criterion = (&'static str, Option<Duration>, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("starvation bound table", Some(Duration::from_secs(1)), table_reproduction),
        ("closed form vs oracle", Some(Duration::from_secs(10)), closed_form_vs_oracle),
        ("hyperbolic invariant", Some(Duration::from_secs(30)), invariant_conservation),
        ("phase diagram fates", Some(Duration::from_secs(120)), phase_agreement),
        ("convergence bound", None, convergence_bound_holds),
        ("convergence time ratio", None, time_ratio),
        ("deep logit equation", None, deep_consistency),
        ("hinge dynamics", None, hinge_dynamics),
        ("starvation trajectory bound", Some(Duration::from_secs(60)), starvation_trajectory_bound),
        ("mode independence fleets", None, mode_fleets),
        ("continuous limit", Some(Duration::from_secs(120)), continuous_limit),
        ("starvation experiment", None, starvation_experiment_probe),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(d), Some(l)) if elapsed > *l => Err(format!("{d}; too slow, limit {l:?}")),
            (o, _) => o,
        };
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} criterion {}: {name}: {detail} [{:.2}s]", i + 1, elapsed.as_secs_f64());
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
