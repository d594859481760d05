mod common;

use common::{bce_mode, bce_mode_class2, logit_flow, orthogonal_batch, rk4_end, rk4_path};
use neurodyn::bce::*;
use neurodyn::specfn::{confidence_logit, sigmoid_inverse};
use neurodyn::{Error, PhaseKind};
use proptest::prelude::*;

#[test]
fn degenerate_matches_logit_oracle() {
    let oracle = rk4_end(&logit_flow(0.7), &[0.5], 5.0, 500_000)[0];
    let u = solve_degenerate(0.5, 0.7, 5.0).unwrap();
    assert!((u - oracle).abs() < 1e-7, "{u} vs {oracle}");
}

#[test]
fn degenerate_below_log_bound_at_long_times() {
    let u = solve_degenerate(0.5, 1.0, 100.0).unwrap();
    assert!(u <= 2.0 * (100.0 + 0.25f64.exp()).ln());
}

#[test]
fn time_to_99_percent_confidence() {
    let uf = sigmoid_inverse(0.99).unwrap();
    let t = time_to_logit(0.1, uf, 1.0).unwrap();
    assert!((t - 17.679_575_094_691_856).abs() < 1e-10);
    // The oracle crosses the same level within one step of that time.
    let h = 1e-4;
    let n = (t / h).floor() as usize;
    let path = rk4_path(&logit_flow(1.0), &[0.1], n as f64 * h, n);
    let before = path[n][0];
    let after = rk4_end(&logit_flow(1.0), &[before], h, 1)[0];
    assert!(before < uf && after >= uf);
}

#[test]
fn bound_reference_value() {
    let b = convergence_bound(0.5, 1.0, 10.0).unwrap();
    assert!((b - 4.846_776_091_181_86).abs() < 1e-12);
}

#[test]
fn hyperbolic_matches_mode_oracle() {
    let (norm, y0, z0) = (0.7, 1.0, 0.5);
    let s = ScalarState::new(y0, z0, norm).unwrap();
    assert_eq!(s.branch, Branch::AboveAsymptote);
    let out = solve_hyperbolic(&s, norm, 1.0, 4.0).unwrap();
    let o = rk4_end(&bce_mode(norm, 1.0), &[y0, z0], 4.0, 400_000);
    assert!((out.y - o[0]).abs() < 1e-6 && (out.z - o[1]).abs() < 1e-6);
}

#[test]
fn hyperbolic_other_branches_and_rates() {
    // Below the asymptote, and a negative z0 start that still solves.
    for &(y0, z0, norm, p) in &[(0.2, 0.5, 0.7, 1.0), (1.2, -0.4, 0.7, 1.0), (0.9, 0.3, 1.5, 0.3)] {
        let s = ScalarState::new(y0, z0, norm).unwrap();
        let out = solve_hyperbolic(&s, norm, p, 3.0).unwrap();
        let o = rk4_end(&bce_mode(norm, p), &[y0, z0], 3.0, 300_000);
        assert!(
            (out.y - o[0]).abs() < 1e-6 && (out.z - o[1]).abs() < 1e-6,
            "({y0}, {z0}): {:?} vs {:?}",
            (out.y, out.z),
            o
        );
    }
}

#[test]
fn hyperbolic_start_and_invariant() {
    let norm = 0.7;
    let s = ScalarState::new(1.0, 0.5, norm).unwrap();
    let at0 = solve_hyperbolic(&s, norm, 1.0, 0.0).unwrap();
    assert!((at0.y - 1.0).abs() < 1e-10 && (at0.z - 0.5).abs() < 1e-10);
    let traj = hyperbolic_trajectory(&s, norm, 1.0, 10.0, 1e-3, 10).unwrap();
    let (yi, zi) = (traj.column_index("y").unwrap(), traj.column_index("z").unwrap());
    let c = s.invariant(norm);
    for (_, row) in traj.rows() {
        let inv = row[yi] * row[yi] - norm * norm * row[zi] * row[zi];
        assert!((inv - c).abs() <= 1e-7);
    }
}

#[test]
fn evolve_rejects_non_solving_starts() {
    let s = ScalarState::new(-0.5, 1.0, 0.7).unwrap();
    assert!(matches!(
        evolve(&s, 0.7, 1.0, 1.0),
        Err(Error::Region {
            found: PhaseKind::Frozen,
            ..
        })
    ));
}

#[test]
fn ratio_examples() {
    let one = |n, p| ClassSpec::new(n, p, ClassLabel::One).unwrap();
    let two = |n, p| ClassSpec::new(n, p, ClassLabel::Two).unwrap();

    let r = convergence_time_ratio(&one(1.0, 0.5), &two(1.0, 0.5), 0.3, 0.3, 1e-3).unwrap();
    assert!((r.exact - 1.0).abs() < 1e-12 && r.approx == 1.0);

    let r = convergence_time_ratio(&one(2.0, 0.5), &two(1.0, 0.5), 0.3, 0.3, 1e-6).unwrap();
    assert!((r.exact - 2.0).abs() < 1e-9 && r.approx == 2.0);

    let r = convergence_time_ratio(&one(1.0, 0.7), &two(1.0, 0.3), 0.1, 0.2, 1e-4).unwrap();
    assert!((r.approx - 7.0 / 3.0).abs() < 1e-12);
    assert!((r.exact / r.approx - 1.0).abs() < 0.05, "{:?}", r);
}

#[test]
fn ratio_uses_class_times() {
    let c1 = ClassSpec::new(1.3, 0.6, ClassLabel::One).unwrap();
    let c2 = ClassSpec::new(0.8, 0.4, ClassLabel::Two).unwrap();
    let r = convergence_time_ratio(&c1, &c2, 0.2, 0.5, 1e-3).unwrap();
    let target = confidence_logit(1e-3).unwrap();
    // Class 2 reaches the target after t2; the mirrored solution agrees.
    let v = solve_degenerate_for(ClassLabel::Two, -0.5, 0.8 * 0.4, r.t2).unwrap();
    assert!((v + target).abs() < 1e-8);
    let u = solve_degenerate(0.2, 1.3 * 0.6, r.t1).unwrap();
    assert!((u - target).abs() < 1e-8);
}

#[test]
fn top_left_logit_rises_toward_zero() {
    assert_eq!(solve_top_left(-1.0, 1.0, 0.0).unwrap(), -1.0);
    let u = solve_top_left(-1.0, 1.0, 20.0).unwrap();
    assert!(u > -1.0 && u < 0.0);
    let (lo, hi) = top_left_time_bounds(-1.0, u, 1.0).unwrap();
    assert!(lo <= 20.0 && 20.0 <= hi, "{lo} {hi}");
    let traj = neurodyn::ode::integrate(&top_left_system(1.0), &[-1.0], 100.0, 1e-4).unwrap();
    let path = traj.column("x0").unwrap();
    assert!(path.iter().all(|&v| v < 0.0));
    assert!(path.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn multi_neuron_reduces_to_single() {
    let traj = solve_multi_neuron(&[0.4], 1.2, 5.0, 1e-4).unwrap();
    let u = traj.last_state()[0];
    assert!((u - solve_degenerate(0.4, 1.2, 5.0).unwrap()).abs() < 1e-8);
}

#[test]
fn multi_neuron_sum_and_ratio() {
    let traj = solve_multi_neuron(&[0.2, 0.3], 1.0, 10.0, 1e-4).unwrap();
    let (i1, i2, is) = (
        traj.column_index("u1").unwrap(),
        traj.column_index("u2").unwrap(),
        traj.column_index("sum").unwrap(),
    );
    for (k, (t, row)) in traj.rows().enumerate() {
        assert!((row[i1] / row[i2] - 2.0 / 3.0).abs() <= 1e-7);
        if k % 5000 == 0 {
            assert!((row[is] - solve_degenerate(0.5, 1.0, t).unwrap()).abs() < 1e-6);
        }
    }
}

#[test]
fn orthogonal_class_matches_batch_oracle() {
    let (m, norm, z0) = (3usize, 1.0, 0.6);
    // c = m y0^2 - |x|^2 z0^2 = 0.
    let y0 = norm * z0 / (m as f64).sqrt();
    let mut start = vec![y0; m];
    start.push(z0);
    let rate = orthogonal_class_rate(m, norm).unwrap() / 2.0;
    for &t in &[1.0, 4.0] {
        let o = rk4_end(&orthogonal_batch(m, norm), &start, t, (t * 1e5) as usize);
        let u = solve_degenerate(y0 * z0, rate, t).unwrap();
        assert!((o[0] * o[m] - u).abs() < 1e-6);
    }
}

#[test]
fn relaxed_reduces_without_cross_component() {
    let traj = solve_relaxed_h2(0.8, 0.0, 0.5, 3.0, 1e-4).unwrap();
    let last = traj.last_state();
    assert_eq!(last[1], 0.0);
    let o = rk4_end(&bce_mode(1.0, 1.0), &[0.8, 0.5], 3.0, 30_000);
    assert!((last[0] - o[0]).abs() < 1e-9 && (last[2] - o[1]).abs() < 1e-9);
}

#[test]
fn relaxed_competition_then_free_learning() {
    let traj = solve_relaxed_h2(0.5, 0.5, 0.5, 30.0, 1e-4).unwrap();
    let alpha = traj.column("alpha").unwrap();
    let beta = traj.column("beta").unwrap();
    let az = traj.column("alpha_z").unwrap();
    let cross = beta.iter().position(|&b| b <= 0.0).expect("beta reaches zero");
    assert!(beta[..=cross].windows(2).all(|w| w[1] < w[0]));
    assert!(alpha.windows(2).all(|w| w[1] > w[0]));
    // After the crossing (alpha, z) evolve freely along their hyperbola.
    let t0 = traj.times()[cross];
    let s = ScalarState::new(alpha[cross], traj.state(cross)[2], 1.0).unwrap();
    for k in (cross..traj.len()).step_by(10_000) {
        let expect = evolve(&s, 1.0, 1.0, traj.times()[k] - t0).unwrap().logit();
        assert!((az[k] - expect).abs() < 1e-5, "t = {}", traj.times()[k]);
    }
}

#[test]
fn class_two_oracle_is_mirror() {
    let norm = 0.9;
    let z0 = 0.4;
    let o1 = rk4_end(&bce_mode(norm, 0.6), &[norm * z0, z0], 6.0, 60_000);
    let o2 = rk4_end(&bce_mode_class2(norm, 0.6), &[norm * z0, -z0], 6.0, 60_000);
    let v = solve_degenerate_for(ClassLabel::Two, -norm * z0 * z0, norm * 0.6, 6.0).unwrap();
    assert!((o1[0] * o1[1] + o2[0] * o2[1]).abs() < 1e-8);
    assert!((o2[0] * o2[1] - v).abs() < 1e-8);
}

#[test]
fn degenerate_curve_has_sigmoidal_shape() {
    let times: Vec<f64> = (0..=2000).map(|i| i as f64 * 0.01).collect();
    for &u0 in &[0.1, 0.5, 1.0] {
        let pts = degenerate_curve(ClassLabel::One, u0, 1.0, &times).unwrap();
        let d: Vec<f64> = pts.windows(2).map(|w| (w[1].u - w[0].u) / 0.01).collect();
        assert!(d.iter().all(|&v| v > 0.0));
        let peak = d
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert!(peak > 0 && peak < d.len() - 1);
        assert!(d[..=peak].windows(2).all(|w| w[1] >= w[0]));
        assert!(d[peak..].windows(2).all(|w| w[1] <= w[0]));
        for p in &pts {
            assert_eq!(p.p_correct, neurodyn::specfn::sigmoid(p.u));
        }
    }
}

proptest! {
    #[test]
    fn time_and_logit_are_inverse(u0 in 0.01f64..3.0, gain in 0.0f64..30.0, rate in 0.1f64..3.0) {
        let uf = u0 + gain;
        let t = time_to_logit(u0, uf, rate).unwrap();
        let back = solve_degenerate(u0, rate, t).unwrap();
        prop_assert!((back - uf).abs() <= 1e-8 * uf.max(1.0));
    }

    #[test]
    fn rate_and_time_are_interchangeable(u0 in 0.01f64..3.0, r in 0.1f64..3.0, k in 0.1f64..10.0, t in 0.0f64..20.0) {
        let a = solve_degenerate(u0, k * r, t).unwrap();
        let b = solve_degenerate(u0, r, k * t).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }

    #[test]
    fn logit_increases_in_time(u0 in 0.01f64..3.0, rate in 0.1f64..3.0, t in 0.0f64..50.0, dt in 1e-3f64..5.0) {
        prop_assert!(solve_degenerate(u0, rate, t + dt).unwrap() > solve_degenerate(u0, rate, t).unwrap());
    }

    #[test]
    fn branch_classification_is_consistent(y in -3.0f64..3.0, z in -3.0f64..3.0, norm in 0.1f64..3.0) {
        let s = ScalarState::new(y, z, norm).unwrap();
        prop_assert!(s.c >= 0.0);
        prop_assert_eq!(s.branch == Branch::Degenerate, s.c <= 1e-12 * (y * y + norm * norm * z * z));
    }
}
