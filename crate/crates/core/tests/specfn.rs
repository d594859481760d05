mod common;

use neurodyn::specfn::*;
use proptest::prelude::*;

#[test]
fn ei_reference_values() {
    assert!((ei(1.0).unwrap() - 1.895_117_816_355_936_8).abs() < 1e-14);
    assert!((ei(2.0).unwrap() - 4.954_234_356_001_890_2).abs() < 1e-13);
    assert!((log_plus_ei(0.5).unwrap() + 0.238_927_275_696_771_73).abs() < 1e-14);
}

#[test]
fn ei_matches_quadrature() {
    for &x in &[1e-6, 1e-3, 0.1, 0.5, 1.0, 3.0, 7.5, 15.0, 30.0, 39.9, 40.1, 60.0] {
        let a = ei(x).unwrap();
        let b = common::ei_quadrature(x);
        assert!(((a - b) / b).abs() < 1e-11, "x = {x}: {a} vs {b}");
    }
}

#[test]
fn ei_large_argument_asymptotics() {
    let x = 700.0;
    let v = ei(x).unwrap();
    let lead = x.exp() / x;
    assert!(v > lead && v < lead * (1.0 + 2.0 / x));
}

#[test]
fn inverse_at_very_negative_target() {
    let u = inverse_log_plus_ei(-50.0).unwrap();
    assert!((log_plus_ei(u).unwrap() + 50.0).abs() < 1e-12 * 50.0);
    // For small u, log(u) + Ei(u) ~ 2 log(u) + gamma.
    let approx = ((-50.0 - EULER_GAMMA) / 2.0).exp();
    assert!((u / approx - 1.0).abs() < 1e-9);
}

#[test]
fn inverse_is_monotone() {
    let vs: Vec<f64> = (0..200).map(|i| -30.0 + 0.5 * i as f64).collect();
    let us: Vec<f64> = vs.iter().map(|&v| inverse_log_plus_ei(v).unwrap()).collect();
    assert!(us.windows(2).all(|w| w[1] > w[0]));
}

proptest! {
    #[test]
    fn inverse_round_trip(v in -200.0f64..1e6) {
        let u = inverse_log_plus_ei(v).unwrap();
        let back = log_plus_ei(u).unwrap();
        prop_assert!((back - v).abs() <= 1e-10 * v.abs().max(1.0), "v = {v}, back = {back}");
    }

    #[test]
    fn forward_round_trip(u in 1e-8f64..600.0) {
        let v = log_plus_ei(u).unwrap();
        let u2 = inverse_log_plus_ei(v).unwrap();
        prop_assert!(((u2 - u) / u).abs() <= 1e-10);
    }

    #[test]
    fn sigmoid_symmetry(u in -700.0f64..700.0) {
        prop_assert!((sigmoid(u) + sigmoid(-u) - 1.0).abs() < 1e-15);
        prop_assert!((0.0..=1.0).contains(&sigmoid(u)));
    }

    #[test]
    fn confidence_logit_inverts_sigmoid(delta in 1e-12f64..0.5) {
        let l = confidence_logit(delta).unwrap();
        prop_assert!((sigmoid(-l) - delta).abs() <= 1e-12 * delta.max(1e-3));
    }
}
