//! Reference implementations used only by the tests. None of them share
//! code with the library.

#![allow(dead_code)]

pub const GAMMA: f64 = 0.577_215_664_901_532_9;

pub fn logistic(u: f64) -> f64 {
    1.0 / (1.0 + (-u).exp())
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        left + right + (left + right - whole) / 15.0
    } else {
        simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Adaptive Simpson quadrature.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// `Ei(x) = gamma + ln x + int_0^x (e^t - 1)/t dt` by quadrature.
pub fn ei_quadrature(x: f64) -> f64 {
    let f = |t: f64| if t == 0.0 { 1.0 } else { t.exp_m1() / t };
    GAMMA + x.ln() + integrate(&f, 0.0, x, 1e-15 * x.exp().max(1.0))
}

/// Classic RK4 on `x' = f(x)` to `t_end` with `n` equal steps; returns the
/// states at every step (including the start).
pub fn rk4_path(f: &dyn Fn(&[f64]) -> Vec<f64>, x0: &[f64], t_end: f64, n: usize) -> Vec<Vec<f64>> {
    let h = t_end / n as f64;
    let mut x = x0.to_vec();
    let mut out = vec![x.clone()];
    let axpy = |x: &[f64], k: &[f64], a: f64| -> Vec<f64> { x.iter().zip(k).map(|(xi, ki)| xi + a * ki).collect() };
    for _ in 0..n {
        let k1 = f(&x);
        let k2 = f(&axpy(&x, &k1, h / 2.0));
        let k3 = f(&axpy(&x, &k2, h / 2.0));
        let k4 = f(&axpy(&x, &k3, h));
        for i in 0..x.len() {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        out.push(x.clone());
    }
    out
}

pub fn rk4_end(f: &dyn Fn(&[f64]) -> Vec<f64>, x0: &[f64], t_end: f64, n: usize) -> Vec<f64> {
    rk4_path(f, x0, t_end, n).pop().unwrap()
}

/// Cross-entropy flow of one mode, state `(y, z)`.
pub fn bce_mode(norm: f64, rate: f64) -> impl Fn(&[f64]) -> Vec<f64> {
    move |s: &[f64]| {
        let g = rate * logistic(-s[0] * s[1]);
        vec![norm * norm * s[1] * g, s[0] * g]
    }
}

/// Scalar degenerate logit equation `u' = 2 rate u sigma(-u)`.
pub fn logit_flow(rate: f64) -> impl Fn(&[f64]) -> Vec<f64> {
    move |s: &[f64]| vec![2.0 * rate * s[0] * logistic(-s[0])]
}

/// Class-2 flow, state `(y, z)` with `v = y z < 0` pushed down.
pub fn bce_mode_class2(norm: f64, rate: f64) -> impl Fn(&[f64]) -> Vec<f64> {
    move |s: &[f64]| {
        let g = rate * logistic(s[0] * s[1]);
        vec![-norm * norm * s[1] * g, -s[0] * g]
    }
}

/// Full-batch flow for `m` orthogonal points of norm `norm`: state
/// `(y_1..y_m, z)`.
pub fn orthogonal_batch(m: usize, norm: f64) -> impl Fn(&[f64]) -> Vec<f64> {
    move |s: &[f64]| {
        let z = s[m];
        let mut d = vec![0.0; m + 1];
        for i in 0..m {
            let g = logistic(-z * s[i]);
            d[i] = norm * norm * z * g;
            d[m] += s[i] * g;
        }
        d
    }
}

/// Per-layer flow of the deep network: state `(z, z_1 .. z_{N-2}, y)`,
/// logit `z * prod z_i * y`.
pub fn deep_layers(norm: f64) -> impl Fn(&[f64]) -> Vec<f64> {
    move |s: &[f64]| {
        let u: f64 = s.iter().product();
        let g = logistic(-u);
        let k = s.len();
        let mut d = vec![0.0; k];
        for i in 0..k {
            let others: f64 = s.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, v)| v).product();
            d[i] = others * g;
        }
        d[k - 1] *= norm * norm;
        d
    }
}

/// Full-batch hinge flow before the margin on the vector weights `w` and
/// output `z`, for a class whose points sum to `sum`: state `(w.., z)`.
pub fn hinge_vector(sum: Vec<f64>, rate: f64) -> impl Fn(&[f64]) -> Vec<f64> {
    move |s: &[f64]| {
        let d = sum.len();
        let z = s[d];
        let y: f64 = s[..d].iter().zip(&sum).map(|(a, b)| a * b).sum();
        let mut out: Vec<f64> = sum.iter().map(|x| rate * z * x).collect();
        out.push(rate * y);
        out
    }
}

/// Starvation projections `(alpha, beta, z)` with unit features.
pub fn starvation_flow(lambda: f64) -> impl Fn(&[f64]) -> Vec<f64> {
    move |s: &[f64]| {
        let (a, b, z) = (s[0], s[1], s[2]);
        let p = lambda * logistic(-z * (a + b));
        let q = (1.0 - lambda) * logistic(-z * a);
        vec![z * (p + q), z * p, (a + b) * p + a * q]
    }
}

/// Tiny deterministic generator (64-bit LCG) for oracle inputs.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}
