//! Linearly separable datasets satisfying the sign conditions on inner
//! products: positive within a class, non-positive across classes.

use std::f64::consts::PI;
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

pub const DATASET_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct SeparableDataset {
    dim: usize,
    classes: Vec<Vec<Vec<f64>>>,
}

/// Number of inner products checked by [`SeparableDataset::verify`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeparabilityReport {
    pub within_pairs: usize,
    pub cross_pairs: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetFile {
    version: u32,
    dim: usize,
    classes: Vec<Vec<Vec<f64>>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl SeparableDataset {
    /// Builds a dataset and checks every pair of points.
    pub fn new(classes: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        if classes.len() < 2 {
            return Err(Error::Dataset("need at least two classes".into()));
        }
        if classes.iter().any(Vec::is_empty) {
            return Err(Error::Dataset("every class needs at least one point".into()));
        }
        let dim = classes[0][0].len();
        if dim == 0 || classes.iter().flatten().any(|x| x.len() != dim) {
            return Err(Error::Dataset("points must share a non-zero dimension".into()));
        }
        if classes.iter().flatten().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Dataset("coordinates must be finite".into()));
        }
        let ds = Self { dim, classes };
        ds.verify()?;
        Ok(ds)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn class(&self, k: usize) -> &[Vec<f64>] {
        &self.classes[k]
    }

    pub fn class1(&self) -> &[Vec<f64>] {
        &self.classes[0]
    }

    pub fn class2(&self) -> &[Vec<f64>] {
        &self.classes[1]
    }

    pub fn classes(&self) -> &[Vec<Vec<f64>>] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Checks every distinct pair: within-class products must be positive,
    /// cross-class products non-positive.
    pub fn verify(&self) -> Result<SeparabilityReport> {
        let mut report = SeparabilityReport {
            within_pairs: 0,
            cross_pairs: 0,
        };
        for (k, class) in self.classes.iter().enumerate() {
            for (i, a) in class.iter().enumerate() {
                for b in &class[i + 1..] {
                    let p = dot(a, b);
                    if !(p > 0.0) {
                        return Err(Error::Dataset(format!("two points of class {} have inner product {p}", k + 1)));
                    }
                    report.within_pairs += 1;
                }
                for (j, other) in self.classes.iter().enumerate().skip(k + 1) {
                    for b in other {
                        let p = dot(a, b);
                        if p > 0.0 {
                            return Err(Error::Dataset(format!(
                                "points of classes {} and {} have inner product {p}",
                                k + 1,
                                j + 1
                            )));
                        }
                        report.cross_pairs += 1;
                    }
                }
            }
        }
        Ok(report)
    }

    /// JSON of the form `{"version": 1, "dim": d, "classes": [[[..], ..], ..]}`.
    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        let file = DatasetFile {
            version: DATASET_FORMAT_VERSION,
            dim: self.dim,
            classes: self.classes.clone(),
        };
        serde_json::to_writer_pretty(out, &file)?;
        Ok(())
    }

    pub fn read_json<R: Read>(input: R) -> Result<Self> {
        let file: DatasetFile = serde_json::from_reader(input)?;
        if file.version != DATASET_FORMAT_VERSION {
            return Err(Error::Dataset(format!("unsupported dataset version {}", file.version)));
        }
        let ds = Self::new(file.classes)?;
        if ds.dim != file.dim {
            return Err(Error::Dataset(format!("declared dim {} but points have dim {}", file.dim, ds.dim)));
        }
        Ok(ds)
    }
}

fn gaussian(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

fn normalize(v: &mut [f64]) {
    let n = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let mut v = gaussian(rng, d);
        if dot(&v, &v) > 1e-12 {
            normalize(&mut v);
            return v;
        }
    }
}

/// Unit vector orthogonal to the unit vector `axis`.
fn random_orthogonal(rng: &mut ChaCha8Rng, axis: &[f64]) -> Vec<f64> {
    loop {
        let mut v = gaussian(rng, axis.len());
        let k = dot(&v, axis);
        v.iter_mut().zip(axis).for_each(|(x, a)| *x -= k * a);
        if dot(&v, &v) > 1e-12 {
            normalize(&mut v);
            return v;
        }
    }
}

fn cone_sample(rng: &mut ChaCha8Rng, axis: &[f64], half_angle: f64, norm_range: (f64, f64)) -> Vec<f64> {
    let theta = if half_angle > 0.0 {
        rng.random_range(0.0..half_angle)
    } else {
        0.0
    };
    let norm = if norm_range.1 > norm_range.0 {
        rng.random_range(norm_range.0..norm_range.1)
    } else {
        norm_range.0
    };
    let u = random_orthogonal(rng, axis);
    let (s, c) = theta.sin_cos();
    axis.iter().zip(&u).map(|(a, b)| norm * (c * a + s * b)).collect()
}

fn check_common(d: usize, n_per_class: usize, norm_range: (f64, f64)) -> Result<()> {
    ensure(d >= 2, "d", d as f64, "d >= 2")?;
    ensure(n_per_class >= 1, "n_per_class", n_per_class as f64, "n >= 1")?;
    ensure(norm_range.0 > 0.0 && norm_range.0.is_finite(), "norm_range.0", norm_range.0, "a positive lower norm")?;
    ensure(
        norm_range.1 >= norm_range.0 && norm_range.1.is_finite(),
        "norm_range.1",
        norm_range.1,
        "an upper norm >= the lower one",
    )
}

/// Two-class dataset. Class 1 lies in a cone of the given half-angle about a
/// random unit axis; class 2 is the negation of an independent sample from
/// the same cone. Any half-angle below 45 degrees keeps every within-class
/// angle acute and every cross-class angle obtuse.
pub fn make_dataset(
    seed: u64,
    d: usize,
    n_per_class: usize,
    cone_half_angle_deg: f64,
    norm_range: (f64, f64),
) -> Result<SeparableDataset> {
    check_common(d, n_per_class, norm_range)?;
    ensure(
        (0.0..45.0).contains(&cone_half_angle_deg),
        "cone_half_angle_deg",
        cone_half_angle_deg,
        "0 <= angle < 45",
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = cone_half_angle_deg * PI / 180.0;
    let axis = random_unit(&mut rng, d);
    let class1 = (0..n_per_class)
        .map(|_| cone_sample(&mut rng, &axis, half, norm_range))
        .collect();
    let class2 = (0..n_per_class)
        .map(|_| cone_sample(&mut rng, &axis, half, norm_range).iter().map(|v| -v).collect())
        .collect();
    SeparableDataset::new(vec![class1, class2])
}

/// Largest cone half-angle, in degrees, that keeps `classes` cones about the
/// vertices of a regular simplex pairwise obtuse.
pub fn max_multiclass_half_angle(classes: usize) -> f64 {
    let between = (-1.0 / (classes as f64 - 1.0)).acos() * 180.0 / PI;
    ((between - 90.0) / 2.0).min(45.0)
}

/// `C`-class dataset with cones about the vertices of a randomly rotated
/// regular simplex (pairwise axis angle `acos(-1 / (C - 1))`). Needs
/// `d >= C` and a half-angle below [`max_multiclass_half_angle`].
pub fn make_multiclass_dataset(
    seed: u64,
    d: usize,
    classes: usize,
    n_per_class: usize,
    cone_half_angle_deg: f64,
    norm_range: (f64, f64),
) -> Result<SeparableDataset> {
    check_common(d, n_per_class, norm_range)?;
    ensure(classes >= 2, "classes", classes as f64, "C >= 2")?;
    ensure(d >= classes, "d", d as f64, "d >= C")?;
    let limit = max_multiclass_half_angle(classes);
    ensure(
        cone_half_angle_deg >= 0.0 && cone_half_angle_deg < limit,
        "cone_half_angle_deg",
        cone_half_angle_deg,
        "an angle below the simplex limit",
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Orthonormal frame by Gram-Schmidt, then centre it.
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(classes);
    while frame.len() < classes {
        let mut v = gaussian(&mut rng, d);
        for q in &frame {
            let k = dot(&v, q);
            v.iter_mut().zip(q).for_each(|(x, a)| *x -= k * a);
        }
        if dot(&v, &v) > 1e-8 {
            normalize(&mut v);
            frame.push(v);
        }
    }
    let centre: Vec<f64> = (0..d)
        .map(|j| frame.iter().map(|q| q[j]).sum::<f64>() / classes as f64)
        .collect();
    let half = cone_half_angle_deg * PI / 180.0;
    let data = frame
        .iter()
        .map(|q| {
            let mut axis: Vec<f64> = q.iter().zip(&centre).map(|(a, c)| a - c).collect();
            normalize(&mut axis);
            (0..n_per_class)
                .map(|_| cone_sample(&mut rng, &axis, half, norm_range))
                .collect()
        })
        .collect();
    SeparableDataset::new(data)
}
