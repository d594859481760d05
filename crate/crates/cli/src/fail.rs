//! Exit-code classification.

use std::fmt;

/// A bad parameter or flag combination caught before any numerics run.
#[derive(Debug)]
pub struct Invalid(pub String);

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

pub fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Invalid(msg.into()).into()
}

pub const EXIT_IO: u8 = 1;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<Invalid>() {
            return EXIT_INVALID;
        }
        if let Some(e) = cause.downcast_ref::<neurodyn::Error>() {
            return match e {
                e if e.is_numerical() => EXIT_NUMERICAL,
                neurodyn::Error::Io(_) => EXIT_IO,
                _ => EXIT_INVALID,
            };
        }
    }
    EXIT_IO
}

pub fn positive(name: &str, v: f64) -> anyhow::Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("--{name} must be positive, got {v}")))
    }
}

pub fn non_negative(name: &str, v: f64) -> anyhow::Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("--{name} must be >= 0, got {v}")))
    }
}

/// `0 < v < hi`.
pub fn below(name: &str, v: f64, hi: f64) -> anyhow::Result<()> {
    if v > 0.0 && v < hi {
        Ok(())
    } else {
        Err(invalid(format!("--{name} must lie in (0, {hi}), got {v}")))
    }
}

/// `0 < v <= 1`.
pub fn fraction(name: &str, v: f64) -> anyhow::Result<()> {
    if v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("--{name} must lie in (0, 1], got {v}")))
    }
}
