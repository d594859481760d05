use thiserror::Error;

use crate::phase::PhaseKind;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("{name} = {value} is out of domain: expected {expected}")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// A structural input problem (mismatched dimensions, empty sets, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The initialization does not lie in the region a solver requires.
    #[error("initialization lies in the {found:?} region, solver requires {required:?}")]
    Region {
        found: PhaseKind,
        required: PhaseKind,
    },

    #[error("{routine} did not converge after {iterations} iterations")]
    NoConvergence {
        routine: &'static str,
        iterations: usize,
    },

    #[error("state became non-finite at t = {t}")]
    NonFinite { t: f64 },

    #[error("event not reached before t_max = {t_max}")]
    Horizon { t_max: f64 },

    #[error("dataset violates separability: {0}")]
    Dataset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad inputs).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. } | Error::NonFinite { .. } | Error::Horizon { .. }
        )
    }

    pub(crate) fn domain(name: &'static str, value: f64, expected: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            expected,
        }
    }
}

/// Fails with a domain error unless `ok` holds.
pub(crate) fn ensure(ok: bool, name: &'static str, value: f64, expected: &'static str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::domain(name, value, expected))
    }
}
