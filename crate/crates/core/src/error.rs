use thiserror::Error;

use crate::fitmodels::RangeViolation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument outside the physical domain of the model.
    #[error("domain error: {name} = {value} ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// The attenuation-noise minimum sits on the edge of the frequency window.
    #[error("optimal frequency for l = {distance_km} km lies on the search window boundary ({frequency_khz} kHz)")]
    BoundaryMinimizer {
        distance_km: f64,
        frequency_khz: f64,
    },

    /// A 3-dB band edge could not be bracketed inside the frequency window.
    #[error("{edge} 3-dB edge for l = {distance_km} km is outside the search window")]
    BandTruncation {
        distance_km: f64,
        edge: &'static str,
    },

    #[error("rank-deficient least-squares problem: {0}")]
    Rank(String),

    #[error("surface fit failed: {0}")]
    Fit(String),

    #[error("model parameters violate the admissible ranges: {}", format_violations(.0))]
    Validation(Vec<RangeViolation>),

    #[error("no boundary-to-midpoint transition found in the distance grid: {0}")]
    Bracket(String),

    #[error("configuration error: {0}")]
    Config(String),
}

fn format_violations(v: &[RangeViolation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, expected: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            expected,
        }
    }

    /// Short machine-readable tag used in structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "domain",
            Error::BoundaryMinimizer { .. } => "boundary_minimizer",
            Error::BandTruncation { .. } => "band_truncation",
            Error::Rank(_) => "rank",
            Error::Fit(_) => "fit",
            Error::Validation(_) => "validation",
            Error::Bracket(_) => "bracket",
            Error::Config(_) => "config",
        }
    }
}

/// Checks `value > 0` and finite.
pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::domain(name, value, "must be finite and > 0"))
    }
}
