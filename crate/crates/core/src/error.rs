use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("all sampling scores are zero")]
    ZeroScores,

    #[error("series too short: need at least {needed} points, got {actual}")]
    SeriesTooShort { needed: usize, actual: usize },

    #[error("problem is not overconstrained: {rows} rows for {cols} unknowns")]
    Underdetermined { rows: usize, cols: usize },

    #[error("materialization of {rows}x{cols} exceeds the cap of {cap} entries")]
    SizeCap { rows: usize, cols: usize, cap: usize },

    #[error("step h = {h} overflows: h^-(d-1) with d = {d} exceeds f64 range (need h >= {min_h:e})")]
    ScaleOverflow { h: f64, d: usize, min_h: f64 },

    #[error("kernel returned a non-finite value for the pair ({s}, {t})")]
    KernelNonFinite { s: usize, t: usize },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub(crate) fn check_len(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            actual,
        });
    }
    Ok(())
}

pub(crate) fn check_finite(context: &'static str, values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(context))
    }
}
