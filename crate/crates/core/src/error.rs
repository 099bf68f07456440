use std::path::PathBuf;

use thiserror::Error;

use crate::theta::Violation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("series has no nonzero coefficient below its precision; cannot invert")]
    NotInvertible,

    #[error("exact series with {0} terms has no finite inverse; truncate it first")]
    UnboundedInverse(usize),

    #[error("theta data failed validation: {}", format_violations(.0))]
    InvalidTheta(Vec<Violation>),

    #[error("{what} = {value} exceeds the configured maximum {max}")]
    LimitExceeded {
        what: &'static str,
        value: u64,
        max: u64,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("radius {0} too small: the boundary shell contributes below the requested precision")]
    RadiusTooSmall(u32),

    #[error("internal assertion failed: {0}")]
    Assertion(String),

    #[error("cache version mismatch in {path}: found {found:?}, expected {expected:?}")]
    CacheVersion {
        path: PathBuf,
        found: String,
        expected: String,
    },

    #[error("corrupt cache file {path}: {reason}")]
    CacheCorrupt { path: PathBuf, reason: String },

    #[error("cached record {path} disagrees with a fresh computation at discriminant {delta}")]
    CacheConflict { path: PathBuf, delta: u64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
