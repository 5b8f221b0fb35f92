use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: expected {expected_r}x{expected_z}, got {got_r}x{got_z}")]
    ShapeMismatch {
        expected_r: usize,
        expected_z: usize,
        got_r: usize,
        got_z: usize,
    },

    #[error("initial-data support outside the domain: {0}")]
    SupportOutsideDomain(String),

    #[error("CFL violation at t = {t}: dt = {dt} exceeds bound {bound}")]
    CflViolation { t: f64, dt: f64, bound: f64 },

    #[error("numerical blow-up at t = {t} (step {step}): {what}")]
    BlowUp { t: f64, step: usize, what: String },

    #[error("Picard iteration diverging: difference grew for 3 consecutive iterates (j = {iterate})")]
    PicardDivergence { iterate: usize },

    #[error("fit window [{t0}, {t1}] is not usable: {reason}")]
    BadWindow { t0: f64, t1: f64, reason: String },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("empty record series")]
    EmptySeries,

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
