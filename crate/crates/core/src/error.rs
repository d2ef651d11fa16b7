use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("strong competition violated: need k1 > 1 and k2 > 1 (got k1 = {k1}, k2 = {k2})")]
    StrongCompetitionViolated { k1: f64, k2: f64 },

    #[error("invalid LV1 parameters: need 1/gamma < alpha < beta (alpha = {alpha}, beta = {beta}, gamma = {gamma})")]
    InvalidLv1 { alpha: f64, beta: f64, gamma: f64 },

    /// Both a negative-speed and a positive-speed criterion fired. Every criterion
    /// is a proven sufficient condition, so this can only be a programming error.
    #[error("polarity conflict: negative {negative:?} and positive {positive:?} both fired")]
    PolarityConflict {
        negative: Vec<String>,
        positive: Vec<String>,
    },

    #[error("coverage not reached for any k1 below the search cap {cap}")]
    SearchCapExceeded { cap: f64 },

    #[error("profile construction failed: {0}")]
    Profile(String),

    #[error("grid too coarse: derivative cross-check error {error:.3e} exceeds {limit:.3e}")]
    GridTooCoarse { error: f64, limit: f64 },

    #[error("inadmissible delta = {delta}: {reason}")]
    InadmissibleDelta { delta: f64, reason: String },

    #[error("degenerate construction requires {0}")]
    DegeneratePrecondition(String),

    #[error("invalid simulation config: {0}")]
    Config(String),

    #[error("simulation unstable at t = {t}: {reason}")]
    Unstable { t: f64, reason: String },

    #[error("front left the resolvable window at t = {t}")]
    FrontLost { t: f64 },

    #[error("invalid scan spec: {0}")]
    Scan(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
