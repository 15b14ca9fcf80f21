use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("duplicate trial id `{0}`")]
    DuplicateTrial(String),

    #[error("{count} protocol trial(s) have no score; first: {}", .first.join(", "))]
    MissingScores { count: usize, first: Vec<String> },

    #[error("{count} score(s) have no protocol entry; first: {}", .first.join(", "))]
    UnmatchedScores { count: usize, first: Vec<String> },

    #[error("protocol and score file share no trial ids")]
    EmptyIntersection,

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("empty class: {0}")]
    EmptyClass(&'static str),

    #[error("t-DCF coefficient {name} is negative ({value}); inconsistent ASV operating point")]
    NegativeCoefficient { name: &'static str, value: f64 },

    #[error("degenerate cost: C0 + min(C1, C2) = {0}, normalization undefined")]
    DegenerateCost(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("signal too short: need at least {needed} samples, got {got}")]
    SignalTooShort { needed: usize, got: usize },

    #[error("unsupported audio: {0}")]
    UnsupportedAudio(String),

    #[error("need at least {needed} frames for {needed} components, got {got}")]
    TooFewFrames { needed: usize, got: usize },

    #[error("feature dimension {0} has zero variance")]
    ZeroVariance(usize),

    #[error("zero bona fide score variance")]
    ZeroBonafideVariance,

    #[error("logistic regression did not converge after {iters} iterations (gradient max-norm {grad_norm:e})")]
    NoConvergence { iters: usize, grad_norm: f64 },

    #[error("empty group `{0}`")]
    EmptyGroup(String),

    #[error("malformed container: {0}")]
    Format(String),

    #[error(transparent)]
    Wav(#[from] hound::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
