use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("rate or time parameter `{name}` must be positive and finite, got {value}")]
    NegativeRate { name: &'static str, value: f64 },

    #[error("bad probability vector: {0}")]
    BadProbabilityVector(String),

    #[error("queue capacity must be at least 1, got {0}")]
    CapacityTooSmall(usize),

    #[error("embedded chain is reducible: zero pivot while eliminating state {state}")]
    SingularChain { state: usize },

    #[error("service time distribution is degenerate (B_0 = 0)")]
    DegenerateService,

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("bad RED thresholds: {0}")]
    BadThresholds(String),

    #[error("consecutive-loss pmf tail not converged: deficit {deficit:e} exceeds {tolerance:e}")]
    TailNotConverged { deficit: f64, tolerance: f64 },

    #[error("bad simulation config: {0}")]
    BadSimConfig(String),

    #[error("bad calibration target: {0}")]
    BadCalibration(String),
}
