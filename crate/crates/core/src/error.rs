use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mode {mode} out of range for order-{order} tensor")]
    ModeOutOfRange { mode: usize, order: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("factor matrices disagree on rank: {0:?}")]
    RankMismatch(Vec<usize>),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("rank {rank} infeasible (must be in 1..={bound})")]
    RankInfeasible { rank: usize, bound: usize },

    #[error("all {0} ALS restarts hit a singular least-squares subproblem")]
    AllRestartsFailed(usize),

    #[error("degenerate CP component {0}: zero column")]
    DegenerateComponent(usize),

    #[error("zero vector passed to {0}")]
    ZeroVector(&'static str),

    #[error("invalid trigonometric ratio: {0}")]
    InvalidRatio(String),

    #[error("minimum separation infeasible after {0} attempts")]
    SeparationInfeasible(usize),

    #[error("degenerate pilot: {0}")]
    PilotDesign(String),

    #[error("zero signal power")]
    ZeroSignal,

    #[error("path {index}: {source}")]
    Path {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn at_path(self, index: usize) -> Self {
        Error::Path {
            index,
            source: Box::new(self),
        }
    }

    /// Short machine-friendly tag, used in campaign CSV output.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::ModeOutOfRange { .. } => "mode_out_of_range",
            Error::ShapeMismatch(_) => "shape_mismatch",
            Error::RankMismatch(_) => "rank_mismatch",
            Error::NonFinite(_) => "non_finite",
            Error::RankInfeasible { .. } => "rank_infeasible",
            Error::AllRestartsFailed(_) => "cp_failed",
            Error::DegenerateComponent(_) => "degenerate_component",
            Error::ZeroVector(_) => "zero_vector",
            Error::InvalidRatio(_) => "invalid_ratio",
            Error::SeparationInfeasible(_) => "separation_infeasible",
            Error::PilotDesign(_) => "pilot_design",
            Error::ZeroSignal => "zero_signal",
            Error::Path { source, .. } => source.tag(),
            Error::Linalg(_) => "linalg",
            Error::Format(_) => "format",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}
