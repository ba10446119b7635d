use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("fields or trajectories live on different grids or time samples: {0}")]
    Mismatch(String),

    #[error("multiplier is not finite at lattice index {index}")]
    NonFiniteSymbol { index: usize },

    #[error("{0} is not a dyadic number")]
    NotDyadic(f64),

    #[error("cube side {side} is not resolved by lattice spacing {spacing}")]
    UnresolvedCubes { spacing: f64, side: f64 },

    #[error("frequency content leaves the grid band (relative mass {lost_fraction:e})")]
    BandOverflow { lost_fraction: f64 },

    #[error("periodic wrap-around at t = {time}: boundary mass fraction {mass_fraction:e}")]
    WrapAround { time: f64, mass_fraction: f64 },

    #[error("horizon {horizon} exceeds the wrap-around transit limit {limit}")]
    TransitExceeded { horizon: f64, limit: f64 },

    #[error("non-finite state after t = {last_good_time}")]
    NonFinite { last_good_time: f64 },

    #[error("Picard iteration diverged at iterate {iteration} (residual {residual:e})")]
    Divergence { iteration: usize, residual: f64 },

    #[error("Picard iteration did not reach tolerance after {iterations} iterates (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("projection onto dyadic block {0} is empty")]
    EmptyProjection(u64),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("malformed snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors that signal numerical divergence rather than bad input.
    pub fn is_divergence(&self) -> bool {
        matches!(self, Error::Divergence { .. } | Error::NonFinite { .. })
    }
}
