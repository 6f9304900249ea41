use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dyadic level {k} outside usable range [{k_min}, {k_max}]")]
    Range { k: i32, k_min: i32, k_max: i32 },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("time step {dt} exceeds CFL limit {limit}")]
    Cfl { dt: f64, limit: f64 },

    #[error("solution diverged (non-finite values) at t = {t}")]
    Divergence { t: f64 },

    #[error("degenerate gauge frame: |det U| = {det:e} at grid point {point}")]
    DegenerateFrame { point: usize, det: f64 },

    #[error("malformed trace container: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
