use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("points {0} and {1} coincide (zero distance between distinct indices)")]
    DuplicatePoints(usize, usize),

    #[error("need at least {need} points, got {got}")]
    TooFewPoints { need: usize, got: usize },

    #[error("fault parameter k = {k} is out of range: requires k <= n - 2 with n = {n}")]
    FaultParameter { k: usize, n: usize },

    #[error("eps = {0} is out of range: requires 0 < eps < 1/2")]
    Epsilon(f64),

    #[error("single-sink eps' = {0} is out of range: requires 0 < eps' <= 1/6")]
    SingleSinkEpsilon(f64),

    #[error("sink {0} is not part of the point set")]
    SinkNotInSet(usize),

    #[error("incubator {0} is internal with a single local child; merge lonely incubators first")]
    Unmerged(usize),

    #[error("zombies have not been assigned to the incubator graph")]
    ZombiesMissing,

    #[error("invalid distance matrix: {0}")]
    Matrix(String),

    #[error("invalid point data: {0}")]
    Points(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
