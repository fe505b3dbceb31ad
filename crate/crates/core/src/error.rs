use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not proportional to a unitary (deviation {deviation:.3e})")]
    NotProportionalToUnitary { deviation: f64 },

    #[error("matrix is singular or zero")]
    SingularInput,

    #[error("invalid gate order {0}; need r >= 2")]
    InvalidOrder(u32),

    #[error("group closure exceeded cap of {cap} elements")]
    CapExceeded { cap: usize },

    #[error("completion gate lies in the base group")]
    TInGroup,

    #[error("prefix product is not an element of the base group")]
    NotAGroup,

    #[error("spin {spin} out of range for t = {t}")]
    OutOfRange { spin: u32, t: u32 },

    #[error("brute-force moment operator requires t <= 3, got {t}")]
    DimensionTooLarge { t: u32 },

    #[error("invalid gate-set size {n}")]
    InvalidSize { n: usize },

    #[error("no contraction at this scale (delta = {delta})")]
    NoGapAtScale { delta: f64 },

    #[error("degenerate discrepancy delta = {delta}")]
    DegenerateDelta { delta: f64 },

    #[error("optimal value diverges for n = 2")]
    Divergent,

    #[error("epsilon = {epsilon} makes the volume bound vacuous")]
    EpsilonTooLarge { epsilon: f64 },

    #[error("empty input")]
    EmptyInput,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed gate-set file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
