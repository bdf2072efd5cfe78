use thiserror::Error;

/// Errors raised by the level constructions.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("level must be at least 1")]
    ZeroLevel,

    #[error("level mismatch: {0}")]
    LevelMismatch(String),

    #[error("precision exceeded: requested {requested}, available {available}")]
    PrecisionExceeded { requested: u32, available: u32 },

    #[error("digit {digit} out of range for p = {prime}")]
    InvalidDigit { digit: u64, prime: u64 },

    #[error("invalid manifold: {0}")]
    InvalidManifold(String),

    #[error("balls {first} and {second} overlap")]
    OverlappingBalls { first: usize, second: usize },

    #[error("level {level} is below the ball resolution {resolution}")]
    LevelTooSmall { level: u32, resolution: u32 },

    #[error("point is not in the manifold at level {level}")]
    PointNotInManifold { level: u32 },

    #[error("not level compatible at level {level}: {detail}")]
    NotLevelCompatible { level: u32, detail: String },

    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("not a bijection: {0}")]
    NotBijection(String),

    #[error("unequal fibers: {0}")]
    UnequalFibers(String),

    #[error("support exceeds the bound of {bound} points")]
    InfiniteSupport { bound: usize },

    #[error("base point is not mapped to zero")]
    BasePointMoved,

    #[error("value is not a point of the codomain")]
    ValueOutsideCodomain,

    #[error("enumeration of {count} items exceeds the bound {bound}")]
    TooLarge { count: u128, bound: u128 },

    #[error("not a monoid homomorphism: {0}")]
    NotHomomorphism(String),

    #[error("sequence does not stabilize modulo p^{precision}: {detail}")]
    NotCauchy { precision: u32, detail: String },

    #[error("label {0} has no position in the index order")]
    OrderUndefined(u64),
}

pub type Result<T> = std::result::Result<T, Error>;
