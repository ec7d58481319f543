use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("insufficient depth: requested floor {requested}, inputs only determine powers >= {achievable}")]
    InsufficientDepth { requested: i64, achievable: i64 },

    #[error("residue undetermined: operator is exact only down to power {floor}")]
    ResidueUndetermined { floor: i64 },

    #[error("operator is not purely differential: {0}")]
    NotDifferential(String),

    #[error("generator {generator} is outside the ring context")]
    IncompatibleContext { generator: String },

    #[error("coefficient of power {power} is not linear in the cotangent generators: {detail}")]
    NonLinear { power: i64, detail: String },

    #[error("Adler map produced power {0}, outside the expected range")]
    UnexpectedPower(i64),

    #[error("Lax operator is not generic: coefficient {0} is not a bare generator")]
    NotGeneric(usize),

    #[error("parity-inhomogeneous input: {0}")]
    Inhomogeneous(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
