use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid basis label: {0}")]
    InvalidLabel(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("block is not unitary (max deviation {0:.3e})")]
    NonUnitary(f64),
    #[error("invalid levels: {0}")]
    InvalidLevels(String),
    #[error("atom index {index} out of range for a register of {len} atoms")]
    InvalidAtom { index: usize, len: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
