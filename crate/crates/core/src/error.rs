use thiserror::Error;

pub type Result<T> = std::result::Result<T, PurfError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PurfError {
    #[error("unknown model `{name}`; valid names are: {}", valid.join(", "))]
    UnknownModel { name: String, valid: Vec<&'static str> },

    #[error("{what} = {value} is outside [0, 1]")]
    OutOfUnitInterval { what: &'static str, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("partitions have {left} and {right} cuts; expected equal sizes")]
    SizeMismatch { left: usize, right: usize },

    #[error("exact tie between cut points at {0}; resample")]
    Tie(f64),

    #[error("quadrature did not converge on cell {cell} ([{lo}, {hi}]) after {levels} refinements")]
    QuadratureNonConvergence { cell: usize, lo: f64, hi: f64, levels: u32 },

    #[error("model invariant violated: {0}")]
    InvalidModel(String),
}
