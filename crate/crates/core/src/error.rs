use thiserror::Error;

/// Errors raised by the simulator and the experiment pipelines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Register too large (or too small) for the dense engine.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    /// A projection whose outcome probability fell below the renormalization threshold.
    #[error("degenerate outcome: projection probability {probability:e} below threshold")]
    Degenerate { probability: f64 },

    #[error("singular mitigation: depolarizing fidelity {f} is too small to invert")]
    SingularMitigation { f: f64 },

    /// Normalized OTOC whose denominator is numerically zero.
    #[error("unnormalizable point: denominator {denominator:e}")]
    Unnormalizable { denominator: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn arg_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
