use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("mesh construction failed: {0}")]
    Construction(String),

    /// A radius or scale is below what the mesh can resolve.
    #[error("under-resolved: {0}")]
    Resolution(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("fields live on different meshes")]
    MeshMismatch,

    #[error("rotation alignment failed: {0}")]
    Alignment(String),

    #[error("point location failed: {0}")]
    Interpolation(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
