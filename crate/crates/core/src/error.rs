use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("the termination action does not transform a window")]
    TerminationTransform,
    #[error("episode already terminated")]
    EpisodeTerminated,
    #[error("invalid crop window: {0}")]
    InvalidWindow(String),
    #[error("invalid image: {0}")]
    InvalidImage(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("misaligned inputs: {0}")]
    Misaligned(String),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("non-finite loss at update {update}")]
    NonFinite { update: usize },
}
