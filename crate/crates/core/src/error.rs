use alloc::boxed::Box;
use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("input outside its domain: {0}")]
    InputDomain(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("shape mismatch for {what}: expected {expected}, found {found}")]
    Shape {
        what: String,
        expected: usize,
        found: usize,
    },
    #[error("zero activity: population vector is undefined")]
    ZeroActivity,
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("sequence with seed {seed} failed: {source}")]
    Sequence { seed: u64, source: Box<Error> },
    #[error("training diverged at epoch {epoch} on sequence seed {seed}")]
    Diverged { epoch: usize, seed: u64 },
    #[error("timestamps must be strictly increasing (frame {frame})")]
    NonIncreasingTime { frame: usize },
    #[error("trajectories have no overlapping samples")]
    EmptyOverlap,
    #[error("degenerate point set: {0}")]
    Degenerate(String),
}

impl Error {
    pub(crate) fn shape(what: impl Into<String>, expected: usize, found: usize) -> Self {
        Error::Shape {
            what: what.into(),
            expected,
            found,
        }
    }
}
