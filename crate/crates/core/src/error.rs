use thiserror::Error;

use crate::mask_graph::Entry;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("entry ({0}, {1}) is out of range for a {2}x{3} matrix")]
    OutOfRange(usize, usize, usize, usize),

    #[error("duplicate known entry ({0}, {1})")]
    DuplicateEntry(usize, usize),

    #[error("entry {0:?} is not reconstructible from the mask")]
    NotReconstructible(Entry),

    #[error("no observation for known entry {0:?}")]
    MissingObservation(Entry),

    #[error("observed entry {0:?} is zero; its logarithm is undefined")]
    ZeroObservation(Entry),

    #[error("observed entry {0:?} is not finite")]
    NonFiniteObservation(Entry),

    #[error("no noise variance given for entry {0:?}")]
    MissingSigma(Entry),

    #[error("invalid noise variance {value} for entry {entry:?}: must be finite and >= 0")]
    InvalidSigma { entry: Entry, value: f64 },

    #[error("cannot place {k} entries in a {rows}x{cols} mask")]
    TooManyEntries { k: usize, rows: usize, cols: usize },

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
