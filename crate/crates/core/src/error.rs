use thiserror::Error;

use crate::poly::PolyError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("invalid space: {0}")]
    InvalidSpace(String),
    #[error("invalid subspace: {0}")]
    InvalidSubspace(String),
    #[error("no Hodge star structure on the middle cohomology of {0}")]
    MissingStar(String),
    #[error(
        "{0} has no global cohomology (cones and discs only occur as critical-component factors)"
    )]
    NotGlobal(String),
    #[error("{0} is not a primitive space")]
    NotPrimitive(String),
    #[error("invalid Morse problem: {0}")]
    InvalidProblem(String),
    #[error("invalid spectral model: {0}")]
    InvalidModel(String),
    #[error("eigensolver did not converge ({0})")]
    NoConvergence(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
