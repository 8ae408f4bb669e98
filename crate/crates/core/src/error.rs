use core::fmt;

use crate::bigmat::BigmatError;
use crate::curve::CurveError;
use crate::hassewitt::PrecisionFailure;
use crate::transition::TransitionError;

/// Any failure surfaced by the public pipeline entry points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    Curve(CurveError),
    Transition(TransitionError),
    Bigmat(BigmatError),
    Precision(PrecisionFailure),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Curve(e) => write!(f, "invalid curve: {e}"),
            Error::Transition(e) => write!(f, "transition derivation failed: {e}"),
            Error::Bigmat(e) => write!(f, "matrix arithmetic failed: {e}"),
            Error::Precision(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for Error {}

impl From<CurveError> for Error {
    fn from(e: CurveError) -> Self {
        Error::Curve(e)
    }
}

impl From<TransitionError> for Error {
    fn from(e: TransitionError) -> Self {
        Error::Transition(e)
    }
}

impl From<BigmatError> for Error {
    fn from(e: BigmatError) -> Self {
        Error::Bigmat(e)
    }
}

impl From<PrecisionFailure> for Error {
    fn from(e: PrecisionFailure) -> Self {
        Error::Precision(e)
    }
}
