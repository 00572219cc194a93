use alloc::string::String;

use crate::dynamics::Verdict;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("value left the representable range at iterate {level}")]
    OverflowDepth { level: usize },

    #[error("invalid input: {0}")]
    InvalidInput(&'static str),

    #[error("cannot parse address literal {literal:?}: {reason}")]
    AddressParse { literal: String, reason: &'static str },

    #[error("orbit point {index} lies on a strip boundary; address is ill-defined")]
    BoundaryStrip { index: usize },

    #[error("pullback passed within tolerance of the singular value at level {level} (t = {t})")]
    SingularHit { level: usize, t: f64 },

    #[error("pullback did not converge: residual {residual:e} at depth {depth}")]
    NoConvergence { residual: f64, depth: usize },

    #[error("potential {t} is outside the ray domain (t_s = {t_s})")]
    DomainError { t: f64, t_s: f64 },

    #[error("continuation step underflow; last good potential {last_t}")]
    ContinuationStuck { last_t: f64 },

    #[error("address is not fast")]
    NotFastAddress,

    #[error("parameter does not escape ({verdict:?})")]
    NotEscaping { verdict: Verdict },

    #[error("classification round trip failed: |G_s(t) - kappa| = {error:e}")]
    RoundtripFailure { error: f64 },
}
