use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

use crate::sinkhorn::SolveReport;

pub type Result<T> = core::result::Result<T, Error>;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An input violated a documented precondition. The string names it.
    InvalidParameter(String),
    /// A Young function was evaluated outside of its domain.
    Domain { function: &'static str, argument: f64 },
    /// The Luxemburg bisection could not bracket the norm.
    NotBracketable,
    /// A scaling update met a vanishing denominator on the support of its
    /// marginal.
    DivergedScaling {
        iteration: usize,
        side: Side,
        index: usize,
    },
    /// Direct-mode scalings left the range of `f64`; rerun in log-domain mode.
    Overflow { iteration: usize },
    /// The stopping rule was not met within the iteration budget.
    NotConverged(Box<SolveReport>),
}

/// Which scaling vector an error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    First,
    Second,
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::Domain { function, argument } => {
                write!(f, "{function} is not defined at {argument}")
            }
            Error::NotBracketable => write!(f, "could not bracket the Luxemburg norm"),
            Error::DivergedScaling {
                iteration,
                side,
                index,
            } => write!(
                f,
                "scaling diverged at iteration {iteration}: zero denominator in the {} update at cell {index}; \
                 retry in log-domain mode",
                match side {
                    Side::First => "first",
                    Side::Second => "second",
                }
            ),
            Error::Overflow { iteration } => write!(
                f,
                "scaling overflowed at iteration {iteration}; retry in log-domain mode"
            ),
            Error::NotConverged(report) => write!(
                f,
                "no convergence after {} iterations (last marginal error {:e})",
                report.iterations,
                report.residual_history.last().copied().unwrap_or(f64::NAN)
            ),
        }
    }
}

impl core::error::Error for Error {}
