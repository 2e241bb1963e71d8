use thiserror::Error;

/// Errors raised by the physics and numerics layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("argument outside the domain of {function}: {value}")]
    Domain { function: &'static str, value: f64 },

    #[error("{what} did not converge (last residual {residual:e})")]
    NoConvergence { what: &'static str, residual: f64 },

    #[error("no sign change of the function on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("ODE step size underflow at t = {t} (h = {step:e})")]
    StepUnderflow { t: f64, step: f64 },

    #[error("ODE exceeded {max_steps} steps before reaching t = {t_end} (stopped at t = {t})")]
    MaxSteps { max_steps: usize, t: f64, t_end: f64 },

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("excitation {rho_aa:e} fell below the truncation floor")]
    Truncated { rho_aa: f64 },
}

impl Error {
    /// True for failures of an iterative or adaptive numerical method, as
    /// opposed to invalid input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::StepUnderflow { .. }
                | Error::MaxSteps { .. }
                | Error::GridTooCoarse(_)
                | Error::Truncated { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require(name: &'static str, value: f64, ok: bool, reason: &'static str) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value, reason })
    }
}
