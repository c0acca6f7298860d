use alloc::string::String;
use alloc::vec::Vec;

/// Failures reported by the library.
///
/// Validation failures (bad parameters, preconditions) and numerical
/// failures (divergence, instability, missing spectral gaps) are kept apart
/// so front ends can map them to different exit statuses.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("point of modulus {modulus} is not in the closed unit disc")]
    OutsideUnitDisc { modulus: f64 },

    #[error("point is not in the domain")]
    OutsideDomain,

    #[error("disc leaves the domain at sample {index}")]
    DiscExitsDomain { index: usize },

    #[error("first coordinate of the disc is not a rotation e^(i theta) zeta")]
    NotARotation,

    #[error("disc is not attached to the boundary (residual {residual:e})")]
    NotAttached { residual: f64 },

    #[error("conormal chart denominator {modulus:e} too small at sample {index}")]
    SmallDenominator { index: usize, modulus: f64 },

    #[error(
        "multiplier degree {degree} too small: residual {residual:e}, refined residual {refined:e}"
    )]
    MultiplierDegreeTooSmall {
        degree: usize,
        residual: f64,
        refined: f64,
    },

    #[error("determinant vanishes at grid point {index} (modulus {modulus:e})")]
    VanishingDeterminant { index: usize, modulus: f64 },

    #[error("winding number {value} is not close to an integer")]
    NonIntegerWinding { value: f64 },

    #[error("{what} changed under truncation doubling")]
    Unstable { what: &'static str },

    #[error("kernel-dimension profile is not consistent with any index multiset")]
    InconsistentProfile,

    #[error("no clear spectral gap (ratio {ratio:e}, spectrum tail {tail:?})")]
    NoSpectralGap { ratio: f64, tail: Vec<f64> },

    #[error("multiplier leaves negative Fourier modes of size {residual:e}")]
    NotStationary { residual: f64 },

    #[error("Newton iteration diverged after {iterations} iterations (residual {residual:e})")]
    Diverged { iterations: usize, residual: f64 },

    #[error("pinned Jacobian is rank deficient (smallest singular value {sigma_min:e})")]
    RankDeficient { sigma_min: f64 },

    #[error("budget of {evaluations} evaluations exhausted (best mu {best_mu})")]
    BudgetExhausted { evaluations: usize, best_mu: f64 },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of the numerics (as opposed to rejected input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::VanishingDeterminant { .. }
                | Error::NonIntegerWinding { .. }
                | Error::Unstable { .. }
                | Error::InconsistentProfile
                | Error::NoSpectralGap { .. }
                | Error::Diverged { .. }
                | Error::RankDeficient { .. }
                | Error::BudgetExhausted { .. }
                | Error::MultiplierDegreeTooSmall { .. }
                | Error::NotStationary { .. }
        )
    }
}

pub type Result<T> = core::result::Result<T, Error>;
