use thiserror::Error;

use crate::kinematics::SolutionBranch;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("energy {energy} does not exceed the rest energy {rest}")]
    EnergyBelowRest { energy: f64, rest: f64 },
    #[error("potential {potential} reaches the supercritical bound E + mc^2 = {bound}")]
    KleinRegime { potential: f64, bound: f64 },
    #[error("potential {potential} is at or below E - mc^2 = {bound}; the particle propagates over the barrier")]
    Propagating { potential: f64, bound: f64 },
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("singular denominator Γ²+Δ² = {denom:e}")]
    SingularDenominator { denom: f64 },
    #[error("interface matching residual {residual:e} exceeds tolerance")]
    IllConditioned { residual: f64 },
    #[error("differentiation stencil energy {energy} leaves the tunneling regime")]
    StencilOutOfRegime { energy: f64 },
    #[error("central ({central}) and Richardson ({richardson}) derivatives disagree")]
    NoisyDerivative { central: f64, richardson: f64 },
    #[error("operation is undefined for the degenerate branch V0 = E")]
    BranchDegenerate,
    #[error("expected branch {expected:?}, system is on branch {found:?}")]
    WrongBranch {
        expected: SolutionBranch,
        found: SolutionBranch,
    },
    #[error("total path L + 2a is zero")]
    ZeroPath,
}

impl Error {
    /// Stable kebab-case identifier used in machine-readable CLI output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EnergyBelowRest { .. } => "energy-below-rest",
            Error::KleinRegime { .. } => "klein-regime",
            Error::Propagating { .. } => "propagating",
            Error::InvalidParameter { .. } => "invalid-parameter",
            Error::SingularDenominator { .. } => "singular-denominator",
            Error::IllConditioned { .. } => "ill-conditioned",
            Error::StencilOutOfRegime { .. } => "stencil-out-of-regime",
            Error::NoisyDerivative { .. } => "noisy-derivative",
            Error::BranchDegenerate => "branch-degenerate",
            Error::WrongBranch { .. } => "wrong-branch",
            Error::ZeroPath => "zero-path",
        }
    }
}
