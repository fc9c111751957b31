//! Time gain, traversal velocity and the `V_T = c` threshold curves.
//!
//! With `β = V_g/c` and the width ratio `a/L`, the linearized traversal
//! velocities of the two branch closed forms are
//!
//! ```text
//! A:  V_T = V_g + V_g · a/(L+2a) · (3 − 2c²/V_g²)
//! B:  V_T = V_g + a/(L+2a) · V_g³/c²
//! ```
//!
//! These are first-order expansions of `(L+2a)/τ_p` in `Δt/τ_f`. Setting
//! `V_T = c` gives the threshold width ratio as a function of `β`:
//!
//! ```text
//! A:  a/L = (β² − β)/(2 + 2β − 5β²)     pole at β = (1+√11)/5
//! B:  a/L = (1 − β)/(β³ + 2β − 2)       pole at the real root of β³+2β−2
//! ```
//!
//! Below each pole no positive width ratio reaches `c`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::grid::{map_ordered, Execution};
use crate::kinematics::{natural_kinematics, BarrierSystem, SolutionBranch};
use crate::units::Dimension;

/// Tolerance on `V_T/c − 1` separating the two regions from the curve.
pub const ON_CURVE_TOLERANCE: f64 = 1e-12;

/// A point in the `(β, a/L)` plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioPoint {
    pub beta: f64,
    pub width_ratio: f64,
    pub branch: SolutionBranch,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub beta: f64,
    pub alpha_ratio: f64,
    pub branch: SolutionBranch,
    /// `false` where no positive finite width ratio reaches `V_T = c`.
    pub feasible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Superluminal,
    Subluminal,
    OnCurve,
}

impl Region {
    pub fn label(self) -> &'static str {
        match self {
            Region::Superluminal => "Superluminal",
            Region::Subluminal => "Subluminal",
            Region::OnCurve => "OnCurve",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionVerdict {
    pub region: Region,
    /// `V_T/c − 1`
    pub margin: f64,
}

impl RegionVerdict {
    fn from_margin(margin: f64) -> Self {
        let region = if margin > ON_CURVE_TOLERANCE {
            Region::Superluminal
        } else if margin < -ON_CURVE_TOLERANCE {
            Region::Subluminal
        } else {
            Region::OnCurve
        };
        RegionVerdict { region, margin }
    }
}

fn require_branch(branch: SolutionBranch) -> Result<()> {
    if branch == SolutionBranch::Degenerate {
        Err(Error::BranchDegenerate)
    } else {
        Ok(())
    }
}

/// `Δt = τ_f − τ_p` with `c = 1`.
pub fn gain_from(beta: f64, width: f64, branch: SolutionBranch) -> Result<f64> {
    require_branch(branch)?;
    Ok(match branch {
        SolutionBranch::A => width / beta * (3.0 - 2.0 / (beta * beta)),
        _ => width * beta,
    })
}

/// Linearized `V_T` with `c = 1`.
pub fn traversal_from(beta: f64, width: f64, gap: f64, branch: SolutionBranch) -> Result<f64> {
    require_branch(branch)?;
    let path = gap + 2.0 * width;
    if !(path > 0.0) {
        return Err(Error::ZeroPath);
    }
    let share = width / path;
    Ok(match branch {
        SolutionBranch::A => beta + beta * share * (3.0 - 2.0 / (beta * beta)),
        _ => beta + share * beta * beta * beta,
    })
}

/// Time gain of the branch closed form over free flight, in `sys` time units.
pub fn time_gain(sys: &BarrierSystem, branch: SolutionBranch) -> Result<f64> {
    let found = sys.validate()?;
    let r = sys.reduced();
    let kin = natural_kinematics(r.energy, r.potential, found);
    let gain = gain_from(kin.group_velocity, r.width, branch)?;
    Ok(sys.scales().from_internal(gain, Dimension::Time))
}

/// Linearized traversal velocity, in `sys` velocity units.
pub fn traversal_velocity(sys: &BarrierSystem, branch: SolutionBranch) -> Result<f64> {
    let found = sys.validate()?;
    let r = sys.reduced();
    let kin = natural_kinematics(r.energy, r.potential, found);
    let vt = traversal_from(kin.group_velocity, r.width, r.gap, branch)?;
    Ok(sys.scales().from_internal(vt, Dimension::Velocity))
}

/// Width ratio `a/L` at which `V_T = c`. May be negative or infinite.
pub fn threshold_ratio(branch: SolutionBranch, beta: f64) -> Result<f64> {
    require_branch(branch)?;
    Ok(match branch {
        SolutionBranch::A => (beta * beta - beta) / (2.0 + 2.0 * beta - 5.0 * beta * beta),
        _ => (1.0 - beta) / (beta * beta * beta + 2.0 * beta - 2.0),
    })
}

pub fn threshold_curve(branch: SolutionBranch, betas: &[f64]) -> Result<Vec<CurvePoint>> {
    threshold_curve_with(branch, betas, Execution::default())
}

pub fn threshold_curve_with(branch: SolutionBranch, betas: &[f64], exec: Execution) -> Result<Vec<CurvePoint>> {
    require_branch(branch)?;
    if let Some(bad) = betas.iter().find(|b| !(**b > 0.0 && **b <= 1.0)) {
        return Err(Error::InvalidParameter {
            name: "beta",
            reason: format!("{bad} outside (0, 1]"),
        });
    }
    Ok(map_ordered(betas, exec, |&beta| {
        let alpha_ratio = threshold_ratio(branch, beta).expect("branch checked");
        CurvePoint {
            beta,
            alpha_ratio,
            branch,
            feasible: alpha_ratio.is_finite() && alpha_ratio > 0.0,
        }
    }))
}

/// Group velocity (in `c`) below which no width ratio gives `V_T ≥ c`.
pub fn critical_beta(branch: SolutionBranch) -> Result<f64> {
    require_branch(branch)?;
    Ok(match branch {
        SolutionBranch::A => (1.0 + 11f64.sqrt()) / 5.0,
        _ => bisect(|b| b * b * b + 2.0 * b - 2.0, 0.0, 1.0, 1e-13),
    })
}

/// `β` at which the branch-A time gain changes sign, `√(2/3)`.
pub fn gain_threshold_beta() -> f64 {
    (2.0f64 / 3.0).sqrt()
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut f_lo = f(lo);
    debug_assert!(f_lo * f(hi) <= 0.0, "root not bracketed");
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite input")
}

/// Float margins farther than this from zero cannot change sign under
/// rounding; closer ones are recomputed exactly.
const EXACT_FILTER: f64 = 1e-9;

/// `V_T/c − 1` for the given lengths. Near the curve it is evaluated exactly
/// on the binary values of the inputs.
fn exact_margin(beta: f64, width: f64, gap: f64, branch: SolutionBranch) -> Result<f64> {
    let fast = traversal_from(beta, width, gap, branch)? - 1.0;
    if fast.abs() > EXACT_FILTER {
        return Ok(fast);
    }
    let one = BigRational::one();
    let b = rational(beta);
    let a = rational(width);
    let share = &a / (rational(gap) + &a * BigRational::from_integer(BigInt::from(2)));
    let vt = match branch {
        SolutionBranch::A => {
            let bracket =
                BigRational::from_integer(BigInt::from(3)) - BigRational::from_integer(BigInt::from(2)) / (&b * &b);
            &b + &b * &share * bracket
        }
        _ => &b + &share * &b * &b * &b,
    };
    Ok((vt - one).to_f64().expect("finite margin"))
}

/// Which side of the threshold curve `point` lies on.
pub fn classify(point: &RatioPoint) -> Result<RegionVerdict> {
    classify_lengths(point.beta, point.width_ratio, 1.0, point.branch)
}

/// As [`classify`], for explicit barrier width and gap.
pub fn classify_lengths(beta: f64, width: f64, gap: f64, branch: SolutionBranch) -> Result<RegionVerdict> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidParameter {
            name: "beta",
            reason: format!("{beta} outside (0, 1)"),
        });
    }
    if !(width >= 0.0 && width.is_finite() && gap >= 0.0 && gap.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "width_ratio",
            reason: "lengths must be finite and non-negative".into(),
        });
    }
    Ok(RegionVerdict::from_margin(exact_margin(beta, width, gap, branch)?))
}
