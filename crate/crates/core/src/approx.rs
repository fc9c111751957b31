//! Transparent-limit (`qa ≪ 1`) machinery.
//!
//! To first order in `qa` the quotient entering the closed-form phase time is
//!
//! ```text
//! h₁/(Γ²+Δ²) ≈ { (V0 − E)k²(1/α − α) − mc²(k² + q²)(1/α + α) } · qa
//! ```
//!
//! Both brackets multiply `qa`: at `a = 0` the quotient vanishes identically,
//! and the slope of the exact quotient at `qa = 0` equals the sum of the two
//! brackets (see `expansion_matches_exact_slope`).
//!
//! The branch closed forms assume `E ≫ mc²` in addition to `qa ≪ 1`:
//!
//! ```text
//! branch A:  τ ≈ (V_φ/c²) [ L + a(1 + 2m²c²/ħ²k²) ]
//! branch B:  τ ≈ (V_φ/c²) [ L + (c²/V_φ²) a(1 + 2m²c²/ħ²k²) ]
//! ```
//!
//! Both keep only the `1/α` (branch A) or `α` (branch B) part of the first-order
//! bracket. Near `E ≫ mc²` the discarded part is of the same size as the
//! retained one, so the barrier contribution of the closed forms is about half
//! that of the full first-order expression. The closed forms are therefore
//! biased at `O(a)`; [`phase_time_first_order`] does not carry that bias.

use crate::error::{Error, Result};
use crate::exact::{Method, TimeResult};
use crate::kinematics::{natural_kinematics, validate_transparency, BarrierSystem, Kinematics, SolutionBranch};
use crate::units::Dimension;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpansionOrder {
    First,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionResult {
    /// First-order estimate of `h₁/(Γ²+Δ²)`, natural units.
    pub value: f64,
    pub order_used: ExpansionOrder,
    pub qa: f64,
}

/// Barrier height that puts the evanescent constant at `q` on the given
/// branch, in units with `ħ = c = 1`: `E + m − q²/2m` (A) or `E − m + q²/2m` (B).
pub fn potential_for_q(branch: SolutionBranch, energy: f64, q: f64, mass: f64) -> Result<f64> {
    let shift = mass - q * q / (2.0 * mass);
    match branch {
        SolutionBranch::A => Ok(energy + shift),
        SolutionBranch::B => Ok(energy - shift),
        SolutionBranch::Degenerate => Err(Error::BranchDegenerate),
    }
}

/// The two first-order coefficients `(c0, c1)`, natural units.
fn first_order_brackets(kin: &Kinematics, energy: f64, potential: f64) -> (f64, f64) {
    let (k, q, al) = (kin.k, kin.q, kin.matching_ratio);
    let c0 = (potential - energy) * k * k * (1.0 / al - al);
    let c1 = -(k * k + q * q) * (1.0 / al + al);
    (c0, c1)
}

pub fn expansion_first_order(kin: &Kinematics, sys: &BarrierSystem) -> ExpansionResult {
    let r = sys.reduced();
    let nat = kin.to_natural(&sys.scales());
    let qa = validate_transparency(&nat, r.width);
    let (c0, c1) = first_order_brackets(&nat, r.energy, r.potential);
    ExpansionResult {
        value: (c0 + c1) * qa,
        order_used: ExpansionOrder::First,
        qa,
    }
}

/// Closed-form phase time with the quotient replaced by its first-order
/// expansion. Valid on either branch, including `V0 = E`.
pub fn phase_time_first_order(sys: &BarrierSystem) -> Result<TimeResult> {
    let branch = sys.validate()?;
    let r = sys.reduced();
    let kin = natural_kinematics(r.energy, r.potential, branch);
    let qa = validate_transparency(&kin, r.width);
    let (c0, c1) = first_order_brackets(&kin, r.energy, r.potential);
    let (k, q) = (kin.k, kin.q);
    // (c0 + c1)·qa / (k²q²), with one q cancelled
    let tau = r.gap * r.energy / k - (c0 + c1) * r.width / (k * k * q);
    Ok(TimeResult {
        value: sys.scales().from_internal(tau, Dimension::Time),
        method: Method::FirstOrder,
        qa,
    })
}

fn branch_inputs(sys: &BarrierSystem, expected: SolutionBranch) -> Result<(Kinematics, f64, f64)> {
    let found = sys.validate()?;
    if found != expected {
        return Err(Error::WrongBranch { expected, found });
    }
    let r = sys.reduced();
    let kin = natural_kinematics(r.energy, r.potential, found);
    validate_transparency(&kin, r.width);
    if r.energy < 10.0 {
        log::warn!("E = {:.3} mc² is not ≫ mc²; branch closed form is untrusted", r.energy);
    }
    Ok((kin, r.width, r.gap))
}

pub fn phase_time_branch_a(sys: &BarrierSystem) -> Result<TimeResult> {
    let (kin, a, l) = branch_inputs(sys, SolutionBranch::A)?;
    let k = kin.k;
    let tau = kin.phase_velocity * (l + a * (1.0 + 2.0 / (k * k)));
    Ok(TimeResult {
        value: sys.scales().from_internal(tau, Dimension::Time),
        method: Method::BranchA,
        qa: kin.q * a,
    })
}

pub fn phase_time_branch_b(sys: &BarrierSystem) -> Result<TimeResult> {
    let (kin, a, l) = branch_inputs(sys, SolutionBranch::B)?;
    let (k, vphi) = (kin.k, kin.phase_velocity);
    let tau = vphi * (l + a * (1.0 + 2.0 / (k * k)) / (vphi * vphi));
    Ok(TimeResult {
        value: sys.scales().from_internal(tau, Dimension::Time),
        method: Method::BranchB,
        qa: kin.q * a,
    })
}

/// Branch closed form matching the system's branch; `None` at `V0 = E`.
pub fn phase_time_branch(sys: &BarrierSystem) -> Result<Option<TimeResult>> {
    match sys.validate()? {
        SolutionBranch::A => phase_time_branch_a(sys).map(Some),
        SolutionBranch::B => phase_time_branch_b(sys).map(Some),
        SolutionBranch::Degenerate => Ok(None),
    }
}
