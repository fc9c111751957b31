//! Scenario validation and relativistic kinematics.
//!
//! Outside the barriers the wave number satisfies `ħck = √(E² − m²c⁴)`;
//! inside, the evanescent decay constant is `ħcq = √(m²c⁴ − (V0 − E)²)`.
//! Tunneling requires `E − mc² < V0 < E + mc²`; at the upper edge the barrier
//! turns supercritical, at the lower edge the particle passes over it.
//!
//! The transparency parameter is `qa`. Some treatments state the transparent
//! condition as `ka ≪ 1` instead; `qa` is what every expansion in this crate
//! is organized around, so that is what [`validate_transparency`] reports.

use crate::error::{Error, Result};
use crate::units::{Dimension, Scales, UnitSystem};

/// Above this `qa` the transparent-limit formulas are reported but flagged.
pub const TRANSPARENCY_WARNING: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolutionBranch {
    /// `E < V0 < E + mc²`
    A,
    /// `E − mc² < V0 < E`
    B,
    /// `V0 = E`
    Degenerate,
}

impl SolutionBranch {
    pub fn label(self) -> &'static str {
        match self {
            SolutionBranch::A => "A",
            SolutionBranch::B => "B",
            SolutionBranch::Degenerate => "Degenerate",
        }
    }
}

/// Two identical square barriers of height `potential` and width `width`,
/// separated by a field-free gap of length `gap`.
///
/// The structure occupies `[0, a] ∪ [a + L, 2a + L]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierSystem {
    pub mass: f64,
    pub energy: f64,
    pub potential: f64,
    pub width: f64,
    pub gap: f64,
    pub units: UnitSystem,
}

/// A [`BarrierSystem`] rescaled to `ħ = c = m = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reduced {
    pub energy: f64,
    pub potential: f64,
    pub width: f64,
    pub gap: f64,
}

impl BarrierSystem {
    /// Natural units with the particle mass as unit of energy.
    pub fn natural(energy: f64, potential: f64, width: f64, gap: f64) -> Self {
        BarrierSystem {
            mass: 1.0,
            energy,
            potential,
            width,
            gap,
            units: UnitSystem::Natural,
        }
    }

    /// Mass in kg, energies in eV, lengths in m.
    pub fn si(mass_kg: f64, energy_ev: f64, potential_ev: f64, width_m: f64, gap_m: f64) -> Self {
        BarrierSystem {
            mass: mass_kg,
            energy: energy_ev,
            potential: potential_ev,
            width: width_m,
            gap: gap_m,
            units: UnitSystem::Si,
        }
    }

    pub fn with_energy(mut self, energy: f64) -> Self {
        self.energy = energy;
        self
    }

    pub fn with_potential(mut self, potential: f64) -> Self {
        self.potential = potential;
        self
    }

    pub fn with_width(mut self, width: f64) -> Self {
        self.width = width;
        self
    }

    pub fn with_gap(mut self, gap: f64) -> Self {
        self.gap = gap;
        self
    }

    pub fn scales(&self) -> Scales {
        Scales::new(self.units, self.mass)
    }

    pub fn reduced(&self) -> Reduced {
        let s = self.scales();
        Reduced {
            energy: s.to_internal(self.energy, Dimension::Energy),
            potential: s.to_internal(self.potential, Dimension::Energy),
            width: s.to_internal(self.width, Dimension::Length),
            gap: s.to_internal(self.gap, Dimension::Length),
        }
    }

    /// Checks the finite/non-negative constraints and the tunneling window,
    /// returning the solution branch.
    pub fn validate(&self) -> Result<SolutionBranch> {
        check_finite("mass", self.mass)?;
        if self.mass <= 0.0 {
            return Err(invalid("mass", "must be positive"));
        }
        check_finite("energy", self.energy)?;
        check_finite("potential", self.potential)?;
        check_finite("width", self.width)?;
        check_finite("gap", self.gap)?;
        if self.width < 0.0 {
            return Err(invalid("width", "must be non-negative"));
        }
        if self.gap < 0.0 {
            return Err(invalid("gap", "must be non-negative"));
        }
        let r = self.reduced();
        let rest = self.scales().energy;
        let branch = classify_window(r.energy, r.potential).map_err(|e| match e {
            Window::BelowRest => Error::EnergyBelowRest {
                energy: self.energy,
                rest,
            },
            Window::Klein => Error::KleinRegime {
                potential: self.potential,
                bound: self.energy + rest,
            },
            Window::Propagating => Error::Propagating {
                potential: self.potential,
                bound: self.energy - rest,
            },
        })?;
        Ok(branch)
    }
}

pub(crate) enum Window {
    BelowRest,
    Klein,
    Propagating,
}

/// Tunneling-window check in natural units.
pub(crate) fn classify_window(energy: f64, potential: f64) -> std::result::Result<SolutionBranch, Window> {
    if !(energy > 1.0) {
        return Err(Window::BelowRest);
    }
    if potential >= energy + 1.0 {
        return Err(Window::Klein);
    }
    if potential <= energy - 1.0 {
        return Err(Window::Propagating);
    }
    Ok(if potential > energy {
        SolutionBranch::A
    } else if potential < energy {
        SolutionBranch::B
    } else {
        SolutionBranch::Degenerate
    })
}

fn check_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, "must be finite"))
    }
}

fn invalid(name: &'static str, reason: &str) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinematics {
    /// Outside wave number.
    pub k: f64,
    /// Evanescent decay constant inside a barrier.
    pub q: f64,
    pub phase_velocity: f64,
    pub group_velocity: f64,
    /// `(k/q)(E − V0 + mc²)/(E + mc²)`, the spinor ratio across a barrier edge.
    /// Not to be confused with the width ratio `a/L` used in the analysis module.
    pub matching_ratio: f64,
    pub branch: SolutionBranch,
}

impl Kinematics {
    /// Expresses the same kinematics in natural units.
    pub fn to_natural(&self, scales: &Scales) -> Kinematics {
        Kinematics {
            k: scales.to_internal(self.k, Dimension::WaveNumber),
            q: scales.to_internal(self.q, Dimension::WaveNumber),
            phase_velocity: scales.to_internal(self.phase_velocity, Dimension::Velocity),
            group_velocity: scales.to_internal(self.group_velocity, Dimension::Velocity),
            ..*self
        }
    }
}

/// Kinematics in natural units, assuming the window has been validated.
pub(crate) fn natural_kinematics(energy: f64, potential: f64, branch: SolutionBranch) -> Kinematics {
    // (E-1)(E+1) and (1-d)(1+d) keep precision near the window edges.
    let k = ((energy - 1.0) * (energy + 1.0)).sqrt();
    let d = potential - energy;
    let q = ((1.0 - d) * (1.0 + d)).sqrt();
    Kinematics {
        k,
        q,
        phase_velocity: energy / k,
        group_velocity: k / energy,
        matching_ratio: (k / q) * (energy - potential + 1.0) / (energy + 1.0),
        branch,
    }
}

pub fn derive_kinematics(sys: &BarrierSystem) -> Result<Kinematics> {
    let branch = sys.validate()?;
    let r = sys.reduced();
    let nat = natural_kinematics(r.energy, r.potential, branch);
    let s = sys.scales();
    Ok(Kinematics {
        k: s.from_internal(nat.k, Dimension::WaveNumber),
        q: s.from_internal(nat.q, Dimension::WaveNumber),
        phase_velocity: s.from_internal(nat.phase_velocity, Dimension::Velocity),
        group_velocity: s.from_internal(nat.group_velocity, Dimension::Velocity),
        ..nat
    })
}

/// Returns `qa`. Emits a warning when it exceeds [`TRANSPARENCY_WARNING`].
pub fn validate_transparency(kin: &Kinematics, width: f64) -> f64 {
    let qa = kin.q * width;
    if qa > TRANSPARENCY_WARNING {
        log::warn!("qa = {qa:.3e} exceeds {TRANSPARENCY_WARNING}; transparent-limit results are untrusted");
    }
    qa
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn degenerate_point_has_unit_wave_numbers() {
        let s2 = 2f64.sqrt();
        let kin = derive_kinematics(&BarrierSystem::natural(s2, s2, 0.1, 1.0)).unwrap();
        assert!((kin.k - 1.0).abs() < 1e-15);
        assert_eq!(kin.q, 1.0);
        assert_eq!(kin.branch, SolutionBranch::Degenerate);
    }

    #[test]
    fn klein_boundary_is_exclusive() {
        let s2 = 2f64.sqrt();
        let err = derive_kinematics(&BarrierSystem::natural(s2, s2 + 1.0, 0.1, 1.0)).unwrap_err();
        assert!(matches!(err, Error::KleinRegime { .. }));
    }

    #[test]
    fn branch_a_hand_values() {
        let kin = derive_kinematics(&BarrierSystem::natural(5.0, 5.5, 0.1, 1.0)).unwrap();
        assert!((kin.k - 24f64.sqrt()).abs() < 1e-14);
        assert!((kin.q - 0.75f64.sqrt()).abs() < 1e-15);
        assert_eq!(kin.branch, SolutionBranch::A);
        assert!((kin.phase_velocity * kin.group_velocity - 1.0).abs() < 1e-15);
    }

    #[test]
    fn distinct_regime_errors() {
        let below = derive_kinematics(&BarrierSystem::natural(1.0, 1.2, 0.1, 1.0)).unwrap_err();
        assert!(matches!(below, Error::EnergyBelowRest { .. }));
        let over = derive_kinematics(&BarrierSystem::natural(3.0, 2.0, 0.1, 1.0)).unwrap_err();
        assert!(matches!(over, Error::Propagating { .. }));
        let klein = derive_kinematics(&BarrierSystem::natural(3.0, 4.5, 0.1, 1.0)).unwrap_err();
        assert!(matches!(klein, Error::KleinRegime { .. }));
        assert_ne!(below.kind(), over.kind());
        assert_ne!(over.kind(), klein.kind());
    }

    #[test]
    fn rejects_negative_lengths_and_nan() {
        assert!(matches!(
            BarrierSystem::natural(3.0, 3.5, -0.1, 1.0).validate(),
            Err(Error::InvalidParameter { name: "width", .. })
        ));
        assert!(matches!(
            BarrierSystem::natural(3.0, 3.5, 0.1, -1.0).validate(),
            Err(Error::InvalidParameter { name: "gap", .. })
        ));
        assert!(BarrierSystem::natural(f64::NAN, 3.5, 0.1, 1.0).validate().is_err());
    }

    #[test]
    fn zero_lengths_are_legal() {
        assert!(BarrierSystem::natural(3.0, 3.5, 0.0, 0.0).validate().is_ok());
    }

    #[test]
    fn transparency_products() {
        let kin = Kinematics {
            k: 1.0,
            q: 1.0,
            phase_velocity: 1.0,
            group_velocity: 1.0,
            matching_ratio: 1.0,
            branch: SolutionBranch::Degenerate,
        };
        assert_eq!(validate_transparency(&kin, 0.0), 0.0);
        assert_eq!(validate_transparency(&Kinematics { q: 0.5, ..kin }, 0.02), 0.01);
        assert_eq!(validate_transparency(&kin, 2.0), 2.0);
    }

    #[test]
    fn si_matches_natural() {
        let m = 9.109_383_7015e-31;
        let nat = BarrierSystem::natural(5.0, 5.5, 0.05, 10.0);
        let s = Scales::new(UnitSystem::Si, m);
        let si = BarrierSystem::si(m, 5.0 * s.energy, 5.5 * s.energy, 0.05 * s.length, 10.0 * s.length);
        let kn = derive_kinematics(&nat).unwrap();
        let ks = derive_kinematics(&si).unwrap().to_natural(&si.scales());
        assert!((kn.k - ks.k).abs() < 1e-12 * kn.k);
        assert!((kn.q - ks.q).abs() < 1e-12);
        assert!((kn.group_velocity - ks.group_velocity).abs() < 1e-12);
        assert_eq!(kn.branch, ks.branch);
    }

    proptest! {
        #[test]
        fn dispersion_relations_hold(energy in 1.001f64..200.0, frac in -0.999f64..0.999) {
            let sys = BarrierSystem::natural(energy, energy + frac, 0.1, 1.0);
            let kin = derive_kinematics(&sys).unwrap();
            let e2 = energy * energy;
            prop_assert!((kin.k * kin.k + 1.0 - e2).abs() <= 1e-12 * e2);
            prop_assert!((kin.q * kin.q + frac * frac - 1.0).abs() <= 1e-12);
            prop_assert!((kin.phase_velocity * kin.group_velocity - 1.0).abs() <= 1e-12);
            prop_assert!(kin.group_velocity < 1.0 && kin.phase_velocity > 1.0);
            prop_assert!(kin.matching_ratio > 0.0);
        }

        #[test]
        fn branch_tags_match_window(energy in 1.001f64..50.0, frac in -0.999f64..0.999) {
            let potential = energy + frac;
            let kin = derive_kinematics(&BarrierSystem::natural(energy, potential, 0.1, 1.0)).unwrap();
            match kin.branch {
                SolutionBranch::A => prop_assert!(energy < potential && potential < energy + 1.0),
                SolutionBranch::B => prop_assert!(energy - 1.0 < potential && potential < energy),
                SolutionBranch::Degenerate => prop_assert_eq!(potential, energy),
            }
        }
    }
}
