//! Unit conventions.
//!
//! Internally every quantity is expressed in natural units: `ħ = c = m = 1`,
//! energies in `mc²`, lengths in `ħ/(mc)`, times in `ħ/(mc²)`. A [`Scales`]
//! value holds the size of one internal unit measured in the caller's unit
//! system, so conversion is a single multiply or divide.

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// One electronvolt in joules.
pub const ELECTRON_VOLT: f64 = 1.602_176_634e-19;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnitSystem {
    /// `ħ = c = 1`; the particle mass sets the energy scale.
    #[default]
    Natural,
    /// Mass in kg, energies in eV, lengths in m, times in s.
    Si,
}

impl UnitSystem {
    pub fn label(self) -> &'static str {
        match self {
            UnitSystem::Natural => "natural-units",
            UnitSystem::Si => "si-units",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Energy,
    Length,
    Time,
    WaveNumber,
    Velocity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scales {
    pub energy: f64,
    pub length: f64,
    pub time: f64,
    pub wave_number: f64,
    pub velocity: f64,
}

impl Scales {
    /// Scales for a particle of the given mass, expressed in `units`.
    ///
    /// In natural mode `ħ = c = 1` and `mass` is itself the energy unit, so
    /// `mass = 1` gives the identity.
    pub fn new(units: UnitSystem, mass: f64) -> Self {
        match units {
            UnitSystem::Natural => Scales {
                energy: mass,
                length: 1.0 / mass,
                time: 1.0 / mass,
                wave_number: mass,
                velocity: 1.0,
            },
            UnitSystem::Si => {
                let rest_joules = mass * SPEED_OF_LIGHT * SPEED_OF_LIGHT;
                let length = HBAR / (mass * SPEED_OF_LIGHT);
                Scales {
                    energy: rest_joules / ELECTRON_VOLT,
                    length,
                    time: HBAR / rest_joules,
                    wave_number: 1.0 / length,
                    velocity: SPEED_OF_LIGHT,
                }
            }
        }
    }

    pub fn unit(&self, dim: Dimension) -> f64 {
        match dim {
            Dimension::Energy => self.energy,
            Dimension::Length => self.length,
            Dimension::Time => self.time,
            Dimension::WaveNumber => self.wave_number,
            Dimension::Velocity => self.velocity,
        }
    }

    pub fn to_internal(&self, value: f64, dim: Dimension) -> f64 {
        value / self.unit(dim)
    }

    pub fn from_internal(&self, value: f64, dim: Dimension) -> f64 {
        value * self.unit(dim)
    }
}

/// Converts a natural-unit value (`ħ = c = m = 1`) to SI for a particle of
/// mass `mass_kg`.
pub fn natural_to_si(value: f64, dim: Dimension, mass_kg: f64) -> f64 {
    Scales::new(UnitSystem::Si, mass_kg).from_internal(value, dim)
}

pub fn si_to_natural(value: f64, dim: Dimension, mass_kg: f64) -> f64 {
    Scales::new(UnitSystem::Si, mass_kg).to_internal(value, dim)
}
