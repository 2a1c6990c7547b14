//! Physical constants and conversions between SI and atomic units.
//!
//! Everything inside the library is computed in Hartree atomic units
//! (hbar = m_e = a_0 = E_h = 1). SI only appears at the edges.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{QuenchError, Result};

// CODATA 2018 recommended values.

/// Reduced Planck constant (J s), exact.
pub const HBAR: f64 = 1.054571817e-34;
/// Electron mass (kg), +/- 0.0000000028e-31.
pub const ELECTRON_MASS: f64 = 9.1093837015e-31;
/// Proton mass (kg), +/- 0.00000000051e-27.
pub const PROTON_MASS: f64 = 1.67262192369e-27;
/// Bohr radius (m), +/- 0.00000000080e-11.
pub const BOHR_RADIUS: f64 = 5.29177210903e-11;
/// Hartree energy (J), +/- 0.0000000000085e-18.
pub const HARTREE: f64 = 4.3597447222071e-18;
/// Elementary charge (C), exact.
pub const ELEMENTARY_CHARGE: f64 = 1.602176634e-19;
/// Standard gravitational acceleration (m s^-2), exact by convention.
pub const STANDARD_GRAVITY: f64 = 9.80665;
/// Static dipole polarizability of ground-state (anti)hydrogen (a.u.).
pub const HYDROGEN_POLARIZABILITY: f64 = 4.5;

/// Antihydrogen mass (kg). The 13.6 eV binding energy (1.5e-8 relative)
/// is dropped.
pub const ANTIHYDROGEN_MASS: f64 = PROTON_MASS + ELECTRON_MASS;

/// Dimensions that cross the SI/atomic-unit boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dimension {
    Length,
    Energy,
    Time,
    Mass,
    Velocity,
    /// Angular frequency (rad/s).
    Frequency,
    Acceleration,
}

impl Dimension {
    pub const ALL: [Dimension; 7] = [
        Dimension::Length,
        Dimension::Energy,
        Dimension::Time,
        Dimension::Mass,
        Dimension::Velocity,
        Dimension::Frequency,
        Dimension::Acceleration,
    ];

    /// Size of one atomic unit of this dimension, in SI.
    pub fn atomic_unit(self) -> f64 {
        let time = HBAR / HARTREE;
        match self {
            Dimension::Length => BOHR_RADIUS,
            Dimension::Energy => HARTREE,
            Dimension::Time => time,
            Dimension::Mass => ELECTRON_MASS,
            Dimension::Velocity => BOHR_RADIUS / time,
            Dimension::Frequency => 1.0 / time,
            Dimension::Acceleration => BOHR_RADIUS / (time * time),
        }
    }

    pub fn si_unit(self) -> &'static str {
        match self {
            Dimension::Length => "m",
            Dimension::Energy => "J",
            Dimension::Time => "s",
            Dimension::Mass => "kg",
            Dimension::Velocity => "m/s",
            Dimension::Frequency => "rad/s",
            Dimension::Acceleration => "m/s^2",
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Dimension::Length => "length",
            Dimension::Energy => "energy",
            Dimension::Time => "time",
            Dimension::Mass => "mass",
            Dimension::Velocity => "velocity",
            Dimension::Frequency => "frequency",
            Dimension::Acceleration => "acceleration",
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Dimension {
    type Err = QuenchError;

    fn from_str(s: &str) -> Result<Self> {
        Dimension::ALL
            .into_iter()
            .find(|d| d.tag() == s)
            .ok_or_else(|| QuenchError::UnknownDimension(s.to_string()))
    }
}

/// SI value to atomic units.
pub fn to_au(value: f64, dim: Dimension) -> f64 {
    value / dim.atomic_unit()
}

/// Atomic-unit value to SI.
pub fn from_au(value: f64, dim: Dimension) -> f64 {
    value * dim.atomic_unit()
}

/// Tag-based variant of [`to_au`] for text front-ends.
pub fn to_au_tagged(value: f64, tag: &str) -> Result<f64> {
    Ok(to_au(value, tag.parse()?))
}

pub fn from_au_tagged(value: f64, tag: &str) -> Result<f64> {
    Ok(from_au(value, tag.parse()?))
}

/// The physical parameters of the atom and the field it falls in.
///
/// Inertial and gravitational masses are kept apart so that a
/// gravitational-mass anomaly can be dialled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Constants {
    /// J s
    pub hbar: f64,
    /// kg
    pub m_inertial: f64,
    /// kg
    pub m_grav: f64,
    /// m/s^2
    pub g: f64,
    /// m
    pub bohr_radius: f64,
    /// J
    pub hartree: f64,
    /// atomic units
    pub alpha_p: f64,
    /// C; the charge unit, so that Q is a pure number
    pub e_charge: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self {
            hbar: HBAR,
            m_inertial: ANTIHYDROGEN_MASS,
            m_grav: ANTIHYDROGEN_MASS,
            g: STANDARD_GRAVITY,
            bohr_radius: BOHR_RADIUS,
            hartree: HARTREE,
            alpha_p: HYDROGEN_POLARIZABILITY,
            e_charge: ELEMENTARY_CHARGE,
        }
    }
}

/// One line of the constants audit dump.
#[derive(Debug, Clone, Serialize)]
pub struct ConstantEntry {
    pub name: &'static str,
    pub value: f64,
    pub unit: &'static str,
}

impl Constants {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("m_inertial", self.m_inertial),
            ("m_grav", self.m_grav),
            ("g", self.g),
            ("alpha_p", self.alpha_p),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(QuenchError::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Inertial mass in units of the electron mass.
    pub fn mass_au(&self) -> f64 {
        to_au(self.m_inertial, Dimension::Mass)
    }

    pub fn grav_mass_au(&self) -> f64 {
        to_au(self.m_grav, Dimension::Mass)
    }

    pub fn g_au(&self) -> f64 {
        to_au(self.g, Dimension::Acceleration)
    }

    /// Gravitational force M g in Hartree per Bohr.
    pub fn weight_au(&self) -> f64 {
        self.grav_mass_au() * self.g_au()
    }

    /// Length scale sqrt(m alpha_p Q^2)/hbar of the polarization potential
    /// at rho = 0, in a.u.
    pub fn l_pol_au(&self, charge: f64) -> f64 {
        (self.mass_au() * self.alpha_p).sqrt() * charge.abs()
    }

    pub fn dump(&self) -> Vec<ConstantEntry> {
        vec![
            ConstantEntry { name: "hbar", value: self.hbar, unit: "J s" },
            ConstantEntry { name: "m_inertial", value: self.m_inertial, unit: "kg" },
            ConstantEntry { name: "m_grav", value: self.m_grav, unit: "kg" },
            ConstantEntry { name: "g", value: self.g, unit: "m/s^2" },
            ConstantEntry { name: "bohr_radius", value: self.bohr_radius, unit: "m" },
            ConstantEntry { name: "hartree", value: self.hartree, unit: "J" },
            ConstantEntry { name: "alpha_p", value: self.alpha_p, unit: "a.u." },
            ConstantEntry { name: "e_charge", value: self.e_charge, unit: "C" },
            ConstantEntry { name: "m_inertial_au", value: self.mass_au(), unit: "m_e" },
            ConstantEntry { name: "m_grav_au", value: self.grav_mass_au(), unit: "m_e" },
            ConstantEntry { name: "atomic_time", value: Dimension::Time.atomic_unit(), unit: "s" },
            ConstantEntry { name: "atomic_velocity", value: Dimension::Velocity.atomic_unit(), unit: "m/s" },
        ]
    }
}
