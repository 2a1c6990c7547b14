//! Quantum states of an atom bouncing on an ideal mirror in a uniform
//! gravitational field.
//!
//! SI units throughout.

use serde::Serialize;

use crate::airy::{airy_ai, airy_zeros};
use crate::error::{QuenchError, Result};
use crate::units::{Constants, ELEMENTARY_CHARGE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scales {
    /// (hbar^2 / (2 m M g))^(1/3), m
    pub l_g: f64,
    /// M g l_g, J
    pub eps_g: f64,
    /// hbar / eps_g, s
    pub tau_g: f64,
}

/// Gravitational length, energy and time for inertial mass `m`,
/// gravitational mass `big_m` (kg) and acceleration `g` (m/s^2).
pub fn scales(hbar: f64, m: f64, big_m: f64, g: f64) -> Result<Scales> {
    if !(m > 0.0 && big_m > 0.0 && g > 0.0 && hbar > 0.0) {
        return Err(QuenchError::Domain(format!("scales need positive m, M, g; got {m}, {big_m}, {g}")));
    }
    let l_g = (hbar * hbar / (2.0 * m * big_m * g)).cbrt();
    let eps_g = big_m * g * l_g;
    Ok(Scales { l_g, eps_g, tau_g: hbar / eps_g })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GravitationalSpectrum {
    lambdas: Vec<f64>,
    pub scales: Scales,
    pub hbar: f64,
    pub m_inertial: f64,
    pub m_grav: f64,
    pub g: f64,
}

/// One row of the `spectrum` export.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub n: usize,
    pub lambda: f64,
    #[serde(rename = "E_peV")]
    pub e_pev: f64,
    pub omega_1n_rad_s: f64,
}

impl GravitationalSpectrum {
    pub fn new(n_states: usize, constants: &Constants) -> Result<Self> {
        constants.validate()?;
        let scales = scales(constants.hbar, constants.m_inertial, constants.m_grav, constants.g)?;
        Ok(Self {
            lambdas: airy_zeros(n_states)?,
            scales,
            hbar: constants.hbar,
            m_inertial: constants.m_inertial,
            m_grav: constants.m_grav,
            g: constants.g,
        })
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    fn check(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.lambdas.len() {
            Err(QuenchError::Domain(format!("state index {i} outside 1..={}", self.lambdas.len())))
        } else {
            Ok(())
        }
    }

    /// lambda_i, 1-based.
    pub fn lambda(&self, i: usize) -> Result<f64> {
        self.check(i)?;
        Ok(self.lambdas[i - 1])
    }

    /// E_i in J.
    pub fn energy(&self, i: usize) -> Result<f64> {
        Ok(self.lambda(i)? * self.scales.eps_g)
    }

    /// omega_ik = (lambda_i - lambda_k) eps_g / hbar, rad/s.
    pub fn omega(&self, i: usize, k: usize) -> Result<f64> {
        Ok((self.lambda(i)? - self.lambda(k)?) * self.scales.eps_g / self.hbar)
    }

    /// 1/(lambda_i - lambda_k); the diagonal is excluded.
    pub fn coupling(&self, i: usize, k: usize) -> Result<f64> {
        if i == k {
            return Err(QuenchError::Domain(format!("no coupling for i = k = {i}")));
        }
        Ok(1.0 / (self.lambda(i)? - self.lambda(k)?))
    }

    /// Largest |Ai(-lambda_n)| over the stored zeros.
    pub fn max_residual(&self) -> f64 {
        self.lambdas.iter().map(|&l| airy_ai(-l).0.abs()).fold(0.0, f64::max)
    }

    pub fn rows(&self) -> Vec<SpectrumRow> {
        (1..=self.len())
            .map(|n| SpectrumRow {
                n,
                lambda: self.lambdas[n - 1],
                e_pev: self.lambdas[n - 1] * self.scales.eps_g / ELEMENTARY_CHARGE * 1e12,
                omega_1n_rad_s: (self.lambdas[0] - self.lambdas[n - 1]) * self.scales.eps_g / self.hbar,
            })
            .collect()
    }
}
