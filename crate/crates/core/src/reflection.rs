//! Zero-energy scattering length a(rho) on the surface plus charge
//! potential, and adaptively refined profiles of it.
//!
//! The wave function starts at `z_min` as the absorbing WKB wave and is
//! integrated outward. At large z the potential is a pure -C/z^4 tail, for
//! which the zero-energy solutions are known in closed form; matching to
//! them with the local C gives an estimate of a whose error falls as
//! 1/z_max^2, and one Richardson step removes that.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Write;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QuenchError, Result};
use crate::ode::{integrate, OdeOptions};
use crate::potentials::{badland, momentum_derivatives, Interaction, PotentialModel};
use crate::units::{from_au, Constants, Dimension};

/// The atom and the surface it scatters from.
#[derive(Debug, Clone, PartialEq)]
pub struct Surface {
    pub model: PotentialModel,
    /// Inertial mass of the atom (a.u.).
    pub mass: f64,
    /// Static dipole polarizability (a.u.).
    pub alpha_p: f64,
}

impl Surface {
    pub fn new(model: PotentialModel, mass: f64, alpha_p: f64) -> Result<Self> {
        if !(mass > 0.0) || !(alpha_p >= 0.0) {
            return Err(QuenchError::InvalidConfig("mass must be positive and alpha_p non-negative".into()));
        }
        Ok(Self { model, mass, alpha_p })
    }

    pub fn antihydrogen(model: PotentialModel) -> Self {
        Self::from_constants(model, &Constants::default())
    }

    pub fn from_constants(model: PotentialModel, constants: &Constants) -> Self {
        Self { model, mass: constants.mass_au(), alpha_p: constants.alpha_p }
    }

    pub fn interaction(&self, rho: f64, charge: f64) -> Interaction<'_> {
        Interaction::new(&self.model, rho, charge, self.alpha_p)
    }

    /// sqrt(m alpha_p) |Q|, the range of the polarization potential.
    pub fn l_pol(&self, charge: f64) -> f64 {
        (self.mass * self.alpha_p).sqrt() * charge.abs()
    }

    /// sqrt(2 m C4), the modulus of a for the bare quartic tail.
    pub fn quartic_length(&self) -> f64 {
        (2.0 * self.mass * self.model.c4()).sqrt()
    }

    /// Planar distance beyond which a(rho) is replaced by a_CP:
    /// 20 sqrt(2 m alpha_p Q^2).
    pub fn default_rho_cutoff(&self, charge: f64) -> f64 {
        20.0 * std::f64::consts::SQRT_2 * self.l_pol(charge)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ComplexLength {
    pub re: f64,
    pub im: f64,
}

impl ComplexLength {
    pub fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn norm(self) -> f64 {
        self.re.hypot(self.im)
    }

    /// (Re a, Im a) in metres.
    pub fn to_si(self) -> (f64, f64) {
        (from_au(self.re, Dimension::Length), from_au(self.im, Dimension::Length))
    }
}

impl From<Complex64> for ComplexLength {
    fn from(c: Complex64) -> Self {
        Self { re: c.re, im: c.im }
    }
}

/// Terms kept in the WKB log-derivative at the inner boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WkbOrder {
    /// -i p only.
    Plain,
    /// -i p - p'/(2p), the derivative of p^{-1/2} exp(-i int p).
    First,
    /// First order plus the i p B / 2 correction, which leaves an error
    /// of order B^2 instead of B.
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Inner boundary (a.u.); `None` chooses it from the badland function.
    pub z_min: Option<f64>,
    /// Outer extraction point (a.u.); `None` for 200 max(sqrt(2 m C4), l_pol, rho).
    pub z_max: Option<f64>,
    /// Largest |B(z_min)| accepted.
    pub wkb_threshold: f64,
    pub tol_rel: f64,
    pub max_refinements: usize,
    pub wkb_order: WkbOrder,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            z_min: None,
            z_max: None,
            wkb_threshold: 1e-4,
            tol_rel: 1e-7,
            max_refinements: 6,
            wkb_order: WkbOrder::Second,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(QuenchError::InvalidConfig(m));
        if !(self.wkb_threshold > 0.0 && self.wkb_threshold <= 0.01) {
            return bad(format!("wkb_threshold must be in (0, 0.01], got {}", self.wkb_threshold));
        }
        if !(self.tol_rel >= 1e-10 && self.tol_rel < 1.0) {
            return bad(format!("tol_rel must be in [1e-10, 1), got {}", self.tol_rel));
        }
        if self.max_refinements == 0 {
            return bad("max_refinements must be at least 1".into());
        }
        if let Some(z) = self.z_min {
            if !(z > 0.0) {
                return bad(format!("z_min must be positive, got {z}"));
            }
        }
        if let (Some(lo), Some(hi)) = (self.z_min, self.z_max) {
            if !(hi > lo) {
                return bad(format!("z_max ({hi}) must exceed z_min ({lo})"));
            }
        }
        Ok(())
    }

    /// Stable text form used to key caches and label outputs.
    pub fn id(&self) -> String {
        format!(
            "z_min={:?};z_max={:?};wkb={};tol={};refine={};order={:?}",
            self.z_min, self.z_max, self.wkb_threshold, self.tol_rel, self.max_refinements, self.wkb_order
        )
    }

    fn ode_options(&self) -> OdeOptions {
        OdeOptions {
            rtol: (self.tol_rel * 1e-3).clamp(1e-13, 1e-10),
            atol: 1e-15,
            renormalize_above: Some(1e100),
            ..Default::default()
        }
    }
}

const Z_MIN_SEARCH_START: f64 = 1e-4;

/// Largest point of a 2^(1/4) geometric grid starting at 1e-4 a.u. below
/// the first place where |B| reaches `threshold`. The search stops at
/// max(1, 0.01 sqrt(2 m C4)) a.u., far inside any badland of interest.
pub fn auto_z_min(surface: &Surface, rho: f64, charge: f64, threshold: f64) -> Result<f64> {
    let inter = surface.interaction(rho, charge);
    let cap = (0.01 * surface.quartic_length()).max(1.0);
    let step = 2f64.powf(0.25);
    let mut z = Z_MIN_SEARCH_START;
    if badland(&inter, surface.mass, 0.0, z)?.abs() >= threshold {
        return Err(QuenchError::WkbInvalid { z_min: z, badland: badland(&inter, surface.mass, 0.0, z)? });
    }
    loop {
        let next = z * step;
        if next > cap || badland(&inter, surface.mass, 0.0, next)?.abs() >= threshold {
            return Ok(z);
        }
        z = next;
    }
}

pub fn default_z_max(surface: &Surface, rho: f64, charge: f64) -> f64 {
    200.0 * surface.quartic_length().max(surface.l_pol(charge)).max(rho)
}

/// Absorbing WKB wave at `z_min`: (phi, phi'), normalized to phi = 1.
pub fn boundary_state(
    surface: &Surface,
    rho: f64,
    charge: f64,
    z_min: f64,
    config: &SolverConfig,
) -> Result<(Complex64, Complex64)> {
    let inter = surface.interaction(rho, charge);
    let (p, dp, ddp) = momentum_derivatives(&inter, surface.mass, 0.0, z_min)?;
    let b = ddp / (2.0 * p * p * p) - 0.75 * (dp / (p * p)).powi(2);
    if !(b.abs() < config.wkb_threshold) {
        return Err(QuenchError::WkbInvalid { z_min, badland: b });
    }
    let i = Complex64::i();
    let log_deriv = match config.wkb_order {
        WkbOrder::Plain => -i * p,
        WkbOrder::First => -i * p - dp / (2.0 * p),
        WkbOrder::Second => -i * p - dp / (2.0 * p) + 0.5 * i * p * b,
    };
    Ok((Complex64::new(1.0, 0.0), log_deriv))
}

/// Scattering length from (phi, phi') at z by matching to the zero-energy
/// solutions of -C/z^4 with C = -V(z) z^4.
pub fn tail_estimate(inter: &Interaction, mass: f64, z: f64, phi: Complex64, dphi: Complex64) -> Complex64 {
    let c = (-inter.value(z) * z.powi(4)).max(0.0);
    let theta = (2.0 * mass * c).sqrt() / z;
    let (s, co) = theta.sin_cos();
    let u1 = z * co;
    let du1 = co + theta * s;
    // u2 = sin(theta)/theta, u2' = (sin(theta) - theta cos(theta)) / (theta z)
    let (u2, du2) = if theta < 1e-2 {
        let t2 = theta * theta;
        (1.0 - t2 / 6.0 * (1.0 - t2 / 20.0 * (1.0 - t2 / 42.0)), t2 / 3.0 * (1.0 - t2 / 10.0 * (1.0 - t2 / 28.0)) / z)
    } else {
        (s / theta, (s - theta * co) / (theta * z))
    };
    (u1 * dphi - du1 * phi) / (dphi * u2 - phi * du2)
}

/// Richardson estimates from the tail matches at z/2 and z.
fn richardson(half: Complex64, full: Complex64) -> Complex64 {
    (4.0 * full - half) / 3.0
}

struct Run {
    /// Extrapolated from (z_max/2, z_max).
    inner: Complex64,
    /// Extrapolated from (z_max, 2 z_max), when requested.
    outer: Option<Complex64>,
}

fn run(
    surface: &Surface,
    rho: f64,
    charge: f64,
    z_min: f64,
    z_max: f64,
    with_outer: bool,
    config: &SolverConfig,
) -> Result<Run> {
    let inter = surface.interaction(rho, charge);
    let (phi, dphi) = boundary_state(surface, rho, charge, z_min, config)?;
    let two_m = 2.0 * surface.mass;
    let checkpoints: Vec<f64> =
        if with_outer { vec![0.5 * z_max, z_max, 2.0 * z_max] } else { vec![0.5 * z_max, z_max] };
    let p = -inter.value(z_min) * two_m;
    let opts = OdeOptions { initial_step: Some(0.01 / p.sqrt()), ..config.ode_options() };
    let sol = integrate(
        |z, y, dy| {
            dy[0] = y[1];
            dy[1] = two_m * inter.value(z) * y[0];
        },
        z_min,
        &[phi, dphi],
        &checkpoints,
        &opts,
    )?;
    let est: Vec<Complex64> = sol
        .checkpoints
        .iter()
        .map(|c| tail_estimate(&inter, surface.mass, c.t, c.state[0], c.state[1]))
        .collect();
    Ok(Run { inner: richardson(est[0], est[1]), outer: with_outer.then(|| richardson(est[1], est[2])) })
}

/// Single solve at fixed boundaries, Richardson-extrapolated in z_max but
/// without any convergence check.
pub fn scattering_length_at(
    surface: &Surface,
    rho: f64,
    charge: f64,
    z_min: f64,
    z_max: f64,
    config: &SolverConfig,
) -> Result<ComplexLength> {
    Ok(run(surface, rho, charge, z_min, z_max, false, config)?.inner.into())
}

/// Converged zero-energy scattering length at planar distance `rho` from a
/// charge `charge`.
pub fn scattering_length(surface: &Surface, rho: f64, charge: f64, config: &SolverConfig) -> Result<ComplexLength> {
    config.validate()?;
    // without a charge rho plays no role
    let rho = if charge == 0.0 { 0.0 } else { rho };
    let mut z_min = match config.z_min {
        Some(z) => z,
        None => auto_z_min(surface, rho, charge, config.wkb_threshold)?,
    };
    let mut z_max = config.z_max.unwrap_or_else(|| default_z_max(surface, rho, charge)).max(4.0 * z_min);
    let tol = config.tol_rel;
    let mut change = f64::INFINITY;
    for _ in 0..config.max_refinements {
        let base = run(surface, rho, charge, z_min, z_max, true, config)?;
        let finer = run(surface, rho, charge, 0.5 * z_min, z_max, false, config)?;
        let outer = base.outer.expect("requested");
        let scale = outer.norm().max(f64::MIN_POSITIVE);
        let dz_max = (outer - base.inner).norm() / scale;
        let dz_min = (finer.inner - base.inner).norm() / scale;
        change = dz_max.max(dz_min);
        if change < tol {
            let a = outer + (finer.inner - base.inner);
            if a.im > 10.0 * tol * a.norm() {
                return Err(QuenchError::SignViolation { im: a.im, tol: 10.0 * tol * a.norm() });
            }
            return Ok(a.into());
        }
        if dz_min >= tol {
            z_min *= 0.5;
        }
        if dz_max >= tol {
            z_max *= 2.0;
        }
    }
    Err(QuenchError::NonConvergence { refinements: config.max_refinements, change })
}

fn a_cp_cache() -> &'static Mutex<HashMap<String, ComplexLength>> {
    static CACHE: OnceLock<Mutex<HashMap<String, ComplexLength>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Scattering length on the bare surface potential, cached per surface
/// and configuration.
pub fn a_cp(surface: &Surface, config: &SolverConfig) -> Result<ComplexLength> {
    let key = format!("{}|m={}|{}", surface.model.id(), surface.mass, config.id());
    if let Some(a) = a_cp_cache().lock().expect("cache poisoned").get(&key) {
        return Ok(*a);
    }
    let a = scattering_length(surface, 0.0, 0.0, config)?;
    a_cp_cache().lock().expect("cache poisoned").insert(key, a);
    Ok(a)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileSample {
    pub rho: f64,
    pub a: ComplexLength,
    /// False when the gap to the next sample still violates the jump
    /// criterion after the last refinement.
    pub resolved: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileOptions {
    pub rho_lo: f64,
    pub rho_hi: f64,
    pub initial_points: usize,
    /// Adjacent samples may differ by at most this fraction of
    /// max(|a_i|, |a_CP|).
    pub jump_tol: f64,
    /// Bisection levels.
    pub max_depth: usize,
}

impl ProfileOptions {
    /// [0, 20 sqrt(2 m alpha_p Q^2)] on 200 initial points, 1% jumps.
    pub fn for_charge(surface: &Surface, charge: f64) -> Self {
        Self {
            rho_lo: 0.0,
            rho_hi: surface.default_rho_cutoff(charge).max(1.0),
            initial_points: 200,
            jump_tol: 0.01,
            max_depth: 16,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho_lo >= 0.0 && self.rho_hi > self.rho_lo) {
            return Err(QuenchError::InvalidConfig(format!("bad rho range [{}, {}]", self.rho_lo, self.rho_hi)));
        }
        if self.initial_points < 2 || !(self.jump_tol > 0.0) {
            return Err(QuenchError::InvalidConfig("profile needs >= 2 points and a positive jump_tol".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoProfile {
    pub samples: Vec<ProfileSample>,
    pub charge: f64,
    pub a_cp: ComplexLength,
    pub model_id: String,
    pub config_id: String,
    pub jump_tol: f64,
}

impl RhoProfile {
    pub fn rho_hi(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.rho)
    }

    pub fn unresolved_count(&self) -> usize {
        self.samples.iter().filter(|s| !s.resolved).count()
    }

    /// (lo, hi) planar intervals left unresolved.
    pub fn unresolved_intervals(&self) -> Vec<(f64, f64)> {
        self.samples.windows(2).filter(|w| !w[0].resolved).map(|w| (w[0].rho, w[1].rho)).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("rho_au,rho_m,re_a_au,im_a_au,re_a_m,im_a_m,resolved\n");
        for s in &self.samples {
            let (re_m, im_m) = s.a.to_si();
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                s.rho,
                from_au(s.rho, Dimension::Length),
                s.a.re,
                s.a.im,
                re_m,
                im_m,
                s.resolved
            );
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(self.to_csv().as_bytes())
    }

    /// Reads the sample rows written by [`RhoProfile::to_csv`]; `#` lines
    /// are skipped. Metadata other than the samples must be supplied.
    pub fn parse_samples(text: &str) -> Result<Vec<ProfileSample>> {
        let mut out = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("rho_au") {
                continue;
            }
            let err = |m: String| QuenchError::Parse { line: i + 1, message: m };
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 7 {
                return Err(err(format!("expected 7 columns, got {}", cols.len())));
            }
            let num = |s: &str| s.trim().parse::<f64>().map_err(|e| err(e.to_string()));
            let resolved = cols[6].trim().parse::<bool>().map_err(|e| err(e.to_string()))?;
            out.push(ProfileSample {
                rho: num(cols[0])?,
                a: ComplexLength::new(num(cols[2])?, num(cols[3])?),
                resolved,
            });
        }
        Ok(out)
    }
}

fn jump_violated(a: ComplexLength, b: ComplexLength, a_cp: ComplexLength, tol: f64) -> bool {
    let scale = a.norm().max(a_cp.norm());
    (a.to_complex() - b.to_complex()).norm() > tol * scale
}

/// Samples a(rho) on a uniform grid and bisects every gap whose jump
/// exceeds the tolerance. New points of each level are evaluated in
/// parallel; the output depends only on the rho values.
pub fn scan_profile(
    surface: &Surface,
    charge: f64,
    opts: &ProfileOptions,
    config: &SolverConfig,
) -> Result<RhoProfile> {
    opts.validate()?;
    config.validate()?;
    let a_cp = a_cp(surface, config)?;
    let eval = |rhos: &[f64]| -> Result<Vec<ComplexLength>> {
        if charge == 0.0 {
            return Ok(vec![a_cp; rhos.len()]);
        }
        rhos.par_iter().map(|&r| scattering_length(surface, r, charge, config)).collect()
    };
    let n = opts.initial_points;
    let mut rhos: Vec<f64> =
        (0..n).map(|i| opts.rho_lo + (opts.rho_hi - opts.rho_lo) * i as f64 / (n - 1) as f64).collect();
    let mut values = eval(&rhos)?;

    for _ in 0..opts.max_depth {
        let mids: Vec<f64> = (0..rhos.len() - 1)
            .filter(|&i| jump_violated(values[i], values[i + 1], a_cp, opts.jump_tol))
            .map(|i| 0.5 * (rhos[i] + rhos[i + 1]))
            .collect();
        if mids.is_empty() {
            break;
        }
        let new_values = eval(&mids)?;
        let mut merged_r = Vec::with_capacity(rhos.len() + mids.len());
        let mut merged_v = Vec::with_capacity(rhos.len() + mids.len());
        let mut j = 0;
        for i in 0..rhos.len() {
            merged_r.push(rhos[i]);
            merged_v.push(values[i]);
            if j < mids.len() && i + 1 < rhos.len() && mids[j] < rhos[i + 1] && mids[j] > rhos[i] {
                merged_r.push(mids[j]);
                merged_v.push(new_values[j]);
                j += 1;
            }
        }
        rhos = merged_r;
        values = merged_v;
    }

    let samples = (0..rhos.len())
        .map(|i| ProfileSample {
            rho: rhos[i],
            a: values[i],
            resolved: i + 1 == rhos.len() || !jump_violated(values[i], values[i + 1], a_cp, opts.jump_tol),
        })
        .collect();
    Ok(RhoProfile {
        samples,
        charge,
        a_cp,
        model_id: surface.model.id(),
        config_id: config.id(),
        jump_tol: opts.jump_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quartic(c4: f64) -> Surface {
        Surface::antihydrogen(PotentialModel::pure_quartic(c4).unwrap())
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn tail_estimate_is_exact_on_quartic() {
        let s = quartic(73.6);
        let inter = s.interaction(0.0, 0.0);
        let beta = s.quartic_length();
        let i = Complex64::i();
        for z in [10.0, 1e3, 1e6] {
            // z exp(i beta / z) and its derivative
            let phi = z * (i * beta / z).exp();
            let dphi = (1.0 - i * beta / z) * (i * beta / z).exp();
            let a = tail_estimate(&inter, s.mass, z, phi, dphi);
            assert!(rel(a, -i * beta) < 1e-12, "{z}: {a}");
        }
    }

    #[test]
    fn pure_quartic_matches_closed_form() {
        let s = quartic(73.6);
        let a = scattering_length(&s, 0.0, 0.0, &SolverConfig::default()).unwrap();
        let exact = Complex64::new(0.0, -s.quartic_length());
        assert!(rel(a.to_complex(), exact) < 1e-6, "{a:?}");
        let (_, im_m) = a.to_si();
        assert!((im_m * 1e9 + 27.51).abs() < 0.01, "{im_m}");
    }

    #[test]
    fn boundary_normalization_is_irrelevant() {
        let s = Surface::antihydrogen(PotentialModel::default_two_scale());
        let config = SolverConfig { z_min: Some(0.3), z_max: Some(2e5), ..Default::default() };
        let base = scattering_length(&s, 1500.0, 30.0, &config).unwrap().to_complex();
        let inter = s.interaction(1500.0, 30.0);
        let (phi, dphi) = boundary_state(&s, 1500.0, 30.0, 0.3, &config).unwrap();
        for k in 0..8 {
            let f = Complex64::from_polar(3.7, k as f64 * std::f64::consts::FRAC_PI_4);
            let opts = config.ode_options();
            let sol = integrate(
                |z, y, dy| {
                    dy[0] = y[1];
                    dy[1] = 2.0 * s.mass * inter.value(z) * y[0];
                },
                0.3,
                &[f * phi, f * dphi],
                &[1e5, 2e5],
                &opts,
            )
            .unwrap();
            let e: Vec<Complex64> = sol
                .checkpoints
                .iter()
                .map(|c| tail_estimate(&inter, s.mass, c.t, c.state[0], c.state[1]))
                .collect();
            assert!(rel(richardson(e[0], e[1]), base) < 1e-6);
        }
    }

    #[test]
    fn wkb_start_error_scaling() {
        // Halving z_min in the -C3/z^3 region halves B. Dropping p'/(2p)
        // leaves an error of order sqrt(B), the first-order start one of
        // order B.
        let s = Surface::antihydrogen(PotentialModel::default_two_scale());
        let reference = scattering_length(&s, 0.0, 0.0, &SolverConfig { tol_rel: 1e-8, ..Default::default() })
            .unwrap()
            .to_complex();
        let z0 = auto_z_min(&s, 0.0, 0.0, 1e-4).unwrap();
        let z_max = default_z_max(&s, 0.0, 0.0);
        let err = |order, z| {
            let c = SolverConfig { wkb_order: order, ..Default::default() };
            rel(scattering_length_at(&s, 0.0, 0.0, z, z_max, &c).unwrap().to_complex(), reference)
        };
        let plain = [err(WkbOrder::Plain, z0), err(WkbOrder::Plain, z0 / 4.0)];
        let first = [err(WkbOrder::First, z0), err(WkbOrder::First, z0 / 4.0)];
        assert!((plain[0] / plain[1] - 2.0).abs() < 0.3, "{plain:?}");
        assert!((first[0] / first[1] - 4.0).abs() < 0.6, "{first:?}");
        assert!(first[0] < 1e-3);
        assert!(err(WkbOrder::Second, z0) < 1e-6);
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut c = SolverConfig { wkb_threshold: 0.02, ..Default::default() };
        assert!(c.validate().is_err());
        c = SolverConfig { tol_rel: 1e-12, ..Default::default() };
        assert!(c.validate().is_err());
        c = SolverConfig { z_min: Some(10.0), z_max: Some(5.0), ..Default::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn boundary_inside_badland_is_rejected() {
        let s = Surface::antihydrogen(PotentialModel::default_two_scale());
        let c = SolverConfig::default();
        let err = boundary_state(&s, 0.0, 0.0, 200.0, &c).unwrap_err();
        assert!(matches!(err, QuenchError::WkbInvalid { .. }));
    }

    #[test]
    fn profile_csv_round_trip() {
        let profile = RhoProfile {
            samples: vec![
                ProfileSample { rho: 0.0, a: ComplexLength::new(-1.0, -2.0), resolved: true },
                ProfileSample { rho: 1.0 / 3.0, a: ComplexLength::new(0.1, -1e-3), resolved: false },
                ProfileSample { rho: 2.0, a: ComplexLength::new(5.0, -7.0), resolved: true },
            ],
            charge: 1.0,
            a_cp: ComplexLength::default(),
            model_id: String::new(),
            config_id: String::new(),
            jump_tol: 0.01,
        };
        let csv = profile.to_csv();
        assert!(csv.starts_with("rho_au,rho_m,re_a_au,im_a_au,re_a_m,im_a_m,resolved\n"));
        let back = RhoProfile::parse_samples(&csv).unwrap();
        assert_eq!(back, profile.samples);
        assert_eq!(profile.unresolved_intervals(), vec![(1.0 / 3.0, 2.0)]);
    }
}
