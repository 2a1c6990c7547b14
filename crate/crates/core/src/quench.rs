//! Quenching of gravitational states by surface charges during a straight
//! planar flight: time-dependent scattering length, perturbative
//! transition and decay probabilities, effective radii, widths, and the
//! coupled-channel equations as an oracle.
//!
//! Public quantities are SI (m, s, J) unless the name says otherwise;
//! profiles are stored in atomic units.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{QuenchError, Result};
use crate::gravstates::GravitationalSpectrum;
use crate::interp::MonotoneCubic;
use crate::ode::{integrate, OdeOptions};
use crate::quadrature::{integrate_complex_with_breaks, QuadOptions, GAUSS4};
use crate::reflection::{ComplexLength, RhoProfile};
use crate::units::{to_au, Constants, Dimension, BOHR_RADIUS};

/// Ratio above which a "much smaller than" assumption is flagged.
pub const VALIDITY_RATIO: f64 = 0.1;

/// Planar distance of the atom from the point of closest approach,
/// sqrt(d^2 + v^2 (t - t0)^2).
pub fn trajectory_rho(d: f64, v: f64, t: f64, t0: f64) -> f64 {
    d.hypot(v * (t - t0))
}

/// a(rho) read from a profile by monotone cubic interpolation of its real
/// and imaginary parts; a_CP beyond the last sample.
#[derive(Debug, Clone)]
pub struct ProfileInterp {
    re: MonotoneCubic,
    im: MonotoneCubic,
    a_cp: Complex64,
    rho_lo: f64,
    rho_hi: f64,
    /// Largest |a - a_CP| over the samples, a.u.
    max_delta: f64,
    unresolved: Vec<(f64, f64)>,
}

impl ProfileInterp {
    pub fn new(profile: &RhoProfile) -> Result<Self> {
        let s = &profile.samples;
        if s.len() < 2 {
            return Err(QuenchError::InvalidConfig("profile needs at least two samples".into()));
        }
        if s.windows(2).any(|w| w[1].rho <= w[0].rho) {
            return Err(QuenchError::InvalidConfig("profile rho values must increase".into()));
        }
        let xs: Vec<f64> = s.iter().map(|p| p.rho).collect();
        Ok(Self {
            re: MonotoneCubic::new(xs.clone(), s.iter().map(|p| p.a.re).collect()),
            im: MonotoneCubic::new(xs, s.iter().map(|p| p.a.im).collect()),
            a_cp: profile.a_cp.to_complex(),
            rho_lo: s[0].rho,
            rho_hi: s[s.len() - 1].rho,
            max_delta: s.iter().map(|p| (p.a.to_complex() - profile.a_cp.to_complex()).norm()).fold(0.0, f64::max),
            unresolved: profile.unresolved_intervals(),
        })
    }

    pub fn a_cp(&self) -> Complex64 {
        self.a_cp
    }

    pub fn rho_hi(&self) -> f64 {
        self.rho_hi
    }

    pub fn knots(&self) -> &[f64] {
        self.re.xs()
    }

    /// Errors if [lo, hi] (a.u.) overlaps an unresolved interval or starts
    /// before the profile.
    pub fn check_range(&self, lo: f64, hi: f64) -> Result<()> {
        if lo < self.rho_lo && hi >= lo {
            return Err(QuenchError::Domain(format!(
                "rho = {lo} a.u. lies below the profile start {}",
                self.rho_lo
            )));
        }
        for &(a, b) in &self.unresolved {
            if hi > a && lo < b {
                return Err(QuenchError::Unresolved { lo: a, hi: b });
            }
        }
        Ok(())
    }

    /// a(rho), rho in a.u.
    pub fn at(&self, rho: f64) -> Result<Complex64> {
        self.check_range(rho, rho)?;
        Ok(self.at_unchecked(rho))
    }

    fn at_unchecked(&self, rho: f64) -> Complex64 {
        if rho > self.rho_hi {
            self.a_cp
        } else {
            Complex64::new(self.re.eval(rho), self.im.eval(rho))
        }
    }

    /// a(rho) - a_CP, zero beyond the profile.
    fn delta(&self, rho: f64) -> Complex64 {
        if rho > self.rho_hi || self.max_delta == 0.0 {
            Complex64::default()
        } else {
            self.at_unchecked(rho) - self.a_cp
        }
    }

    /// Scattering length seen at time `t` (s) by an atom passing at impact
    /// parameter `d` (m) with speed `v` (m/s), closest approach at t = 0.
    pub fn a_of_t(&self, d: f64, v: f64, t: f64) -> Result<ComplexLength> {
        let rho = to_au(trajectory_rho(d, v, t, 0.0), Dimension::Length);
        Ok(self.at(rho)?.into())
    }

    /// (int |a - a_CP|^2 r dr, int (a - a_CP) r dr) over the profile, in
    /// a.u. Four-point Gauss-Legendre per segment is exact on the cubic
    /// interpolant.
    pub fn radial_moments(&self) -> Result<(f64, Complex64)> {
        self.check_range(0.0, self.rho_hi)?;
        let xs = self.knots();
        let mut sq = 0.0;
        let mut lin = Complex64::default();
        for w in xs.windows(2) {
            let (c, h) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
            for (x, wt) in GAUSS4 {
                let r = c + h * x;
                let da = self.delta(r);
                sq += wt * h * da.norm_sqr() * r;
                lin += wt * h * da * r;
            }
        }
        Ok((sq, lin))
    }

    /// x-breakpoints (a.u.) where sqrt(d^2 + x^2) crosses a knot.
    fn line_breaks(&self, d: f64) -> Vec<f64> {
        self.knots().iter().filter(|&&r| r > d).map(|&r| (r * r - d * d).sqrt()).collect()
    }

    /// Half-length of the chord at impact parameter d inside the profile.
    fn chord(&self, d: f64) -> f64 {
        if d >= self.rho_hi {
            0.0
        } else {
            (self.rho_hi * self.rho_hi - d * d).sqrt()
        }
    }

    /// Absolute quadrature floor for integrands of order |a - a_CP|^power
    /// over a length of order rho_hi; below it the interpolant is roundoff.
    fn abs_floor(&self, power: i32) -> f64 {
        1e-13 * self.max_delta.powi(power) * self.rho_hi
    }

    /// int_{-inf}^{inf} f(a(sqrt(d^2 + x^2)) - a_CP) dx in a.u., with d in a.u.
    /// `power` is the degree of f in its argument.
    fn line_integral<F>(&self, d: f64, f: F, power: i32, opts: &QuadOptions) -> Result<Complex64>
    where
        F: Fn(Complex64) -> Complex64,
    {
        let d = d.abs();
        let half = self.chord(d);
        if half == 0.0 {
            return Ok(Complex64::default());
        }
        self.check_range(d, self.rho_hi)?;
        let breaks = self.line_breaks(d);
        let opts = QuadOptions {
            max_intervals: opts.max_intervals.max(4 * breaks.len() + 64),
            abs_tol: opts.abs_tol.max(self.abs_floor(power)),
            ..*opts
        };
        let r = integrate_complex_with_breaks(|x| f(self.delta(d.hypot(x))), 0.0, half, &breaks, &opts)?;
        Ok(2.0 * r.value)
    }
}

/// Phase convention for the outer factor of the transition amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PhaseConvention {
    /// exp(-i omega_1k t_n) everywhere.
    Uniform,
    /// exp(-i omega_k1 t_n) outside, exp(-i omega_1k t) inside the integral.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Amplitude {
    /// C_k with the uniform phase convention.
    pub uniform: Complex64,
    /// C_k with the opposite sign in the outer phase.
    pub literal: Complex64,
    /// Half-width of the converged time window, s.
    pub window: f64,
    /// 2 (M g / hbar) int |Im a| dt over the window.
    pub absorption: f64,
}

impl Amplitude {
    pub fn get(&self, convention: PhaseConvention) -> Complex64 {
        match convention {
            PhaseConvention::Uniform => self.uniform,
            PhaseConvention::Literal => self.literal,
        }
    }

    /// |C_k|^2 exp(-absorption).
    pub fn probability(&self) -> f64 {
        self.uniform.norm_sqr() * (-self.absorption).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayProbability {
    /// (2 M g / (hbar v)) |Im int (a - a_CP) dx|
    pub linear: f64,
    /// 1 - exp((2 M g / (hbar v)) Im int (a - a_CP) dx)
    pub exact: f64,
    /// True when the linear form exceeds the validity ratio and `exact`
    /// should be preferred.
    pub large: bool,
}

impl DecayProbability {
    pub fn value(&self) -> f64 {
        if self.large {
            self.exact
        } else {
            self.linear
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Validity {
    /// l_pol / l_g
    pub l_pol_over_l_g: f64,
    /// tau / tau_g
    pub tau_over_tau_g: f64,
}

impl Validity {
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.l_pol_over_l_g > VALIDITY_RATIO {
            w.push(format!("l_pol/l_g = {:.3e} is not small", self.l_pol_over_l_g));
        }
        if self.tau_over_tau_g > VALIDITY_RATIO {
            w.push(format!("tau/tau_g = {:.3e} is not small", self.tau_over_tau_g));
        }
        w
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuenchSummary {
    pub charge: f64,
    pub v: f64,
    pub sigma: f64,
    pub length: f64,
    pub d_tr: f64,
    pub d_in: f64,
    #[serde(rename = "Gamma_t")]
    pub gamma_t: f64,
    #[serde(rename = "Gamma_d")]
    pub gamma_d: f64,
    #[serde(rename = "Gamma_CP")]
    pub gamma_cp: f64,
    #[serde(rename = "Gamma_in")]
    pub gamma_in: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub ratio: f64,
    pub n_eff: f64,
    /// Charge density at which Gamma_d equals Gamma_CP, m^-2.
    pub sigma_c: f64,
    pub validity: Validity,
    pub warnings: Vec<String>,
}

/// One flight over a charged mirror.
#[derive(Debug, Clone)]
pub struct QuenchScenario {
    pub charge: f64,
    /// m/s
    pub v: f64,
    /// m^-2
    pub sigma: f64,
    /// m
    pub length: f64,
    pub constants: Constants,
    pub profile: ProfileInterp,
    pub spectrum: GravitationalSpectrum,
    pub quad: QuadOptions,
}

impl QuenchScenario {
    pub fn new(
        profile: &RhoProfile,
        spectrum: GravitationalSpectrum,
        constants: Constants,
        v: f64,
        sigma: f64,
        length: f64,
    ) -> Result<Self> {
        if !(v > 0.0) {
            return Err(QuenchError::InvalidConfig(format!("v must be positive, got {v}")));
        }
        if !(sigma >= 0.0) {
            return Err(QuenchError::InvalidConfig(format!("sigma must be >= 0, got {sigma}")));
        }
        if !(length > 0.0) {
            return Err(QuenchError::InvalidConfig(format!("L must be positive, got {length}")));
        }
        constants.validate()?;
        Ok(Self {
            charge: profile.charge,
            v,
            sigma,
            length,
            constants,
            profile: ProfileInterp::new(profile)?,
            spectrum,
            quad: QuadOptions { rel_tol: 1e-9, abs_tol: 0.0, max_intervals: 20_000 },
        })
    }

    pub fn with_v(&self, v: f64) -> Result<Self> {
        if !(v > 0.0) {
            return Err(QuenchError::InvalidConfig(format!("v must be positive, got {v}")));
        }
        Ok(Self { v, ..self.clone() })
    }

    pub fn with_sigma(&self, sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0) {
            return Err(QuenchError::InvalidConfig(format!("sigma must be >= 0, got {sigma}")));
        }
        Ok(Self { sigma, ..self.clone() })
    }

    /// M g / hbar in 1/(m s).
    fn mg_over_hbar(&self) -> f64 {
        self.constants.m_grav * self.constants.g / self.constants.hbar
    }

    fn weight(&self) -> f64 {
        self.constants.m_grav * self.constants.g
    }

    /// sqrt(m alpha_p Q^2) in m.
    pub fn l_pol(&self) -> f64 {
        self.constants.l_pol_au(self.charge) * BOHR_RADIUS
    }

    /// Passage time l_pol / v, s.
    pub fn tau(&self) -> f64 {
        self.l_pol() / self.v
    }

    pub fn validity(&self) -> Validity {
        Validity {
            l_pol_over_l_g: self.l_pol() / self.spectrum.scales.l_g,
            tau_over_tau_g: self.tau() / self.spectrum.scales.tau_g,
        }
    }

    /// Profile cutoff expressed as a time from closest approach, for impact
    /// parameter `d` (m).
    fn cutoff_time(&self, d: f64) -> f64 {
        self.profile.chord(to_au(d.abs(), Dimension::Length)) * BOHR_RADIUS / self.v
    }

    pub fn a_of_t(&self, d: f64, t: f64) -> Result<ComplexLength> {
        self.profile.a_of_t(d, self.v, t)
    }

    /// a(t) - a_CP in m, without range checks.
    fn delta_t(&self, d_au: f64, t: f64) -> Complex64 {
        let x = to_au(self.v * t, Dimension::Length);
        self.profile.delta(d_au.hypot(x)) * BOHR_RADIUS
    }

    /// Perturbative amplitude of state `k` after passing charges with
    /// closest approaches at `t_list` (s), all at impact parameter `d` (m).
    /// The time window is doubled from tau until the integral settles.
    pub fn transition_amplitude(&self, k: usize, d: f64, t_list: &[f64]) -> Result<Amplitude> {
        if k == 1 {
            return Err(QuenchError::Domain("transition amplitude needs k != 1".into()));
        }
        let omega = self.spectrum.omega(1, k)?;
        let d_au = to_au(d.abs(), Dimension::Length);
        let t_cut = self.cutoff_time(d);
        if t_cut > 0.0 {
            self.profile.check_range(d_au, self.profile.rho_hi)?;
        }
        let knot_times: Vec<f64> = self.profile.line_breaks(d_au).iter().map(|x| x * BOHR_RADIUS / self.v).collect();
        let integral = |w: f64| -> Result<(Complex64, f64)> {
            let mut breaks: Vec<f64> = knot_times.iter().flat_map(|&t| [t, -t]).collect();
            breaks.push(0.0);
            let opts = QuadOptions {
                max_intervals: self.quad.max_intervals.max(4 * breaks.len() + 64),
                abs_tol: self.quad.abs_tol.max(self.profile.abs_floor(1) * BOHR_RADIUS * BOHR_RADIUS / self.v),
                ..self.quad
            };
            let r = integrate_complex_with_breaks(
                |t| self.delta_t(d_au, t) * Complex64::new(0.0, -omega * t).exp(),
                -w,
                w,
                &breaks,
                &opts,
            )?;
            let a_cp_im = self.profile.a_cp.im.abs() * BOHR_RADIUS;
            let abs_im = integrate_complex_with_breaks(
                |t| Complex64::new((self.delta_t(d_au, t).im - a_cp_im).abs(), 0.0),
                -w,
                w,
                &breaks,
                &opts,
            )?;
            Ok((r.value, abs_im.value.re))
        };
        let mut w = 0.5 * self.tau().max(f64::MIN_POSITIVE);
        let (mut value, mut abs_im) = integral(w)?;
        for _ in 0..200 {
            if w >= t_cut {
                break;
            }
            let w2 = 2.0 * w;
            let (next, next_abs) = integral(w2)?;
            let settled = (next - value).norm() <= 1e-10 * next.norm();
            w = w2;
            value = next;
            abs_im = next_abs;
            if settled {
                break;
            }
        }
        let pre = Complex64::new(0.0, -self.mg_over_hbar()) * value;
        let uniform: Complex64 = t_list.iter().map(|&t| Complex64::new(0.0, -omega * t).exp()).sum();
        let literal: Complex64 = t_list.iter().map(|&t| Complex64::new(0.0, omega * t).exp()).sum();
        Ok(Amplitude {
            uniform: pre * uniform,
            literal: pre * literal,
            window: w,
            absorption: 2.0 * self.mg_over_hbar() * abs_im,
        })
    }

    /// Low-frequency form: -(i M g / hbar) int (a - a_CP) dt exp(-i omega_1k t0).
    pub fn low_frequency_amplitude(&self, k: usize, d: f64, t0: f64) -> Result<Complex64> {
        let omega = self.spectrum.omega(1, k)?;
        let d_au = to_au(d.abs(), Dimension::Length);
        let line = self.profile.line_integral(d_au, |x| x, 1, &self.quad)?;
        // dt = dx / v
        let integral = line * BOHR_RADIUS * BOHR_RADIUS / self.v;
        Ok(Complex64::new(0.0, -self.mg_over_hbar()) * integral * Complex64::new(0.0, -omega * t0).exp())
    }

    /// Charge-induced absorption exponent 2 (M g / hbar) int |Im (a - a_CP)| dt
    /// for one passage; the perturbative forms assume it is small.
    pub fn extra_absorption(&self, d: f64) -> Result<f64> {
        let d_au = to_au(d.abs(), Dimension::Length);
        let line = self.profile.line_integral(d_au, |x| Complex64::new(x.im.abs(), 0.0), 1, &self.quad)?;
        Ok(2.0 * self.mg_over_hbar() * line.re * BOHR_RADIUS * BOHR_RADIUS / self.v)
    }

    fn tr_prefactor(&self) -> f64 {
        let k = self.mg_over_hbar();
        k * k * std::f64::consts::PI * self.spectrum.scales.tau_g / self.v
    }

    /// Probability of leaving the initial state at impact parameter `d` (m).
    pub fn p_of_d(&self, d: f64) -> Result<f64> {
        let d_au = to_au(d.abs(), Dimension::Length);
        let line = self.profile.line_integral(d_au, |x| Complex64::new(x.norm_sqr(), 0.0), 2, &self.quad)?;
        Ok(self.tr_prefactor() * line.re * BOHR_RADIUS.powi(3))
    }

    /// Radial moments in SI: (m^4, m^3).
    fn moments_si(&self) -> Result<(f64, Complex64)> {
        let (sq, lin) = self.profile.radial_moments()?;
        Ok((sq * BOHR_RADIUS.powi(4), lin * BOHR_RADIUS.powi(3)))
    }

    /// Effective transition radius, m, from the radial integral.
    pub fn d_tr(&self) -> Result<f64> {
        let (sq, _) = self.moments_si()?;
        Ok(self.tr_prefactor() * 2.0 * std::f64::consts::PI * sq)
    }

    /// Effective transition radius as the direct integral of P(d) over d.
    pub fn d_tr_cartesian(&self) -> Result<f64> {
        self.cartesian(|d| self.p_of_d(d))
    }

    fn cartesian<F: Fn(f64) -> Result<f64>>(&self, p: F) -> Result<f64> {
        let r = self.profile.rho_hi * BOHR_RADIUS;
        let failure = std::cell::RefCell::new(None);
        let opts = QuadOptions { rel_tol: 1e-8, ..self.quad };
        let res = integrate_complex_with_breaks(
            |d| match p(d) {
                Ok(v) => Complex64::new(v, 0.0),
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    Complex64::default()
                }
            },
            0.0,
            r,
            &[],
            &opts,
        )?;
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        Ok(2.0 * res.value.re)
    }

    /// Gamma_t = hbar d_tr sigma v, J.
    pub fn gamma_t(&self) -> Result<f64> {
        Ok(self.constants.hbar * self.d_tr()? * self.sigma * self.v)
    }

    /// Gamma_t from (2 M^2 g^2 sigma pi^2 tau_g / hbar) int |a - a_CP|^2 r dr.
    pub fn gamma_t_radial(&self) -> Result<f64> {
        let (sq, _) = self.moments_si()?;
        let w = self.weight();
        Ok(2.0 * w * w * self.sigma * std::f64::consts::PI.powi(2) * self.spectrum.scales.tau_g
            / self.constants.hbar
            * sq)
    }

    /// Extra decay probability of a gravitational state after passing one
    /// charge at impact parameter `d` (m).
    pub fn p_in_of_d(&self, d: f64) -> Result<DecayProbability> {
        let d_au = to_au(d.abs(), Dimension::Length);
        let line = self.profile.line_integral(d_au, |x| x, 1, &self.quad)?;
        let im = line.im * BOHR_RADIUS * BOHR_RADIUS;
        let k = 2.0 * self.mg_over_hbar() / self.v;
        let linear = k * im.abs();
        Ok(DecayProbability { linear, exact: -(k * im).exp_m1(), large: linear > VALIDITY_RATIO })
    }

    /// Effective decay radius, m, from the radial integral.
    pub fn d_in(&self) -> Result<f64> {
        let (_, lin) = self.moments_si()?;
        Ok(2.0 * self.mg_over_hbar() / self.v * 2.0 * std::f64::consts::PI * lin.im.abs())
    }

    /// Effective decay radius as the direct integral of P_in(d) over d.
    pub fn d_in_cartesian(&self) -> Result<f64> {
        self.cartesian(|d| Ok(self.p_in_of_d(d)?.linear))
    }

    /// Gamma_d = hbar d_in sigma v, J.
    pub fn gamma_d(&self) -> Result<f64> {
        Ok(self.constants.hbar * self.d_in()? * self.sigma * self.v)
    }

    /// Gamma_d from 4 M g pi sigma |Im int (a - a_CP) r dr|.
    pub fn gamma_d_radial(&self) -> Result<f64> {
        let (_, lin) = self.moments_si()?;
        Ok(4.0 * self.weight() * std::f64::consts::PI * self.sigma * lin.im.abs())
    }

    /// Mirror-only width 2 M g |Im a_CP|, J.
    pub fn gamma_cp(&self) -> f64 {
        2.0 * self.weight() * self.profile.a_cp.im.abs() * BOHR_RADIUS
    }

    /// Charge density at which Gamma_d = Gamma_CP, m^-2.
    pub fn sigma_c(&self) -> Result<f64> {
        Ok(self.gamma_cp() / (self.constants.hbar * self.d_in()? * self.v))
    }

    /// Decay probability R during flight over the mirror length.
    pub fn survival(&self) -> Result<f64> {
        let mirror = 2.0 * self.weight() * self.profile.a_cp.im.abs() * BOHR_RADIUS * self.length
            / (self.constants.hbar * self.v);
        let charges = if self.sigma == 0.0 { 0.0 } else { self.d_in()? * self.length * self.sigma };
        Ok(-(-(charges + mirror)).exp_m1())
    }

    /// d_tr / d_in from pi int |da|^2 r dr / (2 l_g |Im int da r dr|).
    pub fn quench_ratio(&self) -> Result<f64> {
        let (sq, lin) = self.moments_si()?;
        if lin.im == 0.0 {
            return Err(QuenchError::Domain("d_in vanishes; ratio undefined".into()));
        }
        Ok(std::f64::consts::PI * sq / (2.0 * self.spectrum.scales.l_g * lin.im.abs()))
    }

    /// Number of gravitational states populated by a passage, pi tau_g / tau.
    pub fn n_effective(&self) -> Result<f64> {
        let tau = self.tau();
        if !(tau > 0.0) {
            return Err(QuenchError::Domain("passage time is zero (Q = 0)".into()));
        }
        Ok(std::f64::consts::PI * self.spectrum.scales.tau_g / tau)
    }

    pub fn summary(&self) -> Result<QuenchSummary> {
        let d_tr = self.d_tr()?;
        let d_in = self.d_in()?;
        let gamma_t = self.gamma_t()?;
        let gamma_d = self.gamma_d()?;
        let gamma_cp = self.gamma_cp();
        let validity = self.validity();
        let mut warnings = validity.warnings();
        let ratio = if d_in > 0.0 { self.quench_ratio()? } else { 0.0 };
        let n_eff = if self.charge > 0.0 { self.n_effective()? } else { f64::INFINITY };
        let sigma_c = if d_in > 0.0 { self.sigma_c()? } else { f64::INFINITY };
        if !self.profile.unresolved.is_empty() {
            warnings.push(format!("{} unresolved profile intervals", self.profile.unresolved.len()));
        }
        Ok(QuenchSummary {
            charge: self.charge,
            v: self.v,
            sigma: self.sigma,
            length: self.length,
            d_tr,
            d_in,
            gamma_t,
            gamma_d,
            gamma_cp,
            gamma_in: gamma_d + gamma_cp,
            r: self.survival()?,
            ratio,
            n_eff,
            sigma_c,
            validity,
            warnings,
        })
    }

    /// Integrates the coupled amplitude equations for the first `n_states`
    /// gravitational states during a passage at impact parameter `d` (m),
    /// from -T to T with T = 1.2 times the time to cross the profile.
    /// With `absorb = false` the imaginary part of a is dropped.
    pub fn evolve_coupled(&self, n_states: usize, d: f64, opts: &EvolveOptions) -> Result<AmplitudeTrace> {
        if n_states < 2 {
            return Err(QuenchError::Domain("coupled evolution needs at least two states".into()));
        }
        if n_states > self.spectrum.len() {
            return Err(QuenchError::Domain(format!(
                "{n_states} states requested, spectrum holds {}",
                self.spectrum.len()
            )));
        }
        let d_au = to_au(d.abs(), Dimension::Length);
        let t_cut = self.cutoff_time(d);
        if t_cut > 0.0 {
            self.profile.check_range(d_au, self.profile.rho_hi)?;
        }
        // Q = 0 has no passage time; fall back to the gravitational length.
        let tau = if self.tau() > 0.0 { self.tau() } else { self.spectrum.scales.l_g / self.v };
        let span = opts.half_span.unwrap_or(1.2 * t_cut.max(tau));
        let h = tau / 200.0;
        let a_t = |t: f64| {
            let a = self.delta_t(d_au, t);
            if opts.absorb {
                a
            } else {
                Complex64::new(a.re, 0.0)
            }
        };
        let da = |t: f64, h: f64| (a_t(t + h) - a_t(t - h)) / (2.0 * h);

        let mut derivative_check: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for j in 0..=256 {
            let t = -span + 2.0 * span * j as f64 / 256.0;
            let (d1, d2) = (da(t, h), da(t, 0.5 * h));
            derivative_check = derivative_check.max((d1 - d2).norm());
            scale = scale.max(d1.norm());
        }
        let derivative_check = if scale > 0.0 { derivative_check / scale } else { 0.0 };

        let lambdas = &self.spectrum.lambdas()[..n_states];
        let freq: Vec<f64> = lambdas.iter().map(|l| l * self.spectrum.scales.eps_g / self.spectrum.hbar).collect();
        let inv_lg = 1.0 / self.spectrum.scales.l_g;
        let mut phase = vec![Complex64::default(); n_states];
        let rhs = |t: f64, y: &[Complex64], dy: &mut [Complex64]| {
            let g = da(t, h) * inv_lg;
            if g == Complex64::default() {
                dy.iter_mut().for_each(|v| *v = Complex64::default());
                return;
            }
            for (p, w) in phase.iter_mut().zip(&freq) {
                *p = Complex64::new(0.0, -w * t).exp();
            }
            // exp(-i omega_ki t) = exp(-i w_k t) / exp(-i w_i t)
            for i in 0..n_states {
                let mut acc = Complex64::default();
                for k in 0..n_states {
                    if k != i {
                        acc += phase[k] * y[k] / (lambdas[i] - lambdas[k]);
                    }
                }
                dy[i] = g * acc * phase[i].conj();
            }
        };
        let times: Vec<f64> =
            (0..opts.report_points).map(|j| -span + 2.0 * span * (j + 1) as f64 / opts.report_points as f64).collect();
        let mut y0 = vec![Complex64::default(); n_states];
        y0[0] = Complex64::new(1.0, 0.0);
        let ode = OdeOptions {
            rtol: opts.rtol,
            atol: opts.rtol * 1e-4,
            initial_step: Some(h),
            max_step: Some(h * 50.0),
            ..Default::default()
        };
        let sol = integrate(rhs, -span, &y0, &times, &ode)?;

        // survival factor exp(-2 (M g / hbar) int_{-T}^{t} |Im a| dt)
        let a_cp_im = self.profile.a_cp.im * BOHR_RADIUS;
        let k = 2.0 * self.mg_over_hbar();
        let mut survival = Vec::with_capacity(times.len());
        let mut acc = 0.0;
        let mut last = -span;
        let knot_times: Vec<f64> = self.profile.line_breaks(d_au).iter().map(|x| x * BOHR_RADIUS / self.v).collect();
        for &t in &times {
            if opts.absorb {
                let breaks: Vec<f64> = knot_times.iter().flat_map(|&s| [s, -s]).collect();
                let qopts = QuadOptions { max_intervals: 4 * breaks.len() + 1000, rel_tol: 1e-8, abs_tol: 0.0 };
                let seg = integrate_complex_with_breaks(
                    |s| Complex64::new((self.delta_t(d_au, s).im + a_cp_im).abs(), 0.0),
                    last,
                    t,
                    &breaks,
                    &qopts,
                )?;
                acc += seg.value.re;
            }
            last = t;
            survival.push((-k * acc).exp());
        }
        Ok(AmplitudeTrace {
            times,
            amplitudes: sol.checkpoints.into_iter().map(|c| c.state).collect(),
            survival,
            derivative_check,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub absorb: bool,
    pub report_points: usize,
    pub rtol: f64,
    /// Half-width of the time span, s; `None` for the default.
    pub half_span: Option<f64>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { absorb: true, report_points: 200, rtol: 1e-10, half_span: None }
    }
}

/// Amplitudes are those of the frame shifted by a(t). With absorption the
/// truncated system is not dissipative term by term, so sum |C_k|^2 can
/// exceed one while the atom is near the charge; after the passage, when
/// a(t) = a_CP again, |C_k|^2 times the survival factor are probabilities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmplitudeTrace {
    /// s
    pub times: Vec<f64>,
    /// C_k(t), one vector per reporting time.
    pub amplitudes: Vec<Vec<Complex64>>,
    /// exp(-2 (M g / hbar) int |Im a| dt) up to each reporting time.
    pub survival: Vec<f64>,
    /// Largest relative change of da/dt when the difference step is halved.
    pub derivative_check: f64,
}

impl AmplitudeTrace {
    pub fn final_amplitudes(&self) -> &[Complex64] {
        self.amplitudes.last().map_or(&[], |v| v.as_slice())
    }

    /// |C_k|^2 times the survival factor at reporting point `j`, 1-based k.
    pub fn probability(&self, j: usize, k: usize) -> f64 {
        self.amplitudes[j][k - 1].norm_sqr() * self.survival[j]
    }

    /// sum_k |C_k|^2 at reporting point `j`.
    pub fn norm(&self, j: usize) -> f64 {
        self.amplitudes[j].iter().map(|c| c.norm_sqr()).sum()
    }

    /// Norm times the survival factor: the probability of still being in
    /// the truncated basis.
    pub fn total_probability(&self, j: usize) -> f64 {
        self.norm(j) * self.survival[j]
    }
}

/// Monte-Carlo estimate of <|sum_n exp(-i omega t_n)|^2> for `n` passage
/// times drawn uniformly from [0, span].
pub fn phase_sum_average(omega: f64, n: usize, span: f64, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0.0;
    for _ in 0..samples {
        let s: Complex64 = (0..n).map(|_| Complex64::new(0.0, -omega * rng.gen_range(0.0..span)).exp()).sum();
        total += s.norm_sqr();
    }
    total / samples as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reflection::ProfileSample;

    fn synthetic_profile(charge: f64, bump: f64) -> RhoProfile {
        let a_cp = ComplexLength::new(-70.0, -505.0);
        let samples = (0..=400)
            .map(|i| {
                let rho = i as f64 * 25.0;
                let g = (-(rho / 1500.0).powi(2)).exp() * bump;
                ProfileSample { rho, a: ComplexLength::new(a_cp.re + 0.3 * g, a_cp.im - g), resolved: true }
            })
            .collect();
        RhoProfile {
            samples,
            charge,
            a_cp,
            model_id: "test".into(),
            config_id: "test".into(),
            jump_tol: 0.01,
        }
    }

    fn scenario(charge: f64, bump: f64) -> QuenchScenario {
        let c = Constants::default();
        let spectrum = GravitationalSpectrum::new(40, &c).unwrap();
        QuenchScenario::new(&synthetic_profile(charge, bump), spectrum, c, 1.0, 1e12, 0.1).unwrap()
    }

    #[test]
    fn trajectory_examples() {
        assert_eq!(trajectory_rho(3.0, 2.0, 5.0, 5.0), 3.0);
        assert_eq!(trajectory_rho(0.0, 1.0, 1.0, 0.0), 1.0);
        assert_eq!(trajectory_rho(1.0, 2.0, 4.0, 1.5), trajectory_rho(1.0, 2.0, -1.0, 1.5));
    }

    #[test]
    fn profile_lookup() {
        let s = scenario(30.0, 1000.0);
        let a_cp = s.profile.a_cp();
        assert_eq!(s.profile.at(1e6).unwrap(), a_cp);
        let far = s.a_of_t(0.0, 1.0).unwrap();
        assert_eq!(far.to_complex(), a_cp);
        let mut p = synthetic_profile(30.0, 1000.0);
        p.samples[10].resolved = false;
        let interp = ProfileInterp::new(&p).unwrap();
        assert!(matches!(interp.at(260.0), Err(QuenchError::Unresolved { lo: 250.0, hi: 275.0 })));
        assert!(interp.at(240.0).is_ok());
        assert!(interp.radial_moments().is_err());
    }

    #[test]
    fn radial_moments_of_gaussian_bump() {
        // Im delta = -b exp(-r^2/s^2): int r dr = b s^2 / 2 (tail beyond the
        // profile is negligible).
        let s = scenario(30.0, 1000.0);
        let (sq, lin) = s.profile.radial_moments().unwrap();
        let s2 = 1500.0f64.powi(2);
        assert!((lin.im + 1000.0 * s2 / 2.0).abs() < 1e-6 * 1000.0 * s2);
        let norm2 = 1000.0f64.powi(2) * 1.09;
        assert!((sq - norm2 * s2 / 4.0).abs() < 1e-4 * norm2 * s2);
    }

    #[test]
    fn zero_charge_gives_nothing() {
        let s = scenario(0.0, 0.0);
        assert_eq!(s.d_tr().unwrap(), 0.0);
        assert_eq!(s.d_in().unwrap(), 0.0);
        assert_eq!(s.p_of_d(0.0).unwrap(), 0.0);
        assert_eq!(s.p_in_of_d(1e-8).unwrap().value(), 0.0);
        assert_eq!(s.transition_amplitude(3, 0.0, &[0.0]).unwrap().uniform, Complex64::default());
        let trace = s.evolve_coupled(5, 0.0, &EvolveOptions { report_points: 10, ..Default::default() }).unwrap();
        assert_eq!(trace.final_amplitudes()[0], Complex64::new(1.0, 0.0));
        assert!(trace.final_amplitudes()[1..].iter().all(|c| *c == Complex64::default()));
    }

    #[test]
    fn width_identities() {
        let s = scenario(30.0, 1000.0);
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
        assert!(rel(s.gamma_t().unwrap(), s.gamma_t_radial().unwrap()) < 1e-12);
        assert!(rel(s.gamma_d().unwrap(), s.gamma_d_radial().unwrap()) < 1e-12);
        assert!(rel(s.quench_ratio().unwrap(), s.d_tr().unwrap() / s.d_in().unwrap()) < 1e-12);
        assert!(rel(s.d_tr_cartesian().unwrap(), s.d_tr().unwrap()) < 1e-4);
        assert!(rel(s.d_in_cartesian().unwrap(), s.d_in().unwrap()) < 1e-4);
        let twice = s.with_sigma(2e12).unwrap();
        assert!(rel(twice.gamma_t().unwrap(), 2.0 * s.gamma_t().unwrap()) < 1e-14);
        assert_eq!(s.with_sigma(0.0).unwrap().gamma_t().unwrap(), 0.0);
    }

    #[test]
    fn survival_limits() {
        let s = scenario(30.0, 1000.0);
        let bare = s.with_sigma(0.0).unwrap();
        let mirror = 2.0 * s.weight() * 505.0 * BOHR_RADIUS * s.length / (s.constants.hbar * s.v);
        assert!((bare.survival().unwrap() - (1.0 - (-mirror).exp())).abs() < 1e-15);
        let r0 = s.survival().unwrap();
        assert!(s.with_sigma(2e12).unwrap().survival().unwrap() > r0);
        assert!(s.with_v(0.5).unwrap().survival().unwrap() > r0);
        let longer = QuenchScenario { length: 0.2, ..s.clone() };
        assert!(longer.survival().unwrap() > r0);
        assert!((0.0..=1.0).contains(&r0));
    }

    #[test]
    fn perturbative_amplitude_properties() {
        let s = scenario(30.0, 1000.0);
        let omega = s.spectrum.omega(1, 2).unwrap();
        let a = s.transition_amplitude(2, 1e-7, &[0.0]).unwrap();
        let low = s.low_frequency_amplitude(2, 1e-7, 0.0).unwrap();
        assert!((a.uniform - low).norm() < 1e-3 * low.norm());
        let pair = s.transition_amplitude(2, 1e-7, &[0.0, std::f64::consts::PI / omega.abs()]).unwrap();
        assert!(pair.uniform.norm() < 1e-12 * a.uniform.norm());
        assert!((a.probability() - a.uniform.norm_sqr() * (-a.absorption).exp()).abs() < 1e-30);
        assert_eq!(a.get(PhaseConvention::Literal).norm(), a.uniform.norm());
        assert!(s.transition_amplitude(1, 0.0, &[0.0]).is_err());
    }

    #[test]
    fn decay_probability_forms_agree() {
        let s = scenario(30.0, 1000.0);
        for d in [0.0, 3e-8, 2e-7] {
            let p = s.p_in_of_d(d).unwrap();
            assert!((p.linear - p.exact).abs() <= p.linear * p.linear);
            assert_eq!(s.p_in_of_d(-d).unwrap(), p);
            assert_eq!(s.p_of_d(-d).unwrap(), s.p_of_d(d).unwrap());
        }
    }

    #[test]
    fn monte_carlo_phase_average() {
        let avg = phase_sum_average(1.0, 8, 1e4, 20_000, 7);
        assert!((avg / 8.0 - 1.0).abs() < 0.05, "{avg}");
        assert_eq!(phase_sum_average(1.0, 8, 1e4, 100, 3), phase_sum_average(1.0, 8, 1e4, 100, 3));
    }

    #[test]
    fn coupled_norm_conserved_without_absorption() {
        let s = scenario(30.0, 1000.0);
        let opts = EvolveOptions { absorb: false, report_points: 20, ..Default::default() };
        let trace = s.evolve_coupled(10, 0.0, &opts).unwrap();
        for j in 0..trace.times.len() {
            assert!((trace.norm(j) - 1.0).abs() < 1e-6);
        }
    }
}
