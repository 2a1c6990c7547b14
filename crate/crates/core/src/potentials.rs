//! Atom-surface and atom-charge potentials, the local classical momentum
//! and the WKB badland function.
//!
//! All quantities are in atomic units.

use crate::error::{QuenchError, Result};
use crate::interp::CubicSpline;
use crate::units::{to_au, Dimension};

/// Smallest table accepted for a tabulated potential.
pub const MIN_TABLE_POINTS: usize = 100;

/// Casimir-Polder potential models.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialModel {
    /// -C4/z^4 everywhere.
    PureQuartic { c4: f64 },
    /// -C4/(z^3 (z + C4/C3)): van der Waals -C3/z^3 close in, retarded
    /// -C4/z^4 far out.
    TwoScale { c3: f64, c4: f64 },
    Tabulated(TabulatedPotential),
}

impl PotentialModel {
    pub fn pure_quartic(c4: f64) -> Result<Self> {
        check_positive("C4", c4)?;
        Ok(PotentialModel::PureQuartic { c4 })
    }

    pub fn two_scale(c3: f64, c4: f64) -> Result<Self> {
        check_positive("C3", c3)?;
        check_positive("C4", c4)?;
        Ok(PotentialModel::TwoScale { c3, c4 })
    }

    /// Hydrogen near a perfect conductor: C3 = 0.25, C4 = 73.6 a.u.
    pub fn default_two_scale() -> Self {
        PotentialModel::TwoScale { c3: 0.25, c4: 73.6 }
    }

    pub fn value(&self, z: f64) -> f64 {
        match self {
            PotentialModel::PureQuartic { c4 } => -c4 / z.powi(4),
            PotentialModel::TwoScale { c3, c4 } => -c4 / (z * z * z * (z + c4 / c3)),
            PotentialModel::Tabulated(t) => t.value(z),
        }
    }

    /// (V, V', V'') in closed form, `None` for tabulated potentials.
    pub fn derivatives(&self, z: f64) -> Option<(f64, f64, f64)> {
        match self {
            PotentialModel::PureQuartic { c4 } => {
                let z4 = z.powi(4);
                Some((-c4 / z4, 4.0 * c4 / (z4 * z), -20.0 * c4 / (z4 * z * z)))
            }
            PotentialModel::TwoScale { c3, c4 } => {
                let l = c4 / c3;
                let u = z * z * z * (z + l);
                let du = 4.0 * z * z * z + 3.0 * l * z * z;
                let ddu = 12.0 * z * z + 6.0 * l * z;
                Some((-c4 / u, c4 * du / (u * u), c4 * (ddu * u - 2.0 * du * du) / (u * u * u)))
            }
            PotentialModel::Tabulated(_) => None,
        }
    }

    /// Coefficient of the -C4/z^4 tail.
    pub fn c4(&self) -> f64 {
        match self {
            PotentialModel::PureQuartic { c4 } | PotentialModel::TwoScale { c4, .. } => *c4,
            PotentialModel::Tabulated(t) => t.c4_tail,
        }
    }

    /// Short identifier recorded with computed profiles.
    pub fn id(&self) -> String {
        match self {
            PotentialModel::PureQuartic { c4 } => format!("pure-quartic(c4={c4})"),
            PotentialModel::TwoScale { c3, c4 } => format!("two-scale(c3={c3},c4={c4})"),
            PotentialModel::Tabulated(t) => format!("tabulated(n={},c4_tail={})", t.z.len(), t.c4_tail),
        }
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(QuenchError::InvalidConfig(format!("{name} must be positive, got {v}")))
    }
}

/// User-supplied potential, interpolated by a natural cubic spline of
/// ln(-V) against ln z. Continued by -C4/z^4 beyond the last point and by
/// the end power law below the first.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedPotential {
    z: Vec<f64>,
    v: Vec<f64>,
    spline: CubicSpline,
    c4_tail: f64,
    head_slope: f64,
}

impl TabulatedPotential {
    /// `z` and `v` in atomic units.
    pub fn new(z: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if z.len() != v.len() {
            return Err(QuenchError::InvalidConfig("z and V columns differ in length".into()));
        }
        if z.len() < MIN_TABLE_POINTS {
            return Err(QuenchError::InvalidConfig(format!(
                "tabulated potential needs at least {MIN_TABLE_POINTS} points, got {}",
                z.len()
            )));
        }
        if z[0] <= 0.0 || z.windows(2).any(|w| w[1] <= w[0]) {
            return Err(QuenchError::InvalidConfig("z must be positive and strictly increasing".into()));
        }
        if let Some(bad) = v.iter().position(|&x| !(x < 0.0)) {
            return Err(QuenchError::InvalidConfig(format!("V must be negative (row {})", bad + 1)));
        }
        let lz: Vec<f64> = z.iter().map(|x| x.ln()).collect();
        let lv: Vec<f64> = v.iter().map(|x| (-x).ln()).collect();
        let spline = CubicSpline::new(lz, lv);
        let last = z.len() - 1;
        let c4_tail = -v[last] * z[last].powi(4);
        let head_slope = spline.eval_all(z[0].ln()).1;
        Ok(Self { z, v, spline, c4_tail, head_slope })
    }

    /// Parses two whitespace-separated columns: z (m) and V (J), or atomic
    /// units when a `units: au` line precedes the data. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut atomic = false;
        let mut z = Vec::new();
        let mut v = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("units:") {
                match rest.trim() {
                    "au" => atomic = true,
                    "si" => atomic = false,
                    other => {
                        return Err(QuenchError::Parse { line: i + 1, message: format!("unknown units `{other}`") })
                    }
                }
                continue;
            }
            let mut cols = line.split_whitespace();
            let parse = |s: Option<&str>| -> Result<f64> {
                s.ok_or_else(|| QuenchError::Parse { line: i + 1, message: "expected two columns".into() })?
                    .parse::<f64>()
                    .map_err(|e| QuenchError::Parse { line: i + 1, message: e.to_string() })
            };
            let zi = parse(cols.next())?;
            let vi = parse(cols.next())?;
            if cols.next().is_some() {
                return Err(QuenchError::Parse { line: i + 1, message: "expected two columns".into() });
            }
            if atomic {
                z.push(zi);
                v.push(vi);
            } else {
                z.push(to_au(zi, Dimension::Length));
                v.push(to_au(vi, Dimension::Energy));
            }
        }
        Self::new(z, v)
    }

    pub fn value(&self, z: f64) -> f64 {
        let (z0, zn) = (self.z[0], *self.z.last().expect("non-empty"));
        if z > zn {
            -self.c4_tail / z.powi(4)
        } else if z < z0 {
            self.v[0] * (z / z0).powf(self.head_slope)
        } else {
            -self.spline.eval(z.ln()).exp()
        }
    }

    pub fn points(&self) -> (&[f64], &[f64]) {
        (&self.z, &self.v)
    }
}

/// Polarization potential of an atom at height `z` and planar distance
/// `rho` from a point charge `charge` (units of e).
pub fn v_pol(z: f64, rho: f64, charge: f64, alpha_p: f64) -> Result<f64> {
    if charge == 0.0 {
        return Ok(0.0);
    }
    let r2 = z * z + rho * rho;
    if r2 == 0.0 {
        return Err(QuenchError::Domain("polarization potential is singular at z = rho = 0".into()));
    }
    Ok(-alpha_p * charge * charge / (2.0 * r2 * r2))
}

/// The z-dependent potential seen at fixed planar distance `rho`.
#[derive(Debug, Clone, Copy)]
pub struct Interaction<'a> {
    pub model: &'a PotentialModel,
    pub rho: f64,
    pub charge: f64,
    pub alpha_p: f64,
    /// M g in Hartree/Bohr when the linear gravitational term is included.
    pub weight: Option<f64>,
}

impl<'a> Interaction<'a> {
    pub fn new(model: &'a PotentialModel, rho: f64, charge: f64, alpha_p: f64) -> Self {
        Self { model, rho, charge, alpha_p, weight: None }
    }

    pub fn with_gravity(self, weight: f64) -> Self {
        Self { weight: Some(weight), ..self }
    }

    /// Half the polarization strength, alpha_p Q^2 / 2.
    fn pol_strength(&self) -> f64 {
        0.5 * self.alpha_p * self.charge * self.charge
    }

    /// V_CP + V_pol (+ M g z). Requires z > 0.
    pub fn value(&self, z: f64) -> f64 {
        let s = z * z + self.rho * self.rho;
        let mut v = self.model.value(z) - self.pol_strength() / (s * s);
        if let Some(w) = self.weight {
            v += w * z;
        }
        v
    }

    /// (V, V', V''), `None` when the surface model has no closed form.
    pub fn derivatives(&self, z: f64) -> Option<(f64, f64, f64)> {
        let (v, dv, ddv) = self.model.derivatives(z)?;
        let a = self.pol_strength();
        let s = z * z + self.rho * self.rho;
        let s3 = s * s * s;
        let (mut v, mut dv, ddv) =
            (v - a / (s * s), dv + 4.0 * a * z / s3, ddv + 4.0 * a / s3 - 24.0 * a * z * z / (s3 * s));
        if let Some(w) = self.weight {
            v += w * z;
            dv += w;
        }
        Some((v, dv, ddv))
    }
}

/// V_CP(z) + V_pol(z, rho) (+ M g z when `weight` is given) minus
/// `energy_offset`.
pub fn v_total(
    model: &PotentialModel,
    z: f64,
    rho: f64,
    charge: f64,
    alpha_p: f64,
    weight: Option<f64>,
    energy_offset: f64,
) -> Result<f64> {
    if !(z > 0.0) {
        return Err(QuenchError::Domain(format!("z must be positive, got {z}")));
    }
    let inter = Interaction { model, rho, charge, alpha_p, weight };
    Ok(inter.value(z) - energy_offset)
}

/// p(z) = sqrt(2 m (E - V(z))).
pub fn classical_momentum(inter: &Interaction, mass: f64, energy: f64, z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(QuenchError::Domain(format!("z must be positive, got {z}")));
    }
    let radicand = 2.0 * mass * (energy - inter.value(z));
    if radicand < 0.0 {
        return Err(QuenchError::Forbidden { z, radicand });
    }
    Ok(radicand.sqrt())
}

/// (p, p', p'') from closed-form potential derivatives, or five-point
/// differences of p with step `z * 1e-4` otherwise.
pub fn momentum_derivatives(inter: &Interaction, mass: f64, energy: f64, z: f64) -> Result<(f64, f64, f64)> {
    match inter.derivatives(z) {
        Some((v, dv, ddv)) => {
            let f = 2.0 * mass * (energy - v);
            if f < 0.0 {
                return Err(QuenchError::Forbidden { z, radicand: f });
            }
            let p = f.sqrt();
            let dp = -mass * dv / p;
            let ddp = (-2.0 * mass * ddv - 2.0 * dp * dp) / (2.0 * p);
            Ok((p, dp, ddp))
        }
        None => momentum_derivatives_fd(inter, mass, energy, z, 1e-4),
    }
}

pub fn momentum_derivatives_fd(
    inter: &Interaction,
    mass: f64,
    energy: f64,
    z: f64,
    h_rel: f64,
) -> Result<(f64, f64, f64)> {
    let h = z * h_rel;
    let p = |x: f64| classical_momentum(inter, mass, energy, x);
    let (m2, m1, p0, p1, p2) = (p(z - 2.0 * h)?, p(z - h)?, p(z)?, p(z + h)?, p(z + 2.0 * h)?);
    let dp = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
    let ddp = (-m2 + 16.0 * m1 - 30.0 * p0 + 16.0 * p1 - p2) / (12.0 * h * h);
    Ok((p0, dp, ddp))
}

fn badland_from(p: f64, dp: f64, ddp: f64) -> f64 {
    let r = dp / (p * p);
    ddp / (2.0 * p * p * p) - 0.75 * r * r
}

/// WKB validity function B(z) = p''/(2p^3) - (3/4)(p'/p^2)^2 (hbar = 1).
/// WKB fails where |B| >= 1.
pub fn badland(inter: &Interaction, mass: f64, energy: f64, z: f64) -> Result<f64> {
    let (p, dp, ddp) = momentum_derivatives(inter, mass, energy, z)?;
    Ok(badland_from(p, dp, ddp))
}

/// B(z) from five-point differences, whatever the model.
pub fn badland_fd(inter: &Interaction, mass: f64, energy: f64, z: f64, h_rel: f64) -> Result<f64> {
    let (p, dp, ddp) = momentum_derivatives_fd(inter, mass, energy, z, h_rel)?;
    Ok(badland_from(p, dp, ddp))
}

/// Maximal intervals of [z_lo, z_hi] on which |B(z)| >= 1, located on a
/// logarithmic grid and then bisected to relative width 1e-10.
pub fn badland_intervals(
    inter: &Interaction,
    mass: f64,
    energy: f64,
    z_lo: f64,
    z_hi: f64,
    points_per_decade: usize,
) -> Result<Vec<(f64, f64)>> {
    if !(z_lo > 0.0 && z_hi > z_lo) {
        return Err(QuenchError::Domain(format!("bad z range [{z_lo}, {z_hi}]")));
    }
    let n = ((z_hi / z_lo).log10() * points_per_decade as f64).ceil().max(2.0) as usize;
    let zs: Vec<f64> = (0..=n).map(|i| z_lo * (z_hi / z_lo).powf(i as f64 / n as f64)).collect();
    let inside = |z: f64| -> Result<bool> { Ok(badland(inter, mass, energy, z)?.abs() >= 1.0) };
    let flags = zs.iter().map(|&z| inside(z)).collect::<Result<Vec<bool>>>()?;

    let edge = |mut a: f64, mut b: f64, a_in: bool| -> Result<f64> {
        while (b - a) > 1e-10 * b {
            let m = 0.5 * (a + b);
            if inside(m)? == a_in {
                a = m;
            } else {
                b = m;
            }
        }
        Ok(0.5 * (a + b))
    };

    let mut out = Vec::new();
    let mut start = if flags[0] { Some(zs[0]) } else { None };
    for i in 1..zs.len() {
        match (flags[i - 1], flags[i]) {
            (false, true) => start = Some(edge(zs[i - 1], zs[i], false)?),
            (true, false) => {
                let end = edge(zs[i - 1], zs[i], true)?;
                out.push((start.take().expect("opened"), end));
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, z_hi));
    }
    Ok(out)
}

/// Point charges on the surface. Positions are planar, in a.u.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargeConfig {
    pub charge: f64,
    pub positions: Vec<[f64; 2]>,
}

impl ChargeConfig {
    pub fn new(charge: f64, positions: Vec<[f64; 2]>) -> Result<Self> {
        if !(charge >= 0.0) {
            return Err(QuenchError::InvalidConfig(format!("charge must be >= 0, got {charge}")));
        }
        Ok(Self { charge, positions })
    }

    /// Pairs closer than ten times sqrt(2 m alpha_p Q^2), for which the
    /// independent-charge treatment is doubtful.
    pub fn crowded_pairs(&self, mass: f64, alpha_p: f64) -> Vec<(usize, usize, f64)> {
        let range = (2.0 * mass * alpha_p).sqrt() * self.charge;
        let mut out = Vec::new();
        for i in 0..self.positions.len() {
            for j in i + 1..self.positions.len() {
                let (a, b) = (self.positions[i], self.positions[j]);
                let d = (a[0] - b[0]).hypot(a[1] - b[1]);
                if d < 10.0 * range {
                    out.push((i, j, d));
                }
            }
        }
        out
    }
}
