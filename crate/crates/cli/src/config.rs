//! Run configuration: a plain `key = value` file, then `--set` overrides.
//!
//! Lengths accept an `au` suffix (Bohr radii); bare numbers are metres.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;

use quench_core::potentials::{PotentialModel, TabulatedPotential};
use quench_core::reflection::{ProfileOptions, SolverConfig, Surface, WkbOrder};
use quench_core::units::{to_au, Constants, Dimension};

pub const KEYS: &[&str] = &[
    "model",
    "c3",
    "c4",
    "table",
    "wkb_threshold",
    "tol_rel",
    "max_refinements",
    "wkb_order",
    "z_min",
    "z_max",
    "q",
    "rho_lo",
    "rho_hi",
    "initial_points",
    "jump_tol",
    "max_depth",
    "rho",
    "energy",
    "gravity",
    "z_lo",
    "z_hi",
    "points_per_decade",
    "v",
    "sigma",
    "length",
    "n_states",
    "d",
    "report_points",
    "absorb",
    "mc_charges",
    "mc_samples",
    "seed",
    "g",
    "m_grav",
    "alpha_p",
    "out",
    "formats",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelChoice {
    TwoScale { c3: f64, c4: f64 },
    PureQuartic { c4: f64 },
    Tabulated { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyChoice {
    /// Energy of gravitational state n.
    State(usize),
    /// Joules.
    Value(f64),
}

/// Fully resolved configuration; its JSON form is what gets hashed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub model: ModelChoice,
    pub solver: SolverConfig,
    /// `None` lets each subcommand pick its own list.
    pub q: Option<Vec<f64>>,
    /// a.u.
    pub rho_lo: f64,
    /// a.u.; `None` for the charge-dependent default.
    pub rho_hi: Option<f64>,
    pub initial_points: usize,
    pub jump_tol: f64,
    pub max_depth: usize,
    /// a.u.
    pub rho: Vec<f64>,
    pub energy: EnergyChoice,
    /// Include M g z in the badland momentum.
    pub gravity: bool,
    /// a.u.
    pub z_lo: f64,
    /// a.u.
    pub z_hi: f64,
    pub points_per_decade: usize,
    pub v: f64,
    pub sigma: f64,
    pub length: f64,
    pub n_states: usize,
    /// m
    pub d: f64,
    pub report_points: usize,
    pub absorb: bool,
    pub mc_charges: usize,
    pub mc_samples: usize,
    pub seed: u64,
    pub constants: Constants,
    #[serde(skip)]
    pub out: PathBuf,
    pub formats: Formats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Formats {
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelChoice::TwoScale { c3: 0.25, c4: 73.6 },
            solver: SolverConfig::default(),
            q: None,
            rho_lo: 0.0,
            rho_hi: None,
            initial_points: 200,
            jump_tol: 0.01,
            max_depth: 16,
            rho: vec![1000.0, 2000.0],
            energy: EnergyChoice::State(1),
            gravity: false,
            z_lo: 0.05,
            z_hi: 1e5,
            points_per_decade: 200,
            v: 1.0,
            sigma: 1e12,
            length: 0.1,
            n_states: 10,
            d: 0.0,
            report_points: 200,
            absorb: true,
            mc_charges: 10,
            mc_samples: 0,
            seed: 1,
            constants: Constants::default(),
            out: PathBuf::from("."),
            formats: Formats { csv: true, json: true, svg: true },
        }
    }
}

/// Parses `key = value` lines; `#` starts a comment. Later lines win.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| anyhow!("line {}: expected key = value", i + 1))?;
        insert_pair(&mut map, k, v).with_context(|| format!("line {}", i + 1))?;
    }
    Ok(map)
}

pub fn insert_pair(map: &mut BTreeMap<String, String>, key: &str, value: &str) -> Result<()> {
    let key = key.trim().to_ascii_lowercase();
    if !KEYS.contains(&key.as_str()) {
        bail!("unknown configuration key '{key}'");
    }
    map.insert(key, value.trim().to_string());
    Ok(())
}

fn number(key: &str, s: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().with_context(|| format!("{key}: '{s}' is not a number"))?;
    if !v.is_finite() {
        bail!("{key}: value must be finite");
    }
    Ok(v)
}

fn count(key: &str, s: &str) -> Result<usize> {
    s.trim().parse().with_context(|| format!("{key}: '{s}' is not a non-negative integer"))
}

/// A length in a.u.; `au` suffix for Bohr radii, otherwise metres.
pub fn length_au(key: &str, s: &str) -> Result<f64> {
    let s = s.trim();
    match s.strip_suffix("au") {
        Some(n) => number(key, n),
        None => Ok(to_au(number(key, s)?, Dimension::Length)),
    }
}

fn list<T>(key: &str, s: &str, f: impl Fn(&str, &str) -> Result<T>) -> Result<Vec<T>> {
    let items: Vec<T> = s.split(',').filter(|p| !p.trim().is_empty()).map(|p| f(key, p)).collect::<Result<_>>()?;
    if items.is_empty() {
        bail!("{key}: empty list");
    }
    Ok(items)
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if v > 0.0 {
        Ok(v)
    } else {
        bail!("{key} must be positive, got {v}")
    }
}

impl RunConfig {
    pub fn from_pairs(map: &BTreeMap<String, String>) -> Result<Self> {
        let mut c = Self::default();
        let get = |k: &str| map.get(k).map(String::as_str);

        let mut c3 = 0.25;
        let mut c4 = 73.6;
        if let Some(s) = get("c3") {
            c3 = number("c3", s)?;
        }
        if let Some(s) = get("c4") {
            c4 = positive("c4", number("c4", s)?)?;
        }
        c.model = match get("model").unwrap_or("two_scale") {
            "two_scale" => ModelChoice::TwoScale { c3: positive("c3", c3)?, c4 },
            "pure_quartic" => ModelChoice::PureQuartic { c4 },
            "tabulated" => ModelChoice::Tabulated {
                path: PathBuf::from(get("table").ok_or_else(|| anyhow!("model = tabulated needs table = <path>"))?),
            },
            other => bail!("model must be two_scale, pure_quartic or tabulated, got '{other}'"),
        };

        if let Some(s) = get("wkb_threshold") {
            c.solver.wkb_threshold = number("wkb_threshold", s)?;
        }
        if let Some(s) = get("tol_rel") {
            c.solver.tol_rel = number("tol_rel", s)?;
        }
        if let Some(s) = get("max_refinements") {
            c.solver.max_refinements = count("max_refinements", s)?;
        }
        if let Some(s) = get("wkb_order") {
            c.solver.wkb_order = match s {
                "plain" => WkbOrder::Plain,
                "first" => WkbOrder::First,
                "second" => WkbOrder::Second,
                other => bail!("wkb_order must be plain, first or second, got '{other}'"),
            };
        }
        if let Some(s) = get("z_min") {
            c.solver.z_min = Some(length_au("z_min", s)?);
        }
        if let Some(s) = get("z_max") {
            c.solver.z_max = Some(length_au("z_max", s)?);
        }
        c.solver.validate()?;

        if let Some(s) = get("q") {
            let qs = list("q", s, number)?;
            if let Some(q) = qs.iter().find(|q| **q < 0.0) {
                bail!("q must be >= 0, got {q}");
            }
            c.q = Some(qs);
        }
        if let Some(s) = get("rho_lo") {
            c.rho_lo = length_au("rho_lo", s)?;
        }
        if let Some(s) = get("rho_hi") {
            c.rho_hi = Some(positive("rho_hi", length_au("rho_hi", s)?)?);
        }
        if let Some(s) = get("initial_points") {
            c.initial_points = count("initial_points", s)?;
        }
        if let Some(s) = get("jump_tol") {
            c.jump_tol = positive("jump_tol", number("jump_tol", s)?)?;
        }
        if let Some(s) = get("max_depth") {
            c.max_depth = count("max_depth", s)?;
        }
        if let Some(s) = get("rho") {
            c.rho = list("rho", s, length_au)?;
        }
        if let Some(s) = get("energy") {
            c.energy = match s.strip_prefix('e').or_else(|| s.strip_prefix('E')) {
                Some(n) => EnergyChoice::State(count("energy", n)?),
                None => EnergyChoice::Value(number("energy", s)?),
            };
            if c.energy == EnergyChoice::State(0) {
                bail!("energy: states are numbered from 1");
            }
        }
        if let Some(s) = get("gravity") {
            c.gravity = s.parse().with_context(|| format!("gravity: '{s}' is not true/false"))?;
        }
        if let Some(s) = get("z_lo") {
            c.z_lo = positive("z_lo", length_au("z_lo", s)?)?;
        }
        if let Some(s) = get("z_hi") {
            c.z_hi = positive("z_hi", length_au("z_hi", s)?)?;
        }
        if c.z_hi <= c.z_lo {
            bail!("z_hi must exceed z_lo");
        }
        if let Some(s) = get("points_per_decade") {
            c.points_per_decade = count("points_per_decade", s)?.max(1);
        }
        if let Some(s) = get("v") {
            c.v = positive("v", number("v", s)?)?;
        }
        if let Some(s) = get("sigma") {
            c.sigma = number("sigma", s)?;
            if c.sigma < 0.0 {
                bail!("sigma must be >= 0");
            }
        }
        if let Some(s) = get("length") {
            c.length = positive("length", number("length", s)?)?;
        }
        if let Some(s) = get("n_states") {
            c.n_states = count("n_states", s)?;
            if c.n_states < 2 {
                bail!("n_states must be at least 2");
            }
        }
        if let Some(s) = get("d") {
            c.d = number("d", s)?.abs();
        }
        if let Some(s) = get("report_points") {
            c.report_points = count("report_points", s)?.max(1);
        }
        if let Some(s) = get("absorb") {
            c.absorb = s.parse().with_context(|| format!("absorb: '{s}' is not true/false"))?;
        }
        if let Some(s) = get("mc_charges") {
            c.mc_charges = count("mc_charges", s)?;
        }
        if let Some(s) = get("mc_samples") {
            c.mc_samples = count("mc_samples", s)?;
        }
        if let Some(s) = get("seed") {
            c.seed = s.trim().parse().with_context(|| format!("seed: '{s}'"))?;
        }
        if let Some(s) = get("g") {
            c.constants.g = positive("g", number("g", s)?)?;
        }
        if let Some(s) = get("m_grav") {
            c.constants.m_grav = positive("m_grav", number("m_grav", s)?)?;
        }
        if let Some(s) = get("alpha_p") {
            c.constants.alpha_p = positive("alpha_p", number("alpha_p", s)?)?;
        }
        if let Some(s) = get("out") {
            c.out = PathBuf::from(s);
        }
        if let Some(s) = get("formats") {
            let names = list("formats", s, |_, p| Ok(p.trim().to_string()))?;
            c.formats = Formats { csv: false, json: false, svg: false };
            for n in names {
                match n.as_str() {
                    "csv" => c.formats.csv = true,
                    "json" => c.formats.json = true,
                    "svg" => c.formats.svg = true,
                    other => bail!("formats: unknown format '{other}'"),
                }
            }
        }
        Ok(c)
    }

    pub fn model(&self) -> Result<PotentialModel> {
        Ok(match &self.model {
            ModelChoice::TwoScale { c3, c4 } => PotentialModel::two_scale(*c3, *c4)?,
            ModelChoice::PureQuartic { c4 } => PotentialModel::pure_quartic(*c4)?,
            ModelChoice::Tabulated { path } => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                PotentialModel::Tabulated(TabulatedPotential::parse(&text)?)
            }
        })
    }

    pub fn surface(&self) -> Result<Surface> {
        Ok(Surface::from_constants(self.model()?, &self.constants))
    }

    pub fn profile_options(&self, surface: &Surface, q: f64) -> ProfileOptions {
        let mut o = ProfileOptions::for_charge(surface, q);
        o.rho_lo = self.rho_lo;
        if let Some(hi) = self.rho_hi {
            o.rho_hi = hi;
        }
        o.initial_points = self.initial_points;
        o.jump_tol = self.jump_tol;
        o.max_depth = self.max_depth;
        o
    }

    pub fn charges(&self, default: &[f64]) -> Vec<f64> {
        self.q.clone().unwrap_or_else(|| default.to_vec())
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let json = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}
