//! Subcommand bodies. Each returns the files written and whether any
//! profile was left with unresolved intervals.

use std::path::PathBuf;

use anyhow::{Context, Result};
use serde::Serialize;

use quench_core::gravstates::GravitationalSpectrum;
use quench_core::potentials::{badland, badland_intervals};
use quench_core::quench::{phase_sum_average, EvolveOptions, QuenchScenario};
use quench_core::reflection::{a_cp, scan_profile, RhoProfile, Surface};
use quench_core::units::{from_au, to_au, Dimension};

use crate::config::{EnergyChoice, RunConfig};
use crate::output::{charge_tag, header_line, json, num, write, Csv};
use crate::svg::{Plot, Series};

#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
    /// Some profile kept unresolved intervals.
    pub unresolved: bool,
}

impl Outcome {
    fn emit(&mut self, cfg: &RunConfig, name: &str, contents: &str) -> Result<()> {
        self.files.push(write(&cfg.out, name, contents)?);
        Ok(())
    }
}

fn profile(cfg: &RunConfig, surface: &Surface, q: f64, out: &mut Outcome) -> Result<RhoProfile> {
    let opts = cfg.profile_options(surface, q);
    let p = scan_profile(surface, q, &opts, &cfg.solver).with_context(|| format!("scanning Q = {q}"))?;
    let n = p.unresolved_count();
    if n > 0 {
        out.unresolved = true;
        for (lo, hi) in p.unresolved_intervals() {
            out.warnings.push(format!("Q = {q}: unresolved resonance in rho = [{lo}, {hi}] a.u."));
        }
    }
    Ok(p)
}

fn spectrum(cfg: &RunConfig, n: usize) -> Result<GravitationalSpectrum> {
    Ok(GravitationalSpectrum::new(n, &cfg.constants)?)
}

fn scenario(cfg: &RunConfig, p: &RhoProfile, n_states: usize) -> Result<QuenchScenario> {
    Ok(QuenchScenario::new(p, spectrum(cfg, n_states)?, cfg.constants.clone(), cfg.v, cfg.sigma, cfg.length)?)
}

pub fn scan_a(cfg: &RunConfig) -> Result<Outcome> {
    let surface = cfg.surface()?;
    let hash = cfg.hash();
    let mut out = Outcome::default();
    for q in cfg.charges(&[30.0]) {
        let p = profile(cfg, &surface, q, &mut out)?;
        let tag = charge_tag(q);
        if cfg.formats.csv {
            let text = format!(
                "{}\n# Q = {q}; a_CP = {} {} a.u.\n{}",
                header_line(&hash),
                num(p.a_cp.re),
                num(p.a_cp.im),
                p.to_csv()
            );
            out.emit(cfg, &format!("a_profile_{tag}.csv"), &text)?;
        }
        if cfg.formats.svg {
            let plot = Plot {
                title: format!("Scattering length, Q = {q}"),
                x_label: "rho (a.u.)".into(),
                y_label: "a (a.u.)".into(),
                series: vec![
                    Series { name: "Re a".into(), points: p.samples.iter().map(|s| (s.rho, s.a.re)).collect() },
                    Series { name: "Im a".into(), points: p.samples.iter().map(|s| (s.rho, s.a.im)).collect() },
                ],
                ..Default::default()
            };
            out.emit(cfg, &format!("a_profile_{tag}.svg"), &plot.render())?;
        }
    }
    Ok(out)
}

fn energy_au(cfg: &RunConfig) -> Result<f64> {
    Ok(match cfg.energy {
        EnergyChoice::State(n) => to_au(spectrum(cfg, n)?.energy(n)?, Dimension::Energy),
        EnergyChoice::Value(e) => to_au(e, Dimension::Energy),
    })
}

pub fn badland_cmd(cfg: &RunConfig) -> Result<Outcome> {
    let surface = cfg.surface()?;
    let hash = cfg.hash();
    let energy = energy_au(cfg)?;
    let weight = if cfg.gravity { Some(cfg.constants.weight_au()) } else { None };
    let mut out = Outcome::default();
    let n = ((cfg.z_hi / cfg.z_lo).log10() * cfg.points_per_decade as f64).ceil().max(2.0) as usize;
    let zs: Vec<f64> = (0..=n).map(|i| cfg.z_lo * (cfg.z_hi / cfg.z_lo).powf(i as f64 / n as f64)).collect();
    for q in cfg.charges(&[30.0]) {
        let tag = charge_tag(q);
        let mut curve = Csv::new(&hash, &["rho_au", "z_au", "B"]);
        let mut regions = Csv::new(&hash, &["rho_au", "z_start_au", "z_end_au"]);
        curve.comment(&format!("Q = {q}; E = {} a.u.", num(energy)));
        let mut series = Vec::new();
        for &rho in &cfg.rho {
            let mut inter = surface.interaction(rho, q);
            if let Some(w) = weight {
                inter = inter.with_gravity(w);
            }
            let mut pts = Vec::with_capacity(zs.len());
            for &z in &zs {
                let b = badland(&inter, surface.mass, energy, z)?;
                curve.row(&[num(rho), num(z), num(b)]);
                pts.push((z, b.abs()));
            }
            for (a, b) in badland_intervals(&inter, surface.mass, energy, cfg.z_lo, cfg.z_hi, cfg.points_per_decade)? {
                regions.row(&[num(rho), num(a), num(b)]);
            }
            series.push(Series { name: format!("rho = {rho} a.u."), points: pts });
        }
        if cfg.formats.csv {
            out.emit(cfg, &format!("badland_{tag}.csv"), curve.text())?;
            out.emit(cfg, &format!("badland_intervals_{tag}.csv"), regions.text())?;
        }
        if cfg.formats.svg {
            series.push(Series { name: "|B| = 1".into(), points: vec![(cfg.z_lo, 1.0), (cfg.z_hi, 1.0)] });
            let plot = Plot {
                title: format!("Badland function, Q = {q}"),
                x_label: "z (a.u.)".into(),
                y_label: "|B(z)|".into(),
                log_x: true,
                log_y: true,
                series,
            };
            out.emit(cfg, &format!("badland_{tag}.svg"), &plot.render())?;
        }
    }
    Ok(out)
}

pub const WIDTHS_COLUMNS: [&str; 7] = ["Q", "din_v_m2s", "dtr_v_m2s", "gamma_d_J", "gamma_t_J", "gamma_cp_J", "ratio"];

pub fn widths(cfg: &RunConfig) -> Result<Outcome> {
    let surface = cfg.surface()?;
    let hash = cfg.hash();
    let mut out = Outcome::default();
    let qs = cfg.charges(&[10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0, 100.0]);
    let mut csv = Csv::new(&hash, &WIDTHS_COLUMNS);
    csv.comment(&format!("v = {} m/s; sigma = {} m^-2", num(cfg.v), num(cfg.sigma)));
    let (mut din, mut dtr) = (Vec::new(), Vec::new());
    for &q in &qs {
        let p = profile(cfg, &surface, q, &mut out)?;
        let s = scenario(cfg, &p, 2)?;
        let d_in = s.d_in()?;
        let d_tr = s.d_tr()?;
        let ratio = if d_in > 0.0 { s.quench_ratio()? } else { f64::NAN };
        csv.row(&[
            format!("{q}"),
            num(d_in * cfg.v),
            num(d_tr * cfg.v),
            num(s.gamma_d()?),
            num(s.gamma_t()?),
            num(s.gamma_cp()),
            num(ratio),
        ]);
        din.push((q, d_in * cfg.v));
        dtr.push((q, d_tr * cfg.v));
        out.warnings.extend(s.validity().warnings().into_iter().map(|w| format!("Q = {q}: {w}")));
    }
    if cfg.formats.csv {
        out.emit(cfg, "widths.csv", csv.text())?;
    }
    if cfg.formats.svg {
        let plot = Plot {
            title: "Effective radii times velocity".into(),
            x_label: "Q".into(),
            y_label: "d v (m^2/s)".into(),
            log_y: true,
            series: vec![Series { name: "d_in v".into(), points: din }, Series { name: "d_tr v".into(), points: dtr }],
            ..Default::default()
        };
        out.emit(cfg, "widths.svg", &plot.render())?;
    }
    Ok(out)
}

pub fn survive(cfg: &RunConfig) -> Result<Outcome> {
    let surface = cfg.surface()?;
    let hash = cfg.hash();
    let mut out = Outcome::default();
    for q in cfg.charges(&[30.0]) {
        let p = profile(cfg, &surface, q, &mut out)?;
        let summary = scenario(cfg, &p, 2)?.summary()?;
        out.warnings.extend(summary.warnings.iter().map(|w| format!("Q = {q}: {w}")));
        out.emit(cfg, &format!("survive_{}.json", charge_tag(q)), &json(&hash, &summary)?)?;
    }
    Ok(out)
}

pub fn spectrum_cmd(cfg: &RunConfig) -> Result<Outcome> {
    let s = spectrum(cfg, cfg.n_states)?;
    let mut out = Outcome::default();
    out.emit(cfg, "spectrum.json", &json(&cfg.hash(), &s.rows())?)?;
    Ok(out)
}

#[derive(Serialize)]
struct StateComparison {
    k: usize,
    coupled: f64,
    perturbative: Option<f64>,
}

#[derive(Serialize)]
struct PhaseCheck {
    charges: usize,
    samples: usize,
    omega_rad_s: f64,
    mean_over_n: f64,
}

#[derive(Serialize)]
struct EvolveReport {
    charge: f64,
    d_m: f64,
    n_states: usize,
    absorb: bool,
    states: Vec<StateComparison>,
    /// 1 minus the summed perturbative transition probabilities.
    p1_perturbative_complement: f64,
    /// sum_k |C_k|^2 times the survival factor at the end.
    final_norm: f64,
    derivative_check: f64,
    phase_sum: Option<PhaseCheck>,
}

pub fn evolve(cfg: &RunConfig) -> Result<Outcome> {
    let surface = cfg.surface()?;
    let hash = cfg.hash();
    let mut out = Outcome::default();
    for q in cfg.charges(&[5.0]) {
        let p = profile(cfg, &surface, q, &mut out)?;
        let s = scenario(cfg, &p, cfg.n_states)?;
        let opts = EvolveOptions { absorb: cfg.absorb, report_points: cfg.report_points, ..Default::default() };
        let trace = s.evolve_coupled(cfg.n_states, cfg.d, &opts)?;
        let tag = charge_tag(q);
        let last = trace.times.len() - 1;

        let mut states = Vec::new();
        let mut lost = 0.0;
        for k in 1..=cfg.n_states {
            let perturbative = if k == 1 {
                None
            } else {
                let pk = s.transition_amplitude(k, cfg.d, &[0.0])?.probability();
                lost += pk;
                Some(pk)
            };
            states.push(StateComparison { k, coupled: trace.probability(last, k), perturbative });
        }
        let phase_sum = (cfg.mc_samples > 0).then(|| {
            let omega = s.spectrum.omega(1, 2).expect("two states");
            let span = cfg.length / cfg.v;
            let mean = phase_sum_average(omega, cfg.mc_charges, span, cfg.mc_samples, cfg.seed);
            PhaseCheck {
                charges: cfg.mc_charges,
                samples: cfg.mc_samples,
                omega_rad_s: omega,
                mean_over_n: mean / cfg.mc_charges.max(1) as f64,
            }
        });
        let report = EvolveReport {
            charge: q,
            d_m: cfg.d,
            n_states: cfg.n_states,
            absorb: cfg.absorb,
            states,
            p1_perturbative_complement: 1.0 - lost,
            final_norm: trace.total_probability(last),
            derivative_check: trace.derivative_check,
            phase_sum,
        };
        if cfg.formats.csv {
            let mut cols = vec!["t_s".to_string()];
            cols.extend((1..=cfg.n_states).map(|k| format!("P{k}")));
            cols.extend(["survival".to_string(), "total".to_string()]);
            let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
            let mut csv = Csv::new(&hash, &col_refs);
            csv.comment(&format!("Q = {q}; d = {} m; P_k = |C_k|^2 times survival", num(cfg.d)));
            for j in 0..trace.times.len() {
                let mut row = vec![num(trace.times[j])];
                row.extend((1..=cfg.n_states).map(|k| num(trace.probability(j, k))));
                row.push(num(trace.survival[j]));
                row.push(num(trace.total_probability(j)));
                csv.row(&row);
            }
            out.emit(cfg, &format!("evolve_{tag}.csv"), csv.text())?;
        }
        if cfg.formats.json {
            out.emit(cfg, &format!("evolve_{tag}.json"), &json(&hash, &report)?)?;
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct ConstantsReport {
    constants: Vec<quench_core::units::ConstantEntry>,
    scales: quench_core::gravstates::Scales,
    a_cp_m: (f64, f64),
    lifetime_cp_s: f64,
}

pub fn constants(cfg: &RunConfig) -> Result<Outcome> {
    let surface = cfg.surface()?;
    let spectrum = spectrum(cfg, 1)?;
    let a = a_cp(&surface, &cfg.solver)?;
    let c = &cfg.constants;
    let gamma = 2.0 * c.m_grav * c.g * from_au(a.im.abs(), Dimension::Length);
    let report = ConstantsReport {
        constants: c.dump(),
        scales: spectrum.scales,
        a_cp_m: a.to_si(),
        lifetime_cp_s: c.hbar / gamma,
    };
    for e in &report.constants {
        println!("{:<16} {:>24} {}", e.name, num(e.value), e.unit);
    }
    println!("{:<16} {:>24} m", "l_g", num(report.scales.l_g));
    println!("{:<16} {:>24} J", "eps_g", num(report.scales.eps_g));
    println!("{:<16} {:>24} s", "tau_g", num(report.scales.tau_g));
    println!("{:<16} {:>24} m", "re_a_cp", num(report.a_cp_m.0));
    println!("{:<16} {:>24} m", "im_a_cp", num(report.a_cp_m.1));
    println!("{:<16} {:>24} s", "lifetime_cp", num(report.lifetime_cp_s));
    let mut out = Outcome::default();
    if cfg.formats.json {
        out.emit(cfg, "constants.json", &json(&cfg.hash(), &report)?)?;
    }
    Ok(out)
}
