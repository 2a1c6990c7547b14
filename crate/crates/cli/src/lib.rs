//! Command-line front end for the quench library.

pub mod commands;
pub mod config;
pub mod output;
pub mod svg;

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use commands::Outcome;
use config::{insert_pair, parse_pairs, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "hbar-quench", version, about = "Surface-charge quenching of gravitational states of antihydrogen")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// key = value configuration file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override a configuration key; repeatable, wins over the file
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE", global = true)]
    pub set: Vec<String>,
    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<String>,
    /// Comma-separated charges
    #[arg(long, global = true)]
    pub q: Option<String>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Scattering length profiles a(rho) for each charge
    ScanA,
    /// Badland function B(z) and its |B| >= 1 regions
    Badland,
    /// Effective radii and widths against charge
    Widths,
    /// Decay probability and widths for one flight
    Survive,
    /// Gravitational spectrum
    Spectrum,
    /// Coupled-channel evolution during one passage
    Evolve,
    /// Physical constants and derived scales
    Constants,
}

impl Cli {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut map = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                parse_pairs(&text).with_context(|| format!("in {}", path.display()))?
            }
            None => Default::default(),
        };
        for s in &self.set {
            let (k, v) = s.split_once('=').with_context(|| format!("--set expects KEY=VALUE, got '{s}'"))?;
            insert_pair(&mut map, k, v)?;
        }
        if let Some(out) = &self.out {
            insert_pair(&mut map, "out", out)?;
        }
        if let Some(q) = &self.q {
            insert_pair(&mut map, "q", q)?;
        }
        RunConfig::from_pairs(&map)
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let cfg = cli.resolve()?;
    match cli.command {
        Command::ScanA => commands::scan_a(&cfg),
        Command::Badland => commands::badland_cmd(&cfg),
        Command::Widths => commands::widths(&cfg),
        Command::Survive => commands::survive(&cfg),
        Command::Spectrum => commands::spectrum_cmd(&cfg),
        Command::Evolve => commands::evolve(&cfg),
        Command::Constants => commands::constants(&cfg),
    }
}
