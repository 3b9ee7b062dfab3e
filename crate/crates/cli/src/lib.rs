//! Command-line driver: loads a flat configuration, runs the scenario and
//! writes bit-stable data files.

pub mod config;
pub mod error;
pub mod output;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use gprc_core::sim::{design_loops, run_scenario};

use crate::config::{load_config, LoadedConfig};
use crate::error::{CliError, Result};
use crate::output::{
    kernel_profile_csv, metrics_csv, timeseries_csv, write_file, DesignInfo, RunManifest,
    MANIFEST_FILE, METRICS_FILE, TIMESERIES_FILE,
};

#[derive(Debug, Parser)]
#[command(
    name = "gprc",
    version,
    about = "Spatial and time-domain repetitive control simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum VariantArg {
    None,
    Traditional,
    Spatial,
    Both,
}

impl VariantArg {
    fn name(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Traditional => "traditional",
            Self::Spatial => "spatial",
            Self::Both => "both",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the scenario and write timeseries, metrics and manifest.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides `rc.variant` from the config.
        #[arg(long, value_enum)]
        variant: Option<VariantArg>,
    },
    /// Write the kernel value against lag.
    KernelProfile {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the feedback design, margins and learning-filter previews.
    DesignReport {
        #[arg(long)]
        config: PathBuf,
    },
    /// Simulate several configs concurrently, each into `<out>/<config stem>`.
    Sweep {
        #[arg(long = "config", required = true)]
        configs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_with_variant(path: &Path, variant: Option<VariantArg>) -> Result<LoadedConfig> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    let mut raw = config::parse_text(&text)?;
    if let Some(v) = variant {
        raw.insert("rc.variant".into(), v.name().into());
    }
    config::resolve(&raw)
}

/// Simulates `cfg` and writes the three output files into `out`.
pub fn simulate(cfg: &LoadedConfig, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(CliError::io(out))?;
    let result = run_scenario(&cfg.scenario)?;
    write_file(
        &out.join(TIMESERIES_FILE),
        &timeseries_csv(&result, &cfg.checksum),
    )?;
    write_file(
        &out.join(METRICS_FILE),
        &metrics_csv(&result, &cfg.checksum)?,
    )?;
    let manifest = RunManifest::new(cfg, &result);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_file(&out.join(MANIFEST_FILE), &(json + "\n"))
}

pub fn kernel_profile(cfg: &LoadedConfig, out: &Path) -> Result<()> {
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    }
    let hyper = cfg.scenario.spatial.hyper()?;
    write_file(
        out,
        &kernel_profile_csv(&hyper, &cfg.kernel_profile, &cfg.checksum),
    )
}

pub fn design_report(cfg: &LoadedConfig) -> Result<String> {
    let d = DesignInfo::from_summary(&design_loops(&cfg.scenario)?);
    let opt = |v: Option<f64>| v.map_or("none".to_string(), |v| format!("{v:.6}"));
    let coeffs = |c: &[f64]| {
        c.iter()
            .map(|v| format!("{v:.16e}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut s = String::new();
    let _ = writeln!(s, "config-sha256            {}", cfg.checksum);
    let _ = writeln!(s, "gain                     {:.10e}", d.gain);
    let _ = writeln!(s, "target crossover [Hz]    {:.6}", d.target_crossover_hz);
    let _ = writeln!(s, "crossover [Hz]           {}", opt(d.crossover_hz));
    let _ = writeln!(s, "phase margin [deg]       {}", opt(d.phase_margin_deg));
    let _ = writeln!(
        s,
        "closed-loop radius       {:.10}",
        d.closed_loop_spectral_radius
    );
    let _ = writeln!(s, "spatial preview n_l      {}", d.spatial_preview);
    let _ = writeln!(s, "traditional preview n_l  {}", d.traditional_preview);
    let _ = writeln!(
        s,
        "max |L PS - 1|           {:.6e}",
        d.spatial_inversion_error
    );
    let _ = writeln!(
        s,
        "max |L T - 1|            {:.6e}",
        d.traditional_inversion_error
    );
    let _ = writeln!(s, "controller num           {}", coeffs(&d.controller_num));
    let _ = writeln!(s, "controller den           {}", coeffs(&d.controller_den));
    let _ = writeln!(s, "plant num                {}", coeffs(&d.plant_num));
    let _ = writeln!(s, "plant den                {}", coeffs(&d.plant_den));
    Ok(s)
}

/// Runs every config on its own thread. Returns the per-config outcome in
/// input order.
pub fn sweep(configs: &[PathBuf], out: &Path) -> Result<Vec<(PathBuf, Result<()>)>> {
    let mut dirs = Vec::new();
    for c in configs {
        let stem = c
            .file_stem()
            .ok_or_else(|| CliError::Config(format!("{}: no file name", c.display())))?;
        let dir = out.join(stem);
        if dirs.contains(&dir) {
            return Err(CliError::Config(format!(
                "two configs map to the output directory {}",
                dir.display()
            )));
        }
        dirs.push(dir);
    }
    let outcomes = std::thread::scope(|s| {
        let handles: Vec<_> = configs
            .iter()
            .zip(&dirs)
            .map(|(c, d)| s.spawn(move || load_config(c).and_then(|cfg| simulate(&cfg, d))))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect::<Vec<_>>()
    });
    Ok(configs.iter().cloned().zip(outcomes).collect())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            config,
            out,
            variant,
        } => simulate(&load_with_variant(&config, variant)?, &out),
        Command::KernelProfile { config, out } => kernel_profile(&load_config(&config)?, &out),
        Command::DesignReport { config } => {
            print!("{}", design_report(&load_config(&config)?)?);
            Ok(())
        }
        Command::Sweep { configs, out } => {
            let mut first_err = None;
            for (path, outcome) in sweep(&configs, &out)? {
                match outcome {
                    Ok(()) => println!("ok    {}", path.display()),
                    Err(e) => {
                        println!("fail  {} (exit {}): {e}", path.display(), e.exit_code());
                        first_err.get_or_insert(e);
                    }
                }
            }
            first_err.map_or(Ok(()), Err)
        }
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
