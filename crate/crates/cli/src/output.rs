//! Deterministic CSV writers and the run manifest.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use gprc_core::gp::{periodic_kernel, KernelHyper};
use gprc_core::sim::{period_metrics, ScenarioResult, TraceKind};
use serde::Serialize;

use crate::config::{KernelProfileSettings, LoadedConfig};
use crate::error::{CliError, Result};

pub const TIMESERIES_FILE: &str = "timeseries.csv";
pub const METRICS_FILE: &str = "metrics.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

fn num(v: f64) -> String {
    // print negative zero as zero
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.16e}")
}

fn header(checksum: &str) -> String {
    format!("# config-sha256={checksum}\n")
}

/// Error and repetitive-control columns for both variants. A variant that
/// was not simulated is reported as the plain loop: its error column holds
/// the feedback-only error and its output column is zero.
pub fn timeseries_csv(result: &ScenarioResult, checksum: &str) -> String {
    let plain = result
        .trace(TraceKind::None)
        .expect("plain loop is always simulated");
    let zeros = vec![0.0; result.samples()];
    let pick = |kind| match result.trace(kind) {
        Some(t) => (&t.e, &t.f),
        None => (&plain.e, &zeros),
    };
    let (e_trad, f_trad) = pick(TraceKind::Traditional);
    let (e_sp, f_sp) = pick(TraceKind::Spatial);
    let mut s = header(checksum);
    s.push_str("t,p,d,e_trad,e_spatial,f_trad,f_spatial\n");
    for k in 0..result.samples() {
        let row = [
            result.t[k],
            result.p[k],
            result.d[k],
            e_trad[k],
            e_sp[k],
            f_trad[k],
            f_sp[k],
        ];
        let line: Vec<String> = row.iter().map(|&v| num(v)).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

pub fn metrics_csv(result: &ScenarioResult, checksum: &str) -> Result<String> {
    let mut s = header(checksum);
    s.push_str("variant,period,start_sample,end_sample,norm\n");
    for (kind, rows) in period_metrics(result)? {
        for m in rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                kind.name(),
                m.period,
                m.start,
                m.end,
                num(m.norm)
            );
        }
    }
    Ok(s)
}

/// Kernel value against lag over `+-span * period`, with the lags at zero
/// and at whole periods hit exactly.
pub fn kernel_profile_csv(
    hyper: &KernelHyper,
    settings: &KernelProfileSettings,
    checksum: &str,
) -> String {
    let n = settings.points;
    let half = (n - 1) as f64;
    let mut s = header(checksum);
    s.push_str("lag,k\n");
    for i in 0..n {
        let lag = settings.span_periods * hyper.period * (2.0 * i as f64 - half) / half;
        let _ = writeln!(s, "{},{}", num(lag), num(periodic_kernel(0.0, lag, hyper)));
    }
    s
}

#[derive(Debug, Serialize)]
pub struct DesignInfo {
    pub gain: f64,
    pub target_crossover_hz: f64,
    pub crossover_hz: Option<f64>,
    pub phase_margin_deg: Option<f64>,
    pub closed_loop_spectral_radius: f64,
    pub controller_num: Vec<f64>,
    pub controller_den: Vec<f64>,
    pub plant_num: Vec<f64>,
    pub plant_den: Vec<f64>,
    pub spatial_preview: usize,
    pub traditional_preview: usize,
    pub spatial_inversion_error: f64,
    pub traditional_inversion_error: f64,
}

impl DesignInfo {
    pub fn from_summary(d: &gprc_core::sim::DesignSummary) -> Self {
        Self {
            gain: d.report.gain,
            target_crossover_hz: d.report.target_crossover_hz,
            crossover_hz: d.report.crossover_hz,
            phase_margin_deg: d.report.phase_margin_deg,
            closed_loop_spectral_radius: d.report.closed_loop_spectral_radius,
            controller_num: d.controller.num().to_vec(),
            controller_den: d.controller.den().to_vec(),
            plant_num: d.plant.num().to_vec(),
            plant_den: d.plant.den().to_vec(),
            spatial_preview: d.spatial_filter.preview(),
            traditional_preview: d.traditional_filter.preview(),
            spatial_inversion_error: d.spatial_inversion_error,
            traditional_inversion_error: d.traditional_inversion_error,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SegmentInfo {
    pub duration_s: f64,
    pub start: f64,
    pub end: f64,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_sha256: String,
    pub timestamp_unix_s: u64,
    pub resolved_config: BTreeMap<String, String>,
    pub design: DesignInfo,
    pub velocity_profile: Vec<SegmentInfo>,
    pub samples: usize,
    pub period_fences: Vec<usize>,
    pub spatial_fits: Option<usize>,
    pub files: Vec<&'static str>,
}

impl RunManifest {
    pub fn new(cfg: &LoadedConfig, result: &ScenarioResult) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            config_sha256: cfg.checksum.clone(),
            timestamp_unix_s: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            resolved_config: cfg.resolved.clone(),
            design: DesignInfo::from_summary(&result.design),
            velocity_profile: cfg
                .scenario
                .velocity
                .segments()
                .iter()
                .map(|s| SegmentInfo {
                    duration_s: s.duration,
                    start: s.start,
                    end: s.end,
                })
                .collect(),
            samples: result.samples(),
            period_fences: result.fences.clone(),
            spatial_fits: result.spatial_fits,
            files: vec![TIMESERIES_FILE, METRICS_FILE],
        }
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(CliError::io(path))
}
