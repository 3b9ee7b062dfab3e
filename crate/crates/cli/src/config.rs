//! Flat `key = value` configuration with dotted section names.
//!
//! Lines may carry `#` comments. Every key has a documented default, so a
//! file only needs the values it changes. Numbers accept a `pi` suffix
//! (`2pi`, `2*pi`, `pi`).

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use gprc_core::baseline::QFilter;
use gprc_core::design::{InversionOptions, LeadSpec, LoopShapeSpec, LowPassSpec};
use gprc_core::sim::{
    DisturbanceMap, Duration, Harmonic, PlantParams, PositionModeKind, RcVariant, ScenarioConfig,
    Segment, SpatialSettings, TraditionalSettings, VelocityProfile,
};
use gprc_core::spatial::VelocitySource;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

/// `(key, default, description)`. A default of `auto` is derived from other
/// keys during resolution.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("plant.J", "1.0", "inertia"),
    ("plant.d", "1.0", "viscous damping"),
    ("plant.k", "10000.0", "stiffness"),
    ("sim.sample_rate_hz", "1000.0", "controller sample rate"),
    (
        "sim.periods",
        "10",
        "run until this many spatial periods are complete",
    ),
    (
        "sim.duration_s",
        "auto",
        "fixed run length in seconds; replaces sim.periods",
    ),
    ("sim.position_mode", "ideal", "ideal | tracking"),
    ("rc.variant", "both", "none | traditional | spatial | both"),
    (
        "controller.crossover_hz",
        "50.0",
        "target open-loop crossover",
    ),
    ("controller.lead", "true", "include the lead section"),
    (
        "controller.lead_zero_ratio",
        "4.0",
        "lead zero at crossover / ratio",
    ),
    (
        "controller.lead_pole_ratio",
        "4.0",
        "lead pole at crossover * ratio",
    ),
    (
        "controller.lowpass",
        "true",
        "include the second-order low-pass",
    ),
    (
        "controller.lowpass_hz",
        "auto",
        "low-pass corner, default 5 x crossover",
    ),
    (
        "controller.lowpass_damping",
        "0.7",
        "low-pass damping ratio",
    ),
    (
        "learning.zero_radius",
        "0.95",
        "zeros at or beyond this radius get zero-phase treatment",
    ),
    ("spatial.period", "2pi", "spatial period in radians"),
    (
        "spatial.downsample",
        "5",
        "store every n-th learning sample",
    ),
    (
        "spatial.velocity_source",
        "supplied",
        "supplied | backward_difference",
    ),
    ("kernel.sigma_f", "1.0", "kernel signal standard deviation"),
    (
        "kernel.sigma_n",
        "1e-6",
        "observation noise standard deviation",
    ),
    ("kernel.length_scale", "0.1", "kernel length scale"),
    (
        "kernel.period",
        "auto",
        "kernel period, must equal spatial.period",
    ),
    (
        "kernel_profile.points",
        "1201",
        "samples of the emitted kernel profile",
    ),
    (
        "kernel_profile.span_periods",
        "1.5",
        "profile covers lags in +-span * period",
    ),
    (
        "traditional.period_samples",
        "1717",
        "memory length in samples",
    ),
    (
        "traditional.q_taps",
        "1.0",
        "symmetric FIR robustness filter taps",
    ),
    (
        "disturbance.harmonics",
        "1.5:1, 0.8:3, 0.6:9, 0.4:18, 0.2:27",
        "amplitude:order[:phase] terms of the position-dependent disturbance",
    ),
    ("velocity.nominal", "3.6593", "initial velocity in rad/s"),
    (
        "velocity.change_after_periods",
        "3",
        "revolutions before the velocity change",
    ),
    ("velocity.changed", "5.2", "velocity after the change"),
    ("velocity.ramp_s", "0.5", "duration of the linear ramp"),
    (
        "velocity.segments",
        "auto",
        "explicit duration:start:end segments, separated by ';'",
    ),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelProfileSettings {
    pub points: usize,
    pub span_periods: f64,
}

#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub scenario: ScenarioConfig,
    pub kernel_profile: KernelProfileSettings,
    /// Every key with its effective value.
    pub resolved: BTreeMap<String, String>,
    pub checksum: String,
}

pub fn parse_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Config(format!(
                "line {}: expected `key = value`, got `{line}`",
                i + 1
            )));
        };
        let (k, v) = (k.trim(), v.trim());
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(CliError::Config(format!(
                "line {}: duplicate key `{k}`",
                i + 1
            )));
        }
    }
    let unknown: Vec<&str> = out
        .keys()
        .map(String::as_str)
        .filter(|k| !KEYS.iter().any(|(known, _, _)| known == k))
        .collect();
    if !unknown.is_empty() {
        return Err(CliError::Config(format!(
            "unknown keys: {}",
            unknown.join(", ")
        )));
    }
    Ok(out)
}

pub fn load_config(path: &Path) -> Result<LoadedConfig> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    resolve(&parse_text(&text)?)
}

pub fn parse_number(key: &str, s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || CliError::Config(format!("`{key}`: cannot parse `{s}` as a number"));
    let v = if let Some(coef) = s.strip_suffix("pi") {
        let coef = coef.trim().trim_end_matches('*').trim();
        if coef.is_empty() {
            PI
        } else {
            coef.parse::<f64>().map_err(|_| bad())? * PI
        }
    } else {
        s.parse::<f64>().map_err(|_| bad())?
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

struct Resolver<'a> {
    raw: &'a BTreeMap<String, String>,
    resolved: BTreeMap<String, String>,
}

impl Resolver<'_> {
    fn given(&self, key: &str) -> bool {
        self.raw.contains_key(key)
    }

    fn text(&self, key: &str) -> String {
        match self.raw.get(key) {
            Some(v) => v.clone(),
            None => KEYS
                .iter()
                .find(|(k, _, _)| *k == key)
                .map(|(_, d, _)| d.to_string())
                .expect("known key"),
        }
    }

    fn record(&mut self, key: &str, value: String) {
        self.resolved.insert(key.to_string(), value);
    }

    fn num(&mut self, key: &str) -> Result<f64> {
        let v = parse_number(key, &self.text(key))?;
        self.record(key, fmt_f64(v));
        Ok(v)
    }

    fn num_or(&mut self, key: &str, auto: f64) -> Result<f64> {
        let t = self.text(key);
        let v = if t == "auto" {
            auto
        } else {
            parse_number(key, &t)?
        };
        self.record(key, fmt_f64(v));
        Ok(v)
    }

    fn count(&mut self, key: &str) -> Result<usize> {
        let t = self.text(key);
        let v = t.parse::<usize>().map_err(|_| {
            CliError::Config(format!(
                "`{key}`: expected a non-negative integer, got `{t}`"
            ))
        })?;
        self.record(key, v.to_string());
        Ok(v)
    }

    fn flag(&mut self, key: &str) -> Result<bool> {
        let t = self.text(key);
        let v = match t.as_str() {
            "true" | "yes" | "1" => true,
            "false" | "no" | "0" => false,
            _ => {
                return Err(CliError::Config(format!(
                    "`{key}`: expected true or false, got `{t}`"
                )))
            }
        };
        self.record(key, v.to_string());
        Ok(v)
    }

    fn choice<T: Copy>(&mut self, key: &str, options: &[(&str, T)]) -> Result<T> {
        let t = self.text(key);
        let found = options.iter().find(|(name, _)| *name == t).ok_or_else(|| {
            let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
            CliError::Config(format!(
                "`{key}`: expected one of {}, got `{t}`",
                names.join(" | ")
            ))
        })?;
        self.record(key, t);
        Ok(found.1)
    }

    fn list(&mut self, key: &str, sep: char) -> Vec<String> {
        self.text(key)
            .split(sep)
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect()
    }
}

fn field(name: &str, e: gprc_core::Error) -> CliError {
    CliError::Config(format!("`{name}`: {e}"))
}

pub fn resolve(raw: &BTreeMap<String, String>) -> Result<LoadedConfig> {
    let mut r = Resolver {
        raw,
        resolved: BTreeMap::new(),
    };

    let plant = PlantParams {
        inertia: r.num("plant.J")?,
        damping: r.num("plant.d")?,
        stiffness: r.num("plant.k")?,
    };
    let sample_rate_hz = r.num("sim.sample_rate_hz")?;

    let duration = if r.given("sim.duration_s") {
        if r.given("sim.periods") {
            return Err(CliError::Config(
                "`sim.periods` and `sim.duration_s` are mutually exclusive".into(),
            ));
        }
        r.record("sim.periods", "auto".into());
        Duration::Seconds(r.num("sim.duration_s")?)
    } else {
        r.record("sim.duration_s", "auto".into());
        Duration::Periods(r.count("sim.periods")?)
    };
    let position_mode = r.choice(
        "sim.position_mode",
        &[
            ("ideal", PositionModeKind::Ideal),
            ("tracking", PositionModeKind::ClosedLoopTracking),
        ],
    )?;
    let variant = r.choice(
        "rc.variant",
        &[
            ("none", RcVariant::None),
            ("traditional", RcVariant::Traditional),
            ("spatial", RcVariant::Spatial),
            ("both", RcVariant::Both),
        ],
    )?;

    let fc = r.num("controller.crossover_hz")?;
    let use_lead = r.flag("controller.lead")?;
    let lead = LeadSpec {
        zero_ratio: r.num("controller.lead_zero_ratio")?,
        pole_ratio: r.num("controller.lead_pole_ratio")?,
    };
    let use_lowpass = r.flag("controller.lowpass")?;
    let lowpass = LowPassSpec {
        corner_hz: r.num_or("controller.lowpass_hz", 5.0 * fc)?,
        damping: r.num("controller.lowpass_damping")?,
    };
    let controller = LoopShapeSpec {
        crossover_hz: fc,
        lead: use_lead.then_some(lead),
        lowpass: use_lowpass.then_some(lowpass),
    };
    let learning = InversionOptions {
        zero_radius: r.num("learning.zero_radius")?,
    };

    let period = r.num("spatial.period")?;
    let kernel_period = r.num_or("kernel.period", period)?;
    if kernel_period != period {
        return Err(CliError::Config(format!(
            "`kernel.period`: {kernel_period} must equal spatial.period {period}"
        )));
    }
    let spatial = SpatialSettings {
        period,
        downsample: r.count("spatial.downsample")?,
        sigma_f: r.num("kernel.sigma_f")?,
        sigma_n: r.num("kernel.sigma_n")?,
        length_scale: r.num("kernel.length_scale")?,
        velocity_source: r.choice(
            "spatial.velocity_source",
            &[
                ("supplied", VelocitySource::Supplied),
                ("backward_difference", VelocitySource::BackwardDifference),
            ],
        )?,
    };
    let kernel_profile = KernelProfileSettings {
        points: r.count("kernel_profile.points")?,
        span_periods: r.num("kernel_profile.span_periods")?,
    };
    if kernel_profile.points < 2 {
        return Err(CliError::Config(
            "`kernel_profile.points`: need at least 2".into(),
        ));
    }

    let q_taps = r
        .list("traditional.q_taps", ',')
        .iter()
        .map(|t| parse_number("traditional.q_taps", t))
        .collect::<Result<Vec<_>>>()?;
    r.record(
        "traditional.q_taps",
        q_taps
            .iter()
            .map(|v| fmt_f64(*v))
            .collect::<Vec<_>>()
            .join(", "),
    );
    let traditional = TraditionalSettings {
        period_samples: r.count("traditional.period_samples")?,
        q: QFilter::new(q_taps).map_err(|e| field("traditional.q_taps", e))?,
    };

    let mut terms = Vec::new();
    for item in r.list("disturbance.harmonics", ',') {
        let parts: Vec<&str> = item.split(':').collect();
        if !(2..=3).contains(&parts.len()) {
            return Err(CliError::Config(format!(
                "`disturbance.harmonics`: expected amplitude:order[:phase], got `{item}`"
            )));
        }
        terms.push(Harmonic {
            amplitude: parse_number("disturbance.harmonics", parts[0])?,
            order: parse_number("disturbance.harmonics", parts[1])?,
            phase: match parts.get(2) {
                Some(p) => parse_number("disturbance.harmonics", p)?,
                None => 0.0,
            },
        });
    }
    r.record(
        "disturbance.harmonics",
        terms
            .iter()
            .map(|t| {
                format!(
                    "{}:{}:{}",
                    fmt_f64(t.amplitude),
                    fmt_f64(t.order),
                    fmt_f64(t.phase)
                )
            })
            .collect::<Vec<_>>()
            .join(", "),
    );
    let disturbance =
        DisturbanceMap::new(period, terms).map_err(|e| field("disturbance.harmonics", e))?;

    let step_keys = [
        "velocity.nominal",
        "velocity.change_after_periods",
        "velocity.changed",
        "velocity.ramp_s",
    ];
    let velocity = if r.given("velocity.segments") {
        if let Some(k) = step_keys.iter().find(|k| r.given(k)) {
            return Err(CliError::Config(format!(
                "`{k}` cannot be combined with `velocity.segments`"
            )));
        }
        for k in step_keys {
            r.record(k, "auto".into());
        }
        let mut segs = Vec::new();
        for item in r.list("velocity.segments", ';') {
            let parts = item
                .split(':')
                .map(|p| parse_number("velocity.segments", p))
                .collect::<Result<Vec<_>>>()?;
            if parts.len() != 3 {
                return Err(CliError::Config(format!(
                    "`velocity.segments`: expected duration:start:end, got `{item}`"
                )));
            }
            segs.push(Segment::ramp(parts[0], parts[1], parts[2]));
        }
        VelocityProfile::new(segs).map_err(|e| field("velocity.segments", e))?
    } else {
        let nominal = r.num("velocity.nominal")?;
        let after = r.num("velocity.change_after_periods")?;
        let changed = r.num("velocity.changed")?;
        let ramp = r.num("velocity.ramp_s")?;
        VelocityProfile::velocity_step(nominal, after, period, changed, ramp)
            .map_err(|e| field("velocity", e))?
    };
    r.record(
        "velocity.segments",
        velocity
            .segments()
            .iter()
            .map(|s| {
                format!(
                    "{}:{}:{}",
                    fmt_f64(s.duration),
                    fmt_f64(s.start),
                    fmt_f64(s.end)
                )
            })
            .collect::<Vec<_>>()
            .join("; "),
    );

    let scenario = ScenarioConfig {
        plant,
        sample_rate_hz,
        controller,
        variant,
        learning,
        spatial,
        traditional,
        disturbance,
        velocity,
        duration,
        position_mode,
    };
    scenario.validate()?;
    let resolved = r.resolved;
    debug_assert_eq!(resolved.len(), KEYS.len());
    let checksum = checksum(&resolved);
    Ok(LoadedConfig {
        scenario,
        kernel_profile,
        resolved,
        checksum,
    })
}

/// Canonical `key = value` listing of a resolved configuration.
pub fn canonical_text(resolved: &BTreeMap<String, String>) -> String {
    let mut s = String::new();
    for (k, v) in resolved {
        let _ = writeln!(s, "{k} = {v}");
    }
    s
}

pub fn checksum(resolved: &BTreeMap<String, String>) -> String {
    hex::encode(Sha256::digest(canonical_text(resolved).as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str) -> Result<LoadedConfig> {
        resolve(&parse_text(text)?)
    }

    #[test]
    fn empty_config_gives_case_study() {
        let c = load("").unwrap();
        assert_eq!(c.scenario, ScenarioConfig::default());
        assert_eq!(c.resolved.len(), KEYS.len());
    }

    #[test]
    fn minimal_config() {
        let c = load("plant.J = 1.0\nrc.variant = spatial # comment\n").unwrap();
        assert_eq!(c.scenario.variant, RcVariant::Spatial);
        assert_eq!(c.resolved["controller.lowpass_hz"], "250.0");
        assert_eq!(c.resolved["kernel.period"], fmt_f64(2.0 * PI));
    }

    #[test]
    fn case_study_hyper_parameters_accepted() {
        let c = load("kernel.sigma_n = 1e-6\nkernel.length_scale = 0.1\nkernel.sigma_f = 1\nspatial.period = 2pi\n")
            .unwrap();
        assert_eq!(c.scenario.spatial.sigma_n, 1e-6);
        assert_eq!(c.scenario.spatial.length_scale, 0.1);
        assert_eq!(c.scenario.spatial.period, 2.0 * PI);
    }

    #[test]
    fn unknown_keys_are_listed() {
        let err = load("plant.x = 1\nfoo = 2\n").unwrap_err().to_string();
        assert!(err.contains("foo") && err.contains("plant.x"), "{err}");
    }

    #[test]
    fn negative_inertia_names_the_field() {
        let err = load("plant.J = -1\n").unwrap_err();
        assert!(err.to_string().contains("plant.J"), "{err}");
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn pi_numbers() {
        assert_eq!(parse_number("x", "pi").unwrap(), PI);
        assert_eq!(parse_number("x", "2*pi").unwrap(), 2.0 * PI);
        assert_eq!(parse_number("x", "0.5pi").unwrap(), 0.5 * PI);
        assert!(parse_number("x", "abc").is_err());
        assert!(parse_number("x", "inf").is_err());
    }

    #[test]
    fn checksum_ignores_formatting_of_equal_values() {
        let a = load("plant.k = 1e4\n").unwrap();
        let b = load("  plant.k=10000   # same\n").unwrap();
        assert_eq!(a.checksum, b.checksum);
        let c = load("plant.k = 2e4\n").unwrap();
        assert_ne!(a.checksum, c.checksum);
    }

    #[test]
    fn conflicting_keys() {
        assert!(load("sim.periods = 4\nsim.duration_s = 9\n").is_err());
        assert!(load("velocity.segments = 1:1:1\nvelocity.nominal = 2\n").is_err());
        assert!(load("kernel.period = 3\n").is_err());
        assert!(load("plant.J = 1\nplant.J = 2\n").is_err());
        assert!(load("just text\n").is_err());
    }

    #[test]
    fn explicit_segments() {
        let c = load("velocity.segments = 2:1:1; 1:1:3\nsim.duration_s = 30\n").unwrap();
        assert_eq!(c.scenario.velocity.segments().len(), 2);
        assert_eq!(c.scenario.duration, Duration::Seconds(30.0));
        assert_eq!(c.resolved["velocity.nominal"], "auto");
    }

    #[test]
    fn harmonics_and_taps() {
        let c =
            load("disturbance.harmonics = 1:1:0.5, 2:3\ntraditional.q_taps = 0.25, 0.5, 0.25\n")
                .unwrap();
        assert_eq!(c.scenario.disturbance.terms().len(), 2);
        assert_eq!(c.scenario.disturbance.terms()[0].phase, 0.5);
        assert_eq!(c.scenario.traditional.q.taps(), &[0.25, 0.5, 0.25]);
        assert!(load("traditional.q_taps = 0.3, 0.7\n").is_err());
    }
}
