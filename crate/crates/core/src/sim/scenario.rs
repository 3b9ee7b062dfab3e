use std::f64::consts::TAU;

use super::disturbance::DisturbanceMap;
use super::metrics::{period_norms, period_starts, PeriodMetric};
use super::profile::{generate_position, Horizon, PositionMode, VelocityProfile};
use crate::baseline::{QFilter, RcBuffer};
use crate::design::{
    design_feedback, inversion_error, learning_filter_spatial, learning_filter_traditional,
    DesignReport, InversionOptions, LoopShapeSpec, NonCausalFilter,
};
use crate::error::{ensure_positive, Error, Result};
use crate::gp::KernelHyper;
use crate::lti::{connect_feedback, ContinuousTf, DiscreteTf};
use crate::spatial::{SpatialRc, SpatialRcConfig, VelocitySource};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantParams {
    pub inertia: f64,
    pub damping: f64,
    pub stiffness: f64,
}

impl Default for PlantParams {
    fn default() -> Self {
        Self {
            inertia: 1.0,
            damping: 1.0,
            stiffness: 1e4,
        }
    }
}

impl PlantParams {
    pub fn validate(&self) -> Result<()> {
        ensure_positive(self.inertia, "plant.J")?;
        ensure_positive(self.damping, "plant.d")?;
        ensure_positive(self.stiffness, "plant.k")?;
        Ok(())
    }

    pub fn transfer_function(&self) -> Result<ContinuousTf> {
        ContinuousTf::mass_spring_damper(self.inertia, self.damping, self.stiffness)
    }
}

/// Which repetitive controllers to simulate next to the plain feedback loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RcVariant {
    None,
    Traditional,
    Spatial,
    #[default]
    Both,
}

impl RcVariant {
    pub fn kinds(self) -> Vec<TraceKind> {
        let mut out = vec![TraceKind::None];
        if matches!(self, Self::Traditional | Self::Both) {
            out.push(TraceKind::Traditional);
        }
        if matches!(self, Self::Spatial | Self::Both) {
            out.push(TraceKind::Spatial);
        }
        out
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Traditional => "traditional",
            Self::Spatial => "spatial",
            Self::Both => "both",
        }
    }
}

impl std::str::FromStr for RcVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "traditional" => Ok(Self::Traditional),
            "spatial" => Ok(Self::Spatial),
            "both" => Ok(Self::Both),
            other => Err(Error::InvalidArgument {
                name: "rc.variant",
                reason: format!("expected none|traditional|spatial|both, got `{other}`"),
            }),
        }
    }
}

/// One simulated closed loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TraceKind {
    None,
    Traditional,
    Spatial,
}

impl TraceKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Traditional => "traditional",
            Self::Spatial => "spatial",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialSettings {
    pub period: f64,
    pub downsample: usize,
    pub sigma_f: f64,
    pub sigma_n: f64,
    pub length_scale: f64,
    pub velocity_source: VelocitySource,
}

impl Default for SpatialSettings {
    fn default() -> Self {
        Self {
            period: TAU,
            downsample: 5,
            sigma_f: 1.0,
            sigma_n: 1e-6,
            length_scale: 0.1,
            velocity_source: VelocitySource::Supplied,
        }
    }
}

impl SpatialSettings {
    pub fn hyper(&self) -> Result<KernelHyper> {
        KernelHyper::new(self.sigma_f, self.sigma_n, self.period, self.length_scale)
    }

    pub fn rc_config(&self, preview: usize, ts: f64) -> Result<SpatialRcConfig> {
        let cfg = SpatialRcConfig {
            period: self.period,
            downsample: self.downsample,
            preview,
            ts,
            hyper: self.hyper()?,
            velocity_source: self.velocity_source,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraditionalSettings {
    /// Memory length in samples.
    pub period_samples: usize,
    pub q: QFilter,
}

impl Default for TraditionalSettings {
    fn default() -> Self {
        Self {
            period_samples: 1717,
            q: QFilter::identity(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Duration {
    /// Run until this many spatial periods are complete.
    Periods(usize),
    Seconds(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PositionModeKind {
    #[default]
    Ideal,
    ClosedLoopTracking,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub plant: PlantParams,
    pub sample_rate_hz: f64,
    pub controller: LoopShapeSpec,
    pub variant: RcVariant,
    pub learning: InversionOptions,
    pub spatial: SpatialSettings,
    pub traditional: TraditionalSettings,
    pub disturbance: DisturbanceMap,
    pub velocity: VelocityProfile,
    pub duration: Duration,
    pub position_mode: PositionModeKind,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            plant: PlantParams::default(),
            sample_rate_hz: 1000.0,
            controller: LoopShapeSpec::with_crossover(50.0),
            variant: RcVariant::Both,
            learning: InversionOptions::default(),
            spatial: SpatialSettings::default(),
            traditional: TraditionalSettings::default(),
            disturbance: DisturbanceMap::case_study(),
            velocity: VelocityProfile::case_study(),
            duration: Duration::Periods(10),
            position_mode: PositionModeKind::Ideal,
        }
    }
}

impl ScenarioConfig {
    pub fn ts(&self) -> f64 {
        1.0 / self.sample_rate_hz
    }

    pub fn validate(&self) -> Result<()> {
        self.plant.validate()?;
        ensure_positive(self.sample_rate_hz, "sim.sample_rate_hz")?;
        self.controller.validate(self.ts())?;
        self.spatial.rc_config(0, self.ts())?;
        if self.traditional.period_samples == 0 {
            return Err(Error::InvalidArgument {
                name: "traditional.period_samples",
                reason: "must be >= 1".into(),
            });
        }
        match self.duration {
            Duration::Periods(n) if n < 2 => Err(Error::InvalidArgument {
                name: "sim.periods",
                reason: format!("need at least 2 spatial periods, got {n}"),
            }),
            Duration::Seconds(s) => ensure_positive(s, "sim.duration_s").map(|_| ()),
            _ => Ok(()),
        }
    }
}

/// Signals of one simulated loop.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub kind: TraceKind,
    pub e: Vec<f64>,
    pub u_fb: Vec<f64>,
    /// Repetitive-control output (zero for the plain loop).
    pub f: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct DesignSummary {
    pub report: DesignReport,
    pub plant: DiscreteTf,
    pub controller: DiscreteTf,
    pub spatial_filter: NonCausalFilter,
    pub traditional_filter: NonCausalFilter,
    /// Largest `|L PS - 1|` up to half the crossover.
    pub spatial_inversion_error: f64,
    /// Largest `|L T - 1|` up to half the crossover.
    pub traditional_inversion_error: f64,
}

#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub ts: f64,
    pub t: Vec<f64>,
    pub p: Vec<f64>,
    pub v: Vec<f64>,
    pub d: Vec<f64>,
    /// Consecutive entries delimit complete spatial periods.
    pub fences: Vec<usize>,
    pub traces: Vec<Trace>,
    pub design: DesignSummary,
    pub spatial_fits: Option<usize>,
}

impl ScenarioResult {
    pub fn samples(&self) -> usize {
        self.t.len()
    }

    pub fn trace(&self, kind: TraceKind) -> Option<&Trace> {
        self.traces.iter().find(|t| t.kind == kind)
    }

    pub fn metrics(&self, kind: TraceKind) -> Result<Vec<PeriodMetric>> {
        let trace = self.trace(kind).ok_or(Error::InvalidArgument {
            name: "variant",
            reason: format!("{} loop was not simulated", kind.name()),
        })?;
        period_norms(&trace.e, &self.fences)
    }
}

/// Per-period metrics of every simulated loop.
pub fn period_metrics(result: &ScenarioResult) -> Result<Vec<(TraceKind, Vec<PeriodMetric>)>> {
    result
        .traces
        .iter()
        .map(|t| Ok((t.kind, period_norms(&t.e, &result.fences)?)))
        .collect()
}

/// Designs the feedback loop and both learning filters for `cfg`.
pub fn design_loops(cfg: &ScenarioConfig) -> Result<DesignSummary> {
    let ts = cfg.ts();
    let plant = cfg.plant.transfer_function()?;
    let fb = design_feedback(&plant, &cfg.controller, ts)?;
    let spatial_filter = learning_filter_spatial(&plant, &fb.controller, ts, &cfg.learning)?;
    let traditional_filter =
        learning_filter_traditional(&plant, &fb.controller, ts, &cfg.learning)?;
    let band = 0.5 * cfg.controller.crossover_hz;
    let ps = fb.plant_tf.process_sensitivity(&fb.controller_tf)?;
    let t = fb.plant_tf.complementary_sensitivity(&fb.controller_tf)?;
    Ok(DesignSummary {
        report: fb.report,
        spatial_inversion_error: inversion_error(&spatial_filter, &ps, band, 500),
        traditional_inversion_error: inversion_error(&traditional_filter, &t, band, 500),
        plant: fb.plant_tf,
        controller: fb.controller_tf,
        spatial_filter,
        traditional_filter,
    })
}

fn diverged(k: usize, signal: &'static str) -> impl FnOnce(Error) -> Error {
    move |err| match err {
        Error::NonFinite { .. } => Error::Diverged {
            sample: k,
            signal,
            last_valid: k.checked_sub(1),
        },
        other => other,
    }
}

/// Runs the scenario: the plain feedback loop plus the selected repetitive
/// controllers, all driven by the same position and disturbance record.
///
/// Per sample, with `r = 0`: `e = -y`, plant input `u_fb + f + d`. The
/// spatial controller adds its feedforward at the plant input; the
/// time-domain controller adds its output at the controller input, so the
/// plant sees `C[e + f] + d`.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioResult> {
    cfg.validate()?;
    let ts = cfg.ts();
    let design = design_loops(cfg)?;
    let period = cfg.spatial.period;

    let mode = match cfg.position_mode {
        PositionModeKind::Ideal => PositionMode::Ideal,
        PositionModeKind::ClosedLoopTracking => {
            let plant = design.plant.to_state_space()?;
            let ctrl = design.controller.to_state_space()?;
            PositionMode::Tracking(connect_feedback(&plant, &ctrl)?.complementary_sensitivity)
        }
    };
    let horizon = match cfg.duration {
        Duration::Periods(count) => Horizon::Periods { count, period },
        Duration::Seconds(s) => Horizon::Samples((s * cfg.sample_rate_hz).round() as usize),
    };
    let pos = generate_position(&cfg.velocity, ts, &mode, horizon)?;
    let n = pos.len();
    let mut fences = period_starts(&pos.position, period);
    if matches!(cfg.duration, Duration::Periods(_)) {
        fences.push(n);
    }
    if fences.len() < 3 {
        return Err(Error::InvalidArgument {
            name: "sim.duration",
            reason: format!(
                "run covers {} complete spatial period(s); at least 2 are needed",
                fences.len().saturating_sub(1)
            ),
        });
    }
    let d: Vec<f64> = pos
        .position
        .iter()
        .map(|&p| cfg.disturbance.eval(p))
        .collect();
    let t: Vec<f64> = (0..n).map(|k| k as f64 * ts).collect();

    let mut traces = Vec::new();
    let mut spatial_fits = None;
    for kind in cfg.variant.kinds() {
        let mut plant = design.plant.to_state_space()?;
        let mut ctrl = design.controller.to_state_space()?;
        let mut e = Vec::with_capacity(n);
        let mut u_fb = Vec::with_capacity(n);
        let mut f = Vec::with_capacity(n);
        match kind {
            TraceKind::None => {
                for k in 0..n {
                    let ek = -plant.output(0.0);
                    let u = ctrl.step(ek).map_err(diverged(k, "controller"))?;
                    plant.step(u + d[k]).map_err(diverged(k, "plant"))?;
                    e.push(ek);
                    u_fb.push(u);
                    f.push(0.0);
                }
            }
            TraceKind::Traditional => {
                let mut rc = RcBuffer::new(
                    cfg.traditional.period_samples,
                    &design.traditional_filter,
                    cfg.traditional.q.clone(),
                )?;
                for k in 0..n {
                    let ek = -plant.output(0.0);
                    let fk = rc.step(ek).map_err(diverged(k, "traditional memory"))?;
                    let u = ctrl.step(ek + fk).map_err(diverged(k, "controller"))?;
                    plant.step(u + d[k]).map_err(diverged(k, "plant"))?;
                    e.push(ek);
                    u_fb.push(u);
                    f.push(fk);
                }
            }
            TraceKind::Spatial => {
                let rc_cfg = cfg.spatial.rc_config(design.spatial_filter.preview(), ts)?;
                let mut rc = SpatialRc::new(rc_cfg)?;
                let mut learn = design.spatial_filter.instantiate();
                for k in 0..n {
                    let p = pos.position[k];
                    rc.sync_position(p)?;
                    let ff = rc.feedforward(p);
                    let ek = -plant.output(0.0);
                    let u = ctrl.step(ek).map_err(diverged(k, "controller"))?;
                    let l = learn.step(ek).map_err(diverged(k, "learning filter"))?;
                    rc.record_observation(l, p, pos.velocity[k])
                        .map_err(diverged(k, "learning signal"))?;
                    plant.step(u + ff + d[k]).map_err(diverged(k, "plant"))?;
                    if !ff.is_finite() {
                        return Err(diverged(k, "feedforward")(Error::NonFinite {
                            what: "feedforward",
                        }));
                    }
                    e.push(ek);
                    u_fb.push(u);
                    f.push(ff);
                }
                spatial_fits = Some(rc.fits_performed());
            }
        }
        traces.push(Trace { kind, e, u_fb, f });
    }

    Ok(ScenarioResult {
        ts,
        t,
        p: pos.position,
        v: pos.velocity,
        d,
        fences,
        traces,
        design,
        spatial_fits,
    })
}
