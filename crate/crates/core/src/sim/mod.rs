//! Case-study harness: disturbance map, velocity profile and position
//! generation, closed-loop simulation of all controller variants, and
//! per-period error metrics.

mod disturbance;
mod metrics;
mod profile;
mod scenario;

pub use disturbance::{DisturbanceMap, Harmonic};
pub use metrics::{period_norms, period_starts, PeriodMetric};
pub use profile::{
    generate_position, Horizon, PositionMode, PositionTrace, Segment, VelocityProfile,
    CHANGED_VELOCITY, MAX_SAMPLES, NOMINAL_VELOCITY, RAMP_SECONDS,
};
pub use scenario::{
    design_loops, period_metrics, run_scenario, DesignSummary, Duration, PlantParams,
    PositionModeKind, RcVariant, ScenarioConfig, ScenarioResult, SpatialSettings, Trace, TraceKind,
    TraditionalSettings,
};
