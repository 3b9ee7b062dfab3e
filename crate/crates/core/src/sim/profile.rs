use std::f64::consts::TAU;

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::lti::DiscreteStateSpace;

/// Linear velocity ramp from `start` to `end` over `duration` seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub duration: f64,
    pub start: f64,
    pub end: f64,
}

impl Segment {
    pub fn constant(duration: f64, velocity: f64) -> Self {
        Self {
            duration,
            start: velocity,
            end: velocity,
        }
    }

    pub fn ramp(duration: f64, start: f64, end: f64) -> Self {
        Self {
            duration,
            start,
            end,
        }
    }
}

/// Piecewise-linear velocity in rad/s. The final velocity is held after the
/// last segment.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityProfile {
    segments: Vec<Segment>,
}

pub const NOMINAL_VELOCITY: f64 = 3.6593;
pub const CHANGED_VELOCITY: f64 = 5.2;
pub const RAMP_SECONDS: f64 = 0.5;

impl VelocityProfile {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidArgument {
                name: "velocity.segments",
                reason: "profile needs at least one segment".into(),
            });
        }
        for s in &segments {
            ensure_positive(s.duration, "velocity.duration")?;
            ensure_finite(s.start, "velocity")?;
            ensure_finite(s.end, "velocity")?;
        }
        Ok(Self { segments })
    }

    pub fn constant(velocity: f64) -> Result<Self> {
        Self::new(vec![Segment::constant(1.0, velocity)])
    }

    /// Nominal velocity for `periods_before_change` revolutions, then a
    /// linear ramp to `changed` held until the end of the run.
    pub fn velocity_step(
        nominal: f64,
        periods_before_change: f64,
        period: f64,
        changed: f64,
        ramp_seconds: f64,
    ) -> Result<Self> {
        ensure_positive(nominal, "velocity.nominal")?;
        let hold = periods_before_change * period / nominal;
        Self::new(vec![
            Segment::constant(hold, nominal),
            Segment::ramp(ramp_seconds, nominal, changed),
        ])
    }

    /// Three revolutions at the nominal speed followed by a half-second
    /// ramp to 5.2 rad/s.
    pub fn case_study() -> Self {
        Self::velocity_step(NOMINAL_VELOCITY, 3.0, TAU, CHANGED_VELOCITY, RAMP_SECONDS)
            .expect("case-study profile is valid")
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    pub fn velocity_at(&self, t: f64) -> f64 {
        let mut start = 0.0;
        for s in &self.segments {
            if t < start + s.duration {
                let frac = ((t - start) / s.duration).max(0.0);
                return s.start + (s.end - s.start) * frac;
            }
            start += s.duration;
        }
        self.segments[self.segments.len() - 1].end
    }
}

impl Default for VelocityProfile {
    fn default() -> Self {
        Self::case_study()
    }
}

/// How far to generate the position record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    Samples(usize),
    /// Stop before the first sample whose travel reaches `count * period`.
    Periods {
        count: usize,
        period: f64,
    },
}

/// How the position that drives the disturbance is produced.
#[derive(Debug, Clone)]
pub enum PositionMode {
    /// Trapezoidal integration of the velocity profile.
    Ideal,
    /// The integrated profile is fed as reference through the given closed
    /// loop (normalized to unit DC gain) and its output is the position.
    Tracking(DiscreteStateSpace),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PositionTrace {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
}

impl PositionTrace {
    pub fn len(&self) -> usize {
        self.position.len()
    }

    pub fn is_empty(&self) -> bool {
        self.position.is_empty()
    }
}

/// Safety cap for [`Horizon::Periods`] so a stalled profile cannot loop
/// forever.
pub const MAX_SAMPLES: usize = 5_000_000;

pub fn generate_position(
    profile: &VelocityProfile,
    ts: f64,
    mode: &PositionMode,
    horizon: Horizon,
) -> Result<PositionTrace> {
    ensure_positive(ts, "ts")?;
    let (cap, target) = match horizon {
        Horizon::Samples(n) => (n, None),
        Horizon::Periods { count, period } => {
            ensure_positive(period, "spatial.period")?;
            (MAX_SAMPLES, Some(count as f64 * period))
        }
    };
    let mut tracker = match mode {
        PositionMode::Ideal => None,
        PositionMode::Tracking(sys) => {
            let dc = sys.dc_gain();
            if !(dc.is_finite() && dc.abs() > 1e-12) {
                return Err(Error::InvalidArgument {
                    name: "sim.position_mode",
                    reason: format!("tracking loop has unusable DC gain {dc}"),
                });
            }
            let mut sys = sys.clone();
            sys.reset();
            Some((sys, 1.0 / dc))
        }
    };
    let mut trace = PositionTrace::default();
    let mut ideal = 0.0;
    let mut prev_v = profile.velocity_at(0.0);
    for k in 0..cap {
        let v = profile.velocity_at(k as f64 * ts);
        if k > 0 {
            ideal += 0.5 * ts * (v + prev_v);
        }
        prev_v = v;
        let p = match tracker.as_mut() {
            None => ideal,
            Some((sys, norm)) => sys.step(ideal * *norm)?,
        };
        if let Some(limit) = target {
            if p.abs() >= limit {
                return Ok(trace);
            }
        }
        trace.position.push(p);
        trace.velocity.push(v);
    }
    if target.is_some() {
        return Err(Error::InvalidArgument {
            name: "velocity",
            reason: format!("profile does not complete the requested periods within {cap} samples"),
        });
    }
    Ok(trace)
}
