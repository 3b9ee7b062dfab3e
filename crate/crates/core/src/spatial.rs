//! Position-domain repetitive control with a Gaussian-process memory.
//!
//! Learning-signal samples are tagged with their wrapped position and
//! collected per spatial period. At each period boundary the collected
//! buffer is fitted and the resulting model becomes the memory for the
//! next period: it drives the feedforward `u_ff(k) = mu(p*(k))` and is
//! added onto every new observation, so the stored targets accumulate the
//! disturbance estimate across periods.

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::gp::{GpModel, KernelHyper};

/// Maps `p` into `[0, period)`.
pub fn wrap_position(p: f64, period: f64) -> f64 {
    let r = p.rem_euclid(period);
    // rem_euclid can round up to `period` for tiny negative inputs
    if r >= period {
        0.0
    } else {
        r
    }
}

/// Where the velocity used for the preview shift comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VelocitySource {
    /// Velocity supplied by the caller with every observation.
    #[default]
    Supplied,
    /// `(p(k) - p(k-1)) / T_s`, zero on the first sample.
    BackwardDifference,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialRcConfig {
    pub period: f64,
    /// Every `downsample`-th observation of a period is stored.
    pub downsample: usize,
    /// Preview samples of the learning filter.
    pub preview: usize,
    pub ts: f64,
    pub hyper: KernelHyper,
    pub velocity_source: VelocitySource,
}

impl SpatialRcConfig {
    pub fn validate(&self) -> Result<()> {
        ensure_positive(self.period, "spatial.period")?;
        ensure_positive(self.ts, "ts")?;
        if self.downsample == 0 {
            return Err(Error::InvalidArgument {
                name: "spatial.downsample",
                reason: "must be >= 1".into(),
            });
        }
        self.hyper.validate()?;
        if (self.hyper.period - self.period).abs() > 1e-12 * self.period {
            return Err(Error::InvalidArgument {
                name: "kernel.period",
                reason: format!(
                    "kernel period {} must equal the spatial period {}",
                    self.hyper.period, self.period
                ),
            });
        }
        Ok(())
    }
}

/// Wrapped position shifted back by `n_l` velocity samples:
/// `mod(p - n_l v T_s, period)`.
pub fn preview_position(p: f64, velocity: f64, cfg: &SpatialRcConfig) -> f64 {
    wrap_position(p - cfg.preview as f64 * velocity * cfg.ts, cfg.period)
}

#[derive(Debug, Clone)]
pub struct SpatialRc {
    cfg: SpatialRcConfig,
    train_positions: Vec<f64>,
    train_targets: Vec<f64>,
    previous: GpModel,
    /// Calls to `record_observation` since the last boundary.
    sample_in_period: usize,
    periods_completed: usize,
    fits: usize,
    origin: Option<f64>,
    last_position: Option<f64>,
    last_wrapped: f64,
}

impl SpatialRc {
    pub fn new(cfg: SpatialRcConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            train_positions: Vec::new(),
            train_targets: Vec::new(),
            previous: GpModel::empty(cfg.hyper),
            sample_in_period: 0,
            periods_completed: 0,
            fits: 0,
            origin: None,
            last_position: None,
            last_wrapped: 0.0,
        })
    }

    pub fn config(&self) -> &SpatialRcConfig {
        &self.cfg
    }

    pub fn buffer(&self) -> (&[f64], &[f64]) {
        (&self.train_positions, &self.train_targets)
    }

    pub fn previous_model(&self) -> &GpModel {
        &self.previous
    }

    pub fn periods_completed(&self) -> usize {
        self.periods_completed
    }

    pub fn fits_performed(&self) -> usize {
        self.fits
    }

    pub fn last_wrapped_position(&self) -> f64 {
        self.last_wrapped
    }

    /// Processes period boundaries up to (unwrapped) position `p` and
    /// returns how many were crossed. A boundary is the first sample whose
    /// travel from the starting position reaches the next multiple of the
    /// period, in either direction.
    pub fn sync_position(&mut self, p: f64) -> Result<usize> {
        ensure_finite(p, "position")?;
        let origin = *self.origin.get_or_insert(p);
        let travelled = (p - origin).abs();
        let mut crossed = 0;
        while travelled >= (self.periods_completed + 1) as f64 * self.cfg.period {
            self.advance_period()?;
            crossed += 1;
        }
        self.last_wrapped = wrap_position(p, self.cfg.period);
        Ok(crossed)
    }

    /// Fits the buffer of the period just completed; the fit becomes the
    /// memory for the next period and the buffer is cleared.
    pub fn advance_period(&mut self) -> Result<()> {
        self.previous = GpModel::fit(&self.train_positions, &self.train_targets, self.cfg.hyper)?;
        self.fits += 1;
        self.train_positions.clear();
        self.train_targets.clear();
        self.sample_in_period = 0;
        self.periods_completed += 1;
        Ok(())
    }

    /// Feedforward from the previous-period model at the wrapped position.
    pub fn feedforward(&self, p: f64) -> f64 {
        self.previous
            .posterior_mean(wrap_position(p, self.cfg.period))
    }

    /// Records one learning-signal sample. Returns the stored
    /// `(position, target)` pair on calls selected by the downsampling rule.
    pub fn record_observation(
        &mut self,
        learning: f64,
        p: f64,
        velocity: f64,
    ) -> Result<Option<(f64, f64)>> {
        ensure_finite(learning, "learning signal")?;
        ensure_finite(p, "position")?;
        let v = match self.cfg.velocity_source {
            VelocitySource::Supplied => ensure_finite(velocity, "velocity")?,
            VelocitySource::BackwardDifference => match self.last_position {
                Some(prev) => (p - prev) / self.cfg.ts,
                None => 0.0,
            },
        };
        self.last_position = Some(p);
        let selected = self.sample_in_period.is_multiple_of(self.cfg.downsample);
        self.sample_in_period += 1;
        if !selected {
            return Ok(None);
        }
        let position = preview_position(p, v, &self.cfg);
        let target = learning + self.previous.posterior_mean(position);
        self.train_positions.push(position);
        self.train_targets.push(target);
        Ok(Some((position, target)))
    }
}
