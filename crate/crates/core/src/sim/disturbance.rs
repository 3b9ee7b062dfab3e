use std::f64::consts::TAU;

use crate::error::{ensure_positive, Error, Result};
use crate::spatial::wrap_position;

/// One term `amplitude * sin(order * 2 pi p / period + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Harmonic {
    pub amplitude: f64,
    /// Cycles per spatial period.
    pub order: f64,
    pub phase: f64,
}

impl Harmonic {
    pub fn sine(amplitude: f64, order: f64) -> Self {
        Self {
            amplitude,
            order,
            phase: 0.0,
        }
    }
}

/// Position-dependent disturbance `d_p(p)` built from harmonics of the
/// spatial period.
#[derive(Debug, Clone, PartialEq)]
pub struct DisturbanceMap {
    period: f64,
    terms: Vec<Harmonic>,
}

impl DisturbanceMap {
    pub fn new(period: f64, terms: Vec<Harmonic>) -> Result<Self> {
        ensure_positive(period, "spatial.period")?;
        if let Some(t) = terms
            .iter()
            .find(|t| !(t.amplitude.is_finite() && t.order.is_finite() && t.phase.is_finite()))
        {
            return Err(Error::InvalidArgument {
                name: "disturbance.harmonics",
                reason: format!("non-finite harmonic term {t:?}"),
            });
        }
        Ok(Self { period, terms })
    }

    /// Five-harmonic cogging-like map over one revolution:
    /// `1.5 sin p + 0.8 sin 3p + 0.6 sin 9p + 0.4 sin 18p + 0.2 sin 27p`.
    pub fn case_study() -> Self {
        let terms = [(1.5, 1.0), (0.8, 3.0), (0.6, 9.0), (0.4, 18.0), (0.2, 27.0)]
            .into_iter()
            .map(|(a, h)| Harmonic::sine(a, h))
            .collect();
        Self { period: TAU, terms }
    }

    pub fn zero(period: f64) -> Result<Self> {
        Self::new(period, Vec::new())
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn terms(&self) -> &[Harmonic] {
        &self.terms
    }

    pub fn is_exactly_periodic(&self) -> bool {
        self.terms.iter().all(|t| t.order.fract() == 0.0)
    }

    /// Sum of absolute amplitudes, a bound on `|d_p|`.
    pub fn amplitude_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.amplitude.abs()).sum()
    }

    pub fn eval(&self, p: f64) -> f64 {
        // integer harmonics are evaluated on the wrapped position so large
        // unwrapped positions do not lose phase accuracy
        let p = if self.is_exactly_periodic() {
            wrap_position(p, self.period)
        } else {
            p
        };
        let scale = TAU / self.period;
        self.terms
            .iter()
            .map(|t| t.amplitude * (t.order * scale * p + t.phase).sin())
            .sum()
    }
}

impl Default for DisturbanceMap {
    fn default() -> Self {
        Self::case_study()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn case_study_values() {
        let d = DisturbanceMap::case_study();
        assert_eq!(d.eval(0.0), 0.0);
        assert!((d.eval(FRAC_PI_2) - 1.1).abs() < 1e-12);
        assert_eq!(d.amplitude_bound(), 3.5);
    }

    #[test]
    fn phase_and_period_scaling() {
        let d = DisturbanceMap::new(
            2.0,
            vec![Harmonic {
                amplitude: 2.0,
                order: 1.0,
                phase: FRAC_PI_2,
            }],
        )
        .unwrap();
        assert!((d.eval(0.0) - 2.0).abs() < 1e-15);
        assert!((d.eval(1.0) + 2.0).abs() < 1e-15);
        assert!((d.eval(5.0) - d.eval(1.0)).abs() < 1e-12);
    }

    #[test]
    fn fractional_orders_are_not_wrapped() {
        let d = DisturbanceMap::new(TAU, vec![Harmonic::sine(1.0, 0.5)]).unwrap();
        assert!(!d.is_exactly_periodic());
        assert!((d.eval(TAU + PI) - (1.5 * PI).sin()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_terms() {
        assert!(DisturbanceMap::new(TAU, vec![Harmonic::sine(f64::NAN, 1.0)]).is_err());
        assert!(DisturbanceMap::new(0.0, vec![]).is_err());
    }
}
