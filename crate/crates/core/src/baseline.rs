//! Time-domain repetitive controller with a fixed-length memory loop.
//!
//! The memory `w(j) = w(j - N) + L[e](j)` is filled through the learning
//! filter; its preview is realized by writing each learning sample `n_l`
//! slots back in the delay line, which keeps the total loop delay at `N`.
//! The output is `f(k) = Q[w](k - N)` with a symmetric FIR `Q`.

use crate::design::NonCausalFilter;
use crate::error::{ensure_finite, Error, Result};
use crate::lti::DiscreteStateSpace;

/// Symmetric (zero-phase) FIR robustness filter.
#[derive(Debug, Clone, PartialEq)]
pub struct QFilter {
    taps: Vec<f64>,
}

impl QFilter {
    pub fn identity() -> Self {
        Self { taps: vec![1.0] }
    }

    /// Taps must be finite, of odd length and symmetric about the centre.
    pub fn new(taps: Vec<f64>) -> Result<Self> {
        let bad = |reason: &str| Error::InvalidArgument {
            name: "traditional.q_taps",
            reason: reason.into(),
        };
        if taps.is_empty() || taps.len().is_multiple_of(2) {
            return Err(bad("need an odd, non-zero number of taps"));
        }
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(bad("taps must be finite"));
        }
        let n = taps.len();
        if (0..n / 2).any(|i| taps[i] != taps[n - 1 - i]) {
            return Err(bad("taps must be symmetric for zero phase"));
        }
        Ok(Self { taps })
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn half_width(&self) -> usize {
        self.taps.len() / 2
    }

    pub fn is_identity(&self) -> bool {
        self.taps == [1.0]
    }
}

impl Default for QFilter {
    fn default() -> Self {
        Self::identity()
    }
}

#[derive(Debug, Clone)]
pub struct RcBuffer {
    period: usize,
    preview: usize,
    learning: DiscreteStateSpace,
    q: QFilter,
    ring: Vec<f64>,
    k: usize,
}

impl RcBuffer {
    /// `period` is the memory length `N` in samples. The filter preview plus
    /// the half width of `q` must not exceed `N`, otherwise the output would
    /// need samples that are not learned yet.
    pub fn new(period: usize, learning: &NonCausalFilter, q: QFilter) -> Result<Self> {
        let preview = learning.preview();
        if period == 0 {
            return Err(Error::InvalidArgument {
                name: "traditional.period_samples",
                reason: "must be >= 1".into(),
            });
        }
        if preview + q.half_width() > period {
            return Err(Error::InvalidArgument {
                name: "traditional.period_samples",
                reason: format!(
                    "memory of {period} samples is shorter than preview {preview} plus Q half width {}",
                    q.half_width()
                ),
            });
        }
        let capacity = period + q.half_width() + preview + 1;
        Ok(Self {
            period,
            preview,
            learning: learning.instantiate(),
            q,
            ring: vec![0.0; capacity],
            k: 0,
        })
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn preview(&self) -> usize {
        self.preview
    }

    /// Samples processed so far.
    pub fn samples(&self) -> usize {
        self.k
    }

    fn w(&self, j: isize) -> f64 {
        if j < 0 {
            0.0
        } else {
            self.ring[j as usize % self.ring.len()]
        }
    }

    /// Consumes one error sample and returns `f(k)`, which depends on the
    /// error only up to sample `k - N + half_width(Q)`.
    pub fn step(&mut self, e: f64) -> Result<f64> {
        ensure_finite(e, "error")?;
        let k = self.k as isize;
        let n = self.period as isize;
        let m = self.q.half_width() as isize;
        let f = self
            .q
            .taps
            .iter()
            .enumerate()
            .map(|(i, &qi)| qi * self.w(k - n - m + i as isize))
            .sum::<f64>();
        let l = self.learning.step(e)?;
        if let Some(j) = self.k.checked_sub(self.preview) {
            let j = j as isize;
            let updated = self.w(j - n) + l;
            let len = self.ring.len();
            self.ring[j as usize % len] = updated;
        }
        self.k += 1;
        ensure_finite(f, "repetitive output")
    }

    pub fn reset(&mut self) {
        self.ring.fill(0.0);
        self.learning.reset();
        self.k = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::DiscreteTf;

    fn unit_filter(preview: usize) -> NonCausalFilter {
        NonCausalFilter::new(DiscreteTf::gain(1.0, 1e-3).unwrap(), preview).unwrap()
    }

    #[test]
    fn zero_error_zero_output() {
        let mut rc = RcBuffer::new(7, &unit_filter(0), QFilter::identity()).unwrap();
        for _ in 0..50 {
            assert_eq!(rc.step(0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn impulse_returns_after_one_period() {
        let mut rc = RcBuffer::new(10, &unit_filter(0), QFilter::identity()).unwrap();
        let out: Vec<f64> = (0..25)
            .map(|k| rc.step(if k == 0 { 1.0 } else { 0.0 }).unwrap())
            .collect();
        let first = out.iter().position(|&f| f != 0.0).unwrap();
        assert_eq!(first, 10);
        assert_eq!(out[20], 1.0);
    }

    #[test]
    fn preview_shortens_the_path_of_the_learning_sample() {
        // with L = z^2 the impulse at k = 2 is learned as w(0)
        let mut rc = RcBuffer::new(10, &unit_filter(2), QFilter::identity()).unwrap();
        let out: Vec<f64> = (0..15)
            .map(|k| rc.step(if k == 2 { 1.0 } else { 0.0 }).unwrap())
            .collect();
        assert_eq!(out.iter().position(|&f| f != 0.0), Some(10));
    }

    #[test]
    fn q_filter_smears_symmetrically() {
        let q = QFilter::new(vec![0.25, 0.5, 0.25]).unwrap();
        let mut rc = RcBuffer::new(10, &unit_filter(0), q).unwrap();
        let out: Vec<f64> = (0..16)
            .map(|k| rc.step(if k == 3 { 1.0 } else { 0.0 }).unwrap())
            .collect();
        assert_eq!(&out[11..16], &[0.0, 0.25, 0.5, 0.25, 0.0]);
    }

    #[test]
    fn rejects_short_memory() {
        assert!(RcBuffer::new(2, &unit_filter(3), QFilter::identity()).is_err());
        assert!(RcBuffer::new(0, &unit_filter(0), QFilter::identity()).is_err());
    }

    #[test]
    fn rejects_bad_q() {
        assert!(QFilter::new(vec![0.5, 0.5]).is_err());
        assert!(QFilter::new(vec![0.2, 0.5, 0.3]).is_err());
        assert!(QFilter::new(vec![]).is_err());
    }

    #[test]
    fn rejects_non_finite_error() {
        let mut rc = RcBuffer::new(3, &unit_filter(0), QFilter::identity()).unwrap();
        assert!(rc.step(f64::INFINITY).is_err());
    }
}
