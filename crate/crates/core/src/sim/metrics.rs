use crate::error::{Error, Result};

/// Normalized error norm of one spatial period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodMetric {
    /// 1-based period index.
    pub period: usize,
    pub start: usize,
    /// Exclusive.
    pub end: usize,
    /// `||e_j||_2 / N_j`.
    pub norm: f64,
}

impl PeriodMetric {
    pub fn samples(&self) -> usize {
        self.end - self.start
    }
}

/// Start index of every period: `0`, then the first sample whose travel
/// from `position[0]` reaches `j * period` for `j = 1, 2, ...`.
pub fn period_starts(position: &[f64], period: f64) -> Vec<usize> {
    let Some(&origin) = position.first() else {
        return Vec::new();
    };
    let mut starts = vec![0];
    for (k, &p) in position.iter().enumerate() {
        while (p - origin).abs() >= starts.len() as f64 * period {
            starts.push(k);
        }
    }
    starts
}

/// Metrics for the consecutive index ranges delimited by `fences`.
pub fn period_norms(e: &[f64], fences: &[usize]) -> Result<Vec<PeriodMetric>> {
    if fences.len() < 2 {
        return Err(Error::NoCompletePeriod);
    }
    if fences.windows(2).any(|w| w[1] <= w[0]) || fences[fences.len() - 1] > e.len() {
        return Err(Error::InvalidArgument {
            name: "fences",
            reason: "period fences must be strictly increasing and within the record".into(),
        });
    }
    Ok(fences
        .windows(2)
        .enumerate()
        .map(|(j, w)| {
            let seg = &e[w[0]..w[1]];
            let norm = seg.iter().map(|x| x * x).sum::<f64>().sqrt() / seg.len() as f64;
            PeriodMetric {
                period: j + 1,
                start: w[0],
                end: w[1],
                norm,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_error() {
        let m = period_norms(&[0.0; 10], &[0, 5, 10]).unwrap();
        assert!(m.iter().all(|m| m.norm == 0.0));
    }

    #[test]
    fn unit_error() {
        let m = period_norms(&[1.0; 16], &[0, 16]).unwrap();
        assert_eq!(m[0].norm, 0.25);
    }

    #[test]
    fn needs_a_complete_period() {
        assert_eq!(period_norms(&[1.0; 4], &[0]), Err(Error::NoCompletePeriod));
        assert!(period_norms(&[1.0; 4], &[0, 8]).is_err());
    }

    #[test]
    fn starts_from_travel() {
        let p: Vec<f64> = (0..30).map(|k| 0.25 * k as f64).collect();
        assert_eq!(period_starts(&p, 2.0), vec![0, 8, 16, 24]);
        let back: Vec<f64> = p.iter().map(|x| -x).collect();
        assert_eq!(period_starts(&back, 2.0), vec![0, 8, 16, 24]);
    }
}
