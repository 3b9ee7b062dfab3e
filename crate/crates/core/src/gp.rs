//! Gaussian-process regression over a periodic input with the periodic
//! (exp-sine-squared) kernel.

use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{ensure_positive, Error, Result};

/// Jitter added to the noise variance, in order, when the Cholesky
/// factorization of the regularized Gram matrix fails.
pub const JITTER_LADDER: [f64; 3] = [1e-10, 1e-8, 1e-6];

/// Hyper-parameters of the periodic kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelHyper {
    pub sigma_f: f64,
    pub sigma_n: f64,
    /// Period of the kernel in position units.
    pub period: f64,
    pub length_scale: f64,
}

impl KernelHyper {
    pub fn new(sigma_f: f64, sigma_n: f64, period: f64, length_scale: f64) -> Result<Self> {
        let h = Self {
            sigma_f,
            sigma_n,
            period,
            length_scale,
        };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive(self.sigma_f, "kernel.sigma_f")?;
        ensure_positive(self.period, "kernel.period")?;
        ensure_positive(self.length_scale, "kernel.length_scale")?;
        if !(self.sigma_n.is_finite() && self.sigma_n >= 0.0) {
            return Err(Error::InvalidArgument {
                name: "kernel.sigma_n",
                reason: format!("must be finite and >= 0, got {}", self.sigma_n),
            });
        }
        Ok(())
    }

    pub fn signal_variance(&self) -> f64 {
        self.sigma_f * self.sigma_f
    }

    pub fn noise_variance(&self) -> f64 {
        self.sigma_n * self.sigma_n
    }
}

/// `sigma_f^2 exp(-2 sin^2(pi (p - q) / period) / l^2)`.
#[inline]
pub fn periodic_kernel(p: f64, q: f64, hyper: &KernelHyper) -> f64 {
    let s = (PI * (p - q) / hyper.period).sin();
    hyper.signal_variance() * (-2.0 * s * s / (hyper.length_scale * hyper.length_scale)).exp()
}

/// Gram matrix `K[i][j] = k(x_i, x_j)` without the noise term.
pub fn gram(positions: &[f64], hyper: &KernelHyper) -> DMatrix<f64> {
    let n = positions.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = periodic_kernel(positions[i], positions[j], hyper);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

/// Fitted GP: training data plus the weight vector
/// `alpha = (K + sigma_n^2 I)^{-1} y`.
#[derive(Debug, Clone)]
pub struct GpModel {
    positions: Vec<f64>,
    targets: Vec<f64>,
    alpha: Vec<f64>,
    hyper: KernelHyper,
    regularization: f64,
    factor: Option<Cholesky<f64, Dyn>>,
}

impl GpModel {
    pub fn empty(hyper: KernelHyper) -> Self {
        Self {
            positions: Vec::new(),
            targets: Vec::new(),
            alpha: Vec::new(),
            hyper,
            regularization: hyper.noise_variance(),
            factor: None,
        }
    }

    pub fn fit(positions: &[f64], targets: &[f64], hyper: KernelHyper) -> Result<Self> {
        hyper.validate()?;
        if positions.len() != targets.len() {
            return Err(Error::LengthMismatch {
                positions: positions.len(),
                targets: targets.len(),
            });
        }
        if positions.iter().chain(targets).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "training data",
            });
        }
        let n = positions.len();
        if n == 0 {
            return Ok(Self::empty(hyper));
        }
        let k = gram(positions, &hyper);
        let base = hyper.noise_variance();
        let y = DVector::from_column_slice(targets);
        for jitter in std::iter::once(0.0).chain(JITTER_LADDER) {
            let reg = base + jitter;
            let mut m = k.clone();
            for i in 0..n {
                m[(i, i)] += reg;
            }
            if let Some(chol) = m.cholesky() {
                let alpha = chol.solve(&y);
                if alpha.iter().all(|a| a.is_finite()) {
                    return Ok(Self {
                        positions: positions.to_vec(),
                        targets: targets.to_vec(),
                        alpha: alpha.as_slice().to_vec(),
                        hyper,
                        regularization: reg,
                        factor: Some(chol),
                    });
                }
            }
        }
        Err(Error::IllConditionedGram {
            n,
            jitter: JITTER_LADDER[JITTER_LADDER.len() - 1],
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn hyper(&self) -> &KernelHyper {
        &self.hyper
    }

    /// Diagonal regularization actually used: `sigma_n^2` plus any jitter.
    pub fn regularization(&self) -> f64 {
        self.regularization
    }

    /// `sum_i alpha_i k(p_i, p)`; zero for the empty model.
    pub fn posterior_mean(&self, p: f64) -> f64 {
        self.positions
            .iter()
            .zip(&self.alpha)
            .map(|(&pi, &ai)| ai * periodic_kernel(pi, p, &self.hyper))
            .sum()
    }

    /// `k(p, p) - k_*^T (K + sigma_n^2 I)^{-1} k_*`, clamped to `[0, sigma_f^2]`.
    pub fn posterior_variance(&self, p: f64) -> f64 {
        let prior = self.hyper.signal_variance();
        let Some(chol) = &self.factor else {
            return prior;
        };
        let ks = DVector::from_iterator(
            self.positions.len(),
            self.positions
                .iter()
                .map(|&pi| periodic_kernel(pi, p, &self.hyper)),
        );
        let v = chol.l().solve_lower_triangular(&ks).unwrap_or(ks);
        (prior - v.norm_squared()).clamp(0.0, prior)
    }
}
