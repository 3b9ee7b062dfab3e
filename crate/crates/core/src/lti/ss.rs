use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::poly;
use super::tf::DiscreteTf;
use crate::error::{ensure_finite, ensure_positive, Error, Result};

/// Discrete-time SISO state-space system with its own state vector.
///
/// `x(k+1) = A x(k) + B u(k)`, `y(k) = C x(k) + D u(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteStateSpace {
    a: DMatrix<f64>,
    b: DVector<f64>,
    c: DVector<f64>,
    d: f64,
    ts: f64,
    x: DVector<f64>,
    scratch: DVector<f64>,
}

impl DiscreteStateSpace {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, c: DVector<f64>, d: f64, ts: f64) -> Result<Self> {
        ensure_positive(ts, "ts")?;
        let n = a.nrows();
        if a.ncols() != n || b.len() != n || c.len() != n {
            return Err(Error::InvalidSystem(format!(
                "inconsistent dimensions: A {}x{}, B {}, C {}",
                a.nrows(),
                a.ncols(),
                b.len(),
                c.len()
            )));
        }
        if a.iter()
            .chain(b.iter())
            .chain(c.iter())
            .any(|v| !v.is_finite())
            || !d.is_finite()
        {
            return Err(Error::InvalidSystem("non-finite matrix entry".into()));
        }
        Ok(Self {
            a,
            b,
            c,
            d,
            ts,
            x: DVector::zeros(n),
            scratch: DVector::zeros(n),
        })
    }

    pub fn gain(k: f64, ts: f64) -> Result<Self> {
        Self::new(
            DMatrix::zeros(0, 0),
            DVector::zeros(0),
            DVector::zeros(0),
            k,
            ts,
        )
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn c(&self) -> &DVector<f64> {
        &self.c
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn ts(&self) -> f64 {
        self.ts
    }

    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    pub fn state(&self) -> &DVector<f64> {
        &self.x
    }

    pub fn reset(&mut self) {
        self.x.fill(0.0);
    }

    /// Output `C x(k) + D u` for the current state, without advancing.
    pub fn output(&self, u: f64) -> f64 {
        self.c.dot(&self.x) + self.d * u
    }

    /// Advances one sample and returns `y(k) = C x(k) + D u(k)`.
    pub fn step(&mut self, u: f64) -> Result<f64> {
        ensure_finite(u, "input")?;
        let y = self.output(u);
        self.scratch.gemv(1.0, &self.a, &self.x, 0.0);
        self.scratch.axpy(u, &self.b, 1.0);
        std::mem::swap(&mut self.x, &mut self.scratch);
        if !self.x.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite { what: "state" });
        }
        ensure_finite(y, "output")
    }

    pub fn simulate(&mut self, input: &[f64]) -> Result<Vec<f64>> {
        input.iter().map(|&u| self.step(u)).collect()
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        poly::eigenvalues(&self.a)
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// `C (zI - A)^{-1} B + D` at the complex point `z`.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let n = self.order();
        if n == 0 {
            return Complex64::new(self.d, 0.0);
        }
        let m = DMatrix::<Complex64>::from_fn(n, n, |i, j| {
            let diag = if i == j { z } else { Complex64::new(0.0, 0.0) };
            diag - self.a[(i, j)]
        });
        let rhs = DVector::<Complex64>::from_fn(n, |i, _| Complex64::new(self.b[i], 0.0));
        match m.lu().solve(&rhs) {
            Some(x) => {
                x.iter()
                    .zip(self.c.iter())
                    .map(|(xi, &ci)| xi * ci)
                    .sum::<Complex64>()
                    + self.d
            }
            None => Complex64::new(f64::INFINITY, 0.0),
        }
    }

    pub fn eval_hz(&self, freq_hz: f64) -> Complex64 {
        self.eval(Complex64::from_polar(1.0, 2.0 * PI * freq_hz * self.ts))
    }

    pub fn dc_gain(&self) -> f64 {
        self.eval(Complex64::new(1.0, 0.0)).re
    }

    /// Transfer-function form. The denominator is the characteristic
    /// polynomial of A; the numerator follows from the Markov parameters.
    pub fn to_tf(&self) -> Result<DiscreteTf> {
        let n = self.order();
        let den = poly::charpoly(&self.a);
        // h_0 = D, h_k = C A^{k-1} B
        let mut markov = Vec::with_capacity(n + 1);
        markov.push(self.d);
        let mut v = self.b.clone();
        for _ in 0..n {
            markov.push(self.c.dot(&v));
            v = &self.a * v;
        }
        let num: Vec<f64> = (0..=n)
            .map(|i| (0..=i).map(|j| den[j] * markov[i - j]).sum())
            .collect();
        DiscreteTf::new(&num, &den, self.ts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_state_zero_input() {
        let mut sys = DiscreteTf::new(&[1.0, 0.5], &[1.0, -0.3, 0.1], 1e-3)
            .unwrap()
            .to_state_space()
            .unwrap();
        assert_eq!(sys.step(0.0).unwrap(), 0.0);
    }

    #[test]
    fn pure_gain_impulse() {
        let mut g = DiscreteStateSpace::gain(2.0, 1e-3).unwrap();
        let y = g.simulate(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(y, vec![2.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn rejects_non_finite_input() {
        let mut g = DiscreteStateSpace::gain(1.0, 1e-3).unwrap();
        assert_eq!(g.step(f64::NAN), Err(Error::NonFinite { what: "input" }));
    }

    #[test]
    fn divergence_is_reported() {
        let mut sys = DiscreteTf::new(&[1.0], &[1.0, -1e200], 1.0)
            .unwrap()
            .to_state_space()
            .unwrap();
        let mut hit = false;
        for _ in 0..10 {
            if sys.step(1.0).is_err() {
                hit = true;
                break;
            }
        }
        assert!(hit);
    }

    #[test]
    fn tf_round_trip() {
        let tf = DiscreteTf::new(&[0.3, -0.1, 0.05], &[1.0, -1.2, 0.5], 0.01).unwrap();
        let back = tf.to_state_space().unwrap().to_tf().unwrap();
        for (a, b) in tf.num().iter().zip(back.num()) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
        for (a, b) in tf.den().iter().zip(back.den()) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn eval_matches_tf() {
        let tf = DiscreteTf::new(&[0.3, -0.1], &[1.0, -1.2, 0.5], 0.01).unwrap();
        let ss = tf.to_state_space().unwrap();
        for f in [0.5, 10.0, 40.0] {
            let a = tf.eval_hz(f);
            let b = ss.eval_hz(f);
            assert_relative_eq!(a.re, b.re, epsilon = 1e-12);
            assert_relative_eq!(a.im, b.im, epsilon = 1e-12);
        }
    }
}
