use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::poly;
use super::ss::DiscreteStateSpace;
use crate::error::{ensure_positive, Error, Result};

/// Validated, trimmed numerator/denominator pair shared by both domains.
fn validate_rational(num: &[f64], den: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if num.iter().chain(den).any(|c| !c.is_finite()) {
        return Err(Error::InvalidSystem("non-finite coefficient".into()));
    }
    let den = poly::trim(den);
    if den.is_empty() {
        return Err(Error::InvalidSystem(
            "denominator is identically zero".into(),
        ));
    }
    let mut num = poly::trim(num);
    if num.is_empty() {
        num = vec![0.0];
    }
    if num.len() > den.len() {
        return Err(Error::InvalidSystem(format!(
            "improper transfer function: numerator degree {} > denominator degree {}",
            num.len() - 1,
            den.len() - 1
        )));
    }
    Ok((num, den))
}

/// Controllable canonical realization `(A, B, C, D)` of `num/den`.
pub(crate) fn canonical_realization(
    num: &[f64],
    den: &[f64],
) -> (DMatrix<f64>, DVector<f64>, DVector<f64>, f64) {
    let n = den.len() - 1;
    let lead = den[0];
    let a: Vec<f64> = den.iter().map(|c| c / lead).collect();
    let b: Vec<f64> = poly::pad(num, n + 1).iter().map(|c| c / lead).collect();
    let d = b[0];
    let mut am = DMatrix::zeros(n, n);
    let mut bm = DVector::zeros(n);
    let mut cm = DVector::zeros(n);
    if n > 0 {
        for j in 0..n {
            am[(0, j)] = -a[j + 1];
            cm[j] = b[j + 1] - d * a[j + 1];
        }
        for i in 1..n {
            am[(i, i - 1)] = 1.0;
        }
        bm[0] = 1.0;
    }
    (am, bm, cm, d)
}

/// Continuous-time SISO transfer function, coefficients in descending powers of s.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousTf {
    num: Vec<f64>,
    den: Vec<f64>,
}

impl ContinuousTf {
    pub fn new(num: &[f64], den: &[f64]) -> Result<Self> {
        let (num, den) = validate_rational(num, den)?;
        Ok(Self { num, den })
    }

    /// Mass-spring-damper `1 / (J s^2 + d s + k)`.
    pub fn mass_spring_damper(inertia: f64, damping: f64, stiffness: f64) -> Result<Self> {
        ensure_positive(inertia, "plant.J")?;
        if !(damping.is_finite() && damping >= 0.0) {
            return Err(Error::InvalidArgument {
                name: "plant.d",
                reason: format!("must be finite and >= 0, got {damping}"),
            });
        }
        if !(stiffness.is_finite() && stiffness >= 0.0) {
            return Err(Error::InvalidArgument {
                name: "plant.k",
                reason: format!("must be finite and >= 0, got {stiffness}"),
            });
        }
        Self::new(&[1.0], &[inertia, damping, stiffness])
    }

    pub fn gain(k: f64) -> Result<Self> {
        Self::new(&[k], &[1.0])
    }

    pub fn num(&self) -> &[f64] {
        &self.num
    }

    pub fn den(&self) -> &[f64] {
        &self.den
    }

    pub fn order(&self) -> usize {
        self.den.len() - 1
    }

    pub fn relative_degree(&self) -> usize {
        self.den.len() - self.num.len()
    }

    pub fn is_strictly_proper(&self) -> bool {
        self.relative_degree() > 0 || self.num == [0.0]
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        poly::eval(&self.num, s) / poly::eval(&self.den, s)
    }

    pub fn eval_hz(&self, freq_hz: f64) -> Complex64 {
        self.eval(Complex64::new(0.0, 2.0 * PI * freq_hz))
    }

    pub fn poles(&self) -> Vec<Complex64> {
        poly::roots(&self.den)
    }

    pub fn dc_gain(&self) -> f64 {
        poly::eval_real(&self.num, 0.0) / poly::eval_real(&self.den, 0.0)
    }

    pub(crate) fn realization(&self) -> (DMatrix<f64>, DVector<f64>, DVector<f64>, f64) {
        canonical_realization(&self.num, &self.den)
    }

    /// Tustin discretization with frequency prewarping at `prewarp_hz`
    /// (plain bilinear when `None`).
    pub fn tustin(&self, ts: f64, prewarp_hz: Option<f64>) -> Result<DiscreteTf> {
        ensure_positive(ts, "ts")?;
        let c = match prewarp_hz {
            Some(f) => {
                let w = 2.0 * PI * ensure_positive(f, "prewarp_hz")?;
                if w * ts / 2.0 >= PI / 2.0 {
                    return Err(Error::AboveNyquist {
                        freq_hz: f,
                        nyquist_hz: 0.5 / ts,
                    });
                }
                w / (w * ts / 2.0).tan()
            }
            None => 2.0 / ts,
        };
        let n = self.order();
        let num = poly::pad(&self.num, n + 1);
        let mut znum = vec![0.0; n + 1];
        let mut zden = vec![0.0; n + 1];
        // s^p -> c^p (z - 1)^p (z + 1)^(n - p)
        for i in 0..=n {
            let p = n - i;
            let term = poly::scale(
                &poly::mul(&poly::pow(&[1.0, -1.0], p), &poly::pow(&[1.0, 1.0], n - p)),
                c.powi(p as i32),
            );
            znum = poly::add(&znum, &poly::scale(&term, num[i]));
            zden = poly::add(&zden, &poly::scale(&term, self.den[i]));
        }
        DiscreteTf::new(&znum, &zden, ts)
    }
}

/// Discrete-time SISO transfer function in descending powers of z.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteTf {
    num: Vec<f64>,
    den: Vec<f64>,
    ts: f64,
}

impl DiscreteTf {
    pub fn new(num: &[f64], den: &[f64], ts: f64) -> Result<Self> {
        ensure_positive(ts, "ts")?;
        let (num, den) = validate_rational(num, den)?;
        // stored with a monic denominator
        let lead = den[0];
        let num = poly::scale(&num, 1.0 / lead);
        let den = poly::scale(&den, 1.0 / lead);
        Ok(Self { num, den, ts })
    }

    pub fn gain(k: f64, ts: f64) -> Result<Self> {
        Self::new(&[k], &[1.0], ts)
    }

    pub fn num(&self) -> &[f64] {
        &self.num
    }

    pub fn den(&self) -> &[f64] {
        &self.den
    }

    pub fn ts(&self) -> f64 {
        self.ts
    }

    pub fn order(&self) -> usize {
        self.den.len() - 1
    }

    pub fn relative_degree(&self) -> usize {
        self.den.len() - self.num.len()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        poly::eval(&self.num, z) / poly::eval(&self.den, z)
    }

    /// Response at `freq_hz` without a Nyquist check.
    pub fn eval_hz(&self, freq_hz: f64) -> Complex64 {
        self.eval(Complex64::from_polar(1.0, 2.0 * PI * freq_hz * self.ts))
    }

    pub fn poles(&self) -> Vec<Complex64> {
        poly::roots(&self.den)
    }

    pub fn zeros(&self) -> Vec<Complex64> {
        poly::roots(&self.num)
    }

    pub fn dc_gain(&self) -> f64 {
        poly::eval_real(&self.num, 1.0) / poly::eval_real(&self.den, 1.0)
    }

    pub fn scaled(&self, k: f64) -> Result<Self> {
        Self::new(&poly::scale(&self.num, k), &self.den, self.ts)
    }

    fn same_rate(&self, other: &Self) -> Result<()> {
        if (self.ts - other.ts).abs() > 1e-15 * self.ts.max(other.ts) {
            return Err(Error::InvalidSystem(format!(
                "sample times differ: {} vs {}",
                self.ts, other.ts
            )));
        }
        Ok(())
    }

    pub fn series(&self, other: &Self) -> Result<Self> {
        self.same_rate(other)?;
        Self::new(
            &poly::mul(&self.num, &other.num),
            &poly::mul(&self.den, &other.den),
            self.ts,
        )
    }

    /// Characteristic polynomial `den_p den_c + num_p num_c` of the unity
    /// negative-feedback loop around `self` (plant) and `ctrl`.
    fn loop_polynomial(&self, ctrl: &Self) -> Vec<f64> {
        poly::add(
            &poly::mul(&self.den, &ctrl.den),
            &poly::mul(&self.num, &ctrl.num),
        )
    }

    /// `P / (1 + C P)` with `self` as the plant.
    pub fn process_sensitivity(&self, ctrl: &Self) -> Result<Self> {
        self.same_rate(ctrl)?;
        Self::new(
            &poly::mul(&self.num, &ctrl.den),
            &self.loop_polynomial(ctrl),
            self.ts,
        )
    }

    /// `C P / (1 + C P)` with `self` as the plant.
    pub fn complementary_sensitivity(&self, ctrl: &Self) -> Result<Self> {
        self.same_rate(ctrl)?;
        Self::new(
            &poly::mul(&self.num, &ctrl.num),
            &self.loop_polynomial(ctrl),
            self.ts,
        )
    }

    /// `1 / (1 + C P)` with `self` as the plant.
    pub fn sensitivity(&self, ctrl: &Self) -> Result<Self> {
        self.same_rate(ctrl)?;
        Self::new(
            &poly::mul(&self.den, &ctrl.den),
            &self.loop_polynomial(ctrl),
            self.ts,
        )
    }

    pub fn to_state_space(&self) -> Result<DiscreteStateSpace> {
        let (a, b, c, d) = canonical_realization(&self.num, &self.den);
        DiscreteStateSpace::new(a, b, c, d, self.ts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rejects_improper_and_zero_denominator() {
        assert!(matches!(
            ContinuousTf::new(&[1.0, 0.0, 0.0], &[1.0, 1.0]),
            Err(Error::InvalidSystem(_))
        ));
        assert!(matches!(
            ContinuousTf::new(&[1.0], &[0.0, 0.0]),
            Err(Error::InvalidSystem(_))
        ));
    }

    #[test]
    fn msd_resonance_magnitude() {
        let p = ContinuousTf::mass_spring_damper(1.0, 1.0, 1e4).unwrap();
        // |P(j w_n)| = 1 / (d w_n) at w_n = sqrt(k / J) = 100 rad/s
        let f = 100.0 / (2.0 * PI);
        assert_relative_eq!(p.eval_hz(f).norm(), 1e-2, max_relative = 1e-12);
        assert_relative_eq!(p.dc_gain(), 1e-4);
    }

    #[test]
    fn tustin_integrator() {
        let integ = ContinuousTf::new(&[1.0], &[1.0, 0.0]).unwrap();
        let d = integ.tustin(0.1, None).unwrap();
        // T/2 (z + 1) / (z - 1)
        assert_relative_eq!(d.num()[0] / d.den()[0], 0.05);
        assert_relative_eq!(d.num()[1] / d.den()[0], 0.05);
        assert_relative_eq!(d.den()[1] / d.den()[0], -1.0);
    }

    #[test]
    fn tustin_prewarp_matches_at_prewarp_frequency() {
        let lp = ContinuousTf::new(&[1.0], &[1.0 / (2.0 * PI * 80.0), 1.0]).unwrap();
        let d = lp.tustin(1e-3, Some(80.0)).unwrap();
        let hc = lp.eval_hz(80.0);
        let hd = d.eval_hz(80.0);
        assert_relative_eq!(hc.re, hd.re, epsilon = 1e-12);
        assert_relative_eq!(hc.im, hd.im, epsilon = 1e-12);
    }

    #[test]
    fn sensitivity_identity() {
        let ts = 1e-3;
        let p = DiscreteTf::new(&[0.1, 0.05], &[1.0, -1.5, 0.7], ts).unwrap();
        let c = DiscreteTf::new(&[2.0, -1.0], &[1.0, -0.2], ts).unwrap();
        let s = p.sensitivity(&c).unwrap();
        let t = p.complementary_sensitivity(&c).unwrap();
        for f in [1.0, 50.0, 300.0] {
            let sum = s.eval_hz(f) + t.eval_hz(f);
            assert_relative_eq!(sum.re, 1.0, epsilon = 1e-12);
            assert_relative_eq!(sum.im, 0.0, epsilon = 1e-12);
        }
    }
}
