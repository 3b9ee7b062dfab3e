//! Linear time-invariant SISO systems: transfer functions, exact
//! zero-order-hold discretization, state-space stepping, frequency
//! responses and feedback interconnection.

pub mod poly;
mod ss;
mod tf;

pub use ss::DiscreteStateSpace;
pub use tf::{ContinuousTf, DiscreteTf};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{ensure_positive, Error, Result};

/// Exact zero-order-hold equivalent of `sys` at sample time `ts`.
///
/// Uses the augmented matrix exponential `exp([[A, B], [0, 0]] ts)`.
pub fn zoh_discretize(sys: &ContinuousTf, ts: f64) -> Result<DiscreteStateSpace> {
    ensure_positive(ts, "ts")?;
    let (a, b, c, d) = sys.realization();
    let n = a.nrows();
    if n == 0 {
        return DiscreteStateSpace::gain(d, ts);
    }
    let mut aug = DMatrix::<f64>::zeros(n + 1, n + 1);
    aug.view_mut((0, 0), (n, n)).copy_from(&(a * ts));
    aug.view_mut((0, n), (n, 1)).copy_from(&(b * ts));
    let e = aug.exp();
    let ad = e.view((0, 0), (n, n)).into_owned();
    let bd = DVector::from_fn(n, |i, _| e[(i, n)]);
    DiscreteStateSpace::new(ad, bd, c, d, ts)
}

/// Complex response sampled on a strictly increasing frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyResponse {
    pub freqs_hz: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl FrequencyResponse {
    pub fn magnitude(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn phase_deg(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.arg().to_degrees()).collect()
    }
}

/// Anything with a SISO frequency response.
pub trait FrequencyDomain {
    /// Nyquist frequency for sampled systems, `None` for continuous ones.
    fn nyquist_hz(&self) -> Option<f64>;
    fn response_at(&self, freq_hz: f64) -> Complex64;
}

impl FrequencyDomain for ContinuousTf {
    fn nyquist_hz(&self) -> Option<f64> {
        None
    }

    fn response_at(&self, freq_hz: f64) -> Complex64 {
        self.eval_hz(freq_hz)
    }
}

impl FrequencyDomain for DiscreteTf {
    fn nyquist_hz(&self) -> Option<f64> {
        Some(0.5 / self.ts())
    }

    fn response_at(&self, freq_hz: f64) -> Complex64 {
        self.eval_hz(freq_hz)
    }
}

impl FrequencyDomain for DiscreteStateSpace {
    fn nyquist_hz(&self) -> Option<f64> {
        Some(0.5 / self.ts())
    }

    fn response_at(&self, freq_hz: f64) -> Complex64 {
        self.eval_hz(freq_hz)
    }
}

pub fn freq_response<S: FrequencyDomain + ?Sized>(
    sys: &S,
    freqs_hz: &[f64],
) -> Result<FrequencyResponse> {
    if freqs_hz.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument {
            name: "freqs",
            reason: "frequency grid must be strictly increasing".into(),
        });
    }
    if let Some(&bad) = freqs_hz.iter().find(|f| !f.is_finite() || **f < 0.0) {
        return Err(Error::InvalidArgument {
            name: "freqs",
            reason: format!("frequency {bad} is not a finite non-negative value"),
        });
    }
    if let (Some(nyq), Some(&last)) = (sys.nyquist_hz(), freqs_hz.last()) {
        if last >= nyq {
            return Err(Error::AboveNyquist {
                freq_hz: last,
                nyquist_hz: nyq,
            });
        }
    }
    Ok(FrequencyResponse {
        freqs_hz: freqs_hz.to_vec(),
        values: freqs_hz.iter().map(|&f| sys.response_at(f)).collect(),
    })
}

/// Realizations of the unity negative-feedback loop `u = C (r - y) + w`, `y = P u`.
#[derive(Debug, Clone)]
pub struct ClosedLoop {
    /// `S = 1 / (1 + C P)`, from `r` to `e`.
    pub sensitivity: DiscreteStateSpace,
    /// `PS = P / (1 + C P)`, from the input disturbance `w` to `y`.
    pub process_sensitivity: DiscreteStateSpace,
    /// `T = C P / (1 + C P)`, from `r` to `y`.
    pub complementary_sensitivity: DiscreteStateSpace,
}

impl ClosedLoop {
    pub fn spectral_radius(&self) -> f64 {
        self.sensitivity.spectral_radius()
    }
}

pub fn connect_feedback(
    plant: &DiscreteStateSpace,
    ctrl: &DiscreteStateSpace,
) -> Result<ClosedLoop> {
    let ts = plant.ts();
    if (ts - ctrl.ts()).abs() > 1e-15 * ts {
        return Err(Error::InvalidSystem(format!(
            "sample times differ: plant {ts}, controller {}",
            ctrl.ts()
        )));
    }
    let (dp, dc) = (plant.d(), ctrl.d());
    let well_posed = 1.0 + dp * dc;
    if well_posed.abs() < 1e-12 {
        return Err(Error::IllPosedLoop(well_posed));
    }
    let delta = 1.0 / well_posed;
    let (np, nc) = (plant.order(), ctrl.order());
    let n = np + nc;

    // y = cy.x + dyr r + dyw w
    let mut cy = DVector::zeros(n);
    cy.rows_mut(0, np).copy_from(&(plant.c() * delta));
    cy.rows_mut(np, nc).copy_from(&(ctrl.c() * (dp * delta)));
    let dyr = delta * dp * dc;
    let dyw = delta * dp;
    // e = r - y
    let ce = -&cy;
    let der = 1.0 - dyr;
    let dew = -dyw;
    // u = Cc xc + Dc e + w
    let mut cu = &ce * dc;
    cu.rows_mut(np, nc).axpy(1.0, ctrl.c(), 1.0);
    let dur = dc * der;
    let duw = dc * dew + 1.0;

    let mut a = DMatrix::zeros(n, n);
    a.view_mut((0, 0), (np, np)).copy_from(plant.a());
    a.view_mut((np, np), (nc, nc)).copy_from(ctrl.a());
    for i in 0..np {
        for j in 0..n {
            a[(i, j)] += plant.b()[i] * cu[j];
        }
    }
    for i in 0..nc {
        for j in 0..n {
            a[(np + i, j)] += ctrl.b()[i] * ce[j];
        }
    }
    let mut br = DVector::zeros(n);
    br.rows_mut(0, np).copy_from(&(plant.b() * dur));
    br.rows_mut(np, nc).copy_from(&(ctrl.b() * der));
    let mut bw = DVector::zeros(n);
    bw.rows_mut(0, np).copy_from(&(plant.b() * duw));
    bw.rows_mut(np, nc).copy_from(&(ctrl.b() * dew));

    Ok(ClosedLoop {
        sensitivity: DiscreteStateSpace::new(a.clone(), br.clone(), ce, der, ts)?,
        process_sensitivity: DiscreteStateSpace::new(a.clone(), bw, cy.clone(), dyw, ts)?,
        complementary_sensitivity: DiscreteStateSpace::new(a, br, cy, dyr, ts)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn integrator_becomes_accumulator() {
        let integ = ContinuousTf::new(&[1.0], &[1.0, 0.0]).unwrap();
        let mut d = zoh_discretize(&integ, 1e-3).unwrap();
        assert_eq!(d.order(), 1);
        assert_relative_eq!(d.a()[(0, 0)], 1.0, epsilon = 1e-15);
        let y = d.simulate(&[1.0; 4]).unwrap();
        for (k, yk) in y.iter().enumerate() {
            assert_relative_eq!(*yk, k as f64 * 1e-3, epsilon = 1e-15);
        }
    }

    #[test]
    fn static_gain_response_is_constant() {
        let g = DiscreteStateSpace::gain(3.0, 1e-3).unwrap();
        let fr = freq_response(&g, &[0.0, 10.0, 400.0]).unwrap();
        assert!(fr.values.iter().all(|v| *v == Complex64::new(3.0, 0.0)));
    }

    #[test]
    fn nyquist_is_rejected() {
        let g = DiscreteStateSpace::gain(1.0, 1e-3).unwrap();
        assert!(matches!(
            freq_response(&g, &[10.0, 500.0]),
            Err(Error::AboveNyquist { .. })
        ));
        assert!(freq_response(&g, &[10.0, 5.0]).is_err());
    }

    #[test]
    fn zero_controller_loop() {
        let plant = DiscreteTf::new(&[0.1], &[1.0, -0.9], 1e-3)
            .unwrap()
            .to_state_space()
            .unwrap();
        let zero = DiscreteStateSpace::gain(0.0, 1e-3).unwrap();
        let cl = connect_feedback(&plant, &zero).unwrap();
        for f in [1.0, 100.0] {
            let ps = cl.process_sensitivity.eval_hz(f);
            let p = plant.eval_hz(f);
            assert_relative_eq!((ps - p).norm(), 0.0, epsilon = 1e-14);
            assert_relative_eq!(cl.sensitivity.eval_hz(f).re, 1.0, epsilon = 1e-14);
            assert_relative_eq!(cl.complementary_sensitivity.eval_hz(f).norm(), 0.0);
        }
    }

    #[test]
    fn static_unit_loop() {
        let one = DiscreteStateSpace::gain(1.0, 1e-3).unwrap();
        let cl = connect_feedback(&one, &one).unwrap();
        assert_relative_eq!(cl.sensitivity.d(), 0.5);
        assert_relative_eq!(cl.complementary_sensitivity.d(), 0.5);
    }

    #[test]
    fn algebraic_loop_rejected() {
        let p = DiscreteStateSpace::gain(1.0, 1e-3).unwrap();
        let c = DiscreteStateSpace::gain(-1.0, 1e-3).unwrap();
        assert!(matches!(
            connect_feedback(&p, &c),
            Err(Error::IllPosedLoop(_))
        ));
    }
}
