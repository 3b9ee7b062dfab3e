//! Feedback controller synthesis (gain, lead, low-pass) and learning
//! filters obtained as stable, possibly non-causal, inverses of closed-loop
//! transfer functions.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{ensure_positive, Error, Result};
use crate::lti::{
    connect_feedback, poly, zoh_discretize, ContinuousTf, DiscreteStateSpace, DiscreteTf,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeadSpec {
    /// Lead zero sits at `crossover / zero_ratio`.
    pub zero_ratio: f64,
    /// Lead pole sits at `crossover * pole_ratio`.
    pub pole_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowPassSpec {
    pub corner_hz: f64,
    pub damping: f64,
}

/// Target loop shape for [`design_feedback`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopShapeSpec {
    pub crossover_hz: f64,
    pub lead: Option<LeadSpec>,
    pub lowpass: Option<LowPassSpec>,
}

impl LoopShapeSpec {
    /// Lead zero at `fc/4`, lead pole at `4 fc`, second-order low-pass at
    /// `5 fc` with damping 0.7.
    pub fn with_crossover(crossover_hz: f64) -> Self {
        Self {
            crossover_hz,
            lead: Some(LeadSpec {
                zero_ratio: 4.0,
                pole_ratio: 4.0,
            }),
            lowpass: Some(LowPassSpec {
                corner_hz: 5.0 * crossover_hz,
                damping: 0.7,
            }),
        }
    }

    pub fn gain_only(crossover_hz: f64) -> Self {
        Self {
            crossover_hz,
            lead: None,
            lowpass: None,
        }
    }

    pub fn validate(&self, ts: f64) -> Result<()> {
        let fc = ensure_positive(self.crossover_hz, "controller.crossover_hz")?;
        let nyquist = 0.5 / ts;
        if fc > nyquist / 3.0 {
            return Err(Error::DesignInfeasible(format!(
                "crossover {fc} Hz exceeds a third of Nyquist ({:.3} Hz); \
                 margin to Nyquist is only {:.3} Hz",
                nyquist / 3.0,
                nyquist - fc
            )));
        }
        if let Some(lead) = self.lead {
            if !(lead.zero_ratio > 1.0 && lead.pole_ratio > 1.0) {
                return Err(Error::InvalidArgument {
                    name: "controller.lead",
                    reason: "lead zero must lie below and lead pole above the crossover".into(),
                });
            }
            if fc * lead.pole_ratio >= nyquist {
                return Err(Error::InvalidArgument {
                    name: "controller.lead_pole_ratio",
                    reason: format!("lead pole {} Hz is above Nyquist", fc * lead.pole_ratio),
                });
            }
        }
        if let Some(lp) = self.lowpass {
            if !(lp.corner_hz > fc && lp.corner_hz < nyquist) {
                return Err(Error::InvalidArgument {
                    name: "controller.lowpass_hz",
                    reason: format!(
                        "low-pass corner {} Hz must lie between crossover {fc} Hz and Nyquist {nyquist} Hz",
                        lp.corner_hz
                    ),
                });
            }
            ensure_positive(lp.damping, "controller.lowpass_damping")?;
        }
        Ok(())
    }

    /// Unit-gain continuous shaping filter (lead times low-pass).
    fn shaping_filter(&self) -> Result<ContinuousTf> {
        let wc = 2.0 * PI * self.crossover_hz;
        let mut num = vec![1.0];
        let mut den = vec![1.0];
        if let Some(lead) = self.lead {
            let wz = wc / lead.zero_ratio;
            let wp = wc * lead.pole_ratio;
            num = poly::mul(&num, &[1.0 / wz, 1.0]);
            den = poly::mul(&den, &[1.0 / wp, 1.0]);
        }
        if let Some(lp) = self.lowpass {
            let wl = 2.0 * PI * lp.corner_hz;
            num = poly::mul(&num, &[wl * wl]);
            den = poly::mul(&den, &[1.0, 2.0 * lp.damping * wl, wl * wl]);
        }
        ContinuousTf::new(&num, &den)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignReport {
    pub target_crossover_hz: f64,
    pub gain: f64,
    /// Open-loop 0 dB crossing closest to the target; `None` when the loop
    /// gain never crosses unity.
    pub crossover_hz: Option<f64>,
    pub phase_margin_deg: Option<f64>,
    pub closed_loop_spectral_radius: f64,
}

#[derive(Debug, Clone)]
pub struct FeedbackDesign {
    pub controller: DiscreteStateSpace,
    pub controller_tf: DiscreteTf,
    pub plant: DiscreteStateSpace,
    pub plant_tf: DiscreteTf,
    pub report: DesignReport,
}

/// Designs a discrete gain + lead + low-pass controller for `plant`.
///
/// The shaping filter is discretized with Tustin prewarped at the
/// crossover, and the gain is solved so that `|C P| = 1` at the target
/// crossover on the ZOH-discretized plant.
pub fn design_feedback(
    plant: &ContinuousTf,
    spec: &LoopShapeSpec,
    ts: f64,
) -> Result<FeedbackDesign> {
    ensure_positive(ts, "ts")?;
    spec.validate(ts)?;
    let fc = spec.crossover_hz;
    let plant_d = zoh_discretize(plant, ts)?;
    let plant_tf = plant_d.to_tf()?;
    let shape = spec.shaping_filter()?.tustin(ts, Some(fc))?;
    let open = shape.eval_hz(fc) * plant_tf.eval_hz(fc);
    if !(open.norm() > 0.0 && open.norm().is_finite()) {
        return Err(Error::DesignInfeasible(format!(
            "loop gain at {fc} Hz is {}; cannot normalize",
            open.norm()
        )));
    }
    let gain = 1.0 / open.norm();
    let controller_tf = shape.scaled(gain)?;
    let controller = controller_tf.to_state_space()?;

    let closed = connect_feedback(&plant_d, &controller)?;
    let radius = closed.spectral_radius();
    let (crossover_hz, phase_margin_deg) = match loop_crossover(&plant_tf, &controller_tf, fc) {
        Some((f, pm)) => (Some(f), Some(pm)),
        None => (None, None),
    };
    let report = DesignReport {
        target_crossover_hz: fc,
        gain,
        crossover_hz,
        phase_margin_deg,
        closed_loop_spectral_radius: radius,
    };
    if radius >= 1.0 {
        return Err(Error::DesignInfeasible(format!(
            "closed loop unstable (spectral radius {radius:.6}); {report:?}"
        )));
    }
    Ok(FeedbackDesign {
        controller,
        controller_tf,
        plant: plant_d,
        plant_tf,
        report,
    })
}

/// Phase margin in degrees for an open-loop value with unit magnitude.
pub fn phase_margin_deg(open_loop: Complex64) -> f64 {
    let pm = open_loop.arg().to_degrees() + 180.0;
    if pm > 180.0 {
        pm - 360.0
    } else {
        pm
    }
}

/// Finds the 0 dB crossing of `C P` nearest to `target_hz` on a dense
/// logarithmic sweep refined by bisection.
fn loop_crossover(plant: &DiscreteTf, ctrl: &DiscreteTf, target_hz: f64) -> Option<(f64, f64)> {
    let nyquist = 0.5 / plant.ts();
    let log_mag = |f: f64| (ctrl.eval_hz(f) * plant.eval_hz(f)).norm().ln();
    let (lo, hi) = (1e-3_f64, nyquist * (1.0 - 1e-9));
    let n = 20_000;
    let grid: Vec<f64> = (0..=n)
        .map(|i| lo * (hi / lo).powf(i as f64 / n as f64))
        .collect();
    let mut best: Option<f64> = None;
    let mut prev = log_mag(grid[0]);
    for w in grid.windows(2) {
        let next = log_mag(w[1]);
        if prev.is_finite() && next.is_finite() && prev.signum() != next.signum() && prev != 0.0 {
            let (mut a, mut b, mut fa) = (w[0], w[1], prev);
            for _ in 0..80 {
                let m = 0.5 * (a + b);
                let fm = log_mag(m);
                if fm.signum() == fa.signum() {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            let f = 0.5 * (a + b);
            if best.is_none_or(|bf| (f - target_hz).abs() < (bf - target_hz).abs()) {
                best = Some(f);
            }
        }
        prev = next;
    }
    best.map(|f| (f, phase_margin_deg(ctrl.eval_hz(f) * plant.eval_hz(f))))
}

/// Options for the stable inversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionOptions {
    /// Zeros with magnitude at or above this radius are not inverted
    /// directly; they are compensated with a zero-phase reflected factor.
    pub zero_radius: f64,
}

impl Default for InversionOptions {
    fn default() -> Self {
        Self { zero_radius: 0.95 }
    }
}

/// `L = z^{n_l} L_c` with a stable causal part `L_c`.
#[derive(Debug, Clone)]
pub struct NonCausalFilter {
    causal: DiscreteStateSpace,
    causal_tf: DiscreteTf,
    preview: usize,
    reflected_zeros: Vec<Complex64>,
}

impl NonCausalFilter {
    pub fn new(causal_tf: DiscreteTf, preview: usize) -> Result<Self> {
        let causal = causal_tf.to_state_space()?;
        let radius = causal.spectral_radius();
        if radius >= 1.0 {
            return Err(Error::InversionFailed(format!(
                "causal part is not stable (spectral radius {radius})"
            )));
        }
        Ok(Self {
            causal,
            causal_tf,
            preview,
            reflected_zeros: Vec::new(),
        })
    }

    pub fn preview(&self) -> usize {
        self.preview
    }

    pub fn causal(&self) -> &DiscreteStateSpace {
        &self.causal
    }

    pub fn causal_tf(&self) -> &DiscreteTf {
        &self.causal_tf
    }

    pub fn reflected_zeros(&self) -> &[Complex64] {
        &self.reflected_zeros
    }

    /// Fresh instance of the causal part with zero state, for stepping.
    pub fn instantiate(&self) -> DiscreteStateSpace {
        let mut c = self.causal.clone();
        c.reset();
        c
    }

    /// Response of the full non-causal filter, including `z^{n_l}`.
    pub fn eval_hz(&self, freq_hz: f64) -> Complex64 {
        let w = 2.0 * PI * freq_hz * self.causal.ts();
        Complex64::from_polar(1.0, w * self.preview as f64) * self.causal_tf.eval_hz(freq_hz)
    }

    /// Offline application: `out[k] = L_c[x](k + n_l)`, continuing the
    /// causal part on zero input past the end of the record.
    pub fn apply(&self, signal: &[f64]) -> Result<Vec<f64>> {
        let mut causal = self.instantiate();
        let padded = signal
            .iter()
            .copied()
            .chain(std::iter::repeat_n(0.0, self.preview));
        let out = padded.map(|u| causal.step(u)).collect::<Result<Vec<_>>>()?;
        Ok(out[self.preview..].to_vec())
    }
}

/// Zero-phase-error approximate inverse of `sys`.
///
/// Zeros inside `zero_radius` are inverted exactly; the remaining factor
/// `b_u(z)` is replaced by `z^{-n_u} B_u(z) / B_u(1)^2` with
/// `B_u(z) = prod(1 - z_u z)`, so `L sys = |B_u|^2 / B_u(1)^2` on the unit
/// circle: real, non-negative and exactly one at DC.
pub fn invert_zero_phase(sys: &DiscreteTf, opts: &InversionOptions) -> Result<NonCausalFilter> {
    if !(opts.zero_radius > 0.0 && opts.zero_radius <= 1.0) {
        return Err(Error::InversionFailed(format!(
            "zero radius {} outside (0, 1]; no stable factorization",
            opts.zero_radius
        )));
    }
    let num = sys.num();
    let den = sys.den();
    let b0 = num[0];
    if b0 == 0.0 {
        return Err(Error::InversionFailed(
            "transfer function is identically zero".into(),
        ));
    }
    let zeros = sys.zeros();
    let (unacceptable, acceptable): (Vec<_>, Vec<_>) =
        zeros.iter().partition(|z| z.norm() >= opts.zero_radius);
    let n = den.len() - 1;
    let m = num.len() - 1;
    let n_u = unacceptable.len();
    let preview = n - m + n_u;

    let stable_part = poly::from_roots(&acceptable);
    let mut reflected = poly::from_roots(&unacceptable);
    reflected.reverse();
    let dc = reflected.iter().sum::<f64>();
    if dc.abs() < 1e-9 {
        return Err(Error::InversionFailed(
            "zero at z = 1 cannot be normalized at DC".into(),
        ));
    }
    let mut shift = vec![0.0; n_u + preview + 1];
    shift[0] = 1.0;
    let l_num = poly::mul(den, &reflected);
    let l_den = poly::scale(&poly::mul(&shift, &stable_part), b0 * dc * dc);
    let causal_tf = DiscreteTf::new(&l_num, &l_den, sys.ts())?;
    let mut filter = NonCausalFilter::new(causal_tf, preview)?;
    filter.reflected_zeros = unacceptable;
    Ok(filter)
}

/// Learning filter for spatial repetitive control: inverse of the process
/// sensitivity `P / (1 + C P)`.
pub fn learning_filter_spatial(
    plant_model: &ContinuousTf,
    ctrl: &DiscreteStateSpace,
    ts: f64,
    opts: &InversionOptions,
) -> Result<NonCausalFilter> {
    let plant = zoh_discretize(plant_model, ts)?.to_tf()?;
    let ps = plant.process_sensitivity(&ctrl.to_tf()?)?;
    invert_zero_phase(&ps, opts)
}

/// Learning filter for time-domain repetitive control: inverse of the
/// complementary sensitivity `C P / (1 + C P)`.
pub fn learning_filter_traditional(
    plant_model: &ContinuousTf,
    ctrl: &DiscreteStateSpace,
    ts: f64,
    opts: &InversionOptions,
) -> Result<NonCausalFilter> {
    let plant = zoh_discretize(plant_model, ts)?.to_tf()?;
    let t = plant.complementary_sensitivity(&ctrl.to_tf()?)?;
    invert_zero_phase(&t, opts)
}

/// Largest `|L(f) G(f) - 1|` over a uniform grid on `(0, up_to_hz]`.
pub fn inversion_error(
    filter: &NonCausalFilter,
    sys: &DiscreteTf,
    up_to_hz: f64,
    points: usize,
) -> f64 {
    (1..=points)
        .map(|i| up_to_hz * i as f64 / points as f64)
        .map(|f| (filter.eval_hz(f) * sys.eval_hz(f) - 1.0).norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const TS: f64 = 1e-3;

    #[test]
    fn static_inverse() {
        let g = DiscreteTf::gain(2.5, TS).unwrap();
        let l = invert_zero_phase(&g, &InversionOptions::default()).unwrap();
        assert_eq!(l.preview(), 0);
        assert_relative_eq!(l.eval_hz(10.0).re, 0.4, epsilon = 1e-15);
    }

    #[test]
    fn unit_complementary_sensitivity() {
        let t = DiscreteTf::gain(1.0, TS).unwrap();
        let l = invert_zero_phase(&t, &InversionOptions::default()).unwrap();
        assert_eq!(l.preview(), 0);
        assert_relative_eq!(l.eval_hz(123.0).re, 1.0);
    }

    #[test]
    fn minimum_phase_inverse_uses_relative_degree() {
        // zero at 0.5, relative degree 2
        let g = DiscreteTf::new(&[0.2, -0.1], &[1.0, -1.1, 0.3, -0.02], TS).unwrap();
        let l = invert_zero_phase(&g, &InversionOptions::default()).unwrap();
        assert_eq!(l.preview(), 2);
        assert!(l.reflected_zeros().is_empty());
        for f in [1.0, 100.0, 450.0] {
            assert_relative_eq!(
                (l.eval_hz(f) * g.eval_hz(f) - 1.0).norm(),
                0.0,
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn boundary_zero_gets_zero_phase_treatment() {
        // zero at z = -1 from a Tustin-like numerator
        let g = DiscreteTf::new(&[0.25, 0.25], &[1.0, -0.5, 0.0], TS).unwrap();
        let l = invert_zero_phase(&g, &InversionOptions::default()).unwrap();
        assert_eq!(l.preview(), 2);
        assert_eq!(l.reflected_zeros().len(), 1);
        for f in [1.0, 25.0, 200.0, 400.0] {
            let lg = l.eval_hz(f) * g.eval_hz(f);
            assert!(lg.im.abs() < 1e-12, "phase error at {f} Hz: {lg}");
            let w = 2.0 * PI * f * TS;
            assert_relative_eq!(lg.re, (w / 2.0).cos().powi(2), epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_at_one_is_rejected() {
        let g = DiscreteTf::new(&[1.0, -1.0], &[1.0, -0.5], TS).unwrap();
        assert!(matches!(
            invert_zero_phase(&g, &InversionOptions::default()),
            Err(Error::InversionFailed(_))
        ));
    }

    #[test]
    fn crossover_above_third_of_rate_is_rejected() {
        let plant = ContinuousTf::mass_spring_damper(1.0, 1.0, 1e4).unwrap();
        let err = design_feedback(&plant, &LoopShapeSpec::with_crossover(400.0), TS).unwrap_err();
        assert!(matches!(err, Error::DesignInfeasible(_)));
    }

    #[test]
    fn gain_only_on_static_plant() {
        let plant = ContinuousTf::gain(1.0).unwrap();
        let d = design_feedback(&plant, &LoopShapeSpec::gain_only(10.0), TS).unwrap();
        assert_relative_eq!(d.report.gain, 1.0, epsilon = 1e-12);
        assert_eq!(d.controller.order(), 0);
        assert_relative_eq!(d.controller.d(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(
            (d.controller_tf.eval_hz(10.0) * d.plant_tf.eval_hz(10.0)).norm(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn phase_margin_wraps() {
        assert_relative_eq!(
            phase_margin_deg(Complex64::from_polar(1.0, (-143f64).to_radians())),
            37.0,
            epsilon = 1e-9
        );
        assert_relative_eq!(
            phase_margin_deg(Complex64::from_polar(1.0, 170f64.to_radians())),
            -10.0,
            epsilon = 1e-9
        );
    }
}
