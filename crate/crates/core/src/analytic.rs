//! Closed-form correlation functions for the coincident detector
//! configuration (`m − 1` detectors at `θ₁`, one at `θ₂`), their
//! visibilities, and the peak-width prediction.

use crate::error::{Error, Result};
use crate::model::{
    grating_factor, phase_difference, CorrelationCurve, CurveMeta, EmitterChain, Normalization,
    SourceModel,
};
use crate::scalar::{factorial, Real};

/// Two-term structure `baseline + modulation_amplitude·grating/N²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelPrediction<T> {
    pub value: T,
    pub baseline: T,
    pub modulation_amplitude: T,
}

impl<T: Real> ModelPrediction<T> {
    fn assemble(baseline: T, modulation_amplitude: T, delta: T, n: usize) -> Self {
        let nn = T::from_usize_exact(n);
        let value = baseline + modulation_amplitude * grating_factor(delta, n) / (nn * nn);
        Self { value, baseline, modulation_amplitude }
    }
}

fn check_order(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::Argument("order m must be ≥ 1".into()));
    }
    Ok(())
}

/// Single-photon emitters, both components.
pub fn spe_prediction<T: Real>(
    chain: &EmitterChain<T>,
    m: usize,
    theta1: T,
    theta2: T,
) -> Result<ModelPrediction<T>> {
    check_order(m)?;
    if chain.source_model() != SourceModel::Spe {
        return Err(Error::Domain(format!("expected an SPE chain, got {}", chain.source_model().name())));
    }
    let n = chain.n_sources();
    if m > n {
        return Err(Error::Domain(format!(
            "SPE correlation of order {m} vanishes identically for {n} emitters"
        )));
    }
    let nn = T::from_usize_exact(n);
    let baseline = T::from_usize_exact(n - m) / nn;
    let modulation = T::from_usize_exact(m - 1);
    let delta = phase_difference(theta1, theta2, chain.spacing_kd());
    Ok(ModelPrediction::assemble(baseline, modulation, delta, n))
}

/// `(N−m)/N + (m−1)/N²·grating(Δ, N)`.
pub fn g_spe_coincident<T: Real>(chain: &EmitterChain<T>, m: usize, theta1: T, theta2: T) -> Result<T> {
    spe_prediction(chain, m, theta1, theta2).map(|p| p.value)
}

/// Thermal sources, both components. With `absolute_scale` the result is
/// multiplied by `(m−1)!`, the scale of the normalized intensity-moment
/// estimator.
pub fn tls_prediction<T: Real>(
    chain: &EmitterChain<T>,
    m: usize,
    theta1: T,
    theta2: T,
    absolute_scale: bool,
) -> Result<ModelPrediction<T>> {
    check_order(m)?;
    if !matches!(chain.source_model(), SourceModel::Tls { .. }) {
        return Err(Error::Domain(format!("expected a TLS chain, got {}", chain.source_model().name())));
    }
    let scale = if absolute_scale { T::lit(factorial(m - 1)) } else { T::one() };
    let delta = phase_difference(theta1, theta2, chain.spacing_kd());
    Ok(ModelPrediction::assemble(
        scale,
        scale * T::from_usize_exact(m - 1),
        delta,
        chain.n_sources(),
    ))
}

/// `1 + (m−1)/N²·grating(Δ, N)`, optionally times `(m−1)!`.
pub fn g_tls_coincident<T: Real>(
    chain: &EmitterChain<T>,
    m: usize,
    theta1: T,
    theta2: T,
    absolute_scale: bool,
) -> Result<T> {
    tls_prediction(chain, m, theta1, theta2, absolute_scale).map(|p| p.value)
}

/// `(m−1)/(m+1−2m/N)`.
pub fn visibility_spe(n: usize, m: usize) -> Result<f64> {
    check_order(m)?;
    if n < 2 {
        return Err(Error::Domain("SPE visibility needs N ≥ 2".into()));
    }
    if m > n {
        return Err(Error::Domain(format!("order {m} exceeds N = {n}")));
    }
    let (n, m) = (n as f64, m as f64);
    Ok((m - 1.0) / (m + 1.0 - 2.0 * m / n))
}

/// `(m−1)/(m+1)`.
pub fn visibility_tls(m: usize) -> Result<f64> {
    check_order(m)?;
    let m = m as f64;
    Ok((m - 1.0) / (m + 1.0))
}

/// Predicted full width at half maximum of the central peak, `2π/(N·kd)`.
pub fn peak_fwhm<T: Real>(chain: &EmitterChain<T>) -> Result<T> {
    if chain.n_sources() < 2 {
        return Err(Error::Domain("a single emitter has no interference peak".into()));
    }
    Ok(T::TAU() / (T::from_usize_exact(chain.n_sources()) * chain.spacing_kd()))
}

/// Options for [`analytic_curve`].
#[derive(Debug, Clone, Copy, Default)]
pub struct CurveOptions {
    pub max_normalize: bool,
    pub absolute_scale: bool,
}

/// Samples the closed form of the chain's source model along `grid`.
pub fn analytic_curve<T: Real>(
    chain: &EmitterChain<T>,
    m: usize,
    theta1: T,
    grid: &[T],
    options: CurveOptions,
) -> Result<CorrelationCurve<T>> {
    if grid.is_empty() {
        return Err(Error::Argument("θ₂ grid is empty".into()));
    }
    let values = grid
        .iter()
        .map(|&t2| match chain.source_model() {
            SourceModel::Spe => g_spe_coincident(chain, m, theta1, t2),
            SourceModel::Tls { .. } => g_tls_coincident(chain, m, theta1, t2, options.absolute_scale),
            SourceModel::Cls { .. } => Err(Error::Domain(
                "no closed form for coherent sources; use the Monte Carlo engine".into(),
            )),
        })
        .collect::<Result<Vec<_>>>()?;
    let curve = CorrelationCurve::new(grid.to_vec(), values, None)?.with_meta(CurveMeta {
        n_sources: chain.n_sources(),
        order: m,
        theta1,
        spacing_kd: chain.spacing_kd(),
        source_model: chain.source_model(),
    });
    if options.max_normalize {
        curve.max_normalized()
    } else {
        debug_assert_eq!(curve.normalization, Normalization::Raw);
        Ok(curve)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::linspace;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn spe(n: usize) -> EmitterChain<f64> {
        EmitterChain::spe(n, PI).unwrap()
    }

    fn tls(n: usize) -> EmitterChain<f64> {
        EmitterChain::tls(n, PI, 1.0).unwrap()
    }

    #[test]
    fn spe_examples() {
        assert_abs_diff_eq!(g_spe_coincident(&spe(3), 2, 0.0, 0.0).unwrap(), 4.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(g_spe_coincident(&spe(2), 2, 0.0, PI / 2.0).unwrap(), 0.0, epsilon = 1e-15);
        for t2 in [-1.0, -0.3, 0.0, 0.4, 1.2] {
            assert_abs_diff_eq!(g_spe_coincident(&spe(5), 1, 0.0, t2).unwrap(), 0.8, epsilon = 1e-15);
        }
        assert!(matches!(g_spe_coincident(&spe(2), 3, 0.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(g_spe_coincident(&tls(2), 2, 0.0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn prediction_components_are_consistent() {
        let p = spe_prediction(&spe(4), 3, 0.0, 0.2).unwrap();
        assert_abs_diff_eq!(p.baseline, 0.25);
        assert_abs_diff_eq!(p.modulation_amplitude, 2.0);
        let g = grating_factor(phase_difference(0.0, 0.2, PI), 4);
        assert_abs_diff_eq!(p.value, p.baseline + p.modulation_amplitude * g / 16.0, epsilon = 1e-15);
    }

    #[test]
    fn tls_examples() {
        assert_abs_diff_eq!(g_tls_coincident(&tls(2), 2, 0.0, 0.0, false).unwrap(), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g_tls_coincident(&tls(8), 8, 0.0, 0.0, false).unwrap(), 8.0, epsilon = 1e-14);
        assert_abs_diff_eq!(g_tls_coincident(&tls(8), 8, 0.0, 0.0, true).unwrap(), 8.0 * 5040.0, epsilon = 1e-9);
        for t2 in [-1.0, 0.0, 0.7] {
            assert_eq!(g_tls_coincident(&tls(6), 1, 0.0, t2, false).unwrap(), 1.0);
        }
        // classical sources keep correlating above m = N
        assert!(g_tls_coincident(&tls(2), 3, 0.0, 0.3, false).unwrap() > 0.0);
    }

    #[test]
    fn visibility_examples() {
        for n in 2..=10 {
            assert_abs_diff_eq!(visibility_spe(n, n).unwrap(), 1.0, epsilon = 1e-15);
            assert_eq!(visibility_spe(n, 1).unwrap(), 0.0);
        }
        assert_abs_diff_eq!(visibility_spe(3, 2).unwrap(), 0.6, epsilon = 1e-15);
        assert!(visibility_spe(3, 4).is_err());
        assert!(visibility_spe(1, 1).is_err());
        assert_eq!(visibility_tls(1).unwrap(), 0.0);
        assert_abs_diff_eq!(visibility_tls(2).unwrap(), 1.0 / 3.0);
        assert_abs_diff_eq!(visibility_tls(8).unwrap(), 7.0 / 9.0);
    }

    #[test]
    fn spe_visibility_dominates_tls() {
        for n in 2..=30 {
            for m in 2..=n {
                assert!(visibility_spe(n, m).unwrap() > visibility_tls(m).unwrap());
            }
        }
    }

    #[test]
    fn fwhm_examples() {
        assert_abs_diff_eq!(peak_fwhm(&spe(10)).unwrap(), 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(peak_fwhm(&spe(2)).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(peak_fwhm(&spe(6)).unwrap(), peak_fwhm(&spe(3)).unwrap() / 2.0, epsilon = 1e-15);
        assert!(peak_fwhm(&spe(1)).is_err());
    }

    #[test]
    fn curve_examples() {
        let grid = linspace(-0.6, 0.6, 121);
        let c = analytic_curve(&spe(2), 2, 0.0, &grid, CurveOptions { max_normalize: true, ..Default::default() })
            .unwrap();
        let imax = c.values().iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert_eq!(c.theta2()[imax], 0.0);
        assert_eq!(c.values()[imax], 1.0);
        assert_eq!(c.normalization, Normalization::MaxNormalized);

        // TLS m = N = 2 over a full period: min/max = (1 − V)/(1 + V)
        let full = linspace(-PI / 2.0 + 1e-9, PI / 2.0 - 1e-9, 2001);
        let t = analytic_curve(&tls(2), 2, 0.0, &full, CurveOptions::default()).unwrap();
        let v = 1.0 / 3.0;
        assert_abs_diff_eq!(t.min_value() / t.max_value(), (1.0 - v) / (1.0 + v), epsilon = 1e-9);

        let flat = analytic_curve(&tls(4), 1, 0.0, &grid, CurveOptions::default()).unwrap();
        assert!(flat.values().iter().all(|&v| v == 1.0));
        assert!(analytic_curve(&tls(4), 1, 0.0, &[], CurveOptions::default()).is_err());
        let cls = EmitterChain::cls(2, PI, 1.0).unwrap();
        assert!(matches!(analytic_curve(&cls, 2, 0.0, &grid, CurveOptions::default()), Err(Error::Domain(_))));
    }

    #[test]
    fn spe_closed_form_is_even_and_periodic_in_delta() {
        // with kd = 2π and θ₁ = 0, θ₂ ↦ −θ₂ flips Δ and sin θ₂ = 1/2 shifts it by π
        let c = EmitterChain::spe(5, 2.0 * PI).unwrap();
        for t in linspace(-1.4, 1.4, 57) {
            let a = g_spe_coincident(&c, 3, 0.0, t).unwrap();
            let b = g_spe_coincident(&c, 3, 0.0, -t).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        let c1 = EmitterChain::spe(5, 1.0).unwrap();
        let c2 = EmitterChain::spe(5, 1.0 + 2.0 * PI / (0.3f64).sin()).unwrap();
        assert_abs_diff_eq!(
            g_spe_coincident(&c1, 3, 0.0, 0.3).unwrap(),
            g_spe_coincident(&c2, 3, 0.0, 0.3).unwrap(),
            epsilon = 1e-9
        );
    }

    #[test]
    fn generic_over_f32() {
        let c = EmitterChain::<f32>::spe(3, std::f32::consts::PI).unwrap();
        let v = g_spe_coincident(&c, 2, 0.0f32, 0.0).unwrap();
        assert!((v - 4.0 / 3.0).abs() < 1e-6);
    }
}
