//! Emitter/detector geometry, optical phases and the N-slit grating factor.
//!
//! Geometry is reduced to the dimensionless pair `(kd, θ)`: emitter `l`
//! (1-based) sits at `l·d` on a line, detectors sit in the far field at
//! angle `θ` in the plane of the chain, and every formula depends only on
//! `kd·sin θ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `|sin(Δ/2)|` below which the grating factor returns its limit `n²`.
pub const GRATING_SINGULARITY_THRESHOLD: f64 = 1e-9;

/// Statistics of each (identical, independent) source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SourceModel<T> {
    /// Two-level atom prepared in the excited state.
    Spe,
    /// Thermal source, circular Gaussian amplitude with the given mean intensity.
    Tls { mean_intensity: T },
    /// Coherent source of fixed amplitude and uniformly random phase.
    Cls { amplitude: T },
}

impl<T> SourceModel<T> {
    pub fn name(&self) -> &'static str {
        match self {
            SourceModel::Spe => "spe",
            SourceModel::Tls { .. } => "tls",
            SourceModel::Cls { .. } => "cls",
        }
    }
}

/// Linear chain of `n_sources` emitters with spacing `kd` (in units of 1/k).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmitterChain<T> {
    n_sources: usize,
    spacing_kd: T,
    source_model: SourceModel<T>,
}

impl<T: Real> EmitterChain<T> {
    pub fn new(n_sources: usize, spacing_kd: T, source_model: SourceModel<T>) -> Result<Self> {
        if n_sources == 0 {
            return Err(Error::Argument("chain needs at least one source".into()));
        }
        if !(spacing_kd.is_finite() && spacing_kd > T::zero()) {
            return Err(Error::Argument(format!("kd must be finite and > 0, got {spacing_kd}")));
        }
        match source_model {
            SourceModel::Tls { mean_intensity: p } if !(p.is_finite() && p > T::zero()) => {
                return Err(Error::Argument(format!("TLS mean intensity must be > 0, got {p}")))
            }
            SourceModel::Cls { amplitude: a } if !(a.is_finite() && a > T::zero()) => {
                return Err(Error::Argument(format!("CLS amplitude must be > 0, got {a}")))
            }
            _ => {}
        }
        Ok(Self { n_sources, spacing_kd, source_model })
    }

    pub fn spe(n_sources: usize, spacing_kd: T) -> Result<Self> {
        Self::new(n_sources, spacing_kd, SourceModel::Spe)
    }

    pub fn tls(n_sources: usize, spacing_kd: T, mean_intensity: T) -> Result<Self> {
        Self::new(n_sources, spacing_kd, SourceModel::Tls { mean_intensity })
    }

    pub fn cls(n_sources: usize, spacing_kd: T, amplitude: T) -> Result<Self> {
        Self::new(n_sources, spacing_kd, SourceModel::Cls { amplitude })
    }

    pub fn n_sources(&self) -> usize {
        self.n_sources
    }

    pub fn spacing_kd(&self) -> T {
        self.spacing_kd
    }

    pub fn source_model(&self) -> SourceModel<T> {
        self.source_model
    }

    /// Same geometry with another source model.
    pub fn with_model(&self, source_model: SourceModel<T>) -> Result<Self> {
        Self::new(self.n_sources, self.spacing_kd, source_model)
    }

    /// Mean intensity a single source contributes at any angle.
    pub fn single_source_intensity(&self) -> Option<T> {
        match self.source_model {
            SourceModel::Spe => None,
            SourceModel::Tls { mean_intensity } => Some(mean_intensity),
            SourceModel::Cls { amplitude } => Some(amplitude * amplitude),
        }
    }

    /// Phases `φ_l(θ)` for `l = 1..=N`.
    pub fn phases(&self, theta: T) -> Vec<T> {
        let s = theta.sin() * self.spacing_kd;
        (1..=self.n_sources).map(|l| -T::from_usize_exact(l) * s).collect()
    }
}

/// Ordered far-field detection angles `θ₁…θ_m` (radians).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorSet<T> {
    angles: Vec<T>,
}

impl<T: Real> DetectorSet<T> {
    pub fn new(angles: Vec<T>) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::Argument("detector set needs at least one angle".into()));
        }
        let half_pi = T::FRAC_PI_2();
        if let Some(bad) = angles.iter().find(|a| !(a.is_finite() && a.abs() < half_pi)) {
            return Err(Error::Argument(format!("detector angle {bad} outside (-π/2, π/2)")));
        }
        Ok(Self { angles })
    }

    /// `m − 1` detectors at `theta1` followed by one at `theta2`.
    pub fn coincident(m: usize, theta1: T, theta2: T) -> Result<Self> {
        if m == 0 {
            return Err(Error::Argument("order m must be ≥ 1".into()));
        }
        let mut angles = vec![theta1; m - 1];
        angles.push(theta2);
        Self::new(angles)
    }

    pub fn order(&self) -> usize {
        self.angles.len()
    }

    pub fn angles(&self) -> &[T] {
        &self.angles
    }
}

/// How the values of a [`CorrelationCurve`] are scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    #[default]
    Raw,
    MaxNormalized,
    BaselineNormalized,
}

/// Provenance of a curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveMeta<T> {
    pub n_sources: usize,
    pub order: usize,
    pub theta1: T,
    pub spacing_kd: T,
    pub source_model: SourceModel<T>,
}

/// `G^(m)` or `g^(m)` sampled along `θ₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationCurve<T> {
    theta2: Vec<T>,
    values: Vec<T>,
    stderr: Option<Vec<T>>,
    pub normalization: Normalization,
    pub meta: Option<CurveMeta<T>>,
}

impl<T: Real> CorrelationCurve<T> {
    pub fn new(theta2: Vec<T>, values: Vec<T>, stderr: Option<Vec<T>>) -> Result<Self> {
        if theta2.len() != values.len() {
            return Err(Error::Argument(format!(
                "grid has {} points but {} values",
                theta2.len(),
                values.len()
            )));
        }
        if let Some(se) = &stderr {
            if se.len() != values.len() {
                return Err(Error::Argument("stderr length differs from values".into()));
            }
            if se.iter().any(|s| !(*s >= T::zero())) {
                return Err(Error::Argument("stderr must be nonnegative".into()));
            }
        }
        if let Some(v) = values.iter().find(|v| !(**v >= T::zero())) {
            return Err(Error::Argument(format!("correlation values must be ≥ 0, got {v}")));
        }
        Ok(Self { theta2, values, stderr, normalization: Normalization::Raw, meta: None })
    }

    pub fn with_meta(mut self, meta: CurveMeta<T>) -> Self {
        self.meta = Some(meta);
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn theta2(&self) -> &[T] {
        &self.theta2
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn stderr(&self) -> Option<&[T]> {
        self.stderr.as_deref()
    }

    pub fn max_value(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn min_value(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    fn rescaled(mut self, scale: T, tag: Normalization) -> Result<Self> {
        if !(scale.is_finite() && scale > T::zero()) {
            return Err(Error::Numerical(format!("cannot normalize by {scale}")));
        }
        for v in &mut self.values {
            *v = *v / scale;
        }
        if let Some(se) = &mut self.stderr {
            for s in se.iter_mut() {
                *s = *s / scale;
            }
        }
        self.normalization = tag;
        Ok(self)
    }

    /// Divides by the curve maximum.
    pub fn max_normalized(self) -> Result<Self> {
        let m = self.max_value();
        self.rescaled(m, Normalization::MaxNormalized)
    }

    /// Divides by the curve minimum (baseline).
    pub fn baseline_normalized(self) -> Result<Self> {
        let m = self.min_value();
        self.rescaled(m, Normalization::BaselineNormalized)
    }
}

/// `φ_l(θ) = −l·kd·sin θ` for the 1-based source index `l ∈ 1..=n`.
pub fn detector_phase<T: Real>(source_index: usize, n_sources: usize, theta: T, kd: T) -> Result<T> {
    if source_index == 0 || source_index > n_sources {
        return Err(Error::Argument(format!(
            "source index {source_index} outside 1..={n_sources}"
        )));
    }
    Ok(-T::from_usize_exact(source_index) * kd * theta.sin())
}

/// `Δ = φ₁₁ − φ₁₂ = kd·(sin θ₂ − sin θ₁)`.
pub fn phase_difference<T: Real>(theta1: T, theta2: T, kd: T) -> T {
    kd * (theta2.sin() - theta1.sin())
}

/// `sin²(nΔ/2) / sin²(Δ/2)`, with the limit `n²` at `Δ ∈ 2πℤ`.
pub fn grating_factor<T: Real>(delta: T, n: usize) -> T {
    let nn = T::from_usize_exact(n);
    let half = delta / T::lit(2.0);
    let den = half.sin();
    if den.abs() < T::lit(GRATING_SINGULARITY_THRESHOLD) {
        return nn * nn;
    }
    let num = (nn * half).sin();
    let g = (num * num) / (den * den);
    // rounding can push slightly past the bound near the peak
    g.min(nn * nn).max(T::zero())
}

/// Uniform grid of `count` points on `[start, stop]`.
pub fn linspace<T: Real>(start: T, stop: T, count: usize) -> Vec<T> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / T::from_usize_exact(count - 1);
            (0..count)
                .map(|i| if i + 1 == count { stop } else { start + step * T::from_usize_exact(i) })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn detector_phase_examples() {
        assert_eq!(detector_phase(1, 3, 0.0, PI).unwrap(), 0.0);
        assert_abs_diff_eq!(detector_phase(1, 3, PI / 2.0, PI).unwrap(), -PI, epsilon = 1e-15);
        assert_abs_diff_eq!(detector_phase(3, 3, PI / 6.0, PI).unwrap(), -1.5 * PI, epsilon = 1e-14);
        assert!(matches!(detector_phase(0, 3, 0.1, PI), Err(Error::Argument(_))));
        assert!(matches!(detector_phase(4, 3, 0.1, PI), Err(Error::Argument(_))));
    }

    #[test]
    fn phase_difference_examples() {
        assert_eq!(phase_difference(0.0, 0.0, PI), 0.0);
        assert_abs_diff_eq!(phase_difference(0.0, PI / 2.0, PI), PI, epsilon = 1e-15);
        assert_abs_diff_eq!(phase_difference(-PI / 6.0, PI / 6.0, 2.0 * PI), 2.0 * PI, epsilon = 1e-14);
    }

    #[test]
    fn grating_factor_examples() {
        assert_eq!(grating_factor(0.0, 5), 25.0);
        assert_abs_diff_eq!(grating_factor(PI, 2), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(grating_factor(PI / 2.0, 2), 2.0, epsilon = 1e-14);
        assert_eq!(grating_factor(4.0 * PI, 3), 9.0);
        assert_eq!(grating_factor(0.0f32, 4), 16.0f32);
    }

    #[test]
    fn chain_validation() {
        assert!(EmitterChain::spe(0, PI).is_err());
        assert!(EmitterChain::spe(2, 0.0).is_err());
        assert!(EmitterChain::tls(2, PI, 0.0).is_err());
        assert!(EmitterChain::cls(2, PI, -1.0).is_err());
        assert!(EmitterChain::cls(2, f64::NAN, 1.0).is_err());
        let c = EmitterChain::tls(3, PI, 2.0).unwrap();
        assert_eq!(c.single_source_intensity(), Some(2.0));
        assert_eq!(c.phases(0.0), vec![-0.0, -0.0, -0.0]);
    }

    #[test]
    fn detector_set_validation() {
        assert!(DetectorSet::<f64>::new(vec![]).is_err());
        assert!(DetectorSet::new(vec![0.0, PI / 2.0]).is_err());
        assert!(DetectorSet::new(vec![0.0, f64::INFINITY]).is_err());
        let d = DetectorSet::coincident(4, 0.1, -0.2).unwrap();
        assert_eq!(d.angles(), &[0.1, 0.1, 0.1, -0.2]);
    }

    #[test]
    fn curve_validation_and_normalization() {
        assert!(CorrelationCurve::new(vec![0.0, 1.0], vec![1.0], None).is_err());
        assert!(CorrelationCurve::new(vec![0.0], vec![-1.0], None).is_err());
        assert!(CorrelationCurve::new(vec![0.0], vec![1.0], Some(vec![1.0, 2.0])).is_err());
        let c = CorrelationCurve::new(vec![0.0, 1.0, 2.0], vec![2.0, 4.0, 1.0], Some(vec![0.2, 0.4, 0.1]))
            .unwrap()
            .max_normalized()
            .unwrap();
        assert_eq!(c.values(), &[0.5, 1.0, 0.25]);
        assert_eq!(c.stderr().unwrap(), &[0.05, 0.1, 0.025]);
        assert_eq!(c.normalization, Normalization::MaxNormalized);
        let flat = CorrelationCurve::new(vec![0.0], vec![0.0], None).unwrap();
        assert!(flat.max_normalized().is_err());
    }

    #[test]
    fn grating_singularity_second_order_error_is_tiny() {
        // just past the threshold the closed form is already n² to 1e-12
        for n in [2usize, 5, 16] {
            let d = 2.0 * 1.1e-9;
            let g = grating_factor(d, n);
            let n2 = (n * n) as f64;
            assert!((g - n2).abs() <= 1e-12 * n2, "n={n}: {g}");
        }
    }

    proptest! {
        #[test]
        fn grating_even_periodic_and_bounded(delta in -20.0f64..20.0, n in 1usize..=16) {
            let g = grating_factor(delta, n);
            let n2 = (n * n) as f64;
            prop_assert!(g >= 0.0 && g <= n2);
            prop_assert!((g - grating_factor(-delta, n)).abs() <= 1e-9 * n2);
            prop_assert!((g - grating_factor(delta + 2.0 * PI, n)).abs() <= 1e-7 * n2);
        }

        #[test]
        fn grating_of_single_source_is_one(delta in -20.0f64..20.0) {
            prop_assert!((grating_factor(delta, 1) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn grating_reaches_n2_only_on_lattice(q in -3i32..=3, n in 2usize..=16, off in 0.01f64..6.27) {
            let n2 = (n * n) as f64;
            prop_assert_eq!(grating_factor(2.0 * PI * q as f64, n), n2);
            prop_assert!(grating_factor(2.0 * PI * q as f64 + off, n) < n2);
        }

        #[test]
        fn detector_phase_is_linear(l in 1usize..=8, theta in -1.5f64..1.5, kd in 0.1f64..10.0) {
            let p1 = detector_phase(1, 8, theta, kd).unwrap();
            let pl = detector_phase(l, 8, theta, kd).unwrap();
            prop_assert!((pl - l as f64 * p1).abs() <= 1e-12 * pl.abs().max(1.0));
            let p2 = detector_phase(l, 8, theta, 2.0 * kd).unwrap();
            prop_assert!((p2 - 2.0 * pl).abs() <= 1e-12 * p2.abs().max(1.0));
        }
    }
}
