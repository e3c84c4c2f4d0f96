//! Synthetic camera-frame experiment and its analysis: frame synthesis,
//! frame-stack correlation, the offset + prefactor least-squares fit, and
//! curve metrics (visibility, FWHM, peak position).

use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CorrelationCurve, CurveMeta, EmitterChain};
use crate::scalar::{CompensatedSum, Real};
use crate::stochastic::{
    batch_mean_stderr, estimate_normalized_moments, sample_with, BatchedEstimate, PhaseTable,
    RngContract, BATCHES,
};

/// Optional effects applied while rendering frames.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FrameOptions<T> {
    /// Slit width over slit spacing `a/d`; multiplies the intensity by the
    /// single-slit envelope `sinc²((a/d)·kd·sinθ/2)`.
    pub envelope: Option<T>,
    /// Mean photon count per pixel; adds Poisson counting noise.
    pub shot_noise: Option<T>,
}

/// Everything needed to regenerate a synthetic stack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StackMeta<T> {
    pub chain: EmitterChain<T>,
    pub seed: u64,
    pub options: FrameOptions<T>,
}

/// `frames × pixels` intensities, frame-major, with the angle of each pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameStack<T> {
    pixels: usize,
    frames: usize,
    intensities: Vec<T>,
    pixel_angles: Vec<T>,
    pub meta: Option<StackMeta<T>>,
}

impl<T: Real> FrameStack<T> {
    pub fn new(pixel_angles: Vec<T>, frames: usize, intensities: Vec<T>) -> Result<Self> {
        let pixels = pixel_angles.len();
        if pixels == 0 || frames == 0 {
            return Err(Error::Argument("a frame stack needs at least one pixel and one frame".into()));
        }
        if intensities.len() != pixels * frames {
            return Err(Error::Argument(format!(
                "{} intensities do not fill {frames} frames of {pixels} pixels",
                intensities.len()
            )));
        }
        check_increasing(&pixel_angles, "pixel angles")?;
        if let Some(i) = intensities.iter().position(|v| !(*v >= T::zero() && v.is_finite())) {
            return Err(Error::Argument(format!("intensity #{i} is negative or not finite")));
        }
        Ok(Self { pixels, frames, intensities, pixel_angles, meta: None })
    }

    pub fn pixels(&self) -> usize {
        self.pixels
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn pixel_angles(&self) -> &[T] {
        &self.pixel_angles
    }

    pub fn intensities(&self) -> &[T] {
        &self.intensities
    }

    pub fn frame(&self, r: usize) -> &[T] {
        &self.intensities[r * self.pixels..(r + 1) * self.pixels]
    }

    /// Pixel whose angle is closest to zero.
    pub fn auto_reference_pixel(&self) -> usize {
        self.pixel_angles
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).expect("angles are finite"))
            .map(|(i, _)| i)
            .expect("stack has pixels")
    }
}

fn check_increasing<T: Real>(xs: &[T], what: &str) -> Result<()> {
    if xs.iter().any(|x| !x.is_finite()) || xs.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Argument(format!("{what} must be finite and strictly increasing")));
    }
    Ok(())
}

/// `sinc²(x) = (sin x / x)²`.
fn sinc_sq<T: Real>(x: T) -> T {
    if x.abs() < T::lit(1e-8) {
        return T::one();
    }
    let s = x.sin() / x;
    s * s
}

/// Single-slit intensity envelope for slit width ratio `a/d`.
pub fn slit_envelope<T: Real>(slit_ratio: T, kd: T, theta: T) -> T {
    sinc_sq(slit_ratio * kd * theta.sin() / T::lit(2.0))
}

/// Renders `frames` speckle frames on `pixel_angles`. Frame `r` uses the
/// random stream `(seed, r)`; counting noise, when enabled, continues the
/// same stream after the field amplitudes.
pub fn synthesize_frames<T: Real>(
    chain: &EmitterChain<T>,
    pixel_angles: &[T],
    frames: usize,
    seed: u64,
    options: FrameOptions<T>,
) -> Result<FrameStack<T>> {
    let single = chain.single_source_intensity().ok_or_else(|| {
        Error::Domain("frame synthesis needs thermal or coherent sources; SPE curves come from the quantum engines".into())
    })?;
    if frames == 0 || pixel_angles.is_empty() {
        return Err(Error::Argument("need at least one frame and one pixel".into()));
    }
    check_increasing(pixel_angles, "pixel angles")?;
    if let Some(a) = options.envelope {
        if !(a > T::zero() && a.is_finite()) {
            return Err(Error::Argument(format!("slit ratio must be > 0, got {a}")));
        }
    }
    let count_scale = match options.shot_noise {
        Some(c) if !(c > T::zero() && c.is_finite()) => {
            return Err(Error::Argument(format!("mean photon count must be > 0, got {c}")))
        }
        Some(c) => Some(c.as_f64() / (T::from_usize_exact(chain.n_sources()) * single).as_f64()),
        None => None,
    };
    let kd = chain.spacing_kd();
    let table = PhaseTable::new(chain.n_sources(), kd, pixel_angles);
    let envelope: Option<Vec<T>> =
        options.envelope.map(|a| pixel_angles.iter().map(|&t| slit_envelope(a, kd, t)).collect());
    let pixels = pixel_angles.len();
    let mut intensities = vec![T::zero(); pixels * frames];
    intensities.par_chunks_mut(pixels).enumerate().try_for_each(|(r, out)| -> Result<()> {
        let mut rng = RngContract::new(seed, r as u64).rng();
        let field = sample_with(chain, &mut rng)?;
        table.intensities_into(&field, out);
        if let Some(env) = &envelope {
            for (o, e) in out.iter_mut().zip(env) {
                *o = *o * *e;
            }
        }
        if let Some(scale) = count_scale {
            for o in out.iter_mut() {
                let lambda = o.as_f64() * scale;
                let counts = if lambda > 0.0 {
                    Poisson::new(lambda).map_err(|e| Error::Numerical(e.to_string()))?.sample(&mut rng)
                } else {
                    0.0
                };
                *o = T::lit(counts / scale);
            }
        }
        Ok(())
    })?;
    let mut stack = FrameStack::new(pixel_angles.to_vec(), frames, intensities)?;
    stack.meta = Some(StackMeta { chain: *chain, seed, options });
    Ok(stack)
}

/// Per-pixel mean intensity with batch-means standard errors.
pub fn mean_intensity_profile<T: Real>(stack: &FrameStack<T>) -> Result<CorrelationCurve<T>> {
    if stack.frames() < BATCHES {
        return Err(Error::Argument(format!("need at least {BATCHES} frames")));
    }
    let r = stack.frames();
    let (values, stderr): (Vec<T>, Vec<T>) = (0..stack.pixels())
        .into_par_iter()
        .map(|p| {
            let batch_means: Vec<T> = (0..BATCHES)
                .map(|b| {
                    let (lo, hi) = (b * r / BATCHES, (b + 1) * r / BATCHES);
                    let s: CompensatedSum<T> = (lo..hi).map(|f| stack.frame(f)[p]).collect();
                    s.value() / T::from_usize_exact(hi - lo)
                })
                .collect();
            let all: CompensatedSum<T> = (0..r).map(|f| stack.frame(f)[p]).collect();
            (all.value() / T::from_usize_exact(r), batch_mean_stderr(&batch_means).1)
        })
        .unzip();
    CorrelationCurve::new(stack.pixel_angles().to_vec(), values, Some(stderr))
}

/// `g^(m)` of every pixel against `ref_pixel` (nearest-to-zero pixel when `None`).
pub fn correlate_frames<T: Real>(
    stack: &FrameStack<T>,
    ref_pixel: Option<usize>,
    m: usize,
) -> Result<CorrelationCurve<T>> {
    let (est, reference) = correlate_frames_batched(stack, ref_pixel, m)?;
    let mut curve = CorrelationCurve::new(stack.pixel_angles().to_vec(), est.values, Some(est.stderr))?;
    if let Some(meta) = &stack.meta {
        curve = curve.with_meta(CurveMeta {
            n_sources: meta.chain.n_sources(),
            order: m,
            theta1: stack.pixel_angles()[reference],
            spacing_kd: meta.chain.spacing_kd(),
            source_model: meta.chain.source_model(),
        });
    }
    Ok(curve)
}

/// [`correlate_frames`] keeping per-batch estimates; also returns the
/// reference pixel used.
pub fn correlate_frames_batched<T: Real>(
    stack: &FrameStack<T>,
    ref_pixel: Option<usize>,
    m: usize,
) -> Result<(BatchedEstimate<T>, usize)> {
    if m == 0 {
        return Err(Error::Argument("order m must be ≥ 1".into()));
    }
    let reference = ref_pixel.unwrap_or_else(|| stack.auto_reference_pixel());
    if reference >= stack.pixels() {
        return Err(Error::Argument(format!(
            "reference pixel {reference} outside 0..{}",
            stack.pixels()
        )));
    }
    if stack.frames() < 2 {
        return Err(Error::Argument("need at least two frames".into()));
    }
    let est = estimate_normalized_moments(stack.frames(), stack.pixels(), m, |r, out| {
        let frame = stack.frame(r);
        out.copy_from_slice(frame);
        Ok(frame[reference])
    })
    .map_err(|e| match e {
        Error::Numerical(msg) => Error::Numerical(msg.replace("point", "pixel")),
        other => other,
    })?;
    Ok((est, reference))
}

/// Least-squares weighting of [`fit_offset_prefactor`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitWeighting {
    #[default]
    Unweighted,
    /// Weights `1/stderr²` from the data curve.
    InverseVariance,
}

/// `data ≈ offset + prefactor·template`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult<T> {
    pub offset: T,
    pub prefactor: T,
    pub residual_rms: T,
    /// Standard errors of `(offset, prefactor)`.
    pub parameter_stderr: (T, T),
}

fn check_same_grid<T: Real>(a: &[T], b: &[T]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Argument(format!("grids differ in length ({} vs {})", a.len(), b.len())));
    }
    let tol = T::lit(1e-9);
    if let Some(i) = a.iter().zip(b).position(|(x, y)| (*x - *y).abs() > tol * T::one().max(x.abs())) {
        return Err(Error::Argument(format!("grids differ at point {i}")));
    }
    Ok(())
}

fn solve_fit<T: Real>(y: &[T], x: &[T], w: Option<&[T]>) -> Result<FitResult<T>> {
    let n = y.len();
    let weight = |i: usize| w.map_or(T::one(), |w| w[i]);
    let sw: T = crate::scalar::compensated_sum((0..n).map(weight));
    let x_mean = crate::scalar::compensated_sum((0..n).map(|i| weight(i) * x[i])) / sw;
    let y_mean = crate::scalar::compensated_sum((0..n).map(|i| weight(i) * y[i])) / sw;
    let sxx = crate::scalar::compensated_sum((0..n).map(|i| weight(i) * (x[i] - x_mean).powi(2)));
    let scale = crate::scalar::compensated_sum((0..n).map(|i| weight(i) * x[i] * x[i]));
    if !(sxx > T::lit(1e-12) * scale) {
        return Err(Error::DegenerateDesign("template is constant over the grid".into()));
    }
    let sxy = crate::scalar::compensated_sum((0..n).map(|i| weight(i) * (x[i] - x_mean) * (y[i] - y_mean)));
    let prefactor = sxy / sxx;
    let offset = y_mean - prefactor * x_mean;
    let residuals: Vec<T> = (0..n).map(|i| y[i] - offset - prefactor * x[i]).collect();
    let residual_rms =
        (residuals.iter().map(|r| *r * *r).sum::<T>() / T::from_usize_exact(n)).sqrt();
    // known errors fix the noise scale; otherwise estimate it from the residuals
    let noise_var = match w {
        Some(_) => T::one(),
        None if n > 2 => residuals.iter().map(|r| *r * *r).sum::<T>() / T::from_usize_exact(n - 2),
        None => T::zero(),
    };
    let se_prefactor = (noise_var / sxx).sqrt();
    let se_offset = (noise_var * (T::one() / sw + x_mean * x_mean / sxx)).sqrt();
    Ok(FitResult { offset, prefactor, residual_rms, parameter_stderr: (se_offset, se_prefactor) })
}

/// Closed-form linear least squares of `data` against `offset + prefactor·template`.
pub fn fit_offset_prefactor<T: Real>(
    data: &CorrelationCurve<T>,
    template: &CorrelationCurve<T>,
    weighting: FitWeighting,
) -> Result<FitResult<T>> {
    check_same_grid(data.theta2(), template.theta2())?;
    if data.is_empty() {
        return Err(Error::Argument("empty curves".into()));
    }
    let weights: Option<Vec<T>> = match weighting {
        FitWeighting::Unweighted => None,
        FitWeighting::InverseVariance => {
            let se = data
                .stderr()
                .ok_or_else(|| Error::Argument("weighted fit needs data standard errors".into()))?;
            if se.iter().any(|s| !(*s > T::zero())) {
                return Err(Error::Argument("weighted fit needs strictly positive standard errors".into()));
            }
            Some(se.iter().map(|s| T::one() / (*s * *s)).collect())
        }
    };
    solve_fit(data.values(), template.values(), weights.as_deref())
}

/// Fit of the full-sample curve, with parameter standard errors taken from
/// the spread of the same fit applied to each batch estimate. Unlike the
/// pointwise formula this captures errors shared across grid points.
pub fn fit_with_batch_errors<T: Real>(
    data: &CorrelationCurve<T>,
    batches: &[Vec<T>],
    template: &CorrelationCurve<T>,
    weighting: FitWeighting,
) -> Result<FitResult<T>> {
    let central = fit_offset_prefactor(data, template, weighting)?;
    if batches.len() < 2 {
        return Err(Error::Argument("need at least two batches".into()));
    }
    let mut offsets = Vec::with_capacity(batches.len());
    let mut prefactors = Vec::with_capacity(batches.len());
    for b in batches {
        if b.len() != template.len() {
            return Err(Error::Argument("batch length differs from the template".into()));
        }
        let w: Option<Vec<T>> = match weighting {
            FitWeighting::Unweighted => None,
            FitWeighting::InverseVariance => {
                data.stderr().map(|se| se.iter().map(|s| T::one() / (*s * *s)).collect())
            }
        };
        let f = solve_fit(b, template.values(), w.as_deref())?;
        offsets.push(f.offset);
        prefactors.push(f.prefactor);
    }
    Ok(FitResult {
        parameter_stderr: (batch_mean_stderr(&offsets).1, batch_mean_stderr(&prefactors).1),
        ..central
    })
}

/// Visibility, FWHM and peak position of a curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveMetrics<T> {
    pub visibility: T,
    pub fwhm: T,
    pub peak_position: T,
}

/// `(max − min)/(max + min)`; zero for a flat or all-zero curve.
pub fn visibility<T: Real>(curve: &CorrelationCurve<T>) -> T {
    let (hi, lo) = (curve.max_value(), curve.min_value());
    if hi + lo > T::zero() {
        (hi - lo) / (hi + lo)
    } else {
        T::zero()
    }
}

fn crossing<T: Real>(x0: T, y0: T, x1: T, y1: T, level: T) -> T {
    x0 + (level - y0) * (x1 - x0) / (y1 - y0)
}

/// Visibility, full width at half height above the curve minimum (linear
/// interpolation) and the parabolically refined position of the maximum.
pub fn curve_metrics<T: Real>(curve: &CorrelationCurve<T>) -> Result<CurveMetrics<T>> {
    if curve.is_empty() {
        return Err(Error::Argument("empty curve".into()));
    }
    let (x, y) = (curve.theta2(), curve.values());
    check_increasing(x, "curve grid")?;
    let (hi, lo) = (curve.max_value(), curve.min_value());
    if !(hi - lo > T::lit(1e-12) * hi.abs()) {
        return Err(Error::Numerical("flat curve: visibility 0, FWHM undefined".into()));
    }
    let imax = y.iter().position(|&v| v == hi).expect("maximum is attained");
    let half = lo + (hi - lo) / T::lit(2.0);

    let left = (0..imax).rev().find(|&i| y[i] <= half).map(|i| crossing(x[i], y[i], x[i + 1], y[i + 1], half));
    let right = (imax + 1..y.len()).find(|&i| y[i] <= half).map(|i| crossing(x[i - 1], y[i - 1], x[i], y[i], half));
    let (Some(left), Some(right)) = (left, right) else {
        return Err(Error::Numerical("half maximum is not bracketed on both sides of the peak".into()));
    };

    let peak_position = if imax == 0 || imax + 1 == y.len() {
        x[imax]
    } else {
        let (x0, x1, x2) = (x[imax - 1], x[imax], x[imax + 1]);
        let (y0, y1, y2) = (y[imax - 1], y[imax], y[imax + 1]);
        let num = (x1 - x0).powi(2) * (y1 - y2) - (x1 - x2).powi(2) * (y1 - y0);
        let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
        if den == T::zero() {
            x1
        } else {
            x1 - num / (den * T::lit(2.0))
        }
    };
    Ok(CurveMetrics { visibility: visibility(curve), fwhm: right - left, peak_position })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{analytic_curve, CurveOptions};
    use crate::model::linspace;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn curve(x: Vec<f64>, y: Vec<f64>) -> CorrelationCurve<f64> {
        CorrelationCurve::new(x, y, None).unwrap()
    }

    #[test]
    fn stack_validation() {
        assert!(FrameStack::new(vec![0.0, 1.0], 2, vec![1.0; 3]).is_err());
        assert!(FrameStack::new(vec![1.0, 0.0], 1, vec![1.0; 2]).is_err());
        assert!(FrameStack::new(vec![0.0, 1.0], 1, vec![1.0, -1.0]).is_err());
        let s = FrameStack::new(vec![-0.3, -0.1, 0.2], 1, vec![1.0; 3]).unwrap();
        assert_eq!(s.auto_reference_pixel(), 1);
    }

    #[test]
    fn constant_frames_correlate_to_exactly_one() {
        for c in [1.0, 0.37, 123.456, 1e-3] {
            let stack = FrameStack::new(linspace(-1.0, 1.0, 7), 50, vec![c; 350]).unwrap();
            for m in 1..=5 {
                let g = correlate_frames(&stack, None, m).unwrap();
                assert!(g.values().iter().all(|&v| v == 1.0), "c={c} m={m}: {:?}", g.values());
            }
        }
    }

    #[test]
    fn first_order_is_exactly_one() {
        let chain = EmitterChain::tls(3, PI, 1.0).unwrap();
        let stack = synthesize_frames(&chain, &linspace(-1.0, 1.0, 9), 100, 3, FrameOptions::default()).unwrap();
        let g = correlate_frames(&stack, Some(2), 1).unwrap();
        assert!(g.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn zero_pixel_is_reported() {
        let mut data = vec![1.0; 3 * 40];
        for f in 0..40 {
            data[f * 3 + 2] = 0.0;
        }
        let stack = FrameStack::new(vec![0.0, 0.1, 0.2], 40, data).unwrap();
        let err = correlate_frames(&stack, Some(0), 2).unwrap_err();
        assert!(matches!(&err, Error::Numerical(msg) if msg.contains("pixel 2")), "{err}");
        assert!(correlate_frames(&stack, Some(3), 2).is_err());
    }

    #[test]
    fn pixel_exchange_symmetry_for_second_order() {
        let chain = EmitterChain::tls(3, PI, 1.0).unwrap();
        let stack = synthesize_frames(&chain, &linspace(-1.0, 1.0, 9), 400, 8, FrameOptions::default()).unwrap();
        let (r, p) = (2, 6);
        let a = correlate_frames(&stack, Some(r), 2).unwrap().values()[p];
        let b = correlate_frames(&stack, Some(p), 2).unwrap().values()[r];
        assert_eq!(a, b);
    }

    #[test]
    fn synthesis_is_deterministic() {
        let chain = EmitterChain::cls(3, PI, 1.0).unwrap();
        let grid = linspace(-1.0, 1.0, 16);
        let opts = FrameOptions { envelope: Some(0.125), shot_noise: Some(50.0) };
        let a = synthesize_frames(&chain, &grid, 64, 42, opts).unwrap();
        let b = synthesize_frames(&chain, &grid, 64, 42, opts).unwrap();
        let c = synthesize_frames(&chain, &grid, 64, 43, opts).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.intensities(), c.intensities());
        assert!(synthesize_frames(&EmitterChain::spe(2, PI).unwrap(), &grid, 4, 1, FrameOptions::default()).is_err());
    }

    #[test]
    fn envelope_has_first_zero_where_expected() {
        // a/d = 1/8, kd = π: first zero at kd·sinθ = 2π·8, unreachable; use kd = 40π
        let ratio = 0.125;
        let kd = 40.0 * PI;
        let theta_zero = (2.0 * PI / ratio / kd).asin();
        assert_abs_diff_eq!(slit_envelope(ratio, kd, theta_zero), 0.0, epsilon = 1e-20);
        assert_eq!(slit_envelope(ratio, kd, 0.0), 1.0);
        assert!(slit_envelope(ratio, kd, theta_zero * 0.5) > 0.3);
    }

    #[test]
    fn envelope_shapes_mean_intensity() {
        let chain = EmitterChain::tls(2, 40.0 * PI, 1.0).unwrap();
        let grid = linspace(-0.2, 0.2, 21);
        let plain = synthesize_frames(&chain, &grid, 200, 5, FrameOptions::default()).unwrap();
        let shaped =
            synthesize_frames(&chain, &grid, 200, 5, FrameOptions { envelope: Some(0.125), shot_noise: None }).unwrap();
        for (p, &t) in grid.iter().enumerate() {
            let e = slit_envelope(0.125, 40.0 * PI, t);
            assert_abs_diff_eq!(shaped.frame(7)[p], plain.frame(7)[p] * e, epsilon = 1e-12);
        }
    }

    #[test]
    fn fit_recovers_exact_linear_relation() {
        let x: Vec<f64> = linspace(-1.0, 1.0, 41);
        let t: Vec<f64> = x.iter().map(|v| 1.0 + (3.0 * *v).cos().powi(2)).collect();
        let template = curve(x.clone(), t.clone());
        let data = curve(x.clone(), t.iter().map(|v| 3.0 + 2.0 * v).collect());
        let f = fit_offset_prefactor(&data, &template, FitWeighting::Unweighted).unwrap();
        assert_abs_diff_eq!(f.offset, 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(f.prefactor, 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(f.residual_rms, 0.0, epsilon = 1e-9);
        let id = fit_offset_prefactor(&template, &template, FitWeighting::Unweighted).unwrap();
        assert_abs_diff_eq!(id.offset, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(id.prefactor, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn fit_errors() {
        let x: Vec<f64> = linspace(0.0, 1.0, 5);
        let flat = curve(x.clone(), vec![2.0; 5]);
        let data = curve(x.clone(), vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        assert!(matches!(
            fit_offset_prefactor(&data, &flat, FitWeighting::Unweighted),
            Err(Error::DegenerateDesign(_))
        ));
        let other = curve(linspace(0.0, 2.0, 5), vec![1.0; 5]);
        assert!(matches!(fit_offset_prefactor(&data, &other, FitWeighting::Unweighted), Err(Error::Argument(_))));
        assert!(fit_offset_prefactor(&data, &data, FitWeighting::InverseVariance).is_err());
    }

    #[test]
    fn fit_residuals_are_orthogonal() {
        let x: Vec<f64> = linspace(-1.0, 1.0, 33);
        let t: Vec<f64> = x.iter().map(|v| (2.0 * *v).sin().powi(2)).collect();
        let y: Vec<f64> = x.iter().zip(&t).map(|(v, tv)| 0.5 + 1.5 * tv + 0.1 * (17.0 * *v).sin()).collect();
        let f = fit_offset_prefactor(&curve(x.clone(), y.clone()), &curve(x.clone(), t.clone()), FitWeighting::Unweighted)
            .unwrap();
        let r: Vec<f64> = y.iter().zip(&t).map(|(yv, tv)| yv - f.offset - f.prefactor * tv).collect();
        let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let dot1: f64 = r.iter().sum();
        let dot_t: f64 = r.iter().zip(&t).map(|(a, b)| a * b).sum();
        assert!(dot1.abs() < 1e-8 * norm(&r) * (x.len() as f64).sqrt());
        assert!(dot_t.abs() < 1e-8 * norm(&r) * norm(&t));
        assert!(f.parameter_stderr.0 > 0.0 && f.parameter_stderr.1 > 0.0);
    }

    #[test]
    fn weighted_fit_uses_known_errors() {
        let x: Vec<f64> = linspace(-1.0, 1.0, 21);
        let t: Vec<f64> = x.iter().map(|v| v * v).collect();
        let y: Vec<f64> = t.iter().map(|v| 1.0 + 2.0 * v).collect();
        let data = CorrelationCurve::new(x.clone(), y, Some(vec![0.1; 21])).unwrap();
        let f = fit_offset_prefactor(&data, &curve(x, t.clone()), FitWeighting::InverseVariance).unwrap();
        assert_abs_diff_eq!(f.prefactor, 2.0, epsilon = 1e-12);
        // σ² / Σ(t − t̄)²
        let tm = t.iter().sum::<f64>() / 21.0;
        let sxx: f64 = t.iter().map(|v| (v - tm).powi(2)).sum();
        assert_abs_diff_eq!(f.parameter_stderr.1, 0.1 / sxx.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn metrics_examples() {
        // the N = 2 zeros sit at θ₂ = ±π/2 for kd = π
        let grid = linspace(-PI / 2.0, PI / 2.0, 2001);
        let c = analytic_curve(&EmitterChain::spe(2, PI).unwrap(), 2, 0.0, &grid, CurveOptions::default()).unwrap();
        assert_abs_diff_eq!(curve_metrics(&c).unwrap().visibility, 1.0, epsilon = 1e-9);
        let c = analytic_curve(&EmitterChain::tls(2, PI, 1.0).unwrap(), 2, 0.0, &grid, CurveOptions::default()).unwrap();
        assert_abs_diff_eq!(curve_metrics(&c).unwrap().visibility, 1.0 / 3.0, epsilon = 1e-9);

        let spe10 = EmitterChain::spe(10, PI).unwrap();
        let c = analytic_curve(&spe10, 10, 0.0, &linspace(-0.6, 0.6, 1201), CurveOptions::default()).unwrap();
        let m = curve_metrics(&c).unwrap();
        assert_abs_diff_eq!(m.peak_position, 0.0, epsilon = 1e-9);
        assert!((m.fwhm / 0.2 - 1.0).abs() < 0.15, "fwhm {}", m.fwhm);

        let flat = curve(linspace(0.0, 1.0, 5), vec![1.0; 5]);
        assert_eq!(visibility(&flat), 0.0);
        assert!(matches!(curve_metrics(&flat), Err(Error::Numerical(_))));
    }

    #[test]
    fn parabolic_peak_refinement() {
        let x: Vec<f64> = linspace(-1.0, 1.0, 21);
        let y: Vec<f64> = x.iter().map(|v: &f64| 5.0 + (v - 0.033).powi(2)).collect();
        // maximum on the boundary, half height never crossed to its left
        assert!(curve_metrics(&curve(x.clone(), y)).is_err());
        let y: Vec<f64> = x.iter().map(|v| (10.0 - 40.0 * (v - 0.033).powi(2)).max(0.0)).collect();
        let m = curve_metrics(&curve(x, y)).unwrap();
        assert_abs_diff_eq!(m.peak_position, 0.033, epsilon = 1e-12);
    }
}
