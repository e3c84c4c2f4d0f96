//! Monte Carlo synthesis of thermal (TLS) and coherent (CLS) source fields,
//! far-field speckle intensities and normalized intensity-moment
//! estimates, plus exact oracles for both source models.
//!
//! Each realization is one frozen speckle pattern: every source gets one
//! complex amplitude, drawn from a stream that depends only on
//! `(master_seed, realization_index)`. Sums are formed per fixed-size chunk
//! and merged in index order, so results do not depend on the number of
//! rayon workers.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CorrelationCurve, CurveMeta, EmitterChain, SourceModel};
use crate::quantum::{permanent, SquareMatrix};
use crate::scalar::{cis, CompensatedSum, Real};

/// Number of batches used for batch-means standard errors.
pub const BATCHES: usize = 20;

/// Realizations handled by one work unit.
const CHUNK: usize = 512;

/// Seed and index that fully determine one realization's random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngContract {
    pub master_seed: u64,
    pub realization_index: u64,
}

impl RngContract {
    pub fn new(master_seed: u64, realization_index: u64) -> Self {
        Self { master_seed, realization_index }
    }

    /// ChaCha8 keyed by the master seed, one stream per realization.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.realization_index);
        rng
    }
}

/// One complex amplitude per source.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldRealization<T> {
    pub amplitudes: Vec<Complex<T>>,
}

fn require_classical<T: Real>(chain: &EmitterChain<T>) -> Result<()> {
    if chain.source_model() == SourceModel::Spe {
        return Err(Error::Domain(
            "single-photon emitters have no classical field; use the quantum engines".into(),
        ));
    }
    Ok(())
}

/// Draws amplitudes from an already-positioned generator.
pub fn sample_with<T: Real, R: rand::Rng + ?Sized>(chain: &EmitterChain<T>, rng: &mut R) -> Result<FieldRealization<T>> {
    let n = chain.n_sources();
    let amplitudes = match chain.source_model() {
        SourceModel::Spe => return Err(Error::Domain("cannot sample SPE amplitudes".into())),
        SourceModel::Tls { mean_intensity } => {
            // circular Gaussian, ⟨|a|²⟩ = mean_intensity
            let sigma = (mean_intensity / T::lit(2.0)).sqrt();
            (0..n)
                .map(|_| {
                    let re = T::sample_standard_normal(rng);
                    let im = T::sample_standard_normal(rng);
                    Complex::new(re * sigma, im * sigma)
                })
                .collect()
        }
        SourceModel::Cls { amplitude } => {
            (0..n).map(|_| cis(T::TAU() * T::sample_unit(rng)) * amplitude).collect()
        }
    };
    Ok(FieldRealization { amplitudes })
}

/// One realization, a pure function of the chain and `contract`.
pub fn sample_realization<T: Real>(chain: &EmitterChain<T>, contract: &RngContract) -> Result<FieldRealization<T>> {
    require_classical(chain)?;
    sample_with(chain, &mut contract.rng())
}

/// Precomputed `e^{−iφ_l(θ)}` for a list of angles.
#[derive(Debug, Clone)]
pub struct PhaseTable<T> {
    n_sources: usize,
    factors: Vec<Complex<T>>,
}

impl<T: Real> PhaseTable<T> {
    pub fn new(n_sources: usize, kd: T, angles: &[T]) -> Self {
        let mut factors = Vec::with_capacity(angles.len() * n_sources);
        for &theta in angles {
            let s = kd * theta.sin();
            factors.extend((1..=n_sources).map(|l| cis(T::from_usize_exact(l) * s)));
        }
        Self { n_sources, factors }
    }

    pub fn len(&self) -> usize {
        self.factors.len() / self.n_sources.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Intensity at the `point`-th angle.
    #[inline]
    pub fn intensity(&self, realization: &FieldRealization<T>, point: usize) -> T {
        let row = &self.factors[point * self.n_sources..(point + 1) * self.n_sources];
        let field = row
            .iter()
            .zip(&realization.amplitudes)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (w, a)| acc + w * a);
        field.norm_sqr()
    }

    pub fn intensities_into(&self, realization: &FieldRealization<T>, out: &mut [T]) {
        for (p, o) in out.iter_mut().enumerate() {
            *o = self.intensity(realization, p);
        }
    }
}

/// `I(θ) = |Σ_l a_l e^{−iφ_l(θ)}|²`.
pub fn farfield_intensity<T: Real>(realization: &FieldRealization<T>, theta: T, kd: T) -> T {
    PhaseTable::new(realization.amplitudes.len(), kd, &[theta]).intensity(realization, 0)
}

/// Running sums for `⟨I_ref^{m−1} I_p⟩`, `⟨I_ref⟩` and `⟨I_p⟩` over one batch.
///
/// Sums are of deviations from a fixed shift (the first realization's
/// values), which keeps constant inputs exact.
#[derive(Debug, Clone)]
pub(crate) struct MomentSums<T> {
    count: usize,
    reference: CompensatedSum<T>,
    points: Vec<CompensatedSum<T>>,
    cross: Vec<CompensatedSum<T>>,
}

#[derive(Debug, Clone)]
pub(crate) struct Shift<T> {
    reference: T,
    points: Vec<T>,
    cross: Vec<T>,
}

impl<T: Real> Shift<T> {
    fn new(order: usize, reference: T, points: &[T]) -> Self {
        let w = reference.powi(order as i32 - 1);
        Self { reference, points: points.to_vec(), cross: points.iter().map(|&p| w * p).collect() }
    }
}

impl<T: Real> MomentSums<T> {
    fn new(n_points: usize) -> Self {
        Self {
            count: 0,
            reference: CompensatedSum::new(),
            points: vec![CompensatedSum::new(); n_points],
            cross: vec![CompensatedSum::new(); n_points],
        }
    }

    #[inline]
    fn add(&mut self, order: usize, shift: &Shift<T>, reference: T, points: &[T]) {
        self.count += 1;
        self.reference.add(reference - shift.reference);
        let w = reference.powi(order as i32 - 1);
        for (p, &i) in points.iter().enumerate() {
            self.points[p].add(i - shift.points[p]);
            self.cross[p].add(w * i - shift.cross[p]);
        }
    }

    fn merge(&mut self, other: &Self) {
        self.count += other.count;
        self.reference.merge(&other.reference);
        for (a, b) in self.points.iter_mut().zip(&other.points) {
            a.merge(b);
        }
        for (a, b) in self.cross.iter_mut().zip(&other.cross) {
            a.merge(b);
        }
    }

    /// Normalized moment per point; `Err(p)` names the first point with zero mean.
    fn normalized(&self, order: usize, shift: &Shift<T>) -> std::result::Result<Vec<T>, Option<usize>> {
        let r = T::from_usize_exact(self.count);
        let mean_ref = shift.reference + self.reference.value() / r;
        if !(mean_ref > T::zero()) {
            return Err(None);
        }
        let w = mean_ref.powi(order as i32 - 1);
        (0..self.points.len())
            .map(|p| {
                let mean_p = shift.points[p] + self.points[p].value() / r;
                if !(mean_p > T::zero()) {
                    return Err(Some(p));
                }
                let mean_cross = shift.cross[p] + self.cross[p].value() / r;
                Ok(mean_cross / (w * mean_p))
            })
            .collect()
    }
}

/// Pointwise estimate with batch-means standard errors and the per-batch
/// estimates they were computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchedEstimate<T> {
    pub values: Vec<T>,
    pub stderr: Vec<T>,
    pub batch_values: Vec<Vec<T>>,
}

/// Mean and standard error of the mean of a set of batch statistics.
pub fn batch_mean_stderr<T: Real>(samples: &[T]) -> (T, T) {
    let b = T::from_usize_exact(samples.len());
    let mean = samples.iter().copied().sum::<T>() / b;
    if samples.len() < 2 {
        return (mean, T::zero());
    }
    let var = samples.iter().map(|&x| (x - mean) * (x - mean)).sum::<T>() / (b - T::one());
    (mean, (var / b).sqrt())
}

/// Estimates `⟨I_ref^{m−1} I_p⟩ / (⟨I_ref⟩^{m−1} ⟨I_p⟩)` over `n_realizations`
/// draws. `render(r, out)` writes realization `r`'s intensities at every
/// point into `out` and returns the reference intensity.
pub(crate) fn estimate_normalized_moments<T, F>(
    n_realizations: usize,
    n_points: usize,
    order: usize,
    render: F,
) -> Result<BatchedEstimate<T>>
where
    T: Real,
    F: Fn(usize, &mut [T]) -> Result<T> + Sync,
{
    if order == 0 {
        return Err(Error::Argument("order m must be ≥ 1".into()));
    }
    if n_realizations < BATCHES {
        return Err(Error::Argument(format!(
            "need at least {BATCHES} realizations for batch-means errors, got {n_realizations}"
        )));
    }
    let mut first = vec![T::zero(); n_points];
    let first_ref = render(0, &mut first)?;
    let shift = Shift::new(order, first_ref, &first);

    // (batch, start, end) work units with fixed boundaries
    let mut units = Vec::new();
    for b in 0..BATCHES {
        let lo = b * n_realizations / BATCHES;
        let hi = (b + 1) * n_realizations / BATCHES;
        let mut s = lo;
        while s < hi {
            let e = (s + CHUNK).min(hi);
            units.push((b, s, e));
            s = e;
        }
    }
    let partials = units
        .par_iter()
        .map(|&(b, lo, hi)| {
            let mut sums = MomentSums::new(n_points);
            let mut buf = vec![T::zero(); n_points];
            for r in lo..hi {
                let reference = render(r, &mut buf)?;
                sums.add(order, &shift, reference, &buf);
            }
            Ok((b, sums))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut batches: Vec<MomentSums<T>> = (0..BATCHES).map(|_| MomentSums::new(n_points)).collect();
    for (b, sums) in &partials {
        batches[*b].merge(sums);
    }
    let mut total = MomentSums::new(n_points);
    for b in &batches {
        total.merge(b);
    }

    let zero_mean = |e: Option<usize>| match e {
        Some(p) => Error::Numerical(format!("mean intensity is zero at point {p}")),
        None => Error::Numerical("mean intensity is zero at the reference point".into()),
    };
    let values = total.normalized(order, &shift).map_err(zero_mean)?;
    let batch_values = batches
        .iter()
        .map(|b| b.normalized(order, &shift).map_err(zero_mean))
        .collect::<Result<Vec<_>>>()?;
    let stderr = (0..n_points)
        .map(|p| {
            let col: Vec<T> = batch_values.iter().map(|b| b[p]).collect();
            batch_mean_stderr(&col).1
        })
        .collect();
    Ok(BatchedEstimate { values, stderr, batch_values })
}

/// Monte Carlo `g^(m)(θ₁,…,θ₁,θ₂)` over `grid`, `realizations` i.i.d. speckle draws.
pub fn mc_correlation<T: Real>(
    chain: &EmitterChain<T>,
    m: usize,
    theta1: T,
    grid: &[T],
    realizations: usize,
    master_seed: u64,
) -> Result<CorrelationCurve<T>> {
    let est = mc_correlation_batched(chain, m, theta1, grid, realizations, master_seed)?;
    Ok(CorrelationCurve::new(grid.to_vec(), est.values, Some(est.stderr))?.with_meta(CurveMeta {
        n_sources: chain.n_sources(),
        order: m,
        theta1,
        spacing_kd: chain.spacing_kd(),
        source_model: chain.source_model(),
    }))
}

/// [`mc_correlation`] keeping the per-batch estimates.
pub fn mc_correlation_batched<T: Real>(
    chain: &EmitterChain<T>,
    m: usize,
    theta1: T,
    grid: &[T],
    realizations: usize,
    master_seed: u64,
) -> Result<BatchedEstimate<T>> {
    require_classical(chain)?;
    if grid.is_empty() {
        return Err(Error::Argument("θ₂ grid is empty".into()));
    }
    let table = PhaseTable::new(chain.n_sources(), chain.spacing_kd(), grid);
    let reference = PhaseTable::new(chain.n_sources(), chain.spacing_kd(), &[theta1]);
    estimate_normalized_moments(realizations, grid.len(), m, |r, out| {
        let field = sample_realization(chain, &RngContract::new(master_seed, r as u64))?;
        table.intensities_into(&field, out);
        Ok(reference.intensity(&field, 0))
    })
}

/// Normalized first-order coherence matrix `Γ_jk = (1/N) Σ_l e^{i(φ_l(θ_k) − φ_l(θ_j))}`.
pub fn coherence_matrix<T: Real>(chain: &EmitterChain<T>, angles: &[T]) -> Result<SquareMatrix<T>> {
    let n = chain.n_sources();
    let nn = T::from_usize_exact(n);
    let phases: Vec<Vec<T>> = angles.iter().map(|&t| chain.phases(t)).collect();
    SquareMatrix::from_fn(angles.len(), |j, k| {
        let mut acc = Complex::new(T::zero(), T::zero());
        for (pk, pj) in phases[k].iter().zip(&phases[j]) {
            acc = acc + cis(*pk - *pj);
        }
        acc / nn
    })
}

/// Exact `⟨Π_j I(θ_j)⟩ / Π_j ⟨I(θ_j)⟩` for circular Gaussian sources: the
/// permanent of the normalized coherence matrix.
pub fn gaussian_moment<T: Real>(chain: &EmitterChain<T>, angles: &[T]) -> Result<T> {
    if !matches!(chain.source_model(), SourceModel::Tls { .. }) {
        return Err(Error::Domain("the Gaussian moment applies to thermal sources".into()));
    }
    Ok(permanent(&coherence_matrix(chain, angles)?)?.re)
}

/// [`gaussian_moment`] in the coincident configuration (`m − 1` angles at `θ₁`, one at `θ₂`).
pub fn gaussian_moment_oracle<T: Real>(chain: &EmitterChain<T>, m: usize, theta1: T, theta2: T) -> Result<T> {
    if m == 0 {
        return Err(Error::Argument("order m must be ≥ 1".into()));
    }
    let mut angles = vec![theta1; m - 1];
    angles.push(theta2);
    gaussian_moment(chain, &angles)
}

/// Largest tensor grid accepted by [`cls_phase_integral`].
pub const MAX_PHASE_GRID_POINTS: f64 = 1.5e8;

/// Normalized coincident moment for coherent sources by direct integration
/// over the independent uniform source phases, a `grid^N` tensor-product
/// rule (spectrally accurate for these trigonometric polynomials once
/// `grid > m·N`).
pub fn cls_phase_integral<T: Real>(chain: &EmitterChain<T>, m: usize, theta1: T, theta2: T, grid: usize) -> Result<T> {
    let SourceModel::Cls { amplitude } = chain.source_model() else {
        return Err(Error::Domain("the phase integral applies to coherent sources".into()));
    };
    if m == 0 || grid == 0 {
        return Err(Error::Argument("order and grid size must be ≥ 1".into()));
    }
    let n = chain.n_sources();
    let points = (grid as f64).powi(n as i32);
    if points > MAX_PHASE_GRID_POINTS {
        return Err(Error::Resource(format!("{grid}^{n} phase grid is too large")));
    }
    let table = PhaseTable::new(n, chain.spacing_kd(), &[theta1, theta2]);
    let steps: Vec<Complex<T>> =
        (0..grid).map(|k| cis(T::TAU() * T::from_usize_exact(k) / T::from_usize_exact(grid)) * amplitude).collect();
    let total = points as usize;
    // parallel over the first phase index, sequential inside
    let partials: Vec<T> = (0..grid)
        .into_par_iter()
        .map(|k0| {
            let mut acc = CompensatedSum::new();
            let inner = total / grid;
            let mut field = FieldRealization { amplitudes: vec![steps[k0]; n] };
            for idx in 0..inner {
                let mut rest = idx;
                for l in 1..n {
                    field.amplitudes[l] = steps[rest % grid];
                    rest /= grid;
                }
                let i1 = table.intensity(&field, 0);
                let i2 = table.intensity(&field, 1);
                acc.add(i1.powi(m as i32 - 1) * i2);
            }
            acc.value()
        })
        .collect();
    let mean = crate::scalar::compensated_sum(partials) / T::lit(points);
    let single = T::from_usize_exact(n) * amplitude * amplitude;
    Ok(mean / single.powi(m as i32))
}
