//! Exact m-photon correlations of single-photon emitters prepared in the
//! fully excited state, computed two independent ways: successive
//! application of the far-field lowering operator to a state vector, and
//! an incoherent sum over final atomic configurations of squared
//! permanents of the quantum-path matrix.
//!
//! Both engines return the same unnormalized value; it is proportional
//! (not equal) to the closed form in [`crate::analytic`].

mod permanent;
mod statevector;

use num_complex::Complex;
use rayon::prelude::*;

pub use permanent::{
    permanent, permanent_capped, permanent_naive, permanent_ryser, SquareMatrix,
    DEFAULT_MAX_PERMANENT_ORDER, RYSER_SWITCHOVER,
};
pub use statevector::{QuantumState, DEFAULT_MAX_ATOMS};

use crate::error::{Error, Result};
use crate::model::{DetectorSet, EmitterChain, SourceModel};
use crate::scalar::{binomial, cis, compensated_sum, Real};

/// Resource caps for the exact engines.
#[derive(Debug, Clone, Copy)]
pub struct EngineLimits {
    pub max_atoms: usize,
    pub max_permanent_order: usize,
    pub max_subsets: f64,
}

impl Default for EngineLimits {
    fn default() -> Self {
        Self {
            max_atoms: DEFAULT_MAX_ATOMS,
            max_permanent_order: DEFAULT_MAX_PERMANENT_ORDER,
            max_subsets: 1e7,
        }
    }
}

fn require_spe<T: Real>(chain: &EmitterChain<T>) -> Result<()> {
    match chain.source_model() {
        SourceModel::Spe => Ok(()),
        other => Err(Error::Domain(format!(
            "the exact engines handle single-photon emitters, got {}",
            other.name()
        ))),
    }
}

/// Squared norm of `Π_j Ê⁺(θ_j) |S_N⟩`, detectors applied in order.
/// Zero when more photons are requested than there are atoms.
pub fn g_spe_statevector<T: Real>(chain: &EmitterChain<T>, detectors: &DetectorSet<T>) -> Result<T> {
    g_spe_statevector_with(chain, detectors, &EngineLimits::default())
}

pub fn g_spe_statevector_with<T: Real>(
    chain: &EmitterChain<T>,
    detectors: &DetectorSet<T>,
    limits: &EngineLimits,
) -> Result<T> {
    require_spe(chain)?;
    let n = chain.n_sources();
    let mut state = QuantumState::fully_excited(n, limits.max_atoms)?;
    if detectors.order() > n {
        return Ok(T::zero());
    }
    for &theta in detectors.angles() {
        state = state.apply_lowering(theta, chain.spacing_kd());
    }
    Ok(state.norm_sqr())
}

/// Quantum-path matrix of one source subset: entry `(j, c)` is
/// `exp(−iφ_{σ_c, j})`, photon `j` detected at `θ_j` coming from source `σ_c`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathMatrix<T>(SquareMatrix<T>);

impl<T: Real> PathMatrix<T> {
    /// `subset` holds 1-based, strictly increasing source indices, one per detector.
    pub fn new(chain: &EmitterChain<T>, detectors: &DetectorSet<T>, subset: &[usize]) -> Result<Self> {
        if subset.len() != detectors.order() {
            return Err(Error::Argument("subset size must equal the detector count".into()));
        }
        if subset.iter().any(|&l| l == 0 || l > chain.n_sources()) || subset.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Argument(format!("invalid source subset {subset:?}")));
        }
        let kd = chain.spacing_kd();
        let sines: Vec<T> = detectors.angles().iter().map(|t| t.sin() * kd).collect();
        SquareMatrix::from_fn(subset.len(), |j, c| cis(T::from_usize_exact(subset[c]) * sines[j])).map(Self)
    }

    pub fn matrix(&self) -> &SquareMatrix<T> {
        &self.0
    }
}

/// All size-`k` subsets of `1..=n` in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut current: Vec<usize> = (1..=k).collect();
    loop {
        out.push(current.clone());
        // rightmost position that can still advance
        let Some(pos) = (0..k).rev().find(|&i| current[i] < n - k + i + 1) else {
            break;
        };
        current[pos] += 1;
        for i in pos + 1..k {
            current[i] = current[i - 1] + 1;
        }
    }
    out
}

/// `Σ_{σ₁<…<σ_m} |perm(PathMatrix_σ)|²`.
pub fn g_spe_permanent<T: Real>(chain: &EmitterChain<T>, detectors: &DetectorSet<T>) -> Result<T> {
    g_spe_permanent_with(chain, detectors, &EngineLimits::default())
}

pub fn g_spe_permanent_with<T: Real>(
    chain: &EmitterChain<T>,
    detectors: &DetectorSet<T>,
    limits: &EngineLimits,
) -> Result<T> {
    require_spe(chain)?;
    let (n, m) = (chain.n_sources(), detectors.order());
    if m > n {
        return Ok(T::zero());
    }
    if m > limits.max_permanent_order {
        return Err(Error::Resource(format!(
            "permanent order {m} exceeds cap {}",
            limits.max_permanent_order
        )));
    }
    let count = binomial(n, m);
    if count > limits.max_subsets {
        return Err(Error::Resource(format!(
            "C({n}, {m}) = {count} source subsets exceeds cap {}",
            limits.max_subsets
        )));
    }
    let terms = combinations(n, m)
        .par_iter()
        .map(|subset| {
            let paths = PathMatrix::new(chain, detectors, subset)?;
            permanent_capped(paths.matrix(), limits.max_permanent_order).map(|p: Complex<T>| p.norm_sqr())
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(compensated_sum(terms))
}
