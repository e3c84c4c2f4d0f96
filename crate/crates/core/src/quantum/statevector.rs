use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cis, Real};

/// Default largest number of atoms the state-vector engine accepts.
pub const DEFAULT_MAX_ATOMS: usize = 20;

/// Pure state of `N` two-level atoms over the `2^N` product basis.
///
/// Basis index convention: bit `l − 1` of the index is set iff atom `l`
/// (1-based, position `l·d` on the chain) is excited. The fully excited
/// state `|S_N⟩` is therefore index `2^N − 1` and the ground state index 0.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState<T> {
    n_atoms: usize,
    amplitudes: Vec<Complex<T>>,
}

impl<T: Real> QuantumState<T> {
    fn basis(n_atoms: usize, index: usize, max_atoms: usize) -> Result<Self> {
        if n_atoms > max_atoms || n_atoms >= usize::BITS as usize {
            return Err(Error::Resource(format!(
                "state vector of {n_atoms} atoms exceeds the cap of {max_atoms}"
            )));
        }
        let mut amplitudes = vec![Complex::new(T::zero(), T::zero()); 1 << n_atoms];
        amplitudes[index] = Complex::new(T::one(), T::zero());
        Ok(Self { n_atoms, amplitudes })
    }

    /// `|S_N⟩ = Π_l |e_l⟩`.
    pub fn fully_excited(n_atoms: usize, max_atoms: usize) -> Result<Self> {
        Self::basis(n_atoms, (1usize << n_atoms) - 1, max_atoms)
    }

    pub fn ground(n_atoms: usize, max_atoms: usize) -> Result<Self> {
        Self::basis(n_atoms, 0, max_atoms)
    }

    pub fn from_amplitudes(n_atoms: usize, amplitudes: Vec<Complex<T>>) -> Result<Self> {
        if n_atoms >= usize::BITS as usize || amplitudes.len() != 1 << n_atoms {
            return Err(Error::Argument(format!(
                "{} amplitudes do not describe {n_atoms} atoms",
                amplitudes.len()
            )));
        }
        Ok(Self { n_atoms, amplitudes })
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> T {
        let mut acc = crate::scalar::CompensatedSum::new();
        for a in &self.amplitudes {
            acc.add(a.norm_sqr());
        }
        acc.value()
    }

    /// Applies the far-field annihilation operator `Σ_l e^{−iφ_l(θ)} s_l⁻`.
    pub fn apply_lowering(&self, theta: T, kd: T) -> Self {
        let s = theta.sin() * kd;
        // e^{−iφ_l} = e^{+i·l·kd·sinθ}
        let weights: Vec<Complex<T>> =
            (1..=self.n_atoms).map(|l| cis(T::from_usize_exact(l) * s)).collect();
        let zero = Complex::new(T::zero(), T::zero());
        let mut out = vec![zero; self.amplitudes.len()];
        for (idx, &amp) in self.amplitudes.iter().enumerate() {
            if amp == zero {
                continue;
            }
            let mut bits = idx;
            while bits != 0 {
                let bit = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                out[idx ^ (1 << bit)] = out[idx ^ (1 << bit)] + weights[bit] * amp;
            }
        }
        Self { n_atoms: self.n_atoms, amplitudes: out }
    }
}
