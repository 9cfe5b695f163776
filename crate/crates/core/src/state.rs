use num_complex::Complex;

use crate::scalar::Real;
use crate::sector::SectorBasis;

/// Complex amplitudes over a sector basis.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T> {
    amps: Vec<Complex<T>>,
}

impl<T: Real> StateVector<T> {
    pub fn from_amplitudes(amps: Vec<Complex<T>>) -> Self {
        StateVector { amps }
    }

    pub fn from_real(values: &[T]) -> Self {
        StateVector {
            amps: values.iter().map(|&x| Complex::new(x, T::zero())).collect(),
        }
    }

    /// Unit vector at `index`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amps = vec![Complex::new(T::zero(), T::zero()); dim];
        amps[index] = Complex::new(T::one(), T::zero());
        StateVector { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex<T>> {
        self.amps
    }

    pub fn norm(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<T>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .fold(Complex::new(T::zero(), T::zero()), |acc, x| acc + x)
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &Self) -> T {
        self.inner(other).norm_sqr()
    }

    /// Measurement probabilities in the basis.
    pub fn probabilities(&self) -> Vec<T> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn conj(&self) -> Self {
        StateVector {
            amps: self.amps.iter().map(|a| a.conj()).collect(),
        }
    }

    /// Expected magnetization per spin.
    pub fn magnetization(&self, basis: &SectorBasis) -> T {
        self.amps
            .iter()
            .enumerate()
            .map(|(i, a)| a.norm_sqr() * basis.magnetization::<T>(i))
            .sum()
    }
}
