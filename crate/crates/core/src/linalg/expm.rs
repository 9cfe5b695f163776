//! Action of `exp(-i dt H)` on a vector for real symmetric `H`, by Lanczos
//! projection onto a small Krylov space.
//!
//! The projected propagator is exactly unitary on an orthonormal basis, so
//! truncation error never shows up as norm drift.

use num_complex::Complex;

use super::dense::tridiagonal_eigen;
use crate::error::Result;
use crate::scalar::Real;

/// Reusable Lanczos storage for one dimension.
#[derive(Clone, Debug)]
pub struct KrylovExp<T> {
    dim: usize,
    max_krylov: usize,
    tol: T,
    basis: Vec<Vec<Complex<T>>>,
    w: Vec<Complex<T>>,
    matvecs: usize,
}

impl<T: Real> KrylovExp<T> {
    /// `tol` bounds the estimated error of each application for a unit vector.
    pub fn new(dim: usize, tol: T) -> Self {
        KrylovExp {
            dim,
            max_krylov: dim.min(48),
            tol,
            basis: Vec::new(),
            w: vec![Complex::new(T::zero(), T::zero()); dim],
            matvecs: 0,
        }
    }

    /// Total matrix-vector products performed so far.
    pub fn matvecs(&self) -> usize {
        self.matvecs
    }

    /// `v <- exp(-i dt H) v` where `apply(x, y)` computes `y = H x`.
    pub fn apply<F>(&mut self, apply: &mut F, v: &mut [Complex<T>], dt: T) -> Result<()>
    where
        F: FnMut(&[Complex<T>], &mut [Complex<T>]),
    {
        if !self.try_apply(apply, v, dt)? {
            let half = dt * T::lit(0.5);
            self.apply(apply, v, half)?;
            self.apply(apply, v, half)?;
        }
        Ok(())
    }

    /// Returns `false` (leaving `v` untouched) if the Krylov space did not
    /// converge within its size limit.
    fn try_apply<F>(&mut self, apply: &mut F, v: &mut [Complex<T>], dt: T) -> Result<bool>
    where
        F: FnMut(&[Complex<T>], &mut [Complex<T>]),
    {
        let zero = Complex::new(T::zero(), T::zero());
        let beta0 = v.iter().map(|a| a.norm_sqr()).sum::<T>().sqrt();
        if beta0.is_zero() {
            return Ok(true);
        }
        while self.basis.len() < self.max_krylov + 1 {
            self.basis.push(vec![zero; self.dim]);
        }
        for (q, a) in self.basis[0].iter_mut().zip(v.iter()) {
            *q = *a / beta0;
        }
        let breakdown = T::epsilon() * T::lit(64.0);
        let mut alpha: Vec<T> = Vec::with_capacity(self.max_krylov);
        let mut beta: Vec<T> = Vec::with_capacity(self.max_krylov);
        let mut coeffs: Option<Vec<Complex<T>>> = None;

        for j in 0..self.max_krylov {
            apply(&self.basis[j], &mut self.w);
            self.matvecs += 1;
            let a_j: T = self.basis[j]
                .iter()
                .zip(&self.w)
                .map(|(q, w)| (q.conj() * w).re)
                .sum();
            alpha.push(a_j);
            // full reorthogonalization, twice is enough
            for _ in 0..2 {
                for q in &self.basis[..=j] {
                    let dot = q
                        .iter()
                        .zip(&self.w)
                        .fold(zero, |acc, (qi, wi)| acc + qi.conj() * wi);
                    for (wi, qi) in self.w.iter_mut().zip(q) {
                        *wi -= *qi * dot;
                    }
                }
            }
            let b_j = self.w.iter().map(|a| a.norm_sqr()).sum::<T>().sqrt();
            let m = j + 1;
            let small = exp_first_column(&alpha, &beta, dt)?;
            let est = b_j * small[m - 1].norm();
            let converged = b_j <= breakdown * (a_j.abs() + T::one()) || est <= self.tol || m == self.dim;
            if converged {
                coeffs = Some(small);
                break;
            }
            beta.push(b_j);
            for (q, wi) in self.basis[j + 1].iter_mut().zip(&self.w) {
                *q = *wi / b_j;
            }
        }

        let Some(c) = coeffs else {
            return Ok(false);
        };
        for x in v.iter_mut() {
            *x = zero;
        }
        for (ck, q) in c.iter().zip(&self.basis) {
            let ck = *ck * beta0;
            for (x, qi) in v.iter_mut().zip(q) {
                *x += *qi * ck;
            }
        }
        Ok(true)
    }
}

/// `exp(-i dt T) e_1` for the Lanczos tridiagonal `T`.
fn exp_first_column<T: Real>(alpha: &[T], beta: &[T], dt: T) -> Result<Vec<Complex<T>>> {
    let m = alpha.len();
    let eig = tridiagonal_eigen(alpha, &beta[..m - 1], true)?;
    let v = eig.vectors.expect("vectors requested");
    let mut out = vec![Complex::new(T::zero(), T::zero()); m];
    for (k, &lam) in eig.values.iter().enumerate() {
        let phase = Complex::new(T::zero(), -dt * lam).exp() * v.at(0, k);
        for (i, o) in out.iter_mut().enumerate() {
            *o += phase * v.at(i, k);
        }
    }
    Ok(out)
}
