//! Full-Hilbert-space reference model shared by the oracle and acceptance
//! targets.
//!
//! Spins are bits of a `2^N` index, bit `k` set meaning spin `k` points down.
//! Block 1 is spins `0..n_up`, block 2 the rest. Nothing here uses the sector
//! code except through its public results, which are embedded into the full
//! space and compared.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use revanneal::schedule::Schedule;
use revanneal::sector::{build_basis, build_terms, HamiltonianTerms, ModelParams, SectorBasis};

pub struct Full {
    pub n: usize,
    pub n_up: usize,
    h0: Vec<f64>,
    hinit: Vec<f64>,
}

impl Full {
    pub fn new(p: u32, n: usize, n_up: usize) -> Self {
        let dim = 1usize << n;
        let mut h0 = Vec::with_capacity(dim);
        let mut hinit = Vec::with_capacity(dim);
        for x in 0..dim {
            let z = |k: usize| if x >> k & 1 == 0 { 1.0 } else { -1.0 };
            let total: f64 = (0..n).map(z).sum();
            let b1: f64 = (0..n_up).map(z).sum();
            let b2: f64 = (n_up..n).map(z).sum();
            h0.push(-(n as f64) * (total / n as f64).powi(p as i32));
            hinit.push(-(b1 - b2));
        }
        Full { n, n_up, h0, hinit }
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn coeffs(s: f64, lambda: f64, gamma: f64) -> (f64, f64, f64) {
        (s, (1.0 - s) * (1.0 - lambda), gamma * (1.0 - s) * lambda)
    }

    pub fn dense(&self, s: f64, lambda: f64, gamma: f64) -> DMatrix<f64> {
        let (a, b, g) = Self::coeffs(s, lambda, gamma);
        let dim = self.dim();
        let mut h = DMatrix::zeros(dim, dim);
        for x in 0..dim {
            h[(x, x)] = a * self.h0[x] + b * self.hinit[x];
            for k in 0..self.n {
                h[(x ^ (1 << k), x)] -= g;
            }
        }
        h
    }

    pub fn apply(&self, s: f64, lambda: f64, gamma: f64, psi: &[Complex64], out: &mut [Complex64]) {
        let (a, b, g) = Self::coeffs(s, lambda, gamma);
        for x in 0..psi.len() {
            let mut acc = psi[x] * (a * self.h0[x] + b * self.hinit[x]);
            for k in 0..self.n {
                acc -= psi[x ^ (1 << k)] * g;
            }
            out[x] = acc;
        }
    }

    /// Classical RK4 with a fixed step on `i dpsi/dt = H(t) psi`.
    pub fn rk4(&self, schedule: &Schedule<f64>, gamma: f64, psi0: Vec<Complex64>, steps: usize) -> Vec<Complex64> {
        let h = schedule.tau / steps as f64;
        let dim = self.dim();
        let mut psi = psi0;
        let mut k = vec![vec![Complex64::new(0.0, 0.0); dim]; 4];
        let mut tmp = vec![Complex64::new(0.0, 0.0); dim];
        let mi = Complex64::new(0.0, -1.0);
        for step in 0..steps {
            let t = step as f64 * h;
            for (stage, (dt, w)) in [(0.0, 0.0), (0.5, 0.5), (0.5, 0.5), (1.0, 1.0)].into_iter().enumerate() {
                if stage == 0 {
                    tmp.copy_from_slice(&psi);
                } else {
                    for x in 0..dim {
                        tmp[x] = psi[x] + k[stage - 1][x] * (w * h);
                    }
                }
                let (s, l) = schedule.controls(t + dt * h);
                let mut out = vec![Complex64::new(0.0, 0.0); dim];
                self.apply(s, l, gamma, &tmp, &mut out);
                for x in 0..dim {
                    k[stage][x] = out[x] * mi;
                }
            }
            for x in 0..dim {
                psi[x] += (k[0][x] + k[1][x] * 2.0 + k[2][x] * 2.0 + k[3][x]) * (h / 6.0);
            }
        }
        psi
    }

    /// Sector vector written in the full space: each `(m1, m2)` state is the
    /// uniform superposition of bitstrings with the matching block up-counts.
    pub fn embed(&self, basis: &SectorBasis, amps: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        let mut counts = vec![0usize; basis.dim()];
        let index_of = |x: usize| {
            let d1 = (0..self.n_up).filter(|&k| x >> k & 1 == 1).count();
            let d2 = (self.n_up..self.n).filter(|&k| x >> k & 1 == 1).count();
            d1 * basis.stride() + d2
        };
        for x in 0..self.dim() {
            counts[index_of(x)] += 1;
        }
        for x in 0..self.dim() {
            let i = index_of(x);
            out[x] = amps[i] / (counts[i] as f64).sqrt();
        }
        out
    }
}

pub fn overlap(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>().norm_sqr()
}

pub fn sector(p: u32, n: usize, n_up: usize, gamma: f64) -> (SectorBasis, HamiltonianTerms<f64>) {
    let params = ModelParams::new(p, n, n_up, gamma).unwrap();
    let basis = build_basis(&params).unwrap();
    let terms = build_terms(&basis, &params);
    (basis, terms)
}

/// Fixed RK4 step count of the reference integrations.
pub const RK4_STEPS: usize = 8000;
