//! Two-block permutation-symmetric sector of the transverse-field p-spin model.
//!
//! The `N` spins are split into a block of `N1` spins that start up and a
//! block of `N2 = N - N1` spins that start down. Within the subspace of
//! maximal block spins `S1 = N1/2`, `S2 = N2/2`, states are labelled by the
//! block projections `(m1, m2)` and every Hamiltonian of interest is a real
//! symmetric matrix with at most five non-zeros per row.
//!
//! Basis ordering is lexicographic with `m1` descending, then `m2`
//! descending, so index 0 is the all-up state. Downstream code relies on this.

use num_complex::Complex;

use crate::error::{self, Result};
use crate::scalar::{HalfInt, Real};
use crate::state::StateVector;

/// Problem definition: cost exponent, spin count, initial up-block size and
/// transverse-field amplitude.
///
/// The fraction of initially-up spins is carried as the integer `n_up` so
/// that `N·c` is an integer by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams<T> {
    pub p: u32,
    pub n: usize,
    pub n_up: usize,
    pub gamma: T,
}

impl<T: Real> ModelParams<T> {
    pub fn new(p: u32, n: usize, n_up: usize, gamma: T) -> Result<Self> {
        let params = ModelParams { p, n, n_up, gamma };
        params.validate()?;
        Ok(params)
    }

    /// Builds parameters from a fractional `c`, rejecting values for which
    /// `N·c` is not an integer.
    pub fn from_fraction(p: u32, n: usize, c: f64, gamma: T) -> Result<Self> {
        if !(0.0..=1.0).contains(&c) {
            return Err(error::config(format!("c = {c} outside [0, 1]")));
        }
        let up = c * n as f64;
        let rounded = up.round();
        if (up - rounded).abs() > 1e-9 * (n as f64).max(1.0) {
            return Err(error::config(format!(
                "N*c = {n}*{c} = {up} is not an integer"
            )));
        }
        Self::new(p, n, rounded as usize, gamma)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 3 {
            return Err(error::config(format!("p = {} must be >= 3", self.p)));
        }
        if self.n < 2 {
            return Err(error::config(format!("N = {} must be >= 2", self.n)));
        }
        if self.n_up > self.n {
            return Err(error::config(format!(
                "up-block size {} exceeds N = {}",
                self.n_up, self.n
            )));
        }
        if !(self.gamma > T::zero()) || !self.gamma.is_finite() {
            return Err(error::config(format!("gamma = {} must be > 0", self.gamma)));
        }
        Ok(())
    }

    /// Fraction of initially-up spins.
    pub fn c(&self) -> T {
        T::from_count(self.n_up) / T::from_count(self.n)
    }

    pub fn n1(&self) -> usize {
        self.n_up
    }

    pub fn n2(&self) -> usize {
        self.n - self.n_up
    }

    /// Same model with a different up-block size.
    pub fn with_up_block(&self, n_up: usize) -> Result<Self> {
        Self::new(self.p, self.n, n_up, self.gamma)
    }

    pub fn with_gamma(&self, gamma: T) -> Result<Self> {
        Self::new(self.p, self.n, self.n_up, gamma)
    }
}

/// Ordered `(m1, m2)` basis of the maximal-spin two-block sector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectorBasis {
    n: usize,
    n1: usize,
    n2: usize,
}

impl SectorBasis {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    /// Block spin `S1 = N1/2`.
    pub fn spin1(&self) -> HalfInt {
        HalfInt(self.n1 as i64)
    }

    /// Block spin `S2 = N2/2`.
    pub fn spin2(&self) -> HalfInt {
        HalfInt(self.n2 as i64)
    }

    pub fn dim(&self) -> usize {
        (self.n1 + 1) * (self.n2 + 1)
    }

    /// Index distance between states differing by one unit of `m1`.
    pub fn stride(&self) -> usize {
        self.n2 + 1
    }

    /// Number of down-flips `(i1, i2)` from the all-up state.
    pub fn flips(&self, index: usize) -> (usize, usize) {
        (index / self.stride(), index % self.stride())
    }

    /// Up-spin counts `(k1, k2)` of a basis state.
    pub fn up_counts(&self, index: usize) -> (usize, usize) {
        let (i1, i2) = self.flips(index);
        (self.n1 - i1, self.n2 - i2)
    }

    /// Projections `(m1, m2)` of a basis state.
    pub fn state(&self, index: usize) -> (HalfInt, HalfInt) {
        let (i1, i2) = self.flips(index);
        (
            HalfInt(self.n1 as i64 - 2 * i1 as i64),
            HalfInt(self.n2 as i64 - 2 * i2 as i64),
        )
    }

    pub fn index_of(&self, m1: HalfInt, m2: HalfInt) -> Option<usize> {
        let (t1, t2) = (m1.twice(), m2.twice());
        let (n1, n2) = (self.n1 as i64, self.n2 as i64);
        if t1.abs() > n1 || t2.abs() > n2 || (n1 - t1) % 2 != 0 || (n2 - t2) % 2 != 0 {
            return None;
        }
        let i1 = ((n1 - t1) / 2) as usize;
        let i2 = ((n2 - t2) / 2) as usize;
        Some(i1 * self.stride() + i2)
    }

    /// Total magnetization per spin `2(m1 + m2)/N`.
    pub fn magnetization<T: Real>(&self, index: usize) -> T {
        let (m1, m2) = self.state(index);
        T::from_i64(m1.twice() + m2.twice()).unwrap() / T::from_count(self.n)
    }

    /// Index of the classical initial state `(S1, -S2)`.
    pub fn initial_index(&self) -> usize {
        self.n2
    }

    /// Iterator over `(index, m1, m2)`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, HalfInt, HalfInt)> + '_ {
        (0..self.dim()).map(move |i| {
            let (m1, m2) = self.state(i);
            (i, m1, m2)
        })
    }
}

pub fn build_basis<T: Real>(params: &ModelParams<T>) -> Result<SectorBasis> {
    params.validate()?;
    Ok(SectorBasis {
        n: params.n,
        n1: params.n1(),
        n2: params.n2(),
    })
}

/// Real symmetric matrix stored by its non-zero diagonals.
///
/// `diags[k][i]` holds the entry at row `i + offsets[k]`, column `i` (and its
/// mirror). Offsets are strictly increasing and start with 0.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix<T> {
    dim: usize,
    offsets: Vec<usize>,
    diags: Vec<Vec<T>>,
}

impl<T: Real> OperatorMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        OperatorMatrix {
            dim,
            offsets: vec![0],
            diags: vec![vec![T::zero(); dim]],
        }
    }

    pub fn from_diagonal(diag: Vec<T>) -> Self {
        OperatorMatrix {
            dim: diag.len(),
            offsets: vec![0],
            diags: vec![diag],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn diagonal(&self) -> &[T] {
        &self.diags[0]
    }

    /// Half-bandwidth: the largest stored offset.
    pub fn bandwidth(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    pub fn is_diagonal(&self) -> bool {
        self.diags[1..].iter().all(|d| d.iter().all(|x| x.is_zero()))
    }

    fn slot(&mut self, offset: usize) -> &mut Vec<T> {
        match self.offsets.binary_search(&offset) {
            Ok(k) => &mut self.diags[k],
            Err(k) => {
                self.offsets.insert(k, offset);
                self.diags.insert(k, vec![T::zero(); self.dim - offset]);
                &mut self.diags[k]
            }
        }
    }

    /// Adds `value` at `(i, j)` and at its mirror.
    pub fn add_entry(&mut self, i: usize, j: usize, value: T) {
        let (row, col) = if i >= j { (i, j) } else { (j, i) };
        self.slot(row - col)[col] += value;
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (row, col) = if i >= j { (i, j) } else { (j, i) };
        match self.offsets.binary_search(&(row - col)) {
            Ok(k) => self.diags[k][col],
            Err(_) => T::zero(),
        }
    }

    /// Iterator over stored lower-triangle entries `(row, col, value)`.
    pub fn lower_entries(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        self.offsets
            .iter()
            .zip(&self.diags)
            .flat_map(|(&off, d)| d.iter().enumerate().map(move |(c, &v)| (c + off, c, v)))
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut out = vec![vec![T::zero(); self.dim]; self.dim];
        for (r, c, v) in self.lower_entries() {
            out[r][c] = v;
            out[c][r] = v;
        }
        out
    }

    pub fn max_abs(&self) -> T {
        self.diags
            .iter()
            .flatten()
            .fold(T::zero(), |acc, x| acc.max(x.abs()))
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (T, T) {
        let mut radius = vec![T::zero(); self.dim];
        for (&off, d) in self.offsets.iter().zip(&self.diags).skip(1) {
            for (c, &v) in d.iter().enumerate() {
                radius[c] += v.abs();
                radius[c + off] += v.abs();
            }
        }
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for (a, r) in self.diags[0].iter().zip(&radius) {
            lo = lo.min(*a - *r);
            hi = hi.max(*a + *r);
        }
        (lo, hi)
    }

    /// `self += alpha * other`, merging diagonal structure.
    pub fn axpy(&mut self, alpha: T, other: &OperatorMatrix<T>) {
        assert_eq!(self.dim, other.dim, "operator dimensions differ");
        for (&off, d) in other.offsets.iter().zip(&other.diags) {
            let dst = self.slot(off);
            for (x, &y) in dst.iter_mut().zip(d) {
                *x += alpha * y;
            }
        }
    }

    pub fn scaled(&self, alpha: T) -> Self {
        let mut out = self.clone();
        out.diags.iter_mut().flatten().for_each(|x| *x *= alpha);
        out
    }

    /// `y = self * x` for complex vectors.
    pub fn apply(&self, x: &[Complex<T>], y: &mut [Complex<T>]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for ((yi, xi), &d) in y.iter_mut().zip(x).zip(&self.diags[0]) {
            *yi = xi * d;
        }
        for (&off, d) in self.offsets.iter().zip(&self.diags).skip(1) {
            for (c, &v) in d.iter().enumerate() {
                let r = c + off;
                y[r] += x[c] * v;
                y[c] += x[r] * v;
            }
        }
    }

    /// `y = self * x` for real vectors.
    pub fn apply_real(&self, x: &[T], y: &mut [T]) {
        for ((yi, xi), &d) in y.iter_mut().zip(x).zip(&self.diags[0]) {
            *yi = *xi * d;
        }
        for (&off, d) in self.offsets.iter().zip(&self.diags).skip(1) {
            for (c, &v) in d.iter().enumerate() {
                let r = c + off;
                y[r] += x[c] * v;
                y[c] += x[r] * v;
            }
        }
    }

    /// `<x|self|x>` for a complex vector.
    pub fn expectation(&self, x: &[Complex<T>]) -> T {
        let mut y = vec![Complex::new(T::zero(), T::zero()); self.dim];
        self.apply(x, &mut y);
        x.iter().zip(&y).map(|(a, b)| (a.conj() * b).re).sum()
    }
}

/// The three building blocks of the annealing Hamiltonian in the sector basis.
#[derive(Clone, Debug)]
pub struct HamiltonianTerms<T> {
    pub basis: SectorBasis,
    /// Cost function `-N (2(S1z + S2z)/N)^p`.
    pub h0: OperatorMatrix<T>,
    /// Initialization term `-2(S1z - S2z)`.
    pub hinit: OperatorMatrix<T>,
    /// Transverse field `-sum_i sigma_i^x = -2(S1x + S2x)`.
    pub vtf: OperatorMatrix<T>,
}

/// `<m -/+ 1|2 S^x|m>` on a spin-S block, with `S` and `m` given doubled.
fn sx_element<T: Real>(two_s: i64, two_m: i64, two_m_next: i64) -> T {
    // S(S+1) - m m' with m' = m -/+ 1, all quantities times 4
    let four = two_s * (two_s + 2) - two_m * two_m_next;
    (T::from_i64(four).unwrap() / T::lit(4.0)).sqrt()
}

pub fn build_terms<T: Real>(basis: &SectorBasis, params: &ModelParams<T>) -> HamiltonianTerms<T> {
    debug_assert_eq!(basis.n(), params.n);
    let dim = basis.dim();
    let n = T::from_count(basis.n());
    let p = params.p as i32;
    let (two_s1, two_s2) = (basis.n1() as i64, basis.n2() as i64);

    let mut h0 = Vec::with_capacity(dim);
    let mut hinit = Vec::with_capacity(dim);
    let mut vtf = OperatorMatrix::zeros(dim);
    for (i, m1, m2) in basis.iter() {
        let m = T::from_i64(m1.twice() + m2.twice()).unwrap() / n;
        h0.push(-n * m.powi(p));
        hinit.push(-T::from_i64(m1.twice() - m2.twice()).unwrap());

        let (i1, i2) = basis.flips(i);
        if i2 < basis.n2() {
            let v = sx_element::<T>(two_s2, m2.twice(), m2.twice() - 2);
            vtf.add_entry(i + 1, i, -v);
        }
        if i1 < basis.n1() {
            let v = sx_element::<T>(two_s1, m1.twice(), m1.twice() - 2);
            vtf.add_entry(i + basis.stride(), i, -v);
        }
    }
    // The diagonal slot of vtf stays explicit (zero) so that every assembled
    // matrix shares the same layout.
    HamiltonianTerms {
        basis: basis.clone(),
        h0: OperatorMatrix::from_diagonal(h0),
        hinit: OperatorMatrix::from_diagonal(hinit),
        vtf,
    }
}

/// Coefficients `(a, b, g)` of `a*h0 + b*hinit + g*vtf` at control point
/// `(s, lambda)`.
pub fn coefficients<T: Real>(s: T, lambda: T, gamma: T) -> (T, T, T) {
    let one = T::one();
    (s, (one - s) * (one - lambda), gamma * (one - s) * lambda)
}

impl<T: Real> HamiltonianTerms<T> {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// `H(s, lambda) = s h0 + (1-s)(1-lambda) hinit + gamma (1-s) lambda vtf`.
    pub fn assemble(&self, s: T, lambda: T, gamma: T) -> OperatorMatrix<T> {
        let (a, b, g) = coefficients(s, lambda, gamma);
        let mut h = self.h0.scaled(a);
        h.axpy(b, &self.hinit);
        h.axpy(g, &self.vtf);
        h
    }

    /// Applies `H(s, lambda)` without materializing it.
    pub fn apply(&self, s: T, lambda: T, gamma: T, x: &[Complex<T>], y: &mut [Complex<T>]) {
        let (a, b, g) = coefficients(s, lambda, gamma);
        self.vtf.apply(x, y);
        let d0 = self.h0.diagonal();
        let d1 = self.hinit.diagonal();
        for i in 0..x.len() {
            y[i] = y[i] * g + x[i] * (a * d0[i] + b * d1[i]);
        }
    }
}

/// Free-function form of [`HamiltonianTerms::assemble`].
pub fn assemble<T: Real>(terms: &HamiltonianTerms<T>, s: T, lambda: T, gamma: T) -> OperatorMatrix<T> {
    terms.assemble(s, lambda, gamma)
}

/// Unit vector on the basis state `(m1, m2)`.
pub fn classical_state<T: Real>(basis: &SectorBasis, m1: HalfInt, m2: HalfInt) -> Result<StateVector<T>> {
    let idx = basis
        .index_of(m1, m2)
        .ok_or_else(|| error::input(format!("({m1}, {m2}) is not a sector state")))?;
    Ok(StateVector::basis(basis.dim(), idx))
}

/// Product of x-polarized block coherent states, the ground state of `vtf`.
pub fn transverse_ground_state<T: Real>(basis: &SectorBasis) -> StateVector<T> {
    let w1 = binomial_amplitudes::<T>(basis.n1());
    let w2 = binomial_amplitudes::<T>(basis.n2());
    let amps = (0..basis.dim())
        .map(|i| {
            let (i1, i2) = basis.flips(i);
            Complex::new(w1[i1] * w2[i2], T::zero())
        })
        .collect();
    StateVector::from_amplitudes(amps)
}

/// `sqrt(C(n, k) / 2^n)` for `k = 0..=n`, computed in log space.
fn binomial_amplitudes<T: Real>(n: usize) -> Vec<T> {
    let mut log_fact = vec![0.0f64; n + 1];
    for k in 1..=n {
        log_fact[k] = log_fact[k - 1] + (k as f64).ln();
    }
    (0..=n)
        .map(|k| {
            let log_c = log_fact[n] - log_fact[k] - log_fact[n - k] - n as f64 * std::f64::consts::LN_2;
            T::lit((0.5 * log_c).exp())
        })
        .collect()
}
