//! Iterated reverse annealing: quadratic cycles `1 -> s_min -> 1` under
//! `H = s h0 + gamma (1-s) vtf` with a computational-basis measurement after
//! each cycle.
//!
//! Measurement leaves a bitstring, and the only thing about a bitstring that
//! the permutation-symmetric dynamics can see is its total up-count `u`. A
//! bitstring with `u` up spins is the extremal state `(S1, -S2)` of the
//! two-block sector that puts its up spins in block 1, so a cycle started
//! from it is evolved exactly in that sector and the outcome is read off as
//! a distribution over total up-counts. The cycle-to-cycle process is
//! therefore an exact Markov chain on `u in {0, ..., N}`.
//!
//! States are indexed by `j = N - u`, so `j = 0` is the all-up ground state
//! and `h0` energies increase with `j` for odd `p`.

use rayon::prelude::*;

use crate::dynamics::{evolve, evolve_observed, EvolveOptions};
use crate::error::{self, Result};
use crate::scalar::Real;
use crate::schedule::Schedule;
use crate::sector::{build_basis, build_terms, HamiltonianTerms, ModelParams, SectorBasis};
use crate::spectrum::eigensystem;
use crate::state::StateVector;

/// Grouping tolerance for degenerate `h0` levels, relative to `N`.
pub const ENERGY_GROUP_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CycleSpec<T> {
    pub tau: T,
    pub s_min: T,
    /// Number of cycles.
    pub r: usize,
}

impl<T: Real> CycleSpec<T> {
    pub fn new(tau: T, s_min: T, r: usize) -> Result<Self> {
        Schedule::ira_quadratic(tau, s_min)?;
        Ok(CycleSpec { tau, s_min, r })
    }

    pub fn schedule(&self) -> Result<Schedule<T>> {
        Schedule::ira_quadratic(self.tau, self.s_min)
    }

    pub fn total_time(&self) -> T {
        self.tau * T::from_count(self.r)
    }
}

/// The fixed problem an IRA run is defined on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IraModel<T> {
    pub p: u32,
    pub n: usize,
    pub gamma: T,
}

impl<T: Real> IraModel<T> {
    pub fn new(p: u32, n: usize, gamma: T) -> Result<Self> {
        ModelParams::new(p, n, n, gamma)?;
        Ok(IraModel { p, n, gamma })
    }

    pub fn dim(&self) -> usize {
        self.n + 1
    }

    /// Sector in which the bitstring with `up` up spins is extremal.
    pub fn sector(&self, up: usize) -> Result<(ModelParams<T>, SectorBasis, HamiltonianTerms<T>)> {
        if up > self.n {
            return Err(error::input(format!("up-count {up} exceeds N = {}", self.n)));
        }
        let params = ModelParams::new(self.p, self.n, up, self.gamma)?;
        let basis = build_basis(&params)?;
        let terms = build_terms(&basis, &params);
        Ok((params, basis, terms))
    }

    /// `h0` energy of index `j`.
    pub fn energy(&self, j: usize) -> T {
        let n = T::from_count(self.n);
        let m = T::one() - T::lit(2.0) * T::from_count(j) / n;
        -n * m.powi(self.p as i32)
    }

    /// Magnetization per spin of index `j`.
    pub fn magnetization(&self, j: usize) -> T {
        T::one() - T::lit(2.0) * T::from_count(j) / T::from_count(self.n)
    }

    /// Index of the state with `up` up spins.
    pub fn index_of_up(&self, up: usize) -> usize {
        self.n - up
    }

    /// Partition of `0..=N` into sets of equal `h0` energy, ordered by
    /// energy; each set is sorted.
    pub fn energy_groups(&self) -> Vec<Vec<usize>> {
        let tol = T::lit(ENERGY_GROUP_TOL) * T::from_count(self.n);
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| self.energy(a).partial_cmp(&self.energy(b)).unwrap().then(a.cmp(&b)));
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for j in order {
            match groups.last_mut() {
                Some(g) if (self.energy(g[0]) - self.energy(j)).abs() <= tol => g.push(j),
                _ => groups.push(vec![j]),
            }
        }
        for g in groups.iter_mut() {
            g.sort_unstable();
        }
        groups
    }
}

/// Distribution over the `N + 1` up-count states (or over energy groups).
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityVector<T> {
    pub entries: Vec<T>,
}

impl<T: Real> ProbabilityVector<T> {
    pub fn new(entries: Vec<T>) -> Result<Self> {
        let sum: T = entries.iter().copied().sum();
        if entries.iter().any(|&x| x < T::zero()) || (sum - T::one()).abs() > T::tol(1e-8) {
            return Err(error::input("probabilities must be non-negative and sum to 1"));
        }
        Ok(ProbabilityVector { entries })
    }

    pub fn point(dim: usize, index: usize) -> Self {
        let mut entries = vec![T::zero(); dim];
        entries[index] = T::one();
        ProbabilityVector { entries }
    }

    /// Probability of index 0 (the all-up ground state).
    pub fn ground(&self) -> T {
        self.entries[0]
    }

    pub fn sum(&self) -> T {
        self.entries.iter().copied().sum()
    }

    /// Mean magnetization `sum_j P_j (1 - 2j/N)`.
    pub fn mean_magnetization(&self, model: &IraModel<T>) -> T {
        self.entries.iter().enumerate().map(|(j, &p)| p * model.magnetization(j)).sum()
    }
}

/// Measurement distribution after one cycle from the bitstring with `up`
/// up spins.
pub fn single_cycle<T: Real>(
    model: &IraModel<T>,
    up: usize,
    spec: &CycleSpec<T>,
    opts: &EvolveOptions<T>,
) -> Result<ProbabilityVector<T>> {
    let (_, basis, terms) = model.sector(up)?;
    let psi0 = StateVector::basis(basis.dim(), basis.initial_index());
    let res = evolve(&terms, model.gamma, &spec.schedule()?, &psi0, opts)?;
    Ok(ProbabilityVector {
        entries: by_up_count(model, &basis, &res.final_state),
    })
}

fn by_up_count<T: Real>(model: &IraModel<T>, basis: &SectorBasis, state: &StateVector<T>) -> Vec<T> {
    let mut out = vec![T::zero(); model.dim()];
    for (idx, a) in state.amplitudes().iter().enumerate() {
        let (u1, u2) = basis.up_counts(idx);
        out[model.index_of_up(u1 + u2)] += a.norm_sqr();
    }
    out
}

/// Column-stochastic single-cycle transition matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix<T> {
    pub dim: usize,
    /// Column-major: `data[i * dim + j]` is the probability of `i -> j`.
    data: Vec<T>,
    pub energy_groups: Vec<Vec<usize>>,
}

impl<T: Real> TransitionMatrix<T> {
    pub fn from_columns(columns: Vec<Vec<T>>, energy_groups: Vec<Vec<usize>>) -> Result<Self> {
        let dim = columns.len();
        if columns.iter().any(|c| c.len() != dim) {
            return Err(error::input("transition matrix must be square"));
        }
        Ok(TransitionMatrix {
            dim,
            data: columns.into_iter().flatten().collect(),
            energy_groups,
        })
    }

    /// Probability of `i -> j`.
    pub fn get(&self, j: usize, i: usize) -> T {
        self.data[i * self.dim + j]
    }

    pub fn column(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Largest `|column sum - 1|`.
    pub fn stochasticity_error(&self) -> T {
        (0..self.dim)
            .map(|i| (self.column(i).iter().copied().sum::<T>() - T::one()).abs())
            .fold(T::zero(), T::max)
    }

    pub fn apply(&self, pi: &ProbabilityVector<T>) -> ProbabilityVector<T> {
        let mut out = vec![T::zero(); self.dim];
        for (i, &w) in pi.entries.iter().enumerate() {
            for (o, &pji) in out.iter_mut().zip(self.column(i)) {
                *o += pji * w;
            }
        }
        ProbabilityVector { entries: out }
    }

    /// `P^r pi0`.
    pub fn iterate(&self, pi0: &ProbabilityVector<T>, r: usize) -> Result<ProbabilityVector<T>> {
        if pi0.entries.len() != self.dim {
            return Err(error::input("probability vector dimension mismatch"));
        }
        let mut pi = pi0.clone();
        for _ in 0..r {
            pi = self.apply(&pi);
        }
        Ok(pi)
    }

    /// `P^r` by repeated multiplication.
    pub fn power(&self, r: usize) -> Self {
        let columns = (0..self.dim)
            .map(|i| self.iterate(&ProbabilityVector::point(self.dim, i), r).unwrap().entries)
            .collect();
        TransitionMatrix::from_columns(columns, self.energy_groups.clone()).unwrap()
    }

    /// Sums rows over each energy group; the column of a group is that of
    /// its lowest index (degenerate members are related by the global spin
    /// flip, which leaves the dynamics invariant).
    pub fn energy_aggregate(&self) -> Self {
        let columns = self
            .energy_groups
            .iter()
            .map(|gi| aggregate_entries(self.column(gi[0]), &self.energy_groups))
            .collect();
        let groups = (0..self.energy_groups.len()).map(|g| vec![g]).collect();
        TransitionMatrix::from_columns(columns, groups).unwrap()
    }
}

fn aggregate_entries<T: Real>(v: &[T], groups: &[Vec<usize>]) -> Vec<T> {
    groups.iter().map(|g| g.iter().map(|&j| v[j]).sum()).collect()
}

/// `pi` summed over energy groups.
pub fn energy_aggregate<T: Real>(pi: &ProbabilityVector<T>, groups: &[Vec<usize>]) -> ProbabilityVector<T> {
    ProbabilityVector {
        entries: aggregate_entries(&pi.entries, groups),
    }
}

/// Single-cycle transition matrix over all up-counts; columns run in
/// parallel.
pub fn transition_matrix<T: Real>(model: &IraModel<T>, spec: &CycleSpec<T>, opts: &EvolveOptions<T>) -> Result<TransitionMatrix<T>> {
    let columns: Vec<Vec<T>> = (0..model.dim())
        .into_par_iter()
        .map(|i| single_cycle(model, model.n - i, spec, opts).map(|p| p.entries))
        .collect::<Result<_>>()?;
    TransitionMatrix::from_columns(columns, model.energy_groups())
}

/// Instantaneous spectrum and level occupations at one point of a cycle.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralSample<T> {
    pub t: T,
    pub s: T,
    pub energies: Vec<T>,
    pub occupations: Vec<T>,
}

/// Lowest `k` instantaneous levels and their occupations along one cycle
/// from the bitstring with `up` up spins, at `samples` equally spaced times.
pub fn cycle_spectral_trace<T: Real>(
    model: &IraModel<T>,
    up: usize,
    spec: &CycleSpec<T>,
    k: usize,
    samples: usize,
    opts: &EvolveOptions<T>,
) -> Result<Vec<SpectralSample<T>>> {
    let (_, basis, terms) = model.sector(up)?;
    if k == 0 || k > basis.dim() {
        return Err(error::input(format!("cannot trace {k} levels of a {}-dimensional sector", basis.dim())));
    }
    let schedule = spec.schedule()?;
    let psi0 = StateVector::basis(basis.dim(), basis.initial_index());
    let mut out = Vec::with_capacity(samples);
    let mut observer = |t: T, psi: &[num_complex::Complex<T>]| -> Result<()> {
        let (s, lambda) = schedule.controls(t);
        let sys = eigensystem(&terms.assemble(s, lambda, model.gamma), k, true)?;
        let occupations = sys
            .vectors
            .as_ref()
            .unwrap()
            .iter()
            .map(|v| {
                let (re, im) = v
                    .iter()
                    .zip(psi)
                    .fold((T::zero(), T::zero()), |(re, im), (&vi, a)| (re + vi * a.re, im + vi * a.im));
                re * re + im * im
            })
            .collect();
        out.push(SpectralSample { t, s, energies: sys.values, occupations });
        Ok(())
    };
    let opts = EvolveOptions { samples, ..opts.clone() };
    evolve_observed(&terms, model.gamma, &schedule, &psi0, &opts, &mut observer)?;
    Ok(out)
}
