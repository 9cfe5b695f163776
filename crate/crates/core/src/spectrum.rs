//! Instantaneous spectra of sector Hamiltonians: low-lying eigenpairs, gap
//! scans along annealing paths and occupation of instantaneous eigenstates.

use rayon::prelude::*;

use crate::error::{self, Result};
use crate::linalg::{dense, inverse_iteration, lowest_eigenvalues, DenseMatrix};
use crate::scalar::Real;
use crate::sector::{HamiltonianTerms, OperatorMatrix};
use crate::state::StateVector;

/// Matrices up to this dimension are diagonalized densely.
pub const DENSE_LIMIT: usize = 160;

#[derive(Clone, Debug)]
pub struct EigenSystem<T> {
    /// Control point `(s, lambda)` the matrix was assembled at, if known.
    pub point: Option<(T, T)>,
    /// Ascending eigenvalues.
    pub values: Vec<T>,
    /// Orthonormal eigenvectors, one per value.
    pub vectors: Option<Vec<Vec<T>>>,
}

/// Lowest `k` eigenpairs of `h`.
pub fn eigensystem<T: Real>(h: &OperatorMatrix<T>, k: usize, with_vectors: bool) -> Result<EigenSystem<T>> {
    let dim = h.dim();
    if k == 0 || k > dim {
        return Err(error::input(format!("requested {k} eigenpairs of a {dim}-dimensional matrix")));
    }
    if dim <= DENSE_LIMIT || k == dim {
        let eig = dense::symmetric_eigen(&DenseMatrix::from_rows(&h.to_dense()), with_vectors)?;
        let values = eig.values[..k].to_vec();
        let vectors = eig.vectors.map(|v| (0..k).map(|j| v.column(j)).collect());
        return Ok(EigenSystem { point: None, values, vectors });
    }
    let values = lowest_eigenvalues(h, k, T::zero());
    let vectors = if with_vectors {
        let scale = h.max_abs().max(T::one());
        let mut vecs: Vec<Vec<T>> = Vec::with_capacity(k);
        for (j, &v) in values.iter().enumerate() {
            // orthogonalize only against numerically close neighbours
            let near: Vec<Vec<T>> = (0..j)
                .filter(|&i| (values[i] - v).abs() < scale * T::lit(1e-6))
                .map(|i| vecs[i].clone())
                .collect();
            vecs.push(inverse_iteration(h, v, &near)?);
        }
        Some(vecs)
    } else {
        None
    };
    Ok(EigenSystem { point: None, values, vectors })
}

/// Eigenpairs of `H(s, lambda)`.
pub fn eigensystem_at<T: Real>(
    terms: &HamiltonianTerms<T>,
    gamma: T,
    s: T,
    lambda: T,
    k: usize,
    with_vectors: bool,
) -> Result<EigenSystem<T>> {
    let mut sys = eigensystem(&terms.assemble(s, lambda, gamma), k, with_vectors)?;
    sys.point = Some((s, lambda));
    Ok(sys)
}

/// Ground-state vector of `h`.
pub fn ground_state<T: Real>(h: &OperatorMatrix<T>) -> Result<Vec<T>> {
    let sys = eigensystem(h, 1, true)?;
    Ok(sys.vectors.unwrap().pop().unwrap())
}

/// Annealing path through the `(s, lambda)` plane parameterized by `s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Path<T> {
    /// Conventional annealing axis `lambda = 1`.
    Qa,
    /// Diagonal `lambda = s`.
    Diagonal,
    /// Constant `lambda`.
    FixedLambda(T),
}

impl<T: Real> Path<T> {
    pub fn lambda(&self, s: T) -> T {
        match *self {
            Path::Qa => T::one(),
            Path::Diagonal => s,
            Path::FixedLambda(l) => l,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Path::Qa => "qa".into(),
            Path::Diagonal => "diagonal".into(),
            Path::FixedLambda(l) => format!("lambda={l}"),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct GapOptions<T> {
    /// Sampling step in `s`.
    pub s_resolution: T,
    /// Minimum bracket width reached by the refinement.
    pub s_tol: T,
    /// Levels closer than `degeneracy_rel * max|E|` are one level.
    pub degeneracy_rel: T,
}

impl<T: Real> Default for GapOptions<T> {
    fn default() -> Self {
        GapOptions {
            s_resolution: T::lit(0.01),
            s_tol: T::lit(1e-5),
            degeneracy_rel: T::lit(1e-12),
        }
    }
}

#[derive(Clone, Debug)]
pub struct GapScan<T> {
    pub path: Path<T>,
    /// `(s, E1 - E0)` on the sampling grid.
    pub samples: Vec<(T, T)>,
    pub s_at_min: T,
    pub min_gap: T,
}

/// Gap between the ground level and the first distinct level above it.
pub fn ground_gap<T: Real>(h: &OperatorMatrix<T>, degeneracy_rel: T) -> Result<T> {
    let dim = h.dim();
    let (lo, hi) = h.gershgorin();
    let tol = degeneracy_rel * lo.abs().max(hi.abs());
    let mut k = 2.min(dim);
    loop {
        let vals = eigensystem(h, k, false)?.values;
        if let Some(e1) = vals.iter().skip(1).find(|&&e| e - vals[0] > tol) {
            return Ok(*e1 - vals[0]);
        }
        if k == dim {
            return Err(error::numerical("spectrum is a single degenerate level"));
        }
        k = (2 * k).min(dim);
    }
}

/// Samples `E1 - E0` along `path` and refines its minimum.
///
/// The refinement is a golden-section search on the best sampled bracket. It
/// runs until the bracket is narrower than `s_tol` *and* the bracket is
/// narrow compared to the width of the gap minimum itself, so that
/// exponentially narrow avoided crossings are resolved rather than sampled
/// on their flanks.
pub fn gap_along_path<T: Real>(
    terms: &HamiltonianTerms<T>,
    gamma: T,
    path: Path<T>,
    opts: &GapOptions<T>,
) -> Result<GapScan<T>> {
    if !(opts.s_resolution > T::zero() && opts.s_resolution <= T::lit(0.5)) {
        return Err(error::config("s_resolution must lie in (0, 0.5]"));
    }
    let steps = (T::one() / opts.s_resolution).ceil().to_usize().unwrap_or(1).max(2);
    let gap_at = |s: T| ground_gap(&terms.assemble(s, path.lambda(s), gamma), opts.degeneracy_rel);
    let samples: Vec<(T, T)> = (0..=steps)
        .into_par_iter()
        .map(|k| {
            let s = T::from_count(k) / T::from_count(steps);
            gap_at(s).map(|g| (s, g))
        })
        .collect::<Result<_>>()?;

    let (kmin, &(mut s_best, mut g_best)) = samples
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.partial_cmp(&b.1 .1).unwrap())
        .unwrap();
    let mut a = samples[kmin.saturating_sub(1)].0;
    let mut b = samples[(kmin + 1).min(steps)].0;
    let (mut fa, mut fb) = (samples[kmin.saturating_sub(1)].1, samples[(kmin + 1).min(steps)].1);

    let inv_phi = T::lit(0.618_033_988_749_894_9);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = gap_at(x1)?;
    let mut f2 = gap_at(x2)?;
    let floor = T::epsilon() * T::lit(8.0);
    for _ in 0..200 {
        let width = b - a;
        let (xb, fbst) = if f1 < f2 { (x1, f1) } else { (x2, f2) };
        if fbst < g_best {
            s_best = xb;
            g_best = fbst;
        }
        let slope = ((fa - g_best) / (s_best - a).max(floor)).max((fb - g_best) / (b - s_best).max(floor));
        let resolved = slope * width < T::lit(1e-3) * g_best;
        if width <= floor || (width < opts.s_tol && resolved) {
            break;
        }
        if f1 < f2 {
            b = x2;
            fb = f2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = gap_at(x1)?;
        } else {
            a = x1;
            fa = f1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = gap_at(x2)?;
        }
    }
    Ok(GapScan {
        path,
        samples,
        s_at_min: s_best,
        min_gap: g_best,
    })
}

/// `|<E_j|psi>|^2` for the lowest `k` instantaneous eigenstates of `h`.
pub fn instantaneous_occupations<T: Real>(
    state: &StateVector<T>,
    h: &OperatorMatrix<T>,
    k: usize,
) -> Result<Vec<T>> {
    let sys = eigensystem(h, k, true)?;
    let amps = state.amplitudes();
    Ok(sys
        .vectors
        .unwrap()
        .iter()
        .map(|v| {
            let (re, im) = v
                .iter()
                .zip(amps)
                .fold((T::zero(), T::zero()), |(re, im), (&vi, a)| (re + vi * a.re, im + vi * a.im));
            re * re + im * im
        })
        .collect())
}
