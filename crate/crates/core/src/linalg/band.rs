//! Banded symmetric `LDL^T` factorization of shifted sector operators.
//!
//! Sylvester's law of inertia turns the factorization into an eigenvalue
//! counter: the number of negative pivots of `A - sigma I` equals the number
//! of eigenvalues of `A` below `sigma`. Bisection on that count resolves
//! individual eigenvalues to absolute accuracy near `eps * |A|` however close
//! they are to their neighbours, which Krylov methods cannot do for the
//! exponentially small gaps that appear at first-order transitions.

use crate::error::{numerical, Result};
use crate::scalar::Real;
use crate::sector::OperatorMatrix;

/// `A - sigma I = L D L^T` with unit lower-triangular `L` of half-bandwidth `kd`.
#[derive(Clone, Debug)]
pub struct BandLdl<T> {
    n: usize,
    kd: usize,
    /// Row `i` holds `L[i][i-kd..i]` (left-padded when `i < kd`).
    l: Vec<T>,
    d: Vec<T>,
}

impl<T: Real> BandLdl<T> {
    pub fn factor(a: &OperatorMatrix<T>, sigma: T) -> Self {
        let n = a.dim();
        let kd = a.bandwidth();
        let scale = a.max_abs().max(sigma.abs()).max(T::min_positive_value());
        let tiny = T::epsilon() * T::epsilon() * scale;

        // band rows of A - sigma I: arow[i*kd + (kd - (i - j))] = A[i][j] for j < i
        let mut arow = vec![T::zero(); n * kd.max(1)];
        let mut diag: Vec<T> = a.diagonal().iter().map(|&x| x - sigma).collect();
        for (r, c, v) in a.lower_entries() {
            if r != c {
                arow[r * kd + (kd - (r - c))] = v;
            }
        }
        if kd == 0 {
            for x in diag.iter_mut() {
                if x.abs() < tiny {
                    *x = tiny;
                }
            }
            return BandLdl { n, kd, l: vec![], d: diag };
        }

        let mut l = vec![T::zero(); n * kd];
        let mut d = vec![T::zero(); n];
        let mut w = vec![T::zero(); kd];
        for i in 0..n {
            let j0 = i.saturating_sub(kd);
            let row_i = i * kd;
            // w[j - (i - kd)] = L[i][j] * d[j]
            for j in j0..i {
                let mut s = arow[row_i + kd - (i - j)];
                let k0 = j0.max(j.saturating_sub(kd));
                let row_j = j * kd;
                for k in k0..j {
                    s -= w[k + kd - i] * l[row_j + kd - (j - k)];
                }
                w[j + kd - i] = s;
                l[row_i + kd - (i - j)] = s / d[j];
            }
            let mut di = diag[i];
            for j in j0..i {
                di -= w[j + kd - i] * l[row_i + kd - (i - j)];
            }
            if di.abs() < tiny {
                di = tiny;
            }
            d[i] = di;
        }
        BandLdl { n, kd, l, d }
    }

    /// Number of eigenvalues of `A` strictly below the shift.
    pub fn negative_count(&self) -> usize {
        self.d.iter().filter(|&&x| x < T::zero()).count()
    }

    /// Solves `(A - sigma I) x = b` in place.
    pub fn solve(&self, b: &mut [T]) {
        let (n, kd) = (self.n, self.kd);
        if kd > 0 {
            for i in 0..n {
                let row = i * kd;
                let mut s = b[i];
                for j in i.saturating_sub(kd)..i {
                    s -= self.l[row + kd - (i - j)] * b[j];
                }
                b[i] = s;
            }
        }
        for (x, &d) in b.iter_mut().zip(&self.d) {
            *x /= d;
        }
        if kd > 0 {
            for i in (0..n).rev() {
                let row = i * kd;
                let xi = b[i];
                for j in i.saturating_sub(kd)..i {
                    b[j] -= self.l[row + kd - (i - j)] * xi;
                }
            }
        }
    }
}

/// Number of eigenvalues of `a` strictly below `sigma`.
pub fn count_below<T: Real>(a: &OperatorMatrix<T>, sigma: T) -> usize {
    BandLdl::factor(a, sigma).negative_count()
}

/// Lowest `k` eigenvalues by inertia bisection, each to absolute accuracy
/// `abs_tol` (floored at a few ulps of the spectral radius).
pub fn lowest_eigenvalues<T: Real>(a: &OperatorMatrix<T>, k: usize, abs_tol: T) -> Vec<T> {
    let n = a.dim();
    let k = k.min(n);
    if k == 0 {
        return vec![];
    }
    let (lo, hi) = a.gershgorin();
    let radius = lo.abs().max(hi.abs()).max(T::one());
    let pad = radius * T::lit(1e-12);
    let (lo, hi) = (lo - pad, hi + pad);
    let tol = abs_tol.max(radius * T::epsilon() * T::lit(4.0));

    let mut lower = vec![lo; k];
    let mut upper = vec![hi; k];
    let mut values = Vec::with_capacity(k);
    for j in 0..k {
        let mut a_lo = lower[j];
        if j > 0 {
            a_lo = a_lo.max(values[j - 1] - tol);
        }
        let mut b_hi = upper[j];
        let mut guard = 0;
        while b_hi - a_lo > tol && guard < 200 {
            guard += 1;
            let mid = (a_lo + b_hi) * T::lit(0.5);
            if mid <= a_lo || mid >= b_hi {
                break;
            }
            let c = count_below(a, mid);
            for i in j..k {
                if i < c {
                    upper[i] = upper[i].min(mid);
                } else {
                    lower[i] = lower[i].max(mid);
                }
            }
            if c > j {
                b_hi = mid;
            } else {
                a_lo = mid;
            }
        }
        values.push((a_lo + b_hi) * T::lit(0.5));
    }
    values
}

/// Eigenvector for a converged eigenvalue by shifted inverse iteration,
/// orthogonalized against `previous` (vectors of nearby eigenvalues).
pub fn inverse_iteration<T: Real>(
    a: &OperatorMatrix<T>,
    value: T,
    previous: &[Vec<T>],
) -> Result<Vec<T>> {
    let n = a.dim();
    let scale = a.max_abs().max(T::one());
    let shift = value - scale * T::epsilon() * T::lit(64.0);
    let ldl = BandLdl::factor(a, shift);
    // deterministic, generic start vector
    let mut x: Vec<T> = (0..n)
        .map(|i| T::one() + T::lit(0.5) * T::from_count((i * 7919) % 101) / T::lit(101.0))
        .collect();
    let mut y = vec![T::zero(); n];
    for _ in 0..4 {
        orthogonalize(&mut x, previous);
        normalize(&mut x);
        ldl.solve(&mut x);
    }
    orthogonalize(&mut x, previous);
    normalize(&mut x);
    a.apply_real(&x, &mut y);
    let res = y
        .iter()
        .zip(&x)
        .map(|(&hy, &xi)| (hy - value * xi) * (hy - value * xi))
        .sum::<T>()
        .sqrt();
    if !(res <= T::tol(1e-9) * scale) {
        return Err(numerical(format!(
            "inverse iteration residual {res} exceeds tolerance at eigenvalue {value}"
        )));
    }
    Ok(x)
}

fn orthogonalize<T: Real>(x: &mut [T], basis: &[Vec<T>]) {
    for _ in 0..2 {
        for q in basis {
            let dot: T = q.iter().zip(x.iter()).map(|(a, b)| *a * *b).sum();
            for (xi, &qi) in x.iter_mut().zip(q) {
                *xi -= dot * qi;
            }
        }
    }
}

fn normalize<T: Real>(x: &mut [T]) {
    let nrm = x.iter().map(|v| *v * *v).sum::<T>().sqrt();
    if nrm > T::zero() {
        x.iter_mut().for_each(|v| *v /= nrm);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense::{symmetric_eigen, DenseMatrix};
    use crate::sector::{build_basis, build_terms, ModelParams};

    fn sample(n: usize, up: usize, s: f64, lam: f64, gamma: f64) -> OperatorMatrix<f64> {
        let p = ModelParams::new(3, n, up, gamma).unwrap();
        let b = build_basis(&p).unwrap();
        build_terms(&b, &p).assemble(s, lam, gamma)
    }

    #[test]
    fn inertia_matches_dense_spectrum() {
        let h = sample(12, 8, 0.45, 0.6, 1.3);
        let dense = symmetric_eigen(&DenseMatrix::from_rows(&h.to_dense()), false).unwrap();
        for w in dense.values.windows(2).step_by(3) {
            let mid = 0.5 * (w[0] + w[1]);
            let expected = dense.values.iter().filter(|&&x| x < mid).count();
            assert_eq!(count_below(&h, mid), expected);
        }
    }

    #[test]
    fn bisection_and_vectors() {
        let h = sample(14, 10, 0.3, 0.7, 2.0);
        let dense = symmetric_eigen(&DenseMatrix::from_rows(&h.to_dense()), false).unwrap();
        let vals = lowest_eigenvalues(&h, 4, 1e-13);
        for (x, y) in vals.iter().zip(&dense.values) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
        let mut vecs: Vec<Vec<f64>> = vec![];
        for &v in &vals {
            let x = inverse_iteration(&h, v, &vecs).unwrap();
            vecs.push(x);
        }
        let dot: f64 = vecs[0].iter().zip(&vecs[1]).map(|(a, b)| a * b).sum();
        assert!(dot.abs() < 1e-10);
    }

    #[test]
    fn solve_recovers_rhs() {
        let h = sample(9, 6, 0.5, 0.5, 1.0);
        let sigma = -20.0;
        let ldl = BandLdl::factor(&h, sigma);
        let x0: Vec<f64> = (0..h.dim()).map(|i| (i as f64).sin()).collect();
        let mut b = vec![0.0; h.dim()];
        h.apply_real(&x0, &mut b);
        for (bi, xi) in b.iter_mut().zip(&x0) {
            *bi -= sigma * xi;
        }
        ldl.solve(&mut b);
        for (x, y) in b.iter().zip(&x0) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
