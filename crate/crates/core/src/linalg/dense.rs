//! Dense symmetric eigensolver: Householder tridiagonalization followed by
//! implicit QL with Wilkinson shifts (EISPACK `tred2`/`tql2`).

use crate::error::{numerical, Result};
use crate::scalar::Real;

/// Row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    pub n: usize,
    pub data: Vec<T>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "matrix must be square");
            m.data[i * n..(i + 1) * n].copy_from_slice(row);
        }
        m
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut T {
        &mut self.data[i * self.n + j]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.n).map(|i| self.at(i, j)).collect()
    }
}

/// Eigenvalues ascending; `vectors` holds eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct SymmetricEigen<T> {
    pub values: Vec<T>,
    pub vectors: Option<DenseMatrix<T>>,
}

/// Full eigendecomposition of a dense symmetric matrix.
pub fn symmetric_eigen<T: Real>(a: &DenseMatrix<T>, with_vectors: bool) -> Result<SymmetricEigen<T>> {
    let n = a.n;
    if n == 0 {
        return Ok(SymmetricEigen {
            values: vec![],
            vectors: with_vectors.then(|| DenseMatrix::zeros(0)),
        });
    }
    let mut v = a.clone();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut d, &mut e, Some(&mut v))?;
    Ok(sorted(d, with_vectors.then_some(v)))
}

/// Eigendecomposition of the symmetric tridiagonal matrix with diagonal
/// `diag` and sub-diagonal `off` (`off.len() == diag.len() - 1`).
pub fn tridiagonal_eigen<T: Real>(diag: &[T], off: &[T], with_vectors: bool) -> Result<SymmetricEigen<T>> {
    let n = diag.len();
    assert!(off.len() + 1 == n || n == 0, "sub-diagonal length mismatch");
    let mut d = diag.to_vec();
    // tql2 expects e[i] to couple i-1 and i
    let mut e = vec![T::zero(); n];
    e[1..n].copy_from_slice(off);
    let mut v = with_vectors.then(|| DenseMatrix::identity(n));
    tql2(&mut d, &mut e, v.as_mut())?;
    Ok(sorted(d, v))
}

fn sorted<T: Real>(d: Vec<T>, v: Option<DenseMatrix<T>>) -> SymmetricEigen<T> {
    let n = d.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = v.map(|v| {
        let mut out = DenseMatrix::zeros(n);
        for (new, &old) in order.iter().enumerate() {
            for k in 0..n {
                *out.at_mut(k, new) = v.at(k, old);
            }
        }
        out
    });
    SymmetricEigen { values, vectors }
}

fn tred2<T: Real>(v: &mut DenseMatrix<T>, d: &mut [T], e: &mut [T]) {
    let n = v.n;
    for j in 0..n {
        d[j] = v.at(n - 1, j);
    }
    for i in (1..n).rev() {
        let mut scale = T::zero();
        let mut h = T::zero();
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale.is_zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v.at(i - 1, j);
                *v.at_mut(i, j) = T::zero();
                *v.at_mut(j, i) = T::zero();
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = T::zero();
            }
            for j in 0..i {
                f = d[j];
                *v.at_mut(j, i) = f;
                g = e[j] + v.at(j, j) * f;
                for k in j + 1..i {
                    g += v.at(k, j) * d[k];
                    e[k] += v.at(k, j) * f;
                }
                e[j] = g;
            }
            f = T::zero();
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    *v.at_mut(k, j) -= f * e[k] + g * d[k];
                }
                d[j] = v.at(i - 1, j);
                *v.at_mut(i, j) = T::zero();
            }
        }
        d[i] = h;
    }

    for i in 0..n - 1 {
        let vii = v.at(i, i);
        *v.at_mut(n - 1, i) = vii;
        *v.at_mut(i, i) = T::one();
        let h = d[i + 1];
        if !h.is_zero() {
            for k in 0..=i {
                d[k] = v.at(k, i + 1) / h;
            }
            for j in 0..=i {
                let mut g = T::zero();
                for k in 0..=i {
                    g += v.at(k, i + 1) * v.at(k, j);
                }
                for k in 0..=i {
                    *v.at_mut(k, j) -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            *v.at_mut(k, i + 1) = T::zero();
        }
    }
    for j in 0..n {
        d[j] = v.at(n - 1, j);
        *v.at_mut(n - 1, j) = T::zero();
    }
    *v.at_mut(n - 1, n - 1) = T::one();
    e[0] = T::zero();
}

fn tql2<T: Real>(d: &mut [T], e: &mut [T], mut v: Option<&mut DenseMatrix<T>>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();

    let two = T::lit(2.0);
    let eps = T::epsilon();
    let mut f = T::zero();
    let mut tst1 = T::zero();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            m = n - 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(numerical("tridiagonal QL iteration did not converge"));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(v) = v.as_deref_mut() {
                        let nn = v.n;
                        for k in 0..nn {
                            let row = k * nn;
                            let hk = v.data[row + i + 1];
                            let vki = v.data[row + i];
                            v.data[row + i + 1] = s * vki + c * hk;
                            v.data[row + i] = c * vki - s * hk;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }
    Ok(())
}
