//! Zero-temperature mean-field theory of the annealing Hamiltonian.
//!
//! The free energy per spin is
//!
//! ```text
//! f(m) = s(p-1) m^p - c R+(m) - (1-c) R-(m),
//! R+-(m) = sqrt((s p m^(p-1) +- (1-s)(1-lambda))^2 + (gamma (1-s) lambda)^2)
//! ```
//!
//! whose stationarity condition `f'(m) = s p (p-1) m^(p-2) (m - rhs(m)) = 0`
//! is the self-consistency equation `m = rhs(m)`.
//!
//! The representation rests on `-x^p = min_m [(p-1) m^p - p m^(p-1) x]`,
//! which holds for all real `x` when `p` is even but only for `x, m >= 0`
//! when `p` is odd. The search domain is therefore `[0, 1]` for odd `p`
//! (where negative `m` gives spurious minima below the true ground energy)
//! and `[-1, 1]` for even `p`.

use rayon::prelude::*;

use crate::error::{self, Result};
use crate::scalar::Real;
use crate::spectrum::Path;

/// Model constants of the mean-field free energy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanField<T> {
    pub p: u32,
    /// Fraction of up spins in the reference classical state.
    pub c: T,
    pub gamma: T,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanFieldPoint<T> {
    pub s: T,
    pub lambda: T,
    pub m_star: T,
    pub f_star: T,
    /// `m_star - rhs(m_star)`.
    pub residual: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransitionLine<T> {
    pub c: T,
    pub gamma: T,
    /// `(lambda, s)` of each located jump, ordered by `lambda` then `s`.
    pub points: Vec<(T, T)>,
    pub jump_sizes: Vec<T>,
}

/// Step of the exhaustive grid in `m`.
pub const M_GRID_STEP: f64 = 1e-3;
/// Free energies closer than this count as degenerate minima.
pub const TIE_TOL: f64 = 1e-12;

impl<T: Real> MeanField<T> {
    pub fn new(p: u32, c: T, gamma: T) -> Result<Self> {
        if p < 3 {
            return Err(error::config(format!("p = {p} must be at least 3")));
        }
        if !(c >= T::lit(0.5) && c <= T::one()) {
            return Err(error::config(format!("c = {c} outside [1/2, 1]")));
        }
        if !(gamma > T::zero()) || !gamma.is_finite() {
            return Err(error::config(format!("gamma = {gamma} must be positive")));
        }
        Ok(MeanField { p, c, gamma })
    }

    /// `(A+, A-, B)` with `R+- = sqrt(A+-^2 + B^2)`.
    fn parts(&self, m: T, s: T, lambda: T) -> (T, T, T) {
        let one = T::one();
        let field = s * T::from_u32(self.p).unwrap() * m.powi(self.p as i32 - 1);
        let init = (one - s) * (one - lambda);
        (field + init, field - init, self.gamma * (one - s) * lambda)
    }

    pub fn free_energy(&self, m: T, s: T, lambda: T) -> T {
        let (ap, am, b) = self.parts(m, s, lambda);
        let p = T::from_u32(self.p).unwrap();
        s * (p - T::one()) * m.powi(self.p as i32) - self.c * ap.hypot(b) - (T::one() - self.c) * am.hypot(b)
    }

    /// Right-hand side of the self-consistency equation.
    pub fn rhs(&self, m: T, s: T, lambda: T) -> T {
        let (ap, am, b) = self.parts(m, s, lambda);
        let ratio = |a: T| {
            let r = a.hypot(b);
            if r > T::zero() {
                a / r
            } else if a.is_zero() {
                T::zero()
            } else {
                a.signum()
            }
        };
        self.c * ratio(ap) + (T::one() - self.c) * ratio(am)
    }

    pub fn residual(&self, m: T, s: T, lambda: T) -> T {
        m - self.rhs(m, s, lambda)
    }

    /// `df/dm`.
    pub fn free_energy_derivative(&self, m: T, s: T, lambda: T) -> T {
        let p = T::from_u32(self.p).unwrap();
        s * p * (p - T::one()) * m.powi(self.p as i32 - 2) * self.residual(m, s, lambda)
    }

    /// Lower end of the magnetization domain.
    pub fn m_min(&self) -> T {
        if self.p % 2 == 0 {
            -T::one()
        } else {
            T::zero()
        }
    }

    /// Global minimizer of `f` over the magnetization domain.
    ///
    /// At `s = 0` the free energy does not depend on `m`; the magnetization
    /// is then the (constant) right-hand side of the self-consistency
    /// equation.
    pub fn solve_m(&self, s: T, lambda: T) -> MeanFieldPoint<T> {
        let point = |m: T| MeanFieldPoint {
            s,
            lambda,
            m_star: m,
            f_star: self.free_energy(m, s, lambda),
            residual: self.residual(m, s, lambda),
        };
        if s.is_zero() {
            return point(self.rhs(T::zero(), s, lambda));
        }
        let f = |m: T| self.free_energy(m, s, lambda);
        let lo = self.m_min();
        let steps = ((T::one() - lo).to_f64().unwrap() / M_GRID_STEP).round() as usize;
        let grid: Vec<T> = (0..=steps)
            .map(|k| lo + (T::one() - lo) * T::from_count(k) / T::from_count(steps))
            .collect();
        let vals: Vec<T> = grid.iter().map(|&m| f(m)).collect();

        let tie = T::tol(TIE_TOL);
        let mut best: Option<(T, T)> = None;
        for k in 0..=steps {
            let left = if k == 0 { T::infinity() } else { vals[k - 1] };
            let right = if k == steps { T::infinity() } else { vals[k + 1] };
            if !(vals[k] <= left && vals[k] <= right) {
                continue;
            }
            let (a, b) = (grid[k.saturating_sub(1)], grid[(k + 1).min(steps)]);
            let m = self.refine(a, b, s, lambda);
            let fm = f(m);
            best = match best {
                // later candidates have larger m, so they win ties
                Some((_, fb)) if fm > fb + tie => best,
                _ => Some((m, fm)),
            };
        }
        point(best.map(|b| b.0).unwrap_or(T::one()))
    }

    /// Golden-section search on `[a, b]`, polished by bisection on the sign
    /// of the residual `m - rhs(m)` (which has the sign of `f'` away from
    /// `m = 0`). Golden section alone stalls near `sqrt(eps)` relative
    /// accuracy and drifts further where `f` is flat, so the polishing
    /// bracket grows from the golden-section interval up to `[a, b]`.
    fn refine(&self, a: T, b: T, s: T, lambda: T) -> T {
        let f = |m: T| self.free_energy(m, s, lambda);
        let (cell_lo, cell_hi) = (a, b);
        let (mut a, mut b) = (a, b);
        let inv_phi = T::lit(0.618_033_988_749_894_9);
        let mut x1 = b - inv_phi * (b - a);
        let mut x2 = a + inv_phi * (b - a);
        let (mut f1, mut f2) = (f(x1), f(x2));
        while b - a > T::lit(1e-7).max(T::epsilon()) {
            if f1 <= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - inv_phi * (b - a);
                f1 = f(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + inv_phi * (b - a);
                f2 = f(x2);
            }
        }
        let mut m = if f1 <= f2 { x1 } else { x2 };
        let r = |m: T| self.residual(m, s, lambda);
        let mut pad = T::lit(1e-6);
        let bracket = loop {
            let (lo, hi) = ((a - pad).max(cell_lo), (b + pad).min(cell_hi));
            if r(lo) < T::zero() && r(hi) > T::zero() {
                break Some((lo, hi));
            }
            if lo == cell_lo && hi == cell_hi {
                break None;
            }
            pad = pad * T::lit(4.0);
        };
        if let Some((mut lo, mut hi)) = bracket {
            for _ in 0..200 {
                let mid = (lo + hi) * T::lit(0.5);
                if mid <= lo || mid >= hi {
                    break;
                }
                if r(mid) < T::zero() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let cand = if r(lo).abs() <= r(hi).abs() { lo } else { hi };
            if f(cand) <= f(m) + T::tol(TIE_TOL) * (T::one() + f(m).abs()) {
                m = cand;
            }
        } else if r(cell_hi) <= T::zero() && cell_hi == T::one() {
            m = T::one();
        } else if r(cell_lo) >= T::zero() && cell_lo == self.m_min() {
            m = cell_lo;
        }
        m
    }

    /// `m_star` along `path` at `s = 0, step, 2 step, ..., 1`.
    pub fn scan_path(&self, path: Path<T>, step: T) -> Result<Vec<MeanFieldPoint<T>>> {
        let n = grid_count(step)?;
        Ok((0..=n)
            .into_par_iter()
            .map(|k| {
                let s = T::from_count(k) / T::from_count(n);
                self.solve_m(s, path.lambda(s))
            })
            .collect())
    }

    /// First-order transition points of `m_star` on the `(lambda, s)` grid.
    ///
    /// Each adjacent pair of `s` samples whose `m_star` differ by more than
    /// `jump_threshold` is bisected down to a bracket of `1e-4` in `s`; the
    /// point is kept only if the jump survives refinement.
    pub fn trace_transitions(&self, grid_step: T, jump_threshold: T) -> Result<TransitionLine<T>> {
        let n = grid_count(grid_step)?;
        let columns: Vec<Vec<(T, T, T)>> = (0..=n)
            .into_par_iter()
            .map(|j| {
                let lambda = T::from_count(j) / T::from_count(n);
                let ms: Vec<T> = (0..=n)
                    .map(|k| self.solve_m(T::from_count(k) / T::from_count(n), lambda).m_star)
                    .collect();
                let mut found = Vec::new();
                for k in 0..n {
                    if (ms[k + 1] - ms[k]).abs() <= jump_threshold {
                        continue;
                    }
                    let (mut lo, mut hi) = (T::from_count(k) / T::from_count(n), T::from_count(k + 1) / T::from_count(n));
                    let (mut mlo, mut mhi) = (ms[k], ms[k + 1]);
                    while hi - lo > T::lit(1e-4) {
                        let mid = (lo + hi) * T::lit(0.5);
                        let mm = self.solve_m(mid, lambda).m_star;
                        if (mm - mlo).abs() >= (mhi - mm).abs() {
                            hi = mid;
                            mhi = mm;
                        } else {
                            lo = mid;
                            mlo = mm;
                        }
                    }
                    let jump = (mhi - mlo).abs();
                    if jump >= jump_threshold {
                        found.push((lambda, (lo + hi) * T::lit(0.5), jump));
                    }
                }
                found
            })
            .collect();
        let flat: Vec<(T, T, T)> = columns.into_iter().flatten().collect();
        Ok(TransitionLine {
            c: self.c,
            gamma: self.gamma,
            points: flat.iter().map(|&(l, s, _)| (l, s)).collect(),
            jump_sizes: flat.iter().map(|x| x.2).collect(),
        })
    }
}

fn grid_count<T: Real>(step: T) -> Result<usize> {
    if !(step > T::zero() && step <= T::lit(0.5)) {
        return Err(error::config(format!("grid step {step} outside (0, 0.5]")));
    }
    Ok((T::one() / step).round().to_usize().unwrap_or(2).max(2))
}

/// Largest `|m_star|` change between neighbouring points of a scan, with the
/// `s` value just before it.
pub fn max_adjacent_jump<T: Real>(scan: &[MeanFieldPoint<T>]) -> (T, T) {
    scan.windows(2)
        .map(|w| ((w[1].m_star - w[0].m_star).abs(), w[0].s))
        .fold((T::zero(), T::zero()), |acc, x| if x.0 > acc.0 { x } else { acc })
}

/// Location of the first-order jump along `path`, bisected to `s_tol`.
/// `None` when no adjacent jump exceeds `threshold`.
pub fn locate_jump<T: Real>(mf: &MeanField<T>, path: Path<T>, step: T, threshold: T, s_tol: T) -> Result<Option<(T, T)>> {
    let scan = mf.scan_path(path, step)?;
    let (jump, s0) = max_adjacent_jump(&scan);
    if jump <= threshold {
        return Ok(None);
    }
    let m = |s: T| mf.solve_m(s, path.lambda(s)).m_star;
    let (mut lo, mut hi) = (s0, s0 + step);
    let (mut mlo, mut mhi) = (m(lo), m(hi));
    while hi - lo > s_tol {
        let mid = (lo + hi) * T::lit(0.5);
        let mm = m(mid);
        if (mm - mlo).abs() >= (mhi - mm).abs() {
            hi = mid;
            mhi = mm;
        } else {
            lo = mid;
            mlo = mm;
        }
    }
    Ok(Some(((lo + hi) * T::lit(0.5), (mhi - mlo).abs())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mf(c: f64, gamma: f64) -> MeanField<f64> {
        MeanField::new(3, c, gamma).unwrap()
    }

    #[test]
    fn anchors() {
        let m = mf(0.8, 1.0);
        assert!((m.free_energy(1.0, 1.0, 0.3) + 1.0).abs() < 1e-15);
        assert!((m.free_energy(0.37, 0.0, 0.0) + 1.0).abs() < 1e-15);
        assert!(m.residual(1.0, 1.0, 0.2).abs() < 1e-15);
        assert!(m.residual(0.6, 0.0, 0.0).abs() < 1e-15);
        let pt = m.solve_m(1.0, 0.5);
        assert_eq!(pt.m_star, 1.0);
        assert!((pt.f_star + 1.0).abs() < 1e-15);
        let pt = m.solve_m(0.0, 0.0);
        assert!((pt.m_star - 0.6).abs() < 1e-15);
    }

    #[test]
    fn interior_minimum_is_stationary() {
        let m = mf(0.9, 1.0);
        let pt = m.solve_m(0.5, 0.5);
        assert!(pt.m_star.abs() < 1.0);
        assert!(pt.residual.abs() < 1e-8, "{}", pt.residual);
    }

    #[test]
    fn qa_axis_jump_matches_critical_field() {
        // -s m^3 - (1-s) sqrt(1 - m^2) first reaches -(1-s) at s = 4 / (4 + 3 sqrt 3)
        let m = mf(0.8, 1.0);
        let (s, jump) = locate_jump(&m, Path::Qa, 0.005, 0.05, 1e-4).unwrap().unwrap();
        assert!((s - 4.0 / (4.0 + 27f64.sqrt())).abs() < 2e-4, "{s}");
        assert!(jump > 0.3);
    }

    #[test]
    fn zero_denominator_is_guarded() {
        // s = 1 with m = 0 makes both square roots vanish
        let m = mf(0.7, 1.0);
        assert_eq!(m.rhs(0.0, 1.0, 1.0), 0.0);
        assert_eq!(m.rhs(1.0, 1.0, 1.0), 1.0);
    }
}
