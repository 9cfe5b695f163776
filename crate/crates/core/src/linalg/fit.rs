use crate::scalar::Real;

/// Ordinary least-squares line `y = intercept + slope * x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit<T> {
    pub slope: T,
    pub intercept: T,
    /// Root-mean-square residual.
    pub rms: T,
}

pub fn linear_fit<T: Real>(x: &[T], y: &[T]) -> Option<LinearFit<T>> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let nf = T::from_count(n);
    let mx = x.iter().copied().sum::<T>() / nf;
    let my = y.iter().copied().sum::<T>() / nf;
    let sxx: T = x.iter().map(|&a| (a - mx) * (a - mx)).sum();
    if sxx.is_zero() {
        return None;
    }
    let sxy: T = x.iter().zip(y).map(|(&a, &b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (x
        .iter()
        .zip(y)
        .map(|(&a, &b)| {
            let r = b - intercept - slope * a;
            r * r
        })
        .sum::<T>()
        / nf)
        .sqrt();
    Some(LinearFit { slope, intercept, rms })
}
