//! Annealing schedules: maps from time `t in [0, tau]` to controls `(s, lambda)`.

use crate::error::{self, Result};
use crate::scalar::Real;

/// Tabulated control point at normalized time `u = t / tau`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControlPoint<T> {
    pub u: T,
    pub s: T,
    pub lambda: T,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ScheduleKind<T> {
    /// Conventional forward annealing: `lambda = 1`, `s = t / tau`.
    Qa,
    /// Diagonal reverse-annealing path `s = lambda = t / tau`.
    AraLinear,
    /// Piecewise-linear path through tabulated points.
    AraCustom(Vec<ControlPoint<T>>),
    /// One reverse-annealing cycle: `lambda = 1`,
    /// `s = s_min + (1 - s_min)(2t/tau - 1)^2`.
    IraQuadratic { s_min: T },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Schedule<T> {
    pub kind: ScheduleKind<T>,
    pub tau: T,
    /// Run the path backwards in time, `t -> tau - t`.
    pub reversed: bool,
}

impl<T: Real> Schedule<T> {
    fn checked(kind: ScheduleKind<T>, tau: T) -> Result<Self> {
        if !(tau > T::zero()) || !tau.is_finite() {
            return Err(error::config(format!("tau = {tau} must be positive")));
        }
        Ok(Schedule { kind, tau, reversed: false })
    }

    pub fn qa(tau: T) -> Result<Self> {
        Self::checked(ScheduleKind::Qa, tau)
    }

    pub fn ara_linear(tau: T) -> Result<Self> {
        Self::checked(ScheduleKind::AraLinear, tau)
    }

    pub fn ira_quadratic(tau: T, s_min: T) -> Result<Self> {
        if !(s_min > T::zero() && s_min <= T::one()) {
            return Err(error::config(format!("s_min = {s_min} outside (0, 1]")));
        }
        Self::checked(ScheduleKind::IraQuadratic { s_min }, tau)
    }

    pub fn custom(tau: T, points: Vec<ControlPoint<T>>) -> Result<Self> {
        if points.len() < 2 {
            return Err(error::config("custom schedule needs at least two control points"));
        }
        let first = points.first().unwrap().u;
        let last = points.last().unwrap().u;
        if !first.is_zero() || last != T::one() {
            return Err(error::config("custom schedule must span u = 0 to u = 1"));
        }
        let unit = |x: T| x >= T::zero() && x <= T::one();
        for w in points.windows(2) {
            if !(w[1].u > w[0].u) {
                return Err(error::config("custom schedule times must increase"));
            }
        }
        if points.iter().any(|p| !unit(p.s) || !unit(p.lambda)) {
            return Err(error::config("custom schedule controls must lie in [0, 1]"));
        }
        Self::checked(ScheduleKind::AraCustom(points), tau)
    }

    /// Same path traversed from `t = tau` back to `t = 0`.
    pub fn reversed(&self) -> Self {
        Schedule {
            kind: self.kind.clone(),
            tau: self.tau,
            reversed: !self.reversed,
        }
    }

    /// Whether the schedule carries the initialization term (`lambda < 1`
    /// somewhere on the path).
    pub fn uses_init_term(&self) -> bool {
        matches!(self.kind, ScheduleKind::AraLinear | ScheduleKind::AraCustom(_))
    }

    /// Controls `(s, lambda)` at time `t`.
    pub fn controls(&self, t: T) -> (T, T) {
        let mut u = (t / self.tau).max(T::zero()).min(T::one());
        if self.reversed {
            u = T::one() - u;
        }
        match &self.kind {
            ScheduleKind::Qa => (u, T::one()),
            ScheduleKind::AraLinear => (u, u),
            ScheduleKind::IraQuadratic { s_min } => {
                let x = T::lit(2.0) * u - T::one();
                (*s_min + (T::one() - *s_min) * x * x, T::one())
            }
            ScheduleKind::AraCustom(points) => {
                let k = points
                    .windows(2)
                    .position(|w| u <= w[1].u)
                    .unwrap_or(points.len() - 2);
                let (a, b) = (points[k], points[k + 1]);
                let w = (u - a.u) / (b.u - a.u);
                (a.s + w * (b.s - a.s), a.lambda + w * (b.lambda - a.lambda))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints() {
        let qa = Schedule::qa(10.0).unwrap();
        assert_eq!(qa.controls(0.0), (0.0, 1.0));
        assert_eq!(qa.controls(10.0), (1.0, 1.0));
        let ara = Schedule::ara_linear(4.0).unwrap();
        assert_eq!(ara.controls(1.0), (0.25, 0.25));
    }

    #[test]
    fn ira_cycle_shape() {
        let ira = Schedule::ira_quadratic(10.0f64, 0.3).unwrap();
        assert_eq!(ira.controls(0.0), (1.0, 1.0));
        assert_eq!(ira.controls(10.0), (1.0, 1.0));
        assert!((ira.controls(5.0).0 - 0.3).abs() < 1e-15);
        let (a, _) = ira.controls(2.0);
        let (b, _) = ira.controls(8.0);
        assert!((a - b).abs() < 1e-15);
        assert!(Schedule::ira_quadratic(10.0, 0.0).is_err());
    }

    #[test]
    fn custom_and_reversed() {
        let pts = vec![
            ControlPoint { u: 0.0f64, s: 0.0, lambda: 0.0 },
            ControlPoint { u: 0.5, s: 0.2, lambda: 0.8 },
            ControlPoint { u: 1.0, s: 1.0, lambda: 1.0 },
        ];
        let sc = Schedule::custom(2.0, pts).unwrap();
        let (s, l) = sc.controls(0.5);
        assert!((s - 0.1).abs() < 1e-15 && (l - 0.4).abs() < 1e-15);
        let r = sc.reversed();
        assert_eq!(r.controls(0.0), (1.0, 1.0));
        assert_eq!(r.controls(2.0), (0.0, 0.0));
        assert!(Schedule::<f64>::custom(1.0, vec![]).is_err());
    }
}
