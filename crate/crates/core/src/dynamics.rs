//! Schrödinger evolution in the sector basis, error probability and
//! time-to-solution.
//!
//! Each step applies exponentials of the Hamiltonian frozen at interior
//! points of the step, with the exponential action computed by Lanczos. The
//! step size is controlled by step doubling: one full step is compared
//! against two half steps and the half-step result is kept. Nothing ever
//! renormalizes the state, so the norm is a genuine accuracy monitor.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{self, Result};
use crate::linalg::{linear_fit, KrylovExp, LinearFit};
use crate::scalar::Real;
use crate::schedule::{Schedule, ScheduleKind};
use crate::sector::{build_basis, build_terms, coefficients, transverse_ground_state, HamiltonianTerms, ModelParams, SectorBasis};
use crate::spectrum::ground_state;
use crate::state::StateVector;

/// Time-stepping scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Propagator {
    /// `exp(-i dt H(t + dt/2))`, second order.
    Midpoint,
    /// Fourth-order commutator-free exponential with two Gauss-point
    /// exponentials per step.
    CommutatorFree4,
}

impl Propagator {
    fn order(self) -> i32 {
        match self {
            Propagator::Midpoint => 2,
            Propagator::CommutatorFree4 => 4,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EvolveOptions<T> {
    /// Allowed local error per unit time.
    pub tol: T,
    /// Error budget of each exponential action.
    pub expm_tol: T,
    pub propagator: Propagator,
    /// Number of equally spaced samples (including both ends); 0 disables.
    pub samples: usize,
    /// Record the instantaneous ground-state population at each sample.
    pub track_ground: bool,
}

impl<T: Real> Default for EvolveOptions<T> {
    fn default() -> Self {
        EvolveOptions {
            tol: T::tol(1e-9),
            expm_tol: T::tol(1e-12),
            propagator: Propagator::CommutatorFree4,
            samples: 0,
            track_ground: false,
        }
    }
}

/// Maximum tolerated `| |psi| - 1 |`.
pub const NORM_DRIFT_LIMIT: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct Sample<T> {
    pub t: T,
    pub s: T,
    pub lambda: T,
    pub magnetization: T,
    /// Population of the cost-function ground state(s).
    pub target_population: T,
    /// Population of the instantaneous ground state, when tracked.
    pub ground_population: Option<T>,
}

#[derive(Clone, Debug)]
pub struct EvolutionResult<T> {
    pub final_state: StateVector<T>,
    pub samples: Vec<Sample<T>>,
    pub norm_drift: T,
    pub step_count: usize,
    pub rejected_steps: usize,
    pub matvecs: usize,
}

/// Integrates `i d psi/dt = H(t) psi` over `[0, tau]`.
pub fn evolve<T: Real>(
    terms: &HamiltonianTerms<T>,
    gamma: T,
    schedule: &Schedule<T>,
    psi0: &StateVector<T>,
    opts: &EvolveOptions<T>,
) -> Result<EvolutionResult<T>> {
    evolve_observed(terms, gamma, schedule, psi0, opts, &mut |_, _| Ok(()))
}

/// [`evolve`], additionally handing the state at every sample time to
/// `observer`.
pub fn evolve_observed<T: Real>(
    terms: &HamiltonianTerms<T>,
    gamma: T,
    schedule: &Schedule<T>,
    psi0: &StateVector<T>,
    opts: &EvolveOptions<T>,
    observer: &mut dyn FnMut(T, &[Complex<T>]) -> Result<()>,
) -> Result<EvolutionResult<T>> {
    let dim = terms.dim();
    if psi0.dim() != dim {
        return Err(error::input(format!("state dimension {} != basis dimension {dim}", psi0.dim())));
    }
    let drift_limit = T::tol(NORM_DRIFT_LIMIT);
    if (psi0.norm() - T::one()).abs() > drift_limit {
        return Err(error::input("initial state is not normalized"));
    }
    if !(opts.tol > T::zero()) {
        return Err(error::config("integration tolerance must be positive"));
    }

    let tau = schedule.tau;
    let order = opts.propagator.order();
    let mut kry = KrylovExp::new(dim, opts.expm_tol);
    let mut psi = psi0.clone().into_amplitudes();
    let mut trial = psi.clone();
    let mut half = psi.clone();

    let sample_times: Vec<T> = match opts.samples {
        0 => vec![],
        1 => vec![tau],
        k => (0..k).map(|j| tau * T::from_count(j) / T::from_count(k - 1)).collect(),
    };
    let mut samples = Vec::with_capacity(sample_times.len());
    let mut next_sample = 0;

    let mut t = T::zero();
    let scale = terms.h0.max_abs() + terms.hinit.max_abs() + gamma * terms.vtf.max_abs() * T::lit(2.0);
    let mut dt = (T::one() / scale.max(T::one())).min(tau);
    let min_dt = tau * T::lit(1e-12);
    let mut norm_drift = T::zero();
    let (mut steps, mut rejected) = (0usize, 0usize);

    loop {
        while next_sample < sample_times.len() && sample_times[next_sample] <= t {
            samples.push(take_sample(terms, gamma, schedule, t, &psi, opts.track_ground)?);
            observer(t, &psi)?;
            next_sample += 1;
        }
        if t >= tau {
            break;
        }
        let mut target = tau;
        if next_sample < sample_times.len() {
            target = target.min(sample_times[next_sample]);
        }
        let remaining = target - t;
        let last = dt >= remaining;
        let h = if last { remaining } else { dt };

        trial.copy_from_slice(&psi);
        step(terms, gamma, schedule, opts.propagator, &mut kry, &mut trial, t, h)?;
        half.copy_from_slice(&psi);
        let hh = h * T::lit(0.5);
        step(terms, gamma, schedule, opts.propagator, &mut kry, &mut half, t, hh)?;
        step(terms, gamma, schedule, opts.propagator, &mut kry, &mut half, t + hh, hh)?;

        let diff = trial
            .iter()
            .zip(&half)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<T>()
            .sqrt();
        let err = diff / (T::lit(2.0).powi(order) - T::one());
        let budget = opts.tol * h;
        let ratio = if err > T::zero() { budget / err } else { T::lit(1e6) };
        let factor = (T::lit(0.9) * ratio.powf(T::one() / T::from_i32(order).unwrap()))
            .min(T::lit(4.0))
            .max(T::lit(0.2));

        if err <= budget {
            std::mem::swap(&mut psi, &mut half);
            t = if last { target } else { t + h };
            steps += 1;
            let nrm = psi.iter().map(|a| a.norm_sqr()).sum::<T>().sqrt();
            norm_drift = norm_drift.max((nrm - T::one()).abs());
            if norm_drift > drift_limit {
                return Err(error::numerical(format!(
                    "norm drift {norm_drift} exceeds {drift_limit} at t = {t}"
                )));
            }
            if !last || factor > T::one() {
                dt = h * factor;
            }
        } else {
            rejected += 1;
            dt = h * factor;
            if dt < min_dt {
                return Err(error::numerical(format!("step size underflow at t = {t} (dt = {dt})")));
            }
        }
    }

    Ok(EvolutionResult {
        final_state: StateVector::from_amplitudes(psi),
        samples,
        norm_drift,
        step_count: steps,
        rejected_steps: rejected,
        matvecs: kry.matvecs(),
    })
}

/// Advances `psi` from `t` to `t + h` with a single propagator step.
#[allow(clippy::too_many_arguments)]
fn step<T: Real>(
    terms: &HamiltonianTerms<T>,
    gamma: T,
    schedule: &Schedule<T>,
    propagator: Propagator,
    kry: &mut KrylovExp<T>,
    psi: &mut [Complex<T>],
    t: T,
    h: T,
) -> Result<()> {
    let coeff = |tt: T| {
        let (s, l) = schedule.controls(tt);
        coefficients(s, l, gamma)
    };
    let exp_with = |kry: &mut KrylovExp<T>, psi: &mut [Complex<T>], (a, b, g): (T, T, T)| {
        let d0 = terms.h0.diagonal();
        let d1 = terms.hinit.diagonal();
        let mut apply = |x: &[Complex<T>], y: &mut [Complex<T>]| {
            terms.vtf.apply(x, y);
            for i in 0..x.len() {
                y[i] = y[i] * g + x[i] * (a * d0[i] + b * d1[i]);
            }
        };
        kry.apply(&mut apply, psi, h)
    };
    match propagator {
        Propagator::Midpoint => exp_with(kry, psi, coeff(t + h * T::lit(0.5))),
        Propagator::CommutatorFree4 => {
            let r3 = T::lit(3.0).sqrt();
            let c1 = T::lit(0.5) - r3 / T::lit(6.0);
            let c2 = T::lit(0.5) + r3 / T::lit(6.0);
            let w1 = (T::lit(3.0) - T::lit(2.0) * r3) / T::lit(12.0);
            let w2 = (T::lit(3.0) + T::lit(2.0) * r3) / T::lit(12.0);
            let (a1, b1, g1) = coeff(t + c1 * h);
            let (a2, b2, g2) = coeff(t + c2 * h);
            // first factor leans on the earlier Gauss point
            exp_with(kry, psi, (w2 * a1 + w1 * a2, w2 * b1 + w1 * b2, w2 * g1 + w1 * g2))?;
            exp_with(kry, psi, (w1 * a1 + w2 * a2, w1 * b1 + w2 * b2, w1 * g1 + w2 * g2))
        }
    }
}

fn take_sample<T: Real>(
    terms: &HamiltonianTerms<T>,
    gamma: T,
    schedule: &Schedule<T>,
    t: T,
    psi: &[Complex<T>],
    track_ground: bool,
) -> Result<Sample<T>> {
    let (s, lambda) = schedule.controls(t);
    let state = StateVector::from_amplitudes(psi.to_vec());
    let ground_population = if track_ground {
        let gs = ground_state(&terms.assemble(s, lambda, gamma))?;
        let (re, im) = gs
            .iter()
            .zip(psi)
            .fold((T::zero(), T::zero()), |(re, im), (&g, a)| (re + g * a.re, im + g * a.im));
        Some(re * re + im * im)
    } else {
        None
    };
    Ok(Sample {
        t,
        s,
        lambda,
        magnetization: state.magnetization(&terms.basis),
        target_population: success_probability(&state, &terms.basis, parity_even(terms)),
        ground_population,
    })
}

fn parity_even<T: Real>(terms: &HamiltonianTerms<T>) -> bool {
    // even p <=> the all-down state shares the all-up cost
    let d = terms.h0.diagonal();
    (d[0] - d[d.len() - 1]).abs() <= T::epsilon() * d[0].abs() * T::lit(4.0)
}

/// Population of the cost-function ground subspace: the all-up state, plus the
/// all-down state when `even_p`.
pub fn success_probability<T: Real>(state: &StateVector<T>, basis: &SectorBasis, even_p: bool) -> T {
    let a = state.amplitudes();
    let mut p = a[0].norm_sqr();
    if even_p && basis.dim() > 1 {
        p += a[basis.dim() - 1].norm_sqr();
    }
    p
}

/// `p_e = 1 - |<ground|psi>|^2` summed over the cost-function ground subspace.
pub fn error_probability<T: Real>(state: &StateVector<T>, basis: &SectorBasis, params: &ModelParams<T>) -> T {
    T::one() - success_probability(state, basis, params.p % 2 == 0)
}

/// Time to solution `tau * ln(1 - p_d) / ln(p_e)`.
///
/// Returns `tau` when a single run already meets the target (`p_e <= 1 - p_d`)
/// and `+inf` when the ground state is never reached (`p_e = 1`).
pub fn tts<T: Real>(tau: T, p_e: T, p_d: T) -> T {
    if p_e <= T::one() - p_d {
        return tau;
    }
    if p_e >= T::one() {
        return T::infinity();
    }
    tau * (T::one() - p_d).ln() / p_e.ln()
}

/// [`tts`] in terms of the success probability, accurate when it is tiny.
pub fn tts_from_success<T: Real>(tau: T, success: T, p_d: T) -> T {
    if success >= p_d {
        return tau;
    }
    if !(success > T::zero()) {
        return T::infinity();
    }
    let log_fail = (-success).ln_1p();
    (tau * (T::one() - p_d).ln() / log_fail).max(tau)
}

/// Annealing protocol of a time-to-solution study.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Protocol {
    /// Forward annealing from the transverse-field ground state.
    Qa,
    /// Reverse annealing along `s = lambda` from the classical state with a
    /// fraction `c` of up spins.
    AraLinear { c: f64 },
}

impl Protocol {
    /// Model for size `n`. Forward annealing never sees the block partition,
    /// so it runs in the single-block sector of dimension `n + 1`.
    pub fn params<T: Real>(&self, p: u32, n: usize, gamma: T) -> Result<ModelParams<T>> {
        match *self {
            Protocol::Qa => ModelParams::new(p, n, n, gamma),
            Protocol::AraLinear { c } => ModelParams::from_fraction(p, n, c, gamma),
        }
    }

    pub fn schedule<T: Real>(&self, tau: T) -> Result<Schedule<T>> {
        match self {
            Protocol::Qa => Schedule::qa(tau),
            Protocol::AraLinear { .. } => Schedule::ara_linear(tau),
        }
    }

    pub fn initial_state<T: Real>(&self, basis: &SectorBasis) -> StateVector<T> {
        match self {
            Protocol::Qa => transverse_ground_state(basis),
            Protocol::AraLinear { .. } => StateVector::basis(basis.dim(), basis.initial_index()),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Protocol::Qa => "qa".into(),
            Protocol::AraLinear { c } => format!("ara(c={c})"),
        }
    }
}

/// Initial state matching a schedule: the transverse-field ground state for
/// forward annealing, the classical `(S1, -S2)` state otherwise.
pub fn initial_state_for<T: Real>(schedule: &Schedule<T>, basis: &SectorBasis) -> StateVector<T> {
    match schedule.kind {
        ScheduleKind::Qa => transverse_ground_state(basis),
        ScheduleKind::IraQuadratic { .. } | ScheduleKind::AraLinear | ScheduleKind::AraCustom(_) => {
            StateVector::basis(basis.dim(), basis.initial_index())
        }
    }
}

/// One point of a `TTS(tau)` curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TtsPoint<T> {
    pub tau: T,
    pub p_e: T,
    pub success: T,
    pub tts: T,
    pub norm_drift: T,
}

/// Runs one anneal of length `tau` and returns its error statistics.
pub fn anneal_once<T: Real>(
    protocol: Protocol,
    params: &ModelParams<T>,
    terms: &HamiltonianTerms<T>,
    tau: T,
    p_d: T,
    opts: &EvolveOptions<T>,
) -> Result<TtsPoint<T>> {
    let schedule = protocol.schedule(tau)?;
    let psi0 = protocol.initial_state(&terms.basis);
    let res = evolve(terms, params.gamma, &schedule, &psi0, opts)?;
    let success = success_probability(&res.final_state, &terms.basis, params.p % 2 == 0);
    Ok(TtsPoint {
        tau,
        p_e: T::one() - success,
        success,
        tts: tts_from_success(tau, success, p_d),
        norm_drift: res.norm_drift,
    })
}

/// `TTS(tau)` on a grid of annealing times.
pub fn tts_curve<T: Real>(
    protocol: Protocol,
    params: &ModelParams<T>,
    taus: &[T],
    p_d: T,
    opts: &EvolveOptions<T>,
) -> Result<Vec<TtsPoint<T>>> {
    let terms = build_terms(&build_basis(params)?, params);
    taus.par_iter()
        .map(|&tau| anneal_once(protocol, params, &terms, tau, p_d, opts))
        .collect()
}

#[derive(Clone, Debug)]
pub struct TtsOptimum<T> {
    pub n: usize,
    pub tau_opt: T,
    pub tts_opt: T,
    /// The minimum sits on the edge of the `tau` grid: the true optimum is
    /// not bracketed and the scaling derived from it is a bound.
    pub boundary: bool,
    pub curve: Vec<TtsPoint<T>>,
}

#[derive(Clone, Debug)]
pub struct TtsScaling<T> {
    pub protocol: Protocol,
    pub rows: Vec<TtsOptimum<T>>,
    /// `ln TTS` against `ln N`.
    pub power_fit: Option<LinearFit<T>>,
    /// `ln TTS` against `N`.
    pub exp_fit: Option<LinearFit<T>>,
}

/// Log-spaced grid of `points` values spanning `[lo, hi]`.
pub fn log_grid<T: Real>(lo: T, hi: T, points: usize) -> Vec<T> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|k| (a + (b - a) * T::from_count(k) / T::from_count(points.max(2) - 1)).exp())
        .collect()
}

/// Optimal annealing time and TTS for each size, with power-law and
/// exponential fits of `TTS_opt(N)`.
///
/// Interior minima are refined by a golden-section search in `ln tau`
/// between the grid neighbours of the best grid point (`refine_steps`
/// additional anneals).
pub fn optimal_tts_scaling<T: Real>(
    protocol: Protocol,
    p: u32,
    gamma: T,
    sizes: &[usize],
    taus: &[T],
    p_d: T,
    refine_steps: usize,
    opts: &EvolveOptions<T>,
) -> Result<TtsScaling<T>> {
    if taus.len() < 3 {
        return Err(error::config("tau grid needs at least three points"));
    }
    let rows: Vec<TtsOptimum<T>> = sizes
        .iter()
        .map(|&n| {
            let params = protocol.params(p, n, gamma)?;
            let terms = build_terms(&build_basis(&params)?, &params);
            let curve: Vec<TtsPoint<T>> = taus
                .par_iter()
                .map(|&tau| anneal_once(protocol, &params, &terms, tau, p_d, opts))
                .collect::<Result<_>>()?;
            let (k, best) = curve
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.tts.partial_cmp(&b.1.tts).unwrap_or(std::cmp::Ordering::Equal))
                .unwrap();
            let boundary = k == 0 || k == curve.len() - 1;
            let (mut tau_opt, mut tts_opt) = (best.tau, best.tts);
            if !boundary && refine_steps > 0 {
                let f = |ln_tau: T| anneal_once(protocol, &params, &terms, ln_tau.exp(), p_d, opts).map(|x| x.tts);
                let (mut a, mut b) = (taus[k - 1].ln(), taus[k + 1].ln());
                let inv_phi = T::lit(0.618_033_988_749_894_9);
                let mut x1 = b - inv_phi * (b - a);
                let mut x2 = a + inv_phi * (b - a);
                let mut f1 = f(x1)?;
                let mut f2 = f(x2)?;
                for _ in 2..refine_steps {
                    if f1 < f2 {
                        b = x2;
                        x2 = x1;
                        f2 = f1;
                        x1 = b - inv_phi * (b - a);
                        f1 = f(x1)?;
                    } else {
                        a = x1;
                        x1 = x2;
                        f1 = f2;
                        x2 = a + inv_phi * (b - a);
                        f2 = f(x2)?;
                    }
                }
                for (x, fx) in [(x1, f1), (x2, f2)] {
                    if fx < tts_opt {
                        tau_opt = x.exp();
                        tts_opt = fx;
                    }
                }
            }
            Ok(TtsOptimum { n, tau_opt, tts_opt, boundary, curve })
        })
        .collect::<Result<_>>()?;
    let finite: Vec<&TtsOptimum<T>> = rows.iter().filter(|r| r.tts_opt.is_finite()).collect();
    let ln_tts: Vec<T> = finite.iter().map(|r| r.tts_opt.ln()).collect();
    let ns: Vec<T> = finite.iter().map(|r| T::from_count(r.n)).collect();
    let ln_ns: Vec<T> = ns.iter().map(|x| x.ln()).collect();
    Ok(TtsScaling {
        protocol,
        power_fit: linear_fit(&ln_ns, &ln_tts),
        exp_fit: linear_fit(&ns, &ln_tts),
        rows,
    })
}
