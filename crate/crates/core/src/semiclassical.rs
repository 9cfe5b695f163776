//! Classical comparators built on the semiclassical potential
//!
//! ```text
//! V/N = -s mz^p - (1-s)(1-lambda)(n1 u1z - n2 u2z) - gamma (1-s) lambda (n1 u1x + n2 u2x),
//! mz  = n1 u1z + n2 u2z,
//! ```
//!
//! where `u_k = (z: sin th_k cos ph_k, y: sin th_k sin ph_k, x: cos th_k)` is
//! the unit vector of block `k` and `n_k` its share of the spins.
//!
//! Spin-vector dynamics (SVD) precesses each block vector about its
//! effective field `b_k = -(1/n_k) grad_{u_k} (V/N)` at the single-spin rate,
//! `du_k/dt = KAPPA b_k x u_k`. Spin-vector Monte Carlo (SVMC) runs
//! Metropolis dynamics of one planar rotor per spin.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dynamics::{evolve, EvolveOptions};
use crate::error::{self, Result};
use crate::scalar::Real;
use crate::schedule::Schedule;
use crate::sector::{build_basis, build_terms, ModelParams};
use crate::state::StateVector;

/// Precession constant: `dS/dt = 2 S x h` for `H = -h . sigma`.
pub const KAPPA: f64 = -2.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockAngles<T> {
    pub theta1: T,
    pub phi1: T,
    pub theta2: T,
    pub phi2: T,
}

impl<T: Real> BlockAngles<T> {
    /// Classical initial state: block 1 along `+z`, block 2 along `-z`.
    pub fn initial() -> Self {
        let half_pi = T::FRAC_PI_2();
        BlockAngles {
            theta1: half_pi,
            phi1: T::zero(),
            theta2: -half_pi,
            phi2: T::zero(),
        }
    }

    pub fn vectors(&self) -> [Vec3<T>; 2] {
        [Vec3::from_angles(self.theta1, self.phi1), Vec3::from_angles(self.theta2, self.phi2)]
    }
}

/// Cartesian vector stored as `(x, y, z)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Vec3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Vec3 { x, y, z }
    }

    pub fn from_angles(theta: T, phi: T) -> Self {
        Vec3::new(theta.cos(), theta.sin() * phi.sin(), theta.sin() * phi.cos())
    }

    pub fn cross(self, o: Self) -> Self {
        Vec3::new(self.y * o.z - self.z * o.y, self.z * o.x - self.x * o.z, self.x * o.y - self.y * o.x)
    }

    pub fn norm(self) -> T {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    fn scale(self, a: T) -> Self {
        Vec3::new(self.x * a, self.y * a, self.z * a)
    }
}

/// Block weights and model constants of the semiclassical potential.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Semiclassical<T> {
    pub p: u32,
    pub n: usize,
    pub n1: T,
    pub n2: T,
    pub gamma: T,
}

impl<T: Real> Semiclassical<T> {
    pub fn new(params: &ModelParams<T>) -> Self {
        let n = T::from_count(params.n);
        Semiclassical {
            p: params.p,
            n: params.n,
            n1: T::from_count(params.n1()) / n,
            n2: T::from_count(params.n2()) / n,
            gamma: params.gamma,
        }
    }

    /// `V / N` for block vectors `u`.
    pub fn potential_per_spin(&self, u: &[Vec3<T>; 2], s: T, lambda: T) -> T {
        let one = T::one();
        let mz = self.n1 * u[0].z + self.n2 * u[1].z;
        -s * mz.powi(self.p as i32)
            - (one - s) * (one - lambda) * (self.n1 * u[0].z - self.n2 * u[1].z)
            - self.gamma * (one - s) * lambda * (self.n1 * u[0].x + self.n2 * u[1].x)
    }

    pub fn v_sc(&self, angles: &BlockAngles<T>, s: T, lambda: T) -> T {
        T::from_count(self.n) * self.potential_per_spin(&angles.vectors(), s, lambda)
    }

    /// `dV/d(theta1, phi1, theta2, phi2)`.
    pub fn v_sc_gradient(&self, a: &BlockAngles<T>, s: T, lambda: T) -> [T; 4] {
        let u = a.vectors();
        let g = self.cartesian_gradient(&u, s, lambda);
        let n = T::from_count(self.n);
        let by_angles = |gk: Vec3<T>, th: T, ph: T| {
            // du/dtheta = (-sin th, cos th sin ph, cos th cos ph); du/dphi = (0, sin th cos ph, -sin th sin ph)
            let d_th = -th.sin() * gk.x + th.cos() * ph.sin() * gk.y + th.cos() * ph.cos() * gk.z;
            let d_ph = th.sin() * ph.cos() * gk.y - th.sin() * ph.sin() * gk.z;
            (d_th * n, d_ph * n)
        };
        let (t1, p1) = by_angles(g[0], a.theta1, a.phi1);
        let (t2, p2) = by_angles(g[1], a.theta2, a.phi2);
        [t1, p1, t2, p2]
    }

    /// `grad_{u_k} (V/N)`.
    pub fn cartesian_gradient(&self, u: &[Vec3<T>; 2], s: T, lambda: T) -> [Vec3<T>; 2] {
        let one = T::one();
        let mz = self.n1 * u[0].z + self.n2 * u[1].z;
        let field = s * T::from_u32(self.p).unwrap() * mz.powi(self.p as i32 - 1);
        let init = (one - s) * (one - lambda);
        let tf = self.gamma * (one - s) * lambda;
        [
            Vec3::new(-tf * self.n1, T::zero(), -(field + init) * self.n1),
            Vec3::new(-tf * self.n2, T::zero(), -(field - init) * self.n2),
        ]
    }

    fn velocity(&self, u: &[Vec3<T>; 2], s: T, lambda: T) -> [Vec3<T>; 2] {
        let g = self.cartesian_gradient(u, s, lambda);
        let kappa = T::lit(KAPPA);
        let block = |k: usize, nk: T| {
            if nk.is_zero() {
                return Vec3::new(T::zero(), T::zero(), T::zero());
            }
            let b = g[k].scale(-T::one() / nk);
            b.cross(u[k]).scale(kappa)
        };
        [block(0, self.n1), block(1, self.n2)]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SvdSample<T> {
    pub t: T,
    pub s: T,
    pub lambda: T,
    pub magnetization: T,
    /// `V_SC` at the instantaneous controls.
    pub energy: T,
    /// Largest `| |u_k| - 1 |` before projection so far.
    pub norm_error: T,
}

#[derive(Clone, Debug)]
pub struct SvdTrajectory<T> {
    pub samples: Vec<SvdSample<T>>,
    pub final_vectors: [Vec3<T>; 2],
    pub steps: usize,
}

impl<T> SvdTrajectory<T> {
    pub fn final_magnetization(&self) -> T
    where
        T: Copy,
    {
        self.samples.last().expect("trajectory has samples").magnetization
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SvdOptions<T> {
    pub tol: T,
    /// Equally spaced output samples including both ends (at least 2).
    pub samples: usize,
}

impl<T: Real> Default for SvdOptions<T> {
    fn default() -> Self {
        SvdOptions { tol: T::tol(1e-12), samples: 201 }
    }
}

type State<T> = [Vec3<T>; 2];

fn axpy_state<T: Real>(y: &State<T>, terms: &[(T, &State<T>)]) -> State<T> {
    let mut out = *y;
    for &(a, k) in terms {
        for b in 0..2 {
            out[b].x += a * k[b].x;
            out[b].y += a * k[b].y;
            out[b].z += a * k[b].z;
        }
    }
    out
}

/// Integrates the SVD equations along `schedule` from `initial`.
///
/// Dormand-Prince 5(4) with absolute error control; the block
/// vectors are projected back onto the unit sphere after each accepted step.
pub fn svd_evolve<T: Real>(
    model: &Semiclassical<T>,
    schedule: &Schedule<T>,
    initial: &BlockAngles<T>,
    opts: &SvdOptions<T>,
) -> Result<SvdTrajectory<T>> {
    if opts.samples < 2 {
        return Err(error::config("SVD needs at least two output samples"));
    }
    let tau = schedule.tau;
    let times: Vec<T> = (0..opts.samples)
        .map(|k| tau * T::from_count(k) / T::from_count(opts.samples - 1))
        .collect();
    let mut u = initial.vectors();
    let f = |t: T, y: &State<T>| {
        let (s, l) = schedule.controls(t);
        model.velocity(y, s, l)
    };
    let sample = |t: T, y: &State<T>, norm_error: T| {
        let (s, lambda) = schedule.controls(t);
        SvdSample {
            t,
            s,
            lambda,
            magnetization: model.n1 * y[0].z + model.n2 * y[1].z,
            energy: T::from_count(model.n) * model.potential_per_spin(y, s, lambda),
            norm_error,
        }
    };

    // Dormand-Prince tableau
    let c = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0].map(T::lit);
    let a: [&[f64]; 7] = [
        &[],
        &[0.2],
        &[3.0 / 40.0, 9.0 / 40.0],
        &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
        &[19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0],
        &[9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0],
        &[35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    let b5 = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    let b4 = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let e: Vec<T> = b5.iter().zip(&b4).map(|(x, y)| T::lit(x - y)).collect();

    let mut samples = vec![sample(T::zero(), &u, T::zero())];
    let mut t = T::zero();
    let mut h = tau.min(T::lit(0.01));
    let min_h = tau * T::lit(1e-14);
    let mut steps = 0;
    let mut norm_error = T::zero();
    let mut k: Vec<State<T>> = Vec::with_capacity(7);
    for &target in &times[1..] {
        while t < target {
            let last = h >= target - t;
            let dt = if last { target - t } else { h };
            k.clear();
            k.push(f(t, &u));
            for i in 1..7 {
                let terms: Vec<(T, &State<T>)> = a[i].iter().zip(&k).map(|(&aij, kj)| (dt * T::lit(aij), kj)).collect();
                let yi = axpy_state(&u, &terms);
                k.push(f(t + c[i] * dt, &yi));
            }
            // the seventh stage is evaluated at the fifth-order solution
            let terms: Vec<(T, &State<T>)> = a[6].iter().zip(&k).map(|(&aij, kj)| (dt * T::lit(aij), kj)).collect();
            let y5 = axpy_state(&u, &terms);
            let errs: Vec<(T, &State<T>)> = e.iter().zip(&k).map(|(&ej, kj)| (dt * ej, kj)).collect();
            let zero = [Vec3::new(T::zero(), T::zero(), T::zero()); 2];
            let ev = axpy_state(&zero, &errs);
            let err = ev
                .iter()
                .flat_map(|v| [v.x, v.y, v.z])
                .fold(T::zero(), |m, x| m.max(x.abs()))
                / opts.tol;
            if err <= T::one() {
                t = if last { target } else { t + dt };
                u = y5;
                for v in u.iter_mut() {
                    let nrm = v.norm();
                    norm_error = norm_error.max((nrm - T::one()).abs());
                    *v = v.scale(T::one() / nrm);
                }
                steps += 1;
            }
            let factor = if err > T::zero() {
                (T::lit(0.9) * err.powf(T::lit(-0.2))).min(T::lit(5.0)).max(T::lit(0.2))
            } else {
                T::lit(5.0)
            };
            if !(err <= T::one() && last) || factor > T::one() {
                h = dt * factor;
            }
            if h < min_h {
                return Err(error::numerical(format!("SVD step size underflow at t = {t}")));
            }
        }
        samples.push(sample(t, &u, norm_error));
    }
    Ok(SvdTrajectory { samples, final_vectors: u, steps })
}

/// Final magnetizations of SVD and of the Schrödinger evolution along the
/// same schedule, for each transverse-field amplitude.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdPoint<T> {
    pub gamma: T,
    pub m_svd: T,
    pub m_quantum: T,
}

/// SVD against quantum final magnetization along the diagonal path
/// `s = lambda = t / tau`, for each `gamma` in `gammas`.
pub fn svd_threshold_scan<T: Real>(
    params: &ModelParams<T>,
    gammas: &[T],
    tau: T,
    evolve_opts: &EvolveOptions<T>,
) -> Result<Vec<ThresholdPoint<T>>> {
    let schedule = Schedule::ara_linear(tau)?;
    let basis = build_basis(params)?;
    gammas
        .par_iter()
        .map(|&gamma| {
            let p = params.with_gamma(gamma)?;
            let svd = svd_evolve(
                &Semiclassical::new(&p),
                &schedule,
                &BlockAngles::initial(),
                &SvdOptions { samples: 2, ..Default::default() },
            )?;
            let terms = build_terms(&basis, &p);
            let psi0 = StateVector::basis(basis.dim(), basis.initial_index());
            let q = evolve(&terms, gamma, &schedule, &psi0, evolve_opts)?;
            Ok(ThresholdPoint {
                gamma,
                m_svd: svd.final_magnetization(),
                m_quantum: q.final_state.magnetization(&basis),
            })
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct PotentialLandscape<T> {
    /// Grid of `sin th` values shared by both axes.
    pub axis: Vec<T>,
    /// `values[i][j]` is `V_SC` at `sin th1 = axis[i]`, `sin th2 = axis[j]`.
    pub values: Vec<Vec<T>>,
    /// Grid points lower than all their (up to eight) neighbours.
    pub minima: Vec<(T, T)>,
}

/// `V_SC` over `(sin th1, sin th2) in [-1, 1]^2` at `ph1 = ph2 = 0`, taking
/// `cos th >= 0` (the branch favoured by the transverse field).
pub fn potential_landscape<T: Real>(model: &Semiclassical<T>, s: T, lambda: T, points: usize) -> Result<PotentialLandscape<T>> {
    if points < 3 {
        return Err(error::config("landscape grid needs at least 3 points per axis"));
    }
    let axis: Vec<T> = (0..points)
        .map(|k| -T::one() + T::lit(2.0) * T::from_count(k) / T::from_count(points - 1))
        .collect();
    let vec_of = |z: T| Vec3::new((T::one() - z * z).max(T::zero()).sqrt(), T::zero(), z);
    let n = T::from_count(model.n);
    let values: Vec<Vec<T>> = axis
        .iter()
        .map(|&z1| {
            axis.iter()
                .map(|&z2| n * model.potential_per_spin(&[vec_of(z1), vec_of(z2)], s, lambda))
                .collect()
        })
        .collect();
    let mut minima = Vec::new();
    for i in 0..points {
        for j in 0..points {
            let v = values[i][j];
            let mut is_min = true;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (a, b) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) == (0, 0) || a < 0 || b < 0 || a >= points as i64 || b >= points as i64 {
                        continue;
                    }
                    if values[a as usize][b as usize] <= v {
                        is_min = false;
                    }
                }
            }
            if is_min {
                minima.push((axis[i], axis[j]));
            }
        }
    }
    Ok(PotentialLandscape { axis, values, minima })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Proposal<T> {
    /// Fresh angle uniform in `[0, pi]`.
    Uniform,
    /// Old angle plus a uniform shift in `[-width, width]`, reflected into
    /// `[0, pi]`.
    Perturbation(T),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SvmcConfig<T> {
    pub beta: T,
    pub sweeps: usize,
    pub runs: usize,
    pub seed: u64,
    pub proposal: Proposal<T>,
}

impl<T: Real> SvmcConfig<T> {
    pub fn new(beta: T, seed: u64) -> Self {
        SvmcConfig { beta, sweeps: 500, runs: 100, seed, proposal: Proposal::Uniform }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > T::zero()) || !self.beta.is_finite() {
            return Err(error::config(format!("beta = {} must be positive", self.beta)));
        }
        if self.sweeps == 0 || self.runs == 0 {
            return Err(error::config("sweeps and runs must be at least 1"));
        }
        if let Proposal::Perturbation(w) = self.proposal {
            if !(w > T::zero()) {
                return Err(error::config("perturbation width must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SvmcPoint<T> {
    pub sweep: usize,
    pub s: T,
    pub mean_m: T,
    /// Population standard deviation over runs.
    pub std_m: T,
}

/// Per-run RNG: one ChaCha8 stream per run index.
pub fn run_rng(seed: u64, run: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run as u64);
    rng
}

/// Rotor system for SVMC: `cos th_i` is the z component of spin `i`.
#[derive(Clone, Debug)]
pub struct Rotors<T> {
    pub theta: Vec<T>,
    /// `+1` for the up block, `-1` for the down block.
    pub eps: Vec<T>,
    sum_cos: T,
}

impl<T: Real> Rotors<T> {
    pub fn initial(params: &ModelParams<T>) -> Self {
        let (n1, n) = (params.n1(), params.n);
        let theta = (0..n).map(|i| if i < n1 { T::zero() } else { T::PI() }).collect();
        let eps = (0..n).map(|i| if i < n1 { T::one() } else { -T::one() }).collect();
        let mut r = Rotors { theta, eps, sum_cos: T::zero() };
        r.sum_cos = r.theta.iter().map(|t| t.cos()).sum();
        r
    }

    pub fn magnetization(&self) -> T {
        self.sum_cos / T::from_count(self.theta.len())
    }

    pub fn energy(&self, p: u32, gamma: T, s: T, lambda: T) -> T {
        let one = T::one();
        let n = T::from_count(self.theta.len());
        let init: T = self.theta.iter().zip(&self.eps).map(|(t, e)| *e * t.cos()).sum();
        let tf: T = self.theta.iter().map(|t| t.sin()).sum();
        -s * n * (self.sum_cos / n).powi(p as i32) - (one - s) * (one - lambda) * init - gamma * (one - s) * lambda * tf
    }

    /// Energy change of setting rotor `i` to `new`.
    pub fn delta(&self, i: usize, new: T, p: u32, gamma: T, s: T, lambda: T) -> T {
        let one = T::one();
        let n = T::from_count(self.theta.len());
        let old = self.theta[i];
        let dc = new.cos() - old.cos();
        let m0 = self.sum_cos / n;
        let m1 = (self.sum_cos + dc) / n;
        -s * n * (m1.powi(p as i32) - m0.powi(p as i32))
            - (one - s) * (one - lambda) * self.eps[i] * dc
            - gamma * (one - s) * lambda * (new.sin() - old.sin())
    }

    pub fn set(&mut self, i: usize, new: T) {
        self.sum_cos += new.cos() - self.theta[i].cos();
        self.theta[i] = new;
    }

    /// One Metropolis sweep over all rotors in index order. Returns the
    /// number of accepted moves.
    pub fn sweep<R: Rng>(&mut self, rng: &mut R, proposal: Proposal<T>, beta: T, p: u32, gamma: T, s: T, lambda: T) -> usize {
        let pi = T::PI();
        let mut accepted = 0;
        for i in 0..self.theta.len() {
            let new = match proposal {
                Proposal::Uniform => pi * T::lit(rng.gen::<f64>()),
                Proposal::Perturbation(w) => {
                    let mut x = self.theta[i] + w * T::lit(2.0 * rng.gen::<f64>() - 1.0);
                    // reflect into [0, pi]; symmetric, so detailed balance holds
                    loop {
                        if x < T::zero() {
                            x = -x;
                        } else if x > pi {
                            x = pi + pi - x;
                        } else {
                            break;
                        }
                    }
                    x
                }
            };
            let de = self.delta(i, new, p, gamma, s, lambda);
            if de <= T::zero() || T::lit(rng.gen::<f64>()) < (-beta * de).exp() {
                self.set(i, new);
                accepted += 1;
            }
        }
        // resynchronize the running sum against accumulated rounding
        self.sum_cos = self.theta.iter().map(|t| t.cos()).sum();
        accepted
    }
}

/// SVMC along `s = lambda = k / sweeps`, one sweep per value of `k`.
/// Row 0 is the initial state.
pub fn svmc_run<T: Real>(config: &SvmcConfig<T>, params: &ModelParams<T>) -> Result<Vec<SvmcPoint<T>>> {
    config.validate()?;
    let traces: Vec<Vec<T>> = (0..config.runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = run_rng(config.seed, run);
            let mut rot = Rotors::initial(params);
            let mut trace = Vec::with_capacity(config.sweeps + 1);
            trace.push(rot.magnetization());
            for k in 1..=config.sweeps {
                let s = T::from_count(k) / T::from_count(config.sweeps);
                rot.sweep(&mut rng, config.proposal, config.beta, params.p, params.gamma, s, s);
                trace.push(rot.magnetization());
            }
            trace
        })
        .collect();
    let runs = T::from_count(config.runs);
    Ok((0..=config.sweeps)
        .map(|k| {
            let mean = traces.iter().map(|tr| tr[k]).sum::<T>() / runs;
            let var = traces.iter().map(|tr| (tr[k] - mean) * (tr[k] - mean)).sum::<T>() / runs;
            SvmcPoint {
                sweep: k,
                s: T::from_count(k) / T::from_count(config.sweeps),
                mean_m: mean,
                std_m: var.sqrt(),
            }
        })
        .collect())
}
