//! One function per experiment. Each returns its tables in a fixed layout;
//! parallel work is collected in grid order so results do not depend on the
//! number of workers.

use rayon::prelude::*;
use serde_json::json;

use revanneal::dynamics::{
    anneal_once, evolve, initial_state_for, optimal_tts_scaling, success_probability, EvolveOptions, Propagator, Protocol,
};
use revanneal::ira::{cycle_spectral_trace, single_cycle, transition_matrix, CycleSpec, IraModel, ProbabilityVector};
use revanneal::schedule::{ControlPoint, Schedule};
use revanneal::sector::{build_basis, build_terms, ModelParams};
use revanneal::semiclassical::{
    potential_landscape, svd_evolve, svd_threshold_scan, svmc_run, BlockAngles, Proposal, Semiclassical, SvdOptions, SvmcConfig,
};
use revanneal::spectrum::{gap_along_path, GapOptions, Path};
use revanneal::statics::MeanField;

use crate::output::Table;
use crate::{row, Config, ResultBundle, RunError};

type Res<T> = Result<T, RunError>;

pub fn dispatch(experiment: &str, cfg: &Config) -> Res<ResultBundle> {
    match experiment {
        "phase-diagram" => phase_diagram(cfg),
        "gap-scaling" => gap_scaling(cfg),
        "evolve" => evolve_one(cfg),
        "error-scaling" => error_scaling(cfg),
        "tts" => tts(cfg),
        "tts-scaling" => tts_scaling(cfg),
        "svd" => svd(cfg),
        "svd-scan" => svd_scan(cfg),
        "potential" => potential(cfg),
        "svmc" => svmc(cfg),
        "ira-cycle" => ira_cycle(cfg),
        "ira-markov" => ira_markov(cfg),
        "ira-spectrum" => ira_spectrum(cfg),
        other => Err(RunError::config(format!("unknown experiment `{other}`"))),
    }
}

fn core<T>(item: &str, r: revanneal::Result<T>) -> Res<T> {
    r.map_err(|e| RunError::from_core(item, e))
}

fn params(cfg: &Config, n: usize, c: f64, gamma: f64) -> Res<ModelParams<f64>> {
    let item = format!("N={n} c={c} gamma={gamma}");
    match cfg.n_up {
        Some(up) => core(&item, ModelParams::new(cfg.p, n, up, gamma)),
        None => core(&item, ModelParams::from_fraction(cfg.p, n, c, gamma)),
    }
}

fn evolve_options(cfg: &Config) -> Res<EvolveOptions<f64>> {
    let propagator = match cfg.propagator.as_str() {
        "cf4" => Propagator::CommutatorFree4,
        "midpoint" => Propagator::Midpoint,
        other => return Err(RunError::config(format!("key `propagator`: expected cf4 or midpoint, got `{other}`"))),
    };
    Ok(EvolveOptions {
        tol: cfg.tol,
        expm_tol: cfg.expm_tol,
        propagator,
        samples: 0,
        track_ground: false,
    })
}

fn path(cfg: &Config) -> Res<Path<f64>> {
    match cfg.path.as_str() {
        "diagonal" => Ok(Path::Diagonal),
        "qa" => Ok(Path::Qa),
        other => match other.parse::<f64>() {
            Ok(l) if (0.0..=1.0).contains(&l) => Ok(Path::FixedLambda(l)),
            _ => Err(RunError::config(format!("key `path`: expected diagonal, qa or a lambda in [0, 1], got `{other}`"))),
        },
    }
}

fn protocol(cfg: &Config, c: f64) -> Res<Protocol> {
    match cfg.protocol.as_str() {
        "qa" => Ok(Protocol::Qa),
        "ara" => Ok(Protocol::AraLinear { c }),
        other => Err(RunError::config(format!("key `protocol`: expected qa or ara, got `{other}`"))),
    }
}

/// Model for a protocol: forward annealing runs in the single-block sector.
fn protocol_params(cfg: &Config, proto: Protocol, n: usize, c: f64, gamma: f64) -> Res<ModelParams<f64>> {
    match proto {
        Protocol::Qa => core(&format!("N={n}"), ModelParams::new(cfg.p, n, n, gamma)),
        Protocol::AraLinear { .. } => params(cfg, n, c, gamma),
    }
}

fn schedule(cfg: &Config) -> Res<Schedule<f64>> {
    let s = match (cfg.protocol.as_str(), cfg.lambda_override) {
        ("ara", Some(l)) => {
            let pt = |u: f64| ControlPoint { u, s: u, lambda: l };
            Schedule::custom(cfg.tau, vec![pt(0.0), pt(1.0)])
        }
        (_, Some(_)) => return Err(RunError::config("key `lambda_override` applies to protocol ara only")),
        ("ara", None) => Schedule::ara_linear(cfg.tau),
        ("qa", None) => Schedule::qa(cfg.tau),
        ("ira", None) => Schedule::ira_quadratic(cfg.tau, cfg.s_min),
        (other, _) => return Err(RunError::config(format!("key `protocol`: expected qa, ara or ira, got `{other}`"))),
    };
    core("schedule", s)
}

fn phase_diagram(cfg: &Config) -> Res<ResultBundle> {
    let mut lines = Table::new("phase_diagram", &["c", "gamma", "lambda", "s", "jump"]);
    let mut scans = Table::new("path_scan", &["c", "gamma", "s", "lambda", "m_star", "f_star"]);
    let path = path(cfg)?;
    for gamma in cfg.gamma_list() {
        for c in cfg.c_list() {
            let item = format!("c={c} gamma={gamma}");
            let mf = core(&item, MeanField::new(cfg.p, c, gamma))?;
            let line = core(&item, mf.trace_transitions(cfg.s_step, cfg.jump_threshold))?;
            for (&(l, s), &j) in line.points.iter().zip(&line.jump_sizes) {
                lines.push(row![c, gamma, l, s, j]);
            }
            for pt in core(&item, mf.scan_path(path, cfg.s_step))? {
                scans.push(row![c, gamma, pt.s, pt.lambda, pt.m_star, pt.f_star]);
            }
        }
    }
    Ok(ResultBundle { tables: vec![lines, scans], runs: Vec::new() })
}

fn gap_scaling(cfg: &Config) -> Res<ResultBundle> {
    let path = path(cfg)?;
    let opts = GapOptions { s_resolution: cfg.s_resolution, s_tol: cfg.s_tol, ..Default::default() };
    let items: Vec<(f64, f64, usize)> = cfg
        .gamma_list()
        .into_iter()
        .flat_map(|g| cfg.c_list().into_iter().flat_map(move |c| cfg.n_list().into_iter().map(move |n| (g, c, n))))
        .collect();
    let scans = items
        .iter()
        .map(|&(gamma, c, n)| {
            let p = params(cfg, n, c, gamma)?;
            let terms = build_terms(&core("basis", build_basis(&p))?, &p);
            core(&format!("N={n} c={c} gamma={gamma}"), gap_along_path(&terms, gamma, path, &opts))
        })
        .collect::<Res<Vec<_>>>()?;
    let mut table = Table::new("gap_scaling", &["N", "c", "gamma", "path", "s_at_min", "min_gap"]);
    for (&(gamma, c, n), g) in items.iter().zip(&scans) {
        table.push(row![n, c, gamma, path.name(), g.s_at_min, g.min_gap]);
    }
    let mut fits = Table::new("gap_fits", &["c", "gamma", "model", "slope", "intercept", "rms"]);
    for gamma in cfg.gamma_list() {
        for c in cfg.c_list() {
            let pts: Vec<(f64, f64)> = items
                .iter()
                .zip(&scans)
                .filter(|(it, _)| it.0 == gamma && it.1 == c)
                .map(|(it, g)| (it.2 as f64, g.min_gap.ln()))
                .collect();
            push_fits(&mut fits, c, gamma, &pts);
        }
    }
    Ok(ResultBundle { tables: vec![table, fits], runs: Vec::new() })
}

/// Power-law (`ln y` against `ln N`) and exponential (`ln y` against `N`)
/// fits of `(N, ln y)` points.
fn push_fits(table: &mut Table, c: f64, gamma: f64, pts: &[(f64, f64)]) {
    use revanneal::linalg::fit::linear_fit;
    let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    for (model, xs) in [("power", &lx), ("exponential", &x)] {
        if let Some(f) = linear_fit(xs, &y) {
            table.push(row![c, gamma, model, f.slope, f.intercept, f.rms]);
        }
    }
}

fn evolve_one(cfg: &Config) -> Res<ResultBundle> {
    let sched = schedule(cfg)?;
    let p = match cfg.protocol.as_str() {
        "qa" => core("model", ModelParams::new(cfg.p, cfg.n, cfg.n, cfg.gamma))?,
        _ => params(cfg, cfg.n, cfg.c, cfg.gamma)?,
    };
    let basis = core("basis", build_basis(&p))?;
    let terms = build_terms(&basis, &p);
    let psi0 = initial_state_for(&sched, &basis);
    let opts = EvolveOptions { samples: cfg.samples.max(2), track_ground: true, ..evolve_options(cfg)? };
    let res = core("evolve", evolve(&terms, p.gamma, &sched, &psi0, &opts))?;
    let mut traj = Table::new(
        "trajectory",
        &["t", "s", "lambda", "magnetization", "target_population", "ground_population"],
    );
    for smp in &res.samples {
        traj.push(row![smp.t, smp.s, smp.lambda, smp.magnetization, smp.target_population, smp.ground_population.unwrap_or(f64::NAN)]);
    }
    let success = success_probability(&res.final_state, &basis, p.p % 2 == 0);
    let mut summary = Table::new("summary", &["N", "n_up", "gamma", "tau", "p_e", "final_m", "norm_drift", "steps"]);
    summary.push(row![
        p.n,
        p.n_up,
        p.gamma,
        cfg.tau,
        1.0 - success,
        res.final_state.magnetization(&basis),
        res.norm_drift,
        res.step_count
    ]);
    let runs = vec![json!({"item": "evolve", "norm_drift": res.norm_drift, "steps": res.step_count, "rejected": res.rejected_steps})];
    Ok(ResultBundle { tables: vec![traj, summary], runs })
}

fn error_scaling(cfg: &Config) -> Res<ResultBundle> {
    let opts = evolve_options(cfg)?;
    let taus = cfg.taus()?;
    let mut table = Table::new("error_scaling", &["protocol", "N", "gamma", "tau", "p_e", "norm_drift"]);
    let mut runs = Vec::new();
    for gamma in cfg.gamma_list() {
        for n in cfg.n_list() {
            let proto = protocol(cfg, cfg.c)?;
            let p = protocol_params(cfg, proto, n, cfg.c, gamma)?;
            let terms = build_terms(&core("basis", build_basis(&p))?, &p);
            let item = format!("{} N={n} gamma={gamma}", proto.name());
            let pts = taus
                .par_iter()
                .map(|&tau| core(&format!("{item} tau={tau}"), anneal_once(proto, &p, &terms, tau, cfg.p_d, &opts)))
                .collect::<Res<Vec<_>>>()?;
            for pt in pts {
                table.push(row![proto.name(), n, gamma, pt.tau, pt.p_e, pt.norm_drift]);
                runs.push(json!({"item": format!("{item} tau={}", pt.tau), "norm_drift": pt.norm_drift}));
            }
        }
    }
    Ok(ResultBundle { tables: vec![table], runs })
}

fn tts(cfg: &Config) -> Res<ResultBundle> {
    let opts = evolve_options(cfg)?;
    let taus = cfg.taus()?;
    let proto = protocol(cfg, cfg.c)?;
    let p = protocol_params(cfg, proto, cfg.n, cfg.c, cfg.gamma)?;
    let terms = build_terms(&core("basis", build_basis(&p))?, &p);
    let pts = taus
        .par_iter()
        .map(|&tau| core(&format!("tau={tau}"), anneal_once(proto, &p, &terms, tau, cfg.p_d, &opts)))
        .collect::<Res<Vec<_>>>()?;
    let mut table = Table::new("tts", &["tau", "p_e", "tts", "norm_drift"]);
    let mut runs = Vec::new();
    for pt in &pts {
        table.push(row![pt.tau, pt.p_e, pt.tts, pt.norm_drift]);
        runs.push(json!({"item": format!("tau={}", pt.tau), "norm_drift": pt.norm_drift}));
    }
    Ok(ResultBundle { tables: vec![table], runs })
}

fn tts_scaling(cfg: &Config) -> Res<ResultBundle> {
    let opts = evolve_options(cfg)?;
    let taus = cfg.taus()?;
    if taus.len() < 12 || taus[taus.len() - 1] / taus[0] < 100.0 {
        return Err(RunError::config("the tau grid must have at least 12 points spanning two decades"));
    }
    let proto = protocol(cfg, cfg.c)?;
    let sizes = cfg.n_list();
    for &n in &sizes {
        protocol_params(cfg, proto, n, cfg.c, cfg.gamma)?;
    }
    let sc = core(
        &proto.name(),
        optimal_tts_scaling(proto, cfg.p, cfg.gamma, &sizes, &taus, cfg.p_d, cfg.refine_steps, &opts),
    )?;
    let mut table = Table::new("tts_scaling", &["N", "tau_opt", "tts_opt", "boundary_flag"]);
    let mut curves = Table::new("tts_curves", &["N", "tau", "p_e", "tts"]);
    let mut runs = Vec::new();
    let mut pts = Vec::new();
    for r in &sc.rows {
        table.push(row![r.n, r.tau_opt, r.tts_opt, r.boundary]);
        pts.push((r.n as f64, r.tts_opt.ln()));
        for c in &r.curve {
            curves.push(row![r.n, c.tau, c.p_e, c.tts]);
            runs.push(json!({"item": format!("N={} tau={}", r.n, c.tau), "norm_drift": c.norm_drift}));
        }
    }
    let mut fits = Table::new("tts_fits", &["c", "gamma", "model", "slope", "intercept", "rms"]);
    let c = if proto == Protocol::Qa { 1.0 } else { cfg.c };
    push_fits(&mut fits, c, cfg.gamma, &pts);
    Ok(ResultBundle { tables: vec![table, fits, curves], runs })
}

fn svd(cfg: &Config) -> Res<ResultBundle> {
    let p = params(cfg, cfg.n, cfg.c, cfg.gamma)?;
    let sched = schedule(cfg)?;
    let opts = SvdOptions { samples: cfg.samples.max(2), ..Default::default() };
    let traj = core("svd", svd_evolve(&Semiclassical::new(&p), &sched, &BlockAngles::initial(), &opts))?;
    let mut table = Table::new("svd", &["t", "s", "lambda", "magnetization", "energy", "norm_error"]);
    for smp in &traj.samples {
        table.push(row![smp.t, smp.s, smp.lambda, smp.magnetization, smp.energy, smp.norm_error]);
    }
    let runs = vec![json!({"item": "svd", "steps": traj.steps})];
    Ok(ResultBundle { tables: vec![table], runs })
}

fn svd_scan(cfg: &Config) -> Res<ResultBundle> {
    let p = params(cfg, cfg.n, cfg.c, cfg.gamma)?;
    let pts = core("svd-scan", svd_threshold_scan(&p, &cfg.gamma_list(), cfg.tau, &evolve_options(cfg)?))?;
    let mut table = Table::new("svd_scan", &["gamma", "m_svd", "m_quantum"]);
    for pt in pts {
        table.push(row![pt.gamma, pt.m_svd, pt.m_quantum]);
    }
    Ok(ResultBundle { tables: vec![table], runs: Vec::new() })
}

fn potential(cfg: &Config) -> Res<ResultBundle> {
    let p = params(cfg, cfg.n, cfg.c, cfg.gamma)?;
    let land = core("potential", potential_landscape(&Semiclassical::new(&p), cfg.s, cfg.lambda, cfg.points))?;
    let mut grid = Table::new("potential", &["sin_theta1", "sin_theta2", "v_sc"]);
    for (i, &a) in land.axis.iter().enumerate() {
        for (j, &b) in land.axis.iter().enumerate() {
            grid.push(row![a, b, land.values[i][j]]);
        }
    }
    let mut minima = Table::new("potential_minima", &["sin_theta1", "sin_theta2"]);
    for &(a, b) in &land.minima {
        minima.push(row![a, b]);
    }
    Ok(ResultBundle { tables: vec![grid, minima], runs: Vec::new() })
}

fn svmc(cfg: &Config) -> Res<ResultBundle> {
    let p = params(cfg, cfg.n, cfg.c, cfg.gamma)?;
    let proposal = match cfg.proposal.as_str() {
        "uniform" => Proposal::Uniform,
        "perturbation" => Proposal::Perturbation(cfg.proposal_width),
        other => return Err(RunError::config(format!("key `proposal`: expected uniform or perturbation, got `{other}`"))),
    };
    let mut table = Table::new("svmc", &["sweep", "s", "mean_m", "std_m", "beta"]);
    for beta in cfg.beta_list() {
        let sc = SvmcConfig { beta, sweeps: cfg.sweeps, runs: cfg.runs, seed: cfg.seed, proposal };
        for pt in core(&format!("beta={beta}"), svmc_run(&sc, &p))? {
            table.push(row![pt.sweep, pt.s, pt.mean_m, pt.std_m, beta]);
        }
    }
    Ok(ResultBundle { tables: vec![table], runs: Vec::new() })
}

fn ira_model(cfg: &Config) -> Res<(IraModel<f64>, CycleSpec<f64>)> {
    let model = core("model", IraModel::new(cfg.p, cfg.n, cfg.gamma))?;
    let spec = core("cycle", CycleSpec::new(cfg.tau, cfg.s_min, cfg.r))?;
    Ok((model, spec))
}

/// Up-count of the initial bitstring for fraction `c`.
fn up_count(cfg: &Config, c: f64) -> Res<usize> {
    match cfg.n_up {
        Some(u) => Ok(u),
        None => Ok(params(cfg, cfg.n, c, cfg.gamma)?.n_up),
    }
}

fn ira_cycle(cfg: &Config) -> Res<ResultBundle> {
    let (model, spec) = ira_model(cfg)?;
    let opts = evolve_options(cfg)?;
    let cs = cfg.c_list();
    // several cycles need the whole chain; one cycle needs a single column
    let chain = if spec.r > 1 {
        Some(core("transition matrix", transition_matrix(&model, &spec, &opts))?)
    } else {
        None
    };
    let dists = cs
        .par_iter()
        .map(|&c| {
            let up = up_count(cfg, c)?;
            let pv = match &chain {
                Some(pm) => core(
                    &format!("c={c}"),
                    pm.iterate(&ProbabilityVector::point(model.dim(), model.index_of_up(up)), spec.r),
                )?,
                None => core(&format!("c={c}"), single_cycle(&model, up, &spec, &opts))?,
            };
            Ok((c, up, pv))
        })
        .collect::<Res<Vec<_>>>()?;
    let mut table = Table::new("ira_distribution", &["c", "m0", "magnetization", "probability"]);
    let mut summary = Table::new("ira_summary", &["c", "m0", "mean_m", "ground_probability"]);
    for (c, up, pv) in &dists {
        let m0 = model.magnetization(model.index_of_up(*up));
        for (j, &pj) in pv.entries.iter().enumerate().rev() {
            table.push(row![*c, m0, model.magnetization(j), pj]);
        }
        summary.push(row![*c, m0, pv.mean_magnetization(&model), pv.ground()]);
    }
    Ok(ResultBundle { tables: vec![table, summary], runs: Vec::new() })
}

fn ira_markov(cfg: &Config) -> Res<ResultBundle> {
    let (model, spec) = ira_model(cfg)?;
    let pm = core("transition matrix", transition_matrix(&model, &spec, &evolve_options(cfg)?))?;
    let mut table = Table::new("ira_transition", &["r", "j", "i", "probability"]);
    let mut stoch = Table::new("ira_stochasticity", &["r", "max_column_error"]);
    let mut agg = Table::new("ira_transition_by_energy", &["r", "j", "i", "probability"]);
    for r in 1..=spec.r.max(1) {
        let pr = pm.power(r);
        for i in 0..pr.dim {
            for j in 0..pr.dim {
                table.push(row![r, j, i, pr.get(j, i)]);
            }
        }
        stoch.push(row![r, pr.stochasticity_error()]);
        let pe = pr.energy_aggregate();
        for i in 0..pe.dim {
            for j in 0..pe.dim {
                agg.push(row![r, j, i, pe.get(j, i)]);
            }
        }
    }
    let runs = vec![json!({"item": "transition matrix", "stochasticity_error": pm.stochasticity_error()})];
    Ok(ResultBundle { tables: vec![table, agg, stoch], runs })
}

fn ira_spectrum(cfg: &Config) -> Res<ResultBundle> {
    let (model, spec) = ira_model(cfg)?;
    let up = up_count(cfg, cfg.c)?;
    let trace = core(
        "spectral trace",
        cycle_spectral_trace(&model, up, &spec, cfg.levels, cfg.samples.max(2), &evolve_options(cfg)?),
    )?;
    let mut table = Table::new("ira_spectrum", &["t", "s", "level", "energy", "occupation"]);
    for smp in &trace {
        for (k, (&e, &o)) in smp.energies.iter().zip(&smp.occupations).enumerate() {
            table.push(row![smp.t, smp.s, k, e, o]);
        }
    }
    Ok(ResultBundle { tables: vec![table], runs: Vec::new() })
}
