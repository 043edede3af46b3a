use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::config::{ExperimentConfig, ExperimentKind, SweepVariable};
use super::seeds::{derive_seed, realization_rng};
use super::stats::{linear_fit, Aggregate};
use super::table::Table;
use super::HarnessError;
use crate::diagnostics::{
    gap_ratio_stats, ipr_from_rows, mid_spectrum_window, operator_rows, DiagnosticsError,
};
use crate::linalg::{sample_goe_frobenius, symmetric_eigen, symmetric_eigenvalues};
use crate::models::{
    build_bath_liom_hamiltonian, build_chain_hamiltonian, BathLiomParams, ChainParams,
    ChainRealization, Pauli, TensorOperator,
};
use crate::resonance::{
    buffer_radius, classify_regime, default_epsilon, detect_resonant_sites, first_spin_criterion,
    log2_bootstrap_ratio, log2_bubble_resonance_ratio, predicted_buffer_length, ResonanceError,
};
use crate::rotation::{sw_iterate, RotationError};

/// A realization dropped from the aggregates, with the reason.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skip {
    pub sweep_index: usize,
    pub realization: usize,
    pub seed: u64,
    pub reason: String,
}

/// Inputs and aggregated outputs of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub kind: ExperimentKind,
    pub config: ExperimentConfig,
    /// Aggregated table written as `<stem>.csv`.
    pub table: Table,
    /// One row per realization, written as `<stem>_realizations.csv`.
    pub realizations: Option<Table>,
    /// `seeds[sweep_index][realization]`.
    pub seeds: Vec<Vec<u64>>,
    pub skips: Vec<Skip>,
    pub summary: BTreeMap<String, Value>,
}

impl ExperimentRecord {
    fn new(cfg: &ExperimentConfig, table: Table) -> Self {
        Self {
            kind: cfg.kind,
            config: cfg.clone(),
            table,
            realizations: None,
            seeds: Vec::new(),
            skips: Vec::new(),
            summary: BTreeMap::new(),
        }
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentRecord, HarnessError> {
    cfg.validate()?;
    match cfg.kind {
        ExperimentKind::ChainSpectrum => run_chain_spectrum(cfg),
        ExperimentKind::BathLiomSweep => run_bath_liom_sweep(cfg),
        ExperimentKind::DistanceSweep => run_distance_sweep(cfg),
        ExperimentKind::SwStep => run_sw_step(cfg),
        ExperimentKind::Percolation1d => run_percolation_1d(cfg),
        ExperimentKind::Criteria => run_criteria(cfg),
    }
}

enum Outcome<T> {
    Done(T),
    Skipped(String),
}

struct Job {
    point: usize,
    realization: usize,
    seed: u64,
}

/// Runs `work` for every (sweep point, realization) on a pool of
/// `cfg.jobs` threads and returns the outcomes ordered by point, then
/// realization.
fn run_jobs<T, F>(
    cfg: &ExperimentConfig,
    n_points: usize,
    seed_of: impl Fn(usize, usize) -> u64,
    work: F,
) -> Result<(Vec<Vec<Outcome<T>>>, Vec<Vec<u64>>), HarnessError>
where
    T: Send,
    F: Fn(usize, u64) -> Result<Outcome<T>, HarnessError> + Sync,
{
    let jobs: Vec<Job> = (0..n_points)
        .flat_map(|p| {
            let seed_of = &seed_of;
            (0..cfg.n_realizations).map(move |r| Job {
                point: p,
                realization: r,
                seed: seed_of(p, r),
            })
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| HarnessError::Config(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Outcome<T>> = pool.install(|| {
        jobs.par_iter()
            .map(|j| work(j.point, j.seed))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let mut grouped: Vec<Vec<Outcome<T>>> = (0..n_points).map(|_| Vec::new()).collect();
    let mut seeds: Vec<Vec<u64>> = vec![Vec::new(); n_points];
    for (job, out) in jobs.iter().zip(results) {
        debug_assert_eq!(grouped[job.point].len(), job.realization);
        grouped[job.point].push(out);
        seeds[job.point].push(job.seed);
    }
    Ok((grouped, seeds))
}

fn default_seed(cfg: &ExperimentConfig) -> impl Fn(usize, usize) -> u64 + '_ {
    move |p, r| derive_seed(cfg.master_seed, r as u32, p as u32)
}

fn collect_skips<T>(
    outcomes: &[Vec<Outcome<T>>],
    seeds: &[Vec<u64>],
    skips: &mut Vec<Skip>,
) {
    for (p, row) in outcomes.iter().enumerate() {
        for (r, o) in row.iter().enumerate() {
            if let Outcome::Skipped(reason) = o {
                skips.push(Skip {
                    sweep_index: p,
                    realization: r,
                    seed: seeds[p][r],
                    reason: reason.clone(),
                });
            }
        }
    }
}

fn done<T>(row: &[Outcome<T>]) -> impl Iterator<Item = (usize, &T)> {
    row.iter().enumerate().filter_map(|(r, o)| match o {
        Outcome::Done(t) => Some((r, t)),
        Outcome::Skipped(_) => None,
    })
}

fn diagnostics_outcome<T>(e: DiagnosticsError) -> Result<Outcome<T>, HarnessError> {
    match e {
        DiagnosticsError::AnnihilatedState(_) | DiagnosticsError::AllDegenerate => {
            Ok(Outcome::Skipped(e.to_string()))
        }
        other => Err(HarnessError::Numerical(other.to_string())),
    }
}

fn bath_params_at(
    base: &BathLiomParams,
    variable: Option<SweepVariable>,
    value: Option<f64>,
) -> BathLiomParams {
    let mut p = base.clone();
    if let (Some(var), Some(v)) = (variable, value) {
        match var {
            SweepVariable::NLoc => p.n_loc = v as usize,
            SweepVariable::NBath => p.n_bath = v as usize,
            SweepVariable::Alpha => p.alpha = v,
            SweepVariable::J0 => p.j0 = v,
            SweepVariable::WGf => p.w_gf = v,
            SweepVariable::Gamma | SweepVariable::Epsilon => {}
        }
    }
    p
}

/// Chain parameters and resonance cutoff at one sweep point.
fn chain_point(
    cfg: &ExperimentConfig,
    base: &ChainParams,
    value: Option<f64>,
) -> (ChainParams, f64) {
    let mut p = base.clone();
    let mut eps = cfg.epsilon;
    if let (Some(s), Some(v)) = (&cfg.sweep, value) {
        match s.variable {
            SweepVariable::Gamma => p.gamma = v,
            SweepVariable::Epsilon => eps = Some(v),
            _ => {}
        }
    }
    let eps = eps.unwrap_or_else(|| default_epsilon(p.gamma));
    (p, eps)
}

fn sweep_value_or(value: Option<f64>, fallback: f64) -> f64 {
    value.unwrap_or(fallback)
}

struct BathOutcome {
    d: f64,
    r: Option<f64>,
    sumrule: f64,
}

/// D(O_B) and the mean gap ratio against the number of coupled spins (or
/// another bath parameter).
pub fn run_bath_liom_sweep(cfg: &ExperimentConfig) -> Result<ExperimentRecord, HarnessError> {
    let base = cfg.bath_params()?;
    let variable = cfg.sweep.as_ref().map(|s| s.variable);
    let points = cfg.sweep_points();
    let params: Vec<BathLiomParams> = points
        .iter()
        .map(|&v| bath_params_at(base, variable, v))
        .collect();
    for p in &params {
        p.validate(cfg.max_dim)?;
    }
    let (outcomes, seeds) = run_jobs(cfg, params.len(), default_seed(cfg), |pi, seed| {
        bath_realization(&params[pi], cfg, seed)
    })?;

    let mut table = Table::new(&[
        "sweep_value",
        "n_ok",
        "D_mean",
        "D_stderr",
        "r_mean",
        "r_stderr",
        "sumrule_max_residual",
    ]);
    let mut real = Table::new(&["sweep_value", "realization", "seed", "D", "r", "sumrule_residual"]);
    let mut r_counts = Vec::new();
    for (pi, row) in outcomes.iter().enumerate() {
        let x = sweep_value_or(points[pi], params[pi].n_loc as f64);
        let ds: Vec<f64> = done(row).map(|(_, o)| o.d).collect();
        let rs: Vec<f64> = done(row).filter_map(|(_, o)| o.r).collect();
        let worst = done(row).map(|(_, o)| o.sumrule).fold(0.0, f64::max);
        let d = Aggregate::of(&ds);
        let r = Aggregate::of(&rs);
        table.push_numeric(&[x, d.n as f64, d.mean, d.stderr, r.mean, r.stderr, worst]);
        r_counts.push(rs.len());
        for (ri, o) in done(row) {
            real.push_row(vec![
                Table::fmt(x),
                ri.to_string(),
                seeds[pi][ri].to_string(),
                Table::fmt(o.d),
                o.r.map_or_else(|| Table::fmt(f64::NAN), Table::fmt),
                Table::fmt(o.sumrule),
            ]);
        }
    }
    let mut rec = ExperimentRecord::new(cfg, table);
    collect_skips(&outcomes, &seeds, &mut rec.skips);
    rec.seeds = seeds;
    rec.realizations = Some(real);
    rec.summary.insert("r_samples".into(), json!(r_counts));
    insert_bath_criteria(&mut rec.summary, base);
    Ok(rec)
}

fn insert_bath_criteria(summary: &mut BTreeMap<String, Value>, p: &BathLiomParams) {
    let d_gf = p.bath_dim() as f64;
    summary.insert("regime".into(), json!(classify_regime(p.alpha)));
    summary.insert(
        "first_spin_criterion".into(),
        json!(first_spin_criterion(p.coupling(1), p.w_gf, d_gf).ok()),
    );
    let ell = match predicted_buffer_length(p.j0, p.alpha, p.w_gf, d_gf) {
        Ok(l) => json!(l),
        Err(_) => Value::Null,
    };
    summary.insert("predicted_buffer_length".into(), ell);
}

fn bath_realization(
    p: &BathLiomParams,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<Outcome<BathOutcome>, HarnessError> {
    let mut rng = realization_rng(seed);
    let sys = build_bath_liom_hamiltonian(p, cfg.max_dim, &mut rng)?;
    let o_b = TensorOperator::bath(sample_goe_frobenius(p.bath_dim(), &mut rng)?, p.n_loc);
    let spectrum = symmetric_eigen(&sys.hamiltonian)?;
    drop(sys);
    let window = mid_spectrum_window(spectrum.dim(), cfg.window_fraction)?;
    let r = match gap_ratio_stats(&spectrum.eigenvalues, window.clone()) {
        Ok(s) => Some(s.mean),
        Err(_) => None,
    };
    let rows = operator_rows(&o_b, &spectrum, window)?;
    match ipr_from_rows(&rows) {
        Ok(ipr) => Ok(Outcome::Done(BathOutcome {
            d: ipr.mean_log,
            r,
            sumrule: rows.sum_rule_residual(),
        })),
        Err(e) => diagnostics_outcome(e),
    }
}

/// D for the bath operator (distance 0) and for `S^x_i` at every distance
/// `i = 1..=n_loc`, with the fitted slope of D against distance.
pub fn run_distance_sweep(cfg: &ExperimentConfig) -> Result<ExperimentRecord, HarnessError> {
    let p = cfg.bath_params()?.clone();
    p.validate(cfg.max_dim)?;
    if p.n_loc == 0 {
        return Err(HarnessError::Config("distance-sweep needs n_loc >= 1".into()));
    }
    let (outcomes, seeds) = run_jobs(cfg, 1, default_seed(cfg), |_, seed| {
        distance_realization(&p, cfg, seed)
    })?;
    let row = &outcomes[0];
    let mut table = Table::new(&["distance", "n_ok", "D_mean", "D_stderr", "sumrule_max_residual"]);
    let mut real = Table::new(&["distance", "realization", "seed", "D", "sumrule_residual"]);
    let mut means = Vec::new();
    for dist in 0..=p.n_loc {
        let ds: Vec<f64> = done(row).map(|(_, o)| o.0[dist]).collect();
        let worst = done(row).map(|(_, o)| o.1[dist]).fold(0.0, f64::max);
        let a = Aggregate::of(&ds);
        means.push(a.mean);
        table.push_numeric(&[dist as f64, a.n as f64, a.mean, a.stderr, worst]);
        for (ri, o) in done(row) {
            real.push_row(vec![
                dist.to_string(),
                ri.to_string(),
                seeds[0][ri].to_string(),
                Table::fmt(o.0[dist]),
                Table::fmt(o.1[dist]),
            ]);
        }
    }
    let xs: Vec<f64> = (1..=p.n_loc).map(|i| i as f64).collect();
    let fit = linear_fit(&xs, &means[1..]);
    let mut rec = ExperimentRecord::new(cfg, table);
    collect_skips(&outcomes, &seeds, &mut rec.skips);
    rec.seeds = seeds;
    rec.realizations = Some(real);
    rec.summary.insert("fitted_slope".into(), json!(fit.map(|f| f.slope)));
    rec.summary.insert("fitted_intercept".into(), json!(fit.map(|f| f.intercept)));
    rec.summary.insert("theory_slope".into(), json!(2.0 * p.alpha.ln()));
    let excess: Vec<f64> = means.iter().map(|m| m - means[0]).collect();
    rec.summary.insert("D_minus_D0".into(), json!(excess));
    insert_bath_criteria(&mut rec.summary, &p);
    Ok(rec)
}

fn distance_realization(
    p: &BathLiomParams,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<Outcome<(Vec<f64>, Vec<f64>)>, HarnessError> {
    let mut rng = realization_rng(seed);
    let sys = build_bath_liom_hamiltonian(p, cfg.max_dim, &mut rng)?;
    let o_b = TensorOperator::bath(sample_goe_frobenius(p.bath_dim(), &mut rng)?, p.n_loc);
    let spectrum = symmetric_eigen(&sys.hamiltonian)?;
    drop(sys);
    let window = mid_spectrum_window(spectrum.dim(), cfg.window_fraction)?;
    let mut ops: Vec<TensorOperator> = vec![o_b];
    for site in 0..p.n_loc {
        ops.push(TensorOperator::spin(Pauli::X, site, p.n_loc, p.bath_dim())?);
    }
    let mut ds = Vec::with_capacity(ops.len());
    let mut residuals = Vec::with_capacity(ops.len());
    for op in &ops {
        let rows = operator_rows(op, &spectrum, window.clone())?;
        match ipr_from_rows(&rows) {
            Ok(ipr) => ds.push(ipr.mean_log),
            Err(e) => return diagnostics_outcome(e),
        }
        residuals.push(rows.sum_rule_residual());
    }
    Ok(Outcome::Done((ds, residuals)))
}

struct ChainOutcome {
    r: f64,
    density: f64,
    n_blocks: usize,
}

/// Mean gap ratio and resonant-site density of dense chains.
pub fn run_chain_spectrum(cfg: &ExperimentConfig) -> Result<ExperimentRecord, HarnessError> {
    let base = cfg.chain_params()?;
    let points = cfg.sweep_points();
    let setups: Vec<(ChainParams, f64)> = points.iter().map(|&v| chain_point(cfg, base, v)).collect();
    for (p, _) in &setups {
        p.validate()?;
        if p.n_sites >= usize::BITS as usize - 1 || (1usize << p.n_sites) > cfg.max_dim {
            return Err(HarnessError::Capacity(format!(
                "chain of {} sites exceeds max_dim {}",
                p.n_sites, cfg.max_dim
            )));
        }
    }
    let (outcomes, seeds) = run_jobs(cfg, setups.len(), default_seed(cfg), |pi, seed| {
        let (p, eps) = &setups[pi];
        let mut rng = realization_rng(seed);
        let chain = ChainRealization::sample(p, &mut rng)?;
        let report = detect_resonant_sites(&chain, Some(*eps))?;
        let h = build_chain_hamiltonian(&chain, cfg.max_dim)?;
        let ev = symmetric_eigenvalues(&h)?;
        let window = mid_spectrum_window(ev.len(), cfg.window_fraction)?;
        match gap_ratio_stats(&ev, window) {
            Ok(s) => Ok(Outcome::Done(ChainOutcome {
                r: s.mean,
                density: report.empirical_density,
                n_blocks: report.blocks.len(),
            })),
            Err(e) => diagnostics_outcome(e),
        }
    })?;
    let mut table = Table::new(&[
        "sweep_value",
        "n_ok",
        "r_mean",
        "r_stderr",
        "resonant_density_mean",
        "resonant_density_stderr",
    ]);
    let mut real = Table::new(&["sweep_value", "realization", "seed", "r", "resonant_density", "n_blocks"]);
    for (pi, row) in outcomes.iter().enumerate() {
        let x = sweep_value_or(points[pi], setups[pi].0.gamma);
        let r = Aggregate::of(&done(row).map(|(_, o)| o.r).collect::<Vec<_>>());
        let dens = Aggregate::of(&done(row).map(|(_, o)| o.density).collect::<Vec<_>>());
        table.push_numeric(&[x, r.n as f64, r.mean, r.stderr, dens.mean, dens.stderr]);
        for (ri, o) in done(row) {
            real.push_row(vec![
                Table::fmt(x),
                ri.to_string(),
                seeds[pi][ri].to_string(),
                Table::fmt(o.r),
                Table::fmt(o.density),
                o.n_blocks.to_string(),
            ]);
        }
    }
    let mut rec = ExperimentRecord::new(cfg, table);
    collect_skips(&outcomes, &seeds, &mut rec.skips);
    rec.seeds = seeds;
    rec.realizations = Some(real);
    let eps: Vec<f64> = setups.iter().map(|s| s.1).collect();
    rec.summary.insert("epsilon".into(), json!(eps));
    Ok(rec)
}

/// Per-step off-diagonal norms of repeated rotations. The disorder of
/// realization `r` is the same at every sweep point.
pub fn run_sw_step(cfg: &ExperimentConfig) -> Result<ExperimentRecord, HarnessError> {
    let base = cfg.chain_params()?;
    let settings = cfg.sw.clone().unwrap_or_default();
    let points = cfg.sweep_points();
    let setups: Vec<(ChainParams, f64)> = points.iter().map(|&v| chain_point(cfg, base, v)).collect();
    for (p, _) in &setups {
        p.validate()?;
        if p.n_sites >= usize::BITS as usize - 1 || (1usize << p.n_sites) > cfg.max_dim {
            return Err(HarnessError::Capacity(format!(
                "chain of {} sites exceeds max_dim {}",
                p.n_sites, cfg.max_dim
            )));
        }
    }
    let eps_override = settings.epsilon;
    let fixed_disorder = |_p: usize, r: usize| derive_seed(cfg.master_seed, r as u32, 0);
    let (outcomes, seeds) = run_jobs(cfg, setups.len(), fixed_disorder, |pi, seed| {
        let (p, eps) = &setups[pi];
        let eps = eps_override.unwrap_or(*eps);
        let mut rng = realization_rng(seed);
        let chain = ChainRealization::sample(p, &mut rng)?;
        let h = build_chain_hamiltonian(&chain, cfg.max_dim)?;
        match sw_iterate(&h, &vec![eps; settings.steps]) {
            Ok(res) => Ok(Outcome::Done(res.report)),
            Err(RotationError::NotConverging(report)) => Ok(Outcome::Skipped(format!(
                "rotation did not converge: {}",
                serde_json::to_string(&report.steps).unwrap_or_default()
            ))),
            Err(e) => Err(e.into()),
        }
    })?;
    let mut table = Table::new(&[
        "sweep_value",
        "realization",
        "step",
        "epsilon",
        "offdiag_norm",
        "perturbative_norm",
        "resonant_norm",
    ]);
    // first_step[realization][point] = perturbative norm after one step.
    let mut first_step: Vec<Vec<Option<f64>>> = vec![vec![None; setups.len()]; cfg.n_realizations];
    for (pi, row) in outcomes.iter().enumerate() {
        let (p, eps) = &setups[pi];
        let eps = eps_override.unwrap_or(*eps);
        let x = sweep_value_or(points[pi], p.gamma);
        for (ri, rep) in done(row) {
            table.push_numeric(&[
                x,
                ri as f64,
                0.0,
                eps,
                rep.initial_offdiag_norm,
                rep.initial_perturbative_norm,
                rep.initial_resonant_norm,
            ]);
            for (k, s) in rep.steps.iter().enumerate() {
                table.push_numeric(&[
                    x,
                    ri as f64,
                    (k + 1) as f64,
                    s.epsilon,
                    s.offdiag_norm,
                    s.perturbative_norm,
                    s.resonant_norm,
                ]);
            }
            first_step[ri][pi] = Some(rep.steps.first().map_or(0.0, |s| s.perturbative_norm));
        }
    }
    let mut rec = ExperimentRecord::new(cfg, table);
    collect_skips(&outcomes, &seeds, &mut rec.skips);
    rec.seeds = seeds;
    let sweeps_gamma = matches!(&cfg.sweep, Some(s) if s.variable == SweepVariable::Gamma);
    if sweeps_gamma && setups.len() >= 2 {
        let lx: Vec<f64> = setups.iter().map(|(p, _)| p.gamma.ln()).collect();
        let slopes: Vec<Option<f64>> = first_step
            .iter()
            .map(|norms| {
                let ys: Option<Vec<f64>> = norms
                    .iter()
                    .map(|n| n.filter(|v| *v > 0.0).map(f64::ln))
                    .collect();
                ys.and_then(|ys| linear_fit(&lx, &ys)).map(|f| f.slope)
            })
            .collect();
        rec.summary.insert("loglog_slope_per_realization".into(), json!(slopes));
    }
    Ok(rec)
}

struct PercolationOutcome {
    density: f64,
    block_lengths: Vec<usize>,
}

/// Resonant-site density and resonant-block sizes on long chains.
pub fn run_percolation_1d(cfg: &ExperimentConfig) -> Result<ExperimentRecord, HarnessError> {
    let base = cfg.chain_params()?;
    let points = cfg.sweep_points();
    let setups: Vec<(ChainParams, f64)> = points.iter().map(|&v| chain_point(cfg, base, v)).collect();
    for (p, eps) in &setups {
        p.validate()?;
        if !(*eps > 0.0 && eps.is_finite()) {
            return Err(ResonanceError::InvalidCutoff(*eps).into());
        }
    }
    let (outcomes, seeds) = run_jobs(cfg, setups.len(), default_seed(cfg), |pi, seed| {
        let (p, eps) = &setups[pi];
        let mut rng = realization_rng(seed);
        let chain = ChainRealization::sample(p, &mut rng)?;
        let rep = detect_resonant_sites(&chain, Some(*eps))?;
        Ok(Outcome::Done(PercolationOutcome {
            density: rep.empirical_density,
            block_lengths: rep.blocks.iter().map(|b| b.len()).collect(),
        }))
    })?;
    let mut table = Table::new(&[
        "sweep_value",
        "n_ok",
        "density_mean",
        "density_stderr",
        "mean_block_length",
        "max_block_length",
        "blocks_per_site",
        "union_bound",
    ]);
    for (pi, row) in outcomes.iter().enumerate() {
        let (p, eps) = &setups[pi];
        let x = points[pi].unwrap_or(*eps);
        let dens = Aggregate::of(&done(row).map(|(_, o)| o.density).collect::<Vec<_>>());
        let lengths: Vec<usize> = done(row).flat_map(|(_, o)| o.block_lengths.iter().copied()).collect();
        let total_sites = (dens.n * p.n_sites) as f64;
        let mean_len = if lengths.is_empty() {
            0.0
        } else {
            lengths.iter().sum::<usize>() as f64 / lengths.len() as f64
        };
        let max_len = lengths.iter().copied().max().unwrap_or(0) as f64;
        table.push_numeric(&[
            x,
            dens.n as f64,
            dens.mean,
            dens.stderr,
            mean_len,
            max_len,
            lengths.len() as f64 / total_sites,
            4.0 * eps,
        ]);
    }
    let mut rec = ExperimentRecord::new(cfg, table);
    collect_skips(&outcomes, &seeds, &mut rec.skips);
    rec.seeds = seeds;
    Ok(rec)
}

/// Table of every closed-form criterion for the configured parameters.
pub fn run_criteria(cfg: &ExperimentConfig) -> Result<ExperimentRecord, HarnessError> {
    let c = cfg
        .criteria
        .as_ref()
        .ok_or_else(|| HarnessError::Config("criteria needs a [criteria] table".into()))?;
    let mut table = Table::new(&["quantity", "dimension", "parameter", "value"]);
    let mut push = |name: &str, d: f64, x: f64, v: f64| {
        table.push_row(vec![name.to_string(), Table::fmt(d), Table::fmt(x), Table::fmt(v)]);
    };
    push("default_epsilon", f64::NAN, c.gamma, default_epsilon(c.gamma));
    for &d in &c.dimensions {
        for &l in &c.bubble_diameters {
            push("buffer_radius", d as f64, l, buffer_radius(c.gamma, l, d)?);
            push(
                "log2_bubble_ratio_at_r_eq_L",
                d as f64,
                l,
                log2_bubble_resonance_ratio(c.gamma, l, l, d)?,
            );
        }
        for &r in &c.bootstrap_distances {
            push("log2_bootstrap_ratio", d as f64, r, log2_bootstrap_ratio(c.gamma, r, d)?);
        }
    }
    let mut summary = BTreeMap::new();
    if let Some(p) = &cfg.bath {
        let d_gf = p.bath_dim() as f64;
        push(
            "first_spin_criterion",
            f64::NAN,
            d_gf,
            first_spin_criterion(p.coupling(1), p.w_gf, d_gf)?,
        );
        let ell = predicted_buffer_length(p.j0, p.alpha, p.w_gf, d_gf);
        push(
            "predicted_buffer_length",
            f64::NAN,
            p.alpha,
            ell.unwrap_or(f64::INFINITY),
        );
        insert_bath_criteria(&mut summary, p);
    }
    let mut rec = ExperimentRecord::new(cfg, table);
    rec.summary = summary;
    Ok(rec)
}
