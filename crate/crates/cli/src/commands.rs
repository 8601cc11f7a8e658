use crate::config::*;
use ising_rc::bounds::{decay_rate_bound, entropy_bound_uniform, fit_decay_rate, simulate_branching, BranchingParams, EntropyBoundInputs};
use ising_rc::disorder::{disorder_events_experiment, disordered_decay_scan, DisorderEventsConfig, Environment, ScanConfig};
use ising_rc::estimators::{
    entropy_scaling_experiment, estimate_rdm, exact_ground_rdm, exact_thermal_rdm, norm_decay_experiment, BetaRule,
    EntropyScalingConfig, MRule, NormDecayConfig, SlitRun,
};
use ising_rc::mixing::{boundary_influence, default_margin, factorization_ratio, t_quantities, MixingRow, MixingSets};
use ising_rc::percolation::estimate_connectivity;
use ising_rc::quantum_oracle::entropy;
use ising_rc::report::{write_csv, Provenance};
use ising_rc::rng::Rng;
use ising_rc::stats::line_fit;
use serde::Serialize;

type Render = Box<dyn FnOnce(&Provenance) -> ising_rc::Result<String>>;

/// Output files, rendered once the provenance header is known.
pub type Artifacts = Vec<(String, Render)>;

fn artifact<T: Serialize + 'static>(file: &str, rows: Vec<T>) -> (String, Render) {
    (file.to_string(), Box::new(move |p: &Provenance| write_csv(p, &rows)))
}

fn slit_run(m: u32, l: u32, beta: f64, lambda: f64, delta: f64) -> SlitRun {
    SlitRun::new(m, l, beta, lambda, delta)
}

macro_rules! chain {
    ($run:expr, $cfg:expr) => {{
        let mut r = $run;
        r.sweeps = $cfg.sweeps;
        r.burn_in = $cfg.burn_in;
        r.chains = $cfg.chains;
        r.batches = $cfg.batches;
        r.seed = $cfg.seed;
        r.workers = $cfg.workers.unwrap_or(0);
        r
    }};
}

#[derive(Serialize)]
struct SpectrumRow {
    k: usize,
    eigenvalue: f64,
}

#[derive(Serialize)]
struct MatrixRow {
    i: usize,
    j: usize,
    rho: f64,
}

#[derive(Serialize)]
struct OracleSummary {
    n: u32,
    m: u32,
    #[serde(rename = "L")]
    l: u32,
    lambda: f64,
    delta: f64,
    state: &'static str,
    beta: Option<f64>,
    entropy: f64,
    gap: Option<f64>,
}

pub fn oracle(cfg: &OracleConfig) -> Result<Artifacts, CliError> {
    let n = 2 * cfg.m + cfg.l + 1;
    if cfg.n.is_some_and(|given| given != n) {
        return Err(CliError::config(format!("n = {} but 2m + L + 1 = {n}", cfg.n.unwrap_or(0))));
    }
    let (lambda, delta) = couplings(cfg.theta, cfg.lambda, cfg.delta);
    let (rho, gap, state) = match cfg.beta {
        Some(beta) => (exact_thermal_rdm(cfg.m, cfg.l, beta, lambda, delta)?, None, "thermal"),
        None => {
            let (rho, gap) = exact_ground_rdm(cfg.m, cfg.l, lambda, delta)?;
            (rho, gap, "ground")
        }
    };
    let spectrum: Vec<SpectrumRow> =
        rho.spectrum().values.iter().enumerate().map(|(k, &eigenvalue)| SpectrumRow { k, eigenvalue }).collect();
    let d = rho.dim();
    let matrix: Vec<MatrixRow> =
        (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| MatrixRow { i, j, rho: rho.get(i, j) }).collect();
    let summary = OracleSummary { n, m: cfg.m, l: cfg.l, lambda, delta, state, beta: cfg.beta, entropy: entropy(&rho), gap };
    Ok(vec![
        artifact("oracle_spectrum.csv", spectrum),
        artifact("oracle_rdm.csv", matrix),
        artifact("oracle_summary.csv", vec![summary]),
    ])
}

/// Chains up to this length get the exact thermal state alongside.
const RDM_EXACT_SITES: u32 = 12;

#[derive(Serialize)]
struct RdmRow {
    i: usize,
    j: usize,
    rho: f64,
    se: f64,
    raw: f64,
    exact: Option<f64>,
    z: Option<f64>,
}

#[derive(Serialize)]
struct RdmSummary {
    m: u32,
    #[serde(rename = "L")]
    l: u32,
    beta: f64,
    lambda: f64,
    delta: f64,
    a_hat: f64,
    a_se: f64,
    entropy: f64,
    entropy_se: f64,
    trace_drift: f64,
    raw_min_eigenvalue: f64,
    exact_entropy: Option<f64>,
    max_z: Option<f64>,
}

pub fn rdm(cfg: &RdmConfig) -> Result<Artifacts, CliError> {
    let (lambda, delta) = couplings(cfg.theta, cfg.lambda, cfg.delta);
    let mut run = chain!(slit_run(cfg.m, cfg.l, cfg.beta, lambda, delta), cfg);
    run.mode = cfg.mode;
    let est = estimate_rdm(&run)?;
    let exact =
        if 2 * cfg.m + cfg.l + 1 <= RDM_EXACT_SITES { Some(exact_thermal_rdm(cfg.m, cfg.l, cfg.beta, lambda, delta)?) } else { None };
    let d = est.dim();
    let mut rows = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let rho = est.rho.get(i, j);
            let se = est.se.get(i, j);
            let ex = exact.as_ref().map(|e| e.get(i, j));
            let z = ex.filter(|_| se > 0.0).map(|e| (rho - e) / se);
            rows.push(RdmRow { i, j, rho, se, raw: est.raw.get(i, j), exact: ex, z });
        }
    }
    let summary = RdmSummary {
        m: cfg.m,
        l: cfg.l,
        beta: cfg.beta,
        lambda,
        delta,
        a_hat: est.a_hat,
        a_se: est.a_se,
        entropy: est.entropy,
        entropy_se: est.entropy_se,
        trace_drift: est.trace_drift,
        raw_min_eigenvalue: est.raw_min_eigenvalue,
        exact_entropy: exact.as_ref().map(entropy),
        max_z: exact.as_ref().map(|e| est.max_z(e.operator())),
    };
    Ok(vec![artifact("rdm.csv", rows), artifact("rdm_summary.csv", vec![summary])])
}

#[derive(Serialize)]
struct FitRow {
    gamma: Option<f64>,
    gamma_se: Option<f64>,
    intercept: Option<f64>,
    used: usize,
    non_decaying: Option<bool>,
}

impl FitRow {
    fn from(fit: Option<&ising_rc::bounds::DecayFit>) -> Self {
        match fit {
            Some(f) => FitRow {
                gamma: Some(f.gamma),
                gamma_se: Some(f.gamma_se),
                intercept: Some(f.intercept),
                used: f.used,
                non_decaying: Some(f.non_decaying),
            },
            None => FitRow { gamma: None, gamma_se: None, intercept: None, used: 0, non_decaying: None },
        }
    }
}

fn beta_rule(beta: Option<f64>) -> BetaRule {
    beta.map_or(BetaRule::Default, BetaRule::Fixed)
}

pub fn norm_decay(cfg: &NormDecayCfg) -> Result<Artifacts, CliError> {
    let run = chain!(slit_run(1, cfg.l, 1.0, cfg.theta, 1.0), cfg);
    let out = norm_decay_experiment(&NormDecayConfig {
        theta: cfg.theta,
        l: cfg.l,
        m_list: cfg.m_list.clone(),
        beta_rule: beta_rule(cfg.beta),
        run,
    })?;
    let fit = FitRow::from(out.fit.as_ref());
    Ok(vec![artifact("norm_decay.csv", out.rows), artifact("norm_decay_fit.csv", vec![fit])])
}

#[derive(Serialize)]
struct BoundRow {
    #[serde(rename = "L")]
    l: u32,
    gamma: f64,
    alpha: f64,
    #[serde(rename = "C")]
    c: f64,
    #[serde(rename = "K")]
    k: u64,
    nu: f64,
    bound: f64,
}

pub fn entropy_scan(cfg: &EntropyScanCfg) -> Result<Artifacts, CliError> {
    let run = cfg.mc.then(|| chain!(slit_run(1, 0, 1.0, cfg.theta, 1.0), cfg));
    let out = entropy_scaling_experiment(&EntropyScalingConfig {
        theta: cfg.theta,
        l_list: cfg.l_list.clone(),
        m_rule: cfg.m.map_or(MRule::EqualToL, MRule::Fixed),
        beta_rule: beta_rule(cfg.beta),
        run,
        exact: cfg.exact,
        envelope: None,
    })?;
    let mut bounds = Vec::new();
    if let Some(e) = out.envelope {
        for &l in &cfg.l_list {
            // Skipped where the envelope is too slow for the bound to apply.
            let Ok(inp) = EntropyBoundInputs::new(e.gamma, 2.0 * e.alpha, e.c, l.max(1)) else { continue };
            let Ok(b) = entropy_bound_uniform(&inp) else { continue };
            bounds.push(BoundRow { l, gamma: inp.gamma, alpha: inp.alpha, c: inp.c, k: b.k, nu: b.nu, bound: b.bound });
        }
    }
    Ok(vec![artifact("entropy_scaling.csv", out.rows), artifact("entropy_bound.csv", bounds)])
}

pub fn mixing_check(cfg: &MixingCfg) -> Result<Artifacts, CliError> {
    let (lambda, delta) = couplings(cfg.theta, cfg.lambda, cfg.delta);
    let beta = cfg.beta.unwrap_or(4.0 * f64::from(cfg.m + cfg.l + 1));
    let run = chain!(slit_run(cfg.m, cfg.l, beta, lambda, delta), cfg);
    let k = cfg.k.unwrap_or_else(|| default_margin(cfg.l));
    let row = |check: &str, value: f64, se: f64, bound_form: &str| MixingRow {
        check: check.to_string(),
        m: cfg.m,
        l: cfg.l,
        k,
        beta,
        value,
        se,
        bound_form: bound_form.to_string(),
    };
    let rows = match cfg.check {
        MixingCheck::Factorization => {
            let f = factorization_ratio(&run, cfg.k)?;
            if let Some(w) = &f.regime_warning {
                eprintln!("{}", serde_json::json!({ "warning": w }));
            }
            vec![row("factorization", f.max_deviation, f.max_se, "C exp(-gamma K)")]
        }
        MixingCheck::Boundary => {
            let b = boundary_influence(&run, &cfg.event)?;
            vec![row("boundary", b.deviation, b.se, "C exp(-gamma m)")]
        }
        MixingCheck::T => {
            let sets = match cfg.sets {
                SetsChoice::Slit => MixingSets::Slit { k },
                SetsChoice::Boundary => MixingSets::Boundary,
            };
            let t = t_quantities(&run, sets, &cfg.separator)?;
            let mut rows = vec![
                row("t1", t.t1, t.t1_se, "P(Delta <-> D)"),
                row("t2_sq", t.t2_sq, t.t2_sq_se, "P(D <-> Gamma)"),
                row("t1_percolation", t.t1_percolation, t.t1_percolation_se, "P(Delta <-> D), independent"),
                row("t2_sq_percolation", t.t2_sq_percolation, t.t2_sq_percolation_se, "P(D <-> Gamma), independent"),
            ];
            if let Some(v) = t.t {
                rows.push(row("t", v, f64::NAN, "t1 + 2 t2 + (t1 + t2)/(1 - t1 - 2 t2)"));
            }
            rows
        }
    };
    Ok(vec![artifact("mixing.csv", rows)])
}

#[derive(Serialize)]
struct BranchingRow {
    lambda: f64,
    delta: f64,
    mbar: f64,
    nu: f64,
    mu: f64,
    nu_hat: Option<f64>,
    nu_hat_se: Option<f64>,
    gamma_lower: f64,
    truncated: usize,
}

pub fn branching(cfg: &BranchingCfg) -> Result<Artifacts, CliError> {
    let params = BranchingParams::new(cfg.lambda, cfg.delta)?;
    let bound = decay_rate_bound(cfg.lambda, cfg.delta)?;
    if cfg.m_min >= cfg.m_max {
        return Err(CliError::config("need m_min < m_max"));
    }
    let sample = simulate_branching(&params, cfg.trials, cfg.seed);
    let (ms, lp): (Vec<f64>, Vec<f64>) = (cfg.m_min..=cfg.m_max)
        .filter_map(|m| {
            let (p, _) = sample.progeny_tail(m + 1);
            (p > 0.0).then(|| (m as f64, p.ln()))
        })
        .unzip();
    let fit = if ms.len() >= 3 { line_fit(&ms, &lp) } else { None };
    let row = BranchingRow {
        lambda: cfg.lambda,
        delta: cfg.delta,
        mbar: params.mean_offspring(),
        nu: bound.nu,
        mu: bound.mu,
        nu_hat: fit.as_ref().map(|f| -f.slope),
        nu_hat_se: fit.as_ref().map(|f| f.slope_se),
        gamma_lower: bound.gamma_lower,
        truncated: sample.truncated,
    };
    Ok(vec![artifact("branching.csv", vec![row])])
}

#[derive(Serialize)]
struct DecayFitRow {
    gamma_hat: Option<f64>,
    gamma_se: Option<f64>,
    used: usize,
    nu: Option<f64>,
    mu: Option<f64>,
    gamma_lower: Option<f64>,
    /// γ̂ + 3 SE ≥ γ_lower.
    consistent: Option<bool>,
}

pub fn decay_scan(cfg: &DecayScanCfg) -> Result<Artifacts, CliError> {
    let mut rows = Vec::new();
    for &m in &cfg.m_list {
        let seed = Rng::stream(cfg.seed, &[0xDC, u64::from(m)]).next_u64();
        rows.push(estimate_connectivity(cfg.lambda, cfg.delta, m, cfg.trials, seed)?);
    }
    let table: Vec<(f64, f64, f64)> = rows.iter().map(|r| (f64::from(r.m), r.p, r.se)).collect();
    let fit = fit_decay_rate(&table).ok();
    // Without subcriticality there is no branching bound to compare with.
    let bound = decay_rate_bound(cfg.lambda, cfg.delta).ok();
    let summary = DecayFitRow {
        gamma_hat: fit.as_ref().map(|f| f.gamma),
        gamma_se: fit.as_ref().map(|f| f.gamma_se),
        used: fit.as_ref().map_or(0, |f| f.used),
        nu: bound.as_ref().map(|b| b.nu),
        mu: bound.as_ref().map(|b| b.mu),
        gamma_lower: bound.as_ref().map(|b| b.gamma_lower),
        consistent: fit.as_ref().zip(bound.as_ref()).map(|(f, b)| f.gamma + 3.0 * f.gamma_se >= b.gamma_lower),
    };
    Ok(vec![artifact("decay_scan.csv", rows), artifact("decay_fit.csv", vec![summary])])
}

#[derive(Serialize)]
struct DisorderSummary {
    rho: f64,
    max_distance: u32,
    beta: f64,
    beta_capped: bool,
}

#[derive(Serialize)]
struct RadiusRow {
    x: i64,
    #[serde(rename = "D")]
    d: f64,
}

/// Scan distances for a supplied environment when none is configured.
const DEFAULT_SCAN_DISTANCE: u32 = 8;

pub fn disorder_scan(cfg: &DisorderCfg) -> Result<Artifacts, CliError> {
    let mut out: Artifacts = Vec::new();
    if let Some(path) = &cfg.environment {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        let env = Environment::from_csv(&text)?;
        let r = cfg.max_distance.unwrap_or(DEFAULT_SCAN_DISTANCE);
        let sites = (env.x_min() + i64::from(r), env.x_max() - i64::from(r));
        if sites.0 > sites.1 {
            return Err(CliError::config(format!("environment too short for scan distance {r}")));
        }
        let scan = disordered_decay_scan(
            &env,
            &ScanConfig { sites, distances: (1..=r).collect(), trials: cfg.trials, gamma: cfg.gamma, q: 1.0, seed: cfg.seed, workers: cfg.workers },
        )?;
        let radii: Vec<RadiusRow> = (sites.0..=sites.1).filter_map(|x| scan.radii.get(x).map(|d| RadiusRow { x, d })).collect();
        out.push(artifact("disorder_scan.csv", scan.rows));
        out.push(artifact("localization_radii.csv", radii));
        return Ok(out);
    }
    let ev = disorder_events_experiment(&DisorderEventsConfig {
        spec: cfg.spec.clone(),
        l_list: cfg.l_list.clone(),
        m_list: cfg.m_list.clone(),
        environments: cfg.environments,
        trials: cfg.trials,
        gamma: cfg.gamma,
        max_distance: cfg.max_distance,
        rho: cfg.rho,
        beta: cfg.beta,
        seed: cfg.seed,
        workers: cfg.workers,
    })?;
    let summary = DisorderSummary { rho: ev.rho, max_distance: ev.max_distance, beta: ev.beta, beta_capped: ev.beta_capped };
    out.push(artifact("disorder_events.csv", ev.rows));
    out.push(artifact("disorder_frequencies.csv", ev.frequencies));
    out.push(artifact("disorder_summary.csv", vec![summary]));
    Ok(out)
}
