use super::histogram::{estimate_slit_histogram, SlitRun, MAX_HISTOGRAM_L};
use super::rdm::{noise_floor, norm_diff_with_se, rdm_from_histogram, RdmEstimate};
use crate::bounds::{entropy_bound_pipeline, fit_decay_rate, DecayFit, EntropyBoundInputs};
use crate::error::{Error, Result};
use crate::quantum_oracle::{
    block_qubits, build_hamiltonian, entropy, op_norm_diff, reduce, thermal_density, DensityMatrix, IsingChain,
    MAX_SPARSE_SITES,
};
use crate::rng::Rng;
use serde::{Deserialize, Serialize};

/// Inverse temperature used for a slit box of margin m and block length L.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BetaRule {
    Fixed(f64),
    /// max(4(m+L+1), 40/Δ) with the infinite-chain gap proxy Δ = 2|δ − λ/2|,
    /// capped at 1000.
    Default,
}

impl BetaRule {
    pub fn beta(&self, m: u32, l: u32, lambda: f64, delta: f64) -> f64 {
        match *self {
            BetaRule::Fixed(b) => b,
            BetaRule::Default => {
                let gap = 2.0 * (delta - lambda / 2.0).abs();
                let by_size = 4.0 * f64::from(m + l + 1);
                let by_gap = if gap > 0.0 { 40.0 / gap } else { f64::INFINITY };
                by_size.max(by_gap).min(1000.0)
            }
        }
    }
}

/// Slit-box estimate of the reduced state at one β.
pub fn estimate_rdm(run: &SlitRun) -> Result<RdmEstimate> {
    rdm_from_histogram(&estimate_slit_histogram(run)?)
}

/// Exact e^{−βH} reduced to the block, for a chain with margin m.
pub fn exact_thermal_rdm(m: u32, l: u32, beta: f64, lambda: f64, delta: f64) -> Result<DensityMatrix> {
    let n = (2 * m + l + 1) as usize;
    let h = build_hamiltonian(n, &vec![lambda; n - 1], &vec![delta; n])?;
    reduce(&thermal_density(&h, beta)?, block_qubits(m as usize, l as usize), n)
}

/// Exact ground-state reduced state; also returns the chain's gap.
pub fn exact_ground_rdm(m: u32, l: u32, lambda: f64, delta: f64) -> Result<(DensityMatrix, Option<f64>)> {
    let n = (2 * m + l + 1) as usize;
    if n > MAX_SPARSE_SITES {
        return Err(Error::Size(format!("{n} sites exceeds the exact limit {MAX_SPARSE_SITES}")));
    }
    let g = IsingChain::uniform(n, lambda, delta)?.ground_state()?;
    Ok((reduce(&g.vector, block_qubits(m as usize, l as usize), n)?, g.gap))
}

/// One level of a β schedule.
#[derive(Clone, Debug, Serialize)]
pub struct BetaLevel {
    pub beta: f64,
    /// Distance to the previous level, absent for the first.
    pub distance: Option<f64>,
    pub se: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct BetaExtrapolation {
    pub estimate: RdmEstimate,
    pub beta: f64,
    pub trace: Vec<BetaLevel>,
}

/// Walks an increasing β schedule and stops at the first level whose
/// distance to the previous one is below `tol` + 3 SE. An infinite `tol`
/// accepts the first level outright.
pub fn beta_extrapolate(base: &SlitRun, schedule: &[f64], tol: f64) -> Result<BetaExtrapolation> {
    if schedule.is_empty() || schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Parameter("β schedule must be non-empty and increasing".into()));
    }
    let level_run = |i: usize| SlitRun { beta: schedule[i], seed: Rng::stream(base.seed, &[0xBE, i as u64]).next_u64(), ..base.clone() };
    let mut prev = estimate_rdm(&level_run(0))?;
    let mut trace = vec![BetaLevel { beta: schedule[0], distance: None, se: None }];
    if tol.is_infinite() {
        return Ok(BetaExtrapolation { estimate: prev, beta: schedule[0], trace });
    }
    for (i, &beta) in schedule.iter().enumerate().skip(1) {
        let cur = estimate_rdm(&level_run(i))?;
        let (dist, se) = norm_diff_with_se(&cur, &prev)?;
        trace.push(BetaLevel { beta, distance: Some(dist), se: Some(se) });
        if dist < tol + 3.0 * se {
            return Ok(BetaExtrapolation { estimate: cur, beta, trace });
        }
        prev = cur;
    }
    let summary: Vec<String> =
        trace.iter().map(|t| format!("β={}: d={:?} se={:?}", t.beta, t.distance, t.se)).collect();
    Err(Error::NonConvergence(format!("β schedule exhausted: {}", summary.join("; "))))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormDecayConfig {
    pub theta: f64,
    pub l: u32,
    pub m_list: Vec<u32>,
    pub beta_rule: BetaRule,
    /// Template for the per-m runs; geometry and couplings are overwritten.
    pub run: SlitRun,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormDecayRow {
    pub theta: f64,
    #[serde(rename = "L")]
    pub l: u32,
    pub m: u32,
    pub n: u32,
    pub beta: f64,
    pub norm: f64,
    pub se: f64,
    pub noise_floor: f64,
    pub censored: bool,
    /// Largest entrywise z-score of ρ̂_m against the exact thermal state,
    /// when the chain is small enough (2m + L + 1 ≤ 7).
    pub oracle_max_z: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NormDecay {
    pub rows: Vec<NormDecayRow>,
    /// Fit of the uncensored rows with m < n, when every such row is uncensored.
    pub fit: Option<DecayFit>,
}

/// ‖ρ̂_m^L − ρ̂_n^L‖ for each m with n = max m, from independent chains at
/// δ = 1, λ = θ.
pub fn norm_decay_experiment(cfg: &NormDecayConfig) -> Result<NormDecay> {
    let mut ms = cfg.m_list.clone();
    if ms.is_empty() || ms.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Parameter("m list must be non-empty and ascending".into()));
    }
    let n = *ms.last().expect("non-empty");
    let (lambda, delta) = (cfg.theta, 1.0);
    let mut estimates = Vec::new();
    for &m in &ms {
        let beta = cfg.beta_rule.beta(m, cfg.l, lambda, delta);
        let run = SlitRun {
            m,
            l: cfg.l,
            beta,
            lambda,
            delta,
            seed: Rng::stream(cfg.run.seed, &[0xD0, u64::from(m)]).next_u64(),
            ..cfg.run.clone()
        };
        estimates.push((beta, estimate_rdm(&run)?));
    }
    let reference = &estimates.last().expect("non-empty").1;
    let mut rows = Vec::new();
    for (&m, (beta, est)) in ms.iter().zip(&estimates) {
        let (norm, se, floor) = if m == n {
            (0.0, 0.0, 0.0)
        } else {
            let (v, s) = norm_diff_with_se(est, reference)?;
            (v, s, noise_floor(est, reference))
        };
        let censored = m != n && (norm < 3.0 * se || norm < floor);
        let oracle_max_z = if 2 * m + cfg.l < 7 {
            Some(est.max_z(exact_thermal_rdm(m, cfg.l, *beta, lambda, delta)?.operator()))
        } else {
            None
        };
        rows.push(NormDecayRow { theta: cfg.theta, l: cfg.l, m, n, beta: *beta, norm, se, noise_floor: floor, censored, oracle_max_z });
    }
    ms.pop();
    let body: Vec<&NormDecayRow> = rows.iter().filter(|r| r.m != n).collect();
    let fit = if !body.is_empty() && body.iter().all(|r| !r.censored) {
        fit_decay_rate(&body.iter().map(|r| (f64::from(r.m), r.norm, r.se)).collect::<Vec<_>>()).ok()
    } else {
        None
    };
    Ok(NormDecay { rows, fit })
}

/// Whether each value exceeds the next by more than `z` combined SE.
pub fn strictly_decreasing_beyond_noise(values: &[(f64, f64)], z: f64) -> bool {
    values.windows(2).all(|w| w[0].0 - w[1].0 > z * (w[0].1.powi(2) + w[1].1.powi(2)).sqrt())
}

/// Envelope C L^α e^{−γm} fitted to exact norm differences.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeFit {
    pub gamma: f64,
    /// Fitted exponent of L, floored at 0.01.
    pub alpha: f64,
    /// Chosen so every fitted point lies on or under the envelope.
    pub c: f64,
}

/// Least squares of ln(norm) on (m, ln L), then the constant raised until the
/// envelope covers every point. Points are (m, L, norm) with norm > 0.
pub fn fit_norm_envelope(points: &[(u32, u32, f64)]) -> Result<EnvelopeFit> {
    let pts: Vec<(f64, f64, f64)> =
        points.iter().filter(|p| p.2 > 0.0).map(|&(m, l, v)| (f64::from(m), f64::from(l).ln(), v.ln())).collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!("{} positive points, need 3", pts.len())));
    }
    let varies_l = pts.iter().any(|p| (p.1 - pts[0].1).abs() > 0.0);
    // Normal equations for y = a + b m + c ln L (or without c).
    let k = if varies_l { 3 } else { 2 };
    let row = |p: &(f64, f64, f64)| -> Vec<f64> { [1.0, p.0, p.1][..k].to_vec() };
    let mut ata = vec![vec![0.0; k]; k];
    let mut aty = vec![0.0; k];
    for p in &pts {
        let r = row(p);
        for i in 0..k {
            aty[i] += r[i] * p.2;
            for j in 0..k {
                ata[i][j] += r[i] * r[j];
            }
        }
    }
    let coef = solve(ata, aty).ok_or_else(|| Error::InsufficientData("degenerate design for the envelope fit".into()))?;
    let gamma = -coef[1];
    let alpha = if varies_l { coef[2].max(0.01) } else { 0.01 };
    let intercept =
        pts.iter().map(|p| p.2 + gamma * p.0 - alpha * p.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(EnvelopeFit { gamma, alpha, c: intercept.exp() })
}

fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        x[r] = (b[r] - (r + 1..n).map(|c| a[r][c] * x[c]).sum::<f64>()) / a[r][r];
    }
    Some(x)
}

/// How the margin grows with the block length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MRule {
    EqualToL,
    Fixed(u32),
}

impl MRule {
    pub fn m(&self, l: u32) -> u32 {
        match *self {
            MRule::EqualToL => l,
            MRule::Fixed(m) => m,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EntropyScalingConfig {
    pub theta: f64,
    pub l_list: Vec<u32>,
    pub m_rule: MRule,
    pub beta_rule: BetaRule,
    /// Monte Carlo at finite β for L ≤ 4; `None` skips it.
    pub run: Option<SlitRun>,
    /// Exact ground-state entropies up to 2m + L + 1 = 16 sites.
    pub exact: bool,
    /// Envelope constants for the overlaid bound, as fitted (α is doubled
    /// before use). `None` fits them from exact norm differences.
    pub envelope: Option<EnvelopeFit>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyScalingRow {
    pub theta: f64,
    #[serde(rename = "L")]
    pub l: u32,
    pub m: u32,
    pub beta: f64,
    #[serde(rename = "S_mc")]
    pub s_mc: Option<f64>,
    pub se: Option<f64>,
    #[serde(rename = "S_exact")]
    pub s_exact: Option<f64>,
    pub bound: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EntropyScaling {
    pub rows: Vec<EntropyScalingRow>,
    pub envelope: Option<EnvelopeFit>,
}

/// Exact norm differences ‖ρ_m^L − ρ_{m_ref}^L‖ for m < m_ref, with m_ref
/// as large as the exact limit allows (2m + L + 1 ≤ 15).
pub fn exact_norm_table(theta: f64, l_list: &[u32]) -> Result<Vec<(u32, u32, f64)>> {
    let mut out = Vec::new();
    for &l in l_list {
        let m_ref = (15 - l.min(13)) / 2;
        if m_ref < 2 {
            continue;
        }
        let reference = exact_ground_rdm(m_ref, l, theta, 1.0)?.0;
        for m in 1..m_ref {
            let r = exact_ground_rdm(m, l, theta, 1.0)?.0;
            out.push((m, l, op_norm_diff(&r, &reference)?));
        }
    }
    Ok(out)
}

pub fn entropy_scaling_experiment(cfg: &EntropyScalingConfig) -> Result<EntropyScaling> {
    let (lambda, delta) = (cfg.theta, 1.0);
    let envelope = match cfg.envelope {
        Some(e) => Some(e),
        None if cfg.exact => {
            let mut ls = cfg.l_list.clone();
            ls.sort_unstable();
            ls.dedup();
            // Norms below 1e-13 are round-off and would drag the fit.
            let pts: Vec<_> = exact_norm_table(cfg.theta, &ls)?.into_iter().filter(|p| p.2 > 1e-13).collect();
            fit_norm_envelope(&pts).ok()
        }
        None => None,
    };
    let mut rows = Vec::new();
    for &l in &cfg.l_list {
        let m = cfg.m_rule.m(l);
        let beta = cfg.beta_rule.beta(m, l, lambda, delta);
        let (s_mc, se) = match &cfg.run {
            Some(run) if l <= MAX_HISTOGRAM_L => {
                let r = SlitRun {
                    m,
                    l,
                    beta,
                    lambda,
                    delta,
                    seed: Rng::stream(run.seed, &[0xE7, u64::from(l)]).next_u64(),
                    ..run.clone()
                };
                let est = estimate_rdm(&r)?;
                (Some(est.entropy), Some(est.entropy_se))
            }
            _ => (None, None),
        };
        let s_exact = if cfg.exact && (2 * m + l + 1) as usize <= MAX_SPARSE_SITES {
            Some(entropy(&exact_ground_rdm(m, l, lambda, delta)?.0))
        } else {
            None
        };
        let bound = envelope.and_then(|e| {
            let inp = EntropyBoundInputs::new(e.gamma, 2.0 * e.alpha, e.c, l.max(1)).ok()?;
            entropy_bound_pipeline(&inp, u64::from(m)).ok().map(|b| b.bound)
        });
        rows.push(EntropyScalingRow { theta: cfg.theta, l, m, beta, s_mc, se, s_exact, bound });
    }
    Ok(EntropyScaling { rows, envelope })
}
