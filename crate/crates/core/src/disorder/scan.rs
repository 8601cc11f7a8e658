use super::environment::{sample_environment, Environment, EnvironmentSpec};
use super::events::{environment_events, z_value, EventParams, LocalizationRadii};
use crate::error::{param, Result};
use crate::parallel::{default_workers, par_map};
use crate::percolation::{Explorer, Reach};
use crate::rng::Rng;
use crate::stats::{mean, variance};
use serde::{Deserialize, Serialize};

const TAG_SCAN: u64 = 0xD5;
const TAG_ENV: u64 = 0xE0;
const TAG_Z: u64 = 0xE3;

/// Largest β used for disordered boxes.
pub const BETA_CAP: f64 = 1e3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    /// Sites whose clusters are explored.
    pub sites: (i64, i64),
    /// Distances at which connectivity is tabulated, increasing.
    pub distances: Vec<u32>,
    pub trials: u64,
    /// Target decay `e^{−γ d}` defining `D_x`.
    pub gamma: f64,
    #[serde(default = "default_q")]
    pub q: f64,
    pub seed: u64,
    #[serde(default)]
    pub workers: Option<usize>,
}

fn default_q() -> f64 {
    1.0
}

impl ScanConfig {
    fn max_distance(&self) -> u32 {
        self.distances.last().copied().unwrap_or(0)
    }
}

/// `P((x, 0) ↔ {d_q ≥ r})` in the quenched environment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub x: i64,
    pub r: u32,
    pub hits: u64,
    pub trials: u64,
    pub p: f64,
    pub se: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayScan {
    pub rows: Vec<ScanRow>,
    pub radii: LocalizationRadii,
}

impl DecayScan {
    pub fn row(&self, x: i64, r: u32) -> Option<&ScanRow> {
        self.rows.iter().find(|row| row.x == x && row.r == r)
    }

    /// Pearson χ² for equal connectivity at distance `r` across sites, with its
    /// degrees of freedom. None if the pooled frequency is 0 or 1.
    pub fn homogeneity(&self, r: u32) -> Option<(f64, usize)> {
        let rows: Vec<&ScanRow> = self.rows.iter().filter(|row| row.r == r).collect();
        let (h, n) = rows.iter().fold((0u64, 0u64), |acc, row| (acc.0 + row.hits, acc.1 + row.trials));
        let p = h as f64 / n as f64;
        if rows.len() < 2 || p <= 0.0 || p >= 1.0 {
            return None;
        }
        let chi2 = rows.iter().map(|row| (row.hits as f64 - p * row.trials as f64).powi(2) / (row.trials as f64 * p * (1.0 - p))).sum();
        Some((chi2, rows.len() - 1))
    }
}

/// `D_x` from a connectivity profile: the smallest integer `r ≥ 0` such that
/// `p̂(r') ≤ e^{−γ r'}` at every tabulated `r' ≥ r`, or `+∞` if the largest
/// tabulated distance already fails.
pub fn localization_radius(profile: &[(u32, f64)], gamma: f64) -> f64 {
    match profile.iter().rev().position(|&(r, p)| p > (-gamma * r as f64).exp()) {
        None => 0.0,
        Some(0) => f64::INFINITY,
        Some(i) => (profile[profile.len() - 1 - i].0 + 1) as f64,
    }
}

/// Cluster explorations from `(x, 0)` for every site in the configured range.
/// One exploration per trial answers every distance at once.
pub fn disordered_decay_scan(env: &Environment, cfg: &ScanConfig) -> Result<DecayScan> {
    let (lo, hi) = cfg.sites;
    if hi < lo || cfg.trials == 0 {
        return param("need a non-empty site range and at least one trial");
    }
    if cfg.distances.is_empty() || cfg.distances[0] == 0 || cfg.distances.windows(2).any(|w| w[0] >= w[1]) {
        return param("distances must be positive and increasing");
    }
    if !(cfg.gamma > 0.0) || !(cfg.q >= 1.0 && cfg.q.is_finite()) {
        return param("need γ > 0 and q ≥ 1");
    }
    let r_max = cfg.max_distance();
    env.require(lo - r_max as i64, hi + r_max as i64)?;
    let sites: Vec<i64> = (lo..=hi).collect();
    let reach = Reach::LogTime { radius: r_max, q: cfg.q };
    let per_site = par_map(&sites, cfg.workers.unwrap_or_else(default_workers), |&x| {
        let mut ex = Explorer::new();
        let mut hits = vec![0u64; cfg.distances.len()];
        for trial in 0..cfg.trials {
            let mut rng = Rng::stream(cfg.seed, &[TAG_SCAN, x as u64, trial]);
            let got = ex.reach(env, x, 0.0, 0.0, reach, &mut rng);
            for (h, &r) in hits.iter_mut().zip(&cfg.distances) {
                if got >= r as f64 {
                    *h += 1;
                }
            }
        }
        hits
    });
    let mut rows = Vec::with_capacity(sites.len() * cfg.distances.len());
    let mut radii = LocalizationRadii::constant(lo, hi, 0.0);
    for (&x, hits) in sites.iter().zip(&per_site) {
        let mut profile = Vec::with_capacity(hits.len());
        for (&h, &r) in hits.iter().zip(&cfg.distances) {
            let p = h as f64 / cfg.trials as f64;
            rows.push(ScanRow { x, r, hits: h, trials: cfg.trials, p, se: (p * (1.0 - p) / cfg.trials as f64).sqrt() });
            profile.push((r, p));
        }
        radii.set(x, localization_radius(&profile, cfg.gamma));
    }
    Ok(DecayScan { rows, radii })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderEventsConfig {
    pub spec: EnvironmentSpec,
    pub l_list: Vec<u32>,
    pub m_list: Vec<u32>,
    pub environments: usize,
    pub trials: u64,
    pub gamma: f64,
    /// Largest scanned distance; defaults to the largest event threshold.
    #[serde(default)]
    pub max_distance: Option<u32>,
    /// `ρ` for B_L^ρ; defaults to `1.1 · 4·E[Z₀]` estimated by sampling.
    #[serde(default)]
    pub rho: Option<f64>,
    /// Requested β, capped at [`BETA_CAP`].
    #[serde(default)]
    pub beta: Option<f64>,
    pub seed: u64,
    #[serde(default)]
    pub workers: Option<usize>,
}

/// One line of `disorder_events.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisorderEventRow {
    pub env: usize,
    #[serde(rename = "L")]
    pub l: u32,
    pub m: u32,
    #[serde(rename = "A")]
    pub a: bool,
    #[serde(rename = "B")]
    pub b: bool,
    #[serde(rename = "C")]
    pub c: bool,
    #[serde(rename = "D")]
    pub d: bool,
    #[serde(rename = "X_L")]
    pub x_l: f64,
    pub ln_x_l: f64,
    pub a_witness: Option<i64>,
    pub c_witness: Option<i64>,
    pub d_witness: Option<i64>,
    pub beta: f64,
    /// Whether `β > 5 e^{m + L/2}`; false whenever the cap binds.
    pub beta_condition_met: bool,
}

/// Event frequencies over the sampled environments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventFrequency {
    #[serde(rename = "L")]
    pub l: u32,
    pub m: u32,
    pub environments: usize,
    pub p_a: f64,
    pub p_b: f64,
    pub p_c: f64,
    pub p_d: f64,
    pub p_all: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisorderEvents {
    pub rows: Vec<DisorderEventRow>,
    pub frequencies: Vec<EventFrequency>,
    pub rho: f64,
    pub max_distance: u32,
    pub beta: f64,
    pub beta_capped: bool,
}

/// Sample estimate of `E[Z₀]` and its standard error.
pub fn mean_z(spec: &EnvironmentSpec, samples: usize, seed: u64) -> Result<(f64, f64)> {
    if samples < 2 {
        return param("need at least two samples");
    }
    let z = (0..samples)
        .map(|i| sample_environment(spec, (-1, 1), Rng::stream(seed, &[TAG_Z, i as u64]).next_u64()).and_then(|e| z_value(&e, 0)))
        .collect::<Result<Vec<f64>>>()?;
    Ok((mean(&z), (variance(&z) / samples as f64).sqrt()))
}

/// Samples environments, scans each for `D_x` and evaluates every event for
/// every `(L, m)`, all on the same environment.
pub fn disorder_events_experiment(cfg: &DisorderEventsConfig) -> Result<DisorderEvents> {
    cfg.spec.lambda.validate()?;
    cfg.spec.delta.validate()?;
    if cfg.l_list.is_empty() || cfg.m_list.is_empty() || cfg.environments == 0 {
        return param("need L values, m values and at least one environment");
    }
    let l_max = *cfg.l_list.iter().max().unwrap();
    let m_max = *cfg.m_list.iter().max().unwrap();
    let threshold = m_max + l_max.div_ceil(2) + 1;
    let r_max = cfg.max_distance.unwrap_or(threshold).max(1);
    let rho = match cfg.rho {
        Some(r) => r,
        None => 1.1 * 4.0 * mean_z(&cfg.spec, 100_000, cfg.seed)?.0,
    };
    let requested = cfg.beta.unwrap_or(BETA_CAP);
    if !(requested > 0.0) {
        return param("β must be positive");
    }
    let beta = requested.min(BETA_CAP);
    let k_max = (m_max / 2) as i64;
    let (lo, hi) = (-(k_max.max(1)), l_max as i64 + k_max.max(1));
    let workers = cfg.workers.unwrap_or_else(default_workers);
    let envs: Vec<usize> = (0..cfg.environments).collect();
    let scanned = par_map(&envs, workers, |&e| -> Result<(Environment, LocalizationRadii)> {
        let env_seed = Rng::stream(cfg.seed, &[TAG_ENV, e as u64]).next_u64();
        let env = sample_environment(&cfg.spec, (lo - r_max as i64, hi + r_max as i64), env_seed)?;
        let scan = ScanConfig {
            sites: (lo, hi),
            distances: (1..=r_max).collect(),
            trials: cfg.trials,
            gamma: cfg.gamma,
            q: 1.0,
            seed: env_seed,
            workers: Some(1),
        };
        let radii = disordered_decay_scan(&env, &scan)?.radii;
        Ok((env, radii))
    });
    let mut rows = Vec::new();
    for (e, res) in scanned.into_iter().enumerate() {
        let (env, radii) = res?;
        for &l in &cfg.l_list {
            for &m in &cfg.m_list {
                let ev = environment_events(&env, &radii, EventParams { l, m, rho, k: None })?;
                rows.push(DisorderEventRow {
                    env: e,
                    l,
                    m,
                    a: ev.a.holds,
                    b: ev.b,
                    c: ev.c.holds,
                    d: ev.d.holds,
                    x_l: ev.xl.x_l,
                    ln_x_l: ev.xl.ln_x_l,
                    a_witness: ev.a.witness,
                    c_witness: ev.c.witness,
                    d_witness: ev.d.witness,
                    beta,
                    beta_condition_met: beta > 5.0 * (m as f64 + 0.5 * l as f64).exp(),
                });
            }
        }
    }
    let mut frequencies = Vec::new();
    for &l in &cfg.l_list {
        for &m in &cfg.m_list {
            let sel: Vec<&DisorderEventRow> = rows.iter().filter(|r| r.l == l && r.m == m).collect();
            let n = sel.len() as f64;
            let freq = |f: &dyn Fn(&DisorderEventRow) -> bool| sel.iter().filter(|r| f(r)).count() as f64 / n;
            frequencies.push(EventFrequency {
                l,
                m,
                environments: sel.len(),
                p_a: freq(&|r| r.a),
                p_b: freq(&|r| r.b),
                p_c: freq(&|r| r.c),
                p_d: freq(&|r| r.d),
                p_all: freq(&|r| r.a && r.b && r.c && r.d),
            });
        }
    }
    Ok(DisorderEvents { rows, frequencies, rho, max_distance: r_max, beta, beta_capped: requested > BETA_CAP })
}

