use crate::error::{Error, Result};
use crate::geometry::SpaceTimeBox;
use crate::parallel::{default_workers, par_map};
use crate::percolation::{BoundaryRule, ClusterLabelling};
use crate::rc_sampler::{ChainState, SpinConfiguration};
use crate::rng::Rng;
use crate::stats::jackknife_se;
use serde::{Deserialize, Serialize};

/// Largest block length for which the full histogram is kept.
pub const MAX_HISTOGRAM_L: u32 = 4;

/// What one retained sweep contributes to the histogram.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum TallyMode {
    /// The sampled slit spins: one count per sweep.
    #[default]
    Spins,
    /// The conditional law of the slit spins given the bonds: every
    /// assignment of the clusters meeting the slit, weighted 2^{−u}.
    ClusterAveraged,
}

/// Parameters of a slit-box run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlitRun {
    pub m: u32,
    pub l: u32,
    pub beta: f64,
    pub lambda: f64,
    pub delta: f64,
    /// Retained sweeps per chain.
    pub sweeps: u64,
    /// Discarded sweeps per chain; `None` picks max(1000, sweeps/10).
    pub burn_in: Option<u64>,
    pub chains: usize,
    pub seed: u64,
    /// Batches per chain for error estimates.
    pub batches: usize,
    pub mode: TallyMode,
    /// Worker threads; 0 means all available.
    pub workers: usize,
}

impl SlitRun {
    pub fn new(m: u32, l: u32, beta: f64, lambda: f64, delta: f64) -> Self {
        SlitRun {
            m,
            l,
            beta,
            lambda,
            delta,
            sweeps: 10_000,
            burn_in: None,
            chains: 4,
            seed: 0,
            batches: 20,
            mode: TallyMode::Spins,
            workers: 0,
        }
    }

    pub fn burn_in(&self) -> u64 {
        self.burn_in.unwrap_or((self.sweeps / 10).max(1000))
    }

    pub fn dim(&self) -> usize {
        1 << (self.l + 1)
    }

    pub fn slit_box(&self) -> Result<SpaceTimeBox> {
        SpaceTimeBox::slit_box(self.m, self.l, self.beta)
    }

    fn chain_seed(&self, c: usize) -> u64 {
        Rng::stream(self.seed, &[0xE5, c as u64]).next_u64()
    }

    fn validate(&self) -> Result<()> {
        if self.l > MAX_HISTOGRAM_L {
            return Err(Error::Size(format!("L = {} exceeds the histogram limit {MAX_HISTOGRAM_L}", self.l)));
        }
        if self.chains == 0 || self.sweeps == 0 || self.batches == 0 {
            return Err(Error::Parameter("chains, sweeps and batches must be positive".into()));
        }
        if self.sweeps < self.batches as u64 {
            return Err(Error::Parameter("need at least one sweep per batch".into()));
        }
        if !(self.lambda >= 0.0 && self.delta > 0.0 && self.beta > 0.0) {
            return Err(Error::Parameter("need λ ≥ 0, δ > 0, β > 0".into()));
        }
        Ok(())
    }
}

/// Weighted counts of slit spin pairs (ε⁺, ε⁻).
///
/// A block configuration ε is an integer whose bit L−x is set when the spin at
/// site x is −1, so site 0 is the most significant bit. This matches the qubit
/// order of the exact reduced states.
#[derive(Clone, Debug, Serialize)]
pub struct SlitHistogram {
    pub run: SlitRun,
    /// Row-major over (ε⁺, ε⁻).
    pub counts: Vec<f64>,
    /// Contribution of each batch, chains concatenated.
    pub batches: Vec<Vec<f64>>,
    pub total: f64,
    pub chain_seeds: Vec<u64>,
    /// Set when β ≤ 2m + L.
    pub regime_warning: Option<String>,
}

impl SlitHistogram {
    pub fn dim(&self) -> usize {
        self.run.dim()
    }

    pub fn l(&self) -> u32 {
        self.run.l
    }

    pub fn count(&self, eplus: usize, eminus: usize) -> f64 {
        self.counts[eplus * self.dim() + eminus]
    }

    /// From raw counts; every count forms its own batch unless `batches` is given.
    pub fn from_counts(run: SlitRun, counts: Vec<f64>, batches: Option<Vec<Vec<f64>>>) -> Result<Self> {
        let d = run.dim();
        if counts.len() != d * d || counts.iter().any(|c| !(*c >= 0.0)) {
            return Err(Error::Parameter(format!("need {} non-negative counts", d * d)));
        }
        let batches = batches.unwrap_or_else(|| vec![counts.clone()]);
        let total = counts.iter().sum();
        Ok(SlitHistogram { run, counts, batches, total, chain_seeds: vec![], regime_warning: None })
    }

    /// Pools two histograms of the same geometry.
    pub fn merge(mut self, other: &SlitHistogram) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::Domain("histograms of different block sizes".into()));
        }
        self.counts.iter_mut().zip(&other.counts).for_each(|(a, b)| *a += b);
        self.batches.extend(other.batches.iter().cloned());
        self.total += other.total;
        self.chain_seeds.extend(&other.chain_seeds);
        Ok(self)
    }
}

/// Block index of spins at sites 0..=L.
pub fn block_index(spins: &[i8]) -> usize {
    spins.iter().fold(0, |acc, &s| (acc << 1) | usize::from(s < 0))
}

/// Adds one sweep's contribution.
pub(crate) fn tally(lab: &ClusterLabelling, spins: &SpinConfiguration, l: u32, mode: TallyMode, out: &mut [f64]) {
    let d = 1usize << (l + 1);
    match mode {
        TallyMode::Spins => out[block_index(spins.slit_plus()) * d + block_index(spins.slit_minus())] += 1.0,
        TallyMode::ClusterAveraged => {
            let n = l as usize + 1;
            let ends: Vec<u32> = (0..=l as i64)
                .map(|x| lab.cluster_of(lab.slit_plus(x)))
                .chain((0..=l as i64).map(|x| lab.cluster_of(lab.slit_minus(x))))
                .collect();
            let mut free: Vec<u32> = ends.iter().copied().filter(|&c| lab.forced_spin(c).is_none()).collect();
            free.sort_unstable();
            free.dedup();
            let u = free.len();
            let w = 0.5f64.powi(u as i32);
            for a in 0..1usize << u {
                let spin = |c: u32| -> bool {
                    match lab.forced_spin(c) {
                        Some(s) => s < 0,
                        None => (a >> free.binary_search(&c).expect("listed")) & 1 == 1,
                    }
                };
                let (mut ep, mut em) = (0usize, 0usize);
                for x in 0..n {
                    ep = (ep << 1) | usize::from(spin(ends[x]));
                    em = (em << 1) | usize::from(spin(ends[n + x]));
                }
                out[ep * d + em] += w;
            }
        }
    }
}

/// Runs `chains` independent chains of the q = 2 measure on the slit box
/// (periodic in time) and tallies the slit spins after burn-in.
pub fn estimate_slit_histogram(run: &SlitRun) -> Result<SlitHistogram> {
    Ok(slit_histogram_under(run, &BoundaryRule::Free)?.0)
}

/// As [`estimate_slit_histogram`] under another boundary rule; also returns
/// each chain's count of rejected initial configurations.
pub(crate) fn slit_histogram_under(run: &SlitRun, rule: &BoundaryRule) -> Result<(SlitHistogram, Vec<u64>)> {
    run.validate()?;
    let bx = run.slit_box()?;
    let d = run.dim();
    let seeds: Vec<u64> = (0..run.chains).map(|c| run.chain_seed(c)).collect();
    let workers = if run.workers == 0 { default_workers() } else { run.workers };
    let per_chain = par_map(&seeds, workers, |&seed| -> Result<(Vec<Vec<f64>>, u64)> {
        let mut ch = ChainState::uniform(&bx, run.lambda, run.delta, rule.clone(), seed)?;
        ch.run(run.burn_in())?;
        let mut batches = vec![vec![0.0; d * d]; run.batches];
        let size = run.sweeps / run.batches as u64;
        for (b, batch) in batches.iter_mut().enumerate() {
            // The last batch absorbs the remainder.
            let n = if b + 1 == run.batches { run.sweeps - size * b as u64 } else { size };
            for _ in 0..n {
                ch.sweep()?;
                tally(ch.labelling(), ch.spins(), run.l, run.mode, batch);
            }
        }
        Ok((batches, ch.init_rejections()))
    });
    let mut batches = Vec::with_capacity(run.chains * run.batches);
    let mut rejections = Vec::with_capacity(run.chains);
    for r in per_chain {
        let (b, rej) = r?;
        batches.extend(b);
        rejections.push(rej);
    }
    let mut counts = vec![0.0; d * d];
    for b in &batches {
        counts.iter_mut().zip(b).for_each(|(c, x)| *c += x);
    }
    let regime_warning = (run.beta <= f64::from(2 * run.m + run.l))
        .then(|| format!("β = {} ≤ 2m + L = {}: outside the slit-box regime", run.beta, 2 * run.m + run.l));
    let h = SlitHistogram { run: run.clone(), total: counts.iter().sum(), counts, batches, chain_seeds: seeds, regime_warning };
    Ok((h, rejections))
}

/// Diagonal mass of a count vector.
pub(crate) fn diagonal_mass(counts: &[f64], d: usize) -> f64 {
    (0..d).map(|e| counts[e * d + e]).sum()
}

/// Leave-one-batch-out count vectors.
pub(crate) fn leave_one_out(h: &SlitHistogram) -> impl Iterator<Item = Vec<f64>> + '_ {
    h.batches.iter().map(move |b| h.counts.iter().zip(b).map(|(c, x)| c - x).collect())
}

/// â = φ(σ⁺ = σ⁻), the diagonal mass, with a jackknife standard error over
/// batches (which accounts for autocorrelation, unlike a binomial error).
pub fn estimate_a(h: &SlitHistogram) -> Result<(f64, f64)> {
    if !(h.total > 0.0) {
        return Err(Error::InsufficientData("empty histogram".into()));
    }
    let d = h.dim();
    let a = diagonal_mass(&h.counts, d) / h.total;
    if h.batches.len() < 2 {
        let n = h.total;
        return Ok((a, (a * (1.0 - a) / n).sqrt()));
    }
    let reps: Vec<f64> = leave_one_out(h)
        .map(|c| {
            let t: f64 = c.iter().sum();
            diagonal_mass(&c, d) / t
        })
        .collect();
    Ok((a, jackknife_se(&reps)))
}
