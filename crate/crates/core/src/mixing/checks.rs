use super::separator::{separates, SeparatorGeometry};
use crate::error::{Error, Result};
use crate::estimators::{leave_one_out, slit_histogram_under, SlitHistogram, SlitRun, TallyMode};
use crate::geometry::{BoxPoint, Region, SlitSide, SpaceTimeBox};
use crate::percolation::{sample_percolation, BoundaryRule, ClusterLabelling, SpinLabels};
use crate::rc_sampler::ChainState;
use crate::rng::Rng;
use crate::stats::{batch_means, jackknife_se};
use serde::{Deserialize, Serialize};

/// Cells whose expected count under independence is below this are left out.
pub const MIN_EXPECTED_COUNT: f64 = 25.0;
/// Largest conditioning set for the finite-energy check.
pub const MAX_FINITE_ENERGY_POINTS: usize = 10;

/// Default margin ⌈ln L⌉ (0 for L ≤ 1).
pub fn default_margin(l: u32) -> u32 {
    if l <= 1 {
        0
    } else {
        f64::from(l).ln().ceil() as u32
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CellRatio {
    /// Index of σ on Δ = {x⁺: K ≤ x ≤ L−K}, site K most significant.
    pub eplus: usize,
    /// Index of σ on Γ = {x⁻: K ≤ x ≤ L−K}.
    pub eminus: usize,
    pub joint: f64,
    pub ratio: f64,
    pub se: f64,
    pub expected_count: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorizationRatio {
    pub k: u32,
    pub cells: Vec<CellRatio>,
    /// Cells left out for low expected count.
    pub excluded: usize,
    /// Largest |ratio − 1| over retained cells, and its standard error.
    pub max_deviation: f64,
    pub max_se: f64,
    /// max over cells of |ratio − 1| ∓ 3 SE: a conservative band for the maximum.
    pub lower: f64,
    pub upper: f64,
    pub regime_warning: Option<String>,
}

impl FactorizationRatio {
    pub fn cell(&self, eplus: usize, eminus: usize) -> Option<&CellRatio> {
        self.cells.iter().find(|c| c.eplus == eplus && c.eminus == eminus)
    }
}

/// Restricts slit counts to the sites K..=L−K on both sides.
pub(crate) fn marginal_counts(counts: &[f64], l: u32, k: u32) -> Vec<f64> {
    let d = 1usize << (l + 1);
    let ds = 1usize << (l + 1 - 2 * k);
    let sub = |e: usize| (e >> k) & (ds - 1);
    let mut out = vec![0.0; ds * ds];
    for ep in 0..d {
        for em in 0..d {
            out[sub(ep) * ds + sub(em)] += counts[ep * d + em];
        }
    }
    out
}

pub(crate) fn ratios(joint: &[f64], ds: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let total: f64 = joint.iter().sum();
    let p: Vec<f64> = (0..ds).map(|a| (0..ds).map(|b| joint[a * ds + b]).sum::<f64>() / total).collect();
    let q: Vec<f64> = (0..ds).map(|b| (0..ds).map(|a| joint[a * ds + b]).sum::<f64>() / total).collect();
    let r = (0..ds * ds)
        .map(|c| {
            let den = p[c / ds] * q[c % ds];
            if den > 0.0 {
                joint[c] / total / den
            } else {
                f64::NAN
            }
        })
        .collect();
    (r, p, q)
}

/// φ(σ_Δ = a, σ_Γ = b) / (φ(σ_Δ = a) φ(σ_Γ = b)) for every pair of spin
/// vectors on the inner slit sites, from cluster-averaged tallies. `k`
/// defaults to ⌈ln L⌉.
pub fn factorization_ratio(run: &SlitRun, k: Option<u32>) -> Result<FactorizationRatio> {
    let k = k.unwrap_or_else(|| default_margin(run.l));
    if 2 * k > run.l {
        return Err(Error::Parameter(format!("margin K = {k} exceeds L/2 = {}", run.l as f64 / 2.0)));
    }
    if run.beta <= f64::from(2 * run.m + run.l) {
        return Err(Error::Parameter(format!("need β > 2m + L = {}", 2 * run.m + run.l)));
    }
    let run = SlitRun { mode: TallyMode::ClusterAveraged, ..run.clone() };
    let (h, _) = slit_histogram_under(&run, &BoundaryRule::Free)?;
    factorization_from_histogram(&h, k)
}

pub fn factorization_from_histogram(h: &SlitHistogram, k: u32) -> Result<FactorizationRatio> {
    let l = h.l();
    let ds = 1usize << (l + 1 - 2 * k);
    let joint = marginal_counts(&h.counts, l, k);
    let total: f64 = joint.iter().sum();
    let (r, p, q) = ratios(&joint, ds);
    let reps: Vec<Vec<f64>> = if h.batches.len() >= 2 {
        leave_one_out(h).map(|c| ratios(&marginal_counts(&c, l, k), ds).0).collect()
    } else {
        Vec::new()
    };
    let mut cells = Vec::new();
    let mut excluded = 0;
    for c in 0..ds * ds {
        let expected_count = total * p[c / ds] * q[c % ds];
        if !(expected_count >= MIN_EXPECTED_COUNT) || !r[c].is_finite() {
            excluded += 1;
            continue;
        }
        let v: Vec<f64> = reps.iter().map(|x| x[c]).collect();
        let se = if v.iter().all(|x| x.is_finite()) && !v.is_empty() { jackknife_se(&v) } else { f64::INFINITY };
        cells.push(CellRatio { eplus: c / ds, eminus: c % ds, joint: joint[c] / total, ratio: r[c], se, expected_count });
    }
    if cells.is_empty() {
        return Err(Error::InsufficientData(format!("all {excluded} cells under-sampled")));
    }
    let worst = cells.iter().max_by(|a, b| (a.ratio - 1.0).abs().total_cmp(&(b.ratio - 1.0).abs())).expect("non-empty");
    let fold = |f: &dyn Fn(&CellRatio) -> f64| cells.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
    Ok(FactorizationRatio {
        k,
        max_deviation: (worst.ratio - 1.0).abs(),
        max_se: worst.se,
        lower: fold(&|c| (c.ratio - 1.0).abs() - 3.0 * c.se).max(0.0),
        upper: fold(&|c| (c.ratio - 1.0).abs() + 3.0 * c.se),
        excluded,
        regime_warning: h.regime_warning.clone(),
        cells,
    })
}

/// An event on the pair (σ_L⁺, σ_L⁻).
#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlitEvent {
    /// σ_L⁺ = σ_L⁻.
    Diagonal,
    Full,
    /// Explicit (ε⁺, ε⁻) block indices.
    Cells(Vec<(usize, usize)>),
}

impl SlitEvent {
    pub(crate) fn probability(&self, counts: &[f64], d: usize) -> f64 {
        let total: f64 = counts.iter().sum();
        let mass: f64 = match self {
            SlitEvent::Diagonal => (0..d).map(|e| counts[e * d + e]).sum(),
            SlitEvent::Full => total,
            SlitEvent::Cells(c) => c.iter().filter(|&&(p, m)| p < d && m < d).map(|&(p, m)| counts[p * d + m]).sum(),
        };
        mass / total
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundaryInfluence {
    pub phi_eta: f64,
    pub phi_eta_se: f64,
    pub phi: f64,
    pub phi_se: f64,
    /// φ^η(A)/φ(A) − 1.
    pub deviation: f64,
    pub se: f64,
    /// Fraction of initial configurations accepted under the spin boundary.
    pub acceptance: f64,
}

fn event_estimate(h: &SlitHistogram, event: &SlitEvent) -> (f64, f64) {
    let d = h.dim();
    let p = event.probability(&h.counts, d);
    if h.batches.len() < 2 {
        return (p, 0.0);
    }
    let reps: Vec<f64> = leave_one_out(h).map(|c| event.probability(&c, d)).collect();
    (p, jackknife_se(&reps))
}

/// Spin boundary η = +1 on both outer lines x = −m and x = m + L.
pub fn plus_boundary(m: u32, l: u32) -> BoundaryRule {
    let (a, b) = (-i64::from(m), i64::from(m + l));
    BoundaryRule::SpinBoundary(SpinLabels { labels: vec![(Region::new().line(a), 1), (Region::new().line(b), 1)] })
}

/// |φ^η(A)/φ(A) − 1| for the all-plus spin boundary η, from independent
/// cluster-averaged runs with and without it.
pub fn boundary_influence(run: &SlitRun, event: &SlitEvent) -> Result<BoundaryInfluence> {
    if run.m < 1 {
        return Err(Error::Parameter("boundary influence needs m ≥ 1".into()));
    }
    if run.beta < 4.0 * f64::from(run.m + run.l + 1) {
        return Err(Error::Parameter(format!("need β ≥ 4(m+L+1) = {}", 4 * (run.m + run.l + 1))));
    }
    let base = SlitRun { mode: TallyMode::ClusterAveraged, ..run.clone() };
    let free_run = SlitRun { seed: Rng::stream(run.seed, &[0x31, 0]).next_u64(), ..base.clone() };
    let eta_run = SlitRun { seed: Rng::stream(run.seed, &[0x31, 1]).next_u64(), ..base };
    let (hf, _) = slit_histogram_under(&free_run, &BoundaryRule::Free)?;
    let (he, rejections) = slit_histogram_under(&eta_run, &plus_boundary(run.m, run.l))?;
    let (phi, phi_se) = event_estimate(&hf, event);
    let (phi_eta, phi_eta_se) = event_estimate(&he, event);
    if !(phi > 5.0 * phi_se) || !(phi_eta > 5.0 * phi_eta_se) {
        return Err(Error::InsufficientData(format!("event mass {phi:.3e} not above 5 SE ({phi_se:.3e})")));
    }
    let ratio = phi_eta / phi;
    let se = ratio * ((phi_eta_se / phi_eta).powi(2) + (phi_se / phi).powi(2)).sqrt();
    let tries = run.chains as f64 + rejections.iter().sum::<u64>() as f64;
    Ok(BoundaryInfluence {
        phi_eta,
        phi_eta_se,
        phi,
        phi_se,
        deviation: ratio - 1.0,
        se,
        acceptance: run.chains as f64 / tries,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FiniteEnergyRow {
    /// Spins on S in the order given.
    pub eps: Vec<i8>,
    pub alpha: i8,
    /// φ(σ_S = ε, σ_x = α).
    pub joint: f64,
    /// φ(σ_S = ε).
    pub marginal: f64,
    /// ½ φ(σ_S = ε) P(x ↮ S).
    pub rhs: f64,
    /// Standard error of joint − rhs.
    pub se: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FiniteEnergyReport {
    /// P(x ↮ S) under independent percolation.
    pub p_disconnected: f64,
    pub p_se: f64,
    pub rows: Vec<FiniteEnergyRow>,
    /// Patterns ε skipped for low mass.
    pub skipped: usize,
    pub violations: Vec<FiniteEnergyRow>,
}

/// Sampling budget for the finite-energy check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct FiniteEnergyRun {
    pub lambda: f64,
    pub delta: f64,
    /// Retained q = 2 sweeps; also the number of percolation samples.
    pub sweeps: u64,
    pub burn_in: u64,
    pub batches: usize,
    pub seed: u64,
}

/// φ(σ_S = ε, σ_x = α) ≥ ½ φ(σ_S = ε) P(x ↮ S) for every ε with enough mass
/// and both α, judged at 3 SE. Spin probabilities are conditional
/// expectations given the bonds of one q = 2 chain; P(x ↮ S) comes from
/// independent percolation samples.
pub fn finite_energy_check(bx: &SpaceTimeBox, s: &[BoxPoint], x: BoxPoint, run: &FiniteEnergyRun) -> Result<FiniteEnergyReport> {
    if s.len() > MAX_FINITE_ENERGY_POINTS {
        return Err(Error::Size(format!("|S| = {} exceeds {MAX_FINITE_ENERGY_POINTS}", s.len())));
    }
    if run.sweeps < 2 * run.batches as u64 || run.batches < 2 {
        return Err(Error::Parameter("need at least two batches of two sweeps".into()));
    }
    for p in s.iter().chain(std::iter::once(&x)) {
        bx.check_point(p)?;
    }
    if s.iter().any(|p| same_point(p, &x)) {
        return Err(Error::Parameter("x must not lie in S".into()));
    }
    let n = s.len();
    let patterns = 1usize << n;
    let mut points: Vec<BoxPoint> = s.to_vec();
    points.push(x);

    // Percolation estimate of P(x ↮ S).
    let mut disc = Vec::with_capacity(run.sweeps as usize);
    for t in 0..run.sweeps {
        let cfg = sample_percolation(bx, run.lambda, run.delta, Rng::stream(run.seed, &[0xFE, t]).next_u64())?;
        let lab = ClusterLabelling::build(bx, &cfg, &BoundaryRule::Free)?;
        let cx = lab.cluster_of(lab.interval_at(&x)?);
        let mut hit = false;
        for p in s {
            hit |= lab.cluster_of(lab.interval_at(p)?) == cx;
        }
        disc.push(f64::from(u8::from(!hit)));
    }
    let p_dis = disc.iter().sum::<f64>() / disc.len() as f64;
    let p_se = (p_dis * (1.0 - p_dis) / disc.len() as f64).sqrt();

    // q = 2 chain: conditional law of the spins on S ∪ {x} given the bonds.
    let mut ch = ChainState::uniform(bx, run.lambda, run.delta, BoundaryRule::Free, Rng::stream(run.seed, &[0xFF]).next_u64())?;
    ch.run(run.burn_in)?;
    let size = run.sweeps / run.batches as u64;
    let mut joint = vec![vec![0.0; 2 * patterns]; run.batches];
    let mut ids = vec![0u32; n + 1];
    for b in 0..run.batches {
        for _ in 0..size {
            ch.sweep()?;
            let lab = ch.labelling();
            for (id, p) in ids.iter_mut().zip(&points) {
                *id = lab.cluster_of(lab.interval_at(p)?);
            }
            accumulate_patterns(&ids, &mut joint[b]);
        }
    }
    let used = (size * run.batches as u64) as f64;
    let tot: Vec<f64> = (0..2 * patterns).map(|c| joint.iter().map(|b| b[c]).sum::<f64>()).collect();
    let mut rows = Vec::new();
    let mut skipped = 0;
    for e in 0..patterns {
        let marg_count = tot[2 * e] + tot[2 * e + 1];
        if marg_count < MIN_EXPECTED_COUNT {
            skipped += 1;
            continue;
        }
        for a in 0..2 {
            let c = 2 * e + a;
            let joint_p = tot[c] / used;
            let marginal = marg_count / used;
            let rhs = 0.5 * marginal * p_dis;
            // Jackknife joint − ½ p marginal over batches at fixed p, then add p's own error.
            let reps: Vec<f64> = (0..run.batches)
                .map(|b| {
                    let w = used - size as f64;
                    let j = (tot[c] - joint[b][c]) / w;
                    let m = (marg_count - joint[b][2 * e] - joint[b][2 * e + 1]) / w;
                    j - 0.5 * p_dis * m
                })
                .collect();
            let se = (jackknife_se(&reps).powi(2) + (0.5 * marginal * p_se).powi(2)).sqrt();
            let eps = (0..n).map(|i| if (e >> (n - 1 - i)) & 1 == 1 { -1 } else { 1 }).collect();
            let holds = joint_p >= rhs - 3.0 * se;
            rows.push(FiniteEnergyRow { eps, alpha: if a == 1 { -1 } else { 1 }, joint: joint_p, marginal, rhs, se, holds });
        }
    }
    let violations = rows.iter().filter(|r| !r.holds).cloned().collect();
    Ok(FiniteEnergyReport { p_disconnected: p_dis, p_se, rows, skipped, violations })
}

fn same_point(a: &BoxPoint, b: &BoxPoint) -> bool {
    a.site == b.site && a.time == b.time && a.side == b.side
}

/// Adds P(σ_S = ε, σ_x = α | clusters) for all (ε, α); `ids` lists the
/// cluster of each point of S followed by x. Index 2ε + α, with bit set
/// for spin −1 and the first point of S most significant.
fn accumulate_patterns(ids: &[u32], out: &mut [f64]) {
    let mut distinct: Vec<u32> = ids.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let u = distinct.len();
    let w = 0.5f64.powi(u as i32);
    for assign in 0..1usize << u {
        let idx = ids.iter().fold(0usize, |acc, c| {
            (acc << 1) | ((assign >> distinct.binary_search(c).expect("listed")) & 1)
        });
        out[idx] += w;
    }
}

/// Which pair of sets the t-quantities refer to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MixingSets {
    /// Δ = {x⁺: K ≤ x ≤ L−K}, Γ = {x⁻: K ≤ x ≤ L−K}.
    Slit { k: u32 },
    /// Δ = both sides of the slit, Γ = the outer lines x = −m and x = m+L.
    Boundary,
}

#[derive(Clone, Debug, Serialize)]
pub struct TQuantities {
    /// P(Δ ↔ D) under the measure wired at Δ ∪ Γ, connections read off
    /// the bonds alone.
    pub t1: f64,
    pub t1_se: f64,
    /// P(D ↔ Γ) under the same measure.
    pub t2_sq: f64,
    pub t2_sq_se: f64,
    /// The same two connection probabilities under independent percolation.
    pub t1_percolation: f64,
    pub t1_percolation_se: f64,
    pub t2_sq_percolation: f64,
    pub t2_sq_percolation_se: f64,
    /// t = t₁ + 2t₂ + (t₁+t₂)/(1−t₁−2t₂), when the denominator is positive.
    pub t: Option<f64>,
}

pub fn mixing_t(t1: f64, t2: f64) -> Option<f64> {
    let den = 1.0 - t1 - 2.0 * t2;
    (den > 0.0).then(|| t1 + 2.0 * t2 + (t1 + t2) / den)
}

pub fn mixing_sets(bx: &SpaceTimeBox, sets: MixingSets) -> Result<(Region, Region)> {
    let l = bx.slit_len().ok_or_else(|| Error::Domain("need a slit box".into()))? as i64;
    match sets {
        MixingSets::Slit { k } => {
            let k = i64::from(k);
            if 2 * k > l {
                return Err(Error::Parameter(format!("K = {k} exceeds L/2")));
            }
            Ok((Region::slit_side(k, l - k, SlitSide::Plus), Region::slit_side(k, l - k, SlitSide::Minus)))
        }
        MixingSets::Boundary => Ok((
            Region::slit_side(0, l, SlitSide::Plus).union(&Region::slit_side(0, l, SlitSide::Minus)),
            Region::new().line(bx.x_min()).line(bx.x_max()),
        )),
    }
}

/// Estimates t₁ and t₂² for a separator, under the q = 2 measure wired at
/// Δ ∪ Γ and, for comparison, under independent percolation.
pub fn t_quantities(run: &SlitRun, sets: MixingSets, separator: &SeparatorGeometry) -> Result<TQuantities> {
    let bx = run.slit_box()?;
    let (delta_set, gamma_set) = mixing_sets(&bx, sets)?;
    let d = separator.resolve(&bx)?;
    if !separates(&bx, &d, &delta_set, &gamma_set)? {
        return Err(Error::Domain("separator does not separate Δ from Γ".into()));
    }
    let wired = BoundaryRule::WiredAt(delta_set.clone().union(&gamma_set));
    let probe = |lab: &ClusterLabelling| -> Result<(f64, f64)> {
        let a = lab.regions_connected(&delta_set, &d)?;
        let b = lab.regions_connected(&d, &gamma_set)?;
        Ok((f64::from(u8::from(a)), f64::from(u8::from(b))))
    };
    let total = run.sweeps * run.chains as u64;
    let (mut x1, mut x2) = (Vec::with_capacity(total as usize), Vec::with_capacity(total as usize));
    for c in 0..run.chains {
        let seed = Rng::stream(run.seed, &[0x7A, c as u64]).next_u64();
        let mut ch = ChainState::uniform(&bx, run.lambda, run.delta, wired.clone(), seed)?;
        ch.run(run.burn_in())?;
        for _ in 0..run.sweeps {
            ch.sweep()?;
            let lab = ClusterLabelling::build(&bx, ch.config(), &BoundaryRule::Free)?;
            let (a, b) = probe(&lab)?;
            x1.push(a);
            x2.push(b);
        }
    }
    let (mut p1, mut p2) = (Vec::with_capacity(total as usize), Vec::with_capacity(total as usize));
    for t in 0..total {
        let cfg = sample_percolation(&bx, run.lambda, run.delta, Rng::stream(run.seed, &[0x7B, t]).next_u64())?;
        let (a, b) = probe(&ClusterLabelling::build(&bx, &cfg, &BoundaryRule::Free)?)?;
        p1.push(a);
        p2.push(b);
    }
    let nb = run.batches * run.chains;
    let (t1, t1_se) = batch_means(&x1, nb);
    let (t2_sq, t2_sq_se) = batch_means(&x2, nb);
    let binom = |v: &[f64]| {
        let p = v.iter().sum::<f64>() / v.len() as f64;
        (p, (p * (1.0 - p) / v.len() as f64).sqrt())
    };
    let (t1_percolation, t1_percolation_se) = binom(&p1);
    let (t2_sq_percolation, t2_sq_percolation_se) = binom(&p2);
    Ok(TQuantities {
        t1,
        t1_se,
        t2_sq,
        t2_sq_se,
        t1_percolation,
        t1_percolation_se,
        t2_sq_percolation,
        t2_sq_percolation_se,
        t: mixing_t(t1, t2_sq.sqrt()),
    })
}

/// One line of `mixing.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingRow {
    pub check: String,
    pub m: u32,
    #[serde(rename = "L")]
    pub l: u32,
    #[serde(rename = "K")]
    pub k: u32,
    pub beta: f64,
    pub value: f64,
    pub se: f64,
    pub bound_form: String,
}
