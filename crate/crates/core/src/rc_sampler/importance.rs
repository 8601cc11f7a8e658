use crate::error::{param, Result};
use crate::geometry::SpaceTimeBox;
use crate::percolation::{sample_percolation, BoundaryRule, ClusterLabelling, Configuration};
use crate::rng::Rng;

const TAG_IMPORTANCE: u64 = 0x1A9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImportanceEstimate {
    pub estimate: f64,
    pub se: f64,
    pub effective_sample_size: f64,
    /// Set when the effective sample size is below 10.
    pub unreliable: bool,
}

/// Self-normalised estimate of E[f] under the measure with density
/// proportional to q^k against independent percolation, k counted under
/// `rule`.
#[allow(clippy::too_many_arguments)]
pub fn importance_estimate<F>(
    bx: &SpaceTimeBox,
    rule: &BoundaryRule,
    lambda: f64,
    delta: f64,
    q: f64,
    f: F,
    trials: u64,
    seed: u64,
) -> Result<ImportanceEstimate>
where
    F: Fn(&Configuration, &ClusterLabelling) -> f64,
{
    if !(q >= 1.0) {
        return param(format!("q must be at least 1, got {q}"));
    }
    if trials == 0 {
        return param("need at least one trial");
    }
    let lnq = q.ln();
    let mut logw = Vec::with_capacity(trials as usize);
    let mut vals = Vec::with_capacity(trials as usize);
    for t in 0..trials {
        let cfg = sample_percolation(bx, lambda, delta, Rng::stream(seed, &[TAG_IMPORTANCE, t]).next_u64())?;
        let lab = ClusterLabelling::build(bx, &cfg, rule)?;
        logw.push(lab.num_clusters() as f64 * lnq);
        vals.push(f(&cfg, &lab));
    }
    let max = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logw.iter().map(|l| (l - max).exp()).collect();
    let sw: f64 = w.iter().sum();
    let estimate = w.iter().zip(&vals).map(|(w, v)| w * v).sum::<f64>() / sw;
    let sw2: f64 = w.iter().map(|w| w * w).sum();
    let var = w.iter().zip(&vals).map(|(w, v)| w * w * (v - estimate).powi(2)).sum::<f64>() / (sw * sw);
    let ess = sw * sw / sw2;
    Ok(ImportanceEstimate { estimate, se: var.sqrt(), effective_sample_size: ess, unreliable: ess < 10.0 })
}
