//! Branching-process comparison for space-time percolation.
//!
//! Explore the cluster of the origin interval by generations. Each interval
//! extends up and down until a death, so its length is the sum of two
//! independent Exp(δ) variables; bridges hit it at rate 2λ from the two
//! neighbouring lines. Offspring counts are therefore Poisson(2λU) with
//! U ~ Gamma(2, δ), a negative binomial with pgf (δ/(δ − 2λ(s−1)))².
//! Reaching ∂Λ_m needs either m individuals or total lifetime m.

use crate::error::{Error, Result};
use crate::rng::Rng;
use serde::Serialize;

pub const GENERATION_CAP: usize = 10_000;
const INDIVIDUAL_CAP: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BranchingParams {
    pub lambda: f64,
    pub delta: f64,
}

impl BranchingParams {
    pub fn new(lambda: f64, delta: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) || !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::Parameter(format!("need λ ≥ 0 and δ > 0, got λ={lambda}, δ={delta}")));
        }
        Ok(BranchingParams { lambda, delta })
    }

    /// Mean offspring 4λ/δ.
    pub fn mean_offspring(&self) -> f64 {
        4.0 * self.lambda / self.delta
    }

    fn subcritical(&self) -> Result<()> {
        let m = self.mean_offspring();
        if m >= 1.0 {
            return Err(Error::Domain(format!("mean offspring 4λ/δ = {m} ≥ 1: no exponential tail")));
        }
        Ok(())
    }

    /// Right end of the domain of the pgf, 1 + δ/(2λ).
    fn pole(&self) -> f64 {
        if self.lambda == 0.0 {
            f64::INFINITY
        } else {
            1.0 + self.delta / (2.0 * self.lambda)
        }
    }
}

/// G(s) = (δ/(δ − 2λ(s−1)))².
pub fn offspring_pgf(p: &BranchingParams, s: f64) -> Result<f64> {
    let den = p.delta - 2.0 * p.lambda * (s - 1.0);
    if !(den > 0.0) {
        return Err(Error::Domain(format!("pgf pole crossed at s={s}")));
    }
    Ok((p.delta / den).powi(2))
}

/// P(N = k): the coefficient of s^k in the pgf, (k+1) r² (1−r)^k with r = δ/(δ+2λ).
pub fn offspring_pmf(p: &BranchingParams, k: u64) -> f64 {
    let r = p.delta / (p.delta + 2.0 * p.lambda);
    (k as f64 + 1.0) * r * r * (1.0 - r).powi(k as i32)
}

/// Independent realizations of the total progeny M and aggregate lifetime U.
#[derive(Clone, Debug, Default, Serialize)]
pub struct BranchingSample {
    pub progeny: Vec<u64>,
    pub lifetime: Vec<f64>,
    /// Runs stopped at the generation or population cap.
    pub truncated: usize,
}

impl BranchingSample {
    /// Empirical P(M ≥ m) with its binomial standard error.
    pub fn progeny_tail(&self, m: u64) -> (f64, f64) {
        let n = self.progeny.len() as f64;
        let p = self.progeny.iter().filter(|&&x| x >= m).count() as f64 / n;
        (p, (p * (1.0 - p) / n).sqrt())
    }

    /// Empirical P(U ≥ u) with its binomial standard error.
    pub fn lifetime_tail(&self, u: f64) -> (f64, f64) {
        let n = self.lifetime.len() as f64;
        let p = self.lifetime.iter().filter(|&&x| x >= u).count() as f64 / n;
        (p, (p * (1.0 - p) / n).sqrt())
    }
}

fn lifetime_and_children(p: &BranchingParams, rng: &mut Rng) -> (f64, u64) {
    let u = rng.exponential(p.delta) + rng.exponential(p.delta);
    let n = if p.lambda > 0.0 { rng.poisson(2.0 * p.lambda * u) } else { 0 };
    (u, n)
}

/// Offspring counts of single individuals, for checking against [`offspring_pmf`].
pub fn simulate_offspring(p: &BranchingParams, trials: usize, seed: u64) -> Vec<u64> {
    (0..trials)
        .map(|t| lifetime_and_children(p, &mut Rng::stream(seed, &[0xB0, t as u64])).1)
        .collect()
}

/// Galton-Watson trees grown generation by generation, one stream per trial.
/// Supercritical runs stop at [`GENERATION_CAP`] generations and are counted
/// as truncated.
pub fn simulate_branching(p: &BranchingParams, trials: usize, seed: u64) -> BranchingSample {
    let mut out = BranchingSample::default();
    for t in 0..trials {
        let mut rng = Rng::stream(seed, &[0xB1, t as u64]);
        let (mut total, mut life, mut current, mut gens) = (0u64, 0.0, 1u64, 0usize);
        while current > 0 {
            if gens >= GENERATION_CAP || total >= INDIVIDUAL_CAP {
                out.truncated += 1;
                break;
            }
            let mut next = 0u64;
            for _ in 0..current {
                let (u, n) = lifetime_and_children(p, &mut rng);
                life += u;
                next += n;
            }
            total += current;
            current = next;
            gens += 1;
        }
        out.progeny.push(total);
        out.lifetime.push(life);
    }
    out
}

/// Whether x = s·G(x) has a solution, by monotone iteration from 0.
fn progeny_root_exists(p: &BranchingParams, s: f64) -> bool {
    fixed_point_exists(0.0, p.pole(), |x| Ok(s * offspring_pgf(p, x)?))
}

/// Iterates x ← f(x) from `x0`. The sequence is increasing, so it either
/// settles on the smallest fixed point or runs past `pole`.
fn fixed_point_exists(x0: f64, pole: f64, f: impl Fn(f64) -> Result<f64>) -> bool {
    let mut x = x0;
    for _ in 0..10_000_000 {
        let y = match f(x) {
            Ok(y) if y < pole => y,
            _ => return false,
        };
        if (y - x).abs() <= 1e-15 * y.abs().max(1.0) {
            return true;
        }
        x = y;
    }
    true
}

/// Largest parameter in [lo, ∞) for which `exists` holds, to 1e-8 relative.
fn bisect_boundary(lo: f64, exists: impl Fn(f64) -> bool) -> f64 {
    let mut lo = lo;
    let mut hi = 2.0 * lo.max(1.0);
    while exists(hi) {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return f64::INFINITY;
        }
    }
    while hi - lo > 1e-8 * lo.max(1e-300) {
        let mid = 0.5 * (lo + hi);
        if exists(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// ν = ln R, where R is the radius of convergence of the total-progeny pgf
/// Φ(s) = s·G(Φ(s)), so that P(M ≥ m) decays like e^{−νm}.
pub fn progeny_tail_exponent(p: &BranchingParams) -> Result<f64> {
    p.subcritical()?;
    if p.lambda == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(bisect_boundary(1.0, |s| progeny_root_exists(p, s)).ln())
}

/// μ = sup{θ : E e^{θU} < ∞} for the aggregate lifetime U, from the
/// functional equation Ψ = (δ/(δ − θ − 2λ(Ψ − 1)))².
pub fn lifetime_tail_exponent(p: &BranchingParams) -> Result<f64> {
    p.subcritical()?;
    if p.lambda == 0.0 {
        return Ok(p.delta);
    }
    let exists = |theta: f64| {
        let pole = 1.0 + (p.delta - theta) / (2.0 * p.lambda);
        theta < p.delta
            && fixed_point_exists(1.0, pole, |psi| {
                let den = p.delta - theta - 2.0 * p.lambda * (psi - 1.0);
                if den > 0.0 {
                    Ok((p.delta / den).powi(2))
                } else {
                    Err(Error::Domain(String::new()))
                }
            })
    };
    Ok(bisect_boundary(0.0, exists).min(p.delta))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayRateBound {
    pub nu: f64,
    pub mu: f64,
    /// min(ν, μ).
    pub gamma_lower: f64,
}

/// Exponent γ such that P(0 ↔ ∂Λ_m) ≤ P(M ≥ m) + P(U ≥ m) decays at least like e^{−γm}.
pub fn decay_rate_bound(lambda: f64, delta: f64) -> Result<DecayRateBound> {
    let p = BranchingParams::new(lambda, delta)?;
    let nu = progeny_tail_exponent(&p)?;
    let mu = lifetime_tail_exponent(&p)?;
    Ok(DecayRateBound { nu, mu, gamma_lower: nu.min(mu) })
}
