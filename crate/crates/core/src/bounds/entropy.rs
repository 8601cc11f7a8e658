//! Entropy bound for a block of length L given norm decay
//! ‖ρ_m − ρ_n‖ ≤ C L^α e^{−γm}.

use crate::error::{Error, Result};
use crate::quantum_oracle::{op_norm_diff, weyl_gap, DensityMatrix};
use serde::Serialize;
use std::f64::consts::LN_2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EntropyBoundInputs {
    pub gamma: f64,
    pub alpha: f64,
    pub c: f64,
    pub l: u32,
}

/// Branch of the bound that was used.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BoundBranch {
    /// m ≤ K: the Schmidt rank cap 2m.
    RankCap,
    /// m > K: log₂ ν plus the eigenvalue-tail sum.
    Tail,
}

/// Every intermediate quantity of the bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyBound {
    pub k: u64,
    pub c0: f64,
    pub xi: f64,
    pub c0_prime: f64,
    pub nu: f64,
    /// log₂ ν, the bound on the head of the spectrum.
    pub s1: f64,
    /// The three terms of the tail bound before the common prefactor:
    /// |log₂ c₀′|, ξ log₂ ν and ξ/((ξ−1) ln 2).
    pub s2_terms: [f64; 3],
    /// c₀′ ν^{1−ξ}/(ξ−1).
    pub s2_prefactor: f64,
    pub s2: f64,
    pub branch: BoundBranch,
    pub bound: f64,
}

impl EntropyBoundInputs {
    pub fn new(gamma: f64, alpha: f64, c: f64, l: u32) -> Result<Self> {
        if !(gamma > 0.0 && alpha > 0.0 && c > 0.0) || !(gamma * alpha * c).is_finite() || l < 1 {
            return Err(Error::Parameter(format!("need γ, α, C > 0 and L ≥ 1; got γ={gamma}, α={alpha}, C={c}, L={l}")));
        }
        Ok(EntropyBoundInputs { gamma, alpha, c, l })
    }

    /// Whether ξ = γ/(2 ln 2) exceeds 2, which the tail integral needs.
    pub fn pipeline_applies(&self) -> bool {
        self.gamma > 4.0 * LN_2
    }

    /// K = ⌈ln(C L^α)/γ⌉, floored at 0.
    pub fn k(&self) -> u64 {
        let v = ((self.c.ln() + self.alpha * f64::from(self.l).ln()) / self.gamma).ceil();
        if v > 0.0 {
            v as u64
        } else {
            0
        }
    }
}

/// Bound on S(ρ_m^L) in bits.
pub fn entropy_bound_pipeline(inp: &EntropyBoundInputs, m: u64) -> Result<EntropyBound> {
    let mut b = tail_bound(inp)?;
    if m <= b.k {
        b.branch = BoundBranch::RankCap;
        b.bound = 2.0 * m as f64;
    }
    Ok(b)
}

/// A bound valid for every m at once: the larger of the rank cap at m = K and
/// the tail bound. Unlike the per-m bound it is non-decreasing in L.
pub fn entropy_bound_uniform(inp: &EntropyBoundInputs) -> Result<EntropyBound> {
    let mut b = tail_bound(inp)?;
    let cap = 2.0 * b.k as f64;
    if cap > b.bound {
        b.branch = BoundBranch::RankCap;
        b.bound = cap;
    }
    Ok(b)
}

fn tail_bound(inp: &EntropyBoundInputs) -> Result<EntropyBound> {
    if !inp.pipeline_applies() {
        return Err(Error::Domain(format!("γ = {} ≤ 4 ln 2: the tail sum bound does not apply", inp.gamma)));
    }
    let g = inp.gamma;
    let k = inp.k();
    let c0 = 1.0 / (1.0 - (-g).exp());
    let xi = g / (2.0 * LN_2);
    let growth = g * (k as f64 + 1.0);
    let c0_prime = c0 * growth.exp();
    let nu = growth.exp().ceil();
    let s1 = nu.log2();
    let s2_terms = [c0_prime.log2().abs(), xi * s1, xi / ((xi - 1.0) * LN_2)];
    // Written as c₀ e^{γ(K+1)} ν^{1−ξ} in logs to survive large K.
    let s2_prefactor = (c0.ln() + growth + (1.0 - xi) * nu.ln()).exp() / (xi - 1.0);
    let s2 = s2_prefactor * s2_terms.iter().sum::<f64>();
    Ok(EntropyBound { k, c0, xi, c0_prime, nu, s1, s2_terms, s2_prefactor, s2, branch: BoundBranch::Tail, bound: s1 + s2 })
}

/// Outcome of replaying the eigenvalue cascade on exact reduced states.
#[derive(Clone, Debug, Default, Serialize)]
pub struct TailCheckReport {
    pub k: u64,
    /// ε(l) = ‖ρ_{K+l} − ρ_{K+l+1}‖.
    pub eps: Vec<f64>,
    /// max_j |λ_j↓(ρ_{K+l}) − λ_j↓(ρ_{K+l+1})|.
    pub weyl_gaps: Vec<f64>,
    pub weyl_ok: bool,
    pub case_i_ok: bool,
    pub case_ii_ok: bool,
    pub case_iii_ok: bool,
    /// Whether every ε(l) ≤ e^{−γl}.
    pub eps_within_rate: bool,
    pub violations: Vec<String>,
}

impl TailCheckReport {
    pub fn all_ok(&self) -> bool {
        self.weyl_ok && self.case_i_ok && self.case_ii_ok && self.case_iii_ok
    }
}

/// Checks the eigenvalue bounds for ρ_{K+r}, r ≥ 1, given ρ_K..ρ_{K+R} in
/// `rhos`. With ε(l) the measured consecutive norm differences:
/// (i) j ≤ 4^K: λ_j(ρ_{K+r}) ≤ λ_j(ρ_K) + Σ_{l<r} ε(l);
/// (ii) 4^{K+s} < j ≤ 4^{K+s+1} ≤ 4^{K+r}: λ_j(ρ_{K+r}) ≤ Σ_{s≤l<r} ε(l);
/// (iii) j > 4^{K+r}: λ_j(ρ_{K+r}) = 0 to 1e-12.
pub fn eigenvalue_tail_check(rhos: &[DensityMatrix], gamma: f64, k: u64) -> Result<TailCheckReport> {
    if rhos.len() < 2 {
        return Err(Error::InsufficientData("need at least two consecutive reduced states".into()));
    }
    let d = rhos[0].dim();
    let mut rep = TailCheckReport { k, weyl_ok: true, case_i_ok: true, case_ii_ok: true, case_iii_ok: true, eps_within_rate: true, ..Default::default() };
    for (l, w) in rhos.windows(2).enumerate() {
        let e = op_norm_diff(&w[0], &w[1])?;
        let g = weyl_gap(&w[0], &w[1])?;
        if g > e + 1e-9 {
            rep.weyl_ok = false;
            rep.violations.push(format!("Weyl step l={l}: gap {g:.3e} > ε {e:.3e}"));
        }
        if e > (-gamma * l as f64).exp() {
            rep.eps_within_rate = false;
        }
        rep.eps.push(e);
        rep.weyl_gaps.push(g);
    }
    // Rank caps 4^{K+s}, saturating at the matrix size.
    let cap = |s: u64| -> usize { 2u32.checked_pow(2 * (k + s) as u32).map_or(usize::MAX, |v| v as usize) };
    let base = &rhos[0].spectrum().values;
    for r in 1..rhos.len() {
        let lam = &rhos[r].spectrum().values;
        let sum_from = |s: usize| rep.eps[s..r].iter().sum::<f64>();
        for j in 1..=d {
            let v = lam[j - 1];
            if j <= cap(0) {
                if v > base[j - 1] + sum_from(0) + 1e-9 {
                    rep.case_i_ok = false;
                    rep.violations.push(format!("case (i) r={r} j={j}: {v:.3e}"));
                }
            } else if j > cap(r as u64) {
                if v.abs() > 1e-12 {
                    rep.case_iii_ok = false;
                    rep.violations.push(format!("case (iii) r={r} j={j}: {v:.3e}"));
                }
            } else {
                let s = (0..r).find(|&s| j <= cap(s as u64 + 1)).expect("j ≤ cap(r)");
                if v > sum_from(s) + 1e-9 {
                    rep.case_ii_ok = false;
                    rep.violations.push(format!("case (ii) r={r} s={s} j={j}: {v:.3e}"));
                }
            }
        }
    }
    Ok(rep)
}
