use super::histogram::{diagonal_mass, estimate_a, leave_one_out, SlitHistogram};
use crate::error::{Error, Result};
use crate::quantum_oracle::{entropy, op_norm_diff, DenseOperator, DensityMatrix};
use crate::stats::jackknife_se;

/// Reduced density matrix estimated from a slit histogram.
#[derive(Clone, Debug)]
pub struct RdmEstimate {
    /// Symmetrized and projected onto unit-trace PSD matrices.
    pub rho: DensityMatrix,
    /// Symmetrized, before projection.
    pub raw: DenseOperator,
    /// Jackknife standard error of each entry of `rho`.
    pub se: DenseOperator,
    pub a_hat: f64,
    pub a_se: f64,
    pub entropy: f64,
    pub entropy_se: f64,
    /// |tr(raw) − 1|, zero up to rounding by construction.
    pub trace_drift: f64,
    pub raw_min_eigenvalue: f64,
    /// Leave-one-batch-out estimates of `rho`, for errors of derived quantities.
    pub replicates: Vec<DenseOperator>,
}

impl RdmEstimate {
    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    /// Largest |ρ̂_ij − ρ_ij| / se_ij against a reference matrix, skipping
    /// entries with zero error (which then must match to 1e-12).
    pub fn max_z(&self, reference: &DenseOperator) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let diff = (self.rho.get(i, j) - reference.get(i, j)).abs();
                let se = self.se.get(i, j);
                let z = if se > 0.0 {
                    diff / se
                } else if diff <= 1e-12 {
                    0.0
                } else {
                    f64::INFINITY
                };
                worst = worst.max(z);
            }
        }
        worst
    }
}

/// ρ̂[ε⁻][ε⁺] = count(ε⁺, ε⁻) / diagonal mass, symmetrized.
fn raw_matrix(counts: &[f64], d: usize) -> Result<DenseOperator> {
    let diag = diagonal_mass(counts, d);
    if !(diag > 0.0) {
        return Err(Error::InsufficientData("no diagonal mass".into()));
    }
    let mut m = DenseOperator::zeros(d);
    for ep in 0..d {
        for em in 0..d {
            m.set(em, ep, counts[ep * d + em] / diag);
        }
    }
    Ok(m.symmetrized())
}

pub fn rdm_from_histogram(h: &SlitHistogram) -> Result<RdmEstimate> {
    let (a_hat, a_se) = estimate_a(h)?;
    if a_hat <= 3.0 * a_se {
        return Err(Error::Conditioning(format!("normalizer â = {a_hat:.3e} within 3 SE ({a_se:.3e}) of zero")));
    }
    let d = h.dim();
    let raw = raw_matrix(&h.counts, d)?;
    let trace_drift = (raw.trace() - 1.0).abs();
    let rho = DensityMatrix::project(raw.clone())?;
    let raw_min_eigenvalue = rho.raw_min_eigenvalue();
    let s = entropy(&rho);
    let mut replicates = Vec::with_capacity(h.batches.len());
    let mut ent = Vec::with_capacity(h.batches.len());
    if h.batches.len() >= 2 {
        for c in leave_one_out(h) {
            let r = DensityMatrix::project(raw_matrix(&c, d)?)?;
            ent.push(entropy(&r));
            replicates.push(r.into_operator());
        }
    }
    let mut se = DenseOperator::zeros(d);
    if !replicates.is_empty() {
        for i in 0..d {
            for j in 0..d {
                let v: Vec<f64> = replicates.iter().map(|r| r.get(i, j)).collect();
                se.set(i, j, jackknife_se(&v));
            }
        }
    }
    let entropy_se = if ent.is_empty() { 0.0 } else { jackknife_se(&ent) };
    Ok(RdmEstimate { rho, raw, se, a_hat, a_se, entropy: s, entropy_se, trace_drift, raw_min_eigenvalue, replicates })
}

/// ‖ρ̂_A − ρ̂_B‖ for independent estimates, with standard error from
/// jackknifing each side while holding the other fixed.
pub fn norm_diff_with_se(a: &RdmEstimate, b: &RdmEstimate) -> Result<(f64, f64)> {
    let full = op_norm_diff(&a.rho, &b.rho)?;
    let side = |reps: &[DenseOperator], other: &DenseOperator| -> Result<f64> {
        if reps.len() < 2 {
            return Ok(0.0);
        }
        let v = reps.iter().map(|r| op_norm_diff(r, other)).collect::<Result<Vec<_>>>()?;
        Ok(jackknife_se(&v))
    };
    let sa = side(&a.replicates, b.rho.operator())?;
    let sb = side(&b.replicates, a.rho.operator())?;
    Ok((full, (sa * sa + sb * sb).sqrt()))
}

/// Frobenius norm of the combined entrywise errors: the size a difference of
/// two independent estimates of the same matrix reaches from noise alone.
pub fn noise_floor(a: &RdmEstimate, b: &RdmEstimate) -> f64 {
    a.se.data().iter().zip(b.se.data()).map(|(x, y)| x * x + y * y).sum::<f64>().sqrt()
}
