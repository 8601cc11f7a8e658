use super::checks::{marginal_counts, ratios, SlitEvent};
use crate::error::{Error, Result};
use crate::quantum_oracle::{build_hamiltonian, reduce, spin_of, thermal_density, DenseOperator, DensityMatrix};

/// The slit law φ(σ⁺ = ε⁺, σ⁻ = ε⁻) = ⟨ε⁻|ρ|ε⁺⟩ / Σ ρ, as a row-major (ε⁺, ε⁻) vector.
pub fn slit_law(rho: &DensityMatrix) -> Vec<f64> {
    let d = rho.dim();
    let total: f64 = rho.operator().data().iter().sum();
    let mut out = vec![0.0; d * d];
    for ep in 0..d {
        for em in 0..d {
            out[ep * d + em] = rho.get(em, ep) / total;
        }
    }
    out
}

/// Exact slit law at inverse temperature β on the chain −m..=m+L. With
/// `plus_boundary` the outer sites are frozen at +1, which leaves the inner
/// chain with a longitudinal field λ/2 on each end site.
pub fn exact_slit_law(m: u32, l: u32, beta: f64, lambda: f64, delta: f64, plus_boundary: bool) -> Result<Vec<f64>> {
    let (n, lo) = if plus_boundary {
        if m < 1 {
            return Err(Error::Parameter("a spin boundary needs m ≥ 1".into()));
        }
        ((2 * m + l - 1) as usize, (m - 1) as usize)
    } else {
        ((2 * m + l + 1) as usize, m as usize)
    };
    let mut h = build_hamiltonian(n, &vec![lambda; n - 1], &vec![delta; n])?;
    if plus_boundary {
        let field: Vec<f64> =
            (0..h.dim()).map(|i| -0.5 * lambda * f64::from(spin_of(i, 0, n) + spin_of(i, n - 1, n))).collect();
        h = h.add(&DenseOperator::diagonal(&field))?;
    }
    let rho = reduce(&thermal_density(&h, beta)?, (lo, lo + l as usize), n)?;
    Ok(slit_law(&rho))
}

/// Largest |φ(σ_Δ=a, σ_Γ=b)/(φ(σ_Δ=a)φ(σ_Γ=b)) − 1| from the exact slit law.
pub fn exact_factorization_deviation(m: u32, l: u32, beta: f64, lambda: f64, delta: f64, k: u32) -> Result<f64> {
    if 2 * k > l {
        return Err(Error::Parameter(format!("margin K = {k} exceeds L/2")));
    }
    let law = exact_slit_law(m, l, beta, lambda, delta, false)?;
    let ds = 1usize << (l + 1 - 2 * k);
    let (r, _, _) = ratios(&marginal_counts(&law, l, k), ds);
    Ok(r.iter().filter(|x| x.is_finite()).map(|x| (x - 1.0).abs()).fold(0.0, f64::max))
}

/// φ^η(A)/φ(A) − 1 for the all-plus boundary, exactly.
pub fn exact_boundary_influence(m: u32, l: u32, beta: f64, lambda: f64, delta: f64, event: &SlitEvent) -> Result<f64> {
    let d = 1usize << (l + 1);
    let free = exact_slit_law(m, l, beta, lambda, delta, false)?;
    let eta = exact_slit_law(m, l, beta, lambda, delta, true)?;
    Ok(event.probability(&eta, d) / event.probability(&free, d) - 1.0)
}
