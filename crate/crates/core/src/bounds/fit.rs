use crate::error::{Error, Result};
use crate::stats::{weighted_line_fit, LineFit};
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct DecayFit {
    /// Minus the slope of ln(value) against m.
    pub gamma: f64,
    pub gamma_se: f64,
    pub intercept: f64,
    pub line: LineFit,
    /// Points kept after dropping values within 3 SE of zero.
    pub used: usize,
    /// No decay resolved: γ̂ ≤ 2·SE.
    pub non_decaying: bool,
}

/// Weighted least squares of ln(value) on m, each point weighted by its
/// relative error. Points with value ≤ 3·se are treated as censored.
pub fn fit_decay_rate(table: &[(f64, f64, f64)]) -> Result<DecayFit> {
    let kept: Vec<&(f64, f64, f64)> = table.iter().filter(|(_, v, se)| *v > 0.0 && *v > 3.0 * se).collect();
    if kept.len() < 3 {
        return Err(Error::InsufficientData(format!("{} usable points, need 3", kept.len())));
    }
    let x: Vec<f64> = kept.iter().map(|p| p.0).collect();
    let y: Vec<f64> = kept.iter().map(|p| p.1.ln()).collect();
    let rel: Vec<f64> = kept.iter().map(|p| p.2 / p.1).collect();
    let floor = rel.iter().copied().filter(|r| *r > 0.0).fold(f64::INFINITY, f64::min);
    let sigma: Vec<f64> = rel.iter().map(|&r| if r > 0.0 { r } else if floor.is_finite() { floor } else { 1.0 }).collect();
    let line = weighted_line_fit(&x, &y, &sigma).ok_or_else(|| Error::InsufficientData("degenerate abscissae".into()))?;
    let gamma = -line.slope;
    let gamma_se = line.slope_se;
    Ok(DecayFit { gamma, gamma_se, intercept: line.intercept, non_decaying: !(gamma > 2.0 * gamma_se && gamma > 0.0), used: kept.len(), line })
}
