use super::environment::Environment;
use crate::error::{param, Error, Result};
use serde::{Deserialize, Serialize};

/// `max(|x − y|, (ln⁺|s − t|)^q)`.
pub fn dq_distance(x: i64, s: f64, y: i64, t: f64, q: f64) -> Result<f64> {
    if !(q >= 1.0 && q.is_finite()) {
        return param(format!("q must be at least 1, got {q}"));
    }
    let dt = (s - t).abs();
    let lt = if dt > 1.0 { dt.ln().powf(q) } else { 0.0 };
    Ok(((x - y).unsigned_abs() as f64).max(lt))
}

/// Default margin `K = ⌈ln L⌉`.
pub fn log_margin(l: u32) -> u32 {
    if l <= 1 {
        0
    } else {
        (l as f64).ln().ceil() as u32
    }
}

/// `Z_x = ln(1 + (λ_{x,x−1} + λ_{x,x+1})/δ_x)`.
pub fn z_value(env: &Environment, x: i64) -> Result<f64> {
    env.require(x - 1, x + 1)?;
    let (l, r, d) = (env.coupling(x - 1).unwrap(), env.coupling(x).unwrap(), env.field(x).unwrap());
    Ok(((l + r) / d).ln_1p())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XlTrace {
    pub l: u32,
    pub k: u32,
    pub x_l: f64,
    pub ln_x_l: f64,
    /// `(x, Z_x)` over both margins, left margin first.
    pub z: Vec<(i64, f64)>,
}

impl XlTrace {
    /// `−2 Σ Z_x` summed in trace order.
    pub fn ln_from_trace(z: &[(i64, f64)]) -> f64 {
        -2.0 * z.iter().map(|p| p.1).sum::<f64>()
    }
}

/// `ln X_L = −2 Σ_{x<K} Z_x − 2 Σ_{x>L−K} Z_x`: every margin site of the slit
/// appears once in the upper and once in the lower row of the product.
pub fn compute_xl(env: &Environment, l: u32, k: Option<u32>) -> Result<XlTrace> {
    if l < 8 {
        return param(format!("X_L needs L ≥ 8, got {l}"));
    }
    let k = k.unwrap_or_else(|| log_margin(l));
    if 2 * k > l + 1 {
        return param(format!("margins K = {k} overlap on [0, {l}]"));
    }
    env.require(-1, l as i64 + 1)?;
    let l64 = l as i64;
    let sites = (0..k as i64).chain(l64 - k as i64 + 1..=l64);
    let z = sites.map(|x| z_value(env, x).map(|v| (x, v))).collect::<Result<Vec<_>>>()?;
    let ln_x_l = XlTrace::ln_from_trace(&z);
    Ok(XlTrace { l, k, x_l: ln_x_l.exp(), ln_x_l, z })
}

/// Per-site localization radii `D_x`; `+∞` marks a site whose empirical
/// decay never fell under the target within the scanned range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalizationRadii {
    pub x_min: i64,
    pub radii: Vec<f64>,
}

impl LocalizationRadii {
    pub fn constant(x_min: i64, x_max: i64, d: f64) -> Self {
        LocalizationRadii { x_min, radii: vec![d; (x_max - x_min + 1).max(0) as usize] }
    }

    pub fn x_max(&self) -> i64 {
        self.x_min + self.radii.len() as i64 - 1
    }

    pub fn get(&self, x: i64) -> Option<f64> {
        usize::try_from(x - self.x_min).ok().and_then(|i| self.radii.get(i).copied())
    }

    pub fn set(&mut self, x: i64, d: f64) {
        let i = (x - self.x_min) as usize;
        self.radii[i] = d;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventParams {
    pub l: u32,
    pub m: u32,
    pub rho: f64,
    /// Margin for A_L and X_L; `⌈ln L⌉` when absent.
    #[serde(default)]
    pub k: Option<u32>,
}

/// Indicator with the first violating site.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Indicator {
    pub holds: bool,
    pub witness: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentEvents {
    pub params: EventParams,
    /// `∩_{K ≤ x ≤ L−K} {D_x < min(x, L−x)}`.
    pub a: Indicator,
    /// `X_L ≥ L^{−ρ}`.
    pub b: bool,
    /// `∩_{0 ≤ x ≤ L} {D_x < ½ min(k+x, L+k−x)}` with `k = m/2`.
    pub c: Indicator,
    /// `∩_{−k ≤ x ≤ L+k} {D_x < min(m+x, L+m−x)}`.
    pub d: Indicator,
    pub xl: XlTrace,
    /// `−ρ ln L`, the threshold for `ln X_L`.
    pub ln_threshold: f64,
    /// The radii the indicators were read from.
    pub radii_used: Vec<(i64, f64)>,
}

impl EnvironmentEvents {
    pub fn all(&self) -> bool {
        self.a.holds && self.b && self.c.holds && self.d.holds
    }
}

fn intersect<F: Fn(i64) -> f64>(radii: &LocalizationRadii, sites: std::ops::RangeInclusive<i64>, bound: F, used: &mut Vec<(i64, f64)>) -> Result<Indicator> {
    let mut witness = None;
    for x in sites {
        let d = radii.get(x).ok_or_else(|| Error::Domain(format!("no localization radius for site {x}")))?;
        used.push((x, d));
        if witness.is_none() && !(d < bound(x)) {
            witness = Some(x);
        }
    }
    Ok(Indicator { holds: witness.is_none(), witness })
}

/// The environment events for one `(L, m)`. For odd `m` the half-width
/// `k = m/2` is used as a real number and D_{L,m} runs over `|x| ≤ ⌊k⌋`
/// outside the slit.
pub fn environment_events(env: &Environment, radii: &LocalizationRadii, params: EventParams) -> Result<EnvironmentEvents> {
    if !(params.rho > 0.0 && params.rho.is_finite()) {
        return param(format!("ρ must be positive, got {}", params.rho));
    }
    let xl = compute_xl(env, params.l, params.k)?;
    let (l, m) = (params.l as f64, params.m as f64);
    let (li, kk) = (params.l as i64, xl.k as i64);
    let k = m / 2.0;
    let mut used = Vec::new();
    let a = intersect(radii, kk..=li - kk, |x| (x as f64).min(l - x as f64), &mut used)?;
    let c = intersect(radii, 0..=li, |x| 0.5 * (k + x as f64).min(l + k - x as f64), &mut used)?;
    let kf = k.floor() as i64;
    let d = intersect(radii, -kf..=li + kf, |x| (m + x as f64).min(l + m - x as f64), &mut used)?;
    used.sort_by_key(|p| p.0);
    used.dedup_by_key(|p| p.0);
    let ln_threshold = -params.rho * l.ln();
    Ok(EnvironmentEvents { params, a, b: xl.ln_x_l >= ln_threshold, c, d, xl, ln_threshold, radii_used: used })
}
