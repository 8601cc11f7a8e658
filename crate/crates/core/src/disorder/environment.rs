use crate::error::{param, Error, Result};
use crate::percolation::SiteRates;
use crate::report::{read_csv, write_csv};
use crate::rng::Rng;
use serde::{Deserialize, Serialize};

const TAG_LAMBDA: u64 = 0xE1;
const TAG_DELTA: u64 = 0xE2;

/// A law on (0, ∞) for couplings or fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum Distribution {
    PointMass { value: f64 },
    /// `exp(mu + sigma·N(0,1))`.
    LogNormal { mu: f64, sigma: f64 },
    Uniform { low: f64, high: f64 },
    /// `high` with probability `p_high`, otherwise `low`.
    TwoPoint { low: f64, high: f64, p_high: f64 },
}

impl Distribution {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        let ok = match *self {
            Distribution::PointMass { value } => pos(value),
            Distribution::LogNormal { mu, sigma } => mu.is_finite() && sigma >= 0.0 && sigma.is_finite(),
            Distribution::Uniform { low, high } => pos(low) && pos(high) && low <= high,
            Distribution::TwoPoint { low, high, p_high } => pos(low) && pos(high) && (0.0..=1.0).contains(&p_high),
        };
        if ok {
            Ok(())
        } else {
            param(format!("distribution {self:?} is not supported on (0, ∞)"))
        }
    }

    pub fn sample(&self, rng: &mut Rng) -> f64 {
        match *self {
            Distribution::PointMass { value } => value,
            Distribution::LogNormal { mu, sigma } => (mu + sigma * rng.normal()).exp(),
            Distribution::Uniform { low, high } => low + (high - low) * rng.uniform(),
            Distribution::TwoPoint { low, high, p_high } => {
                if rng.bernoulli(p_high) {
                    high
                } else {
                    low
                }
            }
        }
    }

    /// Essential infimum and supremum of the support.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Distribution::PointMass { value } => (value, value),
            Distribution::LogNormal { mu, sigma } if sigma == 0.0 => (mu.exp(), mu.exp()),
            Distribution::LogNormal { .. } => (0.0, f64::INFINITY),
            Distribution::Uniform { low, high } => (low, high),
            Distribution::TwoPoint { low, high, p_high } => {
                if p_high == 0.0 {
                    (low, low)
                } else if p_high == 1.0 {
                    (high, high)
                } else {
                    (low.min(high), low.max(high))
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSpec {
    pub lambda: Distribution,
    pub delta: Distribution,
}

impl EnvironmentSpec {
    pub fn constant(lambda: f64, delta: f64) -> Self {
        EnvironmentSpec { lambda: Distribution::PointMass { value: lambda }, delta: Distribution::PointMass { value: delta } }
    }

    /// `sup λ / inf δ` when finite: then `λ_{x,y}/δ_x` never exceeds it.
    pub fn ratio_bound(&self) -> Option<f64> {
        let (_, lmax) = self.lambda.support();
        let (dmin, _) = self.delta.support();
        let r = lmax / dmin;
        (dmin > 0.0 && r.is_finite()).then_some(r)
    }
}

/// Fields `δ_x` for `x ∈ [x_min, x_max]` and couplings `λ_{x,x+1}` for
/// `x ∈ [x_min, x_max)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    x_min: i64,
    delta: Vec<f64>,
    lambda: Vec<f64>,
    spec: Option<EnvironmentSpec>,
    seed: Option<u64>,
}

impl Environment {
    pub fn new(x_min: i64, delta: Vec<f64>, lambda: Vec<f64>) -> Result<Self> {
        if delta.is_empty() || lambda.len() + 1 != delta.len() {
            return param(format!("{} fields need {} couplings, got {}", delta.len(), delta.len().saturating_sub(1), lambda.len()));
        }
        if delta.iter().any(|&v| !(v > 0.0 && v.is_finite())) || lambda.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
            return param("fields must be positive and couplings non-negative, all finite");
        }
        Ok(Environment { x_min, delta, lambda, spec: None, seed: None })
    }

    pub fn constant(x_min: i64, x_max: i64, lambda: f64, delta: f64) -> Result<Self> {
        if x_max < x_min {
            return param("empty site range");
        }
        let n = (x_max - x_min + 1) as usize;
        Environment::new(x_min, vec![delta; n], vec![lambda; n - 1])
    }

    pub fn x_min(&self) -> i64 {
        self.x_min
    }
    pub fn x_max(&self) -> i64 {
        self.x_min + self.delta.len() as i64 - 1
    }
    pub fn spec(&self) -> Option<&EnvironmentSpec> {
        self.spec.as_ref()
    }
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }
    pub fn deltas(&self) -> &[f64] {
        &self.delta
    }
    pub fn lambdas(&self) -> &[f64] {
        &self.lambda
    }

    pub fn covers(&self, lo: i64, hi: i64) -> bool {
        lo >= self.x_min && hi <= self.x_max()
    }

    pub(crate) fn require(&self, lo: i64, hi: i64) -> Result<()> {
        if self.covers(lo, hi) {
            Ok(())
        } else {
            Err(Error::Domain(format!("environment covers [{}, {}], need [{lo}, {hi}]", self.x_min, self.x_max())))
        }
    }

    /// `δ_x`, if `x` is in range.
    pub fn field(&self, x: i64) -> Option<f64> {
        usize::try_from(x - self.x_min).ok().and_then(|i| self.delta.get(i).copied())
    }

    /// `λ_{x,x+1}`, if both ends are in range.
    pub fn coupling(&self, x: i64) -> Option<f64> {
        usize::try_from(x - self.x_min).ok().and_then(|i| self.lambda.get(i).copied())
    }

    /// True if `λ_{x,y}/δ_x ≤ theta` for every site and both neighbours.
    pub fn satisfies_ratio_bound(&self, theta: f64) -> bool {
        (self.x_min..=self.x_max()).all(|x| {
            let d = self.delta[(x - self.x_min) as usize];
            [self.coupling(x - 1), self.coupling(x)].into_iter().flatten().all(|l| l / d <= theta)
        })
    }

    /// The same environment with every coupling multiplied by `factor`.
    pub fn scaled_couplings(&self, factor: f64) -> Result<Self> {
        let mut e = Environment::new(self.x_min, self.delta.clone(), self.lambda.iter().map(|l| l * factor).collect())?;
        e.spec = None;
        Ok(e)
    }

    pub fn to_csv(&self) -> Result<String> {
        let rows: Vec<EnvironmentRow> = (0..self.delta.len())
            .map(|i| EnvironmentRow { x: self.x_min + i as i64, delta_x: self.delta[i], lambda_x_xplus1: self.lambda.get(i).copied() })
            .collect();
        let header = serde_json::json!({ "kind": "environment", "spec": self.spec, "seed": self.seed });
        write_csv(&header, &rows)
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let (header, rows) = read_csv::<EnvironmentRow>(text)?;
        let Some(first) = rows.first() else {
            return param("environment file has no rows");
        };
        for (i, r) in rows.iter().enumerate() {
            if r.x != first.x + i as i64 {
                return Err(Error::Parse { line: i + 2, msg: "sites must be consecutive".into() });
            }
            if r.lambda_x_xplus1.is_some() != (i + 1 < rows.len()) {
                return Err(Error::Parse { line: i + 2, msg: "every site but the last needs a coupling".into() });
            }
        }
        let delta = rows.iter().map(|r| r.delta_x).collect();
        let lambda = rows.iter().filter_map(|r| r.lambda_x_xplus1).collect();
        let mut env = Environment::new(first.x, delta, lambda)?;
        if let Some(h) = header {
            env.spec = h.get("spec").cloned().and_then(|v| serde_json::from_value(v).ok());
            env.seed = h.get("seed").and_then(|v| v.as_u64());
        }
        Ok(env)
    }
}

#[derive(Serialize, Deserialize)]
struct EnvironmentRow {
    x: i64,
    delta_x: f64,
    lambda_x_xplus1: Option<f64>,
}

impl SiteRates for Environment {
    fn death(&self, x: i64) -> f64 {
        self.delta[(x - self.x_min) as usize]
    }
    fn bridge(&self, x: i64) -> f64 {
        self.lambda[(x - self.x_min) as usize]
    }
}

/// Independent draws per site. Each `δ_x` and each `λ_{x,x+1}` comes from its
/// own stream keyed by `x`, so a wider range extends a narrower one.
pub fn sample_environment(spec: &EnvironmentSpec, range: (i64, i64), seed: u64) -> Result<Environment> {
    spec.lambda.validate()?;
    spec.delta.validate()?;
    let (lo, hi) = range;
    if hi < lo {
        return param("empty site range");
    }
    let delta = (lo..=hi).map(|x| spec.delta.sample(&mut Rng::stream(seed, &[TAG_DELTA, x as u64]))).collect();
    let lambda = (lo..hi).map(|x| spec.lambda.sample(&mut Rng::stream(seed, &[TAG_LAMBDA, x as u64]))).collect();
    let mut env = Environment::new(lo, delta, lambda)?;
    env.spec = Some(spec.clone());
    env.seed = Some(seed);
    Ok(env)
}
