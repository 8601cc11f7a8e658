use clap::Args;
use ising_rc::disorder::{Distribution, EnvironmentSpec};
use ising_rc::estimators::TallyMode;
use ising_rc::mixing::{SeparatorGeometry, SlitEvent};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

/// A failure with its exit code: 2 config, 3 numerical contract, 4 data.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError { code: 2, kind: "config", message: message.into() }
    }
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { code: 2, kind: "usage", message: message.into() }
    }
    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self.kind, "code": self.code, "message": self.message }).to_string()
    }
}

impl From<ising_rc::Error> for CliError {
    fn from(e: ising_rc::Error) -> Self {
        use ising_rc::Error::*;
        let (code, kind) = match &e {
            Parameter(_) | Domain(_) | Validity(_) | Size(_) | Parse { .. } | Io(_) => (2, "config"),
            Contract(_) | Conditioning(_) | NonConvergence(_) => (3, "contract"),
            InsufficientData(_) => (4, "insufficient-data"),
        };
        CliError { code, kind, message: e.to_string() }
    }
}

#[derive(Args, Clone, Debug, Default)]
pub struct Common {
    /// JSON config file; flags given on the command line override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (default: $ISING_RC_OUT, then the working directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Config file, then flags, validated against the command's schema.
pub fn load<C: DeserializeOwned, F: Serialize>(common: &Common, flags: &F) -> Result<C, CliError> {
    let mut map = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
            match serde_json::from_str(&text) {
                Ok(serde_json::Value::Object(m)) => m,
                Ok(_) => return Err(CliError::config("config must be a JSON object")),
                Err(e) => return Err(CliError::config(format!("{}: {e}", path.display()))),
            }
        }
        None => serde_json::Map::new(),
    };
    if let serde_json::Value::Object(f) = serde_json::to_value(flags).expect("flags serialize") {
        map.extend(f.into_iter().filter(|(_, v)| !v.is_null()));
    }
    serde_json::from_value(serde_json::Value::Object(map)).map_err(|e| CliError::config(e.to_string()))
}

// Every command has a flag struct (all optional) and a config struct whose
// field names match; the config carries the defaults.

#[derive(Args, Serialize)]
pub struct OracleArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    /// Chain length; must equal 2m + L + 1 when given.
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub theta: Option<f64>,
    /// λ directly; θ·δ when absent.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub l: Option<u32>,
    #[arg(long)]
    pub m: Option<u32>,
    /// Thermal state at this β; the ground state when absent.
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    pub n: Option<u32>,
    pub theta: f64,
    pub lambda: Option<f64>,
    pub delta: f64,
    #[serde(rename = "L")]
    pub l: u32,
    pub m: u32,
    pub beta: Option<f64>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { n: None, theta: 0.5, lambda: None, delta: 1.0, l: 1, m: 1, beta: None }
    }
}

#[derive(Args, Serialize)]
pub struct RdmArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub l: Option<u32>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    /// λ directly; θ·δ when absent.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Retained sweeps per chain.
    #[arg(long)]
    pub sweeps: Option<u64>,
    /// Discarded sweeps per chain.
    #[arg(long)]
    pub burn_in: Option<u64>,
    #[arg(long)]
    pub chains: Option<usize>,
    /// Batches per chain for error estimates.
    #[arg(long)]
    pub batches: Option<usize>,
    /// `spins` or `cluster-averaged`.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RdmConfig {
    pub m: u32,
    #[serde(rename = "L")]
    pub l: u32,
    pub beta: f64,
    pub theta: f64,
    pub lambda: Option<f64>,
    pub delta: f64,
    pub sweeps: u64,
    pub burn_in: Option<u64>,
    pub chains: usize,
    pub batches: usize,
    pub mode: TallyMode,
    pub seed: u64,
    pub workers: Option<usize>,
}

impl Default for RdmConfig {
    fn default() -> Self {
        RdmConfig {
            m: 1,
            l: 0,
            beta: 6.0,
            theta: 0.5,
            lambda: None,
            delta: 1.0,
            sweeps: 10_000,
            burn_in: None,
            chains: 4,
            batches: 20,
            mode: TallyMode::Spins,
            seed: 0,
            workers: None,
        }
    }
}

#[derive(Args, Serialize)]
pub struct NormDecayArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub l: Option<u32>,
    /// Margins, comma-separated; the largest is the reference.
    #[arg(long, value_delimiter = ',')]
    pub m_list: Option<Vec<u32>>,
    /// Fixed β; the default rule otherwise.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Retained sweeps per chain.
    #[arg(long)]
    pub sweeps: Option<u64>,
    /// Discarded sweeps per chain.
    #[arg(long)]
    pub burn_in: Option<u64>,
    #[arg(long)]
    pub chains: Option<usize>,
    /// Batches per chain for error estimates.
    #[arg(long)]
    pub batches: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormDecayCfg {
    pub theta: f64,
    #[serde(rename = "L")]
    pub l: u32,
    pub m_list: Vec<u32>,
    pub beta: Option<f64>,
    pub sweeps: u64,
    pub burn_in: Option<u64>,
    pub chains: usize,
    pub batches: usize,
    pub seed: u64,
    pub workers: Option<usize>,
}

impl Default for NormDecayCfg {
    fn default() -> Self {
        NormDecayCfg {
            theta: 0.25,
            l: 1,
            m_list: vec![1, 2, 3, 4, 5],
            beta: None,
            sweeps: 20_000,
            burn_in: None,
            chains: 4,
            batches: 20,
            seed: 0,
            workers: None,
        }
    }
}

#[derive(Args, Serialize)]
pub struct EntropyScanArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    #[arg(long)]
    pub theta: Option<f64>,
    /// Block lengths, comma-separated.
    #[arg(long = "L-list", value_delimiter = ',')]
    #[serde(rename = "L_list")]
    pub l_list: Option<Vec<u32>>,
    /// Fixed margin; m = L when absent.
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Exact ground-state entropies.
    #[arg(long)]
    pub exact: Option<bool>,
    /// Monte Carlo entropies at finite β (L ≤ 4).
    #[arg(long)]
    pub mc: Option<bool>,
    /// Retained sweeps per chain.
    #[arg(long)]
    pub sweeps: Option<u64>,
    /// Discarded sweeps per chain.
    #[arg(long)]
    pub burn_in: Option<u64>,
    #[arg(long)]
    pub chains: Option<usize>,
    /// Batches per chain for error estimates.
    #[arg(long)]
    pub batches: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EntropyScanCfg {
    pub theta: f64,
    #[serde(rename = "L_list")]
    pub l_list: Vec<u32>,
    pub m: Option<u32>,
    pub beta: Option<f64>,
    pub exact: bool,
    pub mc: bool,
    pub sweeps: u64,
    pub burn_in: Option<u64>,
    pub chains: usize,
    pub batches: usize,
    pub seed: u64,
    pub workers: Option<usize>,
}

impl Default for EntropyScanCfg {
    fn default() -> Self {
        EntropyScanCfg {
            theta: 0.25,
            l_list: vec![1, 2, 3, 4, 5],
            m: None,
            beta: None,
            exact: true,
            mc: false,
            sweeps: 10_000,
            burn_in: None,
            chains: 4,
            batches: 20,
            seed: 0,
            workers: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MixingCheck {
    Factorization,
    Boundary,
    T,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetsChoice {
    Slit,
    Boundary,
}

#[derive(Args, Serialize)]
pub struct MixingArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    /// `factorization`, `boundary` or `t`.
    #[arg(long)]
    pub check: Option<String>,
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub l: Option<u32>,
    /// Slit margin; ⌈ln L⌉ when absent.
    #[arg(long = "K")]
    #[serde(rename = "K")]
    pub k: Option<u32>,
    /// β; 4(m+L+1) when absent.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    /// λ directly; θ·δ when absent.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Retained sweeps per chain.
    #[arg(long)]
    pub sweeps: Option<u64>,
    /// Discarded sweeps per chain.
    #[arg(long)]
    pub burn_in: Option<u64>,
    #[arg(long)]
    pub chains: Option<usize>,
    /// Batches per chain for error estimates.
    #[arg(long)]
    pub batches: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MixingCfg {
    pub check: MixingCheck,
    pub m: u32,
    #[serde(rename = "L")]
    pub l: u32,
    #[serde(rename = "K")]
    pub k: Option<u32>,
    pub beta: Option<f64>,
    pub theta: f64,
    pub lambda: Option<f64>,
    pub delta: f64,
    pub sweeps: u64,
    pub burn_in: Option<u64>,
    pub chains: usize,
    pub batches: usize,
    pub seed: u64,
    pub workers: Option<usize>,
    /// Event for the boundary check.
    pub event: SlitEvent,
    /// Sets and separator for the t check.
    pub sets: SetsChoice,
    pub separator: SeparatorGeometry,
}

impl Default for MixingCfg {
    fn default() -> Self {
        MixingCfg {
            check: MixingCheck::Factorization,
            m: 1,
            l: 2,
            k: None,
            beta: None,
            theta: 0.25,
            lambda: None,
            delta: 1.0,
            sweeps: 20_000,
            burn_in: None,
            chains: 4,
            batches: 20,
            seed: 0,
            workers: None,
            event: SlitEvent::Diagonal,
            sets: SetsChoice::Slit,
            separator: SeparatorGeometry::Equator,
        }
    }
}

#[derive(Args, Serialize)]
pub struct BranchingArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Range of m for the simulated tail slope.
    #[arg(long)]
    pub m_min: Option<u64>,
    #[arg(long)]
    pub m_max: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BranchingCfg {
    pub lambda: f64,
    pub delta: f64,
    pub trials: usize,
    pub m_min: u64,
    pub m_max: u64,
    pub seed: u64,
}

impl Default for BranchingCfg {
    fn default() -> Self {
        BranchingCfg { lambda: 1.0, delta: 8.0, trials: 100_000, m_min: 5, m_max: 25, seed: 0 }
    }
}

#[derive(Args, Serialize)]
pub struct DecayScanArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Box radii, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub m_list: Option<Vec<u32>>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecayScanCfg {
    pub lambda: f64,
    pub delta: f64,
    pub m_list: Vec<u32>,
    pub trials: u64,
    pub seed: u64,
    pub workers: Option<usize>,
}

impl Default for DecayScanCfg {
    fn default() -> Self {
        DecayScanCfg { lambda: 0.2, delta: 1.0, m_list: (2..=8).collect(), trials: 100_000, seed: 0, workers: None }
    }
}

#[derive(Args, Serialize)]
pub struct DisorderArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    /// Block lengths, comma-separated.
    #[arg(long = "L-list", value_delimiter = ',')]
    #[serde(rename = "L_list")]
    pub l_list: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',')]
    pub m_list: Option<Vec<u32>>,
    /// Number of sampled environments.
    #[arg(long)]
    pub environments: Option<usize>,
    /// Explorations per site.
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub max_distance: Option<u32>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Environment CSV to scan instead of sampling.
    #[arg(long)]
    pub environment: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DisorderCfg {
    pub spec: EnvironmentSpec,
    #[serde(rename = "L_list")]
    pub l_list: Vec<u32>,
    pub m_list: Vec<u32>,
    pub environments: usize,
    pub trials: u64,
    pub gamma: f64,
    pub max_distance: Option<u32>,
    pub rho: Option<f64>,
    pub beta: Option<f64>,
    pub environment: Option<PathBuf>,
    pub seed: u64,
    pub workers: Option<usize>,
}

impl Default for DisorderCfg {
    fn default() -> Self {
        DisorderCfg {
            spec: EnvironmentSpec { lambda: Distribution::LogNormal { mu: -3.0, sigma: 0.5 }, delta: Distribution::PointMass { value: 1.0 } },
            l_list: vec![8, 21, 55, 149],
            m_list: vec![2],
            environments: 200,
            trials: 200,
            gamma: 1.0,
            max_distance: None,
            rho: None,
            beta: None,
            environment: None,
            seed: 0,
            workers: None,
        }
    }
}

/// (λ, δ) from an explicit λ or from θ = λ/δ.
pub fn couplings(theta: f64, lambda: Option<f64>, delta: f64) -> (f64, f64) {
    (lambda.unwrap_or(theta * delta), delta)
}
