use super::spins::{assign_spins_with, resample_into, SpinConfiguration};
use crate::error::{Error, Result};
use crate::geometry::SpaceTimeBox;
use crate::percolation::{box_header, parse_body, sample_with_rates, BoundaryRule, ClusterLabelling, Configuration, Rates};
use crate::rng::Rng;

const TAG_CHAIN: u64 = 0x5157;
const TAG_INIT: u64 = 0x1417;
const MAX_INIT_REJECTIONS: u64 = 1000;

/// One Markov chain of the coupled bond-spin alternation; its stationary
/// bond marginal is the q = 2 random-cluster measure under the chain's rule.
#[derive(Clone, Debug)]
pub struct ChainState {
    bx: SpaceTimeBox,
    rates: Rates,
    rule: BoundaryRule,
    seed: u64,
    config: Configuration,
    labelling: ClusterLabelling,
    spins: SpinConfiguration,
    sweeps: u64,
    rng: Rng,
    init_rejections: u64,
    next: Configuration,
    scratch: Vec<f64>,
}

impl ChainState {
    /// Starts from a percolation sample, redrawn until it satisfies any spin
    /// labels (falling back to a bridge-free configuration).
    pub fn new(bx: &SpaceTimeBox, rates: Rates, rule: BoundaryRule, seed: u64) -> Result<Self> {
        let rates = rates.checked(bx)?;
        let mut rejections = 0u64;
        let (config, labelling) = loop {
            let cfg = if rejections < MAX_INIT_REJECTIONS {
                sample_with_rates(bx, &rates, Rng::stream(seed, &[TAG_INIT, rejections]).next_u64())?
            } else {
                let no_bridges = Rates { death: rates.death.clone(), bridge: vec![0.0; rates.bridge.len()] };
                sample_with_rates(bx, &no_bridges, Rng::stream(seed, &[TAG_INIT, rejections]).next_u64())?
            };
            let lab = ClusterLabelling::build(bx, &cfg, &rule)?;
            match lab.conflict() {
                None => break (cfg, lab),
                Some(msg) if rejections > MAX_INIT_REJECTIONS + 100 => {
                    return Err(Error::Conditioning(format!("no admissible initial configuration: {msg}")))
                }
                Some(_) => rejections += 1,
            }
        };
        let mut rng = Rng::stream(seed, &[TAG_CHAIN]);
        let mut spins = SpinConfiguration::default();
        assign_spins_with(&labelling, &mut rng, &mut spins)?;
        Ok(ChainState {
            bx: *bx,
            rates,
            rule,
            seed,
            config,
            labelling,
            spins,
            sweeps: 0,
            rng,
            init_rejections: rejections,
            next: Configuration::default(),
            scratch: Vec::new(),
        })
    }

    pub fn uniform(bx: &SpaceTimeBox, lambda: f64, delta: f64, rule: BoundaryRule, seed: u64) -> Result<Self> {
        ChainState::new(bx, Rates::uniform(bx, lambda, delta)?, rule, seed)
    }

    /// Resample bonds given spins, relabel, then resample spins given bonds.
    pub fn sweep(&mut self) -> Result<()> {
        resample_into(&self.labelling, &self.spins, &self.rates, &mut self.rng, &mut self.next, &mut self.scratch);
        std::mem::swap(&mut self.config, &mut self.next);
        self.labelling.rebuild_unchecked(&self.bx, &self.config, &self.rule)?;
        assign_spins_with(&self.labelling, &mut self.rng, &mut self.spins)?;
        self.sweeps += 1;
        Ok(())
    }

    pub fn run(&mut self, sweeps: u64) -> Result<()> {
        for _ in 0..sweeps {
            self.sweep()?;
        }
        Ok(())
    }

    pub fn boxed(&self) -> &SpaceTimeBox {
        &self.bx
    }
    pub fn config(&self) -> &Configuration {
        &self.config
    }
    pub fn labelling(&self) -> &ClusterLabelling {
        &self.labelling
    }
    pub fn spins(&self) -> &SpinConfiguration {
        &self.spins
    }
    pub fn sweeps(&self) -> u64 {
        self.sweeps
    }
    pub fn rule(&self) -> &BoundaryRule {
        &self.rule
    }
    pub fn rates(&self) -> &Rates {
        &self.rates
    }
    /// Initial configurations rejected for violating spin labels.
    pub fn init_rejections(&self) -> u64 {
        self.init_rejections
    }

    /// Configuration, spins, sweep count and generator state as text.
    pub fn checkpoint(&self) -> String {
        use std::fmt::Write;
        let mut s = String::from("rc-checkpoint v1\n");
        s.push_str(&box_header(&self.bx));
        let _ = writeln!(s, "seed {}", self.seed);
        let _ = writeln!(s, "sweeps {}", self.sweeps);
        let st = self.rng.state();
        let _ = writeln!(s, "rng {:016x} {:016x} {:016x} {:016x}", st[0], st[1], st[2], st[3]);
        let _ = writeln!(s, "rejections {}", self.init_rejections);
        self.config.write_records(&self.bx, &mut s);
        for line in 0..self.bx.num_lines() {
            let site = self.bx.site(line);
            for (j, i) in self.labelling.line_intervals(line).enumerate() {
                let _ = writeln!(s, "S {} {} {}", site, j, self.spins.interval_spin(i));
            }
        }
        s
    }

    /// Restores a chain; continuing it reproduces the original run exactly.
    pub fn from_checkpoint(text: &str, rates: Rates, rule: BoundaryRule) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, "rc-checkpoint v1")) => {}
            _ => return Err(Error::Parse { line: 1, msg: "missing rc-checkpoint header".into() }),
        }
        let (bx, seed, config, rest) = parse_body(lines)?;
        let rates = rates.checked(&bx)?;
        let labelling = ClusterLabelling::build(&bx, &config, &rule)?;
        let mut sweeps = None;
        let mut rng = None;
        let mut rejections = 0;
        let mut interval_spins = vec![0i8; labelling.num_intervals()];
        let bad = |n: usize, msg: &str| Error::Parse { line: n + 1, msg: msg.to_string() };
        for (n, l) in rest {
            let tok: Vec<&str> = l.split_whitespace().collect();
            match tok.as_slice() {
                ["sweeps", v] => sweeps = Some(v.parse().map_err(|_| bad(n, "bad sweep count"))?),
                ["rejections", v] => rejections = v.parse().map_err(|_| bad(n, "bad rejection count"))?,
                ["rng", a, b, c, d] => {
                    let w = |s: &str| u64::from_str_radix(s, 16).map_err(|_| bad(n, "bad rng word"));
                    rng = Some(Rng::from_state([w(a)?, w(b)?, w(c)?, w(d)?]));
                }
                ["S", x, j, s] => {
                    let x: i64 = x.parse().map_err(|_| bad(n, "bad site"))?;
                    let j: usize = j.parse().map_err(|_| bad(n, "bad interval"))?;
                    let s: i8 = s.parse().map_err(|_| bad(n, "bad spin"))?;
                    let line = bx.line(x).ok_or_else(|| bad(n, "site outside box"))?;
                    let range = labelling.line_intervals(line);
                    if j >= range.len() || (s != 1 && s != -1) {
                        return Err(bad(n, "spin record out of range"));
                    }
                    interval_spins[range.start + j] = s;
                }
                _ => return Err(bad(n, "unknown record")),
            }
        }
        let mut cluster_spins = vec![0i8; labelling.num_clusters()];
        for (i, &s) in interval_spins.iter().enumerate() {
            let c = labelling.cluster_of(i) as usize;
            if s == 0 || (cluster_spins[c] != 0 && cluster_spins[c] != s) {
                return Err(Error::Validity("checkpoint spins are missing or not constant on clusters".into()));
            }
            cluster_spins[c] = s;
        }
        let spins = SpinConfiguration::from_cluster_spins(&labelling, cluster_spins)?;
        Ok(ChainState {
            bx,
            rates,
            rule,
            seed,
            config,
            labelling,
            spins,
            sweeps: sweeps.ok_or_else(|| bad(0, "missing sweeps"))?,
            rng: rng.ok_or_else(|| bad(0, "missing rng"))?,
            init_rejections: rejections,
            next: Configuration::default(),
            scratch: Vec::new(),
        })
    }
}

/// One alternation of the chain.
pub fn sw_sweep(mut state: ChainState) -> Result<ChainState> {
    state.sweep()?;
    Ok(state)
}
