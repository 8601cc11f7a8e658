use crate::error::{Error, Result};
use crate::percolation::{ClusterLabelling, Configuration, Rates};
use crate::rng::Rng;

/// One spin per death-free interval, constant on clusters.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SpinConfiguration {
    spins: Vec<i8>,
    cluster_spins: Vec<i8>,
    slit_plus: Vec<i8>,
    slit_minus: Vec<i8>,
}

impl SpinConfiguration {
    /// Spins from per-cluster values.
    pub fn from_cluster_spins(lab: &ClusterLabelling, cluster_spins: Vec<i8>) -> Result<Self> {
        if cluster_spins.len() != lab.num_clusters() || cluster_spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Parameter("need one ±1 spin per cluster".into()));
        }
        let mut s = SpinConfiguration { cluster_spins, ..Default::default() };
        s.fill(lab);
        Ok(s)
    }

    fn fill(&mut self, lab: &ClusterLabelling) {
        self.spins.clear();
        self.spins.extend((0..lab.num_intervals()).map(|i| self.cluster_spins[lab.cluster_of(i) as usize]));
        self.slit_plus.clear();
        self.slit_minus.clear();
        if let Some(l) = lab.boxed().slit_len() {
            for x in 0..=l as i64 {
                self.slit_plus.push(self.spins[lab.slit_plus(x)]);
                self.slit_minus.push(self.spins[lab.slit_minus(x)]);
            }
        }
    }

    pub fn interval_spin(&self, interval: usize) -> i8 {
        self.spins[interval]
    }

    pub fn cluster_spin(&self, cluster: u32) -> i8 {
        self.cluster_spins[cluster as usize]
    }

    pub fn interval_spins(&self) -> &[i8] {
        &self.spins
    }

    /// Spins at `x+` for `x = 0..=L`.
    pub fn slit_plus(&self) -> &[i8] {
        &self.slit_plus
    }

    /// Spins at `x-` for `x = 0..=L`.
    pub fn slit_minus(&self) -> &[i8] {
        &self.slit_minus
    }

    /// True if every cluster of `lab` carries a single spin.
    pub fn is_constant_on_clusters(&self, lab: &ClusterLabelling) -> bool {
        let mut seen = vec![0i8; lab.num_clusters()];
        (0..lab.num_intervals()).all(|i| {
            let c = lab.cluster_of(i) as usize;
            let s = self.spins[i];
            if seen[c] == 0 {
                seen[c] = s;
            }
            seen[c] == s
        })
    }
}

/// Independent uniform spins per cluster; clusters carrying a boundary label
/// take the label. The labelling's rule decides which clusters are labelled.
pub fn assign_spins(lab: &ClusterLabelling, seed: u64) -> Result<SpinConfiguration> {
    let mut s = SpinConfiguration::default();
    assign_spins_with(lab, &mut Rng::new(seed), &mut s)?;
    Ok(s)
}

pub fn assign_spins_with(lab: &ClusterLabelling, rng: &mut Rng, out: &mut SpinConfiguration) -> Result<()> {
    if let Some(msg) = lab.conflict() {
        return Err(Error::Conditioning(msg.to_string()));
    }
    out.cluster_spins.clear();
    out.cluster_spins.extend((0..lab.num_clusters() as u32).map(|c| {
        let s = rng.spin();
        lab.forced_spin(c).unwrap_or(s)
    }));
    out.fill(lab);
    Ok(())
}

/// Draws ω given σ: deaths at every spin flip plus fresh Poisson deaths, and
/// Poisson bridges kept only where the two neighbouring spins agree.
pub fn resample_given_spins(lab: &ClusterLabelling, spins: &SpinConfiguration, rates: &Rates, seed: u64) -> Configuration {
    let mut out = Configuration::empty(lab.boxed());
    resample_into(lab, spins, rates, &mut Rng::new(seed), &mut out, &mut Vec::new());
    out
}

pub(crate) fn resample_into(
    lab: &ClusterLabelling,
    spins: &SpinConfiguration,
    rates: &Rates,
    rng: &mut Rng,
    out: &mut Configuration,
    scratch: &mut Vec<f64>,
) {
    let bx = *lab.boxed();
    let (t0, t1) = (bx.t_min(), bx.t_max());
    let (deaths, bridges) = out.parts_mut();
    deaths.resize_with(bx.num_lines(), Vec::new);
    bridges.resize_with(bx.num_pairs(), Vec::new);
    for (line, d) in deaths.iter_mut().enumerate() {
        d.clear();
        let cuts = lab.cuts(line);
        scratch.clear();
        rng.poisson_points(t0, t1, rates.death[line], scratch);
        let slit = bx.is_slit_line(bx.site(line));
        let mut fresh = scratch.iter().copied().filter(|&t| !(slit && t == 0.0)).peekable();
        for (j, &c) in cuts.iter().enumerate() {
            if lab.is_slit_cut(line, j) {
                continue;
            }
            if spins.interval_spin(lab.below_cut(line, j)) == spins.interval_spin(lab.above_cut(line, j)) {
                continue;
            }
            while let Some(&f) = fresh.peek() {
                if f < c {
                    d.push(f);
                    fresh.next();
                } else {
                    if f == c {
                        fresh.next();
                    }
                    break;
                }
            }
            d.push(c);
        }
        d.extend(fresh);
    }
    for (pair, b) in bridges.iter_mut().enumerate() {
        b.clear();
        scratch.clear();
        rng.poisson_points(t0, t1, rates.bridge[pair], scratch);
        let slit = bx.is_slit_line(bx.site(pair)) || bx.is_slit_line(bx.site(pair + 1));
        for &t in scratch.iter() {
            if slit && t == 0.0 {
                continue;
            }
            let a = spins.interval_spin(lab.interval_on_line(pair, t));
            let c = spins.interval_spin(lab.interval_on_line(pair + 1, t));
            if a != c {
                continue;
            }
            let hit = |v: &Vec<f64>| v.binary_search_by(|s| s.total_cmp(&t)).is_ok();
            if hit(&deaths[pair]) || hit(&deaths[pair + 1]) {
                continue;
            }
            b.push(t);
        }
    }
}
