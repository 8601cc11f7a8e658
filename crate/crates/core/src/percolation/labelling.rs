use super::config::Configuration;
use crate::dsu::Dsu;
use crate::error::{Error, Result};
use crate::geometry::{BoxPoint, Region, RegionPart, SlitSide, SpaceTimeBox};
use serde::{Deserialize, Serialize};

/// Events outside the box. The outer box must contain the inner one, share
/// its time extent, periodicity and slit, and carry no events on inner lines
/// or on pairs of inner lines.
#[derive(Clone, Debug, PartialEq)]
pub struct ExternalBoundary {
    pub outer: SpaceTimeBox,
    pub config: Configuration,
}

/// Fixed spins on parts of the box. Clusters touching a labelled part take
/// its spin; no cluster may touch two different labels.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SpinLabels {
    pub labels: Vec<(Region, i8)>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum BoundaryRule {
    Free,
    /// Glue each line's top end to its bottom end.
    Periodic,
    /// Glue all top and bottom ends together (on a slit box: all slit ends).
    Wired,
    /// Slit box with the outside glued periodically and the slit left free.
    PartiallyPeriodic,
    /// As `PartiallyPeriodic` with all slit ends wired together.
    PeriodicWired,
    External(ExternalBoundary),
    SpinBoundary(SpinLabels),
    /// Wire every cluster touching the region into one.
    WiredAt(Region),
}

impl BoundaryRule {
    pub fn name(&self) -> &'static str {
        match self {
            BoundaryRule::Free => "free",
            BoundaryRule::Periodic => "periodic",
            BoundaryRule::Wired => "wired",
            BoundaryRule::PartiallyPeriodic => "partially-periodic",
            BoundaryRule::PeriodicWired => "periodic-wired",
            BoundaryRule::External(_) => "external",
            BoundaryRule::SpinBoundary(_) => "spin-boundary",
            BoundaryRule::WiredAt(_) => "wired-at",
        }
    }
}

/// Time range of one death-free interval. A wrapping interval on a periodic
/// line runs from `lo` up to `t_max` and on from `t_min` to `hi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntervalSpan {
    pub site: i64,
    pub lo: f64,
    pub hi: f64,
    pub wraps: bool,
}

impl IntervalSpan {
    pub fn length(&self, bx: &SpaceTimeBox) -> f64 {
        if self.wraps {
            (bx.t_max() - self.lo) + (self.hi - bx.t_min())
        } else {
            self.hi - self.lo
        }
    }

    /// Largest |t| over the interval.
    pub fn max_abs_time(&self, bx: &SpaceTimeBox) -> f64 {
        if self.wraps {
            bx.t_max().abs().max(bx.t_min().abs())
        } else {
            self.lo.abs().max(self.hi.abs())
        }
    }
}

/// Death-free intervals of a configuration and the clusters they form under a
/// boundary rule.
#[derive(Clone, Debug)]
pub struct ClusterLabelling {
    bx: SpaceTimeBox,
    cuts: Vec<f64>,
    cut_start: Vec<usize>,
    slit_pos: Vec<usize>,
    line_start: Vec<usize>,
    free_root: Vec<u32>,
    cluster: Vec<u32>,
    k: usize,
    forced: Vec<i8>,
    conflict: Option<String>,
    dsu: Dsu,
}

const NO_SLIT: usize = usize::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClusterCounts {
    pub free: usize,
    pub periodic: usize,
    pub wired: usize,
    /// Only defined on slit boxes.
    pub partially_periodic: Option<usize>,
    pub periodic_wired: Option<usize>,
}

impl ClusterLabelling {
    pub fn build(bx: &SpaceTimeBox, cfg: &Configuration, rule: &BoundaryRule) -> Result<Self> {
        let mut l = ClusterLabelling {
            bx: *bx,
            cuts: Vec::new(),
            cut_start: Vec::new(),
            slit_pos: Vec::new(),
            line_start: Vec::new(),
            free_root: Vec::new(),
            cluster: Vec::new(),
            k: 0,
            forced: Vec::new(),
            conflict: None,
            dsu: Dsu::default(),
        };
        cfg.validate(bx)?;
        l.rebuild_unchecked(bx, cfg, rule)?;
        Ok(l)
    }

    /// Rebuilds in place, reusing buffers. The configuration must already be
    /// valid for the box.
    pub(crate) fn rebuild_unchecked(&mut self, bx: &SpaceTimeBox, cfg: &Configuration, rule: &BoundaryRule) -> Result<()> {
        if let BoundaryRule::External(ext) = rule {
            return self.rebuild_external(bx, cfg, ext);
        }
        self.decompose(bx, cfg);
        self.union_bridges(cfg);
        for i in 0..self.free_root.len() {
            self.free_root[i] = self.dsu.find(i as u32);
        }
        self.conflict = None;
        let labels = self.apply_rule_to_own_dsu(rule)?;
        self.finish(labels.as_deref());
        Ok(())
    }

    fn decompose(&mut self, bx: &SpaceTimeBox, cfg: &Configuration) {
        self.bx = *bx;
        self.cuts.clear();
        self.cut_start.clear();
        self.slit_pos.clear();
        self.line_start.clear();
        let mut n_int = 0usize;
        for i in 0..bx.num_lines() {
            self.cut_start.push(self.cuts.len());
            self.line_start.push(n_int);
            let d = cfg.deaths(i);
            let start = self.cuts.len();
            if bx.is_slit_line(bx.site(i)) {
                let p = d.partition_point(|&t| t < 0.0);
                self.cuts.extend_from_slice(&d[..p]);
                self.cuts.push(0.0);
                self.cuts.extend_from_slice(&d[p..]);
                self.slit_pos.push(p);
            } else {
                self.cuts.extend_from_slice(d);
                self.slit_pos.push(NO_SLIT);
            }
            let nc = self.cuts.len() - start;
            n_int += if bx.is_periodic() { nc.max(1) } else { nc + 1 };
        }
        self.cut_start.push(self.cuts.len());
        self.line_start.push(n_int);
        self.dsu.reset(n_int);
        self.free_root.clear();
        self.free_root.resize(n_int, 0);
    }

    fn union_bridges(&mut self, cfg: &Configuration) {
        for pair in 0..self.bx.num_pairs() {
            for &t in cfg.bridges(pair) {
                let a = self.interval_on_line(pair, t);
                let b = self.interval_on_line(pair + 1, t);
                self.dsu.union(a as u32, b as u32);
            }
        }
    }

    fn line_cuts(&self, line: usize) -> &[f64] {
        &self.cuts[self.cut_start[line]..self.cut_start[line + 1]]
    }

    fn local_index(&self, line: usize, p: usize) -> usize {
        let nc = self.cut_start[line + 1] - self.cut_start[line];
        let local = if self.bx.is_periodic() && p == nc { 0 } else { p };
        self.line_start[line] + local
    }

    /// Interval containing time `t` on a line (a cut time counts as the
    /// interval below it).
    pub(crate) fn interval_on_line(&self, line: usize, t: f64) -> usize {
        let p = self.line_cuts(line).partition_point(|&c| c < t);
        self.local_index(line, p)
    }

    /// Interval containing time `t` on the line with offset `line`.
    pub fn interval_on(&self, line: usize, t: f64) -> usize {
        self.interval_on_line(line, t)
    }

    fn slit_end(&self, line: usize, side: SlitSide) -> usize {
        let s = self.slit_pos[line];
        debug_assert_ne!(s, NO_SLIT);
        match side {
            SlitSide::Plus => self.local_index(line, s + 1),
            SlitSide::Minus => self.local_index(line, s),
        }
    }

    /// Interval just above the slit at site `x` (the `x+` end).
    pub fn slit_plus(&self, x: i64) -> usize {
        self.slit_end(self.bx.line(x).expect("slit site"), SlitSide::Plus)
    }

    /// Interval just below the slit at site `x` (the `x-` end).
    pub fn slit_minus(&self, x: i64) -> usize {
        self.slit_end(self.bx.line(x).expect("slit site"), SlitSide::Minus)
    }

    pub fn interval_at(&self, p: &BoxPoint) -> Result<usize> {
        self.bx.check_point(p)?;
        let line = self.bx.line(p.site).unwrap();
        if self.slit_pos[line] != NO_SLIT && p.time == 0.0 {
            return Ok(self.slit_end(line, p.side.unwrap()));
        }
        Ok(self.interval_on_line(line, p.time))
    }

    fn bottom(&self, line: usize) -> usize {
        self.line_start[line]
    }

    fn top(&self, line: usize) -> usize {
        self.line_start[line + 1] - 1
    }

    pub fn boxed(&self) -> &SpaceTimeBox {
        &self.bx
    }

    pub fn num_intervals(&self) -> usize {
        self.cluster.len()
    }

    /// Intervals of the line with offset `line`, as a range of indices.
    pub fn line_intervals(&self, line: usize) -> std::ops::Range<usize> {
        self.line_start[line]..self.line_start[line + 1]
    }

    pub fn line_of(&self, interval: usize) -> usize {
        self.line_start.partition_point(|&s| s <= interval) - 1
    }

    pub fn span(&self, interval: usize) -> IntervalSpan {
        let line = self.line_of(interval);
        let local = interval - self.line_start[line];
        let cuts = self.line_cuts(line);
        let site = self.bx.site(line);
        let (t0, t1) = (self.bx.t_min(), self.bx.t_max());
        if cuts.is_empty() {
            return IntervalSpan { site, lo: t0, hi: t1, wraps: false };
        }
        if self.bx.is_periodic() {
            if local == 0 {
                IntervalSpan { site, lo: cuts[cuts.len() - 1], hi: cuts[0], wraps: true }
            } else {
                IntervalSpan { site, lo: cuts[local - 1], hi: cuts[local], wraps: false }
            }
        } else {
            let lo = if local == 0 { t0 } else { cuts[local - 1] };
            let hi = if local == cuts.len() { t1 } else { cuts[local] };
            IntervalSpan { site, lo, hi, wraps: false }
        }
    }

    /// Cut points on a line: its deaths plus the slit at 0.
    pub fn cuts(&self, line: usize) -> &[f64] {
        self.line_cuts(line)
    }

    /// True if the cut at position `j` of the line is the slit rather than a death.
    pub fn is_slit_cut(&self, line: usize, j: usize) -> bool {
        self.slit_pos[line] == j
    }

    /// Interval just below cut `j` on the line.
    pub fn below_cut(&self, line: usize, j: usize) -> usize {
        self.local_index(line, j)
    }

    /// Interval just above cut `j` on the line.
    pub fn above_cut(&self, line: usize, j: usize) -> usize {
        self.local_index(line, j + 1)
    }

    pub fn num_clusters(&self) -> usize {
        self.k
    }

    /// Dense cluster id in `0..num_clusters()`.
    pub fn cluster_of(&self, interval: usize) -> u32 {
        self.cluster[interval]
    }

    /// Spin imposed on a cluster by a spin-boundary rule.
    pub fn forced_spin(&self, cluster: u32) -> Option<i8> {
        match self.forced.get(cluster as usize) {
            Some(&s) if s != 0 => Some(s),
            _ => None,
        }
    }

    /// Set when a spin-boundary rule's labels are joined by a path.
    pub fn conflict(&self) -> Option<&str> {
        self.conflict.as_deref()
    }

    pub fn connected(&self, p: &BoxPoint, q: &BoxPoint) -> Result<bool> {
        Ok(self.cluster[self.interval_at(p)?] == self.cluster[self.interval_at(q)?])
    }

    pub fn intervals_in(&self, region: &Region) -> Result<Vec<usize>> {
        region.check(&self.bx)?;
        let mut out = Vec::new();
        for part in &region.parts {
            match part {
                RegionPart::Point(p) => out.push(self.interval_at(p)?),
                RegionPart::Line(x) => out.extend(self.line_intervals(self.bx.line(*x).unwrap())),
                RegionPart::Segment { site, t0, t1 } => {
                    let line = self.bx.line(*site).unwrap();
                    let cuts = self.line_cuts(line);
                    let p0 = cuts.partition_point(|&c| c < *t0);
                    let p1 = cuts.partition_point(|&c| c < *t1);
                    out.extend((p0..=p1).map(|p| self.local_index(line, p)));
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    pub fn clusters_in(&self, region: &Region) -> Result<Vec<u32>> {
        let mut c: Vec<u32> = self.intervals_in(region)?.into_iter().map(|i| self.cluster[i]).collect();
        c.sort_unstable();
        c.dedup();
        Ok(c)
    }

    pub fn regions_connected(&self, a: &Region, b: &Region) -> Result<bool> {
        let ca = self.clusters_in(a)?;
        let cb = self.clusters_in(b)?;
        Ok(ca.iter().any(|c| cb.binary_search(c).is_ok()))
    }

    /// Applies the rule's identifications to `self.dsu`; returns per-interval
    /// labels for spin-boundary rules.
    fn apply_rule_to_own_dsu(&mut self, rule: &BoundaryRule) -> Result<Option<Vec<(usize, i8)>>> {
        let mut dsu = std::mem::take(&mut self.dsu);
        let r = self.identify(&mut dsu, rule);
        self.dsu = dsu;
        r
    }

    fn identify(&self, dsu: &mut Dsu, rule: &BoundaryRule) -> Result<Option<Vec<(usize, i8)>>> {
        let bx = self.bx;
        let n = bx.num_lines();
        let need_slit = || {
            bx.slit_len()
                .map(|l| l as i64)
                .ok_or_else(|| Error::Domain(format!("{} rule needs a slit box", rule.name())))
        };
        match rule {
            BoundaryRule::Free => {}
            BoundaryRule::Periodic => {
                if !bx.is_periodic() {
                    for line in 0..n {
                        dsu.union(self.bottom(line) as u32, self.top(line) as u32);
                    }
                }
            }
            BoundaryRule::Wired => {
                if !bx.is_periodic() {
                    let anchor = self.bottom(0) as u32;
                    for line in 0..n {
                        dsu.union(anchor, self.bottom(line) as u32);
                        dsu.union(anchor, self.top(line) as u32);
                    }
                } else if let Some(l) = bx.slit_len() {
                    self.wire_slit(dsu, l as i64);
                }
            }
            BoundaryRule::PartiallyPeriodic => {
                need_slit()?;
            }
            BoundaryRule::PeriodicWired => {
                let l = need_slit()?;
                self.wire_slit(dsu, l);
            }
            BoundaryRule::WiredAt(region) => {
                let iv = self.intervals_in(region)?;
                if let Some((&first, rest)) = iv.split_first() {
                    for &i in rest {
                        dsu.union(first as u32, i as u32);
                    }
                }
            }
            BoundaryRule::SpinBoundary(labels) => {
                let mut out = Vec::new();
                let mut anchors: [Option<u32>; 2] = [None, None];
                for (region, spin) in &labels.labels {
                    if *spin != 1 && *spin != -1 {
                        return Err(Error::Parameter(format!("spin label must be ±1, got {spin}")));
                    }
                    let slot = usize::from(*spin < 0);
                    for i in self.intervals_in(region)? {
                        match anchors[slot] {
                            None => anchors[slot] = Some(i as u32),
                            Some(a) => {
                                dsu.union(a, i as u32);
                            }
                        }
                        out.push((i, *spin));
                    }
                }
                return Ok(Some(out));
            }
            BoundaryRule::External(_) => unreachable!("handled by rebuild_external"),
        }
        Ok(None)
    }

    fn wire_slit(&self, dsu: &mut Dsu, l: i64) {
        let anchor = self.slit_plus(0) as u32;
        for x in 0..=l {
            dsu.union(anchor, self.slit_plus(x) as u32);
            dsu.union(anchor, self.slit_minus(x) as u32);
        }
    }

    fn finish(&mut self, labels: Option<&[(usize, i8)]>) {
        let n = self.free_root.len();
        self.cluster.clear();
        self.cluster.resize(n, u32::MAX);
        let mut id_of_root = vec![u32::MAX; n];
        let mut k = 0u32;
        for i in 0..n {
            let r = self.dsu.find(i as u32) as usize;
            if id_of_root[r] == u32::MAX {
                id_of_root[r] = k;
                k += 1;
            }
            self.cluster[i] = id_of_root[r];
        }
        self.k = k as usize;
        self.forced.clear();
        if let Some(labels) = labels {
            self.forced.resize(self.k, 0);
            for &(i, s) in labels {
                let c = self.cluster[i] as usize;
                if self.forced[c] == 0 {
                    self.forced[c] = s;
                } else if self.forced[c] != s && self.conflict.is_none() {
                    let sp = self.span(i);
                    self.conflict = Some(format!(
                        "labels +1 and -1 joined by a cluster through site {} near t={}",
                        sp.site, sp.lo
                    ));
                }
            }
        }
    }

    fn rebuild_external(&mut self, bx: &SpaceTimeBox, cfg: &Configuration, ext: &ExternalBoundary) -> Result<()> {
        let outer = &ext.outer;
        let same_time = outer.t_min() == bx.t_min()
            && outer.t_max() == bx.t_max()
            && outer.is_periodic() == bx.is_periodic()
            && outer.slit_len() == bx.slit_len();
        if !same_time || outer.x_min() > bx.x_min() || outer.x_max() < bx.x_max() {
            return Err(Error::Domain("external boundary box must extend the box in space only".into()));
        }
        ext.config.validate(outer)?;
        let off = (bx.x_min() - outer.x_min()) as usize;
        let (mut deaths, mut bridges): (Vec<Vec<f64>>, Vec<Vec<f64>>) = (
            (0..outer.num_lines()).map(|i| ext.config.deaths(i).to_vec()).collect(),
            (0..outer.num_pairs()).map(|i| ext.config.bridges(i).to_vec()).collect(),
        );
        for i in 0..bx.num_lines() {
            if !deaths[off + i].is_empty() {
                return Err(Error::Validity("external configuration has deaths inside the box".into()));
            }
            deaths[off + i] = cfg.deaths(i).to_vec();
        }
        for i in 0..bx.num_pairs() {
            if !bridges[off + i].is_empty() {
                return Err(Error::Validity("external configuration has bridges inside the box".into()));
            }
            bridges[off + i] = cfg.bridges(i).to_vec();
        }
        let composite = Configuration::from_events(outer, deaths, bridges)?;
        let full = ClusterLabelling::build(outer, &composite, &BoundaryRule::Free)?;
        self.decompose(bx, cfg);
        self.union_bridges(cfg);
        for i in 0..self.free_root.len() {
            self.free_root[i] = self.dsu.find(i as u32);
        }
        // Intervals on inner lines coincide with the composite's intervals.
        let base = full.line_start[off];
        let mut first_inner = vec![u32::MAX; full.k];
        for i in 0..self.free_root.len() {
            let c = full.cluster[base + i] as usize;
            if first_inner[c] == u32::MAX {
                first_inner[c] = i as u32;
            } else {
                self.dsu.union(first_inner[c], i as u32);
            }
        }
        self.conflict = None;
        self.finish(None);
        Ok(())
    }

    /// Number of clusters under one of the five standard rules, from the
    /// bridge-only decomposition already computed.
    pub fn count_under(&self, rule: &BoundaryRule) -> Result<usize> {
        if matches!(rule, BoundaryRule::External(_) | BoundaryRule::SpinBoundary(_)) {
            return Err(Error::Parameter(format!("count_under does not support the {} rule", rule.name())));
        }
        let n = self.free_root.len();
        let mut dsu = Dsu::new(n);
        for (i, &r) in self.free_root.iter().enumerate() {
            dsu.union(i as u32, r);
        }
        self.identify(&mut dsu, rule)?;
        Ok((0..n).filter(|&i| dsu.find(i as u32) == i as u32).count())
    }
}

/// All five cluster counts from one interval decomposition.
pub fn cluster_counts(bx: &SpaceTimeBox, cfg: &Configuration) -> Result<ClusterCounts> {
    let l = ClusterLabelling::build(bx, cfg, &BoundaryRule::Free)?;
    let slit = bx.slit_len().is_some();
    Ok(ClusterCounts {
        free: l.num_clusters(),
        periodic: l.count_under(&BoundaryRule::Periodic)?,
        wired: l.count_under(&BoundaryRule::Wired)?,
        partially_periodic: if slit { Some(l.count_under(&BoundaryRule::PartiallyPeriodic)?) } else { None },
        periodic_wired: if slit { Some(l.count_under(&BoundaryRule::PeriodicWired)?) } else { None },
    })
}

/// Cluster labelling under a rule; see [`ClusterLabelling::build`].
pub fn build_clusters(bx: &SpaceTimeBox, cfg: &Configuration, rule: &BoundaryRule) -> Result<ClusterLabelling> {
    ClusterLabelling::build(bx, cfg, rule)
}

pub fn connected(l: &ClusterLabelling, p: &BoxPoint, q: &BoxPoint) -> Result<bool> {
    l.connected(p, q)
}
