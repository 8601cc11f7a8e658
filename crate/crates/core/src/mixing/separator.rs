use crate::dsu::Dsu;
use crate::error::{Error, Result};
use crate::geometry::{BoxPoint, Region, RegionPart, SlitSide, SpaceTimeBox};
use serde::{Deserialize, Serialize};

/// A set of points cutting the slit box into an inside and an outside.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeparatorGeometry {
    /// The time-0 points off the slit, {(x, 0): x ∈ [−m, 0) ∪ (L, L+m]},
    /// which together with the slit complete the equator, plus the seam at
    /// ±β/2 without which the periodic box is not cut in two.
    Equator,
    /// A staircase circuit around the slit with half-width k = ⌊3m/7⌋: on
    /// line x the closed segments ±[2j, 2j+2], j = min(x+k, L+k−x). Needs
    /// m ≥ 3 so that k ≥ 1 keeps the circuit off the slit.
    Parallelogram,
    Custom(Region),
}

impl SeparatorGeometry {
    pub fn resolve(&self, bx: &SpaceTimeBox) -> Result<Region> {
        let l = bx.slit_len().ok_or_else(|| Error::Domain("separators need a slit box".into()))? as i64;
        let m = -bx.x_min();
        if bx.x_max() != l + m {
            return Err(Error::Domain("separators need a box symmetric about the slit".into()));
        }
        match self {
            SeparatorGeometry::Equator => {
                let mut r = Region::new();
                for x in (-m..0).chain(l + 1..=l + m) {
                    r = r.point(BoxPoint::new(x, 0.0));
                }
                for x in -m..=l + m {
                    r = r.point(BoxPoint::new(x, bx.t_max()));
                }
                Ok(r)
            }
            SeparatorGeometry::Parallelogram => {
                let k = 3 * m / 7;
                if k < 1 {
                    return Err(Error::Domain(format!("parallelogram needs m ≥ 3, got m = {m}")));
                }
                let apex = 2.0 * (k as f64 + (l / 2) as f64) + 2.0;
                if apex >= bx.t_max() {
                    return Err(Error::Domain(format!("parallelogram height {apex} exceeds β/2 = {}", bx.t_max())));
                }
                let mut r = Region::new();
                for x in -k..=l + k {
                    let j = (x + k).min(l + k - x) as f64;
                    r = r.segment(x, 2.0 * j, 2.0 * j + 2.0).segment(x, -2.0 * j - 2.0, -2.0 * j);
                }
                Ok(r)
            }
            SeparatorGeometry::Custom(r) => {
                r.check(bx)?;
                Ok(r.clone())
            }
        }
    }
}

/// Whether every path in the box from `a` to `b` meets `d`, with paths free
/// to use any bridge. Returns false if `a` or `b` touches `d`.
pub fn separates(bx: &SpaceTimeBox, d: &Region, a: &Region, b: &Region) -> Result<bool> {
    d.check(bx)?;
    a.check(bx)?;
    b.check(bx)?;
    let free = FreeSet::new(bx, d);
    let mut dsu = Dsu::new(free.gaps.len());
    for line in 0..bx.num_lines() {
        let r = free.line_range(line);
        if bx.is_periodic() && !free.seam_blocked[line] && r.len() > 1 {
            dsu.union(r.start as u32, (r.end - 1) as u32);
        }
        if line + 1 < bx.num_lines() {
            for i in r.clone() {
                for j in free.line_range(line + 1) {
                    let (g, h) = (free.gaps[i], free.gaps[j]);
                    if g.0.max(h.0) < g.1.min(h.1) {
                        dsu.union(i as u32, j as u32);
                    }
                }
            }
        }
    }
    let (Some(ga), Some(gb)) = (free.gaps_of(bx, a), free.gaps_of(bx, b)) else {
        return Ok(false);
    };
    let mut roots: Vec<u32> = ga.iter().map(|&g| dsu.find(g as u32)).collect();
    roots.sort_unstable();
    Ok(gb.iter().all(|&g| roots.binary_search(&dsu.find(g as u32)).is_err()))
}

/// Open time gaps left on each line once `d` and the slit are removed.
struct FreeSet {
    gaps: Vec<(f64, f64)>,
    start: Vec<usize>,
    blocks: Vec<Vec<(f64, f64)>>,
    seam_blocked: Vec<bool>,
}

impl FreeSet {
    fn new(bx: &SpaceTimeBox, d: &Region) -> Self {
        let n = bx.num_lines();
        let mut blocks = vec![Vec::new(); n];
        for part in &d.parts {
            match *part {
                RegionPart::Point(p) => blocks[bx.line(p.site).expect("checked")].push((p.time, p.time)),
                RegionPart::Segment { site, t0, t1 } => blocks[bx.line(site).expect("checked")].push((t0, t1)),
                RegionPart::Line(site) => blocks[bx.line(site).expect("checked")].push((bx.t_min(), bx.t_max())),
            }
        }
        let (mut gaps, mut start, mut seam_blocked) = (Vec::new(), Vec::with_capacity(n + 1), Vec::with_capacity(n));
        for (line, bl) in blocks.iter().enumerate() {
            let mut cuts = bl.clone();
            if bx.is_slit_line(bx.site(line)) {
                cuts.push((0.0, 0.0));
            }
            cuts.sort_by(|a, b| a.0.total_cmp(&b.0));
            seam_blocked.push(cuts.iter().any(|&(a, b)| a <= bx.t_min() || b >= bx.t_max()));
            start.push(gaps.len());
            let mut cursor = bx.t_min();
            for &(a, b) in &cuts {
                if a > cursor {
                    gaps.push((cursor, a));
                }
                cursor = cursor.max(b);
            }
            if cursor < bx.t_max() {
                gaps.push((cursor, bx.t_max()));
            }
        }
        start.push(gaps.len());
        FreeSet { gaps, start, blocks, seam_blocked }
    }

    fn line_range(&self, line: usize) -> std::ops::Range<usize> {
        self.start[line]..self.start[line + 1]
    }

    fn on_block(&self, line: usize, t: f64) -> bool {
        self.blocks[line].iter().any(|&(a, b)| a <= t && t <= b)
    }

    /// Gap indices covering a region, or `None` if the region meets `d`.
    fn gaps_of(&self, bx: &SpaceTimeBox, r: &Region) -> Option<Vec<usize>> {
        let mut out = Vec::new();
        for part in &r.parts {
            match *part {
                RegionPart::Point(p) => {
                    let line = bx.line(p.site)?;
                    let range = self.line_range(line);
                    let t = p.time;
                    if self.on_block(line, t) {
                        return None;
                    }
                    let hit = match p.side {
                        Some(SlitSide::Plus) => range.clone().find(|&i| self.gaps[i].0 == t),
                        Some(SlitSide::Minus) => range.clone().find(|&i| self.gaps[i].1 == t),
                        None => range.clone().find(|&i| self.gaps[i].0 < t && t < self.gaps[i].1),
                    };
                    out.push(hit?);
                }
                RegionPart::Segment { site, t0, t1 } => {
                    let line = bx.line(site)?;
                    if self.blocks[line].iter().any(|&(a, b)| a <= t1 && t0 <= b) {
                        return None;
                    }
                    out.extend(self.line_range(line).filter(|&i| self.gaps[i].0 <= t1 && t0 <= self.gaps[i].1));
                }
                RegionPart::Line(site) => {
                    let line = bx.line(site)?;
                    if !self.blocks[line].is_empty() {
                        return None;
                    }
                    out.extend(self.line_range(line));
                }
            }
        }
        Some(out)
    }
}
