//! Space-time boxes, points and regions.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A finite set of time-lines `x_min..=x_max` over the time extent
/// `[t_min, t_max]`. With `periodic` the two time ends are glued into a
/// circle. With a slit of length `L`, lines `0..=L` are cut at time 0 so that
/// every slit vertex splits into `x+` (just above 0) and `x-` (just below 0).
///
/// A slit box is always periodic in time: the cut at 0 is then the only
/// free boundary of the slit lines, which is the object whose slit
/// marginals give the reduced density matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeBox {
    x_min: i64,
    x_max: i64,
    t_min: f64,
    t_max: f64,
    slit_len: Option<u32>,
    periodic: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SlitSide {
    /// Just above the cut (`x+`).
    Plus,
    /// Just below the cut (`x-`).
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxPoint {
    pub site: i64,
    pub time: f64,
    /// Required for points at time 0 on a slit line, ignored elsewhere.
    pub side: Option<SlitSide>,
}

impl BoxPoint {
    pub fn new(site: i64, time: f64) -> Self {
        BoxPoint { site, time, side: None }
    }

    pub fn slit(site: i64, side: SlitSide) -> Self {
        BoxPoint { site, time: 0.0, side: Some(side) }
    }
}

impl SpaceTimeBox {
    pub fn new(x_min: i64, x_max: i64, t_min: f64, t_max: f64) -> Result<Self> {
        if x_min > x_max {
            return Err(Error::Domain(format!("x_min {x_min} > x_max {x_max}")));
        }
        if !(t_min.is_finite() && t_max.is_finite() && t_min < t_max) {
            return Err(Error::Domain(format!("bad time extent [{t_min}, {t_max}]")));
        }
        Ok(SpaceTimeBox { x_min, x_max, t_min, t_max, slit_len: None, periodic: false })
    }

    /// Glue the two time ends.
    pub fn periodic(mut self) -> Self {
        self.periodic = true;
        self
    }

    pub fn with_slit(mut self, len: u32) -> Result<Self> {
        if self.x_min > 0 || (len as i64) > self.x_max {
            return Err(Error::Domain(format!(
                "slit [0, {len}] not inside sites [{}, {}]",
                self.x_min, self.x_max
            )));
        }
        if !(self.t_min < 0.0 && 0.0 < self.t_max) {
            return Err(Error::Domain("slit needs t_min < 0 < t_max".into()));
        }
        if !self.periodic {
            return Err(Error::Domain("a slit box must be periodic in time".into()));
        }
        self.slit_len = Some(len);
        Ok(self)
    }

    /// Sites `-m..=m+L`, times `[-beta/2, beta/2]` glued, slit over `0..=L`.
    pub fn slit_box(m: u32, l: u32, beta: f64) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(Error::Domain(format!("beta must be positive, got {beta}")));
        }
        SpaceTimeBox::new(-(m as i64), (m + l) as i64, -beta / 2.0, beta / 2.0)?
            .periodic()
            .with_slit(l)
    }

    /// Lines `0..n` over `[0, height]`, ends not glued.
    pub fn segment(n: usize, height: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("need at least one line".into()));
        }
        SpaceTimeBox::new(0, n as i64 - 1, 0.0, height)
    }

    pub fn x_min(&self) -> i64 {
        self.x_min
    }
    pub fn x_max(&self) -> i64 {
        self.x_max
    }
    pub fn t_min(&self) -> f64 {
        self.t_min
    }
    pub fn t_max(&self) -> f64 {
        self.t_max
    }
    pub fn height(&self) -> f64 {
        self.t_max - self.t_min
    }
    pub fn slit_len(&self) -> Option<u32> {
        self.slit_len
    }
    pub fn is_periodic(&self) -> bool {
        self.periodic
    }
    pub fn num_lines(&self) -> usize {
        (self.x_max - self.x_min + 1) as usize
    }
    pub fn num_pairs(&self) -> usize {
        self.num_lines() - 1
    }

    /// Offset of site `x` among the lines, if inside.
    pub fn line(&self, x: i64) -> Option<usize> {
        (x >= self.x_min && x <= self.x_max).then(|| (x - self.x_min) as usize)
    }

    pub fn site(&self, line: usize) -> i64 {
        self.x_min + line as i64
    }

    pub fn is_slit_line(&self, x: i64) -> bool {
        matches!(self.slit_len, Some(l) if x >= 0 && x <= l as i64)
    }

    pub fn contains_time(&self, t: f64) -> bool {
        t >= self.t_min && t <= self.t_max
    }

    pub fn check_point(&self, p: &BoxPoint) -> Result<()> {
        if self.line(p.site).is_none() || !self.contains_time(p.time) {
            return Err(Error::Domain(format!("point ({}, {}) outside box", p.site, p.time)));
        }
        if self.is_slit_line(p.site) && p.time == 0.0 && p.side.is_none() {
            return Err(Error::Domain(format!("slit point at site {} needs a side", p.site)));
        }
        Ok(())
    }
}

/// A piece of a box used to wire, label or probe clusters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum RegionPart {
    Point(BoxPoint),
    /// Closed time segment `[t0, t1]` on one line.
    Segment { site: i64, t0: f64, t1: f64 },
    /// A whole line.
    Line(i64),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub parts: Vec<RegionPart>,
}

impl Region {
    pub fn new() -> Self {
        Region::default()
    }

    pub fn point(mut self, p: BoxPoint) -> Self {
        self.parts.push(RegionPart::Point(p));
        self
    }

    pub fn segment(mut self, site: i64, t0: f64, t1: f64) -> Self {
        self.parts.push(RegionPart::Segment { site, t0, t1 });
        self
    }

    pub fn line(mut self, site: i64) -> Self {
        self.parts.push(RegionPart::Line(site));
        self
    }

    pub fn union(mut self, other: &Region) -> Self {
        self.parts.extend(other.parts.iter().cloned());
        self
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// The slit points `x+` for `x` in `lo..=hi`.
    pub fn slit_side(lo: i64, hi: i64, side: SlitSide) -> Self {
        Region { parts: (lo..=hi).map(|x| RegionPart::Point(BoxPoint::slit(x, side))).collect() }
    }

    pub fn check(&self, bx: &SpaceTimeBox) -> Result<()> {
        for part in &self.parts {
            match part {
                RegionPart::Point(p) => bx.check_point(p)?,
                RegionPart::Segment { site, t0, t1 } => {
                    if bx.line(*site).is_none() || !(t0 <= t1) || !bx.contains_time(*t0) || !bx.contains_time(*t1) {
                        return Err(Error::Domain(format!("segment {site} [{t0}, {t1}] outside box")));
                    }
                }
                RegionPart::Line(site) => {
                    if bx.line(*site).is_none() {
                        return Err(Error::Domain(format!("line {site} outside box")));
                    }
                }
            }
        }
        Ok(())
    }
}
