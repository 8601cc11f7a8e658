//! Exact exploration of a single cluster in the infinite space-time plane.
//!
//! Deaths and bridges are revealed only where the cluster needs them, using
//! the memoryless property of Poisson processes: every revealed death-free
//! interval belongs to the explored cluster, and unrevealed time stays fresh.
//! Exploration stops once the cluster leaves a window, so the cost is the
//! size of the cluster inside the window however large the window is.

use crate::error::{param, Result};
use crate::rng::Rng;

const TAG_CONNECTIVITY: u64 = 0xC0;

/// Death rate per site and bridge rate per pair `(x, x+1)`.
pub trait SiteRates {
    fn death(&self, x: i64) -> f64;
    fn bridge(&self, x: i64) -> f64;
}

#[derive(Clone, Copy, Debug)]
pub struct UniformRates {
    pub lambda: f64,
    pub delta: f64,
}

impl SiteRates for UniformRates {
    fn death(&self, _: i64) -> f64 {
        self.delta
    }
    fn bridge(&self, _: i64) -> f64 {
        self.lambda
    }
}

/// How far a cluster reaches from its starting line `x0`.
#[derive(Clone, Copy, Debug)]
pub enum Reach {
    /// Sup distance `max(|x - x0|, |t|)`, stopping at `radius`.
    Box { radius: u32 },
    /// `max(|x - x0|, (ln⁺|t|)^q)`, stopping at `radius`.
    LogTime { radius: u32, q: f64 },
}

impl Reach {
    fn radius(&self) -> f64 {
        match *self {
            Reach::Box { radius } | Reach::LogTime { radius, .. } => radius as f64,
        }
    }

    fn time_window(&self) -> f64 {
        match *self {
            Reach::Box { radius } => radius as f64,
            Reach::LogTime { radius, q } => (radius as f64).powf(1.0 / q).exp(),
        }
    }

    fn metric(&self, dx: i64, abs_t: f64) -> f64 {
        let d = dx.unsigned_abs() as f64;
        match *self {
            Reach::Box { .. } => d.max(abs_t),
            Reach::LogTime { q, .. } => {
                let lt = if abs_t > 1.0 { abs_t.ln().powf(q) } else { 0.0 };
                d.max(lt)
            }
        }
    }
}

#[derive(Default)]
struct Intervals(Vec<(f64, f64)>);

impl Intervals {
    fn clear(&mut self) {
        self.0.clear();
    }

    fn contains(&self, t: f64) -> bool {
        let p = self.0.partition_point(|iv| iv.0 <= t);
        p > 0 && self.0[p - 1].1 >= t
    }

    fn next_lo_above(&self, t: f64, default: f64) -> f64 {
        let p = self.0.partition_point(|iv| iv.0 <= t);
        self.0.get(p).map_or(default, |iv| iv.0.min(default))
    }

    fn prev_hi_below(&self, t: f64, default: f64) -> f64 {
        let p = self.0.partition_point(|iv| iv.1 < t);
        if p == 0 {
            default
        } else {
            self.0[p - 1].1.max(default)
        }
    }

    fn insert(&mut self, lo: f64, hi: f64) {
        let p = self.0.partition_point(|iv| iv.0 < lo);
        self.0.insert(p, (lo, hi));
    }

    /// Parts of [lo, hi] not covered; then marks [lo, hi] covered.
    fn cover(&mut self, lo: f64, hi: f64, gaps: &mut Vec<(f64, f64)>) {
        gaps.clear();
        let mut cur = lo;
        for &(a, b) in &self.0 {
            if b <= cur {
                continue;
            }
            if a >= hi {
                break;
            }
            if a > cur {
                gaps.push((cur, a));
            }
            cur = cur.max(b);
            if cur >= hi {
                break;
            }
        }
        if cur < hi {
            gaps.push((cur, hi));
        }
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(self.0.len() + 1);
        let mut new = Some((lo, hi));
        for &(a, b) in &self.0 {
            if let Some((nl, _)) = new {
                if nl < a {
                    merged.push(new.take().unwrap());
                }
            }
            merged.push((a, b));
        }
        if let Some(n) = new {
            merged.push(n);
        }
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(merged.len());
        for (a, b) in merged {
            match out.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => out.push((a, b)),
            }
        }
        self.0 = out;
    }
}

/// Reusable buffers for repeated explorations.
#[derive(Default)]
pub struct Explorer {
    lines: Vec<Intervals>,
    pairs: Vec<Intervals>,
    queue: Vec<(i64, f64)>,
    gaps: Vec<(f64, f64)>,
    points: Vec<f64>,
}

impl Explorer {
    pub fn new() -> Self {
        Explorer::default()
    }

    /// Explores the cluster of `{x0} × [a, b]` and returns the largest reach,
    /// capped at the reach radius (a returned value equal to the radius means
    /// the cluster left the window).
    pub fn reach<R: SiteRates>(&mut self, rates: &R, x0: i64, a: f64, b: f64, reach: Reach, rng: &mut Rng) -> f64 {
        let radius = reach.radius();
        let r = radius as i64;
        if radius <= 0.0 {
            return radius;
        }
        let tw = reach.time_window();
        let width = (2 * r + 1) as usize;
        self.lines.resize_with(width, Intervals::default);
        self.pairs.resize_with(width + 1, Intervals::default);
        self.lines.iter_mut().for_each(Intervals::clear);
        self.pairs.iter_mut().for_each(Intervals::clear);
        self.queue.clear();
        let mut best = 0.0f64;

        // Seed: the intervals covering [a, b] on line x0.
        let mut lo_fixed: Option<f64> = None;
        let mut t = a;
        loop {
            match self.reveal(rates, x0, 0, t, lo_fixed, tw, rng) {
                None => return radius,
                Some((_lo, hi)) => {
                    best = best.max(self.process(rates, x0, 0, _lo, hi, reach, tw, rng));
                    if best >= radius {
                        return radius;
                    }
                    if hi >= b {
                        break;
                    }
                    lo_fixed = Some(hi);
                    t = hi;
                }
            }
        }
        while let Some((dx, s)) = self.queue.pop() {
            if dx.abs() >= r {
                return radius;
            }
            let li = (dx + r) as usize;
            if self.lines[li].contains(s) {
                continue;
            }
            match self.reveal(rates, x0, dx, s, None, tw, rng) {
                None => return radius,
                Some((lo, hi)) => {
                    best = best.max(self.process(rates, x0, dx, lo, hi, reach, tw, rng));
                    if best >= radius {
                        return radius;
                    }
                }
            }
        }
        best.min(radius)
    }

    /// Reveals the death-free interval through time `t` on line `x0 + dx`.
    /// Returns None if it reaches the time window.
    #[allow(clippy::too_many_arguments)]
    fn reveal<R: SiteRates>(
        &mut self,
        rates: &R,
        x0: i64,
        dx: i64,
        t: f64,
        lo_fixed: Option<f64>,
        tw: f64,
        rng: &mut Rng,
    ) -> Option<(f64, f64)> {
        let r = (self.lines.len() as i64 - 1) / 2;
        let li = (dx + r) as usize;
        let delta = rates.death(x0 + dx);
        let up_limit = self.lines[li].next_lo_above(t, tw);
        let up = if delta > 0.0 { t + rng.exponential(delta) } else { f64::INFINITY };
        let hi = up.min(up_limit);
        let lo = match lo_fixed {
            Some(l) => l,
            None => {
                let down_limit = self.lines[li].prev_hi_below(t, -tw);
                let down = if delta > 0.0 { t - rng.exponential(delta) } else { f64::NEG_INFINITY };
                down.max(down_limit)
            }
        };
        if hi >= tw || lo <= -tw {
            return None;
        }
        self.lines[li].insert(lo, hi);
        Some((lo, hi))
    }

    /// Samples bridges off a new interval and returns its reach.
    #[allow(clippy::too_many_arguments)]
    fn process<R: SiteRates>(
        &mut self,
        rates: &R,
        x0: i64,
        dx: i64,
        lo: f64,
        hi: f64,
        reach: Reach,
        _tw: f64,
        rng: &mut Rng,
    ) -> f64 {
        let r = (self.lines.len() as i64 - 1) / 2;
        let here = reach.metric(dx, lo.abs().max(hi.abs()));
        for side in [-1i64, 1] {
            let nb = dx + side;
            // Pair (x, x+1) with x = x0 + min(dx, nb) is stored at index min + r.
            let pair_dx = dx.min(nb);
            let pi = (pair_dx + r) as usize;
            let rate = rates.bridge(x0 + pair_dx);
            self.pairs[pi].cover(lo, hi, &mut self.gaps);
            if rate <= 0.0 {
                continue;
            }
            for gi in 0..self.gaps.len() {
                let (ga, gb) = self.gaps[gi];
                self.points.clear();
                rng.poisson_points(ga, gb, rate, &mut self.points);
                for &s in &self.points {
                    self.queue.push((nb, s));
                }
            }
        }
        here
    }
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ConnectivityEstimate {
    pub m: u32,
    pub trials: u64,
    pub hits: u64,
    pub p: f64,
    /// Binomial standard error.
    pub se: f64,
}

impl ConnectivityEstimate {
    pub fn from_counts(m: u32, hits: u64, trials: u64) -> Self {
        let p = hits as f64 / trials as f64;
        ConnectivityEstimate { m, trials, hits, p, se: (p * (1.0 - p) / trials as f64).sqrt() }
    }
}

/// Frequency of `{0}×[-1/2, 1/2] ↔ ∂([-m, m]²)` under the infinite-volume
/// percolation law.
pub fn estimate_connectivity(lambda: f64, delta: f64, m: u32, trials: u64, seed: u64) -> Result<ConnectivityEstimate> {
    if !(lambda >= 0.0 && delta >= 0.0) {
        return param("rates must be non-negative");
    }
    if trials == 0 {
        return param("need at least one trial");
    }
    if m == 0 {
        return Ok(ConnectivityEstimate { m, trials, hits: trials, p: 1.0, se: 0.0 });
    }
    let rates = UniformRates { lambda, delta };
    let mut ex = Explorer::new();
    let mut hits = 0u64;
    for trial in 0..trials {
        let mut rng = Rng::stream(seed, &[TAG_CONNECTIVITY, m as u64, trial]);
        let got = ex.reach(&rates, 0, -0.5, 0.5, Reach::Box { radius: m }, &mut rng);
        if got >= m as f64 {
            hits += 1;
        }
    }
    Ok(ConnectivityEstimate::from_counts(m, hits, trials))
}
