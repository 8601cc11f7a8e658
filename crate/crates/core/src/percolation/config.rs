use crate::error::{param, Error, Result};
use crate::geometry::SpaceTimeBox;
use crate::rng::Rng;

const TAG_DEATH: u64 = 1;
const TAG_BRIDGE: u64 = 2;

/// Deaths per line and bridges per adjacent pair, as sorted event times.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Configuration {
    deaths: Vec<Vec<f64>>,
    bridges: Vec<Vec<f64>>,
}

/// Poisson rates per line (deaths) and per pair (bridges).
#[derive(Clone, Debug, PartialEq)]
pub struct Rates {
    pub death: Vec<f64>,
    pub bridge: Vec<f64>,
}

impl Rates {
    pub fn uniform(bx: &SpaceTimeBox, lambda: f64, delta: f64) -> Result<Self> {
        Rates { death: vec![delta; bx.num_lines()], bridge: vec![lambda; bx.num_pairs()] }.checked(bx)
    }

    pub fn checked(self, bx: &SpaceTimeBox) -> Result<Self> {
        if self.death.len() != bx.num_lines() || self.bridge.len() != bx.num_pairs() {
            return param("rate vectors do not match the box");
        }
        if self.death.iter().chain(&self.bridge).any(|r| !(r.is_finite() && *r >= 0.0)) {
            return param("rates must be finite and non-negative");
        }
        Ok(self)
    }
}

fn tie_free(sorted_a: &[f64], sorted_b: &[f64]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < sorted_a.len() && j < sorted_b.len() {
        if sorted_a[i] == sorted_b[j] {
            return false;
        }
        if sorted_a[i] < sorted_b[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    true
}

impl Configuration {
    pub fn empty(bx: &SpaceTimeBox) -> Self {
        Configuration { deaths: vec![Vec::new(); bx.num_lines()], bridges: vec![Vec::new(); bx.num_pairs()] }
    }

    /// Builds from per-line death lists and per-pair bridge lists; sorts and validates.
    pub fn from_events(bx: &SpaceTimeBox, mut deaths: Vec<Vec<f64>>, mut bridges: Vec<Vec<f64>>) -> Result<Self> {
        for v in deaths.iter_mut().chain(bridges.iter_mut()) {
            v.sort_by(f64::total_cmp);
        }
        let c = Configuration { deaths, bridges };
        c.validate(bx)?;
        Ok(c)
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut Vec<Vec<f64>>, &mut Vec<Vec<f64>>) {
        (&mut self.deaths, &mut self.bridges)
    }

    /// Deaths on the line with offset `line`.
    pub fn deaths(&self, line: usize) -> &[f64] {
        &self.deaths[line]
    }

    /// Bridges between lines `pair` and `pair + 1`.
    pub fn bridges(&self, pair: usize) -> &[f64] {
        &self.bridges[pair]
    }

    pub fn num_lines(&self) -> usize {
        self.deaths.len()
    }

    pub fn num_deaths(&self) -> usize {
        self.deaths.iter().map(Vec::len).sum()
    }

    pub fn num_bridges(&self) -> usize {
        self.bridges.iter().map(Vec::len).sum()
    }

    pub fn with_death(&self, bx: &SpaceTimeBox, x: i64, t: f64) -> Result<Self> {
        let line = bx.line(x).ok_or_else(|| Error::Domain(format!("site {x} outside box")))?;
        let mut c = self.clone();
        let v = &mut c.deaths[line];
        let pos = v.partition_point(|&s| s < t);
        v.insert(pos, t);
        c.validate(bx)?;
        Ok(c)
    }

    /// Adds a bridge between `x` and `x + 1`.
    pub fn with_bridge(&self, bx: &SpaceTimeBox, x: i64, t: f64) -> Result<Self> {
        let pair = bx
            .line(x)
            .filter(|&p| p < bx.num_pairs())
            .ok_or_else(|| Error::Domain(format!("pair ({x}, {}) outside box", x + 1)))?;
        let mut c = self.clone();
        let v = &mut c.bridges[pair];
        let pos = v.partition_point(|&s| s < t);
        v.insert(pos, t);
        c.validate(bx)?;
        Ok(c)
    }

    pub fn validate(&self, bx: &SpaceTimeBox) -> Result<()> {
        if self.deaths.len() != bx.num_lines() || self.bridges.len() != bx.num_pairs() {
            return Err(Error::Validity("event lists do not match the box".into()));
        }
        let inside = |t: f64| t > bx.t_min() && t < bx.t_max();
        for (i, v) in self.deaths.iter().enumerate() {
            if !v.iter().all(|&t| inside(t)) || !v.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::Validity(format!("deaths on site {} not strictly increasing inside the box", bx.site(i))));
            }
            if bx.is_slit_line(bx.site(i)) && v.binary_search_by(|s| s.total_cmp(&0.0)).is_ok() {
                return Err(Error::Validity(format!("death on the slit at site {}", bx.site(i))));
            }
        }
        for (i, v) in self.bridges.iter().enumerate() {
            if !v.iter().all(|&t| inside(t)) || !v.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::Validity(format!("bridges at pair {} not strictly increasing inside the box", bx.site(i))));
            }
            if !tie_free(v, &self.deaths[i]) || !tie_free(v, &self.deaths[i + 1]) {
                return Err(Error::Validity(format!("bridge coincides with a death at pair {}", bx.site(i))));
            }
            let touches_slit = bx.is_slit_line(bx.site(i)) || bx.is_slit_line(bx.site(i + 1));
            if touches_slit && v.binary_search_by(|s| s.total_cmp(&0.0)).is_ok() {
                return Err(Error::Validity(format!("bridge on the slit at pair {}", bx.site(i))));
            }
        }
        Ok(())
    }

    /// Line-oriented text form: header, then sorted `D x t` and `B x t` records.
    /// Times are written in shortest round-trip form.
    pub fn to_text(&self, bx: &SpaceTimeBox, seed: u64) -> String {
        let mut s = String::new();
        s.push_str("rc-configuration v1\n");
        s.push_str(&box_header(bx));
        s.push_str(&format!("seed {seed}\n"));
        self.write_records(bx, &mut s);
        s
    }

    pub(crate) fn write_records(&self, bx: &SpaceTimeBox, s: &mut String) {
        use std::fmt::Write;
        for (i, v) in self.deaths.iter().enumerate() {
            for t in v {
                let _ = writeln!(s, "D {} {:?}", bx.site(i), t);
            }
        }
        for (i, v) in self.bridges.iter().enumerate() {
            for t in v {
                let _ = writeln!(s, "B {} {:?}", bx.site(i), t);
            }
        }
    }

    pub fn from_text(text: &str) -> Result<(SpaceTimeBox, u64, Configuration)> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, "rc-configuration v1")) => {}
            _ => return Err(Error::Parse { line: 1, msg: "missing rc-configuration header".into() }),
        }
        let (bx, seed, cfg, rest) = parse_body(lines)?;
        if let Some((n, l)) = rest.first() {
            return Err(Error::Parse { line: n + 1, msg: format!("unexpected record {l:?}") });
        }
        Ok((bx, seed, cfg))
    }
}

pub(crate) fn box_header(bx: &SpaceTimeBox) -> String {
    let slit = bx.slit_len().map_or("-".to_string(), |l| l.to_string());
    format!(
        "box {} {} {:?} {:?} {} {}\n",
        bx.x_min(),
        bx.x_max(),
        bx.t_min(),
        bx.t_max(),
        slit,
        u8::from(bx.is_periodic())
    )
}

fn perr<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line: line + 1, msg: msg.into() })
}

fn num<T: std::str::FromStr>(line: usize, tok: Option<&str>) -> Result<T> {
    match tok.map(str::parse::<T>) {
        Some(Ok(v)) => Ok(v),
        _ => perr(line, format!("bad number {tok:?}")),
    }
}

/// Parses the box/seed header and D/B records; returns lines it did not
/// recognise (after the records begin) for callers that extend the format.
pub(crate) fn parse_body<'a>(
    mut lines: impl Iterator<Item = (usize, &'a str)>,
) -> Result<(SpaceTimeBox, u64, Configuration, Vec<(usize, &'a str)>)> {
    let (n, l) = lines.next().ok_or(Error::Parse { line: 2, msg: "missing box line".into() })?;
    let mut tok = l.split_whitespace();
    if tok.next() != Some("box") {
        return perr(n, "expected box line");
    }
    let x_min: i64 = num(n, tok.next())?;
    let x_max: i64 = num(n, tok.next())?;
    let t_min: f64 = num(n, tok.next())?;
    let t_max: f64 = num(n, tok.next())?;
    let slit = tok.next();
    let periodic: u8 = num(n, tok.next())?;
    let mut bx = SpaceTimeBox::new(x_min, x_max, t_min, t_max)?;
    if periodic == 1 {
        bx = bx.periodic();
    }
    match slit {
        Some("-") => {}
        s => bx = bx.with_slit(num(n, s)?)?,
    }
    let (n, l) = lines.next().ok_or(Error::Parse { line: 3, msg: "missing seed line".into() })?;
    let mut tok = l.split_whitespace();
    if tok.next() != Some("seed") {
        return perr(n, "expected seed line");
    }
    let seed: u64 = num(n, tok.next())?;
    let mut deaths = vec![Vec::new(); bx.num_lines()];
    let mut bridges = vec![Vec::new(); bx.num_pairs()];
    let mut rest = Vec::new();
    for (n, l) in lines {
        let mut tok = l.split_whitespace();
        match tok.next() {
            Some("D") => {
                let x: i64 = num(n, tok.next())?;
                let t: f64 = num(n, tok.next())?;
                let i = bx.line(x).ok_or(Error::Parse { line: n + 1, msg: format!("site {x} outside box") })?;
                deaths[i].push(t);
            }
            Some("B") => {
                let x: i64 = num(n, tok.next())?;
                let t: f64 = num(n, tok.next())?;
                let i = bx
                    .line(x)
                    .filter(|&i| i < bx.num_pairs())
                    .ok_or(Error::Parse { line: n + 1, msg: format!("pair {x} outside box") })?;
                bridges[i].push(t);
            }
            None => {}
            Some(_) => rest.push((n, l)),
        }
    }
    for v in deaths.iter().chain(bridges.iter()) {
        if !v.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Parse { line: 0, msg: "records are not sorted".into() });
        }
    }
    let cfg = Configuration { deaths, bridges };
    cfg.validate(&bx)?;
    Ok((bx, seed, cfg, rest))
}

/// Independent Poisson deaths (rate δ per line) and bridges (rate λ per
/// pair). Every line and pair draws from its own stream of `seed`.
pub fn sample_percolation(bx: &SpaceTimeBox, lambda: f64, delta: f64, seed: u64) -> Result<Configuration> {
    if !(lambda >= 0.0 && delta >= 0.0) {
        return param(format!("rates must be non-negative, got λ={lambda}, δ={delta}"));
    }
    sample_with_rates(bx, &Rates::uniform(bx, lambda, delta)?, seed)
}

pub fn sample_with_rates(bx: &SpaceTimeBox, rates: &Rates, seed: u64) -> Result<Configuration> {
    let (a, b) = (bx.t_min(), bx.t_max());
    let mut deaths = Vec::with_capacity(bx.num_lines());
    for i in 0..bx.num_lines() {
        let slit = bx.is_slit_line(bx.site(i));
        let mut retry = 0u64;
        loop {
            let mut rng = Rng::stream(seed, &[TAG_DEATH, i as u64, retry]);
            let mut v = Vec::new();
            rng.poisson_points(a, b, rates.death[i], &mut v);
            if !(slit && v.contains(&0.0)) {
                deaths.push(v);
                break;
            }
            retry += 1;
        }
    }
    let mut bridges = Vec::with_capacity(bx.num_pairs());
    for i in 0..bx.num_pairs() {
        let slit = bx.is_slit_line(bx.site(i)) || bx.is_slit_line(bx.site(i + 1));
        let mut retry = 0u64;
        loop {
            let mut rng = Rng::stream(seed, &[TAG_BRIDGE, i as u64, retry]);
            let mut v = Vec::new();
            rng.poisson_points(a, b, rates.bridge[i], &mut v);
            if tie_free(&v, &deaths[i]) && tie_free(&v, &deaths[i + 1]) && !(slit && v.contains(&0.0)) {
                bridges.push(v);
                break;
            }
            retry += 1;
        }
    }
    Ok(Configuration { deaths, bridges })
}
