#![allow(dead_code)]

use ising_rc::geometry::{BoxPoint, SlitSide, SpaceTimeBox};
use ising_rc::percolation::Configuration;
use std::collections::VecDeque;

/// Which ends a grid flood fill glues together.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Glue {
    Free,
    /// Top to bottom on every line.
    Periodic,
    /// All top and bottom ends into one.
    Wired,
    /// Top to bottom only on lines outside `0..=L` (segment presentation).
    SegmentPartiallyPeriodic(i64),
    /// As above, plus all ends of lines `0..=L` wired.
    SegmentPeriodicWired(i64),
    /// Slit box: all slit ends wired.
    SlitWired,
}

/// Grid of every event time; cells are the open gaps between consecutive times.
pub struct Grid {
    pub times: Vec<f64>,
    pub lines: usize,
    pub x_min: i64,
    pub slit_cell: Option<usize>,
}

impl Grid {
    pub fn new(bx: &SpaceTimeBox, cfg: &Configuration) -> Self {
        let mut times = vec![bx.t_min(), bx.t_max()];
        for i in 0..bx.num_lines() {
            times.extend_from_slice(cfg.deaths(i));
        }
        for i in 0..bx.num_pairs() {
            times.extend_from_slice(cfg.bridges(i));
        }
        if bx.slit_len().is_some() {
            times.push(0.0);
        }
        times.sort_by(f64::total_cmp);
        times.dedup();
        let slit_cell = bx.slit_len().map(|_| times.iter().position(|&t| t == 0.0).unwrap());
        Grid { times, lines: bx.num_lines(), x_min: bx.x_min(), slit_cell }
    }

    pub fn cells(&self) -> usize {
        self.times.len() - 1
    }

    pub fn node(&self, line: usize, cell: usize) -> usize {
        line * self.cells() + cell
    }

    pub fn cell_of(&self, p: &BoxPoint, bx: &SpaceTimeBox) -> usize {
        if bx.is_slit_line(p.site) && p.time == 0.0 {
            let j = self.slit_cell.unwrap();
            return match p.side.unwrap() {
                SlitSide::Plus => j,
                SlitSide::Minus => j - 1,
            };
        }
        let c = self.times.partition_point(|&g| g < p.time);
        (c.max(1) - 1).min(self.cells() - 1)
    }

    /// Component id of every node under the gluing.
    pub fn components(&self, bx: &SpaceTimeBox, cfg: &Configuration, glue: Glue) -> (usize, Vec<usize>) {
        let nc = self.cells();
        let n = self.lines * nc;
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        let edge = |a: usize, b: usize, adj: &mut Vec<Vec<usize>>| {
            adj[a].push(b);
            adj[b].push(a);
        };
        for line in 0..self.lines {
            let x = self.x_min + line as i64;
            let deaths = cfg.deaths(line);
            for c in 0..nc - 1 {
                let t = self.times[c + 1];
                let blocked = deaths.contains(&t) || (bx.is_slit_line(x) && t == 0.0);
                if !blocked {
                    edge(self.node(line, c), self.node(line, c + 1), &mut adj);
                }
            }
            let glue_line = match glue {
                Glue::Periodic => true,
                Glue::SegmentPartiallyPeriodic(l) | Glue::SegmentPeriodicWired(l) => !(0..=l).contains(&x),
                _ => false,
            };
            if bx.is_periodic() || glue_line {
                edge(self.node(line, nc - 1), self.node(line, 0), &mut adj);
            }
        }
        for pair in 0..self.lines.saturating_sub(1) {
            for &b in cfg.bridges(pair) {
                let c = self.times.iter().position(|&g| g == b).unwrap();
                edge(self.node(pair, c), self.node(pair + 1, c), &mut adj);
            }
        }
        let mut wired: Vec<usize> = Vec::new();
        match glue {
            Glue::Wired => {
                for line in 0..self.lines {
                    wired.push(self.node(line, 0));
                    wired.push(self.node(line, nc - 1));
                }
            }
            Glue::SegmentPeriodicWired(l) => {
                for line in 0..self.lines {
                    let x = self.x_min + line as i64;
                    if (0..=l).contains(&x) {
                        wired.push(self.node(line, 0));
                        wired.push(self.node(line, nc - 1));
                    }
                }
            }
            Glue::SlitWired => {
                let j = self.slit_cell.unwrap();
                for x in 0..=bx.slit_len().unwrap() as i64 {
                    let line = bx.line(x).unwrap();
                    wired.push(self.node(line, j));
                    wired.push(self.node(line, j - 1));
                }
            }
            _ => {}
        }
        for w in wired.windows(2) {
            edge(w[0], w[1], &mut adj);
        }
        let mut comp = vec![usize::MAX; n];
        let mut k = 0;
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            let mut q = VecDeque::from([s]);
            comp[s] = k;
            while let Some(u) = q.pop_front() {
                for &v in &adj[u] {
                    if comp[v] == usize::MAX {
                        comp[v] = k;
                        q.push_back(v);
                    }
                }
            }
            k += 1;
        }
        (k, comp)
    }
}
