//! Space/query trade-off structure for halfplane proximity queries.
//!
//! The base structure keeps a point locator for the Voronoi diagram of every
//! cyclic interval of its sites, so an interval query is one point location.
//! Each recursion level cuts its sites into runs of `m` at breakpoints, keeps
//! a smaller structure per run, and keeps locators for the intervals of
//! power-of-two length starting or ending at each breakpoint. A query splits
//! its interval into at most two run pieces and two overlapping dyadic pieces.

use crate::dual_tree::{Cyclic, DualTree};
use crate::error::{Error, Result};
use crate::geom::{left_interval, side_of_line, ConvexSequence, DirectedLine, LeftInterval, Mode, Point};
use crate::locator::CentroidLocator;
use crate::QueryOutcome;

/// Elementary locate calls made by one query.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LocateBudget {
    pub calls: usize,
}

/// Recursion depth for a target exponent `eps`.
pub fn depth_for_eps(eps: f64) -> Result<usize> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::BadParameter(format!("eps must be positive, got {eps}")));
    }
    Ok((0.5 + 1.0 / eps).ceil() as usize)
}

/// Run length at a level with `len` sites and depth `k`.
pub fn run_length(len: usize, k: usize) -> usize {
    let e = (2.0 * k as f64 - 3.0) / (2.0 * k as f64 - 1.0);
    ((len as f64).powf(e).ceil() as usize).max(2)
}

fn floor_log2(x: usize) -> u32 {
    usize::BITS - 1 - x.leading_zeros()
}

/// Stored cells of a structure on `len` sites with depth `k`, without
/// building it. Matches `OkeyDokey::cells` exactly.
pub fn planned_cells(len: usize, k: usize) -> u128 {
    let l = len as u128;
    if k <= 1 {
        return l * l * (l + 1) / 2;
    }
    let m = run_length(len, k);
    let mut total = 0u128;
    let mut start = 0;
    while start < len {
        total += planned_cells(m.min(len - start), k - 1);
        start += m;
    }
    let dyadic: u128 = (0..=floor_log2(len)).map(|e| 1u128 << e).sum();
    total + 2 * len.div_ceil(m) as u128 * dyadic
}

/// Locators for the intervals of one cyclic run of sites.
#[derive(Clone, Debug)]
struct Locators {
    /// Keyed by `(start, length)`; lengths below three have none.
    table: Vec<Option<CentroidLocator>>,
}

fn locators_from(pts: &[Point], start: usize, mode: Mode, lengths: &[usize]) -> Result<Vec<Option<CentroidLocator>>> {
    let n = pts.len();
    let max = lengths.iter().copied().max().unwrap_or(0);
    let mut tree = DualTree::new(mode);
    let mut out = Vec::with_capacity(lengths.len());
    let mut want = lengths.iter().peekable();
    for len in 1..=max {
        tree.insert_ccw(pts[(start + len - 1) % n])?;
        while want.peek() == Some(&&len) {
            want.next();
            out.push((len >= 3).then(|| CentroidLocator::build(&tree)));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
enum Level {
    Base(Locators),
    Split(Box<Split>),
}

#[derive(Clone, Debug)]
struct Split {
    m: usize,
    runs: Vec<Sub>,
    /// Per breakpoint, locators for lengths `1, 2, 4, ...` going forward.
    fwd: Vec<Vec<Option<CentroidLocator>>>,
    /// Per breakpoint, locators for the same lengths ending there.
    bwd: Vec<Vec<Option<CentroidLocator>>>,
}

#[derive(Clone, Debug)]
struct Sub {
    /// Offset of the first site in the global sequence.
    offset: usize,
    len: usize,
    level: Level,
    cells: u128,
}

#[derive(Clone, Debug)]
pub struct OkeyDokey {
    mode: Mode,
    k: usize,
    sites: ConvexSequence,
    top: Sub,
}

impl OkeyDokey {
    pub fn build(sites: ConvexSequence, mode: Mode, eps: f64) -> Result<Self> {
        let k = depth_for_eps(eps)?;
        OkeyDokey::build_depth(sites, mode, k)
    }

    pub fn build_depth(sites: ConvexSequence, mode: Mode, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::BadParameter("depth must be at least 1".into()));
        }
        if sites.len() < 3 {
            return Err(Error::BadParameter("need at least three sites".into()));
        }
        let top = build_sub(sites.points(), 0, sites.len(), mode, k)?;
        Ok(OkeyDokey { mode, k, sites, top })
    }

    pub fn from_points(pts: &[Point], mode: Mode, k: usize) -> Result<Self> {
        OkeyDokey::build_depth(ConvexSequence::new(pts.to_vec())?, mode, k)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn depth(&self) -> usize {
        self.k
    }

    /// Total sites over all stored Voronoi diagrams, trivial ones included.
    pub fn cells(&self) -> u128 {
        self.top.cells
    }

    /// Number of intervals with a stored answer set at the base of a
    /// depth-one structure.
    pub fn base_intervals(&self) -> usize {
        match &self.top.level {
            Level::Base(l) => l.table.len(),
            Level::Split(_) => 0,
        }
    }

    /// Run length of the top level, if it is split.
    pub fn top_run_length(&self) -> Option<usize> {
        match &self.top.level {
            Level::Base(_) => None,
            Level::Split(s) => Some(s.m),
        }
    }

    pub fn query(&self, q: Point, l: &DirectedLine) -> QueryOutcome {
        self.query_counted(q, l).0
    }

    pub fn query_counted(&self, q: Point, l: &DirectedLine) -> (QueryOutcome, LocateBudget) {
        let n = self.sites.len();
        let mut budget = LocateBudget::default();
        let (i, len) = match left_interval(self.sites.points(), l) {
            LeftInterval::Empty => return (QueryOutcome::EmptyHalfplane, budget),
            LeftInterval::Full => (1, n),
            LeftInterval::Interval(i, j) => (i, (j + n - i) % n + 1),
        };
        debug_assert!((1..=n).all(|s| {
            let inside = (s + n - i) % n < len;
            inside == (side_of_line(l, self.sites.site(s)) >= 0)
        }));
        let best = self.query_sub(&self.top, i - 1, len, q, &mut budget);
        (QueryOutcome::Site(best), budget)
    }

    /// Best site in the cyclic interval `i..=j`.
    pub fn query_interval(&self, i: usize, j: usize, q: Point) -> Result<(usize, LocateBudget)> {
        let n = self.sites.len();
        if i == 0 || j == 0 || i > n || j > n {
            return Err(Error::BadInterval(i, j));
        }
        let mut budget = LocateBudget::default();
        let best = self.query_sub(&self.top, i - 1, (j + n - i) % n + 1, q, &mut budget);
        Ok((best, budget))
    }

    fn label_better(&self, q: Point, a: usize, b: usize) -> usize {
        let p = self.sites.points();
        if self.mode.better(q, p[a - 1], a, p[b - 1], b) {
            a
        } else {
            b
        }
    }

    /// One elementary locate on the interval of `sub` starting at local `s`.
    fn locate(&self, sub: &Sub, loc: Option<&CentroidLocator>, s: usize, len: usize, q: Point, budget: &mut LocateBudget) -> usize {
        budget.calls += 1;
        let pts = &self.sites.points()[sub.offset..sub.offset + sub.len];
        let label = |r: usize| sub.offset + (s + r - 1) % sub.len + 1;
        match loc {
            Some(loc) => {
                let (c, _) = loc.candidates(&Cyclic { pts, start: s, len }, q);
                c[1..].iter().fold(label(c[0]), |b, &x| self.label_better(q, b, label(x)))
            }
            None if len == 1 => label(1),
            None => self.label_better(q, label(1), label(2)),
        }
    }

    fn query_sub(&self, sub: &Sub, s: usize, len: usize, q: Point, budget: &mut LocateBudget) -> usize {
        match &sub.level {
            Level::Base(l) => {
                let loc = l.table[s * sub.len + len - 1].as_ref();
                self.locate(sub, loc, s, len, q, budget)
            }
            Level::Split(sp) => {
                let n = sub.len;
                let m = sp.m;
                let e = s + len - 1;
                let first = if s.div_ceil(m) * m < n { s.div_ceil(m) * m } else { n };
                let last = if e >= n { n + (e - n) / m * m } else { e / m * m };
                if first > e {
                    let r = s / m;
                    return self.query_sub(&sp.runs[r], s - r * m, len, q, budget);
                }
                let mut best: Option<usize> = None;
                let mut take = |x: usize| best = Some(best.map_or(x, |b| self.label_better(q, b, x)));
                if first > s {
                    let r = s / m;
                    take(self.query_sub(&sp.runs[r], s - r * m, first - s, q, budget));
                }
                let r = (last % n) / m;
                take(self.query_sub(&sp.runs[r], 0, e - last + 1, q, budget));
                if last > first {
                    let [(fs, size), (bs, _)] = dyadic_cover(first, last);
                    let p = size.trailing_zeros() as usize;
                    let (bf, bb) = (first % n / m, last % n / m);
                    take(self.locate(sub, sp.fwd[bf][p].as_ref(), fs % n, size, q, budget));
                    take(self.locate(sub, sp.bwd[bb][p].as_ref(), bs % n, size, q, budget));
                }
                best.unwrap()
            }
        }
    }
}

/// The two dyadic intervals covering `first..=last` (unwrapped positions),
/// as `(start, length)` pairs.
pub fn dyadic_cover(first: usize, last: usize) -> [(usize, usize); 2] {
    let size = 1usize << floor_log2(last - first);
    [(first, size), (last + 1 - size, size)]
}

fn build_sub(all: &[Point], offset: usize, len: usize, mode: Mode, k: usize) -> Result<Sub> {
    let pts = &all[offset..offset + len];
    if k <= 1 {
        let mut table = Vec::with_capacity(len * len);
        let lengths: Vec<usize> = (1..=len).collect();
        for s in 0..len {
            table.extend(locators_from(pts, s, mode, &lengths)?);
        }
        let l = len as u128;
        return Ok(Sub { offset, len, level: Level::Base(Locators { table }), cells: l * l * (l + 1) / 2 });
    }
    let m = run_length(len, k);
    let mut runs = Vec::new();
    let mut start = 0;
    while start < len {
        runs.push(build_sub(all, offset + start, m.min(len - start), mode, k - 1)?);
        start += m;
    }
    let sizes: Vec<usize> = (0..=floor_log2(len)).map(|e| 1usize << e).collect();
    let mut fwd = Vec::with_capacity(runs.len());
    let mut bwd = Vec::with_capacity(runs.len());
    let mut cells: u128 = runs.iter().map(|r| r.cells).sum();
    for b in 0..runs.len() {
        let at = b * m;
        fwd.push(locators_from(pts, at, mode, &sizes)?);
        let mut back = Vec::with_capacity(sizes.len());
        for &size in &sizes {
            back.extend(locators_from(pts, (at + len + 1 - size) % len, mode, &[size])?);
        }
        bwd.push(back);
        cells += 2 * sizes.iter().map(|&s| s as u128).sum::<u128>();
    }
    Ok(Sub { offset, len, level: Level::Split(Box::new(Split { m, runs, fwd, bwd })), cells })
}
