//! Halfplane proximity queries on a static convex polygon, by divide and
//! conquer over prefix and suffix structures.
//!
//! The left side of a query line holds a cyclic interval of sites. Intervals
//! touching site 1 or site n are answered by the top-level prefix and suffix
//! structures. Any other interval is routed down a balanced recursion until
//! it straddles a midpoint, where one suffix query on the left half and one
//! prefix query on the right half cover it.

use crate::error::{Error, Result};
use crate::geom::{left_interval, side_of_line, ConvexSequence, DirectedLine, LeftInterval, Mode, Point};
use crate::prefix::PrefixStructure;
use crate::QueryOutcome;

#[derive(Clone, Debug)]
struct Node {
    lo: usize,
    mid: usize,
    hi: usize,
    left_half: PrefixStructure,
    right_half: PrefixStructure,
    children: [Option<usize>; 2],
}

/// Work done by one query.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Route {
    /// Recursion nodes visited.
    pub steps: usize,
    /// Prefix or suffix structure queries.
    pub subqueries: usize,
}

#[derive(Clone, Debug)]
pub struct IntervalStructure {
    mode: Mode,
    sites: ConvexSequence,
    top_prefix: Option<PrefixStructure>,
    top_suffix: Option<PrefixStructure>,
    nodes: Vec<Node>,
    root: Option<usize>,
}

impl IntervalStructure {
    pub fn build(sites: ConvexSequence, mode: Mode) -> Result<Self> {
        let n = sites.len();
        if n == 0 {
            return Err(Error::BadParameter("no sites".into()));
        }
        let pts = sites.points().to_vec();
        let mut s = IntervalStructure {
            mode,
            top_prefix: Some(PrefixStructure::labeled(mode, &pts, 1)?),
            top_suffix: Some(PrefixStructure::suffix(mode, &pts, 1)?),
            sites,
            nodes: Vec::new(),
            root: None,
        };
        s.root = s.build_node(&pts, 1, n)?;
        Ok(s)
    }

    pub fn from_points(pts: &[Point], mode: Mode) -> Result<Self> {
        IntervalStructure::build(ConvexSequence::new(pts.to_vec())?, mode)
    }

    fn build_node(&mut self, pts: &[Point], lo: usize, hi: usize) -> Result<Option<usize>> {
        if hi - lo < 2 {
            return Ok(None);
        }
        let mid = (lo + hi) / 2;
        let left_half = PrefixStructure::suffix(self.mode, &pts[lo - 1..mid], lo)?;
        let right_half = PrefixStructure::labeled(self.mode, &pts[mid..hi], mid + 1)?;
        let id = self.nodes.len();
        self.nodes.push(Node { lo, mid, hi, left_half, right_half, children: [None, None] });
        let a = self.build_node(pts, lo, mid)?;
        let b = self.build_node(pts, mid + 1, hi)?;
        self.nodes[id].children = [a, b];
        Ok(Some(id))
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn sites(&self) -> &ConvexSequence {
        &self.sites
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Recursion nodes as `(lo, mid, hi)` in build order.
    pub fn node_ranges(&self) -> Vec<(usize, usize, usize)> {
        self.nodes.iter().map(|n| (n.lo, n.mid, n.hi)).collect()
    }

    pub fn depth(&self) -> usize {
        fn go(s: &IntervalStructure, v: Option<usize>) -> usize {
            v.map_or(0, |v| 1 + s.nodes[v].children.iter().map(|&c| go(s, c)).max().unwrap())
        }
        go(self, self.root)
    }

    /// Stored persistence entries over every prefix and suffix structure.
    pub fn history_len(&self) -> usize {
        let top = self.top_prefix.iter().chain(&self.top_suffix).map(|p| p.history_len()).sum::<usize>();
        top + self.nodes.iter().map(|n| n.left_half.history_len() + n.right_half.history_len()).sum::<usize>()
    }

    pub fn writes(&self) -> u64 {
        let top = self.top_prefix.iter().chain(&self.top_suffix).map(|p| p.writes()).sum::<u64>();
        top + self.nodes.iter().map(|n| n.left_half.writes() + n.right_half.writes()).sum::<u64>()
    }

    pub fn top_prefix(&self) -> &PrefixStructure {
        self.top_prefix.as_ref().unwrap()
    }

    fn better(&self, q: Point, a: usize, b: usize) -> usize {
        let p = self.sites.points();
        if self.mode.better(q, p[a - 1], a, p[b - 1], b) {
            a
        } else {
            b
        }
    }

    pub fn query(&self, q: Point, l: &DirectedLine) -> QueryOutcome {
        self.query_counted(q, l).0
    }

    pub fn query_counted(&self, q: Point, l: &DirectedLine) -> (QueryOutcome, Route) {
        let n = self.sites.len();
        if n < 3 {
            let best = (1..=n).filter(|&i| side_of_line(l, self.sites.site(i)) >= 0).reduce(|a, b| self.better(q, a, b));
            return (best.map_or(QueryOutcome::EmptyHalfplane, QueryOutcome::Site), Route::default());
        }
        match left_interval(self.sites.points(), l) {
            LeftInterval::Empty => (QueryOutcome::EmptyHalfplane, Route::default()),
            LeftInterval::Full => {
                let best = self.top_prefix().query_prefix(n, q).expect("full prefix");
                (QueryOutcome::Site(best), Route { steps: 0, subqueries: 1 })
            }
            LeftInterval::Interval(i, j) => {
                let (best, route) = self.route(i, j, q).expect("interval from a line is valid");
                (QueryOutcome::Site(best), route)
            }
        }
    }

    /// Best site in the cyclic interval `i..=j`.
    pub fn query_interval(&self, i: usize, j: usize, q: Point) -> Result<usize> {
        self.route(i, j, q).map(|r| r.0)
    }

    pub fn query_interval_counted(&self, i: usize, j: usize, q: Point) -> Result<(usize, Route)> {
        self.route(i, j, q)
    }

    fn route(&self, i: usize, j: usize, q: Point) -> Result<(usize, Route)> {
        let n = self.sites.len();
        if i == 0 || j == 0 || i > n || j > n {
            return Err(Error::BadInterval(i, j));
        }
        let pre = self.top_prefix();
        let suf = self.top_suffix.as_ref().unwrap();
        let one = |best| Ok((best, Route { steps: 0, subqueries: 1 }));
        if j + 1 == i || (i == 1 && j == n) {
            return one(pre.query_prefix(n, q)?);
        }
        if i > j {
            let a = suf.query_suffix(i, q)?;
            let b = pre.query_prefix(j, q)?;
            return Ok((self.better(q, a, b), Route { steps: 0, subqueries: 2 }));
        }
        if i == 1 {
            return one(pre.query_prefix(j, q)?);
        }
        if j == n {
            return one(suf.query_suffix(i, q)?);
        }
        let mut route = Route::default();
        let mut v = self.root;
        while let Some(id) = v {
            let node = &self.nodes[id];
            route.steps += 1;
            assert!(node.lo < i && j < node.hi, "interval {i}..{j} reached node {}..{}", node.lo, node.hi);
            if j < node.mid {
                v = node.children[0];
                continue;
            }
            if i > node.mid + 1 {
                v = node.children[1];
                continue;
            }
            let mut best = None;
            if i <= node.mid {
                route.subqueries += 1;
                best = Some(node.left_half.query_suffix(i, q)?);
            }
            if j > node.mid {
                route.subqueries += 1;
                let b = node.right_half.query_prefix(j - node.mid, q)?;
                best = Some(best.map_or(b, |a| self.better(q, a, b)));
            }
            return Ok((best.unwrap(), route));
        }
        unreachable!("interval {i}..{j} strictly inside 1..{n} always meets a midpoint")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad() -> Vec<Point> {
        vec![Point::new(0, 0), Point::new(4, 0), Point::new(5, 3), Point::new(1, 4)]
    }

    #[test]
    fn quad_queries() {
        let far = IntervalStructure::from_points(&quad(), Mode::Farthest).unwrap();
        let near = IntervalStructure::from_points(&quad(), Mode::Nearest).unwrap();
        let l = DirectedLine::new(Point::new(-9, 2), Point::new(9, 2)).unwrap();
        let o = Point::new(0, 0);
        assert_eq!(far.query(o, &l), QueryOutcome::Site(3));
        assert_eq!(near.query(o, &l), QueryOutcome::Site(4));
        let up = DirectedLine::new(Point::new(-9, 9), Point::new(9, 9)).unwrap();
        assert_eq!(far.query(o, &up), QueryOutcome::EmptyHalfplane);
        assert_eq!(far.query_interval(3, 4, o).unwrap(), 3);
        assert_eq!(far.query_interval(1, 1, Point::new(7, -3)).unwrap(), 1);
        assert_eq!(far.query_interval(2, 1, Point::new(10, 10)).unwrap(), 1);
        assert!(far.query_interval(0, 2, o).is_err());
        assert_eq!(far.node_ranges(), vec![(1, 2, 4)]);
    }

    #[test]
    fn tiny_sets() {
        let one = IntervalStructure::from_points(&[Point::new(3, 3)], Mode::Farthest).unwrap();
        let l = DirectedLine::new(Point::new(0, 0), Point::new(1, 0)).unwrap();
        assert_eq!(one.query(Point::new(0, 0), &l), QueryOutcome::Site(1));
        let r = DirectedLine::new(Point::new(1, 0), Point::new(0, 0)).unwrap();
        assert_eq!(one.query(Point::new(0, 0), &r), QueryOutcome::EmptyHalfplane);
        let two = IntervalStructure::from_points(&[Point::new(0, 0), Point::new(4, 0)], Mode::Nearest).unwrap();
        assert_eq!(two.query(Point::new(3, 9), &l), QueryOutcome::Site(2));
        assert_eq!(two.query(Point::new(1, 9), &l), QueryOutcome::Site(1));
    }
}
