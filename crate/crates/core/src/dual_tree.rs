//! Binary-tree dual of the farthest- or nearest-point Delaunay triangulation
//! of a counterclockwise convex point stream.
//!
//! Node with key `j` is the triangle `(i, j, k)`, `i < j < k`. Its left child
//! lies across the diagonal `(i, j)`, its right child across `(j, k)`, and the
//! edge to its parent is `(i, k)`. The root triangle owns the hull edge
//! `(1, n)`. Edge marks are the two sites of the diagonal, so they are implied
//! by the triangle and never stored separately.

use crate::error::{Error, Result};
use crate::flarb::{FlarbOutcome, FlarbTree};
use crate::geom::{angle_cmp, check_append, circumcenter, incircle, incircle_conflict, ConvexSequence, Mode, Point};

use std::cmp::Ordering;

/// Read access to a polygon by 1-based index.
pub trait Sites {
    fn count(&self) -> usize;
    fn at(&self, i: usize) -> Point;
}

impl Sites for [Point] {
    fn count(&self) -> usize {
        self.len()
    }
    fn at(&self, i: usize) -> Point {
        self[i - 1]
    }
}

impl Sites for Vec<Point> {
    fn count(&self) -> usize {
        self.len()
    }
    fn at(&self, i: usize) -> Point {
        self[i - 1]
    }
}

/// The first `len` sites of a slice.
#[derive(Clone, Copy)]
pub struct Prefix<'a> {
    pub pts: &'a [Point],
    pub len: usize,
}

impl Sites for Prefix<'_> {
    fn count(&self) -> usize {
        self.len
    }
    fn at(&self, i: usize) -> Point {
        self.pts[i - 1]
    }
}

/// `len` consecutive sites of a cyclic sequence, starting at 0-based `start`.
#[derive(Clone, Copy)]
pub struct Cyclic<'a> {
    pub pts: &'a [Point],
    pub start: usize,
    pub len: usize,
}

impl Sites for Cyclic<'_> {
    fn count(&self) -> usize {
        self.len
    }
    fn at(&self, i: usize) -> Point {
        let n = self.pts.len();
        self.pts[(self.start + i - 1) % n]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sector {
    Parent,
    Left,
    Right,
}

/// Direction of a ray from any Voronoi vertex that stays inside the region
/// of site `s`: the outward normal cone at `s` (inward for farthest).
fn region_ray<S: Sites + ?Sized>(sites: &S, s: usize, mode: Mode) -> (i128, i128) {
    let t = sites.count();
    let prev = if s == 1 { t } else { s - 1 };
    let next = if s == t { 1 } else { s + 1 };
    let (a, b, c) = (sites.at(prev), sites.at(s), sites.at(next));
    let ex = (b.x - a.x + c.x - b.x) as i128;
    let ey = (b.y - a.y + c.y - b.y) as i128;
    let d = (ey, -ex);
    match mode {
        Mode::Nearest => d,
        Mode::Farthest => (-d.0, -d.1),
    }
}

/// Which component of `T - node` holds the region containing `q`.
///
/// The three rays split the plane around the circumcenter of `(i, j, k)`;
/// rays run into the regions of `i`, `j`, `k`. A point on the ray of `i` or
/// `k`, or at the center, goes to the parent; on the ray of `j`, to the left.
pub fn sector<S: Sites + ?Sized>(sites: &S, tri: [usize; 3], q: Point, mode: Mode) -> Sector {
    let [i, j, k] = tri;
    let c = circumcenter(sites.at(i), sites.at(j), sites.at(k)).expect("triangle is not degenerate");
    let w = c.offset_to(q);
    if w == (0, 0) {
        return Sector::Parent;
    }
    let ri = region_ray(sites, i, mode);
    let rj = region_ray(sites, j, mode);
    let rk = region_ray(sites, k, mode);
    debug_assert_eq!(angle_cmp(ri, rj, rk), Ordering::Less);
    let w_cross_ri = ri.0 * w.1 - ri.1 * w.0;
    if w_cross_ri == 0 && ri.0 * w.0 + ri.1 * w.1 > 0 {
        return Sector::Parent;
    }
    match angle_cmp(ri, w, rj) {
        Ordering::Less | Ordering::Equal => Sector::Left,
        Ordering::Greater => match angle_cmp(ri, w, rk) {
            Ordering::Less => Sector::Right,
            _ => Sector::Parent,
        },
    }
}

/// Better of two sites for `q`, smaller label on ties. Labels are 1-based.
pub fn best_of<S: Sites + ?Sized>(sites: &S, mode: Mode, q: Point, a: usize, b: usize) -> usize {
    if mode.better(q, sites.at(a), a, sites.at(b), b) {
        a
    } else {
        b
    }
}

/// Brute-force best site of a view, smallest label on ties.
pub fn scan_best<S: Sites + ?Sized>(sites: &S, mode: Mode, q: Point) -> usize {
    (2..=sites.count()).fold(1, |best, i| best_of(sites, mode, q, i, best))
}

#[derive(Clone, Debug, Default)]
pub struct Insertion {
    /// Node ids of the conflict set, root first.
    pub anchored: Vec<usize>,
    pub flarb: FlarbOutcome,
}

#[derive(Clone, Debug)]
pub struct DualTree {
    mode: Mode,
    sites: ConvexSequence,
    tree: FlarbTree,
    tri: Vec<[usize; 3]>,
}

impl DualTree {
    pub fn new(mode: Mode) -> Self {
        DualTree { mode, sites: ConvexSequence::new(Vec::new()).unwrap(), tree: FlarbTree::new(), tri: Vec::new() }
    }

    pub fn from_points(mode: Mode, pts: &[Point]) -> Result<Self> {
        let mut t = DualTree::new(mode);
        for &p in pts {
            t.insert_ccw(p)?;
        }
        Ok(t)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn sites(&self) -> &[Point] {
        self.sites.points()
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn flarb_tree(&self) -> &FlarbTree {
        &self.tree
    }

    /// Node ids are `key - 2`.
    pub fn key(&self, v: usize) -> usize {
        v + 2
    }

    pub fn node_of_key(&self, key: usize) -> usize {
        key - 2
    }

    pub fn triangle(&self, v: usize) -> [usize; 3] {
        self.tri[v]
    }

    pub fn root(&self) -> Option<usize> {
        self.tree.root()
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.tree.parent(v)
    }

    pub fn left(&self, v: usize) -> Option<usize> {
        self.tree.left(v)
    }

    pub fn right(&self, v: usize) -> Option<usize> {
        self.tree.right(v)
    }

    pub fn node_count(&self) -> usize {
        self.tri.len()
    }

    /// Marks `(left, right)` of the edge from `v` up to its parent, or of
    /// the root ray.
    pub fn parent_edge_marks(&self, v: usize) -> (usize, usize) {
        let [i, _, k] = self.tri[v];
        (i, k)
    }

    pub fn triangles(&self) -> Vec<[usize; 3]> {
        self.tree.inorder().into_iter().map(|v| self.tri[v]).collect()
    }

    pub fn inorder_keys(&self) -> Vec<usize> {
        self.tree.inorder().into_iter().map(|v| self.key(v)).collect()
    }

    fn conflicts(&self, v: usize, p: Point) -> Result<bool> {
        let [i, j, k] = self.tri[v];
        let s = &self.sites;
        let (a, b, c) = (s.site(i), s.site(j), s.site(k));
        if incircle(a, b, c, p) == 0 {
            return Err(Error::Cocircular { index: s.len() + 1 });
        }
        Ok(incircle_conflict(a, b, c, p, self.mode))
    }

    /// Nodes whose triangle conflicts with `p`, found from the root.
    pub fn conflict_set(&self, p: Point) -> Result<Vec<usize>> {
        let mut anchored = Vec::new();
        if let Some(root) = self.tree.root() {
            let mut stack = vec![root];
            while let Some(v) = stack.pop() {
                if self.conflicts(v, p)? {
                    anchored.push(v);
                    stack.extend(self.tree.left(v));
                    stack.extend(self.tree.right(v));
                }
            }
        }
        Ok(anchored)
    }

    pub fn insert_ccw(&mut self, p: Point) -> Result<Insertion> {
        check_append(self.sites.points(), p)?;
        let n = self.sites.len();
        if n < 2 {
            self.sites.push(p)?;
            return Ok(Insertion::default());
        }
        let anchored = self.conflict_set(p)?;
        let r = self.tree.add_node();
        debug_assert_eq!(r, n - 2);
        self.tri.push([0; 3]);
        let out = self.tree.flarb(&anchored, r)?;
        let mut prev = 1;
        for &v in &out.path {
            let key = self.key(v);
            self.tri[v] = [prev, key, n + 1];
            prev = key;
        }
        debug_assert!(out.slots.iter().zip(&out.path).all(|(s, &v)| {
            s.is_none_or(|c| {
                let [i, _, k] = self.tri[c];
                let [a, b, _] = self.tri[v];
                (i, k) == (a, b)
            })
        }));
        self.sites.push(p)?;
        Ok(Insertion { anchored, flarb: out })
    }

    pub fn sector_of(&self, v: usize, q: Point) -> Sector {
        sector(self.sites.points(), self.tri[v], q, self.mode)
    }

    /// Best site for `q` by walking down from the root.
    pub fn locate(&self, q: Point) -> usize {
        let s = self.sites.points();
        match s.len() {
            0 => panic!("locate on an empty tree"),
            1 => return 1,
            2 => return best_of(s, self.mode, q, 1, 2),
            _ => {}
        }
        let mut v = self.tree.root().unwrap();
        loop {
            let [i, j, k] = self.tri[v];
            let (a, b) = match self.sector_of(v, q) {
                Sector::Parent => (i, k),
                Sector::Left => match self.tree.left(v) {
                    Some(c) => {
                        v = c;
                        continue;
                    }
                    None => (i, j),
                },
                Sector::Right => match self.tree.right(v) {
                    Some(c) => {
                        v = c;
                        continue;
                    }
                    None => (j, k),
                },
            };
            return best_of(s, self.mode, q, a, b);
        }
    }
}
