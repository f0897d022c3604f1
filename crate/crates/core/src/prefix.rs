//! Proximity queries on any prefix of a counterclockwise insertion sequence.
//!
//! The dual tree is maintained ephemerally and every insertion is mirrored
//! into a persistent grappa forest, one version per prefix. The forest holds
//! a sentinel vertex above the root, one vertex per triangle and one leaf per
//! hull edge, so every Voronoi edge of the prefix is a forest edge marked by
//! the two sites it separates.

use crate::dual_tree::{sector, DualTree, Prefix, Sector};
use crate::error::{Error, Result};
use crate::flarb::Side;
use crate::geom::{check_append, Mode, Point};
use crate::grappa::{GrappaForest, Oracle, OracleAnswer, ProbeEdge, Vertex};
use crate::persistence::VersionId;

const SENTINEL: Vertex = 0;

fn node_vertex(key: usize) -> Vertex {
    2 * key
}

fn hull_vertex(a: usize) -> Vertex {
    2 * a + 1
}

/// Counts for one insertion.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PushStats {
    pub delta: usize,
    /// Change of the flarb potential.
    pub delta_phi: f64,
    pub cuts: usize,
    pub links: usize,
    pub writes: u64,
}

type Relation = (Vertex, Side, Vertex, u32);

struct SectorOracle<'a> {
    sites: Prefix<'a>,
    mode: Mode,
    q: Point,
}

impl Oracle for SectorOracle<'_> {
    fn probe(&self, _v: Vertex, up: &ProbeEdge, left: &ProbeEdge) -> OracleAnswer {
        let tri = [up.lmark as usize, left.rmark as usize, up.rmark as usize];
        match sector(&self.sites, tri, self.q, self.mode) {
            Sector::Parent => OracleAnswer::InFirst,
            Sector::Left => OracleAnswer::InSecond,
            Sector::Right => OracleAnswer::InThird,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PrefixStructure {
    mode: Mode,
    dual: DualTree,
    grappa: GrappaForest,
    versions: Vec<VersionId>,
    labels: Vec<usize>,
    reflected: bool,
    stats: Vec<PushStats>,
}

impl PrefixStructure {
    pub fn new(mode: Mode) -> Self {
        PrefixStructure {
            mode,
            dual: DualTree::new(mode),
            grappa: GrappaForest::persistent(),
            versions: Vec::new(),
            labels: Vec::new(),
            reflected: false,
            stats: Vec::new(),
        }
    }

    pub fn from_points(mode: Mode, pts: &[Point]) -> Result<Self> {
        let mut s = PrefixStructure::new(mode);
        for &p in pts {
            s.push(p)?;
        }
        Ok(s)
    }

    /// Prefix structure over `pts` whose first site has label `first_label`.
    pub fn labeled(mode: Mode, pts: &[Point], first_label: usize) -> Result<Self> {
        let mut s = PrefixStructure::new(mode);
        for (i, &p) in pts.iter().enumerate() {
            s.push_labeled(p, first_label + i)?;
        }
        Ok(s)
    }

    /// Structure answering "best of `pts[s..]`" queries, built by reflecting
    /// across the x-axis and inserting in reverse. `first_label` is the label
    /// of `pts[0]`.
    pub fn suffix(mode: Mode, pts: &[Point], first_label: usize) -> Result<Self> {
        let mut s = PrefixStructure::new(mode);
        s.reflected = true;
        for (i, &p) in pts.iter().enumerate().rev() {
            s.push_labeled(p.reflect(), first_label + i)?;
        }
        Ok(s)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dual(&self) -> &DualTree {
        &self.dual
    }

    pub fn grappa(&self) -> &GrappaForest {
        &self.grappa
    }

    pub fn version_of_prefix(&self, t: usize) -> Option<VersionId> {
        t.checked_sub(1).and_then(|i| self.versions.get(i).copied())
    }

    pub fn stats(&self) -> &[PushStats] {
        &self.stats
    }

    /// Stored history entries of the persistent forest.
    pub fn history_len(&self) -> usize {
        self.grappa.history_len()
    }

    pub fn writes(&self) -> u64 {
        self.grappa.writes()
    }

    pub fn push(&mut self, p: Point) -> Result<()> {
        let label = self.len() + 1;
        self.push_labeled(p, label)
    }

    fn ext_child(&self, v: usize, side: Side) -> Vertex {
        let d = &self.dual;
        match (side, d.flarb_tree().child(v, side)) {
            (_, Some(c)) => node_vertex(d.key(c)),
            (Side::Left, None) => hull_vertex(d.triangle(v)[0]),
            (Side::Right, None) => hull_vertex(d.triangle(v)[1]),
        }
    }

    fn marks_of(&self, c: Vertex) -> (u32, u32) {
        if c % 2 == 1 {
            let a = (c - 1) / 2;
            (a as u32, a as u32 + 1)
        } else {
            let (i, k) = self.dual.parent_edge_marks(self.dual.node_of_key(c / 2));
            (i as u32, k as u32)
        }
    }

    /// Forest edges below the sentinel and the given dual nodes.
    fn relations(&self, nodes: &[usize]) -> Vec<Relation> {
        let mut out = Vec::with_capacity(2 * nodes.len() + 1);
        let top = match self.dual.root() {
            Some(r) => node_vertex(self.dual.key(r)),
            None if self.len() == 2 => hull_vertex(1),
            None => return out,
        };
        out.push((SENTINEL, Side::Right, top, self.marks_of(top).0));
        for &v in nodes {
            for side in [Side::Left, Side::Right] {
                let c = self.ext_child(v, side);
                out.push((node_vertex(self.dual.key(v)), side, c, self.marks_of(c).0));
            }
        }
        out.sort_unstable();
        out
    }

    fn push_labeled(&mut self, p: Point, label: usize) -> Result<()> {
        check_append(self.dual.sites(), p)?;
        let anchored = self.dual.conflict_set(p)?;
        let before = self.relations(&anchored);
        let n = self.len();
        let writes0 = self.grappa.writes();
        let ins = self.dual.insert_ccw(p)?;
        debug_assert_eq!(ins.anchored, anchored);
        self.labels.push(label);
        let v = self.grappa.begin_version();
        let mut st = PushStats { delta: ins.flarb.delta.count(), delta_phi: ins.flarb.delta_phi, ..Default::default() };
        match n {
            0 => {
                self.grappa.make_tree(SENTINEL)?;
            }
            1 => {
                self.grappa.make_tree(hull_vertex(1))?;
                self.grappa.link(SENTINEL, hull_vertex(1), Side::Right, 1, 2)?;
                st.links = 1;
            }
            _ => {
                let after = self.relations(&ins.flarb.path);
                for r in before.iter().filter(|r| after.binary_search(r).is_err()) {
                    self.grappa.cut(r.0, r.2)?;
                    st.cuts += 1;
                }
                self.grappa.make_tree(node_vertex(n))?;
                self.grappa.make_tree(hull_vertex(n))?;
                for r in after.iter().filter(|r| before.binary_search(r).is_err()) {
                    let (lm, rm) = self.marks_of(r.2);
                    self.grappa.link(r.0, r.2, r.1, lm, rm)?;
                    st.links += 1;
                }
                self.grappa.mark_right_spine(SENTINEL, n as u32 + 1)?;
            }
        }
        st.writes = self.grappa.writes() - writes0;
        self.stats.push(st);
        self.versions.push(v);
        Ok(())
    }

    fn better(&self, q: Point, a: usize, b: usize) -> usize {
        let pts = self.dual.sites();
        if self.mode.better(q, pts[a - 1], self.labels[a - 1], pts[b - 1], self.labels[b - 1]) {
            a
        } else {
            b
        }
    }

    /// Third site of the triangle at a forest vertex, if it is one.
    fn apex(&self, u: Vertex, at: VersionId) -> Option<usize> {
        if u == SENTINEL || u % 2 == 1 {
            return None;
        }
        let l = self.grappa.child(u, Side::Left, at)?;
        Some(self.grappa.effective_marks(l, at).ok()?.1 as usize)
    }

    /// Best local index among the first `t` sites for `q` given in this
    /// structure's coordinates.
    fn best_local(&self, t: usize, q: Point) -> Result<usize> {
        if t == 0 || t > self.len() {
            return Err(Error::PrefixOutOfRange { t, n: self.len() });
        }
        if t <= 2 {
            return Ok(if t == 1 { 1 } else { self.better(q, 1, 2) });
        }
        let at = self.versions[t - 1];
        let oracle = SectorOracle { sites: Prefix { pts: self.dual.sites(), len: t }, mode: self.mode, q };
        let res = self.grappa.oracle_search(SENTINEL, &oracle, at)?;
        let mut best = self.better(q, res.lmark as usize, res.rmark as usize);
        for u in [res.parent, res.child] {
            if let Some(j) = self.apex(u, at) {
                best = self.better(q, best, j);
            }
        }
        Ok(best)
    }

    /// Best site among the first `t` inserted, by label.
    pub fn query_prefix(&self, t: usize, q: Point) -> Result<usize> {
        let q = if self.reflected { q.reflect() } else { q };
        Ok(self.labels[self.best_local(t, q)? - 1])
    }

    /// For a suffix structure: best site with label at least `s`.
    pub fn query_suffix(&self, s: usize, q: Point) -> Result<usize> {
        let n = self.len();
        let last = self.labels.first().copied().unwrap_or(0);
        if s > last || s + n <= last {
            return Err(Error::PrefixOutOfRange { t: s, n });
        }
        self.query_prefix(last - s + 1, q)
    }

    /// Forest edges of prefix `t` as `(parent, side, child, lmark, rmark)`.
    pub fn snapshot(&self, t: usize) -> Vec<(Vertex, Side, Vertex, u32, u32)> {
        match self.version_of_prefix(t) {
            Some(at) => self.grappa.edges(SENTINEL, at),
            None => Vec::new(),
        }
    }
}
