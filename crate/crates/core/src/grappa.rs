//! Marked fixed-topology binary trees with link, cut, right-spine marking
//! and oracle search.
//!
//! The forest is kept as a heavy-path decomposition: each vertex continues
//! its path into a largest child. Every path is an AVL tree ordered by
//! depth, augmented with sizes and a lazy right-mark tag that overrides the
//! right marks of the whole subtree. All fields live in fat-node histories,
//! so every read can target an earlier version.

use crate::error::{Error, Result};
use crate::flarb::Side;
use crate::persistence::{History, VersionId, VersionStore};

pub type Vertex = usize;
pub type Mark = u32;

const NIL: u32 = u32::MAX;

#[derive(Clone, Copy)]
enum F {
    Exists,
    TPar,
    TL,
    TR,
    Heavy,
    LMark,
    RMark,
    Lw,
    BL,
    BR,
    BP,
    Height,
    Sum,
    Hmin,
    AnyLeft,
    Tag,
}

const NF: usize = 16;
const INIT: [u32; NF] = [0, NIL, NIL, NIL, NIL, 0, 0, 0, NIL, NIL, NIL, 1, 1, 0, 0, NIL];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dir {
    Up,
    Left,
    Right,
}

/// An edge offered to the oracle, named by its child endpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProbeEdge {
    pub child: Vertex,
    pub parent: Vertex,
    /// Where the edge leaves the probed vertex.
    pub dir: Dir,
    pub lmark: Mark,
    pub rmark: Mark,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleAnswer {
    InFirst,
    InSecond,
    InThird,
}

/// Tells, for a vertex and two of its edges, which component of `T - v`
/// holds the target edge: the one through the first edge, through the
/// second, or the remaining one.
pub trait Oracle {
    fn probe(&self, v: Vertex, first: &ProbeEdge, second: &ProbeEdge) -> OracleAnswer;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchResult {
    pub parent: Vertex,
    pub child: Vertex,
    pub lmark: Mark,
    pub rmark: Mark,
    pub probes: usize,
}

#[derive(Clone, Debug, Default)]
pub struct GrappaForest {
    store: VersionStore,
    cells: Vec<History<u32>>,
}

impl GrappaForest {
    /// A forest whose writes all land in one version.
    pub fn new() -> Self {
        let mut f = GrappaForest::default();
        f.store.new_version();
        f
    }

    /// A forest with no open version; call `begin_version` before writing.
    pub fn persistent() -> Self {
        GrappaForest::default()
    }

    pub fn begin_version(&mut self) -> VersionId {
        self.store.new_version()
    }

    pub fn version(&self) -> VersionId {
        self.store.current()
    }

    pub fn writes(&self) -> u64 {
        self.store.writes()
    }

    /// Total stored history entries over all fields.
    pub fn history_len(&self) -> usize {
        self.cells.iter().map(|h| h.len()).sum()
    }

    pub fn capacity(&self) -> usize {
        self.cells.len() / NF
    }

    // ---- raw field access

    #[inline]
    fn r(&self, v: u32, f: F) -> u32 {
        self.cells[v as usize * NF + f as usize].latest()
    }

    #[inline]
    fn ra(&self, v: u32, f: F, at: VersionId) -> u32 {
        self.cells[v as usize * NF + f as usize].read(at)
    }

    #[inline]
    fn w(&mut self, v: u32, f: F, val: u32) {
        let cell = &mut self.cells[v as usize * NF + f as usize];
        if cell.latest() != val {
            cell.write(&mut self.store, val).expect("write outside an open version");
        }
    }

    fn lw(&self, v: u32) -> i64 {
        self.r(v, F::Lw) as i64
    }

    fn weight(&self, v: u32) -> i64 {
        1 + self.lw(v)
    }

    fn height(&self, v: u32) -> u32 {
        if v == NIL {
            0
        } else {
            self.r(v, F::Height)
        }
    }

    fn sum(&self, v: u32) -> i64 {
        if v == NIL {
            0
        } else {
            self.r(v, F::Sum) as i64
        }
    }

    fn hmin(&self, v: u32) -> i64 {
        self.r(v, F::Hmin) as i32 as i64
    }

    fn is_left(&self, v: u32) -> bool {
        let p = self.r(v, F::TPar);
        p != NIL && self.r(p, F::TL) == v
    }

    fn exists_at(&self, v: Vertex, at: VersionId) -> bool {
        v < self.capacity() && self.ra(v as u32, F::Exists, at) == 1
    }

    fn open(&self) -> Result<()> {
        if self.store.current() == 0 {
            Err(Error::NoOpenVersion)
        } else {
            Ok(())
        }
    }

    fn known(&self, v: Vertex) -> Result<u32> {
        if self.exists_at(v, VersionId::MAX) {
            Ok(v as u32)
        } else {
            Err(Error::UnknownVertex(v))
        }
    }

    // ---- path trees

    /// Recomputes the augmentation of `x` from its children.
    fn update(&mut self, x: u32) {
        let (l, r) = (self.r(x, F::BL), self.r(x, F::BR));
        let h = 1 + self.height(l).max(self.height(r));
        let wx = self.weight(x);
        let (sl, sr) = (self.sum(l), self.sum(r));
        let mut hm = sr - self.lw(x);
        if l != NIL {
            hm = hm.min(self.hmin(l) + wx + sr);
        }
        if r != NIL {
            hm = hm.min(self.hmin(r));
        }
        let any = self.is_left(x) || (l != NIL && self.r(l, F::AnyLeft) == 1) || (r != NIL && self.r(r, F::AnyLeft) == 1);
        self.w(x, F::Height, h);
        self.w(x, F::Sum, (sl + wx + sr) as u32);
        self.w(x, F::Hmin, hm as i32 as u32);
        self.w(x, F::AnyLeft, any as u32);
    }

    fn fix_up(&mut self, mut x: u32) {
        while x != NIL {
            self.update(x);
            x = self.r(x, F::BP);
        }
    }

    fn push(&mut self, x: u32) {
        let t = self.r(x, F::Tag);
        if t == NIL {
            return;
        }
        self.w(x, F::RMark, t);
        for c in [self.r(x, F::BL), self.r(x, F::BR)] {
            if c != NIL {
                self.w(c, F::Tag, t);
            }
        }
        self.w(x, F::Tag, NIL);
    }

    fn bst_root(&self, mut x: u32) -> u32 {
        loop {
            let p = self.r(x, F::BP);
            if p == NIL {
                return x;
            }
            x = p;
        }
    }

    fn first(&self, mut x: u32) -> u32 {
        loop {
            let l = self.r(x, F::BL);
            if l == NIL {
                return x;
            }
            x = l;
        }
    }

    fn last(&self, mut x: u32) -> u32 {
        loop {
            let r = self.r(x, F::BR);
            if r == NIL {
                return x;
            }
            x = r;
        }
    }

    fn path_top(&self, x: u32) -> u32 {
        self.first(self.bst_root(x))
    }

    /// Subtree size of `v` in the represented tree.
    fn size(&self, v: u32) -> i64 {
        let mut s = self.weight(v) + self.sum(self.r(v, F::BR));
        let mut x = v;
        let mut p = self.r(x, F::BP);
        while p != NIL {
            if self.r(p, F::BL) == x {
                s += self.weight(p) + self.sum(self.r(p, F::BR));
            }
            x = p;
            p = self.r(p, F::BP);
        }
        s
    }

    fn set_child(&mut self, p: u32, old: u32, new: u32) {
        if self.r(p, F::BL) == old {
            self.w(p, F::BL, new);
        } else {
            self.w(p, F::BR, new);
        }
    }

    /// Rotates `x` above its parent.
    fn rotate_up(&mut self, x: u32) {
        let p = self.r(x, F::BP);
        let g = self.r(p, F::BP);
        self.push(p);
        self.push(x);
        if self.r(p, F::BL) == x {
            let b = self.r(x, F::BR);
            self.w(p, F::BL, b);
            self.w(x, F::BR, p);
            if b != NIL {
                self.w(b, F::BP, p);
            }
        } else {
            let b = self.r(x, F::BL);
            self.w(p, F::BR, b);
            self.w(x, F::BL, p);
            if b != NIL {
                self.w(b, F::BP, p);
            }
        }
        self.w(p, F::BP, x);
        self.w(x, F::BP, g);
        if g != NIL {
            self.set_child(g, p, x);
        }
        self.update(p);
        self.update(x);
    }

    /// Restores the AVL condition at `a`; returns the subtree's new root.
    fn rebalance(&mut self, a: u32) -> u32 {
        let (l, r) = (self.r(a, F::BL), self.r(a, F::BR));
        let (hl, hr) = (self.height(l), self.height(r));
        if hl > hr + 1 {
            if self.height(self.r(l, F::BL)) >= self.height(self.r(l, F::BR)) {
                self.rotate_up(l);
                l
            } else {
                let lr = self.r(l, F::BR);
                self.rotate_up(lr);
                self.rotate_up(lr);
                lr
            }
        } else if hr > hl + 1 {
            if self.height(self.r(r, F::BR)) >= self.height(self.r(r, F::BL)) {
                self.rotate_up(r);
                r
            } else {
                let rl = self.r(r, F::BL);
                self.rotate_up(rl);
                self.rotate_up(rl);
                rl
            }
        } else {
            self.update(a);
            a
        }
    }

    /// Concatenates path trees `l`, the single node `k`, and `r`.
    fn join3(&mut self, l: u32, k: u32, r: u32) -> u32 {
        self.push(k);
        let (hl, hr) = (self.height(l), self.height(r));
        if hl <= hr + 1 && hr <= hl + 1 {
            self.w(k, F::BL, l);
            self.w(k, F::BR, r);
            self.w(k, F::BP, NIL);
            for c in [l, r] {
                if c != NIL {
                    self.w(c, F::BP, k);
                }
            }
            self.update(k);
            return k;
        }
        let taller_left = hl > hr;
        let (big, small, hs) = if taller_left { (l, r, hr) } else { (r, l, hl) };
        let (down, across) = if taller_left { (F::BR, F::BL) } else { (F::BL, F::BR) };
        let mut parent = NIL;
        let mut c = big;
        while c != NIL && self.height(c) > hs + 1 {
            self.push(c);
            parent = c;
            c = self.r(c, down);
        }
        // k takes c's place, with c on the inner side
        self.w(k, across, c);
        self.w(k, down, small);
        if c != NIL {
            self.w(c, F::BP, k);
        }
        if small != NIL {
            self.w(small, F::BP, k);
        }
        self.w(parent, down, k);
        self.w(k, F::BP, parent);
        self.update(k);
        let mut x = parent;
        let mut top = x;
        while x != NIL {
            let y = self.rebalance(x);
            top = y;
            x = self.r(y, F::BP);
        }
        top
    }

    /// Cuts the path tree holding `v` into the part before `v` and the part
    /// after it; `v` is left alone.
    fn split_at(&mut self, v: u32) -> (u32, u32) {
        let mut anc = vec![v];
        let mut x = v;
        while self.r(x, F::BP) != NIL {
            x = self.r(x, F::BP);
            anc.push(x);
        }
        for &a in anc.iter().rev() {
            self.push(a);
        }
        let mut l = self.r(v, F::BL);
        let mut r = self.r(v, F::BR);
        for c in [l, r] {
            if c != NIL {
                self.w(c, F::BP, NIL);
            }
        }
        let mut p = self.r(v, F::BP);
        self.w(v, F::BL, NIL);
        self.w(v, F::BR, NIL);
        self.w(v, F::BP, NIL);
        self.update(v);
        let mut x = v;
        while p != NIL {
            let pp = self.r(p, F::BP);
            let from_right = self.r(p, F::BR) == x;
            let other = if from_right { self.r(p, F::BL) } else { self.r(p, F::BR) };
            if other != NIL {
                self.w(other, F::BP, NIL);
            }
            self.w(p, F::BL, NIL);
            self.w(p, F::BR, NIL);
            self.w(p, F::BP, NIL);
            if from_right {
                l = self.join3(other, p, l);
            } else {
                r = self.join3(r, p, other);
            }
            x = p;
            p = pp;
        }
        (l, r)
    }

    fn join(&mut self, l: u32, r: u32) -> u32 {
        if l == NIL {
            return r;
        }
        if r == NIL {
            return l;
        }
        let k = self.last(l);
        let (l2, _) = self.split_at(k);
        self.join3(l2, k, r)
    }

    /// Writes a stored right mark after clearing the tags above it.
    fn set_rmark(&mut self, v: u32, m: Mark) {
        let mut anc = vec![v];
        let mut x = v;
        while self.r(x, F::BP) != NIL {
            x = self.r(x, F::BP);
            anc.push(x);
        }
        for &a in anc.iter().rev() {
            self.push(a);
        }
        self.w(v, F::RMark, m);
    }

    // ---- heavy paths

    fn other_child(&self, v: u32, c: u32) -> u32 {
        let l = self.r(v, F::TL);
        if l == c {
            self.r(v, F::TR)
        } else {
            l
        }
    }

    /// Swaps the heavy and light child of `y`.
    fn flip(&mut self, y: u32) {
        let h = self.r(y, F::Heavy);
        let c = self.other_child(y, h);
        debug_assert!(c != NIL);
        let (l, rest) = self.split_at(y);
        let pc = self.bst_root(c);
        self.w(y, F::Heavy, c);
        self.w(y, F::Lw, self.sum(rest) as u32);
        self.join3(l, y, pc);
    }

    /// The deepest vertex on the path of `root` whose light child outweighs
    /// its heavy child.
    fn find_violation(&self, root: u32) -> Option<u32> {
        if self.hmin(root) >= 0 {
            return None;
        }
        let mut x = root;
        let mut after = 0i64;
        loop {
            let r = self.r(x, F::BR);
            let sr = self.sum(r);
            if r != NIL && self.hmin(r) + after < 0 {
                x = r;
                continue;
            }
            if sr + after - self.lw(x) < 0 {
                return Some(x);
            }
            after += self.weight(x) + sr;
            x = self.r(x, F::BL);
        }
    }

    fn fix_path(&mut self, mut v: u32) {
        while let Some(y) = self.find_violation(self.bst_root(v)) {
            self.flip(y);
            v = y;
        }
    }

    fn flip_if_lighter(&mut self, y: u32) {
        let h = self.r(y, F::Heavy);
        if h != NIL && self.size(h) < self.lw(y) {
            self.flip(y);
        }
    }

    // ---- public operations

    pub fn make_tree(&mut self, v: Vertex) -> Result<Vertex> {
        self.open()?;
        if self.exists_at(v, VersionId::MAX) {
            return Err(Error::VertexExists(v));
        }
        if v >= NIL as usize {
            return Err(Error::BadParameter("vertex id too large".into()));
        }
        while self.capacity() <= v {
            for init in INIT {
                self.cells.push(History::new(init));
            }
        }
        self.w(v as u32, F::Exists, 1);
        Ok(v)
    }

    pub fn exists(&self, v: Vertex, at: VersionId) -> bool {
        self.exists_at(v, at)
    }

    pub fn parent(&self, v: Vertex, at: VersionId) -> Option<Vertex> {
        let p = self.ra(v as u32, F::TPar, at);
        (p != NIL).then_some(p as usize)
    }

    pub fn child(&self, v: Vertex, side: Side, at: VersionId) -> Option<Vertex> {
        let f = if side == Side::Left { F::TL } else { F::TR };
        let c = self.ra(v as u32, f, at);
        (c != NIL).then_some(c as usize)
    }

    pub fn root_of(&self, v: Vertex, at: VersionId) -> Vertex {
        let mut x = v;
        while let Some(p) = self.parent(x, at) {
            x = p;
        }
        x
    }

    fn root_latest(&self, v: u32) -> u32 {
        let mut x = v;
        loop {
            let top = self.path_top(x);
            let p = self.r(top, F::TPar);
            if p == NIL {
                return top;
            }
            x = p;
        }
    }

    /// Makes `w` the `side` child of `v`, with marks on the new edge.
    pub fn link(&mut self, v: Vertex, w: Vertex, side: Side, lmark: Mark, rmark: Mark) -> Result<()> {
        self.open()?;
        let (v, w) = (self.known(v)?, self.known(w)?);
        if self.r(w, F::TPar) != NIL {
            return Err(Error::BadLink("child is not a root"));
        }
        let slot = if side == Side::Left { F::TL } else { F::TR };
        if self.r(v, slot) != NIL {
            return Err(Error::BadLink("slot is occupied"));
        }
        if self.root_latest(v) == w {
            return Err(Error::BadLink("both ends are in the same tree"));
        }
        self.w(w, F::TPar, v);
        self.w(v, slot, w);
        self.w(w, F::LMark, lmark);
        self.set_rmark(w, rmark);
        self.fix_up(w);
        let s = self.sum(self.bst_root(w));
        if self.r(v, F::Heavy) == NIL {
            self.w(v, F::Heavy, w);
            let (a, b) = (self.bst_root(v), self.bst_root(w));
            self.join(a, b);
        } else {
            self.w(v, F::Lw, (self.lw(v) + s) as u32);
            self.fix_up(v);
            self.flip_if_lighter(v);
        }
        let mut x = self.path_top(v);
        loop {
            let y = self.r(x, F::TPar);
            if y == NIL {
                break;
            }
            self.w(y, F::Lw, (self.lw(y) + s) as u32);
            self.fix_up(y);
            self.flip_if_lighter(y);
            x = self.path_top(y);
        }
        Ok(())
    }

    /// Removes the edge from `v` down to its child `w`.
    pub fn cut(&mut self, v: Vertex, w: Vertex) -> Result<()> {
        self.open()?;
        let (v, w) = (self.known(v)?, self.known(w)?);
        if self.r(w, F::TPar) != v {
            return Err(Error::MissingEdge(w as usize));
        }
        let s = self.size(w);
        let slot = if self.r(v, F::TL) == w { F::TL } else { F::TR };
        if self.r(v, F::Heavy) == w {
            let (l, _rest) = self.split_at(v);
            self.w(w, F::TPar, NIL);
            self.w(v, slot, NIL);
            self.fix_up(w);
            let c = self.other_child(v, NIL);
            let c = if c == NIL { self.r(v, F::TL).min(self.r(v, F::TR)) } else { c };
            if c != NIL {
                self.w(v, F::Heavy, c);
                self.w(v, F::Lw, 0);
                let pc = self.bst_root(c);
                self.join3(l, v, pc);
            } else {
                self.w(v, F::Heavy, NIL);
                self.join3(l, v, NIL);
            }
        } else {
            self.w(w, F::TPar, NIL);
            self.w(v, slot, NIL);
            self.fix_up(w);
            self.w(v, F::Lw, (self.lw(v) - s) as u32);
            self.fix_up(v);
        }
        let mut x = self.path_top(v);
        self.fix_path(v);
        loop {
            let y = self.r(x, F::TPar);
            if y == NIL {
                break;
            }
            self.w(y, F::Lw, (self.lw(y) - s) as u32);
            self.fix_up(y);
            x = self.path_top(y);
            self.fix_path(y);
        }
        Ok(())
    }

    /// Sets the right mark of every edge on the right spine below `root`.
    pub fn mark_right_spine(&mut self, root: Vertex, m: Mark) -> Result<()> {
        self.open()?;
        let mut x = self.known(root)?;
        if self.r(x, F::TPar) != NIL {
            return Err(Error::BadParameter(format!("vertex {root} is not a root")));
        }
        loop {
            let (l, r) = self.split_at(x);
            if r == NIL {
                self.join3(l, x, NIL);
                return Ok(());
            }
            if self.r(r, F::AnyLeft) == 0 {
                self.w(r, F::Tag, m);
                self.join3(l, x, r);
                return Ok(());
            }
            let z = self.first_left(r);
            let (r1, r2) = self.split_at(z);
            let y = if r1 == NIL {
                x
            } else {
                self.w(r1, F::Tag, m);
                self.last(r1)
            };
            let tail = self.join3(r1, z, r2);
            self.join3(l, x, tail);
            let c = self.r(y, F::TR);
            if c == NIL {
                return Ok(());
            }
            self.set_rmark(c, m);
            x = c;
        }
    }

    /// First node of the path tree that is a left child in the tree.
    fn first_left(&self, mut n: u32) -> u32 {
        loop {
            let l = self.r(n, F::BL);
            if l != NIL && self.r(l, F::AnyLeft) == 1 {
                n = l;
            } else if self.is_left(n) {
                return n;
            } else {
                n = self.r(n, F::BR);
            }
        }
    }

    /// Marks of the edge above `v`, resolving pending tags without writing.
    pub fn effective_marks(&self, v: Vertex, at: VersionId) -> Result<(Mark, Mark)> {
        if !self.exists_at(v, at) {
            return Err(Error::UnknownVertex(v));
        }
        let v = v as u32;
        if self.ra(v, F::TPar, at) == NIL {
            return Err(Error::MissingEdge(v as usize));
        }
        Ok((self.ra(v, F::LMark, at), self.eff_rmark(v, at)))
    }

    fn eff_rmark(&self, v: u32, at: VersionId) -> Mark {
        let mut best = NIL;
        let mut x = v;
        while x != NIL {
            let t = self.ra(x, F::Tag, at);
            if t != NIL {
                best = t;
            }
            x = self.ra(x, F::BP, at);
        }
        if best != NIL {
            best
        } else {
            self.ra(v, F::RMark, at)
        }
    }

    fn probe_edge(&self, child: u32, dir: Dir, at: VersionId) -> ProbeEdge {
        ProbeEdge {
            child: child as usize,
            parent: self.ra(child, F::TPar, at) as usize,
            dir,
            lmark: self.ra(child, F::LMark, at),
            rmark: self.eff_rmark(child, at),
        }
    }

    fn bst_root_at(&self, mut x: u32, at: VersionId) -> u32 {
        loop {
            let p = self.ra(x, F::BP, at);
            if p == NIL {
                return x;
            }
            x = p;
        }
    }

    /// Finds the edge the oracle points at, in the tree rooted at `root` as
    /// of version `at`. Read-only.
    pub fn oracle_search<O: Oracle + ?Sized>(&self, root: Vertex, oracle: &O, at: VersionId) -> Result<SearchResult> {
        if !self.exists_at(root, at) {
            return Err(Error::UnknownVertex(root));
        }
        let root = root as u32;
        if self.ra(root, F::TPar, at) != NIL {
            return Err(Error::BadParameter("search must start at a root".into()));
        }
        let lg = (usize::BITS - self.capacity().max(2).leading_zeros()) as usize;
        let budget = 2 * (lg + 2) * (lg + 2);
        let mut entry = root;
        let mut after: u32 = NIL;
        let mut x = self.bst_root_at(root, at);
        let mut probes = 0;
        loop {
            if x == NIL {
                let child = if after == NIL { entry } else { self.ra(after, F::Heavy, at) };
                if child == NIL || self.ra(child, F::TPar, at) == NIL {
                    return Err(Error::OracleDiverged);
                }
                let e = self.probe_edge(child, Dir::Up, at);
                return Ok(SearchResult { parent: e.parent, child: e.child, lmark: e.lmark, rmark: e.rmark, probes });
            }
            let mut edges = Vec::with_capacity(3);
            if self.ra(x, F::TPar, at) != NIL {
                edges.push(self.probe_edge(x, Dir::Up, at));
            }
            for (f, d) in [(F::TL, Dir::Left), (F::TR, Dir::Right)] {
                let c = self.ra(x, f, at);
                if c != NIL {
                    edges.push(self.probe_edge(c, d, at));
                }
            }
            let pick = match edges.len() {
                0 => return Err(Error::OracleDiverged),
                1 => edges[0],
                _ => {
                    probes += 1;
                    if probes > budget {
                        return Err(Error::OracleDiverged);
                    }
                    match oracle.probe(x as usize, &edges[0], &edges[1]) {
                        OracleAnswer::InFirst => edges[0],
                        OracleAnswer::InSecond => edges[1],
                        OracleAnswer::InThird => *edges.get(2).ok_or(Error::OracleDiverged)?,
                    }
                }
            };
            if pick.dir == Dir::Up {
                x = self.ra(x, F::BL, at);
            } else if pick.child as u32 == self.ra(x, F::Heavy, at) {
                after = x;
                x = self.ra(x, F::BR, at);
            } else {
                entry = pick.child as u32;
                after = NIL;
                x = self.bst_root_at(entry, at);
            }
        }
    }

    /// Edges `(parent, side, child, lmark, rmark)` of the tree rooted at
    /// `root`, in preorder.
    pub fn edges(&self, root: Vertex, at: VersionId) -> Vec<(Vertex, Side, Vertex, Mark, Mark)> {
        let mut out = Vec::new();
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            for side in [Side::Right, Side::Left] {
                if let Some(c) = self.child(v, side, at) {
                    let (l, r) = self.effective_marks(c, at).unwrap();
                    out.push((v, side, c, l, r));
                    stack.push(c);
                }
            }
        }
        out.reverse();
        out
    }

    /// Checks the representation against the explicit tree: sizes, heavy
    /// children, AVL balance, augmentations and the light-edge depth bound.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let n = self.capacity();
        let live: Vec<u32> = (0..n as u32).filter(|&v| self.r(v, F::Exists) == 1).collect();
        let mut size = vec![0i64; n];
        // explicit sizes, children before parents
        let mut order = Vec::new();
        for &v in &live {
            if self.r(v, F::TPar) == NIL {
                let mut st = vec![v];
                while let Some(x) = st.pop() {
                    order.push(x);
                    for f in [F::TL, F::TR] {
                        let c = self.r(x, f);
                        if c != NIL {
                            if self.r(c, F::TPar) != x {
                                return Err(format!("parent pointer of {c} is wrong"));
                            }
                            st.push(c);
                        }
                    }
                }
            }
        }
        for &x in order.iter().rev() {
            size[x as usize] =
                1 + [F::TL, F::TR].iter().map(|&f| self.r(x, f)).filter(|&c| c != NIL).map(|c| size[c as usize]).sum::<i64>();
        }
        for &v in &live {
            let (l, r, h) = (self.r(v, F::TL), self.r(v, F::TR), self.r(v, F::Heavy));
            let sz = |c: u32| if c == NIL { 0 } else { size[c as usize] };
            if (l != NIL || r != NIL) && h == NIL {
                return Err(format!("{v} has children but no heavy child"));
            }
            if h != NIL && h != l && h != r {
                return Err(format!("heavy child of {v} is not a child"));
            }
            if h != NIL && sz(h) < sz(self.other_child(v, h)) {
                return Err(format!("heavy child of {v} is not a largest child"));
            }
            let light = if h == NIL { 0 } else { sz(self.other_child(v, h)) };
            if self.lw(v) != light {
                return Err(format!("light weight of {v} is {} not {light}", self.lw(v)));
            }
            if self.size(v) != size[v as usize] {
                return Err(format!("path size of {v} is {} not {}", self.size(v), size[v as usize]));
            }
            // path order: heavy child follows v in the path tree
            if h != NIL && self.bst_root(h) != self.bst_root(v) {
                return Err(format!("heavy child of {v} is on another path"));
            }
            let (bl, br) = (self.r(v, F::BL), self.r(v, F::BR));
            if self.height(bl).abs_diff(self.height(br)) > 1 {
                return Err(format!("path tree unbalanced at {v}"));
            }
            for c in [bl, br] {
                if c != NIL && self.r(c, F::BP) != v {
                    return Err(format!("path tree parent of {c} is wrong"));
                }
            }
            let light_edges = {
                let mut k = 0;
                let mut x = v;
                while self.r(x, F::TPar) != NIL {
                    let p = self.r(x, F::TPar);
                    if self.r(p, F::Heavy) != x {
                        k += 1;
                    }
                    x = p;
                }
                k
            };
            if (1i64 << light_edges) > live.len() as i64 {
                return Err(format!("{light_edges} light edges above {v}"));
            }
        }
        for &v in &live {
            let top = self.path_top(v);
            let mut x = top;
            let mut k = 0;
            while x != NIL {
                k += 1;
                x = self.r(x, F::Heavy);
            }
            let root = self.bst_root(v);
            if self.r(root, F::Sum) as i64 != size[top as usize] {
                return Err(format!("path sum at {root} disagrees"));
            }
            let mut cnt = 0;
            let mut st = vec![root];
            while let Some(y) = st.pop() {
                cnt += 1;
                for f in [F::BL, F::BR] {
                    let c = self.r(y, f);
                    if c != NIL {
                        st.push(c);
                    }
                }
            }
            if cnt != k {
                return Err(format!("path tree of {v} has {cnt} nodes, path has {k}"));
            }
        }
        Ok(())
    }
}

/// Explicit tree with eagerly stored marks, used to cross-check the forest.
#[derive(Clone, Debug, Default)]
pub struct NaiveForest {
    pub parent: Vec<Option<Vertex>>,
    pub left: Vec<Option<Vertex>>,
    pub right: Vec<Option<Vertex>>,
    pub marks: Vec<(Mark, Mark)>,
    pub exists: Vec<bool>,
}

impl NaiveForest {
    pub fn make_tree(&mut self, v: Vertex) -> Result<()> {
        if v < self.exists.len() && self.exists[v] {
            return Err(Error::VertexExists(v));
        }
        if self.exists.len() <= v {
            self.parent.resize(v + 1, None);
            self.left.resize(v + 1, None);
            self.right.resize(v + 1, None);
            self.marks.resize(v + 1, (0, 0));
            self.exists.resize(v + 1, false);
        }
        self.exists[v] = true;
        Ok(())
    }

    pub fn root_of(&self, mut v: Vertex) -> Vertex {
        while let Some(p) = self.parent[v] {
            v = p;
        }
        v
    }

    pub fn link(&mut self, v: Vertex, w: Vertex, side: Side, lm: Mark, rm: Mark) -> Result<()> {
        if self.parent[w].is_some() {
            return Err(Error::BadLink("child is not a root"));
        }
        let slot = if side == Side::Left { &self.left[v] } else { &self.right[v] };
        if slot.is_some() {
            return Err(Error::BadLink("slot is occupied"));
        }
        if self.root_of(v) == w {
            return Err(Error::BadLink("both ends are in the same tree"));
        }
        self.parent[w] = Some(v);
        if side == Side::Left {
            self.left[v] = Some(w);
        } else {
            self.right[v] = Some(w);
        }
        self.marks[w] = (lm, rm);
        Ok(())
    }

    pub fn cut(&mut self, v: Vertex, w: Vertex) -> Result<()> {
        if self.parent[w] != Some(v) {
            return Err(Error::MissingEdge(w));
        }
        self.parent[w] = None;
        if self.left[v] == Some(w) {
            self.left[v] = None;
        } else {
            self.right[v] = None;
        }
        Ok(())
    }

    pub fn mark_right_spine(&mut self, root: Vertex, m: Mark) {
        let mut x = root;
        while let Some(c) = self.right[x] {
            self.marks[c].1 = m;
            x = c;
        }
    }

    pub fn is_below(&self, mut x: Vertex, anc: Vertex) -> bool {
        loop {
            if x == anc {
                return true;
            }
            match self.parent[x] {
                Some(p) => x = p,
                None => return false,
            }
        }
    }

    pub fn size(&self, v: Vertex) -> usize {
        1 + self.left[v].map_or(0, |c| self.size(c)) + self.right[v].map_or(0, |c| self.size(c))
    }
}

/// Oracle that knows the target edge (named by its child endpoint) from an
/// explicit tree.
pub struct TargetOracle<'a> {
    pub tree: &'a NaiveForest,
    pub target: Vertex,
}

impl Oracle for TargetOracle<'_> {
    fn probe(&self, v: Vertex, first: &ProbeEdge, second: &ProbeEdge) -> OracleAnswer {
        let t = self.target;
        let dir = if t == v {
            Dir::Up
        } else if self.tree.left[v].is_some_and(|c| self.tree.is_below(t, c)) {
            Dir::Left
        } else if self.tree.right[v].is_some_and(|c| self.tree.is_below(t, c)) {
            Dir::Right
        } else {
            Dir::Up
        };
        if dir == first.dir {
            OracleAnswer::InFirst
        } else if dir == second.dir {
            OracleAnswer::InSecond
        } else {
            OracleAnswer::InThird
        }
    }
}
