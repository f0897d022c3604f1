//! Flarbs on binary trees, pointer-change accounting and the potential
//! used for the amortized bound.
//!
//! A flarb adds a new root whose left subtree is the old tree, then turns
//! the anchored set plus the new root into the rightmost path while keeping
//! in-order. The result depends only on the topology, so it is built by
//! rewiring the path directly in `O(|S|)`.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Node {
    parent: Option<usize>,
    left: Option<usize>,
    right: Option<usize>,
    size: usize,
}

#[derive(Clone, Debug, Default)]
pub struct FlarbTree {
    nodes: Vec<Node>,
    root: Option<usize>,
    stamp: Vec<u64>,
    epoch: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PointerChange {
    pub parent: usize,
    pub side: Side,
    pub old: Option<usize>,
    pub new: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PointerDelta {
    pub changes: Vec<PointerChange>,
    /// Child-to-parent fields that changed, counted separately from the
    /// relation count.
    pub parent_fields: usize,
}

impl PointerDelta {
    /// Size of the symmetric difference of the (parent, side, child)
    /// relation sets.
    pub fn count(&self) -> usize {
        self.changes.iter().map(|c| c.old.is_some() as usize + c.new.is_some() as usize).sum()
    }

    /// Stored pointer fields that changed, counting both the child slot and
    /// the parent field.
    pub fn pointer_fields_changed(&self) -> usize {
        self.changes.len() + self.parent_fields
    }
}

#[derive(Clone, Debug, Default)]
pub struct FlarbOutcome {
    pub delta: PointerDelta,
    /// The new right spine, root first. Ends with the new node.
    pub path: Vec<usize>,
    /// `slots[t]` is the left child of `path[t]` after the flarb.
    pub slots: Vec<Option<usize>>,
    pub delta_phi: f64,
}

#[inline]
fn phi(left: usize, right: usize) -> f64 {
    ((2 * left + 1) as f64).log2() - ((2 * right + 1) as f64).log2()
}

impl FlarbTree {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self) -> usize {
        self.nodes.push(Node { size: 1, ..Node::default() });
        self.stamp.push(0);
        self.nodes.len() - 1
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn root(&self) -> Option<usize> {
        self.root
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.nodes[v].parent
    }

    pub fn left(&self, v: usize) -> Option<usize> {
        self.nodes[v].left
    }

    pub fn right(&self, v: usize) -> Option<usize> {
        self.nodes[v].right
    }

    pub fn child(&self, v: usize, side: Side) -> Option<usize> {
        match side {
            Side::Left => self.nodes[v].left,
            Side::Right => self.nodes[v].right,
        }
    }

    pub fn size(&self, v: Option<usize>) -> usize {
        v.map_or(0, |v| self.nodes[v].size)
    }

    fn phi_at(&self, v: usize) -> f64 {
        phi(self.size(self.nodes[v].left), self.size(self.nodes[v].right))
    }

    /// Nodes of the tree hanging from the root, in order.
    pub fn inorder(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = Vec::new();
        let mut cur = self.root;
        while cur.is_some() || !stack.is_empty() {
            while let Some(v) = cur {
                stack.push(v);
                cur = self.nodes[v].left;
            }
            let v = stack.pop().unwrap();
            out.push(v);
            cur = self.nodes[v].right;
        }
        out
    }

    pub fn right_spine(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = self.root;
        while let Some(v) = cur {
            out.push(v);
            cur = self.nodes[v].right;
        }
        out
    }

    pub fn relations(&self) -> BTreeSet<(usize, Side, usize)> {
        let mut out = BTreeSet::new();
        for v in self.inorder() {
            if let Some(c) = self.nodes[v].left {
                out.insert((v, Side::Left, c));
            }
            if let Some(c) = self.nodes[v].right {
                out.insert((v, Side::Right, c));
            }
        }
        out
    }

    /// `Φ(T) = Σ lg(w(left) / w(right))` with `w` = nodes plus null
    /// pointers of a subtree. Evaluated in `f64`.
    pub fn potential(&self) -> f64 {
        self.inorder().into_iter().map(|v| self.phi_at(v)).sum()
    }

    pub fn flarb(&mut self, s: &[usize], r: usize) -> Result<FlarbOutcome> {
        self.epoch += 1;
        let ep = self.epoch;
        let n = self.nodes.len();
        if r >= n || self.nodes[r] != (Node { size: 1, ..Node::default() }) || Some(r) == self.root {
            return Err(Error::BadAnchoredSet);
        }
        for &v in s {
            if v >= n || v == r || self.stamp[v] == ep {
                return Err(Error::BadAnchoredSet);
            }
            self.stamp[v] = ep;
        }
        for &v in s {
            let ok = match self.nodes[v].parent {
                None => Some(v) == self.root,
                Some(p) => self.stamp[p] == ep,
            };
            if !ok {
                return Err(Error::BadAnchoredSet);
            }
        }
        self.stamp[r] = ep;
        let old_root = self.root;
        let before_phi: f64 = s.iter().map(|&v| self.phi_at(v)).sum();

        // in-order walk restricted to S ∪ {r}; r has the old tree on its left
        let kids = |t: &Self, v: usize| {
            if v == r {
                (old_root, None)
            } else {
                (t.nodes[v].left, t.nodes[v].right)
            }
        };
        let inside = |t: &Self, c: Option<usize>| c.is_some_and(|c| t.stamp[c] == ep);
        let mut path = Vec::with_capacity(s.len() + 1);
        let mut slots = Vec::with_capacity(s.len() + 2);
        let mut stack = vec![(r, false)];
        while let Some((v, expanded)) = stack.pop() {
            let (l, rt) = kids(self, v);
            if !expanded {
                if inside(self, rt) {
                    stack.push((rt.unwrap(), false));
                }
                stack.push((v, true));
                if inside(self, l) {
                    stack.push((l.unwrap(), false));
                } else {
                    slots.push(l);
                }
            } else {
                path.push(v);
                if !inside(self, rt) {
                    slots.push(rt);
                }
            }
        }
        // exactly one slot falls between consecutive path nodes
        debug_assert_eq!(slots.len(), path.len() + 1);
        debug_assert_eq!(slots[path.len()], None);

        let mut delta = PointerDelta::default();
        let m = path.len();
        for t in 0..m {
            let v = path[t];
            let (ol, or) = (self.nodes[v].left, self.nodes[v].right);
            let nl = slots[t];
            let nr = if t + 1 < m { Some(path[t + 1]) } else { None };
            if ol != nl {
                delta.changes.push(PointerChange { parent: v, side: Side::Left, old: ol, new: nl });
            }
            if or != nr {
                delta.changes.push(PointerChange { parent: v, side: Side::Right, old: or, new: nr });
            }
        }
        for t in 0..m {
            let v = path[t];
            let np = if t == 0 { None } else { Some(path[t - 1]) };
            if self.nodes[v].parent != np {
                delta.parent_fields += 1;
            }
            if let Some(c) = slots[t] {
                if self.nodes[c].parent != Some(v) {
                    delta.parent_fields += 1;
                }
            }
        }

        for t in 0..m {
            let v = path[t];
            self.nodes[v].parent = if t == 0 { None } else { Some(path[t - 1]) };
            self.nodes[v].left = slots[t];
            self.nodes[v].right = if t + 1 < m { Some(path[t + 1]) } else { None };
            if let Some(c) = slots[t] {
                self.nodes[c].parent = Some(v);
            }
        }
        for t in (0..m).rev() {
            let v = path[t];
            let below = self.size(self.nodes[v].right);
            self.nodes[v].size = 1 + self.size(slots[t]) + below;
        }
        self.root = Some(path[0]);
        let after_phi: f64 = path.iter().map(|&v| self.phi_at(v)).sum();
        Ok(FlarbOutcome { delta, path, slots, delta_phi: after_phi - before_phi })
    }
}

/// Right-hand side of the amortized inequality, `C · lg(2n + 1)`.
pub fn amortized_bound(n_after: usize, c: f64) -> f64 {
    c * ((2 * n_after + 1) as f64).log2()
}

/// Slack added to the potential comparison for `f64` rounding.
pub const PHI_TOLERANCE: f64 = 1.0 / (1u64 << 30) as f64;

/// `delta + Φ(after) − Φ(before) ≤ C · lg(2n + 1)`.
pub fn amortized_check(before: &FlarbTree, after: &FlarbTree, delta: &PointerDelta, c: f64) -> bool {
    let n_after = after.inorder().len();
    delta.count() as f64 + after.potential() - before.potential() <= amortized_bound(n_after, c) + PHI_TOLERANCE
}
