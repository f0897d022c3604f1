//! Static point location on a finished dual tree by centroid decomposition.
//!
//! Each step tests the sector at the centroid of the current component and
//! moves to the centroid of the piece in that direction. When that piece is
//! empty the answer is one of the two marks of the edge leaving in that
//! direction.

use crate::dual_tree::{best_of, sector, DualTree, Sector, Sites};
use crate::geom::{Mode, Point};

const NONE: u32 = u32::MAX;
/// Marks a `next` entry as a terminal edge to an earlier centroid.
const TERM: u32 = 1 << 31;

#[derive(Clone, Debug)]
pub struct CentroidLocator {
    mode: Mode,
    sites: u32,
    root: u32,
    tri: Vec<[u32; 3]>,
    /// Next centroid toward parent, left, right; or, once the piece is empty,
    /// the tree neighbor across that edge tagged with `TERM`.
    next: Vec<[u32; 3]>,
    depth: u32,
}

fn dir_index(s: Sector) -> usize {
    match s {
        Sector::Parent => 0,
        Sector::Left => 1,
        Sector::Right => 2,
    }
}

impl CentroidLocator {
    pub fn build(tree: &DualTree) -> Self {
        let n = tree.node_count();
        let mut loc = CentroidLocator {
            mode: tree.mode(),
            sites: tree.len() as u32,
            root: NONE,
            tri: Vec::with_capacity(n),
            next: vec![[NONE; 3]; n],
            depth: 0,
        };
        for v in 0..n {
            let [i, j, k] = tree.triangle(v);
            loc.tri.push([i as u32, j as u32, k as u32]);
        }
        if n == 0 {
            return loc;
        }
        let nbr = |v: usize| [tree.parent(v), tree.left(v), tree.right(v)];
        let mut removed = vec![false; n];
        let mut size = vec![0usize; n];
        // (any node of the component, owning centroid and direction, level)
        let mut work = vec![(tree.root().unwrap(), None::<(usize, usize)>, 1u32)];
        let mut order = Vec::new();
        let mut stack = Vec::new();
        while let Some((start, owner, level)) = work.pop() {
            // collect the component in DFS preorder, with its DFS parents
            order.clear();
            stack.push((start, usize::MAX));
            while let Some((v, from)) = stack.pop() {
                order.push((v, from));
                for w in nbr(v).into_iter().flatten() {
                    if w != from && !removed[w] {
                        stack.push((w, v));
                    }
                }
            }
            for &(v, from) in order.iter().rev() {
                size[v] = 1 + nbr(v).into_iter().flatten().filter(|&w| w != from && !removed[w]).map(|w| size[w]).sum::<usize>();
            }
            let total = order.len();
            let mut c = start;
            let mut from = usize::MAX;
            'walk: loop {
                for w in nbr(c).into_iter().flatten() {
                    if w != from && !removed[w] && size[w] * 2 > total {
                        from = c;
                        c = w;
                        continue 'walk;
                    }
                }
                break;
            }
            removed[c] = true;
            loc.depth = loc.depth.max(level);
            match owner {
                None => loc.root = c as u32,
                Some((o, d)) => loc.next[o][d] = c as u32,
            }
            for (d, w) in nbr(c).into_iter().enumerate() {
                if let Some(w) = w {
                    if removed[w] {
                        loc.next[c][d] = TERM | w as u32;
                    } else {
                        work.push((w, Some((c, d)), level + 1));
                    }
                }
            }
        }
        loc
    }

    pub fn node_count(&self) -> usize {
        self.tri.len()
    }

    pub fn site_count(&self) -> usize {
        self.sites as usize
    }

    /// Levels of the decomposition.
    pub fn depth(&self) -> usize {
        self.depth as usize
    }

    /// Sites that can hold the answer for `q`: the two marks of the edge
    /// the search ends on, then the triangles at both ends of that edge.
    /// Entries repeat when an end is missing. Also returns the tests used.
    pub fn candidates<S: Sites + ?Sized>(&self, sites: &S, q: Point) -> ([usize; 8], usize) {
        debug_assert_eq!(sites.count(), self.sites as usize);
        match self.sites {
            1 => return ([1; 8], 0),
            2 => return ([1, 2, 1, 2, 1, 2, 1, 2], 0),
            _ => {}
        }
        let mut v = self.root as usize;
        let mut tests = 0;
        loop {
            let [i, j, k] = self.tri[v].map(|x| x as usize);
            let s = sector(sites, [i, j, k], q, self.mode);
            tests += 1;
            let nx = self.next[v][dir_index(s)];
            if nx != NONE && nx & TERM == 0 {
                v = nx as usize;
                continue;
            }
            let (a, b) = match s {
                Sector::Parent => (i, k),
                Sector::Left => (i, j),
                Sector::Right => (j, k),
            };
            let [x, y, z] = if nx == NONE { [i, j, k] } else { self.tri[(nx & !TERM) as usize].map(|x| x as usize) };
            return ([a, b, i, j, k, x, y, z], tests);
        }
    }

    /// Best site for `q` together with the number of sector tests used.
    pub fn locate_counted<S: Sites + ?Sized>(&self, sites: &S, q: Point) -> (usize, usize) {
        let (c, tests) = self.candidates(sites, q);
        let best = c[1..].iter().fold(c[0], |b, &x| best_of(sites, self.mode, q, b, x));
        (best, tests)
    }

    pub fn locate<S: Sites + ?Sized>(&self, sites: &S, q: Point) -> usize {
        self.locate_counted(sites, q).0
    }
}
