use std::cmp::Ordering;

use hpq_core::flarb::{amortized_check, FlarbTree, Side};
use hpq_core::geom::{circumcenter, cmp_dist, incircle, left_interval, orientation, side_of_line, DirectedLine, LeftInterval, Mode, Point};
use hpq_core::grappa::{GrappaForest, NaiveForest, TargetOracle};
use hpq_core::persistence::{History, VersionStore};
use hpq_core::testkit::{gen_convex, Shape};
use proptest::prelude::*;

const LIM: i64 = 1 << 24;

fn pt() -> impl Strategy<Value = Point> {
    (-LIM..=LIM, -LIM..=LIM).prop_map(|(x, y)| Point::new(x, y))
}

fn small_pt() -> impl Strategy<Value = Point> {
    (-6i64..=6, -6i64..=6).prop_map(|(x, y)| Point::new(x, y))
}

proptest! {
    #[test]
    fn orientation_is_antisymmetric(a in pt(), b in pt(), c in pt()) {
        let o = orientation(a, b, c);
        prop_assert_eq!(orientation(b, a, c), -o);
        prop_assert_eq!(orientation(b, c, a), o);
    }

    #[test]
    fn incircle_flips_with_orientation(a in pt(), b in pt(), c in pt(), d in pt()) {
        prop_assert_eq!(incircle(b, a, c, d), -incircle(a, b, c, d));
        prop_assert_eq!(incircle(b, c, a, d), incircle(a, b, c, d));
    }

    #[test]
    fn incircle_sides_are_exclusive(a in small_pt(), b in small_pt(), c in small_pt(), d in small_pt()) {
        prop_assume!(orientation(a, b, c) > 0);
        let s = incircle(a, b, c, d);
        let cc = circumcenter(a, b, c).unwrap();
        prop_assert_eq!(s, cc.cmp_dist(a, d) as i32);
    }

    #[test]
    fn circumcenter_is_equidistant(a in pt(), b in pt(), c in pt()) {
        prop_assume!(orientation(a, b, c) != 0);
        let cc = circumcenter(a, b, c).unwrap();
        prop_assert_eq!(cc.cmp_dist(a, b), Ordering::Equal);
        prop_assert_eq!(cc.cmp_dist(a, c), Ordering::Equal);
    }

    #[test]
    fn cmp_dist_is_antisymmetric(q in pt(), a in pt(), b in pt()) {
        prop_assert_eq!(cmp_dist(q, a, b), cmp_dist(q, b, a).reverse());
        prop_assert_eq!(cmp_dist(q, a, a), Ordering::Equal);
    }

    #[test]
    fn left_interval_matches_scan(n in 3usize..40, seed in 0u64..1000, a in pt(), b in pt()) {
        prop_assume!(a != b);
        let inst = gen_convex(n, seed, Shape::Circle).unwrap();
        let l = DirectedLine::new(a, b).unwrap();
        let left: Vec<bool> = inst.sites.iter().map(|&p| side_of_line(&l, p) >= 0).collect();
        let want = match left.iter().filter(|&&x| x).count() {
            0 => LeftInterval::Empty,
            c if c == n => LeftInterval::Full,
            _ => {
                let i = (0..n).find(|&i| left[i] && !left[(i + n - 1) % n]).unwrap();
                let j = (0..n).find(|&j| left[j] && !left[(j + 1) % n]).unwrap();
                LeftInterval::Interval(i + 1, j + 1)
            }
        };
        prop_assert_eq!(left_interval(&inst.sites, &l), want);
    }

    #[test]
    fn flarb_preserves_order_and_counts(choices in prop::collection::vec(prop::collection::vec(any::<bool>(), 0..40), 1..40)) {
        let mut t = FlarbTree::new();
        for picks in choices {
            // anchored set: walk from the root, keeping children by coin flips
            let mut s = Vec::new();
            let mut flips = picks.into_iter();
            if let Some(root) = t.root() {
                if flips.next().unwrap_or(false) {
                    let mut stack = vec![root];
                    while let Some(v) = stack.pop() {
                        s.push(v);
                        for c in [t.left(v), t.right(v)].into_iter().flatten() {
                            if flips.next().unwrap_or(false) {
                                stack.push(c);
                            }
                        }
                    }
                }
            }
            let before = t.clone();
            let mut order = before.inorder();
            let r = t.add_node();
            let out = t.flarb(&s, r).unwrap();
            order.push(r);
            prop_assert_eq!(t.inorder(), order);
            prop_assert_eq!(t.right_spine(), out.path.clone());
            let old = before.relations();
            let new = t.relations();
            prop_assert_eq!(out.delta.count(), old.symmetric_difference(&new).count());
            let phi = t.potential() - before.potential();
            prop_assert!((phi - out.delta_phi).abs() < 1e-6);
            prop_assert!(amortized_check(&before, &t, &out.delta, 4.0));
        }
    }

    #[test]
    fn history_reads_match_a_log(ops in prop::collection::vec((any::<bool>(), 0u32..100), 1..60)) {
        let mut store = VersionStore::new();
        let mut h = History::new(7u32);
        let mut log = vec![7u32];
        store.new_version();
        log.push(7);
        for (bump, val) in ops {
            if bump {
                store.new_version();
                log.push(*log.last().unwrap());
            }
            h.write(&mut store, val).unwrap();
            *log.last_mut().unwrap() = val;
        }
        for (v, &want) in log.iter().enumerate() {
            prop_assert_eq!(h.read(v as u64), want);
        }
    }

    #[test]
    fn grappa_mirrors_a_naive_tree(ops in prop::collection::vec((0u8..4, 0usize..10, 0usize..10, any::<bool>(), 0u32..50), 1..80)) {
        let n = 10;
        let mut g = GrappaForest::new();
        let mut naive = NaiveForest::default();
        for v in 0..n {
            g.make_tree(v).unwrap();
            naive.make_tree(v).unwrap();
        }
        for (kind, v, w, left, m) in ops {
            let side = if left { Side::Left } else { Side::Right };
            match kind {
                0 | 1 => {
                    prop_assert_eq!(g.link(v, w, side, m, m + 1).is_ok(), naive.link(v, w, side, m, m + 1).is_ok());
                }
                2 => {
                    prop_assert_eq!(g.cut(v, w).is_ok(), naive.cut(v, w).is_ok());
                }
                _ => {
                    let r = naive.root_of(v);
                    g.mark_right_spine(r, 100 + m).unwrap();
                    naive.mark_right_spine(r, 100 + m);
                }
            }
            prop_assert!(g.validate().is_ok());
        }
        let at = g.version();
        for v in 0..n {
            if naive.parent[v].is_some() {
                prop_assert_eq!(g.effective_marks(v, at).unwrap(), naive.marks[v]);
                let res = g.oracle_search(naive.root_of(v), &TargetOracle { tree: &naive, target: v }, at).unwrap();
                prop_assert_eq!(res.child, v);
            }
        }
    }

    #[test]
    fn better_is_a_strict_order(q in pt(), a in pt(), b in pt(), far in any::<bool>()) {
        let mode = if far { Mode::Farthest } else { Mode::Nearest };
        prop_assert_ne!(mode.better(q, a, 1, b, 2), mode.better(q, b, 2, a, 1));
    }
}
