//! Acceptance sweep. Prints one PASS/FAIL line per criterion and exits
//! nonzero if a criterion fails outside the documented unattainable case.

use std::process::ExitCode;
use std::time::Instant;

use hpq_core::dual_tree::DualTree;
use hpq_core::flarb::{amortized_bound, Side, PHI_TOLERANCE};
use hpq_core::geom::{Mode, Point};
use hpq_core::grappa::{GrappaForest, NaiveForest, TargetOracle};
use hpq_core::interval::IntervalStructure;
use hpq_core::okey_dokey::{planned_cells, OkeyDokey};
use hpq_core::prefix::PrefixStructure;
use hpq_core::testkit::{bf_delaunay, bf_query, fit_constant, gen_convex, random_query, Shape};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MODES: [Mode; 2] = [Mode::Farthest, Mode::Nearest];
const SHAPES: [Shape; 3] = [Shape::Circle, Shape::Ellipse, Shape::ParabolaArc];
const QUERY_SIZES: [usize; 4] = [8, 64, 256, 1024];
const QUERIES: usize = 10_000;
/// Amortized flarb constant.
const FLARB_C: f64 = 4.0;
/// Per-operation persistent writes allowed per `lg²(V + 1)`.
const GRAPPA_C: f64 = 8.0;
const GRAPPA_OPS: usize = 100_000;
/// Largest allowed ratio between a measurement and the fitted curve.
const FIT_FACTOR: f64 = 4.0;
/// Stored cells above this are not built. At 24 bytes a cell this is about 2.4 GB.
const CELL_LIMIT: u128 = 100_000_000;

struct Verdict {
    pass: bool,
    detail: String,
    /// Set when the failure is a configuration that cannot be run here.
    unattainable: bool,
}

impl Verdict {
    fn ok(detail: String) -> Self {
        Verdict { pass: true, detail, unattainable: false }
    }
    fn fail(detail: String) -> Self {
        Verdict { pass: false, detail, unattainable: false }
    }
}

fn sweep(
    sites: &[Point],
    mode: Mode,
    seed: u64,
    mut query: impl FnMut(Point, &hpq_core::geom::DirectedLine) -> hpq_core::QueryOutcome,
) -> Option<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..QUERIES {
        let (q, l) = random_query(sites, &mut rng);
        let got = query(q, &l);
        let want = bf_query(sites, q, &l, mode);
        if got != want {
            return Some(format!("q {q:?} line {l:?}: got {got:?}, want {want:?}"));
        }
    }
    None
}

fn interval_queries() -> Verdict {
    let mut runs = 0;
    for n in QUERY_SIZES {
        let inst = gen_convex(n, 1, Shape::Circle).unwrap();
        for mode in MODES {
            let s = IntervalStructure::from_points(&inst.sites, mode).unwrap();
            let lg = (n as f64).log2().ceil() as usize;
            let mut over = None;
            let bad = sweep(&inst.sites, mode, n as u64, |q, l| {
                let (out, route) = s.query_counted(q, l);
                if route.subqueries > 2 || route.steps > lg {
                    over = Some(route);
                }
                out
            });
            if let Some(e) = bad {
                return Verdict::fail(format!("n {n} {mode:?}: {e}"));
            }
            if let Some(r) = over {
                return Verdict::fail(format!("n {n} {mode:?}: route {r:?} exceeds depth {lg}"));
            }
            runs += 1;
        }
    }
    Verdict::ok(format!("{runs} sweeps of {QUERIES} queries match brute force"))
}

fn okey_queries() -> Verdict {
    let mut runs = 0;
    let mut skipped = Vec::new();
    for k in 1..=3 {
        for n in QUERY_SIZES {
            let planned = planned_cells(n, k);
            if planned > CELL_LIMIT {
                skipped.push(format!("k {k} n {n} needs {planned} cells (about {} GB)", planned * 24 / 1_000_000_000));
                continue;
            }
            let inst = gen_convex(n, 2, Shape::Circle).unwrap();
            let budget = 1usize << (k + 1);
            for mode in MODES {
                let s = OkeyDokey::from_points(&inst.sites, mode, k).unwrap();
                let mut worst = 0;
                let bad = sweep(&inst.sites, mode, 100 + n as u64, |q, l| {
                    let (out, b) = s.query_counted(q, l);
                    worst = worst.max(b.calls);
                    out
                });
                if let Some(e) = bad {
                    return Verdict::fail(format!("k {k} n {n} {mode:?}: {e}"));
                }
                if worst > budget {
                    return Verdict::fail(format!("k {k} n {n} {mode:?}: {worst} locator calls, budget {budget}"));
                }
                runs += 1;
            }
        }
    }
    if skipped.is_empty() {
        Verdict::ok(format!("{runs} sweeps match brute force within 2^(k+1) locator calls"))
    } else {
        Verdict { pass: false, detail: format!("{runs} sweeps pass; not built: {}", skipped.join("; ")), unattainable: true }
    }
}

fn flarb_bounds() -> Verdict {
    let mut notes = Vec::new();
    for p in [10u32, 12, 14, 16] {
        let n = 1usize << p;
        let inst = gen_convex(n, 3, Shape::Circle).unwrap();
        let mut d = DualTree::new(Mode::Farthest);
        let mut total = 0usize;
        for (i, &pt) in inst.sites.iter().enumerate() {
            let ins = d.insert_ccw(pt).unwrap();
            let delta = ins.flarb.delta.count();
            total += delta;
            let nodes = d.node_count();
            if i >= 2 && delta as f64 + ins.flarb.delta_phi > amortized_bound(nodes, FLARB_C) + PHI_TOLERANCE {
                return Verdict::fail(format!("n {n}: step {} has delta {delta} and potential change {:.3}", i + 1, ins.flarb.delta_phi));
            }
        }
        let limit = FLARB_C * n as f64 * p as f64;
        if total as f64 > limit {
            return Verdict::fail(format!("n {n}: {total} pointer changes exceed {limit}"));
        }
        notes.push(format!("n {n} {:.3}", total as f64 / (n as f64 * p as f64)));
    }
    Verdict::ok(format!("C = {FLARB_C}; changes / (n lg n): {}", notes.join(", ")))
}

fn delaunay_small() -> Verdict {
    let mut count = 0;
    for n in 3..=64 {
        for shape in SHAPES {
            for seed in 0..3 {
                let inst = gen_convex(n, seed, shape).unwrap();
                for mode in MODES {
                    let d = DualTree::from_points(mode, &inst.sites).unwrap();
                    let mut got: Vec<[usize; 3]> = d.triangles().into_iter().map(normalize).collect();
                    let mut want: Vec<[usize; 3]> = bf_delaunay(&inst.sites, mode).unwrap().into_iter().map(normalize).collect();
                    got.sort_unstable();
                    want.sort_unstable();
                    if got != want {
                        return Verdict::fail(format!("n {n} {shape} seed {seed} {mode:?}: triangles differ"));
                    }
                    count += 1;
                }
            }
        }
    }
    Verdict::ok(format!("{count} instances match brute-force triangulations"))
}

fn normalize(t: [usize; 3]) -> [usize; 3] {
    let r = (0..3).min_by_key(|&s| t[s]).unwrap();
    [t[r], t[(r + 1) % 3], t[(r + 2) % 3]]
}

fn prefix_versions() -> Verdict {
    let n = 256;
    let inst = gen_convex(n, 4, Shape::Ellipse).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for mode in MODES {
        let s = PrefixStructure::from_points(mode, &inst.sites).unwrap();
        let writes = s.writes();
        for t in 1..=n {
            let pts = &inst.sites[..t];
            for _ in 0..100 {
                let q = Point::new(rng.gen_range(-1 << 22..1 << 22), rng.gen_range(-1 << 22..1 << 22));
                let got = s.query_prefix(t, q).unwrap();
                let want = (1..=t).reduce(|a, b| if mode.better(q, pts[b - 1], b, pts[a - 1], a) { b } else { a }).unwrap();
                if got != want {
                    return Verdict::fail(format!("{mode:?} t {t} q {q:?}: got {got}, want {want}"));
                }
            }
        }
        if s.writes() != writes {
            return Verdict::fail(format!("{mode:?}: queries wrote to the structure"));
        }
    }
    Verdict::ok(format!("every prefix of n = {n}, 100 queries each, both modes; no query writes"))
}

fn grappa_mirror() -> Verdict {
    let pool = 512;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut g = GrappaForest::persistent();
    let mut naive = NaiveForest::default();
    g.begin_version();
    let mut made = 0;
    for v in 0..32 {
        g.make_tree(v).unwrap();
        naive.make_tree(v).unwrap();
        made += 1;
    }
    let mut snaps = Vec::new();
    let mut worst = 0.0f64;
    let mut searches = 0;
    for step in 0..GRAPPA_OPS {
        g.begin_version();
        let before = g.writes();
        let mut touched = Vec::new();
        match rng.gen_range(0..20) {
            0 if made < pool => {
                g.make_tree(made).unwrap();
                naive.make_tree(made).unwrap();
                made += 1;
            }
            0..=9 => {
                let (v, w) = (rng.gen_range(0..made), rng.gen_range(0..made));
                let side = if rng.gen_bool(0.5) { Side::Left } else { Side::Right };
                let (lm, rm) = (rng.gen_range(0..1000), rng.gen_range(0..1000));
                if g.link(v, w, side, lm, rm).is_ok() != naive.link(v, w, side, lm, rm).is_ok() {
                    return Verdict::fail(format!("op {step}: link {v} {w} disagrees"));
                }
                touched.extend([v, w]);
            }
            10..=14 => {
                let w = rng.gen_range(0..made);
                if let Some(v) = naive.parent[w] {
                    if g.cut(v, w).is_err() || naive.cut(v, w).is_err() {
                        return Verdict::fail(format!("op {step}: cut {v} {w} rejected"));
                    }
                    touched.extend([v, w]);
                } else if g.cut(rng.gen_range(0..made), w).is_ok() {
                    return Verdict::fail(format!("op {step}: cut of root {w} accepted"));
                }
            }
            15..=16 => {
                let r = naive.root_of(rng.gen_range(0..made));
                let m = 1000 + step as u32;
                g.mark_right_spine(r, m).unwrap();
                naive.mark_right_spine(r, m);
                touched.push(r);
            }
            _ => {}
        }
        let lg = ((made + 1) as f64).log2();
        let ratio = (g.writes() - before) as f64 / (lg * lg);
        worst = worst.max(ratio);
        if ratio > GRAPPA_C {
            return Verdict::fail(format!("op {step}: {} writes exceed {GRAPPA_C} lg^2", g.writes() - before));
        }
        let at = g.version();
        for _ in 0..4 {
            touched.push(rng.gen_range(0..made));
        }
        for v in touched {
            if let Some(e) = check_vertex(&g, &naive, v, at) {
                return Verdict::fail(format!("op {step}: {e}"));
            }
            searches += 1;
        }
        if step % 997 == 0 {
            snaps.push((at, naive.clone()));
        }
    }
    for (at, shadow) in &snaps {
        for v in 0..shadow.parent.len() {
            if let Some(e) = check_vertex(&g, shadow, v, *at) {
                return Verdict::fail(format!("version {at}: {e}"));
            }
        }
    }
    if let Err(e) = g.validate() {
        return Verdict::fail(e);
    }
    Verdict::ok(format!(
        "{GRAPPA_OPS} ops, {searches} mark and search checks, {} past versions; worst writes {worst:.2} lg^2(V+1), bound {GRAPPA_C}",
        snaps.len()
    ))
}

fn check_vertex(g: &GrappaForest, shadow: &NaiveForest, v: usize, at: u64) -> Option<String> {
    if g.parent(v, at) != shadow.parent[v] {
        return Some(format!("parent of {v}"));
    }
    let p = shadow.parent[v]?;
    if g.effective_marks(v, at).ok() != Some(shadow.marks[v]) {
        return Some(format!("marks of {v}"));
    }
    let res = match g.oracle_search(shadow.root_of(v), &TargetOracle { tree: shadow, target: v }, at) {
        Ok(r) => r,
        Err(e) => return Some(format!("search for {v}: {e}")),
    };
    if (res.parent, res.child, res.lmark, res.rmark) != (p, v, shadow.marks[v].0, shadow.marks[v].1) {
        return Some(format!("search for {v} found {res:?}"));
    }
    None
}

fn space_fits() -> Verdict {
    let mut lines = Vec::new();
    let mut pass = true;
    let sizes: Vec<usize> = (6..=12).map(|p| 1usize << p).collect();
    for k in 1..=3usize {
        let e = (2 * k + 1) as f64 / (2 * k - 1) as f64;
        let ratios: Vec<f64> = sizes.iter().map(|&n| planned_cells(n, k) as f64 / (n as f64).powf(e)).collect();
        let (c, spread) = fit_constant(&ratios);
        pass &= spread <= FIT_FACTOR;
        lines.push(format!("okey k {k} c {c:.2} spread {spread:.2}"));
        for &n in &sizes {
            if n > 1024 || planned_cells(n, k) > 20_000_000 {
                continue;
            }
            let inst = gen_convex(n, 7, Shape::Circle).unwrap();
            let s = OkeyDokey::from_points(&inst.sites, Mode::Farthest, k).unwrap();
            if s.cells() != planned_cells(n, k) {
                return Verdict::fail(format!("okey k {k} n {n}: built {} cells, planned {}", s.cells(), planned_cells(n, k)));
            }
        }
    }
    let lg2 = |n: usize| n as f64 * (n as f64).log2().powi(2);
    let mut pre = Vec::new();
    let mut int = Vec::new();
    for &n in &sizes {
        let inst = gen_convex(n, 8, Shape::Circle).unwrap();
        pre.push(PrefixStructure::from_points(Mode::Farthest, &inst.sites).unwrap().history_len() as f64 / lg2(n));
        int.push(IntervalStructure::from_points(&inst.sites, Mode::Farthest).unwrap().history_len() as f64 / lg2(n));
    }
    for (name, r) in [("prefix", pre), ("interval", int)] {
        let (c, spread) = fit_constant(&r);
        pass &= spread <= FIT_FACTOR;
        lines.push(format!("{name} c {c:.2} spread {spread:.2}"));
    }
    let detail = format!("fit factor {FIT_FACTOR}: {}", lines.join("; "));
    if pass {
        Verdict::ok(detail)
    } else {
        Verdict::fail(detail)
    }
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("interval queries", interval_queries),
        ("okey-dokey queries", okey_queries),
        ("flarb amortized bound", flarb_bounds),
        ("triangulations n <= 64", delaunay_small),
        ("prefix versions", prefix_versions),
        ("grappa mirror", grappa_mirror),
        ("space fits", space_fits),
    ];
    let mut hard = 0;
    let mut unattainable = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let v = run();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {} {name}: {tag} ({:.1}s) {}", i + 1, t.elapsed().as_secs_f64(), v.detail);
        if !v.pass {
            if v.unattainable {
                unattainable += 1;
            } else {
                hard += 1;
            }
        }
    }
    println!("acceptance: {} pass, {unattainable} unattainable, {hard} fail", criteria.len() - hard - unattainable);
    if hard > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
