//! Brute-force oracles and instance generation.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dual_tree::DualTree;
use crate::error::{Error, Result};
use crate::geom::{cross, incircle, incircle_conflict, side_of_line, validate_convex, DirectedLine, Mode, Point, COORD_LIMIT};
use crate::QueryOutcome;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Shape {
    Circle,
    Ellipse,
    ParabolaArc,
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Shape::Circle => "circle",
            Shape::Ellipse => "ellipse",
            Shape::ParabolaArc => "parabola-arc",
        })
    }
}

impl FromStr for Shape {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circle" => Ok(Shape::Circle),
            "ellipse" => Ok(Shape::Ellipse),
            "parabola-arc" => Ok(Shape::ParabolaArc),
            _ => Err(Error::BadParameter(format!("unknown shape {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub mode: Mode,
    pub sites: Vec<Point>,
    pub seed: u64,
    pub shape: Shape,
}

pub fn bf_query(sites: &[Point], q: Point, l: &DirectedLine, mode: Mode) -> QueryOutcome {
    let mut best: Option<usize> = None;
    for (i, &p) in sites.iter().enumerate() {
        if side_of_line(l, p) < 0 {
            continue;
        }
        best = match best {
            Some(b) if !mode.better(q, p, i, sites[b], b) => Some(b),
            _ => Some(i),
        };
    }
    best.map_or(QueryOutcome::EmptyHalfplane, |b| QueryOutcome::Site(b + 1))
}

/// Best site among the 1-based cyclic interval `i..=j`.
pub fn bf_interval(sites: &[Point], i: usize, j: usize, q: Point, mode: Mode) -> usize {
    let n = sites.len();
    let len = (j + n - i) % n + 1;
    let mut best = i;
    for s in 1..len {
        let c = (i - 1 + s) % n + 1;
        if mode.better(q, sites[c - 1], c, sites[best - 1], best) {
            best = c;
        }
    }
    best
}

/// All Delaunay triangles of the mode, by testing every triple against
/// every site. `O(n^4)`.
pub fn bf_delaunay(sites: &[Point], mode: Mode) -> Result<Vec<[usize; 3]>> {
    let n = sites.len();
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                let (pa, pb, pc) = (sites[a], sites[b], sites[c]);
                let mut ok = true;
                for (d, &pd) in sites.iter().enumerate() {
                    if d == a || d == b || d == c {
                        continue;
                    }
                    if incircle(pa, pb, pc, pd) == 0 {
                        return Err(Error::Cocircular { index: d + 1 });
                    }
                    if incircle_conflict(pa, pb, pc, pd, mode) {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    out.push([a + 1, b + 1, c + 1]);
                }
            }
        }
    }
    assert_eq!(out.len(), n.saturating_sub(2), "Delaunay oracle did not triangulate the polygon");
    Ok(out)
}

/// Rejects four cocircular sites. Exhaustive for `n <= 512` in
/// `O(n^3 log n)`; otherwise only consecutive quadruples are tested.
pub fn check_cocircular(sites: &[Point]) -> Result<()> {
    let n = sites.len();
    if n < 4 {
        return Ok(());
    }
    if n > 512 {
        for i in 0..n {
            let q = [0, 1, 2, 3].map(|t| sites[(i + t) % n]);
            if incircle(q[0], q[1], q[2], q[3]) == 0 {
                return Err(Error::Cocircular { index: i + 1 });
            }
        }
        return Ok(());
    }
    // For a fixed chord (i, j) every other site picks one circle through the
    // chord, parametrized by the signed offset of its center along the
    // bisector. Two equal offsets mean four cocircular sites.
    let mut keys: Vec<(f64, i128, i128)> = Vec::with_capacity(n);
    for i in 0..n {
        for j in i + 1..n {
            let (pi, pj) = (sites[i], sites[j]);
            let u = ((pj.x - pi.x) as i128, (pj.y - pi.y) as i128);
            keys.clear();
            // a cocircular quadruple shows up at its two smallest indices
            for &pk in &sites[j + 1..] {
                let w = ((pk.x - pi.x) as i128, (pk.y - pi.y) as i128);
                let num = w.0 * w.0 + w.1 * w.1 - (u.0 * w.0 + u.1 * w.1);
                let den = 2 * (u.0 * w.1 - u.1 * w.0);
                keys.push((num as f64 / den as f64, num, den));
            }
            keys.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            // equal fractions round to nearly equal floats; compare exactly
            // against every neighbour inside a small relative window
            for x in 0..keys.len() {
                for y in x + 1..keys.len() {
                    let (fa, na, da) = keys[x];
                    let (fb, nb, db) = keys[y];
                    if fb - fa > 1e-9 * fa.abs().max(fb.abs()).max(1e-300) {
                        break;
                    }
                    if na * db == nb * da {
                        return Err(Error::Cocircular { index: i + 1 });
                    }
                }
            }
        }
    }
    Ok(())
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

const TARGET_RADIUS: i64 = 1 << 20;

/// Edge vectors of a convex polygon: distinct primitive directions sorted by
/// angle, closed by one extra edge.
fn edge_vectors(n: usize, shape: Shape, rng: &mut ChaCha8Rng) -> Option<Vec<(i64, i64)>> {
    let mut seen = HashSet::new();
    let mut vs = Vec::with_capacity(n);
    match shape {
        Shape::Circle | Shape::Ellipse => {
            let (ax, ay) = if shape == Shape::Circle { (1.0, 1.0) } else { (2.0, 0.5) };
            // mean edge length about 2/3 rho gives a perimeter near pi times
            // the target extent; keep rho large enough for n directions
            let rho = (1.5 * std::f64::consts::PI * (2 * TARGET_RADIUS) as f64 / n as f64).max(4.0 * (n as f64).sqrt());
            let (hx, hy) = ((rho * ax).ceil() as i64, (rho * ay).ceil() as i64);
            while vs.len() + 1 < n {
                let x = rng.gen_range(-hx..=hx);
                let y = rng.gen_range(-hy..=hy);
                let (fx, fy) = (x as f64 / ax, y as f64 / ay);
                if (x, y) == (0, 0) || fx * fx + fy * fy > rho * rho {
                    continue;
                }
                let g = gcd(x, y);
                if seen.insert((x / g, y / g)) {
                    vs.push((x, y));
                }
            }
        }
        Shape::ParabolaArc => {
            let k = n as i64;
            let mut slopes: Vec<i64> = (-k..=k).collect();
            slopes.shuffle(rng);
            for &s in &slopes[..n - 1] {
                seen.insert((1, s));
                vs.push((1, s));
            }
        }
    }
    let sx: i64 = vs.iter().map(|v| v.0).sum();
    let sy: i64 = vs.iter().map(|v| v.1).sum();
    if (sx, sy) == (0, 0) {
        return None;
    }
    let g = gcd(sx, sy);
    if seen.contains(&(-sx / g, -sy / g)) {
        return None;
    }
    vs.push((-sx, -sy));
    vs.sort_by(|a, b| {
        let h = |v: &(i64, i64)| (v.1 < 0 || (v.1 == 0 && v.0 < 0)) as u8;
        h(a).cmp(&h(b)).then_with(|| 0i128.cmp(&(a.0 as i128 * b.1 as i128 - a.1 as i128 * b.0 as i128)))
    });
    Some(vs)
}

/// Largest `n` generated by snapping sampled curve points; beyond it the
/// snapping error outgrows the curvature between neighbours.
const SNAP_LIMIT: usize = 1024;

/// Stratified sorted angles on the curve, snapped to integers.
fn snapped_curve(n: usize, shape: Shape, rng: &mut ChaCha8Rng) -> Vec<Point> {
    let r = TARGET_RADIUS as f64;
    (0..n)
        .map(|i| {
            let u = (i as f64 + rng.gen_range(0.3..0.7)) / n as f64;
            let (x, y) = match shape {
                Shape::Circle => {
                    let a = u * std::f64::consts::TAU;
                    (r * a.cos(), r * a.sin())
                }
                Shape::Ellipse => {
                    let a = u * std::f64::consts::TAU;
                    (r * a.cos(), 0.5 * r * a.sin())
                }
                Shape::ParabolaArc => {
                    // the arc y = x^2 / r over [-r, r], traversed right to left
                    // on the lower side so the closing chord is on top
                    let x = r * (1.0 - 2.0 * u);
                    (-x, x * x / r - r / 2.0)
                }
            };
            Point::new(x.round() as i64, y.round() as i64)
        })
        .collect()
}

fn lattice_polygon(n: usize, shape: Shape, rng: &mut ChaCha8Rng) -> Result<Option<Vec<Point>>> {
    let Some(vs) = edge_vectors(n, shape, rng) else { return Ok(None) };
    let mut pts = Vec::with_capacity(n);
    let (mut x, mut y) = (0i64, 0i64);
    for &(dx, dy) in &vs {
        pts.push((x, y));
        x += dx;
        y += dy;
    }
    let (minx, maxx) = pts.iter().fold((i64::MAX, i64::MIN), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (miny, maxy) = pts.iter().fold((i64::MAX, i64::MIN), |(a, b), p| (a.min(p.1), b.max(p.1)));
    let extent = (maxx - minx).max(maxy - miny).max(1);
    let scale = (2 * TARGET_RADIUS / extent).max(1);
    if extent * scale > 2 * COORD_LIMIT {
        return Err(Error::BadParameter(format!("{n} sites do not fit the coordinate bound for {shape}")));
    }
    let (cx, cy) = ((minx + maxx) / 2, (miny + maxy) / 2);
    Ok(Some(pts.iter().map(|&(x, y)| Point::new((x - cx) * scale, (y - cy) * scale)).collect()))
}

/// `n` sites in strictly convex counterclockwise position, no four
/// cocircular, extent about `2^20`. Deterministic in `(n, seed, shape)`.
///
/// Up to `SNAP_LIMIT` sites are sampled on the curve and snapped; larger
/// sets are built from distinct primitive lattice edge vectors sorted by
/// angle, which keeps strict convexity at any size.
pub fn gen_convex(n: usize, seed: u64, shape: Shape) -> Result<Instance> {
    if n < 3 {
        return Err(Error::BadParameter("need at least 3 sites".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (n as u64).rotate_left(32) ^ shape as u64);
    for _ in 0..64 {
        let mut sites = if n <= SNAP_LIMIT {
            snapped_curve(n, shape, &mut rng)
        } else {
            match lattice_polygon(n, shape, &mut rng)? {
                Some(s) => s,
                None => continue,
            }
        };
        sites.rotate_left(rng.gen_range(0..n));
        if validate_convex(&sites).is_err() || check_cocircular(&sites).is_err() {
            continue;
        }
        // past the exhaustive limit, insist that both triangulations build
        // without a zero incircle test
        if n > 512 && [Mode::Farthest, Mode::Nearest].iter().any(|&m| DualTree::from_points(m, &sites).is_err()) {
            continue;
        }
        return Ok(Instance { mode: Mode::Farthest, sites, seed, shape });
    }
    Err(Error::BadParameter(format!("could not generate {n} sites for {shape}")))
}

/// Random convex polygon on the lattice `[-extent, extent]^2` with at least
/// five vertices and no four cocircular, rotated to a random start. Grid
/// queries near such polygons hit exact distance ties often.
pub fn small_lattice_polygon(seed: u64, extent: i64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut pts: Vec<Point> =
            (0..3 * extent).map(|_| Point::new(rng.gen_range(-extent..=extent), rng.gen_range(-extent..=extent))).collect();
        pts.sort_by_key(|p| (p.x, p.y));
        pts.dedup();
        let mut h: Vec<Point> = Vec::new();
        for pass in 0..2 {
            let floor = h.len();
            for k in 0..pts.len() {
                let p = if pass == 0 { pts[k] } else { pts[pts.len() - 1 - k] };
                while h.len() >= floor + 2 && cross(h[h.len() - 2], h[h.len() - 1], p) <= 0 {
                    h.pop();
                }
                h.push(p);
            }
            h.pop();
        }
        if h.len() >= 5 && validate_convex(&h).is_ok() && check_cocircular(&h).is_ok() {
            let r = rng.gen_range(0..h.len());
            h.rotate_left(r);
            return h;
        }
    }
}

/// Best-fit constant for `value ≈ c · model` in log space, and the largest
/// factor by which any single ratio strays from it.
pub fn fit_constant(ratios: &[f64]) -> (f64, f64) {
    let c = (ratios.iter().map(|r| r.ln()).sum::<f64>() / ratios.len() as f64).exp();
    let spread = ratios.iter().map(|&r| (r / c).max(c / r)).fold(1.0, f64::max);
    (c, spread)
}

/// Random query point and directed line around a site set. Lines are drawn
/// through two points of a box 1.5 times the sites' extent so that empty,
/// full and partial halfplanes all occur.
pub fn random_query(sites: &[Point], rng: &mut impl Rng) -> (Point, DirectedLine) {
    let (minx, maxx) = sites.iter().fold((i64::MAX, i64::MIN), |(a, b), p| (a.min(p.x), b.max(p.x)));
    let (miny, maxy) = sites.iter().fold((i64::MAX, i64::MIN), |(a, b), p| (a.min(p.y), b.max(p.y)));
    let (w, h) = ((maxx - minx).max(2), (maxy - miny).max(2));
    let pick = |rng: &mut dyn rand::RngCore| {
        let x = rng.gen_range(minx - w / 4..=maxx + w / 4).clamp(-COORD_LIMIT, COORD_LIMIT);
        let y = rng.gen_range(miny - h / 4..=maxy + h / 4).clamp(-COORD_LIMIT, COORD_LIMIT);
        Point::new(x, y)
    };
    let q = if rng.gen_bool(0.1) { sites[rng.gen_range(0..sites.len())] } else { pick(rng) };
    loop {
        let a = if rng.gen_bool(0.05) { sites[rng.gen_range(0..sites.len())] } else { pick(rng) };
        let b = pick(rng);
        if a != b {
            return (q, DirectedLine { a, b });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad() -> Vec<Point> {
        vec![Point::new(0, 0), Point::new(4, 0), Point::new(5, 3), Point::new(1, 4)]
    }

    #[test]
    fn bf_query_examples() {
        let l = DirectedLine::new(Point::new(-9, 2), Point::new(9, 2)).unwrap();
        assert_eq!(bf_query(&quad(), Point::new(0, 0), &l, Mode::Farthest), QueryOutcome::Site(3));
        assert_eq!(bf_query(&quad(), Point::new(0, 0), &l, Mode::Nearest), QueryOutcome::Site(4));
        let l = DirectedLine::new(Point::new(-9, 9), Point::new(9, 9)).unwrap();
        assert_eq!(bf_query(&quad(), Point::new(0, 0), &l, Mode::Farthest), QueryOutcome::EmptyHalfplane);
        let l = DirectedLine::new(Point::new(9, -9), Point::new(9, 9)).unwrap();
        assert_eq!(bf_query(&quad(), Point::new(4, 0), &l, Mode::Nearest), QueryOutcome::Site(2));
    }

    #[test]
    fn bf_delaunay_examples() {
        assert_eq!(bf_delaunay(&quad(), Mode::Farthest).unwrap(), vec![[1, 2, 3], [1, 3, 4]]);
        assert_eq!(bf_delaunay(&quad(), Mode::Nearest).unwrap(), vec![[1, 2, 4], [2, 3, 4]]);
        for mode in [Mode::Farthest, Mode::Nearest] {
            assert_eq!(bf_delaunay(&quad()[..3], mode).unwrap(), vec![[1, 2, 3]]);
        }
        let square = [Point::new(0, 0), Point::new(1, 0), Point::new(1, 1), Point::new(0, 1)];
        assert!(bf_delaunay(&square, Mode::Nearest).is_err());
    }

    #[test]
    fn generator_is_deterministic_and_valid() {
        for shape in [Shape::Circle, Shape::Ellipse, Shape::ParabolaArc] {
            let a = gen_convex(40, 7, shape).unwrap();
            let b = gen_convex(40, 7, shape).unwrap();
            assert_eq!(a, b);
            validate_convex(&a.sites).unwrap();
            check_cocircular(&a.sites).unwrap();
        }
        let four = gen_convex(4, 7, Shape::Circle).unwrap();
        validate_convex(&four.sites).unwrap();
    }

    #[test]
    fn cocircular_square_is_caught() {
        let pts = [Point::new(2, 0), Point::new(1, 1), Point::new(0, 2), Point::new(-2, 0), Point::new(0, -2)];
        assert!(check_cocircular(&pts).is_err());
    }
}
