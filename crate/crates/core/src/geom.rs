//! Exact integer predicates.
//!
//! Coordinates are bounded by `COORD_LIMIT` so every determinant below fits
//! in an `i128` without overflow.

use std::cmp::Ordering;

use crate::error::{Error, Result};

pub const COORD_LIMIT: i64 = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Point {
    pub x: i64,
    pub y: i64,
}

impl Point {
    pub const fn new(x: i64, y: i64) -> Self {
        Point { x, y }
    }

    pub fn in_range(self) -> bool {
        self.x.abs() <= COORD_LIMIT && self.y.abs() <= COORD_LIMIT
    }

    /// Mirror image across the x axis.
    pub fn reflect(self) -> Self {
        Point::new(self.x, -self.y)
    }
}

impl From<(i64, i64)> for Point {
    fn from((x, y): (i64, i64)) -> Self {
        Point::new(x, y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DirectedLine {
    pub a: Point,
    pub b: Point,
}

impl DirectedLine {
    pub fn new(a: Point, b: Point) -> Result<Self> {
        if a == b {
            return Err(Error::DegenerateLine);
        }
        Ok(DirectedLine { a, b })
    }

    /// The same line after `Point::reflect`, reversed so the left side maps
    /// onto the reflected left side.
    pub fn reflect(self) -> Self {
        DirectedLine { a: self.b.reflect(), b: self.a.reflect() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Farthest,
    Nearest,
}

impl Mode {
    pub fn sign(self) -> i32 {
        match self {
            Mode::Farthest => -1,
            Mode::Nearest => 1,
        }
    }

    /// True if `a` beats `b` as an answer for `q`, ties going to the
    /// smaller label.
    pub fn better(self, q: Point, a: Point, la: usize, b: Point, lb: usize) -> bool {
        match (cmp_dist(q, a, b), self) {
            (Ordering::Equal, _) => la < lb,
            (Ordering::Less, Mode::Nearest) | (Ordering::Greater, Mode::Farthest) => true,
            _ => false,
        }
    }
}

/// Exact rational point `(nx / d, ny / d)` with `d > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RationalPoint {
    pub nx: i128,
    pub ny: i128,
    pub d: i128,
}

impl RationalPoint {
    /// Compares the distances from this point to `a` and to `b`.
    pub fn cmp_dist(&self, a: Point, b: Point) -> Ordering {
        // d * (|p - a|^2 - |p - b|^2) = d * (|a|^2 - |b|^2) - 2 * n . (a - b)
        let sq = |p: Point| p.x as i128 * p.x as i128 + p.y as i128 * p.y as i128;
        let dot = self.nx * (a.x - b.x) as i128 + self.ny * (a.y - b.y) as i128;
        (self.d * (sq(a) - sq(b)) - 2 * dot).cmp(&0)
    }

    /// `(p - self) * d`, a vector with the same direction as `p - self`.
    pub fn offset_to(&self, p: Point) -> (i128, i128) {
        (p.x as i128 * self.d - self.nx, p.y as i128 * self.d - self.ny)
    }
}

#[inline]
pub fn cross(a: Point, b: Point, c: Point) -> i128 {
    let (bx, by) = ((b.x - a.x) as i128, (b.y - a.y) as i128);
    let (cx, cy) = ((c.x - a.x) as i128, (c.y - a.y) as i128);
    bx * cy - by * cx
}

#[inline]
pub fn orientation(a: Point, b: Point, c: Point) -> i32 {
    cross(a, b, c).signum() as i32
}

#[inline]
pub fn side_of_line(l: &DirectedLine, p: Point) -> i32 {
    orientation(l.a, l.b, p)
}

/// Positive when `d` is strictly inside the circle through the
/// counterclockwise triangle `a, b, c`.
pub fn incircle(a: Point, b: Point, c: Point, d: Point) -> i32 {
    let v = |p: Point| ((p.x - d.x) as i128, (p.y - d.y) as i128);
    let (ax, ay) = v(a);
    let (bx, by) = v(b);
    let (cx, cy) = v(c);
    let det =
        (ax * ax + ay * ay) * (bx * cy - cx * by) - (bx * bx + by * by) * (ax * cy - cx * ay) + (cx * cx + cy * cy) * (ax * by - bx * ay);
    det.signum() as i32
}

/// Whether `d` breaks the Delaunay condition of `(a, b, c)` for `mode`.
///
/// Panics if the triangle is not counterclockwise.
pub fn incircle_conflict(a: Point, b: Point, c: Point, d: Point, mode: Mode) -> bool {
    assert!(orientation(a, b, c) > 0, "incircle_conflict: triangle is not counterclockwise");
    incircle(a, b, c, d) * mode.sign() > 0
}

pub fn dist2(a: Point, b: Point) -> i128 {
    let dx = (a.x - b.x) as i128;
    let dy = (a.y - b.y) as i128;
    dx * dx + dy * dy
}

pub fn cmp_dist(q: Point, a: Point, b: Point) -> Ordering {
    dist2(q, a).cmp(&dist2(q, b))
}

pub fn circumcenter(a: Point, b: Point, c: Point) -> Result<RationalPoint> {
    let (bx, by) = ((b.x - a.x) as i128, (b.y - a.y) as i128);
    let (cx, cy) = ((c.x - a.x) as i128, (c.y - a.y) as i128);
    let mut d = 2 * (bx * cy - by * cx);
    if d == 0 {
        return Err(Error::Collinear);
    }
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    let mut nx = a.x as i128 * d + (cy * b2 - by * c2);
    let mut ny = a.y as i128 * d + (bx * c2 - cx * b2);
    if d < 0 {
        d = -d;
        nx = -nx;
        ny = -ny;
    }
    Ok(RationalPoint { nx, ny, d })
}

/// Orders directions by counterclockwise angle measured from `base`, with
/// `base` itself at angle zero. Vectors must be nonzero.
pub fn angle_cmp(base: (i128, i128), u: (i128, i128), v: (i128, i128)) -> Ordering {
    let half = |w: (i128, i128)| {
        let cr = base.0 * w.1 - base.1 * w.0;
        let dot = base.0 * w.0 + base.1 * w.1;
        if cr > 0 || (cr == 0 && dot > 0) {
            0
        } else {
            1
        }
    };
    half(u).cmp(&half(v)).then_with(|| {
        let cr = u.0 * v.1 - u.1 * v.0;
        0.cmp(&cr)
    })
}

fn vec(a: Point, b: Point) -> (i128, i128) {
    ((b.x - a.x) as i128, (b.y - a.y) as i128)
}

/// Points in strictly convex counterclockwise position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvexSequence {
    pts: Vec<Point>,
}

impl ConvexSequence {
    pub fn new(pts: Vec<Point>) -> Result<Self> {
        validate_convex(&pts)?;
        Ok(ConvexSequence { pts })
    }

    pub fn points(&self) -> &[Point] {
        &self.pts
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }

    pub fn into_inner(self) -> Vec<Point> {
        self.pts
    }

    /// 1-based access.
    pub fn site(&self, i: usize) -> Point {
        self.pts[i - 1]
    }

    pub fn push(&mut self, p: Point) -> Result<()> {
        check_append(&self.pts, p)?;
        self.pts.push(p);
        Ok(())
    }
}

pub fn validate_convex(pts: &[Point]) -> Result<()> {
    for (i, p) in pts.iter().enumerate() {
        if !p.in_range() {
            return Err(Error::OutOfRange { index: i + 1 });
        }
    }
    let n = pts.len();
    if n == 2 && pts[0] == pts[1] {
        return Err(Error::NotConvex { index: 2 });
    }
    if n < 3 {
        return Ok(());
    }
    for i in 0..n {
        let (a, b, c) = (pts[i], pts[(i + 1) % n], pts[(i + 2) % n]);
        if orientation(a, b, c) <= 0 {
            return Err(Error::NotConvex { index: (i + 1) % n + 1 });
        }
    }
    // one full turn: edge angles measured from the first edge increase
    let e0 = vec(pts[0], pts[1]);
    for i in 1..n - 1 {
        let u = vec(pts[i], pts[i + 1]);
        let v = vec(pts[i + 1], pts[(i + 2) % n]);
        if angle_cmp(e0, u, v) != Ordering::Less {
            return Err(Error::NotConvex { index: i + 2 });
        }
    }
    Ok(())
}

/// Checks that `pts + [p]` stays strictly convex and counterclockwise,
/// given that `pts` already is. Constant time.
pub fn check_append(pts: &[Point], p: Point) -> Result<()> {
    let n = pts.len();
    let bad = Err(Error::NotConvex { index: n + 1 });
    if !p.in_range() {
        return Err(Error::OutOfRange { index: n + 1 });
    }
    match n {
        0 => Ok(()),
        1 => {
            if pts[0] == p {
                bad
            } else {
                Ok(())
            }
        }
        2 => {
            if orientation(pts[0], pts[1], p) > 0 {
                Ok(())
            } else {
                bad
            }
        }
        _ => {
            let (first, second, prev, last) = (pts[0], pts[1], pts[n - 2], pts[n - 1]);
            if orientation(prev, last, p) <= 0 || orientation(last, p, first) <= 0 || orientation(p, first, second) <= 0 {
                return bad;
            }
            let e0 = vec(first, second);
            let a = vec(prev, last);
            let b = vec(last, p);
            let c = vec(p, first);
            if angle_cmp(e0, a, b) == Ordering::Less && angle_cmp(e0, b, c) == Ordering::Less {
                Ok(())
            } else {
                bad
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeftInterval {
    Empty,
    Full,
    /// Inclusive 1-based cyclic range, counterclockwise from the first index.
    Interval(usize, usize),
}

/// Maximal run of hull vertices in the closed left halfplane of `l`.
///
/// `O(log n)`: locate the extreme vertices in the normal directions by
/// binary search over edge angles, then binary search each monotone chain.
pub fn left_interval(hull: &[Point], l: &DirectedLine) -> LeftInterval {
    let n = hull.len();
    assert!(n >= 3, "left_interval needs at least three points");
    let dir = vec(l.a, l.b);
    let e0 = vec(hull[0], hull[1]);
    let edge = |t: usize| vec(hull[t], hull[(t + 1) % n]);
    // number of edges strictly before direction w, in angle order from e0
    let rank = |w: (i128, i128)| {
        let (mut lo, mut hi) = (0, n);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if angle_cmp(e0, edge(mid), w) == Ordering::Less {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo % n
    };
    let kmax = rank((-dir.0, -dir.1));
    let kmin = rank(dir);
    let f = |i: usize| cross(l.a, l.b, hull[i % n]);
    if f(kmax) < 0 {
        return LeftInterval::Empty;
    }
    if f(kmin) >= 0 {
        return LeftInterval::Full;
    }
    // rising chain kmin..kmax: first position with f >= 0
    let up = (kmax + n - kmin) % n;
    let (mut lo, mut hi) = (0, up);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if f(kmin + mid) >= 0 {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let start = (kmin + lo) % n;
    // falling chain kmax..kmin: last position with f >= 0
    let down = (kmin + n - kmax) % n;
    let (mut lo, mut hi) = (0, down);
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        if f(kmax + mid) >= 0 {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    let end = (kmax + lo) % n;
    LeftInterval::Interval(start + 1, end + 1)
}
