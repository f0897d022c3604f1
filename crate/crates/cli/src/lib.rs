//! Library side of the `hpq` command: instance files, query sweeps and
//! report records.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::thread;
use std::time::Instant;

use hpq_core::geom::{ConvexSequence, DirectedLine, Mode, Point};
use hpq_core::interval::IntervalStructure;
use hpq_core::okey_dokey::{planned_cells, OkeyDokey};
use hpq_core::prefix::PrefixStructure;
use hpq_core::testkit::{bf_query, check_cocircular, fit_constant, random_query};
use hpq_core::QueryOutcome;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Calibrated amortized flarb constant.
pub const FLARB_C: f64 = 4.0;

/// A failed command. `Input` maps to exit code 2, `Mismatch` to 1.
#[derive(Debug)]
pub enum Failure {
    Input(String),
    Mismatch(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(s) | Failure::Mismatch(s) => f.write_str(s),
        }
    }
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Mismatch(_) => 1,
        }
    }
}

pub type Outcome<T> = std::result::Result<T, Failure>;

fn input<E: fmt::Display>(context: &str) -> impl FnOnce(E) -> Failure + '_ {
    move |e| Failure::Input(format!("{context}: {e}"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Farthest,
    Nearest,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Farthest => Mode::Farthest,
            ModeArg::Nearest => Mode::Nearest,
        }
    }
}

impl From<Mode> for ModeArg {
    fn from(m: Mode) -> ModeArg {
        match m {
            Mode::Farthest => ModeArg::Farthest,
            Mode::Nearest => ModeArg::Nearest,
        }
    }
}

/// On-disk instance: `{"mode": "farthest", "points": [[x, y], ...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub mode: ModeArg,
    pub points: Vec<[i64; 2]>,
}

impl InstanceFile {
    pub fn new(mode: Mode, sites: &[Point]) -> Self {
        InstanceFile { mode: mode.into(), points: sites.iter().map(|p| [p.x, p.y]).collect() }
    }

    pub fn sites(&self) -> Vec<Point> {
        self.points.iter().map(|&[x, y]| Point::new(x, y)).collect()
    }

    pub fn parse(text: &str) -> Outcome<Self> {
        serde_json::from_str(text).map_err(input("malformed instance file"))
    }

    pub fn load(path: &Path) -> Outcome<Self> {
        let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Sites checked for strict convex position, the coordinate bound and
    /// the no-four-cocircular assumption.
    pub fn checked_sites(&self) -> Outcome<ConvexSequence> {
        let pts = self.sites();
        if pts.len() < 3 {
            return Err(Failure::Input(format!("invalid instance: need at least 3 sites, found {}", pts.len())));
        }
        let seq = ConvexSequence::new(pts).map_err(input("invalid instance"))?;
        check_cocircular(seq.points()).map_err(input("invalid instance"))?;
        Ok(seq)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serializes")
    }
}

/// Worker count for query sweeps: `HPQ_THREADS` if set, else the machine's
/// available parallelism.
pub fn thread_count() -> Outcome<usize> {
    match std::env::var("HPQ_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(t) if t > 0 => Ok(t),
            _ => Err(Failure::Input(format!("HPQ_THREADS must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Maps `f` over `items` on up to `threads` scoped workers, keeping order.
pub fn par_map<T: Sync, R: Send>(items: &[T], threads: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let chunk = items.len().div_ceil(threads.max(1)).max(1);
    thread::scope(|s| {
        let handles: Vec<_> = items.chunks(chunk).map(|c| s.spawn(|| c.iter().map(&f).collect::<Vec<R>>())).collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum StructureArg {
    OkeyDokey,
    Interval,
    Prefix,
}

impl fmt::Display for StructureArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StructureArg::OkeyDokey => "okey-dokey",
            StructureArg::Interval => "interval",
            StructureArg::Prefix => "prefix",
        })
    }
}

pub enum Built {
    Okey(OkeyDokey),
    Interval(Box<IntervalStructure>),
    Prefix(Box<PrefixStructure>),
}

/// One sampled query. Prefix structures use `t` and ignore the line.
#[derive(Clone, Debug)]
pub struct Sample {
    pub q: Point,
    pub line: DirectedLine,
    pub t: usize,
}

impl Built {
    pub fn build(kind: StructureArg, sites: ConvexSequence, mode: Mode, depth: usize) -> Outcome<Built> {
        let built = match kind {
            StructureArg::OkeyDokey => OkeyDokey::build_depth(sites, mode, depth).map(Built::Okey),
            StructureArg::Interval => IntervalStructure::build(sites, mode).map(|s| Built::Interval(Box::new(s))),
            StructureArg::Prefix => PrefixStructure::from_points(mode, sites.points()).map(|s| Built::Prefix(Box::new(s))),
        };
        built.map_err(input("build failed"))
    }

    /// Answer and work count: locator calls, subqueries, or 1 for a prefix.
    pub fn query(&self, s: &Sample) -> (QueryOutcome, usize) {
        match self {
            Built::Okey(o) => {
                let (out, b) = o.query_counted(s.q, &s.line);
                (out, b.calls)
            }
            Built::Interval(i) => {
                let (out, r) = i.query_counted(s.q, &s.line);
                (out, r.subqueries)
            }
            Built::Prefix(p) => (QueryOutcome::Site(p.query_prefix(s.t, s.q).expect("t in range")), 1),
        }
    }
}

/// Brute-force answer for a sample.
pub fn expected(sites: &[Point], mode: Mode, kind: StructureArg, s: &Sample) -> QueryOutcome {
    if kind != StructureArg::Prefix {
        return bf_query(sites, s.q, &s.line, mode);
    }
    let best = (1..=s.t).reduce(|a, b| if mode.better(s.q, sites[b - 1], b, sites[a - 1], a) { b } else { a });
    QueryOutcome::Site(best.expect("t >= 1"))
}

pub fn samples(sites: &[Point], count: usize, seed: u64) -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let (q, line) = random_query(sites, &mut rng);
            Sample { q, line, t: rng.gen_range(1..=sites.len()) }
        })
        .collect()
}

/// Checks every sample against brute force. Returns the number checked or
/// the first mismatch.
pub fn verify(built: &Built, sites: &[Point], mode: Mode, kind: StructureArg, samples: &[Sample], threads: usize) -> Outcome<usize> {
    let results = par_map(samples, threads, |s| {
        let got = built.query(s).0;
        let want = expected(sites, mode, kind, s);
        (got != want)
            .then(|| format!("q ({}, {}) line {:?} t {}: {kind} answered {got:?}, brute force {want:?}", s.q.x, s.q.y, s.line, s.t))
    });
    match results.into_iter().enumerate().find_map(|(i, r)| r.map(|e| (i, e))) {
        Some((i, e)) => Err(Failure::Mismatch(format!("query {i} mismatch: {e}"))),
        None => Ok(samples.len()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: usize,
    pub delta: usize,
    pub cumulative: usize,
    pub potential: f64,
    pub grappa_writes: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FlarbReport {
    pub n: usize,
    pub cumulative: usize,
    /// `cumulative / (n lg n)`.
    pub fitted_constant: f64,
    /// Largest `(delta + ΔΦ) / lg(2m + 1)` over steps with `m` dual nodes.
    pub worst_step: f64,
    pub bound_constant: f64,
    pub steps: Vec<StepRecord>,
}

impl FlarbReport {
    pub fn holds(&self) -> bool {
        self.fitted_constant <= self.bound_constant && self.worst_step <= self.bound_constant + 1e-9
    }
}

/// Replays insertions into a prefix structure, recording pointer changes,
/// potential and persistent writes per step.
pub fn bench_flarb(sites: &[Point], mode: Mode) -> Outcome<FlarbReport> {
    let mut p = PrefixStructure::new(mode);
    let mut steps = Vec::with_capacity(sites.len());
    let (mut cumulative, mut potential, mut worst) = (0, 0.0, 0.0f64);
    for (i, &pt) in sites.iter().enumerate() {
        p.push(pt).map_err(input("insertion failed"))?;
        let st = *p.stats().last().expect("one record per push");
        cumulative += st.delta;
        potential += st.delta_phi;
        let nodes = p.dual().node_count();
        if nodes > 0 {
            worst = worst.max((st.delta as f64 + st.delta_phi) / ((2 * nodes + 1) as f64).log2());
        }
        steps.push(StepRecord { step: i + 1, delta: st.delta, cumulative, potential, grappa_writes: st.writes });
    }
    let n = sites.len();
    let fitted_constant = cumulative as f64 / (n as f64 * (n as f64).log2());
    Ok(FlarbReport { n, cumulative, fitted_constant, worst_step: worst, bound_constant: FLARB_C, steps })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QueryRecord {
    pub query: usize,
    pub structure: String,
    pub budget: usize,
    pub nanos: u128,
}

pub fn bench_queries(built: &Built, kind: StructureArg, samples: &[Sample], threads: usize) -> Vec<QueryRecord> {
    let indexed: Vec<(usize, &Sample)> = samples.iter().enumerate().collect();
    par_map(&indexed, threads, |&(i, s)| {
        let t = Instant::now();
        let (_, budget) = built.query(s);
        QueryRecord { query: i, structure: kind.to_string(), budget, nanos: t.elapsed().as_nanos() }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpaceRecord {
    pub n: usize,
    pub okey_cells: u128,
    pub okey_model: f64,
    pub interval_history: usize,
    pub prefix_history: usize,
    pub history_model: f64,
}

/// Stored Okey-Dokey cells against `n^((2k+1)/(2k-1))` and persistent
/// history entries against `n lg² n`.
pub fn space(instances: &[Vec<Point>], depth: usize, mode: Mode) -> Outcome<Vec<SpaceRecord>> {
    let e = (2 * depth + 1) as f64 / (2 * depth - 1) as f64;
    instances
        .iter()
        .map(|sites| {
            let n = sites.len();
            let interval = IntervalStructure::from_points(sites, mode).map_err(input("build failed"))?;
            let prefix = PrefixStructure::from_points(mode, sites).map_err(input("build failed"))?;
            Ok(SpaceRecord {
                n,
                okey_cells: planned_cells(n, depth),
                okey_model: round1((n as f64).powf(e)),
                interval_history: interval.history_len(),
                prefix_history: prefix.history_len(),
                history_model: round1(n as f64 * (n as f64).log2().powi(2)),
            })
        })
        .collect()
}

fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

/// Fitted constants and spreads for the three space series.
pub fn space_fits(rows: &[SpaceRecord]) -> [(&'static str, f64, f64); 3] {
    let fit = |f: &dyn Fn(&SpaceRecord) -> f64| fit_constant(&rows.iter().map(f).collect::<Vec<_>>());
    let a = fit(&|r| r.okey_cells as f64 / r.okey_model);
    let b = fit(&|r| r.interval_history as f64 / r.history_model);
    let c = fit(&|r| r.prefix_history as f64 / r.history_model);
    [("okey-dokey", a.0, a.1), ("interval", b.0, b.1), ("prefix", c.0, c.1)]
}

pub fn write_csv<R: Serialize>(rows: &[R], out: &mut dyn Write) -> Outcome<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(input("cannot write csv"))?;
    }
    w.flush().map_err(input("cannot write csv"))
}
