//! Browser bindings. Every entry point takes and returns strings or
//! primitives so the same functions run natively under `cargo test`.

use hpq_core::dual_tree::DualTree;
use hpq_core::geom::{DirectedLine, Mode, Point};
use hpq_core::interval::IntervalStructure;
use hpq_core::okey_dokey::OkeyDokey;
use hpq_core::testkit::{check_cocircular, gen_convex};
use hpq_core::{ConvexSequence, QueryOutcome};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

/// Largest instance the page will build.
pub const MAX_SITES: u32 = 2000;

#[derive(Serialize, Deserialize)]
struct Instance {
    mode: String,
    points: Vec<[i64; 2]>,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    match s {
        "farthest" => Ok(Mode::Farthest),
        "nearest" => Ok(Mode::Nearest),
        _ => Err(format!("unknown mode {s:?}")),
    }
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Farthest => "farthest",
        Mode::Nearest => "nearest",
    }
}

fn load(json: &str) -> Result<(ConvexSequence, Mode), String> {
    let inst: Instance = serde_json::from_str(json).map_err(|e| format!("malformed instance: {e}"))?;
    let mode = parse_mode(&inst.mode)?;
    if inst.points.len() < 3 {
        return Err("need at least 3 sites".into());
    }
    let seq = ConvexSequence::new(inst.points.iter().map(|&[x, y]| Point::new(x, y)).collect()).map_err(|e| e.to_string())?;
    check_cocircular(seq.points()).map_err(|e| e.to_string())?;
    Ok((seq, mode))
}

/// Convex instance as `{"mode": ..., "points": [[x, y], ...]}`.
#[wasm_bindgen]
pub fn generate(n: u32, seed: u32, shape: &str, mode: &str) -> Result<String, String> {
    if n > MAX_SITES {
        return Err(format!("at most {MAX_SITES} sites"));
    }
    let mode = parse_mode(mode)?;
    let shape = shape.parse().map_err(|e: hpq_core::Error| e.to_string())?;
    let inst = gen_convex(n as usize, seed as u64, shape).map_err(|e| e.to_string())?;
    let points = inst.sites.iter().map(|p| [p.x, p.y]).collect();
    Ok(serde_json::to_string(&Instance { mode: mode_name(mode).into(), points }).expect("instance serializes"))
}

/// Answers the query at `(qx, qy)` restricted to the closed left side of
/// the line through `(ax, ay)` and `(bx, by)`. Returns
/// `{"site": k | null, "left": [...]}` with 1-based site numbers; `left`
/// lists the sites on the query side.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn query(instance: &str, structure: &str, qx: i32, qy: i32, ax: i32, ay: i32, bx: i32, by: i32) -> Result<String, String> {
    let (sites, mode) = load(instance)?;
    let q = Point::new(qx as i64, qy as i64);
    let line = DirectedLine::new(Point::new(ax as i64, ay as i64), Point::new(bx as i64, by as i64)).map_err(|e| e.to_string())?;
    let left: Vec<usize> = (1..=sites.len()).filter(|&i| hpq_core::geom::side_of_line(&line, sites.site(i)) >= 0).collect();
    let out = match structure {
        "interval" => IntervalStructure::build(sites, mode).map_err(|e| e.to_string())?.query(q, &line),
        "okey-dokey" => OkeyDokey::build_depth(sites, mode, 2).map_err(|e| e.to_string())?.query(q, &line),
        _ => return Err(format!("unknown structure {structure:?}")),
    };
    let site = match out {
        QueryOutcome::Site(k) => Some(k),
        QueryOutcome::EmptyHalfplane => None,
    };
    Ok(serde_json::json!({ "site": site, "left": left }).to_string())
}

/// Triangles of the farthest- or nearest-point triangulation as triples of
/// 1-based site numbers.
#[wasm_bindgen]
pub fn triangulation(instance: &str) -> Result<String, String> {
    let (sites, mode) = load(instance)?;
    let tree = DualTree::from_points(mode, sites.points()).map_err(|e| e.to_string())?;
    let tris: Vec<[usize; 3]> = tree.triangles();
    Ok(serde_json::to_string(&tris).expect("triangles serialize"))
}
