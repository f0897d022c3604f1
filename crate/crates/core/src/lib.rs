//! Farthest- and nearest-point queries restricted to a halfplane, over
//! sites in convex position.

pub mod dual_tree;
pub mod error;
pub mod flarb;
pub mod geom;
pub mod grappa;
pub mod interval;
pub mod locator;
pub mod okey_dokey;
pub mod persistence;
pub mod prefix;
pub mod testkit;

pub use error::{Error, Result};
pub use geom::{ConvexSequence, DirectedLine, LeftInterval, Mode, Point};

/// Answer to a halfplane query: a 1-based site index, or nothing when no
/// site lies on the closed left side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QueryOutcome {
    Site(usize),
    EmptyHalfplane,
}
