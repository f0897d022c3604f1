use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("line endpoints coincide")]
    DegenerateLine,
    #[error("points are collinear")]
    Collinear,
    #[error("coordinate of site {index} exceeds the 2^24 bound")]
    OutOfRange { index: usize },
    #[error("site {index} breaks strict counterclockwise convex position")]
    NotConvex { index: usize },
    #[error("cocircular sites near {index}")]
    Cocircular { index: usize },
    #[error("anchored subtree is not connected to the root")]
    BadAnchoredSet,
    #[error("vertex {0} already exists")]
    VertexExists(usize),
    #[error("vertex {0} is unknown")]
    UnknownVertex(usize),
    #[error("link rejected: {0}")]
    BadLink(&'static str),
    #[error("no edge above vertex {0}")]
    MissingEdge(usize),
    #[error("write outside an open version")]
    NoOpenVersion,
    #[error("oracle search did not converge")]
    OracleDiverged,
    #[error("prefix length {t} out of range 1..={n}")]
    PrefixOutOfRange { t: usize, n: usize },
    #[error("invalid interval ({0}, {1})")]
    BadInterval(usize, usize),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
