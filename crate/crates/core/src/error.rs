use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{file} line {line}: malformed header: {msg}")]
    Header {
        file: &'static str,
        line: usize,
        msg: String,
    },
    #[error("{file} line {line}: {msg}")]
    Parse {
        file: &'static str,
        line: usize,
        msg: String,
    },
    #[error("ele line {line}: vertex index {index} out of range (mesh has {count} vertices)")]
    VertexOutOfRange {
        line: usize,
        index: i64,
        count: usize,
    },
    #[error("ele line {line}: triangle has zero area")]
    ZeroArea { line: usize },
    #[error("ele line {line}: edge ({a}, {b}) is shared by more than two triangles")]
    NonManifoldEdge { line: usize, a: usize, b: usize },
    #[error("invalid triangulation: {0}")]
    InvalidMesh(String),
    #[error("triangle {0} is degenerate")]
    DegenerateTriangle(usize),
    #[error("vertex {0} has no incident triangle")]
    IsolatedVertex(usize),
    #[error("mesh is disconnected: {} node(s) unreachable from root {root} (first: {:?})", unreached.len(), &unreached[..unreached.len().min(8)])]
    Disconnected { root: usize, unreached: Vec<usize> },
    #[error("quadtree depth cap {cap} exceeded (duplicate or coincident points?)")]
    QuadtreeDepth { cap: usize },
    #[error("walk strategy C requires a spanning tree in the walk context")]
    MissingSpanningTree,
    #[error("cannot interpolate at a query located outside the mesh")]
    OutsideQuery,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
