use thiserror::Error;

/// Everything that can go wrong across the library. CLI maps any of these to
/// exit code 1; usage problems never reach this type (clap exits 2 itself).
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate face ({0} {1} {2}): vertices must be pairwise distinct")]
    DegenerateFace(u32, u32, u32),

    #[error("degenerate edge ({0} {0}): endpoints must be distinct")]
    DegenerateEdge(u32),

    #[error("duplicate face ({0} {1} {2})")]
    DuplicateFace(u32, u32, u32),

    #[error("vertex {0} is not in the complex")]
    UnknownVertex(u32),

    #[error("face subset is empty")]
    EmptyFaceSubset,

    #[error("face ({0} {1} {2}) is not a face of the complex")]
    ForeignFace(u32, u32, u32),

    #[error("complex has no faces")]
    NoFaces,

    #[error("pattern must be pure (every edge and vertex contained in a face)")]
    ImpurePattern,

    #[error("{what}: {have} exceeds the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        have: usize,
        cap: usize,
    },

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("unknown catalog complex `{0}`; known names: {}", crate::surfaces::CATALOG_NAMES.join(", "))]
    UnknownCatalog(String),

    #[error("grid parameters (m={0}, k={1}) do not produce a simplicial torus; both must be at least 3")]
    NonSimplicialTorus(u32, u32),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("non-simplicial map: {0}")]
    NonSimplicialMap(String),

    #[error("complex is not a closed surface")]
    NotClosedSurface,

    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),

    #[error("log-probability undefined: p = {p} forces a fixed face count, but f2 = {f2}")]
    DegenerateLogProbability { p: f64, f2: u64 },

    #[error("tetrahedra are not pairwise face disjoint")]
    OverlappingTetrahedra,

    #[error("{path}:{line}:{column}: {msg}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        msg: String,
    },

    #[error("invalid list directory: {0}")]
    InvalidList(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Attach a file path to a raw I/O error so the message names the file.
    pub fn io_at(path: &std::path::Path, e: std::io::Error) -> Error {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
