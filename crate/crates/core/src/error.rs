use thiserror::Error;

/// Errors raised by the mesh, geometry and discretization pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("mesh parse error at line {line}: {message}")]
    MeshParse { line: usize, message: String },

    #[error("tangential cut: level set vanishes on face {face}")]
    TangentialCut { face: usize },

    #[error("unresolved interface in cell {cell}: {reason}; refine the mesh")]
    UnresolvedInterface { cell: usize, reason: String },

    #[error("interface not resolved in cell {cell}: gamma = {gamma:.3e} < {min_gamma}; refine the mesh")]
    InterfaceNotResolved { cell: usize, gamma: f64, min_gamma: f64 },

    #[error("projection onto the interface did not converge after {iterations} iterations")]
    ProjectionFailed { iterations: usize },

    #[error("non-simple polygon: {0}")]
    NonSimplePolygon(String),

    #[error(
        "mesh too coarse for delta = {delta:.3e}: both sides of cell {cell} fail the ball condition; refine the mesh"
    )]
    MeshTooCoarse { cell: usize, delta: f64 },

    #[error("no suitable agglomeration neighbor for cell {cell} (side {side}, h = {h:.3e}, delta = {delta:.3e}); refine the mesh")]
    NoSuitableNeighbor { cell: usize, side: u8, h: f64, delta: f64 },

    #[error("agglomerate {agglomerate} has a disconnected interface")]
    DisconnectedInterface { agglomerate: usize },

    #[error(
        "cell {cell} fails the ball condition after agglomeration (side {side}, radius {radius:.3e} < {required:.3e})"
    )]
    AgglomerationFailed { cell: usize, side: u8, radius: f64, required: f64 },

    #[error("singular mass matrix on cell {cell} (condition {condition:.3e}); the sub-cell likely fails the delta-ball condition")]
    SingularMass { cell: usize, condition: f64 },

    #[error("Nitsche form not coercive on cell {cell}; increase eta")]
    NotCoercive { cell: usize },

    #[error("local factorization failed on cell {cell}: {reason}")]
    LocalFactorization { cell: usize, reason: String },

    #[error("boundary face {face} is cut by the interface")]
    CutBoundaryFace { face: usize },

    #[error("factorization breakdown at row {row}: pivot {pivot:.3e} (diagonal {diagonal:.3e})")]
    Factorization { row: usize, pivot: f64, diagonal: f64 },

    #[error("linear solve residual {residual:.3e} exceeds {tolerance:.1e}")]
    SolveResidual { residual: f64, tolerance: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
