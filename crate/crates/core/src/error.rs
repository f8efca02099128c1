use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("structural error: {0}")]
    Structure(String),
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("graph is disconnected; the length metric would be infinite")]
    Disconnected,
    #[error("degenerate restriction: subset has zero reference mass")]
    DegenerateRestriction,
    #[error("unknown point `{0}`")]
    UnknownPoint(String),
    #[error("point index {0} out of range")]
    PointOutOfRange(usize),
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error("mass mismatch: source mass {source_mass} vs target mass {target_mass}")]
    MassMismatch { source_mass: f64, target_mass: f64 },
    #[error("plan already map-like on this ball")]
    AlreadyMapLike,
    #[error("no geodesic between points {0} and {1}")]
    NoGeodesic(usize, usize),
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
    #[error("unknown scenario or gadget `{0}`")]
    UnknownScenario(String),
    #[error("degenerate ball: only the basepoint lies within the radius")]
    DegenerateBall,
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
