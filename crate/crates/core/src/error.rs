use thiserror::Error;

/// Errors raised by geometry, discretization and solver routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("edge {edge} has zero length")]
    DegenerateEdge { edge: usize },
    #[error("edges {first} and {second} intersect")]
    SelfIntersection { first: usize, second: usize },
    #[error("vertex {vertex} has interior angle pi and is not a corner")]
    CollinearCorner { vertex: usize },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid mesh spec: {0}")]
    InvalidSpec(String),
    #[error("unsupported order {0}")]
    UnsupportedOrder(usize),
    #[error("segment index {index} out of range for {count} segments")]
    SegmentOutOfRange { index: usize, count: usize },
    #[error("source and target coincide at arclength {0}")]
    CoincidentPoints(f64),
    #[error("source at corner arclength {0}: normal undefined")]
    CornerSource(f64),
    #[error("corner parameter {0} outside (-1, 1)")]
    InvalidCornerParam(f64),
    #[error("observation point lies on panel {panel}")]
    ObservationOnPanel { panel: usize },
    #[error("integrand is not finite at {at}")]
    NonFiniteIntegrand { at: f64 },
    #[error("adaptive integration exceeded maximum depth near {at}")]
    MaxDepthExceeded { at: f64 },
    #[error("singular system: pivot {pivot:e} at column {column}")]
    SingularSystem { column: usize, pivot: f64 },
    #[error("evaluation at breakpoint arclength {0}")]
    EvaluationAtBreakpoint(f64),
    #[error("point ({x}, {y}) is not strictly inside the polygon")]
    PointNotInterior { x: f64, y: f64 },
    #[error("point placement: {0}")]
    PointPlacement(String),
    #[error("errors must be positive, got {0}")]
    NonPositiveError(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
