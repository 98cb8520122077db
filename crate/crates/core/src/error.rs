use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty image: width and height must both be nonzero")]
    EmptyImage,

    #[error("degenerate color geometry: {0}")]
    DegenerateGeometry(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "half-space intersection is {0}; adjust the inside fraction or RANSAC parameters"
    )]
    HalfspaceIntersection(&'static str),

    #[error("pixel lies outside the palette simplex (distance {distance:.3e})")]
    OutsideSimplex { distance: f64 },

    #[error("index {index} out of range for palette with {len} colors")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("the background color (index 0) cannot be removed")]
    BackgroundRemoval,

    #[error("palette must keep at least 2 colors")]
    PaletteTooSmall,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("energy became non-finite at pyramid level {level}")]
    NonFiniteEnergy { level: usize },

    #[error("solve cancelled")]
    Cancelled,

    #[error("unsupported image: {0}")]
    UnsupportedImage(String),

    #[error("layer stack format error: {0}")]
    Format(String),

    #[error("missing file {}", .0.display())]
    MissingFile(std::path::PathBuf),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Image(#[from] ::image::ImageError),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
