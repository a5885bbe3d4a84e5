use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("2L/delta = {0} is not a positive integer")]
    NonIntegerPeriod(f64),
    #[error("scaled hole {0} intersects the outer boundary")]
    HoleCollision(usize),
    #[error("hole is not strictly inside the unit cell")]
    HoleOutOfCell,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("mesh generation failed: {0}")]
    MeshFailure(String),
    #[error("parse error at line {line}: {msg}")]
    ParseError { line: usize, msg: String },
    #[error("unknown boundary tag {0}")]
    UnknownTag(String),
    #[error("degenerate element {0}")]
    SingularElement(usize),
    #[error("singular system: {0}")]
    SingularSystem(String),
    #[error("mesh has no interface edges")]
    MissingInterface,
    #[error("compatibility condition violated: residual {0:e}")]
    CompatibilityViolated(f64),
    #[error("corrector index ({0},{1}) is not supported")]
    IndexUnsupported(usize, usize),
    #[error("resonant exponent for n={0}, q={1}")]
    ResonantCase(usize, usize),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("ill-conditioned extraction: {0}")]
    IllConditioned(String),
    #[error("extraction unstable: scatter {0:e}")]
    ExtractionUnstable(f64),
    #[error("point ({0}, {1}) is outside the evaluation region")]
    OutsideRegion(f64, f64),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn at(self, stage: &'static str) -> Error {
        Error::Stage { stage, source: Box::new(self) }
    }
}
