use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("inadmissible signature: {0}")]
    InadmissibleSignature(String),
    #[error("bad gluing: {0}")]
    BadGluing(String),
    #[error("count mismatch: {0}")]
    CountMismatch(String),
    #[error("edge {0} is external")]
    ExternalEdge(usize),
    #[error("edge {0} bounds a self-folded triangle")]
    SelfFoldedEdge(usize),
    #[error("unknown edge {0}")]
    UnknownEdge(usize),
    #[error("flip word not applicable at step {step}: {reason}")]
    InapplicableWord { step: usize, reason: String },
    #[error("missing variable {0}")]
    MissingVariable(String),
    #[error("half power of a non-square {0}")]
    NonSquareHalfPower(String),
    #[error("value outside the semifield domain: {0}")]
    DomainViolation(String),
    #[error("tropical limit probe diverged at eps = {0}")]
    Diverged(String),
    #[error("non-positive coefficient in {0}")]
    NonPositiveCoefficient(String),
    #[error("vertex {0} is not a hole")]
    NotAHoleVertex(usize),
    #[error("power {0} is not integral on a positive semifield")]
    NonIntegralPowerOnPositiveTag(String),
    #[error("inconsistent spiral at vertex {0}")]
    InconsistentSpiral(usize),
    #[error("path is disconnected at position {0}")]
    DisconnectedPath(usize),
    #[error("chart is not in the tangent-horocycle subspace: {0}")]
    NotInA0(String),
    #[error("vanishing property violated: {0}")]
    VanishingPropertyViolated(String),
    #[error("lamination is not integral: {0}")]
    NonIntegralLamination(String),
    #[error("curve is not closed")]
    OpenCurve,
    #[error("not a Markov triple: {0}")]
    NotMarkov(String),
    #[error("not on the area locus: {0}")]
    NotOnAreaLocus(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
