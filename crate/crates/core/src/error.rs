use thiserror::Error;

/// Every failure the library can report, one variant per named precondition.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("generator index {index} outside rank {rank}")]
    GeneratorOutOfRange { index: usize, rank: usize },
    #[error("series truncated at different degrees or over different ranks")]
    TruncationMismatch,
    #[error("series has zero augmentation and is not a unit")]
    NotAUnit,
    #[error("augmentation is {found}, expected {expected}")]
    BadAugmentation { expected: String, found: String },
    #[error("cyclic projection needs a series with zero constant term")]
    NonzeroConstantTerm,
    #[error("augmented matrix is singular")]
    SingularAugmentation,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("matrix entries must have zero augmentation")]
    AugmentationNotZero,
    #[error("series is not homogeneous")]
    NotHomogeneous,
    #[error("automorphism is not in the requested filtration step (IA degree {found}, need {needed})")]
    FiltrationTooShallow { needed: usize, found: usize },
    #[error("degree-one part of the automorphism is singular")]
    DegreeOnePartSingular,
    #[error("presentation is not balanced: {relators} relators for {unknowns} unknown generators")]
    Unbalanced { relators: usize, unknowns: usize },
    #[error("abelianized presentation does not identify the reference basis with H (determinant {det})")]
    NotAHomologyCylinder { det: String },
    #[error("relator {0} does not evaluate to 1 under the solved labels")]
    InconsistentRelators(usize),
    #[error("automorphism does not act trivially on homology")]
    NotTorelli,
    #[error("Euler shift {0} is not integral")]
    NonIntegralEulerShift(String),
    #[error("torsion is nonzero in degree {0}, below the requested degree")]
    LowerDegreeNonzero(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
