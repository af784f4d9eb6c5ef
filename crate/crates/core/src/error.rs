use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("maximal simplex {simplex:?} has volume zero")]
    NonSimplicial { simplex: Vec<usize> },

    #[error("simplices do not tile the cone: {0}")]
    NotCovering(String),

    #[error("fan is not projective: {0}")]
    NotProjective(String),

    #[error("points do not lie on a height-one hyperplane: {0}")]
    BadGorenstein(String),

    #[error("simplex {simplex:?} is singular")]
    SingularSimplex { simplex: Vec<usize> },

    #[error("series has a zero leading coefficient")]
    ZeroLeadingCoefficient,

    #[error("pole of order {order} remains after summation")]
    PoleRemains { order: i64 },

    #[error("no generic direction found after {attempts} attempts")]
    NonGenericDirection { attempts: usize },

    #[error("Euler characteristic {value} is not an integer")]
    NonInteger { value: String },

    #[error("sector {sector:?}: module has dimension {module} but algebra has {algebra}")]
    DualityMismatch {
        sector: Vec<i64>,
        algebra: usize,
        module: usize,
    },

    #[error("{0} is not an interior simplex")]
    NotInterior(String),

    #[error("supplied classes are linearly dependent (rank {rank} < {expected})")]
    NotABasis { rank: usize, expected: usize },

    #[error("lattice point {0:?} is not in the interior of the cone")]
    InteriorRequired(Vec<i64>),

    #[error("lattice point {0:?} is not in the cone")]
    NotInCone(Vec<i64>),

    #[error("candidate pairing references {what} {point:?} which was not supplied")]
    MissingComponent { what: &'static str, point: Vec<i64> },

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
}
