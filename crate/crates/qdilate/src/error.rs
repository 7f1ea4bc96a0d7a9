use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },
    #[error("eigenvalue {eigenvalue:.3e} below clamp threshold -{clamp:.3e}")]
    NegativeEigenvalue { eigenvalue: f64, clamp: f64 },
    #[error("{which} is not a contraction (norm {norm:.12})")]
    NotContraction { which: String, norm: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("partial map is not isometric on the source subspace (residual {residual:.3e})")]
    NotIsometricOnSource { residual: f64 },
    #[error("power iteration did not converge (last gap {gap:.3e})")]
    MaxIterationsExceeded { gap: f64 },
    #[error("q is not unimodular (|q| = {modulus:.15})")]
    NotUnimodular { modulus: f64 },
    #[error("pair does not q-commute (residual {residual:.3e})")]
    NotQCommuting { residual: f64 },
    #[error("pairs have different twists")]
    MixedTwist,
    #[error("empty list of pairs")]
    EmptyList,
    #[error("unitary part is not reducing (residual {residual:.3e})")]
    NotReducing { residual: f64 },
    #[error("inconsistent defect ranks (residual {residual:.3e})")]
    RankDeficiency { residual: f64 },
    #[error("symbols act on different fibers or twists")]
    FiberMismatch,
    #[error("operator is not in the q-commutant of the shift (residual {residual:.3e})")]
    NotQCommutant { residual: f64 },
    #[error("lift is not in model form: {0}")]
    NotModelForm(String),
    #[error("fundamental equation residual {residual:.3e}")]
    FundamentalEquationResidual { residual: f64 },
    #[error("solution of the canonical intertwining is not unitary (residual {residual:.3e})")]
    NonUnitarySolution { residual: f64 },
    #[error("map does not intertwine the pairs (residual {residual:.3e})")]
    NotIntertwiner { residual: f64 },
    #[error("resolvent I - zT* is numerically singular at z = {re}+{im}i")]
    SingularResolvent { re: f64, im: f64 },
    #[error("product is not completely non-unitary (unitary part of dimension {unitary_dim})")]
    NotCnu { unitary_dim: usize },
    #[error("truncation tail {tail:.3e} exceeds {limit:.1e}")]
    TailTooLarge { tail: f64, limit: f64 },
    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
