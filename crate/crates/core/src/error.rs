use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum CoisoError {
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("operands live on different charts")]
    ChartMismatch,
    #[error("unknown coordinate `{0}`")]
    UnknownCoordinate(String),
    #[error("coordinate `{0}` is periodic; only Fourier modes are available for it")]
    PeriodicCoordinate(String),
    #[error("point has {got} coordinates, chart expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("shift entry {0} depends on a fibre coordinate")]
    FibreDependentShift(usize),
    #[error("expected one shift entry per fibre coordinate ({expected}), got {got}")]
    ShiftArity { expected: usize, got: usize },
    #[error("not a vertical section: {0}")]
    NotVertical(String),
    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),
    #[error("bracket series did not terminate within {cap} iterations")]
    CapExceeded { cap: usize },
    #[error("bivector is degenerate")]
    Degenerate,
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("non-constant coefficients: {0}")]
    NonConstant(String),
    #[error("subbundle: {0}")]
    Subbundle(String),
    #[error("form is not supported on the subbundle: {0}")]
    NonAdapted(String),
    #[error("kernel check failed: {0}")]
    KernelCheck(String),
    #[error("form is not closed")]
    NotClosed,
    #[error("form is not in Ω_(≤1): fibrewise degrees {0:?}")]
    NotAffine(Vec<u32>),
    #[error("zero section is not coisotropic: P(π) ≠ 0")]
    NotCoisotropic,
    #[error("section is not λ1-closed: P([π,a]) ≠ 0")]
    NotLambdaClosed,
    #[error("graph(-α) leaves the domain: fibre norm {norm} ≥ bound {bound}")]
    DomainViolation { norm: f64, bound: f64 },
    #[error("jet order {have} is smaller than the requested order {need}")]
    JetOrderTooSmall { have: u32, need: u32 },
    #[error("exact series requires a polynomial (non-jet) input")]
    JetInput,
    #[error("wrong form degree: {0}")]
    WrongFormDegree(String),
    #[error("bivector is not Poisson: [π,π] ≠ 0")]
    NotPoisson,
    #[error("not a product chart: {0}")]
    NotProductChart(String),
    #[error("pencil: {0}")]
    Pencil(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T, E = CoisoError> = std::result::Result<T, E>;
