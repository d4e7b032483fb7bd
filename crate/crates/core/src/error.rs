use alloc::string::String;

/// Errors raised by the core algorithms.
///
/// Most variants are precondition failures: the inputs do not satisfy what
/// an operation needs (a germ not in reduced form, a grid that does not
/// reach a circle, a divisor below the precision floor). [`Error::is_precondition`]
/// separates them from internal failures.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("truncation order {0} is below the minimum of 2")]
    OrderTooSmall(usize),
    #[error("germ has zero multiplier; not a local diffeomorphism")]
    ZeroMultiplier,
    #[error("non-finite coefficient at z^{0}")]
    NonFinite(usize),
    #[error("germ is not tangent to the identity: |a_1 - 1| = {deviation:e} > {tol:e}")]
    NotTangent { deviation: f64, tol: f64 },
    #[error("germ is the identity to truncation order")]
    IdentityGerm,

    #[error("partial quotient a_{index} must be positive")]
    NonPositiveQuotient { index: usize },
    #[error("continued fraction must start with a_0 = 0")]
    NonzeroIntegerPart,
    #[error("index {requested} exceeds stored depth {depth}")]
    DepthExceeded { requested: usize, depth: usize },
    #[error("denominator q_{index} is too large for an explicit orbit")]
    DenominatorTooLarge { index: usize },
    #[error("rotation net gap {gap:e} exceeds the bound {bound:e}")]
    NetBoundViolated { gap: f64, bound: f64 },

    #[error("multiplier is resonant: |lambda^{k} - 1| = {value:e}")]
    Resonant { k: usize, value: f64 },
    #[error("divisor |lambda^{k} - lambda| = {value:e} is below the precision floor {floor:e}; retry at higher precision")]
    DivisorUnderflow { k: usize, value: f64, floor: f64 },
    #[error("multiplier is not on the unit circle: |lambda| = {0}")]
    NotIndifferent(f64),
    #[error("requested reduction order {requested} exceeds germ order {order}")]
    ReductionOrder { requested: usize, order: usize },
    #[error("germ is not reduced: |a_{index}| = {value:e} exceeds tolerance; run reduce_to_order first")]
    NotReduced { index: usize, value: f64 },

    #[error("orbit left the envelope at step {step} before reaching {wanted}")]
    OrbitExited { step: usize, wanted: usize },
    #[error("invalid harness input: {0}")]
    InvalidInput(String),
    #[error("compact approximation does not reach the circle |z| = {radius}")]
    CompactMissesCircle { radius: f64 },

    #[error("grid: {0}")]
    Grid(String),
    #[error("the pixel of 0 is not in the non-escaping set")]
    ZeroEscaped,
    #[error("domain image extends beyond the grid extent")]
    DomainOutsideGrid,

    #[error("point is outside the petal sector at step {step}")]
    LeftSector { step: usize },
    #[error("tracked polygon self-intersects at step {step}")]
    SelfIntersection { step: usize },
    #[error("inverse map failed to converge at step {step}")]
    InverseFailed { step: usize },
}

impl Error {
    /// Whether the error reports an unmet precondition rather than an internal failure.
    pub fn is_precondition(&self) -> bool {
        !matches!(self, Error::NetBoundViolated { .. })
    }
}

pub type Result<T> = core::result::Result<T, Error>;
