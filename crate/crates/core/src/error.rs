use thiserror::Error;

/// Errors surfaced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// The quaternion has no inverse: `a * bar(a)` is (numerically) zero.
    /// Null quaternions such as the spectral parameter `zeta` land here.
    #[error("zero divisor: |a*bar(a)| = {0:.3e} below tolerance")]
    ZeroDivisor(f64),

    /// A conductivity sample dropped below the configured real-part floor.
    #[error("positivity violation: min Re(gamma) = {min_re:.4} < {floor:.4}")]
    PositivityViolation { min_re: f64, floor: f64 },

    /// The cross product used to pick `k_perp` vanished; the caller must perturb.
    #[error("degenerate direction: cannot build k_perp for k = {0:?}")]
    DegenerateDirection([f64; 3]),

    /// The Neumann iteration residual grew on three consecutive steps.
    #[error("non-contractive at |k| = {k_norm:.3}: residual grew for 3 consecutive iterations")]
    NonContractive { k_norm: f64 },

    /// The pair (xi, k) does not satisfy the boundary-form admissibility predicate.
    #[error("pair not admissible: |(i xi + zeta).(i xi + zeta)| = {0:.3e}")]
    NotAdmissible(f64),

    /// Evaluation point too close to the boundary mesh for the one-point rule.
    #[error("evaluation point within {dist:.3e} of the boundary (resolution {res:.3e})")]
    TooCloseToBoundary { dist: f64, res: f64 },

    /// Reconstruction at xi = 0 would divide by a non-invertible element.
    #[error("division by zero: i*xi is not invertible at xi = 0")]
    DivisionByZero,

    /// The vector part of the recovered log-conductivity is too large for q2
    /// to be a gradient-type potential.
    #[error("inconsistent potential: |Vec(log gamma)| = {vec_norm:.3e} vs |Sc| = {sc_norm:.3e}")]
    InconsistentPotential { vec_norm: f64, sc_norm: f64 },

    /// Configuration failed validation; the string names the offending path.
    #[error("invalid config: {0}")]
    Config(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
