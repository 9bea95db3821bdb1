use thiserror::Error;

/// Errors raised by the kinematic and analysis routines.
///
/// Leg and joint indices are 1-based, matching the usual numbering of the
/// device's legs and wrist joints.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("rotation axis is not unit length (norm = {norm})")]
    NonUnitAxis { norm: f64 },
    #[error("matrix is not a proper rotation (det = {det}, drift = {drift:e})")]
    NotARotation { det: f64, drift: f64 },
    #[error("point lies outside the reachable cylinder of leg {0}")]
    OutsideCylinder(usize),
    #[error("prismatic joint {0} is outside its range limits")]
    RangeLimit(usize),
    #[error("the three leg spheres have no intersection on the working assembly mode")]
    NoAssembly,
    #[error("both assembly candidates satisfy the branch rule; pass a seed to disambiguate")]
    BranchAmbiguity,
    #[error("serial singularity on leg {0}")]
    SerialSingularity(usize),
    #[error("parallel singularity: leg directions are linearly dependent")]
    ParallelSingularity,
    #[error("wrist joint {0} violates its limit")]
    LimitViolation(usize),
    #[error("orientation requires wrist joint {0} beyond its limit")]
    OutOfRange(usize),
    #[error("gimbal degeneracy: yaw at +/-90 degrees")]
    GimbalDegeneracy,
    #[error("spherical wrist leg {0} constraint is degenerate")]
    LegDegeneracy(usize),
    #[error("spherical wrist forward kinematics did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("spherical wrist Newton system is singular")]
    JacobianSingular,
    #[error("spherical wrist is singular")]
    WristSingular,
    #[error("universal joint bend angle {beta} rad is too large to transmit")]
    BendTooLarge { beta: f64 },
    #[error("prismatic value of leg {0} does not satisfy its leg constraint at this position")]
    InconsistentLeg(usize),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("workspace is empty along the symmetric diagonal")]
    EmptyWorkspace,
    #[error("no feasible design up to L = {max_l}")]
    Infeasible { max_l: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
