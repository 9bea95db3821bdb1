//! Vector and rotation algebra shared by the kinematic modules.
//!
//! Translations and directions are plain `nalgebra` 3-vectors. Orientations
//! are carried by [`Rot3`], a 3×3 matrix that is guaranteed to be a proper
//! rotation. All angles are radians.

use std::fmt;
use std::ops::Mul;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Orthonormality and determinant slack accepted by [`Rot3::try_from_matrix`].
pub const ROTATION_CHECK: f64 = 1e-10;

/// Largest distance to the nearest rotation that [`Rot3::orthonormalize`] repairs.
pub const MAX_ORTHO_DRIFT: f64 = 1e-6;

/// Numerical tolerances used across the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Unit-norm slack for direction vectors.
    pub unit: f64,
    /// Constraint residual accepted from kinematic solvers (relative to the leg length where lengths are involved).
    pub residual: f64,
    /// Threshold below which a Jacobian factor is treated as singular.
    pub singular: f64,
    /// Relative agreement required between sampled optima.
    pub grid_match: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            unit: 1e-12,
            residual: 1e-9,
            singular: 1e-8,
            grid_match: 0.01,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [self.unit, self.residual, self.singular, self.grid_match];
        if all.iter().any(|t| !t.is_finite() || *t <= 0.0) {
            return Err(Error::InvalidParams(
                "tolerances must be finite and strictly positive".into(),
            ));
        }
        if self.residual < self.unit {
            return Err(Error::InvalidParams(
                "residual tolerance must not be tighter than the unit tolerance".into(),
            ));
        }
        Ok(())
    }
}

/// Returns `v` normalized, or `None` for a (numerically) zero vector.
pub fn unit(v: &Vec3) -> Option<Vec3> {
    let n = v.norm();
    (n > f64::MIN_POSITIVE && n.is_finite()).then(|| v / n)
}

/// Skew-symmetric matrix such that `skew(a) * b == a.cross(&b)`.
pub fn skew(a: &Vec3) -> Mat3 {
    Mat3::new(0.0, -a.z, a.y, a.z, 0.0, -a.x, -a.y, a.x, 0.0)
}

/// Largest absolute entry of a matrix.
pub fn max_abs(m: &Mat3) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// A proper rotation matrix (RᵀR = I, det R = +1).
#[derive(Clone, Copy, PartialEq)]
pub struct Rot3(Mat3);

impl fmt::Debug for Rot3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.0;
        write!(
            f,
            "Rot3[[{}, {}, {}], [{}, {}, {}], [{}, {}, {}]]",
            m[(0, 0)],
            m[(0, 1)],
            m[(0, 2)],
            m[(1, 0)],
            m[(1, 1)],
            m[(1, 2)],
            m[(2, 0)],
            m[(2, 1)],
            m[(2, 2)]
        )
    }
}

impl Default for Rot3 {
    fn default() -> Self {
        Self::identity()
    }
}

impl Rot3 {
    pub fn identity() -> Self {
        Rot3(Mat3::identity())
    }

    /// Rotation by `angle` about `axis` (right-hand rule).
    ///
    /// The axis must already be unit length within `tol.unit`; it is not
    /// silently normalized.
    pub fn from_axis_angle(axis: &Vec3, angle: f64, tol: &Tolerances) -> Result<Self> {
        let norm = axis.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > tol.unit {
            return Err(Error::NonUnitAxis { norm });
        }
        Ok(Self::rodrigues(&(axis / norm), angle))
    }

    pub fn about_x(angle: f64) -> Self {
        Self::rodrigues(&Vec3::x(), angle)
    }

    pub fn about_y(angle: f64) -> Self {
        Self::rodrigues(&Vec3::y(), angle)
    }

    pub fn about_z(angle: f64) -> Self {
        Self::rodrigues(&Vec3::z(), angle)
    }

    /// Exponential map: the rotation whose rotation vector is `omega`.
    pub fn exp(omega: &Vec3) -> Self {
        let theta = omega.norm();
        let k = skew(omega);
        let (a, b) = if theta < 1e-5 {
            let t2 = theta * theta;
            (1.0 - t2 / 6.0, 0.5 - t2 / 24.0)
        } else {
            (theta.sin() / theta, (1.0 - theta.cos()) / (theta * theta))
        };
        Rot3(Mat3::identity() + k * a + k * k * b)
    }

    fn rodrigues(axis: &Vec3, angle: f64) -> Self {
        let k = skew(axis);
        let (s, c) = angle.sin_cos();
        Rot3(Mat3::identity() + k * s + k * k * (1.0 - c))
    }

    /// Logarithm map: rotation vector `ω` with `‖ω‖ ∈ [0, π]`.
    pub fn log(&self) -> Vec3 {
        let m = &self.0;
        // sin(θ)·axis from the skew part, cos(θ) from the trace
        let v = Vec3::new(
            m[(2, 1)] - m[(1, 2)],
            m[(0, 2)] - m[(2, 0)],
            m[(1, 0)] - m[(0, 1)],
        ) * 0.5;
        let c = ((m.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
        let s = v.norm();
        let theta = s.atan2(c);

        if theta < 1e-6 {
            return v * (1.0 + theta * theta / 6.0);
        }
        if c > 0.0 {
            return v * (theta / s);
        }

        // Past π/2 the skew part loses precision; recover the axis from the
        // symmetric part (1 − cos θ)·aaᵀ instead.
        let b = (m + m.transpose()) * 0.5 - Mat3::identity() * c;
        let j = (0..3)
            .max_by(|&i, &k| b[(i, i)].total_cmp(&b[(k, k)]))
            .unwrap_or(0);
        let mut axis = unit(&b.column(j).into_owned()).unwrap_or_else(Vec3::z);
        if axis.dot(&v) < 0.0 {
            axis = -axis;
        }
        axis * theta
    }

    /// Projects a nearly orthonormal matrix onto the closest proper rotation.
    ///
    /// Inputs further than [`MAX_ORTHO_DRIFT`] (elementwise) from a rotation,
    /// or with non-positive determinant, are rejected.
    pub fn orthonormalize(m: &Mat3) -> Result<Self> {
        let det = m.determinant();
        if !(det > 0.0) {
            return Err(Error::NotARotation {
                det,
                drift: f64::INFINITY,
            });
        }
        let svd = m.svd(true, true);
        let (u, v_t) = match (svd.u, svd.v_t) {
            (Some(u), Some(v_t)) => (u, v_t),
            _ => {
                return Err(Error::NotARotation {
                    det,
                    drift: f64::INFINITY,
                })
            }
        };
        let r = u * v_t;
        let drift = max_abs(&(m - r));
        if r.determinant() <= 0.0 || drift > MAX_ORTHO_DRIFT {
            return Err(Error::NotARotation { det, drift });
        }
        Ok(Rot3(r))
    }

    /// Wraps `m` after checking RᵀR = I and det R = 1 within [`ROTATION_CHECK`].
    pub fn try_from_matrix(m: Mat3) -> Result<Self> {
        let det = m.determinant();
        let drift = max_abs(&(m.transpose() * m - Mat3::identity()));
        if drift > ROTATION_CHECK || (det - 1.0).abs() > ROTATION_CHECK {
            return Err(Error::NotARotation { det, drift });
        }
        Ok(Rot3(m))
    }

    /// Rotation taking unit vector `from` onto unit vector `to` about their
    /// common normal (the shortest arc).
    pub fn aligning(from: &Vec3, to: &Vec3) -> Self {
        let (Some(a), Some(b)) = (unit(from), unit(to)) else {
            return Self::identity();
        };
        let axis = a.cross(&b);
        let s = axis.norm();
        let c = a.dot(&b);
        if s < 1e-15 {
            if c > 0.0 {
                return Self::identity();
            }
            // antiparallel: any perpendicular axis will do
            let probe = if a.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
            let perp = a.cross(&probe).normalize();
            return Self::rodrigues(&perp, std::f64::consts::PI);
        }
        Self::rodrigues(&(axis / s), s.atan2(c))
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn into_inner(self) -> Mat3 {
        self.0
    }

    pub fn transpose(&self) -> Self {
        Rot3(self.0.transpose())
    }

    pub fn inverse(&self) -> Self {
        self.transpose()
    }

    /// Geodesic distance between two rotations, in radians.
    pub fn angle_to(&self, other: &Rot3) -> f64 {
        (self.transpose() * *other).log().norm()
    }

    /// Re-projects onto SO(3) after long compositions.
    pub fn renormalized(&self) -> Self {
        Self::orthonormalize(&self.0).unwrap_or(*self)
    }
}

impl Mul for Rot3 {
    type Output = Rot3;

    fn mul(self, rhs: Rot3) -> Rot3 {
        Rot3(self.0 * rhs.0)
    }
}

impl Mul<Vec3> for Rot3 {
    type Output = Vec3;

    fn mul(self, rhs: Vec3) -> Vec3 {
        self.0 * rhs
    }
}

impl Mul<&Vec3> for &Rot3 {
    type Output = Vec3;

    fn mul(self, rhs: &Vec3) -> Vec3 {
        self.0 * rhs
    }
}
