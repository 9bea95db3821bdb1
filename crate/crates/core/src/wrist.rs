//! Orientation kinematics of the two wrist variants.
//!
//! * [`HybridWrist`]: two-dof agile eye (pitch about x̂, yaw about the
//!   carried ŷ) in series with an unlimited roll about the carried ẑ. The
//!   orientation is `Rx(θ₁)·Ry(θ₂)·Rz(φ)`.
//! * [`SphericalWrist`]: three-dof spherical parallel agile eye. Leg `i`
//!   turns an intermediate link `mᵢ(θᵢ) = Rot(uᵢ, θᵢ)·mᵢ₀` that must stay
//!   orthogonal to the platform marker `R·vᵢ`.
//!
//! Angular velocities are expressed in the base frame for both variants,
//! so the Jacobian columns are the instantaneous joint axes.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use crate::error::{Error, Result};
use crate::geometry::{max_abs, Mat3, Rot3, Tolerances, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WristKind {
    /// 2-dof agile eye plus a serial roll joint (3T+2R+1R device).
    Hybrid2R1R,
    /// 3-dof spherical parallel agile eye (3T+3R device).
    Spherical3R,
}

/// Wrist kind plus the fixed tool-frame rotation carrying ẑ onto the
/// distinguished axis of the wrist at home.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WristVariant {
    pub kind: WristKind,
    pub mount: Rot3,
}

impl WristVariant {
    pub fn hybrid() -> Self {
        Self {
            kind: WristKind::Hybrid2R1R,
            mount: Rot3::identity(),
        }
    }

    /// Spherical wrist with the shortest-arc mount taking ẑ onto (1,1,1)/√3.
    pub fn spherical() -> Self {
        Self {
            kind: WristKind::Spherical3R,
            mount: Rot3::aligning(&Vec3::z(), &Vec3::repeat(1.0)),
        }
    }

    pub fn of_kind(kind: WristKind) -> Self {
        match kind {
            WristKind::Hybrid2R1R => Self::hybrid(),
            WristKind::Spherical3R => Self::spherical(),
        }
    }

    /// Direction the mount must send ẑ to.
    pub fn required_home_axis(kind: WristKind) -> Vec3 {
        match kind {
            WristKind::Hybrid2R1R => Vec3::z(),
            WristKind::Spherical3R => Vec3::repeat(1.0).normalize(),
        }
    }

    pub fn home_axis(&self) -> Vec3 {
        self.mount * Vec3::z()
    }

    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        Rot3::try_from_matrix(self.mount.into_inner())?;
        let want = Self::required_home_axis(self.kind);
        if (self.home_axis() - want).norm() > tol.unit {
            return Err(Error::InvalidParams(format!(
                "wrist mount sends z to {:?}, expected {:?}",
                self.home_axis(),
                want
            )));
        }
        Ok(())
    }
}

/// Symmetric bound on the limited wrist joints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WristLimits {
    pub max_angle: f64,
}

impl Default for WristLimits {
    fn default() -> Self {
        Self {
            max_angle: FRAC_PI_4,
        }
    }
}

impl WristLimits {
    pub fn from_degrees(deg: f64) -> Result<Self> {
        if !(deg > 0.0 && deg < 90.0) {
            return Err(Error::InvalidParams(format!(
                "wrist limit {deg} deg must lie in (0, 90)"
            )));
        }
        Ok(Self {
            max_angle: deg.to_radians(),
        })
    }

    fn exceeds(&self, angle: f64, tol: &Tolerances) -> bool {
        angle.abs() > self.max_angle + tol.residual
    }
}

/// Pitch, yaw and roll of the hybrid wrist.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WristAngles {
    pub pitch: f64,
    pub yaw: f64,
    pub roll: f64,
}

impl WristAngles {
    pub fn new(pitch: f64, yaw: f64, roll: f64) -> Self {
        Self { pitch, yaw, roll }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.pitch, self.yaw, self.roll]
    }
}

/// Result of a joint-limit check: offending joints are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimitCheck {
    pub ok: bool,
    pub offending: Vec<usize>,
}

/// Checks wrist joint values against the limits.
///
/// For the hybrid wrist `joints` is (pitch, yaw, roll) and roll is never
/// limited. For the spherical wrist all three motor angles share the bound.
pub fn wrist_limits_check(
    joints: [f64; 3],
    kind: WristKind,
    limits: &WristLimits,
    tol: &Tolerances,
) -> LimitCheck {
    let limited = match kind {
        WristKind::Hybrid2R1R => 2,
        WristKind::Spherical3R => 3,
    };
    let offending: Vec<usize> = joints[..limited]
        .iter()
        .enumerate()
        .filter(|(_, a)| limits.exceeds(**a, tol))
        .map(|(i, _)| i + 1)
        .collect();
    LimitCheck {
        ok: offending.is_empty(),
        offending,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HybridWrist {
    pub limits: WristLimits,
    pub tol: Tolerances,
}

impl HybridWrist {
    pub fn fk(&self, a: &WristAngles) -> Result<Rot3> {
        if self.limits.exceeds(a.pitch, &self.tol) {
            return Err(Error::LimitViolation(1));
        }
        if self.limits.exceeds(a.yaw, &self.tol) {
            return Err(Error::LimitViolation(2));
        }
        Ok(Self::compose(a))
    }

    fn compose(a: &WristAngles) -> Rot3 {
        Rot3::about_x(a.pitch) * Rot3::about_y(a.yaw) * Rot3::about_z(a.roll)
    }

    /// X-Y-Z factorization of `r`; roll is reported in (−π, π].
    pub fn ik(&self, r: &Rot3) -> Result<WristAngles> {
        let m = r.matrix();
        let cos_yaw = m[(0, 0)].hypot(m[(0, 1)]);
        if cos_yaw <= self.tol.singular {
            return Err(Error::GimbalDegeneracy);
        }
        let yaw = m[(0, 2)].atan2(cos_yaw);
        let pitch = (-m[(1, 2)]).atan2(m[(2, 2)]);
        let roll = crate::transmission::wrap_pi((-m[(0, 1)]).atan2(m[(0, 0)]));
        if yaw.abs() >= FRAC_PI_2 - self.tol.singular {
            return Err(Error::GimbalDegeneracy);
        }
        if self.limits.exceeds(pitch, &self.tol) {
            return Err(Error::OutOfRange(1));
        }
        if self.limits.exceeds(yaw, &self.tol) {
            return Err(Error::OutOfRange(2));
        }
        Ok(WristAngles { pitch, yaw, roll })
    }

    /// Base-frame angular velocity per unit joint rate; det = cos(yaw).
    pub fn jacobian(&self, a: &WristAngles) -> Mat3 {
        let rx = Rot3::about_x(a.pitch);
        let c1 = Vec3::x();
        let c2 = rx * Vec3::y();
        let c3 = rx * Rot3::about_y(a.yaw) * Vec3::z();
        Mat3::from_columns(&[c1, c2, c3])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalLeg {
    /// Base motor axis uᵢ.
    pub motor_axis: Vec3,
    /// Platform marker vᵢ (platform frame).
    pub platform_marker: Vec3,
    /// Intermediate link direction at θᵢ = 0, orthogonal to uᵢ.
    pub reference: Vec3,
}

impl SphericalLeg {
    fn link(&self, theta: f64) -> Vec3 {
        let (s, c) = theta.sin_cos();
        self.reference * c + self.motor_axis.cross(&self.reference) * s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalLegGeometry {
    pub legs: [SphericalLeg; 3],
}

impl Default for SphericalLegGeometry {
    /// uᵢ = eᵢ, vᵢ = eᵢ₊₁, mᵢ₀ = eᵢ₊₂ (indices mod 3).
    fn default() -> Self {
        let e = [Vec3::x(), Vec3::y(), Vec3::z()];
        Self {
            legs: std::array::from_fn(|i| SphericalLeg {
                motor_axis: e[i],
                platform_marker: e[(i + 1) % 3],
                reference: e[(i + 2) % 3],
            }),
        }
    }
}

impl SphericalLegGeometry {
    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        for (i, leg) in self.legs.iter().enumerate() {
            for v in [&leg.motor_axis, &leg.platform_marker, &leg.reference] {
                if (v.norm() - 1.0).abs() > tol.unit {
                    return Err(Error::InvalidParams(format!(
                        "spherical leg {} has a non-unit vector",
                        i + 1
                    )));
                }
            }
            if leg.reference.dot(&leg.motor_axis).abs() > tol.unit {
                return Err(Error::InvalidParams(format!(
                    "spherical leg {}: reference not orthogonal to motor axis",
                    i + 1
                )));
            }
        }
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            if self.legs[i].motor_axis.dot(&self.legs[j].motor_axis).abs() > tol.unit {
                return Err(Error::InvalidParams(
                    "spherical motor axes must be mutually orthogonal".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalWrist {
    pub geometry: SphericalLegGeometry,
    pub limits: WristLimits,
    pub tol: Tolerances,
    pub max_iter: usize,
}

impl Default for SphericalWrist {
    fn default() -> Self {
        Self {
            geometry: SphericalLegGeometry::default(),
            limits: WristLimits::default(),
            tol: Tolerances::default(),
            max_iter: 50,
        }
    }
}

impl SphericalWrist {
    /// Constraint values mᵢ(θᵢ)·(R·vᵢ).
    pub fn residuals(&self, r: &Rot3, theta: &[f64; 3]) -> [f64; 3] {
        std::array::from_fn(|i| {
            let leg = &self.geometry.legs[i];
            leg.link(theta[i]).dot(&(r * &leg.platform_marker))
        })
    }

    /// Motor angles on the branch through θ = 0 at R = I.
    pub fn ik(&self, r: &Rot3) -> Result<[f64; 3]> {
        let mut theta = [0.0; 3];
        for (i, leg) in self.geometry.legs.iter().enumerate() {
            let w = r * &leg.platform_marker;
            let a = leg.reference.dot(&w);
            let b = leg.motor_axis.cross(&leg.reference).dot(&w);
            if a.hypot(b) <= self.tol.singular {
                return Err(Error::LegDegeneracy(i + 1));
            }
            // a·cosθ + b·sinθ = 0
            theta[i] = a.atan2(-b);
        }
        Ok(theta)
    }

    fn constraint_rows(&self, r: &Rot3, theta: &[f64; 3]) -> (Mat3, Vec3) {
        let mut w = Mat3::zeros();
        let mut k = Vec3::zeros();
        for (i, leg) in self.geometry.legs.iter().enumerate() {
            let marker = r * &leg.platform_marker;
            let link = leg.link(theta[i]);
            w.set_row(i, &marker.cross(&link).transpose());
            k[i] = leg.motor_axis.cross(&link).dot(&marker);
        }
        (w, k)
    }

    /// Newton iteration on the base-frame rotation vector, starting at `seed`.
    pub fn fk(&self, theta: &[f64; 3], seed: &Rot3) -> Result<Rot3> {
        let norm = |g: &[f64; 3]| g.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let mut r = *seed;
        let mut g = self.residuals(&r, theta);
        for _ in 0..self.max_iter {
            if norm(&g) <= self.tol.residual {
                // one more quadratic step while it still helps
                if let Ok(step) = self.newton_step(&r, theta, &g) {
                    let polished = (Rot3::exp(&step) * r).renormalized();
                    let gp = self.residuals(&polished, theta);
                    if norm(&gp) < norm(&g) {
                        return Ok(polished);
                    }
                }
                return Ok(r);
            }
            let step = self.newton_step(&r, theta, &g)?;
            let mut scale = 1.0;
            let mut accepted = false;
            for _ in 0..20 {
                let trial = (Rot3::exp(&(step * scale)) * r).renormalized();
                let gt = self.residuals(&trial, theta);
                if norm(&gt) < norm(&g) {
                    r = trial;
                    g = gt;
                    accepted = true;
                    break;
                }
                scale *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if norm(&g) <= self.tol.residual {
            return Ok(r);
        }
        Err(Error::NoConvergence {
            iterations: self.max_iter,
            residual: norm(&g),
        })
    }

    fn newton_step(&self, r: &Rot3, theta: &[f64; 3], g: &[f64; 3]) -> Result<Vec3> {
        let (w, _) = self.constraint_rows(r, theta);
        if w.determinant().abs() <= self.tol.singular {
            return Err(Error::JacobianSingular);
        }
        let rhs = -Vec3::new(g[0], g[1], g[2]);
        w.lu().solve(&rhs).ok_or(Error::JacobianSingular)
    }

    /// Base-frame angular velocity per unit motor rate at orientation `r`.
    pub fn jacobian(&self, r: &Rot3) -> Result<Mat3> {
        let theta = self.ik(r)?;
        let (w, k) = self.constraint_rows(r, &theta);
        if w.determinant().abs() <= self.tol.singular || k.iter().any(|x| x.abs() <= self.tol.singular) {
            return Err(Error::WristSingular);
        }
        let w_inv = w.try_inverse().ok_or(Error::WristSingular)?;
        Ok(-(w_inv * Mat3::from_diagonal(&k)))
    }
}

/// Largest elementwise deviation of `m` from the identity.
pub fn identity_error(m: &Mat3) -> f64 {
    max_abs(&(m - Mat3::identity()))
}
