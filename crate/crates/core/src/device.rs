//! The assembled six-dof device: translational stage, leg transmissions and
//! wrist composed into pose-level kinematics.
//!
//! Position depends only on the prismatic joints. Orientation depends only
//! on the base rotary motors, because each motor reaches the wrist through a
//! homokinetic double universal joint whose output equals its input at any
//! leg posture. The device orientation is `R = W·mount`, where `W` is the
//! wrist's own orientation and `mount` carries ẑ onto the wrist's
//! distinguished axis, so `R = mount` at home.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{Mat3, Rot3, Vec3};
use crate::orthoglide::{sorted_singular_values, Orthoglide, OrthoglideParams, PrismaticVector};
use crate::transmission::TransmissionState;
use crate::wrist::{
    wrist_limits_check, HybridWrist, SphericalLegGeometry, SphericalWrist, WristAngles, WristKind,
    WristLimits, WristVariant,
};

/// Largest spherical-wrist motor change per continuation step in forward kinematics.
const CONTINUATION_STEP: f64 = PI / 18.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceParams {
    pub ortho: Orthoglide,
    pub variant: WristVariant,
    pub spm_geom: SphericalLegGeometry,
    /// Wrist joint angle per unit transmitted motor angle, per motor.
    pub ratios: [f64; 3],
    pub limits: WristLimits,
}

impl DeviceParams {
    pub fn new(ortho: Orthoglide, kind: WristKind) -> Self {
        Self {
            ortho,
            variant: WristVariant::of_kind(kind),
            spm_geom: SphericalLegGeometry::default(),
            ratios: [1.0; 3],
            limits: WristLimits::default(),
        }
    }

    pub fn hybrid() -> Self {
        Self::new(Orthoglide::default(), WristKind::Hybrid2R1R)
    }

    pub fn spherical() -> Self {
        Self::new(Orthoglide::default(), WristKind::Spherical3R)
    }

    pub fn with_stage(mut self, params: OrthoglideParams) -> Self {
        self.ortho.params = params;
        self
    }

    pub fn kind(&self) -> WristKind {
        self.variant.kind
    }

    pub fn validate(&self) -> Result<()> {
        let tol = &self.ortho.tol;
        tol.validate()?;
        self.ortho.params.validate(tol)?;
        self.variant.validate(tol)?;
        if self.variant.kind == WristKind::Spherical3R {
            self.spm_geom.validate(tol)?;
        }
        if self.ratios.iter().any(|r| !r.is_finite() || *r == 0.0) {
            return Err(Error::InvalidParams("transmission ratios must be finite and non-zero".into()));
        }
        if !(self.limits.max_angle > 0.0 && self.limits.max_angle < PI / 2.0) {
            return Err(Error::InvalidParams("wrist limit must lie in (0, 90) degrees".into()));
        }
        Ok(())
    }

    fn hybrid_wrist(&self) -> HybridWrist {
        HybridWrist {
            limits: self.limits,
            tol: self.ortho.tol,
        }
    }

    fn spherical_wrist(&self) -> SphericalWrist {
        SphericalWrist {
            geometry: self.spm_geom,
            limits: self.limits,
            tol: self.ortho.tol,
            ..SphericalWrist::default()
        }
    }

    /// Motors routed through a leg shaft; the hybrid roll motor rides on the wrist.
    fn transmitted(&self) -> usize {
        match self.kind() {
            WristKind::Hybrid2R1R => 2,
            WristKind::Spherical3R => 3,
        }
    }
}

/// Actuator coordinates: prismatic values and base rotary motor angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointVector {
    pub rho: PrismaticVector,
    pub gamma: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DevicePose {
    pub p: Vec3,
    pub r: Rot3,
}

impl DevicePose {
    /// Stylus axis: the image of ẑ.
    pub fn distinguished_axis(&self) -> Vec3 {
        self.r * Vec3::z()
    }
}

fn leg_chains(params: &DeviceParams, p: &Vec3, rho: &PrismaticVector) -> Result<Vec<TransmissionState>> {
    (0..params.transmitted())
        .map(|i| TransmissionState::for_leg(&params.ortho, p, rho[i], i + 1))
        .collect()
}

/// Wrist joint angles produced by the motors at platform position `p`.
fn wrist_joints(params: &DeviceParams, p: &Vec3, q: &JointVector) -> Result<[f64; 3]> {
    let tol = &params.ortho.tol;
    let chains = leg_chains(params, p, &q.rho)?;
    let mut theta = [0.0; 3];
    for (i, t) in theta.iter_mut().enumerate() {
        let shaft = match chains.get(i) {
            Some(c) => c.output(q.gamma[i], tol)?.angle,
            None => q.gamma[i],
        };
        *t = params.ratios[i] * shaft;
    }
    Ok(theta)
}

fn spherical_fk(spm: &SphericalWrist, theta: &[f64; 3]) -> Result<Rot3> {
    let largest = theta.iter().fold(0.0_f64, |m, t| m.max(t.abs()));
    let steps = ((largest / CONTINUATION_STEP).ceil() as usize).max(1);
    let mut r = Rot3::identity();
    for k in 1..=steps {
        let s = k as f64 / steps as f64;
        r = spm.fk(&theta.map(|t| t * s), &r)?;
    }
    Ok(r)
}

pub fn device_fk(q: &JointVector, params: &DeviceParams) -> Result<DevicePose> {
    let p = params.ortho.fk(&q.rho, None)?;
    let theta = wrist_joints(params, &p, q)?;
    let w = match params.kind() {
        WristKind::Hybrid2R1R => params
            .hybrid_wrist()
            .fk(&WristAngles::new(theta[0], theta[1], theta[2]))?,
        WristKind::Spherical3R => {
            let check = wrist_limits_check(theta, WristKind::Spherical3R, &params.limits, &params.ortho.tol);
            if let Some(&j) = check.offending.first() {
                return Err(Error::LimitViolation(j));
            }
            spherical_fk(&params.spherical_wrist(), &theta)?
        }
    };
    Ok(DevicePose {
        p,
        r: w * params.variant.mount,
    })
}

/// Wrist joint angles for a device orientation.
pub fn wrist_ik(r: &Rot3, params: &DeviceParams) -> Result<[f64; 3]> {
    let w = *r * params.variant.mount.transpose();
    match params.kind() {
        WristKind::Hybrid2R1R => Ok(params.hybrid_wrist().ik(&w)?.as_array()),
        WristKind::Spherical3R => {
            let theta = params.spherical_wrist().ik(&w)?;
            let check = wrist_limits_check(theta, WristKind::Spherical3R, &params.limits, &params.ortho.tol);
            if let Some(&j) = check.offending.first() {
                return Err(Error::OutOfRange(j));
            }
            Ok(theta)
        }
    }
}

pub fn device_ik(pose: &DevicePose, params: &DeviceParams) -> Result<JointVector> {
    let tol = &params.ortho.tol;
    let rho = params.ortho.ik(&pose.p)?;
    let theta = wrist_ik(&pose.r, params)?;
    let chains = leg_chains(params, &pose.p, &rho)?;
    let mut gamma = [0.0; 3];
    for i in 0..3 {
        let shaft = theta[i] / params.ratios[i];
        gamma[i] = match chains.get(i) {
            Some(c) => c.input(shaft, tol)?,
            None => shaft,
        };
    }
    Ok(JointVector { rho, gamma })
}

/// Block-structured Jacobian: translation and rotation blocks, plus the two
/// cross blocks (∂ṗ/∂γ̇ and ∂ω/∂ρ̇), which vanish for this architecture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobianReport {
    pub j_t: Mat3,
    /// Base-frame angular velocity per unit motor rate.
    pub j_r: Mat3,
    pub coupling: [Mat3; 2],
    /// Ascending singular values of each block.
    pub sigma_t: [f64; 3],
    pub sigma_r: [f64; 3],
}

pub fn device_jacobian(q: &JointVector, params: &DeviceParams) -> Result<JacobianReport> {
    let tol = &params.ortho.tol;
    let pose = device_fk(q, params)?;
    let j_t = params.ortho.jacobian(&pose.p)?;

    let chains = leg_chains(params, &pose.p, &q.rho)?;
    let mut rates = Vec3::zeros();
    for i in 0..3 {
        let shaft = match chains.get(i) {
            Some(c) => c.speed_ratio(q.gamma[i], tol)?,
            None => 1.0,
        };
        rates[i] = params.ratios[i] * shaft;
    }
    let j_w = match params.kind() {
        WristKind::Hybrid2R1R => {
            let theta = wrist_joints(params, &pose.p, q)?;
            params
                .hybrid_wrist()
                .jacobian(&WristAngles::new(theta[0], theta[1], theta[2]))
        }
        WristKind::Spherical3R => {
            let w = pose.r * params.variant.mount.transpose();
            params.spherical_wrist().jacobian(&w)?
        }
    };
    let j_r = j_w * Mat3::from_diagonal(&rates);
    Ok(JacobianReport {
        j_t,
        j_r,
        coupling: [Mat3::zeros(), Mat3::zeros()],
        sigma_t: sorted_singular_values(&j_t),
        sigma_r: sorted_singular_values(&j_r),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomeConfiguration {
    pub q: JointVector,
    pub pose: DevicePose,
    pub axis: Vec3,
    /// Angle between the stylus axis at home and ẑ, radians.
    pub axis_tilt: f64,
}

/// Doubly isotropic configuration: legs along their axes, wrist at home.
pub fn isotropic_home(params: &DeviceParams) -> HomeConfiguration {
    let l = params.ortho.params.leg_length;
    let q = JointVector {
        rho: PrismaticVector::splat(l),
        gamma: [0.0; 3],
    };
    let pose = DevicePose {
        p: Vec3::zeros(),
        r: params.variant.mount,
    };
    let axis = pose.distinguished_axis();
    HomeConfiguration {
        q,
        pose,
        axis,
        axis_tilt: axis.z.clamp(-1.0, 1.0).acos(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wrist::identity_error;

    fn deg(d: f64) -> f64 {
        d.to_radians()
    }

    #[test]
    fn home_maps_to_origin_and_mount() {
        for params in [DeviceParams::hybrid(), DeviceParams::spherical()] {
            let home = isotropic_home(&params);
            let pose = device_fk(&home.q, &params).unwrap();
            assert!(pose.p.norm() < 1e-15);
            assert!(pose.r.angle_to(&params.variant.mount) < 1e-12);
            let q = device_ik(&home.pose, &params).unwrap();
            assert!(q.gamma.iter().all(|g| g.abs() < 1e-12));
            let jac = device_jacobian(&home.q, &params).unwrap();
            assert!(identity_error(&jac.j_t) <= 1e-12);
            assert!(identity_error(&jac.j_r) <= 1e-12);
        }
    }

    #[test]
    fn hybrid_pitch_example() {
        let params = DeviceParams::hybrid();
        let rho = params.ortho.ik(&Vec3::new(0.1, 0.0, 0.0)).unwrap();
        let q = JointVector {
            rho,
            gamma: [deg(10.0), 0.0, 0.0],
        };
        let pose = device_fk(&q, &params).unwrap();
        assert!((pose.p - Vec3::new(0.1, 0.0, 0.0)).norm() < 1e-12);
        assert!(pose.r.angle_to(&Rot3::about_x(deg(10.0))) < 1e-12);
    }

    #[test]
    fn unreachable_stage_has_no_assembly() {
        let params = DeviceParams::hybrid();
        let q = JointVector {
            rho: PrismaticVector([5.0, 0.0, 0.0]),
            gamma: [0.0; 3],
        };
        assert_eq!(device_fk(&q, &params), Err(Error::NoAssembly));
    }

    #[test]
    fn sixty_degree_pitch_out_of_range() {
        let params = DeviceParams::hybrid();
        let pose = DevicePose {
            p: Vec3::zeros(),
            r: Rot3::about_x(deg(60.0)),
        };
        assert_eq!(device_ik(&pose, &params), Err(Error::OutOfRange(1)));
    }

    #[test]
    fn roll_is_unlimited_and_periodic() {
        let params = DeviceParams::hybrid();
        let home = isotropic_home(&params);
        let mut q = home.q;
        q.gamma[2] = deg(1000.0);
        let a = device_fk(&q, &params).unwrap();
        q.gamma[2] += 2.0 * PI;
        let b = device_fk(&q, &params).unwrap();
        assert!(a.r.angle_to(&b.r) < 1e-12);
        assert!(device_ik(&a, &params).is_ok());
    }

    #[test]
    fn spherical_home_axis_on_diagonal() {
        let home = isotropic_home(&DeviceParams::spherical());
        assert!((home.axis - Vec3::repeat(1.0).normalize()).norm() <= 1e-12);
        assert!((home.axis_tilt - (1.0 / 3f64.sqrt()).acos()).abs() <= 1e-9);
        assert!((home.axis_tilt.to_degrees() - 54.7356).abs() < 1e-4);
        let hybrid = isotropic_home(&DeviceParams::hybrid());
        assert_eq!(hybrid.axis, Vec3::z());
        assert_eq!(hybrid.axis_tilt, 0.0);
    }

    #[test]
    fn spherical_round_trip_near_limits() {
        let params = DeviceParams::spherical();
        let q = JointVector {
            rho: PrismaticVector([0.8, 1.1, 1.3]),
            gamma: [deg(44.0), deg(-40.0), deg(35.0)],
        };
        let pose = device_fk(&q, &params).unwrap();
        let back = device_ik(&pose, &params).unwrap();
        for i in 0..3 {
            assert!((back.gamma[i] - q.gamma[i]).abs() < 1e-9);
            assert!((back.rho[i] - q.rho[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn spherical_motor_beyond_limit_rejected() {
        let params = DeviceParams::spherical();
        let q = JointVector {
            rho: PrismaticVector::splat(1.0),
            gamma: [deg(50.0), 0.0, 0.0],
        };
        assert_eq!(device_fk(&q, &params), Err(Error::LimitViolation(1)));
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = DeviceParams::spherical();
        p.ratios[1] = 0.0;
        assert!(p.validate().is_err());
        let mut p = DeviceParams::hybrid();
        p.variant.mount = Rot3::about_x(0.3);
        assert!(p.validate().is_err());
        assert!(DeviceParams::spherical().validate().is_ok());
    }
}
