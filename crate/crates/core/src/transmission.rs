//! Rotary transmission from a base motor to the wrist through two universal
//! joints on the neutral fiber of a parallelogram leg.
//!
//! A single Cardan joint bent by β maps the input angle through
//! `tan θ_out = tan θ_in / cos β` (angles measured from the input yoke
//! phase). Two joints with equal bend, parallel end shafts and aligned
//! intermediate yokes (the Z-configuration) cancel exactly.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::error::{Error, Result};
use crate::geometry::{Tolerances, Vec3};
use crate::orthoglide::Orthoglide;

/// Wraps an angle to (−π, π].
pub fn wrap_pi(a: f64) -> f64 {
    let mut w = a.rem_euclid(TAU);
    if w > PI {
        w -= TAU;
    }
    w
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UJointConfig {
    /// Bend between input and output shaft axes, in [0, π/2).
    pub beta: f64,
    /// Input yoke orientation about its shaft; 0 puts the yoke in the bend plane.
    pub yoke_phase: f64,
}

impl UJointConfig {
    pub fn new(beta: f64, yoke_phase: f64) -> Self {
        Self { beta, yoke_phase }
    }

    fn check(&self, tol: &Tolerances) -> Result<()> {
        if !(self.beta >= 0.0) || self.beta >= FRAC_PI_2 - tol.singular {
            return Err(Error::BendTooLarge { beta: self.beta });
        }
        Ok(())
    }

    pub fn output(&self, theta_in: f64, tol: &Tolerances) -> Result<f64> {
        self.check(tol)?;
        let x = theta_in - self.yoke_phase;
        let y = x.sin().atan2(x.cos() * self.beta.cos());
        // y stays in x's quadrant, so the wrapped difference is the continuous branch
        Ok(self.yoke_phase + x + wrap_pi(y - x))
    }

    /// Inverse of [`UJointConfig::output`].
    pub fn input(&self, theta_out: f64, tol: &Tolerances) -> Result<f64> {
        self.check(tol)?;
        let y = theta_out - self.yoke_phase;
        let x = (y.sin() * self.beta.cos()).atan2(y.cos());
        Ok(self.yoke_phase + y + wrap_pi(x - y))
    }

    /// dθ_out/dθ_in at `theta_in`.
    pub fn speed_ratio(&self, theta_in: f64, tol: &Tolerances) -> Result<f64> {
        self.check(tol)?;
        let x = theta_in - self.yoke_phase;
        let (sb, cb) = self.beta.sin_cos();
        let cx = x.cos();
        Ok(cb / (1.0 - sb * sb * cx * cx))
    }
}

/// Instantaneous speed ratio range of one joint bent by `beta`: (cos β, 1/cos β).
pub fn speed_ratio_bounds(beta: f64) -> (f64, f64) {
    let c = beta.cos();
    (c, 1.0 / c)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionState {
    /// 1-based leg index.
    pub leg: usize,
    pub beta: f64,
    pub chain: [UJointConfig; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainOutput {
    pub angle: f64,
    /// Set when the chain is not in the Z-configuration; the angle is then
    /// the general (non-homokinetic) composition.
    pub misaligned: bool,
}

impl TransmissionState {
    /// Two joints of bend `beta` in the Z-configuration.
    pub fn z_config(leg: usize, beta: f64, yoke_phase: f64) -> Self {
        Self {
            leg,
            beta,
            chain: [
                UJointConfig::new(beta, yoke_phase),
                UJointConfig::new(beta, yoke_phase + FRAC_PI_2),
            ],
        }
    }

    /// Z-configuration state for leg `leg` (1-based) at platform position `p`.
    pub fn for_leg(ortho: &Orthoglide, p: &Vec3, rho_i: f64, leg: usize) -> Result<Self> {
        let beta = bend_angle_from_leg(ortho, p, rho_i, leg)?;
        Ok(Self::z_config(leg, beta, 0.0))
    }

    pub fn is_z_config(&self, tol: &Tolerances) -> bool {
        let [a, b] = &self.chain;
        let phase_err = wrap_pi(2.0 * (b.yoke_phase - a.yoke_phase - FRAC_PI_2)) / 2.0;
        (a.beta - b.beta).abs() <= tol.unit && phase_err.abs() <= tol.unit
    }

    pub fn output(&self, theta_in: f64, tol: &Tolerances) -> Result<ChainOutput> {
        let mid = self.chain[0].output(theta_in, tol)?;
        let angle = self.chain[1].output(mid, tol)?;
        Ok(ChainOutput {
            angle,
            misaligned: !self.is_z_config(tol),
        })
    }

    /// Base angle that produces `theta_out` at the chain output.
    pub fn input(&self, theta_out: f64, tol: &Tolerances) -> Result<f64> {
        let mid = self.chain[1].input(theta_out, tol)?;
        self.chain[0].input(mid, tol)
    }

    pub fn speed_ratio(&self, theta_in: f64, tol: &Tolerances) -> Result<f64> {
        let r1 = self.chain[0].speed_ratio(theta_in, tol)?;
        let mid = self.chain[0].output(theta_in, tol)?;
        Ok(r1 * self.chain[1].speed_ratio(mid, tol)?)
    }
}

/// Bend angle of both joints of leg `leg` (1-based): the angle between the
/// leg direction and its actuator axis.
pub fn bend_angle_from_leg(ortho: &Orthoglide, p: &Vec3, rho_i: f64, leg: usize) -> Result<f64> {
    if !(1..=3).contains(&leg) {
        return Err(Error::InvalidParams(format!("leg index {leg} out of 1..=3")));
    }
    let l = ortho.params.leg_length;
    let e = &ortho.params.axes[leg - 1];
    let along = p - e * rho_i;
    if (along.norm() - l).abs() > ortho.tol.residual * l {
        return Err(Error::InconsistentLeg(leg));
    }
    let d = along / l;
    Ok(d.cross(e).norm().atan2(d.dot(e).abs()))
}

/// One sample of a single-joint transfer table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferSample {
    pub theta_in: f64,
    pub theta_out: f64,
    pub speed_ratio: f64,
}

/// Samples one full input revolution at `steps` evenly spaced angles from 0.
pub fn transfer_table(cfg: &UJointConfig, steps: usize, tol: &Tolerances) -> Result<Vec<TransferSample>> {
    (0..steps)
        .map(|k| {
            let theta_in = TAU * k as f64 / steps as f64;
            Ok(TransferSample {
                theta_in,
                theta_out: cfg.output(theta_in, tol)?,
                speed_ratio: cfg.speed_ratio(theta_in, tol)?,
            })
        })
        .collect()
}
