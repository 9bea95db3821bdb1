//! Translational stage: three orthogonal prismatic actuators, each driving a
//! parallelogram leg of length `L` to a platform of fixed orientation.
//!
//! Base and platform offsets are folded into the prismatic origin and the
//! platform reference point, so leg `i` reduces to the sphere constraint
//!
//! ```text
//! ‖p − ρᵢ·eᵢ‖ = L
//! ```
//!
//! The positive square-root branch `ρᵢ = p·eᵢ + sqrt(L² − rᵢ²)` is the only
//! one used. At the home point `p = 0` every leg lies along its actuator
//! axis, `ρᵢ = L`, and the Jacobian is the identity.

use std::ops::Index;

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::geometry::{Mat3, Tolerances, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrthoglideParams {
    pub leg_length: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    /// Unit actuator axes e₁, e₂, e₃, mutually orthogonal.
    pub axes: [Vec3; 3],
}

impl Default for OrthoglideParams {
    fn default() -> Self {
        Self {
            leg_length: 1.0,
            rho_min: 0.1,
            rho_max: 1.9,
            axes: [Vec3::x(), Vec3::y(), Vec3::z()],
        }
    }
}

impl OrthoglideParams {
    /// Parameters with the default axes (x̂, ŷ, ẑ).
    pub fn new(leg_length: f64, rho_min: f64, rho_max: f64) -> Result<Self> {
        let p = Self {
            leg_length,
            rho_min,
            rho_max,
            ..Self::default()
        };
        p.validate(&Tolerances::default())?;
        Ok(p)
    }

    pub fn with_axes(mut self, axes: [Vec3; 3], tol: &Tolerances) -> Result<Self> {
        self.axes = axes;
        self.validate(tol)?;
        Ok(self)
    }

    /// Same geometry with every length multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            leg_length: self.leg_length * k,
            rho_min: self.rho_min * k,
            rho_max: self.rho_max * k,
            axes: self.axes,
        }
    }

    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        if !(self.leg_length > 0.0) || !self.leg_length.is_finite() {
            return Err(Error::InvalidParams("leg length must be positive".into()));
        }
        if self.rho_min.is_nan() || self.rho_max.is_nan() || self.rho_min > self.rho_max {
            return Err(Error::InvalidParams(
                "prismatic range must satisfy rho_min <= rho_max".into(),
            ));
        }
        for (i, e) in self.axes.iter().enumerate() {
            if (e.norm() - 1.0).abs() > tol.unit {
                return Err(Error::InvalidParams(format!("axis e{} is not unit", i + 1)));
            }
        }
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            if self.axes[i].dot(&self.axes[j]).abs() > tol.unit {
                return Err(Error::InvalidParams(format!(
                    "axes e{} and e{} are not orthogonal",
                    i + 1,
                    j + 1
                )));
            }
        }
        Ok(())
    }

    /// Sign of det A at the home posture, where A has rows dᵢ = −eᵢ.
    /// Points on the working assembly mode share this sign.
    pub fn home_mode_sign(&self) -> f64 {
        let e = Mat3::from_rows(&[
            self.axes[0].transpose(),
            self.axes[1].transpose(),
            self.axes[2].transpose(),
        ]);
        -e.determinant().signum()
    }

    /// Unit vector along the symmetric diagonal e₁ + e₂ + e₃.
    pub fn diagonal(&self) -> Vec3 {
        (self.axes[0] + self.axes[1] + self.axes[2]).normalize()
    }
}

/// Actuated prismatic joint values ρ₁, ρ₂, ρ₃.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrismaticVector(pub [f64; 3]);

impl PrismaticVector {
    pub fn splat(v: f64) -> Self {
        Self([v; 3])
    }

    pub fn as_array(&self) -> [f64; 3] {
        self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().copied()
    }
}

impl Index<usize> for PrismaticVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl From<[f64; 3]> for PrismaticVector {
    fn from(v: [f64; 3]) -> Self {
        Self(v)
    }
}

/// Direction of one parallelogram leg and its component along the actuator axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegState {
    /// dᵢ = (p − ρᵢeᵢ)/L
    pub direction: Vec3,
    /// cᵢ = dᵢ·eᵢ; negative on the positive branch, zero on the cylinder boundary.
    pub axial: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SingularityClass {
    Regular,
    /// Legs (1-based) whose axial component vanishes.
    Serial(Vec<usize>),
    Parallel,
    /// Outside at least one leg cylinder.
    Outside,
}

/// The translational stage with its tolerances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Orthoglide {
    pub params: OrthoglideParams,
    pub tol: Tolerances,
}

impl Default for Orthoglide {
    fn default() -> Self {
        Self::new(OrthoglideParams::default())
    }
}

impl Orthoglide {
    pub fn new(params: OrthoglideParams) -> Self {
        Self {
            params,
            tol: Tolerances::default(),
        }
    }

    pub fn with_tolerances(params: OrthoglideParams, tol: Tolerances) -> Self {
        Self { params, tol }
    }

    fn l(&self) -> f64 {
        self.params.leg_length
    }

    /// Squared distance of `p` from the axis of leg `i` (0-based).
    pub fn radial_sq(&self, p: &Vec3, i: usize) -> f64 {
        let e = &self.params.axes[i];
        (p - e * p.dot(e)).norm_squared()
    }

    fn leg_rho(&self, p: &Vec3, i: usize) -> Result<f64> {
        let l = self.l();
        let e = &self.params.axes[i];
        let s2 = l * l - self.radial_sq(p, i);
        if s2 < -self.tol.residual * l * l {
            return Err(Error::OutsideCylinder(i + 1));
        }
        Ok(p.dot(e) + s2.max(0.0).sqrt())
    }

    fn in_range(&self, rho: f64) -> bool {
        let slack = self.tol.residual * self.l();
        rho >= self.params.rho_min - slack && rho <= self.params.rho_max + slack
    }

    /// Inverse kinematics with range-limit checking.
    pub fn ik(&self, p: &Vec3) -> Result<PrismaticVector> {
        let mut rho = [0.0; 3];
        for (i, r) in rho.iter_mut().enumerate() {
            *r = self.leg_rho(p, i)?;
            if !self.in_range(*r) {
                return Err(Error::RangeLimit(i + 1));
            }
        }
        Ok(PrismaticVector(rho))
    }

    /// Inverse kinematics ignoring the prismatic range limits.
    pub fn ik_unbounded(&self, p: &Vec3) -> Result<PrismaticVector> {
        let mut rho = [0.0; 3];
        for (i, r) in rho.iter_mut().enumerate() {
            *r = self.leg_rho(p, i)?;
        }
        Ok(PrismaticVector(rho))
    }

    pub fn leg_states(&self, p: &Vec3, rho: &PrismaticVector) -> [LegState; 3] {
        let l = self.l();
        std::array::from_fn(|i| {
            let e = &self.params.axes[i];
            let direction = (p - e * rho[i]) / l;
            LegState {
                direction,
                axial: direction.dot(e),
            }
        })
    }

    fn leg_matrix(states: &[LegState; 3]) -> Mat3 {
        Matrix3::from_rows(&[
            states[0].direction.transpose(),
            states[1].direction.transpose(),
            states[2].direction.transpose(),
        ])
    }

    /// det A at `p`, multiplied by the home sign: positive on the working
    /// assembly mode, zero on the parallel singularity surface.
    pub fn mode_margin(&self, p: &Vec3) -> Result<f64> {
        let rho = self.ik_unbounded(p)?;
        let a = Self::leg_matrix(&self.leg_states(p, &rho));
        Ok(a.determinant() * self.params.home_mode_sign())
    }

    fn on_positive_branch(&self, p: &Vec3, rho: &PrismaticVector) -> bool {
        let slack = self.tol.residual * self.l();
        (0..3).all(|i| rho[i] - p.dot(&self.params.axes[i]) >= -slack)
    }

    /// Forward kinematics by exact three-sphere intersection.
    ///
    /// Of the two intersection points the one on the working assembly mode
    /// (det A with the home sign) is returned; it must also lie on the
    /// positive IK branch. `seed` is consulted only when the two points are
    /// within `tol.singular·L` of the parallel singularity.
    pub fn fk(&self, rho: &PrismaticVector, seed: Option<&Vec3>) -> Result<Vec3> {
        let l = self.l();
        let ax = &self.params.axes;
        let c1 = ax[0] * rho[0];
        let c2 = ax[1] * rho[1];
        let c3 = ax[2] * rho[2];

        let d21 = c2 - c1;
        let d = d21.norm();
        let tiny = 1e-14 * l;
        if d < tiny {
            return Err(Error::NoAssembly);
        }
        let ex = d21 / d;
        let c31 = c3 - c1;
        let i = ex.dot(&c31);
        let ey_raw = c31 - ex * i;
        let j = ey_raw.norm();
        if j < tiny {
            return Err(Error::NoAssembly);
        }
        let ey = ey_raw / j;
        let ez = ex.cross(&ey);

        // equal radii: the radical planes give x = d/2 and y from the third sphere
        let x = 0.5 * d;
        let y = (i * i + j * j - 2.0 * i * x) / (2.0 * j);
        let z2 = l * l - x * x - y * y;
        if z2 < -self.tol.residual * l * l {
            return Err(Error::NoAssembly);
        }
        let z = z2.max(0.0).sqrt();
        let foot = c1 + ex * x + ey * y;
        let candidates = [foot + ez * z, foot - ez * z];
        let on_branch: Vec<Vec3> = candidates
            .iter()
            .filter(|c| self.on_positive_branch(c, rho))
            .copied()
            .collect();

        if z <= self.tol.singular * l {
            return match (on_branch.len(), seed) {
                (0, _) => Err(Error::NoAssembly),
                (1, _) => Ok(on_branch[0]),
                (_, Some(s)) => Ok(*on_branch
                    .iter()
                    .min_by(|a, b| (*a - s).norm().total_cmp(&(*b - s).norm()))
                    .expect("two candidates")),
                (_, None) => Err(Error::BranchAmbiguity),
            };
        }

        let sign = self.params.home_mode_sign();
        on_branch
            .into_iter()
            .find(|c| {
                let states = self.leg_states(c, rho);
                Self::leg_matrix(&states).determinant() * sign > 0.0
            })
            .ok_or(Error::NoAssembly)
    }

    /// Velocity map J with ṗ = J·ρ̇.
    ///
    /// From the constraint differential dᵢ·ṗ = cᵢ·ρ̇ᵢ: J = A⁻¹·diag(c).
    pub fn jacobian(&self, p: &Vec3) -> Result<Mat3> {
        let rho = self.ik_unbounded(p)?;
        let states = self.leg_states(p, &rho);
        for (i, s) in states.iter().enumerate() {
            if s.axial.abs() <= self.tol.singular {
                return Err(Error::SerialSingularity(i + 1));
            }
        }
        let a = Self::leg_matrix(&states);
        if a.determinant().abs() <= self.tol.singular {
            return Err(Error::ParallelSingularity);
        }
        let a_inv = a.try_inverse().ok_or(Error::ParallelSingularity)?;
        let b = Mat3::from_diagonal(&Vec3::new(
            states[0].axial,
            states[1].axial,
            states[2].axial,
        ));
        Ok(a_inv * b)
    }

    /// Velocity amplification factors: singular values of J in ascending order.
    pub fn amplification_factors(&self, p: &Vec3) -> Result<[f64; 3]> {
        let j = self.jacobian(p)?;
        Ok(sorted_singular_values(&j))
    }

    pub fn singularity_report(&self, p: &Vec3) -> SingularityClass {
        let Ok(rho) = self.ik_unbounded(p) else {
            return SingularityClass::Outside;
        };
        let states = self.leg_states(p, &rho);
        let serial: Vec<usize> = states
            .iter()
            .enumerate()
            .filter(|(_, s)| s.axial.abs() <= self.tol.singular)
            .map(|(i, _)| i + 1)
            .collect();
        if !serial.is_empty() {
            return SingularityClass::Serial(serial);
        }
        if Self::leg_matrix(&states).determinant().abs() <= self.tol.singular {
            return SingularityClass::Parallel;
        }
        SingularityClass::Regular
    }
}

/// Singular values of a 3×3 matrix, ascending.
pub fn sorted_singular_values(m: &Mat3) -> [f64; 3] {
    let sv = m.singular_values();
    let mut s = [sv[0], sv[1], sv[2]];
    s.sort_by(f64::total_cmp);
    s
}
