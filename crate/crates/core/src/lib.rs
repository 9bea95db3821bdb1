//! Kinematics, workspace analysis and sizing for a six-dof haptic device
//! built from an Orthoglide translational stage and an agile-eye wrist,
//! with the wrist motors kept on the base through a double universal-joint
//! shaft running along each parallelogram leg.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` deliberately rejects NaN

pub mod design;
pub mod device;
pub mod error;
pub mod geometry;
pub mod orthoglide;
pub mod transmission;
pub mod validation;
pub mod workspace;
pub mod wrist;

pub use error::{Error, Result};
pub use geometry::{Mat3, Rot3, Tolerances, Vec3};
