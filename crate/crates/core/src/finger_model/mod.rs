//! Kinematics between soft-actuator lengths `(l1, l2, l3)` and passive joint
//! angles `(θ1, θ2, θ3)`.
//!
//! `θ1, θ2` are coupled through the dual actuator pair; `θ3` depends on `l3`
//! alone. Angles are radians, lengths mm.

mod fingertip;
mod forward;
mod geometry;
mod inverse;

use nalgebra::{Matrix2, Vector3};
use serde::{Deserialize, Serialize};

pub use fingertip::{ChainPose, TASK_JACOBIAN_STEP};
pub(crate) use geometry::linspace;
pub use geometry::{
    FingerGeometry, GeometryParams, JointLimit, OffsetVariant, REFERENCE_GEOMETRY_JSON,
};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct JointAngles {
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
}

impl JointAngles {
    pub fn new(theta1: f64, theta2: f64, theta3: f64) -> Self {
        Self {
            theta1,
            theta2,
            theta3,
        }
    }

    pub fn from_degrees(deg: [f64; 3]) -> Self {
        Self::new(
            deg[0].to_radians(),
            deg[1].to_radians(),
            deg[2].to_radians(),
        )
    }

    pub fn to_degrees(self) -> [f64; 3] {
        [
            self.theta1.to_degrees(),
            self.theta2.to_degrees(),
            self.theta3.to_degrees(),
        ]
    }

    pub fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.theta1, self.theta2, self.theta3)
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub(crate) fn offset(self, joint: usize, delta: f64) -> Self {
        let mut v = self.to_vector();
        v[joint] += delta;
        Self::from_vector(&v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActuatorLengths {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
}

/// Axial, horizontal and vertical offsets from J1 to J2 at θ1 = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualOffsets {
    pub axial: f64,
    pub horizontal: f64,
    pub vertical: f64,
}

/// `∂(l1, l2)/∂(θ1, θ2)`, rows are actuators, columns joints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualJacobian(pub Matrix2<f64>);

impl DualJacobian {
    pub fn determinant(&self) -> f64 {
        self.0.determinant()
    }

    pub fn matrix(&self) -> &Matrix2<f64> {
        &self.0
    }
}
