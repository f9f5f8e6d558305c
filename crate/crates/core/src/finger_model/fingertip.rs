//! Serial-chain fingertip kinematics (yaw, pitch, pitch).
//!
//! Base frame: x along the straight finger, z up, y lateral. J1 yaws the
//! whole chain about z; J2 and J3 pitch about the yawed y axis.

use nalgebra::{Matrix3, Vector3};

use super::geometry::FingerGeometry;
use super::JointAngles;

/// Step used by the finite-difference task Jacobian, rad.
pub const TASK_JACOBIAN_STEP: f64 = 1e-6;

/// Joint origins, joint axes and fingertip position at one pose. Index 0 is J1.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainPose {
    pub origins: [Vector3<f64>; 3],
    pub axes: [Vector3<f64>; 3],
    pub tip: Vector3<f64>,
}

impl ChainPose {
    /// Midpoint of each link (J1→J2, J2→J3, J3→tip).
    pub fn link_midpoints(&self) -> [Vector3<f64>; 3] {
        [
            (self.origins[0] + self.origins[1]) * 0.5,
            (self.origins[1] + self.origins[2]) * 0.5,
            (self.origins[2] + self.tip) * 0.5,
        ]
    }
}

impl FingerGeometry {
    pub fn chain_pose(&self, q: &JointAngles) -> ChainPose {
        let [a, b, c] = self.params().link_lengths;
        let (s1, c1) = q.theta1.sin_cos();
        let yaw = |x: f64, z: f64| Vector3::new(x * c1, x * s1, z);

        let pitch2 = q.theta2;
        let pitch3 = q.theta2 + q.theta3;
        let j2 = yaw(a, 0.0);
        let j3 = yaw(a + b * pitch2.cos(), -b * pitch2.sin());
        let tip = yaw(
            a + b * pitch2.cos() + c * pitch3.cos(),
            -b * pitch2.sin() - c * pitch3.sin(),
        );
        let pitch_axis = Vector3::new(-s1, c1, 0.0);
        ChainPose {
            origins: [Vector3::zeros(), j2, j3],
            axes: [Vector3::z(), pitch_axis, pitch_axis],
            tip,
        }
    }

    /// Fingertip position in mm.
    pub fn fingertip_fk(&self, q: &JointAngles) -> Vector3<f64> {
        self.chain_pose(q).tip
    }

    /// `∂tip/∂q` by central differences, column j for joint j (mm/rad).
    pub fn task_jacobian(&self, q: &JointAngles) -> Matrix3<f64> {
        self.task_jacobian_with_step(q, TASK_JACOBIAN_STEP)
    }

    pub fn task_jacobian_with_step(&self, q: &JointAngles, step: f64) -> Matrix3<f64> {
        let mut out = Matrix3::zeros();
        for j in 0..3 {
            let plus = self.fingertip_fk(&q.offset(j, step));
            let minus = self.fingertip_fk(&q.offset(j, -step));
            out.set_column(j, &((plus - minus) / (2.0 * step)));
        }
        out
    }
}
