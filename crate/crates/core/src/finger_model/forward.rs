//! Actuator-length maps and their Jacobians.

use nalgebra::{Matrix2, Matrix3};

use super::geometry::{FingerGeometry, OffsetVariant};
use super::{ActuatorLengths, DualJacobian, DualOffsets, JointAngles};
use crate::error::{ModelError, Result};

/// Squared lengths of the dual pair and half their gradients, `½ ∂(l²)/∂θ`.
pub(crate) struct DualSquared {
    pub squared: [f64; 2],
    pub half_gradient: Matrix2<f64>,
}

impl FingerGeometry {
    pub fn dual_offsets(&self, theta1: f64, theta2: f64) -> DualOffsets {
        let p = self.params();
        let sine_angle = match p.a_variant {
            OffsetVariant::Literal => theta1,
            OffsetVariant::Theta2 => theta2,
        };
        DualOffsets {
            axial: p.radial_offset * (1.0 - theta2.cos()) + p.distal_offset * sine_angle.sin(),
            horizontal: p.proximal_offset
                + p.radial_offset * theta2.sin()
                + p.distal_offset * theta2.cos(),
            vertical: p.endpoint_spacing / 2.0,
        }
    }

    pub(crate) fn dual_squared(&self, theta1: f64, theta2: f64) -> DualSquared {
        let p = self.params();
        let DualOffsets {
            axial: a,
            horizontal: h,
            vertical: v,
        } = self.dual_offsets(theta1, theta2);
        let (s1, c1) = theta1.sin_cos();
        let (s2, c2) = theta2.sin_cos();
        let s = p.base_offset;

        // ∂A/∂θ1, ∂A/∂θ2 and ∂H/∂θ2; V is constant.
        let (da_1, da_2) = match p.a_variant {
            OffsetVariant::Literal => (p.distal_offset * c1, p.radial_offset * s2),
            OffsetVariant::Theta2 => (0.0, p.radial_offset * s2 + p.distal_offset * c2),
        };
        let dh_2 = p.radial_offset * c2 - p.distal_offset * s2;

        let x1 = h * c1 - v * s1 - s;
        let y1 = h * s1 + v * c1 - v;
        let x2 = h * c1 + v * s1 - s;
        let y2 = h * s1 - v * c1 + v;

        let squared = [a * a + x1 * x1 + y1 * y1, a * a + x2 * x2 + y2 * y2];
        let half_gradient = Matrix2::new(
            a * da_1 + x1 * (-h * s1 - v * c1) + y1 * (h * c1 - v * s1),
            a * da_2 + x1 * dh_2 * c1 + y1 * dh_2 * s1,
            a * da_1 + x2 * (-h * s1 + v * c1) + y2 * (h * c1 + v * s1),
            a * da_2 + x2 * dh_2 * c1 + y2 * dh_2 * s1,
        );
        DualSquared {
            squared,
            half_gradient,
        }
    }

    /// `(l1, l2)` for the dual pair at `(θ1, θ2)`.
    pub fn dual_forward(&self, theta1: f64, theta2: f64) -> Result<(f64, f64)> {
        let [sq1, sq2] = self.dual_squared(theta1, theta2).squared;
        Ok((checked_sqrt(sq1)?, checked_sqrt(sq2)?))
    }

    pub fn dual_jacobian_analytic(&self, theta1: f64, theta2: f64) -> Result<DualJacobian> {
        let DualSquared {
            squared,
            half_gradient,
        } = self.dual_squared(theta1, theta2);
        let l1 = checked_sqrt(squared[0])?;
        let l2 = checked_sqrt(squared[1])?;
        let mut m = half_gradient;
        m.row_mut(0).unscale_mut(l1);
        m.row_mut(1).unscale_mut(l2);
        Ok(DualJacobian(m))
    }

    /// Central-difference Jacobian of [`dual_forward`](Self::dual_forward).
    pub fn dual_jacobian_fd(&self, theta1: f64, theta2: f64, step: f64) -> Result<DualJacobian> {
        if !(step > 0.0) {
            return Err(ModelError::InvalidParameter {
                field: "step",
                reason: format!("{step} must be positive"),
            });
        }
        let (a1, a2) = self.dual_forward(theta1 + step, theta2)?;
        let (b1, b2) = self.dual_forward(theta1 - step, theta2)?;
        let (c1, c2) = self.dual_forward(theta1, theta2 + step)?;
        let (d1, d2) = self.dual_forward(theta1, theta2 - step)?;
        let inv = 0.5 / step;
        Ok(DualJacobian(Matrix2::new(
            (a1 - b1) * inv,
            (c1 - d1) * inv,
            (a2 - b2) * inv,
            (c2 - d2) * inv,
        )))
    }

    fn single_components(&self, theta3: f64) -> (f64, f64, f64, f64) {
        let p = self.params();
        let (s, c) = theta3.sin_cos();
        let (r, d3, d4) = (
            p.radial_offset,
            p.single_proximal_offset,
            p.single_distal_offset,
        );
        let h = d3 + r * s + d4 * c;
        let v = r * (1.0 - c) + d4 * s;
        let dh = r * c - d4 * s;
        let dv = r * s + d4 * c;
        (h, v, dh, dv)
    }

    pub fn single_forward(&self, theta3: f64) -> Result<f64> {
        let (h, v, _, _) = self.single_components(theta3);
        checked_sqrt(h * h + v * v)
    }

    /// `dl3/dθ3` in mm/rad.
    pub fn single_derivative(&self, theta3: f64) -> Result<f64> {
        let (h, v, dh, dv) = self.single_components(theta3);
        let l3 = checked_sqrt(h * h + v * v)?;
        Ok((h * dh + v * dv) / l3)
    }

    pub fn forward(&self, q: &JointAngles) -> Result<ActuatorLengths> {
        let (l1, l2) = self.dual_forward(q.theta1, q.theta2)?;
        Ok(ActuatorLengths {
            l1,
            l2,
            l3: self.single_forward(q.theta3)?,
        })
    }

    /// Full 3×3 actuator Jacobian `∂l/∂q`: the dual block plus `dl3/dθ3`.
    pub fn actuator_jacobian(&self, q: &JointAngles) -> Result<Matrix3<f64>> {
        let dual = self.dual_jacobian_analytic(q.theta1, q.theta2)?.0;
        let mut out = Matrix3::zeros();
        out.fixed_view_mut::<2, 2>(0, 0).copy_from(&dual);
        out[(2, 2)] = self.single_derivative(q.theta3)?;
        Ok(out)
    }
}

fn checked_sqrt(squared: f64) -> Result<f64> {
    if squared > 0.0 && squared.is_finite() {
        Ok(squared.sqrt())
    } else {
        Err(ModelError::DegenerateGeometry {
            squared_length: squared,
        })
    }
}
