//! Hydraulic chamber mechanics and the stiffness/compliance matrix chain.
//!
//! The chamber is a frustum filled with incompressible liquid. Pressure
//! widens both diameters by thin-wall hoop strain; holding the volume fixed
//! while the height changes gives a quadratic in the pressure. Units are
//! mm, N and MPa (N/mm²) throughout.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{ModelError, Result};
use crate::finger_model::{FingerGeometry, JointAngles};

pub const REFERENCE_CHAMBER_JSON: &str = include_str!("../data/reference_chamber.json");

/// Condition number at or above which a stiffness matrix is not inverted.
pub const MAX_CONDITION: f64 = 1e12;

/// Chamber record as stored on disk; the rest volume is derived on load.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChamberParams {
    #[serde(rename = "E")]
    pub youngs_modulus: f64,
    #[serde(rename = "t")]
    pub wall_thickness: f64,
    #[serde(rename = "d0")]
    pub minor_diameter: f64,
    #[serde(rename = "D0")]
    pub major_diameter: f64,
    #[serde(rename = "h0")]
    pub rest_height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HydraulicChamber {
    params: ChamberParams,
    rest_volume: f64,
}

impl HydraulicChamber {
    pub fn new(params: ChamberParams) -> Result<Self> {
        let checks: [(&'static str, f64); 5] = [
            ("E", params.youngs_modulus),
            ("t", params.wall_thickness),
            ("d0", params.minor_diameter),
            ("D0", params.major_diameter),
            ("h0", params.rest_height),
        ];
        for (field, value) in checks {
            if !(value.is_finite() && value > 0.0) {
                return Err(ModelError::InvalidParameter {
                    field,
                    reason: format!("{value} must be finite and positive"),
                });
            }
        }
        if params.minor_diameter > params.major_diameter {
            return Err(ModelError::InvalidParameter {
                field: "d0",
                reason: format!(
                    "minor diameter {} exceeds major diameter {}",
                    params.minor_diameter, params.major_diameter
                ),
            });
        }
        if params.wall_thickness > params.minor_diameter / 5.0 {
            log::warn!(
                "wall thickness {} mm exceeds d0/5 = {} mm; thin-wall assumption is weak",
                params.wall_thickness,
                params.minor_diameter / 5.0
            );
        }
        Ok(Self {
            rest_volume: frustum_volume(
                params.rest_height,
                params.major_diameter,
                params.minor_diameter,
            ),
            params,
        })
    }

    pub fn reference() -> Self {
        let params: ChamberParams =
            serde_json::from_str(REFERENCE_CHAMBER_JSON).expect("bundled chamber parses");
        Self::new(params).expect("bundled chamber validates")
    }

    pub fn params(&self) -> &ChamberParams {
        &self.params
    }

    pub fn rest_volume(&self) -> f64 {
        self.rest_volume
    }

    /// `(c_D, c_d)`: diameter gain per unit pressure, `D = D0 + c_D·P`.
    fn diameter_gains(&self) -> (f64, f64) {
        let p = &self.params;
        let k = 2.0 * p.youngs_modulus * p.wall_thickness;
        (
            p.major_diameter * p.major_diameter / k,
            p.minor_diameter * p.minor_diameter / k,
        )
    }

    /// Coefficients `(a, b, c)` of `a·P² + b·P + c = 0` at height `h0 + delta_y`.
    pub fn pressure_quadratic(&self, delta_y: f64) -> (f64, f64, f64) {
        let p = &self.params;
        let (gd_major, gd_minor) = self.diameter_gains();
        let (d_major, d_minor) = (p.major_diameter, p.minor_diameter);
        let h = p.rest_height + delta_y;
        let a = gd_major * gd_major + gd_minor * gd_minor + gd_major * gd_minor;
        let b = 2.0 * d_major * gd_major
            + 2.0 * d_minor * gd_minor
            + d_major * gd_minor
            + d_minor * gd_major;
        let c =
            (d_major * d_major + d_minor * d_minor + d_major * d_minor) * (1.0 - p.rest_height / h);
        (a, b, c)
    }
}

/// Volume of a frustum of height `h` with end diameters `major` and `minor`.
pub fn frustum_volume(h: f64, major: f64, minor: f64) -> f64 {
    PI * h / 3.0 * ((major / 2.0).powi(2) + (minor / 2.0).powi(2) + major * minor / 4.0)
}

/// Thin-wall hoop stress `P·r/t`.
pub fn hoop_stress(pressure: f64, radius: f64, thickness: f64) -> f64 {
    pressure * radius / thickness
}

/// Inner diameters `(D, d)` under pressure `P`.
pub fn deformed_diameters(pressure: f64, chamber: &HydraulicChamber) -> Result<(f64, f64)> {
    let p = chamber.params();
    let strain_gain = 2.0 * pressure / (p.youngs_modulus * p.wall_thickness);
    let major = p.major_diameter + strain_gain * (p.major_diameter / 2.0).powi(2);
    let minor = p.minor_diameter + strain_gain * (p.minor_diameter / 2.0).powi(2);
    if !(major > 0.0 && minor > 0.0) {
        return Err(ModelError::NonPhysicalState(format!(
            "P = {pressure} MPa collapses the chamber (D = {major} mm, d = {minor} mm)"
        )));
    }
    Ok((major, minor))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HydraulicForce {
    /// Internal pressure, MPa.
    pub pressure: f64,
    /// Hydraulic force `−(π d0²/4)·P`, N.
    pub force: f64,
}

/// Pressure and force that keep the chamber volume at `V0` after an axial
/// displacement `delta_y`. The root continuous with `P = 0` at rest is taken.
pub fn solve_hydraulic_force(chamber: &HydraulicChamber, delta_y: f64) -> Result<HydraulicForce> {
    let p = chamber.params();
    let h = p.rest_height + delta_y;
    if !(h > 0.0) {
        return Err(ModelError::NonPhysicalState(format!(
            "height h0 + delta_y = {h} mm is not positive"
        )));
    }
    let (a, b, c) = chamber.pressure_quadratic(delta_y);
    let discriminant = b * b - 4.0 * a * c;
    if discriminant < 0.0 {
        return Err(ModelError::NoRealRoot {
            delta_y,
            discriminant,
        });
    }
    // Large root first via the sign-matched formula, small root from the product c/a.
    let q = -0.5 * (b + b.signum() * discriminant.sqrt());
    let pressure = if q == 0.0 { 0.0 } else { c / q };
    deformed_diameters(pressure, chamber)?;
    Ok(HydraulicForce {
        pressure,
        force: -(PI * p.minor_diameter * p.minor_diameter / 4.0) * pressure,
    })
}

/// Proposed hydraulic compliance `C_h = (dF_h/dΔy)⁻¹` at rest, central differences.
pub fn propose_hydraulic_compliance(chamber: &HydraulicChamber, step: f64) -> Result<f64> {
    let plus = solve_hydraulic_force(chamber, step)?.force;
    let minus = solve_hydraulic_force(chamber, -step)?.force;
    let slope = (plus - minus) / (2.0 * step);
    if !(slope > 0.0) {
        return Err(ModelError::NonPhysicalState(format!(
            "force-displacement slope {slope} N/mm is not positive"
        )));
    }
    Ok(1.0 / slope)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplianceParams {
    /// Displacement per unit force, mm/N.
    pub hydraulic_compliance: f64,
    /// Effective cross-sectional area, mm².
    pub effective_area: f64,
}

impl ComplianceParams {
    pub fn new(hydraulic_compliance: f64, effective_area: f64) -> Result<Self> {
        for (field, value) in [("C_h", hydraulic_compliance), ("A_eff", effective_area)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(ModelError::InvalidParameter {
                    field,
                    reason: format!("{value} must be finite and positive"),
                });
            }
        }
        Ok(Self {
            hydraulic_compliance,
            effective_area,
        })
    }
}

/// `C_l = C_h / A_eff`; the actuator then follows `l = C_l·P`.
pub fn effective_linear_compliance(params: &ComplianceParams) -> f64 {
    params.hydraulic_compliance / params.effective_area
}

fn check_compliance(c_l: f64) -> Result<()> {
    if c_l.is_finite() && c_l > 0.0 {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter {
            field: "C_l",
            reason: format!("{c_l} must be finite and positive"),
        })
    }
}

/// `K_q = (1/C_l)·JᵀJ` for an actuator Jacobian `J` (actuators × joints).
pub fn joint_stiffness(jacobian: &DMatrix<f64>, c_l: f64) -> Result<DMatrix<f64>> {
    check_compliance(c_l)?;
    Ok(jacobian.transpose() * jacobian / c_l)
}

fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn is_symmetric(m: &DMatrix<f64>) -> bool {
    m.is_square() && (0..m.nrows()).all(|i| (0..i).all(|j| m[(i, j)] == m[(j, i)]))
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// `C_q = K_q⁻¹`.
pub fn joint_compliance(k_q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !k_q.is_square() {
        return Err(ModelError::DimensionMismatch {
            expected: k_q.nrows(),
            actual: k_q.ncols(),
        });
    }
    let condition = condition_number(k_q);
    if !(condition < MAX_CONDITION) {
        return Err(ModelError::SingularStiffness { condition });
    }
    let inverse = k_q
        .clone()
        .try_inverse()
        .ok_or(ModelError::SingularStiffness { condition })?;
    Ok(if is_symmetric(k_q) {
        symmetrize(inverse)
    } else {
        inverse
    })
}

/// `Δτ = (1/C_l)·JᵀJ·Δq`.
pub fn torque_deviation(
    jacobian: &DMatrix<f64>,
    c_l: f64,
    delta_q: &DVector<f64>,
) -> Result<DVector<f64>> {
    if delta_q.len() != jacobian.ncols() {
        return Err(ModelError::DimensionMismatch {
            expected: jacobian.ncols(),
            actual: delta_q.len(),
        });
    }
    Ok(joint_stiffness(jacobian, c_l)? * delta_q)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpaceStiffness {
    pub k_a: DMatrix<f64>,
    pub c_a: DMatrix<f64>,
    /// `C_a` was singular; `k_a` holds its pseudo-inverse.
    pub k_a_is_pseudo_inverse: bool,
}

/// Map joint-space compliance to task space with `J_a` (task × joints):
/// `C_a = J_a·C_q·J_aᵀ`, `K_a = C_a⁻¹`.
pub fn task_space_transform(
    k_q: &DMatrix<f64>,
    c_q: &DMatrix<f64>,
    j_a: &DMatrix<f64>,
) -> Result<TaskSpaceStiffness> {
    let m = c_q.nrows();
    if !c_q.is_square() || k_q.shape() != c_q.shape() {
        return Err(ModelError::DimensionMismatch {
            expected: m,
            actual: k_q.nrows(),
        });
    }
    if j_a.ncols() != m {
        return Err(ModelError::DimensionMismatch {
            expected: m,
            actual: j_a.ncols(),
        });
    }
    let c_a = symmetrize(j_a * c_q * j_a.transpose());
    let condition = condition_number(&c_a);
    let inverse = (condition < MAX_CONDITION)
        .then(|| c_a.clone().try_inverse())
        .flatten();
    let (k_a, k_a_is_pseudo_inverse) = match inverse {
        Some(k) => (symmetrize(k), false),
        None => {
            log::warn!("task-space compliance is singular (condition {condition:e}); reporting pseudo-inverse");
            let sv_max = c_a.singular_values().max();
            let pinv = c_a
                .clone()
                .pseudo_inverse(sv_max * 1e-12)
                .map_err(|_| ModelError::SingularStiffness { condition })?;
            (symmetrize(pinv), true)
        }
    };
    Ok(TaskSpaceStiffness {
        k_a,
        c_a,
        k_a_is_pseudo_inverse,
    })
}

/// K_q, C_q, K_a, C_a together with the Jacobians that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StiffnessSet {
    pub k_q: DMatrix<f64>,
    pub c_q: DMatrix<f64>,
    pub k_a: DMatrix<f64>,
    pub c_a: DMatrix<f64>,
    pub jacobian: DMatrix<f64>,
    pub task_jacobian: DMatrix<f64>,
    pub k_a_is_pseudo_inverse: bool,
}

/// Full stiffness chain for the three-actuator finger at pose `q`.
pub fn stiffness_set(geom: &FingerGeometry, q: &JointAngles, c_l: f64) -> Result<StiffnessSet> {
    let jacobian = DMatrix::from_iterator(3, 3, geom.actuator_jacobian(q)?.iter().copied());
    let task_jacobian = DMatrix::from_iterator(3, 3, geom.task_jacobian(q).iter().copied());
    let k_q = joint_stiffness(&jacobian, c_l)?;
    let c_q = joint_compliance(&k_q)?;
    let task = task_space_transform(&k_q, &c_q, &task_jacobian)?;
    Ok(StiffnessSet {
        k_q,
        c_q,
        k_a: task.k_a,
        c_a: task.c_a,
        jacobian,
        task_jacobian,
        k_a_is_pseudo_inverse: task.k_a_is_pseudo_inverse,
    })
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.singular_values().max()
}
