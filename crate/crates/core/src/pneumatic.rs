//! Isothermal ideal-gas actuator: `P(l) = nRT / (V0 + α·(l − l_ref))`,
//! `f(l) = β·P(l)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

pub const REFERENCE_PNEUMATIC_JSON: &str = include_str!("../data/reference_pneumatic.json");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PneumaticModel {
    /// Gas amount times gas constant times temperature, N·mm.
    #[serde(rename = "nRT")]
    pub gas_energy: f64,
    /// Chamber volume at `l = l_ref`, mm³.
    #[serde(rename = "V0_gas")]
    pub rest_volume: f64,
    /// Volume gain per unit length, mm².
    #[serde(rename = "alpha")]
    pub volume_gain: f64,
    /// Force per unit pressure, mm².
    #[serde(rename = "beta")]
    pub force_gain: f64,
    /// Actuator length at which the volume equals `V0_gas`, mm.
    #[serde(default)]
    pub l_ref: f64,
}

impl PneumaticModel {
    pub fn new(
        gas_energy: f64,
        rest_volume: f64,
        volume_gain: f64,
        force_gain: f64,
    ) -> Result<Self> {
        Self {
            gas_energy,
            rest_volume,
            volume_gain,
            force_gain,
            l_ref: 0.0,
        }
        .validated()
    }

    pub fn reference() -> Self {
        serde_json::from_str::<Self>(REFERENCE_PNEUMATIC_JSON)
            .expect("bundled pneumatic model parses")
            .validated()
            .expect("bundled pneumatic model validates")
    }

    pub fn validated(self) -> Result<Self> {
        for (field, value) in [
            ("nRT", self.gas_energy),
            ("V0_gas", self.rest_volume),
            ("beta", self.force_gain),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(ModelError::InvalidParameter {
                    field,
                    reason: format!("{value} must be finite and positive"),
                });
            }
        }
        for (field, value) in [("alpha", self.volume_gain), ("l_ref", self.l_ref)] {
            if !value.is_finite() {
                return Err(ModelError::InvalidParameter {
                    field,
                    reason: format!("{value} must be finite"),
                });
            }
        }
        Ok(self)
    }

    /// Gas volume at actuator length `l`, mm³.
    pub fn volume(&self, l: f64) -> f64 {
        self.rest_volume + self.volume_gain * (l - self.l_ref)
    }

    fn checked_volume(&self, l: f64) -> Result<f64> {
        let v = self.volume(l);
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(ModelError::NonPhysicalState(format!(
                "gas volume {v} mm³ at l = {l} mm is not positive"
            )))
        }
    }
}

/// Absolute gas pressure, MPa.
pub fn gas_pressure(model: &PneumaticModel, l: f64) -> Result<f64> {
    Ok(model.gas_energy / model.checked_volume(l)?)
}

/// Output force, N.
pub fn gas_force(model: &PneumaticModel, l: f64) -> Result<f64> {
    Ok(model.force_gain * gas_pressure(model, l)?)
}

/// `df/dl`, N/mm. Negative whenever `α > 0`.
pub fn gas_tangent_stiffness(model: &PneumaticModel, l: f64) -> Result<f64> {
    let v = model.checked_volume(l)?;
    Ok(-model.force_gain * model.gas_energy * model.volume_gain / (v * v))
}

/// Joint torques `τ = Jᵀ·f` from per-actuator forces.
pub fn gas_joint_torque(jacobian: &DMatrix<f64>, forces: &DVector<f64>) -> Result<DVector<f64>> {
    if forces.len() != jacobian.nrows() {
        return Err(ModelError::DimensionMismatch {
            expected: jacobian.nrows(),
            actual: forces.len(),
        });
    }
    Ok(jacobian.tr_mul(forces))
}
