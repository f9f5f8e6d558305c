//! Geometry parameters and their validation.

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use crate::error::{ModelError, Result};

/// Bundled reference geometry, lengths in mm and limits in degrees.
pub const REFERENCE_GEOMETRY_JSON: &str = include_str!("../../data/reference.json");

/// Number of samples used when checking that l3(θ3) is monotonic.
const MONOTONICITY_SAMPLES: usize = 2001;

/// Which angle drives the sine term of the axial offset `A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum OffsetVariant {
    /// `A = R(1 − cos θ2) + D2 sin θ1`, as printed.
    Literal,
    /// `A = R(1 − cos θ2) + D2 sin θ2`; keeps the θ1 mirror symmetry.
    #[default]
    Theta2,
}

fn default_limits_deg() -> [[f64; 2]; 3] {
    [[-20.0, 20.0]; 3]
}

/// Raw geometry record as stored on disk. Lengths in mm, limits in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryParams {
    /// Radial distance from the actuator attachment points to the J2 (and J3) axis.
    #[serde(rename = "R_geom")]
    pub radial_offset: f64,
    /// Attachment surface to J1 axis offset of the dual pair.
    #[serde(rename = "D1")]
    pub proximal_offset: f64,
    /// Attachment surface to J2 axis offset of the dual pair.
    #[serde(rename = "D2")]
    pub distal_offset: f64,
    /// Attachment surface offsets of the single actuator.
    #[serde(rename = "D3")]
    pub single_proximal_offset: f64,
    #[serde(rename = "D4")]
    pub single_distal_offset: f64,
    /// Horizontal distance from J1 to the actuator base attachment.
    #[serde(rename = "S")]
    pub base_offset: f64,
    /// Distance between the two actuator endpoints on the attachment surface.
    #[serde(rename = "L")]
    pub endpoint_spacing: f64,
    pub link_lengths: [f64; 3],
    #[serde(default = "default_limits_deg")]
    pub joint_limits: [[f64; 2]; 3],
    #[serde(default)]
    pub a_variant: OffsetVariant,
}

impl GeometryParams {
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// Every length multiplied by `factor`; limits and variant unchanged.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            radial_offset: self.radial_offset * factor,
            proximal_offset: self.proximal_offset * factor,
            distal_offset: self.distal_offset * factor,
            single_proximal_offset: self.single_proximal_offset * factor,
            single_distal_offset: self.single_distal_offset * factor,
            base_offset: self.base_offset * factor,
            endpoint_spacing: self.endpoint_spacing * factor,
            link_lengths: self.link_lengths.map(|l| l * factor),
            ..self.clone()
        }
    }
}

/// Closed joint interval in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointLimit {
    pub lower: f64,
    pub upper: f64,
}

impl JointLimit {
    pub fn contains(&self, angle: f64, slack: f64) -> bool {
        angle >= self.lower - slack && angle <= self.upper + slack
    }

    /// `n` evenly spaced samples from `lower` to `upper`, endpoints exact.
    pub fn samples(&self, n: usize) -> Vec<f64> {
        linspace(self.lower, self.upper, n)
    }
}

pub(crate) fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        // Symmetric form: exact endpoints, and exactly 0 mid-way when lo = −hi.
        _ => (0..n)
            .map(|i| {
                let s = i as f64 / (n - 1) as f64;
                lo * (1.0 - s) + hi * s
            })
            .collect(),
    }
}

/// Validated, immutable finger geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct FingerGeometry {
    params: GeometryParams,
    limits: [JointLimit; 3],
    single_increasing: bool,
}

impl FingerGeometry {
    pub fn new(params: GeometryParams) -> Result<Self> {
        let lengths: [(&'static str, f64); 7] = [
            ("R_geom", params.radial_offset),
            ("D1", params.proximal_offset),
            ("D2", params.distal_offset),
            ("D3", params.single_proximal_offset),
            ("D4", params.single_distal_offset),
            ("S", params.base_offset),
            ("L", params.endpoint_spacing),
        ];
        for (field, value) in lengths {
            positive(field, value)?;
        }
        for value in params.link_lengths {
            positive("link_lengths", value)?;
        }

        let mut limits = [JointLimit {
            lower: 0.0,
            upper: 0.0,
        }; 3];
        for (limit, [lo, hi]) in limits.iter_mut().zip(params.joint_limits) {
            let (lower, upper) = (lo.to_radians(), hi.to_radians());
            if !(lower.is_finite() && upper.is_finite()) || lower >= upper {
                return Err(ModelError::InvalidParameter {
                    field: "joint_limits",
                    reason: format!("[{lo}, {hi}] is not a nonempty interval"),
                });
            }
            if lower <= -FRAC_PI_2 || upper >= FRAC_PI_2 {
                return Err(ModelError::InvalidParameter {
                    field: "joint_limits",
                    reason: format!("[{lo}, {hi}] must lie inside (-90, 90) degrees"),
                });
            }
            *limit = JointLimit { lower, upper };
        }

        let mut geometry = Self {
            params,
            limits,
            single_increasing: true,
        };
        geometry.single_increasing = geometry.check_single_monotonic()?;
        Ok(geometry)
    }

    /// The bundled reference finger.
    pub fn reference() -> Self {
        let params = GeometryParams::from_json(REFERENCE_GEOMETRY_JSON)
            .expect("bundled reference geometry parses");
        Self::new(params).expect("bundled reference geometry validates")
    }

    pub fn params(&self) -> &GeometryParams {
        &self.params
    }

    pub fn limits(&self) -> &[JointLimit; 3] {
        &self.limits
    }

    pub fn variant(&self) -> OffsetVariant {
        self.params.a_variant
    }

    /// Direction of l3(θ3) over the θ3 limits.
    pub fn single_increasing(&self) -> bool {
        self.single_increasing
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.params.scaled(factor))
    }

    pub fn with_variant(&self, variant: OffsetVariant) -> Self {
        let mut out = self.clone();
        out.params.a_variant = variant;
        out
    }

    fn check_single_monotonic(&self) -> Result<bool> {
        let mut sign = 0.0_f64;
        for theta3 in self.limits[2].samples(MONOTONICITY_SAMPLES) {
            let slope = self.single_derivative(theta3)?;
            if slope == 0.0 || (sign != 0.0 && slope.signum() != sign) {
                return Err(ModelError::NonMonotonicMap {
                    theta3_deg: theta3.to_degrees(),
                });
            }
            sign = slope.signum();
        }
        Ok(sign > 0.0)
    }
}

fn positive(field: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter {
            field,
            reason: format!("{value} must be a finite positive length"),
        })
    }
}
