//! Manipulability maps, contour traces and normalized actuator motion.
//!
//! Manipulability here is `|det ∂θ/∂l|` of the dual actuator pair, i.e. the
//! reciprocal of `|det ∂l/∂θ|`. The normalized field divides by its value at
//! `θ1 = θ2 = 0`, which removes the dependence on length units.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::finger_model::{linspace, FingerGeometry};
use crate::regression::{fit_line, LineFit};

/// `|det ∂l/∂θ|` below this (mm²/rad²) is treated as singular.
pub const SINGULAR_DET_THRESHOLD: f64 = 1e-12;

pub const DEFAULT_GRID_SIZE: usize = 41;

pub fn manipulability(geom: &FingerGeometry, theta1: f64, theta2: f64) -> Result<f64> {
    let det = geom
        .dual_jacobian_analytic(theta1, theta2)?
        .determinant()
        .abs();
    if !(det >= SINGULAR_DET_THRESHOLD) {
        return Err(ModelError::SingularConfiguration {
            theta1_deg: theta1.to_degrees(),
            theta2_deg: theta2.to_degrees(),
            det,
        });
    }
    Ok(1.0 / det)
}

pub fn normalized_manipulability(geom: &FingerGeometry, theta1: f64, theta2: f64) -> Result<f64> {
    Ok(manipulability(geom, theta1, theta2)? / manipulability(geom, 0.0, 0.0)?)
}

/// Normalized manipulability sampled over the θ1 × θ2 joint-limit box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkspaceGrid {
    pub theta1_samples: Vec<f64>,
    pub theta2_samples: Vec<f64>,
    /// `values[i][j]` is the cell at `(theta1_samples[i], theta2_samples[j])`.
    pub values: Vec<Vec<f64>>,
}

impl WorkspaceGrid {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    /// Long-format `(θ1, θ2, value)` triples, θ1-major.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.theta1_samples
            .iter()
            .zip(&self.values)
            .flat_map(|(&t1, row)| {
                self.theta2_samples
                    .iter()
                    .zip(row)
                    .map(move |(&t2, &v)| (t1, t2, v))
            })
    }

    pub fn min(&self) -> f64 {
        self.cells().map(|c| c.2).fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.cells().map(|c| c.2).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Sweep the normalized field on an `n1 × n2` grid. Rows are computed in
/// parallel; the result does not depend on thread scheduling.
pub fn sweep_workspace(geom: &FingerGeometry, n1: usize, n2: usize) -> Result<WorkspaceGrid> {
    if n1 < 2 || n2 < 2 {
        return Err(ModelError::InvalidParameter {
            field: "grid size",
            reason: format!("{n1}×{n2}; both dimensions need at least 2 samples"),
        });
    }
    let [l1, l2, _] = *geom.limits();
    let theta1_samples = linspace(l1.lower, l1.upper, n1);
    let theta2_samples = linspace(l2.lower, l2.upper, n2);
    let reference = manipulability(geom, 0.0, 0.0)?;

    let values = theta1_samples
        .par_iter()
        .map(|&t1| {
            theta2_samples
                .iter()
                .map(|&t2| manipulability(geom, t1, t2).map(|m| m / reference))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(WorkspaceGrid {
        theta1_samples,
        theta2_samples,
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FixedJoint {
    Theta1,
    Theta2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourSample {
    pub l1: f64,
    pub l2: f64,
    /// Angle of the swept joint, rad.
    pub free_angle: f64,
    /// Distance in `(l1, l2)` from the first sample, mm.
    pub nam: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourTrace {
    pub fixed_joint: FixedJoint,
    pub fixed_value: f64,
    pub samples: Vec<ContourSample>,
}

impl ContourTrace {
    /// True when the normalized actuator motion never decreases along the sweep.
    pub fn is_monotone(&self) -> bool {
        self.samples.windows(2).all(|w| w[1].nam >= w[0].nam)
    }
}

/// Hold one joint at `fixed_value` and sweep the other across its limits.
pub fn contour_fixed(
    geom: &FingerGeometry,
    fixed_joint: FixedJoint,
    fixed_value: f64,
    n: usize,
) -> Result<ContourTrace> {
    let [lim1, lim2, _] = *geom.limits();
    let (fixed_limit, free_limit) = match fixed_joint {
        FixedJoint::Theta1 => (lim1, lim2),
        FixedJoint::Theta2 => (lim2, lim1),
    };
    if !fixed_limit.contains(fixed_value, 0.0) {
        return Err(ModelError::OutOfWorkspace(format!(
            "fixed value {:.4}° is outside the joint limits",
            fixed_value.to_degrees()
        )));
    }
    if n < 2 {
        return Err(ModelError::InvalidParameter {
            field: "n",
            reason: format!("{n} samples; at least 2 required"),
        });
    }

    let mut samples = Vec::with_capacity(n);
    let mut anchor = None;
    for free_angle in free_limit.samples(n) {
        let (l1, l2) = match fixed_joint {
            FixedJoint::Theta1 => geom.dual_forward(fixed_value, free_angle)?,
            FixedJoint::Theta2 => geom.dual_forward(free_angle, fixed_value)?,
        };
        let (a1, a2) = *anchor.get_or_insert((l1, l2));
        samples.push(ContourSample {
            l1,
            l2,
            free_angle,
            nam: (l1 - a1).hypot(l2 - a2),
        });
    }
    Ok(ContourTrace {
        fixed_joint,
        fixed_value,
        samples,
    })
}

/// Slope of joint motion per unit actuator motion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope_deg_per_mm: f64,
    pub r2: f64,
}

impl From<LineFit> for SlopeFit {
    fn from(fit: LineFit) -> Self {
        Self {
            slope_deg_per_mm: fit.slope,
            r2: fit.r2,
        }
    }
}

/// OLS fit of the free angle (degrees) against NAM (mm).
pub fn slope_estimate(trace: &ContourTrace) -> Result<SlopeFit> {
    if trace.samples.len() < 3 {
        return Err(ModelError::DegenerateFit(format!(
            "{} samples; at least 3 required",
            trace.samples.len()
        )));
    }
    let points: Vec<_> = trace
        .samples
        .iter()
        .map(|s| (s.nam, s.free_angle.to_degrees()))
        .collect();
    fit_line(&points).map(SlopeFit::from)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleJointSample {
    pub l3: f64,
    pub theta3: f64,
}

/// `(l3, θ3)` pairs sweeping θ3 across its limits.
pub fn single_joint_curve(geom: &FingerGeometry, n: usize) -> Result<Vec<SingleJointSample>> {
    if n < 2 {
        return Err(ModelError::InvalidParameter {
            field: "n",
            reason: format!("{n} samples; at least 2 required"),
        });
    }
    geom.limits()[2]
        .samples(n)
        .into_iter()
        .map(|theta3| {
            Ok(SingleJointSample {
                l3: geom.single_forward(theta3)?,
                theta3,
            })
        })
        .collect()
}

/// θ3 (degrees) against `l3 − l3[0]` (mm).
pub fn single_joint_slope(curve: &[SingleJointSample]) -> Result<SlopeFit> {
    let Some(first) = curve.first() else {
        return Err(ModelError::DegenerateFit("empty curve".into()));
    };
    if curve.len() < 3 {
        return Err(ModelError::DegenerateFit(format!(
            "{} samples; at least 3 required",
            curve.len()
        )));
    }
    let points: Vec<_> = curve
        .iter()
        .map(|s| (s.l3 - first.l3, s.theta3.to_degrees()))
        .collect();
    fit_line(&points).map(SlopeFit::from)
}
