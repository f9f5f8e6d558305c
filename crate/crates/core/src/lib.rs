//! Manipulability and compliance analysis for modular soft-rigid hybrid fingers.
//!
//! The crate maps soft linear actuator lengths to passive joint angles,
//! evaluates manipulability over the joint workspace, models hydraulic and
//! pneumatic actuator compliance, assembles joint- and task-space stiffness
//! matrices, fits piston-to-length calibrations and simulates compliant
//! joint motion.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod error;
pub mod finger_model;
pub mod hydraulic;
pub mod manipulability;
pub mod pneumatic;
pub mod regression;
pub mod sim;

pub use error::{ModelError, Result};
pub use finger_model::{
    ActuatorLengths, FingerGeometry, GeometryParams, JointAngles, OffsetVariant,
};
