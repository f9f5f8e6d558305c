//! Affine piston-to-length calibration.
//!
//! Each sample pairs three syringe piston positions with measured joint
//! angles. The geometry turns the angles into expected actuator lengths and
//! each actuator gets its own `l = k·Q + b` fit.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{ModelError, Result};
use crate::finger_model::{ActuatorLengths, FingerGeometry, JointAngles};
use crate::regression::fit_line;

pub const CSV_HEADER: [&str; 6] = [
    "Q1_mm",
    "Q2_mm",
    "Q3_mm",
    "theta1_deg",
    "theta2_deg",
    "theta3_deg",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationSample {
    /// Piston positions Q1..Q3, mm.
    pub pistons: [f64; 3],
    pub angles: JointAngles,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub k: f64,
    pub b: f64,
    pub r2: f64,
}

pub fn expected_lengths(
    geom: &FingerGeometry,
    sample: &CalibrationSample,
) -> Result<ActuatorLengths> {
    geom.forward(&sample.angles)
}

/// OLS fit of `l = k·Q + b` over `(Q, l)` pairs.
pub fn fit_affine(points: &[(f64, f64)]) -> Result<RegressionResult> {
    let fit = fit_line(points)?;
    Ok(RegressionResult {
        k: fit.slope,
        b: fit.intercept,
        r2: fit.r2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActuatorReport {
    pub k: f64,
    pub b: f64,
    pub r2: f64,
    pub rmse_mm: f64,
    pub max_residual_mm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub samples: usize,
    pub actuators: [ActuatorReport; 3],
    pub warnings: Vec<String>,
}

/// `(Q_i, l_i)` pairs for every actuator, in sample order.
pub fn scatter_points(
    geom: &FingerGeometry,
    samples: &[CalibrationSample],
) -> Result<[Vec<(f64, f64)>; 3]> {
    let mut out: [Vec<(f64, f64)>; 3] = Default::default();
    for sample in samples {
        let l = expected_lengths(geom, sample)?;
        for (i, li) in [l.l1, l.l2, l.l3].into_iter().enumerate() {
            out[i].push((sample.pistons[i], li));
        }
    }
    Ok(out)
}

pub fn validate_dataset(
    geom: &FingerGeometry,
    samples: &[CalibrationSample],
) -> Result<CalibrationReport> {
    if samples.len() < 2 {
        return Err(ModelError::DegenerateFit(format!(
            "{} sample(s); at least 2 required",
            samples.len()
        )));
    }
    let scatter = scatter_points(geom, samples)?;
    let mut warnings = Vec::new();
    let mut reports = Vec::with_capacity(3);
    for (i, points) in scatter.iter().enumerate() {
        let fit = fit_affine(points).map_err(|e| match e {
            ModelError::DegenerateFit(msg) => {
                ModelError::DegenerateFit(format!("actuator L{}: {msg}", i + 1))
            }
            other => other,
        })?;
        let residuals: Vec<f64> = points.iter().map(|&(q, l)| l - fit.k * q - fit.b).collect();
        let rmse = (residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64).sqrt();
        let max_residual = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        if fit.k > 0.0 {
            warnings.push(format!(
                "actuator L{}: positive slope k = {:.6}; withdrawing liquid should shorten the actuator",
                i + 1,
                fit.k
            ));
        }
        reports.push(ActuatorReport {
            k: fit.k,
            b: fit.b,
            r2: fit.r2,
            rmse_mm: rmse,
            max_residual_mm: max_residual,
        });
    }
    Ok(CalibrationReport {
        samples: samples.len(),
        actuators: [reports[0], reports[1], reports[2]],
        warnings,
    })
}

/// Seeded stand-in for the hardware protocol. Pistons follow an exact affine
/// law of the true lengths; only the measured angles carry Gaussian noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticProtocol {
    pub samples: usize,
    pub seed: u64,
    pub theta_noise_deg: f64,
    pub slopes: [f64; 3],
    pub intercepts: [f64; 3],
}

impl Default for SyntheticProtocol {
    fn default() -> Self {
        Self {
            samples: 200,
            seed: 2024,
            theta_noise_deg: 0.3,
            slopes: [-0.8, -0.8, -0.6],
            intercepts: [30.0, 30.0, 30.0],
        }
    }
}

impl SyntheticProtocol {
    pub fn generate(&self, geom: &FingerGeometry) -> Result<Vec<CalibrationSample>> {
        if self.slopes.iter().any(|&k| k == 0.0 || !k.is_finite()) {
            return Err(ModelError::InvalidParameter {
                field: "slopes",
                reason: "piston slopes must be finite and nonzero".into(),
            });
        }
        let noise = Normal::new(0.0, self.theta_noise_deg.to_radians()).map_err(|e| {
            ModelError::InvalidParameter {
                field: "theta_noise_deg",
                reason: e.to_string(),
            }
        })?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let limits = *geom.limits();
        (0..self.samples)
            .map(|_| {
                let mut truth = [0.0; 3];
                for (t, lim) in truth.iter_mut().zip(limits) {
                    *t = rng.random_range(lim.lower..=lim.upper);
                }
                let truth = JointAngles::new(truth[0], truth[1], truth[2]);
                let l = geom.forward(&truth)?;
                let mut pistons = [0.0; 3];
                for (i, li) in [l.l1, l.l2, l.l3].into_iter().enumerate() {
                    pistons[i] = (li - self.intercepts[i]) / self.slopes[i];
                }
                let measured = JointAngles::new(
                    truth.theta1 + noise.sample(&mut rng),
                    truth.theta2 + noise.sample(&mut rng),
                    truth.theta3 + noise.sample(&mut rng),
                );
                Ok(CalibrationSample {
                    pistons,
                    angles: measured,
                })
            })
            .collect()
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("row {row}, column `{column}`: {message}")]
    Field {
        row: usize,
        column: String,
        message: String,
    },
    #[error("header mismatch: expected `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
    #[error("dataset has no rows")]
    Empty,
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Read samples from CSV with the header `Q1_mm,Q2_mm,Q3_mm,theta1_deg,theta2_deg,theta3_deg`.
/// Rows are numbered from 1 for the first data row.
pub fn read_samples_csv<R: Read>(
    reader: R,
) -> std::result::Result<Vec<CalibrationSample>, DatasetError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let found: Vec<&str> = headers.iter().collect();
    if found != CSV_HEADER {
        return Err(DatasetError::Header {
            expected: CSV_HEADER.join(","),
            found: found.join(","),
        });
    }
    let mut samples = Vec::new();
    for (index, record) in rdr.records().enumerate() {
        let row = index + 1;
        let record = record?;
        let mut values = [0.0; 6];
        for (col, value) in values.iter_mut().enumerate() {
            let raw = record.get(col).unwrap_or("");
            let parsed: f64 = raw.parse().map_err(|_| DatasetError::Field {
                row,
                column: CSV_HEADER[col].into(),
                message: format!("`{raw}` is not a number"),
            })?;
            if !parsed.is_finite() {
                return Err(DatasetError::Field {
                    row,
                    column: CSV_HEADER[col].into(),
                    message: format!("`{raw}` is not finite"),
                });
            }
            *value = parsed;
        }
        samples.push(CalibrationSample {
            pistons: [values[0], values[1], values[2]],
            angles: JointAngles::from_degrees([values[3], values[4], values[5]]),
        });
    }
    if samples.is_empty() {
        return Err(DatasetError::Empty);
    }
    Ok(samples)
}

pub fn write_samples_csv<W: Write>(writer: W, samples: &[CalibrationSample]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for s in samples {
        let deg = s.angles.to_degrees();
        w.write_record(s.pistons.iter().chain(deg.iter()).map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
