//! Numerical inversion of the actuator-length maps.

use nalgebra::Vector2;

use super::geometry::FingerGeometry;
use super::JointAngles;
use crate::error::{ModelError, Result};

const MAX_NEWTON_ITERATIONS: usize = 50;
const MAX_SCALAR_ITERATIONS: usize = 200;
/// Relative tolerance on the squared-length residual.
const SQUARED_RESIDUAL_TOL: f64 = 1e-12;
/// Accepted length error after convergence, mm.
const LENGTH_TOL: f64 = 1e-9;
/// Joint-limit slack for solutions that land on a boundary, rad.
const LIMIT_SLACK: f64 = 1e-9;

impl FingerGeometry {
    /// Solve `dual_forward(θ1, θ2) = (l1, l2)` by damped Newton on the squared lengths.
    pub fn dual_inverse(&self, l1: f64, l2: f64, guess: Option<JointAngles>) -> Result<(f64, f64)> {
        for (value, field) in [(l1, "l1"), (l2, "l2")] {
            if !(value.is_finite() && value > 0.0) {
                return Err(ModelError::InvalidParameter {
                    field,
                    reason: format!("target length {value} must be positive"),
                });
            }
        }
        let targets = Vector2::new(l1 * l1, l2 * l2);
        let scale = Vector2::new(targets[0].max(1.0), targets[1].max(1.0));
        let residual_of = |theta: &Vector2<f64>| {
            let sq = self.dual_squared(theta[0], theta[1]).squared;
            Vector2::new(sq[0] - targets[0], sq[1] - targets[1])
        };
        let size = |r: &Vector2<f64>| r.component_div(&scale).amax();

        let mut theta = guess.map_or(Vector2::zeros(), |g| Vector2::new(g.theta1, g.theta2));
        let mut residual = residual_of(&theta);
        let mut converged = size(&residual) <= SQUARED_RESIDUAL_TOL;
        let mut iterations = 0;

        while !converged && iterations < MAX_NEWTON_ITERATIONS {
            iterations += 1;
            // d(l²)/dθ = 2 · ½∂(l²)/∂θ
            let jac = self.dual_squared(theta[0], theta[1]).half_gradient * 2.0;
            let Some(step) = jac.lu().solve(&residual) else {
                break;
            };
            let current = size(&residual);
            let mut damping = 1.0;
            let mut accepted = false;
            while damping > 1e-6 {
                let trial = theta - step * damping;
                let trial_residual = residual_of(&trial);
                if size(&trial_residual) < current {
                    theta = trial;
                    residual = trial_residual;
                    accepted = true;
                    break;
                }
                damping *= 0.5;
            }
            converged = size(&residual) <= SQUARED_RESIDUAL_TOL;
            if !accepted {
                break;
            }
        }

        let (f1, f2) = self.dual_forward(theta[0], theta[1])?;
        let length_error = (f1 - l1).abs().max((f2 - l2).abs());
        if !converged && length_error > LENGTH_TOL {
            return Err(ModelError::NoConvergence {
                iterations,
                residual: length_error,
            });
        }
        let limits = self.limits();
        if !limits[0].contains(theta[0], LIMIT_SLACK) || !limits[1].contains(theta[1], LIMIT_SLACK)
        {
            return Err(ModelError::OutOfWorkspace(format!(
                "(l1, l2) = ({l1}, {l2}) mm solves to θ1 = {:.4}°, θ2 = {:.4}°",
                theta[0].to_degrees(),
                theta[1].to_degrees()
            )));
        }
        Ok((theta[0], theta[1]))
    }

    /// Solve `single_forward(θ3) = l3` inside the θ3 limits.
    pub fn single_inverse(&self, l3: f64) -> Result<f64> {
        let limit = self.limits()[2];
        // Orient so that f(θ) = ±(l3(θ) − target) is increasing on [lo, hi].
        let sign = if self.single_increasing() { 1.0 } else { -1.0 };
        let f = |theta: f64| -> Result<f64> { Ok(sign * (self.single_forward(theta)? - l3)) };

        let (mut lo, mut hi) = (limit.lower, limit.upper);
        let f_lo = f(lo)?;
        let f_hi = f(hi)?;
        let tol = LENGTH_TOL * 1e-3 * l3.abs().max(1.0);
        if f_lo.abs() <= tol {
            return Ok(lo);
        }
        if f_hi.abs() <= tol {
            return Ok(hi);
        }
        if f_lo > 0.0 || f_hi < 0.0 {
            return Err(ModelError::OutOfWorkspace(format!(
                "l3 = {l3} mm is outside [{}, {}] mm",
                self.single_forward(limit.lower)?,
                self.single_forward(limit.upper)?
            )));
        }

        let mut theta = 0.5 * (lo + hi);
        for _ in 0..MAX_SCALAR_ITERATIONS {
            let value = f(theta)?;
            if value.abs() <= tol {
                return Ok(theta);
            }
            if value < 0.0 {
                lo = theta;
            } else {
                hi = theta;
            }
            let slope = sign * self.single_derivative(theta)?;
            let newton = theta - value / slope;
            theta = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo <= f64::EPSILON * hi.abs().max(lo.abs()).max(1.0) {
                return Ok(theta);
            }
        }
        Err(ModelError::NoConvergence {
            iterations: MAX_SCALAR_ITERATIONS,
            residual: f(theta)?.abs(),
        })
    }

    /// Inverse of [`forward`](Self::forward) for all three actuators.
    pub fn inverse(&self, lengths: &super::ActuatorLengths) -> Result<JointAngles> {
        let (theta1, theta2) = self.dual_inverse(lengths.l1, lengths.l2, None)?;
        Ok(JointAngles {
            theta1,
            theta2,
            theta3: self.single_inverse(lengths.l3)?,
        })
    }
}
