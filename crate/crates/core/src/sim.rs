//! Compliant joint-motion simulation.
//!
//! Each joint is driven toward its commanded angle by a linear elastic
//! torque `τ_k = −k·(θ − θ_cmd)`. Dynamics use a diagonal inertia, viscous
//! damping and point-mass gravity at the link midpoints; with a diagonal
//! inertia the Coriolis term is zero. Integration is semi-implicit Euler.
//!
//! Units: angles rad, lengths mm, torques N·mm, inertia kg·mm², time s.

use nalgebra::{DMatrix, DVector, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::finger_model::{FingerGeometry, JointAngles};
use crate::hydraulic::joint_compliance;

pub const REFERENCE_SCENARIO_JSON: &str = include_str!("../data/scenario_grasp_release.json");

/// kg·mm²/s² per N·mm.
const KG_MM2_PER_S2_PER_NMM: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimParams {
    /// Diagonal joint inertia, kg·mm².
    pub inertia: [f64; 3],
    /// Viscous damping, N·mm·s/rad.
    pub damping: [f64; 3],
    /// Gravitational acceleration in the base frame, mm/s².
    pub gravity: [f64; 3],
    /// Elastic joint stiffness, N·mm/rad.
    pub k_joint: [f64; 3],
    /// Integration step, s.
    pub dt: f64,
    /// Point mass at each link midpoint, kg.
    pub link_masses: [f64; 3],
    /// Joint speed norm treated as a blow-up, rad/s.
    #[serde(default = "default_max_speed")]
    pub max_speed: f64,
}

fn default_max_speed() -> f64 {
    1e3
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            inertia: [60.0, 40.0, 8.0],
            damping: [0.0; 3],
            gravity: [0.0, 0.0, -9810.0],
            k_joint: [5000.0, 5000.0, 1500.0],
            dt: 1e-3,
            link_masses: [0.02, 0.015, 0.01],
            max_speed: default_max_speed(),
        }
        .with_damping_ratio(0.7)
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &'static str, reason: String| {
            Err(ModelError::InvalidParameter { field, reason })
        };
        if self.inertia.iter().any(|&i| !(i > 0.0 && i.is_finite())) {
            return bad("inertia", format!("{:?} must be positive", self.inertia));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt", format!("{} must be positive", self.dt));
        }
        if self.damping.iter().any(|&c| !(c >= 0.0 && c.is_finite())) {
            return bad(
                "damping",
                format!("{:?} must be non-negative", self.damping),
            );
        }
        if self.k_joint.iter().any(|&k| !(k >= 0.0 && k.is_finite())) {
            return bad(
                "k_joint",
                format!("{:?} must be non-negative", self.k_joint),
            );
        }
        if self
            .link_masses
            .iter()
            .any(|&m| !(m >= 0.0 && m.is_finite()))
        {
            return bad(
                "link_masses",
                format!("{:?} must be non-negative", self.link_masses),
            );
        }
        if self.gravity.iter().any(|g| !g.is_finite()) {
            return bad("gravity", format!("{:?} must be finite", self.gravity));
        }
        if !(self.max_speed > 0.0) {
            return bad("max_speed", format!("{} must be positive", self.max_speed));
        }
        Ok(())
    }

    /// Damping giving ratio `zeta` for each joint's spring-inertia pair.
    pub fn with_damping_ratio(mut self, zeta: f64) -> Self {
        for j in 0..3 {
            // c = 2ζ√(k·I), converted from kg·mm²/s to N·mm·s.
            let k = self.k_joint[j] * KG_MM2_PER_S2_PER_NMM;
            self.damping[j] = 2.0 * zeta * (k * self.inertia[j]).sqrt() / KG_MM2_PER_S2_PER_NMM;
        }
        self
    }

    /// Take the joint stiffness from the diagonal of a joint stiffness matrix.
    pub fn with_joint_stiffness(mut self, k_q: &DMatrix<f64>) -> Result<Self> {
        if k_q.shape() != (3, 3) {
            return Err(ModelError::DimensionMismatch {
                expected: 3,
                actual: k_q.nrows(),
            });
        }
        for j in 0..3 {
            self.k_joint[j] = k_q[(j, j)];
        }
        Ok(self)
    }

    /// Free-oscillation period of joint `j`, s.
    pub fn natural_period(&self, j: usize) -> f64 {
        2.0 * std::f64::consts::PI
            * (self.inertia[j] / (self.k_joint[j] * KG_MM2_PER_S2_PER_NMM)).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub t: f64,
    pub theta: Vector3<f64>,
    pub theta_dot: Vector3<f64>,
    pub theta_cmd: Vector3<f64>,
}

impl SimState {
    pub fn at_rest(theta: Vector3<f64>) -> Self {
        Self {
            t: 0.0,
            theta,
            theta_dot: Vector3::zeros(),
            theta_cmd: theta,
        }
    }

    /// Kinetic plus elastic energy about the current command, N·mm.
    pub fn energy(&self, params: &SimParams) -> f64 {
        (0..3)
            .map(|j| {
                let kinetic =
                    0.5 * params.inertia[j] * self.theta_dot[j].powi(2) / KG_MM2_PER_S2_PER_NMM;
                let elastic = 0.5 * params.k_joint[j] * (self.theta[j] - self.theta_cmd[j]).powi(2);
                kinetic + elastic
            })
            .sum()
    }
}

/// `τ_k = −k·(θ − θ_cmd)` componentwise.
pub fn elastic_torque(
    k_joint: &[f64; 3],
    theta_cmd: &Vector3<f64>,
    theta: &Vector3<f64>,
) -> Vector3<f64> {
    Vector3::from_fn(|j, _| -k_joint[j] * (theta[j] - theta_cmd[j]))
}

/// Generalized gravity term `G(θ)` on the left-hand side of the dynamics, N·mm.
pub fn gravity_torque(
    geom: &FingerGeometry,
    params: &SimParams,
    theta: &Vector3<f64>,
) -> Vector3<f64> {
    let pose = geom.chain_pose(&JointAngles::from_vector(theta));
    let g = Vector3::from(params.gravity);
    let mut applied = Vector3::zeros();
    for (i, mid) in pose.link_midpoints().iter().enumerate() {
        // kg·mm/s² → N
        let weight = g * params.link_masses[i] / KG_MM2_PER_S2_PER_NMM;
        for j in 0..=i {
            applied[j] += pose.axes[j].cross(&(mid - pose.origins[j])).dot(&weight);
        }
    }
    -applied
}

/// Static joint deflection under a task-space force: `Δθ = K_q⁻¹·J_aᵀ·f`.
pub fn quasistatic_deflection(
    k_q: &DMatrix<f64>,
    j_a: &DMatrix<f64>,
    f_ext: &DVector<f64>,
) -> Result<DVector<f64>> {
    if j_a.nrows() != f_ext.len() {
        return Err(ModelError::DimensionMismatch {
            expected: j_a.nrows(),
            actual: f_ext.len(),
        });
    }
    if j_a.ncols() != k_q.nrows() {
        return Err(ModelError::DimensionMismatch {
            expected: k_q.nrows(),
            actual: j_a.ncols(),
        });
    }
    Ok(joint_compliance(k_q)? * j_a.tr_mul(f_ext))
}

/// One semi-implicit Euler step under external joint torque `tau_ext` (N·mm).
pub fn step(
    state: &SimState,
    params: &SimParams,
    tau_ext: &Vector3<f64>,
    geom: &FingerGeometry,
) -> Result<SimState> {
    let tau_k = elastic_torque(&params.k_joint, &state.theta_cmd, &state.theta);
    let gravity = gravity_torque(geom, params, &state.theta);
    let mut theta_dot = state.theta_dot;
    for j in 0..3 {
        let net = tau_k[j] + tau_ext[j] - params.damping[j] * state.theta_dot[j] - gravity[j];
        theta_dot[j] += params.dt * net * KG_MM2_PER_S2_PER_NMM / params.inertia[j];
    }
    let t = state.t + params.dt;
    let speed = theta_dot.norm();
    if !(speed <= params.max_speed) {
        return Err(ModelError::NumericalBlowup { t_s: t, speed });
    }
    Ok(SimState {
        t,
        theta: state.theta + theta_dot * params.dt,
        theta_dot,
        theta_cmd: state.theta_cmd,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Phase {
    pub t_end_s: f64,
    /// Command reached at `t_end_s`, linearly ramped from the previous one.
    pub theta_cmd_deg: [f64; 3],
    /// Constant fingertip force during the phase, N.
    #[serde(rename = "tip_force_N")]
    pub tip_force: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub phases: Vec<Phase>,
    /// Pose and command at t = 0; zero when omitted.
    #[serde(default)]
    pub initial_theta_deg: [f64; 3],
    #[serde(default = "default_sample_rate")]
    pub sample_rate_hz: f64,
}

fn default_sample_rate() -> f64 {
    100.0
}

impl Scenario {
    pub fn reference() -> Self {
        serde_json::from_str(REFERENCE_SCENARIO_JSON).expect("bundled scenario parses")
    }

    pub fn validate(&self) -> Result<()> {
        if self.phases.is_empty() {
            return Err(ModelError::InvalidParameter {
                field: "phases",
                reason: "scenario needs at least one phase".into(),
            });
        }
        let mut previous = 0.0;
        for phase in &self.phases {
            if !(phase.t_end_s > previous) {
                return Err(ModelError::InvalidParameter {
                    field: "t_end_s",
                    reason: format!("phase end {} must increase past {previous}", phase.t_end_s),
                });
            }
            if phase
                .theta_cmd_deg
                .iter()
                .chain(&phase.tip_force)
                .any(|v| !v.is_finite())
            {
                return Err(ModelError::InvalidParameter {
                    field: "phases",
                    reason: "commands and forces must be finite".into(),
                });
            }
            previous = phase.t_end_s;
        }
        if !(self.sample_rate_hz > 0.0) {
            return Err(ModelError::InvalidParameter {
                field: "sample_rate_hz",
                reason: format!("{} must be positive", self.sample_rate_hz),
            });
        }
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        self.phases.last().map_or(0.0, |p| p.t_end_s)
    }

    fn phase_index(&self, t: f64) -> usize {
        self.phases
            .iter()
            .position(|p| t < p.t_end_s)
            .unwrap_or(self.phases.len() - 1)
    }

    /// Commanded joint angles at time `t`, rad.
    pub fn command(&self, t: f64) -> Vector3<f64> {
        let i = self.phase_index(t);
        let (start_t, start) = if i == 0 {
            (0.0, self.initial_theta_deg)
        } else {
            (self.phases[i - 1].t_end_s, self.phases[i - 1].theta_cmd_deg)
        };
        let phase = &self.phases[i];
        let s = ((t - start_t) / (phase.t_end_s - start_t)).clamp(0.0, 1.0);
        Vector3::from_fn(|j, _| (start[j] + s * (phase.theta_cmd_deg[j] - start[j])).to_radians())
    }

    pub fn tip_force(&self, t: f64) -> Vector3<f64> {
        Vector3::from(self.phases[self.phase_index(t)].tip_force)
    }
}

/// Integrate the scenario and return states sampled at `sample_rate_hz`,
/// starting with the initial state.
pub fn run_scenario(
    scenario: &Scenario,
    params: &SimParams,
    geom: &FingerGeometry,
) -> Result<Vec<SimState>> {
    scenario.validate()?;
    params.validate()?;
    let steps = (scenario.duration() / params.dt).round() as usize;
    let stride = ((1.0 / scenario.sample_rate_hz) / params.dt)
        .round()
        .max(1.0) as usize;

    let initial = Vector3::from(scenario.initial_theta_deg.map(f64::to_radians));
    let mut state = SimState::at_rest(initial);
    state.theta_cmd = scenario.command(0.0);
    let mut trajectory = Vec::with_capacity(steps / stride + 2);
    trajectory.push(state);

    for n in 1..=steps {
        let j_a = geom.task_jacobian(&JointAngles::from_vector(&state.theta));
        let tau_ext = j_a.tr_mul(&scenario.tip_force(state.t));
        state = step(&state, params, &tau_ext, geom)?;
        state.t = n as f64 * params.dt;
        state.theta_cmd = scenario.command(state.t);
        if n % stride == 0 || n == steps {
            trajectory.push(state);
        }
    }
    Ok(trajectory)
}
