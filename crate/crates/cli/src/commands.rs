//! One function per subcommand. Each loads its inputs, makes the library
//! calls and writes the results; no modelling happens here.

use std::f64::consts::PI;
use std::path::Path;

use serde::Serialize;

use hybrid_finger::calibration::{
    read_samples_csv, scatter_points, validate_dataset, write_samples_csv, CalibrationReport,
    SyntheticProtocol,
};
use hybrid_finger::finger_model::REFERENCE_GEOMETRY_JSON;
use hybrid_finger::hydraulic::{
    effective_linear_compliance, propose_hydraulic_compliance, solve_hydraulic_force,
    stiffness_set, ChamberParams, ComplianceParams, HydraulicChamber, REFERENCE_CHAMBER_JSON,
};
use hybrid_finger::manipulability::{contour_fixed, slope_estimate, sweep_workspace, FixedJoint};
use hybrid_finger::pneumatic::{
    gas_force, gas_pressure, gas_tangent_stiffness, PneumaticModel, REFERENCE_PNEUMATIC_JSON,
};
use hybrid_finger::sim::{run_scenario, Scenario, SimParams, REFERENCE_SCENARIO_JSON};
use hybrid_finger::{FingerGeometry, GeometryParams, JointAngles};

use crate::output::{rows, Input, InputRecord, OutDir};
use crate::{CliError, Joint};

pub const GRID_HEADER: [&str; 3] = ["theta1_deg", "theta2_deg", "m_norm"];
pub const CONTOUR_HEADER: [&str; 4] = ["free_angle_deg", "l1_mm", "l2_mm", "nam_mm"];
pub const FORCE_HEADER: [&str; 3] = ["delta_y_mm", "P_MPa", "F_N"];
pub const PNEUMATIC_HEADER: [&str; 4] = ["l_mm", "P_MPa", "f_N", "dfdl_N_per_mm"];
pub const SCATTER_HEADER: [&str; 2] = ["Q_mm", "l_mm"];
pub const TRAJECTORY_HEADER: [&str; 7] = [
    "t_s",
    "theta1_deg",
    "theta2_deg",
    "theta3_deg",
    "cmd1_deg",
    "cmd2_deg",
    "cmd3_deg",
];

/// Central-difference step for the default hydraulic compliance, mm.
const COMPLIANCE_FD_STEP: f64 = 1e-4;

pub struct Context {
    geometry_input: Input,
    geometry: FingerGeometry,
    out: OutDir,
}

impl Context {
    pub fn new(geometry: Option<&Path>, out: &Path) -> Result<Self, CliError> {
        let geometry_input = Input::load(geometry, "reference geometry", REFERENCE_GEOMETRY_JSON)?;
        let params: GeometryParams = parse_json(&geometry_input, "geometry")?;
        let geometry = FingerGeometry::new(params)
            .map_err(|e| CliError::config(&format!("geometry {}", geometry_input.origin), e))?;
        Ok(Self {
            geometry_input,
            geometry,
            out: OutDir::create(out)?,
        })
    }
}

fn parse_json<T: serde::de::DeserializeOwned>(input: &Input, what: &str) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(&input.text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        CliError::config(
            &format!("{what} {} at `{field}`", input.origin),
            e.into_inner(),
        )
    })
}

#[derive(Serialize)]
struct SweepMeta {
    command: &'static str,
    grid: [usize; 2],
    m_norm_min: f64,
    m_norm_max: f64,
    geometry: InputRecord,
}

pub fn sweep(ctx: &Context, n1: usize, n2: usize) -> Result<(), CliError> {
    let grid = sweep_workspace(&ctx.geometry, n1, n2)?;
    ctx.out.write_csv(
        "grid.csv",
        &GRID_HEADER,
        grid.cells()
            .map(|(t1, t2, v)| [t1.to_degrees(), t2.to_degrees(), v]),
    )?;
    ctx.out.write_json(
        "sweep_meta.json",
        &SweepMeta {
            command: "sweep",
            grid: [n1, n2],
            m_norm_min: grid.min(),
            m_norm_max: grid.max(),
            geometry: ctx.geometry_input.record(),
        },
    )
}

#[derive(Serialize)]
struct ContourSummary {
    command: &'static str,
    fixed_joint: &'static str,
    fixed_value_deg: f64,
    samples: usize,
    slope_deg_per_mm: f64,
    r2: f64,
    monotone: bool,
    geometry: InputRecord,
}

pub fn contour(
    ctx: &Context,
    fixed: Joint,
    value_deg: f64,
    samples: usize,
) -> Result<(), CliError> {
    let (joint, name) = match fixed {
        Joint::Theta1 => (FixedJoint::Theta1, "theta1"),
        Joint::Theta2 => (FixedJoint::Theta2, "theta2"),
    };
    let trace = contour_fixed(&ctx.geometry, joint, value_deg.to_radians(), samples)?;
    let fit = slope_estimate(&trace)?;
    ctx.out.write_csv(
        "contour.csv",
        &CONTOUR_HEADER,
        trace
            .samples
            .iter()
            .map(|s| [s.free_angle.to_degrees(), s.l1, s.l2, s.nam]),
    )?;
    ctx.out.write_json(
        "contour_summary.json",
        &ContourSummary {
            command: "contour",
            fixed_joint: name,
            fixed_value_deg: value_deg,
            samples,
            slope_deg_per_mm: fit.slope_deg_per_mm,
            r2: fit.r2,
            monotone: trace.is_monotone(),
            geometry: ctx.geometry_input.record(),
        },
    )
}

pub struct ComplianceArgs {
    pub chamber: Option<std::path::PathBuf>,
    pub q_deg: [f64; 3],
    pub c_h: Option<f64>,
    pub a_eff: Option<f64>,
    /// `(min, max, step)` of the force curve, mm.
    pub dy_range: (f64, f64, f64),
}

#[derive(Serialize)]
struct StiffnessOutput {
    command: &'static str,
    q_deg: [f64; 3],
    #[serde(rename = "C_h_mm_per_N")]
    c_h: f64,
    #[serde(rename = "A_eff_mm2")]
    a_eff: f64,
    #[serde(rename = "C_l")]
    c_l: f64,
    #[serde(rename = "J")]
    jacobian: Vec<Vec<f64>>,
    #[serde(rename = "J_a")]
    task_jacobian: Vec<Vec<f64>>,
    #[serde(rename = "K_q")]
    k_q: Vec<Vec<f64>>,
    #[serde(rename = "C_q")]
    c_q: Vec<Vec<f64>>,
    #[serde(rename = "K_a")]
    k_a: Vec<Vec<f64>>,
    #[serde(rename = "C_a")]
    c_a: Vec<Vec<f64>>,
    k_a_is_pseudo_inverse: bool,
    geometry: InputRecord,
    chamber: InputRecord,
}

/// Displacements `i·step` for every integer `i` with `min ≤ i·step ≤ max`.
pub fn displacement_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(step > 0.0 && step.is_finite() && min.is_finite() && max.is_finite() && min <= max) {
        return Err(CliError::Config(format!(
            "displacement range [{min}, {max}] with step {step} is invalid"
        )));
    }
    let first = (min / step).ceil() as i64;
    let last = (max / step).floor() as i64;
    Ok((first..=last).map(|i| i as f64 * step).collect())
}

pub fn compliance(ctx: &Context, args: &ComplianceArgs) -> Result<(), CliError> {
    let chamber_input = Input::load(
        args.chamber.as_deref(),
        "reference chamber",
        REFERENCE_CHAMBER_JSON,
    )?;
    let chamber_params: ChamberParams = parse_json(&chamber_input, "chamber")?;
    let chamber = HydraulicChamber::new(chamber_params)
        .map_err(|e| CliError::config(&format!("chamber {}", chamber_input.origin), e))?;
    let displacements = displacement_grid(args.dy_range.0, args.dy_range.1, args.dy_range.2)?;

    let c_h = match args.c_h {
        Some(c) => c,
        None => propose_hydraulic_compliance(&chamber, COMPLIANCE_FD_STEP)?,
    };
    let d0 = chamber.params().minor_diameter;
    let a_eff = args.a_eff.unwrap_or(PI * d0 * d0 / 4.0);
    let c_l = effective_linear_compliance(&ComplianceParams::new(c_h, a_eff)?);

    let q = JointAngles::from_degrees(args.q_deg);
    let set = stiffness_set(&ctx.geometry, &q, c_l)?;
    if set.k_a_is_pseudo_inverse {
        log::warn!(
            "J_a is singular at q = {:?}°; K_a is a pseudo-inverse",
            args.q_deg
        );
    }

    let forces = displacements
        .iter()
        .map(|&dy| solve_hydraulic_force(&chamber, dy).map(|f| [dy, f.pressure, f.force]))
        .collect::<Result<Vec<_>, _>>()?;
    ctx.out.write_csv("force.csv", &FORCE_HEADER, forces)?;
    ctx.out.write_json(
        "stiffness.json",
        &StiffnessOutput {
            command: "compliance",
            q_deg: args.q_deg,
            c_h,
            a_eff,
            c_l,
            jacobian: rows(&set.jacobian),
            task_jacobian: rows(&set.task_jacobian),
            k_q: rows(&set.k_q),
            c_q: rows(&set.c_q),
            k_a: rows(&set.k_a),
            c_a: rows(&set.c_a),
            k_a_is_pseudo_inverse: set.k_a_is_pseudo_inverse,
            geometry: ctx.geometry_input.record(),
            chamber: chamber_input.record(),
        },
    )
}

#[derive(Serialize)]
struct PneumaticMeta {
    command: &'static str,
    l_range_mm: [f64; 2],
    points: usize,
    pneumatic: InputRecord,
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
fn evenly_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let s = i as f64 / (n - 1) as f64;
            lo * (1.0 - s) + hi * s
        })
        .collect()
}

pub fn pneumatic_curve(
    ctx: &Context,
    path: Option<&Path>,
    l_min: f64,
    l_max: f64,
    points: usize,
) -> Result<(), CliError> {
    let input = Input::load(path, "reference pneumatic model", REFERENCE_PNEUMATIC_JSON)?;
    let model = parse_json::<PneumaticModel>(&input, "pneumatic model")?
        .validated()
        .map_err(|e| CliError::config(&format!("pneumatic model {}", input.origin), e))?;
    if points < 2 || l_min.partial_cmp(&l_max) != Some(std::cmp::Ordering::Less) {
        return Err(CliError::Config(format!(
            "length range [{l_min}, {l_max}] with {points} points is invalid"
        )));
    }
    let rows = evenly_spaced(l_min, l_max, points)
        .into_iter()
        .map(|l| {
            Ok([
                l,
                gas_pressure(&model, l)?,
                gas_force(&model, l)?,
                gas_tangent_stiffness(&model, l)?,
            ])
        })
        .collect::<Result<Vec<_>, hybrid_finger::ModelError>>()?;
    ctx.out
        .write_csv("pneumatic.csv", &PNEUMATIC_HEADER, rows)?;
    ctx.out.write_json(
        "pneumatic_meta.json",
        &PneumaticMeta {
            command: "pneumatic-curve",
            l_range_mm: [l_min, l_max],
            points,
            pneumatic: input.record(),
        },
    )
}

#[derive(Serialize)]
struct CalibrationOutput {
    command: &'static str,
    #[serde(flatten)]
    report: CalibrationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    synthetic: Option<SyntheticProtocol>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dataset: Option<InputRecord>,
    geometry: InputRecord,
}

pub fn calibrate(
    ctx: &Context,
    csv_path: Option<&Path>,
    synthetic: Option<usize>,
    seed: u64,
    noise_deg: f64,
) -> Result<(), CliError> {
    let (samples, protocol, dataset) = match (csv_path, synthetic) {
        (Some(path), _) => {
            let input = Input::load(Some(path), "", "")?;
            let samples = read_samples_csv(input.text.as_bytes())
                .map_err(|e| CliError::config(&format!("dataset {}", input.origin), e))?;
            (samples, None, Some(input.record()))
        }
        (None, Some(n)) => {
            let protocol = SyntheticProtocol {
                samples: n,
                seed,
                theta_noise_deg: noise_deg,
                ..SyntheticProtocol::default()
            };
            let samples = protocol.generate(&ctx.geometry)?;
            let mut buf = Vec::new();
            write_samples_csv(&mut buf, &samples)
                .map_err(|e| CliError::Config(format!("cannot encode samples.csv: {e}")))?;
            ctx.out.write("samples.csv", &buf)?;
            (samples, Some(protocol), None)
        }
        (None, None) => {
            return Err(CliError::Config(
                "either --csv or --synthetic is required".into(),
            ))
        }
    };

    let report = validate_dataset(&ctx.geometry, &samples)?;
    for warning in &report.warnings {
        log::warn!("{warning}");
    }
    let scatter = scatter_points(&ctx.geometry, &samples)?;
    for (i, points) in scatter.iter().enumerate() {
        ctx.out.write_csv(
            &format!("scatter_L{}.csv", i + 1),
            &SCATTER_HEADER,
            points.iter().map(|&(q, l)| [q, l]),
        )?;
    }
    ctx.out.write_json(
        "calibration_report.json",
        &CalibrationOutput {
            command: "calibrate",
            report,
            synthetic: protocol,
            dataset,
            geometry: ctx.geometry_input.record(),
        },
    )
}

#[derive(Serialize)]
struct SimulateMeta {
    command: &'static str,
    params: SimParams,
    samples: usize,
    duration_s: f64,
    scenario: InputRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    params_file: Option<InputRecord>,
    geometry: InputRecord,
}

pub fn simulate(
    ctx: &Context,
    scenario_path: Option<&Path>,
    params_path: Option<&Path>,
) -> Result<(), CliError> {
    let scenario_input = Input::load(
        scenario_path,
        "grasp-release scenario",
        REFERENCE_SCENARIO_JSON,
    )?;
    let scenario: Scenario = parse_json(&scenario_input, "scenario")?;
    scenario
        .validate()
        .map_err(|e| CliError::config(&format!("scenario {}", scenario_input.origin), e))?;
    let (params, params_file) = match params_path {
        Some(path) => {
            let input = Input::load(Some(path), "", "")?;
            let params: SimParams = parse_json(&input, "simulation parameters")?;
            params.validate().map_err(|e| {
                CliError::config(&format!("simulation parameters {}", input.origin), e)
            })?;
            (params, Some(input.record()))
        }
        None => (SimParams::default(), None),
    };

    let trajectory = run_scenario(&scenario, &params, &ctx.geometry)?;
    ctx.out.write_csv(
        "trajectory.csv",
        &TRAJECTORY_HEADER,
        trajectory.iter().map(|s| {
            [
                s.t,
                s.theta[0].to_degrees(),
                s.theta[1].to_degrees(),
                s.theta[2].to_degrees(),
                s.theta_cmd[0].to_degrees(),
                s.theta_cmd[1].to_degrees(),
                s.theta_cmd[2].to_degrees(),
            ]
        }),
    )?;
    ctx.out.write_json(
        "simulate_meta.json",
        &SimulateMeta {
            command: "simulate",
            params,
            samples: trajectory.len(),
            duration_s: scenario.duration(),
            scenario: scenario_input.record(),
            params_file,
            geometry: ctx.geometry_input.record(),
        },
    )
}
