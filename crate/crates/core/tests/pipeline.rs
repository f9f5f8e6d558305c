use hybrid_finger::calibration::{
    read_samples_csv, validate_dataset, write_samples_csv, SyntheticProtocol,
};
use hybrid_finger::hydraulic::{
    effective_linear_compliance, propose_hydraulic_compliance, stiffness_set, ComplianceParams,
    HydraulicChamber,
};
use hybrid_finger::sim::{run_scenario, Phase, Scenario, SimParams};
use hybrid_finger::{ActuatorLengths, FingerGeometry, GeometryParams, JointAngles, ModelError};

#[test]
fn geometry_json_round_trip() {
    let g = FingerGeometry::reference();
    let text = serde_json::to_string(g.params()).unwrap();
    let back = FingerGeometry::new(GeometryParams::from_json(&text).unwrap()).unwrap();
    assert_eq!(back.params(), g.params());
    let q = JointAngles::from_degrees([7.0, -12.0, 4.0]);
    assert_eq!(back.forward(&q).unwrap(), g.forward(&q).unwrap());
}

#[test]
fn unreachable_lengths_are_rejected() {
    let g = FingerGeometry::reference();
    let rest = g.forward(&JointAngles::new(0.0, 0.0, 0.0)).unwrap();
    let far = ActuatorLengths {
        l1: rest.l1 * 10.0,
        l2: rest.l2 * 10.0,
        l3: rest.l3 * 10.0,
    };
    assert!(g.inverse(&far).is_err());
}

#[test]
fn calibrated_pistons_drive_inverse_kinematics() {
    // Fit the piston law, then recover poses from pistons alone.
    let g = FingerGeometry::reference();
    let protocol = SyntheticProtocol {
        theta_noise_deg: 0.0,
        ..SyntheticProtocol::default()
    };
    let samples = protocol.generate(&g).unwrap();
    let report = validate_dataset(&g, &samples).unwrap();
    for s in samples.iter().take(20) {
        let l = |i: usize| report.actuators[i].k * s.pistons[i] + report.actuators[i].b;
        let q = g
            .inverse(&ActuatorLengths {
                l1: l(0),
                l2: l(1),
                l3: l(2),
            })
            .unwrap();
        let (a, b) = (q.to_vector(), s.angles.to_vector());
        assert!((a - b).amax() < 1e-8, "{a:?} vs {b:?}");
    }
}

#[test]
fn dataset_csv_round_trip() {
    let g = FingerGeometry::reference();
    let samples = SyntheticProtocol::default().generate(&g).unwrap();
    let mut buf = Vec::new();
    write_samples_csv(&mut buf, &samples).unwrap();
    let back = read_samples_csv(buf.as_slice()).unwrap();
    assert_eq!(back.len(), samples.len());
    for (a, b) in back.iter().zip(&samples) {
        assert_eq!(a.pistons, b.pistons);
        assert!((a.angles.to_vector() - b.angles.to_vector()).amax() < 1e-15);
    }
}

#[test]
fn hydraulic_stiffness_feeds_the_simulator() {
    let g = FingerGeometry::reference();
    let chamber = HydraulicChamber::reference();
    let c_h = propose_hydraulic_compliance(&chamber, 1e-4).unwrap();
    let d0 = chamber.params().minor_diameter;
    let c_l = effective_linear_compliance(
        &ComplianceParams::new(c_h, std::f64::consts::PI * d0 * d0 / 4.0).unwrap(),
    );
    let q = JointAngles::from_degrees([0.0, 10.0, 10.0]);
    let set = stiffness_set(&g, &q, c_l).unwrap();

    let params = SimParams {
        gravity: [0.0; 3],
        ..SimParams::default()
    }
    .with_joint_stiffness(&set.k_q)
    .unwrap()
    .with_damping_ratio(0.7);
    assert_eq!(params.k_joint[2], set.k_q[(2, 2)]);
    let scenario = Scenario {
        phases: vec![Phase {
            t_end_s: 0.5,
            theta_cmd_deg: [0.0, 10.0, 10.0],
            tip_force: [0.0; 3],
        }],
        initial_theta_deg: [0.0, 10.0, 10.0],
        sample_rate_hz: 50.0,
    };
    let traj = run_scenario(&scenario, &params, &g).unwrap();
    assert_eq!(traj.len(), 26);
    assert!(traj.iter().all(|s| s.theta == s.theta_cmd));
}

#[test]
fn scenario_json_is_validated() {
    let g = FingerGeometry::reference();
    let text = r#"{"phases": [{"t_end_s": 1.0, "theta_cmd_deg": [0, 0, 0], "tip_force_N": [0, 0, 0]},
                              {"t_end_s": 0.5, "theta_cmd_deg": [0, 0, 0], "tip_force_N": [0, 0, 0]}]}"#;
    let scenario: Scenario = serde_json::from_str(text).unwrap();
    let err = run_scenario(&scenario, &SimParams::default(), &g).unwrap_err();
    assert!(matches!(
        err,
        ModelError::InvalidParameter {
            field: "t_end_s",
            ..
        }
    ));
    assert!(serde_json::from_str::<Scenario>(r#"{"phases": [], "extra": 1}"#).is_err());
}
