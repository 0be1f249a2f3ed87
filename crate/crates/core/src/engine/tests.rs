use super::*;
use crate::autonomize::{to_autonomous, Mode};
use crate::system::load_system_str;

fn analyze(doc: &str, seeds: &[Vec<f64>]) -> AnalysisResult {
    let sys = to_autonomous(&load_system_str(doc).unwrap(), &Mode::default()).unwrap();
    run_constraint_algorithm(sys, seeds, &EngineOptions::default()).unwrap()
}

#[test]
fn regular_system_has_no_levels() {
    let r = analyze(
        r#"{"kind": "linearly_singular", "autonomous": true, "states": ["x", "y"],
            "A": [["1", "0"], ["0", "1"]], "c": ["-y", "x"]}"#,
        &[vec![0.3, 0.4]],
    );
    assert_eq!(r.status, Status::Solved);
    assert!(r.levels.is_empty());
    let v = evaluate_solution_field(&r, &[0.3, 0.4]).unwrap();
    assert_eq!(v, vec![0.4, -0.3]);
}

#[test]
fn zero_matrix_unit_rhs_is_inconsistent() {
    let r = analyze(
        r#"{"kind": "linearly_singular", "autonomous": true, "states": ["x"],
            "A": [["0"]], "c": ["-1"]}"#,
        &[vec![0.0]],
    );
    assert_eq!(r.status, Status::Inconsistent { level: 0 });
}

const PENDULUM: &str = include_str!("../../specs/pendulum.json");

#[test]
fn pendulum_ladder() {
    let r = analyze(PENDULUM, &[vec![0.0, 1.0, 0.0, 0.1, 0.0, 0.0]]);
    assert_eq!(r.status, Status::Solved);
    assert_eq!(r.levels.len(), 3);
    assert_eq!(r.gauge_dimension, 0);
    assert_eq!(r.multiplier_count, 1);
    for l in &r.levels {
        assert_eq!(l.constraints.len(), 1);
    }
}

#[test]
fn pendulum_integration_drift() {
    use crate::integrate::{integrate, IntegrateOptions};
    let r = analyze(PENDULUM, &[vec![0.0, 1.0, 0.0, 0.1, 0.0, 0.0]]);
    // the seed itself lies on the final manifold
    let x0 = [0.0, 1.0, 0.0, 0.1, 0.0, 0.0];
    let traj = integrate(&r, &x0, (0.0, 1.0), &IntegrateOptions::default()).unwrap();
    assert!(traj.max_drift() <= 1e-6);
    assert_eq!(traj.times.last(), Some(&1.0));
    let x = traj.last().unwrap();
    let radius = 1.0 + 0.1 * 1.0_f64.sin();
    assert!((x[1] * x[1] + x[2] * x[2] - radius * radius).abs() < 1e-9);
}

#[test]
fn projection_onto_the_pendulum_circle() {
    let r = analyze(PENDULUM, &[vec![0.0, 1.0, 0.0, 0.1, 0.0, 0.0]]);
    let primary = r.levels[0].constraints.clone();
    // R(0) = 1, and the minimal-norm path from (2, 0) is radial
    let p = project_to_level_fixing(&[0.0, 2.0, 0.0, 0.3, 0.0, 0.0], &primary, 1e-12, Some(0)).unwrap();
    assert!((p[1] - 1.0).abs() < 1e-12 && p[2].abs() < 1e-15, "{p:?}");
    assert_eq!(&p[3..], &[0.3, 0.0, 0.0]);
    assert!(matches!(
        project_to_level_fixing(&[0.0; 6], &primary, 1e-12, Some(0)),
        Err(ProjectionError::JacobianRankDeficient { .. })
    ));
}

#[test]
fn dependent_gradients_on_the_zero_set_are_demoted() {
    // off {v1 = q2} two primary combinations look independent
    let r = analyze(
        r#"{"kind": "lagrangian", "q": ["q1", "q2"], "L": "0.5*(v_q1 - q2)^2"}"#,
        &[vec![0.0, 0.3, -0.2, 0.5, 0.1]],
    );
    assert_eq!(r.status, Status::Solved);
    assert_eq!(r.levels.len(), 1);
    assert_eq!(r.levels[0].constraints.len(), 1);
    assert_eq!(r.gauge_dimension, 1);
    for s in &r.final_samples {
        assert!((s[3] - s[2]).abs() < 1e-9);
    }
}

#[test]
fn skinner_rusk_legendre_constraint() {
    let r = analyze(
        r#"{"kind": "skinner_rusk", "q": ["q"], "L": "0.5*v_q^2"}"#,
        &[vec![0.0, 0.0, 0.0, 1.0, 0.5]],
    );
    assert_eq!(r.status, Status::Solved);
    assert_eq!(r.levels.len(), 1);
    // p_t is pure gauge
    assert_eq!(r.gauge_dimension, 1);
    for s in &r.final_samples {
        assert!((s[3] - s[4]).abs() < 1e-12);
    }
    // free particle: q̇ = v, v̇ = 0
    let v = evaluate_solution_field(&r, &r.final_samples[0]).unwrap();
    assert!((v[1] - r.final_samples[0][4]).abs() < 1e-12 && v[4].abs() < 1e-12, "{v:?}");
}

#[test]
fn max_levels_stops_the_ladder() {
    let sys = to_autonomous(&load_system_str(PENDULUM).unwrap(), &Mode::default()).unwrap();
    let opts = EngineOptions { max_levels: Some(1), ..Default::default() };
    let r = run_constraint_algorithm(sys, &[vec![0.0, 1.0, 0.0, 0.1, 0.0, 0.0]], &opts).unwrap();
    assert_eq!(r.status, Status::MaxIterations);
    assert!(r.solution_field.is_none());
}

#[test]
fn seeds_are_validated() {
    let sys = to_autonomous(&load_system_str(PENDULUM).unwrap(), &Mode::default()).unwrap();
    let opts = EngineOptions::default();
    assert!(matches!(run_constraint_algorithm(sys.clone(), &[], &opts), Err(EngineError::NoSeeds)));
    assert!(matches!(
        run_constraint_algorithm(sys, &[vec![0.0; 5]], &opts),
        Err(EngineError::SeedDimension { expected: 6, found: 5, .. })
    ));
}
