//! Integrator behaviour on equations with known solutions.

use std::f64::consts::PI;

use twocenter::ode::{integrate, IntegrateOptions, State};

fn opts(rel_tol: f64) -> IntegrateOptions {
    IntegrateOptions { rel_tol, record: false }
}

#[test]
fn harmonic_solution_and_nodes() {
    // u'' = −k²u with u(0) = 0, u'(0) = k: u = sin kx
    let k = 3.0;
    let end = 10.0;
    let traj = integrate(|_| k * k, State::new(0.0, 0.0, k), end, &opts(1e-12)).unwrap();
    let s = traj.end();
    let scale = s.log_scale.exp();
    assert!((s.u * scale - (k * end).sin()).abs() < 1e-9, "u = {}", s.u * scale);
    assert!((s.du * scale - k * (k * end).cos()).abs() < 1e-8);
    assert_eq!(traj.nodes, (k * end / PI).floor() as u32);
}

#[test]
fn backward_integration_counts_nodes() {
    let traj = integrate(|_| 1.0, State::new(10.0, 0.0, -1.0), 0.0, &opts(1e-12)).unwrap();
    assert_eq!(traj.nodes, 3);
    let fwd = integrate(|_| 1.0, State::new(0.0, 0.0, 1.0), 10.0, &opts(1e-12)).unwrap();
    assert!((fwd.prufer_angle(1.0) - 10.0).abs() < 1e-8, "{}", fwd.prufer_angle(1.0));
}

#[test]
fn growing_solution_is_rescaled() {
    // u'' = u grows like e^x; 800 units would overflow without rescaling.
    let traj = integrate(|_| -1.0, State::new(0.0, 1.0, 1.0), 800.0, &opts(1e-10)).unwrap();
    let s = traj.end();
    let ln_u = s.u.abs().ln() + s.log_scale;
    assert!((ln_u - 800.0).abs() < 1e-6, "ln u = {ln_u}");
    assert_eq!(traj.nodes, 0);
}

#[test]
fn airy_against_reference() {
    // u'' = x u; Ai(0) = 0.355028053887817, Ai'(0) = −0.258819403792807 and
    // Ai(−5) = 0.350761009024114.
    let traj =
        integrate(|x| -x, State::new(0.0, 0.355_028_053_887_817, -0.258_819_403_792_807), -5.0, &opts(1e-13)).unwrap();
    let s = traj.end();
    assert!((s.u * s.log_scale.exp() - 0.350_761_009_024_114).abs() < 1e-9);
    assert_eq!(traj.nodes, 2);
}

#[test]
fn tolerance_controls_error() {
    let k = 5.0;
    let err = |tol: f64| {
        let s = integrate(|_| k * k, State::new(0.0, 0.0, k), 20.0, &opts(tol)).unwrap().end();
        (s.u * s.log_scale.exp() - (k * 20.0).sin()).abs()
    };
    assert!(err(1e-12) < err(1e-6));
    assert!(err(1e-12) < 1e-8);
}

#[test]
fn recording_keeps_samples() {
    let traj =
        integrate(|_| 1.0, State::new(0.0, 0.0, 1.0), 3.0, &IntegrateOptions { rel_tol: 1e-10, record: true }).unwrap();
    assert!(traj.abscissae.len() > 2);
    assert_eq!(traj.abscissae.len(), traj.values.len());
    assert!(traj.abscissae.windows(2).all(|w| w[1] > w[0]));
    assert!(integrate(|_| 1.0, State::new(0.0, 0.0, 1.0), 3.0, &opts(0.0)).is_err());
}
