//! Asymptotic formulas against the numeric eigenfunctions and against each
//! other.

use twocenter::asymptotics::{
    angular_wave_asym, lambda_eta_asym, quantum_condition_angular, radial_wave_asym, z_derivatives,
};
use twocenter::eigen::{solve_state_seeded, Eigensolution, SolverSettings};
use twocenter::{FormulaReading, PhysicalConfig, QuantumNumbers, ScaledParams};

fn solve(qn: QuantumNumbers, config: &PhysicalConfig) -> (Eigensolution, ScaledParams) {
    let sol = solve_state_seeded(qn, config, &SolverSettings::default(), None, None).unwrap();
    let sp = ScaledParams::new(config, sol.energy).unwrap();
    (sol, sp)
}

/// Pearson correlation over the points where `model` is defined.
fn correlation(samples: &[(f64, f64)], model: impl Fn(f64) -> Option<f64>) -> f64 {
    let pairs: Vec<(f64, f64)> =
        samples.iter().filter_map(|&(x, u)| model(x).filter(|m| m.is_finite()).map(|m| (u, m))).collect();
    let n = pairs.len() as f64;
    let (ma, mb) = (pairs.iter().map(|p| p.0).sum::<f64>() / n, pairs.iter().map(|p| p.1).sum::<f64>() / n);
    let cov: f64 = pairs.iter().map(|p| (p.0 - ma) * (p.1 - mb)).sum();
    let va: f64 = pairs.iter().map(|p| (p.0 - ma).powi(2)).sum();
    let vb: f64 = pairs.iter().map(|p| (p.1 - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

#[test]
fn corrected_radial_shape_at_zero_charge() {
    let config = PhysicalConfig::new(0.0, 1.0, 6.0).unwrap();
    for (qn, bound) in [
        (QuantumNumbers::new(0, 0, 1), 0.99),
        (QuantumNumbers::new(1, 0, 1), 0.99),
        (QuantumNumbers::new(0, 0, 0), 0.5),
    ] {
        let (sol, sp) = solve(qn, &config);
        let interior: Vec<(f64, f64)> = sol.u_samples.iter().copied().filter(|p| p.0 > 1.0).collect();
        let corrected = correlation(&interior, |xi| radial_wave_asym(xi, qn, &sp, 0.0, FormulaReading::Corrected).ok());
        let literal = correlation(&interior, |xi| radial_wave_asym(xi, qn, &sp, 0.0, FormulaReading::Literal).ok());
        println!("{qn:?}: radial correlation corrected {corrected:.5}, literal {literal:.5}");
        assert!(corrected >= bound, "{qn:?}: {corrected}");
    }
}

#[test]
fn angular_shape_is_reported() {
    let config = PhysicalConfig::new(0.0, 1.0, 6.0).unwrap();
    let qn = QuantumNumbers::new(0, 1, 0);
    let (sol, sp) = solve(qn, &config);
    let left: Vec<(f64, f64)> = sol.v_samples.iter().copied().filter(|p| p.0 > -1.0 && p.0 < 0.0).collect();
    let c = correlation(&left, |eta| angular_wave_asym(eta, qn, &sp, 0.0).ok());
    println!("{qn:?}: angular correlation {c:.5}");
    assert!(c.is_finite() && c.abs() <= 1.0);
}

#[test]
fn angular_asymptotic_has_q_nodes() {
    let config = PhysicalConfig::new(1.0, 0.25, 40.0).unwrap();
    for q in 0..4 {
        let qn = QuantumNumbers::new(0, q, 0);
        let sp = ScaledParams::new(&config, config.floor() + 2.0 * config.omega * (q as f64 + 1.5)).unwrap();
        let values: Vec<f64> =
            (1..4000).map(|i| angular_wave_asym(-1.0 + i as f64 / 4000.0, qn, &sp, 0.0).unwrap()).collect();
        let nodes = values.windows(2).filter(|w| w[0] * w[1] < 0.0).count() as u32;
        assert_eq!(nodes, q);
    }
}

#[test]
fn angular_condition_reproduces_series() {
    for (i, h) in [20.0, 50.0, 100.0, 200.0].into_iter().enumerate() {
        let sp = ScaledParams {
            e_shifted: 0.5,
            p: 0.5 * h,
            h,
            alpha: 0.3,
            gamma: 0.01 * (i + 1) as f64,
            a: 2.0,
            gamma_prime: 1.0,
        };
        for qn in [QuantumNumbers::new(0, 0, 0), QuantumNumbers::new(0, 2, 1), QuantumNumbers::new(0, 1, 3)] {
            let cond = quantum_condition_angular(z_derivatives(0.0, &sp, 0.0).unwrap(), qn, &sp).unwrap();
            let series = lambda_eta_asym(qn, &sp, 0.0).value;
            assert!((cond - series).abs() * h.powi(4) < 1e-6 * h.powi(2), "{qn:?} h = {h}");
        }
    }
}

#[test]
fn nonzero_beta_breaks_the_chain_at_second_order() {
    // With β ≠ 0 the condition and the series differ by 4kβ/h².
    let beta = 0.7;
    let qn = QuantumNumbers::new(0, 1, 0);
    for h in [20.0, 200.0] {
        let sp = ScaledParams { e_shifted: 0.5, p: 0.5 * h, h, alpha: 0.3, gamma: 0.02, a: 2.0, gamma_prime: 1.0 };
        let cond = quantum_condition_angular(z_derivatives(0.0, &sp, beta).unwrap(), qn, &sp).unwrap();
        let series = lambda_eta_asym(qn, &sp, beta).value;
        let scaled = (series - cond) * h * h;
        assert!((scaled - 4.0 * qn.k() * beta).abs() < 0.05 * 4.0 * qn.k() * beta, "h = {h}: {scaled}");
    }
}

#[test]
fn corrected_radial_coordinate_fails_near_the_axis_with_charge() {
    let config = PhysicalConfig::new(1.0, 0.25, 20.0).unwrap();
    let (_, sp) = solve(QuantumNumbers::ground(), &config);
    assert!(radial_wave_asym(1.0 + 1e-6, QuantumNumbers::ground(), &sp, 0.0, FormulaReading::Corrected).is_err());
    assert!(radial_wave_asym(3.0, QuantumNumbers::ground(), &sp, 0.0, FormulaReading::Corrected).is_ok());
}
