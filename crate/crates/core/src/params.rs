//! Problem instance, quantum numbers, spheroidal coordinates and the
//! parameter scalings used by the separated equations.
//!
//! Units are atomic-style: ħ and the particle mass are 1. The Hamiltonian is
//! `-Δ/2 - Z/r1 - Z/r2 + ω²(r1² + r2²)` with the two centers a distance `R`
//! apart.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Charges, oscillator strength and intercenter distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConfig {
    pub z: f64,
    pub omega: f64,
    pub r: f64,
}

impl PhysicalConfig {
    pub fn new(z: f64, omega: f64, r: f64) -> Result<Self> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::InvalidConfig(format!("omega must be positive, got {omega}")));
        }
        Self::validated(z, omega, r)
    }

    /// Pure two-center Coulomb problem (ω = 0). Only meant for diagnostics:
    /// the confined solvers reject it.
    pub fn coulomb_limit(z: f64, r: f64) -> Result<Self> {
        Self::validated(z, 0.0, r)
    }

    fn validated(z: f64, omega: f64, r: f64) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::InvalidConfig(format!("R must be positive, got {r}")));
        }
        if !(z >= 0.0) || !z.is_finite() {
            return Err(Error::InvalidConfig(format!("Z must be non-negative, got {z}")));
        }
        Ok(Self { z, omega, r })
    }

    pub fn with_distance(&self, r: f64) -> Result<Self> {
        Self::validated(self.z, self.omega, r)
    }

    pub fn is_confined(&self) -> bool {
        self.omega > 0.0
    }

    /// Confinement floor ω²R²/2, the minimum of the oscillator part.
    pub fn floor(&self) -> f64 {
        0.5 * self.omega * self.omega * self.r * self.r
    }

    /// Coulomb coefficient a = 2ZR.
    pub fn coulomb_coefficient(&self) -> f64 {
        2.0 * self.z * self.r
    }

    /// Quartic coefficient γ' = ω²R⁴/4.
    pub fn gamma_prime(&self) -> f64 {
        0.25 * self.omega * self.omega * self.r.powi(4)
    }
}

/// Node counts `(n, q)` and magnetic quantum number modulus `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuantumNumbers {
    pub n: u32,
    pub q: u32,
    pub m: u32,
}

impl QuantumNumbers {
    pub fn new(n: u32, q: u32, m: u32) -> Self {
        Self { n, q, m }
    }

    pub fn ground() -> Self {
        Self::new(0, 0, 0)
    }

    /// Angular etalon index k = q + (m + 1)/2.
    pub fn k(&self) -> f64 {
        self.q as f64 + 0.5 * (self.m as f64 + 1.0)
    }

    /// Radial etalon index s = 4n + √(m² + 3) + 2.
    pub fn s(&self) -> f64 {
        4.0 * self.n as f64 + self.root_m2_plus_3() + 2.0
    }

    /// τ = (1 - m²)/4.
    pub fn tau(&self) -> f64 {
        let m = self.m as f64;
        0.25 * (1.0 - m * m)
    }

    /// Radial etalon exponent c = (1 + √(m² + 3))/2.
    pub fn etalon_c(&self) -> f64 {
        0.5 * (1.0 + self.root_m2_plus_3())
    }

    /// Principal quantum number N = 2n + q + m.
    pub fn principal(&self) -> u32 {
        2 * self.n + self.q + self.m
    }

    fn root_m2_plus_3(&self) -> f64 {
        let m = self.m as f64;
        (m * m + 3.0).sqrt()
    }
}

/// Derived parameters of the canonical equations at a trial energy.
///
/// `gamma` is the coefficient that makes `h⁴γ = γ'` hold, i.e. ω²/(16E'²);
/// [`ScaledParams::gamma_alternative`] returns the alternative ω²/(8E'²),
/// which is twice as large and does not reproduce the Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledParams {
    pub e_shifted: f64,
    pub p: f64,
    pub h: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub a: f64,
    pub gamma_prime: f64,
}

impl ScaledParams {
    pub fn new(config: &PhysicalConfig, energy: f64) -> Result<Self> {
        let floor = config.floor();
        let e_shifted = energy - floor;
        if !(e_shifted > 0.0) {
            return Err(Error::NonPositiveShiftedEnergy { energy, floor, shifted: e_shifted });
        }
        let k = (2.0 * e_shifted).sqrt();
        let p = 0.5 * config.r * k;
        let omega2 = config.omega * config.omega;
        Ok(Self {
            e_shifted,
            p,
            h: 2.0 * p,
            alpha: 2.0 * config.z / k,
            gamma: omega2 / (16.0 * e_shifted * e_shifted),
            a: config.coulomb_coefficient(),
            gamma_prime: config.gamma_prime(),
        })
    }

    pub fn gamma_alternative(&self) -> f64 {
        2.0 * self.gamma
    }

    pub fn sqrt_gamma(&self) -> f64 {
        self.gamma.sqrt()
    }
}

/// Coefficients of the separated equations written without the `h`
/// scaling, valid for any trial energy (including E' ≤ 0).
///
/// With these, `Q_ξ = p² + (aξ − Λ)/(ξ²−1) − γ'ξ² + (1−m²)/(ξ²−1)²`, where
/// `Λ = hλ` is the separation constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparatedCoefficients {
    pub p2: f64,
    pub coulomb: f64,
    pub quartic: f64,
}

impl SeparatedCoefficients {
    pub fn new(config: &PhysicalConfig, energy: f64) -> Self {
        let r = config.r;
        Self {
            p2: 0.5 * r * r * (energy - config.floor()),
            coulomb: config.coulomb_coefficient(),
            quartic: config.gamma_prime(),
        }
    }

    /// `h = 2p`, defined only when p² > 0.
    pub fn h(&self) -> Option<f64> {
        (self.p2 > 0.0).then(|| 2.0 * self.p2.sqrt())
    }
}

/// Point in prolate spheroidal coordinates about two centers.
///
/// Center 1 sits at `z = -R/2`, center 2 at `z = +R/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpheroidalPoint {
    pub xi: f64,
    pub eta: f64,
    pub phi: f64,
}

impl SpheroidalPoint {
    pub fn new(xi: f64, eta: f64, phi: f64) -> Self {
        Self { xi, eta, phi }
    }

    /// x = 1 + η, the angular etalon variable.
    pub fn x(&self) -> f64 {
        1.0 + self.eta
    }

    /// t = ξ − 1, the radial etalon variable.
    pub fn t(&self) -> f64 {
        self.xi - 1.0
    }

    /// Distances `(r1, r2)` to the two centers.
    pub fn distances(&self, r: f64) -> (f64, f64) {
        (0.5 * r * (self.xi + self.eta), 0.5 * r * (self.xi - self.eta))
    }

    /// Cartesian position with the centers on the z axis.
    pub fn cartesian(&self, r: f64) -> [f64; 3] {
        let rho = 0.5 * r * ((self.xi * self.xi - 1.0).max(0.0) * (1.0 - self.eta * self.eta).max(0.0)).sqrt();
        [rho * self.phi.cos(), rho * self.phi.sin(), 0.5 * r * self.xi * self.eta]
    }
}

pub fn to_spheroidal(r1: f64, r2: f64, r: f64) -> Result<SpheroidalPoint> {
    let slack = 1e-12 * (r1 + r2 + r);
    let realizable = r1 >= 0.0 && r2 >= 0.0 && r > 0.0 && (r1 - r2).abs() <= r + slack && r <= r1 + r2 + slack;
    if !realizable {
        return Err(Error::UnrealizableGeometry { r1, r2, r });
    }
    let xi = ((r1 + r2) / r).max(1.0);
    let eta = ((r1 - r2) / r).clamp(-1.0, 1.0);
    Ok(SpheroidalPoint::new(xi, eta, 0.0))
}

/// Potential evaluated through the separable spheroidal form
/// `-(2/R²)(a(ξ) + b(η))/(ξ² − η²) + ω²R²/2` with
/// `a(ξ) = 2ZRξ − γ'ξ²(ξ²−1)` and `b(η) = γ'η²(η²−1)`.
pub fn potential_value(pt: &SpheroidalPoint, config: &PhysicalConfig) -> Result<f64> {
    let (xi, eta) = (pt.xi, pt.eta);
    let denom = xi * xi - eta * eta;
    if denom <= 0.0 {
        if config.z > 0.0 {
            return Err(Error::SingularPoint { xi, eta });
        }
        // At a center with Z = 0 only the oscillator survives.
        let (r1, r2) = pt.distances(config.r);
        return Ok(config.omega * config.omega * (r1 * r1 + r2 * r2));
    }
    let gp = config.gamma_prime();
    let a_xi = config.coulomb_coefficient() * xi - gp * xi * xi * (xi * xi - 1.0);
    let b_eta = gp * eta * eta * (eta * eta - 1.0);
    let r = config.r;
    Ok(-2.0 / (r * r) * (a_xi + b_eta) / denom + config.floor())
}

/// Direct evaluation `-Z/r1 - Z/r2 + ω²(r1² + r2²)`.
pub fn potential_cartesian(r1: f64, r2: f64, config: &PhysicalConfig) -> f64 {
    let coulomb = if config.z == 0.0 { 0.0 } else { -config.z / r1 - config.z / r2 };
    coulomb + config.omega * config.omega * (r1 * r1 + r2 * r2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn scale_parameters_examples() {
        // E' = 2 at R = 4
        let cfg = PhysicalConfig::new(1.0, 0.5, 4.0).unwrap();
        let sp = ScaledParams::new(&cfg, 2.0 + cfg.floor()).unwrap();
        assert!(rel(sp.p, 4.0) < 1e-15);
        assert!(rel(sp.h, 8.0) < 1e-15);

        let cfg = PhysicalConfig::new(1.0, 2.0, 1.0).unwrap();
        let sp = ScaledParams::new(&cfg, 1.0 + cfg.floor()).unwrap();
        assert!(rel(sp.gamma_alternative(), 0.5) < 1e-15);
        assert!(rel(sp.gamma, 0.25) < 1e-15);

        let cfg = PhysicalConfig::new(0.0, 1.0, 3.0).unwrap();
        let sp = ScaledParams::new(&cfg, 7.0).unwrap();
        assert_eq!(sp.alpha, 0.0);
    }

    #[test]
    fn scale_parameters_rejects_floor() {
        let cfg = PhysicalConfig::new(1.0, 1.0, 2.0).unwrap();
        assert!(matches!(ScaledParams::new(&cfg, 2.0), Err(Error::NonPositiveShiftedEnergy { .. })));
        assert!(matches!(ScaledParams::new(&cfg, 1.0), Err(Error::NonPositiveShiftedEnergy { .. })));
    }

    #[test]
    fn quartic_coefficient_identity() {
        for &(z, w, r, e) in &[(1.0, 0.25, 10.0, 13.0), (0.0, 1.0, 2.0, 5.0), (3.0, 0.1, 40.0, 9.0)] {
            let cfg = PhysicalConfig::new(z, w, r).unwrap();
            let sp = ScaledParams::new(&cfg, e).unwrap();
            assert!(rel(sp.h.powi(4) * sp.gamma, sp.gamma_prime) < 1e-13);
            assert!(rel(sp.h * sp.alpha, sp.a) < 1e-13);
        }
    }

    #[test]
    fn config_validation() {
        assert!(PhysicalConfig::new(1.0, 0.0, 1.0).is_err());
        assert!(PhysicalConfig::new(1.0, 1.0, 0.0).is_err());
        assert!(PhysicalConfig::new(-1.0, 1.0, 1.0).is_err());
        assert!(PhysicalConfig::coulomb_limit(1.0, 2.0).is_ok());
    }

    #[test]
    fn coordinate_examples() {
        let r = 1.7;
        let p = to_spheroidal(r, r, r).unwrap();
        assert!((p.xi - 2.0).abs() < 1e-15 && p.eta.abs() < 1e-15);
        let p = to_spheroidal(r, 0.0, r).unwrap();
        assert_eq!((p.xi, p.eta), (1.0, 1.0));
        let p = to_spheroidal(3.0, 1.0, 2.0).unwrap();
        assert_eq!((p.xi, p.eta), (2.0, 1.0));
        assert!(matches!(to_spheroidal(1.0, 1.0, 3.0), Err(Error::UnrealizableGeometry { .. })));
        assert!(matches!(to_spheroidal(5.0, 1.0, 2.0), Err(Error::UnrealizableGeometry { .. })));
    }

    #[test]
    fn potential_examples() {
        let cfg = PhysicalConfig::coulomb_limit(1.0, 1.0).unwrap();
        let v = potential_value(&SpheroidalPoint::new(2.0, 0.0, 0.0), &cfg).unwrap();
        assert!((v + 2.0).abs() < 1e-14);

        let cfg = PhysicalConfig::new(0.0, 0.7, 3.0).unwrap();
        let pt = SpheroidalPoint::new(1.4, -0.3, 0.0);
        let (r1, r2) = pt.distances(cfg.r);
        let want = 0.49 * (r1 * r1 + r2 * r2);
        assert!(rel(potential_value(&pt, &cfg).unwrap(), want) < 1e-13);

        let cfg = PhysicalConfig::new(1.0, 0.7, 3.0).unwrap();
        assert!(matches!(
            potential_value(&SpheroidalPoint::new(1.0, 1.0, 0.0), &cfg),
            Err(Error::SingularPoint { .. })
        ));
    }

    #[test]
    fn derived_quantum_numbers_exhaustive() {
        for n in 0..=10u32 {
            for q in 0..=10u32 {
                for m in 0..=10u32 {
                    let qn = QuantumNumbers::new(n, q, m);
                    let mf = m as f64;
                    assert_eq!(qn.k(), q as f64 + (mf + 1.0) / 2.0);
                    assert_eq!(qn.s(), 4.0 * n as f64 + (mf * mf + 3.0).sqrt() + 2.0);
                    assert_eq!(qn.tau(), (1.0 - mf * mf) / 4.0);
                    assert_eq!(qn.principal(), 2 * n + q + m);
                }
            }
        }
    }
}
