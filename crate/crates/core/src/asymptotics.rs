//! Large-separation asymptotics: separation-constant series for both
//! separated equations, the etalon coordinates `z(x)` and `y(t)`, the
//! assembled asymptotic wavefunctions and the multipole energy expansion.
//!
//! The undetermined constants β (angular series) and δ (radial series) are
//! carried in [`FreeConstants`] and default to zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{PhysicalConfig, QuantumNumbers, ScaledParams};
use crate::specfun::{radial_etalon_w, whittaker_m, SeriesControl};
use crate::FormulaReading;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FreeConstants {
    pub beta: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticEval {
    pub value: f64,
    /// Highest included power of 1/h.
    pub order_included: u32,
    /// First omitted power of 1/h.
    pub remainder_order: u32,
    pub free_constants: FreeConstants,
}

/// `E' = E0 + E1/R + E2/R² + …`, with E1 and E2 in their literal form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyExpansion {
    pub e0: f64,
    pub e1: f64,
    pub e2: f64,
    /// Whether `energy_asym` adds the ω²R²/2 floor.
    pub omega_term_included: bool,
}

/// Angular series `4k√γ + (2kβ − 4τ)/h²`.
pub fn lambda_eta_asym(qn: QuantumNumbers, sp: &ScaledParams, beta: f64) -> AsymptoticEval {
    let (k, tau, h) = (qn.k(), qn.tau(), sp.h);
    AsymptoticEval {
        value: 4.0 * k * sp.sqrt_gamma() + (2.0 * k * beta - 4.0 * tau) / (h * h),
        order_included: 2,
        remainder_order: 4,
        free_constants: FreeConstants { beta, delta: 0.0 },
    }
}

/// Radial series `−2s√γ − α/h + (4τ − sδ)/h² − sαγ^{−1/4}/(2h³)`.
pub fn lambda_xi_asym(qn: QuantumNumbers, sp: &ScaledParams, delta: f64) -> AsymptoticEval {
    let (s, tau, h, alpha) = (qn.s(), qn.tau(), sp.h, sp.alpha);
    let value = -2.0 * s * sp.sqrt_gamma() - alpha / h + (4.0 * tau - s * delta) / (h * h)
        - s * alpha * sp.gamma.powf(-0.25) / (2.0 * h * h * h);
    AsymptoticEval { value, order_included: 3, remainder_order: 4, free_constants: FreeConstants { beta: 0.0, delta } }
}

/// Angular quantum condition `λ = 2k z′(0) + (2τ/h²)(z″(0)/z′(0) − 1)`.
pub fn quantum_condition_angular(z_derivs: (f64, f64), qn: QuantumNumbers, sp: &ScaledParams) -> Result<f64> {
    let (z1, z2) = z_derivs;
    if z1 == 0.0 {
        return Err(Error::DegenerateTransition);
    }
    Ok(2.0 * qn.k() * z1 + 2.0 * qn.tau() / (sp.h * sp.h) * (z2 / z1 - 1.0))
}

/// Radial quantization condition `λ = −2sφ′(0) + α/h − (φ″/φ′ + 1)/h²`.
pub fn quantization_condition_radial(phi_derivs: (f64, f64), qn: QuantumNumbers, sp: &ScaledParams) -> Result<f64> {
    let (p1, p2) = phi_derivs;
    if p1 == 0.0 {
        return Err(Error::DegenerateTransition);
    }
    Ok(-2.0 * qn.s() * p1 + sp.alpha / sp.h - (p2 / p1 + 1.0) / (sp.h * sp.h))
}

fn check_x(x: f64) -> Result<()> {
    if x >= 1.0 {
        Err(Error::LogBranch(x))
    } else if !(x >= 0.0) {
        Err(Error::DomainEdge(x))
    } else {
        Ok(())
    }
}

/// Angular etalon coordinate `z = √γ x(2−x) + (β/h²) ln(1−x)`, `x = 1 + η`.
pub fn z_of_x(x: f64, sp: &ScaledParams, beta: f64) -> Result<f64> {
    check_x(x)?;
    Ok(sp.sqrt_gamma() * x * (2.0 - x) + beta / (sp.h * sp.h) * (-x).ln_1p())
}

/// `(z′(x), z″(x))` of [`z_of_x`].
pub fn z_derivatives(x: f64, sp: &ScaledParams, beta: f64) -> Result<(f64, f64)> {
    check_x(x)?;
    let g = sp.sqrt_gamma();
    let b = beta / (sp.h * sp.h);
    let w = 1.0 - x;
    Ok((2.0 * g * w - b / w, -2.0 * g - b / (w * w)))
}

/// Radial etalon coordinate `y(t)`, `t = ξ − 1`, with its derivative.
///
/// The literal reading keeps the leading factor 2 and the `ln 2` factor of
/// the last term. The corrected reading uses the leading coefficient
/// `γ^{1/4}` that balances the quartic term and `ln(2(t+1)/t)`.
pub fn y_of_t_with_derivative(t: f64, sp: &ScaledParams, delta: f64, reading: FormulaReading) -> Result<(f64, f64)> {
    if !(t > 0.0) {
        return Err(Error::DomainEdge(t));
    }
    let h = sp.h;
    let g = sp.gamma.powf(0.25);
    let w = t * (t + 2.0);
    let sw = w.sqrt();
    let dsw = (t + 1.0) / sw;
    let lead = match reading {
        FormulaReading::Literal => 2.0,
        FormulaReading::Corrected => 1.0,
    };
    let (log_term, dlog_term) = match reading {
        FormulaReading::Literal => (std::f64::consts::LN_2, 0.0),
        FormulaReading::Corrected => ((2.0 * (t + 1.0) / t).ln(), 1.0 / (t + 1.0) - 1.0 / t),
    };
    let c2 = delta / (h * h * g);
    let c3 = sp.alpha / (h * h * h * g * g * g);
    let lt = t.ln_1p();
    let y = lead * g * sw + c2 * lt / sw + c3 * log_term / sw;
    let dy = lead * g * dsw + c2 * (1.0 / ((t + 1.0) * sw) - lt * dsw / w) + c3 * (dlog_term / sw - log_term * dsw / w);
    Ok((y, dy))
}

pub fn y_of_t(t: f64, sp: &ScaledParams, delta: f64, reading: FormulaReading) -> Result<f64> {
    Ok(y_of_t_with_derivative(t, sp, delta, reading)?.0)
}

/// Asymptotic angular function `[z′]^{−1/2} M_{k,m/2}(h² z)` at `η ∈ [−1, 0)`.
pub fn angular_wave_asym(eta: f64, qn: QuantumNumbers, sp: &ScaledParams, beta: f64) -> Result<f64> {
    let x = 1.0 + eta;
    let z = z_of_x(x, sp, beta)?;
    let (dz, _) = z_derivatives(x, sp, beta)?;
    if !(dz > 0.0) {
        return Err(Error::DomainEdge(eta));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    let ctl = SeriesControl::default();
    Ok(whittaker_m(qn.k(), 0.5 * qn.m as f64, sp.h * sp.h * z, &ctl)? / dz.sqrt())
}

/// Asymptotic radial function at `ξ > 1`. The literal reading uses the
/// `[y]^{−1/2}` prefactor and Kummer argument `h⁴y²`; the corrected one uses
/// `[y′]^{−1/2}` and `h²y²`.
pub fn radial_wave_asym(
    xi: f64,
    qn: QuantumNumbers,
    sp: &ScaledParams,
    delta: f64,
    reading: FormulaReading,
) -> Result<f64> {
    let (y, dy) = y_of_t_with_derivative(xi - 1.0, sp, delta, reading)?;
    let h2 = sp.h * sp.h;
    let (pref, arg) = match reading {
        FormulaReading::Literal => (y, h2 * h2 * y * y),
        FormulaReading::Corrected => (dy, h2 * y * y),
    };
    if !(pref > 0.0) {
        return Err(Error::DomainEdge(xi));
    }
    let ctl = SeriesControl::default();
    Ok(radial_etalon_w(qn, arg, reading, &ctl)? / pref.sqrt())
}

/// `E0 = 2ω(N + 3/2)`.
pub fn energy_e0(qn: QuantumNumbers, omega: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::InvalidConfig(format!("omega must be positive, got {omega}")));
    }
    Ok(2.0 * omega * (qn.principal() as f64 + 1.5))
}

/// Multipole coefficients E1 and E2 in their literal form.
pub fn energy_coefficients(qn: QuantumNumbers, config: &PhysicalConfig, e0: f64) -> Result<EnergyExpansion> {
    let z = config.z;
    if z == 0.0 {
        return Err(Error::ZeroCharge);
    }
    let (k, s, tau, w) = (qn.k(), qn.s(), qn.tau(), config.omega);
    let two_e0 = 2.0 * e0;
    let e1 = ((s * w - 2.0 * k / w) * two_e0.powf(2.5) + (4.0 * s * s - 16.0 * k * k - 16.0 * tau) * two_e0.powf(1.5))
        / (6.0 * z);
    let e2 =
        2.5 * e1 * e1 + 2.0 * s * e0 / w + e1 * two_e0.sqrt() * (16.0 * tau * tau + 16.0 * k * k - 4.0 * s * s) / z;
    Ok(EnergyExpansion { e0, e1, e2, omega_term_included: true })
}

/// Partial sum `ω²R²/2 + E0 + E1/R + E2/R²` up to `order`.
pub fn energy_asym(qn: QuantumNumbers, config: &PhysicalConfig, order: u32) -> Result<f64> {
    if order > 2 {
        return Err(Error::InvalidConfig(format!("asymptotic order must be 0, 1 or 2, got {order}")));
    }
    let e0 = energy_e0(qn, config.omega)?;
    let mut e = config.floor() + e0;
    if order >= 1 {
        let ex = energy_coefficients(qn, config, e0)?;
        e += ex.e1 / config.r;
        if order >= 2 {
            e += ex.e2 / (config.r * config.r);
        }
    }
    Ok(e)
}
