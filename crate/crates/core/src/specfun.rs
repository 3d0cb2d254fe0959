//! Confluent hypergeometric functions used by the etalon solutions.
//!
//! Everything here is a direct Taylor or Frobenius series with log-scaled
//! accumulation; no large-x asymptotic expansions are provided. A series in
//! `x` peaks near its `x`-th term, so arguments beyond a few thousand
//! exhaust the default term budget and report `NoConvergence`.
//!
//! References: DLMF 13.2 (Kummer M), DLMF 13.14 (Whittaker M).

use crate::error::{Error, Result};
use crate::params::QuantumNumbers;
use crate::FormulaReading;

/// Termination and rescaling controls for the series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    pub max_terms: usize,
    pub rel_tol: f64,
    /// Partial sums whose magnitude exceeds this are rescaled and the factor
    /// is carried in log form.
    pub overflow_guard: f64,
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self { max_terms: 5000, rel_tol: 1e-14, overflow_guard: 1e200 }
    }
}

impl SeriesControl {
    fn validate(&self) -> Result<()> {
        if self.max_terms < 1 || !(self.rel_tol > 0.0) || !(self.overflow_guard > 1.0) {
            return Err(Error::InvalidConfig(format!("invalid series control {self:?}")));
        }
        Ok(())
    }
}

/// A value represented as `mantissa * exp(ln_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    pub mantissa: f64,
    pub ln_scale: f64,
}

impl Scaled {
    pub fn value(&self) -> f64 {
        if self.mantissa == 0.0 {
            return 0.0;
        }
        self.mantissa.signum() * (self.mantissa.abs().ln() + self.ln_scale).exp()
    }

    pub fn ln_abs(&self) -> f64 {
        self.mantissa.abs().ln() + self.ln_scale
    }

    pub fn signum(&self) -> f64 {
        if self.mantissa == 0.0 {
            0.0
        } else {
            self.mantissa.signum()
        }
    }
}

fn is_non_positive_integer(v: f64) -> bool {
    v <= 0.0 && v == v.floor()
}

/// Kummer's function M(a, b, x) = Σ (a)_k x^k / ((b)_k k!).
pub fn kummer_m(a: f64, b: f64, x: f64, ctl: &SeriesControl) -> Result<f64> {
    kummer_m_scaled(a, b, x, ctl).map(|s| s.value())
}

/// Same as [`kummer_m`] but returns the log-scaled representation, which
/// does not overflow for large positive `x`.
pub fn kummer_m_scaled(a: f64, b: f64, x: f64, ctl: &SeriesControl) -> Result<Scaled> {
    ctl.validate()?;
    if is_non_positive_integer(b) {
        return Err(Error::PoleInB(b));
    }
    if !x.is_finite() || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidConfig(format!("non-finite Kummer arguments ({a}, {b}, {x})")));
    }
    if x == 0.0 {
        return Ok(Scaled { mantissa: 1.0, ln_scale: 0.0 });
    }
    // Kummer's transformation keeps the summed series free of alternating
    // cancellation for negative arguments.
    if x < 0.0 && !is_non_positive_integer(a) {
        let inner = kummer_series(b - a, b, -x, ctl)?;
        return Ok(Scaled { mantissa: inner.mantissa, ln_scale: inner.ln_scale + x });
    }
    kummer_series(a, b, x, ctl)
}

fn kummer_series(a: f64, b: f64, x: f64, ctl: &SeriesControl) -> Result<Scaled> {
    let mut sum = 1.0_f64;
    let mut term = 1.0_f64;
    let mut ln_scale = 0.0_f64;
    let ln_guard = ctl.overflow_guard.ln();
    let budget = ctl.max_terms;

    for k in 0..budget {
        let kf = k as f64;
        if a + kf == 0.0 {
            return Ok(Scaled { mantissa: sum, ln_scale });
        }
        let ratio = (a + kf) * x / ((b + kf) * (kf + 1.0));
        term *= ratio;
        sum += term;

        if sum.abs() > ctl.overflow_guard || term.abs() > ctl.overflow_guard {
            sum /= ctl.overflow_guard;
            term /= ctl.overflow_guard;
            ln_scale += ln_guard;
        }

        // Only stop once terms are decreasing geometrically, so the tail is
        // bounded by the current term.
        let next_ratio = ((a + kf + 1.0) * x / ((b + kf + 1.0) * (kf + 2.0))).abs();
        if next_ratio < 0.5 && term.abs() <= 0.5 * ctl.rel_tol * sum.abs() {
            return Ok(Scaled { mantissa: sum, ln_scale });
        }
    }
    Err(Error::NoConvergence { terms: budget })
}

/// Whittaker's function M_{κ,μ}(x) = e^{-x/2} x^{μ+1/2} M(μ−κ+1/2, 2μ+1, x).
pub fn whittaker_m(kappa: f64, mu: f64, x: f64, ctl: &SeriesControl) -> Result<f64> {
    let b = 2.0 * mu + 1.0;
    if is_non_positive_integer(b) {
        return Err(Error::PoleInB(b));
    }
    if !(x >= 0.0) {
        return Err(Error::InvalidConfig(format!("Whittaker argument must be non-negative, got {x}")));
    }
    let power = mu + 0.5;
    if x == 0.0 {
        return if power > 0.0 { Ok(0.0) } else { Err(Error::DomainEdge(0.0)) };
    }
    let m = kummer_m_scaled(mu - kappa + 0.5, b, x, ctl)?;
    if m.mantissa == 0.0 {
        return Ok(0.0);
    }
    let ln_abs = -0.5 * x + power * x.ln() + m.ln_abs();
    Ok(m.signum() * ln_abs.exp())
}

/// M_{κ,μ}(x) from the Frobenius series of the Whittaker equation about
/// x = 0, `j(j+2μ) c_j = c_{j-2}/4 − κ c_{j-1}`. Independent of the Kummer
/// route; loses accuracy through cancellation once x is large.
pub fn whittaker_m_series(kappa: f64, mu: f64, x: f64, ctl: &SeriesControl) -> Result<f64> {
    let b = 2.0 * mu + 1.0;
    if is_non_positive_integer(b) {
        return Err(Error::PoleInB(b));
    }
    if !(x >= 0.0) {
        return Err(Error::InvalidConfig(format!("Whittaker argument must be non-negative, got {x}")));
    }
    if x == 0.0 {
        return if mu + 0.5 > 0.0 { Ok(0.0) } else { Err(Error::DomainEdge(0.0)) };
    }
    let (mut c_prev2, mut c_prev) = (0.0_f64, 1.0_f64);
    let mut xp = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut small_run = 0;
    for j in 1..ctl.max_terms {
        let jf = j as f64;
        let c = (0.25 * c_prev2 - kappa * c_prev) / (jf * (jf + 2.0 * mu));
        xp *= x;
        let term = c * xp;
        sum += term;
        c_prev2 = c_prev;
        c_prev = c;
        // Coefficients can vanish sporadically; require two small terms in a row.
        if jf > x && term.abs() <= ctl.rel_tol * sum.abs() {
            small_run += 1;
            if small_run >= 2 {
                return Ok(sum * x.powf(mu + 0.5));
            }
        } else {
            small_run = 0;
        }
    }
    Err(Error::NoConvergence { terms: ctl.max_terms })
}

/// Radial etalon solution `X^{c/2} e^{-X/2} M(a, c + 1/2, X)` with
/// `c = (1 + √(m²+3))/2` and `s = 4n + √(m²+3) + 2`.
///
/// The argument `X` is the squared etalon coordinate (h⁴y² in the literal
/// reading, h²y² in the corrected one). The Kummer parameter is
/// `a = (s − 2c − 1)/4 = n` for [`FormulaReading::Literal`] and
/// `a = (2c + 1 − s)/4 = −n` for [`FormulaReading::Corrected`]. Only the
/// corrected form is a decaying polynomial solution; with `u = √X` it solves
/// `W'' + [s − u² − c(c−1)/u²] W = 0`.
pub fn radial_etalon_w(qn: QuantumNumbers, arg: f64, reading: FormulaReading, ctl: &SeriesControl) -> Result<f64> {
    if !(arg >= 0.0) {
        return Err(Error::InvalidConfig(format!("etalon argument must be non-negative, got {arg}")));
    }
    let c = qn.etalon_c();
    let s = qn.s();
    let a = match reading {
        FormulaReading::Literal => (s - 2.0 * c - 1.0) / 4.0,
        FormulaReading::Corrected => (2.0 * c + 1.0 - s) / 4.0,
    };
    // Guard against rounding away from an exact integer.
    let a = if (a - a.round()).abs() < 1e-12 { a.round() } else { a };
    if arg == 0.0 {
        return Ok(0.0);
    }
    let m = kummer_m_scaled(a, c + 0.5, arg, ctl)?;
    if m.mantissa == 0.0 {
        return Ok(0.0);
    }
    let ln_abs = 0.5 * c * arg.ln() - 0.5 * arg + m.ln_abs();
    Ok(m.signum() * ln_abs.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctl() -> SeriesControl {
        SeriesControl::default()
    }

    #[test]
    fn kummer_identities() {
        assert!((kummer_m(1.0, 1.0, 1.0, &ctl()).unwrap() - std::f64::consts::E).abs() < 1e-15);
        assert_eq!(kummer_m(0.3, 2.5, 0.0, &ctl()).unwrap(), 1.0);
        // M(1, 2, x) = (e^x - 1)/x
        let x: f64 = 2.5;
        let want = (x.exp() - 1.0) / x;
        assert!((kummer_m(1.0, 2.0, x, &ctl()).unwrap() - want).abs() < 1e-14 * want);
        // Laguerre: M(-2, 1, x) = 1 - 2x + x^2/2
        let x = 1.3;
        let want = 1.0 - 2.0 * x + 0.5 * x * x;
        assert!((kummer_m(-2.0, 1.0, x, &ctl()).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn kummer_negative_argument() {
        let x: f64 = -12.0;
        let got = kummer_m(0.7, 0.7, x, &ctl()).unwrap();
        assert!((got - x.exp()).abs() < 1e-13 * x.exp());
    }

    #[test]
    fn kummer_large_argument_does_not_overflow() {
        let s = kummer_m_scaled(1.0, 1.0, 690.0, &ctl()).unwrap();
        assert!((s.ln_abs() - 690.0).abs() < 1e-11);
        let v = kummer_m(1.0, 1.0, 700.0, &ctl()).unwrap();
        assert!(v.is_finite());
        assert!((v.ln() - 700.0).abs() < 1e-11);
    }

    #[test]
    fn kummer_errors() {
        assert!(matches!(kummer_m(1.0, 0.0, 1.0, &ctl()), Err(Error::PoleInB(_))));
        assert!(matches!(kummer_m(1.0, -3.0, 1.0, &ctl()), Err(Error::PoleInB(_))));
        let tight = SeriesControl { max_terms: 3, rel_tol: 1e-300, ..ctl() };
        assert!(matches!(kummer_m(0.5, 1.5, 10.0, &tight), Err(Error::NoConvergence { .. })));
    }

    #[test]
    fn whittaker_closed_forms() {
        let got = whittaker_m(0.0, 0.5, 2.0, &ctl()).unwrap();
        assert!((got - 2.0 * 1f64.sinh()).abs() < 1e-15);
        assert!((got - 2.350_402_387_287_602_8).abs() < 1e-15);
        assert_eq!(whittaker_m(0.4, 0.2, 0.0, &ctl()).unwrap(), 0.0);
        assert!(whittaker_m(0.4, -1.0, 1.0, &ctl()).is_err());
    }

    #[test]
    fn whittaker_routes_agree() {
        for &(kappa, mu, x) in &[(1.0, 1.0, 1.5), (0.5, 0.0, 0.7), (2.5, 1.5, 3.0), (-0.8, 0.25, 4.0), (1.5, 0.5, 2.2)]
        {
            let a = whittaker_m(kappa, mu, x, &ctl()).unwrap();
            let b = whittaker_m_series(kappa, mu, x, &ctl()).unwrap();
            assert!((a - b).abs() <= 1e-10 * a.abs().max(1e-3), "{kappa} {mu} {x}: {a} vs {b}");
        }
    }

    #[test]
    fn etalon_kummer_parameter_is_node_count() {
        for n in 0..4 {
            let qn = QuantumNumbers::new(n, 0, 0);
            let c = qn.etalon_c();
            let a_lit = (qn.s() - 2.0 * c - 1.0) / 4.0;
            assert!((a_lit - n as f64).abs() < 1e-14);
        }
    }

    #[test]
    fn etalon_vanishes_at_origin() {
        let qn = QuantumNumbers::ground();
        assert_eq!(radial_etalon_w(qn, 0.0, FormulaReading::Literal, &ctl()).unwrap(), 0.0);
        let small = radial_etalon_w(qn, 1e-12, FormulaReading::Literal, &ctl()).unwrap();
        assert!(small > 0.0 && small < 1e-5);
    }
}
