//! Residual-order summary of one or more run outputs.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::asymptotics::{energy_coefficients, energy_e0};
use crate::error::{Error, Result};
use crate::params::{PhysicalConfig, QuantumNumbers, ScaledParams};
use crate::run::{RunMetadata, RunOutput};

/// Convergence order of a residual series in R.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SlopeFit {
    /// Least-squares slope of `ln r` against `ln R`.
    Fitted {
        slope: f64,
        stderr: f64,
        points: usize,
    },
    /// Every residual is at the numerical floor.
    AtFloor {
        max_residual: f64,
    },
    Unavailable {
        reason: String,
    },
}

impl SlopeFit {
    fn describe(&self) -> String {
        match self {
            SlopeFit::Fitted { slope, stderr, points } => {
                format!("slope {slope:.3} ± {stderr:.3} over {points} points")
            }
            SlopeFit::AtFloor { max_residual } => format!("at tolerance floor (max residual {max_residual:.3e})"),
            SlopeFit::Unavailable { reason } => format!("unavailable: {reason}"),
        }
    }
}

/// One row of the multipole-coefficient comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyDiagnosticRow {
    pub r: f64,
    /// Numeric E − ω²R²/2.
    pub e_shift_numeric: f64,
    pub e0: f64,
    /// E0 + E1/R + E2/R² with the literal E1, E2; absent when Z = 0.
    pub e_shift_literal: Option<f64>,
    /// E0 + E1/R + E2/R² with the fitted coefficients.
    pub e_shift_fitted: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyDiagnostic {
    pub e1_literal: Option<f64>,
    pub e2_literal: Option<f64>,
    pub e1_fitted: Option<f64>,
    pub e2_fitted: Option<f64>,
    pub rows: Vec<EnergyDiagnosticRow>,
    pub note: String,
}

/// Per-R signs of the numeric separation constant and both series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignRow {
    pub r: f64,
    pub lambda_numeric: f64,
    pub lambda_eta: f64,
    pub lambda_xi: f64,
    /// Whether λ^(ξ) has the numeric sign.
    pub xi_sign_matches: bool,
    /// Whether λ^(η) has the numeric sign.
    pub eta_sign_matches: bool,
    /// The radial quantization condition evaluated on φ = y²/4 with the
    /// leading y: −4s√γ + α/h − 2/h². Differs from λ^(ξ) in the leading
    /// factor and the sign of the α term.
    pub lambda_xi_condition: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignDiagnostic {
    pub rows: Vec<SignRow>,
    pub xi_matches: usize,
    pub eta_matches: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub metadata: RunMetadata,
    pub points: usize,
    pub failed_points: usize,
    pub lambda_order: SlopeFit,
    pub energy_order: SlopeFit,
    pub energy_diagnostic: EnergyDiagnostic,
    pub sign_diagnostic: SignDiagnostic,
    /// Rows whose radial residual is limited by double-precision energy
    /// resolution.
    pub floor_limited_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub runs: Vec<RunReport>,
}

/// Slope of `ln y` against `ln x`. Needs at least three points.
pub fn fit_log_slope(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64)> =
        points.iter().filter(|p| p.0 > 0.0 && p.1 > 0.0).map(|&(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientPoints { needed: 3, got: pts.len() });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientPoints { needed: 3, got: 1 });
    }
    let slope = sxy / sxx;
    let rss: f64 = pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum();
    let stderr = (rss / (n - 2.0) / sxx).sqrt();
    Ok((slope, stderr))
}

fn order_of(points: &[(f64, f64)], floor: impl Fn(f64) -> f64) -> SlopeFit {
    if points.is_empty() {
        return SlopeFit::Unavailable { reason: "no residuals in this run".into() };
    }
    let max_residual = points.iter().map(|p| p.1).fold(0.0, f64::max);
    if points.iter().all(|&(x, y)| y <= floor(x)) {
        return SlopeFit::AtFloor { max_residual };
    }
    match fit_log_slope(points) {
        Ok((slope, stderr)) => SlopeFit::Fitted { slope, stderr, points: points.len() },
        Err(e) => SlopeFit::Unavailable { reason: e.to_string() },
    }
}

/// Least-squares `y = a/R + b/R²`.
fn fit_inverse_powers(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    if points.len() < 2 {
        return None;
    }
    let (mut s11, mut s12, mut s22, mut t1, mut t2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(r, y) in points {
        let (a, b) = (1.0 / r, 1.0 / (r * r));
        s11 += a * a;
        s12 += a * b;
        s22 += b * b;
        t1 += a * y;
        t2 += b * y;
    }
    let det = s11 * s22 - s12 * s12;
    if det.abs() <= 1e-14 * s11 * s22 {
        return None;
    }
    Some(((t1 * s22 - t2 * s12) / det, (s11 * t2 - s12 * t1) / det))
}

fn energy_diagnostic(out: &RunOutput) -> EnergyDiagnostic {
    let meta = &out.metadata;
    let qn = meta.qn();
    let e0 = energy_e0(qn, meta.omega).unwrap_or(f64::NAN);
    let literal = PhysicalConfig::new(meta.z, meta.omega, 1.0).and_then(|c| energy_coefficients(qn, &c, e0)).ok();
    let samples: Vec<(f64, f64)> = out
        .rows
        .iter()
        .filter_map(|r| r.e_numeric.map(|e| (r.r, e - 0.5 * meta.omega * meta.omega * r.r * r.r)))
        .collect();
    let fitted = fit_inverse_powers(&samples.iter().map(|&(r, es)| (r, es - e0)).collect::<Vec<_>>());
    let rows = samples
        .iter()
        .map(|&(r, es)| EnergyDiagnosticRow {
            r,
            e_shift_numeric: es,
            e0,
            e_shift_literal: literal.map(|p| e0 + p.e1 / r + p.e2 / (r * r)),
            e_shift_fitted: fitted.map(|(a, b)| e0 + a / r + b / (r * r)),
        })
        .collect();
    let note = if literal.is_none() {
        "the literal E1 and E2 divide by Z and are undefined at Z = 0".to_string()
    } else {
        "E1 and E2 evaluated in their literal form; the fit uses E' - E0 = E1/R + E2/R^2".to_string()
    };
    EnergyDiagnostic {
        e1_literal: literal.map(|p| p.e1),
        e2_literal: literal.map(|p| p.e2),
        e1_fitted: fitted.map(|f| f.0),
        e2_fitted: fitted.map(|f| f.1),
        rows,
        note,
    }
}

fn sign_diagnostic(out: &RunOutput) -> SignDiagnostic {
    let meta = &out.metadata;
    let qn: QuantumNumbers = meta.qn();
    let mut rows = Vec::new();
    for r in &out.rows {
        let (Some(num), Some(eta), Some(xi)) = (r.lambda_numeric, r.lambda_eta_asym, r.lambda_xi_asym) else {
            continue;
        };
        // The condition needs h and α at the numeric energy.
        let condition = r
            .e_numeric
            .and_then(|e| PhysicalConfig::new(meta.z, meta.omega, r.r).and_then(|c| ScaledParams::new(&c, e)).ok())
            .map(|sp| {
                let s = qn.s();
                let h = sp.h;
                -4.0 * s * sp.sqrt_gamma() + sp.alpha / h - 2.0 / (h * h)
            })
            .unwrap_or(f64::NAN);
        rows.push(SignRow {
            r: r.r,
            lambda_numeric: num,
            lambda_eta: eta,
            lambda_xi: xi,
            xi_sign_matches: num.signum() == xi.signum(),
            eta_sign_matches: num.signum() == eta.signum(),
            lambda_xi_condition: condition,
        });
    }
    SignDiagnostic {
        xi_matches: rows.iter().filter(|r| r.xi_sign_matches).count(),
        eta_matches: rows.iter().filter(|r| r.eta_sign_matches).count(),
        rows,
    }
}

pub fn report_run(out: &RunOutput) -> Result<RunReport> {
    let ok_rows: Vec<_> = out.rows.iter().filter(|r| r.ok()).collect();
    if out.rows.len() < 3 {
        return Err(Error::InsufficientPoints { needed: 3, got: out.rows.len() });
    }
    let lam: Vec<(f64, f64)> = ok_rows.iter().filter_map(|r| r.resid_lambda.map(|v| (r.r, v))).collect();
    let en: Vec<(f64, f64)> = ok_rows.iter().filter_map(|r| r.resid_e.map(|v| (r.r, v))).collect();
    let tol = out.metadata.match_tol;
    let e_at =
        |r: f64| out.rows.iter().find(|row| row.r == r).and_then(|row| row.e_numeric).unwrap_or(1.0).abs().max(1.0);
    Ok(RunReport {
        metadata: out.metadata,
        points: out.rows.len(),
        failed_points: out.rows.len() - ok_rows.len(),
        lambda_order: order_of(&lam, |_| tol),
        energy_order: order_of(&en, |r| 10.0 * tol * e_at(r)),
        energy_diagnostic: energy_diagnostic(out),
        sign_diagnostic: sign_diagnostic(out),
        floor_limited_rows: ok_rows.iter().filter(|r| r.at_floor).count(),
    })
}

pub fn report(outputs: &[RunOutput]) -> Result<Report> {
    Ok(Report { runs: outputs.iter().map(report_run).collect::<Result<_>>()? })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.10e}")).unwrap_or_else(|| "-".into())
}

/// Plain-text rendering; deterministic for a given report.
pub fn render_text(rep: &Report) -> String {
    let mut s = String::new();
    for (i, run) in rep.runs.iter().enumerate() {
        let m = &run.metadata;
        let _ = writeln!(
            s,
            "run {}: mode={:?} Z={} omega={} (n,q,m)=({},{},{}) order={} reading={}",
            i + 1,
            m.mode,
            m.z,
            m.omega,
            m.n,
            m.q,
            m.m,
            m.order,
            m.reading.as_str()
        );
        let _ = writeln!(
            s,
            "  points: {} ({} failed, {} floor-limited)",
            run.points, run.failed_points, run.floor_limited_rows
        );
        let _ = writeln!(s, "  lambda residual order: {}", run.lambda_order.describe());
        let _ = writeln!(s, "  energy residual order: {}", run.energy_order.describe());

        let ed = &run.energy_diagnostic;
        let _ = writeln!(s, "  multipole coefficients: {}", ed.note);
        let _ = writeln!(s, "    E1 literal {}  fitted {}", opt(ed.e1_literal), opt(ed.e1_fitted));
        let _ = writeln!(s, "    E2 literal {}  fitted {}", opt(ed.e2_literal), opt(ed.e2_fitted));
        let _ =
            writeln!(s, "    {:>10} {:>18} {:>18} {:>18} {:>18}", "R", "E'_numeric", "E0", "E'_literal", "E'_fitted");
        for r in &ed.rows {
            let _ = writeln!(
                s,
                "    {:>10.4} {:>18.10e} {:>18.10e} {:>18} {:>18}",
                r.r,
                r.e_shift_numeric,
                r.e0,
                opt(r.e_shift_literal),
                opt(r.e_shift_fitted)
            );
        }

        let sd = &run.sign_diagnostic;
        let _ = writeln!(
            s,
            "  lambda sign diagnostic: xi-series sign matches {}/{}, eta-series sign matches {}/{}",
            sd.xi_matches,
            sd.rows.len(),
            sd.eta_matches,
            sd.rows.len()
        );
        let _ = writeln!(
            s,
            "    {:>10} {:>18} {:>18} {:>18} {:>18}",
            "R", "lambda_num", "lambda_eta", "lambda_xi", "xi_condition"
        );
        for r in &sd.rows {
            let _ = writeln!(
                s,
                "    {:>10.4} {:>18.10e} {:>18.10e} {:>18.10e} {:>18.10e}",
                r.r, r.lambda_numeric, r.lambda_eta, r.lambda_xi, r.lambda_xi_condition
            );
        }
    }
    s
}

pub fn render_json(rep: &Report) -> String {
    serde_json::to_string_pretty(rep).expect("report serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_inverse_square() {
        let pts: Vec<(f64, f64)> = [5.0, 10.0, 20.0, 40.0].iter().map(|&r| (r, 3.0 / (r * r))).collect();
        let (slope, err) = fit_log_slope(&pts).unwrap();
        assert!((slope + 2.0).abs() < 0.1 && err < 1e-10);
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(fit_log_slope(&[(1.0, 1.0), (2.0, 0.5)]), Err(Error::InsufficientPoints { .. })));
    }

    #[test]
    fn floor_detection() {
        let pts = [(1.0, 1e-13), (2.0, 2e-13), (3.0, 0.0)];
        assert!(matches!(order_of(&pts, |_| 1e-9), SlopeFit::AtFloor { .. }));
    }

    #[test]
    fn inverse_power_fit_recovers_coefficients() {
        let pts: Vec<(f64, f64)> = [5.0, 10.0, 20.0].iter().map(|&r| (r, -1.5 / r + 4.0 / (r * r))).collect();
        let (a, b) = fit_inverse_powers(&pts).unwrap();
        assert!((a + 1.5).abs() < 1e-10 && (b - 4.0).abs() < 1e-9);
    }
}
