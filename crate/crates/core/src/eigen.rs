//! Shooting solver for the coupled two-parameter eigenproblem.
//!
//! For a trial energy `E` the angular equation is solved for the separation
//! constant `Λ(E)` such that its solution has `q` nodes on (−1, 1). The
//! radial equation is then integrated outward from ξ = 1 and inward from the
//! Gaussian tail; the energy is adjusted until the two halves match with `n`
//! nodes. Both conditions are phrased through Prüfer angles, which are
//! continuous and monotone in the respective parameter, so every root is
//! bracketed and refined with Brent's method.
//!
//! The separation constant is carried unscaled (`Λ = hλ`); the canonical
//! `λ` is reported whenever `E' > 0`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{CanonicalOde, Endpoint, OdeKind, Trajectory, TAIL_DEPTH_MIN};
use crate::params::{PhysicalConfig, QuantumNumbers, ScaledParams, SeparatedCoefficients};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    /// Integrator tolerance.
    pub rel_tol: f64,
    /// Maximum accepted matching residual.
    pub match_tol: f64,
    pub max_outer_iters: usize,
    /// Growth factor for bracket expansion.
    pub bracket_expansion: f64,
    /// The matching point is `1 + matching_shift·(ξ_t − 1)` with ξ_t the
    /// outer turning point.
    pub matching_shift: f64,
    /// WKB decay depth required between the turning point and ξ_max.
    pub tail_depth: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            match_tol: 1e-9,
            max_outer_iters: 200,
            bracket_expansion: 2.0,
            matching_shift: 1.0,
            tail_depth: 45.0,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        let positive = self.rel_tol > 0.0
            && self.match_tol > 0.0
            && self.max_outer_iters > 0
            && self.bracket_expansion > 1.0
            && self.matching_shift > 0.0
            && self.tail_depth > 0.0;
        if !positive || self.match_tol < self.rel_tol {
            return Err(Error::InvalidConfig(format!("invalid solver settings {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Residuals {
    /// |Prüfer angle − target| of the angular half-interval problem.
    pub angular: f64,
    /// Normalized Wronskian at the radial matching point.
    pub radial: f64,
    /// Smallest radial residual resolvable in double precision: the
    /// mismatch slope times one ulp of the energy.
    pub radial_floor: f64,
}

impl Residuals {
    /// Whether the radial residual is limited by energy resolution rather
    /// than by the root search.
    pub fn at_floor(&self) -> bool {
        self.radial <= 4.0 * self.radial_floor
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SolverStats {
    pub outer: usize,
    pub angular_total: usize,
    pub bracket_expansions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eigensolution {
    pub qn: QuantumNumbers,
    pub energy: f64,
    /// Unscaled separation constant Λ = hλ.
    pub separation_constant: f64,
    /// Canonical λ, defined when E' > 0.
    pub lambda: Option<f64>,
    pub nodes_radial: u32,
    pub nodes_angular: u32,
    /// `(ξ, U)` normalized to ∫U² dξ = 1.
    pub u_samples: Vec<(f64, f64)>,
    /// `(η, V)` normalized to ∫V² dη = 1.
    pub v_samples: Vec<(f64, f64)>,
    pub residuals: Residuals,
    pub iterations: SolverStats,
    pub xi_match: f64,
    pub xi_max: f64,
}

impl Eigensolution {
    pub fn shifted_energy(&self, config: &PhysicalConfig) -> f64 {
        self.energy - config.floor()
    }
}

fn require_confined(config: &PhysicalConfig) -> Result<()> {
    if config.is_confined() {
        Ok(())
    } else {
        Err(Error::InvalidConfig("the shooting solver needs omega > 0".into()))
    }
}

// ---------------------------------------------------------------------------
// Angular problem
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularSolution {
    pub separation_constant: f64,
    pub residual: f64,
    pub evaluations: usize,
}

/// Prüfer angle at η = 0 minus its target `(q+1)π/2`, integrating the
/// regular solution from η = −1. Increasing in Λ.
fn angular_condition(coeffs: &SeparatedCoefficients, sep: f64, qn: QuantumNumbers, rel_tol: f64) -> Result<f64> {
    let ode = CanonicalOde::from_separated(OdeKind::Angular, coeffs, sep, qn.m);
    let traj = angular_half(&ode, rel_tol, false)?;
    let scale = ode.q_unchecked(0.0).abs().sqrt().max(1.0);
    Ok(traj.prufer_angle(scale) - 0.5 * (qn.q as f64 + 1.0) * PI)
}

fn angular_half(ode: &CanonicalOde, rel_tol: f64, record: bool) -> Result<Trajectory> {
    let offset = ode.default_offset(Endpoint::MinusOne);
    let start = ode.frobenius_start(Endpoint::MinusOne, offset);
    ode.integrate(start, 0.0, rel_tol, record)
}

fn angular_guess(coeffs: &SeparatedCoefficients, qn: QuantumNumbers) -> f64 {
    let l = (qn.q + qn.m) as f64;
    let root = coeffs.quartic.sqrt();
    let m2 = (qn.m * qn.m) as f64;
    if root > (l + 1.0) * (l + 1.0) {
        (2.0 * qn.q as f64 + 1.0) * root - coeffs.p2 - 1.0 + m2
    } else {
        l * (l + 1.0) - 0.5 * coeffs.p2
    }
}

/// Separation constant Λ(E) of the angular state with `q` nodes.
pub fn angular_separation_constant(
    energy: f64,
    qn: QuantumNumbers,
    config: &PhysicalConfig,
    st: &SolverSettings,
    guess: Option<f64>,
) -> Result<AngularSolution> {
    require_confined(config)?;
    st.validate()?;
    let coeffs = SeparatedCoefficients::new(config, energy);
    let g = guess.unwrap_or_else(|| angular_guess(&coeffs, qn));
    let mut evals = 0usize;
    let mut f = |sep: f64| {
        evals += 1;
        angular_condition(&coeffs, sep, qn, st.rel_tol)
    };
    let width = if guess.is_some() { 1e-3 * g.abs().max(1.0) } else { 0.1 * g.abs().max(10.0) };
    let (lo, hi, flo, fhi) = expand_bracket(&mut f, g - width, g + width, st.bracket_expansion, 80)
        .map_err(|(lo, hi)| Error::BracketFailure { lo, hi })?;
    let xtol = 4.0 * f64::EPSILON * g.abs().max(1.0);
    let root = brent(&mut f, lo, hi, flo, fhi, xtol, 200)?;
    Ok(AngularSolution { separation_constant: root.x, residual: root.fx.abs(), evaluations: evals })
}

/// Canonical separation constant λ = Λ/h of the angular problem at `energy`.
pub fn angular_lambda(energy: f64, qn: QuantumNumbers, config: &PhysicalConfig, st: &SolverSettings) -> Result<f64> {
    let sp = ScaledParams::new(config, energy)?;
    let sol = angular_separation_constant(energy, qn, config, st, None)?;
    Ok(sol.separation_constant / sp.h)
}

// ---------------------------------------------------------------------------
// Radial problem
// ---------------------------------------------------------------------------

/// Matching point and truncation radius of the radial integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGeometry {
    pub xi_turn: f64,
    pub xi_match: f64,
    pub xi_max: f64,
}

impl RadialGeometry {
    pub fn locate(ode: &CanonicalOde, st: &SolverSettings) -> RadialGeometry {
        let xi_turn = outer_turning_point(ode);
        let xi_match = 1.0 + st.matching_shift * (xi_turn - 1.0);
        let depth_rule = (2.0 * TAIL_DEPTH_MIN / ode.quartic.sqrt()).sqrt() * (1.0 + 1e-12);
        let xi_max = wkb_tail_radius(ode, xi_turn.max(xi_match), st.tail_depth).max(depth_rule).min(1e4);
        RadialGeometry { xi_turn, xi_match, xi_max }
    }
}

/// Largest ξ where Q changes sign from positive to negative; falls back to
/// the maximum of Q when there is no classically allowed region.
fn outer_turning_point(ode: &CanonicalOde) -> f64 {
    let scale = ode.p2.abs() + ode.coulomb.abs() + ode.sep.abs() + 1.0;
    // beyond t_far the quartic term dominates every other contribution
    let t_far = ((scale / ode.quartic).sqrt() + 1.0).max(1.0) * 4.0;
    let samples = 600;
    let (lt0, lt1) = (1e-9_f64.ln(), t_far.ln());
    let t_at = |i: usize| (lt0 + (lt1 - lt0) * i as f64 / samples as f64).exp();
    let mut last_positive = None;
    let mut best = (f64::NEG_INFINITY, 1.0 + t_at(0));
    for i in 0..=samples {
        let xi = 1.0 + t_at(i);
        let q = ode.q_unchecked(xi);
        if q > best.0 {
            best = (q, xi);
        }
        if q > 0.0 {
            last_positive = Some(i);
        }
    }
    match last_positive {
        Some(i) if i < samples => {
            let (mut a, mut b) = (1.0 + t_at(i), 1.0 + t_at(i + 1));
            for _ in 0..100 {
                let mid = 0.5 * (a + b);
                if ode.q_unchecked(mid) > 0.0 {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            0.5 * (a + b)
        }
        Some(_) => 1.0 + t_far,
        None => best.1,
    }
}

/// Radius beyond `from` where ∫√(−Q) dξ reaches `depth`.
fn wkb_tail_radius(ode: &CanonicalOde, from: f64, depth: f64) -> f64 {
    let mut xi = from;
    let mut acc = 0.0;
    let mut step = 1e-3 * (from - 1.0).max(1e-6);
    let kappa = |x: f64| (-ode.q_unchecked(x)).max(0.0).sqrt();
    let mut k_prev = kappa(xi);
    while acc < depth && xi < 1e4 {
        let next = xi + step;
        let k_next = kappa(next);
        acc += 0.5 * (k_prev + k_next) * step;
        xi = next;
        k_prev = k_next;
        // aim for ~0.05 of decay per step
        let target = 0.05 / k_next.max(1e-12);
        step = target.clamp(step * 0.5, step * 2.0).min(0.5 * xi);
    }
    xi
}

/// Radial mismatch at a trial `(E, Λ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialMismatch {
    /// Prüfer-angle difference minus nπ. Zero at an eigenpair, negative
    /// below it and positive above it.
    pub angle: f64,
    /// Normalized Wronskian `sin(θ_L − θ_R)`.
    pub wronskian: f64,
    /// Nodes of the outward plus inward solutions.
    pub nodes: u32,
}

struct RadialHalves {
    left: Trajectory,
    right: Trajectory,
    scale: f64,
}

fn radial_halves(ode: &CanonicalOde, geom: &RadialGeometry, rel_tol: f64, record: bool) -> Result<RadialHalves> {
    let offset = ode.default_offset(Endpoint::RadialOne).min(0.1 * (geom.xi_match - 1.0));
    let start = ode.frobenius_start(Endpoint::RadialOne, offset);
    let left = ode.integrate(start, geom.xi_match, rel_tol, record)?;
    let tail = ode.tail_start(geom.xi_max)?;
    let right = ode.integrate(tail, geom.xi_match, rel_tol, record)?;
    let scale = ode.q_unchecked(geom.xi_match).abs().sqrt().max(1.0);
    Ok(RadialHalves { left, right, scale })
}

fn radial_condition(ode: &CanonicalOde, geom: &RadialGeometry, n: u32, rel_tol: f64) -> Result<RadialMismatch> {
    let halves = radial_halves(ode, geom, rel_tol, false)?;
    let diff = halves.left.prufer_angle(halves.scale) - halves.right.prufer_angle(halves.scale);
    Ok(RadialMismatch {
        angle: diff - n as f64 * PI,
        wronskian: diff.sin(),
        nodes: halves.left.nodes + halves.right.nodes,
    })
}

/// Radial mismatch for canonical `λ` at `energy` (requires E' > 0).
pub fn radial_mismatch(
    energy: f64,
    lambda: f64,
    qn: QuantumNumbers,
    config: &PhysicalConfig,
    st: &SolverSettings,
) -> Result<RadialMismatch> {
    let sp = ScaledParams::new(config, energy)?;
    radial_mismatch_separated(energy, sp.h * lambda, qn, config, st)
}

/// Radial mismatch for the unscaled separation constant Λ.
pub fn radial_mismatch_separated(
    energy: f64,
    sep: f64,
    qn: QuantumNumbers,
    config: &PhysicalConfig,
    st: &SolverSettings,
) -> Result<RadialMismatch> {
    require_confined(config)?;
    st.validate()?;
    let coeffs = SeparatedCoefficients::new(config, energy);
    let ode = CanonicalOde::from_separated(OdeKind::Radial, &coeffs, sep, qn.m);
    let geom = RadialGeometry::locate(&ode, st);
    radial_condition(&ode, &geom, qn.n, st.rel_tol)
}

// ---------------------------------------------------------------------------
// Coupled solve
// ---------------------------------------------------------------------------

/// Asymptotic energy seed `2ω(N + 3/2) + ω²R²/2`.
pub fn energy_seed(qn: QuantumNumbers, config: &PhysicalConfig) -> f64 {
    2.0 * config.omega * (qn.principal() as f64 + 1.5) + config.floor()
}

struct Outer<'a> {
    qn: QuantumNumbers,
    config: &'a PhysicalConfig,
    st: &'a SolverSettings,
    last_sep: Option<f64>,
    angular_evals: usize,
    geometry: Option<RadialGeometry>,
}

impl Outer<'_> {
    fn angular(&mut self, energy: f64) -> Result<AngularSolution> {
        let sol = angular_separation_constant(energy, self.qn, self.config, self.st, self.last_sep)
            .or_else(|_| angular_separation_constant(energy, self.qn, self.config, self.st, None))?;
        self.angular_evals += sol.evaluations;
        self.last_sep = Some(sol.separation_constant);
        Ok(sol)
    }

    fn radial_ode(&self, energy: f64, sep: f64) -> CanonicalOde {
        let coeffs = SeparatedCoefficients::new(self.config, energy);
        CanonicalOde::from_separated(OdeKind::Radial, &coeffs, sep, self.qn.m)
    }

    /// G(E): radial Prüfer mismatch along Λ(E). Uses the frozen geometry
    /// when one is set.
    fn mismatch(&mut self, energy: f64) -> Result<f64> {
        let sep = self.angular(energy)?.separation_constant;
        let ode = self.radial_ode(energy, sep);
        let geom = match self.geometry {
            Some(g) => g,
            None => RadialGeometry::locate(&ode, self.st),
        };
        Ok(radial_condition(&ode, &geom, self.qn.n, self.st.rel_tol)?.angle)
    }
}

/// Solve for the state `qn` with an energy inside `bracket`.
pub fn solve_state(
    qn: QuantumNumbers,
    config: &PhysicalConfig,
    st: &SolverSettings,
    bracket: (f64, f64),
) -> Result<Eigensolution> {
    require_confined(config)?;
    st.validate()?;
    let (lo, hi) = if bracket.0 <= bracket.1 { bracket } else { (bracket.1, bracket.0) };
    let mut outer = Outer { qn, config, st, last_sep: None, angular_evals: 0, geometry: None };
    let glo = outer.mismatch(lo)?;
    let ghi = outer.mismatch(hi)?;
    if glo.signum() == ghi.signum() && glo != 0.0 && ghi != 0.0 {
        return Err(Error::NoRootInBracket { lo, hi });
    }
    finish(outer, lo, hi, glo, ghi, 0)
}

/// Solve for `qn` starting from the asymptotic seed and expanding the
/// bracket as needed.
pub fn solve_state_seeded(
    qn: QuantumNumbers,
    config: &PhysicalConfig,
    st: &SolverSettings,
    seed: Option<f64>,
    half_width: Option<f64>,
) -> Result<Eigensolution> {
    require_confined(config)?;
    st.validate()?;
    let seed = seed.unwrap_or_else(|| energy_seed(qn, config));
    let w = half_width.unwrap_or(2.0 * config.omega);
    let mut outer = Outer { qn, config, st, last_sep: None, angular_evals: 0, geometry: None };
    let mut expansions = 0usize;
    let (lo, hi, glo, ghi) = {
        let mut g = |e: f64| {
            expansions += 1;
            outer.mismatch(e)
        };
        let res = expand_bracket(&mut g, seed - w, seed + w, st.bracket_expansion, 60);
        match res {
            Ok(b) => b,
            Err((lo, hi)) => return Err(Error::NoRootInBracket { lo, hi }),
        }
    };
    finish(outer, lo, hi, glo, ghi, expansions)
}

fn finish(mut outer: Outer<'_>, lo: f64, hi: f64, glo: f64, ghi: f64, expansions: usize) -> Result<Eigensolution> {
    let (qn, config, st) = (outer.qn, outer.config, outer.st);

    // Freeze the matching geometry at the bracket midpoint.
    let mid = 0.5 * (lo + hi);
    let sep_mid = outer.angular(mid)?.separation_constant;
    outer.geometry = Some(RadialGeometry::locate(&outer.radial_ode(mid, sep_mid), st));
    let (glo, ghi) = (outer.mismatch(lo).unwrap_or(glo), outer.mismatch(hi).unwrap_or(ghi));
    if glo.signum() == ghi.signum() && glo != 0.0 && ghi != 0.0 {
        return Err(Error::NoRootInBracket { lo, hi });
    }

    let xtol = 4.0 * f64::EPSILON * mid.abs().max(1.0);
    let mut outer_evals = 0usize;
    let root = {
        let mut g = |e: f64| {
            outer_evals += 1;
            outer.mismatch(e)
        };
        brent(&mut g, lo, hi, glo, ghi, xtol, st.max_outer_iters)?
    };
    let energy = root.x;
    let ang = outer.angular(energy)?;
    let geom = outer.geometry.expect("geometry frozen");
    let ode = outer.radial_ode(energy, ang.separation_constant);
    let halves = radial_halves(&ode, &geom, st.rel_tol, true)?;
    let diff = halves.left.prufer_angle(halves.scale) - halves.right.prufer_angle(halves.scale);
    let radial_floor = root.slope * energy.abs().max(f64::MIN_POSITIVE) * f64::EPSILON;
    let residuals = Residuals { angular: ang.residual, radial: diff.sin().abs(), radial_floor };
    if residuals.angular > st.match_tol || (residuals.radial > st.match_tol && !residuals.at_floor()) {
        return Err(Error::IterationStall {
            iterations: outer_evals,
            residual: residuals.angular.max(residuals.radial),
        });
    }

    let u_samples = assemble_radial(&halves);
    let ang_ode = CanonicalOde::from_separated(
        OdeKind::Angular,
        &SeparatedCoefficients::new(config, energy),
        ang.separation_constant,
        qn.m,
    );
    let v_samples = assemble_angular(&angular_half(&ang_ode, st.rel_tol, true)?, qn.q);
    let nodes_radial = count_sign_changes(&u_samples);
    let nodes_angular = count_sign_changes(&v_samples);
    if nodes_radial != qn.n || nodes_angular != qn.q {
        return Err(Error::NodeCountMismatch { want_n: qn.n, want_q: qn.q, got_n: nodes_radial, got_q: nodes_angular });
    }

    let lambda = ScaledParams::new(config, energy).ok().map(|sp| ang.separation_constant / sp.h);
    Ok(Eigensolution {
        qn,
        energy,
        separation_constant: ang.separation_constant,
        lambda,
        nodes_radial,
        nodes_angular,
        u_samples,
        v_samples,
        residuals,
        iterations: SolverStats {
            outer: outer_evals,
            angular_total: outer.angular_evals,
            bracket_expansions: expansions,
        },
        xi_match: geom.xi_match,
        xi_max: geom.xi_max,
    })
}

/// Join the outward and inward radial solutions into normalized samples.
fn assemble_radial(halves: &RadialHalves) -> Vec<(f64, f64)> {
    let (l, r) = (&halves.left, &halves.right);
    let le = l.end();
    let re = r.end();
    // Scale factor (in logs) that makes the inward branch continuous with
    // the outward one at the matching point.
    let (num, den) = if le.u.abs() * halves.scale >= le.du.abs() { (le.u, re.u) } else { (le.du, re.du) };
    let ratio_sign = (num / den).signum();
    let ln_ratio = num.abs().ln() + le.log_scale - den.abs().ln() - re.log_scale;

    let mut pts: Vec<(f64, f64, f64)> = Vec::with_capacity(l.abscissae.len() + r.abscissae.len() + 1);
    pts.push((1.0, 0.0, f64::NEG_INFINITY));
    for i in 0..l.abscissae.len() {
        let (u, _) = l.values[i];
        pts.push((l.abscissae[i], u.signum(), u.abs().ln() + l.log_scale[i]));
    }
    for i in (0..r.abscissae.len().saturating_sub(1)).rev() {
        let (u, _) = r.values[i];
        pts.push((r.abscissae[i], u.signum() * ratio_sign, u.abs().ln() + r.log_scale[i] + ln_ratio));
    }
    normalize(pts)
}

fn assemble_angular(half: &Trajectory, q: u32) -> Vec<(f64, f64)> {
    let parity = if q.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut pts: Vec<(f64, f64, f64)> = Vec::with_capacity(2 * half.abscissae.len() + 2);
    pts.push((-1.0, 0.0, f64::NEG_INFINITY));
    for i in 0..half.abscissae.len() {
        let (u, _) = half.values[i];
        pts.push((half.abscissae[i], u.signum(), u.abs().ln() + half.log_scale[i]));
    }
    let mirrored: Vec<_> = pts.iter().rev().filter(|p| p.0 < 0.0).map(|&(x, s, l)| (-x, s * parity, l)).collect();
    pts.extend(mirrored);
    normalize(pts)
}

/// Turn `(x, sign, ln|u|)` triples into samples with ∫u² dx = 1.
fn normalize(pts: Vec<(f64, f64, f64)>) -> Vec<(f64, f64)> {
    let peak = pts.iter().map(|p| p.2).fold(f64::NEG_INFINITY, f64::max);
    let mut samples: Vec<(f64, f64)> = pts.iter().map(|&(x, s, l)| (x, s * (l - peak).exp())).collect();
    let norm2 = trapezoid_sq(&samples);
    let inv = 1.0 / norm2.sqrt();
    for s in samples.iter_mut() {
        s.1 *= inv;
    }
    samples
}

pub(crate) fn trapezoid_sq(samples: &[(f64, f64)]) -> f64 {
    samples.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 * w[0].1 + w[1].1 * w[1].1)).sum()
}

fn count_sign_changes(samples: &[(f64, f64)]) -> u32 {
    let mut count = 0;
    let mut prev = 0.0_f64;
    for &(_, v) in samples {
        if v != 0.0 {
            if prev != 0.0 && v.signum() != prev.signum() {
                count += 1;
            }
            prev = v;
        }
    }
    count
}

// ---------------------------------------------------------------------------
// Energy curves
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub r: f64,
    pub result: Result<Eigensolution>,
}

/// Born–Oppenheimer curve E(R) by continuation in R. A failed point is
/// recorded and the next one is reseeded from the asymptotic estimate.
pub fn energy_curve(
    qn: QuantumNumbers,
    template: &PhysicalConfig,
    r_grid: &[f64],
    st: &SolverSettings,
) -> Result<Vec<CurvePoint>> {
    if r_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidConfig("R grid must be sorted ascending".into()));
    }
    let mut out = Vec::with_capacity(r_grid.len());
    let mut previous: Option<(f64, f64)> = None; // (R, E')
    for &r in r_grid {
        let config = template.with_distance(r)?;
        let result = match previous {
            Some((_, e_shift)) => {
                let seed = e_shift + config.floor();
                solve_state_seeded(qn, &config, st, Some(seed), Some(0.25 * config.omega))
                    .or_else(|_| solve_state_seeded(qn, &config, st, None, None))
            }
            None => solve_state_seeded(qn, &config, st, None, None),
        };
        previous = result.as_ref().ok().map(|s| (r, s.shifted_energy(&config)));
        out.push(CurvePoint { r, result });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Root finding
// ---------------------------------------------------------------------------

type Bracket = (f64, f64, f64, f64);

/// Grow `[lo, hi]` until `f` changes sign, assuming `f` is increasing.
fn expand_bracket<F>(
    f: &mut F,
    mut lo: f64,
    mut hi: f64,
    factor: f64,
    max_steps: usize,
) -> std::result::Result<Bracket, (f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut flo = f(lo).map_err(|_| (lo, hi))?;
    let mut fhi = f(hi).map_err(|_| (lo, hi))?;
    let mut width = hi - lo;
    for _ in 0..max_steps {
        if flo <= 0.0 && fhi >= 0.0 {
            return Ok((lo, hi, flo, fhi));
        }
        width *= factor;
        if flo > 0.0 {
            hi = lo;
            fhi = flo;
            lo -= width;
            flo = f(lo).map_err(|_| (lo, hi))?;
        } else {
            lo = hi;
            flo = fhi;
            hi += width;
            fhi = f(hi).map_err(|_| (lo, hi))?;
        }
    }
    Err((lo, hi))
}

struct Root {
    x: f64,
    fx: f64,
    /// Secant slope across the final bracket.
    slope: f64,
}

/// Brent's method on a sign-changing bracket.
fn brent<F>(f: &mut F, a0: f64, b0: f64, fa0: f64, fb0: f64, xtol: f64, max_iter: usize) -> Result<Root>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b, mut fa, mut fb) = (a0, b0, fa0, fb0);
    if fa == 0.0 {
        return Ok(Root { x: a, fx: 0.0, slope: ((fb - fa) / (b - a)).abs() });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, fx: 0.0, slope: ((fb - fa) / (b - a)).abs() });
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            let slope = if c != b { ((fc - fb) / (c - b)).abs() } else { 0.0 };
            return Ok(Root { x: b, fx: fb, slope });
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b)?;
    }
    Err(Error::IterationStall { iterations: max_iter, residual: fb.abs() })
}
