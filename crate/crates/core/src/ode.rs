//! Canonical quasi-radial and quasi-angular equations `u'' + Q u = 0`,
//! their series starts at the regular singular endpoints, the Gaussian tail
//! start and an adaptive integrator with log-magnitude rescaling.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::params::{ScaledParams, SeparatedCoefficients};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OdeKind {
    /// ξ ∈ (1, ∞)
    Radial,
    /// η ∈ (−1, 1)
    Angular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Endpoint {
    MinusOne,
    PlusOne,
    /// ξ = 1⁺ of the radial equation.
    RadialOne,
}

/// Canonical equation with its coefficients stored unscaled:
/// `p2 = h²/4`, `coulomb = hα`, `sep = hλ`, `quartic = h⁴γ`.
///
/// Radial: `Q(ξ) = p2 + (coulomb·ξ − sep)/(ξ²−1) − quartic·ξ² + (1−m²)/(ξ²−1)²`.
/// Angular: `Q(η) = p2 + sep/(1−η²) − quartic·η² + (1−m²)/(1−η²)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalOde {
    pub kind: OdeKind,
    pub p2: f64,
    pub coulomb: f64,
    pub sep: f64,
    pub quartic: f64,
    pub m: u32,
}

/// Integration state: `(u, u')` at `x`, with the true magnitude being
/// `exp(log_scale)` times the stored values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub x: f64,
    pub u: f64,
    pub du: f64,
    pub log_scale: f64,
}

impl State {
    pub fn new(x: f64, u: f64, du: f64) -> Self {
        Self { x, u, du, log_scale: 0.0 }
    }

    fn normalized(x: f64, u: f64, du: f64, log_scale: f64) -> Self {
        let norm = u.abs().max(du.abs());
        if norm == 0.0 || !norm.is_finite() {
            return Self { x, u, du, log_scale };
        }
        Self { x, u: u / norm, du: du / norm, log_scale: log_scale + norm.ln() }
    }
}

impl CanonicalOde {
    pub fn radial(sp: &ScaledParams, lambda: f64, m: u32) -> Self {
        Self {
            kind: OdeKind::Radial,
            p2: 0.25 * sp.h * sp.h,
            coulomb: sp.h * sp.alpha,
            sep: sp.h * lambda,
            quartic: sp.h.powi(4) * sp.gamma,
            m,
        }
    }

    pub fn angular(sp: &ScaledParams, lambda: f64, m: u32) -> Self {
        Self { kind: OdeKind::Angular, coulomb: 0.0, ..Self::radial(sp, lambda, m) }
    }

    /// Build from coefficients valid at any trial energy; `sep` is the
    /// unscaled separation constant Λ = hλ.
    pub fn from_separated(kind: OdeKind, coeffs: &SeparatedCoefficients, sep: f64, m: u32) -> Self {
        let coulomb = match kind {
            OdeKind::Radial => coeffs.coulomb,
            OdeKind::Angular => 0.0,
        };
        Self { kind, p2: coeffs.p2, coulomb, sep, quartic: coeffs.quartic, m }
    }

    fn centrifugal(&self) -> f64 {
        let m = self.m as f64;
        1.0 - m * m
    }

    /// Q at an interior coordinate.
    pub fn q(&self, x: f64) -> Result<f64> {
        let inside = match self.kind {
            OdeKind::Radial => x > 1.0,
            OdeKind::Angular => x > -1.0 && x < 1.0,
        };
        if !inside {
            return Err(Error::DomainEdge(x));
        }
        Ok(self.q_unchecked(x))
    }

    #[inline]
    pub(crate) fn q_unchecked(&self, x: f64) -> f64 {
        match self.kind {
            OdeKind::Radial => {
                let f = (x - 1.0) * (x + 1.0);
                self.p2 + (self.coulomb * x - self.sep) / f - self.quartic * x * x + self.centrifugal() / (f * f)
            }
            OdeKind::Angular => {
                let f = (1.0 - x) * (1.0 + x);
                self.p2 + self.sep / f - self.quartic * x * x + self.centrifugal() / (f * f)
            }
        }
    }

    /// Leading Frobenius exponent σ = (1 + m)/2.
    pub fn sigma(&self) -> f64 {
        0.5 * (1.0 + self.m as f64)
    }

    /// Taylor coefficients of `d²·Q` in the distance `d` from the endpoint.
    fn endpoint_series(&self, endpoint: Endpoint, count: usize) -> Vec<f64> {
        let mut a = vec![0.0; count];
        let cf = self.centrifugal();
        match (self.kind, endpoint) {
            (OdeKind::Angular, Endpoint::MinusOne | Endpoint::PlusOne) => {
                // d/(2−d) = Σ_{k≥1} d^k / 2^k ; 1/(2−d)² = Σ (k+1) d^k / 2^{k+2}
                let mut scale = 1.0;
                for (k, ak) in a.iter_mut().enumerate() {
                    let kf = k as f64;
                    let sep_part = if k >= 1 { self.sep * scale } else { 0.0 };
                    *ak = cf * (kf + 1.0) * 0.25 * scale + sep_part;
                    scale *= 0.5;
                }
                add_at(&mut a, 2, self.p2 - self.quartic);
                add_at(&mut a, 3, 2.0 * self.quartic);
                add_at(&mut a, 4, -self.quartic);
            }
            (OdeKind::Radial, Endpoint::RadialOne) => {
                // T(t) = t/(2+t) = Σ_{k≥1} (−1)^{k−1} t^k / 2^k
                let mut tseries = vec![0.0; count];
                let mut scale = 0.5;
                for k in 1..count {
                    tseries[k] = if k % 2 == 1 { scale } else { -scale };
                    scale *= 0.5;
                }
                let mut scale = 0.25;
                for k in 0..count {
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    a[k] += cf * sign * (k as f64 + 1.0) * scale;
                    scale *= 0.5;
                }
                for k in 1..count {
                    a[k] += (self.coulomb - self.sep) * tseries[k];
                    if k + 1 < count {
                        a[k + 1] += self.coulomb * tseries[k];
                    }
                }
                add_at(&mut a, 2, self.p2 - self.quartic);
                add_at(&mut a, 3, -2.0 * self.quartic);
                add_at(&mut a, 4, -self.quartic);
            }
            _ => panic!("endpoint {endpoint:?} does not belong to a {:?} equation", self.kind),
        }
        a
    }

    /// Coefficients `c_j` of the regular solution `u = d^σ Σ c_j d^j`.
    pub fn frobenius_coefficients(&self, endpoint: Endpoint, count: usize) -> Vec<f64> {
        let a = self.endpoint_series(endpoint, count);
        let m = self.m as f64;
        let mut c = vec![0.0; count];
        c[0] = 1.0;
        for j in 1..count {
            let acc: f64 = (1..=j).map(|i| a[i] * c[j - i]).sum();
            let jf = j as f64;
            c[j] = -acc / (jf * (jf + m));
        }
        c
    }

    /// Default distance from the endpoint at which the series start is
    /// taken. Scaled so that the series converges to full precision.
    pub fn default_offset(&self, endpoint: Endpoint) -> f64 {
        let a = self.endpoint_series(endpoint, 5);
        let rho = (1..5).map(|i| a[i].abs().powf(1.0 / i as f64)).fold(1.0_f64, f64::max);
        1e-3 / rho
    }

    /// Regular-solution start `u ≈ d^σ Σ c_j d^j` at distance `offset` from
    /// `endpoint`, normalized so that `max(|u|, |u'|) = 1`.
    pub fn frobenius_start(&self, endpoint: Endpoint, offset: f64) -> State {
        debug_assert!(offset > 0.0 && offset <= 1e-3);
        let coeffs = self.frobenius_coefficients(endpoint, FROBENIUS_TERMS);
        let sigma = self.sigma();
        let d = offset;
        let (mut s, mut ds) = (0.0, 0.0);
        let mut dp = 1.0;
        for (j, c) in coeffs.iter().enumerate() {
            let e = j as f64 + sigma;
            s += c * dp;
            ds += c * e * dp;
            dp *= d;
        }
        // u = d^σ s, du/dd = d^{σ−1} ds ; normalize by d^{σ−1}
        let (u, dudd) = (d * s, ds);
        let log_scale = (sigma - 1.0) * d.ln();
        let (x, du) = match endpoint {
            Endpoint::MinusOne => (-1.0 + d, dudd),
            Endpoint::PlusOne => (1.0 - d, -dudd),
            Endpoint::RadialOne => (1.0 + d, dudd),
        };
        State::normalized(x, u, du, log_scale)
    }

    /// Decaying tail start at `xi_max` with `u'/u = −√quartic·ξ − 1/(2ξ)`.
    pub fn tail_start(&self, xi_max: f64) -> Result<State> {
        if self.kind != OdeKind::Radial {
            return Err(Error::InvalidConfig("tail start applies to the radial equation only".into()));
        }
        let decay = self.quartic.sqrt();
        let depth = 0.5 * decay * xi_max * xi_max;
        if !(depth >= TAIL_DEPTH_MIN) {
            return Err(Error::TailTooClose { xi_max, depth, required: TAIL_DEPTH_MIN });
        }
        let ratio = -decay * xi_max - 0.5 / xi_max;
        Ok(State::normalized(xi_max, 1.0, ratio, 0.0))
    }

    pub fn integrate(&self, start: State, end: f64, rel_tol: f64, record: bool) -> Result<Trajectory> {
        let ode = *self;
        integrate(move |x| ode.q_unchecked(x), start, end, &IntegrateOptions { rel_tol, record })
    }
}

fn add_at(a: &mut [f64], k: usize, v: f64) {
    if k < a.len() {
        a[k] += v;
    }
}

const FROBENIUS_TERMS: usize = 24;

/// Minimum `h²√γ ξ²/2` accepted by [`CanonicalOde::tail_start`].
pub const TAIL_DEPTH_MIN: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    pub rel_tol: f64,
    /// Keep every accepted step in the trajectory.
    pub record: bool,
}

/// Result of an integration. Samples are only kept when requested; the
/// final state, node count and step statistics are always available.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub abscissae: Vec<f64>,
    pub values: Vec<(f64, f64)>,
    pub log_scale: Vec<f64>,
    /// Sign changes of `u` over the integration interval.
    pub nodes: u32,
    pub steps: usize,
    pub rejected: usize,
    final_state: Option<State>,
    forward: bool,
}

impl Trajectory {
    pub fn end(&self) -> State {
        self.final_state.expect("trajectory has a final state")
    }

    /// Continuous Prüfer angle of `(scale·u, u')` at the end point. Starts in
    /// (0, π) for `u > 0`, grows by π per node integrating forward and drops
    /// by π per node integrating backward.
    pub fn prufer_angle(&self, scale: f64) -> f64 {
        let end = self.end();
        let base = (scale * end.u).atan2(end.du).rem_euclid(PI);
        let signed = if self.forward { self.nodes as f64 } else { -(self.nodes as f64) };
        signed * PI + base
    }
}

const MAX_STEPS: usize = 5_000_000;
const RESCALE_HIGH: f64 = 1e100;
const RESCALE_LOW: f64 = 1e-100;

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b* (error weights)
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Adaptive Dormand–Prince integration of `u'' = −Q(x) u` from `start` to
/// `end` (either direction).
pub fn integrate<F>(q: F, start: State, end: f64, opts: &IntegrateOptions) -> Result<Trajectory>
where
    F: Fn(f64) -> f64,
{
    if !(opts.rel_tol > 0.0) {
        return Err(Error::InvalidConfig(format!("rel_tol must be positive, got {}", opts.rel_tol)));
    }
    let forward = end >= start.x;
    let dir = if forward { 1.0 } else { -1.0 };
    let span = (end - start.x).abs();

    let mut traj = Trajectory { forward, ..Default::default() };
    let mut x = start.x;
    let mut u = start.u;
    let mut v = start.du;
    let mut log_scale = start.log_scale;
    if opts.record {
        traj.abscissae.push(x);
        traj.values.push((u, v));
        traj.log_scale.push(log_scale);
    }
    if span == 0.0 {
        traj.final_state = Some(State { x, u, du: v, log_scale });
        return Ok(traj);
    }

    let mut qx = q(x);
    let k0 = qx.abs().sqrt().max(1.0 / span);
    let mut h = (0.02 / k0).min(span);
    // error exponent for a 5th-order step with 4th-order embedded estimate
    let expo = 0.2;

    while (end - x) * dir > 0.0 {
        if traj.steps + traj.rejected > MAX_STEPS {
            return Err(Error::StepUnderflow { at: x, step: h });
        }
        let remaining = (end - x).abs();
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        let hs = h * dir;

        // stages: y' = (v, −Q u)
        let q1 = qx;
        let (k1u, k1v) = (v, -q1 * u);
        let (u2, v2) = (u + hs * A21 * k1u, v + hs * A21 * k1v);
        let q2 = q(x + C2 * hs);
        let (k2u, k2v) = (v2, -q2 * u2);
        let (u3, v3) = (u + hs * (A31 * k1u + A32 * k2u), v + hs * (A31 * k1v + A32 * k2v));
        let q3 = q(x + C3 * hs);
        let (k3u, k3v) = (v3, -q3 * u3);
        let (u4, v4) = (u + hs * (A41 * k1u + A42 * k2u + A43 * k3u), v + hs * (A41 * k1v + A42 * k2v + A43 * k3v));
        let q4 = q(x + C4 * hs);
        let (k4u, k4v) = (v4, -q4 * u4);
        let (u5, v5) = (
            u + hs * (A51 * k1u + A52 * k2u + A53 * k3u + A54 * k4u),
            v + hs * (A51 * k1v + A52 * k2v + A53 * k3v + A54 * k4v),
        );
        let q5 = q(x + C5 * hs);
        let (k5u, k5v) = (v5, -q5 * u5);
        let (u6, v6) = (
            u + hs * (A61 * k1u + A62 * k2u + A63 * k3u + A64 * k4u + A65 * k5u),
            v + hs * (A61 * k1v + A62 * k2v + A63 * k3v + A64 * k4v + A65 * k5v),
        );
        let x_new = if last { end } else { x + hs };
        let q6 = q(x_new);
        let (k6u, k6v) = (v6, -q6 * u6);
        let un = u + hs * (B1 * k1u + B3 * k3u + B4 * k4u + B5 * k5u + B6 * k6u);
        let vn = v + hs * (B1 * k1v + B3 * k3v + B4 * k4v + B5 * k5v + B6 * k6v);
        let (k7u, k7v) = (vn, -q6 * un);
        let eu = hs * (E1 * k1u + E3 * k3u + E4 * k4u + E5 * k5u + E6 * k6u + E7 * k7u);
        let ev = hs * (E1 * k1v + E3 * k3v + E4 * k4v + E5 * k5v + E6 * k6v + E7 * k7v);

        // Error measured in the Prüfer norm (k u, u') with k = √|Q|.
        let kk = q6.abs().max(q1.abs()).sqrt().max(1.0 / span);
        let rho = (kk * u).hypot(v).max((kk * un).hypot(vn));
        let err = (kk * eu).hypot(ev) / (opts.rel_tol * rho);

        if !err.is_finite() {
            h *= 0.1;
            traj.rejected += 1;
            if h < 1e-15 * x.abs().max(1.0) {
                return Err(Error::StepUnderflow { at: x, step: h });
            }
            continue;
        }

        if err <= 1.0 {
            if u != 0.0 && (un == 0.0 || un.signum() != u.signum()) {
                traj.nodes += 1;
            }
            x = x_new;
            u = un;
            v = vn;
            qx = q6;
            traj.steps += 1;
            let mag = u.abs().max(v.abs());
            if mag > RESCALE_HIGH || (mag < RESCALE_LOW && mag > 0.0) {
                u /= mag;
                v /= mag;
                log_scale += mag.ln();
            }
            if opts.record {
                traj.abscissae.push(x);
                traj.values.push((u, v));
                traj.log_scale.push(log_scale);
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-expo)).clamp(0.2, 5.0) };
            h *= factor;
        } else {
            traj.rejected += 1;
            h *= (0.9 * err.powf(-expo)).clamp(0.1, 0.9);
            if h < 1e-15 * x.abs().max(1.0) {
                return Err(Error::StepUnderflow { at: x, step: h });
            }
        }
    }

    traj.final_state = Some(State { x, u, du: v, log_scale });
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(rel_tol: f64) -> IntegrateOptions {
        IntegrateOptions { rel_tol, record: false }
    }

    #[test]
    fn q_examples() {
        let ode = CanonicalOde { kind: OdeKind::Angular, p2: 4.0, coulomb: 0.0, sep: 6.0, quartic: 3.0, m: 2 };
        // h²/4 + hλ + (1 − m²) at η = 0
        assert_eq!(ode.q(0.0).unwrap(), 4.0 + 6.0 - 3.0);
        let ode = CanonicalOde { kind: OdeKind::Radial, p2: 4.0, coulomb: 0.0, sep: 6.0, quartic: 0.0, m: 1 };
        let v = ode.q(2f64.sqrt()).unwrap();
        assert!((v - (4.0 - 6.0)).abs() < 1e-14);
        assert!(matches!(ode.q(1.0), Err(Error::DomainEdge(_))));
        let ang = CanonicalOde { kind: OdeKind::Angular, ..ode };
        assert!(ang.q(-1.0).is_err() && ang.q(1.0).is_err());
    }

    #[test]
    fn angular_q_is_even() {
        let ode = CanonicalOde { kind: OdeKind::Angular, p2: 2.3, coulomb: 0.0, sep: -1.7, quartic: 5.0, m: 0 };
        for &x in &[0.1, 0.37, 0.8, 0.99] {
            assert_eq!(ode.q_unchecked(x), ode.q_unchecked(-x));
        }
    }

    #[test]
    fn sigma_examples() {
        let mut ode = CanonicalOde { kind: OdeKind::Angular, p2: 1.0, coulomb: 0.0, sep: 1.0, quartic: 0.4, m: 0 };
        assert_eq!(ode.sigma(), 0.5);
        ode.m = 1;
        assert_eq!(ode.sigma(), 1.0);
    }

    #[test]
    fn tail_start_example() {
        // h = 4, γ = 0.25: h²√γ = 8
        let ode = CanonicalOde { kind: OdeKind::Radial, p2: 4.0, coulomb: 0.0, sep: 0.0, quartic: 64.0, m: 0 };
        let st = ode.tail_start(5.0).unwrap();
        assert!((st.du / st.u + 40.1).abs() < 1e-13);
        assert!(st.u > 0.0 && st.du < 0.0);
        assert!(matches!(ode.tail_start(2.0), Err(Error::TailTooClose { .. })));
    }

    #[test]
    fn integrate_cosh() {
        let t = integrate(|_| -1.0, State::new(0.0, 1.0, 0.0), 1.0, &opts(1e-12)).unwrap();
        let end = t.end();
        let got = end.u * end.log_scale.exp();
        assert!((got - 1f64.cosh()).abs() < 10.0 * 1e-12 * 1f64.cosh());
        assert!((got - 1.543_080_634_8).abs() < 1e-10);
        assert_eq!(t.nodes, 0);
    }

    #[test]
    fn integrate_sine() {
        let t = integrate(|_| 4.0, State::new(0.0, 0.0, 2.0), PI / 2.0, &opts(1e-12)).unwrap();
        let end = t.end();
        assert!((end.u * end.log_scale.exp()).abs() < 1e-10);
    }

    #[test]
    fn integrate_counts_nodes_both_directions() {
        // sin(3x) on (0, 2π − 0.1) has 5 interior zeros
        let b = 2.0 * PI - 0.1;
        let t = integrate(|_| 9.0, State::new(1e-3, (3e-3f64).sin(), 3.0 * (3e-3f64).cos()), b, &opts(1e-11)).unwrap();
        assert_eq!(t.nodes, 5);
        let back =
            integrate(|_| 9.0, State::new(b, (3.0 * b).sin(), 3.0 * (3.0 * b).cos()), 1e-3, &opts(1e-11)).unwrap();
        assert_eq!(back.nodes, 5);
    }

    #[test]
    fn integrator_error_shrinks_with_tolerance() {
        let exact = 1f64.cosh();
        let err = |tol| {
            let e = integrate(|_| -1.0, State::new(0.0, 1.0, 0.0), 1.0, &opts(tol)).unwrap().end();
            (e.u * e.log_scale.exp() - exact).abs()
        };
        let coarse = err(1e-7);
        let fine = err(1e-10);
        assert!(fine < coarse, "{fine} vs {coarse}");
        assert!(coarse < 10.0 * 1e-7 * exact);
    }

    #[test]
    fn rescaling_keeps_values_finite() {
        let t = integrate(|_| -400.0, State::new(0.0, 1.0, 20.0), 30.0, &opts(1e-10)).unwrap();
        let end = t.end();
        assert!(end.u.is_finite() && end.u.abs() <= 1e100);
        // u = e^{20x}
        assert!((end.u.ln() + end.log_scale - 600.0).abs() < 1e-6);
    }

    #[test]
    fn frobenius_series_satisfies_recurrence() {
        let ode = CanonicalOde { kind: OdeKind::Angular, p2: 1.0, coulomb: 0.0, sep: 2.0, quartic: 1.6, m: 0 };
        let c = ode.frobenius_coefficients(Endpoint::MinusOne, 3);
        // A_1 = sep/2 + (1 − m²)/4
        assert!((c[1] + 1.25).abs() < 1e-15);
    }
}
