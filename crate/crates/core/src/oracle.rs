//! Brute-force 2D finite-difference oracle for the full equation at fixed m.
//!
//! With `ψ = (ξ²−1)^{m/2}(1−η²)^{m/2} f e^{imφ}` the energy functional
//! becomes `E' = K[f]/M[f]` with
//!
//! ```text
//! K = ∬ (1−η²)^m (ξ²−1)^{m+1} f_ξ² + (ξ²−1)^m (1−η²)^{m+1} f_η²
//!       + (ξ²−1)^m (1−η²)^m P f²
//! M = (R²/2) ∬ (ξ²−1)^m (1−η²)^m (ξ²−η²) f²
//! P = −2ZRξ + γ'[ξ²(ξ²−1) + η²(1−η²)]
//! ```
//!
//! and `E = E' + ω²R²/2`. The centrifugal terms cancel, so `f` is smooth up
//! to the axis. The form is discretized on a cell-centered mesh in
//! `ξ = 1 + (ξ_max−1)u^p`, `η = sinh(βv)/sinh β`, which yields an exactly
//! symmetric banded `H` and a diagonal `S`. Natural boundary conditions hold
//! at ξ = 1 and η = ±1, Dirichlet at ξ_max. The lowest pairs of `H f = E' S f`
//! come from shift-invert block subspace iteration on a banded Cholesky
//! factor.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::PhysicalConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_xi: usize,
    pub n_eta: usize,
    pub xi_max: f64,
    /// Exponent `p` of the ξ mapping; 2 clusters points near ξ = 1.
    pub stretching: f64,
    /// β of the η mapping; positive values cluster points near η = 0.
    pub eta_clustering: f64,
}

/// Decay depth (in e-folds of the oscillator Gaussian) kept inside ξ_max.
pub const DEFAULT_DECAY_DEPTH: f64 = 25.0;

impl GridSpec {
    /// Grid with ξ_max chosen from the oscillator decay `exp(−ωR²(ξ²−1)/4)`
    /// and never tighter than the shooting tail rule.
    pub fn for_config(config: &PhysicalConfig, principal: u32, n_xi: usize, n_eta: usize) -> Result<GridSpec> {
        if !config.is_confined() {
            return Err(Error::InvalidConfig("the grid oracle needs omega > 0".into()));
        }
        let wr2 = config.omega * config.r * config.r;
        let decay = 1.0 + 4.0 * (DEFAULT_DECAY_DEPTH + principal as f64 + 2.0) / wr2;
        let tail = 2.0 * 2.0 * crate::ode::TAIL_DEPTH_MIN / wr2;
        let spec = GridSpec { n_xi, n_eta, xi_max: decay.max(tail).sqrt(), stretching: 2.0, eta_clustering: 1.5 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_xi < 16
            || self.n_eta < 16
            || !(self.xi_max > 1.0)
            || !(self.stretching >= 1.0)
            || !(self.eta_clustering >= 0.0)
        {
            return Err(Error::InvalidConfig(format!("invalid grid {self:?}")));
        }
        Ok(())
    }

    /// Same mapping with both counts halved.
    pub fn halved(&self) -> GridSpec {
        GridSpec { n_xi: self.n_xi / 2, n_eta: self.n_eta / 2, ..*self }
    }

    fn xi_of(&self, u: f64) -> (f64, f64) {
        let p = self.stretching;
        let c = self.xi_max - 1.0;
        (1.0 + c * u.powf(p), c * p * u.powf(p - 1.0))
    }

    fn eta_of(&self, v: f64) -> (f64, f64) {
        let b = self.eta_clustering;
        if b < 1e-8 {
            (v, 1.0)
        } else {
            ((b * v).sinh() / b.sinh(), b * (b * v).cosh() / b.sinh())
        }
    }
}

/// Symmetric positive (semi)definite band matrix stored by lower diagonals:
/// `band[i*(bw+1) + d] = A[i][i−d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedSym {
    pub n: usize,
    pub bw: usize,
    band: Vec<f64>,
}

impl BandedSym {
    pub fn zeros(n: usize, bw: usize) -> Self {
        BandedSym { n, bw, band: vec![0.0; n * (bw + 1)] }
    }

    /// Element `(i, j)`; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.bw {
            0.0
        } else {
            self.band[i * (self.bw + 1) + (i - j)]
        }
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        debug_assert!(i - j <= self.bw);
        self.band[i * (self.bw + 1) + (i - j)] += v;
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        let w = self.bw + 1;
        y.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.n {
            let row = &self.band[i * w..(i + 1) * w];
            y[i] += row[0] * x[i];
            for d in 1..w.min(i + 1) {
                let j = i - d;
                y[i] += row[d] * x[j];
                y[j] += row[d] * x[i];
            }
        }
    }

    /// In-place Cholesky `A = LLᵀ` of `self − shift·diag(s)`.
    fn cholesky_shifted(&self, s: &[f64], shift: f64) -> Result<BandCholesky> {
        let w = self.bw + 1;
        let mut l = self.band.clone();
        for i in 0..self.n {
            l[i * w] -= shift * s[i];
        }
        for i in 0..self.n {
            let jmin = i.saturating_sub(self.bw);
            for j in jmin..=i {
                // L[i][j] = (A[i][j] − Σ_k L[i][k] L[j][k]) / L[j][j]
                let mut acc = l[i * w + (i - j)];
                let kmin = jmin.max(j.saturating_sub(self.bw));
                for k in kmin..j {
                    acc -= l[i * w + (i - k)] * l[j * w + (j - k)];
                }
                if j == i {
                    if !(acc > 0.0) {
                        return Err(Error::FactorizationFailure { pivot: i });
                    }
                    l[i * w] = acc.sqrt();
                } else {
                    l[i * w + (i - j)] = acc / l[j * w];
                }
            }
        }
        // Column-major copy for the backward sweep: up[i*w + d] = L[i+d][i].
        let mut up = vec![0.0; l.len()];
        for i in 0..self.n {
            for d in 0..w.min(self.n - i) {
                up[i * w + d] = l[(i + d) * w + d];
            }
        }
        Ok(BandCholesky { n: self.n, bw: self.bw, l, up })
    }
}

struct BandCholesky {
    n: usize,
    bw: usize,
    l: Vec<f64>,
    up: Vec<f64>,
}

impl BandCholesky {
    fn solve_in_place(&self, x: &mut [f64]) {
        let w = self.bw + 1;
        for i in 0..self.n {
            let mut acc = x[i];
            for k in i.saturating_sub(self.bw)..i {
                acc -= self.l[i * w + (i - k)] * x[k];
            }
            x[i] = acc / self.l[i * w];
        }
        for i in (0..self.n).rev() {
            let mut acc = x[i];
            for d in 1..w.min(self.n - i) {
                acc -= self.up[i * w + d] * x[i + d];
            }
            x[i] = acc / self.l[i * w];
        }
    }
}

/// Discretized operator pair. Unknown `(i, j)` (ξ index, η index) lives at
/// position `i·n_eta + j`. Eigenvalues of the pair are shifted energies E'.
#[derive(Debug, Clone, PartialEq)]
pub struct GridOperator {
    pub h: BandedSym,
    pub s: Vec<f64>,
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
    pub floor: f64,
    pub spec: GridSpec,
}

pub fn assemble(config: &PhysicalConfig, m: u32, grid: &GridSpec) -> Result<GridOperator> {
    grid.validate()?;
    let (nu, nv) = (grid.n_xi, grid.n_eta);
    let (du, dv) = (1.0 / nu as f64, 2.0 / nv as f64);
    let mi = m as i32;
    let gp = config.gamma_prime();
    let zr2 = 2.0 * config.z * config.r;
    let half_r2 = 0.5 * config.r * config.r;

    let centers_u: Vec<(f64, f64)> = (0..nu).map(|i| grid.xi_of((i as f64 + 0.5) * du)).collect();
    let centers_v: Vec<(f64, f64)> = (0..nv).map(|j| grid.eta_of(-1.0 + (j as f64 + 0.5) * dv)).collect();
    let gxi = |xi: f64| xi * xi - 1.0;
    let geta = |eta: f64| 1.0 - eta * eta;

    let n = nu * nv;
    let mut h = BandedSym::zeros(n, nv);
    let mut s = vec![0.0; n];
    let idx = |i: usize, j: usize| i * nv + j;

    // Transverse weights for each family of faces.
    let wv: Vec<f64> = centers_v.iter().map(|&(e, de)| geta(e).powi(mi) * de * dv).collect();
    let wu: Vec<f64> = centers_u.iter().map(|&(x, dx)| gxi(x).powi(mi) * dx * du).collect();

    // ξ faces: interior faces between i and i+1, then the Dirichlet face.
    for i in 0..nu {
        let uf = (i as f64 + 1.0) * du;
        let (xf, dxf) = grid.xi_of(uf);
        let along = gxi(xf).powi(mi + 1) / dxf;
        for j in 0..nv {
            let a = idx(i, j);
            if i + 1 < nu {
                let c = along * wv[j] / du;
                let b = idx(i + 1, j);
                h.add(a, a, c);
                h.add(b, b, c);
                h.add(b, a, -c);
            } else {
                h.add(a, a, 2.0 * along * wv[j] / du);
            }
        }
    }
    // η faces; the outermost faces at η = ±1 carry no flux.
    for j in 0..nv - 1 {
        let vf = -1.0 + (j as f64 + 1.0) * dv;
        let (ef, def) = grid.eta_of(vf);
        let along = geta(ef).powi(mi + 1) / def;
        for i in 0..nu {
            let c = along * wu[i] / dv;
            let (a, b) = (idx(i, j), idx(i, j + 1));
            h.add(a, a, c);
            h.add(b, b, c);
            h.add(b, a, -c);
        }
    }
    // Cell terms.
    for (i, &(x, dx)) in centers_u.iter().enumerate() {
        for (j, &(e, de)) in centers_v.iter().enumerate() {
            let weight = gxi(x).powi(mi) * geta(e).powi(mi) * dx * de * du * dv;
            let p = -zr2 * x + gp * (x * x * gxi(x) + e * e * geta(e));
            let a = idx(i, j);
            h.add(a, a, p * weight);
            s[a] = half_r2 * (x * x - e * e) * weight;
        }
    }

    Ok(GridOperator {
        h,
        s,
        xi: centers_u.iter().map(|p| p.0).collect(),
        eta: centers_v.iter().map(|p| p.0).collect(),
        floor: config.floor(),
        spec: *grid,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPairs {
    /// Full energies E, ascending.
    pub energies: Vec<f64>,
    /// S-normalized reduced functions `f` on the grid.
    pub vectors: Vec<Vec<f64>>,
    /// `‖Hv − E'Sv‖ / ‖Sv‖` per pair.
    pub residuals: Vec<f64>,
    pub iterations: usize,
    /// Shift (full energy) of the final factorization.
    pub shift: f64,
}

const RESIDUAL_TARGET: f64 = 1e-10;
const RESIDUAL_LIMIT: f64 = 1e-8;
const MAX_SUBSPACE_ITERS: usize = 2000;

/// Lowest `count` eigenpairs by shift-invert subspace iteration. `shift`
/// is a full energy below the wanted part of the spectrum; the default is
/// `ω²R²/2 − 2Z² − 1`.
pub fn lowest_eigenpairs(
    op: &GridOperator,
    config: &PhysicalConfig,
    count: usize,
    shift: Option<f64>,
) -> Result<EigenPairs> {
    let n = op.s.len();
    if count == 0 || count > n {
        return Err(Error::InvalidConfig(format!("cannot extract {count} eigenpairs from {n} unknowns")));
    }
    let p = (count + 4).min(n);
    let mut sigma = shift.unwrap_or(op.floor - 2.0 * config.z * config.z - 1.0) - op.floor;
    let mut chol = factor_with_retry(op, &mut sigma)?;
    let mut refined = false;

    let mut x = initial_block(op, p);
    let mut hx = vec![0.0; n];
    let mut work = DMatrix::<f64>::zeros(n, p);
    let mut last_res = f64::INFINITY;
    for iter in 1..=MAX_SUBSPACE_ITERS {
        // Y = (H − σS)⁻¹ S X
        for k in 0..p {
            let mut col: Vec<f64> = (0..n).map(|i| op.s[i] * x[(i, k)]).collect();
            chol.solve_in_place(&mut col);
            work.set_column(k, &DVector::from_vec(col));
        }
        let (theta, ritz) = rayleigh_ritz(op, &work)?;
        x = ritz;

        let mut residuals = Vec::with_capacity(count);
        for k in 0..count {
            let col: Vec<f64> = x.column(k).iter().copied().collect();
            op.h.mul_vec(&col, &mut hx);
            let (mut num, mut den) = (0.0, 0.0);
            for i in 0..n {
                let sv = op.s[i] * col[i];
                num += (hx[i] - theta[k] * sv).powi(2);
                den += sv * sv;
            }
            residuals.push((num / den).sqrt());
        }
        let worst = residuals.iter().fold(0.0_f64, |a, &r| a.max(r / theta[0].abs().max(1.0)));
        last_res = worst;

        // Move the shift once just below the lowest Ritz value.
        if !refined && worst < 1e-3 {
            refined = true;
            let gap = (theta[1.min(p - 1)] - theta[0]).abs();
            let mut candidate = theta[0] - 0.25 * gap - 1e-3 * (1.0 + theta[0].abs());
            if let Ok(c) = factor_with_retry(op, &mut candidate) {
                chol = c;
                sigma = candidate;
            }
        }
        if worst <= RESIDUAL_TARGET {
            return Ok(pack(op, x, &theta, residuals, count, iter, sigma));
        }
        if iter == MAX_SUBSPACE_ITERS && worst <= RESIDUAL_LIMIT {
            return Ok(pack(op, x, &theta, residuals, count, iter, sigma));
        }
    }
    Err(Error::IterationStall { iterations: MAX_SUBSPACE_ITERS, residual: last_res })
}

fn pack(
    op: &GridOperator,
    x: DMatrix<f64>,
    theta: &[f64],
    residuals: Vec<f64>,
    count: usize,
    iter: usize,
    sigma: f64,
) -> EigenPairs {
    EigenPairs {
        energies: theta[..count].iter().map(|t| t + op.floor).collect(),
        vectors: (0..count).map(|k| x.column(k).iter().copied().collect()).collect(),
        residuals,
        iterations: iter,
        shift: sigma + op.floor,
    }
}

fn factor_with_retry(op: &GridOperator, sigma: &mut f64) -> Result<BandCholesky> {
    let mut step = 1.0 + sigma.abs();
    let mut last = Error::FactorizationFailure { pivot: 0 };
    for _ in 0..8 {
        match op.h.cholesky_shifted(&op.s, *sigma) {
            Ok(c) => return Ok(c),
            Err(e) => {
                last = e;
                *sigma -= step;
                step *= 2.0;
            }
        }
    }
    Err(last)
}

/// Smooth product functions of increasing total degree.
fn initial_block(op: &GridOperator, p: usize) -> DMatrix<f64> {
    let (nu, nv) = (op.xi.len(), op.eta.len());
    let mut x = DMatrix::<f64>::zeros(nu * nv, p);
    let mut pairs = Vec::with_capacity(p);
    'outer: for total in 0.. {
        for a in 0..=total {
            pairs.push((a, total - a));
            if pairs.len() == p {
                break 'outer;
            }
        }
    }
    for (k, &(a, b)) in pairs.iter().enumerate() {
        for i in 0..nu {
            let u = (i as f64 + 0.5) / nu as f64;
            let fu = ((a as f64 + 0.5) * std::f64::consts::PI * u).cos();
            for j in 0..nv {
                let v = (j as f64 + 0.5) / nv as f64;
                let fv = (b as f64 * std::f64::consts::PI * v).cos();
                x[(i * nv + j, k)] = fu * fv;
            }
        }
    }
    x
}

/// Ritz pairs of the pencil restricted to span(Y), sorted ascending, with
/// S-orthonormal vectors.
fn rayleigh_ritz(op: &GridOperator, y: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let (n, p) = y.shape();
    let mut hy = DMatrix::<f64>::zeros(n, p);
    let mut buf = vec![0.0; n];
    for k in 0..p {
        let col: Vec<f64> = y.column(k).iter().copied().collect();
        op.h.mul_vec(&col, &mut buf);
        hy.set_column(k, &DVector::from_column_slice(&buf));
    }
    let mut sy = y.clone();
    for k in 0..p {
        for i in 0..n {
            sy[(i, k)] *= op.s[i];
        }
    }
    let hs = y.transpose() * &hy;
    let ss = y.transpose() * &sy;
    let hs = 0.5 * (&hs + hs.transpose());
    let ss = 0.5 * (&ss + ss.transpose());
    let chol = ss.cholesky().ok_or(Error::FactorizationFailure { pivot: 0 })?;
    let linv = chol.l().try_inverse().ok_or(Error::FactorizationFailure { pivot: 0 })?;
    let c = &linv * hs * linv.transpose();
    let c = 0.5 * (&c + c.transpose());
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let basis = y * linv.transpose();
    let mut out = DMatrix::<f64>::zeros(n, p);
    let mut theta = Vec::with_capacity(p);
    for (dst, &src) in order.iter().enumerate() {
        theta.push(eig.eigenvalues[src]);
        out.set_column(dst, &(&basis * eig.eigenvectors.column(src)));
    }
    Ok((theta, out))
}

/// Lowest energies of an m-block with a Richardson error estimate from the
/// half-resolution companion grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSolution {
    pub energies: Vec<f64>,
    pub coarse_energies: Vec<f64>,
    /// `|E_fine − E_coarse| / 3` per level.
    pub grid_error: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl GridSolution {
    /// Richardson extrapolant `(4E_fine − E_coarse)/3`.
    pub fn extrapolated(&self) -> Vec<f64> {
        self.energies.iter().zip(&self.coarse_energies).map(|(f, c)| (4.0 * f - c) / 3.0).collect()
    }
}

pub fn solve_grid(config: &PhysicalConfig, m: u32, fine: &GridSpec, count: usize) -> Result<GridSolution> {
    let coarse = fine.halved();
    coarse.validate()?;
    let op_c = assemble(config, m, &coarse)?;
    let pairs_c = lowest_eigenpairs(&op_c, config, count, None)?;
    let op_f = assemble(config, m, fine)?;
    let shift = pairs_c.energies[0] - 0.5 * (pairs_c.energies[0] - pairs_c.shift).abs();
    let pairs_f = lowest_eigenpairs(&op_f, config, count, Some(shift))
        .or_else(|_| lowest_eigenpairs(&op_f, config, count, None))?;
    let grid_error = pairs_f
        .energies
        .iter()
        .zip(&pairs_c.energies)
        .map(|(f, c)| ((f - c).abs() / 3.0).max(4.0 * f64::EPSILON * f.abs()))
        .collect();
    Ok(GridSolution {
        energies: pairs_f.energies,
        coarse_energies: pairs_c.energies,
        grid_error,
        vectors: pairs_f.vectors,
        xi: op_f.xi,
        eta: op_f.eta,
        residuals: pairs_f.residuals,
    })
}
