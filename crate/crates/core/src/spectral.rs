//! Periodic pseudo-spectral evaluation of 𝓜φ − cφ + φ² and Newton refinement of even profiles.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::symbols;
use crate::waves::WaveProfile;

/// Default bound on the fraction of spectral energy in the top third of the spectrum.
pub const ALIASING_THRESHOLD: f64 = 1e-8;

/// N nodes x_j = −L/2 + jL/N on a period L.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PeriodicGrid {
    pub n: usize,
    pub l: f64,
}

impl PeriodicGrid {
    pub fn new(n: usize, l: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidInput(format!("grid size {n} must be a power of two >= 8")));
        }
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::InvalidInput(format!("period {l} must be positive")));
        }
        Ok(PeriodicGrid { n, l })
    }

    pub fn dx(&self) -> f64 {
        self.l / self.n as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| -0.5 * self.l + j as f64 * self.dx()).collect()
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n as i64;
        (0..n)
            .map(|j| {
                let jj = if j <= n / 2 { j } else { j - n };
                2.0 * PI * jj as f64 / self.l
            })
            .collect()
    }

    /// Index of the node mirrored through x = 0.
    pub fn mirror(&self, j: usize) -> usize {
        (self.n - j) % self.n
    }
}

struct Transforms {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Transforms {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Transforms { fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) }
    }

    fn forward(&self, v: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.fwd.process(&mut buf);
        buf
    }

    fn inverse(&self, mut buf: Vec<Complex64>) -> Vec<f64> {
        self.inv.process(&mut buf);
        let n = buf.len() as f64;
        buf.iter().map(|z| z.re / n).collect()
    }
}

/// A diagonal Fourier multiplier sampled on a grid.
pub struct SpectralOperator {
    grid: PeriodicGrid,
    symbol: Vec<f64>,
    tr: Transforms,
}

impl SpectralOperator {
    pub fn new<F: Fn(f64) -> f64>(grid: PeriodicGrid, f: F) -> Self {
        let symbol = grid.wavenumbers().iter().map(|&k| f(k.abs())).collect();
        SpectralOperator { grid, symbol, tr: Transforms::new(grid.n) }
    }

    /// 𝓜_τ with symbol m_τ.
    pub fn m_tau(grid: PeriodicGrid, tau: f64) -> Self {
        Self::new(grid, |k| symbols::m_real(tau, k))
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn symbol(&self) -> &[f64] {
        &self.symbol
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut h = self.tr.forward(v);
        for (z, m) in h.iter_mut().zip(&self.symbol) {
            *z *= *m;
        }
        self.tr.inverse(h)
    }

    /// Applies the multiplier with symbol 1/(symbol + shift).
    fn apply_shifted_inverse(&self, v: &[f64], shift: f64) -> Vec<f64> {
        let mut h = self.tr.forward(v);
        for (z, m) in h.iter_mut().zip(&self.symbol) {
            *z /= *m + shift;
        }
        self.tr.inverse(h)
    }

    /// Fraction of Σ|φ̂_k|² carried by |k| above two thirds of the Nyquist index.
    pub fn aliasing_fraction(&self, v: &[f64]) -> f64 {
        let h = self.tr.forward(v);
        let n = self.grid.n;
        let cut = n / 3;
        let mut top = 0.0;
        let mut total = 0.0;
        for (j, z) in h.iter().enumerate() {
            let jj = j.min(n - j);
            let e = z.norm_sqr();
            total += e;
            if jj > cut {
                top += e;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            top / total
        }
    }
}

fn check_len(grid: &PeriodicGrid, v: &[f64]) -> Result<()> {
    if v.len() != grid.n {
        return Err(Error::InvalidInput(format!("{} values on a grid of {} nodes", v.len(), grid.n)));
    }
    Ok(())
}

/// 𝓜_τ φ on the grid.
pub fn apply_m(values: &[f64], grid: &PeriodicGrid, tau: f64) -> Result<Vec<f64>> {
    apply_m_checked(values, grid, tau, ALIASING_THRESHOLD)
}

pub fn apply_m_checked(values: &[f64], grid: &PeriodicGrid, tau: f64, threshold: f64) -> Result<Vec<f64>> {
    check_len(grid, values)?;
    let op = SpectralOperator::m_tau(*grid, tau);
    let a = op.aliasing_fraction(values);
    if a > threshold {
        return Err(Error::AliasingError(a));
    }
    Ok(op.apply(values))
}

/// ℓ_τ(D)φ, the spectral counterpart of convolution with the kernel.
pub fn apply_l(values: &[f64], grid: &PeriodicGrid, tau: f64) -> Result<Vec<f64>> {
    check_len(grid, values)?;
    Ok(SpectralOperator::new(*grid, |k| symbols::l_real(tau, k)).apply(values))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    pub sup: f64,
    pub l2: f64,
    pub aliasing: f64,
    pub sup_profile: f64,
    #[serde(skip)]
    pub values: Vec<f64>,
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

fn pointwise_residual(op: &SpectralOperator, phi: &[f64], c: f64, bernoulli: f64) -> Vec<f64> {
    let mphi = op.apply(phi);
    mphi.iter().zip(phi).map(|(m, p)| m - c * p + p * p - bernoulli).collect()
}

/// 𝓜φ − cφ + φ² − B with B the profile's constant of integration.
pub fn residual(profile: &WaveProfile, c: f64, tau: f64) -> Result<ResidualReport> {
    let grid = profile.grid;
    check_len(&grid, &profile.values)?;
    let op = SpectralOperator::m_tau(grid, tau);
    let aliasing = op.aliasing_fraction(&profile.values);
    if aliasing > ALIASING_THRESHOLD {
        return Err(Error::AliasingError(aliasing));
    }
    let r = pointwise_residual(&op, &profile.values, c, profile.bernoulli);
    let l2 = (r.iter().map(|x| x * x).sum::<f64>() * grid.dx()).sqrt();
    Ok(ResidualReport { sup: sup(&r), l2, aliasing, sup_profile: sup(&profile.values), values: r })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub gmres_restart: usize,
    pub gmres_max_restarts: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { tol: 1e-11, max_iter: 25, gmres_restart: 80, gmres_max_restarts: 20 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NewtonReport {
    pub profile: WaveProfile,
    /// Sup-norm residual before each step and after the last.
    pub history: Vec<f64>,
    pub iterations: usize,
    /// Sup norm of the first Newton correction, J⁻¹ applied to the initial residual.
    pub first_step: f64,
    pub gmres_iterations: Vec<usize>,
}

fn symmetrize(grid: &PeriodicGrid, v: &mut [f64]) {
    for j in 1..grid.n / 2 {
        let k = grid.mirror(j);
        let a = 0.5 * (v[j] + v[k]);
        v[j] = a;
        v[k] = a;
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Restarted GMRES with modified Gram-Schmidt and Givens rotations, right-preconditioned.
/// Returns the solution and the total number of inner iterations.
fn gmres<A, P>(apply: A, precond: P, b: &[f64], rtol: f64, restart: usize, max_restarts: usize) -> Result<(Vec<f64>, usize)>
where
    A: Fn(&[f64]) -> Vec<f64>,
    P: Fn(&[f64]) -> Vec<f64>,
{
    let n = b.len();
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((x, 0));
    }
    let mut total = 0;
    let mut smallest_diag = f64::INFINITY;
    for _ in 0..max_restarts {
        let ax = apply(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm(&r);
        if beta <= rtol * bnorm {
            return Ok((x, total));
        }
        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|t| t / beta).collect()];
        let mut h = vec![vec![0.0; restart]; restart + 1];
        let mut cs = vec![0.0; restart];
        let mut sn = vec![0.0; restart];
        let mut g = vec![0.0; restart + 1];
        g[0] = beta;
        let mut zs: Vec<Vec<f64>> = Vec::with_capacity(restart);
        let mut k_used = 0;
        for k in 0..restart {
            total += 1;
            let z = precond(&v[k]);
            let mut w = apply(&z);
            zs.push(z);
            for i in 0..=k {
                h[i][k] = dot(&w, &v[i]);
                for (wj, vj) in w.iter_mut().zip(&v[i]) {
                    *wj -= h[i][k] * vj;
                }
            }
            h[k + 1][k] = norm(&w);
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let d = h[k][k].hypot(h[k + 1][k]);
            if d == 0.0 {
                return Err(Error::SingularJacobian(0.0));
            }
            cs[k] = h[k][k] / d;
            sn[k] = h[k + 1][k] / d;
            let hk1 = h[k + 1][k];
            h[k][k] = d;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            smallest_diag = smallest_diag.min(d);
            k_used = k + 1;
            if g[k + 1].abs() <= rtol * bnorm || hk1 == 0.0 {
                break;
            }
            v.push(w.iter().map(|t| t / hk1).collect());
        }
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            for (xi, zi) in x.iter_mut().zip(&zs[j]) {
                *xi += yj * zi;
            }
        }
    }
    let ax = apply(&x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    if norm(&r) <= 10.0 * rtol * bnorm {
        Ok((x, total))
    } else {
        Err(Error::SingularJacobian(smallest_diag))
    }
}

/// Newton iteration for 𝓜φ − cφ + φ² = B on even grid functions. The Jacobian
/// v ↦ 𝓜v − cv + 2φv is applied matrix-free and inverted with GMRES, preconditioned by (𝓜 − c)⁻¹.
// TODO: border the system with a ripple-amplitude constraint so GSW profiles on commensurate boxes converge.
pub fn newton_refine(initial: &WaveProfile, c: f64, tau: f64, opts: &NewtonOptions) -> Result<NewtonReport> {
    let grid = initial.grid;
    check_len(&grid, &initial.values)?;
    if initial.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("initial profile is not finite".into()));
    }
    let op = SpectralOperator::m_tau(grid, tau);
    let min_shift = op.symbol().iter().map(|m| (m - c).abs()).fold(f64::INFINITY, f64::min);
    let mut phi = initial.values.clone();
    symmetrize(&grid, &mut phi);
    let b = initial.bernoulli;
    let mut r = pointwise_residual(&op, &phi, c, b);
    let mut history = vec![sup(&r)];
    let mut gmres_iterations = Vec::new();
    let mut first_step = 0.0;
    let mut it = 0;
    while history[it] >= opts.tol {
        if it == opts.max_iter {
            return Err(Error::NoConvergence { residual: history[it], iterations: it });
        }
        let rhs: Vec<f64> = r.iter().map(|x| -x).collect();
        let phi_ref = &phi;
        let apply = |v: &[f64]| -> Vec<f64> {
            let mv = op.apply(v);
            mv.iter().zip(v).zip(phi_ref).map(|((m, vi), p)| m - c * vi + 2.0 * p * vi).collect()
        };
        let precond = |v: &[f64]| -> Vec<f64> {
            if min_shift > 1e-14 {
                op.apply_shifted_inverse(v, -c)
            } else {
                v.to_vec()
            }
        };
        let rtol = (1e-3 * history[it]).clamp(1e-13, 1e-6);
        let (mut delta, inner) = gmres(apply, precond, &rhs, rtol, opts.gmres_restart, opts.gmres_max_restarts)?;
        symmetrize(&grid, &mut delta);
        gmres_iterations.push(inner);
        if it == 0 {
            first_step = sup(&delta);
        }
        for (p, d) in phi.iter_mut().zip(&delta) {
            *p += d;
        }
        r = pointwise_residual(&op, &phi, c, b);
        history.push(sup(&r));
        it += 1;
        if !history[it].is_finite() {
            return Err(Error::NoConvergence { residual: history[it], iterations: it });
        }
    }
    let mut profile = initial.clone();
    profile.values = phi;
    profile.speed = c;
    profile.meta.refined = true;
    Ok(NewtonReport { profile, history, iterations: it, first_step, gmres_iterations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wavenumbers_are_symmetric() {
        let g = PeriodicGrid::new(16, 2.0 * PI).unwrap();
        let k = g.wavenumbers();
        assert_eq!(k[1], 1.0);
        assert_eq!(k[15], -1.0);
        assert_eq!(k[8], 8.0);
        assert_eq!(g.mirror(0), 0);
        assert_eq!(g.mirror(3), 13);
    }

    #[test]
    fn gmres_solves_a_diagonal_system() {
        let d: Vec<f64> = (1..=30).map(|i| i as f64).collect();
        let b = vec![1.0; 30];
        let (x, _) = gmres(|v| v.iter().zip(&d).map(|(a, b)| a * b).collect(), |v| v.to_vec(), &b, 1e-12, 40, 2).unwrap();
        for (xi, di) in x.iter().zip(&d) {
            assert!((xi * di - 1.0).abs() < 1e-10);
        }
    }
}
