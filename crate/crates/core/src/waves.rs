//! Leading-order generalized (C3) and modulated (C2) solitary-wave profiles on periodic grids.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normalform::{self, C2Envelope, C2Open, GswTruncatedSolution, GswVariant};
use crate::spectral::PeriodicGrid;
use crate::symbols::SymbolParams;

pub const DEFAULT_MU_CEILING: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum WaveKind {
    Gsw,
    Msw,
    /// Read from a file without construction metadata.
    Imported,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveMeta {
    pub kind: WaveKind,
    pub mu: f64,
    /// k on C3.
    pub k: Option<f64>,
    /// Double-root wavenumber on C2.
    pub s: Option<f64>,
    pub kappa: Option<f64>,
    pub theta_star: f64,
    pub rho: Option<f64>,
    /// Amplitude of the sech² core (C3) or of the envelope (C2).
    pub amplitude: f64,
    /// Envelope decay rate in x.
    pub width_rate: f64,
    /// Accumulated Galilean shift.
    pub galilean_v: f64,
    pub refined: bool,
}

impl WaveMeta {
    pub fn imported() -> Self {
        WaveMeta {
            kind: WaveKind::Imported,
            mu: f64::NAN,
            k: None,
            s: None,
            kappa: None,
            theta_star: 0.0,
            rho: None,
            amplitude: f64::NAN,
            width_rate: f64::NAN,
            galilean_v: 0.0,
            refined: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WaveProfile {
    pub grid: PeriodicGrid,
    pub x: Vec<f64>,
    pub values: Vec<f64>,
    pub speed: f64,
    pub tau: f64,
    /// Constant B in 𝓜φ − cφ + φ² = B.
    pub bernoulli: f64,
    pub meta: WaveMeta,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GswParams {
    pub mu: f64,
    pub kprime: f64,
    pub kappa: f64,
    pub theta_star: f64,
    pub guard_constant: f64,
    pub mu_ceiling: f64,
}

impl GswParams {
    pub fn new(mu: f64, kprime: f64, kappa: f64, theta_star: f64) -> Self {
        GswParams { mu, kprime, kappa, theta_star, guard_constant: 1.0, mu_ceiling: DEFAULT_MU_CEILING }
    }

    pub fn k(&self) -> f64 {
        self.kprime * self.mu.abs().powf(-1.0 - 2.0 * self.kappa)
    }

    pub fn rho(&self) -> f64 {
        1.0 + 24.0 * self.k()
    }

    pub fn ripple_amplitude(&self) -> f64 {
        self.mu.abs() * self.k().sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if self.mu == 0.0 || !self.mu.is_finite() {
            return Err(Error::InvalidInput("mu must be finite and nonzero".into()));
        }
        if !(self.kprime > 0.0) || !(0.0..0.5).contains(&self.kappa) {
            return Err(Error::InvalidInput("need k' > 0 and kappa in [0, 1/2)".into()));
        }
        if self.mu.abs() > self.mu_ceiling {
            return Err(Error::CeilingViolation { mu: self.mu.abs(), ceiling: self.mu_ceiling });
        }
        let r = self.ripple_amplitude();
        let bound = self.guard_constant * self.mu.abs().sqrt();
        // k' = 1, kappa = 0 sits exactly on the bound; allow rounding there
        if r < bound * (1.0 - 1e-12) {
            return Err(Error::PersistenceViolation { r, bound });
        }
        Ok(())
    }
}

fn check_ceiling(mu: f64, ceiling: f64) -> Result<()> {
    if mu.abs() > ceiling {
        return Err(Error::CeilingViolation { mu: mu.abs(), ceiling });
    }
    Ok(())
}

/// The truncated C3 solution behind a GSW profile.
pub fn gsw_solution(tau: f64, p: &GswParams) -> Result<GswTruncatedSolution> {
    p.validate()?;
    GswTruncatedSolution::new(tau, p.mu, p.k(), p.theta_star, GswVariant::Printed)
}

/// φ(x) = b sech²(κx) + a0 + |μ|√k cos Θ(x), speed 1 + μ.
pub fn gsw_profile(tau: f64, p: &GswParams, grid: &PeriodicGrid) -> Result<WaveProfile> {
    let sol = gsw_solution(tau, p)?;
    let x = grid.nodes();
    let r = sol.ripple_amplitude();
    let values = x
        .iter()
        .map(|&xi| sol.b / (sol.kappa * xi).cosh().powi(2) + sol.a0 + r * sol.theta(xi).cos())
        .collect();
    Ok(WaveProfile {
        grid: *grid,
        x,
        values,
        speed: 1.0 + p.mu,
        tau,
        bernoulli: 0.0,
        meta: WaveMeta {
            kind: WaveKind::Gsw,
            mu: p.mu,
            k: Some(p.k()),
            s: None,
            kappa: Some(p.kappa),
            theta_star: p.theta_star,
            rho: Some(sol.rho),
            amplitude: sol.b,
            width_rate: sol.kappa,
            galilean_v: 0.0,
            refined: false,
        },
    })
}

/// Splits a GSW profile into (core, pedestal, ripple), which sum to the profile.
pub fn gsw_decompose(tau: f64, p: &GswParams, grid: &PeriodicGrid) -> Result<(Vec<f64>, f64, Vec<f64>)> {
    let sol = gsw_solution(tau, p)?;
    let x = grid.nodes();
    let core = x.iter().map(|&xi| sol.b / (sol.kappa * xi).cosh().powi(2)).collect();
    let ripple = x.iter().map(|&xi| sol.ripple_amplitude() * sol.theta(xi).cos()).collect();
    Ok((core, sol.a0, ripple))
}

/// Period close to `target` on which cos Θ is continuous: Θ(L/2) − Θ(−L/2) ∈ 2πℤ.
pub fn gsw_commensurate_period(tau: f64, p: &GswParams, target: f64) -> Result<f64> {
    let sol = gsw_solution(tau, p)?;
    let g = |l: f64| sol.theta_rate * l + 2.0 * sol.theta_tanh * (0.5 * sol.kappa * l).tanh();
    let dg = |l: f64| sol.theta_rate + sol.theta_tanh * sol.kappa / (0.5 * sol.kappa * l).cosh().powi(2);
    let n = (g(target) / (2.0 * PI)).round().max(1.0);
    let mut l = target;
    for _ in 0..50 {
        let step = (g(l) - 2.0 * PI * n) / dg(l);
        l -= step;
        if step.abs() < 1e-14 * l {
            return Ok(l);
        }
    }
    Err(Error::NoRoot(format!("commensurate period near {target}")))
}

/// Closed-form C2 coefficients with the envelope solution for μ < 0.
pub fn msw_envelope(s: f64, mu: f64, theta_star: f64, open: C2Open) -> Result<C2Envelope> {
    if !(mu < 0.0) {
        return Err(Error::InvalidInput(format!("modulated waves need mu < 0, got {mu}")));
    }
    let coeffs = normalform::nf_coeffs_c2_closed(s)?;
    C2Envelope::new(s, mu, &coeffs, open, theta_star)
}

/// φ(x) = √(−8q0μ/q1) sech(√(q0μ)x) cos(sx + Θ0(x)), speed c0 + μ. Θ* = π gives the depression.
pub fn msw_profile_with(
    s: f64,
    mu: f64,
    theta_star: f64,
    grid: &PeriodicGrid,
    open: C2Open,
    mu_ceiling: f64,
) -> Result<WaveProfile> {
    check_ceiling(mu, mu_ceiling)?;
    let params = SymbolParams::c2(s, mu)?;
    let env = msw_envelope(s, mu, theta_star, open)?;
    let x = grid.nodes();
    let values = x.iter().map(|&xi| 2.0 * env.r0(xi) * (s * xi + env.theta0(xi)).cos()).collect();
    Ok(WaveProfile {
        grid: *grid,
        x,
        values,
        speed: params.c0 + mu,
        tau: params.tau,
        bernoulli: 0.0,
        meta: WaveMeta {
            kind: WaveKind::Msw,
            mu,
            k: None,
            s: Some(s),
            kappa: None,
            theta_star,
            rho: None,
            amplitude: 2.0 * env.amplitude,
            width_rate: env.rate,
            galilean_v: 0.0,
            refined: false,
        },
    })
}

pub fn msw_profile(s: f64, mu: f64, theta_star: f64, grid: &PeriodicGrid) -> Result<WaveProfile> {
    msw_profile_with(s, mu, theta_star, grid, C2Open::default(), DEFAULT_MU_CEILING)
}

/// ψ = φ − v solves 𝓜ψ − (c − 2v)ψ + ψ² = B + (c − 1)v − v² whenever φ solves 𝓜φ − cφ + φ² = B.
pub fn galilean_shift(profile: &WaveProfile, v: f64) -> WaveProfile {
    let mut out = profile.clone();
    for y in out.values.iter_mut() {
        *y -= v;
    }
    out.bernoulli = profile.bernoulli + (profile.speed - 1.0) * v - v * v;
    out.speed = profile.speed - 2.0 * v;
    out.meta.galilean_v += v;
    out
}

/// The shift v = (μ/2)(1 + √ρ) that removes the pedestal of a μ < 0 GSW.
pub fn gsw_pedestal_shift(p: &GswParams) -> f64 {
    0.5 * p.mu * (1.0 + p.rho().sqrt())
}
