//! Convolution kernel K = F^{-1} ℓ, evaluated as (1/π) ∫_0^∞ ℓ(ξ) cos(xξ) dξ.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::{linear_fit, GaussRule};
use crate::symbols;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum KernelMethod {
    /// Bessel closed form for τ^{-1/2}(a² + ξ²)^{-1/4} plus a contour-shifted remainder.
    SplitAsymptotic,
    /// Full ℓ on a shifted contour with a smooth tanh cutoff.
    WindowedQuadrature,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelSamples {
    pub x: Vec<f64>,
    pub k: Vec<f64>,
    pub tau: f64,
    pub method: KernelMethod,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KernelDiagnostics {
    pub tau: f64,
    /// Intercept of the linear fit of √x K(x) against √x on [1e-4, 1e-3].
    pub singular_constant: f64,
    /// √x K(x) at x = 1e-4.
    pub singular_raw: f64,
    /// Slope of the same fit, the constant term of K at the origin.
    pub regular_part: f64,
    pub expected_constant: f64,
    pub decay_rate: f64,
    pub eta_star: f64,
    pub mass: f64,
}

const SPLIT_A: f64 = 2.0;
const GAMMA_QUARTER: f64 = 3.625_609_908_221_908_3;
const TAIL_TERMS: usize = 6;

/// K_{1/4}(z) = ∫_0^∞ exp(-z cosh t) cosh(t/4) dt, trapezoid in t.
pub fn bessel_k_quarter(z: f64) -> f64 {
    let h: f64 = 0.05;
    let mut s = 0.5 * (-z).exp();
    let mut t = h;
    loop {
        let e = z * t.cosh();
        if e > 745.0 {
            break;
        }
        s += (-e).exp() * (0.25 * t).cosh();
        t += h;
    }
    s * h
}

/// Inverse transform of τ^{-1/2}(a² + ξ²)^{-1/4}.
fn lead_transform(tau: f64, x: f64) -> f64 {
    let a = SPLIT_A;
    (1.0 / tau.sqrt()) / PI * PI.sqrt() / GAMMA_QUARTER * (2.0 * a / x).powf(0.25) * bessel_k_quarter(a * x)
}

fn lead_symbol(tau: f64, z: Complex64) -> Complex64 {
    (SPLIT_A * SPLIT_A + z * z).powf(-0.25) / tau.sqrt()
}

/// ℓ with tanh replaced by 1, valid to machine precision for Re z > 40.
fn l_far(tau: f64, z: Complex64) -> Complex64 {
    ((1.0 + tau * z * z) / z).powf(-0.5)
}

/// Oscillatory integral ∫_0^∞ f(ξ) e^{ixξ} dξ with panels growing geometrically to 8/x,
/// truncated at Ξ, plus an integration-by-parts tail from derivatives of `far` at Ξ.
fn oscillatory<F, G>(x: f64, f: F, far: G, upper: f64) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
    G: Fn(Complex64) -> Complex64,
{
    let rule = GaussRule::new(16);
    let w0 = 0.5;
    let cap = 8.0 / x;
    let mut a = 0.0;
    let mut acc = Complex64::new(0.0, 0.0);
    while a < upper {
        let w = (0.25 * a).max(w0).min(cap).min(upper - a);
        let b = a + w;
        for (xi, wi) in rule.nodes(a, b) {
            acc += wi * f(xi) * Complex64::from_polar(1.0, x * xi);
        }
        a = b;
    }
    // tail: -e^{ixΞ} Σ (-1)^n f^{(n)}(Ξ) / (ix)^{n+1}
    let rad = upper / 4.0;
    let npts = 32;
    let mut derivs = [Complex64::new(0.0, 0.0); TAIL_TERMS];
    for k in 0..npts {
        let th = 2.0 * PI * k as f64 / npts as f64;
        let w = Complex64::from_polar(1.0, th);
        let v = far(upper + rad * w);
        for (n, d) in derivs.iter_mut().enumerate() {
            *d += v * w.powi(-(n as i32));
        }
    }
    let mut fact = 1.0;
    let ix = Complex64::new(0.0, x);
    let mut tail = Complex64::new(0.0, 0.0);
    let mut last = 0.0;
    for (n, d) in derivs.iter().enumerate() {
        if n > 0 {
            fact *= n as f64;
        }
        let dn = d * fact / (npts as f64 * rad.powi(n as i32));
        let term = dn * if n % 2 == 0 { 1.0 } else { -1.0 } / ix.powi(n as i32 + 1);
        tail += term;
        last = term.norm();
    }
    if last > 1e-5 {
        return Err(Error::AccuracyLoss(format!("oscillatory tail term {last:e} at x = {x}")));
    }
    Ok(acc - Complex64::from_polar(1.0, x * upper) * tail)
}

fn kernel_split(tau: f64, x: f64) -> Result<f64> {
    let eta0 = 0.9 * symbols::eta_star(tau);
    let shift = Complex64::new(0.0, eta0);
    let rem = |xi: f64| {
        let z = xi + shift;
        symbols::l_eval(tau, z).unwrap_or_default() - lead_symbol(tau, z)
    };
    let rem_far = |z: Complex64| l_far(tau, z + shift) - lead_symbol(tau, z + shift);
    let upper = (50.0 / x).max(200.0);
    let i = oscillatory(x, rem, rem_far, upper)?;
    Ok(lead_transform(tau, x) + (-eta0 * x).exp() / PI * i.re)
}

fn kernel_windowed(tau: f64, x: f64) -> Result<f64> {
    let eta2 = 0.5 * symbols::eta_star(tau);
    let shift = Complex64::new(0.0, eta2);
    let delta = 24.0 / x;
    let centre = 20.0 * delta;
    let window = |xi: f64| 0.5 * (1.0 + ((centre - xi) / delta).tanh());
    let f = |xi: f64| symbols::l_eval(tau, xi + shift).unwrap_or_default() * window(xi);
    let upper = centre + 20.0 * delta;
    // the window has already removed the tail
    let i = oscillatory(x, f, |_| Complex64::new(0.0, 0.0), upper)?;
    Ok((-eta2 * x).exp() / PI * i.re)
}

pub fn kernel_eval_with(tau: f64, x: f64, method: KernelMethod) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidInput(format!("kernel abscissa x = {x} must be positive")));
    }
    if !(tau > 0.0) {
        return Err(Error::InvalidInput(format!("tau = {tau} must be positive")));
    }
    match method {
        KernelMethod::SplitAsymptotic => kernel_split(tau, x),
        KernelMethod::WindowedQuadrature => kernel_windowed(tau, x),
    }
}

pub fn kernel_eval(tau: f64, x: f64) -> Result<f64> {
    kernel_eval_with(tau, x, KernelMethod::SplitAsymptotic)
}

pub fn kernel_samples(tau: f64, xs: &[f64], method: KernelMethod) -> Result<KernelSamples> {
    let k = xs.iter().map(|&x| kernel_eval_with(tau, x, method)).collect::<Result<Vec<_>>>()?;
    Ok(KernelSamples { x: xs.to_vec(), k, tau, method })
}

/// ∫_ℝ K dx, via x = u² on [0, 40].
pub fn kernel_mass(tau: f64) -> Result<f64> {
    let rule = GaussRule::new(16);
    let umax = 40f64.sqrt();
    let panels = 48;
    let mut s = 0.0;
    for p in 0..panels {
        let a = umax * p as f64 / panels as f64;
        let b = umax * (p + 1) as f64 / panels as f64;
        for (u, w) in rule.nodes(a, b) {
            s += w * 2.0 * u * kernel_eval(tau, u * u)?;
        }
    }
    Ok(2.0 * s)
}

pub fn kernel_diagnostics(tau: f64) -> Result<KernelDiagnostics> {
    let expected = 1.0 / (2.0 * PI * tau).sqrt();
    let n = 10;
    let mut sx = Vec::with_capacity(n);
    let mut sk = Vec::with_capacity(n);
    for i in 0..n {
        let x = 1e-4 * 10f64.powf(i as f64 / (n - 1) as f64);
        sx.push(x.sqrt());
        sk.push(x.sqrt() * kernel_eval(tau, x)?);
    }
    let (slope, intercept) = linear_fit(&sx, &sk);
    let mut dx = Vec::new();
    let mut dk = Vec::new();
    for i in 0..=20 {
        let x = 5.0 + 0.5 * i as f64;
        dx.push(x);
        dk.push(kernel_eval(tau, x)?.abs().ln());
    }
    let (rate, _) = linear_fit(&dx, &dk);
    Ok(KernelDiagnostics {
        tau,
        singular_constant: intercept,
        singular_raw: sk[0],
        regular_part: slope,
        expected_constant: expected,
        decay_rate: -rate,
        eta_star: symbols::eta_star(tau),
        mass: kernel_mass(tau)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bessel_quarter_matches_reference_values() {
        // K_{1/4}(1) and K_{1/4}(0.01) from the integral representation at high resolution
        let fine = |z: f64| {
            let h: f64 = 1e-3;
            let mut s = 0.5 * (-z as f64).exp();
            let mut t = h;
            while z * t.cosh() < 745.0 {
                s += (-z * t.cosh()).exp() * (0.25 * t).cosh();
                t += h;
            }
            s * h
        };
        for &z in &[1e-4, 0.01, 1.0, 30.0] {
            assert!((bessel_k_quarter(z) - fine(z)).abs() < 1e-13 * fine(z));
        }
    }

    #[test]
    fn bessel_small_argument_asymptote() {
        let z = 1e-8;
        let want = 0.5 * GAMMA_QUARTER * (z / 2.0f64).powf(-0.25);
        assert!((bessel_k_quarter(z) / want - 1.0).abs() < 1e-3);
    }
}
