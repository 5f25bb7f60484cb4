//! Fourier symbols m(ξ) = ((1 + τξ²) tanh ξ / ξ)^{1/2} and ℓ = 1/m.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Parameter curve a point belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Branch {
    /// Hamiltonian-Hopf curve, carrying the double-root wavenumber s.
    C2(f64),
    C3,
    C4,
    Generic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SymbolParams {
    pub tau: f64,
    pub c0: f64,
    pub mu: f64,
    pub branch: Branch,
}

impl SymbolParams {
    pub fn generic(tau: f64, c0: f64, mu: f64) -> Self {
        SymbolParams { tau, c0, mu, branch: Branch::Generic }
    }

    pub fn c3(tau: f64, mu: f64) -> Result<Self> {
        let p = SymbolParams { tau, c0: 1.0, mu, branch: Branch::C3 };
        p.validate()?;
        Ok(p)
    }

    pub fn c2(s: f64, mu: f64) -> Result<Self> {
        let bp = crate::dispersion::c2_point(s)?;
        Ok(SymbolParams { tau: bp.tau, c0: bp.c0, mu, branch: Branch::C2(s) })
    }

    pub fn alpha(&self) -> f64 {
        1.0 / (self.c0 * self.c0)
    }

    pub fn beta(&self) -> f64 {
        self.tau / (self.c0 * self.c0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) || !(self.c0 > 0.0) {
            return Err(Error::InvalidInput(format!(
                "tau = {} and c0 = {} must be positive",
                self.tau, self.c0
            )));
        }
        match self.branch {
            Branch::C3 => {
                if self.c0 != 1.0 || self.tau >= 1.0 / 3.0 {
                    return Err(Error::DomainError(
                        "C3 requires c0 = 1 and tau < 1/3".into(),
                    ));
                }
            }
            Branch::C4 => {
                if self.c0 != 1.0 || self.tau < 1.0 / 3.0 {
                    return Err(Error::DomainError(
                        "C4 requires c0 = 1 and tau >= 1/3".into(),
                    ));
                }
            }
            Branch::C2(s) => {
                let bp = crate::dispersion::c2_point(s)?;
                let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
                if rel(self.tau, bp.tau) > 1e-12 || rel(self.c0, bp.c0) > 1e-12 {
                    return Err(Error::DomainError(format!(
                        "(tau, c0) = ({}, {}) is not on C2 at s = {}",
                        self.tau, self.c0, s
                    )));
                }
            }
            Branch::Generic => {}
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TaylorData {
    pub sigma: f64,
    pub ell4_0: f64,
    pub eta_star: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct C2Helpers {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
}

/// Half-width of the analyticity strip of ℓ.
pub fn eta_star(tau: f64) -> f64 {
    (1.0 / tau.sqrt()).min(PI / 2.0)
}

// tanh(z)/z = Σ TANHC_COEF[k] z^{2k}
const TANHC_COEF: [f64; 10] = [
    1.0,
    -1.0 / 3.0,
    2.0 / 15.0,
    -17.0 / 315.0,
    62.0 / 2835.0,
    -1382.0 / 155925.0,
    21844.0 / 6081075.0,
    -929569.0 / 638512875.0,
    6404582.0 / 10854718875.0,
    -443861162.0 / 1856156927625.0,
];

const SERIES_RADIUS: f64 = 1e-2;

fn tanhc_series<T>(z2: T) -> T
where
    T: Copy + std::ops::Mul<Output = T> + std::ops::Add<f64, Output = T> + std::ops::Mul<f64, Output = T>,
{
    let mut acc = z2 * 0.0 + TANHC_COEF[9];
    for c in TANHC_COEF[..9].iter().rev() {
        acc = acc * z2 + *c;
    }
    acc
}

/// tanh on the complex plane without overflow for large |Re z|.
pub fn ctanh(z: Complex64) -> Complex64 {
    if z.re.abs() < 20.0 {
        z.tanh()
    } else if z.re > 0.0 {
        let e = (-2.0 * z).exp();
        (1.0 - e) / (1.0 + e)
    } else {
        -ctanh(-z)
    }
}

fn canonical(z: Complex64) -> Complex64 {
    if z.re < 0.0 || (z.re == 0.0 && z.im < 0.0) {
        -z
    } else {
        Complex64::new(z.re.abs(), z.im)
    }
}

fn check_strip(tau: f64, z: Complex64) -> Result<()> {
    let es = eta_star(tau);
    if !(z.im.abs() < es) {
        return Err(Error::StripViolation { im: z.im.abs(), eta_star: es });
    }
    Ok(())
}

/// (1 + τz²) tanh(z)/z, the square of m.
pub fn radicand(tau: f64, z: Complex64) -> Complex64 {
    let z = canonical(z);
    let z2 = z * z;
    let t = if z.norm() < SERIES_RADIUS { tanhc_series(z2) } else { ctanh(z) / z };
    (1.0 + tau * z2) * t
}

pub fn m_eval(tau: f64, z: Complex64) -> Result<Complex64> {
    check_strip(tau, z)?;
    Ok(radicand(tau, z).sqrt())
}

pub fn l_eval(tau: f64, z: Complex64) -> Result<Complex64> {
    Ok(1.0 / m_eval(tau, z)?)
}

/// m on the real line.
pub fn m_real(tau: f64, x: f64) -> f64 {
    let x = x.abs();
    let x2 = x * x;
    let t = if x < SERIES_RADIUS { tanhc_series(x2) } else { x.tanh() / x };
    ((1.0 + tau * x2) * t).sqrt()
}

/// ℓ on the real line.
pub fn l_real(tau: f64, x: f64) -> f64 {
    1.0 / m_real(tau, x)
}

/// Logarithmic derivative ℓ'/ℓ = -(1/2) d/dz log((1 + τz²) tanh z / z).
pub fn l_log_deriv(tau: f64, z: Complex64) -> Complex64 {
    let flip = z.re < 0.0;
    let w = if flip { -z } else { z };
    let s = if w.norm() < SERIES_RADIUS {
        let w2 = w * w;
        w * (-2.0 / 3.0 + w2 * (14.0 / 45.0 - w2 * (124.0 / 945.0)))
    } else if w.re > 20.0 {
        let e = (-2.0 * w).exp();
        4.0 * e / (1.0 - e * e) - 1.0 / w
    } else {
        2.0 / (2.0 * w).sinh() - 1.0 / w
    };
    let r = 2.0 * tau * w / (1.0 + tau * w * w) + s;
    let v = -0.5 * r;
    if flip {
        -v
    } else {
        v
    }
}

const CAUCHY_POINTS: usize = 64;

/// n-th derivative of ℓ at a real point, by a Cauchy integral on a circle.
pub fn l_deriv(tau: f64, x: f64, n: usize) -> Result<f64> {
    if n > 4 {
        return Err(Error::OrderTooHigh(n));
    }
    if n == 0 {
        return Ok(l_real(tau, x));
    }
    if x == 0.0 && n % 2 == 1 {
        return Ok(0.0);
    }
    let r = (0.5 * eta_star(tau)).min(0.5);
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..CAUCHY_POINTS {
        let th = 2.0 * PI * k as f64 / CAUCHY_POINTS as f64;
        let w = Complex64::from_polar(1.0, th);
        let f = l_eval(tau, x + r * w)?;
        acc += f * Complex64::from_polar(1.0, -(n as f64) * th);
    }
    let fact = [1.0, 1.0, 2.0, 6.0, 24.0][n];
    Ok(acc.re * fact / (CAUCHY_POINTS as f64 * r.powi(n as i32)))
}

pub fn taylor_data(tau: f64) -> Result<TaylorData> {
    Ok(TaylorData {
        sigma: 1.0 / (1.0 / 3.0 - tau),
        ell4_0: l_deriv(tau, 0.0, 4)?,
        eta_star: eta_star(tau),
    })
}

pub fn c2_helpers(s: f64, params: &SymbolParams) -> Result<C2Helpers> {
    match params.branch {
        Branch::C2(bs) if (bs - s).abs() <= 1e-14 * s.abs().max(1.0) => {}
        _ => return Err(Error::InvalidInput("c2_helpers needs C2 parameters for the same s".into())),
    }
    if !(s > 0.0) {
        return Err(Error::InvalidInput("s must be positive".into()));
    }
    let (tau, c0) = (params.tau, params.c0);
    let l2 = l_real(tau, 2.0 * s);
    let l3 = l_real(tau, 3.0 * s);
    let den1 = 1.0 - c0;
    let den2 = 1.0 - c0 * l2;
    let den3 = 1.0 - c0 * l3;
    if den1 == 0.0 || den2 == 0.0 || den3 == 0.0 {
        return Err(Error::DomainError("1 - c0 l vanishes at a harmonic of s".into()));
    }
    let h = 0.5 / c0;
    Ok(C2Helpers {
        a: h * (1.0 - 1.0 / den1),
        b: h * (1.0 - 1.0 / den2),
        c: l_deriv(tau, 2.0 * s, 1)? / (den2 * den2),
        d: h * (1.0 - 1.0 / den3),
        e: 1.0 / (c0 * c0 * l_deriv(tau, s, 2)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn m_at_origin_is_one() {
        let v = m_eval(0.2, Complex64::new(0.0, 0.0)).unwrap();
        assert_eq!(v, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn m_at_one_matches_direct_formula() {
        let v = m_eval(0.2, Complex64::new(1.0, 0.0)).unwrap();
        assert!((v.re - (1.2 * 1f64.tanh()).sqrt()).abs() < 1e-15);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn strip_is_enforced() {
        let e = m_eval(0.2, Complex64::new(0.0, 1.6)).unwrap_err();
        assert!(matches!(e, Error::StripViolation { .. }));
    }

    #[test]
    fn series_and_closed_form_meet_at_switch() {
        let z = Complex64::new(0.0099, 0.003);
        let a = (1.0 + 0.2 * z * z) * tanhc_series(z * z);
        let b = (1.0 + 0.2 * z * z) * z.tanh() / z;
        assert!((a - b).norm() < 1e-14);
    }

    #[test]
    fn log_derivative_matches_difference_quotient() {
        let tau = 0.2;
        for &z in &[Complex64::new(1.3, 0.4), Complex64::new(-2.0, -0.7), Complex64::new(0.005, 0.002), Complex64::new(30.0, 0.5)] {
            let h = 1e-6;
            let lp = (l_eval(tau, z + h).unwrap() - l_eval(tau, z - h).unwrap()) / (2.0 * h);
            let want = lp / l_eval(tau, z).unwrap();
            let got = l_log_deriv(tau, z);
            assert!((got - want).norm() < 1e-7 * want.norm().max(1e-2), "{z}: {got} vs {want}");
        }
    }

    #[test]
    fn order_five_is_rejected() {
        assert_eq!(l_deriv(0.2, 0.0, 5).unwrap_err(), Error::OrderTooHigh(5));
    }
}
