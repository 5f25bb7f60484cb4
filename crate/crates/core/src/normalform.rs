//! Normal-form coefficients on C3 (0²⁺(ik0)) and C2 ((is)²), the truncated normal-form
//! fields and their explicit homoclinic solutions.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::Serialize;

use crate::dispersion;
use crate::error::{Error, Result};
use crate::reduction::CmCoeffs;
use crate::symbols::{self, SymbolParams};

type C = Complex64;
type V4 = Vector4<C>;

const I: C = C::new(0.0, 1.0);

fn re(x: f64) -> C {
    C::new(x, 0.0)
}

fn v4(a: [C; 4]) -> V4 {
    V4::new(a[0], a[1], a[2], a[3])
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NfCoeffsC3 {
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub q0: f64,
    pub q1: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum NfRoute {
    ClosedForm,
    PsiFormula,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NfCoeffsC2 {
    pub q0: f64,
    pub q1: f64,
    pub route: NfRoute,
}

/// Linear part and (generalized) eigenvectors of the reduced systems.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NfBasis {
    pub omega: f64,
    pub l: [[f64; 4]; 4],
    pub vectors: Vec<(String, [C; 4])>,
}

fn mat(l: &[[f64; 4]; 4]) -> Matrix4<C> {
    Matrix4::from_fn(|i, j| re(l[i][j]))
}

pub fn l_matrix_c3(k0: f64) -> [[f64; 4]; 4] {
    [[0.0, 1.0, 0.0, 0.0], [0.0; 4], [0.0, 0.0, 0.0, k0], [0.0, 0.0, -k0, 0.0]]
}

pub fn l_matrix_c2(s: f64) -> [[f64; 4]; 4] {
    [[0.0, 1.0, s, 0.0], [0.0, 0.0, 0.0, s], [-s, 0.0, 0.0, 1.0], [0.0, -s, 0.0, 0.0]]
}

pub fn nf_basis_c3(k0: f64) -> NfBasis {
    let z = re(0.0);
    let o = re(1.0);
    NfBasis {
        omega: k0,
        l: l_matrix_c3(k0),
        vectors: vec![
            ("xi0".into(), [o, z, z, z]),
            ("xi1".into(), [z, o, z, z]),
            ("zeta".into(), [z, z, o, I]),
        ],
    }
}

pub fn nf_basis_c2(s: f64) -> NfBasis {
    let z = re(0.0);
    let o = re(1.0);
    NfBasis {
        omega: s,
        l: l_matrix_c2(s),
        vectors: vec![
            ("zeta0".into(), [o, z, I, z]),
            ("zeta1".into(), [z, o, z, I]),
            ("zeta1_star".into(), [z, re(0.5), z, -0.5 * I]),
        ],
    }
}

impl NfBasis {
    fn vec(&self, name: &str) -> V4 {
        v4(self.vectors.iter().find(|v| v.0 == name).expect("basis vector").1)
    }

    /// Largest violation of the eigen-identities: 𝐋ξ0 = 0, 𝐋ξ1 = ξ0, 𝐋ζ = ik0ζ on C3;
    /// (𝐋-is)ζ0 = 0, (𝐋-is)ζ1 = ζ0 and ζ1* ⟂ range(𝐋-is) on C2.
    pub fn identity_residual(&self) -> f64 {
        let l = mat(&self.l);
        let w = self.omega;
        if self.vectors[0].0 == "xi0" {
            let (x0, x1, z) = (self.vec("xi0"), self.vec("xi1"), self.vec("zeta"));
            let r = [(l * x0).norm(), (l * x1 - x0).norm(), (l * z - z * (I * w)).norm()];
            r.iter().fold(0.0, |a, b| a.max(*b))
        } else {
            let (z0, z1, zs) = (self.vec("zeta0"), self.vec("zeta1"), self.vec("zeta1_star"));
            let m = l - Matrix4::identity() * (I * w);
            let mut r = (m * z0).norm().max((m * z1 - z0).norm());
            // orthogonality to the range: ζ1*ᵀ(𝐋 - is) = 0, with ⟨ζ1, ζ1*⟩ = 1
            let row = zs.transpose() * m;
            r = r.max(row.norm()).max((zs.dot(&z1) - C::new(1.0, 0.0)).norm());
            r
        }
    }
}

/// Bilinear pairing Σ u_j v_j; ζ1* is dual to ζ1 under it.
fn pair(u: &V4, v: &V4) -> C {
    (0..4).map(|j| u[j] * v[j]).sum()
}

/// Coordinates in the basis given by the columns of `b`.
fn coords(b: &Matrix4<C>, u: &V4) -> Result<V4> {
    b.lu().solve(u).ok_or_else(|| Error::SingularJacobian(0.0))
}

// ---- C3 ----

/// H of the quadratic part on C3, bilinear in (x, y, z, w).
fn h_c3(p: &CmCoeffs, u: &V4, v: &V4) -> Result<C> {
    Ok(re(p.get("20000")?) * u[0] * v[0]
        + re(0.5 * p.get("10100")?) * (u[0] * v[2] + u[2] * v[0])
        + re(p.get("02000")?) * u[1] * v[1]
        + re(0.5 * p.get("01010")?) * (u[1] * v[3] + u[3] * v[1])
        + re(p.get("00200")?) * u[2] * v[2]
        + re(p.get("00020")?) * u[3] * v[3])
}

fn r20_c3(k0: f64, p: &CmCoeffs, u: &V4, v: &V4) -> Result<V4> {
    let h = h_c3(p, u, v)?;
    let k3 = k0.powi(3);
    Ok(v4([re(0.0), h * k0 / k3, re(0.0), -h / k3]))
}

fn r11_c3(k0: f64, p: &CmCoeffs, u: &V4) -> Result<V4> {
    let g = re(p.get("10001")?) * u[0] + re(p.get("00101")?) * u[2];
    let k3 = k0.powi(3);
    Ok(v4([re(0.0), g * k0 / k3, re(0.0), -g / k3]))
}

pub fn nf_coeffs_c3_closed(tau: f64) -> Result<NfCoeffsC3> {
    let k0 = dispersion::solve_k0(tau)?;
    let sigma = symbols::taylor_data(tau)?.sigma;
    let l1 = symbols::l_deriv(tau, k0, 1)?;
    Ok(NfCoeffsC3 { p0: 0.0, p1: 2.0 * sigma, p2: -2.0 * sigma, p3: -4.0 * sigma, q0: -1.0 / l1, q1: 2.0 / l1 })
}

/// Solvability conditions: ξ1 is not in the range of 𝐋 and ζ is not in the range of 𝐋 - ik0.
pub fn nf_coeffs_c3_solvability(tau: f64, psis: &CmCoeffs) -> Result<NfCoeffsC3> {
    let k0 = dispersion::solve_k0(tau)?;
    let basis = nf_basis_c3(k0);
    let (x0, x1, z) = (basis.vec("xi0"), basis.vec("xi1"), basis.vec("zeta"));
    let b = Matrix4::from_columns(&[x0, x1, z, z.conjugate()]);
    let along = |u: V4, k: usize| -> Result<C> { Ok(coords(&b, &u)?[k]) };
    // 𝐋φ00001 = p0 ξ1 - 𝐑01 with 𝐑01 = 0
    let p0 = 0.0;
    let p1 = along(r11_c3(k0, psis, &x0)?, 1)?;
    let p2 = along(r20_c3(k0, psis, &x0, &x0)?, 1)?;
    let p3 = along(r20_c3(k0, psis, &z, &z.conjugate())? * re(2.0), 1)?;
    // iq ζ must cancel the ζ-component of the forcing
    let q0 = along(r11_c3(k0, psis, &z)?, 2)? / I;
    let q1 = along(r20_c3(k0, psis, &x0, &z)? * re(2.0), 2)? / I;
    for (name, v) in [("p1", p1), ("p2", p2), ("p3", p3), ("q0", q0), ("q1", q1)] {
        if v.im.abs() > 1e-9 * v.re.abs().max(1.0) {
            return Err(Error::RouteMismatch { what: format!("{name} imaginary part"), a: v.re, b: v.im });
        }
    }
    Ok(NfCoeffsC3 { p0, p1: p1.re, p2: p2.re, p3: p3.re, q0: q0.re, q1: q1.re })
}

/// Both routes; RouteMismatch beyond 1e-10 relative.
pub fn nf_coeffs_c3(tau: f64, psis: &CmCoeffs) -> Result<(NfCoeffsC3, NfCoeffsC3)> {
    let a = nf_coeffs_c3_closed(tau)?;
    let b = nf_coeffs_c3_solvability(tau, psis)?;
    let pairs = [("p1", a.p1, b.p1), ("p2", a.p2, b.p2), ("p3", a.p3, b.p3), ("q0", a.q0, b.q0), ("q1", a.q1, b.q1)];
    for (what, x, y) in pairs {
        if rel_diff(x, y) > 1e-10 {
            return Err(Error::RouteMismatch { what: what.into(), a: x, b: y });
        }
    }
    if b.p0 != 0.0 {
        return Err(Error::RouteMismatch { what: "p0".into(), a: 0.0, b: b.p0 });
    }
    Ok((a, b))
}

// ---- C2 ----

fn lookup(p: &CmCoeffs, name: &str, weight: C) -> Result<C> {
    // only coefficients multiplying a nonzero monomial are needed
    if weight == re(0.0) {
        Ok(re(0.0))
    } else {
        Ok(re(p.get(name)?) * weight)
    }
}

fn h2_c2(p: &CmCoeffs, u: &V4, v: &V4) -> Result<C> {
    Ok(lookup(p, "20000", u[0] * v[0])?
        + lookup(p, "02000", u[1] * v[1])?
        + lookup(p, "00200", u[2] * v[2])?
        + lookup(p, "00020", u[3] * v[3])?
        + lookup(p, "10010", 0.5 * (u[0] * v[3] + v[0] * u[3]))?
        + lookup(p, "01100", 0.5 * (u[1] * v[2] + v[1] * u[2]))?)
}

/// Cubic form restricted to arguments with vanishing B and D components, where only
/// ψ30000 and ψ10200 enter.
fn h3_c2(p: &CmCoeffs, u: &V4, v: &V4, w: &V4) -> Result<C> {
    let zero = re(0.0);
    if [u, v, w].iter().any(|a| a[1] != zero || a[3] != zero) {
        return Err(Error::InvalidInput("cubic form needs arguments in span{e1, e3}".into()));
    }
    let sym = (u[0] * v[2] * w[2] + v[0] * u[2] * w[2] + w[0] * u[2] * v[2]) / 3.0;
    Ok(lookup(p, "30000", u[0] * v[0] * w[0])? + lookup(p, "10200", sym)?)
}

fn embed_c2(s: f64, h: C) -> V4 {
    let f = 1.0 / (2.0 * s.powi(3));
    v4([re(0.0), -s * f * h, f * h, re(0.0)])
}

/// Internal vectors of the normal-form transformation, solved numerically.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct C2PhiVectors {
    pub phi00001: [C; 4],
    pub phi10100: [C; 4],
    pub phi20000: [C; 4],
}

fn arr(v: &V4) -> [C; 4] {
    [v[0], v[1], v[2], v[3]]
}

pub fn c2_phi_vectors(s: f64, psis: &CmCoeffs) -> Result<C2PhiVectors> {
    let basis = nf_basis_c2(s);
    let l = mat(&basis.l);
    let z0 = basis.vec("zeta0");
    let solve = |m: Matrix4<C>, rhs: V4| -> Result<V4> {
        m.lu().solve(&rhs).ok_or_else(|| Error::SingularJacobian(0.0))
    };
    // 𝐑01 = 0 since H0 = 0
    let phi0 = solve(l, V4::zeros())?;
    let phi1 = solve(l, -embed_c2(s, h2_c2(psis, &z0, &z0.conjugate())?) * re(2.0))?;
    let m2 = l - Matrix4::identity() * (2.0 * I * s);
    let phi2 = solve(m2, -embed_c2(s, h2_c2(psis, &z0, &z0)?))?;
    Ok(C2PhiVectors { phi00001: arr(&phi0), phi10100: arr(&phi1), phi20000: arr(&phi2) })
}

/// The φ vectors in the displayed closed form, with ψ00200 in the prefactors.
pub fn c2_phi_vectors_displayed(s: f64, psis: &CmCoeffs) -> Result<C2PhiVectors> {
    let (p20, p02) = (psis.get("20000")?, psis.get("00200")?);
    let k1 = (p20 + p02) / s.powi(3);
    let k2 = (p20 - p02) / (9.0 * s.powi(4));
    let z = re(0.0);
    Ok(C2PhiVectors {
        phi00001: [z; 4],
        phi10100: [re(2.0 * k1 / s), z, z, re(k1)],
        phi20000: [re(k2), I * 3.0 * s * k2, -I * k2, re(-1.5 * s * k2)],
    })
}

/// q0, q1 from the pairings with ζ1*, using numerically solved φ vectors.
pub fn nf_coeffs_c2_pairing(s: f64, psis: &CmCoeffs) -> Result<NfCoeffsC2> {
    let basis = nf_basis_c2(s);
    let (z0, zs) = (basis.vec("zeta0"), basis.vec("zeta1_star"));
    let phi = c2_phi_vectors(s, psis)?;
    let (p0, p1, p2) = (v4(phi.phi00001), v4(phi.phi10100), v4(phi.phi20000));
    let h1 = re(psis.get("10001")?) * z0[0] + lookup(psis, "00011", z0[3])?;
    let q0 = pair(&(embed_c2(s, h1) + embed_c2(s, h2_c2(psis, &z0, &p0)?) * re(2.0)), &zs);
    let f = embed_c2(s, h2_c2(psis, &z0, &p1)?) * re(2.0)
        + embed_c2(s, h2_c2(psis, &z0.conjugate(), &p2)?) * re(2.0)
        + embed_c2(s, h3_c2(psis, &z0, &z0, &z0.conjugate())?) * re(3.0);
    let q1 = pair(&f, &zs);
    for (name, v) in [("q0", q0), ("q1", q1)] {
        if v.im.abs() > 1e-9 * v.re.abs().max(1.0) {
            return Err(Error::RouteMismatch { what: format!("{name} imaginary part"), a: v.re, b: v.im });
        }
    }
    Ok(NfCoeffsC2 { q0: q0.re, q1: q1.re, route: NfRoute::PsiFormula })
}

/// The displayed scalar formulas for q0 and q1 in terms of the ψ's.
pub fn nf_coeffs_c2_psi_formula(s: f64, psis: &CmCoeffs) -> Result<NfCoeffsC2> {
    let g = |n: &str| psis.get(n);
    let (p20, p02, p1001, p0110) = (g("20000")?, g("00200")?, g("10010")?, g("01100")?);
    let q0 = -g("10001")? / (4.0 * s * s);
    let q1 = -(p20 + p02) / (2.0 * s.powi(5)) * (2.0 / s * p20 + p1001 / 2.0)
        - (p20 - p02) / (18.0 * s.powi(6)) * (p20 - p02 + 1.5 * s * p0110 - 0.75 * s * p0110)
        - 3.0 / (4.0 * s * s) * (g("30000")? + g("10200")? / 3.0);
    Ok(NfCoeffsC2 { q0, q1, route: NfRoute::PsiFormula })
}

pub fn nf_coeffs_c2_closed(s: f64) -> Result<NfCoeffsC2> {
    let p = SymbolParams::c2(s, 0.0)?;
    let l2s = symbols::l_real(p.tau, 2.0 * s);
    let lpp = symbols::l_deriv(p.tau, s, 2)?;
    let d = p.c0 * p.c0 * lpp;
    Ok(NfCoeffsC2 {
        q0: 2.0 / d,
        q1: (4.0 / (1.0 / l2s - p.c0) + 8.0 / (1.0 - p.c0)) / d,
        route: NfRoute::ClosedForm,
    })
}

/// PsiFormula and ClosedForm routes; RouteMismatch beyond 1e-8 relative.
pub fn nf_coeffs_c2(s: f64, psis: &CmCoeffs) -> Result<(NfCoeffsC2, NfCoeffsC2)> {
    let a = nf_coeffs_c2_psi_formula(s, psis)?;
    let b = nf_coeffs_c2_closed(s)?;
    for (what, x, y) in [("q0", a.q0, b.q0), ("q1", a.q1, b.q1)] {
        if rel_diff(x, y) > 1e-8 {
            return Err(Error::RouteMismatch { what: what.into(), a: x, b: y });
        }
    }
    Ok((a, b))
}

// ---- truncated fields and explicit solutions ----

/// Right-hand side of the truncated C3 normal form in the state (𝐀, 𝐁, 𝐂).
pub fn truncated_field_c3(state: (f64, f64, C), mu: f64, k0: f64, c: &NfCoeffsC3) -> (f64, f64, C) {
    let (a, b, cc) = state;
    let da = b;
    let db = c.p0 * mu + c.p1 * mu * a + c.p2 * a * a + c.p3 * cc.norm_sqr();
    let dc = I * k0 * cc + I * cc * (c.q0 * mu + c.q1 * a);
    (da, db, dc)
}

/// Coefficients of P and Q in the C2 normal form that are not computed here; they default to zero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct C2Open {
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
    pub q2: f64,
}

/// Right-hand side of the C2 normal form truncated at cubic order, state (𝐀, 𝐁).
pub fn truncated_field_c2(state: (C, C), mu: f64, s: f64, c: &NfCoeffsC2, open: &C2Open) -> (C, C) {
    let (a, b) = state;
    let cross = 0.5 * I * (a * b.conj() - a.conj() * b);
    let p = re(open.p0 * mu + open.p1 * a.norm_sqr()) + re(open.p2) * cross;
    let q = re(c.q0 * mu + c.q1 * a.norm_sqr()) + re(open.q2) * cross;
    let da = I * s * a + b + I * a * p;
    let db = I * s * b + I * b * p + a * q;
    (da, db)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GswVariant {
    /// ρ = 1 + 24k with the displayed phase.
    Printed,
    /// ρ = 1 - 8k and the phase obtained by integrating Θ' along the solution; real only for k ≤ 1/8.
    SelfConsistent,
}

/// The explicit C3 family: 𝐀 = a0 + b sech²(κt), 𝐂 = |μ|√k e^{iΘ(t)}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GswTruncatedSolution {
    pub variant: GswVariant,
    pub mu: f64,
    pub k: f64,
    pub rho: f64,
    pub sigma: f64,
    pub k0: f64,
    pub l1: f64,
    pub theta_star: f64,
    pub a0: f64,
    pub b: f64,
    pub kappa: f64,
    /// Asymptotic slope of Θ.
    pub theta_rate: f64,
    /// Coefficient of tanh(κt) in Θ.
    pub theta_tanh: f64,
}

impl GswTruncatedSolution {
    pub fn new(tau: f64, mu: f64, k: f64, theta_star: f64, variant: GswVariant) -> Result<Self> {
        if mu == 0.0 || !(k > 0.0) {
            return Err(Error::InvalidInput("need mu != 0 and k > 0".into()));
        }
        let k0 = dispersion::solve_k0(tau)?;
        let sigma = symbols::taylor_data(tau)?.sigma;
        let l1 = symbols::l_deriv(tau, k0, 1)?;
        let rho = match variant {
            GswVariant::Printed => 1.0 + 24.0 * k,
            GswVariant::SelfConsistent => 1.0 - 8.0 * k,
        };
        if !(rho > 0.0) {
            return Err(Error::DomainError(format!("rho = {rho} is not positive for k = {k}")));
        }
        let sg = mu.signum();
        let a0 = 0.5 * mu * (1.0 - sg * rho.sqrt());
        let b = 1.5 * mu.abs() * rho.sqrt();
        let kappa = rho.powf(0.25) * mu.abs().sqrt() * sigma.sqrt() / 2f64.sqrt();
        let theta_rate = match variant {
            GswVariant::Printed => k0 - mu / l1 + 2.0 * mu / l1 * (1.0 - sg * rho.sqrt()),
            GswVariant::SelfConsistent => k0 - mu / l1 + 2.0 * a0 / l1,
        };
        let theta_tanh = 3.0 * 2f64.sqrt() * rho.powf(0.25) * mu.abs().sqrt() / (sigma.sqrt() * l1);
        Ok(GswTruncatedSolution { variant, mu, k, rho, sigma, k0, l1, theta_star, a0, b, kappa, theta_rate, theta_tanh })
    }

    pub fn theta(&self, t: f64) -> f64 {
        self.theta_star + self.theta_rate * t + self.theta_tanh * (self.kappa * t).tanh()
    }

    pub fn ripple_amplitude(&self) -> f64 {
        self.mu.abs() * self.k.sqrt()
    }

    /// (𝐀, 𝐁, 𝐂) at t.
    pub fn state(&self, t: f64) -> (f64, f64, C) {
        let th = (self.kappa * t).tanh();
        let s2 = 1.0 - th * th;
        let a = self.a0 + self.b * s2;
        let b = -2.0 * self.b * self.kappa * s2 * th;
        (a, b, C::from_polar(self.ripple_amplitude(), self.theta(t)))
    }

    /// Exact t-derivative of `state`.
    pub fn state_deriv(&self, t: f64) -> (f64, f64, C) {
        let th = (self.kappa * t).tanh();
        let s2 = 1.0 - th * th;
        let k2 = self.kappa * self.kappa;
        let da = -2.0 * self.b * self.kappa * s2 * th;
        let db = self.b * k2 * (4.0 * s2 - 6.0 * s2 * s2);
        let dtheta = self.theta_rate + self.theta_tanh * self.kappa * s2;
        let c = C::from_polar(self.ripple_amplitude(), self.theta(t));
        (da, db, I * dtheta * c)
    }

    /// Componentwise max over the grid of |d/dt state - field(state)| for the given coefficients.
    pub fn residual(&self, coeffs: &NfCoeffsC3, ts: &[f64]) -> [f64; 3] {
        let mut r = [0.0f64; 3];
        for &t in ts {
            let f = truncated_field_c3(self.state(t), self.mu, self.k0, coeffs);
            let d = self.state_deriv(t);
            r[0] = r[0].max((d.0 - f.0).abs());
            r[1] = r[1].max((d.1 - f.1).abs());
            r[2] = r[2].max((d.2 - f.2).norm());
        }
        r
    }
}

/// The C2 homoclinic r0 = √(-2q0μ/q1) sech(√(q0μ)t) with its phases.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct C2Envelope {
    pub s: f64,
    pub mu: f64,
    pub q0: f64,
    pub q1: f64,
    pub open: C2Open,
    pub theta_star: f64,
    pub amplitude: f64,
    pub rate: f64,
}

impl C2Envelope {
    pub fn new(s: f64, mu: f64, coeffs: &NfCoeffsC2, open: C2Open, theta_star: f64) -> Result<Self> {
        let qm = coeffs.q0 * mu;
        let amp2 = -2.0 * qm / coeffs.q1;
        if !(qm > 0.0) || !(amp2 > 0.0) {
            return Err(Error::DomainError(format!(
                "no homoclinic: q0 mu = {qm}, -2 q0 mu / q1 = {amp2}"
            )));
        }
        Ok(C2Envelope { s, mu, q0: coeffs.q0, q1: coeffs.q1, open, theta_star, amplitude: amp2.sqrt(), rate: qm.sqrt() })
    }

    pub fn r0(&self, t: f64) -> f64 {
        self.amplitude / (self.rate * t).cosh()
    }

    pub fn r0_d1(&self, t: f64) -> f64 {
        -self.r0(t) * self.rate * (self.rate * t).tanh()
    }

    pub fn r0_d2(&self, t: f64) -> f64 {
        let th = (self.rate * t).tanh();
        self.r0(t) * self.rate * self.rate * (2.0 * th * th - 1.0)
    }

    pub fn theta0(&self, t: f64) -> f64 {
        self.open.p0 * self.mu * t - 2.0 * self.open.p1 * self.rate / self.q1 * (self.rate * t).tanh() + self.theta_star
    }

    pub fn theta0_d1(&self, t: f64) -> f64 {
        let th = (self.rate * t).tanh();
        self.open.p0 * self.mu - 2.0 * self.open.p1 * self.rate * self.rate / self.q1 * (1.0 - th * th)
    }

    /// (𝐀, 𝐁) with Θ1 = Θ0, so that 𝐁 = r0' e^{i(st+Θ0)} and r1 = |r0'|.
    pub fn state(&self, t: f64) -> (C, C) {
        let e = C::from_polar(1.0, self.s * t + self.theta0(t));
        (self.r0(t) * e, self.r0_d1(t) * e)
    }

    pub fn state_deriv(&self, t: f64) -> (C, C) {
        let e = C::from_polar(1.0, self.s * t + self.theta0(t));
        let w = I * (self.s + self.theta0_d1(t));
        (
            (re(self.r0_d1(t)) + w * self.r0(t)) * e,
            (re(self.r0_d2(t)) + w * self.r0_d1(t)) * e,
        )
    }

    /// max |r0'' - q0μ r0 - q1 r0³| over the grid.
    pub fn envelope_residual(&self, ts: &[f64]) -> f64 {
        ts.iter()
            .map(|&t| {
                let r = self.r0(t);
                (self.r0_d2(t) - self.q0 * self.mu * r - self.q1 * r.powi(3)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// max |d/dt (𝐀, 𝐁) - field| over the grid for the truncated C2 normal form.
    pub fn field_residual(&self, coeffs: &NfCoeffsC2, ts: &[f64]) -> f64 {
        ts.iter()
            .map(|&t| {
                let f = truncated_field_c2(self.state(t), self.mu, self.s, coeffs, &self.open);
                let d = self.state_deriv(t);
                (d.0 - f.0).norm().max((d.1 - f.1).norm())
            })
            .fold(0.0, f64::max)
    }
}
