//! Exact algebra on finite sums Σ c x^k {cos, sin}(h ω x) with integer harmonics h,
//! the action of an even Fourier multiplier on them, and the constrained solve of 𝒯Ψ = g.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::reduction::ProjectionKind;
use crate::symbols::{self, SymbolParams};

/// Highest power of x the multiplier rules are evaluated for (derivatives of ℓ up to order 4).
pub const MAX_POWER: u8 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Phase {
    Cos,
    Sin,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrigPoly {
    pub omega: f64,
    terms: BTreeMap<(u8, u32, Phase), f64>,
}

fn binom(n: u32, k: u32) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |a, b| a * b as f64)
}

/// j-th derivative at 0 of cos(yx) or sin(yx).
fn trig_deriv_at_zero(phase: Phase, y: f64, j: u32) -> f64 {
    let sign = if (j / 2) % 2 == 0 { 1.0 } else { -1.0 };
    match (phase, j % 2) {
        (Phase::Cos, 0) => sign * y.powi(j as i32),
        (Phase::Sin, 1) => sign * y.powi(j as i32),
        _ => 0.0,
    }
}

impl TrigPoly {
    pub fn zero(omega: f64) -> Self {
        TrigPoly { omega, terms: BTreeMap::new() }
    }

    pub fn constant(omega: f64, c: f64) -> Self {
        let mut p = Self::zero(omega);
        p.add_term(0, 0, Phase::Cos, c);
        p
    }

    pub fn monomial(omega: f64, power: u8, harmonic: u32, phase: Phase, c: f64) -> Self {
        let mut p = Self::zero(omega);
        p.add_term(power, harmonic, phase, c);
        p
    }

    /// Add c x^power trig(harmonic ω x); sin at harmonic 0 is identically zero and dropped.
    pub fn add_term(&mut self, power: u8, harmonic: u32, phase: Phase, c: f64) {
        if c == 0.0 || (harmonic == 0 && phase == Phase::Sin) {
            return;
        }
        let e = self.terms.entry((power, harmonic, phase)).or_insert(0.0);
        *e += c;
        if *e == 0.0 {
            self.terms.remove(&(power, harmonic, phase));
        }
    }

    /// Same as `add_term` for a signed harmonic, folding sin(-y) = -sin(y).
    fn add_signed(&mut self, power: u8, harmonic: i64, phase: Phase, c: f64) {
        let h = harmonic.unsigned_abs() as u32;
        let c = if harmonic < 0 && phase == Phase::Sin { -c } else { c };
        self.add_term(power, h, phase, c);
    }

    pub fn terms(&self) -> impl Iterator<Item = ((u8, u32, Phase), f64)> + '_ {
        self.terms.iter().map(|(k, v)| (*k, *v))
    }

    pub fn coeff(&self, power: u8, harmonic: u32, phase: Phase) -> f64 {
        self.terms.get(&(power, harmonic, phase)).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_power(&self) -> u8 {
        self.terms.keys().map(|k| k.0).max().unwrap_or(0)
    }

    pub fn harmonics(&self) -> Vec<u32> {
        let mut h: Vec<u32> = self.terms.keys().map(|k| k.1).collect();
        h.sort_unstable();
        h.dedup();
        h
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// x^k cos is even iff k is even; x^k sin is even iff k is odd.
    fn term_is_even(key: &(u8, u32, Phase)) -> bool {
        (key.0 % 2 == 0) == (key.2 == Phase::Cos)
    }

    pub fn is_even(&self) -> bool {
        self.terms.keys().all(Self::term_is_even)
    }

    pub fn is_odd(&self) -> bool {
        self.terms.keys().all(|k| !Self::term_is_even(k))
    }

    fn check_omega(&self, other: &TrigPoly) {
        assert!(
            self.is_zero() || other.is_zero() || self.omega == other.omega,
            "trig polynomials with different base frequencies"
        );
    }

    pub fn add(&self, other: &TrigPoly) -> TrigPoly {
        self.check_omega(other);
        let mut out = self.clone();
        if out.is_zero() {
            out.omega = other.omega;
        }
        for (k, v) in other.terms() {
            out.add_term(k.0, k.1, k.2, v);
        }
        out
    }

    pub fn scale(&self, c: f64) -> TrigPoly {
        let mut out = TrigPoly::zero(self.omega);
        for (k, v) in self.terms() {
            out.add_term(k.0, k.1, k.2, c * v);
        }
        out
    }

    /// Product by the product-to-sum identities.
    pub fn mul(&self, other: &TrigPoly) -> TrigPoly {
        self.check_omega(other);
        let omega = if self.is_zero() { other.omega } else { self.omega };
        let mut out = TrigPoly::zero(omega);
        for ((ka, ha, pa), ca) in self.terms() {
            for ((kb, hb, pb), cb) in other.terms() {
                let k = ka + kb;
                let (a, b) = (ha as i64, hb as i64);
                let c = 0.5 * ca * cb;
                match (pa, pb) {
                    (Phase::Cos, Phase::Cos) => {
                        out.add_signed(k, a - b, Phase::Cos, c);
                        out.add_signed(k, a + b, Phase::Cos, c);
                    }
                    (Phase::Sin, Phase::Sin) => {
                        out.add_signed(k, a - b, Phase::Cos, c);
                        out.add_signed(k, a + b, Phase::Cos, -c);
                    }
                    (Phase::Sin, Phase::Cos) => {
                        out.add_signed(k, a + b, Phase::Sin, c);
                        out.add_signed(k, a - b, Phase::Sin, c);
                    }
                    (Phase::Cos, Phase::Sin) => {
                        out.add_signed(k, a + b, Phase::Sin, c);
                        out.add_signed(k, b - a, Phase::Sin, c);
                    }
                }
            }
        }
        out
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.terms()
            .map(|((k, h, ph), c)| {
                let y = h as f64 * self.omega * x;
                c * x.powi(k as i32) * if ph == Phase::Cos { y.cos() } else { y.sin() }
            })
            .sum()
    }

    /// Exact derivative d/dx.
    pub fn derivative(&self) -> TrigPoly {
        let mut out = TrigPoly::zero(self.omega);
        for ((k, h, ph), c) in self.terms() {
            let y = h as f64 * self.omega;
            if k > 0 {
                out.add_term(k - 1, h, ph, c * k as f64);
            }
            match ph {
                Phase::Cos => out.add_term(k, h, Phase::Sin, -c * y),
                Phase::Sin => out.add_term(k, h, Phase::Cos, c * y),
            }
        }
        out
    }

    /// n-th derivative at x = 0 by Leibniz: (x^k g)^{(n)}(0) = C(n,k) k! g^{(n-k)}(0).
    pub fn deriv_at_zero(&self, n: u32) -> f64 {
        self.terms()
            .map(|((k, h, ph), c)| {
                let k = k as u32;
                if k > n {
                    return 0.0;
                }
                c * binom(n, k) * factorial(k) * trig_deriv_at_zero(ph, h as f64 * self.omega, n - k)
            })
            .sum()
    }

    /// (φ(0), φ'(0), φ''(0), φ'''(0)).
    pub fn jet(&self) -> [f64; 4] {
        [0, 1, 2, 3].map(|n| self.deriv_at_zero(n))
    }

    /// Drop coefficients below `tol` times the largest one.
    pub fn pruned(&self, tol: f64) -> TrigPoly {
        let cut = tol * self.max_abs_coeff();
        let mut out = TrigPoly::zero(self.omega);
        for (k, v) in self.terms() {
            if v.abs() > cut {
                out.add_term(k.0, k.1, k.2, v);
            }
        }
        out
    }
}

pub fn fourth_deriv_at_zero(p: &TrigPoly) -> f64 {
    p.deriv_at_zero(4)
}

/// An even Fourier multiplier, described by its derivatives on the real line.
pub trait Multiplier {
    fn deriv(&self, n: usize, y: f64) -> Result<f64>;
}

pub struct Identity;

impl Multiplier for Identity {
    fn deriv(&self, n: usize, _y: f64) -> Result<f64> {
        Ok(if n == 0 { 1.0 } else { 0.0 })
    }
}

/// 𝒯 = Id - c0 ℓ(D).
pub struct TSymbol {
    pub tau: f64,
    pub c0: f64,
}

impl Multiplier for TSymbol {
    fn deriv(&self, n: usize, y: f64) -> Result<f64> {
        let d = self.c0 * symbols::l_deriv(self.tau, y, n)?;
        Ok(if n == 0 { 1.0 - d } else { -d })
    }
}

/// Id - 𝒯 = c0 ℓ(D).
pub struct IdMinusT {
    pub tau: f64,
    pub c0: f64,
}

impl Multiplier for IdMinusT {
    fn deriv(&self, n: usize, y: f64) -> Result<f64> {
        Ok(self.c0 * symbols::l_deriv(self.tau, y, n)?)
    }
}

/// Polynomial multiplier Σ a_j ξ^j, used as an exact oracle for the expansion rules.
pub struct PolyMultiplier(pub Vec<f64>);

impl Multiplier for PolyMultiplier {
    fn deriv(&self, n: usize, y: f64) -> Result<f64> {
        let mut s = 0.0;
        for (j, a) in self.0.iter().enumerate().skip(n) {
            let fall = (0..n).fold(1.0, |acc, i| acc * (j - i) as f64);
            s += a * fall * y.powi((j - n) as i32);
        }
        Ok(s)
    }
}

/// m(D)[x^k e^{iyx}] = Σ_j C(k,j) (-i)^j m^{(j)}(y) x^{k-j} e^{iyx}; cos takes the real part,
/// sin the imaginary part.
pub fn apply_multiplier(m: &dyn Multiplier, p: &TrigPoly) -> Result<TrigPoly> {
    let mut out = TrigPoly::zero(p.omega);
    let mut cache: BTreeMap<(usize, u32), f64> = BTreeMap::new();
    for ((k, h, ph), c) in p.terms() {
        if k > MAX_POWER {
            return Err(Error::PowerOverflow(k as u32));
        }
        let y = h as f64 * p.omega;
        for j in 0..=k as usize {
            let mj = match cache.get(&(j, h)) {
                Some(v) => *v,
                None => {
                    let v = m.deriv(j, y)?;
                    cache.insert((j, h), v);
                    v
                }
            };
            let coef = c * binom(k as u32, j as u32) * mj;
            if coef == 0.0 {
                continue;
            }
            let (phase, sign) = match (ph, j % 4) {
                (Phase::Cos, 0) => (Phase::Cos, 1.0),
                (Phase::Cos, 1) => (Phase::Sin, 1.0),
                (Phase::Cos, 2) => (Phase::Cos, -1.0),
                (Phase::Cos, _) => (Phase::Sin, -1.0),
                (Phase::Sin, 0) => (Phase::Sin, 1.0),
                (Phase::Sin, 1) => (Phase::Cos, -1.0),
                (Phase::Sin, 2) => (Phase::Sin, -1.0),
                (Phase::Sin, _) => (Phase::Cos, 1.0),
            };
            out.add_term(k - j as u8, h, phase, sign * coef);
        }
    }
    Ok(out)
}

/// Largest single contribution C(k,j)|m^{(j)}(y)||c| entering m(D)p, the scale against which
/// cancellation in m(D)p is measured.
pub fn gross_magnitude(m: &dyn Multiplier, p: &TrigPoly) -> Result<f64> {
    let mut g: f64 = 0.0;
    for ((k, h, _), c) in p.terms() {
        let y = h as f64 * p.omega;
        for j in 0..=k as usize {
            g = g.max(binom(k as u32, j as u32) * m.deriv(j, y)?.abs() * c.abs());
        }
    }
    Ok(g)
}

/// Harmonics of the kernel basis of 𝒯 for each projection.
fn kernel_harmonics(kind: ProjectionKind) -> &'static [u32] {
    match kind {
        ProjectionKind::Q1 => &[0, 1],
        ProjectionKind::Q2 => &[1],
    }
}

fn solve_with_power(rhs: &TrigPoly, params: &SymbolParams, kind: ProjectionKind, pmax: u8) -> Result<TrigPoly> {
    let omega = rhs.omega;
    let t = TSymbol { tau: params.tau, c0: params.c0 };
    let mut harmonics = rhs.harmonics();
    harmonics.extend_from_slice(kernel_harmonics(kind));
    harmonics.sort_unstable();
    harmonics.dedup();

    let mut cols = Vec::new();
    for &h in &harmonics {
        for k in 0..=pmax {
            cols.push((k, h, Phase::Cos));
            if h > 0 {
                cols.push((k, h, Phase::Sin));
            }
        }
    }
    let images = cols
        .iter()
        .map(|&(k, h, ph)| apply_multiplier(&t, &TrigPoly::monomial(omega, k, h, ph, 1.0)))
        .collect::<Result<Vec<_>>>()?;

    let mut rows: Vec<(u8, u32, Phase)> = cols.clone();
    for (key, _) in rhs.terms() {
        if !rows.contains(&key) {
            rows.push(key);
        }
    }
    let nr = rows.len() + 4;
    let nc = cols.len();
    let mut a = DMatrix::<f64>::zeros(nr, nc);
    let mut b = DVector::<f64>::zeros(nr);
    for (i, key) in rows.iter().enumerate() {
        for (j, img) in images.iter().enumerate() {
            a[(i, j)] = img.coeff(key.0, key.1, key.2);
        }
        b[i] = rhs.coeff(key.0, key.1, key.2);
    }
    // Q Ψ = 0 is equivalent to a vanishing jet, since the transition matrix is invertible
    for n in 0..4 {
        for (j, &(k, h, ph)) in cols.iter().enumerate() {
            a[(rows.len() + n, j)] = TrigPoly::monomial(omega, k, h, ph, 1.0).deriv_at_zero(n as u32);
        }
    }
    let mut scale = vec![1.0; nc];
    for j in 0..nc {
        let nrm = a.column(j).norm();
        if nrm > 0.0 {
            scale[j] = 1.0 / nrm;
            for i in 0..nr {
                a[(i, j)] *= scale[j];
            }
        }
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smax == 0.0 || smin / smax < 1e-13 {
        return Err(Error::RankDeficient(if smax == 0.0 { 0.0 } else { smin / smax }));
    }
    let solve = |rhs: &DVector<f64>| {
        svd.solve(rhs, 1e-14 * smax).map_err(|_| Error::NotSolvable(f64::INFINITY))
    };
    // a few steps of iterative refinement recover accuracy lost to near-resonant harmonics
    let mut sol = solve(&b)?;
    for _ in 0..3 {
        let r = &b - &a * &sol;
        sol += solve(&r)?;
    }
    let mut psi = TrigPoly::zero(omega);
    for (j, &(k, h, ph)) in cols.iter().enumerate() {
        psi.add_term(k, h, ph, sol[j] * scale[j]);
    }
    let psi = psi.pruned(1e-15);
    let back = apply_multiplier(&t, &psi)?;
    let res = back.add(&rhs.scale(-1.0)).max_abs_coeff();
    let gross = gross_magnitude(&t, &psi)?;
    if res > 1e-10 * rhs.max_abs_coeff().max(gross).max(1.0) {
        return Err(Error::NotSolvable(res));
    }
    Ok(psi)
}

/// The unique Ψ in span{x^k trig} with 𝒯Ψ = rhs and 𝒬Ψ = 0.
pub fn solve_t_equation(rhs: &TrigPoly, params: &SymbolParams, kind: ProjectionKind) -> Result<TrigPoly> {
    if rhs.is_zero() {
        return Ok(TrigPoly::zero(rhs.omega));
    }
    let p0 = rhs.max_power() + 2;
    if p0 > MAX_POWER {
        return Err(Error::PowerOverflow(p0 as u32));
    }
    match solve_with_power(rhs, params, kind, p0) {
        Ok(psi) => Ok(psi),
        Err(Error::NotSolvable(_)) | Err(Error::RankDeficient(_)) if p0 < MAX_POWER => {
            solve_with_power(rhs, params, kind, p0 + 1)
        }
        Err(e) => Err(e),
    }
}
