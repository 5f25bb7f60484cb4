//! Linear dispersion relation, bifurcation curves and zeros of 1 - c0 ℓ in a strip.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::GaussRule;
use crate::symbols::{self, Branch, SymbolParams};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Curve {
    C2(f64),
    C3(f64),
    C4,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BifurcationPoint {
    pub beta: f64,
    pub alpha: f64,
    pub curve: Curve,
    pub tau: f64,
    pub c0: f64,
}

/// Unique positive root of m_τ(ξ) = 1 for 0 < τ < 1/3.
pub fn solve_k0(tau: f64) -> Result<f64> {
    if !(tau > 0.0 && tau < 1.0 / 3.0) {
        return Err(Error::NoRoot(format!("no positive root of m = 1 for tau = {tau}")));
    }
    let g = |x: f64| symbols::radicand(tau, Complex64::new(x, 0.0)).re - 1.0;
    // radicand - 1 ~ (τ - 1/3)ξ² near 0, ~ τξ at infinity
    let mut lo = 0.0;
    let mut hi = f64::NAN;
    let step = 0.01;
    let mut x = step;
    while x <= 50.0 {
        if g(x) > 0.0 {
            hi = x;
            break;
        }
        lo = x;
        x += step;
    }
    if hi.is_nan() {
        return Err(Error::NoRoot(format!("no sign change on (0, 50] for tau = {tau}")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut k0 = 0.5 * (lo + hi);
    // Newton polish on m(ξ) - 1
    let dm = symbols::l_deriv(tau, k0, 1)? * -1.0; // m' = -ℓ'/ℓ² and ℓ(k0) = 1
    if dm != 0.0 {
        let cand = k0 - (symbols::m_real(tau, k0) - 1.0) / dm;
        if (symbols::m_real(tau, cand) - 1.0).abs() < (symbols::m_real(tau, k0) - 1.0).abs() {
            k0 = cand;
        }
    }
    Ok(k0)
}

/// sinh(2s)/2 - s without cancellation for small s.
fn sinh2_half_minus(s: f64) -> f64 {
    if s > 0.5 {
        return 0.5 * (2.0 * s).sinh() - s;
    }
    let u = 2.0 * s;
    let mut term = u * u * u / 6.0;
    let mut sum: f64 = 0.0;
    let mut k = 3.0;
    while term.abs() > 1e-18 * sum.abs() || sum == 0.0 {
        sum += term;
        term *= u * u / ((k + 1.0) * (k + 2.0));
        k += 2.0;
    }
    0.5 * sum
}

pub fn c2_beta_alpha(s: f64) -> (f64, f64) {
    let sh = s.sinh();
    let beta = sinh2_half_minus(s) / (2.0 * s * sh * sh);
    let alpha = s * s / (2.0 * sh * sh) + s / (2.0 * s.tanh());
    (beta, alpha)
}

/// Point of the Hamiltonian-Hopf curve with double root at ξ = s.
pub fn c2_point(s: f64) -> Result<BifurcationPoint> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::InvalidInput(format!("s = {s} must be positive")));
    }
    let (beta, alpha) = c2_beta_alpha(s);
    let c0 = 1.0 / alpha.sqrt();
    Ok(BifurcationPoint { beta, alpha, curve: Curve::C2(s), tau: beta * c0 * c0, c0 })
}

/// Point of C3 at β = τ < 1/3.
pub fn c3_point(beta: f64) -> Result<BifurcationPoint> {
    let k0 = solve_k0(beta)?;
    Ok(BifurcationPoint { beta, alpha: 1.0, curve: Curve::C3(k0), tau: beta, c0: 1.0 })
}

/// Point of C4 at β ≥ 1/3.
pub fn c4_point(beta: f64) -> Result<BifurcationPoint> {
    if beta < 1.0 / 3.0 {
        return Err(Error::DomainError("C4 needs beta >= 1/3".into()));
    }
    Ok(BifurcationPoint { beta, alpha: 1.0, curve: Curve::C4, tau: beta, c0: 1.0 })
}

/// (α + βξ²) sinh ξ - ξ cosh ξ and its ξ-derivative.
pub fn dispersion_relation(beta: f64, alpha: f64, xi: f64) -> (f64, f64) {
    let (sh, ch) = (xi.sinh(), xi.cosh());
    let f = (alpha + beta * xi * xi) * sh - xi * ch;
    let df = 2.0 * beta * xi * sh + (alpha + beta * xi * xi) * ch - ch - xi * sh;
    (f, df)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RootReport {
    pub roots: Vec<(Complex64, u32)>,
    pub strip_eta: f64,
    pub winding: i64,
    pub contour_r: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ArcContributions {
    pub bottom: Complex64,
    pub right: Complex64,
    pub top: Complex64,
    pub left: Complex64,
}

impl ArcContributions {
    pub fn total(&self) -> Complex64 {
        self.bottom + self.right + self.top + self.left
    }
}

struct Symbol {
    tau: f64,
    c0: f64,
}

impl Symbol {
    /// f'/f for f = 1 - c0 ℓ.
    fn log_deriv(&self, z: Complex64) -> Result<Complex64> {
        let l = symbols::l_eval(self.tau, z)?;
        let f = 1.0 - self.c0 * l;
        if f.norm() < 1e-10 {
            return Err(Error::ContourThroughZero { value: f.norm(), at: format!("{z}") });
        }
        let dl = l * symbols::l_log_deriv(self.tau, z);
        Ok(-self.c0 * dl / f)
    }
}

const SEGMENT_ORDER: usize = 20;
const SEGMENT_MAX_DEPTH: u32 = 40;

fn panel(sym: &Symbol, rule: &GaussRule, a: Complex64, b: Complex64, t0: f64, t1: f64, k: i32) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for (t, w) in rule.nodes(t0, t1) {
        let z = a + (b - a) * t;
        acc += w * z.powi(k) * sym.log_deriv(z)?;
    }
    Ok(acc)
}

fn adapt(
    sym: &Symbol,
    rule: &GaussRule,
    (a, b): (Complex64, Complex64),
    (t0, t1): (f64, f64),
    whole: Complex64,
    k: i32,
    tol: f64,
    depth: u32,
) -> Result<Complex64> {
    let tm = 0.5 * (t0 + t1);
    let left = panel(sym, rule, a, b, t0, tm, k)?;
    let right = panel(sym, rule, a, b, tm, t1, k)?;
    let scale = (b - a).norm() / (2.0 * PI);
    if ((left + right - whole).norm() * scale) < tol {
        return Ok(left + right);
    }
    if depth >= SEGMENT_MAX_DEPTH {
        return Err(Error::NonIntegerWinding(f64::NAN));
    }
    Ok(adapt(sym, rule, (a, b), (t0, tm), left, k, 0.5 * tol, depth + 1)?
        + adapt(sym, rule, (a, b), (tm, t1), right, k, 0.5 * tol, depth + 1)?)
}

/// (1/2πi) ∫_a^b z^k f'/f dz along a straight segment, by adaptive Gauss-Legendre bisection.
fn segment_integral(sym: &Symbol, a: Complex64, b: Complex64, k: i32, tol: f64) -> Result<Complex64> {
    let rule = GaussRule::new(SEGMENT_ORDER);
    let whole = panel(sym, &rule, a, b, 0.0, 1.0, k)?;
    let est = adapt(sym, &rule, (a, b), (0.0, 1.0), whole, k, tol, 0)?;
    Ok(est * (b - a) / Complex64::new(0.0, 2.0 * PI))
}

fn box_moments(sym: &Symbol, x0: f64, x1: f64, y0: f64, y1: f64, k: i32, tol: f64) -> Result<[Complex64; 4]> {
    let c = |x: f64, y: f64| Complex64::new(x, y);
    Ok([
        segment_integral(sym, c(x0, y0), c(x1, y0), k, tol)?,
        segment_integral(sym, c(x1, y0), c(x1, y1), k, tol)?,
        segment_integral(sym, c(x1, y1), c(x0, y1), k, tol)?,
        segment_integral(sym, c(x0, y1), c(x0, y0), k, tol)?,
    ])
}

fn snap(w: Complex64) -> Result<i64> {
    let n = w.re.round();
    if (w.re - n).abs() < 1e-3 && w.im.abs() < 1e-3 {
        Ok(n as i64)
    } else {
        Err(Error::NonIntegerWinding(w.re))
    }
}

fn check_contour(params: &SymbolParams, eta: f64, r: f64) -> Result<()> {
    let es = symbols::eta_star(params.tau);
    if !(eta > 0.0 && eta < es) {
        return Err(Error::InvalidInput(format!("eta = {eta} must lie in (0, {es})")));
    }
    if !(r > 0.0) {
        return Err(Error::InvalidInput("contour half-length must be positive".into()));
    }
    Ok(())
}

/// Per-side contributions of (1/2πi)∮ f'/f dz around the rectangle with corners ±R ± iη.
pub fn residue_index_decomposition(params: &SymbolParams, eta: f64, r: f64) -> Result<ArcContributions> {
    check_contour(params, eta, r)?;
    let sym = Symbol { tau: params.tau, c0: params.c0 };
    let m = box_moments(&sym, -r, r, -eta, eta, 0, 1e-7)?;
    Ok(ArcContributions { bottom: m[0], right: m[1], top: m[2], left: m[3] })
}

/// Winding number of 1 - c0 ℓ around the rectangle with corners ±R ± iη.
pub fn winding_number(params: &SymbolParams, eta: f64, r: f64) -> Result<i64> {
    snap(residue_index_decomposition(params, eta, r)?.total())
}

struct Cluster {
    at: Complex64,
    mult: u32,
}

fn localize(sym: &Symbol, bx: [f64; 4], w: i64, depth: u32, out: &mut Vec<Cluster>) -> Result<()> {
    if w == 0 {
        return Ok(());
    }
    let [x0, x1, y0, y1] = bx;
    let tol = 1e-9;
    let s1: Complex64 = box_moments(sym, x0, x1, y0, y1, 1, tol)?.iter().sum();
    let s2: Complex64 = box_moments(sym, x0, x1, y0, y1, 2, tol)?.iter().sum();
    let mean = s1 / w as f64;
    let var = s2 / w as f64 - mean * mean;
    let size = (x1 - x0).max(y1 - y0);
    if var.norm() < 1e-8 * size.max(1.0).powi(2) || depth > 40 {
        out.push(Cluster { at: mean, mult: w as u32 });
        return Ok(());
    }
    // split the longer side off-centre so cuts avoid symmetric roots
    let frac = 0.5 + 0.0371 * if depth % 2 == 0 { 1.0 } else { -1.0 };
    let halves = if x1 - x0 >= y1 - y0 {
        let xm = x0 + frac * (x1 - x0);
        [[x0, xm, y0, y1], [xm, x1, y0, y1]]
    } else {
        let ym = y0 + frac * (y1 - y0);
        [[x0, x1, y0, ym], [x0, x1, ym, y1]]
    };
    let mut ws = [0i64; 2];
    for (i, h) in halves.iter().enumerate() {
        ws[i] = snap(box_moments(sym, h[0], h[1], h[2], h[3], 0, 1e-7)?.iter().sum())?;
    }
    if ws[0] + ws[1] != w {
        return Err(Error::NonIntegerWinding((ws[0] + ws[1]) as f64));
    }
    for (h, wi) in halves.iter().zip(ws) {
        localize(sym, *h, wi, depth + 1, out)?;
    }
    Ok(())
}

/// Polish a simple root by Newton on f = 1 - c0 ℓ.
fn polish(sym: &Symbol, mut z: Complex64) -> Complex64 {
    for _ in 0..20 {
        let Ok(ld) = sym.log_deriv(z) else { return z };
        let step = 1.0 / ld;
        if !step.re.is_finite() {
            break;
        }
        z -= step;
        if step.norm() < 1e-15 {
            break;
        }
    }
    z
}

/// Zeros of 1 - c0 ℓ in the rectangle |Re z| < R, |Im z| < η, with multiplicities.
pub fn roots_in_strip(params: &SymbolParams, eta: f64, r: f64) -> Result<RootReport> {
    check_contour(params, eta, r)?;
    let sym = Symbol { tau: params.tau, c0: params.c0 };
    let winding = winding_number(params, eta, r)?;
    let mut clusters = Vec::new();
    localize(&sym, [-r, r, -eta, eta], winding, 0, &mut clusters)?;
    let mut roots: Vec<(Complex64, u32)> = clusters
        .into_iter()
        .map(|c| {
            let mut z = if c.mult == 1 { polish(&sym, c.at) } else { c.at };
            if z.re.abs() < 1e-9 {
                z.re = 0.0;
            }
            if z.im.abs() < 1e-9 {
                z.im = 0.0;
            }
            (z, c.mult)
        })
        .collect();
    roots.sort_by(|a, b| a.0.re.partial_cmp(&b.0.re).unwrap().then(a.0.im.partial_cmp(&b.0.im).unwrap()));
    Ok(RootReport { roots, strip_eta: eta, winding, contour_r: r })
}

/// Real roots, with multiplicities, expected at a bifurcation point.
pub fn expected_roots(params: &SymbolParams) -> Result<Option<Vec<(f64, u32)>>> {
    Ok(match params.branch {
        Branch::C3 => {
            let k0 = solve_k0(params.tau)?;
            Some(vec![(-k0, 1), (0.0, 2), (k0, 1)])
        }
        Branch::C2(s) => Some(vec![(-s, 2), (s, 2)]),
        _ => None,
    })
}

fn matches_expected(report: &RootReport, expected: &[(f64, u32)], tol: f64) -> bool {
    report.roots.len() == expected.len()
        && report
            .roots
            .iter()
            .zip(expected)
            .all(|((z, m), (x, n))| m == n && (z.re - x).abs() < tol && z.im.abs() < tol)
}

/// Largest strip half-width, stepping down from η* by 0.05η*, on which the zeros are
/// exactly the predicted real ones. Returns (η̃, R).
pub fn certify_strip(params: &SymbolParams) -> Result<(f64, f64)> {
    let es = symbols::eta_star(params.tau);
    let Some(expected) = expected_roots(params)? else {
        return Ok((es, 5.0));
    };
    let rmax = expected.iter().fold(0.0f64, |m, r| m.max(r.0.abs()));
    let r = rmax + 5.0;
    for j in 1..20 {
        let eta = es * (1.0 - 0.05 * j as f64);
        match roots_in_strip(params, eta, r) {
            Ok(rep) if matches_expected(&rep, &expected, 1e-4) => return Ok((eta, r)),
            Ok(_) | Err(Error::ContourThroughZero { .. }) | Err(Error::NonIntegerWinding(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::NoRoot("could not certify a strip containing only the predicted zeros".into()))
}

/// Root report at η = 0.5 min(η*, η̃) and R = max root modulus + 5.
pub fn roots_auto(params: &SymbolParams) -> Result<RootReport> {
    let es = symbols::eta_star(params.tau);
    let (eta_t, r) = certify_strip(params)?;
    roots_in_strip(params, 0.5 * es.min(eta_t), r)
}
