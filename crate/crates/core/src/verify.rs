//! Verification suites behind `whitham-cm verify`. Each check records the numbers it compared.

use serde::Serialize;
use serde_json::{json, Value};

use crate::dispersion;
use crate::error::{Error, Result};
use crate::kernel;
use crate::normalform::{self, C2Envelope, C2Open, GswTruncatedSolution, GswVariant};
use crate::quad::linear_fit;
use crate::reduction::{self, C3Reading, Psi10200Reading, C2_TABLE, C3_TABLE};
use crate::spectral::{self, NewtonOptions, PeriodicGrid};
use crate::symbols::{self, SymbolParams};
use crate::waves::{self, GswParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    Pass,
    Fail,
    /// The literal check fails and the deviation equals its known closed-form cause.
    KnownDeviation,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub values: Value,
    pub note: String,
}

impl Check {
    fn new(name: impl Into<String>, ok: bool, values: Value) -> Self {
        Check { name: name.into(), status: if ok { Status::Pass } else { Status::Fail }, values, note: String::new() }
    }

    fn deviation(name: impl Into<String>, literal_ok: bool, explained: bool, values: Value, note: &str) -> Self {
        let status = match (literal_ok, explained) {
            (true, _) => Status::Pass,
            (false, true) => Status::KnownDeviation,
            (false, false) => Status::Fail,
        };
        Check { name: name.into(), status, values, note: note.into() }
    }

    fn error(name: impl Into<String>, e: &Error) -> Self {
        Check { name: name.into(), status: Status::Fail, values: Value::Null, note: e.to_string() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Suite {
    All,
    Kernel,
    Fredholm,
    Coeffs,
    Nf,
    Waves,
}

impl Suite {
    pub fn parse(s: &str) -> Option<Suite> {
        Some(match s {
            "all" => Suite::All,
            "kernel" => Suite::Kernel,
            "fredholm" => Suite::Fredholm,
            "coeffs" => Suite::Coeffs,
            "nf" => Suite::Nf,
            "waves" => Suite::Waves,
            _ => return None,
        })
    }
}

/// Parameter grids; `None` means the default grid.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub taus: Option<Vec<f64>>,
    pub ss: Option<Vec<f64>>,
}

impl VerifyConfig {
    fn taus(&self, default: &[f64]) -> Vec<f64> {
        self.taus.clone().unwrap_or_else(|| default.to_vec())
    }

    fn ss(&self, default: &[f64]) -> Vec<f64> {
        self.ss.clone().unwrap_or_else(|| default.to_vec())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub suite: Suite,
    pub passed: usize,
    pub known_deviations: usize,
    pub failed: usize,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn push<F: FnOnce() -> Result<Check>>(out: &mut Vec<Check>, name: &str, f: F) {
    out.push(f().unwrap_or_else(|e| Check::error(name, &e)));
}

pub fn run(suite: Suite, cfg: &VerifyConfig) -> Report {
    let mut checks = Vec::new();
    let all = suite == Suite::All;
    if all || suite == Suite::Fredholm {
        fredholm(cfg, &mut checks);
    }
    if all || suite == Suite::Kernel {
        kernel_suite(cfg, &mut checks);
    }
    if all || suite == Suite::Coeffs {
        coeffs(cfg, &mut checks);
    }
    if all || suite == Suite::Nf {
        nf(cfg, &mut checks);
    }
    if all || suite == Suite::Waves {
        waves_suite(&mut checks);
    }
    let count = |s: Status| checks.iter().filter(|c| c.status == s).count();
    Report {
        suite,
        passed: count(Status::Pass),
        known_deviations: count(Status::KnownDeviation),
        failed: count(Status::Fail),
        checks,
    }
}

fn fredholm(cfg: &VerifyConfig, out: &mut Vec<Check>) {
    let mut points = Vec::new();
    for tau in cfg.taus(&[0.1, 0.2, 0.3]) {
        points.push((format!("tau={tau}"), SymbolParams::c3(tau, 0.0)));
    }
    for s in cfg.ss(&[0.5, 1.0, 2.0]) {
        points.push((format!("s={s}"), SymbolParams::c2(s, 0.0)));
    }
    for (label, p) in points {
        let name = format!("fredholm/winding/{label}");
        push(out, &name.clone(), || {
            let p = p?;
            let rep = dispersion::roots_auto(&p)?;
            let expected = dispersion::expected_roots(&p)?.unwrap_or_default();
            let mult: u32 = rep.roots.iter().map(|r| r.1).sum();
            let located = rep.roots.len() == expected.len()
                && rep
                    .roots
                    .iter()
                    .zip(&expected)
                    .all(|((z, m), (x, n))| m == n && (z.re - x).abs() < 1e-6 && z.im.abs() < 1e-6);
            let roots: Vec<Value> = rep.roots.iter().map(|(z, m)| json!([z.re, z.im, m])).collect();
            Ok(Check::new(
                name,
                rep.winding == 4 && mult == 4 && located,
                json!({"winding": rep.winding, "multiplicity_sum": mult, "eta": rep.strip_eta, "roots": roots}),
            ))
        });
    }
}

fn kernel_suite(cfg: &VerifyConfig, out: &mut Vec<Check>) {
    for tau in cfg.taus(&[0.1, 0.2]) {
        let name = format!("kernel/diagnostics/tau={tau}");
        let d = match kernel::kernel_diagnostics(tau) {
            Ok(d) => d,
            Err(e) => {
                out.push(Check::error(name, &e));
                continue;
            }
        };
        out.push(Check::new(
            format!("kernel/singular-fit/tau={tau}"),
            rel(d.singular_constant, d.expected_constant) < 0.01,
            json!({"fit": d.singular_constant, "expected": d.expected_constant}),
        ));
        let literal = (d.singular_raw - d.expected_constant).abs() < 0.01 * d.expected_constant;
        // √x K = C + C0 √x + O(x): the literal offset is the regular part of K
        let predicted = d.singular_constant + d.regular_part * 1e-2;
        out.push(Check::deviation(
            format!("kernel/singular-at-1e-4/tau={tau}"),
            literal,
            rel(d.singular_raw, predicted) < 1e-4,
            json!({"sqrt_x_k": d.singular_raw, "expected": d.expected_constant, "regular_part": d.regular_part}),
            "offset equals the regular part of K times sqrt(x)",
        ));
        out.push(Check::new(format!("kernel/mass/tau={tau}"), (d.mass - 1.0).abs() < 1e-5, json!({"mass": d.mass})));
        let band = d.decay_rate >= 0.85 * d.eta_star && d.decay_rate <= 1.15 * d.eta_star;
        out.push(Check::new(
            format!("kernel/decay/tau={tau}"),
            band,
            json!({"rate": d.decay_rate, "eta_star": d.eta_star}),
        ));
    }
}

fn coeffs(cfg: &VerifyConfig, out: &mut Vec<Check>) {
    for tau in cfg.taus(&[0.05, 0.1, 0.2, 0.3]) {
        push(out, &format!("coeffs/c3/tau={tau}"), || {
            let printed = reduction::cm_coeffs_closed_c3(tau)?;
            let rederived = reduction::cm_coeffs_closed_c3_with(tau, C3Reading::Rederived)?;
            let ansatz = reduction::cm_coeffs_ansatz(&SymbolParams::c3(tau, 0.0)?)?;
            let k0 = dispersion::solve_k0(tau)?;
            let l2k = symbols::l_real(tau, 2.0 * k0);
            let gap = 2.0 * l2k / (l2k - 1.0) * k0.powi(4);
            let mut rows = serde_json::Map::new();
            let mut literal = true;
            let mut explained = true;
            for n in C3_TABLE {
                let (p, r, a) = (printed.get(n)?, rederived.get(n)?, ansatz.get(n)?);
                literal &= rel(p, a) < 1e-8;
                explained &= rel(r, a) < 1e-8;
                let expect_gap = match n {
                    "00200" => gap,
                    "00020" => -gap,
                    _ => 0.0,
                };
                explained &= ((p - a) - expect_gap).abs() <= 1e-8 * a.abs().max(gap.abs());
                rows.insert(n.into(), json!({"closed": p, "rederived": r, "ansatz": a}));
            }
            Ok(Check::deviation(
                format!("coeffs/c3/tau={tau}"),
                literal,
                explained,
                Value::Object(rows),
                "psi00200 and psi00020 carry prefactor 6 in place of 8 on the 2k0 harmonic",
            ))
        });
    }
    for s in cfg.ss(&[0.5, 1.0, 2.0]) {
        push(out, &format!("coeffs/c2/s={s}"), || {
            let printed = reduction::cm_coeffs_closed_c2(s)?;
            let alt = reduction::cm_coeffs_closed_c2_with(s, Psi10200Reading::HelperProduct)?;
            let ansatz = reduction::cm_coeffs_ansatz(&SymbolParams::c2(s, 0.0)?)?;
            let mut rows = serde_json::Map::new();
            let mut literal = true;
            let mut explained = true;
            for n in C2_TABLE {
                let (p, h, a) = (printed.get(n)?, alt.get(n)?, ansatz.get(n)?);
                literal &= rel(p, a) < 1e-8;
                explained &= rel(h, a) < 1e-8;
                rows.insert(n.into(), json!({"closed": p, "helper_product": h, "ansatz": a}));
            }
            let v = reduction::adjudicate_psi10200(s)?;
            explained &= v.verdict == Psi10200Reading::HelperProduct;
            rows.insert("psi10200_verdict".into(), serde_json::to_value(v).unwrap_or(Value::Null));
            Ok(Check::deviation(
                format!("coeffs/c2/s={s}"),
                literal,
                explained,
                Value::Object(rows),
                "psi10200 matches the -256bd reading",
            ))
        });
    }
    for s in [0.5, 1.0] {
        push(out, &format!("coeffs/projection-idempotent/s={s}"), || {
            let p = SymbolParams::c2(s, 0.0)?;
            let q = reduction::ProjectionSpec::for_params(&p)?.projector_on_jets();
            let q2 = reduction::matmul(&q, &q);
            let mut err: f64 = 0.0;
            for i in 0..4 {
                for j in 0..4 {
                    err = err.max((q2[i][j] - q[i][j]).abs());
                }
            }
            Ok(Check::new(format!("coeffs/projection-idempotent/s={s}"), err < 1e-13, json!({"max_err": err})))
        });
    }
}

fn c3_truncated_check(tau: f64, mu: f64, k: f64) -> Result<Check> {
    let coeffs = normalform::nf_coeffs_c3_closed(tau)?;
    let ts: Vec<f64> = (0..=4000).map(|i| -20.0 + 0.01 * i as f64).collect();
    let sol = GswTruncatedSolution::new(tau, mu, k, 0.0, GswVariant::Printed)?;
    let r = sol.residual(&coeffs, &ts);
    let literal = r.iter().all(|x| *x < 1e-12);
    let b_gap = 16.0 * sol.sigma * mu * mu * k;
    let c_gap = sol.ripple_amplitude() * (mu * (1.0 - mu.signum() * sol.rho.sqrt()) / sol.l1).abs();
    let explained = r[0] < 1e-12 && rel(r[1], b_gap) < 1e-9 && rel(r[2], c_gap) < 1e-9;
    Ok(Check::deviation(
        format!("nf/c3-explicit/tau={tau}/mu={mu}/k={k}"),
        literal,
        explained,
        json!({"residual_a": r[0], "residual_b": r[1], "residual_c": r[2], "b_gap": b_gap, "c_gap": c_gap}),
        "rho = 1 + 24k leaves 16 sigma mu^2 k in the B equation; the phase rate carries 2mu where mu is consistent",
    ))
}

fn nf(cfg: &VerifyConfig, out: &mut Vec<Check>) {
    for tau in cfg.taus(&[0.05, 0.1, 0.2, 0.3]) {
        push(out, &format!("nf/c3-routes/tau={tau}"), || {
            let psis = reduction::cm_coeffs_ansatz(&SymbolParams::c3(tau, 0.0)?)?;
            let (a, b) = normalform::nf_coeffs_c3(tau, &psis)?;
            let structure = a.p0 == 0.0 && a.p1 == -a.p2 && a.p3 == 2.0 * a.p2 && a.q1 == -2.0 * a.q0;
            let pairs = [(a.p1, b.p1), (a.p2, b.p2), (a.p3, b.p3), (a.q0, b.q0), (a.q1, b.q1)];
            let agree = b.p0.abs() < 1e-10 && pairs.iter().all(|&(x, y)| rel(x, y) < 1e-10);
            Ok(Check::new(
                format!("nf/c3-routes/tau={tau}"),
                structure && agree,
                json!({"closed": a, "solvability": b}),
            ))
        });
    }
    for s in cfg.ss(&[0.5, 1.0, 2.0]) {
        push(out, &format!("nf/c2-routes/s={s}"), || {
            let psis = reduction::cm_coeffs_ansatz(&SymbolParams::c2(s, 0.0)?)?;
            let (a, b) = normalform::nf_coeffs_c2(s, &psis)?;
            let pairing = normalform::nf_coeffs_c2_pairing(s, &psis)?;
            let ok = [(a.q0, b.q0), (a.q1, b.q1), (pairing.q0, b.q0), (pairing.q1, b.q1)].iter().all(|&(x, y)| rel(x, y) < 1e-8);
            Ok(Check::new(
                format!("nf/c2-routes/s={s}"),
                ok,
                json!({"psi_formula": [a.q0, a.q1], "closed": [b.q0, b.q1], "pairing": [pairing.q0, pairing.q1]}),
            ))
        });
    }
    for s in [0.25, 0.5, 1.0, 2.0, 4.0] {
        push(out, &format!("nf/c2-signs/s={s}"), || {
            let c = normalform::nf_coeffs_c2_closed(s)?;
            Ok(Check::new(format!("nf/c2-signs/s={s}"), c.q0 < 0.0 && c.q1 < 0.0, json!({"q0": c.q0, "q1": c.q1})))
        });
    }
    push(out, "nf/basis", || {
        let r = normalform::nf_basis_c3(dispersion::solve_k0(0.2)?)
            .identity_residual()
            .max(normalform::nf_basis_c2(1.0).identity_residual());
        Ok(Check::new("nf/basis", r < 1e-14, json!({"max_residual": r})))
    });
    for &(mu, k) in &[(1e-2, 1.0), (1e-2, 10.0), (1e-3, 1.0), (1e-3, 10.0), (-1e-2, 1.0), (-1e-3, 10.0)] {
        push(out, &format!("nf/c3-explicit/mu={mu}/k={k}"), || c3_truncated_check(0.2, mu, k));
    }
    for &(mu, k) in &[(1e-2, 0.01), (1e-3, 0.1), (-1e-2, 0.1)] {
        let name = format!("nf/c3-explicit-consistent/mu={mu}/k={k}");
        push(out, &name.clone(), || {
            let coeffs = normalform::nf_coeffs_c3_closed(0.2)?;
            let ts: Vec<f64> = (0..=4000).map(|i| -20.0 + 0.01 * i as f64).collect();
            let sol = GswTruncatedSolution::new(0.2, mu, k, 0.0, GswVariant::SelfConsistent)?;
            let r = sol.residual(&coeffs, &ts);
            Ok(Check::new(name, r.iter().all(|x| *x < 1e-12), json!({"residual": r})))
        });
    }
    let open = C2Open { p0: 0.7, p1: -1.3, p2: 0.4, q2: 0.9 };
    for s in [0.5, 1.0, 2.0] {
        for mu in [-1e-2, -1e-3] {
            let name = format!("nf/c2-envelope/s={s}/mu={mu}");
            push(out, &name.clone(), || {
                let c = normalform::nf_coeffs_c2_closed(s)?;
                let ts: Vec<f64> = (0..=4000).map(|i| -20.0 + 0.01 * i as f64).collect();
                let e0 = C2Envelope::new(s, mu, &c, C2Open::default(), 0.0)?;
                let e1 = C2Envelope::new(s, mu, &c, open, std::f64::consts::PI)?;
                let r = [e0.envelope_residual(&ts), e0.field_residual(&c, &ts), e1.field_residual(&c, &ts)];
                Ok(Check::new(name, r.iter().all(|x| *x < 1e-12), json!({"residual": r})))
            });
        }
    }
}

fn waves_suite(out: &mut Vec<Check>) {
    push(out, "waves/msw-scaling", || {
        let g = PeriodicGrid::new(4096, 400.0)?;
        let mus = [-4e-3, -2e-3, -1e-3];
        let mut ratios = Vec::new();
        for mu in mus {
            let p = waves::msw_profile(1.0, mu, 0.0, &g)?;
            let r = spectral::residual(&p, p.speed, p.tau)?;
            ratios.push(r.sup / r.sup_profile);
        }
        let lx: Vec<f64> = mus.iter().map(|m| m.abs().ln()).collect();
        let ly: Vec<f64> = ratios.iter().map(|r| r.ln()).collect();
        let (slope, _) = linear_fit(&lx, &ly);
        let monotone = ratios.windows(2).all(|w| w[1] < w[0]);
        Ok(Check::new(
            "waves/msw-scaling",
            monotone && slope >= 0.4 && ratios[2] < 0.2,
            json!({"mu": mus, "ratio": ratios, "slope": slope}),
        ))
    });
    push(out, "waves/gsw-scaling", || {
        let mut sups = Vec::new();
        let mus = [1e-2, 5e-3, 2.5e-3];
        for mu in mus {
            let gp = GswParams::new(mu, 1.0, 0.0, 0.0);
            let l = waves::gsw_commensurate_period(0.2, &gp, 200.0)?;
            let g = PeriodicGrid::new(4096, l)?;
            let p = waves::gsw_profile(0.2, &gp, &g)?;
            sups.push(spectral::residual(&p, p.speed, p.tau)?.sup);
        }
        Ok(Check::new("waves/gsw-scaling", sups.windows(2).all(|w| w[1] < w[0]), json!({"mu": mus, "sup_residual": sups})))
    });
    push(out, "waves/newton", || {
        let g = PeriodicGrid::new(4096, 400.0)?;
        let p = waves::msw_profile(1.0, -1e-3, 0.0, &g)?;
        let rep = spectral::newton_refine(&p, p.speed, p.tau, &NewtonOptions::default())?;
        let within = rep.history.iter().take(11).fold(f64::INFINITY, |a, b| a.min(*b));
        let dist = rep.profile.values.iter().zip(&p.values).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        Ok(Check::new(
            "waves/newton",
            within <= 1e-4 * rep.history[0] && dist <= 3.0 * rep.first_step,
            json!({"history": rep.history, "first_step": rep.first_step, "distance": dist}),
        ))
    });
    push(out, "waves/galilean", || {
        let gp = GswParams::new(-1e-2, 1.0, 0.0, 0.0);
        let l = waves::gsw_commensurate_period(0.2, &gp, 200.0)?;
        let g = PeriodicGrid::new(4096, l)?;
        let p = waves::gsw_profile(0.2, &gp, &g)?;
        let v = waves::gsw_pedestal_shift(&gp);
        let q = waves::galilean_shift(&p, v);
        let target = 1.0 + gp.mu.abs() * gp.rho().sqrt();
        let speed_err = (q.speed - target).abs();
        let r0 = spectral::residual(&p, p.speed, p.tau)?;
        let r1 = spectral::residual(&q, q.speed, q.tau)?;
        let inv = r0.values.iter().zip(&r1.values).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        Ok(Check::new(
            "waves/galilean",
            speed_err <= 4.0 * f64::EPSILON * target && inv < 1e-12,
            json!({"speed": q.speed, "target": target, "speed_err": speed_err, "residual_change": inv}),
        ))
    });
}
