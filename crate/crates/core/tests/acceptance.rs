//! Acceptance criteria, one line each. Every criterion is checked at its stated tolerance;
//! the process fails if any line reads FAIL.

use std::process::Command;
use std::time::Instant;

use whitham_cm::dispersion;
use whitham_cm::error::Result;
use whitham_cm::kernel;
use whitham_cm::normalform::{self, C2Envelope, C2Open, GswTruncatedSolution, GswVariant};
use whitham_cm::quad::linear_fit;
use whitham_cm::reduction::{self, C2_TABLE, C3_TABLE};
use whitham_cm::spectral::{self, NewtonOptions, PeriodicGrid};
use whitham_cm::symbols::SymbolParams;
use whitham_cm::waves::{self, GswParams};

const TAUS: [f64; 4] = [0.05, 0.1, 0.2, 0.3];
const SS: [f64; 3] = [0.5, 1.0, 2.0];

struct Outcome {
    pass: bool,
    detail: String,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn sci(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(" ")
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn winding() -> Result<Outcome> {
    let mut points = vec![];
    for tau in [0.1, 0.2, 0.3] {
        points.push((format!("tau={tau}"), SymbolParams::c3(tau, 0.0)?));
    }
    for s in SS {
        points.push((format!("s={s}"), SymbolParams::c2(s, 0.0)?));
    }
    let mut pass = true;
    let mut slowest: f64 = 0.0;
    let mut bad = vec![];
    for (label, p) in points {
        let t = Instant::now();
        let rep = dispersion::roots_auto(&p)?;
        let secs = t.elapsed().as_secs_f64();
        slowest = slowest.max(secs);
        let expected = dispersion::expected_roots(&p)?.unwrap_or_default();
        let mult: u32 = rep.roots.iter().map(|r| r.1).sum();
        let located = rep.roots.len() == expected.len()
            && rep.roots.iter().zip(&expected).all(|((z, m), (x, n))| m == n && (z.re - x).abs() < 1e-6 && z.im.abs() < 1e-6);
        let ok = rep.winding == 4 && mult == 4 && located && secs < 10.0;
        if !ok {
            bad.push(format!("{label}: winding {} multiplicities {mult}", rep.winding));
        }
        pass &= ok;
    }
    Ok(Outcome { pass, detail: format!("6 points, slowest {slowest:.2} s{}", if bad.is_empty() { String::new() } else { format!("; {}", bad.join(", ")) }) })
}

fn kernel_checks() -> Result<Outcome> {
    let t = Instant::now();
    let mut pass = true;
    let mut parts = vec![];
    for tau in [0.1, 0.2] {
        let d = kernel::kernel_diagnostics(tau)?;
        let off = rel(d.singular_raw, d.expected_constant);
        let mass = (d.mass - 1.0).abs();
        let band = d.decay_rate / d.eta_star;
        pass &= off < 0.01 && mass < 1e-5 && (0.85..=1.15).contains(&band);
        parts.push(format!(
            "tau={tau}: sqrt(x)K at 1e-4 off by {:.2}% (fitted constant off by {:.1e}), |mass-1| {mass:.1e}, rate/eta* {band:.3}",
            100.0 * off,
            rel(d.singular_constant, d.expected_constant)
        ));
    }
    let secs = t.elapsed().as_secs_f64();
    pass &= secs < 60.0;
    Ok(Outcome { pass, detail: format!("{}; {secs:.1} s", parts.join("; ")) })
}

fn cm_algebra() -> Result<Outcome> {
    let t = Instant::now();
    let mut pass = true;
    let mut misses = vec![];
    for tau in TAUS {
        let closed = reduction::cm_coeffs_closed_c3(tau)?;
        let ansatz = reduction::cm_coeffs_ansatz(&SymbolParams::c3(tau, 0.0)?)?;
        for n in C3_TABLE {
            let e = rel(closed.get(n)?, ansatz.get(n)?);
            if e >= 1e-8 {
                pass = false;
                misses.push(format!("C3 psi{n} tau={tau} rel {e:.2e}"));
            }
        }
    }
    let mut verdicts = vec![];
    for s in SS {
        let v = reduction::adjudicate_psi10200(s)?;
        verdicts.push(format!("{:?}", v.verdict));
        let closed = reduction::cm_coeffs_closed_c2_with(s, v.verdict)?;
        let ansatz = reduction::cm_coeffs_ansatz(&SymbolParams::c2(s, 0.0)?)?;
        for n in C2_TABLE {
            let e = rel(closed.get(n)?, ansatz.get(n)?);
            if e >= 1e-8 {
                pass = false;
                misses.push(format!("C2 psi{n} s={s} rel {e:.2e}"));
            }
        }
    }
    verdicts.dedup();
    let secs = t.elapsed().as_secs_f64();
    pass &= secs < 30.0;
    let shown: Vec<String> = misses.iter().take(4).cloned().collect();
    Ok(Outcome {
        pass,
        detail: format!(
            "psi10200 reading {}; {} entries outside 1e-8{}; {secs:.1} s",
            verdicts.join("/"),
            misses.len(),
            if shown.is_empty() { String::new() } else { format!(" (first: {})", shown.join(", ")) }
        ),
    })
}

fn nf_coefficients() -> Result<Outcome> {
    let mut c3_worst: f64 = 0.0;
    for tau in TAUS {
        let psis = reduction::cm_coeffs_ansatz(&SymbolParams::c3(tau, 0.0)?)?;
        let (a, b) = normalform::nf_coeffs_c3(tau, &psis)?;
        c3_worst = c3_worst.max(b.p0.abs());
        for (x, y) in [(a.p1, b.p1), (a.p2, b.p2), (a.p3, b.p3), (a.q0, b.q0), (a.q1, b.q1)] {
            c3_worst = c3_worst.max(rel(x, y));
        }
    }
    let mut c2_worst: f64 = 0.0;
    let mut signs = true;
    for s in SS {
        let psis = reduction::cm_coeffs_ansatz(&SymbolParams::c2(s, 0.0)?)?;
        let (a, b) = normalform::nf_coeffs_c2(s, &psis)?;
        c2_worst = c2_worst.max(rel(a.q0, b.q0)).max(rel(a.q1, b.q1));
        signs &= b.q0 < 0.0 && b.q1 < 0.0 && a.q0 < 0.0 && a.q1 < 0.0;
    }
    let pass = c3_worst < 1e-10 && c2_worst < 1e-8 && signs;
    Ok(Outcome { pass, detail: format!("C3 routes {c3_worst:.1e}, C2 q0/q1 routes {c2_worst:.1e}, q0,q1 < 0 on s grid: {signs}") })
}

fn explicit_solutions() -> Result<Outcome> {
    let ts: Vec<f64> = (0..=4000).map(|i| -20.0 + 0.01 * i as f64).collect();
    let coeffs = normalform::nf_coeffs_c3_closed(0.2)?;
    let mut c3: f64 = 0.0;
    for (mu, k) in [(1e-2, 1.0), (1e-2, 10.0), (1e-3, 1.0), (1e-3, 10.0), (-1e-2, 1.0), (-1e-3, 10.0)] {
        let sol = GswTruncatedSolution::new(0.2, mu, k, 0.0, GswVariant::Printed)?;
        c3 = sol.residual(&coeffs, &ts).iter().fold(c3, |a, b| a.max(*b));
    }
    let mut c2: f64 = 0.0;
    for s in SS {
        let c = normalform::nf_coeffs_c2_closed(s)?;
        for mu in [-1e-2, -1e-3] {
            let e = C2Envelope::new(s, mu, &c, C2Open::default(), 0.0)?;
            c2 = c2.max(e.envelope_residual(&ts)).max(e.field_residual(&c, &ts));
        }
    }
    Ok(Outcome { pass: c3 < 1e-12 && c2 < 1e-12, detail: format!("C3 homoclinic family max residual {c3:.2e}, C2 envelope max residual {c2:.2e}") })
}

fn residual_scaling() -> Result<Outcome> {
    let t = Instant::now();
    let g = PeriodicGrid::new(4096, 400.0)?;
    let mus = [-4e-3, -2e-3, -1e-3];
    let mut ratios = vec![];
    for mu in mus {
        let p = waves::msw_profile(1.0, mu, 0.0, &g)?;
        let r = spectral::residual(&p, p.speed, p.tau)?;
        ratios.push(r.sup / r.sup_profile);
    }
    let lx: Vec<f64> = mus.iter().map(|m: &f64| m.abs().ln()).collect();
    let ly: Vec<f64> = ratios.iter().map(|r| r.ln()).collect();
    let (slope, _) = linear_fit(&lx, &ly);
    let msw_ok = ratios.windows(2).all(|w| w[1] < w[0]) && slope >= 0.4;
    let mut sups = vec![];
    for mu in [1e-2, 5e-3, 2.5e-3] {
        let gp = GswParams::new(mu, 1.0, 0.0, 0.0);
        let grid = PeriodicGrid::new(4096, waves::gsw_commensurate_period(0.2, &gp, 200.0)?)?;
        let p = waves::gsw_profile(0.2, &gp, &grid)?;
        sups.push(spectral::residual(&p, p.speed, p.tau)?.sup);
    }
    let gsw_ok = sups.windows(2).all(|w| w[1] < w[0]);
    let secs = t.elapsed().as_secs_f64();
    Ok(Outcome {
        pass: msw_ok && gsw_ok && secs < 300.0,
        detail: format!("MSW ratios {} slope {slope:.3}; GSW sup residuals {}; {secs:.1} s", sci(&ratios), sci(&sups)),
    })
}

fn newton() -> Result<Outcome> {
    let g = PeriodicGrid::new(4096, 400.0)?;
    let p = waves::msw_profile(1.0, -1e-3, 0.0, &g)?;
    let rep = spectral::newton_refine(&p, p.speed, p.tau, &NewtonOptions::default())?;
    let best = rep.history.iter().take(11).fold(f64::INFINITY, |a, b| a.min(*b));
    let factor = rep.history[0] / best;
    let dist = rep.profile.values.iter().zip(&p.values).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    Ok(Outcome {
        pass: factor >= 1e4 && dist <= 3.0 * rep.first_step,
        detail: format!(
            "residual {:.2e} -> {:.2e} in {} steps (factor {factor:.1e}); distance to initial {dist:.2e} vs bound {:.2e}",
            rep.history[0],
            rep.history.last().unwrap(),
            rep.iterations,
            3.0 * rep.first_step
        ),
    })
}

fn galilean() -> Result<Outcome> {
    let mut speed_err: f64 = 0.0;
    let mut inv: f64 = 0.0;
    for mu in [-1e-2, -5e-3, -1e-3] {
        let gp = GswParams::new(mu, 1.0, 0.0, 0.0);
        let grid = PeriodicGrid::new(4096, waves::gsw_commensurate_period(0.2, &gp, 200.0)?)?;
        let p = waves::gsw_profile(0.2, &gp, &grid)?;
        let q = waves::galilean_shift(&p, waves::gsw_pedestal_shift(&gp));
        let target = 1.0 + gp.mu.abs() * gp.rho().sqrt();
        speed_err = speed_err.max((q.speed - target).abs() / (f64::EPSILON * target));
        let r0 = spectral::residual(&p, p.speed, p.tau)?;
        let r1 = spectral::residual(&q, q.speed, q.tau)?;
        inv = r0.values.iter().zip(&r1.values).fold(inv, |a, (x, y)| a.max((x - y).abs()));
    }
    Ok(Outcome {
        pass: speed_err <= 4.0 && inv < 1e-12,
        detail: format!("speed identity within {speed_err:.1} ulp, residual change {inv:.1e}"),
    })
}

fn determinism() -> Result<Outcome> {
    let run = || Command::new(env!("CARGO_BIN_EXE_whitham-cm")).args(["verify", "--suite", "all"]).output().expect("run verify");
    let (a, b) = (run(), run());
    let same = a.stdout == b.stdout && !a.stdout.is_empty();
    let codes = (a.status.code(), b.status.code());
    Ok(Outcome {
        pass: same && codes == (Some(0), Some(0)),
        detail: format!("exit codes {:?}/{:?}, {} report bytes, identical: {same}", codes.0, codes.1, a.stdout.len()),
    })
}

fn main() {
    let criteria: [(&str, fn() -> Result<Outcome>); 9] = [
        ("winding number four with matching root sets", winding),
        ("kernel singularity, mass and decay", kernel_checks),
        ("closed-form vs ansatz center-manifold coefficients", cm_algebra),
        ("normal-form coefficient routes and signs", nf_coefficients),
        ("explicit truncated solutions below 1e-12", explicit_solutions),
        ("PDE residual scaling", residual_scaling),
        ("Newton refinement of the modulated wave", newton),
        ("Galilean speed identity and residual invariance", galilean),
        ("verify determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let out = f().unwrap_or_else(|e| Outcome { pass: false, detail: format!("error: {e}") });
        if !out.pass {
            failed += 1;
        }
        println!("criterion {} {}: {name}: {}", i + 1, verdict(out.pass), out.detail);
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
