use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use whitham_cm::config;
use whitham_cm::dispersion;
use whitham_cm::error::{Error, Result};
use whitham_cm::io;
use whitham_cm::normalform;
use whitham_cm::reduction::{self, Psi10200Reading};
use whitham_cm::spectral::{self, NewtonOptions, PeriodicGrid};
use whitham_cm::symbols::{self, SymbolParams};
use whitham_cm::verify::{self, Suite, VerifyConfig};
use whitham_cm::waves::{self, GswParams, WaveMeta, WaveProfile};

#[derive(Parser)]
#[command(
    name = "whitham-cm",
    version,
    about = "Center-manifold computations for the steady gravity-capillary Whitham equation",
    after_help = "Any subcommand accepts --config FILE (key=value lines or a JSON object keyed by long flag name); its entries override flags given on the command line."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Tabulate the bifurcation curves.
    Curves(CurvesArgs),
    /// Run a verification suite and print a JSON report.
    Verify(VerifyArgs),
    /// Build an asymptotic wave profile.
    Wave(WaveArgs),
    /// Residual of 𝓜φ − cφ + φ² − B for a profile CSV.
    Residual(ProfileInput),
    /// Newton-refine a profile CSV.
    Refine(RefineArgs),
    /// Center-manifold and normal-form coefficients.
    Coeffs(CoeffsArgs),
    /// Winding number of 1 − c0ℓ around the strip rectangle.
    Winding(WindingArgs),
}

#[derive(Args)]
#[command(args_override_self = true)]
struct CurvesArgs {
    #[arg(long)]
    c2: bool,
    #[arg(long)]
    c3: bool,
    #[arg(long)]
    c4: bool,
    /// start:stop:step over s (C2)
    #[arg(long)]
    s: Option<String>,
    /// start:stop:step over β (C3, C4)
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    All,
    Kernel,
    Fredholm,
    Coeffs,
    Nf,
    Waves,
}

#[derive(Args)]
#[command(args_override_self = true)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    suite: SuiteArg,
    /// Comma-separated τ grid overriding the suite default.
    #[arg(long, value_delimiter = ',')]
    tau: Option<Vec<f64>>,
    /// Comma-separated s grid overriding the suite default.
    #[arg(long, value_delimiter = ',')]
    s: Option<Vec<f64>>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum WaveKindArg {
    Gsw,
    Msw,
}

#[derive(Args)]
#[command(args_override_self = true)]
struct WaveArgs {
    #[arg(value_enum)]
    kind: WaveKindArg,
    #[arg(long, allow_hyphen_values = true)]
    mu: f64,
    /// Double-root wavenumber (msw).
    #[arg(long)]
    s: Option<f64>,
    /// Bond number (gsw).
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    kprime: f64,
    #[arg(long, default_value_t = 0.0)]
    kappa: f64,
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    #[arg(long = "N", default_value_t = 4096)]
    n: usize,
    #[arg(long = "L", default_value_t = 400.0)]
    l: f64,
    /// Adjust L to the nearest ripple-commensurate period (gsw).
    #[arg(long)]
    commensurate: bool,
    #[arg(long, default_value_t = 1.0)]
    guard: f64,
    #[arg(long, default_value_t = waves::DEFAULT_MU_CEILING)]
    ceiling: f64,
    /// Output CSV; a JSON sidecar is written next to it.
    #[arg(long, default_value = "profile.csv")]
    out: PathBuf,
}

#[derive(Args)]
#[command(args_override_self = true)]
struct ProfileInput {
    #[arg(long)]
    input: PathBuf,
    /// JSON sidecar with tau, speed and bernoulli; defaults to the input with a .json extension.
    #[arg(long)]
    meta: Option<PathBuf>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
}

#[derive(Args)]
#[command(args_override_self = true)]
struct RefineArgs {
    #[command(flatten)]
    input: ProfileInput,
    #[arg(long, default_value_t = 1e-11)]
    tol: f64,
    #[arg(long, default_value_t = 25)]
    max_iter: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceArg {
    Closed,
    Ansatz,
    Both,
}

#[derive(Args)]
#[command(args_override_self = true)]
struct CoeffsArgs {
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long, value_enum, default_value = "both")]
    source: SourceArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(args_override_self = true)]
struct WindingArgs {
    #[arg(long)]
    tau: f64,
    #[arg(long)]
    c0: f64,
    /// Strip half-width, or "auto".
    #[arg(long, default_value = "auto")]
    eta: String,
    #[arg(long)]
    r: Option<f64>,
}

fn parse_range(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::InvalidInput(format!("range '{spec}' is not start:stop:step"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let v: Vec<f64> = parts.iter().map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_>>()?;
    let (a, b, h) = (v[0], v[1], v[2]);
    if !(h > 0.0) {
        return Err(bad());
    }
    let mut out = Vec::new();
    let mut i = 0u64;
    loop {
        let x = a + i as f64 * h;
        if x > b + 1e-9 * h {
            break;
        }
        out.push(x);
        i += 1;
    }
    Ok(out)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => io::write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn curves(a: &CurvesArgs) -> Result<()> {
    let mut rows = Vec::new();
    let header: &[&str];
    if a.c2 {
        header = &["s", "beta", "alpha", "tau0", "c0"];
        let spec = a.s.as_deref().ok_or_else(|| Error::InvalidInput("--c2 needs --s".into()))?;
        for s in parse_range(spec)? {
            if s <= 0.0 {
                continue;
            }
            let p = dispersion::c2_point(s)?;
            rows.push(vec![s, p.beta, p.alpha, p.tau, p.c0]);
        }
    } else if a.c3 || a.c4 {
        header = &["beta", "alpha"];
        let spec = a.beta.as_deref().ok_or_else(|| Error::InvalidInput("--c3/--c4 need --beta".into()))?;
        for b in parse_range(spec)? {
            let keep = if a.c3 { b < 1.0 / 3.0 } else { b >= 1.0 / 3.0 };
            if keep {
                rows.push(vec![b, 1.0]);
            }
        }
    } else {
        return Err(Error::InvalidInput("choose one of --c2, --c3, --c4".into()));
    }
    emit(a.out.as_deref(), &io::csv_string(header, &rows))
}

fn write_profile(p: &WaveProfile, path: &Path, extra: serde_json::Value) -> Result<()> {
    let rows: Vec<Vec<f64>> = p.x.iter().zip(&p.values).map(|(x, y)| vec![*x, *y]).collect();
    io::write_text(path, &io::csv_string(&["x", "phi"], &rows))?;
    let meta = json!({
        "tau": p.tau,
        "speed": p.speed,
        "bernoulli": p.bernoulli,
        "N": p.grid.n,
        "L": p.grid.l,
        "meta": p.meta,
        "extra": extra,
    });
    io::write_text(&path.with_extension("json"), &io::to_pinned_json(&meta)?)
}

fn wave(a: &WaveArgs) -> Result<()> {
    let profile = match a.kind {
        WaveKindArg::Gsw => {
            let tau = a.tau.ok_or_else(|| Error::InvalidInput("gsw needs --tau".into()))?;
            let mut gp = GswParams::new(a.mu, a.kprime, a.kappa, a.theta);
            gp.guard_constant = a.guard;
            gp.mu_ceiling = a.ceiling;
            let l = if a.commensurate { waves::gsw_commensurate_period(tau, &gp, a.l)? } else { a.l };
            waves::gsw_profile(tau, &gp, &PeriodicGrid::new(a.n, l)?)?
        }
        WaveKindArg::Msw => {
            let s = a.s.ok_or_else(|| Error::InvalidInput("msw needs --s".into()))?;
            let g = PeriodicGrid::new(a.n, a.l)?;
            waves::msw_profile_with(s, a.mu, a.theta, &g, Default::default(), a.ceiling)?
        }
    };
    if a.ceiling != waves::DEFAULT_MU_CEILING {
        eprintln!("warning: |mu| ceiling overridden to {}", a.ceiling);
    }
    write_profile(&profile, &a.out, json!(null))
}

fn load_profile(inp: &ProfileInput) -> Result<WaveProfile> {
    let (x, y) = io::read_profile_csv(&inp.input)?;
    let n = x.len();
    if n < 2 {
        return Err(Error::InvalidInput("profile has fewer than two rows".into()));
    }
    let dx = x[1] - x[0];
    let grid = PeriodicGrid::new(n, dx * n as f64)?;
    let meta_path = inp.meta.clone().unwrap_or_else(|| inp.input.with_extension("json"));
    let meta: serde_json::Value = match std::fs::read_to_string(&meta_path) {
        Ok(t) => serde_json::from_str(&t).map_err(|e| Error::InvalidInput(format!("{}: {e}", meta_path.display())))?,
        Err(_) => json!({}),
    };
    let field = |k: &str| meta.get(k).and_then(|v| v.as_f64());
    let tau = inp.tau.or(field("tau")).ok_or_else(|| Error::InvalidInput("need --tau or a sidecar".into()))?;
    let speed = inp.c.or(field("speed")).ok_or_else(|| Error::InvalidInput("need --c or a sidecar".into()))?;
    let meta_struct = meta
        .get("meta")
        .and_then(|m| serde_json::from_value::<WaveMeta>(m.clone()).ok())
        .unwrap_or_else(WaveMeta::imported);
    Ok(WaveProfile {
        grid,
        x,
        values: y,
        speed,
        tau,
        bernoulli: field("bernoulli").unwrap_or(0.0),
        meta: meta_struct,
    })
}

fn residual_cmd(inp: &ProfileInput) -> Result<()> {
    let p = load_profile(inp)?;
    let r = spectral::residual(&p, p.speed, p.tau)?;
    println!("{}", io::to_pinned_json(&r)?);
    Ok(())
}

fn refine_cmd(a: &RefineArgs) -> Result<()> {
    let p = load_profile(&a.input)?;
    let opts = NewtonOptions { tol: a.tol, max_iter: a.max_iter, ..Default::default() };
    let rep = spectral::newton_refine(&p, p.speed, p.tau, &opts)?;
    for (i, r) in rep.history.iter().enumerate() {
        eprintln!("iter {i} residual {}", io::fmt_f64(*r));
    }
    let out = a.out.clone().unwrap_or_else(|| {
        let stem = a.input.input.file_stem().and_then(|s| s.to_str()).unwrap_or("profile");
        a.input.input.with_file_name(format!("{stem}_refined.csv"))
    });
    write_profile(&rep.profile, &out, json!({"history": rep.history, "first_step": rep.first_step}))
}

fn coeffs_cmd(a: &CoeffsArgs) -> Result<()> {
    let (closed, ansatz, nf) = match (a.tau, a.s) {
        (Some(tau), None) => {
            let closed = reduction::cm_coeffs_closed_c3(tau)?;
            let ansatz = reduction::cm_coeffs_ansatz(&SymbolParams::c3(tau, 0.0)?)?;
            let (c, s) = normalform::nf_coeffs_c3(tau, &ansatz)?;
            (closed, ansatz, json!({"closed": c, "solvability": s}))
        }
        (None, Some(s)) => {
            let closed = reduction::cm_coeffs_closed_c2(s)?;
            let ansatz = reduction::cm_coeffs_ansatz(&SymbolParams::c2(s, 0.0)?)?;
            let (f, c) = normalform::nf_coeffs_c2(s, &ansatz)?;
            let verdict = reduction::adjudicate_psi10200(s)?;
            let helper = reduction::cm_coeffs_closed_c2_with(s, Psi10200Reading::HelperProduct)?;
            (closed, ansatz, json!({"psi_formula": f, "closed": c, "psi10200": verdict, "closed_helper_product": helper}))
        }
        _ => return Err(Error::InvalidInput("give exactly one of --tau (C3) or --s (C2)".into())),
    };
    let body = match a.source {
        SourceArg::Closed => json!({"cm": closed, "nf": nf}),
        SourceArg::Ansatz => json!({"cm": ansatz, "nf": nf}),
        SourceArg::Both => json!({"cm_closed": closed, "cm_ansatz": ansatz, "nf": nf}),
    };
    emit(a.out.as_deref(), &(io::to_pinned_json(&body)? + "\n"))
}

fn winding_cmd(a: &WindingArgs) -> Result<()> {
    let params = if a.c0 == 1.0 && a.tau > 0.0 && a.tau < 1.0 / 3.0 {
        SymbolParams::c3(a.tau, 0.0)?
    } else {
        let p = SymbolParams::generic(a.tau, a.c0, 0.0);
        p.validate()?;
        p
    };
    let (eta, r) = if a.eta == "auto" {
        let (et, r) = dispersion::certify_strip(&params)?;
        (0.5 * symbols::eta_star(params.tau).min(et), r)
    } else {
        let e = a.eta.parse::<f64>().map_err(|_| Error::InvalidInput(format!("bad --eta '{}'", a.eta)))?;
        (e, 5.0 + dispersion::solve_k0(params.tau).unwrap_or(0.0))
    };
    let w = dispersion::winding_number(&params, eta, a.r.unwrap_or(r))?;
    println!("{w}");
    Ok(())
}

fn verify_cmd(a: &VerifyArgs) -> Result<bool> {
    let suite = match a.suite {
        SuiteArg::All => Suite::All,
        SuiteArg::Kernel => Suite::Kernel,
        SuiteArg::Fredholm => Suite::Fredholm,
        SuiteArg::Coeffs => Suite::Coeffs,
        SuiteArg::Nf => Suite::Nf,
        SuiteArg::Waves => Suite::Waves,
    };
    let cfg = VerifyConfig { taus: a.tau.clone(), ss: a.s.clone() };
    let report = verify::run(suite, &cfg);
    emit(a.out.as_deref(), &(io::to_pinned_json(&report)? + "\n"))?;
    Ok(report.ok())
}

fn main() -> ExitCode {
    let args = match config::expand_args(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            e.print().ok();
            return ExitCode::from(code);
        }
    };
    let res = match &cli.cmd {
        Cmd::Curves(a) => curves(a),
        Cmd::Verify(a) => match verify_cmd(a) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(2),
            Err(e) => Err(e),
        },
        Cmd::Wave(a) => wave(a),
        Cmd::Residual(a) => residual_cmd(a),
        Cmd::Refine(a) => refine_cmd(a),
        Cmd::Coeffs(a) => coeffs_cmd(a),
        Cmd::Winding(a) => winding_cmd(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
