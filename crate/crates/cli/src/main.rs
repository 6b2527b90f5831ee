//! `selfsim` — command-line front end for the self-similar potential
//! toolkit: q-series evaluation, oscillator superposition states, dressing
//! chains, spectra, pantograph equations, coherent states, and the full
//! verification suite.
//!
//! Outputs are deterministic: identical configurations produce
//! byte-identical files, every numeric file carries a config hash and
//! tolerance metadata, and JSON reports keep precision-critical numbers as
//! decimal strings. Parameter precedence is flags > config file > defaults.

mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use selfsim::canonical;
use selfsim::chain::{
    chain_residual_on_grid, march_delay, solve_series, ChainParams, ChainParity,
    ClosedFormChain, ClosedFormName,
};
use selfsim::coherent;
use selfsim::grid::{Grid, RealGridFn};
use selfsim::pantograph::{
    self, analytic_series, dirichlet_series, equation_residual, march_advanced, march_retarded,
    FreeCsEvaluator, PantographKind, PantographProblem,
};
use selfsim::qseries::{self, PochhammerOrder, QParam};
use selfsim::spectral::{
    discretize, lowest_eigenpairs, verify_arithmetic, verify_geometric, BoundaryCondition,
};
use selfsim::verify;

#[derive(Parser)]
#[command(
    name = "selfsim",
    about = "Self-similar Schrödinger potentials, q-deformed ladder algebras, and coherent states",
    version
)]
struct Cli {
    /// JSON config file; keys are subcommand names, values override defaults
    /// (explicit flags override the config)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate q-special functions
    Qseries {
        #[command(subcommand)]
        action: QseriesAction,
    },
    /// Harmonic-oscillator coherent states and their superpositions
    Canon(CanonArgs),
    /// Solve or verify the q-closed dressing chain
    Chain {
        #[command(subcommand)]
        action: ChainAction,
    },
    /// Finite-difference spectra and model fits
    Spectrum(SpectrumArgs),
    /// Pantograph delay/advance equations
    Pantograph(PantographArgs),
    /// q-coherent states of the self-similar potentials
    Coherent(CoherentArgs),
    /// Run the full acceptance suite and emit a pass/fail summary
    VerifyAll(VerifyArgs),
}

#[derive(Subcommand)]
enum QseriesAction {
    /// Evaluate one function at one point
    Eval(QseriesArgs),
}

#[derive(Args)]
struct QseriesArgs {
    #[arg(long, value_enum)]
    function: QFunction,
    /// deformation parameter q (base of the series)
    #[arg(long)]
    q: Option<f64>,
    /// first parameter (a), real and imaginary parts
    #[arg(long, default_value_t = 0.0)]
    a_re: f64,
    #[arg(long, default_value_t = 0.0)]
    a_im: f64,
    /// second parameter (b)
    #[arg(long, default_value_t = 0.0)]
    b_re: f64,
    #[arg(long, default_value_t = 0.0)]
    b_im: f64,
    /// argument z
    #[arg(long, default_value_t = 0.0)]
    z_re: f64,
    #[arg(long, default_value_t = 0.0)]
    z_im: f64,
    /// Pochhammer order (negative allowed); omit for the infinite product
    #[arg(long)]
    n: Option<i64>,
    /// exponent τ and scale c of the q-beta integral
    #[arg(long, default_value_t = 0.3)]
    tau: f64,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum QFunction {
    Qpochhammer,
    Qbracket,
    QexpSmall,
    QexpBig,
    Phi11,
    Psi11,
    BetaIntegral,
    BetaQuadrature,
}

#[derive(Args)]
struct CanonArgs {
    #[arg(long, value_enum, default_value_t = CanonKind::Canonical)]
    kind: CanonKind,
    #[arg(long)]
    alpha_re: Option<f64>,
    #[arg(long)]
    alpha_im: Option<f64>,
    /// parity angle φ (parity kind)
    #[arg(long)]
    phi: Option<f64>,
    /// superposition order M and residue class l (root kind)
    #[arg(long)]
    m_fold: Option<usize>,
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    x_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long, default_value = "canon")]
    out_prefix: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum CanonKind {
    Canonical,
    Parity,
    Root,
    /// Titulaer-Glauber state with the period-4 sign phases
    TitulaerPeriod4,
}

#[derive(Subcommand)]
enum ChainAction {
    /// Power-series + delay-marched superpotentials and potential
    Solve(ChainArgs),
    /// A-posteriori closure residual of the marched solution
    Residual(ChainArgs),
}

#[derive(Args)]
struct ChainArgs {
    #[arg(long)]
    n_period: Option<usize>,
    #[arg(long)]
    q: Option<f64>,
    /// single-period constant ω (N = 1 shorthand)
    #[arg(long)]
    omega: Option<f64>,
    /// comma-separated chain constants μ_0..μ_{N-1}
    #[arg(long, value_delimiter = ',')]
    mu: Option<Vec<f64>>,
    #[arg(long)]
    x_max: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long, default_value = "chain")]
    out_prefix: String,
}

#[derive(Args)]
struct SpectrumArgs {
    #[arg(long, value_enum, default_value_t = PotentialKind::Rational)]
    potential: PotentialKind,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    mu0: Option<f64>,
    #[arg(long)]
    mu1: Option<f64>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long, value_enum, default_value_t = FitKind::Auto)]
    fit: FitKind,
    #[arg(long, default_value = "spectrum")]
    out_prefix: String,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum PotentialKind {
    /// rational N = 3 chain potential with spectrum {0, 3, 4, 5, 6, ...}
    Rational,
    Harmonic,
    /// marched antisymmetric N = 1 self-similar potential
    Chain,
    /// singular oscillator on the half line
    SingularOsc,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum FitKind {
    Auto,
    Geometric,
    Arithmetic,
    None,
}

#[derive(Args)]
struct PantographArgs {
    #[arg(long, value_enum, default_value_t = PantographCliKind::Retarded)]
    kind: PantographCliKind,
    #[arg(long)]
    alpha_re: Option<f64>,
    #[arg(long)]
    alpha_im: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// seed value γ = ψ(0) (retarded) or power-law amplitude (advanced)
    #[arg(long)]
    seed: Option<f64>,
    #[arg(long)]
    x_min: Option<f64>,
    #[arg(long)]
    x_max: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    /// Dirichlet-series frequency scale b
    #[arg(long)]
    b: Option<f64>,
    /// linearly-independent state index s (momentum kind)
    #[arg(long)]
    s: Option<i32>,
    #[arg(long, default_value = "pantograph")]
    out_prefix: String,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum PantographCliKind {
    Series,
    Retarded,
    Advanced,
    Dirichlet,
    /// momentum-integral coherent state of the free-particle hierarchy
    Momentum,
}

#[derive(Args)]
struct CoherentArgs {
    #[arg(long, value_enum, default_value_t = CoherentKindCli::Annihilation)]
    kind: CoherentKindCli,
    #[arg(long)]
    alpha_re: Option<f64>,
    #[arg(long)]
    alpha_im: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    omega: Option<f64>,
    /// first-period energies E_0..E_{N-1} (general-n / bilateral kinds)
    #[arg(long, value_delimiter = ',')]
    e_list: Option<Vec<f64>>,
    #[arg(long)]
    l: Option<usize>,
    /// reference positive energy λ of the two-sided tower
    #[arg(long)]
    lambda: Option<f64>,
    /// eigenvector count for the coordinate synthesis
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long, default_value = "coherent")]
    out_prefix: String,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum CoherentKindCli {
    Annihilation,
    Qgt1,
    GeneralN,
    Bilateral,
    /// synthesize on the grid and report the eigen-equation residual
    Coordinate,
}

#[derive(Args)]
struct VerifyArgs {
    /// worker threads (also capped by SELFSIM_THREADS)
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Config-file lookup: cfg[section][key] as f64.
struct Config(Value);

impl Config {
    fn load(path: &Option<PathBuf>) -> Result<Config, String> {
        match path {
            None => Ok(Config(Value::Null)),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| format!("cannot read config {}: {e}", p.display()))?;
                let v: Value = serde_json::from_str(&text)
                    .map_err(|e| format!("config {} is not valid JSON: {e}", p.display()))?;
                Ok(Config(v))
            }
        }
    }

    fn f64(&self, section: &str, key: &str) -> Option<f64> {
        self.0.get(section)?.get(key)?.as_f64()
    }

    fn usize(&self, section: &str, key: &str) -> Option<usize> {
        self.0.get(section)?.get(key)?.as_u64().map(|v| v as usize)
    }
}

fn resolve<T>(flag: Option<T>, cfg: Option<T>, default: T) -> T {
    flag.or(cfg).unwrap_or(default)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // parse problems are precondition violations: exit 1
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let cfg = match Config::load(&cli.config) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    let result = match cli.command {
        Command::Qseries { action: QseriesAction::Eval(a) } => run_qseries(&a, &cfg),
        Command::Canon(a) => run_canon(&a, &cfg),
        Command::Chain { action } => match action {
            ChainAction::Solve(a) => run_chain(&a, &cfg, true),
            ChainAction::Residual(a) => run_chain(&a, &cfg, false),
        },
        Command::Spectrum(a) => run_spectrum(&a, &cfg),
        Command::Pantograph(a) => run_pantograph(&a, &cfg),
        Command::Coherent(a) => run_coherent(&a, &cfg),
        Command::VerifyAll(a) => return run_verify(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_precondition() { 1 } else { 2 })
        }
    }
}

fn run_qseries(a: &QseriesArgs, cfg: &Config) -> selfsim::Result<()> {
    let qv = resolve(a.q, cfg.f64("qseries", "q"), 0.5);
    let av = C64::new(a.a_re, a.a_im);
    let bv = C64::new(a.b_re, a.b_im);
    let zv = C64::new(a.z_re, a.z_im);
    let hash = output::config_hash(&format!(
        "qseries a={av} b={bv} z={zv} q={qv} n={:?} tau={} c={}",
        a.n, a.tau, a.c
    ));
    let sv = match a.function {
        QFunction::Qpochhammer => {
            let q = QParam::sub_unit(qv)?;
            let order = a.n.map_or(PochhammerOrder::Infinite, PochhammerOrder::Finite);
            qseries::qpochhammer(av, &q, order)?
        }
        QFunction::Qbracket => {
            let q = if qv.abs() == 1.0 { QParam::unit(qv)? } else { QParam::sub_unit(qv)? };
            let n = a.n.unwrap_or(1).max(0) as u32;
            let v = qseries::qbracket(n, &q);
            qseries::SeriesValue { value: C64::new(v, 0.0), est_error: 0.0, terms_used: 0, in_domain: true }
        }
        QFunction::QexpSmall => qseries::q_exp_small(zv, qv)?,
        QFunction::QexpBig => qseries::q_exp_big(zv, qv)?,
        QFunction::Phi11 => {
            let q = QParam::sub_unit(qv)?;
            qseries::basic_phi(&[av], &[bv], &q, zv)?
        }
        QFunction::Psi11 => {
            let q = QParam::sub_unit(qv)?;
            qseries::bilateral_psi(&[av], &[bv], &q, zv)?
        }
        QFunction::BetaIntegral => qseries::ramanujan_beta_integral(a.tau, a.c, qv)?,
        QFunction::BetaQuadrature => {
            let v = qseries::ramanujan_beta_quadrature(a.tau, a.c, qv)?;
            qseries::SeriesValue { value: C64::new(v, 0.0), est_error: 0.0, terms_used: 0, in_domain: true }
        }
    };
    let body = json!({
        "value_re": output::num(sv.value.re),
        "value_im": output::num(sv.value.im),
        "est_error": output::num(sv.est_error),
        "terms_used": sv.terms_used,
        "in_domain": sv.in_domain,
    });
    let v = output::json_with_meta(&hash, "series_tail=1e-16 product_tail=1e-17", body);
    match &a.out {
        Some(p) => output::write_json(p, &v).map_err(io_err)?,
        None => println!("{}", serde_json::to_string_pretty(&v).expect("json")),
    }
    Ok(())
}

fn run_canon(a: &CanonArgs, cfg: &Config) -> selfsim::Result<()> {
    let alpha = C64::new(
        resolve(a.alpha_re, cfg.f64("canon", "alpha_re"), 1.0),
        resolve(a.alpha_im, cfg.f64("canon", "alpha_im"), 0.0),
    );
    let phi = resolve(a.phi, cfg.f64("canon", "phi"), std::f64::consts::FRAC_PI_2);
    let m_fold = resolve(a.m_fold, cfg.usize("canon", "m_fold"), 2);
    let l = resolve(a.l, cfg.usize("canon", "l"), 0);
    let x_max = resolve(a.x_max, cfg.f64("canon", "x_max"), 8.0f64.max(3.0 * alpha.norm() + 6.0));
    let points = resolve(a.points, cfg.usize("canon", "points"), 1201);
    let state = match a.kind {
        CanonKind::Canonical => canonical::canonical_cs(alpha),
        CanonKind::Parity => canonical::parity_cs(alpha, phi),
        CanonKind::Root => canonical::root_superposition(alpha, m_fold, l)?,
        CanonKind::TitulaerPeriod4 => canonical::titulaer_glauber(
            |n| std::f64::consts::PI * (n as f64) * ((n as f64) - 1.0) / 2.0,
            alpha,
        ),
    };
    let hash = output::config_hash(&format!(
        "canon kind={} α={alpha} φ={phi} M={m_fold} l={l} x_max={x_max} points={points}",
        kind_name(a.kind)
    ));
    let grid = Grid::span(-x_max, x_max, points)?;
    let prefix = Path::new(&a.out_prefix);
    output::write_csv(
        &prefix.with_extension("wavefunction.csv"),
        &hash,
        "synthesis=hermite_recurrence",
        &["x", "re_psi", "im_psi"],
        grid.points().map(|x| {
            let v = state.wavefunction(x);
            vec![x, v.re, v.im]
        }),
    )
    .map_err(io_err)?;
    let m = canonical::moments(&state)?;
    let body = json!({
        "mean_x": output::num(m.mean_x),
        "mean_p": output::num(m.mean_p),
        "sigma_xx": output::num(m.sigma_xx),
        "sigma_pp": output::num(m.sigma_pp),
        "sigma_xp": output::num(m.sigma_xp),
        "delta": output::num(m.delta),
        "nmax": state.nmax(),
    });
    output::write_json(
        &prefix.with_extension("moments.json"),
        &output::json_with_meta(&hash, "norm_tail=1e-20", body),
    )
    .map_err(io_err)?;
    Ok(())
}

fn kind_name(k: CanonKind) -> &'static str {
    match k {
        CanonKind::Canonical => "canonical",
        CanonKind::Parity => "parity",
        CanonKind::Root => "root",
        CanonKind::TitulaerPeriod4 => "titulaer4",
    }
}

fn run_chain(a: &ChainArgs, cfg: &Config, emit_solution: bool) -> selfsim::Result<()> {
    let n_period = resolve(a.n_period, cfg.usize("chain", "n_period"), 1);
    let qv = resolve(a.q, cfg.f64("chain", "q"), 0.5);
    let mu = match (&a.mu, a.omega) {
        (Some(m), _) => m.clone(),
        (None, Some(w)) if n_period == 1 => vec![w],
        (None, Some(_)) => {
            return Err(selfsim::Error::InvalidInput(
                "--omega shorthand only applies to N = 1; pass --mu".into(),
            ))
        }
        (None, None) => match cfg.f64("chain", "omega") {
            Some(w) if n_period == 1 => vec![w],
            _ => vec![1.0; n_period],
        },
    };
    let x_max = resolve(a.x_max, cfg.f64("chain", "x_max"), 40.0);
    let step = resolve(a.step, cfg.f64("chain", "step"), 0.01);
    let params = ChainParams::new(n_period, QParam::sub_unit(qv)?, mu.clone(), ChainParity::Antisymmetric)?;
    let sol = solve_series(&params, 101)?;
    let grids = march_delay(&sol, x_max, step)?;
    let hash = output::config_hash(&format!(
        "chain N={n_period} q={qv} mu={mu:?} x_max={x_max} step={step}"
    ));
    let prefix = Path::new(&a.out_prefix);
    if emit_solution {
        let mut columns = vec!["x".to_string()];
        for j in 0..n_period {
            columns.push(format!("f{j}"));
        }
        columns.push("u".into());
        let cols: Vec<&str> = columns.iter().map(|s| s.as_str()).collect();
        let u = grids.potential()?;
        output::write_csv(
            &prefix.with_extension("solution.csv"),
            &hash,
            "closure_residual<=1e-8",
            &cols,
            (0..grids.grid.n).map(|i| {
                let mut row = vec![grids.grid.x(i)];
                for j in 0..n_period {
                    row.push(grids.f[j][i]);
                }
                row.push(u.values[i]);
                row
            }),
        )
        .map_err(io_err)?;
        let body = json!({
            "radius_est": output::num(sol.radius_est),
            "lambdas": output::num_array(&params.lambdas()),
            "omega": output::num(params.omega()),
            "nu": output::num(params.nu().unwrap_or(f64::NAN)),
            "energies": output::num_array(&params.energies().unwrap_or_default()),
            "series_coefficients_f0": output::num_array(&sol.series[0]),
        });
        output::write_json(
            &prefix.with_extension("meta.json"),
            &output::json_with_meta(&hash, "series_order=101", body),
        )
        .map_err(io_err)?;
    }
    let fs: Vec<RealGridFn> =
        (0..n_period).map(|j| grids.f_grid_fn(j)).collect::<selfsim::Result<_>>()?;
    let res = chain_residual_on_grid(&params, &fs)?;
    let body = json!({ "max_residual": output::num(res), "x_max": output::num(x_max) });
    output::write_json(
        &prefix.with_extension("residual.json"),
        &output::json_with_meta(&hash, "bound=1e-8", body),
    )
    .map_err(io_err)?;
    Ok(())
}

fn run_spectrum(a: &SpectrumArgs, cfg: &Config) -> selfsim::Result<()> {
    let qv = resolve(a.q, cfg.f64("spectrum", "q"), 0.5);
    let omega = resolve(a.omega, cfg.f64("spectrum", "omega"), 1.0);
    let levels = resolve(a.levels, cfg.usize("spectrum", "levels"), 5);
    let hash = output::config_hash(&format!(
        "spectrum potential={} q={qv} omega={omega} levels={levels}",
        match a.potential {
            PotentialKind::Rational => "rational",
            PotentialKind::Harmonic => "harmonic",
            PotentialKind::Chain => "chain",
            PotentialKind::SingularOsc => "singular",
        }
    ));
    let (mut report, vecs, default_fit, n_period) = match a.potential {
        PotentialKind::Rational => {
            let grid = Grid::span(-12.0, 12.0, 4000)?;
            let u = ClosedFormChain::new(ClosedFormName::PivRationalA).sample_potential(grid);
            let op = discretize(&u, BoundaryCondition::Dirichlet)?;
            let (r, v) = lowest_eigenpairs(&op, levels)?;
            (r, v, FitKind::None, 1)
        }
        PotentialKind::Harmonic => {
            let grid = Grid::span(-12.0, 12.0, 4000)?;
            let u = RealGridFn::sample(grid, |x| x * x);
            let op = discretize(&u, BoundaryCondition::Dirichlet)?;
            let (r, v) = lowest_eigenpairs(&op, levels)?;
            (r, v, FitKind::Arithmetic, 1)
        }
        PotentialKind::Chain => {
            let setup = coherent::n1_eigen_setup(qv, omega, 40.0, 8000, levels)?;
            (setup.report, setup.eigvecs, FitKind::Geometric, 1)
        }
        PotentialKind::SingularOsc => {
            let mu0 = resolve(a.mu0, cfg.f64("spectrum", "mu0"), 1.0);
            let mu1 = resolve(a.mu1, cfg.f64("spectrum", "mu1"), 0.5);
            let cf = ClosedFormChain::new(ClosedFormName::SingularOscillator { mu0, mu1 });
            // half-line grid starting one spacing from the origin
            let n_pts = 6000usize;
            let dx = 16.0 / n_pts as f64;
            let grid = Grid::new(dx, dx, n_pts)?;
            let u = cf.sample_potential(grid);
            let op = discretize(&u, BoundaryCondition::DirichletHalfLine)?;
            let (r, v) = lowest_eigenpairs(&op, levels)?;
            (r, v, FitKind::Arithmetic, 1)
        }
    };
    let fit = if a.fit == FitKind::Auto { default_fit } else { a.fit };
    let worst = match fit {
        FitKind::Geometric => Some(verify_geometric(&mut report, qv, n_period)?),
        FitKind::Arithmetic => Some(verify_arithmetic(&mut report, n_period)?),
        _ => None,
    };
    let prefix = Path::new(&a.out_prefix);
    let model = match &report.model {
        Some(m) => serde_json::to_value(m).expect("model"),
        None => Value::Null,
    };
    let body = json!({
        "eigenvalues": output::num_array(&report.eigenvalues),
        "model": model,
        "per_level_residual": output::num_array(&report.per_level_residual),
        "worst_fit_residual": worst.map(output::num),
        "grid": { "x0": output::num(report.grid_x0), "dx": output::num(report.grid_dx), "n": report.grid_n },
    });
    output::write_json(
        &prefix.with_extension("spectrum.json"),
        &output::json_with_meta(&hash, "eigenvector_residual<=1e-9", body),
    )
    .map_err(io_err)?;
    let mut columns = vec!["x".to_string()];
    for k in 0..vecs.len() {
        columns.push(format!("psi{k}"));
    }
    let cols: Vec<&str> = columns.iter().map(|s| s.as_str()).collect();
    let grid = vecs[0].grid;
    output::write_csv(
        &prefix.with_extension("eigenvectors.csv"),
        &hash,
        "normalization=trapezoid sign=first_extremum_positive",
        &cols,
        (0..grid.n).map(|i| {
            let mut row = vec![grid.x(i)];
            for v in &vecs {
                row.push(v.values[i]);
            }
            row
        }),
    )
    .map_err(io_err)?;
    Ok(())
}

fn run_pantograph(a: &PantographArgs, cfg: &Config) -> selfsim::Result<()> {
    let alpha = C64::new(
        resolve(a.alpha_re, cfg.f64("pantograph", "alpha_re"), 2.0),
        resolve(a.alpha_im, cfg.f64("pantograph", "alpha_im"), 0.0),
    );
    let qv = resolve(a.q, cfg.f64("pantograph", "q"), 0.5);
    let beta = resolve(a.beta, cfg.f64("pantograph", "beta"), 1.0);
    let seed = C64::new(resolve(a.seed, cfg.f64("pantograph", "seed"), 1.0), 0.0);
    let step = resolve(a.step, cfg.f64("pantograph", "step"), 0.01);
    let prefix = Path::new(&a.out_prefix);
    let hash = output::config_hash(&format!(
        "pantograph kind={} α={alpha} q={qv} β={beta} seed={seed} step={step}",
        match a.kind {
            PantographCliKind::Series => "series",
            PantographCliKind::Retarded => "retarded",
            PantographCliKind::Advanced => "advanced",
            PantographCliKind::Dirichlet => "dirichlet",
            PantographCliKind::Momentum => "momentum",
        }
    ));
    match a.kind {
        PantographCliKind::Series => {
            let x_max = resolve(a.x_max, cfg.f64("pantograph", "x_max"), 10.0);
            let n = ((x_max / step).floor() as usize + 1).max(3);
            let grid = Grid::new(0.0, step, n)?;
            output::write_csv(
                &prefix.with_extension("solution.csv"),
                &hash,
                "series_tail=1e-18",
                &["x", "re_psi", "im_psi"],
                grid.points().map(|x| {
                    let v = analytic_series(alpha, qv, x).expect("entire series");
                    vec![x, v.re, v.im]
                }),
            )
            .map_err(io_err)?;
        }
        PantographCliKind::Retarded | PantographCliKind::Advanced => {
            let kind = if a.kind == PantographCliKind::Retarded {
                PantographKind::Retarded
            } else {
                PantographKind::Advanced
            };
            let problem = PantographProblem::new(alpha, qv, beta, kind, seed)?;
            let sol = if kind == PantographKind::Retarded {
                let x_max = resolve(a.x_max, cfg.f64("pantograph", "x_max"), 60.0);
                march_retarded(&problem, x_max, step)?
            } else {
                let x_min = resolve(a.x_min, cfg.f64("pantograph", "x_min"), 1.0);
                let x_max = resolve(a.x_max, cfg.f64("pantograph", "x_max"), 400.0);
                march_advanced(&problem, x_min, x_max, step)?
            };
            output::write_csv(
                &prefix.with_extension("solution.csv"),
                &hash,
                "interior_residual<=1e-7",
                &["x", "re_psi", "im_psi"],
                (0..sol.grid.n).map(|i| {
                    vec![sol.grid.x(i), sol.values[i].re, sol.values[i].im]
                }),
            )
            .map_err(io_err)?;
            let res = equation_residual(&problem, &sol)?;
            let mut body = json!({ "interior_residual": output::num(res) });
            if kind == PantographKind::Advanced {
                body["decay_power"] =
                    Value::String(output::num(problem.advanced_decay_power()?.re));
            }
            output::write_json(
                &prefix.with_extension("residual.json"),
                &output::json_with_meta(&hash, "bound=1e-7", body),
            )
            .map_err(io_err)?;
        }
        PantographCliKind::Dirichlet => {
            let b = resolve(a.b, cfg.f64("pantograph", "b"), 1.0);
            let x_max = resolve(a.x_max, cfg.f64("pantograph", "x_max"), 100.0);
            let n = ((2.0 * x_max / step).floor() as usize + 1).max(3);
            let grid = Grid::new(-x_max, step, n)?;
            output::write_csv(
                &prefix.with_extension("solution.csv"),
                &hash,
                "n_range=60",
                &["x", "re_psi", "im_psi"],
                grid.points().map(|x| {
                    let v = dirichlet_series(alpha, qv, b, 60, x).expect("bounded series");
                    vec![x, v.re, v.im]
                }),
            )
            .map_err(io_err)?;
            let res = pantograph::dirichlet_term_recurrence_residual(alpha, qv, b, 60);
            output::write_json(
                &prefix.with_extension("residual.json"),
                &output::json_with_meta(
                    &hash,
                    "bound=1e-10",
                    json!({ "termwise_recurrence_residual": output::num(res) }),
                ),
            )
            .map_err(io_err)?;
        }
        PantographCliKind::Momentum => {
            let s = a.s.unwrap_or(0);
            let x_max = resolve(a.x_max, cfg.f64("pantograph", "x_max"), 20.0);
            let ev = FreeCsEvaluator::new(alpha, qv, &[beta], s)?;
            let n = ((2.0 * x_max / step).floor() as usize + 1).max(3);
            let grid = Grid::new(-x_max, step, n)?;
            output::write_csv(
                &prefix.with_extension("solution.csv"),
                &hash,
                "filon_mesh=24000",
                &["x", "re_psi", "im_psi"],
                grid.points().map(|x| {
                    let v = ev.eval(x);
                    vec![x, v.re, v.im]
                }),
            )
            .map_err(io_err)?;
            let body = json!({
                "decay_power": output::num(ev.decay_power()),
                "tau": output::num(ev.tau()),
                "norm_squared_momentum": output::num(ev.norm_squared_momentum()?),
            });
            output::write_json(
                &prefix.with_extension("meta.json"),
                &output::json_with_meta(&hash, "norm_identity=1e-4", body),
            )
            .map_err(io_err)?;
        }
    }
    Ok(())
}

fn run_coherent(a: &CoherentArgs, cfg: &Config) -> selfsim::Result<()> {
    let qv = resolve(a.q, cfg.f64("coherent", "q"), 0.5);
    let omega = resolve(a.omega, cfg.f64("coherent", "omega"), 1.0);
    let nu = omega / (1.0 - qv * qv);
    let alpha = C64::new(
        resolve(a.alpha_re, cfg.f64("coherent", "alpha_re"), 0.3 * nu.abs().sqrt()),
        resolve(a.alpha_im, cfg.f64("coherent", "alpha_im"), 0.0),
    );
    let prefix = Path::new(&a.out_prefix);
    let hash = output::config_hash(&format!(
        "coherent kind={} α={alpha} q={qv} ω={omega}",
        match a.kind {
            CoherentKindCli::Annihilation => "annihilation",
            CoherentKindCli::Qgt1 => "qgt1",
            CoherentKindCli::GeneralN => "general-n",
            CoherentKindCli::Bilateral => "bilateral",
            CoherentKindCli::Coordinate => "coordinate",
        }
    ));
    let emit_state = |state: &coherent::QCoherentState| -> selfsim::Result<()> {
        let (lo, hi) = state.index_range();
        let coeffs: Vec<Value> = (lo..=hi)
            .map(|n| {
                let c = state.coefficient(n);
                json!([n, output::num(c.re), output::num(c.im)])
            })
            .collect();
        let body = json!({
            "in_domain": state.in_domain,
            "nu": output::num(state.nu),
            "q": output::num(state.q),
            "coefficients": coeffs,
        });
        output::write_json(
            &prefix.with_extension("coefficients.json"),
            &output::json_with_meta(&hash, "coeff_tail=1e-16", body),
        )
        .map_err(io_err)
    };
    match a.kind {
        CoherentKindCli::Annihilation => {
            let s = coherent::qcoherent_fock(alpha, qv, omega, None)?;
            emit_state(&s)?;
        }
        CoherentKindCli::Qgt1 => {
            let s = coherent::qcoherent_fock_qgt1(alpha, qv, omega, None)?;
            emit_state(&s)?;
        }
        CoherentKindCli::GeneralN => {
            let e_list = a
                .e_list
                .clone()
                .unwrap_or_else(|| vec![-nu, -nu + omega / 2.0]);
            let l = resolve(a.l, cfg.usize("coherent", "l"), 0);
            let s = coherent::general_n_fock(alpha, &e_list, qv, l, 60)?;
            emit_state(&s)?;
        }
        CoherentKindCli::Bilateral => {
            let e_list = a.e_list.clone().unwrap_or_else(|| vec![-nu]);
            let lambda = resolve(a.lambda, cfg.f64("coherent", "lambda"), nu);
            let s = coherent::bilateral_fock(alpha, lambda, &e_list, qv, 60)?;
            emit_state(&s)?;
        }
        CoherentKindCli::Coordinate => {
            let levels = resolve(a.levels, cfg.usize("coherent", "levels"), 10);
            let setup = coherent::n1_eigen_setup(qv, omega, 40.0, 8000, levels)?;
            let rep = coherent::coordinate_cs(&setup.grids, &setup.eigvecs, alpha)?;
            output::write_csv(
                &prefix.with_extension("profile.csv"),
                &hash,
                "interior_residual<=5e-3",
                &["x", "re_psi", "im_psi"],
                (0..rep.psi.grid.n).map(|i| {
                    vec![rep.psi.grid.x(i), rep.psi.values[i].re, rep.psi.values[i].im]
                }),
            )
            .map_err(io_err)?;
            let body = json!({
                "residual": output::num(rep.residual),
                "truncation_dominated": rep.truncation_dominated,
                "kappa_expected": output::num(rep.kappa_expected),
                "kappa_fitted": output::num(rep.kappa_fitted),
            });
            output::write_json(
                &prefix.with_extension("report.json"),
                &output::json_with_meta(&hash, "residual_bound=5e-3 kappa_tol=10%", body),
            )
            .map_err(io_err)?;
        }
    }
    Ok(())
}

fn run_verify(a: &VerifyArgs) -> ExitCode {
    let cpus = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let env_cap = std::env::var("SELFSIM_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(usize::MAX);
    let threads = a.threads.unwrap_or(cpus).min(env_cap).max(1);
    let outcomes = verify::run_all(threads);
    let mut all_ok = true;
    for o in &outcomes {
        println!("{}", verify::summary_line(o));
        all_ok &= o.passed;
    }
    if let Some(path) = &a.out {
        let body = serde_json::to_value(&outcomes).expect("serializable");
        let v = output::json_with_meta(
            &output::config_hash(&format!("verify-all threads={threads}")),
            "per-criterion bounds pinned in the suite",
            body,
        );
        if let Err(e) = output::write_json(path, &v) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(1);
        }
    }
    if all_ok {
        println!("all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("one or more criteria FAILED");
        ExitCode::from(2)
    }
}

fn io_err(e: std::io::Error) -> selfsim::Error {
    selfsim::Error::InvalidInput(format!("io: {e}"))
}
