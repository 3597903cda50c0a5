//! `manifold-ess`: kernel effective sample size for stored manifold chains.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 rejected input (including a chain
//! with zero feature variance), 3 unstable long-run variance, 4 precision
//! rule failed.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use manifold_ess::chainfile::{read_chain, write_atomic};
use manifold_ess::estimator::PrecisionReport;
use manifold_ess::experiments::{run_experiment, summary_csv, ExperimentConfig};
use manifold_ess::geometry::Point;
use manifold_ess::kernels::{default_truncation, geodesic_gauss_search, pd_audit, SearchPlan};
use manifold_ess::mmd::ReferenceSample;
use manifold_ess::rng::{stream_rng, STREAM_AUX};
use manifold_ess::samplers::uniform_sphere;
use manifold_ess::{
    kernel_ess, mmd2_empirical, precision_check, Bandwidth, EssReport, KernelSpec, LagWindow, MmdResult, WindowSpec,
};

const EXIT_IO: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_UNSTABLE: u8 = 3;
const EXIT_PRECISION_FAIL: u8 = 4;

#[derive(Parser)]
#[command(name = "manifold-ess", version, about = "Intrinsic kernel ESS for manifold-valued MCMC output")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Kernel ESS of a stored chain.
    Ess(EssArgs),
    /// V-statistic MMD² between two stored samples.
    Mmd(MmdArgs),
    /// Smallest Gram eigenvalue of a kernel on a point set.
    PdAudit(AuditArgs),
    /// The precision rule `σ̂²/n <= ε²`.
    Precision(PrecisionArgs),
    /// Rotation or mixture experiment; writes report.json, summary.csv, long.csv.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct KernelArgs {
    /// Family name (`sphere-poisson`, `sphere-gegenbauer`, `sphere-linear`,
    /// `grassmann-projection-gauss`, `spd-log-euclidean-gauss`,
    /// `correlation-cholesky-gauss`, `geodesic-gauss-unsafe`) or a JSON object.
    #[arg(long, default_value = "sphere-poisson")]
    kernel: String,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Bandwidth of the geodesic Gaussian.
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    truncation: Option<usize>,
    /// Cholesky coordinates for correlation matrices: `ecm` or `lecm`.
    #[arg(long)]
    variant: Option<String>,
}

#[derive(Args)]
struct WindowArgs {
    #[arg(long, value_enum, default_value_t = WindowArg::Bartlett)]
    window: WindowArg,
    /// `auto` for ⌊n^{1/3}⌋ or a positive integer.
    #[arg(long, default_value = "auto")]
    bandwidth: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum WindowArg {
    Bartlett,
    Truncated,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Args)]
struct EssArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    kernel: KernelArgs,
    #[command(flatten)]
    window: WindowArgs,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    output: OutputFormat,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MmdArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    /// An iid reference sample; adds `D̂ = n (MMD²(a, ref) - γ̂_0^ref / m)`.
    #[arg(long)]
    reference: Option<PathBuf>,
    #[command(flatten)]
    kernel: KernelArgs,
}

#[derive(Args)]
struct AuditArgs {
    #[command(flatten)]
    kernel: KernelArgs,
    /// Audit the points of this chain; otherwise `--points` uniform points on S².
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    points: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    tol: Option<f64>,
    /// Search random point sets and bandwidths for a failing geodesic Gaussian Gram.
    #[arg(long)]
    search: bool,
}

#[derive(Args)]
struct PrecisionArgs {
    #[arg(long)]
    epsilon: f64,
    /// An ESS report as written by `ess`.
    #[arg(long, conflicts_with = "input")]
    report: Option<PathBuf>,
    /// A chain to estimate first.
    #[arg(long, required_unless_present = "report")]
    input: Option<PathBuf>,
    #[command(flatten)]
    kernel: KernelArgs,
    #[command(flatten)]
    window: WindowArgs,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, value_parser = ["rotation", "mixture"], required_unless_present = "config", conflicts_with = "config")]
    preset: Option<String>,
    /// JSON configuration; unspecified fields keep the preset values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replications: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Io(String),
    Invalid(String),
}

impl From<manifold_ess::Error> for Failure {
    fn from(e: manifold_ess::Error) -> Self {
        if e.is_validation() {
            Failure::Invalid(e.to_string())
        } else {
            Failure::Io(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_VALIDATION);
    }
    let result = match cli.command {
        Command::Ess(a) => cmd_ess(a),
        Command::Mmd(a) => cmd_mmd(a),
        Command::PdAudit(a) => cmd_pd_audit(a),
        Command::Precision(a) => cmd_precision(a),
        Command::Experiment(a) => cmd_experiment(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_IO)
        }
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_VALIDATION)
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("MANIFOLD_ESS_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("MANIFOLD_ESS_THREADS = `{v}` is not a positive integer"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn kernel_spec(k: &KernelArgs) -> Result<KernelSpec, Failure> {
    let raw = k.kernel.trim();
    if raw.starts_with('{') {
        if k.rho.is_some() || k.beta.is_some() || k.h.is_some() || k.truncation.is_some() || k.variant.is_some() {
            return Err(Failure::Invalid("a JSON kernel carries its own parameters; drop --rho/--beta/--h/--truncation/--variant".into()));
        }
        return Ok(KernelSpec::from_json(raw)?);
    }
    let name = raw.to_ascii_lowercase().replace('-', "_");
    let mut obj = Map::new();
    let mut put = |key: &str, v: Option<Value>| {
        if let Some(v) = v {
            obj.insert(key.to_string(), v);
        }
    };
    let need = |flag: &str, v: Option<f64>| {
        v.ok_or_else(|| Failure::Invalid(format!("kernel `{raw}` needs --{flag}")))
    };
    let family = match name.as_str() {
        "sphere_poisson" => {
            put("rho", Some(json!(need("rho", k.rho)?)));
            "sphere_poisson"
        }
        "sphere_gegenbauer" => {
            let rho = need("rho", k.rho)?;
            let m = match k.truncation {
                Some(m) => m,
                None if rho > 0.0 && rho < 1.0 => default_truncation(rho),
                None => 1,
            };
            put("rho", Some(json!(rho)));
            put("truncation", Some(json!(m)));
            "sphere_gegenbauer"
        }
        "sphere_linear" => "sphere_linear",
        "grassmann_projection_gauss" | "spd_log_euclidean_gauss" => {
            put("beta", Some(json!(need("beta", k.beta)?)));
            if name == "spd_log_euclidean_gauss" {
                "spd_log_euclidean_gauss"
            } else {
                "grassmann_projection_gauss"
            }
        }
        "correlation_cholesky_gauss" => {
            put("beta", Some(json!(need("beta", k.beta)?)));
            put("variant", k.variant.as_ref().map(|v| json!(v.to_ascii_lowercase())));
            "correlation_cholesky_gauss"
        }
        "geodesic_gauss_unsafe" | "sphere_geodesic_gauss_unsafe" => {
            // Naming the unsafe family on the command line is the opt-in.
            put("h", Some(json!(need("h", k.h)?)));
            put("acknowledge_unsafe", Some(json!(true)));
            "sphere_geodesic_gauss_UNSAFE"
        }
        _ => return Err(Failure::Invalid(format!("unknown kernel family `{raw}`"))),
    };
    obj.insert("family".into(), json!(family));
    Ok(KernelSpec::from_json(&Value::Object(obj).to_string())?)
}

fn window_spec(w: &WindowArgs) -> Result<WindowSpec, Failure> {
    let bandwidth: Bandwidth = w.bandwidth.parse()?;
    let window = match w.window {
        WindowArg::Bartlett => LagWindow::Bartlett,
        WindowArg::Truncated => LagWindow::Truncated,
    };
    Ok(WindowSpec { window, bandwidth })
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes())?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn ess_csv(r: &EssReport) -> String {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let status = serde_json::to_value(r.status).expect("status serializes");
    format!(
        "n,gamma0,sigma2,ess,tau,bandwidth,window,status\n{},{},{},{},{},{},{},{}\n",
        r.n,
        r.gamma0,
        r.sigma2,
        opt(r.ess),
        opt(r.tau),
        r.bandwidth,
        r.window,
        status.as_str().unwrap_or_default()
    )
}

fn estimate(input: &Path, k: &KernelArgs, w: &WindowArgs) -> Result<EssReport, Failure> {
    let spec = kernel_spec(k)?;
    let window = window_spec(w)?;
    let chain = read_chain(input)?;
    Ok(kernel_ess(&chain, &spec, &window)?)
}

fn cmd_ess(a: EssArgs) -> CmdResult {
    let report = estimate(&a.input, &a.kernel, &a.window)?;
    let text = match a.output {
        OutputFormat::Json => to_json(&report),
        OutputFormat::Csv => ess_csv(&report),
    };
    emit(&text, a.out.as_deref())?;
    if report.is_ok() {
        Ok(0)
    } else {
        eprintln!("warning: long-run variance estimate {} is not positive", report.sigma2);
        Ok(EXIT_UNSTABLE)
    }
}

#[derive(Serialize)]
struct MmdOutput {
    #[serde(flatten)]
    result: MmdResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    reference_m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reference_gamma0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    d_hat: Option<f64>,
}

fn cmd_mmd(a: MmdArgs) -> CmdResult {
    let spec = kernel_spec(&a.kernel)?;
    let x = read_chain(&a.a)?;
    let y = read_chain(&a.b)?;
    let result = mmd2_empirical(&x, &y, &spec)?;
    let mut out = MmdOutput { result, reference_m: None, reference_gamma0: None, d_hat: None };
    if let Some(path) = &a.reference {
        let reference = ReferenceSample::new(&spec, &read_chain(path)?)?;
        out.reference_m = Some(reference.m());
        out.reference_gamma0 = Some(reference.gamma0());
        out.d_hat = Some(reference.corrected(&x)?);
    }
    emit(&to_json(&out), None)?;
    Ok(0)
}

fn cmd_pd_audit(a: AuditArgs) -> CmdResult {
    if a.search {
        let name = a.kernel.kernel.to_ascii_lowercase().replace('-', "_");
        if !matches!(name.as_str(), "geodesic_gauss_unsafe" | "sphere_geodesic_gauss_unsafe") {
            return Err(Failure::Invalid("--search applies only to --kernel geodesic-gauss-unsafe".into()));
        }
        let mut plan = SearchPlan { seed: a.seed, ..SearchPlan::default() };
        if let Some(h) = a.kernel.h {
            plan.bandwidths = vec![h];
        }
        emit(&to_json(&geodesic_gauss_search(&plan)?), None)?;
        return Ok(0);
    }
    let spec = kernel_spec(&a.kernel)?;
    let points: Vec<Point> = match &a.input {
        Some(p) => read_chain(p)?.points().to_vec(),
        None => {
            let mut rng = stream_rng(a.seed, STREAM_AUX);
            (0..a.points).map(|_| Point::Sphere(uniform_sphere(3, &mut rng))).collect()
        }
    };
    emit(&to_json(&pd_audit(&spec, &points, a.tol)?), None)?;
    Ok(0)
}

fn cmd_precision(a: PrecisionArgs) -> CmdResult {
    let report = match (&a.report, &a.input) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str::<EssReport>(&text)
                .map_err(|e| Failure::Invalid(format!("{}: not an ESS report: {e}", path.display())))?
        }
        (None, Some(input)) => estimate(input, &a.kernel, &a.window)?,
        (None, None) => unreachable!("clap requires one of --report and --input"),
    };
    if !report.is_ok() {
        eprintln!("error: the ESS report has status unstable_sigma");
        return Ok(EXIT_UNSTABLE);
    }
    let p: PrecisionReport = precision_check(&report, a.epsilon)?;
    emit(&to_json(&p), None)?;
    Ok(if p.pass_risk { 0 } else { EXIT_PRECISION_FAIL })
}

fn cmd_experiment(a: ExperimentArgs) -> CmdResult {
    let mut cfg = match (&a.preset, &a.config) {
        (Some(name), _) => ExperimentConfig::preset(name)?,
        (None, Some(path)) => ExperimentConfig::from_json(&std::fs::read_to_string(path)?)?,
        (None, None) => unreachable!("clap requires one of --preset and --config"),
    };
    if let Some(seed) = a.seed {
        cfg.set_seed(seed);
    }
    if let Some(r) = a.replications {
        cfg.set_replications(r)?;
    }
    let report = run_experiment(&cfg)?;
    report.write_to(&a.out)?;
    emit(&summary_csv(report.summary()), None)?;
    Ok(0)
}
