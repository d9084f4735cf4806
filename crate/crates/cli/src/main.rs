use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use integro_spectral::config::{OutputFormat, RunConfig};
use integro_spectral::format::round_sig;
use integro_spectral::inverse::{reconstruct, report_json, ExtractOptions};
use integro_spectral::spectral::io::{read_spectrum, read_weyl_table, write_spectrum, write_weyl_table, WeylRow};
use integro_spectral::spectral::{
    eigenvalues_with, fit_omega, EigenOptions, Family, GridPolicy, Spectrum, TailModel, WeylFunction,
};
use integro_spectral::verify::{verify, VerifyOptions};
use integro_spectral::{Error, C64};
use serde_json::{json, Map, Value};

#[derive(Parser)]
#[command(name = "integro-spectral", version, about = "Forward and inverse spectral computations for integro-differential operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output file; defaults to `output.path` from the config, then stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues of one boundary family as CSV (or JSON).
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// 1: y(0) = y(π) = 0; 2: y′(0) = y(π) = 0.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        k: u8,
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Tabulates the Weyl-type function N(λ).
    Weyl {
        #[command(flatten)]
        common: Common,
        /// `re` or `re:im`; repeatable. Defaults to the configured ray.
        #[arg(long = "lambda", allow_hyphen_values = true, value_parser = parse_lambda)]
        lambdas: Vec<C64>,
    },
    /// Identity checks; exits 4 if any fails.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Taylor coefficients of q at 0 from N(λ).
    Invert {
        #[command(flatten)]
        common: Common,
        /// `self`, `table:<path>` or `spectra:<path1>,<path2>`.
        #[arg(long, default_value = "self")]
        weyl_source: String,
    },
}

fn parse_lambda(s: &str) -> Result<C64, String> {
    let (re, im) = s.split_once(':').unwrap_or((s, "0"));
    let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{s}`: {e}"));
    let v = C64::new(parse(re)?, parse(im)?);
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

/// A failure with its exit status.
struct Failure {
    code: u8,
    message: String,
    /// Written to the output before exiting, when present.
    report: Option<Value>,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) | Error::NotOnLadder { .. } | Error::InvalidArgument(_) | Error::Csv(_) | Error::Json(_) => 2,
            Error::EnumerationIncomplete { .. } => 3,
            Error::Divergence { .. } => 5,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
            report: None,
        }
    }
}

type Outcome = Result<Vec<u8>, Failure>;

fn load(common: &Common) -> Result<RunConfig, Failure> {
    Ok(RunConfig::load(&common.config)?)
}

fn out_path(common: &Common, cfg: Option<&RunConfig>) -> Option<PathBuf> {
    common
        .out
        .clone()
        .or_else(|| cfg.and_then(|c| c.output.path.as_ref().map(PathBuf::from)))
}

fn json_bytes(v: &Value) -> Vec<u8> {
    let mut text = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    text.push('\n');
    text.into_bytes()
}

fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(round_sig(x))
    } else {
        Value::Null
    }
}

fn grid_policy(cfg: &RunConfig) -> GridPolicy {
    GridPolicy {
        base: cfg.grid.n,
        ..GridPolicy::default()
    }
}

fn cmd_spectrum(cfg: &RunConfig, k: u8, n_max: Option<usize>) -> Outcome {
    let family = Family::from_index(k)?;
    let n_max = n_max.unwrap_or(cfg.spectral.n_max);
    let opts = EigenOptions {
        grid: cfg.grid.n,
        ..EigenOptions::default()
    };
    let spec = eigenvalues_with(&cfg.operator()?, family, n_max, &opts)?;
    match cfg.output.format {
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            write_spectrum(&mut buf, &spec)?;
            Ok(buf)
        }
        OutputFormat::Json => {
            let rows: Vec<Value> = spec
                .values
                .iter()
                .enumerate()
                .map(|(i, &l)| {
                    json!({
                        "n": i + 1,
                        "lambda": num(l),
                        "sqrt_lambda": num(l.signum() * l.abs().sqrt()),
                        "center_gap": num(spec.center_gap(i + 1)),
                    })
                })
                .collect();
            Ok(json_bytes(&json!({"k": k, "rows": rows})))
        }
    }
}

fn cmd_weyl(cfg: &RunConfig, lambdas: &[C64]) -> Outcome {
    let lambdas = if lambdas.is_empty() {
        cfg.sector_ray()?.lambdas()
    } else {
        lambdas.to_vec()
    };
    let w = WeylFunction::forward_with(cfg.operator()?, grid_policy(cfg));
    let mut rows = Vec::with_capacity(lambdas.len());
    for &lambda in &lambdas {
        let value = match w.eval(lambda) {
            Ok(v) => Some(v),
            Err(Error::WeylPole { .. }) => None,
            Err(e) => return Err(e.into()),
        };
        rows.push(WeylRow { lambda, value });
    }
    match cfg.output.format {
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            write_weyl_table(&mut buf, &rows)?;
            Ok(buf)
        }
        OutputFormat::Json => {
            let pair = |c: C64| json!([num(c.re), num(c.im)]);
            let rows: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "lambda": pair(r.lambda),
                        "N": r.value.map_or(Value::Null, pair),
                        "status": if r.value.is_some() { "ok" } else { "pole" },
                    })
                })
                .collect();
            Ok(json_bytes(&json!({"rows": rows})))
        }
    }
}

fn cmd_verify(cfg: &RunConfig, seed: u64) -> Outcome {
    let opts = VerifyOptions {
        n: cfg.grid.n,
        seed,
        ..VerifyOptions::default()
    };
    let report = verify(&cfg.operator()?, &opts);
    let bytes = json_bytes(&report.to_json());
    if report.all_pass() {
        Ok(bytes)
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passes()).map(|c| c.name).collect();
        Err(Failure {
            code: 4,
            message: format!("verification failed: {}", failed.join(", ")),
            report: Some(report.to_json()),
        })
    }
}

fn open(path: &Path) -> Result<File, Failure> {
    File::open(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())).into())
}

fn read_spectrum_file(path: &Path) -> Result<Spectrum, Failure> {
    let mut spec = read_spectrum(open(path)?)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    spec.omega_hint = fit_omega(&spec).ok().map(|f| f.omega);
    Ok(spec)
}

/// The target Weyl function and, in round-trip mode, the configured truth.
fn weyl_source(cfg: &RunConfig, source: &str) -> Result<(WeylFunction, Option<Vec<C64>>), Failure> {
    if source == "self" {
        let op = cfg.operator()?;
        let truth = op.potential.taylor_coefficients(cfg.inverse.k_max + 1);
        return Ok((WeylFunction::forward_with(op, grid_policy(cfg)), truth));
    }
    if let Some(path) = source.strip_prefix("table:") {
        let path = Path::new(path);
        let samples = read_weyl_table(open(path)?)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        return Ok((WeylFunction::from_table(samples), None));
    }
    if let Some(paths) = source.strip_prefix("spectra:") {
        let (a, b) = paths
            .split_once(',')
            .ok_or_else(|| Error::Config("spectra source needs two comma-separated paths".into()))?;
        let (a, b) = (read_spectrum_file(Path::new(a))?, read_spectrum_file(Path::new(b))?);
        let (d, n) = match (a.family, b.family) {
            (Family::Dirichlet, Family::Neumann) => (a, b),
            (Family::Neumann, Family::Dirichlet) => (b, a),
            _ => return Err(Error::Config("spectra source needs one k = 1 and one k = 2 file".into()).into()),
        };
        let tail = if d.omega_hint.is_some() && n.omega_hint.is_some() {
            TailModel::Shifted
        } else {
            TailModel::ZeroPotential
        };
        let w = WeylFunction::from_spectra(d, n, cfg.spectral.n_prod, tail)?;
        return Ok((w, None));
    }
    Err(Error::Config(format!("unknown weyl source `{source}`; use self, table:<path> or spectra:<p1>,<p2>")).into())
}

fn cmd_invert(cfg: &RunConfig, source: &str) -> Outcome {
    let (target, truth) = weyl_source(cfg, source)?;
    let ray = cfg.sector_ray()?;
    let kernel = cfg.kernel();
    match reconstruct(&target, &kernel, cfg.inverse.k_max, &ray, cfg.inverse.tol, &ExtractOptions::default()) {
        Ok(rec) => {
            let mut report = report_json(&rec, truth.as_deref());
            if let Value::Object(m) = &mut report {
                m.insert("status".into(), json!("ok"));
                if source == "self" && truth.is_none() {
                    if let Some(Value::Array(w)) = m.get_mut("warnings") {
                        w.push(json!("sampled potential: Taylor coefficients of the truth are not known, no errors reported"));
                    }
                }
            }
            Ok(json_bytes(&report))
        }
        Err(Error::Divergence { k, detail }) => {
            let mut m = Map::new();
            m.insert("status".into(), json!("divergence"));
            m.insert("failed_k".into(), json!(k));
            m.insert("detail".into(), json!(detail));
            m.insert(
                "ray".into(),
                json!({
                    "theta": num(ray.theta),
                    "s_values": ray.s_values.iter().map(|s| num(*s)).collect::<Vec<_>>(),
                }),
            );
            Err(Failure {
                code: 5,
                message: Error::Divergence { k, detail }.to_string(),
                report: Some(Value::Object(m)),
            })
        }
        Err(e) => Err(e.into()),
    }
}

fn emit(path: Option<&Path>, bytes: &[u8]) -> io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()
        }
    }
}

fn run(cli: Cli) -> ExitCode {
    let (common, result) = match &cli.command {
        Command::Spectrum { common, k, n_max } => (common, load(common).map(|c| (cmd_spectrum(&c, *k, *n_max), c))),
        Command::Weyl { common, lambdas } => (common, load(common).map(|c| (cmd_weyl(&c, lambdas), c))),
        Command::Verify { common, seed } => (common, load(common).map(|c| (cmd_verify(&c, *seed), c))),
        Command::Invert { common, weyl_source } => (common, load(common).map(|c| (cmd_invert(&c, weyl_source), c))),
    };
    let (outcome, cfg) = match result {
        Ok((outcome, cfg)) => (outcome, Some(cfg)),
        Err(f) => (Err(f), None),
    };
    let path = out_path(common, cfg.as_ref());
    let (bytes, failure) = match outcome {
        Ok(bytes) => (Some(bytes), None),
        Err(f) => (f.report.as_ref().map(json_bytes), Some(f)),
    };
    if let Some(bytes) = bytes {
        if let Err(e) = emit(path.as_deref(), &bytes) {
            eprintln!("error: cannot write output: {e}");
            return ExitCode::from(1);
        }
    }
    match failure {
        None => ExitCode::SUCCESS,
        Some(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn main() -> ExitCode {
    run(Cli::parse())
}
