mod doc;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use symplectic_polar::random::{nondegenerate, rng, skew_hamiltonian, symplectic, valid_channel};
use symplectic_polar::{
    associated_skew_hamiltonian, associated_skew_hamiltonian_left, classify_channel,
    classify_skew_hamiltonian_eigenvalues, compose, decompose, normal_form, validate_channel, verify,
    CanonicalCase, CaseRequest, EigenClassification, Error, Factorization, Matrix64, TolerancePolicy, Variant,
};

use doc::{num, nums, rows};

/// Symplectic polar decompositions and Gaussian channel normal forms.
#[derive(Parser)]
#[command(name = "sympolar", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Global {
    /// Relative residual threshold.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Write the report (or generated document) here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Omit the timestamp field from reports.
    #[arg(long, global = true)]
    no_timestamp: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose one or more matrix documents.
    Decompose {
        inputs: Vec<PathBuf>,
        /// One of ht, th, rds, sdr, ms, as, mds, ads, sm, sa, sdm, sda.
        #[arg(long, short)]
        variant: Variant,
        /// Directory for factor files (default: next to each input).
        #[arg(long)]
        factors_dir: Option<PathBuf>,
        /// Worker threads for multiple inputs.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Recompute all residuals of a stored factorization.
    Verify {
        input: PathBuf,
        #[arg(long, short)]
        variant: Variant,
        /// The two factor documents, left to right.
        #[arg(long, num_args = 2, required = true)]
        factors: Vec<PathBuf>,
    },
    /// Gaussian channel operations.
    #[command(subcommand)]
    Channel(ChannelCommand),
    /// Write a seeded random instance.
    Generate { kind: Kind, n: usize, seed: u64 },
}

#[derive(Subcommand)]
enum ChannelCommand {
    /// Smallest eigenvalue of alpha - (i/2)(J - K^T J K).
    Validate { input: PathBuf },
    /// The product c2 c1.
    Compose {
        c2: PathBuf,
        c1: PathBuf,
        /// Also write the product as a channel document.
        #[arg(long)]
        result: Option<PathBuf>,
    },
    /// Canonical form with both symplectic transformations.
    NormalForm {
        input: PathBuf,
        /// auto, drform, aform or daform.
        #[arg(long, default_value = "auto")]
        case: String,
        /// Also write the canonical triple as a channel document.
        #[arg(long)]
        result: Option<PathBuf>,
    },
    /// Spectrum flags of -K^T J K J and admissible canonical forms.
    Classify { input: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Nondegenerate,
    Symplectic,
    #[value(name = "skew_hamiltonian", alias = "skew-hamiltonian")]
    SkewHamiltonian,
    #[value(name = "valid_channel", alias = "valid-channel")]
    ValidChannel,
}

impl Kind {
    fn name(self) -> &'static str {
        match self {
            Kind::Nondegenerate => "nondegenerate",
            Kind::Symplectic => "symplectic",
            Kind::SkewHamiltonian => "skew_hamiltonian",
            Kind::ValidChannel => "valid_channel",
        }
    }
}

const EXIT_IO: u8 = 1;
const EXIT_PRECONDITION: u8 = 2;
const EXIT_DEFECTIVE: u8 = 3;
const EXIT_VERIFY: u8 = 4;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::PreconditionViolated(_) | Error::AsymmetricAlpha { .. } => EXIT_PRECONDITION,
        Error::DefectiveEigenstructure(_) | Error::DerogatoryInput => EXIT_DEFECTIVE,
        Error::NonConvergence { .. } | Error::VerificationFailed(_) => EXIT_VERIFY,
        Error::InvalidDimension(_) | Error::DimensionMismatch { .. } | Error::NonFinite => EXIT_IO,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match exit_code(e) {
        EXIT_PRECONDITION => "precondition",
        EXIT_DEFECTIVE => "defective",
        EXIT_VERIFY => "numerical",
        _ => "input",
    }
}

struct Ctx {
    tol: TolerancePolicy,
    timestamp: bool,
}

impl Ctx {
    fn report(&self, operation: &str) -> Map<String, Value> {
        let mut r = Map::new();
        r.insert("operation".into(), Value::from(operation));
        r.insert("tolerance".into(), json!({ "rel_tol": num(self.tol.rel_tol), "imag_tol": num(self.tol.imag_tol) }));
        if self.timestamp {
            let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
            r.insert("timestamp".into(), Value::from(secs));
        }
        r
    }
}

/// A finished report and its exit code.
struct Outcome {
    report: Value,
    code: u8,
}

fn failed(mut report: Map<String, Value>, e: &Error) -> Outcome {
    report.insert("verdict".into(), Value::from("error"));
    report.insert("error".into(), json!({ "kind": error_kind(e), "message": e.to_string() }));
    Outcome { report: Value::Object(report), code: exit_code(e) }
}

fn classification(c: &EigenClassification) -> Value {
    json!({
        "has_zero": c.has_zero,
        "has_negative_real": c.has_negative_real,
        "has_positive_real": c.has_positive_real,
        "real_eigenvalues": nums(&c.real_eigenvalues),
        "spectral_radius": num(c.spectral_radius),
    })
}

fn factor_entries(f: &Factorization<f64>, x: &Matrix64, tol: &TolerancePolicy) -> Result<(Value, Value, bool)> {
    let rep = verify(x, f, tol)?;
    let factors = rep
        .structure
        .iter()
        .map(|(kind, r, holds)| json!({ "kind": kind.name(), "residual": num(*r), "holds": holds }))
        .collect();
    let recon = json!({ "residual": num(rep.reconstruction_residual), "holds": rep.reconstruction_ok });
    Ok((Value::Array(factors), recon, rep.ok))
}

fn spectrum_of(x: &Matrix64, v: Variant, tol: &TolerancePolicy) -> Option<Value> {
    let y = match v {
        Variant::HT | Variant::RDS | Variant::MS | Variant::AS | Variant::MDS | Variant::ADS => {
            associated_skew_hamiltonian(x)
        }
        _ => associated_skew_hamiltonian_left(x),
    };
    classify_skew_hamiltonian_eigenvalues(&y, tol).ok().map(|c| classification(&c))
}

fn factor_path(input: &Path, dir: Option<&Path>, v: Variant, i: usize) -> PathBuf {
    let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("input");
    let dir = dir.map(Path::to_path_buf).unwrap_or_else(|| input.parent().map(Path::to_path_buf).unwrap_or_default());
    dir.join(format!("{stem}.{}.{}.json", v.name().to_ascii_lowercase(), i + 1))
}

fn decompose_one(ctx: &Ctx, input: &Path, v: Variant, dir: Option<&Path>) -> Result<Outcome> {
    let d = doc::read(input)?;
    let x = &d.matrix;
    let mut r = ctx.report("decompose");
    r.insert("input".into(), Value::from(input.display().to_string()));
    r.insert("variant".into(), Value::from(v.name()));
    if let Some(seed) = d.seed {
        r.insert("seed".into(), Value::from(seed));
    }
    if let Some(c) = spectrum_of(x, v, &ctx.tol) {
        r.insert("classification".into(), c);
    }
    let f = match decompose(x, v, &ctx.tol) {
        Ok(f) => f,
        Err(e) => return Ok(failed(r, &e)),
    };
    let (factors, recon, ok) = factor_entries(&f, x, &ctx.tol)?;
    let mut files = Vec::new();
    for (i, m) in f.matrices().into_iter().enumerate() {
        let p = factor_path(input, dir, v, i);
        doc::write(&p, &doc::matrix_doc(m))?;
        files.push(Value::from(p.display().to_string()));
    }
    r.insert("factors".into(), factors);
    r.insert("factor_files".into(), Value::Array(files));
    r.insert("reconstruction".into(), recon);
    r.insert("verdict".into(), Value::from(if ok { "ok" } else { "fail" }));
    Ok(Outcome { report: Value::Object(r), code: if ok { 0 } else { EXIT_VERIFY } })
}

fn cmd_decompose(ctx: &Ctx, inputs: &[PathBuf], v: Variant, dir: Option<&Path>, jobs: usize) -> Result<Outcome> {
    if inputs.is_empty() {
        bail!("no input files");
    }
    if let Some(d) = dir {
        std::fs::create_dir_all(d).with_context(|| format!("cannot create {}", d.display()))?;
    }
    if inputs.len() == 1 {
        return decompose_one(ctx, &inputs[0], v, dir);
    }
    let jobs = jobs.clamp(1, inputs.len());
    let chunk = inputs.len().div_ceil(jobs);
    let results: Vec<Result<Outcome>> = std::thread::scope(|s| {
        let handles: Vec<_> = inputs
            .chunks(chunk)
            .map(|part| s.spawn(move || part.iter().map(|p| decompose_one(ctx, p, v, dir)).collect::<Vec<_>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut reports = Vec::with_capacity(results.len());
    let mut code = 0;
    for res in results {
        let o = res?;
        code = code.max(o.code);
        reports.push(o.report);
    }
    Ok(Outcome { report: Value::Array(reports), code })
}

fn cmd_verify(ctx: &Ctx, input: &Path, v: Variant, factors: &[PathBuf]) -> Result<Outcome> {
    let x = doc::read(input)?.matrix;
    let mats = factors.iter().map(|p| doc::read(p).map(|d| d.matrix)).collect::<Result<Vec<_>>>()?;
    let f = Factorization::from_factors(&x, v, mats)?;
    let mut r = ctx.report("verify");
    r.insert("input".into(), Value::from(input.display().to_string()));
    r.insert("variant".into(), Value::from(v.name()));
    let (entries, recon, ok) = factor_entries(&f, &x, &ctx.tol)?;
    r.insert("factors".into(), entries);
    r.insert("reconstruction".into(), recon);
    r.insert("verdict".into(), Value::from(if ok { "ok" } else { "fail" }));
    Ok(Outcome { report: Value::Object(r), code: if ok { 0 } else { EXIT_VERIFY } })
}

fn cmd_channel(ctx: &Ctx, cmd: &ChannelCommand) -> Result<Outcome> {
    match cmd {
        ChannelCommand::Validate { input } => {
            let c = doc::read(input)?.channel()?;
            let mut r = ctx.report("channel validate");
            match validate_channel(&c, &ctx.tol) {
                Ok(v) => {
                    r.insert("min_eigenvalue".into(), num(v.min_eigenvalue));
                    r.insert("valid".into(), Value::from(v.valid));
                    r.insert("verdict".into(), Value::from(if v.valid { "ok" } else { "fail" }));
                    Ok(Outcome { report: Value::Object(r), code: if v.valid { 0 } else { EXIT_VERIFY } })
                }
                Err(e) => Ok(failed(r, &e)),
            }
        }
        ChannelCommand::Compose { c2, c1, result } => {
            let a = doc::read(c2)?.channel()?;
            let b = doc::read(c1)?.channel()?;
            let mut r = ctx.report("channel compose");
            let p = match compose(&a, &b) {
                Ok(p) => p,
                Err(e) => return Ok(failed(r, &e)),
            };
            if let Some(path) = result {
                doc::write(path, &doc::channel_doc(&p))?;
            }
            r.insert("product".into(), Value::Object(doc::channel_doc(&p)));
            match validate_channel(&p, &ctx.tol) {
                Ok(v) => {
                    r.insert("min_eigenvalue".into(), num(v.min_eigenvalue));
                    r.insert("valid".into(), Value::from(v.valid));
                }
                Err(e) => return Ok(failed(r, &e)),
            }
            r.insert("verdict".into(), Value::from("ok"));
            Ok(Outcome { report: Value::Object(r), code: 0 })
        }
        ChannelCommand::NormalForm { input, case, result } => {
            let c = doc::read(input)?.channel()?;
            let request = if case.eq_ignore_ascii_case("auto") {
                CaseRequest::Auto
            } else {
                CaseRequest::Case(case.parse::<CanonicalCase>().map_err(|_| anyhow::anyhow!("unknown case '{case}'"))?)
            };
            let mut r = ctx.report("channel normal-form");
            r.insert("requested_case".into(), Value::from(case.as_str()));
            let nf = match normal_form(&c, request, &ctx.tol) {
                Ok(nf) => nf,
                Err(e) => return Ok(failed(r, &e)),
            };
            if let Some(path) = result {
                doc::write(path, &doc::channel_doc(&nf.canonical))?;
            }
            let scale = 1.0 + nf.left.s.norm_fro() * nf.right.s.norm_fro();
            let ok = nf.reconstruction_residual <= ctx.tol.rel_tol * scale;
            r.insert("case".into(), Value::from(nf.case.name()));
            r.insert("canonical".into(), Value::Object(doc::channel_doc(&nf.canonical)));
            r.insert("core_factor".into(), rows(&nf.core_factor));
            r.insert("left".into(), json!({ "s": rows(&nf.left.s), "h": nums(&nf.left.h.to_vec()) }));
            r.insert("right".into(), json!({ "s": rows(&nf.right.s), "h": nums(&nf.right.h.to_vec()) }));
            if let Some(nu) = &nf.nu {
                r.insert("symplectic_eigenvalues".into(), nums(nu));
            }
            r.insert("reconstruction".into(), json!({ "residual": num(nf.reconstruction_residual), "holds": ok }));
            r.insert("verdict".into(), Value::from(if ok { "ok" } else { "fail" }));
            Ok(Outcome { report: Value::Object(r), code: if ok { 0 } else { EXIT_VERIFY } })
        }
        ChannelCommand::Classify { input } => {
            let k = doc::read(input)?.matrix;
            let mut r = ctx.report("channel classify");
            let c = match classify_channel(&k, &ctx.tol) {
                Ok(c) => c,
                Err(e) => return Ok(failed(r, &e)),
            };
            r.insert("classification".into(), classification(&c.classification));
            r.insert("determinant".into(), num(c.determinant));
            r.insert("nondegenerate".into(), Value::from(c.nondegenerate));
            r.insert("admissible".into(), c.admissible.iter().map(|a| Value::from(a.name())).collect());
            r.insert("auto_case".into(), c.auto_case().map(|a| Value::from(a.name())).unwrap_or(Value::Null));
            if let Some(label) = c.one_mode_class(k.n()) {
                r.insert("holevo_class".into(), Value::from(label));
            }
            r.insert("verdict".into(), Value::from("ok"));
            Ok(Outcome { report: Value::Object(r), code: 0 })
        }
    }
}

fn cmd_generate(kind: Kind, n: usize, seed: u64) -> Result<Map<String, Value>> {
    if n == 0 {
        bail!("n must be at least 1");
    }
    let mut r = rng(seed);
    let mut d = match kind {
        Kind::Nondegenerate => doc::matrix_doc(&nondegenerate(n, &mut r)?),
        Kind::Symplectic => doc::matrix_doc(&symplectic(n, &mut r)?),
        Kind::SkewHamiltonian => doc::matrix_doc(&skew_hamiltonian(n, &mut r)?),
        Kind::ValidChannel => doc::channel_doc(&valid_channel(n, &mut r)?),
    };
    d.insert("kind".into(), Value::from(kind.name()));
    d.insert("seed".into(), Value::from(seed));
    Ok(d)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    let g = cli.global;
    let tol = TolerancePolicy::with_rel_tol(g.tol).context("--tol must be positive")?;
    let ctx = Ctx { tol, timestamp: !g.no_timestamp };
    let outcome = match &cli.command {
        Command::Decompose { inputs, variant, factors_dir, jobs } => {
            cmd_decompose(&ctx, inputs, *variant, factors_dir.as_deref(), *jobs)?
        }
        Command::Verify { input, variant, factors } => cmd_verify(&ctx, input, *variant, factors)?,
        Command::Channel(c) => cmd_channel(&ctx, c)?,
        Command::Generate { kind, n, seed } => {
            emit(g.out.as_deref(), &doc::to_text(&cmd_generate(*kind, *n, *seed)?))?;
            return Ok(0);
        }
    };
    let mut text = serde_json::to_string_pretty(&outcome.report)?;
    text.push('\n');
    emit(g.out.as_deref(), &text)?;
    if outcome.code != 0 {
        for msg in messages(&outcome.report) {
            eprintln!("error: {msg}");
        }
    }
    Ok(outcome.code)
}

fn messages(report: &Value) -> Vec<String> {
    match report {
        Value::Array(items) => items.iter().flat_map(messages).collect(),
        Value::Object(m) => match m.get("error").and_then(|e| e.get("message")).and_then(Value::as_str) {
            Some(s) => vec![s.to_string()],
            None if m.get("verdict").and_then(Value::as_str) == Some("fail") => {
                vec![format!("{} failed its residual checks", m["operation"].as_str().unwrap_or("operation"))]
            }
            None => Vec::new(),
        },
        _ => Vec::new(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_IO } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(match e.downcast_ref::<Error>() {
                Some(err) => exit_code(err),
                None => EXIT_IO,
            })
        }
    }
}
