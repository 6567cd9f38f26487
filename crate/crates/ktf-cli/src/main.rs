//! `ktf-kit`: command-line front end for `ktf-core`.
//!
//! Every subcommand is a pure function of its options and input files.
//! Floating-point output carries 15 significant digits. Exit codes: 0
//! success, 2 usage, 3 numeric-tolerance failure, 4 input-data failure.

use clap::{Args, Parser, Subcommand, ValueEnum};
use ktf_core::characters::DirichletCharacter;
use ktf_core::eisenstein::{eisenstein_eval, enumerate_basis, EisensteinMode};
use ktf_core::equidist::equidist_scan_with;
use ktf_core::expsums::{gauss_sum, kloosterman, weil_scan, GaussMode, KloostermanMode, KloostermanQuery};
use ktf_core::ktf::{cuspidal_from_data, read_spectral_csv, KtfContext, KtfRequest, DEFAULT_ABS_TOL, DEFAULT_REL_TOL};
use ktf_core::transforms::{zagier_hat, SelbergPipeline, TestFunction, ZagierRoute};
use ktf_core::Error;
use num_complex::Complex64;
use serde_json::{json, Value};
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "ktf-kit", version, about = "Kuznetsov trace formula toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generalized Kloosterman sum S_chi(a, b; n; c).
    Kloosterman(KloostermanArgs),
    /// Gauss sum G_chi(m).
    Gauss(GaussArgs),
    /// Weil-bound certificates over a grid of moduli and characters.
    WeilScan(WeilScanArgs),
    /// h versus its reconstruction through the Selberg transform pipeline.
    TransformRoundtrip(RoundtripArgs),
    /// Zagier transform at a, by the geometric and Bessel routes.
    Zagier(ZagierArgs),
    /// Eisenstein basis listing or evaluation by both routes.
    Eisenstein(EisensteinArgs),
    /// Every side of the trace formula, as a JSON report.
    Ktf(KtfArgs),
    /// Per-term comparison with the l-sum of classical formulas.
    Crosscheck(CrosscheckArgs),
    /// Weighted Hecke-eigenvalue moments over a list of levels.
    Equidist(EquidistArgs),
    /// Validate a spectral-data CSV file.
    LoadCheck(LoadCheckArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
struct Output {
    /// Write the result to this file instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args, Debug, Clone)]
struct Precision {
    /// Absolute tolerance.
    #[arg(long = "abs-tol")]
    abs_tol: Option<f64>,
    /// Relative tolerance.
    #[arg(long = "rel-tol")]
    rel_tol: Option<f64>,
}

#[derive(Args, Debug)]
struct CharacterArgs {
    /// Character modulus.
    #[arg(long, default_value_t = 1)]
    modulus: u64,
    /// Character label `N:e1.e2...`; the principal character if omitted.
    #[arg(long)]
    character: Option<String>,
}

#[derive(Args, Debug)]
struct KloostermanArgs {
    #[arg(long, allow_hyphen_values = true)]
    a: i64,
    #[arg(long, allow_hyphen_values = true)]
    b: i64,
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    n: i64,
    #[arg(long)]
    c: u64,
    #[command(flatten)]
    chi: CharacterArgs,
    /// Evaluation method.
    #[arg(long, value_enum, default_value_t = KMode::Factored)]
    mode: KMode,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum KMode {
    Direct,
    Factored,
    Salie,
}

#[derive(Args, Debug)]
struct GaussArgs {
    #[arg(long, allow_hyphen_values = true)]
    m: i64,
    #[command(flatten)]
    chi: CharacterArgs,
    /// Evaluate term by term instead of through the primitive character.
    #[arg(long)]
    direct: bool,
}

#[derive(Args, Debug)]
struct WeilScanArgs {
    #[arg(long = "max-c")]
    max_c: u64,
    #[arg(long = "max-N")]
    max_level: u64,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
struct RoundtripArgs {
    /// Test function literal `family:param[,param]`.
    #[arg(long)]
    h: String,
    #[arg(long = "t-max", default_value_t = 10.0)]
    t_max: f64,
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    #[command(flatten)]
    precision: Precision,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
struct ZagierArgs {
    #[arg(long)]
    h: String,
    #[arg(long, allow_hyphen_values = true)]
    a: f64,
    #[command(flatten)]
    precision: Precision,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
struct EisensteinArgs {
    /// The level.
    #[arg(long = "N")]
    level: u64,
    /// Nebentypus label; principal if omitted.
    #[arg(long)]
    omega: Option<String>,
    /// List the basis instead of evaluating.
    #[arg(long)]
    list: bool,
    /// Real part of s.
    #[arg(long = "s", allow_hyphen_values = true)]
    s: Option<f64>,
    /// Imaginary part of s.
    #[arg(long = "s-im", default_value_t = 0.0, allow_hyphen_values = true)]
    s_im: f64,
    #[arg(long = "z-re", default_value_t = 0.0, allow_hyphen_values = true)]
    z_re: f64,
    #[arg(long = "z-im", default_value_t = 1.0)]
    z_im: f64,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
struct KtfCommon {
    #[arg(long = "N")]
    level: u64,
    #[arg(long)]
    omega: Option<String>,
    #[arg(long, default_value_t = 1)]
    n: u64,
    #[arg(long, default_value_t = 1)]
    m1: u64,
    #[arg(long, default_value_t = 1)]
    m2: u64,
    #[arg(long)]
    h: String,
}

#[derive(Args, Debug)]
struct KtfArgs {
    #[command(flatten)]
    common: KtfCommon,
    /// Spectral-data CSV for an independent cuspidal sum.
    #[arg(long = "spectral-data")]
    spectral_data: Option<PathBuf>,
    #[command(flatten)]
    precision: Precision,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
struct CrosscheckArgs {
    #[command(flatten)]
    common: KtfCommon,
    /// Kloosterman terms `c = N k`, `k <= terms`, in both routes.
    #[arg(long, default_value_t = 50)]
    terms: u64,
    #[command(flatten)]
    precision: Precision,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
struct EquidistArgs {
    #[arg(long)]
    p: u64,
    #[arg(long, default_value_t = 1)]
    m: u64,
    #[arg(long)]
    h: String,
    /// Comma-separated levels.
    #[arg(long, value_delimiter = ',')]
    levels: Vec<u64>,
    #[arg(long = "max-l", default_value_t = 2)]
    max_l: u32,
    #[command(flatten)]
    precision: Precision,
    #[command(flatten)]
    out: Output,
}

#[derive(Args, Debug)]
struct LoadCheckArgs {
    /// The CSV file.
    #[arg(long)]
    path: PathBuf,
    /// Also sum the cuspidal side for this test function.
    #[arg(long)]
    h: Option<String>,
    #[command(flatten)]
    out: Output,
}

/// Failure of a subcommand, carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Tolerance(_) | Error::SeriesCutoff { .. } => 3,
            Error::Data(_) => 4,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

fn tolerance(message: impl Into<String>) -> Failure {
    Failure { code: 3, message: message.into() }
}

type Outcome<T> = std::result::Result<T, Failure>;

/// `x` rounded to 15 significant digits.
fn round15(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.14e}").parse().unwrap_or(x)
}

/// Shortest decimal form of `x` rounded to 15 significant digits, in
/// scientific notation outside `[1e-4, 1e15)`.
fn fmt15(x: f64) -> String {
    let r = round15(x);
    if r == 0.0 || !r.is_finite() || (1e-4..1e15).contains(&r.abs()) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

/// A complex number as `re`, or `re+imi` / `re-imi`; parts below
/// `1e-13 max(1, |z|)` are printed as zero.
fn fmt_complex(z: Complex64) -> String {
    let floor = 1e-13 * z.norm().max(1.0);
    let clean = |v: f64| if v.abs() < floor { 0.0 } else { v };
    let (re, im) = (clean(z.re), clean(z.im));
    if im == 0.0 {
        fmt15(re)
    } else {
        let sign = if im < 0.0 { "-" } else { "+" };
        format!("{}{sign}{}i", fmt15(re), fmt15(im.abs()))
    }
}

/// Round every float in a JSON value to 15 significant digits.
fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            json!(round15(n.as_f64().unwrap_or(f64::NAN)))
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

fn complex_json(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

fn sink(out: &Output) -> Outcome<Box<dyn Write>> {
    match &out.output {
        Some(path) => {
            let f = File::create(path).map_err(|e| usage(format!("cannot create {}: {e}", path.display())))?;
            Ok(Box::new(io::BufWriter::new(f)))
        }
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn emit_json(out: &Output, value: Value) -> Outcome<()> {
    if out.format == Some(Format::Csv) {
        return Err(usage("this subcommand writes JSON only"));
    }
    let mut w = sink(out)?;
    let text = serde_json::to_string_pretty(&round_json(value)).map_err(|e| usage(e.to_string()))?;
    writeln!(w, "{text}").map_err(|e| usage(e.to_string()))?;
    w.flush().map_err(|e| usage(e.to_string()))
}

/// Write a table as CSV (default) or as a JSON array of objects.
fn emit_table(out: &Output, header: &[&str], rows: Vec<Vec<String>>) -> Outcome<()> {
    let mut w = sink(out)?;
    match out.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut wr = csv::Writer::from_writer(w);
            wr.write_record(header).map_err(|e| usage(e.to_string()))?;
            for r in rows {
                wr.write_record(&r).map_err(|e| usage(e.to_string()))?;
            }
            wr.flush().map_err(|e| usage(e.to_string()))
        }
        Format::Json => {
            let objs: Vec<Value> = rows
                .into_iter()
                .map(|r| {
                    let map = header
                        .iter()
                        .zip(r)
                        .map(|(k, v)| {
                            let val = v.parse::<f64>().map(|x| json!(x)).unwrap_or_else(|_| match v.as_str() {
                                "true" => json!(true),
                                "false" => json!(false),
                                _ => json!(v),
                            });
                            (k.to_string(), val)
                        })
                        .collect();
                    Value::Object(map)
                })
                .collect();
            let text = serde_json::to_string_pretty(&Value::Array(objs)).map_err(|e| usage(e.to_string()))?;
            writeln!(w, "{text}").map_err(|e| usage(e.to_string()))?;
            w.flush().map_err(|e| usage(e.to_string()))
        }
    }
}

fn character(modulus: u64, label: Option<&str>) -> Outcome<DirichletCharacter> {
    match label {
        None => Ok(DirichletCharacter::principal(modulus)?),
        Some(l) => {
            let chi = DirichletCharacter::from_label(l)?;
            if chi.modulus() != modulus {
                return Err(usage(format!("character {l} has modulus {}, expected {modulus}", chi.modulus())));
            }
            Ok(chi)
        }
    }
}

fn test_function(literal: &str) -> Outcome<TestFunction> {
    Ok(TestFunction::parse(literal)?)
}

fn tolerances(p: &Precision, abs: f64, rel: f64) -> Outcome<(f64, f64)> {
    let a = p.abs_tol.unwrap_or(abs);
    let r = p.rel_tol.unwrap_or(rel);
    if !(a > 0.0 && r > 0.0) {
        return Err(usage("tolerances must be positive"));
    }
    Ok((a, r))
}

fn run(cli: Cli) -> Outcome<()> {
    match cli.command {
        Command::Kloosterman(a) => {
            let chi = character(a.chi.modulus, a.chi.character.as_deref())?;
            let mode = match a.mode {
                KMode::Direct => KloostermanMode::Direct,
                KMode::Factored => KloostermanMode::Factored,
                KMode::Salie => KloostermanMode::Salie,
            };
            let v = kloosterman(&KloostermanQuery::new(a.a, a.b, a.n, a.c, chi)?, mode)?;
            println!("{}", fmt_complex(v));
            Ok(())
        }
        Command::Gauss(a) => {
            let chi = character(a.chi.modulus, a.chi.character.as_deref())?;
            let mode = if a.direct { GaussMode::Direct } else { GaussMode::Formula };
            println!("{}", fmt_complex(gauss_sum(&chi, a.m, mode)));
            Ok(())
        }
        Command::WeilScan(a) => {
            let rows = weil_scan(a.max_c, a.max_level)?;
            let table = rows
                .into_iter()
                .map(|r| {
                    vec![
                        r.level.to_string(),
                        r.character,
                        r.c.to_string(),
                        r.sums.to_string(),
                        fmt15(r.max_abs),
                        fmt15(r.max_ratio1),
                        fmt15(r.max_ratio2),
                        r.within_bounds.to_string(),
                    ]
                })
                .collect();
            emit_table(
                &a.out,
                &["N", "character", "c", "sums", "max_abs", "max_ratio1", "max_ratio2", "within_bounds"],
                table,
            )
        }
        Command::TransformRoundtrip(a) => {
            let h = test_function(&a.h)?;
            let (abs_tol, _) = tolerances(&a.precision, 1e-6, 1e-6)?;
            if !(a.step > 0.0 && a.t_max >= 0.0) {
                return Err(usage("need --step > 0 and --t-max >= 0"));
            }
            let p = SelbergPipeline::new(&h)?;
            let count = (a.t_max / a.step).round() as usize;
            let mut worst: f64 = 0.0;
            let mut table = Vec::with_capacity(count + 1);
            for i in 0..=count {
                let t = i as f64 * a.step;
                let (want, got) = (h.eval_real(t), p.roundtrip_h(t));
                worst = worst.max((got - want).abs());
                table.push(vec![fmt15(t), fmt15(want), fmt15(got), fmt15((got - want).abs())]);
            }
            emit_table(&a.out, &["t", "h", "roundtrip", "abs_err"], table)?;
            if worst > abs_tol {
                return Err(tolerance(format!("roundtrip error {worst:e} exceeds {abs_tol:e}")));
            }
            Ok(())
        }
        Command::Zagier(a) => {
            let h = test_function(&a.h)?;
            let (_, rel_tol) = tolerances(&a.precision, DEFAULT_ABS_TOL, 1e-3)?;
            let p = SelbergPipeline::new(&h)?;
            let g = zagier_hat(&p, a.a, ZagierRoute::Geometric)?;
            let b = zagier_hat(&p, a.a, ZagierRoute::Bessel)?;
            let rel = (g - b).norm() / g.norm().max(b.norm());
            emit_json(
                &a.out,
                json!({ "h": h.to_string(), "a": a.a, "geometric": complex_json(g), "bessel": complex_json(b), "rel_delta": rel }),
            )?;
            if rel > rel_tol {
                return Err(tolerance(format!("routes differ by {rel:e} > {rel_tol:e}")));
            }
            Ok(())
        }
        Command::Eisenstein(a) => {
            let omega = character(a.level, a.omega.as_deref())?;
            let basis = enumerate_basis(a.level, &omega)?;
            if a.list {
                let table = basis
                    .iter()
                    .map(|e| {
                        vec![
                            e.pair.chi1.label(),
                            e.pair.chi2.label(),
                            e.tuple_label(),
                            e.m.to_string(),
                            format!("{}/{}", e.norm_sq.0, e.norm_sq.1),
                        ]
                    })
                    .collect();
                return emit_table(&a.out, &["chi1", "chi2", "tuple", "M", "norm_sq"], table);
            }
            let s_re = a.s.ok_or_else(|| usage("--s is required unless --list is given"))?;
            let s = Complex64::new(s_re, a.s_im);
            let z = Complex64::new(a.z_re, a.z_im);
            let mut table = Vec::new();
            for e in &basis {
                let f = eisenstein_eval(e, s, z, EisensteinMode::Fourier)?;
                let (d, rel) = if s.re > 0.5 {
                    let d = eisenstein_eval(e, s, z, EisensteinMode::Direct)?;
                    let rel = (d - f).norm() / d.norm().max(f.norm());
                    (Some(d), rel)
                } else {
                    (None, f64::NAN)
                };
                table.push(vec![
                    e.pair.chi1.label(),
                    e.pair.chi2.label(),
                    e.tuple_label(),
                    d.map_or(String::new(), |d| fmt15(d.re)),
                    d.map_or(String::new(), |d| fmt15(d.im)),
                    fmt15(f.re),
                    fmt15(f.im),
                    if rel.is_nan() { String::new() } else { fmt15(rel) },
                ]);
            }
            emit_table(
                &a.out,
                &["chi1", "chi2", "tuple", "direct_re", "direct_im", "fourier_re", "fourier_im", "rel_delta"],
                table,
            )
        }
        Command::Ktf(a) => {
            let c = &a.common;
            let h = test_function(&c.h)?;
            let omega = character(c.level, c.omega.as_deref())?;
            let (abs_tol, rel_tol) = tolerances(&a.precision, DEFAULT_ABS_TOL, DEFAULT_REL_TOL)?;
            let req = KtfRequest::new(c.level, omega.clone(), c.n, c.m1, c.m2, h.clone())?
                .with_tolerances(abs_tol, rel_tol)?;
            let ctx = KtfContext::new(c.level, &omega, &h)?;
            let rep = ctx.report(&req)?;
            let jpsi = ctx.j() * ktf_core::arith::psi(c.level) as f64;
            let mut value = serde_json::to_value(&rep).map_err(|e| usage(e.to_string()))?;
            value["j"] = json!(ctx.j());
            value["ratio"] = complex_json(rep.spec_cuspidal_inferred / jpsi);
            if let Some(path) = &a.spectral_data {
                let f = File::open(path).map_err(|e| Failure { code: 4, message: format!("{}: {e}", path.display()) })?;
                let data = read_spectral_csv(f)?;
                let cusp = cuspidal_from_data(&h, &data)?;
                value["spec_cuspidal_data"] = complex_json(cusp);
                value["cuspidal_gap"] = json!((cusp - rep.spec_cuspidal_inferred).norm());
            }
            emit_json(&a.out, value)
        }
        Command::Crosscheck(a) => {
            let c = &a.common;
            let h = test_function(&c.h)?;
            let omega = character(c.level, c.omega.as_deref())?;
            let (_, rel_tol) = tolerances(&a.precision, DEFAULT_ABS_TOL, 1e-8)?;
            KtfRequest::new(c.level, omega.clone(), c.n, c.m1, c.m2, h.clone())?;
            let ctx = KtfContext::new(c.level, &omega, &h)?;
            let cc = ctx.classical_crosscheck(c.n, c.m1, c.m2, a.terms)?;
            let mut value = serde_json::to_value(cc).map_err(|e| usage(e.to_string()))?;
            value["max_rel"] = json!(cc.max_rel());
            emit_json(&a.out, value)?;
            if cc.max_rel() > rel_tol {
                return Err(tolerance(format!("largest relative delta {:e} exceeds {rel_tol:e}", cc.max_rel())));
            }
            Ok(())
        }
        Command::Equidist(a) => {
            let h = test_function(&a.h)?;
            if a.levels.is_empty() {
                return Err(usage("--levels needs at least one level"));
            }
            let tol = tolerances(&a.precision, DEFAULT_ABS_TOL, DEFAULT_REL_TOL)?;
            let rows = equidist_scan_with(a.p, a.m, &h, &a.levels, a.max_l, Some(tol))?;
            let table = rows
                .into_iter()
                .map(|r| {
                    vec![
                        r.level.to_string(),
                        r.p.to_string(),
                        r.m.to_string(),
                        r.l.to_string(),
                        fmt15(r.ratio_re),
                        fmt15(r.ratio_im),
                        fmt15(if r.prediction.abs() < 1e-13 { 0.0 } else { r.prediction }),
                    ]
                })
                .collect();
            emit_table(&a.out, &["N", "p", "m", "l", "ratio_re", "ratio_im", "prediction"], table)
        }
        Command::LoadCheck(a) => {
            let f = File::open(&a.path).map_err(|e| Failure { code: 4, message: format!("{}: {e}", a.path.display()) })?;
            let data = read_spectral_csv(f)?;
            let mut value = json!({ "path": a.path.display().to_string(), "rows": data.len() });
            if let Some(lit) = &a.h {
                let h = test_function(lit)?;
                value["cuspidal_sum"] = complex_json(cuspidal_from_data(&h, &data)?);
            }
            emit_json(&a.out, value)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("ktf-kit: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
