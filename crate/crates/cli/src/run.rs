//! Command implementations and the shared experiment driver.
//!
//! Each command turns one experiment description into an [`ExpOutput`]:
//! a stdout chunk, zero or more files, and an exit code. The driver applies
//! them across a whole config (optionally in parallel), then prints chunks
//! and writes files in config order so identical configs produce
//! byte-identical results regardless of `--jobs`.

use std::path::{Path, PathBuf};

use meaniter_core::{
    eval_mean, iterate, p_independence_check, reals_from_wire, residuality_probe,
    residuum_analytic, residuum_hessian, residuum_limit, verdict_from_trace, Error, LimitVerdict,
    MeanSpec, MeanSpecWire, MeanTypeMapping, PrecisionConfig, Real, ResiduumEstimate, Result,
    TerminationReason, DEFAULT_ITERATION_BITS, DEFAULT_MAX_ITER, DEFAULT_RESIDUUM_BITS,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config;

#[derive(Clone, Copy)]
pub enum Kind {
    Eval,
    Residuum,
    ProbeResiduality,
    PIndependence,
    Iterate,
    Verify,
}

pub struct Opts {
    pub precision_bits: Option<u32>,
    pub digits: Option<usize>,
    pub tol: f64,
    pub out: PathBuf,
    pub jobs: usize,
}

/// Result of one experiment: a stdout chunk (no trailing newline), files to
/// place under `--out`, an exit code, and an optional stderr diagnostic.
struct ExpOutput {
    stdout: String,
    files: Vec<(String, Vec<u8>)>,
    exit: i32,
    note: Option<String>,
}

impl ExpOutput {
    fn plain(line: String) -> Self {
        ExpOutput {
            stdout: line,
            files: Vec::new(),
            exit: 0,
            note: None,
        }
    }

    fn from_error(e: &Error) -> Self {
        ExpOutput {
            stdout: String::new(),
            files: Vec::new(),
            exit: exit_code(e),
            note: Some(e.to_string()),
        }
    }
}

/// Naming/formatting context of one experiment within a config.
struct Ctx {
    batch: bool,
    idx: usize,
    out: PathBuf,
}

impl Ctx {
    fn pretty(&self) -> bool {
        !self.batch
    }

    /// Physical file name; batch experiments get an index suffix.
    fn file_name(&self, logical: &str) -> String {
        if !self.batch {
            return logical.to_string();
        }
        match logical.rsplit_once('.') {
            Some((stem, ext)) => format!("{stem}_{}.{ext}", self.idx),
            None => format!("{logical}_{}", self.idx),
        }
    }

    /// The path the user will find the file under, as printed in summaries.
    fn display(&self, name: &str) -> String {
        self.out.join(name).display().to_string()
    }

    fn to_json<T: Serialize>(&self, value: &T) -> String {
        if self.pretty() {
            serde_json::to_string_pretty(value).expect("report serialization cannot fail")
        } else {
            serde_json::to_string(value).expect("report serialization cannot fail")
        }
    }
}

/// Upper bound on accepted working precision; far beyond any sensible
/// experiment, but low enough to refuse typo-sized allocations.
const MAX_BITS: u32 = 1 << 22;

/// Runs a whole config file and returns the process exit code.
pub fn dispatch(kind: Kind, config_path: &Path, opts: &Opts) -> i32 {
    let text = match std::fs::read_to_string(config_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("meaniter: cannot read config {}: {e}", config_path.display());
            return 2;
        }
    };
    let root: serde_json::Value = match serde_json::from_str(&text) {
        Ok(v) => v,
        Err(e) => {
            eprintln!(
                "meaniter: malformed JSON in {}: {e}",
                config_path.display()
            );
            return 2;
        }
    };
    let (items, batch) = match config::experiments(root) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("meaniter: {e}");
            return 2;
        }
    };

    let run_one = |idx: usize, item: serde_json::Value| -> ExpOutput {
        let ctx = Ctx {
            batch,
            idx,
            out: opts.out.clone(),
        };
        match run_experiment(kind, item, opts, &ctx) {
            Ok(out) => out,
            Err(e) => ExpOutput::from_error(&e),
        }
    };

    let results: Vec<ExpOutput> = if opts.jobs > 1 && items.len() > 1 {
        match rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
        {
            Ok(pool) => pool.install(|| {
                items
                    .into_par_iter()
                    .enumerate()
                    .map(|(idx, item)| run_one(idx, item))
                    .collect()
            }),
            Err(e) => {
                eprintln!("meaniter: cannot start {} workers: {e}", opts.jobs);
                return 2;
            }
        }
    } else {
        items
            .into_iter()
            .enumerate()
            .map(|(idx, item)| run_one(idx, item))
            .collect()
    };

    let mut code = 0;
    let mut out_dir_ready = false;
    for (idx, result) in results.iter().enumerate() {
        if let Some(note) = &result.note {
            if batch {
                eprintln!("meaniter (experiment {idx}): {note}");
            } else {
                eprintln!("meaniter: {note}");
            }
        }
        for (name, bytes) in &result.files {
            if !out_dir_ready {
                if let Err(e) = std::fs::create_dir_all(&opts.out) {
                    eprintln!(
                        "meaniter: cannot create output directory {}: {e}",
                        opts.out.display()
                    );
                    return 2;
                }
                out_dir_ready = true;
            }
            let path = opts.out.join(name);
            if let Err(e) = std::fs::write(&path, bytes) {
                eprintln!("meaniter: cannot write {}: {e}", path.display());
                return 2;
            }
        }
        if !result.stdout.is_empty() {
            println!("{}", result.stdout);
        }
        code = code.max(result.exit);
    }
    code
}

fn run_experiment(
    kind: Kind,
    item: serde_json::Value,
    opts: &Opts,
    ctx: &Ctx,
) -> Result<ExpOutput> {
    match kind {
        Kind::Eval => cmd_eval(config::parse(item)?, opts),
        Kind::Residuum => cmd_residuum(config::parse(item)?, opts, ctx),
        Kind::ProbeResiduality => cmd_probe(config::parse(item)?, opts, ctx),
        Kind::PIndependence => cmd_p_independence(config::parse(item)?, opts, ctx),
        Kind::Iterate => cmd_iterate(config::parse(item)?, opts, ctx),
        Kind::Verify => cmd_verify(config::parse(item)?, opts, ctx),
    }
}

/// Precision precedence: `--precision-bits` flag, then the experiment's
/// `precision_bits`, then `MEANITER_DEFAULT_BITS`, then the command default.
fn resolve_bits(opts: &Opts, config_bits: Option<u32>, fallback: u32) -> Result<u32> {
    let bits = match opts.precision_bits.or(config_bits) {
        Some(b) => b,
        None => env_default_bits()?.unwrap_or(fallback),
    };
    if bits > MAX_BITS {
        return Err(Error::InvalidConfig(format!(
            "precision of {bits} bits exceeds the supported maximum {MAX_BITS}"
        )));
    }
    // Validates the lower bound and guard-bit invariants.
    PrecisionConfig::new(bits)?;
    Ok(bits)
}

fn env_default_bits() -> Result<Option<u32>> {
    match std::env::var("MEANITER_DEFAULT_BITS") {
        Ok(s) => parse_env_bits(&s).map(Some),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Error::InvalidConfig(format!("MEANITER_DEFAULT_BITS: {e}"))),
    }
}

fn parse_env_bits(s: &str) -> Result<u32> {
    s.trim().parse::<u32>().map_err(|_| {
        Error::InvalidConfig(format!(
            "MEANITER_DEFAULT_BITS must be a positive integer, got {s:?}"
        ))
    })
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidConfig(_)
        | Error::Parse(_)
        | Error::InvalidArity(_)
        | Error::GeneratorAxiom { .. }
        | Error::DeviationAxiom { .. } => 2,
        Error::Domain(_) => 3,
        Error::InsufficientRatios { .. } => 4,
        _ => 1,
    }
}

fn cmd_eval(cfg: config::EvalConfig, opts: &Opts) -> Result<ExpOutput> {
    let bits = resolve_bits(opts, cfg.precision_bits, DEFAULT_RESIDUUM_BITS)?;
    let spec = cfg.mean.build()?;
    let xs = reals_from_wire(&cfg.x, bits)?;
    let value = eval_mean(&spec, &xs)?;
    Ok(ExpOutput::plain(value.to_decimal(opts.digits)))
}

#[derive(Serialize)]
struct ResiduumOutput {
    mean: String,
    x: Real,
    analytic: Option<ResiduumEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    analytic_error: Option<String>,
    limit: ResiduumEstimate,
    hessian_mixed: ResiduumEstimate,
    hessian_pure: ResiduumEstimate,
    agreement: AgreementFlags,
}

#[derive(Serialize)]
struct AgreementFlags {
    analytic_vs_limit: Option<bool>,
    analytic_vs_hessian: Option<bool>,
    limit_vs_hessian: bool,
    hessian_forms: bool,
}

/// Two estimates agree when their gap fits inside ten times the combined
/// uncertainty, plus a 1e-12 relative floor so healthy estimates with
/// near-zero reported uncertainty still match.
fn estimates_agree(a: &ResiduumEstimate, b: &ResiduumEstimate) -> bool {
    let diff = (&a.value - &b.value).abs();
    let budget = (&a.uncertainty + &b.uncertainty) * 10u32;
    let mut scale = a.value.abs();
    let other = b.value.abs();
    if other > scale {
        scale = other;
    }
    if scale < 1.0 {
        scale = Real::one(scale.prec());
    }
    diff <= budget + &scale * &Real::from_f64(1e-12, 64)
}

fn cmd_residuum(cfg: config::ResiduumConfig, opts: &Opts, ctx: &Ctx) -> Result<ExpOutput> {
    let bits = resolve_bits(opts, cfg.precision_bits, DEFAULT_RESIDUUM_BITS)?;
    let spec = cfg.mean.build()?;
    let x = cfg.x.to_real(bits)?;

    let analytic = residuum_analytic(&spec, &x);
    let limit = residuum_limit(&spec, cfg.p, &x)?;
    let (hessian_mixed, hessian_pure) = residuum_hessian(&spec, cfg.p, &x)?;

    let (analytic, analytic_error) = match analytic {
        Ok(est) => (Some(est), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let agreement = AgreementFlags {
        analytic_vs_limit: analytic.as_ref().map(|a| estimates_agree(a, &limit)),
        analytic_vs_hessian: analytic.as_ref().map(|a| estimates_agree(a, &hessian_mixed)),
        limit_vs_hessian: estimates_agree(&limit, &hessian_mixed),
        hessian_forms: estimates_agree(&hessian_mixed, &hessian_pure),
    };
    let output = ResiduumOutput {
        mean: spec.name(),
        x,
        analytic,
        analytic_error,
        limit,
        hessian_mixed,
        hessian_pure,
        agreement,
    };
    Ok(ExpOutput::plain(ctx.to_json(&output)))
}

fn cmd_probe(cfg: config::ProbeConfig, opts: &Opts, ctx: &Ctx) -> Result<ExpOutput> {
    let bits = resolve_bits(opts, cfg.precision_bits, DEFAULT_RESIDUUM_BITS)?;
    let spec = cfg.mean.build()?;
    let x = cfg.x.to_real(bits)?;
    let radii = match cfg.radii {
        Some(rs) => rs
            .into_iter()
            .map(|r| Real::from_f64(r, bits))
            .collect::<Vec<_>>(),
        None => default_radii(bits)?,
    };
    let report = residuality_probe(&spec, cfg.p, &x, &radii)?;
    Ok(ExpOutput::plain(ctx.to_json(&report)))
}

/// Seven half-decade radii from 1e-1 down to 1e-4.
fn default_radii(bits: u32) -> Result<Vec<Real>> {
    let ten = Real::from_f64(10.0, bits);
    (0..7)
        .map(|k| ten.pow(&Real::from_f64(-1.0 - 0.5 * k as f64, bits)))
        .collect()
}

fn cmd_p_independence(
    cfg: config::PIndependenceConfig,
    opts: &Opts,
    ctx: &Ctx,
) -> Result<ExpOutput> {
    let bits = resolve_bits(opts, cfg.precision_bits, DEFAULT_RESIDUUM_BITS)?;
    let spec = cfg.mean.build()?;
    let x = cfg.x.to_real(bits)?;
    let arities = cfg.arities.unwrap_or_else(|| vec![2, 3, 5]);
    let report = p_independence_check(&spec, &x, &arities)?;
    Ok(ExpOutput::plain(ctx.to_json(&report)))
}

/// Builds the mapping, parses the start vector, runs the iteration, and
/// renders the trace CSV — the shared front half of `iterate` and `verify`.
fn run_mapping(
    cfg: &config::MappingConfig,
    opts: &Opts,
) -> Result<(
    MeanTypeMapping,
    meaniter_core::IterationTrace,
    PrecisionConfig,
    Vec<u8>,
    u32,
)> {
    let bits = resolve_bits(opts, cfg.precision_bits, DEFAULT_ITERATION_BITS)?;
    let pcfg = PrecisionConfig::new(bits)?;
    let specs = cfg
        .means
        .iter()
        .map(MeanSpecWire::build)
        .collect::<Result<Vec<MeanSpec>>>()?;
    let mapping = MeanTypeMapping::new(specs)?;
    let x0 = reals_from_wire(&cfg.x0, bits)?;
    let trace = iterate(
        &mapping,
        &x0,
        pcfg,
        cfg.max_iter.unwrap_or(DEFAULT_MAX_ITER),
    )?;
    let mut csv = Vec::new();
    trace
        .write_csv(&mut csv)
        .expect("writing to memory cannot fail");
    Ok((mapping, trace, pcfg, csv, bits))
}

#[derive(Serialize)]
struct IterateSummary {
    kind: &'static str,
    mapping: String,
    precision_bits: u32,
    trace_length: usize,
    terminated_reason: TerminationReason,
    invariant_estimate: Real,
    final_diameter: Real,
    usable_ratios: usize,
    trace_csv: String,
}

fn cmd_iterate(cfg: config::MappingConfig, opts: &Opts, ctx: &Ctx) -> Result<ExpOutput> {
    let (mapping, trace, _, csv, bits) = run_mapping(&cfg, opts)?;
    let trace_name = ctx.file_name("trace.csv");
    let summary = IterateSummary {
        kind: "iterate",
        mapping: mapping.name(),
        precision_bits: bits,
        trace_length: trace.len(),
        terminated_reason: trace.terminated_reason,
        invariant_estimate: trace.invariant_estimate.clone(),
        final_diameter: trace
            .diameters
            .last()
            .expect("trace is never empty")
            .clone(),
        usable_ratios: trace.usable_ratios().len(),
        trace_csv: ctx.display(&trace_name),
    };
    Ok(ExpOutput {
        stdout: ctx.to_json(&summary),
        files: vec![(trace_name, csv)],
        exit: 0,
        note: None,
    })
}

#[derive(Serialize)]
struct VerifySummary {
    kind: &'static str,
    mapping: String,
    precision_bits: u32,
    trace_length: usize,
    terminated_reason: TerminationReason,
    invariant_estimate: Real,
    usable_ratios: usize,
    tol: f64,
    /// `null` when no verdict exists (constant start or too few ratios).
    pass: Option<bool>,
    verdict: Option<LimitVerdict>,
    trace_csv: String,
    verdict_json: Option<String>,
}

fn cmd_verify(cfg: config::MappingConfig, opts: &Opts, ctx: &Ctx) -> Result<ExpOutput> {
    let (mapping, trace, pcfg, csv, bits) = run_mapping(&cfg, opts)?;
    let trace_name = ctx.file_name("trace.csv");
    let constant_start = trace
        .states
        .first()
        .is_some_and(|s| s.iter().all(|v| v == &s[0]));

    let mut summary = VerifySummary {
        kind: "verify",
        mapping: mapping.name(),
        precision_bits: bits,
        trace_length: trace.len(),
        terminated_reason: trace.terminated_reason,
        invariant_estimate: trace.invariant_estimate.clone(),
        usable_ratios: trace.usable_ratios().len(),
        tol: opts.tol,
        pass: None,
        verdict: None,
        trace_csv: ctx.display(&trace_name),
        verdict_json: None,
    };
    let mut files = vec![(trace_name, csv)];

    if constant_start {
        // Already at the invariant mean: nothing to verify, by construction.
        return Ok(ExpOutput {
            stdout: ctx.to_json(&summary),
            files,
            exit: 0,
            note: None,
        });
    }

    match verdict_from_trace(&mapping, &trace, pcfg) {
        Ok(verdict) => {
            let pass = verdict.relative_gap < opts.tol;
            let note = (!pass).then(|| {
                format!(
                    "relative gap {} is not below tolerance {:e}",
                    verdict.relative_gap.to_decimal(Some(6)),
                    opts.tol
                )
            });
            let verdict_name = ctx.file_name("verdict.json");
            let mut rendered = serde_json::to_string_pretty(&verdict)
                .expect("verdict serialization cannot fail");
            rendered.push('\n');
            files.push((verdict_name.clone(), rendered.into_bytes()));
            summary.pass = Some(pass);
            summary.verdict = Some(verdict);
            summary.verdict_json = Some(ctx.display(&verdict_name));
            Ok(ExpOutput {
                stdout: ctx.to_json(&summary),
                files,
                exit: if pass { 0 } else { 1 },
                note,
            })
        }
        Err(e @ Error::InsufficientRatios { .. }) => Ok(ExpOutput {
            stdout: ctx.to_json(&summary),
            files,
            exit: 4,
            note: Some(e.to_string()),
        }),
        Err(other) => Err(other),
    }
}
