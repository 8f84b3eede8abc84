use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use homhash_core::format::{render, verify_report, InstanceSource, SCHEMA_VERSION};
use homhash_core::oracle::{distribution_audit, MIN_EXPECTED};
use homhash_core::sim::statevector_round;
use homhash_core::{
    gen_params, kernel_bruteforce, run_attack, AttackConfig, AttackStatus, Backend, GenRequest, GroupElement,
    HomomorphicHash, InstanceFile, Limits, ReportFile, RunConfig,
};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

const EXIT_OK: u8 = 0;
const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_INCOMPLETE: u8 = 2;
const EXIT_USAGE: u8 = 64;

/// Simulated Fourier-sampling collision attack on homomorphic hashes.
#[derive(Parser)]
#[command(name = "homhash", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a hash instance file.
    Gen(GenArgs),
    /// Recover the kernel of an instance and forge collisions.
    Attack(AttackArgs),
    /// Re-check a report against its instance by hashing.
    Verify(VerifyArgs),
    /// Chi-square test of the orthogonal sampler against brute force.
    Audit(AuditArgs),
    /// Print the brute-forced kernel of an instance.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    XorMatrix,
    XorCrc,
    Kfm,
    Rsa,
    ConstantZero,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: Family,
    /// Input bits, or the number of blocks for kfm.
    #[arg(long)]
    m: Option<usize>,
    /// Output bits.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    q: Option<u64>,
    /// RSA exponent.
    #[arg(long)]
    e: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AttackArgs {
    /// Instance file.
    #[arg(required_unless_present = "config", conflicts_with = "config")]
    instance: Option<PathBuf>,
    /// Run configuration file; flags given alongside override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// auto, statevector or coset.
    #[arg(long, value_parser = parse_backend)]
    backend: Option<Backend>,
    #[arg(long)]
    patience: Option<u32>,
    #[arg(long)]
    max_samples: Option<u32>,
    #[arg(long)]
    collision_limit: Option<u64>,
    /// Stop at the first nonzero kernel element.
    #[arg(long)]
    early_exit: bool,
    /// Flag KFM kernel elements with every component below 2^BLOCK_BITS.
    #[arg(long)]
    block_bits: Option<u32>,
    /// Record wall time in the report (breaks byte-identical reruns).
    #[arg(long)]
    timing: bool,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the statevectors of one circuit round as text.
    #[arg(long)]
    dump_state: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    instance: PathBuf,
    report: PathBuf,
}

#[derive(Args)]
struct AuditArgs {
    instance: PathBuf,
    /// Defaults to the minimum, 50 per element of the orthogonal subgroup.
    #[arg(long)]
    draws: Option<u64>,
    #[arg(long, value_parser = parse_backend, default_value = "auto")]
    backend: Backend,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct OracleArgs {
    instance: PathBuf,
}

fn parse_backend(s: &str) -> Result<Backend, String> {
    s.parse()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Attack(a) => cmd_attack(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Audit(a) => cmd_audit(a),
        Command::Oracle(a) => cmd_oracle(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => std::io::stdout().write_all(text.as_bytes()).context("writing stdout"),
    }
}

fn load_instance(path: &Path) -> Result<HomomorphicHash> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file = InstanceFile::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
    file.to_hash().with_context(|| format!("building instance from {}", path.display()))
}

fn need<T>(v: Option<T>, flag: &str, family: &str) -> Result<T> {
    v.ok_or_else(|| anyhow!("--{flag} is required for {family}"))
}

fn cmd_gen(a: GenArgs) -> Result<u8> {
    let req = match a.family {
        Family::XorMatrix => GenRequest::XorMatrix {
            input_bits: need(a.m, "m", "xor-matrix")?,
            output_bits: need(a.n, "n", "xor-matrix")?,
        },
        Family::XorCrc => {
            GenRequest::XorCrc { input_bits: need(a.m, "m", "xor-crc")?, output_bits: need(a.n, "n", "xor-crc")? }
        }
        Family::Kfm => {
            GenRequest::Kfm { p: need(a.p, "p", "kfm")?, q: need(a.q, "q", "kfm")?, blocks: need(a.m, "m", "kfm")? }
        }
        Family::Rsa => {
            GenRequest::Rsa { p: need(a.p, "p", "rsa")?, q: need(a.q, "q", "rsa")?, e: need(a.e, "e", "rsa")? }
        }
        Family::ConstantZero => GenRequest::ConstantZero {
            input_bits: need(a.m, "m", "constant-zero")?,
            output_bits: need(a.n, "n", "constant-zero")?,
        },
    };
    let h = gen_params(&req, a.seed)?;
    emit(&render(&InstanceFile::from_hash(&h, Some(a.seed))), a.out.as_deref())?;
    Ok(EXIT_OK)
}

fn cmd_attack(a: AttackArgs) -> Result<u8> {
    let (h, mut cfg, mut out, mut timing) = match &a.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let rc = RunConfig::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
            let base = path.parent().unwrap_or(Path::new("."));
            let h = match &rc.instance {
                InstanceSource::Path(p) => load_instance(&base.join(p))?,
                InstanceSource::Generate { request, seed } => gen_params(request, *seed)?,
                InstanceSource::Inline(f) => f.to_hash()?,
            };
            (h, rc.attack, rc.report_path.map(|p| base.join(p)), rc.timing)
        }
        None => {
            let path = a.instance.as_ref().expect("clap requires an instance without --config");
            (load_instance(path)?, AttackConfig::default(), None, false)
        }
    };
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = a.backend {
        cfg.backend = v;
    }
    if let Some(v) = a.patience {
        cfg.patience = v;
    }
    if let Some(v) = a.max_samples {
        cfg.max_samples = v;
    }
    if let Some(v) = a.collision_limit {
        cfg.collision_limit = v;
    }
    if let Some(v) = a.block_bits {
        cfg.block_bits = Some(v);
    }
    cfg.early_exit |= a.early_exit;
    timing |= a.timing;
    if a.out.is_some() {
        out = a.out.clone();
    }

    if let Some(path) = &a.dump_state {
        dump_states(&h, &cfg, path)?;
    }

    let report = run_attack(&h, &cfg)?;
    let file = ReportFile::from_report(&h, &cfg, &report, timing);
    emit(&render(&file), out.as_deref())?;

    let code = match report.status {
        AttackStatus::Verified => {
            eprintln!(
                "verified: kernel of order {} from {} samples, {} forged pairs",
                report.kernel_order,
                report.samples_used,
                report.forged_pairs.len()
            );
            EXIT_OK
        }
        AttackStatus::TrivialKernel => {
            eprintln!("trivial kernel: the hash is injective on its input group, no collision exists");
            EXIT_INCOMPLETE
        }
        AttackStatus::Incomplete => {
            eprintln!("incomplete: {} samples used without saturating; report is unverified", report.samples_used);
            EXIT_INCOMPLETE
        }
        AttackStatus::VerificationFailed => {
            eprintln!("verification failed: a kernel generator or forged pair did not re-hash correctly");
            EXIT_VERIFY_FAILED
        }
    };
    Ok(code)
}

fn dump_states(h: &HomomorphicHash, cfg: &AttackConfig, path: &Path) -> Result<()> {
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let (trace, states) = statevector_round(h, &mut rng, &cfg.limits)?;
    let mut buf = Vec::new();
    writeln!(buf, "# after oracle")?;
    states.after_oracle.write_text(&mut buf)?;
    writeln!(buf, "# collapsed, second register measured as {}", trace.hash_value)?;
    states.collapsed.write_text(&mut buf)?;
    writeln!(buf, "# after qft, first register measured as {}", trace.orthogonal)?;
    states.after_qft.write_text(&mut buf)?;
    fs::write(path, buf).with_context(|| format!("writing {}", path.display()))
}

fn cmd_verify(a: VerifyArgs) -> Result<u8> {
    let h = load_instance(&a.instance)?;
    let text = fs::read_to_string(&a.report).with_context(|| format!("reading {}", a.report.display()))?;
    let report = match ReportFile::parse(&text) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("FAIL: report does not parse: {e}");
            return Ok(EXIT_VERIFY_FAILED);
        }
    };
    let failures = verify_report(&h, &report);
    if failures.is_empty() {
        eprintln!(
            "ok: {} kernel generators and {} forged pairs re-verified",
            report.kernel.generators.len(),
            report.forged_pairs.len()
        );
        Ok(EXIT_OK)
    } else {
        for f in &failures {
            eprintln!("FAIL: {f}");
        }
        Ok(EXIT_VERIFY_FAILED)
    }
}

fn cmd_audit(a: AuditArgs) -> Result<u8> {
    let h = load_instance(&a.instance)?;
    let limits = Limits::default();
    let draws = match a.draws {
        Some(d) => d,
        None => MIN_EXPECTED * kernel_bruteforce(&h, &limits)?.orthogonal_elements.len() as u64,
    };
    let mut rng = ChaCha20Rng::seed_from_u64(a.seed);
    let verdict = distribution_audit(&h, a.backend, draws, &mut rng, &limits)?;
    emit(&render(&verdict), None)?;
    if verdict.pass {
        eprintln!("pass: p = {:.4}", verdict.test.p_value);
        Ok(EXIT_OK)
    } else {
        eprintln!("fail: p = {:.3e}, {} draws out of support", verdict.test.p_value, verdict.out_of_support);
        Ok(EXIT_VERIFY_FAILED)
    }
}

#[derive(Serialize)]
struct OracleOutput {
    schema_version: u32,
    kernel_order: u64,
    orthogonal_order: u64,
    kernel: Vec<GroupElement>,
}

fn cmd_oracle(a: OracleArgs) -> Result<u8> {
    let h = load_instance(&a.instance)?;
    let truth = kernel_bruteforce(&h, &Limits::default())?;
    if truth.kernel_elements.is_empty() {
        bail!("brute force found no kernel elements");
    }
    let out = OracleOutput {
        schema_version: SCHEMA_VERSION,
        kernel_order: truth.kernel_elements.len() as u64,
        orthogonal_order: truth.orthogonal_elements.len() as u64,
        kernel: truth.kernel_elements.into_iter().collect(),
    };
    emit(&render(&out), None)?;
    Ok(EXIT_OK)
}
