//! JSON files: hash instances, run configurations and attack reports.
//!
//! Integers that may outgrow a double are written as decimal strings; GF(2)
//! rows and CRC generators are hex strings next to an explicit width.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attack::{AttackConfig, AttackReport, AttackStatus, ForgedPair};
use crate::group::{GroupElement, GroupSpec};
use crate::hash::{FamilyTag, GenRequest, HashError, HashFamily, HomomorphicHash, OutputGroup};
use crate::sim::SampleTrace;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema_version {0}, expected {SCHEMA_VERSION}")]
    Version(u32),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Hash(#[from] HashError),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, FormatError> {
    Err(FormatError::Invalid(msg.into()))
}

fn check_version(v: u32) -> Result<(), FormatError> {
    if v == SCHEMA_VERSION {
        Ok(())
    } else {
        Err(FormatError::Version(v))
    }
}

fn dec(s: &str, what: &str) -> Result<u64, FormatError> {
    s.trim().parse().map_err(|_| FormatError::Invalid(format!("{what}: not a decimal integer: {s:?}")))
}

fn hex_digits(width: usize) -> usize {
    width.div_ceil(4).max(1)
}

fn to_hex(v: u64, width: usize) -> String {
    format!("{v:0w$x}", w = hex_digits(width))
}

fn from_hex(s: &str, width: usize, what: &str) -> Result<u64, FormatError> {
    let s = s.trim().trim_start_matches("0x");
    let v = u64::from_str_radix(s, 16).map_err(|_| FormatError::Invalid(format!("{what}: not hex: {s:?}")))?;
    if width < 64 && v >> width != 0 {
        return invalid(format!("{what}: {s} does not fit in {width} bits"));
    }
    Ok(v)
}

/// Family parameters as stored on disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum InstanceParams {
    XorMatrix { input_bits: usize, output_bits: usize, row_width: usize, rows: Vec<String> },
    XorCrc { input_bits: usize, degree: usize, generator_width: usize, generator: String },
    Kfm { p: String, q: String, generators: Vec<String> },
    Rsa { p: String, q: String, e: String, modulus: String },
    ConstantZero { input_group: GroupSpec, output_group: GroupSpec },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(flatten)]
    pub params: InstanceParams,
}

impl InstanceFile {
    pub fn from_hash(h: &HomomorphicHash, seed: Option<u64>) -> Self {
        let params = match h.family() {
            HashFamily::XorMatrix(p) => InstanceParams::XorMatrix {
                input_bits: p.input_bits,
                output_bits: p.rows.len(),
                row_width: p.input_bits,
                rows: p.rows.iter().map(|&r| to_hex(r, p.input_bits)).collect(),
            },
            HashFamily::XorCrc(p) => InstanceParams::XorCrc {
                input_bits: p.input_bits,
                degree: p.degree(),
                generator_width: p.degree() + 1,
                generator: to_hex(p.generator, p.degree() + 1),
            },
            HashFamily::Kfm(p) => InstanceParams::Kfm {
                p: p.p.to_string(),
                q: p.q.to_string(),
                generators: p.generators.iter().map(u64::to_string).collect(),
            },
            HashFamily::Rsa(p) => InstanceParams::Rsa {
                p: p.p.to_string(),
                q: p.q.to_string(),
                e: p.e.to_string(),
                modulus: p.modulus.to_string(),
            },
            HashFamily::ConstantZero => InstanceParams::ConstantZero {
                input_group: h.input_group().clone(),
                output_group: match h.output_group() {
                    OutputGroup::Additive(g) => g.clone(),
                    OutputGroup::Units { .. } => unreachable!("constant-zero hashes have additive outputs"),
                },
            },
        };
        InstanceFile { schema_version: SCHEMA_VERSION, seed, params }
    }

    pub fn to_hash(&self) -> Result<HomomorphicHash, FormatError> {
        check_version(self.schema_version)?;
        Ok(match &self.params {
            InstanceParams::XorMatrix { input_bits, output_bits, row_width, rows } => {
                if row_width != input_bits || rows.len() != *output_bits {
                    return invalid(format!(
                        "xor-matrix shape: {} rows of width {row_width}, expected {output_bits} of width {input_bits}",
                        rows.len()
                    ));
                }
                let rows = rows.iter().map(|r| from_hex(r, *row_width, "row")).collect::<Result<_, _>>()?;
                HomomorphicHash::xor_matrix(*input_bits, rows)?
            }
            InstanceParams::XorCrc { input_bits, degree, generator_width, generator } => {
                let g = from_hex(generator, *generator_width, "generator")?;
                let h = HomomorphicHash::xor_crc(*input_bits, g)?;
                if let HashFamily::XorCrc(p) = h.family() {
                    if p.degree() != *degree {
                        return invalid(format!("generator has degree {}, file says {degree}", p.degree()));
                    }
                }
                h
            }
            InstanceParams::Kfm { p, q, generators } => {
                let gens = generators.iter().map(|g| dec(g, "generator")).collect::<Result<_, _>>()?;
                HomomorphicHash::kfm(dec(p, "p")?, dec(q, "q")?, gens)?
            }
            InstanceParams::Rsa { p, q, e, modulus } => {
                let (p, q) = (dec(p, "p")?, dec(q, "q")?);
                let h = HomomorphicHash::rsa(p, q, dec(e, "e")?)?;
                if p.checked_mul(q) != Some(dec(modulus, "modulus")?) {
                    return invalid("modulus is not p * q");
                }
                h
            }
            InstanceParams::ConstantZero { input_group, output_group } => {
                HomomorphicHash::constant_zero(input_group.clone(), output_group.clone())
            }
        })
    }

    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let f: InstanceFile = serde_json::from_str(text)?;
        check_version(f.schema_version)?;
        Ok(f)
    }
}

/// Where a run gets its hash instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceSource {
    /// Path to an instance file, relative to the config file.
    Path(PathBuf),
    Generate {
        request: GenRequest,
        seed: u64,
    },
    Inline(InstanceFile),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub schema_version: u32,
    pub instance: InstanceSource,
    #[serde(default)]
    pub attack: AttackConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub timing: bool,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let c: RunConfig = serde_json::from_str(text)?;
        check_version(c.schema_version)?;
        c.attack.validate().map_err(|e| FormatError::Invalid(e.to_string()))?;
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelSection {
    pub order: u64,
    pub complete: bool,
    pub generators: Vec<GroupElement>,
}

/// On-disk form of an [`AttackReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub schema_version: u32,
    pub family: FamilyTag,
    pub input_group: GroupSpec,
    pub config: AttackConfig,
    pub status: AttackStatus,
    pub verified: bool,
    pub samples_used: u32,
    pub rejected_candidates: u32,
    pub saturation_measure: u64,
    pub kernel: KernelSection,
    pub samples: Vec<SampleTrace>,
    pub forged_pairs: Vec<ForgedPair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

impl ReportFile {
    /// Wall time is left out unless `timing` is set, so that reports for
    /// the same instance and seed are identical.
    pub fn from_report(h: &HomomorphicHash, cfg: &AttackConfig, r: &AttackReport, timing: bool) -> Self {
        ReportFile {
            schema_version: SCHEMA_VERSION,
            family: h.tag(),
            input_group: h.input_group().clone(),
            config: *cfg,
            status: r.status,
            verified: r.verified,
            samples_used: r.samples_used,
            rejected_candidates: r.rejected_candidates,
            saturation_measure: r.saturation_measure,
            kernel: KernelSection {
                order: r.kernel_order,
                complete: r.kernel_complete,
                generators: r.kernel_basis.generators().to_vec(),
            },
            samples: r.sample_traces.clone(),
            forged_pairs: r.forged_pairs.clone(),
            wall_time_ms: timing.then_some(r.wall_time.as_secs_f64() * 1e3),
        }
    }

    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let r: ReportFile = serde_json::from_str(text)?;
        check_version(r.schema_version)?;
        Ok(r)
    }
}

/// Pretty JSON with a trailing newline.
pub fn render<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

/// Re-checks a report against its instance by hashing; returns every
/// failure found. Nothing from the attack run is reused.
pub fn verify_report(h: &HomomorphicHash, report: &ReportFile) -> Vec<String> {
    let mut failures = Vec::new();
    let spec = h.input_group();
    if report.family != h.tag() {
        failures.push(format!("report family {} does not match instance {}", report.family, h.tag()));
    }
    if &report.input_group != spec {
        failures.push(format!("report input group {} does not match instance {spec}", report.input_group));
        return failures;
    }
    if report.kernel.generators.is_empty() && report.forged_pairs.is_empty() {
        failures.push("report has neither kernel generators nor forged pairs".into());
    }
    let zero = h.output_group().identity();
    for (i, g) in report.kernel.generators.iter().enumerate() {
        match h.eval(g) {
            Ok(v) if v == zero => {}
            Ok(v) => failures.push(format!("kernel generator {i} {g} hashes to {v}, not the identity")),
            Err(e) => failures.push(format!("kernel generator {i}: {e}")),
        }
    }
    for (i, p) in report.forged_pairs.iter().enumerate() {
        if p.x == p.x_prime {
            failures.push(format!("forged pair {i}: x equals x'"));
            continue;
        }
        match (h.eval(&p.x), h.eval(&p.x_prime)) {
            (Ok(a), Ok(b)) => {
                if a != b {
                    failures.push(format!("forged pair {i}: H({}) = {a} but H({}) = {b}", p.x, p.x_prime));
                } else if a != p.hash {
                    failures.push(format!("forged pair {i}: recorded hash {} but H(x) = {a}", p.hash));
                }
            }
            (Err(e), _) | (_, Err(e)) => failures.push(format!("forged pair {i}: {e}")),
        }
    }
    failures
}
