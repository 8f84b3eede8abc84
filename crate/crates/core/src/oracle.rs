//! Brute-force ground truth for small instances.
//!
//! Nothing here goes through the lattice or field solvers in `group`: the
//! kernel comes from full enumeration, its orthogonal from exact character
//! tests, so these results can be used to check the attack.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

use crate::group::{GroupElement, GroupError, GroupSpec};
use crate::hash::HomomorphicHash;
use crate::sim::{sample_orthogonal, Backend, SimError};
use crate::Limits;

/// Significance level of every distribution test.
pub const SIGNIFICANCE: f64 = 0.001;
/// Minimum expected count per cell.
pub const MIN_EXPECTED: u64 = 50;
/// Largest input group for which the preimage index is built.
pub const PREIMAGE_INDEX_LIMIT: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("{draws} draws is below the required {required}")]
    TooFewDraws { draws: u64, required: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BruteForceResult {
    pub kernel_elements: BTreeSet<GroupElement>,
    /// Output value to its preimages; only for small input groups.
    pub preimage_index: Option<BTreeMap<GroupElement, Vec<GroupElement>>>,
    pub orthogonal_elements: BTreeSet<GroupElement>,
}

/// Greedy generating set of an explicitly listed subgroup, grown by closure.
fn greedy_generators(spec: &GroupSpec, elements: &BTreeSet<GroupElement>) -> Vec<GroupElement> {
    let mut span: HashSet<GroupElement> = HashSet::from([spec.identity()]);
    let mut gens = Vec::new();
    for y in elements {
        if span.contains(y) {
            continue;
        }
        gens.push(y.clone());
        let mut frontier: Vec<GroupElement> = span.iter().cloned().collect();
        while let Some(a) = frontier.pop() {
            for g in &gens {
                let b = spec.add_unchecked(&a, g);
                if span.insert(b.clone()) {
                    frontier.push(b);
                }
            }
        }
    }
    gens
}

pub fn kernel_bruteforce(h: &HomomorphicHash, limits: &Limits) -> Result<BruteForceResult, OracleError> {
    let spec = h.input_group();
    spec.ensure_enumerable(limits.enumeration)?;
    let zero = h.output_group().identity();
    let mut kernel = BTreeSet::new();
    let mut index: Option<BTreeMap<GroupElement, Vec<GroupElement>>> =
        (spec.order() <= PREIMAGE_INDEX_LIMIT).then(BTreeMap::new);
    for x in spec.elements() {
        let v = h.eval_unchecked(&x);
        if v == zero {
            kernel.insert(x.clone());
        }
        if let Some(map) = index.as_mut() {
            map.entry(v).or_default().push(x);
        }
    }
    let gens = greedy_generators(spec, &kernel);
    let orthogonal = spec.elements().filter(|g| gens.iter().all(|y| spec.pairing(g, y) == 0)).collect();
    Ok(BruteForceResult { kernel_elements: kernel, preimage_index: index, orthogonal_elements: orthogonal })
}

/// Outcome of a chi-square test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareOutcome {
    pub statistic: f64,
    pub dof: u64,
    pub critical: f64,
    pub p_value: f64,
    pub pass: bool,
}

fn chi_square(statistic: f64, dof: u64) -> ChiSquareOutcome {
    if dof == 0 {
        return ChiSquareOutcome { statistic, dof, critical: 0.0, p_value: 1.0, pass: true };
    }
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    let critical = dist.inverse_cdf(1.0 - SIGNIFICANCE);
    let p_value = dist.sf(statistic);
    ChiSquareOutcome { statistic, dof, critical, p_value, pass: p_value >= SIGNIFICANCE }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditVerdict {
    pub support_size: u64,
    pub draws: u64,
    pub out_of_support: u64,
    pub test: ChiSquareOutcome,
    pub pass: bool,
}

/// Goodness of fit of `draws` samples against uniform on `support`.
pub fn audit_sampler<F>(
    support: &BTreeSet<GroupElement>,
    draws: u64,
    mut sampler: F,
) -> Result<AuditVerdict, OracleError>
where
    F: FnMut() -> Result<GroupElement, OracleError>,
{
    let cells = support.len() as u64;
    let required = MIN_EXPECTED * cells;
    if draws < required {
        return Err(OracleError::TooFewDraws { draws, required });
    }
    let mut counts: BTreeMap<&GroupElement, u64> = support.iter().map(|e| (e, 0)).collect();
    let mut out_of_support = 0;
    for _ in 0..draws {
        let z = sampler()?;
        match counts.get_mut(&z) {
            Some(c) => *c += 1,
            None => out_of_support += 1,
        }
    }
    let expected = draws as f64 / cells as f64;
    let statistic = counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let test = chi_square(statistic, cells - 1);
    Ok(AuditVerdict { support_size: cells, draws, out_of_support, test, pass: test.pass && out_of_support == 0 })
}

/// Audits `sample_orthogonal` against the brute-forced `K^perp`.
pub fn distribution_audit<R: Rng + ?Sized>(
    h: &HomomorphicHash,
    backend: Backend,
    draws: u64,
    rng: &mut R,
    limits: &Limits,
) -> Result<AuditVerdict, OracleError> {
    let truth = kernel_bruteforce(h, limits)?;
    audit_sampler(&truth.orthogonal_elements, draws, || Ok(sample_orthogonal(h, backend, rng, limits)?.orthogonal))
}

/// Chi-square test that two count vectors over the same cells come from one
/// distribution. Cells empty in both samples are dropped.
pub fn two_sample_homogeneity(a: &[u64], b: &[u64]) -> ChiSquareOutcome {
    assert_eq!(a.len(), b.len(), "count vectors must share cells");
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let total = na + nb;
    let mut statistic = 0.0;
    let mut cells = 0u64;
    for (&x, &y) in a.iter().zip(b) {
        let col = (x + y) as f64;
        if col == 0.0 {
            continue;
        }
        cells += 1;
        for (obs, row) in [(x as f64, na), (y as f64, nb)] {
            let exp = row * col / total;
            statistic += (obs - exp).powi(2) / exp;
        }
    }
    chi_square(statistic, cells.saturating_sub(1))
}

/// Per-element counts of `draws` samples, in the order of `cells`.
pub fn sample_counts<F>(cells: &BTreeSet<GroupElement>, draws: u64, mut sampler: F) -> Result<Vec<u64>, OracleError>
where
    F: FnMut() -> Result<GroupElement, OracleError>,
{
    let mut counts: BTreeMap<&GroupElement, u64> = cells.iter().map(|e| (e, 0)).collect();
    for _ in 0..draws {
        if let Some(c) = counts.get_mut(&sampler()?) {
            *c += 1;
        }
    }
    Ok(counts.into_values().collect())
}
