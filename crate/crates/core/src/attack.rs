//! Kernel recovery by Fourier sampling, followed by collision forging.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{
    solve_kernel_from_orthogonal_samples, GroupElement, GroupError, GroupSpec, SubgroupBasis, SubgroupTracker,
};
use crate::hash::{HashError, HashFamily, HomomorphicHash};
use crate::sim::{sample_orthogonal, Backend, SampleTrace, SimError};
use crate::Limits;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AttackError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Hash(#[from] HashError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("invalid attack configuration: {0}")]
    Config(String),
    #[error("kernel is trivial, no collision exists")]
    NoCollision,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct AttackConfig {
    pub backend: Backend,
    pub seed: u64,
    /// Consecutive samples that leave the sampled subgroup unchanged before
    /// the sampler stops.
    pub patience: u32,
    pub max_samples: u32,
    /// Collisions listed per report, on top of the random second preimage.
    pub collision_limit: u64,
    /// Stop as soon as the samples pin down one nonzero kernel element.
    pub early_exit: bool,
    /// Block width `n` for the KFM validity flag; `None` disables it.
    pub block_bits: Option<u32>,
    #[serde(skip)]
    pub limits: Limits,
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig {
            backend: Backend::Auto,
            seed: 0,
            patience: 5,
            max_samples: 256,
            collision_limit: 8,
            early_exit: false,
            block_bits: None,
            limits: Limits::default(),
        }
    }
}

impl AttackConfig {
    pub fn validate(&self) -> Result<(), AttackError> {
        if self.patience == 0 {
            return Err(AttackError::Config("patience must be at least 1".into()));
        }
        if self.max_samples < self.patience {
            return Err(AttackError::Config(format!(
                "max_samples {} is below patience {}",
                self.max_samples, self.patience
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackStatus {
    /// Kernel generators and every forged pair re-hashed correctly.
    Verified,
    /// `max_samples` ran out before the sampled subgroup saturated.
    Incomplete,
    /// The hash is injective on its input group.
    TrivialKernel,
    /// Re-hashing rejected a kernel generator or a forged pair.
    VerificationFailed,
}

/// `H(x) = H(x_prime)` with `x_prime = x + kernel_element`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Collision {
    pub x_prime: GroupElement,
    pub kernel_element: GroupElement,
    /// KFM only: whether every component of the kernel element is below
    /// `2^block_bits`, i.e. whether it is itself a binary block.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub valid_block: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForgedPair {
    pub x: GroupElement,
    pub x_prime: GroupElement,
    pub hash: GroupElement,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub valid_block: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackReport {
    pub status: AttackStatus,
    pub verified: bool,
    pub kernel_basis: SubgroupBasis,
    /// Order of the subgroup spanned by `kernel_basis`.
    pub kernel_order: u64,
    /// False in early-exit mode, where the basis may span only part of `K`.
    pub kernel_complete: bool,
    pub samples_used: u32,
    /// Saturated candidates thrown out because a generator did not hash to
    /// the identity; sampling resumed after each.
    pub rejected_candidates: u32,
    /// Order of the subgroup generated by the samples.
    pub saturation_measure: u64,
    pub sample_traces: Vec<SampleTrace>,
    pub forged_pairs: Vec<ForgedPair>,
    pub wall_time: Duration,
}

/// Saturation state of a sample sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Saturation {
    /// Order of the subgroup generated by the samples.
    pub measure: u64,
    /// Whether the last `patience` samples left the measure unchanged.
    pub saturated: bool,
}

pub fn saturation_check(samples: &[GroupElement], spec: &GroupSpec, patience: u32) -> Result<Saturation, GroupError> {
    let mut tracker = SubgroupTracker::new(spec);
    let mut stale = 0u32;
    for s in samples {
        spec.check(s)?;
        if tracker.insert(s) {
            stale = 0;
        } else {
            stale += 1;
        }
    }
    Ok(Saturation { measure: tracker.order(), saturated: patience > 0 && stale >= patience })
}

fn kfm_flag(h: &HomomorphicHash, y: &GroupElement, block_bits: Option<u32>) -> Option<bool> {
    match (h.family(), block_bits) {
        (HashFamily::Kfm(_), Some(n)) => {
            let bound = 1u64.checked_shl(n).unwrap_or(u64::MAX);
            Some(y.residues().iter().all(|&c| c < bound))
        }
        _ => None,
    }
}

/// `x + y` for a uniformly drawn non-identity `y` in the kernel.
pub fn forge_second_preimage<R: Rng + ?Sized>(
    x: &GroupElement,
    kernel: &SubgroupBasis,
    rng: &mut R,
) -> Result<GroupElement, AttackError> {
    let spec = kernel.group();
    spec.check(x)?;
    let order = kernel.order();
    if order < 2 {
        return Err(AttackError::NoCollision);
    }
    let y = kernel.element_at(rng.gen_range(1..order));
    Ok(spec.add_unchecked(x, &y))
}

/// Up to `limit` distinct `x + y` over non-identity kernel elements `y`, in
/// a fixed order. With `block_bits`, KFM collisions carry the validity flag.
pub fn enumerate_collisions(
    h: &HomomorphicHash,
    x: &GroupElement,
    kernel: &SubgroupBasis,
    limit: u64,
    block_bits: Option<u32>,
) -> Result<Vec<Collision>, AttackError> {
    let spec = kernel.group();
    spec.check(x)?;
    let count = kernel.order().saturating_sub(1).min(limit);
    Ok((1..=count)
        .map(|i| {
            let y = kernel.element_at(i);
            Collision {
                x_prime: spec.add_unchecked(x, &y),
                valid_block: kfm_flag(h, &y, block_bits),
                kernel_element: y,
            }
        })
        .collect())
}

/// Draws samples until saturation (or `max_samples`), solves for the
/// kernel, forges collisions and re-hashes everything.
///
/// A saturated sample set whose solved kernel contains a generator with a
/// nonzero hash is not final: the patience counter resets and sampling
/// continues.
pub fn run_attack(h: &HomomorphicHash, cfg: &AttackConfig) -> Result<AttackReport, AttackError> {
    cfg.validate()?;
    let start = Instant::now();
    let spec = h.input_group();
    let out_id = h.output_group().identity();
    let backend = cfg.backend.resolve(h, &cfg.limits);
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);

    let mut tracker = SubgroupTracker::new(spec);
    let mut traces: Vec<SampleTrace> = Vec::new();
    let mut samples: Vec<GroupElement> = Vec::new();
    let mut stale = 0u32;
    let mut rejected_candidates = 0u32;
    let mut found: Option<SubgroupBasis> = None;
    let mut kernel_complete = true;
    let in_kernel = |y: &GroupElement| h.eval_unchecked(y) == out_id;

    while traces.len() < cfg.max_samples as usize {
        let trace = sample_orthogonal(h, backend, &mut rng, &cfg.limits)?;
        let grew = tracker.insert(&trace.orthogonal);
        samples.push(trace.orthogonal.clone());
        traces.push(trace);
        stale = if grew { 0 } else { stale + 1 };
        if cfg.early_exit && grew {
            let candidate = solve_kernel_from_orthogonal_samples(&samples, spec)?.canonical();
            let hits: Vec<GroupElement> = candidate.generators().iter().filter(|y| in_kernel(y)).cloned().collect();
            if !hits.is_empty() {
                found = Some(SubgroupBasis::new(spec.clone(), hits)?);
                kernel_complete = false;
                break;
            }
        }
        if stale >= cfg.patience {
            // A short span gives a candidate strictly larger than K, and one
            // of its generators then fails to hash to the identity.
            let candidate = solve_kernel_from_orthogonal_samples(&samples, spec)?.canonical();
            if candidate.generators().iter().all(in_kernel) {
                found = Some(candidate);
                break;
            }
            rejected_candidates += 1;
            stale = 0;
        }
    }

    let saturated = found.is_some();
    let kernel_basis = match found {
        Some(k) => k,
        None => solve_kernel_from_orthogonal_samples(&samples, spec)?.canonical(),
    };
    let kernel_order = kernel_basis.order();

    let mut forged_pairs = Vec::new();
    let status = if !saturated {
        AttackStatus::Incomplete
    } else if kernel_order < 2 {
        AttackStatus::TrivialKernel
    } else {
        let x = spec.element_at(rng.gen_range(0..spec.order()));
        let hx = h.eval_unchecked(&x);
        let second = forge_second_preimage(&x, &kernel_basis, &mut rng)?;
        let mut add = |x_prime: GroupElement, valid_block| {
            if !forged_pairs.iter().any(|p: &ForgedPair| p.x_prime == x_prime) {
                forged_pairs.push(ForgedPair { x: x.clone(), x_prime, hash: hx.clone(), valid_block });
            }
        };
        let y = spec.sub(&second, &x)?;
        add(second, kfm_flag(h, &y, cfg.block_bits));
        for c in enumerate_collisions(h, &x, &kernel_basis, cfg.collision_limit, cfg.block_bits)? {
            add(c.x_prime, c.valid_block);
        }
        let kernel_ok = kernel_basis.generators().iter().all(in_kernel);
        let pairs_ok =
            forged_pairs.iter().all(|p| p.x != p.x_prime && h.eval_unchecked(&p.x) == h.eval_unchecked(&p.x_prime));
        if kernel_ok && pairs_ok {
            AttackStatus::Verified
        } else {
            AttackStatus::VerificationFailed
        }
    };

    Ok(AttackReport {
        status,
        verified: status == AttackStatus::Verified,
        kernel_basis,
        kernel_order,
        kernel_complete,
        samples_used: traces.len() as u32,
        rejected_candidates,
        saturation_measure: tracker.order(),
        sample_traces: traces,
        forged_pairs,
        wall_time: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::subgroup_enumerate;

    fn two_by_four() -> HomomorphicHash {
        HomomorphicHash::xor_matrix(4, vec![0b1010, 0b0101]).unwrap()
    }

    fn el(spec: &GroupSpec, r: &[u64]) -> GroupElement {
        spec.element(r.to_vec()).unwrap()
    }

    #[test]
    fn config_validation() {
        let mut cfg = AttackConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.patience = 0;
        assert!(cfg.validate().is_err());
        cfg.patience = 10;
        cfg.max_samples = 9;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn empty_samples_not_saturated() {
        let spec = GroupSpec::binary(4);
        assert_eq!(saturation_check(&[], &spec, 3).unwrap(), Saturation { measure: 1, saturated: false });
    }

    #[test]
    fn saturation_after_patience_repeats() {
        let spec = GroupSpec::binary(4);
        let a = el(&spec, &[1, 0, 1, 0]);
        let b = el(&spec, &[0, 1, 0, 1]);
        let c = el(&spec, &[1, 1, 1, 1]);
        let s = saturation_check(&[a.clone(), b.clone(), c.clone(), a.clone()], &spec, 2).unwrap();
        assert_eq!(s, Saturation { measure: 4, saturated: true });
        let s = saturation_check(&[a, b, c], &spec, 2).unwrap();
        assert!(!s.saturated);
    }

    #[test]
    fn constant_zero_gives_whole_group() {
        let spec = GroupSpec::binary(4);
        let h = HomomorphicHash::constant_zero(spec.clone(), GroupSpec::binary(2));
        let r = run_attack(&h, &AttackConfig::default()).unwrap();
        assert_eq!(r.status, AttackStatus::Verified);
        assert_eq!(r.kernel_order, 16);
        assert_eq!(r.samples_used, 5);
        assert!(!r.forged_pairs.is_empty());
    }

    #[test]
    fn two_by_four_recovers_kernel() {
        let h = two_by_four();
        let spec = h.input_group().clone();
        let r = run_attack(&h, &AttackConfig { seed: 3, ..Default::default() }).unwrap();
        assert!(r.verified);
        let got = subgroup_enumerate(&r.kernel_basis, 1 << 10).unwrap();
        let want = [[0, 0, 0, 0], [1, 0, 1, 0], [0, 1, 0, 1], [1, 1, 1, 1]].iter().map(|v| el(&spec, v)).collect();
        assert_eq!(got, want);
        assert_eq!(r.forged_pairs.len(), 3);
    }

    #[test]
    fn injective_instance_reports_trivial_kernel() {
        let h = HomomorphicHash::xor_matrix(3, vec![0b100, 0b010, 0b001]).unwrap();
        let r = run_attack(&h, &AttackConfig::default()).unwrap();
        assert_eq!(r.status, AttackStatus::TrivialKernel);
        assert!(!r.verified);
        assert!(r.forged_pairs.is_empty());
    }

    #[test]
    fn sample_cap_marks_incomplete() {
        // Injective, so K^perp is all of Z_2^8 and a sample is almost never
        // the identity; one sample cannot saturate.
        let rows = (0..8).map(|i| 1u64 << i).collect();
        let h = HomomorphicHash::xor_matrix(8, rows).unwrap();
        let cfg = AttackConfig { patience: 1, max_samples: 1, ..Default::default() };
        let r = run_attack(&h, &cfg).unwrap();
        assert_eq!(r.saturation_measure, 2);
        assert_eq!(r.status, AttackStatus::Incomplete);
        assert!(!r.verified);
        assert!(r.forged_pairs.is_empty());
    }

    #[test]
    fn early_exit_stops_on_first_kernel_element() {
        let h = gen_xor(10, 4, 2);
        let full = run_attack(&h, &AttackConfig { seed: 9, ..Default::default() }).unwrap();
        let early = run_attack(&h, &AttackConfig { seed: 9, early_exit: true, ..Default::default() }).unwrap();
        assert!(early.verified);
        assert!(!early.kernel_complete);
        assert!(early.samples_used <= full.samples_used);
        for g in early.kernel_basis.generators() {
            assert!(full.kernel_basis.contains(g));
        }
    }

    fn gen_xor(m: usize, n: usize, seed: u64) -> HomomorphicHash {
        crate::hash::gen_params(&crate::hash::GenRequest::XorMatrix { input_bits: m, output_bits: n }, seed).unwrap()
    }

    #[test]
    fn second_preimage_single_choice() {
        let spec = GroupSpec::binary(3);
        let y = el(&spec, &[1, 1, 0]);
        let k = SubgroupBasis::new(spec.clone(), vec![y]).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        let x = el(&spec, &[0, 0, 1]);
        for _ in 0..10 {
            assert_eq!(forge_second_preimage(&x, &k, &mut rng).unwrap(), el(&spec, &[1, 1, 1]));
        }
        let trivial = SubgroupBasis::trivial(spec);
        assert_eq!(forge_second_preimage(&x, &trivial, &mut rng), Err(AttackError::NoCollision));
    }

    #[test]
    fn collisions_of_two_by_four() {
        let h = two_by_four();
        let spec = h.input_group().clone();
        let k = SubgroupBasis::new(spec.clone(), vec![el(&spec, &[1, 0, 1, 0]), el(&spec, &[0, 1, 0, 1])]).unwrap();
        let x = el(&spec, &[1, 1, 1, 1]);
        let c = enumerate_collisions(&h, &x, &k, 10, None).unwrap();
        assert_eq!(c.len(), 3);
        for col in &c {
            assert_ne!(col.x_prime, x);
            assert_eq!(h.eval(&col.x_prime).unwrap(), h.eval(&x).unwrap());
            assert_eq!(col.valid_block, None);
        }
        assert!(enumerate_collisions(&h, &x, &SubgroupBasis::trivial(spec), 10, None).unwrap().is_empty());
    }

    #[test]
    fn report_is_reproducible() {
        let h = gen_xor(8, 4, 11);
        let cfg = AttackConfig { seed: 5, ..Default::default() };
        let a = run_attack(&h, &cfg).unwrap();
        let b = run_attack(&h, &cfg).unwrap();
        assert_eq!(a.sample_traces, b.sample_traces);
        assert_eq!(a.forged_pairs, b.forged_pairs);
        assert_eq!(a.kernel_basis, b.kernel_basis);
    }
}
