//! Exact simulation of the Fourier-sampling circuit.
//!
//! Amplitudes are indexed by the mixed-radix flattening of residue tuples
//! (last factor fastest). A state may span several registers; each register
//! owns a contiguous run of cyclic factors.

use std::fmt;
use std::io::{self, Write};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{GroupElement, GroupError, GroupSpec};
use crate::hash::{HashError, HomomorphicHash};
use crate::Limits;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Hash(#[from] HashError),
    #[error("state of {size} amplitudes exceeds the simulator bound {limit}")]
    TooLarge { size: u64, limit: u64 },
    #[error("register {0} does not exist")]
    NoSuchRegister(usize),
    #[error("operation needs a single-register state, got {0} registers")]
    NotSingleRegister(usize),
    #[error("state does not live on the hash input group")]
    WrongInputGroup,
    #[error("measurement branch has zero norm")]
    ZeroNorm,
}

/// Which sampler produces orthogonal elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    /// Statevector when the two-register state fits the bound, else coset.
    #[default]
    Auto,
    Statevector,
    Coset,
}

impl Backend {
    /// Picks a concrete backend for `h`.
    pub fn resolve(self, h: &HomomorphicHash, limits: &Limits) -> Backend {
        match self {
            Backend::Auto => {
                let size = h.input_group().order().saturating_mul(h.output_group().order());
                if size <= limits.statevector {
                    Backend::Statevector
                } else {
                    Backend::Coset
                }
            }
            b => b,
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Auto => "auto",
            Backend::Statevector => "statevector",
            Backend::Coset => "coset",
        })
    }
}

impl std::str::FromStr for Backend {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "auto" => Ok(Backend::Auto),
            "statevector" => Ok(Backend::Statevector),
            "coset" | "coset-sampler" => Ok(Backend::Coset),
            other => Err(format!("unknown backend {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    group: GroupSpec,
    /// Number of cyclic factors in each register, in order.
    registers: Vec<usize>,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Single-register state from raw amplitudes (not renormalized).
    pub fn from_amplitudes(group: GroupSpec, amplitudes: Vec<Complex64>) -> Result<Self, SimError> {
        if amplitudes.len() as u64 != group.order() {
            return Err(SimError::TooLarge { size: amplitudes.len() as u64, limit: group.order() });
        }
        let registers = vec![group.rank()];
        Ok(StateVector { group, registers, amplitudes })
    }

    /// `|e>` on a single register.
    pub fn basis(group: GroupSpec, e: &GroupElement, limit: u64) -> Result<Self, SimError> {
        group.check(e)?;
        check_size(group.order(), limit)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); group.order() as usize];
        amplitudes[group.index_of(e) as usize] = Complex64::new(1.0, 0.0);
        Ok(StateVector { registers: vec![group.rank()], group, amplitudes })
    }

    /// Equal-weight superposition over `elements` (duplicates ignored).
    pub fn uniform_over<'a>(
        group: GroupSpec,
        elements: impl IntoIterator<Item = &'a GroupElement>,
        limit: u64,
    ) -> Result<Self, SimError> {
        check_size(group.order(), limit)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); group.order() as usize];
        let mut count = 0usize;
        for e in elements {
            group.check(e)?;
            let slot = &mut amplitudes[group.index_of(e) as usize];
            if slot.re == 0.0 {
                *slot = Complex64::new(1.0, 0.0);
                count += 1;
            }
        }
        if count == 0 {
            return Err(SimError::ZeroNorm);
        }
        let a = 1.0 / (count as f64).sqrt();
        for x in amplitudes.iter_mut() {
            *x *= a;
        }
        Ok(StateVector { registers: vec![group.rank()], group, amplitudes })
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn register_count(&self) -> usize {
        self.registers.len()
    }

    /// The factor group spanned by register `r`.
    pub fn register_group(&self, r: usize) -> Result<GroupSpec, SimError> {
        let (lo, hi) = self.factor_range(r)?;
        Ok(GroupSpec::new(self.group.orders()[lo..hi].to_vec())?)
    }

    fn factor_range(&self, r: usize) -> Result<(usize, usize), SimError> {
        if r >= self.registers.len() {
            return Err(SimError::NoSuchRegister(r));
        }
        let lo: usize = self.registers[..r].iter().sum();
        Ok((lo, lo + self.registers[r]))
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, e: &GroupElement) -> Complex64 {
        self.amplitudes[self.group.index_of(e) as usize]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `self (x) other`, registers of `self` first.
    pub fn tensor(&self, other: &StateVector, limit: u64) -> Result<StateVector, SimError> {
        let group = self.group.product(&other.group)?;
        check_size(group.order(), limit)?;
        let mut amplitudes = Vec::with_capacity(group.order() as usize);
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        let mut registers = self.registers.clone();
        registers.extend_from_slice(&other.registers);
        Ok(StateVector { group, registers, amplitudes })
    }

    /// Applies `QFT_{Z_N}` to every cyclic factor of register `r`.
    pub fn qft_register(&mut self, r: usize) -> Result<(), SimError> {
        let (lo, hi) = self.factor_range(r)?;
        for f in lo..hi {
            self.dft_factor(f);
        }
        Ok(())
    }

    /// `out[h] = N^(-1/2) sum_g exp(2 pi i h g / N) in[g]` along factor `f`.
    fn dft_factor(&mut self, f: usize) {
        let orders = self.group.orders();
        let n = orders[f] as usize;
        let stride: usize = orders[f + 1..].iter().map(|&x| x as usize).product();
        let block = n * stride;
        let scale = 1.0 / (n as f64).sqrt();
        if n == 2 {
            for base in (0..self.amplitudes.len()).step_by(block) {
                for off in 0..stride {
                    let (i, j) = (base + off, base + off + stride);
                    let (a, b) = (self.amplitudes[i], self.amplitudes[j]);
                    self.amplitudes[i] = (a + b) * scale;
                    self.amplitudes[j] = (a - b) * scale;
                }
            }
            return;
        }
        let twiddle: Vec<Complex64> =
            (0..n).map(|t| Complex64::from_polar(1.0, std::f64::consts::TAU * t as f64 / n as f64)).collect();
        let mut fiber = vec![Complex64::new(0.0, 0.0); n];
        for base in (0..self.amplitudes.len()).step_by(block) {
            for off in 0..stride {
                for (g, slot) in fiber.iter_mut().enumerate() {
                    *slot = self.amplitudes[base + off + g * stride];
                }
                for h in 0..n {
                    let mut acc = Complex64::new(0.0, 0.0);
                    let mut t = 0usize;
                    for x in &fiber {
                        acc += twiddle[t] * x;
                        t += h;
                        if t >= n {
                            t -= n;
                        }
                    }
                    self.amplitudes[base + off + h * stride] = acc * scale;
                }
            }
        }
    }

    /// Text dump: one line per basis element, `residues re im`.
    pub fn write_text<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (i, a) in self.amplitudes.iter().enumerate() {
            writeln!(w, "{} {:+.15e} {:+.15e}", self.group.element_at(i as u64), a.re, a.im)?;
        }
        Ok(())
    }
}

fn check_size(size: u64, limit: u64) -> Result<(), SimError> {
    if size > limit {
        Err(SimError::TooLarge { size, limit })
    } else {
        Ok(())
    }
}

/// `|G|^(-1/2) sum_x |x>`.
pub fn uniform_superposition(spec: &GroupSpec, limit: u64) -> Result<StateVector, SimError> {
    check_size(spec.order(), limit)?;
    let a = Complex64::new(1.0 / (spec.order() as f64).sqrt(), 0.0);
    Ok(StateVector { group: spec.clone(), registers: vec![spec.rank()], amplitudes: vec![a; spec.order() as usize] })
}

/// `QFT_G` on a single-register state.
pub fn qft_group(state: &StateVector) -> Result<StateVector, SimError> {
    if state.register_count() != 1 {
        return Err(SimError::NotSingleRegister(state.register_count()));
    }
    let mut out = state.clone();
    out.qft_register(0)?;
    Ok(out)
}

/// The reversible oracle `|x>|y> -> |x>|y + H(x)>` on a two-register state.
pub fn apply_oracle_unitary(state: &StateVector, h: &HomomorphicHash) -> Result<StateVector, SimError> {
    if state.register_count() != 2 {
        return Err(SimError::NotSingleRegister(state.register_count()));
    }
    let input = state.register_group(0)?;
    let outspace = state.register_group(1)?;
    if &input != h.input_group() || outspace != h.output_group().index_space() {
        return Err(SimError::WrongInputGroup);
    }
    let out = h.output_group();
    let width = outspace.order() as usize;
    let mut next = vec![Complex64::new(0.0, 0.0); state.amplitudes.len()];
    for (xi, x) in input.elements().enumerate() {
        let hx = h.eval_unchecked(&x);
        for yi in 0..width {
            let a = state.amplitudes[xi * width + yi];
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            let y = out.element_at(yi as u64);
            let target = out.index_of(&out.add(&y, &hx)?).expect("closed under the group law") as usize;
            next[xi * width + target] = a;
        }
    }
    Ok(StateVector { amplitudes: next, ..state.clone() })
}

/// `sum_x a_x |x>  ->  sum_x a_x |x>|H(x)>`.
pub fn apply_hash_oracle(state: &StateVector, h: &HomomorphicHash, limit: u64) -> Result<StateVector, SimError> {
    if state.register_count() != 1 {
        return Err(SimError::NotSingleRegister(state.register_count()));
    }
    if state.group() != h.input_group() {
        return Err(SimError::WrongInputGroup);
    }
    let outspace = h.output_group().index_space();
    // a units group's identity is the representative 1, not necessarily index 0
    let start = h.output_group().index_of(&h.output_group().identity()).expect("identity is a member");
    let ancilla = StateVector::basis(outspace.clone(), &outspace.element_at(start), limit)?;
    let joint = state.tensor(&ancilla, limit)?;
    apply_oracle_unitary(&joint, h)
}

/// Born-rule measurement of register `which`.
///
/// Returns the outcome (as an element of that register's group) and the
/// renormalized state of the remaining registers.
pub fn measure_register<R: Rng + ?Sized>(
    state: &StateVector,
    which: usize,
    rng: &mut R,
) -> Result<(GroupElement, StateVector), SimError> {
    let (lo, hi) = state.factor_range(which)?;
    let orders = state.group.orders();
    let reg: usize = orders[lo..hi].iter().map(|&x| x as usize).product();
    let suffix: usize = orders[hi..].iter().map(|&x| x as usize).product();
    let prefix = state.amplitudes.len() / (reg * suffix);

    let mut probs = vec![0.0f64; reg];
    for p in 0..prefix {
        for (r, pr) in probs.iter_mut().enumerate() {
            let base = (p * reg + r) * suffix;
            *pr += state.amplitudes[base..base + suffix].iter().map(|a| a.norm_sqr()).sum::<f64>();
        }
    }
    let total: f64 = probs.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    let mut outcome = None;
    for (r, &pr) in probs.iter().enumerate() {
        if pr <= 0.0 {
            continue;
        }
        outcome = Some(r);
        if u < pr {
            break;
        }
        u -= pr;
    }
    let outcome = outcome.ok_or(SimError::ZeroNorm)?;
    let weight = probs[outcome];
    if weight <= 0.0 {
        return Err(SimError::ZeroNorm);
    }

    let scale = 1.0 / weight.sqrt();
    let mut amplitudes = Vec::with_capacity(prefix * suffix);
    for p in 0..prefix {
        let base = (p * reg + outcome) * suffix;
        amplitudes.extend(state.amplitudes[base..base + suffix].iter().map(|a| a * scale));
    }
    let mut rest_orders = orders[..lo].to_vec();
    rest_orders.extend_from_slice(&orders[hi..]);
    let mut registers = state.registers.clone();
    registers.remove(which);
    let collapsed = StateVector { group: GroupSpec::new(rest_orders)?, registers, amplitudes };
    let reg_group = GroupSpec::new(orders[lo..hi].to_vec())?;
    Ok((reg_group.element_at(outcome as u64), collapsed))
}

/// One round of Fourier sampling.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleTrace {
    /// Value observed on the second register, `H(x_0)`.
    pub hash_value: GroupElement,
    /// Element of `K^perp` read from the first register.
    pub orthogonal: GroupElement,
    pub backend: Backend,
}

/// Intermediate states of one statevector round.
#[derive(Debug, Clone)]
pub struct PipelineStates {
    pub after_oracle: StateVector,
    pub collapsed: StateVector,
    pub after_qft: StateVector,
}

/// Runs the full two-register circuit and keeps every intermediate state.
pub fn statevector_round<R: Rng + ?Sized>(
    h: &HomomorphicHash,
    rng: &mut R,
    limits: &Limits,
) -> Result<(SampleTrace, PipelineStates), SimError> {
    let size = h.input_group().order().saturating_mul(h.output_group().index_space().order());
    check_size(size, limits.statevector)?;
    let psi = uniform_superposition(h.input_group(), limits.statevector)?;
    let after_oracle = apply_hash_oracle(&psi, h, limits.statevector)?;
    let (y, collapsed) = measure_register(&after_oracle, 1, rng)?;
    let after_qft = qft_group(&collapsed)?;
    let (z, _) = measure_register(&after_qft, 0, rng)?;
    let hash_value = h.output_group().element_at(h.output_group().index_space().index_of(&y));
    let trace = SampleTrace { hash_value, orthogonal: z, backend: Backend::Statevector };
    Ok((trace, PipelineStates { after_oracle, collapsed, after_qft }))
}

/// Draws `x`, enumerates the coset `{x' : H(x') = H(x)}`, and Fourier-samples
/// that coset directly. Same output law as the full circuit.
pub fn coset_round<R: Rng + ?Sized>(
    h: &HomomorphicHash,
    rng: &mut R,
    limits: &Limits,
) -> Result<SampleTrace, SimError> {
    let spec = h.input_group();
    check_size(spec.order(), limits.statevector.min(limits.enumeration))?;
    let x = spec.element_at(rng.gen_range(0..spec.order()));
    let hx = h.eval_unchecked(&x);
    let coset: Vec<GroupElement> = spec.elements().filter(|y| h.eval_unchecked(y) == hx).collect();
    let state = StateVector::uniform_over(spec.clone(), &coset, limits.statevector)?;
    let (z, _) = measure_register(&qft_group(&state)?, 0, rng)?;
    Ok(SampleTrace { hash_value: hx, orthogonal: z, backend: Backend::Coset })
}

/// One uniformly distributed element of `K^perp`.
pub fn sample_orthogonal<R: Rng + ?Sized>(
    h: &HomomorphicHash,
    backend: Backend,
    rng: &mut R,
    limits: &Limits,
) -> Result<SampleTrace, SimError> {
    match backend.resolve(h, limits) {
        Backend::Statevector => statevector_round(h, rng, limits).map(|(t, _)| t),
        _ => coset_round(h, rng, limits),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{character_eval, SubgroupBasis};
    use crate::hash::HomomorphicHash;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    const TOL: f64 = 1e-10;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn two_by_four() -> HomomorphicHash {
        HomomorphicHash::xor_matrix(4, vec![0b1010, 0b0101]).unwrap()
    }

    #[test]
    fn uniform_examples() {
        for (spec, n) in
            [(GroupSpec::binary(1), 2usize), (GroupSpec::binary(3), 8), (GroupSpec::new(vec![11]).unwrap(), 11)]
        {
            let s = uniform_superposition(&spec, 1 << 20).unwrap();
            assert_eq!(s.amplitudes().len(), n);
            for a in s.amplitudes() {
                assert!((a - c(1.0 / (n as f64).sqrt(), 0.0)).norm() < 1e-15);
            }
        }
        assert!(matches!(uniform_superposition(&GroupSpec::binary(10), 100), Err(SimError::TooLarge { .. })));
    }

    #[test]
    fn qft_on_z2_is_hadamard() {
        let z2 = GroupSpec::binary(1);
        let s = StateVector::basis(z2.clone(), &z2.identity(), 16).unwrap();
        let t = qft_group(&s).unwrap();
        let r = 1.0 / 2f64.sqrt();
        assert!((t.amplitudes()[0] - c(r, 0.0)).norm() < 1e-15);
        assert!((t.amplitudes()[1] - c(r, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn qft_matches_character_definition() {
        let spec = GroupSpec::new(vec![3, 4]).unwrap();
        for g in spec.elements() {
            let s = StateVector::basis(spec.clone(), &g, 64).unwrap();
            let t = qft_group(&s).unwrap();
            for h in spec.elements() {
                let want = character_eval(&spec, &h, &g).unwrap().to_complex() / (12f64).sqrt();
                assert!((t.amplitude(&h) - want).norm() < TOL);
            }
        }
    }

    #[test]
    fn qft_twice_negates_indices() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for n in [5u64, 8, 11] {
            let spec = GroupSpec::new(vec![n]).unwrap();
            let raw: Vec<Complex64> = (0..n).map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
            let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            let s = StateVector::from_amplitudes(spec.clone(), raw.iter().map(|a| a / norm).collect()).unwrap();
            let t = qft_group(&qft_group(&s).unwrap()).unwrap();
            for g in spec.elements() {
                let neg = spec.neg(&g).unwrap();
                assert!((t.amplitude(&g) - s.amplitude(&neg)).norm() < TOL);
            }
        }
    }

    #[test]
    fn qft_maps_subgroup_to_orthogonal() {
        let z2 = GroupSpec::binary(4);
        let h = SubgroupBasis::new(
            z2.clone(),
            vec![z2.element(vec![1, 1, 0, 0]).unwrap(), z2.element(vec![0, 0, 1, 0]).unwrap()],
        )
        .unwrap();
        let members = crate::group::subgroup_enumerate(&h, 1 << 10).unwrap();
        let s = StateVector::uniform_over(z2.clone(), &members, 1 << 10).unwrap();
        let t = qft_group(&s).unwrap();
        let amp = (members.len() as f64 / 16.0).sqrt();
        for g in z2.elements() {
            let orthogonal = members.iter().all(|x| character_eval(&z2, &g, x).unwrap().is_one());
            let want = if orthogonal { amp } else { 0.0 };
            assert!((t.amplitude(&g) - c(want, 0.0)).norm() < TOL, "{g}");
        }
    }

    #[test]
    fn oracle_writes_hash_into_second_register() {
        let h = HomomorphicHash::xor_matrix(2, vec![0b11]).unwrap();
        let psi = uniform_superposition(h.input_group(), 1 << 10).unwrap();
        let joint = apply_hash_oracle(&psi, &h, 1 << 10).unwrap();
        assert!((joint.norm() - 1.0).abs() < 1e-12);
        let g = joint.group().clone();
        for x in h.input_group().elements() {
            let hx = h.eval(&x).unwrap();
            for y in GroupSpec::binary(1).elements() {
                let mut r = x.residues().to_vec();
                r.extend_from_slice(y.residues());
                let want = if y == hx { 0.5 } else { 0.0 };
                assert!((joint.amplitude(&g.element(r).unwrap()) - c(want, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn oracle_on_basis_states() {
        let h =
            crate::hash::gen_params(&crate::hash::GenRequest::XorMatrix { input_bits: 6, output_bits: 3 }, 5).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for _ in 0..20 {
            let x = h.input_group().element_at(rng.gen_range(0..64));
            let s = StateVector::basis(h.input_group().clone(), &x, 1 << 12).unwrap();
            let joint = apply_hash_oracle(&s, &h, 1 << 12).unwrap();
            let (outcome, rest) = measure_register(&joint, 1, &mut rng).unwrap();
            assert_eq!(outcome, h.eval(&x).unwrap());
            assert!((rest.amplitude(&x) - c(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn oracle_for_units_output_starts_at_one() {
        let h = HomomorphicHash::kfm(23, 11, vec![4, 9]).unwrap();
        let psi = uniform_superposition(h.input_group(), 1 << 12).unwrap();
        let joint = apply_hash_oracle(&psi, &h, 1 << 12).unwrap();
        assert!((joint.norm() - 1.0).abs() < 1e-12);
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let (y, rest) = measure_register(&joint, 1, &mut rng).unwrap();
        let value = h.output_group().element_at(h.output_group().index_space().index_of(&y));
        let support: Vec<_> = h.input_group().elements().filter(|x| rest.amplitude(x).norm() > 1e-12).collect();
        assert_eq!(support.len(), 11);
        assert!(support.iter().all(|x| h.eval(x).unwrap() == value));
    }

    #[test]
    fn measurement_examples() {
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        let a = GroupSpec::new(vec![3]).unwrap();
        let b = GroupSpec::new(vec![5]).unwrap();
        let sa = StateVector::basis(a.clone(), &a.element(vec![2]).unwrap(), 64).unwrap();
        let sb = StateVector::basis(b.clone(), &b.element(vec![4]).unwrap(), 64).unwrap();
        let joint = sa.tensor(&sb, 64).unwrap();
        for _ in 0..10 {
            let (o, rest) = measure_register(&joint, 1, &mut rng).unwrap();
            assert_eq!(o.residues(), &[4]);
            assert_eq!(rest.group(), &a);
        }

        let z = HomomorphicHash::constant_zero(GroupSpec::binary(3), GroupSpec::binary(2));
        let psi = uniform_superposition(z.input_group(), 1 << 10).unwrap();
        let (o, rest) = measure_register(&apply_hash_oracle(&psi, &z, 1 << 10).unwrap(), 1, &mut rng).unwrap();
        assert!(o.is_identity());
        for amp in rest.amplitudes() {
            assert!((amp - c(1.0 / 8f64.sqrt(), 0.0)).norm() < 1e-12);
        }

        let h = two_by_four();
        let psi = uniform_superposition(h.input_group(), 1 << 10).unwrap();
        let joint = apply_hash_oracle(&psi, &h, 1 << 10).unwrap();
        for _ in 0..10 {
            let (_, rest) = measure_register(&joint, 1, &mut rng).unwrap();
            let support: Vec<_> = rest.amplitudes().iter().filter(|a| a.norm() > 1e-12).collect();
            assert_eq!(support.len(), 4);
            assert!(support.iter().all(|a| (*a - c(0.5, 0.0)).norm() < 1e-12));
        }
        assert!(matches!(measure_register(&joint, 2, &mut rng), Err(SimError::NoSuchRegister(2))));
    }

    #[test]
    fn sampler_examples() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let limits = Limits::default();
        let z = HomomorphicHash::constant_zero(GroupSpec::binary(3), GroupSpec::binary(1));
        for backend in [Backend::Statevector, Backend::Coset] {
            for _ in 0..20 {
                let t = sample_orthogonal(&z, backend, &mut rng, &limits).unwrap();
                assert!(t.orthogonal.is_identity());
                assert_eq!(t.backend, backend);
            }
        }
        // invertible 3x3 matrix: K = {0}, every element of G is orthogonal
        let bij = HomomorphicHash::xor_matrix(3, vec![0b100, 0b110, 0b111]).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..200 {
            seen.insert(sample_orthogonal(&bij, Backend::Coset, &mut rng, &limits).unwrap().orthogonal);
        }
        assert_eq!(seen.len(), 8);
    }

    #[test]
    fn auto_backend_resolution() {
        let h = two_by_four();
        let limits = Limits { statevector: 64, ..Limits::default() };
        assert_eq!(Backend::Auto.resolve(&h, &limits), Backend::Statevector);
        let tight = Limits { statevector: 32, ..Limits::default() };
        assert_eq!(Backend::Auto.resolve(&h, &tight), Backend::Coset);
        assert_eq!("coset".parse::<Backend>().unwrap(), Backend::Coset);
    }

    #[test]
    fn text_dump_has_one_line_per_basis_element() {
        let s = uniform_superposition(&GroupSpec::new(vec![2, 3]).unwrap(), 64).unwrap();
        let mut buf = Vec::new();
        s.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 6);
        assert!(text.starts_with("(0,0) +4.082482904638631e-1 +0.000000000000000e0"));
    }
}
