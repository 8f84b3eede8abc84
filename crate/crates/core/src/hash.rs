//! Homomorphic hash families: XOR-linear maps over bit strings and
//! multiplicative maps into groups of units.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{crt_pair, gcd, is_prime, lcm, mul_mod, pow_mod, primitive_root};
use crate::group::{GroupElement, GroupError, GroupSpec};

/// Widest bit string a single matrix row can hold.
pub const MAX_INPUT_BITS: usize = 63;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HashError {
    #[error("invalid parameters: {0}")]
    Parameter(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("value {0} is not in the output group")]
    NotInOutput(GroupElement),
}

fn param<T>(msg: impl Into<String>) -> Result<T, HashError> {
    Err(HashError::Parameter(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyTag {
    XorMatrix,
    XorCrc,
    Kfm,
    Rsa,
    ConstantZero,
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FamilyTag::XorMatrix => "xor-matrix",
            FamilyTag::XorCrc => "xor-crc",
            FamilyTag::Kfm => "kfm",
            FamilyTag::Rsa => "rsa",
            FamilyTag::ConstantZero => "constant-zero",
        })
    }
}

/// The codomain of a hash.
///
/// Multiplicative families land in a subgroup of the units modulo some
/// integer. Their elements are one-slot tuples holding the integer
/// representative, the group law is modular multiplication, and the
/// attainable representatives are listed so that a register can index them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OutputGroup {
    Additive(GroupSpec),
    Units { modulus: u64, members: Vec<u64> },
}

impl OutputGroup {
    pub fn order(&self) -> u64 {
        match self {
            OutputGroup::Additive(g) => g.order(),
            OutputGroup::Units { members, .. } => members.len() as u64,
        }
    }

    pub fn identity(&self) -> GroupElement {
        match self {
            OutputGroup::Additive(g) => g.identity(),
            OutputGroup::Units { modulus, .. } => unit(1 % modulus),
        }
    }

    pub fn contains(&self, e: &GroupElement) -> bool {
        match self {
            OutputGroup::Additive(g) => g.contains(e),
            OutputGroup::Units { members, .. } => e.len() == 1 && members.binary_search(&e.residues()[0]).is_ok(),
        }
    }

    /// Additive sum or modular product, depending on the family.
    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement, HashError> {
        for e in [a, b] {
            if !self.contains(e) {
                return Err(HashError::NotInOutput(e.clone()));
            }
        }
        Ok(match self {
            OutputGroup::Additive(g) => g.add(a, b)?,
            OutputGroup::Units { modulus, .. } => unit(mul_mod(a.residues()[0], b.residues()[0], *modulus)),
        })
    }

    /// Index space used by the second simulator register.
    pub fn index_space(&self) -> GroupSpec {
        match self {
            OutputGroup::Additive(g) => g.clone(),
            OutputGroup::Units { members, .. } if members.len() < 2 => GroupSpec::new(vec![]).expect("trivial group"),
            OutputGroup::Units { members, .. } => GroupSpec::new(vec![members.len() as u64]).expect("nonzero order"),
        }
    }

    pub fn index_of(&self, e: &GroupElement) -> Option<u64> {
        match self {
            OutputGroup::Additive(g) => g.contains(e).then(|| g.index_of(e)),
            OutputGroup::Units { members, .. } => {
                if e.len() != 1 {
                    return None;
                }
                members.binary_search(&e.residues()[0]).ok().map(|i| i as u64)
            }
        }
    }

    pub fn element_at(&self, index: u64) -> GroupElement {
        match self {
            OutputGroup::Additive(g) => g.element_at(index),
            OutputGroup::Units { members, .. } => unit(members[index as usize]),
        }
    }
}

fn unit(v: u64) -> GroupElement {
    GroupElement::from_raw(vec![v])
}

/// An `n x m` matrix over GF(2); bit `m-1-j` of a row multiplies input slot `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XorMatrixParams {
    pub input_bits: usize,
    pub rows: Vec<u64>,
}

/// `x(t) mod g(t)` over GF(2); input slot `j` is the coefficient of
/// `t^(m-1-j)` and output slot `i` the coefficient of `t^(n-1-i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XorCrcParams {
    pub input_bits: usize,
    pub generator: u64,
}

impl XorCrcParams {
    pub fn degree(&self) -> usize {
        63 - self.generator.leading_zeros() as usize
    }
}

/// `h(b) = prod g_i^(b_i) mod p` with every `g_i` of prime order `q | p-1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KfmParams {
    pub p: u64,
    pub q: u64,
    pub generators: Vec<u64>,
}

/// `E(x) = x^e mod N` on the units mod `N = p q`. The input group is
/// `Z_(p-1) x Z_(q-1)` through the fixed units `u` (primitive mod `p`, 1 mod
/// `q`) and `v` (1 mod `p`, primitive mod `q`): `(i, j) -> u^i v^j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RsaParams {
    pub p: u64,
    pub q: u64,
    pub e: u64,
    pub modulus: u64,
    pub unit_p: u64,
    pub unit_q: u64,
}

impl RsaParams {
    /// Carmichael function of the modulus.
    pub fn lambda(&self) -> u64 {
        lcm(self.p - 1, self.q - 1)
    }

    /// The unit mod `N` that an input element stands for.
    pub fn message(&self, x: &GroupElement) -> u64 {
        let r = x.residues();
        mul_mod(pow_mod(self.unit_p, r[0], self.modulus), pow_mod(self.unit_q, r[1], self.modulus), self.modulus)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HashFamily {
    XorMatrix(XorMatrixParams),
    XorCrc(XorCrcParams),
    Kfm(KfmParams),
    Rsa(RsaParams),
    ConstantZero,
}

/// A hash together with its input and output groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomomorphicHash {
    input: GroupSpec,
    output: OutputGroup,
    family: HashFamily,
}

/// Bits of a `Z_2^m` element as a word, slot 0 most significant.
pub fn bits_to_word(x: &GroupElement) -> u64 {
    x.residues().iter().fold(0u64, |acc, &b| (acc << 1) | b)
}

pub fn word_to_bits(word: u64, width: usize) -> Vec<u64> {
    (0..width).map(|j| (word >> (width - 1 - j)) & 1).collect()
}

fn gf2_mod(mut value: u64, generator: u64) -> u64 {
    let deg = 63 - generator.leading_zeros();
    while value != 0 && 63 - value.leading_zeros() >= deg {
        let shift = (63 - value.leading_zeros()) - deg;
        value ^= generator << shift;
    }
    value
}

impl HomomorphicHash {
    /// Any GF(2)-linear map `Z_2^m -> Z_2^n`. Non-compressing shapes are
    /// accepted here so tests can build injective maps.
    pub fn xor_matrix(input_bits: usize, rows: Vec<u64>) -> Result<Self, HashError> {
        if input_bits == 0 || input_bits > MAX_INPUT_BITS {
            return param(format!("input width {input_bits} outside 1..={MAX_INPUT_BITS}"));
        }
        if rows.is_empty() {
            return param("matrix needs at least one row");
        }
        if let Some(r) = rows.iter().find(|&&r| r >> input_bits != 0) {
            return param(format!("row {r:#x} is wider than {input_bits} bits"));
        }
        Ok(HomomorphicHash {
            input: GroupSpec::binary(input_bits),
            output: OutputGroup::Additive(GroupSpec::binary(rows.len())),
            family: HashFamily::XorMatrix(XorMatrixParams { input_bits, rows }),
        })
    }

    pub fn xor_crc(input_bits: usize, generator: u64) -> Result<Self, HashError> {
        if input_bits == 0 || input_bits > MAX_INPUT_BITS {
            return param(format!("input width {input_bits} outside 1..={MAX_INPUT_BITS}"));
        }
        if generator < 2 || generator & 1 == 0 {
            return param("generator polynomial needs degree >= 1 and constant term 1");
        }
        let params = XorCrcParams { input_bits, generator };
        let n = params.degree();
        Ok(HomomorphicHash {
            input: GroupSpec::binary(input_bits),
            output: OutputGroup::Additive(GroupSpec::binary(n)),
            family: HashFamily::XorCrc(params),
        })
    }

    pub fn kfm(p: u64, q: u64, generators: Vec<u64>) -> Result<Self, HashError> {
        if !is_prime(p) {
            return param(format!("p = {p} is not prime"));
        }
        if !is_prime(q) {
            return param(format!("q = {q} is not prime"));
        }
        if !(p - 1).is_multiple_of(q) {
            return param(format!("q = {q} does not divide p - 1 = {}", p - 1));
        }
        if generators.is_empty() {
            return param("need at least one generator");
        }
        for &g in &generators {
            if g == 0 || g >= p || g == 1 || pow_mod(g, q, p) != 1 {
                return param(format!("{g} does not have order {q} modulo {p}"));
            }
        }
        let members: Vec<u64> = (1..p).filter(|&x| pow_mod(x, q, p) == 1).collect();
        Ok(HomomorphicHash {
            input: GroupSpec::homogeneous(q, generators.len())?,
            output: OutputGroup::Units { modulus: p, members },
            family: HashFamily::Kfm(KfmParams { p, q, generators }),
        })
    }

    pub fn rsa(p: u64, q: u64, e: u64) -> Result<Self, HashError> {
        for (name, v) in [("p", p), ("q", q)] {
            if v < 3 || !is_prime(v) {
                return param(format!("{name} = {v} is not an odd prime"));
            }
        }
        if p == q {
            return param("p and q must differ");
        }
        let modulus = p.checked_mul(q).ok_or_else(|| HashError::Parameter("modulus overflows".into()))?;
        if e < 2 {
            return param("exponent must be at least 2");
        }
        let lambda = lcm(p - 1, q - 1);
        if gcd(e, lambda) == 1 {
            return param(format!(
                "gcd(e = {e}, lambda(N) = {lambda}) = 1: x^e is injective on the units, no collisions exist"
            ));
        }
        let gp = primitive_root(p).expect("p is prime");
        let gq = primitive_root(q).expect("q is prime");
        let params = RsaParams { p, q, e, modulus, unit_p: crt_pair(gp, p, 1, q), unit_q: crt_pair(1, p, gq, q) };
        let mut members: Vec<u64> =
            (1..modulus).filter(|&x| gcd(x, modulus) == 1).map(|x| pow_mod(x, e, modulus)).collect();
        members.sort_unstable();
        members.dedup();
        Ok(HomomorphicHash {
            input: GroupSpec::new(vec![p - 1, q - 1])?,
            output: OutputGroup::Units { modulus, members },
            family: HashFamily::Rsa(params),
        })
    }

    pub fn constant_zero(input: GroupSpec, output: GroupSpec) -> Self {
        HomomorphicHash { input, output: OutputGroup::Additive(output), family: HashFamily::ConstantZero }
    }

    pub fn input_group(&self) -> &GroupSpec {
        &self.input
    }

    pub fn output_group(&self) -> &OutputGroup {
        &self.output
    }

    pub fn family(&self) -> &HashFamily {
        &self.family
    }

    pub fn tag(&self) -> FamilyTag {
        match self.family {
            HashFamily::XorMatrix(_) => FamilyTag::XorMatrix,
            HashFamily::XorCrc(_) => FamilyTag::XorCrc,
            HashFamily::Kfm(_) => FamilyTag::Kfm,
            HashFamily::Rsa(_) => FamilyTag::Rsa,
            HashFamily::ConstantZero => FamilyTag::ConstantZero,
        }
    }

    /// `|G_in| > |G_out|`, so collisions must exist.
    pub fn is_compressing(&self) -> bool {
        self.input.order() > self.output.order()
    }

    pub fn eval(&self, x: &GroupElement) -> Result<GroupElement, HashError> {
        self.input.check(x)?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &GroupElement) -> GroupElement {
        match &self.family {
            HashFamily::XorMatrix(m) => {
                let w = bits_to_word(x);
                let bits = m.rows.iter().map(|&r| u64::from((r & w).count_ones() & 1)).collect();
                GroupElement::from_raw(bits)
            }
            HashFamily::XorCrc(c) => {
                let rem = gf2_mod(bits_to_word(x), c.generator);
                GroupElement::from_raw(word_to_bits(rem, c.degree()))
            }
            HashFamily::Kfm(k) => {
                let v = k
                    .generators
                    .iter()
                    .zip(x.residues())
                    .fold(1u64, |acc, (&g, &b)| mul_mod(acc, pow_mod(g, b, k.p), k.p));
                GroupElement::from_raw(vec![v])
            }
            HashFamily::Rsa(r) => GroupElement::from_raw(vec![pow_mod(r.message(x), r.e, r.modulus)]),
            HashFamily::ConstantZero => self.output.identity(),
        }
    }

    /// Output-group law: XOR for bit groups, modular product for units.
    pub fn add_outputs(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement, HashError> {
        self.output.add(a, b)
    }
}

/// Sizes for [`gen_params`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum GenRequest {
    XorMatrix { input_bits: usize, output_bits: usize },
    XorCrc { input_bits: usize, output_bits: usize },
    Kfm { p: u64, q: u64, blocks: usize },
    Rsa { p: u64, q: u64, e: u64 },
    ConstantZero { input_bits: usize, output_bits: usize },
}

fn check_shape(m: usize, n: usize) -> Result<(), HashError> {
    if n == 0 || m <= n || m > MAX_INPUT_BITS {
        return param(format!("need 0 < n < m <= {MAX_INPUT_BITS}, got m = {m}, n = {n}"));
    }
    Ok(())
}

/// Builds a compressing instance, reproducibly from `seed`.
pub fn gen_params(req: &GenRequest, seed: u64) -> Result<HomomorphicHash, HashError> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    match *req {
        GenRequest::XorMatrix { input_bits, output_bits } => {
            check_shape(input_bits, output_bits)?;
            let mask = (1u64 << input_bits) - 1;
            let rows = (0..output_bits).map(|_| rng.gen::<u64>() & mask).collect();
            HomomorphicHash::xor_matrix(input_bits, rows)
        }
        GenRequest::XorCrc { input_bits, output_bits } => {
            check_shape(input_bits, output_bits)?;
            let middle = if output_bits > 1 { rng.gen::<u64>() & ((1u64 << (output_bits - 1)) - 1) } else { 0 };
            let generator = (1u64 << output_bits) | (middle << 1) | 1;
            HomomorphicHash::xor_crc(input_bits, generator)
        }
        GenRequest::Kfm { p, q, blocks } => {
            if blocks < 2 {
                return param("kfm needs at least two blocks to compress");
            }
            if !is_prime(p) || !is_prime(q) || (p - 1) % q != 0 {
                return param(format!("need primes q | p - 1, got p = {p}, q = {q}"));
            }
            let cofactor = (p - 1) / q;
            let generators = (0..blocks)
                .map(|_| loop {
                    let r = rng.gen_range(2..p);
                    let g = pow_mod(r, cofactor, p);
                    if g != 1 {
                        break g;
                    }
                })
                .collect();
            HomomorphicHash::kfm(p, q, generators)
        }
        GenRequest::Rsa { p, q, e } => HomomorphicHash::rsa(p, q, e),
        GenRequest::ConstantZero { input_bits, output_bits } => {
            check_shape(input_bits, output_bits)?;
            Ok(HomomorphicHash::constant_zero(GroupSpec::binary(input_bits), GroupSpec::binary(output_bits)))
        }
    }
}
