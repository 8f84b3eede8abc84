//! Finite abelian groups written as explicit products of cyclic groups.
//!
//! A [`GroupSpec`] is the ordered list of cyclic orders `N_1..N_k`; a
//! [`GroupElement`] is a residue tuple with one entry per factor. Characters
//! are evaluated exactly as rational phases so that orthogonality tests never
//! depend on a floating tolerance.

mod field;
mod hermite;
mod snf;

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{gcd, lcm};

pub use field::{nullspace_mod_p, rank_mod_p};
pub use hermite::SubgroupTracker;
pub use snf::{smith_normal_form, SmithForm};

/// Largest group the enumeration-based operations will walk by default.
pub const DEFAULT_ENUMERATION_LIMIT: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("cyclic factor order {0} is below 2")]
    InvalidOrder(u64),
    #[error("group order overflows 64 bits")]
    OrderOverflow,
    #[error("element has {found} residues, group has {expected} factors")]
    RankMismatch { expected: usize, found: usize },
    #[error("residue {residue} in slot {slot} is not reduced modulo {modulus}")]
    ResidueOutOfRange { slot: usize, residue: u64, modulus: u64 },
    #[error("subgroup basis belongs to a different group")]
    GroupMismatch,
    #[error("refusing to enumerate {size} elements (limit {limit})")]
    TooLarge { size: u64, limit: u64 },
    #[error("integer overflow during lattice reduction")]
    ArithmeticOverflow,
}

/// `Z_{N_1} x ... x Z_{N_k}` with known orders.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GroupSpecRepr", into = "GroupSpecRepr")]
pub struct GroupSpec {
    orders: Vec<u64>,
    total: u64,
    exponent: u64,
    /// `L / N_j` per factor.
    weights: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct GroupSpecRepr {
    orders: Vec<u64>,
}

impl TryFrom<GroupSpecRepr> for GroupSpec {
    type Error = GroupError;
    fn try_from(r: GroupSpecRepr) -> Result<Self, GroupError> {
        GroupSpec::new(r.orders)
    }
}

impl From<GroupSpec> for GroupSpecRepr {
    fn from(g: GroupSpec) -> Self {
        GroupSpecRepr { orders: g.orders }
    }
}

/// Residue tuple; slot `j` is reduced modulo the `j`-th cyclic order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupElement(Vec<u64>);

impl GroupElement {
    /// Unvalidated; callers outside a `GroupSpec` context own the invariant.
    pub(crate) fn from_raw(residues: Vec<u64>) -> Self {
        GroupElement(residues)
    }

    pub fn residues(&self) -> &[u64] {
        &self.0
    }

    pub fn into_residues(self) -> Vec<u64> {
        self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&r| r == 0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, r) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, ")")
    }
}

impl GroupSpec {
    /// An empty order list is the trivial group.
    pub fn new(orders: Vec<u64>) -> Result<Self, GroupError> {
        let mut total = 1u64;
        for &n in &orders {
            if n < 2 {
                return Err(GroupError::InvalidOrder(n));
            }
            total = total.checked_mul(n).ok_or(GroupError::OrderOverflow)?;
        }
        let exponent = orders.iter().fold(1, |acc, &n| lcm(acc, n));
        let weights = orders.iter().map(|&n| exponent / n).collect();
        Ok(GroupSpec { orders, total, exponent, weights })
    }

    /// `Z_2^bits`, the XOR group of bit strings.
    pub fn binary(bits: usize) -> Self {
        Self::homogeneous(2, bits).expect("2^bits must fit")
    }

    pub fn homogeneous(modulus: u64, rank: usize) -> Result<Self, GroupError> {
        Self::new(vec![modulus; rank])
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    /// Number of cyclic factors.
    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    /// `|G|`.
    pub fn order(&self) -> u64 {
        self.total
    }

    /// Least common multiple of the factor orders (the exponent of `G`).
    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    /// `Some(p)` when every factor is `Z_p` for the same prime `p`.
    pub fn prime_modulus(&self) -> Option<u64> {
        let first = *self.orders.first()?;
        if self.orders.iter().all(|&n| n == first) && crate::arith::is_prime(first) {
            Some(first)
        } else {
            None
        }
    }

    /// Direct product `self x other`, factors of `self` first.
    pub fn product(&self, other: &GroupSpec) -> Result<GroupSpec, GroupError> {
        let mut orders = self.orders.clone();
        orders.extend_from_slice(&other.orders);
        GroupSpec::new(orders)
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement(vec![0; self.rank()])
    }

    /// Canonical basis tuple with a 1 in slot `j`.
    pub fn basis_element(&self, j: usize) -> GroupElement {
        let mut r = vec![0; self.rank()];
        r[j] = 1;
        GroupElement(r)
    }

    /// Validating constructor; residues must already be reduced.
    pub fn element(&self, residues: Vec<u64>) -> Result<GroupElement, GroupError> {
        let e = GroupElement(residues);
        self.check(&e)?;
        Ok(e)
    }

    /// Reduces arbitrary integers into the group.
    pub fn reduce(&self, values: &[i128]) -> Result<GroupElement, GroupError> {
        if values.len() != self.rank() {
            return Err(GroupError::RankMismatch { expected: self.rank(), found: values.len() });
        }
        Ok(GroupElement(values.iter().zip(&self.orders).map(|(&v, &n)| v.rem_euclid(n as i128) as u64).collect()))
    }

    pub fn check(&self, e: &GroupElement) -> Result<(), GroupError> {
        if e.len() != self.rank() {
            return Err(GroupError::RankMismatch { expected: self.rank(), found: e.len() });
        }
        for (slot, (&r, &n)) in e.0.iter().zip(&self.orders).enumerate() {
            if r >= n {
                return Err(GroupError::ResidueOutOfRange { slot, residue: r, modulus: n });
            }
        }
        Ok(())
    }

    pub fn contains(&self, e: &GroupElement) -> bool {
        self.check(e).is_ok()
    }

    /// Componentwise `(a_j + b_j) mod N_j`.
    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.add_unchecked(a, b))
    }

    pub(crate) fn add_unchecked(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        GroupElement(
            a.0.iter()
                .zip(&b.0)
                .zip(&self.orders)
                .map(|((&x, &y), &n)| {
                    let s = x + y;
                    if s >= n {
                        s - n
                    } else {
                        s
                    }
                })
                .collect(),
        )
    }

    pub fn neg(&self, a: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check(a)?;
        Ok(GroupElement(a.0.iter().zip(&self.orders).map(|(&x, &n)| if x == 0 { 0 } else { n - x }).collect()))
    }

    pub fn sub(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement, GroupError> {
        let nb = self.neg(b)?;
        self.add(a, &nb)
    }

    /// Mixed-radix index, last factor fastest.
    pub fn index_of(&self, e: &GroupElement) -> u64 {
        e.0.iter().zip(&self.orders).fold(0u64, |acc, (&r, &n)| acc * n + r)
    }

    /// Inverse of [`GroupSpec::index_of`].
    pub fn element_at(&self, mut index: u64) -> GroupElement {
        let mut r = vec![0u64; self.rank()];
        for (slot, &n) in self.orders.iter().enumerate().rev() {
            r[slot] = index % n;
            index /= n;
        }
        GroupElement(r)
    }

    /// All elements in index order.
    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.total).map(move |i| self.element_at(i))
    }

    pub fn ensure_enumerable(&self, limit: u64) -> Result<(), GroupError> {
        if self.total > limit {
            Err(GroupError::TooLarge { size: self.total, limit })
        } else {
            Ok(())
        }
    }

    /// `sum_j (L/N_j) g_j h_j mod L` with `L` the exponent; zero exactly when
    /// `chi_g(h) = 1`.
    pub fn pairing(&self, g: &GroupElement, h: &GroupElement) -> u64 {
        let l = self.exponent as u128;
        // Each term w_j g_j h_j is below L^2, so the plain sum fits when
        // rank * L^2 does.
        if l * l * (self.orders.len() as u128) < 1 << 64 {
            let mut acc = 0u64;
            for ((&x, &y), &w) in g.0.iter().zip(&h.0).zip(&self.weights) {
                acc += w * x * y;
            }
            return acc % self.exponent;
        }
        let mut acc = 0u128;
        for ((&x, &y), &w) in g.0.iter().zip(&h.0).zip(&self.weights) {
            acc = (acc + w as u128 * ((x as u128 * y as u128) % (l / w as u128))) % l;
        }
        acc as u64
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.orders.is_empty() {
            return write!(f, "{{0}}");
        }
        for (i, n) in self.orders.iter().enumerate() {
            if i > 0 {
                write!(f, " x ")?;
            }
            write!(f, "Z_{n}")?;
        }
        Ok(())
    }
}

/// A unit complex number `exp(2 pi i num/den)`, kept as a reduced fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Phase {
    num: u64,
    den: u64,
}

/// The value of a character at a point.
pub type CharacterValue = Phase;

impl Phase {
    pub const ONE: Phase = Phase { num: 0, den: 1 };

    pub fn new(num: u64, den: u64) -> Phase {
        assert!(den > 0, "phase denominator must be positive");
        let num = num % den;
        let g = gcd(num, den);
        if num == 0 {
            return Phase::ONE;
        }
        Phase { num: num / g, den: den / g }
    }

    pub fn numerator(&self) -> u64 {
        self.num
    }

    pub fn denominator(&self) -> u64 {
        self.den
    }

    pub fn is_one(&self) -> bool {
        self.num == 0
    }

    pub fn conj(self) -> Phase {
        Phase::new(self.den - self.num, self.den)
    }

    pub fn to_complex(self) -> Complex64 {
        if self.num == 0 {
            return Complex64::new(1.0, 0.0);
        }
        let theta = std::f64::consts::TAU * self.num as f64 / self.den as f64;
        Complex64::new(theta.cos(), theta.sin())
    }
}

/// Product of the two unit values: phases add.
impl std::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, other: Phase) -> Phase {
        let den = lcm(self.den, other.den);
        let num =
            (self.num as u128 * (den / self.den) as u128 + other.num as u128 * (den / other.den) as u128) % den as u128;
        Phase::new(num as u64, den)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e^(2pi i {}/{})", self.num, self.den)
    }
}

/// `chi_g(h) = prod_j omega_{N_j}^{g_j h_j}` as an exact phase.
pub fn character_eval(spec: &GroupSpec, g: &GroupElement, h: &GroupElement) -> Result<CharacterValue, GroupError> {
    spec.check(g)?;
    spec.check(h)?;
    Ok(Phase::new(spec.pairing(g, h), spec.exponent()))
}

/// `sum_{h in G} chi_g(h)` by enumeration.
pub fn character_sum(spec: &GroupSpec, g: &GroupElement) -> Result<Complex64, GroupError> {
    character_sum_with_limit(spec, g, DEFAULT_ENUMERATION_LIMIT)
}

pub fn character_sum_with_limit(spec: &GroupSpec, g: &GroupElement, limit: u64) -> Result<Complex64, GroupError> {
    spec.check(g)?;
    spec.ensure_enumerable(limit)?;
    let l = spec.exponent();
    Ok(spec.elements().map(|h| Phase::new(spec.pairing(g, &h), l).to_complex()).sum())
}

/// Generators of a subgroup of `group`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgroupBasis {
    group: GroupSpec,
    generators: Vec<GroupElement>,
}

impl SubgroupBasis {
    pub fn new(group: GroupSpec, generators: Vec<GroupElement>) -> Result<Self, GroupError> {
        for g in &generators {
            group.check(g)?;
        }
        Ok(SubgroupBasis { group, generators })
    }

    pub fn trivial(group: GroupSpec) -> Self {
        SubgroupBasis { group, generators: Vec::new() }
    }

    pub fn whole(group: GroupSpec) -> Self {
        let generators = (0..group.rank()).map(|j| group.basis_element(j)).collect();
        SubgroupBasis { group, generators }
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    fn tracker(&self) -> SubgroupTracker {
        let mut t = SubgroupTracker::new(&self.group);
        for g in &self.generators {
            t.insert(g);
        }
        t
    }

    /// Order of the generated subgroup, without enumerating it.
    pub fn order(&self) -> u64 {
        self.tracker().order()
    }

    /// Hermite-reduced generating set; two bases of the same subgroup
    /// canonicalize identically.
    pub fn canonical(&self) -> SubgroupBasis {
        SubgroupBasis { group: self.group.clone(), generators: self.tracker().generators() }
    }

    pub fn same_subgroup(&self, other: &SubgroupBasis) -> bool {
        self.group == other.group && self.canonical().generators == other.canonical().generators
    }

    /// Element number `index` of the generated subgroup, for
    /// `index < self.order()`; index 0 is the identity and distinct indices
    /// give distinct elements.
    pub fn element_at(&self, index: u64) -> GroupElement {
        self.tracker().element_at(index)
    }

    /// Uniformly distributed element of the generated subgroup.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> GroupElement {
        let t = self.tracker();
        t.element_at(rng.gen_range(0..t.order()))
    }

    /// Membership test without enumeration.
    pub fn contains(&self, e: &GroupElement) -> bool {
        if !self.group.contains(e) {
            return false;
        }
        let mut t = self.tracker();
        !t.insert(e)
    }
}

/// Closure of the generators under addition, by breadth-first search.
pub fn subgroup_enumerate(basis: &SubgroupBasis, limit: u64) -> Result<BTreeSet<GroupElement>, GroupError> {
    let spec = &basis.group;
    let mut seen: HashSet<GroupElement> = HashSet::new();
    let mut queue = VecDeque::new();
    let id = spec.identity();
    seen.insert(id.clone());
    queue.push_back(id);
    while let Some(x) = queue.pop_front() {
        for g in &basis.generators {
            let y = spec.add_unchecked(&x, g);
            if !seen.contains(&y) {
                if seen.len() as u64 >= limit {
                    return Err(GroupError::TooLarge { size: seen.len() as u64 + 1, limit });
                }
                seen.insert(y.clone());
                queue.push_back(y);
            }
        }
    }
    Ok(seen.into_iter().collect())
}

/// `H^perp = {g : chi_g(h) = 1 for all h in H}` through the Smith normal form
/// of the Hermite basis of the lifted lattice of `H`.
pub fn orthogonal_subgroup(basis: &SubgroupBasis) -> Result<SubgroupBasis, GroupError> {
    let spec = &basis.group;
    let k = spec.rank();
    if k == 0 {
        return Ok(SubgroupBasis::trivial(spec.clone()));
    }
    // Row lattice L = <generators> + diag(N) Z^k; g is orthogonal iff
    // B diag(N)^-1 g is integral, i.e. g in diag(N) V S^-1 Z^k.
    let lattice = basis.tracker().lattice_rows();
    let smith = smith_normal_form(&lattice)?;
    let mut out = SubgroupTracker::new(spec);
    for i in 0..k {
        let s = smith.diagonal[i];
        debug_assert!(s > 0, "lifted lattice has full rank");
        let mut coords = Vec::with_capacity(k);
        for (j, &n) in spec.orders().iter().enumerate() {
            let num = (n as i128).checked_mul(smith.v[j][i]).ok_or(GroupError::ArithmeticOverflow)?;
            debug_assert_eq!(num % s, 0);
            coords.push(num / s);
        }
        out.insert(&spec.reduce(&coords)?);
    }
    Ok(SubgroupBasis { group: spec.clone(), generators: out.generators() })
}

/// Recovers `{y : chi_z(y) = 1 for every sample z}`.
///
/// Groups of the form `Z_p^k` go through Gaussian elimination over `F_p`;
/// everything else takes the lattice route of [`orthogonal_subgroup`].
pub fn solve_kernel_from_orthogonal_samples(
    samples: &[GroupElement],
    spec: &GroupSpec,
) -> Result<SubgroupBasis, GroupError> {
    for s in samples {
        spec.check(s)?;
    }
    match spec.prime_modulus() {
        Some(p) => {
            let rows: Vec<Vec<u64>> = samples.iter().map(|s| s.residues().to_vec()).collect();
            let gens = nullspace_mod_p(&rows, spec.rank(), p).into_iter().map(GroupElement).collect();
            Ok(SubgroupBasis { group: spec.clone(), generators: gens })
        }
        None => orthogonal_subgroup(&SubgroupBasis::new(spec.clone(), samples.to_vec())?),
    }
}
