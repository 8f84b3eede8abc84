use crate::arith::ext_gcd;

use super::{GroupElement, GroupSpec};

/// Incremental Hermite basis of the lattice `<generators> + diag(N) Z^k`.
///
/// Row `j` carries the pivot `d_j` in column `j` and zeros to its left;
/// entries right of a pivot are kept in `[0, d_l)`. The rows start as
/// `N_j e_j`, so `d_j | N_j` always holds and the generated subgroup has
/// order `prod N_j / d_j`.
#[derive(Debug, Clone)]
pub struct SubgroupTracker {
    spec: GroupSpec,
    rows: Vec<Vec<i128>>,
}

impl SubgroupTracker {
    pub fn new(spec: &GroupSpec) -> Self {
        let k = spec.rank();
        let rows = (0..k)
            .map(|j| {
                let mut r = vec![0i128; k];
                r[j] = spec.orders()[j] as i128;
                r
            })
            .collect();
        SubgroupTracker { spec: spec.clone(), rows }
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    /// Adds a generator; returns whether the subgroup grew.
    pub fn insert(&mut self, e: &GroupElement) -> bool {
        let before: Vec<i128> = (0..self.rows.len()).map(|j| self.rows[j][j]).collect();
        let mut v: Vec<i128> = e.residues().iter().map(|&r| r as i128).collect();
        let k = self.rows.len();
        self.reduce_from(&mut v, 0);
        for j in 0..k {
            if v[j] == 0 {
                continue;
            }
            let d = self.rows[j][j];
            let (g, a, b) = ext_gcd(v[j], d);
            let (vg, dg) = (v[j] / g, d / g);
            let pivot: Vec<i128> = (0..k).map(|c| a * v[c] + b * self.rows[j][c]).collect();
            let rest: Vec<i128> = (0..k).map(|c| dg * v[c] - vg * self.rows[j][c]).collect();
            self.rows[j] = pivot;
            v = rest;
            let mut row = std::mem::take(&mut self.rows[j]);
            self.reduce_from(&mut row, j + 1);
            self.rows[j] = row;
            self.reduce_from(&mut v, j + 1);
        }
        debug_assert!(v.iter().all(|&x| x == 0));
        self.normalize();
        (0..k).any(|j| self.rows[j][j] != before[j])
    }

    /// Reduces columns `start..` of `w` into `[0, d_l)` using the pivot rows.
    fn reduce_from(&self, w: &mut [i128], start: usize) {
        for l in start..self.rows.len() {
            let d = self.rows[l][l];
            let q = w[l].div_euclid(d);
            if q != 0 {
                for (x, &y) in w[l..].iter_mut().zip(&self.rows[l][l..]) {
                    *x -= q * y;
                }
            }
        }
    }

    fn normalize(&mut self) {
        for i in 0..self.rows.len() {
            let mut row = std::mem::take(&mut self.rows[i]);
            self.reduce_from(&mut row, i + 1);
            self.rows[i] = row;
        }
    }

    pub fn pivots(&self) -> Vec<u64> {
        (0..self.rows.len()).map(|j| self.rows[j][j] as u64).collect()
    }

    /// Order of the tracked subgroup.
    pub fn order(&self) -> u64 {
        self.spec.orders().iter().zip(self.pivots()).map(|(&n, d)| n / d).product()
    }

    /// `N_j / d_j`; every subgroup element is `sum c_j row_j` for a unique
    /// choice of `0 <= c_j < N_j / d_j`.
    pub fn quotients(&self) -> Vec<u64> {
        self.spec.orders().iter().zip(self.pivots()).map(|(&n, d)| n / d).collect()
    }

    /// The subgroup element with mixed-radix coefficient index `index`
    /// (last coefficient fastest); index 0 is the identity.
    pub fn element_at(&self, mut index: u64) -> GroupElement {
        let q = self.quotients();
        let k = self.rows.len();
        let mut acc = vec![0i128; k];
        for j in (0..k).rev() {
            let c = (index % q[j]) as i128;
            index /= q[j];
            if c != 0 {
                for (a, &r) in acc.iter_mut().zip(&self.rows[j]) {
                    *a += c * r;
                }
            }
        }
        self.spec.reduce(&acc).expect("row length equals rank")
    }

    /// Basis rows of the lifted lattice (square, upper triangular).
    pub(crate) fn lattice_rows(&self) -> Vec<Vec<i128>> {
        self.rows.clone()
    }

    /// Non-identity basis rows reduced into the group.
    pub fn generators(&self) -> Vec<GroupElement> {
        self.rows
            .iter()
            .map(|r| self.spec.reduce(r).expect("row length equals rank"))
            .filter(|e| !e.is_identity())
            .collect()
    }
}
