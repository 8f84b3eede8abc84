//! Gaussian elimination over `F_p`.

use crate::arith::inv_mod;

/// Reduced row echelon form in place; returns pivot columns.
fn rref(m: &mut [Vec<u64>], cols: usize, p: u64) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(pr) = (r..m.len()).find(|&i| !m[i][c].is_multiple_of(p)) else { continue };
        m.swap(r, pr);
        let inv = inv_mod(m[r][c], p).expect("nonzero element of a prime field");
        for x in m[r].iter_mut() {
            *x = *x * inv % p;
        }
        let pivot = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && row[c] != 0 {
                let f = row[c];
                for (x, &y) in row[..cols].iter_mut().zip(&pivot) {
                    *x = (*x + (p - f) * y) % p;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    pivots
}

pub fn rank_mod_p(rows: &[Vec<u64>], cols: usize, p: u64) -> usize {
    let mut m: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(|x| x % p).collect()).collect();
    rref(&mut m, cols, p).len()
}

/// Basis of `{y : r . y = 0 mod p for every row r}`.
pub fn nullspace_mod_p(rows: &[Vec<u64>], cols: usize, p: u64) -> Vec<Vec<u64>> {
    let mut m: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(|x| x % p).collect()).collect();
    let pivots = rref(&mut m, cols, p);
    let free = (0..cols).filter(|c| !pivots.contains(c));
    free.map(|f| {
        let mut y = vec![0u64; cols];
        y[f] = 1;
        for (row, &pc) in pivots.iter().enumerate() {
            y[pc] = (p - m[row][f]) % p;
        }
        y
    })
    .collect()
}
