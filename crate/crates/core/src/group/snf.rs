use super::GroupError;

/// `U A V = diag(diagonal)` with `U`, `V` unimodular and each diagonal entry
/// dividing the next.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithForm {
    pub diagonal: Vec<i128>,
    pub u: Vec<Vec<i128>>,
    pub v: Vec<Vec<i128>>,
}

fn identity(n: usize) -> Vec<Vec<i128>> {
    (0..n).map(|i| (0..n).map(|j| i128::from(i == j)).collect()).collect()
}

fn checked_axpy(dst: &mut [i128], src: &[i128], q: i128) -> Result<(), GroupError> {
    for (d, &s) in dst.iter_mut().zip(src) {
        *d = q.checked_mul(s).and_then(|p| d.checked_sub(p)).ok_or(GroupError::ArithmeticOverflow)?;
    }
    Ok(())
}

fn col_axpy(m: &mut [Vec<i128>], dst: usize, src: usize, q: i128) -> Result<(), GroupError> {
    for row in m.iter_mut() {
        row[dst] =
            q.checked_mul(row[src]).and_then(|p| row[dst].checked_sub(p)).ok_or(GroupError::ArithmeticOverflow)?;
    }
    Ok(())
}

fn swap_cols(m: &mut [Vec<i128>], a: usize, b: usize) {
    for row in m.iter_mut() {
        row.swap(a, b);
    }
}

/// Smith normal form of an integer matrix (rows of equal length).
pub fn smith_normal_form(a: &[Vec<i128>]) -> Result<SmithForm, GroupError> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<i128>> = a.to_vec();
    let mut u = identity(rows);
    let mut v = identity(cols);
    let steps = rows.min(cols);

    for t in 0..steps {
        loop {
            // smallest nonzero magnitude in the trailing block
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if m[i][j] != 0 && best.is_none_or(|(bi, bj)| m[i][j].abs() < m[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else { break };
            m.swap(t, pi);
            u.swap(t, pi);
            swap_cols(&mut m, t, pj);
            swap_cols(&mut v, t, pj);

            let p = m[t][t];
            let mut dirty = false;
            for i in t + 1..rows {
                let q = m[i][t].div_euclid(p);
                if q != 0 {
                    let (top, bottom) = m.split_at_mut(i);
                    checked_axpy(&mut bottom[0], &top[t], q)?;
                    let (ut, ub) = u.split_at_mut(i);
                    checked_axpy(&mut ub[0], &ut[t], q)?;
                }
                dirty |= m[i][t] != 0;
            }
            for j in t + 1..cols {
                let q = m[t][j].div_euclid(p);
                if q != 0 {
                    col_axpy(&mut m, j, t, q)?;
                    col_axpy(&mut v, j, t, q)?;
                }
                dirty |= m[t][j] != 0;
            }
            if dirty {
                continue;
            }
            // divisibility of the trailing block by the pivot
            let offender = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| m[i][j] % p != 0));
            match offender {
                Some(i) => {
                    let (top, bottom) = m.split_at_mut(i);
                    checked_axpy(&mut top[t], &bottom[0], -1)?;
                    let (ut, ub) = u.split_at_mut(i);
                    checked_axpy(&mut ut[t], &ub[0], -1)?;
                }
                None => break,
            }
        }
        if m[t][t] < 0 {
            for x in m[t].iter_mut() {
                *x = -*x;
            }
            for x in u[t].iter_mut() {
                *x = -*x;
            }
        }
    }

    let diagonal = (0..steps).map(|i| m[i][i]).collect();
    Ok(SmithForm { diagonal, u, v })
}
