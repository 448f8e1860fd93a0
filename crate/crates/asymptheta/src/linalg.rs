//! Dense exact linear algebra over Q.

use num_traits::{One, Zero};

use crate::scalars::rational::{Q, QVec};

pub type QMat = Vec<QVec>;

pub fn zeros(r: usize, c: usize) -> QMat {
    vec![vec![Q::zero(); c]; r]
}

pub fn identity(n: usize) -> QMat {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Q::one();
    }
    m
}

pub fn transpose(m: &[QVec], cols: usize) -> QMat {
    let mut t = zeros(cols, m.len());
    for (i, row) in m.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            t[j][i] = x.clone();
        }
    }
    t
}

pub fn mat_vec(m: &[QVec], v: &[Q]) -> QVec {
    m.iter()
        .map(|row| row.iter().zip(v).fold(Q::zero(), |a, (x, y)| a + x * y))
        .collect()
}

pub fn mat_mul(a: &[QVec], b: &[QVec], bcols: usize) -> QMat {
    let mut out = zeros(a.len(), bcols);
    for (i, row) in a.iter().enumerate() {
        for (l, x) in row.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for j in 0..bcols {
                out[i][j] += x * &b[l][j];
            }
        }
    }
    out
}

/// Columns given as vectors -> matrix with those columns.
pub fn from_cols(cols: &[QVec], rows: usize) -> QMat {
    let mut m = zeros(rows, cols.len());
    for (j, c) in cols.iter().enumerate() {
        for i in 0..rows {
            m[i][j] = c[i].clone();
        }
    }
    m
}

/// In-place reduced row echelon form; returns pivot columns.
pub fn rref(m: &mut QMat) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return vec![];
    }
    let cols = m[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = Q::one() / &m[r][c];
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let t = &f * &m[r][j];
                    m[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    pivots
}

pub fn rank(m: &[QVec]) -> usize {
    let mut a = m.to_vec();
    rref(&mut a).len()
}

/// Basis of {x : m x = 0}; `cols` is the number of unknowns.
pub fn nullspace(m: &[QVec], cols: usize) -> Vec<QVec> {
    let mut a = m.to_vec();
    let piv = rref(&mut a);
    let free: Vec<usize> = (0..cols).filter(|c| !piv.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); cols];
            v[f] = Q::one();
            for (i, &p) in piv.iter().enumerate() {
                v[p] = -a[i][f].clone();
            }
            v
        })
        .collect()
}

/// One solution of m x = b, or None when inconsistent.
pub fn solve(m: &[QVec], b: &[Q], cols: usize) -> Option<QVec> {
    let mut a: QMat = m
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    if a.is_empty() {
        return Some(vec![Q::zero(); cols]);
    }
    let piv = rref(&mut a);
    if piv.contains(&cols) {
        return None;
    }
    let mut x = vec![Q::zero(); cols];
    for (i, &p) in piv.iter().enumerate() {
        x[p] = a[i][cols].clone();
    }
    Some(x)
}

pub fn inverse(m: &[QVec]) -> Option<QMat> {
    let n = m.len();
    let mut a: QMat = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    let piv = rref(&mut a);
    if piv.len() < n || piv[n - 1] >= n {
        return None;
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn det(m: &[QVec]) -> Q {
    let n = m.len();
    let mut a = m.to_vec();
    let mut d = Q::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return Q::zero();
        };
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= &a[c][c];
        let inv = Q::one() / &a[c][c];
        for i in c + 1..n {
            if a[i][c].is_zero() {
                continue;
            }
            let f = &a[i][c] * &inv;
            for j in c..n {
                let t = &f * &a[c][j];
                a[i][j] -= t;
            }
        }
    }
    d
}

/// Coordinates of v in the basis given by `basis` vectors (must lie in their span).
pub fn coords_in(basis: &[QVec], v: &[Q]) -> Option<QVec> {
    let m = from_cols(basis, v.len());
    solve(&m, v, basis.len())
}

pub fn in_span(basis: &[QVec], v: &[Q]) -> bool {
    if basis.is_empty() {
        return v.iter().all(|x| x.is_zero());
    }
    coords_in(basis, v).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::rational::{q, qvec};

    #[test]
    fn null_and_solve() {
        let m = vec![qvec(&[1, 1, 0]), qvec(&[0, 1, 1])];
        let ns = nullspace(&m, 3);
        assert_eq!(ns.len(), 1);
        assert_eq!(mat_vec(&m, &ns[0]), qvec(&[0, 0]));
        let x = solve(&m, &qvec(&[2, 3]), 3).unwrap();
        assert_eq!(mat_vec(&m, &x), qvec(&[2, 3]));
        assert!(solve(&[qvec(&[1, 1]), qvec(&[1, 1])], &qvec(&[0, 1]), 2).is_none());
    }

    #[test]
    fn det_and_inverse() {
        let m = vec![qvec(&[2, 1]), qvec(&[1, 1])];
        assert_eq!(det(&m), q(1));
        let inv = inverse(&m).unwrap();
        assert_eq!(mat_mul(&m, &inv, 2), identity(2));
        assert!(inverse(&[qvec(&[1, 2]), qvec(&[2, 4])]).is_none());
    }
}
