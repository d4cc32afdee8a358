//! Dense exact linear algebra over [`Rational`].

use crate::rational::{RatVec, Rational};

pub type Matrix = Vec<Vec<Rational>>;

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(m: &mut Matrix) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
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
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let factor = m[i][c].clone();
                for j in 0..cols {
                    if !m[r][j].is_zero() {
                        let d = &factor * &m[r][j];
                        m[i][j] -= d;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &Matrix) -> usize {
    rref(&mut m.clone()).len()
}

/// Rank of a family of vectors.
pub fn rank_of(vs: &[RatVec]) -> usize {
    rank(&vs.iter().map(|v| v.0.clone()).collect())
}

/// Solves `a x = b` for square nonsingular `a`.
pub fn solve(a: &Matrix, b: &[Rational]) -> Option<Vec<Rational>> {
    let n = a.len();
    let mut aug: Matrix = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let piv = rref(&mut aug);
    if piv.len() != n || piv.iter().any(|&c| c >= n) {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n].clone()).collect())
}

pub fn inverse(a: &Matrix) -> Option<Matrix> {
    let n = a.len();
    let mut aug: Matrix = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    let piv = rref(&mut aug);
    if piv.len() < n || piv[n - 1] >= n {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn mat_vec(a: &Matrix, x: &[Rational]) -> Vec<Rational> {
    a.iter().map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

/// Basis of `{x : a x = 0}` where `a` has `cols` columns.
pub fn nullspace(a: &Matrix, cols: usize) -> Vec<Vec<Rational>> {
    let mut m = a.clone();
    let piv = rref(&mut m);
    let free: Vec<usize> = (0..cols).filter(|c| !piv.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); cols];
            v[f] = Rational::one();
            for (r, &pc) in piv.iter().enumerate() {
                v[pc] = -&m[r][f];
            }
            v
        })
        .collect()
}

/// Columns are the given vectors.
pub fn from_columns(cols: &[RatVec]) -> Matrix {
    let rows = cols.first().map_or(0, RatVec::dim);
    (0..rows).map(|i| cols.iter().map(|c| c.0[i].clone()).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn m(rows: &[&[i64]]) -> Matrix {
        rows.iter().map(|r| r.iter().map(|&x| Rational::from(x)).collect()).collect()
    }

    #[test]
    fn rank_and_solve() {
        let a = m(&[&[1, 2], &[3, 4]]);
        assert_eq!(rank(&a), 2);
        let x = solve(&a, &[q(5, 1), q(6, 1)]).unwrap();
        assert_eq!(x, vec![q(-4, 1), q(9, 2)]);
        let s = m(&[&[1, 2], &[2, 4]]);
        assert_eq!(rank(&s), 1);
        assert!(solve(&s, &[q(1, 1), q(1, 1)]).is_none());
        assert!(inverse(&s).is_none());
    }

    #[test]
    fn inverse_round_trip() {
        let a = m(&[&[2, 1, 0], &[0, 1, 3], &[1, 0, 1]]);
        let inv = inverse(&a).unwrap();
        for i in 0..3 {
            let col: Vec<Rational> = (0..3).map(|r| inv[r][i].clone()).collect();
            let e = mat_vec(&a, &col);
            for (j, x) in e.iter().enumerate() {
                assert_eq!(*x, if i == j { q(1, 1) } else { q(0, 1) });
            }
        }
    }

    #[test]
    fn nullspace_is_annihilated() {
        let a = m(&[&[1, 1, 1, 0], &[0, 1, 2, 1]]);
        let ns = nullspace(&a, 4);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(mat_vec(&a, v).iter().all(Rational::is_zero));
        }
    }
}
