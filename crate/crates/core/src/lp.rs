//! Exact feasibility for systems `A x ≥ b` with free `x`, by the two-phase
//! simplex method over the rationals with Bland's rule.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Returns some `x` with `a x ≥ b`, or `None` if the system is infeasible.
pub fn feasible_point(a: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    let m = a.len();
    let n = a.first().map_or(0, |r| r.len());
    if m == 0 {
        return Some(vec![BigRational::zero(); n]);
    }
    // columns: x+ (n), x- (n), slack (m), artificial (m), rhs
    let width = 2 * n + 2 * m + 1;
    let rhs = width - 1;
    let mut t: Vec<Vec<BigRational>> = Vec::with_capacity(m + 1);
    for i in 0..m {
        let mut row = vec![BigRational::zero(); width];
        for j in 0..n {
            row[j] = a[i][j].clone();
            row[n + j] = -a[i][j].clone();
        }
        row[2 * n + i] = -BigRational::one();
        row[rhs] = b[i].clone();
        if row[rhs].is_negative() {
            for x in row.iter_mut() {
                *x = -x.clone();
            }
        }
        row[2 * n + m + i] = BigRational::one();
        t.push(row);
    }
    let mut basis: Vec<usize> = (0..m).map(|i| 2 * n + m + i).collect();
    // objective row: minimise the sum of artificials, stored as reduced costs
    let mut obj = vec![BigRational::zero(); width];
    for row in &t {
        for j in 0..width {
            if !(2 * n + m..2 * n + 2 * m).contains(&j) {
                obj[j] -= &row[j];
            }
        }
    }
    t.push(obj);

    while let Some(enter) = (0..rhs).find(|&j| t[m][j].is_negative()) {
        let mut leave: Option<(usize, BigRational)> = None;
        for i in 0..m {
            if t[i][enter].is_positive() {
                let ratio = &t[i][rhs] / &t[i][enter];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((r, _)) = leave else {
            // unbounded below cannot happen for a sum of nonnegative artificials
            return None;
        };
        pivot(&mut t, r, enter);
        basis[r] = enter;
    }
    if !t[m][rhs].is_zero() {
        return None;
    }
    let mut x = vec![BigRational::zero(); n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            x[bv] += &t[i][rhs];
        } else if bv < 2 * n {
            x[bv - n] -= &t[i][rhs];
        }
    }
    Some(x)
}

fn pivot(t: &mut [Vec<BigRational>], r: usize, c: usize) {
    let p = t[r][c].clone();
    for x in t[r].iter_mut() {
        *x /= &p;
    }
    let pivot_row = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i != r && !row[c].is_zero() {
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                *x -= &f * y;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::int;

    fn check(a: &[Vec<i64>], b: &[i64]) -> Option<Vec<BigRational>> {
        let a: Vec<Vec<BigRational>> = a.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect();
        let b: Vec<BigRational> = b.iter().map(|&x| int(x)).collect();
        let x = feasible_point(&a, &b)?;
        for (row, bi) in a.iter().zip(&b) {
            let lhs: BigRational = row.iter().zip(&x).map(|(p, q)| p * q).sum();
            assert!(lhs >= *bi);
        }
        Some(x)
    }

    #[test]
    fn feasible_systems() {
        assert!(check(&[vec![1, 0], vec![0, 1]], &[1, 1]).is_some());
        assert!(check(&[vec![2, -3, 1]], &[1]).is_some());
        assert!(check(&[vec![-1, 0], vec![1, 1]], &[1, -5]).is_some());
    }

    #[test]
    fn infeasible_systems() {
        assert!(check(&[vec![1], vec![-1]], &[1, 1]).is_none());
        assert!(check(&[vec![1, -1], vec![-1, 1]], &[1, 0]).is_none());
    }
}
