//! Integer and rational linear algebra on small dense matrices.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type IntMatrix = Vec<Vec<i64>>;
pub type RatMatrix = Vec<Vec<BigRational>>;

/// Smith normal form `u * a * v = d` with `u`, `v` unimodular.
#[derive(Clone, Debug)]
pub struct Snf {
    /// Nonzero diagonal entries d_0 | d_1 | ... (length = rank of `a`).
    pub diag: Vec<i64>,
    pub u: IntMatrix,
    pub v: IntMatrix,
    pub rows: usize,
    pub cols: usize,
}

fn identity(n: usize) -> IntMatrix {
    (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect()
}

pub fn smith_normal_form(a: &IntMatrix, cols: usize) -> Snf {
    let rows = a.len();
    let mut m = a.clone();
    let mut u = identity(rows);
    let mut v = identity(cols);
    let mut diag = Vec::new();

    let swap_rows = |m: &mut IntMatrix, u: &mut IntMatrix, i: usize, j: usize| {
        m.swap(i, j);
        u.swap(i, j);
    };
    let swap_cols = |m: &mut IntMatrix, v: &mut IntMatrix, i: usize, j: usize| {
        for row in m.iter_mut() {
            row.swap(i, j);
        }
        for row in v.iter_mut() {
            row.swap(i, j);
        }
    };

    for t in 0..rows.min(cols) {
        loop {
            // smallest nonzero entry of the trailing block
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if m[i][j] != 0 && best.is_none_or(|(bi, bj)| m[i][j].abs() < m[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else {
                return Snf { diag, u, v, rows, cols };
            };
            swap_rows(&mut m, &mut u, t, bi);
            swap_cols(&mut m, &mut v, t, bj);

            let p = m[t][t];
            let mut clean = true;
            for i in t + 1..rows {
                let q = m[i][t].div_euclid(p);
                if q != 0 {
                    for j in 0..cols {
                        m[i][j] -= q * m[t][j];
                    }
                    for j in 0..rows {
                        u[i][j] -= q * u[t][j];
                    }
                }
                clean &= m[i][t] == 0;
            }
            for j in t + 1..cols {
                let q = m[t][j].div_euclid(p);
                if q != 0 {
                    for i in 0..rows {
                        m[i][j] -= q * m[i][t];
                    }
                    for i in 0..cols {
                        v[i][j] -= q * v[i][t];
                    }
                }
                clean &= m[t][j] == 0;
            }
            if !clean {
                continue;
            }
            // enforce divisibility of the trailing block
            let mut bad_row = None;
            'outer: for i in t + 1..rows {
                for j in t + 1..cols {
                    if m[i][j] % p != 0 {
                        bad_row = Some(i);
                        break 'outer;
                    }
                }
            }
            if let Some(i) = bad_row {
                for j in 0..cols {
                    m[t][j] += m[i][j];
                }
                for j in 0..rows {
                    u[t][j] += u[i][j];
                }
                continue;
            }
            if p < 0 {
                for j in 0..cols {
                    m[t][j] = -m[t][j];
                }
                for j in 0..rows {
                    u[t][j] = -u[t][j];
                }
            }
            diag.push(m[t][t]);
            break;
        }
    }
    Snf { diag, u, v, rows, cols }
}

impl Snf {
    pub fn rank(&self) -> usize {
        self.diag.len()
    }

    /// Index of the lattice spanned by the columns inside its saturation.
    pub fn saturation_index(&self) -> i64 {
        self.diag.iter().product()
    }

    /// Basis of the integer kernel of `a` (as column vectors).
    pub fn kernel_basis(&self) -> IntMatrix {
        (self.rank()..self.cols)
            .map(|k| (0..self.cols).map(|i| self.v[i][k]).collect())
            .collect()
    }

    /// Some integer `x` with `a x = b`, if one exists.
    pub fn solve_integer(&self, b: &[i64]) -> Option<Vec<i64>> {
        let ub = mat_vec(&self.u, b);
        let mut y = vec![0i64; self.cols];
        for (i, ubi) in ub.iter().enumerate() {
            if i < self.rank() {
                if ubi % self.diag[i] != 0 {
                    return None;
                }
                y[i] = ubi / self.diag[i];
            } else if *ubi != 0 {
                return None;
            }
        }
        Some(mat_vec(&self.v, &y))
    }
}

pub fn mat_vec(m: &IntMatrix, x: &[i64]) -> Vec<i64> {
    m.iter()
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn transpose<T: Clone>(m: &[Vec<T>]) -> Vec<Vec<T>> {
    if m.is_empty() {
        return Vec::new();
    }
    (0..m[0].len())
        .map(|j| m.iter().map(|row| row[j].clone()).collect())
        .collect()
}

/// Determinant of a square integer matrix (Bareiss, exact).
pub fn det(m: &IntMatrix) -> i64 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            let Some(p) = (k + 1..n).find(|&i| a[i][k] != 0) else {
                return 0;
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    (sign * a[n - 1][n - 1]) as i64
}

/// `|I|×rank` volume: index of the sublattice spanned by `vectors` in its
/// saturation, or 0 if they are dependent.
pub fn lattice_volume(vectors: &[Vec<i64>], rank: usize) -> i64 {
    if vectors.is_empty() {
        return 1;
    }
    let snf = smith_normal_form(&vectors.to_vec(), rank);
    if snf.rank() < vectors.len() {
        0
    } else {
        snf.saturation_index()
    }
}

pub fn to_rational(m: &IntMatrix) -> RatMatrix {
    m.iter()
        .map(|r| r.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect())
        .collect()
}

/// Reduced row echelon form in place; returns pivot columns.
pub fn rref(m: &mut RatMatrix) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return Vec::new();
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
        let inv = m[r][c].recip();
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
    pivots
}

/// Inverse of a square rational matrix.
pub fn inverse(m: &RatMatrix) -> Option<RatMatrix> {
    let n = m.len();
    let mut aug: RatMatrix = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| {
                if i == j {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            }));
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() < n || pivots[n - 1] >= n {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Solves `m x = b` for square invertible `m`.
pub fn solve(m: &RatMatrix, b: &[BigRational]) -> Option<Vec<BigRational>> {
    let inv = inverse(m)?;
    Some(
        inv.iter()
            .map(|row| row.iter().zip(b).map(|(a, x)| a * x).sum())
            .collect(),
    )
}

/// Some solution of an under- or over-determined system `m x = b`.
pub fn solve_any(m: &RatMatrix, b: &[BigRational]) -> Option<Vec<BigRational>> {
    let cols = m.first().map_or(0, |r| r.len());
    let mut aug: RatMatrix = m
        .iter()
        .zip(b)
        .map(|(r, x)| {
            let mut r = r.clone();
            r.push(x.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.last() == Some(&cols) {
        return None;
    }
    let mut x = vec![BigRational::zero(); cols];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = aug[r][cols].clone();
    }
    Some(x)
}

pub fn rank(m: &RatMatrix) -> usize {
    let mut c = m.clone();
    rref(&mut c).len()
}

/// Integer normal covector to the span of `rank - 1` vectors (generalized
/// cross product of cofactors).
pub fn normal_covector(vectors: &[Vec<i64>], rank: usize) -> Vec<i64> {
    assert_eq!(vectors.len() + 1, rank);
    (0..rank)
        .map(|k| {
            let minor: IntMatrix = vectors
                .iter()
                .map(|v| v.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, &x)| x).collect())
                .collect();
            let s = if k % 2 == 0 { 1 } else { -1 };
            s * det(&minor)
        })
        .collect()
}

pub fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn dot_rat(a: &[BigRational], b: &[i64]) -> BigRational {
    a.iter()
        .zip(b)
        .map(|(x, &y)| x * BigRational::from_integer(BigInt::from(y)))
        .sum()
}

pub fn abs_i64(x: i64) -> i64 {
    x.abs()
}

pub fn gcd_vec(v: &[i64]) -> i64 {
    v.iter().fold(0i64, |g, &x| num_integer::gcd(g, x.abs()))
}

pub fn is_nonneg(q: &BigRational) -> bool {
    !q.is_negative()
}
