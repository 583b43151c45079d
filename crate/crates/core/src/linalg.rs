//! Exact dense linear algebra over ℤ and ℚ.
//!
//! Pivots are chosen column by column, taking the first row (smallest index)
//! with a nonzero entry, so results never depend on anything but the input.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::rational::Q;

pub type RatMatrix = Vec<Vec<Q>>;

pub fn rat_identity(n: usize) -> RatMatrix {
    (0..n).map(|i| (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect()).collect()
}

pub fn rat_mul(a: &RatMatrix, b: &RatMatrix) -> RatMatrix {
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).filter(|&k| !row[k].is_zero()).fold(Q::zero(), |acc, k| acc + &row[k] * &b[k][j]))
                .collect()
        })
        .collect()
}

/// Fraction-free (Bareiss) elimination of `[m | rhs]`. Returns the
/// determinant of `m` and, when it is nonzero, the solution `m⁻¹ · rhs`.
pub fn bareiss_solve(m: &[Vec<BigInt>], rhs: &[Vec<BigInt>]) -> (BigInt, Option<RatMatrix>) {
    let n = m.len();
    let extra = rhs.first().map_or(0, |r| r.len());
    let mut a: Vec<Vec<BigInt>> = m.iter().zip(rhs).map(|(r, s)| r.iter().chain(s).cloned().collect()).collect();
    let width = n + extra;
    let mut prev = BigInt::one();
    let mut negate = false;
    for k in 0..n {
        let Some(p) = (k..n).find(|&r| !a[r][k].is_zero()) else {
            return (BigInt::zero(), None);
        };
        if p != k {
            a.swap(p, k);
            negate = !negate;
        }
        for i in k + 1..n {
            for j in k + 1..width {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    let det = if n == 0 { BigInt::one() } else if negate { -a[n - 1][n - 1].clone() } else { a[n - 1][n - 1].clone() };
    let mut x = vec![vec![Q::zero(); extra]; n];
    for c in 0..extra {
        for i in (0..n).rev() {
            let mut acc = Q::from_integer(a[i][n + c].clone());
            for j in i + 1..n {
                if !a[i][j].is_zero() {
                    acc -= Q::from_integer(a[i][j].clone()) * &x[j][c];
                }
            }
            x[i][c] = acc / Q::from_integer(a[i][i].clone());
        }
    }
    (det, Some(x))
}

/// Determinant and inverse of an integer matrix.
pub fn int_inverse(m: &[Vec<BigInt>]) -> (BigInt, Option<RatMatrix>) {
    let n = m.len();
    let id: Vec<Vec<BigInt>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect();
    bareiss_solve(m, &id)
}

/// Gauss–Jordan inverse over ℚ, `None` when singular.
pub fn rat_inverse(m: &RatMatrix) -> Option<RatMatrix> {
    let n = m.len();
    let mut a: Vec<Vec<Q>> = m.iter().cloned().zip(rat_identity(n)).map(|(mut r, e)| {
        r.extend(e);
        r
    }).collect();
    for k in 0..n {
        let p = (k..n).find(|&r| !a[r][k].is_zero())?;
        a.swap(p, k);
        let inv = a[k][k].recip();
        for v in a[k].iter_mut() {
            *v *= &inv;
        }
        for i in 0..n {
            if i != k && !a[i][k].is_zero() {
                let f = a[i][k].clone();
                for j in 0..2 * n {
                    if !a[k][j].is_zero() {
                        let d = &f * &a[k][j];
                        a[i][j] -= d;
                    }
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Determinant over ℚ by elimination.
pub fn rat_det(m: &RatMatrix) -> Q {
    let n = m.len();
    let mut a = m.clone();
    let mut det = Q::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&r| !a[r][k].is_zero()) else {
            return Q::zero();
        };
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        det *= &a[k][k];
        let inv = a[k][k].recip();
        for i in k + 1..n {
            if !a[i][k].is_zero() {
                let f = &a[i][k] * &inv;
                for j in k..n {
                    if !a[k][j].is_zero() {
                        let d = &f * &a[k][j];
                        a[i][j] -= d;
                    }
                }
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q_frac, q_int};

    fn ints(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect()
    }

    fn rats(rows: &[&[i64]]) -> RatMatrix {
        rows.iter().map(|r| r.iter().map(|&v| q_int(v)).collect()).collect()
    }

    #[test]
    fn bareiss_matches_rational_elimination() {
        let m = &[&[2i64, 1, 0][..], &[1, 3, 1], &[0, 1, 4]];
        let (det, inv) = int_inverse(&ints(m));
        assert_eq!(det, BigInt::from(18));
        assert_eq!(rat_det(&rats(m)), q_int(18));
        let inv = inv.unwrap();
        assert_eq!(inv, rat_inverse(&rats(m)).unwrap());
        assert_eq!(rat_mul(&rats(m), &inv), rat_identity(3));
        assert_eq!(inv[0][0], q_frac(11, 18));
    }

    #[test]
    fn pivoting_and_singularity() {
        let m = &[&[0i64, 1][..], &[1, 0]];
        assert_eq!(int_inverse(&ints(m)).0, BigInt::from(-1));
        assert_eq!(rat_det(&rats(m)), q_int(-1));
        let s = &[&[1i64, 2][..], &[2, 4]];
        assert_eq!(int_inverse(&ints(s)), (BigInt::zero(), None));
        assert!(rat_inverse(&rats(s)).is_none());
    }
}
