//! Small dense solvers: exact rational elimination for moment systems and
//! Cholesky for the normal equations.

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Solves `a · x = b` column-wise for every column of `b`, exactly.
///
/// `a` is square (n × n) and `b` is n × m. Returns the n × m solution.
pub(crate) fn solve_rational(
    mut a: Vec<Vec<BigRational>>,
    mut b: Vec<Vec<BigRational>>,
) -> Result<Vec<Vec<BigRational>>> {
    let n = a.len();
    debug_assert!(a.iter().all(|row| row.len() == n));
    debug_assert_eq!(b.len(), n);

    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .ok_or(Error::SingularSystem)?;
        a.swap(col, pivot);
        b.swap(col, pivot);

        let inv = BigRational::one() / a[col][col].clone();
        for v in a[col].iter_mut() {
            *v = &*v * &inv;
        }
        for v in b[col].iter_mut() {
            *v = &*v * &inv;
        }

        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for c in 0..n {
                let delta = &factor * &a[col][c];
                a[r][c] -= delta;
            }
            for c in 0..b[r].len() {
                let delta = &factor * &b[col][c];
                b[r][c] -= delta;
            }
        }
    }
    Ok(b)
}

/// Solves a symmetric positive-definite system in place via Cholesky.
///
/// Fails with [`Error::DegenerateFamily`] when a pivot is not strictly
/// positive (relative to the matrix scale).
pub(crate) fn solve_spd(matrix: &[Vec<f64>], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = rhs.len();
    let scale = (0..n).map(|i| matrix[i][i].abs()).fold(0.0, f64::max);
    if n == 0 || !(scale > 0.0) {
        return Err(Error::DegenerateFamily);
    }

    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = matrix[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                if sum <= scale * 1e-14 {
                    return Err(Error::DegenerateFamily);
                }
                l[i][i] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }

    let mut y = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[i][k] * y[k]).sum();
        y[i] = (rhs[i] - s) / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| l[k][i] * x[k]).sum();
        x[i] = (y[i] - s) / l[i][i];
    }
    Ok(x)
}
