//! Small dense linear algebra: just enough for the least-squares fits
//! used by the classification checks.

use crate::error::{Error, Result};

/// Solve `A x = b` for a small square system by Gaussian elimination with
/// partial pivoting. `a` is row-major, consumed in place.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[piv][col].abs() < 1e-13 {
            return Err(Error::SingularMetric);
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}

/// Least-squares solution of the overdetermined system `design * x = rhs`
/// via the normal equations, together with the residual vector
/// `design * x - rhs`.
pub fn least_squares(design: &[Vec<f64>], rhs: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let rows = design.len();
    assert_eq!(rows, rhs.len());
    let cols = design[0].len();
    let mut ata = vec![vec![0.0; cols]; cols];
    let mut atb = vec![0.0; cols];
    for r in 0..rows {
        for i in 0..cols {
            atb[i] += design[r][i] * rhs[r];
            for j in 0..cols {
                ata[i][j] += design[r][i] * design[r][j];
            }
        }
    }
    let x = solve(ata, atb)?;
    let mut res = vec![0.0; rows];
    for r in 0..rows {
        let mut p = 0.0;
        for i in 0..cols {
            p += design[r][i] * x[i];
        }
        res[r] = p - rhs[r];
    }
    Ok((x, res))
}

/// max |v_i|
pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Relative residual `max|fit misfit| / max|data|`, with an absolute
/// fallback when the data itself is at noise level.
pub fn relative_residual(misfit: &[f64], data: &[f64]) -> f64 {
    let scale = max_abs(data);
    if scale < 1e-12 {
        max_abs(misfit)
    } else {
        max_abs(misfit) / scale
    }
}
