//! Small dense helpers over row-major coordinate lists.

use nalgebra::{DMatrix, DVector};

/// Relative pivot threshold used by [`rank`].
pub const RANK_THRESHOLD: f64 = 1e-10;

/// Numerical rank of the matrix whose rows are `rows`, by Gaussian
/// elimination with complete pivoting. A pivot counts when it exceeds
/// `RANK_THRESHOLD` times the largest pivot seen.
pub fn rank(rows: &[&[f64]]) -> usize {
    let m = rows.len();
    if m == 0 {
        return 0;
    }
    let n = rows[0].len();
    let mut a: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
    let mut largest = 0.0_f64;
    let mut r = 0;
    while r < m.min(n) {
        let (mut pi, mut pj, mut pv) = (r, r, 0.0_f64);
        for (i, row) in a.iter().enumerate().skip(r) {
            for (j, v) in row.iter().enumerate().skip(r) {
                if v.abs() > pv {
                    (pi, pj, pv) = (i, j, v.abs());
                }
            }
        }
        largest = largest.max(pv);
        if pv == 0.0 || pv <= RANK_THRESHOLD * largest {
            break;
        }
        a.swap(r, pi);
        for row in a.iter_mut() {
            row.swap(r, pj);
        }
        let pivot_row = a[r].clone();
        for row in a.iter_mut().skip(r + 1) {
            let factor = row[r] / pivot_row[r];
            for (x, p) in row.iter_mut().zip(&pivot_row).skip(r) {
                *x -= factor * p;
            }
        }
        r += 1;
    }
    r
}

pub fn matrix_from_rows(rows: &[&[f64]]) -> DMatrix<f64> {
    let m = rows.len();
    let n = rows.first().map_or(0, |r| r.len());
    DMatrix::from_fn(m, n, |i, j| rows[i][j])
}

/// Minimum-norm least-squares solution of `a x = b` via SVD.
pub fn least_norm_solve(a: &DMatrix<f64>, b: &[f64]) -> Vec<f64> {
    let svd = a.clone().svd(true, true);
    let max_sv = svd.singular_values.max();
    let eps = RANK_THRESHOLD * max_sv.max(f64::MIN_POSITIVE);
    let x = svd
        .solve(&DVector::from_column_slice(b), eps)
        .expect("SVD computed with both factors");
    x.as_slice().to_vec()
}

pub fn max_abs(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

pub fn euclidean_norm(xs: &[f64]) -> f64 {
    xs.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_simple_matrices() {
        assert_eq!(rank(&[&[1.0, 0.0], &[0.0, 1.0]]), 2);
        assert_eq!(rank(&[&[1.0, 2.0], &[2.0, 4.0]]), 1);
        assert_eq!(rank(&[&[0.0, 0.0]]), 0);
        assert_eq!(rank(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], &[7.0, 8.0, 9.0]]), 2);
        assert_eq!(rank(&[&[1.0, 0.0, 0.0], &[0.0, 1e-3, 0.0]]), 2);
        assert_eq!(rank(&[&[1.0, 1.0], &[1.0, 1.0 + 1e-13]]), 1);
    }

    #[test]
    fn least_norm_picks_minimal_solution() {
        let a = matrix_from_rows(&[&[1.0, 1.0]]);
        let x = least_norm_solve(&a, &[2.0]);
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }
}
