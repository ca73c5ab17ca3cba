//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::DMatrix;

/// Relative threshold on singular values for rank decisions.
pub const RANK_RELATIVE: f64 = 1e-7;

/// Singular values in decreasing order.
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return vec![];
    }
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Numerical rank: singular values above both `RANK_RELATIVE·σ_max` and `abs_tol`.
pub fn rank(a: &DMatrix<f64>, abs_tol: f64) -> usize {
    let s = singular_values(a);
    let cut = s.first().map_or(0.0, |m| m * RANK_RELATIVE).max(abs_tol);
    s.iter().filter(|v| **v > cut).count()
}

/// Orthonormal basis of the null space (as columns), with the same rank rule.
pub fn null_space(a: &DMatrix<f64>, abs_tol: f64) -> DMatrix<f64> {
    let n = a.ncols();
    // pad to a square matrix so the SVD returns a full V
    let rows = a.nrows().max(n);
    let mut sq = DMatrix::zeros(rows, n);
    sq.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
    let svd = sq.svd(false, true);
    let vt = svd.v_t.expect("requested V");
    let s = &svd.singular_values;
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let cut = (smax * RANK_RELATIVE).max(abs_tol);
    let cols: Vec<usize> = (0..s.len()).filter(|&i| s[i] <= cut).collect();
    let mut out = DMatrix::zeros(n, cols.len());
    for (c, &i) in cols.iter().enumerate() {
        for r in 0..n {
            out[(r, c)] = vt[(i, r)];
        }
    }
    out
}

/// Minimum-norm least-squares solution of `a·x = b`.
pub fn min_norm_solve(a: &DMatrix<f64>, b: &[f64]) -> Vec<f64> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let eps = (smax * 1e-13).max(f64::MIN_POSITIVE);
    let rhs = nalgebra::DVector::from_column_slice(b);
    match svd.solve(&rhs, eps) {
        Ok(x) => x.iter().copied().collect(),
        Err(_) => vec![0.0; a.ncols()],
    }
}

/// Number of positive minus number of negative eigenvalues of a symmetric matrix,
/// and its condition number.
pub fn signature_and_condition(h: &DMatrix<f64>) -> (i32, f64, f64) {
    let eig = h.clone().symmetric_eigen();
    let mut pos = 0;
    let mut neg = 0;
    let mut det = 1.0;
    let mut amax: f64 = 0.0;
    let mut amin = f64::INFINITY;
    for &l in eig.eigenvalues.iter() {
        if l > 0.0 {
            pos += 1;
        } else if l < 0.0 {
            neg += 1;
        }
        det *= l;
        amax = amax.max(l.abs());
        amin = amin.min(l.abs());
    }
    let cond = if amin > 0.0 { amax / amin } else { f64::INFINITY };
    (pos - neg, cond, det)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_and_null_space_of_wide_matrix() {
        let a = DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0]);
        assert_eq!(rank(&a, 1e-12), 2);
        let ns = null_space(&a, 1e-12);
        assert_eq!(ns.ncols(), 2);
        assert!((&a * &ns).norm() < 1e-12);
    }

    #[test]
    fn min_norm_solution() {
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let x = min_norm_solve(&a, &[2.0]);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn signature_of_saddle() {
        let h = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0]);
        let (sig, cond, det) = signature_and_condition(&h);
        assert_eq!(sig, 0);
        assert!((cond - 1.0).abs() < 1e-12);
        assert!((det + 1.0).abs() < 1e-12);
    }
}
