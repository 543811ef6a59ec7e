//! Small dense symmetric matrices at a single grid point (n = 2 or 3).
//! Matrices are passed as row-major slices of length `n * n`.

use nalgebra::{Matrix2, Matrix3, SymmetricEigen};

pub type SymMat = [[f64; 3]; 3];

/// Cholesky-based inverse and `sqrt(det)`; `None` unless positive definite.
pub fn spd_inverse(n: usize, m: &[f64], inv: &mut [f64]) -> Option<f64> {
    match n {
        2 => {
            let a = Matrix2::from_row_slice(m);
            let ch = a.cholesky()?;
            let sqrt_det = ch.l_dirty().diagonal().product();
            inv.copy_from_slice(ch.inverse().transpose().as_slice());
            Some(sqrt_det)
        }
        3 => {
            let a = Matrix3::from_row_slice(m);
            let ch = a.cholesky()?;
            let sqrt_det = ch.l_dirty().diagonal().product();
            inv.copy_from_slice(ch.inverse().transpose().as_slice());
            Some(sqrt_det)
        }
        _ => panic!("unsupported dimension {n}"),
    }
}

/// Eigenvalues in ascending order (first `n` entries valid).
pub fn sym_eigenvalues(n: usize, m: &[f64]) -> [f64; 3] {
    let mut out = [0.0; 3];
    match n {
        2 => {
            let e = SymmetricEigen::new(Matrix2::from_row_slice(m)).eigenvalues;
            out[..2].copy_from_slice(e.as_slice());
        }
        3 => {
            let e = SymmetricEigen::new(Matrix3::from_row_slice(m)).eigenvalues;
            out[..3].copy_from_slice(e.as_slice());
        }
        _ => panic!("unsupported dimension {n}"),
    }
    out[..n].sort_by(|a, b| a.total_cmp(b));
    out
}

/// Range of the eigenvalues of `b^{-1} a` for symmetric `a` and
/// positive-definite `b`: the sharpest `(lo, hi)` with `lo b <= a <= hi b`.
pub fn relative_eigen_range(n: usize, a: &[f64], b: &[f64]) -> (f64, f64) {
    match n {
        2 => {
            let l = Matrix2::from_row_slice(b)
                .cholesky()
                .expect("positive-definite reference")
                .l();
            let li = l.try_inverse().expect("invertible factor");
            let s = li * Matrix2::from_row_slice(a) * li.transpose();
            let e = SymmetricEigen::new(s).eigenvalues;
            (e.min(), e.max())
        }
        3 => {
            let l = Matrix3::from_row_slice(b)
                .cholesky()
                .expect("positive-definite reference")
                .l();
            let li = l.try_inverse().expect("invertible factor");
            let s = li * Matrix3::from_row_slice(a) * li.transpose();
            let e = SymmetricEigen::new(s).eigenvalues;
            (e.min(), e.max())
        }
        _ => panic!("unsupported dimension {n}"),
    }
}

pub fn identity() -> SymMat {
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_spd_3x3() {
        let m = [4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0];
        let mut inv = [0.0; 9];
        let sd = spd_inverse(3, &m, &mut inv).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| m[3 * i + k] * inv[3 * k + j]).sum();
                assert!((v - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
        let det = 4.0 * (6.0 - 0.04) - 1.0 * (2.0 - 0.1) + 0.5 * (0.2 - 1.5);
        assert!((sd * sd - det).abs() < 1e-12);
    }

    #[test]
    fn indefinite_is_rejected() {
        let mut inv = [0.0; 4];
        assert!(spd_inverse(2, &[1.0, 2.0, 2.0, 1.0], &mut inv).is_none());
        let e = sym_eigenvalues(2, &[1.0, 2.0, 2.0, 1.0]);
        assert!((e[0] + 1.0).abs() < 1e-14 && (e[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn relative_range_of_scaled_metric() {
        let b = [2.0, 0.3, 0.3, 1.0];
        let a: Vec<f64> = b.iter().map(|v| 3.0 * v).collect();
        let (lo, hi) = relative_eigen_range(2, &a, &b);
        assert!((lo - 3.0).abs() < 1e-13 && (hi - 3.0).abs() < 1e-13);
    }
}
