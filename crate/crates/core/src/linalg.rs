//! Small dense symmetric solves on row-major `q x q` buffers, used in the
//! per-SNP inner loops where allocating nalgebra matrices would dominate.

/// In-place Cholesky factorisation of a symmetric positive definite matrix
/// (lower triangle referenced). Returns `false` if a pivot is not positive.
pub(crate) fn cholesky(a: &mut [f64], q: usize) -> bool {
    for j in 0..q {
        let mut d = a[j * q + j];
        for k in 0..j {
            d -= a[j * q + k] * a[j * q + k];
        }
        if !(d > 0.0) || !d.is_finite() {
            return false;
        }
        let d = d.sqrt();
        a[j * q + j] = d;
        for i in j + 1..q {
            let mut s = a[i * q + j];
            for k in 0..j {
                s -= a[i * q + k] * a[j * q + k];
            }
            a[i * q + j] = s / d;
        }
    }
    true
}

/// Solves `L L^T x = b` in place given the factor from [`cholesky`].
pub(crate) fn cholesky_solve(l: &[f64], q: usize, b: &mut [f64]) {
    for i in 0..q {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * q + k] * b[k];
        }
        b[i] = s / l[i * q + i];
    }
    for i in (0..q).rev() {
        let mut s = b[i];
        for k in i + 1..q {
            s -= l[k * q + i] * b[k];
        }
        b[i] = s / l[i * q + i];
    }
}

/// Diagonal of `(L L^T)^{-1}`.
pub(crate) fn cholesky_inverse_diag(l: &[f64], q: usize) -> Vec<f64> {
    let mut diag = vec![0.0; q];
    let mut e = vec![0.0; q];
    for j in 0..q {
        e.iter_mut().for_each(|x| *x = 0.0);
        e[j] = 1.0;
        cholesky_solve(l, q, &mut e);
        diag[j] = e[j];
    }
    diag
}

/// Smallest `1 - R^2` of any column regressed on the preceding ones, from the
/// Cholesky factor of the column-normalised Gram matrix. Zero columns give 0.
pub(crate) fn min_residual_fraction(gram: &[f64], q: usize) -> f64 {
    let norms: Vec<f64> = (0..q).map(|j| gram[j * q + j].sqrt()).collect();
    if norms.iter().any(|&x| !(x > 0.0)) {
        return 0.0;
    }
    let mut g: Vec<f64> = (0..q * q)
        .map(|idx| gram[idx] / (norms[idx / q] * norms[idx % q]))
        .collect();
    let mut worst = f64::INFINITY;
    for j in 0..q {
        let mut d = g[j * q + j];
        for k in 0..j {
            d -= g[j * q + k] * g[j * q + k];
        }
        worst = worst.min(d);
        if !(d > 0.0) {
            return 0.0;
        }
        let s = d.sqrt();
        g[j * q + j] = s;
        for i in j + 1..q {
            let mut v = g[i * q + j];
            for k in 0..j {
                v -= g[i * q + k] * g[j * q + k];
            }
            g[i * q + j] = v / s;
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_and_inverse() {
        let a = [4.0, 2.0, 0.6, 2.0, 5.0, 1.0, 0.6, 1.0, 3.0];
        let mut l = a;
        assert!(cholesky(&mut l, 3));
        let mut b = [1.0, 2.0, 3.0];
        cholesky_solve(&l, 3, &mut b);
        for i in 0..3 {
            let r: f64 = (0..3).map(|k| a[i * 3 + k] * b[k]).sum();
            assert!((r - [1.0, 2.0, 3.0][i]).abs() < 1e-12);
        }
        let m = nalgebra::DMatrix::from_row_slice(3, 3, &a)
            .try_inverse()
            .unwrap();
        let d = cholesky_inverse_diag(&l, 3);
        for i in 0..3 {
            assert!((d[i] - m[(i, i)]).abs() < 1e-12);
        }
    }

    #[test]
    fn collinearity_detected() {
        // columns (1,1,1), (1,2,3), (2,4,6)
        let x = [[1.0, 1.0, 2.0], [1.0, 2.0, 4.0], [1.0, 3.0, 6.0]];
        let mut g = [0.0; 9];
        for r in &x {
            for i in 0..3 {
                for j in 0..3 {
                    g[i * 3 + j] += r[i] * r[j];
                }
            }
        }
        assert!(min_residual_fraction(&g, 3) < 1e-12);
        let g2 = [g[0], g[1], g[3], g[4]];
        assert!(min_residual_fraction(&g2, 2) > 0.01);
    }
}
