//! Small dense kernels: cyclic Jacobi eigensolver, Cholesky, Householder
//! least squares. Matrices are row-major slices.

use alloc::vec::Vec;

use crate::sqrt;

/// Eigen-decomposition of a symmetric `n x n` matrix. Returns ascending
/// eigenvalues and the matching eigenvectors as columns of a row-major
/// matrix.
pub fn symmetric_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut a = a.to_vec();
    let mut v = alloc::vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                // negligible against both diagonal entries
                if apq.abs() <= f64::EPSILON * 1e-2 * sqrt((a[p * n + p] * a[q * n + q]).abs()) || apq == 0.0 {
                    continue;
                }
                rotated = true;
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]).then(i.cmp(&j)));
    let vals = idx.iter().map(|&i| a[i * n + i]).collect();
    let mut vecs = alloc::vec![0.0; n * n];
    for (new, &old) in idx.iter().enumerate() {
        for k in 0..n {
            vecs[k * n + new] = v[k * n + old];
        }
    }
    (vals, vecs)
}

/// Lower Cholesky factor of an SPD matrix, `None` if not positive definite.
pub fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = alloc::vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if !(d > 0.0) {
            return None;
        }
        let d = sqrt(d);
        l[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / d;
        }
    }
    Some(l)
}

/// Generalized symmetric-definite problem `A x = lambda M x`. Eigenvectors
/// are M-orthonormal columns.
pub fn generalized_eigen(a: &[f64], m: &[f64], n: usize) -> Option<(Vec<f64>, Vec<f64>)> {
    let l = cholesky(m, n)?;
    // C = L^-1 A L^-T
    let mut y = a.to_vec();
    // y = L^-1 A (column by column forward substitution)
    for c in 0..n {
        for i in 0..n {
            let mut s = y[i * n + c];
            for k in 0..i {
                s -= l[i * n + k] * y[k * n + c];
            }
            y[i * n + c] = s / l[i * n + i];
        }
    }
    // C = y L^-T, i.e. solve rows: C L^T = y
    let mut c = y.clone();
    for r in 0..n {
        for j in 0..n {
            let mut s = y[r * n + j];
            for k in 0..j {
                s -= c[r * n + k] * l[j * n + k];
            }
            c[r * n + j] = s / l[j * n + j];
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let s = 0.5 * (c[i * n + j] + c[j * n + i]);
            c[i * n + j] = s;
            c[j * n + i] = s;
        }
    }
    let (vals, w) = symmetric_eigen(&c, n);
    // x = L^-T w
    let mut x = w;
    for col in 0..n {
        for i in (0..n).rev() {
            let mut s = x[i * n + col];
            for k in i + 1..n {
                s -= l[k * n + i] * x[k * n + col];
            }
            x[i * n + col] = s / l[i * n + i];
        }
    }
    Some((vals, x))
}

/// Least-squares solution of the `m x n` system `A x = b` by Householder
/// QR. `None` if the smallest |R_ii| falls below `rtol` times the largest.
pub fn least_squares(a: &[f64], m: usize, n: usize, b: &[f64], rtol: f64) -> Option<Vec<f64>> {
    if m < n {
        return None;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    for k in 0..n {
        let mut norm = 0.0;
        for i in k..m {
            norm += a[i * n + k] * a[i * n + k];
        }
        let norm = sqrt(norm);
        if norm == 0.0 {
            continue;
        }
        let alpha = if a[k * n + k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..m).map(|i| a[i * n + k]).collect();
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|x| x * x).sum();
        if vv == 0.0 {
            continue;
        }
        for j in k..n {
            let s: f64 = (k..m).map(|i| v[i - k] * a[i * n + j]).sum::<f64>() * 2.0 / vv;
            for i in k..m {
                a[i * n + j] -= s * v[i - k];
            }
        }
        let s: f64 = (k..m).map(|i| v[i - k] * b[i]).sum::<f64>() * 2.0 / vv;
        for i in k..m {
            b[i] -= s * v[i - k];
        }
    }
    let rmax = (0..n).map(|i| a[i * n + i].abs()).fold(0.0, f64::max);
    let rmin = (0..n).map(|i| a[i * n + i].abs()).fold(f64::INFINITY, f64::min);
    if !(rmin > rtol * rmax) {
        return None;
    }
    let mut x = alloc::vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in i + 1..n {
            s -= a[i * n + j] * x[j];
        }
        x[i] = s / a[i * n + i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_diagonalizes() {
        let a = [4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 1.0];
        let (vals, v) = symmetric_eigen(&a, 3);
        for c in 0..3 {
            for r in 0..3 {
                let av: f64 = (0..3).map(|k| a[r * 3 + k] * v[k * 3 + c]).sum();
                assert!((av - vals[c] * v[r * 3 + c]).abs() < 1e-13);
            }
        }
        assert!(vals[0] < vals[1] && vals[1] < vals[2]);
    }

    #[test]
    fn generalized_two_by_two() {
        // A = diag(2, 6), M = diag(1, 2) -> eigenvalues 2 and 3
        let (vals, x) = generalized_eigen(&[2.0, 0.0, 0.0, 6.0], &[1.0, 0.0, 0.0, 2.0], 2).unwrap();
        assert!((vals[0] - 2.0).abs() < 1e-14 && (vals[1] - 3.0).abs() < 1e-14);
        // M-normalized
        assert!((2.0 * x[3] * x[3] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn least_squares_exact_fit_and_rank_check() {
        // fit y = 1 + 2t through 3 points
        let a = [1.0, 0.0, 1.0, 1.0, 1.0, 2.0];
        let x = least_squares(&a, 3, 2, &[1.0, 3.0, 5.0], 1e-12).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 2.0).abs() < 1e-14);
        let dup = [1.0, 1.0, 1.0, 1.0, 1.0, 1.0];
        assert!(least_squares(&dup, 3, 2, &[1.0, 2.0, 3.0], 1e-10).is_none());
    }
}
