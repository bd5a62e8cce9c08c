//! Minimal 3x3 matrix helpers for the detector-conditioned entropy.
//!
//! Covariance matrices in this crate split into decoupled position and
//! momentum sectors, so the three-mode symplectic spectrum reduces to the
//! eigenvalues of a product of two symmetric 3x3 matrices. A Jacobi sweep
//! is plenty at this size.

pub(crate) type Mat3 = [[f64; 3]; 3];

pub(crate) fn matmul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
pub(crate) fn cholesky(a: &Mat3) -> Option<Mat3> {
    let mut l = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                if d <= 0.0 {
                    return None;
                }
                l[i][j] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    Some(l)
}

/// Eigenvalues of a symmetric 3x3 matrix by cyclic Jacobi rotations.
pub(crate) fn symmetric_eigenvalues(m: &Mat3) -> [f64; 3] {
    let mut a = *m;
    for _ in 0..64 {
        let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        if off < 1e-30 {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            if a[p][q].abs() < 1e-300 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            for k in 0..3 {
                let akp = a[k][p];
                let akq = a[k][q];
                a[k][p] = c * akp - s * akq;
                a[k][q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let apk = a[p][k];
                let aqk = a[q][k];
                a[p][k] = c * apk - s * aqk;
                a[q][k] = s * apk + c * aqk;
            }
        }
    }
    let mut ev = [a[0][0], a[1][1], a[2][2]];
    ev.sort_by(|x, y| y.partial_cmp(x).unwrap());
    ev
}

/// Eigenvalues of X*P where X is symmetric positive definite and P symmetric.
/// Uses the similarity X*P ~ L^T P L with X = L L^T, which is symmetric.
pub(crate) fn spd_product_eigenvalues(x: &Mat3, p: &Mat3) -> Option<[f64; 3]> {
    let l = cholesky(x)?;
    let mut lt = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            lt[i][j] = l[j][i];
        }
    }
    let s = matmul(&matmul(&lt, p), &l);
    Some(symmetric_eigenvalues(&s))
}
