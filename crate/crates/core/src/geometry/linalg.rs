//! Per-node dense algebra on `n × n` symmetric matrices, `n ≤ 3`.

use nalgebra::{DMatrix, SymmetricEigen};

pub type Mat3 = [[f64; 3]; 3];

pub fn det(m: &Mat3, n: usize) -> f64 {
    match n {
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        _ => {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
    }
}

/// Inverse by cofactors; the caller guarantees `det ≠ 0`.
pub fn inverse(m: &Mat3, n: usize) -> Mat3 {
    let d = det(m, n);
    let mut out = [[0.0; 3]; 3];
    match n {
        1 => out[0][0] = 1.0 / d,
        2 => {
            out[0][0] = m[1][1] / d;
            out[1][1] = m[0][0] / d;
            out[0][1] = -m[0][1] / d;
            out[1][0] = -m[1][0] / d;
        }
        _ => {
            for i in 0..3 {
                for j in 0..3 {
                    let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
                    let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
                    out[i][j] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / d;
                }
            }
        }
    }
    out
}

pub fn mul(a: &Mat3, b: &Mat3, n: usize) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..n {
        for j in 0..n {
            out[i][j] = (0..n).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn to_dmatrix(m: &Mat3, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| m[i][j])
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn sym_eigenvalues(m: &Mat3, n: usize) -> Vec<f64> {
    match n {
        1 => vec![m[0][0]],
        2 => {
            let mean = 0.5 * (m[0][0] + m[1][1]);
            let half = 0.5 * (m[0][0] - m[1][1]);
            let r = half.hypot(m[0][1]);
            vec![mean - r, mean + r]
        }
        _ => {
            let mut ev: Vec<f64> =
                SymmetricEigen::new(to_dmatrix(m, n)).eigenvalues.iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            ev
        }
    }
}

/// Cholesky factor `L` with `g = L Lᵀ`; `None` if `g` is not positive-definite.
pub fn cholesky(g: &Mat3, n: usize) -> Option<Mat3> {
    let mut l = [[0.0; 3]; 3];
    for j in 0..n {
        let mut d = g[j][j];
        for k in 0..j {
            d -= l[j][k] * l[j][k];
        }
        if d <= 0.0 {
            return None;
        }
        l[j][j] = d.sqrt();
        for i in j + 1..n {
            let mut s = g[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            l[i][j] = s / l[j][j];
        }
    }
    Some(l)
}

/// Eigenvalues of `T v = λ g v`, ascending.
pub fn relative_eigenvalues(t: &Mat3, g: &Mat3, n: usize) -> Option<Vec<f64>> {
    let l = cholesky(g, n)?;
    let linv = inverse(&l, n);
    let mut linv_t = [[0.0; 3]; 3];
    for i in 0..n {
        for j in 0..n {
            linv_t[i][j] = linv[j][i];
        }
    }
    let mut w = mul(&mul(&linv, t, n), &linv_t, n);
    // restore exact symmetry lost to rounding
    for i in 0..n {
        for j in i + 1..n {
            let s = 0.5 * (w[i][j] + w[j][i]);
            w[i][j] = s;
            w[j][i] = s;
        }
    }
    Some(sym_eigenvalues(&w, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_3x3() {
        let m = [[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 2.0]];
        let inv = inverse(&m, 3);
        let id = mul(&m, &inv, 3);
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((id[i][j] - e).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn relative_eigenvalues_of_scaled_metric() {
        let g = [[2.0, 0.3, 0.0], [0.3, 1.0, 0.0], [0.0; 3]];
        let mut t = g;
        for row in t.iter_mut() {
            for v in row.iter_mut() {
                *v *= 1.5;
            }
        }
        let ev = relative_eigenvalues(&t, &g, 2).unwrap();
        assert!(ev.iter().all(|e| (e - 1.5).abs() < 1e-14));
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let g = [[1.0, 2.0, 0.0], [2.0, 1.0, 0.0], [0.0; 3]];
        assert!(cholesky(&g, 2).is_none());
    }
}
