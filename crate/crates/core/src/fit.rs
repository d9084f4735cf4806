//! Small dense least-squares fits (a handful of columns).

use num_complex::Complex64 as C64;

/// Solves `min ‖A c − y‖₂` for a tall `A` given column-by-column, using
/// modified Gram–Schmidt. Returns the coefficients and the max abs residual.
pub fn least_squares(columns: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, f64) {
    let p = columns.len();
    let m = y.len();
    assert!(p >= 1 && m >= p, "need at least as many rows as columns");
    let mut q: Vec<Vec<f64>> = columns.to_vec();
    let mut r = vec![vec![0.0; p]; p];
    for j in 0..p {
        for i in 0..j {
            let dot: f64 = (0..m).map(|k| q[i][k] * q[j][k]).sum();
            r[i][j] = dot;
            for k in 0..m {
                q[j][k] -= dot * q[i][k];
            }
        }
        let norm = q[j].iter().map(|v| v * v).sum::<f64>().sqrt();
        r[j][j] = norm;
        if norm > 0.0 {
            for v in q[j].iter_mut() {
                *v /= norm;
            }
        }
    }
    let qty: Vec<f64> = (0..p)
        .map(|j| (0..m).map(|k| q[j][k] * y[k]).sum())
        .collect();
    let mut c = vec![0.0; p];
    for j in (0..p).rev() {
        let s: f64 = (j + 1..p).map(|i| r[j][i] * c[i]).sum();
        c[j] = if r[j][j] != 0.0 { (qty[j] - s) / r[j][j] } else { 0.0 };
    }
    let resid = (0..m)
        .map(|k| {
            let fit: f64 = (0..p).map(|j| columns[j][k] * c[j]).sum();
            (fit - y[k]).abs()
        })
        .fold(0.0, f64::max);
    (c, resid)
}

/// Complex columns and complex coefficients, by modified Gram–Schmidt under
/// the Hermitian inner product. Returns the coefficients and the max modulus
/// of the residual.
pub fn least_squares_hermitian(columns: &[Vec<C64>], y: &[C64]) -> (Vec<C64>, f64) {
    let p = columns.len();
    let m = y.len();
    assert!(p >= 1 && m >= p, "need at least as many rows as columns");
    let zero = C64::new(0.0, 0.0);
    let mut q: Vec<Vec<C64>> = columns.to_vec();
    let mut r = vec![vec![zero; p]; p];
    for j in 0..p {
        for i in 0..j {
            let dot: C64 = (0..m).map(|k| q[i][k].conj() * q[j][k]).sum();
            r[i][j] = dot;
            for k in 0..m {
                let qi = q[i][k];
                q[j][k] -= dot * qi;
            }
        }
        let norm = q[j].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        r[j][j] = C64::new(norm, 0.0);
        if norm > 0.0 {
            for v in q[j].iter_mut() {
                *v /= norm;
            }
        }
    }
    let qty: Vec<C64> = (0..p)
        .map(|j| (0..m).map(|k| q[j][k].conj() * y[k]).sum())
        .collect();
    let mut c = vec![zero; p];
    for j in (0..p).rev() {
        let s: C64 = (j + 1..p).map(|i| r[j][i] * c[i]).sum();
        c[j] = if r[j][j].re != 0.0 { (qty[j] - s) / r[j][j] } else { zero };
    }
    let resid = (0..m)
        .map(|k| {
            let fit: C64 = (0..p).map(|j| columns[j][k] * c[j]).sum();
            (fit - y[k]).norm()
        })
        .fold(0.0, f64::max);
    (c, resid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_model() {
        let s: Vec<f64> = (0..8).map(|j| 10.0 * 1.3f64.powi(j)).collect();
        let cols = [vec![1.0; s.len()],
            s.iter().map(|v| 1.0 / v).collect(),
            s.iter().map(|v| 1.0 / (v * v)).collect()];
        let y: Vec<C64> = s
            .iter()
            .map(|v| C64::new(2.0 - 3.0 / v + 5.0 / (v * v), 0.5 / v))
            .collect();
        let cols: Vec<Vec<C64>> = cols
            .iter()
            .map(|c| c.iter().map(|v| C64::new(*v, 0.0)).collect())
            .collect();
        let (c, resid) = least_squares_hermitian(&cols, &y);
        assert!((c[0] - C64::new(2.0, 0.0)).norm() < 1e-10);
        assert!((c[1] - C64::new(-3.0, 0.5)).norm() < 1e-8);
        assert!((c[2] - C64::new(5.0, 0.0)).norm() < 1e-6);
        assert!(resid < 1e-12);
    }

    #[test]
    fn line_fit_residual() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.1, 4.9, 7.0];
        let (c, resid) = least_squares(&[vec![1.0; 4], x.to_vec()], &y);
        assert!((c[1] - 1.98).abs() < 1e-12);
        assert!(resid > 0.0 && resid < 0.2);
    }

    #[test]
    fn hermitian_fit_with_complex_columns() {
        let s: Vec<f64> = (0..6).map(|j| 5.0 * 1.4f64.powi(j)).collect();
        let i = C64::i();
        let cols = vec![
            vec![C64::new(1.0, 0.0); s.len()],
            s.iter().map(|v| i * v).collect::<Vec<_>>(),
        ];
        let (a, b) = (C64::new(1.0, -2.0), C64::new(0.25, 0.5));
        let y: Vec<C64> = s.iter().map(|v| a + b * i * v).collect();
        let (c, r) = least_squares_hermitian(&cols, &y);
        assert!((c[0] - a).norm() < 1e-12 && (c[1] - b).norm() < 1e-12 && r < 1e-12);
    }
}
