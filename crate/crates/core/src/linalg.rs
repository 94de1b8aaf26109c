//! Small dense complex determinants.

use num_complex::Complex64;

/// Determinant from an LU factorization with partial pivoting, plus the data
/// needed for a backward-error estimate.
#[derive(Clone, Copy, Debug)]
pub struct LuDeterminant {
    pub det: Complex64,
    /// `sum_ij (|L| |U|)_ij`; the computed factors satisfy `LU = A + E` with
    /// `|E| <= gamma_n |L||U|` entrywise.
    pub abs_lu_sum: f64,
}

/// Row-major `n x n` determinant. Consumes the scratch buffer.
pub fn lu_determinant(a: &mut [Complex64], n: usize) -> LuDeterminant {
    assert_eq!(a.len(), n * n, "matrix buffer has wrong length");
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let pivot_row =
            (col..n).max_by(|&i, &j| a[i * n + col].norm().total_cmp(&a[j * n + col].norm())).unwrap_or(col);
        if pivot_row != col {
            for k in 0..n {
                a.swap(col * n + k, pivot_row * n + k);
            }
            det = -det;
        }
        let pivot = a[col * n + col];
        det *= pivot;
        if pivot == Complex64::new(0.0, 0.0) {
            // Singular; finish with zero but keep |L||U| meaningful.
            continue;
        }
        for row in col + 1..n {
            let factor = a[row * n + col] / pivot;
            a[row * n + col] = factor;
            for k in col + 1..n {
                let u = a[col * n + k];
                a[row * n + k] -= factor * u;
            }
        }
    }
    let mut abs_lu_sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            // (|L||U|)_ij = sum_{k <= min(i,j)} |L_ik| |U_kj| with unit diagonal L.
            let mut s = 0.0;
            for k in 0..=i.min(j) {
                let l = if k == i { 1.0 } else { a[i * n + k].norm() };
                s += l * a[k * n + j].norm();
            }
            abs_lu_sum += s;
        }
    }
    LuDeterminant { det, abs_lu_sum }
}

pub fn determinant(a: &[Complex64], n: usize) -> Complex64 {
    let mut scratch = a.to_vec();
    lu_determinant(&mut scratch, n).det
}

/// Upper bound on every cofactor of `a` (Hadamard: product of column norms,
/// each clamped below at one so dropping a column can only lower it).
pub fn cofactor_bound(a: &[Complex64], n: usize) -> f64 {
    (0..n)
        .map(|j| {
            let norm = (0..n).map(|i| a[i * n + j].norm_sqr()).sum::<f64>().sqrt();
            norm.max(1.0)
        })
        .product()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn small_determinants() {
        assert_eq!(determinant(&[], 0), c(1.0));
        let a = [c(2.0), c(1.0), c(1.0), c(3.0)];
        assert!((determinant(&a, 2) - c(5.0)).norm() < 1e-15);
        // needs a row swap
        let b = [c(0.0), c(1.0), c(1.0), c(0.0)];
        assert!((determinant(&b, 2) - c(-1.0)).norm() < 1e-15);
        let s = [c(1.0), c(2.0), c(2.0), c(4.0)];
        assert!(determinant(&s, 2).norm() < 1e-15);
    }

    #[test]
    fn complex_entries() {
        let i = Complex64::new(0.0, 1.0);
        let a = [i, c(1.0), c(1.0), i];
        // i*i - 1 = -2
        assert!((determinant(&a, 2) - c(-2.0)).norm() < 1e-15);
    }

    #[test]
    fn hadamard_dominates_cofactors() {
        let a = [c(3.0), c(0.5), c(0.2), c(-1.0), c(2.0), c(0.1), c(0.3), c(0.4), c(5.0)];
        let bound = cofactor_bound(&a, 3);
        for r in 0..3 {
            for s in 0..3 {
                let minor: Vec<Complex64> = (0..3)
                    .filter(|&i| i != r)
                    .flat_map(|i| (0..3).filter(move |&j| j != s).map(move |j| a[i * 3 + j]))
                    .collect();
                assert!(determinant(&minor, 2).norm() <= bound);
            }
        }
    }
}
