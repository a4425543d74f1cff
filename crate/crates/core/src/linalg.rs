//! Small dense linear-algebra helpers over complex doubles.

use nalgebra::{DMatrix, DVector};

use crate::C64;

/// Singular values, sorted in descending order.
pub fn singular_values(m: &DMatrix<C64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn sigma_max(m: &DMatrix<C64>) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Right singular vectors whose singular value is at least `threshold`,
/// returned with their singular values in descending order.
pub fn right_singular_vectors_above(
    m: &DMatrix<C64>,
    threshold: f64,
) -> Vec<(f64, DVector<C64>)> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut out: Vec<(f64, DVector<C64>)> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s >= threshold)
        .map(|(k, s)| {
            // row k of V^H is v_k^H
            let v = DVector::from_iterator(m.ncols(), v_t.row(k).iter().map(|z| z.conj()));
            (*s, v)
        })
        .collect();
    out.sort_by(|a, b| b.0.total_cmp(&a.0));
    out
}

/// Numerical rank of the column span, by SVD with absolute threshold `tol`
/// scaled by the largest column norm.
pub fn svd_rank(columns: &[DVector<C64>], tol: f64) -> usize {
    if columns.is_empty() {
        return 0;
    }
    let scale = columns.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
    let m = DMatrix::from_columns(columns);
    singular_values(&m).iter().filter(|s| **s > tol * scale).count()
}

/// Modified Gram-Schmidt with re-orthogonalization. Columns whose residual
/// falls below `tol` times the largest input norm are dropped.
pub fn gram_schmidt(columns: &[DVector<C64>], tol: f64) -> Vec<DVector<C64>> {
    let scale = columns.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Vec::new();
    }
    let mut basis: Vec<DVector<C64>> = Vec::new();
    for col in columns {
        let mut r = col.clone();
        for _ in 0..2 {
            for q in &basis {
                let proj = q.dotc(&r);
                r.axpy(-proj, q, C64::new(1.0, 0.0));
            }
        }
        let n = r.norm();
        if n > tol * scale {
            basis.push(r / C64::new(n, 0.0));
        }
        if basis.len() == col.len() {
            break;
        }
    }
    basis
}

/// Largest deviation from orthonormality, `max |<q_i, q_j> - delta_ij|`.
pub fn orthonormality_defect(columns: &[DVector<C64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in columns.iter().enumerate() {
        for (j, b) in columns.iter().enumerate() {
            let g = b.dotc(a);
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Unitarity defect `max_i |sigma_i - 1|`, plus the polar factor `W V^H`.
pub fn polar_factor(m: &DMatrix<C64>) -> (f64, DMatrix<C64>) {
    let svd = m.clone().svd(true, true);
    let defect = svd
        .singular_values
        .iter()
        .map(|s| (s - 1.0).abs())
        .fold(0.0, f64::max);
    let u = svd.u.expect("requested left singular vectors");
    let v_t = svd.v_t.expect("requested right singular vectors");
    (defect, u * v_t)
}

/// `max |a_ij|`.
pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Spectral norm of `M^H M - I`, the deviation from being an isometry.
pub fn isometry_defect(m: &DMatrix<C64>) -> f64 {
    let n = m.ncols();
    let g = m.adjoint() * m - DMatrix::<C64>::identity(n, n);
    sigma_max(&g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn gram_schmidt_drops_dependent_columns() {
        let a = DVector::from_vec(vec![c(1.0), c(0.0), c(0.0)]);
        let b = DVector::from_vec(vec![c(2.0), c(0.0), c(0.0)]);
        let e = DVector::from_vec(vec![c(1.0), c(1.0), c(0.0)]);
        let q = gram_schmidt(&[a, b, e], 1e-9);
        assert_eq!(q.len(), 2);
        assert!(orthonormality_defect(&q) < 1e-14);
    }

    #[test]
    fn polar_factor_of_scaled_unitary() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![c(0.5), c(0.25)]));
        let (defect, p) = polar_factor(&m);
        assert!((defect - 0.75).abs() < 1e-14);
        assert!(isometry_defect(&p) < 1e-14);
    }

    #[test]
    fn right_vectors_of_selector_row() {
        // single row e_3^H: right singular vector is e_3
        let mut m = DMatrix::<C64>::zeros(1, 4);
        m[(0, 2)] = c(1.0);
        let v = right_singular_vectors_above(&m, 0.5);
        assert_eq!(v.len(), 1);
        assert!((v[0].1[2].norm() - 1.0).abs() < 1e-14);
    }
}
