use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::{BOperator, FamilyDescriptor, Member, OperatorFamily};
use crate::space::{BasisIndexing, HVector};
use crate::{Error, Result, C64};

fn index_shift(indexing: &BasisIndexing, step: i64) -> BOperator {
    let n = indexing.dim();
    let mut m = DMatrix::zeros(n, n);
    for p in 0..n {
        let k = indexing.index_at(p);
        if let Some(q) = indexing.position(k + step) {
            m[(q, p)] = C64::new(1.0, 0.0);
        }
    }
    BOperator::from_matrix_unchecked(m)
}

/// `S e_k = e_{k-1}`; basis vectors whose image leaves the truncation map to 0.
/// On natural indexing this is the truncated backward shift `S_r*`.
pub fn left_shift(indexing: &BasisIndexing) -> BOperator {
    index_shift(indexing, -1)
}

/// `S_r e_k = e_{k+1}`; the top retained basis vector maps to 0.
pub fn right_shift(indexing: &BasisIndexing) -> BOperator {
    index_shift(indexing, 1)
}

/// `{base^n : n in exponents}`, labelled `"{stem}^n"`.
pub fn power_family(
    base: &BOperator,
    indexing: BasisIndexing,
    exponents: &[u32],
    stem: &str,
) -> Result<OperatorFamily> {
    if base.dim() != indexing.dim() {
        return Err(Error::DimensionMismatch {
            expected: indexing.dim(),
            found: base.dim(),
        });
    }
    base.require_contraction("power family base")?;
    let members = exponents
        .iter()
        .map(|n| Member::new(format!("{stem}^{n}"), base.pow(*n)))
        .collect();
    OperatorFamily::new(indexing, members, FamilyDescriptor::Custom)
}

/// `sin(pi x) / (pi x)`, exactly 0 at nonzero integers and 1 at 0.
fn sinc_pi(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else if x.fract() == 0.0 {
        0.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Compression of multiplication by `e^{itx}` on `L^2[-pi, pi]` to the
/// Fourier modes `e_n ~ e^{inx}` retained by an integer indexing of
/// dimension `n_modes`: `<u_t e_n, e_m> = sinc(pi (t + n - m))`.
pub fn mult_group_element(t: f64, n_modes: usize) -> BOperator {
    let ix = BasisIndexing::integer(n_modes);
    let m = DMatrix::from_fn(n_modes, n_modes, |row, col| {
        let (mi, ni) = (ix.index_at(row), ix.index_at(col));
        C64::new(sinc_pi(t + (ni - mi) as f64), 0.0)
    });
    BOperator::from_matrix_unchecked(m)
}

/// `(x (x) y) h = <h, y> x`, i.e. the matrix `x y^H`.
pub fn rank_one(x: &HVector, y: &HVector) -> Result<BOperator> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: y.dim(),
        });
    }
    x.require_unit_ball("rank-one left factor")?;
    y.require_unit_ball("rank-one right factor")?;
    Ok(BOperator::from_matrix_unchecked(
        x.coords() * y.coords().adjoint(),
    ))
}

pub fn adjoint(t: &BOperator) -> BOperator {
    t.adjoint()
}
