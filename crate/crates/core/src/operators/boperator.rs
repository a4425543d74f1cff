use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg;
use crate::space::HVector;
use crate::{tol, Error, Result, C64};

/// Square complex matrix with entries `t_ij = <T e_j, e_i>` in storage order.
#[derive(Clone, Debug, PartialEq)]
pub struct BOperator {
    matrix: DMatrix<C64>,
}

impl BOperator {
    /// Checked constructor: square and `sigma_max <= 1 + tol`.
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let op = Self { matrix };
        op.require_contraction("operator")?;
        Ok(op)
    }

    /// Wraps a matrix known to be a contraction (products, compressions).
    pub(crate) fn from_matrix_unchecked(matrix: DMatrix<C64>) -> Self {
        debug_assert_eq!(matrix.nrows(), matrix.ncols());
        Self { matrix }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_matrix_unchecked(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_matrix_unchecked(DMatrix::zeros(dim, dim))
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Entry `t_ij`, 0-based storage positions.
    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.matrix[(i, j)]
    }

    pub fn singular_values(&self) -> Vec<f64> {
        linalg::singular_values(&self.matrix)
    }

    pub fn sigma_max(&self) -> f64 {
        linalg::sigma_max(&self.matrix)
    }

    pub fn sigma_min(&self) -> f64 {
        self.singular_values().last().copied().unwrap_or(0.0)
    }

    pub fn in_unit_ball(&self) -> bool {
        self.sigma_max() <= 1.0 + tol::NORM
    }

    pub fn require_contraction(&self, what: &str) -> Result<()> {
        let s = self.sigma_max();
        if s <= 1.0 + tol::NORM {
            Ok(())
        } else {
            Err(Error::OutsideUnitBall {
                what: what.to_string(),
                norm: s,
            })
        }
    }

    pub fn apply(&self, x: &HVector) -> Result<HVector> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.dim(),
            });
        }
        Ok(HVector::from_dvector(&self.matrix * x.coords()))
    }

    pub fn compose(&self, other: &BOperator) -> Result<BOperator> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(Self::from_matrix_unchecked(&self.matrix * &other.matrix))
    }

    pub fn adjoint(&self) -> BOperator {
        Self::from_matrix_unchecked(self.matrix.adjoint())
    }

    pub fn pow(&self, n: u32) -> BOperator {
        let mut acc = DMatrix::identity(self.dim(), self.dim());
        let mut base = self.matrix.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Self::from_matrix_unchecked(acc)
    }

    /// Zero-pad (the operator acts as 0 on the new coordinates) or crop to
    /// the leading `dim x dim` block.
    pub fn resized(&self, dim: usize) -> BOperator {
        let keep = dim.min(self.dim());
        let mut m = DMatrix::zeros(dim, dim);
        m.view_mut((0, 0), (keep, keep))
            .copy_from(&self.matrix.view((0, 0), (keep, keep)));
        Self::from_matrix_unchecked(m)
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        let n = self.dim();
        (0..n).all(|i| {
            (0..n).all(|j| {
                let target = if i == j { 1.0 } else { 0.0 };
                (self.matrix[(i, j)] - C64::new(target, 0.0)).norm() <= tol
            })
        })
    }
}

impl Serialize for BOperator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.dim())
            .map(|i| {
                (0..self.dim())
                    .map(|j| {
                        let z = self.matrix[(i, j)];
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for BOperator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(serde::de::Error::custom("operator matrix must be square"));
        }
        let m = DMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j][0], rows[i][j][1]));
        BOperator::new(m).map_err(serde::de::Error::custom)
    }
}
