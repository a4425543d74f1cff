use nalgebra::DVector;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{tol, Error, Result, C64};

/// Coordinate vector in a truncated Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct HVector(DVector<C64>);

impl HVector {
    pub fn zeros(dim: usize) -> Self {
        Self(DVector::zeros(dim))
    }

    pub fn unit(dim: usize, pos: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[pos] = C64::new(1.0, 0.0);
        Self(v)
    }

    pub fn from_coords(coords: Vec<C64>) -> Self {
        Self(DVector::from_vec(coords))
    }

    pub fn from_real(coords: &[f64]) -> Self {
        Self(DVector::from_iterator(
            coords.len(),
            coords.iter().map(|r| C64::new(*r, 0.0)),
        ))
    }

    pub fn from_dvector(v: DVector<C64>) -> Self {
        Self(v)
    }

    pub fn coords(&self) -> &DVector<C64> {
        &self.0
    }

    pub fn into_dvector(self) -> DVector<C64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// `<self, other>`, linear in the first argument.
    pub fn inner(&self, other: &HVector) -> C64 {
        other.0.dotc(&self.0)
    }

    pub fn sub(&self, other: &HVector) -> HVector {
        HVector(&self.0 - &other.0)
    }

    pub fn add(&self, other: &HVector) -> HVector {
        HVector(&self.0 + &other.0)
    }

    pub fn scale(&self, s: C64) -> HVector {
        HVector(&self.0 * s)
    }

    pub fn in_unit_ball(&self) -> bool {
        self.norm() <= 1.0 + tol::NORM
    }

    pub fn require_unit_ball(&self, what: &str) -> Result<()> {
        if self.in_unit_ball() {
            Ok(())
        } else {
            Err(Error::OutsideUnitBall {
                what: what.to_string(),
                norm: self.norm(),
            })
        }
    }

    /// Resize to `dim`, zero-padding or cropping. Cropping fails if a
    /// dropped coordinate is nonzero.
    pub fn resized(&self, dim: usize) -> Result<HVector> {
        if dim >= self.dim() {
            let mut v = DVector::zeros(dim);
            v.rows_mut(0, self.dim()).copy_from(&self.0);
            return Ok(HVector(v));
        }
        if self.0.rows(dim, self.dim() - dim).iter().any(|z| z.norm() > 0.0) {
            return Err(Error::invalid(format!(
                "vector has support outside the first {dim} positions"
            )));
        }
        Ok(HVector(self.0.rows(0, dim).into_owned()))
    }
}

impl Serialize for HVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.0.iter().map(|z| [z.re, z.im]).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for HVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(HVector::from_coords(
            pairs.into_iter().map(|[re, im]| C64::new(re, im)).collect(),
        ))
    }
}
