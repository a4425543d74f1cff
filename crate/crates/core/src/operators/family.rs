use serde::{Deserialize, Serialize};

use super::{left_shift, mult_group_element, right_shift, BOperator};
use crate::space::{BasisIndexing, IndexKind};
use crate::{Error, Result};

/// A member count, either fixed or tied to the truncation dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Extent {
    Count(usize),
    Rule(ExtentRule),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtentRule {
    HalfDim,
}

impl Extent {
    pub fn resolve(&self, dim: usize) -> usize {
        match self {
            Extent::Count(n) => *n,
            Extent::Rule(ExtentRule::HalfDim) => dim / 2,
        }
    }
}

impl From<usize> for Extent {
    fn from(n: usize) -> Self {
        Extent::Count(n)
    }
}

/// Generator tag for the standard families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyDescriptor {
    /// `{S^k : k = 1..=k_max}`, `S e_k = e_{k-1}`.
    LeftShiftPowers { k_max: Extent },
    /// `{S_r^n : n = 1..=n_max}`.
    RightShiftPowers { n_max: Extent },
    /// `{(S_r*)^n : n = 1..=n_max}`.
    AdjointRightShiftPowers { n_max: Extent },
    /// `{u_t : t in t_list}` on the Fourier-mode truncation.
    MultGroup { t_list: Vec<f64> },
    /// Unitaries `u_t` implementing the automorphisms `alpha_t`.
    ConjugationGroup { t_list: Vec<f64> },
    Custom,
}

impl FamilyDescriptor {
    pub fn build(&self, indexing: BasisIndexing) -> Result<OperatorFamily> {
        let dim = indexing.dim();
        let powers = |base: BOperator, count: usize, stem: &str| -> Result<Vec<Member>> {
            if count == 0 {
                return Err(Error::invalid(format!("{stem} family needs at least one power")));
            }
            let mut out = Vec::with_capacity(count);
            let mut acc = base.clone();
            for n in 1..=count {
                if n > 1 {
                    acc = acc.compose(&base)?;
                }
                out.push(Member::new(format!("{stem}^{n}"), acc.clone()));
            }
            Ok(out)
        };
        let members = match self {
            FamilyDescriptor::LeftShiftPowers { k_max } => {
                powers(left_shift(&indexing), k_max.resolve(dim), "S")?
            }
            FamilyDescriptor::RightShiftPowers { n_max } => {
                powers(right_shift(&indexing), n_max.resolve(dim), "S_r")?
            }
            FamilyDescriptor::AdjointRightShiftPowers { n_max } => {
                powers(right_shift(&indexing).adjoint(), n_max.resolve(dim), "(S_r*)")?
            }
            FamilyDescriptor::MultGroup { t_list } | FamilyDescriptor::ConjugationGroup { t_list } => {
                if indexing.kind() != IndexKind::Integer {
                    return Err(Error::invalid(
                        "multiplication group lives on the integer-indexed Fourier basis",
                    ));
                }
                if t_list.is_empty() {
                    return Err(Error::EmptyFamily);
                }
                t_list
                    .iter()
                    .map(|t| Member::new(format!("u_{t}"), mult_group_element(*t, dim)))
                    .collect()
            }
            FamilyDescriptor::Custom => {
                return Err(Error::invalid("custom families carry explicit members"))
            }
        };
        OperatorFamily::new(indexing, members, self.clone())
    }

    /// Whether the untruncated members are unitary, so truncation leakage is
    /// the only source of a unitarity defect.
    pub fn unitary_up_to_truncation(&self, kind: IndexKind) -> bool {
        match self {
            FamilyDescriptor::MultGroup { .. } | FamilyDescriptor::ConjugationGroup { .. } => true,
            FamilyDescriptor::LeftShiftPowers { .. } | FamilyDescriptor::RightShiftPowers { .. } => {
                kind == IndexKind::Integer
            }
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Member {
    pub label: String,
    pub op: BOperator,
}

impl Member {
    pub fn new(label: impl Into<String>, op: BOperator) -> Self {
        Self {
            label: label.into(),
            op,
        }
    }
}

/// Index range `lo..=hi` on which truncated members act as their
/// untruncated counterparts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SafeWindow {
    pub lo: i64,
    pub hi: i64,
}

impl SafeWindow {
    pub fn contains(&self, k: i64) -> bool {
        self.lo <= k && k <= self.hi
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OperatorFamily {
    indexing: BasisIndexing,
    members: Vec<Member>,
    descriptor: FamilyDescriptor,
}

impl OperatorFamily {
    /// Checks that the family is nonempty, dimensions agree and every
    /// member lies in the operator unit ball.
    pub fn new(
        indexing: BasisIndexing,
        members: Vec<Member>,
        descriptor: FamilyDescriptor,
    ) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::EmptyFamily);
        }
        for m in &members {
            if m.op.dim() != indexing.dim() {
                return Err(Error::DimensionMismatch {
                    expected: indexing.dim(),
                    found: m.op.dim(),
                });
            }
            m.op.require_contraction(&m.label)?;
        }
        Ok(Self {
            indexing,
            members,
            descriptor,
        })
    }

    pub fn custom(indexing: BasisIndexing, members: Vec<Member>) -> Result<Self> {
        Self::new(indexing, members, FamilyDescriptor::Custom)
    }

    pub fn singleton(indexing: BasisIndexing, label: &str, op: BOperator) -> Result<Self> {
        Self::custom(indexing, vec![Member::new(label, op)])
    }

    pub fn indexing(&self) -> &BasisIndexing {
        &self.indexing
    }

    pub fn dim(&self) -> usize {
        self.indexing.dim()
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn descriptor(&self) -> &FamilyDescriptor {
        &self.descriptor
    }

    pub fn labels(&self) -> Vec<&str> {
        self.members.iter().map(|m| m.label.as_str()).collect()
    }

    pub fn member(&self, label: &str) -> Option<&Member> {
        self.members.iter().find(|m| m.label == label)
    }

    pub fn unitary_up_to_truncation(&self) -> bool {
        self.descriptor.unitary_up_to_truncation(self.indexing.kind())
    }

    /// The same family on a truncation of dimension `dim`. Generated families
    /// are rebuilt; custom members are zero-padded or cropped.
    pub fn at_dim(&self, dim: usize) -> Result<OperatorFamily> {
        if dim == self.dim() {
            return Ok(self.clone());
        }
        let indexing = self.indexing.with_dim(dim);
        match self.descriptor {
            FamilyDescriptor::Custom => Ok(Self {
                indexing,
                members: self
                    .members
                    .iter()
                    .map(|m| Member::new(m.label.clone(), m.op.resized(dim)))
                    .collect(),
                descriptor: FamilyDescriptor::Custom,
            }),
            _ => self.descriptor.build(indexing),
        }
    }

    /// Largest `j - i` over nonzero entries `t_ij` of any member, or `None`
    /// if every member is zero.
    pub fn max_superdiagonal(&self, zero_tol: f64) -> Option<i64> {
        let n = self.dim();
        let mut best: Option<i64> = None;
        for m in &self.members {
            for j in 0..n {
                for i in 0..n {
                    if m.op.entry(i, j).norm() > zero_tol {
                        let k = j as i64 - i as i64;
                        best = Some(best.map_or(k, |b| b.max(k)));
                    }
                }
            }
        }
        best
    }

    pub fn safe_window(&self) -> Option<SafeWindow> {
        let dim = self.dim();
        let (lo, hi) = self.indexing.index_range();
        let window = match &self.descriptor {
            FamilyDescriptor::LeftShiftPowers { k_max } => {
                SafeWindow { lo: lo + k_max.resolve(dim) as i64, hi }
            }
            FamilyDescriptor::RightShiftPowers { n_max } => {
                SafeWindow { lo, hi: hi - n_max.resolve(dim) as i64 }
            }
            FamilyDescriptor::AdjointRightShiftPowers { n_max } => match self.indexing.kind() {
                IndexKind::Natural => SafeWindow { lo, hi },
                IndexKind::Integer => SafeWindow { lo: lo + n_max.resolve(dim) as i64, hi },
            },
            FamilyDescriptor::MultGroup { t_list } | FamilyDescriptor::ConjugationGroup { t_list } => {
                if t_list.iter().all(|t| t.fract() == 0.0) {
                    let k = t_list.iter().fold(0.0f64, |a, t| a.max(t.abs())) as i64;
                    SafeWindow { lo: lo + k, hi: hi - k }
                } else {
                    SafeWindow { lo: lo / 2, hi: hi / 2 }
                }
            }
            FamilyDescriptor::Custom => return None,
        };
        (window.lo <= window.hi).then_some(window)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descriptor_serde_shape() {
        let d: FamilyDescriptor =
            serde_json::from_str(r#"{"kind":"right_shift_powers","n_max":10}"#).unwrap();
        assert_eq!(d, FamilyDescriptor::RightShiftPowers { n_max: Extent::Count(10) });
        let h: FamilyDescriptor =
            serde_json::from_str(r#"{"kind":"adjoint_right_shift_powers","n_max":"half_dim"}"#)
                .unwrap();
        assert_eq!(
            h,
            FamilyDescriptor::AdjointRightShiftPowers { n_max: Extent::Rule(ExtentRule::HalfDim) }
        );
    }

    #[test]
    fn shift_families_and_windows() {
        let ix = BasisIndexing::natural(16);
        let f = FamilyDescriptor::RightShiftPowers { n_max: 3.into() }.build(ix).unwrap();
        assert_eq!(f.labels(), vec!["S_r^1", "S_r^2", "S_r^3"]);
        assert_eq!(f.max_superdiagonal(1e-12), Some(-1));
        assert_eq!(f.safe_window(), Some(SafeWindow { lo: 1, hi: 13 }));

        let z = FamilyDescriptor::LeftShiftPowers { k_max: 40.into() }
            .build(BasisIndexing::integer(128))
            .unwrap();
        assert_eq!(z.safe_window(), Some(SafeWindow { lo: -23, hi: 64 }));
        assert!(z.unitary_up_to_truncation());
    }

    #[test]
    fn half_dim_extent_scales() {
        let d = FamilyDescriptor::AdjointRightShiftPowers { n_max: Extent::Rule(ExtentRule::HalfDim) };
        let f = d.build(BasisIndexing::natural(16)).unwrap();
        assert_eq!(f.len(), 8);
        assert_eq!(f.at_dim(32).unwrap().len(), 16);
    }

    #[test]
    fn mult_group_requires_integer_indexing() {
        let d = FamilyDescriptor::MultGroup { t_list: vec![0.0] };
        assert!(d.build(BasisIndexing::natural(8)).is_err());
        let f = d.build(BasisIndexing::integer(8)).unwrap();
        assert_eq!(f.labels(), vec!["u_0"]);
    }
}
