use serde::{Deserialize, Serialize};

use super::{BOperator, OperatorFamily};
use crate::linalg;
use crate::{tol, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuperMapKind {
    /// `psi_T(A) = T A`
    LeftMult,
    /// `phi_T(A) = A T`
    RightMult,
    /// `alpha_u(A) = u A u*`
    Conjugation,
    /// A composition `A -> L A R` of the above.
    Composite,
}

/// A map `A -> L A R` on the operator ball; `None` stands for the identity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuperMap {
    pub kind: SuperMapKind,
    pub label: String,
    left: Option<BOperator>,
    right: Option<BOperator>,
    /// `max |sigma_i - 1|` of the conjugation operand before correction.
    pub unitarity_defect: Option<f64>,
    pub polar_corrected: bool,
}

impl SuperMap {
    pub fn left_mult(label: impl Into<String>, t: BOperator) -> Self {
        Self {
            kind: SuperMapKind::LeftMult,
            label: label.into(),
            left: Some(t),
            right: None,
            unitarity_defect: None,
            polar_corrected: false,
        }
    }

    pub fn right_mult(label: impl Into<String>, t: BOperator) -> Self {
        Self {
            kind: SuperMapKind::RightMult,
            label: label.into(),
            left: None,
            right: Some(t),
            unitarity_defect: None,
            polar_corrected: false,
        }
    }

    /// Conjugation by `u`. If the unitarity defect exceeds
    /// [`tol::UNITARY_DEFECT`], `u` is replaced by its polar factor when
    /// `allow_truncation_leakage` is set and rejected otherwise.
    pub fn conjugation(
        label: impl Into<String>,
        u: &BOperator,
        allow_truncation_leakage: bool,
    ) -> Result<Self> {
        let label = label.into();
        let (defect, polar) = linalg::polar_factor(u.matrix());
        let (operand, corrected) = if defect <= tol::UNITARY_DEFECT {
            (u.clone(), false)
        } else if allow_truncation_leakage {
            (BOperator::from_matrix_unchecked(polar), true)
        } else {
            return Err(Error::NotUnitary { label, defect });
        };
        Ok(Self {
            kind: SuperMapKind::Conjugation,
            label,
            right: Some(operand.adjoint()),
            left: Some(operand),
            unitarity_defect: Some(defect),
            polar_corrected: corrected,
        })
    }

    pub fn left(&self) -> Option<&BOperator> {
        self.left.as_ref()
    }

    pub fn right(&self) -> Option<&BOperator> {
        self.right.as_ref()
    }

    /// `T` for `A -> TA` and `A -> AT`, `u` for `A -> u A u*`; `None` for
    /// composites.
    pub fn operand(&self) -> Option<&BOperator> {
        match self.kind {
            SuperMapKind::LeftMult | SuperMapKind::Conjugation => self.left.as_ref(),
            SuperMapKind::RightMult => self.right.as_ref(),
            SuperMapKind::Composite => None,
        }
    }

    pub fn dim(&self) -> Option<usize> {
        self.left
            .as_ref()
            .or(self.right.as_ref())
            .map(BOperator::dim)
    }

    /// `self o inner`: `A -> L_s (L_i A R_i) R_s`.
    pub fn compose(&self, inner: &SuperMap) -> Result<SuperMap> {
        let mul = |a: Option<&BOperator>, b: Option<&BOperator>| -> Result<Option<BOperator>> {
            Ok(match (a, b) {
                (Some(a), Some(b)) => Some(a.compose(b)?),
                (Some(a), None) => Some(a.clone()),
                (None, Some(b)) => Some(b.clone()),
                (None, None) => None,
            })
        };
        Ok(SuperMap {
            kind: SuperMapKind::Composite,
            label: format!("{}*{}", self.label, inner.label),
            left: mul(self.left.as_ref(), inner.left.as_ref())?,
            right: mul(inner.right.as_ref(), self.right.as_ref())?,
            unitarity_defect: None,
            polar_corrected: self.polar_corrected || inner.polar_corrected,
        })
    }

    pub fn apply(&self, a: &BOperator) -> Result<BOperator> {
        let mut out = a.clone();
        if let Some(l) = &self.left {
            out = l.compose(&out)?;
        }
        if let Some(r) = &self.right {
            out = out.compose(r)?;
        }
        Ok(out)
    }
}

pub fn apply_supermap(m: &SuperMap, a: &BOperator) -> Result<BOperator> {
    m.apply(a)
}

/// One super-map per member, carrying the member's label. Conjugation
/// tolerates truncation leakage only for families whose untruncated members
/// are unitary.
pub fn supermap_family(family: &OperatorFamily, kind: SuperMapKind) -> Result<Vec<SuperMap>> {
    let leakage = family.unitary_up_to_truncation();
    family
        .members()
        .iter()
        .map(|m| match kind {
            SuperMapKind::LeftMult => Ok(SuperMap::left_mult(m.label.clone(), m.op.clone())),
            SuperMapKind::RightMult => Ok(SuperMap::right_mult(m.label.clone(), m.op.clone())),
            SuperMapKind::Conjugation => SuperMap::conjugation(m.label.clone(), &m.op, leakage),
            SuperMapKind::Composite => Err(Error::invalid(
                "composite super-maps are built with SuperMap::compose",
            )),
        })
        .collect()
}
