use serde::Serialize;

use crate::operators::OperatorFamily;
use crate::{tol, C64};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BandViolation {
    pub label: String,
    /// 1-based storage row.
    pub i: usize,
    /// 1-based storage column.
    pub j: usize,
    pub value: C64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BandedReport {
    pub k: usize,
    pub passed: bool,
    pub first_violation: Option<BandViolation>,
}

/// Checks `t_ij = 0` (to 1e-12) whenever `j - i >= k`, scanning members in
/// order, then rows, then columns.
pub fn banded_check(family: &OperatorFamily, k: usize) -> BandedReport {
    let n = family.dim();
    for m in family.members() {
        for i in 0..n {
            for j in (i + k).min(n)..n {
                let value = m.op.entry(i, j);
                if value.norm() > tol::IDENTITY {
                    return BandedReport {
                        k,
                        passed: false,
                        first_violation: Some(BandViolation {
                            label: m.label.clone(),
                            i: i + 1,
                            j: j + 1,
                            value,
                        }),
                    };
                }
            }
        }
    }
    BandedReport {
        k,
        passed: true,
        first_violation: None,
    }
}
