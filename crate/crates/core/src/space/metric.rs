use serde::{Deserialize, Serialize};

use super::{HVector, MetricScheme};
use crate::operators::BOperator;
use crate::{Error, Result};

/// A metric value over the stored prefix, with a bound on the omitted tail.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    pub value: f64,
    pub truncation_error: f64,
}

impl MetricValue {
    pub fn upper(&self) -> f64 {
        self.value + self.truncation_error
    }
}

fn check_dim(scheme: &MetricScheme, found: usize) -> Result<()> {
    if found != scheme.dim() {
        return Err(Error::DimensionMismatch {
            expected: scheme.dim(),
            found,
        });
    }
    Ok(())
}

/// `rho(x, y) = sum_i |<x - y, h_i>| / 2^i` over the stored prefix.
pub fn rho(x: &HVector, y: &HVector, scheme: &MetricScheme) -> Result<MetricValue> {
    check_dim(scheme, x.dim())?;
    check_dim(scheme, y.dim())?;
    let z = x.coords() - y.coords();
    Ok(MetricValue {
        value: scheme.vector_seminorm(&z),
        // |<x - y, h_i>| <= 2 on the ball
        truncation_error: scheme.tail_bound(),
    })
}

/// `d(A, B) = sum_{i,j} |<(A - B) h_i, h_j>| / 2^(i+j)` over the stored prefix.
pub fn d_metric(a: &BOperator, b: &BOperator, scheme: &MetricScheme) -> Result<MetricValue> {
    check_dim(scheme, a.dim())?;
    check_dim(scheme, b.dim())?;
    let z = a.matrix() - b.matrix();
    Ok(MetricValue {
        value: scheme.operator_seminorm(&z),
        truncation_error: 2.0 * scheme.tail_bound(),
    })
}
