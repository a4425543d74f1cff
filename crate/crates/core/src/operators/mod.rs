//! Contractions on the truncated space, the shift and multiplication
//! families, and super-maps on the operator ball.

mod boperator;
mod constructions;
mod family;
mod supermap;

pub use boperator::BOperator;
pub use constructions::{
    adjoint, left_shift, mult_group_element, power_family, rank_one, right_shift,
};
pub use family::{Extent, ExtentRule, FamilyDescriptor, Member, OperatorFamily, SafeWindow};
pub use supermap::{apply_supermap, supermap_family, SuperMap, SuperMapKind};
