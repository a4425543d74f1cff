//! Decision and evidence engines for uniform equicontinuity.

mod banded;
mod certificate;
mod consistency;
mod dimension;
mod modulus;
mod search;

pub use banded::{banded_check, BandViolation, BandedReport};
pub use certificate::{
    certificate_search, certificate_search_supermaps, NonUecCertificate, SearchParams, Witness,
    DEFAULT_BUDGET, DEFAULT_DELTAS, DEFAULT_DELTA_MAX, DEFAULT_GAIN_MIN,
};
pub use consistency::{
    automorphism_correspondence, composition_modulus_check, ec_equals_uec_check, Composable,
    CompositionReport, Correspondence, CorrespondenceReport, EcUecReport, LiftedCertificate,
    PointwiseCurve, DEFAULT_COMPOSITION_CAP, INFLATION, MIN_D_GAP, SLACK,
};
pub use dimension::{
    dim_criterion, dim_criterion_oracle, isometry_preimage_check, DimCriterionReport, GrowthPoint,
    IsometryReport, MemberCompression, OracleMember, OracleReport, PreimagePoint, Restriction,
    Verdict,
};
pub use modulus::{
    estimate_modulus_supermaps, estimate_modulus_vectors, estimate_pointwise_modulus,
    ModulusCurve, MIN_BUDGET,
};
pub use search::SearchMethod;
