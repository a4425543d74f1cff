//! Truncated Hilbert space, metric schemes and the weak metrics.

mod indexing;
mod metric;
pub(crate) mod sample;
mod scheme;
mod vector;

pub use indexing::{BasisIndexing, IndexKind};
pub use metric::{d_metric, rho, MetricValue};
pub use sample::{derive_seed, norm_ball_project, sample_unit_ball, seeded_rng};
pub use scheme::{build_scheme, MetricScheme, SchemeSummary, MAX_NET_DEPTH};
pub use vector::HVector;
