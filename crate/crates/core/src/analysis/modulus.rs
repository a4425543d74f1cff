use serde::{Deserialize, Serialize};

use super::search::{
    Hit, OperatorEngine, RunConfig, SearchMethod, Tracker, VPair, VectorEngine,
};
use crate::operators::{BOperator, OperatorFamily, SuperMap};
use crate::space::{HVector, MetricScheme};
use crate::{Error, Result};

pub const MIN_BUDGET: usize = 100;

/// Estimated modulus of continuity `delta -> sup { dist(f x, f y) }`.
///
/// Every entry is attained by an explicit feasible pair, so the curve is a
/// lower bound on the true modulus. Entries are made non-decreasing by a
/// running maximum, which keeps that property.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusCurve {
    pub deltas: Vec<f64>,
    pub omega_hat: Vec<f64>,
    /// Candidate class that attained each entry.
    pub method: Vec<SearchMethod>,
    pub samples_per_delta: usize,
    pub seed: u64,
}

impl ModulusCurve {
    pub(crate) fn from_tracker<P>(t: &Tracker<P>, seed: u64) -> Self {
        let mut omega_hat = Vec::with_capacity(t.deltas.len());
        let mut method = Vec::with_capacity(t.deltas.len());
        let mut run = (0.0, SearchMethod::Structured);
        for hit in &t.best {
            if let Some(h) = hit {
                if h.value > run.0 {
                    run = (h.value, h.method);
                }
            }
            omega_hat.push(run.0);
            method.push(run.1);
        }
        Self {
            deltas: t.deltas.clone(),
            omega_hat,
            method,
            samples_per_delta: t.evaluated,
            seed,
        }
    }

    /// Value at the largest grid radius not exceeding `delta`, else 0.
    pub fn at(&self, delta: f64) -> f64 {
        self.deltas
            .iter()
            .zip(&self.omega_hat)
            .filter(|(d, _)| **d <= delta)
            .map(|(_, w)| *w)
            .fold(0.0, f64::max)
    }
}

pub(crate) fn validate_deltas(deltas: &[f64]) -> Result<()> {
    if deltas.is_empty() {
        return Err(Error::invalid("delta grid is empty"));
    }
    if deltas.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
        return Err(Error::invalid("deltas must be positive"));
    }
    if deltas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("deltas must be strictly increasing"));
    }
    Ok(())
}

fn validate_budget(budget: usize) -> Result<()> {
    if budget < MIN_BUDGET {
        return Err(Error::invalid(format!("budget must be at least {MIN_BUDGET}")));
    }
    Ok(())
}

pub(crate) fn check_dim(scheme: &MetricScheme, found: usize) -> Result<()> {
    if found != scheme.dim() {
        return Err(Error::DimensionMismatch {
            expected: scheme.dim(),
            found,
        });
    }
    Ok(())
}

pub(crate) fn check_maps(maps: &[SuperMap], scheme: &MetricScheme) -> Result<()> {
    if maps.is_empty() {
        return Err(Error::EmptyFamily);
    }
    for m in maps {
        check_dim(scheme, m.dim().unwrap_or(scheme.dim()))?;
    }
    Ok(())
}

pub(crate) fn members(family: &OperatorFamily) -> Vec<&BOperator> {
    family.members().iter().map(|m| &m.op).collect()
}

fn modulus_config(budget: usize, seed: u64) -> RunConfig {
    RunConfig {
        budget,
        seed,
        pool: true,
        random_starts: false,
        stop_when_qualified: false,
    }
}

/// Curve plus the feasible pair attaining each raw per-radius maximum.
pub(crate) fn vector_curve(
    scheme: &MetricScheme,
    ops: &[&BOperator],
    anchor: Option<&HVector>,
    deltas: &[f64],
    budget: usize,
    seed: u64,
) -> (ModulusCurve, Vec<Option<(HVector, HVector)>>) {
    let engine = VectorEngine::new(scheme, ops, anchor);
    let mut t = Tracker::new(deltas, None);
    engine.run(&mut t, &modulus_config(budget, seed));
    let pairs = t
        .best
        .iter()
        .zip(deltas)
        .map(|(h, d): (&Option<Hit<VPair>>, _)| h.as_ref().map(|h| engine.feasible_pair(h, *d)))
        .collect();
    (ModulusCurve::from_tracker(&t, seed), pairs)
}

/// Modulus of a vector family on `(H_1, rho)`.
pub fn estimate_modulus_vectors(
    family: &OperatorFamily,
    scheme: &MetricScheme,
    deltas: &[f64],
    budget: usize,
    seed: u64,
) -> Result<ModulusCurve> {
    validate_deltas(deltas)?;
    validate_budget(budget)?;
    check_dim(scheme, family.dim())?;
    Ok(vector_curve(scheme, &members(family), None, deltas, budget, seed).0)
}

/// Pointwise modulus at a fixed base point `x`: pairs `(x, y)` only.
pub fn estimate_pointwise_modulus(
    family: &OperatorFamily,
    scheme: &MetricScheme,
    base: &HVector,
    deltas: &[f64],
    budget: usize,
    seed: u64,
) -> Result<ModulusCurve> {
    validate_deltas(deltas)?;
    validate_budget(budget)?;
    check_dim(scheme, family.dim())?;
    check_dim(scheme, base.dim())?;
    base.require_unit_ball("base point")?;
    Ok(vector_curve(scheme, &members(family), Some(base), deltas, budget, seed).0)
}

/// Modulus of a super-map family on `(B_1, d)`.
pub fn estimate_modulus_supermaps(
    maps: &[SuperMap],
    scheme: &MetricScheme,
    deltas: &[f64],
    budget: usize,
    seed: u64,
) -> Result<ModulusCurve> {
    validate_deltas(deltas)?;
    validate_budget(budget)?;
    check_maps(maps, scheme)?;
    let refs: Vec<&SuperMap> = maps.iter().collect();
    let engine = OperatorEngine::new(scheme, &refs);
    let mut t = Tracker::new(deltas, None);
    engine.run(&mut t, &modulus_config(budget, seed));
    Ok(ModulusCurve::from_tracker(&t, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{mult_group_element, supermap_family, FamilyDescriptor, SuperMapKind};
    use crate::space::{build_scheme, BasisIndexing};

    const GRID: [f64; 6] = [1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2];

    #[test]
    fn zero_family_has_zero_modulus() {
        let ix = BasisIndexing::natural(6);
        let s = build_scheme(ix, 6, 1, 3).unwrap();
        let fam = OperatorFamily::singleton(ix, "0", BOperator::zeros(6)).unwrap();
        let c = estimate_modulus_vectors(&fam, &s, &GRID, 100, 1).unwrap();
        assert!(c.omega_hat.iter().all(|w| *w == 0.0));
    }

    #[test]
    fn identity_transports_distances() {
        let ix = BasisIndexing::natural(8);
        let s = build_scheme(ix, 8, 2, 3).unwrap();
        let fam = OperatorFamily::singleton(ix, "I", BOperator::identity(8)).unwrap();
        let c = estimate_modulus_vectors(&fam, &s, &GRID, 200, 4).unwrap();
        for (d, w) in c.deltas.iter().zip(&c.omega_hat) {
            assert!(*w >= d * 0.95 && *w <= *d, "{d} {w}");
        }
    }

    #[test]
    fn identity_conjugation_transports_distances() {
        let ix = BasisIndexing::natural(6);
        let s = build_scheme(ix, 6, 1, 3).unwrap();
        let fam = OperatorFamily::singleton(ix, "I", BOperator::identity(6)).unwrap();
        let maps = supermap_family(&fam, SuperMapKind::Conjugation).unwrap();
        let c = estimate_modulus_supermaps(&maps, &s, &GRID, 100, 4).unwrap();
        for (d, w) in c.deltas.iter().zip(&c.omega_hat) {
            assert!(*w >= d * 0.95 && *w <= d * (1.0 + 1e-12), "{d} {w}");
        }
    }

    #[test]
    fn left_shift_modulus_stays_above_c0() {
        let ix = BasisIndexing::integer(33);
        let s = build_scheme(ix, 16, 0, 5).unwrap();
        let fam = FamilyDescriptor::LeftShiftPowers { k_max: 10.into() }.build(ix).unwrap();
        let c = estimate_modulus_vectors(&fam, &s, &GRID, 100, 8).unwrap();
        assert!(c.omega_hat.iter().all(|w| *w >= s.c0()));
    }

    #[test]
    fn right_shift_left_multiplication_is_uec_consistent() {
        let ix = BasisIndexing::natural(16);
        let s = build_scheme(ix, 16, 1, 5).unwrap();
        let fam = FamilyDescriptor::RightShiftPowers { n_max: 6.into() }.build(ix).unwrap();
        let maps = supermap_family(&fam, SuperMapKind::LeftMult).unwrap();
        let c = estimate_modulus_supermaps(&maps, &s, &GRID, 200, 2).unwrap();
        assert!(c.at(1e-3) < 0.05);
        assert!(c.omega_hat.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn integer_conjugations_stay_bounded_below() {
        let ix = BasisIndexing::integer(33);
        let s = build_scheme(ix, 16, 0, 5).unwrap();
        let fam = FamilyDescriptor::ConjugationGroup { t_list: (-8..=8).map(f64::from).collect() }
            .build(ix)
            .unwrap();
        let maps = supermap_family(&fam, SuperMapKind::Conjugation).unwrap();
        let c = estimate_modulus_supermaps(&maps, &s, &GRID, 100, 2).unwrap();
        assert!(c.omega_hat[0] >= 0.25, "{:?}", c.omega_hat);
    }

    #[test]
    fn rejects_bad_grids_and_budgets() {
        let ix = BasisIndexing::natural(4);
        let s = build_scheme(ix, 4, 0, 0).unwrap();
        let fam = OperatorFamily::singleton(ix, "u", mult_group_element(0.0, 4)).unwrap();
        assert!(estimate_modulus_vectors(&fam, &s, &[1e-2, 1e-3], 100, 0).is_err());
        assert!(estimate_modulus_vectors(&fam, &s, &[1e-2], 99, 0).is_err());
        assert!(matches!(
            estimate_modulus_supermaps(&[], &s, &[1e-2], 100, 0),
            Err(Error::EmptyFamily)
        ));
    }

    #[test]
    fn more_budget_never_lowers_the_curve() {
        let ix = BasisIndexing::natural(6);
        let s = build_scheme(ix, 6, 1, 1).unwrap();
        let fam = FamilyDescriptor::MultGroup { t_list: vec![0.3, -0.7] };
        let fam = fam.build(BasisIndexing::integer(6)).unwrap();
        let fam = OperatorFamily::custom(ix, fam.members().to_vec()).unwrap();
        let small = estimate_modulus_vectors(&fam, &s, &GRID, 100, 9).unwrap();
        let large = estimate_modulus_vectors(&fam, &s, &GRID, 400, 9).unwrap();
        for (a, b) in small.omega_hat.iter().zip(&large.omega_hat) {
            assert!(b >= a);
        }
    }
}
