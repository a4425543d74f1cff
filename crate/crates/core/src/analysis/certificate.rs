use serde::Serialize;

use super::modulus::{check_dim, check_maps, members};
use super::search::{OperatorEngine, RunConfig, SearchMethod, Tracker, VectorEngine};
use crate::operators::{rank_one, BOperator, OperatorFamily, SuperMap};
use crate::space::{d_metric, rho, HVector, MetricScheme};
use crate::{Error, Result};

pub const DEFAULT_DELTA_MAX: f64 = 1e-2;
pub const DEFAULT_GAIN_MIN: f64 = 10.0;
pub const DEFAULT_BUDGET: usize = 10_000;
pub const DEFAULT_DELTAS: [f64; 6] = [1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2];

/// Stored and recomputed metric values must agree to this tolerance.
const RECOMPUTE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SearchParams {
    pub delta_max: f64,
    pub gain_min: f64,
    /// Random candidates evaluated after the structured phase.
    pub budget: usize,
    pub seed: u64,
}

impl SearchParams {
    pub fn new(seed: u64) -> Self {
        Self {
            delta_max: DEFAULT_DELTA_MAX,
            gain_min: DEFAULT_GAIN_MIN,
            budget: DEFAULT_BUDGET,
            seed,
        }
    }

    /// Smallest output distance a certificate must reach.
    pub fn output_threshold(&self) -> f64 {
        self.gain_min * self.delta_max
    }

    fn validate(&self) -> Result<()> {
        if !(self.delta_max.is_finite() && self.delta_max > 0.0) {
            return Err(Error::invalid("delta_max must be positive"));
        }
        if !(self.gain_min.is_finite() && self.gain_min > 1.0) {
            return Err(Error::invalid("gain_min must exceed 1"));
        }
        Ok(())
    }

    fn config(&self) -> RunConfig {
        RunConfig {
            budget: self.budget,
            seed: self.seed,
            pool: false,
            random_starts: true,
            stop_when_qualified: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Vectors { x: HVector, y: HVector },
    Operators { a: BOperator, b: BOperator },
    /// The operator pair `(x (x) x, y (x) y)`, stored by its factors.
    RankOne { x: HVector, y: HVector },
}

impl Witness {
    /// The operator pair, if this is an operator witness.
    pub fn operators(&self) -> Result<Option<(BOperator, BOperator)>> {
        match self {
            Witness::Vectors { .. } => Ok(None),
            Witness::Operators { a, b } => Ok(Some((a.clone(), b.clone()))),
            Witness::RankOne { x, y } => Ok(Some((rank_one(x, x)?, rank_one(y, y)?))),
        }
    }
}

/// A pair at input distance at most `delta_max` whose image under one member
/// is at distance at least `gain_min * delta_max`.
///
/// Requiring a large output, not only a large ratio, is what separates a
/// failure of uniform equicontinuity from the harmless large ratios any
/// single operator shows on pairs at vanishing distance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NonUecCertificate {
    pub member_label: String,
    pub witness: Witness,
    pub input_dist: f64,
    pub output_dist: f64,
    /// `output_dist / max(input_dist, eps)`.
    pub gain: f64,
    pub gain_min: f64,
    pub delta_max: f64,
    pub scheme_id: String,
    pub method: SearchMethod,
}

fn gain(input: f64, output: f64) -> f64 {
    output / input.max(f64::EPSILON)
}

impl NonUecCertificate {
    pub fn qualifies(&self) -> bool {
        self.input_dist <= self.delta_max
            && self.output_dist >= self.gain_min * self.delta_max
            && gain(self.input_dist, self.output_dist) >= self.gain_min
    }

    fn matches(&self, input: f64, output: f64, scheme: &MetricScheme) -> bool {
        self.scheme_id == scheme.id()
            && (input - self.input_dist).abs() <= RECOMPUTE_TOL
            && (output - self.output_dist).abs() <= RECOMPUTE_TOL
            && self.qualifies()
    }

    /// Recomputes both distances for a vector witness against `family`.
    pub fn verify_vectors(&self, family: &OperatorFamily, scheme: &MetricScheme) -> Result<bool> {
        let Witness::Vectors { x, y } = &self.witness else {
            return Ok(false);
        };
        let Some(m) = family.member(&self.member_label) else {
            return Ok(false);
        };
        let input = rho(x, y, scheme)?.value;
        let output = rho(&m.op.apply(x)?, &m.op.apply(y)?, scheme)?.value;
        Ok(self.matches(input, output, scheme))
    }

    /// Recomputes both distances for an operator witness against `maps`.
    pub fn verify_supermaps(&self, maps: &[SuperMap], scheme: &MetricScheme) -> Result<bool> {
        let Some((a, b)) = self.witness.operators()? else {
            return Ok(false);
        };
        let Some(m) = maps.iter().find(|m| m.label == self.member_label) else {
            return Ok(false);
        };
        let input = d_metric(&a, &b, scheme)?.value;
        let output = d_metric(&m.apply(&a)?, &m.apply(&b)?, scheme)?.value;
        Ok(self.matches(input, output, scheme))
    }
}

fn rank(certs: &mut Vec<NonUecCertificate>, keep: usize) {
    certs.sort_by(|a, b| {
        b.output_dist
            .total_cmp(&a.output_dist)
            .then(b.gain.total_cmp(&a.gain))
    });
    certs.dedup_by(|a, b| a.witness == b.witness && a.member_label == b.member_label);
    certs.truncate(keep);
}

/// Builds the exact certificate for a vector pair, choosing the member with
/// the largest output distance.
pub(crate) fn vector_certificate(
    family: &OperatorFamily,
    scheme: &MetricScheme,
    x: HVector,
    y: HVector,
    method: SearchMethod,
    params: &SearchParams,
) -> Result<NonUecCertificate> {
    let input = rho(&x, &y, scheme)?.value;
    let mut best: Option<(f64, &str)> = None;
    for m in family.members() {
        let out = rho(&m.op.apply(&x)?, &m.op.apply(&y)?, scheme)?.value;
        if best.is_none_or(|(b, _)| out > b) {
            best = Some((out, &m.label));
        }
    }
    let (output, label) = best.ok_or(Error::EmptyFamily)?;
    Ok(NonUecCertificate {
        member_label: label.to_string(),
        input_dist: input,
        output_dist: output,
        gain: gain(input, output),
        gain_min: params.gain_min,
        delta_max: params.delta_max,
        scheme_id: scheme.id(),
        method,
        witness: Witness::Vectors { x, y },
    })
}

pub(crate) fn operator_certificate(
    maps: &[SuperMap],
    scheme: &MetricScheme,
    witness: Witness,
    method: SearchMethod,
    params: &SearchParams,
) -> Result<NonUecCertificate> {
    let (a, b) = witness
        .operators()?
        .ok_or_else(|| Error::invalid("operator certificate needs an operator witness"))?;
    let input = d_metric(&a, &b, scheme)?.value;
    let mut best: Option<(f64, &str)> = None;
    for m in maps {
        let out = d_metric(&m.apply(&a)?, &m.apply(&b)?, scheme)?.value;
        if best.is_none_or(|(v, _)| out > v) {
            best = Some((out, &m.label));
        }
    }
    let (output, label) = best.ok_or(Error::EmptyFamily)?;
    Ok(NonUecCertificate {
        member_label: label.to_string(),
        input_dist: input,
        output_dist: output,
        gain: gain(input, output),
        gain_min: params.gain_min,
        delta_max: params.delta_max,
        scheme_id: scheme.id(),
        method,
        witness,
    })
}

/// Up to `keep` qualifying vector certificates, best first.
pub(crate) fn vector_certificates(
    family: &OperatorFamily,
    scheme: &MetricScheme,
    params: &SearchParams,
    keep: usize,
) -> Result<Vec<NonUecCertificate>> {
    params.validate()?;
    check_dim(scheme, family.dim())?;
    let ops = members(family);
    let engine = VectorEngine::new(scheme, &ops, None);
    let mut t = Tracker::new(&[params.delta_max], Some(params.output_threshold()));
    engine.run(&mut t, &params.config());
    let mut certs = Vec::new();
    for hit in &t.qualified {
        let (x, y) = engine.feasible_pair(hit, params.delta_max);
        let cert = vector_certificate(family, scheme, x, y, hit.method, params)?;
        if cert.qualifies() {
            certs.push(cert);
        }
    }
    rank(&mut certs, keep);
    Ok(certs)
}

/// Searches basis pairs, net-point pairs, seeded random pairs and local
/// refinements (in that order, stopping at the first phase that succeeds)
/// for a non-UEC certificate of `family` on `(H_1, rho)`.
///
/// `None` is evidence of uniform equicontinuity at this budget, not proof.
pub fn certificate_search(
    family: &OperatorFamily,
    scheme: &MetricScheme,
    params: &SearchParams,
) -> Result<Option<NonUecCertificate>> {
    Ok(vector_certificates(family, scheme, params, 1)?.into_iter().next())
}

/// Certificate search for a super-map family on `(B_1, d)`.
pub fn certificate_search_supermaps(
    maps: &[SuperMap],
    scheme: &MetricScheme,
    params: &SearchParams,
) -> Result<Option<NonUecCertificate>> {
    params.validate()?;
    check_maps(maps, scheme)?;
    let refs: Vec<&SuperMap> = maps.iter().collect();
    let engine = OperatorEngine::new(scheme, &refs);
    let mut t = Tracker::new(&[params.delta_max], Some(params.output_threshold()));
    engine.run(&mut t, &params.config());
    let mut certs = Vec::new();
    for hit in &t.qualified {
        let witness = engine.feasible_witness(hit, params.delta_max)?;
        // exact super-map images are dense products; only the member the
        // search credited is recomputed
        let member = std::slice::from_ref(&maps[hit.eval.member]);
        let cert = operator_certificate(member, scheme, witness, hit.method, params)?;
        if cert.qualifies() {
            certs.push(cert);
        }
    }
    rank(&mut certs, 1);
    Ok(certs.into_iter().next())
}
