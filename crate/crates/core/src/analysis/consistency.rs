//! Checks of the structural facts: EC = UEC on the compact ball, moduli of
//! compositions, and the correspondence between a unitary family and its
//! conjugation automorphisms.

use serde::Serialize;

use super::certificate::{operator_certificate, vector_certificates, NonUecCertificate, SearchParams};
use super::modulus::{check_dim, check_maps, members, validate_deltas, vector_curve, ModulusCurve, MIN_BUDGET};
use super::search::SearchMethod;
use crate::operators::{supermap_family, Member, OperatorFamily, SuperMap, SuperMapKind};
use crate::space::{derive_seed, sample_unit_ball, HVector, MetricScheme};
use crate::{Error, Result};

pub const SLACK: f64 = 0.05;
/// Pointwise moduli are evaluated at `INFLATION * delta`.
pub const INFLATION: f64 = 1.1;
pub const DEFAULT_COMPOSITION_CAP: usize = 4096;
/// Lifted certificates must separate the rank-one pair by at least this much.
pub const MIN_D_GAP: f64 = 1e-4;
const MAX_LIFTS: usize = 8;

const TAG_BASE: u64 = 0x6261_7365;
const TAG_POINTWISE: u64 = 0x7077_6973;
const TAG_COMPOSE: u64 = 0x636f_6d70;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointwiseCurve {
    /// `zero`, `sample-<k>` or `argmax-<k>` (the uniform maximizer at the
    /// k-th radius).
    pub base: String,
    pub point: HVector,
    pub curve: ModulusCurve,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EcUecReport {
    pub uniform: ModulusCurve,
    pub pointwise: Vec<PointwiseCurve>,
    /// `max_x omega_x(1.1 delta)` per grid radius.
    pub max_pointwise: Vec<f64>,
    /// `max_pointwise + slack - uniform`; negative entries are violations.
    pub margin: Vec<f64>,
    pub slack: f64,
    pub holds: bool,
}

/// Compares the uniform modulus with pointwise moduli at the origin, sampled
/// base points and the uniform maximizers: on the compact ball the former
/// must not exceed the latter (at a slightly larger radius) by more than the
/// slack.
pub fn ec_equals_uec_check(
    family: &OperatorFamily,
    scheme: &MetricScheme,
    deltas: &[f64],
    base_points: usize,
    budget: usize,
    seed: u64,
) -> Result<EcUecReport> {
    validate_deltas(deltas)?;
    check_dim(scheme, family.dim())?;
    if budget < MIN_BUDGET {
        return Err(Error::invalid(format!("budget must be at least {MIN_BUDGET} per base point")));
    }
    let ops = members(family);
    let (uniform, argmax) = vector_curve(scheme, &ops, None, deltas, budget, seed);

    let n = family.dim();
    let mut bases: Vec<(String, HVector)> = vec![("zero".into(), HVector::zeros(n))];
    if base_points > 0 {
        let pts = sample_unit_ball(n, base_points, derive_seed(seed, TAG_BASE, 0))?;
        bases.extend(pts.into_iter().enumerate().map(|(k, p)| (format!("sample-{k}"), p)));
    }
    for (k, pair) in argmax.into_iter().enumerate() {
        if let Some((x, _)) = pair {
            if !bases.iter().any(|(_, b)| *b == x) {
                bases.push((format!("argmax-{k}"), x));
            }
        }
    }

    let inflated: Vec<f64> = deltas.iter().map(|d| d * INFLATION).collect();
    let mut pointwise = Vec::with_capacity(bases.len());
    for (k, (base, point)) in bases.into_iter().enumerate() {
        let s = derive_seed(seed, TAG_POINTWISE, k as u64);
        let (curve, _) = vector_curve(scheme, &ops, Some(&point), &inflated, budget, s);
        pointwise.push(PointwiseCurve { base, point, curve });
    }
    let max_pointwise: Vec<f64> = (0..deltas.len())
        .map(|i| pointwise.iter().map(|p| p.curve.omega_hat[i]).fold(0.0, f64::max))
        .collect();
    let margin: Vec<f64> = max_pointwise
        .iter()
        .zip(&uniform.omega_hat)
        .map(|(p, u)| p + SLACK - u)
        .collect();
    Ok(EcUecReport {
        holds: margin.iter().all(|m| *m >= 0.0),
        uniform,
        pointwise,
        max_pointwise,
        margin,
        slack: SLACK,
    })
}

/// Operands of a composition check: two vector families or two super-map
/// families. `F o G` applies `G` first.
#[derive(Clone, Copy, Debug)]
pub enum Composable<'a> {
    Vectors(&'a OperatorFamily, &'a OperatorFamily),
    SuperMaps(&'a [SuperMap], &'a [SuperMap]),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompositionReport {
    pub deltas: Vec<f64>,
    pub curve_g: ModulusCurve,
    pub curve_fg: ModulusCurve,
    /// `omega_F` on the grid extended by the arguments `omega_G(delta) + slack`.
    pub curve_f: ModulusCurve,
    /// `omega_F(omega_G(delta) + slack) + slack`.
    pub bound: Vec<f64>,
    /// `bound - omega_FG`; negative entries are violations.
    pub margin: Vec<f64>,
    pub composed_size: usize,
    pub slack: f64,
    pub holds: bool,
}

fn extended_grid(deltas: &[f64], args: &[f64]) -> Vec<f64> {
    let mut grid: Vec<f64> = deltas.iter().chain(args).copied().collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Checks `omega_FG(delta) <= omega_F(omega_G(delta) + slack) + slack` on the
/// grid, materializing `F o G` pairwise.
pub fn composition_modulus_check(
    operands: Composable<'_>,
    scheme: &MetricScheme,
    deltas: &[f64],
    budget: usize,
    seed: u64,
    cap: usize,
) -> Result<CompositionReport> {
    validate_deltas(deltas)?;
    let (nf, ng) = match operands {
        Composable::Vectors(f, g) => (f.len(), g.len()),
        Composable::SuperMaps(f, g) => (f.len(), g.len()),
    };
    let size = nf * ng;
    if size > cap {
        return Err(Error::CompositionTooLarge { size, cap });
    }
    let seeds = |k: u64| derive_seed(seed, TAG_COMPOSE, k);
    let (curve_g, curve_fg, curve_f) = match operands {
        Composable::Vectors(f, g) => {
            check_dim(scheme, f.dim())?;
            check_dim(scheme, g.dim())?;
            let mut composed = Vec::with_capacity(size);
            for a in f.members() {
                for b in g.members() {
                    composed.push(Member::new(format!("{}*{}", a.label, b.label), a.op.compose(&b.op)?));
                }
            }
            let fg = OperatorFamily::custom(*f.indexing(), composed)?;
            let curve = |fam: &OperatorFamily, grid: &[f64], k| {
                super::estimate_modulus_vectors(fam, scheme, grid, budget, seeds(k))
            };
            let cg = curve(g, deltas, 0)?;
            let cfg = curve(&fg, deltas, 1)?;
            let args: Vec<f64> = cg.omega_hat.iter().map(|w| w + SLACK).collect();
            let cf = curve(f, &extended_grid(deltas, &args), 2)?;
            (cg, cfg, cf)
        }
        Composable::SuperMaps(f, g) => {
            check_maps(f, scheme)?;
            check_maps(g, scheme)?;
            let mut composed = Vec::with_capacity(size);
            for a in f {
                for b in g {
                    composed.push(a.compose(b)?);
                }
            }
            let curve = |maps: &[SuperMap], grid: &[f64], k| {
                super::estimate_modulus_supermaps(maps, scheme, grid, budget, seeds(k))
            };
            let cg = curve(g, deltas, 0)?;
            let cfg = curve(&composed, deltas, 1)?;
            let args: Vec<f64> = cg.omega_hat.iter().map(|w| w + SLACK).collect();
            let cf = curve(f, &extended_grid(deltas, &args), 2)?;
            (cg, cfg, cf)
        }
    };
    let bound: Vec<f64> = curve_g
        .omega_hat
        .iter()
        .map(|w| curve_f.at(w + SLACK) + SLACK)
        .collect();
    let margin: Vec<f64> = bound.iter().zip(&curve_fg.omega_hat).map(|(b, w)| b - w).collect();
    Ok(CompositionReport {
        deltas: deltas.to_vec(),
        holds: margin.iter().all(|m| *m >= 0.0),
        curve_g,
        curve_fg,
        curve_f,
        bound,
        margin,
        composed_size: size,
        slack: SLACK,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Correspondence {
    BothWitnessed,
    BothNone,
    Disagree,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LiftedCertificate {
    pub certificate: NonUecCertificate,
    pub d_gap: f64,
    pub valid: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrespondenceReport {
    pub vector_certificate: Option<NonUecCertificate>,
    pub operator_certificate: Option<NonUecCertificate>,
    pub lifted: Vec<LiftedCertificate>,
    pub max_unitarity_defect: f64,
    pub polar_corrected: usize,
    pub verdict: Correspondence,
    pub lifts_valid: bool,
}

/// Runs certificate search on `{u}` over `(H_1, rho)` and on the conjugations
/// `{A -> u A u*}` over `(B_1, d)`, lifting every vector certificate
/// `(x, y, u)` to `(x (x) x, y (x) y, alpha_u)`.
pub fn automorphism_correspondence(
    u_family: &OperatorFamily,
    scheme: &MetricScheme,
    params: &SearchParams,
) -> Result<CorrespondenceReport> {
    let maps = supermap_family(u_family, SuperMapKind::Conjugation)?;
    let vector = vector_certificates(u_family, scheme, params, MAX_LIFTS)?;
    let mut lifted = Vec::with_capacity(vector.len());
    for cert in &vector {
        let super::Witness::Vectors { x, y } = &cert.witness else { continue };
        let alpha = maps
            .iter()
            .find(|m| m.label == cert.member_label)
            .expect("maps share member labels");
        let mut lift = operator_certificate(
            std::slice::from_ref(alpha),
            scheme,
            super::Witness::RankOne { x: x.clone(), y: y.clone() },
            SearchMethod::Structured,
            params,
        )?;
        lift.method = cert.method;
        let d_gap = lift.output_dist - lift.input_dist;
        lifted.push(LiftedCertificate {
            valid: lift.qualifies() && d_gap >= MIN_D_GAP,
            certificate: lift,
            d_gap,
        });
    }
    let operator = super::certificate_search_supermaps(&maps, scheme, params)?;
    let vector_found = !vector.is_empty();
    let operator_found = operator.is_some() || lifted.iter().any(|l| l.valid);
    let verdict = match (vector_found, operator_found) {
        (true, true) => Correspondence::BothWitnessed,
        (false, false) => Correspondence::BothNone,
        _ => Correspondence::Disagree,
    };
    Ok(CorrespondenceReport {
        vector_certificate: vector.into_iter().next(),
        operator_certificate: operator,
        lifts_valid: lifted.iter().all(|l| l.valid),
        lifted,
        max_unitarity_defect: maps
            .iter()
            .filter_map(|m| m.unitarity_defect)
            .fold(0.0, f64::max),
        polar_corrected: maps.iter().filter(|m| m.polar_corrected).count(),
        verdict,
    })
}
