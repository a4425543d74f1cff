use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::linalg;
use crate::operators::OperatorFamily;
use crate::space::sample::gaussian_vector;
use crate::space::{seeded_rng, HVector};
use crate::{tol, Error, Result, C64};

/// Finite-scale reading of "dimension stays finite" across a truncation
/// ladder. This is evidence, not a decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// The last two truncations report the same dimension.
    Stabilizing,
    Growing,
    /// Only one truncation was examined.
    Inconclusive,
}

fn verdict(dims: &[usize]) -> Verdict {
    match dims {
        [.., a, b] if a == b => Verdict::Stabilizing,
        [_, _, ..] => Verdict::Growing,
        _ => Verdict::Inconclusive,
    }
}

fn validate_ladder(dims: &[usize]) -> Result<()> {
    if dims.is_empty() {
        return Err(Error::invalid("truncation ladder is empty"));
    }
    if dims.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("ladder not increasing"));
    }
    Ok(())
}

fn validate_c(c: f64) -> Result<()> {
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::invalid(format!("c = {c} outside (0, 1]")));
    }
    Ok(())
}

/// Orthonormal bases of `V` and of its complement in the truncation.
struct Split {
    q: DMatrix<C64>,
    perp: DMatrix<C64>,
}

fn split(v_basis: &[HVector], n: usize) -> Result<Split> {
    if v_basis.is_empty() {
        return Err(Error::invalid("V basis is empty"));
    }
    let cols = v_basis
        .iter()
        .map(|v| {
            v.resized(n)
                .map(HVector::into_dvector)
                .map_err(|_| Error::invalid(format!("V is not inside the truncation of dimension {n}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let defect = linalg::orthonormality_defect(&cols);
    if defect > tol::NORM {
        return Err(Error::invalid(format!("V basis is not orthonormal (defect {defect:.3e})")));
    }
    let q = DMatrix::from_columns(&cols);
    let proj = DMatrix::<C64>::identity(n, n) - &q * q.adjoint();
    let eig = SymmetricEigen::new(proj);
    let keep: Vec<DVector<C64>> = (0..n)
        .filter(|&k| eig.eigenvalues[k] > 0.5)
        .map(|k| eig.eigenvectors.column(k).into_owned())
        .collect();
    let perp = if keep.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&keep)
    };
    Ok(Split { q, perp })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MemberCompression {
    pub label: String,
    /// Singular values of `P_V T` restricted to `V^perp`, descending.
    pub singular_values: Vec<f64>,
    pub count_at_least_c: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GrowthPoint {
    pub truncation_dim: usize,
    pub container_dim: usize,
    pub counts: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimCriterionReport {
    pub v_basis: Vec<HVector>,
    pub c: f64,
    /// Compressions at the largest truncation.
    pub per_member: Vec<MemberCompression>,
    /// Dimension of the span of all qualifying right singular vectors at the
    /// largest truncation.
    pub container_dim: usize,
    pub growth_trace: Vec<GrowthPoint>,
    pub verdict: Verdict,
}

/// For each truncation and member, the singular values of `P_V T` on
/// `V^perp`; the count with `sigma >= c` is the largest dimension of a
/// subspace on which `||P_V T x|| >= c ||x||`, and the container is the span
/// of the corresponding right singular vectors across members.
pub fn dim_criterion(
    family: &OperatorFamily,
    v_basis: &[HVector],
    c: f64,
    truncation_dims: &[usize],
) -> Result<DimCriterionReport> {
    validate_c(c)?;
    validate_ladder(truncation_dims)?;
    let threshold = c - tol::SINGULAR_TIE;
    let mut growth_trace = Vec::with_capacity(truncation_dims.len());
    let mut per_member = Vec::new();
    for &n in truncation_dims {
        let fam = family.at_dim(n)?;
        let Split { q, perp } = split(v_basis, n)?;
        let mut members = Vec::with_capacity(fam.len());
        let mut container: Vec<DVector<C64>> = Vec::new();
        for m in fam.members() {
            let comp = q.adjoint() * m.op.matrix() * &perp;
            let singular_values = linalg::singular_values(&comp);
            let count = singular_values.iter().filter(|s| **s >= threshold).count();
            container.extend(
                linalg::right_singular_vectors_above(&comp, threshold)
                    .into_iter()
                    .map(|(_, v)| &perp * v),
            );
            members.push(MemberCompression {
                label: m.label.clone(),
                singular_values,
                count_at_least_c: count,
            });
        }
        growth_trace.push(GrowthPoint {
            truncation_dim: n,
            container_dim: linalg::svd_rank(&container, tol::RANK),
            counts: members.iter().map(|m| m.count_at_least_c).collect(),
        });
        per_member = members;
    }
    let dims: Vec<usize> = growth_trace.iter().map(|g| g.container_dim).collect();
    Ok(DimCriterionReport {
        v_basis: v_basis.to_vec(),
        c,
        per_member,
        container_dim: *dims.last().expect("nonempty ladder"),
        verdict: verdict(&dims),
        growth_trace,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleMember {
    pub label: String,
    pub kept: usize,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub per_member: Vec<OracleMember>,
    /// Rank of the union of the qualifying directions found for all members.
    pub rank: usize,
    /// Sampled vectors kept by at least one member.
    pub kept: usize,
    pub trials: usize,
}

/// Kept samples per member that seed the sketch.
const SKETCH_SEEDS: usize = 32;
/// Power steps a sample may take towards the top of `||P_V T x||`.
const ASCENT_STEPS: usize = 32;

/// Power iteration of `b` from `x`, returning the first iterate that meets
/// `threshold`. Stops once `||P_V T y||` stalls: for positive semidefinite
/// `b` the iterates' Rayleigh quotients never decrease.
fn ascend(
    x: &DVector<C64>,
    pt: &DMatrix<C64>,
    threshold: f64,
    b: impl Fn(&DVector<C64>) -> DVector<C64>,
) -> Option<DVector<C64>> {
    let mut y = x.clone();
    let mut prev = f64::NEG_INFINITY;
    for _ in 0..=ASCENT_STEPS {
        let r = (pt * &y).norm();
        if r >= threshold {
            return Some(y);
        }
        if r <= prev + tol::IDENTITY {
            return None;
        }
        prev = r;
        let z = b(&y);
        let n = z.norm();
        if n == 0.0 {
            return None;
        }
        y = z / C64::new(n, 0.0);
    }
    None
}

/// Randomized check of [`dim_criterion`] that never forms the compression's
/// SVD.
///
/// Unit vectors of `V^perp` are sampled, pushed up `||P_V T x||` by a few
/// power steps of `B = P_perp T* P_V T`, and kept once `||P_V T x|| >= c`
/// (sampling alone misses the thin cones left when `sigma` is just above
/// `c`). The kept vectors and their images under `B = P_perp T* P_V T` span a
/// search space `S`; the eigenvalues of `B` compressed to `S` at least `c^2`
/// give the member's rank. Compressing can only lower eigenvalues, so the
/// result never exceeds the singular-value count.
pub fn dim_criterion_oracle(
    family: &OperatorFamily,
    v_basis: &[HVector],
    c: f64,
    trials: usize,
    seed: u64,
) -> Result<OracleReport> {
    validate_c(c)?;
    if trials == 0 {
        return Err(Error::invalid("oracle needs at least one trial"));
    }
    let n = family.dim();
    let Split { q, perp } = split(v_basis, n)?;
    let threshold = c - tol::SINGULAR_TIE;
    let m_dim = perp.ncols();
    let mut rng = seeded_rng(seed);
    let samples: Vec<DVector<C64>> = if m_dim == 0 {
        Vec::new()
    } else {
        (0..trials)
            .map(|_| {
                let g = DVector::from_vec(gaussian_vector(&mut rng, m_dim));
                let x = &perp * &g;
                let norm = x.norm();
                x / C64::new(norm, 0.0)
            })
            .collect()
    };
    let mut kept_any = vec![false; samples.len()];
    let mut per_member = Vec::with_capacity(family.len());
    let mut ritz_all: Vec<DVector<C64>> = Vec::new();
    for m in family.members() {
        let pt = q.adjoint() * m.op.matrix();
        // x -> P_perp T* P_V T x, kept in factored form
        let b = |x: &DVector<C64>| -> DVector<C64> {
            let z = pt.adjoint() * (&pt * x);
            &z - &q * (q.adjoint() * &z)
        };
        let mut seeds = Vec::new();
        let mut kept = 0;
        for (k, x) in samples.iter().enumerate() {
            if let Some(y) = ascend(x, &pt, threshold, b) {
                kept += 1;
                kept_any[k] = true;
                if seeds.len() < SKETCH_SEEDS {
                    seeds.push(y);
                }
            }
        }
        let mut rank = 0;
        if !seeds.is_empty() {
            let mut sketch = seeds.clone();
            let mut layer = seeds;
            for _ in 0..2 {
                layer = layer.iter().map(&b).collect();
                sketch.extend(layer.iter().cloned());
            }
            let basis = linalg::gram_schmidt(&sketch, tol::ORACLE_RANK);
            let s = DMatrix::from_columns(&basis);
            let ps = &pt * &s;
            let eig = SymmetricEigen::new(ps.adjoint() * &ps);
            for (k, lambda) in eig.eigenvalues.iter().enumerate() {
                if *lambda >= threshold * threshold {
                    rank += 1;
                    ritz_all.push(&s * eig.eigenvectors.column(k));
                }
            }
        }
        per_member.push(OracleMember {
            label: m.label.clone(),
            kept,
            rank,
        });
    }
    Ok(OracleReport {
        per_member,
        rank: linalg::gram_schmidt(&ritz_all, tol::ORACLE_RANK).len(),
        kept: kept_any.iter().filter(|k| **k).count(),
        trials,
    })
}

/// Domain on which each member is checked for being bounded below.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Restriction {
    /// The whole truncation; every member must be bounded below.
    #[default]
    Full,
    /// Each member restricted to the span of its right singular vectors
    /// with `sigma >= 1e-6`, which removes truncation-boundary kernels.
    IsometricWindow,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PreimagePoint {
    pub truncation_dim: usize,
    pub preimage_dim: usize,
    pub beta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IsometryReport {
    pub restriction: Restriction,
    /// Smallest lower bound over members and truncations.
    pub beta: f64,
    pub growth_trace: Vec<PreimagePoint>,
    pub verdict: Verdict,
}

/// Dimension of `span{U^-1(V) : U in family} ∩ V^perp` per truncation, where
/// the preimage under `U` is spanned by the right singular vectors of
/// `P_V U` with `sigma >= beta (1 - 1e-6)`.
pub fn isometry_preimage_check(
    family: &OperatorFamily,
    v_basis: &[HVector],
    truncation_dims: &[usize],
    restriction: Restriction,
) -> Result<IsometryReport> {
    validate_ladder(truncation_dims)?;
    let mut growth_trace = Vec::with_capacity(truncation_dims.len());
    for &n in truncation_dims {
        let fam = family.at_dim(n)?;
        let Split { q, .. } = split(v_basis, n)?;
        let mut domains = Vec::with_capacity(fam.len());
        let mut beta = f64::INFINITY;
        for m in fam.members() {
            let (domain, b) = match restriction {
                Restriction::Full => {
                    let s = m.op.sigma_min();
                    if s < tol::BOUNDED_BELOW {
                        return Err(Error::NotBoundedBelow {
                            label: m.label.clone(),
                            sigma_min: s,
                        });
                    }
                    (DMatrix::identity(n, n), s)
                }
                Restriction::IsometricWindow => {
                    let vs = linalg::right_singular_vectors_above(m.op.matrix(), tol::BOUNDED_BELOW);
                    let b = vs.last().map_or(f64::INFINITY, |(s, _)| *s);
                    let cols: Vec<DVector<C64>> = vs.into_iter().map(|(_, v)| v).collect();
                    let d = if cols.is_empty() {
                        DMatrix::zeros(n, 0)
                    } else {
                        DMatrix::from_columns(&cols)
                    };
                    (d, b)
                }
            };
            beta = beta.min(b);
            domains.push(domain);
        }
        let mut union: Vec<DVector<C64>> = Vec::new();
        for (m, d) in fam.members().iter().zip(&domains) {
            if d.ncols() == 0 {
                continue;
            }
            let comp = q.adjoint() * m.op.matrix() * d;
            union.extend(
                linalg::right_singular_vectors_above(&comp, beta * (1.0 - tol::BOUNDED_BELOW))
                    .into_iter()
                    .map(|(_, w)| d * w),
            );
        }
        let projected: Vec<DVector<C64>> = union.iter().map(|u| q.adjoint() * u).collect();
        let preimage_dim = linalg::svd_rank(&union, tol::RANK) - linalg::svd_rank(&projected, tol::RANK);
        growth_trace.push(PreimagePoint {
            truncation_dim: n,
            preimage_dim,
            beta,
        });
    }
    let dims: Vec<usize> = growth_trace.iter().map(|g| g.preimage_dim).collect();
    Ok(IsometryReport {
        restriction,
        beta: growth_trace.iter().map(|g| g.beta).fold(f64::INFINITY, f64::min),
        verdict: verdict(&dims),
        growth_trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{BOperator, Extent, ExtentRule, FamilyDescriptor};
    use crate::space::BasisIndexing;

    fn e(n: usize, i: usize) -> HVector {
        HVector::unit(n, i - 1)
    }

    fn adjoint_shifts(n_max: Extent, dim: usize) -> OperatorFamily {
        FamilyDescriptor::AdjointRightShiftPowers { n_max }
            .build(BasisIndexing::natural(dim))
            .unwrap()
    }

    #[test]
    fn identity_has_empty_container() {
        let ix = BasisIndexing::natural(8);
        let fam = OperatorFamily::singleton(ix, "I", BOperator::identity(8)).unwrap();
        let r = dim_criterion(&fam, &[e(8, 2), e(8, 5)], 0.5, &[8]).unwrap();
        assert_eq!(r.container_dim, 0);
        assert!(r.per_member.iter().all(|m| m.count_at_least_c == 0));
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn adjoint_shifts_fill_a_ten_dimensional_container() {
        let fam = adjoint_shifts(10.into(), 16);
        let r = dim_criterion(&fam, &[e(16, 1)], 0.5, &[16, 32, 64]).unwrap();
        assert!(r.growth_trace.iter().all(|g| g.container_dim == 10));
        assert!(r.per_member.iter().all(|m| m.count_at_least_c == 1));
        assert_eq!(r.verdict, Verdict::Stabilizing);
    }

    #[test]
    fn half_dim_adjoint_shifts_grow() {
        let fam = adjoint_shifts(Extent::Rule(ExtentRule::HalfDim), 16);
        let r = dim_criterion(&fam, &[e(16, 1)], 0.5, &[16, 32, 64]).unwrap();
        let dims: Vec<usize> = r.growth_trace.iter().map(|g| g.container_dim).collect();
        assert_eq!(dims, vec![8, 16, 32]);
        assert_eq!(r.verdict, Verdict::Growing);
    }

    #[test]
    fn right_shifts_do_not_compress_onto_f4() {
        let fam = FamilyDescriptor::RightShiftPowers { n_max: 10.into() }
            .build(BasisIndexing::natural(32))
            .unwrap();
        let v: Vec<HVector> = (1..=4).map(|i| e(32, i)).collect();
        let r = dim_criterion(&fam, &v, 0.1, &[32]).unwrap();
        assert_eq!(r.container_dim, 0);
        assert!(r.per_member.iter().all(|m| m.count_at_least_c == 0));
    }

    #[test]
    fn rejects_invalid_inputs() {
        let fam = adjoint_shifts(2.into(), 8);
        assert!(dim_criterion(&fam, &[e(8, 1)], 0.0, &[8]).is_err());
        assert!(dim_criterion(&fam, &[e(8, 1)], 1.5, &[8]).is_err());
        let err = dim_criterion(&fam, &[e(8, 1)], 0.5, &[16, 8]).unwrap_err();
        assert!(err.to_string().contains("ladder not increasing"));
        assert!(dim_criterion(&fam, &[e(16, 12)], 0.5, &[8]).is_err());
        let skew = HVector::from_real(&[1.0, 0.1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(dim_criterion(&fam, &[skew], 0.5, &[8]).is_err());
        assert!(dim_criterion_oracle(&fam, &[e(8, 1)], 0.5, 0, 0).is_err());
    }

    #[test]
    fn oracle_on_identity_keeps_nothing() {
        let ix = BasisIndexing::natural(6);
        let fam = OperatorFamily::singleton(ix, "I", BOperator::identity(6)).unwrap();
        let r = dim_criterion_oracle(&fam, &[e(6, 1)], 0.5, 500, 1).unwrap();
        assert_eq!((r.kept, r.rank), (0, 0));
    }

    #[test]
    fn oracle_recovers_adjoint_shift_container() {
        let fam = adjoint_shifts(10.into(), 16);
        let r = dim_criterion_oracle(&fam, &[e(16, 1)], 0.5, 10_000, 7).unwrap();
        assert_eq!(r.rank, 10);
        assert!(r.per_member.iter().all(|m| m.rank == 1));
    }

    #[test]
    fn oracle_rejects_weak_compressions() {
        let ix = BasisIndexing::natural(10);
        let m = DMatrix::from_fn(10, 10, |i, j| C64::new(((i * 3 + j * 5) % 7) as f64 - 3.0, (i + j) as f64 % 2.0));
        let scale = 0.2 / linalg::sigma_max(&m);
        let fam = OperatorFamily::singleton(ix, "T", BOperator::new(m * C64::new(scale, 0.0)).unwrap()).unwrap();
        let r = dim_criterion_oracle(&fam, &[e(10, 1), e(10, 2)], 0.5, 2000, 3).unwrap();
        assert_eq!(r.rank, 0);
    }

    #[test]
    fn unitary_preimage_meets_complement_trivially() {
        let ix = BasisIndexing::natural(8);
        let fam = OperatorFamily::singleton(ix, "I", BOperator::identity(8)).unwrap();
        let r = isometry_preimage_check(&fam, &[e(8, 1), e(8, 3)], &[8], Restriction::Full).unwrap();
        assert_eq!(r.growth_trace[0].preimage_dim, 0);
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert_eq!(r.beta, 1.0);
    }

    #[test]
    fn adjoint_shift_preimages_grow_on_isometric_window() {
        let fam = adjoint_shifts(Extent::Rule(ExtentRule::HalfDim), 16);
        assert!(matches!(
            isometry_preimage_check(&fam, &[e(16, 1)], &[16], Restriction::Full),
            Err(Error::NotBoundedBelow { .. })
        ));
        let r = isometry_preimage_check(&fam, &[e(16, 1)], &[16, 32, 64], Restriction::IsometricWindow)
            .unwrap();
        let dims: Vec<usize> = r.growth_trace.iter().map(|g| g.preimage_dim).collect();
        assert_eq!(dims, vec![8, 16, 32]);
        assert_eq!(r.verdict, Verdict::Growing);
    }

    #[test]
    fn right_shift_preimages_stay_inside_v() {
        let fam = FamilyDescriptor::RightShiftPowers { n_max: 3.into() }
            .build(BasisIndexing::natural(12))
            .unwrap();
        let v: Vec<HVector> = (1..=4).map(|i| e(12, i)).collect();
        let r = isometry_preimage_check(&fam, &v, &[12, 24, 48], Restriction::IsometricWindow).unwrap();
        assert!(r.growth_trace.iter().all(|g| g.preimage_dim == 0));
        assert_eq!(r.verdict, Verdict::Stabilizing);
    }
}
