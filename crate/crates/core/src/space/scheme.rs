use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::sample::{derive_seed, sample_unit_ball};
use super::{BasisIndexing, HVector, IndexKind};
use crate::{Error, Result, C64};

/// Largest accepted `net_depth`. Net sizes grow like `n^(2 dim F_n)`.
pub const MAX_NET_DEPTH: usize = 4;

/// Greedy nets are built to this fraction of the `1/n` radius.
const NET_MARGIN: f64 = 0.8;
const NET_POOL: usize = 20_000;
const NET_CERT: usize = 10_000;
const NET_CAP: usize = 4096;

const SEED_TAG_POOL: u64 = 0x6e65_7470;
const SEED_TAG_CERT: u64 = 0x6365_7274;

/// The stored prefix `h_1..h_M` of the dense sequence defining `rho` and `d`,
/// with the schedule `a_n` of positions where `h_{a_n} = e_n`.
#[derive(Clone, Debug, Serialize)]
pub struct MetricScheme {
    indexing: BasisIndexing,
    basis_count: usize,
    net_depth: usize,
    seed: u64,
    h_seq: Vec<HVector>,
    schedule: Vec<usize>,
    net_quality: Vec<f64>,
    tail_bound: f64,
    #[serde(skip)]
    coeffs: DMatrix<C64>,
    #[serde(skip)]
    weights: Vec<f64>,
}

/// Scheme description without the stored vectors.
#[derive(Clone, Debug, Serialize)]
pub struct SchemeSummary {
    pub id: String,
    pub indexing: BasisIndexing,
    pub basis_count: usize,
    pub net_depth: usize,
    pub seed: u64,
    pub sequence_len: usize,
    pub schedule: Vec<usize>,
    pub net_quality: Vec<f64>,
    pub tail_bound: f64,
    pub c0: f64,
}

/// Storage span of the stage-`n` subspace: `F_n` for natural indexing and
/// `span{e_-n..e_n}` for integer indexing (both are storage prefixes).
fn stage_span(kind: IndexKind, n: usize) -> usize {
    match kind {
        IndexKind::Natural => n,
        IndexKind::Integer => 2 * n + 1,
    }
}

fn dist2(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum()
}

/// Greedy farthest-point net of the unit ball of `C^span` around the points
/// already present, then sample-certified and patched at radius `r`.
/// Returns the added points and the certified covering radius.
fn greedy_net(
    existing: &[Vec<C64>],
    span: usize,
    level: usize,
    radius: f64,
    seed: u64,
) -> Result<(Vec<Vec<C64>>, f64)> {
    let to_coords = |v: HVector| -> Vec<C64> { v.coords().iter().copied().collect() };
    let pool: Vec<Vec<C64>> = sample_unit_ball(span, NET_POOL, derive_seed(seed, SEED_TAG_POOL, level as u64))?
        .into_iter()
        .map(to_coords)
        .collect();
    let cert: Vec<Vec<C64>> = sample_unit_ball(span, NET_CERT, derive_seed(seed, SEED_TAG_CERT, level as u64))?
        .into_iter()
        .map(to_coords)
        .collect();

    let r2 = radius * radius;
    let nearest = |pts: &[Vec<C64>], centers: &[Vec<C64>]| -> Vec<f64> {
        pts.iter()
            .map(|p| {
                centers
                    .iter()
                    .map(|c| dist2(p, c))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    };

    let mut added: Vec<Vec<C64>> = Vec::new();
    let mut pool_d = nearest(&pool, existing);
    let mut cert_d = nearest(&cert, existing);

    let mut insert = |p: Vec<C64>, pool_d: &mut Vec<f64>, cert_d: &mut Vec<f64>| -> Result<()> {
        for (q, d) in pool.iter().zip(pool_d.iter_mut()) {
            *d = d.min(dist2(q, &p));
        }
        for (q, d) in cert.iter().zip(cert_d.iter_mut()) {
            *d = d.min(dist2(q, &p));
        }
        added.push(p);
        if added.len() > NET_CAP {
            return Err(Error::NetBudgetExceeded { level, cap: NET_CAP });
        }
        Ok(())
    };

    loop {
        let (k, d) = argmax(&pool_d);
        if d <= r2 {
            break;
        }
        let p = pool[k].clone();
        insert(p, &mut pool_d, &mut cert_d)?;
    }
    loop {
        let (k, d) = argmax(&cert_d);
        if d <= r2 {
            break;
        }
        let p = cert[k].clone();
        insert(p, &mut pool_d, &mut cert_d)?;
    }
    let quality = argmax(&cert_d).1.sqrt();
    Ok((added, quality))
}

fn argmax(v: &[f64]) -> (usize, f64) {
    v.iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (k, d)| if d > acc.1 { (k, d) } else { acc })
}

/// Build the dense-sequence scheme.
///
/// For each `n = 1..=basis_count` the sequence receives `e_n` (at position
/// `a_n`), then for integer indexing `e_0` (stage 1) and `e_-n`, then for
/// `n <= net_depth` a greedy `1/n`-net of the unit ball of the stage span.
pub fn build_scheme(
    indexing: BasisIndexing,
    basis_count: usize,
    net_depth: usize,
    seed: u64,
) -> Result<MetricScheme> {
    if basis_count == 0 {
        return Err(Error::invalid("scheme needs at least one basis vector"));
    }
    if basis_count > indexing.positive_count() {
        return Err(Error::invalid(format!(
            "scheme references e_{basis_count}, absent from a truncation of dimension {}",
            indexing.dim()
        )));
    }
    if net_depth > MAX_NET_DEPTH {
        return Err(Error::invalid(format!(
            "net_depth {net_depth} > {MAX_NET_DEPTH}: net size grows exponentially in n"
        )));
    }
    if net_depth > basis_count {
        return Err(Error::invalid("net_depth must not exceed the basis count"));
    }
    let dim = indexing.dim();
    let kind = indexing.kind();

    let mut h_seq: Vec<HVector> = Vec::new();
    let mut schedule = Vec::with_capacity(basis_count);
    let mut net_quality = Vec::with_capacity(net_depth);

    for n in 1..=basis_count {
        let index = n as i64;
        schedule.push(h_seq.len() + 1);
        h_seq.push(indexing.basis_vector(index).expect("checked above"));
        if kind == IndexKind::Integer {
            if n == 1 {
                h_seq.push(indexing.basis_vector(0).expect("e_0 is always retained"));
            }
            if let Some(e) = indexing.basis_vector(-index) {
                h_seq.push(e);
            }
        }
        if n <= net_depth {
            let span = stage_span(kind, n);
            if span > dim {
                return Err(Error::invalid(format!(
                    "net for level {n} needs {span} retained positions, truncation has {dim}"
                )));
            }
            let existing: Vec<Vec<C64>> = h_seq
                .iter()
                .map(|h| h.coords().rows(0, span).iter().copied().collect())
                .collect();
            let (added, quality) = greedy_net(&existing, span, n, NET_MARGIN / n as f64, seed)?;
            for p in added {
                let mut v = DVector::zeros(dim);
                for (k, z) in p.into_iter().enumerate() {
                    v[k] = z;
                }
                h_seq.push(HVector::from_dvector(v));
            }
            net_quality.push(quality);
        }
    }

    let m = h_seq.len();
    let coeffs = DMatrix::from_fn(m, dim, |i, p| h_seq[i].coords()[p].conj());
    let weights = (1..=m).map(|i| 0.5f64.powi(i as i32)).collect();
    Ok(MetricScheme {
        indexing,
        basis_count,
        net_depth,
        seed,
        tail_bound: 2.0 * 0.5f64.powi(m as i32),
        h_seq,
        schedule,
        net_quality,
        coeffs,
        weights,
    })
}

impl MetricScheme {
    pub fn indexing(&self) -> &BasisIndexing {
        &self.indexing
    }

    pub fn dim(&self) -> usize {
        self.indexing.dim()
    }

    pub fn basis_count(&self) -> usize {
        self.basis_count
    }

    pub fn net_depth(&self) -> usize {
        self.net_depth
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `h_1..h_M`.
    pub fn sequence(&self) -> &[HVector] {
        &self.h_seq
    }

    pub fn len(&self) -> usize {
        self.h_seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h_seq.is_empty()
    }

    /// 1-based positions `a_1 < a_2 < ...`.
    pub fn schedule(&self) -> &[usize] {
        &self.schedule
    }

    pub fn net_quality(&self) -> &[f64] {
        &self.net_quality
    }

    /// `2^(1-M)`, the bound on the series tail omitted by `rho`.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// `c_0 = 2^-a_1`: the contribution of the term `h_{a_1} = e_1`.
    pub fn c0(&self) -> f64 {
        self.weights[self.schedule[0] - 1]
    }

    pub fn id(&self) -> String {
        let kind = match self.indexing.kind() {
            IndexKind::Natural => "natural",
            IndexKind::Integer => "integer",
        };
        format!(
            "{kind}-{}-L{}-net{}-seed{}",
            self.dim(),
            self.basis_count,
            self.net_depth,
            self.seed
        )
    }

    pub fn summary(&self) -> SchemeSummary {
        SchemeSummary {
            id: self.id(),
            indexing: self.indexing,
            basis_count: self.basis_count,
            net_depth: self.net_depth,
            seed: self.seed,
            sequence_len: self.len(),
            schedule: self.schedule.clone(),
            net_quality: self.net_quality.clone(),
            tail_bound: self.tail_bound,
            c0: self.c0(),
        }
    }

    /// Rows are `h_i^H`, so `(C z)_i = <z, h_i>`.
    pub(crate) fn coeffs(&self) -> &DMatrix<C64> {
        &self.coeffs
    }

    /// `w_i = 2^-i`.
    pub(crate) fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `sum_i |c_i| w_i` for a coefficient vector `c = C z`.
    pub(crate) fn weighted_l1(&self, c: impl IntoIterator<Item = C64>) -> f64 {
        c.into_iter()
            .zip(&self.weights)
            .map(|(z, w)| z.norm() * w)
            .sum()
    }

    /// `sum_{a,b} w_a w_b |W_ab|` for `W = C Z C^H`.
    pub(crate) fn weighted_l1_matrix(&self, w: &DMatrix<C64>) -> f64 {
        let mut total = 0.0;
        for b in 0..w.ncols() {
            let wb = self.weights[b];
            if wb == 0.0 {
                break;
            }
            let mut col = 0.0;
            for a in 0..w.nrows() {
                col += w[(a, b)].norm() * self.weights[a];
            }
            total += col * wb;
        }
        total
    }

    /// `rho`-seminorm of a difference vector.
    pub(crate) fn vector_seminorm(&self, z: &DVector<C64>) -> f64 {
        self.weighted_l1((&self.coeffs * z).iter().copied())
    }

    /// `d`-seminorm of a difference operator.
    pub(crate) fn operator_seminorm(&self, z: &DMatrix<C64>) -> f64 {
        let w = &self.coeffs * z * self.coeffs.adjoint();
        self.weighted_l1_matrix(&w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn support_within(h: &HVector, span: usize) -> bool {
        h.coords().iter().skip(span).all(|z| *z == C64::new(0.0, 0.0))
    }

    #[test]
    fn natural_schedule_hits_basis_vectors() {
        let s = build_scheme(BasisIndexing::natural(8), 3, 1, 5).unwrap();
        let ix = s.indexing();
        assert_eq!(s.schedule().len(), 3);
        assert!(s.schedule().windows(2).all(|w| w[0] < w[1]));
        for (n, a) in s.schedule().iter().enumerate() {
            assert_eq!(s.sequence()[a - 1], ix.basis_vector(n as i64 + 1).unwrap());
        }
        assert_eq!(s.net_quality().len(), 1);
        assert!(s.net_quality()[0] <= 1.0);
    }

    #[test]
    fn integer_containment() {
        let s = build_scheme(BasisIndexing::integer(15), 3, 1, 2).unwrap();
        let ix = s.indexing();
        for n in 1..=3usize {
            let a = s.schedule()[n - 1];
            assert_eq!(s.sequence()[a - 1], ix.basis_vector(n as i64).unwrap());
            for h in &s.sequence()[..a] {
                assert!(support_within(h, 2 * n + 1));
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(build_scheme(BasisIndexing::natural(4), 5, 0, 0).is_err());
        assert!(build_scheme(BasisIndexing::natural(8), 6, 5, 0).is_err());
        assert!(build_scheme(BasisIndexing::natural(8), 2, 3, 0).is_err());
        assert!(build_scheme(BasisIndexing::integer(8), 5, 0, 0).is_err());
        assert!(build_scheme(BasisIndexing::natural(8), 0, 0, 0).is_err());
    }

    #[test]
    fn tail_bound_and_c0() {
        let s = build_scheme(BasisIndexing::natural(6), 6, 0, 0).unwrap();
        assert_eq!(s.len(), 6);
        assert_eq!(s.tail_bound(), 2.0 * 0.5f64.powi(6));
        assert_eq!(s.c0(), 0.5);
    }
}
