use std::sync::OnceLock;

use nalgebra::DMatrix;
use proptest::prelude::*;
use uec_core::operators::BOperator;
use uec_core::space::{
    build_scheme, d_metric, norm_ball_project, rho, sample_unit_ball, BasisIndexing, HVector,
    MetricScheme,
};
use uec_core::C64;

fn scheme() -> &'static MetricScheme {
    static SCHEME: OnceLock<MetricScheme> = OnceLock::new();
    SCHEME.get_or_init(|| build_scheme(BasisIndexing::natural(6), 6, 2, 11).unwrap())
}

/// Straight summation over the stored sequence.
fn rho_direct(x: &HVector, y: &HVector, s: &MetricScheme) -> f64 {
    let z = x.sub(y);
    s.sequence()
        .iter()
        .enumerate()
        .map(|(i, h)| z.inner(h).norm() * 0.5f64.powi(i as i32 + 1))
        .sum()
}

fn d_direct(a: &BOperator, b: &BOperator, s: &MetricScheme) -> f64 {
    let z = a.matrix() - b.matrix();
    let mut total = 0.0;
    for (i, hi) in s.sequence().iter().enumerate() {
        let zh = &z * hi.coords();
        for (j, hj) in s.sequence().iter().enumerate() {
            total += hj.coords().dotc(&zh).norm() * 0.5f64.powi((i + j) as i32 + 2);
        }
    }
    total
}

fn ball_vector(dim: usize) -> impl Strategy<Value = HVector> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim).prop_map(|c| {
        let v = HVector::from_coords(c.into_iter().map(|(re, im)| C64::new(re, im)).collect());
        norm_ball_project(&v).unwrap()
    })
}

fn contraction(dim: usize) -> impl Strategy<Value = BOperator> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim).prop_map(move |c| {
        let m = DMatrix::from_iterator(dim, dim, c.into_iter().map(|(re, im)| C64::new(re, im)));
        let f = m.norm().max(1.0);
        BOperator::new(m / C64::new(f, 0.0)).unwrap()
    })
}

proptest! {
    #[test]
    fn rho_is_a_dominated_metric(x in ball_vector(6), y in ball_vector(6), z in ball_vector(6)) {
        let s = scheme();
        let xy = rho(&x, &y, s).unwrap().value;
        prop_assert_eq!(xy, rho(&y, &x, s).unwrap().value);
        prop_assert!(xy >= 0.0);
        let xz = rho(&x, &z, s).unwrap().value;
        let zy = rho(&z, &y, s).unwrap().value;
        prop_assert!(xy <= xz + zy + 1e-12);
        prop_assert!(xy <= x.sub(&y).norm() + 1e-15);
        prop_assert!((xy - rho_direct(&x, &y, s)).abs() <= 1e-12);
    }

    #[test]
    fn d_is_a_metric(a in contraction(6), b in contraction(6), c in contraction(6)) {
        let s = scheme();
        let ab = d_metric(&a, &b, s).unwrap().value;
        prop_assert_eq!(ab, d_metric(&b, &a, s).unwrap().value);
        let ac = d_metric(&a, &c, s).unwrap().value;
        let cb = d_metric(&c, &b, s).unwrap().value;
        prop_assert!(ab <= ac + cb + 1e-12);
        prop_assert!((ab - d_direct(&a, &b, s)).abs() <= 1e-12);
    }

    #[test]
    fn projection_is_idempotent(x in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..8)) {
        let v = HVector::from_coords(x.into_iter().map(|(re, im)| C64::new(re, im)).collect());
        let p = norm_ball_project(&v).unwrap();
        prop_assert!(p.norm() <= 1.0 + 1e-12);
        prop_assert_eq!(norm_ball_project(&p).unwrap(), p);
    }
}

#[test]
fn metric_values_carry_tail_bounds() {
    let s = scheme();
    let x = HVector::unit(6, 0);
    let r = rho(&x, &HVector::zeros(6), s).unwrap();
    assert!(r.value >= s.c0());
    assert_eq!(r.truncation_error, s.tail_bound());
    let d = d_metric(&BOperator::identity(6), &BOperator::zeros(6), s).unwrap();
    assert!(d.value > 0.0);
    assert!((d.value - d_direct(&BOperator::identity(6), &BOperator::zeros(6), s)).abs() < 1e-13);
    assert_eq!(d.truncation_error, 2.0 * s.tail_bound());
}

#[test]
fn rho_zero_only_at_coincidence() {
    let s = scheme();
    let pts = sample_unit_ball(6, 200, 3).unwrap();
    for w in pts.windows(2) {
        let r = rho(&w[0], &w[1], s).unwrap().value;
        assert!(r > 0.0);
        assert_eq!(rho(&w[0], &w[0], s).unwrap().value, 0.0);
    }
}

#[test]
fn dimension_mismatch_is_rejected() {
    let s = scheme();
    assert!(rho(&HVector::zeros(5), &HVector::zeros(6), s).is_err());
    assert!(d_metric(&BOperator::identity(7), &BOperator::identity(7), s).is_err());
}

#[test]
fn sampling_mixture_statistics() {
    let pts = sample_unit_ball(2, 10_000, 42).unwrap();
    assert!(pts.iter().all(|p| p.norm() <= 1.0 + 1e-12));
    let small = pts.iter().filter(|p| p.norm() < 0.5).count() as f64 / 1e4;
    assert!((small - 0.125).abs() <= 0.02, "fraction {small}");
    assert_eq!(pts, sample_unit_ball(2, 10_000, 42).unwrap());
}

fn support_within(h: &HVector, span: usize) -> bool {
    h.coords().iter().skip(span).all(|z| *z == C64::new(0.0, 0.0))
}

#[test]
fn natural_schemes_nest_in_f_n() {
    let s = build_scheme(BasisIndexing::natural(10), 5, 2, 17).unwrap();
    let ix = s.indexing();
    assert!(s.schedule().windows(2).all(|w| w[0] < w[1]));
    for (n, &a) in s.schedule().iter().enumerate() {
        assert_eq!(s.sequence()[a - 1], ix.basis_vector(n as i64 + 1).unwrap());
        for h in &s.sequence()[..a] {
            assert!(support_within(h, n + 1));
        }
    }
    assert!(s.sequence().iter().all(|h| h.norm() <= 1.0 + 1e-12));
}

#[test]
fn nets_cover_sampled_points() {
    let s = build_scheme(BasisIndexing::natural(4), 3, 2, 5).unwrap();
    for n in 1..=2usize {
        let stop = s.schedule()[n];
        let pts = sample_unit_ball(n, 10_000, 1000 + n as u64).unwrap();
        let violations = pts
            .iter()
            .filter(|p| {
                let p = p.resized(4).unwrap();
                let nearest = s.sequence()[..stop]
                    .iter()
                    .map(|h| p.sub(h).norm())
                    .fold(f64::INFINITY, f64::min);
                nearest > 1.0 / n as f64
            })
            .count();
        assert_eq!(violations, 0, "level {n}");
        assert!(s.net_quality()[n - 1] <= 1.0 / n as f64);
    }
}

#[test]
fn prefixes_are_stable_under_truncation_growth() {
    let small = build_scheme(BasisIndexing::natural(6), 4, 2, 23).unwrap();
    let large = build_scheme(BasisIndexing::natural(12), 4, 2, 23).unwrap();
    assert_eq!(small.schedule(), large.schedule());
    for (a, b) in small.sequence().iter().zip(large.sequence()) {
        assert_eq!(&a.resized(12).unwrap(), b);
    }
    let zs = build_scheme(BasisIndexing::integer(9), 3, 1, 4).unwrap();
    let zl = build_scheme(BasisIndexing::integer(21), 3, 1, 4).unwrap();
    for (a, b) in zs.sequence().iter().zip(zl.sequence()) {
        assert_eq!(&a.resized(21).unwrap(), b);
    }
}

#[test]
fn integer_scheme_spreads_shift_pairs_apart() {
    let ix = BasisIndexing::integer(128);
    let s = build_scheme(ix, 63, 0, 0).unwrap();
    let e = |k: i64| ix.basis_vector(k).unwrap();
    let gaps: Vec<f64> = (1..=40).map(|k| rho(&e(k), &e(k + 1), &s).unwrap().value).collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]));
    assert!(gaps.iter().any(|g| *g < 1e-3));
}
