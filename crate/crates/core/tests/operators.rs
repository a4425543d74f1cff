use std::f64::consts::PI;

use nalgebra::DMatrix;
use proptest::prelude::*;
use uec_core::linalg::{max_abs, polar_factor};
use uec_core::operators::{
    adjoint, apply_supermap, left_shift, mult_group_element, power_family, rank_one, right_shift,
    supermap_family, BOperator, FamilyDescriptor, OperatorFamily, SuperMap, SuperMapKind,
};
use uec_core::space::{build_scheme, d_metric, rho, BasisIndexing, HVector};
use uec_core::C64;

fn matrix(dim: usize, scale: f64) -> impl Strategy<Value = DMatrix<C64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim).prop_map(move |c| {
        let m = DMatrix::from_iterator(dim, dim, c.into_iter().map(|(re, im)| C64::new(re, im)));
        let f = m.norm().max(1e-12);
        m * C64::new(scale / f, 0.0)
    })
}

fn unitary(dim: usize) -> impl Strategy<Value = BOperator> {
    matrix(dim, 1.0).prop_map(|m| {
        let n = m.nrows();
        let shifted = m + DMatrix::identity(n, n) * C64::new(0.3, 0.0);
        BOperator::new(polar_factor(&shifted).1).unwrap()
    })
}

fn sorted_singular_values(m: &DMatrix<C64>) -> Vec<f64> {
    uec_core::linalg::singular_values(m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn super_maps_preserve_the_unit_ball(t in matrix(5, 1.0), a in matrix(5, 1.0), u in unitary(5)) {
        let t = BOperator::new(t).unwrap();
        let a = BOperator::new(a).unwrap();
        for m in [
            SuperMap::left_mult("T", t.clone()),
            SuperMap::right_mult("T", t.clone()),
            SuperMap::conjugation("u", &u, false).unwrap(),
        ] {
            prop_assert!(apply_supermap(&m, &a).unwrap().sigma_max() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn conjugation_preserves_singular_values(a in matrix(6, 0.9), u in unitary(6)) {
        let a = BOperator::new(a).unwrap();
        let m = SuperMap::conjugation("u", &u, false).unwrap();
        let b = m.apply(&a).unwrap();
        let (sa, sb) = (sorted_singular_values(a.matrix()), sorted_singular_values(b.matrix()));
        for (x, y) in sa.iter().zip(&sb) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
        let rank = |s: &[f64]| s.iter().filter(|v| **v > 1e-9).count();
        prop_assert_eq!(rank(&sa), rank(&sb));
    }

    #[test]
    fn adjoint_is_an_involution(t in matrix(5, 1.0)) {
        let t = BOperator::new(t).unwrap();
        prop_assert_eq!(adjoint(&adjoint(&t)), t.clone());
        let (s, sa) = (t.singular_values(), adjoint(&t).singular_values());
        for (x, y) in s.iter().zip(&sa) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn rank_one_trace_and_action(c in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 6)) {
        let x = uec_core::space::norm_ball_project(&HVector::from_coords(
            c.into_iter().map(|(re, im)| C64::new(re, im)).collect(),
        ))
        .unwrap();
        let p = rank_one(&x, &x).unwrap();
        let n2 = x.norm().powi(2);
        prop_assert!((p.matrix().trace() - C64::new(n2, 0.0)).norm() <= 1e-12);
        let px = p.apply(&x).unwrap();
        prop_assert!(px.sub(&x.scale(C64::new(n2, 0.0))).norm() <= 1e-12);
    }

    #[test]
    fn conjugated_projection_is_projection_onto_image(
        c in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 5),
        u in unitary(5),
    ) {
        let x = uec_core::space::norm_ball_project(&HVector::from_coords(
            c.into_iter().map(|(re, im)| C64::new(re, im)).collect(),
        ))
        .unwrap();
        let m = SuperMap::conjugation("u", &u, false).unwrap();
        let lhs = m.apply(&rank_one(&x, &x).unwrap()).unwrap();
        let ux = u.apply(&x).unwrap();
        let rhs = rank_one(&ux, &ux).unwrap();
        prop_assert!(max_abs(&(lhs.matrix() - rhs.matrix())) <= 1e-12);
    }

    #[test]
    fn left_then_right_multiplication_is_a_triple_product(
        t in matrix(4, 1.0), s in matrix(4, 1.0), a in matrix(4, 1.0),
    ) {
        let (t, s, a) = (BOperator::new(t).unwrap(), BOperator::new(s).unwrap(), BOperator::new(a).unwrap());
        let composed = SuperMap::left_mult("T", t.clone())
            .compose(&SuperMap::right_mult("S", s.clone()))
            .unwrap();
        let direct = t.matrix() * a.matrix() * s.matrix();
        prop_assert!(max_abs(&(composed.apply(&a).unwrap().matrix() - direct)) <= 1e-12);
    }
}

#[test]
fn right_shift_algebra() {
    let ix = BasisIndexing::natural(12);
    let s = right_shift(&ix);
    for i in 0..12 {
        for j in 0..12 {
            let want = if i == j + 1 { 1.0 } else { 0.0 };
            assert_eq!(s.entry(i, j), C64::new(want, 0.0));
        }
    }
    let sts = s.adjoint().compose(&s).unwrap();
    for j in 0..11 {
        let e = HVector::unit(12, j);
        assert_eq!(sts.apply(&e).unwrap(), e);
    }
    assert_eq!(s.adjoint(), left_shift(&ix));
    let fam = power_family(&s, ix, &[1, 2, 3, 4, 5], "S_r").unwrap();
    for (n, m) in (1..=5).zip(fam.members()) {
        for i in 0..12 {
            for j in 0..12 {
                assert_eq!(m.op.entry(i, j).re, if i == j + n { 1.0 } else { 0.0 });
            }
        }
    }
    let id = power_family(&s, ix, &[0], "S_r").unwrap();
    assert!(id.members()[0].op.is_identity(0.0));
}

#[test]
fn left_shift_powers_add_inside_the_window() {
    let ix = BasisIndexing::integer(41);
    let s = left_shift(&ix);
    for (a, b) in [(1u32, 2u32), (3, 4), (5, 7)] {
        let lhs = s.pow(a).compose(&s.pow(b)).unwrap();
        let rhs = s.pow(a + b);
        for k in -8i64..=8 {
            let e = ix.basis_vector(k).unwrap();
            assert_eq!(lhs.apply(&e).unwrap(), rhs.apply(&e).unwrap());
            assert_eq!(rhs.apply(&e).unwrap(), ix.basis_vector(k - (a + b) as i64).unwrap());
        }
    }
}

/// `(1/2pi) int_{-pi}^{pi} e^{i s x} dx` by composite Simpson.
fn quadrature(s: f64) -> f64 {
    let n = 20_000;
    let h = 2.0 * PI / n as f64;
    let f = |x: f64| (s * x).cos();
    let mut acc = f(-PI) + f(PI);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(-PI + k as f64 * h);
    }
    acc * h / 3.0 / (2.0 * PI)
}

#[test]
fn mult_group_entries_match_quadrature() {
    let u = mult_group_element(0.5, 16);
    let ix = BasisIndexing::integer(16);
    for row in 0..16 {
        for col in 0..16 {
            let s = 0.5 + (ix.index_at(col) - ix.index_at(row)) as f64;
            assert!((u.entry(row, col).re - quadrature(s)).abs() < 1e-10);
            assert_eq!(u.entry(row, col).im, 0.0);
        }
    }
    assert!((u.entry(0, 0).re - 0.636_619_772_367_581_3).abs() < 1e-12);
    assert!(mult_group_element(0.0, 9).is_identity(0.0));
}

#[test]
fn integer_times_are_shifts() {
    let ix = BasisIndexing::integer(21);
    let u = mult_group_element(3.0, 21);
    for n in -7i64..=7 {
        let e = ix.basis_vector(n).unwrap();
        assert!(u.apply(&e).unwrap().sub(&ix.basis_vector(n + 3).unwrap()).norm() < 1e-15);
    }
}

#[test]
fn adjoint_matches_reversed_time() {
    for t in [-1.0, -0.3, 0.25, 0.5, 1.0] {
        let diff = adjoint(&mult_group_element(t, 64)).matrix() - mult_group_element(-t, 64).matrix();
        assert!(max_abs(&diff) <= 1e-6);
    }
}

/// Largest entry of `u_s u_t - u_{s+t}` over modes with `|n| <= dim / 4`.
fn group_law_defect(s: f64, t: f64, dim: usize) -> f64 {
    let ix = BasisIndexing::integer(dim);
    let prod = mult_group_element(s, dim).compose(&mult_group_element(t, dim)).unwrap();
    let diff = prod.matrix() - mult_group_element(s + t, dim).matrix();
    let central: Vec<usize> = (0..dim).filter(|&p| ix.index_at(p).unsigned_abs() as usize <= dim / 4).collect();
    central
        .iter()
        .flat_map(|&i| central.iter().map(move |&j| (i, j)))
        .map(|(i, j)| diff[(i, j)].norm())
        .fold(0.0, f64::max)
}

#[test]
fn group_law_leakage_shrinks_with_modes() {
    for (s, t) in [(0.3, 0.4), (0.5, 0.5), (-0.25, 0.7)] {
        let defects: Vec<f64> = [32, 64, 128].iter().map(|&n| group_law_defect(s, t, n)).collect();
        assert!(defects.windows(2).all(|w| w[1] < w[0]), "{defects:?}");
    }
}

#[test]
fn rank_one_projections_converge_weakly() {
    let s = build_scheme(BasisIndexing::natural(8), 8, 1, 3).unwrap();
    let x = HVector::unit(8, 0);
    let px = rank_one(&x, &x).unwrap();
    let mut last = (f64::INFINITY, f64::INFINITY);
    for n in 1..=14 {
        let th = 0.5f64.powi(n);
        let mut c = vec![C64::new(0.0, 0.0); 8];
        c[0] = C64::new(th.cos(), 0.0);
        c[4] = C64::new(th.sin(), 0.0);
        let xn = HVector::from_coords(c);
        let r = rho(&xn, &x, &s).unwrap().value;
        let d = d_metric(&rank_one(&xn, &xn).unwrap(), &px, &s).unwrap().value;
        assert!(r < last.0 && d < last.1);
        last = (r, d);
    }
    assert!(last.1 < 1e-3);
}

#[test]
fn supermap_families_follow_members() {
    let fam = FamilyDescriptor::ConjugationGroup { t_list: vec![-0.5, 0.0, 1.0] }
        .build(BasisIndexing::integer(32))
        .unwrap();
    let maps = supermap_family(&fam, SuperMapKind::Conjugation).unwrap();
    let labels: Vec<&str> = maps.iter().map(|m| m.label.as_str()).collect();
    assert_eq!(labels, fam.labels());
    assert!(maps[0].polar_corrected);
    assert!(!maps[1].polar_corrected);
    let a = rank_one(&HVector::unit(32, 0), &HVector::unit(32, 0)).unwrap();
    assert!(maps.iter().all(|m| m.apply(&a).unwrap().sigma_max() <= 1.0 + 1e-9));

    let sr = FamilyDescriptor::RightShiftPowers { n_max: 2.into() }
        .build(BasisIndexing::natural(6))
        .unwrap();
    assert!(supermap_family(&sr, SuperMapKind::Conjugation).is_err());
    let psi = supermap_family(&sr, SuperMapKind::LeftMult).unwrap();
    assert_eq!(psi[0].operand(), Some(&sr.members()[0].op));

    let tilted = DMatrix::from_fn(4, 4, |i, j| C64::new(if i == j { 0.9 } else { 0.0 }, 0.0));
    let fam = OperatorFamily::singleton(BasisIndexing::natural(4), "T", BOperator::new(tilted).unwrap()).unwrap();
    assert!(supermap_family(&fam, SuperMapKind::Conjugation).is_err());
}
