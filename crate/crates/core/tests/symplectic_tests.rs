mod common;

use std::sync::Arc;

use coiso_core::symplectic_model::{
    form_matrix, gotay_local_model, invert_affine_pencil, pencil_residual_vanishes, rational_inverse,
    symplectic_to_poisson, AffinePencil, NumericSymplecticInverse, PresymplecticData,
};
use coiso_core::{
    rat, ChartSpec, CoisoError, DifferentialForm, NumericBivector, PoissonStatus, Rational, RingElement,
    SubbundleSpec,
};
use common::*;
use proptest::prelude::*;
use rand::Rng;

fn random_rational_matrix(r: &mut impl Rng, n: usize) -> Vec<Vec<Rational>> {
    (0..n)
        .map(|_| (0..n).map(|_| rat(r.gen_range(-3..=3), r.gen_range(1..=2))).collect())
        .collect()
}

fn random_pencil(r: &mut impl Rng, n: usize, params: usize) -> AffinePencil {
    loop {
        let a = random_rational_matrix(r, n);
        if rational_inverse(&a).is_err() {
            continue;
        }
        let b = (0..params).map(|_| random_rational_matrix(r, n)).collect();
        return AffinePencil::new(a, b).unwrap();
    }
}

/// `M(λ)·R(λ) − I` computed entry by entry, independently of the library's matrix code.
fn residual(p: &AffinePencil, r: &[Vec<RingElement>], chart: &Arc<ChartSpec>) -> Vec<Vec<RingElement>> {
    let m = p.matrix(chart).unwrap();
    let n = m.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut s = RingElement::zero(chart);
                    for k in 0..n {
                        s = &s + &(&m[i][k] * &r[k][j].forget_order());
                    }
                    if i == j {
                        s = &s - &RingElement::one(chart);
                    }
                    s
                })
                .collect()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn random_pencils_invert_to_order_six(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_pencil(&mut r, 4, 2);
        let inv = invert_affine_pencil(&p, 6).unwrap();
        prop_assert!(pencil_residual_vanishes(&p, &inv).unwrap());
        for row in residual(&p, &inv.matrix, &inv.chart) {
            for e in row {
                prop_assert!(e.terms().all(|(m, _)| m.y_degree() > 6));
            }
        }
    }

    #[test]
    fn pencil_inverse_is_prefix_stable(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_pencil(&mut r, 3, 2);
        let low = invert_affine_pencil(&p, 3).unwrap();
        let high = invert_affine_pencil(&p, 5).unwrap();
        for (lr, hr) in low.matrix.iter().zip(&high.matrix) {
            for (l, h) in lr.iter().zip(hr) {
                prop_assert_eq!(l, &h.to_jet(3));
            }
        }
    }

    /// `Ω = Σ dq_i∧dp_i + d(Σ_{j<k} f_jk(q) p_j dq_k)` is closed, fibrewise
    /// affine, and unitriangular at `p = 0`.
    #[test]
    fn y_linear_forms_invert_to_order_four(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(2..=3);
        let base: Vec<(String, bool)> = (1..=n).map(|i| (format!("q{i}"), true)).collect();
        let fibre: Vec<String> = (1..=n).map(|i| format!("p{i}")).collect();
        let c = ChartSpec::bundle(&base, &fibre).unwrap();
        let mut omega = DifferentialForm::zero(&c, 2);
        for i in 0..n {
            omega = omega.try_add(&DifferentialForm::from_indices(&c, &[i, n + i], RingElement::one(&c)).unwrap()).unwrap();
        }
        let mut primitive = DifferentialForm::zero(&c, 1);
        for j in 0..n {
            for k in (j + 1)..n {
                let f = random_real_ring(&mut r, &c, 2, 0);
                let pj = RingElement::variable(&c, &fibre[j]).unwrap();
                primitive = primitive.try_add(&DifferentialForm::from_indices(&c, &[k], &f * &pj).unwrap()).unwrap();
            }
        }
        let omega = omega.try_add(&primitive.de_rham_d()).unwrap();
        prop_assert!(omega.is_in_omega_le(1));
        let out = symplectic_to_poisson(&omega, 4).unwrap();
        let w = form_matrix(&omega).unwrap();
        let pm = out.pi.bivector_coefficients().unwrap();
        let dim = c.dim();
        // W · π = −I + O(y⁵)
        for i in 0..dim {
            for j in 0..dim {
                let mut s = RingElement::zero(&c);
                for k in 0..dim {
                    s = &s + &(&w[i][k] * &pm[k][j].forget_order());
                }
                if i == j {
                    s = &s + &RingElement::one(&c);
                }
                prop_assert!(s.terms().all(|(m, _)| m.y_degree() > 4), "entry ({},{}) = {}", i, j, s);
            }
        }
        prop_assert!(out.pi.schouten(&out.pi).unwrap().is_zero());
        prop_assert!(out.pi.projection_p().is_zero());
        if primitive.is_zero() {
            prop_assert_eq!(out.poisson, PoissonStatus::Exact);
        }
    }
}

#[test]
fn scalar_pencil_is_a_geometric_series() {
    for (a, b) in [(1, 1), (2, 3), (-3, 5)] {
        let p = AffinePencil::new(vec![vec![rat(a, 1)]], vec![vec![vec![rat(b, 1)]]]).unwrap();
        let inv = invert_affine_pencil(&p, 6).unwrap();
        let l = RingElement::variable(&inv.chart, "l1").unwrap();
        let mut expected = RingElement::zero(&inv.chart);
        for k in 0..=6u32 {
            // (−b/a)^k / a
            let mut c = rat(1, a);
            for _ in 0..k {
                c *= rat(-b, a);
            }
            expected = &expected + &l.pow(k).scale_rational(&c);
        }
        assert_eq!(inv.matrix[0][0], expected.to_jet(6));
    }
}

#[test]
fn singular_pencil_is_rejected() {
    let a = vec![vec![rat(1, 1), rat(2, 1)], vec![rat(2, 1), rat(4, 1)]];
    assert!(matches!(AffinePencil::new(a, vec![]), Err(CoisoError::Pencil(_))));
}

fn gotay_check(omega_c: DifferentialForm, kernel: &[&str], fibre: &[&str]) -> DifferentialForm {
    let base = omega_c.chart().clone();
    let data = PresymplecticData::new(omega_c.clone(), SubbundleSpec::new(&base, kernel).unwrap()).unwrap();
    let model = gotay_local_model(&data, fibre).unwrap();
    let pulled = model.omega.pullback_zero_section();
    if omega_c.is_zero() {
        assert!(pulled.is_zero());
    } else {
        assert_eq!(pulled, omega_c);
    }
    assert!(model.omega.fibrewise_degrees().iter().all(|&d| d <= 1));
    assert!(model.omega.de_rham_d().is_zero());
    model.omega
}

#[test]
fn gotay_on_zero_form_is_canonical() {
    let base = ChartSpec::base_only(&[("q1", true), ("q2", true)]).unwrap();
    let omega = gotay_check(DifferentialForm::zero(&base, 2), &["q1", "q2"], &["p1", "p2"]);
    let c = omega.chart().clone();
    let canonical = DifferentialForm::basis(&c, &["q1", "p1"], RingElement::one(&c))
        .unwrap()
        .try_add(&DifferentialForm::basis(&c, &["q2", "p2"], RingElement::one(&c)).unwrap())
        .unwrap();
    assert_eq!(omega, canonical);
}

#[test]
fn gotay_on_t4() {
    let base = ChartSpec::base_only(&[("y1", true), ("y2", true), ("q1", true), ("q2", true)]).unwrap();
    let w = DifferentialForm::basis(&base, &["y1", "y2"], RingElement::one(&base)).unwrap();
    let omega = gotay_check(w, &["q1", "q2"], &["p1", "p2"]);
    assert_eq!(omega.to_string(), "dy1 /\\ dy2 + dq1 /\\ dp1 + dq2 /\\ dp2");
    let out = symplectic_to_poisson(&omega, 6).unwrap();
    assert_eq!(out.poisson, PoissonStatus::Exact);
    assert_eq!(out.pi, t4_pi(omega.chart()));
}

#[test]
fn gotay_on_t3_is_nondegenerate() {
    let base = ChartSpec::base_only(&[("y1", true), ("y2", true), ("q", true)]).unwrap();
    let w = DifferentialForm::basis(&base, &["y1", "y2"], RingElement::one(&base)).unwrap();
    let omega = gotay_check(w, &["q"], &["p"]);
    let num = NumericSymplecticInverse::new(&omega).unwrap();
    let m = num.matrix_at(&[0.1, 0.2, 0.3, 0.4]).unwrap();
    assert!((m.determinant() - 1.0).abs() < 1e-12);
}

#[test]
fn presymplectic_data_rejects_open_forms() {
    let base = ChartSpec::base_only(&[("y1", true), ("y2", true), ("q", true)]).unwrap();
    let s = RingElement::sin(&base, "q", 1).unwrap();
    let w = DifferentialForm::basis(&base, &["y1", "y2"], s).unwrap();
    let r = PresymplecticData::new(w, SubbundleSpec::new(&base, &["q"]).unwrap());
    assert!(matches!(r, Err(CoisoError::NotClosed)));
}

#[test]
fn jet_inverse_agrees_with_pointwise_inverse() {
    let omega = twisted_cotangent_form();
    let out = symplectic_to_poisson(&omega, 8).unwrap();
    assert_eq!(out.poisson, PoissonStatus::ToOrder(7));
    let exact = NumericSymplecticInverse::new(&omega).unwrap();
    for point in [[0.1, 0.7, 0.01, -0.02], [0.35, 0.2, -0.015, 0.005]] {
        let a = exact.matrix_at(&point).unwrap();
        let b = out.pi.matrix_at(&point).unwrap();
        assert!((a - b).abs().max() < 1e-10);
    }
}

#[test]
fn degenerate_forms_are_rejected() {
    let c = ChartSpec::bundle(&[("q1", true), ("q2", true)], &["p1", "p2"]).unwrap();
    let omega = DifferentialForm::basis(&c, &["q1", "p1"], RingElement::one(&c)).unwrap();
    assert!(matches!(symplectic_to_poisson(&omega, 4), Err(CoisoError::Degenerate)));
}
