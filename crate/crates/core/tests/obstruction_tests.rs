mod common;

use coiso_core::{
    build_t4_example, fibre_torus_integral, leafwise_musical_inverse, obstructedness_certificate, product_leaf, rat,
    ChartSpec, CoisoAlgebra, CoisoError, DifferentialForm, MultiVectorField, PoissonStatus, RingElement, Scalar,
    SubbundleSpec, Verdict, VerticalSection,
};
use common::*;
use proptest::prelude::*;
use rand::Rng;

#[test]
fn t4_example_structure() {
    let ex = build_t4_example().unwrap();
    let pi = ex.algebra.pi();
    assert!(pi.terms().all(|(_, c)| c.is_constant()));
    assert!(pi.schouten(pi).unwrap().is_zero());
    assert!(pi.projection_p().is_zero());
    assert_eq!(ex.algebra.poisson_status(), PoissonStatus::Exact);
    assert_eq!(pi, &t4_pi(ex.algebra.chart()));
    assert_eq!(ex.section.render_components().unwrap(), "(sin(2*pi*y1), sin(2*pi*y2))");
    let base = ex.omega.chart().base_chart();
    let dy = DifferentialForm::basis(&base, &["y1", "y2"], RingElement::one(&base)).unwrap();
    assert_eq!(ex.omega.pullback_zero_section(), dy);
}

#[test]
fn t4_certificate_values() {
    let ex = build_t4_example().unwrap();
    let c = ex.algebra.chart().clone();
    let report = obstructedness_certificate(&ex.algebra, &ex.section).unwrap();
    assert!(report.closed);
    let k = report.kuranishi.as_ref().unwrap();
    assert_eq!(k.as_multivector(), &MultiVectorField::basis(&c, &["p1", "p2"], cos_cos(&c, 8)).unwrap());
    let beta = report.beta.as_ref().unwrap();
    assert_eq!(beta, &DifferentialForm::basis(&c, &["q1", "q2"], cos_cos(&c, 8)).unwrap());
    let f = report.integral.as_ref().unwrap();
    assert_eq!(f, &cos_cos(&c, 8));
    assert!(f.is_real());
    // π-exponent 2 and rational 8 on every term.
    for (_, s) in f.terms() {
        let (e, g) = s.as_monomial().unwrap();
        assert_eq!(e, 2);
        assert!(g.is_real());
    }
    assert_eq!(report.verdict, Verdict::Nonzero);
    let json = report.to_json();
    assert_eq!(json["integral"], "8*pi^2*cos(2*pi*y1)*cos(2*pi*y2)");
    assert_eq!(json["closed"], true);
    assert!(report.to_string().contains("verdict: NONZERO"));
}

#[test]
fn non_closed_sections_are_inconclusive() {
    let ex = build_t4_example().unwrap();
    let c = ex.algebra.chart().clone();
    let b = VerticalSection::from_components(&c, vec![RingElement::sin(&c, "q2", 1).unwrap(), RingElement::zero(&c)])
        .unwrap();
    let r = obstructedness_certificate(&ex.algebra, &b).unwrap();
    assert!(!r.closed);
    assert_eq!(r.verdict, Verdict::Inconclusive);
    assert!(r.integral.is_none());
}

#[test]
fn non_product_charts_are_rejected() {
    let c = ChartSpec::bundle(&[("x", false), ("q", true)], &["p"]).unwrap();
    let pi = MultiVectorField::basis(&c, &["q", "p"], RingElement::one(&c)).unwrap();
    let alg = CoisoAlgebra::new(pi).unwrap();
    assert!(matches!(product_leaf(&alg), Err(CoisoError::NotProductChart(_))));
    let t = ChartSpec::bundle(&[("q", true)], &["p"]).unwrap();
    let s = RingElement::sin(&t, "q", 1).unwrap();
    let pi = MultiVectorField::basis(&t, &["q", "p"], &RingElement::one(&t) + &s.scale_rational(&rat(1, 2)))
        .unwrap();
    let alg = CoisoAlgebra::new(pi).unwrap();
    assert!(matches!(product_leaf(&alg), Err(CoisoError::NotProductChart(_))));
}

#[test]
fn generalises_to_other_product_charts() {
    // T¹_y × T¹_q × ℝ_p with no coupling: every section is closed and λ2 = 0.
    let c = ChartSpec::bundle(&[("y", true), ("q", true)], &["p"]).unwrap();
    let pi = MultiVectorField::basis(&c, &["q", "p"], RingElement::one(&c)).unwrap();
    let alg = CoisoAlgebra::new(pi).unwrap();
    let a = VerticalSection::from_components(&c, vec![RingElement::sin(&c, "y", 1).unwrap()]).unwrap();
    let r = obstructedness_certificate(&alg, &a).unwrap();
    assert!(r.closed);
    assert_eq!(r.verdict, Verdict::Inconclusive);
}

fn random_mode_section(r: &mut impl Rng, c: &std::sync::Arc<ChartSpec>) -> VerticalSection {
    // y-only modes half of the time, so that closed sections show up.
    let y_only = r.gen_bool(0.5);
    let comps = (0..2)
        .map(|_| {
            let mut f = RingElement::zero(c);
            for _ in 0..2 {
                let mode: Vec<i64> = (0..4).map(|i| if y_only && i >= 2 { 0 } else { r.gen_range(-1..=1) }).collect();
                let g = RingElement::fourier_mode(c, mode).unwrap().scale_rational(&rat(r.gen_range(-2..=2), 1));
                f = &f + &(&g + &g.conj());
            }
            f
        })
        .collect();
    VerticalSection::from_components(c, comps).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// `P([π,a]) = 0 ⇔ d_F((♯̃*)^{-1} a) = 0`, and F is real for real `a`.
    #[test]
    fn closedness_is_leafwise_closedness(seed in any::<u64>()) {
        let mut r = rng(seed);
        let ex = build_t4_example().unwrap();
        let c = ex.algebra.chart().clone();
        let a = random_mode_section(&mut r, &c);
        let closed = ex.algebra.lambda(std::slice::from_ref(&a)).unwrap().is_zero();
        let form = leafwise_musical_inverse(ex.algebra.pi(), &ex.leaf, &a).unwrap();
        prop_assert_eq!(closed, form.leafwise_d(&ex.leaf).unwrap().is_zero());
        let report = obstructedness_certificate(&ex.algebra, &a).unwrap();
        prop_assert_eq!(report.closed, closed);
        if let Some(f) = &report.integral {
            prop_assert!(f.is_real());
            let nonconstant = f.terms().any(|(m, s)| !s.is_zero() && m.k.iter().any(|&k| k != 0));
            prop_assert_eq!(report.verdict == Verdict::Nonzero, nonconstant);
        }
    }

    /// The torus integral is linear and kills every non-zero mode in `q`.
    #[test]
    fn torus_integral_is_linear_and_kills_modes(seed in any::<u64>()) {
        let mut r = rng(seed);
        let c = t4_chart();
        let f = random_ring(&mut r, &c, 4, 0);
        let g = random_ring(&mut r, &c, 4, 0);
        let vol = |h: RingElement| DifferentialForm::basis(&c, &["q1", "q2"], h).unwrap();
        let torus = [2, 3];
        let lf = fibre_torus_integral(&vol(f.clone()), &torus).unwrap();
        let lg = fibre_torus_integral(&vol(g.clone()), &torus).unwrap();
        let k = Scalar::rational_pi(rat(r.gen_range(-3..=3), 2), 1);
        let sum = fibre_torus_integral(&vol(&f + &g.scale(&k)), &torus).unwrap();
        prop_assert_eq!(sum, &lf + &lg.scale(&k));
        prop_assert!(lf.terms().all(|(m, _)| m.k[2] == 0 && m.k[3] == 0));
        // Each surviving term is exactly a term of f with no q-mode.
        for (m, s) in lf.terms() {
            prop_assert_eq!(f.terms().find(|(n, _)| *n == m).map(|(_, t)| t.clone()), Some(s.clone()));
        }
    }
}

#[test]
fn leaf_must_match_fibre_rank() {
    let ex = build_t4_example().unwrap();
    let c = ex.algebra.chart().clone();
    let small = SubbundleSpec::new(&c, &["q1"]).unwrap();
    assert!(leafwise_musical_inverse(ex.algebra.pi(), &small, &ex.section).is_err());
}
