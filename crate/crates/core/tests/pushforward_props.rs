mod common;

use coiso_core::numeric::{pushforward_vertical_block, SectionNumeric};
use coiso_core::{sample_grid, CoisoAlgebra, CompiledBivector, MultiVectorField, VerticalSection};
use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exp_ad_is_the_pushforward(seed in any::<u64>()) {
        let mut r = rng(seed);
        let c = random_chart(&mut r, 3, 3);
        let x = random_graded(&mut r, &c, 3, 3, 3);
        let a = random_section(&mut r, &c, 1, 3);
        let lhs = x.exp_ad(&a, None).unwrap();
        let rhs = x.fibre_translate_pushforward(&a).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn translations_compose(seed in any::<u64>()) {
        let mut r = rng(seed);
        let c = random_chart(&mut r, 2, 3);
        let x = random_graded(&mut r, &c, 3, 3, 3);
        let a = random_section(&mut r, &c, 1, 2);
        let b = random_section(&mut r, &c, 1, 2);
        let back = x.fibre_translate_pushforward(&a).unwrap().fibre_translate_pushforward(&a.neg()).unwrap();
        prop_assert_eq!(&back, &x);
        let two_steps = x.fibre_translate_pushforward(&a).unwrap().fibre_translate_pushforward(&b).unwrap();
        let one_step = x.fibre_translate_pushforward(&a.try_add(&b).unwrap()).unwrap();
        prop_assert_eq!(two_steps, one_step);
    }

    #[test]
    fn pushforward_is_a_morphism(seed in any::<u64>()) {
        let mut r = rng(seed);
        let c = random_chart(&mut r, 2, 2);
        let p = random_graded(&mut r, &c, 2, 2, 2);
        let q = random_graded(&mut r, &c, 2, 2, 2);
        let a = random_section(&mut r, &c, 1, 2);
        let push = |m: &MultiVectorField| m.fibre_translate_pushforward(&a).unwrap();
        prop_assert_eq!(push(&p.wedge(&q).unwrap()), push(&p).wedge(&push(&q)).unwrap());
        let lhs = push(&p.schouten(&q).unwrap());
        let rhs = push(&p).schouten(&push(&q)).unwrap();
        prop_assert!((lhs.is_zero() && rhs.is_zero()) || lhs == rhs);
    }

    /// `MC(α) = P((φ^α)_* π)` whenever `P(π) = 0`.
    #[test]
    fn mc_series_is_projected_pushforward(seed in any::<u64>()) {
        let mut r = rng(seed);
        let c = random_chart(&mut r, 3, 3);
        let pi = random_coiso_bivector(&mut r, &c, 4, 3);
        let a = random_section(&mut r, &c, 1, 2);
        let alg = CoisoAlgebra::new(pi.clone()).unwrap();
        let mc = alg.mc_series_exact(&a).unwrap();
        let pushed = pi.fibre_translate_pushforward(&a).unwrap().projection_p();
        prop_assert_eq!(mc.as_multivector(), pushed.as_multivector());
    }

    /// The exact `P((φ^α)_*π)` against `T Π Tᵀ` evaluated in floating point.
    #[test]
    fn exact_pushforward_matches_numeric_block(seed in any::<u64>()) {
        let mut r = rng(seed);
        let c = random_chart(&mut r, 3, 3);
        let pi = random_multivector(&mut r, &c, 2, 4, 3);
        let pi = pi.try_add(&pi.map_coefficients(|f| f.conj())).unwrap();
        let a = random_section(&mut r, &c, 1, 2);
        let exact: VerticalSection = pi.fibre_translate_pushforward(&a).unwrap().projection_p();
        let compiled = CompiledBivector::new(&pi).unwrap();
        let sec = SectionNumeric::new(&a).unwrap();
        for x in sample_grid(&c.base_chart(), 3) {
            let block = pushforward_vertical_block(&compiled, &sec, &x).unwrap();
            let mut full = x.clone();
            full.resize(c.dim(), 0.0);
            for j in 0..c.fibre_dim() {
                for k in (j + 1)..c.fibre_dim() {
                    let coef = exact.as_multivector().coefficient(&[c.fibre_index(j), c.fibre_index(k)]);
                    let v = coef.eval(&full).unwrap();
                    prop_assert!(v.im.abs() < 1e-9);
                    prop_assert!(approx_eq(v.re, block[(j, k)], 1e-9), "{} vs {}", v.re, block[(j, k)]);
                }
            }
        }
    }
}
