//! Seeded random generators shared by the property tests and the acceptance runner.
#![allow(dead_code)]

use std::sync::Arc;

use coiso_core::{
    rat, ChartSpec, CoisoAlgebra, DifferentialForm, Monomial, MultiVectorField, RingElement,
    Scalar, VerticalSection,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Base `b1..` (each periodic with probability ½) and fibre `y1..`.
pub fn random_chart(r: &mut impl Rng, max_base: usize, max_fibre: usize) -> Arc<ChartSpec> {
    let nb = r.gen_range(1..=max_base);
    let nf = r.gen_range(1..=max_fibre);
    let base: Vec<(String, bool)> = (1..=nb).map(|i| (format!("b{i}"), r.gen_bool(0.5))).collect();
    let fibre: Vec<String> = (1..=nf).map(|j| format!("y{j}")).collect();
    ChartSpec::bundle(&base, &fibre).unwrap()
}

pub fn random_scalar(r: &mut impl Rng) -> Scalar {
    let mut num = r.gen_range(-4..=4);
    if num == 0 {
        num = 1;
    }
    let q = rat(num, r.gen_range(1..=3));
    Scalar::rational_pi(q, r.gen_range(0..=1))
}

/// Random monomial with fibre degree at most `max_ydeg`.
pub fn random_monomial(r: &mut impl Rng, chart: &ChartSpec, max_ydeg: u32) -> Monomial {
    let mut m = Monomial::one(chart);
    for e in m.x.iter_mut() {
        *e = r.gen_range(0..=2);
    }
    for k in m.k.iter_mut() {
        *k = r.gen_range(-1..=1);
    }
    if !m.y.is_empty() {
        let total = r.gen_range(0..=max_ydeg);
        for _ in 0..total {
            let j = r.gen_range(0..m.y.len());
            m.y[j] += 1;
        }
    }
    m
}

pub fn random_ring(r: &mut impl Rng, chart: &Arc<ChartSpec>, max_terms: usize, max_ydeg: u32) -> RingElement {
    let n = r.gen_range(0..=max_terms);
    RingElement::from_terms(
        chart,
        (0..n).map(|_| (random_monomial(r, chart, max_ydeg), random_scalar(r))).collect::<Vec<_>>(),
    )
}

/// Random real element: each term is symmetrised with its conjugate mode.
pub fn random_real_ring(r: &mut impl Rng, chart: &Arc<ChartSpec>, max_terms: usize, max_ydeg: u32) -> RingElement {
    let f = random_ring(r, chart, max_terms, max_ydeg);
    &f + &f.conj()
}

fn random_blade(r: &mut impl Rng, pool: &[usize], degree: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = pool.choose_multiple(r, degree).copied().collect();
    idx.sort_unstable();
    idx
}

pub fn random_multivector(
    r: &mut impl Rng,
    chart: &Arc<ChartSpec>,
    degree: usize,
    max_terms: usize,
    max_ydeg: u32,
) -> MultiVectorField {
    let mut out = MultiVectorField::zero(chart, degree);
    if degree > chart.dim() {
        return out;
    }
    if degree == 0 {
        return MultiVectorField::function(random_ring(r, chart, max_terms, max_ydeg));
    }
    let pool: Vec<usize> = (0..chart.dim()).collect();
    for _ in 0..r.gen_range(1..=max_terms.max(1)) {
        let blade = random_blade(r, &pool, degree);
        let coef = random_ring(r, chart, 2, max_ydeg);
        let term = MultiVectorField::from_indices(chart, &blade, coef).unwrap();
        out = out.try_add(&term).unwrap();
    }
    out
}

/// Like [`random_multivector`] with a random degree in `0..=max_degree`.
pub fn random_graded(r: &mut impl Rng, chart: &Arc<ChartSpec>, max_degree: usize, max_terms: usize, max_ydeg: u32) -> MultiVectorField {
    let d = r.gen_range(0..=max_degree);
    random_multivector(r, chart, d, max_terms, max_ydeg)
}

pub fn random_form(r: &mut impl Rng, chart: &Arc<ChartSpec>, degree: usize, max_terms: usize, max_ydeg: u32) -> DifferentialForm {
    let mut out = DifferentialForm::zero(chart, degree);
    if degree > chart.dim() {
        return out;
    }
    if degree == 0 {
        return DifferentialForm::function(random_ring(r, chart, max_terms, max_ydeg));
    }
    let pool: Vec<usize> = (0..chart.dim()).collect();
    for _ in 0..r.gen_range(1..=max_terms.max(1)) {
        let blade = random_blade(r, &pool, degree);
        let coef = random_ring(r, chart, 2, max_ydeg);
        out = out.try_add(&DifferentialForm::from_indices(chart, &blade, coef).unwrap()).unwrap();
    }
    out
}

/// Degree-`degree` section of `∧E` with fibre-free coefficients.
pub fn random_section(r: &mut impl Rng, chart: &Arc<ChartSpec>, degree: usize, max_terms: usize) -> VerticalSection {
    if degree > chart.fibre_dim() {
        return VerticalSection::zero(chart, degree);
    }
    let pool: Vec<usize> = (0..chart.fibre_dim()).map(|j| chart.fibre_index(j)).collect();
    let mut out = MultiVectorField::zero(chart, degree);
    for _ in 0..r.gen_range(1..=max_terms.max(1)) {
        let blade = random_blade(r, &pool, degree);
        let coef = random_real_ring(r, chart, 2, 0);
        out = out.try_add(&MultiVectorField::from_indices(chart, &blade, coef).unwrap()).unwrap();
    }
    VerticalSection::new(out).unwrap()
}

/// Real degree-1 section with rational coefficients scaled by `amplitude`.
pub fn random_small_section(r: &mut impl Rng, chart: &Arc<ChartSpec>, amplitude: i64) -> VerticalSection {
    let comps = (0..chart.fibre_dim())
        .map(|_| random_real_ring(r, chart, 2, 0).scale_rational(&rat(1, amplitude)))
        .collect();
    VerticalSection::from_components(chart, comps).unwrap()
}

/// Drops the fibre-constant part of every purely vertical coefficient so
/// that the zero section becomes coisotropic.
pub fn make_zero_section_coisotropic(pi: &MultiVectorField) -> MultiVectorField {
    let chart = pi.chart().clone();
    let mut out = MultiVectorField::zero(&chart, pi.degree());
    for (idx, c) in pi.terms() {
        let vertical = idx.iter().all(|&i| !chart.is_base_index(i));
        let coef = if vertical { c - &c.at_zero_fibre() } else { c.clone() };
        out = out.try_add(&MultiVectorField::from_indices(&chart, &idx, coef).unwrap()).unwrap();
    }
    out
}

pub fn random_coiso_bivector(r: &mut impl Rng, chart: &Arc<ChartSpec>, max_terms: usize, max_ydeg: u32) -> MultiVectorField {
    make_zero_section_coisotropic(&random_multivector(r, chart, 2, max_terms, max_ydeg))
}

/// `π = f ∂a∧∂b` is Poisson for every `f`; if both directions are vertical,
/// `f` is multiplied by a fibre coordinate so that `P(π) = 0`.
pub fn random_rank_two_poisson(r: &mut impl Rng, chart: &Arc<ChartSpec>, max_ydeg: u32) -> MultiVectorField {
    let pool: Vec<usize> = (0..chart.dim()).collect();
    let blade = random_blade(r, &pool, 2);
    let f = random_ring(r, chart, 2, max_ydeg);
    let pi = MultiVectorField::from_indices(chart, &blade, f).unwrap();
    make_zero_section_coisotropic(&pi)
}

/// The torus `T⁴` chart with base `(y1,y2,q1,q2)` and fibre `(p1,p2)`.
pub fn t4_chart() -> Arc<ChartSpec> {
    ChartSpec::bundle(&[("y1", true), ("y2", true), ("q1", true), ("q2", true)], &["p1", "p2"]).unwrap()
}

/// `∂y1∧∂y2 + ∂q1∧∂p1 + ∂q2∧∂p2`, written out by hand.
pub fn t4_pi(c: &Arc<ChartSpec>) -> MultiVectorField {
    let one = RingElement::one(c);
    let mut pi = MultiVectorField::zero(c, 2);
    for pair in [["y1", "y2"], ["q1", "p1"], ["q2", "p2"]] {
        pi = pi.try_add(&MultiVectorField::basis(c, &pair, one.clone()).unwrap()).unwrap();
    }
    pi
}

pub fn t4_algebra() -> CoisoAlgebra {
    CoisoAlgebra::new(t4_pi(&t4_chart())).unwrap()
}

pub fn sin_sin(c: &Arc<ChartSpec>) -> VerticalSection {
    VerticalSection::from_components(
        c,
        vec![RingElement::sin(c, "y1", 1).unwrap(), RingElement::sin(c, "y2", 1).unwrap()],
    )
    .unwrap()
}

/// `k·π²·cos(2πy1)cos(2πy2)`.
pub fn cos_cos(c: &Arc<ChartSpec>, k: i64) -> RingElement {
    (&RingElement::cos(c, "y1", 1).unwrap() * &RingElement::cos(c, "y2", 1).unwrap())
        .scale(&Scalar::rational_pi(rat(k, 1), 2))
}

/// Reference values of a real element at a point, via `f64` trig.
pub fn approx_eq(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

/// The fibrewise-affine symplectic form
/// `dq1∧dp1 + dq2∧dp2 + d(p1 sin(2πq1) dq2)` on `T²_q × ℝ²_p`.
pub fn twisted_cotangent_form() -> DifferentialForm {
    let c = ChartSpec::bundle(&[("q1", true), ("q2", true)], &["p1", "p2"]).unwrap();
    let one = RingElement::one(&c);
    let canonical = DifferentialForm::basis(&c, &["q1", "p1"], one.clone())
        .unwrap()
        .try_add(&DifferentialForm::basis(&c, &["q2", "p2"], one).unwrap())
        .unwrap();
    let p1 = RingElement::variable(&c, "p1").unwrap();
    let s = RingElement::sin(&c, "q1", 1).unwrap();
    let primitive = DifferentialForm::basis(&c, &["q2"], &p1 * &s).unwrap();
    canonical.try_add(&primitive.de_rham_d()).unwrap()
}

/// `dy1∧dy2 + dq1∧dp1 + dq2∧dp2 + d(p1 sin(2πy1) dy2)` on `T⁴ × ℝ²`.
/// Its Poisson bivector depends on `p1` to all orders through
/// `1/(1 + 2π p1 cos 2πy1)`.
pub fn sheared_t4_form() -> DifferentialForm {
    let c = t4_chart();
    let one = RingElement::one(&c);
    let mut omega = DifferentialForm::zero(&c, 2);
    for pair in [["y1", "y2"], ["q1", "p1"], ["q2", "p2"]] {
        omega = omega.try_add(&DifferentialForm::basis(&c, &pair, one.clone()).unwrap()).unwrap();
    }
    let p1 = RingElement::variable(&c, "p1").unwrap();
    let s = RingElement::sin(&c, "y1", 1).unwrap();
    let primitive = DifferentialForm::basis(&c, &["y2"], &p1 * &s).unwrap();
    omega.try_add(&primitive.de_rham_d()).unwrap()
}
