//! Acceptance runner: one `[PASS]`/`[FAIL]` line per criterion, non-zero
//! exit status if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use coiso_core::numeric::{pushforward_vertical_block, SectionNumeric};
use coiso_core::symplectic_model::{
    gotay_local_model, invert_affine_pencil, rational_inverse, symplectic_to_poisson, AffinePencil,
    NumericSymplecticInverse, PresymplecticData,
};
use coiso_core::{
    build_t4_example, coisotropy_check_numeric, higher_jacobi_verify, obstructedness_certificate, rat, sample_grid,
    ChartSpec, CoisoAlgebra, CompiledBivector, DifferentialForm, MultiVectorField, RingElement, SubbundleSpec,
    TwistedElement, Verdict, VerticalSection,
};
use common::*;
use rand::Rng;

type Check = std::result::Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: std::result::Result<T, E>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn run(id: usize, name: &str, f: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        Err(format!("panicked: {msg}"))
    });
    let secs = start.elapsed().as_secs_f64();
    match &outcome {
        Ok(detail) => println!("[PASS] AC{id} {name}: {detail} ({secs:.2}s)"),
        Err(detail) => println!("[FAIL] AC{id} {name}: {detail} ({secs:.2}s)"),
    }
    outcome.is_ok()
}

fn same(a: &MultiVectorField, b: &MultiVectorField) -> bool {
    (a.is_zero() && b.is_zero()) || a == b
}

fn signed(x: &MultiVectorField, e: i64) -> MultiVectorField {
    if e.rem_euclid(2) == 1 { x.neg() } else { x.clone() }
}

fn ac1() -> Check {
    let start = Instant::now();
    let ex = ok(build_t4_example())?;
    let alg = &ex.algebra;
    let c = alg.chart().clone();
    let a = &ex.section;
    ensure!(ok(alg.lambda(std::slice::from_ref(a)))?.is_zero(), "λ1(a) ≠ 0");
    let l2 = ok(alg.lambda(&[a.clone(), a.clone()]))?;
    let want = ok(MultiVectorField::basis(&c, &["p1", "p2"], cos_cos(&c, 8)))?;
    ensure!(l2.as_multivector() == &want, "λ2(a,a) = {l2}");
    let coef = l2.as_multivector().coefficient(&[4, 5]);
    for (_, s) in coef.terms() {
        let (e, g) = s.as_monomial().ok_or("coefficient is not a single π-power")?;
        ensure!(e == 2, "π-exponent {e}");
        ensure!(g.is_real(), "complex coefficient");
    }
    let report = ok(obstructedness_certificate(alg, a))?;
    let f = report.integral.clone().ok_or("no F(y)")?;
    ensure!(f == cos_cos(&c, 8), "F(y) = {f}");
    ensure!(report.verdict == Verdict::Nonzero, "verdict {}", report.verdict);
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("F(y) = {f}, {} in {:.0} ms", report.verdict, elapsed.as_secs_f64() * 1e3))
}

fn ac2() -> Check {
    let start = Instant::now();
    let cases = 120;
    for seed in 0..cases {
        let mut r = rng(1000 + seed);
        let c = random_chart(&mut r, 3, 3);
        let pi = random_coiso_bivector(&mut r, &c, 4, 3);
        let alpha = random_section(&mut r, &c, 1, 2);
        let alg = ok(CoisoAlgebra::new(pi.clone()))?;
        let pushed = ok(pi.fibre_translate_pushforward(&alpha))?;
        let exp = ok(pi.exp_ad(&alpha, None))?;
        ensure!(exp == pushed, "seed {seed}: e^ad(α) π ≠ pushforward");
        ensure!(exp.projection_p() == pushed.projection_p(), "seed {seed}: P parts differ");
        let mc = ok(alg.mc_series_exact(&alpha))?;
        ensure!(same(mc.as_multivector(), pushed.projection_p().as_multivector()), "seed {seed}: MC ≠ P(pushforward)");
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    Ok(format!("{cases} random cases"))
}

fn ac3() -> Check {
    let cases = 120;
    for seed in 0..cases {
        let mut r = rng(2000 + seed);
        let c = random_chart(&mut r, 3, 3);
        let p = random_graded(&mut r, &c, 3, 2, 2);
        let q = random_graded(&mut r, &c, 3, 2, 2);
        let w = random_graded(&mut r, &c, 3, 2, 2);
        let (dp, dq, dw) = (p.degree() as i64, q.degree() as i64, w.degree() as i64);
        let lhs = ok(p.schouten(&q))?;
        let rhs = signed(&ok(q.schouten(&p))?, 1 + (dp - 1) * (dq - 1));
        ensure!(same(&lhs, &rhs), "seed {seed}: antisymmetry");
        let left = ok(p.schouten(&ok(q.wedge(&w))?))?;
        let right = ok(ok(ok(p.schouten(&q))?.wedge(&w))?.try_add(&signed(&ok(q.wedge(&ok(p.schouten(&w))?))?, (dp - 1) * dq)))?;
        ensure!(same(&left, &right), "seed {seed}: Leibniz");
        let j1 = signed(&ok(p.schouten(&ok(q.schouten(&w))?))?, (dp - 1) * (dw - 1));
        let j2 = signed(&ok(q.schouten(&ok(w.schouten(&p))?))?, (dq - 1) * (dp - 1));
        let j3 = signed(&ok(w.schouten(&ok(p.schouten(&q))?))?, (dw - 1) * (dq - 1));
        ensure!(ok(ok(j1.try_add(&j2))?.try_add(&j3))?.is_zero(), "seed {seed}: Jacobi");
    }
    Ok(format!("{cases} random triples"))
}

fn ac4() -> Check {
    let instances = 20;
    for seed in 0..instances {
        let mut r = rng(3000 + seed);
        let mat = |r: &mut rand_chacha::ChaCha8Rng| -> Vec<Vec<coiso_core::Rational>> {
            (0..4).map(|_| (0..4).map(|_| rat(r.gen_range(-3..=3), r.gen_range(1..=2))).collect()).collect()
        };
        let a = loop {
            let a = mat(&mut r);
            if rational_inverse(&a).is_ok() {
                break a;
            }
        };
        let p = ok(AffinePencil::new(a, vec![mat(&mut r), mat(&mut r)]))?;
        let inv = ok(invert_affine_pencil(&p, 6))?;
        let m = ok(p.matrix(&inv.chart))?;
        for i in 0..4 {
            for j in 0..4 {
                let mut s = RingElement::zero(&inv.chart);
                for k in 0..4 {
                    s = &s + &(&m[i][k] * &inv.matrix[k][j].forget_order());
                }
                if i == j {
                    s = &s - &RingElement::one(&inv.chart);
                }
                ensure!(s.terms().all(|(mono, _)| mono.y_degree() > 6), "seed {seed}: residual entry ({i},{j})");
            }
        }
    }
    let p = ok(AffinePencil::new(vec![vec![rat(1, 1)]], vec![vec![vec![rat(1, 1)]]]))?;
    let inv = ok(invert_affine_pencil(&p, 3))?;
    let l = ok(RingElement::variable(&inv.chart, "l1"))?;
    let one = RingElement::one(&inv.chart);
    let series = &(&(&one - &l) + &l.pow(2)) - &l.pow(3);
    ensure!(inv.matrix[0][0] == series.to_jet(3), "1×1: {}", inv.matrix[0][0]);
    Ok(format!("{instances} random 4×4 pencils at N=6; 1×1 = {}", inv.matrix[0][0]))
}

fn ac5() -> Check {
    let t = |names: &[(&str, bool)]| ChartSpec::base_only(names).map_err(|e| e.to_string());
    let zero_base = t(&[("q1", true), ("q2", true)])?;
    let t4 = t(&[("y1", true), ("y2", true), ("q1", true), ("q2", true)])?;
    let t3 = t(&[("y1", true), ("y2", true), ("q", true)])?;
    let dy = |c: &std::sync::Arc<ChartSpec>| DifferentialForm::basis(c, &["y1", "y2"], RingElement::one(c));
    let cases: Vec<(&str, DifferentialForm, Vec<&str>, Vec<&str>)> = vec![
        ("T2, ω=0", DifferentialForm::zero(&zero_base, 2), vec!["q1", "q2"], vec!["p1", "p2"]),
        ("T4", ok(dy(&t4))?, vec!["q1", "q2"], vec!["p1", "p2"]),
        ("T3", ok(dy(&t3))?, vec!["q"], vec!["p"]),
    ];
    let mut out = Vec::new();
    for (name, omega_c, kernel, fibre) in cases {
        let base = omega_c.chart().clone();
        let data = ok(PresymplecticData::new(omega_c.clone(), ok(SubbundleSpec::new(&base, &kernel))?))?;
        let model = ok(gotay_local_model(&data, &fibre))?;
        let pulled = model.omega.pullback_zero_section();
        ensure!(same_form(&pulled, &omega_c), "{name}: pullback {pulled}");
        let degrees = model.omega.fibrewise_degrees();
        ensure!(degrees.iter().all(|&d| d <= 1), "{name}: degrees {degrees:?}");
        ok(symplectic_to_poisson(&model.omega, 4))?;
        out.push(format!("{name}: {}", model.omega));
    }
    Ok(out.join("; "))
}

fn same_form(a: &DifferentialForm, b: &DifferentialForm) -> bool {
    (a.is_zero() && b.is_zero()) || a == b
}

fn ac6() -> Check {
    let alg = t4_algebra();
    let c = alg.chart().clone();
    let compiled = ok(CompiledBivector::new(alg.pi()))?;
    let grid = sample_grid(&c, 8);
    let constant = ok(VerticalSection::from_components(
        &c,
        vec![RingElement::from_rational(&c, rat(3, 2)), RingElement::from_integer(&c, -1)],
    ))?;
    let mc0 = ok(alg.mc_series_exact(&constant))?;
    let rep0 = ok(coisotropy_check_numeric(&compiled, &constant, &grid))?;
    ensure!(mc0.is_zero() && rep0.coisotropic, "constant α: MC {mc0}, defect {}", rep0.max_defect);
    let a = sin_sin(&c);
    let mc = ok(alg.mc_series_exact(&a))?;
    let want = ok(MultiVectorField::basis(&c, &["p1", "p2"], cos_cos(&c, 4)))?;
    ensure!(mc.as_multivector() == &want, "MC(sin) = {mc}");
    let rep = ok(coisotropy_check_numeric(&compiled, &a, &grid))?;
    ensure!(!rep.coisotropic, "sin: defect {} within tolerance", rep.max_defect);
    // The exact MC value against the numeric pushforward oracle.
    let sec = ok(SectionNumeric::new(&a))?;
    let coef = mc.as_multivector().coefficient(&[4, 5]);
    let mut worst: f64 = 0.0;
    for x in &grid {
        let block = ok(pushforward_vertical_block(&compiled, &sec, x))?;
        let mut full = x.clone();
        full.resize(c.dim(), 0.0);
        worst = worst.max((ok(coef.eval(&full))?.re - block[(0, 1)]).abs());
    }
    ensure!(worst < 1e-9, "oracle mismatch {worst:e}");
    Ok(format!(
        "constant: MC=0, defect {:.1e}; sin: MC = {}, defect {:.3}, oracle error {worst:.1e}",
        rep0.max_defect,
        coef,
        rep.max_defect
    ))
}

fn ac7() -> Check {
    let alg = t4_algebra();
    let tw = alg.twisted();
    let c = alg.chart().clone();
    for seed in 0..40 {
        let mut r = rng(4000 + seed);
        let d: i64 = r.gen_range(-1..=1);
        let field = random_multivector(&mut r, &c, (d + 2) as usize, 2, 2);
        let section = random_section(&mut r, &c, (d + 1) as usize, 2);
        let z = ok(TwistedElement::new(field, section))?;
        let twice = ok(tw.lambda(&[ok(tw.lambda(&[z]))?]))?;
        ensure!(twice.is_zero(), "seed {seed}: λ1∘λ1 ≠ 0");
    }
    let mut jacobi_cases = 0;
    for seed in 0..30 {
        let mut r = rng(5000 + seed);
        let small = random_chart(&mut r, 2, 2);
        let pa = ok(CoisoAlgebra::new(random_rank_two_poisson(&mut r, &small, 2)))?;
        let ptw = pa.twisted();
        for n in 1..=3 {
            let inputs: Vec<TwistedElement> = (0..n)
                .map(|_| {
                    let d: i64 = r.gen_range(-1..=0);
                    let field = random_multivector(&mut r, &small, (d + 2) as usize, 2, 1);
                    let section = random_section(&mut r, &small, (d + 1) as usize, 2);
                    TwistedElement::new(field, section).expect("same chart")
                })
                .collect();
            ensure!(ok(higher_jacobi_verify(&ptw, &inputs))?, "seed {seed}: twisted Jacobi n={n}");
            let secs: Vec<VerticalSection> = inputs.iter().map(|z| z.section.clone()).collect();
            ensure!(ok(higher_jacobi_verify(&pa, &secs))?, "seed {seed}: Jacobi n={n}");
            jacobi_cases += 2;
        }
    }
    // Twisted MC ⇔ (π+τ Poisson) ∧ (graph coisotropic).
    let sin = |n: &str| RingElement::sin(&c, n, 1).expect("periodic");
    let one = RingElement::one(&c);
    let taus = [
        MultiVectorField::zero(&c, 2),
        ok(MultiVectorField::basis(&c, &["q1", "q2"], one))?,
        ok(MultiVectorField::basis(&c, &["q1", "q2"], sin("y1")))?,
        ok(MultiVectorField::basis(&c, &["y1", "y2"], sin("q1")))?,
    ];
    let alphas = [
        VerticalSection::zero(&c, 1),
        sin_sin(&c),
        ok(VerticalSection::from_components(&c, vec![sin("y1"), RingElement::zero(&c)]))?,
    ];
    let mut agree = 0;
    for tau in &taus {
        let total = ok(alg.pi().try_add(tau))?;
        let poisson = ok(total.schouten(&total))?.is_zero();
        for alpha in &alphas {
            let mc = ok(tw.maurer_cartan(tau, alpha))?;
            let numeric = ok(coisotropy_check_numeric(&ok(CompiledBivector::new(&total))?, alpha, &sample_grid(&c, 5)))?;
            ensure!(mc.is_zero() == (poisson && numeric.coisotropic), "τ = {tau}, α = {alpha}");
            agree += 1;
        }
    }
    Ok(format!("40 λ1∘λ1 checks, {jacobi_cases} Jacobi checks, {agree} MC pairs"))
}

fn ac8() -> Check {
    let omega = sheared_t4_form();
    let n = 8;
    let out = ok(symplectic_to_poisson(&omega, n))?;
    ensure!(out.pi.max_y_degree() == n, "π has fibre degree {}", out.pi.max_y_degree());
    let alg = ok(CoisoAlgebra::new(out.pi))?;
    let c = alg.chart().clone();
    let small = |f: RingElement, k: i64| f.scale_rational(&rat(1, k));
    let alpha = ok(VerticalSection::from_components(
        &c,
        vec![
            small(&ok(RingElement::sin(&c, "y1", 1))? + &RingElement::one(&c), 50),
            small(&ok(RingElement::sin(&c, "y2", 1))? + &ok(RingElement::cos(&c, "q1", 1))?, 100),
        ],
    ))?;
    let oracle = ok(NumericSymplecticInverse::new(&omega))?;
    let table = ok(alg.mc_partial_table(&alpha, n, &sample_grid(&c, 6), &oracle))?;
    let errors: Vec<f64> = (1..=n).map(|k| table.max_error_at(k).unwrap_or(f64::NAN)).collect();
    let err = errors[n as usize - 1];
    ensure!(err <= 1e-8, "error at N={n}: {err:e}; by order {errors:?}");
    ensure!(errors[0] > 1e2 * err, "no convergence visible: {errors:?}");
    Ok(format!(
        "max |β_N − oracle| by N: {} over {} points",
        errors.iter().map(|e| format!("{e:.1e}")).collect::<Vec<_>>().join(", "),
        table.rows.len() / n as usize
    ))
}

fn main() -> ExitCode {
    let results = [
        run(1, "torus obstruction", ac1),
        run(2, "pushforward oracle", ac2),
        run(3, "Schouten axioms", ac3),
        run(4, "pencil inversion", ac4),
        run(5, "Gotay local model", ac5),
        run(6, "coisotropy equivalence", ac6),
        run(7, "twisted algebra", ac7),
        run(8, "jet-mode convergence", ac8),
    ];
    let passed = results.iter().filter(|&&b| b).count();
    println!("{passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
