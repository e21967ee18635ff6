//! Kuranishi obstruction certificate for the extended deformation problem
//! on product charts `T^k_y × T^n_q × ℝ^n_p` with constant Poisson bivector.
//!
//! For a λ1-closed section `a`, `β = (♯̃*)^{-1} λ2(a,a)` is a leafwise
//! two-form and `F(y) = ∫_{T_q} β`. A non-constant `F` certifies that the
//! Kuranishi class of `a` is nonzero; a constant `F` proves nothing.

use std::fmt;

use serde::Serialize;

use crate::chart::{check_same_chart, ChartSpec};
use crate::error::{CoisoError, Result};
use crate::forms::{leafwise_musical_inverse, DifferentialForm, SubbundleSpec};
use crate::graded::permutation_sign;
use crate::linfty::CoisoAlgebra;
use crate::multivector::VerticalSection;
use crate::ring::RingElement;
use crate::symplectic_model::{gotay_local_model, symplectic_to_poisson, PresymplecticData};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Nonzero,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Nonzero => "NONZERO",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

/// The torus `T⁴ = {(y1,y2,q1,q2)}` with `E = ℝ²_{p1,p2}`, the Poisson
/// structure inverting `dy1∧dy2 + dq1∧dp1 + dq2∧dp2`, and the section
/// `a = (sin 2πy1, sin 2πy2)`.
#[derive(Clone, Debug)]
pub struct T4Example {
    pub algebra: CoisoAlgebra,
    pub section: VerticalSection,
    pub omega: DifferentialForm,
    pub leaf: SubbundleSpec,
}

pub fn build_t4_example() -> Result<T4Example> {
    let base = ChartSpec::base_only(&[("y1", true), ("y2", true), ("q1", true), ("q2", true)])?;
    let omega_c = DifferentialForm::basis(&base, &["y1", "y2"], RingElement::one(&base))?;
    let data = PresymplecticData::new(omega_c, SubbundleSpec::new(&base, &["q1", "q2"])?)?;
    let model = gotay_local_model(&data, &["p1", "p2"])?;
    let chart = model.chart.clone();
    let pi = symplectic_to_poisson(&model.omega, 1)?.pi;
    let section = VerticalSection::from_components(
        &chart,
        vec![RingElement::sin(&chart, "y1", 1)?, RingElement::sin(&chart, "y2", 1)?],
    )?;
    Ok(T4Example {
        algebra: CoisoAlgebra::new(pi)?,
        section,
        omega: model.omega,
        leaf: SubbundleSpec::new(&chart, &["q1", "q2"])?,
    })
}

/// `β = (♯̃*)^{-1} P([[π,a],a])`, a two-form along `F`.
pub fn beta_of(alg: &CoisoAlgebra, leaf: &SubbundleSpec, a: &VerticalSection) -> Result<DifferentialForm> {
    let k = alg.kuranishi_rep(a)?;
    leafwise_musical_inverse(alg.pi(), leaf, &k)
}

/// `∫ β` over the unit torus in the given periodic directions, as a
/// function of the remaining coordinates. `torus` fixes the orientation.
pub fn fibre_torus_integral(beta: &DifferentialForm, torus: &[usize]) -> Result<RingElement> {
    let chart = beta.chart();
    if beta.is_zero() {
        return Ok(RingElement::zero(chart));
    }
    if beta.degree() != torus.len() {
        return Err(CoisoError::WrongFormDegree(format!(
            "expected a {}-form over the torus, got degree {}",
            torus.len(),
            beta.degree()
        )));
    }
    let sign = permutation_sign(torus)
        .ok_or_else(|| CoisoError::Unsupported("repeated torus direction".into()))?;
    let mut sorted = torus.to_vec();
    sorted.sort_unstable();
    let c = beta.coefficient(&sorted);
    if !c.is_fibre_free() {
        return Err(CoisoError::NonConstant("β depends on the fibre coordinates".into()));
    }
    let mean = c.mean_over(torus)?;
    Ok(if sign < 0 { -mean } else { mean })
}

#[derive(Clone, Debug)]
pub struct ObstructionReport {
    pub closed: bool,
    pub kuranishi: Option<VerticalSection>,
    pub beta: Option<DifferentialForm>,
    pub integral: Option<RingElement>,
    pub verdict: Verdict,
}

#[derive(Serialize)]
struct ReportDocument {
    closed: bool,
    kuranishi: Option<String>,
    beta: Option<String>,
    integral: Option<String>,
    verdict: Verdict,
}

impl ObstructionReport {
    pub fn to_json(&self) -> serde_json::Value {
        let doc = ReportDocument {
            closed: self.closed,
            kuranishi: self.kuranishi.as_ref().map(ToString::to_string),
            beta: self.beta.as_ref().map(ToString::to_string),
            integral: self.integral.as_ref().map(ToString::to_string),
            verdict: self.verdict,
        };
        serde_json::to_value(doc).expect("report document serializes")
    }
}

impl fmt::Display for ObstructionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "closed: {}", self.closed)?;
        if let Some(k) = &self.kuranishi {
            writeln!(f, "kuranishi: {k}")?;
        }
        if let Some(b) = &self.beta {
            writeln!(f, "beta: {b}")?;
        }
        if let Some(i) = &self.integral {
            writeln!(f, "F: {i}")?;
        }
        write!(f, "verdict: {}", self.verdict)
    }
}

/// Splits a product chart into the torus directions `F = ♯(E*)|_C` and the
/// rest, checking that `π` is constant and does not couple the blocks.
pub fn product_leaf(alg: &CoisoAlgebra) -> Result<SubbundleSpec> {
    let chart = alg.chart();
    let pi = alg.pi();
    if pi.terms().any(|(_, c)| !c.is_constant()) {
        return Err(CoisoError::NotProductChart("π must have constant coefficients".into()));
    }
    if let Some(b) = chart.base().iter().find(|b| !b.periodic) {
        return Err(CoisoError::NotProductChart(format!("`{}` is not periodic", b.name)));
    }
    let is_fibre = |i: usize| !chart.is_base_index(i);
    let mut leaf = Vec::new();
    for (idx, _) in pi.terms() {
        let (a, b) = (idx[0], idx[1]);
        if is_fibre(a) != is_fibre(b) {
            let base = if is_fibre(a) { b } else { a };
            if !leaf.contains(&base) {
                leaf.push(base);
            }
        }
    }
    leaf.sort_unstable();
    if leaf.len() != chart.fibre_dim() {
        return Err(CoisoError::NotProductChart(format!(
            "♯(E*) spans {} base directions, expected {}",
            leaf.len(),
            chart.fibre_dim()
        )));
    }
    for (idx, _) in pi.terms() {
        let (a, b) = (idx[0], idx[1]);
        let in_leaf = |i: usize| leaf.contains(&i);
        let rest = |i: usize| chart.is_base_index(i) && !in_leaf(i);
        if (rest(a) && !rest(b)) || (rest(b) && !rest(a)) {
            return Err(CoisoError::NotProductChart(format!(
                "π couples ∂{} and ∂{}",
                chart.name(a),
                chart.name(b)
            )));
        }
    }
    SubbundleSpec::from_indices(chart, &leaf)
}

/// Runs the certificate. Never claims that the Kuranishi class vanishes.
pub fn obstructedness_certificate(alg: &CoisoAlgebra, a: &VerticalSection) -> Result<ObstructionReport> {
    check_same_chart(alg.chart(), a.chart())?;
    let leaf = product_leaf(alg)?;
    let closed = alg.lambda(std::slice::from_ref(a))?.is_zero();
    if !closed {
        return Ok(ObstructionReport {
            closed,
            kuranishi: None,
            beta: None,
            integral: None,
            verdict: Verdict::Inconclusive,
        });
    }
    let kuranishi = alg.kuranishi_rep(a)?;
    let beta = leafwise_musical_inverse(alg.pi(), &leaf, &kuranishi)?;
    let integral = fibre_torus_integral(&beta, &leaf.indices())?;
    let verdict = if integral.terms().any(|(m, c)| !c.is_zero() && m.k.iter().any(|&k| k != 0)) {
        Verdict::Nonzero
    } else {
        Verdict::Inconclusive
    };
    Ok(ObstructionReport {
        closed,
        kuranishi: Some(kuranishi),
        beta: Some(beta),
        integral: Some(integral),
        verdict,
    })
}
