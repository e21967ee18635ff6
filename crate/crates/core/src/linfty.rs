//! The L∞[1]-brackets of a coisotropic zero section, Maurer–Cartan series,
//! the twisted algebra `W(C,π)` and higher Jacobi checks.
//!
//! Gradings: a section of `∧^r E` has degree `r − 1`; in `W(C,π)` a
//! multivector field of degree `p` has degree `p − 2`. All brackets have
//! degree 1 and are graded symmetric with Koszul signs in these degrees.
//!
//! Brackets of `W(C,π)` (with `|X| = p − 1`, the degree of `X` in `χ[1]`):
//!
//! ```text
//! λ1(X)             = (−[π,X], P(X))
//! λ1(a)             = (0, P([π,a]))
//! λ2(X, Y)          = ((−1)^{|X|} [X,Y], 0)
//! λn(a1,…,an)       = (0, P([…[π,a1],…,an]))
//! λ(n+1)(X,a1,…,an) = (0, P([…[X,a1],…,an]))
//! ```
//!
//! and every other slot pattern vanishes.

use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chart::{check_same_chart, ChartSpec};
use crate::error::{CoisoError, Result};
use crate::multivector::{vertical_blades, MultiVectorField, VerticalSection};
use crate::numeric::{max_fibre_norm, pushforward_vertical_block, NumericBivector, SectionNumeric};
use crate::ring::RingElement;
use crate::scalar::{rat, rational_to_f64};

/// Default grid resolution per base axis for domain checks.
pub const DEFAULT_SAMPLES: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PoissonStatus {
    /// `[π,π] = 0` exactly.
    Exact,
    /// `[π,π]` vanishes through the given fibre degree (jet input).
    ToOrder(u32),
    NotPoisson,
}

/// A bivector on a bundle chart for which the zero section is coisotropic.
#[derive(Clone, Debug)]
pub struct CoisoAlgebra {
    pi: MultiVectorField,
    poisson: PoissonStatus,
}

impl CoisoAlgebra {
    /// Fails unless `π` is a bivector with `P(π) = 0`.
    pub fn new(pi: MultiVectorField) -> Result<Self> {
        if pi.degree() != 2 {
            return Err(CoisoError::DegreeMismatch(format!(
                "expected a bivector, got degree {}",
                pi.degree()
            )));
        }
        if !pi.projection_p().is_zero() {
            return Err(CoisoError::NotCoisotropic);
        }
        let jacobiator = pi.schouten(&pi)?;
        let poisson = if !jacobiator.is_zero() {
            PoissonStatus::NotPoisson
        } else {
            match jacobiator.jet_order().or(pi.jet_order()) {
                None => PoissonStatus::Exact,
                Some(n) => PoissonStatus::ToOrder(n.saturating_sub(1)),
            }
        };
        Ok(CoisoAlgebra { pi, poisson })
    }

    pub fn chart(&self) -> &Arc<ChartSpec> {
        self.pi.chart()
    }

    pub fn pi(&self) -> &MultiVectorField {
        &self.pi
    }

    pub fn poisson_status(&self) -> PoissonStatus {
        self.poisson
    }

    pub fn is_poisson(&self) -> bool {
        self.poisson != PoissonStatus::NotPoisson
    }

    fn check_jet_budget(&self, brackets: usize) -> Result<()> {
        match self.pi.jet_order() {
            Some(n) if (n as usize) < brackets => Err(CoisoError::JetOrderTooSmall {
                have: n,
                need: brackets as u32,
            }),
            _ => Ok(()),
        }
    }

    /// `λn(a1,…,an) = P([…[π,a1],…,an])`.
    pub fn lambda(&self, args: &[VerticalSection]) -> Result<VerticalSection> {
        self.check_jet_budget(args.len())?;
        let mut x = self.pi.clone();
        for a in args {
            check_same_chart(self.chart(), a.chart())?;
            x = x.schouten(a.as_multivector())?;
        }
        Ok(x.projection_p())
    }

    fn require_degree_one(alpha: &VerticalSection) -> Result<()> {
        if alpha.degree() != 1 && !alpha.is_zero() {
            return Err(CoisoError::DegreeMismatch(
                "Maurer–Cartan input must be a section of E".into(),
            ));
        }
        Ok(())
    }

    /// Checks `graph(−α) ⊂ {|y| < bound}` on the sample grid, if the chart declares a bound.
    pub fn check_domain(&self, alpha: &VerticalSection, samples: usize) -> Result<()> {
        let Some(bound) = self.chart().domain_bound() else {
            return Ok(());
        };
        let bound = rational_to_f64(bound);
        let norm = max_fibre_norm(alpha, samples)?;
        if norm >= bound {
            return Err(CoisoError::DomainViolation { norm, bound });
        }
        Ok(())
    }

    /// `MC(α) = Σ_{k≥1} (1/k!) λk(α,…,α)`, summed until the iterated bracket vanishes.
    pub fn mc_series_exact(&self, alpha: &VerticalSection) -> Result<VerticalSection> {
        self.mc_series_exact_with_samples(alpha, DEFAULT_SAMPLES)
    }

    pub fn mc_series_exact_with_samples(
        &self,
        alpha: &VerticalSection,
        samples: usize,
    ) -> Result<VerticalSection> {
        check_same_chart(self.chart(), alpha.chart())?;
        if self.pi.jet_order().is_some() {
            return Err(CoisoError::JetInput);
        }
        if alpha.is_zero() {
            return Ok(VerticalSection::zero(self.chart(), 2));
        }
        Self::require_degree_one(alpha)?;
        self.check_domain(alpha, samples)?;
        let cap = self.pi.default_exp_cap();
        let mut x = self.pi.clone();
        let mut sum = VerticalSection::zero(self.chart(), 2);
        for k in 1..=cap {
            x = x.schouten(alpha.as_multivector())?.scale_rational(&rat(1, k as i64));
            if x.is_zero() {
                return Ok(sum);
            }
            sum = sum.try_add(&x.projection_p())?;
        }
        Err(CoisoError::CapExceeded { cap })
    }

    /// Partial sums `β_n`, `n = 1..=n_max`, evaluated at the given base
    /// points next to the numeric pushforward `P((φ^α)_* π_true)`.
    pub fn mc_partial_table(
        &self,
        alpha: &VerticalSection,
        n_max: u32,
        points: &[Vec<f64>],
        oracle: &dyn NumericBivector,
    ) -> Result<ConvergenceTable> {
        check_same_chart(self.chart(), alpha.chart())?;
        self.check_jet_budget(n_max as usize)?;
        Self::require_degree_one(alpha)?;
        let chart = self.chart().clone();
        let blades = vertical_blades(&chart, 2);
        let mut partials = Vec::with_capacity(n_max as usize);
        let mut x = self.pi.clone();
        let mut sum = VerticalSection::zero(&chart, 2);
        for k in 1..=n_max {
            if !alpha.is_zero() && !x.is_zero() {
                x = x.schouten(alpha.as_multivector())?.scale_rational(&rat(1, k as i64));
                sum = sum.try_add(&x.projection_p())?;
            }
            let compiled: Vec<_> = blades
                .iter()
                .map(|b| sum.as_multivector().coefficient(b).compile())
                .collect();
            partials.push(compiled);
        }
        let alpha = if alpha.is_zero() {
            VerticalSection::from_components(&chart, vec![RingElement::zero(&chart); chart.fibre_dim()])?
        } else {
            alpha.clone()
        };
        let sec = SectionNumeric::new(&alpha)?;
        let fibre_pos: Vec<usize> = (0..chart.fibre_dim()).map(|j| chart.fibre_index(j)).collect();
        let pos = |g: usize| fibre_pos.iter().position(|&f| f == g).expect("fibre index");
        let per_point = points
            .par_iter()
            .map(|p| -> Result<Vec<ConvergenceRow>> {
                let block = pushforward_vertical_block(oracle, &sec, p)?;
                let oracle_vals: Vec<f64> = blades.iter().map(|b| block[(pos(b[0]), pos(b[1]))]).collect();
                let mut full = p.clone();
                full.resize(chart.dim(), 0.0);
                Ok(partials
                    .iter()
                    .enumerate()
                    .map(|(i, comps)| {
                        let partial: Vec<f64> = comps.iter().map(|f| f.eval(&full).re).collect();
                        let abs_error = partial
                            .iter()
                            .zip(&oracle_vals)
                            .map(|(a, b)| (a - b).abs())
                            .fold(0.0, f64::max);
                        ConvergenceRow {
                            point: p.clone(),
                            n: i as u32 + 1,
                            partial,
                            oracle: oracle_vals.clone(),
                            abs_error,
                        }
                    })
                    .collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ConvergenceTable {
            coordinates: (0..chart.base_dim()).map(|i| chart.name(i).to_string()).collect(),
            components: blades
                .iter()
                .map(|b| b.iter().map(|&i| chart.name(i)).collect::<Vec<_>>().join("_"))
                .collect(),
            rows: per_point.into_iter().flatten().collect(),
        })
    }

    /// `λ2(a,a) = P([[π,a],a])` for a λ1-closed `a`.
    pub fn kuranishi_rep(&self, a: &VerticalSection) -> Result<VerticalSection> {
        check_same_chart(self.chart(), a.chart())?;
        if !self.lambda(std::slice::from_ref(a))?.is_zero() {
            return Err(CoisoError::NotLambdaClosed);
        }
        self.lambda(&[a.clone(), a.clone()])
    }

    pub fn twisted(&self) -> TwistedAlgebra {
        TwistedAlgebra { base: self.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub point: Vec<f64>,
    pub n: u32,
    pub partial: Vec<f64>,
    pub oracle: Vec<f64>,
    pub abs_error: f64,
}

/// Partial Maurer–Cartan sums against an oracle, one row per (point, n).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub coordinates: Vec<String>,
    /// Labels of the `∧²E` components, e.g. `p1_p2`.
    pub components: Vec<String>,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = self.coordinates.clone();
        h.push("n".into());
        h.extend(self.components.iter().map(|c| format!("partial_{c}")));
        h.extend(self.components.iter().map(|c| format!("oracle_{c}")));
        h.push("abs_error".into());
        h
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header().join(",");
        out.push('\n');
        for r in &self.rows {
            let mut cells: Vec<String> = r.point.iter().map(|v| format!("{v:e}")).collect();
            cells.push(r.n.to_string());
            cells.extend(r.partial.iter().map(|v| format!("{v:e}")));
            cells.extend(r.oracle.iter().map(|v| format!("{v:e}")));
            cells.push(format!("{:e}", r.abs_error));
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    /// Largest error over all points at order `n`.
    pub fn max_error_at(&self, n: u32) -> Option<f64> {
        self.rows
            .iter()
            .filter(|r| r.n == n)
            .map(|r| r.abs_error)
            .reduce(f64::max)
    }
}

/// An element `(X[1], a)` of `χ[2] ⊕ Γ(∧E)[1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwistedElement {
    pub field: MultiVectorField,
    pub section: VerticalSection,
}

impl TwistedElement {
    pub fn new(field: MultiVectorField, section: VerticalSection) -> Result<Self> {
        check_same_chart(field.chart(), section.chart())?;
        Ok(TwistedElement { field, section })
    }

    pub fn zero(chart: &Arc<ChartSpec>) -> Self {
        TwistedElement {
            field: MultiVectorField::zero(chart, 0),
            section: VerticalSection::zero(chart, 0),
        }
    }

    pub fn from_field(field: MultiVectorField) -> Self {
        let section = VerticalSection::zero(field.chart(), 0);
        TwistedElement { field, section }
    }

    pub fn from_section(section: VerticalSection) -> Self {
        let field = MultiVectorField::zero(section.chart(), 0);
        TwistedElement { field, section }
    }

    pub fn chart(&self) -> &Arc<ChartSpec> {
        self.field.chart()
    }

    pub fn is_zero(&self) -> bool {
        self.field.is_zero() && self.section.is_zero()
    }

    /// Degree in `W(C,π)`; fails for inhomogeneous elements.
    pub fn degree(&self) -> Result<i64> {
        let f = (!self.field.is_zero()).then(|| self.field.degree() as i64 - 2);
        let s = (!self.section.is_zero()).then(|| self.section.degree() as i64 - 1);
        match (f, s) {
            (Some(a), Some(b)) if a != b => Err(CoisoError::DegreeMismatch(format!(
                "inhomogeneous element: field part of degree {a}, section part of degree {b}"
            ))),
            (Some(a), _) | (None, Some(a)) => Ok(a),
            (None, None) => Ok(0),
        }
    }

    pub fn try_add(&self, other: &TwistedElement) -> Result<TwistedElement> {
        Ok(TwistedElement {
            field: self.field.try_add(&other.field)?,
            section: self.section.try_add(&other.section)?,
        })
    }

    pub fn neg(&self) -> TwistedElement {
        TwistedElement {
            field: self.field.neg(),
            section: self.section.neg(),
        }
    }

    pub fn scale_rational(&self, r: &crate::scalar::Rational) -> TwistedElement {
        TwistedElement {
            field: self.field.scale_rational(r),
            section: self.section.scale_rational(r),
        }
    }
}

/// `W(C,π)`: the brackets of the coisotropic algebra twisted by `(π[1], 0)`.
#[derive(Clone, Debug)]
pub struct TwistedAlgebra {
    base: CoisoAlgebra,
}

#[derive(Clone, Copy)]
enum Piece<'a> {
    Field(&'a MultiVectorField),
    Section(&'a VerticalSection),
}

impl Piece<'_> {
    fn degree(&self) -> i64 {
        match self {
            Piece::Field(x) => x.degree() as i64 - 2,
            Piece::Section(a) => a.degree() as i64 - 1,
        }
    }
}

impl TwistedAlgebra {
    pub fn base(&self) -> &CoisoAlgebra {
        &self.base
    }

    pub fn pi(&self) -> &MultiVectorField {
        self.base.pi()
    }

    fn chart(&self) -> &Arc<ChartSpec> {
        self.base.chart()
    }

    /// The bracket on homogeneous pieces with at most the listed slot patterns.
    fn pure(&self, pieces: &[Piece]) -> Result<Option<TwistedElement>> {
        let fields: Vec<usize> = pieces
            .iter()
            .enumerate()
            .filter(|(_, p)| matches!(p, Piece::Field(_)))
            .map(|(i, _)| i)
            .collect();
        match (fields.len(), pieces.len()) {
            (0, _) => {
                let secs: Vec<VerticalSection> = pieces
                    .iter()
                    .map(|p| match p {
                        Piece::Section(a) => (*a).clone(),
                        Piece::Field(_) => unreachable!(),
                    })
                    .collect();
                Ok(Some(TwistedElement::from_section(self.base.lambda(&secs)?)))
            }
            (1, 1) => {
                let Piece::Field(x) = pieces[0] else { unreachable!() };
                Ok(Some(TwistedElement::new(
                    self.pi().schouten(x)?.neg(),
                    x.projection_p(),
                )?))
            }
            (1, _) => {
                let i = fields[0];
                let Piece::Field(x) = pieces[i] else { unreachable!() };
                let moved: i64 = pieces[..i].iter().map(Piece::degree).sum();
                let negative = (x.degree() as i64 - 2) * moved % 2 != 0;
                let mut acc = x.clone();
                for p in pieces.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, p)| p) {
                    let Piece::Section(a) = p else { unreachable!() };
                    acc = acc.schouten(a.as_multivector())?;
                }
                let s = acc.projection_p();
                Ok(Some(TwistedElement::from_section(if negative { s.neg() } else { s })))
            }
            (2, 2) => {
                let (Piece::Field(x), Piece::Field(y)) = (pieces[0], pieces[1]) else {
                    unreachable!()
                };
                let b = x.schouten(y)?;
                // (−1)^{|X|} with |X| = p − 1
                let b = if x.degree() % 2 == 0 { b.neg() } else { b };
                Ok(Some(TwistedElement::from_field(b)))
            }
            _ => Ok(None),
        }
    }

    /// `λn(z1,…,zn)`, extended multilinearly over the field and section parts.
    pub fn lambda(&self, inputs: &[TwistedElement]) -> Result<TwistedElement> {
        if inputs.is_empty() {
            return Err(CoisoError::Unsupported("λ0 is not part of W(C,π)".into()));
        }
        for z in inputs {
            check_same_chart(self.chart(), z.chart())?;
        }
        let max_fields = if inputs.len() == 2 { 2 } else { 1 };
        let mut out = TwistedElement::zero(self.chart());
        let mut pieces = Vec::with_capacity(inputs.len());
        self.expand(inputs, &mut pieces, 0, max_fields, &mut out)?;
        Ok(out)
    }

    fn expand<'a>(
        &self,
        inputs: &'a [TwistedElement],
        pieces: &mut Vec<Piece<'a>>,
        fields: usize,
        max_fields: usize,
        out: &mut TwistedElement,
    ) -> Result<()> {
        let i = pieces.len();
        if i == inputs.len() {
            if let Some(v) = self.pure(pieces)? {
                *out = out.try_add(&v)?;
            }
            return Ok(());
        }
        let z = &inputs[i];
        if !z.section.is_zero() {
            pieces.push(Piece::Section(&z.section));
            self.expand(inputs, pieces, fields, max_fields, out)?;
            pieces.pop();
        }
        if !z.field.is_zero() && fields < max_fields {
            pieces.push(Piece::Field(&z.field));
            self.expand(inputs, pieces, fields + 1, max_fields, out)?;
            pieces.pop();
        }
        Ok(())
    }

    /// Maurer–Cartan series of `(τ[1], α)` in `W(C,π)`:
    /// `Σ_{k≥1} (1/k!) λk(z,…,z)` with `z = (τ, α)`.
    ///
    /// The field part is `−[π,τ] − ½[τ,τ]`; the section part equals
    /// `P(e^{[·,α]}(π + τ))`.
    pub fn maurer_cartan(&self, tau: &MultiVectorField, alpha: &VerticalSection) -> Result<TwistedElement> {
        if self.pi().jet_order().is_some() || tau.jet_order().is_some() {
            return Err(CoisoError::JetInput);
        }
        let z = TwistedElement::new(tau.clone(), alpha.clone())?;
        if z.degree()? != 0 {
            return Err(CoisoError::DegreeMismatch(
                "Maurer–Cartan input must have degree 0 (a bivector and a section of E)".into(),
            ));
        }
        let cap = self.pi().max_y_degree().max(tau.max_y_degree()) as usize + 4;
        let mut sum = TwistedElement::zero(self.chart());
        let mut factorial = rat(1, 1);
        for k in 1..=cap {
            factorial /= rat(k as i64, 1);
            let args = vec![z.clone(); k];
            let term = self.lambda(&args)?.scale_rational(&factorial);
            sum = sum.try_add(&term)?;
        }
        Ok(sum)
    }
}

/// A graded vector space with degree-1 graded-symmetric multibrackets.
pub trait LInfinityAlgebra {
    type Element: Clone;
    fn degree(&self, x: &Self::Element) -> Result<i64>;
    fn bracket(&self, inputs: &[Self::Element]) -> Result<Self::Element>;
    fn add(&self, a: &Self::Element, b: &Self::Element) -> Result<Self::Element>;
    fn negate(&self, a: &Self::Element) -> Self::Element;
    fn is_zero(&self, x: &Self::Element) -> bool;
}

impl LInfinityAlgebra for CoisoAlgebra {
    type Element = VerticalSection;

    fn degree(&self, x: &VerticalSection) -> Result<i64> {
        Ok(x.degree() as i64 - 1)
    }

    fn bracket(&self, inputs: &[VerticalSection]) -> Result<VerticalSection> {
        self.lambda(inputs)
    }

    fn add(&self, a: &VerticalSection, b: &VerticalSection) -> Result<VerticalSection> {
        a.try_add(b)
    }

    fn negate(&self, a: &VerticalSection) -> VerticalSection {
        a.neg()
    }

    fn is_zero(&self, x: &VerticalSection) -> bool {
        x.is_zero()
    }
}

impl LInfinityAlgebra for TwistedAlgebra {
    type Element = TwistedElement;

    fn degree(&self, x: &TwistedElement) -> Result<i64> {
        x.degree()
    }

    fn bracket(&self, inputs: &[TwistedElement]) -> Result<TwistedElement> {
        self.lambda(inputs)
    }

    fn add(&self, a: &TwistedElement, b: &TwistedElement) -> Result<TwistedElement> {
        a.try_add(b)
    }

    fn negate(&self, a: &TwistedElement) -> TwistedElement {
        a.neg()
    }

    fn is_zero(&self, x: &TwistedElement) -> bool {
        x.is_zero()
    }
}

/// `Σ_{i=1}^{n} Σ_{σ ∈ Sh(i, n−i)} ε(σ) λ_{n−i+1}(λ_i(v_σ(1),…,v_σ(i)), v_σ(i+1),…,v_σ(n))`
/// where `ε` is the Koszul sign of the unshuffle.
pub fn jacobiator<A: LInfinityAlgebra>(alg: &A, inputs: &[A::Element]) -> Result<A::Element> {
    let n = inputs.len();
    if n == 0 || n > 16 {
        return Err(CoisoError::Unsupported(format!("jacobiator of {n} inputs")));
    }
    let degrees = inputs.iter().map(|v| alg.degree(v)).collect::<Result<Vec<_>>>()?;
    let mut acc: Option<A::Element> = None;
    for mask in 1u32..(1 << n) {
        let inner_idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let outer_idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) == 0).collect();
        // Koszul sign: every pair (a < b) with b moved in front of a
        let mut swaps = 0i64;
        for &b in &inner_idx {
            for &a in &outer_idx {
                if a < b {
                    swaps += degrees[a] * degrees[b];
                }
            }
        }
        let inner_args: Vec<A::Element> = inner_idx.iter().map(|&i| inputs[i].clone()).collect();
        let inner = alg.bracket(&inner_args)?;
        let mut outer_args = vec![inner];
        outer_args.extend(outer_idx.iter().map(|&i| inputs[i].clone()));
        let mut term = alg.bracket(&outer_args)?;
        if swaps.rem_euclid(2) == 1 {
            term = alg.negate(&term);
        }
        acc = Some(match acc {
            None => term,
            Some(a) => alg.add(&a, &term)?,
        });
    }
    Ok(acc.expect("at least one unshuffle"))
}

/// The higher Jacobi identity of order `inputs.len() ≤ 3` holds exactly.
pub fn higher_jacobi_verify<A: LInfinityAlgebra>(alg: &A, inputs: &[A::Element]) -> Result<bool> {
    if inputs.is_empty() || inputs.len() > 3 {
        return Err(CoisoError::Unsupported(format!(
            "higher Jacobi check of order {} (supported: 1 to 3)",
            inputs.len()
        )));
    }
    Ok(alg.is_zero(&jacobiator(alg, inputs)?))
}
