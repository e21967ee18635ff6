//! Multivector fields with ring coefficients and the Schouten–Nijenhuis
//! bracket.
//!
//! Sign convention: for homogeneous `X` of degree `p` and `Y` of degree `q`,
//!
//! ```text
//! [X, Y] = Σ_i (X ⟵∂/∂θ_i) ∧ ∂_i Y  −  (−1)^{(p−1)(q−1)} Σ_i (Y ⟵∂/∂θ_i) ∧ ∂_i X
//! ```
//!
//! where `θ_i` stands for `∂_i`, `⟵∂/∂θ_i` removes `θ_i` after moving it to
//! the right end, and `∂_i` differentiates coefficients. This gives
//! `[X, f] = X(f)` for a vector field, the Lie bracket on vector fields,
//! graded antisymmetry `[X,Y] = −(−1)^{(p−1)(q−1)}[Y,X]` and the Leibniz
//! rule `[X, Y∧Z] = [X,Y]∧Z + (−1)^{(p−1)q} Y∧[X,Z]`. With it,
//! `[π, a] = −L_a π` for a vector field `a`, so `Σ_k (1/k!) ad_a^k π` is
//! the pushforward of `π` along the time-1 flow of `a`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::chart::{check_same_chart, ChartSpec};
use crate::error::{CoisoError, Result};
use crate::graded::{
    blade_from_indices, blade_indices, count_above, permutation_sign, wedge_sign,
    Blade, Graded,
};
use crate::ring::RingElement;
use crate::scalar::{rat, Rational};

#[derive(Clone, PartialEq)]
pub struct MultiVectorField(pub(crate) Graded);

impl fmt::Debug for MultiVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiVectorField<{}>[{}]", self.0.degree, self)
    }
}

impl fmt::Display for MultiVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.render("@"))
    }
}

impl MultiVectorField {
    pub fn zero(chart: &Arc<ChartSpec>, degree: usize) -> Self {
        MultiVectorField(Graded::zero(chart, degree))
    }

    /// A function viewed as a degree-0 multivector.
    pub fn function(f: RingElement) -> Self {
        let mut g = Graded::zero(f.chart(), 0);
        g.add_term(0, f);
        MultiVectorField(g)
    }

    /// The coordinate vector field `∂_name`.
    pub fn coordinate_field(chart: &Arc<ChartSpec>, name: &str) -> Result<Self> {
        MultiVectorField::basis(chart, &[name], RingElement::one(chart))
    }

    /// `coef · ∂_{n1} ∧ … ∧ ∂_{nk}` in the given (not necessarily sorted) order.
    pub fn basis(chart: &Arc<ChartSpec>, names: &[&str], coef: RingElement) -> Result<Self> {
        let indices = names
            .iter()
            .map(|n| chart.require_index(n))
            .collect::<Result<Vec<_>>>()?;
        MultiVectorField::from_indices(chart, &indices, coef)
    }

    pub fn from_indices(chart: &Arc<ChartSpec>, indices: &[usize], coef: RingElement) -> Result<Self> {
        check_same_chart(chart, coef.chart())?;
        let mut g = Graded::zero(chart, indices.len());
        if let (Some(blade), Some(sign)) = (blade_from_indices(indices), permutation_sign(indices)) {
            g.add_term(blade, if sign < 0 { -coef } else { coef });
        }
        Ok(MultiVectorField(g))
    }

    pub fn chart(&self) -> &Arc<ChartSpec> {
        &self.0.chart
    }

    pub fn degree(&self) -> usize {
        self.0.degree
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// `(sorted coordinate indices, coefficient)` pairs in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<usize>, &RingElement)> {
        self.0.terms.iter().map(|(b, c)| (blade_indices(*b), c))
    }

    pub(crate) fn blades(&self) -> impl Iterator<Item = (Blade, &RingElement)> {
        self.0.terms.iter().map(|(b, c)| (*b, c))
    }

    /// Coefficient of `∂_{i1}∧…∧∂_{ik}` for sorted indices.
    pub fn coefficient(&self, indices: &[usize]) -> RingElement {
        blade_from_indices(indices)
            .and_then(|b| self.0.terms.get(&b).cloned())
            .unwrap_or_else(|| RingElement::zero(self.chart()))
    }

    pub fn try_add(&self, other: &MultiVectorField) -> Result<MultiVectorField> {
        self.0.try_add(&other.0).map(MultiVectorField)
    }

    pub fn try_sub(&self, other: &MultiVectorField) -> Result<MultiVectorField> {
        self.0.try_add(&other.0.neg()).map(MultiVectorField)
    }

    pub fn neg(&self) -> MultiVectorField {
        MultiVectorField(self.0.neg())
    }

    pub fn scale(&self, f: &RingElement) -> Result<MultiVectorField> {
        self.0.scale(f).map(MultiVectorField)
    }

    pub fn scale_rational(&self, r: &Rational) -> MultiVectorField {
        MultiVectorField(self.0.scale_rational(r))
    }

    pub fn wedge(&self, other: &MultiVectorField) -> Result<MultiVectorField> {
        self.0.wedge(&other.0).map(MultiVectorField)
    }

    pub fn map_coefficients<F: Fn(&RingElement) -> RingElement>(&self, f: F) -> MultiVectorField {
        MultiVectorField(self.0.map_coefficients(f))
    }

    pub fn max_y_degree(&self) -> u32 {
        self.0.max_y_degree()
    }

    /// Smallest jet order among the coefficients; `None` if all are exact.
    pub fn jet_order(&self) -> Option<u32> {
        self.0.jet_order()
    }

    pub fn to_jet(&self, n: u32) -> MultiVectorField {
        self.map_coefficients(|c| c.to_jet(n))
    }

    /// Every coefficient restricted to `y = 0`.
    pub fn at_zero_fibre(&self) -> MultiVectorField {
        self.map_coefficients(RingElement::at_zero_fibre)
    }

    fn base_mask(&self) -> Blade {
        let nb = self.chart().base_dim();
        if nb >= 64 {
            u64::MAX
        } else {
            (1u64 << nb) - 1
        }
    }

    /// Schouten–Nijenhuis bracket `[self, other]`.
    pub fn schouten(&self, other: &MultiVectorField) -> Result<MultiVectorField> {
        check_same_chart(self.chart(), other.chart())?;
        let (p, q) = (self.degree() as i64, other.degree() as i64);
        if p + q == 0 {
            return Ok(MultiVectorField::zero(self.chart(), 0));
        }
        let swap_negative = ((p - 1) * (q - 1)).rem_euclid(2) == 0;
        let mut out = Graded::zero(self.chart(), (p + q - 1) as usize);
        for (a, f) in self.blades() {
            for (b, g) in other.blades() {
                for i in blade_indices(a) {
                    let dg = g.derivative(i);
                    if dg.is_zero() {
                        continue;
                    }
                    let rest = a & !(1 << i);
                    if let Some(ws) = wedge_sign(rest, b) {
                        let negative = (count_above(a, i) % 2 == 1) != (ws < 0);
                        let c = f * &dg;
                        out.add_term(rest | b, if negative { -c } else { c });
                    }
                }
                for j in blade_indices(b) {
                    let df = f.derivative(j);
                    if df.is_zero() {
                        continue;
                    }
                    let rest = b & !(1 << j);
                    if let Some(ws) = wedge_sign(rest, a) {
                        // overall factor −(−1)^{(p−1)(q−1)}
                        let negative =
                            ((count_above(b, j) % 2 == 1) != (ws < 0)) != swap_negative;
                        let c = g * &df;
                        out.add_term(rest | a, if negative { -c } else { c });
                    }
                }
            }
        }
        Ok(MultiVectorField(out))
    }

    /// `P`: restrict to the zero section and keep only the purely vertical part.
    pub fn projection_p(&self) -> VerticalSection {
        let mask = self.base_mask();
        let mut out = Graded::zero(self.chart(), self.degree());
        for (b, c) in self.blades() {
            if b & mask == 0 {
                out.add_term(b, c.at_zero_fibre());
            }
        }
        VerticalSection(MultiVectorField(out))
    }

    /// Image of `∂_i` under the translation `(x, y) ↦ (x, y + α(x))`.
    fn translated_basis_vector(&self, i: usize, alpha: &VerticalSection) -> Result<MultiVectorField> {
        let chart = self.chart();
        let mut v = MultiVectorField::from_indices(chart, &[i], RingElement::one(chart))?;
        if chart.is_base_index(i) {
            for (j, comp) in alpha.components()?.iter().enumerate() {
                let d = comp.derivative(i);
                if !d.is_zero() {
                    let extra = MultiVectorField::from_indices(chart, &[chart.fibre_index(j)], d)?;
                    v = v.try_add(&extra)?;
                }
            }
        }
        Ok(v)
    }

    /// Pushforward along the fibre translation `φ^α(x, y) = (x, y + α(x))`.
    ///
    /// Coefficients are pulled back by `φ^{−α}` (Taylor shift by `−α`) and
    /// `∂x_i ↦ ∂x_i + Σ_j ∂α_j/∂x_i ∂y_j`, `∂y_j ↦ ∂y_j`.
    pub fn fibre_translate_pushforward(&self, alpha: &VerticalSection) -> Result<MultiVectorField> {
        check_same_chart(self.chart(), alpha.chart())?;
        let comps = alpha.components()?;
        let back: Vec<RingElement> = comps.iter().map(|c| -c).collect();
        let images = (0..self.chart().dim())
            .map(|i| self.translated_basis_vector(i, alpha))
            .collect::<Result<Vec<_>>>()?;
        let mut out = MultiVectorField::zero(self.chart(), self.degree());
        for (b, f) in self.blades() {
            let mut w = MultiVectorField::function(f.taylor_shift(&back)?);
            for i in blade_indices(b) {
                w = w.wedge(&images[i])?;
            }
            out = out.try_add(&w)?;
        }
        Ok(out)
    }

    /// Iteration cap for [`exp_ad`](Self::exp_ad) when none is given.
    pub fn default_exp_cap(&self) -> usize {
        self.max_y_degree() as usize + self.degree() + 2
    }

    /// `e^{[·,α]} X = Σ_k (1/k!) [[…[X, α], …], α]`, summed until a term vanishes.
    pub fn exp_ad(&self, alpha: &VerticalSection, cap: Option<usize>) -> Result<MultiVectorField> {
        check_same_chart(self.chart(), alpha.chart())?;
        if alpha.degree() != 1 {
            return Err(CoisoError::NotVertical("exp_ad needs a degree-1 section".into()));
        }
        let cap = cap.unwrap_or_else(|| self.default_exp_cap());
        let a = alpha.as_multivector();
        let mut acc = self.clone();
        let mut term = self.clone();
        for k in 1..=cap {
            term = term.schouten(a)?.scale_rational(&rat(1, k as i64));
            if term.is_zero() {
                return Ok(acc);
            }
            acc = acc.try_add(&term)?;
        }
        Err(CoisoError::CapExceeded { cap })
    }

    /// Numeric coefficients at a point.
    pub fn eval_terms(&self, point: &[f64]) -> Result<Vec<(Vec<usize>, Complex64)>> {
        self.blades()
            .map(|(b, c)| Ok((blade_indices(b), c.eval(point)?)))
            .collect()
    }

    /// Antisymmetric matrix `π(dx_a, dx_b)` of a bivector at a point (real parts).
    pub fn bivector_matrix(&self, point: &[f64]) -> Result<Vec<Vec<f64>>> {
        if self.degree() != 2 {
            return Err(CoisoError::DegreeMismatch("bivector_matrix needs degree 2".into()));
        }
        let n = self.chart().dim();
        let mut m = vec![vec![0.0; n]; n];
        for (idx, v) in self.eval_terms(point)? {
            m[idx[0]][idx[1]] += v.re;
            m[idx[1]][idx[0]] -= v.re;
        }
        Ok(m)
    }

    /// Exact coefficient matrix `π(dx_a, dx_b)` of a bivector.
    pub fn bivector_coefficients(&self) -> Result<Vec<Vec<RingElement>>> {
        if self.degree() != 2 {
            return Err(CoisoError::DegreeMismatch("expected a bivector".into()));
        }
        let n = self.chart().dim();
        let mut m = vec![vec![RingElement::zero(self.chart()); n]; n];
        for (b, c) in self.blades() {
            let idx = blade_indices(b);
            m[idx[0]][idx[1]] = c.clone();
            m[idx[1]][idx[0]] = -c;
        }
        Ok(m)
    }

    /// Builds a bivector from an antisymmetric coefficient matrix (upper triangle is read).
    pub fn bivector_from_matrix(chart: &Arc<ChartSpec>, m: &[Vec<RingElement>]) -> Result<MultiVectorField> {
        let n = chart.dim();
        if m.len() != n || m.iter().any(|r| r.len() != n) {
            return Err(CoisoError::DimensionMismatch {
                expected: n,
                got: m.len(),
            });
        }
        let mut g = Graded::zero(chart, 2);
        for (a, row) in m.iter().enumerate() {
            for (b, c) in row.iter().enumerate().skip(a + 1) {
                g.add_term((1 << a) | (1 << b), c.clone());
            }
        }
        Ok(MultiVectorField(g))
    }

    /// True when every term is purely vertical.
    pub fn is_vertical(&self) -> bool {
        let mask = self.base_mask();
        self.blades().all(|(b, _)| b & mask == 0)
    }
}

/// A section of `∧E` over the base: only `∂y` factors, coefficients free of
/// fibre coordinates. Doubles as a fibrewise-constant vertical multivector.
#[derive(Clone, PartialEq)]
pub struct VerticalSection(MultiVectorField);

impl fmt::Debug for VerticalSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VerticalSection<{}>[{}]", self.degree(), self.0)
    }
}

impl fmt::Display for VerticalSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl VerticalSection {
    pub fn new(field: MultiVectorField) -> Result<Self> {
        if !field.is_vertical() {
            return Err(CoisoError::NotVertical("term with a base direction".into()));
        }
        if field.blades().any(|(_, c)| !c.is_fibre_free()) {
            return Err(CoisoError::NotVertical("coefficient depends on the fibre".into()));
        }
        Ok(VerticalSection(field))
    }

    pub fn zero(chart: &Arc<ChartSpec>, degree: usize) -> Self {
        VerticalSection(MultiVectorField::zero(chart, degree))
    }

    /// Degree-1 section `Σ_j comps[j] ∂y_j`.
    pub fn from_components(chart: &Arc<ChartSpec>, comps: Vec<RingElement>) -> Result<Self> {
        if comps.len() != chart.fibre_dim() {
            return Err(CoisoError::ShiftArity {
                expected: chart.fibre_dim(),
                got: comps.len(),
            });
        }
        let mut g = Graded::zero(chart, 1);
        for (j, c) in comps.into_iter().enumerate() {
            check_same_chart(chart, c.chart())?;
            g.add_term(1 << chart.fibre_index(j), c);
        }
        VerticalSection::new(MultiVectorField(g))
    }

    pub fn chart(&self) -> &Arc<ChartSpec> {
        self.0.chart()
    }

    pub fn degree(&self) -> usize {
        self.0.degree()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn as_multivector(&self) -> &MultiVectorField {
        &self.0
    }

    pub fn into_multivector(self) -> MultiVectorField {
        self.0
    }

    /// Components of a degree-1 section, one per fibre coordinate.
    pub fn components(&self) -> Result<Vec<RingElement>> {
        if self.degree() != 1 {
            return Err(CoisoError::NotVertical("components need a degree-1 section".into()));
        }
        let chart = self.chart();
        Ok((0..chart.fibre_dim())
            .map(|j| self.0.coefficient(&[chart.fibre_index(j)]))
            .collect())
    }

    /// Tuple form `(c1, c2, …)` of a degree-1 section.
    pub fn render_components(&self) -> Result<String> {
        let parts: Vec<String> = self.components()?.iter().map(ToString::to_string).collect();
        Ok(format!("({})", parts.join(", ")))
    }

    pub fn try_add(&self, other: &VerticalSection) -> Result<VerticalSection> {
        self.0.try_add(&other.0).map(VerticalSection)
    }

    pub fn try_sub(&self, other: &VerticalSection) -> Result<VerticalSection> {
        self.0.try_sub(&other.0).map(VerticalSection)
    }

    pub fn neg(&self) -> VerticalSection {
        VerticalSection(self.0.neg())
    }

    pub fn scale_rational(&self, r: &Rational) -> VerticalSection {
        VerticalSection(self.0.scale_rational(r))
    }

    /// Scales by a fibre-free function.
    pub fn scale(&self, f: &RingElement) -> Result<VerticalSection> {
        VerticalSection::new(self.0.scale(f)?)
    }

    pub fn wedge(&self, other: &VerticalSection) -> Result<VerticalSection> {
        self.0.wedge(&other.0).map(VerticalSection)
    }

    /// Holds iff every coefficient is real-valued.
    pub fn is_real(&self) -> bool {
        self.0.blades().all(|(_, c)| c.is_real())
    }

    /// Numeric components at a base point, in canonical blade order.
    ///
    /// `base_point` has one entry per base coordinate; fibre values are 0.
    pub fn eval_at_base(&self, base_point: &[f64]) -> Result<Vec<(Vec<usize>, Complex64)>> {
        let chart = self.chart();
        if base_point.len() != chart.base_dim() {
            return Err(CoisoError::DimensionMismatch {
                expected: chart.base_dim(),
                got: base_point.len(),
            });
        }
        let mut full = base_point.to_vec();
        full.resize(chart.dim(), 0.0);
        self.0.eval_terms(&full)
    }
}

/// All degree-`k` blades made of fibre directions, as sorted index lists.
pub fn vertical_blades(chart: &ChartSpec, k: usize) -> Vec<Vec<usize>> {
    let fibres: Vec<usize> = (0..chart.fibre_dim()).map(|j| chart.fibre_index(j)).collect();
    let mut out = Vec::new();
    let n = fibres.len();
    for mask in 0u64..(1u64 << n) {
        if mask.count_ones() as usize == k {
            out.push((0..n).filter(|b| mask & (1 << b) != 0).map(|b| fibres[b]).collect());
        }
    }
    out.sort();
    out
}
