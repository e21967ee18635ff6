//! Differential forms with ring coefficients, the fibrewise degree grading,
//! leafwise differentials and the musical maps of a bivector.
//!
//! For a bivector `π` the anchor is `♯(γ) = π(γ, ·)`. Its dual
//! `♯*: ∧T*E → ∧TE` acts on one-forms by `♯*(γ) = π(·, γ) = −♯(γ)` and is
//! extended multiplicatively. With this choice `P ∘ ♯* = ♯̃* ∘ ι*`, where
//! `♯̃*: Γ(∧F*) → Γ(∧E)` is the transpose of `♯̃ = ♯|_{E*}: E* → F`.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::chart::{check_same_chart, ChartSpec};
use crate::error::{CoisoError, Result};
use crate::graded::{
    blade_from_indices, blade_indices, permutation_sign, wedge_sign, Blade, Graded,
};
use crate::matrix::{ring_inverse, RingMatrix};
use crate::multivector::{MultiVectorField, VerticalSection};
use crate::ring::RingElement;
use crate::scalar::Rational;

#[derive(Clone, PartialEq)]
pub struct DifferentialForm(pub(crate) Graded);

impl fmt::Debug for DifferentialForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DifferentialForm<{}>[{}]", self.0.degree, self)
    }
}

impl fmt::Display for DifferentialForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.render("d"))
    }
}

/// A subbundle `F ⊂ TC` spanned by coordinate directions of the base.
#[derive(Clone, Debug, PartialEq)]
pub struct SubbundleSpec {
    chart: Arc<ChartSpec>,
    mask: Blade,
}

impl SubbundleSpec {
    pub fn new(chart: &Arc<ChartSpec>, names: &[&str]) -> Result<Self> {
        if names.is_empty() {
            return Err(CoisoError::Subbundle("F must be nonempty".into()));
        }
        let mut mask = 0;
        for n in names {
            let i = chart.require_index(n)?;
            if !chart.is_base_index(i) {
                return Err(CoisoError::Subbundle(format!("`{n}` is not a base direction")));
            }
            mask |= 1 << i;
        }
        Ok(SubbundleSpec {
            chart: chart.clone(),
            mask,
        })
    }

    pub fn from_indices(chart: &Arc<ChartSpec>, indices: &[usize]) -> Result<Self> {
        let names: Vec<String> = indices
            .iter()
            .map(|&i| {
                if i < chart.dim() {
                    Ok(chart.name(i).to_string())
                } else {
                    Err(CoisoError::Subbundle(format!("index {i} out of range")))
                }
            })
            .collect::<Result<_>>()?;
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        SubbundleSpec::new(chart, &refs)
    }

    pub fn chart(&self) -> &Arc<ChartSpec> {
        &self.chart
    }

    pub fn indices(&self) -> Vec<usize> {
        blade_indices(self.mask)
    }

    pub fn rank(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn contains(&self, index: usize) -> bool {
        index < 64 && self.mask & (1 << index) != 0
    }

    /// The same directions on another chart with identical base coordinates.
    pub fn on_chart(&self, chart: &Arc<ChartSpec>) -> Result<Self> {
        let names: Vec<String> = self.indices().iter().map(|&i| self.chart.name(i).to_string()).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        SubbundleSpec::new(chart, &refs)
    }

    pub(crate) fn mask(&self) -> Blade {
        self.mask
    }
}

impl DifferentialForm {
    pub fn zero(chart: &Arc<ChartSpec>, degree: usize) -> Self {
        DifferentialForm(Graded::zero(chart, degree))
    }

    pub fn function(f: RingElement) -> Self {
        let mut g = Graded::zero(f.chart(), 0);
        g.add_term(0, f);
        DifferentialForm(g)
    }

    /// `coef · d n1 ∧ … ∧ d nk` in the given order.
    pub fn basis(chart: &Arc<ChartSpec>, names: &[&str], coef: RingElement) -> Result<Self> {
        let indices = names
            .iter()
            .map(|n| chart.require_index(n))
            .collect::<Result<Vec<_>>>()?;
        DifferentialForm::from_indices(chart, &indices, coef)
    }

    pub fn from_indices(chart: &Arc<ChartSpec>, indices: &[usize], coef: RingElement) -> Result<Self> {
        check_same_chart(chart, coef.chart())?;
        let mut g = Graded::zero(chart, indices.len());
        if let (Some(b), Some(s)) = (blade_from_indices(indices), permutation_sign(indices)) {
            g.add_term(b, if s < 0 { -coef } else { coef });
        }
        Ok(DifferentialForm(g))
    }

    pub fn differential(chart: &Arc<ChartSpec>, name: &str) -> Result<Self> {
        DifferentialForm::basis(chart, &[name], RingElement::one(chart))
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

    pub fn terms(&self) -> impl Iterator<Item = (Vec<usize>, &RingElement)> {
        self.0.terms.iter().map(|(b, c)| (blade_indices(*b), c))
    }

    pub(crate) fn blades(&self) -> impl Iterator<Item = (Blade, &RingElement)> {
        self.0.terms.iter().map(|(b, c)| (*b, c))
    }

    pub fn coefficient(&self, indices: &[usize]) -> RingElement {
        blade_from_indices(indices)
            .and_then(|b| self.0.terms.get(&b).cloned())
            .unwrap_or_else(|| RingElement::zero(self.chart()))
    }

    pub fn try_add(&self, other: &DifferentialForm) -> Result<DifferentialForm> {
        self.0.try_add(&other.0).map(DifferentialForm)
    }

    pub fn try_sub(&self, other: &DifferentialForm) -> Result<DifferentialForm> {
        self.0.try_add(&other.0.neg()).map(DifferentialForm)
    }

    pub fn neg(&self) -> DifferentialForm {
        DifferentialForm(self.0.neg())
    }

    pub fn scale(&self, f: &RingElement) -> Result<DifferentialForm> {
        self.0.scale(f).map(DifferentialForm)
    }

    pub fn scale_rational(&self, r: &Rational) -> DifferentialForm {
        DifferentialForm(self.0.scale_rational(r))
    }

    pub fn wedge(&self, other: &DifferentialForm) -> Result<DifferentialForm> {
        self.0.wedge(&other.0).map(DifferentialForm)
    }

    pub fn map_coefficients<F: Fn(&RingElement) -> RingElement>(&self, f: F) -> DifferentialForm {
        DifferentialForm(self.0.map_coefficients(f))
    }

    /// Exterior derivative.
    pub fn de_rham_d(&self) -> DifferentialForm {
        self.d_restricted(|_| true)
    }

    fn d_restricted<P: Fn(usize) -> bool>(&self, allowed: P) -> DifferentialForm {
        let mut out = Graded::zero(self.chart(), self.degree() + 1);
        for (b, f) in self.blades() {
            for i in 0..self.chart().dim() {
                if !allowed(i) || b & (1 << i) != 0 {
                    continue;
                }
                let df = f.derivative(i);
                if df.is_zero() {
                    continue;
                }
                if let Some(s) = wedge_sign(1 << i, b) {
                    out.add_term(b | (1 << i), if s < 0 { -df } else { df });
                }
            }
        }
        DifferentialForm(out)
    }

    /// Set of fibrewise degrees: per summand, fibre-coordinate degree of the
    /// coefficient monomial plus the number of `dy` factors.
    pub fn fibrewise_degrees(&self) -> BTreeSet<u32> {
        let chart = self.chart();
        let mut out = BTreeSet::new();
        for (b, f) in self.blades() {
            let dy = blade_indices(b).iter().filter(|&&i| !chart.is_base_index(i)).count() as u32;
            for (m, _) in f.terms() {
                out.insert(m.y_degree() + dy);
            }
        }
        out
    }

    /// Whether the form lies in `Ω_(≤k)`.
    pub fn is_in_omega_le(&self, k: u32) -> bool {
        self.fibrewise_degrees().iter().all(|&d| d <= k)
    }

    /// Pullback along the zero section, as a form on the base chart.
    pub fn pullback_zero_section(&self) -> DifferentialForm {
        let chart = self.chart();
        let base = chart.base_chart();
        let mut out = Graded::zero(&base, self.degree());
        for (b, f) in self.blades() {
            if blade_indices(b).iter().all(|&i| chart.is_base_index(i)) {
                let c = f
                    .at_zero_fibre()
                    .restrict_to_base(&base)
                    .expect("restriction to y=0 is fibre-free");
                out.add_term(b, c);
            }
        }
        DifferentialForm(out)
    }

    /// Pullback of a base form along the bundle projection.
    pub fn lift_to_bundle(&self, bundle: &Arc<ChartSpec>) -> Result<DifferentialForm> {
        let mut out = Graded::zero(bundle, self.degree());
        for (b, f) in self.blades() {
            out.add_term(b, f.lift_to_bundle(bundle)?);
        }
        Ok(DifferentialForm(out))
    }

    /// Interior product with `∂_index`.
    pub fn interior(&self, index: usize) -> DifferentialForm {
        let mut out = Graded::zero(self.chart(), self.degree().saturating_sub(1));
        for (b, f) in self.blades() {
            if b & (1 << index) == 0 {
                continue;
            }
            let below = (b & ((1u64 << index) - 1)).count_ones();
            let c = f.clone();
            out.add_term(b & !(1 << index), if below % 2 == 1 { -c } else { c });
        }
        DifferentialForm(out)
    }

    /// `ι*`: restriction to the zero section and to the directions of `F`.
    pub fn restrict_to_leaf(&self, leaf: &SubbundleSpec) -> Result<DifferentialForm> {
        check_same_chart(self.chart(), leaf.chart())?;
        let mut out = Graded::zero(self.chart(), self.degree());
        for (b, f) in self.blades() {
            if b & !leaf.mask() == 0 {
                out.add_term(b, f.at_zero_fibre());
            }
        }
        Ok(DifferentialForm(out))
    }

    /// Leafwise differential `d_F` for a form built only from `dF` factors.
    pub fn leafwise_d(&self, leaf: &SubbundleSpec) -> Result<DifferentialForm> {
        check_same_chart(self.chart(), leaf.chart())?;
        for (b, f) in self.blades() {
            if b & !leaf.mask() != 0 {
                return Err(CoisoError::NonAdapted(format!(
                    "factor outside F in term {}",
                    blade_indices(b)
                        .iter()
                        .map(|&i| format!("d{}", self.chart().name(i)))
                        .collect::<Vec<_>>()
                        .join(" /\\ ")
                )));
            }
            if !f.is_fibre_free() {
                return Err(CoisoError::NonAdapted("coefficient depends on the fibre".into()));
            }
        }
        Ok(self.d_restricted(|i| leaf.contains(i)))
    }
}

fn require_bivector(pi: &MultiVectorField) -> Result<RingMatrix> {
    if pi.degree() != 2 {
        return Err(CoisoError::DegreeMismatch(format!(
            "expected a bivector, got degree {}",
            pi.degree()
        )));
    }
    pi.bivector_coefficients()
}

/// Applies a linear map on basis one-forms (`images[a]` is the image of
/// `dx_a`, a degree-1 element) multiplicatively to every blade.
fn apply_multiplicative<T, W>(
    blades: impl Iterator<Item = (Blade, RingElement)>,
    images: &[Option<T>],
    unit: impl Fn(RingElement) -> T,
    wedge: W,
    add: impl Fn(&T, &T) -> Result<T>,
    zero: T,
) -> Result<T>
where
    W: Fn(&T, &T) -> Result<T>,
{
    let mut out = zero;
    for (b, c) in blades {
        let mut acc = unit(c);
        let mut vanished = false;
        for i in blade_indices(b) {
            match &images[i] {
                Some(img) => acc = wedge(&acc, img)?,
                None => {
                    vanished = true;
                    break;
                }
            }
        }
        if !vanished {
            out = add(&out, &acc)?;
        }
    }
    Ok(out)
}

/// `♯*`: one-form `dx_a ↦ Σ_b π(dx_b, dx_a) ∂_b`, extended multiplicatively.
pub fn sharp_star(pi: &MultiVectorField, form: &DifferentialForm) -> Result<MultiVectorField> {
    check_same_chart(pi.chart(), form.chart())?;
    let m = require_bivector(pi)?;
    let chart = pi.chart();
    let n = chart.dim();
    let images = (0..n)
        .map(|a| {
            let mut v = MultiVectorField::zero(chart, 1);
            for (b, row) in m.iter().enumerate() {
                if !row[a].is_zero() {
                    v = v.try_add(&MultiVectorField::from_indices(chart, &[b], row[a].clone())?)?;
                }
            }
            Ok(Some(v))
        })
        .collect::<Result<Vec<_>>>()?;
    apply_multiplicative(
        form.blades().map(|(b, c)| (b, c.clone())),
        &images,
        MultiVectorField::function,
        |x, y| x.wedge(y),
        |x, y| x.try_add(y),
        MultiVectorField::zero(chart, form.degree()),
    )
}

/// `(♯*)^{-1}`: requires the coefficient matrix of `π` to be invertible over the ring.
pub fn musical_inverse(pi: &MultiVectorField, z: &MultiVectorField) -> Result<DifferentialForm> {
    check_same_chart(pi.chart(), z.chart())?;
    let m = require_bivector(pi)?;
    let chart = pi.chart();
    let n = chart.dim();
    // ♯*(dx_a) = Σ_b S[a][b] ∂_b with S = Mᵀ; then ∂_b ↦ Σ_a S⁻¹[b][a] dx_a.
    let s: RingMatrix = (0..n).map(|a| (0..n).map(|b| m[b][a].clone()).collect()).collect();
    let s_inv = ring_inverse(&s, chart).map_err(|e| match e {
        CoisoError::SingularMatrix => CoisoError::Degenerate,
        other => other,
    })?;
    let images = (0..n)
        .map(|b| {
            let mut f = DifferentialForm::zero(chart, 1);
            for (a, c) in s_inv[b].iter().enumerate() {
                if !c.is_zero() {
                    f = f.try_add(&DifferentialForm::from_indices(chart, &[a], c.clone())?)?;
                }
            }
            Ok(Some(f))
        })
        .collect::<Result<Vec<_>>>()?;
    apply_multiplicative(
        z.blades().map(|(b, c)| (b, c.clone())),
        &images,
        DifferentialForm::function,
        |x, y| x.wedge(y),
        |x, y| x.try_add(y),
        DifferentialForm::zero(chart, z.degree()),
    )
}

/// Matrix `T[f][j] = π(dy_j, dx_f)|_{y=0}` of `♯̃*` on `F*`, after checking
/// that `♯` maps the conormal directions `dy_j` into `F` along the zero section.
fn leaf_matrix(pi: &MultiVectorField, leaf: &SubbundleSpec) -> Result<RingMatrix> {
    check_same_chart(pi.chart(), leaf.chart())?;
    let m = require_bivector(pi)?;
    let chart = pi.chart();
    for j in 0..chart.fibre_dim() {
        let yj = chart.fibre_index(j);
        for b in 0..chart.dim() {
            if leaf.contains(b) {
                continue;
            }
            if !m[yj][b].at_zero_fibre().is_zero() {
                return Err(CoisoError::Subbundle(format!(
                    "♯(d{}) has a component along ∂{} outside F",
                    chart.name(yj),
                    chart.name(b)
                )));
            }
        }
    }
    Ok(leaf
        .indices()
        .iter()
        .map(|&f| {
            (0..chart.fibre_dim())
                .map(|j| m[chart.fibre_index(j)][f].at_zero_fibre())
                .collect()
        })
        .collect())
}

/// `♯̃*: Γ(∧F*) → Γ(∧E)`.
pub fn leafwise_sharp_star(
    pi: &MultiVectorField,
    leaf: &SubbundleSpec,
    beta: &DifferentialForm,
) -> Result<VerticalSection> {
    check_same_chart(pi.chart(), beta.chart())?;
    let t = leaf_matrix(pi, leaf)?;
    let chart = pi.chart();
    let leaf_idx = leaf.indices();
    let mut images: Vec<Option<MultiVectorField>> = vec![None; chart.dim()];
    for (row, &f) in t.iter().zip(&leaf_idx) {
        let mut v = MultiVectorField::zero(chart, 1);
        for (j, c) in row.iter().enumerate() {
            if !c.is_zero() {
                v = v.try_add(&MultiVectorField::from_indices(chart, &[chart.fibre_index(j)], c.clone())?)?;
            }
        }
        images[f] = Some(v);
    }
    let restricted = beta.map_coefficients(RingElement::at_zero_fibre);
    let out = apply_multiplicative(
        restricted.blades().map(|(b, c)| (b, c.clone())),
        &images,
        MultiVectorField::function,
        |x, y| x.wedge(y),
        |x, y| x.try_add(y),
        MultiVectorField::zero(chart, beta.degree()),
    )?;
    VerticalSection::new(out)
}

/// `(♯̃*)^{-1}: Γ(∧E) → Γ(∧F*)`; needs `rank F = rank E` and `♯̃` invertible.
pub fn leafwise_musical_inverse(
    pi: &MultiVectorField,
    leaf: &SubbundleSpec,
    a: &VerticalSection,
) -> Result<DifferentialForm> {
    check_same_chart(pi.chart(), a.chart())?;
    let chart = pi.chart();
    if leaf.rank() != chart.fibre_dim() {
        return Err(CoisoError::Subbundle(format!(
            "rank F = {} differs from rank E = {}",
            leaf.rank(),
            chart.fibre_dim()
        )));
    }
    let t = leaf_matrix(pi, leaf)?;
    let t_inv = ring_inverse(&t, chart).map_err(|e| match e {
        CoisoError::SingularMatrix => CoisoError::Degenerate,
        other => other,
    })?;
    let leaf_idx = leaf.indices();
    let mut images: Vec<Option<DifferentialForm>> = vec![None; chart.dim()];
    for j in 0..chart.fibre_dim() {
        let mut f = DifferentialForm::zero(chart, 1);
        for (r, &fi) in leaf_idx.iter().enumerate() {
            let c = &t_inv[j][r];
            if !c.is_zero() {
                f = f.try_add(&DifferentialForm::from_indices(chart, &[fi], c.clone())?)?;
            }
        }
        images[chart.fibre_index(j)] = Some(f);
    }
    apply_multiplicative(
        a.as_multivector().blades().map(|(b, c)| (b, c.clone())),
        &images,
        DifferentialForm::function,
        |x, y| x.wedge(y),
        |x, y| x.try_add(y),
        DifferentialForm::zero(chart, a.degree()),
    )
}

/// `π(ξ, ·)` for a one-form `ξ`.
pub fn sharp_contract(pi: &MultiVectorField, xi: &DifferentialForm) -> Result<MultiVectorField> {
    check_same_chart(pi.chart(), xi.chart())?;
    if xi.degree() != 1 {
        return Err(CoisoError::WrongFormDegree("sharp_contract needs a one-form".into()));
    }
    // π(ξ,·) = −♯*(ξ)
    Ok(sharp_star(pi, xi)?.neg())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn chart() -> Arc<ChartSpec> {
        ChartSpec::bundle(&[("x1", false), ("x2", false)], &["y1"]).unwrap()
    }

    #[test]
    fn d_of_y_dx() {
        let c = chart();
        let y1 = RingElement::variable(&c, "y1").unwrap();
        let w = DifferentialForm::basis(&c, &["x1"], y1).unwrap();
        let expected = DifferentialForm::basis(&c, &["y1", "x1"], RingElement::one(&c)).unwrap();
        assert_eq!(w.de_rham_d(), expected);
        let k = DifferentialForm::function(RingElement::from_integer(&c, 7));
        assert!(k.de_rham_d().is_zero());
    }

    #[test]
    fn fibrewise_degree_examples() {
        let c = chart();
        let y1 = RingElement::variable(&c, "y1").unwrap();
        let w = DifferentialForm::basis(&c, &["x1", "y1"], y1).unwrap();
        assert_eq!(w.fibrewise_degrees().into_iter().collect::<Vec<_>>(), vec![2]);
        let base = DifferentialForm::basis(&c, &["x1", "x2"], RingElement::variable(&c, "x1").unwrap()).unwrap();
        assert_eq!(base.fibrewise_degrees().into_iter().collect::<Vec<_>>(), vec![0]);
        assert!(base.is_in_omega_le(0));
        assert!(!w.is_in_omega_le(1));
    }

    #[test]
    fn pullback_drops_fibre_factors() {
        let c = chart();
        let w = DifferentialForm::basis(&c, &["y1", "x1"], RingElement::one(&c)).unwrap();
        assert!(w.pullback_zero_section().is_zero());
        let x1 = RingElement::variable(&c, "x1").unwrap();
        let f = DifferentialForm::basis(&c, &["x1", "x2"], x1).unwrap();
        let base = c.base_chart();
        let expected = DifferentialForm::basis(
            &base,
            &["x1", "x2"],
            RingElement::variable(&base, "x1").unwrap(),
        )
        .unwrap();
        assert_eq!(f.pullback_zero_section(), expected);
    }

    #[test]
    fn interior_product_signs() {
        let c = chart();
        let w = DifferentialForm::basis(&c, &["x1", "x2"], RingElement::one(&c)).unwrap();
        assert_eq!(w.interior(0), DifferentialForm::differential(&c, "x2").unwrap());
        assert_eq!(w.interior(1), DifferentialForm::differential(&c, "x1").unwrap().neg());
    }

    #[test]
    fn sharp_contract_example() {
        let c = chart();
        let pi = MultiVectorField::basis(&c, &["x1", "y1"], RingElement::one(&c)).unwrap();
        let xi = DifferentialForm::differential(&c, "x1").unwrap();
        assert_eq!(
            sharp_contract(&pi, &xi).unwrap(),
            MultiVectorField::coordinate_field(&c, "y1").unwrap()
        );
        assert!(sharp_contract(&pi, &DifferentialForm::zero(&c, 1)).unwrap().is_zero());
    }

    #[test]
    fn leafwise_d_rejects_non_leaf_factors() {
        let c = chart();
        let leaf = SubbundleSpec::new(&c, &["x2"]).unwrap();
        let w = DifferentialForm::differential(&c, "x1").unwrap();
        assert!(matches!(w.leafwise_d(&leaf), Err(CoisoError::NonAdapted(_))));
        let k = DifferentialForm::basis(&c, &["x2"], RingElement::from_rational(&c, rat(3, 2))).unwrap();
        assert!(k.leafwise_d(&leaf).unwrap().is_zero());
        assert!(SubbundleSpec::new(&c, &["y1"]).is_err());
        assert!(SubbundleSpec::new(&c, &[]).is_err());
    }

    #[test]
    fn musical_inverse_round_trip_on_darboux() {
        let c = ChartSpec::bundle(&[("q", false)], &["p"]).unwrap();
        let pi = MultiVectorField::basis(&c, &["q", "p"], RingElement::one(&c)).unwrap();
        let v = MultiVectorField::coordinate_field(&c, "p").unwrap();
        let w = musical_inverse(&pi, &v).unwrap();
        assert_eq!(sharp_star(&pi, &w).unwrap(), v);
        assert!(musical_inverse(&pi, &MultiVectorField::zero(&c, 1)).unwrap().is_zero());
        let degenerate = MultiVectorField::zero(&c, 2);
        assert_eq!(musical_inverse(&degenerate, &v), Err(CoisoError::Degenerate));
    }
}
