//! Local models of presymplectic zero sections and the inversion of
//! fibrewise-affine symplectic forms.
//!
//! Matrix conventions: a two-form `Ω` has the antisymmetric matrix
//! `W_ab = Ω(∂_a, ∂_b)` in chart order (base, then fibre). The Poisson
//! bivector of `Ω` has matrix `π^{ab} = −(W^{-1})_{ab}`, so that
//! `dq∧dp ↦ ∂q∧∂p`.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::chart::{check_same_chart, ChartSpec};
use crate::error::{CoisoError, Result};
use crate::forms::{DifferentialForm, SubbundleSpec};
use crate::linfty::PoissonStatus;
use crate::matrix::{
    exact_inverse, exact_mul, from_exact, ring_add, ring_identity, ring_inverse,
    ring_mul, ring_neg, ExactMatrix, RingMatrix,
};
use crate::multivector::MultiVectorField;
use crate::numeric::NumericBivector;
use crate::ring::{CompiledFunction, RingElement};
use crate::scalar::{GaussianRational, Rational};

/// A closed two-form on the base together with a declared kernel `F`.
#[derive(Clone, Debug)]
pub struct PresymplecticData {
    omega: DifferentialForm,
    kernel: SubbundleSpec,
}

impl PresymplecticData {
    /// `omega` must live on a chart without fibre coordinates.
    pub fn new(omega: DifferentialForm, kernel: SubbundleSpec) -> Result<Self> {
        check_same_chart(omega.chart(), kernel.chart())?;
        if omega.chart().fibre_dim() != 0 {
            return Err(CoisoError::InvalidChart("ω_C must live on the base chart".into()));
        }
        if omega.degree() != 2 && !omega.is_zero() {
            return Err(CoisoError::WrongFormDegree(format!(
                "ω_C must be a two-form, got degree {}",
                omega.degree()
            )));
        }
        if !omega.de_rham_d().is_zero() {
            return Err(CoisoError::NotClosed);
        }
        for i in kernel.indices() {
            let contracted = omega.interior(i);
            if !contracted.is_zero() {
                return Err(CoisoError::KernelCheck(format!(
                    "ι(∂{}) ω_C = {contracted}",
                    omega.chart().name(i)
                )));
            }
        }
        Ok(PresymplecticData { omega, kernel })
    }

    pub fn omega(&self) -> &DifferentialForm {
        &self.omega
    }

    pub fn kernel(&self) -> &SubbundleSpec {
        &self.kernel
    }

    pub fn chart(&self) -> &Arc<ChartSpec> {
        self.omega.chart()
    }
}

#[derive(Clone, Debug)]
pub struct LocalModel {
    pub chart: Arc<ChartSpec>,
    pub omega: DifferentialForm,
}

/// `Ω = pr*ω_C + Σ_j dq_j ∧ dp_j` on the bundle whose fibre coordinates `p_j`
/// are dual to the kernel directions `q_j` (in chart order).
pub fn gotay_local_model(data: &PresymplecticData, fibre_names: &[&str]) -> Result<LocalModel> {
    let kernel = data.kernel().indices();
    if fibre_names.len() != kernel.len() {
        return Err(CoisoError::DimensionMismatch {
            expected: kernel.len(),
            got: fibre_names.len(),
        });
    }
    let base: Vec<(&str, bool)> = data
        .chart()
        .base()
        .iter()
        .map(|b| (b.name.as_str(), b.periodic))
        .collect();
    let chart = ChartSpec::bundle(&base, fibre_names)?;
    let omega = gotay_form_on(data, &chart)?;
    Ok(LocalModel { chart, omega })
}

/// The local model form on an existing bundle chart over the same base,
/// pairing the `j`-th kernel direction with the `j`-th fibre coordinate.
pub fn gotay_form_on(data: &PresymplecticData, bundle: &Arc<ChartSpec>) -> Result<DifferentialForm> {
    let kernel = data.kernel().indices();
    if !bundle.has_base_chart(data.chart()) {
        return Err(CoisoError::ChartMismatch);
    }
    if bundle.fibre_dim() != kernel.len() {
        return Err(CoisoError::DimensionMismatch {
            expected: kernel.len(),
            got: bundle.fibre_dim(),
        });
    }
    let mut omega = if data.omega().is_zero() {
        DifferentialForm::zero(bundle, 2)
    } else {
        data.omega().lift_to_bundle(bundle)?
    };
    for (j, &q) in kernel.iter().enumerate() {
        let pair = DifferentialForm::from_indices(bundle, &[q, bundle.fibre_index(j)], RingElement::one(bundle))?;
        omega = omega.try_add(&pair)?;
    }
    Ok(omega)
}

/// `M(λ) = A + Σ_k λ_k B_k` with rational entries.
#[derive(Clone, Debug, PartialEq)]
pub struct AffinePencil {
    a: ExactMatrix,
    b: Vec<ExactMatrix>,
    labels: Vec<String>,
}

fn rational_matrix(rows: &[Vec<Rational>]) -> ExactMatrix {
    rows.iter()
        .map(|r| r.iter().map(|x| GaussianRational::real(x.clone())).collect())
        .collect()
}

impl AffinePencil {
    /// Parameters are labelled `l1, l2, …`.
    pub fn new(a: Vec<Vec<Rational>>, b: Vec<Vec<Vec<Rational>>>) -> Result<Self> {
        let labels = (1..=b.len()).map(|k| format!("l{k}")).collect();
        AffinePencil::with_labels(a, b, labels)
    }

    pub fn with_labels(a: Vec<Vec<Rational>>, b: Vec<Vec<Vec<Rational>>>, labels: Vec<String>) -> Result<Self> {
        let n = a.len();
        if n == 0 {
            return Err(CoisoError::Pencil("A is empty".into()));
        }
        for m in std::iter::once(&a).chain(b.iter()) {
            if m.len() != n || m.iter().any(|r| r.len() != n) {
                return Err(CoisoError::Pencil(format!("all matrices must be {n}×{n}")));
            }
        }
        if labels.len() != b.len() {
            return Err(CoisoError::DimensionMismatch {
                expected: b.len(),
                got: labels.len(),
            });
        }
        let a = rational_matrix(&a);
        exact_inverse(&a).map_err(|_| CoisoError::Pencil("A is singular".into()))?;
        Ok(AffinePencil {
            a,
            b: b.iter().map(|m| rational_matrix(m)).collect(),
            labels,
        })
    }

    /// Plain-text format: one matrix row per line, entries separated by
    /// whitespace or commas, matrices separated by blank lines; the first
    /// matrix is `A`, the rest are `B_1, B_2, …`. Lines starting with `#`
    /// are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut blocks: Vec<Vec<Vec<Rational>>> = Vec::new();
        let mut current: Vec<Vec<Rational>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.starts_with('#') {
                continue;
            }
            if line.is_empty() {
                if !current.is_empty() {
                    blocks.push(std::mem::take(&mut current));
                }
                continue;
            }
            let row = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<Rational>().map_err(|_| {
                        CoisoError::Pencil(format!("line {}: `{s}` is not a rational number", lineno + 1))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            current.push(row);
        }
        if !current.is_empty() {
            blocks.push(current);
        }
        let mut it = blocks.into_iter();
        let a = it.next().ok_or_else(|| CoisoError::Pencil("no matrices found".into()))?;
        AffinePencil::new(a, it.collect())
    }

    pub fn size(&self) -> usize {
        self.a.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Parameter chart: no base coordinates, one fibre coordinate per `B_k`.
    pub fn chart(&self) -> Result<Arc<ChartSpec>> {
        let empty: [(&str, bool); 0] = [];
        if self.labels.is_empty() {
            ChartSpec::base_only(&empty)
        } else {
            let labels: Vec<&str> = self.labels.iter().map(String::as_str).collect();
            ChartSpec::bundle(&empty, &labels)
        }
    }

    /// `M(λ)` as an exact matrix over the parameter chart.
    pub fn matrix(&self, chart: &Arc<ChartSpec>) -> Result<RingMatrix> {
        let mut m = from_exact(chart, &self.a);
        for (k, b) in self.b.iter().enumerate() {
            let lk = RingElement::variable(chart, &self.labels[k])?;
            let term: RingMatrix = from_exact(chart, b)
                .iter()
                .map(|r| r.iter().map(|x| x * &lk).collect())
                .collect();
            m = ring_add(&m, &term);
        }
        Ok(m)
    }
}

/// The inverse of a pencil as a matrix of jets in the pencil parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct PencilInverse {
    pub chart: Arc<ChartSpec>,
    pub order: u32,
    pub matrix: RingMatrix,
}

/// `M^{-1}(λ) ≈ Σ_{r=0}^{N} (−Σ_k λ_k A^{-1}B_k)^r A^{-1}`.
pub fn invert_affine_pencil(p: &AffinePencil, order: u32) -> Result<PencilInverse> {
    let chart = p.chart()?;
    let a_inv = exact_inverse(&p.a).map_err(|_| CoisoError::Pencil("A is singular".into()))?;
    let n = p.size();
    let mut l: RingMatrix = vec![vec![RingElement::zero(&chart); n]; n];
    for (k, b) in p.b.iter().enumerate() {
        let lk = RingElement::variable(&chart, &p.labels[k])?.to_jet(order);
        let ab = from_exact(&chart, &exact_mul(&a_inv, b));
        let term: RingMatrix = ab.iter().map(|r| r.iter().map(|x| x * &lk).collect()).collect();
        l = ring_add(&l, &term);
    }
    let matrix = neumann_series(&l, &from_exact(&chart, &a_inv), order, &chart);
    Ok(PencilInverse {
        chart,
        order,
        matrix: jet_all(&matrix, order),
    })
}

fn jet_all(m: &RingMatrix, order: u32) -> RingMatrix {
    m.iter().map(|r| r.iter().map(|x| x.to_jet(order)).collect()).collect()
}

/// `Σ_{r=0}^{N} (−L)^r A^{-1}` where `L` has no constant fibre term.
fn neumann_series(l: &RingMatrix, a_inv: &RingMatrix, order: u32, chart: &Arc<ChartSpec>) -> RingMatrix {
    let neg_l = ring_neg(l);
    let mut power = ring_identity(chart, l.len());
    let mut sum = ring_identity(chart, l.len());
    for _ in 0..order {
        power = jet_all(&ring_mul(&power, &neg_l, chart), order);
        if power.iter().all(|r| r.iter().all(RingElement::is_zero)) {
            break;
        }
        sum = ring_add(&sum, &power);
    }
    ring_mul(&sum, a_inv, chart)
}

/// Whether `M(λ)·R(λ) − I` only has terms of parameter degree above `order`,
/// computed on the stored polynomials without truncation.
pub fn pencil_residual_vanishes(p: &AffinePencil, inverse: &PencilInverse) -> Result<bool> {
    let chart = &inverse.chart;
    let m = p.matrix(chart)?;
    let r: RingMatrix = inverse
        .matrix
        .iter()
        .map(|row| row.iter().map(RingElement::forget_order).collect())
        .collect();
    let prod = ring_mul(&m, &r, chart);
    let id = ring_identity(chart, p.size());
    for (pr, ir) in prod.iter().zip(&id) {
        for (x, e) in pr.iter().zip(ir) {
            let diff = x - e;
            if diff.terms().any(|(k, _)| k.y_degree() <= inverse.order) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Antisymmetric coefficient matrix `Ω(∂_a, ∂_b)` of a two-form.
pub fn form_matrix(omega: &DifferentialForm) -> Result<RingMatrix> {
    if omega.degree() != 2 {
        return Err(CoisoError::WrongFormDegree(format!(
            "expected a two-form, got degree {}",
            omega.degree()
        )));
    }
    let chart = omega.chart();
    let n = chart.dim();
    let mut m = vec![vec![RingElement::zero(chart); n]; n];
    for (idx, c) in omega.terms() {
        m[idx[0]][idx[1]] = c.clone();
        m[idx[1]][idx[0]] = -c;
    }
    Ok(m)
}

#[derive(Clone, Debug)]
pub struct SymplecticInverse {
    pub pi: MultiVectorField,
    pub poisson: PoissonStatus,
}

/// Inverts a form in `Ω_(≤1)` by the geometric series around `y = 0`.
///
/// The matrix at `y = 0` must be invertible over the coefficient ring
/// (constant, or with a constant unit determinant). A fibre-independent
/// form gives an exact bivector, otherwise a jet of order `order`.
/// Fails with [`CoisoError::NotPoisson`] if the truncated `[π,π]` does not
/// vanish through fibre degree `order − 1`.
pub fn symplectic_to_poisson(omega: &DifferentialForm, order: u32) -> Result<SymplecticInverse> {
    let degrees = omega.fibrewise_degrees();
    if degrees.iter().any(|&d| d > 1) {
        return Err(CoisoError::NotAffine(degrees.into_iter().collect()));
    }
    let chart = omega.chart().clone();
    let w = form_matrix(omega)?;
    let a: RingMatrix = w.iter().map(|r| r.iter().map(RingElement::at_zero_fibre).collect()).collect();
    let a_inv = ring_inverse(&a, &chart).map_err(|e| match e {
        CoisoError::SingularMatrix => CoisoError::Degenerate,
        other => other,
    })?;
    let linear: RingMatrix = w.iter().zip(&a).map(|(wr, ar)| wr.iter().zip(ar).map(|(x, y)| x - y).collect()).collect();
    let exact = linear.iter().all(|r| r.iter().all(RingElement::is_zero));
    let inverse = if exact {
        a_inv
    } else {
        let l = jet_all(&ring_mul(&a_inv, &linear, &chart), order);
        neumann_series(&l, &a_inv, order, &chart)
    };
    let neg: RingMatrix = ring_neg(&inverse);
    let pi = MultiVectorField::bivector_from_matrix(&chart, &neg)?;
    let bracket = pi.schouten(&pi)?;
    if !bracket.is_zero() {
        return Err(CoisoError::NotPoisson);
    }
    let poisson = if exact {
        PoissonStatus::Exact
    } else {
        PoissonStatus::ToOrder(order.saturating_sub(1))
    };
    Ok(SymplecticInverse { pi, poisson })
}

/// The Poisson bivector of a symplectic form, computed pointwise by
/// numerically inverting `Ω(x, y)`.
#[derive(Clone, Debug)]
pub struct NumericSymplecticInverse {
    dim: usize,
    entries: Vec<(usize, usize, CompiledFunction)>,
}

impl NumericSymplecticInverse {
    pub fn new(omega: &DifferentialForm) -> Result<Self> {
        if omega.degree() != 2 {
            return Err(CoisoError::WrongFormDegree("expected a two-form".into()));
        }
        Ok(NumericSymplecticInverse {
            dim: omega.chart().dim(),
            entries: omega.terms().map(|(i, c)| (i[0], i[1], c.compile())).collect(),
        })
    }
}

impl NumericBivector for NumericSymplecticInverse {
    fn dim(&self) -> usize {
        self.dim
    }

    fn matrix_at(&self, point: &[f64]) -> Result<DMatrix<f64>> {
        if point.len() != self.dim {
            return Err(CoisoError::DimensionMismatch {
                expected: self.dim,
                got: point.len(),
            });
        }
        let mut w = DMatrix::zeros(self.dim, self.dim);
        for (a, b, f) in &self.entries {
            let v = f.eval(point).re;
            w[(*a, *b)] += v;
            w[(*b, *a)] -= v;
        }
        let inv = w.try_inverse().ok_or(CoisoError::Degenerate)?;
        Ok(-inv)
    }
}

/// Exact inverse of a constant rational matrix, for callers building pencils.
pub fn rational_inverse(m: &[Vec<Rational>]) -> Result<Vec<Vec<Rational>>> {
    let inv = exact_inverse(&rational_matrix(m))?;
    Ok(inv.into_iter().map(|r| r.into_iter().map(|x| x.re).collect()).collect())
}
