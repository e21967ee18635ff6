//! Machine-precision evaluation: sample grids, bivector matrices,
//! the numeric pushforward along a fibre translation and the conormal
//! coisotropy defect.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::chart::ChartSpec;
use crate::error::{CoisoError, Result};
use crate::multivector::{MultiVectorField, VerticalSection};
use crate::ring::CompiledFunction;

/// Largest defect accepted by [`coisotropy_check_numeric`].
pub const COISOTROPY_TOLERANCE: f64 = 1e-9;

/// A bivector that can be evaluated as an antisymmetric matrix
/// `π(dx_a, dx_b)` at any point of the chart.
pub trait NumericBivector: Sync {
    fn dim(&self) -> usize;
    fn matrix_at(&self, point: &[f64]) -> Result<DMatrix<f64>>;
}

/// A polynomial or jet bivector with coefficients compiled for fast evaluation.
#[derive(Clone, Debug)]
pub struct CompiledBivector {
    dim: usize,
    entries: Vec<(usize, usize, CompiledFunction)>,
}

impl CompiledBivector {
    pub fn new(pi: &MultiVectorField) -> Result<Self> {
        if pi.degree() != 2 {
            return Err(CoisoError::DegreeMismatch("expected a bivector".into()));
        }
        Ok(CompiledBivector {
            dim: pi.chart().dim(),
            entries: pi.terms().map(|(idx, c)| (idx[0], idx[1], c.compile())).collect(),
        })
    }
}

impl NumericBivector for CompiledBivector {
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
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (a, b, f) in &self.entries {
            let v = f.eval(point).re;
            m[(*a, *b)] += v;
            m[(*b, *a)] -= v;
        }
        Ok(m)
    }
}

impl NumericBivector for MultiVectorField {
    fn dim(&self) -> usize {
        self.chart().dim()
    }

    fn matrix_at(&self, point: &[f64]) -> Result<DMatrix<f64>> {
        let m = self.bivector_matrix(point)?;
        let n = m.len();
        Ok(DMatrix::from_fn(n, n, |i, j| m[i][j]))
    }
}

/// Number of points of the tensor grid with `k` points per base axis.
pub fn grid_len(chart: &ChartSpec, k: usize) -> usize {
    k.saturating_pow(chart.base_dim() as u32)
}

/// Point `index` of the tensor grid: periodic axes get `j/k`, the others
/// `k` equispaced points on `[-1, 1]`. The last base axis varies fastest.
pub fn grid_point(chart: &ChartSpec, k: usize, index: usize) -> Vec<f64> {
    let nb = chart.base_dim();
    let mut out = vec![0.0; nb];
    let mut rest = index;
    for axis in (0..nb).rev() {
        let j = rest % k;
        rest /= k;
        out[axis] = if chart.is_periodic(axis) {
            j as f64 / k as f64
        } else if k == 1 {
            0.0
        } else {
            -1.0 + 2.0 * j as f64 / (k - 1) as f64
        };
    }
    out
}

pub fn sample_grid(chart: &ChartSpec, k: usize) -> Vec<Vec<f64>> {
    (0..grid_len(chart, k)).map(|i| grid_point(chart, k, i)).collect()
}

/// A degree-1 section and its base Jacobian, compiled.
#[derive(Clone, Debug)]
pub struct SectionNumeric {
    fibre_dim: usize,
    base_dim: usize,
    total_dim: usize,
    values: Vec<CompiledFunction>,
    jacobian: Vec<Vec<CompiledFunction>>,
}

impl SectionNumeric {
    pub fn new(alpha: &VerticalSection) -> Result<Self> {
        let chart = alpha.chart();
        let comps = alpha.components()?;
        let jacobian = comps
            .iter()
            .map(|c| (0..chart.base_dim()).map(|i| c.derivative(i).compile()).collect())
            .collect();
        Ok(SectionNumeric {
            fibre_dim: chart.fibre_dim(),
            base_dim: chart.base_dim(),
            total_dim: chart.dim(),
            values: comps.iter().map(|c| c.compile()).collect(),
            jacobian,
        })
    }

    fn full_point(&self, base_point: &[f64]) -> Result<Vec<f64>> {
        if base_point.len() != self.base_dim {
            return Err(CoisoError::DimensionMismatch {
                expected: self.base_dim,
                got: base_point.len(),
            });
        }
        let mut p = base_point.to_vec();
        p.resize(self.total_dim, 0.0);
        Ok(p)
    }

    /// `α(x)`, real parts.
    pub fn value(&self, base_point: &[f64]) -> Result<Vec<f64>> {
        let p = self.full_point(base_point)?;
        Ok(self.values.iter().map(|f| f.eval(&p).re).collect())
    }

    /// `∂α_j/∂x_i` as a `fibre_dim × base_dim` matrix.
    pub fn jacobian(&self, base_point: &[f64]) -> Result<DMatrix<f64>> {
        let p = self.full_point(base_point)?;
        Ok(DMatrix::from_fn(self.fibre_dim, self.base_dim, |j, i| {
            self.jacobian[j][i].eval(&p).re
        }))
    }

    /// The point `(x, −α(x))` of `graph(−α)`.
    pub fn graph_point(&self, base_point: &[f64]) -> Result<Vec<f64>> {
        let mut p = base_point.to_vec();
        p.extend(self.value(base_point)?.iter().map(|v| -v));
        Ok(p)
    }
}

/// `P((φ^α)_* π)` at `(x, 0)` as a `fibre_dim × fibre_dim` matrix.
///
/// The pushforward at `(x, 0)` is `dφ · π(x, −α(x)) · dφᵀ`; its vertical
/// block is `T Π Tᵀ` with `T = [J_α | I]`.
pub fn pushforward_vertical_block(
    pi: &dyn NumericBivector,
    alpha: &SectionNumeric,
    base_point: &[f64],
) -> Result<DMatrix<f64>> {
    let (m, n) = (alpha.base_dim, alpha.fibre_dim);
    if pi.dim() != m + n {
        return Err(CoisoError::DimensionMismatch {
            expected: m + n,
            got: pi.dim(),
        });
    }
    let big_pi = pi.matrix_at(&alpha.graph_point(base_point)?)?;
    let jac = alpha.jacobian(base_point)?;
    let t = DMatrix::from_fn(n, m + n, |j, c| {
        if c < m {
            jac[(j, c)]
        } else if c - m == j {
            1.0
        } else {
            0.0
        }
    });
    Ok(&t * big_pi * t.transpose())
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoisotropyReport {
    pub coisotropic: bool,
    pub max_defect: f64,
    /// Base point where the defect is largest.
    pub worst_point: Vec<f64>,
    pub points: usize,
}

/// Samples `graph(−α)` at the given base points. The conormal space at
/// `(x, −α(x))` is spanned by `ξ_j = dy_j + Σ_i ∂_iα_j dx_i`; the graph is
/// coisotropic there iff every `π♯ξ_j` is annihilated by every `ξ_k`.
pub fn coisotropy_check_numeric(
    pi: &dyn NumericBivector,
    alpha: &VerticalSection,
    points: &[Vec<f64>],
) -> Result<CoisotropyReport> {
    let chart = alpha.chart();
    if pi.dim() != chart.dim() {
        return Err(CoisoError::DimensionMismatch {
            expected: chart.dim(),
            got: pi.dim(),
        });
    }
    let sec = SectionNumeric::new(alpha)?;
    let (m, n) = (chart.base_dim(), chart.fibre_dim());
    let defects = points
        .par_iter()
        .map(|x| -> Result<f64> {
            let big_pi = pi.matrix_at(&sec.graph_point(x)?)?;
            let jac = sec.jacobian(x)?;
            let conormal: Vec<Vec<f64>> = (0..n)
                .map(|j| {
                    (0..m + n)
                        .map(|c| if c < m { jac[(j, c)] } else if c - m == j { 1.0 } else { 0.0 })
                        .collect()
                })
                .collect();
            let mut worst: f64 = 0.0;
            for xi in &conormal {
                // π♯ξ = π(ξ, ·)
                let v: Vec<f64> = (0..m + n)
                    .map(|b| (0..m + n).map(|a| xi[a] * big_pi[(a, b)]).sum())
                    .collect();
                for eta in &conormal {
                    let pairing: f64 = eta.iter().zip(&v).map(|(e, w)| e * w).sum();
                    worst = worst.max(pairing.abs());
                }
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?;
    let (worst_idx, max_defect) = defects
        .iter()
        .enumerate()
        .fold((0, 0.0_f64), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
    Ok(CoisotropyReport {
        coisotropic: max_defect <= COISOTROPY_TOLERANCE,
        max_defect,
        worst_point: points.get(worst_idx).cloned().unwrap_or_default(),
        points: points.len(),
    })
}

/// Largest Euclidean fibre norm of `α` over the grid with `k` points per axis.
pub fn max_fibre_norm(alpha: &VerticalSection, k: usize) -> Result<f64> {
    let chart = alpha.chart();
    let sec = SectionNumeric::new(alpha)?;
    let total = grid_len(chart, k);
    let norms = (0..total)
        .into_par_iter()
        .map(|i| {
            let v = sec.value(&grid_point(chart, k, i))?;
            Ok(v.iter().map(|a| a * a).sum::<f64>().sqrt())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(norms.into_iter().fold(0.0, f64::max))
}
