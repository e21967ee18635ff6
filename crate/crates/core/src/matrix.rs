//! Small exact linear algebra: Gauss–Jordan over ℚ(i) and
//! Faddeev–LeVerrier inversion over the coefficient ring.

use std::sync::Arc;

use crate::chart::ChartSpec;
use crate::error::{CoisoError, Result};
use crate::ring::RingElement;
use crate::scalar::{rat, GaussianRational, Scalar};

pub type ExactMatrix = Vec<Vec<GaussianRational>>;
pub type RingMatrix = Vec<Vec<RingElement>>;

pub fn exact_identity(n: usize) -> ExactMatrix {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { GaussianRational::one() } else { GaussianRational::zero() })
                .collect()
        })
        .collect()
}

pub fn exact_mul(a: &ExactMatrix, b: &ExactMatrix) -> ExactMatrix {
    let n = a.len();
    let m = b.first().map_or(0, Vec::len);
    let inner = b.len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    (0..inner).fold(GaussianRational::zero(), |acc, k| &acc + &(&a[i][k] * &b[k][j]))
                })
                .collect()
        })
        .collect()
}

/// Gauss–Jordan inverse of a square matrix over ℚ(i).
pub fn exact_inverse(a: &ExactMatrix) -> Result<ExactMatrix> {
    let n = a.len();
    if a.iter().any(|r| r.len() != n) {
        return Err(CoisoError::DimensionMismatch {
            expected: n,
            got: a.first().map_or(0, Vec::len),
        });
    }
    let mut m = a.clone();
    let mut inv = exact_identity(n);
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !m[r][col].is_zero())
            .ok_or(CoisoError::SingularMatrix)?;
        m.swap(col, pivot);
        inv.swap(col, pivot);
        let p = m[col][col].inv().ok_or(CoisoError::SingularMatrix)?;
        for j in 0..n {
            m[col][j] = &m[col][j] * &p;
            inv[col][j] = &inv[col][j] * &p;
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col].clone();
            for j in 0..n {
                m[r][j] = &m[r][j] - &(&factor * &m[col][j]);
                inv[r][j] = &inv[r][j] - &(&factor * &inv[col][j]);
            }
        }
    }
    Ok(inv)
}

pub fn ring_identity(chart: &Arc<ChartSpec>, n: usize) -> RingMatrix {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        RingElement::one(chart)
                    } else {
                        RingElement::zero(chart)
                    }
                })
                .collect()
        })
        .collect()
}

pub fn ring_mul(a: &RingMatrix, b: &RingMatrix, chart: &Arc<ChartSpec>) -> RingMatrix {
    let inner = b.len();
    let m = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..m)
                .map(|j| {
                    (0..inner).fold(RingElement::zero(chart), |acc, k| {
                        if row[k].is_zero() || b[k][j].is_zero() {
                            acc
                        } else {
                            &acc + &(&row[k] * &b[k][j])
                        }
                    })
                })
                .collect()
        })
        .collect()
}

pub fn ring_add(a: &RingMatrix, b: &RingMatrix) -> RingMatrix {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y).collect())
        .collect()
}

pub fn ring_neg(a: &RingMatrix) -> RingMatrix {
    a.iter().map(|r| r.iter().map(|x| -x).collect()).collect()
}

/// The matrix as plain Gaussian rationals, if every entry is a π-free constant.
pub fn as_exact(a: &RingMatrix) -> Option<ExactMatrix> {
    a.iter()
        .map(|r| r.iter().map(|x| x.as_scalar().and_then(|s| s.as_gaussian())).collect())
        .collect()
}

pub fn from_exact(chart: &Arc<ChartSpec>, a: &ExactMatrix) -> RingMatrix {
    a.iter()
        .map(|r| {
            r.iter()
                .map(|x| RingElement::constant(chart, Scalar::from_gaussian(x.clone(), 0)))
                .collect()
        })
        .collect()
}

/// Inverse over the coefficient ring.
///
/// Constant matrices are inverted by Gauss–Jordan. Otherwise the
/// Faddeev–LeVerrier recursion (which divides only by integers) yields the
/// adjugate and determinant; the inverse exists in the ring when the
/// determinant is a nonzero π-monomial constant.
pub fn ring_inverse(a: &RingMatrix, chart: &Arc<ChartSpec>) -> Result<RingMatrix> {
    if let Some(exact) = as_exact(a) {
        return Ok(from_exact(chart, &exact_inverse(&exact)?));
    }
    let n = a.len();
    let id = ring_identity(chart, n);
    let mut mk: RingMatrix = vec![vec![RingElement::zero(chart); n]; n];
    let mut c_prev = RingElement::one(chart);
    for k in 1..=n {
        let am = ring_mul(a, &mk, chart);
        mk = am
            .iter()
            .zip(&id)
            .map(|(r, ir)| r.iter().zip(ir).map(|(x, e)| x + &(e * &c_prev)).collect())
            .collect();
        let amk = ring_mul(a, &mk, chart);
        let trace = (0..n).fold(RingElement::zero(chart), |acc, i| &acc + &amk[i][i]);
        c_prev = trace.scale_rational(&rat(-1, k as i64));
    }
    // c_prev is now c_0, and det(A) = (−1)^n c_0, A^{-1} = −M_n / c_0.
    if c_prev.is_zero() {
        return Err(CoisoError::SingularMatrix);
    }
    let c0 = c_prev.as_scalar().ok_or_else(|| {
        CoisoError::NonConstant("determinant is not constant; inverse leaves the ring".into())
    })?;
    let inv_c0 = c0.inv().ok_or_else(|| {
        CoisoError::NonConstant("determinant is not a unit scalar".into())
    })?;
    let factor = -Scalar::one() * inv_c0;
    Ok(mk
        .iter()
        .map(|r| r.iter().map(|x| x.scale(&factor)).collect())
        .collect())
}
