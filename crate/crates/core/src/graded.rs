//! Storage shared by multivector fields and differential forms: a map from
//! wedge blades (bitmasks over global coordinate indices) to coefficients.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::chart::{check_same_chart, ChartSpec};
use crate::error::{CoisoError, Result};
use crate::ring::RingElement;
use crate::scalar::Rational;

/// Strictly increasing set of coordinate indices, stored as a bitmask.
pub type Blade = u64;

pub fn blade_from_indices(indices: &[usize]) -> Option<Blade> {
    let mut b: Blade = 0;
    for &i in indices {
        if i >= 64 || b & (1 << i) != 0 {
            return None;
        }
        b |= 1 << i;
    }
    Some(b)
}

/// Sign of sorting `indices` into increasing order, `None` on repeats.
pub fn permutation_sign(indices: &[usize]) -> Option<i32> {
    let mut inversions = 0;
    for a in 0..indices.len() {
        for b in a + 1..indices.len() {
            match indices[a].cmp(&indices[b]) {
                std::cmp::Ordering::Greater => inversions += 1,
                std::cmp::Ordering::Equal => return None,
                std::cmp::Ordering::Less => {}
            }
        }
    }
    Some(if inversions % 2 == 0 { 1 } else { -1 })
}

pub fn blade_indices(b: Blade) -> Vec<usize> {
    (0..64).filter(|i| b & (1 << i) != 0).collect()
}

pub fn blade_degree(b: Blade) -> usize {
    b.count_ones() as usize
}

/// Number of elements of `b` strictly above `i`.
pub fn count_above(b: Blade, i: usize) -> u32 {
    if i >= 63 {
        0
    } else {
        (b >> (i + 1)).count_ones()
    }
}

/// Sign of `e_A ∧ e_B` relative to `e_{A∪B}`, `None` if the blades overlap.
pub fn wedge_sign(a: Blade, b: Blade) -> Option<i32> {
    if a & b != 0 {
        return None;
    }
    let mut swaps = 0;
    let mut rest = b;
    while rest != 0 {
        let i = rest.trailing_zeros() as usize;
        swaps += count_above(a, i);
        rest &= rest - 1;
    }
    Some(if swaps % 2 == 0 { 1 } else { -1 })
}

#[derive(Clone, PartialEq)]
pub(crate) struct Graded {
    pub chart: Arc<ChartSpec>,
    pub degree: usize,
    pub terms: BTreeMap<Blade, RingElement>,
}

impl Graded {
    pub fn zero(chart: &Arc<ChartSpec>, degree: usize) -> Self {
        Graded {
            chart: chart.clone(),
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `c · e_blade`, dropping cancellations.
    pub fn add_term(&mut self, blade: Blade, c: RingElement) {
        debug_assert_eq!(blade_degree(blade), self.degree);
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&blade) {
            Some(existing) => {
                let sum = &existing + &c;
                if !sum.is_zero() {
                    self.terms.insert(blade, sum);
                }
            }
            None => {
                self.terms.insert(blade, c);
            }
        }
    }

    /// Sum; a zero operand of any degree is the identity.
    pub fn try_add(&self, other: &Graded) -> Result<Graded> {
        check_same_chart(&self.chart, &other.chart)?;
        if other.is_zero() && other.degree != self.degree {
            return Ok(self.clone());
        }
        if self.is_zero() && other.degree != self.degree {
            return Ok(other.clone());
        }
        if self.degree != other.degree {
            return Err(CoisoError::DegreeMismatch(format!(
                "cannot add degree {} and degree {}",
                self.degree, other.degree
            )));
        }
        let mut out = self.clone();
        for (b, c) in &other.terms {
            out.add_term(*b, c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Graded {
        Graded {
            chart: self.chart.clone(),
            degree: self.degree,
            terms: self.terms.iter().map(|(b, c)| (*b, -c)).collect(),
        }
    }

    pub fn map_coefficients<F: Fn(&RingElement) -> RingElement>(&self, f: F) -> Graded {
        let mut out = Graded::zero(&self.chart, self.degree);
        for (b, c) in &self.terms {
            out.add_term(*b, f(c));
        }
        out
    }

    pub fn scale(&self, f: &RingElement) -> Result<Graded> {
        check_same_chart(&self.chart, f.chart())?;
        Ok(self.map_coefficients(|c| c * f))
    }

    pub fn scale_rational(&self, r: &Rational) -> Graded {
        self.map_coefficients(|c| c.scale_rational(r))
    }

    pub fn wedge(&self, other: &Graded) -> Result<Graded> {
        check_same_chart(&self.chart, &other.chart)?;
        let mut out = Graded::zero(&self.chart, self.degree + other.degree);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                if let Some(sign) = wedge_sign(*a, *b) {
                    let c = ca * cb;
                    out.add_term(a | b, if sign < 0 { -c } else { c });
                }
            }
        }
        Ok(out)
    }

    pub fn max_y_degree(&self) -> u32 {
        self.terms
            .values()
            .filter_map(RingElement::y_degree)
            .max()
            .unwrap_or(0)
    }

    pub fn jet_order(&self) -> Option<u32> {
        self.terms.values().filter_map(RingElement::jet_order).min()
    }

    /// Renders with `prefix` marking basis symbols (`@` for vectors, `d` for forms).
    pub fn render(&self, prefix: &str) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut parts: Vec<(bool, String)> = Vec::new();
        for (b, c) in &self.terms {
            let basis = blade_indices(*b)
                .into_iter()
                .map(|i| format!("{prefix}{}", self.chart.name(i)))
                .collect::<Vec<_>>()
                .join(" /\\ ");
            let terms = c.signed_terms();
            if basis.is_empty() {
                parts.extend(terms);
                continue;
            }
            if terms.len() == 1 {
                let (neg, body) = terms.into_iter().next().expect("one term");
                if body == "1" {
                    parts.push((neg, basis));
                } else {
                    parts.push((neg, format!("{body} * {basis}")));
                }
            } else {
                parts.push((false, format!("({c}) * {basis}")));
            }
        }
        crate::scalar::join_signed(&parts)
    }
}
