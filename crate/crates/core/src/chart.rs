//! Coordinate charts on a vector bundle `E → C`.
//!
//! Coordinates are indexed globally: base coordinates first (in declaration
//! order), then fibre coordinates. Periodic base coordinates have period 1
//! and carry Fourier modes; the remaining base coordinates and all fibre
//! coordinates carry polynomial exponents.

use std::collections::HashSet;
use std::sync::Arc;

use crate::error::{CoisoError, Result};
use crate::scalar::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseCoordinate {
    pub name: String,
    pub periodic: bool,
}

/// Where a global coordinate index lives inside a term key.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    /// Non-periodic base coordinate, index into the polynomial exponent vector.
    Poly(usize),
    /// Periodic base coordinate, index into the Fourier mode vector.
    Periodic(usize),
    /// Fibre coordinate, index into the fibre exponent vector.
    Fibre(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChartSpec {
    base: Vec<BaseCoordinate>,
    fibre: Vec<String>,
    domain_bound: Option<Rational>,
    slots: Vec<Slot>,
    n_poly: usize,
    n_periodic: usize,
}

impl ChartSpec {
    /// A bundle chart: at least one fibre coordinate is required.
    pub fn bundle<S: AsRef<str>>(
        base: &[(S, bool)],
        fibre: &[S],
    ) -> Result<Arc<ChartSpec>> {
        if fibre.is_empty() {
            return Err(CoisoError::InvalidChart(
                "a bundle chart needs at least one fibre coordinate".into(),
            ));
        }
        ChartSpec::build(base, fibre, None).map(Arc::new)
    }

    /// A chart with no fibre directions (the base manifold, or a parameter space).
    pub fn base_only<S: AsRef<str>>(base: &[(S, bool)]) -> Result<Arc<ChartSpec>> {
        ChartSpec::build::<S>(base, &[], None).map(Arc::new)
    }

    /// Same chart, with the tubular domain `|y| < bound` declared.
    pub fn with_domain_bound(&self, bound: Rational) -> Result<Arc<ChartSpec>> {
        if bound <= Rational::from_integer(0.into()) {
            return Err(CoisoError::InvalidChart("domain bound must be positive".into()));
        }
        let mut c = self.clone();
        c.domain_bound = Some(bound);
        Ok(Arc::new(c))
    }

    fn build<S: AsRef<str>>(
        base: &[(S, bool)],
        fibre: &[S],
        domain_bound: Option<Rational>,
    ) -> Result<ChartSpec> {
        let mut seen = HashSet::new();
        let names = base
            .iter()
            .map(|(n, _)| n.as_ref())
            .chain(fibre.iter().map(|n| n.as_ref()));
        for name in names {
            if !is_identifier(name) {
                return Err(CoisoError::InvalidChart(format!(
                    "invalid coordinate name `{name}`"
                )));
            }
            if name == "pi" || name == "I" {
                return Err(CoisoError::InvalidChart(format!(
                    "`{name}` is reserved and cannot name a coordinate"
                )));
            }
            if !seen.insert(name.to_string()) {
                return Err(CoisoError::InvalidChart(format!(
                    "duplicate coordinate name `{name}`"
                )));
            }
        }
        if base.len() + fibre.len() > 64 {
            return Err(CoisoError::InvalidChart("at most 64 coordinates".into()));
        }
        let mut slots = Vec::new();
        let (mut n_poly, mut n_periodic) = (0, 0);
        for (_, periodic) in base {
            if *periodic {
                slots.push(Slot::Periodic(n_periodic));
                n_periodic += 1;
            } else {
                slots.push(Slot::Poly(n_poly));
                n_poly += 1;
            }
        }
        for j in 0..fibre.len() {
            slots.push(Slot::Fibre(j));
        }
        Ok(ChartSpec {
            base: base
                .iter()
                .map(|(n, p)| BaseCoordinate {
                    name: n.as_ref().to_string(),
                    periodic: *p,
                })
                .collect(),
            fibre: fibre.iter().map(|n| n.as_ref().to_string()).collect(),
            domain_bound,
            slots,
            n_poly,
            n_periodic,
        })
    }

    pub fn base(&self) -> &[BaseCoordinate] {
        &self.base
    }

    pub fn fibre(&self) -> &[String] {
        &self.fibre
    }

    pub fn domain_bound(&self) -> Option<&Rational> {
        self.domain_bound.as_ref()
    }

    pub fn base_dim(&self) -> usize {
        self.base.len()
    }

    pub fn fibre_dim(&self) -> usize {
        self.fibre.len()
    }

    pub fn dim(&self) -> usize {
        self.base.len() + self.fibre.len()
    }

    pub fn n_poly(&self) -> usize {
        self.n_poly
    }

    pub fn n_periodic(&self) -> usize {
        self.n_periodic
    }

    pub fn slot(&self, index: usize) -> Slot {
        self.slots[index]
    }

    pub fn is_base_index(&self, index: usize) -> bool {
        index < self.base.len()
    }

    pub fn is_periodic(&self, index: usize) -> bool {
        matches!(self.slots.get(index), Some(Slot::Periodic(_)))
    }

    /// Global index of the `j`-th fibre coordinate.
    pub fn fibre_index(&self, j: usize) -> usize {
        self.base.len() + j
    }

    pub fn name(&self, index: usize) -> &str {
        if index < self.base.len() {
            &self.base[index].name
        } else {
            &self.fibre[index - self.base.len()]
        }
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        (0..self.dim()).find(|&i| self.name(i) == name)
    }

    pub fn require_index(&self, name: &str) -> Result<usize> {
        self.index_of(name)
            .ok_or_else(|| CoisoError::UnknownCoordinate(name.to_string()))
    }

    /// Global indices of the periodic base coordinates, in mode-vector order.
    pub fn periodic_indices(&self) -> Vec<usize> {
        (0..self.base.len()).filter(|&i| self.is_periodic(i)).collect()
    }

    /// The chart of the zero section: same base coordinates, no fibre.
    pub fn base_chart(&self) -> Arc<ChartSpec> {
        let base: Vec<(&str, bool)> = self
            .base
            .iter()
            .map(|b| (b.name.as_str(), b.periodic))
            .collect();
        Arc::new(ChartSpec::build::<&str>(&base, &[], None).expect("sub-chart of a valid chart"))
    }

    /// True when `other` is this chart with its fibre coordinates removed.
    pub fn has_base_chart(&self, other: &ChartSpec) -> bool {
        other.fibre.is_empty() && other.base == self.base
    }
}

pub(crate) fn same_chart(a: &Arc<ChartSpec>, b: &Arc<ChartSpec>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

pub(crate) fn check_same_chart(a: &Arc<ChartSpec>, b: &Arc<ChartSpec>) -> Result<()> {
    if same_chart(a, b) {
        Ok(())
    } else {
        Err(CoisoError::ChartMismatch)
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}
