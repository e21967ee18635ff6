//! Coefficient functions on a bundle chart.
//!
//! A [`RingElement`] is a finite sum of terms
//! `c · x^a · e^{i2π k·θ} · y^b` where `x` are the non-periodic base
//! coordinates, `θ` the periodic base coordinates (period 1), `y` the fibre
//! coordinates and `c` a [`Scalar`]. Terms live in a `BTreeMap` keyed by
//! [`Monomial`], which gives the canonical lexicographic order on
//! `(x-exponents, Fourier mode, y-exponents)` for free.
//!
//! An element may carry a jet order `N`: it then stands for an unknown
//! function agreeing with the stored polynomial up to `O(|y|^{N+1})`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use num_traits::Zero;

use crate::chart::{check_same_chart, same_chart, ChartSpec, Slot};
use crate::error::{CoisoError, Result};
use crate::scalar::{join_signed, GaussianRational, Rational, Scalar};

/// Exponent/mode key of a single term.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    /// Exponents of the non-periodic base coordinates.
    pub x: Vec<u32>,
    /// Fourier mode over the periodic base coordinates.
    pub k: Vec<i64>,
    /// Exponents of the fibre coordinates.
    pub y: Vec<u32>,
}

impl Monomial {
    pub fn one(chart: &ChartSpec) -> Self {
        Monomial {
            x: vec![0; chart.n_poly()],
            k: vec![0; chart.n_periodic()],
            y: vec![0; chart.fibre_dim()],
        }
    }

    pub fn y_degree(&self) -> u32 {
        self.y.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.x.iter().all(|e| *e == 0) && self.k.iter().all(|k| *k == 0) && self.y_degree() == 0
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial {
            x: self.x.iter().zip(&other.x).map(|(a, b)| a + b).collect(),
            k: self.k.iter().zip(&other.k).map(|(a, b)| a + b).collect(),
            y: self.y.iter().zip(&other.y).map(|(a, b)| a + b).collect(),
        }
    }
}

#[derive(Clone)]
pub struct RingElement {
    chart: Arc<ChartSpec>,
    terms: BTreeMap<Monomial, Scalar>,
    order: Option<u32>,
}

impl PartialEq for RingElement {
    fn eq(&self, other: &Self) -> bool {
        same_chart(&self.chart, &other.chart) && self.order == other.order && self.terms == other.terms
    }
}

impl Eq for RingElement {}

impl fmt::Debug for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.order {
            Some(n) => write!(f, "RingElement[{self} + O(y^{})]", n + 1),
            None => write!(f, "RingElement[{self}]"),
        }
    }
}

fn min_order(a: Option<u32>, b: Option<u32>) -> Option<u32> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (Some(x), None) | (None, Some(x)) => Some(x),
        (None, None) => None,
    }
}

fn add_term(terms: &mut BTreeMap<Monomial, Scalar>, key: Monomial, c: Scalar) {
    if c.is_zero() {
        return;
    }
    match terms.get_mut(&key) {
        Some(existing) => {
            let sum = &*existing + &c;
            if sum.is_zero() {
                terms.remove(&key);
            } else {
                *existing = sum;
            }
        }
        None => {
            terms.insert(key, c);
        }
    }
}

impl RingElement {
    pub fn zero(chart: &Arc<ChartSpec>) -> Self {
        RingElement {
            chart: chart.clone(),
            terms: BTreeMap::new(),
            order: None,
        }
    }

    pub fn one(chart: &Arc<ChartSpec>) -> Self {
        RingElement::constant(chart, Scalar::one())
    }

    pub fn constant(chart: &Arc<ChartSpec>, c: Scalar) -> Self {
        RingElement::monomial(chart, Monomial::one(chart), c)
    }

    pub fn from_rational(chart: &Arc<ChartSpec>, r: Rational) -> Self {
        RingElement::constant(chart, Scalar::from_rational(r))
    }

    pub fn from_integer(chart: &Arc<ChartSpec>, n: i64) -> Self {
        RingElement::constant(chart, Scalar::from_integer(n))
    }

    pub fn monomial(chart: &Arc<ChartSpec>, key: Monomial, c: Scalar) -> Self {
        assert_eq!(key.x.len(), chart.n_poly(), "monomial does not fit chart");
        assert_eq!(key.k.len(), chart.n_periodic(), "monomial does not fit chart");
        assert_eq!(key.y.len(), chart.fibre_dim(), "monomial does not fit chart");
        let mut terms = BTreeMap::new();
        add_term(&mut terms, key, c);
        RingElement {
            chart: chart.clone(),
            terms,
            order: None,
        }
    }

    /// Sums arbitrary `(key, scalar)` pairs into canonical form.
    pub fn from_terms<I: IntoIterator<Item = (Monomial, Scalar)>>(chart: &Arc<ChartSpec>, it: I) -> Self {
        let mut out = RingElement::zero(chart);
        for (k, c) in it {
            out = &out + &RingElement::monomial(chart, k, c);
        }
        out
    }

    /// The coordinate function of a non-periodic base or fibre coordinate.
    pub fn variable(chart: &Arc<ChartSpec>, name: &str) -> Result<Self> {
        let idx = chart.require_index(name)?;
        let mut key = Monomial::one(chart);
        match chart.slot(idx) {
            Slot::Poly(i) => key.x[i] = 1,
            Slot::Fibre(j) => key.y[j] = 1,
            Slot::Periodic(_) => return Err(CoisoError::PeriodicCoordinate(name.to_string())),
        }
        Ok(RingElement::monomial(chart, key, Scalar::one()))
    }

    /// `e^{i2π k θ}` for a periodic coordinate `θ`.
    pub fn fourier(chart: &Arc<ChartSpec>, name: &str, k: i64) -> Result<Self> {
        let mut modes = vec![0; chart.n_periodic()];
        let idx = chart.require_index(name)?;
        match chart.slot(idx) {
            Slot::Periodic(p) => modes[p] = k,
            _ => {
                return Err(CoisoError::NonConstant(format!(
                    "`{name}` is not periodic; Fourier modes need a periodic coordinate"
                )))
            }
        }
        RingElement::fourier_mode(chart, modes)
    }

    /// `e^{i2π k·θ}` for a full mode vector.
    pub fn fourier_mode(chart: &Arc<ChartSpec>, modes: Vec<i64>) -> Result<Self> {
        if modes.len() != chart.n_periodic() {
            return Err(CoisoError::DimensionMismatch {
                expected: chart.n_periodic(),
                got: modes.len(),
            });
        }
        let mut key = Monomial::one(chart);
        key.k = modes;
        Ok(RingElement::monomial(chart, key, Scalar::one()))
    }

    /// `cos(2π k θ)`.
    pub fn cos(chart: &Arc<ChartSpec>, name: &str, k: i64) -> Result<Self> {
        let half = Scalar::from_rational(crate::scalar::rat(1, 2));
        let plus = RingElement::fourier(chart, name, k)?;
        let minus = RingElement::fourier(chart, name, -k)?;
        Ok((&plus + &minus).scale(&half))
    }

    /// `sin(2π k θ)`.
    pub fn sin(chart: &Arc<ChartSpec>, name: &str, k: i64) -> Result<Self> {
        // sin t = (e^{it} - e^{-it}) / 2i
        let minus_half_i = Scalar::from_gaussian(
            GaussianRational::new(Rational::zero(), crate::scalar::rat(-1, 2)),
            0,
        );
        let plus = RingElement::fourier(chart, name, k)?;
        let minus = RingElement::fourier(chart, name, -k)?;
        Ok((&plus - &minus).scale(&minus_half_i))
    }

    pub fn chart(&self) -> &Arc<ChartSpec> {
        &self.chart
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Jet order, `None` for an exact polynomial.
    pub fn jet_order(&self) -> Option<u32> {
        self.order
    }

    /// Truncates to total fibre degree `≤ n` and marks the result as a jet
    /// of order `n` (or lowers the existing order to `n`).
    pub fn to_jet(&self, n: u32) -> Self {
        let order = min_order(self.order, Some(n));
        let mut out = self.clone();
        out.order = order;
        out.truncate();
        out
    }

    /// Drops the jet marker, keeping the stored polynomial as an exact value.
    pub fn forget_order(&self) -> Self {
        let mut out = self.clone();
        out.order = None;
        out
    }

    fn truncate(&mut self) {
        if let Some(n) = self.order {
            self.terms.retain(|k, _| k.y_degree() <= n);
        }
    }

    /// Largest total fibre degree among stored terms, `None` for zero.
    pub fn y_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::y_degree).max()
    }

    pub fn is_fibre_free(&self) -> bool {
        self.terms.keys().all(|k| k.y_degree() == 0)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    /// The value when the element is a constant.
    pub fn as_scalar(&self) -> Option<Scalar> {
        if self.is_constant() {
            Some(self.constant_term())
        } else {
            None
        }
    }

    pub fn constant_term(&self) -> Scalar {
        self.terms
            .get(&Monomial::one(&self.chart))
            .cloned()
            .unwrap_or_default()
    }

    /// Holds iff `c_{-k} = conj(c_k)` for every term, i.e. the function is real-valued.
    pub fn is_real(&self) -> bool {
        self.terms.iter().all(|(key, c)| {
            let mut mirror = key.clone();
            mirror.k.iter_mut().for_each(|k| *k = -*k);
            self.terms.get(&mirror).map(Scalar::conj).as_ref() == Some(c)
        })
    }

    pub fn conj(&self) -> Self {
        let mut out = RingElement::zero(&self.chart);
        out.order = self.order;
        for (key, c) in &self.terms {
            let mut mirror = key.clone();
            mirror.k.iter_mut().for_each(|k| *k = -*k);
            add_term(&mut out.terms, mirror, c.conj());
        }
        out
    }

    pub fn try_add(&self, other: &RingElement) -> Result<RingElement> {
        check_same_chart(&self.chart, &other.chart)?;
        let mut out = self.clone();
        out.order = min_order(self.order, other.order);
        for (k, c) in &other.terms {
            add_term(&mut out.terms, k.clone(), c.clone());
        }
        out.truncate();
        Ok(out)
    }

    pub fn try_sub(&self, other: &RingElement) -> Result<RingElement> {
        self.try_add(&-other)
    }

    /// Exact product; Fourier modes add, jets truncate to the smaller order.
    pub fn try_mul(&self, other: &RingElement) -> Result<RingElement> {
        check_same_chart(&self.chart, &other.chart)?;
        let order = min_order(self.order, other.order);
        let mut terms = BTreeMap::new();
        for (k1, c1) in &self.terms {
            for (k2, c2) in &other.terms {
                let key = k1.mul(k2);
                if let Some(n) = order {
                    if key.y_degree() > n {
                        continue;
                    }
                }
                add_term(&mut terms, key, c1 * c2);
            }
        }
        Ok(RingElement {
            chart: self.chart.clone(),
            terms,
            order,
        })
    }

    pub fn scale(&self, c: &Scalar) -> RingElement {
        let mut out = RingElement::zero(&self.chart);
        out.order = self.order;
        if c.is_zero() {
            return out;
        }
        for (k, v) in &self.terms {
            add_term(&mut out.terms, k.clone(), v * c);
        }
        out
    }

    pub fn scale_rational(&self, r: &Rational) -> RingElement {
        self.scale(&Scalar::from_rational(r.clone()))
    }

    pub fn pow(&self, n: u32) -> RingElement {
        let mut acc = RingElement::one(&self.chart);
        acc.order = self.order;
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Derivative along the coordinate with global index `index`.
    ///
    /// A fibre derivative lowers the jet order by one (saturating at 0; the
    /// derivative of an order-0 jet carries no information).
    pub fn derivative(&self, index: usize) -> RingElement {
        let slot = self.chart.slot(index);
        let mut out = RingElement::zero(&self.chart);
        out.order = match (self.order, slot) {
            (Some(n), Slot::Fibre(_)) => Some(n.saturating_sub(1)),
            (o, _) => o,
        };
        for (key, c) in &self.terms {
            match slot {
                Slot::Poly(i) => {
                    if key.x[i] == 0 {
                        continue;
                    }
                    let mut nk = key.clone();
                    nk.x[i] -= 1;
                    add_term(&mut out.terms, nk, c * &Scalar::from_integer(key.x[i] as i64));
                }
                Slot::Fibre(j) => {
                    if key.y[j] == 0 {
                        continue;
                    }
                    let mut nk = key.clone();
                    nk.y[j] -= 1;
                    add_term(&mut out.terms, nk, c * &Scalar::from_integer(key.y[j] as i64));
                }
                Slot::Periodic(p) => {
                    let k = key.k[p];
                    if k == 0 {
                        continue;
                    }
                    // d/dθ e^{i2πkθ} = i·2πk·e^{i2πkθ}
                    let factor = Scalar::from_gaussian(
                        GaussianRational::new(Rational::zero(), Rational::from_integer((2 * k).into())),
                        1,
                    );
                    add_term(&mut out.terms, key.clone(), c * &factor);
                }
            }
        }
        out.truncate();
        out
    }

    pub fn partial_derivative(&self, coord: &str) -> Result<RingElement> {
        let idx = self.chart.require_index(coord)?;
        Ok(self.derivative(idx))
    }

    /// Restriction to the zero section `y = 0`; the result is exact.
    pub fn at_zero_fibre(&self) -> RingElement {
        RingElement {
            chart: self.chart.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| k.y_degree() == 0)
                .map(|(k, c)| (k.clone(), c.clone()))
                .collect(),
            order: None,
        }
    }

    /// Keeps only the terms whose Fourier mode vanishes in the given
    /// periodic coordinates (global indices): the average over those circles.
    pub fn mean_over(&self, periodic: &[usize]) -> Result<RingElement> {
        let mut slots = Vec::new();
        for &idx in periodic {
            match self.chart.slot(idx) {
                Slot::Periodic(p) => slots.push(p),
                _ => {
                    return Err(CoisoError::NonConstant(format!(
                        "`{}` is not periodic",
                        self.chart.name(idx)
                    )))
                }
            }
        }
        let mut out = self.clone();
        out.terms.retain(|k, _| slots.iter().all(|&p| k.k[p] == 0));
        Ok(out)
    }

    /// Moves a fibre-free element of a bundle chart to its base chart.
    pub fn restrict_to_base(&self, base: &Arc<ChartSpec>) -> Result<RingElement> {
        if !self.chart.has_base_chart(base) {
            return Err(CoisoError::ChartMismatch);
        }
        if !self.is_fibre_free() {
            return Err(CoisoError::NonConstant("element depends on fibre coordinates".into()));
        }
        Ok(RingElement {
            chart: base.clone(),
            terms: self
                .terms
                .iter()
                .map(|(k, c)| {
                    let key = Monomial {
                        x: k.x.clone(),
                        k: k.k.clone(),
                        y: Vec::new(),
                    };
                    (key, c.clone())
                })
                .collect(),
            order: self.order,
        })
    }

    /// Pulls an element of the base chart back along the bundle projection.
    pub fn lift_to_bundle(&self, bundle: &Arc<ChartSpec>) -> Result<RingElement> {
        if !bundle.has_base_chart(&self.chart) {
            return Err(CoisoError::ChartMismatch);
        }
        let nf = bundle.fibre_dim();
        Ok(RingElement {
            chart: bundle.clone(),
            terms: self
                .terms
                .iter()
                .map(|(k, c)| {
                    let key = Monomial {
                        x: k.x.clone(),
                        k: k.k.clone(),
                        y: vec![0; nf],
                    };
                    (key, c.clone())
                })
                .collect(),
            order: self.order,
        })
    }

    /// Substitutes `y_j ↦ y_j + shift_j(x)` and expands.
    ///
    /// Every shift entry must be independent of the fibre coordinates. For
    /// a jet input the result is truncated at the same order.
    pub fn taylor_shift(&self, shift: &[RingElement]) -> Result<RingElement> {
        self.shift_impl(shift, self.order)
    }

    /// Like [`taylor_shift`](Self::taylor_shift) on the stored polynomial,
    /// then truncated to a jet of order `n`.
    pub fn taylor_shift_to_order(&self, shift: &[RingElement], n: u32) -> Result<RingElement> {
        self.shift_impl(shift, min_order(self.order, Some(n)))
    }

    fn shift_impl(&self, shift: &[RingElement], order: Option<u32>) -> Result<RingElement> {
        let nf = self.chart.fibre_dim();
        if shift.len() != nf {
            return Err(CoisoError::ShiftArity {
                expected: nf,
                got: shift.len(),
            });
        }
        for (j, s) in shift.iter().enumerate() {
            check_same_chart(&self.chart, s.chart())?;
            if !s.is_fibre_free() {
                return Err(CoisoError::FibreDependentShift(j));
            }
        }
        let mut linear = Vec::with_capacity(nf);
        for (j, s) in shift.iter().enumerate() {
            let mut key = Monomial::one(&self.chart);
            key.y[j] = 1;
            let y = RingElement::monomial(&self.chart, key, Scalar::one());
            let mut sum = &y + s;
            sum.order = order;
            linear.push(sum);
        }
        let mut powers: HashMap<(usize, u32), RingElement> = HashMap::new();
        let mut out = RingElement::zero(&self.chart);
        out.order = order;
        for (key, c) in &self.terms {
            let mut head = key.clone();
            head.y.iter_mut().for_each(|e| *e = 0);
            let mut term = RingElement::monomial(&self.chart, head, c.clone());
            term.order = order;
            for (j, &e) in key.y.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let p = powers
                    .entry((j, e))
                    .or_insert_with(|| linear[j].pow(e))
                    .clone();
                term = &term * &p;
            }
            out = &out + &term;
        }
        out.order = order;
        out.truncate();
        Ok(out)
    }

    /// Numeric value at a point given in chart order (base, then fibre).
    pub fn eval(&self, point: &[f64]) -> Result<Complex64> {
        if point.len() != self.chart.dim() {
            return Err(CoisoError::DimensionMismatch {
                expected: self.chart.dim(),
                got: point.len(),
            });
        }
        Ok(self.eval_unchecked(point))
    }

    pub(crate) fn eval_unchecked(&self, point: &[f64]) -> Complex64 {
        let chart = &self.chart;
        let mut poly_vals = Vec::with_capacity(chart.n_poly());
        let mut phase_vals = Vec::with_capacity(chart.n_periodic());
        let mut fibre_vals = Vec::with_capacity(chart.fibre_dim());
        for (i, &v) in point.iter().enumerate() {
            match chart.slot(i) {
                Slot::Poly(_) => poly_vals.push(v),
                Slot::Periodic(_) => phase_vals.push(v),
                Slot::Fibre(_) => fibre_vals.push(v),
            }
        }
        let two_pi = 2.0 * std::f64::consts::PI;
        let mut total = Complex64::zero();
        for (key, c) in &self.terms {
            let mut v = c.eval();
            for (e, x) in key.x.iter().zip(&poly_vals) {
                v *= x.powi(*e as i32);
            }
            let phase: f64 = key
                .k
                .iter()
                .zip(&phase_vals)
                .map(|(k, t)| *k as f64 * t)
                .sum();
            if phase != 0.0 {
                v *= Complex64::from_polar(1.0, two_pi * phase);
            }
            for (e, y) in key.y.iter().zip(&fibre_vals) {
                v *= y.powi(*e as i32);
            }
            total += v;
        }
        total
    }
}

/// A [`RingElement`] with coefficients converted to machine precision, for
/// repeated evaluation on sample grids.
#[derive(Clone, Debug)]
pub struct CompiledFunction {
    slots: Vec<Slot>,
    terms: Vec<(Complex64, Monomial)>,
}

impl CompiledFunction {
    pub fn eval(&self, point: &[f64]) -> Complex64 {
        let two_pi = 2.0 * std::f64::consts::PI;
        let mut total = Complex64::zero();
        for (c, key) in &self.terms {
            let mut v = *c;
            let mut phase = 0.0;
            for (slot, &t) in self.slots.iter().zip(point) {
                match *slot {
                    Slot::Poly(i) => v *= t.powi(key.x[i] as i32),
                    Slot::Periodic(i) => phase += key.k[i] as f64 * t,
                    Slot::Fibre(j) => v *= t.powi(key.y[j] as i32),
                }
            }
            if phase != 0.0 {
                v *= Complex64::from_polar(1.0, two_pi * phase);
            }
            total += v;
        }
        total
    }
}

impl RingElement {
    pub fn compile(&self) -> CompiledFunction {
        CompiledFunction {
            slots: (0..self.chart.dim()).map(|i| self.chart.slot(i)).collect(),
            terms: self.terms.iter().map(|(k, c)| (c.eval(), k.clone())).collect(),
        }
    }
}

impl Add for &RingElement {
    type Output = RingElement;
    fn add(self, rhs: &RingElement) -> RingElement {
        self.try_add(rhs).expect("ring elements on different charts")
    }
}

impl Sub for &RingElement {
    type Output = RingElement;
    fn sub(self, rhs: &RingElement) -> RingElement {
        self.try_sub(rhs).expect("ring elements on different charts")
    }
}

impl Mul for &RingElement {
    type Output = RingElement;
    fn mul(self, rhs: &RingElement) -> RingElement {
        self.try_mul(rhs).expect("ring elements on different charts")
    }
}

impl Neg for &RingElement {
    type Output = RingElement;
    fn neg(self) -> RingElement {
        RingElement {
            chart: self.chart.clone(),
            terms: self.terms.iter().map(|(k, c)| (k.clone(), -c)).collect(),
            order: self.order,
        }
    }
}

impl Add for RingElement {
    type Output = RingElement;
    fn add(self, rhs: RingElement) -> RingElement {
        &self + &rhs
    }
}

impl Sub for RingElement {
    type Output = RingElement;
    fn sub(self, rhs: RingElement) -> RingElement {
        &self - &rhs
    }
}

impl Mul for RingElement {
    type Output = RingElement;
    fn mul(self, rhs: RingElement) -> RingElement {
        &self * &rhs
    }
}

impl Neg for RingElement {
    type Output = RingElement;
    fn neg(self) -> RingElement {
        -&self
    }
}

/// Per-periodic-coordinate factor of the real trigonometric basis.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Trig {
    One,
    Cos(u64),
    Sin(u64),
}

type RealKey = (Vec<u32>, Vec<Trig>, Vec<u32>);

impl RingElement {
    /// Rewrites `e^{i2πk·θ}` as products of `cos`/`sin` per coordinate.
    fn real_basis(&self) -> BTreeMap<RealKey, Scalar> {
        let mut out: BTreeMap<RealKey, Scalar> = BTreeMap::new();
        for (key, c) in &self.terms {
            let mut partial: Vec<(Vec<Trig>, Scalar)> = vec![(Vec::new(), c.clone())];
            for &k in &key.k {
                let mut next = Vec::with_capacity(partial.len() * 2);
                for (trig, coef) in partial {
                    if k == 0 {
                        let mut t = trig;
                        t.push(Trig::One);
                        next.push((t, coef));
                    } else {
                        let m = k.unsigned_abs();
                        let mut tc = trig.clone();
                        tc.push(Trig::Cos(m));
                        next.push((tc, coef.clone()));
                        let mut ts = trig;
                        ts.push(Trig::Sin(m));
                        let sign = if k > 0 { 1 } else { -1 };
                        let i_sign = Scalar::from_gaussian(
                            GaussianRational::new(Rational::zero(), Rational::from_integer(sign.into())),
                            0,
                        );
                        next.push((ts, &coef * &i_sign));
                    }
                }
                partial = next;
            }
            for (trig, coef) in partial {
                let rk = (key.x.clone(), trig, key.y.clone());
                let entry = out.entry(rk).or_default();
                *entry = &*entry + &coef;
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    /// Signed rendered terms in the real trigonometric basis.
    pub(crate) fn signed_terms(&self) -> Vec<(bool, String)> {
        let chart = &self.chart;
        let poly_names: Vec<&str> = (0..chart.base_dim())
            .filter(|&i| !chart.is_periodic(i))
            .map(|i| chart.name(i))
            .collect();
        let periodic_names: Vec<&str> = chart
            .periodic_indices()
            .into_iter()
            .map(|i| chart.name(i))
            .collect();
        let mut parts = Vec::new();
        for ((x, trig, y), coef) in self.real_basis() {
            let mut factors = Vec::new();
            for (e, name) in x.iter().zip(&poly_names) {
                push_power(&mut factors, name, *e);
            }
            for (t, name) in trig.iter().zip(&periodic_names) {
                match t {
                    Trig::One => {}
                    Trig::Cos(m) => factors.push(format!("cos({}*pi*{name})", 2 * m)),
                    Trig::Sin(m) => factors.push(format!("sin({}*pi*{name})", 2 * m)),
                }
            }
            for (e, name) in y.iter().zip(chart.fibre()) {
                push_power(&mut factors, name, *e);
            }
            let monos = coef.signed_monomials();
            if monos.len() == 1 {
                let (neg, mut head) = monos.into_iter().next().expect("one monomial");
                head.extend(factors);
                let body = if head.is_empty() { "1".to_string() } else { head.join("*") };
                parts.push((neg, body));
            } else {
                let mut all = vec![format!("({coef})")];
                all.extend(factors);
                parts.push((false, all.join("*")));
            }
        }
        parts
    }
}

fn push_power(factors: &mut Vec<String>, name: &str, e: u32) {
    match e {
        0 => {}
        1 => factors.push(name.to_string()),
        _ => factors.push(format!("{name}^{e}")),
    }
}

impl fmt::Display for RingElement {
    /// Real-basis rendering, e.g. `8*pi^2*cos(2*pi*y1)*cos(2*pi*y2)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&join_signed(&self.signed_terms()))
    }
}
