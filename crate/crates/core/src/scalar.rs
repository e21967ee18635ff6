//! Exact scalars: Gaussian rationals multiplied by integer powers of π.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational number.
pub type Rational = BigRational;

/// Builds the rational `num / den`. Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub(crate) fn rational_to_f64(r: &Rational) -> f64 {
    // numer/denom separately keeps huge-but-balanced fractions finite
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => r.to_f64().unwrap_or(f64::NAN),
    }
}

/// Element of ℚ(i).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GaussianRational {
    pub re: Rational,
    pub im: Rational,
}

impl GaussianRational {
    pub fn new(re: Rational, im: Rational) -> Self {
        GaussianRational { re, im }
    }

    pub fn zero() -> Self {
        GaussianRational::new(Rational::zero(), Rational::zero())
    }

    pub fn one() -> Self {
        GaussianRational::new(Rational::one(), Rational::zero())
    }

    pub fn i() -> Self {
        GaussianRational::new(Rational::zero(), Rational::one())
    }

    pub fn real(re: Rational) -> Self {
        GaussianRational::new(re, Rational::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussianRational::new(self.re.clone(), -&self.im)
    }

    pub fn scale(&self, r: &Rational) -> Self {
        GaussianRational::new(&self.re * r, &self.im * r)
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let norm = &self.re * &self.re + &self.im * &self.im;
        Some(GaussianRational::new(&self.re / &norm, -&self.im / &norm))
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }
}

impl Add for &GaussianRational {
    type Output = GaussianRational;
    fn add(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub for &GaussianRational {
    type Output = GaussianRational;
    fn sub(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Mul for &GaussianRational {
    type Output = GaussianRational;
    fn mul(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational::new(-&self.re, -&self.im)
    }
}

/// A finite sum `Σ_e c_e π^e` with Gaussian-rational `c_e`.
///
/// Zero coefficients are never stored, so structural equality is
/// mathematical equality.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Scalar {
    coeffs: BTreeMap<i32, GaussianRational>,
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::default()
    }

    pub fn one() -> Self {
        Scalar::from_gaussian(GaussianRational::one(), 0)
    }

    pub fn i() -> Self {
        Scalar::from_gaussian(GaussianRational::i(), 0)
    }

    pub fn from_integer(n: i64) -> Self {
        Scalar::from_rational(Rational::from_integer(BigInt::from(n)))
    }

    pub fn from_rational(r: Rational) -> Self {
        Scalar::from_gaussian(GaussianRational::real(r), 0)
    }

    /// `c · π^pi_exp`.
    pub fn from_gaussian(c: GaussianRational, pi_exp: i32) -> Self {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(pi_exp, c);
        }
        Scalar { coeffs }
    }

    /// `r · π^pi_exp` for a rational `r`.
    pub fn rational_pi(r: Rational, pi_exp: i32) -> Self {
        Scalar::from_gaussian(GaussianRational::real(r), pi_exp)
    }

    pub fn pi_power(pi_exp: i32) -> Self {
        Scalar::rational_pi(Rational::one(), pi_exp)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        *self == Scalar::one()
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.values().all(GaussianRational::is_real)
    }

    /// Iterates `(π-exponent, coefficient)` in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (i32, &GaussianRational)> {
        self.coeffs.iter().map(|(e, c)| (*e, c))
    }

    pub fn coefficient(&self, pi_exp: i32) -> GaussianRational {
        self.coeffs
            .get(&pi_exp)
            .cloned()
            .unwrap_or_else(GaussianRational::zero)
    }

    /// The single `(exponent, coefficient)` pair if this scalar is a monomial in π.
    pub fn as_monomial(&self) -> Option<(i32, &GaussianRational)> {
        if self.coeffs.len() == 1 {
            self.coeffs.iter().next().map(|(e, c)| (*e, c))
        } else {
            None
        }
    }

    /// The value as a plain Gaussian rational, if no π appears.
    pub fn as_gaussian(&self) -> Option<GaussianRational> {
        match self.coeffs.len() {
            0 => Some(GaussianRational::zero()),
            1 => self.coeffs.get(&0).cloned(),
            _ => None,
        }
    }

    /// The value as a plain rational, if it is real and π-free.
    pub fn as_rational(&self) -> Option<Rational> {
        self.as_gaussian()
            .filter(GaussianRational::is_real)
            .map(|g| g.re)
    }

    pub fn conj(&self) -> Self {
        Scalar {
            coeffs: self.coeffs.iter().map(|(e, c)| (*e, c.conj())).collect(),
        }
    }

    pub fn scale(&self, r: &Rational) -> Self {
        if r.is_zero() {
            return Scalar::zero();
        }
        Scalar {
            coeffs: self.coeffs.iter().map(|(e, c)| (*e, c.scale(r))).collect(),
        }
    }

    /// Inverse of a π-monomial; sums of several π-powers are not invertible here.
    pub fn inv(&self) -> Option<Self> {
        let (e, c) = self.as_monomial()?;
        Some(Scalar::from_gaussian(c.inv()?, -e))
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Scalar::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Numeric value with π evaluated at machine precision.
    pub fn eval(&self) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(e, c)| c.to_complex() * std::f64::consts::PI.powi(*e))
            .sum()
    }

    fn insert_add(coeffs: &mut BTreeMap<i32, GaussianRational>, e: i32, c: GaussianRational) {
        if c.is_zero() {
            return;
        }
        match coeffs.get_mut(&e) {
            Some(existing) => {
                let sum = &*existing + &c;
                if sum.is_zero() {
                    coeffs.remove(&e);
                } else {
                    *existing = sum;
                }
            }
            None => {
                coeffs.insert(e, c);
            }
        }
    }
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        let mut coeffs = self.coeffs.clone();
        for (e, c) in &rhs.coeffs {
            Scalar::insert_add(&mut coeffs, *e, c.clone());
        }
        Scalar { coeffs }
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        self + &(-rhs)
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        let mut coeffs = BTreeMap::new();
        for (e1, c1) in &self.coeffs {
            for (e2, c2) in &rhs.coeffs {
                Scalar::insert_add(&mut coeffs, e1 + e2, c1 * c2);
            }
        }
        Scalar { coeffs }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar {
            coeffs: self.coeffs.iter().map(|(e, c)| (*e, -c)).collect(),
        }
    }
}

macro_rules! forward_owned_binop {
    ($t:ty, $tr:ident, $m:ident) => {
        impl $tr for $t {
            type Output = $t;
            fn $m(self, rhs: $t) -> $t {
                (&self).$m(&rhs)
            }
        }
    };
}

forward_owned_binop!(Scalar, Add, add);
forward_owned_binop!(Scalar, Sub, sub);
forward_owned_binop!(Scalar, Mul, mul);
forward_owned_binop!(GaussianRational, Add, add);
forward_owned_binop!(GaussianRational, Sub, sub);
forward_owned_binop!(GaussianRational, Mul, mul);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::from_integer(n)
    }
}

impl From<Rational> for Scalar {
    fn from(r: Rational) -> Self {
        Scalar::from_rational(r)
    }
}

pub(crate) fn render_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Renders one real-or-imaginary π-monomial coefficient `c π^e` as
/// `(negative, magnitude-factors)`; the magnitude list is empty for `1`.
pub(crate) fn monomial_factors(r: &Rational, imaginary: bool, e: i32) -> (bool, Vec<String>) {
    let mut factors = Vec::new();
    let mag = r.abs();
    if !mag.is_one() {
        factors.push(render_rational(&mag));
    }
    if imaginary {
        factors.push("I".to_string());
    }
    match e {
        0 => {}
        1 => factors.push("pi".to_string()),
        _ => factors.push(format!("pi^{e}")),
    }
    (r.is_negative(), factors)
}

impl Scalar {
    /// Splits into signed single-factor monomials: each entry is
    /// `(negative, factors)` for `±|r| [I] π^e`.
    pub(crate) fn signed_monomials(&self) -> Vec<(bool, Vec<String>)> {
        let mut out = Vec::new();
        for (e, c) in &self.coeffs {
            if !c.re.is_zero() {
                out.push(monomial_factors(&c.re, false, *e));
            }
            if !c.im.is_zero() {
                out.push(monomial_factors(&c.im, true, *e));
            }
        }
        out
    }
}

pub(crate) fn join_signed(parts: &[(bool, String)]) -> String {
    if parts.is_empty() {
        return "0".to_string();
    }
    let mut s = String::new();
    for (idx, (neg, body)) in parts.iter().enumerate() {
        match (idx, neg) {
            (0, true) => {
                s.push('-');
                s.push_str(body);
            }
            (0, false) => s.push_str(body),
            (_, true) => {
                s.push_str(" - ");
                s.push_str(body);
            }
            (_, false) => {
                s.push_str(" + ");
                s.push_str(body);
            }
        }
    }
    s
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<(bool, String)> = self
            .signed_monomials()
            .into_iter()
            .map(|(neg, factors)| {
                let body = if factors.is_empty() {
                    "1".to_string()
                } else {
                    factors.join("*")
                };
                (neg, body)
            })
            .collect();
        f.write_str(&join_signed(&parts))
    }
}
