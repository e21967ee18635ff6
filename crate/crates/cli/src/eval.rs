//! Evaluation of binding expressions on the scenario chart.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use coiso_core::symplectic_model::{gotay_form_on, symplectic_to_poisson, PresymplecticData};
use coiso_core::{
    ChartSpec, DifferentialForm, GaussianRational, MultiVectorField, Rational, RingElement, Scalar,
    SubbundleSpec, VerticalSection,
};

use crate::ast::{ChartDecl, Expr};
use crate::error::{EvalError, EvalResult};

#[derive(Clone, Debug)]
pub enum Value {
    Ring(RingElement),
    Multi(MultiVectorField),
    Form(DifferentialForm),
    Section(VerticalSection),
}

impl Value {
    pub fn kind(&self) -> String {
        match self {
            Value::Ring(f) if f.jet_order().is_some() => "function (jet)".into(),
            Value::Ring(_) => "function".into(),
            Value::Multi(m) => {
                let jet = if m.jet_order().is_some() { ", jet" } else { "" };
                format!("multivector (degree {}{jet})", m.degree())
            }
            Value::Form(w) => format!("form (degree {})", w.degree()),
            Value::Section(s) => format!("section (degree {})", s.degree()),
        }
    }

    pub fn chart(&self) -> &Arc<ChartSpec> {
        match self {
            Value::Ring(f) => f.chart(),
            Value::Multi(m) => m.chart(),
            Value::Form(w) => w.chart(),
            Value::Section(s) => s.chart(),
        }
    }

    /// Degree-1 vertical section view, for section-valued check arguments.
    pub fn as_section(&self) -> EvalResult<VerticalSection> {
        match self {
            Value::Section(s) => Ok(s.clone()),
            Value::Multi(m) => Ok(VerticalSection::new(m.clone())?),
            Value::Ring(f) if f.chart().fibre_dim() == 1 => {
                Ok(VerticalSection::from_components(f.chart(), vec![f.clone()])?)
            }
            other => Err(EvalError::Type(format!("expected a section, got a {}", other.kind()))),
        }
    }

    pub fn as_multivector(&self) -> EvalResult<MultiVectorField> {
        match self {
            Value::Multi(m) => Ok(m.clone()),
            Value::Section(s) => Ok(s.as_multivector().clone()),
            Value::Ring(f) => Ok(MultiVectorField::function(f.clone())),
            other => Err(EvalError::Type(format!("expected a multivector, got a {}", other.kind()))),
        }
    }

    pub fn as_form(&self) -> EvalResult<DifferentialForm> {
        match self {
            Value::Form(w) => Ok(w.clone()),
            Value::Ring(f) => Ok(DifferentialForm::function(f.clone())),
            other => Err(EvalError::Type(format!("expected a differential form, got a {}", other.kind()))),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Ring(x) => x.fmt(f),
            Value::Multi(x) => x.fmt(f),
            Value::Form(x) => x.fmt(f),
            Value::Section(s) => match s.render_components() {
                Ok(t) => f.write_str(&t),
                Err(_) => s.fmt(f),
            },
        }
    }
}

/// Evaluated bindings. A binding of the form `inv_form(ω)` also remembers
/// `ω`, so checks can compare jets with the exact pointwise inverse.
pub struct Env {
    pub chart: Arc<ChartSpec>,
    pub truncation: u32,
    values: BTreeMap<String, Result<Value, String>>,
    sources: BTreeMap<String, DifferentialForm>,
}

pub fn build_chart(decl: &ChartDecl) -> EvalResult<Arc<ChartSpec>> {
    let base: Vec<(&str, bool)> = decl.base.iter().map(|(n, p)| (n.as_str(), *p)).collect();
    let fibre: Vec<&str> = decl.fibre.iter().map(String::as_str).collect();
    let chart = ChartSpec::bundle(&base, &fibre)?;
    match &decl.domain {
        Some(b) => Ok(chart.with_domain_bound(b.clone())?),
        None => Ok(chart),
    }
}

impl Env {
    pub fn new(chart: Arc<ChartSpec>, truncation: u32) -> Self {
        Env {
            chart,
            truncation,
            values: BTreeMap::new(),
            sources: BTreeMap::new(),
        }
    }

    /// Evaluates and stores a binding; a failure is stored too and reported
    /// by every later use of the name.
    pub fn bind(&mut self, name: &str, expr: &Expr) -> Result<&Value, String> {
        let result = match expr {
            Expr::Call(f, args) if f == "inv_form" => self.inv_form(&args[0]).map(|(pi, omega)| {
                self.sources.insert(name.to_string(), omega);
                pi
            }),
            _ => self.eval(expr),
        };
        self.values
            .insert(name.to_string(), result.map_err(|e| e.to_string()));
        self.values[name].as_ref().map_err(Clone::clone)
    }

    pub fn get(&self, name: &str) -> EvalResult<&Value> {
        match self.values.get(name) {
            Some(Ok(v)) => Ok(v),
            Some(Err(message)) => Err(EvalError::Binding {
                name: name.to_string(),
                message: message.clone(),
            }),
            None => Err(EvalError::Invalid(format!("`{name}` is not bound"))),
        }
    }

    /// The symplectic form a bivector binding was inverted from, if any.
    pub fn source_form(&self, name: &str) -> Option<&DifferentialForm> {
        self.sources.get(name)
    }

    fn inv_form(&self, arg: &Expr) -> EvalResult<(Value, DifferentialForm)> {
        let omega = self.eval(arg)?.as_form()?;
        if !omega.de_rham_d().is_zero() {
            return Err(coiso_core::CoisoError::NotClosed.into());
        }
        let inv = symplectic_to_poisson(&omega, self.truncation)?;
        Ok((Value::Multi(inv.pi), omega))
    }

    fn constant(&self, c: Scalar) -> Value {
        Value::Ring(RingElement::constant(&self.chart, c))
    }

    pub fn eval(&self, expr: &Expr) -> EvalResult<Value> {
        match expr {
            Expr::Num(r) => Ok(self.constant(Scalar::from_rational(r.clone()))),
            Expr::Pi => Ok(self.constant(Scalar::pi_power(1))),
            Expr::I => Ok(self.constant(Scalar::i())),
            Expr::Ident(name) => self.ident(name),
            Expr::Field(name) => Ok(Value::Multi(MultiVectorField::coordinate_field(&self.chart, name)?)),
            Expr::Neg(x) => Ok(neg(self.eval(x)?)),
            Expr::Add(a, b) => add(self.eval(a)?, self.eval(b)?),
            Expr::Sub(a, b) => add(self.eval(a)?, neg(self.eval(b)?)),
            Expr::Mul(a, b) => mul(self.eval(a)?, self.eval(b)?),
            Expr::Div(a, b) => {
                let d = match self.eval(b)? {
                    Value::Ring(f) => f.as_scalar(),
                    _ => None,
                };
                let inv = d
                    .and_then(|s| s.inv())
                    .ok_or_else(|| EvalError::Invalid("division is only by nonzero constants".into()))?;
                mul(self.eval(a)?, self.constant(inv))
            }
            Expr::Wedge(a, b) => wedge(self.eval(a)?, self.eval(b)?),
            Expr::Pow(b, n) => match self.eval(b)? {
                Value::Ring(f) if *n >= 0 => Ok(Value::Ring(f.pow(*n as u32))),
                Value::Ring(f) => {
                    let inv = f
                        .as_scalar()
                        .and_then(|s| s.inv())
                        .ok_or_else(|| EvalError::Invalid("negative powers need a nonzero constant".into()))?;
                    Ok(self.constant(inv.pow(n.unsigned_abs() as u32)))
                }
                other => Err(EvalError::Type(format!("cannot raise a {} to a power", other.kind()))),
            },
            Expr::Tuple(items) => {
                let comps = items
                    .iter()
                    .map(|e| match self.eval(e)? {
                        Value::Ring(f) => Ok(f),
                        other => Err(EvalError::Type(format!(
                            "section components must be functions, got a {}",
                            other.kind()
                        ))),
                    })
                    .collect::<EvalResult<Vec<_>>>()?;
                Ok(Value::Section(VerticalSection::from_components(&self.chart, comps)?))
            }
            Expr::Call(f, args) => match f.as_str() {
                "sin" | "cos" => self.trig(f == "sin", &args[0]),
                "inv_form" => Ok(self.inv_form(&args[0])?.0),
                "gotay" => self.gotay(args),
                other => Err(EvalError::Invalid(format!("unknown function `{other}`"))),
            },
        }
    }

    fn ident(&self, name: &str) -> EvalResult<Value> {
        if self.values.contains_key(name) && name != "pi" {
            return self.get(name).cloned();
        }
        if let Some(i) = self.chart.index_of(name) {
            if self.chart.is_periodic(i) {
                return Err(EvalError::Invalid(format!(
                    "periodic coordinate `{name}` can only appear inside sin/cos"
                )));
            }
            return Ok(Value::Ring(RingElement::variable(&self.chart, name)?));
        }
        if let Some(rest) = name.strip_prefix('d') {
            return Ok(Value::Form(DifferentialForm::differential(&self.chart, rest)?));
        }
        Err(EvalError::Invalid(format!("undefined name `{name}`")))
    }

    /// `sin`/`cos` of `Σ 2π n_i θ_i` with integer `n_i` over periodic `θ_i`.
    fn trig(&self, is_sin: bool, arg: &Expr) -> EvalResult<Value> {
        let phase = self.phase(arg)?;
        if !phase.constant.is_zero() {
            return Err(EvalError::Invalid(format!("phase `{arg}` has a constant offset")));
        }
        let two_pi_inv = Scalar::rational_pi(Rational::from_integer(2.into()), 1)
            .inv()
            .expect("2π is invertible");
        let periodic = self.chart.periodic_indices();
        let mut modes = Vec::with_capacity(periodic.len());
        for i in &periodic {
            let c = phase.coefficients.get(i).cloned().unwrap_or_else(Scalar::zero);
            let n = (&c * &two_pi_inv)
                .as_rational()
                .filter(|r| r.is_integer())
                .and_then(|r| r.numer().to_string().parse::<i64>().ok())
                .ok_or_else(|| {
                    EvalError::Invalid(format!(
                        "coefficient of `{}` in `{arg}` is not an integer multiple of 2*pi",
                        self.chart.name(*i)
                    ))
                })?;
            modes.push(n);
        }
        let f = RingElement::fourier_mode(&self.chart, modes)?;
        let fbar = f.conj();
        let half = Rational::new(1.into(), 2.into());
        let value = if is_sin {
            let minus_half_i = Scalar::from_gaussian(GaussianRational::new(Rational::from_integer(0.into()), -half), 0);
            (&f - &fbar).scale(&minus_half_i)
        } else {
            (&f + &fbar).scale_rational(&half)
        };
        Ok(Value::Ring(value))
    }

    fn phase(&self, e: &Expr) -> EvalResult<Phase> {
        let constant = |c: Scalar| Phase {
            coefficients: BTreeMap::new(),
            constant: c,
        };
        match e {
            Expr::Num(r) => Ok(constant(Scalar::from_rational(r.clone()))),
            Expr::Pi => Ok(constant(Scalar::pi_power(1))),
            Expr::Ident(name) => match self.chart.index_of(name) {
                Some(i) if self.chart.is_periodic(i) => Ok(Phase {
                    coefficients: BTreeMap::from([(i, Scalar::one())]),
                    constant: Scalar::zero(),
                }),
                _ => Err(EvalError::Invalid(format!(
                    "sin/cos arguments may only involve periodic coordinates, found `{name}`"
                ))),
            },
            Expr::Neg(x) => Ok(self.phase(x)?.scale(&-Scalar::one())),
            Expr::Add(a, b) => Ok(self.phase(a)?.add(&self.phase(b)?)),
            Expr::Sub(a, b) => Ok(self.phase(a)?.add(&self.phase(b)?.scale(&-Scalar::one()))),
            Expr::Mul(a, b) => {
                let (pa, pb) = (self.phase(a)?, self.phase(b)?);
                if pa.coefficients.is_empty() {
                    Ok(pb.scale(&pa.constant))
                } else if pb.coefficients.is_empty() {
                    Ok(pa.scale(&pb.constant))
                } else {
                    Err(EvalError::Invalid(format!("phase `{e}` is not linear")))
                }
            }
            Expr::Div(a, b) => {
                let pb = self.phase(b)?;
                let inv = if pb.coefficients.is_empty() { pb.constant.inv() } else { None };
                let inv = inv.ok_or_else(|| EvalError::Invalid(format!("phase `{e}` divides by a non-constant")))?;
                Ok(self.phase(a)?.scale(&inv))
            }
            Expr::Pow(b, n) if *n >= 0 => {
                let pb = self.phase(b)?;
                if !pb.coefficients.is_empty() {
                    return Err(EvalError::Invalid(format!("phase `{e}` is not linear")));
                }
                Ok(constant(pb.constant.pow(*n as u32)))
            }
            _ => Err(EvalError::Invalid(format!("unsupported phase `{e}`"))),
        }
    }

    fn gotay(&self, args: &[Expr]) -> EvalResult<Value> {
        let omega = self.eval(&args[0])?.as_form()?;
        let base_form = omega.pullback_zero_section();
        let base = base_form.chart().clone();
        let lifted = if base_form.is_zero() {
            DifferentialForm::zero(&self.chart, omega.degree())
        } else {
            base_form.lift_to_bundle(&self.chart)?
        };
        if lifted != omega {
            return Err(EvalError::Invalid(
                "gotay(...) expects a form built from base coordinates only".into(),
            ));
        }
        let names: Vec<&str> = args[1..]
            .iter()
            .map(|e| match e {
                Expr::Ident(n) => Ok(n.as_str()),
                other => Err(EvalError::Invalid(format!("`{other}` is not a coordinate name"))),
            })
            .collect::<EvalResult<_>>()?;
        let data = PresymplecticData::new(base_form, SubbundleSpec::new(&base, &names)?)?;
        Ok(Value::Form(gotay_form_on(&data, &self.chart)?))
    }
}

struct Phase {
    coefficients: BTreeMap<usize, Scalar>,
    constant: Scalar,
}

impl Phase {
    fn scale(mut self, c: &Scalar) -> Phase {
        for v in self.coefficients.values_mut() {
            *v = &*v * c;
        }
        self.constant = &self.constant * c;
        self
    }

    fn add(mut self, other: &Phase) -> Phase {
        for (i, c) in &other.coefficients {
            let e = self.coefficients.entry(*i).or_insert_with(Scalar::zero);
            *e = &*e + c;
        }
        self.constant = &self.constant + &other.constant;
        self
    }
}

fn neg(v: Value) -> Value {
    match v {
        Value::Ring(f) => Value::Ring(-f),
        Value::Multi(m) => Value::Multi(m.neg()),
        Value::Form(w) => Value::Form(w.neg()),
        Value::Section(s) => Value::Section(s.neg()),
    }
}

fn type_error(op: &str, a: &Value, b: &Value) -> EvalError {
    EvalError::Type(format!("cannot {op} a {} and a {}", a.kind(), b.kind()))
}

fn add(a: Value, b: Value) -> EvalResult<Value> {
    Ok(match (a, b) {
        (Value::Ring(x), Value::Ring(y)) => Value::Ring(x.try_add(&y)?),
        (Value::Section(x), Value::Section(y)) => Value::Section(x.try_add(&y)?),
        (Value::Form(x), y @ (Value::Form(_) | Value::Ring(_))) => Value::Form(x.try_add(&y.as_form()?)?),
        (x @ Value::Ring(_), Value::Form(y)) => Value::Form(x.as_form()?.try_add(&y)?),
        (x @ (Value::Multi(_) | Value::Section(_) | Value::Ring(_)), y @ (Value::Multi(_) | Value::Section(_) | Value::Ring(_))) => {
            Value::Multi(x.as_multivector()?.try_add(&y.as_multivector()?)?)
        }
        (x, y) => return Err(type_error("add", &x, &y)),
    })
}

fn scale_by(f: &RingElement, v: Value) -> EvalResult<Value> {
    Ok(match v {
        Value::Ring(g) => Value::Ring(f.try_mul(&g)?),
        Value::Multi(m) => Value::Multi(m.scale(f)?),
        Value::Form(w) => Value::Form(w.scale(f)?),
        Value::Section(s) => Value::Section(s.scale(f)?),
    })
}

fn mul(a: Value, b: Value) -> EvalResult<Value> {
    match (a, b) {
        (Value::Ring(f), v) | (v, Value::Ring(f)) => scale_by(&f, v),
        (x, y) => Err(EvalError::Type(format!(
            "cannot multiply a {} and a {}; use /\\ for wedge products",
            x.kind(),
            y.kind()
        ))),
    }
}

fn wedge(a: Value, b: Value) -> EvalResult<Value> {
    Ok(match (a, b) {
        (Value::Ring(f), v) | (v, Value::Ring(f)) => return scale_by(&f, v),
        (Value::Form(x), Value::Form(y)) => Value::Form(x.wedge(&y)?),
        (Value::Section(x), Value::Section(y)) => Value::Section(x.wedge(&y)?),
        (x @ (Value::Multi(_) | Value::Section(_)), y @ (Value::Multi(_) | Value::Section(_))) => {
            Value::Multi(x.as_multivector()?.wedge(&y.as_multivector()?)?)
        }
        (x, y) => return Err(type_error("wedge", &x, &y)),
    })
}
