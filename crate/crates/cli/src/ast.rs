//! Scenario syntax tree and its canonical rendering.
//!
//! `Display` renders a form that parses back to an equal tree.

use std::fmt;

use coiso_core::Rational;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(Rational),
    Pi,
    /// The imaginary unit `I`.
    I,
    /// A binding, a coordinate, or a differential `d<coordinate>`.
    Ident(String),
    /// `@name`.
    Field(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Wedge(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i64),
    Call(String, Vec<Expr>),
    Tuple(Vec<Expr>),
}

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Wedge(..) => 3,
            Expr::Neg(_) => 4,
            Expr::Pow(..) => 5,
            Expr::Num(r) if !r.is_integer() => 5,
            _ => 6,
        }
    }

    fn render(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            f.write_str("(")?;
            self.render(f, 0)?;
            return f.write_str(")");
        }
        match self {
            Expr::Num(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Expr::Pi => f.write_str("pi"),
            Expr::I => f.write_str("I"),
            Expr::Ident(s) => f.write_str(s),
            Expr::Field(s) => write!(f, "@{s}"),
            Expr::Neg(x) => {
                f.write_str("-")?;
                x.render(f, 4)
            }
            Expr::Add(a, b) => binary(f, a, " + ", b, 1),
            Expr::Sub(a, b) => binary(f, a, " - ", b, 1),
            Expr::Mul(a, b) => binary(f, a, "*", b, 2),
            Expr::Div(a, b) => binary(f, a, " / ", b, 2),
            Expr::Wedge(a, b) => binary(f, a, " /\\ ", b, 3),
            Expr::Pow(b, n) => {
                b.render(f, 6)?;
                write!(f, "^{n}")
            }
            Expr::Call(name, args) => {
                write!(f, "{name}(")?;
                list(f, args)?;
                f.write_str(")")
            }
            Expr::Tuple(items) => {
                f.write_str("(")?;
                list(f, items)?;
                f.write_str(if items.len() == 1 { ",)" } else { ")" })
            }
        }
    }
}

fn binary(f: &mut fmt::Formatter<'_>, a: &Expr, op: &str, b: &Expr, prec: u8) -> fmt::Result {
    a.render(f, prec)?;
    f.write_str(op)?;
    b.render(f, prec + 1)
}

fn list(f: &mut fmt::Formatter<'_>, items: &[Expr]) -> fmt::Result {
    for (i, e) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        e.render(f, 0)?;
    }
    Ok(())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.render(f, 0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChartDecl {
    /// `(name, periodic)` in declaration order.
    pub base: Vec<(String, bool)>,
    pub fibre: Vec<String>,
    pub domain: Option<Rational>,
}

impl fmt::Display for ChartDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base: Vec<String> = self
            .base
            .iter()
            .map(|(n, p)| if *p { format!("{n}*") } else { n.clone() })
            .collect();
        write!(f, "chart base=({}) fibre=({})", base.join(", "), self.fibre.join(", "))?;
        if let Some(d) = &self.domain {
            write!(f, " domain={}", Expr::Num(d.clone()))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Check {
    Coisotropic { name: String },
    Mc { name: String, order: Option<u32> },
    Kuranishi { name: String },
    Jacobi { name: String },
    OmegaLe { name: String, k: u32 },
    Pencil { file: String, order: Option<u32> },
}

impl Check {
    pub fn kind(&self) -> &'static str {
        match self {
            Check::Coisotropic { .. } => "coisotropic",
            Check::Mc { .. } => "mc",
            Check::Kuranishi { .. } => "kuranishi",
            Check::Jacobi { .. } => "jacobi",
            Check::OmegaLe { .. } => "omega_le",
            Check::Pencil { .. } => "pencil",
        }
    }

    /// Whether the check reads the Poisson structure bound to `pi`.
    pub fn needs_pi(&self) -> bool {
        matches!(
            self,
            Check::Coisotropic { .. } | Check::Mc { .. } | Check::Kuranishi { .. }
        )
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "check {}", self.kind())?;
        match self {
            Check::Coisotropic { name } | Check::Kuranishi { name } | Check::Jacobi { name } => {
                write!(f, " {name}")
            }
            Check::Mc { name, order } => {
                write!(f, " {name}")?;
                order.map_or(Ok(()), |n| write!(f, " {n}"))
            }
            Check::OmegaLe { name, k } => write!(f, " {name} {k}"),
            Check::Pencil { file, order } => {
                write!(f, " {file}")?;
                order.map_or(Ok(()), |n| write!(f, " {n}"))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Statement {
    Binding { name: String, expr: Expr, line: usize },
    Check { check: Check, line: usize },
}

/// A parsed scenario. Line numbers are kept for diagnostics but ignored
/// by equality.
#[derive(Clone, Debug, Default)]
pub struct Scenario {
    pub chart: Option<ChartDecl>,
    pub statements: Vec<Statement>,
}

impl PartialEq for Scenario {
    fn eq(&self, other: &Self) -> bool {
        fn strip(s: &Statement) -> (Option<(&str, &Expr)>, Option<&Check>) {
            match s {
                Statement::Binding { name, expr, .. } => (Some((name.as_str(), expr)), None),
                Statement::Check { check, .. } => (None, Some(check)),
            }
        }
        self.chart == other.chart
            && self.statements.len() == other.statements.len()
            && self
                .statements
                .iter()
                .zip(&other.statements)
                .all(|(a, b)| strip(a) == strip(b))
    }
}

impl Scenario {
    pub fn bindings(&self) -> impl Iterator<Item = (&str, &Expr)> {
        self.statements.iter().filter_map(|s| match s {
            Statement::Binding { name, expr, .. } => Some((name.as_str(), expr)),
            _ => None,
        })
    }

    pub fn checks(&self) -> impl Iterator<Item = &Check> {
        self.statements.iter().filter_map(|s| match s {
            Statement::Check { check, .. } => Some(check),
            _ => None,
        })
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(c) = &self.chart {
            writeln!(f, "{c}")?;
        }
        for s in &self.statements {
            match s {
                Statement::Binding { name, expr, .. } => writeln!(f, "{name} = {expr}")?,
                Statement::Check { check, .. } => writeln!(f, "{check}")?,
            }
        }
        Ok(())
    }
}
