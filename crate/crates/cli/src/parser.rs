//! Scenario parser.
//!
//! ```text
//! scenario := line*
//! line     := chart | binding | check | comment | blank
//! chart    := "chart" "base=(" names ")" "fibre=(" names ")" ["domain=" rational]
//! binding  := name "=" expr
//! check    := "check" kind args
//! expr     := product (("+" | "-") product)*
//! product  := wedge (("*" | "/") wedge)*
//! wedge    := unary ("/\" unary)*
//! unary    := "-" unary | power
//! power    := atom ["^" ["-"] integer]
//! atom     := number | "pi" | "I" | name | "@" name | call | "(" expr ("," expr)* [","] ")"
//! ```

use std::collections::HashSet;

use coiso_core::Rational;

use crate::ast::{ChartDecl, Check, Expr, Scenario, Statement};
use crate::error::ParseError;
use crate::lexer::{lex_line, strip_comment, Tok, Token};

const RESERVED: &[&str] = &["chart", "check", "pi", "I", "sin", "cos", "inv_form", "gotay", "d"];
const FUNCTIONS: &[&str] = &["sin", "cos", "inv_form", "gotay"];

/// Names known at a given line of the scenario.
struct Scope {
    chart: Option<ChartDecl>,
    bindings: HashSet<String>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum NameKind {
    Binding,
    Coordinate { periodic: bool, base: bool },
    Differential,
}

impl Scope {
    fn coordinate(&self, name: &str) -> Option<(bool, bool)> {
        let chart = self.chart.as_ref()?;
        if let Some((_, p)) = chart.base.iter().find(|(n, _)| n == name) {
            return Some((*p, true));
        }
        chart.fibre.iter().any(|n| n == name).then_some((false, false))
    }

    fn classify(&self, name: &str) -> Option<NameKind> {
        if self.bindings.contains(name) && name != "pi" {
            return Some(NameKind::Binding);
        }
        if let Some((periodic, base)) = self.coordinate(name) {
            return Some(NameKind::Coordinate { periodic, base });
        }
        name.strip_prefix('d')
            .and_then(|rest| self.coordinate(rest))
            .map(|_| NameKind::Differential)
    }
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ParseError> {
    let mut scope = Scope {
        chart: None,
        bindings: HashSet::new(),
    };
    let mut scenario = Scenario::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = strip_comment(raw);
        let trimmed = body.trim_start();
        if trimmed.trim().is_empty() {
            continue;
        }
        let first = trimmed.split(|c: char| !(c.is_ascii_alphanumeric() || c == '_')).next().unwrap_or("");
        match first {
            "chart" => {
                if scope.chart.is_some() {
                    let col = body.len() - trimmed.len() + 1;
                    return Err(ParseError::new(line, col, "a scenario declares a single chart"));
                }
                let decl = parse_chart(&lex_line(raw, line)?, line, raw)?;
                scope.chart = Some(decl.clone());
                scenario.chart = Some(decl);
            }
            "check" => {
                let check = parse_check(body, line, &scope)?;
                scenario.statements.push(Statement::Check { check, line });
            }
            _ => {
                let (name, expr) = parse_binding(&lex_line(raw, line)?, line, raw, &scope)?;
                scope.bindings.insert(name.clone());
                scenario.statements.push(Statement::Binding { name, expr, line });
            }
        }
    }
    Ok(scenario)
}

fn end_column(raw: &str) -> usize {
    strip_comment(raw).trim_end().chars().count() + 1
}

struct Cursor<'a> {
    toks: &'a [Token],
    pos: usize,
    line: usize,
    eol: usize,
}

impl<'a> Cursor<'a> {
    fn new(toks: &'a [Token], line: usize, raw: &str) -> Self {
        Cursor {
            toks,
            pos: 0,
            line,
            eol: end_column(raw),
        }
    }

    fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn column(&self) -> usize {
        self.toks.get(self.pos).map_or(self.eol, |t| t.column)
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::new(self.line, self.column(), message)
    }

    fn next(&mut self) -> Option<&'a Token> {
        let t = self.toks.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &Tok) -> Result<(), ParseError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        match self.peek() {
            Some(t) => self.error(format!("expected {wanted}, found {}", t.describe())),
            None => self.error(format!("expected {wanted}, found end of line")),
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, usize), ParseError> {
        let column = self.column();
        match self.peek() {
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok((s.clone(), column))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.unexpected(&format!("`{kw}`"))),
        }
    }

    fn finish(&self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(t) => Err(self.error(format!("unexpected {}", t.describe()))),
        }
    }
}

fn parse_chart(toks: &[Token], line: usize, raw: &str) -> Result<ChartDecl, ParseError> {
    let mut c = Cursor::new(toks, line, raw);
    c.keyword("chart")?;
    c.keyword("base")?;
    c.expect(&Tok::Eq)?;
    c.expect(&Tok::LParen)?;
    let mut base = Vec::new();
    let mut seen = HashSet::new();
    let mut declare = |name: &str, col: usize| -> Result<(), ParseError> {
        if RESERVED.contains(&name) {
            return Err(ParseError::new(line, col, format!("`{name}` is reserved")));
        }
        if !seen.insert(name.to_string()) {
            return Err(ParseError::new(line, col, format!("duplicate coordinate `{name}`")));
        }
        Ok(())
    };
    if !c.eat(&Tok::RParen) {
        loop {
            let (name, col) = c.ident("a coordinate name")?;
            declare(&name, col)?;
            let periodic = c.eat(&Tok::Star);
            base.push((name, periodic));
            if c.eat(&Tok::RParen) {
                break;
            }
            c.expect(&Tok::Comma)?;
        }
    }
    c.keyword("fibre")?;
    c.expect(&Tok::Eq)?;
    c.expect(&Tok::LParen)?;
    let mut fibre = Vec::new();
    loop {
        let (name, col) = c.ident("a fibre coordinate name")?;
        declare(&name, col)?;
        fibre.push(name);
        if c.eat(&Tok::RParen) {
            break;
        }
        c.expect(&Tok::Comma)?;
    }
    let mut domain = None;
    if c.peek().is_some() {
        c.keyword("domain")?;
        c.expect(&Tok::Eq)?;
        let col = c.column();
        match c.next().map(|t| &t.tok) {
            Some(Tok::Num(r)) if *r > Rational::from_integer(0.into()) => domain = Some(r.clone()),
            _ => return Err(ParseError::new(line, col, "domain bound must be a positive rational")),
        }
    }
    c.finish()?;
    let all: Vec<&str> = base.iter().map(|(n, _)| n.as_str()).chain(fibre.iter().map(String::as_str)).collect();
    for n in &all {
        if let Some(rest) = n.strip_prefix('d') {
            if all.contains(&rest) {
                return Err(ParseError::new(
                    line,
                    1,
                    format!("coordinate `{n}` clashes with the differential of `{rest}`"),
                ));
            }
        }
    }
    Ok(ChartDecl { base, fibre, domain })
}

fn parse_binding(toks: &[Token], line: usize, raw: &str, scope: &Scope) -> Result<(String, Expr), ParseError> {
    let mut c = Cursor::new(toks, line, raw);
    let (name, col) = c.ident("a binding name, `chart` or `check`")?;
    c.expect(&Tok::Eq)?;
    if scope.chart.is_none() {
        return Err(ParseError::new(line, col, "bindings need a preceding `chart` line"));
    }
    if name != "pi" && RESERVED.contains(&name.as_str()) {
        return Err(ParseError::new(line, col, format!("`{name}` is reserved")));
    }
    if scope.bindings.contains(&name) {
        return Err(ParseError::new(line, col, format!("`{name}` is already defined")));
    }
    if scope.classify(&name).is_some() {
        return Err(ParseError::new(line, col, format!("`{name}` names a coordinate or differential")));
    }
    let mut p = ExprParser {
        c,
        scope,
        trig_depth: 0,
    };
    let expr = p.expr()?;
    p.c.finish()?;
    Ok((name, expr))
}

struct ExprParser<'a> {
    c: Cursor<'a>,
    scope: &'a Scope,
    trig_depth: usize,
}

impl ExprParser<'_> {
    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        loop {
            if self.c.eat(&Tok::Plus) {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.product()?));
            } else if self.c.eat(&Tok::Minus) {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.product()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.wedge()?;
        loop {
            if self.c.eat(&Tok::Star) {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.wedge()?));
            } else if self.c.eat(&Tok::Slash) {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.wedge()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn wedge(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while self.c.eat(&Tok::Wedge) {
            lhs = Expr::Wedge(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.c.eat(&Tok::Minus) {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if !self.c.eat(&Tok::Caret) {
            return Ok(base);
        }
        let negative = self.c.eat(&Tok::Minus);
        let col = self.c.column();
        let n = match self.c.next().map(|t| &t.tok) {
            Some(Tok::Num(r)) if r.is_integer() => r
                .numer()
                .to_string()
                .parse::<i64>()
                .map_err(|_| ParseError::new(self.c.line, col, "exponent is too large"))?,
            _ => return Err(ParseError::new(self.c.line, col, "expected an integer exponent")),
        };
        Ok(Expr::Pow(Box::new(base), if negative { -n } else { n }))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let col = self.c.column();
        let line = self.c.line;
        let Some(tok) = self.c.next() else {
            return Err(self.c.unexpected("an expression"));
        };
        match &tok.tok {
            Tok::Num(r) => Ok(Expr::Num(r.clone())),
            Tok::Field(name) => match self.scope.coordinate(name) {
                Some(_) => Ok(Expr::Field(name.clone())),
                None => Err(ParseError::new(line, col, format!("unknown coordinate `{name}` in `@{name}`"))),
            },
            Tok::LParen => {
                let first = self.expr()?;
                if self.c.eat(&Tok::RParen) {
                    return Ok(first);
                }
                let mut items = vec![first];
                while self.c.eat(&Tok::Comma) {
                    if self.c.peek() == Some(&Tok::RParen) {
                        break;
                    }
                    items.push(self.expr()?);
                }
                self.c.expect(&Tok::RParen)?;
                Ok(Expr::Tuple(items))
            }
            Tok::Ident(name) => {
                if self.c.peek() == Some(&Tok::LParen) {
                    return self.call(name, col);
                }
                match name.as_str() {
                    "pi" => return Ok(Expr::Pi),
                    "I" => return Ok(Expr::I),
                    _ => {}
                }
                if FUNCTIONS.contains(&name.as_str()) {
                    return Err(ParseError::new(line, col, format!("`{name}` needs an argument list")));
                }
                match self.scope.classify(name) {
                    None => Err(ParseError::new(line, col, format!("undefined name `{name}`"))),
                    Some(NameKind::Coordinate { periodic: true, .. }) if self.trig_depth == 0 => Err(ParseError::new(
                        line,
                        col,
                        format!("periodic coordinate `{name}` can only appear inside sin/cos"),
                    )),
                    Some(_) => Ok(Expr::Ident(name.clone())),
                }
            }
            other => Err(ParseError::new(line, col, format!("unexpected {}", other.describe()))),
        }
    }

    fn call(&mut self, name: &str, col: usize) -> Result<Expr, ParseError> {
        let line = self.c.line;
        self.c.expect(&Tok::LParen)?;
        let args = match name {
            "sin" | "cos" => {
                self.trig_depth += 1;
                let arg = self.expr();
                self.trig_depth -= 1;
                vec![arg?]
            }
            "inv_form" => vec![self.expr()?],
            "gotay" => {
                let mut args = vec![self.expr()?];
                while self.c.eat(&Tok::Comma) {
                    let (q, qcol) = self.c.ident("a base coordinate name")?;
                    match self.scope.classify(&q) {
                        Some(NameKind::Coordinate { base: true, .. }) => args.push(Expr::Ident(q)),
                        _ => {
                            return Err(ParseError::new(line, qcol, format!("`{q}` is not a base coordinate")));
                        }
                    }
                }
                args
            }
            _ => return Err(ParseError::new(line, col, format!("unknown function `{name}`"))),
        };
        self.c.expect(&Tok::RParen)?;
        Ok(Expr::Call(name.to_string(), args))
    }
}

/// Splits a line into whitespace-separated words with 1-based columns.
fn words(body: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in body.char_indices() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((s, &body[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, &body[s..]));
    }
    out.into_iter()
        .map(|(byte, w)| (body[..byte].chars().count() + 1, w))
        .collect()
}

fn parse_check(body: &str, line: usize, scope: &Scope) -> Result<Check, ParseError> {
    let w = words(body);
    let eol = body.trim_end().chars().count() + 1;
    let at = |i: usize| w.get(i).map_or(eol, |(c, _)| *c);
    let err = |i: usize, m: String| ParseError::new(line, at(i), m);
    let Some(&(_, kind)) = w.get(1) else {
        return Err(err(1, "expected a check kind".into()));
    };
    let name = |i: usize| -> Result<String, ParseError> {
        match w.get(i) {
            None => Err(err(i, format!("`check {kind}` expects a name"))),
            Some(&(_, n)) if scope.bindings.contains(n) => Ok(n.to_string()),
            Some(&(_, n)) => Err(err(i, format!("undefined name `{n}`"))),
        }
    };
    let number = |i: usize, what: &str, min: u32| -> Result<u32, ParseError> {
        let (_, s) = w[i];
        s.parse::<u32>()
            .ok()
            .filter(|&n| n >= min)
            .ok_or_else(|| err(i, format!("expected {what}, found `{s}`")))
    };
    let optional = |i: usize, what: &str| -> Result<Option<u32>, ParseError> {
        if i < w.len() {
            number(i, what, 1).map(Some)
        } else {
            Ok(None)
        }
    };
    let (check, used) = match kind {
        "coisotropic" => (Check::Coisotropic { name: name(2)? }, 3),
        "kuranishi" => (Check::Kuranishi { name: name(2)? }, 3),
        "jacobi" => (Check::Jacobi { name: name(2)? }, 3),
        "mc" => {
            let name = name(2)?;
            let order = optional(3, "a positive order")?;
            (Check::Mc { name, order }, 3 + order.is_some() as usize)
        }
        "omega_le" => {
            let name = name(2)?;
            if w.len() < 4 {
                return Err(err(3, "`check omega_le` expects a degree".into()));
            }
            let k = number(3, "a non-negative degree", 0)?;
            (Check::OmegaLe { name, k }, 4)
        }
        "pencil" => {
            let Some(&(_, file)) = w.get(2) else {
                return Err(err(2, "`check pencil` expects a file".into()));
            };
            let order = optional(3, "a positive order")?;
            (
                Check::Pencil {
                    file: file.to_string(),
                    order,
                },
                3 + order.is_some() as usize,
            )
        }
        other => return Err(err(1, format!("unknown check `{other}`"))),
    };
    if w.len() > used {
        return Err(err(used, format!("unexpected `{}`", w[used].1)));
    }
    if check.needs_pi() && !scope.bindings.contains("pi") {
        return Err(err(1, format!("`check {kind}` needs a Poisson bivector bound to `pi`")));
    }
    Ok(check)
}
