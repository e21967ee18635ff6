//! Line-oriented tokenizer for scenario files.

use coiso_core::Rational;

use crate::error::ParseError;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    /// `@name`, a coordinate vector field.
    Field(String),
    Num(Rational),
    Plus,
    Minus,
    Star,
    Slash,
    Wedge,
    Caret,
    LParen,
    RParen,
    Comma,
    Eq,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Field(s) => format!("`@{s}`"),
            Tok::Num(r) => format!("number `{r}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Wedge => "`/\\`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Eq => "`=`".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

/// Strips a trailing `#` comment.
pub fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Tokenizes one line (1-based `line`). Numbers absorb a directly following
/// `/digits`, so `3/2` is a single rational literal; `3 / 2` is a division.
/// Exponents are always plain integers: `x^2/5` is `(x^2)/5`.
pub fn lex_line(text: &str, line: usize) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = strip_comment(text).chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        let push = |out: &mut Vec<Token>, tok| out.push(Token { tok, line, column });
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if is_ident_start(c) {
            let start = i;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            push(&mut out, Tok::Ident(chars[start..i].iter().collect()));
            continue;
        }
        if c == '@' {
            let start = i + 1;
            i += 1;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            if start == i || !is_ident_start(chars[start]) {
                return Err(ParseError::new(line, column, "expected a coordinate name after `@`"));
            }
            push(&mut out, Tok::Field(chars[start..i].iter().collect()));
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let exponent = matches!(
                out.as_slice(),
                [.., Token { tok: Tok::Caret, .. }]
                    | [.., Token { tok: Tok::Caret, .. }, Token { tok: Tok::Minus, .. }]
            );
            let (value, next) = if exponent {
                let end = digits(&chars, i);
                if end == i {
                    return Err(ParseError::new(line, column, "expected an integer exponent"));
                }
                let text: String = chars[i..end].iter().collect();
                let value = text
                    .parse::<Rational>()
                    .map_err(|_| ParseError::new(line, column, "malformed exponent"))?;
                (value, end)
            } else {
                lex_number(&chars, i, line)?
            };
            i = next;
            push(&mut out, Tok::Num(value));
            continue;
        }
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '=' => Tok::Eq,
            '/' if chars.get(i + 1) == Some(&'\\') => {
                i += 1;
                Tok::Wedge
            }
            '/' => Tok::Slash,
            other => {
                return Err(ParseError::new(line, column, format!("unexpected character `{other}`")));
            }
        };
        i += 1;
        push(&mut out, tok);
    }
    Ok(out)
}

fn digits(chars: &[char], mut i: usize) -> usize {
    while i < chars.len() && chars[i].is_ascii_digit() {
        i += 1;
    }
    i
}

fn lex_number(chars: &[char], start: usize, line: usize) -> Result<(Rational, usize), ParseError> {
    let mut i = digits(chars, start);
    let int_part: String = chars[start..i].iter().collect();
    if i < chars.len() && chars[i] == '.' {
        let frac_start = i + 1;
        i = digits(chars, frac_start);
        let frac: String = chars[frac_start..i].iter().collect();
        let numer = format!("{int_part}{frac}");
        let denom = format!("1{}", "0".repeat(frac.len()));
        let text = format!("{}/{denom}", if numer.is_empty() { "0" } else { &numer });
        let value = text
            .parse::<Rational>()
            .map_err(|_| ParseError::new(line, start + 1, "malformed decimal literal"))?;
        return Ok((value, i));
    }
    if i + 1 < chars.len() && chars[i] == '/' && chars[i + 1].is_ascii_digit() {
        let den_start = i + 1;
        let end = digits(chars, den_start);
        let den: String = chars[den_start..end].iter().collect();
        if den.trim_start_matches('0').is_empty() {
            return Err(ParseError::new(line, den_start + 1, "zero denominator"));
        }
        let value = format!("{int_part}/{den}")
            .parse::<Rational>()
            .map_err(|_| ParseError::new(line, start + 1, "malformed rational literal"))?;
        return Ok((value, end));
    }
    let value = int_part
        .parse::<Rational>()
        .map_err(|_| ParseError::new(line, start + 1, "malformed integer literal"))?;
    Ok((value, i))
}
