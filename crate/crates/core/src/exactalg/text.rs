//! Polynomial expressions with fractional exponents, and the canonical text
//! form `c*x1^(a/p^n)*x2 + ...` used for serialization.
//!
//! Grammar (whitespace insensitive):
//!
//! ```text
//! expr   := ['-'] term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := '-' factor | atom ['^' power]
//! power  := INT | '(' ['-'] INT ['/' den] ')'
//! den    := INT | 'p' ['^' INT] | INT '^' INT
//! atom   := INT | IDENT | '(' expr ')'
//! ```
//!
//! The identifier `p` always denotes the prime. Fractional powers are only
//! allowed on variables.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::exactalg::monomial::Monomial;

/// Exponent denominator as written in the source: a literal integer or `p^k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Den {
    Int(u64),
    PPow(u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Int(i128),
    Var(String),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, u32),
    /// `var^(num/den)`
    FracPow(String, u64, Den),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        parse_expr_at(src, 1, 1)
    }

    fn prec(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Neg(..) => 2,
            Expr::Mul(..) => 3,
            Expr::Pow(..) | Expr::FracPow(..) => 4,
            Expr::Int(v) if *v < 0 => 2,
            Expr::Int(_) | Expr::Var(_) => 5,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn wrap(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
            if e.prec() < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Expr::Int(v) => write!(f, "{v}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Add(a, b) => {
                wrap(f, a, 1)?;
                write!(f, " + ")?;
                wrap(f, b, 2)
            }
            Expr::Sub(a, b) => {
                wrap(f, a, 1)?;
                write!(f, " - ")?;
                wrap(f, b, 2)
            }
            Expr::Mul(a, b) => {
                wrap(f, a, 3)?;
                write!(f, "*")?;
                wrap(f, b, 4)
            }
            Expr::Neg(a) => {
                write!(f, "-")?;
                wrap(f, a, 4)
            }
            Expr::Pow(a, e) => {
                wrap(f, a, 5)?;
                write!(f, "^{e}")
            }
            Expr::FracPow(v, num, den) => match den {
                Den::Int(d) => write!(f, "{v}^({num}/{d})"),
                Den::PPow(k) => write!(f, "{v}^({num}/p^{k})"),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(i128),
    Ident(String),
    Sym(char),
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    src: &'a str,
    line0: usize,
    col0: usize,
}

fn locate(src: &str, offset: usize, line0: usize, col0: usize) -> (usize, usize) {
    let mut line = line0;
    let mut col = col0;
    for ch in src[..offset.min(src.len())].chars() {
        if ch == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    (line, col)
}

impl<'a> Lexer<'a> {
    fn tokens(mut self) -> Result<Vec<(Tok, usize)>> {
        let mut out = Vec::new();
        while let Some(&(i, ch)) = self.chars.peek() {
            if ch.is_whitespace() {
                self.chars.next();
            } else if ch.is_ascii_digit() {
                let mut end = i;
                while let Some(&(j, c)) = self.chars.peek() {
                    if c.is_ascii_digit() {
                        end = j + c.len_utf8();
                        self.chars.next();
                    } else {
                        break;
                    }
                }
                let v = self.src[i..end].parse::<i128>().map_err(|_| self.err(i, "integer literal too large"))?;
                out.push((Tok::Int(v), i));
            } else if ch.is_alphabetic() || ch == '_' {
                let mut end = i;
                while let Some(&(j, c)) = self.chars.peek() {
                    if c.is_alphanumeric() || c == '_' {
                        end = j + c.len_utf8();
                        self.chars.next();
                    } else {
                        break;
                    }
                }
                out.push((Tok::Ident(self.src[i..end].to_string()), i));
            } else if "+-*^()/".contains(ch) {
                self.chars.next();
                out.push((Tok::Sym(ch), i));
            } else {
                return Err(self.err(i, &format!("unexpected character `{ch}`")));
            }
        }
        Ok(out)
    }

    fn err(&self, offset: usize, msg: &str) -> Error {
        let (line, col) = locate(self.src, offset, self.line0, self.col0);
        Error::Syntax { line, col, msg: msg.to_string() }
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    src: &'a str,
    line0: usize,
    col0: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> Error {
        let offset = self.toks.get(self.pos).map(|t| t.1).unwrap_or(self.src.len());
        let (line, col) = locate(self.src, offset, self.line0, self.col0);
        Error::Syntax { line, col, msg: msg.to_string() }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{c}`")))
        }
    }

    fn int(&mut self) -> Result<i128> {
        match self.peek() {
            Some(Tok::Int(v)) => {
                let v = *v;
                self.pos += 1;
                Ok(v)
            }
            _ => Err(self.err("expected integer")),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = if self.eat('-') { Expr::Neg(Box::new(self.term()?)) } else { self.term()? };
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        while self.eat('*') {
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let atom = self.atom()?;
        if !self.eat('^') {
            return Ok(atom);
        }
        if self.eat('(') {
            let num = self.int()?;
            if self.eat(')') {
                return Ok(Expr::Pow(Box::new(atom), to_u32(num).ok_or_else(|| self.err("exponent out of range"))?));
            }
            self.expect('/')?;
            let den = match self.peek() {
                Some(Tok::Ident(s)) if s == "p" => {
                    self.pos += 1;
                    if self.eat('^') {
                        let k = self.int()?;
                        Den::PPow(to_u32(k).ok_or_else(|| self.err("exponent out of range"))?)
                    } else {
                        Den::PPow(1)
                    }
                }
                Some(Tok::Int(_)) => {
                    let base = self.int()?;
                    let d = if self.eat('^') {
                        let k = to_u32(self.int()?).ok_or_else(|| self.err("exponent out of range"))?;
                        u64::try_from(base).ok().and_then(|b| b.checked_pow(k))
                    } else {
                        u64::try_from(base).ok()
                    };
                    Den::Int(d.filter(|d| *d > 0).ok_or_else(|| self.err("bad denominator"))?)
                }
                _ => return Err(self.err("expected denominator")),
            };
            self.expect(')')?;
            let num = u64::try_from(num).map_err(|_| self.err("negative exponent"))?;
            match atom {
                Expr::Var(v) if v != "p" => Ok(Expr::FracPow(v, num, den)),
                _ => Err(self.err("fractional exponent on a non-variable")),
            }
        } else {
            let e = self.int()?;
            Ok(Expr::Pow(Box::new(atom), to_u32(e).ok_or_else(|| self.err("exponent out of range"))?))
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Tok::Int(v)) => {
                self.pos += 1;
                Ok(Expr::Int(v))
            }
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(Expr::Var(s))
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            _ => Err(self.err("expected operand")),
        }
    }
}

fn to_u32(v: i128) -> Option<u32> {
    u32::try_from(v).ok()
}

/// Parses an expression whose first character sits at `line:col` of an
/// enclosing document (used for error positions).
pub fn parse_expr_at(src: &str, line: usize, col: usize) -> Result<Expr> {
    let toks = Lexer { chars: src.char_indices().peekable(), src, line0: line, col0: col }.tokens()?;
    if toks.is_empty() {
        let (line, col) = locate(src, src.len(), line, col);
        return Err(Error::Syntax { line, col, msg: "empty expression".into() });
    }
    let mut parser = Parser { toks, pos: 0, src, line0: line, col0: col };
    let e = parser.expr()?;
    if parser.pos != parser.toks.len() {
        return Err(parser.err("trailing input"));
    }
    Ok(e)
}

/// Raw polynomial: scaled monomials with unreduced integer coefficients.
pub type RawTerms = HashMap<Monomial, i128>;

/// Expands an expression into raw terms over `vars`, scaling every exponent by
/// `p^level`. No relations are applied.
pub fn expand(expr: &Expr, vars: &[String], p: u64, level: u32) -> Result<RawTerms> {
    let scale = (p as u128).pow(level);
    let nv = vars.len();
    let var_index = |name: &str| -> Result<usize> {
        vars.iter().position(|v| v == name).ok_or_else(|| Error::InvalidAlgebra(format!("unknown variable `{name}`")))
    };
    let constant = |c: i128| -> RawTerms {
        let mut t = RawTerms::new();
        if c != 0 {
            t.insert(Monomial::from_elem(0, nv), c);
        }
        t
    };
    Ok(match expr {
        Expr::Int(v) => constant(*v),
        Expr::Var(name) if name == "p" => constant(p as i128),
        Expr::Var(name) => {
            let i = var_index(name)?;
            let mut m = Monomial::from_elem(0, nv);
            m[i] = scale as u32;
            let mut t = RawTerms::new();
            t.insert(m, 1);
            t
        }
        Expr::FracPow(name, num, den) => {
            let i = var_index(name)?;
            let den = match den {
                Den::Int(d) => *d as u128,
                Den::PPow(k) => (p as u128).checked_pow(*k).ok_or(Error::Overflow)?,
            };
            let scaled = (*num as u128) * scale;
            if scaled % den != 0 {
                return Err(Error::ExponentLevelMismatch { level });
            }
            let mut m = Monomial::from_elem(0, nv);
            m[i] = u32::try_from(scaled / den).map_err(|_| Error::Overflow)?;
            let mut t = RawTerms::new();
            t.insert(m, 1);
            t
        }
        Expr::Add(a, b) => raw_add(expand(a, vars, p, level)?, &expand(b, vars, p, level)?, 1)?,
        Expr::Sub(a, b) => raw_add(expand(a, vars, p, level)?, &expand(b, vars, p, level)?, -1)?,
        Expr::Neg(a) => raw_add(RawTerms::new(), &expand(a, vars, p, level)?, -1)?,
        Expr::Mul(a, b) => raw_mul(&expand(a, vars, p, level)?, &expand(b, vars, p, level)?)?,
        Expr::Pow(a, e) => {
            let base = expand(a, vars, p, level)?;
            let mut acc = constant(1);
            for _ in 0..*e {
                acc = raw_mul(&acc, &base)?;
            }
            acc
        }
    })
}

fn raw_add(mut a: RawTerms, b: &RawTerms, sign: i128) -> Result<RawTerms> {
    for (m, c) in b {
        let e = a.entry(m.clone()).or_insert(0);
        *e = c.checked_mul(sign).and_then(|v| e.checked_add(v)).ok_or(Error::Overflow)?;
    }
    a.retain(|_, c| *c != 0);
    Ok(a)
}

fn raw_mul(a: &RawTerms, b: &RawTerms) -> Result<RawTerms> {
    let mut out = RawTerms::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            let m: Monomial = ma.iter().zip(mb.iter()).map(|(x, y)| x + y).collect();
            let e = out.entry(m).or_insert(0);
            *e = ca.checked_mul(*cb).and_then(|v| e.checked_add(v)).ok_or(Error::Overflow)?;
        }
    }
    out.retain(|_, c| *c != 0);
    Ok(out)
}

/// Writes one exponent in canonical form: integer, or `(a/p^k)` in lowest terms.
pub fn format_exponent(scaled: u32, p: u64, level: u32) -> String {
    let mut num = scaled as u64;
    let mut k = level;
    while k > 0 && num % p == 0 {
        num /= p;
        k -= 1;
    }
    if k == 0 {
        format!("{num}")
    } else {
        format!("({num}/p^{k})")
    }
}
