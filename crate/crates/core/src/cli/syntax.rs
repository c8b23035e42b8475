//! Block grammar of ring-spec files.
//!
//! ```text
//! tower T { kind=ramified; p=3; d=2; G=t1^2+t2^3; N=5; D=12; }
//! algebra A { vars=x,y; mod=3^6; cap=6; rel=x*y=0; }
//! check uniformizer U { tower=T; level=1; }
//! ```
//!
//! `#` starts a comment. Expression-valued fields are normalized on parse.

use std::fmt;

use crate::error::{Error, Result};
use crate::exactalg::text::parse_expr_at;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BlockKind {
    Tower,
    Algebra,
    Check(String),
}

#[derive(Debug, Clone)]
pub struct Field {
    pub key: String,
    pub value: String,
    pub line: usize,
    pub col: usize,
}

impl PartialEq for Field {
    fn eq(&self, o: &Self) -> bool {
        self.key == o.key && self.value == o.value
    }
}

#[derive(Debug, Clone)]
pub struct Block {
    pub kind: BlockKind,
    pub name: String,
    pub fields: Vec<Field>,
    pub line: usize,
    pub col: usize,
}

impl PartialEq for Block {
    fn eq(&self, o: &Self) -> bool {
        self.kind == o.kind && self.name == o.name && self.fields == o.fields
    }
}

impl Block {
    pub fn get(&self, key: &str) -> Option<&Field> {
        self.fields.iter().find(|f| f.key == key)
    }

    pub fn all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a Field> + 'a {
        self.fields.iter().filter(move |f| f.key == key)
    }

    pub fn error(&self, msg: impl Into<String>) -> Error {
        Error::Syntax { line: self.line, col: self.col, msg: msg.into() }
    }
}

impl Field {
    pub fn error(&self, msg: impl Into<String>) -> Error {
        Error::Syntax { line: self.line, col: self.col, msg: msg.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Document {
    pub blocks: Vec<Block>,
}

/// Fields holding polynomial expressions, possibly comma-separated lists or
/// `lhs=rhs` equations.
const EXPR_KEYS: &[&str] = &["G", "rel", "peq", "h", "c", "alpha", "sop", "transfer", "u"];

fn normalize_value(key: &str, value: &str, line: usize, col: usize) -> Result<String> {
    if !EXPR_KEYS.contains(&key) {
        if value.is_empty() {
            return Err(Error::Syntax { line, col, msg: format!("empty value for `{key}`") });
        }
        return Ok(value.split(',').map(str::trim).collect::<Vec<_>>().join(","));
    }
    let mut items = Vec::new();
    for item in value.split(',') {
        let mut sides = Vec::new();
        for side in item.split('=') {
            sides.push(parse_expr_at(side, line, col)?.to_string());
        }
        if sides.len() > 2 {
            return Err(Error::Syntax { line, col, msg: "more than one `=` in an equation".into() });
        }
        items.push(sides.join(" = "));
    }
    Ok(items.join(", "))
}

struct Scanner<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
    _src: &'a str,
}

impl<'a> Scanner<'a> {
    fn new(src: &'a str) -> Self {
        Scanner { chars: src.chars().collect(), pos: 0, line: 1, col: 1, _src: src }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c == '#' {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Syntax { line: self.line, col: self.col, msg: msg.into() }
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        self.skip_ws();
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || c == '_' || c == '-' {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        if s.is_empty() {
            return Err(self.err(format!("expected {what}")));
        }
        Ok(s)
    }

    fn expect(&mut self, c: char) -> Result<()> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`")))
        }
    }

    fn field(&mut self) -> Result<Field> {
        let key = self.ident("field name")?;
        self.expect('=')?;
        self.skip_ws();
        let (line, col) = (self.line, self.col);
        let mut raw = String::new();
        loop {
            match self.peek() {
                None => return Err(self.err("unterminated field, expected `;`")),
                Some(';') => {
                    self.bump();
                    break;
                }
                Some('{') | Some('}') => return Err(self.err("expected `;` after field value")),
                Some(c) => {
                    raw.push(c);
                    self.bump();
                }
            }
        }
        let value = normalize_value(&key, raw.trim(), line, col)?;
        Ok(Field { key, value, line, col })
    }

    fn block(&mut self) -> Result<Block> {
        let (line, col) = (self.line, self.col);
        let head = self.ident("block keyword")?;
        let kind = match head.as_str() {
            "tower" => BlockKind::Tower,
            "algebra" => BlockKind::Algebra,
            "check" => BlockKind::Check(self.ident("check kind")?),
            other => return Err(Error::Syntax { line, col, msg: format!("unknown block `{other}`") }),
        };
        let name = self.ident("block name")?;
        self.expect('{')?;
        let mut fields = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                Some('}') => {
                    self.bump();
                    break;
                }
                None => return Err(self.err("unterminated block, expected `}`")),
                _ => fields.push(self.field()?),
            }
        }
        Ok(Block { kind, name, fields, line, col })
    }
}

pub fn parse_document(src: &str) -> Result<Document> {
    let mut s = Scanner::new(src);
    let mut blocks = Vec::new();
    loop {
        s.skip_ws();
        if s.peek().is_none() {
            break;
        }
        blocks.push(s.block()?);
    }
    Ok(Document { blocks })
}

impl fmt::Display for Document {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            match &b.kind {
                BlockKind::Tower => write!(f, "tower {} {{", b.name)?,
                BlockKind::Algebra => write!(f, "algebra {} {{", b.name)?,
                BlockKind::Check(k) => write!(f, "check {k} {} {{", b.name)?,
            }
            writeln!(f)?;
            for fl in &b.fields {
                writeln!(f, "    {}={};", fl.key, fl.value)?;
            }
            writeln!(f, "}}")?;
        }
        Ok(())
    }
}
