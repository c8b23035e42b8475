//! Resolution of a parsed document into typed checks.

use std::collections::BTreeMap;
use std::str::FromStr;
use std::sync::Arc;

use super::syntax::{parse_document, Block, BlockKind, Document, Field};
use crate::error::{Error, Result};
use crate::exactalg::{AlgebraBuilder, Expr, TruncatedAlgebra};
use crate::towers::{TowerKind, TowerSpec};

pub const MAX_N: u32 = 4;
pub const PRIMES: [u64; 3] = [2, 3, 5];
pub const MAX_DIM: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub enum Ambient {
    Tower { name: String, level: u32 },
    Algebra { name: String },
}

#[derive(Debug, Clone, PartialEq)]
pub enum CheckSpec {
    WittIdentities { p: u64, n: u32, samples: usize },
    TowerFrobenius { tower: String, level: u32, degree: u32 },
    PBig { tower: String, level: u32 },
    Uniformizer { tower: String, level: u32 },
    WittPerfect { tower: String, level: u32 },
    ColonDefect { ambient: Ambient, sop: Vec<Expr>, i: usize, transfer: Vec<Expr>, expect: Option<String> },
    Modification { ambient: Ambient, sop: Vec<Expr>, steps: usize, n: u32, samples: usize },
    Lemma51 { ambient: Ambient, sop: Vec<Expr>, k: usize, u: Option<Vec<Expr>>, n: u32, c: Expr, e: u32, alpha: Expr },
    Split { algebra: String, h: Expr, sop: Vec<Expr>, k: u32, expect: Option<bool> },
    Etale { algebra: String, h: Expr, a: u32, expect: Option<bool> },
}

impl CheckSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            CheckSpec::WittIdentities { .. } => "witt-identities",
            CheckSpec::TowerFrobenius { .. } => "tower-frobenius",
            CheckSpec::PBig { .. } => "p-big",
            CheckSpec::Uniformizer { .. } => "uniformizer",
            CheckSpec::WittPerfect { .. } => "witt-perfect",
            CheckSpec::ColonDefect { .. } => "colon-defect",
            CheckSpec::Modification { .. } => "modification",
            CheckSpec::Lemma51 { .. } => "lemma51",
            CheckSpec::Split { .. } => "split",
            CheckSpec::Etale { .. } => "etale",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannedCheck {
    pub name: String,
    pub spec: CheckSpec,
}

#[derive(Debug, Clone, Default)]
pub struct CheckPlan {
    pub document: Document,
    pub towers: BTreeMap<String, TowerSpec>,
    pub algebras: BTreeMap<String, Arc<TruncatedAlgebra>>,
    pub checks: Vec<PlannedCheck>,
}

/// Parses and resolves a ring-spec file.
pub fn parse_ringspec(text: &str) -> Result<CheckPlan> {
    plan(parse_document(text)?)
}

fn num<T: FromStr>(f: &Field) -> Result<T> {
    f.value.parse().map_err(|_| f.error(format!("`{}` expects a non-negative integer, got `{}`", f.key, f.value)))
}

fn required<'a>(b: &'a Block, key: &str) -> Result<&'a Field> {
    b.get(key).ok_or_else(|| b.error(format!("missing field `{key}`")))
}

fn num_or<T: FromStr>(b: &Block, key: &str, default: T) -> Result<T> {
    b.get(key).map(num).unwrap_or(Ok(default))
}

fn exprs(f: &Field) -> Result<Vec<Expr>> {
    f.value.split(',').map(|s| Expr::parse(s.trim()).map_err(|e| f.error(e.to_string()))).collect()
}

fn expr(f: &Field) -> Result<Expr> {
    let mut v = exprs(f)?;
    if v.len() != 1 {
        return Err(f.error(format!("`{}` expects a single expression", f.key)));
    }
    Ok(v.pop().unwrap())
}

fn check_prime(f: &Field, p: u64) -> Result<u64> {
    if !PRIMES.contains(&p) {
        return Err(Error::CapExceeded(format!("p = {p} at {}:{} (supported: 2, 3, 5)", f.line, f.col)));
    }
    Ok(p)
}

fn check_n(f: &Field, n: u32) -> Result<u32> {
    if n > MAX_N {
        return Err(Error::CapExceeded(format!("{} = {n} at {}:{} exceeds {MAX_N}", f.key, f.line, f.col)));
    }
    Ok(n)
}

fn level(b: &Block, key: &str, default: u32) -> Result<u32> {
    match b.get(key) {
        Some(f) => check_n(f, num(f)?),
        None => Ok(default),
    }
}

fn expect_flag(b: &Block, yes: &str, no: &str) -> Result<Option<bool>> {
    match b.get("expect") {
        None => Ok(None),
        Some(f) if f.value == yes => Ok(Some(true)),
        Some(f) if f.value == no => Ok(Some(false)),
        Some(f) => Err(f.error(format!("`expect` must be `{yes}` or `{no}`"))),
    }
}

fn tower_spec(b: &Block) -> Result<TowerSpec> {
    let kf = required(b, "kind")?;
    let kind = TowerKind::from_str(&kf.value).map_err(|_| kf.error(format!("unknown tower kind `{}`", kf.value)))?;
    let pf = required(b, "p")?;
    let p = check_prime(pf, num(pf)?)?;
    let n = num(required(b, "N")?)?;
    let spec = match kind {
        TowerKind::Valuation => TowerSpec::valuation(p, n),
        TowerKind::Unramified => TowerSpec::unramified(p, num(required(b, "d")?)?, n, num(required(b, "D")?)?),
        TowerKind::Ramified => {
            let g = Some(expr(required(b, "G")?)?);
            TowerSpec { kind, p, d: num(required(b, "d")?)?, g, precision: n, degree_cap: num(required(b, "D")?)? }
        }
    };
    Ok(spec)
}

fn algebra(b: &Block) -> Result<Arc<TruncatedAlgebra>> {
    let mf = required(b, "mod")?;
    let (p, n) = mf
        .value
        .split_once('^')
        .and_then(|(p, n)| Some((p.trim().parse::<u64>().ok()?, n.trim().parse::<u32>().ok()?)))
        .ok_or_else(|| mf.error("`mod` expects `p^N`"))?;
    check_prime(mf, p)?;
    let mut builder =
        AlgebraBuilder::new(p).precision(n).degree_cap(num_or(b, "cap", 0)?).level(level(b, "level", 0)?);
    if let Some(f) = b.get("vars") {
        let names: Vec<&str> = f.value.split(',').collect();
        builder = builder.vars(&names);
    }
    for f in b.all("rel") {
        for item in f.value.split(',') {
            let (lhs, rhs) = item.split_once('=').unwrap_or((item, "0"));
            let side = |s: &str| Expr::parse(s.trim()).map_err(|e| f.error(e.to_string()));
            builder = builder.relation_expr(side(lhs)?, side(rhs)?);
        }
    }
    if let Some(f) = b.get("peq") {
        builder = builder.p_equals_expr(expr(f)?);
    }
    let alg = builder.build().map_err(|e| b.error(e.to_string()))?;
    let dim = alg.dimension()?;
    if dim > MAX_DIM {
        return Err(Error::CapExceeded(format!("algebra `{}` has {dim} basis elements (cap {MAX_DIM})", b.name)));
    }
    Ok(alg)
}

struct Scope<'a> {
    towers: &'a BTreeMap<String, TowerSpec>,
    algebras: &'a BTreeMap<String, Arc<TruncatedAlgebra>>,
}

impl Scope<'_> {
    fn tower(&self, b: &Block) -> Result<String> {
        let f = required(b, "tower")?;
        if !self.towers.contains_key(&f.value) {
            return Err(Error::UnknownReference { name: f.value.clone(), line: f.line, col: f.col });
        }
        Ok(f.value.clone())
    }

    fn algebra(&self, b: &Block) -> Result<String> {
        let f = required(b, "algebra")?;
        if !self.algebras.contains_key(&f.value) {
            return Err(Error::UnknownReference { name: f.value.clone(), line: f.line, col: f.col });
        }
        Ok(f.value.clone())
    }

    fn ambient(&self, b: &Block) -> Result<Ambient> {
        if b.get("tower").is_some() {
            Ok(Ambient::Tower { name: self.tower(b)?, level: level(b, "level", 1)? })
        } else if b.get("algebra").is_some() {
            Ok(Ambient::Algebra { name: self.algebra(b)? })
        } else {
            Err(b.error("expected `tower` or `algebra`"))
        }
    }
}

fn check_spec(kind: &str, b: &Block, scope: &Scope) -> Result<CheckSpec> {
    Ok(match kind {
        "witt-identities" => {
            let pf = required(b, "p")?;
            CheckSpec::WittIdentities {
                p: check_prime(pf, num(pf)?)?,
                n: level(b, "n", 2)?,
                samples: num_or(b, "samples", 100)?,
            }
        }
        "tower-frobenius" => CheckSpec::TowerFrobenius {
            tower: scope.tower(b)?,
            level: level(b, "level", 0)?,
            degree: num_or(b, "degree", 6)?,
        },
        "p-big" => CheckSpec::PBig { tower: scope.tower(b)?, level: level(b, "level", 1)? },
        "uniformizer" => CheckSpec::Uniformizer { tower: scope.tower(b)?, level: level(b, "level", 1)? },
        "witt-perfect" => CheckSpec::WittPerfect { tower: scope.tower(b)?, level: level(b, "level", 1)? },
        "colon-defect" => CheckSpec::ColonDefect {
            ambient: scope.ambient(b)?,
            sop: exprs(required(b, "sop")?)?,
            i: num_or(b, "i", 1)?,
            transfer: b.get("transfer").map(exprs).transpose()?.unwrap_or_default(),
            expect: b.get("expect").map(|f| f.value.clone()),
        },
        "modification" => CheckSpec::Modification {
            ambient: scope.ambient(b)?,
            sop: exprs(required(b, "sop")?)?,
            steps: num_or(b, "steps", 2)?,
            n: num_or(b, "n", 1)?,
            samples: num_or(b, "samples", 10)?,
        },
        "lemma51" => CheckSpec::Lemma51 {
            ambient: scope.ambient(b)?,
            sop: exprs(required(b, "sop")?)?,
            k: num_or(b, "k", 1)?,
            u: b.get("u").map(exprs).transpose()?,
            n: num_or(b, "n", 1)?,
            c: expr(required(b, "c")?)?,
            e: num_or(b, "e", 1)?,
            alpha: expr(required(b, "alpha")?)?,
        },
        "split" => CheckSpec::Split {
            algebra: scope.algebra(b)?,
            h: expr(required(b, "h")?)?,
            sop: exprs(required(b, "sop")?)?,
            k: num_or(b, "k", 3)?,
            expect: expect_flag(b, "member", "non-member")?,
        },
        "etale" => CheckSpec::Etale {
            algebra: scope.algebra(b)?,
            h: expr(required(b, "h")?)?,
            a: num_or(b, "a", 4)?,
            expect: expect_flag(b, "etale", "not-etale")?,
        },
        other => return Err(b.error(format!("unknown check kind `{other}`"))),
    })
}

/// Resolves references in declaration order and enforces the caps.
pub fn plan(document: Document) -> Result<CheckPlan> {
    let mut towers = BTreeMap::new();
    let mut algebras = BTreeMap::new();
    let mut checks = Vec::new();
    for b in &document.blocks {
        match &b.kind {
            BlockKind::Tower => {
                towers.insert(b.name.clone(), tower_spec(b)?);
            }
            BlockKind::Algebra => {
                algebras.insert(b.name.clone(), algebra(b)?);
            }
            BlockKind::Check(kind) => {
                let scope = Scope { towers: &towers, algebras: &algebras };
                checks.push(PlannedCheck { name: b.name.clone(), spec: check_spec(kind, b, &scope)? });
            }
        }
    }
    Ok(CheckPlan { document, towers, algebras, checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_plan() {
        let p = parse_ringspec("").unwrap();
        assert!(p.checks.is_empty() && p.towers.is_empty());
    }

    #[test]
    fn tower_declaration() {
        let p = parse_ringspec("tower T { kind=ramified; p=3; d=2; G=t1^2+t2^3; N=5; D=12; }").unwrap();
        assert_eq!(p.towers.len(), 1);
        assert_eq!(p.towers["T"], TowerSpec::ramified(3, 2, "t1^2+t2^3", 5, 12).unwrap());
    }

    #[test]
    fn undeclared_tower() {
        let r = parse_ringspec("check uniformizer U { tower=T; level=1; }");
        assert!(matches!(r, Err(Error::UnknownReference { ref name, .. }) if name == "T"));
        // declared after use
        let r = parse_ringspec("check uniformizer U { tower=T; }\ntower T { kind=valuation; p=2; N=3; }");
        assert!(matches!(r, Err(Error::UnknownReference { .. })));
    }

    #[test]
    fn caps() {
        assert!(matches!(parse_ringspec("check witt-identities W { p=2; n=5; }"), Err(Error::CapExceeded(_))));
        assert!(matches!(parse_ringspec("check witt-identities W { p=7; n=1; }"), Err(Error::CapExceeded(_))));
        assert!(matches!(
            parse_ringspec("algebra A { vars=a,b,c,d,e,f; mod=5^4; cap=12; }"),
            Err(Error::CapExceeded(_))
        ));
    }

    #[test]
    fn algebra_block() {
        let p = parse_ringspec("algebra A { vars=x,y; mod=2^3; cap=2; rel=x*y=0; }").unwrap();
        let a = &p.algebras["A"];
        assert_eq!(a.truncation(), (3, 0, 2));
        assert!(a.parse("x*y").unwrap().is_zero());
    }
}
