//! Finite levels of the perfectoid towers `V_{p^∞}` and `R_{p^∞}`.
//!
//! Level `n` allows exponents in `(1/p^n) Z`. Valuation and unramified
//! towers adjoin `π_n = p^(1/p^n)` as the variable `pi` (with `pi = p`);
//! ramified towers present `Z_p[[t_1..t_d]]/(p - G)` with `p` rewritten to
//! `G`.

mod perfect;
mod uniformizer;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exactalg::text::{expand, Expr};
use crate::exactalg::{
    solve_columns, AlgebraBuilder, LiftPoly, Monomial, PolyElement, TruncatedAlgebra,
};

pub use perfect::{witt_perfect_criterion, WittPerfectWitness};
pub use uniformizer::{auto_decomposition, p_big_sequence, ramified_uniformizer, PBigWitness, Uniformizer};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TowerKind {
    Valuation,
    Unramified,
    Ramified,
}

impl TowerKind {
    pub fn name(self) -> &'static str {
        match self {
            TowerKind::Valuation => "valuation",
            TowerKind::Unramified => "unramified",
            TowerKind::Ramified => "ramified",
        }
    }
}

impl std::str::FromStr for TowerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "valuation" => Ok(TowerKind::Valuation),
            "unramified" => Ok(TowerKind::Unramified),
            "ramified" => Ok(TowerKind::Ramified),
            other => Err(Error::InvalidSpec(format!("unknown tower kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TowerSpec {
    pub kind: TowerKind,
    pub p: u64,
    /// Dimension: number of `t_i` (ramified) or `1 + #x_i` (unramified).
    pub d: usize,
    pub g: Option<Expr>,
    /// Requested p-adic precision. Ramified levels derive their precision
    /// from `D` instead (see [`TruncatedAlgebra`]).
    pub precision: u32,
    pub degree_cap: u32,
}

impl TowerSpec {
    pub fn valuation(p: u64, precision: u32) -> Self {
        TowerSpec { kind: TowerKind::Valuation, p, d: 1, g: None, precision, degree_cap: 0 }
    }

    pub fn unramified(p: u64, d: usize, precision: u32, degree_cap: u32) -> Self {
        TowerSpec { kind: TowerKind::Unramified, p, d, g: None, precision, degree_cap }
    }

    pub fn ramified(p: u64, d: usize, g: &str, precision: u32, degree_cap: u32) -> Result<Self> {
        Ok(TowerSpec { kind: TowerKind::Ramified, p, d, g: Some(Expr::parse(g)?), precision, degree_cap })
    }

    pub fn var_names(&self) -> Vec<String> {
        match self.kind {
            TowerKind::Valuation => vec!["pi".into()],
            TowerKind::Unramified => std::iter::once("pi".to_string()).chain((2..=self.d).map(|i| format!("x{i}"))).collect(),
            TowerKind::Ramified => (1..=self.d).map(|i| format!("t{i}")).collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.kind != TowerKind::Ramified {
            if self.g.is_some() {
                return Err(Error::InvalidSpec("G only applies to ramified towers".into()));
            }
            if self.kind == TowerKind::Unramified && self.d == 0 {
                return Err(Error::InvalidSpec("dimension must be positive".into()));
            }
            return Ok(());
        }
        let g = self.g.as_ref().ok_or_else(|| Error::InvalidSpec("ramified tower needs G".into()))?;
        if self.d == 0 {
            return Err(Error::InvalidSpec("dimension must be positive".into()));
        }
        let terms = expand(g, &self.var_names(), self.p, 0).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        for m in terms.keys() {
            if m.iter().map(|e| *e as u64).sum::<u64>() < 2 {
                return Err(Error::InvalidSpec(format!("G = {g} must lie in the square of the maximal ideal")));
            }
        }
        if terms.values().all(|c| c % self.p as i128 == 0) {
            return Err(Error::InvalidSpec(format!("G = {g} lies in pT")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TowerLevel {
    pub spec: TowerSpec,
    pub n: u32,
    pub alg: Arc<TruncatedAlgebra>,
}

/// Builds the truncated algebra of level `n`.
pub fn build_level(spec: &TowerSpec, n: u32) -> Result<TowerLevel> {
    spec.validate()?;
    let names = spec.var_names();
    let names: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let b = AlgebraBuilder::new(spec.p).level(n).precision(spec.precision).degree_cap(spec.degree_cap).vars(&names);
    let b = match spec.kind {
        TowerKind::Valuation | TowerKind::Unramified => b.relation("pi", "p")?,
        TowerKind::Ramified => b.p_equals_expr(spec.g.clone().unwrap()),
    };
    let alg = b.build().map_err(|e| match e {
        Error::InvalidAlgebra(msg) => Error::InvalidSpec(msg),
        other => other,
    })?;
    Ok(TowerLevel { spec: spec.clone(), n, alg })
}

impl TowerLevel {
    pub fn next(&self) -> Result<TowerLevel> {
        build_level(&self.spec, self.n + 1)
    }

    pub fn at(&self, n: u32) -> Result<TowerLevel> {
        build_level(&self.spec, n)
    }

    /// Inclusion into a finer level.
    pub fn include(&self, e: &PolyElement, target: &TowerLevel) -> Result<PolyElement> {
        e.transport(&target.alg)
    }

    /// `π_k = p^(1/p^k)` for valuation and unramified towers (`k <= n`).
    pub fn pi(&self, k: u32) -> Result<PolyElement> {
        if self.spec.kind == TowerKind::Ramified {
            return Err(Error::Precondition("π_k is only defined for valuation and unramified towers".into()));
        }
        if k > self.n {
            return Err(Error::ExponentLevelMismatch { level: self.n });
        }
        self.alg.var_pow("pi", 1, self.spec.p.pow(k))
    }

    /// `G_k = G(t^(1/p^k))` for ramified towers (`k <= n`).
    pub fn g_root(&self, k: u32) -> Result<PolyElement> {
        let raw = self.g_raw(k)?;
        Ok(self.alg.element(raw.terms().iter().map(|(m, c)| (m.clone(), *c))))
    }

    /// `G_k` as a raw integer polynomial, without rewriting `p`.
    pub fn g_raw(&self, k: u32) -> Result<LiftPoly> {
        let g = self.spec.g.as_ref().ok_or_else(|| Error::Precondition("no G in this tower".into()))?;
        if k > self.n {
            return Err(Error::ExponentLevelMismatch { level: self.n });
        }
        let terms = expand(g, &self.spec.var_names(), self.spec.p, 0)?;
        let f = self.alg.scale() / self.spec.p.pow(k) as u32;
        Ok(LiftPoly::from_raw(&self.alg, terms.into_iter().map(|(m, c)| (m.iter().map(|e| e * f).collect::<Monomial>(), c))))
    }
}

/// `r` at level `n + 1` with `r^p ≡ e (mod p)`: coefficients reduced mod
/// `p`, each exponent divided by `p`. Returns `(r, d)` with `e = r^p + p d`
/// computed in the integer lift.
pub fn frobenius_root(e: &PolyElement, next: &TowerLevel) -> Result<(PolyElement, PolyElement)> {
    let src = e.algebra();
    if next.alg.level() != src.level() + 1 {
        return Err(Error::ExponentLevelMismatch { level: next.alg.level() });
    }
    let p = src.p() as i128;
    let cap = next.alg.degree_cap() as u64 * next.alg.scale() as u64;
    let mut terms = Vec::new();
    for (m, c) in e.terms() {
        let deg: u64 = m.iter().zip(next.alg.vars()).filter(|(_, v)| v.graded).map(|(x, _)| *x as u64).sum();
        if deg > cap {
            return Err(Error::NoRootAtTruncation(format!("degree of {e} exceeds the cap at level {}", next.n)));
        }
        terms.push((m.clone(), c.rem_euclid(p)));
    }
    let root = next.alg.element(terms);
    let d = root_defect(&e.lift(), &root, next)?;
    Ok((root, d))
}

/// `(e - r^p) / p` in the integer lift at the level of `r`.
pub(crate) fn root_defect(e: &LiftPoly, r: &PolyElement, at: &TowerLevel) -> Result<PolyElement> {
    let up = LiftPoly::from_raw(&at.alg, e.terms().iter().map(|(m, c)| {
        let f = at.alg.scale() / e.algebra().scale();
        (m.iter().map(|x| x * f).collect::<Monomial>(), *c)
    }));
    let diff = up.sub(&r.lift().pow(at.spec.p));
    diff.div_p()
        .map_err(|_| Error::NoRootAtTruncation(format!("{r} is not a p-th root of {e} mod p")))?
        .project()
}

#[derive(Debug, Clone)]
pub struct RootRecord {
    pub element: String,
    pub root: String,
    pub certified: bool,
}

#[derive(Debug, Clone)]
pub struct Nilpotency {
    /// `π_n` or `G_n`.
    pub element: String,
    /// `x^(p^n) = p * cofactor`, verified exactly.
    pub cofactor: String,
    pub exponent_bound: u64,
    pub bound_certified: bool,
    /// `x^(p^n - 1) ∉ pA`, so the bound is the exact nilpotency exponent mod p.
    pub bound_sharp: bool,
}

#[derive(Debug, Clone)]
pub struct SameLevelFailure {
    pub element: String,
    /// Whether `element` is a p-th power modulo `p` already at level `n`.
    pub rooted_at_same_level: bool,
}

#[derive(Debug, Clone)]
pub struct FrobReport {
    pub level: u32,
    pub up_to_degree: u32,
    pub total: usize,
    pub rooted: usize,
    pub records: Vec<RootRecord>,
    pub nilpotency: Nilpotency,
    pub same_level: Option<SameLevelFailure>,
    pub truncation: (u32, u32, u32),
}

impl FrobReport {
    pub fn all_rooted(&self) -> bool {
        self.total == self.rooted
    }
}

impl fmt::Display for FrobReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "level {}: {}/{} monomials rooted at level {}; {}^{} = p*({})",
            self.level,
            self.rooted,
            self.total,
            self.level + 1,
            self.nilpotency.element,
            self.nilpotency.exponent_bound,
            self.nilpotency.cofactor
        )
    }
}

/// Whether `x ∈ pA`, decided exactly where cheap. Unramified presentations
/// keep `p·m` in normal form, so membership means every coefficient is
/// divisible by `p`. Ramified presentations use the `t`-adic order: `pA`
/// consists of elements of order at least `ord(G)`, and an element of
/// smaller order is outside; otherwise fall back to a linear solve.
pub(crate) fn in_p_ideal(x: &PolyElement) -> Result<bool> {
    let alg = x.algebra();
    let p = alg.p() as i128;
    if !alg.is_ramified() {
        return Ok(x.terms().values().all(|c| c % p == 0));
    }
    if let (Some(o), Some(og)) = (x.order(), alg.p_rewrite_order()) {
        if o < og {
            return Ok(false);
        }
    }
    Ok(crate::exactalg::solve_linear_membership(x, &[alg.constant(p)])?.is_member())
}

/// Roots every level-`n` basis monomial of degree `<= up_to` at level
/// `n + 1`, and certifies the nilpotent element `π_n` or `G_n` modulo `p`.
pub fn frob_surjectivity_report(spec: &TowerSpec, n: u32, up_to: u32) -> Result<FrobReport> {
    let level = build_level(spec, n)?;
    let next = level.next()?;
    let bound = up_to as u64 * level.alg.scale() as u64;
    let mut records = Vec::new();
    for m in level.alg.basis()? {
        let deg: u64 = m.iter().zip(level.alg.vars()).filter(|(_, v)| v.graded).map(|(e, _)| *e as u64).sum();
        if deg > bound {
            continue;
        }
        let e = level.alg.monomial(m, 1);
        let rec = match frobenius_root(&e, &next) {
            Ok((r, _)) => RootRecord { element: e.to_string(), root: r.to_string(), certified: true },
            Err(_) => RootRecord { element: e.to_string(), root: String::new(), certified: false },
        };
        records.push(rec);
    }
    let rooted = records.iter().filter(|r| r.certified).count();
    let nilpotency = nilpotency_witness(&level)?;
    let same_level = if n == 0 { same_level_failure(&level)? } else { None };
    Ok(FrobReport {
        level: n,
        up_to_degree: up_to,
        total: records.len(),
        rooted,
        records,
        nilpotency,
        same_level,
        truncation: level.alg.truncation(),
    })
}

fn nilpotency_witness(level: &TowerLevel) -> Result<Nilpotency> {
    let p = level.spec.p;
    let alg = &level.alg;
    let bound = p.pow(level.n);
    let x = match level.spec.kind {
        TowerKind::Ramified => level.g_root(level.n)?,
        _ => level.pi(level.n)?,
    };
    // x^(p^n) = p + p h in the integer lift (Frobenius is additive mod p)
    let lifted = x.lift().pow(bound);
    let target = match level.spec.kind {
        TowerKind::Ramified => level.g_raw(0)?,
        _ => alg.constant(p as i128).lift(),
    };
    let (cofactor, certified) = match lifted.sub(&target).div_p() {
        Ok(h) => {
            let cof = alg.one().add(&h.project()?);
            let ok = x.pow(bound) == cof.scale(p as i128);
            (cof, ok)
        }
        Err(_) => (alg.zero(), false),
    };
    let sharp = bound == 1 || !in_p_ideal(&x.pow(bound - 1))?;
    let name = match level.spec.kind {
        TowerKind::Ramified => format!("G_{}", level.n),
        _ => format!("pi_{}", level.n),
    };
    Ok(Nilpotency {
        element: name,
        cofactor: cofactor.to_string(),
        exponent_bound: bound,
        bound_certified: certified,
        bound_sharp: sharp,
    })
}

/// At level `n` the image of Frobenius modulo `p` is spanned by `p`-th powers
/// of monomials; checks whether the first graded variable lies in it.
fn same_level_failure(level: &TowerLevel) -> Result<Option<SameLevelFailure>> {
    let alg = &level.alg;
    let Some(vi) = alg.vars().iter().position(|v| v.graded) else { return Ok(None) };
    let basis = alg.basis()?;
    let p = alg.p();
    let mut cols = Vec::new();
    for m in &basis {
        let mp = alg.monomial(m.clone(), 1).pow(p);
        if !mp.is_zero() {
            cols.push(alg.coords(&mp)?);
        }
        cols.push(alg.coords(&alg.monomial(m.clone(), p as i128))?);
    }
    let rels = alg.additive_relations()?;
    let mut m = alg.one_monomial();
    m[vi] = alg.scale();
    let target = alg.monomial(m, 1);
    let ring = crate::exactalg::ring_of(alg)?;
    let sol = solve_columns(ring, &cols, &rels, &[alg.coords(&target)?])?;
    Ok(Some(SameLevelFailure { element: target.to_string(), rooted_at_same_level: sol[0].is_some() }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valuation_level_one_relation() {
        let l = build_level(&TowerSpec::valuation(2, 4), 1).unwrap();
        let pi1 = l.pi(1).unwrap();
        assert_eq!(pi1.pow(2), l.alg.constant(2));
    }

    #[test]
    fn ramified_level_zero_rewrites_p() {
        let spec = TowerSpec::ramified(2, 2, "t1^2", 4, 6).unwrap();
        let l = build_level(&spec, 0).unwrap();
        assert!(l.alg.parse("p - t1^2").unwrap().is_zero());
        assert!(build_level(&TowerSpec::ramified(2, 2, "t1 + t2^2", 4, 6).unwrap(), 0).is_err());
        assert!(build_level(&TowerSpec::ramified(2, 2, "2*t1^2", 4, 6).unwrap(), 0).is_err());
    }

    #[test]
    fn roots_of_monomials() {
        let spec = TowerSpec::unramified(2, 2, 4, 4);
        let l1 = build_level(&spec, 1).unwrap();
        let l2 = l1.next().unwrap();
        let (r, _) = frobenius_root(&l1.alg.parse("x2^(1/2)").unwrap(), &l2).unwrap();
        assert_eq!(r, l2.alg.parse("x2^(1/4)").unwrap());
        let spec = TowerSpec::ramified(3, 2, "t1^2 + t2^3", 4, 6).unwrap();
        let l0 = build_level(&spec, 0).unwrap();
        let l1 = l0.next().unwrap();
        let (r, _) = frobenius_root(&l0.alg.parse("3*t1").unwrap(), &l1).unwrap();
        // 3 t1 = G t1 has no constant-digit part at t1
        let (r2, _) = frobenius_root(&l0.alg.parse("t1").unwrap(), &l1).unwrap();
        assert_eq!(r2, l1.alg.parse("t1^(1/3)").unwrap());
        assert!(!r.terms().contains_key(r2.terms().keys().next().unwrap()));
        let (z, _) = frobenius_root(&l0.alg.zero(), &l1).unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn ramified_level_zero_is_not_surjective() {
        let spec = TowerSpec::ramified(2, 2, "t1^2", 4, 6).unwrap();
        let rep = frob_surjectivity_report(&spec, 0, 6).unwrap();
        assert!(rep.all_rooted());
        assert_eq!(rep.same_level.unwrap().rooted_at_same_level, false);
    }
}
