use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::exactalg::monomial::{divides, lcm, mono_div, mono_mul, Monomial};
use crate::exactalg::poly::PolyElement;
use crate::exactalg::text::{expand, Expr, RawTerms};

/// Extra p-adic digits carried by lifted (uncarried) arithmetic so that a few
/// exact divisions by `p` still land at full precision.
pub const LIFT_EXTRA: u32 = 3;

const MAX_BASIS: usize = 250_000;
const MODULUS_LIMIT: i128 = 1 << 62;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    /// Graded variables count toward the degree cap. Variables carrying a
    /// power relation are ungraded.
    pub graded: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Relation {
    /// `var^exponent -> rhs` (exponent scaled by `p^level`).
    Power { var: usize, exponent: u32, rhs: Vec<(Monomial, i128)> },
    /// `monomial -> 0`
    Vanishing(Monomial),
}

impl Relation {
    fn lead(&self, nvars: usize) -> Monomial {
        match self {
            Relation::Power { var, exponent, .. } => {
                let mut m = Monomial::from_elem(0, nvars);
                m[*var] = *exponent;
                m
            }
            Relation::Vanishing(m) => m.clone(),
        }
    }

    fn rhs(&self) -> &[(Monomial, i128)] {
        match self {
            Relation::Power { rhs, .. } => rhs,
            Relation::Vanishing(_) => &[],
        }
    }
}

/// How coefficients are treated by [`TruncatedAlgebra::normalize`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Mode {
    /// Full normal form: residues mod `p^N`, with `p -> G` carrying when the
    /// algebra has a ramified relation.
    Normal,
    /// Integer lift modulo `p^(N + LIFT_EXTRA)`, no carrying.
    Lift,
}

/// Finite model of a mixed-characteristic ring: coefficients mod `p^N`,
/// exponents in `(1/p^level) Z_{>=0}`, graded degree at most `D`, plus
/// rewrite relations.
///
/// When the algebra carries a relation `p = G` (ramified presentation) the
/// normal form has Teichmüller digits `0..p` as coefficients and multiples of
/// `p` are carried into `G`. In that case the p-adic precision is not an input
/// but the smallest `K` with `p^K = 0`, which the degree cap determines.
#[derive(Debug)]
pub struct TruncatedAlgebra {
    p: u64,
    level: u32,
    scale: u32,
    degree_cap: u32,
    requested_precision: u32,
    precision: u32,
    modulus: i128,
    lift_modulus: i128,
    vars: Vec<Variable>,
    relations: Vec<Relation>,
    p_rewrite: Option<Vec<(Monomial, i128)>>,
    source: AlgebraBuilder,
    basis: OnceLock<Result<Basis>>,
}

#[derive(Debug)]
pub(crate) struct Basis {
    pub monomials: Vec<Monomial>,
    pub index: HashMap<Monomial, usize>,
}

impl PartialEq for TruncatedAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p
            && self.level == other.level
            && self.degree_cap == other.degree_cap
            && self.precision == other.precision
            && self.vars == other.vars
            && self.relations == other.relations
            && self.p_rewrite == other.p_rewrite
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraBuilder {
    p: u64,
    level: u32,
    precision: u32,
    degree_cap: u32,
    vars: Vec<String>,
    relations: Vec<(Expr, Expr)>,
    p_equals: Option<Expr>,
}

impl AlgebraBuilder {
    pub fn new(p: u64) -> Self {
        AlgebraBuilder { p, level: 0, precision: 1, degree_cap: 0, vars: Vec::new(), relations: Vec::new(), p_equals: None }
    }

    pub fn level(mut self, level: u32) -> Self {
        self.level = level;
        self
    }

    pub fn precision(mut self, n: u32) -> Self {
        self.precision = n;
        self
    }

    pub fn degree_cap(mut self, d: u32) -> Self {
        self.degree_cap = d;
        self
    }

    pub fn var(mut self, name: &str) -> Self {
        self.vars.push(name.to_string());
        self
    }

    pub fn vars(mut self, names: &[&str]) -> Self {
        self.vars.extend(names.iter().map(|s| s.to_string()));
        self
    }

    /// Adds `lhs = rhs`. `lhs` must be a single monomial; a power of one
    /// variable with nonzero `rhs` becomes a rewrite rule, anything with
    /// `rhs = 0` a vanishing monomial.
    pub fn relation(self, lhs: &str, rhs: &str) -> Result<Self> {
        Ok(self.relation_expr(Expr::parse(lhs)?, Expr::parse(rhs)?))
    }

    pub fn relation_expr(mut self, lhs: Expr, rhs: Expr) -> Self {
        self.relations.push((lhs, rhs));
        self
    }

    /// Ramified presentation: rewrite `p -> G`.
    pub fn p_equals(self, g: &str) -> Result<Self> {
        Ok(self.p_equals_expr(Expr::parse(g)?))
    }

    pub fn p_equals_expr(mut self, g: Expr) -> Self {
        self.p_equals = Some(g);
        self
    }

    pub fn build(self) -> Result<Arc<TruncatedAlgebra>> {
        TruncatedAlgebra::from_builder(self).map(Arc::new)
    }
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

impl TruncatedAlgebra {
    fn from_builder(b: AlgebraBuilder) -> Result<Self> {
        if !is_prime(b.p) {
            return Err(Error::InvalidAlgebra(format!("{} is not prime", b.p)));
        }
        let nv = b.vars.len();
        let scale = (b.p as u128).checked_pow(b.level).and_then(|s| u32::try_from(s).ok()).ok_or(Error::Overflow)?;
        for (i, v) in b.vars.iter().enumerate() {
            if v == "p" || b.vars[..i].contains(v) {
                return Err(Error::InvalidAlgebra(format!("bad or duplicate variable `{v}`")));
            }
        }
        let mut graded = vec![true; nv];
        let mut relations = Vec::new();
        for (lhs, rhs) in &b.relations {
            let lt = expand(lhs, &b.vars, b.p, b.level)?;
            let rt = expand(rhs, &b.vars, b.p, b.level)?;
            if lt.len() != 1 || lt.values().next() != Some(&1) {
                return Err(Error::InvalidAlgebra(format!("relation lhs `{lhs}` must be a monic monomial")));
            }
            let lead = lt.keys().next().unwrap().clone();
            if rt.is_empty() {
                relations.push(Relation::Vanishing(lead));
                continue;
            }
            let support: Vec<usize> = (0..nv).filter(|&i| lead[i] > 0).collect();
            if support.len() != 1 {
                return Err(Error::InvalidAlgebra(format!("rewrite lhs `{lhs}` must be a power of one variable")));
            }
            let var = support[0];
            if !graded[var] {
                return Err(Error::InvalidAlgebra(format!("second rewrite rule for `{}`", b.vars[var])));
            }
            for m in rt.keys() {
                if m[var] >= lead[var] {
                    return Err(Error::InvalidAlgebra(format!("rhs of `{lhs}` does not lower its degree")));
                }
            }
            graded[var] = false;
            let mut rhs: Vec<(Monomial, i128)> = rt.into_iter().collect();
            rhs.sort();
            relations.push(Relation::Power { var, exponent: lead[var], rhs });
        }
        // rewrite rules may only mention ungraded variables ruled earlier
        for r in &relations {
            if let Relation::Power { rhs, var, .. } = r {
                for (m, _) in rhs {
                    for (j, &e) in m.iter().enumerate() {
                        if e > 0 && j != *var && !graded[j] {
                            let ok = relations.iter().position(|q| matches!(q, Relation::Power { var: v, .. } if *v == j))
                                < relations.iter().position(|q| std::ptr::eq(q, r));
                            if !ok {
                                return Err(Error::InvalidAlgebra(format!("rewrite rules for `{}` and `{}` are cyclic", b.vars[*var], b.vars[j])));
                            }
                        }
                    }
                }
            }
        }
        let vars: Vec<Variable> = b.vars.iter().zip(&graded).map(|(n, g)| Variable { name: n.clone(), graded: *g }).collect();

        let p_rewrite = match &b.p_equals {
            None => None,
            Some(g) => {
                let gt = expand(g, &b.vars, b.p, b.level)?;
                if gt.is_empty() {
                    return Err(Error::InvalidAlgebra("p = 0 is not a ramified presentation".into()));
                }
                let mut terms: Vec<(Monomial, i128)> = gt.into_iter().collect();
                terms.sort();
                for (m, _) in &terms {
                    let deg: u64 = m.iter().zip(&vars).filter(|(_, v)| v.graded).map(|(e, _)| *e as u64).sum();
                    if deg == 0 {
                        return Err(Error::InvalidAlgebra("every term of G needs positive degree".into()));
                    }
                }
                Some(terms)
            }
        };

        let mut alg = TruncatedAlgebra {
            p: b.p,
            level: b.level,
            scale,
            degree_cap: b.degree_cap,
            requested_precision: b.precision,
            precision: b.precision,
            modulus: 0,
            lift_modulus: 0,
            vars,
            relations,
            p_rewrite,
            source: b.clone(),
            basis: OnceLock::new(),
        };
        let precision = if alg.p_rewrite.is_some() {
            // smallest K with p^K = 0
            let mut x = alg.normalize(vec![(alg.one_monomial(), b.p as i128)], Mode::Normal);
            let mut k = 1;
            while !x.is_empty() {
                k += 1;
                if k > 200 {
                    return Err(Error::InvalidAlgebra("p is not nilpotent at this degree cap".into()));
                }
                x = alg.normalize(x.into_iter().map(|(m, c)| (m, c * b.p as i128)), Mode::Normal);
            }
            k
        } else {
            if b.precision == 0 {
                return Err(Error::InvalidAlgebra("precision N must be positive".into()));
            }
            b.precision
        };
        alg.precision = precision;
        alg.modulus = (b.p as i128).checked_pow(precision).filter(|m| *m < MODULUS_LIMIT).ok_or(Error::Overflow)?;
        alg.lift_modulus =
            (b.p as i128).checked_pow(precision + LIFT_EXTRA).filter(|m| *m < MODULUS_LIMIT).ok_or(Error::Overflow)?;
        let m = alg.modulus;
        for r in alg.relations.iter_mut() {
            if let Relation::Power { rhs, .. } = r {
                for t in rhs.iter_mut() {
                    t.1 = t.1.rem_euclid(m);
                }
                rhs.retain(|t| t.1 != 0);
            }
        }
        alg.check_confluence()?;
        Ok(alg)
    }

    fn check_confluence(&self) -> Result<()> {
        let nv = self.vars.len();
        for (i, ri) in self.relations.iter().enumerate() {
            for rj in &self.relations[i + 1..] {
                let (li, lj) = (ri.lead(nv), rj.lead(nv));
                let l = lcm(&li, &lj);
                if self.graded_degree(&l) > self.scaled_cap() {
                    continue;
                }
                let route = |lead: &Monomial, r: &Relation| {
                    let q = mono_div(&l, lead);
                    self.normalize(r.rhs().iter().map(|(m, c)| (mono_mul(m, &q), *c)), Mode::Normal)
                };
                if route(&li, ri) != route(&lj, rj) {
                    return Err(Error::InvalidAlgebra("relations do not rewrite confluently".into()));
                }
            }
            if let Some(g) = &self.p_rewrite {
                let lead = ri.lead(nv);
                let a = self.normalize(ri.rhs().iter().map(|(m, c)| (m.clone(), c * self.p as i128)), Mode::Normal);
                let b = self.normalize(g.iter().map(|(m, c)| (mono_mul(m, &lead), *c)), Mode::Normal);
                if a != b {
                    return Err(Error::InvalidAlgebra("p = G is not compatible with the rewrite rules".into()));
                }
            }
        }
        Ok(())
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// `p^level`: the factor by which stored exponents are scaled.
    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn degree_cap(&self) -> u32 {
        self.degree_cap
    }

    pub(crate) fn scaled_cap(&self) -> u64 {
        self.degree_cap as u64 * self.scale as u64
    }

    /// Effective p-adic precision `N` (so that `p^N = 0`).
    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn requested_precision(&self) -> u32 {
        self.requested_precision
    }

    pub fn modulus(&self) -> i128 {
        self.modulus
    }

    pub(crate) fn lift_modulus(&self) -> i128 {
        self.lift_modulus
    }

    pub fn is_ramified(&self) -> bool {
        self.p_rewrite.is_some()
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn builder(&self) -> &AlgebraBuilder {
        &self.source
    }

    /// Truncation triple `(N, n, D)` every verdict refers to.
    pub fn truncation(&self) -> (u32, u32, u32) {
        (self.precision, self.level, self.degree_cap)
    }

    pub(crate) fn one_monomial(&self) -> Monomial {
        Monomial::from_elem(0, self.vars.len())
    }

    pub(crate) fn graded_degree(&self, m: &Monomial) -> u64 {
        m.iter().zip(&self.vars).filter(|(_, v)| v.graded).map(|(e, _)| *e as u64).sum()
    }

    /// Same presentation at a different p-adic precision (ignored for
    /// ramified algebras, whose precision is forced by the degree cap).
    pub fn with_precision(&self, n: u32) -> Result<Arc<TruncatedAlgebra>> {
        self.source.clone().precision(n).build()
    }

    /// Coarser truncation `(N', D')`.
    pub fn coarsen(&self, n: u32, d: u32) -> Result<Arc<TruncatedAlgebra>> {
        self.source.clone().precision(n).degree_cap(d).build()
    }

    /// Same presentation with exponent denominators `p^level`, `level >= self.level`.
    pub fn at_level(&self, level: u32) -> Result<Arc<TruncatedAlgebra>> {
        if level < self.level {
            return Err(Error::ExponentLevelMismatch { level });
        }
        self.source.clone().level(level).build()
    }

    /// Normal form of a raw term collection modulo `p^N`, degree > `D` and
    /// the relations. Idempotent.
    pub(crate) fn normalize(
        &self,
        terms: impl IntoIterator<Item = (Monomial, i128)>,
        mode: Mode,
    ) -> BTreeMap<Monomial, i128> {
        let modulus = match mode {
            Mode::Normal => self.modulus,
            Mode::Lift => self.lift_modulus,
        };
        let carry = mode == Mode::Normal && self.p_rewrite.is_some();
        let cap = self.scaled_cap();
        let p = self.p as i128;
        let reduce = |c: i128| if modulus > 0 { c.rem_euclid(modulus) } else { c };
        let mut stack: Vec<(Monomial, i128)> = terms.into_iter().collect();
        let mut out: HashMap<Monomial, i128> = HashMap::with_capacity(stack.len());
        while let Some((m, c)) = stack.pop() {
            let c = reduce(c);
            if c == 0 || self.graded_degree(&m) > cap {
                continue;
            }
            let mut rewritten = false;
            for r in &self.relations {
                match r {
                    Relation::Vanishing(lead) if divides(lead, &m) => {
                        rewritten = true;
                        break;
                    }
                    Relation::Power { var, exponent, rhs } if m[*var] >= *exponent => {
                        let mut rest = m.clone();
                        rest[*var] -= exponent;
                        for (rm, rc) in rhs {
                            stack.push((mono_mul(&rest, rm), reduce(c * rc)));
                        }
                        rewritten = true;
                        break;
                    }
                    _ => {}
                }
            }
            if rewritten {
                continue;
            }
            let entry = out.entry(m.clone()).or_insert(0);
            *entry = reduce(*entry + c);
            if carry {
                let q = entry.div_euclid(p);
                if q != 0 {
                    *entry = entry.rem_euclid(p);
                    for (gm, gc) in self.p_rewrite.as_ref().unwrap() {
                        stack.push((mono_mul(&m, gm), reduce(q * gc)));
                    }
                }
            }
        }
        out.into_iter().filter(|(_, c)| *c != 0).collect()
    }

    pub(crate) fn basis_data(&self) -> Result<&Basis> {
        self.basis.get_or_init(|| self.enumerate_basis()).as_ref().map_err(|e| e.clone())
    }

    fn enumerate_basis(&self) -> Result<Basis> {
        let nv = self.vars.len();
        let bound: Vec<Option<u32>> = (0..nv)
            .map(|i| {
                self.relations.iter().find_map(|r| match r {
                    Relation::Power { var, exponent, .. } if *var == i => Some(*exponent),
                    _ => None,
                })
            })
            .collect();
        let cap = self.scaled_cap();
        let mut out = Vec::new();
        let mut cur = Monomial::from_elem(0, nv);
        fn rec(
            i: usize,
            budget: u64,
            cur: &mut Monomial,
            alg: &TruncatedAlgebra,
            bound: &[Option<u32>],
            out: &mut Vec<Monomial>,
        ) -> Result<()> {
            if i == cur.len() {
                let dead = alg.relations.iter().any(|r| matches!(r, Relation::Vanishing(l) if divides(l, cur)));
                if !dead {
                    if out.len() >= MAX_BASIS {
                        return Err(Error::TooLarge(out.len()));
                    }
                    out.push(cur.clone());
                }
                return Ok(());
            }
            let hi = match bound[i] {
                Some(e) => e as u64 - 1,
                None if alg.vars[i].graded => budget,
                None => unreachable!(),
            };
            for e in 0..=hi {
                cur[i] = e as u32;
                let left = if alg.vars[i].graded { budget - e } else { budget };
                rec(i + 1, left, cur, alg, bound, out)?;
            }
            cur[i] = 0;
            Ok(())
        }
        rec(0, cap, &mut cur, self, &bound, &mut out)?;
        out.sort();
        let index = out.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        Ok(Basis { monomials: out, index })
    }

    /// Monomial basis of the additive group (finite by construction).
    pub fn basis(&self) -> Result<Vec<Monomial>> {
        Ok(self.basis_data()?.monomials.clone())
    }

    pub fn dimension(&self) -> Result<usize> {
        Ok(self.basis_data()?.monomials.len())
    }

    pub fn zero(self: &Arc<Self>) -> PolyElement {
        PolyElement::from_map(self.clone(), BTreeMap::new())
    }

    pub fn one(self: &Arc<Self>) -> PolyElement {
        self.constant(1)
    }

    pub fn constant(self: &Arc<Self>, c: i128) -> PolyElement {
        let t = self.normalize(vec![(self.one_monomial(), c.rem_euclid(self.lift_modulus))], Mode::Normal);
        PolyElement::from_map(self.clone(), t)
    }

    pub fn monomial(self: &Arc<Self>, m: Monomial, c: i128) -> PolyElement {
        let t = self.normalize(vec![(m, c)], Mode::Normal);
        PolyElement::from_map(self.clone(), t)
    }

    /// Variable with an exponent given in unscaled units `num/den`.
    pub fn var_pow(self: &Arc<Self>, name: &str, num: u64, den: u64) -> Result<PolyElement> {
        let i = self.var_index(name).ok_or_else(|| Error::InvalidAlgebra(format!("unknown variable `{name}`")))?;
        let scaled = num as u128 * self.scale as u128;
        if den == 0 || scaled % den as u128 != 0 {
            return Err(Error::ExponentLevelMismatch { level: self.level });
        }
        let mut m = self.one_monomial();
        m[i] = u32::try_from(scaled / den as u128).map_err(|_| Error::Overflow)?;
        Ok(self.monomial(m, 1))
    }

    pub fn var(self: &Arc<Self>, name: &str) -> Result<PolyElement> {
        self.var_pow(name, 1, 1)
    }

    /// Parses an element in the canonical text syntax.
    pub fn parse(self: &Arc<Self>, src: &str) -> Result<PolyElement> {
        self.from_expr(&Expr::parse(src)?)
    }

    pub fn from_expr(self: &Arc<Self>, e: &Expr) -> Result<PolyElement> {
        let names: Vec<String> = self.vars.iter().map(|v| v.name.clone()).collect();
        let raw = expand(e, &names, self.p, self.level)?;
        Ok(self.reduce_scaled(raw))
    }

    pub(crate) fn reduce_scaled(self: &Arc<Self>, raw: RawTerms) -> PolyElement {
        let lm = self.lift_modulus;
        let t = self.normalize(raw.into_iter().map(|(m, c)| (m, c.rem_euclid(lm))), Mode::Normal);
        PolyElement::from_map(self.clone(), t)
    }

    /// `alg_reduce`: normal form of raw terms whose exponents are given as
    /// rationals `num/den` per variable.
    pub fn alg_reduce(self: &Arc<Self>, terms: &[(Vec<(u64, u64)>, i128)]) -> Result<PolyElement> {
        let mut raw = RawTerms::new();
        for (exps, c) in terms {
            if exps.len() != self.vars.len() {
                return Err(Error::InvalidAlgebra("exponent vector length mismatch".into()));
            }
            let mut m = self.one_monomial();
            for (i, (num, den)) in exps.iter().enumerate() {
                let scaled = *num as u128 * self.scale as u128;
                if *den == 0 || scaled % *den as u128 != 0 {
                    return Err(Error::ExponentLevelMismatch { level: self.level });
                }
                m[i] = u32::try_from(scaled / *den as u128).map_err(|_| Error::Overflow)?;
            }
            let e = raw.entry(m).or_insert(0);
            *e = (*e + c.rem_euclid(self.lift_modulus)).rem_euclid(self.lift_modulus);
        }
        Ok(self.reduce_scaled(raw))
    }

    /// Normal form of raw scaled terms.
    pub(crate) fn element(self: &Arc<Self>, terms: impl IntoIterator<Item = (Monomial, i128)>) -> PolyElement {
        let lm = self.lift_modulus;
        let t = self.normalize(terms.into_iter().map(|(m, c)| (m, c.rem_euclid(lm))), Mode::Normal);
        PolyElement::from_map(self.clone(), t)
    }

    /// Lowest graded degree among the monomials of the ramified relation `G`,
    /// in scaled units.
    pub(crate) fn p_rewrite_order(&self) -> Option<u64> {
        self.p_rewrite.as_ref().map(|g| g.iter().map(|(m, _)| self.graded_degree(m)).min().unwrap_or(0))
    }

    /// Coordinates of an element on the monomial basis.
    pub(crate) fn coords(&self, e: &PolyElement) -> Result<Vec<i128>> {
        let basis = self.basis_data()?;
        let mut v = vec![0i128; basis.monomials.len()];
        for (m, c) in e.terms() {
            let i = *basis.index.get(m).ok_or_else(|| Error::InvalidAlgebra("term outside the monomial basis".into()))?;
            v[i] = *c;
        }
        Ok(v)
    }

    pub(crate) fn from_coords(self: &Arc<Self>, v: &[i128]) -> Result<PolyElement> {
        let basis = self.basis_data()?;
        let raw = basis.monomials.iter().zip(v).filter(|(_, c)| **c != 0).map(|(m, c)| (m.clone(), *c));
        Ok(PolyElement::from_map(self.clone(), self.normalize(raw, Mode::Normal)))
    }

    /// Generators of the kernel of `Z^basis -> A` beyond `p^N Z^basis`:
    /// `p e_m - digits(p m)` for ramified algebras, nothing otherwise.
    pub(crate) fn additive_relations(&self) -> Result<Vec<Vec<i128>>> {
        if self.p_rewrite.is_none() {
            return Ok(Vec::new());
        }
        let basis = self.basis_data()?;
        let n = basis.monomials.len();
        let mut out = Vec::with_capacity(n);
        for (i, m) in basis.monomials.iter().enumerate() {
            let nf = self.normalize(vec![(m.clone(), self.p as i128)], Mode::Normal);
            let mut v = vec![0i128; n];
            v[i] = self.p as i128;
            for (mm, c) in nf {
                let j = basis.index[&mm];
                v[j] = (v[j] - c).rem_euclid(self.modulus);
            }
            out.push(v);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valuation_level_one_reduces_pi_squared() {
        let a = AlgebraBuilder::new(2).level(1).precision(4).degree_cap(0).var("pi").relation("pi", "p").unwrap().build().unwrap();
        let pi1 = a.var_pow("pi", 1, 2).unwrap();
        assert_eq!(pi1.mul(&pi1), a.constant(2));
        assert_eq!(a.dimension().unwrap(), 2);
    }

    #[test]
    fn ramified_precision_is_forced_by_degree_cap() {
        let a = AlgebraBuilder::new(2).degree_cap(6).vars(&["t1", "t2"]).p_equals("t1^2").unwrap().build().unwrap();
        // p^k = t1^(2k) vanishes once 2k > 6
        assert_eq!(a.precision(), 4);
        let p_minus_g = a.parse("p - t1^2").unwrap();
        assert!(p_minus_g.is_zero());
        assert_eq!(a.constant(3), a.parse("1 + t1^2").unwrap());
    }

    #[test]
    fn basis_respects_vanishing_and_power_relations() {
        let a = AlgebraBuilder::new(3)
            .precision(2)
            .degree_cap(3)
            .vars(&["x", "y", "z"])
            .relation("x*y", "0")
            .unwrap()
            .relation("z^2", "p*(1+x)")
            .unwrap()
            .build()
            .unwrap();
        // x-degree or y-degree 0..3 without mixed terms: 1 + 3 + 3 = 7, times z^0, z^1
        assert_eq!(a.dimension().unwrap(), 14);
        assert!(!a.vars()[2].graded);
    }

    #[test]
    fn rejects_non_confluent_or_cyclic() {
        let r = AlgebraBuilder::new(2).precision(2).degree_cap(3).vars(&["z", "w"]).relation("z^2", "w").unwrap().relation("w^2", "z").unwrap().build();
        assert!(r.is_err());
        let r = AlgebraBuilder::new(4).build();
        assert!(r.is_err());
    }
}
