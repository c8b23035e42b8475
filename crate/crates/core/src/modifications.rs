//! Partial algebra modifications `M -> M' = M[X]_{<=N} / F·R[X]_{<=N-1}`.
//!
//! Modules are subquotients of free modules `A^r` over a truncated algebra
//! with a distinguished element `1_M` (the image of `1` of the algebra we
//! started from). `F = u_{k+1} - Σ x_i X_i 1_M`.

use std::sync::Arc;

use rand::Rng;

use crate::almost::Subquotient;
use crate::error::{Error, Result};
use crate::exactalg::module::{
    block_relations, combine, flat, span_columns, span_length, span_membership, unit_vector, vec_add, vec_is_zero,
    vec_scale, vec_sub, zero_vector, Vector,
};
use crate::exactalg::{kernel_columns, ring_of, solve_linear_membership, PolyElement, TruncatedAlgebra};

#[derive(Debug, Clone)]
pub struct PartialModule {
    pub module: Subquotient,
    pub one: Vector,
}

impl PartialModule {
    /// The algebra itself as a module over itself.
    pub fn algebra(alg: &Arc<TruncatedAlgebra>) -> Self {
        let one = unit_vector(alg, 1, 0);
        PartialModule { module: Subquotient { alg: alg.clone(), rank: 1, gens: vec![one.clone()], sub: Vec::new() }, one }
    }

    pub fn alg(&self) -> &Arc<TruncatedAlgebra> {
        &self.module.alg
    }

    pub fn rank(&self) -> usize {
        self.module.rank
    }

    /// `log_p` of the order of the module.
    pub fn length(&self) -> Result<u32> {
        let m = &self.module;
        let all: Vec<Vector> = m.gens.iter().chain(&m.sub).cloned().collect();
        Ok(span_length(&m.alg, m.rank, &all)? - span_length(&m.alg, m.rank, &m.sub)?)
    }

    /// Whether `a = b` in the module.
    pub fn equal(&self, a: &[PolyElement], b: &[PolyElement]) -> Result<bool> {
        let d = vec_sub(a, b);
        if vec_is_zero(&d) {
            return Ok(true);
        }
        Ok(span_membership(self.alg(), self.rank(), &[d], &self.module.sub)?[0].is_some())
    }
}

/// `x_{k+1} u_{k+1} = Σ_{i<=k} x_i u_i`.
#[derive(Debug, Clone)]
pub struct ParameterRelation {
    pub k: usize,
    pub xs: Vec<PolyElement>,
    pub us: Vec<Vector>,
}

impl ParameterRelation {
    pub fn holds_in(&self, m: &PartialModule) -> Result<bool> {
        if self.xs.len() != self.k + 1 || self.us.len() != self.k + 1 {
            return Ok(false);
        }
        let lhs = vec_scale(&self.xs[self.k], &self.us[self.k]);
        let rhs = (0..self.k).fold(zero_vector(m.alg(), m.rank()), |acc, i| vec_add(&acc, &vec_scale(&self.xs[i], &self.us[i])));
        m.equal(&lhs, &rhs)
    }
}

/// Exponent tuples of total degree `<= n` in `k` variables, graded.
pub fn monomials_upto(k: usize, n: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![0u32; k]];
    for deg in 1..=n {
        let mut cur = Vec::new();
        fn go(i: usize, left: u32, v: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
            if i + 1 == v.len() {
                v[i] = left;
                out.push(v.clone());
                return;
            }
            for a in (0..=left).rev() {
                v[i] = a;
                go(i + 1, left - a, v, out);
            }
        }
        if k > 0 {
            go(0, deg, &mut vec![0; k], &mut cur);
        }
        out.extend(cur);
    }
    out
}

pub fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

#[derive(Debug, Clone)]
pub struct Modification {
    pub source: PartialModule,
    pub relation: ParameterRelation,
    pub degree_bound: u32,
    /// `X`-monomials of the numerator; slot `j` occupies components
    /// `j*r .. (j+1)*r` of the ambient free module.
    pub slots: Vec<Vec<u32>>,
    pub target: PartialModule,
    pub numerator_gens: usize,
    pub denominator_gens: usize,
}

impl Modification {
    fn slot_of(&self, mono: &[u32]) -> Option<usize> {
        self.slots.iter().position(|s| s == mono)
    }

    /// `v X^mono` in the ambient module of `M'`.
    pub fn place(&self, v: &[PolyElement], mono: &[u32]) -> Option<Vector> {
        let r = self.source.rank();
        let j = self.slot_of(mono)?;
        let mut out = zero_vector(self.source.alg(), r * self.slots.len());
        out[j * r..(j + 1) * r].clone_from_slice(v);
        Some(out)
    }

    /// The map `M -> M'`.
    pub fn track(&self, v: &[PolyElement]) -> Vector {
        self.place(v, &vec![0; self.relation.k]).unwrap()
    }
}

pub fn build_modification(m: &PartialModule, rel: &ParameterRelation, n: u32) -> Result<Modification> {
    if !rel.holds_in(m)? {
        return Err(Error::RelationNotVerified);
    }
    let k = rel.k;
    let r = m.rank();
    let alg = m.alg();
    let slots = monomials_upto(k, n);
    let width = r * slots.len();
    let place = |v: &[PolyElement], j: usize| -> Vector {
        let mut out = zero_vector(alg, width);
        out[j * r..(j + 1) * r].clone_from_slice(v);
        out
    };
    let mut gens = Vec::new();
    for j in 0..slots.len() {
        for g in &m.module.gens {
            gens.push(place(g, j));
        }
    }
    let mut sub = Vec::new();
    for j in 0..slots.len() {
        for s in &m.module.sub {
            sub.push(place(s, j));
        }
    }
    let mut denominator_gens = 0;
    for (j, mono) in slots.iter().enumerate() {
        if mono.iter().sum::<u32>() + 1 > n {
            continue;
        }
        // F · X^mono
        let mut f = place(&rel.us[k], j);
        for i in 0..k {
            let mut up = mono.clone();
            up[i] += 1;
            let ji = slots.iter().position(|s| *s == up).unwrap();
            f = vec_sub(&f, &place(&vec_scale(&rel.xs[i], &m.one), ji));
        }
        sub.push(f);
        denominator_gens += 1;
    }
    let numerator_gens = gens.len();
    let target = PartialModule { module: Subquotient { alg: alg.clone(), rank: width, gens, sub }, one: place(&m.one, 0) };
    Ok(Modification { source: m.clone(), relation: rel.clone(), degree_bound: n, slots, target, numerator_gens, denominator_gens })
}

/// `u_{k+1} = Σ x_i m_i` in `M'` with `m_i ∈ M'`.
#[derive(Debug, Clone)]
pub struct TrivializationCertificate {
    pub holds: bool,
    pub multipliers: Vec<Vector>,
}

impl TrivializationCertificate {
    pub fn verify(&self, m: &Modification) -> Result<bool> {
        if !self.holds {
            return Ok(true);
        }
        let rel = &m.relation;
        let t = &m.target;
        let sum = (0..rel.k).fold(zero_vector(t.alg(), t.rank()), |acc, i| vec_add(&acc, &vec_scale(&rel.xs[i], &self.multipliers[i])));
        let in_numerator = span_membership(t.alg(), t.rank(), &self.multipliers, &t.module.gens.iter().chain(&t.module.sub).cloned().collect::<Vec<_>>())?;
        Ok(in_numerator.iter().all(Option::is_some) && t.equal(&sum, &m.track(&rel.us[rel.k]))?)
    }
}

/// Certifies that the image of `u_{k+1}` lies in `(x_1..x_k) M'`. The
/// multipliers `1_M X_i` are tried first.
pub fn check_trivialization(m: &Modification) -> Result<TrivializationCertificate> {
    let rel = &m.relation;
    let t = &m.target;
    let k = rel.k;
    let target = m.track(&rel.us[k]);
    if m.degree_bound >= 1 {
        let hint: Vec<Vector> = (0..k)
            .map(|i| {
                let mut e = vec![0u32; k];
                e[i] = 1;
                m.place(&m.source.one, &e).unwrap()
            })
            .collect();
        let cert = TrivializationCertificate { holds: true, multipliers: hint };
        if cert.verify(m)? {
            return Ok(cert);
        }
    }
    // general solve: target ∈ Σ x_i gens + sub
    let mut spanning = Vec::new();
    for x in &rel.xs[..k] {
        for g in &t.module.gens {
            spanning.push(vec_scale(x, g));
        }
    }
    let ng = spanning.len();
    spanning.extend(t.module.sub.iter().cloned());
    let sol = span_membership(t.alg(), t.rank(), &[target], &spanning)?.pop().unwrap();
    Ok(match sol {
        None => TrivializationCertificate { holds: false, multipliers: Vec::new() },
        Some(q) => {
            let gl = t.module.gens.len();
            let multipliers = (0..k).map(|i| combine(t.alg(), t.rank(), &q[i * gl..(i + 1) * gl], &t.module.gens)).collect();
            debug_assert!(ng == k * gl);
            TrivializationCertificate { holds: true, multipliers }
        }
    })
}

/// A-linear map `A^r -> T[c^{-1}]`, `e_j ↦ numerators[j] / c^denom_exp`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundedMap {
    pub c: PolyElement,
    pub denom_exp: u32,
    pub numerators: Vec<PolyElement>,
}

impl BoundedMap {
    /// Numerator of the image of `v` over `c^denom_exp`.
    pub fn apply(&self, v: &[PolyElement]) -> PolyElement {
        v.iter().zip(&self.numerators).fold(self.c.algebra().zero(), |acc, (a, b)| acc.add(&a.mul(b)))
    }

    /// Smallest `e <= denom_exp` such that every value lies in `c^{-e} T`,
    /// decided by membership of the numerators in `(c^(denom_exp - e))`.
    pub fn sharp_exponent(&self) -> Result<u32> {
        let mut best = self.denom_exp;
        for e in (0..self.denom_exp).rev() {
            let ce = self.c.pow((self.denom_exp - e) as u64);
            let all = self.numerators.iter().all(|x| solve_linear_membership(x, std::slice::from_ref(&ce)).map(|c| c.is_member()).unwrap_or(false));
            if !all {
                break;
            }
            best = e;
        }
        Ok(best)
    }
}

/// `a / c^ea == b / c^eb` in `T[c^{-1}]`, compared as `a c^eb == b c^ea`.
pub fn fractions_equal(c: &PolyElement, a: &PolyElement, ea: u32, b: &PolyElement, eb: u32) -> bool {
    a.mul(&c.pow(eb as u64)) == b.mul(&c.pow(ea as u64))
}

#[derive(Debug, Clone)]
pub struct Lemma51 {
    pub beta: BoundedMap,
    /// `t'_i` with `c t_{k+1} = Σ x_i t'_i`.
    pub t_prime: Vec<PolyElement>,
    pub bound: u32,
    pub square_commutes: bool,
    /// `β` vanishes on the denominator and on the relations of `M`.
    pub well_defined: bool,
    pub sharp_exponent: u32,
}

/// Extends `α: M -> T[c^{-1}]` to `β: M' -> T[c^{-1}]` by
/// `β(X_i) = t'_i / c^{N+1}`, where `c · c^N α(u_{k+1}) = Σ x_i t'_i`.
/// `β` kills the denominator when `α(1_M) = 1` (or `α(u_{k+1}) = 0`); this
/// is checked and reported as `well_defined`.
pub fn lemma51_beta(m: &Modification, alpha: &BoundedMap) -> Result<Lemma51> {
    let rel = &m.relation;
    let k = rel.k;
    let n = alpha.denom_exp;
    let d = m.degree_bound;
    let c = &alpha.c;
    let t_top = alpha.apply(&rel.us[k]);
    let ct = c.mul(&t_top);
    let cert = solve_linear_membership(&ct, &rel.xs[..k])?;
    let t_prime: Vec<PolyElement> = match cert.coefficients() {
        Some(q) => q.to_vec(),
        None => return Err(Error::AlmostCmViolation),
    };
    let bound = n * d + d + n;
    let r = m.source.rank();
    let mut numerators = Vec::with_capacity(r * m.slots.len());
    for mono in &m.slots {
        let deg: u32 = mono.iter().sum();
        let mut x = c.pow(((n + 1) * (d - deg)) as u64);
        for (i, a) in mono.iter().enumerate() {
            x = x.mul(&t_prime[i].pow(*a as u64));
        }
        for j in 0..r {
            numerators.push(alpha.numerators[j].mul(&x));
        }
    }
    let beta = BoundedMap { c: c.clone(), denom_exp: n + (n + 1) * d, numerators };
    let square_commutes = m
        .source
        .module
        .gens
        .iter()
        .all(|g| fractions_equal(c, &beta.apply(&m.track(g)), beta.denom_exp, &alpha.apply(g), n));
    let well_defined = m.target.module.sub.iter().all(|s| beta.apply(s).is_zero())
        && m.source.module.sub.iter().all(|s| alpha.apply(s).is_zero());
    let sharp_exponent = beta.sharp_exponent()?;
    Ok(Lemma51 { beta, t_prime, bound, square_commutes, well_defined, sharp_exponent })
}

/// `m M = M`, i.e. `M / m M = 0`.
pub fn is_bad(module: &PartialModule, maximal: &[PolyElement]) -> Result<bool> {
    let q = &module.module;
    let mut spanning: Vec<Vector> = Vec::new();
    for x in maximal {
        for g in &q.gens {
            spanning.push(vec_scale(x, g));
        }
    }
    spanning.extend(q.sub.iter().cloned());
    Ok(span_membership(&q.alg, q.rank, &q.gens, &spanning)?.iter().all(Option::is_some))
}

/// Generators of the maximal ideal of a local truncated algebra: `p` and
/// the smallest positive power of every variable.
pub fn maximal_ideal(alg: &Arc<TruncatedAlgebra>) -> Result<Vec<PolyElement>> {
    let mut out = vec![alg.constant(alg.p() as i128)];
    let den = alg.p().pow(alg.level());
    for v in alg.vars() {
        let x = alg.var_pow(&v.name, 1, den)?;
        if !x.is_zero() {
            out.push(x);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct ModificationSequence {
    pub start: PartialModule,
    pub steps: Vec<Modification>,
}

impl ModificationSequence {
    pub fn last(&self) -> &PartialModule {
        self.steps.last().map_or(&self.start, |m| &m.target)
    }

    pub fn is_bad(&self, maximal: &[PolyElement]) -> Result<bool> {
        is_bad(self.last(), maximal)
    }
}

/// Random relation `x_{k+1} u_{k+1} = Σ x_i u_i` in `M`, drawn from the
/// solution space of the linear system with `u_i` ranging over `M`.
pub fn random_relation<R: Rng>(m: &PartialModule, xs: &[PolyElement], rng: &mut R) -> Result<ParameterRelation> {
    let k = xs.len() - 1;
    let q = &m.module;
    let alg = &q.alg;
    let ring = ring_of(alg)?;
    let basis = alg.basis()?;
    let mut cols = Vec::new();
    let mut labels = Vec::new();
    for (i, x) in xs.iter().enumerate() {
        let sign = if i == k { x.clone() } else { x.neg() };
        for (j, g) in q.gens.iter().enumerate() {
            for mono in &basis {
                let v = vec_scale(&alg.monomial(mono.clone(), 1).mul(&sign), g);
                let col = flat(alg, &v)?;
                if col.iter().any(|c| *c != 0) {
                    cols.push(col);
                    labels.push((i, j, mono.clone()));
                }
            }
        }
    }
    let nl = cols.len();
    let (sc, _) = span_columns(alg, &q.sub)?;
    cols.extend(sc);
    let ker = kernel_columns(ring, &cols, &block_relations(alg, q.rank)?)?;
    let mut us = vec![zero_vector(alg, q.rank); k + 1];
    for kv in &ker {
        if !rng.gen_bool(0.5) {
            continue;
        }
        let s: i128 = rng.gen_range(1..ring.modulus.min(1 << 20));
        for ((i, j, mono), c) in labels.iter().zip(&kv[..nl]) {
            if *c != 0 {
                let coef = alg.monomial(mono.clone(), ring.mul(*c, s));
                us[*i] = vec_add(&us[*i], &vec_scale(&coef, &q.gens[*j]));
            }
        }
    }
    let rel = ParameterRelation { k, xs: xs.to_vec(), us };
    debug_assert!(rel.holds_in(m).unwrap_or(false));
    Ok(rel)
}

/// Runs `steps` random modifications starting from the algebra, with `k`
/// drawn from `0..sop.len()` and degree bound `n`.
pub fn random_sequence<R: Rng>(alg: &Arc<TruncatedAlgebra>, sop: &[PolyElement], steps: usize, n: u32, rng: &mut R) -> Result<ModificationSequence> {
    let start = PartialModule::algebra(alg);
    let mut seq = ModificationSequence { start, steps: Vec::new() };
    for _ in 0..steps {
        let k = rng.gen_range(0..sop.len());
        let rel = random_relation(seq.last(), &sop[..=k], rng)?;
        let m = build_modification(seq.last(), &rel, n)?;
        seq.steps.push(m);
    }
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::AlgebraBuilder;
    use crate::towers::{build_level, TowerSpec};
    use rand::SeedableRng;

    fn plane(p: u64) -> Arc<TruncatedAlgebra> {
        AlgebraBuilder::new(p).precision(1).degree_cap(4).vars(&["x1", "x2"]).build().unwrap()
    }

    fn koszul(alg: &Arc<TruncatedAlgebra>) -> ParameterRelation {
        let (x1, x2) = (alg.parse("x1").unwrap(), alg.parse("x2").unwrap());
        ParameterRelation { k: 1, xs: vec![x1.clone(), x2.clone()], us: vec![vec![x2], vec![x1]] }
    }

    #[test]
    fn counts_match_binomials() {
        assert_eq!(monomials_upto(2, 2).len() as u64, binomial(4, 2));
        assert_eq!(monomials_upto(0, 3).len(), 1);
        let a = plane(2);
        let m = build_modification(&PartialModule::algebra(&a), &koszul(&a), 2).unwrap();
        assert_eq!(m.slots.len() as u64, binomial(2 + 1, 1));
        assert_eq!(m.denominator_gens as u64, binomial(1 + 1, 1));
    }

    #[test]
    fn koszul_trivialization() {
        let a = plane(2);
        let m = build_modification(&PartialModule::algebra(&a), &koszul(&a), 2).unwrap();
        let cert = check_trivialization(&m).unwrap();
        assert!(cert.holds && cert.verify(&m).unwrap());
        assert_eq!(cert.multipliers[0], m.place(&[a.one()], &[1]).unwrap());
        // M' over F_2: numerator has 3 copies of A, denominator kills 2 independent F·X^a
        let len = m.target.length().unwrap();
        let dim = a.dimension().unwrap() as u32;
        assert!(len < 3 * dim && len > dim);
        assert!(!is_bad(&m.target, &maximal_ideal(&a).unwrap()).unwrap());
    }

    #[test]
    fn degree_zero_is_the_identity() {
        let a = plane(3);
        let m = build_modification(&PartialModule::algebra(&a), &koszul(&a), 0).unwrap();
        assert_eq!(m.target.length().unwrap(), a.dimension().unwrap() as u32);
        // u_2 = x1 ∈ (x1) already
        assert!(check_trivialization(&m).unwrap().holds);
        let rel = ParameterRelation { k: 1, xs: vec![a.parse("x1").unwrap(), a.parse("x2").unwrap()], us: vec![vec![a.zero()], vec![a.zero()]] };
        let mut bad = rel.clone();
        bad.us[1] = vec![a.parse("x2").unwrap()];
        assert!(matches!(build_modification(&PartialModule::algebra(&a), &bad, 1), Err(Error::RelationNotVerified)));
        let m = build_modification(&PartialModule::algebra(&a), &rel, 0).unwrap();
        assert!(check_trivialization(&m).unwrap().holds);
    }

    #[test]
    fn k_zero_kills_u() {
        let a = AlgebraBuilder::new(2).precision(2).degree_cap(3).vars(&["x", "y"]).relation("x*y", "0").unwrap().build().unwrap();
        let rel = ParameterRelation { k: 0, xs: vec![a.parse("x").unwrap()], us: vec![vec![a.parse("y").unwrap()]] };
        let m = build_modification(&PartialModule::algebra(&a), &rel, 1).unwrap();
        assert!(m.target.equal(&m.track(&[a.parse("y").unwrap()]), &zero_vector(&a, m.target.rank())).unwrap());
        assert!(check_trivialization(&m).unwrap().holds);
    }

    #[test]
    fn beta_on_tower_level_one() {
        let l = build_level(&TowerSpec::unramified(2, 2, 4, 2), 1).unwrap();
        let a = &l.alg;
        let c = l.pi(1).unwrap();
        let (p, x) = (a.constant(2), a.parse("x2").unwrap());
        let rel = ParameterRelation { k: 1, xs: vec![p.clone(), x.clone()], us: vec![vec![x.clone()], vec![p.clone()]] };
        let m = build_modification(&PartialModule::algebra(a), &rel, 2).unwrap();
        let alpha = BoundedMap { c: c.clone(), denom_exp: 1, numerators: vec![c.clone()] };
        let out = lemma51_beta(&m, &alpha).unwrap();
        assert_eq!(out.bound, 5);
        assert!(out.beta.denom_exp <= out.bound);
        assert!(out.square_commutes && out.well_defined);
        // both paths, evaluated independently on the generator 1
        let lhs = out.beta.apply(&m.track(&[a.one()]));
        assert!(fractions_equal(&c, &lhs, out.beta.denom_exp, &a.one(), 0));
    }

    #[test]
    fn beta_of_zero_map() {
        let l = build_level(&TowerSpec::unramified(2, 2, 4, 2), 1).unwrap();
        let a = &l.alg;
        let alpha = BoundedMap { c: l.pi(1).unwrap(), denom_exp: 1, numerators: vec![a.zero()] };
        let rel = ParameterRelation { k: 1, xs: vec![a.constant(2), a.parse("x2").unwrap()], us: vec![vec![a.parse("x2").unwrap()], vec![a.constant(2)]] };
        let m = build_modification(&PartialModule::algebra(a), &rel, 1).unwrap();
        let out = lemma51_beta(&m, &alpha).unwrap();
        assert!(out.beta.numerators.iter().all(|x| x.is_zero()));
        assert!(out.square_commutes && out.well_defined && out.beta.denom_exp <= out.bound);
    }

    #[test]
    fn hypothesis_violation() {
        let a = AlgebraBuilder::new(2).precision(2).degree_cap(3).vars(&["x", "y"]).relation("x*y", "0").unwrap().build().unwrap();
        let rel = ParameterRelation { k: 0, xs: vec![a.parse("x").unwrap()], us: vec![vec![a.parse("y").unwrap()]] };
        let m = build_modification(&PartialModule::algebra(&a), &rel, 1).unwrap();
        let alpha = BoundedMap { c: a.one(), denom_exp: 1, numerators: vec![a.one()] };
        assert!(matches!(lemma51_beta(&m, &alpha), Err(Error::AlmostCmViolation)));
    }

    #[test]
    fn random_sequences_are_not_bad() {
        let l = build_level(&TowerSpec::unramified(2, 2, 2, 1), 1).unwrap();
        let sop = [l.alg.constant(2), l.alg.parse("x2").unwrap()];
        let mx = maximal_ideal(&l.alg).unwrap();
        for seed in 0..5 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let seq = random_sequence(&l.alg, &sop, 2, 1, &mut rng).unwrap();
            for step in &seq.steps {
                assert!(check_trivialization(step).unwrap().holds);
            }
            assert!(!seq.is_bad(&mx).unwrap(), "seed {seed}");
        }
        assert!(is_bad(&PartialModule::algebra(&l.alg).clone_zero(), &mx).unwrap());
    }

    impl PartialModule {
        fn clone_zero(&self) -> Self {
            let mut z = self.clone();
            z.module.sub = z.module.gens.clone();
            z
        }
    }
}
