//! Direct-summand diagnostics for module-finite algebras `R -> S`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exactalg::module::{combine, span_membership, unit_vector, vec_add, vec_scale, zero_vector, Vector};
use crate::exactalg::{ring_of, solve_columns, solve_linear_membership, MembershipCertificate, PolyElement, Relation, TruncatedAlgebra};

/// Cap on the rank checked for associativity on all basis triples.
const ASSOC_CHECK_RANK: usize = 8;

/// `S = R^r / relations` with an R-bilinear multiplication on the basis.
#[derive(Debug, Clone)]
pub struct FiniteAlgebra {
    pub base: Arc<TruncatedAlgebra>,
    pub rank: usize,
    /// `table[i][j] = e_i e_j`.
    pub table: Vec<Vec<Vector>>,
    pub relations: Vec<Vector>,
    pub one: Vector,
    /// `h` for monogenic presentations `R[z]/(h)`, low degree first.
    pub monic: Option<Vec<PolyElement>>,
}

impl FiniteAlgebra {
    /// `R[z]/(h)` with `h` monic, coefficients listed from the constant term.
    pub fn monogenic(base: &Arc<TruncatedAlgebra>, h: &[PolyElement]) -> Result<Self> {
        let n = h.len().checked_sub(1).ok_or(Error::NotMonic)?;
        if n == 0 || h[n] != base.one() {
            return Err(Error::NotMonic);
        }
        // z^k for k < 2n - 1 as coordinate vectors
        let mut powers: Vec<Vector> = (0..n).map(|i| unit_vector(base, n, i)).collect();
        for _ in n..2 * n - 1 {
            let last = powers.last().unwrap().clone();
            // z * last: shift, then replace z^n by -Σ h_i z^i
            let mut next = zero_vector(base, n);
            for i in 0..n - 1 {
                next[i + 1] = last[i].clone();
            }
            let top = &last[n - 1];
            for i in 0..n {
                next[i] = next[i].sub(&top.mul(&h[i]));
            }
            powers.push(next);
        }
        let table = (0..n).map(|i| (0..n).map(|j| powers[i + j].clone()).collect()).collect();
        Ok(FiniteAlgebra { base: base.clone(), rank: n, table, relations: Vec::new(), one: unit_vector(base, n, 0), monic: Some(h.to_vec()) })
    }

    /// `S` free with the given table and `1_S = e_0`.
    pub fn from_table(base: &Arc<TruncatedAlgebra>, table: Vec<Vec<Vector>>, relations: Vec<Vector>) -> Result<Self> {
        let rank = table.len();
        if rank == 0 || table.iter().any(|row| row.len() != rank || row.iter().any(|v| v.len() != rank)) {
            return Err(Error::InvalidAlgebra("multiplication table must be r x r with vectors of length r".into()));
        }
        let s = FiniteAlgebra { base: base.clone(), rank, table, relations, one: unit_vector(base, rank, 0), monic: None };
        s.check_table()?;
        Ok(s)
    }

    /// Product of two elements, before reduction modulo the relations.
    pub fn mul(&self, a: &[PolyElement], b: &[PolyElement]) -> Vector {
        let mut out = zero_vector(&self.base, self.rank);
        for (i, ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.iter().enumerate() {
                if bj.is_zero() {
                    continue;
                }
                out = vec_add(&out, &vec_scale(&ai.mul(bj), &self.table[i][j]));
            }
        }
        out
    }

    /// `R`-image `r · 1_S`.
    pub fn scalar(&self, r: &PolyElement) -> Vector {
        vec_scale(r, &self.one)
    }

    pub fn equal(&self, a: &[PolyElement], b: &[PolyElement]) -> Result<bool> {
        let d: Vector = a.iter().zip(b).map(|(x, y)| x.sub(y)).collect();
        if d.iter().all(|x| x.is_zero()) {
            return Ok(true);
        }
        Ok(span_membership(&self.base, self.rank, &[d], &self.relations)?[0].is_some())
    }

    /// Unit and associativity laws on basis elements (all triples up to the
    /// rank cap).
    pub fn check_table(&self) -> Result<()> {
        let e = |i| unit_vector(&self.base, self.rank, i);
        for i in 0..self.rank {
            if !self.equal(&self.mul(&self.one, &e(i)), &e(i))? || !self.equal(&self.mul(&e(i), &self.one), &e(i))? {
                return Err(Error::InvalidAlgebra(format!("1_S is not a unit on e_{i}")));
            }
        }
        if self.rank > ASSOC_CHECK_RANK {
            return Ok(());
        }
        for i in 0..self.rank {
            for j in 0..self.rank {
                for k in 0..self.rank {
                    let l = self.mul(&self.mul(&e(i), &e(j)), &e(k));
                    let r = self.mul(&e(i), &self.mul(&e(j), &e(k)));
                    if !self.equal(&l, &r)? {
                        return Err(Error::InvalidAlgebra(format!("multiplication is not associative on (e_{i}, e_{j}, e_{k})")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Refuses bases with zero divisors imposed by vanishing relations.
fn require_regular_base(base: &TruncatedAlgebra) -> Result<()> {
    if base.relations().iter().any(|r| matches!(r, Relation::Vanishing(_))) {
        return Err(Error::Precondition("the monomial criterion needs a regular base".into()));
    }
    Ok(())
}

/// `(x_1 ⋯ x_d)^k ∈ (x_1^{k+1}, ..., x_d^{k+1}) S`, decided over `R`.
#[derive(Debug, Clone)]
pub struct MonomialCertificate {
    pub k: u32,
    pub target: Vector,
    /// `R`-spanning set of the ideal: `x_i^{k+1} e_j` and the relations of `S`.
    pub spanning: Vec<Vector>,
    pub coefficients: Option<Vec<PolyElement>>,
    pub truncation: (u32, u32, u32),
}

impl MonomialCertificate {
    pub fn is_member(&self) -> bool {
        self.coefficients.is_some()
    }

    pub fn verify(&self) -> bool {
        match &self.coefficients {
            None => true,
            Some(q) => {
                let alg = self.target[0].algebra();
                combine(alg, self.target.len(), q, &self.spanning) == self.target
            }
        }
    }
}

pub fn monomial_check(s: &FiniteAlgebra, sop: &[PolyElement], k_max: u32) -> Result<Vec<MonomialCertificate>> {
    require_regular_base(&s.base)?;
    let prod = sop.iter().fold(s.base.one(), |acc, x| acc.mul(x));
    let mut out = Vec::new();
    for k in 1..=k_max {
        let target = s.scalar(&prod.pow(k as u64));
        let mut spanning = Vec::new();
        for x in sop {
            let xk = x.pow(k as u64 + 1);
            for j in 0..s.rank {
                spanning.push(vec_scale(&xk, &unit_vector(&s.base, s.rank, j)));
            }
        }
        spanning.extend(s.relations.iter().cloned());
        let coefficients = span_membership(&s.base, s.rank, std::slice::from_ref(&target), &spanning)?.pop().unwrap();
        out.push(MonomialCertificate { k, target, spanning, coefficients, truncation: s.base.truncation() });
    }
    Ok(out)
}

/// `φ: S -> R`, `e_j ↦ values[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Retraction {
    pub values: Vec<PolyElement>,
}

impl Retraction {
    pub fn apply(&self, v: &[PolyElement]) -> PolyElement {
        v.iter().zip(&self.values).fold(self.values[0].algebra().zero(), |acc, (a, b)| acc.add(&a.mul(b)))
    }

    /// Well defined on `S` and `φ(1_S) = 1`.
    pub fn verify(&self, s: &FiniteAlgebra) -> bool {
        s.relations.iter().all(|r| self.apply(r).is_zero()) && self.apply(&s.one) == s.base.one()
    }
}

/// Solves for an `R`-linear `φ` killing the relations with `φ(1_S) = 1`.
pub fn retraction_solver(s: &FiniteAlgebra) -> Result<Option<Retraction>> {
    let base = &s.base;
    let ring = ring_of(base)?;
    let basis = base.basis()?;
    let dim = basis.len();
    let rows = s.relations.len() + 1;
    // unknown (j, m): coefficient of m in φ(e_j)
    let mut cols = Vec::new();
    let mut labels = Vec::new();
    for j in 0..s.rank {
        for m in &basis {
            let mono = base.monomial(m.clone(), 1);
            let mut col = Vec::with_capacity(rows * dim);
            for r in s.relations.iter().chain(std::iter::once(&s.one)) {
                col.extend(base.coords(&r[j].mul(&mono))?);
            }
            cols.push(col);
            labels.push((j, m.clone()));
        }
    }
    let mut target = vec![0i128; rows * dim];
    let one = base.coords(&base.one())?;
    target[(rows - 1) * dim..].copy_from_slice(&one);
    let mut rels = Vec::new();
    for b in 0..rows {
        for r in base.additive_relations()? {
            let mut v = vec![0i128; rows * dim];
            v[b * dim..(b + 1) * dim].copy_from_slice(&r);
            rels.push(v);
        }
    }
    let sol = solve_columns(ring, &cols, &rels, &[target])?.pop().unwrap();
    Ok(sol.map(|x| {
        let mut values = vec![base.zero(); s.rank];
        for ((j, m), c) in labels.iter().zip(x) {
            if c != 0 {
                values[*j] = values[*j].add(&base.monomial(m.clone(), c));
            }
        }
        Retraction { values }
    }))
}

fn determinant(m: &[Vec<PolyElement>]) -> PolyElement {
    let n = m.len();
    let alg = m[0][0].algebra();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = alg.zero();
    for (j, a) in m[0].iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        let minor: Vec<Vec<PolyElement>> =
            m[1..].iter().map(|row| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, x)| x.clone()).collect()).collect();
        let term = a.mul(&determinant(&minor));
        acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
    }
    acc
}

/// Resultant of two polynomials over `R` (coefficients from the constant
/// term) via the Sylvester determinant.
pub fn resultant(f: &[PolyElement], g: &[PolyElement]) -> PolyElement {
    let (m, n) = (f.len() - 1, g.len() - 1);
    let alg = f[0].algebra();
    let size = m + n;
    let mut rows = Vec::with_capacity(size);
    for i in 0..n {
        let mut row = vec![alg.zero(); size];
        for (k, c) in f.iter().rev().enumerate() {
            row[i + k] = c.clone();
        }
        rows.push(row);
    }
    for i in 0..m {
        let mut row = vec![alg.zero(); size];
        for (k, c) in g.iter().rev().enumerate() {
            row[i + k] = c.clone();
        }
        rows.push(row);
    }
    determinant(&rows)
}

/// `disc(h) = (-1)^{n(n-1)/2} Res(h, h')` for monic `h` of degree `n`.
pub fn discriminant(h: &[PolyElement]) -> Result<PolyElement> {
    let n = h.len().checked_sub(1).ok_or(Error::NotMonic)?;
    if n == 0 || h[n] != h[0].algebra().one() {
        return Err(Error::NotMonic);
    }
    let dh: Vec<PolyElement> = (1..=n).map(|i| h[i].scale(i as i128)).collect();
    let r = resultant(h, &dh);
    Ok(if (n * (n - 1) / 2) % 2 == 1 { r.neg() } else { r })
}

#[derive(Debug, Clone)]
pub enum EtaleVerdict {
    /// `p^a ∈ (disc h)`.
    Etale { a: u32, certificate: MembershipCertificate },
    NotEtaleAwayFromP { a_max: u32 },
}

impl EtaleVerdict {
    pub fn name(&self) -> &'static str {
        match self {
            EtaleVerdict::Etale { .. } => "Etale",
            EtaleVerdict::NotEtaleAwayFromP { .. } => "NotEtaleAwayFromP",
        }
    }
}

#[derive(Debug, Clone)]
pub struct EtaleReport {
    pub discriminant: PolyElement,
    pub verdict: EtaleVerdict,
}

/// Whether `R[1/p] -> S[1/p]` is étale for `S = R[z]/(h)`: some `p^a` lies in
/// the discriminant ideal. `p^a` vanishes once `a >= N`, so `a` is capped at
/// `N - 1`.
pub fn etale_away_from_p(s: &FiniteAlgebra, a_max: u32) -> Result<EtaleReport> {
    let h = s.monic.as_ref().ok_or(Error::NotMonic)?;
    let disc = discriminant(h)?;
    let base = &s.base;
    let cap = a_max.min(base.precision().saturating_sub(1));
    for a in 0..=cap {
        let pa = base.constant((base.p() as i128).pow(a));
        let cert = solve_linear_membership(&pa, std::slice::from_ref(&disc))?;
        if cert.is_member() {
            return Ok(EtaleReport { discriminant: disc, verdict: EtaleVerdict::Etale { a, certificate: cert } });
        }
    }
    Ok(EtaleReport { discriminant: disc, verdict: EtaleVerdict::NotEtaleAwayFromP { a_max: cap } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::AlgebraBuilder;

    fn base(p: u64, n: u32, d: u32) -> Arc<TruncatedAlgebra> {
        AlgebraBuilder::new(p).precision(n).degree_cap(d).var("x").build().unwrap()
    }

    fn quad(r: &Arc<TruncatedAlgebra>, c: &str) -> FiniteAlgebra {
        FiniteAlgebra::monogenic(r, &[r.parse(c).unwrap().neg(), r.zero(), r.one()]).unwrap()
    }

    #[test]
    fn ramified_quadratic_cover() {
        let r = base(3, 6, 6);
        let s = quad(&r, "3*(1 + x)");
        let rep = etale_away_from_p(&s, 5).unwrap();
        assert_eq!(rep.discriminant, r.parse("12*(1 + x)").unwrap());
        assert!(matches!(rep.verdict, EtaleVerdict::Etale { a: 1, .. }));
        let sop = [r.constant(3), r.parse("x").unwrap()];
        for c in monomial_check(&s, &sop, 3).unwrap() {
            assert!(!c.is_member(), "k={}", c.k);
        }
        let phi = retraction_solver(&s).unwrap().unwrap();
        assert!(phi.verify(&s));
        assert_eq!(phi.apply(&s.one), r.one());
    }

    #[test]
    fn discriminants() {
        let r = base(3, 4, 4);
        assert_eq!(discriminant(&[r.parse("-x").unwrap(), r.zero(), r.one()]).unwrap(), r.parse("4*x").unwrap());
        assert!(matches!(etale_away_from_p(&quad(&r, "x"), 3).unwrap().verdict, EtaleVerdict::NotEtaleAwayFromP { .. }));
        assert!(matches!(etale_away_from_p(&quad(&r, "1"), 3).unwrap().verdict, EtaleVerdict::Etale { a: 0, .. }));
        assert!(matches!(FiniteAlgebra::monogenic(&r, &[r.one(), r.constant(2)]), Err(Error::NotMonic)));
        // cubic: disc(z^3 + a z + b) = -4a^3 - 27b^2
        let (a, b) = (r.parse("x").unwrap(), r.parse("1 + x").unwrap());
        let d = discriminant(&[b.clone(), a.clone(), r.zero(), r.one()]).unwrap();
        assert_eq!(d, a.pow(3).scale(-4).sub(&b.pow(2).scale(27)));
    }

    #[test]
    fn base_itself_and_degenerate_cover() {
        let r = base(3, 6, 6);
        let s = FiniteAlgebra::from_table(&r, vec![vec![vec![r.one()]]], Vec::new()).unwrap();
        let sop = [r.constant(3), r.parse("x").unwrap()];
        assert!(!monomial_check(&s, &sop, 1).unwrap()[0].is_member());
        let dead = FiniteAlgebra::from_table(&r, vec![vec![vec![r.one()]]], vec![vec![r.constant(3)]]).unwrap();
        let c = monomial_check(&dead, &sop, 1).unwrap().pop().unwrap();
        assert!(c.is_member() && c.verify());
    }

    #[test]
    fn quotient_cover_has_no_retraction() {
        let r = base(2, 3, 3);
        let s = FiniteAlgebra::from_table(&r, vec![vec![vec![r.one()]]], vec![vec![r.parse("x").unwrap()]]).unwrap();
        assert_eq!(retraction_solver(&s).unwrap(), None);
        let free = FiniteAlgebra::monogenic(&r, &[r.parse("x").unwrap(), r.one(), r.one()]).unwrap();
        let phi = retraction_solver(&free).unwrap().unwrap();
        assert!(phi.verify(&free));
    }
}
