use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exactalg::algebra::TruncatedAlgebra;
use crate::exactalg::linalg::{inverse_mod, Elimination, ModRing};
use crate::exactalg::monomial::Monomial;
use crate::exactalg::poly::{same_ambient, PolyElement};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Membership {
    /// Coefficients `q_i` with `Σ q_i g_i = target`.
    Member(Vec<PolyElement>),
    /// No solution exists in the truncated model.
    NonMemberAtTruncation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MembershipCertificate {
    pub target: PolyElement,
    pub generators: Vec<PolyElement>,
    pub verdict: Membership,
}

impl MembershipCertificate {
    pub fn is_member(&self) -> bool {
        matches!(self.verdict, Membership::Member(_))
    }

    pub fn coefficients(&self) -> Option<&[PolyElement]> {
        match &self.verdict {
            Membership::Member(q) => Some(q),
            Membership::NonMemberAtTruncation => None,
        }
    }

    /// Recomputes `Σ q_i g_i` and compares with the target. A non-membership
    /// verdict has nothing to re-verify and returns `true`.
    pub fn verify(&self) -> bool {
        match &self.verdict {
            Membership::NonMemberAtTruncation => true,
            Membership::Member(q) => {
                q.len() == self.generators.len()
                    && combine(&self.target.algebra().zero(), q, &self.generators).ok().as_ref() == Some(&self.target)
            }
        }
    }

    /// `(N, n, D)` of the ambient algebra.
    pub fn truncation(&self) -> (u32, u32, u32) {
        self.target.algebra().truncation()
    }
}

fn combine(zero: &PolyElement, q: &[PolyElement], g: &[PolyElement]) -> Result<PolyElement> {
    let mut acc = zero.clone();
    for (a, b) in q.iter().zip(g) {
        acc = acc.try_add(&a.try_mul(b)?)?;
    }
    Ok(acc)
}

pub(crate) fn ring_of(alg: &TruncatedAlgebra) -> Result<ModRing> {
    ModRing::new(alg.p(), alg.precision())
}

/// Columns `coords(m * g)` for every basis monomial `m`, labelled by `m`.
pub(crate) fn multiples(g: &PolyElement) -> Result<Vec<(Monomial, Vec<i128>)>> {
    let alg = g.algebra();
    let mut out = Vec::new();
    for m in alg.basis_data()?.monomials.iter() {
        let mg = alg.monomial(m.clone(), 1).mul(g);
        if !mg.is_zero() {
            out.push((m.clone(), alg.coords(&mg)?));
        }
    }
    Ok(out)
}

/// Solves `Σ x_j cols_j + (additive relations) = target` for each target.
/// Returns the `x` part of a solution, or `None`.
pub(crate) fn solve_columns(
    ring: ModRing,
    cols: &[Vec<i128>],
    relations: &[Vec<i128>],
    targets: &[Vec<i128>],
) -> Result<Vec<Option<Vec<i128>>>> {
    let dim = targets.first().or(cols.first()).or(relations.first()).map_or(0, |c| c.len());
    let ncols = cols.len() + relations.len();
    let width = ncols + targets.len();
    let mut rows = vec![vec![0i128; width]; dim];
    for (j, c) in cols.iter().chain(relations).chain(targets).enumerate() {
        for (i, v) in c.iter().enumerate() {
            rows[i][j] = *v;
        }
    }
    let e = Elimination::new(ring, rows, ncols)?;
    Ok((0..targets.len()).map(|t| e.solve_augmented(t).map(|mut x| {
        x.truncate(cols.len());
        x
    })).collect())
}

/// Kernel of `x -> Σ x_j cols_j` modulo the additive relations, restricted
/// to the `x` coordinates.
pub(crate) fn kernel_columns(ring: ModRing, cols: &[Vec<i128>], relations: &[Vec<i128>]) -> Result<Vec<Vec<i128>>> {
    let dim = cols.first().or(relations.first()).map_or(0, |c| c.len());
    let ncols = cols.len() + relations.len();
    let mut rows = vec![vec![0i128; ncols]; dim];
    for (j, c) in cols.iter().chain(relations).enumerate() {
        for (i, v) in c.iter().enumerate() {
            rows[i][j] = *v;
        }
    }
    let e = Elimination::new(ring, rows, ncols)?;
    Ok(e.kernel().into_iter().map(|mut x| {
        x.truncate(cols.len());
        x
    }).filter(|x| x.iter().any(|c| *c != 0)).collect())
}

fn certificates(target_elems: &[PolyElement], gens: &[PolyElement]) -> Result<Vec<Membership>> {
    let alg = match target_elems.first() {
        Some(t) => t.algebra().clone(),
        None => return Ok(Vec::new()),
    };
    for x in target_elems.iter().chain(gens) {
        if !same_ambient(x.algebra(), &alg) {
            return Err(Error::AmbientMismatch);
        }
    }
    let mut cols = Vec::new();
    let mut labels = Vec::new();
    for (i, g) in gens.iter().enumerate() {
        for (m, c) in multiples(g)? {
            cols.push(c);
            labels.push((i, m));
        }
    }
    let targets: Vec<Vec<i128>> = target_elems.iter().map(|t| alg.coords(t)).collect::<Result<_>>()?;
    let rels = alg.additive_relations()?;
    let sols = solve_columns(ring_of(&alg)?, &cols, &rels, &targets)?;
    Ok(sols
        .into_iter()
        .map(|s| match s {
            None => Membership::NonMemberAtTruncation,
            Some(x) => {
                let mut q = vec![alg.zero(); gens.len()];
                for ((i, m), c) in labels.iter().zip(x) {
                    if c != 0 {
                        q[*i] = q[*i].add(&alg.monomial(m.clone(), c));
                    }
                }
                Membership::Member(q)
            }
        })
        .collect())
}

/// Decides `target ∈ (gens)` in the truncated algebra by a linear solve over
/// `Z/p^N` with unknown coefficients ranging over the monomial basis.
pub fn solve_linear_membership(target: &PolyElement, gens: &[PolyElement]) -> Result<MembershipCertificate> {
    let verdict = if gens.is_empty() {
        if target.is_zero() {
            Membership::Member(Vec::new())
        } else {
            Membership::NonMemberAtTruncation
        }
    } else {
        certificates(std::slice::from_ref(target), gens)?.pop().unwrap()
    };
    let cert = MembershipCertificate { target: target.clone(), generators: gens.to_vec(), verdict };
    debug_assert!(cert.verify());
    Ok(cert)
}

/// Membership of several targets in the same ideal with one elimination.
pub fn solve_linear_membership_many(targets: &[PolyElement], gens: &[PolyElement]) -> Result<Vec<MembershipCertificate>> {
    if gens.is_empty() {
        return targets.iter().map(|t| solve_linear_membership(t, gens)).collect();
    }
    let verdicts = certificates(targets, gens)?;
    Ok(targets
        .iter()
        .zip(verdicts)
        .map(|(t, verdict)| MembershipCertificate { target: t.clone(), generators: gens.to_vec(), verdict })
        .collect())
}

/// Checks caller-supplied coefficients; falls back to the solver when they do
/// not combine to the target.
pub fn certify_membership(target: &PolyElement, gens: &[PolyElement], hint: Vec<PolyElement>) -> Result<MembershipCertificate> {
    let cert = MembershipCertificate { target: target.clone(), generators: gens.to_vec(), verdict: Membership::Member(hint) };
    if cert.verify() {
        Ok(cert)
    } else {
        solve_linear_membership(target, gens)
    }
}

const SERIES_ROUNDS: usize = 1024;
const NEWTON_ROUNDS: usize = 64;

/// Returns the inverse when `e` is a unit.
pub fn is_unit(e: &PolyElement) -> Result<Option<PolyElement>> {
    let alg = e.algebra();
    let one = alg.one();
    if let Some(c0) = inverse_mod(e.constant_term(), alg.modulus()) {
        // e = c0 (1 + a); when a is nilpotent the geometric series ends
        let neg_a = one.sub(&e.scale(c0));
        let mut term = one.clone();
        let mut acc = one.clone();
        for _ in 0..SERIES_ROUNDS {
            term = term.mul(&neg_a);
            if term.is_zero() {
                break;
            }
            acc = acc.add(&term);
        }
        let y = acc.scale(c0);
        if e.mul(&y) == one {
            return Ok(Some(y));
        }
        let two = alg.constant(2);
        let mut y = alg.constant(c0);
        for _ in 0..NEWTON_ROUNDS {
            let ey = e.mul(&y);
            if ey == one {
                return Ok(Some(y));
            }
            y = y.mul(&two.sub(&ey));
        }
    }
    let cert = solve_linear_membership(&one, std::slice::from_ref(e))?;
    Ok(cert.coefficients().map(|q| q[0].clone()))
}

/// Colon module `(I : f) / I`.
#[derive(Debug, Clone)]
pub struct ColonModule {
    /// Classes in the raw colon that are not in `I`, in the ambient algebra.
    /// Includes elements killed by `f` only because of the truncation.
    pub raw: Vec<PolyElement>,
    /// The coarser truncation in which boundary artifacts vanish.
    pub window: Arc<TruncatedAlgebra>,
    /// Images of `I`'s generators in the window.
    pub window_gens: Vec<PolyElement>,
    /// Images in the window of the raw classes that stay outside `I` there.
    pub basis: Vec<PolyElement>,
}

/// Coarser truncation `(N - δ_N, D - δ_D)` where `δ_D` bounds the degree of
/// `f` and `δ_N` the p-adic valuation of its coefficients.
pub fn colon_window(f: &PolyElement) -> Result<Arc<TruncatedAlgebra>> {
    let alg = f.algebra();
    let dd = f.max_degree().ceil() as u32;
    let p = alg.p() as i128;
    let dn = f
        .terms()
        .values()
        .map(|c| crate::exactalg::linalg::valuation(*c, p, alg.precision()))
        .max()
        .unwrap_or(0);
    if dd > alg.degree_cap() || dn >= alg.requested_precision().max(alg.precision()) {
        return Err(Error::PrecisionLoss { needed: dd.max(dn) + 1, available: alg.degree_cap() });
    }
    let n = if alg.is_ramified() { alg.requested_precision() } else { alg.precision() - dn };
    alg.coarsen(n, alg.degree_cap() - dd)
}

/// Kernel of multiplication by `divisor` on `A / (gens)`.
pub fn colon_submodule(gens: &[PolyElement], divisor: &PolyElement) -> Result<ColonModule> {
    let alg = divisor.algebra().clone();
    let ring = ring_of(&alg)?;
    let rels = alg.additive_relations()?;
    let basis = alg.basis()?;
    let mut cols: Vec<Vec<i128>> = Vec::new();
    for m in &basis {
        cols.push(alg.coords(&alg.monomial(m.clone(), 1).mul(divisor))?);
    }
    let nb = cols.len();
    for g in gens {
        for (_, c) in multiples(g)? {
            cols.push(c.into_iter().map(|v| ring.reduce(-v)).collect());
        }
    }
    let ker = kernel_columns(ring, &cols, &rels)?;
    let candidates: Vec<PolyElement> =
        ker.iter().map(|x| alg.from_coords(&x[..nb])).collect::<Result<Vec<_>>>()?.into_iter().filter(|e| !e.is_zero()).collect();
    let raw = outside_ideal(&candidates, gens)?;

    let window = colon_window(divisor)?;
    let window_gens: Vec<PolyElement> = gens.iter().map(|g| g.transport(&window)).collect::<Result<_>>()?;
    let projected: Vec<PolyElement> = raw.iter().map(|b| b.transport(&window)).collect::<Result<_>>()?;
    let basis = outside_ideal(&projected, &window_gens)?;
    Ok(ColonModule { raw, window, window_gens, basis })
}

fn outside_ideal(cands: &[PolyElement], gens: &[PolyElement]) -> Result<Vec<PolyElement>> {
    let cands: Vec<PolyElement> = cands.iter().filter(|c| !c.is_zero()).cloned().collect();
    if cands.is_empty() {
        return Ok(Vec::new());
    }
    let certs = solve_linear_membership_many(&cands, gens)?;
    let mut out: Vec<PolyElement> = Vec::new();
    for (c, cert) in cands.into_iter().zip(certs) {
        if !cert.is_member() && !out.contains(&c) {
            out.push(c);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::AlgebraBuilder;
    use proptest::prelude::*;

    fn power_series(p: u64, n: u32, d: u32) -> Arc<TruncatedAlgebra> {
        AlgebraBuilder::new(p).precision(n).degree_cap(d).var("x").build().unwrap()
    }

    #[test]
    fn simple_memberships() {
        let a = power_series(3, 4, 4);
        let x = a.parse("x").unwrap();
        let c = solve_linear_membership(&a.parse("x^2").unwrap(), &[x.clone()]).unwrap();
        assert!(c.is_member() && c.verify());
        // coefficient of x would have to be divisible by p^2
        let c = solve_linear_membership(&a.parse("3*x").unwrap(), &[a.parse("9").unwrap(), a.parse("x^2").unwrap()]).unwrap();
        assert_eq!(c.verdict, Membership::NonMemberAtTruncation);
        let c = solve_linear_membership(&a.parse("3").unwrap(), &[a.parse("12*(1+x)").unwrap()]).unwrap();
        let q = &c.coefficients().unwrap()[0];
        // q is an inverse of 4(1+x) modulo p^(N-1)
        let err = q.mul(&a.parse("4*(1+x)").unwrap()).sub(&a.one());
        assert!(err.exact_div_p(3).is_ok());
    }

    #[test]
    fn geometric_series_inverse() {
        let a = power_series(2, 5, 6);
        let inv = is_unit(&a.parse("1 + x").unwrap()).unwrap().unwrap();
        let x = a.parse("x").unwrap();
        let expected = (0..=6u64).fold(a.zero(), |acc, i| acc.add(&x.pow(i).scale(if i % 2 == 0 { 1 } else { -1 })));
        assert_eq!(inv, expected);
        assert_eq!(is_unit(&a.parse("2").unwrap()).unwrap(), None);
    }

    #[test]
    fn colon_examples() {
        let a = power_series(3, 3, 5);
        let c = colon_submodule(&[a.parse("3").unwrap()], &a.parse("x").unwrap()).unwrap();
        assert!(c.basis.is_empty());
        assert!(!c.raw.is_empty(), "x^D mod p is a truncation artifact");
        let b = AlgebraBuilder::new(2).precision(1).degree_cap(4).vars(&["x", "y"]).relation("x*y", "0").unwrap().build().unwrap();
        let c = colon_submodule(&[], &b.parse("x").unwrap()).unwrap();
        let y = b.parse("y").unwrap().transport(&c.window).unwrap();
        assert!(c.basis.contains(&y));
        let c = colon_submodule(&[b.parse("x").unwrap()], &b.one()).unwrap();
        assert!(c.basis.is_empty() && c.raw.is_empty());
    }

    /// Raw colon against brute force over all elements of a tiny ring.
    #[test]
    fn colon_matches_enumeration() {
        let a = AlgebraBuilder::new(2).precision(2).degree_cap(2).vars(&["x", "y"]).relation("x*y", "0").unwrap().build().unwrap();
        let basis = a.basis().unwrap();
        let gens = [a.parse("2*x").unwrap()];
        let f = a.parse("x + 2").unwrap();
        let total = 4usize.pow(basis.len() as u32);
        let mut brute_nontrivial = false;
        for idx in 0..total {
            let mut k = idx;
            let coords: Vec<i128> = (0..basis.len()).map(|_| {
                let v = (k % 4) as i128;
                k /= 4;
                v
            }).collect();
            let b = a.from_coords(&coords).unwrap();
            if solve_linear_membership(&b.mul(&f), &gens).unwrap().is_member() && !solve_linear_membership(&b, &gens).unwrap().is_member() {
                brute_nontrivial = true;
                break;
            }
        }
        let c = colon_submodule(&gens, &f).unwrap();
        assert_eq!(c.raw.is_empty(), !brute_nontrivial);
        for b in &c.raw {
            assert!(solve_linear_membership(&b.mul(&f), &gens).unwrap().is_member());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn certificates_reverify(cs in proptest::collection::vec(-20i128..20, 8), k in 0u32..3) {
            let a = power_series(3, 4, 3);
            let g1 = a.parse(&format!("{}*x + {}", cs[0], cs[1])).unwrap();
            let g2 = a.parse(&format!("{}*x^2 + {}", cs[2], 3i128.pow(k))).unwrap();
            let t = a.parse(&format!("{}*x^3 + {}*x + {}", cs[3], cs[4], cs[5])).unwrap();
            let cert = solve_linear_membership(&t, &[g1.clone(), g2.clone()]).unwrap();
            prop_assert!(cert.verify());
            let inside = g1.mul(&a.parse(&format!("{} + x", cs[6])).unwrap()).add(&g2.scale(cs[7]));
            let cert = solve_linear_membership(&inside, &[g1, g2]).unwrap();
            prop_assert!(cert.is_member() && cert.verify());
        }

        #[test]
        fn unit_inverse_multiplies_to_one(c0 in 1i128..50, c1 in -9i128..9, c2 in -9i128..9) {
            let a = power_series(5, 3, 4);
            let e = a.parse(&format!("{c0} + {c1}*x + {c2}*x^3")).unwrap();
            let inv = is_unit(&e).unwrap();
            prop_assert_eq!(inv.is_some(), c0 % 5 != 0);
            if let Some(y) = inv {
                prop_assert_eq!(e.mul(&y), a.one());
            }
        }

        #[test]
        fn exact_division_round_trip(cs in proptest::collection::vec(-30i128..30, 3), k in 1u32..3) {
            let a = power_series(2, 5, 3);
            let e = a.parse(&format!("{} + {}*x + {}*x^3", cs[0], cs[1], cs[2])).unwrap();
            let q = e.scale(2i128.pow(k)).exact_div_p(k).unwrap();
            prop_assert_eq!(q, e.transport(&a.with_precision(5 - k).unwrap()).unwrap());
        }
    }
}
