//! Finitely generated modules inside free modules `A^r`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exactalg::algebra::TruncatedAlgebra;
use crate::exactalg::linalg::Elimination;
use crate::exactalg::membership::{colon_window, kernel_columns, multiples, ring_of, solve_columns};
use crate::exactalg::poly::{same_ambient, PolyElement};

/// Element of `A^r`.
pub type Vector = Vec<PolyElement>;

pub fn zero_vector(alg: &Arc<TruncatedAlgebra>, rank: usize) -> Vector {
    vec![alg.zero(); rank]
}

pub fn unit_vector(alg: &Arc<TruncatedAlgebra>, rank: usize, i: usize) -> Vector {
    let mut v = zero_vector(alg, rank);
    v[i] = alg.one();
    v
}

pub fn vec_add(a: &[PolyElement], b: &[PolyElement]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x.add(y)).collect()
}

pub fn vec_sub(a: &[PolyElement], b: &[PolyElement]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x.sub(y)).collect()
}

pub fn vec_scale(c: &PolyElement, a: &[PolyElement]) -> Vector {
    a.iter().map(|x| c.mul(x)).collect()
}

pub fn vec_is_zero(a: &[PolyElement]) -> bool {
    a.iter().all(PolyElement::is_zero)
}

/// `Σ q_j s_j`.
pub fn combine(alg: &Arc<TruncatedAlgebra>, rank: usize, q: &[PolyElement], spanning: &[Vector]) -> Vector {
    q.iter().zip(spanning).fold(zero_vector(alg, rank), |acc, (c, s)| vec_add(&acc, &vec_scale(c, s)))
}

fn check(alg: &Arc<TruncatedAlgebra>, rank: usize, vs: &[Vector]) -> Result<()> {
    for v in vs {
        if v.len() != rank {
            return Err(Error::InvalidAlgebra(format!("vector of length {} in a free module of rank {rank}", v.len())));
        }
        if v.iter().any(|x| !same_ambient(x.algebra(), alg)) {
            return Err(Error::AmbientMismatch);
        }
    }
    Ok(())
}

pub(crate) fn flat(alg: &TruncatedAlgebra, v: &[PolyElement]) -> Result<Vec<i128>> {
    let mut out = Vec::new();
    for x in v {
        out.extend(alg.coords(x)?);
    }
    Ok(out)
}

pub(crate) fn block_relations(alg: &TruncatedAlgebra, rank: usize) -> Result<Vec<Vec<i128>>> {
    let rels = alg.additive_relations()?;
    let dim = alg.dimension()?;
    let mut out = Vec::with_capacity(rels.len() * rank);
    for c in 0..rank {
        for r in &rels {
            let mut v = vec![0i128; dim * rank];
            v[c * dim..(c + 1) * dim].copy_from_slice(r);
            out.push(v);
        }
    }
    Ok(out)
}

/// Columns `m · s_j` for every basis monomial `m`, with labels `(j, m)`.
pub(crate) fn span_columns(
    alg: &Arc<TruncatedAlgebra>,
    spanning: &[Vector],
) -> Result<(Vec<Vec<i128>>, Vec<(usize, crate::exactalg::Monomial)>)> {
    let dim = alg.dimension()?;
    let mut cols = Vec::new();
    let mut labels = Vec::new();
    for (j, s) in spanning.iter().enumerate() {
        let per: Vec<Vec<(crate::exactalg::Monomial, Vec<i128>)>> = s.iter().map(multiples_all).collect::<Result<_>>()?;
        for (mi, m) in alg.basis()?.into_iter().enumerate() {
            let mut col = Vec::with_capacity(dim * s.len());
            for comp in &per {
                col.extend_from_slice(&comp[mi].1);
            }
            if col.iter().any(|c| *c != 0) {
                cols.push(col);
                labels.push((j, m));
            }
        }
    }
    Ok((cols, labels))
}

/// Like `multiples` but keeps zero products so components line up.
fn multiples_all(g: &PolyElement) -> Result<Vec<(crate::exactalg::Monomial, Vec<i128>)>> {
    let alg = g.algebra();
    let dim = alg.dimension()?;
    let nz = multiples(g)?;
    let mut it = nz.into_iter().peekable();
    let mut out = Vec::with_capacity(dim);
    for m in alg.basis()? {
        match it.peek() {
            Some((mm, _)) if *mm == m => out.push(it.next().unwrap()),
            _ => out.push((m, vec![0; dim])),
        }
    }
    Ok(out)
}

/// For each target, coefficients `q` with `Σ q_j s_j = target`, or `None`.
pub fn span_membership(
    alg: &Arc<TruncatedAlgebra>,
    rank: usize,
    targets: &[Vector],
    spanning: &[Vector],
) -> Result<Vec<Option<Vec<PolyElement>>>> {
    check(alg, rank, targets)?;
    check(alg, rank, spanning)?;
    if targets.is_empty() {
        return Ok(Vec::new());
    }
    let (cols, labels) = span_columns(alg, spanning)?;
    let rels = block_relations(alg, rank)?;
    let flat_targets: Vec<Vec<i128>> = targets.iter().map(|t| flat(alg, t)).collect::<Result<_>>()?;
    let sols = solve_columns(ring_of(alg)?, &cols, &rels, &flat_targets)?;
    let out = sols
        .into_iter()
        .map(|s| {
            s.map(|x| {
                let mut q = vec![alg.zero(); spanning.len()];
                for ((j, m), c) in labels.iter().zip(x) {
                    if c != 0 {
                        q[*j] = q[*j].add(&alg.monomial(m.clone(), c));
                    }
                }
                q
            })
        })
        .collect::<Vec<_>>();
    for (t, q) in targets.iter().zip(&out) {
        if let Some(q) = q {
            debug_assert_eq!(&combine(alg, rank, q, spanning), t);
        }
    }
    Ok(out)
}

/// Kernel of multiplication by `divisor` on `A^r / (sub)`, as representatives
/// in `A^r` that are not in `sub`.
pub fn module_colon(alg: &Arc<TruncatedAlgebra>, rank: usize, sub: &[Vector], divisor: &PolyElement) -> Result<Vec<Vector>> {
    check(alg, rank, sub)?;
    let dim = alg.dimension()?;
    let ring = ring_of(alg)?;
    let basis = alg.basis()?;
    let mut cols: Vec<Vec<i128>> = Vec::new();
    for c in 0..rank {
        for m in &basis {
            let prod = alg.monomial(m.clone(), 1).mul(divisor);
            let mut col = vec![0i128; dim * rank];
            col[c * dim..(c + 1) * dim].copy_from_slice(&alg.coords(&prod)?);
            cols.push(col);
        }
    }
    let (sc, _) = span_columns(alg, sub)?;
    cols.extend(sc.into_iter().map(|c| c.into_iter().map(|v| ring.reduce(-v)).collect::<Vec<_>>()));
    let ker = kernel_columns(ring, &cols, &block_relations(alg, rank)?)?;
    let mut cands = Vec::new();
    for x in ker {
        let v: Vector = (0..rank).map(|c| alg.from_coords(&x[c * dim..(c + 1) * dim])).collect::<Result<_>>()?;
        if !vec_is_zero(&v) && !cands.contains(&v) {
            cands.push(v);
        }
    }
    outside(alg, rank, cands, sub)
}

fn outside(alg: &Arc<TruncatedAlgebra>, rank: usize, cands: Vec<Vector>, sub: &[Vector]) -> Result<Vec<Vector>> {
    let member = span_membership(alg, rank, &cands, sub)?;
    Ok(cands.into_iter().zip(member).filter(|(_, m)| m.is_none()).map(|(c, _)| c).collect())
}

/// Module colon followed by projection to the coarser window of
/// [`colon_window`], where boundary artifacts of the truncation vanish.
pub fn module_colon_windowed(
    alg: &Arc<TruncatedAlgebra>,
    rank: usize,
    sub: &[Vector],
    divisor: &PolyElement,
) -> Result<(Arc<TruncatedAlgebra>, Vec<Vector>, Vec<Vector>)> {
    let raw = module_colon(alg, rank, sub, divisor)?;
    let window = colon_window(divisor)?;
    let tr = |v: &Vector| -> Result<Vector> { v.iter().map(|x| x.transport(&window)).collect() };
    let wsub: Vec<Vector> = sub.iter().map(tr).collect::<Result<_>>()?;
    let mut projected = Vec::new();
    for v in &raw {
        let w = tr(v)?;
        if !vec_is_zero(&w) && !projected.contains(&w) {
            projected.push(w);
        }
    }
    let basis = outside(&window, rank, projected, &wsub)?;
    Ok((window, wsub, basis))
}

/// `log_p` of the order of `(A-span(vecs) + L) / L` where `L` holds the
/// additive relations of `A^rank`.
pub fn span_length(alg: &Arc<TruncatedAlgebra>, rank: usize, vecs: &[Vector]) -> Result<u32> {
    check(alg, rank, vecs)?;
    let (cols, _) = span_columns(alg, vecs)?;
    let rels = block_relations(alg, rank)?;
    let ring = ring_of(alg)?;
    let len = |cols: &[Vec<i128>]| -> Result<u32> {
        if cols.is_empty() {
            return Ok(0);
        }
        let dim = cols[0].len();
        let mut rows = vec![vec![0i128; cols.len()]; dim];
        for (j, c) in cols.iter().enumerate() {
            for (i, v) in c.iter().enumerate() {
                rows[i][j] = *v;
            }
        }
        let e = Elimination::new(ring, rows, cols.len())?;
        Ok(e.pivots().iter().map(|(_, _, v)| ring.k - v).sum())
    };
    let all: Vec<Vec<i128>> = cols.into_iter().chain(rels.iter().cloned()).collect();
    Ok(len(&all)? - len(&rels)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::{colon_submodule, AlgebraBuilder};

    #[test]
    fn span_membership_rank_two() {
        let a = AlgebraBuilder::new(3).precision(2).degree_cap(3).var("x").build().unwrap();
        let x = a.parse("x").unwrap();
        let s = vec![vec![x.clone(), a.one()], vec![a.zero(), a.constant(3)]];
        let t = vec![x.pow(2), x.add(&a.constant(3))];
        let q = span_membership(&a, 2, &[t.clone()], &s).unwrap().pop().unwrap().unwrap();
        assert_eq!(combine(&a, 2, &q, &s), t);
        let bad = vec![a.one(), a.zero()];
        assert!(span_membership(&a, 2, &[bad], &s).unwrap()[0].is_none());
    }

    #[test]
    fn lengths_by_enumeration() {
        let a = AlgebraBuilder::new(2).precision(2).degree_cap(2).var("x").build().unwrap();
        // A = (Z/4)^3, (2x, x^2) spans {2x, x^2, 2x^2}: 2 * 4 = 8 elements
        let v = vec![vec![a.parse("2*x").unwrap()], vec![a.parse("x^2").unwrap()]];
        assert_eq!(span_length(&a, 1, &v).unwrap(), 3);
        let mut seen = std::collections::HashSet::new();
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    let e = a.parse(&format!("{i}*2*x + {j}*x^2 + {k}*2*x^2")).unwrap();
                    seen.insert(e.to_string());
                }
            }
        }
        assert_eq!(seen.len(), 8);
        assert_eq!(span_length(&a, 2, &[unit_vector(&a, 2, 0)]).unwrap(), 6);
    }

    #[test]
    fn free_module_colon_matches_ideal_colon() {
        let b = AlgebraBuilder::new(2).precision(2).degree_cap(3).vars(&["x", "y"]).relation("x*y", "0").unwrap().build().unwrap();
        let x = b.parse("x").unwrap();
        let y = b.parse("y").unwrap();
        let ideal = colon_submodule(&[y.clone()], &x).unwrap();
        let sub = vec![vec![y.clone(), b.zero()], vec![b.zero(), y.clone()]];
        let (_, _, basis) = module_colon_windowed(&b, 2, &sub, &x).unwrap();
        assert_eq!(basis.is_empty(), ideal.basis.is_empty());
        let (_, _, basis) = module_colon_windowed(&b, 2, &[], &x).unwrap();
        assert!(!basis.is_empty());
    }
}
