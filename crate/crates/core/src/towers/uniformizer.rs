use crate::error::{Error, Result};
use crate::exactalg::text::expand;
use crate::exactalg::{is_unit, LiftPoly, Monomial, PolyElement};
use crate::towers::{build_level, frobenius_root, root_defect, TowerKind, TowerLevel, TowerSpec};

/// Splits `G = Σ t_i b_i` by pulling the first variable out of every term.
/// Returns `(i, b_i)` with `b_i` as raw level-0 terms.
pub fn auto_decomposition(spec: &TowerSpec) -> Result<Vec<(usize, Vec<(Monomial, i128)>)>> {
    let g = spec.g.as_ref().ok_or_else(|| Error::Precondition("decomposition needs a ramified tower".into()))?;
    let mut out: Vec<(usize, Vec<(Monomial, i128)>)> = Vec::new();
    let mut terms: Vec<_> = expand(g, &spec.var_names(), spec.p, 0)?.into_iter().collect();
    terms.sort();
    for (mut m, c) in terms {
        let i = m.iter().position(|e| *e > 0).ok_or_else(|| Error::Precondition("G has a constant term".into()))?;
        m[i] -= 1;
        match out.iter_mut().find(|(j, _)| *j == i) {
            Some((_, b)) => b.push((m, c)),
            None => out.push((i, vec![(m, c)])),
        }
    }
    out.sort_by_key(|(i, _)| *i);
    Ok(out)
}

/// Result of the ramified uniformizer construction: `π^p = p u` with `u` a
/// unit, at some level `n >= 1`.
#[derive(Debug, Clone)]
pub struct Uniformizer {
    pub level: TowerLevel,
    /// `(t_i, b_i)` with `G = Σ t_i b_i`.
    pub decomposition: Vec<(String, String)>,
    pub pi: PolyElement,
    pub u: PolyElement,
    pub u_inverse: PolyElement,
}

impl Uniformizer {
    /// Re-checks `π^p = p u` and `u u^{-1} = 1` in the truncated algebra.
    pub fn verify(&self) -> bool {
        let alg = &self.level.alg;
        self.pi.pow(alg.p()) == self.u.scale(alg.p() as i128) && self.u.mul(&self.u_inverse) == alg.one()
    }
}

/// `π` and `u` with `π^p = p u` at level `n >= 1` of a ramified tower.
///
/// With `b_i = c_i^p + p d_i` and `t_i = (t_i^{1/p})^p`, put
/// `f = Σ c_i t_i^{1/p}`; then `Σ c_i^p t_i = f^p + p g` and
/// `G = f^p + p (g + h)` with `h = Σ d_i t_i`, so `f^p = p (1 - g - h)`.
pub fn ramified_uniformizer(spec: &TowerSpec, n: u32) -> Result<Uniformizer> {
    if spec.kind != TowerKind::Ramified {
        return Err(Error::Precondition("the uniformizer construction needs a ramified tower".into()));
    }
    if n == 0 {
        return Err(Error::Precondition("level must be at least 1".into()));
    }
    let l0 = build_level(spec, 0)?;
    let l1 = build_level(spec, 1)?;
    let a1 = &l1.alg;
    let p = spec.p;
    let names = spec.var_names();
    let decomposition = auto_decomposition(spec)?;
    let mut f = a1.zero().lift();
    let mut sum_pow = a1.zero().lift();
    let mut h = a1.zero().lift();
    let mut shown = Vec::new();
    for (i, b) in &decomposition {
        let b_raw = LiftPoly::from_raw(&l0.alg, b.iter().cloned());
        if b.iter().any(|(m, c)| m.iter().all(|e| *e == 0) && *c % p as i128 != 0) {
            return Err(Error::Precondition(format!("b_{} has a constant term", i + 1)));
        }
        let b_elem = l0.alg.element(b.iter().cloned());
        let (c, _) = frobenius_root(&b_elem, &l1)?;
        let d = root_defect(&b_raw, &c, &l1)?;
        let mut tm = a1.one_monomial();
        tm[*i] = 1;
        let t_root = a1.monomial(tm.clone(), 1).lift();
        let mut t_full = a1.one_monomial();
        t_full[*i] = p as u32;
        let t = a1.monomial(t_full, 1).lift();
        let cl = c.lift();
        f = f.add(&cl.mul(&t_root));
        sum_pow = sum_pow.add(&cl.pow(p).mul(&t));
        h = h.add(&d.lift().mul(&t));
        shown.push((names[*i].clone(), b_raw.to_string()));
    }
    let g = sum_pow.sub(&f.pow(p)).div_p().map_err(|_| Error::InexactDivision { k: 1 })?;
    let u_raw = a1.one().lift().sub(&g).sub(&h);
    let level = build_level(spec, n)?;
    let pi = f.project()?.transport(&level.alg)?;
    let u = u_raw.project()?.transport(&level.alg)?;
    if pi.pow(p) != u.scale(p as i128) {
        return Err(Error::UnitCheckFailed(format!("π^p = p u fails for π = {pi}")));
    }
    let u_inverse = is_unit(&u)?.ok_or_else(|| Error::UnitCheckFailed(u.to_string()))?;
    Ok(Uniformizer { level, decomposition: shown, pi, u, u_inverse })
}

/// `π_0 = p, π_1, ..., π_m` and units `u_i` with `π_{i+1}^p = π_i u_i`, all
/// living at level `m`.
#[derive(Debug, Clone)]
pub struct PBigWitness {
    pub level: TowerLevel,
    pub pis: Vec<PolyElement>,
    pub units: Vec<PolyElement>,
    pub unit_inverses: Vec<PolyElement>,
}

impl PBigWitness {
    pub fn verify(&self) -> bool {
        let alg = &self.level.alg;
        let p = alg.p();
        self.pis.first() == Some(&alg.constant(p as i128))
            && self.pis.len() == self.units.len() + 1
            && (0..self.units.len()).all(|i| {
                self.pis[i + 1].pow(p) == self.pis[i].mul(&self.units[i]) && self.units[i].mul(&self.unit_inverses[i]) == alg.one()
            })
    }
}

/// Builds a p-big witness up to level `m`. Ramified towers start from the
/// uniformizer and continue with Frobenius roots: `π_{i+1}^p = π_i + p h_i`
/// and `p = π_i^{p^i} ε_i` give `u_i = 1 + π_i^{p^i - 1} ε_i h_i`.
pub fn p_big_sequence(spec: &TowerSpec, m: u32) -> Result<PBigWitness> {
    let level = build_level(spec, m)?;
    let alg = level.alg.clone();
    let p = spec.p;
    let mut pis = vec![alg.constant(p as i128)];
    let mut units = Vec::new();
    let mut inverses = Vec::new();
    if m == 0 {
        return Ok(PBigWitness { level, pis, units, unit_inverses: inverses });
    }
    if spec.kind != TowerKind::Ramified {
        for k in 1..=m {
            pis.push(level.pi(k)?);
            units.push(alg.one());
            inverses.push(alg.one());
        }
    } else {
        let uni = ramified_uniformizer(spec, 1)?;
        pis.push(uni.pi.transport(&alg)?);
        units.push(uni.u.transport(&alg)?);
        inverses.push(uni.u_inverse.transport(&alg)?);
        let mut eps = inverses[0].clone();
        let mut current = uni.pi.clone();
        for i in 1..m {
            let next = build_level(spec, i + 1)?;
            let (root, d) = frobenius_root(&current, &next)?;
            let pi_i = pis[i as usize].clone();
            let h = d.neg().transport(&alg)?;
            let u = alg.one().add(&pi_i.pow(p.pow(i) - 1).mul(&eps).mul(&h));
            let u_inv = is_unit(&u)?.ok_or_else(|| Error::CannotExtend(format!("u_{i} is not a unit at this truncation")))?;
            let root_m = root.transport(&alg)?;
            if root_m.pow(p) != pi_i.mul(&u) {
                return Err(Error::CannotExtend(format!("π_{}^p = π_{i} u_{i} fails at this truncation", i + 1)));
            }
            eps = eps.mul(&u_inv.pow(p.pow(i)));
            pis.push(root_m);
            units.push(u);
            inverses.push(u_inv);
            current = root;
        }
    }
    let w = PBigWitness { level, pis, units, unit_inverses: inverses };
    if !w.verify() {
        return Err(Error::CannotExtend("p-big identities fail at this truncation".into()));
    }
    Ok(w)
}
