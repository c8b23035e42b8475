use crate::error::{Error, Result};
use crate::exactalg::{certify_membership, is_unit, MembershipCertificate, PolyElement};
use crate::towers::{build_level, frobenius_root, ramified_uniformizer, root_defect, TowerKind, TowerSpec};

/// `r, s, N` with `r^p ≡ -p (mod p s B)` and `s^N ∈ pB`.
#[derive(Debug, Clone)]
pub struct WittPerfectWitness {
    pub r: PolyElement,
    pub s: PolyElement,
    pub nexp: u32,
    /// `r^p + p ∈ (p s)`.
    pub congruence: MembershipCertificate,
    /// `s^N ∈ (p)`.
    pub power: MembershipCertificate,
    /// Ramified towers: `v` with `-u = v^p + p w`, so that `r = π / v`.
    pub v: Option<PolyElement>,
}

impl WittPerfectWitness {
    pub fn verify(&self) -> bool {
        let p = self.r.algebra().p();
        let alg = self.r.algebra();
        self.congruence.target == self.r.pow(p).add(&alg.constant(p as i128))
            && self.congruence.is_member()
            && self.congruence.verify()
            && self.power.is_member()
            && self.power.verify()
            && self.power.target == self.s.pow(self.nexp as u64)
    }
}

/// Produces the witness of the Witt-perfect criterion. Valuation and
/// unramified witnesses live at level `n >= 1`; ramified ones start from the
/// uniformizer at level `n` and live at level `n + 1`.
pub fn witt_perfect_criterion(spec: &TowerSpec, n: u32) -> Result<WittPerfectWitness> {
    if n == 0 {
        return Err(Error::NoWitness("level 0 has no p-th root of p".into()));
    }
    let p = spec.p;
    let pc = p as i128;
    match spec.kind {
        TowerKind::Valuation | TowerKind::Unramified => {
            let level = build_level(spec, n)?;
            let alg = &level.alg;
            let pi1 = level.pi(1)?;
            let r = if p == 2 { pi1 } else { pi1.neg() };
            let s = alg.constant(pc);
            let ps = alg.constant(pc * pc);
            let target = r.pow(p).add(&alg.constant(pc));
            let congruence = certify_membership(&target, std::slice::from_ref(&ps), vec![alg.constant(if p == 2 { 1 } else { 0 })])?;
            let power = certify_membership(&s, &[s.clone()], vec![alg.one()])?;
            finish(r, s, congruence, power, None)
        }
        TowerKind::Ramified => {
            // π^p = p u at level n; -u = v^p + p w at level n + 1; r = π / v
            let uni = ramified_uniformizer(spec, n)?;
            let level = uni.level.next()?;
            let alg = &level.alg;
            let (root, _) = frobenius_root(&uni.u, &level)?;
            // u = root^p + p e, computed on the integer lift
            let e = root_defect(&uni.u.lift(), &root, &level)?;
            let (v, w) = if p == 2 {
                (root.clone(), e.neg().sub(&root.pow(2)))
            } else {
                (root.neg(), e.neg())
            };
            let pi = uni.pi.transport(alg)?;
            let y = is_unit(&v.pow(p))?.ok_or_else(|| Error::NoWitness(format!("v^p is not a unit for v = {v}")))?;
            let vinv = is_unit(&v)?.ok_or_else(|| Error::NoWitness(format!("v is not a unit: {v}")))?;
            let r = pi.mul(&vinv);
            let target = r.pow(p).add(&alg.constant(pc));
            let ps = alg.constant(pc * pc);
            let congruence = certify_membership(&target, std::slice::from_ref(&ps), vec![w.mul(&y).neg()])?;
            let s = alg.constant(pc);
            let power = certify_membership(&s, &[s.clone()], vec![alg.one()])?;
            finish(r, s, congruence, power, Some(v))
        }
    }
}

fn finish(
    r: PolyElement,
    s: PolyElement,
    congruence: MembershipCertificate,
    power: MembershipCertificate,
    v: Option<PolyElement>,
) -> Result<WittPerfectWitness> {
    if !congruence.is_member() {
        return Err(Error::NoWitness(format!("r^p + p ∉ (p s) for r = {r}")));
    }
    Ok(WittPerfectWitness { r, s, nexp: 1, congruence, power, v })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valuation_witnesses() {
        let w = witt_perfect_criterion(&TowerSpec::valuation(3, 4), 1).unwrap();
        let alg = w.r.algebra();
        assert_eq!(w.r, alg.parse("-pi^(1/3)").unwrap());
        assert_eq!(w.r.pow(3), alg.constant(-3));
        assert!(w.verify());
        let w = witt_perfect_criterion(&TowerSpec::valuation(2, 4), 1).unwrap();
        assert_eq!(w.r, w.r.algebra().parse("pi^(1/2)").unwrap());
        assert_eq!((w.s.constant_term(), w.nexp), (2, 1));
        assert!(w.verify());
    }

    #[test]
    fn ramified_square() {
        let spec = TowerSpec::ramified(3, 1, "t1^2", 4, 6).unwrap();
        let w = witt_perfect_criterion(&spec, 1).unwrap();
        assert!(w.verify());
    }
}
