//! p-ideals and level-indexed almost-zero tests for colon modules.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::Result;
use crate::exactalg::module::{module_colon_windowed, span_membership, vec_scale, Vector};
use crate::exactalg::{solve_linear_membership_many, MembershipCertificate, PolyElement, TruncatedAlgebra};
use crate::towers::{p_big_sequence, TowerKind, TowerLevel};

#[derive(Debug, Clone)]
pub struct PIdealWitness {
    pub generators: Vec<PolyElement>,
    pub m: u32,
    /// One certificate per `m`-fold product of generators (with repetition).
    pub certificates: Vec<MembershipCertificate>,
}

#[derive(Debug, Clone)]
pub enum PIdealVerdict {
    PIdeal(PIdealWitness),
    NotPIdealUpTo(u32),
}

fn multisets(n: usize, m: u32) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, left: u32, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i, n, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, m, &mut Vec::new(), &mut out);
    out
}

/// Smallest `m <= m_max` with `I^m ⊆ pA`. Products of `m` generators span
/// `I^m`, so it is enough to certify each of them.
pub fn is_p_ideal(gens: &[PolyElement], m_max: u32) -> Result<PIdealVerdict> {
    let Some(alg) = gens.first().map(|g| g.algebra().clone()) else {
        return Ok(PIdealVerdict::PIdeal(PIdealWitness { generators: Vec::new(), m: 1, certificates: Vec::new() }));
    };
    let p = alg.constant(alg.p() as i128);
    for m in 1..=m_max {
        let products: Vec<PolyElement> = multisets(gens.len(), m)
            .into_iter()
            .map(|idx| idx.iter().fold(alg.one(), |acc, i| acc.mul(&gens[*i])))
            .collect();
        let certs = solve_linear_membership_many(&products, std::slice::from_ref(&p))?;
        if certs.iter().all(|c| c.is_member()) {
            return Ok(PIdealVerdict::PIdeal(PIdealWitness { generators: gens.to_vec(), m, certificates: certs }));
        }
    }
    Ok(PIdealVerdict::NotPIdealUpTo(m_max))
}

/// Module `(span of gens + sub) / sub` inside `A^rank`.
#[derive(Debug, Clone)]
pub struct Subquotient {
    pub alg: Arc<TruncatedAlgebra>,
    pub rank: usize,
    pub gens: Vec<Vector>,
    pub sub: Vec<Vector>,
}

impl Subquotient {
    /// Cyclic module `A / (ideal)`.
    pub fn cyclic(alg: &Arc<TruncatedAlgebra>, ideal: &[PolyElement]) -> Self {
        Subquotient { alg: alg.clone(), rank: 1, gens: vec![vec![alg.one()]], sub: ideal.iter().map(|g| vec![g.clone()]).collect() }
    }

    /// Generators whose class is nonzero.
    pub fn nonzero_gens(&self) -> Result<Vec<Vector>> {
        let m = span_membership(&self.alg, self.rank, &self.gens, &self.sub)?;
        Ok(self.gens.iter().zip(m).filter(|(_, q)| q.is_none()).map(|(g, _)| g.clone()).collect())
    }

    /// `None` when `c` kills the module; otherwise a generator `g` with `c g ∉ sub`.
    pub fn killed_by(&self, c: &PolyElement) -> Result<Option<Vector>> {
        let scaled: Vec<Vector> = self.gens.iter().map(|g| vec_scale(c, g)).collect();
        let m = span_membership(&self.alg, self.rank, &scaled, &self.sub)?;
        Ok(self.gens.iter().zip(m).find(|(_, q)| q.is_none()).map(|(g, _)| g.clone()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefectVerdict {
    Zero,
    AlmostZeroAtScale,
    NotAlmostZero,
}

impl DefectVerdict {
    pub fn name(self) -> &'static str {
        match self {
            DefectVerdict::Zero => "Zero",
            DefectVerdict::AlmostZeroAtScale => "AlmostZeroAtScale",
            DefectVerdict::NotAlmostZero => "NotAlmostZero",
        }
    }
}

#[derive(Debug, Clone)]
pub struct DefectReport {
    pub colon_basis: Vec<Vector>,
    /// Level `e` of `π_e` and whether it annihilates the module.
    pub killers: BTreeMap<u32, bool>,
    pub verdict: DefectVerdict,
    /// First failing level with a generator it does not kill.
    pub witness: Option<(u32, Vector)>,
    /// Transfer checks `t · b ∈ (x_1..x_i)` for supplied multipliers `t`.
    pub transfer: Vec<bool>,
    pub truncation: (u32, u32, u32),
}

impl DefectReport {
    /// `π_e` kills ⟹ `π_{e'}` kills for `e' < e`.
    pub fn killers_monotone(&self) -> bool {
        let v: Vec<bool> = self.killers.values().copied().collect();
        v.windows(2).all(|w| w[0] || !w[1])
    }
}

/// Tests `π_e M = 0` for each supplied `(e, π_e)`.
pub fn almost_zero_defect(module: &Subquotient, killers: &[(u32, PolyElement)]) -> Result<DefectReport> {
    let basis = module.nonzero_gens()?;
    let truncation = module.alg.truncation();
    if basis.is_empty() {
        let killers = killers.iter().map(|(e, _)| (*e, true)).collect();
        return Ok(DefectReport { colon_basis: basis, killers, verdict: DefectVerdict::Zero, witness: None, transfer: Vec::new(), truncation });
    }
    let reduced = Subquotient { gens: basis.clone(), ..module.clone() };
    let mut map = BTreeMap::new();
    let mut witness = None;
    for (e, c) in killers {
        let fail = reduced.killed_by(c)?;
        map.insert(*e, fail.is_none());
        if let (Some(g), None) = (fail, &witness) {
            witness = Some((*e, g));
        }
    }
    let verdict = if witness.is_none() { DefectVerdict::AlmostZeroAtScale } else { DefectVerdict::NotAlmostZero };
    Ok(DefectReport { colon_basis: basis, killers: map, verdict, witness, transfer: Vec::new(), truncation })
}

/// `π_e` for `e = 1..=n` at level `n`: fractional powers of `p` in valuation and
/// unramified towers, the p-big sequence in ramified ones.
pub fn tower_killers(level: &TowerLevel) -> Result<Vec<(u32, PolyElement)>> {
    if level.n == 0 {
        return Ok(Vec::new());
    }
    match level.spec.kind {
        TowerKind::Ramified => {
            let w = p_big_sequence(&level.spec, level.n)?;
            Ok(w.pis.into_iter().enumerate().skip(1).map(|(e, x)| (e as u32, x)).collect())
        }
        _ => (1..=level.n).map(|e| Ok((e, level.pi(e)?))).collect(),
    }
}

/// `((x_1..x_i) : x_{i+1}) / (x_1..x_i)` on `A^rank`, computed in the
/// coarser window of the truncation, followed by the almost-zero test.
/// `transfer` multipliers `t` are checked to satisfy `t · colon ⊆ (x_1..x_i)`.
pub fn colon_defect(
    alg: &Arc<TruncatedAlgebra>,
    rank: usize,
    sop: &[PolyElement],
    i: usize,
    killers: &[(u32, PolyElement)],
    transfer: &[PolyElement],
) -> Result<DefectReport> {
    if i >= sop.len() {
        return Err(crate::Error::Precondition(format!("i = {i} needs at least {} parameters", i + 1)));
    }
    let mut sub = Vec::new();
    for x in &sop[..i] {
        for c in 0..rank {
            let mut v = vec![alg.zero(); rank];
            v[c] = x.clone();
            sub.push(v);
        }
    }
    let (window, wsub, basis) = module_colon_windowed(alg, rank, &sub, &sop[i])?;
    let wk: Vec<(u32, PolyElement)> =
        killers.iter().map(|(e, c)| Ok((*e, c.transport(&window)?))).collect::<Result<_>>()?;
    let module = Subquotient { alg: window.clone(), rank, gens: basis, sub: wsub.clone() };
    let mut report = almost_zero_defect(&module, &wk)?;
    for t in transfer {
        let tw = t.transport(&window)?;
        let scaled: Vec<Vector> = report.colon_basis.iter().map(|b| vec_scale(&tw, b)).collect();
        let ok = span_membership(&window, rank, &scaled, &wsub)?.iter().all(Option::is_some);
        report.transfer.push(ok);
    }
    Ok(report)
}
