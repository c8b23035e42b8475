use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::witt::polys::{derive_witt_polynomials, PolyKind};
use crate::witt::ring::{Coefficient, RingElem};
use crate::witt::length_cap;

/// Element `(a_0, ..., a_n)` of `W_{p^n}(A)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WittVector<R> {
    p: u64,
    comps: Vec<R>,
}

impl<R: RingElem> WittVector<R> {
    pub fn new(p: u64, comps: Vec<R>) -> Result<Self> {
        if comps.is_empty() {
            return Err(Error::LengthMismatch("a Witt vector needs at least one component".into()));
        }
        if comps.iter().any(|c| !c.same_ring(&comps[0])) {
            return Err(Error::LengthMismatch("components lie in different rings".into()));
        }
        Ok(WittVector { p, comps })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Index of the last component.
    pub fn n(&self) -> usize {
        self.comps.len() - 1
    }

    pub fn comps(&self) -> &[R] {
        &self.comps
    }

    fn base(&self) -> &R {
        &self.comps[0]
    }

    pub fn zero_like(&self) -> Self {
        WittVector { p: self.p, comps: vec![self.base().zero_like(); self.comps.len()] }
    }

    pub fn one_like(&self) -> Self {
        teichmuller(self.p, &self.base().one_like(), self.n())
    }

    fn compatible(&self, o: &Self) -> Result<()> {
        if self.p != o.p || self.comps.len() != o.comps.len() {
            return Err(Error::LengthMismatch(format!(
                "W_{}^{} vs W_{}^{}",
                self.p,
                self.n(),
                o.p,
                o.n()
            )));
        }
        if !self.base().same_ring(o.base()) {
            return Err(Error::LengthMismatch("different base rings".into()));
        }
        Ok(())
    }

    fn apply(&self, kind: PolyKind, other: Option<&Self>, len: usize) -> Result<Self> {
        let cap = length_cap();
        if self.n() > cap {
            return Err(Error::LengthCap { n: self.n(), cap });
        }
        let polys = derive_witt_polynomials(self.p, len - 1, kind)?;
        let ys = other.map_or(&self.comps[..0], |o| &o.comps[..]);
        let one = self.base().one_like();
        let comps = polys.iter().map(|q| q.eval(&self.comps, ys, &one)).collect();
        Ok(WittVector { p: self.p, comps })
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.compatible(o)?;
        self.apply(PolyKind::Sum, Some(o), self.comps.len())
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.compatible(o)?;
        self.apply(PolyKind::Product, Some(o), self.comps.len())
    }

    pub fn neg(&self) -> Result<Self> {
        if self.p % 2 == 1 {
            return Ok(WittVector { p: self.p, comps: self.comps.iter().map(R::neg).collect() });
        }
        self.apply(PolyKind::Negation, None, self.comps.len())
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg()?)
    }

    /// `F: W_{p^n} -> W_{p^(n-1)}`.
    pub fn frobenius(&self) -> Result<Self> {
        if self.n() == 0 {
            return Err(Error::LengthMismatch("Frobenius needs n >= 1".into()));
        }
        self.apply(PolyKind::Frobenius, None, self.n())
    }

    /// Frobenius over a ring of characteristic `p`: `(a_0^p, ..., a_(n-1)^p)`.
    pub fn frobenius_char_p(&self) -> Result<Self> {
        if self.n() == 0 {
            return Err(Error::LengthMismatch("Frobenius needs n >= 1".into()));
        }
        Ok(WittVector { p: self.p, comps: self.comps[..self.n()].iter().map(|a| a.pow(self.p)).collect() })
    }

    /// `V(a_0, ..., a_n) = (0, a_0, ..., a_n)`.
    pub fn verschiebung(&self) -> Self {
        let mut comps = vec![self.base().zero_like()];
        comps.extend(self.comps.iter().cloned());
        WittVector { p: self.p, comps }
    }

    /// First `n + 1` components.
    pub fn truncate(&self, n: usize) -> Result<Self> {
        if n > self.n() {
            return Err(Error::LengthMismatch(format!("cannot truncate length {} to {}", self.n(), n)));
        }
        Ok(WittVector { p: self.p, comps: self.comps[..=n].to_vec() })
    }

    /// `k · 1` computed by double-and-add in the Witt ring.
    pub fn integer_like(&self, k: &BigInt) -> Result<Self> {
        let mut acc = self.zero_like();
        let mut base = self.one_like();
        let neg = k.sign() == num_bigint::Sign::Minus;
        let mut k = k.magnitude().clone();
        let zero = num_bigint::BigUint::from(0u8);
        while k > zero {
            if k.bit(0) {
                acc = acc.add(&base)?;
            }
            k >>= 1;
            if k > zero {
                base = base.add(&base)?;
            }
        }
        if neg {
            acc.neg()
        } else {
            Ok(acc)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(R::is_zero)
    }

    /// `w_i = Σ_{j<=i} p^j a_j^{p^(i-j)}`.
    pub fn ghost(&self) -> Vec<R> {
        let b = self.base();
        (0..self.comps.len())
            .map(|i| {
                (0..=i).fold(b.zero_like(), |acc, j| {
                    let pj = b.int_like(&num_traits::pow(BigInt::from(self.p), j));
                    acc.add(&pj.mul(&self.comps[j].pow(self.p.pow((i - j) as u32))))
                })
            })
            .collect()
    }

    /// Inverse of the ghost map when `p` is a unit in the base ring.
    pub fn from_ghost(p: u64, ghost: &[R]) -> Result<Self> {
        let b = ghost.first().ok_or_else(|| Error::LengthMismatch("empty ghost vector".into()))?;
        let mut comps: Vec<R> = Vec::with_capacity(ghost.len());
        for (i, w) in ghost.iter().enumerate() {
            let mut rest = w.clone();
            for (j, a) in comps.iter().enumerate() {
                let pj = b.int_like(&num_traits::pow(BigInt::from(p), j));
                rest = rest.sub(&pj.mul(&a.pow(p.pow((i - j) as u32))));
            }
            let inv = b
                .inv_int(&num_traits::pow(BigInt::from(p), i))
                .ok_or_else(|| Error::Precondition(format!("{p} is not invertible in the base ring")))?;
            comps.push(rest.mul(&inv));
        }
        Ok(WittVector { p, comps })
    }
}

/// `[a] = (a, 0, ..., 0)` of length `n`.
pub fn teichmuller<R: RingElem>(p: u64, a: &R, n: usize) -> WittVector<R> {
    let mut comps = vec![a.zero_like(); n + 1];
    comps[0] = a.clone();
    WittVector { p, comps }
}

impl<R: RingElem> fmt::Display for WittVector<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "W[p={};n={}](", self.p, self.n())?;
        for (i, c) in self.comps.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl WittVector<Coefficient> {
    /// Text form including the base ring, e.g. `W[p=2;n=1;mod=8](3,5)`.
    pub fn to_text(&self) -> String {
        let body = self.to_string();
        match self.comps[0].modulus() {
            None => body,
            Some(m) => body.replacen(']', &format!(";mod={m}]"), 1),
        }
    }
}

impl FromStr for WittVector<Coefficient> {
    type Err = Error;

    /// `W[p=2;n=2](a0,a1,a2)` over `Z`, or with `;mod=m` over `Z/m`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Syntax { line: 1, col: 1, msg: msg.to_string() };
        let s = s.trim();
        let rest = s.strip_prefix("W[").ok_or_else(|| bad("expected `W[`"))?;
        let close = rest.find(']').ok_or_else(|| bad("expected `]`"))?;
        let (head, tail) = (&rest[..close], &rest[close + 1..]);
        let (mut p, mut n, mut m) = (None, None, BigInt::from(0));
        for field in head.split(';') {
            let (k, v) = field.split_once('=').ok_or_else(|| bad("expected key=value"))?;
            match k.trim() {
                "p" => p = Some(v.trim().parse::<u64>().map_err(|_| bad("bad p"))?),
                "n" => n = Some(v.trim().parse::<usize>().map_err(|_| bad("bad n"))?),
                "mod" => m = v.trim().parse::<BigInt>().map_err(|_| bad("bad modulus"))?,
                other => return Err(bad(&format!("unknown key `{other}`"))),
            }
        }
        let (p, n) = (p.ok_or_else(|| bad("missing p"))?, n.ok_or_else(|| bad("missing n"))?);
        let inner = tail.trim().strip_prefix('(').and_then(|t| t.strip_suffix(')')).ok_or_else(|| bad("expected `(...)`"))?;
        let comps: Vec<Coefficient> = inner
            .split(',')
            .map(|c| c.trim().parse::<BigInt>().map(|v| Coefficient::modular(v, m.clone())).map_err(|_| bad("bad component")))
            .collect::<Result<_>>()?;
        if comps.len() != n + 1 {
            return Err(Error::LengthMismatch(format!("n={n} needs {} components, got {}", n + 1, comps.len())));
        }
        WittVector::new(p, comps)
    }
}
