use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use smallvec::SmallVec;

use crate::witt::ring::RingElem;

/// Exponent vector over `X_0, Y_0, X_1, Y_1, ...` (variable `X_i` sits at
/// slot `2i`, `Y_i` at `2i + 1`), trailing zeros trimmed.
pub type Key = SmallVec<[u32; 8]>;

fn trim(mut k: Key) -> Key {
    while k.last() == Some(&0) {
        k.pop();
    }
    k
}

fn key_mul(a: &Key, b: &Key) -> Key {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let mut out = long.clone();
    for (o, s) in out.iter_mut().zip(short.iter()) {
        *o += s;
    }
    out
}

/// Sparse polynomial with integer coefficients in `X_i, Y_i`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IntPoly {
    terms: BTreeMap<Key, BigInt>,
}

impl IntPoly {
    pub fn zero() -> Self {
        IntPoly::default()
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        let c = c.into();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Key::new(), c);
        }
        IntPoly { terms }
    }

    fn slot(slot: usize) -> Self {
        let mut k = Key::from_elem(0, slot + 1);
        k[slot] = 1;
        IntPoly { terms: BTreeMap::from([(k, BigInt::one())]) }
    }

    pub fn x(i: usize) -> Self {
        Self::slot(2 * i)
    }

    pub fn y(i: usize) -> Self {
        Self::slot(2 * i + 1)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Key, &BigInt)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of variable slots actually used.
    pub fn width(&self) -> usize {
        self.terms.keys().map(|k| k.len()).max().unwrap_or(0)
    }

    fn from_hash(h: HashMap<Key, BigInt>) -> Self {
        IntPoly { terms: h.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (k, c) in &o.terms {
            let e = terms.entry(k.clone()).or_insert_with(BigInt::zero);
            *e += c;
            if e.is_zero() {
                terms.remove(k);
            }
        }
        IntPoly { terms }
    }

    pub fn neg(&self) -> Self {
        IntPoly { terms: self.terms.iter().map(|(k, c)| (k.clone(), -c)).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        if c.is_zero() {
            return IntPoly::zero();
        }
        IntPoly { terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut acc: HashMap<Key, BigInt> = HashMap::with_capacity(self.len() * o.len());
        for (ka, ca) in &self.terms {
            for (kb, cb) in &o.terms {
                *acc.entry(key_mul(ka, kb)).or_insert_with(BigInt::zero) += ca * cb;
            }
        }
        Self::from_hash(acc)
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = IntPoly::constant(1);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Division by an integer when every coefficient is divisible.
    pub fn div_exact(&self, d: &BigInt) -> Option<Self> {
        let mut terms = BTreeMap::new();
        for (k, c) in &self.terms {
            let (q, r) = c.div_rem(d);
            if !r.is_zero() {
                return None;
            }
            terms.insert(k.clone(), q);
        }
        Some(IntPoly { terms })
    }

    /// Coefficients reduced into `[0, m)`.
    pub fn reduce_mod(&self, m: &BigInt) -> Self {
        IntPoly {
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (k.clone(), c.mod_floor(m)))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        }
    }

    /// Substitutes `X_i = xs[i]`, `Y_i = ys[i]` in a ring.
    pub fn eval<R: RingElem>(&self, xs: &[R], ys: &[R], one: &R) -> R {
        let nslots = self.width();
        let mut powers: Vec<Vec<R>> = vec![Vec::new(); nslots];
        let value = |s: usize| if s % 2 == 0 { &xs[s / 2] } else { &ys[s / 2] };
        let mut acc = one.zero_like();
        for (k, c) in &self.terms {
            let mut t = one.int_like(c);
            for (s, &e) in k.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let pw = &mut powers[s];
                if pw.is_empty() {
                    pw.push(one.clone());
                }
                while pw.len() <= e as usize {
                    let next = pw.last().unwrap().mul(value(s));
                    pw.push(next);
                }
                t = t.mul(&pw[e as usize]);
            }
            acc = acc.add(&t);
        }
        acc
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut ordered: Vec<_> = self.terms.iter().collect();
        ordered.sort_by_key(|(k, _)| (k.iter().sum::<u32>(), std::cmp::Reverse((*k).clone())));
        for (i, (k, c)) in ordered.into_iter().enumerate() {
            let factors: Vec<String> = k
                .iter()
                .enumerate()
                .filter(|(_, e)| **e > 0)
                .map(|(s, e)| {
                    let name = format!("{}{}", if s % 2 == 0 { 'X' } else { 'Y' }, s / 2);
                    if *e == 1 {
                        name
                    } else {
                        format!("{name}^{e}")
                    }
                })
                .collect();
            let mag = c.abs();
            if i == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if c.is_negative() { '-' } else { '+' })?;
            }
            match (factors.is_empty(), mag.is_one()) {
                (true, _) => write!(f, "{mag}")?,
                (false, true) => write!(f, "{}", factors.join("*"))?,
                (false, false) => write!(f, "{mag}*{}", factors.join("*"))?,
            }
        }
        Ok(())
    }
}

impl From<Key> for IntPoly {
    fn from(k: Key) -> Self {
        IntPoly { terms: BTreeMap::from([(trim(k), BigInt::one())]) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::witt::ring::Coefficient;

    #[test]
    fn binomial_expansion_and_division() {
        let a = IntPoly::x(0);
        let b = IntPoly::y(0);
        let e = a.add(&b).pow(3).sub(&a.pow(3)).sub(&b.pow(3));
        let q = e.div_exact(&BigInt::from(3)).unwrap();
        assert_eq!(q, a.pow(2).mul(&b).add(&a.mul(&b.pow(2))));
        assert!(a.add(&b).pow(2).div_exact(&BigInt::from(2)).is_none());
    }

    #[test]
    fn display_and_eval() {
        let s1 = IntPoly::x(1).add(&IntPoly::y(1)).sub(&IntPoly::x(0).mul(&IntPoly::y(0)));
        assert_eq!(s1.to_string(), "X1 + Y1 - X0*Y0");
        let one = Coefficient::integer(1);
        let xs = [Coefficient::integer(3), Coefficient::integer(5)];
        let ys = [Coefficient::integer(2), Coefficient::integer(7)];
        assert_eq!(s1.eval(&xs, &ys, &one), Coefficient::integer(6));
    }
}
