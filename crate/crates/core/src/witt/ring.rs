use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::exactalg::{is_unit, PolyElement};

/// Commutative ring elements that know their ring, so that constants can be
/// produced from any element.
pub trait RingElem: Clone + PartialEq + fmt::Debug + fmt::Display {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn int_like(&self, n: &BigInt) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn same_ring(&self, o: &Self) -> bool;
    /// `1/n` when `n` is a unit of the ring.
    fn inv_int(&self, n: &BigInt) -> Option<Self>;

    fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = self.one_like();
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
}

/// Element of `Z` (no modulus) or `Z/m`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Coefficient {
    value: BigInt,
    modulus: Option<BigInt>,
}

impl Coefficient {
    pub fn integer(v: impl Into<BigInt>) -> Self {
        Coefficient { value: v.into(), modulus: None }
    }

    /// Residue of `v` in `Z/m`; `m = 0` means `Z`.
    pub fn modular(v: impl Into<BigInt>, m: impl Into<BigInt>) -> Self {
        let m: BigInt = m.into();
        if m.is_zero() {
            return Self::integer(v);
        }
        assert!(m.is_positive(), "modulus must be positive");
        Coefficient { value: v.into().mod_floor(&m), modulus: Some(m) }
    }

    pub fn value(&self) -> &BigInt {
        &self.value
    }

    pub fn modulus(&self) -> Option<&BigInt> {
        self.modulus.as_ref()
    }

    fn with(&self, v: BigInt) -> Self {
        match &self.modulus {
            None => Coefficient { value: v, modulus: None },
            Some(m) => Coefficient { value: v.mod_floor(m), modulus: Some(m.clone()) },
        }
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl RingElem for Coefficient {
    fn zero_like(&self) -> Self {
        self.with(BigInt::zero())
    }
    fn one_like(&self) -> Self {
        self.with(BigInt::one())
    }
    fn int_like(&self, n: &BigInt) -> Self {
        self.with(n.clone())
    }
    fn add(&self, o: &Self) -> Self {
        self.with(&self.value + &o.value)
    }
    fn sub(&self, o: &Self) -> Self {
        self.with(&self.value - &o.value)
    }
    fn mul(&self, o: &Self) -> Self {
        self.with(&self.value * &o.value)
    }
    fn neg(&self) -> Self {
        self.with(-&self.value)
    }
    fn is_zero(&self) -> bool {
        self.value.is_zero()
    }
    fn same_ring(&self, o: &Self) -> bool {
        self.modulus == o.modulus
    }
    fn inv_int(&self, n: &BigInt) -> Option<Self> {
        match &self.modulus {
            None => {
                if n.abs().is_one() {
                    Some(self.with(n.clone()))
                } else {
                    None
                }
            }
            Some(m) => {
                let e = n.extended_gcd(m);
                if e.gcd.is_one() {
                    Some(self.with(e.x))
                } else {
                    None
                }
            }
        }
    }

    fn pow(&self, e: u64) -> Self {
        match &self.modulus {
            Some(m) => self.with(self.value.modpow(&BigInt::from(e), m)),
            None => self.with(num_traits::pow(self.value.clone(), e as usize)),
        }
    }
}

impl RingElem for PolyElement {
    fn zero_like(&self) -> Self {
        self.algebra().zero()
    }
    fn one_like(&self) -> Self {
        self.algebra().one()
    }
    fn int_like(&self, n: &BigInt) -> Self {
        let m = BigInt::from(self.algebra().modulus());
        self.algebra().constant(n.mod_floor(&m).to_i128().unwrap())
    }
    fn add(&self, o: &Self) -> Self {
        PolyElement::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        PolyElement::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        PolyElement::mul(self, o)
    }
    fn neg(&self) -> Self {
        PolyElement::neg(self)
    }
    fn is_zero(&self) -> bool {
        PolyElement::is_zero(self)
    }
    fn same_ring(&self, o: &Self) -> bool {
        crate::exactalg::same_ambient(self.algebra(), o.algebra())
    }
    fn inv_int(&self, n: &BigInt) -> Option<Self> {
        is_unit(&self.int_like(n)).ok().flatten()
    }
    fn pow(&self, e: u64) -> Self {
        PolyElement::pow(self, e)
    }
}
