//! Seeded sampling of the ring identities of `W_{p^n}`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Coefficient, RingElem, WittVector};
use crate::error::{Error, Result};

/// Pass counts per identity name, `(passed, total)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityReport {
    pub p: u64,
    pub n: usize,
    pub seed: u64,
    pub samples: usize,
    pub counts: BTreeMap<&'static str, (usize, usize)>,
}

impl IdentityReport {
    pub fn all_pass(&self) -> bool {
        self.counts.values().all(|(ok, total)| ok == total)
    }

    fn record(&mut self, name: &'static str, ok: bool) {
        let e = self.counts.entry(name).or_insert((0, 0));
        e.0 += ok as usize;
        e.1 += 1;
    }
}

fn random_vector(rng: &mut ChaCha8Rng, p: u64, n: usize, m: &BigInt) -> Result<WittVector<Coefficient>> {
    let comps = (0..=n).map(|_| Coefficient::modular(rng.gen_range(-50i64..50), m.clone())).collect();
    WittVector::new(p, comps)
}

/// Ghost map and ring axioms over `Z` and `Z/p^6`, Frobenius and
/// Verschiebung identities over `Z/p^6`, and the characteristic-`p` Frobenius
/// over `F_p`.
pub fn sample_identities(p: u64, n: usize, samples: usize, seed: u64) -> Result<IdentityReport> {
    if n + 1 > super::length_cap() {
        return Err(Error::LengthCap { n: n + 1, cap: super::length_cap() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = IdentityReport { p, n, seed, samples, counts: BTreeMap::new() };
    let pp = BigInt::from(p);
    let zero = BigInt::from(0);
    let p6 = num_traits::pow(pp.clone(), 6);
    for _ in 0..samples {
        for m in [&zero, &p6] {
            let x = random_vector(&mut rng, p, n, m)?;
            let y = random_vector(&mut rng, p, n, m)?;
            let z = random_vector(&mut rng, p, n, m)?;
            if m == &zero {
                let (gx, gy) = (x.ghost(), y.ghost());
                let gs = x.add(&y)?.ghost();
                let gm = x.mul(&y)?.ghost();
                rep.record("ghost_add", (0..=n).all(|i| gs[i] == gx[i].add(&gy[i])));
                rep.record("ghost_mul", (0..=n).all(|i| gm[i] == gx[i].mul(&gy[i])));
            }
            rep.record("add_assoc", x.add(&y)?.add(&z)? == x.add(&y.add(&z)?)?);
            rep.record("mul_assoc", x.mul(&y)?.mul(&z)? == x.mul(&y.mul(&z)?)?);
            rep.record("distributive", x.mul(&y.add(&z)?)? == x.mul(&y)?.add(&x.mul(&z)?)?);
        }
        if n >= 1 {
            // x of length n, y and z of length n + 1
            let x = random_vector(&mut rng, p, n - 1, &p6)?;
            let y = random_vector(&mut rng, p, n, &p6)?;
            let z = random_vector(&mut rng, p, n, &p6)?;
            rep.record("fv_eq_p", x.verschiebung().frobenius()? == x.integer_like(&pp)?.mul(&x)?);
            rep.record("v_projection", x.verschiebung().mul(&y)? == x.mul(&y.frobenius()?)?.verschiebung());
            let (fy, fz) = (y.frobenius()?, z.frobenius()?);
            rep.record("f_add", y.add(&z)?.frobenius()? == fy.add(&fz)?);
            rep.record("f_mul", y.mul(&z)?.frobenius()? == fy.mul(&fz)?);
            let w = random_vector(&mut rng, p, n, &pp)?;
            rep.record("char_p_shortcut", w.frobenius()? == w.frobenius_char_p()?);
        }
    }
    Ok(rep)
}

/// Additive order of `1` in `W_{p^n}(F_p)`.
pub fn unit_order(p: u64, n: usize) -> Result<u64> {
    let one = WittVector::new(p, (0..=n).map(|i| Coefficient::modular((i == 0) as i64, p)).collect())?;
    let mut acc = one.zero_like();
    let cap = p.checked_pow(n as u32 + 2).ok_or(Error::Overflow)?;
    for k in 1..=cap {
        acc = acc.add(&one)?;
        if acc.is_zero() {
            return Ok(k);
        }
    }
    Err(Error::Overflow)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_sampling_is_deterministic_and_passes() {
        let a = sample_identities(2, 2, 10, 7).unwrap();
        assert!(a.all_pass(), "{a:?}");
        assert_eq!(a, sample_identities(2, 2, 10, 7).unwrap());
        assert_eq!(a.counts["fv_eq_p"], (10, 10));
        assert_eq!(a.counts["add_assoc"], (20, 20));
    }

    #[test]
    fn unit_order_small() {
        assert_eq!(unit_order(2, 0).unwrap(), 2);
        assert_eq!(unit_order(3, 2).unwrap(), 27);
    }
}
