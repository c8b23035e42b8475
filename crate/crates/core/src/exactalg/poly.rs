use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exactalg::algebra::{Mode, TruncatedAlgebra};
use crate::exactalg::monomial::{mono_mul, Monomial};
use crate::exactalg::text::format_exponent;

/// Element of a [`TruncatedAlgebra`], always kept in normal form.
#[derive(Clone, Debug)]
pub struct PolyElement {
    alg: Arc<TruncatedAlgebra>,
    terms: BTreeMap<Monomial, i128>,
}

impl PartialEq for PolyElement {
    fn eq(&self, other: &Self) -> bool {
        same_ambient(&self.alg, &other.alg) && self.terms == other.terms
    }
}

impl Eq for PolyElement {}

pub(crate) fn same_ambient(a: &Arc<TruncatedAlgebra>, b: &Arc<TruncatedAlgebra>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

fn multiply(
    alg: &TruncatedAlgebra,
    a: &BTreeMap<Monomial, i128>,
    b: &BTreeMap<Monomial, i128>,
    mode: Mode,
) -> BTreeMap<Monomial, i128> {
    let m = alg.lift_modulus();
    let cap = alg.scaled_cap();
    let mut acc: HashMap<Monomial, i128> = HashMap::with_capacity(a.len() * b.len());
    for (ma, ca) in a {
        let da = alg.graded_degree(ma);
        if da > cap {
            continue;
        }
        for (mb, cb) in b {
            if da + alg.graded_degree(mb) > cap {
                continue;
            }
            let e = acc.entry(mono_mul(ma, mb)).or_insert(0);
            *e = (*e + (ca * cb).rem_euclid(m)) % m;
        }
    }
    alg.normalize(acc, mode)
}

impl PolyElement {
    pub(crate) fn from_map(alg: Arc<TruncatedAlgebra>, terms: BTreeMap<Monomial, i128>) -> Self {
        PolyElement { alg, terms }
    }

    pub fn algebra(&self) -> &Arc<TruncatedAlgebra> {
        &self.alg
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, i128> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> i128 {
        self.terms.get(m).copied().unwrap_or(0)
    }

    pub fn constant_term(&self) -> i128 {
        self.coeff(&self.alg.one_monomial())
    }

    fn check(&self, other: &Self) -> Result<()> {
        if same_ambient(&self.alg, &other.alg) {
            Ok(())
        } else {
            Err(Error::AmbientMismatch)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let raw = self.terms.iter().chain(&other.terms).map(|(m, c)| (m.clone(), *c));
        Ok(Self::from_map(self.alg.clone(), self.alg.normalize(raw, Mode::Normal)))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.neg())
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self::from_map(self.alg.clone(), multiply(&self.alg, &self.terms, &other.terms, Mode::Normal)))
    }

    /// Panics on ambient mismatch; see [`PolyElement::try_add`].
    pub fn add(&self, other: &Self) -> Self {
        self.try_add(other).expect("ambient mismatch")
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.try_sub(other).expect("ambient mismatch")
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.try_mul(other).expect("ambient mismatch")
    }

    pub fn neg(&self) -> Self {
        self.scale(-1)
    }

    pub fn scale(&self, c: i128) -> Self {
        let m = self.alg.lift_modulus();
        let c = c.rem_euclid(m);
        let raw = self.terms.iter().map(|(mm, a)| (mm.clone(), (a * c).rem_euclid(m)));
        Self::from_map(self.alg.clone(), self.alg.normalize(raw, Mode::Normal))
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = self.alg.one();
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

    /// Divides every coefficient by `p^k` exactly. The quotient lives in the
    /// same presentation at precision `N - k`.
    pub fn exact_div_p(&self, k: u32) -> Result<PolyElement> {
        if self.alg.is_ramified() {
            if self.is_zero() {
                return Ok(self.clone());
            }
            return Err(Error::InexactDivision { k });
        }
        let n = self.alg.precision();
        if k >= n {
            return Err(Error::PrecisionLoss { needed: k + 1, available: n });
        }
        let pk = (self.alg.p() as i128).pow(k);
        if self.terms.values().any(|c| c % pk != 0) {
            return Err(Error::InexactDivision { k });
        }
        let target = self.alg.with_precision(n - k)?;
        let raw = self.terms.iter().map(|(m, c)| (m.clone(), c / pk));
        Ok(Self::from_map(target.clone(), target.normalize(raw, Mode::Normal)))
    }

    /// Image in another presentation with the same variables at a level at
    /// least as fine (exponents are rescaled by `p^(level difference)`).
    pub fn transport(&self, target: &Arc<TruncatedAlgebra>) -> Result<PolyElement> {
        let src = &self.alg;
        if target.p() != src.p() || target.vars().len() != src.vars().len() {
            return Err(Error::AmbientMismatch);
        }
        if src.vars().iter().zip(target.vars()).any(|(a, b)| a.name != b.name) {
            return Err(Error::AmbientMismatch);
        }
        if target.level() < src.level() {
            return Err(Error::ExponentLevelMismatch { level: target.level() });
        }
        let f = target.scale() / src.scale();
        let raw = self.terms.iter().map(|(m, c)| (m.iter().map(|e| e * f).collect::<Monomial>(), *c));
        Ok(Self::from_map(target.clone(), target.normalize(raw, Mode::Normal)))
    }

    pub fn lift(&self) -> LiftPoly {
        LiftPoly { alg: self.alg.clone(), terms: self.terms.clone(), prec: self.alg.precision() + crate::exactalg::LIFT_EXTRA }
    }

    /// Smallest graded degree among the terms (scaled units); `None` for zero.
    pub fn order(&self) -> Option<u64> {
        self.terms.keys().map(|m| self.alg.graded_degree(m)).min()
    }

    /// Largest graded degree among the terms, in unscaled units.
    pub fn max_degree(&self) -> f64 {
        self.terms.keys().map(|m| self.alg.graded_degree(m)).max().unwrap_or(0) as f64 / self.alg.scale() as f64
    }
}

fn write_terms(
    f: &mut fmt::Formatter<'_>,
    alg: &TruncatedAlgebra,
    terms: &BTreeMap<Monomial, i128>,
) -> fmt::Result {
    if terms.is_empty() {
        return write!(f, "0");
    }
    let mut first = true;
    // highest total exponent first reads most naturally
    let mut ordered: Vec<_> = terms.iter().collect();
    ordered.sort_by(|a, b| {
        let sa: u64 = a.0.iter().map(|e| *e as u64).sum();
        let sb: u64 = b.0.iter().map(|e| *e as u64).sum();
        sb.cmp(&sa).then_with(|| b.0.cmp(a.0))
    });
    for (m, c) in ordered {
        let mut factors = Vec::new();
        for (e, v) in m.iter().zip(alg.vars()) {
            if *e == 0 {
                continue;
            }
            if *e == alg.scale() {
                factors.push(v.name.clone());
            } else {
                factors.push(format!("{}^{}", v.name, format_exponent(*e, alg.p(), alg.level())));
            }
        }
        let (sign, mag) = if *c < 0 { ("-", -*c) } else { ("+", *c) };
        if first {
            if sign == "-" {
                write!(f, "-")?;
            }
        } else {
            write!(f, " {sign} ")?;
        }
        first = false;
        if factors.is_empty() {
            write!(f, "{mag}")?;
        } else if mag == 1 {
            write!(f, "{}", factors.join("*"))?;
        } else {
            write!(f, "{mag}*{}", factors.join("*"))?;
        }
    }
    Ok(())
}

impl fmt::Display for PolyElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, &self.alg, &self.terms)
    }
}

/// Integer lift of an element: arithmetic with the rewrite relations and the
/// degree cap but without `p -> G` carrying, modulo `p^prec`. Used to compute
/// quotients like `(a^p - b) / p` that are not determined by the normal form
/// of the numerator alone.
#[derive(Clone, Debug)]
pub struct LiftPoly {
    alg: Arc<TruncatedAlgebra>,
    terms: BTreeMap<Monomial, i128>,
    prec: u32,
}

impl LiftPoly {
    /// Raw scaled terms at full lifted precision.
    pub fn from_raw(alg: &Arc<TruncatedAlgebra>, terms: impl IntoIterator<Item = (Monomial, i128)>) -> LiftPoly {
        let lm = alg.lift_modulus();
        let terms = alg.normalize(terms.into_iter().map(|(m, c)| (m, c.rem_euclid(lm))), Mode::Lift);
        let mut out = LiftPoly { alg: alg.clone(), terms, prec: alg.precision() + crate::exactalg::LIFT_EXTRA };
        out.trim();
        out
    }

    pub fn algebra(&self) -> &Arc<TruncatedAlgebra> {
        &self.alg
    }

    /// Number of p-adic digits of the coefficients that are meaningful.
    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, i128> {
        &self.terms
    }

    fn modp(&self) -> i128 {
        (self.alg.p() as i128).pow(self.prec)
    }

    fn build(&self, raw: impl IntoIterator<Item = (Monomial, i128)>, prec: u32) -> LiftPoly {
        let terms = self.alg.normalize(raw, Mode::Lift);
        let mut out = LiftPoly { alg: self.alg.clone(), terms, prec };
        out.trim();
        out
    }

    fn trim(&mut self) {
        let m = self.modp();
        for c in self.terms.values_mut() {
            *c = c.rem_euclid(m);
        }
        self.terms.retain(|_, c| *c != 0);
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &LiftPoly) -> LiftPoly {
        assert!(same_ambient(&self.alg, &o.alg), "ambient mismatch");
        self.build(self.terms.iter().chain(&o.terms).map(|(m, c)| (m.clone(), *c)), self.prec.min(o.prec))
    }

    pub fn sub(&self, o: &LiftPoly) -> LiftPoly {
        self.add(&o.scale(-1))
    }

    pub fn scale(&self, c: i128) -> LiftPoly {
        let m = self.alg.lift_modulus();
        let c = c.rem_euclid(m);
        self.build(self.terms.iter().map(|(mm, a)| (mm.clone(), (a * c).rem_euclid(m))), self.prec)
    }

    pub fn mul(&self, o: &LiftPoly) -> LiftPoly {
        assert!(same_ambient(&self.alg, &o.alg), "ambient mismatch");
        let terms = multiply(&self.alg, &self.terms, &o.terms, Mode::Lift);
        let mut out = LiftPoly { alg: self.alg.clone(), terms, prec: self.prec.min(o.prec) };
        out.trim();
        out
    }

    pub fn pow(&self, mut e: u64) -> LiftPoly {
        let mut base = self.clone();
        let mut acc = self.alg.one().lift();
        acc.prec = self.prec;
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

    /// Exact division by `p`; loses one digit of precision.
    pub fn div_p(&self) -> Result<LiftPoly> {
        let p = self.alg.p() as i128;
        if self.terms.values().any(|c| c % p != 0) {
            return Err(Error::InexactDivision { k: 1 });
        }
        if self.prec == 0 {
            return Err(Error::PrecisionLoss { needed: 1, available: 0 });
        }
        let mut out = LiftPoly {
            alg: self.alg.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c / p)).collect(),
            prec: self.prec - 1,
        };
        out.trim();
        Ok(out)
    }

    /// Image in the algebra. Needs at least `N` meaningful digits.
    pub fn project(&self) -> Result<PolyElement> {
        let n = self.alg.precision();
        if self.prec < n {
            return Err(Error::PrecisionLoss { needed: n, available: self.prec });
        }
        let raw = self.terms.iter().map(|(m, c)| (m.clone(), *c));
        Ok(PolyElement::from_map(self.alg.clone(), self.alg.normalize(raw, Mode::Normal)))
    }
}

impl fmt::Display for LiftPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, &self.alg, &self.terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::AlgebraBuilder;
    use proptest::prelude::*;

    fn unramified() -> Arc<TruncatedAlgebra> {
        AlgebraBuilder::new(3).level(1).precision(3).degree_cap(2).vars(&["pi", "x"]).relation("pi", "p").unwrap().build().unwrap()
    }

    fn ramified() -> Arc<TruncatedAlgebra> {
        AlgebraBuilder::new(2).degree_cap(5).vars(&["t1", "t2"]).p_equals("t1^2+t2^3").unwrap().build().unwrap()
    }

    fn arb_elem(alg: Arc<TruncatedAlgebra>) -> impl Strategy<Value = PolyElement> {
        let basis = alg.basis().unwrap();
        let n = basis.len();
        proptest::collection::vec((0..n, -40i128..40), 0..6).prop_map(move |ts| {
            ts.into_iter().fold(alg.zero(), |acc, (i, c)| acc.add(&alg.monomial(basis[i].clone(), c)))
        })
    }

    #[test]
    fn display_and_parse_round_trip() {
        let a = unramified();
        let e = a.parse("2*pi^(1/3)*x^(4/3) - x + 5").unwrap();
        let back = a.parse(&e.to_string()).unwrap();
        assert_eq!(e, back);
    }

    #[test]
    fn exact_division_drops_precision() {
        let a = unramified();
        let e = a.parse("9*x + 18").unwrap();
        let q = e.exact_div_p(2).unwrap();
        assert_eq!(q.algebra().precision(), 1);
        assert_eq!(q, q.algebra().parse("x + 2").unwrap());
        assert_eq!(a.parse("3*x + 1").unwrap().exact_div_p(1), Err(Error::InexactDivision { k: 1 }));
    }

    #[test]
    fn ambient_mismatch_is_reported() {
        let a = unramified();
        let b = ramified();
        assert_eq!(a.one().try_add(&b.one()), Err(Error::AmbientMismatch));
    }

    #[test]
    fn lift_quotient_matches_hand_computation() {
        // (1 + t1)^2 = 1 + 2 t1 + t1^2, so ((1+t1)^2 - 1 - t1^2) / 2 = t1
        let a = ramified();
        let x = a.parse("1 + t1").unwrap().lift();
        let num = x.pow(2).sub(&a.parse("1").unwrap().lift()).sub(&a.parse("t1^2").unwrap().lift());
        assert_eq!(num.div_p().unwrap().project().unwrap(), a.parse("t1").unwrap());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn ring_axioms_unramified((x, y, z) in (arb_elem(unramified()), arb_elem(unramified()), arb_elem(unramified()))) {
            prop_assert_eq!(x.mul(&y).mul(&z), x.mul(&y.mul(&z)));
            prop_assert_eq!(x.mul(&y.add(&z)), x.mul(&y).add(&x.mul(&z)));
            prop_assert_eq!(x.add(&y), y.add(&x));
        }

        #[test]
        fn ring_axioms_ramified((x, y, z) in (arb_elem(ramified()), arb_elem(ramified()), arb_elem(ramified()))) {
            prop_assert_eq!(x.mul(&y).mul(&z), x.mul(&y.mul(&z)));
            prop_assert_eq!(x.mul(&y.add(&z)), x.mul(&y).add(&x.mul(&z)));
            prop_assert!(x.sub(&x).is_zero());
        }

        #[test]
        fn normal_form_is_idempotent(x in arb_elem(ramified())) {
            let alg = x.algebra().clone();
            let again = alg.normalize(x.terms().iter().map(|(m, c)| (m.clone(), *c)), Mode::Normal);
            prop_assert_eq!(&again, x.terms());
            prop_assert!(x.terms().values().all(|c| (0..2).contains(c)));
        }

        #[test]
        fn lift_projection_is_a_ring_map((x, y) in (arb_elem(ramified()), arb_elem(ramified()))) {
            prop_assert_eq!(x.lift().mul(&y.lift()).project().unwrap(), x.mul(&y));
            prop_assert_eq!(x.lift().add(&y.lift()).project().unwrap(), x.add(&y));
        }
    }
}
