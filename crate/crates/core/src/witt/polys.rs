use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{Error, Result};
use crate::witt::intpoly::IntPoly;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PolyKind {
    Sum,
    Product,
    Negation,
    Frobenius,
}

impl PolyKind {
    pub const ALL: [PolyKind; 4] = [PolyKind::Sum, PolyKind::Product, PolyKind::Negation, PolyKind::Frobenius];

    pub fn name(self) -> &'static str {
        match self {
            PolyKind::Sum => "sum",
            PolyKind::Product => "product",
            PolyKind::Negation => "negation",
            PolyKind::Frobenius => "frobenius",
        }
    }
}

/// Ghost component `w_n = Σ_{j<=n} p^j V_j^{p^(n-j)}` in the variables
/// picked by `var`.
pub fn ghost_poly(p: u64, n: usize, var: fn(usize) -> IntPoly) -> IntPoly {
    let mut acc = IntPoly::zero();
    for j in 0..=n {
        let pj = num_traits::pow(BigInt::from(p), j);
        acc = acc.add(&var(j).pow(p.pow((n - j) as u32)).scale(&pj));
    }
    acc
}

fn target(p: u64, n: usize, kind: PolyKind) -> IntPoly {
    match kind {
        PolyKind::Sum => ghost_poly(p, n, IntPoly::x).add(&ghost_poly(p, n, IntPoly::y)),
        PolyKind::Product => ghost_poly(p, n, IntPoly::x).mul(&ghost_poly(p, n, IntPoly::y)),
        PolyKind::Negation => ghost_poly(p, n, IntPoly::x).neg(),
        PolyKind::Frobenius => ghost_poly(p, n + 1, IntPoly::x),
    }
}

type Cache = Mutex<HashMap<(u64, PolyKind), Arc<Mutex<Vec<IntPoly>>>>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Structure polynomials `Q_0..Q_n` of the given kind, characterized by
/// `w_i(Q_0..Q_i) = target_i`. Every division by `p^i` is checked to be
/// exact. Results are memoized per `(p, kind)`.
pub fn derive_witt_polynomials(p: u64, n: usize, kind: PolyKind) -> Result<Vec<IntPoly>> {
    let slot = {
        let mut c = cache().lock().unwrap();
        c.entry((p, kind)).or_default().clone()
    };
    // the per-key lock serializes derivation of one family
    let mut polys = slot.lock().unwrap();
    while polys.len() <= n {
        let i = polys.len();
        let mut rest = target(p, i, kind);
        for (j, q) in polys.iter().enumerate() {
            let pj = num_traits::pow(BigInt::from(p), j);
            rest = rest.sub(&q.pow(p.pow((i - j) as u32)).scale(&pj));
        }
        let pi = num_traits::pow(BigInt::from(p), i);
        let q = if pi.is_one() { Some(rest) } else { rest.div_exact(&pi) };
        match q {
            Some(q) => polys.push(q),
            None => return Err(Error::IntegralityFailure { kind: kind.name(), index: i }),
        }
    }
    Ok(polys[..=n].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        let x = IntPoly::x;
        let y = IntPoly::y;
        let s = derive_witt_polynomials(2, 1, PolyKind::Sum).unwrap();
        assert_eq!(s[0], x(0).add(&y(0)));
        assert_eq!(s[1], x(1).add(&y(1)).sub(&x(0).mul(&y(0))));
        let f = derive_witt_polynomials(3, 0, PolyKind::Frobenius).unwrap();
        assert_eq!(f[0], x(0).pow(3).add(&x(1).scale(&BigInt::from(3))));
    }
}
