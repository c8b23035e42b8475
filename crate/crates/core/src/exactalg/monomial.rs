use smallvec::SmallVec;

/// Exponent vector scaled to integers by `p^level` of the ambient algebra.
pub type Monomial = SmallVec<[u32; 6]>;

pub fn mono_mul(a: &Monomial, b: &Monomial) -> Monomial {
    a.iter().zip(b.iter()).map(|(x, y)| x + y).collect()
}

pub fn divides(a: &Monomial, b: &Monomial) -> bool {
    a.iter().zip(b.iter()).all(|(x, y)| x <= y)
}

pub fn mono_div(a: &Monomial, b: &Monomial) -> Monomial {
    a.iter().zip(b.iter()).map(|(x, y)| x - y).collect()
}

pub fn lcm(a: &Monomial, b: &Monomial) -> Monomial {
    a.iter().zip(b.iter()).map(|(x, y)| *x.max(y)).collect()
}
