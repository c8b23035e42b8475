//! Dense linear algebra over `Z/p^K`.
//!
//! Matrices are stored row-major with one row per equation. Elimination uses
//! full pivoting on minimal p-adic valuation and only row operations, so the
//! unknowns keep their meaning and solutions read off directly.

use crate::error::{Error, Result};

pub(crate) fn valuation(c: i128, p: i128, cap: u32) -> u32 {
    if c == 0 {
        return cap;
    }
    let mut v = 0;
    let mut c = c;
    while c % p == 0 && v < cap {
        c /= p;
        v += 1;
    }
    v
}

pub(crate) fn inverse_mod(a: i128, m: i128) -> Option<i128> {
    let (mut r0, mut r1) = (a.rem_euclid(m), m);
    let (mut s0, mut s1) = (1i128, 0i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    if r0 == 1 || (m == 1) {
        Some(s0.rem_euclid(m))
    } else {
        None
    }
}

/// `Z/p^k` with `p^k < 2^62`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModRing {
    pub p: i128,
    pub k: u32,
    pub modulus: i128,
}

impl ModRing {
    pub fn new(p: u64, k: u32) -> Result<Self> {
        let p = p as i128;
        let modulus = p.checked_pow(k).filter(|m| *m < (1 << 62)).ok_or(Error::Overflow)?;
        Ok(ModRing { p, k, modulus })
    }

    pub fn reduce(&self, c: i128) -> i128 {
        c.rem_euclid(self.modulus)
    }

    pub fn mul(&self, a: i128, b: i128) -> i128 {
        (a * b).rem_euclid(self.modulus)
    }

    pub fn val(&self, c: i128) -> u32 {
        valuation(self.reduce(c), self.p, self.k)
    }
}

/// Result of forward elimination of `[A | B]` where pivots are only taken in
/// the first `ncols` columns.
#[derive(Debug, Clone)]
pub struct Elimination {
    ring: ModRing,
    rows: Vec<Vec<i128>>,
    ncols: usize,
    /// (row, col, valuation) in elimination order; valuations nondecreasing.
    pivots: Vec<(usize, usize, u32)>,
}

const MAX_ENTRIES: usize = 60_000_000;

impl Elimination {
    pub fn new(ring: ModRing, mut rows: Vec<Vec<i128>>, ncols: usize) -> Result<Self> {
        let width = rows.first().map_or(ncols, |r| r.len());
        if rows.len().saturating_mul(width) > MAX_ENTRIES {
            return Err(Error::TooLarge(rows.len().saturating_mul(width)));
        }
        for r in rows.iter_mut() {
            for c in r.iter_mut() {
                *c = ring.reduce(*c);
            }
        }
        let mut e = Elimination { ring, rows, ncols, pivots: Vec::new() };
        e.forward();
        Ok(e)
    }

    fn forward(&mut self) {
        let ring = self.ring;
        let nrows = self.rows.len();
        let mut row_done = vec![false; nrows];
        let mut col_done = vec![false; self.ncols];
        loop {
            // minimal valuation among remaining entries
            let mut best: Option<(usize, usize, u32)> = None;
            'search: for (i, row) in self.rows.iter().enumerate() {
                if row_done[i] {
                    continue;
                }
                for (j, &c) in row[..self.ncols].iter().enumerate() {
                    if c == 0 || col_done[j] {
                        continue;
                    }
                    let v = valuation(c, ring.p, ring.k);
                    if best.map_or(true, |b| v < b.2) {
                        best = Some((i, j, v));
                        if v == 0 {
                            break 'search;
                        }
                    }
                }
            }
            let Some((pr, pc, v)) = best else { break };
            row_done[pr] = true;
            col_done[pc] = true;
            self.pivots.push((pr, pc, v));
            let pv = ring.p.pow(v);
            let unit = self.rows[pr][pc] / pv;
            let uinv = inverse_mod(unit, ring.modulus).expect("pivot unit");
            let prow = self.rows[pr].clone();
            let nz: Vec<usize> = (0..prow.len()).filter(|&j| prow[j] != 0).collect();
            for i in 0..nrows {
                if row_done[i] {
                    continue;
                }
                let a = self.rows[i][pc];
                if a == 0 {
                    continue;
                }
                let f = ring.mul(a / pv, uinv);
                let row = &mut self.rows[i];
                for &j in &nz {
                    row[j] = (row[j] - ring.mul(f, prow[j])).rem_euclid(ring.modulus);
                }
            }
        }
    }

    pub fn ring(&self) -> ModRing {
        self.ring
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn pivots(&self) -> &[(usize, usize, u32)] {
        &self.pivots
    }

    /// Back substitution with free unknowns set to zero, or `None` when
    /// the system is inconsistent.
    fn back_substitute(&self, rhs: &dyn Fn(usize) -> i128) -> Option<Vec<i128>> {
        let ring = self.ring;
        let mut x = vec![0i128; self.ncols];
        let pivot_rows: std::collections::HashSet<usize> = self.pivots.iter().map(|p| p.0).collect();
        for i in 0..self.rows.len() {
            if !pivot_rows.contains(&i) && ring.reduce(rhs(i)) != 0 {
                return None;
            }
        }
        for &(r, c, v) in self.pivots.iter().rev() {
            let row = &self.rows[r];
            let mut s = ring.reduce(rhs(r));
            for (j, &a) in row[..self.ncols].iter().enumerate() {
                if j != c && a != 0 && x[j] != 0 {
                    s = (s - ring.mul(a, x[j])).rem_euclid(ring.modulus);
                }
            }
            let pv = ring.p.pow(v);
            if s % pv != 0 {
                return None;
            }
            let unit = row[c] / pv;
            x[c] = ring.mul(s / pv, inverse_mod(unit, ring.modulus).unwrap());
        }
        Some(x)
    }

    /// Solution of `A x = b` where `b` is the augmented column `t`.
    pub fn solve_augmented(&self, t: usize) -> Option<Vec<i128>> {
        let col = self.ncols + t;
        self.back_substitute(&|i| self.rows[i][col])
    }

    /// Generators of `{x : A x = 0}` over `Z/p^K`.
    pub fn kernel(&self) -> Vec<Vec<i128>> {
        let ring = self.ring;
        let pivot_cols: std::collections::HashSet<usize> = self.pivots.iter().map(|p| p.1).collect();
        let mut out = Vec::new();
        for j in 0..self.ncols {
            if !pivot_cols.contains(&j) {
                if let Some(x) = self.kernel_vector(&[(j, 1)]) {
                    out.push(x);
                }
            }
        }
        for &(_, c, v) in &self.pivots {
            if v > 0 {
                if let Some(x) = self.kernel_vector(&[(c, ring.p.pow(ring.k - v.min(ring.k)))]) {
                    out.push(x);
                }
            }
        }
        out
    }

    fn kernel_vector(&self, seed: &[(usize, i128)]) -> Option<Vec<i128>> {
        // the seeded pivot row balances automatically: its other entries
        // sit at later pivots or free columns, all zero here
        let ring = self.ring;
        let mut x = vec![0i128; self.ncols];
        for &(j, c) in seed {
            x[j] = ring.reduce(c);
        }
        let seeded: Vec<usize> = seed.iter().map(|s| s.0).collect();
        for &(r, c, v) in self.pivots.iter().rev() {
            if seeded.contains(&c) {
                continue;
            }
            let row = &self.rows[r];
            let mut s = 0i128;
            for (j, &a) in row[..self.ncols].iter().enumerate() {
                if j != c && a != 0 && x[j] != 0 {
                    s = (s - ring.mul(a, x[j])).rem_euclid(ring.modulus);
                }
            }
            let pv = ring.p.pow(v);
            if s % pv != 0 {
                return None;
            }
            let unit = row[c] / pv;
            x[c] = ring.mul(s / pv, inverse_mod(unit, ring.modulus).unwrap());
        }
        Some(x)
    }
}

/// Solves `A x = b` over `Z/p^K`; `a` has one row per equation.
pub fn solve(ring: ModRing, a: &[Vec<i128>], b: &[i128]) -> Result<Option<Vec<i128>>> {
    let ncols = a.first().map_or(0, |r| r.len());
    let rows: Vec<Vec<i128>> = a.iter().zip(b).map(|(r, bi)| {
        let mut r = r.clone();
        r.push(*bi);
        r
    }).collect();
    let e = Elimination::new(ring, rows, ncols)?;
    Ok(e.solve_augmented(0))
}

pub fn kernel(ring: ModRing, a: &[Vec<i128>], ncols: usize) -> Result<Vec<Vec<i128>>> {
    Ok(Elimination::new(ring, a.to_vec(), ncols)?.kernel())
}

pub fn mat_vec(ring: ModRing, a: &[Vec<i128>], x: &[i128]) -> Vec<i128> {
    a.iter()
        .map(|r| r.iter().zip(x).fold(0i128, |s, (aij, xj)| (s + ring.mul(*aij, *xj)) % ring.modulus))
        .collect()
}
