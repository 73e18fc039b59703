//! The integral echelon (Miller) basis of S_k(SL₂(ℤ)) and Hecke matrices on it.

use super::poly::{charpoly, IntPoly};
use super::qseries::{delta, eisenstein, QSeries};
use crate::arith::{cusp_dimension, is_prime};
use crate::error::{Error, Result};
use rug::Integer;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;

/// Generators of the ring of level-one modular forms at a fixed precision,
/// with cached powers so that bases for several weights share the work.
pub struct ModularRing {
    n: usize,
    e4: QSeries,
    e6: QSeries,
    delta_pows: HashMap<u32, QSeries>,
    e4_pows: HashMap<u32, QSeries>,
}

impl ModularRing {
    pub fn new(n: usize) -> Result<Self> {
        let e4 = eisenstein(4, n)?;
        let e6 = eisenstein(6, n)?;
        let mut delta_pows = HashMap::new();
        delta_pows.insert(1, delta(n)?);
        let mut e4_pows = HashMap::new();
        e4_pows.insert(0, QSeries::one(n));
        e4_pows.insert(1, e4.clone());
        Ok(ModularRing { n, e4, e6, delta_pows, e4_pows })
    }

    pub fn precision(&self) -> usize {
        self.n
    }

    fn delta_pow(&mut self, j: u32) -> QSeries {
        if let Some(s) = self.delta_pows.get(&j) {
            return s.clone();
        }
        let below = self.delta_pow(j - 1);
        let d = self.delta_pows[&1].clone();
        let s = below.mul(&d);
        self.delta_pows.insert(j, s.clone());
        s
    }

    fn e4_pow(&mut self, a: u32) -> QSeries {
        if let Some(s) = self.e4_pows.get(&a) {
            return s.clone();
        }
        let below = self.e4_pow(a - 1);
        let s = below.mul(&self.e4);
        self.e4_pows.insert(a, s.clone());
        s
    }

    /// Miller basis g₁..g_d of S_k with a_{g_i}(j) = δ_ij for 1 ≤ i, j ≤ d.
    pub fn miller_basis(&mut self, k: u32) -> Result<Vec<QSeries>> {
        if k % 2 == 1 || k < 12 {
            return Err(Error::InvalidArgument(format!("miller_basis: weight {k} must be even and at least 12")));
        }
        let d = cusp_dimension(k);
        if self.n < d {
            return Err(Error::InsufficientPrecision { required: d, available: self.n });
        }
        let mut basis = Vec::with_capacity(d);
        for j in 1..=d as u32 {
            let rest = k - 12 * j;
            let b = if rest % 4 == 2 { 1 } else { 0 };
            let a = (rest - 6 * b) / 4;
            let mut g = self.delta_pow(j).mul(&self.e4_pow(a));
            if b == 1 {
                g = g.mul(&self.e6);
            }
            g.weight = k;
            basis.push(g);
        }
        // g_j = q^j + O(q^{j+1}); clear the entries above the diagonal bottom-up.
        for i in (0..d).rev() {
            let coefs: Vec<(usize, Integer)> =
                (i + 1..d).map(|j| (j, basis[i].coeffs[j + 1].clone())).filter(|(_, c)| *c != 0).collect();
            for (j, c) in coefs {
                let gj = basis[j].clone();
                basis[i].sub_mul_assign(&c, &gj);
            }
        }
        Ok(basis)
    }
}

pub fn miller_basis(k: u32, n: usize) -> Result<Vec<QSeries>> {
    ModularRing::new(n)?.miller_basis(k)
}

/// Operators used to split the cusp space into eigenlines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HeckeOperator {
    T(u64),
    Sum(u64, u64),
}

impl HeckeOperator {
    /// T₂, then T₃, T₅, T₂+T₃.
    pub fn fallback_chain() -> Vec<HeckeOperator> {
        vec![HeckeOperator::T(2), HeckeOperator::T(3), HeckeOperator::T(5), HeckeOperator::Sum(2, 3)]
    }

    pub fn max_prime(&self) -> u64 {
        match *self {
            HeckeOperator::T(p) => p,
            HeckeOperator::Sum(p, q) => p.max(q),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        if let Some((a, b)) = s.split_once('+') {
            let p = a.trim().strip_prefix('T')?.parse().ok()?;
            let q = b.trim().strip_prefix('T')?.parse().ok()?;
            return Some(HeckeOperator::Sum(p, q));
        }
        s.strip_prefix('T')?.parse().ok().map(HeckeOperator::T)
    }
}

impl fmt::Display for HeckeOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeckeOperator::T(p) => write!(f, "T{p}"),
            HeckeOperator::Sum(p, q) => write!(f, "T{p}+T{q}"),
        }
    }
}

/// Matrix of a Hecke operator on the echelon basis: entry (i, j) is the
/// coefficient of q^{i+1} in T g_{j+1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeckeMatrix {
    pub weight: u32,
    pub operator: HeckeOperator,
    pub entries: Vec<Vec<Integer>>,
}

impl HeckeMatrix {
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn prime(&self) -> Option<u64> {
        match self.operator {
            HeckeOperator::T(p) => Some(p),
            HeckeOperator::Sum(..) => None,
        }
    }

    pub fn charpoly(&self) -> IntPoly {
        charpoly(&self.entries)
    }

    pub fn mul(&self, other: &HeckeMatrix) -> Vec<Vec<Integer>> {
        let n = self.dim();
        let mut out = vec![vec![Integer::new(); n]; n];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                for l in 0..n {
                    *cell += Integer::from(&self.entries[i][l] * &other.entries[l][j]);
                }
            }
        }
        out
    }

    pub fn commutes_with(&self, other: &HeckeMatrix) -> bool {
        self.mul(other) == other.mul(self)
    }

    pub fn trace(&self) -> Integer {
        self.entries.iter().enumerate().map(|(i, r)| r[i].clone()).sum()
    }
}

/// a_{T_p g}(n) = a_g(pn) + p^{k−1} a_g(n/p).
pub fn hecke_coeff(g: &QSeries, k: u32, p: u64, n: usize) -> Integer {
    let p_us = p as usize;
    let mut v = g.coeffs[p_us * n].clone();
    if n % p_us == 0 {
        v += Integer::from(Integer::u_pow_u(p as u32, k - 1)) * &g.coeffs[n / p_us];
    }
    v
}

pub fn hecke_matrix(k: u32, basis: &[QSeries], p: u64) -> Result<HeckeMatrix> {
    if !is_prime(p) {
        return Err(Error::InvalidArgument(format!("hecke_matrix: {p} is not prime")));
    }
    let d = basis.len();
    let required = p as usize * d;
    let available = basis.iter().map(|g| g.precision()).min().unwrap_or(usize::MAX);
    if d > 0 && available < required {
        return Err(Error::InsufficientPrecision { required, available });
    }
    let mut entries = vec![vec![Integer::new(); d]; d];
    for (j, g) in basis.iter().enumerate() {
        for (i, row) in entries.iter_mut().enumerate() {
            row[j] = hecke_coeff(g, k, p, i + 1);
        }
    }
    Ok(HeckeMatrix { weight: k, operator: HeckeOperator::T(p), entries })
}

pub fn operator_matrix(k: u32, basis: &[QSeries], op: HeckeOperator) -> Result<HeckeMatrix> {
    match op {
        HeckeOperator::T(p) => hecke_matrix(k, basis, p),
        HeckeOperator::Sum(p, q) => {
            let a = hecke_matrix(k, basis, p)?;
            let b = hecke_matrix(k, basis, q)?;
            let entries = a
                .entries
                .iter()
                .zip(&b.entries)
                .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| Integer::from(x + y)).collect())
                .collect();
            Ok(HeckeMatrix { weight: k, operator: op, entries })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_12_is_delta() {
        let b = miller_basis(12, 10).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0], delta(10).unwrap());
    }

    #[test]
    fn echelon_block_is_identity() {
        for k in [24u32, 26, 36, 48, 60] {
            let d = cusp_dimension(k);
            let b = miller_basis(k, 3 * d + 4).unwrap();
            assert_eq!(b.len(), d);
            for (i, g) in b.iter().enumerate() {
                assert_eq!(*g.coeff(0), 0);
                for j in 1..=d {
                    assert_eq!(*g.coeff(j), Integer::from((i + 1 == j) as i32), "k={k} i={i} j={j}");
                }
            }
        }
        assert_eq!(miller_basis(26, 10).unwrap().len(), 1);
    }

    #[test]
    fn too_short_is_rejected() {
        assert!(matches!(miller_basis(48, 3), Err(Error::InsufficientPrecision { required: 4, available: 3 })));
    }

    #[test]
    fn hecke_k12_p2() {
        let b = miller_basis(12, 10).unwrap();
        let m = hecke_matrix(12, &b, 2).unwrap();
        assert_eq!(m.entries, vec![vec![Integer::from(-24)]]);
    }

    #[test]
    fn hecke_k24_charpoly() {
        let b = miller_basis(24, 20).unwrap();
        let m = hecke_matrix(24, &b, 2).unwrap();
        let cp = m.charpoly();
        let want: Vec<Integer> = [-20468736i64, -1080, 1].iter().map(|&c| Integer::from(c)).collect();
        assert_eq!(cp.coeffs, want);
        // trace = a_{T₂g₁}(1) + a_{T₂g₂}(2)
        let tr = hecke_coeff(&b[0], 24, 2, 1) + hecke_coeff(&b[1], 24, 2, 2);
        assert_eq!(m.trace(), tr);
    }

    #[test]
    fn hecke_precision_error_names_requirement() {
        let b = miller_basis(24, 5).unwrap();
        match hecke_matrix(24, &b, 3) {
            Err(Error::InsufficientPrecision { required, available }) => {
                assert_eq!(required, 6);
                assert_eq!(available, 5);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn hecke_matrices_commute() {
        for k in [24u32, 36, 48] {
            let d = cusp_dimension(k);
            let b = miller_basis(k, 7 * d + 1).unwrap();
            let m2 = hecke_matrix(k, &b, 2).unwrap();
            let m3 = hecke_matrix(k, &b, 3).unwrap();
            let m5 = hecke_matrix(k, &b, 5).unwrap();
            let m7 = hecke_matrix(k, &b, 7).unwrap();
            assert!(m2.commutes_with(&m3));
            assert!(m3.commutes_with(&m5));
            assert!(m2.commutes_with(&m7));
        }
    }

    #[test]
    fn operator_names_roundtrip() {
        for op in HeckeOperator::fallback_chain() {
            assert_eq!(HeckeOperator::parse(&op.to_string()), Some(op));
        }
    }
}
