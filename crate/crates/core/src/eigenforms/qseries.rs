//! Exact truncated q-expansions with big-integer coefficients.

use crate::arith::divisor_power_sums;
use crate::error::{Error, Result};
use rug::integer::Order;
use rug::Integer;
use std::cmp::Ordering;

/// A q-expansion Σ_{n≤N} a(n)qⁿ of a modular object of the given weight.
///
/// Every object built here (Eisenstein series, Δ, Miller basis elements and
/// their products) has integral coefficients, so the coefficient ring is ℤ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QSeries {
    pub weight: u32,
    pub coeffs: Vec<Integer>,
}

impl QSeries {
    pub fn new(weight: u32, coeffs: Vec<Integer>) -> Self {
        assert!(!coeffs.is_empty(), "a q-series needs at least the constant term");
        QSeries { weight, coeffs }
    }

    pub fn one(n: usize) -> Self {
        let mut coeffs = vec![Integer::new(); n + 1];
        coeffs[0] = Integer::from(1);
        QSeries { weight: 0, coeffs }
    }

    /// Highest exponent N carried.
    pub fn precision(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, n: usize) -> &Integer {
        &self.coeffs[n]
    }

    pub fn truncate(&self, n: usize) -> QSeries {
        let n = n.min(self.precision());
        QSeries { weight: self.weight, coeffs: self.coeffs[..=n].to_vec() }
    }

    pub fn add(&self, other: &QSeries) -> QSeries {
        let n = self.precision().min(other.precision());
        let coeffs = (0..=n).map(|i| Integer::from(&self.coeffs[i] + &other.coeffs[i])).collect();
        QSeries { weight: self.weight, coeffs }
    }

    pub fn sub(&self, other: &QSeries) -> QSeries {
        let n = self.precision().min(other.precision());
        let coeffs = (0..=n).map(|i| Integer::from(&self.coeffs[i] - &other.coeffs[i])).collect();
        QSeries { weight: self.weight, coeffs }
    }

    pub fn scale(&self, c: &Integer) -> QSeries {
        QSeries { weight: self.weight, coeffs: self.coeffs.iter().map(|a| Integer::from(a * c)).collect() }
    }

    /// In-place `self -= c·other` on the common range.
    pub fn sub_mul_assign(&mut self, c: &Integer, other: &QSeries) {
        let n = self.precision().min(other.precision());
        self.coeffs.truncate(n + 1);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a -= Integer::from(b * c);
        }
    }

    pub fn mul(&self, other: &QSeries) -> QSeries {
        let n = self.precision().min(other.precision());
        let coeffs = kronecker_mul(&self.coeffs[..=n], &other.coeffs[..=n], n + 1);
        QSeries { weight: self.weight + other.weight, coeffs }
    }

    pub fn square(&self) -> QSeries {
        let n = self.precision();
        QSeries { weight: 2 * self.weight, coeffs: kronecker_square(&self.coeffs, n + 1) }
    }

    pub fn pow(&self, e: u32) -> QSeries {
        let mut result = QSeries::one(self.precision());
        let mut base = self.clone();
        let mut rest = e;
        let mut first = true;
        while rest > 0 {
            if rest & 1 == 1 {
                result = if first { base.clone() } else { result.mul(&base) };
                first = false;
            }
            rest >>= 1;
            if rest > 0 {
                base = base.square();
            }
        }
        result.weight = self.weight * e;
        result
    }
}

fn max_bits(c: &[Integer]) -> u32 {
    c.iter().map(|x| x.significant_bits()).max().unwrap_or(0)
}

fn slot_limbs(bits_a: u32, bits_b: u32, len: usize) -> usize {
    let len_bits = usize::BITS - len.leading_zeros();
    let bits = bits_a as usize + bits_b as usize + len_bits as usize + 2;
    bits.div_ceil(64)
}

fn pack(c: &[Integer], slot: usize) -> Integer {
    let mut pos = vec![0u64; c.len() * slot];
    let mut neg = vec![0u64; c.len() * slot];
    let mut any_neg = false;
    for (i, x) in c.iter().enumerate() {
        let range = i * slot..(i + 1) * slot;
        match x.cmp0() {
            Ordering::Less => {
                any_neg = true;
                x.write_digits(&mut neg[range], Order::Lsf);
            }
            Ordering::Greater => x.write_digits(&mut pos[range], Order::Lsf),
            Ordering::Equal => {}
        }
    }
    let mut out = Integer::from_digits(&pos, Order::Lsf);
    if any_neg {
        out -= Integer::from_digits(&neg, Order::Lsf);
    }
    out
}

/// Recovers `count` signed slot values from a packed integer whose slots
/// satisfy |c_i| < 2^{64·slot−1}.
fn unpack(x: &Integer, slot: usize, count: usize) -> Vec<Integer> {
    let negative = x.cmp0() == Ordering::Less;
    let digits: Vec<u64> = x.to_digits(Order::Lsf);
    let modulus = Integer::from(1) << (64 * slot) as u32;
    let mut out = Vec::with_capacity(count);
    let mut carry = false;
    let mut chunk = vec![0u64; slot];
    for i in 0..count {
        for (j, c) in chunk.iter_mut().enumerate() {
            *c = digits.get(i * slot + j).copied().unwrap_or(0);
        }
        if carry {
            let mut overflow = true;
            for c in chunk.iter_mut() {
                let (v, o) = c.overflowing_add(1);
                *c = v;
                if !o {
                    overflow = false;
                    break;
                }
            }
            if overflow {
                out.push(Integer::new());
                continue;
            }
        }
        let top_set = chunk[slot - 1] >> 63 == 1;
        let mut v = Integer::from_digits(&chunk, Order::Lsf);
        if top_set {
            v -= &modulus;
            carry = true;
        } else {
            carry = false;
        }
        if negative {
            v = -v;
        }
        out.push(v);
    }
    out
}

/// First `len` coefficients of the product of two integer power series,
/// by Kronecker substitution into a single GMP multiplication.
pub fn kronecker_mul(a: &[Integer], b: &[Integer], len: usize) -> Vec<Integer> {
    let a = &a[..a.len().min(len)];
    let b = &b[..b.len().min(len)];
    if a.is_empty() || b.is_empty() {
        return vec![Integer::new(); len];
    }
    let slot = slot_limbs(max_bits(a), max_bits(b), a.len().min(b.len()));
    let pa = pack(a, slot);
    let pb = pack(b, slot);
    let prod = pa * pb;
    unpack(&prod, slot, len)
}

pub fn kronecker_square(a: &[Integer], len: usize) -> Vec<Integer> {
    let a = &a[..a.len().min(len)];
    if a.is_empty() {
        return vec![Integer::new(); len];
    }
    let bits = max_bits(a);
    let slot = slot_limbs(bits, bits, a.len());
    let pa = pack(a, slot);
    let prod = pa.square();
    unpack(&prod, slot, len)
}

/// E₄ or E₆ to precision N.
pub fn eisenstein(weight: u32, n: usize) -> Result<QSeries> {
    let (r, c): (u32, i64) = match weight {
        4 => (3, 240),
        6 => (5, -504),
        _ => return Err(Error::InvalidArgument(format!("eisenstein: weight {weight} not in {{4, 6}}"))),
    };
    if n < 1 {
        return Err(Error::InvalidArgument("eisenstein: precision must be at least 1".into()));
    }
    let sigma = divisor_power_sums(r, n);
    let mut coeffs = Vec::with_capacity(n + 1);
    coeffs.push(Integer::from(1));
    for s in &sigma[1..] {
        coeffs.push(Integer::from(*s) * c);
    }
    Ok(QSeries { weight, coeffs })
}

/// Π_{n≥1}(1 − qⁿ)³ via Jacobi's identity.
fn eta_cubed(n: usize) -> Vec<Integer> {
    let mut out = vec![Integer::new(); n + 1];
    let mut k = 0usize;
    loop {
        let e = k * (k + 1) / 2;
        if e > n {
            break;
        }
        let v = (2 * k + 1) as i64;
        out[e] = Integer::from(if k % 2 == 0 { v } else { -v });
        k += 1;
    }
    out
}

/// Δ = qΠ(1 − qⁿ)²⁴ to precision N; coefficients are τ(n).
pub fn delta(n: usize) -> Result<QSeries> {
    if n < 1 {
        return Err(Error::InvalidArgument("delta: precision must be at least 1".into()));
    }
    let mut e = eta_cubed(n - 1);
    for _ in 0..3 {
        e = kronecker_square(&e, n);
    }
    let mut coeffs = Vec::with_capacity(n + 1);
    coeffs.push(Integer::new());
    coeffs.extend(e.into_iter().take(n));
    Ok(QSeries { weight: 12, coeffs })
}
