//! Exact integer polynomials: discriminants, Sturm sequences and certified
//! real-root isolation and refinement.

use rug::{Float, Integer, Rational};
use std::cmp::Ordering;

/// Polynomial with integer coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntPoly {
    pub coeffs: Vec<Integer>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<Integer>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.cmp0() == Ordering::Equal) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> &Integer {
        self.coeffs.last().expect("nonempty")
    }

    pub fn derivative(&self) -> IntPoly {
        if self.coeffs.len() <= 1 {
            return IntPoly::new(vec![Integer::new()]);
        }
        IntPoly::new(self.coeffs.iter().enumerate().skip(1).map(|(i, c)| Integer::from(c * i as u32)).collect())
    }

    pub fn eval_rational(&self, x: &Rational) -> Rational {
        let mut acc = Rational::new();
        for c in self.coeffs.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    pub fn eval_float(&self, x: &Float) -> Float {
        let mut acc = Float::new(x.prec());
        for c in self.coeffs.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    pub fn sign_at(&self, x: &Rational) -> Ordering {
        self.eval_rational(x).cmp0()
    }

    fn to_rational(&self) -> Vec<Rational> {
        self.coeffs.iter().map(Rational::from).collect()
    }

    /// Resultant of `self` and `other` via the Sylvester determinant.
    pub fn resultant(&self, other: &IntPoly) -> Integer {
        let m = self.degree();
        let n = other.degree();
        let size = m + n;
        if size == 0 {
            return Integer::from(1);
        }
        let mut rows = vec![vec![Integer::new(); size]; size];
        for (i, row) in rows.iter_mut().enumerate().take(n) {
            for (j, c) in self.coeffs.iter().rev().enumerate() {
                row[i + j] = c.clone();
            }
        }
        for i in 0..m {
            for (j, c) in other.coeffs.iter().rev().enumerate() {
                rows[n + i][i + j] = c.clone();
            }
        }
        bareiss_determinant(rows)
    }

    /// Discriminant (−1)^{n(n−1)/2} Res(f, f′)/lc(f).
    pub fn discriminant(&self) -> Integer {
        let n = self.degree();
        if n == 0 {
            return Integer::from(1);
        }
        if n == 1 {
            return Integer::from(1);
        }
        let res = self.resultant(&self.derivative());
        let mut d = res / self.leading();
        if (n * (n - 1) / 2) % 2 == 1 {
            d = -d;
        }
        d
    }

    pub fn is_squarefree(&self) -> bool {
        self.discriminant().cmp0() != Ordering::Equal
    }

    /// Squarefree part f / gcd(f, f′), made primitive with positive leading coefficient.
    pub fn squarefree_part(&self) -> IntPoly {
        if self.degree() == 0 {
            return self.clone();
        }
        let g = rat_gcd(&self.to_rational(), &self.derivative().to_rational());
        let (q, _) = rat_divrem(&self.to_rational(), &g);
        primitive(&q)
    }

    /// Sturm sequence f, f′, −rem(…), … over ℚ.
    pub fn sturm(&self) -> Vec<Vec<Rational>> {
        let mut seq = vec![self.to_rational(), self.derivative().to_rational()];
        loop {
            let n = seq.len();
            if is_zero(&seq[n - 1]) {
                seq.pop();
                break;
            }
            let (_, r) = rat_divrem(&seq[n - 2], &seq[n - 1]);
            if is_zero(&r) {
                break;
            }
            seq.push(r.into_iter().map(|c| -c).collect());
        }
        seq
    }

    /// Cauchy bound: all real roots lie in (−B, B).
    pub fn root_bound(&self) -> Integer {
        let lc = Integer::from(self.leading().abs_ref());
        let mut m = Integer::new();
        for c in &self.coeffs[..self.degree()] {
            let q = rug::ops::DivRounding::div_ceil(Integer::from(c.abs_ref()), &lc);
            if q > m {
                m = q;
            }
        }
        m + 1
    }

    /// Disjoint half-open intervals (a, b], each holding exactly one real root,
    /// in increasing order. Distinct roots only.
    pub fn isolate_real_roots(&self) -> Vec<(Rational, Rational)> {
        if self.degree() == 0 {
            return Vec::new();
        }
        let seq = self.sturm();
        let b = Rational::from(self.root_bound());
        let a = Rational::from(-&b);
        let mut out = Vec::new();
        let mut stack = vec![(a, b)];
        while let Some((lo, hi)) = stack.pop() {
            let n = sturm_variations(&seq, &lo) as i64 - sturm_variations(&seq, &hi) as i64;
            if n <= 0 {
                continue;
            }
            if n == 1 {
                out.push((lo, hi));
                continue;
            }
            let mid = Rational::from(&lo + &hi) / 2u32;
            stack.push((lo, mid.clone()));
            stack.push((mid, hi));
        }
        out.sort_by(|x, y| x.0.cmp(&y.0));
        out
    }

    /// Refines the unique root in (lo, hi] to `prec` bits: rational bisection
    /// to a modest width, then Newton steps whose result is certified by an
    /// exact sign change; bisection takes over if certification fails.
    pub fn refine_root(&self, lo: &Rational, hi: &Rational, prec: u32) -> Float {
        if self.sign_at(hi) == Ordering::Equal {
            return Float::with_val(prec, hi);
        }
        let mut lo = lo.clone();
        let mut hi = hi.clone();
        let s_hi = self.sign_at(&hi);
        let scale_bits = {
            let m = Rational::from(lo.abs_ref()).max(Rational::from(hi.abs_ref()));
            let f = Float::with_val(64, &m);
            if f > 1 {
                f.log2().to_f64().ceil() as i64
            } else {
                0
            }
        };
        let coarse = -(48 - scale_bits).max(8);
        if let Some(exact) = bisect(self, &mut lo, &mut hi, s_hi, coarse) {
            return Float::with_val(prec, &exact);
        }
        let wp = prec + 64;
        let deriv = self.derivative();
        let mut x = Float::with_val(wp, Rational::from(&lo + &hi) / 2u32);
        for _ in 0..64 {
            let fx = self.eval_float(&x);
            let dfx = deriv.eval_float(&x);
            if dfx.is_zero() {
                break;
            }
            let step = Float::with_val(wp, &fx / &dfx);
            x -= &step;
            let sb = if step.is_zero() { i64::MIN } else { step.get_exp().unwrap_or(0) as i64 };
            if sb < scale_bits - prec as i64 - 32 {
                break;
            }
        }
        let delta = Rational::from((Integer::from(1), Integer::from(1) << (prec as i64 + 8 - scale_bits).max(1) as u32));
        if let Some(xr) = x.to_rational() {
            let a = Rational::from(&xr - &delta);
            let b = Rational::from(&xr + &delta);
            let sa = self.sign_at(&a);
            let sb = self.sign_at(&b);
            if sa != Ordering::Equal && sb != Ordering::Equal && sa != sb && a > lo && b <= hi {
                return Float::with_val(prec, &x);
            }
        }
        if let Some(exact) = bisect(self, &mut lo, &mut hi, s_hi, scale_bits - prec as i64 - 8) {
            return Float::with_val(prec, &exact);
        }
        Float::with_val(prec, Rational::from(&lo + &hi) / 2u32)
    }

    /// All distinct real roots to `prec` bits, increasing.
    pub fn real_roots(&self, prec: u32) -> Vec<Float> {
        self.isolate_real_roots().iter().map(|(a, b)| self.refine_root(a, b, prec)).collect()
    }
}

/// Shrinks (lo, hi] around its root until the width is at most 2^width_exp.
/// Returns the root when a midpoint hits it exactly.
fn bisect(p: &IntPoly, lo: &mut Rational, hi: &mut Rational, s_hi: Ordering, width_exp: i64) -> Option<Rational> {
    let target = if width_exp >= 0 {
        Rational::from(Integer::from(1) << width_exp as u32)
    } else {
        Rational::from((Integer::from(1), Integer::from(1) << (-width_exp) as u32))
    };
    while Rational::from(&*hi - &*lo) > target {
        let mid = Rational::from(&*lo + &*hi) / 2u32;
        let s = p.sign_at(&mid);
        if s == Ordering::Equal {
            return Some(mid);
        }
        if s == s_hi {
            *hi = mid;
        } else {
            *lo = mid;
        }
    }
    None
}

fn sturm_variations(seq: &[Vec<Rational>], x: &Rational) -> usize {
    let mut prev = Ordering::Equal;
    let mut count = 0;
    for p in seq {
        let mut acc = Rational::new();
        for c in p.iter().rev() {
            acc *= x;
            acc += c;
        }
        let s = acc.cmp0();
        if s == Ordering::Equal {
            continue;
        }
        if prev != Ordering::Equal && s != prev {
            count += 1;
        }
        prev = s;
    }
    count
}

fn is_zero(p: &[Rational]) -> bool {
    p.iter().all(|c| c.cmp0() == Ordering::Equal)
}

fn trim(mut p: Vec<Rational>) -> Vec<Rational> {
    while p.len() > 1 && p.last().is_some_and(|c| c.cmp0() == Ordering::Equal) {
        p.pop();
    }
    p
}

fn rat_divrem(a: &[Rational], b: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let b = trim(b.to_vec());
    let mut r = trim(a.to_vec());
    let db = b.len() - 1;
    if r.len() < b.len() {
        return (vec![Rational::new()], r);
    }
    let mut q = vec![Rational::new(); r.len() - db];
    let lb = b[db].clone();
    while r.len() > db && !is_zero(&r) {
        let dr = r.len() - 1;
        if dr < db {
            break;
        }
        let c = Rational::from(&r[dr] / &lb);
        let shift = dr - db;
        for (i, bc) in b.iter().enumerate() {
            r[shift + i] -= Rational::from(bc * &c);
        }
        q[shift] = c;
        r.pop();
        r = trim(r);
        if r.len() == 1 && db == 0 {
            break;
        }
    }
    (q, trim(r))
}

fn rat_gcd(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut x = trim(a.to_vec());
    let mut y = trim(b.to_vec());
    while !is_zero(&y) {
        let (_, r) = rat_divrem(&x, &y);
        x = y;
        y = r;
    }
    x
}

fn primitive(p: &[Rational]) -> IntPoly {
    let mut den = Integer::from(1);
    for c in p {
        den.lcm_mut(c.denom());
    }
    let ints: Vec<Integer> = p.iter().map(|c| Integer::from(c.numer() * Integer::from(&den / c.denom()))).collect();
    let mut g = Integer::new();
    for c in &ints {
        g.gcd_mut(c);
    }
    let mut ints: Vec<Integer> = ints.into_iter().map(|c| if g.cmp0() == Ordering::Equal { c } else { c / &g }).collect();
    if ints.last().is_some_and(|c| c.cmp0() == Ordering::Less) {
        for c in ints.iter_mut() {
            *c = Integer::from(-&*c);
        }
    }
    IntPoly::new(ints)
}

/// Fraction-free Gaussian elimination.
pub fn bareiss_determinant(mut m: Vec<Vec<Integer>>) -> Integer {
    let n = m.len();
    let mut sign = 1i32;
    let mut prev = Integer::from(1);
    for k in 0..n {
        if m[k][k].cmp0() == Ordering::Equal {
            let Some(swap) = (k + 1..n).find(|&i| m[i][k].cmp0() != Ordering::Equal) else {
                return Integer::new();
            };
            m.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = Integer::from(&m[i][j] * &m[k][k]) - Integer::from(&m[i][k] * &m[k][j]);
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if sign < 0 {
        -d
    } else {
        d
    }
}

/// Characteristic polynomial det(xI − A) by Faddeev–LeVerrier in exact integers.
pub fn charpoly(a: &[Vec<Integer>]) -> IntPoly {
    let n = a.len();
    let mut coeffs = vec![Integer::new(); n + 1];
    coeffs[n] = Integer::from(1);
    let mut m = vec![vec![Integer::new(); n]; n];
    for k in 1..=n {
        // M_k = A·M_{k−1} + c_{n−k+1} I
        let mut next = vec![vec![Integer::new(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = Integer::new();
                for (l, row) in m.iter().enumerate() {
                    acc += Integer::from(&a[i][l] * &row[j]);
                }
                next[i][j] = acc;
            }
            next[i][i] += &coeffs[n - k + 1];
        }
        m = next;
        let mut tr = Integer::new();
        for i in 0..n {
            for l in 0..n {
                tr += Integer::from(&a[i][l] * &m[l][i]);
            }
        }
        coeffs[n - k] = -(tr / k as u32);
    }
    IntPoly::new(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ip(v: &[i64]) -> IntPoly {
        IntPoly::new(v.iter().map(|&c| Integer::from(c)).collect())
    }

    #[test]
    fn charpoly_2x2() {
        let a = vec![vec![Integer::from(1), Integer::from(2)], vec![Integer::from(3), Integer::from(4)]];
        assert_eq!(charpoly(&a), ip(&[-2, -5, 1]));
    }

    #[test]
    fn discriminant_quadratic() {
        // b² − 4ac
        assert_eq!(ip(&[-20468736, -1080, 1]).discriminant(), Integer::from(1080i64 * 1080 + 4 * 20468736));
        assert_eq!(ip(&[1, -2, 1]).discriminant(), Integer::new());
    }

    #[test]
    fn discriminant_cubic() {
        // x³ + px + q: −4p³ − 27q²
        let p = -7i64;
        let q = 6i64;
        assert_eq!(ip(&[q, p, 0, 1]).discriminant(), Integer::from(-4 * p * p * p - 27 * q * q));
    }

    #[test]
    fn isolate_and_refine() {
        // (x−1)(x−2)(x+3)(x² − 2)
        let g = ip(&[6, -7, 0, 1]); // (x−1)(x−2)(x+3)
        let q = ip(&[-2, 0, 1]);
        let prod = IntPoly::new(crate::eigenforms::qseries::kronecker_mul(&g.coeffs, &q.coeffs, 6));
        let roots = prod.real_roots(200);
        assert_eq!(roots.len(), 5);
        let s2 = Float::with_val(200, 2).sqrt();
        let want = [Float::with_val(200, -3), Float::with_val(200, -&s2), Float::with_val(200, 1), Float::with_val(200, &s2), Float::with_val(200, 2)];
        for (r, w) in roots.iter().zip(want.iter()) {
            let d = Float::with_val(200, r - w).abs();
            assert!(d < Float::with_val(200, 1e-55), "{r} vs {w}");
        }
    }

    #[test]
    fn squarefree_part_removes_repeats() {
        // (x−1)²(x+2)
        let f = ip(&[2, -3, 0, 1]);
        assert_eq!(f.squarefree_part(), ip(&[-2, 1, 1]));
        assert!(!f.is_squarefree());
        assert_eq!(f.isolate_real_roots().len(), 2);
    }

    #[test]
    fn bareiss_matches_expansion() {
        let m = vec![
            vec![Integer::from(2), Integer::from(-1), Integer::from(0)],
            vec![Integer::from(-1), Integer::from(2), Integer::from(-1)],
            vec![Integer::from(0), Integer::from(-1), Integer::from(2)],
        ];
        assert_eq!(bareiss_determinant(m), Integer::from(4));
        let m = vec![vec![Integer::from(0), Integer::from(1)], vec![Integer::from(1), Integer::from(0)]];
        assert_eq!(bareiss_determinant(m), Integer::from(-1));
    }
}
