//! Multi-precision helpers on top of MPFR/MPC: constants, the complex
//! Gamma function and small conversions.

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Complex, Float, Integer, Rational};
use std::sync::Mutex;

pub fn float(prec: u32, v: f64) -> Float {
    Float::with_val(prec, v)
}

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

pub fn complex(prec: u32, re: f64, im: f64) -> Complex {
    Complex::with_val(prec, (re, im))
}

pub fn to_c64(z: &Complex) -> (f64, f64) {
    (z.real().to_f64(), z.imag().to_f64())
}

pub fn abs_f64(z: &Complex) -> f64 {
    let (re, im) = to_c64(z);
    re.hypot(im)
}

/// log₂|z| without overflow for huge or tiny values.
pub fn log2_abs(z: &Complex) -> f64 {
    let a = Float::with_val(64, z.abs_ref());
    if a.is_zero() {
        return f64::NEG_INFINITY;
    }
    Float::with_val(64, a.log2_ref()).to_f64()
}

pub fn log2_abs_real(x: &Float) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let a = Float::with_val(64, x.abs_ref());
    Float::with_val(64, a.log2_ref()).to_f64()
}

static BERNOULLI: Mutex<Vec<Rational>> = Mutex::new(Vec::new());

/// Bernoulli numbers B₀..B_n (with B₁ = −1/2).
pub fn bernoulli(n: usize) -> Vec<Rational> {
    let mut cache = BERNOULLI.lock().unwrap_or_else(|e| e.into_inner());
    if cache.is_empty() {
        cache.push(Rational::from(1));
    }
    while cache.len() <= n {
        let m = cache.len();
        // Σ_{j<m+1} C(m+1, j) B_j = 0
        let mut acc = Rational::new();
        let mut binom = Integer::from(1);
        for (j, b) in cache.iter().enumerate() {
            acc += Rational::from(b * &binom);
            binom *= (m + 1 - j) as u32;
            binom /= (j + 1) as u32;
        }
        let bm = -acc / Rational::from(m as u32 + 1);
        cache.push(bm);
    }
    cache[..=n].to_vec()
}

/// Complex Gamma function Γ(z) to about `prec` bits of relative accuracy,
/// via the Stirling series after an upward shift of the argument.
pub fn gamma(z: &Complex, prec: u32) -> Complex {
    let wp = prec + 40;
    let z = Complex::with_val(wp, z);
    let target = wp as f64 * std::f64::consts::LN_2 / (2.0 * std::f64::consts::PI) + 6.0;
    let re = z.real().to_f64();
    let im = z.imag().to_f64().abs();
    let mut shift = 0u32;
    if re.hypot(im) < target || re < 1.0 {
        let need_re = if im >= target { 1.0 } else { (target * target - im * im).sqrt().max(1.0) };
        shift = (need_re - re).ceil().max(0.0) as u32;
    }
    let mut w = z.clone();
    let mut denom = Complex::with_val(wp, (1, 0));
    for _ in 0..shift {
        denom *= &w;
        w += 1u32;
    }
    let lg = ln_gamma_stirling(&w, wp);
    let mut out = Complex::with_val(wp, lg.exp_ref());
    if shift > 0 {
        out /= &denom;
    }
    Complex::with_val(prec, &out)
}

fn ln_gamma_stirling(w: &Complex, wp: u32) -> Complex {
    let lnw = Complex::with_val(wp, w.ln_ref());
    let half = Float::with_val(wp, 0.5);
    let mut acc = Complex::with_val(wp, w - &half);
    acc *= &lnw;
    acc -= w;
    let two_pi = Float::with_val(wp, pi(wp) * 2u32);
    acc += Float::with_val(wp, two_pi.ln_ref()) / 2u32;

    let winv = Complex::with_val(wp, w.recip_ref());
    let winv2 = Complex::with_val(wp, winv.square_ref());
    let mut pow = winv.clone();
    let tol = -(wp as f64) - 8.0;
    let max_terms = 4 * wp as usize;
    let mut b = bernoulli(64);
    let mut prev = f64::INFINITY;
    let mut m = 1usize;
    loop {
        if 2 * m >= b.len() {
            b = bernoulli(4 * m + 8);
        }
        let coef = Rational::from(&b[2 * m] / Integer::from((2 * m) * (2 * m - 1)));
        let c = Float::with_val(wp, &coef);
        let term = Complex::with_val(wp, &pow * &c);
        let mag = log2_abs(&term);
        if mag > prev {
            break;
        }
        acc += &term;
        if mag < tol || m > max_terms {
            break;
        }
        prev = mag;
        pow *= &winv2;
        m += 1;
    }
    acc
}

/// Γ_R(s) = π^{−s/2} Γ(s/2).
pub fn gamma_r(s: &Complex, prec: u32) -> Complex {
    let wp = prec + 16;
    let half = Complex::with_val(wp, s / 2u32);
    let g = gamma(&half, wp);
    let lnpi = Float::with_val(wp, pi(wp).ln_ref());
    let e = -Complex::with_val(wp, &half * &lnpi);
    Complex::with_val(prec, g * e.exp())
}

/// Γ_C(s) = 2(2π)^{−s} Γ(s).
pub fn gamma_c(s: &Complex, prec: u32) -> Complex {
    let wp = prec + 16;
    let g = gamma(s, wp);
    let ln2pi = Float::with_val(wp, (pi(wp) * 2u32).ln());
    let e = -Complex::with_val(wp, s * &ln2pi);
    Complex::with_val(prec, g * e.exp() * 2u32)
}

/// n^{(k−1)/2} as a Float.
pub fn half_power(n: u64, k: u32, prec: u32) -> Float {
    let base = Float::with_val(prec + 8, n);
    let e = Float::with_val(prec + 8, k - 1) / 2u32;
    Float::with_val(prec, base.pow(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_small() {
        let b = bernoulli(12);
        assert_eq!(b[1], Rational::from((-1, 2)));
        assert_eq!(b[2], Rational::from((1, 6)));
        assert_eq!(b[4], Rational::from((-1, 30)));
        assert_eq!(b[12], Rational::from((-691, 2730)));
        assert_eq!(b[7], Rational::new());
    }

    #[test]
    fn gamma_integer_and_half() {
        let g = gamma(&complex(128, 5.0, 0.0), 128);
        assert!((g.real().to_f64() - 24.0).abs() < 1e-30);
        let g = gamma(&complex(200, 0.5, 0.0), 200);
        let sqrt_pi = Float::with_val(200, pi(200).sqrt_ref());
        let diff = Float::with_val(200, g.real() - &sqrt_pi);
        assert!(diff.abs().to_f64() < 1e-55);
    }

    #[test]
    fn gamma_reflection_on_critical_line() {
        // |Γ(1/2 + it)|² = π / cosh(πt)
        for &t in &[1.0, 14.0, 40.0] {
            let g = gamma(&complex(160, 0.5, t), 160);
            let abs2 = Float::with_val(160, g.norm_ref()).to_f64();
            let want = std::f64::consts::PI / (std::f64::consts::PI * t).cosh();
            assert!((abs2 / want - 1.0).abs() < 1e-13, "t={t}");
        }
    }

    #[test]
    fn gamma_recurrence_complex() {
        let z = complex(256, 0.3, 7.25);
        let g0 = gamma(&z, 256);
        let z1 = Complex::with_val(256, &z + 1u32);
        let g1 = gamma(&z1, 256);
        let lhs = Complex::with_val(256, &g0 * &z);
        let diff = Complex::with_val(256, &lhs - &g1);
        assert!(log2_abs(&diff) - log2_abs(&g1) < -240.0);
    }

    #[test]
    fn duplication_gamma_r() {
        // Γ_R(s)Γ_R(s+1) = Γ_C(s)
        let s = complex(192, 3.5, -2.0);
        let s1 = Complex::with_val(192, &s + 1u32);
        let lhs = Complex::with_val(192, gamma_r(&s, 192) * gamma_r(&s1, 192));
        let rhs = gamma_c(&s, 192);
        let diff = Complex::with_val(192, &lhs - &rhs);
        assert!(log2_abs(&diff) - log2_abs(&rhs) < -170.0);
    }
}
