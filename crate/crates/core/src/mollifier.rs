//! The sieved inverse of L(s, f⊗g): the correction Euler product G_{f,g}(s)
//! and the mollifier M_x(s, f⊗g) = G(s) Σ_{ℓ≤x, (ℓ,P(z))=1} μ(ℓ)λ_{f⊗g}(ℓ)ℓ^{−s}.

use crate::arith::{primes_up_to, SpfTable};
use crate::eigenforms::Eigenform;
use crate::error::{Error, Result};
use crate::lseries::{rankin_poly, TensorCoeffSource};
use rug::{Complex, Float, Integer};
use serde::Serialize;
use std::sync::Arc;

pub const DEFAULT_Z: f64 = 20.0;
pub const DEFAULT_EPSILON: f64 = 0.05;

/// The sifting range z and the primes dividing P(z).
#[derive(Debug, Clone, PartialEq)]
pub struct SieveConfig {
    z: f64,
    primes: Vec<u64>,
    epsilon: f64,
}

impl SieveConfig {
    pub fn new(z: f64) -> Result<Self> {
        if !(z > 16.0) || !z.is_finite() {
            return Err(Error::InvalidArgument(format!("sieve range z = {z} must exceed 16")));
        }
        Ok(SieveConfig { z, primes: primes_up_to(z.floor() as u64), epsilon: DEFAULT_EPSILON })
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidArgument("epsilon must be positive".into()));
        }
        self.epsilon = epsilon;
        Ok(self)
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn primes_below_z(&self) -> &[u64] {
        &self.primes
    }

    /// P(z) = Π_{p≤z} p.
    pub fn primorial(&self) -> Integer {
        self.primes.iter().fold(Integer::from(1), |acc, &p| acc * p)
    }
}

impl Default for SieveConfig {
    fn default() -> Self {
        SieveConfig::new(DEFAULT_Z).expect("default z is admissible")
    }
}

pub fn coprime_to_primorial(l: u64, cfg: &SieveConfig) -> bool {
    cfg.primes.iter().all(|&p| l % p != 0)
}

/// Truncated Euler product for G with a rigorous bound on the omitted primes.
#[derive(Debug, Clone)]
pub struct GFactor {
    pub value: Complex,
    pub cutoff: u64,
    pub tail_bound: f64,
    /// Whether the tail bound is below 2^{−P/2}.
    pub converged: bool,
}

fn check_domain(s: &Complex, cfg: &SieveConfig) -> Result<f64> {
    let sigma = s.real().to_f64();
    if sigma < 0.5 + cfg.epsilon {
        return Err(Error::Domain(format!("Re s = {sigma} is below 1/2 + {}", cfg.epsilon)));
    }
    Ok(sigma)
}

/// p^{−s} at working precision.
fn p_pow_neg_s(p: u64, s: &Complex, wp: u32) -> Complex {
    let lnp = Float::with_val(wp, p).ln();
    (-Complex::with_val(wp, s * &lnp)).exp()
}

fn eval_poly(coeffs: &[Float], x: &Complex, wp: u32) -> Complex {
    let mut acc = Complex::new(wp);
    for c in coeffs.iter().rev() {
        acc *= x;
        acc += c;
    }
    acc
}

/// Bound on Σ_{n>cutoff} |E_n(X)/(1 − λX) − 1| for σ > 1/2, with |λ| ≤ 4, |c₂| ≤ 6.
pub(crate) fn g_tail(sigma: f64, cutoff: u64) -> f64 {
    let x = (cutoff as f64).powf(-sigma);
    if 4.0 * x >= 1.0 {
        return f64::INFINITY;
    }
    let k = (6.0 + 4.0 * x + x * x) / (1.0 - 4.0 * x);
    let u_max = k * x * x;
    if u_max >= 1.0 {
        return f64::INFINITY;
    }
    let sum = k * (cutoff as f64).powf(1.0 - 2.0 * sigma) / (2.0 * sigma - 1.0);
    let log_bound = sum / (1.0 - u_max);
    log_bound.exp_m1()
}

/// Smallest prime cutoff whose tail bound is below target, if one exists below limit.
fn required_cutoff(sigma: f64, target: f64, limit: u64) -> Option<u64> {
    let mut c = 16u64;
    while c <= limit {
        if g_tail(sigma, c) < target {
            return Some(c);
        }
        c = c.saturating_mul(2);
    }
    (g_tail(sigma, limit) < target).then_some(limit)
}

/// G_{f,g}(s) = Π_{p≤z} L_p(s)^{−1} · Π_{p>z} L_p(s)^{−1}(1 − λ_{f⊗g}(p)p^{−s})^{−1}.
pub fn g_factor(f: &Eigenform, g: &Eigenform, s: &Complex, cfg: &SieveConfig, prec: u32) -> Result<GFactor> {
    let sigma = check_domain(s, cfg)?;
    let limit = f.bound.min(g.bound) as u64;
    let target = 2f64.powf(-(prec as f64) / 2.0);
    let cutoff = required_cutoff(sigma, target, limit).unwrap_or(limit);
    g_factor_with_cutoff(f, g, s, cfg, prec, cutoff)
}

pub fn g_factor_with_cutoff(
    f: &Eigenform,
    g: &Eigenform,
    s: &Complex,
    cfg: &SieveConfig,
    prec: u32,
    cutoff: u64,
) -> Result<GFactor> {
    let sigma = check_domain(s, cfg)?;
    let limit = f.bound.min(g.bound) as u64;
    if cutoff > limit {
        return Err(Error::Range { requested: cutoff, bound: limit });
    }
    let wp = prec + 32;
    let mut acc = Complex::with_val(wp, 1);
    for p in primes_up_to(cutoff) {
        let a = Float::with_val(wp, f.lambda(p)?);
        let b = Float::with_val(wp, g.lambda(p)?);
        let poly = rankin_poly(&a, &b);
        let x = p_pow_neg_s(p, s, wp);
        let mut local = eval_poly(&poly, &x, wp);
        if (p as f64) > cfg.z {
            let lam = Float::with_val(wp, &a * &b);
            let denom = Complex::with_val(wp, 1) - Complex::with_val(wp, &x * &lam);
            local /= denom;
        }
        acc *= local;
    }
    let tail = g_tail(sigma, cutoff.max(cfg.z as u64));
    let tail_bound = tail * crate::mp::abs_f64(&acc);
    Ok(GFactor {
        value: Complex::with_val(prec, &acc),
        cutoff,
        tail_bound,
        converged: tail_bound < 2f64.powf(-(prec as f64) / 2.0),
    })
}

/// Dirichlet polynomial Σ c(n)n^{−s} over 1 ≤ n < c.len().
fn dirichlet_poly(c: &[Float], s: &Complex, wp: u32) -> Complex {
    let mut acc = Complex::new(wp);
    for (n, v) in c.iter().enumerate().skip(1) {
        if v.is_zero() {
            continue;
        }
        let lnn = Float::with_val(wp, n).ln();
        let t = (-Complex::with_val(wp, s * &lnn)).exp();
        acc += t * v;
    }
    acc
}

/// μ(ℓ)λ_{f⊗g}(ℓ) for ℓ coprime to P(z), else 0; indices 0..=n.
fn sieved_mobius(src: &TensorCoeffSource, cfg: &SieveConfig, n: u64) -> Result<Vec<Float>> {
    let prec = src.precision();
    let spf = SpfTable::new(n.max(1));
    let mut out = vec![Float::new(prec); n as usize + 1];
    for l in 1..=n {
        if !coprime_to_primorial(l, cfg) {
            continue;
        }
        let mu = spf.mobius(l);
        if mu == 0 {
            continue;
        }
        let c = src.coeff(l)?;
        out[l as usize] = if mu > 0 { c } else { -c };
    }
    Ok(out)
}

/// Multiplicative table from per-prime local series (indexed by exponent).
fn multiplicative_table<F>(n: u64, prec: u32, mut local: F) -> Result<Vec<Float>>
where
    F: FnMut(u64, usize) -> Result<Vec<Float>>,
{
    let spf = SpfTable::new(n.max(1));
    let mut out = vec![Float::new(prec); n as usize + 1];
    if n == 0 {
        return Ok(out);
    }
    out[1] = Float::with_val(prec, 1);
    let mut cache: std::collections::HashMap<u64, Vec<Float>> = std::collections::HashMap::new();
    for m in 2..=n {
        let (p, e, rest) = spf.split(m);
        if !cache.contains_key(&p) {
            let mut emax = 1usize;
            let mut pp = p;
            while pp <= n / p {
                pp *= p;
                emax += 1;
            }
            cache.insert(p, local(p, emax)?);
        }
        out[m as usize] = Float::with_val(prec, &out[rest as usize] * &cache[&p][e as usize]);
    }
    Ok(out)
}

/// Outcome of checking L(s)^{−1} = G(s)·Σ_{(n,P(z))=1} μ(n)λ(n)n^{−s}.
#[derive(Debug, Clone, Serialize)]
pub struct InverseCheck {
    /// |Σ_{n≤ℓ_max} [(g ∗ μλ_z)(n) − μ_L(n)] n^{−s}|: both sides as truncated Dirichlet series.
    pub residual: f64,
    /// max_n |(g ∗ μλ_z)(n) − μ_L(n)|.
    pub coefficient_residual: f64,
    /// |G_Euler(s)·Σ_{n≤ℓ_max} μλ_z(n)n^{−s} − (Σ_{n≤ℓ_max} λ(n)n^{−s})^{−1}|.
    pub analytic_gap: f64,
    /// Tail bound of the Euler product for G.
    pub g_tail_bound: f64,
    pub terms: u64,
}

/// Verifies the inverse factorization of L(s, f⊗g) to the right of 1.
///
/// The identity is checked in the ring of Dirichlet series truncated at ℓ_max:
/// the coefficients of G come from its Euler product, those of μλ_z from the
/// sieve, those of 1/L from the local polynomials, and all three are
/// evaluated at s. The plain analytic gap between the truncated sums is also
/// reported; it is dominated by the Dirichlet tails beyond ℓ_max.
pub fn verify_inverse(
    f: &Arc<Eigenform>,
    g: &Arc<Eigenform>,
    s: &Complex,
    cfg: &SieveConfig,
    l_max: u64,
) -> Result<InverseCheck> {
    let sigma = s.real().to_f64();
    if sigma <= 1.0 {
        return Err(Error::Domain(format!("verify_inverse requires Re s > 1, got {sigma}")));
    }
    let bound = f.bound.min(g.bound) as u64;
    if l_max > bound {
        return Err(Error::Range { requested: l_max, bound });
    }
    let prec = f.precision.min(g.precision);
    let wp = prec + 32;
    let src = TensorCoeffSource::rankin(f.clone(), g.clone());

    let local_poly = |p: u64| -> Result<Vec<Float>> {
        let a = Float::with_val(wp, f.lambda(p)?);
        let b = Float::with_val(wp, g.lambda(p)?);
        Ok(rankin_poly(&a, &b))
    };
    let z = cfg.z;
    let g_coeffs = multiplicative_table(l_max, wp, |p, emax| {
        let poly = local_poly(p)?;
        let mut c: Vec<Float> = (0..=emax).map(|i| poly.get(i).cloned().unwrap_or_else(|| Float::new(wp))).collect();
        if (p as f64) > z {
            // multiply by (1 − λX)^{−1} = Σ λ^j X^j
            let lam = Float::with_val(wp, &poly[1] * -1i32);
            for i in 1..=emax {
                let prev = c[i - 1].clone();
                c[i] += Float::with_val(wp, &prev * &lam);
            }
        }
        Ok(c)
    })?;
    let inv_l = multiplicative_table(l_max, wp, |p, emax| {
        let poly = local_poly(p)?;
        Ok((0..=emax).map(|i| poly.get(i).cloned().unwrap_or_else(|| Float::new(wp))).collect())
    })?;
    let h = sieved_mobius(&src, cfg, l_max)?;
    let h: Vec<Float> = h.into_iter().map(|v| Float::with_val(wp, v)).collect();
    let conv = crate::lseries::dirichlet_convolve(&g_coeffs, &h);

    let mut coefficient_residual = 0f64;
    let mut diff = Vec::with_capacity(conv.len());
    for (a, b) in conv.iter().zip(&inv_l) {
        let d = Float::with_val(wp, a - b);
        coefficient_residual = coefficient_residual.max(d.to_f64().abs());
        diff.push(d);
    }
    let residual = crate::mp::abs_f64(&dirichlet_poly(&diff, s, wp));

    let gf = g_factor(f, g, s, cfg, prec)?;
    let sieved = dirichlet_poly(&h, s, wp);
    let table = src.table(l_max)?;
    let lam: Vec<Float> = table[..=l_max as usize].iter().map(|v| Float::with_val(wp, v)).collect();
    let l_trunc = dirichlet_poly(&lam, s, wp);
    let lhs = Complex::with_val(wp, &gf.value * &sieved);
    let rhs = Complex::with_val(wp, 1) / l_trunc;
    let analytic_gap = crate::mp::abs_f64(&Complex::with_val(wp, lhs - rhs));

    Ok(InverseCheck { residual, coefficient_residual, analytic_gap, g_tail_bound: gf.tail_bound, terms: l_max })
}

/// M_x(s, f⊗g) together with the tail bound inherited from G.
#[derive(Debug, Clone)]
pub struct MollifierValue {
    pub s: Complex,
    pub x: f64,
    pub value: Complex,
    pub tail_bound: f64,
    pub terms: usize,
}

impl MollifierValue {
    /// |M_x(s)|/x^{1/2}.
    pub fn trivial_ratio(&self) -> f64 {
        crate::mp::abs_f64(&self.value) / self.x.sqrt()
    }
}

/// Integers ℓ ≤ x that are squarefree and coprime to P(z).
pub fn surviving_indices(x: f64, cfg: &SieveConfig) -> Vec<u64> {
    let n = x.floor().max(0.0) as u64;
    let spf = SpfTable::new(n.max(1));
    (1..=n).filter(|&l| coprime_to_primorial(l, cfg) && spf.mobius(l) != 0).collect()
}

pub fn mollifier_value(f: &Arc<Eigenform>, g: &Arc<Eigenform>, s: &Complex, x: f64, cfg: &SieveConfig) -> Result<MollifierValue> {
    check_domain(s, cfg)?;
    if !(x >= 1.0) {
        return Err(Error::InvalidArgument(format!("mollifier length x = {x} must be at least 1")));
    }
    let prec = f.precision.min(g.precision);
    let gf = g_factor(f, g, s, cfg, prec)?;
    mollifier_with_g(f, g, s, x, cfg, &gf)
}

/// M_x for several lengths sharing one evaluation of G.
pub fn mollifier_sweep(
    f: &Arc<Eigenform>,
    g: &Arc<Eigenform>,
    s: &Complex,
    xs: &[f64],
    cfg: &SieveConfig,
) -> Result<Vec<MollifierValue>> {
    check_domain(s, cfg)?;
    let prec = f.precision.min(g.precision);
    let gf = g_factor(f, g, s, cfg, prec)?;
    xs.iter().map(|&x| mollifier_with_g(f, g, s, x, cfg, &gf)).collect()
}

fn mollifier_with_g(
    f: &Arc<Eigenform>,
    g: &Arc<Eigenform>,
    s: &Complex,
    x: f64,
    cfg: &SieveConfig,
    gf: &GFactor,
) -> Result<MollifierValue> {
    let prec = f.precision.min(g.precision);
    let wp = prec + 32;
    let src = TensorCoeffSource::rankin(f.clone(), g.clone());
    let ls = surviving_indices(x, cfg);
    let spf = SpfTable::new((x as u64).max(1));
    let mut sum = Complex::new(wp);
    for &l in &ls {
        let c = Float::with_val(wp, src.coeff(l)?);
        let c = if spf.mobius(l) < 0 { -c } else { c };
        let lnl = Float::with_val(wp, l).ln();
        sum += (-Complex::with_val(wp, s * &lnl)).exp() * c;
    }
    let value = Complex::with_val(prec, &gf.value * &sum);
    let tail_bound = gf.tail_bound * crate::mp::abs_f64(&sum);
    Ok(MollifierValue { s: s.clone(), x, value, tail_bound, terms: ls.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigenforms::eigenforms;
    use std::sync::OnceLock;

    fn delta() -> Arc<Eigenform> {
        static F: OnceLock<Arc<Eigenform>> = OnceLock::new();
        F.get_or_init(|| Arc::new(eigenforms(12, 2000, 192).unwrap().remove(0))).clone()
    }

    fn c(re: f64, im: f64) -> Complex {
        Complex::with_val(192, (re, im))
    }

    #[test]
    fn coprimality_examples() {
        let cfg = SieveConfig::new(20.0).unwrap();
        assert!(coprime_to_primorial(1, &cfg));
        assert!(!coprime_to_primorial(38, &cfg));
        assert!(coprime_to_primorial(23 * 29, &cfg));
        assert_eq!(cfg.primorial(), 9699690);
        assert!(SieveConfig::new(16.0).is_err());
    }

    #[test]
    fn x_one_gives_g() {
        let f = delta();
        let cfg = SieveConfig::default();
        let s = c(2.0, 0.0);
        let g = g_factor(&f, &f, &s, &cfg, 192).unwrap();
        let m = mollifier_value(&f, &f, &s, 1.0, &cfg).unwrap();
        assert_eq!(m.value, g.value);
        // 23 is the first survivor above 1
        let m = mollifier_value(&f, &f, &s, 22.5, &cfg).unwrap();
        assert_eq!(m.terms, 1);
        assert_eq!(m.value, g.value);
    }

    #[test]
    fn g_at_two_is_dominated_by_small_primes() {
        let f = delta();
        let cfg = SieveConfig::default();
        let s = c(2.0, 0.0);
        let g = g_factor(&f, &f, &s, &cfg, 192).unwrap();
        let small = g_factor_with_cutoff(&f, &f, &s, &cfg, 192, 20).unwrap();
        let d = crate::mp::abs_f64(&Complex::with_val(192, &g.value - &small.value));
        // the first omitted factor is 1 + c₂·23^{−4} + …
        assert!(d < 7.0 * 23f64.powi(-3));
    }

    #[test]
    fn truncation_stability() {
        let f = delta();
        let cfg = SieveConfig::default();
        for s in [c(2.0, 0.0), c(0.6, 5.0), c(1.2, 3.0)] {
            let a = g_factor_with_cutoff(&f, &f, &s, &cfg, 192, 500).unwrap();
            let b = g_factor_with_cutoff(&f, &f, &s, &cfg, 192, 1000).unwrap();
            let d = crate::mp::abs_f64(&Complex::with_val(192, &a.value - &b.value));
            assert!(d <= a.tail_bound, "s={s} d={d} bound={}", a.tail_bound);
            assert!(crate::mp::abs_f64(&b.value).is_finite());
        }
        let slow = g_factor(&f, &f, &c(0.6, 5.0), &cfg, 192).unwrap();
        assert!(!slow.converged);
    }

    #[test]
    fn domain_errors() {
        let f = delta();
        let cfg = SieveConfig::default();
        assert!(matches!(g_factor(&f, &f, &c(0.52, 0.0), &cfg, 192), Err(Error::Domain(_))));
        assert!(matches!(verify_inverse(&f, &f, &c(1.0, 0.0), &cfg, 100), Err(Error::Domain(_))));
    }

    #[test]
    fn inverse_identity_delta() {
        let f = delta();
        let cfg = SieveConfig::default();
        let r = verify_inverse(&f, &f, &c(2.0, 0.0), &cfg, 2000).unwrap();
        assert!(r.residual < 1e-25, "{r:?}");
        assert!(r.coefficient_residual < 1e-40);
        assert!(r.analytic_gap < 1e-3);
    }

    #[test]
    fn sieve_kills_everything() {
        // z ≥ ℓ_max: only n = 1 survives and the check compares G with 1/L directly.
        let f = delta();
        let cfg = SieveConfig::new(200.0).unwrap();
        let r = verify_inverse(&f, &f, &c(3.0, 1.0), &cfg, 150).unwrap();
        assert!(r.residual < 1e-25);
        assert_eq!(surviving_indices(150.0, &cfg), vec![1]);
    }

    #[test]
    fn monotone_sieve() {
        let a = surviving_indices(3000.0, &SieveConfig::new(17.0).unwrap());
        let b = surviving_indices(3000.0, &SieveConfig::new(50.0).unwrap());
        assert!(b.iter().all(|l| a.contains(l)));
        assert!(b.len() < a.len());
    }

    #[test]
    fn trivial_bound_ratio() {
        let f = delta();
        let cfg = SieveConfig::default();
        let s = c(1.0 + 1.0 / 12f64.ln(), 0.0);
        let vals = mollifier_sweep(&f, &f, &s, &[1.0, 10.0, 100.0, 1000.0], &cfg).unwrap();
        for v in vals {
            assert!(v.trivial_ratio() <= 1.0, "x={} ratio={}", v.x, v.trivial_ratio());
        }
    }
}
