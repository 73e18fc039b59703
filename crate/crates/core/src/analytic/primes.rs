//! Sums over primes of products of Hecke eigenvalues, Satake-angle
//! statistics, and primes where a product of eigenvalues vanishes.

use crate::arith::primes_up_to;
use crate::eigenforms::Eigenform;
use crate::error::{Error, Result};
use rug::Float;
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::Arc;

fn check_forms(forms: &[Arc<Eigenform>], x: u64, max: usize) -> Result<()> {
    if forms.is_empty() || forms.len() > max {
        return Err(Error::InvalidArgument(format!("expected 1 to {max} forms, got {}", forms.len())));
    }
    let bound = forms.iter().map(|f| f.bound).min().unwrap_or(0) as u64;
    if x > bound {
        return Err(Error::Range { requested: x, bound });
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct PrimeSumReport {
    pub forms: Vec<String>,
    pub x: u64,
    /// Σ_{p≤x} Π_i λ_{f_i}(p).
    pub sum: f64,
    pub prime_count: usize,
    /// sum / π(x).
    pub ratio_pi: f64,
    /// sum / 2π(x).
    pub ratio_2pi: f64,
}

/// Σ_{p≤x} Π_i λ_{f_i}(p) for one to four forms.
pub fn prime_power_sum(forms: &[Arc<Eigenform>], x: u64) -> Result<PrimeSumReport> {
    check_forms(forms, x, 4)?;
    let primes = primes_up_to(x);
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &p in &primes {
        let term: f64 = forms.iter().map(|f| f.lambda_f64(p)).product();
        // Compensated summation.
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    let n = primes.len();
    let pi = n.max(1) as f64;
    Ok(PrimeSumReport {
        forms: forms.iter().map(|f| f.label()).collect(),
        x,
        sum,
        prime_count: n,
        ratio_pi: sum / pi,
        ratio_2pi: sum / (2.0 * pi),
    })
}

/// Distribution function of (2/π) sin²θ dθ on [0, π].
pub fn sato_tate_cdf(theta: f64) -> f64 {
    let t = theta.clamp(0.0, PI);
    (t - t.sin() * t.cos()) / PI
}

#[derive(Debug, Clone, Serialize)]
pub struct SatoTateReport {
    pub form: String,
    pub x: u64,
    pub primes: usize,
    /// Fraction of angles in each of the equal bins of [0, π].
    pub histogram: Vec<f64>,
    /// Reference mass of each bin.
    pub reference: Vec<f64>,
    /// Kolmogorov–Smirnov distance to the reference distribution.
    pub ks: f64,
    /// Fraction of p with |λ(p)| < 10⁻⁶.
    pub near_zero_fraction: f64,
}

/// Satake angles θ_p = arccos(λ(p)/2) for p ≤ x against (2/π) sin²θ.
pub fn sato_tate(f: &Arc<Eigenform>, x: u64, bins: usize) -> Result<SatoTateReport> {
    check_forms(std::slice::from_ref(f), x, 1)?;
    let bins = bins.max(1);
    let primes = primes_up_to(x);
    let mut angles: Vec<f64> = primes.iter().map(|&p| (f.lambda_f64(p) / 2.0).clamp(-1.0, 1.0).acos()).collect();
    angles.sort_by(f64::total_cmp);
    let n = angles.len();
    let mut histogram = vec![0.0; bins];
    let width = PI / bins as f64;
    for &t in &angles {
        let b = ((t / width) as usize).min(bins - 1);
        histogram[b] += 1.0 / n.max(1) as f64;
    }
    let reference = (0..bins)
        .map(|b| sato_tate_cdf((b + 1) as f64 * width) - sato_tate_cdf(b as f64 * width))
        .collect();
    let mut ks: f64 = 0.0;
    for (i, &t) in angles.iter().enumerate() {
        let c = sato_tate_cdf(t);
        ks = ks.max((i + 1) as f64 / n as f64 - c).max(c - i as f64 / n as f64);
    }
    let near = primes.iter().filter(|&&p| f.lambda_f64(p).abs() < 1e-6).count();
    Ok(SatoTateReport {
        form: f.label(),
        x,
        primes: n,
        histogram,
        reference,
        ks,
        near_zero_fraction: near as f64 / n.max(1) as f64,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ZeroLambdaReport {
    pub x: u64,
    pub tolerance: f64,
    pub primes: Vec<u64>,
    pub prime_count: usize,
    /// |S| / π(x).
    pub fraction: f64,
}

/// Primes p ≤ x with |Π_i λ_{f_i}(p)| ≤ tol; tol = 0 asks for an exact zero
/// of the stored values.
pub fn zero_lambda_primes(forms: &[Arc<Eigenform>], x: u64, tol: f64) -> Result<ZeroLambdaReport> {
    check_forms(forms, x, usize::MAX)?;
    if !(tol >= 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} must be non-negative")));
    }
    let prec = forms.iter().map(|f| f.precision).min().unwrap_or(64);
    let all = primes_up_to(x);
    let mut hits = Vec::new();
    for &p in &all {
        let mut prod = Float::with_val(prec, 1);
        for f in forms {
            prod *= f.lambda(p)?;
        }
        let hit = if tol == 0.0 { prod.is_zero() } else { prod.abs() <= tol };
        if hit {
            hits.push(p);
        }
    }
    Ok(ZeroLambdaReport {
        x,
        tolerance: tol,
        fraction: hits.len() as f64 / all.len().max(1) as f64,
        primes: hits,
        prime_count: all.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigenforms::eigenforms;
    use crate::quad::{adaptive_real, QuadOptions};

    fn delta(n: usize) -> Arc<Eigenform> {
        Arc::new(eigenforms(12, n, 128).unwrap().remove(0))
    }

    #[test]
    fn cdf_matches_quadrature() {
        for t in [0.3, 1.0, PI / 2.0, 2.5, PI] {
            let r = adaptive_real(0.0, t, &QuadOptions::default(), |u| Ok(2.0 / PI * u.sin().powi(2))).unwrap();
            assert!((r.value.re - sato_tate_cdf(t)).abs() < 1e-10);
        }
    }

    #[test]
    fn small_sums_match_direct() {
        let f = delta(1000);
        let r = prime_power_sum(&[f.clone(), f.clone()], 1000).unwrap();
        let direct: f64 = primes_up_to(1000).iter().map(|&p| f.lambda_f64(p).powi(2)).sum();
        assert!((r.sum - direct).abs() < 1e-9);
        assert_eq!(r.prime_count, 168);
        assert!(prime_power_sum(&[], 10).is_err());
        assert!(prime_power_sum(&vec![f.clone(); 5], 10).is_err());
        assert!(matches!(prime_power_sum(&[f], 2000), Err(Error::Range { .. })));
    }

    #[test]
    fn histogram_is_normalized() {
        let r = sato_tate(&delta(5000), 5000, 20).unwrap();
        let mass: f64 = r.histogram.iter().sum();
        assert!((mass - 1.0).abs() < 1e-12);
        let refm: f64 = r.reference.iter().sum();
        assert!((refm - 1.0).abs() < 1e-12);
        assert!(r.ks < 0.1 && r.near_zero_fraction <= 0.001);
    }

    #[test]
    fn zero_lambda_counts() {
        let f = delta(10_000);
        assert!(zero_lambda_primes(&[f.clone()], 10_000, 0.0).unwrap().primes.is_empty());
        let r = zero_lambda_primes(&[f.clone()], 10_000, 1e-3).unwrap();
        assert!(r.primes.len() <= 5);
        assert_eq!(r.prime_count, 1229);
        // Under the reference measure P(|λ(p)| ≤ t) ≈ 2t/π; 1229 primes give
        // an expected count of 0.8.
        assert!(r.fraction <= 5.0 * 2e-3 / PI);
        for &p in &r.primes {
            assert!(f.lambda_f64(p).abs() <= 1e-3);
        }
        assert!(zero_lambda_primes(&[f.clone(), f], 100, -1.0).is_err());
    }
}
