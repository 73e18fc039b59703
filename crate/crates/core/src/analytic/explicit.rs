//! The log-weighted prime sums Σ_{n<x²} Λ(n) n^{−1/2} log(x²/n), their
//! residue term, and the search for a prime separating two eigenforms.

use crate::arith::primes_up_to;
use crate::eigenforms::{Eigenform, HeckeOperator};
use crate::error::{Error, Result};
use crate::lseries::{TensorCoeffSource, VonMangoldtSource};
use crate::quad::{adaptive, QuadOptions};
use num_complex::Complex64;
use rug::{Assign, Float, Integer};
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::Arc;

/// (1/2πi)∫_{(c)} y^{s−1/2}/(s−1/2)² ds for c > 1/2: log y when y ≥ 1, else 0.
pub fn kernel(y: f64) -> f64 {
    if y >= 1.0 {
        y.ln()
    } else {
        0.0
    }
}

/// Direct quadrature of the kernel integral along Re s = c, |Im s| ≤ height.
/// Returns (value, quadrature error estimate).
pub fn kernel_contour(y: f64, c: f64, height: f64) -> Result<(f64, f64)> {
    if !(y > 0.0) || !(c > 0.5) || !(height > 0.0) {
        return Err(Error::InvalidArgument(format!("kernel contour needs y > 0, c > 1/2, height > 0 (got {y}, {c}, {height})")));
    }
    let ly = y.ln();
    // Real part is even in t; integrate over [0, height] and double.
    let panels = ((height * ly.abs() / PI).ceil() as usize + 8).min(50_000);
    let opts = QuadOptions { rel_tol: 1e-10, abs_tol: 1e-13, max_panels: 400_000, initial_panels: panels };
    let r = adaptive(0.0, height, &opts, |t| {
        let u = Complex64::new(c - 0.5, t);
        Ok((u * ly).exp() / (u * u))
    })?;
    Ok((r.value.re / PI, r.error / PI))
}

/// Residue term 4(x − 2 + 1/x).
pub fn rn_main(x: f64) -> f64 {
    4.0 * (x - 2.0 + 1.0 / x)
}

/// One point of an rn curve.
#[derive(Debug, Clone, Serialize)]
pub struct RnPoint {
    pub x: f64,
    pub sum: f64,
    pub main: f64,
}

impl RnPoint {
    pub fn ratio(&self) -> f64 {
        self.sum / self.main
    }
}

/// Largest n with n < x².
fn last_index(x: f64) -> u64 {
    let x2 = x * x;
    let n = x2.ceil() as u64;
    if n as f64 >= x2 {
        n.saturating_sub(1)
    } else {
        n
    }
}

/// Σ_{n<x²} Λ(n) n^{−1/2} log(x²/n).
pub fn rn_sum(source: &VonMangoldtSource, x: f64) -> Result<f64> {
    Ok(rn_curve(source, &[x])?[0].sum)
}

/// rn_sum at several x, sharing one Λ table.
pub fn rn_curve(source: &VonMangoldtSource, xs: &[f64]) -> Result<Vec<RnPoint>> {
    if xs.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
        return Err(Error::InvalidArgument("rn_sum needs finite x > 0".into()));
    }
    let n_max = xs.iter().map(|&x| last_index(x)).max().unwrap_or(0);
    let bound = source.base().bound();
    if n_max > bound {
        return Err(Error::Range { requested: n_max, bound });
    }
    let prec = source.base().precision() + 16;
    let table = if n_max >= 2 { source.table(n_max)? } else { Vec::new() };
    // Prefix sums of w_n = Λ(n)/√n and w_n log n.
    let mut s0 = vec![Float::new(prec); n_max as usize + 1];
    let mut s1 = vec![Float::new(prec); n_max as usize + 1];
    let mut acc0 = Float::new(prec);
    let mut acc1 = Float::new(prec);
    let mut w = Float::new(prec);
    for n in 2..=n_max as usize {
        if !table[n].is_zero() {
            w.assign(Float::with_val(prec, n).sqrt());
            let wn = Float::with_val(prec, &table[n] / &w);
            acc1 += Float::with_val(prec, n).ln() * &wn;
            acc0 += wn;
        }
        s0[n].assign(&acc0);
        s1[n].assign(&acc1);
    }
    Ok(xs
        .iter()
        .map(|&x| {
            let n = last_index(x) as usize;
            let sum = if n < 2 {
                0.0
            } else {
                let two_log_x = Float::with_val(prec, x).ln() * 2u32;
                Float::with_val(prec, &two_log_x * &s0[n] - &s1[n]).to_f64()
            };
            RnPoint { x, sum, main: rn_main(x) }
        })
        .collect())
}

/// Parameters of the distinguishing experiment.
#[derive(Debug, Clone, Serialize)]
pub struct DistinguishConfig {
    pub k: u32,
    pub eta: f64,
    /// Abscissa a = 1 + 1/log k of the contour.
    pub a: f64,
    /// Height T = 50 k^η.
    pub t: f64,
    /// Largest x of the rn curves; coefficients are needed up to x².
    pub x: f64,
    /// Eigenvalue inequality threshold; None means 2^{−P/2}.
    pub tolerance: Option<f64>,
    pub curve_points: usize,
}

impl DistinguishConfig {
    pub fn new(k: u32) -> Result<Self> {
        if k < 12 {
            return Err(Error::InvalidArgument(format!("weight {k} has no cusp forms")));
        }
        let cfg = DistinguishConfig {
            k,
            eta: Self::default_eta(k),
            a: 1.0 + 1.0 / (k as f64).ln(),
            t: 0.0,
            x: 100.0,
            tolerance: None,
            curve_points: 40,
        };
        cfg.with_eta(Self::default_eta(k))
    }

    /// (log log k)²/log k.
    pub fn default_eta(k: u32) -> f64 {
        let l = (k as f64).ln();
        l.ln().powi(2) / l
    }

    /// The open interval (3 log log k / log k, 1/4), possibly empty.
    pub fn eta_window(k: u32) -> (f64, f64) {
        let l = (k as f64).ln();
        (3.0 * l.ln() / l, 0.25)
    }

    pub fn with_eta(mut self, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta < 0.5) {
            return Err(Error::Domain(format!("eta = {eta} must lie in (0, 1/2)")));
        }
        self.eta = eta;
        self.t = 50.0 * (self.k as f64).powf(eta);
        Ok(self)
    }

    pub fn with_x(mut self, x: f64) -> Result<Self> {
        if !(x >= 1.0) || !x.is_finite() {
            return Err(Error::InvalidArgument(format!("x = {x} must be at least 1")));
        }
        self.x = x;
        Ok(self)
    }

    /// Checks that η lies in the restricted window for this k.
    pub fn require_eta_window(&self) -> Result<()> {
        let (lo, hi) = Self::eta_window(self.k);
        if self.eta > lo && self.eta < hi {
            Ok(())
        } else {
            Err(Error::Domain(format!("eta = {} outside ({lo:.4}, {hi}) at k = {}", self.eta, self.k)))
        }
    }
}

/// How p_star was established.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Certificate {
    /// The defining Hecke operator is T_p, and its characteristic
    /// polynomials have no common root (resultant or discriminant ≠ 0), so
    /// the eigenvalues at p differ exactly.
    Exact { prime: u64, invariant: String },
    /// Separation exceeds the tolerance at finite precision.
    Numerical { gap: f64, tolerance: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct DistinguishReport {
    pub f: String,
    pub g: String,
    pub p_star: Option<u64>,
    pub certificate: Option<Certificate>,
    pub gap: f64,
    pub tolerance: f64,
    pub searched_up_to: u64,
    /// Primes where the values agreed within tolerance and no exact test applied.
    pub ambiguous_primes: Vec<u64>,
    /// Smallest |λ_f(p) − λ_g(p)| seen among searched primes.
    pub min_gap: f64,
    pub precision: u32,
    pub eta: f64,
    pub a: f64,
    pub t: f64,
    /// x ↦ rn_sum(f⊗f, x).
    pub rn1: Vec<RnPoint>,
    /// x ↦ rn_sum(f⊗g, x).
    pub rn2: Vec<RnPoint>,
}

/// Exact comparison of the eigenvalues of T_p when both forms are defined by T_p.
fn exact_distinct_at(f: &Eigenform, g: &Eigenform, p: u64) -> Option<(bool, String)> {
    if f.weight != g.weight || f.operator != HeckeOperator::T(p) || g.operator != HeckeOperator::T(p) {
        return None;
    }
    if f.charpoly == g.charpoly {
        let d = f.charpoly.discriminant();
        if d == 0 {
            return None;
        }
        return Some((f.root_index != g.root_index, format!("discriminant {d}")));
    }
    let r: Integer = f.charpoly.resultant(&g.charpoly);
    if r != 0 {
        Some((true, format!("resultant {r}")))
    } else {
        None
    }
}

/// Smallest prime p with |λ_f(p) − λ_g(p)| above tolerance, with rn curves.
pub fn distinguish(f: &Arc<Eigenform>, g: &Arc<Eigenform>, cfg: &DistinguishConfig) -> Result<DistinguishReport> {
    if f.same_form(g) {
        return Err(Error::InvalidArgument(format!("{} and {} are the same eigenform", f.label(), g.label())));
    }
    let bound = f.bound.min(g.bound) as u64;
    let need = last_index(cfg.x);
    if need > bound {
        return Err(Error::Range { requested: need, bound });
    }
    let prec = f.precision.min(g.precision);
    let tolerance = cfg.tolerance.unwrap_or_else(|| 2f64.powf(-(prec as f64) / 2.0));
    let mut p_star = None;
    let mut certificate = None;
    let mut gap = 0.0;
    let mut ambiguous = Vec::new();
    let mut min_gap = f64::INFINITY;
    let mut searched = 0;
    for p in primes_up_to(bound) {
        searched = p;
        let d = Float::with_val(prec, f.lambda(p)? - g.lambda(p)?).abs().to_f64();
        min_gap = min_gap.min(d);
        let exact = exact_distinct_at(f, g, p);
        if d > tolerance {
            p_star = Some(p);
            gap = d;
            certificate = Some(match exact {
                Some((true, invariant)) => Certificate::Exact { prime: p, invariant },
                _ => Certificate::Numerical { gap: d, tolerance },
            });
            break;
        }
        match exact {
            Some((true, invariant)) => {
                p_star = Some(p);
                gap = d;
                certificate = Some(Certificate::Exact { prime: p, invariant });
                break;
            }
            _ => ambiguous.push(p),
        }
    }
    let n = cfg.curve_points.max(1);
    let xs: Vec<f64> = (1..=n).map(|i| 1.0 + (cfg.x - 1.0) * i as f64 / n as f64).collect();
    let diag = VonMangoldtSource::new(Arc::new(TensorCoeffSource::rankin(f.clone(), f.clone())));
    let off = VonMangoldtSource::new(Arc::new(TensorCoeffSource::rankin(f.clone(), g.clone())));
    Ok(DistinguishReport {
        f: f.label(),
        g: g.label(),
        p_star,
        certificate,
        gap,
        tolerance,
        searched_up_to: searched,
        ambiguous_primes: ambiguous,
        min_gap,
        precision: prec,
        eta: cfg.eta,
        a: cfg.a,
        t: cfg.t,
        rn1: rn_curve(&diag, &xs)?,
        rn2: rn_curve(&off, &xs)?,
    })
}
