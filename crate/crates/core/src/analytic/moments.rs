//! The mollified integrals
//!   Ⅰ = ∫₀^{2T} |1 − L(1+κ+iv, f⊗g) M_x(1+κ+iv)|² dv,
//!   Ⅱ = ∫₀^{2T} |L(1/2+ε+iv, f⊗g) M_x(1/2+ε+iv)| dv,
//! and the weighted combination (log k)² y^{2−2α} Ⅰ + y^{1/2−α+ε} Ⅱ.

use crate::arith::{primes_up_to, SpfTable};
use crate::eigenforms::Eigenform;
use crate::error::{Error, Result};
use crate::lseries::TensorCoeffSource;
use crate::mollifier::{coprime_to_primorial, g_tail, SieveConfig, DEFAULT_Z};
use crate::quad::{adaptive, QuadOptions};
use crate::zerolab::{build_instance, InstanceConfig, LFunctionInstance};
use num_complex::Complex64;
use rug::Complex;
use serde::Serialize;
use std::sync::Arc;

/// Smoothing length of the Dirichlet series on Re s = 1 + κ is cutoff / SMOOTH_WIDTH.
const SMOOTH_WIDTH: f64 = 40.0;

#[derive(Debug, Clone, Serialize)]
pub struct MomentConfig {
    pub k: u32,
    pub alpha: f64,
    /// κ = 1/log k.
    pub kappa: f64,
    /// κ₁ = 1 − α + κ.
    pub kappa1: f64,
    /// κ₂ = 1/2 − α + ε.
    pub kappa2: f64,
    /// X = e^{4(log k)²}.
    pub big_x: f64,
    /// Mollifier length.
    pub x: f64,
    pub y: f64,
    pub eps1: f64,
    pub eps_prime: f64,
    /// Offset of the second line, Re s = 1/2 + ε.
    pub epsilon: f64,
    /// Sifting range of the mollifier.
    pub z: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl MomentConfig {
    /// x = k^{10}, y = k^{17/(3−2α)}.
    pub fn new(k: u32, alpha: f64) -> Result<Self> {
        if k < 12 {
            return Err(Error::InvalidArgument(format!("weight {k} has no cusp forms")));
        }
        if !(alpha > 0.5 && alpha <= 1.0) {
            return Err(Error::Domain(format!("alpha = {alpha} must lie in (1/2, 1]")));
        }
        let lk = (k as f64).ln();
        let kappa = 1.0 / lk;
        let epsilon = crate::mollifier::DEFAULT_EPSILON;
        let cfg = MomentConfig {
            k,
            alpha,
            kappa,
            kappa1: 1.0 - alpha + kappa,
            kappa2: 0.5 - alpha + epsilon,
            big_x: (4.0 * lk * lk).exp(),
            x: (k as f64).powi(10),
            y: (k as f64).powf(17.0 / (3.0 - 2.0 * alpha)),
            eps1: 1.0 / 22.0,
            eps_prime: 0.25,
            epsilon,
            z: DEFAULT_Z,
            rel_tol: 1e-6,
            max_panels: 100_000,
        };
        cfg.check()?;
        Ok(cfg)
    }

    pub fn with_x(mut self, x: f64) -> Result<Self> {
        self.x = x;
        self.check()?;
        Ok(self)
    }

    pub fn with_y(mut self, y: f64) -> Result<Self> {
        self.y = y;
        self.check()?;
        Ok(self)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        self.epsilon = epsilon;
        self.kappa2 = 0.5 - self.alpha + epsilon;
        self.check()?;
        Ok(self)
    }

    /// Fails unless κ > 0 and κ₂ < 0.
    pub fn check(&self) -> Result<()> {
        if !(self.kappa > 0.0) {
            return Err(Error::Domain("kappa must be positive".into()));
        }
        if !(self.kappa2 < 0.0) {
            return Err(Error::Domain(format!("kappa2 = {} must be negative (alpha > 1/2 + epsilon)", self.kappa2)));
        }
        if !(self.x >= 1.0) || !(self.y >= 1.0) || !(self.epsilon > 0.0) {
            return Err(Error::InvalidArgument("x, y must be at least 1 and epsilon positive".into()));
        }
        Ok(())
    }

    fn sieve(&self) -> Result<SieveConfig> {
        SieveConfig::new(self.z)?.with_epsilon(self.epsilon)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentReport {
    pub f: String,
    pub g: String,
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub alpha: f64,
    pub kappa: f64,
    pub epsilon: f64,
    pub i1: f64,
    pub i1_error: f64,
    pub i1_converged: bool,
    pub i2: f64,
    pub i2_error: f64,
    pub i2_converged: bool,
    /// (log k)² y^{2−2α} Ⅰ + y^{1/2−α+ε} Ⅱ.
    pub combination: f64,
    pub dirichlet_terms: u64,
    pub smoothing_length: f64,
    /// Bound on the truncation of G on each line, relative.
    pub g_tail_i1: f64,
    pub g_tail_i2: f64,
    pub evaluations: usize,
}

/// Double-precision evaluator of L(s) (smoothed) and M_x(s) on a vertical line.
struct LineData {
    /// (log n, a_n e^{−n/L}) for the smoothed Dirichlet series.
    series: Vec<(f64, f64)>,
    /// (log ℓ, μ(ℓ)λ(ℓ)) over surviving ℓ ≤ x.
    mollifier: Vec<(f64, f64)>,
    /// (log p, Rankin local polynomial, λ(p), sifted) per prime up to the G cutoff.
    primes: Vec<(f64, [f64; 5], f64, bool)>,
}

impl LineData {
    fn new(f: &Arc<Eigenform>, g: &Arc<Eigenform>, x: f64, sieve: &SieveConfig) -> Result<Self> {
        let src = TensorCoeffSource::rankin(f.clone(), g.clone());
        let bound = f.bound.min(g.bound) as u64;
        let xl = x.floor() as u64;
        if xl > bound {
            return Err(Error::Range { requested: xl, bound });
        }
        let table = super::table_f64(&src, bound)?;
        let l = bound as f64 / SMOOTH_WIDTH;
        let series = (1..=bound as usize)
            .filter(|&n| table[n] != 0.0)
            .map(|n| ((n as f64).ln(), table[n] * (-(n as f64) / l).exp()))
            .collect();
        let spf = SpfTable::new(xl.max(1));
        let mollifier = (1..=xl)
            .filter(|&n| coprime_to_primorial(n, sieve) && spf.mobius(n) != 0)
            .map(|n| ((n as f64).ln(), spf.mobius(n) as f64 * table[n as usize]))
            .collect();
        let primes = primes_up_to(bound)
            .into_iter()
            .map(|p| {
                let poly = src.local_poly(p)?;
                let mut c = [0.0; 5];
                for (ci, v) in c.iter_mut().zip(poly.iter()) {
                    *ci = v.to_f64();
                }
                Ok(((p as f64).ln(), c, table[p as usize], (p as f64) > sieve.z()))
            })
            .collect::<Result<_>>()?;
        Ok(LineData { series, mollifier, primes })
    }

    fn dirichlet(terms: &[(f64, f64)], s: Complex64) -> Complex64 {
        terms.iter().map(|&(ln, c)| (-s * ln).exp() * c).sum()
    }

    fn smoothed_l(&self, s: Complex64) -> Complex64 {
        Self::dirichlet(&self.series, s)
    }

    fn g(&self, s: Complex64) -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        for (lnp, c, lam, sifted) in &self.primes {
            let x = (-s * *lnp).exp();
            let mut local = Complex64::new(0.0, 0.0);
            for ci in c.iter().rev() {
                local = local * x + ci;
            }
            if *sifted {
                local /= Complex64::new(1.0, 0.0) - x * *lam;
            }
            acc *= local;
        }
        acc
    }

    fn mollifier(&self, s: Complex64) -> Complex64 {
        self.g(s) * Self::dirichlet(&self.mollifier, s)
    }
}

fn quad_opts(cfg: &MomentConfig) -> QuadOptions {
    QuadOptions { rel_tol: cfg.rel_tol, abs_tol: 1e-14, max_panels: cfg.max_panels, initial_panels: 4 }
}

/// Ⅰ and Ⅱ for the pair (f, g) over [0, 2T]; Ⅱ uses `instance` (built and
/// validated from the pair when None).
pub fn moment_integrals(
    f: &Arc<Eigenform>,
    g: &Arc<Eigenform>,
    cfg: &MomentConfig,
    t: f64,
    instance: Option<&LFunctionInstance>,
) -> Result<MomentReport> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("T = {t} must be non-negative")));
    }
    let sieve = cfg.sieve()?;
    let mut report = MomentReport {
        f: f.label(),
        g: g.label(),
        t,
        x: cfg.x,
        y: cfg.y,
        alpha: cfg.alpha,
        kappa: cfg.kappa,
        epsilon: cfg.epsilon,
        i1: 0.0,
        i1_error: 0.0,
        i1_converged: true,
        i2: 0.0,
        i2_error: 0.0,
        i2_converged: true,
        combination: 0.0,
        dirichlet_terms: 0,
        smoothing_length: 0.0,
        g_tail_i1: 0.0,
        g_tail_i2: 0.0,
        evaluations: 0,
    };
    if t == 0.0 {
        return Ok(report);
    }
    let data = LineData::new(f, g, cfg.x, &sieve)?;
    let bound = f.bound.min(g.bound) as u64;
    report.dirichlet_terms = bound;
    report.smoothing_length = bound as f64 / SMOOTH_WIDTH;
    let s1 = 1.0 + cfg.kappa;
    let s2 = 0.5 + cfg.epsilon;
    report.g_tail_i1 = g_tail(s1, bound);
    report.g_tail_i2 = g_tail(s2, bound);
    let opts = quad_opts(cfg);
    let mut evals = 0usize;
    let r1 = adaptive(0.0, 2.0 * t, &opts, |v| {
        evals += 1;
        let s = Complex64::new(s1, v);
        let d = Complex64::new(1.0, 0.0) - data.smoothed_l(s) * data.mollifier(s);
        Ok(Complex64::new(d.norm_sqr(), 0.0))
    })?;
    report.i1 = r1.value.re;
    report.i1_error = r1.error;
    report.i1_converged = r1.converged;

    let built;
    let inst = match instance {
        Some(i) => i,
        None => {
            let src = Arc::new(TensorCoeffSource::rankin(f.clone(), g.clone()));
            let icfg = InstanceConfig { t_max: (2.0 * t).max(1.0), ..Default::default() };
            let mut i = build_instance(src, &icfg)?;
            i.validate_default()?;
            built = i;
            &built
        }
    };
    let prec = inst.precision();
    let r2 = adaptive(0.0, 2.0 * t, &opts, |v| {
        evals += 1;
        let s = Complex64::new(s2, v);
        let l = inst.l_value(&Complex::with_val(prec, (s2, v)))?;
        let l = Complex64::new(l.real().to_f64(), l.imag().to_f64());
        Ok(Complex64::new((l * data.mollifier(s)).norm(), 0.0))
    })?;
    report.i2 = r2.value.re;
    report.i2_error = r2.error;
    report.i2_converged = r2.converged;
    report.evaluations = evals;
    let lk = (cfg.k as f64).ln();
    report.combination =
        lk * lk * cfg.y.powf(2.0 - 2.0 * cfg.alpha) * report.i1 + cfg.y.powf(0.5 - cfg.alpha + cfg.epsilon) * report.i2;
    Ok(report)
}

/// Ⅰ alone, for sweeps over x where the second line is not needed.
pub fn first_moment(f: &Arc<Eigenform>, g: &Arc<Eigenform>, cfg: &MomentConfig, t: f64) -> Result<(f64, f64, bool)> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("T = {t} must be non-negative")));
    }
    if t == 0.0 {
        return Ok((0.0, 0.0, true));
    }
    let data = LineData::new(f, g, cfg.x, &cfg.sieve()?)?;
    let s1 = 1.0 + cfg.kappa;
    let r = adaptive(0.0, 2.0 * t, &quad_opts(cfg), |v| {
        let s = Complex64::new(s1, v);
        let d = Complex64::new(1.0, 0.0) - data.smoothed_l(s) * data.mollifier(s);
        Ok(Complex64::new(d.norm_sqr(), 0.0))
    })?;
    Ok((r.value.re, r.error, r.converged))
}
