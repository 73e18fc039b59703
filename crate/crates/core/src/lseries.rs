//! Dirichlet and von Mangoldt coefficients of the L-functions built from
//! Satake data: ζ, L(s,f), L(s,f⊗g), L(s,Sym²f) and L(s,Sym²f⊗Sym²g).
//!
//! Local factors are polynomials in X = p^{−s} whose coefficients are
//! polynomials in λ_f(p), λ_g(p); they are inverted as power series.

use crate::arith::{factor, prime_power, SpfTable};
use crate::eigenforms::Eigenform;
use crate::error::{Error, Result};
use rug::{Complex, Float};
use serde::Serialize;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

pub const DEFAULT_MEMORY_BUDGET: u64 = 2 << 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SourceKind {
    Zeta,
    Standard,
    Rankin,
    Sym2,
    Sym2Tensor,
}

impl SourceKind {
    pub fn degree(self) -> usize {
        match self {
            SourceKind::Zeta => 1,
            SourceKind::Standard => 2,
            SourceKind::Rankin => 4,
            SourceKind::Sym2 => 3,
            SourceKind::Sym2Tensor => 9,
        }
    }
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SourceKind::Zeta => "zeta",
            SourceKind::Standard => "standard",
            SourceKind::Rankin => "rankin",
            SourceKind::Sym2 => "sym2",
            SourceKind::Sym2Tensor => "sym2xsym2",
        };
        f.write_str(s)
    }
}

/// Lazily evaluated Dirichlet coefficients of one of the supported L-functions.
#[derive(Debug)]
pub struct TensorCoeffSource {
    kind: SourceKind,
    forms: Vec<Arc<Eigenform>>,
    prec: u32,
    budget: u64,
    local: RwLock<HashMap<u64, Arc<Vec<Float>>>>,
    table: RwLock<Option<Arc<Vec<Float>>>>,
}

impl TensorCoeffSource {
    fn build(kind: SourceKind, forms: Vec<Arc<Eigenform>>, prec: u32) -> Self {
        TensorCoeffSource {
            kind,
            forms,
            prec,
            budget: DEFAULT_MEMORY_BUDGET,
            local: RwLock::new(HashMap::new()),
            table: RwLock::new(None),
        }
    }

    pub fn zeta(prec: u32) -> Self {
        Self::build(SourceKind::Zeta, Vec::new(), prec)
    }

    pub fn standard(f: Arc<Eigenform>) -> Self {
        let p = f.precision;
        Self::build(SourceKind::Standard, vec![f], p)
    }

    pub fn rankin(f: Arc<Eigenform>, g: Arc<Eigenform>) -> Self {
        let p = f.precision.min(g.precision);
        Self::build(SourceKind::Rankin, vec![f, g], p)
    }

    pub fn sym2(f: Arc<Eigenform>) -> Self {
        let p = f.precision;
        Self::build(SourceKind::Sym2, vec![f], p)
    }

    pub fn sym2_tensor(f: Arc<Eigenform>, g: Arc<Eigenform>) -> Self {
        let p = f.precision.min(g.precision);
        Self::build(SourceKind::Sym2Tensor, vec![f, g], p)
    }

    pub fn with_memory_budget(mut self, bytes: u64) -> Self {
        self.budget = bytes;
        self
    }

    pub fn kind(&self) -> SourceKind {
        self.kind
    }

    pub fn degree(&self) -> usize {
        self.kind.degree()
    }

    pub fn forms(&self) -> &[Arc<Eigenform>] {
        &self.forms
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    /// Largest n whose prime factors all carry Satake data.
    pub fn bound(&self) -> u64 {
        self.forms.iter().map(|f| f.bound as u64).min().unwrap_or(u64::MAX)
    }

    pub fn weight(&self) -> Option<u32> {
        self.forms.first().map(|f| f.weight)
    }

    /// Rankin–Selberg square f⊗f (pole at s = 1).
    pub fn is_diagonal(&self) -> bool {
        self.kind == SourceKind::Rankin && self.forms[0].same_form(&self.forms[1])
    }

    pub fn label(&self) -> String {
        match self.forms.len() {
            0 => self.kind.to_string(),
            1 => format!("{}({})", self.kind, self.forms[0].label()),
            _ => format!("{}({},{})", self.kind, self.forms[0].label(), self.forms[1].label()),
        }
    }

    fn lambda_at(&self, i: usize, p: u64) -> Result<Float> {
        let f = &self.forms[i];
        Ok(Float::with_val(self.prec, f.lambda(p)?))
    }

    /// Coefficients of Π_j(1 − γ_j X), lowest first, length degree + 1.
    pub fn local_poly(&self, p: u64) -> Result<Vec<Float>> {
        let prec = self.prec;
        let f = |v: f64| Float::with_val(prec, v);
        Ok(match self.kind {
            SourceKind::Zeta => vec![f(1.0), f(-1.0)],
            SourceKind::Standard => {
                let a = self.lambda_at(0, p)?;
                vec![f(1.0), -a, f(1.0)]
            }
            SourceKind::Rankin => {
                let a = self.lambda_at(0, p)?;
                let b = self.lambda_at(1, p)?;
                rankin_poly(&a, &b)
            }
            SourceKind::Sym2 => {
                let a = self.lambda_at(0, p)?;
                sym2_poly(&a)
            }
            SourceKind::Sym2Tensor => {
                let a = self.lambda_at(0, p)?;
                let b = self.lambda_at(1, p)?;
                sym2_tensor_poly(&a, &b)
            }
        })
    }

    /// Local Dirichlet coefficients c(p^m) for m = 0..=m_max (index = exponent).
    pub fn local_coeffs(&self, p: u64, m_max: usize) -> Result<Arc<Vec<Float>>> {
        if let Some(v) = self.local.read().unwrap_or_else(|e| e.into_inner()).get(&p) {
            if v.len() > m_max {
                return Ok(v.clone());
            }
        }
        let poly = self.local_poly(p)?;
        let series = Arc::new(invert_series(&poly, m_max.max(4), self.prec));
        self.local.write().unwrap_or_else(|e| e.into_inner()).insert(p, series.clone());
        Ok(series)
    }

    /// Power sums Σ_j γ_j^m for m = 0..=m_max.
    pub fn power_sums(&self, p: u64, m_max: usize) -> Result<Vec<Float>> {
        let poly = self.local_poly(p)?;
        let c = invert_series(&poly, m_max, self.prec);
        let mut out = vec![Float::with_val(self.prec, self.degree() as u32)];
        for m in 1..=m_max {
            let mut acc = Float::new(self.prec);
            for i in 1..=m.min(poly.len() - 1) {
                acc -= Float::with_val(self.prec, &poly[i] * &c[m - i]) * i as u32;
            }
            out.push(acc);
        }
        Ok(out)
    }

    fn check_range(&self, n: u64) -> Result<()> {
        if n > self.bound() {
            for (p, _) in factor(n) {
                if p > self.bound() {
                    return Err(Error::Range { requested: p, bound: self.bound() });
                }
            }
        }
        Ok(())
    }

    /// Global coefficient at n by multiplicativity.
    pub fn coeff(&self, n: u64) -> Result<Float> {
        if n == 0 {
            return Err(Error::InvalidArgument("coefficient index must be positive".into()));
        }
        self.check_range(n)?;
        if let Some(t) = self.table.read().unwrap_or_else(|e| e.into_inner()).as_ref() {
            if (n as usize) < t.len() {
                return Ok(t[n as usize].clone());
            }
        }
        let mut acc = Float::with_val(self.prec, 1);
        for (p, e) in factor(n) {
            let c = self.local_coeffs(p, e as usize)?;
            acc *= &c[e as usize];
        }
        Ok(acc)
    }

    pub fn bytes_per_value(&self) -> u64 {
        (self.prec as u64).div_ceil(64) * 8 + 48
    }

    /// Coefficients for 0..=n_max (entry 0 is 0), memoized.
    pub fn table(&self, n_max: u64) -> Result<Arc<Vec<Float>>> {
        if let Some(t) = self.table.read().unwrap_or_else(|e| e.into_inner()).as_ref() {
            if t.len() as u64 > n_max {
                return Ok(t.clone());
            }
        }
        if n_max > self.bound() {
            return Err(Error::Range { requested: n_max, bound: self.bound() });
        }
        let needed = (n_max + 1) * self.bytes_per_value();
        if needed > self.budget {
            return Err(Error::MemoryBudget { needed, budget: self.budget });
        }
        let t = Arc::new(self.compute_table(n_max)?);
        *self.table.write().unwrap_or_else(|e| e.into_inner()) = Some(t.clone());
        Ok(t)
    }

    fn compute_table(&self, n_max: u64) -> Result<Vec<Float>> {
        let n = n_max as usize;
        let mut out = Vec::with_capacity(n + 1);
        out.push(Float::new(self.prec));
        if n == 0 {
            return Ok(out);
        }
        out.push(Float::with_val(self.prec, 1));
        if self.kind == SourceKind::Zeta {
            out.resize(n + 1, Float::with_val(self.prec, 1));
            return Ok(out);
        }
        let spf = SpfTable::new(n_max);
        let mut locals: HashMap<u64, Arc<Vec<Float>>> = HashMap::new();
        for m in 2..=n {
            let (p, e, rest) = spf.split(m as u64);
            let loc = match locals.get(&p) {
                Some(l) => l.clone(),
                None => {
                    let mut emax = 1usize;
                    let mut pp = p;
                    while pp <= n_max / p {
                        pp *= p;
                        emax += 1;
                    }
                    let l = self.local_coeffs(p, emax)?;
                    locals.insert(p, l.clone());
                    l
                }
            };
            let v = Float::with_val(self.prec, &out[rest as usize] * &loc[e as usize]);
            out.push(v);
        }
        Ok(out)
    }
}

/// c with Σ c_m X^m = 1/E(X), to order m_max.
pub fn invert_series(poly: &[Float], m_max: usize, prec: u32) -> Vec<Float> {
    let mut c: Vec<Float> = Vec::with_capacity(m_max + 1);
    c.push(Float::with_val(prec, 1));
    for m in 1..=m_max {
        let mut acc = Float::new(prec);
        for i in 1..=m.min(poly.len() - 1) {
            acc -= Float::with_val(prec, &poly[i] * &c[m - i]);
        }
        c.push(acc);
    }
    c
}

pub fn poly_mul(a: &[Float], b: &[Float]) -> Vec<Float> {
    let prec = a[0].prec();
    let mut out = vec![Float::new(prec); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += Float::with_val(prec, x * y);
        }
    }
    out
}

/// (1 − c₁X + X²)(1 − c₂X + X²) with c₁ + c₂ = s, c₁c₂ = q.
fn palindromic_quartic(s: &Float, q: &Float) -> Vec<Float> {
    let prec = s.prec();
    vec![
        Float::with_val(prec, 1),
        Float::with_val(prec, -s),
        Float::with_val(prec, q + 2u32),
        Float::with_val(prec, -s),
        Float::with_val(prec, 1),
    ]
}

pub fn rankin_poly(a: &Float, b: &Float) -> Vec<Float> {
    let prec = a.prec();
    let s = Float::with_val(prec, a * b);
    let q = Float::with_val(prec, a.square_ref()) + Float::with_val(prec, b.square_ref()) - 4u32;
    palindromic_quartic(&s, &q)
}

pub fn sym2_poly(a: &Float) -> Vec<Float> {
    let prec = a.prec();
    let t = Float::with_val(prec, a.square_ref()) - 1u32;
    vec![Float::with_val(prec, 1), Float::with_val(prec, -&t), t, Float::with_val(prec, -1)]
}

pub fn sym2_tensor_poly(a: &Float, b: &Float) -> Vec<Float> {
    let prec = a.prec();
    let u = Float::with_val(prec, a.square_ref()) - 2u32;
    let v = Float::with_val(prec, b.square_ref()) - 2u32;
    let one = Float::with_val(prec, 1);
    let quad = |c: &Float| vec![one.clone(), Float::with_val(prec, -c), one.clone()];
    let s = Float::with_val(prec, &u * &v);
    let q = Float::with_val(prec, u.square_ref()) + Float::with_val(prec, v.square_ref()) - 4u32;
    let mut p = vec![one.clone(), Float::with_val(prec, -1)];
    p = poly_mul(&p, &quad(&u));
    p = poly_mul(&p, &quad(&v));
    poly_mul(&p, &palindromic_quartic(&s, &q))
}

/// Λ-coefficients of −L′/L for a source.
#[derive(Debug)]
pub struct VonMangoldtSource {
    base: Arc<TensorCoeffSource>,
    cache: RwLock<HashMap<u64, Arc<Vec<Float>>>>,
}

impl VonMangoldtSource {
    pub fn new(base: Arc<TensorCoeffSource>) -> Self {
        VonMangoldtSource { base, cache: RwLock::new(HashMap::new()) }
    }

    pub fn base(&self) -> &Arc<TensorCoeffSource> {
        &self.base
    }

    /// (Σ_j γ_j^m)·log p for n = p^m, else 0.
    pub fn von_mangoldt(&self, n: u64) -> Result<Float> {
        let prec = self.base.prec;
        if n < 2 {
            return Ok(Float::new(prec));
        }
        let Some((p, m)) = prime_power(n) else {
            return Ok(Float::new(prec));
        };
        if p > self.base.bound() {
            return Err(Error::Range { requested: p, bound: self.base.bound() });
        }
        let sums = self.power_sums(p, m as usize)?;
        let logp = Float::with_val(prec, p).ln();
        Ok(Float::with_val(prec, &sums[m as usize] * &logp))
    }

    fn power_sums(&self, p: u64, m: usize) -> Result<Arc<Vec<Float>>> {
        if let Some(v) = self.cache.read().unwrap_or_else(|e| e.into_inner()).get(&p) {
            if v.len() > m {
                return Ok(v.clone());
            }
        }
        let v = Arc::new(self.base.power_sums(p, m.max(8))?);
        self.cache.write().unwrap_or_else(|e| e.into_inner()).insert(p, v.clone());
        Ok(v)
    }

    /// Λ(n) for 0..=n_max.
    pub fn table(&self, n_max: u64) -> Result<Vec<Float>> {
        let prec = self.base.prec;
        let mut out = vec![Float::new(prec); n_max as usize + 1];
        for p in crate::arith::primes_up_to(n_max) {
            let logp = Float::with_val(prec, p).ln();
            let mut emax = 1usize;
            let mut pp = p;
            while pp <= n_max / p {
                pp *= p;
                emax += 1;
            }
            let sums = self.power_sums(p, emax)?;
            let mut q = p;
            for m in 1..=emax {
                out[q as usize] = Float::with_val(prec, &sums[m] * &logp);
                if m < emax {
                    q *= p;
                }
            }
        }
        Ok(out)
    }
}

/// Dirichlet convolution of two tables indexed from 1 (entry 0 ignored).
pub fn dirichlet_convolve(a: &[Float], b: &[Float]) -> Vec<Float> {
    let n = a.len().min(b.len()) - 1;
    let prec = a[1].prec().max(b[1].prec());
    let mut out = vec![Float::new(prec); n + 1];
    for d in 1..=n {
        if a[d].is_zero() {
            continue;
        }
        let mut m = d;
        let mut e = 1;
        while m <= n {
            out[m] += Float::with_val(prec, &a[d] * &b[e]);
            m += d;
            e += 1;
        }
    }
    out
}

fn max_abs_diff(a: &[Float], b: &[Float]) -> f64 {
    a.iter()
        .zip(b)
        .skip(1)
        .map(|(x, y)| Float::with_val(x.prec(), x - y).abs().to_f64())
        .fold(0.0, f64::max)
}

/// max_{n ≤ n_max} |λ_{f⊗f}(n) − Σ_{d|n} λ_{Sym²f}(d)|.
pub fn factorization_check_diagonal(f: &Arc<Eigenform>, n_max: u64) -> Result<f64> {
    let rs = TensorCoeffSource::rankin(f.clone(), f.clone()).table(n_max)?;
    let s2 = TensorCoeffSource::sym2(f.clone()).table(n_max)?;
    let ones = TensorCoeffSource::zeta(f.precision).table(n_max)?;
    let rhs = dirichlet_convolve(&ones, &s2);
    Ok(max_abs_diff(&rs[..=n_max as usize], &rhs))
}

/// Coefficients of L(s, f⊗g⊗f⊗g) from the Satake angles: the local power
/// sums are (2cos mθ·2cos mφ)², exponentiated by Newton's identities.
pub fn quadruple_product_table(f: &Eigenform, g: &Eigenform, n_max: u64) -> Result<Vec<Float>> {
    let prec = f.precision.min(g.precision);
    let spf = SpfTable::new(n_max.max(1));
    let mut local: HashMap<u64, Vec<Float>> = HashMap::new();
    let n = n_max as usize;
    let mut out = vec![Float::new(prec); n + 1];
    if n == 0 {
        return Ok(out);
    }
    out[1] = Float::with_val(prec, 1);
    for m in 2..=n {
        let (p, e, rest) = spf.split(m as u64);
        if !local.contains_key(&p) {
            let th = f.satake_angle(p)?.theta;
            let ph = g.satake_angle(p)?.theta;
            let mut emax = 1usize;
            let mut pp = p;
            while pp <= n_max / p {
                pp *= p;
                emax += 1;
            }
            let mut sums = vec![Float::new(prec)];
            for j in 1..=emax {
                let a = Float::with_val(prec, &th * j as u32).cos() * 2u32;
                let b = Float::with_val(prec, &ph * j as u32).cos() * 2u32;
                sums.push(Float::with_val(prec, &a * &b).square());
            }
            let mut c = vec![Float::with_val(prec, 1)];
            for j in 1..=emax {
                let mut acc = Float::new(prec);
                for i in 1..=j {
                    acc += Float::with_val(prec, &sums[i] * &c[j - i]);
                }
                c.push(acc / j as u32);
            }
            local.insert(p, c);
        }
        out[m] = Float::with_val(prec, &out[rest as usize] * &local[&p][e as usize]);
    }
    Ok(out)
}

/// Residual of L(s,f⊗g⊗f⊗g) = ζ(s)L(s,Sym²f)L(s,Sym²g)L(s,Sym²f⊗Sym²g) coefficientwise.
pub fn factorization_check_sym2tensor(f: &Arc<Eigenform>, g: &Arc<Eigenform>, n_max: u64) -> Result<f64> {
    let prec = f.precision.min(g.precision);
    let lhs = quadruple_product_table(f, g, n_max)?;
    let z = TensorCoeffSource::zeta(prec).table(n_max)?;
    let a = TensorCoeffSource::sym2(f.clone()).table(n_max)?;
    let b = TensorCoeffSource::sym2(g.clone()).table(n_max)?;
    let c = TensorCoeffSource::sym2_tensor(f.clone(), g.clone()).table(n_max)?;
    let n = n_max as usize;
    let rhs = dirichlet_convolve(&dirichlet_convolve(&dirichlet_convolve(&z[..=n], &a[..=n]), &b[..=n]), &c[..=n]);
    Ok(max_abs_diff(&lhs, &rhs))
}

/// Result of a smoothed sum Σ c(ℓ)ℓ^{−s}e^{−ℓ/L}.
#[derive(Debug, Clone)]
pub struct SmoothedSum {
    pub value: Complex,
    pub terms: u64,
    pub tail_bound: f64,
}

/// ℓ_max = ⌈L(P ln 2 + 20)⌉.
pub fn smoothing_cutoff(l: f64, prec: u32) -> u64 {
    (l * (prec as f64 * std::f64::consts::LN_2 + 20.0)).ceil() as u64
}

/// Upper bound for Σ_{ℓ>ℓ_max} (2√ℓ)^{D−1} ℓ^{−σ} e^{−ℓ/L}, using d_D(ℓ) ≤ d(ℓ)^{D−1}.
pub fn smoothed_tail_bound(degree: usize, sigma: f64, l: f64, l_max: u64) -> f64 {
    let a = (degree as f64 - 1.0) / 2.0 - sigma;
    let x = l_max as f64;
    let log_g = (degree as f64 - 1.0) * std::f64::consts::LN_2 + a * x.ln() - x / l;
    let rate = if a > 0.0 { 1.0 / l - a / x } else { 1.0 / l };
    if rate <= 0.0 {
        return f64::INFINITY;
    }
    log_g.exp() / (1.0 - (-rate).exp())
}

pub fn smoothed_dirichlet_sum(source: &TensorCoeffSource, s: &Complex, l: f64) -> Result<SmoothedSum> {
    if l <= 0.0 {
        return Err(Error::InvalidArgument("smoothing length must be positive".into()));
    }
    let prec = source.prec;
    let l_max = smoothing_cutoff(l, prec).max(1);
    let table = if source.kind == SourceKind::Zeta { None } else { Some(source.table(l_max)?) };
    let wp = prec + 16;
    let linv = Float::with_val(wp, 1) / l;
    let real_s = s.imag().is_zero();
    let mut acc = Complex::new(wp);
    for n in 1..=l_max {
        let mut w = Float::with_val(wp, -(&linv * Float::with_val(wp, n)));
        w.exp_mut();
        let c = match &table {
            Some(t) => Float::with_val(wp, &t[n as usize]),
            None => Float::with_val(wp, 1),
        };
        if c.is_zero() {
            continue;
        }
        let lnn = Float::with_val(wp, n).ln();
        if real_s {
            let e = (-Float::with_val(wp, s.real() * &lnn)).exp();
            acc += Float::with_val(wp, &c * &w) * e;
        } else {
            let e = (-Complex::with_val(wp, s * &lnn)).exp();
            acc += e * Float::with_val(wp, &c * &w);
        }
    }
    let tail = smoothed_tail_bound(source.degree(), s.real().to_f64(), l, l_max);
    Ok(SmoothedSum { value: Complex::with_val(prec, &acc), terms: l_max, tail_bound: tail })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigenforms::eigenforms;
    use std::sync::OnceLock;

    fn delta_form() -> Arc<Eigenform> {
        static F: OnceLock<Arc<Eigenform>> = OnceLock::new();
        F.get_or_init(|| Arc::new(eigenforms(12, 1200, 192).unwrap().remove(0))).clone()
    }

    fn pair24() -> (Arc<Eigenform>, Arc<Eigenform>) {
        static F: OnceLock<(Arc<Eigenform>, Arc<Eigenform>)> = OnceLock::new();
        F.get_or_init(|| {
            let mut v = eigenforms(24, 3200, 192).unwrap();
            let g = Arc::new(v.remove(1));
            let f = Arc::new(v.remove(0));
            (f, g)
        })
        .clone()
    }

    fn tiny(x: &Float, bits: i32) -> bool {
        Float::with_val(64, x.abs_ref()) <= Float::with_val(64, Float::i_exp(1, -bits))
    }

    #[test]
    fn first_order_coefficients() {
        let f = delta_form();
        let (a, b) = pair24();
        let r = TensorCoeffSource::rankin(a.clone(), b.clone());
        let s = TensorCoeffSource::sym2(f.clone());
        for p in [2u64, 3, 5, 97] {
            let want = Float::with_val(192, a.lambda(p).unwrap() * b.lambda(p).unwrap());
            assert!(tiny(&(r.coeff(p).unwrap() - want), 180));
            let want = Float::with_val(192, f.lambda(p).unwrap().square_ref()) - 1u32;
            assert!(tiny(&(s.coeff(p).unwrap() - want), 180));
        }
    }

    #[test]
    fn rankin_delta_at_two_is_exact_ratio() {
        let f = delta_form();
        let r = TensorCoeffSource::rankin(f.clone(), f.clone());
        let want = Float::with_val(192, 576) / 2048u32;
        assert!(tiny(&(r.coeff(2).unwrap() - want), 185));
        assert_eq!(r.coeff(1).unwrap(), 1);
    }

    #[test]
    fn classical_prime_power_identities() {
        // Both L-functions are ζ(2s) times Σλ_fλ_g(n)n^{−s} and Σλ_f(n²)n^{−s} respectively.
        let (f, g) = pair24();
        let r = TensorCoeffSource::rankin(f.clone(), g.clone());
        let s = TensorCoeffSource::sym2(f.clone());
        for p in [2u64, 3, 5] {
            let loc = r.local_coeffs(p, 5).unwrap();
            let sl = s.local_coeffs(p, 5).unwrap();
            for m in 0..=5u32 {
                let mut want = Float::new(192);
                let mut j = 0;
                while 2 * j <= m {
                    let e = p.pow(m - 2 * j);
                    want += Float::with_val(192, f.lambda(e).unwrap() * g.lambda(e).unwrap());
                    j += 1;
                }
                assert!(tiny(&(loc[m as usize].clone() - want), 170), "rankin p={p} m={m}");
                // Σ_{2j+i=m} λ_f(p^{2i})
                let mut want = Float::new(192);
                for i in 0..=m {
                    if (m - i) % 2 == 0 && p.pow(2 * i) <= f.bound as u64 {
                        want += f.lambda(p.pow(2 * i)).unwrap();
                    } else if (m - i) % 2 == 0 {
                        want = Float::with_val(192, f64::NAN);
                    }
                }
                if !want.is_nan() {
                    assert!(tiny(&(sl[m as usize].clone() - want), 170), "sym2 p={p} m={m}");
                }
            }
        }
    }

    #[test]
    fn diagonal_factorization() {
        let f = delta_form();
        assert!(factorization_check_diagonal(&f, 1000).unwrap() < 2f64.powi(-150));
    }

    #[test]
    fn sym2_tensor_factorization() {
        let (f, g) = pair24();
        assert!(factorization_check_sym2tensor(&f, &g, 500).unwrap() < 2f64.powi(-140));
    }

    #[test]
    fn von_mangoldt_values() {
        let f = delta_form();
        let (a, b) = pair24();
        let vm = VonMangoldtSource::new(Arc::new(TensorCoeffSource::rankin(f.clone(), f.clone())));
        assert!(vm.von_mangoldt(12).unwrap().is_zero());
        assert!(vm.von_mangoldt(1).unwrap().is_zero());
        for (p, m) in [(2u64, 1u32), (2, 3), (3, 4), (7, 2)] {
            let th = f.satake_angle(p).unwrap().theta;
            let c = Float::with_val(192, &th * m).cos();
            let want = Float::with_val(192, c.square_ref()) * 4u32 * Float::with_val(192, p).ln();
            let got = vm.von_mangoldt(p.pow(m)).unwrap();
            assert!(tiny(&(got - want), 170), "p={p} m={m}");
        }
        let vm = VonMangoldtSource::new(Arc::new(TensorCoeffSource::rankin(a.clone(), b.clone())));
        let want = Float::with_val(192, a.lambda(3).unwrap() * b.lambda(3).unwrap()) * Float::with_val(192, 3).ln();
        assert!(tiny(&(vm.von_mangoldt(3).unwrap() - want), 170));
        let t = vm.table(200).unwrap();
        for n in [4u64, 27, 49, 128, 199] {
            assert_eq!(t[n as usize], vm.von_mangoldt(n).unwrap());
        }
    }

    #[test]
    fn range_errors() {
        let f = delta_form();
        let r = TensorCoeffSource::rankin(f.clone(), f.clone());
        assert!(matches!(r.coeff(1201), Err(Error::Range { .. })));
        assert!(r.coeff(1024 * 3).is_ok());
        assert!(matches!(r.table(5000), Err(Error::Range { .. })));
        let tight = TensorCoeffSource::rankin(f.clone(), f.clone()).with_memory_budget(1000);
        assert!(matches!(tight.table(500), Err(Error::MemoryBudget { .. })));
    }

    #[test]
    fn smoothed_zeta_at_two() {
        let z = TensorCoeffSource::zeta(64);
        let l = 1000.0;
        let s = smoothed_dirichlet_sum(&z, &Complex::with_val(64, (2, 0)), l).unwrap();
        let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
        let v = s.value.real().to_f64();
        // Σ n^{−2}(1 − e^{−n/L}) ≤ Σ_{n≤L} 1/(nL) + Σ_{n>L} n^{−2} ≤ (ln L + 2)/L
        assert!(v < zeta2 && zeta2 - v <= (l.ln() + 2.0) / l);
        assert!(s.tail_bound < 1e-30);
    }

    #[test]
    fn smoothed_small_l_is_first_term() {
        let z = TensorCoeffSource::zeta(64);
        let s = smoothed_dirichlet_sum(&z, &Complex::with_val(64, (0, 0)), 0.05).unwrap();
        let first = (-1.0f64 / 0.05).exp();
        assert!((s.value.real().to_f64() - first).abs() < 1e-12);
    }
}
