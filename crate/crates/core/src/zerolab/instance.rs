//! Completed L-functions Λ(s) = γ(s)L(s) with γ(s) = Π_j Γ_R(s + μ_j).
//!
//! Λ is evaluated from its values on the line Re w = c far to the right of the
//! strip: for any A > 0,
//!
//!   Λ(s) = I_A(s) + ε I_A(1−s) − r₁ e^{A(1−s)²}/(1−s) + r₀ e^{As²}/s,
//!   I_A(z) = (1/2πi) ∫_{(c)} Λ(w) e^{A(w−z)²} dw/(w−z),
//!
//! where r₀ = −εr₁ are the residues at 0 and 1. The line values Λ(c+iy) come
//! from the Dirichlet series and are computed once per instance; the
//! integral is a trapezoidal sum whose step is chosen from the distance of
//! the kernel pole to the line. The result is independent of A exactly when
//! the gamma factor and root number are right, which is what validation tests.

use crate::error::{Error, Result};
use crate::lseries::{SourceKind, TensorCoeffSource};
use crate::mp;
use rug::float::Constant;
use rug::{Assign, Complex, Float};
use serde::Serialize;
use std::f64::consts::{LN_2, PI};
use std::sync::Arc;

pub const DEFAULT_T_MAX: f64 = 30.0;
/// Right edge of every counting contour.
pub const SIGMA_RIGHT: f64 = 3.0;
pub const DEFAULT_COEFF_LIMIT: u64 = 16_000;
pub const VALIDATION_RESIDUAL: f64 = 1e-10;
pub const VALIDATION_EPSILON: f64 = 1e-8;
/// Flag threshold for the per-evaluation error bound, relative to |Λ(s)|.
pub const EVAL_TOLERANCE: f64 = 1e-10;

const A_CANDIDATES: usize = 24;
const MAX_STRIDE: usize = 8;

/// Archimedean parameters μ_j of γ(s) = Π Γ_R(s + μ_j).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum GammaConvention {
    /// ζ: {0}; L(s,f): {(k−1)/2, (k+1)/2}; f⊗g: {0, 1, k−1, k}; Sym²f: {1, k−1, k}.
    Standard,
    Shifts(Vec<f64>),
}

impl GammaConvention {
    pub fn shifts(&self, kind: SourceKind, weight: Option<u32>) -> Result<Vec<f64>> {
        if kind == SourceKind::Sym2Tensor {
            return Err(Error::Unsupported("no analytic continuation for the degree-9 source".into()));
        }
        let shifts = match self {
            GammaConvention::Shifts(v) => v.clone(),
            GammaConvention::Standard => {
                let k = weight.map(|k| k as f64);
                match (kind, k) {
                    (SourceKind::Zeta, _) => vec![0.0],
                    (SourceKind::Standard, Some(k)) => vec![(k - 1.0) / 2.0, (k + 1.0) / 2.0],
                    (SourceKind::Rankin, Some(k)) => vec![0.0, 1.0, k - 1.0, k],
                    (SourceKind::Sym2, Some(k)) => vec![1.0, k - 1.0, k],
                    _ => return Err(Error::InvalidArgument("source is not bound to an eigenform".into())),
                }
            }
        };
        if shifts.len() != kind.degree() {
            return Err(Error::InvalidArgument(format!(
                "{} gamma shifts for a degree-{} L-function",
                shifts.len(),
                kind.degree()
            )));
        }
        Ok(shifts)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Validation {
    Pending,
    Validated,
    Unvalidated(String),
}

#[derive(Debug, Clone)]
pub struct InstanceConfig {
    pub t_max: f64,
    pub convention: GammaConvention,
    /// Upper limit on the number of Dirichlet coefficients used on the line.
    pub coeff_limit: u64,
}

impl Default for InstanceConfig {
    fn default() -> Self {
        InstanceConfig { t_max: DEFAULT_T_MAX, convention: GammaConvention::Standard, coeff_limit: DEFAULT_COEFF_LIMIT }
    }
}

/// Outcome of the functional-equation fit.
#[derive(Debug, Clone, Serialize)]
pub struct FeReport {
    pub epsilon_fit: f64,
    /// Fitted residue of Λ at s = 1 (0 for entire instances).
    pub residue_fit: f64,
    /// max_k |Λ_{A₁}(s_k) − Λ_{A₂}(s_k)| / |Λ_{A₁}(s_k)|.
    pub max_residual: f64,
    pub samples: usize,
    pub validated: bool,
}

/// Cost model and numerical parameters of the line representation.
#[derive(Debug, Clone, Serialize)]
pub struct LineParameters {
    pub abscissa: f64,
    pub step: f64,
    pub window: f64,
    pub nodes: usize,
    pub terms: u64,
    pub working_precision: u32,
    pub log_conductor: f64,
    pub tail_bound: f64,
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub value: Complex,
    pub derivative: Option<Complex>,
    pub error_bound: f64,
    pub a: f64,
    /// Error bound above EVAL_TOLERANCE·|Λ(s)|.
    pub precision_exhausted: bool,
}

#[derive(Debug)]
pub struct LFunctionInstance {
    source: Arc<TensorCoeffSource>,
    label: String,
    kind: SourceKind,
    shifts: Vec<f64>,
    convention: GammaConvention,
    prec: u32,
    wp: u32,
    t_max: f64,
    c: f64,
    h: f64,
    log_q: f64,
    window: f64,
    a_cap: f64,
    terms: u64,
    nodes: Vec<Complex>,
    log_mag: Vec<f64>,
    tail_rel: f64,
    coef_rel: f64,
    pole: bool,
    epsilon: f64,
    residue: Float,
    status: Validation,
    fe: Option<FeReport>,
}

/// Upper bound for ζ(x), x > 1.
fn zeta_upper(x: f64) -> f64 {
    let head: f64 = (1..10).map(|n| (n as f64).powf(-x)).sum();
    head + 10f64.powf(-x) + 10f64.powf(1.0 - x) / (x - 1.0)
}

/// ln of a bound for Σ_{n>N} d_D(n) n^{−c}, via N^{c₀−c} Σ d_D(n) n^{−c₀}.
fn log_tail(d: usize, n: u64, c: f64) -> f64 {
    let ln_n = (n as f64).ln();
    let mut best = f64::INFINITY;
    let mut c0 = 1.02;
    while c0 < c - 0.05 {
        let v = (c0 - c) * ln_n + d as f64 * zeta_upper(c0).ln();
        best = best.min(v);
        c0 += 0.02;
    }
    best
}

struct Plan {
    terms: u64,
    c: f64,
    wp: u32,
    h: f64,
    nodes: usize,
    window: f64,
    a_cap: f64,
}

/// ln max_t |γ(c+it)/γ(½+it)| over a few heights up to t_max.
fn gamma_growth(shifts: &[f64], c: f64, t_max: f64) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for i in 0..=4 {
        let t = t_max * i as f64 / 4.0;
        let hi = gamma_product(shifts, &Complex::with_val(64, (c, t)), 64);
        let lo = gamma_product(shifts, &Complex::with_val(64, (0.5, t)), 64);
        worst = worst.max((mp::log2_abs(&hi) - mp::log2_abs(&lo)) * LN_2);
    }
    worst
}

fn plan(shifts: &[f64], prec: u32, t_max: f64, limit: u64) -> Option<Plan> {
    let d = shifts.len();
    let log_q = conductor_log(shifts, t_max);
    let target = prec as f64 * LN_2;
    let mut best: Option<(f64, Plan)> = None;
    let mut n = 250u64;
    loop {
        let terms = n.min(limit);
        let mut c = SIGMA_RIGHT + 2.0;
        while c < 60.0 {
            let l_min = 2.0 - zeta_upper(c).powi(d as i32);
            if l_min > 0.5 && log_tail(d, terms, c) - l_min.ln() <= -target {
                break;
            }
            c += 0.25;
        }
        if c < 60.0 {
            // cancellation between the line data and Λ near the critical line:
            // the Gaussian at its best width plus the gamma growth out to c
            let a_opt = PI * d as f64 / (8.0 * (c + 0.5));
            let loss = (c + 0.5) * PI * d as f64 / 4.0 + gamma_growth(shifts, c, t_max) + 20.0;
            let wp = prec + 32 + (loss.max(0.0) / LN_2).ceil() as u32;
            let bits = wp as f64 * LN_2;
            let window = (2.0 * (bits + 60.0) / a_opt).sqrt().clamp(30.0, 400.0);
            let a_cap = 4.0 * a_opt;
            let delta = (c - SIGMA_RIGHT) / 2.0;
            let budget = bits + 20.0 + a_cap * (2.0 * delta * (c + 2.0) + delta * delta) + delta / 2.0 * log_q;
            let h = 2.0 * PI * delta / budget;
            let nodes = ((t_max + window) / h).ceil() as usize;
            let cost = terms as f64 * nodes as f64 * (wp as f64).powf(1.6);
            if best.as_ref().is_none_or(|(b, _)| cost < *b) {
                best = Some((cost, Plan { terms, c, wp, h, nodes, window, a_cap }));
            }
        }
        if terms >= limit {
            break;
        }
        n *= 2;
    }
    best.map(|(_, p)| p)
}

fn conductor_log(shifts: &[f64], t: f64) -> f64 {
    shifts.iter().map(|mu| ((mu * mu + t * t).sqrt() + 1.0).ln() - (2.0 * PI).ln()).sum::<f64>().max(0.0)
}

pub fn build_instance(source: Arc<TensorCoeffSource>, cfg: &InstanceConfig) -> Result<LFunctionInstance> {
    let kind = source.kind();
    let shifts = cfg.convention.shifts(kind, source.weight())?;
    if !(cfg.t_max > 0.0) {
        return Err(Error::InvalidArgument("t_max must be positive".into()));
    }
    let d = kind.degree();
    let prec = source.precision();
    let log_q = conductor_log(&shifts, cfg.t_max);
    let limit = source.bound().min(cfg.coeff_limit).max(1);
    let p = plan(&shifts, prec, cfg.t_max, limit).ok_or_else(|| {
        Error::Numerical(format!("{limit} coefficients cannot resolve {} up to height {}", source.label(), cfg.t_max))
    })?;
    let wp = p.wp;
    let table = source.table(p.terms)?;

    // D_j = Σ a_n n^{−c−ijh}, j = 0..=J
    let mut dsum = vec![Complex::new(wp); p.nodes + 1];
    let c_f = Float::with_val(wp, p.c);
    let h_f = Float::with_val(wp, p.h);
    for n in 1..=p.terms {
        let a = &table[n as usize];
        if a.is_zero() {
            continue;
        }
        let ln_n = Float::with_val(wp, n).ln();
        let base = Float::with_val(wp, a) * (-Float::with_val(wp, &c_f * &ln_n)).exp();
        let ang = Float::with_val(wp, &h_f * &ln_n);
        let (s, co) = ang.sin_cos(Float::new(wp));
        let rot = Complex::with_val(wp, (co, -s));
        let mut cur = Complex::with_val(wp, (base, 0));
        for slot in dsum.iter_mut() {
            *slot += &cur;
            cur *= &rot;
        }
    }
    let mut nodes = Vec::with_capacity(dsum.len());
    let mut log_mag = Vec::with_capacity(dsum.len());
    for (j, dj) in dsum.into_iter().enumerate() {
        let w = Complex::with_val(wp, (&c_f, Float::with_val(wp, &h_f * j as u64)));
        let g = gamma_product(&shifts, &w, wp);
        let hj = g * dj;
        log_mag.push(mp::log2_abs(&hj) * LN_2);
        nodes.push(hj);
    }

    let log_tail_abs = log_tail(d, p.terms, p.c);
    let l_min = 2.0 - zeta_upper(p.c).powi(d as i32);
    let tail_rel = log_tail_abs.exp() / l_min.max(0.5);
    let pole = kind == SourceKind::Zeta || source.is_diagonal();
    Ok(LFunctionInstance {
        label: source.label(),
        source,
        kind,
        shifts,
        convention: cfg.convention.clone(),
        prec,
        wp,
        t_max: cfg.t_max,
        c: p.c,
        h: p.h,
        log_q,
        window: p.window,
        a_cap: p.a_cap,
        terms: p.terms,
        nodes,
        log_mag,
        tail_rel,
        coef_rel: 2f64.powi(-(prec as i32) + 8),
        pole,
        epsilon: 0.0,
        residue: Float::new(wp),
        status: Validation::Pending,
        fe: None,
    })
}

/// Π_j Γ_R(s + μ_j).
pub fn gamma_product(shifts: &[f64], s: &Complex, prec: u32) -> Complex {
    let mut acc = Complex::with_val(prec, 1);
    for &mu in shifts {
        let z = Complex::with_val(prec, s + Float::with_val(prec, mu));
        acc *= mp::gamma_r(&z, prec);
    }
    acc
}

/// Trapezoidal line sum for one kernel centre.
struct LineSum {
    value: Complex,
    derivative: Complex,
    log_max: f64,
    count: usize,
}

#[derive(Clone, Copy)]
struct Choice {
    a: f64,
    log_max: f64,
    /// Use every stride-th node.
    stride: usize,
}

impl LFunctionInstance {
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn source(&self) -> &Arc<TensorCoeffSource> {
        &self.source
    }

    pub fn kind(&self) -> SourceKind {
        self.kind
    }

    pub fn degree(&self) -> usize {
        self.kind.degree()
    }

    pub fn gamma_shifts(&self) -> &[f64] {
        &self.shifts
    }

    pub fn convention(&self) -> &GammaConvention {
        &self.convention
    }

    pub fn conductor(&self) -> u64 {
        1
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    /// Simple pole at s = 1 (ζ and diagonal f⊗f).
    pub fn has_pole(&self) -> bool {
        self.pole
    }

    pub fn status(&self) -> &Validation {
        &self.status
    }

    pub fn is_validated(&self) -> bool {
        self.status == Validation::Validated
    }

    pub fn fe_report(&self) -> Option<&FeReport> {
        self.fe.as_ref()
    }

    /// Root number, once validated.
    pub fn root_number(&self) -> Option<f64> {
        self.is_validated().then_some(self.epsilon)
    }

    pub fn line_parameters(&self) -> LineParameters {
        LineParameters {
            abscissa: self.c,
            step: self.h,
            window: self.window,
            nodes: self.nodes.len(),
            terms: self.terms,
            working_precision: self.wp,
            log_conductor: self.log_q,
            tail_bound: self.tail_rel,
        }
    }

    pub fn gamma_factor(&self, s: &Complex) -> Complex {
        gamma_product(&self.shifts, s, self.wp)
    }

    fn j_max(&self) -> i64 {
        self.nodes.len() as i64 - 1
    }

    fn log_mag_at(&self, j: i64) -> f64 {
        self.log_mag[j.unsigned_abs() as usize]
    }

    /// ln|term_j| for the kernel centred at z = σ + it.
    fn term_log(&self, j: i64, a: f64, sigma: f64, t: f64) -> f64 {
        let dy = j as f64 * self.h - t;
        let dx = self.c - sigma;
        self.log_mag_at(j) + a * (dx * dx - dy * dy) - 0.5 * (dx * dx + dy * dy).ln()
    }

    fn profile(&self, a: f64, sigma: f64, t: f64) -> (f64, f64) {
        let jm = self.j_max();
        let mut best = f64::NEG_INFINITY;
        for j in -jm..=jm {
            best = best.max(self.term_log(j, a, sigma, t));
        }
        let edge = self.term_log(jm, a, sigma, t).max(self.term_log(-jm, a, sigma, t));
        (best, edge)
    }

    fn log_alias(&self, a: f64, sigma: f64, log_max: f64, stride: usize) -> f64 {
        let dx = self.c - sigma;
        let delta = dx / 2.0;
        let growth = a * (2.0 * delta * dx + delta * delta) + delta / 2.0 * self.log_q;
        log_max + growth + ((2 * self.nodes.len()) as f64).ln() - 2.0 * PI * delta / (self.h * stride as f64)
    }

    fn feasible_choices(&self, s: &Complex) -> Vec<Choice> {
        let (sig, t) = (s.real().to_f64(), s.imag().to_f64());
        let a_floor = (self.wp as f64 * LN_2 + 60.0) / (self.window * self.window);
        let bits = self.wp as f64 * LN_2;
        let ratio = (self.a_cap / a_floor).powf(1.0 / (A_CANDIDATES - 1) as f64);
        let mut out = Vec::new();
        let mut fallback: Option<Choice> = None;
        for i in 0..A_CANDIDATES {
            let a = a_floor * ratio.powi(i as i32);
            let (m1, e1) = self.profile(a, sig, t);
            let (m2, e2) = self.profile(a, 1.0 - sig, -t);
            let log_max = m1.max(m2);
            let ok_edge = e1.max(e2) <= log_max - bits - 10.0;
            let alias_ok = |m: usize| {
                self.log_alias(a, sig, log_max, m) <= log_max - bits
                    && self.log_alias(a, 1.0 - sig, log_max, m) <= log_max - bits
            };
            let ok_alias = alias_ok(1);
            let stride = (1..=MAX_STRIDE).take_while(|&m| alias_ok(m)).last().unwrap_or(1);
            let ch = Choice { a, log_max, stride };
            if ok_edge && ok_alias {
                out.push(ch);
            } else if fallback.is_none_or(|f| log_max < f.log_max) {
                fallback = Some(ch);
            }
        }
        if out.is_empty() {
            out.extend(fallback);
        }
        out
    }

    fn choose(&self, s: &Complex) -> Choice {
        let v = self.feasible_choices(s);
        *v.iter().min_by(|x, y| x.log_max.total_cmp(&y.log_max)).expect("at least one candidate")
    }

    fn line_sum(&self, z: &Complex, a: f64, stride: usize, deriv: bool) -> LineSum {
        let wp = self.wp;
        let (sig, t) = (z.real().to_f64(), z.imag().to_f64());
        let jm = self.j_max();
        let logs: Vec<f64> = (-jm..=jm).map(|j| self.term_log(j, a, sig, t)).collect();
        let log_max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let cut = log_max - wp as f64 * LN_2 - 12.0;
        let lo = logs.iter().position(|&v| v >= cut).unwrap_or(0) as i64 - jm;
        let hi = (logs.len() - 1 - logs.iter().rev().position(|&v| v >= cut).unwrap_or(0)) as i64 - jm;
        let m = stride as i64;
        let lo = lo.div_euclid(m) * m;
        let hi = hi.div_euclid(m) * m;

        let a_f = Float::with_val(wp, a);
        let h_node = Float::with_val(wp, self.h);
        let mut u = Complex::with_val(wp, (self.c, Float::with_val(wp, &h_node * lo)));
        let h_f = h_node * m;
        let ih = Complex::with_val(wp, (0, &h_f));
        u -= z;
        let mut g = Complex::with_val(wp, u.square_ref()) * &a_f;
        g.exp_mut();
        let h2 = Float::with_val(wp, h_f.square_ref());
        let mut q = Complex::with_val(wp, &ih * &u) * 2u32 - &h2;
        q *= &a_f;
        q.exp_mut();
        let r = (-Float::with_val(wp, &h2 * &a_f) * 2u32).exp();
        let two_a = Float::with_val(wp, &a_f * 2u32);

        let mut sum = Complex::new(wp);
        let mut dsum = Complex::new(wp);
        let mut inv = Complex::new(wp);
        let mut hg = Complex::new(wp);
        let mut tmp = Complex::new(wp);
        for j in (lo..=hi).step_by(stride) {
            let node = &self.nodes[j.unsigned_abs() as usize];
            if j >= 0 {
                hg.assign(node * &g);
            } else {
                hg.assign(node.conj_ref());
                hg *= &g;
            }
            inv.assign(u.recip_ref());
            if deriv {
                tmp.assign(inv.square_ref());
                tmp -= &two_a;
                tmp *= &hg;
                dsum += &tmp;
            }
            hg *= &inv;
            sum += &hg;
            g *= &q;
            q *= &r;
            u += &ih;
        }
        let scale = Float::with_val(wp, &h_f / Float::with_val(wp, Constant::Pi)) / 2u32;
        LineSum { value: sum * &scale, derivative: dsum * &scale, log_max, count: ((hi - lo) / m + 1) as usize }
    }

    /// e^{A(1−s)²}/(1−s) and e^{As²}/s.
    fn pole_kernels(&self, s: &Complex, a: f64) -> (Complex, Complex) {
        let wp = self.wp;
        let a_f = Float::with_val(wp, a);
        let one_minus = Complex::with_val(wp, 1 - s);
        let k1 = (Complex::with_val(wp, one_minus.square_ref()) * &a_f).exp() / &one_minus;
        let k0 = (Complex::with_val(wp, s.square_ref()) * &a_f).exp() / s;
        (k1, k0)
    }

    fn evaluate_with(&self, s: &Complex, ch: Choice, eps: f64, residue: &Float, deriv: bool) -> Evaluation {
        let wp = self.wp;
        let s = Complex::with_val(wp, s);
        let one_minus = Complex::with_val(wp, 1 - &s);
        let a = ch.a;
        let ls = self.line_sum(&s, a, ch.stride, deriv);
        let lr = self.line_sum(&one_minus, a, ch.stride, deriv);
        let eps_f = Float::with_val(wp, eps);
        let mut value = Complex::with_val(wp, &ls.value + Complex::with_val(wp, &lr.value * &eps_f));
        let mut derivative = Complex::with_val(wp, &ls.derivative - Complex::with_val(wp, &lr.derivative * &eps_f));
        if self.pole {
            let (k1, k0) = self.pole_kernels(&s, a);
            let r1 = Float::with_val(wp, residue);
            let er1 = Float::with_val(wp, &r1 * &eps_f);
            value -= Complex::with_val(wp, &k1 * &r1);
            value -= Complex::with_val(wp, &k0 * &er1);
            if deriv {
                let two_a = Float::with_val(wp, 2.0 * a);
                let inv1 = Complex::with_val(wp, one_minus.recip_ref());
                let inv0 = Complex::with_val(wp, s.recip_ref());
                let d1 = Complex::with_val(wp, &k1 * &one_minus) * (Complex::with_val(wp, inv1.square_ref()) * -1i32 + &two_a);
                let d0 = Complex::with_val(wp, &k0 * &s) * (Complex::with_val(wp, inv0.square_ref()) * -1i32 + &two_a);
                derivative += d1 * &r1;
                derivative -= d0 * &er1;
            }
        }
        let per_term = self.coef_rel + self.tail_rel + 2f64.powi(-(wp as i32) + 12);
        let log_terms = ls.log_max.max(lr.log_max) + ((ls.count + lr.count).max(1) as f64).ln() + (self.h / (2.0 * PI)).ln();
        let alias = self
            .log_alias(a, s.real().to_f64(), log_terms, ch.stride)
            .max(self.log_alias(a, 1.0 - s.real().to_f64(), log_terms, ch.stride));
        let error_bound = (log_terms + per_term.ln()).exp() + alias.exp();
        let abs = mp::abs_f64(&value);
        Evaluation {
            value: Complex::with_val(self.prec, &value),
            derivative: deriv.then(|| Complex::with_val(self.prec, &derivative)),
            error_bound,
            a,
            precision_exhausted: !(error_bound <= EVAL_TOLERANCE * abs),
        }
    }

    fn require_fitted(&self) -> Result<()> {
        match &self.status {
            Validation::Validated => Ok(()),
            Validation::Pending => Err(Error::Unvalidated(format!("{} has not been validated", self.label))),
            Validation::Unvalidated(why) => Err(Error::Unvalidated(format!("{}: {why}", self.label))),
        }
    }

    fn check_height(&self, s: &Complex) -> Result<()> {
        let t = s.imag().to_f64().abs();
        let sig = s.real().to_f64();
        if t > self.t_max + 1e-9 {
            return Err(Error::Range { requested: t.ceil() as u64, bound: self.t_max as u64 });
        }
        if sig > SIGMA_RIGHT + 1e-9 || 1.0 - sig > SIGMA_RIGHT + 1e-9 {
            return Err(Error::Domain(format!("Re s = {sig} outside [{}, {}]", 1.0 - SIGMA_RIGHT, SIGMA_RIGHT)));
        }
        Ok(())
    }

    /// Λ(s); requires a validated instance.
    pub fn complete_eval(&self, s: &Complex) -> Result<Evaluation> {
        self.require_fitted()?;
        self.check_height(s)?;
        let ch = self.choose(s);
        Ok(self.evaluate_with(s, ch, self.epsilon, &self.residue, false))
    }

    /// Λ(s) and Λ′(s).
    pub fn complete_eval_with_derivative(&self, s: &Complex) -> Result<Evaluation> {
        self.require_fitted()?;
        self.check_height(s)?;
        let ch = self.choose(s);
        Ok(self.evaluate_with(s, ch, self.epsilon, &self.residue, true))
    }

    /// L(s) = Λ(s)/γ(s).
    pub fn l_value(&self, s: &Complex) -> Result<Complex> {
        let e = self.complete_eval(s)?;
        let g = self.gamma_factor(&Complex::with_val(self.wp, s));
        Ok(Complex::with_val(self.prec, Complex::with_val(self.wp, &e.value) / g))
    }

    /// Default validation points: off the critical line, away from poles, below t_max.
    pub fn default_samples(&self) -> Vec<Complex> {
        let scale = (self.t_max / 20.0).min(1.0);
        [(0.75, 2.1), (1.3, 4.7), (0.4, 7.3), (2.2, 1.1), (0.6, 11.9), (1.8, 16.4), (-0.3, 9.6)]
            .iter()
            .map(|&(x, y)| Complex::with_val(self.wp, (x, y * scale)))
            .collect()
    }

    /// Fits ε (and the residue r₁ for polar instances) by least squares on the
    /// A-independence of the Cauchy representation, and reports the residual.
    pub fn fe_residual(&self, samples: &[Complex]) -> Result<FeReport> {
        if samples.is_empty() {
            return Err(Error::InvalidArgument("no sample points".into()));
        }
        let wp = self.wp;
        struct Row {
            x: Complex,
            y: Complex,
            u: Complex,
            v: Complex,
            base: [Complex; 4],
        }
        let mut rows = Vec::with_capacity(samples.len());
        for s in samples {
            self.check_height(s)?;
            let s = Complex::with_val(wp, s);
            if self.pole && (mp::abs_f64(&s) < 0.2 || mp::abs_f64(&Complex::with_val(wp, &s - 1u32)) < 0.2) {
                return Err(Error::InvalidArgument(format!("sample {s} too close to a pole")));
            }
            let choices = self.feasible_choices(&s);
            let best = *choices.iter().min_by(|x, y| x.log_max.total_cmp(&y.log_max)).expect("candidate");
            let alt = choices
                .iter()
                .filter(|c| c.log_max <= best.log_max + 10.0 && c.a != best.a)
                .max_by(|x, y| (x.a / best.a).ln().abs().total_cmp(&(y.a / best.a).ln().abs()))
                .copied()
                .unwrap_or(Choice { a: best.a * 1.5, log_max: best.log_max, stride: 1 });
            let one_minus = Complex::with_val(wp, 1 - &s);
            let parts = |ch: Choice| {
                let i_s = self.line_sum(&s, ch.a, ch.stride, false).value;
                let i_r = self.line_sum(&one_minus, ch.a, ch.stride, false).value;
                let (k1, k0) = self.pole_kernels(&s, ch.a);
                [i_s, i_r, k1, k0]
            };
            let p1 = parts(best);
            let p2 = parts(alt);
            let scale = Float::with_val(wp, p1[0].abs_ref()).max(&Float::with_val(wp, p1[1].abs_ref()));
            let d = |i: usize| Complex::with_val(wp, &p1[i] - &p2[i]) / &scale;
            rows.push(Row { x: d(0), y: d(1), u: d(2), v: d(3), base: p1.clone() });
            let _ = &rows.last().expect("row").base;
        }
        let re_dot = |a: &Complex, b: &Complex| -> Float {
            let p = Complex::with_val(wp, a.conj_ref()) * b;
            Float::with_val(wp, p.real())
        };
        let mut eps = Float::with_val(wp, 1);
        let mut r1 = Float::new(wp);
        for _ in 0..60 {
            if self.pole {
                let mut num = Float::new(wp);
                let mut den = Float::new(wp);
                for row in &rows {
                    let m = Complex::with_val(wp, &row.u + Complex::with_val(wp, &row.v * &eps));
                    let rhs = Complex::with_val(wp, &row.x + Complex::with_val(wp, &row.y * &eps));
                    num += re_dot(&m, &rhs);
                    den += Float::with_val(wp, m.norm_ref());
                }
                r1 = num / den;
            }
            let mut num = Float::new(wp);
            let mut den = Float::new(wp);
            for row in &rows {
                let m = Complex::with_val(wp, &row.y - Complex::with_val(wp, &row.v * &r1));
                let rhs = Complex::with_val(wp, &row.x - Complex::with_val(wp, &row.u * &r1));
                num -= re_dot(&m, &rhs);
                den += Float::with_val(wp, m.norm_ref());
            }
            eps = num / den;
        }
        let mut max_residual = 0f64;
        for s in samples {
            let s = Complex::with_val(wp, s);
            let choices = self.feasible_choices(&s);
            let best = *choices.iter().min_by(|x, y| x.log_max.total_cmp(&y.log_max)).expect("candidate");
            let alt = choices
                .iter()
                .filter(|c| c.log_max <= best.log_max + 10.0 && c.a != best.a)
                .max_by(|x, y| (x.a / best.a).ln().abs().total_cmp(&(y.a / best.a).ln().abs()))
                .copied()
                .unwrap_or(Choice { a: best.a * 1.5, log_max: best.log_max, stride: 1 });
            let e1 = self.evaluate_with(&s, best, eps.to_f64(), &r1, false);
            let e2 = self.evaluate_with(&s, alt, eps.to_f64(), &r1, false);
            let diff = mp::abs_f64(&Complex::with_val(wp, &e1.value - &e2.value));
            let rel = diff / mp::abs_f64(&e1.value);
            max_residual = max_residual.max(if rel.is_finite() { rel } else { f64::INFINITY });
        }
        let epsilon_fit = eps.to_f64();
        let validated =
            (epsilon_fit.abs() - 1.0).abs() <= VALIDATION_EPSILON && max_residual <= VALIDATION_RESIDUAL;
        Ok(FeReport { epsilon_fit, residue_fit: r1.to_f64(), max_residual, samples: samples.len(), validated })
    }

    /// Runs the functional-equation fit and gates zero counting on it.
    pub fn validate(&mut self, samples: &[Complex]) -> Result<&FeReport> {
        let report = self.fe_residual(samples)?;
        if report.validated {
            self.epsilon = report.epsilon_fit.signum();
            self.residue = self.refit_residue(samples, self.epsilon)?;
            self.status = Validation::Validated;
        } else {
            self.status = Validation::Unvalidated(format!(
                "epsilon {:.3e}, residual {:.3e}",
                report.epsilon_fit, report.max_residual
            ));
        }
        self.fe = Some(report);
        Ok(self.fe.as_ref().expect("just set"))
    }

    pub fn validate_default(&mut self) -> Result<&FeReport> {
        let samples = self.default_samples();
        self.validate(&samples)
    }

    /// Residue refit at full precision with ε fixed to ±1.
    fn refit_residue(&self, samples: &[Complex], eps: f64) -> Result<Float> {
        let wp = self.wp;
        if !self.pole {
            return Ok(Float::new(wp));
        }
        let mut num = Float::new(wp);
        let mut den = Float::new(wp);
        for s in samples {
            let s = Complex::with_val(wp, s);
            let choices = self.feasible_choices(&s);
            let best = *choices.iter().min_by(|x, y| x.log_max.total_cmp(&y.log_max)).expect("candidate");
            let alt = choices
                .iter()
                .filter(|c| c.log_max <= best.log_max + 10.0 && c.a != best.a)
                .max_by(|x, y| (x.a / best.a).ln().abs().total_cmp(&(y.a / best.a).ln().abs()))
                .copied()
                .unwrap_or(Choice { a: best.a * 1.5, log_max: best.log_max, stride: 1 });
            let zero = Float::new(wp);
            let e1 = self.evaluate_with(&s, best, eps, &zero, false).value;
            let e2 = self.evaluate_with(&s, alt, eps, &zero, false).value;
            let (k1a, k0a) = self.pole_kernels(&s, best.a);
            let (k1b, k0b) = self.pole_kernels(&s, alt.a);
            let ma = Complex::with_val(wp, &k1a + Complex::with_val(wp, &k0a * eps));
            let mb = Complex::with_val(wp, &k1b + Complex::with_val(wp, &k0b * eps));
            let m = Complex::with_val(wp, &ma - &mb);
            let rhs = Complex::with_val(wp, Complex::with_val(wp, &e1) - &e2);
            let scale = Float::with_val(wp, e1.abs_ref());
            let m = m / &scale;
            let rhs = rhs / &scale;
            let p = Complex::with_val(wp, m.conj_ref()) * &rhs;
            num += Float::with_val(wp, p.real());
            den += Float::with_val(wp, m.norm_ref());
        }
        Ok(num / den)
    }

    /// Residue of Λ at s = 1 used in evaluation.
    pub fn residue(&self) -> f64 {
        self.residue.to_f64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zeta() -> LFunctionInstance {
        let src = Arc::new(TensorCoeffSource::zeta(128));
        let mut inst = build_instance(src, &InstanceConfig::default()).unwrap();
        inst.validate_default().unwrap();
        inst
    }

    #[test]
    fn zeta_validates() {
        let z = zeta();
        let fe = z.fe_report().unwrap();
        assert!(fe.validated, "{fe:?}");
        assert!((fe.epsilon_fit - 1.0).abs() < 1e-8);
        assert!((z.residue() - 1.0).abs() < 1e-8, "{}", z.residue());
    }

    #[test]
    fn zeta_two() {
        let z = zeta();
        let s = Complex::with_val(128, (2, 0));
        let l = z.l_value(&s).unwrap();
        let want = PI * PI / 6.0;
        assert!((l.real().to_f64() - want).abs() < 1e-10, "{l}");
        let e = z.complete_eval(&s).unwrap();
        assert!(e.value.imag().to_f64().abs() < 1e-20);
        // Λ(2) = π^{−1}Γ(1)ζ(2) = π/6
        assert!((e.value.real().to_f64() - PI / 6.0).abs() < 1e-12);
    }

    #[test]
    fn zeta_first_zero() {
        let z = zeta();
        let s = Complex::with_val(128, (0.5, 14.134725141734693));
        let e = z.complete_eval(&s).unwrap();
        let g = z.gamma_factor(&s);
        let l = mp::abs_f64(&e.value) / mp::abs_f64(&g);
        assert!(l < 1e-9, "{l}");
    }

    #[test]
    fn wrong_gamma_is_rejected() {
        let src = Arc::new(TensorCoeffSource::zeta(128));
        let cfg = InstanceConfig { convention: GammaConvention::Shifts(vec![1.0]), ..Default::default() };
        let mut inst = build_instance(src, &cfg).unwrap();
        let fe = inst.validate_default().unwrap().clone();
        assert!(!fe.validated, "{fe:?}");
        assert!(matches!(inst.complete_eval(&Complex::with_val(64, (2, 0))), Err(Error::Unvalidated(_))));
    }

    #[test]
    fn shift_counts() {
        assert_eq!(GammaConvention::Standard.shifts(SourceKind::Sym2, Some(12)).unwrap().len(), 3);
        assert_eq!(GammaConvention::Standard.shifts(SourceKind::Rankin, Some(24)).unwrap().len(), 4);
        assert!(matches!(
            GammaConvention::Standard.shifts(SourceKind::Sym2Tensor, Some(24)),
            Err(Error::Unsupported(_))
        ));
        assert!(GammaConvention::Shifts(vec![0.0, 1.0]).shifts(SourceKind::Sym2, Some(12)).is_err());
    }
}
