//! Zero counting by the argument principle, and a sign-change scan on the
//! critical line used as an independent check.

use super::instance::{LFunctionInstance, SIGMA_RIGHT};
use crate::error::{Error, Result};
use crate::mp;
use crate::quad::{adaptive_kronrod, QuadOptions};
use num_complex::Complex64;
use rug::Complex;
use serde::Serialize;
use std::f64::consts::PI;

/// Largest accepted distance of the raw winding number from an integer.
pub const CONTOUR_TOLERANCE: f64 = 1e-3;
pub const MAX_RETRIES: usize = 5;
pub const PERTURBATION: f64 = 1e-4;
/// |Λ′/Λ| above this on the contour means a zero is too close to it.
pub const NEAR_ZERO: f64 = 1e3;
pub const DEFAULT_SCAN_STEP: f64 = 0.05;

#[derive(Debug, Clone, Serialize)]
pub struct BoxCount {
    pub t_lo: f64,
    pub t_hi: f64,
    pub count: u64,
    pub contour_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum CountStatus {
    Accepted,
    Rejected(String),
}

/// N(α, T): zeros β + iγ with β ≥ α and 0 ≤ γ ≤ T.
#[derive(Debug, Clone, Serialize)]
pub struct ZeroCountReport {
    pub label: String,
    pub alpha: f64,
    pub t: f64,
    pub count: u64,
    /// Winding number before rounding (whole contour, or worst box).
    pub raw: f64,
    pub contour_residual: f64,
    pub status: CountStatus,
    /// Contour actually used after perturbation.
    pub final_alpha: f64,
    pub final_t: f64,
    pub retries: usize,
    pub real_zeros: u64,
    pub boxes: Vec<BoxCount>,
    /// Boxes containing at least one zero.
    pub occupied_boxes: usize,
    pub evaluations: usize,
    /// Largest evaluation error bound relative to |Λ| met on the contour.
    pub max_relative_error: f64,
}

impl ZeroCountReport {
    pub fn accepted(&self) -> bool {
        self.status == CountStatus::Accepted
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CountOptions {
    /// Split [0, T] into boxes of this height.
    pub box_height: Option<f64>,
    pub quad: QuadOptions,
}

impl Default for CountOptions {
    fn default() -> Self {
        // absolute accuracy on ∮Λ′/Λ; an error of 1e-4 moves the count by 3e-5
        let quad = QuadOptions { rel_tol: 0.0, abs_tol: 1e-4, initial_panels: 2, ..QuadOptions::default() };
        CountOptions { box_height: None, quad }
    }
}

struct PathStats {
    evaluations: usize,
    max_rel: f64,
    max_logderiv: f64,
}

impl PathStats {
    fn new() -> Self {
        PathStats { evaluations: 0, max_rel: 0.0, max_logderiv: 0.0 }
    }
}

fn log_derivative(inst: &LFunctionInstance, s: Complex64, stats: &mut PathStats) -> Result<Complex64> {
    let z = Complex::with_val(inst.precision(), (s.re, s.im));
    let e = inst.complete_eval_with_derivative(&z)?;
    let d = e.derivative.as_ref().expect("derivative requested");
    let q = Complex::with_val(inst.precision(), d / &e.value);
    let (re, im) = mp::to_c64(&q);
    let v = Complex64::new(re, im);
    stats.evaluations += 1;
    stats.max_rel = stats.max_rel.max(e.error_bound / mp::abs_f64(&e.value));
    stats.max_logderiv = stats.max_logderiv.max(v.norm());
    Ok(v)
}

/// ∫ Λ′/Λ ds along the polyline through `points`.
fn path_integral(inst: &LFunctionInstance, points: &[Complex64], opts: &QuadOptions, stats: &mut PathStats) -> Result<(Complex64, bool)> {
    let mut total = Complex64::new(0.0, 0.0);
    let mut converged = true;
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = (b - a).norm();
        if len == 0.0 {
            continue;
        }
        let dir = (b - a) / len;
        let r = adaptive_kronrod(0.0, len, opts, |x| Ok(log_derivative(inst, a + dir * x, stats)? * dir))?;
        converged &= r.converged;
        total += r.value;
    }
    Ok((total, converged))
}

fn real_value(inst: &LFunctionInstance, x: f64) -> Result<f64> {
    let e = inst.complete_eval(&Complex::with_val(inst.precision(), (x, 0)))?;
    Ok(e.value.real().to_f64())
}

/// Poles of Λ strictly to the right of α (at 0 and 1 for polar instances).
fn poles_right_of(inst: &LFunctionInstance, alpha: f64) -> u64 {
    if !inst.has_pole() {
        return 0;
    }
    [0.0, 1.0].iter().filter(|&&p| p > alpha).count() as u64
}

/// Real zeros of Λ on (α, σ_right). The Euler product and the functional
/// equation rule out Re s > 1 and Re s < 0, so only [max(α, 0), 1) is scanned.
fn real_zeros(inst: &LFunctionInstance, alpha: f64) -> Result<u64> {
    if alpha >= 1.0 {
        return Ok(0);
    }
    let lo = alpha.max(0.0);
    let steps = ((1.0 - lo) / 0.02).ceil().max(1.0) as usize;
    let mut changes = 0u64;
    let mut prev: Option<f64> = None;
    for i in 0..steps {
        let v = real_value(inst, lo + (1.0 - lo) * i as f64 / steps as f64)?;
        if !v.is_finite() {
            continue;
        }
        if prev.is_some_and(|p| p.signum() != v.signum()) {
            changes += 1;
        }
        prev = Some(v);
    }
    Ok(changes)
}

struct Winding {
    raw: f64,
    count: u64,
    real: u64,
    residual: f64,
    converged: bool,
}

/// Count with γ ∈ [0, T] using the reflection symmetry of Λ about the real axis.
fn lower_count(inst: &LFunctionInstance, alpha: f64, t: f64, opts: &QuadOptions, stats: &mut PathStats) -> Result<Winding> {
    let path = [
        Complex64::new(SIGMA_RIGHT, 0.0),
        Complex64::new(SIGMA_RIGHT, t),
        Complex64::new(alpha, t),
        Complex64::new(alpha, 0.0),
    ];
    let (j, converged) = path_integral(inst, &path, opts, stats)?;
    let full = j.im / PI + poles_right_of(inst, alpha) as f64;
    let real = real_zeros(inst, alpha)?;
    let raw = (full + real as f64) / 2.0;
    let rounded = raw.round();
    Ok(Winding { raw, count: rounded.max(0.0) as u64, real, residual: (raw - rounded).abs(), converged })
}

/// Count inside [α, σ_right] × [t_lo, t_hi] with t_lo > 0.
fn box_count(inst: &LFunctionInstance, alpha: f64, t_lo: f64, t_hi: f64, opts: &QuadOptions, stats: &mut PathStats) -> Result<Winding> {
    let path = [
        Complex64::new(alpha, t_lo),
        Complex64::new(SIGMA_RIGHT, t_lo),
        Complex64::new(SIGMA_RIGHT, t_hi),
        Complex64::new(alpha, t_hi),
        Complex64::new(alpha, t_lo),
    ];
    let (j, converged) = path_integral(inst, &path, opts, stats)?;
    let raw = j.im / (2.0 * PI);
    let rounded = raw.round();
    Ok(Winding { raw, count: rounded.max(0.0) as u64, real: 0, residual: (raw - rounded).abs(), converged })
}

fn offset(attempt: usize) -> f64 {
    if attempt == 0 {
        return 0.0;
    }
    let m = attempt.div_ceil(2) as f64;
    if attempt % 2 == 1 {
        m * PERTURBATION
    } else {
        -m * PERTURBATION
    }
}

fn check_args(inst: &LFunctionInstance, alpha: f64, t: f64) -> Result<()> {
    if !(alpha > 1.0 - SIGMA_RIGHT && alpha < SIGMA_RIGHT) {
        return Err(Error::Domain(format!("alpha {alpha} outside ({}, {SIGMA_RIGHT})", 1.0 - SIGMA_RIGHT)));
    }
    if !(t >= 0.0) || t > inst.t_max() {
        return Err(Error::InvalidArgument(format!("height {t} outside [0, {}]", inst.t_max())));
    }
    if !inst.is_validated() {
        return Err(Error::Unvalidated(format!("{} cannot be used for zero counting", inst.label())));
    }
    Ok(())
}

/// N(α, T) by the argument principle on [α, σ_right] × [0, T].
pub fn count_zeros_box(inst: &LFunctionInstance, alpha: f64, t: f64, opts: &CountOptions) -> Result<ZeroCountReport> {
    check_args(inst, alpha, t)?;
    let mut report = ZeroCountReport {
        label: inst.label().to_string(),
        alpha,
        t,
        count: 0,
        raw: 0.0,
        contour_residual: 0.0,
        status: CountStatus::Accepted,
        final_alpha: alpha,
        final_t: t,
        retries: 0,
        real_zeros: 0,
        boxes: Vec::new(),
        occupied_boxes: 0,
        evaluations: 0,
        max_relative_error: 0.0,
    };
    if t == 0.0 {
        return Ok(report);
    }
    let edges = match opts.box_height {
        Some(h) if h > 0.0 => {
            let n = (t / h).ceil().max(1.0) as usize;
            (0..=n).map(|i| (i as f64 * h).min(t)).collect::<Vec<_>>()
        }
        Some(_) => return Err(Error::InvalidArgument("box height must be positive".into())),
        None => vec![0.0, t],
    };
    let mut failure = String::new();
    for attempt in 0..=MAX_RETRIES {
        let dx = offset(attempt);
        let a = alpha + dx;
        let t_top = (t + dx).min(inst.t_max());
        let mut stats = PathStats::new();
        let mut boxes = Vec::new();
        let mut worst = 0f64;
        let mut worst_raw = 0f64;
        let mut converged = true;
        let mut real = 0;
        let n_boxes = edges.len() - 1;
        for i in 0..n_boxes {
            let lo = if i == 0 { 0.0 } else { edges[i] + dx };
            let hi = if i + 1 == n_boxes { t_top } else { edges[i + 1] + dx };
            let w = if i == 0 {
                lower_count(inst, a, hi, &opts.quad, &mut stats)?
            } else {
                box_count(inst, a, lo, hi, &opts.quad, &mut stats)?
            };
            if i == 0 {
                real = w.real;
            }
            converged &= w.converged;
            if w.residual >= worst {
                worst = w.residual;
                worst_raw = w.raw;
            }
            boxes.push(BoxCount { t_lo: lo, t_hi: hi, count: w.count, contour_residual: w.residual });
        }
        report.evaluations += stats.evaluations;
        report.max_relative_error = report.max_relative_error.max(stats.max_rel);
        let near = stats.max_logderiv > NEAR_ZERO;
        if worst <= CONTOUR_TOLERANCE && !near && converged {
            report.count = boxes.iter().map(|b| b.count).sum();
            report.occupied_boxes = boxes.iter().filter(|b| b.count > 0).count();
            report.raw = if n_boxes == 1 { worst_raw } else { worst_raw.fract() + report.count as f64 };
            report.contour_residual = worst;
            report.real_zeros = real;
            report.boxes = if opts.box_height.is_some() { boxes } else { Vec::new() };
            report.final_alpha = a;
            report.final_t = t_top;
            report.retries = attempt;
            return Ok(report);
        }
        failure = if near {
            format!("zero within {:.1e} of the contour", 1.0 / stats.max_logderiv)
        } else if !converged {
            "quadrature did not converge".to_string()
        } else {
            format!("contour residual {worst:.3e}")
        };
        report.contour_residual = worst;
        report.raw = worst_raw;
        report.final_alpha = a;
        report.final_t = t_top;
        report.retries = attempt;
    }
    report.status = CountStatus::Rejected(failure);
    Ok(report)
}

/// Λ(½ + it) rotated to be real: Λ itself when ε = 1, −iΛ when ε = −1.
pub fn critical_value(inst: &LFunctionInstance, t: f64) -> Result<f64> {
    let eps = inst.root_number().ok_or_else(|| Error::Unvalidated(inst.label().to_string()))?;
    let e = inst.complete_eval(&Complex::with_val(inst.precision(), (0.5, t)))?;
    Ok(if eps > 0.0 { e.value.real().to_f64() } else { e.value.imag().to_f64() })
}

/// Locates a sign change of the rotated critical-line value in [lo, hi] by bisection.
pub fn refine_zero(inst: &LFunctionInstance, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut flo = critical_value(inst, lo)?;
    let fhi = critical_value(inst, hi)?;
    if flo.signum() == fhi.signum() {
        return Err(Error::InvalidArgument(format!("no sign change on [{lo}, {hi}]")));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = critical_value(inst, mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    pub label: String,
    pub t_lo: f64,
    pub t_hi: f64,
    pub step: f64,
    /// Ordinates of the zeros found, refined to 1e-8.
    pub zeros: Vec<f64>,
}

impl ScanReport {
    pub fn count(&self) -> usize {
        self.zeros.len()
    }
}

/// Zeros on ½ + i[t_lo, t_hi] found as sign changes on a grid of the given step.
/// A forced central zero (ε = −1) is reported at t = 0.
pub fn critical_line_scan(inst: &LFunctionInstance, t_lo: f64, t_hi: f64, step: f64) -> Result<ScanReport> {
    if !(step > 0.0) || t_hi < t_lo || t_lo < 0.0 {
        return Err(Error::InvalidArgument("scan needs 0 ≤ t_lo ≤ t_hi and a positive step".into()));
    }
    let eps = inst.root_number().ok_or_else(|| Error::Unvalidated(inst.label().to_string()))?;
    let mut zeros = Vec::new();
    let start = if t_lo == 0.0 {
        if eps < 0.0 {
            zeros.push(0.0);
        }
        1e-6
    } else {
        t_lo
    };
    let n = ((t_hi - start) / step).ceil().max(1.0) as usize;
    let mut prev_t = start;
    let mut prev = critical_value(inst, start)?;
    for i in 1..=n {
        let t = (start + step * i as f64).min(t_hi);
        let v = critical_value(inst, t)?;
        if v.signum() != prev.signum() {
            zeros.push(refine_zero(inst, prev_t, t, 1e-8)?);
        }
        prev = v;
        prev_t = t;
    }
    Ok(ScanReport { label: inst.label().to_string(), t_lo, t_hi, step, zeros })
}
