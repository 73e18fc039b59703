//! Adaptive Gauss–Legendre quadrature for complex-valued integrands.

use crate::error::Result;
use num_complex::Complex64;
use std::sync::OnceLock;

/// Nodes and weights of an n-point Gauss–Legendre rule on [−1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for j in 2..=n {
                    let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let pn = if n == 1 { x } else { p1 };
                let pm = if n == 1 { 1.0 } else { p0 };
                dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
                let dx = pn / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// The shared 16-point rule.
    pub fn standard() -> &'static GaussLegendre {
        static R: OnceLock<GaussLegendre> = OnceLock::new();
        R.get_or_init(|| GaussLegendre::new(16))
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate<F>(&self, a: f64, b: f64, f: &mut F) -> Result<Complex64>
    where
        F: FnMut(f64) -> Result<Complex64>,
    {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += f(mid + half * x)? * *w;
        }
        Ok(acc * half)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
    pub initial_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { rel_tol: 1e-6, abs_tol: 1e-12, max_panels: 100_000, initial_panels: 4 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: Complex64,
    /// Sum over accepted panels of |whole − halves|.
    pub error: f64,
    pub panels: usize,
    pub converged: bool,
}

/// Integrates f over [a, b], halving each panel until the one-panel and
/// two-half-panel estimates agree.
pub fn adaptive<F>(a: f64, b: f64, opts: &QuadOptions, mut f: F) -> Result<QuadResult>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    let rule = GaussLegendre::standard();
    if a == b {
        return Ok(QuadResult { value: Complex64::new(0.0, 0.0), error: 0.0, panels: 0, converged: true });
    }
    let n0 = opts.initial_panels.max(1);
    let width = (b - a) / n0 as f64;
    let mut stack = Vec::with_capacity(64);
    let mut scale = 0.0;
    for i in (0..n0).rev() {
        let lo = a + width * i as f64;
        let hi = if i + 1 == n0 { b } else { lo + width };
        let est = rule.integrate(lo, hi, &mut f)?;
        scale += est.norm();
        stack.push((lo, hi, est));
    }
    let total_len = (b - a).abs();
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    let mut panels = n0;
    let mut converged = true;
    while let Some((lo, hi, est)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = rule.integrate(lo, mid, &mut f)?;
        let right = rule.integrate(mid, hi, &mut f)?;
        let refined = left + right;
        let diff = (refined - est).norm();
        let share = (hi - lo).abs() / total_len;
        let tol = (opts.rel_tol * scale.max(refined.norm())).max(opts.abs_tol) * share;
        if diff <= tol {
            value += refined;
            error += diff;
        } else if panels >= opts.max_panels || (hi - lo).abs() < 1e-12 * total_len {
            value += refined;
            error += diff;
            converged = false;
        } else {
            panels += 1;
            stack.push((mid, hi, right));
            stack.push((lo, mid, left));
        }
    }
    Ok(QuadResult { value, error, panels, converged })
}

const KRONROD_NODES: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
/// 7-point Gauss weights at the odd-indexed Kronrod nodes.
const GAUSS7_WEIGHTS: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One Gauss–Kronrod 7/15 panel: (Kronrod estimate, |Kronrod − Gauss|).
fn kronrod_panel<F>(a: f64, b: f64, f: &mut F) -> Result<(Complex64, f64)>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let centre = f(mid)?;
    let mut k = centre * KRONROD_WEIGHTS[7];
    let mut g = centre * GAUSS7_WEIGHTS[3];
    for i in 0..7 {
        let x = half * KRONROD_NODES[i];
        let pair = f(mid - x)? + f(mid + x)?;
        k += pair * KRONROD_WEIGHTS[i];
        if i % 2 == 1 {
            g += pair * GAUSS7_WEIGHTS[i / 2];
        }
    }
    Ok((k * half, ((k - g) * half).norm()))
}

/// Adaptive Gauss–Kronrod 7/15 integration; a panel is accepted when the
/// embedded Gauss estimate agrees to its share of the tolerance.
pub fn adaptive_kronrod<F>(a: f64, b: f64, opts: &QuadOptions, mut f: F) -> Result<QuadResult>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    if a == b {
        return Ok(QuadResult { value: Complex64::new(0.0, 0.0), error: 0.0, panels: 0, converged: true });
    }
    let n0 = opts.initial_panels.max(1);
    let width = (b - a) / n0 as f64;
    let mut stack = Vec::with_capacity(64);
    let mut scale = 0.0;
    for i in (0..n0).rev() {
        let lo = a + width * i as f64;
        let hi = if i + 1 == n0 { b } else { lo + width };
        let (est, err) = kronrod_panel(lo, hi, &mut f)?;
        scale += est.norm();
        stack.push((lo, hi, est, err));
    }
    let total_len = (b - a).abs();
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    let mut panels = n0;
    let mut converged = true;
    while let Some((lo, hi, est, err)) = stack.pop() {
        let share = (hi - lo).abs() / total_len;
        let tol = (opts.rel_tol * scale).max(opts.abs_tol) * share;
        if err <= tol {
            value += est;
            error += err;
        } else if panels >= opts.max_panels || (hi - lo).abs() < 1e-12 * total_len {
            value += est;
            error += err;
            converged = false;
        } else {
            let mid = 0.5 * (lo + hi);
            let (l, le) = kronrod_panel(lo, mid, &mut f)?;
            let (r, re) = kronrod_panel(mid, hi, &mut f)?;
            panels += 1;
            stack.push((mid, hi, r, re));
            stack.push((lo, mid, l, le));
        }
    }
    Ok(QuadResult { value, error, panels, converged })
}

/// Real-valued convenience wrapper.
pub fn adaptive_real<F>(a: f64, b: f64, opts: &QuadOptions, mut f: F) -> Result<QuadResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    adaptive(a, b, opts, |x| f(x).map(|v| Complex64::new(v, 0.0)))
}
