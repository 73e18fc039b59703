//! Normalized Hecke eigenforms and their Satake angles.

use super::basis::{operator_matrix, HeckeMatrix, HeckeOperator, ModularRing};
use super::poly::IntPoly;
use super::qseries::QSeries;
use crate::arith::{cusp_dimension, is_prime};
use crate::error::{Error, Result};
use crate::mp;
use rug::{Float, Integer};
use std::cmp::Ordering;

pub const DEFAULT_PRECISION: u32 = 192;

pub fn default_bound(k: u32) -> usize {
    (2 * cusp_dimension(k)).max(10_000)
}

/// A normalized Hecke eigenform f ∈ H_k with λ_f(n) = a_f(n)/n^{(k−1)/2}.
#[derive(Debug, Clone)]
pub struct Eigenform {
    pub weight: u32,
    /// Coefficient bound N: λ_f(n) is stored for n ≤ N.
    pub bound: usize,
    /// Working precision P in bits of the stored λ values.
    pub precision: u32,
    /// λ_f(0..=N), with λ_f(0) = 0.
    pub lambda: Vec<Float>,
    pub charpoly: IntPoly,
    pub operator: HeckeOperator,
    /// Position of this form's eigenvalue among the increasing real roots of `charpoly`.
    pub root_index: usize,
    /// Exact matrix of `operator` on the echelon basis.
    pub operator_matrix: Vec<Vec<Integer>>,
    /// Eigenvalue of `operator` on this form (a root of `charpoly`).
    pub eigenvalue: Float,
    /// Coordinates in the echelon basis, normalized so the first is 1.
    pub combination: Vec<Float>,
    /// Position in H_k after ordering by λ_f(2).
    pub index: usize,
    /// Exact a_f(n) when the space is one-dimensional.
    pub exact: Option<Vec<Integer>>,
}

impl Eigenform {
    pub fn label(&self) -> String {
        format!("{}.{}", self.weight, self.index)
    }

    pub fn lambda(&self, n: u64) -> Result<&Float> {
        if n == 0 || n as usize > self.bound {
            return Err(Error::Range { requested: n, bound: self.bound as u64 });
        }
        Ok(&self.lambda[n as usize])
    }

    pub fn lambda_f64(&self, n: u64) -> f64 {
        self.lambda[n as usize].to_f64()
    }

    /// Same eigenvalue system (same weight and same defining root).
    pub fn same_form(&self, other: &Eigenform) -> bool {
        self.weight == other.weight
            && self.operator == other.operator
            && self.root_index == other.root_index
            && self.charpoly == other.charpoly
    }

    /// 2^{−P/2}, the tolerance attached to identities among stored values.
    pub fn tolerance(&self) -> Float {
        Float::with_val(64, Float::i_exp(1, -(self.precision as i32) / 2))
    }

    pub fn satake_angle(&self, p: u64) -> Result<SatakeAngle> {
        satake_angle(self, p)
    }
}

/// θ_p ∈ [0, π] with 2cos θ_p = λ_f(p).
#[derive(Debug, Clone)]
pub struct SatakeAngle {
    pub p: u64,
    pub theta: Float,
}

pub fn satake_angle(f: &Eigenform, p: u64) -> Result<SatakeAngle> {
    if !is_prime(p) {
        return Err(Error::InvalidArgument(format!("satake_angle: {p} is not prime")));
    }
    let lam = f.lambda(p)?;
    let prec = f.precision;
    let half = Float::with_val(prec, lam / 2u32);
    let excess = Float::with_val(prec, half.abs_ref()) - 1u32;
    if excess > 0 {
        let slack = Float::with_val(prec, Float::i_exp(1, -(prec as i32) / 2 - 1));
        if excess > slack {
            return Err(Error::DeligneViolation { p, value: lam.to_f64() });
        }
    }
    let clamped = half.clamp(&-1i32, &1i32);
    Ok(SatakeAngle { p, theta: clamped.acos() })
}

/// Options for [`eigenforms_with`].
#[derive(Debug, Clone)]
pub struct EigenOptions {
    pub chain: Vec<HeckeOperator>,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions { chain: HeckeOperator::fallback_chain() }
    }
}

/// H_k to coefficient bound N and precision P, ordered by λ_f(2).
pub fn eigenforms(k: u32, n: usize, prec: u32) -> Result<Vec<Eigenform>> {
    eigenforms_with(k, n, prec, &EigenOptions::default())
}

pub fn eigenforms_with(k: u32, n: usize, prec: u32, opts: &EigenOptions) -> Result<Vec<Eigenform>> {
    let mut ring = ModularRing::new(n.max(1))?;
    eigenforms_in_ring(&mut ring, k, prec, opts)
}

/// Eigenforms of weight k using a shared ring; the bound is the ring's precision.
pub fn eigenforms_in_ring(ring: &mut ModularRing, k: u32, prec: u32, opts: &EigenOptions) -> Result<Vec<Eigenform>> {
    if k % 2 == 1 || k < 12 {
        return Err(Error::InvalidArgument(format!("eigenforms: weight {k} must be even and at least 12")));
    }
    if prec < 64 {
        return Err(Error::InvalidArgument(format!("eigenforms: precision {prec} below 64 bits")));
    }
    let n = ring.precision();
    let d = cusp_dimension(k);
    if d == 0 {
        return Ok(Vec::new());
    }
    if n < 2 * d {
        return Err(Error::InsufficientPrecision { required: 2 * d, available: n });
    }
    let basis = ring.miller_basis(k)?;
    let (matrix, poly) = choose_operator(k, &basis, opts)?;
    let roots = poly.isolate_real_roots();
    if roots.len() != d {
        return Err(Error::Numerical(format!("weight {k}: {} real roots for a degree-{d} Hecke polynomial", roots.len())));
    }
    let mut forms = Vec::with_capacity(d);
    for (root_index, (lo, hi)) in roots.iter().enumerate() {
        forms.push(build_form(k, &basis, &matrix, &poly, root_index, lo, hi, prec)?);
    }
    forms.sort_by(|a, b| a.lambda[2].partial_cmp(&b.lambda[2]).unwrap_or(Ordering::Equal));
    for (i, f) in forms.iter_mut().enumerate() {
        f.index = i;
    }
    if d == 1 {
        forms[0].exact = Some(basis[0].coeffs.clone());
    }
    Ok(forms)
}

fn choose_operator(k: u32, basis: &[QSeries], opts: &EigenOptions) -> Result<(HeckeMatrix, IntPoly)> {
    let d = basis.len();
    let mut small: Option<Vec<QSeries>> = None;
    for &op in &opts.chain {
        let need = op.max_prime() as usize * d;
        let m = if basis[0].precision() >= need {
            operator_matrix(k, basis, op)?
        } else {
            if small.as_ref().is_none_or(|b| b[0].precision() < need) {
                small = Some(ModularRing::new(need.max(5 * d))?.miller_basis(k)?);
            }
            operator_matrix(k, small.as_ref().expect("basis"), op)?
        };
        let cp = m.charpoly();
        if cp.is_squarefree() {
            return Ok((m, cp));
        }
    }
    Err(Error::RepeatedRoots(k))
}

#[allow(clippy::too_many_arguments)]
fn build_form(
    k: u32,
    basis: &[QSeries],
    matrix: &HeckeMatrix,
    poly: &IntPoly,
    root_index: usize,
    lo: &rug::Rational,
    hi: &rug::Rational,
    prec: u32,
) -> Result<Eigenform> {
    let n = basis[0].precision();
    // First pass at a moderate precision to measure cancellation in Σ v_j a_{g_j}(n).
    let mut wp = prec + 64;
    let mut root = poly.refine_root(lo, hi, wp);
    let mut v = eigenvector(&matrix.entries, &root, wp)?;
    let loss = cancellation_bits(k, basis, &v);
    if loss + 32.0 > 64.0 {
        wp = prec + loss.ceil() as u32 + 48;
        root = poly.refine_root(lo, hi, wp);
        v = eigenvector(&matrix.entries, &root, wp)?;
    }
    let mut lambda = Vec::with_capacity(n + 1);
    lambda.push(Float::new(prec));
    for m in 1..=n {
        let mut acc = Float::new(wp);
        for (vj, g) in v.iter().zip(basis) {
            let c = &g.coeffs[m];
            if *c != 0 {
                acc += Float::with_val(wp, vj * c);
            }
        }
        acc /= mp::half_power(m as u64, k, wp);
        lambda.push(Float::with_val(prec, &acc));
    }
    lambda[1] = Float::with_val(prec, 1);
    Ok(Eigenform {
        weight: k,
        bound: n,
        precision: prec,
        lambda,
        charpoly: poly.clone(),
        operator: matrix.operator,
        operator_matrix: matrix.entries.clone(),
        root_index,
        eigenvalue: Float::with_val(prec, &root),
        combination: v.iter().map(|x| Float::with_val(prec, x)).collect(),
        index: 0,
        exact: None,
    })
}

/// Bits lost to cancellation: max over n of log₂(max_j |v_j a_{g_j}(n)|) − log₂ n^{(k−1)/2}.
fn cancellation_bits(k: u32, basis: &[QSeries], v: &[Float]) -> f64 {
    let vlog: Vec<f64> = v.iter().map(mp::log2_abs_real).collect();
    let n = basis[0].precision();
    let mut worst = 0.0f64;
    for m in 1..=n {
        let reference = (k as f64 - 1.0) / 2.0 * (m as f64).log2();
        for (g, lv) in basis.iter().zip(&vlog) {
            let c = &g.coeffs[m];
            if *c == 0 || !lv.is_finite() {
                continue;
            }
            let bits = c.significant_bits() as f64 + lv - reference;
            if bits > worst {
                worst = bits;
            }
        }
    }
    worst
}

/// Null vector of (M − λI) with first coordinate 1, by elimination with
/// partial pivoting on the remaining columns.
fn eigenvector(m: &[Vec<Integer>], lambda: &Float, wp: u32) -> Result<Vec<Float>> {
    let d = m.len();
    if d == 1 {
        return Ok(vec![Float::with_val(wp, 1)]);
    }
    // Unknowns v_2..v_d; equations Σ_{j≥2} A_ij v_j = −A_i1.
    let mut rows: Vec<Vec<Float>> = (0..d)
        .map(|i| {
            let mut row: Vec<Float> = (0..d)
                .map(|j| {
                    let mut x = Float::with_val(wp, &m[i][j]);
                    if i == j {
                        x -= lambda;
                    }
                    x
                })
                .collect();
            let rhs = Float::with_val(wp, -&row[0]);
            row.remove(0);
            row.push(rhs);
            row
        })
        .collect();
    let unknowns = d - 1;
    let mut used = vec![false; d];
    let mut pivots = Vec::with_capacity(unknowns);
    for col in 0..unknowns {
        let mut best: Option<(usize, Float)> = None;
        for (r, row) in rows.iter().enumerate() {
            if used[r] {
                continue;
            }
            let a = Float::with_val(wp, row[col].abs_ref());
            if best.as_ref().is_none_or(|(_, b)| a > *b) {
                best = Some((r, a));
            }
        }
        let (pr, pa) = best.ok_or_else(|| Error::Numerical("eigenvector: no pivot".into()))?;
        if pa.is_zero() {
            return Err(Error::Numerical("eigenvector: singular reduced system".into()));
        }
        used[pr] = true;
        pivots.push(pr);
        let prow = rows[pr].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == pr || row[col].is_zero() {
                continue;
            }
            let f = Float::with_val(wp, &row[col] / &prow[col]);
            for c in col..=unknowns {
                let t = Float::with_val(wp, &f * &prow[c]);
                row[c] -= t;
            }
        }
    }
    let mut v = vec![Float::with_val(wp, 1)];
    for (col, &pr) in pivots.iter().enumerate() {
        v.push(Float::with_val(wp, &rows[pr][unknowns] / &rows[pr][col]));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigenforms::qseries::delta;

    fn close(a: &Float, b: &Float, bits: i32) -> bool {
        let d = Float::with_val(a.prec(), a - b).abs();
        d <= Float::with_val(64, Float::i_exp(1, -bits))
    }

    #[test]
    fn delta_normalization() {
        let f = eigenforms(12, 100, 128).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].lambda[1], 1);
        let want = Float::with_val(128, -24) / mp::half_power(2, 12, 128);
        assert!(close(&f[0].lambda[2], &want, 120));
        assert!((f[0].lambda_f64(2) + 0.53033).abs() < 1e-5);
        let tau = delta(100).unwrap();
        assert_eq!(f[0].exact.as_ref().unwrap(), &tau.coeffs);
    }

    #[test]
    fn weight_24_roots_of_charpoly() {
        let forms = eigenforms(24, 100, 128).unwrap();
        assert_eq!(forms.len(), 2);
        assert!(forms[0].lambda[2] < forms[1].lambda[2]);
        // a_f(2) are the roots of x² − 1080x − 20468736
        let disc = Float::with_val(256, 1080i64 * 1080 + 4 * 20468736).sqrt();
        let r_lo = Float::with_val(256, 1080 - disc.clone()) / 2u32;
        let r_hi = Float::with_val(256, 1080 + disc) / 2u32;
        let scale = mp::half_power(2, 24, 256);
        assert!(close(&forms[0].lambda[2], &Float::with_val(128, &r_lo / &scale), 120));
        assert!(close(&forms[1].lambda[2], &Float::with_val(128, &r_hi / &scale), 120));
    }

    #[test]
    fn satake_examples() {
        let f = eigenforms(12, 50, 128).unwrap().remove(0);
        let th = satake_angle(&f, 2).unwrap().theta.to_f64();
        let want = (-24.0 / 2f64.powf(5.5) / 2.0).acos();
        assert!((th - want).abs() < 1e-12 && (th - 1.83916).abs() < 2e-5, "{th}");
        let mut g = f.clone();
        g.lambda[3] = Float::with_val(128, 0);
        assert!((satake_angle(&g, 3).unwrap().theta.to_f64() - std::f64::consts::FRAC_PI_2).abs() < 1e-30);
        g.lambda[3] = Float::with_val(128, 2);
        assert_eq!(satake_angle(&g, 3).unwrap().theta, 0);
        g.lambda[3] = Float::with_val(128, 2.001);
        assert!(matches!(satake_angle(&g, 3), Err(Error::DeligneViolation { .. })));
    }

    #[test]
    fn forced_fallback_agrees() {
        let base = eigenforms(36, 60, 160).unwrap();
        for op in [HeckeOperator::T(3), HeckeOperator::T(5), HeckeOperator::Sum(2, 3)] {
            let alt = eigenforms_with(36, 60, 160, &EigenOptions { chain: vec![op] }).unwrap();
            assert_eq!(alt.len(), base.len());
            for (a, b) in alt.iter().zip(&base) {
                assert_eq!(a.operator, op);
                for n in 1..=60 {
                    assert!(close(&a.lambda[n], &b.lambda[n], 80), "op {op} n {n}");
                }
            }
        }
    }

    #[test]
    fn defining_eigenvalue_matches_coefficient() {
        let forms = eigenforms(48, 40, 128).unwrap();
        for f in &forms {
            let a2 = Float::with_val(128, &f.lambda[2] * mp::half_power(2, 48, 128));
            let rel = Float::with_val(128, &a2 - &f.eigenvalue) / &f.eigenvalue;
            assert!(rel.abs() < 1e-30);
        }
    }

    #[test]
    fn preconditions() {
        assert!(matches!(eigenforms(24, 3, 128), Err(Error::InsufficientPrecision { .. })));
        assert!(eigenforms(24, 100, 32).is_err());
        assert!(eigenforms(14, 10, 128).unwrap().is_empty());
    }
}
