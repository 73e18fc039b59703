//! Large-sieve experiment over the family 𝓕_k of ordered pairs (f, g) of
//! distinct eigenforms of weight k.

use super::table_f64;
use crate::eigenforms::Eigenform;
use crate::error::{Error, Result};
use crate::lseries::TensorCoeffSource;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::sync::Arc;

/// ε in the shape k^{9/2+ε} L^{1/2+ε}.
pub const SIEVE_EPSILON: f64 = 0.01;

/// Smoothed pair sums run to min(bound, SMOOTH_WIDTH·L).
const SMOOTH_WIDTH: f64 = 40.0;

#[derive(Debug, Clone, Serialize)]
pub enum VectorFamily {
    /// One trial per index j with a_ℓ = δ_{ℓ=j}.
    Basis(Vec<u64>),
    /// Independent ±1 entries from ChaCha8 seeded with `seed`.
    RandomSigns { seed: u64, trials: usize },
}

/// Σ_ℓ λ_P(ℓ) λ_Q(ℓ) e^{−ℓ/L} for two ordered pairs of eigenforms.
#[derive(Debug, Clone, Serialize)]
pub struct PairSum {
    pub p: (usize, usize),
    pub q: (usize, usize),
    /// P = Q or P is Q reversed.
    pub diagonal: bool,
    /// Both P and Q consist of distinct forms.
    pub in_family: bool,
    pub sum: f64,
    /// sum / L.
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SieveExperimentReport {
    pub k: u32,
    pub l: f64,
    pub family_size: usize,
    pub epsilon: f64,
    pub vectors: VectorFamily,
    pub lhs: Vec<f64>,
    /// Σ|a_ℓ|² per trial.
    pub norms: Vec<f64>,
    /// (L(log k)^15 + k^{9/2+ε} L^{1/2+ε}) Σ|a_ℓ|² per trial.
    pub rhs_shape: Vec<f64>,
    /// lhs / rhs_shape per trial.
    pub ratios: Vec<f64>,
    pub ratio_min: f64,
    pub ratio_max: f64,
    /// ratio_max / ratio_min.
    pub ratio_spread: f64,
    /// Smoothed sums over all ordered pairs of H_k, including f = g.
    pub pair_sums: Vec<PairSum>,
    pub smoothing_cutoff: u64,
    /// e^{−cutoff/L}, the weight at the truncation point.
    pub truncation_weight: f64,
    /// Mean ratio over diagonal entries inside 𝓕_k.
    pub diagonal_ratio: f64,
    /// Largest |ratio| over non-diagonal entries with at least one pair in 𝓕_k.
    pub off_diagonal_ratio: f64,
}

/// The bracket L(log k)^15 + k^{9/2+ε} L^{1/2+ε}.
pub fn rhs_shape(k: u32, l: f64, eps: f64) -> f64 {
    let k = k as f64;
    l * k.ln().powi(15) + k.powf(4.5 + eps) * l.powf(0.5 + eps)
}

/// LHS and RHS shape per trial, together with the smoothed pair-sum matrix.
pub fn large_sieve_experiment(forms: &[Arc<Eigenform>], l: f64, vectors: &VectorFamily) -> Result<SieveExperimentReport> {
    if forms.len() < 2 {
        return Err(Error::InvalidArgument(format!("the pair family is empty: {} eigenform(s)", forms.len())));
    }
    let k = forms[0].weight;
    if forms.iter().any(|f| f.weight != k) {
        return Err(Error::InvalidArgument("forms of mixed weight".into()));
    }
    if !(l >= 1.0) || !l.is_finite() {
        return Err(Error::InvalidArgument(format!("L = {l} must be at least 1")));
    }
    let bound = forms.iter().map(|f| f.bound).min().unwrap() as u64;
    let l_int = l.floor() as u64;
    if l_int > bound {
        return Err(Error::Range { requested: l_int, bound });
    }
    let cutoff = ((SMOOTH_WIDTH * l).ceil() as u64).min(bound).max(l_int);
    let n = forms.len();
    // Tables for unordered pairs i ≤ j; λ_{f⊗g} is symmetric.
    let index: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let tables: Vec<Vec<f64>> = index
        .par_iter()
        .map(|&(i, j)| table_f64(&TensorCoeffSource::rankin(forms[i].clone(), forms[j].clone()), cutoff))
        .collect::<Result<_>>()?;
    let table = |i: usize, j: usize| -> &Vec<f64> {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        &tables[index.iter().position(|&p| p == (a, b)).unwrap()]
    };
    let family: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).collect();

    let trials: Vec<Vec<f64>> = match vectors {
        VectorFamily::Basis(js) => {
            if let Some(&j) = js.iter().find(|&&j| j == 0 || j > l_int) {
                return Err(Error::InvalidArgument(format!("basis index {j} outside 1..={l_int}")));
            }
            js.iter()
                .map(|&j| {
                    let mut a = vec![0.0; l_int as usize + 1];
                    a[j as usize] = 1.0;
                    a
                })
                .collect()
        }
        VectorFamily::RandomSigns { seed, trials } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..*trials)
                .map(|_| {
                    let mut a = vec![0.0; l_int as usize + 1];
                    for v in a.iter_mut().skip(1) {
                        *v = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                    }
                    a
                })
                .collect()
        }
    };
    let shape = rhs_shape(k, l, SIEVE_EPSILON);
    let lhs: Vec<f64> = trials
        .par_iter()
        .map(|a| {
            family
                .iter()
                .map(|&(i, j)| {
                    let t = table(i, j);
                    let s: f64 = (1..=l_int as usize).map(|m| a[m] * t[m]).sum();
                    s * s
                })
                .sum()
        })
        .collect();
    let norms: Vec<f64> = trials.iter().map(|a| a.iter().map(|v| v * v).sum()).collect();
    let rhs: Vec<f64> = norms.iter().map(|nm| shape * nm).collect();
    let ratios: Vec<f64> = lhs.iter().zip(&rhs).map(|(a, b)| a / b).collect();
    let ratio_min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let ratio_max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let all: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let weights: Vec<f64> = (0..=cutoff).map(|m| (-(m as f64) / l).exp()).collect();
    let pairs: Vec<((usize, usize), (usize, usize))> =
        all.iter().flat_map(|&p| all.iter().map(move |&q| (p, q))).collect();
    let pair_sums: Vec<PairSum> = pairs
        .par_iter()
        .map(|&(p, q)| {
            let (tp, tq) = (table(p.0, p.1), table(q.0, q.1));
            let sum: f64 = (1..=cutoff as usize).map(|m| tp[m] * tq[m] * weights[m]).sum();
            PairSum {
                p,
                q,
                diagonal: p == q || (p.0 == q.1 && p.1 == q.0),
                in_family: p.0 != p.1 && q.0 != q.1,
                sum,
                ratio: sum / l,
            }
        })
        .collect();
    let diag: Vec<f64> = pair_sums.iter().filter(|s| s.diagonal && s.in_family).map(|s| s.ratio).collect();
    let diagonal_ratio = diag.iter().sum::<f64>() / diag.len() as f64;
    let off_diagonal_ratio = pair_sums
        .iter()
        .filter(|s| !s.diagonal && (s.p.0 != s.p.1 || s.q.0 != s.q.1))
        .map(|s| s.ratio.abs())
        .fold(0.0, f64::max);

    Ok(SieveExperimentReport {
        k,
        l,
        family_size: family.len(),
        epsilon: SIEVE_EPSILON,
        vectors: vectors.clone(),
        lhs,
        norms,
        rhs_shape: rhs,
        ratio_spread: ratio_max / ratio_min,
        ratios,
        ratio_min,
        ratio_max,
        pair_sums,
        smoothing_cutoff: cutoff,
        truncation_weight: (-(cutoff as f64) / l).exp(),
        diagonal_ratio,
        off_diagonal_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigenforms::eigenforms;

    fn h24(n: usize) -> Vec<Arc<Eigenform>> {
        eigenforms(24, n, 128).unwrap().into_iter().map(Arc::new).collect()
    }

    #[test]
    fn unit_vector_counts_the_family() {
        let forms = h24(2000);
        let r = large_sieve_experiment(&forms, 50.0, &VectorFamily::Basis(vec![1, 2])).unwrap();
        assert_eq!(r.family_size, 2);
        assert!((r.lhs[0] - 2.0).abs() < 1e-12);
        let l2 = TensorCoeffSource::rankin(forms[0].clone(), forms[1].clone()).coeff(2).unwrap().to_f64();
        assert!((r.lhs[1] - 2.0 * l2 * l2).abs() < 1e-12);
        assert_eq!(r.pair_sums.len(), 16);
        assert!(r.lhs.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn seeded_trials_are_reproducible() {
        let forms = h24(2000);
        let v = VectorFamily::RandomSigns { seed: 7, trials: 4 };
        let a = large_sieve_experiment(&forms, 100.0, &v).unwrap();
        let b = large_sieve_experiment(&forms, 100.0, &v).unwrap();
        assert_eq!(a.lhs, b.lhs);
        assert!(a.norms.iter().all(|n| *n == 100.0));
        assert!(a.ratios.iter().zip(&a.lhs).all(|(r, l)| (r * a.rhs_shape[0] - l).abs() <= 1e-9 * l.max(1.0)));
    }

    #[test]
    fn rejects_small_families() {
        let forms: Vec<_> = eigenforms(12, 100, 128).unwrap().into_iter().map(Arc::new).collect();
        assert!(large_sieve_experiment(&forms, 10.0, &VectorFamily::Basis(vec![1])).is_err());
        let forms = h24(100);
        assert!(large_sieve_experiment(&forms, 10.0, &VectorFamily::Basis(vec![11])).is_err());
    }
}
