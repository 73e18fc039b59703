//! Values at s = 1 of the symmetric-square L-functions and of their
//! tensor products, from exponentially smoothed Dirichlet sums.
//!
//! S(L) = Σ a_n n^{−1} e^{−n/L} equals L(1) plus a series in 1/L whose
//! coefficients are the values L(1 − m)/m!, so Richardson extrapolation in
//! 1/L over a doubling sweep of L removes the smoothing bias.

use super::table_f64;
use crate::eigenforms::{eigenforms, Eigenform};
use crate::error::{Error, Result};
use crate::lseries::TensorCoeffSource;
use rayon::prelude::*;
use serde::Serialize;
use std::sync::Arc;

/// Stability above this marks a value as not converged.
pub const L1_STABILITY: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum L1Kind {
    Sym2,
    Sym2Tensor,
}

impl L1Kind {
    /// Exponent e of the comparison (log k)^e.
    pub fn log_exponent(self) -> i32 {
        match self {
            L1Kind::Sym2 => 3,
            L1Kind::Sym2Tensor => 9,
        }
    }
}

#[derive(Debug, Clone)]
pub struct L1Options {
    /// Largest Dirichlet cutoff; coefficients are needed up to here.
    pub cutoff: u64,
    /// Number of cutoffs in the doubling sweep ending at `cutoff`.
    pub levels: usize,
    /// Cutoff / smoothing length; e^{−width} is the truncated weight.
    pub width: f64,
    pub precision: u32,
    /// Include the degree-nine products over pairs f ≠ g.
    pub tensor: bool,
}

impl Default for L1Options {
    fn default() -> Self {
        L1Options { cutoff: 100_000, levels: 3, width: 40.0, precision: 128, tensor: true }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct L1Row {
    pub k: u32,
    pub kind: L1Kind,
    pub f: String,
    pub g: Option<String>,
    /// Extrapolated L(1).
    pub value: f64,
    pub cutoffs: Vec<u64>,
    /// Smoothed sums at each cutoff.
    pub raw: Vec<f64>,
    /// Relative difference between the extrapolations ending at the last two cutoffs.
    pub stability: f64,
    pub converged: bool,
    pub positive: bool,
    /// value / (log k)^e.
    pub log_ratio: f64,
}

/// (value, cutoffs, raw sums, stability) for one source.
pub fn l1_value(src: &TensorCoeffSource, opts: &L1Options) -> Result<(f64, Vec<u64>, Vec<f64>, f64)> {
    let levels = opts.levels.max(1);
    if opts.cutoff < (1u64 << (levels - 1)) || !(opts.width > 0.0) {
        return Err(Error::InvalidArgument("cutoff sweep is empty".into()));
    }
    let table = table_f64(src, opts.cutoff)?;
    let cutoffs: Vec<u64> = (0..levels).map(|i| opts.cutoff >> (levels - 1 - i)).collect();
    let raw: Vec<f64> = cutoffs
        .iter()
        .map(|&c| {
            let l = c as f64 / opts.width;
            (1..=c as usize).map(|n| table[n] / n as f64 * (-(n as f64) / l).exp()).sum()
        })
        .collect();
    // Neville table for an error series in powers of 1/L with ratio 2.
    let mut diag = Vec::with_capacity(levels);
    let mut row = raw.clone();
    diag.push(row[0]);
    for j in 1..levels {
        let f = (1u64 << j) as f64 - 1.0;
        row = (1..row.len()).map(|i| row[i] + (row[i] - row[i - 1]) / f).collect();
        diag.push(row[0]);
    }
    let value = *diag.last().unwrap();
    let stability = if levels >= 2 { (value - diag[levels - 2]).abs() / value.abs() } else { f64::INFINITY };
    Ok((value, cutoffs, raw, stability))
}

fn row(k: u32, kind: L1Kind, f: &Eigenform, g: Option<&Eigenform>, src: &TensorCoeffSource, opts: &L1Options) -> Result<L1Row> {
    let (value, cutoffs, raw, stability) = l1_value(src, opts)?;
    Ok(L1Row {
        k,
        kind,
        f: f.label(),
        g: g.map(|g| g.label()),
        value,
        cutoffs,
        raw,
        stability,
        converged: stability <= L1_STABILITY,
        positive: value > 0.0,
        log_ratio: value / (k as f64).ln().powi(kind.log_exponent()),
    })
}

/// Table over the given forms, grouped by weight.
pub fn l1_sweep_forms(families: &[Vec<Arc<Eigenform>>], opts: &L1Options) -> Result<Vec<L1Row>> {
    let mut jobs: Vec<(Arc<Eigenform>, Option<Arc<Eigenform>>)> = Vec::new();
    for fam in families {
        for (i, f) in fam.iter().enumerate() {
            jobs.push((f.clone(), None));
            if opts.tensor {
                for g in &fam[i + 1..] {
                    jobs.push((f.clone(), Some(g.clone())));
                }
            }
        }
    }
    jobs.par_iter()
        .map(|(f, g)| match g {
            None => row(f.weight, L1Kind::Sym2, f, None, &TensorCoeffSource::sym2(f.clone()), opts),
            Some(g) => row(
                f.weight,
                L1Kind::Sym2Tensor,
                f,
                Some(g),
                &TensorCoeffSource::sym2_tensor(f.clone(), g.clone()),
                opts,
            ),
        })
        .collect()
}

/// Computes H_k for each weight at the sweep's cutoff and tabulates L(1).
pub fn l1_sweep(weights: &[u32], opts: &L1Options) -> Result<Vec<L1Row>> {
    let families = weights
        .iter()
        .map(|&k| Ok(eigenforms(k, opts.cutoff as usize, opts.precision)?.into_iter().map(Arc::new).collect()))
        .collect::<Result<Vec<Vec<_>>>>()?;
    l1_sweep_forms(&families, opts)
}

/// Largest value/(log k)^e over rows of one kind.
pub fn sup_log_ratio(rows: &[L1Row], kind: L1Kind) -> Option<f64> {
    rows.iter().filter(|r| r.kind == kind).map(|r| r.log_ratio).reduce(f64::max)
}
