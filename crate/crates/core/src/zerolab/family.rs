//! Family-level zero statistics: density counts over 𝓕_k, exceptional sets,
//! and a convexity-bound probe.

use super::count::{count_zeros_box, CountOptions, ZeroCountReport};
use super::instance::{build_instance, FeReport, InstanceConfig, LFunctionInstance, LineParameters};
use crate::eigenforms::{eigenforms, Eigenform};
use crate::error::{Error, Result};
use crate::lseries::TensorCoeffSource;
use crate::mp;
use rayon::prelude::*;
use rug::Complex;
use serde::Serialize;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FamilyMode {
    /// L(s, f⊗g) over ordered pairs of distinct forms.
    Rankin,
    /// L(s, Sym²f) over the forms.
    Sym2,
}

#[derive(Debug, Clone)]
pub struct FamilyOptions {
    pub coeff_bound: usize,
    pub precision: u32,
    pub instance: InstanceConfig,
    pub count: CountOptions,
    /// Overrides the default box height 2(log k)².
    pub box_height: Option<f64>,
}

impl Default for FamilyOptions {
    fn default() -> Self {
        FamilyOptions {
            coeff_bound: 4000,
            precision: 128,
            instance: InstanceConfig::default(),
            count: CountOptions::default(),
            box_height: None,
        }
    }
}

/// One member of the family. In Rankin mode (f, g) and (g, f) share an L-function.
#[derive(Debug, Clone, Serialize)]
pub struct MemberCount {
    pub f: usize,
    pub g: Option<usize>,
    pub label: String,
    /// N(α, T).
    pub count: u64,
    /// Boxes containing at least one zero.
    pub occupied_boxes: usize,
    pub contour_residual: f64,
    pub accepted: bool,
    pub validation: Option<FeReport>,
    pub line: LineParameters,
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilyDensityReport {
    pub k: u32,
    pub alpha: f64,
    pub t: f64,
    pub mode: FamilyMode,
    pub box_height: f64,
    pub box_overridden: bool,
    pub members: Vec<MemberCount>,
    /// Σ over the family of N(α, T).
    pub aggregate: u64,
    pub aggregate_boxes: usize,
    /// T²(log T)k^{34(1−α)/(3−2α)}(log k)^{25}.
    pub rankin_shape: f64,
    /// T²(log T)k^{22(1−α)/(3−2α)}(log k)^{17}.
    pub sym2_shape: f64,
    pub rankin_ratio: f64,
    pub sym2_ratio: f64,
    /// Set when any member count was rejected; the aggregate is then unreliable.
    pub poisoned: bool,
}

pub fn default_box_height(k: u32) -> f64 {
    2.0 * (k as f64).ln().powi(2)
}

pub fn rankin_shape(k: u32, alpha: f64, t: f64) -> f64 {
    let k = k as f64;
    t * t * t.ln() * k.powf(34.0 * (1.0 - alpha) / (3.0 - 2.0 * alpha)) * k.ln().powi(25)
}

pub fn sym2_shape(k: u32, alpha: f64, t: f64) -> f64 {
    let k = k as f64;
    t * t * t.ln() * k.powf(22.0 * (1.0 - alpha) / (3.0 - 2.0 * alpha)) * k.ln().powi(17)
}

/// k^{36η}(log k)^{26}.
pub fn pair_exception_shape(k: u32, eta: f64) -> f64 {
    let k = k as f64;
    k.powf(36.0 * eta) * k.ln().powi(26)
}

/// k^{36η}(log k)^{18}.
pub fn form_exception_shape(k: u32, eta: f64) -> f64 {
    let k = k as f64;
    k.powf(36.0 * eta) * k.ln().powi(18)
}

fn sources(forms: &[Arc<Eigenform>], mode: FamilyMode) -> Vec<(usize, Option<usize>, TensorCoeffSource)> {
    match mode {
        FamilyMode::Sym2 => forms.iter().enumerate().map(|(i, f)| (i, None, TensorCoeffSource::sym2(f.clone()))).collect(),
        FamilyMode::Rankin => {
            let mut v = Vec::new();
            for i in 0..forms.len() {
                for j in i + 1..forms.len() {
                    v.push((i, Some(j), TensorCoeffSource::rankin(forms[i].clone(), forms[j].clone())));
                }
            }
            v
        }
    }
}

fn validated_instance(src: TensorCoeffSource, cfg: &InstanceConfig) -> Result<LFunctionInstance> {
    let mut inst = build_instance(Arc::new(src), cfg)?;
    inst.validate_default()?;
    Ok(inst)
}

struct Counted {
    f: usize,
    g: Option<usize>,
    label: String,
    report: Option<ZeroCountReport>,
    validation: Option<FeReport>,
    line: LineParameters,
}

fn count_family(forms: &[Arc<Eigenform>], mode: FamilyMode, alpha: f64, t: f64, opts: &FamilyOptions, box_height: Option<f64>) -> Result<Vec<Counted>> {
    let count_opts = CountOptions { box_height, ..opts.count };
    sources(forms, mode)
        .into_par_iter()
        .map(|(f, g, src)| {
            let inst = validated_instance(src, &opts.instance)?;
            let report = if inst.is_validated() { Some(count_zeros_box(&inst, alpha, t, &count_opts)?) } else { None };
            Ok(Counted {
                f,
                g,
                label: inst.label().to_string(),
                report,
                validation: inst.fe_report().cloned(),
                line: inst.line_parameters(),
            })
        })
        .collect()
}

fn family_forms(k: u32, mode: FamilyMode, opts: &FamilyOptions) -> Result<Vec<Arc<Eigenform>>> {
    let min_k = if mode == FamilyMode::Rankin { 24 } else { 12 };
    if k < min_k {
        return Err(Error::InvalidArgument(format!("{mode:?} family needs k ≥ {min_k}")));
    }
    Ok(eigenforms(k, opts.coeff_bound, opts.precision)?.into_iter().map(Arc::new).collect())
}

/// Σ N(α, T) over the family of weight k.
pub fn family_density(k: u32, alpha: f64, t: f64, mode: FamilyMode, opts: &FamilyOptions) -> Result<FamilyDensityReport> {
    let forms = family_forms(k, mode, opts)?;
    family_density_for(&forms, alpha, t, mode, opts)
}

pub fn family_density_for(forms: &[Arc<Eigenform>], alpha: f64, t: f64, mode: FamilyMode, opts: &FamilyOptions) -> Result<FamilyDensityReport> {
    let k = forms.first().map(|f| f.weight).ok_or_else(|| Error::InvalidArgument("empty family".into()))?;
    if !(0.5..=1.0).contains(&alpha) {
        return Err(Error::Domain(format!("alpha {alpha} outside [1/2, 1]")));
    }
    let box_height = opts.box_height.unwrap_or_else(|| default_box_height(k));
    let counted = count_family(forms, mode, alpha, t, opts, Some(box_height))?;
    let mut members = Vec::new();
    let mut poisoned = false;
    for c in counted {
        let accepted = c.report.as_ref().is_some_and(|r| r.accepted());
        poisoned |= !accepted;
        let member = |f: usize, g: Option<usize>| MemberCount {
            f,
            g,
            label: c.label.clone(),
            count: c.report.as_ref().map_or(0, |r| r.count),
            occupied_boxes: c.report.as_ref().map_or(0, |r| r.occupied_boxes),
            contour_residual: c.report.as_ref().map_or(f64::NAN, |r| r.contour_residual),
            accepted,
            validation: c.validation.clone(),
            line: c.line.clone(),
        };
        members.push(member(c.f, c.g));
        if let Some(g) = c.g {
            members.push(member(g, Some(c.f)));
        }
    }
    members.sort_by_key(|m| (m.f, m.g));
    let aggregate = members.iter().map(|m| m.count).sum();
    let aggregate_boxes = members.iter().map(|m| m.occupied_boxes).sum();
    let rs = rankin_shape(k, alpha, t);
    let ss = sym2_shape(k, alpha, t);
    Ok(FamilyDensityReport {
        k,
        alpha,
        t,
        mode,
        box_height,
        box_overridden: opts.box_height.is_some(),
        members,
        aggregate,
        aggregate_boxes,
        rankin_shape: rs,
        sym2_shape: ss,
        rankin_ratio: aggregate as f64 / rs,
        sym2_ratio: aggregate as f64 / ss,
        poisoned,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EtaReport {
    pub k: u32,
    pub eta: f64,
    pub alpha: f64,
    pub height: f64,
    /// Forms whose Sym² L-function vanishes in the region.
    pub h_minus: Vec<usize>,
    /// Ordered pairs whose Rankin–Selberg L-function vanishes in the region.
    pub d_minus: Vec<(usize, usize)>,
    pub forms: usize,
    pub pairs: usize,
    pub pair_shape: f64,
    pub form_shape: f64,
    pub pair_ratio: f64,
    pub form_ratio: f64,
}

/// Default region height min(100k^η, t_max).
pub fn default_eta_height(k: u32, eta: f64, t_max: f64) -> f64 {
    (100.0 * (k as f64).powf(eta)).min(t_max)
}

/// Exceptional sets for the region Re s ≥ 1 − η, |Im s| ≤ height.
pub fn classify_eta(k: u32, eta: f64, height: Option<f64>, opts: &FamilyOptions) -> Result<EtaReport> {
    if !(eta > 0.0 && eta < 0.5) {
        return Err(Error::Domain(format!("eta {eta} outside (0, 1/2)")));
    }
    let forms = family_forms(k, FamilyMode::Sym2, opts)?;
    classify_eta_for(&forms, eta, height, opts)
}

pub fn classify_eta_for(forms: &[Arc<Eigenform>], eta: f64, height: Option<f64>, opts: &FamilyOptions) -> Result<EtaReport> {
    if !(eta > 0.0 && eta < 0.5) {
        return Err(Error::Domain(format!("eta {eta} outside (0, 1/2)")));
    }
    let k = forms.first().map(|f| f.weight).ok_or_else(|| Error::InvalidArgument("empty family".into()))?;
    let alpha = 1.0 - eta;
    let height = height.unwrap_or_else(|| default_eta_height(k, eta, opts.instance.t_max));
    // zeros come in conjugate pairs, so |Im s| ≤ height reduces to [0, height]
    let mut h_minus = Vec::new();
    let mut d_minus = Vec::new();
    for mode in [FamilyMode::Sym2, FamilyMode::Rankin] {
        for c in count_family(forms, mode, alpha, height, opts, None)? {
            let r = c.report.ok_or_else(|| Error::Unvalidated(c.label.clone()))?;
            if !r.accepted() {
                return Err(Error::Numerical(format!("{}: rejected count ({:?})", c.label, r.status)));
            }
            if r.count > 0 {
                match c.g {
                    None => h_minus.push(c.f),
                    Some(g) => {
                        d_minus.push((c.f, g));
                        d_minus.push((g, c.f));
                    }
                }
            }
        }
    }
    d_minus.sort();
    let n = forms.len();
    let pair_shape = pair_exception_shape(k, eta);
    let form_shape = form_exception_shape(k, eta);
    Ok(EtaReport {
        k,
        eta,
        alpha,
        height,
        pair_ratio: d_minus.len() as f64 / pair_shape,
        form_ratio: h_minus.len() as f64 / form_shape,
        h_minus,
        d_minus,
        forms: n,
        pairs: n * n.saturating_sub(1),
        pair_shape,
        form_shape,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvexityRow {
    pub t: f64,
    pub abs_l: f64,
    pub shape: f64,
    pub ratio: f64,
    pub flagged: bool,
}

/// |L(½ + ε + it)| against (1+|t|)^{1−σ}(k+|t|)^{1−σ+ε}, σ = ½ + ε.
pub fn convexity_probe(inst: &LFunctionInstance, t_grid: &[f64], epsilon: f64) -> Result<Vec<ConvexityRow>> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::Domain(format!("epsilon {epsilon} outside (0, 1/2)")));
    }
    let k = inst.source().weight().unwrap_or(1) as f64;
    let sigma = 0.5 + epsilon;
    t_grid
        .iter()
        .map(|&t| {
            let s = Complex::with_val(inst.precision(), (sigma, t));
            let e = inst.complete_eval(&s)?;
            let l = inst.l_value(&s)?;
            let abs_l = mp::abs_f64(&l);
            let shape = (1.0 + t.abs()).powf(1.0 - sigma) * (k + t.abs()).powf(1.0 - sigma + epsilon);
            Ok(ConvexityRow { t, abs_l, shape, ratio: abs_l / shape, flagged: e.precision_exhausted })
        })
        .collect()
}
