//! Command-line front end. Every subcommand writes its tables under `--out`
//! and appends one line to `manifest.jsonl` there.
//!
//! Exit codes: 0 success, 1 usage or argument error, 2 validation failure
//! (unvalidated L-function instance, rejected zero count, failed numerical
//! check).

use crate::analytic::{self, DistinguishConfig, L1Options, MomentConfig, VectorFamily};
use crate::eigenforms::{miller_basis, EigenCache, Eigenform};
use crate::error::{Error, Result};
use crate::lseries::TensorCoeffSource;
use crate::mollifier::{verify_inverse, SieveConfig};
use crate::report::RunOutput;
use crate::zerolab::{
    build_instance, classify_eta_for, convexity_probe, count_zeros_box, critical_line_scan, family_density_for,
    CountOptions, FamilyMode, FamilyOptions, InstanceConfig, LFunctionInstance,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rug::Complex;
use serde::Serialize;
use serde_json::{Map, Value};
use std::ffi::OsString;
use std::path::PathBuf;
use std::sync::Arc;

/// Default working precision of the command line in bits.
pub const CLI_BITS: u32 = 128;

#[derive(Debug, Parser)]
#[command(name = "rankin-lab", version, about = "Hecke eigenforms, their L-functions and zero statistics")]
pub struct Cli {
    /// Output directory for tables and the manifest.
    #[arg(long, global = true, default_value = "rankin-out")]
    pub out: PathBuf,
    /// Working precision in bits.
    #[arg(long, global = true)]
    pub bits: Option<u32>,
    /// Number of Hecke eigenvalues computed per form.
    #[arg(long = "coeff-bound", global = true)]
    pub coeff_bound: Option<usize>,
    /// Parallel width for family sweeps.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Eigenform cache directory (default: $RANKIN_LAB_CACHE, else <out>/cache).
    #[arg(long, global = true)]
    pub cache: Option<PathBuf>,
    /// Neither read nor write the eigenform cache.
    #[arg(long = "no-cache", global = true)]
    pub no_cache: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Echelon basis of S_k. CSV columns: n, b_1 … b_d (exact integers).
    Basis(BasisArgs),
    /// Eigenforms of weight k. CSV columns: form, n, lambda.
    Eigenforms(EigenArgs),
    /// Dirichlet coefficients of an L-function. CSV columns: n, a_n, source.
    Coeffs(CoeffArgs),
    /// Inverse factorization check for all pairs. CSV columns: f, g, residual,
    /// coefficient_residual, analytic_gap, g_tail_bound, terms.
    MollifierCheck(MollifierArgs),
    /// Log-weighted prime sum against its residue term. CSV columns: x, sum, main, ratio.
    Rn(RnArgs),
    /// Smallest distinguishing prime and the rn curves. CSV columns: x, rn1, rn2, main.
    Distinguish(DistinguishArgs),
    /// Σ_{p≤x} of products of eigenvalues. CSV columns: forms, x, sum, prime_count, ratio_pi, ratio_2pi.
    Primes(PrimesArgs),
    /// Satake-angle histogram. CSV columns: bin, lo, hi, empirical, reference.
    SatoTate(SatoTateArgs),
    /// Values at s = 1. CSV columns: k, kind, f, g, value, stability, converged, positive, log_ratio.
    L1(L1Args),
    /// Large-sieve experiment. CSV columns: trial, lhs, norm, rhs_shape, ratio; pair table: p, q, diagonal,
    /// in_family, sum, ratio.
    Sieve(SieveArgs),
    /// Mollified integrals. CSV columns: t, x, y, i1, i1_error, i2, i2_error, combination.
    Moments(MomentArgs),
    /// Zeros with real part > α and height ≤ T. CSV columns: t_lo, t_hi, count, contour_residual.
    Zeros(ZerosArgs),
    /// Family zero-density sums. CSV columns: label, count, occupied_boxes, contour_residual, accepted.
    Density(DensityArgs),
    /// Exceptional sets for a given η. JSON report.
    Classify(ClassifyArgs),
    /// |L(1/2+ε+it)| against the convexity shape. CSV columns: t, abs_l, shape, ratio, flagged.
    Probe(ProbeArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    Zeta,
    Standard,
    Rankin,
    Sym2,
    Sym2Tensor,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Rankin,
    Sym2,
}

#[derive(Debug, Args, Serialize)]
pub struct BasisArgs {
    #[arg(long)]
    pub k: u32,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct EigenArgs {
    #[arg(long)]
    pub k: u32,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct CoeffArgs {
    #[arg(long, value_enum)]
    pub target: Target,
    #[arg(long, default_value_t = 12)]
    pub k: u32,
    #[arg(long, default_value_t = 0)]
    pub f: usize,
    #[arg(long)]
    pub g: Option<usize>,
    #[arg(long, default_value_t = 100)]
    pub n: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct MollifierArgs {
    #[arg(long)]
    pub k: u32,
    #[arg(long, default_value_t = 20.0)]
    pub z: f64,
    #[arg(long = "s-re", default_value_t = 2.0)]
    pub s_re: f64,
    #[arg(long = "s-im", default_value_t = 0.0)]
    pub s_im: f64,
    #[arg(long = "l-max", default_value_t = 500)]
    pub l_max: u64,
    /// Residual above which the check fails.
    #[arg(long, default_value_t = 1e-25)]
    pub tolerance: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct RnArgs {
    #[arg(long, default_value_t = 12)]
    pub k: u32,
    #[arg(long, default_value_t = 0)]
    pub f: usize,
    #[arg(long)]
    pub g: Option<usize>,
    #[arg(long, default_value_t = 100.0)]
    pub x: f64,
    #[arg(long, default_value_t = 99)]
    pub points: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct DistinguishArgs {
    #[arg(long)]
    pub k: u32,
    #[arg(long, default_value_t = 0)]
    pub f: usize,
    #[arg(long, default_value_t = 1)]
    pub g: usize,
    #[arg(long, default_value_t = 100.0)]
    pub x: f64,
    #[arg(long)]
    pub eta: Option<f64>,
    /// Require η in the restricted window.
    #[arg(long)]
    pub restricted: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct PrimesArgs {
    #[arg(long, default_value_t = 12)]
    pub k: u32,
    /// Indices into H_k, one to four, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0,0")]
    pub forms: Vec<usize>,
    #[arg(long, default_value_t = 100_000)]
    pub x: u64,
    /// Also list primes where the product is at most this in absolute value.
    #[arg(long = "zero-tol")]
    pub zero_tol: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct SatoTateArgs {
    #[arg(long, default_value_t = 12)]
    pub k: u32,
    #[arg(long, default_value_t = 0)]
    pub f: usize,
    #[arg(long, default_value_t = 100_000)]
    pub x: u64,
    #[arg(long, default_value_t = 20)]
    pub bins: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct L1Args {
    #[arg(long = "k-min", default_value_t = 12)]
    pub k_min: u32,
    #[arg(long = "k-max", default_value_t = 60)]
    pub k_max: u32,
    #[arg(long, default_value_t = 100_000)]
    pub cutoff: u64,
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
    /// Skip the degree-nine products.
    #[arg(long = "no-tensor")]
    pub no_tensor: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct SieveArgs {
    #[arg(long, default_value_t = 24)]
    pub k: u32,
    #[arg(long, default_value_t = 2000.0)]
    pub l: f64,
    #[arg(long, default_value_t = 20_240_601)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    /// Use unit vectors at these indices instead of random signs.
    #[arg(long, value_delimiter = ',')]
    pub basis: Option<Vec<u64>>,
}

#[derive(Debug, Args, Serialize)]
pub struct MomentArgs {
    #[arg(long, default_value_t = 24)]
    pub k: u32,
    #[arg(long, default_value_t = 0)]
    pub f: usize,
    #[arg(long, default_value_t = 1)]
    pub g: usize,
    #[arg(long, default_value_t = 0.75)]
    pub alpha: f64,
    #[arg(long, default_value_t = 100.0)]
    pub x: f64,
    #[arg(long)]
    pub y: Option<f64>,
    #[arg(long, default_value_t = 5.0)]
    pub t: f64,
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct ZerosArgs {
    #[arg(long, value_enum)]
    pub target: Target,
    #[arg(long, default_value_t = 12)]
    pub k: u32,
    #[arg(long, default_value_t = 0)]
    pub f: usize,
    #[arg(long)]
    pub g: Option<usize>,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub t: f64,
    #[arg(long = "box-height")]
    pub box_height: Option<f64>,
    /// Also scan the critical line for sign changes.
    #[arg(long)]
    pub scan: bool,
    #[arg(long = "scan-step", default_value_t = 0.05)]
    pub scan_step: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct DensityArgs {
    #[arg(long)]
    pub k: u32,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub t: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Rankin)]
    pub mode: ModeArg,
    #[arg(long = "box-height")]
    pub box_height: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub k: u32,
    #[arg(long)]
    pub eta: f64,
    #[arg(long)]
    pub height: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct ProbeArgs {
    #[arg(long, value_enum)]
    pub target: Target,
    #[arg(long, default_value_t = 12)]
    pub k: u32,
    #[arg(long, default_value_t = 0)]
    pub f: usize,
    #[arg(long)]
    pub g: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    pub epsilon: f64,
    #[arg(long = "t-grid", value_delimiter = ',', default_value = "1,2,4,8,16")]
    pub t_grid: Vec<f64>,
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Unvalidated(_) | Error::Numerical(_) | Error::DeligneViolation { .. } => 2,
        _ => 1,
    }
}

struct Ctx {
    bits: Option<u32>,
    coeff_bound: Option<usize>,
    cache: Option<EigenCache>,
    out: RunOutput,
}

impl Ctx {
    fn bits(&self) -> u32 {
        self.bits.unwrap_or(CLI_BITS)
    }

    fn bound(&self, default: usize) -> usize {
        self.coeff_bound.unwrap_or(default)
    }

    fn forms(&mut self, k: u32, n: usize) -> Result<Vec<Arc<Eigenform>>> {
        let prec = self.bits();
        let forms = match &self.cache {
            Some(c) => {
                let (forms, digest) = c.load_or_compute(k, n, prec)?;
                self.out.record_digest(k.to_string(), digest);
                forms
            }
            None => crate::eigenforms::eigenforms(k, n, prec)?,
        };
        Ok(forms.into_iter().map(Arc::new).collect())
    }

    fn form(&mut self, k: u32, i: usize, n: usize) -> Result<Vec<Arc<Eigenform>>> {
        let forms = self.forms(k, n)?;
        if i >= forms.len() {
            return Err(Error::InvalidArgument(format!("form index {i} but dim S_{k} = {}", forms.len())));
        }
        Ok(forms)
    }

    fn source(&mut self, target: Target, k: u32, f: usize, g: Option<usize>, n: usize) -> Result<TensorCoeffSource> {
        if let Target::Zeta = target {
            return Ok(TensorCoeffSource::zeta(self.bits()));
        }
        let forms = self.form(k, f.max(g.unwrap_or(0)), n)?;
        let a = forms[f].clone();
        let b = forms[g.unwrap_or(f)].clone();
        Ok(match target {
            Target::Zeta => unreachable!(),
            Target::Standard => TensorCoeffSource::standard(a),
            Target::Rankin => TensorCoeffSource::rankin(a, b),
            Target::Sym2 => TensorCoeffSource::sym2(a),
            Target::Sym2Tensor => TensorCoeffSource::sym2_tensor(a, b),
        })
    }

    fn instance(&mut self, target: Target, k: u32, f: usize, g: Option<usize>, t_max: f64) -> Result<LFunctionInstance> {
        let src = self.source(target, k, f, g, self.bound(4000))?;
        let cfg = InstanceConfig { t_max: t_max.max(1.0), ..Default::default() };
        let mut inst = build_instance(Arc::new(src), &cfg)?;
        inst.validate_default()?;
        if !inst.is_validated() {
            return Err(Error::Unvalidated(format!("{}: {:?}", inst.label(), inst.status())));
        }
        Ok(inst)
    }
}

fn params<T: Serialize>(args: &T, cli: &Cli) -> Map<String, Value> {
    let mut m = match serde_json::to_value(args) {
        Ok(Value::Object(m)) => m,
        _ => Map::new(),
    };
    m.insert("bits".into(), serde_json::json!(cli.bits.unwrap_or(CLI_BITS)));
    m.insert("coeff_bound".into(), serde_json::json!(cli.coeff_bound));
    m.insert("jobs".into(), serde_json::json!(cli.jobs));
    m
}

fn s<T: ToString>(v: T) -> String {
    v.to_string()
}

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|c| c.to_string()).collect()
}

/// Parses argv and runs; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(j) = cli.jobs {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global();
    }
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let (name, p) = match &cli.command {
        Command::Basis(a) => ("basis", params(a, cli)),
        Command::Eigenforms(a) => ("eigenforms", params(a, cli)),
        Command::Coeffs(a) => ("coeffs", params(a, cli)),
        Command::MollifierCheck(a) => ("mollifier-check", params(a, cli)),
        Command::Rn(a) => ("rn", params(a, cli)),
        Command::Distinguish(a) => ("distinguish", params(a, cli)),
        Command::Primes(a) => ("primes", params(a, cli)),
        Command::SatoTate(a) => ("sato-tate", params(a, cli)),
        Command::L1(a) => ("l1", params(a, cli)),
        Command::Sieve(a) => ("sieve", params(a, cli)),
        Command::Moments(a) => ("moments", params(a, cli)),
        Command::Zeros(a) => ("zeros", params(a, cli)),
        Command::Density(a) => ("density", params(a, cli)),
        Command::Classify(a) => ("classify", params(a, cli)),
        Command::Probe(a) => ("probe", params(a, cli)),
    };
    let cache = if cli.no_cache {
        None
    } else {
        Some(cli.cache.clone().map(EigenCache::new).or_else(EigenCache::from_env).unwrap_or_else(|| EigenCache::new(cli.out.join("cache"))))
    };
    let mut ctx = Ctx { bits: cli.bits, coeff_bound: cli.coeff_bound, cache, out: RunOutput::new(&cli.out, name, p)? };
    let code = match dispatch(&cli.command, &mut ctx) {
        Ok(c) => c,
        Err(e) => {
            // failed runs are still recorded
            ctx.out.finish(exit_code(&e))?;
            return Err(e);
        }
    };
    let m = ctx.out.finish(code)?;
    println!("run {} ({} artifacts) in {}", m.run_id, m.artifacts.len(), cli.out.display());
    Ok(code)
}

fn dispatch(cmd: &Command, ctx: &mut Ctx) -> Result<i32> {
    match cmd {
        Command::Basis(a) => {
            let basis = miller_basis(a.k, a.n + 1)?;
            let mut h = vec![s("n")];
            h.extend((1..=basis.len()).map(|i| format!("b_{i}")));
            let rows: Vec<Vec<String>> =
                (1..=a.n).map(|n| std::iter::once(s(n)).chain(basis.iter().map(|b| s(b.coeff(n)))).collect()).collect();
            ctx.out.table("basis", &h, &rows)?;
            println!("dim S_{} = {}", a.k, basis.len());
            Ok(0)
        }
        Command::Eigenforms(a) => {
            let n = ctx.coeff_bound.unwrap_or(a.n);
            let forms = ctx.forms(a.k, n)?;
            let rows: Vec<Vec<String>> = forms
                .iter()
                .flat_map(|f| (1..=a.n.min(f.bound)).map(move |m| vec![f.label(), s(m), f.lambda[m].to_string_radix(10, None)]))
                .collect();
            ctx.out.table("lambda", &header(&["form", "n", "lambda"]), &rows)?;
            for f in &forms {
                println!("{}: lambda(2) = {:.12}, operator {:?}", f.label(), f.lambda_f64(2), f.operator);
            }
            Ok(0)
        }
        Command::Coeffs(a) => {
            let src = ctx.source(a.target, a.k, a.f, a.g, ctx.bound(a.n as usize))?;
            let table = src.table(a.n)?;
            let label = src.label();
            let rows: Vec<Vec<String>> =
                (1..=a.n as usize).map(|n| vec![s(n), table[n].to_string_radix(10, None), label.clone()]).collect();
            ctx.out.table("coeffs", &header(&["n", "a_n", "source"]), &rows)?;
            Ok(0)
        }
        Command::MollifierCheck(a) => {
            let forms = ctx.forms(a.k, ctx.bound((a.l_max as usize).max(1000)))?;
            let cfg = SieveConfig::new(a.z)?;
            let s_val = Complex::with_val(ctx.bits(), (a.s_re, a.s_im));
            let mut rows = Vec::new();
            let mut worst: f64 = 0.0;
            for i in 0..forms.len() {
                for j in i..forms.len() {
                    let r = verify_inverse(&forms[i], &forms[j], &s_val, &cfg, a.l_max)?;
                    worst = worst.max(r.residual);
                    rows.push(vec![
                        forms[i].label(),
                        forms[j].label(),
                        s(r.residual),
                        s(r.coefficient_residual),
                        s(r.analytic_gap),
                        s(r.g_tail_bound),
                        s(r.terms),
                    ]);
                }
            }
            ctx.out.table(
                "inverse",
                &header(&["f", "g", "residual", "coefficient_residual", "analytic_gap", "g_tail_bound", "terms"]),
                &rows,
            )?;
            println!("largest residual {worst:.3e}");
            Ok(if worst <= a.tolerance { 0 } else { 2 })
        }
        Command::Rn(a) => {
            let need = (a.x * a.x).ceil() as usize;
            let src = ctx.source(Target::Rankin, a.k, a.f, a.g, ctx.bound(need.max(1000)))?;
            let vm = crate::lseries::VonMangoldtSource::new(Arc::new(src));
            let n = a.points.max(1);
            let xs: Vec<f64> = (1..=n).map(|i| 1.0 + (a.x - 1.0) * i as f64 / n as f64).collect();
            let curve = analytic::rn_curve(&vm, &xs)?;
            let rows: Vec<Vec<String>> = curve.iter().map(|p| vec![s(p.x), s(p.sum), s(p.main), s(p.ratio())]).collect();
            ctx.out.table("rn", &header(&["x", "sum", "main", "ratio"]), &rows)?;
            let data: Vec<Vec<f64>> = curve.iter().map(|p| vec![p.x, p.sum, p.main]).collect();
            ctx.out.curve("rn", &["x", "sum", "main"], &data)?;
            let last = curve.last().unwrap();
            println!("rn({}) = {:.6}, main {:.6}, ratio {:.6}", last.x, last.sum, last.main, last.ratio());
            Ok(0)
        }
        Command::Distinguish(a) => {
            let need = (a.x * a.x).ceil() as usize;
            let forms = ctx.form(a.k, a.f.max(a.g), ctx.bound(need.max(1000)))?;
            let mut cfg = DistinguishConfig::new(a.k)?.with_x(a.x)?;
            if let Some(eta) = a.eta {
                cfg = cfg.with_eta(eta)?;
            }
            if a.restricted {
                cfg.require_eta_window()?;
            }
            let r = analytic::distinguish(&forms[a.f], &forms[a.g], &cfg)?;
            let rows: Vec<Vec<String>> =
                r.rn1.iter().zip(&r.rn2).map(|(p, q)| vec![s(p.x), s(p.sum), s(q.sum), s(p.main)]).collect();
            ctx.out.table("curves", &header(&["x", "rn1", "rn2", "main"]), &rows)?;
            let data: Vec<Vec<f64>> = r.rn1.iter().zip(&r.rn2).map(|(p, q)| vec![p.x, p.sum, q.sum, p.main]).collect();
            ctx.out.curve("curves", &["x", "rn1", "rn2", "main"], &data)?;
            ctx.out.records("report", std::slice::from_ref(&r))?;
            match r.p_star {
                Some(p) => println!("p_star = {p} ({:?})", r.certificate),
                None => println!("no distinguishing prime up to {} (min gap {:.3e})", r.searched_up_to, r.min_gap),
            }
            Ok(if r.p_star.is_some() { 0 } else { 2 })
        }
        Command::Primes(a) => {
            let top = a.forms.iter().copied().max().unwrap_or(0);
            let all = ctx.form(a.k, top, ctx.bound(a.x as usize))?;
            let chosen: Vec<_> = a.forms.iter().map(|&i| all[i].clone()).collect();
            let r = analytic::prime_power_sum(&chosen, a.x)?;
            ctx.out.table(
                "sum",
                &header(&["forms", "x", "sum", "prime_count", "ratio_pi", "ratio_2pi"]),
                &[vec![r.forms.join(" "), s(r.x), s(r.sum), s(r.prime_count), s(r.ratio_pi), s(r.ratio_2pi)]],
            )?;
            println!("sum {:.6}, /pi(x) {:.6}, /2pi(x) {:.6}", r.sum, r.ratio_pi, r.ratio_2pi);
            if let Some(tol) = a.zero_tol {
                let z = analytic::zero_lambda_primes(&chosen, a.x, tol)?;
                let rows: Vec<Vec<String>> = z.primes.iter().map(|p| vec![s(p)]).collect();
                ctx.out.table("zero-lambda", &header(&["p"]), &rows)?;
                println!("{} primes with |product| <= {tol} ({:.3e} of pi(x))", z.primes.len(), z.fraction);
            }
            Ok(0)
        }
        Command::SatoTate(a) => {
            let forms = ctx.form(a.k, a.f, ctx.bound(a.x as usize))?;
            let r = analytic::sato_tate(&forms[a.f], a.x, a.bins)?;
            let w = std::f64::consts::PI / r.histogram.len() as f64;
            let rows: Vec<Vec<String>> = (0..r.histogram.len())
                .map(|b| vec![s(b), s(b as f64 * w), s((b + 1) as f64 * w), s(r.histogram[b]), s(r.reference[b])])
                .collect();
            ctx.out.table("histogram", &header(&["bin", "lo", "hi", "empirical", "reference"]), &rows)?;
            let data: Vec<Vec<f64>> = (0..r.histogram.len()).map(|b| vec![(b as f64 + 0.5) * w, r.histogram[b], r.reference[b]]).collect();
            ctx.out.curve("histogram", &["theta", "empirical", "reference"], &data)?;
            ctx.out.records("report", std::slice::from_ref(&r))?;
            println!("KS distance {:.5} over {} primes", r.ks, r.primes);
            Ok(0)
        }
        Command::L1(a) => {
            let opts = L1Options {
                cutoff: a.cutoff,
                levels: a.levels,
                precision: ctx.bits(),
                tensor: !a.no_tensor,
                ..Default::default()
            };
            let mut families = Vec::new();
            for k in (a.k_min..=a.k_max).filter(|k| k % 2 == 0 && crate::arith::cusp_dimension(*k) > 0) {
                families.push(ctx.forms(k, ctx.bound(a.cutoff as usize).max(a.cutoff as usize))?);
            }
            let rows = analytic::l1_sweep_forms(&families, &opts)?;
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        s(r.k),
                        format!("{:?}", r.kind),
                        r.f.clone(),
                        r.g.clone().unwrap_or_default(),
                        s(r.value),
                        s(r.stability),
                        s(r.converged),
                        s(r.positive),
                        s(r.log_ratio),
                    ]
                })
                .collect();
            ctx.out.table(
                "values",
                &header(&["k", "kind", "f", "g", "value", "stability", "converged", "positive", "log_ratio"]),
                &table,
            )?;
            for kind in [analytic::L1Kind::Sym2, analytic::L1Kind::Sym2Tensor] {
                if let Some(c) = analytic::sup_log_ratio(&rows, kind) {
                    println!("{kind:?}: sup value/(log k)^{} = {c:.4}", kind.log_exponent());
                }
            }
            let bad = rows.iter().filter(|r| !r.converged || !r.positive).count();
            if bad > 0 {
                println!("{bad} value(s) flagged");
            }
            Ok(0)
        }
        Command::Sieve(a) => {
            let need = ((40.0 * a.l).ceil() as usize).max(a.l as usize);
            let forms = ctx.forms(a.k, ctx.bound(need.min(100_000)))?;
            let vectors = match &a.basis {
                Some(js) => VectorFamily::Basis(js.clone()),
                None => VectorFamily::RandomSigns { seed: a.seed, trials: a.trials },
            };
            let r = analytic::large_sieve_experiment(&forms, a.l, &vectors)?;
            let rows: Vec<Vec<String>> = (0..r.lhs.len())
                .map(|i| vec![s(i), s(r.lhs[i]), s(r.norms[i]), s(r.rhs_shape[i]), s(r.ratios[i])])
                .collect();
            ctx.out.table("trials", &header(&["trial", "lhs", "norm", "rhs_shape", "ratio"]), &rows)?;
            let pairs: Vec<Vec<String>> = r
                .pair_sums
                .iter()
                .map(|p| {
                    vec![
                        format!("{}x{}", p.p.0, p.p.1),
                        format!("{}x{}", p.q.0, p.q.1),
                        s(p.diagonal),
                        s(p.in_family),
                        s(p.sum),
                        s(p.ratio),
                    ]
                })
                .collect();
            ctx.out.table("pairs", &header(&["p", "q", "diagonal", "in_family", "sum", "ratio"]), &pairs)?;
            println!(
                "ratio range [{:.3e}, {:.3e}] (spread {:.3}); diagonal {:.4}, off-diagonal {:.4}",
                r.ratio_min, r.ratio_max, r.ratio_spread, r.diagonal_ratio, r.off_diagonal_ratio
            );
            Ok(0)
        }
        Command::Moments(a) => {
            let forms = ctx.form(a.k, a.f.max(a.g), ctx.bound(10_000))?;
            let mut cfg = MomentConfig::new(a.k, a.alpha)?.with_x(a.x)?;
            if let Some(y) = a.y {
                cfg = cfg.with_y(y)?;
            }
            if let Some(e) = a.epsilon {
                cfg = cfg.with_epsilon(e)?;
            }
            let r = analytic::moment_integrals(&forms[a.f], &forms[a.g], &cfg, a.t, None)?;
            ctx.out.table(
                "integrals",
                &header(&["t", "x", "y", "i1", "i1_error", "i2", "i2_error", "combination"]),
                &[vec![s(r.t), s(r.x), s(r.y), s(r.i1), s(r.i1_error), s(r.i2), s(r.i2_error), s(r.combination)]],
            )?;
            ctx.out.records("report", std::slice::from_ref(&r))?;
            println!("I = {:.6e}, II = {:.6e}, combination {:.6e}", r.i1, r.i2, r.combination);
            Ok(if r.i1_converged && r.i2_converged { 0 } else { 2 })
        }
        Command::Zeros(a) => {
            let inst = ctx.instance(a.target, a.k, a.f, a.g, a.t)?;
            let opts = CountOptions { box_height: a.box_height, ..Default::default() };
            let r = count_zeros_box(&inst, a.alpha, a.t, &opts)?;
            let rows: Vec<Vec<String>> =
                r.boxes.iter().map(|b| vec![s(b.t_lo), s(b.t_hi), s(b.count), s(b.contour_residual)]).collect();
            ctx.out.table("boxes", &header(&["t_lo", "t_hi", "count", "contour_residual"]), &rows)?;
            ctx.out.records("report", std::slice::from_ref(&r))?;
            println!("{}: N({}, {}) = {} ({:?})", r.label, a.alpha, a.t, r.count, r.status);
            if a.scan {
                let sc = critical_line_scan(&inst, 0.0, a.t, a.scan_step)?;
                let rows: Vec<Vec<String>> = sc.zeros.iter().map(|z| vec![s(z)]).collect();
                ctx.out.table("critical-zeros", &header(&["t"]), &rows)?;
                println!("{} sign changes on the critical line", sc.count());
            }
            Ok(if r.accepted() { 0 } else { 2 })
        }
        Command::Density(a) => {
            let opts = family_opts(ctx, a.box_height);
            let forms = ctx.forms(a.k, opts.coeff_bound)?;
            let mode = match a.mode {
                ModeArg::Rankin => FamilyMode::Rankin,
                ModeArg::Sym2 => FamilyMode::Sym2,
            };
            let r = family_density_for(&forms, a.alpha, a.t, mode, &opts)?;
            let rows: Vec<Vec<String>> = r
                .members
                .iter()
                .map(|m| vec![m.label.clone(), s(m.count), s(m.occupied_boxes), s(m.contour_residual), s(m.accepted)])
                .collect();
            ctx.out.table("members", &header(&["label", "count", "occupied_boxes", "contour_residual", "accepted"]), &rows)?;
            ctx.out.records("report", std::slice::from_ref(&r))?;
            println!(
                "aggregate {} over {} members; ratios rankin {:.3e}, sym2 {:.3e}",
                r.aggregate,
                r.members.len(),
                r.rankin_ratio,
                r.sym2_ratio
            );
            Ok(if r.poisoned { 2 } else { 0 })
        }
        Command::Classify(a) => {
            let opts = family_opts(ctx, None);
            let forms = ctx.forms(a.k, opts.coeff_bound)?;
            let r = classify_eta_for(&forms, a.eta, a.height, &opts)?;
            ctx.out.records("report", std::slice::from_ref(&r))?;
            println!("H- = {:?}, D- = {:?}", r.h_minus, r.d_minus);
            Ok(0)
        }
        Command::Probe(a) => {
            let t_max = a.t_grid.iter().fold(1.0f64, |m, t| m.max(t.abs()));
            let inst = ctx.instance(a.target, a.k, a.f, a.g, t_max)?;
            let rows = convexity_probe(&inst, &a.t_grid, a.epsilon)?;
            let table: Vec<Vec<String>> =
                rows.iter().map(|r| vec![s(r.t), s(r.abs_l), s(r.shape), s(r.ratio), s(r.flagged)]).collect();
            ctx.out.table("probe", &header(&["t", "abs_l", "shape", "ratio", "flagged"]), &table)?;
            Ok(0)
        }
    }
}

fn family_opts(ctx: &Ctx, box_height: Option<f64>) -> FamilyOptions {
    FamilyOptions {
        coeff_bound: ctx.bound(4000),
        precision: ctx.bits(),
        box_height,
        ..Default::default()
    }
}

