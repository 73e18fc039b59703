//! End-to-end acceptance checks. Each test prints one PASS/FAIL line with the
//! measured quantities before asserting, so the full picture survives a
//! failure elsewhere in the suite.

use rankin_lab::analytic::{
    distinguish, large_sieve_experiment, prime_power_sum, rn_curve, rn_main, rn_sum, sato_tate, Certificate,
    DistinguishConfig, VectorFamily,
};
use rankin_lab::arith::primes_up_to;
use rankin_lab::eigenforms::{delta, eigenforms, Eigenform, DEFAULT_PRECISION};
use rankin_lab::lseries::{factorization_check_diagonal, factorization_check_sym2tensor, TensorCoeffSource, VonMangoldtSource};
use rankin_lab::mollifier::{verify_inverse, SieveConfig};
use rankin_lab::zerolab::{
    build_instance, classify_eta, count_zeros_box, critical_line_scan, family_density, CountOptions, FamilyMode,
    FamilyOptions, InstanceConfig, LFunctionInstance,
};
use rug::ops::Pow;
use rug::{Complex, Float, Integer};
use std::io::Write;
use std::sync::{Arc, OnceLock};

const P: u32 = DEFAULT_PRECISION;
/// 2^{−96}.
const HALF_PRECISION: f64 = 1.262_177_448_353_618_9e-29;
const BIG_X: u64 = 100_000;
const SIEVE_SEED: u64 = 20_240_601;

/// Prints the verdict on stdout, bypassing the harness capture.
fn report(name: &str, pass: bool, detail: String) {
    let line = format!("[{}] {name}: {detail}\n", if pass { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
}

fn basis(k: u32, n: usize) -> Vec<Arc<Eigenform>> {
    eigenforms(k, n, P).unwrap().into_iter().map(Arc::new).collect()
}

/// H_12 and H_24 with 10⁵ coefficients, shared by the statistical checks.
fn large(k: u32) -> &'static [Arc<Eigenform>] {
    static H12: OnceLock<Vec<Arc<Eigenform>>> = OnceLock::new();
    static H24: OnceLock<Vec<Arc<Eigenform>>> = OnceLock::new();
    match k {
        12 => H12.get_or_init(|| basis(12, BIG_X as usize)),
        24 => H24.get_or_init(|| basis(24, BIG_X as usize)),
        _ => unreachable!(),
    }
}

fn validated(src: TensorCoeffSource, t_max: f64) -> LFunctionInstance {
    let cfg = InstanceConfig { t_max, ..Default::default() };
    let mut inst = build_instance(Arc::new(src), &cfg).unwrap();
    inst.validate_default().unwrap();
    inst
}

fn rel_gap(a: &Float, b: &Float) -> f64 {
    let scale = a.to_f64().abs().max(b.to_f64().abs()).max(1.0);
    Float::with_val(P, a - b).to_f64().abs() / scale
}

#[test]
fn tau_matches_the_product_expansion() {
    const N: usize = 1000;
    // q Π (1 − qⁿ)²⁴ by repeated multiplication with (1 − qⁿ).
    let mut prod = vec![Integer::new(); N + 1];
    prod[0] = Integer::from(1);
    for n in 1..=N {
        for _ in 0..24 {
            for i in (n..=N).rev() {
                let t = prod[i - n].clone();
                prod[i] -= t;
            }
        }
    }
    let brute: Vec<Integer> = (0..=N).map(|n| if n == 0 { Integer::new() } else { prod[n - 1].clone() }).collect();
    let series = delta(N + 1).unwrap();
    let h = eigenforms(12, N, P).unwrap();
    let exact = h[0].exact.as_ref().expect("one-dimensional space keeps exact coefficients");
    let mut bad = Vec::new();
    for n in 1..=N {
        if series.coeff(n) != &brute[n] || exact[n] != brute[n] {
            bad.push(n);
        }
    }
    let worst = (1..=N)
        .map(|n| {
            let a = Float::with_val(P, &h[0].lambda[n] * Float::with_val(P, n).pow(Float::with_val(P, 5.5)));
            (a - Float::with_val(P, &brute[n])).abs().to_f64() / brute[n].to_f64().abs().max(1.0)
        })
        .fold(0.0, f64::max);
    let pass = bad.is_empty() && worst < 1e-40;
    report("tau coefficients", pass, format!("n <= {N}, {} mismatches, worst lambda(n)n^(11/2) relative gap {worst:.2e}", bad.len()));
    assert!(pass, "mismatches at {bad:?}");
}

#[test]
fn hecke_relations_hold_for_every_weight() {
    const N: u64 = 10_000;
    let mut worst_mult = 0.0f64;
    let mut worst_rec = 0.0f64;
    let mut forms = 0;
    let primes = primes_up_to(N);
    for k in (12..=60).step_by(2) {
        let h = eigenforms(k, N as usize, P).unwrap();
        for f in &h {
            forms += 1;
            assert_eq!(f.lambda[1], 1);
            for m in 2..=N / 2 {
                for n in (m + 1)..=N / m {
                    if Integer::from(m).gcd(&Integer::from(n)) != 1 {
                        continue;
                    }
                    let prod = Float::with_val(P, &f.lambda[m as usize] * &f.lambda[n as usize]);
                    worst_mult = worst_mult.max(rel_gap(&f.lambda[(m * n) as usize], &prod));
                }
            }
            for &p in &primes {
                let mut prev = 1u64;
                let mut cur = p;
                while let Some(next) = cur.checked_mul(p).filter(|v| *v <= N) {
                    let lhs = Float::with_val(P, &f.lambda[p as usize] * &f.lambda[cur as usize]);
                    let rhs = Float::with_val(P, &f.lambda[next as usize] + &f.lambda[prev as usize]);
                    worst_rec = worst_rec.max(rel_gap(&lhs, &rhs));
                    prev = cur;
                    cur = next;
                }
            }
        }
    }
    let pass = worst_mult <= HALF_PRECISION && worst_rec <= HALF_PRECISION;
    report(
        "Hecke relations",
        pass,
        format!("{forms} forms, k = 12..60, args <= {N}: multiplicativity {worst_mult:.2e}, recursion {worst_rec:.2e} (tol 2^-96)"),
    );
    assert!(pass);
}

#[test]
fn deligne_bound_up_to_one_hundred_thousand() {
    let primes = primes_up_to(BIG_X);
    let mut worst = f64::NEG_INFINITY;
    let mut forms = 0;
    for k in (12..=60).step_by(2) {
        let h: Vec<Arc<Eigenform>> = match k {
            12 | 24 => large(k).to_vec(),
            _ => basis(k, BIG_X as usize),
        };
        for f in &h {
            forms += 1;
            for &p in &primes {
                let excess = Float::with_val(P, f.lambda[p as usize].abs_ref()) - 2u32;
                worst = worst.max(excess.to_f64());
            }
        }
    }
    let pass = worst <= HALF_PRECISION;
    report("Deligne bound", pass, format!("{forms} forms, k = 12..60, p <= {BIG_X}: max |lambda(p)| - 2 = {worst:.3e}"));
    assert!(pass);
}

/// Coefficients of Π_j (1 − r_j X)^{−1} through X^m from the Satake roots.
fn symmetric_expansion(roots: &[Complex], m: usize) -> Vec<Complex> {
    let prec = roots[0].prec().0;
    let mut c = vec![Complex::with_val(prec, 0); m + 1];
    c[0] = Complex::with_val(prec, 1);
    for r in roots {
        // multiply by 1 + rX + r²X² + …
        for j in 1..=m {
            let prev = Complex::with_val(prec, &c[j - 1] * r);
            c[j] += prev;
        }
    }
    c
}

#[test]
fn euler_factors_match_the_satake_expansion() {
    let h = basis(24, 200);
    let (f, g) = (&h[0], &h[1]);
    let wp = P + 64;
    let unit = |theta: &Float, e: i32| Complex::with_val(wp, (Float::with_val(wp, theta * e).cos(), Float::with_val(wp, theta * e).sin()));
    let mut worst = 0.0f64;
    for p in [2u64, 3, 5] {
        let a = f.satake_angle(p).unwrap().theta;
        let b = g.satake_angle(p).unwrap().theta;
        let rankin: Vec<Complex> = [(1, 1), (1, -1), (-1, 1), (-1, -1)]
            .iter()
            .map(|&(i, j)| Complex::with_val(wp, unit(&a, i) * unit(&b, j)))
            .collect();
        let sym2: Vec<Complex> = [2, 0, -2].iter().map(|&e| unit(&a, e)).collect();
        let tensor: Vec<Complex> = [2, 0, -2]
            .iter()
            .flat_map(|&i| [2, 0, -2].map(|j| (i, j)))
            .map(|(i, j)| Complex::with_val(wp, unit(&a, i) * unit(&b, j)))
            .collect();
        for (roots, src) in [
            (rankin, TensorCoeffSource::rankin(f.clone(), g.clone())),
            (sym2, TensorCoeffSource::sym2(f.clone())),
            (tensor, TensorCoeffSource::sym2_tensor(f.clone(), g.clone())),
        ] {
            let oracle = symmetric_expansion(&roots, 5);
            let local = src.local_coeffs(p, 5).unwrap();
            for m in 0..=5 {
                let d = Complex::with_val(wp, &oracle[m] - &local[m]);
                let gap = Float::with_val(wp, d.abs_ref()).to_f64() / oracle[m].real().to_f64().abs().max(1.0);
                worst = worst.max(gap);
            }
        }
    }
    let pass = worst <= HALF_PRECISION;
    report("Euler-factor oracle", pass, format!("k = 24 pair, p in {{2,3,5}}, m <= 5, degrees 4/3/9: worst gap {worst:.2e}"));
    assert!(pass);
}

#[test]
fn factorization_identities() {
    let d = basis(12, 1000);
    let h = basis(24, 500);
    let diag = factorization_check_diagonal(&d[0], 1000).unwrap();
    let diag_tol = 2f64.powi(-90) * 1000.0;
    let mut quad = 0.0f64;
    for (f, g) in [(&d[0], &d[0]), (&h[0], &h[1]), (&h[0], &h[0])] {
        quad = quad.max(factorization_check_sym2tensor(f, g, 500).unwrap());
    }
    let quad_tol = 2f64.powi(-90) * 500.0;
    let pass = diag <= diag_tol && quad <= quad_tol;
    report(
        "factorization identities",
        pass,
        format!("zeta*Sym2 residual {diag:.2e} (tol {diag_tol:.2e}); four-factor residual {quad:.2e} (tol {quad_tol:.2e})"),
    );
    assert!(pass);
}

#[test]
fn inverse_factorization_for_all_pairs() {
    const L_MAX: u64 = 1000;
    let mut worst = 0.0f64;
    let mut checks = 0;
    for k in [24, 28] {
        let h = basis(k, L_MAX as usize);
        for f in &h {
            for g in &h {
                for (re, im) in [(2.0, 0.0), (3.0, 0.0), (2.0, 10.0)] {
                    for z in [17.0, 20.0, 50.0] {
                        let s = Complex::with_val(P, (re, im));
                        let r = verify_inverse(f, g, &s, &SieveConfig::new(z).unwrap(), L_MAX).unwrap();
                        worst = worst.max(r.residual);
                        checks += 1;
                    }
                }
            }
        }
    }
    let pass = worst <= 1e-25;
    report("inverse factorization", pass, format!("{checks} checks at k in {{24,28}}: worst residual {worst:.2e} (tol 1e-25)"));
    assert!(pass);
}

#[test]
fn prime_sum_residue_and_cancellation() {
    let d = basis(12, 10_000);
    let diag = VonMangoldtSource::new(Arc::new(TensorCoeffSource::rankin(d[0].clone(), d[0].clone())));
    let xs: Vec<f64> = (10..=100).map(|x| x as f64).collect();
    let curve = rn_curve(&diag, &xs).unwrap();
    let window = |lo: f64, hi: f64| {
        let v: Vec<f64> = curve.iter().filter(|p| p.x >= lo && p.x <= hi).map(|p| (p.ratio() - 1.0).abs()).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let at_100 = curve.last().unwrap().ratio();
    let (early, late) = (window(10.0, 20.0), window(50.0, 100.0));
    let h = basis(24, 10_000);
    let off = VonMangoldtSource::new(Arc::new(TensorCoeffSource::rankin(h[0].clone(), h[1].clone())));
    let off_ratio = rn_sum(&off, 100.0).unwrap() / rn_main(100.0);
    let pass = (0.8..=1.2).contains(&at_100) && late < early && off_ratio.abs() <= 0.2;
    report(
        "prime-sum residue",
        pass,
        format!("diagonal ratio at x=100 {at_100:.4}; mean |ratio-1| on [10,20] {early:.4}, on [50,100] {late:.4}; k=24 pair {off_ratio:+.4}"),
    );
    assert!(pass);
}

#[test]
fn distinguishing_prime_is_two() {
    let mut lines = Vec::new();
    let mut pass = true;
    for k in [24, 28] {
        let h = basis(k, 500);
        let cfg = DistinguishConfig::new(k).unwrap().with_x(20.0).unwrap();
        let r = distinguish(&h[0], &h[1], &cfg).unwrap();
        let disc = h[0].charpoly.discriminant();
        let certified = matches!(&r.certificate, Some(Certificate::Exact { prime: 2, .. }));
        pass &= r.p_star == Some(2) && certified && disc != 0;
        lines.push(format!("k={k}: p* = {:?}, discriminant {disc}", r.p_star));
    }
    report("distinguishing prime", pass, lines.join("; "));
    assert!(pass);
}

#[test]
fn prime_power_sums() {
    let d = large(12);
    let h = large(24);
    let fourth = prime_power_sum(&[d[0].clone(), d[0].clone(), d[0].clone(), d[0].clone()], BIG_X).unwrap().ratio_2pi;
    let second = prime_power_sum(&[d[0].clone(), d[0].clone()], BIG_X).unwrap().ratio_pi;
    let off = prime_power_sum(&[h[0].clone(), h[1].clone()], BIG_X).unwrap().ratio_pi;
    let pass = (0.85..=1.15).contains(&fourth) && (0.85..=1.15).contains(&second) && (-0.15..=0.15).contains(&off);
    report(
        "prime power sums",
        pass,
        format!("p <= {BIG_X}: sum lambda^4 / 2pi(x) = {fourth:.4}, sum lambda^2 / pi(x) = {second:.4}, k=24 pair mean {off:+.4}"),
    );
    assert!(pass);
}

#[test]
fn sato_tate_distance() {
    let r = sato_tate(&large(12)[0], BIG_X, 20).unwrap();
    let pass = r.ks <= 0.05;
    report("Sato-Tate", pass, format!("{} primes <= {BIG_X}: KS distance {:.5} (tol 0.05)", r.primes, r.ks));
    assert!(pass);
}

#[test]
fn large_sieve_experiment_at_weight_24() {
    let h = large(24);
    let signs = VectorFamily::RandomSigns { seed: SIEVE_SEED, trials: 20 };
    let a = large_sieve_experiment(h, 2000.0, &signs).unwrap();
    let b = large_sieve_experiment(h, 4000.0, &signs).unwrap();
    let drift = (b.diagonal_ratio / a.diagonal_ratio - 1.0).abs();
    let off = b.off_diagonal_ratio / b.diagonal_ratio;
    let bounded = b.lhs.iter().zip(&b.rhs_shape).all(|(l, r)| *l <= b.ratio_max * r * (1.0 + 1e-12));
    let pass = drift <= 0.2 && off <= 0.25 && bounded && b.ratio_spread <= 10.0;
    report(
        "large sieve",
        pass,
        format!(
            "diagonal sum/L {:.4} (L=2000) vs {:.4} (L=4000), drift {drift:.3}; off/diag {off:.4}; \
             random-sign max/min ratio {:.1} (L=2000), {:.1} (L=4000), limit 10",
            a.diagonal_ratio, b.diagonal_ratio, a.ratio_spread, b.ratio_spread
        ),
    );
    assert!(pass);
}

#[test]
fn zero_counting_and_validation() {
    let d = basis(12, 4000);
    let h = basis(24, 4000);
    let zeta = validated(TensorCoeffSource::zeta(128), 30.0);
    let sym2 = validated(TensorCoeffSource::sym2(d[0].clone()), 30.0);
    let pair = validated(TensorCoeffSource::rankin(h[0].clone(), h[1].clone()), 10.0);
    let diag = validated(TensorCoeffSource::rankin(d[0].clone(), d[0].clone()), 20.0);
    let mut notes = Vec::new();
    let mut pass = true;
    for inst in [&zeta, &sym2, &pair, &diag] {
        let fe = inst.fe_report().unwrap();
        let ok = inst.is_validated() && fe.max_residual <= 1e-10 && (fe.epsilon_fit - 1.0).abs() <= 1e-8;
        pass &= ok;
        notes.push(format!("{} fe {:.1e} eps-1 {:.1e}", inst.label(), fe.max_residual, fe.epsilon_fit - 1.0));
    }
    let opts = CountOptions::default();
    let zc = count_zeros_box(&zeta, 0.25, 30.0, &opts).unwrap();
    let scan = critical_line_scan(&zeta, 0.0, 30.0, 0.05).unwrap();
    pass &= zc.accepted() && zc.count == 3 && scan.count() == 3;
    notes.push(format!("zeta N(0.25,30) = {}, scan {}", zc.count, scan.count()));
    let s = count_zeros_box(&sym2, 0.6, 10.0, &opts).unwrap();
    pass &= s.accepted() && s.count == 0 && s.contour_residual <= 1e-3;
    notes.push(format!("N(0.6,10,Sym2) = {} residual {:.1e}", s.count, s.contour_residual));
    for (alpha, t) in [(0.25, 20.0), (0.6, 10.0)] {
        let a = count_zeros_box(&diag, alpha, t, &opts).unwrap();
        let b = count_zeros_box(&zeta, alpha, t, &opts).unwrap();
        let c = count_zeros_box(&sym2, alpha, t, &opts).unwrap();
        let ok = a.accepted() && b.accepted() && c.accepted() && a.count == b.count + c.count;
        pass &= ok;
        notes.push(format!("N({alpha},{t}): diag {} = zeta {} + Sym2 {}", a.count, b.count, c.count));
    }
    report("zero counting", pass, notes.join("; "));
    assert!(pass);
}

#[test]
fn family_reports_at_weight_24() {
    let opts = FamilyOptions::default();
    let dens = family_density(24, 0.75, 5.0, FamilyMode::Rankin, &opts).unwrap();
    let sum: u64 = dens.members.iter().map(|m| m.count).sum();
    let eta = classify_eta(24, 0.2, Some(10.0), &opts).unwrap();
    let ratios = [dens.rankin_ratio, dens.sym2_ratio, eta.pair_ratio, eta.form_ratio];
    let pass = !dens.poisoned
        && dens.aggregate == sum
        && eta.h_minus.is_empty()
        && eta.d_minus.is_empty()
        && ratios.iter().all(|r| r.is_finite());
    report(
        "family reports",
        pass,
        format!(
            "aggregate {} over {} members (sum {sum}); ratios rankin {:.3e} sym2 {:.3e}; \
             eta=0.2 height 10: H- {:?}, D- {:?}, pair ratio {:.3e}, form ratio {:.3e}",
            dens.aggregate,
            dens.members.len(),
            dens.rankin_ratio,
            dens.sym2_ratio,
            eta.h_minus,
            eta.d_minus,
            eta.pair_ratio,
            eta.form_ratio
        ),
    );
    assert!(pass);
}
