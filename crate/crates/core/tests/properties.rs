//! Randomized invariants across the eigenform, coefficient, mollifier,
//! analytic and zero-counting layers.

use proptest::prelude::*;
use rankin_lab::analytic::{kernel, large_sieve_experiment, rhs_shape, rn_main, rn_sum, sato_tate_cdf, MomentConfig, VectorFamily};
use rankin_lab::arith::{factor, is_prime, primes_up_to};
use rankin_lab::eigenforms::{cache, delta, eigenforms, eisenstein, Eigenform};
use rankin_lab::lseries::{TensorCoeffSource, VonMangoldtSource};
use rankin_lab::mollifier::{surviving_indices, SieveConfig};
use rankin_lab::zerolab::{build_instance, count_zeros_box, CountOptions, InstanceConfig, LFunctionInstance};
use rug::{Float, Integer};
use std::sync::{Arc, OnceLock};

const N: usize = 10_000;
const BITS: u32 = 192;

fn forms(k: u32) -> &'static [Arc<Eigenform>] {
    static H: OnceLock<Vec<(u32, Vec<Arc<Eigenform>>)>> = OnceLock::new();
    let all = H.get_or_init(|| {
        [12, 24, 36]
            .iter()
            .map(|&k| (k, eigenforms(k, N, BITS).unwrap().into_iter().map(Arc::new).collect()))
            .collect()
    });
    &all.iter().find(|(w, _)| *w == k).unwrap().1
}

fn pick() -> impl Strategy<Value = Arc<Eigenform>> {
    (prop::sample::select(vec![12u32, 24, 36]), 0usize..3).prop_map(|(k, i)| {
        let h = forms(k);
        h[i % h.len()].clone()
    })
}

fn small_prime() -> impl Strategy<Value = u64> {
    prop::sample::select(primes_up_to(N as u64))
}

fn close(a: &Float, b: &Float, tol: &Float) -> bool {
    let scale = Float::with_val(a.prec(), a.abs_ref()).max(&Float::with_val(a.prec(), b.abs_ref())).max(&Float::with_val(a.prec(), 1));
    Float::with_val(a.prec(), a - b).abs() <= Float::with_val(a.prec(), tol * &scale)
}

fn zeta() -> &'static LFunctionInstance {
    static Z: OnceLock<LFunctionInstance> = OnceLock::new();
    Z.get_or_init(|| {
        let cfg = InstanceConfig { t_max: 30.0, ..Default::default() };
        let mut inst = build_instance(Arc::new(TensorCoeffSource::zeta(128)), &cfg).unwrap();
        inst.validate_default().unwrap();
        assert!(inst.is_validated());
        inst
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigenvalues_are_multiplicative(f in pick(), m in 1u64..=100, n in 1u64..=100) {
        prop_assume!(Integer::from(m).gcd(&Integer::from(n)) == 1);
        let lhs = f.lambda(m * n).unwrap().clone();
        let rhs = Float::with_val(BITS, f.lambda(m).unwrap() * f.lambda(n).unwrap());
        prop_assert!(close(&lhs, &rhs, &f.tolerance()));
    }

    #[test]
    fn hecke_recursion_at_prime_powers(f in pick(), p in small_prime(), m in 1u32..13) {
        let pm = |e: u32| p.checked_pow(e).filter(|v| *v <= N as u64);
        if let (Some(a), Some(b), Some(c)) = (pm(m - 1), pm(m), pm(m + 1)) {
            let lhs = Float::with_val(BITS, f.lambda(p).unwrap() * f.lambda(b).unwrap());
            let rhs = Float::with_val(BITS, f.lambda(c).unwrap() + f.lambda(a).unwrap());
            prop_assert!(close(&lhs, &rhs, &f.tolerance()));
        }
        prop_assert_eq!(f.lambda(1).unwrap(), &Float::with_val(BITS, 1));
    }

    #[test]
    fn deligne_and_satake_angles(f in pick(), p in small_prime()) {
        let lp = f.lambda(p).unwrap();
        prop_assert!(Float::with_val(BITS, lp.abs_ref()) <= Float::with_val(BITS, 2 + f.tolerance()));
        let a = f.satake_angle(p).unwrap();
        let two_cos = Float::with_val(BITS, a.theta.cos_ref()) * 2u32;
        prop_assert!(close(&two_cos, lp, &f.tolerance()));
        prop_assert!(a.theta >= 0 && a.theta <= Float::with_val(BITS, rug::float::Constant::Pi));
    }

    #[test]
    fn source_coefficients_are_multiplicative(f in pick(), g in pick(), kind in 0usize..4, m in 1u64..=60, n in 1u64..=60) {
        prop_assume!(f.weight == g.weight);
        prop_assume!(Integer::from(m).gcd(&Integer::from(n)) == 1);
        let src = match kind {
            0 => TensorCoeffSource::standard(f.clone()),
            1 => TensorCoeffSource::rankin(f.clone(), g.clone()),
            2 => TensorCoeffSource::sym2(f.clone()),
            _ => TensorCoeffSource::sym2_tensor(f.clone(), g.clone()),
        };
        let lhs = src.coeff(m * n).unwrap();
        let rhs = Float::with_val(BITS, src.coeff(m).unwrap() * src.coeff(n).unwrap());
        prop_assert!(close(&lhs, &rhs, &f.tolerance()));
        let p = factor(m.max(2)).last().unwrap().0;
        let bound = src.degree() as f64 + f.tolerance().to_f64();
        prop_assert!(src.coeff(p).unwrap().to_f64().abs() <= bound);
    }

    #[test]
    fn diagonal_von_mangoldt_is_nonnegative(f in pick(), n in 1u64..=(N as u64)) {
        let lam = VonMangoldtSource::new(Arc::new(TensorCoeffSource::rankin(f.clone(), f.clone())));
        let v = lam.von_mangoldt(n).unwrap();
        prop_assert!(v >= -f.tolerance());
        if rankin_lab::arith::prime_power(n).is_none() {
            prop_assert!(v.is_zero());
        }
    }

    #[test]
    fn diagonal_prime_sum_is_nonnegative(f in pick(), x in 1.0f64..100.0) {
        let lam = VonMangoldtSource::new(Arc::new(TensorCoeffSource::rankin(f.clone(), f.clone())));
        let v = rn_sum(&lam, x).unwrap();
        prop_assert!(v >= -1e-12 && v.is_finite());
        prop_assert!(rn_main(x) >= 0.0);
    }

    #[test]
    fn qseries_arithmetic_is_exact(n in 2usize..60, a in 0u32..3, b in 0u32..3) {
        let e4 = eisenstein(4, n).unwrap();
        let e6 = eisenstein(6, n).unwrap();
        let x = e4.pow(a + 1);
        let y = e6.pow(b + 1);
        prop_assert_eq!(x.mul(&y), y.mul(&x));
        prop_assert_eq!(x.mul(&y).precision(), n);
        prop_assert_eq!(x.add(&y).sub(&y), x.clone());
        prop_assert_eq!(x.square(), x.mul(&x));
        // 1728Δ = E4³ − E6²
        let d = e4.pow(3).sub(&e6.square());
        prop_assert_eq!(d, delta(n).unwrap().scale(&Integer::from(1728)));
    }

    #[test]
    fn sieve_is_monotone_in_z(x in 1.0f64..2000.0, z1 in 16.5f64..60.0, dz in 0.0f64..60.0) {
        let small = surviving_indices(x, &SieveConfig::new(z1).unwrap());
        let large = surviving_indices(x, &SieveConfig::new(z1 + dz).unwrap());
        prop_assert!(large.iter().all(|l| small.contains(l)));
        prop_assert_eq!(small.first(), Some(&1));
        let cfg = SieveConfig::new(z1).unwrap();
        prop_assert!(cfg.primes_below_z().iter().all(|&p| is_prime(p) && (p as f64) <= z1));
        prop_assert_eq!(cfg.primes_below_z().len(), primes_up_to(z1.floor() as u64).len());
    }

    #[test]
    fn kernel_is_a_logarithm_above_one(y1 in 1.0f64..1e6, y2 in 1.0f64..1e6, y0 in 1e-6f64..1.0) {
        prop_assert!((kernel(y1 * y2) - kernel(y1) - kernel(y2)).abs() <= 1e-12 * kernel(y1 * y2).max(1.0));
        prop_assert_eq!(kernel(y0), 0.0);
        prop_assert!(kernel(y1) >= 0.0);
    }

    #[test]
    fn sato_tate_cdf_is_a_distribution(a in 0.0f64..std::f64::consts::PI, b in 0.0f64..std::f64::consts::PI) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(sato_tate_cdf(lo) <= sato_tate_cdf(hi) + 1e-15);
        prop_assert!(sato_tate_cdf(0.0).abs() < 1e-15);
        prop_assert!((sato_tate_cdf(std::f64::consts::PI) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn moment_contours_have_the_right_signs(k in prop::sample::select(vec![12u32, 24, 36, 60, 100]), alpha in 0.55f64..=1.0) {
        let cfg = MomentConfig::new(k, alpha).unwrap();
        prop_assert!(cfg.kappa > 0.0);
        prop_assert!(cfg.kappa2 < 0.0);
        prop_assert!(cfg.check().is_ok());
    }

    #[test]
    fn cache_text_round_trips(k in prop::sample::select(vec![12u32, 24, 36])) {
        let h: Vec<Eigenform> = forms(k).iter().map(|f| (**f).clone()).collect();
        let text = cache::serialize(k, &h);
        let (back, _) = cache::parse(&text).unwrap();
        prop_assert_eq!(back.len(), h.len());
        for (a, b) in back.iter().zip(&h) {
            prop_assert_eq!(&a.lambda, &b.lambda);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sieve_sums_are_finite_and_nonnegative(js in prop::collection::vec(1u64..=200, 1..5), seed in any::<u64>()) {
        let h = forms(24);
        let basis = large_sieve_experiment(h, 200.0, &VectorFamily::Basis(js)).unwrap();
        let signs = large_sieve_experiment(h, 200.0, &VectorFamily::RandomSigns { seed, trials: 3 }).unwrap();
        for r in [basis, signs] {
            prop_assert!(r.lhs.iter().chain(&r.ratios).chain(&r.rhs_shape).all(|v| v.is_finite() && *v >= 0.0));
        }
        prop_assert!(rhs_shape(24, 400.0, 0.01) > rhs_shape(24, 200.0, 0.01));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn zero_counts_are_monotone(a1 in 0.05f64..0.45, da in 0.0f64..0.4, t1 in 5.0f64..25.0, dt in 0.0f64..5.0) {
        let z = zeta();
        let opts = CountOptions::default();
        let base = count_zeros_box(z, a1, t1, &opts).unwrap();
        let right = count_zeros_box(z, a1 + da, t1, &opts).unwrap();
        let taller = count_zeros_box(z, a1, t1 + dt, &opts).unwrap();
        for r in [&base, &right, &taller] {
            prop_assert!(r.accepted());
            prop_assert!(r.contour_residual <= 1e-3);
        }
        prop_assert!(right.count <= base.count);
        prop_assert!(base.count <= taller.count);
    }
}

#[test]
fn hecke_matrices_commute_with_integer_entries() {
    for k in (12..=60).step_by(2) {
        let basis = rankin_lab::eigenforms::miller_basis(k, 200).unwrap();
        if basis.len() < 2 {
            continue;
        }
        let t2 = rankin_lab::eigenforms::hecke_matrix(k, &basis, 2).unwrap();
        let t3 = rankin_lab::eigenforms::hecke_matrix(k, &basis, 3).unwrap();
        assert!(t2.commutes_with(&t3), "weight {k}");
    }
}
