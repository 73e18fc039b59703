//! Explicit-formula and statistical experiments on the coefficient data:
//! smoothed prime sums, the distinguishing prime, prime-sum asymptotics,
//! Sato–Tate statistics, values at s = 1, a large-sieve experiment and
//! the mollified moment integrals.

pub mod explicit;
pub mod l1;
pub mod moments;
pub mod primes;
pub mod sieve;

pub use explicit::{
    distinguish, kernel, kernel_contour, rn_curve, rn_main, rn_sum, Certificate, DistinguishConfig, DistinguishReport,
    RnPoint,
};
pub use l1::{l1_sweep, l1_sweep_forms, l1_value, sup_log_ratio, L1Kind, L1Options, L1Row, L1_STABILITY};
pub use moments::{first_moment, moment_integrals, MomentConfig, MomentReport};
pub use primes::{prime_power_sum, sato_tate, sato_tate_cdf, zero_lambda_primes, PrimeSumReport, SatoTateReport, ZeroLambdaReport};
pub use sieve::{large_sieve_experiment, rhs_shape, PairSum, SieveExperimentReport, VectorFamily, SIEVE_EPSILON};

use crate::error::Result;
use crate::lseries::TensorCoeffSource;

/// Coefficients a(0..=n) of a source rounded to f64.
pub(crate) fn table_f64(src: &TensorCoeffSource, n: u64) -> Result<Vec<f64>> {
    Ok(src.table(n)?.iter().map(|v| v.to_f64()).collect())
}
