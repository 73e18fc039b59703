//! Elementary integer arithmetic: sieves, factorization, Möbius, divisor sums.

/// Smallest-prime-factor table for `0..=n`. Entries 0 and 1 are 0.
#[derive(Debug, Clone)]
pub struct SpfTable {
    spf: Vec<u32>,
}

impl SpfTable {
    pub fn new(n: u64) -> Self {
        let n = n as usize;
        let mut spf = vec![0u32; n + 1];
        for i in 2..=n {
            if spf[i] == 0 {
                let mut j = i;
                while j <= n {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        SpfTable { spf }
    }

    pub fn limit(&self) -> u64 {
        (self.spf.len() - 1) as u64
    }

    pub fn spf(&self, n: u64) -> u64 {
        self.spf[n as usize] as u64
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && self.spf(n) == n
    }

    /// Prime factorization as (p, e) pairs in increasing p.
    pub fn factor(&self, mut n: u64) -> Vec<(u64, u32)> {
        let mut out = Vec::new();
        while n > 1 {
            let p = self.spf(n);
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        out
    }

    /// Splits n = p^e · rest with p the smallest prime factor.
    pub fn split(&self, n: u64) -> (u64, u32, u64) {
        let p = self.spf(n);
        let mut rest = n;
        let mut e = 0;
        while rest % p == 0 {
            rest /= p;
            e += 1;
        }
        (p, e, rest)
    }

    pub fn mobius(&self, n: u64) -> i8 {
        let mut sign = 1i8;
        for (_, e) in self.factor(n) {
            if e > 1 {
                return 0;
            }
            sign = -sign;
        }
        sign
    }
}

/// All primes `≤ n`.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Factorization by trial division, for isolated arguments.
pub fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Returns (p, m) when n = p^m with m ≥ 1.
pub fn prime_power(n: u64) -> Option<(u64, u32)> {
    let f = factor(n);
    if f.len() == 1 {
        Some(f[0])
    } else {
        None
    }
}

pub fn mobius(n: u64) -> i8 {
    let mut sign = 1i8;
    for (_, e) in factor(n) {
        if e > 1 {
            return 0;
        }
        sign = -sign;
    }
    sign
}

/// σ_r(n) for `0..=n` (entry 0 is 0). Fits u128 for r ≤ 5 and n ≤ 10⁷.
pub fn divisor_power_sums(r: u32, n: usize) -> Vec<u128> {
    let mut out = vec![0u128; n + 1];
    for d in 1..=n {
        let dp = (d as u128).pow(r);
        let mut m = d;
        while m <= n {
            out[m] += dp;
            m += d;
        }
    }
    out
}

/// Dimension of S_k(SL₂(ℤ)) for even k ≥ 0.
pub fn cusp_dimension(k: u32) -> usize {
    if k % 2 == 1 || k < 12 {
        return 0;
    }
    let base = (k / 12) as usize;
    if k % 12 == 2 {
        base - 1
    } else {
        base
    }
}

pub fn prime_count(primes: &[u64], x: u64) -> usize {
    primes.partition_point(|&p| p <= x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_primes() {
        assert_eq!(primes_up_to(30), vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert_eq!(primes_up_to(1), Vec::<u64>::new());
        assert_eq!(primes_up_to(100_000).len(), 9592);
    }

    #[test]
    fn spf_agrees_with_trial_division() {
        let t = SpfTable::new(5000);
        for n in 2..=5000 {
            assert_eq!(t.factor(n), factor(n));
            assert_eq!(t.mobius(n), mobius(n));
        }
    }

    #[test]
    fn sigma_values() {
        let s3 = divisor_power_sums(3, 10);
        assert_eq!(s3[2], 9);
        let s5 = divisor_power_sums(5, 10);
        assert_eq!(s5[2], 33);
        assert_eq!(s5[6], 1 + 32 + 243 + 7776);
    }

    #[test]
    fn dimensions() {
        let expect = [(12, 1), (14, 0), (16, 1), (24, 2), (26, 1), (28, 2), (36, 3), (38, 2), (60, 5)];
        for (k, d) in expect {
            assert_eq!(cusp_dimension(k), d, "k={k}");
        }
    }
}
