//! Exact multiplicative functions (tau_4, mu, phi) and Euler-product constants.

mod euler;
mod identities;
mod zeta;

pub use euler::{
    bp_closed_form, bp_local, euler_constant, euler_constant_accelerated, local_factor, BpLocal,
    EulerKind, EulerProductValue,
};
pub use identities::{f_func_closed_form, f_func_identity_check, h_sum_identity_check, IdentityResidual};
pub use zeta::{zeta_dd, zeta_em};

use num_complex::Complex64;

use crate::error::{invalid, Result};

/// Sieved tables of tau_4, the Moebius function and Euler's phi on 1..=limit.
#[derive(Clone, Debug)]
pub struct MultiplicativeTable {
    pub limit: usize,
    /// `tau4[n]` for n in 1..=limit; index 0 is unused and holds 0.
    pub tau4: Vec<u64>,
    pub mobius: Vec<i8>,
    pub phi: Vec<u64>,
    spf: Vec<u32>,
}

/// C(r+3, 3), the number of ways to write p^r as an ordered product of four factors.
pub fn tau4_prime_power(r: u32) -> u64 {
    let r = r as u64;
    (r + 1) * (r + 2) * (r + 3) / 6
}

/// Linear sieve; each composite is visited once through its smallest prime factor.
pub fn sieve_tables(limit: usize) -> Result<MultiplicativeTable> {
    if limit == 0 {
        return invalid("sieve limit must be at least 1");
    }
    if limit > u32::MAX as usize {
        return invalid("sieve limit exceeds 2^32");
    }
    let mut tau4 = vec![0u64; limit + 1];
    let mut mobius = vec![0i8; limit + 1];
    let mut phi = vec![0u64; limit + 1];
    let mut spf = vec![0u32; limit + 1];
    // exponent of the smallest prime in n, and n with that prime power removed
    let mut spf_exp = vec![0u32; limit + 1];
    let mut rest = vec![0u32; limit + 1];
    let mut primes: Vec<u32> = Vec::new();
    tau4[1] = 1;
    mobius[1] = 1;
    phi[1] = 1;
    rest[1] = 1;
    for n in 2..=limit {
        if spf[n] == 0 {
            spf[n] = n as u32;
            primes.push(n as u32);
            tau4[n] = 4;
            mobius[n] = -1;
            phi[n] = n as u64 - 1;
            spf_exp[n] = 1;
            rest[n] = 1;
        }
        for &p in &primes {
            let m = n * p as usize;
            if p > spf[n] || m > limit {
                break;
            }
            spf[m] = p;
            if p == spf[n] {
                spf_exp[m] = spf_exp[n] + 1;
                rest[m] = rest[n];
                tau4[m] = tau4_prime_power(spf_exp[m]) * tau4[rest[m] as usize];
                mobius[m] = 0;
                phi[m] = phi[n] * p as u64;
            } else {
                spf_exp[m] = 1;
                rest[m] = n as u32;
                tau4[m] = 4 * tau4[n];
                mobius[m] = -mobius[n];
                phi[m] = phi[n] * (p as u64 - 1);
            }
        }
    }
    Ok(MultiplicativeTable {
        limit,
        tau4,
        mobius,
        phi,
        spf,
    })
}

impl MultiplicativeTable {
    pub fn smallest_prime_factor(&self, n: usize) -> usize {
        self.spf[n] as usize
    }

    pub fn is_prime(&self, n: usize) -> bool {
        n >= 2 && self.spf[n] as usize == n
    }

    /// Distinct prime factors of n (n <= limit).
    pub fn prime_divisors(&self, mut n: usize) -> Vec<u64> {
        let mut out = Vec::new();
        while n > 1 {
            let p = self.spf[n] as usize;
            out.push(p as u64);
            while n % p == 0 {
                n /= p;
            }
        }
        out
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        (2..=self.limit).filter(|&n| self.spf[n] as usize == n).map(|n| n as u64)
    }
}

/// Primes up to n by the sieve of Eratosthenes.
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
    if n < 4 {
        return true;
    }
    if n % 2 == 0 {
        return false;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Trial division; returns (prime, exponent) pairs in increasing order.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
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
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p * (p - 1))
}

pub fn mobius(n: u64) -> i64 {
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for (p, e) in factorize(n) {
        let len = out.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                out.push(out[i] * pk);
            }
        }
    }
    out.sort_unstable();
    out
}

/// prod_{p | q} (1 - 1/p)^7 / (1 + 9/p + 9/p^2 + 1/p^3); equals 1 for q = 1.
pub fn local_factor_q(q: u64) -> Result<crate::numeric::Dd> {
    use crate::numeric::Dd;
    if q == 0 {
        return invalid("local_factor_q needs q >= 1");
    }
    let mut acc = Dd::ONE;
    for (p, _) in factorize(q) {
        let x = Dd::ONE / Dd::new(p as f64);
        let num = (Dd::ONE - x).powi(7);
        let den = Dd::ONE + x.mul_f64(9.0) + x.sqr().mul_f64(9.0) + x.powi(3);
        acc = acc * num / den;
    }
    Ok(acc)
}

/// phi(r, s) = prod_{p | r} (1 - p^{-s}).
pub fn phi_rs(r: u64, s: Complex64) -> Result<Complex64> {
    if r == 0 {
        return invalid("phi_rs needs r >= 1");
    }
    Ok(factorize(r)
        .into_iter()
        .fold(Complex64::new(1.0, 0.0), |acc, (p, _)| {
            acc * (1.0 - (-s * (p as f64).ln()).exp())
        }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tau4_brute(n: u64) -> u64 {
        let mut count = 0;
        for a in divisors(n) {
            for b in divisors(n / a) {
                count += divisors(n / a / b).len() as u64;
            }
        }
        count
    }

    #[test]
    fn sieve_rejects_zero() {
        assert!(sieve_tables(0).is_err());
    }

    #[test]
    fn small_values() {
        let t = sieve_tables(1).unwrap();
        assert_eq!((t.tau4[1], t.mobius[1], t.phi[1]), (1, 1, 1));
        let t = sieve_tables(100).unwrap();
        assert_eq!(t.tau4[2], 4);
        assert_eq!(t.tau4[4], 10);
        assert_eq!(t.tau4[12], 10 * 4);
        assert_eq!(t.mobius[30], -1);
        assert_eq!(t.mobius[12], 0);
        assert_eq!(t.phi[36], 12);
    }

    #[test]
    fn tau4_matches_brute_force_up_to_1e4() {
        let t = sieve_tables(10_000).unwrap();
        for n in 1..=10_000u64 {
            assert_eq!(t.tau4[n as usize], tau4_brute(n), "n = {n}");
        }
    }

    #[test]
    fn mobius_phi_match_factorization() {
        let t = sieve_tables(5000).unwrap();
        for n in 1..=5000u64 {
            assert_eq!(t.mobius[n as usize] as i64, mobius(n));
            assert_eq!(t.phi[n as usize], euler_phi(n));
        }
    }

    #[test]
    fn prime_power_rule() {
        let t = sieve_tables(1 << 16).unwrap();
        for p in [2usize, 3, 5, 7, 251] {
            let mut pk = p;
            let mut r = 1;
            while pk <= t.limit {
                assert_eq!(t.tau4[pk], tau4_prime_power(r));
                pk *= p;
                r += 1;
            }
        }
    }

    fn big_table() -> &'static MultiplicativeTable {
        static T: std::sync::OnceLock<MultiplicativeTable> = std::sync::OnceLock::new();
        T.get_or_init(|| sieve_tables(4_000_000).unwrap())
    }

    proptest! {
        #[test]
        fn tau4_multiplicative(m in 1usize..2000, n in 1usize..2000) {
            prop_assume!(gcd(m as u64, n as u64) == 1);
            let t = big_table();
            prop_assert_eq!(t.tau4[m * n], t.tau4[m] * t.tau4[n]);
        }
    }

    #[test]
    fn local_factor_q_examples() {
        assert_eq!(local_factor_q(1).unwrap().to_f64(), 1.0);
        let want = 0.5f64.powi(7) / (63.0 / 8.0);
        assert!((local_factor_q(2).unwrap().to_f64() - want).abs() < 1e-17);
        assert_eq!(local_factor_q(12).unwrap(), local_factor_q(6).unwrap());
    }

    #[test]
    fn phi_rs_examples() {
        let one = Complex64::new(1.0, 0.0);
        assert_eq!(phi_rs(1, Complex64::new(0.3, 2.0)).unwrap(), one);
        assert!((phi_rs(6, one).unwrap() - 1.0 / 3.0).norm() < 1e-15);
        let s = Complex64::new(0.7, -1.1);
        let single = phi_rs(7, s).unwrap() / (1.0 - (-s * 7f64.ln()).exp());
        assert!((single - one).norm() < 1e-15);
    }

    #[test]
    fn divisors_and_factorize() {
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(factorize(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert!(is_prime(999_983));
        assert_eq!(primes_up_to(20), vec![2, 3, 5, 7, 11, 13, 17, 19]);
    }
}
