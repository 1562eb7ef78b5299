//! Two Euler-product identities, each checked by summing the left side directly.

use num_complex::Complex64;

use super::zeta::zeta_em;
use super::{factorize, gcd, mobius, primes_up_to, sieve_tables};
use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdentityResidual {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
    /// Estimated size of the truncated tails of the infinite products.
    pub tail_bound: f64,
}

fn cpow(p: f64, e: Complex64) -> Complex64 {
    (e * p.ln()).exp()
}

fn distinct_primes(n: u64) -> Vec<u64> {
    factorize(n).into_iter().map(|(p, _)| p).collect()
}

fn ln_1p_c(x: Complex64) -> Complex64 {
    if x.norm() < 1e-4 {
        x - x * x / 2.0 + x * x * x / 3.0 - x * x * x * x / 4.0
    } else {
        (x + 1.0).ln()
    }
}

/// sum_{p > cutoff} p^{-s} by Moebius inversion of log zeta, for Re s > 1.
fn prime_zeta_tail_c(s: Complex64, primes: &[u64], cutoff: f64) -> Complex64 {
    let mut total = Complex64::new(0.0, 0.0);
    let mut k = 1u64;
    loop {
        let ks = s * k as f64;
        if (1.0 - ks.re) * cutoff.log10() < -18.0 {
            break;
        }
        let mu = mobius(k);
        if mu != 0 {
            let mut z = zeta_em(ks);
            for &p in primes {
                z -= z * cpow(p as f64, -ks);
            }
            total += ln_1p_c(z - 1.0) * (mu as f64 / k as f64);
        }
        k += 1;
    }
    total
}

fn binom(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// prod over primes p not dividing `excluded` of 1 + (a0 + a1 p^e) p^{-2} / (1 - 1/p).
/// Returns (value, tail estimate). The primes above `cutoff` enter through the log
/// expansion sum_{m,i,j} c_{m,i,j} P_{>cutoff}(2m + j - i e).
fn product_with_tail(a0: f64, a1: f64, e: Complex64, excluded: u64, cutoff: u64) -> (Complex64, f64) {
    let primes = primes_up_to(cutoff);
    let mut log_partial = Complex64::new(0.0, 0.0);
    for &p in &primes {
        if excluded % p == 0 {
            continue;
        }
        let u = 1.0 / p as f64;
        let x = (cpow(p as f64, e) * a1 + a0) * (u * u / (1.0 - u));
        log_partial += ln_1p_c(x);
    }
    let cf = cutoff as f64;
    let mut log_tail = Complex64::new(0.0, 0.0);
    let mut omitted = 0.0;
    for m in 1..=12u64 {
        for i in 0..=m {
            let ci = binom(m, i) * a0.powi((m - i) as i32) * a1.powi(i as i32);
            if ci == 0.0 {
                continue;
            }
            for j in 0..=24u64 {
                let expo = Complex64::new((2 * m + j) as f64, 0.0) - e * i as f64;
                let coeff = if m % 2 == 1 { 1.0 } else { -1.0 } / m as f64 * ci * binom(m + j - 1, j);
                let size = coeff.abs() * cf.powf(1.0 - expo.re) / (expo.re - 1.0);
                if size < 1e-18 {
                    omitted += size;
                    continue;
                }
                log_tail += prime_zeta_tail_c(expo, &primes, cf) * coeff;
            }
        }
    }
    ((log_partial + log_tail).exp(), omitted + 1e-13)
}

/// Checks sum_{h <= H, (h, MN) = 1} 1/(phi(abh) h^s) against
/// (1/phi(ab)) zeta(s+1) prod_{p|MN}(1 - p^{-s-1}) prod_{p not | abMN}(1 + p^{-s}/(p(p-1))).
pub fn h_sum_identity_check(
    a: u64,
    b: u64,
    m: u64,
    n: u64,
    s: Complex64,
    h_max: u64,
    prime_cutoff: u64,
) -> Result<IdentityResidual> {
    if a == 0 || b == 0 || m == 0 || n == 0 {
        return invalid("a, b, M, N must be positive");
    }
    if gcd(a * b, m * n) != 1 {
        return invalid(format!("gcd(ab, MN) = gcd({}, {}) must be 1", a * b, m * n));
    }
    if s.re < 1.0 {
        return invalid("h-sum identity needs Re s >= 1");
    }
    if h_max < 1000 {
        return invalid("h-sum truncation H must be at least 1000");
    }
    let ab = a * b;
    let mn = m * n;
    let phi_ab = super::euler_phi(ab) as f64;
    let table = sieve_tables(h_max as usize)?;
    let mut lhs = Complex64::new(0.0, 0.0);
    for h in (1..=h_max).rev() {
        if gcd(h, mn) != 1 {
            continue;
        }
        let g = gcd(ab, h);
        let phi_abh = phi_ab * table.phi[h as usize] as f64 * g as f64 / super::euler_phi(g) as f64;
        lhs += (-s * (h as f64).ln()).exp() / phi_abh;
    }
    let excluded = ab * mn;
    let cutoff = prime_cutoff.max(distinct_primes(excluded).last().copied().unwrap_or(2));
    let mut rhs = zeta_em(s + 1.0) / phi_ab;
    for p in distinct_primes(mn) {
        rhs *= 1.0 - cpow(p as f64, -s - 1.0);
    }
    for p in primes_up_to(cutoff) {
        if excluded % p != 0 {
            let pf = p as f64;
            rhs *= 1.0 + cpow(pf, -s) / (pf * (pf - 1.0));
        }
    }
    let cf = cutoff as f64;
    let tail_bound = 2.0 * cf.powf(-s.re - 1.0) / (s.re + 1.0) + 2.0 * (h_max as f64).powf(-s.re);
    Ok(IdentityResidual {
        lhs,
        rhs,
        residual: (lhs - rhs).norm(),
        tail_bound,
    })
}

/// F(s, g, MN) = phi(MN, s+1) prod_{p not | gMN}(1 - 1/(p(p-1)) + 1/(p^{1+s}(p-1)))
///               prod_{p | g, p not | MN}(1 - 1/p^{1+s} - (1 - 1/p^s)/(p-1)).
pub fn f_func_closed_form(s: Complex64, g: u64, mn: u64, prime_cutoff: u64) -> Result<(Complex64, f64)> {
    if g == 0 || mn == 0 {
        return invalid("g and MN must be positive");
    }
    let mut val = super::phi_rs(mn, s + 1.0)?;
    // 1 - 1/(p(p-1)) + p^{-1-s}/(p-1) = 1 + (p^{-s} - 1) p^{-2}/(1 - 1/p)
    let cutoff = prime_cutoff.max(distinct_primes(g * mn).last().copied().unwrap_or(2));
    let (prod, tail) = product_with_tail(-1.0, 1.0, -s, g * mn, cutoff);
    val *= prod;
    for p in distinct_primes(g) {
        if mn % p == 0 {
            continue;
        }
        let pf = p as f64;
        val *= 1.0 - cpow(pf, -1.0 - s) - (1.0 - cpow(pf, -s)) / (pf - 1.0);
    }
    Ok((val, tail))
}

/// Checks that
///   sum_{(d, gMN) = 1} sum_{(r, MN) = 1} mu(d) mu(r) (r, g) / (r phi(r) d^{1+z})
///     prod_{p | MN}(1 - p^{z-1}) prod_{p not | rMN}(1 + p^{z-1}/(p-1))
/// equals F(-z, g, MN) / (zeta(1+z) phi(gMN, 1+z)), with d, r <= limit.
///
/// The summand splits into a d-part and an r-part, so the double sum is evaluated as
/// a product of two single sums.
pub fn f_func_identity_check(
    z: Complex64,
    g: u64,
    m: u64,
    n: u64,
    limit: u64,
    prime_cutoff: u64,
) -> Result<IdentityResidual> {
    if g == 0 || m == 0 || n == 0 {
        return invalid("g, M, N must be positive");
    }
    if gcd(m, n) != 1 {
        return invalid(format!("gcd(M, N) = gcd({m}, {n}) must be 1"));
    }
    if !(z.re > 0.0 && z.re < 1.0) {
        return invalid("Re z must lie in (0, 1)");
    }
    if limit < 10 {
        return invalid("summation limit too small");
    }
    let mn = m * n;
    let gmn = g * mn;
    let table = sieve_tables(limit as usize)?;
    let mut d_sum = Complex64::new(0.0, 0.0);
    for d in (1..=limit).rev() {
        let mu = table.mobius[d as usize];
        if mu != 0 && gcd(d, gmn) == 1 {
            d_sum += cpow(d as f64, -1.0 - z) * mu as f64;
        }
    }
    let mut r_sum = Complex64::new(0.0, 0.0);
    for r in (1..=limit).rev() {
        let mu = table.mobius[r as usize];
        if mu == 0 || gcd(r, mn) != 1 {
            continue;
        }
        let mut term = Complex64::new(
            mu as f64 * gcd(r, g) as f64 / (r as f64 * table.phi[r as usize] as f64),
            0.0,
        );
        for p in table.prime_divisors(r as usize) {
            let pf = p as f64;
            term /= 1.0 + cpow(pf, z - 1.0) / (pf - 1.0);
        }
        r_sum += term;
    }
    let cutoff = prime_cutoff.max(distinct_primes(gmn).last().copied().unwrap_or(2));
    // prod_{p not | MN}(1 + p^{z-1}/(p-1)) = prod (1 + p^z p^{-2}/(1 - 1/p))
    let (c_mn, tail_c) = product_with_tail(0.0, 1.0, z, mn, cutoff);
    let mut lhs = d_sum * r_sum * c_mn;
    for p in distinct_primes(mn) {
        lhs *= 1.0 - cpow(p as f64, z - 1.0);
    }
    let (f_val, tail_f) = f_func_closed_form(-z, g, mn, cutoff)?;
    let rhs = f_val / (zeta_em(z + 1.0) * super::phi_rs(gmn, z + 1.0)?);
    Ok(IdentityResidual {
        lhs,
        rhs,
        residual: (lhs - rhs).norm(),
        tail_bound: tail_c + tail_f,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h_sum_trivial_case() {
        let r = h_sum_identity_check(1, 1, 1, 1, Complex64::new(2.0, 0.0), 100_000, 100_000).unwrap();
        assert!(r.residual < 1e-6, "{r:?}");
    }

    #[test]
    fn h_sum_mixed_case() {
        let r = h_sum_identity_check(2, 1, 3, 5, Complex64::new(2.0, 0.0), 100_000, 100_000).unwrap();
        assert!(r.residual < 1e-6, "{r:?}");
        let r = h_sum_identity_check(2, 3, 5, 7, Complex64::new(1.5, 2.0), 100_000, 100_000).unwrap();
        assert!(r.residual < 1e-6, "{r:?}");
    }

    #[test]
    fn h_sum_refines() {
        let s = Complex64::new(1.2, 0.5);
        let coarse = h_sum_identity_check(1, 1, 2, 3, s, 1000, 1000).unwrap();
        let fine = h_sum_identity_check(1, 1, 2, 3, s, 100_000, 100_000).unwrap();
        assert!(fine.residual < coarse.residual);
    }

    #[test]
    fn h_sum_rejects_shared_prime() {
        assert!(h_sum_identity_check(3, 1, 3, 1, Complex64::new(2.0, 0.0), 1000, 1000).is_err());
        assert!(h_sum_identity_check(1, 1, 1, 1, Complex64::new(0.5, 0.0), 1000, 1000).is_err());
    }

    #[test]
    fn f_identity_cases() {
        let z = Complex64::new(0.5, 0.0);
        let r = f_func_identity_check(z, 1, 1, 1, 10_000, 10_000).unwrap();
        assert!(r.residual < 1e-4, "{r:?}");
        let r = f_func_identity_check(z, 2, 3, 1, 10_000, 10_000).unwrap();
        assert!(r.residual < 1e-4, "{r:?}");
    }

    #[test]
    fn f_identity_rejects() {
        let z = Complex64::new(0.5, 0.0);
        assert!(f_func_identity_check(z, 1, 2, 2, 1000, 1000).is_err());
        assert!(f_func_identity_check(Complex64::new(1.2, 0.0), 1, 1, 1, 1000, 1000).is_err());
    }

    #[test]
    fn product_tail_matches_longer_partial_product() {
        // prod_{p} (1 + p^{z-1}/(p-1)) at z = 1/2: tail-corrected cutoffs must agree
        let z = Complex64::new(0.5, 0.3);
        let (a, _) = product_with_tail(0.0, 1.0, z, 1, 2000);
        let (b, _) = product_with_tail(0.0, 1.0, z, 1, 200_000);
        assert!((a - b).norm() < 1e-10, "{a} vs {b}");
    }
}
