//! Euler products a_4, a_3, the diagonal constant A, and the local series B_p.
//!
//! Partial products are taken in double-double. The accelerated variant adds the
//! omitted tail through log f(1/p) = sum_k b_k p^{-k} and prime zeta sums
//! P_{>P}(k) = sum_{p > P} p^{-k}, themselves obtained from log zeta by Moebius inversion.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{is_prime, mobius, primes_up_to, tau4_prime_power, zeta::zeta_dd};
use crate::error::{invalid, Result};
use crate::numeric::Dd;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EulerKind {
    /// prod (1-1/p)^9 (1 + 9/p + 9/p^2 + 1/p^3)
    A4,
    /// prod (1-1/p)^4 (1 + 4/p + 1/p^2)
    A3,
    /// prod B_p (1-1/p)^16, with B_p summed from its defining series
    CalA,
    /// prod (1-1/p) (1 + (1/p - 1/p^2 - 1/p^3) / B_p)
    DiagonalCorrection,
}

impl EulerKind {
    pub fn parse(s: &str) -> Option<EulerKind> {
        match s {
            "a4" => Some(EulerKind::A4),
            "a3" => Some(EulerKind::A3),
            "calA" | "cal_a" | "A" => Some(EulerKind::CalA),
            "diag" | "diagonal_correction" => Some(EulerKind::DiagonalCorrection),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EulerKind::A4 => "a4",
            EulerKind::A3 => "a3",
            EulerKind::CalA => "calA",
            EulerKind::DiagonalCorrection => "diag",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EulerProductValue {
    pub value: Dd,
    pub prime_cutoff: u64,
    /// Bound on |log| of the omitted part of the product.
    pub tail_bound: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BpLocal {
    pub value: Dd,
    /// Bound on the omitted series tail.
    pub error: f64,
    pub terms: u32,
}

/// Partial sum of sum_{r < terms} tau_4(p^r)^2 / p^r.
pub fn bp_local(p: u64, terms: u32) -> Result<BpLocal> {
    if !is_prime(p) {
        return invalid(format!("bp_local needs a prime, got {p}"));
    }
    if terms == 0 {
        return invalid("bp_local needs at least one term");
    }
    Ok(bp_series(p, terms))
}

fn bp_series(p: u64, terms: u32) -> BpLocal {
    let x = Dd::new(p as f64).recip();
    let mut xr = Dd::ONE;
    let mut sum = Dd::ZERO;
    for r in 0..terms {
        let t = tau4_prime_power(r) as f64;
        sum += xr.mul_f64(t * t);
        xr = xr * x;
    }
    let next = tau4_prime_power(terms) as f64;
    let next = xr.to_f64() * next * next;
    let ratio = ((terms as f64 + 4.0) / (terms as f64 + 1.0)).powi(2) / p as f64;
    let error = if ratio < 1.0 {
        next / (1.0 - ratio)
    } else {
        f64::INFINITY
    };
    BpLocal {
        value: sum,
        error,
        terms,
    }
}

/// Terms needed for the B_p series to reach double-double accuracy.
fn bp_auto(p: u64) -> BpLocal {
    let mut terms = 8;
    loop {
        let b = bp_series(p, terms);
        if b.error < 1e-33 * b.value.hi {
            return b;
        }
        terms *= 2;
    }
}

/// (1 + 9x + 9x^2 + x^3) / (1 - x)^7 at x = 1/p.
pub fn bp_closed_form(p: u64) -> Dd {
    let x = Dd::new(p as f64).recip();
    cubic(x) / (Dd::ONE - x).powi(7)
}

fn cubic(x: Dd) -> Dd {
    Dd::ONE + x.mul_f64(9.0) + x.sqr().mul_f64(9.0) + x.powi(3)
}

/// The local factor of the product of the given kind at the prime p.
pub fn local_factor(kind: EulerKind, p: u64) -> Dd {
    let x = Dd::new(p as f64).recip();
    let om = Dd::ONE - x;
    match kind {
        EulerKind::A4 => om.powi(9) * cubic(x),
        EulerKind::A3 => om.powi(4) * (Dd::ONE + x.mul_f64(4.0) + x.sqr()),
        EulerKind::CalA => bp_auto(p).value * om.powi(16),
        EulerKind::DiagonalCorrection => {
            let b = bp_closed_form(p);
            let corr = (x - x.sqr() - x.powi(3)) / b;
            om * (Dd::ONE + corr)
        }
    }
}

/// Coefficients of log of an integer power series with constant term 1:
/// log(1 + sum_{j>=1} a_j x^j) = sum_k (c_k / k) x^k.
fn log_series(a: &[i128], k_max: usize) -> Vec<Dd> {
    let coeff = |j: usize| -> Dd {
        if j < a.len() {
            Dd::from_i128(a[j])
        } else {
            Dd::ZERO
        }
    };
    let mut c = vec![Dd::ZERO; k_max + 1];
    for k in 1..=k_max {
        let mut v = coeff(k).mul_f64(k as f64);
        for j in 1..k {
            v -= c[j] * coeff(k - j);
        }
        c[k] = v;
    }
    (0..=k_max)
        .map(|k| if k == 0 { Dd::ZERO } else { c[k] / Dd::new(k as f64) })
        .collect()
}

fn poly_mul(a: &[i128], b: &[i128]) -> Vec<i128> {
    let mut out = vec![0i128; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// b_k with log f(x) = sum_k b_k x^k, k = 0..=k_max (b_0 = b_1 = 0 for all kinds).
fn kind_log_coefficients(kind: EulerKind, k_max: usize) -> Vec<Dd> {
    let one_minus = log_series(&[1, -1], k_max);
    let cubic_poly: [i128; 4] = [1, 9, 9, 1];
    let parts: Vec<(f64, Vec<Dd>)> = match kind {
        EulerKind::A4 => vec![(9.0, one_minus), (1.0, log_series(&cubic_poly, k_max))],
        EulerKind::A3 => vec![(4.0, one_minus), (1.0, log_series(&[1, 4, 1], k_max))],
        EulerKind::CalA => {
            let bp: Vec<i128> = (0..=k_max as u32)
                .map(|r| {
                    let t = tau4_prime_power(r) as i128;
                    t * t
                })
                .collect();
            vec![(16.0, one_minus), (1.0, log_series(&bp, k_max))]
        }
        EulerKind::DiagonalCorrection => {
            // 1 + (x - x^2 - x^3)/B = (D + (x - x^2 - x^3)(1-x)^7) / D
            let mut om7 = vec![1i128];
            for _ in 0..7 {
                om7 = poly_mul(&om7, &[1, -1]);
            }
            let extra = poly_mul(&[0, 1, -1, -1], &om7);
            let mut num = extra.clone();
            for (i, &c) in cubic_poly.iter().enumerate() {
                num[i] += c;
            }
            vec![
                (1.0, one_minus),
                (1.0, log_series(&num, k_max)),
                (-1.0, log_series(&cubic_poly, k_max)),
            ]
        }
    };
    let mut out = vec![Dd::ZERO; k_max + 1];
    for (e, coeffs) in parts {
        for k in 0..=k_max {
            out[k] += coeffs[k].mul_f64(e);
        }
    }
    out
}

/// Bound on sum_{p > cutoff} |log f(1/p)| from sum_k |b_k| cutoff^{1-k}/(k-1).
fn analytic_tail_bound(b: &[Dd], cutoff: f64, k_start: usize) -> f64 {
    let mut total = 0.0;
    let mut last = f64::INFINITY;
    for (k, bk) in b.iter().enumerate().skip(k_start.max(2)) {
        let term = bk.to_f64().abs() * cutoff.powi(1 - k as i32) / (k as f64 - 1.0);
        total += term;
        if term < 1e-40 && last < 1e-40 {
            return total;
        }
        last = term;
    }
    // the series had not settled; inflate by the last term as a geometric guard
    total + 10.0 * last
}

const SERIES_FLOOR: u64 = 100;

fn ordered_product(kind: EulerKind, primes: &[u64]) -> Dd {
    primes
        .par_chunks(512)
        .map(|chunk| chunk.iter().fold(Dd::ONE, |acc, &p| acc * local_factor(kind, p)))
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Dd::ONE, |acc, x| acc * x)
}

/// Partial product over p <= prime_cutoff with a bound on the log of the omitted tail.
pub fn euler_constant(kind: EulerKind, prime_cutoff: u64) -> Result<EulerProductValue> {
    if prime_cutoff < 2 {
        return invalid("prime cutoff must be at least 2");
    }
    let primes = primes_up_to(prime_cutoff);
    let value = ordered_product(kind, &primes);
    let b = kind_log_coefficients(kind, 120);
    let tail_bound = if prime_cutoff >= SERIES_FLOOR {
        analytic_tail_bound(&b, prime_cutoff as f64, 2)
    } else {
        let middle: f64 = primes_up_to(SERIES_FLOOR)
            .into_iter()
            .filter(|&p| p > prime_cutoff)
            .map(|p| local_factor(kind, p).ln().to_f64().abs())
            .sum();
        middle + analytic_tail_bound(&b, SERIES_FLOOR as f64, 2)
    };
    Ok(EulerProductValue {
        value,
        prime_cutoff,
        tail_bound,
    })
}

/// sum_{p > cutoff} p^{-s} for integer s >= 2, given the primes up to the cutoff.
fn prime_zeta_tail(s: u32, primes: &[u64], cutoff: f64) -> Dd {
    let mut total = Dd::ZERO;
    let mut j = 1u32;
    loop {
        let js = j * s;
        // log Z_P(js) ~ cutoff^{1-js}; stop once it is negligible
        if (1.0 - js as f64) * cutoff.log10() < -36.0 {
            break;
        }
        let mu = mobius(j as u64);
        if mu != 0 {
            let mut prod = zeta_dd(js);
            for &p in primes {
                let t = Dd::new(p as f64).recip().powi(js as i32);
                if t.hi < 1e-40 {
                    break;
                }
                prod = prod - prod * t;
            }
            let log_z = (prod - Dd::ONE).ln_1p();
            total += log_z.mul_f64(mu as f64) / Dd::new(j as f64);
        }
        j += 1;
    }
    total
}

/// Full infinite product: exact partial product to max(prime_cutoff, 1000) plus the
/// analytic tail. tail_bound covers series truncation and accumulated rounding.
pub fn euler_constant_accelerated(kind: EulerKind, prime_cutoff: u64) -> Result<EulerProductValue> {
    if prime_cutoff < 2 {
        return invalid("prime cutoff must be at least 2");
    }
    let cutoff = prime_cutoff.max(1000);
    let primes = primes_up_to(cutoff);
    let partial = ordered_product(kind, &primes);
    let b = kind_log_coefficients(kind, 120);
    let cf = cutoff as f64;
    let mut log_tail = Dd::ZERO;
    let mut k_last = 2;
    for (k, bk) in b.iter().enumerate().skip(2) {
        let size = bk.to_f64().abs() * cf.powi(1 - k as i32) / (k as f64 - 1.0);
        if size < 1e-36 {
            k_last = k;
            break;
        }
        log_tail += *bk * prime_zeta_tail(k as u32, &primes, cf);
        k_last = k + 1;
    }
    let truncation = analytic_tail_bound(&b, cf, k_last);
    let rounding = 16.0 * primes.len() as f64 * 2f64.powi(-104) + 1e-33;
    let value = partial * log_tail.exp();
    Ok(EulerProductValue {
        value,
        prime_cutoff: cutoff,
        tail_bound: truncation + rounding,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bp_first_term() {
        assert_eq!(bp_local(7, 1).unwrap().value, Dd::ONE);
        assert!(bp_local(4, 3).is_err());
        assert!(bp_local(5, 0).is_err());
    }

    #[test]
    fn bp_series_matches_closed_form() {
        let b = bp_local(2, 200).unwrap();
        assert!((b.value - bp_closed_form(2)).to_f64().abs() < 1e-12);
        let b = bp_local(97, 50).unwrap();
        assert!((b.value - bp_closed_form(97)).to_f64().abs() < 1e-12);
        for p in primes_up_to(100) {
            let b = bp_auto(p);
            assert!((b.value - bp_closed_form(p)).to_f64().abs() < 1e-28, "p = {p}");
        }
    }

    #[test]
    fn a4_factor_at_two() {
        let want = 0.5f64.powi(9) * (1.0 + 4.5 + 2.25 + 0.125);
        assert!((local_factor(EulerKind::A4, 2).to_f64() - want).abs() < 1e-18);
    }

    #[test]
    fn a3_factor_is_one_plus_order_p_minus_2() {
        for p in [1009u64, 10007, 100_003, 1_000_003] {
            let dev = (local_factor(EulerKind::A3, p) - Dd::ONE).to_f64();
            let pf = p as f64;
            assert!((dev * pf).abs() < 20.0 / pf);
            // (1-x)^4 (1+4x+x^2) = 1 - 9x^2 + O(x^3)
            assert!((dev * pf * pf + 9.0).abs() < 100.0 / pf, "p = {p}");
        }
    }

    #[test]
    fn log_coefficients_reproduce_local_factor() {
        for kind in [EulerKind::A4, EulerKind::A3, EulerKind::CalA, EulerKind::DiagonalCorrection] {
            let b = kind_log_coefficients(kind, 80);
            assert_eq!(b[1].to_f64(), 0.0, "{kind:?}");
            let p = 1009.0;
            let mut s = Dd::ZERO;
            for k in (2..=80).rev() {
                s += b[k] * Dd::new(p).recip().powi(k as i32);
            }
            let direct = local_factor(kind, 1009).ln();
            assert!((s - direct).to_f64().abs() < 1e-30, "{kind:?}");
        }
    }

    #[test]
    fn tail_bound_monotone() {
        let mut last = f64::INFINITY;
        for p in [2u64, 10, 50, 100, 1000, 10_000] {
            let v = euler_constant(EulerKind::A4, p).unwrap();
            assert!(v.tail_bound < last, "cutoff {p}");
            last = v.tail_bound;
        }
    }

    #[test]
    fn accelerated_agrees_with_long_partial_product() {
        // independent route: plain product to 2e6 plus the leading tail -36 sum_{p>P} p^-2
        let acc = euler_constant_accelerated(EulerKind::A4, 1000).unwrap();
        let primes = primes_up_to(2_000_000);
        let mut log_sum = 0.0f64;
        let mut comp = 0.0f64;
        for &p in &primes {
            let x = 1.0 / p as f64;
            let term = 9.0 * (-x).ln_1p() + (9.0 * x + 9.0 * x * x + x * x * x).ln_1p();
            let y = term - comp;
            let t = log_sum + y;
            comp = (t - log_sum) - y;
            log_sum = t;
        }
        // sum_{p > P} p^-2 ~ E_1(log P) by the prime number theorem
        let y = 2e6f64.ln();
        let e1 = (-y).exp() / y * (1.0 - 1.0 / y + 2.0 / (y * y) - 6.0 / y.powi(3));
        let oracle = (log_sum - 36.0 * e1).exp();
        assert!((acc.value.to_f64() - oracle).abs() < 1e-9 * oracle, "{} vs {oracle}", acc.value);
        // mpmath: exp(sum_{p<=1000} log f + sum_k b_k (primezeta(k) - sum_{p<=1000} p^-k)), 30 digits
        let reference = 2.146_814_097_756_221_8e-4;
        assert!((acc.value.to_f64() - reference).abs() < 1e-15 * reference);
        assert!(acc.tail_bound < 1e-20);
    }

    #[test]
    fn cal_a_equals_a4() {
        let a = euler_constant_accelerated(EulerKind::CalA, 100_000).unwrap();
        let b = euler_constant_accelerated(EulerKind::A4, 100_000).unwrap();
        assert!((a.value - b.value).to_f64().abs() < a.tail_bound + b.tail_bound);
    }
}
