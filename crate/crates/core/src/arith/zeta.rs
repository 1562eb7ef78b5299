//! Riemann zeta by Euler-Maclaurin, kept separate from the Hurwitz evaluator so that
//! identity checks do not share code with the L-function module.

use num_complex::Complex64;

use crate::numeric::Dd;

/// B_2, B_4, ..., B_30 as exact fractions.
pub(crate) const BERNOULLI_EVEN: [(i128, i128); 15] = [
    (1, 6),
    (-1, 30),
    (1, 42),
    (-1, 30),
    (5, 66),
    (-691, 2730),
    (7, 6),
    (-3617, 510),
    (43867, 798),
    (-174611, 330),
    (854513, 138),
    (-236364091, 2730),
    (8553103, 6),
    (-23749461029, 870),
    (8615841276005, 14322),
];

/// zeta(s) for integer s >= 2 in double-double precision.
pub fn zeta_dd(s: u32) -> Dd {
    assert!(s >= 2, "zeta_dd needs s >= 2");
    let n: u32 = 48;
    let mut sum = Dd::ZERO;
    // small terms first
    for k in (1..n).rev() {
        sum += Dd::new(k as f64).recip().powi(s as i32);
    }
    let nn = Dd::new(n as f64);
    let n_pow = nn.recip().powi(s as i32); // N^{-s}
    sum += n_pow * nn / Dd::new((s - 1) as f64);
    sum += n_pow.mul_f64(0.5);
    // sum_k B_{2k}/(2k)! * s(s+1)...(s+2k-2) * N^{-s-2k+1}
    let inv_n2 = (nn * nn).recip();
    let mut rising = Dd::new(s as f64); // s (s+1) ... (s+2k-2)
    let mut fact = Dd::new(2.0); // (2k)!
    let mut pw = n_pow / nn; // N^{-s-1}
    for (k, &(num, den)) in BERNOULLI_EVEN.iter().enumerate() {
        let k = k as u32 + 1;
        if k > 1 {
            rising = rising * Dd::new((s + 2 * k - 3) as f64) * Dd::new((s + 2 * k - 2) as f64);
            fact = fact * Dd::new((2 * k - 1) as f64) * Dd::new((2 * k) as f64);
            pw = pw * inv_n2;
        }
        let term = Dd::from_ratio(num, den) / fact * rising * pw;
        sum += term;
        if term.hi.abs() < 1e-36 {
            break;
        }
    }
    sum
}

/// zeta(s) for complex s != 1, Euler-Maclaurin with 8 correction terms.
pub fn zeta_em(s: Complex64) -> Complex64 {
    let n = 20 + s.norm().ceil() as u64;
    let one = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for k in (1..n).rev() {
        sum += (-s * (k as f64).ln()).exp();
    }
    let nf = n as f64;
    let n_pow = (-s * nf.ln()).exp();
    sum += n_pow * nf / (s - one) + n_pow * 0.5;
    let mut rising = s;
    let mut fact = 2.0;
    let mut pw = n_pow / nf;
    for (k, &(num, den)) in BERNOULLI_EVEN.iter().take(8).enumerate() {
        let k = k as f64 + 1.0;
        if k > 1.0 {
            rising = rising * (s + (2.0 * k - 3.0)) * (s + (2.0 * k - 2.0));
            fact *= (2.0 * k - 1.0) * (2.0 * k);
            pw /= nf * nf;
        }
        sum += rising * pw * (num as f64 / den as f64 / fact);
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta2_double_double() {
        // pi^2/6 with pi in double-double
        let pi = Dd {
            hi: std::f64::consts::PI,
            lo: 1.224_646_799_147_353_2e-16,
        };
        let want = pi * pi / Dd::new(6.0);
        assert!((zeta_dd(2) - want).hi.abs() < 1e-30);
    }

    #[test]
    fn zeta4_double_double() {
        let pi = Dd {
            hi: std::f64::consts::PI,
            lo: 1.224_646_799_147_353_2e-16,
        };
        let want = pi.powi(4) / Dd::new(90.0);
        assert!((zeta_dd(4) - want).hi.abs() < 1e-30);
    }

    #[test]
    fn zeta_em_values() {
        let z = zeta_em(Complex64::new(2.0, 0.0));
        assert!((z.re - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-14);
        // zeta(1/2 + 14.134725141734693i) is a zero
        let z = zeta_em(Complex64::new(0.5, 14.134_725_141_734_693));
        assert!(z.norm() < 1e-12, "{z}");
        // zeta(0) = -1/2
        assert!((zeta_em(Complex64::new(0.0, 0.0)).re + 0.5).abs() < 1e-14);
    }
}
