//! Complex Gamma, the kernel G(s, t), the Gamma-ratio function H(u, v), and the
//! integral of |Gamma(1/4 + it/2)|^8.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
pub use crate::numeric::quad::QuadratureSpec;
use crate::numeric::quad::trapezoid_real;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Distance from z to the nearest non-positive integer (infinite when Re z > 0.5).
fn pole_distance(z: Complex64) -> f64 {
    if z.re > 0.5 {
        return f64::INFINITY;
    }
    let k = z.re.round().min(0.0);
    (z - k).norm()
}

fn lanczos_ln_gamma(z: Complex64) -> Complex64 {
    let zm = z - 1.0;
    let mut a = Complex64::new(LANCZOS[0], 0.0);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (zm + i as f64);
    }
    let t = zm + LANCZOS_G + 0.5;
    (zm + 0.5) * t.ln() - t + LN_SQRT_2PI + a.ln()
}

/// log Gamma without the pole check, for hot loops whose arguments are known to be safe.
#[inline]
pub fn ln_gamma_unchecked(z: Complex64) -> Complex64 {
    if z.re >= 0.5 {
        return lanczos_ln_gamma(z);
    }
    // shift right with principal logs; keeps the branch continuous off the negative axis
    let n = (0.5 - z.re).ceil();
    let mut shift = Complex64::new(0.0, 0.0);
    let mut w = z;
    for _ in 0..n as usize {
        shift += w.ln();
        w += 1.0;
    }
    lanczos_ln_gamma(w) - shift
}

/// log Gamma(z) on the branch continuous in C minus (-inf, 0], real on the positive axis.
pub fn log_gamma(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::InvalidParameter(format!("log_gamma of non-finite {z}")));
    }
    if pole_distance(z) < 1e-14 {
        return Err(Error::Pole(format!("Gamma at {z}")));
    }
    Ok(ln_gamma_unchecked(z))
}

pub fn gamma(z: Complex64) -> Result<Complex64> {
    Ok(log_gamma(z)?.exp())
}

/// Real Gamma for x > 0.
pub fn gamma_real(x: f64) -> f64 {
    lanczos_ln_gamma(Complex64::new(x, 0.0)).re.exp()
}

/// log G(s, t) = 4 [log Gamma((s+it)/2) + log Gamma((s-it)/2)].
#[inline]
pub fn ln_g_kernel_unchecked(s: Complex64, t: Complex64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    let a = (s + i * t) * 0.5;
    let b = (s - i * t) * 0.5;
    (ln_gamma_unchecked(a) + ln_gamma_unchecked(b)) * 4.0
}

/// G(s, t) = Gamma^4((s+it)/2) Gamma^4((s-it)/2), formed in log space.
pub fn g_kernel(s: Complex64, t: f64) -> Result<Complex64> {
    g_kernel_c(s, Complex64::new(t, 0.0))
}

/// G(s, t) for complex t.
pub fn g_kernel_c(s: Complex64, t: Complex64) -> Result<Complex64> {
    let i = Complex64::new(0.0, 1.0);
    for arg in [(s + i * t) * 0.5, (s - i * t) * 0.5] {
        if pole_distance(arg) < 1e-12 {
            return Err(Error::Pole(format!("G kernel Gamma argument {arg}")));
        }
    }
    Ok(ln_g_kernel_unchecked(s, t).exp())
}

/// G(1/2, t) = |Gamma(1/4 + it/2)|^8 for real t.
#[inline]
pub fn g_half(t: f64) -> f64 {
    (8.0 * ln_gamma_unchecked(Complex64::new(0.25, 0.5 * t)).re).exp()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gamma8 {
    pub value: f64,
    /// Change between the last two step halvings.
    pub error: f64,
    /// Stirling bound on the integral beyond the truncation radius.
    pub tail_bound: f64,
}

/// Stirling bound for int_{|t| > r} |Gamma(1/4 + it/2)|^8 dt, valid for r >= 2.
pub fn gamma8_tail_bound(r: f64) -> f64 {
    // |Gamma(1/4 + iy)|^8 <= 1.1 (2 pi)^4 y^-2 e^{-4 pi y} for y >= 1, with y = t/2
    let y = 0.5 * r.max(2.0);
    2.0 * 1.1 * (2.0 * PI).powi(4) * y.powi(-2) * (-4.0 * PI * y).exp() / (2.0 * PI)
}

/// int_{-R}^{R} |Gamma(1/4 + it/2)|^8 dt by the trapezoid rule, plus the tail bound beyond R.
pub fn gamma8_integral(spec: &QuadratureSpec) -> Result<Gamma8> {
    spec.validate()?;
    let (half, error) = trapezoid_real(g_half, 0.0, spec.truncation_radius, spec)?;
    Ok(Gamma8 {
        value: 2.0 * half,
        error: 2.0 * error,
        tail_bound: gamma8_tail_bound(spec.truncation_radius),
    })
}

fn guard(label: &str, z: Complex64) -> Result<()> {
    if pole_distance(z) < 1e-6 {
        Err(Error::Pole(format!(
            "H(u, v): Gamma argument {label} = {z} is within 1e-6 of a pole"
        )))
    } else {
        Ok(())
    }
}

/// The three-term Gamma sum H(u, v) and its single-ratio form, evaluated independently.
pub fn h_dual(u: Complex64, v: Complex64) -> Result<(Complex64, Complex64)> {
    let one = Complex64::new(1.0, 0.0);
    let args = [
        ("u", u),
        ("v-u", v - u),
        ("v", v),
        ("1-v", one - v),
        ("1+u-v", one + u - v),
        ("1-u", one - u),
        ("u/2", u * 0.5),
        ("(1-v)/2", (one - v) * 0.5),
        ("(v-u)/2", (v - u) * 0.5),
        ("(1-u)/2", (one - u) * 0.5),
        ("v/2", v * 0.5),
        ("(1-v+u)/2", (one - v + u) * 0.5),
    ];
    for (label, z) in args {
        guard(label, z)?;
    }
    let lg = ln_gamma_unchecked;
    let three = (lg(u) + lg(v - u) - lg(v)).exp()
        + (lg(u) + lg(one - v) - lg(one + u - v)).exp()
        + (lg(v - u) + lg(one - v) - lg(one - u)).exp();
    let ratio = (0.5 * PI.ln() + lg(u * 0.5) + lg((one - v) * 0.5) + lg((v - u) * 0.5)
        - lg((one - u) * 0.5)
        - lg(v * 0.5)
        - lg((one - v + u) * 0.5))
        .exp();
    Ok((three, ratio))
}

/// Scanned supremum of |Gamma(1/4 - s/2)/Gamma(1/4 + s/2)| (|s|+1)^{Re s} over
/// Re s in [-1, 1/3], |Im s| <= 10^3 (see the scan test below). The maximum, about 5.95,
/// sits at s = 1/3.
pub const GAMMA_RATIO_BOUND: f64 = 6.0;

/// |Gamma(1/4 - s/2) / Gamma(1/4 + s/2)| (|s| + 1)^{Re s} for Re s in [-1, 1/3].
pub fn gamma_ratio_bound_check(s: Complex64) -> Result<f64> {
    if !(s.re >= -1.0 && s.re <= 1.0 / 3.0) {
        return Err(Error::InvalidParameter(format!(
            "Re s = {} outside [-1, 1/3]",
            s.re
        )));
    }
    let num = Complex64::new(0.25, 0.0) - s * 0.5;
    let den = Complex64::new(0.25, 0.0) + s * 0.5;
    if pole_distance(den) < 1e-13 {
        // 1/Gamma vanishes at s = -1/2
        return Ok(0.0);
    }
    let ratio = (ln_gamma_unchecked(num) - ln_gamma_unchecked(den)).exp().norm();
    Ok(ratio * (s.norm() + 1.0).powf(s.re))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Stirling series at z + n, brought back by the recurrence; independent of Lanczos.
    fn ln_gamma_stirling(z: Complex64) -> Complex64 {
        let n = 30;
        let w = z + n as f64;
        let bern = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0, 7.0 / 6.0];
        let mut s = (w - 0.5) * w.ln() - w + LN_SQRT_2PI;
        let mut wp = w;
        for (k, b) in bern.iter().enumerate() {
            let k = (k + 1) as f64;
            s += b / (2.0 * k * (2.0 * k - 1.0)) / wp;
            wp *= w * w;
        }
        let mut shift = Complex64::new(0.0, 0.0);
        for k in 0..n {
            shift += (z + k as f64).ln();
        }
        s - shift
    }

    #[test]
    fn gamma_half_is_sqrt_pi() {
        let g = gamma(Complex64::new(0.5, 0.0)).unwrap();
        assert!((g.re - PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn gamma_quarter_matches_oracle() {
        let z = Complex64::new(0.25, 0.0);
        let oracle = ln_gamma_stirling(z).exp().re;
        assert!((gamma(z).unwrap().re - oracle).abs() < 1e-12 * oracle);
        // 3.6256099082219083119306851558676720029951676828800654674333799956991924353872
        assert!((oracle - 3.625_609_908_221_908).abs() < 1e-13);
    }

    #[test]
    fn matches_stirling_oracle_off_axis() {
        for z in [
            Complex64::new(0.3, 7.0),
            Complex64::new(2.5, -40.0),
            Complex64::new(-1.7, 3.0),
            Complex64::new(0.25, 30.0),
        ] {
            let a = log_gamma(z).unwrap();
            let b = ln_gamma_stirling(z);
            assert!((a - b).norm() < 1e-11 * (1.0 + b.norm()), "{z}: {a} vs {b}");
        }
    }

    #[test]
    fn recursion_and_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let z = Complex64::new(rng.gen_range(-4.0..6.0), rng.gen_range(-20.0..20.0));
            let lhs = gamma(z + 1.0).unwrap();
            let rhs = z * gamma(z).unwrap();
            assert!((lhs - rhs).norm() / lhs.norm() < 1e-12, "{z}");
            let c = gamma(z.conj()).unwrap() - gamma(z).unwrap().conj();
            assert!(c.norm() <= 1e-13 * lhs.norm().max(1e-300) / z.norm().max(1e-3) + 1e-300);
        }
    }

    #[test]
    fn stirling_regime() {
        for r in [10.0, 50.0, 200.0, 1000.0] {
            for k in 0..7 {
                let arg = -0.75 * PI + k as f64 * 0.25 * PI;
                let z = Complex64::from_polar(r, arg);
                let lg = log_gamma(z).unwrap();
                let st = 0.5 * (2.0 * PI / z).ln() + z * (z.ln() - 1.0);
                let rel = ((lg - st).exp() - 1.0).norm();
                assert!(rel < 2.0 / r, "z = {z}: {rel}");
            }
        }
    }

    #[test]
    fn poles_rejected() {
        assert!(log_gamma(Complex64::new(0.0, 0.0)).is_err());
        assert!(log_gamma(Complex64::new(-3.0, 0.0)).is_err());
        assert!(log_gamma(Complex64::new(-3.0, 1e-3)).is_ok());
    }

    #[test]
    fn g_kernel_examples() {
        let g0 = g_kernel(Complex64::new(0.5, 0.0), 0.0).unwrap();
        let want = gamma_real(0.25).powi(8);
        assert!((g0.re - want).abs() < 1e-11 * want && g0.im.abs() < 1e-9);
        for t in [0.3, 2.0, 11.0] {
            let g = g_kernel(Complex64::new(0.5, 0.0), t).unwrap();
            let m = gamma(Complex64::new(0.25, t / 2.0)).unwrap().norm().powi(8);
            assert!((g.re - m).abs() < 1e-11 * m && g.im.abs() < 1e-11 * m);
            assert!((g_half(t) - m).abs() < 1e-11 * m);
        }
        let s = Complex64::new(0.7, 0.4);
        let a = g_kernel(s, 1.3).unwrap();
        let b = g_kernel(s, -1.3).unwrap();
        assert!((a - b).norm() < 1e-13 * a.norm());
    }

    #[test]
    fn g_half_decay_rate() {
        let mut worst: f64 = 0.0;
        let mut t = 0.0;
        while t <= 60.0 {
            worst = worst.max(g_half(t) * (2.0 * PI * t).exp());
            t += 0.25;
        }
        assert!(worst < 6e4, "{worst}");
    }

    #[test]
    fn gamma8_refinement_and_truncation() {
        let spec = QuadratureSpec::default().with_radius(30.0);
        let a = gamma8_integral(&spec).unwrap();
        assert!(a.value > 0.0 && a.error < spec.abs_tol.max(spec.rel_tol * a.value));
        let b = gamma8_integral(&spec.with_radius(60.0)).unwrap();
        assert!(b.value >= a.value);
        assert!((b.value - a.value).abs() <= a.tail_bound + 1e-12 * a.value);
        let c = gamma8_integral(&spec.with_radius(6.0)).unwrap();
        assert!(b.value - c.value <= c.tail_bound, "{} {}", b.value - c.value, c.tail_bound);
    }

    #[test]
    fn h_dual_agrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let u = Complex64::new(rng.gen_range(0.1..0.4), rng.gen_range(-10.0..10.0));
            let v = Complex64::new(rng.gen_range(0.5..0.9), rng.gen_range(-10.0..10.0));
            let (a, b) = h_dual(u, v).unwrap();
            assert!((a - b).norm() < 1e-10 * b.norm(), "{u} {v}: {a} {b}");
        }
        let v = Complex64::new(0.7, 0.2);
        let (a, b) = h_dual(v * 0.5, v).unwrap();
        assert!(a.is_finite() && (a - b).norm() < 1e-10 * b.norm());
        assert!(h_dual(Complex64::new(1e-8, 0.0), v).is_err());
    }

    #[test]
    fn gamma_ratio_examples() {
        let v = gamma_ratio_bound_check(Complex64::new(0.0, 3.7)).unwrap();
        assert!((v - 1.0).abs() < 1e-13);
        let v = gamma_ratio_bound_check(Complex64::new(0.25, 50.0)).unwrap();
        assert!(v <= GAMMA_RATIO_BOUND);
        assert!(gamma_ratio_bound_check(Complex64::new(-1.0, 0.0)).unwrap().is_finite());
        assert!(gamma_ratio_bound_check(Complex64::new(0.5, 0.0)).is_err());
    }

    #[test]
    fn gamma_ratio_scan_within_frozen_constant() {
        let mut worst: f64 = 0.0;
        for i in 0..=40 {
            let re = -1.0 + i as f64 * (4.0 / 3.0) / 40.0;
            let mut im = 0.0;
            while im <= 1000.0 {
                for sgn in [1.0, -1.0] {
                    let v = gamma_ratio_bound_check(Complex64::new(re, sgn * im)).unwrap();
                    worst = worst.max(v);
                }
                im += if im < 20.0 { 0.05 } else { 1.0 };
            }
        }
        assert!(worst <= GAMMA_RATIO_BOUND, "{worst}");
    }
}
