//! Double-double arithmetic: an unevaluated sum `hi + lo` with |lo| <= ulp(hi)/2,
//! giving about 106 bits of mantissa.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

const LN2: Dd = Dd {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub const fn new(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    /// Exact for |n| < 2^106.
    pub fn from_i128(n: i128) -> Dd {
        let hi = n as f64;
        let rest = n - hi as i128;
        let (h, l) = quick_two_sum(hi, rest as f64);
        Dd { hi: h, lo: l }
    }

    pub fn from_ratio(num: i128, den: i128) -> Dd {
        Dd::from_i128(num) / Dd::from_i128(den)
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Dd {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    pub fn mul_f64(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        let e = e + self.lo * b;
        let (h, l) = quick_two_sum(p, e);
        Dd { hi: h, lo: l }
    }

    pub fn recip(self) -> Dd {
        Dd::ONE / self
    }

    pub fn sqr(self) -> Dd {
        self * self
    }

    /// Integer power by repeated squaring.
    pub fn powi(self, n: i32) -> Dd {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut base = self;
        let mut e = n as u32;
        let mut acc = Dd::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base.sqr();
            e >>= 1;
        }
        acc
    }

    pub fn exp(self) -> Dd {
        if self.hi == 0.0 {
            return Dd::ONE;
        }
        let k = (self.hi / LN2.hi).round();
        let r = self - LN2.mul_f64(k);
        // exp(r) = (exp(r / 2^8))^(2^8), Taylor on the reduced argument
        let r = r.mul_f64(1.0 / 256.0);
        let mut term = Dd::ONE;
        let mut sum = Dd::ZERO;
        for i in 1..30 {
            term = term * r / Dd::new(i as f64);
            sum += term;
            if term.hi.abs() < 1e-34 {
                break;
            }
        }
        // expm1 squaring keeps the small part accurate
        for _ in 0..8 {
            sum = sum.mul_f64(2.0) + sum.sqr();
        }
        let e = sum + Dd::ONE;
        Dd {
            hi: e.hi * 2f64.powi(k as i32),
            lo: e.lo * 2f64.powi(k as i32),
        }
    }

    /// Natural log by one Newton step on the f64 estimate.
    pub fn ln(self) -> Dd {
        assert!(self.hi > 0.0, "ln of non-positive double-double");
        let l0 = Dd::new(self.hi.ln());
        let r = self * (-l0).exp() - Dd::ONE;
        l0 + r - r.sqr().mul_f64(0.5)
    }

    /// log(1 + x), accurate for small |x|.
    pub fn ln_1p(self) -> Dd {
        if self.hi.abs() > 0.1 {
            return (Dd::ONE + self).ln();
        }
        let mut pow = self;
        let mut sum = Dd::ZERO;
        for k in 1..200 {
            let term = pow / Dd::new(k as f64);
            if k % 2 == 1 {
                sum += term;
            } else {
                sum -= term;
            }
            if term.hi.abs() < 1e-34 * sum.hi.abs().max(1e-300) {
                break;
            }
            pow = pow * self;
        }
        sum
    }

    /// exp(x) - 1, accurate for small |x|.
    pub fn exp_m1(self) -> Dd {
        if self.hi.abs() > 0.1 {
            return self.exp() - Dd::ONE;
        }
        let mut term = Dd::ONE;
        let mut sum = Dd::ZERO;
        for i in 1..60 {
            term = term * self / Dd::new(i as f64);
            sum += term;
            if term.hi.abs() < 1e-34 * sum.hi.abs().max(1e-300) {
                break;
            }
        }
        sum
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Dd {
        Dd::new(x)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (h, l) = quick_two_sum(s, e + f);
        Dd { hi: h, lo: l }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (h, l) = quick_two_sum(p, e);
        Dd { hi: h, lo: l }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (h, l) = quick_two_sum(q1, q2);
        Dd { hi: h, lo: l } + Dd::new(q3)
    }
}

impl AddAssign for Dd {
    fn add_assign(&mut self, b: Dd) {
        *self = *self + b;
    }
}

impl SubAssign for Dd {
    fn sub_assign(&mut self, b: Dd) {
        *self = *self - b;
    }
}

impl MulAssign for Dd {
    fn mul_assign(&mut self, b: Dd) {
        *self = *self * b;
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Dd) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            o => o,
        }
    }
}

impl fmt::Display for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.17e} + {:.3e}", self.hi, self.lo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn third_times_three() {
        let t = Dd::ONE / Dd::new(3.0);
        let e = t * Dd::new(3.0) - Dd::ONE;
        assert!(e.hi.abs() < 1e-31);
    }

    #[test]
    fn ln2_round_trip() {
        let l = Dd::new(2.0).ln();
        assert!((l - LN2).hi.abs() < 1e-31);
        let back = l.exp();
        assert!((back - Dd::new(2.0)).hi.abs() < 1e-30);
    }

    #[test]
    fn exp_of_one_matches_e() {
        // e = 2.718281828459045 + 1.4456468917292502e-16
        let e = Dd::ONE.exp();
        let want = Dd {
            hi: std::f64::consts::E,
            lo: 1.445_646_891_729_250_2e-16,
        };
        assert!((e - want).hi.abs() < 1e-30);
    }

    #[test]
    fn log1p_small_argument() {
        let x = Dd::new(1e-5);
        let l = x.ln_1p();
        let back = l.exp_m1();
        assert!((back - x).hi.abs() < 1e-36);
    }

    #[test]
    fn from_i128_is_exact() {
        let n: i128 = (1 << 100) + 12345;
        let d = Dd::from_i128(n);
        assert_eq!(d.hi as i128 + d.lo as i128, n);
    }

    #[test]
    fn powi_negative() {
        let x = Dd::new(7.0).powi(-3);
        let y = Dd::ONE / Dd::new(343.0);
        assert!((x - y).hi.abs() < 1e-33);
    }
}
