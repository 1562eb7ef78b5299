//! L(s, chi) through Hurwitz zeta, the completed Lambda, the functional equation and
//! Ramachandra's decomposition of L^4.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::arith::sieve_tables;
use crate::characters::{root_number, DirichletCharacter, Parity};
use crate::error::{invalid, Error, Result};
use crate::numeric::quad::{trapezoid, QuadratureSpec};
use crate::special::ln_gamma_unchecked;

const BERNOULLI_EVEN: [f64; 14] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
];

pub const DEFAULT_EM_TERMS: usize = 12;

#[inline]
fn cpow_real(base: f64, e: Complex64) -> Complex64 {
    (e * base.ln()).exp()
}

/// zeta(s, a) without the (N+a)^{1-s}/(s-1) term; the caller adds it (or its limit).
fn hurwitz_regular(s: Complex64, a: f64, em_terms: usize, shift: usize) -> (Complex64, f64) {
    let n = shift.max(10 + s.im.abs().ceil() as usize + s.re.abs().ceil() as usize);
    let mut sum = Complex64::new(0.0, 0.0);
    for k in (0..n).rev() {
        sum += cpow_real(k as f64 + a, -s);
    }
    let na = n as f64 + a;
    let na_pow = cpow_real(na, -s);
    sum += na_pow * 0.5;
    let mut rising = s;
    let mut fact = 2.0;
    let mut pw = na_pow / na;
    for (k, b) in BERNOULLI_EVEN.iter().take(em_terms).enumerate() {
        let k = k as f64 + 1.0;
        if k > 1.0 {
            rising = rising * (s + (2.0 * k - 3.0)) * (s + (2.0 * k - 2.0));
            fact *= (2.0 * k - 1.0) * (2.0 * k);
            pw /= na * na;
        }
        sum += rising * pw * (b / fact);
    }
    (sum, na)
}

/// Hurwitz zeta by Euler-Maclaurin with the given correction depth and minimal shift.
pub fn hurwitz_zeta_with(s: Complex64, a: f64, em_terms: usize, shift: usize) -> Result<Complex64> {
    if (s - 1.0).norm() < 1e-14 {
        return Err(Error::Pole("Hurwitz zeta at s = 1".into()));
    }
    if !(a > 0.0 && a <= 1.0) {
        return invalid(format!("Hurwitz parameter a = {a} outside (0, 1]"));
    }
    let (reg, na) = hurwitz_regular(s, a, em_terms, shift);
    Ok(reg + cpow_real(na, Complex64::new(1.0, 0.0) - s) / (s - 1.0))
}

pub fn hurwitz_zeta(s: Complex64, a: f64) -> Result<Complex64> {
    hurwitz_zeta_with(s, a, DEFAULT_EM_TERMS, 0)
}

/// Evaluator of L(s, chi) = q^{-s} sum_{a mod q} chi(a) zeta(s, a/q).
#[derive(Clone, Debug)]
pub struct LEvaluator {
    pub character: DirichletCharacter,
    pub hurwitz_em_terms: usize,
    pub series_shift: usize,
}

impl LEvaluator {
    pub fn new(character: DirichletCharacter) -> Self {
        LEvaluator {
            character,
            hurwitz_em_terms: DEFAULT_EM_TERMS,
            series_shift: 0,
        }
    }

    pub fn eval(&self, s: Complex64) -> Result<Complex64> {
        let chi = &self.character;
        let q = chi.modulus;
        let near_one = (s - 1.0).norm() < 1e-12;
        if near_one && chi.is_principal() {
            return Err(Error::Pole("L(s, chi_0) at s = 1".into()));
        }
        let mut total = Complex64::new(0.0, 0.0);
        for a in 1..=q {
            let v = chi.value(a);
            if v.norm() == 0.0 {
                continue;
            }
            let x = a as f64 / q as f64;
            let (reg, na) = hurwitz_regular(s, x, self.hurwitz_em_terms, self.series_shift);
            // sum_a chi(a) = 0 for chi non-principal, so the singular term has a finite limit
            let sing = if near_one {
                Complex64::new(-na.ln(), 0.0)
            } else {
                cpow_real(na, Complex64::new(1.0, 0.0) - s) / (s - 1.0)
            };
            total += v * (reg + sing);
        }
        Ok(total * cpow_real(q as f64, -s))
    }
}

pub fn l_eval(chi: &DirichletCharacter, s: Complex64) -> Result<Complex64> {
    LEvaluator::new(chi.clone()).eval(s)
}

/// Hurwitz values zeta(s, a/q) for all a coprime to q, shared by every character mod q.
#[derive(Clone, Debug)]
pub struct HurwitzBatch {
    pub modulus: u64,
    residues: Vec<u64>,
    em_terms: usize,
}

impl HurwitzBatch {
    pub fn new(q: u64) -> Self {
        let residues = (1..=q).filter(|&a| crate::arith::gcd(a, q) == 1).collect();
        HurwitzBatch {
            modulus: q,
            residues,
            em_terms: DEFAULT_EM_TERMS,
        }
    }

    /// q^{-s} zeta(s, a/q) for each unit a, in the order of `residues`.
    pub fn scaled_values(&self, s: Complex64) -> Result<Vec<Complex64>> {
        let q = self.modulus as f64;
        let scale = cpow_real(q, -s);
        self.residues
            .iter()
            .map(|&a| Ok(hurwitz_zeta_with(s, a as f64 / q, self.em_terms, 0)? * scale))
            .collect()
    }

    pub fn residues(&self) -> &[u64] {
        &self.residues
    }

    /// L(s, chi) from precomputed scaled Hurwitz values.
    pub fn l_value(&self, chi: &DirichletCharacter, scaled: &[Complex64]) -> Complex64 {
        self.residues
            .iter()
            .zip(scaled)
            .map(|(&a, &h)| chi.value(a) * h)
            .sum()
    }
}

fn check_primitive_even(chi: &DirichletCharacter) -> Result<()> {
    if chi.parity != Parity::Even {
        return Err(Error::OddCharacter);
    }
    if !chi.is_primitive {
        return Err(Error::NotPrimitive {
            modulus: chi.modulus,
            conductor: chi.conductor,
        });
    }
    Ok(())
}

/// The factor (q/pi)^{s/2} Gamma(1/4 + s/2) of Lambda(1/2 + s).
#[inline]
pub fn gamma_factor(q: u64, s: Complex64) -> Complex64 {
    ((s * 0.5) * (q as f64 / PI).ln() + ln_gamma_unchecked(s * 0.5 + 0.25)).exp()
}

/// Lambda(1/2 + s, chi) = (q/pi)^{s/2} Gamma(1/4 + s/2) L(1/2 + s, chi).
pub fn lambda_eval(chi: &DirichletCharacter, s: Complex64) -> Result<Complex64> {
    check_primitive_even(chi)?;
    Ok(gamma_factor(chi.modulus, s) * l_eval(chi, s + 0.5)?)
}

/// Completed L-function with its Gauss-sum root number.
#[derive(Clone, Debug)]
pub struct CompletedL {
    pub evaluator: LEvaluator,
    pub root_number: Complex64,
}

impl CompletedL {
    pub fn new(chi: &DirichletCharacter) -> Result<Self> {
        check_primitive_even(chi)?;
        Ok(CompletedL {
            evaluator: LEvaluator::new(chi.clone()),
            root_number: root_number(chi)?,
        })
    }

    pub fn lambda(&self, s: Complex64) -> Result<Complex64> {
        Ok(gamma_factor(self.evaluator.character.modulus, s) * self.evaluator.eval(s + 0.5)?)
    }
}

/// Relative residual of Lambda(1/2+s, chi) = eps_chi Lambda(1/2-s, conj chi).
pub fn fe_residual(chi: &DirichletCharacter, s: Complex64) -> Result<f64> {
    let lhs = lambda_eval(chi, s)?;
    let eps = root_number(chi)?;
    let rhs = eps * lambda_eval(&chi.conj(), -s)?;
    Ok((lhs - rhs).norm() / lhs.norm().max(1e-30))
}

/// F(1/2 + s) = eps^4 (pi/q)^{4s} Gamma(1/4 - s/2)^4 / Gamma(1/4 + s/2)^4.
pub fn f_factor(eps: Complex64, q: u64, s: Complex64) -> Complex64 {
    let lg = (ln_gamma_unchecked(Complex64::new(0.25, 0.0) - s * 0.5)
        - ln_gamma_unchecked(s * 0.5 + 0.25))
        * 4.0;
    eps.powi(4) * (s * 4.0 * (PI / q as f64).ln() + lg).exp()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RamachandraTerms {
    pub j1: Complex64,
    pub j2: Complex64,
    pub j3: Complex64,
    pub j4: Complex64,
    /// Residue term, zero for q >= 2.
    pub j5: Complex64,
}

impl RamachandraTerms {
    pub fn combined(&self) -> Complex64 {
        self.j1 + self.j2 - self.j3 - self.j4 - self.j5
    }
}

struct RamContext<'a> {
    chi: &'a DirichletCharacter,
    conj: DirichletCharacter,
    eps: Complex64,
    tau4: Vec<u64>,
    s0: Complex64,
    x: f64,
}

impl RamContext<'_> {
    /// sum_{n <= X} tau_4(n) conj chi(n) n^{-e}
    fn short_sum(&self, e: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for n in (1..=self.x.floor() as usize).rev() {
            let v = self.conj.value(n as u64);
            if v.norm() != 0.0 {
                acc += v * self.tau4[n] as f64 * cpow_real(n as f64, -e);
            }
        }
        acc
    }

    fn gamma_x(&self, w: Complex64) -> Complex64 {
        (ln_gamma_unchecked(w) + w * self.x.ln()).exp()
    }

    fn line_integral<F>(&self, sigma: f64, spec: &QuadratureSpec, mut body: F) -> Result<Complex64>
    where
        F: FnMut(Complex64) -> Result<Complex64>,
    {
        let mut err = None;
        let r = trapezoid(
            |v| {
                let w = Complex64::new(sigma, v);
                match body(w) {
                    Ok(val) => val,
                    Err(e) => {
                        err.get_or_insert(e);
                        Complex64::new(0.0, 0.0)
                    }
                }
            },
            -spec.truncation_radius,
            spec.truncation_radius,
            spec,
        )?;
        if let Some(e) = err {
            return Err(e);
        }
        Ok(r.value / (2.0 * PI))
    }

    fn j4_on(&self, sigma: f64, spec: &QuadratureSpec) -> Result<Complex64> {
        let q = self.chi.modulus;
        let one = Complex64::new(1.0, 0.0);
        self.line_integral(sigma, spec, |w| {
            let f = f_factor(self.eps, q, self.s0 + w - 0.5);
            Ok(f * self.short_sum(one - self.s0 - w) * self.gamma_x(w))
        })
    }
}

fn ram_context(chi: &DirichletCharacter, c: f64, t: f64, x: f64) -> Result<RamContext<'_>> {
    check_primitive_even(chi)?;
    if chi.modulus < 2 {
        return invalid("Ramachandra terms need q >= 2 (the residue term is not evaluated)");
    }
    if !(0.0..=0.01).contains(&c) {
        return invalid(format!("c = {c} outside [0, 1/100]"));
    }
    if !(x >= 1.0 && x.is_finite()) {
        return invalid("X must be at least 1");
    }
    // e^{-n/X} < 1e-18 beyond 41.45 X
    let n_max = (41.45 * x).ceil() as usize + 1;
    let tau4 = sieve_tables(n_max)?.tau4;
    Ok(RamContext {
        chi,
        conj: chi.conj(),
        eps: root_number(chi)?,
        tau4,
        s0: Complex64::new(0.5 + c, t),
        x,
    })
}

/// The five terms of Ramachandra's identity for L(1/2 + c + it, chi)^4.
pub fn ramachandra_terms(
    chi: &DirichletCharacter,
    c: f64,
    t: f64,
    x: f64,
    spec: &QuadratureSpec,
) -> Result<RamachandraTerms> {
    let ctx = ram_context(chi, c, t, x)?;
    let q = chi.modulus;
    let s0 = ctx.s0;
    let one = Complex64::new(1.0, 0.0);

    let mut j1 = Complex64::new(0.0, 0.0);
    for n in (1..ctx.tau4.len()).rev() {
        let v = chi.value(n as u64);
        if v.norm() != 0.0 {
            j1 += v * (ctx.tau4[n] as f64 * (-(n as f64) / x).exp()) * cpow_real(n as f64, -s0);
        }
    }

    let j2 = f_factor(ctx.eps, q, s0 - 0.5) * ctx.short_sum(one - s0);

    let conj_eval = LEvaluator::new(ctx.conj.clone());
    let j3 = ctx.line_integral(-0.75, spec, |w| {
        let e = one - s0 - w;
        let tail = conj_eval.eval(e)?.powi(4) - ctx.short_sum(e);
        Ok(f_factor(ctx.eps, q, s0 + w - 0.5) * tail * ctx.gamma_x(w))
    })?;

    let j4 = ctx.j4_on(0.25, spec)?;

    Ok(RamachandraTerms {
        j1,
        j2,
        j3,
        j4,
        j5: Complex64::new(0.0, 0.0),
    })
}

/// J4 on the line Re w = sigma (0 < sigma < 1/2 - c), for contour-shift checks.
pub fn ramachandra_j4_on_line(
    chi: &DirichletCharacter,
    c: f64,
    t: f64,
    x: f64,
    sigma: f64,
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    if !(sigma > 0.0 && sigma < 0.5 - c) {
        return invalid("J4 line must satisfy 0 < sigma < 1/2 - c");
    }
    ram_context(chi, c, t, x)?.j4_on(sigma, spec)
}

/// Default quadrature for the Ramachandra line integrals.
pub fn ramachandra_spec() -> QuadratureSpec {
    QuadratureSpec {
        abs_tol: 1e-13,
        rel_tol: 1e-11,
        initial_step: 0.16,
        truncation_radius: 40.0,
        max_refinements: 6,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::build_group;

    fn quad5() -> DirichletCharacter {
        build_group(5).unwrap().primitive_even().next().unwrap().clone()
    }

    #[test]
    fn hurwitz_classical_values() {
        let z = hurwitz_zeta(Complex64::new(2.0, 0.0), 1.0).unwrap();
        assert!((z.re - PI * PI / 6.0).abs() < 1e-11 * PI * PI / 6.0);
        for s in [Complex64::new(2.0, 0.0), Complex64::new(0.5, 3.0), Complex64::new(-0.7, 12.0)] {
            let lhs = hurwitz_zeta(s, 0.5).unwrap();
            let rhs = (cpow_real(2.0, s) - 1.0) * crate::arith::zeta_em(s);
            assert!((lhs - rhs).norm() < 1e-10 * rhs.norm().max(1.0), "{s}");
        }
        let s = Complex64::new(0.5, 3.0);
        let a = hurwitz_zeta_with(s, 0.3, 6, 0).unwrap();
        let b = hurwitz_zeta_with(s, 0.3, 10, 0).unwrap();
        assert!((a - b).norm() < 1e-10);
        assert!(hurwitz_zeta(Complex64::new(1.0, 0.0), 0.5).is_err());
    }

    #[test]
    fn l_matches_direct_series() {
        let chi = quad5();
        let l = l_eval(&chi, Complex64::new(2.0, 0.0)).unwrap();
        let mut direct = 0.0;
        for n in (1..=1_000_000u64).rev() {
            direct += chi.value(n).re / (n as f64 * n as f64);
        }
        assert!((l.re - direct).abs() < 1e-9 && l.im.abs() < 1e-12);
        let trivial = build_group(1).unwrap().characters[0].clone();
        let z = l_eval(&trivial, Complex64::new(2.0, 0.0)).unwrap();
        assert!((z.re - PI * PI / 6.0).abs() < 1e-12);
        assert!(l_eval(&trivial, Complex64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn l_at_one_non_principal() {
        // L(1, chi_5) = 2 log(golden ratio) / sqrt 5
        let chi = quad5();
        let l = l_eval(&chi, Complex64::new(1.0, 0.0)).unwrap();
        let want = 2.0 * ((1.0 + 5f64.sqrt()) / 2.0).ln() / 5f64.sqrt();
        assert!((l.re - want).abs() < 1e-12, "{l}");
    }

    #[test]
    fn schwarz_symmetry() {
        let g = build_group(11).unwrap();
        for chi in &g.characters {
            let s = Complex64::new(0.3, 4.2);
            let a = l_eval(&chi.conj(), s.conj()).unwrap();
            let b = l_eval(chi, s).unwrap().conj();
            assert!((a - b).norm() < 1e-12 * b.norm().max(1.0));
        }
    }

    #[test]
    fn zeta_lambda_symmetric() {
        let trivial = build_group(1).unwrap().characters[0].clone();
        let s = Complex64::new(0.2, 1.3);
        let a = lambda_eval(&trivial, s).unwrap();
        let b = lambda_eval(&trivial, -s).unwrap();
        assert!((a - b).norm() < 1e-9 * a.norm());
    }

    #[test]
    fn functional_equation_small_moduli() {
        for q in [5u64, 8, 13] {
            let g = build_group(q).unwrap();
            for chi in g.primitive_even() {
                for s in [Complex64::new(0.1, 0.0), Complex64::new(0.2, 1.0)] {
                    assert!(fe_residual(chi, s).unwrap() < 1e-8, "q = {q}, s = {s}");
                    let a = fe_residual(chi, s).unwrap();
                    let b = fe_residual(&chi.conj(), s.conj()).unwrap();
                    assert!((a - b).abs() < 1e-12);
                }
            }
        }
        // real character at s = 0: the residual is |1 - eps|
        let chi = quad5();
        let r = fe_residual(&chi, Complex64::new(0.0, 0.0)).unwrap();
        assert!((r - (1.0 - root_number(&chi).unwrap()).norm()).abs() < 1e-12);
        let odd = build_group(5).unwrap().characters.iter().find(|c| c.parity == Parity::Odd).unwrap().clone();
        assert!(lambda_eval(&odd, Complex64::new(0.1, 0.0)).is_err());
    }

    #[test]
    fn lambda8_decays() {
        for q in [5u64, 13, 29, 53] {
            let g = build_group(q).unwrap();
            if let Some(chi) = g.primitive_even().next() {
                let v = lambda_eval(chi, Complex64::new(0.0, 40.0)).unwrap().norm().powi(8);
                assert!(v < 1e-20, "q = {q}: {v}");
            };
        }
    }

    #[test]
    fn ramachandra_identity() {
        let chi = quad5();
        let spec = ramachandra_spec();
        let t = ramachandra_terms(&chi, 0.01, 0.7, 50.0, &spec).unwrap();
        let l4 = l_eval(&chi, Complex64::new(0.51, 0.7)).unwrap().powi(4);
        let res = (l4 - t.combined()).norm() / l4.norm();
        assert!(res < 1e-5, "{res}: {t:?} vs {l4}");
        assert!(ramachandra_terms(&build_group(1).unwrap().characters[0], 0.0, 0.0, 50.0, &spec).is_err());
    }

    #[test]
    fn j4_contour_shift() {
        let chi = quad5();
        let spec = ramachandra_spec();
        let a = ramachandra_j4_on_line(&chi, 0.01, 0.7, 50.0, 0.25, &spec).unwrap();
        let b = ramachandra_j4_on_line(&chi, 0.01, 0.7, 50.0, 0.125, &spec).unwrap();
        assert!((a - b).norm() < 1e-6 * a.norm().max(1e-300), "{a} {b}");
    }
}
