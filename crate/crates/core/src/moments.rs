//! Both sides of the eighth-moment asymptotic at desk scale, the eighth-moment
//! approximate functional equation, the diagonal constant and the hybrid large sieve.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::arith::{euler_constant_accelerated, gcd, local_factor_q, sieve_tables, EulerKind};
use crate::characters::{build_group, phi_flat, DirichletCharacter};
use crate::error::{invalid, Error, Result};
use crate::lfunc::HurwitzBatch;
use crate::numeric::quad::{gauss_legendre_nodes, QuadratureSpec};
use crate::special::{g_half, gamma8_integral, gamma8_tail_bound};
use crate::weights::{psi, psi_mellin, WeightTable, V_DECAY_CONSTANT};

/// The t-integral of |Lambda|^8 is cut at |t| = 40, where |Gamma(1/4 + it/2)|^8 < 1e-50.
pub const T_TRUNCATION: f64 = 40.0;

/// Default quadrature for the t-integral of |Lambda(1/2 + it)|^8.
pub fn lambda8_spec() -> QuadratureSpec {
    QuadratureSpec {
        abs_tol: 1e-300,
        rel_tol: 1e-10,
        initial_step: 0.2,
        truncation_radius: T_TRUNCATION,
        max_refinements: 6,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lambda8 {
    pub q: u64,
    pub character_index: usize,
    pub value: f64,
    /// Change between the last two step halvings.
    pub error: f64,
    /// Gamma decay beyond the truncation times four times the largest |L|^8 sampled
    /// within 2 of the cut.
    pub tail_estimate: f64,
    pub step: f64,
}

/// int |Lambda(1/2 + it, chi)|^8 dt for every primitive even chi mod q, in group order.
///
/// One Hurwitz batch per t node serves all characters. The trapezoid step is halved
/// until every character's integral moves by less than `spec.rel_tol`.
pub fn lambda8_modulus(q: u64, spec: &QuadratureSpec) -> Result<Vec<Lambda8>> {
    spec.validate()?;
    let group = build_group(q)?;
    let chars: Vec<&DirichletCharacter> = group.primitive_even().collect();
    lambda8_chars(q, &chars, spec)
}

/// [`lambda8_modulus`] for a single character.
pub fn lambda8_integral(chi: &DirichletCharacter, spec: &QuadratureSpec) -> Result<Lambda8> {
    spec.validate()?;
    if !chi.is_primitive || chi.parity != crate::characters::Parity::Even {
        return invalid(format!(
            "lambda8_integral needs a primitive even character (modulus {}, index {})",
            chi.modulus, chi.index
        ));
    }
    Ok(lambda8_chars(chi.modulus, &[chi], spec)?.remove(0))
}

fn lambda8_chars(q: u64, chars: &[&DirichletCharacter], spec: &QuadratureSpec) -> Result<Vec<Lambda8>> {
    if chars.is_empty() {
        return Ok(Vec::new());
    }
    let batch = HurwitzBatch::new(q);
    let r = spec.truncation_radius;
    // |L(1/2 + it)|^8 G(1/2, t) for every character at one node
    let node = |t: f64| -> Result<Vec<f64>> {
        let scaled = batch.scaled_values(Complex64::new(0.5, t))?;
        let g = g_half(t);
        Ok(chars
            .iter()
            .map(|c| g * batch.l_value(c, &scaled).norm_sqr().powi(4))
            .collect())
    };
    let sum_nodes = |ts: Vec<f64>| -> Result<(Vec<f64>, Vec<f64>)> {
        let vals = ts.par_iter().map(|&t| node(t)).collect::<Result<Vec<_>>>()?;
        let mut acc = vec![0.0; chars.len()];
        let mut edge = vec![0.0f64; chars.len()];
        for (t, v) in ts.iter().zip(&vals) {
            for k in 0..acc.len() {
                acc[k] += v[k];
                if t.abs() >= r - 2.0 {
                    edge[k] = edge[k].max(v[k] / g_half(*t));
                }
            }
        }
        Ok((acc, edge))
    };
    let mut n = ((2.0 * r) / spec.initial_step).ceil().max(2.0) as usize;
    let mut h = 2.0 * r / n as f64;
    let (mut sum, mut edge) = sum_nodes((0..=n).map(|k| -r + k as f64 * h).collect())?;
    // trapezoid end weights; the integrand is negligible at +-r
    let (ends, _) = sum_nodes(vec![-r, r])?;
    for (s, e) in sum.iter_mut().zip(&ends) {
        *s -= 0.5 * e;
    }
    let mut value: Vec<f64> = sum.iter().map(|s| s * h).collect();
    let mut change = vec![f64::INFINITY; chars.len()];
    for _ in 0..spec.max_refinements {
        let (mid, mid_edge) = sum_nodes((0..n).map(|k| -r + (k as f64 + 0.5) * h).collect())?;
        for k in 0..sum.len() {
            sum[k] += mid[k];
            edge[k] = edge[k].max(mid_edge[k]);
        }
        n *= 2;
        h *= 0.5;
        let next: Vec<f64> = sum.iter().map(|s| s * h).collect();
        change = next.iter().zip(&value).map(|(a, b)| (a - b).abs()).collect();
        value = next;
        if change.iter().zip(&value).all(|(c, v)| *c <= spec.abs_tol.max(spec.rel_tol * v.abs())) {
            break;
        }
    }
    if change.iter().zip(&value).any(|(c, v)| *c > spec.abs_tol.max(spec.rel_tol * v.abs())) {
        return Err(Error::NoConvergence(format!(
            "|Lambda|^8 integral mod {q} after {} halvings (step {h:e})",
            spec.max_refinements
        )));
    }
    let tail_unit = gamma8_tail_bound(r);
    Ok(chars
        .iter()
        .enumerate()
        .map(|(k, c)| Lambda8 {
            q,
            character_index: c.index,
            value: value[k],
            error: change[k],
            tail_estimate: 4.0 * edge[k] * tail_unit,
            step: h,
        })
        .collect())
}

/// Controls for [`afe_rhs`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AfeSpec {
    /// Truncation: m, n <= limit.
    pub limit: u64,
    /// Relative target used to judge the limit against the decay-bound tail.
    pub rel_target: f64,
    /// Pairs with log(mn pi^4 / q^4) above this are dropped; their total is bounded by
    /// `mass_tail` in the report.
    pub log_x_cut: f64,
    /// Return [`Error::InsufficientLimit`] instead of a flagged report.
    pub strict: bool,
}

impl Default for AfeSpec {
    fn default() -> Self {
        AfeSpec {
            limit: 1500,
            rel_target: 1e-2,
            log_x_cut: 8.0,
            strict: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AfeCheck {
    pub q: u64,
    pub character_index: usize,
    /// int |Lambda(1/2 + it, chi)|^8 dt
    pub lhs: f64,
    pub lhs_error: f64,
    /// real part of 2 sum tau_4(m) tau_4(n) chi(m) conj chi(n) V(m, n; q) / sqrt(mn)
    pub rhs: f64,
    pub rhs_imag: f64,
    /// the m = n part of `rhs`
    pub diagonal: f64,
    pub limit: u64,
    /// C limit (log limit)^4 exp(-(limit^2 / q^4)^{1/4}) with C the recorded decay constant.
    pub tail_estimate: f64,
    /// Smallest limit whose decay-bound tail is below rel_target * lhs.
    pub required_limit: u64,
    pub limit_sufficient: bool,
    /// Bound on every omitted pair from int |W| dt and the tau_8 partial-sum bound.
    pub mass_tail: f64,
    pub pairs: usize,
    pub rel_diff: f64,
}

/// Decay-bound tail of the double sum truncated at max(m, n) <= limit.
pub fn afe_tail_estimate(q: u64, limit: u64) -> f64 {
    let n = limit.max(2) as f64;
    V_DECAY_CONSTANT * n * n.ln().powi(4) * (-(n.sqrt() / q as f64)).exp()
}

/// Smallest limit with [`afe_tail_estimate`] below `target` (the estimate first grows, so
/// the search starts past its maximum).
pub fn afe_required_limit(q: u64, target: f64) -> u64 {
    let f = |n: u64| afe_tail_estimate(q, n);
    let mut lo = 2u64;
    while f(lo * 2) > f(lo) {
        lo *= 2;
    }
    let mut hi = lo.max(2);
    while f(hi) >= target {
        hi *= 2;
        if hi > 1 << 50 {
            return u64::MAX;
        }
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if f(mid) < target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Weighted V values tau_4(m) tau_4(n) V(m, n; q) / sqrt(mn) for all pairs that survive the
/// truncation, shared by every character mod q.
#[derive(Clone, Debug)]
pub struct AfeTerms {
    pub q: u64,
    pub limit: u64,
    entries: Vec<(u32, u32, f64)>,
    pub mass_tail: f64,
}

impl AfeTerms {
    pub fn build(q: u64, spec: &AfeSpec) -> Result<Self> {
        if q < 3 {
            return invalid("the AFE needs a modulus with primitive even characters (q >= 3)");
        }
        if spec.limit < 1 || spec.limit > u32::MAX as u64 {
            return invalid(format!("AFE limit {} out of range", spec.limit));
        }
        let table = WeightTable::global();
        if spec.log_x_cut > table.params.l_max {
            return invalid("log_x_cut exceeds the weight table");
        }
        let n_max = spec.limit as usize;
        let tau4 = sieve_tables(n_max)?.tau4;
        let shift = 4.0 * (PI.ln() - (q as f64).ln());
        // mn <= k_cut keeps log(mn pi^4/q^4) <= log_x_cut
        let k_cut = (spec.log_x_cut - shift).exp();
        let rows: Vec<Vec<(u32, u32, f64)>> = (1..=n_max)
            .into_par_iter()
            .map(|m| {
                if gcd(m as u64, q) != 1 {
                    return Vec::new();
                }
                let n_top = ((k_cut / m as f64).floor() as usize).min(n_max);
                let am = tau4[m] as f64 / (m as f64).sqrt();
                (1..=n_top)
                    .filter(|&n| gcd(n as u64, q) == 1)
                    .map(|n| {
                        let v = table
                            .v_fast(m as f64, n as f64, q as f64)
                            .expect("pairs below log_x_cut stay inside the table");
                        (m as u32, n as u32, am * tau4[n] as f64 / (n as f64).sqrt() * v)
                    })
                    .collect()
            })
            .collect();
        let entries: Vec<_> = rows.into_iter().flatten().collect();
        let k_from = k_cut.min(spec.limit as f64);
        let mass_tail = 2.0 * omitted_mass_bound(table, k_from, shift);
        Ok(AfeTerms {
            q,
            limit: spec.limit,
            entries,
            mass_tail,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// (2 sum w chi(m) conj chi(n), 2 sum_{m = n} w), summed in (m, n) order.
    pub fn sum(&self, chi: &DirichletCharacter) -> (Complex64, f64) {
        let mut total = Complex64::new(0.0, 0.0);
        let mut diag = 0.0;
        for &(m, n, w) in &self.entries {
            if m == n {
                diag += w;
                total += w;
            } else {
                total += chi.value(m as u64) * chi.value(n as u64).conj() * w;
            }
        }
        (total * 2.0, 2.0 * diag)
    }
}

/// Bound on sum_{mn > k_from} tau_4(m) tau_4(n) |V(m, n; q)| / sqrt(mn).
///
/// |V| is at most M(L) = int |W(e^L, t)| dt, and grouping pairs by k = mn turns the
/// coefficients into tau_8(k) / sqrt(k). On bins a < k <= b the tau_8 mass is at most
/// b (log b + 7)^7 / 7!, and M is replaced by its largest value beyond the bin start.
/// Above the table M < 1e-70 and is ignored.
fn omitted_mass_bound(table: &WeightTable, k_from: f64, shift: f64) -> f64 {
    let l_max = table.params.l_max;
    let step = 0.05;
    let l0 = k_from.max(1.0).ln() + shift;
    if l0 >= l_max {
        return 0.0;
    }
    let n = ((l_max - l0) / step).ceil() as usize;
    let masses: Vec<f64> = (0..=n)
        .map(|i| table.w_abs_mass((l0 + i as f64 * step).min(l_max)).unwrap_or(0.0))
        .collect();
    // running maximum from the top: sup over L' >= L
    let mut sup = masses.clone();
    for i in (0..n).rev() {
        sup[i] = sup[i].max(sup[i + 1]);
    }
    let fact7 = 5040.0;
    let mut total = 0.0;
    for i in 0..n {
        let a = (l0 + i as f64 * step - shift).exp();
        let b = a * step.exp();
        let tau8_mass = b * (b.ln().max(0.0) + 7.0).powi(7) / fact7;
        total += sup[i] * tau8_mass / a.sqrt();
    }
    total
}

fn afe_check(chi: &DirichletCharacter, terms: &AfeTerms, lhs: &Lambda8, spec: &AfeSpec) -> Result<AfeCheck> {
    let (total, diagonal) = terms.sum(chi);
    if total.im.abs() > 1e-9 * total.re.abs().max(1.0) {
        return Err(Error::NoConvergence(format!(
            "AFE sum mod {} has imaginary part {:e} (real part {:e})",
            chi.modulus, total.im, total.re
        )));
    }
    let q = chi.modulus;
    let tail_estimate = afe_tail_estimate(q, spec.limit);
    let target = spec.rel_target * lhs.value;
    let sufficient = tail_estimate < target;
    if spec.strict && !sufficient {
        return Err(Error::InsufficientLimit {
            limit: spec.limit,
            tail: tail_estimate,
        });
    }
    Ok(AfeCheck {
        q,
        character_index: chi.index,
        lhs: lhs.value,
        lhs_error: lhs.error + lhs.tail_estimate,
        rhs: total.re,
        rhs_imag: total.im,
        diagonal,
        limit: spec.limit,
        tail_estimate,
        required_limit: afe_required_limit(q, target),
        limit_sufficient: sufficient,
        mass_tail: terms.mass_tail,
        pairs: terms.len(),
        rel_diff: (lhs.value - total.re).abs() / lhs.value,
    })
}

/// The eighth-moment AFE for one primitive even character: both sides and the truncation
/// diagnostics.
pub fn afe_rhs(chi: &DirichletCharacter, spec: &AfeSpec, quad: &QuadratureSpec) -> Result<AfeCheck> {
    let lhs = lambda8_integral(chi, quad)?;
    let terms = AfeTerms::build(chi.modulus, spec)?;
    afe_check(chi, &terms, &lhs, spec)
}

/// [`afe_rhs`] for every primitive even character mod q, sharing the V values.
pub fn afe_check_modulus(q: u64, spec: &AfeSpec, quad: &QuadratureSpec) -> Result<Vec<AfeCheck>> {
    let group = build_group(q)?;
    let chars: Vec<&DirichletCharacter> = group.primitive_even().collect();
    if chars.is_empty() {
        return Ok(Vec::new());
    }
    let lhs = lambda8_chars(q, &chars, quad)?;
    let terms = AfeTerms::build(q, spec)?;
    chars
        .iter()
        .zip(&lhs)
        .map(|(c, l)| afe_check(c, &terms, l, spec))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub q: u64,
    pub phi_flat: u64,
    pub psi_weight: f64,
    /// sum over primitive even chi of int |Lambda|^8 dt
    pub moment_sum: f64,
    /// psi_weight * moment_sum
    pub contribution: f64,
    /// this modulus's share of the main term
    pub main_term: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub big_q: f64,
    pub per_q: Vec<MomentRow>,
    pub lhs_total: f64,
    pub main_term: f64,
    pub ratio: f64,
    pub t_truncation: f64,
    /// finest trapezoid step used by any modulus
    pub t_step: f64,
    /// sum of halving changes, weighted like lhs_total
    pub quadrature_error: f64,
    /// sum of t-tail estimates, weighted like lhs_total
    pub tail_estimate: f64,
    pub a4: f64,
    pub gamma8: f64,
}

fn check_big_q(big_q: f64) -> Result<()> {
    if !(4.0..=64.0).contains(&big_q) {
        return invalid(format!("Q = {big_q} is outside the desk-scale range [4, 64]"));
    }
    Ok(())
}

/// Moduli in the support (Q, 2Q) of Psi(q/Q).
fn support(big_q: f64) -> impl Iterator<Item = u64> {
    (big_q.floor() as u64 + 1..=(2.0 * big_q).ceil() as u64).filter(move |&q| psi(q as f64 / big_q) > 0.0)
}

/// 24024 a_4 prod_{p | q} (1-1/p)^7 / (1 + 9/p + 9/p^2 + 1/p^3) phi^b(q) (log q)^16 / 16!,
/// without the Psi weight and the Gamma integral.
fn main_term_q(q: u64, a4: f64) -> Result<f64> {
    let fact16 = (1..=16).map(|k| k as f64).product::<f64>();
    Ok(24024.0 * a4 * local_factor_q(q)?.to_f64() * phi_flat(q) as f64 * (q as f64).ln().powi(16) / fact16)
}

fn a4_value() -> Result<f64> {
    Ok(euler_constant_accelerated(EulerKind::A4, 100_000)?.value.to_f64())
}

/// The main term with an arbitrary weight in place of Psi.
pub fn main_term_with(big_q: f64, weight: impl Fn(f64) -> f64, spec: &QuadratureSpec) -> Result<f64> {
    check_big_q(big_q)?;
    let a4 = a4_value()?;
    let g8 = gamma8_integral(spec)?.value;
    let mut total = 0.0;
    for q in (big_q.floor() as u64 + 1)..=(2.0 * big_q).ceil() as u64 {
        let w = weight(q as f64 / big_q);
        if w != 0.0 {
            total += w * main_term_q(q, a4)?;
        }
    }
    Ok(total * g8)
}

pub fn main_term(big_q: f64, spec: &QuadratureSpec) -> Result<f64> {
    main_term_with(big_q, psi, spec)
}

/// sum_q Psi(q/Q) sum over primitive even chi mod q of int |Lambda(1/2 + it, chi)|^8 dt,
/// with the main term alongside.
pub fn lhs_moment(big_q: f64, spec: &QuadratureSpec) -> Result<MomentReport> {
    check_big_q(big_q)?;
    let a4 = a4_value()?;
    let g8 = gamma8_integral(&QuadratureSpec::default())?.value;
    let qs: Vec<u64> = support(big_q).filter(|&q| phi_flat(q) > 0).collect();
    // moduli in parallel, characters of one modulus share each Hurwitz batch
    let per: Vec<Vec<Lambda8>> = qs
        .par_iter()
        .map(|&q| lambda8_modulus(q, spec))
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(qs.len());
    let (mut lhs_total, mut main, mut quad_err, mut tail, mut step) = (0.0, 0.0, 0.0, 0.0, f64::INFINITY);
    for (&q, vals) in qs.iter().zip(&per) {
        let w = psi(q as f64 / big_q);
        let moment_sum: f64 = vals.iter().map(|v| v.value).sum();
        let row = MomentRow {
            q,
            phi_flat: phi_flat(q),
            psi_weight: w,
            moment_sum,
            contribution: w * moment_sum,
            main_term: w * main_term_q(q, a4)? * g8,
        };
        lhs_total += row.contribution;
        main += row.main_term;
        quad_err += w * vals.iter().map(|v| v.error).sum::<f64>();
        tail += w * vals.iter().map(|v| v.tail_estimate).sum::<f64>();
        step = vals.iter().map(|v| v.step).fold(step, f64::min);
        rows.push(row);
    }
    Ok(MomentReport {
        big_q,
        per_q: rows,
        lhs_total,
        main_term: main,
        ratio: if main > 0.0 { lhs_total / main } else { f64::NAN },
        t_truncation: spec.truncation_radius,
        t_step: if step.is_finite() { step } else { spec.initial_step },
        quadrature_error: quad_err,
        tail_estimate: tail,
        a4,
        gamma8: g8,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagonalConstant {
    pub value: f64,
    /// Relative bound from the two truncated Euler products.
    pub rel_tail: f64,
}

/// 2^16 Q^2 (log Q)^16 / 16! Psi~(2) A/2 prod_p (1-1/p)(1 + (1/p - 1/p^2 - 1/p^3)/B_p)
/// int G(1/2, t) dt, with both products accelerated past 10^5.
pub fn diagonal_constant(big_q: f64) -> Result<DiagonalConstant> {
    let a = euler_constant_accelerated(EulerKind::CalA, 100_000)?;
    diagonal_constant_with(big_q, a.value.to_f64(), a.tail_bound)
}

/// [`diagonal_constant`] with a given value of the constant A.
pub fn diagonal_constant_with(big_q: f64, cal_a: f64, cal_a_log_tail: f64) -> Result<DiagonalConstant> {
    if !(big_q > 1.0 && big_q.is_finite()) {
        return invalid("diagonal_constant needs Q > 1");
    }
    let corr = euler_constant_accelerated(EulerKind::DiagonalCorrection, 100_000)?;
    let quad = QuadratureSpec::default();
    let g8 = gamma8_integral(&quad)?.value;
    let psi2 = psi_mellin(Complex64::new(2.0, 0.0), &quad).re;
    let fact16 = (1..=16).map(|k| k as f64).product::<f64>();
    let value = 65536.0 * big_q * big_q * big_q.ln().powi(16) / fact16 * psi2 * cal_a / 2.0
        * corr.value.to_f64()
        * g8;
    Ok(DiagonalConstant {
        value,
        rel_tail: (cal_a_log_tail + corr.tail_bound).exp_m1(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SieveResult {
    pub big_q: u64,
    pub t: f64,
    pub n: usize,
    pub lhs: f64,
    /// sum (Q^2 T + n) |a_n|^2
    pub rhs: f64,
    pub ratio: f64,
}

/// sum_{q <= Q} sum*_chi (q/phi(q)) int_{-T}^{T} |sum a_n chi(n) n^{it}|^2 dt divided by
/// sum (Q^2 T + n)|a_n|^2, with a_n = coeffs[n - 1].
///
/// The t-integral is composite Gauss-Legendre with panels of width at most 1/2, exact
/// to rounding for the trigonometric polynomials with n <= 10^4.
pub fn large_sieve_ratio(big_q: u64, t: f64, coeffs: &[Complex64]) -> Result<SieveResult> {
    if coeffs.is_empty() {
        return invalid("large_sieve_ratio needs at least one coefficient");
    }
    if big_q < 1 || !(t > 0.0 && t.is_finite()) {
        return invalid("large_sieve_ratio needs Q >= 1 and T > 0");
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return invalid("coefficients must be finite");
    }
    let n = coeffs.len();
    let panels = (4.0 * t * (1.0 + (n as f64).ln())).ceil() as usize;
    let nodes = gauss_legendre_nodes(-t, t, panels, 16);
    let logs: Vec<f64> = (1..=n).map(|k| (k as f64).ln()).collect();
    // n^{it} at every node, shared by all characters
    let phases: Vec<Vec<Complex64>> = nodes
        .par_iter()
        .map(|&(x, _)| logs.iter().map(|l| Complex64::from_polar(1.0, x * l)).collect())
        .collect();
    let moduli: Vec<u64> = (1..=big_q).collect();
    let per_q: Vec<f64> = moduli
        .par_iter()
        .map(|&q| -> Result<f64> {
            let group = build_group(q)?;
            let scale = q as f64 / crate::arith::euler_phi(q) as f64;
            let mut acc = 0.0;
            for chi in group.primitive() {
                let b: Vec<Complex64> = coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, a)| chi.value(k as u64 + 1) * a)
                    .collect();
                if b.iter().all(|x| *x == Complex64::new(0.0, 0.0)) {
                    continue;
                }
                let mut integral = 0.0;
                for ((_, w), ph) in nodes.iter().zip(&phases) {
                    let s: Complex64 = b.iter().zip(ph).map(|(x, y)| x * y).sum();
                    integral += w * s.norm_sqr();
                }
                acc += scale * integral;
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let lhs: f64 = per_q.iter().sum();
    let qq = (big_q * big_q) as f64;
    let rhs: f64 = coeffs
        .iter()
        .enumerate()
        .map(|(k, a)| (qq * t + (k + 1) as f64) * a.norm_sqr())
        .sum();
    Ok(SieveResult {
        big_q,
        t,
        n,
        lhs,
        rhs,
        ratio: lhs / rhs,
    })
}

/// Frozen empirical constant for [`large_sieve_ratio`] on [`sieve_instances`].
pub const LARGE_SIEVE_CONSTANT: f64 = 3.0;

#[derive(Clone, Debug, PartialEq)]
pub struct SieveInstance {
    pub big_q: u64,
    pub t: f64,
    pub coeffs: Vec<Complex64>,
}

/// Seeded instances: Q in [1, 20], T in [1, 10], N in [1, 500], a_n uniform in the unit
/// square. ChaCha8 keeps the stream identical across platforms.
pub fn sieve_instances(trials: usize, seed: u64) -> Vec<SieveInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials)
        .map(|_| {
            let big_q = rng.gen_range(1..=20u64);
            let t = rng.gen_range(1.0..=10.0);
            let n = rng.gen_range(1..=500usize);
            let coeffs = (0..n)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            SieveInstance { big_q, t, coeffs }
        })
        .collect()
}

pub fn sieve_suite(trials: usize, seed: u64) -> Result<Vec<SieveResult>> {
    sieve_instances(trials, seed)
        .iter()
        .map(|s| large_sieve_ratio(s.big_q, s.t, &s.coeffs))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_rule_is_monotone_past_its_peak() {
        let n = afe_required_limit(5, 1.0);
        assert!(afe_tail_estimate(5, n) < 1.0);
        assert!(afe_tail_estimate(5, n - 1) >= 1.0);
        assert!(afe_required_limit(5, 1e-3) > n);
    }

    #[test]
    fn lambda8_positive_and_stable() {
        let spec = lambda8_spec();
        let fine = lambda8_modulus(5, &spec).unwrap();
        assert_eq!(fine.len(), 1);
        let v = fine[0];
        assert!(v.value > 0.0 && v.tail_estimate < 1e-30 * v.value, "{v:?}");
        // one more halving changes less than rel_tol
        let finer = lambda8_modulus(5, &QuadratureSpec { initial_step: v.step, ..spec }).unwrap()[0];
        assert!((finer.value - v.value).abs() < spec.rel_tol * v.value, "{} {}", finer.value, v.value);
    }

    #[test]
    fn support_of_psi() {
        let qs: Vec<u64> = support(10.0).collect();
        assert_eq!(qs, (11..=19).collect::<Vec<_>>());
    }

    #[test]
    fn main_term_linear_and_growing() {
        let spec = QuadratureSpec::default();
        let a = main_term(10.0, &spec).unwrap();
        let b = main_term_with(10.0, |u| 2.0 * psi(u), &spec).unwrap();
        assert!(a > 0.0 && (b - 2.0 * a).abs() < 1e-14 * b);
        let mut prev = 0.0;
        for big_q in [6.0, 10.0, 16.0, 24.0, 40.0, 64.0] {
            let m = main_term(big_q, &spec).unwrap();
            assert!(m > prev, "Q = {big_q}");
            prev = m;
        }
        assert!(main_term(3.0, &spec).is_err());
    }

    #[test]
    fn diagonal_constant_scaling() {
        let d = diagonal_constant(10.0).unwrap();
        assert!(d.value > 0.0 && d.rel_tail < 1e-12, "{d:?}");
        let d2 = diagonal_constant(20.0).unwrap();
        let want = 4.0 * (20f64.ln() / 10f64.ln()).powi(16);
        assert!((d2.value / d.value - want).abs() < 1e-12 * want);
    }

    #[test]
    fn sieve_single_coefficient() {
        // a_1 = 1: |sum|^2 = 1 for every character, so LHS = 2T sum_q (q/phi(q)) #primitive
        let r = large_sieve_ratio(6, 2.5, &[Complex64::new(1.0, 0.0)]).unwrap();
        let mut want = 0.0;
        for q in 1..=6u64 {
            let g = build_group(q).unwrap();
            want += q as f64 / crate::arith::euler_phi(q) as f64 * g.primitive().count() as f64 * 5.0;
        }
        assert!((r.lhs - want).abs() < 1e-12 * want, "{} {want}", r.lhs);
        assert!((r.ratio - want / (36.0 * 2.5 + 1.0)).abs() < 1e-12);
        assert!(large_sieve_ratio(3, 1.0, &[]).is_err());
    }

    #[test]
    fn sieve_instances_deterministic() {
        let a = sieve_instances(3, 7);
        let b = sieve_instances(3, 7);
        assert_eq!(a, b);
        assert_ne!(a, sieve_instances(3, 8));
    }
}
