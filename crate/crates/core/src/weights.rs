//! The bump Psi, the AFE weights W(x, t) and V(xi, eta; mu), the combined weights
//! W^{+-}(x, y; u) and their Mellin transforms in u, in (x, y) and in all three variables.

use serde::{Deserialize, Serialize};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{invalid, Error, Result};
use crate::numeric::quad::{gauss_legendre_nodes, tanh_sinh, trapezoid, QuadratureSpec};
use crate::special::{g_half, g_kernel, h_dual, ln_g_kernel_unchecked, ln_gamma_unchecked};

/// The fixed bump Psi(u) = exp(-1/(u-1) - 1/(2-u)) on (1, 2), zero elsewhere.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BumpPsi;

impl BumpPsi {
    pub fn eval(&self, u: f64) -> f64 {
        psi(u)
    }
}

pub fn psi(u: f64) -> f64 {
    if u <= 1.0 || u >= 2.0 {
        return 0.0;
    }
    psi_from_gaps(u - 1.0, 2.0 - u)
}

#[inline]
fn psi_from_gaps(left: f64, right: f64) -> f64 {
    (-1.0 / left - 1.0 / right).exp()
}

fn psi_nodes() -> &'static [(f64, f64)] {
    static NODES: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    NODES.get_or_init(|| {
        gauss_legendre_nodes(1.0, 2.0, 64, 20)
            .into_iter()
            .map(|(u, w)| (u, w * psi(u)))
            .collect()
    })
}

/// Psi~(s) = int Psi(u) u^{s-1} du, composite Gauss-Legendre with 1280 nodes on [1, 2].
///
/// For |Im s| beyond 200 the panel count grows with |Im s|. The fixed rule is accurate to
/// about 1e-15 relative, so `_spec` is accepted only for interface uniformity.
pub fn psi_mellin(s: Complex64, _spec: &QuadratureSpec) -> Complex64 {
    if s.im.abs() <= 200.0 {
        return psi_nodes()
            .iter()
            .map(|&(u, w)| rpow(u, s - 1.0) * w)
            .sum();
    }
    let panels = (s.im.abs() / 3.0).ceil() as usize;
    gauss_legendre_nodes(1.0, 2.0, panels, 20)
        .into_iter()
        .map(|(u, w)| rpow(u, s - 1.0) * (w * psi(u)))
        .sum()
}

/// u^e for u > 0.
#[inline]
fn rpow(u: f64, e: Complex64) -> Complex64 {
    (e * u.ln()).exp()
}

/// Contour abscissa used by [`w_eval`].
///
/// The candidates are Re s = -1/4 (plus the s = 0 residue), 1/4, 1/2, 1 and the saddle point
/// of |G(1/2 + c, t)| x^{-c}; the one with the smallest integrand mass wins, since W itself
/// is the same on all of them and the mass bounds the cancellation.
pub fn w_contour(x: f64, t: f64) -> f64 {
    pick_contour(x.ln(), t.abs())
}

fn pick_contour(l: f64, t: f64) -> f64 {
    let g = g_half(t);
    let mut best = (f64::INFINITY, 1.0);
    for c in [-0.25, 0.25, 0.5, 1.0, saddle(l, t)] {
        // the -1/4 line is the cheap one in the table (one FFT per column), so it keeps
        // the job unless another line is 4x better
        let m = if c < 0.0 {
            (contour_mass(l, t, c) + g) / 4.0
        } else {
            contour_mass(l, t, c)
        };
        if m < best.0 {
            best = (m, c);
        }
    }
    best.1
}

/// Coarse estimate of (1/pi) int_0^inf |integrand| du on Re s = c.
fn contour_mass(l: f64, t: f64, c: f64) -> f64 {
    let tc = Complex64::new(t, 0.0);
    let h = 0.25;
    let n = ((t + 2.0 * c.abs() + 30.0) / h) as usize;
    (0..=n)
        .map(|k| {
            let s = Complex64::new(c, k as f64 * h);
            (ln_g_kernel_unchecked(s + 0.5, tc) - s * l).exp().norm() / s.norm()
        })
        .sum::<f64>()
        * h
        / PI
}

/// Solves 4 Re psi((1/2 + c + it)/2) = log x with psi ~ log: |1/2 + c + it| = 2 x^{1/4}.
#[inline]
fn saddle(l: f64, t: f64) -> f64 {
    let r2 = 4.0 * (l / 2.0).exp() - t * t;
    (r2.max(0.0).sqrt() - 0.5).max(1.0)
}

/// W(x, t) = (1/2 pi i) int_{(c)} G(1/2 + s, t) x^{-s} ds/s on the line Re s = c.
///
/// Negative c in (-1/2, 0) is allowed; the residue G(1/2, t) at s = 0 is then added.
pub fn w_eval_line(x: f64, t: f64, c: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return invalid(format!("W needs x > 0, got {x}"));
    }
    if !t.is_finite() {
        return invalid("W needs finite t");
    }
    if !(c > 0.0 || (c > -0.5 && c < 0.0)) {
        return invalid(format!("contour Re s = {c} must be positive or inside (-1/2, 0)"));
    }
    let l = x.ln();
    let tc = Complex64::new(t, 0.0);
    let upper = t.abs() + 2.0 * c.abs() + 30.0;
    let f = |u: f64| {
        let s = Complex64::new(c, u);
        (ln_g_kernel_unchecked(s + 0.5, tc) - s * l).exp() / s
    };
    // W can be far below any fixed absolute tolerance, so the floor is set by the
    // integrand's own size (roundoff of the sum)
    let peak = (0..=(upper * 4.0) as usize)
        .map(|k| f(k as f64 * 0.25).norm())
        .fold(0.0, f64::max);
    let mut local = *spec;
    local.abs_tol = spec.abs_tol.min(1e-15 * peak * upper).max(f64::MIN_POSITIVE);
    // the integrand at -u is the conjugate of the one at u
    let r = trapezoid(|u| Complex64::new(f(u).re, 0.0), 0.0, upper, &local)?;
    let mut w = r.value.re / PI;
    if c < 0.0 {
        w += g_half(t);
    }
    Ok(w)
}

/// W(x, t) on the adaptive contour [`w_contour`].
pub fn w_eval(x: f64, t: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return invalid(format!("W needs x > 0, got {x}"));
    }
    w_eval_line(x, t, w_contour(x, t), spec)
}

/// Grid parameters of a [`WeightTable`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TableParams {
    /// log x range of the table.
    pub l_min: f64,
    pub l_max: f64,
    pub l_step: f64,
    /// t grid is 0, t_step, ... up to at least t_max; W is even in t.
    pub t_max: f64,
    /// Upper bound on the t step; a built table records the step actually used, which
    /// divides the FFT frequency step.
    pub t_step: f64,
    /// Lagrange interpolation order (points per stencil).
    pub order: usize,
}

impl Default for TableParams {
    fn default() -> Self {
        TableParams {
            l_min: -80.0,
            l_max: 12.0,
            l_step: 0.01,
            t_max: 40.0,
            t_step: 0.0125,
            order: 12,
        }
    }
}

/// Samples of W(x, t) on a log-x by t grid.
///
/// Rows are stored scaled by exp(sigma(log x)), sigma(L) = 8 e^{L/4} - L/2, which removes
/// the super-exponential decay for large x so that interpolation stays relative.
#[derive(Clone, Debug)]
pub struct WeightTable {
    pub params: TableParams,
    n_l: usize,
    n_t: usize,
    /// scaled samples, one contiguous column of log x per t
    scaled: Vec<f64>,
    g_row: Vec<f64>,
}

#[inline]
fn sigma(l: f64) -> f64 {
    8.0 * ((l / 4.0).exp() - 1.0) - 0.5 * l
}

/// FFT layout on Re s = -1/4 shared by all table columns.
///
/// The t step divides the frequency step h_u, so G(1/4 + iu, t) for every grid (u, t) is a
/// product of two entries of one log Gamma table.
struct FftPlan {
    n: usize,
    h_u: f64,
    /// h_u / t_step
    m: usize,
    /// 4 log Gamma((1/4 + i k t_step) / 2) for k >= 0; negative k by conjugation
    lg: Vec<Complex64>,
    fft: std::sync::Arc<dyn rustfft::Fft<f64>>,
    /// FFT index and e^{L/4} h_u / 2 pi for each table abscissa
    taps: Vec<(usize, f64)>,
}

impl FftPlan {
    fn new(p: &TableParams) -> (Self, f64) {
        // the transformed function decays like e^{-|L|/4} on both sides, so a period of
        // range + 120 keeps aliased copies below e^{-30} of the kept values
        let span = p.l_max - p.l_min + 120.0;
        // a multiple of 512 keeps the FFT on small radices
        let n = ((span / p.l_step / 512.0).ceil() as usize) * 512;
        let h_u = 2.0 * PI / (n as f64 * p.l_step);
        let m = (h_u / p.t_step).ceil() as usize;
        let t_step = h_u / m as f64;
        let n_t = (p.t_max / t_step).ceil() as usize + 1;
        let k_max = m * (n / 2) + n_t;
        let lg = (0..=k_max)
            .into_par_iter()
            .map(|k| ln_gamma_unchecked(Complex64::new(0.125, 0.5 * k as f64 * t_step)) * 4.0)
            .collect();
        let n_neg = (-p.l_min / p.l_step).round() as i64;
        let n_l = n_neg as usize + (p.l_max / p.l_step).round() as usize + 1;
        let taps = (0..n_l)
            .map(|i| {
                // sum_k g_k e^{-i u_k L} with L = j h is FFT entry j mod n
                let j = i as i64 - n_neg;
                let l = j as f64 * p.l_step;
                (j.rem_euclid(n as i64) as usize, (0.25 * l).exp() * h_u / (2.0 * PI))
            })
            .collect();
        let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
        (FftPlan { n, h_u, m, lg, fft, taps }, t_step)
    }

    #[inline]
    fn lg_at(&self, k: i64) -> Complex64 {
        if k >= 0 {
            self.lg[k as usize]
        } else {
            self.lg[(-k) as usize].conj()
        }
    }

    /// W(e^L, t_j) at every table abscissa; only entries where this contour is well
    /// conditioned are kept by the caller.
    fn column(&self, jt: usize, t: f64) -> Vec<f64> {
        let n = self.n;
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        // g(-u) = conj g(u) for real t
        for k in 0..=n / 2 {
            let s = Complex64::new(-0.25, k as f64 * self.h_u);
            let ku = (k * self.m) as i64;
            let g = (self.lg_at(ku + jt as i64) + self.lg_at(ku - jt as i64)).exp() / s;
            buf[k] = g;
            if k > 0 && n - k != k {
                buf[n - k] = g.conj();
            }
        }
        self.fft.process(&mut buf);
        let residue = g_half(t);
        self.taps.iter().map(|&(idx, f)| residue + f * buf[idx].re).collect()
    }
}

/// Below this log x every column comes from the FFT on Re s = -1/4, where that contour is
/// well conditioned for all t.
const FFT_SPLIT: f64 = -16.0;

/// Grid step in t for the precomputed contour choice of the table buckets.
const CHOICE_STEP: f64 = 0.5;

/// W(e^L, t) for the given L, bucketed by the integer part of L; each bucket shares one set
/// of integrand samples on Re s = contour(bucket).
fn bucket_column(t: f64, ls: &[f64], contour: impl Fn(f64) -> f64) -> Vec<f64> {
    let tc = Complex64::new(t, 0.0);
    let mut out = vec![0.0; ls.len()];
    // log G samples per (contour, step), shared by all buckets on it
    let mut kernels: Vec<((f64, f64), Vec<Complex64>)> = Vec::new();
    let mut i = 0;
    while i < ls.len() {
        let b = ls[i].floor();
        let mut j = i;
        while j < ls.len() && ls[j].floor() == b {
            j += 1;
        }
        let c = contour(b);
        // trapezoid error ~ exp(-2 pi d / h + d L) for a strip of half-width d free of
        // poles; left of 0 the order-4 poles at -1/2 +- it sit 1/4 away
        let h_u = if c < 0.0 {
            0.02
        } else {
            let d = 0.9 * c.min(5.0);
            (2.0 * PI * d / (35.0 + d * (b + 1.0).max(0.0))).min(0.25)
        };
        let upper = t.abs() + 2.0 * c.abs() + 30.0;
        let m = (upper / h_u).ceil() as usize;
        if !kernels.iter().any(|(key, _)| *key == (c, h_u)) {
            let lg = (0..=m)
                .map(|k| {
                    let s = Complex64::new(c, k as f64 * h_u);
                    ln_g_kernel_unchecked(s + 0.5, tc) - s.ln()
                })
                .collect();
            kernels.push(((c, h_u), lg));
        }
        let lg = &kernels.iter().find(|(key, _)| *key == (c, h_u)).expect("just inserted").1;
        let amps: Vec<Complex64> = lg
            .iter()
            .enumerate()
            .map(|(k, &g)| {
                let s = Complex64::new(c, k as f64 * h_u);
                let w = if k == 0 { 0.5 } else { 1.0 };
                (g - s * b).exp() * w
            })
            .collect();
        let residue = if c < 0.0 { g_half(t) } else { 0.0 };
        // four phase chains at once; a single chain is latency bound
        for (slots, lq) in out[i..j].chunks_mut(4).zip(ls[i..j].chunks(4)) {
            let mut rot = [Complex64::new(1.0, 0.0); 4];
            for (r, &l) in rot.iter_mut().zip(lq) {
                *r = Complex64::from_polar(1.0, -h_u * (l - b));
            }
            let mut ph = [Complex64::new(1.0, 0.0); 4];
            let mut acc = [0.0; 4];
            for a in &amps {
                for q in 0..4 {
                    acc[q] += a.re * ph[q].re - a.im * ph[q].im;
                    ph[q] *= rot[q];
                }
            }
            for ((slot, &l), v) in slots.iter_mut().zip(lq).zip(acc) {
                *slot = residue + v * h_u / PI * (-c * (l - b)).exp();
            }
        }
        i = j;
    }
    out
}

impl WeightTable {
    pub fn build(params: TableParams) -> Result<Self> {
        let p = params;
        if !(p.l_step > 0.0 && p.t_step > 0.0 && p.l_min < 0.0 && p.l_max > 0.0 && p.t_max > 0.0) {
            return invalid(format!("bad table parameters {p:?}"));
        }
        if p.order < 2 || p.order % 2 != 0 {
            return invalid("interpolation order must be even and at least 2");
        }
        if PI / p.l_step < p.t_max + 40.0 {
            return invalid("log-x step too coarse for the FFT frequency range");
        }
        let n_neg = (-p.l_min / p.l_step).round() as usize;
        let n_pos = (p.l_max / p.l_step).round() as usize;
        let n_l = n_neg + n_pos + 1;
        let (plan, t_step) = FftPlan::new(&p);
        let mut params = params;
        params.t_step = t_step;
        let p = params;
        let n_t = (p.t_max / t_step).ceil() as usize + 1;
        if n_l < p.order || n_t < p.order {
            return invalid("table smaller than the interpolation stencil");
        }
        // integer buckets of L from FFT_SPLIT up; below it the FFT contour is always used
        let b_lo = FFT_SPLIT.max(p.l_min).floor();
        let n_b = (p.l_max.floor() - b_lo) as usize + 1;
        let n_q = (p.t_max / CHOICE_STEP).ceil() as usize + 1;
        let choice: Vec<f64> = (0..n_q * n_b)
            .into_par_iter()
            .map(|k| pick_contour(b_lo + (k % n_b) as f64 + 0.5, (k / n_b) as f64 * CHOICE_STEP))
            .collect();
        let sig: Vec<f64> = (0..n_l).map(|i| sigma(p.l_min + i as f64 * p.l_step).exp()).collect();
        let mut scaled = vec![0.0; n_l * n_t];
        scaled.par_chunks_mut(n_l).enumerate().for_each(|(jt, out)| {
            let t = jt as f64 * p.t_step;
            let q = (t / CHOICE_STEP).round() as usize;
            let col = plan.column(jt, t);
            out.copy_from_slice(&col);
            let ls: Vec<(usize, f64)> = (0..n_l)
                .map(|i| (i, p.l_min + i as f64 * p.l_step))
                .filter(|&(_, l)| l >= b_lo && choice[q * n_b + (l.floor() - b_lo) as usize] > 0.0)
                .collect();
            let vals = bucket_column(
                t,
                &ls.iter().map(|&(_, l)| l).collect::<Vec<_>>(),
                |b| choice[q * n_b + (b - b_lo) as usize],
            );
            for (&(i, _), v) in ls.iter().zip(vals) {
                out[i] = v;
            }
            for (o, e) in out.iter_mut().zip(&sig) {
                *o *= e;
            }
        });
        if scaled.iter().any(|v| !v.is_finite()) {
            return Err(Error::NoConvergence("non-finite W table sample".into()));
        }
        let g_row = (0..n_t).map(|j| g_half(j as f64 * p.t_step)).collect();
        Ok(WeightTable {
            params,
            n_l,
            n_t,
            scaled,
            g_row,
        })
    }

    /// The default table, built once per process.
    pub fn global() -> &'static WeightTable {
        static TABLE: OnceLock<WeightTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            WeightTable::build(TableParams::default()).expect("default table parameters are valid")
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n_l, self.n_t)
    }

    pub fn t_grid(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_t).map(move |j| j as f64 * self.params.t_step)
    }

    /// Stored sample W(e^{L_i}, t_j).
    pub fn sample(&self, i: usize, j: usize) -> f64 {
        let l = self.params.l_min + i as f64 * self.params.l_step;
        self.scaled[j * self.n_l + i] * (-sigma(l)).exp()
    }

    fn stencil(&self, pos: f64, n: usize) -> (usize, Vec<f64>) {
        let r = self.params.order;
        let start = (pos.floor() as isize - (r as isize / 2 - 1)).clamp(0, (n - r) as isize) as usize;
        let p = pos - start as f64;
        let weights = (0..r)
            .map(|k| {
                let mut w = 1.0;
                for m in 0..r {
                    if m != k {
                        w *= (p - m as f64) / (k as f64 - m as f64);
                    }
                }
                w
            })
            .collect();
        (start, weights)
    }

    fn in_range(&self, l: f64) -> bool {
        l >= self.params.l_min && l <= self.params.l_max
    }

    /// Interpolated W(x, t), or None outside the tabulated range.
    pub fn w(&self, x: f64, t: f64) -> Option<f64> {
        let l = x.ln();
        let t = t.abs();
        if !self.in_range(l) || t > self.params.t_max {
            return None;
        }
        let (il, wl) = self.stencil((l - self.params.l_min) / self.params.l_step, self.n_l);
        let (jt, wt) = self.stencil(t / self.params.t_step, self.n_t);
        let mut acc = 0.0;
        for (b, wb) in wt.iter().enumerate() {
            let col = &self.scaled[(jt + b) * self.n_l + il..][..wl.len()];
            acc += wb * wl.iter().zip(col).map(|(a, c)| a * c).sum::<f64>();
        }
        Some(acc * (-sigma(l)).exp())
    }

    /// W(e^L, t_j) for every t on the grid, or None outside the table.
    fn row_at(&self, l: f64) -> Option<Vec<f64>> {
        if l < self.params.l_min {
            return Some(self.g_row.clone());
        }
        if l > self.params.l_max {
            return None;
        }
        let (il, wl) = self.stencil((l - self.params.l_min) / self.params.l_step, self.n_l);
        let scale = (-sigma(l)).exp();
        Some(
            self.scaled
                .chunks_exact(self.n_l)
                .map(|col| scale * wl.iter().zip(&col[il..]).map(|(a, c)| a * c).sum::<f64>())
                .collect(),
        )
    }

    /// V(xi, eta; mu) from the table, with W = G(1/2, t) below the table and direct
    /// evaluation above it.
    pub fn v(&self, xi: f64, eta: f64, mu: f64, spec: &QuadratureSpec) -> Result<f64> {
        self.v_with_noise(xi, eta, mu, spec).map(|(v, _)| v)
    }

    /// V together with its noise floor [`V_NOISE_REL`] * int |W| dt. When the oscillation
    /// (eta/xi)^{it} cancels W almost completely, V is only known to within this floor.
    pub fn v_with_noise(&self, xi: f64, eta: f64, mu: f64, spec: &QuadratureSpec) -> Result<(f64, f64)> {
        if !(xi > 0.0 && eta > 0.0 && mu > 0.0) {
            return invalid(format!("V needs positive arguments, got ({xi}, {eta}, {mu})"));
        }
        let ratio_log = eta.ln() - xi.ln();
        if ratio_log.abs() > V_MAX_LOG_RATIO {
            return Ok((0.0, 0.0));
        }
        let l = xi.ln() + eta.ln() + 4.0 * (PI.ln() - mu.ln());
        let (row, h) = match self.row_at(l) {
            Some(row) => (row, self.params.t_step),
            None => direct_row(l, ratio_log, spec)?,
        };
        let mass = 2.0 * h * (row.iter().map(|w| w.abs()).sum::<f64>() - 0.5 * row[0].abs());
        Ok((cosine_sum(&row, h, ratio_log), V_NOISE_REL * mass))
    }

    /// int |W(e^L, t)| dt over the whole line, which bounds |V(xi, eta; mu)| for every ratio
    /// eta/xi at log(xi eta pi^4 / mu^4) = L. None above the table.
    pub fn w_abs_mass(&self, l: f64) -> Option<f64> {
        self.row_at(l).map(|row| {
            2.0 * self.params.t_step * (row.iter().map(|w| w.abs()).sum::<f64>() - 0.5 * row[0].abs())
        })
    }

    /// V with the table only; None when log X exceeds the table (where |V| < e^{-150}).
    pub fn v_fast(&self, xi: f64, eta: f64, mu: f64) -> Option<f64> {
        let ratio_log = eta.ln() - xi.ln();
        if ratio_log.abs() > V_MAX_LOG_RATIO {
            return Some(0.0);
        }
        let l = xi.ln() + eta.ln() + 4.0 * (PI.ln() - mu.ln());
        self.row_at(l).map(|row| cosine_sum(&row, self.params.t_step, ratio_log))
    }
}

/// Trapezoid sum of int cos(t r) W(t) dt over the whole line from samples at t_j = j h >= 0.
fn cosine_sum(row: &[f64], h: f64, ratio_log: f64) -> f64 {
    let c1 = (h * ratio_log).cos();
    let (mut prev, mut cur) = (c1, 1.0);
    let mut acc = 0.5 * row[0];
    for &w in &row[1..] {
        // cos((j+1)a) = 2 cos(a) cos(ja) - cos((j-1)a)
        let next = 2.0 * c1 * cur - prev;
        prev = cur;
        cur = next;
        acc += cur * w;
    }
    2.0 * h * acc
}

/// Directly evaluated W(e^L, t) for log X above the table: t runs to 40 + 4 log(1 + X) on a
/// grid fine enough for the e^{it(log X +- log(eta/xi))} oscillation. Slow (thousands of
/// contour integrals).
fn direct_row(l: f64, ratio_log: f64, spec: &QuadratureSpec) -> Result<(Vec<f64>, f64)> {
    let x = l.exp();
    let t_max = 40.0 + 4.0 * x.ln_1p();
    let h = (2.8 / (l.abs() + ratio_log.abs() + 80.0)).min(0.05);
    let n = (t_max / h).ceil() as usize;
    let row = (0..=n)
        .into_par_iter()
        .map(|j| w_eval(x, j as f64 * h, spec))
        .collect::<Result<Vec<_>>>()?;
    Ok((row, h))
}

/// Relative accuracy assumed for tabulated and direct W when bounding the error of V.
pub const V_NOISE_REL: f64 = 1e-9;

/// Beyond |log(eta/xi)| = 60, V is below 1e-9 of its peak (Fourier decay of G(1/2, t),
/// whose nearest poles are at Im t = 1/2) and is returned as 0; this also keeps the
/// table's t-grid free of aliasing.
pub const V_MAX_LOG_RATIO: f64 = 60.0;

/// Empirical constant C in |V(xi, eta; mu)| <= C exp(-(max(xi, eta)^2 / mu^4)^{1/4}), frozen
/// from [`v_decay_scan`] over [`v_decay_probes`] (certified maximum 5405, at the smallest
/// arguments, where V tends to int G(1/2, t) dt) with 10% headroom.
pub const V_DECAY_CONSTANT: f64 = 6.0e3;

/// V(xi, eta; mu) = int (eta/xi)^{it} W(xi eta pi^4 / mu^4, t) dt via the global table.
pub fn v_eval(xi: f64, eta: f64, mu: f64, spec: &QuadratureSpec) -> Result<f64> {
    WeightTable::global().v(xi, eta, mu, spec)
}

/// exp(-(max(xi, eta)^2 / mu^4)^{1/4})
pub fn v_decay_envelope(xi: f64, eta: f64, mu: f64) -> f64 {
    (-(xi.max(eta).sqrt() / mu)).exp()
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DecayRow {
    pub xi: f64,
    pub eta: f64,
    pub mu: f64,
    pub v: f64,
    /// error floor of v from cancellation in the t-integral
    pub noise: f64,
    pub envelope: f64,
    /// |v| / envelope
    pub ratio: f64,
    /// (|v| - noise)^+ / envelope, the part of the ratio that the computation certifies
    pub ratio_floor: f64,
}

impl DecayRow {
    /// Whether v is known well enough to test the bound at the frozen constant.
    pub fn resolved(&self) -> bool {
        self.noise <= 1e-2 * V_DECAY_CONSTANT * self.envelope
    }
}

/// Probe grid for the V decay bound: xi, eta over powers of 4 from 4^-3 to 4^9 and mu in
/// {1, 2, 5, 10}, kept where xi eta pi^4 / mu^4 lies inside the default table.
pub fn v_decay_probes() -> Vec<(f64, f64, f64)> {
    let axis: Vec<f64> = (-3..=9).map(|k| 4f64.powi(k)).collect();
    let l_max = TableParams::default().l_max;
    let mut out = Vec::new();
    for &mu in &[1.0f64, 2.0, 5.0, 10.0] {
        for &xi in &axis {
            for &eta in &axis {
                if (xi * eta * PI.powi(4) / mu.powi(4)).ln() <= l_max {
                    out.push((xi, eta, mu));
                }
            }
        }
    }
    out
}

pub fn v_decay_scan(probes: &[(f64, f64, f64)], spec: &QuadratureSpec) -> Result<Vec<DecayRow>> {
    let table = WeightTable::global();
    probes
        .iter()
        .map(|&(xi, eta, mu)| {
            let (v, noise) = table.v_with_noise(xi, eta, mu, spec)?;
            let envelope = v_decay_envelope(xi, eta, mu);
            Ok(DecayRow {
                xi,
                eta,
                mu,
                v,
                noise,
                envelope,
                ratio: v.abs() / envelope,
                ratio_floor: (v.abs() - noise).max(0.0) / envelope,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn both() -> [Sign; 2] {
        [Sign::Plus, Sign::Minus]
    }

    #[inline]
    fn gap(self, x: f64, y: f64) -> f64 {
        match self {
            Sign::Plus => x + y,
            Sign::Minus => (x - y).abs(),
        }
    }
}

/// W^{+-}(x, y; u) = u|x +- y| Psi(u|x +- y|) V(x, y; u|x +- y|).
pub fn w_pm(x: f64, y: f64, u: f64, sign: Sign) -> Result<f64> {
    if !(x > 0.0 && y > 0.0 && u > 0.0) {
        return invalid("w_pm needs positive x, y, u");
    }
    let v = u * sign.gap(x, y);
    if v <= 1.0 || v >= 2.0 {
        return Ok(0.0);
    }
    Ok(v * psi(v) * v_eval(x, y, v, &QuadratureSpec::default())?)
}

/// Psi(v) V(x, y; v) on Gauss-Legendre nodes in v, shared by all z.
#[derive(Clone, Debug)]
pub struct MellinU {
    pub x: f64,
    pub y: f64,
    nodes: Vec<(f64, f64)>,
}

impl MellinU {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(x > 0.0 && y > 0.0) {
            return invalid("Mellin transform in u needs x, y > 0");
        }
        let spec = QuadratureSpec::default();
        let nodes = gauss_legendre_nodes(1.0, 2.0, 32, 12)
            .into_iter()
            .map(|(v, w)| Ok((v, w * psi(v) * v_eval(x, y, v, &spec)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(MellinU { x, y, nodes })
    }

    /// int_1^2 Psi(v) V(x, y; v) v^z dv
    pub fn core(&self, z: Complex64) -> Complex64 {
        self.nodes.iter().map(|&(v, w)| rpow(v, z) * w).sum()
    }

    /// W~_1^{+-}(x, y; z) = |x +- y|^{-z} int_1^2 Psi(v) V(x, y; v) v^z dv.
    pub fn signed(&self, z: Complex64, sign: Sign) -> Complex64 {
        let d = sign.gap(self.x, self.y);
        if d == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        rpow(d, -z) * self.core(z)
    }

    pub fn total(&self, z: Complex64) -> Complex64 {
        self.signed(z, Sign::Plus) + self.signed(z, Sign::Minus)
    }
}

/// W~_1(x, y; z) = W~_1^+ + W~_1^-.
pub fn mellin_w1(x: f64, y: f64, z: Complex64) -> Result<Complex64> {
    Ok(MellinU::new(x, y)?.total(z))
}

/// Which signs of W^{+-} to include.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignSel {
    Plus,
    Minus,
    Both,
}

/// Tolerances for [`mellin_w2`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MellinXySpec {
    /// Gauss-Legendre panels (of 8 nodes) across the p range [1/u, 2/u].
    pub p_panels: usize,
    /// Half-width of the log-ratio range.
    pub phi_radius: f64,
    pub phi: QuadratureSpec,
}

impl Default for MellinXySpec {
    fn default() -> Self {
        MellinXySpec {
            p_panels: 8,
            phi_radius: 18.0,
            phi: QuadratureSpec {
                abs_tol: 1e-13,
                rel_tol: 1e-9,
                initial_step: 0.1,
                truncation_radius: 18.0,
                max_refinements: 7,
            },
        }
    }
}

impl MellinXySpec {
    /// Looser settings for decay scans: Re s >= 1.5 lets the log-ratio range shrink, and
    /// the absolute floor sits at the table's interpolation noise after cancellation.
    pub fn scan() -> Self {
        MellinXySpec {
            p_panels: 8,
            phi_radius: 12.0,
            phi: QuadratureSpec {
                abs_tol: 1e-7,
                rel_tol: 1e-6,
                initial_step: 0.05,
                truncation_radius: 12.0,
                max_refinements: 7,
            },
        }
    }
}

/// Which argument of W~_2 grows during a decay scan.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum W2Scan {
    /// s1 = re + iT, s2 = re: the product |W~_2| T should stay bounded.
    MaxArg,
    /// s1 + s2 = 2 re + iT with s1 - s2 = 2i fixed: |W~_2| |s1 + s2|^2 should stay bounded.
    SumArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct W2ScanRow {
    pub t: f64,
    pub value_re: f64,
    pub value_im: f64,
    pub product: f64,
}

/// Products below this are indistinguishable from quadrature noise in [`MellinXySpec::scan`].
pub const W2_PRODUCT_FLOOR: f64 = 1e-8;
/// Largest growth of the scan product allowed per doubling of T.
pub const W2_DOUBLING_GROWTH: f64 = 1.5;

pub fn w2_decay_scan(kind: W2Scan, sign: SignSel, re: f64, u: f64, ts: &[f64], spec: &MellinXySpec) -> Result<Vec<W2ScanRow>> {
    ts.iter()
        .map(|&t| {
            let (s1, s2) = match kind {
                W2Scan::MaxArg => (Complex64::new(re, t), Complex64::new(re, 0.0)),
                W2Scan::SumArg => (Complex64::new(re, 0.5 * t + 1.0), Complex64::new(re, 0.5 * t - 1.0)),
            };
            let w = mellin_w2(s1, s2, u, sign, spec)?;
            let product = match kind {
                W2Scan::MaxArg => w.norm() * s1.norm().max(s2.norm()),
                W2Scan::SumArg => w.norm() * (s1 + s2).norm_sqr(),
            };
            Ok(W2ScanRow { t, value_re: w.re, value_im: w.im, product })
        })
        .collect()
}

/// True when each step of the scan grows the product by at most [`W2_DOUBLING_GROWTH`]
/// (products under [`W2_PRODUCT_FLOOR`] count as the floor).
pub fn w2_scan_bounded(rows: &[W2ScanRow]) -> bool {
    rows.windows(2)
        .all(|w| w[1].product <= W2_DOUBLING_GROWTH * w[0].product.max(W2_PRODUCT_FLOOR))
}

/// W~_2(s1, s2; u) = int int W^{+-}(x, y; u) x^{s1} y^{s2} dx/x dy/y.
///
/// Sign +: x = p/(1+e^{-phi}), y = p/(1+e^{phi}) with p = x + y, so dx dy/(xy) = dp dphi / p.
/// Sign -: |x - y| = p and the smaller variable is p e^{phi}, giving
/// dx dy/(xy) = dp dphi / (p (1 + e^{phi})) on each side of the diagonal.
pub fn mellin_w2(s1: Complex64, s2: Complex64, u: f64, which: SignSel, spec: &MellinXySpec) -> Result<Complex64> {
    for s in [s1, s2] {
        if !(s.re > 0.0 && s.re <= 100.0) {
            return invalid(format!("W~_2 needs 0 < Re s <= 100, got {s}"));
        }
    }
    if !(u > 0.0 && u.is_finite()) {
        return invalid("W~_2 needs u > 0");
    }
    let table = WeightTable::global();
    // above the table |V| < e^{-150}
    let v_at = |x: f64, y: f64, mu: f64| -> Result<f64> { Ok(table.v_fast(x, y, mu).unwrap_or(0.0)) };
    let nodes = gauss_legendre_nodes(1.0 / u, 2.0 / u, spec.p_panels, 8);
    let r = spec.phi_radius;
    let mut total = Complex64::new(0.0, 0.0);
    for (p, wp) in nodes {
        let mu = u * p;
        let bump = mu * psi(mu);
        if bump == 0.0 {
            continue;
        }
        let lp = p.ln();
        let scale = rpow(p, s1 + s2) * (bump * wp / p);
        let mut err = None;
        let mut inner = |f: &dyn Fn(f64) -> Result<Complex64>| -> Complex64 {
            match trapezoid(
                |phi| match f(phi) {
                    Ok(v) => v,
                    Err(e) => {
                        err.get_or_insert(e);
                        Complex64::new(0.0, 0.0)
                    }
                },
                -r,
                r,
                &spec.phi,
            ) {
                Ok(q) => q.value,
                Err(e) => {
                    err.get_or_insert(e);
                    Complex64::new(0.0, 0.0)
                }
            }
        };
        let mut acc = Complex64::new(0.0, 0.0);
        if which != SignSel::Minus {
            acc += inner(&|phi: f64| {
                // log theta and log(1 - theta) without cancellation
                let lt = -ln1p_exp(-phi);
                let l1t = -ln1p_exp(phi);
                let (x, y) = ((lp + lt).exp(), (lp + l1t).exp());
                let v = v_at(x, y, mu)?;
                Ok((s1 * lt + s2 * l1t).exp() * v)
            });
        }
        if which != SignSel::Plus {
            for swap in [false, true] {
                acc += inner(&|phi: f64| {
                    let l_small = phi;
                    let l_big = ln1p_exp(phi);
                    let (lx, ly) = if swap { (l_small, l_big) } else { (l_big, l_small) };
                    let (x, y) = ((lp + lx).exp(), (lp + ly).exp());
                    if x.is_infinite() || y.is_infinite() {
                        return Ok(Complex64::new(0.0, 0.0));
                    }
                    let v = v_at(x, y, mu)?;
                    Ok((s1 * lx + s2 * ly - l_big).exp() * v)
                });
            }
        }
        if let Some(e) = err {
            return Err(e);
        }
        total += acc * scale;
    }
    Ok(total)
}

/// log(1 + e^x) without overflow.
#[inline]
fn ln1p_exp(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// W~_3(s1, s2; z) in closed form:
/// Psi~(1 + 4 omega + z) / (2 omega pi^{4 omega}) int H(xi - it, z) G(1/2 + omega, t) dt,
/// with omega = (s1 + s2 - z)/2 and xi = (s1 - s2 + z)/2.
pub fn mellin_w3_closed(s1: Complex64, s2: Complex64, z: Complex64, spec: &QuadratureSpec) -> Result<Complex64> {
    if !(s1.re > 0.0 && s2.re > 0.0) {
        return invalid("W~_3 needs Re s1, Re s2 > 0");
    }
    if !((s1.re - s2.re).abs() < z.re && z.re < 1.0) {
        return invalid("W~_3 needs |Re(s1 - s2)| < Re z < 1");
    }
    let omega = (s1 + s2 - z) * 0.5;
    let xi = (s1 - s2 + z) * 0.5;
    if omega.norm() < 1e-12 {
        return Err(Error::Pole("W~_3 at omega = 0".into()));
    }
    let i = Complex64::new(0.0, 1.0);
    let mut err = None;
    let r = trapezoid(
        |t| {
            let h = match h_dual(xi - i * t, z) {
                Ok((_, ratio)) => ratio,
                Err(e) => {
                    err.get_or_insert(e);
                    return Complex64::new(0.0, 0.0);
                }
            };
            match g_kernel(omega + 0.5, t) {
                Ok(g) => h * g,
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
    let pre = psi_mellin(omega * 4.0 + z + 1.0, spec) / (omega * 2.0 * (omega * 4.0 * PI.ln()).exp());
    Ok(pre * r.value)
}

/// |W~_3| / ((1+|z|)^{-A} (1+|omega|)^{-A} (1+|xi|)^{Re z - 1}).
pub fn w3_bound_ratio(s1: Complex64, s2: Complex64, z: Complex64, a: f64, spec: &QuadratureSpec) -> Result<f64> {
    let w = mellin_w3_closed(s1, s2, z, spec)?;
    let omega = (s1 + s2 - z) * 0.5;
    let xi = (s1 - s2 + z) * 0.5;
    let shape = (1.0 + z.norm()).powf(-a) * (1.0 + omega.norm()).powf(-a) * (1.0 + xi.norm()).powf(z.re - 1.0);
    Ok(w.norm() / shape)
}

/// Recorded C_A for A = 2: the largest ratio seen on [`w3_bound_probes`] at scales 1, 2,
/// 4 and 8 is 7.02e5 (scale 2), and the worst ratio does not grow with the scale.
pub const W3_BOUND_CONSTANT: f64 = 1.0e6;

/// (s1, s2, z) probes with imaginary parts multiplied by `scale`; all satisfy
/// |Re(s1 - s2)| < Re z < 1.
pub fn w3_bound_probes(scale: f64) -> Vec<(Complex64, Complex64, Complex64)> {
    let ims = [-8.0, -2.0, 0.0, 2.0, 8.0];
    let mut out = Vec::new();
    for zr in [0.2, 0.5, 0.8] {
        for zi in [-6.0, -2.0, 0.0, 2.0, 6.0] {
            for a1 in ims {
                for a2 in ims {
                    for r in [0.3, 1.0, 3.0] {
                        out.push((
                            Complex64::new(r, a1 * scale),
                            Complex64::new(r, a2 * scale),
                            Complex64::new(zr, zi * scale),
                        ));
                    }
                }
            }
        }
    }
    out
}

/// Largest [`w3_bound_ratio`] over the probes, with A = 2.
pub fn w3_bound_scan(probes: &[(Complex64, Complex64, Complex64)], spec: &QuadratureSpec) -> Result<f64> {
    let ratios: Result<Vec<f64>> = probes
        .par_iter()
        .map(|&(s1, s2, z)| w3_bound_ratio(s1, s2, z, 2.0, spec))
        .collect();
    Ok(ratios?.into_iter().fold(0.0, f64::max))
}

/// Psi integral int_1^2 Psi(u) du / u, i.e. Psi~(0), by tanh-sinh; used as an
/// independent check of [`psi_mellin`].
pub fn psi_mellin_tanh_sinh(s: Complex64, tol: f64) -> Result<Complex64> {
    let (v, _) = tanh_sinh(
        |u, da, db| rpow(u, s - 1.0) * psi_from_gaps(da, db),
        1.0,
        2.0,
        tol,
        10,
    )?;
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn psi_basics() {
        assert_eq!(psi(1.0), 0.0);
        assert_eq!(psi(2.0), 0.0);
        assert!(psi(1.5) > 0.0);
        assert_eq!(BumpPsi.eval(0.3), 0.0);
        // one-sided derivatives vanish at the support ends, up to order 3: the forward
        // difference quotients collapse faster than any power of h
        let quotient = |k: usize, h: f64, left: bool| {
            (0..=k)
                .map(|j| {
                    let binom = (1..=j).fold(1.0, |a, i| a * (k - i + 1) as f64 / i as f64);
                    let sgn = if (k - j) % 2 == 0 { 1.0 } else { -1.0 };
                    let u = if left { 1.0 + j as f64 * h } else { 2.0 - j as f64 * h };
                    sgn * binom * psi(u)
                })
                .sum::<f64>()
                / h.powi(k as i32)
        };
        for k in 1..=3 {
            for left in [true, false] {
                let coarse = quotient(k, 0.01, left).abs();
                let fine = quotient(k, 0.005, left).abs();
                assert!(fine < 1e-20 && fine <= 1e-5 * coarse, "order {k}: {coarse} {fine}");
            }
        }
    }

    #[test]
    fn psi_mellin_oracles() {
        let p0 = psi_mellin(Complex64::new(0.0, 0.0), &spec());
        assert!(p0.re > 0.0 && p0.im == 0.0);
        // 10x finer composite rule as the oracle
        let fine = crate::numeric::quad::gauss_legendre(
            |u| Complex64::new(psi(u) * u, 0.0),
            1.0,
            2.0,
            640,
            20,
        );
        let p2 = psi_mellin(Complex64::new(2.0, 0.0), &spec());
        assert!((p2 - fine).norm() < 1e-10 * fine.norm());
        let ts = psi_mellin_tanh_sinh(Complex64::new(2.0, 0.0), 1e-14).unwrap();
        assert!((p2 - ts).norm() < 1e-12 * ts.norm());
        for (sig, tau) in [(0.0, 30.0), (2.0, -5.0), (-1.0, 100.0)] {
            let v = psi_mellin(Complex64::new(sig, tau), &spec());
            assert!(v.norm() <= f64::max(1.0, 2f64.powf(sig)) * p0.re * (1.0 + 1e-12));
        }
    }

    #[test]
    fn w_limits_and_contours() {
        let s = spec();
        let a = w_eval_line(1.0, 0.0, 1.0, &s).unwrap();
        let b = w_eval_line(1.0, 0.0, 2.0, &s).unwrap();
        assert!((a - b).abs() < 1e-9 * a.abs());
        assert!(w_eval(1e6, 0.0, &s).unwrap().abs() < 1e-8);
        // x < 1: the residue route on two different lines left of 0
        let c1 = w_eval_line(0.3, 1.0, -0.25, &s).unwrap();
        let c2 = w_eval_line(0.3, 1.0, -0.4, &s).unwrap();
        let c3 = w_eval_line(0.3, 1.0, 0.5, &s).unwrap();
        assert!((c1 - c2).abs() < 1e-11 * c1.abs());
        assert!((c1 - c3).abs() < 1e-11 * c1.abs());
        assert!(w_eval_line(1.0, 0.0, -0.5, &s).is_err());
        assert!(w_eval(0.0, 0.0, &s).is_err());
    }

    #[test]
    fn w_small_x_contour_shift() {
        let s = spec();
        let g = g_half(0.0);
        let shifted = w_eval_line(1e-6, 0.0, -0.25, &s).unwrap();
        let direct = w_eval_line(1e-6, 0.0, 0.25, &s).unwrap();
        assert!((shifted - direct).abs() < 1e-10 * shifted.abs());
        // W(x, 0) -> Gamma(1/4)^8, but slowly: the order-8 pole of G(1/2 + s, 0) at s = -1/2
        // leaves x^{1/2} log^7(1/x), which is 0.67 of the limit at x = 1e-6
        let devs: Vec<f64> = [1e-6, 1e-12, 1e-20, 1e-30]
            .iter()
            .map(|&x| (w_eval_line(x, 0.0, -0.25, &s).unwrap() - g).abs() / g)
            .collect();
        assert!(devs.windows(2).all(|w| w[1] < w[0]), "{devs:?}");
        assert!(devs[2] < 1e-3 && devs[3] < 1e-6, "{devs:?}");
    }

    #[test]
    fn table_matches_direct() {
        let table = WeightTable::global();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = spec();
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let l = rng.gen_range(-79.9..11.9);
            let t = rng.gen_range(0.0..13.9);
            let x = f64::exp(l);
            let want = w_eval(x, t, &s).unwrap();
            let got = table.w(x, t).unwrap();
            worst = worst.max((got - want).abs() / want.abs());
        }
        assert!(worst < 1e-8, "worst relative error {worst}");
    }

    #[test]
    fn table_samples_real_and_finite() {
        let table = WeightTable::global();
        let (nl, nt) = table.dims();
        assert_eq!(nl, 9201);
        assert!(nt as f64 * table.params.t_step > 40.0 && table.params.t_step <= 0.0125);
        for i in (0..nl).step_by(97) {
            for j in (0..nt).step_by(13) {
                assert!(table.sample(i, j).is_finite());
            }
        }
    }

    #[test]
    fn v_symmetry_and_scale() {
        let s = spec();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let xi = rng.gen_range(0.5..200.0);
            let eta = rng.gen_range(0.5..200.0);
            // mu >= 3 keeps xi eta pi^4 / mu^4 inside the table, as for the AFE (mu = q)
            let mu = rng.gen_range(3.0..10.0);
            let v = v_eval(xi, eta, mu, &s).unwrap();
            // V can be small through cancellation in t; errors are measured against the
            // unoscillating integral of W at the same product
            let g = (xi * eta).sqrt();
            let scale = v.abs().max(v_eval(g, g, mu, &s).unwrap().abs());
            assert!((v - v_eval(eta, xi, mu, &s).unwrap()).abs() <= 1e-12 * scale);
            for c in [0.5, 2.0, 10.0] {
                let w = v_eval(c * xi, c * eta, c.sqrt() * mu, &s).unwrap();
                assert!((w - v).abs() <= 1e-10 * scale, "{xi} {eta} {mu} {c}: {v} {w}");
            }
        }
    }

    #[test]
    fn v_matches_direct_quadrature() {
        // t-integral of directly evaluated W, no table
        let s = spec();
        for &(xi, eta, mu) in &[(1.0f64, 1.0f64, 5.0f64), (3.0, 40.0, 5.0), (100.0, 7.0, 2.0)] {
            let x = xi * eta * PI.powi(4) / mu.powi(4);
            let l = (eta / xi).ln();
            let (half, _) = crate::numeric::quad::trapezoid_real(
                |t| (t * l).cos() * w_eval(x, t, &s).unwrap(),
                0.0,
                16.0,
                &QuadratureSpec::default().with_step(0.1).with_tol(1e-16, 1e-11),
            )
            .unwrap();
            let v = v_eval(xi, eta, mu, &s).unwrap();
            assert!((2.0 * half - v).abs() < 1e-9 * v.abs().max(1e-3), "{xi} {eta} {mu}: {v} vs {}", 2.0 * half);
        }
    }

    #[test]
    fn v_decay_bound_on_probe_grid() {
        let rows = v_decay_scan(&v_decay_probes(), &spec()).unwrap();
        let worst = rows.iter().map(|r| r.ratio_floor).fold(0.0, f64::max);
        assert!(worst <= V_DECAY_CONSTANT, "{worst}");
        // only the most lopsided pairs (log(eta/xi) > 13) are lost in cancellation noise
        let lost: Vec<_> = rows.iter().filter(|r| !r.resolved()).collect();
        assert!(lost.len() * 10 < rows.len(), "{} of {}", lost.len(), rows.len());
        assert!(lost.iter().all(|r| (r.eta / r.xi).ln().abs() > 13.0));
    }

    #[test]
    fn w_pm_support_and_symmetry() {
        assert_eq!(w_pm(1.0, 2.0, 5.0, Sign::Plus).unwrap(), 0.0);
        assert_eq!(w_pm(1.0, 1.0, 1.0, Sign::Minus).unwrap(), 0.0);
        let a = w_pm(0.3, 0.5, 1.9, Sign::Plus).unwrap();
        let b = w_pm(0.5, 0.3, 1.9, Sign::Plus).unwrap();
        assert!(a > 0.0 && (a - b).abs() < 1e-14 * a);
    }

    #[test]
    fn mellin_w1_z0_two_routes() {
        let (x, y) = (0.7, 0.4);
        let m = MellinU::new(x, y).unwrap();
        for sign in Sign::both() {
            let d = sign.gap(x, y);
            let (direct, _) = tanh_sinh(
                |u, _, _| Complex64::new(w_pm(x, y, u, sign).unwrap() / u, 0.0),
                1.0 / d,
                2.0 / d,
                1e-11,
                8,
            )
            .unwrap();
            let via = m.signed(Complex64::new(0.0, 0.0), sign);
            assert!((direct - via).norm() < 1e-8 * via.norm(), "{sign:?}: {direct} {via}");
        }
    }

    #[test]
    fn mellin_w1_inversion() {
        let (x, y) = (0.7, 0.4);
        let m = MellinU::new(x, y).unwrap();
        let c = 0.5;
        for u in [1.2, 1.7, 2.5] {
            let want = w_pm(x, y, u, Sign::Plus).unwrap() + w_pm(x, y, u, Sign::Minus).unwrap();
            let r = trapezoid(
                |tau| {
                    let z = Complex64::new(c, tau);
                    m.total(z) * rpow(u, -z)
                },
                -50.0,
                50.0,
                &QuadratureSpec::default().with_step(0.05).with_tol(1e-12, 1e-10),
            )
            .unwrap();
            let got = r.value.re / (2.0 * PI);
            assert!((got - want).abs() < 1e-6, "u = {u}: {got} vs {want}");
        }
    }

    #[test]
    fn w3_pole_factor() {
        let s = QuadratureSpec::default();
        let z = Complex64::new(0.5, 0.0);
        // hold 4 omega + z fixed to first order by moving s1, s2 together
        let at = |om: f64| {
            let s1 = Complex64::new(0.25 + om, 0.0);
            mellin_w3_closed(s1, s1, z, &s).unwrap().norm()
        };
        let r = at(1e-5) / at(2e-5);
        assert!((r - 2.0).abs() < 1e-3, "{r}");
        assert!(mellin_w3_closed(Complex64::new(0.25, 0.0), Complex64::new(0.25, 0.0), z, &s).is_err());
        assert!(mellin_w3_closed(Complex64::new(0.9, 0.0), Complex64::new(0.1, 0.0), z, &s).is_err());
    }

    #[test]
    fn w3_bound_shape() {
        for scale in [1.0, 4.0] {
            let worst = w3_bound_scan(&w3_bound_probes(scale), &spec()).unwrap();
            assert!(worst <= W3_BOUND_CONSTANT, "scale {scale}: {worst}");
        }
    }

    #[test]
    fn w2_plus_symmetry() {
        let sp = MellinXySpec::scan();
        let (a, b) = (Complex64::new(1.5, 3.0), Complex64::new(2.0, -1.0));
        let x = mellin_w2(a, b, 1.0, SignSel::Plus, &sp).unwrap();
        let y = mellin_w2(b, a, 1.0, SignSel::Plus, &sp).unwrap();
        assert!((x - y).norm() < 1e-6 * x.norm().max(1e-6), "{x} {y}");
    }

    #[test]
    fn w2_scan_rule() {
        let row = |t, product| W2ScanRow { t, value_re: 0.0, value_im: 0.0, product };
        assert!(w2_scan_bounded(&[row(10.0, 1.0), row(20.0, 1.4), row(40.0, 0.1)]));
        assert!(!w2_scan_bounded(&[row(10.0, 1.0), row(20.0, 2.0)]));
        assert!(w2_scan_bounded(&[row(10.0, 1e-12), row(20.0, 1e-9)]));
    }
}
