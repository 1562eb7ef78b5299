//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use lmoments_core::numeric::quad::gauss_legendre_nodes;
use lmoments_core::weights::{psi, WeightTable};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Brute-force W~_3(s1, s2; z) as the triple integral of W(x, y; u) u^z x^{s1} y^{s2}
/// du/u dx/x dy/y, built from raw table samples only.
///
/// The u integral is done on v = u|x +- y| by Gauss-Legendre. In coordinates p = |x +- y|
/// and a log-ratio phi, log(xy pi^4 / v^4) = 2 log p + c(phi) + 4 log(pi / v), so the
/// p integral becomes a sum over the table's log x grid of e^{omega L} V(L, r). Below the
/// table V equals its x -> 0 limit and the tail e^{omega L} / omega is added exactly; this
/// matters because Re omega is small.
pub struct W3Oracle {
    /// every `stride`-th log x row, t-major: cols[j][k] = W(e^{L_k}, t_j)
    cols: Vec<Vec<f64>>,
    ls: Vec<f64>,
    t_step: f64,
}

impl W3Oracle {
    pub fn new(stride: usize) -> Self {
        let table = WeightTable::global();
        let (n_l, n_t) = table.dims();
        let p = table.params;
        let rows: Vec<usize> = (0..n_l).step_by(stride).collect();
        let cols = (0..n_t)
            .map(|j| rows.iter().map(|&i| table.sample(i, j)).collect())
            .collect();
        let ls = rows.iter().map(|&i| p.l_min + i as f64 * p.l_step).collect();
        W3Oracle { cols, ls, t_step: p.t_step }
    }

    /// V(L_k, r) for every retained row, by the trapezoid rule in t over the whole line.
    fn v_rows(&self, r: f64) -> Vec<f64> {
        let mut acc = vec![0.0; self.ls.len()];
        for (j, col) in self.cols.iter().enumerate() {
            let c = (r * j as f64 * self.t_step).cos() * if j == 0 { 1.0 } else { 2.0 };
            for (a, w) in acc.iter_mut().zip(col) {
                *a += c * w;
            }
        }
        acc.iter_mut().for_each(|a| *a *= self.t_step);
        acc
    }

    /// int e^{omega L} V(L, r) dL over the whole line.
    fn s(&self, r: f64, omega: Complex64) -> Complex64 {
        let v = self.v_rows(r);
        let h = self.ls[1] - self.ls[0];
        let n = v.len();
        let mut sum = Complex64::new(0.0, 0.0);
        for (k, (&l, &vk)) in self.ls.iter().zip(&v).enumerate() {
            let w = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
            sum += (omega * l).exp() * (vk * w);
        }
        sum * h + (omega * self.ls[0]).exp() * v[0] / omega
    }

    pub fn w3(&self, s1: Complex64, s2: Complex64, z: Complex64, phi_step: f64, phi_max: f64) -> Complex64 {
        let omega = (s1 + s2 - z) * 0.5;
        // v integral: int_1^2 Psi(v) v^z v^{4 omega} dv
        let vpart: Complex64 = gauss_legendre_nodes(1.0, 2.0, 8, 10)
            .into_iter()
            .map(|(v, w)| (z + omega * 4.0).scale(v.ln()).exp() * (w * psi(v)))
            .sum();
        let n = (phi_max / phi_step).round() as i64;
        let mut plus = Complex64::new(0.0, 0.0);
        let mut minus = Complex64::new(0.0, 0.0);
        for k in -n..=n {
            let phi = k as f64 * phi_step;
            // sign +: x = p theta, y = p (1 - theta), dx dy / xy = dp dphi / p
            let lt = -ln1p_exp(-phi);
            let l1t = -ln1p_exp(phi);
            let c = lt + l1t;
            plus += (s1 * lt + s2 * l1t - omega * c).exp() * self.s(phi, omega) * 0.5;
            // sign -: smaller = p e^phi, larger = p (1 + e^phi), either order
            let l_big = ln1p_exp(phi);
            let c = phi + l_big;
            let sr = self.s(l_big - phi, omega) * 0.5;
            for (a, b) in [(phi, l_big), (l_big, phi)] {
                minus += (s1 * a + s2 * b - l_big - omega * c).exp() * sr;
            }
        }
        let pre = vpart * (-omega * 4.0 * PI.ln()).exp() * phi_step;
        pre * (plus + minus)
    }
}

fn ln1p_exp(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}
