//! One function per subcommand: compute, build the report, collect checks.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use lmoments_core::arith::{
    bp_closed_form, bp_local, divisors, euler_constant, euler_constant_accelerated, euler_phi,
    f_func_identity_check, gcd, h_sum_identity_check, primes_up_to, sieve_tables, EulerKind,
};
use lmoments_core::characters::{build_group, orth_flat_in, orth_star_in, Parity};
use lmoments_core::lfunc::{fe_residual, l_eval, lambda_eval, ramachandra_spec, ramachandra_terms};
use lmoments_core::moments::{
    afe_check_modulus, lambda8_spec, lhs_moment, sieve_suite, AfeCheck, AfeSpec, MomentReport, MomentRow,
    SieveResult, LARGE_SIEVE_CONSTANT,
};
use lmoments_core::special::{gamma8_integral, h_dual};
use lmoments_core::weights::{v_decay_probes, v_decay_scan, v_eval, w_eval, WeightTable, V_DECAY_CONSTANT};
use lmoments_core::{Error, QuadratureSpec};

use crate::emit::{to_csv, to_json, Cell, EmitError, Format, Table};
use crate::manifest::Check;

/// A computed report, rendered on demand, plus the checks it ran.
pub struct Outcome {
    render: Box<dyn Fn(Format) -> Result<String, EmitError> + Send + Sync>,
    pub default_format: Format,
    pub checks: Vec<Check>,
}

impl Outcome {
    fn new<T, F>(report: T, table: F, checks: Vec<Check>) -> Self
    where
        T: Serialize + Send + Sync + 'static,
        F: Fn(&T) -> Result<Table, EmitError> + Send + Sync + 'static,
    {
        Outcome {
            render: Box::new(move |f| match f {
                Format::Json => to_json(&report),
                Format::Csv => to_csv(&table(&report)?),
            }),
            default_format: Format::Json,
            checks,
        }
    }

    /// Report whose CSV form is the flattened JSON.
    fn flat<T: Serialize + Send + Sync + 'static>(report: T, checks: Vec<Check>) -> Self {
        Outcome::new(
            report,
            |r| {
                let v = serde_json::to_value(r).map_err(|e| EmitError::Csv(e.to_string()))?;
                Table::from_json(&v)
            },
            checks,
        )
    }

    fn csv_by_default(mut self) -> Self {
        self.default_format = Format::Csv;
        self
    }

    pub fn render(&self, f: Format) -> Result<String, EmitError> {
        (self.render)(f)
    }
}

pub type CmdResult = Result<Outcome, Error>;

/// Optional overrides of a quadrature spec.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QuadOverrides {
    pub abs_tol: Option<f64>,
    pub rel_tol: Option<f64>,
    pub step: Option<f64>,
    pub radius: Option<f64>,
    pub max_refinements: Option<u32>,
}

impl QuadOverrides {
    pub fn apply(&self, mut spec: QuadratureSpec) -> Result<QuadratureSpec, Error> {
        if let Some(x) = self.abs_tol {
            spec.abs_tol = x;
        }
        if let Some(x) = self.rel_tol {
            spec.rel_tol = x;
        }
        if let Some(x) = self.step {
            spec.initial_step = x;
        }
        if let Some(x) = self.radius {
            spec.truncation_radius = x;
        }
        if let Some(x) = self.max_refinements {
            spec.max_refinements = x;
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

// ---------------------------------------------------------------- tau

#[derive(Serialize)]
struct TauRow {
    n: usize,
    tau4: u64,
}

pub fn tau(limit: usize) -> CmdResult {
    if limit == 0 {
        return Err(bad("--limit must be at least 1"));
    }
    let t = sieve_tables(limit)?;
    let rows: Vec<TauRow> = (1..=limit).map(|n| TauRow { n, tau4: t.tau4[n] }).collect();
    // tau_4 = 1 * 1 * 1 * 1 through nested divisor sums, on a prefix
    let check_to = limit.min(2000);
    let mismatches = (1..=check_to)
        .filter(|&n| {
            let tau3 = |d: u64| -> u64 { divisors(d).iter().map(|&e| divisors(e).len() as u64).sum() };
            divisors(n as u64).iter().map(|&d| tau3(d)).sum::<u64>() != t.tau4[n]
        })
        .count();
    let checks = vec![Check::at_most(
        format!("tau4 divisor recursion n <= {check_to}"),
        mismatches as f64,
        0.0,
    )];
    Ok(Outcome::flat(rows, checks))
}

// ---------------------------------------------------------------- chars

#[derive(Serialize)]
struct CharRow {
    modulus: u64,
    index: usize,
    conductor: u64,
    parity: &'static str,
    primitive: bool,
    /// chi(n) for n = 0..q-1 as (re, im)
    values: Vec<(f64, f64)>,
}

fn parity_name(p: Parity) -> &'static str {
    match p {
        Parity::Even => "even",
        Parity::Odd => "odd",
    }
}

pub fn chars(q: u64, primitive_even: bool) -> CmdResult {
    let group = build_group(q)?;
    let phi = euler_phi(q) as f64;
    let mut checks = Vec::new();
    let rows: Vec<CharRow> = group
        .characters
        .iter()
        .filter(|c| !primitive_even || (c.is_primitive && c.parity == Parity::Even))
        .map(|c| {
            let values = c.values();
            let total: Complex64 = values.iter().sum();
            let expect = if c.is_principal() { phi } else { 0.0 };
            checks.push(Check::at_most(
                format!("row sum q={q} index={}", c.index),
                (total - expect).norm(),
                1e-9 * phi.max(1.0),
            ));
            CharRow {
                modulus: c.modulus,
                index: c.index,
                conductor: c.conductor,
                parity: parity_name(c.parity),
                primitive: c.is_primitive,
                values: values.iter().map(|v| (v.re, v.im)).collect(),
            }
        })
        .collect();
    Ok(Outcome::new(
        rows,
        |rows| {
            let mut t = Table::new(&["modulus", "index", "conductor", "parity", "primitive", "n", "re", "im"]);
            for r in rows {
                for (n, &(re, im)) in r.values.iter().enumerate() {
                    t.push(vec![
                        r.modulus.into(),
                        r.index.into(),
                        r.conductor.into(),
                        r.parity.into(),
                        r.primitive.into(),
                        n.into(),
                        re.into(),
                        im.into(),
                    ]);
                }
            }
            Ok(t)
        },
        checks,
    ))
}

// ---------------------------------------------------------------- lfun

#[derive(Serialize)]
struct LfunReport {
    q: u64,
    character_index: usize,
    conductor: u64,
    parity: &'static str,
    s_re: f64,
    s_im: f64,
    l_re: f64,
    l_im: f64,
}

#[derive(Serialize)]
struct CompletedReport {
    #[serde(flatten)]
    l: LfunReport,
    lambda_re: f64,
    lambda_im: f64,
    fe_residual: f64,
}

/// L(s, chi) and, for primitive even chi, Lambda(s, chi) and the functional-equation
/// residual at s.
pub fn lfun(q: u64, index: usize, s: Complex64) -> CmdResult {
    let group = build_group(q)?;
    let chi = group
        .characters
        .get(index)
        .ok_or_else(|| bad(format!("--char {index}: modulus {q} has {} characters", group.len())))?;
    let l = l_eval(chi, s)?;
    let base = LfunReport {
        q,
        character_index: index,
        conductor: chi.conductor,
        parity: parity_name(chi.parity),
        s_re: s.re,
        s_im: s.im,
        l_re: l.re,
        l_im: l.im,
    };
    if !(chi.is_primitive && chi.parity == Parity::Even) {
        return Ok(Outcome::flat(base, Vec::new()));
    }
    let shifted = s - 0.5;
    let lambda = lambda_eval(chi, shifted)?;
    let fe = fe_residual(chi, shifted)?;
    let checks = vec![Check::at_most("functional equation", fe, 1e-8)];
    Ok(Outcome::flat(
        CompletedReport {
            l: base,
            lambda_re: lambda.re,
            lambda_im: lambda.im,
            fe_residual: fe,
        },
        checks,
    ))
}

// ---------------------------------------------------------------- gamma8

#[derive(Serialize)]
struct Gamma8Report {
    radius: f64,
    tol: f64,
    value: f64,
    error: f64,
    tail_bound: f64,
}

pub fn gamma8(radius: f64, tol: f64, quad: &QuadOverrides) -> CmdResult {
    let spec = QuadOverrides {
        abs_tol: Some(tol),
        rel_tol: Some(tol),
        radius: Some(radius),
        ..*quad
    }
    .apply(QuadratureSpec::default())?;
    let g = gamma8_integral(&spec)?;
    let checks = vec![
        Check::holds("integral positive", g.value > 0.0),
        Check::at_most("tail below tolerance", g.tail_bound, tol * g.value),
    ];
    Ok(Outcome::flat(
        Gamma8Report {
            radius,
            tol,
            value: g.value,
            error: g.error,
            tail_bound: g.tail_bound,
        },
        checks,
    ))
}

// ---------------------------------------------------------------- weights

#[derive(Serialize)]
struct WSample {
    t: f64,
    w: f64,
}

#[derive(Serialize)]
struct WeightsProbe {
    xi: f64,
    eta: f64,
    mu: f64,
    v: f64,
    v_noise: f64,
    /// log(xi eta pi^4 / mu^4), the argument of W inside V
    log_x: f64,
    samples: Vec<WSample>,
}

const PROBE_TS: [f64; 7] = [0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0];

pub fn weights_probe(xi: f64, eta: f64, mu: f64, quad: &QuadOverrides) -> CmdResult {
    if !(xi > 0.0 && eta > 0.0 && mu > 0.0) {
        return Err(bad("--probe needs x, y, mu > 0"));
    }
    let spec = quad.apply(QuadratureSpec::default())?;
    let table = WeightTable::global();
    let (v, noise) = table.v_with_noise(xi, eta, mu, &spec)?;
    let x = xi * eta * PI.powi(4) / mu.powi(4);
    let samples = PROBE_TS
        .iter()
        .map(|&t| Ok(WSample { t, w: w_eval(x, t, &spec)? }))
        .collect::<Result<Vec<_>, Error>>()?;
    let swapped = v_eval(eta, xi, mu, &spec)?;
    let scaled = v_eval(2.0 * xi, 2.0 * eta, 2f64.sqrt() * mu, &spec)?;
    let tol = 1e-8 * v.abs() + 2.0 * noise;
    let checks = vec![
        Check::at_most("V symmetric in xi, eta", (swapped - v).abs(), tol),
        Check::at_most("V scale invariant at c = 2", (scaled - v).abs(), tol),
    ];
    Ok(Outcome::new(
        WeightsProbe {
            xi,
            eta,
            mu,
            v,
            v_noise: noise,
            log_x: x.ln(),
            samples,
        },
        |p| {
            let mut t = Table::new(&["xi", "eta", "mu", "v", "v_noise", "log_x", "t", "w"]);
            for s in &p.samples {
                t.push(vec![
                    p.xi.into(),
                    p.eta.into(),
                    p.mu.into(),
                    p.v.into(),
                    p.v_noise.into(),
                    p.log_x.into(),
                    s.t.into(),
                    s.w.into(),
                ]);
            }
            Ok(t)
        },
        checks,
    ))
}

pub fn weights_decay(quad: &QuadOverrides) -> CmdResult {
    let spec = quad.apply(QuadratureSpec::default())?;
    let rows = v_decay_scan(&v_decay_probes(), &spec)?;
    let worst = rows.iter().map(|r| r.ratio_floor).fold(0.0, f64::max);
    let lost = rows.iter().filter(|r| !r.resolved()).count();
    let checks = vec![
        Check::at_most("decay bound with frozen constant", worst, V_DECAY_CONSTANT),
        Check::at_most("unresolved probe fraction", lost as f64 / rows.len() as f64, 0.1),
    ];
    Ok(Outcome::flat(rows, checks).csv_by_default())
}

// ---------------------------------------------------------------- ram-check

#[derive(Serialize)]
struct RamRow {
    q: u64,
    character_index: usize,
    c: f64,
    t: f64,
    x: f64,
    l4_re: f64,
    l4_im: f64,
    combined_re: f64,
    combined_im: f64,
    residual: f64,
}

pub struct RamGrid {
    pub moduli: Vec<u64>,
    pub cs: Vec<f64>,
    pub ts: Vec<f64>,
    pub xs: Vec<f64>,
    pub tol: f64,
}

pub fn ram_check(grid: &RamGrid) -> CmdResult {
    let spec = ramachandra_spec();
    let mut cases = Vec::new();
    for &q in &grid.moduli {
        let group = build_group(q)?;
        let prim: Vec<_> = group.primitive_even().cloned().collect();
        if prim.is_empty() {
            return Err(bad(format!("modulus {q} has no primitive even character")));
        }
        for chi in prim {
            for &c in &grid.cs {
                for &t in &grid.ts {
                    for &x in &grid.xs {
                        cases.push((chi.clone(), c, t, x));
                    }
                }
            }
        }
    }
    let rows = cases
        .par_iter()
        .map(|(chi, c, t, x)| {
            let terms = ramachandra_terms(chi, *c, *t, *x, &spec)?;
            let l4 = l_eval(chi, Complex64::new(0.5 + c, *t))?.powi(4);
            let comb = terms.combined();
            Ok(RamRow {
                q: chi.modulus,
                character_index: chi.index,
                c: *c,
                t: *t,
                x: *x,
                l4_re: l4.re,
                l4_im: l4.im,
                combined_re: comb.re,
                combined_im: comb.im,
                residual: (l4 - comb).norm() / l4.norm(),
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let checks = rows
        .iter()
        .map(|r| {
            Check::at_most(
                format!("ramachandra q={} index={} c={} t={} X={}", r.q, r.character_index, r.c, r.t, r.x),
                r.residual,
                grid.tol,
            )
        })
        .collect();
    Ok(Outcome::flat(rows, checks))
}

// ---------------------------------------------------------------- afe-check

/// Pass rule for one AFE comparison: relative difference below max(1e-2, 3 tail / lhs).
pub fn afe_tolerance(c: &AfeCheck) -> f64 {
    1e-2f64.max(3.0 * c.tail_estimate / c.lhs)
}

pub fn afe_check(q: u64, spec: &AfeSpec, quad: &QuadOverrides) -> CmdResult {
    let quad = quad.apply(lambda8_spec())?;
    let checks_out = afe_check_modulus(q, spec, &quad)?;
    if checks_out.is_empty() {
        return Err(bad(format!("modulus {q} has no primitive even character")));
    }
    let checks = checks_out
        .iter()
        .map(|c| Check::at_most(format!("afe q={} index={}", c.q, c.character_index), c.rel_diff, afe_tolerance(c)))
        .collect();
    Ok(Outcome::flat(checks_out, checks))
}

// ---------------------------------------------------------------- moment

const MOMENT_COLUMNS: [&str; 9] = [
    "record",
    "q",
    "phi_flat",
    "psi_weight",
    "moment_sum",
    "contribution",
    "main_term",
    "key",
    "value",
];

/// One CSV for a [`MomentReport`]: `per_q` rows, then one `summary` row per scalar field.
pub fn moment_table(r: &MomentReport) -> Table {
    let mut t = Table::new(&MOMENT_COLUMNS);
    for row in &r.per_q {
        t.push(vec![
            "per_q".into(),
            row.q.into(),
            row.phi_flat.into(),
            row.psi_weight.into(),
            row.moment_sum.into(),
            row.contribution.into(),
            row.main_term.into(),
            Cell::Empty,
            Cell::Empty,
        ]);
    }
    let scalars = [
        ("big_q", r.big_q),
        ("lhs_total", r.lhs_total),
        ("main_term", r.main_term),
        ("ratio", r.ratio),
        ("t_truncation", r.t_truncation),
        ("t_step", r.t_step),
        ("quadrature_error", r.quadrature_error),
        ("tail_estimate", r.tail_estimate),
        ("a4", r.a4),
        ("gamma8", r.gamma8),
    ];
    for (k, v) in scalars {
        let mut row = vec![Cell::from("summary")];
        row.extend(std::iter::repeat(Cell::Empty).take(6));
        row.push(k.into());
        row.push(v.into());
        t.push(row);
    }
    t
}

/// Inverse of [`moment_table`] after CSV emission.
pub fn moment_from_csv(text: &str) -> Result<MomentReport, String> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers().map_err(|e| e.to_string())?.iter().map(String::from).collect();
    if header != MOMENT_COLUMNS {
        return Err(format!("unexpected header {header:?}"));
    }
    let f = |s: &str| s.parse::<f64>().map_err(|e| format!("`{s}`: {e}"));
    let u = |s: &str| s.parse::<u64>().map_err(|e| format!("`{s}`: {e}"));
    let mut per_q = Vec::new();
    let mut scalars = std::collections::BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        match &rec[0] {
            "per_q" => per_q.push(MomentRow {
                q: u(&rec[1])?,
                phi_flat: u(&rec[2])?,
                psi_weight: f(&rec[3])?,
                moment_sum: f(&rec[4])?,
                contribution: f(&rec[5])?,
                main_term: f(&rec[6])?,
            }),
            "summary" => {
                scalars.insert(rec[7].to_string(), f(&rec[8])?);
            }
            other => return Err(format!("unknown record kind `{other}`")),
        }
    }
    let mut get = |k: &str| scalars.remove(k).ok_or_else(|| format!("missing summary `{k}`"));
    Ok(MomentReport {
        big_q: get("big_q")?,
        per_q,
        lhs_total: get("lhs_total")?,
        main_term: get("main_term")?,
        ratio: get("ratio")?,
        t_truncation: get("t_truncation")?,
        t_step: get("t_step")?,
        quadrature_error: get("quadrature_error")?,
        tail_estimate: get("tail_estimate")?,
        a4: get("a4")?,
        gamma8: get("gamma8")?,
    })
}

/// Checks on a moment report. The ratio band is reported, not checked: the main term
/// is not expected to dominate at these sizes.
pub fn moment_checks(r: &MomentReport) -> Vec<Check> {
    let sum: f64 = r.per_q.iter().map(|row| row.contribution).sum();
    vec![
        Check::at_most("per_q contributions add up to lhs_total", (sum - r.lhs_total).abs(), 0.0),
        Check::holds("lhs_total positive", r.lhs_total > 0.0),
        Check::holds("main_term positive", r.main_term > 0.0),
        Check::at_most(
            "quadrature error relative to lhs_total",
            (r.quadrature_error + r.tail_estimate) / r.lhs_total,
            1e-6,
        ),
    ]
}

pub fn moment(big_q: f64, quad: &QuadOverrides) -> CmdResult {
    let spec = quad.apply(lambda8_spec())?;
    let report = lhs_moment(big_q, &spec)?;
    let checks = moment_checks(&report);
    Ok(Outcome::new(report, |r| Ok(moment_table(r)), checks))
}

// ---------------------------------------------------------------- sieve-check

pub fn sieve_check(trials: usize, seed: u64) -> CmdResult {
    if trials == 0 {
        return Err(bad("--trials must be at least 1"));
    }
    let rows: Vec<SieveResult> = sieve_suite(trials, seed)?;
    let checks = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            Check::at_most(
                format!("large sieve trial {i} Q={} T={:.3} N={}", r.big_q, r.t, r.n),
                r.ratio,
                LARGE_SIEVE_CONSTANT,
            )
        })
        .collect();
    Ok(Outcome::flat(rows, checks).csv_by_default())
}

// ---------------------------------------------------------------- euler-const

#[derive(Serialize)]
struct EulerReport {
    kind: &'static str,
    cutoff: u64,
    accelerated: bool,
    value: f64,
    /// low word of the double-double value
    value_lo: f64,
    /// bound on |log| of the omitted part of the product
    tail_bound: f64,
}

pub fn euler_const(kind: &str, cutoff: u64, accelerated: bool) -> CmdResult {
    let k = EulerKind::parse(kind).ok_or_else(|| bad(format!("--kind `{kind}`: expected a4, a3, calA or diag")))?;
    let v = if accelerated {
        euler_constant_accelerated(k, cutoff)?
    } else {
        euler_constant(k, cutoff)?
    };
    let checks = vec![Check::holds(
        "value finite and positive",
        v.value.hi.is_finite() && v.value.hi > 0.0,
    )];
    Ok(Outcome::flat(
        EulerReport {
            kind: k.name(),
            cutoff,
            accelerated,
            value: v.value.hi,
            value_lo: v.value.lo,
            tail_bound: v.tail_bound,
        },
        checks,
    ))
}

// ---------------------------------------------------------------- identities

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Orthogonality,
    FunctionalEquation,
    HDual,
    VScale,
    Euler,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Orthogonality => "orthogonality",
            Suite::FunctionalEquation => "functional-equation",
            Suite::HDual => "h-dual",
            Suite::VScale => "v-scale",
            Suite::Euler => "euler",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteParams {
    pub q_max: u64,
    pub mn_max: u64,
    pub points: usize,
    pub seed: u64,
}

#[derive(Serialize)]
struct SuiteSummary {
    suite: &'static str,
    cases: usize,
    failed: usize,
    max_residual: f64,
}

/// Every (q, m, n) with q <= q_max, m, n <= mn_max and gcd(mn, q) = 1: both the
/// primitive and the primitive-even orthogonality relations, worst residual per case.
pub fn orthogonality_cases(q_max: u64, mn_max: u64) -> Result<Vec<Check>, Error> {
    let per_q = (1..=q_max)
        .into_par_iter()
        .map(|q| {
            let group = build_group(q)?;
            let mut out = Vec::new();
            for m in 1..=mn_max {
                for n in 1..=mn_max {
                    if gcd(m * n, q) != 1 {
                        continue;
                    }
                    let a = orth_star_in(&group, m, n)?;
                    let b = orth_flat_in(&group, m, n)?;
                    // both sides are integers (halves for the even relation) after rounding
                    let r = a.residual().max(b.residual());
                    out.push(Check::at_most(format!("orthogonality q={q} m={m} n={n}"), r, 1e-9));
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(per_q.into_iter().flatten().collect())
}

pub const FE_POINTS: [(f64, f64); 3] = [(0.1, 0.0), (0.3, 0.5), (0.05, 2.0)];

pub fn functional_equation_cases(q_max: u64) -> Result<Vec<Check>, Error> {
    let per_q = (1..=q_max)
        .into_par_iter()
        .map(|q| {
            let group = build_group(q)?;
            let mut out = Vec::new();
            for chi in group.primitive_even() {
                for &(re, im) in &FE_POINTS {
                    let r = fe_residual(chi, Complex64::new(re, im))?;
                    out.push(Check::at_most(
                        format!("functional equation q={q} index={} s={re}+{im}i", chi.index),
                        r,
                        1e-8,
                    ));
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(per_q.into_iter().flatten().collect())
}

/// Seeded (u, v) with Re u in (0.1, 0.4), Re v in (0.5, 0.9), |Im| < 10, away from poles.
pub fn h_dual_points(count: usize, seed: u64) -> Vec<(Complex64, Complex64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let u = Complex64::new(rng.gen_range(0.1..0.4), rng.gen_range(-10.0..10.0));
            let v = Complex64::new(rng.gen_range(0.5..0.9), rng.gen_range(-10.0..10.0));
            (u, v)
        })
        .collect()
}

pub fn h_dual_cases(count: usize, seed: u64) -> Result<Vec<Check>, Error> {
    h_dual_points(count, seed)
        .iter()
        .enumerate()
        .map(|(i, &(u, v))| {
            let (a, b) = h_dual(u, v)?;
            Ok(Check::at_most(format!("h-dual point {i}"), (a - b).norm() / b.norm(), 1e-9))
        })
        .collect()
}

/// Seeded (xi, eta, mu) with xi, eta in (0.5, 200) and mu in (3, 10).
pub fn v_scale_triples(count: usize, seed: u64) -> Vec<(f64, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (rng.gen_range(0.5..200.0), rng.gen_range(0.5..200.0), rng.gen_range(3.0..10.0)))
        .collect()
}

/// |V(c xi, c eta; sqrt(c) mu) - V(xi, eta; mu)| relative to |V|, c in {0.5, 2, 10}.
///
/// Where V nearly cancels, |V| is replaced by V at the geometric-mean pair, the size of
/// the unoscillating integral.
pub fn v_scale_cases(count: usize, seed: u64) -> Result<Vec<Check>, Error> {
    let spec = QuadratureSpec::default();
    let per = v_scale_triples(count, seed)
        .par_iter()
        .enumerate()
        .map(|(i, &(xi, eta, mu))| {
            let v = v_eval(xi, eta, mu, &spec)?;
            let g = (xi * eta).sqrt();
            let scale = v.abs().max(v_eval(g, g, mu, &spec)?.abs());
            let mut worst = 0.0f64;
            for c in [0.5, 2.0, 10.0] {
                let w = v_eval(c * xi, c * eta, c.sqrt() * mu, &spec)?;
                worst = worst.max((w - v).abs() / scale);
            }
            Ok(Check::at_most(format!("V scale triple {i}"), worst, 1e-8))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(per)
}

/// B_p against its closed form for p <= 100, A against a_4 at cutoff 10^5, the h-sum
/// identity at s = 2 and the F double-sum identity at z = 1/2.
pub fn euler_cases() -> Result<Vec<Check>, Error> {
    let mut out = Vec::new();
    for p in primes_up_to(100) {
        let b = bp_local(p, 200)?;
        out.push(Check::at_most(
            format!("B_p closed form p={p}"),
            (b.value - bp_closed_form(p)).to_f64().abs(),
            1e-12,
        ));
    }
    let a = euler_constant(EulerKind::CalA, 100_000)?;
    let b = euler_constant(EulerKind::A4, 100_000)?;
    let tol = a.value.hi * a.tail_bound.exp_m1() + b.value.hi * b.tail_bound.exp_m1();
    out.push(Check::at_most("A - a4 at cutoff 1e5", (a.value - b.value).to_f64().abs(), tol));
    let s = Complex64::new(2.0, 0.0);
    for (a, b, m, n) in [(1u64, 1u64, 1u64, 1u64), (2, 1, 3, 5), (1, 3, 2, 5), (2, 3, 5, 7)] {
        let r = h_sum_identity_check(a, b, m, n, s, 100_000, 100_000)?;
        out.push(Check::at_most(format!("h-sum a={a} b={b} M={m} N={n} s=2"), r.residual, 1e-6));
    }
    let z = Complex64::new(0.5, 0.0);
    for (g, m, n) in [(1u64, 1u64, 1u64), (2, 3, 1), (1, 2, 3), (6, 5, 7)] {
        let r = f_func_identity_check(z, g, m, n, 10_000, 10_000)?;
        out.push(Check::at_most(format!("F double sum g={g} M={m} N={n} z=1/2"), r.residual, 1e-4));
    }
    Ok(out)
}

pub fn identities(suite: Suite, p: &SuiteParams) -> CmdResult {
    let checks = match suite {
        Suite::Orthogonality => orthogonality_cases(p.q_max, p.mn_max)?,
        Suite::FunctionalEquation => functional_equation_cases(p.q_max)?,
        Suite::HDual => h_dual_cases(p.points, p.seed)?,
        Suite::VScale => v_scale_cases(p.points, p.seed)?,
        Suite::Euler => euler_cases()?,
    };
    let summary = SuiteSummary {
        suite: suite.name(),
        cases: checks.len(),
        failed: checks.iter().filter(|c| !c.passed).count(),
        max_residual: checks.iter().map(|c| c.residual).fold(0.0, f64::max),
    };
    Ok(Outcome::flat(summary, checks))
}
