use lmoments_core::characters::build_group;
use lmoments_core::moments::*;
use lmoments_core::numeric::quad::QuadratureSpec;
use num_complex::Complex64;

#[test]
fn afe_identity_small_moduli() {
    for q in [5u64, 7, 8] {
        let checks = afe_check_modulus(q, &AfeSpec::default(), &lambda8_spec()).unwrap();
        assert!(!checks.is_empty());
        for c in &checks {
            let tol = 1e-2f64.max(3.0 * c.tail_estimate / c.lhs);
            assert!(c.rel_diff < tol, "{c:?}");
            // far tighter in practice: the omitted pairs carry almost no weight
            assert!(c.rel_diff < 1e-8, "{c:?}");
            assert!(c.diagonal > 0.0);
            assert!(c.rhs_imag.abs() < 1e-9 * c.rhs.abs());
        }
    }
}

#[test]
fn afe_conjugate_invariance_and_flagging() {
    let group = build_group(5).unwrap();
    let chi = group.primitive_even().next().unwrap();
    assert!(chi.is_real());
    let terms = AfeTerms::build(5, &AfeSpec { limit: 300, ..AfeSpec::default() }).unwrap();
    let (a, da) = terms.sum(chi);
    let (b, db) = terms.sum(&chi.conj());
    assert_eq!(a.re.to_bits(), b.re.to_bits());
    assert_eq!(da.to_bits(), db.to_bits());
    // the decay-bound tail at 300 is far above target: strict mode refuses
    let strict = AfeSpec { limit: 300, strict: true, ..AfeSpec::default() };
    let quad = lambda8_spec();
    assert!(matches!(afe_rhs(chi, &strict, &quad), Err(lmoments_core::Error::InsufficientLimit { .. })));
    let flagged = afe_rhs(chi, &AfeSpec { limit: 300, ..AfeSpec::default() }, &quad).unwrap();
    assert!(!flagged.limit_sufficient && flagged.required_limit > 300);
}

#[test]
fn moment_report_structure() {
    let spec = lambda8_spec();
    let r = lhs_moment(10.0, &spec).unwrap();
    let qs: Vec<u64> = r.per_q.iter().map(|row| row.q).collect();
    let want: Vec<u64> = (11..=19).filter(|&q| lmoments_core::characters::phi_flat(q) > 0).collect();
    assert_eq!(qs, want);
    let total: f64 = r.per_q.iter().map(|row| row.contribution).sum();
    assert_eq!(total, r.lhs_total);
    assert!(r.lhs_total > 0.0 && r.ratio.is_finite() && r.ratio > 0.0);
    // doubling the t truncation moves the total by less than the tail estimate allows
    let wide = lhs_moment(10.0, &QuadratureSpec { truncation_radius: 80.0, ..spec }).unwrap();
    assert!((wide.lhs_total - r.lhs_total).abs() <= r.tail_estimate + 1e-9 * r.lhs_total);
    // moduli without primitive even characters contribute nothing
    assert!(lambda8_modulus(6, &spec).unwrap().is_empty());
    assert!(lhs_moment(3.0, &spec).is_err());
}

#[test]
fn diagonal_constant_with_a4() {
    let d = diagonal_constant(12.0).unwrap();
    let a4 = lmoments_core::arith::euler_constant_accelerated(lmoments_core::arith::EulerKind::A4, 100_000).unwrap();
    let e = diagonal_constant_with(12.0, a4.value.to_f64(), a4.tail_bound).unwrap();
    assert!((d.value - e.value).abs() <= (d.rel_tail + e.rel_tail + 1e-14) * d.value, "{d:?} {e:?}");
}

/// int_{-T}^{T} |sum b_n n^{it}|^2 dt in closed form: sum b_m conj(b_n) 2 sin(T log(m/n)) / log(m/n).
fn sinc_oracle(big_q: u64, t: f64, coeffs: &[Complex64]) -> f64 {
    let mut total = 0.0;
    for q in 1..=big_q {
        let g = build_group(q).unwrap();
        let scale = q as f64 / lmoments_core::arith::euler_phi(q) as f64;
        for chi in g.primitive() {
            let b: Vec<Complex64> = coeffs.iter().enumerate().map(|(k, a)| chi.value(k as u64 + 1) * a).collect();
            let mut s = 0.0;
            for (m, bm) in b.iter().enumerate() {
                for (n, bn) in b.iter().enumerate() {
                    let d = ((m + 1) as f64 / (n + 1) as f64).ln();
                    let k = if m == n { 2.0 * t } else { 2.0 * (t * d).sin() / d };
                    s += (bm * bn.conj()).re * k;
                }
            }
            total += scale * s;
        }
    }
    total
}

#[test]
fn large_sieve_matches_sinc_oracle() {
    for inst in sieve_instances(6, 99).into_iter().map(|mut s| {
        s.coeffs.truncate(60);
        s
    }) {
        let r = large_sieve_ratio(inst.big_q, inst.t, &inst.coeffs).unwrap();
        let want = sinc_oracle(inst.big_q, inst.t, &inst.coeffs);
        assert!((r.lhs - want).abs() < 1e-9 * want, "{} vs {want}", r.lhs);
    }
}

#[test]
fn large_sieve_coprimality_kills_higher_moduli() {
    // a_n supported on multiples of 2*3*5*7: every character mod q in 2..=7 vanishes there,
    // leaving only the trivial character mod 1
    let mut coeffs = vec![Complex64::new(0.0, 0.0); 840];
    for n in (210..=840).step_by(210) {
        coeffs[n - 1] = Complex64::new(1.0, -0.5);
    }
    let full = large_sieve_ratio(7, 3.0, &coeffs).unwrap();
    let only_one = large_sieve_ratio(1, 3.0, &coeffs).unwrap();
    assert!((full.lhs - only_one.lhs).abs() < 1e-12 * only_one.lhs);
}

#[test]
fn large_sieve_suite_bounded() {
    let rows = sieve_suite(10, 2024).unwrap();
    assert!(rows.iter().all(|r| r.ratio > 0.0 && r.ratio <= LARGE_SIEVE_CONSTANT), "{rows:?}");
}
