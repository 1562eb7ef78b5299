//! Dirichlet characters through the CRT decomposition of (Z/qZ)^*.
//!
//! A character is an exponent vector against fixed generators. Values are exact
//! phases k/E (E the group exponent) turned into complex units on demand, so a
//! group of size phi(q) needs O(q) memory rather than O(q phi(q)).

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::arith::{divisors, euler_phi, factorize, gcd, mobius};
use crate::error::{invalid, Error, Result};

pub const MAX_MODULUS: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

/// One cyclic factor of the unit group: residues mod `modulus` (a prime power) map to
/// their discrete log base `generator`, an integer mod `order`.
#[derive(Clone, Debug)]
pub struct CyclicFactor {
    pub prime: u64,
    pub exponent: u32,
    pub modulus: u64,
    pub generator: u64,
    pub order: u64,
    /// For 2^k, k >= 3: whether this is the {+1, -1} factor or the factor generated by 5.
    pub two_part: Option<TwoPart>,
    log: Vec<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TwoPart {
    Sign,
    Five,
}

const NOT_UNIT: u32 = u32::MAX;

impl CyclicFactor {
    fn log_of(&self, a: u64) -> u32 {
        self.log[(a % self.modulus) as usize]
    }
}

#[derive(Debug)]
struct GroupData {
    modulus: u64,
    factors: Vec<CyclicFactor>,
    /// lcm of the factor orders
    exponent: u64,
    roots: Vec<Complex64>,
}

#[derive(Clone, Debug)]
pub struct DirichletCharacter {
    pub modulus: u64,
    /// Position in the enumeration of its group (0 is the principal character).
    pub index: usize,
    pub exponents: Vec<u64>,
    pub parity: Parity,
    pub conductor: u64,
    pub is_primitive: bool,
    group: Arc<GroupData>,
}

#[derive(Clone, Debug)]
pub struct CharacterGroup {
    pub modulus: u64,
    pub characters: Vec<DirichletCharacter>,
    group: Arc<GroupData>,
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = (r as u128 * b as u128 % m as u128) as u64;
        }
        b = (b as u128 * b as u128 % m as u128) as u64;
        e >>= 1;
    }
    r
}

fn primitive_root_prime(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let fac: Vec<u64> = factorize(p - 1).into_iter().map(|(r, _)| r).collect();
    (2..p)
        .find(|&g| fac.iter().all(|&r| pow_mod(g, (p - 1) / r, p) != 1))
        .expect("every prime has a primitive root")
}

fn cyclic_log_table(modulus: u64, generator: u64, order: u64) -> Vec<u32> {
    let mut log = vec![NOT_UNIT; modulus as usize];
    let mut x = 1u64;
    for k in 0..order {
        log[x as usize] = k as u32;
        x = x * generator % modulus;
    }
    log
}

fn build_factors(q: u64) -> Vec<CyclicFactor> {
    let mut out = Vec::new();
    for (p, k) in factorize(q) {
        let pk = p.pow(k);
        if p == 2 {
            match k {
                1 => {}
                2 => out.push(CyclicFactor {
                    prime: 2,
                    exponent: 2,
                    modulus: 4,
                    generator: 3,
                    order: 2,
                    two_part: None,
                    log: vec![NOT_UNIT, 0, NOT_UNIT, 1],
                }),
                _ => {
                    let order5 = pk / 4;
                    let powers5 = cyclic_log_table(pk, 5, order5);
                    let mut sign = vec![NOT_UNIT; pk as usize];
                    let mut five = vec![NOT_UNIT; pk as usize];
                    for a in (1..pk).step_by(2) {
                        let (b, rest) = if a % 4 == 1 { (0, a) } else { (1, pk - a) };
                        sign[a as usize] = b;
                        five[a as usize] = powers5[rest as usize];
                    }
                    out.push(CyclicFactor {
                        prime: 2,
                        exponent: k,
                        modulus: pk,
                        generator: pk - 1,
                        order: 2,
                        two_part: Some(TwoPart::Sign),
                        log: sign,
                    });
                    out.push(CyclicFactor {
                        prime: 2,
                        exponent: k,
                        modulus: pk,
                        generator: 5,
                        order: order5,
                        two_part: Some(TwoPart::Five),
                        log: five,
                    });
                }
            }
        } else {
            let mut g = primitive_root_prime(p);
            if k > 1 && pow_mod(g, p - 1, p * p) == 1 {
                g += p;
            }
            let order = pk / p * (p - 1);
            out.push(CyclicFactor {
                prime: p,
                exponent: k,
                modulus: pk,
                generator: g,
                order,
                two_part: None,
                log: cyclic_log_table(pk, g, order),
            });
        }
    }
    out
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

impl GroupData {
    /// Phase of chi(a) as k in Z/E (chi(a) = e^{2 pi i k / E}), None off the units.
    fn phase(&self, exps: &[u64], a: u64) -> Option<u64> {
        let mut k = 0u64;
        for (f, &e) in self.factors.iter().zip(exps) {
            let l = f.log_of(a);
            if l == NOT_UNIT {
                return None;
            }
            let step = self.exponent / f.order;
            k = (k + (e * l as u64 % f.order) * step) % self.exponent;
        }
        if self.modulus > 1 && gcd(a % self.modulus, self.modulus) != 1 {
            return None;
        }
        Some(k)
    }
}

/// Conductor from the exponent vector, one prime at a time.
fn conductor_of(factors: &[CyclicFactor], exps: &[u64]) -> u64 {
    let mut cond = 1u64;
    let mut i = 0;
    while i < factors.len() {
        let f = &factors[i];
        if f.prime == 2 && f.two_part == Some(TwoPart::Sign) {
            let eb = exps[i];
            let ec = exps[i + 1];
            let k = f.exponent;
            if eb != 0 || ec != 0 {
                // smallest j with 2^{k-j} | e_c
                let mut j = 2;
                while j < k && ec % (1u64 << (k - j)) != 0 {
                    j += 1;
                }
                cond *= 1u64 << j.max(2);
            }
            i += 2;
            continue;
        }
        let e = exps[i];
        if e != 0 {
            if f.prime == 2 {
                cond *= 4;
            } else {
                let mut j = 1;
                while j < f.exponent && e % f.prime.pow(f.exponent - j) != 0 {
                    j += 1;
                }
                cond *= f.prime.pow(j);
            }
        }
        i += 1;
    }
    cond
}

/// All phi(q) characters mod q.
pub fn build_group(q: u64) -> Result<CharacterGroup> {
    if q == 0 {
        return invalid("modulus must be at least 1");
    }
    if q > MAX_MODULUS {
        return invalid(format!("modulus {q} exceeds the desk-scale limit {MAX_MODULUS}"));
    }
    let factors = build_factors(q);
    let exponent = factors.iter().fold(1, |acc, f| lcm(acc, f.order));
    let roots = (0..exponent)
        .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / exponent as f64))
        .collect();
    let data = Arc::new(GroupData {
        modulus: q,
        factors,
        exponent,
        roots,
    });
    let count: u64 = data.factors.iter().map(|f| f.order).product();
    debug_assert_eq!(count, euler_phi(q));
    let mut characters = Vec::with_capacity(count as usize);
    let mut exps = vec![0u64; data.factors.len()];
    for index in 0..count as usize {
        let conductor = conductor_of(&data.factors, &exps);
        let minus_one = if q == 1 { 0 } else { q - 1 };
        let parity = match data.phase(&exps, minus_one) {
            Some(0) => Parity::Even,
            _ => Parity::Odd,
        };
        characters.push(DirichletCharacter {
            modulus: q,
            index,
            exponents: exps.clone(),
            parity,
            conductor,
            is_primitive: conductor == q,
            group: Arc::clone(&data),
        });
        // mixed-radix increment, first factor fastest
        for (e, f) in exps.iter_mut().zip(&data.factors) {
            *e += 1;
            if *e < f.order {
                break;
            }
            *e = 0;
        }
    }
    Ok(CharacterGroup {
        modulus: q,
        characters,
        group: data,
    })
}

impl CharacterGroup {
    pub fn len(&self) -> usize {
        self.characters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.characters.is_empty()
    }

    pub fn factors(&self) -> &[CyclicFactor] {
        &self.group.factors
    }

    pub fn primitive(&self) -> impl Iterator<Item = &DirichletCharacter> {
        self.characters.iter().filter(|c| c.is_primitive)
    }

    pub fn primitive_even(&self) -> impl Iterator<Item = &DirichletCharacter> {
        self.primitive().filter(|c| c.parity == Parity::Even)
    }
}

impl DirichletCharacter {
    /// chi(n) as an exact phase k/E, None when gcd(n, q) > 1.
    pub fn phase(&self, n: u64) -> Option<u64> {
        self.group.phase(&self.exponents, n % self.modulus.max(1))
    }

    /// Order E of the phase group; chi(n) = exp(2 pi i phase(n) / E).
    pub fn phase_modulus(&self) -> u64 {
        self.group.exponent
    }

    pub fn value(&self, n: u64) -> Complex64 {
        match self.phase(n) {
            Some(k) => self.group.roots[k as usize],
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Full value table indexed by n mod q.
    pub fn values(&self) -> Vec<Complex64> {
        (0..self.modulus).map(|n| self.value(n)).collect()
    }

    pub fn is_principal(&self) -> bool {
        self.exponents.iter().all(|&e| e == 0)
    }

    /// The complex conjugate character.
    pub fn conj(&self) -> DirichletCharacter {
        let exponents: Vec<u64> = self
            .exponents
            .iter()
            .zip(&self.group.factors)
            .map(|(&e, f)| (f.order - e) % f.order)
            .collect();
        let mut index = 0usize;
        let mut radix = 1usize;
        for (&e, f) in exponents.iter().zip(&self.group.factors) {
            index += e as usize * radix;
            radix *= f.order as usize;
        }
        DirichletCharacter {
            index,
            exponents,
            group: Arc::clone(&self.group),
            ..self.clone()
        }
    }

    pub fn is_real(&self) -> bool {
        self.exponents
            .iter()
            .zip(&self.group.factors)
            .all(|(&e, f)| (2 * e) % f.order == 0)
    }
}

/// Conductor by brute force: smallest d | q with chi trivial on units congruent to 1 mod d.
pub fn conductor(chi: &DirichletCharacter) -> u64 {
    chi.conductor
}

pub fn conductor_brute_force(chi: &DirichletCharacter) -> u64 {
    let q = chi.modulus;
    for d in divisors(q) {
        let trivial = (1..=q)
            .filter(|&a| a % d == 1 % d && gcd(a, q) == 1)
            .all(|a| chi.phase(a) == Some(0));
        if trivial {
            return d;
        }
    }
    q
}

pub fn gauss_sum_raw(chi: &DirichletCharacter) -> Complex64 {
    let q = chi.modulus;
    let mut s = Complex64::new(0.0, 0.0);
    for a in 0..q {
        if let Some(k) = chi.phase(a) {
            s += chi.group.roots[k as usize] * Complex64::from_polar(1.0, 2.0 * PI * a as f64 / q as f64);
        }
    }
    s
}

/// tau(chi) = sum_a chi(a) e(a/q); only defined here for primitive chi.
pub fn gauss_sum(chi: &DirichletCharacter) -> Result<Complex64> {
    if !chi.is_primitive {
        return Err(Error::NotPrimitive {
            modulus: chi.modulus,
            conductor: chi.conductor,
        });
    }
    Ok(gauss_sum_raw(chi))
}

/// Root number tau(chi)/sqrt(q) of an even primitive character.
pub fn root_number(chi: &DirichletCharacter) -> Result<Complex64> {
    if chi.parity != Parity::Even {
        return Err(Error::OddCharacter);
    }
    Ok(gauss_sum(chi)? / (chi.modulus as f64).sqrt())
}

/// Number of primitive even characters mod q:
/// (1/2)[sum_{dr=q} mu(d) phi(r) + sum_{dr=q, r|2} mu(d) phi(r)].
pub fn phi_flat(q: u64) -> u64 {
    let mut all = 0i64;
    let mut signed = 0i64;
    for r in divisors(q) {
        let term = mobius(q / r) * euler_phi(r) as i64;
        all += term;
        if 2 % r == 0 {
            signed += term;
        }
    }
    ((all + signed) / 2) as u64
}

/// sum_{dr = q, r | k} mu(d) phi(r)
fn divisor_side(q: u64, k: i64) -> i64 {
    divisors(q)
        .into_iter()
        .filter(|&r| k % r as i64 == 0)
        .map(|r| mobius(q / r) * euler_phi(r) as i64)
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OrthPair {
    pub lhs: Complex64,
    pub rhs: f64,
}

impl OrthPair {
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).norm()
    }
}

fn check_coprime(q: u64, m: u64, n: u64) -> Result<()> {
    if gcd(m, q) != 1 || gcd(n, q) != 1 {
        return invalid(format!("orthogonality needs gcd(mn, q) = 1 (q = {q}, m = {m}, n = {n})"));
    }
    Ok(())
}

/// sum over primitive chi of chi(m) conj(chi(n)), against sum_{dr=q, r|(m-n)} mu(d) phi(r).
pub fn orth_star_in(group: &CharacterGroup, m: u64, n: u64) -> Result<OrthPair> {
    let q = group.modulus;
    check_coprime(q, m, n)?;
    let lhs = group.primitive().map(|c| c.value(m) * c.value(n).conj()).sum();
    Ok(OrthPair {
        lhs,
        rhs: divisor_side(q, m as i64 - n as i64) as f64,
    })
}

/// sum over primitive even chi of chi(m) conj(chi(n)), against
/// (1/2) sum_{dr=q, r|(m-n)} mu(d) phi(r) + (1/2) sum_{dr=q, r|(m+n)} mu(d) phi(r).
pub fn orth_flat_in(group: &CharacterGroup, m: u64, n: u64) -> Result<OrthPair> {
    let q = group.modulus;
    check_coprime(q, m, n)?;
    let lhs = group
        .primitive_even()
        .map(|c| c.value(m) * c.value(n).conj())
        .sum();
    let rhs = 0.5 * (divisor_side(q, m as i64 - n as i64) + divisor_side(q, m as i64 + n as i64)) as f64;
    Ok(OrthPair { lhs, rhs })
}

pub fn orth_star(q: u64, m: u64, n: u64) -> Result<OrthPair> {
    orth_star_in(&build_group(q)?, m, n)
}

pub fn orth_flat(q: u64, m: u64, n: u64) -> Result<OrthPair> {
    orth_flat_in(&build_group(q)?, m, n)
}
