//! Bernoulli numbers exactly and mod p, irregular pairs, the p-parts of
//! `B_n / n`, and the cyclotomic-unit p-th power residue test.

use std::sync::{Mutex, OnceLock};

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::{Error, Int, Rat, Result};

static BERNOULLI: OnceLock<Mutex<Vec<Rat>>> = OnceLock::new();

/// Exact `B_n` with `B_1 = -1/2`, from `sum_{j=0}^{m} C(m+1, j) B_j = 0`.
pub fn bernoulli_exact(n: usize) -> Rat {
    let table = BERNOULLI.get_or_init(|| Mutex::new(vec![Rat::one()]));
    let mut b = table.lock().unwrap_or_else(|e| e.into_inner());
    while b.len() <= n {
        let m = b.len();
        if m > 1 && m % 2 == 1 {
            b.push(Rat::zero());
            continue;
        }
        // binomial row C(m+1, j), j = 0..m
        let mut c = Int::one();
        let mut acc = Rat::zero();
        for (j, bj) in b.iter().enumerate() {
            if !bj.is_zero() {
                acc += bj * &c;
            }
            c = c * Int::from(m + 1 - j) / Int::from(j + 1);
        }
        b.push(-acc / Int::from(m + 1));
    }
    b[n].clone()
}

fn require_even(n: usize, what: &str) -> Result<()> {
    if n < 2 || n % 2 == 1 {
        return Err(Error::Parity(format!("{what} needs an even index >= 2, got {n}")));
    }
    Ok(())
}

/// `|numerator(B_n / n)|` for even `n >= 2`.
pub fn bernoulli_numerator_nn(n: usize) -> Result<Int> {
    require_even(n, "N_n")?;
    let q = bernoulli_exact(n) / Int::from(n);
    Ok(q.numer().abs())
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

/// Deterministic Miller-Rabin for `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn require_odd_prime(p: u64) -> Result<()> {
    if p < 3 || !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    Ok(())
}

/// `B_0 .. B_{p-3}` reduced mod `p` (all p-integral in this range).
pub fn bernoulli_table_mod_p(p: u64) -> Vec<u64> {
    let top = p.saturating_sub(3) as usize;
    let mut b = vec![1u64];
    // row[j] = C(m+1, j) mod p, advanced one row per step
    let mut row = vec![1u64, 1];
    for m in 1..=top {
        // row is C(m, .); move to C(m+1, .)
        let mut next = vec![1u64; m + 2];
        for j in 1..=m {
            next[j] = (row[j - 1] + row[j]) % p;
        }
        row = next;
        if m > 1 && m % 2 == 1 {
            b.push(0);
            continue;
        }
        let mut acc = 0u64;
        for (j, &bj) in b.iter().enumerate() {
            acc = (acc + mul_mod(row[j], bj, p)) % p;
        }
        let inv = inv_mod((m as u64 + 1) % p, p);
        b.push((p - mul_mod(acc, inv, p)) % p);
    }
    b
}

/// `B_k mod p` for even `2 <= k <= p - 3`.
pub fn bernoulli_mod_p(k: u64, p: u64) -> Result<u64> {
    require_odd_prime(p)?;
    if k < 2 || k % 2 == 1 || k + 3 > p {
        return Err(Error::OutOfRange(format!("B_k mod p needs even 2 <= k <= p-3, got k = {k}, p = {p}")));
    }
    Ok(bernoulli_table_mod_p(p)[k as usize])
}

/// Exact `B_k mod p` through the rational value; reference for the recurrence.
pub fn bernoulli_exact_mod_p(k: usize, p: u64) -> Option<u64> {
    let b = bernoulli_exact(k);
    let pi = Int::from(p);
    if (b.denom() % &pi).is_zero() {
        return None;
    }
    let num = b.numer().mod_floor(&pi);
    let den = b.denom().mod_floor(&pi);
    let num: u64 = num.try_into().ok()?;
    let den: u64 = den.try_into().ok()?;
    Some(mul_mod(num, inv_mod(den, p), p))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct IrregularPair {
    pub p: u64,
    pub k: u64,
}

pub fn irregular_pairs(p: u64) -> Result<Vec<IrregularPair>> {
    require_odd_prime(p)?;
    let table = bernoulli_table_mod_p(p);
    Ok((2..p.saturating_sub(2))
        .step_by(2)
        .filter(|&k| table[k as usize] == 0)
        .map(|k| IrregularPair { p, k })
        .collect())
}

/// Irregular pairs for every odd prime `p <= max_p`, scanned in parallel.
pub fn irregular_pairs_upto(max_p: u64) -> Vec<IrregularPair> {
    let primes: Vec<u64> = (3..=max_p).filter(|&p| is_prime(p)).collect();
    let mut out: Vec<IrregularPair> =
        primes.par_iter().flat_map_iter(|&p| irregular_pairs(p).expect("prime")).collect();
    out.sort();
    out
}

/// Irregular pairs for `p` from exact numerators; used as an oracle.
pub fn irregular_pairs_exact(p: u64) -> Result<Vec<IrregularPair>> {
    require_odd_prime(p)?;
    let pi = Int::from(p);
    Ok((2..p.saturating_sub(2))
        .step_by(2)
        .filter(|&k| (bernoulli_exact(k as usize).numer() % &pi).is_zero())
        .map(|k| IrregularPair { p, k })
        .collect())
}

/// p-part `p^{v_p(N_n)}` of the numerator of `B_n / n`.
pub fn h2_order_even(p: u64, n: usize) -> Result<Int> {
    require_odd_prime(p)?;
    require_even(n, "h2_order_even")?;
    let mut num = bernoulli_numerator_nn(n)?;
    let pi = Int::from(p);
    let mut out = Int::one();
    while !num.is_zero() && (&num % &pi).is_zero() {
        num /= &pi;
        out *= &pi;
    }
    Ok(out)
}

fn require_odd_index(p: u64, n: u64) -> Result<()> {
    if n % 2 == 0 || n < 3 || n + 2 > p {
        return Err(Error::Parity(format!("needs odd 3 <= n <= p-2, got n = {n}, p = {p}")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Zero,
    PossiblyNonzero,
}

/// Zero when `B_{p-n} mod p` is nonzero; otherwise left to the unit test.
pub fn kurihara_component(p: u64, n: u64) -> Result<Component> {
    require_odd_prime(p)?;
    require_odd_index(p, n)?;
    Ok(if bernoulli_mod_p(p - n, p)? != 0 { Component::Zero } else { Component::PossiblyNonzero })
}

/// `L(0, w^{-n}) mod p` through `L(0, w^{-n}) = -B_{1, w^{-n}}` and the
/// congruence `B_{1, w^{j-1}} = B_j / j (mod p)` with `j = p - n`.
pub fn l0_mod_p(p: u64, n: u64) -> Result<u64> {
    require_odd_prime(p)?;
    require_odd_index(p, n)?;
    let j = p - n;
    let b = bernoulli_mod_p(j, p)?;
    Ok((p - mul_mod(b, inv_mod(j % p, p), p)) % p)
}

fn prime_divisors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut f = 2;
    while f * f <= n {
        if n % f == 0 {
            out.push(f);
            while n % f == 0 {
                n /= f;
            }
        }
        f += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn primitive_root(q: u64) -> u64 {
    let fs = prime_divisors(q - 1);
    (2..q).find(|&g| fs.iter().all(|&f| pow_mod(g, (q - 1) / f, q) != 1)).expect("prime modulus")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    ComponentZero,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct QAttempt {
    pub q: u64,
    pub eta: u64,
    /// `U^((q-1)/p) mod q`; 1 means U is a p-th power mod q.
    pub residue: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VandiverCertificate {
    pub p: u64,
    pub k: u64,
    /// Deciding prime, or the last one tried when inconclusive.
    pub q: u64,
    pub verdict: Verdict,
    pub residue: u64,
    pub attempts: Vec<QAttempt>,
}

impl VandiverCertificate {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("plain data")
    }
}

/// `U = prod_{a=1}^{(p-1)/2} (eta^{(1-a)/2} (1 - eta^a))^{a^{p-1-k} mod p} mod q`.
///
/// The factor `eta^{(1-a)/2}` (exponent read mod p) makes each term the
/// image of a real cyclotomic unit times `1 - zeta`; the `1 - zeta` powers
/// total a multiple of `p` and do not affect p-th power status.
fn unit_image(p: u64, k: u64, q: u64, eta: u64) -> u64 {
    let half = inv_mod(2, p);
    let mut u = 1u64;
    for a in 1..=(p - 1) / 2 {
        let e = pow_mod(a, p - 1 - k, p);
        let shift = mul_mod((1 + p - a % p) % p, half, p);
        let term = mul_mod(pow_mod(eta, shift, q), (1 + q - pow_mod(eta, a, q)) % q, q);
        u = mul_mod(u, pow_mod(term, e, q), q);
    }
    u
}

/// Successive primes `q = 1 (mod p)`, `q != 1 (mod p^2)`.
pub fn auxiliary_primes(p: u64) -> impl Iterator<Item = u64> {
    (1u64..).map(move |t| 2 * p * t + 1).filter(move |&q| q % (p * p) != 1 && is_prime(q))
}

/// One auxiliary prime: the residue `U^((q-1)/p)`, with a convention error
/// when a second primitive p-th root of unity disagrees on it.
pub fn residue_at(p: u64, k: u64, q: u64) -> Result<QAttempt> {
    let r = primitive_root(q);
    let eta = pow_mod(r, (q - 1) / p, q);
    let residue = pow_mod(unit_image(p, k, q, eta), (q - 1) / p, q);
    let eta2 = mul_mod(eta, eta, q);
    let residue2 = pow_mod(unit_image(p, k, q, eta2), (q - 1) / p, q);
    if (residue == 1) != (residue2 == 1) {
        return Err(Error::Convention(format!("p = {p}, k = {k}, q = {q}: residue depends on the choice of eta")));
    }
    Ok(QAttempt { q, eta, residue })
}

/// Every auxiliary prime in the budget, without stopping at a decision.
pub fn residue_scan(p: u64, k: u64, q_count: usize) -> Result<Vec<QAttempt>> {
    require_odd_prime(p)?;
    auxiliary_primes(p).take(q_count).map(|q| residue_at(p, k, q)).collect()
}

/// p-th power residue test of the `w^{-k}` projected cyclotomic unit against
/// up to `q_budget` auxiliary primes.
pub fn vandiver_component_test(p: u64, k: u64, q_budget: usize) -> Result<VandiverCertificate> {
    require_odd_prime(p)?;
    if q_budget == 0 {
        return Err(Error::OutOfRange("q budget must be at least 1".into()));
    }
    if !irregular_pairs(p)?.contains(&IrregularPair { p, k }) {
        return Err(Error::OutOfRange(format!("({p}, {k}) is not an irregular pair")));
    }
    let mut attempts = Vec::new();
    for q in auxiliary_primes(p).take(q_budget) {
        let attempt = residue_at(p, k, q)?;
        let residue = attempt.residue;
        attempts.push(attempt);
        if residue != 1 {
            return Ok(VandiverCertificate { p, k, q, verdict: Verdict::ComponentZero, residue, attempts });
        }
    }
    let last = attempts.last().expect("budget >= 1");
    let (q, residue) = (last.q, last.residue);
    Ok(VandiverCertificate { p, k, q, verdict: Verdict::Inconclusive, residue, attempts })
}

pub const MERTENS: f64 = 0.261_497_212_847_642_8;

#[derive(Clone, Debug, Serialize)]
pub struct HeuristicReport {
    pub x: u64,
    pub prime_count: usize,
    /// `sum_{37 <= p <= x} 1/p`.
    pub prime_sum: f64,
    /// `ln ln x - 2.56`.
    pub paper_rhs: f64,
    /// `ln ln x + M - sum_{p < 37} 1/p`, the Mertens asymptotic.
    pub mertens_estimate: f64,
    pub error_bound: f64,
}

/// Sieved `sum 1/p` over `37 <= p <= x` with compensated summation.
pub fn heuristic_sum(x: u64) -> Result<HeuristicReport> {
    if x < 37 {
        return Err(Error::OutOfRange(format!("x = {x} < 37")));
    }
    let n = x as usize;
    let mut composite = vec![false; n + 1];
    let mut i = 2;
    while i * i <= n {
        if !composite[i] {
            for j in (i * i..=n).step_by(i) {
                composite[j] = true;
            }
        }
        i += 1;
    }
    let (mut sum, mut comp, mut count, mut small) = (0f64, 0f64, 0usize, 0f64);
    for p in 2..=n {
        if composite[p] {
            continue;
        }
        let term = 1.0 / p as f64;
        if p < 37 {
            small += term;
            continue;
        }
        count += 1;
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    let lnln = (x as f64).ln().ln();
    Ok(HeuristicReport {
        x,
        prime_count: count,
        prime_sum: sum,
        paper_rhs: lnln - 2.56,
        mertens_estimate: lnln + MERTENS - small,
        // each term carries <= 1/2 ulp of 1/37, compensated summation adds O(eps)
        error_bound: 4.0 * f64::EPSILON * (1.0 + count as f64 / 37.0 * f64::EPSILON) + 1e-15,
    })
}
