//! Explicit constants of the torsion bounds, evaluated exactly where they fit
//! and on a certified natural-log scale where they do not.
//!
//! Chain of definitions, for `N >= 2`:
//!
//! * `gamma(N) <= 1 + N/4`, `s(N) <= 2^N - 1`
//! * `A(N) = N^(N-1) gamma^(N/2)` (integer ceiling, see [`a_const`])
//! * `B(N) = (2 A(N) + 1)^N / 2`
//! * `c(k, N) = binom(B(N), k + 1)`, `f(k, N) = binom(s(N), k)`
//! * `h(k, N) = f(l, N)^c(l, N)` with `l = N(N+1)/2 - 1 - k`
//! * `k(m) = h(m, 2m + 1)`, `v(n) = k(2n - 2)`

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::certified::{certify, ln10, ln2, ln_int, ln_rat, Interval};
use crate::linalg::isqrt_ceil;
use crate::{Error, Int, Rat, Result};

/// Minimum number of certified digits carried by log-scale values.
pub const MIN_DIGITS: usize = 20;

pub fn gamma_bound(n: u32) -> Rat {
    Rat::new(Int::from(n + 4), Int::from(4))
}

pub fn s_bound(n: u32) -> Int {
    (Int::one() << n) - 1
}

/// Where `gamma(N)^N` comes from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaSource {
    /// `(1 + N/4)^N`, the bound the whole chain is built on.
    #[default]
    Bound,
    /// The known Hermite constants, `N <= 8` only.
    Exact,
}

/// `gamma_N^N` for `N <= 8`; all of these are rational.
pub fn hermite_power(n: u32) -> Option<Rat> {
    let (p, q) = match n {
        1 => (1, 1),
        2 => (4, 3),
        3 => (2, 1),
        4 => (4, 1),
        5 => (8, 1),
        6 => (64, 3),
        7 => (64, 1),
        8 => (256, 1),
        _ => return None,
    };
    Some(Rat::new(Int::from(p), Int::from(q)))
}

/// `A(N)^2 = N^(2N-2) (1 + N/4)^N`, exact.
pub fn a_const_squared(n: u32) -> Rat {
    a_const_squared_with(n, GammaSource::Bound).expect("bound is always available")
}

pub fn a_const_squared_with(n: u32, source: GammaSource) -> Result<Rat> {
    let base = Rat::from_integer(num_traits::pow(Int::from(n), 2 * (n as usize - 1)));
    let gamma_n = match source {
        GammaSource::Bound => num_traits::pow(gamma_bound(n), n as usize),
        GammaSource::Exact => {
            hermite_power(n).ok_or_else(|| Error::OutOfRange(format!("exact Hermite constant unknown for N = {n}")))?
        }
    };
    Ok(base * gamma_n)
}

/// Least integer `>= N^(N-1) (1 + N/4)^(N/2)`.
///
/// For odd `N` the square root is handled by taking the integer square-root
/// ceiling of `A(N)^2`.
pub fn a_const(n: u32) -> Int {
    a_const_with(n, GammaSource::Bound).expect("bound is always available")
}

pub fn a_const_with(n: u32, source: GammaSource) -> Result<Int> {
    if n < 2 {
        return Err(Error::OutOfRange(format!("A(N) needs N >= 2, got {n}")));
    }
    let sq = a_const_squared_with(n, source)?;
    let q = sq.numer().div_ceil(sq.denom());
    // isqrt_ceil(ceil(x)) is the least t with t^2 >= x
    Ok(isqrt_ceil(&q))
}

/// `B(N) = (2 A(N) + 1)^N / 2` with the integer ceiling of `A(N)`.
pub fn b_const(n: u32) -> Rat {
    let a = a_const(n);
    Rat::new(num_traits::pow(a * 2 + 1, n as usize), Int::from(2))
}

/// How the half-integer `B(N)` enters the binomial `c(k, N)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BMode {
    /// Falling-factorial binomial with the exact rational `B(N)`, result
    /// rounded up.
    #[default]
    ExactRational,
    /// `B(N)` rounded up to an integer first, then the ordinary binomial.
    RoundedUp,
}

fn product_tree(mut xs: Vec<Int>) -> Int {
    if xs.is_empty() {
        return Int::one();
    }
    while xs.len() > 1 {
        let mut next = Vec::with_capacity(xs.len().div_ceil(2));
        let mut it = xs.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(a * b),
                None => next.push(a),
            }
        }
        xs = next;
    }
    xs.pop().unwrap()
}

pub fn factorial(k: u64) -> Int {
    product_tree((1..=k).map(Int::from).collect())
}

/// `binom(n, k)` for integer `n >= 0`; zero when `k > n`.
pub fn binomial(n: &Int, k: u64) -> Int {
    if n.is_negative() {
        panic!("binomial with negative top");
    }
    if Int::from(k) > *n {
        return Int::zero();
    }
    let num = product_tree((0..k).map(|j| n - Int::from(j)).collect());
    num / factorial(k)
}

pub fn c_const(k: u64, n: u32) -> Int {
    c_const_with(k, n, BMode::default())
}

/// `c(k, N) = binom(B(N), k + 1)`, generalized to rational `B` and rounded up.
pub fn c_const_with(k: u64, n: u32, mode: BMode) -> Int {
    let b = b_const(n);
    match mode {
        BMode::RoundedUp => binomial(&b.ceil().to_integer(), k + 1),
        BMode::ExactRational => {
            // B = M / 2: prod_{j=0}^{k} (M - 2j) / (2^(k+1) (k+1)!)
            let m = b.numer().clone();
            debug_assert_eq!(b.denom(), &Int::from(2));
            let factors: Vec<Int> = (0..=k).map(|j| &m - Int::from(2 * j)).collect();
            if factors.iter().any(Zero::is_zero) {
                return Int::zero();
            }
            let num = product_tree(factors);
            let den = factorial(k + 1) << (k + 1);
            num.div_ceil(&den)
        }
    }
}

pub fn f_const(k: u64, n: u32) -> Int {
    binomial(&s_bound(n), k)
}

/// `l = N(N+1)/2 - 1 - k`.
pub fn ell(k: u64, n: u32) -> Result<u64> {
    let top = (n as u64) * (n as u64 + 1) / 2 - 1;
    top.checked_sub(k).ok_or_else(|| Error::OutOfRange(format!("l = N(N+1)/2 - 1 - k < 0 for k = {k}, N = {n}")))
}

/// Exact or log-scale value of one of the explicit constants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BigBound {
    ExactInteger(Int),
    ExactRational(Rat),
    /// `base^multiplier`, held through `ln = multiplier * ln(base)`.
    LogScale {
        multiplier: Int,
        base: Int,
        digits: usize,
    },
}

/// Values with at most this many bits are materialized exactly.
const EXACT_BITS_BUDGET: u64 = 1 << 16;

impl BigBound {
    fn power(base: Int, multiplier: Int, digits: usize) -> BigBound {
        if multiplier.is_zero() || base.is_one() {
            return BigBound::ExactInteger(Int::one());
        }
        if base.is_zero() {
            return BigBound::ExactInteger(Int::zero());
        }
        let bits = multiplier.to_u64().and_then(|m| m.checked_mul(base.bits()));
        match bits {
            Some(b) if b <= EXACT_BITS_BUDGET => {
                BigBound::ExactInteger(num_traits::pow(base, multiplier.to_usize().unwrap()))
            }
            _ => BigBound::LogScale { multiplier, base, digits: digits.max(MIN_DIGITS) },
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, BigBound::LogScale { .. })
    }

    /// Degenerate zero value (an empty binomial raised to a positive power).
    pub fn is_zero(&self) -> bool {
        matches!(self, BigBound::ExactInteger(x) if x.is_zero())
    }

    pub fn ln_interval(&self, bits: u32) -> Result<Interval> {
        match self {
            BigBound::ExactInteger(x) => ln_int(x, bits),
            BigBound::ExactRational(x) => ln_rat(x, bits),
            BigBound::LogScale { multiplier, base, .. } => Ok(ln_int(base, bits)?.mul_int(multiplier)),
        }
    }

    /// `ln ln` of the value, `ln(multiplier) + ln(ln(base))` on the log scale.
    pub fn ln_ln_interval(&self, bits: u32) -> Result<Interval> {
        match self {
            BigBound::LogScale { multiplier, base, .. } => {
                Ok(ln_int(multiplier, bits)?.add(&ln_int(base, bits)?.ln()?))
            }
            _ => self.ln_interval(bits)?.ln(),
        }
    }

    /// Number of decimal digits, for exact integers.
    pub fn exact_digits(&self) -> Option<usize> {
        match self {
            BigBound::ExactInteger(x) => Some(x.abs().to_string().len()),
            _ => None,
        }
    }

    pub fn report(&self, digits: usize) -> Result<BoundReport> {
        let digits = digits.max(MIN_DIGITS);
        let zero = self.is_zero();
        let ln = if zero { None } else { Some(certify(digits, |b| self.ln_interval(b))?.0) };
        let log10 = if zero { None } else { Some(certify(digits, |b| Ok(self.ln_interval(b)?.div(&ln10(b))))?.0) };
        let positive_ln = match self {
            BigBound::LogScale { .. } => true,
            BigBound::ExactInteger(x) => *x > Int::one(),
            BigBound::ExactRational(x) => *x > Rat::one(),
        };
        let ln_ln = if positive_ln { Some(certify(digits, |b| self.ln_ln_interval(b))?.0) } else { None };
        let (kind, value, multiplier_digits, base) = match self {
            BigBound::ExactInteger(x) => ("exact_integer", Some(x.to_string()), None, None),
            BigBound::ExactRational(x) => ("exact_rational", Some(x.to_string()), None, None),
            BigBound::LogScale { multiplier, base, .. } => {
                ("log_scale", None, Some(multiplier.to_string().len()), Some(base.to_string()))
            }
        };
        Ok(BoundReport {
            kind,
            provenance: if self.is_exact() { "exact" } else { "certified-precision" },
            value,
            ln,
            log10,
            ln_ln,
            exact_digits: self.exact_digits(),
            multiplier_digits,
            base,
            digits,
            degenerate: zero,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub kind: &'static str,
    pub provenance: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    pub ln: Option<String>,
    pub log10: Option<String>,
    pub ln_ln: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_digits: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub multiplier_digits: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base: Option<String>,
    pub digits: usize,
    pub degenerate: bool,
}

/// `f(l, N)^c(l, N)` for an explicit `l`.
pub fn h_from_ell(l: u64, n: u32) -> BigBound {
    BigBound::power(f_const(l, n), c_const(l, n), MIN_DIGITS)
}

pub fn h_const(k: u64, n: u32) -> Result<BigBound> {
    if n < 2 {
        return Err(Error::OutOfRange(format!("N = {n} < 2")));
    }
    let vcd = (n as u64) * (n as u64 - 1) / 2;
    if k < 1 || k > vcd {
        return Err(Error::OutOfRange(format!("k = {k} outside 1..={vcd}")));
    }
    Ok(h_from_ell(ell(k, n)?, n))
}

pub fn k_const(m: u64) -> Result<BigBound> {
    if m < 1 {
        return Err(Error::OutOfRange("k(m) needs m >= 1".into()));
    }
    let n = u32::try_from(2 * m + 1).map_err(|_| Error::OutOfRange(format!("m = {m}")))?;
    h_const(m, n)
}

pub fn v_const(n: u64) -> Result<BigBound> {
    if n < 2 {
        return Err(Error::OutOfRange("v(n) needs n >= 2".into()));
    }
    k_const(2 * n - 2)
}

/// `epsilon(m)` of the `ln ln k(m)` estimate:
/// `4 ln2 m^4 + (20 ln m + 14 + 8 ln2) m^3 + (15 ln m + 22 + 7 ln2) m^2
///  + (5 ln m + 31/2 + 3 ln2) m + 7/2 ln m + 7/2 ln2 + 5`.
pub fn epsilon_interval(m: u64, bits: u32) -> Result<Interval> {
    let l2 = ln2(bits);
    let lm = ln_int(&Int::from(m), bits)?;
    let c = |x: i64| Interval::from_int(&Int::from(x), bits);
    let half = |x: i64| Interval::from_rat(&Rat::new(Int::from(x), Int::from(2)), bits);
    let mi = Int::from(m);
    let m2 = &mi * &mi;
    let m3 = &m2 * &mi;
    let m4 = &m3 * &mi;
    let t4 = l2.mul_int(&Int::from(4)).mul_int(&m4);
    let t3 = lm.mul_int(&Int::from(20)).add(&c(14)).add(&l2.mul_int(&Int::from(8))).mul_int(&m3);
    let t2 = lm.mul_int(&Int::from(15)).add(&c(22)).add(&l2.mul_int(&Int::from(7))).mul_int(&m2);
    let t1 = lm.mul_int(&Int::from(5)).add(&half(31)).add(&l2.mul_int(&Int::from(3))).mul_int(&mi);
    let t0 = lm.mul(&half(7)).add(&l2.mul(&half(7))).add(&c(5));
    Ok(t4.add(&t3).add(&t2).add(&t1).add(&t0))
}

pub fn epsilon_poly(m: u64, digits: usize) -> Result<String> {
    Ok(certify(digits.max(MIN_DIGITS), |b| epsilon_interval(m, b))?.0)
}

/// `coeff * m^4 * ln m`.
fn m4_log_m(coeff: i64, m: u64, bits: u32) -> Result<Interval> {
    let mi = Int::from(m);
    Ok(ln_int(&mi, bits)?.mul_int(&(num_traits::pow(mi, 4) * coeff)))
}

#[derive(Clone, Debug, Serialize)]
pub struct Inequality {
    pub name: String,
    pub lhs: String,
    pub rhs: String,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundCheckReport {
    pub argument: u64,
    pub ln_ln_value: String,
    pub inequalities: Vec<Inequality>,
    pub ok: bool,
    pub provenance: &'static str,
}

fn decide(
    name: &str,
    digits: usize,
    lhs: &dyn Fn(u32) -> Result<Interval>,
    rhs: &dyn Fn(u32) -> Result<Interval>,
) -> Result<Inequality> {
    let base = (digits as f64 * std::f64::consts::LOG2_10).ceil() as u32 + 32;
    for attempt in 0..5 {
        let bits = base << attempt;
        let (l, r) = (lhs(bits)?, rhs(bits)?);
        if let Some(holds) = l.certainly_le(&r) {
            return Ok(Inequality {
                name: name.to_string(),
                lhs: certify(digits, lhs)?.0,
                rhs: certify(digits, rhs)?.0,
                holds,
            });
        }
    }
    Err(Error::Precision(format!("{name}: sides indistinguishable at working precision")))
}

/// Checks `ln ln k(m) <= 12 m^4 ln m + eps(m)`, `ln k(m) <= m^(20 m^4)` and
/// `eps(m) <= 8 m^4 ln m`.
pub fn lemma2_check(m: u64, digits: usize) -> Result<BoundCheckReport> {
    if m < 6 {
        return Err(Error::OutOfRange(format!("the k(m) inequalities need m >= 6, got {m}")));
    }
    let digits = digits.max(MIN_DIGITS);
    let k = k_const(m)?;
    let lhs = |b: u32| k.ln_ln_interval(b);
    let rhs30 = |b: u32| Ok(m4_log_m(12, m, b)?.add(&epsilon_interval(m, b)?));
    let rhs_lemma = |b: u32| m4_log_m(20, m, b);
    let eps = |b: u32| epsilon_interval(m, b);
    let eps_bound = |b: u32| m4_log_m(8, m, b);
    let inequalities = vec![
        decide("ln ln k(m) <= 12 m^4 ln m + eps(m)", digits, &lhs, &rhs30)?,
        decide("ln ln k(m) <= 20 m^4 ln m", digits, &lhs, &rhs_lemma)?,
        decide("eps(m) <= 8 m^4 ln m", digits, &eps, &eps_bound)?,
    ];
    Ok(BoundCheckReport {
        argument: m,
        ln_ln_value: certify(digits, lhs)?.0,
        ok: inequalities.iter().all(|i| i.holds),
        inequalities,
        provenance: "certified-precision",
    })
}

/// Checks `ln ln v(n) <= 192 n^4 ln n + eps(n)`, `eps(n) <= 32 n^4 ln n` and
/// `ln v(n) <= n^(224 n^4)`.
pub fn vandiver_bound_check(n: u64, digits: usize) -> Result<BoundCheckReport> {
    if n < 5 {
        return Err(Error::OutOfRange(format!("needs n >= 5, got {n}")));
    }
    let digits = digits.max(MIN_DIGITS);
    let v = v_const(n)?;
    let lhs = |b: u32| v.ln_ln_interval(b);
    let rhs = |b: u32| Ok(m4_log_m(192, n, b)?.add(&epsilon_interval(n, b)?));
    let eps = |b: u32| epsilon_interval(n, b);
    let eps_bound = |b: u32| m4_log_m(32, n, b);
    let rhs_total = |b: u32| m4_log_m(224, n, b);
    let inequalities = vec![
        decide("ln ln v(n) <= 192 n^4 ln n + eps(n)", digits, &lhs, &rhs)?,
        decide("eps(n) <= 32 n^4 ln n", digits, &eps, &eps_bound)?,
        decide("ln ln v(n) <= 224 n^4 ln n", digits, &lhs, &rhs_total)?,
    ];
    Ok(BoundCheckReport {
        argument: n,
        ln_ln_value: certify(digits, lhs)?.0,
        ok: inequalities.iter().all(|i| i.holds),
        inequalities,
        provenance: "certified-precision",
    })
}
