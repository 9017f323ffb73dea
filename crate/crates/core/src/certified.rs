//! Fixed-point interval arithmetic on big integers, enough to evaluate
//! logarithms of huge exact integers with a guaranteed number of digits.
//!
//! An [`Interval`] is `[lo, hi] / 2^bits`; every operation rounds `lo` down
//! and `hi` up, so the true value is always enclosed.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::{Error, Int, Rat, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    lo: Int,
    hi: Int,
    bits: u32,
}

fn pow2(bits: u32) -> Int {
    Int::one() << bits
}

fn shr_floor(x: &Int, bits: u32) -> Int {
    x.div_floor(&pow2(bits))
}

fn shr_ceil(x: &Int, bits: u32) -> Int {
    x.div_ceil(&pow2(bits))
}

impl Interval {
    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn from_int(n: &Int, bits: u32) -> Self {
        let v = n << bits;
        Self { lo: v.clone(), hi: v, bits }
    }

    pub fn from_rat(r: &Rat, bits: u32) -> Self {
        let num = r.numer() << bits;
        Self { lo: num.div_floor(r.denom()), hi: num.div_ceil(r.denom()), bits }
    }

    pub fn lo_rat(&self) -> Rat {
        Rat::new(self.lo.clone(), pow2(self.bits))
    }

    pub fn hi_rat(&self) -> Rat {
        Rat::new(self.hi.clone(), pow2(self.bits))
    }

    pub fn add(&self, o: &Interval) -> Interval {
        assert_eq!(self.bits, o.bits);
        Interval { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi, bits: self.bits }
    }

    pub fn sub(&self, o: &Interval) -> Interval {
        assert_eq!(self.bits, o.bits);
        Interval { lo: &self.lo - &o.hi, hi: &self.hi - &o.lo, bits: self.bits }
    }

    pub fn neg(&self) -> Interval {
        Interval { lo: -&self.hi, hi: -&self.lo, bits: self.bits }
    }

    pub fn mul_int(&self, k: &Int) -> Interval {
        let (a, b) = (&self.lo * k, &self.hi * k);
        if k.is_negative() {
            Interval { lo: b, hi: a, bits: self.bits }
        } else {
            Interval { lo: a, hi: b, bits: self.bits }
        }
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        assert_eq!(self.bits, o.bits);
        let prods = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let min = prods.iter().min().unwrap();
        let max = prods.iter().max().unwrap();
        Interval { lo: shr_floor(min, self.bits), hi: shr_ceil(max, self.bits), bits: self.bits }
    }

    /// Division by an interval that is strictly positive.
    pub fn div(&self, o: &Interval) -> Interval {
        assert_eq!(self.bits, o.bits);
        assert!(o.lo.is_positive(), "divisor interval must be positive");
        let scale = |x: &Int| x << self.bits;
        let quots_floor = [scale(&self.lo).div_floor(&o.lo), scale(&self.lo).div_floor(&o.hi)];
        let quots_ceil = [scale(&self.hi).div_ceil(&o.lo), scale(&self.hi).div_ceil(&o.hi)];
        Interval {
            lo: quots_floor.iter().min().unwrap().clone(),
            hi: quots_ceil.iter().max().unwrap().clone(),
            bits: self.bits,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    /// `Some(true)` if certainly `self <= o`, `Some(false)` if certainly
    /// `self > o`, `None` when the enclosures overlap.
    pub fn certainly_le(&self, o: &Interval) -> Option<bool> {
        assert_eq!(self.bits, o.bits);
        if self.hi <= o.lo {
            Some(true)
        } else if self.lo > o.hi {
            Some(false)
        } else {
            None
        }
    }

    /// Width of the enclosure in units of `2^-bits`.
    pub fn width_ulps(&self) -> Int {
        &self.hi - &self.lo
    }

    pub fn to_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        let mid: Rat = (self.lo_rat() + self.hi_rat()) / Int::from(2);
        mid.to_f64().unwrap_or(f64::NAN)
    }

    /// Natural logarithm; the enclosure must be strictly positive.
    pub fn ln(&self) -> Result<Interval> {
        if !self.is_positive() {
            return Err(Error::Precision("logarithm of a non-positive enclosure".into()));
        }
        let lo = ln_rat(&self.lo_rat(), self.bits)?;
        let hi = ln_rat(&self.hi_rat(), self.bits)?;
        Ok(Interval { lo: lo.lo, hi: hi.hi, bits: self.bits })
    }

    /// Leading `digits` significant decimal digits, truncated towards zero,
    /// if both ends of the enclosure agree on them.
    pub fn to_decimal(&self, digits: usize) -> Option<String> {
        if self.lo.is_zero() && self.hi.is_zero() {
            return Some("0".into());
        }
        if self.lo.sign() != self.hi.sign() || self.lo.is_zero() || self.hi.is_zero() {
            return None;
        }
        let negative = self.lo.is_negative();
        let (a, b) = if negative { (-&self.hi, -&self.lo) } else { (self.lo.clone(), self.hi.clone()) };
        let (ma, ea) = leading_digits(&a, self.bits, digits);
        let (mb, eb) = leading_digits(&b, self.bits, digits);
        if ma != mb || ea != eb {
            return None;
        }
        Some(format_sci(negative, &ma, ea))
    }
}

/// Decimal exponent `e` with `10^e <= x / 2^bits < 10^(e+1)` and the first
/// `digits` digits of the mantissa, truncated.
fn leading_digits(x: &Int, bits: u32, digits: usize) -> (String, i64) {
    let int_part = shr_floor(x, bits);
    let e: i64 = if !int_part.is_zero() {
        int_part.to_string().len() as i64 - 1
    } else {
        let mut e = 0i64;
        let mut v = x.clone();
        let one = pow2(bits);
        while v < one {
            v *= 10;
            e -= 1;
        }
        e
    };
    let shift = digits as i64 - 1 - e;
    let scaled = if shift >= 0 {
        x * num_traits::pow(BigInt::from(10), shift as usize)
    } else {
        x.div_floor(&num_traits::pow(BigInt::from(10), (-shift) as usize))
    };
    (shr_floor(&scaled, bits).to_string(), e)
}

fn format_sci(negative: bool, mantissa: &str, e: i64) -> String {
    let sign = if negative { "-" } else { "" };
    let digits = mantissa.len() as i64;
    if (-2..0).contains(&e) {
        let zeros = "0".repeat((-e - 1) as usize);
        format!("{sign}0.{zeros}{mantissa}")
    } else if (0..digits).contains(&e) && e < 24 {
        let (int_part, frac) = mantissa.split_at(e as usize + 1);
        if frac.is_empty() {
            format!("{sign}{int_part}")
        } else {
            format!("{sign}{int_part}.{frac}")
        }
    } else {
        let (first, rest) = mantissa.split_at(1);
        if rest.is_empty() {
            format!("{sign}{first}e{e}")
        } else {
            format!("{sign}{first}.{rest}e{e}")
        }
    }
}

/// `2 atanh(z)` for rational `0 <= z <= 1/3`, enclosed at `bits` bits.
fn two_atanh_small(z: &Rat, bits: u32) -> Interval {
    debug_assert!(!z.is_negative() && z * Rat::from_integer(Int::from(3)) <= Rat::one());
    let zl = (z.numer() << bits).div_floor(z.denom());
    let zh = (z.numer() << bits).div_ceil(z.denom());
    let z2l = shr_floor(&(&zl * &zl), bits);
    let z2h = shr_ceil(&(&zh * &zh), bits);
    // (1/3)^(2k+1) < 2^-(bits+2) once k exceeds this
    let terms = (bits as f64 / (2.0 * 3f64.log2())).ceil() as u64 + 2;
    let (mut pl, mut ph) = (zl, zh);
    let (mut sl, mut sh) = (Int::zero(), Int::zero());
    for k in 0..terms {
        let d = Int::from(2 * k + 1);
        sl += pl.div_floor(&d);
        sh += ph.div_ceil(&d);
        pl = shr_floor(&(&pl * &z2l), bits);
        ph = shr_ceil(&(&ph * &z2h), bits);
    }
    // tail bound: remaining terms are below one ulp in total
    sh += 1;
    Interval { lo: sl * 2, hi: sh * 2, bits }
}

pub fn ln2(bits: u32) -> Interval {
    two_atanh_small(&Rat::new(Int::one(), Int::from(3)), bits)
}

pub fn ln10(bits: u32) -> Interval {
    // ln 10 = 3 ln 2 + ln(5/4)
    ln2(bits).mul_int(&Int::from(3)).add(&two_atanh_small(&Rat::new(Int::one(), Int::from(9)), bits))
}

/// `ln r` for rational `r > 0`.
pub fn ln_rat(r: &Rat, bits: u32) -> Result<Interval> {
    if !r.is_positive() {
        return Err(Error::Precision(format!("ln of non-positive {r}")));
    }
    // r = 2^e y with 1 <= y < 2
    let mut e = r.numer().bits() as i64 - r.denom().bits() as i64;
    let two = Int::from(2);
    let mut y = if e >= 0 {
        Rat::new(r.numer().clone(), r.denom() * num_traits::pow(two.clone(), e as usize))
    } else {
        Rat::new(r.numer() * num_traits::pow(two.clone(), (-e) as usize), r.denom().clone())
    };
    while y < Rat::one() {
        y *= Int::from(2);
        e -= 1;
    }
    while y >= Rat::from_integer(two.clone()) {
        y /= Int::from(2);
        e += 1;
    }
    let guard = 64 - (e.unsigned_abs().max(1).leading_zeros()) + 8;
    let w = bits + guard;
    let z = (&y - Rat::one()) / (&y + Rat::one());
    let ln_y = two_atanh_small(&z, w);
    let total = ln2(w).mul_int(&Int::from(e)).add(&ln_y);
    Ok(total.rescale(bits))
}

pub fn ln_int(n: &Int, bits: u32) -> Result<Interval> {
    let keep = bits as u64 + 96;
    if n.is_positive() && n.bits() > keep {
        // n lies in [t, t + 1] * 2^s with t the leading bits
        let s = n.bits() - keep;
        let t: Int = n >> s;
        let lo = ln_rat(&Rat::from_integer(t.clone()), bits + 8)?;
        let hi = ln_rat(&Rat::from_integer(t + 1), bits + 8)?;
        let shift = ln2(bits + 8 + 64).mul_int(&Int::from(s)).rescale(bits + 8);
        let iv = Interval { lo: lo.lo, hi: hi.hi, bits: bits + 8 }.add(&shift);
        return Ok(iv.rescale(bits));
    }
    ln_rat(&Rat::from_integer(n.clone()), bits)
}

impl Interval {
    /// Drops to `bits` fractional bits (outward rounding).
    pub fn rescale(&self, bits: u32) -> Interval {
        if bits >= self.bits {
            let s = bits - self.bits;
            return Interval { lo: &self.lo << s, hi: &self.hi << s, bits };
        }
        let s = self.bits - bits;
        Interval { lo: shr_floor(&self.lo, s), hi: shr_ceil(&self.hi, s), bits }
    }
}

/// Evaluates `f` at increasing working precision until its enclosure pins
/// `digits` significant digits. Fails with a precision error rather than
/// returning an uncertified string.
pub fn certify<F>(digits: usize, f: F) -> Result<(String, Interval)>
where
    F: Fn(u32) -> Result<Interval>,
{
    let base = (digits as f64 * std::f64::consts::LOG2_10).ceil() as u32 + 32;
    for attempt in 0..5 {
        let bits = base << attempt;
        let iv = f(bits)?;
        if let Some(s) = iv.to_decimal(digits) {
            return Ok((s, iv));
        }
    }
    Err(Error::Precision(format!("could not certify {digits} digits")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln2_digits() {
        let iv = ln2(200);
        assert_eq!(iv.to_decimal(30).unwrap(), "0.693147180559945309417232121458");
    }

    #[test]
    fn ln10_digits() {
        assert_eq!(ln10(200).to_decimal(25).unwrap(), "2.302585092994045684017991");
    }

    #[test]
    fn ln_of_integers_and_rationals() {
        assert_eq!(ln_int(&Int::from(7), 160).unwrap().to_decimal(20).unwrap(), "1.9459101490553133051");
        let one = ln_int(&Int::from(1), 64).unwrap();
        assert!(one.lo_rat() <= Rat::zero() && one.hi_rat() >= Rat::zero());
        assert!(one.width_ulps() < Int::from(8));
        let half = ln_rat(&Rat::new(1.into(), 2.into()), 160).unwrap();
        assert_eq!(half.to_decimal(20).unwrap(), "-0.69314718055994530941");
    }

    #[test]
    fn ln_of_huge_integer() {
        // ln(10^1000) = 1000 ln 10
        let n = num_traits::pow(Int::from(10), 1000);
        let got = ln_int(&n, 128).unwrap().to_decimal(22).unwrap();
        assert_eq!(got, "2302.585092994045684017");
    }

    #[test]
    fn enclosure_contains_value() {
        let iv = ln_int(&Int::from(3), 96).unwrap();
        let v = 3f64.ln();
        assert!(iv.lo_rat() <= Rat::from_float(v + 1e-12).unwrap());
        assert!(iv.hi_rat() >= Rat::from_float(v - 1e-12).unwrap());
    }

    #[test]
    fn decimal_formatting() {
        let x = Interval::from_rat(&Rat::new(123456.into(), 1000.into()), 80);
        assert_eq!(x.to_decimal(4).unwrap(), "123.4");
        let y = Interval::from_int(&num_traits::pow(Int::from(10), 40), 8);
        assert_eq!(y.to_decimal(3).unwrap(), "1.00e40");
        let z = Interval::from_rat(&Rat::new(314.into(), 100000.into()), 80);
        assert_eq!(z.to_decimal(2).unwrap(), "3.1e-3");
        let w = Interval::from_rat(&Rat::new(314.into(), 10000.into()), 80);
        assert_eq!(w.to_decimal(2).unwrap(), "0.031");
    }

    #[test]
    fn truncated_ln_of_huge_integers() {
        let n = num_traits::pow(Int::from(3), 5000) + Int::from(7);
        let lo = ln_int(&n, 128).unwrap();
        let exact = ln_rat(&Rat::from_integer(n), 128).unwrap();
        assert!(lo.lo <= exact.hi && exact.lo <= lo.hi);
        assert_eq!(lo.to_decimal(30), exact.to_decimal(30));
    }

    #[test]
    fn certify_doubles_until_stable() {
        let (s, _) = certify(20, |bits| ln_int(&Int::from(2), bits)).unwrap();
        assert_eq!(s, "0.69314718055994530941");
    }
}
