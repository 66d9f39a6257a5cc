//! Exact rational helpers: parsing, formatting and arithmetic on
//! unreduced ratios.
//!
//! The enclosures built from the constructed sequences have denominators
//! with hundreds of thousands of bits. `num-rational` reduces by a gcd after
//! every operation, which dominates the cost at that size, so the hot paths
//! here build ratios with `Ratio::new_raw` and keep the denominator positive.
//! Comparisons on `Ratio` are value based and remain correct for unreduced
//! representations.

use crate::error::{Error, Result};
use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;

/// Builds `n/d` without reducing; the sign is moved to the numerator.
pub fn rat(n: BigInt, d: BigInt) -> BigRational {
    assert!(!d.is_zero(), "zero denominator");
    if d.is_negative() {
        BigRational::new_raw(-n, -d)
    } else {
        BigRational::new_raw(n, d)
    }
}

pub fn int(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

pub fn add(a: &BigRational, b: &BigRational) -> BigRational {
    if a.denom() == b.denom() {
        return BigRational::new_raw(a.numer() + b.numer(), a.denom().clone());
    }
    if b.denom().is_one() {
        return BigRational::new_raw(a.numer() + b.numer() * a.denom(), a.denom().clone());
    }
    if a.denom().is_one() {
        return BigRational::new_raw(a.numer() * b.denom() + b.numer(), b.denom().clone());
    }
    BigRational::new_raw(
        a.numer() * b.denom() + b.numer() * a.denom(),
        a.denom() * b.denom(),
    )
}

pub fn sub(a: &BigRational, b: &BigRational) -> BigRational {
    add(a, &neg(b))
}

pub fn neg(a: &BigRational) -> BigRational {
    BigRational::new_raw(-a.numer(), a.denom().clone())
}

pub fn mul(a: &BigRational, b: &BigRational) -> BigRational {
    BigRational::new_raw(a.numer() * b.numer(), a.denom() * b.denom())
}

pub fn mul_int(a: &BigRational, k: &BigInt) -> BigRational {
    BigRational::new_raw(a.numer() * k, a.denom().clone())
}

pub fn div(a: &BigRational, b: &BigRational) -> BigRational {
    rat(a.numer() * b.denom(), a.denom() * b.numer())
}

pub fn pow(a: &BigRational, e: u32) -> BigRational {
    BigRational::new_raw(
        num_traits::pow(a.numer().clone(), e as usize),
        num_traits::pow(a.denom().clone(), e as usize),
    )
}

pub fn abs(a: &BigRational) -> BigRational {
    BigRational::new_raw(a.numer().abs(), a.denom().clone())
}

/// Cross-multiplied comparison; both denominators are positive.
pub fn cmp(a: &BigRational, b: &BigRational) -> Ordering {
    if a.denom() == b.denom() {
        return a.numer().cmp(b.numer());
    }
    let sa = a.numer().sign();
    let sb = b.numer().sign();
    if sa != sb {
        return sign_rank(sa).cmp(&sign_rank(sb));
    }
    (a.numer() * b.denom()).cmp(&(b.numer() * a.denom()))
}

fn sign_rank(s: Sign) -> i8 {
    match s {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

pub fn max<'a>(a: &'a BigRational, b: &'a BigRational) -> &'a BigRational {
    if cmp(a, b) == Ordering::Less {
        b
    } else {
        a
    }
}

pub fn min<'a>(a: &'a BigRational, b: &'a BigRational) -> &'a BigRational {
    if cmp(a, b) == Ordering::Greater {
        b
    } else {
        a
    }
}

pub fn floor(a: &BigRational) -> BigInt {
    a.numer().div_floor(a.denom())
}

pub fn ceil(a: &BigRational) -> BigInt {
    -((-a.numer()).div_floor(a.denom()))
}

/// Reduces to lowest terms.
pub fn reduce(a: &BigRational) -> BigRational {
    BigRational::new(a.numer().clone(), a.denom().clone())
}

/// Parses `p/q`, an integer, or a plain decimal such as `-0.75`.
///
/// Exponent notation is rejected so that every accepted string names the
/// rational it spells.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = parse_int(p.trim()).ok_or_else(bad)?;
        let q: BigInt = parse_int(q.trim()).ok_or_else(bad)?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(p, q));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (ip, fp) = body.split_once('.').unwrap_or((body, ""));
    if ip.is_empty() && fp.is_empty() {
        return Err(bad());
    }
    if !ip.bytes().all(|b| b.is_ascii_digit()) || !fp.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{ip}{fp}");
    let n: BigInt = digits.parse().map_err(|_| bad())?;
    let d = num_traits::pow(BigInt::from(10u32), fp.len());
    let q = BigRational::new(n, d);
    Ok(if neg { -q } else { q })
}

fn parse_int(s: &str) -> Option<BigInt> {
    let body = s.strip_prefix('-').or_else(|| s.strip_prefix('+')).unwrap_or(s);
    if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// `p/q` in lowest terms, or `p` when the denominator is one.
pub fn to_exact_string(a: &BigRational) -> String {
    let r = reduce(a);
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Decimal rendering with `digits` significant digits, rounded half away
/// from zero, in the style of C's `%.{digits}g`.
pub fn to_sig_string(a: &BigRational, digits: u32) -> String {
    if a.numer().is_zero() {
        return "0".to_string();
    }
    let neg = a.numer().is_negative();
    let num = a.numer().magnitude().clone();
    let den = a.denom().magnitude().clone();
    // e10 = floor(log10 |a|), found from a bit-length estimate and corrected.
    let approx = (num.bits() as f64 - den.bits() as f64) * std::f64::consts::LOG10_2;
    let mut e10 = approx.floor() as i64;
    let ten = BigUint::from(10u32);
    let ge_pow = |e: i64| -> bool {
        // |a| >= 10^e
        if e >= 0 {
            num >= &den * num_traits::pow(ten.clone(), e as usize)
        } else {
            &num * num_traits::pow(ten.clone(), (-e) as usize) >= den
        }
    };
    while !ge_pow(e10) {
        e10 -= 1;
    }
    while ge_pow(e10 + 1) {
        e10 += 1;
    }
    // mantissa = round(|a| * 10^(digits-1-e10))
    let shift = digits as i64 - 1 - e10;
    let (sn, sd) = if shift >= 0 {
        (&num * num_traits::pow(ten.clone(), shift as usize), den.clone())
    } else {
        (num.clone(), &den * num_traits::pow(ten.clone(), (-shift) as usize))
    };
    let (q, r) = sn.div_rem(&sd);
    let mut m = if &r * 2u32 >= sd { q + 1u32 } else { q };
    if m == num_traits::pow(ten.clone(), digits as usize) {
        m /= 10u32;
        e10 += 1;
    }
    format_g(neg, &m.to_string(), e10, digits)
}

/// `%.{digits}g`-style rendering of an f64.
pub fn f64_to_sig_string(x: f64, digits: u32) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".to_string() } else { "-inf".to_string() };
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let s = format!("{:.*e}", digits as usize - 1, x.abs());
    let (mant, exp) = s.split_once('e').expect("exponent form");
    let e10: i64 = exp.parse().expect("exponent");
    let m: String = mant.chars().filter(|c| *c != '.').collect();
    format_g(x < 0.0, &m, e10, digits)
}

fn format_g(neg: bool, mantissa: &str, e10: i64, digits: u32) -> String {
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    if e10 < -5 || e10 >= digits as i64 {
        let (head, tail) = mantissa.split_at(1);
        let tail = tail.trim_end_matches('0');
        out.push_str(head);
        if !tail.is_empty() {
            out.push('.');
            out.push_str(tail);
        }
        out.push_str(&format!("e{}{:02}", if e10 < 0 { '-' } else { '+' }, e10.abs()));
    } else if e10 >= 0 {
        let (int_part, frac) = mantissa.split_at(e10 as usize + 1);
        out.push_str(int_part);
        let frac = frac.trim_end_matches('0');
        if !frac.is_empty() {
            out.push('.');
            out.push_str(frac);
        }
    } else {
        out.push_str("0.");
        for _ in 0..(-e10 - 1) {
            out.push('0');
        }
        out.push_str(mantissa.trim_end_matches('0'));
    }
    out
}

/// Outward f64 bounds `(lo, hi)` with `lo <= a <= hi`.
pub fn to_f64_bounds(a: &BigRational) -> (f64, f64) {
    let n = a.numer();
    if n.is_zero() {
        return (0.0, 0.0);
    }
    let d = a.denom().magnitude();
    let mag = n.magnitude();
    // m = floor(|a| * 2^sh) with m in [2^52, 2^53)
    let mut sh: i64 = 53 - (mag.bits() as i64 - d.bits() as i64);
    let mut m;
    loop {
        let (sn, sd) = if sh >= 0 {
            (mag << (sh as usize), d.clone())
        } else {
            (mag.clone(), d << ((-sh) as usize))
        };
        m = &sn / &sd;
        let bits = m.bits();
        if bits > 53 {
            sh -= 1;
        } else if bits < 53 {
            sh += 1;
        } else {
            break;
        }
    }
    let m = m.to_u64().expect("53-bit mantissa") as f64;
    let lo = ldexp_down(m, -sh);
    let hi = ldexp_up(m + 1.0, -sh);
    if n.is_negative() {
        (-hi, -lo)
    } else {
        (lo, hi)
    }
}

/// Nearest f64 (midpoint of the outward bounds).
pub fn to_f64(a: &BigRational) -> f64 {
    let (lo, hi) = to_f64_bounds(a);
    if lo.is_infinite() || hi.is_infinite() {
        return if a.numer().is_negative() { f64::NEG_INFINITY } else { f64::INFINITY };
    }
    if lo == hi {
        return lo;
    }
    num_traits::ToPrimitive::to_f64(a).unwrap_or(lo + (hi - lo) / 2.0)
}

// m * 2^e for a positive integer m < 2^54, rounded down / up.
fn ldexp_down(m: f64, e: i64) -> f64 {
    if e > 1100 {
        return f64::MAX;
    }
    if e < -1100 {
        return 0.0;
    }
    let v = scale2(m, e);
    if v.is_infinite() {
        f64::MAX
    } else if v < f64::MIN_POSITIVE {
        // subnormal results may have been rounded up
        0.0
    } else {
        v
    }
}

fn ldexp_up(m: f64, e: i64) -> f64 {
    if e > 1100 {
        return f64::INFINITY;
    }
    if e < -1100 {
        return f64::MIN_POSITIVE;
    }
    let v = scale2(m, e);
    if v < f64::MIN_POSITIVE {
        f64::MIN_POSITIVE
    } else {
        v
    }
}

fn scale2(m: f64, e: i64) -> f64 {
    let mut v = m;
    let mut e = e;
    while e > 0 {
        let s = e.min(1000);
        v *= 2f64.powi(s as i32);
        e -= s;
    }
    while e < 0 {
        let s = (-e).min(1000);
        v /= 2f64.powi(s as i32);
        e += s;
    }
    v
}

/// Lower bound `floor(sqrt(q) * 2^bits) / 2^bits` for `q >= 0`.
pub fn sqrt_lower(q: &BigRational, bits: u32) -> BigRational {
    assert!(!q.is_negative(), "sqrt of a negative rational");
    let n = q.numer().magnitude();
    let d = q.denom().magnitude();
    // sqrt(n/d) = sqrt(n*d)/d
    let scaled = (n * d) << (2 * bits as usize);
    let r = scaled.sqrt();
    rat(BigInt::from(r), BigInt::from(d << bits as usize))
}

pub fn is_integer(a: &BigRational) -> bool {
    (a.numer() % a.denom()).is_zero()
}

pub fn half() -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(2))
}

pub mod serde_rational {
    //! Serializes a rational as its exact `p/q` string.
    use super::{parse_rational, to_exact_string};
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&to_exact_string(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

pub mod serde_bigint_str {
    //! Serializes big integers as decimal strings.
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Serializes as `{"exact": "p/q", "approx": f64}`.
pub mod serde_exact {
    use super::*;
    use serde::ser::SerializeStruct;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(q: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Exact", 2)?;
        st.serialize_field("exact", &to_exact_string(q))?;
        st.serialize_field("approx", &to_f64(q))?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(q("12/5"), q("2.4"));
        assert_eq!(q("-0.7"), BigRational::new((-7).into(), 10.into()));
        assert_eq!(q("7"), int(7));
        assert_eq!(q(".5"), half());
        assert!(parse_rational("1e-3").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn unreduced_arithmetic_matches_reduced() {
        let a = rat(6.into(), 8.into());
        let b = rat(2.into(), 12.into());
        assert_eq!(reduce(&add(&a, &b)), q("11/12"));
        assert_eq!(reduce(&mul(&a, &b)), q("1/8"));
        assert_eq!(cmp(&a, &b), Ordering::Greater);
        assert_eq!(cmp(&neg(&a), &b), Ordering::Less);
        assert_eq!(floor(&q("-7/2")), BigInt::from(-4));
        assert_eq!(ceil(&q("-7/2")), BigInt::from(-3));
    }

    #[test]
    fn significant_digit_rendering() {
        assert_eq!(to_sig_string(&q("72/35"), 15), "2.05714285714286");
        assert_eq!(to_sig_string(&q("5"), 15), "5");
        assert_eq!(to_sig_string(&q("-1/3"), 3), "-0.333");
        assert_eq!(to_sig_string(&q("1/1000000"), 3), "1e-06");
        assert_eq!(to_sig_string(&q("999999/1000000"), 3), "1");
        assert_eq!(f64_to_sig_string(2.5, 15), "2.5");
        assert_eq!(f64_to_sig_string(-0.000123, 15), "-0.000123");
        assert_eq!(f64_to_sig_string(1.5e20, 15), "1.5e+20");
    }

    #[test]
    fn f64_bounds_bracket_value() {
        for s in ["1/3", "-2/7", "123456789/1000", "1/1099511627776"] {
            let v = q(s);
            let (lo, hi) = to_f64_bounds(&v);
            assert!(lo <= hi);
            let fl = BigRational::from_float(lo).unwrap();
            let fh = BigRational::from_float(hi).unwrap();
            assert!(fl <= v && v <= fh, "{s}");
        }
        let tiny = rat(1.into(), BigInt::from(1) << 5000usize);
        let (lo, hi) = to_f64_bounds(&tiny);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0);
    }

    #[test]
    fn sqrt_lower_is_below() {
        let two = int(2);
        let s = sqrt_lower(&two, 64);
        assert!(mul(&s, &s) <= two);
        let ulp = rat(1.into(), BigInt::from(1) << 64usize);
        let s1 = add(&s, &ulp);
        assert!(mul(&s1, &s1) > two);
    }
}
