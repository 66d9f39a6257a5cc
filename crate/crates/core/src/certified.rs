//! Closed intervals with exact rational endpoints, and the comparisons and
//! elementary functions the rest of the crate is allowed to decide with.

use crate::rational::{self as rq, rat};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;

/// Outcome of a certified comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Verdict {
    Less,
    Greater,
    /// Both operands are exact and equal.
    Equal,
    Indeterminate,
}

impl Verdict {
    pub fn from_ordering(o: Ordering) -> Verdict {
        match o {
            Ordering::Less => Verdict::Less,
            Ordering::Equal => Verdict::Equal,
            Ordering::Greater => Verdict::Greater,
        }
    }

    pub fn is_decided(self) -> bool {
        self != Verdict::Indeterminate
    }
}

/// A real number known to lie in `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CertifiedValue {
    lo: BigRational,
    hi: BigRational,
}

impl CertifiedValue {
    pub fn new(lo: BigRational, hi: BigRational) -> CertifiedValue {
        assert!(rq::cmp(&lo, &hi) != Ordering::Greater, "inverted interval");
        CertifiedValue { lo, hi }
    }

    pub fn exact(v: BigRational) -> CertifiedValue {
        CertifiedValue { lo: v.clone(), hi: v }
    }

    pub fn from_int(v: impl Into<BigInt>) -> CertifiedValue {
        CertifiedValue::exact(rq::int(v))
    }

    /// `center ± radius`.
    pub fn around(center: &BigRational, radius: &BigRational) -> CertifiedValue {
        CertifiedValue {
            lo: rq::sub(center, radius),
            hi: rq::add(center, radius),
        }
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn is_exact(&self) -> bool {
        rq::cmp(&self.lo, &self.hi) == Ordering::Equal
    }

    pub fn width(&self) -> BigRational {
        rq::sub(&self.hi, &self.lo)
    }

    pub fn contains(&self, v: &BigRational) -> bool {
        rq::cmp(&self.lo, v) != Ordering::Greater && rq::cmp(v, &self.hi) != Ordering::Greater
    }

    /// True when `other` is inside `self`.
    pub fn encloses(&self, other: &CertifiedValue) -> bool {
        self.contains(&other.lo) && self.contains(&other.hi)
    }

    pub fn add(&self, o: &CertifiedValue) -> CertifiedValue {
        CertifiedValue {
            lo: rq::add(&self.lo, &o.lo),
            hi: rq::add(&self.hi, &o.hi),
        }
    }

    pub fn neg(&self) -> CertifiedValue {
        CertifiedValue {
            lo: rq::neg(&self.hi),
            hi: rq::neg(&self.lo),
        }
    }

    pub fn sub(&self, o: &CertifiedValue) -> CertifiedValue {
        self.add(&o.neg())
    }

    pub fn sub_int(&self, k: &BigInt) -> CertifiedValue {
        let k = rq::int(k.clone());
        CertifiedValue {
            lo: rq::sub(&self.lo, &k),
            hi: rq::sub(&self.hi, &k),
        }
    }

    pub fn mul_int(&self, k: &BigInt) -> CertifiedValue {
        let a = rq::mul_int(&self.lo, k);
        let b = rq::mul_int(&self.hi, k);
        if k.is_negative() {
            CertifiedValue { lo: b, hi: a }
        } else {
            CertifiedValue { lo: a, hi: b }
        }
    }

    pub fn mul(&self, o: &CertifiedValue) -> CertifiedValue {
        let c = [
            rq::mul(&self.lo, &o.lo),
            rq::mul(&self.lo, &o.hi),
            rq::mul(&self.hi, &o.lo),
            rq::mul(&self.hi, &o.hi),
        ];
        let mut lo = &c[0];
        let mut hi = &c[0];
        for v in &c[1..] {
            lo = rq::min(lo, v);
            hi = rq::max(hi, v);
        }
        CertifiedValue {
            lo: lo.clone(),
            hi: hi.clone(),
        }
    }

    pub fn abs(&self) -> CertifiedValue {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_positive() {
            self.neg()
        } else {
            let hi = rq::max(&rq::neg(&self.lo), &self.hi).clone();
            CertifiedValue {
                lo: BigRational::zero(),
                hi,
            }
        }
    }

    /// Integer power of a non-negative interval.
    pub fn pow(&self, e: u32) -> CertifiedValue {
        assert!(!self.lo.is_negative(), "pow of a possibly negative interval");
        if e == 1 {
            return self.clone();
        }
        CertifiedValue {
            lo: rq::pow(&self.lo, e),
            hi: rq::pow(&self.hi, e),
        }
    }

    pub fn max(&self, o: &CertifiedValue) -> CertifiedValue {
        CertifiedValue {
            lo: rq::max(&self.lo, &o.lo).clone(),
            hi: rq::max(&self.hi, &o.hi).clone(),
        }
    }

    pub fn min(&self, o: &CertifiedValue) -> CertifiedValue {
        CertifiedValue {
            lo: rq::min(&self.lo, &o.lo).clone(),
            hi: rq::min(&self.hi, &o.hi).clone(),
        }
    }

    /// Interval quotient; `o` must not contain zero.
    pub fn div(&self, o: &CertifiedValue) -> CertifiedValue {
        assert!(
            o.lo.is_positive() || o.hi.is_negative(),
            "division by an interval containing zero"
        );
        let inv = CertifiedValue {
            lo: rq::div(&BigRational::one(), &o.hi),
            hi: rq::div(&BigRational::one(), &o.lo),
        };
        self.mul(&inv)
    }

    /// `self^(num/den)` for a non-negative interval, endpoints rounded
    /// outward with about `bits` bits of relative precision.
    pub fn pow_ratio(&self, num: u32, den: u32, bits: u32) -> CertifiedValue {
        assert!(!self.lo.is_negative(), "fractional power of a negative interval");
        if den == 1 {
            return self.pow(num);
        }
        let (lo, _) = root_bounds(&self.lo, num, den, bits);
        let (_, hi) = root_bounds(&self.hi, num, den, bits);
        CertifiedValue { lo, hi }
    }

    pub fn to_f64_bounds(&self) -> (f64, f64) {
        (rq::to_f64_bounds(&self.lo).0, rq::to_f64_bounds(&self.hi).1)
    }

    pub fn midpoint_f64(&self) -> f64 {
        let (a, b) = self.to_f64_bounds();
        if a.is_infinite() || b.is_infinite() {
            return if a.is_infinite() { a } else { b };
        }
        a + (b - a) / 2.0
    }

    /// Outward f64 bounds on the natural log; a zero lower endpoint gives
    /// `-inf`.
    pub fn ln_f64_bounds(&self) -> (f64, f64) {
        assert!(!self.lo.is_negative(), "log of a possibly negative interval");
        let lo = if self.lo.is_zero() {
            f64::NEG_INFINITY
        } else {
            ln_rational(&self.lo, LN_BITS).to_f64_bounds().0
        };
        let hi = if self.hi.is_zero() {
            f64::NEG_INFINITY
        } else {
            ln_rational(&self.hi, LN_BITS).to_f64_bounds().1
        };
        (lo, hi)
    }

    /// The same interval with both endpoints in lowest terms.
    pub fn reduced(&self) -> CertifiedValue {
        CertifiedValue {
            lo: rq::reduce(&self.lo),
            hi: rq::reduce(&self.hi),
        }
    }
}

const LN_BITS: u32 = 96;

/// Certified comparison: `Less` iff `a.hi < b.lo`, `Greater` iff
/// `a.lo > b.hi`, `Equal` only for equal exact values.
pub fn compare_certified(a: &CertifiedValue, b: &CertifiedValue) -> Verdict {
    if rq::cmp(&a.hi, &b.lo) == Ordering::Less {
        return Verdict::Less;
    }
    if rq::cmp(&a.lo, &b.hi) == Ordering::Greater {
        return Verdict::Greater;
    }
    if a.is_exact() && b.is_exact() && rq::cmp(&a.lo, &b.lo) == Ordering::Equal {
        return Verdict::Equal;
    }
    Verdict::Indeterminate
}

/// Floor and ceiling bounds for `x^(num/den)`, `x >= 0`, with about `bits`
/// bits of relative precision.
fn root_bounds(x: &BigRational, num: u32, den: u32, bits: u32) -> (BigRational, BigRational) {
    if x.is_zero() {
        return (BigRational::zero(), BigRational::zero());
    }
    // small values need extra fractional bits
    let deficit = x.denom().bits().saturating_sub(x.numer().bits());
    let bits = bits as u64 + deficit * num as u64 / den as u64 + 2;
    let a = num_traits::pow(x.numer().magnitude().clone(), num as usize);
    let b = num_traits::pow(x.denom().magnitude().clone(), num as usize);
    // (a/b)^(1/den) = (a * b^(den-1))^(1/den) / b
    let radicand = (a * num_traits::pow(b.clone(), den as usize - 1)) << (bits as usize * den as usize);
    let r = radicand.nth_root(den);
    let exact = num_traits::pow(r.clone(), den as usize) == radicand;
    let scale = BigInt::from(b << bits as usize);
    let lo = rat(BigInt::from(r.clone()), scale.clone());
    let hi = if exact {
        lo.clone()
    } else {
        rat(BigInt::from(r + 1u32), scale)
    };
    (lo, hi)
}

/// Fixed-point `atanh(num/den)` scaled by `2^p`, for `|num/den| <= 1/3`.
/// Returns the value and an error bound in units of `2^-p`.
fn atanh_fixed(num: &BigInt, den: &BigInt, p: usize) -> (BigInt, u64) {
    let z = (num << p) / den;
    let z2 = (&z * &z) >> p;
    let mut term = z.clone();
    let mut sum = z;
    let mut k = 1u64;
    let mut count = 0u64;
    loop {
        term = (&term * &z2) >> p;
        k += 2;
        let t = &term / BigInt::from(k);
        if t.is_zero() {
            break;
        }
        sum += t;
        count += 1;
    }
    (sum, 4 * count + 16)
}

/// Certified `ln(n)` for an integer `n >= 1`, with roughly `prec` bits of
/// absolute accuracy.
pub fn ln_uint(n: &BigUint, prec: u32) -> CertifiedValue {
    assert!(!n.is_zero(), "log of zero");
    if n.is_one() {
        return CertifiedValue::exact(BigRational::zero());
    }
    let k = n.bits();
    let p = prec as usize + 24 + (64 - k.leading_zeros() as usize);
    // ln 2 = 2 atanh(1/3)
    let (l2, l2_err) = atanh_fixed(&BigInt::one(), &BigInt::from(3), p);
    // n = 2^k f with f in [1/2, 1): ln f = 2 atanh((n - 2^k)/(n + 2^k))
    let pk = BigInt::one() << k as usize;
    let nn = BigInt::from(n.clone());
    let (lf, lf_err) = atanh_fixed(&(&nn - &pk), &(&nn + &pk), p);
    let value = (&l2 * BigInt::from(k) + &lf) * 2;
    let err = BigInt::from(l2_err) * BigInt::from(k) * 2 + BigInt::from(lf_err) * 2 + 2;
    let scale = BigInt::one() << p;
    CertifiedValue {
        lo: rat(&value - &err, scale.clone()),
        hi: rat(&value + &err, scale),
    }
}

/// Certified natural log of a positive rational.
pub fn ln_rational(q: &BigRational, prec: u32) -> CertifiedValue {
    assert!(q.is_positive(), "log of a non-positive rational");
    let a = ln_uint(q.numer().magnitude(), prec);
    let b = ln_uint(q.denom().magnitude(), prec);
    a.sub(&b)
}

/// Outward f64 bounds on `ln(n)`.
pub fn ln_uint_f64(n: &BigUint) -> (f64, f64) {
    ln_uint(n, LN_BITS).to_f64_bounds()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::parse_rational;

    fn cv(a: &str, b: &str) -> CertifiedValue {
        CertifiedValue::new(parse_rational(a).unwrap(), parse_rational(b).unwrap())
    }

    #[test]
    fn comparisons() {
        assert_eq!(compare_certified(&cv("1", "2"), &cv("3", "4")), Verdict::Less);
        assert_eq!(compare_certified(&cv("3", "4"), &cv("1", "2")), Verdict::Greater);
        assert_eq!(compare_certified(&cv("1", "3"), &cv("2", "4")), Verdict::Indeterminate);
        assert_eq!(compare_certified(&cv("1/2", "1/2"), &cv("2/4", "2/4")), Verdict::Equal);
        assert_eq!(compare_certified(&cv("1/2", "1"), &cv("1", "2")), Verdict::Indeterminate);
    }

    #[test]
    fn interval_ops() {
        let a = cv("-1", "2");
        assert_eq!(a.abs().reduced(), cv("0", "2"));
        assert_eq!(a.mul(&cv("-3", "1")).reduced(), cv("-6", "3"));
        assert_eq!(cv("1/2", "1").pow(3).reduced(), cv("1/8", "1"));
        assert_eq!(cv("1", "2").div(&cv("2", "4")).reduced(), cv("1/4", "1"));
    }

    #[test]
    fn roots_enclose() {
        let x = cv("9", "9");
        let r = x.pow_ratio(5, 3, 64);
        // 9^(5/3) = 38.9407...
        let (lo, hi) = r.to_f64_bounds();
        let t = 9f64.powf(5.0 / 3.0);
        assert!(lo <= t * (1.0 + 1e-15) && t <= hi * (1.0 + 1e-15));
        assert!(hi - lo < 1e-13);
        let four = cv("4", "4").pow_ratio(1, 2, 32);
        assert!(four.is_exact());
        assert_eq!(four.reduced(), cv("2", "2"));
    }

    #[test]
    fn logs_enclose() {
        for n in [2u64, 3, 10, 59049, 1 << 40, 999_999_937] {
            let (lo, hi) = ln_uint_f64(&BigUint::from(n));
            let t = (n as f64).ln();
            assert!(lo <= t && t <= hi, "{n}");
            assert!(hi - lo < 1e-12);
        }
        let q = parse_rational("1/128").unwrap();
        let (lo, hi) = ln_rational(&q, 80).to_f64_bounds();
        assert!(lo <= -(128f64.ln()) + 1e-15 && -(128f64.ln()) - 1e-15 <= hi);
        // ln(3^10) / ln 2 from big exponents
        let big = num_traits::pow(BigUint::from(3u32), 100_000);
        let (lo, hi) = ln_uint_f64(&big);
        let t = 100_000.0 * 3f64.ln();
        assert!((lo - t).abs() < 1e-9 && (hi - t).abs() < 1e-9);
    }

    #[test]
    fn ln2_is_tight_at_high_precision() {
        let l = ln_uint(&BigUint::from(2u32), 300);
        let w = rq::to_f64(&l.width());
        assert!(w < 1e-85, "{w}");
    }
}
