//! 128-bit fixed-point filter for the scans.
//!
//! `frac(θ)` is stored as `f = ⌊frac(center)·2¹²⁸⌋` with an error bound in
//! units of `2⁻¹²⁸`. For an integer coefficient `c`, `c·f mod 2¹²⁸` then
//! locates `c·θ mod 1` to within `|c|·err` units, which decides most
//! comparisons without touching big rationals. Whatever this filter cannot
//! separate goes to the exact path.

use crate::theta::ThetaEnclosure;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

const HALF: u128 = 1 << 127;
/// Per-unit error beyond which the filter is not worth using.
const MAX_ERR: u128 = 1 << 64;
/// Total error beyond which a single evaluation is not worth using.
const MAX_TOTAL: u128 = 1 << 120;

#[derive(Debug, Clone, Copy)]
pub(crate) struct FastTheta {
    pub f: u128,
    pub err: u128,
}

impl FastTheta {
    pub fn new(t: &ThetaEnclosure) -> Option<FastTheta> {
        let num = t.center.numer();
        let den = t.center.denom();
        let r = num.mod_floor(den);
        let f = ((r << 128usize) / den).to_u128()?;
        let rad = &t.radius;
        let err = if rad.numer().is_zero() {
            0
        } else {
            let e: BigInt = (rad.numer() << 128usize) / rad.denom();
            e.to_u128()?.checked_add(1)?
        };
        // one unit for the floor of the center
        let err = err.checked_add(1)?;
        (err <= MAX_ERR).then_some(FastTheta { f, err })
    }
}

/// Distance to the nearest integer of a point on the circle, in units.
#[inline]
pub(crate) fn circle_dist(v: u128) -> u128 {
    if v > HALF {
        v.wrapping_neg()
    } else {
        v
    }
}

/// Lower and upper unit bounds for the true distance.
#[inline]
pub(crate) fn dist_bounds(v: u128, e: u128) -> (u128, u128) {
    let d = circle_dist(v);
    (d.saturating_sub(e), d.saturating_add(e).min(HALF))
}

/// Interval on a monotone transform of the comparison key. The transform
/// differs by functional (raw units or logs) but is fixed within a scan.
#[derive(Debug, Clone, Copy)]
pub(crate) struct FastKey {
    pub lo: f64,
    pub hi: f64,
}

impl FastKey {
    #[inline]
    pub fn certainly_less(&self, o: &FastKey) -> bool {
        self.hi < o.lo
    }

    #[inline]
    pub fn certainly_greater(&self, o: &FastKey) -> bool {
        self.lo > o.hi
    }
}

#[inline]
fn down(x: f64) -> f64 {
    x - x.abs() * 4.0 * f64::EPSILON
}

#[inline]
fn up(x: f64) -> f64 {
    x + x.abs() * 4.0 * f64::EPSILON
}

/// Key on the raw unit scale.
#[inline]
pub(crate) fn units_key(lo: u128, hi: u128) -> FastKey {
    FastKey {
        lo: down(lo as f64),
        hi: up(hi as f64),
    }
}

const LN_2_128: f64 = 88.722_839_111_673;

#[inline]
fn ln_units(x: u128) -> f64 {
    if x == 0 {
        f64::NEG_INFINITY
    } else {
        (x as f64).ln() - LN_2_128
    }
}

/// Log-scale key `max(e1·ln d1, e2·ln d2)` or `ln d1 + ln d2`.
#[inline]
pub(crate) fn log_key(d1: (u128, u128), d2: (u128, u128), e1: f64, e2: f64, product: bool) -> FastKey {
    let (l1, h1) = (ln_units(d1.0), ln_units(d1.1));
    let (l2, h2) = (ln_units(d2.0), ln_units(d2.1));
    let (lo, hi) = if product {
        (l1 + l2, h1 + h2)
    } else {
        ((e1 * l1).max(e2 * l2), (e1 * h1).max(e2 * h2))
    };
    let margin = |x: f64| 1e-11 * (1.0 + x.abs());
    FastKey {
        lo: if lo.is_finite() { lo - margin(lo) } else { lo },
        hi: if hi.is_finite() { hi + margin(hi) } else { hi },
    }
}

/// Total error `|c|·err` for a coefficient, if small enough to be useful.
#[inline]
pub(crate) fn coeff_err(c: u128, err: u128) -> Option<u128> {
    c.checked_mul(err).filter(|&e| e <= MAX_TOTAL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::parse_rational;

    #[test]
    fn fixed_point_matches_exact() {
        let t = ThetaEnclosure::exact(parse_rational("1/3").unwrap());
        let ft = FastTheta::new(&t).unwrap();
        // 3 * (1/3) is an integer
        let v = 3u128.wrapping_mul(ft.f);
        let (lo, _) = dist_bounds(v, 3 * ft.err);
        assert_eq!(lo, 0);
        let v = 1u128.wrapping_mul(ft.f);
        let (lo, hi) = dist_bounds(v, ft.err);
        let third = u128::MAX / 3;
        assert!(lo <= third && third <= hi);
    }

    #[test]
    fn negative_coefficients_wrap() {
        let t = ThetaEnclosure::exact(parse_rational("-2/7").unwrap());
        let ft = FastTheta::new(&t).unwrap();
        let c: i128 = -5;
        let v = (c as u128).wrapping_mul(ft.f);
        // -5 * -2/7 = 10/7, distance 3/7
        let (lo, hi) = dist_bounds(v, 5 * ft.err);
        let want = 3.0 / 7.0 * 2f64.powi(128);
        assert!((lo as f64) <= want * (1.0 + 1e-12) && want * (1.0 - 1e-12) <= hi as f64);
    }

    #[test]
    fn keys_order() {
        let a = units_key(10, 20);
        let b = units_key(30, 40);
        assert!(a.certainly_less(&b));
        assert!(b.certainly_greater(&a));
        let l = log_key((1 << 100, 1 << 100), (1 << 90, 1 << 90), 1.0, 1.0, false);
        assert!((l.lo - (100.0 - 128.0) * 2f64.ln()).abs() < 1e-9);
    }
}
