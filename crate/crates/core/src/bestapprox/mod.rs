//! Twisted functionals and best-approximation chains.
//!
//! For weights `(i, j)` the simultaneous side uses
//! `L_λ = max(|x₀θ₁−x₁|^{1/(2i)}, |x₀θ₂−x₂|^{1/(2j)})`, `N_λ = |x₀|`, and the
//! linear side `L_ω = |x₁θ₁+x₂θ₂−x₀|`, `N_ω = max(|x₁|^{1/(2i)}, |x₂|^{1/(2j)})`.
//! With rational weights both fractional powers become integer powers after
//! raising to a common `K`, so every ordering decision is made on
//! `L_λ^K` and `N_ω^K` without roots.

mod engine;
mod fast;
mod scan;
mod sublattice;

pub(crate) use engine::{Engine, Functional};
pub use scan::{
    certify_predicted, enumerate_best_chain, twisted_omega_minimum, verify_chain_optimality,
    PredictedStatus, ScanStrategy, VerifyReport,
};
pub(crate) use scan::{lambda_level_minimum, lin_rows_minimum};
pub use sublattice::{records_on_sublattice, Side, SublatticeRecord};

use crate::certified::{ln_uint_f64, CertifiedValue};
use crate::error::{Error, Result};
use crate::rational::{self as rq, serde_rational};
use crate::theta::{ThetaLadder, ThetaPair};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Precision of fractional powers, in bits relative to the value.
pub(crate) const ROOT_BITS: u32 = 128;
const MAX_KEY_EXPONENT: u32 = 64;

/// Weights `(i, j)` with `i + j = 1` and `0 < j ≤ i < 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "WeightsRepr", into = "WeightsRepr")]
pub struct Weights {
    i: BigRational,
    j: BigRational,
    // 1/(2i) = p1/q1, 1/(2j) = p2/q2, K = lcm(q1, q2)
    p1: u32,
    q1: u32,
    p2: u32,
    q2: u32,
    k: u32,
}

#[derive(Serialize, Deserialize)]
struct WeightsRepr {
    #[serde(with = "serde_rational")]
    i: BigRational,
    #[serde(with = "serde_rational")]
    j: BigRational,
}

impl TryFrom<WeightsRepr> for Weights {
    type Error = Error;
    fn try_from(r: WeightsRepr) -> Result<Weights> {
        Weights::new(r.i, r.j)
    }
}

impl From<Weights> for WeightsRepr {
    fn from(w: Weights) -> WeightsRepr {
        WeightsRepr { i: w.i, j: w.j }
    }
}

impl Weights {
    pub fn new(i: BigRational, j: BigRational) -> Result<Weights> {
        if &i + &j != BigRational::one() {
            return Err(Error::InvalidParameter("weights must satisfy i + j = 1".into()));
        }
        if !j.is_positive() || j > i || i >= BigRational::one() {
            return Err(Error::InvalidParameter("weights must satisfy 0 < j <= i < 1".into()));
        }
        let small = |x: &BigRational| -> Result<(u32, u32)> {
            let inv = (x * BigRational::from_integer(2.into())).recip();
            match (inv.numer().to_u32(), inv.denom().to_u32()) {
                (Some(p), Some(q)) if p <= MAX_KEY_EXPONENT && q <= MAX_KEY_EXPONENT => Ok((p, q)),
                _ => Err(Error::InvalidParameter(format!(
                    "weight {} has too large a denominator for exact comparison",
                    rq::to_exact_string(x)
                ))),
            }
        };
        let (p1, q1) = small(&i)?;
        let (p2, q2) = small(&j)?;
        let k = q1.lcm(&q2);
        let w = Weights { i, j, p1, q1, p2, q2, k };
        let (e1, e2) = w.key_exponents();
        if e1.max(e2) > MAX_KEY_EXPONENT * 4 {
            return Err(Error::InvalidParameter("weight exponents too large".into()));
        }
        Ok(w)
    }

    /// `(1/2, 1/2)`.
    pub fn classical() -> Weights {
        Weights::new(rq::half(), rq::half()).expect("classical weights")
    }

    /// Weights `(i, 1 − i)`.
    pub fn from_i(i: BigRational) -> Result<Weights> {
        let j = BigRational::one() - &i;
        Weights::new(i, j)
    }

    pub fn i(&self) -> &BigRational {
        &self.i
    }

    pub fn j(&self) -> &BigRational {
        &self.j
    }

    pub fn is_classical(&self) -> bool {
        self.i == self.j
    }

    /// `K` such that `L_λ^K` and `N_ω^K` involve integer powers only.
    pub fn key_power(&self) -> u32 {
        self.k
    }

    /// `(K/(2i), K/(2j))`.
    pub fn key_exponents(&self) -> (u32, u32) {
        (self.p1 * (self.k / self.q1), self.p2 * (self.k / self.q2))
    }

    /// `1/(2i)` and `1/(2j)` as (numerator, denominator).
    pub fn inverse_exponents(&self) -> ((u32, u32), (u32, u32)) {
        ((self.p1, self.q1), (self.p2, self.q2))
    }
}

impl fmt::Display for Weights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", rq::to_exact_string(&self.i), rq::to_exact_string(&self.j))
    }
}

/// Integer point `(x₀, x₁, x₂)`. Ordering is lexicographic.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LatticePoint {
    pub x0: BigInt,
    pub x1: BigInt,
    pub x2: BigInt,
}

impl LatticePoint {
    pub fn new(x0: impl Into<BigInt>, x1: impl Into<BigInt>, x2: impl Into<BigInt>) -> LatticePoint {
        LatticePoint {
            x0: x0.into(),
            x1: x1.into(),
            x2: x2.into(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.x0.is_zero() && self.x1.is_zero() && self.x2.is_zero()
    }

    pub fn neg(&self) -> LatticePoint {
        LatticePoint::new(-&self.x0, -&self.x1, -&self.x2)
    }

    /// The representative whose first nonzero coordinate is positive.
    pub fn canonical(&self) -> LatticePoint {
        let first = [&self.x0, &self.x1, &self.x2].into_iter().find(|x| !x.is_zero());
        match first {
            Some(x) if x.is_negative() => self.neg(),
            _ => self.clone(),
        }
    }

    pub fn same_up_to_sign(&self, o: &LatticePoint) -> bool {
        self == o || self == &o.neg()
    }

    pub fn gcd(&self) -> BigInt {
        self.x0.gcd(&self.x1).gcd(&self.x2)
    }

    pub fn is_primitive(&self) -> bool {
        self.gcd().is_one()
    }

    pub fn coords(&self) -> [&BigInt; 3] {
        [&self.x0, &self.x1, &self.x2]
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let short = |x: &BigInt| {
            let s = x.to_string();
            if s.len() > 40 {
                format!("{}…({} digits)", &s[..12], s.trim_start_matches('-').len())
            } else {
                s
            }
        };
        write!(f, "({}, {}, {})", short(&self.x0), short(&self.x1), short(&self.x2))
    }
}

impl Serialize for LatticePoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.x0.to_string(), self.x1.to_string(), self.x2.to_string()].serialize(s)
    }
}

impl<'de> Deserialize<'de> for LatticePoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<LatticePoint, D::Error> {
        let v: [String; 3] = Deserialize::deserialize(d)?;
        let p = |s: &str| s.parse::<BigInt>().map_err(serde::de::Error::custom);
        Ok(LatticePoint::new(p(&v[0])?, p(&v[1])?, p(&v[2])?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Lambda,
    Omega,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Lambda => "lambda",
            Kind::Omega => "omega",
        })
    }
}

impl std::str::FromStr for Kind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Kind> {
        match s {
            "lambda" => Ok(Kind::Lambda),
            "omega" => Ok(Kind::Omega),
            _ => Err(Error::Parse(format!("unknown kind {s:?} (lambda|omega)"))),
        }
    }
}

fn dists(p: &LatticePoint, th: &ThetaPair) -> (CertifiedValue, CertifiedValue) {
    let d1 = th.t1.scaled(&p.x0).sub_int(&p.x1).abs();
    let d2 = th.t2.scaled(&p.x0).sub_int(&p.x2).abs();
    (d1, d2)
}

/// `max(|x₀θ₁−x₁|^{1/(2i)}, |x₀θ₂−x₂|^{1/(2j)})`.
pub fn eval_l_lambda(p: &LatticePoint, th: &ThetaPair, w: &Weights) -> CertifiedValue {
    let (d1, d2) = dists(p, th);
    let ((a1, b1), (a2, b2)) = w.inverse_exponents();
    d1.pow_ratio(a1, b1, ROOT_BITS).max(&d2.pow_ratio(a2, b2, ROOT_BITS))
}

/// `L_λ^K`, exact up to the θ enclosure.
pub fn eval_l_lambda_key(p: &LatticePoint, th: &ThetaPair, w: &Weights) -> CertifiedValue {
    let (d1, d2) = dists(p, th);
    let (e1, e2) = w.key_exponents();
    d1.pow(e1).max(&d2.pow(e2))
}

pub fn eval_n_lambda(p: &LatticePoint) -> BigInt {
    p.x0.abs()
}

/// `|x₁θ₁ + x₂θ₂ − x₀|`.
pub fn eval_l_omega(p: &LatticePoint, th: &ThetaPair) -> CertifiedValue {
    th.linear(&p.x1, &p.x2).sub_int(&p.x0).abs()
}

/// `max(|x₁|^{1/(2i)}, |x₂|^{1/(2j)})`.
pub fn eval_n_omega(p: &LatticePoint, w: &Weights) -> CertifiedValue {
    let ((a1, b1), (a2, b2)) = w.inverse_exponents();
    let u = CertifiedValue::exact(rq::int(p.x1.abs()));
    let v = CertifiedValue::exact(rq::int(p.x2.abs()));
    u.pow_ratio(a1, b1, ROOT_BITS).max(&v.pow_ratio(a2, b2, ROOT_BITS))
}

/// `N_ω^K = max(|x₁|^{e1}, |x₂|^{e2})`.
pub fn n_omega_key(p: &LatticePoint, w: &Weights) -> BigUint {
    let (e1, e2) = w.key_exponents();
    let u = num_traits::pow(p.x1.magnitude().clone(), e1 as usize);
    let v = num_traits::pow(p.x2.magnitude().clone(), e2 as usize);
    u.max(v)
}

/// Exact key of `N` for a chain kind: `|x₀|` or `N_ω^K`.
pub fn n_key(kind: Kind, p: &LatticePoint, w: &Weights) -> BigUint {
    match kind {
        Kind::Lambda => p.x0.magnitude().clone(),
        Kind::Omega => n_omega_key(p, w),
    }
}

/// One record of a chain with its certified values.
#[derive(Debug, Clone)]
pub struct ChainPoint {
    pub point: LatticePoint,
    /// `L^K` for the λ side (`K` from the weights), `L` for the ω side.
    pub l_key: CertifiedValue,
    /// Outward bounds on `ln L`.
    pub ln_l: (f64, f64),
    /// `|x₀|` for the λ side, `N_ω^K` for the ω side.
    pub n_key: BigUint,
    /// Outward bounds on `ln N`.
    pub ln_n: (f64, f64),
    /// Nearest-integer tie was broken to even.
    pub tie: bool,
}

impl ChainPoint {
    pub(crate) fn build(kind: Kind, point: LatticePoint, l_key: CertifiedValue, w: &Weights, tie: bool) -> ChainPoint {
        let root = match kind {
            Kind::Lambda => w.key_power(),
            Kind::Omega => 1,
        };
        let ln_l = scale_ln(l_key.ln_f64_bounds(), root);
        let n_key = n_key(kind, &point, w);
        let npow = match kind {
            Kind::Lambda => 1,
            Kind::Omega => w.key_power(),
        };
        let ln_n = if n_key.is_zero() {
            (f64::NEG_INFINITY, f64::NEG_INFINITY)
        } else {
            scale_ln(ln_uint_f64(&n_key), npow)
        };
        ChainPoint {
            point,
            l_key,
            ln_l,
            n_key,
            ln_n,
            tie,
        }
    }

    /// `L` itself (root of the key), as outward f64 bounds.
    pub fn l_f64(&self) -> (f64, f64) {
        (self.ln_l.0.exp(), self.ln_l.1.exp())
    }
}

/// Divides log bounds by `k`, rounding outward.
pub(crate) fn scale_ln((lo, hi): (f64, f64), k: u32) -> (f64, f64) {
    if k == 1 {
        return (lo, hi);
    }
    let k = k as f64;
    let widen = |x: f64, dir: f64| {
        if x.is_finite() {
            x + dir * x.abs() * 4.0 * f64::EPSILON
        } else {
            x
        }
    };
    (widen(lo / k, -1.0), widen(hi / k, 1.0))
}

pub const CHAIN_SCHEMA: &str = "chain/1";

/// Ordered records minimal for one functional pair.
#[derive(Debug, Clone)]
pub struct BestApproxChain {
    pub kind: Kind,
    pub weights: Weights,
    pub points: Vec<ChainPoint>,
    /// Records before the first point with `L ≤ 1`.
    pub pre_chain: Vec<ChainPoint>,
    pub height_cap: u64,
    /// Whether the chain comes from an exhaustive scan of the region.
    pub exhaustive: bool,
}

impl BestApproxChain {
    /// Chain from given points (for predicted chains), values at the finest
    /// rung of the ladder.
    pub fn from_points(
        kind: Kind,
        points: &[LatticePoint],
        ladder: &ThetaLadder,
        w: &Weights,
    ) -> BestApproxChain {
        let th = ladder.finest();
        let pts = points
            .iter()
            .map(|p| {
                let key = match kind {
                    Kind::Lambda => eval_l_lambda_key(p, th, w),
                    Kind::Omega => eval_l_omega(p, th),
                };
                ChainPoint::build(kind, p.clone(), key, w, false)
            })
            .collect();
        BestApproxChain {
            kind,
            weights: w.clone(),
            points: pts,
            pre_chain: Vec::new(),
            height_cap: 0,
            exhaustive: false,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let f = |x: f64| rq::f64_to_sig_string(x, 15);
        let row = |k: usize, c: &ChainPoint| {
            serde_json::json!({
                "n_index": k + 1,
                "point": c.point,
                "logL": [f(c.ln_l.0), f(c.ln_l.1)],
                "logN": f(c.ln_n.0 + (c.ln_n.1 - c.ln_n.0) / 2.0),
                "tie": c.tie,
            })
        };
        serde_json::json!({
            "schema": CHAIN_SCHEMA,
            "kind": self.kind,
            "weights": self.weights,
            "height_cap": self.height_cap,
            "exhaustive": self.exhaustive,
            "points": self.points.iter().enumerate().map(|(k, c)| row(k, c)).collect::<Vec<_>>(),
            "pre_chain": self.pre_chain.iter().enumerate().map(|(k, c)| row(k, c)).collect::<Vec<_>>(),
        })
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn lattice_points(&self) -> Vec<LatticePoint> {
        self.points.iter().map(|c| c.point.clone()).collect()
    }

    /// Checks strict monotonicity of `N` (exact) and `L` (certified).
    pub fn check_monotone(&self) -> Result<()> {
        use crate::certified::{compare_certified, Verdict};
        for (k, w) in self.points.windows(2).enumerate() {
            if w[0].n_key >= w[1].n_key {
                return Err(Error::ValidationFailed(format!("N does not increase at index {}", k + 1)));
            }
            if compare_certified(&w[1].l_key, &w[0].l_key) != Verdict::Less {
                return Err(Error::ValidationFailed(format!("L does not decrease at index {}", k + 1)));
            }
        }
        Ok(())
    }
}

/// Splits records at the first one with `L ≤ 1`.
pub(crate) fn normalize(mut recs: Vec<ChainPoint>) -> (Vec<ChainPoint>, Vec<ChainPoint>) {
    let one = rq::int(1);
    let pos = recs
        .iter()
        .position(|c| rq::cmp(c.l_key.hi(), &one) != std::cmp::Ordering::Greater)
        .unwrap_or(recs.len());
    let rest = recs.split_off(pos);
    (recs, rest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::parse_rational;

    fn q(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn weights_validation() {
        assert!(Weights::new(q("1/2"), q("1/2")).is_ok());
        assert!(Weights::new(q("3/10"), q("7/10")).is_err());
        assert!(Weights::new(q("1"), q("0")).is_err());
        assert!(Weights::new(q("0.7"), q("0.2")).is_err());
        let w = Weights::new(q("7/10"), q("3/10")).unwrap();
        assert_eq!(w.key_power(), 21);
        assert_eq!(w.key_exponents(), (15, 35));
        assert_eq!(Weights::classical().key_exponents(), (1, 1));
    }

    #[test]
    fn canonical_points() {
        let p = LatticePoint::new(0, -3, 2);
        assert_eq!(p.canonical(), LatticePoint::new(0, 3, -2));
        assert!(p.same_up_to_sign(&p.canonical()));
        assert!(LatticePoint::new(6, 4, 2).gcd() == BigInt::from(2));
        assert!(LatticePoint::new(7558272, 59049, 128).is_primitive());
    }

    #[test]
    fn functional_examples() {
        let th = ThetaPair::rational(q("1/2"), q("1/4"));
        let w = Weights::classical();
        let l = eval_l_omega(&LatticePoint::new(1, 1, 0), &th);
        assert_eq!(l.reduced(), CertifiedValue::exact(q("1/2")));
        let n = eval_n_omega(&LatticePoint::new(0, 4, 9), &w);
        assert_eq!(n.reduced(), CertifiedValue::exact(q("9")));
        let tw = Weights::new(q("7/10"), q("3/10")).unwrap();
        let n = eval_n_omega(&LatticePoint::new(0, 4, 9), &tw);
        let (lo, hi) = n.to_f64_bounds();
        assert!(38.9407 <= lo && hi <= 38.9408 && hi - lo < 1e-12);
        assert_eq!(n_omega_key(&LatticePoint::new(0, 4, 9), &tw), num_traits::pow(BigUint::from(9u32), 35));
        assert_eq!(eval_n_lambda(&LatticePoint::new(-5, 1, 1)), BigInt::from(5));
        let l = eval_l_lambda(&LatticePoint::new(3, 1, 1), &th, &w);
        assert_eq!(l.reduced(), CertifiedValue::exact(q("1/2")));
    }
}
