//! Certified enclosures of θ₁, θ₂ and nearest-integer distances.

use crate::certified::CertifiedValue;
use crate::error::{Error, Result};
use crate::murseq::SequencePair;
use crate::rational::{self as rq, rat};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use std::cmp::Ordering;

pub const THETA_SCHEMA: &str = "theta/1";

/// Where an enclosure came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ThetaSource {
    /// Truncated series over a column of a sequence pair.
    PairColumn { column: crate::error::Column },
    /// Exact rational.
    Rational,
    /// `sqrt(n) - k` truncated to the given number of bits.
    Sqrt { n: u64, k: i64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaEnclosure {
    pub center: BigRational,
    pub radius: BigRational,
    /// Series truncation level, or bits for square roots.
    pub trunc_level: usize,
    pub source: ThetaSource,
}

impl ThetaEnclosure {
    pub fn exact(v: BigRational) -> ThetaEnclosure {
        ThetaEnclosure {
            center: v,
            radius: BigRational::zero(),
            trunc_level: 0,
            source: ThetaSource::Rational,
        }
    }

    /// `sqrt(n) - k` to within `2^-bits`.
    pub fn sqrt_minus(n: u64, k: i64, bits: u32) -> ThetaEnclosure {
        let s = rq::sqrt_lower(&rq::int(n), bits + 1);
        let half_ulp = rat(BigInt::one(), BigInt::one() << (bits as usize + 1));
        // sqrt(n) lies in [s, s + 2^-(bits+1)]
        ThetaEnclosure {
            center: rq::sub(&rq::add(&s, &half_ulp), &rq::int(k)),
            radius: half_ulp,
            trunc_level: bits as usize,
            source: ThetaSource::Sqrt { n, k },
        }
    }

    pub fn value(&self) -> CertifiedValue {
        CertifiedValue::around(&self.center, &self.radius)
    }

    /// Enclosure of `c·θ`.
    pub fn scaled(&self, c: &BigInt) -> CertifiedValue {
        let center = rq::mul_int(&self.center, c);
        let radius = rq::mul_int(&self.radius, &c.abs());
        CertifiedValue::around(&center, &radius)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "center": rq::to_exact_string(&self.center),
            "radius": rq::to_exact_string(&self.radius),
            "decimal": format!(
                "{} ± {}",
                rq::to_sig_string(&self.center, 40),
                rq::to_sig_string(&self.radius, 3)
            ),
            "trunc_level": self.trunc_level,
            "source": self.source,
        })
    }
}

/// Enclosures of both coordinates at one refinement level.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaPair {
    pub t1: ThetaEnclosure,
    pub t2: ThetaEnclosure,
}

impl ThetaPair {
    pub fn rational(a: BigRational, b: BigRational) -> ThetaPair {
        ThetaPair {
            t1: ThetaEnclosure::exact(a),
            t2: ThetaEnclosure::exact(b),
        }
    }

    /// Enclosure of `c1·θ₁ + c2·θ₂`.
    pub fn linear(&self, c1: &BigInt, c2: &BigInt) -> CertifiedValue {
        let center = rq::add(&rq::mul_int(&self.t1.center, c1), &rq::mul_int(&self.t2.center, c2));
        let radius = rq::add(
            &rq::mul_int(&self.t1.radius, &c1.abs()),
            &rq::mul_int(&self.t2.radius, &c2.abs()),
        );
        CertifiedValue::around(&center, &radius)
    }

    pub fn is_exact(&self) -> bool {
        self.t1.radius.is_zero() && self.t2.radius.is_zero()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "schema": THETA_SCHEMA,
            "theta1": self.t1.to_json(),
            "theta2": self.t2.to_json(),
        })
    }
}

/// `θ` for a sequence pair truncated after `level` terms, with tail radius
/// `2/X_{level+1}`. Level 0 (empty sum) is only accepted when `permissive`.
pub fn theta_from_pair(pair: &SequencePair, level: usize, permissive: bool) -> Result<ThetaPair> {
    if level >= pair.len() || (level == 0 && !permissive) {
        return Err(Error::TruncationTooDeep {
            level,
            available: pair.len(),
        });
    }
    let column = |xs: &[num_bigint::BigUint], primes: &[BigInt], signs: &[i8], col| {
        let (center, src_level) = if level == 0 {
            (BigRational::zero(), 0)
        } else {
            // Σ_{k≤N} ε_k/X_k = ε_N X′_N / X_N
            let num = if signs[level - 1] > 0 {
                primes[level - 1].clone()
            } else {
                -primes[level - 1].clone()
            };
            (rat(num, BigInt::from(xs[level - 1].clone())), level)
        };
        ThetaEnclosure {
            center,
            radius: rat(BigInt::from(2), BigInt::from(xs[level].clone())),
            trunc_level: src_level,
            source: ThetaSource::PairColumn { column: col },
        }
    };
    Ok(ThetaPair {
        t1: column(&pair.a, &pair.a_prime, &pair.signs_a, crate::error::Column::A),
        t2: column(&pair.b, &pair.b_prime, &pair.signs_b, crate::error::Column::B),
    })
}

/// Successively finer enclosures of the same θ; comparisons that stay
/// undecided on one rung are retried on the next.
#[derive(Debug, Clone)]
pub struct ThetaLadder {
    rungs: Vec<ThetaPair>,
}

impl ThetaLadder {
    pub fn new(rungs: Vec<ThetaPair>) -> ThetaLadder {
        assert!(!rungs.is_empty(), "empty ladder");
        ThetaLadder { rungs }
    }

    pub fn rational(a: BigRational, b: BigRational) -> ThetaLadder {
        ThetaLadder::new(vec![ThetaPair::rational(a, b)])
    }

    /// Levels `start..=len-1` of a sequence pair.
    pub fn from_pair(pair: &SequencePair, start: usize) -> Result<ThetaLadder> {
        let start = start.max(1);
        if start >= pair.len() {
            return Err(Error::TruncationTooDeep {
                level: start,
                available: pair.len(),
            });
        }
        let rungs = (start..pair.len())
            .map(|n| theta_from_pair(pair, n, false))
            .collect::<Result<Vec<_>>>()?;
        Ok(ThetaLadder::new(rungs))
    }

    /// `(sqrt(n1) - k1, sqrt(n2) - k2)` at `bits, 2·bits, 4·bits, …`.
    pub fn sqrt_pair(n1: u64, k1: i64, n2: u64, k2: i64, bits: u32, rungs: usize) -> ThetaLadder {
        let rungs = (0..rungs.max(1))
            .map(|r| {
                let b = bits << r;
                ThetaPair {
                    t1: ThetaEnclosure::sqrt_minus(n1, k1, b),
                    t2: ThetaEnclosure::sqrt_minus(n2, k2, b),
                }
            })
            .collect();
        ThetaLadder::new(rungs)
    }

    pub fn rungs(&self) -> &[ThetaPair] {
        &self.rungs
    }

    pub fn coarsest(&self) -> &ThetaPair {
        &self.rungs[0]
    }

    pub fn finest(&self) -> &ThetaPair {
        self.rungs.last().unwrap()
    }
}

/// Distance to the nearest integer together with that integer.
#[derive(Debug, Clone, PartialEq)]
pub struct Nearest {
    pub dist: CertifiedValue,
    pub nearest: BigInt,
    /// The value was exactly a half-integer and was rounded to even.
    pub tie: bool,
}

/// Nearest-integer decision for an enclosure narrower than 1/4.
///
/// Returns `Indeterminate` when the enclosure touches a half-integer
/// without being exactly equal to it.
pub fn dist_to_nearest_int(x: &CertifiedValue) -> Result<Nearest> {
    let quarter = BigRational::new(BigInt::one(), BigInt::from(4));
    let w = x.width();
    if rq::cmp(&w, &quarter) != Ordering::Less {
        return Err(Error::WidthTooLarge { width: rq::to_f64(&w) });
    }
    let half = rq::half();
    // nearest candidates from each endpoint: floor(v + 1/2)
    let n_lo = rq::floor(&rq::add(x.lo(), &half));
    let n_hi = rq::floor(&rq::add(x.hi(), &half));
    let lo_is_half = is_half_integer(x.lo());
    let hi_is_half = is_half_integer(x.hi());
    if x.is_exact() && lo_is_half {
        // round half to even
        let down = rq::floor(x.lo());
        let n = if down.is_even() { down } else { down + 1 };
        return Ok(Nearest {
            dist: CertifiedValue::exact(half),
            nearest: n,
            tie: true,
        });
    }
    if n_lo != n_hi || lo_is_half || hi_is_half {
        return Err(Error::Indeterminate(format!(
            "enclosure [{}, {}] touches a half-integer",
            rq::to_sig_string(x.lo(), 12),
            rq::to_sig_string(x.hi(), 12)
        )));
    }
    let d = x.sub_int(&n_lo).abs();
    Ok(Nearest {
        dist: d,
        nearest: n_lo,
        tie: false,
    })
}

fn is_half_integer(v: &BigRational) -> bool {
    let twice = rq::mul_int(v, &BigInt::from(2));
    rq::is_integer(&twice) && !rq::is_integer(v)
}
