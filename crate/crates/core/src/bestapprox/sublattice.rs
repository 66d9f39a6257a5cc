//! Records along the sublattices singled out by the construction.
//!
//! `BnDivisible` walks `x₀ = m·B_n`, `x₂ = m·ε′_n·B′_n` and rounds `x₁`;
//! the tracked quantity is `|x₀θ₁ − x₁|`. `An1Divisible` is the mirror
//! image: `x₀ = m·A_{n+1}`, `x₁ = m·ε_{n+1}·A′_{n+1}`, tracking
//! `|x₀θ₂ − x₂|`.

use super::engine::{Cand, Engine, Form, Functional};
use super::{LatticePoint, Weights};
use crate::certified::{CertifiedValue, Verdict};
use crate::error::{Error, Result};
use crate::murseq::SequencePair;
use crate::theta::ThetaLadder;
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;
use std::str::FromStr;

const CHUNK: u64 = 1 << 18;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    BnDivisible,
    An1Divisible,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::BnDivisible => "bn",
            Side::An1Divisible => "an1",
        })
    }
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Side> {
        match s {
            "bn" | "b" => Ok(Side::BnDivisible),
            "an1" | "a" => Ok(Side::An1Divisible),
            _ => Err(Error::Parse(format!("unknown side {s:?} (expected bn or an1)"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SublatticeRecord {
    pub m: u64,
    pub point: LatticePoint,
    /// The tracked single distance.
    #[serde(skip)]
    pub dist: CertifiedValue,
}

struct Lattice {
    step0: BigInt,
    step_fixed: BigInt,
    fixed_is_x2: bool,
}

impl Lattice {
    fn form(&self, m: u64) -> Form {
        let m = BigInt::from(m);
        let x0 = &self.step0 * &m;
        let fx = &self.step_fixed * &m;
        if self.fixed_is_x2 {
            Form::Sim { x0, x1: None, x2: Some(fx) }
        } else {
            Form::Sim { x0, x1: Some(fx), x2: None }
        }
    }
}

/// Strict running-minimum records of the tracked distance for
/// `m = m_start..=m_cap`. The default start is `A_n` (`BnDivisible`) or
/// `B_n` (`An1Divisible`), where the predicted anchors sit.
pub fn records_on_sublattice(
    pair: &SequencePair,
    ladder: &ThetaLadder,
    n: usize,
    side: Side,
    m_start: Option<u64>,
    m_cap: u64,
) -> Result<Vec<SublatticeRecord>> {
    if n == 0 || n + 1 > pair.len() {
        return Err(Error::InvalidParameter(format!(
            "sublattice index {n} needs terms up to {} (have {})",
            n + 1,
            pair.len()
        )));
    }
    let (lat, func, default_start) = match side {
        Side::BnDivisible => (
            Lattice {
                step0: BigInt::from(pair.b_n(n).clone()),
                step_fixed: pair.b_prime_n(n) * i64::from(pair.sign_b(n)),
                fixed_is_x2: true,
            },
            Functional::First,
            pair.a_n(n),
        ),
        Side::An1Divisible => (
            Lattice {
                step0: BigInt::from(pair.a_n(n + 1).clone()),
                step_fixed: pair.a_prime_n(n + 1) * i64::from(pair.sign_a(n + 1)),
                fixed_is_x2: false,
            },
            Functional::Second,
            pair.b_n(n),
        ),
    };
    let start = match m_start {
        Some(s) => s.max(1),
        None => default_start.to_u64().unwrap_or(u64::MAX),
    };
    if start > m_cap {
        return Ok(Vec::new());
    }
    // weights only enter the key of the Lambda functional
    let eng = Engine::new(ladder, &Weights::classical(), func);
    let step = lat.step0.to_u128();
    let f = eng.fast.map(|(a, b)| if side == Side::BnDivisible { a.f } else { b.f });

    let ranges: Vec<(u64, u64)> = {
        let mut out = Vec::new();
        let mut a = start;
        loop {
            let b = a.saturating_add(CHUNK - 1).min(m_cap);
            out.push((a, b));
            if b >= m_cap {
                break;
            }
            a = b + 1;
        }
        out
    };
    let parts: Vec<Result<Vec<(u64, Cand)>>> = ranges
        .into_par_iter()
        .map(|(a, b)| {
            let mut recs: Vec<(u64, Cand)> = Vec::new();
            for m in a..=b {
                let key = match (step, f) {
                    (Some(s), Some(f)) => s.checked_mul(m as u128).and_then(|c| {
                        let v = c.wrapping_mul(f);
                        eng.fast_sim(c, v, v)
                    }),
                    _ => None,
                };
                match recs.last_mut() {
                    None => recs.push((m, eng.cand(lat.form(m), key))),
                    Some((_, last)) => {
                        if let (Some(k), Some(lk)) = (key, last.fast) {
                            if k.lo >= lk.hi {
                                continue;
                            }
                        }
                        let mut c = eng.cand(lat.form(m), key);
                        if eng.compare(&mut c, last)? == Verdict::Less {
                            recs.push((m, c));
                        }
                    }
                }
            }
            Ok(recs)
        })
        .collect();

    let mut merged: Vec<(u64, Cand)> = Vec::new();
    for part in parts {
        for (m, mut c) in part? {
            match merged.last_mut() {
                None => merged.push((m, c)),
                Some((_, last)) => {
                    if eng.compare(&mut c, last)? == Verdict::Less {
                        merged.push((m, c));
                    }
                }
            }
        }
    }
    merged
        .into_iter()
        .map(|(m, mut c)| {
            let e = eng.finest(&mut c)?;
            Ok(SublatticeRecord {
                m,
                point: e.point.clone(),
                dist: e.key.clone(),
            })
        })
        .collect()
}
