//! Parsers for command-line values. Every number is read exactly.

use dioph::bestapprox::Weights;
use dioph::exponents::ExtendedReal;
use dioph::murseq::SequencePair;
use dioph::rational::{self as rq, parse_rational};
use dioph::theta::{ThetaEnclosure, ThetaLadder};
use dioph::{Error, Result};
use num_rational::BigRational;
use num_traits::{One, Signed};
use std::cmp::Ordering;
use std::path::Path;

pub fn rational(s: &str) -> std::result::Result<BigRational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

pub fn weights(s: &str) -> std::result::Result<Weights, String> {
    let (a, b) = s.split_once(',').ok_or("weights take the form i,j (e.g. 7/10,3/10)")?;
    Weights::new(rational(a.trim())?, rational(b.trim())?).map_err(|e| e.to_string())
}

pub fn extended(s: &str) -> std::result::Result<ExtendedReal, String> {
    match s.trim() {
        "inf" | "+inf" | "infinity" => Ok(ExtendedReal::Infinity),
        t => rational(t).map(ExtendedReal::Finite),
    }
}

/// `start:stop:step` (inclusive) or a single value.
pub fn grid(s: &str) -> Result<Vec<BigRational>> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [one] => Ok(vec![parse_rational(one.trim())?]),
        [a, b, step] => {
            let (a, b, step) = (
                parse_rational(a.trim())?,
                parse_rational(b.trim())?,
                parse_rational(step.trim())?,
            );
            if !step.is_positive() {
                return Err(Error::InvalidParameter("grid step must be positive".into()));
            }
            let mut out = Vec::new();
            let mut x = a;
            while rq::cmp(&x, &b) != Ordering::Greater {
                out.push(rq::reduce(&x));
                x = rq::add(&x, &step);
                if out.len() > 1_000_000 {
                    return Err(Error::InvalidParameter("grid has too many points".into()));
                }
            }
            Ok(out)
        }
        _ => Err(Error::Parse(format!("grid {s:?} is not start:stop:step"))),
    }
}

/// One coordinate: rational, or `sqrt(n)-k` / `sqrt(n)+k` / `sqrt(n)`.
enum Coord {
    Exact(BigRational),
    Sqrt(u64, i64),
}

fn coord(s: &str) -> Result<Coord> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("sqrt(") {
        let (n, tail) = rest
            .split_once(')')
            .ok_or_else(|| Error::Parse(format!("unclosed sqrt in {s:?}")))?;
        let n: u64 = n.trim().parse().map_err(|_| Error::Parse(format!("bad radicand in {s:?}")))?;
        let tail = tail.trim();
        let k: i64 = if tail.is_empty() {
            0
        } else if let Some(t) = tail.strip_prefix('-') {
            t.trim().parse().map_err(|_| Error::Parse(format!("bad offset in {s:?}")))?
        } else if let Some(t) = tail.strip_prefix('+') {
            -t.trim().parse::<i64>().map_err(|_| Error::Parse(format!("bad offset in {s:?}")))?
        } else {
            return Err(Error::Parse(format!("bad sqrt expression {s:?}")));
        };
        return Ok(Coord::Sqrt(n, k));
    }
    Ok(Coord::Exact(parse_rational(s)?))
}

pub enum ThetaInput {
    Pair(Box<SequencePair>),
    Values(ThetaLadder),
}

/// `--theta`: a `murseq/1` file, or `a,b` with rational or `sqrt(n)-k`
/// coordinates.
pub fn theta(spec: &str, bits: u32) -> Result<ThetaInput> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = std::fs::read_to_string(path)?;
        let v: serde_json::Value = serde_json::from_str(&text)?;
        return Ok(ThetaInput::Pair(Box::new(SequencePair::from_json(&v)?)));
    }
    let (a, b) = spec
        .split_once(',')
        .ok_or_else(|| Error::Parse(format!("--theta {spec:?} is neither a file nor a pair a,b")))?;
    let (a, b) = (coord(a)?, coord(b)?);
    match (a, b) {
        (Coord::Exact(x), Coord::Exact(y)) => Ok(ThetaInput::Values(ThetaLadder::rational(x, y))),
        (a, b) => {
            let rung = |bits: u32| {
                let enc = |c: &Coord| match c {
                    Coord::Exact(x) => ThetaEnclosure::exact(x.clone()),
                    Coord::Sqrt(n, k) => ThetaEnclosure::sqrt_minus(*n, *k, bits),
                };
                dioph::theta::ThetaPair {
                    t1: enc(&a),
                    t2: enc(&b),
                }
            };
            let rungs = (0..3).map(|s| rung(bits << s)).collect();
            Ok(ThetaInput::Values(ThetaLadder::new(rungs)))
        }
    }
}

/// `t` strictly inside `(0, 1)`.
pub fn check_unit_open(t: &BigRational) -> Result<()> {
    if !t.is_positive() || rq::cmp(t, &BigRational::one()) != Ordering::Less {
        return Err(Error::InvalidParameter("grid values must lie strictly between 0 and 1".into()));
    }
    Ok(())
}
