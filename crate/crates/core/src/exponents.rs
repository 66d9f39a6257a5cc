//! Finite-scale exponent estimates and relation checks.
//!
//! Estimates are proxies at the heights actually reached. Ratios come from
//! certified log bounds; `err_bar` is the half-width of the ratio interval
//! those bounds produce.

use crate::bestapprox::{
    lambda_level_minimum, lin_rows_minimum, BestApproxChain, Engine, Functional, Kind, LatticePoint, Weights,
};
use crate::certified::CertifiedValue;
use crate::error::{Error, Result};
use crate::rational as rq;
use crate::theta::ThetaLadder;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};
use std::fmt;

pub const EXPONENTS_SCHEMA: &str = "exponents/1";
/// Largest number of lattice points accepted in a multiplicative search.
const MAX_MULT_POINTS: f64 = 4e11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ReportKind {
    Lambda,
    Omega,
    Multiplicative,
}

impl From<Kind> for ReportKind {
    fn from(k: Kind) -> ReportKind {
        match k {
            Kind::Lambda => ReportKind::Lambda,
            Kind::Omega => ReportKind::Omega,
        }
    }
}

/// f64 in JSON, with non-finite values as strings.
pub(crate) fn ser_f64<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else if x.is_nan() {
        s.serialize_str("nan")
    } else if *x > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

pub(crate) fn ser_opt_f64<S: Serializer>(x: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => ser_f64(v, s),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExponentRow {
    /// 1-based chain index, or `H` for multiplicative rows.
    pub n: u64,
    #[serde(serialize_with = "ser_opt_f64")]
    pub uniform_ratio: Option<f64>,
    #[serde(serialize_with = "ser_opt_f64")]
    pub ordinary_ratio: Option<f64>,
    #[serde(serialize_with = "ser_f64")]
    pub err_bar: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExponentReport {
    pub kind: ReportKind,
    pub rows: Vec<ExponentRow>,
    /// Running minimum of the uniform ratios (liminf proxy).
    #[serde(serialize_with = "ser_opt_f64")]
    pub uniform_est: Option<f64>,
    /// Running maximum of the ordinary ratios (limsup proxy).
    #[serde(serialize_with = "ser_opt_f64")]
    pub ordinary_est: Option<f64>,
    /// Chain indices (1-based, inclusive) the estimates use.
    pub window: (usize, usize),
    /// Point with `L = 0`, when the value is `+∞`.
    pub infinite_witness: Option<LatticePoint>,
    /// Always true: these are finite-height values, not limits.
    pub finite_scale_proxy: bool,
    /// Per-`H` minima of multiplicative searches.
    #[serde(skip)]
    pub minima: Vec<(u64, CertifiedValue, LatticePoint)>,
}

impl ExponentReport {
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v["schema"] = EXPONENTS_SCHEMA.into();
        v
    }
}

/// Interval of `-x/y` for `x` in `[xl, xh]` and `y` in `[yl, yh]`, `y > 0`.
fn neg_ratio((xl, xh): (f64, f64), (yl, yh): (f64, f64)) -> (f64, f64) {
    if xh == f64::NEG_INFINITY {
        return (f64::INFINITY, f64::INFINITY);
    }
    let c = [-xl / yl, -xl / yh, -xh / yl, -xh / yh];
    let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

fn mid((lo, hi): (f64, f64)) -> (f64, f64) {
    if lo.is_infinite() || hi.is_infinite() {
        return (if lo.is_infinite() { lo } else { hi }, 0.0);
    }
    (lo + (hi - lo) / 2.0, (hi - lo) / 2.0)
}

/// Ratio series over consecutive chain points after dropping `drop_first`.
pub fn estimate_from_chain(chain: &BestApproxChain, drop_first: usize) -> Result<ExponentReport> {
    let pts = &chain.points;
    if pts.len() < drop_first + 2 {
        return Err(Error::ChainTooShort {
            len: pts.len(),
            needed: drop_first + 2,
        });
    }
    let mut rows = Vec::new();
    let mut uniform_est: Option<f64> = None;
    let mut ordinary_est: Option<f64> = None;
    let mut witness = None;
    for k in drop_first..pts.len() {
        let p = &pts[k];
        if p.ln_l.1 == f64::NEG_INFINITY && witness.is_none() {
            witness = Some(p.point.clone());
        }
        let (uni, eu) = match pts.get(k + 1) {
            Some(q) => {
                let (v, e) = mid(neg_ratio(p.ln_l, q.ln_n));
                (Some(v), e)
            }
            None => (None, 0.0),
        };
        // N = 1 makes the ordinary ratio meaningless
        let (ord, eo) = if p.ln_n.0 > 0.0 {
            let (v, e) = mid(neg_ratio(p.ln_l, p.ln_n));
            (Some(v), e)
        } else {
            (None, 0.0)
        };
        if let Some(u) = uni {
            uniform_est = Some(uniform_est.map_or(u, |m| m.min(u)));
        }
        if let Some(o) = ord {
            ordinary_est = Some(ordinary_est.map_or(o, |m| m.max(o)));
        }
        rows.push(ExponentRow {
            n: k as u64 + 1,
            uniform_ratio: uni,
            ordinary_ratio: ord,
            err_bar: eu.max(eo),
        });
    }
    Ok(ExponentReport {
        kind: chain.kind.into(),
        rows,
        uniform_est,
        ordinary_est,
        window: (drop_first + 1, pts.len()),
        infinite_witness: witness,
        finite_scale_proxy: true,
        minima: Vec::new(),
    })
}

/// Direct search of the multiplicative exponents on a grid of heights.
///
/// Omega side: minimum of `|x₁θ₁ + x₂θ₂ − x₀|` over
/// `max(1,|x₁|)·max(1,|x₂|) ≤ H²`, `ν(H) = −ln(min)/ln H`. Lambda side:
/// minimum of `‖x₀θ₁‖·‖x₀θ₂‖` over `1 ≤ x₀ ≤ H`, `ν(H) = −ln(min)/(2 ln H)`.
pub fn estimate_multiplicative(ladder: &ThetaLadder, h_grid: &[u64], side: Kind) -> Result<ExponentReport> {
    if h_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("height grid must be strictly increasing".into()));
    }
    if h_grid.first() == Some(&0) || h_grid.first() == Some(&1) {
        return Err(Error::InvalidParameter("heights must be at least 2".into()));
    }
    let w = Weights::classical();
    let eng = Engine::new(
        ladder,
        &w,
        match side {
            Kind::Omega => Functional::Omega,
            Kind::Lambda => Functional::MultLambda,
        },
    );
    let mut rows = Vec::new();
    let mut minima = Vec::new();
    let mut witness = None;
    let mut uniform_est: Option<f64> = None;
    for &h in h_grid {
        let best = match side {
            Kind::Omega => {
                let h2 = (h as u128) * (h as u128);
                let approx = 2.0 * (h2 as f64) * ((h2 as f64).ln() + 1.0);
                if h2 > i64::MAX as u128 || approx > MAX_MULT_POINTS {
                    return Err(Error::CapOverflow(format!("multiplicative region for H = {h} is too large")));
                }
                let h2 = h2 as i64;
                let rows: Vec<(i64, i64)> = (0..=h2).map(|x1| (x1, if x1 == 0 { h2 } else { h2 / x1 })).collect();
                lin_rows_minimum(&eng, &rows)?
            }
            Kind::Lambda => lambda_level_minimum(&eng, h)?,
        };
        let Some(mut best) = best else { continue };
        let e = eng.finest(&mut best)?;
        let key = e.key.clone();
        let point = e.point.canonical();
        let ln_min = key.ln_f64_bounds();
        let lnh = crate::certified::ln_uint_f64(&h.into());
        let denom = match side {
            Kind::Omega => lnh,
            Kind::Lambda => (2.0 * lnh.0, 2.0 * lnh.1),
        };
        let (nu, err) = mid(neg_ratio(ln_min, denom));
        if nu.is_infinite() && witness.is_none() {
            witness = Some(point.clone());
        }
        uniform_est = Some(uniform_est.map_or(nu, |m| m.min(nu)));
        rows.push(ExponentRow {
            n: h,
            uniform_ratio: Some(nu),
            ordinary_ratio: None,
            err_bar: err,
        });
        minima.push((h, key, point));
    }
    Ok(ExponentReport {
        kind: ReportKind::Multiplicative,
        window: (1, rows.len()),
        rows,
        uniform_est,
        ordinary_est: None,
        infinite_witness: witness,
        finite_scale_proxy: true,
        minima,
    })
}

/// A real number or `+∞`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtendedReal {
    Finite(BigRational),
    Infinity,
}

impl ExtendedReal {
    pub fn finite(&self) -> Option<&BigRational> {
        match self {
            ExtendedReal::Finite(q) => Some(q),
            ExtendedReal::Infinity => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtendedReal::Infinity)
    }

    /// Exact conversion; `+∞` maps to `Infinity`.
    pub fn from_f64(x: f64) -> Result<ExtendedReal> {
        if x == f64::INFINITY {
            return Ok(ExtendedReal::Infinity);
        }
        BigRational::from_float(x)
            .map(ExtendedReal::Finite)
            .ok_or_else(|| Error::InvalidParameter(format!("{x} is not an extended real")))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExtendedReal::Finite(q) => rq::to_f64(q),
            ExtendedReal::Infinity => f64::INFINITY,
        }
    }

    /// `1/x`, with `1/∞ = 0`.
    fn recip(&self) -> Result<BigRational> {
        match self {
            ExtendedReal::Infinity => Ok(BigRational::zero()),
            ExtendedReal::Finite(q) if q.is_zero() => Err(Error::InvalidParameter("division by zero exponent".into())),
            ExtendedReal::Finite(q) => Ok(rq::div(&BigRational::one(), q)),
        }
    }
}

impl From<BigRational> for ExtendedReal {
    fn from(q: BigRational) -> ExtendedReal {
        ExtendedReal::Finite(q)
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(q) => f.write_str(&rq::to_exact_string(q)),
            ExtendedReal::Infinity => f.write_str("inf"),
        }
    }
}

impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExponentQuadruple {
    pub omega: ExtendedReal,
    pub omega_hat: ExtendedReal,
    pub lambda: ExtendedReal,
    pub lambda_hat: ExtendedReal,
}

impl ExponentQuadruple {
    pub fn new(omega: ExtendedReal, omega_hat: ExtendedReal, lambda: ExtendedReal, lambda_hat: ExtendedReal) -> Self {
        ExponentQuadruple {
            omega,
            omega_hat,
            lambda,
            lambda_hat,
        }
    }

    pub fn finite(omega: BigRational, omega_hat: BigRational, lambda: BigRational, lambda_hat: BigRational) -> Self {
        Self::new(omega.into(), omega_hat.into(), lambda.into(), lambda_hat.into())
    }
}

/// `λ̂ + 1/ω̂ − 1`.
pub fn check_jarnik(omega_hat: &ExtendedReal, lambda_hat: &ExtendedReal) -> Result<ExtendedReal> {
    if let ExtendedReal::Finite(w) = omega_hat {
        if !w.is_positive() {
            return Err(Error::InvalidParameter("omega_hat must be positive".into()));
        }
    }
    let Some(l) = lambda_hat.finite() else {
        return Ok(ExtendedReal::Infinity);
    };
    let r = rq::sub(&rq::add(l, &omega_hat.recip()?), &BigRational::one());
    Ok(ExtendedReal::Finite(rq::reduce(&r)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClauseStatus {
    Pass,
    Fail,
    Vacuous,
}

#[derive(Debug, Clone, Serialize)]
pub struct Clause {
    pub name: &'static str,
    pub status: ClauseStatus,
    /// Slack of the inequality (`≥ 0` passes); for the equality clause the
    /// signed residual. `None` when vacuous.
    pub margin: Option<ExtendedReal>,
}

impl Clause {
    fn vacuous(name: &'static str) -> Clause {
        Clause {
            name,
            status: ClauseStatus::Vacuous,
            margin: None,
        }
    }

    /// Inequality clause from its slack.
    fn slack(name: &'static str, m: BigRational, tol: &BigRational) -> Clause {
        let pass = rq::cmp(&m, &-tol.clone()) != std::cmp::Ordering::Less;
        Clause {
            name,
            status: if pass { ClauseStatus::Pass } else { ClauseStatus::Fail },
            margin: Some(ExtendedReal::Finite(rq::reduce(&m))),
        }
    }

    fn unbounded(name: &'static str) -> Clause {
        Clause {
            name,
            status: ClauseStatus::Pass,
            margin: Some(ExtendedReal::Infinity),
        }
    }

    pub fn margin_f64(&self) -> Option<f64> {
        self.margin.as_ref().map(|m| m.to_f64())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RelationReport {
    pub quadruple: ExponentQuadruple,
    pub clauses: Vec<Clause>,
}

impl RelationReport {
    pub fn all_pass(&self) -> bool {
        self.clauses.iter().all(|c| c.status != ClauseStatus::Fail)
    }

    pub fn clause(&self, name: &str) -> Option<&Clause> {
        self.clauses.iter().find(|c| c.name == name)
    }
}

fn omega_hat_clause(oh: &ExtendedReal, tol: &BigRational) -> Clause {
    match oh {
        ExtendedReal::Infinity => Clause::unbounded("omega_hat_at_least_2"),
        ExtendedReal::Finite(w) => Clause::slack("omega_hat_at_least_2", rq::sub(w, &rq::int(2)), tol),
    }
}

/// Classical spectrum: `ω̂ ≥ 2`, Jarník's identity, and the two-sided bound
/// on `λ` in terms of `ω` and `ω̂`. `tol` widens every clause (0 = exact).
pub fn check_laurent_spectrum(q: &ExponentQuadruple, tol: &BigRational) -> Result<RelationReport> {
    let mut clauses = vec![omega_hat_clause(&q.omega_hat, tol)];
    let one = BigRational::one();

    let jarnik = match (&q.lambda_hat, &q.omega_hat) {
        (ExtendedReal::Infinity, _) => Clause {
            name: "jarnik",
            status: ClauseStatus::Fail,
            margin: Some(ExtendedReal::Infinity),
        },
        _ => {
            let r = check_jarnik(&q.omega_hat, &q.lambda_hat)?;
            let res = r.finite().cloned().unwrap_or_default();
            let pass = rq::cmp(&rq::abs(&res), tol) != std::cmp::Ordering::Greater;
            Clause {
                name: "jarnik",
                status: if pass { ClauseStatus::Pass } else { ClauseStatus::Fail },
                margin: Some(r),
            }
        }
    };
    clauses.push(jarnik);

    let (w, wh, l) = (q.omega.finite(), q.omega_hat.finite(), q.lambda.finite());
    let lower = match (w, wh, l) {
        (Some(w), Some(wh), Some(l)) => {
            // ω(ω̂−1)/(ω+ω̂)
            let bound = rq::div(&rq::mul(w, &rq::sub(wh, &one)), &rq::add(w, wh));
            Clause::slack("lambda_lower", rq::sub(l, &bound), tol)
        }
        (None, Some(wh), Some(l)) => Clause::slack("lambda_lower", rq::sub(l, &rq::sub(wh, &one)), tol),
        (_, _, None) => Clause::unbounded("lambda_lower"),
        _ => Clause::vacuous("lambda_lower"),
    };
    clauses.push(lower);

    let upper = match (w, wh, l) {
        (Some(w), Some(wh), Some(l)) => {
            // (ω−ω̂+1)/ω̂
            let bound = rq::div(&rq::add(&rq::sub(w, wh), &one), wh);
            Clause::slack("lambda_upper", rq::sub(&bound, l), tol)
        }
        (None, Some(_), _) => Clause::unbounded("lambda_upper"),
        _ => Clause::vacuous("lambda_upper"),
    };
    clauses.push(upper);
    Ok(RelationReport {
        quadruple: q.clone(),
        clauses,
    })
}

/// Twisted spectrum for weights `(i, j)`:
/// `max(1/2, 1/(2i) − 1/ω̂) ≤ λ̂ ≤ min(1/(2j) − 1/ω̂, 1/(2i))`, `ω̂ ≥ 2`,
/// `λ ≥ ω(ω̂/(2i) − 1)/(2(jω̂ + iω))` and
/// `ω ≥ 4i(iλ + jλ̂)/(1 − 2jλ̂)` (vacuous unless `1 − 2jλ̂ > 0`).
pub fn check_twisted_relations(q: &ExponentQuadruple, w: &Weights, tol: &BigRational) -> Result<RelationReport> {
    let (i, j) = (w.i(), w.j());
    let one = BigRational::one();
    let two = rq::int(2);
    let inv2i = rq::div(&one, &rq::mul(&two, i));
    let inv2j = rq::div(&one, &rq::mul(&two, j));
    let mut clauses = Vec::new();

    let recip_oh = q.omega_hat.recip()?;
    match q.lambda_hat.finite() {
        Some(lh) => {
            let lo = rq::max(&rq::half(), &rq::sub(&inv2i, &recip_oh)).clone();
            clauses.push(Clause::slack("lambda_hat_lower", rq::sub(lh, &lo), tol));
            let hi = rq::min(&rq::sub(&inv2j, &recip_oh), &inv2i).clone();
            clauses.push(Clause::slack("lambda_hat_upper", rq::sub(&hi, lh), tol));
        }
        None => {
            clauses.push(Clause::unbounded("lambda_hat_lower"));
            clauses.push(Clause {
                name: "lambda_hat_upper",
                status: ClauseStatus::Fail,
                margin: Some(ExtendedReal::Infinity),
            });
        }
    }
    clauses.push(omega_hat_clause(&q.omega_hat, tol));

    let (om, oh, l) = (q.omega.finite(), q.omega_hat.finite(), q.lambda.finite());
    let lower = match (om, oh, l) {
        (Some(om), Some(oh), Some(l)) => {
            let num = rq::mul(om, &rq::sub(&rq::mul(oh, &inv2i), &one));
            let den = rq::mul(&two, &rq::add(&rq::mul(j, oh), &rq::mul(i, om)));
            Clause::slack("lambda_lower", rq::sub(l, &rq::div(&num, &den)), tol)
        }
        // ω → ∞ limit of the bound: (ω̂/(2i) − 1)/(2i)
        (None, Some(oh), Some(l)) => {
            let bound = rq::mul(&rq::sub(&rq::mul(oh, &inv2i), &one), &inv2i);
            Clause::slack("lambda_lower", rq::sub(l, &bound), tol)
        }
        (_, _, None) => Clause::unbounded("lambda_lower"),
        _ => Clause::vacuous("lambda_lower"),
    };
    clauses.push(lower);

    let omega_lower = match (om, l, q.lambda_hat.finite()) {
        (_, _, None) => Clause::vacuous("omega_lower"),
        (om, l, Some(lh)) => {
            let den = rq::sub(&one, &rq::mul(&rq::mul(&two, j), lh));
            if !den.is_positive() {
                Clause::vacuous("omega_lower")
            } else {
                match (om, l) {
                    (None, _) => Clause::unbounded("omega_lower"),
                    (Some(_), None) => Clause {
                        name: "omega_lower",
                        status: ClauseStatus::Fail,
                        margin: None,
                    },
                    (Some(om), Some(l)) => {
                        let four_i = rq::mul(&rq::int(4), i);
                        let num = rq::mul(&four_i, &rq::add(&rq::mul(i, l), &rq::mul(j, lh)));
                        Clause::slack("omega_lower", rq::sub(om, &rq::div(&num, &den)), tol)
                    }
                }
            }
        }
    };
    clauses.push(omega_lower);
    Ok(RelationReport {
        quadruple: q.clone(),
        clauses,
    })
}
