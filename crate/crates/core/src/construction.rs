//! The (μ, R) construction: admissibility, closed-form exponents, parameter
//! solving for a prescribed ω̂, predicted best approximations and the
//! sublattice record bounds.

use crate::bestapprox::{n_key, Kind, LatticePoint, Side, SublatticeRecord, Weights};
use crate::certified::{compare_certified, CertifiedValue, Verdict};
use crate::error::{Error, Result};
use crate::exponents::{check_jarnik, ExponentQuadruple, ExtendedReal};
use crate::murseq::SequencePair;
use crate::rational::{self as rq, serde_exact};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use std::cmp::Ordering;

pub const CONSTRUCTION_SCHEMA: &str = "construction/1";
/// Fractional bits of the rational lower bound for the square root.
const SQRT_BITS: u32 = 64;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    #[serde(with = "serde_exact")]
    pub margin: BigRational,
    pub pass: bool,
}

impl Check {
    fn strict(name: &'static str, margin: BigRational) -> Check {
        let margin = rq::reduce(&margin);
        let pass = margin.is_positive();
        Check { name, margin, pass }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Cond1Report {
    #[serde(with = "serde_exact")]
    pub mu: BigRational,
    #[serde(rename = "R", with = "serde_exact")]
    pub r: BigRational,
    pub weights: Weights,
    pub checks: Vec<Check>,
}

impl Cond1Report {
    pub fn passes(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failed(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.name).collect()
    }
}

/// `μ > 2`, `R < j(μ−2)`, `R > μ/(μ−2)`, `R > μ/(i(μ−1))`, all exact.
pub fn check_cond1(mu: &BigRational, r: &BigRational, w: &Weights) -> Cond1Report {
    let two = rq::int(2);
    let one = BigRational::one();
    let mut checks = vec![Check::strict("mu_gt_2", rq::sub(mu, &two))];
    let mm2 = rq::sub(mu, &two);
    checks.push(Check::strict("r_lt_j_mu_minus_2", rq::sub(&rq::mul(w.j(), &mm2), r)));
    // the last two need μ > 2 to be meaningful; report them failed otherwise
    if mm2.is_positive() {
        checks.push(Check::strict("r_gt_mu_over_mu_minus_2", rq::sub(r, &rq::div(mu, &mm2))));
        let den = rq::mul(w.i(), &rq::sub(mu, &one));
        checks.push(Check::strict("r_gt_mu_over_i_mu_minus_1", rq::sub(r, &rq::div(mu, &den))));
    } else {
        checks.push(Check {
            name: "r_gt_mu_over_mu_minus_2",
            margin: BigRational::zero(),
            pass: false,
        });
        checks.push(Check {
            name: "r_gt_mu_over_i_mu_minus_1",
            margin: BigRational::zero(),
            pass: false,
        });
    }
    Cond1Report {
        mu: mu.clone(),
        r: r.clone(),
        weights: w.clone(),
        checks,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TcPrediction {
    #[serde(with = "serde_exact")]
    pub mu: BigRational,
    #[serde(rename = "R", with = "serde_exact")]
    pub r: BigRational,
    pub weights: Weights,
    #[serde(with = "serde_exact")]
    pub omega_hat: BigRational,
    #[serde(with = "serde_exact")]
    pub lambda_hat: BigRational,
    #[serde(with = "serde_exact")]
    pub omega: BigRational,
    /// λ is not fixed by the closed forms. This is the largest lower bound
    /// the general relations give from `omega`, `omega_hat`, `lambda_hat`:
    /// `max(λ̂, ω(ω̂/(2i) − 1)/(2(jω̂ + iω)))`.
    #[serde(with = "serde_exact")]
    pub lambda_lower: BigRational,
    /// Set when the parameters fail the admissibility conditions and the
    /// values were computed anyway.
    pub exploratory: bool,
}

impl TcPrediction {
    /// `(ω, ω̂, λ, λ̂)` with `λ` at its lower bound.
    pub fn quadruple(&self) -> ExponentQuadruple {
        ExponentQuadruple::finite(
            self.omega.clone(),
            self.omega_hat.clone(),
            self.lambda_lower.clone(),
            self.lambda_hat.clone(),
        )
    }

    pub fn jarnik_residual(&self) -> BigRational {
        match check_jarnik(&self.omega_hat.clone().into(), &self.lambda_hat.clone().into()) {
            Ok(ExtendedReal::Finite(r)) => r,
            _ => unreachable!("closed-form exponents are finite and positive"),
        }
    }
}

/// Closed-form exponents of the construction:
/// `ω̂ = min(2j(μ−1)/R, 2i(μ−1)R/μ)`,
/// `λ̂ = min((1/(2i))(1 − R/(μ−1)), (1/(2j))(1 − μ/((μ−1)R)))`,
/// `ω = 2i(μ−1)`.
pub fn tc_closed_forms(mu: &BigRational, r: &BigRational, w: &Weights, allow_outside: bool) -> Result<TcPrediction> {
    let rep = check_cond1(mu, r, w);
    let exploratory = !rep.passes();
    if exploratory && !allow_outside {
        return Err(Error::Cond1Violated(rep.failed().join(", ")));
    }
    if !r.is_positive() || !mu.is_positive() || mu == &BigRational::one() {
        return Err(Error::InvalidParameter("closed forms need R > 0 and mu > 0, mu != 1".into()));
    }
    let (i, j) = (w.i(), w.j());
    let one = BigRational::one();
    let two = rq::int(2);
    let m1 = rq::sub(mu, &one);
    let oh1 = rq::div(&rq::mul(&rq::mul(&two, j), &m1), r);
    let oh2 = rq::div(&rq::mul(&rq::mul(&rq::mul(&two, i), &m1), r), mu);
    let omega_hat = rq::reduce(rq::min(&oh1, &oh2));
    let inv2i = rq::div(&one, &rq::mul(&two, i));
    let inv2j = rq::div(&one, &rq::mul(&two, j));
    let lh1 = rq::mul(&inv2i, &rq::sub(&one, &rq::div(r, &m1)));
    let lh2 = rq::mul(&inv2j, &rq::sub(&one, &rq::div(mu, &rq::mul(&m1, r))));
    let lambda_hat = rq::reduce(rq::min(&lh1, &lh2));
    let omega = rq::reduce(&rq::mul(&rq::mul(&two, i), &m1));
    let bound = rq::div(
        &rq::mul(&omega, &rq::sub(&rq::mul(&omega_hat, &inv2i), &one)),
        &rq::mul(&two, &rq::add(&rq::mul(j, &omega_hat), &rq::mul(i, &omega))),
    );
    let lambda_lower = rq::reduce(rq::max(&lambda_hat, &bound));
    Ok(TcPrediction {
        mu: rq::reduce(mu),
        r: rq::reduce(r),
        weights: w.clone(),
        omega_hat,
        lambda_lower,
        lambda_hat,
        omega,
        exploratory,
    })
}

fn check_w_hat(w: &Weights, w_hat: &BigRational) -> Result<()> {
    let six_i = rq::mul(&rq::int(6), w.i());
    if rq::cmp(w_hat, &six_i) != Ordering::Greater {
        return Err(Error::InvalidParameter(format!(
            "w_hat = {} must exceed 6i = {}",
            rq::to_exact_string(w_hat),
            rq::to_exact_string(&rq::reduce(&six_i))
        )));
    }
    Ok(())
}

/// `μ = 2iR/(2iR − ŵ)` after checking `0 < R(2iR − ŵ) < 2j` exactly.
pub fn propar_mu(w: &Weights, w_hat: &BigRational, r: &BigRational) -> Result<BigRational> {
    check_w_hat(w, w_hat)?;
    let two = rq::int(2);
    let two_i_r = rq::mul(&rq::mul(&two, w.i()), r);
    let gap = rq::sub(&two_i_r, w_hat);
    let prod = rq::mul(r, &gap);
    let two_j = rq::mul(&two, w.j());
    if !prod.is_positive() || rq::cmp(&prod, &two_j) != Ordering::Less || !r.is_positive() {
        return Err(Error::ValidationFailed(format!(
            "R = {} gives R(2iR - w_hat) = {}, outside (0, 2j)",
            rq::to_exact_string(&rq::reduce(r)),
            rq::to_exact_string(&rq::reduce(&prod))
        )));
    }
    let mu = rq::reduce(&rq::div(&two_i_r, &gap));
    if !check_cond1(&mu, r, w).passes() {
        return Err(Error::ValidationFailed("solved parameters fail the admissibility conditions".into()));
    }
    Ok(mu)
}

/// `(R, μ)` with ω̂ equal to `w_hat`: `R` is the point at fraction `t` of
/// the open interval `(ŵ/(2i), (ŵ/(2i))(1 + √(1 + 16ij/ŵ²))/2)`, whose
/// right end is replaced by a rational lower bound.
pub fn propar_params(w: &Weights, w_hat: &BigRational, t: &BigRational) -> Result<(BigRational, BigRational)> {
    check_w_hat(w, w_hat)?;
    if !t.is_positive() || rq::cmp(t, &BigRational::one()) != Ordering::Less {
        return Err(Error::InvalidParameter("t must lie strictly between 0 and 1".into()));
    }
    let (lo, hi) = propar_r_interval(w, w_hat);
    if rq::cmp(&lo, &hi) != Ordering::Less {
        return Err(Error::IntervalEmpty("R interval collapsed".into()));
    }
    let r = rq::reduce(&rq::add(&lo, &rq::mul(t, &rq::sub(&hi, &lo))));
    let mu = propar_mu(w, w_hat, &r)?;
    Ok((r, mu))
}

/// The admissible `R` interval, right end rounded down to a rational.
pub fn propar_r_interval(w: &Weights, w_hat: &BigRational) -> (BigRational, BigRational) {
    let one = BigRational::one();
    let lo = rq::div(w_hat, &rq::mul(&rq::int(2), w.i()));
    let disc = rq::add(
        &one,
        &rq::div(&rq::mul(&rq::mul(&rq::int(16), w.i()), w.j()), &rq::mul(w_hat, w_hat)),
    );
    let s = rq::sqrt_lower(&rq::reduce(&disc), SQRT_BITS);
    let hi = rq::mul(&lo, &rq::div(&rq::add(&one, &s), &rq::int(2)));
    (rq::reduce(&lo), rq::reduce(&hi))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HalfOpenInterval {
    #[serde(with = "serde_exact")]
    pub lo: BigRational,
    #[serde(with = "serde_exact")]
    pub hi: BigRational,
}

impl HalfOpenInterval {
    pub fn is_empty(&self) -> bool {
        rq::cmp(&self.lo, &self.hi) != Ordering::Less
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        rq::cmp(&self.lo, x) != Ordering::Greater && rq::cmp(x, &self.hi) == Ordering::Less
    }
}

/// `[(1/(2i))(1 − 2j/ŵ), min(1/(2i), (1/(2j))(1 − 2i/ŵ)))`.
pub fn tf_interval(w: &Weights, w_hat: &BigRational) -> Result<HalfOpenInterval> {
    check_w_hat(w, w_hat)?;
    Ok(tf_interval_unchecked(w, w_hat))
}

fn tf_interval_unchecked(w: &Weights, w_hat: &BigRational) -> HalfOpenInterval {
    let one = BigRational::one();
    let two = rq::int(2);
    let inv2i = rq::div(&one, &rq::mul(&two, w.i()));
    let inv2j = rq::div(&one, &rq::mul(&two, w.j()));
    let lo = rq::mul(&inv2i, &rq::sub(&one, &rq::div(&rq::mul(&two, w.j()), w_hat)));
    let alt = rq::mul(&inv2j, &rq::sub(&one, &rq::div(&rq::mul(&two, w.i()), w_hat)));
    let hi = rq::min(&inv2i, &alt).clone();
    HalfOpenInterval {
        lo: rq::reduce(&lo),
        hi: rq::reduce(&hi),
    }
}

/// Same formula without the `ŵ > 6i` precondition (classical checks).
pub fn tf_interval_formula(w: &Weights, w_hat: &BigRational) -> HalfOpenInterval {
    tf_interval_unchecked(w, w_hat)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    #[serde(with = "serde_exact")]
    pub t: BigRational,
    pub prediction: TcPrediction,
    #[serde(with = "serde_exact")]
    pub jarnik_residual: BigRational,
}

/// Closed forms along `propar_params(w, ŵ, t)` for each `t`, in grid order.
pub fn sweep(w: &Weights, w_hat: &BigRational, ts: &[BigRational]) -> Result<Vec<SweepRow>> {
    ts.par_iter()
        .map(|t| {
            let (r, mu) = propar_params(w, w_hat, t)?;
            let prediction = tc_closed_forms(&mu, &r, w, false)?;
            let jarnik_residual = prediction.jarnik_residual();
            Ok(SweepRow {
                t: t.clone(),
                prediction,
                jarnik_residual,
            })
        })
        .collect()
}

fn signed(x: &BigInt, s: i8) -> BigInt {
    if s < 0 {
        -x
    } else {
        x.clone()
    }
}

/// `(A′_n, ε_n·A_n, 0)`, canonical.
pub fn predicted_a_point(pair: &SequencePair, n: usize) -> LatticePoint {
    let a = BigInt::from(pair.a_n(n).clone());
    LatticePoint::new(pair.a_prime_n(n).clone(), signed(&a, pair.sign_a(n)), 0).canonical()
}

/// `(B′_n, 0, ε′_n·B_n)`, canonical.
pub fn predicted_b_point(pair: &SequencePair, n: usize) -> LatticePoint {
    let b = BigInt::from(pair.b_n(n).clone());
    LatticePoint::new(pair.b_prime_n(n).clone(), 0, signed(&b, pair.sign_b(n))).canonical()
}

fn check_range(pair: &SequencePair, lo: usize, hi: usize) -> Result<()> {
    if lo == 0 || lo > hi || hi > pair.len() {
        return Err(Error::InvalidParameter(format!(
            "index range {lo}..={hi} outside the pair (1..={})",
            pair.len()
        )));
    }
    Ok(())
}

/// Alternating A- and B-points for `n = lo..=hi`, with `N_ω` required to
/// increase strictly along the list.
pub fn predicted_omega_chain(pair: &SequencePair, lo: usize, hi: usize, w: &Weights) -> Result<Vec<LatticePoint>> {
    check_range(pair, lo, hi)?;
    let mut pts = Vec::with_capacity(2 * (hi - lo + 1));
    for n in lo..=hi {
        pts.push(predicted_a_point(pair, n));
        pts.push(predicted_b_point(pair, n));
    }
    if let Some(k) = first_non_increasing(&pts, w) {
        return Err(Error::InterleavingFailed { n: lo + k / 2 });
    }
    Ok(pts)
}

fn first_non_increasing(pts: &[LatticePoint], w: &Weights) -> Option<usize> {
    let keys: Vec<BigUint> = pts.iter().map(|p| n_key(Kind::Omega, p, w)).collect();
    keys.windows(2).position(|k| k[0] >= k[1])
}

/// Smallest `n₀` such that the predicted points for `n ≥ n₀` interleave
/// with strictly increasing `N_ω`; `None` if even the last pair fails.
pub fn interleaving_threshold(pair: &SequencePair, w: &Weights) -> Option<usize> {
    let len = pair.len();
    let mut pts = Vec::new();
    for n in 1..=len {
        pts.push(predicted_a_point(pair, n));
        pts.push(predicted_b_point(pair, n));
    }
    let keys: Vec<BigUint> = pts.iter().map(|p| n_key(Kind::Omega, p, w)).collect();
    let mut n0 = len + 1;
    for n in (1..=len).rev() {
        let k = 2 * (n - 1);
        let ok = keys[k] < keys[k + 1] && (k + 2 >= keys.len() || keys[k + 1] < keys[k + 2]);
        if !ok {
            break;
        }
        n0 = n;
    }
    (n0 <= len).then_some(n0)
}

/// `C_n = (A_nB_n, ε_nA′_nB_n, ε′_nA_nB′_n)` and
/// `D_n = (A_{n+1}B_n, ε_{n+1}A′_{n+1}B_n, ε′_nA_{n+1}B′_n)`.
pub fn predicted_lambda_anchors(pair: &SequencePair, n: usize) -> Result<(LatticePoint, LatticePoint)> {
    check_range(pair, n, n + 1)?;
    let an = BigInt::from(pair.a_n(n).clone());
    let an1 = BigInt::from(pair.a_n(n + 1).clone());
    let bn = BigInt::from(pair.b_n(n).clone());
    let ap = signed(pair.a_prime_n(n), pair.sign_a(n));
    let ap1 = signed(pair.a_prime_n(n + 1), pair.sign_a(n + 1));
    let bp = signed(pair.b_prime_n(n), pair.sign_b(n));
    let c = LatticePoint::new(&an * &bn, &ap * &bn, &an * &bp);
    let d = LatticePoint::new(&an1 * &bn, &ap1 * &bn, &an1 * &bp);
    Ok((c, d))
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundRow {
    pub k: usize,
    pub m: u64,
    pub next_m: u64,
    /// `d_k·2N_{k+1}/modulus` (≥ 1 passes).
    pub lower_ratio: f64,
    /// `d_k·N_{k+1}/modulus` (≤ 1 passes).
    pub upper_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaBReport {
    pub side: Side,
    pub modulus: String,
    pub rows: Vec<BoundRow>,
    /// No consecutive pair of records was available.
    pub vacuous: bool,
}

/// Checks `modulus/(2N_{k+1}) ≤ d_k ≤ modulus/N_{k+1}` for consecutive
/// records, `d_k` the tracked distance and `N = |x₀|`.
pub fn lemma_b_bounds_check(records: &[SublatticeRecord], modulus: &BigUint, side: Side) -> Result<LemmaBReport> {
    let mut rows = Vec::new();
    let modq = rq::int(BigInt::from(modulus.clone()));
    for (k, pair) in records.windows(2).enumerate() {
        let (r, next) = (&pair[0], &pair[1]);
        let n_next = rq::int(next.point.x0.abs());
        let upper = CertifiedValue::exact(rq::div(&modq, &n_next));
        let lower = CertifiedValue::exact(rq::div(&modq, &rq::mul_int(&n_next, &BigInt::from(2))));
        let up = compare_certified(&r.dist, &upper);
        let lo = compare_certified(&r.dist, &lower);
        if up == Verdict::Indeterminate || lo == Verdict::Indeterminate {
            return Err(Error::Indeterminate(format!("bound check at record {k} (m = {})", r.m)));
        }
        if up == Verdict::Greater {
            return Err(Error::BoundViolated {
                k,
                detail: format!("distance at m = {} exceeds modulus/N at m = {}", r.m, next.m),
            });
        }
        if lo == Verdict::Less {
            return Err(Error::BoundViolated {
                k,
                detail: format!("distance at m = {} is below modulus/(2N) at m = {}", r.m, next.m),
            });
        }
        let scale = rq::div(&n_next, &modq);
        let ratio = r.dist.mul(&CertifiedValue::exact(scale)).midpoint_f64();
        rows.push(BoundRow {
            k,
            m: r.m,
            next_m: next.m,
            lower_ratio: 2.0 * ratio,
            upper_ratio: ratio,
        });
    }
    Ok(LemmaBReport {
        side,
        modulus: modulus.to_string(),
        vacuous: rows.is_empty(),
        rows,
    })
}

/// `N_λ(E)/(A_{n+1}/A_n)` for the first record after the anchor at
/// `m = A_n` on the `B_n`-divisible side; comparable within a factor 2.
pub fn first_post_anchor_ratio(records: &[SublatticeRecord], pair: &SequencePair, n: usize) -> Option<f64> {
    let an = pair.a_n(n);
    let pos = records.iter().position(|r| BigUint::from(r.m) == *an)?;
    let e = records.get(pos + 1)?;
    let q = rq::div(
        &rq::int(e.point.x0.abs()),
        &rq::rat(BigInt::from(pair.a_n(n + 1).clone()), BigInt::from(an.clone())),
    );
    Some(rq::to_f64(&q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::murseq::{build_mu_r_sequences, BuildOptions, MuRParams, PrimeSet};
    use crate::rational::parse_rational;

    fn q(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    fn tw() -> Weights {
        Weights::from_i(q("7/10")).unwrap()
    }

    #[test]
    fn cond1_examples() {
        assert!(check_cond1(&q("7"), &q("2.4"), &Weights::classical()).passes());
        assert!(!check_cond1(&q("2"), &q("3"), &tw()).passes());
        let rep = check_cond1(&q("126"), &q("3.6"), &tw());
        assert!(rep.passes());
        assert_eq!(rep.checks[1].margin, q("33.6"));
        assert_eq!(rep.checks[3].margin, q("3.6") - q("1.44"));
    }

    #[test]
    fn closed_forms() {
        let p = tc_closed_forms(&q("7"), &q("12/5"), &Weights::classical(), false).unwrap();
        assert_eq!(p.omega_hat, q("72/35"));
        assert_eq!(p.lambda_hat, q("37/72"));
        assert_eq!(p.omega, q("6"));
        assert!(p.jarnik_residual().is_zero());
        let p = tc_closed_forms(&q("126"), &q("3.6"), &tw(), false).unwrap();
        assert_eq!(p.omega_hat, q("5"));
        assert_eq!(p.omega, q("175"));
        assert!((rq::to_f64(&p.lambda_hat) - 0.693714285714).abs() < 1e-11);
        assert!(matches!(
            tc_closed_forms(&q("2"), &q("3"), &tw(), false),
            Err(Error::Cond1Violated(_))
        ));
        assert!(tc_closed_forms(&q("3"), &q("3"), &tw(), true).unwrap().exploratory);
    }

    #[test]
    fn propar_examples() {
        assert_eq!(propar_mu(&tw(), &q("5"), &q("3.6")).unwrap(), q("126"));
        assert_eq!(propar_mu(&tw(), &q("5"), &q("3.58")).unwrap(), q("1253/3"));
        assert!(matches!(
            propar_params(&tw(), &q("4.2"), &q("1/2")),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            propar_mu(&tw(), &q("5"), &q("3.5")),
            Err(Error::ValidationFailed(_))
        ));
        let (r, mu) = propar_params(&tw(), &q("5"), &q("1/2")).unwrap();
        let p = tc_closed_forms(&mu, &r, &tw(), false).unwrap();
        assert_eq!(p.omega_hat, q("5"));
    }

    #[test]
    fn interval_examples() {
        let iv = tf_interval(&tw(), &q("5")).unwrap();
        assert_eq!(iv.lo, q("22/35"));
        assert_eq!(iv.hi, q("5/7"));
        let c = tf_interval_formula(&Weights::classical(), &q("4"));
        assert_eq!(c.lo, q("3/4"));
        assert!(c.is_empty());
    }

    #[test]
    fn predicted_points() {
        let p = MuRParams::new(
            PrimeSet::new(vec![2]).unwrap(),
            PrimeSet::new(vec![3]).unwrap(),
            q("7"),
            q("12/5"),
            q("1"),
        )
        .unwrap();
        let pair = build_mu_r_sequences(&p, 3, None, None, BuildOptions::default()).unwrap();
        let w = Weights::classical();
        let pts = predicted_omega_chain(&pair, 1, 1, &w).unwrap();
        assert_eq!(pts, vec![LatticePoint::new(1, 128, 0), LatticePoint::new(1, 0, 59049)]);
        assert_eq!(interleaving_threshold(&pair, &w), Some(1));
        let (c, d) = predicted_lambda_anchors(&pair, 1).unwrap();
        assert_eq!(c, LatticePoint::new(7558272, 59049, 128));
        let two49 = BigInt::one() << 49usize;
        assert_eq!(
            d,
            LatticePoint::new(&two49 * 59049, ((BigInt::one() << 42usize) + 1) * 59049, two49.clone())
        );
        assert!(c.is_primitive() && d.is_primitive());
    }
}
