//! Prime-power (μ,R)-sequences.
//!
//! `A_n = (∏S)^⌊aμⁿ⌋` and `B_n = (∏T)^⌊⌊aμⁿ⌋·R·log∏S/log∏T⌋`. The first
//! floor is exact rational arithmetic; the second goes through certified
//! logarithms at increasing precision until the enclosure of the argument
//! contains no integer.
//!
//! Integer sizes grow like `exp(μⁿ)`: for `S={2}, μ=7` the sixth term has
//! 117 649 bits (about 14.7 kB) and the seventh 823 543 bits (about 100 kB).

use crate::certified::ln_uint;
use crate::error::{Column, Error, Result};
use crate::rational::{self as rq, serde_rational};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

pub const PAIR_SCHEMA: &str = "murseq/1";

/// Default cap on the bit length of any constructed integer.
pub const DEFAULT_MAX_BITS: u64 = 1 << 25;
/// Default cap on the working precision of certified logarithms.
pub const DEFAULT_MAX_PRECISION: u32 = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct PrimeSet {
    primes: Vec<u64>,
}

impl PrimeSet {
    pub fn new(mut primes: Vec<u64>) -> Result<PrimeSet> {
        if primes.is_empty() {
            return Err(Error::InvalidParameter("empty prime set".into()));
        }
        for &p in &primes {
            if !is_prime(p) {
                return Err(Error::NotPrime(p));
            }
        }
        primes.sort_unstable();
        if primes.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter(format!(
                "duplicate prime in {primes:?}"
            )));
        }
        Ok(PrimeSet { primes })
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn product(&self) -> BigUint {
        self.primes.iter().map(|&p| BigUint::from(p)).product()
    }

    pub fn is_disjoint(&self, other: &PrimeSet) -> Result<()> {
        match self.primes.iter().find(|p| other.primes.contains(p)) {
            Some(&p) => Err(Error::NonDisjointPrimeSets(p)),
            None => Ok(()),
        }
    }
}

impl TryFrom<Vec<u64>> for PrimeSet {
    type Error = Error;
    fn try_from(v: Vec<u64>) -> Result<PrimeSet> {
        PrimeSet::new(v)
    }
}

impl From<PrimeSet> for Vec<u64> {
    fn from(s: PrimeSet) -> Vec<u64> {
        s.primes
    }
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mulmod(r, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        r
    };
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuRParams {
    #[serde(with = "serde_rational")]
    pub mu: BigRational,
    #[serde(rename = "R", with = "serde_rational")]
    pub r: BigRational,
    #[serde(with = "serde_rational")]
    pub a: BigRational,
    #[serde(rename = "S")]
    pub s: PrimeSet,
    #[serde(rename = "T")]
    pub t: PrimeSet,
}

impl MuRParams {
    pub fn new(
        s: PrimeSet,
        t: PrimeSet,
        mu: BigRational,
        r: BigRational,
        a: BigRational,
    ) -> Result<MuRParams> {
        let p = MuRParams { mu, r, a, s, t };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.s.is_disjoint(&self.t)?;
        if self.mu <= BigRational::one() {
            return Err(Error::InvalidParameter("mu must exceed 1".into()));
        }
        if self.r <= BigRational::one() {
            return Err(Error::InvalidParameter("R must exceed 1".into()));
        }
        if !self.a.is_positive() {
            return Err(Error::InvalidParameter("a must be positive".into()));
        }
        Ok(())
    }
}

/// Options bounding the cost of a construction.
#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    pub max_bits: u64,
    pub max_precision: u32,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            max_bits: DEFAULT_MAX_BITS,
            max_precision: DEFAULT_MAX_PRECISION,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequencePair {
    pub params: MuRParams,
    /// Exponents of `∏S` in `A_n`.
    pub exps_a: Vec<u64>,
    /// Exponents of `∏T` in `B_n`.
    pub exps_b: Vec<u64>,
    pub a: Vec<BigUint>,
    pub b: Vec<BigUint>,
    pub a_prime: Vec<BigInt>,
    pub b_prime: Vec<BigInt>,
    pub signs_a: Vec<i8>,
    pub signs_b: Vec<i8>,
}

impl SequencePair {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// `A_n` for 1-based `n`.
    pub fn a_n(&self, n: usize) -> &BigUint {
        &self.a[n - 1]
    }

    pub fn b_n(&self, n: usize) -> &BigUint {
        &self.b[n - 1]
    }

    pub fn a_prime_n(&self, n: usize) -> &BigInt {
        &self.a_prime[n - 1]
    }

    pub fn b_prime_n(&self, n: usize) -> &BigInt {
        &self.b_prime[n - 1]
    }

    pub fn sign_a(&self, n: usize) -> i8 {
        self.signs_a[n - 1]
    }

    pub fn sign_b(&self, n: usize) -> i8 {
        self.signs_b[n - 1]
    }

    pub fn to_json(&self) -> serde_json::Value {
        let strs = |v: &[BigUint]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        let istrs = |v: &[BigInt]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        serde_json::json!({
            "schema": PAIR_SCHEMA,
            "params": self.params,
            "n_max": self.len(),
            "exps_A": self.exps_a,
            "exps_B": self.exps_b,
            "signsA": self.signs_a,
            "signsB": self.signs_b,
            "A": strs(&self.a),
            "B": strs(&self.b),
            "Aprime": istrs(&self.a_prime),
            "Bprime": istrs(&self.b_prime),
        })
    }

    /// Reads a `murseq/1` document. The integers are re-derived from the
    /// recorded exponents and checked against the stored strings.
    pub fn from_json(v: &serde_json::Value) -> Result<SequencePair> {
        #[derive(Deserialize)]
        struct Doc {
            schema: String,
            params: MuRParams,
            #[serde(rename = "exps_A")]
            exps_a: Vec<u64>,
            #[serde(rename = "exps_B")]
            exps_b: Vec<u64>,
            #[serde(rename = "signsA")]
            signs_a: Vec<i8>,
            #[serde(rename = "signsB")]
            signs_b: Vec<i8>,
            #[serde(rename = "A")]
            a: Vec<String>,
            #[serde(rename = "B")]
            b: Vec<String>,
        }
        let doc: Doc = serde_json::from_value(v.clone())?;
        if doc.schema != PAIR_SCHEMA {
            return Err(Error::Parse(format!("expected schema {PAIR_SCHEMA}, got {}", doc.schema)));
        }
        doc.params.validate()?;
        let pair = pair_from_exponents(
            doc.params,
            doc.exps_a,
            doc.exps_b,
            &doc.signs_a,
            &doc.signs_b,
            BuildOptions::default().max_bits,
        )?;
        let matches = |stored: &[String], built: &[BigUint]| {
            stored.len() == built.len()
                && stored.iter().zip(built).all(|(s, x)| s.parse::<BigUint>().ok().as_ref() == Some(x))
        };
        if !matches(&doc.a, &pair.a) || !matches(&doc.b, &pair.b) {
            return Err(Error::Parse("stored integers disagree with exponents".into()));
        }
        Ok(pair)
    }
}

/// Exponents `⌊aμⁿ⌋` and the certified `B` exponents for `n = 1..n_max`.
pub fn sequence_exponents(
    params: &MuRParams,
    n_max: usize,
    max_precision: u32,
) -> Result<(Vec<u64>, Vec<u64>)> {
    params.validate()?;
    let p = params.s.product();
    let q = params.t.product();
    let mut ea = Vec::with_capacity(n_max);
    let mut eb = Vec::with_capacity(n_max);
    let mut mu_n = BigRational::one();
    for n in 1..=n_max {
        mu_n = rq::mul(&mu_n, &params.mu);
        let x = rq::floor(&rq::mul(&params.a, &mu_n));
        let e = x.to_u64().ok_or(Error::SizeLimit {
            bits: x.bits(),
            limit: 64,
        })?;
        ea.push(e);
        eb.push(certified_b_exponent(e, &params.r, &p, &q, max_precision).ok_or(
            Error::FloorAmbiguous {
                column: Column::B,
                n,
            },
        )?);
    }
    Ok((ea, eb))
}

/// `⌊e·R·ln p/ln q⌋`, or `None` when the enclosure still straddles an
/// integer at the precision cap.
fn certified_b_exponent(e: u64, r: &BigRational, p: &BigUint, q: &BigUint, max_prec: u32) -> Option<u64> {
    if e == 0 {
        return Some(0);
    }
    let factor = rq::mul_int(r, &BigInt::from(e));
    let mut prec = 64u32;
    loop {
        let lp = ln_uint(p, prec);
        let lq = ln_uint(q, prec);
        let lo = rq::div(&rq::mul(&factor, lp.lo()), lq.hi());
        let hi = rq::div(&rq::mul(&factor, lp.hi()), lq.lo());
        let (fl, fh) = (rq::floor(&lo), rq::floor(&hi));
        if fl == fh {
            return fl.to_u64();
        }
        if prec >= max_prec {
            return None;
        }
        prec = (prec * 2).min(max_prec);
    }
}

/// Checks that exponents start positive and strictly increase.
fn check_exponents(exps: &[u64], column: Column) -> Result<()> {
    let mut prev = 0u64;
    for (k, &e) in exps.iter().enumerate() {
        if e <= prev {
            return Err(Error::ValuationNotIncreasing { column, n: k + 1 });
        }
        prev = e;
    }
    Ok(())
}

pub fn build_mu_r_sequences(
    params: &MuRParams,
    n_max: usize,
    signs_a: Option<&[i8]>,
    signs_b: Option<&[i8]>,
    opts: BuildOptions,
) -> Result<SequencePair> {
    if n_max == 0 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    let (ea, eb) = sequence_exponents(params, n_max, opts.max_precision)?;
    let ones = vec![1i8; n_max];
    let sa = signs_a.unwrap_or(&ones);
    let sb = signs_b.unwrap_or(&ones);
    pair_from_exponents(params.clone(), ea, eb, sa, sb, opts.max_bits)
}

fn pair_from_exponents(
    params: MuRParams,
    ea: Vec<u64>,
    eb: Vec<u64>,
    signs_a: &[i8],
    signs_b: &[i8],
    max_bits: u64,
) -> Result<SequencePair> {
    let n_max = ea.len();
    if eb.len() != n_max || signs_a.len() != n_max || signs_b.len() != n_max {
        return Err(Error::InvalidParameter(format!(
            "sign and exponent lists must have length {n_max}"
        )));
    }
    check_signs(signs_a)?;
    check_signs(signs_b)?;
    check_exponents(&ea, Column::A)?;
    check_exponents(&eb, Column::B)?;
    let p = params.s.product();
    let q = params.t.product();
    let a = prime_powers(&p, &ea, max_bits)?;
    let b = prime_powers(&q, &eb, max_bits)?;
    let a_prime = derived_terms(&a, signs_a)?;
    let b_prime = derived_terms(&b, signs_b)?;
    let pair = SequencePair {
        params,
        exps_a: ea,
        exps_b: eb,
        a,
        b,
        a_prime,
        b_prime,
        signs_a: signs_a.to_vec(),
        signs_b: signs_b.to_vec(),
    };
    let report = coprimality(&pair);
    if let Some(n) = report.first() {
        return Err(Error::ValidationFailed(format!("gcd condition fails at n={n}")));
    }
    Ok(pair)
}

fn check_signs(signs: &[i8]) -> Result<()> {
    if signs.iter().all(|&s| s == 1 || s == -1) {
        Ok(())
    } else {
        Err(Error::InvalidParameter("signs must be +1 or -1".into()))
    }
}

fn prime_powers(base: &BigUint, exps: &[u64], max_bits: u64) -> Result<Vec<BigUint>> {
    let bits_per = base.bits();
    let mut out = Vec::with_capacity(exps.len());
    let mut prev_e = 0u64;
    let mut prev = BigUint::one();
    for &e in exps {
        let bits = e.saturating_mul(bits_per);
        if bits > max_bits {
            return Err(Error::SizeLimit {
                bits,
                limit: max_bits,
            });
        }
        // reuse the previous power
        let step = num_traits::pow(base.clone(), (e - prev_e) as usize);
        let x = &prev * step;
        prev = x.clone();
        prev_e = e;
        out.push(x);
    }
    Ok(out)
}

/// `X′_n = Σ_{k≤n} ε_n ε_k X_n/X_k`, evaluated by Horner's rule along the
/// divisibility chain.
pub fn derived_terms(xs: &[BigUint], signs: &[i8]) -> Result<Vec<BigInt>> {
    if xs.len() != signs.len() {
        return Err(Error::InvalidParameter("sign list length mismatch".into()));
    }
    check_signs(signs)?;
    let mut out = Vec::with_capacity(xs.len());
    // s_n = Σ_{k≤n} ε_k X_n/X_k
    let mut s = BigInt::zero();
    for n in 0..xs.len() {
        if xs[n].is_zero() {
            return Err(Error::InvalidParameter("terms must be positive".into()));
        }
        if n > 0 {
            let (quo, rem) = xs[n].div_rem(&xs[n - 1]);
            if !rem.is_zero() {
                return Err(Error::DivisibilityViolation { k: n, n: n + 1 });
            }
            s *= BigInt::from(quo);
        }
        s += BigInt::from(signs[n]);
        out.push(if signs[n] > 0 { s.clone() } else { -s.clone() });
    }
    Ok(out)
}

/// Indices `n` (1-based) where one of the gcd conditions fails.
fn coprimality(pair: &SequencePair) -> Vec<usize> {
    let s = pair.params.s.primes();
    let t = pair.params.t.primes();
    let coprime_to = |primes: &[u64], x: &BigInt| {
        primes
            .iter()
            .all(|&p| !(x.magnitude() % BigUint::from(p)).is_zero())
    };
    (1..=pair.len())
        .filter(|&n| {
            let ab = s.iter().all(|&p| !(pair.b_n(n) % BigUint::from(p)).is_zero());
            !(ab && coprime_to(s, pair.a_prime_n(n)) && coprime_to(t, pair.b_prime_n(n)))
        })
        .collect()
}

/// ±1 pattern derived from a seed; the same seed always gives the same
/// pattern.
pub fn signs_from_seed(seed: u64, n: usize) -> (Vec<i8>, Vec<i8>) {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect::<Vec<i8>>();
    let a = draw();
    let b = draw();
    (a, b)
}

/// `ε_n = (-1)^n`.
pub fn alternating_signs(n: usize) -> Vec<i8> {
    (1..=n).map(|k| if k % 2 == 0 { 1 } else { -1 }).collect()
}

/// Smallest `a` on the grid `{step, 2·step, …}` for which the construction
/// succeeds with `n_max` terms.
pub fn min_valid_a(
    s: &PrimeSet,
    t: &PrimeSet,
    mu: &BigRational,
    r: &BigRational,
    n_max: usize,
    step: &BigRational,
    max_steps: u64,
) -> Result<BigRational> {
    if !step.is_positive() {
        return Err(Error::InvalidParameter("grid step must be positive".into()));
    }
    s.is_disjoint(t)?;
    for k in 1..=max_steps {
        let a = step * BigRational::from_integer(k.into());
        let params = MuRParams::new(s.clone(), t.clone(), mu.clone(), r.clone(), a.clone())?;
        let (ea, eb) = match sequence_exponents(&params, n_max, DEFAULT_MAX_PRECISION) {
            Ok(v) => v,
            Err(Error::FloorAmbiguous { .. }) => continue,
            Err(e) => return Err(e),
        };
        if check_exponents(&ea, Column::A).is_ok() && check_exponents(&eb, Column::B).is_ok() {
            return Ok(a);
        }
    }
    Err(Error::GridExhausted { steps: max_steps })
}

/// p-adic valuation by repeated squaring of the divisor.
pub fn valuation(x: &BigUint, p: u64) -> u64 {
    if x.is_zero() {
        return u64::MAX;
    }
    if p == 2 {
        return x.trailing_zeros().unwrap_or(0);
    }
    let mut powers = vec![BigUint::from(p)];
    let mut rest = x.clone();
    let mut v = 0u64;
    // grow p^(2^k) while it divides
    loop {
        let last = powers.last().unwrap();
        let (q, r) = rest.div_rem(last);
        if !r.is_zero() {
            break;
        }
        rest = q;
        v += 1 << (powers.len() - 1);
        let sq = last * last;
        if sq.bits() > rest.bits() + 1 {
            break;
        }
        powers.push(sq);
    }
    for (k, pk) in powers.iter().enumerate().rev() {
        loop {
            let (q, r) = rest.div_rem(pk);
            if !r.is_zero() {
                break;
            }
            rest = q;
            v += 1 << k;
        }
    }
    v
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioRow {
    pub n: usize,
    /// `log A_{n+1} / log A_n`; absent for the last term.
    pub log_a_ratio: Option<f64>,
    pub log_b_ratio: Option<f64>,
    /// `log B_n / log A_n`.
    pub cross_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    /// Terms whose prime support is not contained in S (or T).
    pub support_failures: Vec<(Column, usize)>,
    /// First index where a valuation fails to increase.
    pub valuation_failure: Option<(Column, usize)>,
    pub gcd_failures: Vec<usize>,
    pub ratios: Vec<RatioRow>,
    /// Whether the last ratios are within tolerance of μ, μ and R; `None`
    /// with fewer than three terms.
    pub mu_a_ok: Option<bool>,
    pub mu_b_ok: Option<bool>,
    pub r_ok: Option<bool>,
}

impl ValidationReport {
    pub fn structure_ok(&self) -> bool {
        self.support_failures.is_empty()
            && self.valuation_failure.is_none()
            && self.gcd_failures.is_empty()
    }
}

/// Checks support, valuation growth and gcd conditions exactly and
/// reports the finite log ratios.
pub fn validate_mu_r_properties(pair: &SequencePair, tol: f64) -> ValidationReport {
    let mut support_failures = Vec::new();
    let mut valuation_failure = None;
    let columns: [(Column, &Vec<BigUint>, &PrimeSet); 2] = [
        (Column::A, &pair.a, &pair.params.s),
        (Column::B, &pair.b, &pair.params.t),
    ];
    for (col, xs, primes) in columns {
        let mut prev: Option<Vec<u64>> = None;
        for (k, x) in xs.iter().enumerate() {
            let vals: Vec<u64> = primes.primes().iter().map(|&p| valuation(x, p)).collect();
            let rebuilt: BigUint = primes
                .primes()
                .iter()
                .zip(&vals)
                .map(|(&p, &v)| num_traits::pow(BigUint::from(p), v as usize))
                .product();
            if &rebuilt != x {
                support_failures.push((col, k + 1));
            }
            if let Some(pv) = &prev {
                if valuation_failure.is_none() && vals.iter().zip(pv).any(|(v, w)| v <= w) {
                    valuation_failure = Some((col, k));
                }
            }
            prev = Some(vals);
        }
    }
    let gcd_failures = if support_failures.is_empty() {
        coprimality(pair)
    } else {
        (1..=pair.len())
            .filter(|&n| {
                let a = BigInt::from(pair.a_n(n).clone());
                let b = BigInt::from(pair.b_n(n).clone());
                !(a.gcd(&b).is_one()
                    && a.gcd(pair.a_prime_n(n)).is_one()
                    && b.gcd(pair.b_prime_n(n)).is_one())
            })
            .collect()
    };
    let ln = |x: &BigUint| {
        let (lo, hi) = crate::certified::ln_uint_f64(x);
        lo + (hi - lo) / 2.0
    };
    let la: Vec<f64> = pair.a.iter().map(ln).collect();
    let lb: Vec<f64> = pair.b.iter().map(ln).collect();
    let n = pair.len();
    let ratios: Vec<RatioRow> = (0..n)
        .map(|k| RatioRow {
            n: k + 1,
            log_a_ratio: (k + 1 < n).then(|| la[k + 1] / la[k]),
            log_b_ratio: (k + 1 < n).then(|| lb[k + 1] / lb[k]),
            cross_ratio: lb[k] / la[k],
        })
        .collect();
    let mu = rq::to_f64(&pair.params.mu);
    let r = rq::to_f64(&pair.params.r);
    let (mu_a_ok, mu_b_ok, r_ok) = if n >= 3 {
        let last = &ratios[n - 2];
        (
            Some((last.log_a_ratio.unwrap() - mu).abs() <= tol),
            Some((last.log_b_ratio.unwrap() - mu).abs() <= tol),
            Some((ratios[n - 1].cross_ratio - r).abs() <= tol),
        )
    } else {
        (None, None, None)
    };
    ValidationReport {
        support_failures,
        valuation_failure,
        gcd_failures,
        ratios,
        mu_a_ok,
        mu_b_ok,
        r_ok,
    }
}

/// Builds a pair directly from given integer lists, for checking
/// hand-made sequences. Derived terms use all-plus signs.
pub fn pair_from_terms(params: MuRParams, a: Vec<BigUint>, b: Vec<BigUint>) -> Result<SequencePair> {
    let n = a.len();
    let ones = vec![1i8; n];
    let a_prime = derived_terms(&a, &ones).unwrap_or_else(|_| vec![BigInt::one(); n]);
    let b_prime = derived_terms(&b, &ones).unwrap_or_else(|_| vec![BigInt::one(); n]);
    let exps_a = a.iter().map(|x| valuation(x, params.s.primes()[0])).collect();
    let exps_b = b.iter().map(|x| valuation(x, params.t.primes()[0])).collect();
    Ok(SequencePair {
        params,
        exps_a,
        exps_b,
        a,
        b,
        a_prime,
        b_prime,
        signs_a: ones.clone(),
        signs_b: ones,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::parse_rational;

    pub(crate) fn q(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    fn params(s: &[u64], t: &[u64], mu: &str, r: &str, a: &str) -> MuRParams {
        MuRParams::new(
            PrimeSet::new(s.to_vec()).unwrap(),
            PrimeSet::new(t.to_vec()).unwrap(),
            q(mu),
            q(r),
            q(a),
        )
        .unwrap()
    }

    #[test]
    fn primality() {
        let primes: Vec<u64> = (0..60).filter(|&n| is_prime(n)).collect();
        assert_eq!(primes, [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]);
        assert!(is_prime(18_446_744_073_709_551_557));
        assert!(!is_prime(3_215_031_751));
        assert!(matches!(PrimeSet::new(vec![4]), Err(Error::NotPrime(4))));
    }

    #[test]
    fn exponents_for_mu7() {
        let p = params(&[2], &[3], "7", "12/5", "1");
        let (ea, eb) = sequence_exponents(&p, 7, 4096).unwrap();
        assert_eq!(ea, [7, 49, 343, 2401, 16807, 117649, 823543]);
        assert_eq!(eb, [10, 74, 519, 3635, 25449, 178147, 1247034]);
    }

    #[test]
    fn exponents_other_families() {
        let p = params(&[2], &[3], "126", "18/5", "1");
        let (ea, eb) = sequence_exponents(&p, 3, 4096).unwrap();
        assert_eq!(ea, [126, 15876, 2000376]);
        assert_eq!(eb, [286, 36059, 4543548]);
        let p = params(&[2, 5], &[3, 7], "7", "12/5", "1");
        let (_, eb) = sequence_exponents(&p, 4, 4096).unwrap();
        assert_eq!(eb, [12, 88, 622, 4358]);
    }

    #[test]
    fn builds_small_pair() {
        let p = params(&[2], &[3], "7", "2.4", "1");
        let pair = build_mu_r_sequences(&p, 2, None, None, BuildOptions::default()).unwrap();
        assert_eq!(pair.a[0], BigUint::from(128u32));
        assert_eq!(pair.a[1], BigUint::one() << 49usize);
        assert_eq!(pair.b[0], BigUint::from(59049u32));
        assert_eq!(pair.b[1], num_traits::pow(BigUint::from(3u32), 74));
        assert_eq!(pair.a_prime[1], BigInt::from(4398046511105u64));
    }

    #[test]
    fn rejects_shared_primes() {
        let r = MuRParams::new(
            PrimeSet::new(vec![2]).unwrap(),
            PrimeSet::new(vec![2]).unwrap(),
            q("7"),
            q("2.4"),
            q("1"),
        );
        assert!(matches!(r, Err(Error::NonDisjointPrimeSets(2))));
    }

    #[test]
    fn derived_terms_signs() {
        let a = vec![BigUint::from(128u32), BigUint::one() << 49usize];
        assert_eq!(derived_terms(&a[..1], &[1]).unwrap(), [BigInt::one()]);
        let plus = derived_terms(&a, &[1, 1]).unwrap();
        assert_eq!(plus[1], (BigInt::one() << 42usize) + 1);
        let mixed = derived_terms(&a, &[-1, 1]).unwrap();
        assert_eq!(mixed[1], -(BigInt::one() << 42usize) + 1);
        let bad = derived_terms(&[BigUint::from(3u32), BigUint::from(4u32)], &[1, 1]);
        assert!(matches!(bad, Err(Error::DivisibilityViolation { k: 1, n: 2 })));
    }

    #[test]
    fn min_valid_a_examples() {
        let s = PrimeSet::new(vec![2]).unwrap();
        let t = PrimeSet::new(vec![3]).unwrap();
        let one = q("1");
        assert_eq!(min_valid_a(&s, &t, &q("7"), &q("2.4"), 3, &one, 10).unwrap(), one);
        assert_eq!(min_valid_a(&s, &t, &q("1.5"), &q("1.2"), 2, &one, 10).unwrap(), q("2"));
        // the B exponent at a = 1 is 0, which is not a valid first valuation
        assert_eq!(min_valid_a(&s, &t, &q("1.5"), &q("1.2"), 1, &one, 10).unwrap(), q("2"));
        assert!(matches!(
            min_valid_a(&s, &t, &q("1.5"), &q("1.2"), 2, &q("1/100"), 5),
            Err(Error::GridExhausted { steps: 5 })
        ));
    }

    #[test]
    fn validation_reports() {
        let p = params(&[2], &[3], "7", "2.4", "1");
        let pair = build_mu_r_sequences(&p, 3, None, None, BuildOptions::default()).unwrap();
        let rep = validate_mu_r_properties(&pair, 0.05);
        assert!(rep.structure_ok());
        assert!((rep.ratios[1].cross_ratio - 2.393617).abs() < 1e-5);
        assert_eq!(rep.r_ok, Some(true));
        assert_eq!(rep.mu_a_ok, Some(true));

        let small = params(&[2], &[3], "1.5", "1.2", "1");
        let p48 = pair_from_terms(
            small.clone(),
            vec![4u32.into(), 8u32.into()],
            vec![3u32.into(), 9u32.into()],
        )
        .unwrap();
        let rep = validate_mu_r_properties(&p48, 0.05);
        assert!(rep.valuation_failure.is_none());
        assert_eq!(rep.r_ok, None);
        let p88 = pair_from_terms(small, vec![8u32.into(), 8u32.into()], vec![3u32.into(), 9u32.into()]).unwrap();
        let rep = validate_mu_r_properties(&p88, 0.05);
        assert_eq!(rep.valuation_failure, Some((Column::A, 1)));
    }

    #[test]
    fn valuations() {
        let x = num_traits::pow(BigUint::from(3u32), 1000) * 7u32;
        assert_eq!(valuation(&x, 3), 1000);
        assert_eq!(valuation(&x, 7), 1);
        assert_eq!(valuation(&x, 5), 0);
        assert_eq!(valuation(&(BigUint::one() << 77usize), 2), 77);
    }

    #[test]
    fn size_limit() {
        let p = params(&[2], &[3], "126", "18/5", "1");
        let r = build_mu_r_sequences(&p, 4, None, None, BuildOptions::default());
        assert!(matches!(r, Err(Error::SizeLimit { .. })));
    }

    #[test]
    fn seeded_signs_are_reproducible() {
        assert_eq!(signs_from_seed(42, 6), signs_from_seed(42, 6));
        assert_ne!(signs_from_seed(42, 16), signs_from_seed(43, 16));
        assert_eq!(alternating_signs(3), [-1, 1, -1]);
    }

    #[test]
    fn json_round_trip() {
        let p = params(&[2], &[3], "7", "12/5", "1");
        let (sa, sb) = signs_from_seed(7, 3);
        let pair = build_mu_r_sequences(&p, 3, Some(&sa), Some(&sb), BuildOptions::default()).unwrap();
        let back = SequencePair::from_json(&pair.to_json()).unwrap();
        assert_eq!(back, pair);
    }
}
