//! Exhaustive scans.
//!
//! The λ side is scanned by levels `x₀ = 1..cap`, one nearest-integer point
//! per level. The ω side is scanned by shells of constant `N_ω^K`, merged
//! from the two sequences `u^{e1}` and `v^{e2}`; within a shell the best
//! point wins, ties going to the lexicographically smallest canonical
//! representative. A level or shell is a record when it strictly improves
//! on every earlier one.
//!
//! Ranges are cut into chunks scanned in parallel; each chunk keeps its own
//! running records and the merge re-runs the record rule over the
//! concatenation, so the output does not depend on the thread count.

use super::engine::{Cand, Engine, Form, Functional};
use super::sublattice::{records_on_sublattice, Side};
use super::{n_key, normalize, BestApproxChain, ChainPoint, Kind, LatticePoint, Weights};
use crate::certified::{CertifiedValue, Verdict};
use crate::error::{Error, Result};
use crate::murseq::SequencePair;
use crate::theta::ThetaLadder;
use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

const LEVEL_CHUNK: u64 = 1 << 16;
const SHELL_CHUNK: usize = 32;
const ROW_CHUNK: usize = 64;
/// Largest box side accepted on the ω side.
const MAX_BOX_SIDE: u64 = 1 << 31;
/// Largest number of points accepted in an ω box.
const MAX_BOX_POINTS: f64 = 4e11;

/// How `enumerate_best_chain` explores the region.
#[derive(Debug, Clone, Copy)]
pub enum ScanStrategy<'a> {
    /// Every point up to the cap; the result is provably minimal there.
    Exhaustive,
    /// Multiples along one sublattice of the construction; not exhaustive.
    Sublattice {
        pair: &'a SequencePair,
        n: usize,
        side: Side,
        m_start: Option<u64>,
    },
}

fn functional(kind: Kind) -> Functional {
    match kind {
        Kind::Lambda => Functional::Lambda,
        Kind::Omega => Functional::Omega,
    }
}

fn chunks(lo: u64, hi: u64, size: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut a = lo;
    while a <= hi {
        let b = a.saturating_add(size - 1).min(hi);
        out.push((a, b));
        if b == u64::MAX {
            break;
        }
        a = b + 1;
    }
    out
}

fn merge_records(eng: &Engine, parts: Vec<Result<Vec<Cand>>>) -> Result<Vec<Cand>> {
    let mut out: Vec<Cand> = Vec::new();
    for part in parts {
        for mut c in part? {
            match out.last_mut() {
                None => out.push(c),
                Some(last) => {
                    if eng.compare(&mut c, last)? == Verdict::Less {
                        out.push(c);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Running-minimum records over levels `lo..=hi`.
pub(crate) fn lambda_records(eng: &Engine, lo: u64, hi: u64) -> Result<Vec<Cand>> {
    if lo > hi {
        return Ok(Vec::new());
    }
    let parts: Vec<Result<Vec<Cand>>> = chunks(lo, hi, LEVEL_CHUNK)
        .into_par_iter()
        .map(|(a, b)| lambda_chunk(eng, a, b))
        .collect();
    merge_records(eng, parts)
}

fn lambda_chunk(eng: &Engine, a: u64, b: u64) -> Result<Vec<Cand>> {
    let mut recs: Vec<Cand> = Vec::new();
    let (f1, f2) = eng.fast.map(|(x, y)| (x.f, y.f)).unwrap_or((0, 0));
    for x0 in a..=b {
        let c = x0 as u128;
        let key = eng.fast_sim(c, c.wrapping_mul(f1), c.wrapping_mul(f2));
        match recs.last_mut() {
            None => recs.push(eng.cand_sim(x0 as i128, key)),
            Some(last) => {
                if let (Some(k), Some(lk)) = (key, last.fast) {
                    if k.lo >= lk.hi {
                        continue;
                    }
                }
                let mut cand = eng.cand_sim(x0 as i128, key);
                if eng.compare(&mut cand, last)? == Verdict::Less {
                    recs.push(cand);
                }
            }
        }
    }
    Ok(recs)
}

/// Minimum of the simultaneous functional over `1..=cap`.
pub(crate) fn lambda_level_minimum(eng: &Engine, cap: u64) -> Result<Option<Cand>> {
    Ok(lambda_records(eng, 1, cap)?.pop())
}

/// One shell of constant `N_ω^K`: the box grew to `|x₁| ≤ u`, `|x₂| ≤ v`.
#[derive(Debug, Clone)]
pub(crate) struct Shell {
    key: BigUint,
    u: u64,
    v: u64,
    du: bool,
    dv: bool,
}

/// Box `|x₁| ≤ U`, `|x₂| ≤ V` equal to `{N_ω ≤ cap}`.
pub(crate) fn omega_box_size(cap: u64, w: &Weights) -> Result<(u64, u64)> {
    let (e1, e2) = w.key_exponents();
    let hk = num_traits::pow(BigUint::from(cap), w.key_power() as usize);
    let u = hk.nth_root(e1);
    let v = hk.nth_root(e2);
    let (Some(u), Some(v)) = (u.to_u64(), v.to_u64()) else {
        return Err(Error::CapOverflow(format!("omega box for cap {cap} is too large")));
    };
    if u > MAX_BOX_SIDE || v > MAX_BOX_SIDE || (2.0 * u as f64 + 1.0) * (v as f64 + 1.0) > MAX_BOX_POINTS {
        return Err(Error::CapOverflow(format!("omega box {u} x {v} is too large")));
    }
    Ok((u, v))
}

fn build_shells(umax: u64, vmax: u64, w: &Weights) -> Vec<Shell> {
    let (e1, e2) = w.key_exponents();
    let mut out = Vec::with_capacity((umax + vmax) as usize);
    let (mut u, mut v) = (0u64, 0u64);
    let pw = |x: u64, e: u32| num_traits::pow(BigUint::from(x), e as usize);
    let mut nu = (umax > 0).then(|| pw(1, e1));
    let mut nv = (vmax > 0).then(|| pw(1, e2));
    loop {
        let (du, dv) = match (&nu, &nv) {
            (None, None) => break,
            (Some(_), None) => (true, false),
            (None, Some(_)) => (false, true),
            (Some(a), Some(b)) => (a <= b, b <= a),
        };
        let key = if du { nu.clone().unwrap() } else { nv.clone().unwrap() };
        if du {
            u += 1;
            nu = (u < umax).then(|| pw(u + 1, e1));
        }
        if dv {
            v += 1;
            nv = (v < vmax).then(|| pw(v + 1, e2));
        }
        out.push(Shell { key, u, v, du, dv });
    }
    out
}

/// Offers `(x₁, x₂)` to a shell minimum, respecting an outer threshold
/// (strict) while no candidate has been accepted.
#[allow(clippy::too_many_arguments)]
#[inline]
fn consider(
    eng: &Engine,
    best: &mut Option<Cand>,
    thr: Option<&mut Cand>,
    x1: i64,
    x2: i64,
    f: (u128, u128),
) -> Result<()> {
    let v = (x1 as i128 as u128)
        .wrapping_mul(f.0)
        .wrapping_add((x2 as i128 as u128).wrapping_mul(f.1));
    let key = eng.fast_lin(x1.unsigned_abs() as u128, x2.unsigned_abs() as u128, v);
    match best {
        Some(b) => {
            if let (Some(k), Some(bk)) = (key, b.fast) {
                if k.certainly_greater(&bk) {
                    return Ok(());
                }
            }
            eng.offer(best, eng.cand_lin(x1, x2, key))
        }
        None => {
            let mut c = eng.cand_lin(x1, x2, key);
            if let Some(t) = thr {
                if let (Some(k), Some(tk)) = (key, t.fast) {
                    if k.lo >= tk.hi {
                        return Ok(());
                    }
                }
                if eng.compare(&mut c, t)? != Verdict::Less {
                    return Ok(());
                }
            }
            *best = Some(c);
            Ok(())
        }
    }
}

/// Best canonical point of a shell, strictly below `thr` if given; the
/// pair `skip` (either sign) is left out.
fn shell_best(
    eng: &Engine,
    sh: &Shell,
    mut thr: Option<&mut Cand>,
    skip: Option<(i64, i64)>,
) -> Result<Option<Cand>> {
    let f = eng.fast.map(|(x, y)| (x.f, y.f)).unwrap_or((0, 0));
    let mut best: Option<Cand> = None;
    let skipped = |x1: i64, x2: i64| matches!(skip, Some((a, b)) if (a == x1 && b == x2) || (a == -x1 && b == -x2));
    let (u, v) = (sh.u as i64, sh.v as i64);
    if sh.du {
        for x2 in -v..=v {
            if !skipped(u, x2) {
                consider(eng, &mut best, thr.as_deref_mut(), u, x2, f)?;
            }
        }
    }
    if sh.dv {
        let top = if sh.du { u - 1 } else { u };
        if !skipped(0, v) {
            consider(eng, &mut best, thr.as_deref_mut(), 0, v, f)?;
        }
        for x1 in 1..=top {
            for x2 in [-v, v] {
                if !skipped(x1, x2) {
                    consider(eng, &mut best, thr.as_deref_mut(), x1, x2, f)?;
                }
            }
        }
    }
    Ok(best)
}

fn omega_records(eng: &Engine, shells: &[Shell]) -> Result<Vec<Cand>> {
    let parts: Vec<Result<Vec<Cand>>> = shells
        .par_chunks(SHELL_CHUNK)
        .map(|chunk| {
            let mut recs: Vec<Cand> = Vec::new();
            for sh in chunk {
                if let Some(b) = shell_best(eng, sh, recs.last_mut(), None)? {
                    recs.push(b);
                }
            }
            Ok(recs)
        })
        .collect();
    merge_records(eng, parts)
}

/// Minimum of `L_ω` over canonical points of rows `(x₁, max |x₂|)`; row
/// `x₁ = 0` uses `x₂ > 0`.
pub(crate) fn lin_rows_minimum(eng: &Engine, rows: &[(i64, i64)]) -> Result<Option<Cand>> {
    let f = eng.fast.map(|(x, y)| (x.f, y.f)).unwrap_or((0, 0));
    let parts: Vec<Result<Option<Cand>>> = rows
        .par_chunks(ROW_CHUNK)
        .map(|chunk| {
            let mut best: Option<Cand> = None;
            for &(x1, vmax) in chunk {
                let start = if x1 == 0 { 1 } else { -vmax };
                for x2 in start..=vmax {
                    consider(eng, &mut best, None, x1, x2, f)?;
                }
            }
            Ok(best)
        })
        .collect();
    let mut best = None;
    for p in parts {
        best = eng.min_of(best, p?)?;
    }
    Ok(best)
}

/// Minimum of `L_ω` over the twisted box `{N_ω ≤ H}` for the weights.
pub fn twisted_omega_minimum(
    ladder: &ThetaLadder,
    w: &Weights,
    h: u64,
) -> Result<Option<(CertifiedValue, LatticePoint)>> {
    let (u, v) = omega_box_size(h, w)?;
    let eng = Engine::new(ladder, w, Functional::Omega);
    let rows: Vec<(i64, i64)> = (0..=u as i64).map(|x1| (x1, v as i64)).collect();
    match lin_rows_minimum(&eng, &rows)? {
        None => Ok(None),
        Some(mut c) => {
            let e = eng.finest(&mut c)?;
            Ok(Some((e.key.clone(), e.point.canonical())))
        }
    }
}

fn to_chain_point(eng: &Engine, kind: Kind, w: &Weights, c: &mut Cand) -> Result<ChainPoint> {
    let e = eng.finest(c)?;
    Ok(ChainPoint::build(kind, e.point.canonical(), e.key.clone(), w, e.tie))
}

fn exhaustive_records<'a>(eng: &Engine<'a>, kind: Kind, w: &Weights, cap: u64) -> Result<Vec<Cand>> {
    if cap == 0 {
        return Ok(Vec::new());
    }
    match kind {
        Kind::Lambda => lambda_records(eng, 1, cap),
        Kind::Omega => {
            let (u, v) = omega_box_size(cap, w)?;
            omega_records(eng, &build_shells(u, v, w))
        }
    }
}

/// Best-approximation records up to `height_cap` (`N ≤ height_cap`).
pub fn enumerate_best_chain(
    kind: Kind,
    ladder: &ThetaLadder,
    w: &Weights,
    height_cap: u64,
    strategy: ScanStrategy,
) -> Result<BestApproxChain> {
    let eng = Engine::new(ladder, w, functional(kind));
    let (recs, exhaustive) = match strategy {
        ScanStrategy::Exhaustive => {
            let mut recs = exhaustive_records(&eng, kind, w, height_cap)?;
            let pts = recs
                .iter_mut()
                .map(|c| to_chain_point(&eng, kind, w, c))
                .collect::<Result<Vec<_>>>()?;
            (pts, true)
        }
        ScanStrategy::Sublattice { pair, n, side, m_start } => {
            if kind != Kind::Lambda {
                return Err(Error::InvalidParameter("sublattice scans are on the lambda side".into()));
            }
            let recs = records_on_sublattice(pair, ladder, n, side, m_start, height_cap)?;
            let th = ladder.finest();
            let pts = recs
                .into_iter()
                .map(|r| {
                    let key = super::eval_l_lambda_key(&r.point, th, w);
                    ChainPoint::build(kind, r.point, key, w, false)
                })
                .collect();
            (pts, false)
        }
    };
    let (pre_chain, points) = normalize(recs);
    Ok(BestApproxChain {
        kind,
        weights: w.clone(),
        points,
        pre_chain,
        height_cap,
        exhaustive,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    /// Chain points whose neighbourhood lies in the region.
    pub checked: usize,
    /// Per point: min over other points `M` with `N(M) < N(next)` of
    /// `L(M)/L(point)`.
    pub margins: Vec<Option<f64>>,
    pub min_margin: Option<f64>,
    pub vacuous: bool,
}

enum Region {
    Levels(u64),
    Shells(Vec<Shell>),
}

impl Region {
    fn len(&self) -> usize {
        match self {
            Region::Levels(cap) => *cap as usize,
            Region::Shells(s) => s.len(),
        }
    }

    /// Records over level indices `lo..hi` (0-based, half-open).
    fn records(&self, eng: &Engine, lo: usize, hi: usize) -> Result<Vec<Cand>> {
        if lo >= hi {
            return Ok(Vec::new());
        }
        match self {
            Region::Levels(_) => lambda_records(eng, lo as u64 + 1, hi as u64),
            Region::Shells(s) => omega_records(eng, &s[lo..hi]),
        }
    }

    fn min_over(&self, eng: &Engine, lo: usize, hi: usize) -> Result<Option<Cand>> {
        Ok(self.records(eng, lo, hi)?.pop())
    }

    /// Index of the level holding `p`, if inside the region.
    fn level_of(&self, kind: Kind, p: &LatticePoint, w: &Weights) -> Option<usize> {
        let key = n_key(kind, p, w);
        match self {
            Region::Levels(cap) => {
                let x = key.to_u64()?;
                (x >= 1 && x <= *cap).then(|| x as usize - 1)
            }
            Region::Shells(s) => s.binary_search_by(|sh| sh.key.cmp(&key)).ok(),
        }
    }
}

/// Best point on the level of `p` other than `±p`.
fn level_best_excluding(eng: &Engine, region: &Region, idx: usize, p: &LatticePoint) -> Result<Option<Cand>> {
    let mut best = None;
    match region {
        Region::Levels(_) => {
            let x0 = BigInt::from(idx as u64 + 1);
            let mut near = eng.cand_sim(idx as i128 + 1, None);
            let np = eng.point(&mut near)?.point.clone();
            // the runner-up differs from the nearest point in one coordinate;
            // moving both can tie exactly under the max and is never better
            for (d1, d2) in [(0, 0), (-1, 0), (1, 0), (0, -1), (0, 1)] {
                let q = LatticePoint::new(x0.clone(), &np.x1 + d1, &np.x2 + d2);
                if q.same_up_to_sign(p) {
                    continue;
                }
                eng.offer(&mut best, eng.cand(Form::fixed(true, &q), None))?;
            }
        }
        Region::Shells(s) => {
            let (x1, x2) = (p.x1.to_i64(), p.x2.to_i64());
            let (Some(x1), Some(x2)) = (x1, x2) else {
                return Ok(None);
            };
            best = shell_best(eng, &s[idx], None, Some((x1, x2)))?;
            let mut near = eng.cand_lin(x1, x2, None);
            let np = eng.point(&mut near)?.point.clone();
            for d in [-1i32, 0, 1] {
                let q = LatticePoint::new(&np.x0 + d, x1, x2);
                if q.same_up_to_sign(p) {
                    continue;
                }
                eng.offer(&mut best, eng.cand(Form::fixed(false, &q), None))?;
            }
        }
    }
    Ok(best)
}

fn level_best(eng: &Engine, region: &Region, idx: usize) -> Result<Option<Cand>> {
    match region {
        Region::Levels(_) => Ok(Some(eng.cand_sim(idx as i128 + 1, None))),
        Region::Shells(s) => shell_best(eng, &s[idx], None, None),
    }
}

fn ln_mid(eng: &Engine, c: &mut Cand) -> Result<f64> {
    let (lo, hi) = eng.finest(c)?.key.ln_f64_bounds();
    Ok(if lo.is_finite() { lo + (hi - lo) / 2.0 } else { lo })
}

/// Re-scans the region up to the chain's cap and confirms that no point
/// with `N(M) < N(points[k+1])` has `L(M) < L(points[k])`.
pub fn verify_chain_optimality(chain: &BestApproxChain, ladder: &ThetaLadder) -> Result<VerifyReport> {
    let kind = chain.kind;
    let w = &chain.weights;
    let eng = Engine::new(ladder, w, functional(kind));
    let region = match kind {
        Kind::Lambda => Region::Levels(chain.height_cap),
        Kind::Omega => {
            let (u, v) = omega_box_size(chain.height_cap, w)?;
            Region::Shells(build_shells(u, v, w))
        }
    };
    let pts = chain.lattice_points();
    let mut pos = Vec::new();
    for p in &pts {
        match region.level_of(kind, p, w) {
            Some(i) => pos.push(i),
            None => break,
        }
    }
    if pos.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("chain N values are not increasing".into()));
    }
    if pos.is_empty() {
        return Ok(VerifyReport {
            checked: 0,
            margins: vec![None; pts.len()],
            min_margin: None,
            vacuous: true,
        });
    }
    let end = region.len();
    let mut before = region.min_over(&eng, 0, pos[0])?;
    let mut margins = vec![None; pts.len()];
    for (k, &idx) in pos.iter().enumerate() {
        let next = pos.get(k + 1).copied().unwrap_or(end);
        let seg = region.min_over(&eng, idx + 1, next)?;
        let excl = level_best_excluding(&eng, &region, idx, &pts[k])?;
        let lev = level_best(&eng, &region, idx)?;
        let near = eng.min_of(before.clone(), excl)?;
        let region_min = eng.min_of(near, seg.clone())?;
        let mut pk = eng.cand(Form::fixed(eng.is_sim(), &pts[k]), None);
        if let Some(mut m) = region_min {
            if eng.compare(&mut m, &mut pk)? == Verdict::Less {
                let point = eng.point(&mut m)?.point.canonical();
                return Err(Error::ViolationFound { index: k, point });
            }
            let lm = ln_mid(&eng, &mut m)?;
            let lp = ln_mid(&eng, &mut pk)?;
            margins[k] = Some(if lp == f64::NEG_INFINITY {
                f64::INFINITY
            } else {
                ((lm - lp) / eng.key_root as f64).exp()
            });
        }
        before = eng.min_of(before, lev)?;
        before = eng.min_of(before, seg)?;
    }
    let min_margin = margins.iter().flatten().copied().reduce(f64::min);
    Ok(VerifyReport {
        checked: pos.len(),
        margins,
        min_margin,
        vacuous: false,
    })
}

/// Status of a predicted chain point after a capped exhaustive scan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "witness", rename_all = "snake_case")]
pub enum PredictedStatus {
    /// Every point with `N` below the next predicted point was searched.
    Certified,
    /// Nothing in the searched region beats the point, but the region does
    /// not reach the next predicted point.
    NoCounterexampleBelowCap,
    Violated(LatticePoint),
}

/// Checks predicted points against the exhaustive records up to `cap`.
pub fn certify_predicted(
    points: &[LatticePoint],
    kind: Kind,
    ladder: &ThetaLadder,
    w: &Weights,
    cap: u64,
) -> Result<Vec<PredictedStatus>> {
    let eng = Engine::new(ladder, w, functional(kind));
    let mut recs = exhaustive_records(&eng, kind, w, cap)?;
    let mut rec_pts = Vec::with_capacity(recs.len());
    for r in recs.iter_mut() {
        rec_pts.push(eng.point(r)?.point.clone());
    }
    let rec_keys: Vec<BigUint> = rec_pts.iter().map(|p| n_key(kind, p, w)).collect();
    let cap_key = match kind {
        Kind::Lambda => BigUint::from(cap),
        Kind::Omega => num_traits::pow(BigUint::from(cap), w.key_power() as usize),
    };
    let mut out = Vec::with_capacity(points.len());
    for (k, p) in points.iter().enumerate() {
        let bound = points.get(k + 1).map(|q| n_key(kind, q, w));
        let r = match &bound {
            Some(b) => rec_keys.iter().rposition(|x| x < b),
            None => (!recs.is_empty()).then(|| recs.len() - 1),
        };
        let mut status = match &bound {
            Some(b) if !cap.is_zero() && b <= &(&cap_key + BigUint::one()) => PredictedStatus::Certified,
            _ => PredictedStatus::NoCounterexampleBelowCap,
        };
        if let Some(r) = r {
            if !rec_pts[r].same_up_to_sign(p) {
                let mut pk = eng.cand(Form::fixed(eng.is_sim(), p), None);
                if eng.compare(&mut recs[r], &mut pk)? == Verdict::Less {
                    status = PredictedStatus::Violated(rec_pts[r].canonical());
                }
            }
        }
        out.push(status);
    }
    Ok(out)
}
