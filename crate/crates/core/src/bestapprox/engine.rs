//! Candidate evaluation and certified comparison shared by all scans.

use super::fast::{self, FastKey, FastTheta};
use super::{LatticePoint, Weights};
use crate::certified::{compare_certified, CertifiedValue, Verdict};
use crate::error::{Error, Result};
use crate::theta::{dist_to_nearest_int, ThetaLadder, ThetaPair};
use num_bigint::BigInt;
use std::cmp::Ordering;

/// The quantity being minimized, up to a fixed monotone transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Functional {
    /// `L_λ^K = max(‖x₀θ₁‖^{e1}, ‖x₀θ₂‖^{e2})`.
    Lambda,
    /// `|x₁θ₁ + x₂θ₂ − x₀|`.
    Omega,
    /// `‖x₀θ₁‖·‖x₀θ₂‖`.
    MultLambda,
    /// `|x₀θ₁ − x₁|` alone.
    First,
    /// `|x₀θ₂ − x₂|` alone.
    Second,
}

/// A point described by its free coefficients; `None` coordinates are the
/// nearest integers.
#[derive(Debug, Clone)]
pub(crate) enum Form {
    Sim {
        x0: BigInt,
        x1: Option<BigInt>,
        x2: Option<BigInt>,
    },
    Lin {
        x1: BigInt,
        x2: BigInt,
        x0: Option<BigInt>,
    },
}

impl Form {
    pub fn fixed(kind_sim: bool, p: &LatticePoint) -> Form {
        if kind_sim {
            Form::Sim {
                x0: p.x0.clone(),
                x1: Some(p.x1.clone()),
                x2: Some(p.x2.clone()),
            }
        } else {
            Form::Lin {
                x1: p.x1.clone(),
                x2: p.x2.clone(),
                x0: Some(p.x0.clone()),
            }
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Eval {
    pub key: CertifiedValue,
    pub point: LatticePoint,
    pub tie: bool,
}

#[derive(Debug, Clone)]
pub(crate) struct Cand {
    pub form: Form,
    pub fast: Option<FastKey>,
    evals: Vec<Option<Option<Eval>>>,
}

pub(crate) struct Engine<'a> {
    pub ladder: &'a ThetaLadder,
    pub func: Functional,
    pub e1: u32,
    pub e2: u32,
    /// Root taken of the key to get the functional itself.
    pub key_root: u32,
    pub fast: Option<(FastTheta, FastTheta)>,
}

impl<'a> Engine<'a> {
    pub fn new(ladder: &'a ThetaLadder, w: &Weights, func: Functional) -> Engine<'a> {
        let fin = ladder.finest();
        let fast = match (FastTheta::new(&fin.t1), FastTheta::new(&fin.t2)) {
            (Some(a), Some(b)) => Some((a, b)),
            _ => None,
        };
        let (e1, e2) = w.key_exponents();
        Engine {
            ladder,
            func,
            e1,
            e2,
            key_root: if func == Functional::Lambda { w.key_power() } else { 1 },
            fast,
        }
    }

    pub fn is_sim(&self) -> bool {
        self.func != Functional::Omega
    }

    /// Fast key for `x₀` (as an unsigned magnitude, with its wrapped
    /// products `v1 = x₀f₁`, `v2 = x₀f₂`) and nearest-integer rounding.
    #[inline]
    pub fn fast_sim(&self, c: u128, v1: u128, v2: u128) -> Option<FastKey> {
        let (f1, f2) = self.fast.as_ref()?;
        match self.func {
            Functional::First => {
                let (lo, hi) = fast::dist_bounds(v1, fast::coeff_err(c, f1.err)?);
                Some(fast::units_key(lo, hi))
            }
            Functional::Second => {
                let (lo, hi) = fast::dist_bounds(v2, fast::coeff_err(c, f2.err)?);
                Some(fast::units_key(lo, hi))
            }
            Functional::Lambda | Functional::MultLambda => {
                let d1 = fast::dist_bounds(v1, fast::coeff_err(c, f1.err)?);
                let d2 = fast::dist_bounds(v2, fast::coeff_err(c, f2.err)?);
                if self.func == Functional::Lambda && self.e1 == self.e2 {
                    Some(fast::units_key(d1.0.max(d2.0), d1.1.max(d2.1)))
                } else {
                    Some(fast::log_key(
                        d1,
                        d2,
                        self.e1 as f64,
                        self.e2 as f64,
                        self.func == Functional::MultLambda,
                    ))
                }
            }
            Functional::Omega => None,
        }
    }

    /// Fast key for `x₁θ₁ + x₂θ₂` with `v = x₁f₁ + x₂f₂` wrapped.
    #[inline]
    pub fn fast_lin(&self, a1: u128, a2: u128, v: u128) -> Option<FastKey> {
        let (f1, f2) = self.fast.as_ref()?;
        let e = fast::coeff_err(a1, f1.err)?.checked_add(fast::coeff_err(a2, f2.err)?)?;
        let (lo, hi) = fast::dist_bounds(v, e);
        Some(fast::units_key(lo, hi))
    }

    pub fn cand(&self, form: Form, fast: Option<FastKey>) -> Cand {
        Cand {
            form,
            fast,
            evals: vec![None; self.ladder.rungs().len()],
        }
    }

    pub fn cand_sim(&self, x0: i128, fast: Option<FastKey>) -> Cand {
        self.cand(
            Form::Sim {
                x0: BigInt::from(x0),
                x1: None,
                x2: None,
            },
            fast,
        )
    }

    pub fn cand_lin(&self, x1: i64, x2: i64, fast: Option<FastKey>) -> Cand {
        self.cand(
            Form::Lin {
                x1: BigInt::from(x1),
                x2: BigInt::from(x2),
                x0: None,
            },
            fast,
        )
    }

    /// Exact evaluation on one rung; `None` when a nearest-integer decision
    /// is not possible there.
    fn eval_at(&self, form: &Form, th: &ThetaPair) -> Result<Option<Eval>> {
        let round = |y: &CertifiedValue, fixed: &Option<BigInt>| -> Result<Option<(BigInt, CertifiedValue, bool)>> {
            match fixed {
                Some(x) => Ok(Some((x.clone(), y.sub_int(x).abs(), false))),
                None => match dist_to_nearest_int(y) {
                    Ok(n) => Ok(Some((n.nearest, n.dist, n.tie))),
                    Err(Error::Indeterminate(_)) | Err(Error::WidthTooLarge { .. }) => Ok(None),
                    Err(e) => Err(e),
                },
            }
        };
        match form {
            Form::Sim { x0, x1, x2 } => {
                let y1 = th.t1.scaled(x0);
                let y2 = th.t2.scaled(x0);
                let Some((n1, d1, tie1)) = round(&y1, x1)? else {
                    return Ok(None);
                };
                let Some((n2, d2, tie2)) = round(&y2, x2)? else {
                    return Ok(None);
                };
                let key = match self.func {
                    Functional::Lambda => d1.pow(self.e1).max(&d2.pow(self.e2)),
                    Functional::MultLambda => d1.mul(&d2),
                    Functional::First => d1,
                    Functional::Second => d2,
                    Functional::Omega => unreachable!("simultaneous form under the linear functional"),
                };
                Ok(Some(Eval {
                    key,
                    point: LatticePoint::new(x0.clone(), n1, n2),
                    tie: tie1 || tie2,
                }))
            }
            Form::Lin { x1, x2, x0 } => {
                let y = th.linear(x1, x2);
                let Some((n0, d, tie)) = round(&y, x0)? else {
                    return Ok(None);
                };
                Ok(Some(Eval {
                    key: d,
                    point: LatticePoint::new(n0, x1.clone(), x2.clone()),
                    tie,
                }))
            }
        }
    }

    fn eval_cached<'c>(&self, c: &'c mut Cand, rung: usize) -> Result<Option<&'c Eval>> {
        if c.evals[rung].is_none() {
            let e = self.eval_at(&c.form, &self.ladder.rungs()[rung])?;
            c.evals[rung] = Some(e);
        }
        Ok(c.evals[rung].as_ref().unwrap().as_ref())
    }

    /// Certified comparison of two candidates, refining along the ladder.
    /// Never returns `Indeterminate`; that case is an error.
    pub fn compare(&self, a: &mut Cand, b: &mut Cand) -> Result<Verdict> {
        if let (Some(ka), Some(kb)) = (a.fast, b.fast) {
            if ka.certainly_less(&kb) {
                return Ok(Verdict::Less);
            }
            if ka.certainly_greater(&kb) {
                return Ok(Verdict::Greater);
            }
        }
        for r in 0..self.ladder.rungs().len() {
            let Some(ea) = self.eval_cached(a, r)? else { continue };
            let ka = ea.key.clone();
            let Some(eb) = self.eval_cached(b, r)? else { continue };
            let v = compare_certified(&ka, &eb.key);
            if v.is_decided() {
                return Ok(v);
            }
        }
        let pa = self.point(a).map(|e| e.point.to_string()).unwrap_or_default();
        let pb = self.point(b).map(|e| e.point.to_string()).unwrap_or_default();
        Err(Error::Indeterminate(format!(
            "cannot order {pa} and {pb} at the finest truncation"
        )))
    }

    /// Evaluation at the coarsest rung where rounding is decided.
    pub fn point<'c>(&self, c: &'c mut Cand) -> Result<&'c Eval> {
        let n = self.ladder.rungs().len();
        let mut found = None;
        for r in 0..n {
            if self.eval_cached(c, r)?.is_some() {
                found = Some(r);
                break;
            }
        }
        match found {
            Some(r) => Ok(c.evals[r].as_ref().unwrap().as_ref().unwrap()),
            None => Err(Error::Indeterminate("nearest integer undecided at every truncation".into())),
        }
    }

    /// Evaluation at the finest rung.
    pub fn finest<'c>(&self, c: &'c mut Cand) -> Result<&'c Eval> {
        let r = self.ladder.rungs().len() - 1;
        match self.eval_cached(c, r)? {
            Some(e) => Ok(e),
            None => Err(Error::Indeterminate("nearest integer undecided at the finest truncation".into())),
        }
    }

    /// Strict-minimum fold with lexicographic tie-break on canonical points.
    pub fn offer(&self, best: &mut Option<Cand>, mut c: Cand) -> Result<()> {
        match best {
            None => *best = Some(c),
            Some(b) => match self.compare(&mut c, b)? {
                Verdict::Less => *best = Some(c),
                Verdict::Equal => {
                    let pc = self.point(&mut c)?.point.canonical();
                    let pb = self.point(b)?.point.canonical();
                    if pc.cmp(&pb) == Ordering::Less {
                        *best = Some(c);
                    }
                }
                _ => {}
            },
        }
        Ok(())
    }

    /// Minimum of two optional candidates.
    pub fn min_of(&self, a: Option<Cand>, b: Option<Cand>) -> Result<Option<Cand>> {
        let mut best = a;
        if let Some(c) = b {
            self.offer(&mut best, c)?;
        }
        Ok(best)
    }
}
