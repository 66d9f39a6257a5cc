use crate::output::{self, Format};
use crate::parse::{self, ThetaInput};
use crate::{Cli, Command, ConstructArgs, EstimateArgs, ScanArgs, StrategyArg, SweepArgs, ThetaArgs, VerifyTarget};
use dioph::bestapprox::{
    certify_predicted, enumerate_best_chain, records_on_sublattice, verify_chain_optimality, BestApproxChain, Kind,
    PredictedStatus, ScanStrategy, Side,
};
use dioph::construction::{
    check_cond1, first_post_anchor_ratio, lemma_b_bounds_check, predicted_lambda_anchors, predicted_omega_chain,
    sweep, tc_closed_forms, CONSTRUCTION_SCHEMA,
};
use dioph::exponents::{
    check_jarnik, check_laurent_spectrum, check_twisted_relations, estimate_from_chain, estimate_multiplicative,
    ExponentQuadruple,
};
use dioph::murseq::{
    alternating_signs, build_mu_r_sequences, signs_from_seed, BuildOptions, MuRParams, PrimeSet, SequencePair,
    DEFAULT_MAX_BITS,
};
use dioph::theta::{theta_from_pair, ThetaLadder};
use dioph::{Error, Result};
use num_rational::BigRational;
use num_traits::Zero;
use serde_json::json;
use std::path::{Path, PathBuf};

/// Runs the command; the value is the process exit code on success paths
/// (1 when a check ran to completion and failed).
pub fn run(cli: &Cli) -> Result<u8> {
    let out = cli.global.out.as_deref();
    let fmt = cli.global.format;
    match &cli.cmd {
        Command::Construct(a) => construct(a, out, cli.global.max_precision),
        Command::Scan(a) => scan(a, out, fmt),
        Command::Estimate(a) => estimate(a, out, fmt),
        Command::Verify { target } => verify(target, out),
        Command::Sweep(a) => sweep_cmd(a, out, fmt),
    }
}

fn sidecar(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.theta.json"))
}

fn construct(a: &ConstructArgs, out: Option<&Path>, max_precision: u32) -> Result<u8> {
    if a.s.is_empty() || a.t.is_empty() {
        return Err(Error::InvalidParameter("--S and --T are required".into()));
    }
    let params = MuRParams::new(
        PrimeSet::new(a.s.clone())?,
        PrimeSet::new(a.t.clone())?,
        a.mu.clone(),
        a.r.clone(),
        a.a.clone(),
    )?;
    let signs = match (a.signs_seed, a.alternating_signs) {
        (Some(seed), _) => Some(signs_from_seed(seed, a.n)),
        (None, true) => Some((alternating_signs(a.n), alternating_signs(a.n))),
        (None, false) => None,
    };
    let opts = BuildOptions {
        max_bits: DEFAULT_MAX_BITS,
        max_precision,
    };
    let pair = build_mu_r_sequences(
        &params,
        a.n,
        signs.as_ref().map(|s| s.0.as_slice()),
        signs.as_ref().map(|s| s.1.as_slice()),
        opts,
    )?;
    let theta = if a.n >= 2 || a.trunc.is_some() {
        let level = a.trunc.unwrap_or(a.n - 1);
        Some(theta_from_pair(&pair, level, false)?.to_json())
    } else {
        None
    };
    let mut pair_json = pair.to_json();
    if let Some(seed) = a.signs_seed {
        pair_json["signs_seed"] = seed.into();
    }
    match out {
        Some(p) => {
            output::emit(Some(p), &output::json_string(&pair_json))?;
            if let Some(t) = theta {
                output::emit(Some(&sidecar(p)), &output::json_string(&t))?;
            }
        }
        None => output::emit(None, &output::json_string(&json!({ "pair": pair_json, "theta": theta })))?,
    }
    Ok(0)
}

fn load_theta(t: &ThetaArgs) -> Result<(Option<SequencePair>, ThetaLadder)> {
    match parse::theta(&t.theta, t.theta_bits)? {
        ThetaInput::Pair(p) => {
            let ladder = ThetaLadder::from_pair(&p, t.trunc_start)?;
            Ok((Some(*p), ladder))
        }
        ThetaInput::Values(l) => Ok((None, l)),
    }
}

fn need_pair(p: &Option<SequencePair>, what: &str) -> Result<()> {
    if p.is_none() {
        return Err(Error::InvalidParameter(format!("{what} needs --theta to be a pair file")));
    }
    Ok(())
}

fn need_cap(cap: Option<u64>) -> Result<u64> {
    cap.ok_or_else(|| Error::InvalidParameter("--cap is required".into()))
}

fn scan(a: &ScanArgs, out: Option<&Path>, fmt: Format) -> Result<u8> {
    let (pair, ladder) = load_theta(&a.theta)?;
    let w = &a.theta.weights;
    let kind: Kind = a.kind.into();
    let chain = match a.strategy {
        StrategyArg::Exhaustive => enumerate_best_chain(kind, &ladder, w, need_cap(a.cap)?, ScanStrategy::Exhaustive)?,
        StrategyArg::Sublattice => {
            need_pair(&pair, "a sublattice scan")?;
            if a.verify {
                return Err(Error::InvalidParameter("--verify needs an exhaustive scan".into()));
            }
            let m_cap = a.m_cap.or(a.cap).ok_or_else(|| Error::InvalidParameter("--m-cap is required".into()))?;
            let strategy = ScanStrategy::Sublattice {
                pair: pair.as_ref().unwrap(),
                n: a.n,
                side: a.side.into(),
                m_start: a.m_start,
            };
            enumerate_best_chain(kind, &ladder, w, m_cap, strategy)?
        }
    };
    let report = if a.verify { Some(verify_chain_optimality(&chain, &ladder)?) } else { None };
    match fmt {
        Format::Csv => {
            output::emit(out, &output::chain_csv(&chain)?)?;
            if let Some(r) = &report {
                eprintln!(
                    "verified {} chain points; min margin {}",
                    r.checked,
                    r.min_margin.map(|m| m.to_string()).unwrap_or_else(|| "n/a".into())
                );
            }
        }
        Format::Json => {
            let mut v = chain.to_json();
            if let Some(r) = &report {
                v["verify"] = serde_json::to_value(r)?;
            }
            output::emit(out, &output::json_string(&v))?;
        }
    }
    Ok(0)
}

/// Predicted chain of a pair: points whose values the finest truncation
/// resolves (indices up to `len - 2`).
fn predicted_chain(pair: &SequencePair, ladder: &ThetaLadder, kind: Kind, t: &ThetaArgs) -> Result<BestApproxChain> {
    if pair.len() < 3 {
        return Err(Error::ChainTooShort {
            len: pair.len(),
            needed: 3,
        });
    }
    let hi = pair.len() - 2;
    let pts = match kind {
        Kind::Omega => predicted_omega_chain(pair, 1, hi, &t.weights)?,
        Kind::Lambda => {
            let mut v = Vec::new();
            for n in 1..=hi {
                let (c, d) = predicted_lambda_anchors(pair, n)?;
                v.push(c);
                v.push(d);
            }
            v
        }
    };
    Ok(BestApproxChain::from_points(kind, &pts, ladder, &t.weights))
}

fn estimate(a: &EstimateArgs, out: Option<&Path>, fmt: Format) -> Result<u8> {
    let (pair, ladder) = load_theta(&a.theta)?;
    let kind: Kind = a.kind.into();
    let rep = if a.multiplicative {
        let grid = a
            .h_grid
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("--multiplicative needs --h-grid".into()))?;
        estimate_multiplicative(&ladder, grid, kind)?
    } else {
        let chain = if a.predicted {
            need_pair(&pair, "--predicted")?;
            predicted_chain(pair.as_ref().unwrap(), &ladder, kind, &a.theta)?
        } else {
            enumerate_best_chain(kind, &ladder, &a.theta.weights, need_cap(a.cap)?, ScanStrategy::Exhaustive)?
        };
        estimate_from_chain(&chain, a.drop_first)?
    };
    match fmt {
        Format::Csv => output::emit(out, &output::ratio_csv(&rep)?)?,
        Format::Json => output::emit(out, &output::json_string(&rep.to_json()))?,
    }
    Ok(0)
}

fn read_pair(path: &Path) -> Result<SequencePair> {
    let text = std::fs::read_to_string(path)?;
    SequencePair::from_json(&serde_json::from_str(&text)?)
}

fn verify(target: &VerifyTarget, out: Option<&Path>) -> Result<u8> {
    let zero = BigRational::zero();
    let (doc, ok) = match target {
        VerifyTarget::Tc { p, allow_outside } => {
            let pred = tc_closed_forms(&p.mu, &p.r, &p.weights, *allow_outside)?;
            let twisted = check_twisted_relations(&pred.quadruple(), &p.weights, &zero)?;
            let mut doc = json!({
                "check": "tc",
                "prediction": pred,
                "jarnik_residual": dioph::rational::to_exact_string(&pred.jarnik_residual()),
                "twisted_relations": twisted,
            });
            if p.weights.is_classical() {
                doc["laurent_spectrum"] = serde_json::to_value(check_laurent_spectrum(&pred.quadruple(), &zero)?)?;
            }
            (doc, true)
        }
        VerifyTarget::Cond1 { p } => {
            let rep = check_cond1(&p.mu, &p.r, &p.weights);
            let ok = rep.passes();
            (json!({ "check": "cond1", "report": rep, "pass": ok }), ok)
        }
        VerifyTarget::LemmaA { pair, cap, n, weights } => {
            let pair = read_pair(pair)?;
            let hi = n.unwrap_or(pair.len().saturating_sub(2)).max(1);
            let pts = predicted_omega_chain(&pair, 1, hi, weights)?;
            let ladder = ThetaLadder::from_pair(&pair, 1)?;
            let statuses = certify_predicted(&pts, Kind::Omega, &ladder, weights, *cap)?;
            let ok = !statuses.iter().any(|s| matches!(s, PredictedStatus::Violated(_)));
            let rows: Vec<_> = pts
                .iter()
                .zip(&statuses)
                .map(|(p, s)| json!({ "point": p, "status": s }))
                .collect();
            (json!({ "check": "lemmaA", "cap": cap, "points": rows, "pass": ok }), ok)
        }
        VerifyTarget::LemmaB {
            pair,
            n,
            cap,
            m_cap,
            m_start,
            side,
        } => {
            let pair = read_pair(pair)?;
            let side: Side = (*side).into();
            let (c, d) = predicted_lambda_anchors(&pair, *n)?;
            let ladder = ThetaLadder::from_pair(&pair, 1)?;
            let mut doc = json!({ "check": "lemmaB", "n": n, "C": c, "D": d });
            let mut ok = true;
            if let Some(cap) = cap {
                let w = dioph::bestapprox::Weights::classical();
                let chain = enumerate_best_chain(Kind::Lambda, &ladder, &w, *cap, ScanStrategy::Exhaustive)?;
                let found = chain.points.iter().any(|p| p.point.same_up_to_sign(&c));
                let reachable = c.x0.magnitude() <= &(*cap).into();
                ok &= found || !reachable;
                doc["anchor_record"] = json!({ "cap": cap, "reachable": reachable, "found": found });
            }
            let records = records_on_sublattice(&pair, &ladder, *n, side, *m_start, *m_cap)?;
            let modulus = match side {
                Side::BnDivisible => pair.b_n(*n).clone(),
                Side::An1Divisible => pair.a_n(*n + 1).clone(),
            };
            let bounds = lemma_b_bounds_check(&records, &modulus, side)?;
            doc["records"] = serde_json::to_value(&records)?;
            doc["bounds"] = serde_json::to_value(&bounds)?;
            if side == Side::BnDivisible {
                doc["first_post_anchor_ratio"] = json!(first_post_anchor_ratio(&records, &pair, *n));
            }
            doc["pass"] = ok.into();
            (doc, ok)
        }
        VerifyTarget::Relations {
            omega,
            omega_hat,
            lambda,
            lambda_hat,
            weights,
            tol,
        } => {
            let q = ExponentQuadruple::new(omega.clone(), omega_hat.clone(), lambda.clone(), lambda_hat.clone());
            let twisted = check_twisted_relations(&q, weights, tol)?;
            let mut ok = twisted.all_pass();
            let mut doc = json!({ "check": "relations", "twisted_relations": twisted });
            if weights.is_classical() {
                let laurent = check_laurent_spectrum(&q, tol)?;
                ok &= laurent.all_pass();
                doc["laurent_spectrum"] = serde_json::to_value(laurent)?;
            }
            doc["pass"] = ok.into();
            (doc, ok)
        }
        VerifyTarget::Jarnik { omega_hat, lambda_hat } => {
            let r = check_jarnik(omega_hat, lambda_hat)?;
            (json!({ "check": "jarnik", "residual": r.to_string() }), true)
        }
    };
    let mut doc = doc;
    doc["schema"] = CONSTRUCTION_SCHEMA.into();
    output::emit(out, &output::json_string(&doc))?;
    Ok(if ok { 0 } else { 1 })
}

fn sweep_cmd(a: &SweepArgs, out: Option<&Path>, fmt: Format) -> Result<u8> {
    let ts = parse::grid(&a.t_grid)?;
    for t in &ts {
        parse::check_unit_open(t)?;
    }
    let rows = sweep(&a.weights, &a.w_hat, &ts)?;
    match fmt {
        Format::Csv => output::emit(out, &output::sweep_csv(&rows)?)?,
        Format::Json => {
            let v = json!({ "schema": CONSTRUCTION_SCHEMA, "weights": a.weights, "omega_hat": dioph::rational::to_exact_string(&a.w_hat), "rows": rows });
            output::emit(out, &output::json_string(&v))?
        }
    }
    Ok(0)
}
