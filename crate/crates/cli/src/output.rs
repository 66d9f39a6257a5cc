//! CSV and JSON renderings of reports.

use dioph::bestapprox::BestApproxChain;
use dioph::construction::SweepRow;
use dioph::exponents::ExponentReport;
use dioph::rational::{f64_to_sig_string, to_sig_string};
use dioph::Result;
use std::fs;
use std::io::Write;
use std::path::Path;

const DIGITS: u32 = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

fn g(x: f64) -> String {
    f64_to_sig_string(x, DIGITS)
}

fn opt(x: Option<f64>) -> String {
    x.map(g).unwrap_or_default()
}

fn csv_string(header: &[&str], rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(&r).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| dioph::Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn csv_err(e: csv::Error) -> dioph::Error {
    dioph::Error::Io(std::io::Error::other(e))
}

pub fn chain_csv(chain: &BestApproxChain) -> Result<String> {
    let rows = chain
        .points
        .iter()
        .enumerate()
        .map(|(k, c)| {
            vec![
                (k + 1).to_string(),
                c.point.x0.to_string(),
                c.point.x1.to_string(),
                c.point.x2.to_string(),
                g(c.ln_l.0),
                g(c.ln_l.1),
                g(c.ln_n.0 + (c.ln_n.1 - c.ln_n.0) / 2.0),
                chain.kind.to_string(),
            ]
        })
        .collect();
    csv_string(
        &["n_index", "x0", "x1", "x2", "logL_lo", "logL_hi", "logN", "kind"],
        rows,
    )
}

pub fn ratio_csv(rep: &ExponentReport) -> Result<String> {
    let rows = rep
        .rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                opt(r.uniform_ratio),
                opt(r.ordinary_ratio),
                g(r.err_bar),
            ]
        })
        .collect();
    csv_string(&["n", "uniform_ratio", "ordinary_ratio", "err_bar"], rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<String> {
    let s = |q| to_sig_string(q, DIGITS);
    let rows = rows
        .iter()
        .map(|r| {
            let p = &r.prediction;
            vec![
                s(p.weights.i()),
                s(p.weights.j()),
                s(&p.mu),
                s(&p.r),
                s(&p.omega_hat),
                s(&p.lambda_hat),
                s(&p.omega),
                s(&r.jarnik_residual),
            ]
        })
        .collect();
    csv_string(
        &["i", "j", "mu", "R", "omega_hat", "lambda_hat", "omega", "jarnik_residual"],
        rows,
    )
}

pub fn json_string(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s
}

/// Writes to `path`, or stdout when absent.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}
