//! `sweep`: an atlas of verdicts over a grid of exponents.

use gm_exterior::{classify, BigRational, Exponent};
use rayon::prelude::*;

use crate::config::{rational, Layer, RunConfig, EXPONENT_KEYS};
use crate::exit::CliError;
use crate::solve;

pub const HEADER: [&str; 18] = [
    "N", "kind", "p", "q", "m", "s", "k", "outcome", "tag", "u_kind", "u_power", "u_log_power", "v_kind", "v_power",
    "v_log_power", "fit_u", "fit_v", "error",
];

/// `x` or `start:end:count`; endpoints are exact, so a range can land on a
/// theorem boundary.
pub fn parse_range(key: &str, text: &str) -> Result<Vec<BigRational>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [x] => Ok(vec![rational(key, x)?]),
        [a, b, count] => {
            let count: i64 = count
                .trim()
                .parse()
                .ok()
                .filter(|c| *c >= 0)
                .ok_or_else(|| CliError::config(format!("`{key}`: count `{count}` is not a nonnegative integer")))?;
            let (a, b) = (rational(key, a)?, rational(key, b)?);
            Ok(match count {
                0 => Vec::new(),
                1 => vec![a],
                _ => (0..count)
                    .map(|i| a.clone() + (b.clone() - a.clone()) * BigRational::from_ratio(i, count - 1))
                    .collect(),
            })
        }
        _ => Err(CliError::config(format!("`{key}`: `{text}` is neither a number nor start:end:count"))),
    }
}

/// Cells in row-major order, `p` outermost and `k` innermost.
pub fn cells(layer: &Layer) -> Result<Vec<Layer>, CliError> {
    let mut base = layer.clone();
    let mut axes = Vec::new();
    for key in EXPONENT_KEYS {
        let text = base.remove(key).ok_or_else(|| CliError::config(format!("missing required key `{key}`")))?;
        axes.push((key, parse_range(key, &text)?));
    }
    let mut out = vec![base];
    for (key, values) in axes {
        out = out
            .into_iter()
            .flat_map(|cell| {
                values.iter().map(move |v| {
                    let mut c = cell.clone();
                    c.set(key, v.render()).expect("exponent keys are known");
                    c
                })
            })
            .collect();
    }
    Ok(out)
}

fn evaluate(cell: &Layer, solve_cells: bool) -> Vec<String> {
    let mut row: Vec<String> = vec![String::new(); HEADER.len()];
    for (i, key) in ["N", "kind", "p", "q", "m", "s", "k"].iter().enumerate() {
        row[i] = cell.get(key).unwrap_or("").to_string();
    }
    let config = match RunConfig::resolve(cell) {
        Ok(c) => c,
        Err(e) => {
            row[17] = e.message;
            return row;
        }
    };
    row[0] = config.dim.to_string();
    row[1] = config.kind.clone();
    let verdict = match config.exact().and_then(|x| classify(&x).map_err(|e| CliError::library(&e))) {
        Ok(v) => v,
        Err(e) => {
            row[17] = e.message;
            return row;
        }
    };
    row[7] = verdict.outcome.as_str().into();
    row[8] = verdict.matched_condition.clone();
    if let (Some(u), Some(v)) = (&verdict.u_profile, &verdict.v_profile) {
        row[9] = u.kind().as_str().into();
        row[10] = u.power.render();
        row[11] = u.log_power().render();
        row[12] = v.kind().as_str().into();
        row[13] = v.power.render();
        row[14] = v.log_power().render();
        if solve_cells {
            match solve::compute(&config) {
                Ok(run) => {
                    row[15] = format!("{:.6}", run.fit_u.power);
                    row[16] = format!("{:.6}", run.fit_v.power);
                }
                Err(e) => row[17] = e.message,
            }
        }
    }
    row
}

/// Rows in cell order whatever order the pool finishes them in.
pub fn run(layer: &Layer, solve_cells: bool, jobs: usize) -> Result<Vec<Vec<String>>, CliError> {
    let cells = cells(layer)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::config(format!("cannot start {jobs} workers: {e}")))?;
    Ok(pool.install(|| cells.par_iter().map(|c| evaluate(c, solve_cells)).collect()))
}

pub fn to_csv(rows: &[Vec<String>]) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.into_inner().map_err(|e| e.into_error().into())
}
