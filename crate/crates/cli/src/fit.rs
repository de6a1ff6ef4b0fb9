//! `fit`: power-law fits on a saved solution CSV.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use gm_exterior::{build_grid, compare_profile, fit_power, fit_power_log, FitResult, GridFunction, RadialGrid};

use crate::exit::CliError;
use crate::solve::{fit_like, ProfileRecord, TOL_LOG, TOL_POWER};

/// Columns of a solution CSV on the grid they were sampled on.
pub struct Table {
    pub grid: Arc<RadialGrid<f64>>,
    pub fields: Vec<(String, GridFunction<f64>)>,
}

/// Reads `r` plus every column not named `residual*`, and checks that `r`
/// is the log-uniform grid the solver writes.
pub fn read_table(path: &Path) -> Result<Table, CliError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(_) => CliError::new(crate::exit::IO, format!("{}: {e}", path.display())),
        _ => CliError::data(format!("{}: {e}", path.display())),
    })?;
    let bad = |msg: String| CliError::data(format!("{}: {msg}", path.display()));
    let header = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    let r_col = header.iter().position(|h| h.trim() == "r").ok_or_else(|| bad("no `r` column".into()))?;
    let keep: Vec<usize> = (0..header.len()).filter(|&i| i != r_col && !header[i].trim().starts_with("residual")).collect();
    if keep.is_empty() {
        return Err(bad("no field columns besides `r`".into()));
    }
    let mut r = Vec::new();
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); keep.len()];
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let parse = |i: usize| -> Result<f64, CliError> {
            let text = record.get(i).unwrap_or("").trim();
            text.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| bad(format!("row {}: `{text}` in column `{}` is not a finite number", line + 2, &header[i])))
        };
        r.push(parse(r_col)?);
        for (col, &i) in cols.iter_mut().zip(&keep) {
            col.push(parse(i)?);
        }
    }
    if r.len() < 2 {
        return Err(bad(format!("{} data rows, need at least 2", r.len())));
    }
    let grid = build_grid(r[0], r[r.len() - 1], r.len()).map_err(|e| bad(e.to_string()))?;
    if let Some(i) = r.iter().zip(grid.r()).position(|(a, b)| (a - b).abs() > 1e-9 * b) {
        return Err(bad(format!("r is not log-uniform from r0 to R (row {} has r = {:e}, expected {:e})", i + 2, r[i], grid.r()[i])));
    }
    let grid = Arc::new(grid);
    let fields = keep
        .iter()
        .zip(cols)
        .map(|(&i, values)| (header[i].trim().to_string(), GridFunction { grid: grid.clone(), values }))
        .collect();
    Ok(Table { grid, fields })
}

/// Warning when the window reaches into the boundary layers at `r0` or `R`.
pub fn layer_warning(grid: &RadialGrid<f64>, window: (f64, f64)) -> Option<String> {
    let (lo, hi) = grid.default_window();
    let slack = 1e-9;
    (window.0 < lo * (1.0 - slack) || window.1 > hi * (1.0 + slack)).then(|| {
        format!(
            "warning: window [{:e}, {:e}] reaches into a boundary layer; values within a decade of r0 = {:e} or R = {:e} are contaminated by the boundary conditions (layer-free window [{lo:e}, {hi:e}])",
            window.0,
            window.1,
            grid.r0(),
            grid.r_outer()
        )
    })
}

/// One line per field, plus a comparison line per predicted profile.
pub fn report(
    table: &Table,
    window: (f64, f64),
    predicted: &[(&str, ProfileRecord)],
    force_log: bool,
) -> Result<String, CliError> {
    let mut out = String::new();
    for (name, w) in &table.fields {
        let target = predicted.iter().find(|(n, _)| n == name).map(|(_, p)| p);
        let fit: Result<FitResult<f64>, _> = match (target, force_log) {
            (_, true) => fit_power_log(w, window, table.grid.r0()),
            (Some(p), false) => fit_like(w, window, p),
            (None, false) => fit_power(w, window),
        };
        let fit = fit.map_err(|e| CliError::library(&e).with_context(&format!("fitting `{name}`")))?;
        writeln!(out, "{name}: {fit}").unwrap();
        if let Some(p) = target {
            let check = compare_profile(&fit, &p.target(), TOL_POWER, TOL_LOG);
            writeln!(out, "  vs {}: {check}", p.text).unwrap();
        }
    }
    Ok(out)
}
