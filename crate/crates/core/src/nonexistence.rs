//! Checkable obstructions to existence, and a truncation probe that
//! watches the monotone construction in a nonexistence regime.
//!
//! The probe corroborates; it cannot verify. On a bounded grid every
//! problem has a solution, and what fails in the limit is the decay: the
//! truncated solutions do not settle as `R` grows.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;
use std::thread;

use crate::error::{Error, Result};
use crate::model_params::{classify, ExponentSet, Outcome, SystemKind};
use crate::radial::{assemble_operator, build_grid, GridFunction};
use crate::scalar::{lit, Exponent, Scalar};
use crate::scalar_solver::{solve_monotone, MonotoneOptions, Nonlinearity};

/// `∫_1^∞ t · t^-α dt = ∞`, i.e. `α <= 2`.
pub fn integral_criterion<E: Exponent>(alpha: &E) -> bool {
    alpha.compare(&E::from_int(2)) != Ordering::Greater
}

/// Planar obstruction for `A = t^-α`, `g = t^-s`:
/// `liminf e^{(2-α)t} c^-s (t+1)^-s > 0` holds iff `α < 2`, or `α = 2`
/// and `s = 0`.
pub fn criterion_2d<E: Exponent>(alpha: &E, s: &E) -> bool {
    match alpha.compare(&E::from_int(2)) {
        Ordering::Less => true,
        Ordering::Equal => s.compare(&E::zero()) == Ordering::Equal,
        Ordering::Greater => false,
    }
}

/// Scalar inequality the probe solves with equality.
#[derive(Debug, Clone, PartialEq)]
pub struct Shadow<T> {
    pub field: &'static str,
    pub description: String,
    /// `Ψ = coefficient · r^-exponent`.
    pub exponent: T,
    pub s: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRow<T> {
    pub r_outer: T,
    pub nodes: usize,
    /// `min w r^{N-2}` on `[10 r0, R/10]` (the whole grid when that is
    /// empty).
    pub floor: Option<T>,
    pub inner_value: Option<T>,
    pub status: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trend {
    StrictlyIncreasing,
    StrictlyDecreasing,
    Mixed,
    Undetermined,
}

impl Trend {
    pub fn as_str(self) -> &'static str {
        match self {
            Trend::StrictlyIncreasing => "strictly increasing",
            Trend::StrictlyDecreasing => "strictly decreasing",
            Trend::Mixed => "not monotone",
            Trend::Undetermined => "undetermined",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport<T> {
    pub matched_condition: String,
    pub shadow: Shadow<T>,
    pub rows: Vec<ProbeRow<T>>,
    pub trend: Trend,
}

impl<T: Scalar> fmt::Display for ProbeReport<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "obstruction {}; shadow: {}", self.matched_condition, self.shadow.description)?;
        for row in &self.rows {
            match (row.floor, row.inner_value) {
                (Some(fl), Some(w0)) => writeln!(
                    f,
                    "  R = {:.3e} ({} nodes): floor min {}*r^(N-2) = {:.6e}, {}(r0) = {:.6e}",
                    row.r_outer, row.nodes, self.shadow.field, fl, self.shadow.field, w0
                )?,
                _ => writeln!(f, "  R = {:.3e} ({} nodes): {}", row.r_outer, row.nodes, row.status)?,
            }
        }
        write!(f, "  floor across R: {}", self.trend.as_str())
    }
}

fn trend_of<T: Scalar>(xs: &[Option<T>]) -> Trend {
    if xs.len() < 2 || xs.iter().any(Option::is_none) {
        return Trend::Undetermined;
    }
    let v: Vec<T> = xs.iter().map(|x| x.unwrap()).collect();
    if v.windows(2).all(|w| w[1] > w[0]) {
        Trend::StrictlyIncreasing
    } else if v.windows(2).all(|w| w[1] < w[0]) {
        Trend::StrictlyDecreasing
    } else {
        Trend::Mixed
    }
}

fn shadow_for<T: Scalar + Exponent>(params: &ExponentSet<T>, tag: &str) -> Result<Shadow<T>> {
    let nm2: T = lit(params.dim as f64 - 2.0);
    let inhibitor = || Shadow {
        field: "v",
        description: format!(
            "-Δv = r^-{} v^-{} (u >= r^(2-N) fed into the inhibitor), v(R) = 0",
            params.m * nm2,
            params.s
        ),
        exponent: params.m * nm2,
        s: params.s,
    };
    match (params.kind, tag) {
        (SystemKind::NegActivator | SystemKind::NegBoth, _) => Ok(Shadow {
            field: "u",
            description: format!("-Δu = u^-{} (v <= 1 fed into the activator), u(R) = 0", params.p),
            exponent: T::zero(),
            s: params.p,
        }),
        (SystemKind::Gm, "Thm2.1(ii)") => Ok(inhibitor()),
        (SystemKind::Mixed, "Thm7.1(ii2)") => {
            let critical = lit::<T>(2.0) / nm2;
            if params.m.compare(&critical) != Ordering::Greater {
                Ok(inhibitor())
            } else {
                Ok(Shadow {
                    field: "u",
                    description: format!("-Δu = r^-{} u^-{} (v >= r^(2-N) fed into the activator), u(R) = 0", params.q * nm2, params.p),
                    exponent: params.q * nm2,
                    s: params.p,
                })
            }
        }
        _ => Err(Error::InvalidParameter(format!("no truncation shadow is implemented for {tag}"))),
    }
}

/// Runs the scalar shadow of the obstruction on `[r0, R]` for each `R`
/// and records the superharmonic floor `min w r^{N-2}`.
///
/// Refuses parameter sets that are not classified as nonexistence.
pub fn degeneration_probe<T: Scalar + Exponent>(
    params: &ExponentSet<T>,
    r0: T,
    r_sequence: &[T],
    nodes_per_decade: usize,
) -> Result<ProbeReport<T>> {
    let verdict = classify(params)?;
    if verdict.outcome != Outcome::Nonexistence {
        return Err(Error::Regime { outcome: verdict.outcome.as_str().into(), tag: verdict.matched_condition });
    }
    if params.dim < 3 {
        return Err(Error::InvalidParameter("the probe needs N >= 3".into()));
    }
    if r_sequence.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("R sequence must be increasing".into()));
    }
    let shadow = shadow_for(params, &verdict.matched_condition)?;
    let nonlinearity = Nonlinearity::power(shadow.s)?;
    let nm2: T = lit(params.dim as f64 - 2.0);
    let opts = MonotoneOptions { outer_value: Some(T::zero()), max_sweeps: 2000, ..MonotoneOptions::default() };
    let run = |r_outer: T| -> ProbeRow<T> {
        let decades = num_traits::ToPrimitive::to_f64(&(r_outer / r0).log10()).unwrap_or(0.0);
        let nodes = ((decades * nodes_per_decade as f64).ceil() as usize + 1).max(16);
        let solve = || -> Result<(T, T)> {
            let grid = Arc::new(build_grid(r0, r_outer, nodes)?);
            let op = assemble_operator(grid.clone(), params.dim)?;
            let psi = GridFunction::from_fn(grid.clone(), |r| r.powf(-shadow.exponent));
            let sol = solve_monotone(&op, &psi, &nonlinearity, &opts)?;
            let (lo, hi) = grid.default_window();
            let mut idx = grid.window_indices(lo, hi);
            if idx.is_empty() {
                idx = 0..grid.n() - 1;
            }
            let floor = idx.map(|i| sol.w.values[i] * grid.r()[i].powf(nm2)).fold(T::infinity(), T::min);
            Ok((floor, sol.w.values[0]))
        };
        match solve() {
            Ok((floor, w0)) => ProbeRow { r_outer, nodes, floor: Some(floor), inner_value: Some(w0), status: "solved".into() },
            Err(e) => ProbeRow { r_outer, nodes, floor: None, inner_value: None, status: format!("{}: {e}", e.tag()) },
        }
    };
    // truncations are independent
    let rows: Vec<ProbeRow<T>> = thread::scope(|scope| {
        let handles: Vec<_> = r_sequence.iter().map(|&r| scope.spawn(move || run(r))).collect();
        handles.into_iter().map(|h| h.join().expect("probe worker panicked")).collect()
    });
    let trend = trend_of(&rows.iter().map(|r| r.floor).collect::<Vec<_>>());
    Ok(ProbeReport { matched_condition: verdict.matched_condition, shadow, rows, trend })
}
