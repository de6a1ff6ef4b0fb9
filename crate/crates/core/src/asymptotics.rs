//! Decay-rate fits on log-log axes.

use std::fmt;

use crate::error::{Error, Result};
use crate::model_params::AsymptoticProfile;
use crate::radial::{GridFunction, RadialGrid};
use crate::scalar::{lit, to_scalar, Exponent, Scalar};

/// Minimum width of a fitting window, in decades.
pub const MIN_DECADES: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult<T> {
    pub power: T,
    /// Zero for [`fit_power`].
    pub log_power: T,
    pub amplitude: T,
    pub window: (T, T),
    /// RMS of the residual in `ln w`.
    pub rms_residual: T,
    pub nodes: usize,
}

impl<T: Scalar> fmt::Display for FitResult<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "power {:.6} log_power {:.6} amplitude {:.6e} rms {:.2e} on [{:.3e}, {:.3e}] ({} nodes)",
            self.power, self.log_power, self.amplitude, self.rms_residual, self.window.0, self.window.1, self.nodes
        )
    }
}

/// `[10 r0, R/10]`.
pub fn default_window<T: Scalar>(grid: &RadialGrid<T>) -> (T, T) {
    grid.default_window()
}

fn window_samples<T: Scalar>(w: &GridFunction<T>, window: (T, T), min_decades: T) -> Result<(Vec<T>, Vec<T>)> {
    let (lo, hi) = window;
    let grid = &w.grid;
    if !(lo > T::zero() && hi > lo) {
        return Err(Error::WindowTooNarrow(format!("[{lo}, {hi}] is empty")));
    }
    if (hi / lo).log10() < min_decades * (T::one() - lit(1e-12)) {
        return Err(Error::WindowTooNarrow(format!(
            "[{lo:e}, {hi:e}] spans {:.3} decades, need {min_decades}",
            (hi / lo).log10()
        )));
    }
    let slack: T = lit(1e-9);
    if lo < grid.r0() * (T::one() - slack) || hi > grid.r_outer() * (T::one() + slack) {
        return Err(Error::WindowTooNarrow(format!("[{lo:e}, {hi:e}] leaves the grid")));
    }
    let idx = grid.window_indices(lo, hi);
    if idx.len() < 3 {
        return Err(Error::WindowTooNarrow(format!("only {} nodes in [{lo:e}, {hi:e}]", idx.len())));
    }
    let r = grid.r()[idx.clone()].to_vec();
    let v = w.values[idx].to_vec();
    if v.iter().any(|&x| !(x > T::zero())) {
        return Err(Error::InvalidParameter("fitted function must be positive on the window".into()));
    }
    Ok((r, v))
}

fn mean<T: Scalar>(x: &[T]) -> T {
    x.iter().copied().sum::<T>() / lit(x.len() as f64)
}

/// Least-squares line through `(ln r, ln w)` on the window.
pub fn fit_power<T: Scalar>(w: &GridFunction<T>, window: (T, T)) -> Result<FitResult<T>> {
    fit_power_with(w, window, lit(MIN_DECADES))
}

/// [`fit_power`] with an explicit minimum window width.
pub fn fit_power_with<T: Scalar>(w: &GridFunction<T>, window: (T, T), min_decades: T) -> Result<FitResult<T>> {
    let (r, v) = window_samples(w, window, min_decades)?;
    let x: Vec<T> = r.iter().map(|r| r.ln()).collect();
    let y: Vec<T> = v.iter().map(|v| v.ln()).collect();
    let (mx, my) = (mean(&x), mean(&y));
    let sxx: T = x.iter().map(|&a| (a - mx) * (a - mx)).sum();
    let sxy: T = x.iter().zip(&y).map(|(&a, &b)| (a - mx) * (b - my)).sum();
    let power = sxy / sxx;
    let intercept = my - power * mx;
    let rms = rms(&x, &y, |xi, _| intercept + power * xi);
    Ok(FitResult {
        power,
        log_power: T::zero(),
        amplitude: intercept.exp(),
        window,
        rms_residual: rms,
        nodes: x.len(),
    })
}

fn rms<T: Scalar>(x: &[T], y: &[T], model: impl Fn(T, usize) -> T) -> T {
    let ss: T = x.iter().zip(y).enumerate().map(|(i, (&a, &b))| (b - model(a, i)).powi(2)).sum();
    (ss / lit(x.len() as f64)).sqrt()
}

/// Least squares of `ln w` on `ln r` and `ln ln(r/r0)`.
///
/// The two regressors are nearly collinear on short windows; a window
/// where they are indistinguishable to `1e-10` is rejected.
pub fn fit_power_log<T: Scalar>(w: &GridFunction<T>, window: (T, T), r0: T) -> Result<FitResult<T>> {
    let (r, v) = window_samples(w, window, lit(MIN_DECADES))?;
    if r[0] <= r0 {
        return Err(Error::WindowTooNarrow("log regressor needs r > r0 on the whole window".into()));
    }
    let x1: Vec<T> = r.iter().map(|r| r.ln()).collect();
    let x2: Vec<T> = r.iter().map(|&r| (r / r0).ln().ln()).collect();
    let y: Vec<T> = v.iter().map(|v| v.ln()).collect();
    let (m1, m2, my) = (mean(&x1), mean(&x2), mean(&y));
    let c = |a: &[T], ma: T, b: &[T], mb: T| -> T { a.iter().zip(b).map(|(&p, &q)| (p - ma) * (q - mb)).sum() };
    let s11 = c(&x1, m1, &x1, m1);
    let s22 = c(&x2, m2, &x2, m2);
    let s12 = c(&x1, m1, &x2, m2);
    let s1y = c(&x1, m1, &y, my);
    let s2y = c(&x2, m2, &y, my);
    let det = s11 * s22 - s12 * s12;
    if !(det > lit::<T>(1e-10) * s11 * s22) {
        return Err(Error::Collinear);
    }
    let power = (s22 * s1y - s12 * s2y) / det;
    let log_power = (s11 * s2y - s12 * s1y) / det;
    let intercept = my - power * m1 - log_power * m2;
    let rms = rms(&x1, &y, |a, i| intercept + power * a + log_power * x2[i]);
    Ok(FitResult {
        power,
        log_power,
        amplitude: intercept.exp(),
        window,
        rms_residual: rms,
        nodes: x1.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileCheck<T> {
    pub pass: bool,
    pub power_error: T,
    pub log_power_error: T,
}

impl<T: Scalar> fmt::Display for ProfileCheck<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (|Δpower| = {:.4}, |Δlog_power| = {:.4})",
            if self.pass { "PASS" } else { "FAIL" },
            self.power_error,
            self.log_power_error
        )
    }
}

/// Compares fitted exponents with a predicted profile.
pub fn compare_profile<T: Scalar, E: Exponent>(
    fit: &FitResult<T>,
    predicted: &AsymptoticProfile<E>,
    tol_power: T,
    tol_log: T,
) -> ProfileCheck<T> {
    let power_error = (fit.power - to_scalar::<E, T>(&predicted.power)).abs();
    let log_power_error = (fit.log_power - to_scalar::<E, T>(&predicted.log_power())).abs();
    ProfileCheck {
        pass: power_error <= tol_power && log_power_error <= tol_log,
        power_error,
        log_power_error,
    }
}
