//! Monotone solver for `-Δw = Ψ(r) g(w)` with `g` nonincreasing.
//!
//! The solve brackets the discrete solution between two monotone
//! sequences:
//!
//! * the upper sequence starts at the barrier `W = φ(Z_h)` and takes chord
//!   steps `(L + C) w_{j+1} = Ψ g(w_j) + C w_j`, which can only move down;
//! * the lower sequence starts at `V = L^{-1}[Ψ g(W + δ_0)]` and follows
//!   the shifted problems `g(· + δ)` down the δ schedule with Newton steps,
//!   which can only move up (the residual is concave in `w`).
//!
//! `C = Ψ |g'(ℓ)|` is read off the current lower iterate `ℓ`, so the
//! chord is always steep enough and gets sharper as `ℓ` converges. The
//! stopping test is the relative gap `(upper - lower) / upper`, which is a
//! certified error bound rather than a step size.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::radial::{GridFunction, RadialGrid, RadialOperator};
use crate::scalar::{lit, Scalar};

/// `g` in `-Δw = Ψ g(w)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Nonlinearity<T> {
    /// `g ≡ 1`.
    Constant,
    /// `g(t) = t^-s`, `s >= 0`.
    PowerSingular { s: T },
}

impl<T: Scalar> Nonlinearity<T> {
    pub fn power(s: T) -> Result<Self> {
        if !(s >= T::zero() && s.is_finite()) {
            return Err(Error::InvalidParameter(format!("need s >= 0, got {s}")));
        }
        Ok(Nonlinearity::PowerSingular { s })
    }

    pub fn eval(&self, t: T) -> T {
        match *self {
            Nonlinearity::Constant => T::one(),
            Nonlinearity::PowerSingular { s } => t.powf(-s),
        }
    }

    /// `|g'(t)|`.
    pub fn slope(&self, t: T) -> T {
        match *self {
            Nonlinearity::Constant => T::zero(),
            Nonlinearity::PowerSingular { s } => s * t.powf(-s - T::one()),
        }
    }

    fn is_singular(&self) -> bool {
        matches!(*self, Nonlinearity::PowerSingular { s } if s > T::zero())
    }

    /// `G(w) = ∫_0^w dt / g(t)`.
    pub fn primitive(&self, w: T) -> T {
        match *self {
            Nonlinearity::Constant => w,
            Nonlinearity::PowerSingular { s } => w.max(T::zero()).powf(T::one() + s) / (T::one() + s),
        }
    }

    /// `φ = G^{-1}`.
    pub fn inverse_primitive(&self, z: T) -> T {
        match *self {
            Nonlinearity::Constant => z,
            Nonlinearity::PowerSingular { s } => ((T::one() + s) * z.max(T::zero())).powf((T::one() + s).recip()),
        }
    }
}

/// Radial source term for [`barrier_z`].
#[derive(Debug, Clone, PartialEq)]
pub enum RadialSource<T> {
    Zero,
    /// `coefficient · r^-exponent`.
    PowerLaw { coefficient: T, exponent: T },
    /// Nodal samples; the tail beyond `R` continues the last segment as a
    /// power law.
    Sampled(Vec<T>),
}

impl<T: Scalar> RadialSource<T> {
    fn samples(&self, grid: &RadialGrid<T>) -> Vec<T> {
        match self {
            RadialSource::Zero => vec![T::zero(); grid.n()],
            RadialSource::PowerLaw { coefficient, exponent } => {
                grid.r().iter().map(|&r| *coefficient * r.powf(-*exponent)).collect()
            }
            RadialSource::Sampled(v) => v.clone(),
        }
    }
}

/// `∫_R^∞ t^{1-N} ∫_{r0}^t τ^{N-1} A dτ dt` for a source continued past `R`
/// as `A(R) (t/R)^-α`.
fn z_tail<T: Scalar>(dim: u32, r_outer: T, inner_integral: T, a_outer: T, alpha: T) -> Result<T> {
    let nm2: T = lit(dim as f64 - 2.0);
    let head = inner_integral * r_outer.powf(-nm2) / nm2;
    if a_outer == T::zero() {
        return Ok(head);
    }
    let two: T = lit(2.0);
    if alpha <= two {
        return Err(Error::NonintegrableSource(num_traits::ToPrimitive::to_f64(&alpha).unwrap_or(f64::NAN)));
    }
    Ok(head + a_outer * r_outer * r_outer / ((alpha - two) * nm2))
}

/// Local decay rate `-d ln A / d ln r` over the last mesh interval.
fn tail_exponent<T: Scalar>(grid: &RadialGrid<T>, a: &[T]) -> T {
    let n = a.len();
    if a[n - 1] <= T::zero() || a[n - 2] <= T::zero() {
        return T::infinity();
    }
    -(a[n - 1] / a[n - 2]).ln() / grid.h()
}

/// Trapezoid weights of `∫_{r0}^{R} τ^{N-1} A dτ = ∫ τ^N A dξ`.
fn inner_integrals<T: Scalar>(grid: &RadialGrid<T>, dim: u32, a: &[T]) -> Vec<T> {
    let half: T = lit(0.5);
    let f: Vec<T> = grid.r().iter().zip(a).map(|(&r, &x)| r.powi(dim as i32) * x).collect();
    let mut out = vec![T::zero(); a.len()];
    for i in 1..a.len() {
        out[i] = out[i - 1] + half * grid.h() * (f[i] + f[i - 1]);
    }
    out
}

/// The barrier `Z(r) = ∫_r^∞ t^{1-N} ∫_{r0}^t τ^{N-1} A(τ) dτ dt`, by
/// trapezoid quadrature in `ξ` plus the closed-form power-law tail past `R`.
///
/// `Z` solves `-ΔZ = A` with `Z'(r0) = 0` and `Z → 0`; it is finite only if
/// `∫^∞ t A(t) dt < ∞`.
pub fn barrier_z<T: Scalar>(grid: &Arc<RadialGrid<T>>, dim: u32, source: &RadialSource<T>) -> Result<GridFunction<T>> {
    if dim < 3 {
        return Err(Error::InvalidParameter(format!("the barrier needs N >= 3, got {dim}")));
    }
    let a = source.samples(grid);
    if a.len() != grid.n() || a.iter().any(|&x| !(x >= T::zero())) {
        return Err(Error::InvalidParameter("source samples must be nonnegative and match the grid".into()));
    }
    let alpha = match source {
        RadialSource::PowerLaw { exponent, .. } => *exponent,
        _ => tail_exponent(grid, &a),
    };
    let inner = inner_integrals(grid, dim, &a);
    let n = grid.n();
    let tail = z_tail(dim, grid.r_outer(), inner[n - 1], a[n - 1], alpha)?;
    let half: T = lit(0.5);
    let nm2: T = lit(dim as f64 - 2.0);
    let outer: Vec<T> = grid.r().iter().zip(&inner).map(|(&r, &i)| r.powf(-nm2) * i).collect();
    let mut z = vec![T::zero(); n];
    z[n - 1] = tail;
    for i in (0..n - 1).rev() {
        z[i] = z[i + 1] + half * grid.h() * (outer[i] + outer[i + 1]);
    }
    GridFunction::new(grid.clone(), z)
}

/// `W` with `∫_0^W dt/g(t) = Z` nodewise.
pub fn barrier_w<T: Scalar>(z: &GridFunction<T>, g: &Nonlinearity<T>) -> GridFunction<T> {
    GridFunction {
        grid: z.grid.clone(),
        values: z.values.iter().map(|&x| g.inverse_primitive(x)).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarrierPair<T> {
    pub lower: GridFunction<T>,
    pub upper: GridFunction<T>,
}

impl<T: Scalar> BarrierPair<T> {
    pub fn contains(&self, w: &[T], rel_slack: T) -> bool {
        self.lower
            .values
            .iter()
            .zip(&self.upper.values)
            .zip(w)
            .all(|((&lo, &hi), &x)| x >= lo - rel_slack * lo.abs() && x <= hi + rel_slack * hi.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Acceleration {
    /// Chord slope refreshed from the current lower iterate (Newton on the
    /// lower side).
    Newton,
    /// Chord slope frozen at the initial lower barrier: plain monotone
    /// iteration, linear rate.
    Frozen,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneOptions<T> {
    pub delta_schedule: Vec<T>,
    pub tol: T,
    pub max_sweeps: usize,
    pub acceleration: Acceleration,
    /// Dirichlet value at `R`; `None` takes `W(R)` from the analytic tail
    /// of `Ψ`. Ignored with a Robin operator (homogeneous datum).
    pub outer_value: Option<T>,
    /// Start the upper sequence from `upper_scale · W`.
    pub upper_scale: T,
    pub record_iterates: bool,
}

impl<T: Scalar> Default for MonotoneOptions<T> {
    fn default() -> Self {
        MonotoneOptions {
            delta_schedule: (0..=8).map(|j| lit(10f64.powi(-j))).collect(),
            tol: lit(1e-10),
            max_sweeps: 500,
            acceleration: Acceleration::Newton,
            outer_value: None,
            upper_scale: T::one(),
            record_iterates: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneTrace<T> {
    /// Linear solves, both sequences.
    pub sweeps: usize,
    pub delta_stages: usize,
    pub final_gap: T,
    /// Largest relative rise of a raw upper step before clipping (roundoff
    /// scale when the theory holds).
    pub max_upper_rise: T,
    /// Largest relative drop of a raw lower step before clipping.
    pub max_lower_drop: T,
    /// Upper iterates, first entry the starting barrier.
    pub upper_iterates: Option<Vec<Vec<T>>>,
    pub lower_iterates: Option<Vec<Vec<T>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneSolution<T> {
    /// The upper end of the final bracket.
    pub w: GridFunction<T>,
    /// The starting barriers `(V, W)`.
    pub barriers: BarrierPair<T>,
    /// The final bracket; its relative width is `trace.final_gap`.
    pub bracket: BarrierPair<T>,
    pub trace: MonotoneTrace<T>,
}

fn rel_change<T: Scalar>(new: &[T], old: &[T]) -> T {
    new.iter()
        .zip(old)
        .map(|(&a, &b)| (a - b).abs() / a.abs().max(b.abs()).max(T::min_positive_value()))
        .fold(T::zero(), T::max)
}

/// Solves `-Δ_h w = Ψ g(w)` on the operator's grid.
pub fn solve_monotone<T: Scalar>(
    op: &RadialOperator<T>,
    psi: &GridFunction<T>,
    g: &Nonlinearity<T>,
    opts: &MonotoneOptions<T>,
) -> Result<MonotoneSolution<T>> {
    let grid = op.grid().clone();
    let n = grid.n();
    if psi.values.len() != n {
        return Err(Error::InvalidGrid("Ψ does not match the operator grid".into()));
    }
    if psi.values.iter().any(|&x| !(x >= T::zero() && x.is_finite())) {
        return Err(Error::InvalidParameter("Ψ must be finite and nonnegative".into()));
    }
    if opts.delta_schedule.windows(2).any(|w| w[1] >= w[0]) || opts.delta_schedule.iter().any(|&d| d <= T::zero()) {
        return Err(Error::InvalidParameter("δ schedule must be positive and decreasing".into()));
    }
    if !(opts.tol > T::zero()) || opts.upper_scale < T::one() {
        return Err(Error::InvalidParameter("need tol > 0 and upper_scale >= 1".into()));
    }
    let psi = &psi.values;
    let pde = op.pde_rows();
    let floor = T::min_positive_value().sqrt();

    // upper barrier from the discrete Z; the datum keeps W(R) = outer value
    let outer = if op.outer_row_is_pde() {
        T::zero()
    } else {
        match opts.outer_value {
            Some(b) if b >= T::zero() => b,
            Some(b) => return Err(Error::InvalidParameter(format!("outer value {b} is negative"))),
            None => {
                let inner = inner_integrals(&grid, op.dim(), psi);
                let tail = z_tail(op.dim(), grid.r_outer(), inner[n - 1], psi[n - 1], tail_exponent(&grid, psi))?;
                g.inverse_primitive(tail)
            }
        }
    };
    let z_outer = if op.outer_row_is_pde() { T::zero() } else { g.primitive(outer) };
    let z = op.solve_shifted(None, psi, z_outer);
    let w_bar: Vec<T> = z.iter().map(|&x| g.inverse_primitive(x) * opts.upper_scale).collect();
    let w_max = w_bar.iter().copied().fold(T::zero(), T::max);
    if !(w_max > floor) {
        return Err(Error::Degenerate("upper barrier vanishes (Ψ ≡ 0 with zero outer data)".into()));
    }
    if g.is_singular() && w_bar[..pde].iter().any(|&x| !(x > floor)) {
        return Err(Error::Degenerate("upper barrier touches zero at a PDE node".into()));
    }

    let shifted = |w: &[T], delta: T| -> Vec<T> { w.iter().zip(psi).map(|(&x, &p)| p * g.eval(x + delta)).collect() };
    let slopes = |w: &[T], delta: T| -> Vec<T> { w.iter().zip(psi).map(|(&x, &p)| p * g.slope(x + delta)).collect() };

    let first_delta = opts.delta_schedule.first().copied().unwrap_or(T::zero());
    let v_bar = op.solve_shifted(None, &shifted(&w_bar, first_delta), outer);
    if g.is_singular() && v_bar[..pde].iter().any(|&x| !(x > floor)) {
        return Err(Error::Degenerate("lower barrier touches zero at a PDE node".into()));
    }
    let barriers = BarrierPair {
        lower: GridFunction::new(grid.clone(), v_bar.clone())?,
        upper: GridFunction::new(grid.clone(), w_bar.clone())?,
    };

    let mut trace = MonotoneTrace {
        sweeps: 1,
        delta_stages: 0,
        final_gap: T::infinity(),
        max_upper_rise: T::zero(),
        max_lower_drop: T::zero(),
        upper_iterates: opts.record_iterates.then(|| vec![w_bar.clone()]),
        lower_iterates: opts.record_iterates.then(|| vec![v_bar.clone()]),
    };
    let frozen = slopes(&v_bar, T::zero());

    let lower_step = |lower: &[T], delta: T, trace: &mut MonotoneTrace<T>| -> Result<Vec<T>> {
        let c = match opts.acceleration {
            Acceleration::Newton => slopes(lower, delta),
            Acceleration::Frozen => frozen.clone(),
        };
        let rhs: Vec<T> = shifted(lower, delta).iter().zip(&c).zip(lower).map(|((&f, &ci), &l)| f + ci * l).collect();
        let raw = op.solve_shifted(Some(&c), &rhs, outer);
        if raw.iter().any(|x| !x.is_finite()) {
            return Err(Error::NoConvergence { iterations: trace.sweeps, gap: f64::INFINITY });
        }
        trace.sweeps += 1;
        let mut next = raw.clone();
        for i in 0..n {
            if raw[i] < lower[i] {
                let drop = (lower[i] - raw[i]) / lower[i].abs().max(floor);
                trace.max_lower_drop = trace.max_lower_drop.max(drop);
                next[i] = lower[i];
            }
        }
        if let Some(it) = trace.lower_iterates.as_mut() {
            it.push(next.clone());
        }
        Ok(next)
    };

    // lower sequence down the δ schedule
    let mut lower = v_bar;
    for &delta in &opts.delta_schedule {
        trace.delta_stages += 1;
        loop {
            if trace.sweeps >= opts.max_sweeps {
                return Err(Error::NoConvergence { iterations: trace.sweeps, gap: f64::INFINITY });
            }
            let next = lower_step(&lower, delta, &mut trace)?;
            let change = rel_change(&next, &lower);
            lower = next;
            if change < opts.tol {
                break;
            }
        }
    }

    // both sequences at δ = 0
    let mut upper = w_bar;
    loop {
        lower = lower_step(&lower, T::zero(), &mut trace)?;
        let c = match opts.acceleration {
            Acceleration::Newton => slopes(&lower, T::zero()),
            Acceleration::Frozen => frozen.clone(),
        };
        let rhs: Vec<T> = shifted(&upper, T::zero()).iter().zip(&c).zip(&upper).map(|((&f, &ci), &u)| f + ci * u).collect();
        let raw = op.solve_shifted(Some(&c), &rhs, outer);
        trace.sweeps += 1;
        let mut next = raw.clone();
        for i in 0..n {
            if raw[i] > upper[i] {
                let rise = (raw[i] - upper[i]) / upper[i].abs().max(floor);
                trace.max_upper_rise = trace.max_upper_rise.max(rise);
                next[i] = upper[i];
            }
            if next[i] < lower[i] {
                next[i] = lower[i];
            }
            if !next[i].is_finite() {
                return Err(Error::NoConvergence { iterations: trace.sweeps, gap: f64::INFINITY });
            }
        }
        upper = next;
        if let Some(it) = trace.upper_iterates.as_mut() {
            it.push(upper.clone());
        }
        let gap = upper
            .iter()
            .zip(&lower)
            .map(|(&u, &l)| if u > T::zero() { (u - l) / u } else { T::zero() })
            .fold(T::zero(), T::max);
        trace.final_gap = gap;
        if gap < opts.tol {
            break;
        }
        if trace.sweeps >= opts.max_sweeps {
            return Err(Error::NoConvergence {
                iterations: trace.sweeps,
                gap: num_traits::ToPrimitive::to_f64(&gap).unwrap_or(f64::NAN),
            });
        }
    }

    Ok(MonotoneSolution {
        w: GridFunction::new(grid.clone(), upper.clone())?,
        barriers,
        bracket: BarrierPair {
            lower: GridFunction::new(grid.clone(), lower)?,
            upper: GridFunction::new(grid, upper)?,
        },
        trace,
    })
}

/// Amplitude `c` of the exact solution `c r^{-γ}` of `-Δw = r^-α w^-s` on
/// `R^N \ {0}`, with `γ = (α-2)/(1+s)`, valid for `2 < α < N + s(N-2)`.
pub fn singular_power_amplitude(dim: u32, alpha: f64, s: f64) -> Option<f64> {
    let gamma = (alpha - 2.0) / (1.0 + s);
    let m = gamma * (dim as f64 - 2.0 - gamma);
    (alpha > 2.0 && m > 0.0).then(|| m.powf(-1.0 / (1.0 + s)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::{assemble_operator, assemble_operator_with, build_grid, OuterBoundary};

    fn grid(r0: f64, r_outer: f64, n: usize) -> Arc<RadialGrid<f64>> {
        Arc::new(build_grid(r0, r_outer, n).unwrap())
    }

    #[test]
    fn z_matches_closed_form_for_quartic_source() {
        let g = grid(1.0, 1e4, 4097);
        let z = barrier_z(&g, 3, &RadialSource::PowerLaw { coefficient: 1.0, exponent: 4.0 }).unwrap();
        for (&r, &x) in g.r().iter().zip(&z.values) {
            let exact = 1.0 / r - 0.5 / (r * r);
            assert!(((x - exact) / exact).abs() < 1e-5, "r = {r}: {x} vs {exact}");
        }
    }

    #[test]
    fn z_of_zero_source_is_zero() {
        let g = grid(1.0, 100.0, 64);
        let z = barrier_z(&g, 3, &RadialSource::Zero).unwrap();
        assert!(z.values.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn z_rejects_nonintegrable_tail() {
        let g = grid(1.0, 100.0, 64);
        let err = barrier_z(&g, 3, &RadialSource::PowerLaw { coefficient: 1.0, exponent: 2.0 }).unwrap_err();
        assert_eq!(err.tag(), "NONINTEGRABLE_SOURCE");
        let sampled: Vec<f64> = g.r().iter().map(|r| r.powf(-1.5)).collect();
        assert!(barrier_z(&g, 3, &RadialSource::Sampled(sampled)).is_err());
    }

    #[test]
    fn w_inverts_the_primitive() {
        let g = grid(1.0, 100.0, 32);
        let z = GridFunction::from_fn(g.clone(), |_| 2.0);
        let w = barrier_w(&z, &Nonlinearity::power(1.0).unwrap());
        assert!(w.values.iter().all(|&x| (x - 2.0).abs() < 1e-14));
        let w0 = barrier_w(&z, &Nonlinearity::power(0.0).unwrap());
        assert_eq!(w0.values, z.values);
        let zr = GridFunction::from_fn(g.clone(), |r| 1.0 / r - 0.5 / (r * r));
        let wr = barrier_w(&zr, &Nonlinearity::power(1.0).unwrap());
        for (&r, &x) in g.r().iter().zip(&wr.values) {
            assert!((x - (2.0 / r - 1.0 / (r * r)).sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_source_with_zero_outer_value_is_degenerate() {
        let g = grid(1.0, 100.0, 64);
        let op = assemble_operator(g.clone(), 3).unwrap();
        let psi = GridFunction::from_fn(g, |_| 0.0);
        let opts = MonotoneOptions { outer_value: Some(0.0), ..Default::default() };
        let err = solve_monotone(&op, &psi, &Nonlinearity::power(1.0).unwrap(), &opts).unwrap_err();
        assert_eq!(err.tag(), "DEGENERATE");
    }

    #[test]
    fn zero_source_propagates_outer_value() {
        let g = grid(1.0, 100.0, 64);
        let op = assemble_operator(g.clone(), 3).unwrap();
        let psi = GridFunction::from_fn(g, |_| 0.0);
        let opts = MonotoneOptions { outer_value: Some(0.5), ..Default::default() };
        let sol = solve_monotone(&op, &psi, &Nonlinearity::power(1.0).unwrap(), &opts).unwrap();
        assert!(sol.w.values.iter().all(|&x| (x - 0.5).abs() < 1e-12));
    }

    #[test]
    fn constant_nonlinearity_reduces_to_a_linear_solve() {
        let g = grid(1.0, 1e4, 1025);
        let op = assemble_operator(g.clone(), 3).unwrap();
        let psi = GridFunction::from_fn(g.clone(), |r| r.powi(-4));
        let exact_outer = 1e-4 - 0.5e-8;
        let opts = MonotoneOptions { outer_value: Some(exact_outer), ..Default::default() };
        let sol = solve_monotone(&op, &psi, &Nonlinearity::Constant, &opts).unwrap();
        let lin = op.solve_shifted(None, &psi.values, exact_outer);
        assert!(rel_change(&sol.w.values, &lin) < 1e-12);
    }

    fn robin_solve(alpha: f64, r_outer: f64, n: usize, record: bool) -> MonotoneSolution<f64> {
        let g = grid(1.0, r_outer, n);
        let decay = ((alpha - 2.0) / 2.0).min(1.0);
        let op = assemble_operator_with(g.clone(), 3, OuterBoundary::Robin { decay }).unwrap();
        let psi = GridFunction::from_fn(g, |r| r.powf(-alpha));
        let opts = MonotoneOptions { record_iterates: record, ..Default::default() };
        solve_monotone(&op, &psi, &Nonlinearity::power(1.0).unwrap(), &opts).unwrap()
    }

    #[test]
    fn converged_solution_satisfies_the_discrete_equation() {
        let sol = robin_solve(3.5, 1e6, 2049, false);
        let g = sol.w.grid.clone();
        let op = assemble_operator_with(g.clone(), 3, OuterBoundary::Robin { decay: 0.75 }).unwrap();
        let f: Vec<f64> = g.r().iter().zip(&sol.w.values).map(|(r, w)| r.powf(-3.5) / w).collect();
        let res = op.normalized_residual(&sol.w.values, &f, 0.0);
        assert!(res.iter().all(|&x| x < 1e-9), "max {}", res.iter().cloned().fold(0.0, f64::max));
        assert!(sol.trace.final_gap < 1e-10);
    }

    #[test]
    fn iterates_are_monotone_and_bracketed() {
        let sol = robin_solve(3.0, 1e4, 1025, true);
        let ups = sol.trace.upper_iterates.as_ref().unwrap();
        let lows = sol.trace.lower_iterates.as_ref().unwrap();
        assert!(ups.len() >= 2 && lows.len() >= 2);
        for pair in ups.windows(2) {
            assert!(pair[1].iter().zip(&pair[0]).all(|(a, b)| a <= b));
        }
        for pair in lows.windows(2) {
            assert!(pair[1].iter().zip(&pair[0]).all(|(a, b)| a >= b));
        }
        for it in ups.iter().chain(lows) {
            assert!(sol.barriers.contains(it, 1e-12));
        }
        assert!(sol.barriers.contains(&sol.w.values, 0.0));
    }

    #[test]
    fn frozen_chord_agrees_with_newton() {
        let g = grid(1.0, 1e3, 257);
        let op = assemble_operator_with(g.clone(), 3, OuterBoundary::Robin { decay: 1.0 }).unwrap();
        let psi = GridFunction::from_fn(g, |r| r.powf(-6.0));
        let nl = Nonlinearity::power(1.0).unwrap();
        let newton = solve_monotone(&op, &psi, &nl, &MonotoneOptions::default()).unwrap();
        let frozen = MonotoneOptions { acceleration: Acceleration::Frozen, max_sweeps: 5000, ..Default::default() };
        let slow = solve_monotone(&op, &psi, &nl, &frozen).unwrap();
        assert!(rel_change(&newton.w.values, &slow.w.values) < 1e-9);
        assert!(slow.trace.sweeps > newton.trace.sweeps);
    }

    #[test]
    fn different_starting_barriers_reach_the_same_solution() {
        let g = grid(1.0, 1e4, 1025);
        let op = assemble_operator_with(g.clone(), 3, OuterBoundary::Robin { decay: 0.5 }).unwrap();
        let psi = GridFunction::from_fn(g, |r| r.powi(-3));
        let nl = Nonlinearity::power(1.0).unwrap();
        let a = solve_monotone(&op, &psi, &nl, &MonotoneOptions::default()).unwrap();
        let b = solve_monotone(&op, &psi, &nl, &MonotoneOptions { upper_scale: 1.5, ..Default::default() }).unwrap();
        assert!(rel_change(&a.w.values, &b.w.values) < 1e-10);
    }

    #[test]
    fn sweep_cap_is_reported() {
        let g = grid(1.0, 1e4, 1025);
        let op = assemble_operator_with(g.clone(), 3, OuterBoundary::Robin { decay: 0.5 }).unwrap();
        let psi = GridFunction::from_fn(g, |r| r.powi(-3));
        let opts = MonotoneOptions { max_sweeps: 3, ..Default::default() };
        let err = solve_monotone(&op, &psi, &Nonlinearity::power(1.0).unwrap(), &opts).unwrap_err();
        assert_eq!(err.tag(), "NO_CONVERGENCE");
    }

    #[test]
    fn amplitude_formula() {
        let c = singular_power_amplitude(3, 3.5, 1.0).unwrap();
        assert!((c - 0.1875f64.powf(-0.5)).abs() < 1e-12);
        assert!(singular_power_amplitude(3, 4.0, 1.0).is_none());
    }

    #[test]
    fn single_precision_linear_case() {
        let g = Arc::new(build_grid(1.0f32, 100.0, 257).unwrap());
        let op = assemble_operator_with(g.clone(), 3, OuterBoundary::Robin { decay: 1.0 }).unwrap();
        let psi = GridFunction::from_fn(g, |r| r.powi(-4));
        let opts = MonotoneOptions { tol: 1e-5, ..Default::default() };
        let sol = solve_monotone(&op, &psi, &Nonlinearity::power(1.0f32).unwrap(), &opts).unwrap();
        assert!(sol.w.is_positive());
    }
}
