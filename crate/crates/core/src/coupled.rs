//! The fixed-point map `H(u, v) = (Tu, Tv)` of the full system on a
//! truncated grid, its invariant box, and a damped Picard driver.
//!
//! `Tu` solves the linear activator equation with the current right-hand
//! side, `Tv` solves the singular inhibitor equation `-Δw = u^m w^-s` by
//! the monotone scalar solver. Both operators close the grid with a Robin
//! row matched to the predicted decay, so truncation does not pin the far
//! field to an artificial value.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model_params::{
    classify, constant_schedule, AsymptoticProfile, ConstantSchedule, ExponentSet, ProfileShape, RegimeVerdict,
    SourceEnvelope, SystemKind,
};
use crate::radial::{assemble_operator_with, GridFunction, OuterBoundary, RadialGrid, RadialOperator};
use crate::scalar::{lit, Exponent, Scalar};
use crate::scalar_solver::{solve_monotone, MonotoneOptions, Nonlinearity};

/// Values outside `[1e-30, 1e30]` abort a solve.
pub const VALUE_RANGE: (f64, f64) = (1e-30, 1e30);

/// Samples of a predicted profile used as a box shape.
///
/// Log factors are taken as `log(e r / r0)` so that the shape stays
/// positive at `r0`; this changes nothing at infinity.
pub fn profile_shape<T: Scalar + Exponent>(profile: &AsymptoticProfile<T>, r: T) -> T {
    match &profile.shape {
        ProfileShape::PowerLog { log_power } => {
            r.powf(profile.power) * (T::one() + (r / profile.r0).ln()).powf(*log_power)
        }
        _ => profile.eval(r),
    }
}

/// `-d ln ψ / d ln r` of [`profile_shape`] at `r`.
pub fn shape_decay<T: Scalar + Exponent>(profile: &AsymptoticProfile<T>, r: T) -> T {
    match &profile.shape {
        ProfileShape::PowerLog { log_power } => -(profile.power + *log_power / (T::one() + (r / profile.r0).ln())),
        _ => -profile.log_slope(r),
    }
}

/// Everything about one coupled problem that does not change between
/// iterations.
#[derive(Debug, Clone)]
pub struct CoupledProblem<T> {
    pub params: ExponentSet<T>,
    pub env: SourceEnvelope<T>,
    pub grid: Arc<RadialGrid<T>>,
    pub verdict: RegimeVerdict<T>,
    pub u_profile: AsymptoticProfile<T>,
    pub v_profile: AsymptoticProfile<T>,
    pub u_shape: Vec<T>,
    pub v_shape: Vec<T>,
    pub rho: Vec<T>,
    pub u_op: RadialOperator<T>,
    pub v_op: RadialOperator<T>,
    pub scalar_opts: MonotoneOptions<T>,
}

impl<T: Scalar + Exponent> CoupledProblem<T> {
    pub fn new(params: &ExponentSet<T>, env: &SourceEnvelope<T>, grid: Arc<RadialGrid<T>>) -> Result<Self> {
        params.validate()?;
        grid.check_solver_size()?;
        if !matches!(params.kind, SystemKind::Gm | SystemKind::Mixed) {
            return Err(Error::Regime { outcome: "NONEXISTENCE".into(), tag: "Thm7.1(i)".into() });
        }
        let verdict = classify(params)?;
        if !verdict.outcome.is_existence() {
            return Err(Error::Regime {
                outcome: verdict.outcome.as_str().into(),
                tag: verdict.matched_condition.clone(),
            });
        }
        let r0 = grid.r0();
        let u_profile = verdict.u_profile.clone().expect("existence carries profiles").with_r0(r0);
        let v_profile = verdict.v_profile.clone().expect("existence carries profiles").with_r0(r0);
        let r_outer = grid.r_outer();
        let u_op = assemble_operator_with(grid.clone(), params.dim, OuterBoundary::Robin { decay: shape_decay(&u_profile, r_outer) })?;
        let v_op = assemble_operator_with(grid.clone(), params.dim, OuterBoundary::Robin { decay: shape_decay(&v_profile, r_outer) })?;
        let u_shape = grid.r().iter().map(|&r| profile_shape(&u_profile, r)).collect();
        let v_shape = grid.r().iter().map(|&r| profile_shape(&v_profile, r)).collect();
        let rho = grid.r().iter().map(|&r| env.rho(r)).collect();
        let scalar_opts = MonotoneOptions { tol: lit(1e-11), ..MonotoneOptions::default() };
        Ok(CoupledProblem {
            params: params.clone(),
            env: *env,
            grid,
            verdict,
            u_profile,
            v_profile,
            u_shape,
            v_shape,
            rho,
            u_op,
            v_op,
            scalar_opts,
        })
    }

    /// Source of the activator equation at `(u, v)`.
    pub fn activator_source(&self, u: &[T], v: &[T]) -> Vec<T> {
        let (p, q, lambda) = (self.params.p, self.params.q, self.params.lambda);
        u.iter()
            .zip(v)
            .zip(&self.rho)
            .map(|((&a, &b), &rho)| match self.params.kind {
                SystemKind::Mixed => b.powf(q) / a.powf(p) + lambda * rho,
                _ => a.powf(p) / b.powf(q) + lambda * rho,
            })
            .collect()
    }

    fn inhibitor_weight(&self, u: &[T]) -> Vec<T> {
        u.iter().map(|&a| a.powf(self.params.m)).collect()
    }

    fn nonlinearity(&self) -> Result<Nonlinearity<T>> {
        Nonlinearity::power(self.params.s)
    }

    /// Nodewise normalized residuals (see
    /// [`RadialOperator::normalized_residual`]) of both equations.
    pub fn residual_profiles(&self, u: &[T], v: &[T]) -> (Vec<T>, Vec<T>) {
        let fu = self.activator_source(u, v);
        let fv: Vec<T> = self.inhibitor_weight(u).iter().zip(v).map(|(&w, &b)| w * b.powf(-self.params.s)).collect();
        (self.u_op.normalized_residual(u, &fu, T::zero()), self.v_op.normalized_residual(v, &fv, T::zero()))
    }

    /// [`Self::residual_profiles`] maximized over the grid.
    pub fn residuals(&self, u: &[T], v: &[T]) -> (T, T) {
        let (ru, rv) = self.residual_profiles(u, v);
        let max = |x: Vec<T>| x.into_iter().fold(T::zero(), T::max);
        (max(ru), max(rv))
    }

    /// `max |L u - f| r^k / max |f| r^k` for each equation.
    pub fn weighted_residuals(&self, u: &[T], v: &[T]) -> (T, T) {
        let k = self.params.k;
        let fu = self.activator_source(u, v);
        let fv: Vec<T> = self.inhibitor_weight(u).iter().zip(v).map(|(&w, &b)| w * b.powf(-self.params.s)).collect();
        let weighted = |res: Vec<T>, f: &[T], pde: usize| -> T {
            let r = self.grid.r();
            let num = (0..pde).map(|i| res[i].abs() * r[i].powf(k)).fold(T::zero(), T::max);
            let den = (0..pde).map(|i| f[i].abs() * r[i].powf(k)).fold(T::zero(), T::max);
            num / den.max(T::min_positive_value())
        };
        (
            weighted(self.u_op.residual(u, &fu, T::zero()), &fu, self.u_op.pde_rows()),
            weighted(self.v_op.residual(v, &fv, T::zero()), &fv, self.v_op.pde_rows()),
        )
    }

    /// Reads `C3 <= C4` off the four scalar comparison problems: the
    /// inhibitor driven by `ψ_u^m`, and the activator driven by `r^-k` and
    /// by the upper source envelope.
    pub fn calibrate(&self) -> Result<Calibration<T>> {
        let weight: Vec<T> = self.u_shape.iter().map(|&a| a.powf(self.params.m)).collect();
        let psi = GridFunction::new(self.grid.clone(), weight)?;
        let inhibitor = solve_monotone(&self.v_op, &psi, &self.nonlinearity()?, &self.scalar_opts)
            .map_err(|e| e.context("inhibitor comparison problem"))?;
        let k = self.params.k;
        let decay: Vec<T> = self.grid.r().iter().map(|&r| r.powf(-k)).collect();
        let low = self.u_op.solve_shifted(None, &decay, T::zero());
        let (p, q) = (self.params.p, self.params.q);
        let envelope: Vec<T> = self
            .u_shape
            .iter()
            .zip(&self.v_shape)
            .zip(&decay)
            .map(|((&a, &b), &d)| match self.params.kind {
                SystemKind::Mixed => b.powf(q) / a.powf(p) + d,
                _ => a.powf(p) / b.powf(q) + d,
            })
            .collect();
        let high = self.u_op.solve_shifted(None, &envelope, T::zero());
        let ratios = |w: &[T], shape: &[T]| -> (T, T) {
            w.iter().zip(shape).fold((T::infinity(), T::zero()), |(lo, hi), (&a, &b)| (lo.min(a / b), hi.max(a / b)))
        };
        let (vi_lo, vi_hi) = ratios(&inhibitor.w.values, &self.v_shape);
        let (ua_lo, _) = ratios(&low, &self.u_shape);
        let (_, ub_hi) = ratios(&high, &self.u_shape);
        Ok(Calibration { c3: vi_lo.min(ua_lo), c4: vi_hi.max(ub_hi), inhibitor_ratio: (vi_lo, vi_hi), activator_ratio: (ua_lo, ub_hi) })
    }

    /// Schedule at the problem's `λ` from calibrated constants.
    pub fn schedule(&self, cal: &Calibration<T>) -> Result<ConstantSchedule<T>> {
        constant_schedule(&self.params, &self.env, cal.c3, cal.c4)
    }

    /// Same problem at another `λ`.
    pub fn with_lambda(&self, lambda: T) -> Self {
        let mut out = self.clone();
        out.params.lambda = lambda;
        out
    }

    /// Box midpoint `(sqrt(DE) ψ_u, sqrt(FG) ψ_v)`.
    pub fn midpoint(&self, schedule: &ConstantSchedule<T>) -> Result<CoupledState<T>> {
        let a = (schedule.d * schedule.e).sqrt();
        let b = (schedule.f * schedule.g).sqrt();
        self.state_from_shapes(a, b)
    }

    /// `(a ψ_u, b ψ_v)`.
    pub fn state_from_shapes(&self, a: T, b: T) -> Result<CoupledState<T>> {
        let u: Vec<T> = self.u_shape.iter().map(|&x| a * x).collect();
        let v: Vec<T> = self.v_shape.iter().map(|&x| b * x).collect();
        self.state(u, v, 0)
    }

    pub fn state(&self, u: Vec<T>, v: Vec<T>, iteration: usize) -> Result<CoupledState<T>> {
        check_range(&u)?;
        check_range(&v)?;
        let residuals = self.residuals(&u, &v);
        Ok(CoupledState {
            u: GridFunction::new(self.grid.clone(), u)?,
            v: GridFunction::new(self.grid.clone(), v)?,
            iteration,
            residuals,
        })
    }

    /// One undamped application of `H`.
    pub fn apply_h(&self, state: &CoupledState<T>) -> Result<CoupledState<T>> {
        let (u, v) = (&state.u.values, &state.v.values);
        let f = self.activator_source(u, v);
        let tu = self.u_op.solve_shifted(None, &f, T::zero());
        let psi = GridFunction::new(self.grid.clone(), self.inhibitor_weight(u))?;
        let tv = solve_monotone(&self.v_op, &psi, &self.nonlinearity()?, &self.scalar_opts)
            .map_err(|e| e.context(format!("inhibitor solve at iteration {}", state.iteration + 1)))?;
        self.state(tu, tv.w.values, state.iteration + 1)
    }

    /// Nodewise check of the four box inequalities, optionally restricted
    /// to `window`. `rel_slack` absorbs solver tolerance.
    pub fn verify_box(
        &self,
        state: &CoupledState<T>,
        schedule: &ConstantSchedule<T>,
        window: Option<(T, T)>,
        rel_slack: T,
    ) -> BoxReport<T> {
        let idx = match window {
            Some((lo, hi)) => self.grid.window_indices(lo, hi),
            None => 0..self.grid.n(),
        };
        let mut report = BoxReport { checked_nodes: idx.len(), min_margin: [T::infinity(); 4], violations: Vec::new() };
        for i in idx {
            let bounds = [
                (BoxBound::ULower, state.u.values[i], schedule.d * self.u_shape[i]),
                (BoxBound::UUpper, state.u.values[i], schedule.e * self.u_shape[i]),
                (BoxBound::VLower, state.v.values[i], schedule.f * self.v_shape[i]),
                (BoxBound::VUpper, state.v.values[i], schedule.g * self.v_shape[i]),
            ];
            for (slot, (which, value, bound)) in bounds.into_iter().enumerate() {
                let margin = match which {
                    BoxBound::ULower | BoxBound::VLower => value / bound - T::one(),
                    BoxBound::UUpper | BoxBound::VUpper => T::one() - value / bound,
                };
                report.min_margin[slot] = report.min_margin[slot].min(margin);
                if margin < -rel_slack {
                    report.violations.push(BoxViolation { node: i, r: self.grid.r()[i], which, margin });
                }
            }
        }
        report
    }
}

fn check_range<T: Scalar>(x: &[T]) -> Result<()> {
    let (lo, hi) = (lit::<T>(VALUE_RANGE.0), lit::<T>(VALUE_RANGE.1));
    for (node, &value) in x.iter().enumerate() {
        if !(value >= lo && value <= hi) {
            return Err(Error::Diverged { node, value: num_traits::ToPrimitive::to_f64(&value).unwrap_or(f64::NAN) });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration<T> {
    pub c3: T,
    pub c4: T,
    /// `(min, max)` of `w/ψ_v` for the inhibitor comparison problem.
    pub inhibitor_ratio: (T, T),
    /// `min w/ψ_u` for the `r^-k` problem, `max w/ψ_u` for the envelope.
    pub activator_ratio: (T, T),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoupledState<T> {
    pub u: GridFunction<T>,
    pub v: GridFunction<T>,
    pub iteration: usize,
    /// Normalized residuals of the activator and inhibitor equations.
    pub residuals: (T, T),
}

impl<T: Scalar> CoupledState<T> {
    /// `max |a - b| / max(|a|, |b|)` over both fields.
    pub fn distance(&self, other: &CoupledState<T>) -> T {
        let d = |a: &[T], b: &[T]| {
            a.iter().zip(b).map(|(&x, &y)| (x - y).abs() / x.abs().max(y.abs())).fold(T::zero(), T::max)
        };
        d(&self.u.values, &other.u.values).max(d(&self.v.values, &other.v.values))
    }

    /// `min u r^{N-2}` and `min v r^{N-2}`.
    pub fn superharmonic_floor(&self, dim: u32) -> (T, T) {
        let e: T = lit(dim as f64 - 2.0);
        let floor = |w: &GridFunction<T>| {
            w.grid.r().iter().zip(&w.values).map(|(&r, &x)| x * r.powf(e)).fold(T::infinity(), T::min)
        };
        (floor(&self.u), floor(&self.v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoxBound {
    ULower,
    UUpper,
    VLower,
    VUpper,
}

impl BoxBound {
    pub fn as_str(self) -> &'static str {
        match self {
            BoxBound::ULower => "D*psi_u <= u",
            BoxBound::UUpper => "u <= E*psi_u",
            BoxBound::VLower => "F*psi_v <= v",
            BoxBound::VUpper => "v <= G*psi_v",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxViolation<T> {
    pub node: usize,
    pub r: T,
    pub which: BoxBound,
    /// Relative margin; negative means outside.
    pub margin: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxReport<T> {
    pub checked_nodes: usize,
    /// Smallest relative margin per bound, in [`BoxBound`] order.
    pub min_margin: [T; 4],
    pub violations: Vec<BoxViolation<T>>,
}

impl<T: Scalar> BoxReport<T> {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

impl<T: Scalar> fmt::Display for BoxReport<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} nodes, {} violations, min margins", self.checked_nodes, self.violations.len())?;
        for (b, m) in [BoxBound::ULower, BoxBound::UUpper, BoxBound::VLower, BoxBound::VUpper].iter().zip(&self.min_margin) {
            write!(f, " [{}: {:.3e}]", b.as_str(), m)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemOptions<T> {
    /// Stop when `H` moves the state by less than this, relatively.
    pub tol: T,
    pub max_iter: usize,
    /// `θ` in `x <- (1-θ) x + θ H(x)`.
    pub damping: T,
    /// Check the box at every iterate on this window, when a schedule is
    /// attached.
    pub box_window: Option<(T, T)>,
    pub box_slack: T,
}

impl<T: Scalar> Default for SystemOptions<T> {
    fn default() -> Self {
        SystemOptions { tol: lit(1e-10), max_iter: 500, damping: lit(0.5), box_window: None, box_slack: lit(1e-9) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemSolution<T> {
    pub state: CoupledState<T>,
    pub calibration: Calibration<T>,
    pub schedule: ConstantSchedule<T>,
    /// Fixed-point defect after each iteration.
    pub defects: Vec<T>,
    /// Iterates that left the box (counted only when `λ` is within the
    /// threshold, where the box is guaranteed invariant).
    pub box_violations: usize,
    pub final_box: BoxReport<T>,
}

/// Damped Picard iteration on `H` from `start`.
pub fn iterate<T: Scalar + Exponent>(
    problem: &CoupledProblem<T>,
    start: CoupledState<T>,
    schedule: Option<&ConstantSchedule<T>>,
    opts: &SystemOptions<T>,
) -> Result<(CoupledState<T>, Vec<T>, usize)> {
    if !(opts.damping > T::zero() && opts.damping <= T::one()) {
        return Err(Error::InvalidParameter(format!("damping {} is not in (0, 1]", opts.damping)));
    }
    let theta = opts.damping;
    let mut state = start;
    let mut defects = Vec::new();
    let mut violations = 0;
    loop {
        let image = problem.apply_h(&state)?;
        let defect = image.distance(&state);
        defects.push(defect);
        let mix = |a: &[T], b: &[T]| -> Vec<T> { a.iter().zip(b).map(|(&x, &y)| (T::one() - theta) * x + theta * y).collect() };
        let next = problem.state(mix(&state.u.values, &image.u.values), mix(&state.v.values, &image.v.values), image.iteration)?;
        if let Some(s) = schedule {
            if !problem.verify_box(&next, s, opts.box_window, opts.box_slack).holds() {
                violations += 1;
            }
        }
        state = next;
        if defect < opts.tol {
            return Ok((state, defects, violations));
        }
        if state.iteration >= opts.max_iter {
            return Err(Error::NoConvergence {
                iterations: state.iteration,
                gap: num_traits::ToPrimitive::to_f64(&defect).unwrap_or(f64::NAN),
            });
        }
    }
}

/// Calibrates the box, starts at its midpoint and iterates to a fixed
/// point of `H`.
///
/// Needs `λ > 0`. The box is checked along the way only when `λ` is at
/// most the threshold of the schedule.
pub fn solve_system<T: Scalar + Exponent>(
    params: &ExponentSet<T>,
    env: &SourceEnvelope<T>,
    grid: Arc<RadialGrid<T>>,
    opts: &SystemOptions<T>,
) -> Result<SystemSolution<T>> {
    let problem = CoupledProblem::new(params, env, grid)?;
    solve_problem(&problem, opts)
}

pub fn solve_problem<T: Scalar + Exponent>(problem: &CoupledProblem<T>, opts: &SystemOptions<T>) -> Result<SystemSolution<T>> {
    if !(problem.params.lambda > T::zero()) {
        return Err(Error::InvalidParameter("coupled solves need λ > 0".into()));
    }
    let calibration = problem.calibrate()?;
    let schedule = problem.schedule(&calibration)?;
    let start = problem.midpoint(&schedule)?;
    let within = problem.params.lambda <= schedule.threshold();
    let (state, defects, box_violations) = iterate(problem, start, within.then_some(&schedule), opts)?;
    let final_box = problem.verify_box(&state, &schedule, opts.box_window, opts.box_slack);
    Ok(SystemSolution { state, calibration, schedule, defects, box_violations, final_box })
}
