//! `solve`: classify, calibrate, iterate, fit, and persist.

use std::sync::Arc;

use gm_exterior::coupled::Calibration;
use gm_exterior::{
    build_grid, classify, compare_profile, fit_power, fit_power_log, AsymptoticProfile, ConstantSchedule, CoupledProblem,
    Error, Exponent, FitResult, GridFunction, Outcome, RegimeVerdict, SourceEnvelope, SystemOptions, SystemSolution,
};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::exit::{self, CliError};

pub const TOL_POWER: f64 = 0.05;
pub const TOL_LOG: f64 = 0.1;
/// Truncation-stability threshold on fitted exponents.
pub const STABILITY_TOL: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRecord {
    pub kind: String,
    pub text: String,
    pub power: f64,
    pub log_power: f64,
}

impl ProfileRecord {
    pub fn of<E: Exponent>(p: &AsymptoticProfile<E>) -> Self {
        ProfileRecord { kind: p.kind().as_str().into(), text: p.to_string(), power: p.power.to_f64(), log_power: p.log_power().to_f64() }
    }

    /// Profile the fit is compared against.
    pub fn target(&self) -> AsymptoticProfile<f64> {
        AsymptoticProfile::power_log(self.power, self.log_power).unwrap_or_else(|_| AsymptoticProfile::pure(self.power))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub outcome: String,
    pub tag: String,
    pub text: String,
    pub sigma: Option<String>,
    pub u: Option<ProfileRecord>,
    pub v: Option<ProfileRecord>,
}

impl VerdictRecord {
    pub fn of<E: Exponent>(verdict: &RegimeVerdict<E>, sigma: Option<E>) -> Self {
        VerdictRecord {
            outcome: verdict.outcome.as_str().into(),
            tag: verdict.matched_condition.clone(),
            text: verdict.to_string(),
            sigma: sigma.map(|s| s.render()),
            u: verdict.u_profile.as_ref().map(ProfileRecord::of),
            v: verdict.v_profile.as_ref().map(ProfileRecord::of),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRecord {
    pub r0: f64,
    #[serde(rename = "R")]
    pub r_outer: f64,
    pub n: usize,
    /// Spacing in `ln r`.
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub fixed_point: f64,
    pub max_iter: usize,
    pub damping: f64,
    pub box_slack: f64,
    pub scalar_gap: f64,
    pub fit_power: f64,
    pub fit_log_power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRecord {
    pub c3: f64,
    pub c4: f64,
    pub inhibitor_ratio: (f64, f64),
    pub activator_ratio: (f64, f64),
}

impl From<&Calibration<f64>> for CalibrationRecord {
    fn from(c: &Calibration<f64>) -> Self {
        CalibrationRecord { c3: c.c3, c4: c.c4, inhibitor_ratio: c.inhibitor_ratio, activator_ratio: c.activator_ratio }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleRecord {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub c6: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub lambda_star: Option<f64>,
    pub lambda_star_star: Option<f64>,
    pub threshold: f64,
    /// `(lhs, rhs)`; the box is invariant when `lhs <= rhs`.
    pub box_inequality: (f64, f64),
    pub box_inequality_holds: bool,
}

impl From<&ConstantSchedule<f64>> for ScheduleRecord {
    fn from(s: &ConstantSchedule<f64>) -> Self {
        ScheduleRecord {
            c1: s.c1,
            c2: s.c2,
            c3: s.c3,
            c4: s.c4,
            c5: s.c5,
            c6: s.c6,
            d: s.d,
            e: s.e,
            f: s.f,
            g: s.g,
            lambda_star: s.lambda_star,
            lambda_star_star: s.lambda_star_star,
            threshold: s.threshold(),
            box_inequality: s.box_inequality(),
            box_inequality_holds: s.box_inequality_holds(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub power: f64,
    pub log_power: f64,
    pub amplitude: f64,
    pub rms_residual: f64,
    pub nodes: usize,
    pub predicted: String,
    pub pass: bool,
    pub power_error: f64,
    pub log_power_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitsRecord {
    pub window: (f64, f64),
    pub u: FitRecord,
    pub v: FitRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxRecord {
    pub window: (f64, f64),
    pub checked_nodes: usize,
    /// Smallest relative margins of `u >= D ψ_u`, `u <= E ψ_u`,
    /// `v >= F ψ_v`, `v <= G ψ_v`.
    pub min_margin: [f64; 4],
    pub violations_final: usize,
    /// Iterates that left the box; counted only when `λ` is within the
    /// threshold.
    pub violations_during_iteration: usize,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRecord {
    pub manifest: String,
    pub window: (f64, f64),
    pub u_power_delta: f64,
    pub v_power_delta: f64,
    pub u_log_power_delta: f64,
    pub v_log_power_delta: f64,
    pub max_delta: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub program: String,
    pub version: String,
    /// Every setting, defaults included; `solve --manifest` replays it.
    pub config: RunConfig,
    pub lambda: f64,
    pub lambda_rule: String,
    pub verdict: VerdictRecord,
    pub grid: GridRecord,
    pub tolerances: Tolerances,
    pub calibration: CalibrationRecord,
    pub schedule: ScheduleRecord,
    pub fits: FitsRecord,
    pub box_check: BoxRecord,
    pub iterations: usize,
    pub final_defect: f64,
    /// Max normalized residuals `|Lw - f| / (|diag||w| + |f|)`.
    pub residuals: (f64, f64),
    /// `max r^k |Lw - f| / max r^k |f|`, a far-field view of the same.
    pub weighted_residuals: (f64, f64),
    pub reference: Option<ReferenceRecord>,
    pub solution_csv: String,
}

/// Converged run, before it is written out.
pub struct Computed {
    pub config: RunConfig,
    pub problem: CoupledProblem<f64>,
    pub solution: SystemSolution<f64>,
    pub verdict: VerdictRecord,
    pub lambda_rule: String,
    pub opts: SystemOptions<f64>,
    pub window: (f64, f64),
    pub fit_u: FitResult<f64>,
    pub fit_v: FitResult<f64>,
}

/// Fits `w` in the shape of `predicted`: with a log factor when the
/// profile has one.
pub fn fit_like(w: &GridFunction<f64>, window: (f64, f64), predicted: &ProfileRecord) -> Result<FitResult<f64>, Error> {
    if predicted.log_power != 0.0 {
        fit_power_log(w, window, w.grid.r0())
    } else {
        fit_power(w, window)
    }
}

fn fit_record(fit: &FitResult<f64>, predicted: &ProfileRecord) -> FitRecord {
    let check = compare_profile(fit, &predicted.target(), TOL_POWER, TOL_LOG);
    FitRecord {
        power: fit.power,
        log_power: fit.log_power,
        amplitude: fit.amplitude,
        rms_residual: fit.rms_residual,
        nodes: fit.nodes,
        predicted: predicted.text.clone(),
        pass: check.pass,
        power_error: check.power_error,
        log_power_error: check.log_power_error,
    }
}

/// Refuses anything the classifier does not place in an existence regime.
pub fn require_existence(config: &RunConfig) -> Result<VerdictRecord, CliError> {
    let exact = config.exact()?;
    let verdict = classify(&exact).map_err(|e| CliError::library(&e))?;
    let record = VerdictRecord::of(&verdict, exact.sigma());
    match verdict.outcome {
        Outcome::Nonexistence => Err(CliError::new(
            exit::NONEXISTENCE,
            format!("refusing to solve: {verdict}; run `gm-ext probe` with the same parameters to watch the truncations degenerate"),
        )),
        Outcome::Inconclusive => {
            Err(CliError::new(exit::INCONCLUSIVE, format!("refusing to solve: {verdict}; no theorem settles this parameter set")))
        }
        _ => Ok(record),
    }
}

pub fn compute(config: &RunConfig) -> Result<Computed, CliError> {
    let verdict = require_existence(config)?;
    let lib = |e: Error| CliError::library(&e);
    let params = config.exact()?.to_scalar::<f64>();
    let env = SourceEnvelope::radial(config.rho0, params.k).map_err(lib)?;
    let grid = Arc::new(build_grid(config.r0, config.r_outer, config.n).map_err(lib)?);
    let window = config.window.unwrap_or_else(|| grid.default_window());
    let (problem, lambda_rule) = match config.fixed_lambda() {
        Some(l) => (CoupledProblem::new(&params.with_lambda(l), &env, grid.clone()).map_err(lib)?, "given".to_string()),
        None => {
            let probe = CoupledProblem::new(&params.with_lambda(1.0), &env, grid.clone()).map_err(lib)?;
            let threshold = probe.schedule(&probe.calibrate().map_err(lib)?).map_err(lib)?.threshold();
            (probe.with_lambda(threshold / 2.0), "auto: half the box threshold".to_string())
        }
    };
    let opts = SystemOptions {
        tol: config.tol,
        max_iter: config.max_iter,
        damping: config.damping,
        box_window: Some(window),
        ..SystemOptions::default()
    };
    let solution = gm_exterior::solve_problem(&problem, &opts).map_err(lib)?;
    let (pu, pv) = (verdict.u.as_ref().expect("existence profile"), verdict.v.as_ref().expect("existence profile"));
    let fit_u = fit_like(&solution.state.u, window, pu).map_err(lib)?;
    let fit_v = fit_like(&solution.state.v, window, pv).map_err(lib)?;
    Ok(Computed { config: config.clone(), problem, solution, verdict, lambda_rule, opts, window, fit_u, fit_v })
}

impl Computed {
    pub fn manifest(&self, csv_name: &str) -> Manifest {
        let pb = &self.problem;
        let sol = &self.solution;
        let state = &sol.state;
        let grid = &pb.grid;
        let (pu, pv) = (self.verdict.u.as_ref().unwrap(), self.verdict.v.as_ref().unwrap());
        Manifest {
            program: "gm-ext".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config: self.config.clone(),
            lambda: pb.params.lambda,
            lambda_rule: self.lambda_rule.clone(),
            verdict: self.verdict.clone(),
            grid: GridRecord { r0: grid.r0(), r_outer: grid.r_outer(), n: grid.n(), h: grid.h() },
            tolerances: Tolerances {
                fixed_point: self.opts.tol,
                max_iter: self.opts.max_iter,
                damping: self.opts.damping,
                box_slack: self.opts.box_slack,
                scalar_gap: pb.scalar_opts.tol,
                fit_power: TOL_POWER,
                fit_log_power: TOL_LOG,
            },
            calibration: (&sol.calibration).into(),
            schedule: (&sol.schedule).into(),
            fits: FitsRecord { window: self.window, u: fit_record(&self.fit_u, pu), v: fit_record(&self.fit_v, pv) },
            box_check: BoxRecord {
                window: self.window,
                checked_nodes: sol.final_box.checked_nodes,
                min_margin: sol.final_box.min_margin,
                violations_final: sol.final_box.violations.len(),
                violations_during_iteration: sol.box_violations,
                holds: sol.final_box.holds(),
            },
            iterations: state.iteration,
            final_defect: sol.defects.last().copied().unwrap_or(f64::NAN),
            residuals: state.residuals,
            weighted_residuals: pb.weighted_residuals(&state.u.values, &state.v.values),
            reference: None,
            solution_csv: csv_name.into(),
        }
    }

    /// `r,u,v,residual_u,residual_v` in shortest round-trip notation.
    pub fn csv(&self) -> Result<Vec<u8>, CliError> {
        let state = &self.solution.state;
        let (ru, rv) = self.problem.residual_profiles(&state.u.values, &state.v.values);
        let mut w = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| CliError::new(exit::IO, format!("writing CSV: {e}"));
        w.write_record(["r", "u", "v", "residual_u", "residual_v"]).map_err(fail)?;
        for (i, r) in self.problem.grid.r().iter().enumerate() {
            let row = [*r, state.u.values[i], state.v.values[i], ru[i], rv[i]].map(|x| format!("{x:e}"));
            w.write_record(&row).map_err(fail)?;
        }
        w.into_inner().map_err(|e| CliError::new(exit::IO, format!("writing CSV: {e}")))
    }

    /// Refits on the reference run's window and records the exponent drift.
    pub fn compare_reference(&self, reference: &Manifest, path: &str) -> Result<ReferenceRecord, CliError> {
        let window = reference.fits.window;
        let lib = |e: Error| CliError::library(&e);
        let (pu, pv) = (self.verdict.u.as_ref().unwrap(), self.verdict.v.as_ref().unwrap());
        let fu = fit_like(&self.solution.state.u, window, pu).map_err(lib)?;
        let fv = fit_like(&self.solution.state.v, window, pv).map_err(lib)?;
        let deltas = [
            (fu.power - reference.fits.u.power).abs(),
            (fv.power - reference.fits.v.power).abs(),
            (fu.log_power - reference.fits.u.log_power).abs(),
            (fv.log_power - reference.fits.v.log_power).abs(),
        ];
        let max_delta = deltas.iter().copied().fold(0.0, f64::max);
        Ok(ReferenceRecord {
            manifest: path.into(),
            window,
            u_power_delta: deltas[0],
            v_power_delta: deltas[1],
            u_log_power_delta: deltas[2],
            v_log_power_delta: deltas[3],
            max_delta,
            stable: max_delta < STABILITY_TOL,
        })
    }
}
