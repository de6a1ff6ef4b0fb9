#![allow(dead_code)]

use std::sync::Arc;

use gm_exterior::radial::assemble_operator_with;
use gm_exterior::scalar_solver::{solve_monotone, MonotoneOptions, MonotoneSolution, Nonlinearity};
use gm_exterior::{assemble_operator, build_grid, GridFunction, OuterBoundary, RadialGrid};
use rand::Rng;

pub fn grid(r0: f64, r_outer: f64, n: usize) -> Arc<RadialGrid<f64>> {
    Arc::new(build_grid(r0, r_outer, n).unwrap())
}

/// `-Δw = r^-α w^-s` on `[1, R]`, N = 3, Robin decay matched to the
/// expected far field.
pub fn singular_solve(alpha: f64, s: f64, r_outer: f64, n: usize, record: bool) -> MonotoneSolution<f64> {
    let g = grid(1.0, r_outer, n);
    let decay = ((alpha - 2.0) / (1.0 + s)).min(1.0);
    let op = assemble_operator_with(g.clone(), 3, OuterBoundary::Robin { decay }).unwrap();
    let psi = GridFunction::from_fn(g, |r| r.powf(-alpha));
    let opts = MonotoneOptions { record_iterates: record, ..Default::default() };
    solve_monotone(&op, &psi, &Nonlinearity::power(s).unwrap(), &opts).unwrap()
}

/// Outcome of one randomized comparison instance.
pub struct ComparisonCase {
    pub s: f64,
    pub worst: f64,
}

/// Solves `-Δw = Ψ_i w^-s` with Dirichlet data `b_i` for an ordered pair
/// `Ψ_1 >= Ψ_2`, `b_1 >= b_2`; `worst` is `min (w1 - w2) / w1`, which must
/// not be negative beyond solver tolerance.
pub fn comparison_case(rng: &mut impl Rng) -> ComparisonCase {
    let n = rng.gen_range(33..=129);
    let r_outer = 10f64.powf(rng.gen_range(1.0..3.0));
    let g = grid(1.0, r_outer, n);
    let op = assemble_operator(g.clone(), 3).unwrap();
    let s = rng.gen_range(0.0..3.0);
    let alpha = rng.gen_range(2.5..6.0);
    let psi2: Vec<f64> = g.r().iter().map(|r| rng.gen_range(0.1..1.0) * r.powf(-alpha)).collect();
    let psi1: Vec<f64> = psi2.iter().map(|&x| x * (1.0 + rng.gen_range(0.0..1.0))).collect();
    let b2 = rng.gen_range(0.0..0.1);
    let b1 = b2 + rng.gen_range(0.0..0.1);
    let nl = Nonlinearity::power(s).unwrap();
    let solve = |psi: Vec<f64>, b: f64| {
        let opts = MonotoneOptions { outer_value: Some(b), ..Default::default() };
        solve_monotone(&op, &GridFunction::new(g.clone(), psi).unwrap(), &nl, &opts).unwrap().w.values
    };
    let w1 = solve(psi1, b1);
    let w2 = solve(psi2, b2);
    let worst = w1
        .iter()
        .zip(&w2)
        .map(|(&a, &b)| if a > 0.0 { (a - b) / a } else { a - b })
        .fold(f64::INFINITY, f64::min);
    ComparisonCase { s, worst }
}

/// Every recorded iterate is ordered and inside the barrier pair.
pub fn monotone_violations(sol: &MonotoneSolution<f64>, slack: f64) -> usize {
    let ups = sol.trace.upper_iterates.as_deref().unwrap_or_default();
    let lows = sol.trace.lower_iterates.as_deref().unwrap_or_default();
    let mut bad = 0;
    for pair in ups.windows(2) {
        bad += pair[1].iter().zip(&pair[0]).filter(|(a, b)| a > b).count();
    }
    for pair in lows.windows(2) {
        bad += pair[1].iter().zip(&pair[0]).filter(|(a, b)| a < b).count();
    }
    for it in ups.iter().chain(lows) {
        if !sol.barriers.contains(it, slack) {
            bad += 1;
        }
    }
    if ups.is_empty() || lows.is_empty() {
        bad += 1;
    }
    bad
}
pub mod table;
