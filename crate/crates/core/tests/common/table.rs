//! Hand-checked classification table. Each row was worked out from the
//! theorem hypotheses by hand; the comment gives the deciding arithmetic.

use gm_exterior::{classify, parse_rational, AsymptoticProfile, BigRational, Exponent, ExponentSet, SystemKind};

use SystemKind::{Gm, Mixed, NegActivator, NegBoth};

pub struct Row {
    pub dim: u32,
    pub kind: SystemKind,
    /// p, q, m, s, k
    pub x: [&'static str; 5],
    pub outcome: &'static str,
    pub tag: &'static str,
    /// u power, v power, v log power
    pub profiles: Option<(&'static str, &'static str, &'static str)>,
}

const fn row(
    dim: u32,
    kind: SystemKind,
    x: [&'static str; 5],
    outcome: &'static str,
    tag: &'static str,
    profiles: Option<(&'static str, &'static str, &'static str)>,
) -> Row {
    Row { dim, kind, x, outcome, tag, profiles }
}

const NON: &str = "NONEXISTENCE";
const MIN: &str = "EXISTS_MINIMAL_GROWTH";
const FAST: &str = "EXISTS_FAST_GROWTH";
const MIX: &str = "EXISTS_MIXED_MINIMAL";
const INC: &str = "INCONCLUSIVE";

#[rustfmt::skip]
pub const TABLE: &[Row] = &[
    // planar
    row(2, Gm, ["5", "1", "6", "1", "4"], NON, "Thm2.1(i)", None),
    row(2, Gm, ["1/2", "1/2", "1/2", "1/2", "1"], NON, "Thm2.1(i)", None),
    // m <= 2/(N-2), equality included
    row(3, Gm, ["5", "1", "2", "1", "4"], NON, "Thm2.1(ii)", None),
    row(3, Gm, ["5", "1", "1", "1", "4"], NON, "Thm2.1(ii)", None),
    row(4, Gm, ["5", "1", "1", "1", "5"], NON, "Thm2.1(ii)", None),
    row(5, Gm, ["5", "1", "3/5", "1", "6"], NON, "Thm2.1(ii)", None),
    row(3, Gm, ["1", "1", "1", "1", "4"], NON, "Thm2.1(ii)", None),
    row(3, Gm, ["1/2", "1", "1", "1", "4"], NON, "Thm2.1(ii)", None),
    // p <= N/(N-2), equality included; p <= 1 lands here before σ is needed
    row(4, Gm, ["2", "1", "3", "1", "5"], NON, "Thm2.1(iii)", None),
    row(3, Gm, ["3", "1", "6", "1", "4"], NON, "Thm2.1(iii)", None),
    row(3, Gm, ["1/2", "1", "6", "1", "4"], NON, "Thm2.1(iii)", None),
    row(3, Gm, ["5/2", "1", "5/2", "1", "4"], NON, "Thm2.1(iii)", None),
    row(5, Gm, ["5/3", "1", "3", "1", "6"], NON, "Thm2.1(iii)", None),
    // σ = mq/((p-1)(1+s)) >= 1
    row(3, Gm, ["5", "2", "6", "1", "4"], INC, "sigma>=1", None),          // σ = 12/8
    row(3, Gm, ["4", "1", "6", "1", "4"], INC, "sigma>=1", None),          // σ = 1 exactly
    // condition (ii) forces σ > 1: here σ = 12/10
    row(3, Gm, ["6", "3", "4", "1", "4"], INC, "sigma>=1", None),
    // k against N
    row(3, Gm, ["5", "1", "6", "1", "3"], INC, "k=N", None),
    row(3, Gm, ["5", "1", "6", "1", "2"], INC, "k<=2", None),
    row(3, Gm, ["5", "1", "6", "1", "1"], INC, "k<=2", None),
    // minimal growth (i): m >= s+3, p > q+3, σ = 6/8
    row(3, Gm, ["5", "1", "6", "1", "4"], MIN, "Thm2.2(i)", Some(("-1", "-1", "0"))),
    row(3, Gm, ["5", "1", "6", "1", "10"], MIN, "Thm2.2(i)", Some(("-1", "-1", "0"))),
    // m = s+3 exactly: the inhibitor sits on the log-corrected branch
    row(3, Gm, ["5", "1", "4", "1", "4"], MIN, "Thm2.2(i)", Some(("-1", "-1", "1/2"))),
    row(4, Gm, ["4", "1", "4", "1", "5"], MIN, "Thm2.2(i)", Some(("-2", "-2", "0"))),
    row(6, Gm, ["3", "1", "3", "1", "7"], MIN, "Thm2.2(i)", Some(("-4", "-4", "0"))),
    row(6, Gm, ["3", "1", "5/2", "1", "7"], MIN, "Thm2.2(i)", Some(("-4", "-4", "1/2"))),
    // p = q+3 is not strict enough for (i); σ = 6/9
    row(3, Gm, ["4", "1", "6", "2", "4"], INC, "Thm2.2:no-branch", None),
    // minimal growth (iii): 2 < m < s+3, p > q(m-2)/(1+s) + 3
    row(3, Gm, ["6", "2", "3", "1", "4"], MIN, "Thm2.2(iii)", Some(("-1", "-1/2", "0"))),
    row(3, Gm, ["5", "1", "5/2", "1", "4"], MIN, "Thm2.2(iii)", Some(("-1", "-1/4", "0"))),
    row(3, Gm, ["4", "1", "11/5", "1", "4"], MIN, "Thm2.2(iii)", Some(("-1", "-1/10", "0"))),
    row(4, Gm, ["4", "1", "2", "1", "5"], MIN, "Thm2.2(iii)", Some(("-2", "-1", "0"))),
    // (iii) boundary p = 1/2 + 3
    row(3, Gm, ["7/2", "1", "3", "1", "4"], INC, "Thm2.2:no-branch", None),
    // fast growth (i): a = k-2, m >= (N+s(N-2))/a, p >= q(N-2)/a + 1 + 2/a
    row(3, Gm, ["7", "1/2", "9", "1", "5/2"], FAST, "Thm2.3(i)", Some(("-1/2", "-1", "0"))),
    row(3, Gm, ["6", "1/2", "9", "1", "5/2"], FAST, "Thm2.3(i)", Some(("-1/2", "-1", "0"))), // p on the bound
    row(3, Gm, ["7", "1/2", "8", "1", "5/2"], FAST, "Thm2.3(i)", Some(("-1/2", "-1", "1/2"))), // m on the bound
    row(4, Gm, ["6", "1", "7", "1", "3"], FAST, "Thm2.3(i)", Some(("-1", "-2", "0"))),
    // fast growth (ii): 2/a < m < (N+s(N-2))/a
    row(3, Gm, ["6", "1/2", "6", "1", "5/2"], FAST, "Thm2.3(ii)", Some(("-1/2", "-1/2", "0"))),
    row(4, Gm, ["9", "1", "5", "1", "3"], FAST, "Thm2.3(ii)", Some(("-1", "-3/2", "0"))),
    // k = 7/2 exceeds N = 3, so these are minimal-growth sets, not fast growth
    row(3, Gm, ["4", "3/2", "3", "1", "7/2"], MIN, "Thm2.2(iii)", Some(("-1", "-1/2", "0"))),
    row(3, Gm, ["4", "3/2", "8/3", "1", "7/2"], MIN, "Thm2.2(iii)", Some(("-1", "-1/3", "0"))),
    row(3, Gm, ["4", "1", "2", "1", "7/2"], NON, "Thm2.1(ii)", None),
    // p below both bounds, or m at 2/a
    row(3, Gm, ["5", "1/2", "9", "1", "5/2"], INC, "Thm2.3:no-branch", None),
    row(3, Gm, ["20", "1", "4", "1", "5/2"], INC, "Thm2.3:no-branch", None),
    row(3, Gm, ["5", "1", "6", "1", "5/2"], INC, "Thm2.3:no-branch", None),
    // mixed system
    row(2, Mixed, ["1", "5", "5", "1", "4"], NON, "Thm7.1(ii1)", None),
    row(3, Mixed, ["1", "2", "5", "1", "4"], NON, "Thm7.1(ii2)", None),
    row(3, Mixed, ["1", "5", "2", "1", "4"], NON, "Thm7.1(ii2)", None),
    row(4, Mixed, ["1", "1", "5", "1", "5"], NON, "Thm7.1(ii2)", None),
    row(3, Mixed, ["1", "9/2", "5", "1", "4"], MIX, "Thm7.2", Some(("-1", "-1", "0"))),
    row(4, Mixed, ["1", "4", "4", "1", "5"], MIX, "Thm7.2", Some(("-2", "-2", "0"))),
    row(3, Mixed, ["1", "4", "5", "1", "4"], INC, "Thm7.2:copt-fails", None), // q = p+3
    row(3, Mixed, ["1", "5", "4", "1", "4"], INC, "Thm7.2:copt-fails", None), // m = s+3
    row(3, Mixed, ["1", "5", "5", "1", "3"], INC, "Thm7.2:copt-fails", None), // k = N
    // sign-flipped systems
    row(3, NegActivator, ["1", "1", "1", "1", "4"], NON, "Thm7.1(i)", None),
    row(2, NegActivator, ["5", "1", "6", "1", "4"], NON, "Thm7.1(i)", None),
    row(3, NegBoth, ["5", "1", "6", "1", "4"], NON, "Thm7.1(i)", None),
    row(5, NegBoth, ["1/2", "7", "1/3", "2", "9"], NON, "Thm7.1(i)", None),
];

pub fn build<E: Exponent>(row: &Row, parse: impl Fn(&str) -> E) -> ExponentSet<E> {
    let [p, q, m, s, k] = row.x.map(&parse);
    ExponentSet::new(row.dim, p, q, m, s, k, E::one(), row.kind).unwrap()
}

pub fn check<E: Exponent>(row: &Row, params: &ExponentSet<E>, close: impl Fn(&E, &str) -> bool) -> Result<(), String> {
    let v = classify(params).map_err(|e| e.to_string())?;
    if v.outcome.as_str() != row.outcome || v.matched_condition != row.tag {
        return Err(format!("got {} {}", v.outcome.as_str(), v.matched_condition));
    }
    let same = |prof: &Option<AsymptoticProfile<E>>, power: &str, log: &str| {
        prof.as_ref().is_some_and(|p| close(&p.power, power) && close(&p.log_power(), log))
    };
    match row.profiles {
        None if v.u_profile.is_some() || v.v_profile.is_some() => Err("unexpected profiles".into()),
        None => Ok(()),
        Some((u, vp, vl)) if same(&v.u_profile, u, "0") && same(&v.v_profile, vp, vl) => Ok(()),
        Some(_) => Err(format!("profiles {:?} / {:?}", v.u_profile, v.v_profile)),
    }
}

/// Mismatches against the table, exact arithmetic first, then `f64`.
pub fn failures() -> Vec<String> {
    let exact = |t: &str| parse_rational(t).unwrap();
    let float = |t: &str| exact(t).to_f64();
    let mut out = Vec::new();
    for (i, row) in TABLE.iter().enumerate() {
        let params: ExponentSet<BigRational> = build(row, exact);
        if let Err(e) = check(row, &params, |x, t| *x == exact(t)) {
            out.push(format!("row {i} {:?} (exact): {e}", row.x));
        }
        let params: ExponentSet<f64> = build(row, float);
        if let Err(e) = check(row, &params, |x, t| (x - float(t)).abs() < 1e-12) {
            out.push(format!("row {i} {:?} (f64): {e}", row.x));
        }
    }
    out
}
