//! Problem parameters, the regime classifier and the constant schedule of
//! the box argument.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::{lit, to_scalar, Exponent, Scalar};

/// Which sign pattern of the activator-inhibitor system is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SystemKind {
    /// `-Δu = u^p/v^q + λρ`, `-Δv = u^m/v^s`.
    Gm,
    /// `-Δu = 1/(u^p v^q) + λρ`, `-Δv = u^m/v^s`.
    NegActivator,
    /// `-Δu = 1/(u^p v^q) + λρ`, `-Δv = 1/(u^m v^s)`.
    NegBoth,
    /// `-Δu = v^q/u^p + λρ`, `-Δv = u^m/v^s`.
    Mixed,
}

impl SystemKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SystemKind::Gm => "GM",
            SystemKind::NegActivator => "NEG_ACTIVATOR",
            SystemKind::NegBoth => "NEG_BOTH",
            SystemKind::Mixed => "MIXED",
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SystemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "GM" => Ok(SystemKind::Gm),
            "NEG_ACTIVATOR" => Ok(SystemKind::NegActivator),
            "NEG_BOTH" => Ok(SystemKind::NegBoth),
            "MIXED" => Ok(SystemKind::Mixed),
            _ => Err(Error::UnknownKind(s.to_string())),
        }
    }
}

/// The exponents `(N, p, q, m, s, k, λ)` that identify a problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentSet<E> {
    pub dim: u32,
    pub p: E,
    pub q: E,
    pub m: E,
    pub s: E,
    pub k: E,
    pub lambda: E,
    pub kind: SystemKind,
}

impl<E: Exponent> ExponentSet<E> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(dim: u32, p: E, q: E, m: E, s: E, k: E, lambda: E, kind: SystemKind) -> Result<Self> {
        let set = ExponentSet { dim, p, q, m, s, k, lambda, kind };
        set.validate()?;
        Ok(set)
    }

    /// GM system with `λ = 0`; most callers set `lambda` afterwards.
    pub fn gm(dim: u32, p: E, q: E, m: E, s: E, k: E) -> Result<Self> {
        Self::new(dim, p, q, m, s, k, E::zero(), SystemKind::Gm)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidParameter(format!("N = {} < 2", self.dim)));
        }
        for (name, v) in [("p", &self.p), ("q", &self.q), ("m", &self.m), ("s", &self.s), ("k", &self.k)] {
            if *v <= E::zero() {
                return Err(Error::InvalidParameter(format!("{name} = {v} must be positive")));
            }
        }
        if self.lambda < E::zero() {
            return Err(Error::InvalidParameter(format!("lambda = {} is negative", self.lambda)));
        }
        Ok(())
    }

    /// `σ = mq / ((p-1)(1+s))`, or `None` when `p <= 1`.
    pub fn sigma(&self) -> Option<E> {
        let one = E::one();
        if self.p <= one {
            return None;
        }
        let num = self.m.clone() * self.q.clone();
        let den = (self.p.clone() - one.clone()) * (one + self.s.clone());
        Some(num / den)
    }

    pub fn with_lambda(mut self, lambda: E) -> Self {
        self.lambda = lambda;
        self
    }

    /// Float copy, for feeding exactly classified parameters to the solvers.
    pub fn to_scalar<T: Scalar>(&self) -> ExponentSet<T> {
        ExponentSet {
            dim: self.dim,
            p: to_scalar(&self.p),
            q: to_scalar(&self.q),
            m: to_scalar(&self.m),
            s: to_scalar(&self.s),
            k: to_scalar(&self.k),
            lambda: to_scalar(&self.lambda),
            kind: self.kind,
        }
    }
}

/// Two-sided envelope `C1 r^-k <= ρ <= C2 r^-k` and the concrete radial
/// source `ρ = ρ0 r^-k` used on the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceEnvelope<T> {
    pub c1: T,
    pub c2: T,
    pub k: T,
    pub rho_amplitude: T,
}

impl<T: Scalar> SourceEnvelope<T> {
    /// Pure power source: both envelope constants equal `ρ0`.
    pub fn radial(rho_amplitude: T, k: T) -> Result<Self> {
        Self::new(rho_amplitude, rho_amplitude, k, rho_amplitude)
    }

    pub fn new(c1: T, c2: T, k: T, rho_amplitude: T) -> Result<Self> {
        if !(c1 > T::zero() && c2 >= c1) {
            return Err(Error::InvalidParameter("need C2 >= C1 > 0".into()));
        }
        if !(k > T::zero() && rho_amplitude > T::zero()) {
            return Err(Error::InvalidParameter("need k > 0 and rho0 > 0".into()));
        }
        if !(rho_amplitude >= c1 && rho_amplitude <= c2) {
            return Err(Error::InvalidParameter("rho0 must lie in [C1, C2]".into()));
        }
        Ok(SourceEnvelope { c1, c2, k, rho_amplitude })
    }

    pub fn rho(&self, r: T) -> T {
        self.rho_amplitude * r.powf(-self.k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    PurePower,
    PowerLog,
    PowerLogLog,
    HarmonicMinusCorrection,
}

impl ProfileKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProfileKind::PurePower => "PURE_POWER",
            ProfileKind::PowerLog => "POWER_LOG",
            ProfileKind::PowerLogLog => "POWER_LOGLOG",
            ProfileKind::HarmonicMinusCorrection => "HARMONIC_MINUS_CORRECTION",
        }
    }
}

/// Shape data beyond the leading power.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileShape<E> {
    PurePower,
    /// `r^e log^ℓ(r/r0)`.
    PowerLog { log_power: E },
    /// `r^e log(C0 log(r/r0))`.
    PowerLogLog { c0: E },
    /// `r^e - C0 r^c` with `c < e`.
    HarmonicMinusCorrection { c0: E, correction_power: E },
}

/// Predicted decay class `w ≃ profile`, meaning two-sided bounds by
/// constant multiples.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticProfile<E> {
    pub shape: ProfileShape<E>,
    pub power: E,
    /// Reference radius inside the logarithms.
    pub r0: E,
}

impl<E: Exponent> AsymptoticProfile<E> {
    pub fn pure(power: E) -> Self {
        AsymptoticProfile { shape: ProfileShape::PurePower, power, r0: E::one() }
    }

    pub fn power_log(power: E, log_power: E) -> Result<Self> {
        if log_power.is_zero() {
            return Err(Error::InvalidParameter("POWER_LOG needs a nonzero log power".into()));
        }
        Ok(AsymptoticProfile { shape: ProfileShape::PowerLog { log_power }, power, r0: E::one() })
    }

    pub fn with_r0(mut self, r0: E) -> Self {
        self.r0 = r0;
        self
    }

    pub fn kind(&self) -> ProfileKind {
        match self.shape {
            ProfileShape::PurePower => ProfileKind::PurePower,
            ProfileShape::PowerLog { .. } => ProfileKind::PowerLog,
            ProfileShape::PowerLogLog { .. } => ProfileKind::PowerLogLog,
            ProfileShape::HarmonicMinusCorrection { .. } => ProfileKind::HarmonicMinusCorrection,
        }
    }

    /// Exponent on `log(r/r0)`; zero for every shape but `POWER_LOG`.
    pub fn log_power(&self) -> E {
        match &self.shape {
            ProfileShape::PowerLog { log_power } => log_power.clone(),
            _ => E::zero(),
        }
    }

    /// Samples the profile. Only meaningful for `r > r0`.
    pub fn eval<T: Scalar>(&self, r: T) -> T {
        let e: T = to_scalar(&self.power);
        let r0: T = to_scalar(&self.r0);
        let lead = r.powf(e);
        match &self.shape {
            ProfileShape::PurePower => lead,
            ProfileShape::PowerLog { log_power } => lead * (r / r0).ln().powf(to_scalar(log_power)),
            ProfileShape::PowerLogLog { c0 } => lead * (to_scalar::<E, T>(c0) * (r / r0).ln()).ln(),
            ProfileShape::HarmonicMinusCorrection { c0, correction_power } => {
                lead - to_scalar::<E, T>(c0) * r.powf(to_scalar(correction_power))
            }
        }
    }

    /// Logarithmic slope `d ln ψ / d ln r` at `r`.
    pub fn log_slope<T: Scalar>(&self, r: T) -> T {
        let e: T = to_scalar(&self.power);
        let r0: T = to_scalar(&self.r0);
        let l = (r / r0).ln();
        match &self.shape {
            ProfileShape::PurePower => e,
            ProfileShape::PowerLog { log_power } => e + to_scalar::<E, T>(log_power) / l,
            ProfileShape::PowerLogLog { c0 } => {
                let c0: T = to_scalar(c0);
                e + T::one() / (l * (c0 * l).ln())
            }
            ProfileShape::HarmonicMinusCorrection { c0, correction_power } => {
                let c0: T = to_scalar(c0);
                let c: T = to_scalar(correction_power);
                let a = r.powf(e);
                let b = c0 * r.powf(c);
                (e * a - c * b) / (a - b)
            }
        }
    }

    pub fn to_scalar<T: Scalar>(&self) -> AsymptoticProfile<T> {
        let shape = match &self.shape {
            ProfileShape::PurePower => ProfileShape::PurePower,
            ProfileShape::PowerLog { log_power } => ProfileShape::PowerLog { log_power: to_scalar(log_power) },
            ProfileShape::PowerLogLog { c0 } => ProfileShape::PowerLogLog { c0: to_scalar(c0) },
            ProfileShape::HarmonicMinusCorrection { c0, correction_power } => {
                ProfileShape::HarmonicMinusCorrection { c0: to_scalar(c0), correction_power: to_scalar(correction_power) }
            }
        };
        AsymptoticProfile { shape, power: to_scalar(&self.power), r0: to_scalar(&self.r0) }
    }
}

impl<E: Exponent> fmt::Display for AsymptoticProfile<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r^{}", self.power.render())?;
        match &self.shape {
            ProfileShape::PurePower => Ok(()),
            ProfileShape::PowerLog { log_power } => write!(f, "*log^{}(r/r0)", log_power.render()),
            ProfileShape::PowerLogLog { c0 } => write!(f, "*log({}*log(r/r0))", c0.render()),
            ProfileShape::HarmonicMinusCorrection { c0, correction_power } => {
                write!(f, "-{}*r^{}", c0.render(), correction_power.render())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Nonexistence,
    ExistsMinimalGrowth,
    ExistsFastGrowth,
    ExistsMixedMinimal,
    Inconclusive,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Nonexistence => "NONEXISTENCE",
            Outcome::ExistsMinimalGrowth => "EXISTS_MINIMAL_GROWTH",
            Outcome::ExistsFastGrowth => "EXISTS_FAST_GROWTH",
            Outcome::ExistsMixedMinimal => "EXISTS_MIXED_MINIMAL",
            Outcome::Inconclusive => "INCONCLUSIVE",
        }
    }

    pub fn is_existence(self) -> bool {
        matches!(self, Outcome::ExistsMinimalGrowth | Outcome::ExistsFastGrowth | Outcome::ExistsMixedMinimal)
    }
}

/// Classifier output. Existence outcomes carry both profiles, the others none.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeVerdict<E> {
    pub outcome: Outcome,
    pub matched_condition: String,
    pub u_profile: Option<AsymptoticProfile<E>>,
    pub v_profile: Option<AsymptoticProfile<E>>,
}

impl<E: Exponent> RegimeVerdict<E> {
    fn bare(outcome: Outcome, tag: &str) -> Self {
        RegimeVerdict { outcome, matched_condition: tag.to_string(), u_profile: None, v_profile: None }
    }

    fn exists(outcome: Outcome, tag: &str, u: AsymptoticProfile<E>, v: AsymptoticProfile<E>) -> Self {
        RegimeVerdict { outcome, matched_condition: tag.to_string(), u_profile: Some(u), v_profile: Some(v) }
    }
}

impl<E: Exponent> fmt::Display for RegimeVerdict<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.outcome.as_str(), self.matched_condition)?;
        if let (Some(u), Some(v)) = (&self.u_profile, &self.v_profile) {
            write!(f, " u~{u} v~{v}")?;
        }
        Ok(())
    }
}

fn le<E: Exponent>(a: &E, b: &E) -> bool {
    a.compare(b) != Ordering::Greater
}
fn lt<E: Exponent>(a: &E, b: &E) -> bool {
    a.compare(b) == Ordering::Less
}
fn eq<E: Exponent>(a: &E, b: &E) -> bool {
    a.compare(b) == Ordering::Equal
}

/// `N/(N-2)` and `2/(N-2)`, the two recurring thresholds.
fn thresholds<E: Exponent>(dim: u32) -> (E, E) {
    let n = dim as i64;
    (E::from_ratio(n, n - 2), E::from_ratio(2, n - 2))
}

/// Decides which theorem, if any, settles the parameter set.
///
/// Nonexistence is tested first, then minimal growth (`k > N`), then fast
/// growth (`2 < k < N`). Equalities follow the printed strictness; anything
/// left over is `INCONCLUSIVE`.
pub fn classify<E: Exponent>(params: &ExponentSet<E>) -> Result<RegimeVerdict<E>> {
    params.validate()?;
    match params.kind {
        SystemKind::NegActivator | SystemKind::NegBoth => Ok(RegimeVerdict::bare(Outcome::Nonexistence, "Thm7.1(i)")),
        SystemKind::Mixed => Ok(classify_mixed(params)),
        SystemKind::Gm => classify_gm(params),
    }
}

fn classify_gm<E: Exponent>(x: &ExponentSet<E>) -> Result<RegimeVerdict<E>> {
    if x.dim == 2 {
        return Ok(RegimeVerdict::bare(Outcome::Nonexistence, "Thm2.1(i)"));
    }
    let (c, two) = thresholds::<E>(x.dim);
    if le(&x.m, &two) {
        return Ok(RegimeVerdict::bare(Outcome::Nonexistence, "Thm2.1(ii)"));
    }
    if le(&x.p, &c) {
        return Ok(RegimeVerdict::bare(Outcome::Nonexistence, "Thm2.1(iii)"));
    }
    let sigma = x.sigma().ok_or(Error::SigmaUndefined)?;
    if !lt(&sigma, &E::one()) {
        return Ok(RegimeVerdict::bare(Outcome::Inconclusive, "sigma>=1"));
    }
    let n = E::from_int(x.dim as i64);
    match x.k.compare(&n) {
        Ordering::Greater => minimal_growth(x),
        Ordering::Equal => Ok(RegimeVerdict::bare(Outcome::Inconclusive, "k=N")),
        Ordering::Less if lt(&E::from_int(2), &x.k) => fast_growth(x),
        Ordering::Less => Ok(RegimeVerdict::bare(Outcome::Inconclusive, "k<=2")),
    }
}

fn minimal_growth<E: Exponent>(x: &ExponentSet<E>) -> Result<RegimeVerdict<E>> {
    let (c, two) = thresholds::<E>(x.dim);
    let one = E::one();
    let s_c = x.s.clone() + c.clone();
    let q_c = x.q.clone() + c.clone();
    let u = AsymptoticProfile::pure(E::from_int(2 - x.dim as i64));
    let tag = if le(&s_c, &x.m) && lt(&q_c, &x.p) {
        "Thm2.2(i)"
    } else if eq(&x.m, &s_c) && eq(&x.p, &q_c) && lt(&(one.clone() + x.s.clone()), &x.q) {
        "Thm2.2(ii)"
    } else if lt(&two, &x.m)
        && lt(&x.m, &s_c)
        && lt(&(x.q.clone() / (one + x.s.clone()) * (x.m.clone() - two) + c), &x.p)
    {
        "Thm2.2(iii)"
    } else {
        return Ok(RegimeVerdict::bare(Outcome::Inconclusive, "Thm2.2:no-branch"));
    };
    let v = predicted_v_profile(x, &u)?;
    Ok(RegimeVerdict::exists(Outcome::ExistsMinimalGrowth, tag, u, v))
}

fn fast_growth<E: Exponent>(x: &ExponentSet<E>) -> Result<RegimeVerdict<E>> {
    let one = E::one();
    let two = E::from_int(2);
    let nn = E::from_int(x.dim as i64);
    let a = x.k.clone() - two.clone();
    let m_crit = (nn.clone() + x.s.clone() * (nn.clone() - two.clone())) / a.clone();
    let shift = one.clone() + two.clone() / a.clone();
    let tag = if le(&m_crit, &x.m) && le(&(x.q.clone() * (nn - two.clone()) / a.clone() + shift.clone()), &x.p) {
        "Thm2.3(i)"
    } else if lt(&(two.clone() / a.clone()), &x.m)
        && lt(&x.m, &m_crit)
        && le(&(x.q.clone() / (one + x.s.clone()) * (x.m.clone() - two / a.clone()) + shift), &x.p)
    {
        "Thm2.3(ii)"
    } else {
        return Ok(RegimeVerdict::bare(Outcome::Inconclusive, "Thm2.3:no-branch"));
    };
    let u = AsymptoticProfile::pure(-a);
    let v = predicted_v_profile(x, &u)?;
    Ok(RegimeVerdict::exists(Outcome::ExistsFastGrowth, tag, u, v))
}

fn classify_mixed<E: Exponent>(x: &ExponentSet<E>) -> RegimeVerdict<E> {
    if x.dim == 2 {
        return RegimeVerdict::bare(Outcome::Nonexistence, "Thm7.1(ii1)");
    }
    let (c, two) = thresholds::<E>(x.dim);
    let smaller = if x.q < x.m { &x.q } else { &x.m };
    if le(smaller, &two) {
        return RegimeVerdict::bare(Outcome::Nonexistence, "Thm7.1(ii2)");
    }
    let n = E::from_int(x.dim as i64);
    if lt(&n, &x.k) && lt(&(x.p.clone() + c.clone()), &x.q) && lt(&(x.s.clone() + c), &x.m) {
        let harmonic = AsymptoticProfile::pure(E::from_int(2 - x.dim as i64));
        return RegimeVerdict::exists(Outcome::ExistsMixedMinimal, "Thm7.2", harmonic.clone(), harmonic);
    }
    RegimeVerdict::bare(Outcome::Inconclusive, "Thm7.2:copt-fails")
}

/// Inhibitor decay class forced by an activator `u ≃ r^-a`.
///
/// Keyed on `m` against `(N + s(N-2))/a`: below gives `r^{-(ma-2)/(1+s)}`,
/// equal gives the log-corrected harmonic decay, above gives `r^{2-N}`.
pub fn predicted_v_profile<E: Exponent>(
    params: &ExponentSet<E>,
    u_profile: &AsymptoticProfile<E>,
) -> Result<AsymptoticProfile<E>> {
    if u_profile.kind() != ProfileKind::PurePower || u_profile.power >= E::zero() {
        return Err(Error::InvalidParameter(format!("activator profile {u_profile} is not a decaying pure power")));
    }
    let one = E::one();
    let two = E::from_int(2);
    let nn = E::from_int(params.dim as i64);
    let a = -u_profile.power.clone();
    let am = a.clone() * params.m.clone();
    if le(&am, &two) {
        return Err(Error::NoInhibitorSolution(am.to_f64()));
    }
    let m_crit = (nn.clone() + params.s.clone() * (nn.clone() - two.clone())) / a;
    let harmonic = two - nn;
    let profile = match params.m.compare(&m_crit) {
        Ordering::Less => AsymptoticProfile::pure(-(am - E::from_int(2)) / (one + params.s.clone())),
        Ordering::Equal => AsymptoticProfile::power_log(harmonic, one.clone() / (one + params.s.clone()))?,
        Ordering::Greater => AsymptoticProfile::pure(harmonic),
    };
    Ok(profile.with_r0(u_profile.r0.clone()))
}

/// Decay of the solution of `-Δw = r^-α w^-s` with inner Neumann data.
pub fn singular_source_profile<E: Exponent>(dim: u32, s: &E, alpha: &E) -> Result<AsymptoticProfile<E>> {
    let two = E::from_int(2);
    if le(alpha, &two) {
        return Err(Error::NonintegrableSource(alpha.to_f64()));
    }
    let nn = E::from_int(dim as i64);
    let one = E::one();
    let crit = nn.clone() + s.clone() * (nn.clone() - two.clone());
    let harmonic = two.clone() - nn;
    Ok(match alpha.compare(&crit) {
        Ordering::Less => AsymptoticProfile::pure(-(alpha.clone() - two) / (one + s.clone())),
        Ordering::Equal => AsymptoticProfile::power_log(harmonic, one.clone() / (one + s.clone()))?,
        Ordering::Greater => AsymptoticProfile {
            shape: ProfileShape::HarmonicMinusCorrection {
                c0: one,
                correction_power: two + s.clone() * (E::from_int(dim as i64) - E::from_int(2)) - alpha.clone(),
            },
            power: harmonic,
            r0: E::one(),
        },
    })
}

/// Decay of the solution of the linear problem `-Δw = r^-β`.
pub fn linear_source_profile<E: Exponent>(dim: u32, beta: &E) -> Result<AsymptoticProfile<E>> {
    let two = E::from_int(2);
    if le(beta, &two) {
        return Err(Error::NonintegrableSource(beta.to_f64()));
    }
    let nn = E::from_int(dim as i64);
    let harmonic = two.clone() - nn.clone();
    Ok(match beta.compare(&nn) {
        Ordering::Less => AsymptoticProfile::pure(two - beta.clone()),
        Ordering::Equal => AsymptoticProfile::power_log(harmonic, E::one())?,
        Ordering::Greater => AsymptoticProfile {
            shape: ProfileShape::HarmonicMinusCorrection { c0: E::one(), correction_power: two - beta.clone() },
            power: harmonic,
            r0: E::one(),
        },
    })
}

/// Decay of the solution of `-Δw = r^-N log^-θ(r/r0)`.
pub fn log_source_profile<E: Exponent>(dim: u32, theta: &E, c0: &E) -> Result<AsymptoticProfile<E>> {
    if *theta <= E::zero() {
        return Err(Error::InvalidParameter("theta must be positive".into()));
    }
    let one = E::one();
    let harmonic = E::from_int(2 - dim as i64);
    Ok(match theta.compare(&one) {
        Ordering::Less => AsymptoticProfile::power_log(harmonic, one - theta.clone())?,
        Ordering::Equal => AsymptoticProfile { shape: ProfileShape::PowerLogLog { c0: c0.clone() }, power: harmonic, r0: one },
        Ordering::Greater => AsymptoticProfile::pure(harmonic),
    })
}

/// Constants of the invariant box `D ψ_u <= u <= E ψ_u`, `F ψ_v <= v <= G ψ_v`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantSchedule<T> {
    pub kind: SystemKind,
    pub lambda: T,
    pub p: T,
    pub q: T,
    pub c1: T,
    pub c2: T,
    pub c3: T,
    pub c4: T,
    pub c5: T,
    pub c6: T,
    pub d: T,
    pub e: T,
    pub f: T,
    pub g: T,
    pub lambda_star: Option<T>,
    pub lambda_star_star: Option<T>,
}

impl<T: Scalar> ConstantSchedule<T> {
    /// `λ*` for GM, `λ**` for MIXED.
    pub fn threshold(&self) -> T {
        self.lambda_star.or(self.lambda_star_star).expect("schedule carries a threshold")
    }

    /// Left and right side of the inequality that makes the box invariant:
    /// `C4(E^p F^-q + λC2) <= E` (GM) or `C6(G^q D^-p + C2λ) <= E` (MIXED).
    pub fn box_inequality(&self) -> (T, T) {
        let lhs = match self.kind {
            SystemKind::Mixed => self.c6 * (self.g.powf(self.q) * self.d.powf(-self.p) + self.c2 * self.lambda),
            _ => self.c4 * (self.e.powf(self.p) * self.f.powf(-self.q) + self.lambda * self.c2),
        };
        (lhs, self.e)
    }

    pub fn box_inequality_holds(&self) -> bool {
        let (lhs, rhs) = self.box_inequality();
        lhs <= rhs
    }
}

/// Fills in the box constants from the comparison constants `C3 <= C4`.
///
/// For MIXED the two inputs play the role of `C5 < C6`.
pub fn constant_schedule<T: Scalar + Exponent>(
    params: &ExponentSet<T>,
    env: &SourceEnvelope<T>,
    c3: T,
    c4: T,
) -> Result<ConstantSchedule<T>> {
    params.validate()?;
    if !(c3 > T::zero() && c4 >= c3) {
        return Err(Error::InvalidParameter(format!("need C4 >= C3 > 0, got C3 = {c3}, C4 = {c4}")));
    }
    let one = T::one();
    let two: T = lit(2.0);
    let (c1, c2, lambda) = (env.c1, env.c2, params.lambda);
    let (p, q, m, s) = (params.p, params.q, params.m, params.s);
    let mu = m / (one + s);
    match params.kind {
        SystemKind::Gm => {
            let sigma = params.sigma().ok_or(Error::SigmaUndefined)?;
            if sigma >= one {
                return Err(Error::SigmaOutOfRange(num_traits::ToPrimitive::to_f64(&sigma).unwrap_or(f64::NAN)));
            }
            let c5 = c1.powf(mu) * c3.powf(one + mu);
            let c6 = c4 * (two * c2 * c4).powf(mu);
            let lambda_star =
                (c5.powf(q) / ((two * c4).powf(p) * c2.powf(p - one))).powf(one / ((p - one) * (one - sigma)));
            let d = c1 * c3 * lambda;
            let e = two * c2 * c4 * lambda;
            Ok(ConstantSchedule {
                kind: params.kind,
                lambda,
                p,
                q,
                c1,
                c2,
                c3,
                c4,
                c5,
                c6,
                d,
                e,
                f: c3 * d.powf(mu),
                g: c4 * e.powf(mu),
                lambda_star: Some(lambda_star),
                lambda_star_star: None,
            })
        }
        SystemKind::Mixed => {
            let (c5, c6) = (c3, c4);
            let ex = m * q / (one + s) - (p + one);
            if ex.compare(&T::zero()) == Ordering::Equal {
                return Err(Error::DegenerateExponent);
            }
            let base = c2 * (c1 * c5).powf(p) / ((two * c2 * c6).powf(m * q / (one + s)) * c6.powf(q));
            let d = c1 * c5 * lambda;
            let e = two * c2 * c6 * lambda;
            Ok(ConstantSchedule {
                kind: params.kind,
                lambda,
                p,
                q,
                c1,
                c2,
                c3,
                c4,
                c5,
                c6,
                d,
                e,
                f: d.powf(mu) * c5,
                g: e.powf(mu) * c6,
                lambda_star: None,
                lambda_star_star: Some(base.powf(one / ex)),
            })
        }
        kind => Err(Error::Regime { outcome: Outcome::Nonexistence.as_str().into(), tag: kind.as_str().into() }),
    }
}
