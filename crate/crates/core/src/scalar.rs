//! Number traits shared by the whole crate.
//!
//! Two roles are kept apart. [`Scalar`] is what the grid solvers need:
//! a real floating type. [`Exponent`] is what the classifier needs: an
//! ordered field in which the theorem boundaries (`p = q + N/(N-2)` and
//! friends) can be decided. Rationals decide them exactly, floats decide
//! them up to a relative tolerance.

use std::cmp::Ordering;
use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

/// Floating type the discretization and solvers run on.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Debug + Display + LowerExp + Sum + Send + Sync + 'static
{
    /// Relative tolerance used when a float has to stand in for an exact
    /// comparison.
    fn boundary_tol() -> Self;
}

impl Scalar for f64 {
    fn boundary_tol() -> Self {
        1e-12
    }
}

impl Scalar for f32 {
    fn boundary_tol() -> Self {
        1e-5
    }
}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

/// Ordered field used for exponent arithmetic in the classifier.
pub trait Exponent: Clone + PartialOrd + Num + Signed + Debug + Display {
    fn from_ratio(num: i64, den: i64) -> Self;

    fn to_f64(&self) -> f64;

    /// Three-way comparison used at theorem boundaries.
    fn compare(&self, other: &Self) -> Ordering;

    /// Compact rendering: integers and terminating decimals print as
    /// decimals, anything else as `a/b`.
    fn render(&self) -> String;

    fn from_int(n: i64) -> Self {
        Self::from_ratio(n, 1)
    }
}

fn float_compare<T: Scalar>(a: T, b: T) -> Ordering {
    let scale = T::one().max(a.abs()).max(b.abs());
    if (a - b).abs() <= T::boundary_tol() * scale {
        Ordering::Equal
    } else if a < b {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

fn float_render(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let rounded = format!("{:.12}", x);
    let trimmed = rounded.trim_end_matches('0').trim_end_matches('.');
    if trimmed == "-0" {
        "0".to_string()
    } else {
        trimmed.to_string()
    }
}

impl Exponent for f64 {
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn compare(&self, other: &Self) -> Ordering {
        float_compare(*self, *other)
    }
    fn render(&self) -> String {
        float_render(*self)
    }
}

impl Exponent for f32 {
    fn from_ratio(num: i64, den: i64) -> Self {
        (num as f64 / den as f64) as f32
    }
    fn to_f64(&self) -> f64 {
        *self as f64
    }
    fn compare(&self, other: &Self) -> Ordering {
        float_compare(*self, *other)
    }
    fn render(&self) -> String {
        float_render(*self as f64)
    }
}

impl Exponent for BigRational {
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn compare(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
    fn render(&self) -> String {
        if self.is_integer() {
            return self.numer().to_string();
        }
        // terminating iff the reduced denominator is 2^a 5^b
        let mut d = self.denom().clone();
        let two = BigInt::from(2);
        let five = BigInt::from(5);
        let mut twos = 0usize;
        let mut fives = 0usize;
        while (&d % &two).is_zero() {
            d /= &two;
            twos += 1;
        }
        while (&d % &five).is_zero() {
            d /= &five;
            fives += 1;
        }
        if !d.is_one() {
            return format!("{}/{}", self.numer(), self.denom());
        }
        let digits = twos.max(fives);
        let scale = num_traits::pow(BigInt::from(10), digits);
        let scaled = (self * BigRational::from_integer(scale)).to_integer();
        let neg = scaled.is_negative();
        let mag = scaled.abs().to_string();
        let padded = format!("{:0>width$}", mag, width = digits + 1);
        let (int, frac) = padded.split_at(padded.len() - digits);
        format!("{}{}.{}", if neg { "-" } else { "" }, int, frac)
    }
}

/// Parses `"5"`, `"-2.25"`, `"1e-3"` or `"5/3"` into an exact rational.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let t = text.trim();
    if t.is_empty() {
        return None;
    }
    if let Some((a, b)) = t.split_once('/') {
        let num = parse_rational(a)?;
        let den = parse_rational(b)?;
        if den.is_zero() {
            return None;
        }
        return Some(num / den);
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("0{}{}", int, frac).parse().ok()?;
    let shift = exp - frac.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    let mut value = BigRational::from_integer(digits);
    if shift >= 0 {
        value *= num_traits::pow(ten, shift as usize);
    } else {
        value /= num_traits::pow(ten, (-shift) as usize);
    }
    Some(if neg { -value } else { value })
}

/// Float view of an exponent, used when classification output feeds the
/// numerics.
pub fn to_scalar<E: Exponent, T: Scalar>(x: &E) -> T {
    lit(x.to_f64())
}
