//! Extended nonnegative reals and the scalar abstraction shared by the exact
//! rational pipeline and the floating-point pipeline.
//!
//! Every solver in this crate is generic over [`Scalar`]. With
//! [`Rational`] all comparisons are exact and the tolerance arguments are
//! ignored; with `f64` they become absolute slacks.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Arbitrary-precision rational used by the exact pipeline.
pub type Rational = BigRational;

/// Absolute tolerance for direct formulas in floating mode.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
/// Absolute tolerance for iterative solvers in floating mode.
pub const DEFAULT_ITERATIVE_TOLERANCE: f64 = 1e-6;
/// Weights below this are treated as numerical dust in floating mode.
pub const WEIGHT_DUST: f64 = 1e-12;
/// Largest finite space that defaults to exact arithmetic.
pub const EXACT_MODE_MAX_POINTS: usize = 16;

/// Number type the solvers run on.
pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
{
    /// True when arithmetic performs no rounding.
    const EXACT: bool;

    fn from_ratio(num: i64, den: i64) -> Self;

    fn from_usize(n: usize) -> Self {
        Self::from_ratio(n as i64, 1)
    }

    /// Value of a closed-form (transcendental) expression, if representable.
    fn from_real(x: f64) -> Option<Self>;

    fn from_rational(r: &Rational) -> Self;

    fn to_f64(&self) -> f64;

    /// Comparison slack: zero for exact scalars, `tol` otherwise.
    fn slack(tol: f64) -> Self;

    fn magnitude(&self) -> Self;

    /// Numerator and denominator, for exact scalars only.
    fn ratio_parts(&self) -> Option<(BigInt, BigInt)>;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_real(x: f64) -> Option<Self> {
        Some(x)
    }

    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn slack(tol: f64) -> Self {
        tol
    }

    fn magnitude(&self) -> Self {
        self.abs()
    }

    fn ratio_parts(&self) -> Option<(BigInt, BigInt)> {
        None
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_ratio(num: i64, den: i64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_real(_: f64) -> Option<Self> {
        None
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn slack(_: f64) -> Self {
        Rational::zero()
    }

    fn magnitude(&self) -> Self {
        self.abs()
    }

    fn ratio_parts(&self) -> Option<(BigInt, BigInt)> {
        Some((self.numer().clone(), self.denom().clone()))
    }
}

/// `a > b` beyond the slack.
pub(crate) fn exceeds<T: Scalar>(a: &T, b: &T, tol: f64) -> bool {
    a.clone() > b.clone() + T::slack(tol)
}

/// `|a - b| <= slack`.
pub(crate) fn close<T: Scalar>(a: &T, b: &T, tol: f64) -> bool {
    (a.clone() - b.clone()).magnitude() <= T::slack(tol)
}

/// A value in `[0, +inf]`.
///
/// `+inf` absorbs addition, and `0 * inf = 0` so that atoms of zero weight
/// never pick up a kernel singularity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExtReal<T> {
    Finite(T),
    Infinite,
}

impl<T: Scalar> ExtReal<T> {
    pub fn zero() -> Self {
        ExtReal::Finite(T::zero())
    }

    pub fn finite(value: T) -> Self {
        ExtReal::Finite(value)
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtReal::Infinite)
    }

    pub fn as_finite(&self) -> Option<&T> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::Infinite => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExtReal::Finite(v) => v.to_f64(),
            ExtReal::Infinite => f64::INFINITY,
        }
    }

    /// Multiplication by a scalar already known to be nonnegative.
    pub(crate) fn scaled(&self, c: &T) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        match self {
            ExtReal::Finite(v) => ExtReal::Finite(v.clone() * c.clone()),
            ExtReal::Infinite => ExtReal::Infinite,
        }
    }

    /// Division by a positive count, e.g. the `1/n` of an average.
    pub(crate) fn per(&self, count: usize) -> Self {
        match self {
            ExtReal::Finite(v) => ExtReal::Finite(v.clone() / T::from_usize(count)),
            ExtReal::Infinite => ExtReal::Infinite,
        }
    }

    /// Adds a finite amount, which may be negative; the caller keeps the
    /// result nonnegative.
    pub(crate) fn offset(&self, c: &T) -> Self {
        match self {
            ExtReal::Finite(v) => ExtReal::Finite(v.clone() + c.clone()),
            ExtReal::Infinite => ExtReal::Infinite,
        }
    }

    pub fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }

    pub fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    /// `self <= other` up to the slack; `+inf <= +inf` holds.
    pub fn le_within(&self, other: &Self, tol: f64) -> bool {
        match (self, other) {
            (_, ExtReal::Infinite) => true,
            (ExtReal::Infinite, ExtReal::Finite(_)) => false,
            (ExtReal::Finite(a), ExtReal::Finite(b)) => !exceeds(a, b, tol),
        }
    }

    /// Equality up to the slack; two infinities are equal.
    pub fn eq_within(&self, other: &Self, tol: f64) -> bool {
        match (self, other) {
            (ExtReal::Infinite, ExtReal::Infinite) => true,
            (ExtReal::Finite(a), ExtReal::Finite(b)) => close(a, b, tol),
            _ => false,
        }
    }
}

impl<T: Scalar> fmt::Display for ExtReal<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::Infinite => f.write_str("inf"),
        }
    }
}

impl<T: Scalar> PartialOrd for ExtReal<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExtReal::Infinite, ExtReal::Infinite) => Some(Ordering::Equal),
            (ExtReal::Infinite, ExtReal::Finite(_)) => Some(Ordering::Greater),
            (ExtReal::Finite(_), ExtReal::Infinite) => Some(Ordering::Less),
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b),
        }
    }
}

impl<T: Scalar> Add for ExtReal<T> {
    type Output = ExtReal<T>;

    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::Infinite,
        }
    }
}

impl<'a, T: Scalar> Add<&'a ExtReal<T>> for ExtReal<T> {
    type Output = ExtReal<T>;

    fn add(self, rhs: &'a ExtReal<T>) -> Self {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b.clone()),
            _ => ExtReal::Infinite,
        }
    }
}

impl<T: Scalar> std::iter::Sum for ExtReal<T> {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::zero(), |acc, x| acc + x)
    }
}

/// Sum in `[0, +inf]`.
pub fn ext_add<T: Scalar>(a: &ExtReal<T>, b: &ExtReal<T>) -> ExtReal<T> {
    a.clone() + b
}

/// `c * a` for `c >= 0`, with `0 * inf = 0`.
pub fn ext_scale<T: Scalar>(c: &T, a: &ExtReal<T>) -> Result<ExtReal<T>> {
    if *c < T::zero() {
        return Err(Error::NegativeScale(c.to_f64()));
    }
    Ok(a.scaled(c))
}

/// How much a reported value can be trusted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Certification {
    /// Exhaustive search in rational arithmetic.
    ExactRational,
    /// Exhaustive search in `f64`, correct up to the tolerance.
    FloatCertified,
    /// Value of a feasible point of a minimization; the optimum is no larger.
    HeuristicUpperBound,
    /// Value of a feasible point of a maximization; the optimum is no smaller.
    HeuristicLowerBound,
}

impl Certification {
    /// The certified label for scalar type `T`.
    pub fn certified<T: Scalar>() -> Self {
        if T::EXACT {
            Certification::ExactRational
        } else {
            Certification::FloatCertified
        }
    }

    pub fn is_certified(&self) -> bool {
        matches!(
            self,
            Certification::ExactRational | Certification::FloatCertified
        )
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Certification::ExactRational => "exact-rational",
            Certification::FloatCertified => "float-certified",
            Certification::HeuristicUpperBound => "heuristic-upper-bound",
            Certification::HeuristicLowerBound => "heuristic-lower-bound",
        }
    }
}

impl fmt::Display for Certification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Nearest scalar to a finite float; exact for rationals (binary expansion).
pub(crate) fn scalar_from_f64<T: Scalar>(x: f64) -> T {
    T::from_real(x).unwrap_or_else(|| {
        T::from_rational(&Rational::from_f64(x).expect("finite float"))
    })
}

/// Which arithmetic a computation runs in.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ArithmeticMode {
    ExactRational,
    Floating { tolerance: f64 },
}

impl ArithmeticMode {
    /// Exact for small finite spaces, floating for closed-form grids.
    pub fn auto(points: usize, closed_form: bool) -> Self {
        if !closed_form && points <= EXACT_MODE_MAX_POINTS {
            ArithmeticMode::ExactRational
        } else {
            ArithmeticMode::Floating {
                tolerance: DEFAULT_TOLERANCE,
            }
        }
    }

    pub fn tolerance(&self) -> f64 {
        match self {
            ArithmeticMode::ExactRational => 0.0,
            ArithmeticMode::Floating { tolerance } => *tolerance,
        }
    }
}

/// Knobs shared by the solvers.
#[derive(Clone, Debug)]
pub struct SolverOptions {
    /// Slack for direct formulas (ignored by exact scalars).
    pub tolerance: f64,
    /// Slack for iterative solvers.
    pub iterative_tolerance: f64,
    /// Maximum number of multisets an exhaustive search may visit.
    pub budget: u64,
    /// Largest subset handled by exhaustive support enumeration.
    pub support_threshold: usize,
    pub seed: u64,
    pub restarts: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: DEFAULT_TOLERANCE,
            iterative_tolerance: DEFAULT_ITERATIVE_TOLERANCE,
            budget: 2_000_000,
            support_threshold: 14,
            seed: 0,
            restarts: 8,
        }
    }
}

/// Parses `"3"`, `"-2/7"`, `"0.125"` or `"1.5e-3"` into an exact rational.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num = parse_rational(num)?;
        let den = parse_rational(den)?;
        if den.is_zero() {
            return None;
        }
        return Some(num / den);
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let mut value = Rational::from_integer(digits);
    if scale >= 0 {
        value *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if negative { -value } else { value })
}

/// Rational approximation of a float, exact in binary.
pub fn rational_from_f64(x: f64) -> Option<Rational> {
    Rational::from_f64(x)
}

/// Shorthand for exact rationals in tests and fixtures.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::from_ratio(num, den)
}

/// `Rational` written as `p/q` (or `p` when integral).
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> ExtReal<Rational> {
        ExtReal::Finite(ratio(n, d))
    }

    #[test]
    fn addition_absorbs_infinity() {
        assert_eq!(ext_add(&q(1, 1), &ExtReal::Infinite), ExtReal::Infinite);
        assert_eq!(ext_add(&q(0, 1), &q(0, 1)), q(0, 1));
        assert_eq!(ext_add(&q(2, 1), &q(2, 1)), q(4, 1));
    }

    #[test]
    fn scaling_conventions() {
        assert_eq!(ext_scale(&ratio(0, 1), &ExtReal::Infinite).unwrap(), q(0, 1));
        assert_eq!(ext_scale(&ratio(1, 2), &ExtReal::Infinite).unwrap(), ExtReal::Infinite);
        assert_eq!(ext_scale(&ratio(1, 2), &q(4, 1)).unwrap(), q(2, 1));
        assert!(matches!(
            ext_scale(&ratio(-1, 2), &q(4, 1)),
            Err(Error::NegativeScale(_))
        ));
    }

    #[test]
    fn ordering_puts_infinity_on_top() {
        assert!(ExtReal::<f64>::Infinite > ExtReal::Finite(1e300));
        assert!(q(1, 3) < q(1, 2));
        assert!(ExtReal::<f64>::Infinite.le_within(&ExtReal::Infinite, 0.0));
        assert!(!ExtReal::<f64>::Infinite.le_within(&ExtReal::Finite(1.0), 1.0));
        assert!(ExtReal::Finite(1.0 + 1e-12).le_within(&ExtReal::Finite(1.0), 1e-9));
        assert!(!q(1, 1).le_within(&q(99999, 100000), 1.0));
    }

    #[test]
    fn parses_rationals() {
        assert_eq!(parse_rational("3"), Some(ratio(3, 1)));
        assert_eq!(parse_rational("-2/7"), Some(ratio(-2, 7)));
        assert_eq!(parse_rational("0.125"), Some(ratio(1, 8)));
        assert_eq!(parse_rational("1.5e-3"), Some(ratio(3, 2000)));
        assert_eq!(parse_rational("2.5E2"), Some(ratio(250, 1)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational(""), None);
    }

    #[test]
    fn auto_mode() {
        assert_eq!(ArithmeticMode::auto(3, false), ArithmeticMode::ExactRational);
        assert!(matches!(ArithmeticMode::auto(17, false), ArithmeticMode::Floating { .. }));
        assert!(matches!(ArithmeticMode::auto(5, true), ArithmeticMode::Floating { .. }));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn ext() -> impl Strategy<Value = ExtReal<Rational>> {
            prop_oneof![
                4 => (0i64..1000, 1i64..50).prop_map(|(n, d)| ExtReal::Finite(ratio(n, d))),
                1 => Just(ExtReal::Infinite),
            ]
        }

        proptest! {
            #[test]
            fn add_is_commutative_and_associative(a in ext(), b in ext(), c in ext()) {
                prop_assert_eq!(ext_add(&a, &b), ext_add(&b, &a));
                prop_assert_eq!(ext_add(&ext_add(&a, &b), &c), ext_add(&a, &ext_add(&b, &c)));
            }

            #[test]
            fn scale_distributes(c in (0i64..100, 1i64..20), a in ext(), b in ext()) {
                let c = ratio(c.0, c.1);
                let lhs = ext_scale(&c, &ext_add(&a, &b)).unwrap();
                let rhs = ext_add(&ext_scale(&c, &a).unwrap(), &ext_scale(&c, &b).unwrap());
                prop_assert_eq!(lhs, rhs);
            }
        }
    }
}
