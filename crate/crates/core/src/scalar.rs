//! Scalar kinds: exact rationals and fixed-precision binary floats.
//!
//! Every computation runs in a single scalar kind. Exact rationals are the
//! reference path; the float kind exists for data that is irrational by
//! nature (eigenvalues of a string, exponentials in the peakon flow).

use alloc::string::{String, ToString};
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};
use core::str::FromStr;
use core::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

use dashu_float::round::mode::HalfEven;
use dashu_float::{DBig, FBig};
use dashu_int::IBig;
use dashu_ratio::RBig;

/// Exact rational number, always kept in lowest terms with a positive
/// denominator.
pub type Rational = RBig;

type BinFloat = FBig<HalfEven, 2>;

/// Precision (in bits) used when a float is created from an integer,
/// a rational or a string.
static DEFAULT_PRECISION: AtomicUsize = AtomicUsize::new(256);

/// Lowest precision accepted by [`set_default_precision`].
pub const MIN_PRECISION: usize = 64;

/// Current default float precision in bits.
pub fn default_precision() -> usize {
    DEFAULT_PRECISION.load(AtomicOrdering::Relaxed)
}

/// Sets the default float precision. Values below [`MIN_PRECISION`] are
/// clamped.
pub fn set_default_precision(bits: usize) {
    DEFAULT_PRECISION.store(bits.max(MIN_PRECISION), AtomicOrdering::Relaxed);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScalarKind {
    Rational,
    Float,
}

impl ScalarKind {
    pub fn name(self) -> &'static str {
        match self {
            ScalarKind::Rational => "rational",
            ScalarKind::Float => "float",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse `{input}` as a {kind} scalar")]
pub struct ParseScalarError {
    pub input: String,
    pub kind: &'static str,
}

/// Field operations shared by both scalar kinds.
pub trait Scalar:
    Clone
    + PartialEq
    + PartialOrd
    + fmt::Debug
    + fmt::Display
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
    + for<'a> Div<&'a Self, Output = Self>
{
    const KIND: ScalarKind;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(n: i64) -> Self;
    fn from_rational(r: &Rational) -> Self;
    /// Exact rational value. Floats are dyadic, so this never loses
    /// information.
    fn to_rational(&self) -> Rational;
    fn to_f64(&self) -> f64;
    fn is_zero(&self) -> bool;
    fn abs(&self) -> Self;

    fn is_exact() -> bool {
        Self::KIND == ScalarKind::Rational
    }

    /// Exact kinds compare with zero; floats accept `|self| <= rel_tol * |scale|`.
    fn near_zero(&self, scale: &Self, rel_tol: f64) -> bool {
        if Self::is_exact() {
            self.is_zero()
        } else {
            self.abs() <= Self::from_f64(rel_tol) * scale.abs()
        }
    }

    fn from_f64(x: f64) -> Self {
        let r = Rational::try_from(x).expect("finite f64");
        Self::from_rational(&r)
    }

    fn is_negative(&self) -> bool {
        *self < Self::zero()
    }

    fn is_positive(&self) -> bool {
        *self > Self::zero()
    }

    fn square(&self) -> Self {
        self.clone() * self
    }

    fn recip(&self) -> Self {
        Self::one() / self
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }
}

impl Scalar for Rational {
    const KIND: ScalarKind = ScalarKind::Rational;

    fn zero() -> Self {
        RBig::ZERO
    }
    fn one() -> Self {
        RBig::ONE
    }
    fn from_i64(n: i64) -> Self {
        RBig::from(n)
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn to_rational(&self) -> Rational {
        self.clone()
    }
    fn to_f64(&self) -> f64 {
        RBig::to_f64(self).value()
    }
    fn is_zero(&self) -> bool {
        RBig::is_zero(self)
    }
    fn abs(&self) -> Self {
        if *self < RBig::ZERO {
            -self.clone()
        } else {
            self.clone()
        }
    }
}

/// Parses `"n"`, `"n/d"` or a decimal literal such as `"-1.25e-3"` into an
/// exact rational.
pub fn parse_rational(s: &str) -> Result<Rational, ParseScalarError> {
    let t = s.trim();
    if let Ok(r) = RBig::from_str(t) {
        return Ok(r);
    }
    DBig::from_str(t)
        .ok()
        .and_then(|d| RBig::try_from(d).ok())
        .ok_or_else(|| ParseScalarError {
            input: s.to_string(),
            kind: "rational",
        })
}

/// Binary floating point number with a per-value precision.
///
/// Binary operations round to the larger precision of the two operands.
/// Values created through [`Scalar`] constructors use
/// [`default_precision`].
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Float(BinFloat);

impl Float {
    pub fn with_precision(r: &Rational, bits: usize) -> Self {
        Float(r.to_float::<HalfEven, 2>(bits.max(1)).value())
    }

    pub fn precision(&self) -> usize {
        self.0.precision()
    }

    pub fn exp(&self) -> Self {
        Float(self.0.exp())
    }

    pub fn sqrt(&self) -> Self {
        Float(self.0.sqrt())
    }

    pub fn powi(&self, n: i64) -> Self {
        Float(self.0.powi(IBig::from(n)))
    }
}

impl fmt::Debug for Float {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Enough significant decimal digits to read the same binary value back.
impl fmt::Display for Float {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = (self.precision() as f64 * core::f64::consts::LOG10_2) as usize + 2;
        let dec = self.0.clone().with_base_and_precision::<10>(digits).value();
        fmt::Display::fmt(&dec, f)
    }
}

impl FromStr for Float {
    type Err = ParseScalarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let r = parse_rational(s).map_err(|_| ParseScalarError {
            input: s.to_string(),
            kind: "float",
        })?;
        Ok(Float::from_rational(&r))
    }
}

macro_rules! float_binop {
    ($tr:ident, $method:ident) => {
        impl $tr for Float {
            type Output = Float;
            fn $method(self, rhs: Float) -> Float {
                Float($tr::$method(self.0, rhs.0))
            }
        }
        impl<'a> $tr<&'a Float> for Float {
            type Output = Float;
            fn $method(self, rhs: &'a Float) -> Float {
                Float($tr::$method(self.0, &rhs.0))
            }
        }
        impl<'a> $tr<&'a Float> for &'a Float {
            type Output = Float;
            fn $method(self, rhs: &'a Float) -> Float {
                Float($tr::$method(&self.0, &rhs.0))
            }
        }
    };
}

float_binop!(Add, add);
float_binop!(Sub, sub);
float_binop!(Mul, mul);
float_binop!(Div, div);

impl Neg for Float {
    type Output = Float;
    fn neg(self) -> Float {
        Float(-self.0)
    }
}

impl Scalar for Float {
    const KIND: ScalarKind = ScalarKind::Float;

    fn zero() -> Self {
        Float(BinFloat::ZERO.with_precision(default_precision()).value())
    }
    fn one() -> Self {
        Float(BinFloat::ONE.with_precision(default_precision()).value())
    }
    fn from_i64(n: i64) -> Self {
        Float(
            BinFloat::from(n)
                .with_precision(default_precision())
                .value(),
        )
    }
    fn from_rational(r: &Rational) -> Self {
        Float::with_precision(r, default_precision())
    }
    fn to_rational(&self) -> Rational {
        RBig::try_from(self.0.clone()).expect("finite float")
    }
    fn to_f64(&self) -> f64 {
        self.0.to_f64().value()
    }
    fn is_zero(&self) -> bool {
        self.0 == BinFloat::ZERO
    }
    fn abs(&self) -> Self {
        if self.0 < BinFloat::ZERO {
            -self.clone()
        } else {
            self.clone()
        }
    }
}

/// Complex number over a scalar kind.
#[derive(Clone, Debug, PartialEq)]
pub struct Complex<T> {
    pub re: T,
    pub im: T,
}

impl<T: Scalar> Complex<T> {
    pub fn new(re: T, im: T) -> Self {
        Complex { re, im }
    }

    pub fn real(re: T) -> Self {
        Complex { re, im: T::zero() }
    }

    pub fn zero() -> Self {
        Complex::real(T::zero())
    }

    pub fn one() -> Self {
        Complex::real(T::one())
    }

    pub fn i() -> Self {
        Complex::new(T::zero(), T::one())
    }

    pub fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm_sqr(&self) -> T {
        self.re.square() + self.im.square()
    }

    pub fn scale(&self, k: &T) -> Self {
        Complex::new(self.re.clone() * k, self.im.clone() * k)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        Complex::new(self.re.clone() + &o.re, self.im.clone() + &o.im)
    }

    pub fn sub(&self, o: &Self) -> Self {
        Complex::new(self.re.clone() - &o.re, self.im.clone() - &o.im)
    }

    pub fn mul(&self, o: &Self) -> Self {
        Complex::new(
            self.re.clone() * &o.re - self.im.clone() * &o.im,
            self.re.clone() * &o.im + self.im.clone() * &o.re,
        )
    }

    /// Returns `None` when dividing by zero.
    pub fn div(&self, o: &Self) -> Option<Self> {
        let d = o.norm_sqr();
        if d.is_zero() {
            return None;
        }
        let n = self.mul(&o.conj());
        Some(Complex::new(n.re / &d, n.im / &d))
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

/// Total order helper for scalars that are known to be finite.
pub fn cmp_scalar<T: Scalar>(a: &T, b: &T) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn rationals_are_reduced() {
        let r = q("6/4");
        assert_eq!(r.to_string(), "3/2");
        assert_eq!(q("-4/-2").to_string(), "2");
        assert_eq!(q("2/-6").to_string(), "-1/3");
        assert_eq!(q("0.125").to_string(), "1/8");
        assert_eq!(q("-1.5e-2").to_string(), "-3/200");
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn float_tracks_default_precision() {
        let third = Float::one() / Float::from_i64(3);
        assert_eq!(third.precision(), default_precision());
        let err = (third * Float::from_i64(3) - Float::one()).abs();
        assert!(err.to_f64() < 1e-70);
    }

    #[test]
    fn float_round_trips_through_display() {
        for (r, scale) in [
            ("-2/7", 1e-20),
            ("1/3", 1.0),
            ("22/7", 1e30),
            ("-5/11", 3e-200),
        ] {
            let x = Float::from_rational(&q(r)) * Float::from_f64(scale);
            let y: Float = x.to_string().parse().unwrap();
            assert_eq!(x, y, "{x}");
        }
    }

    #[test]
    fn float_lifts_exactly() {
        let x = Float::from_f64(0.375);
        assert_eq!(x.to_rational(), q("3/8"));
        assert!(Float::zero().is_zero());
    }

    #[test]
    fn near_zero_respects_kind() {
        assert!(!q("1/1000000").near_zero(&Rational::one(), 1e-3));
        assert!(Float::from_f64(1e-6).near_zero(&Float::one(), 1e-3));
        assert!(!Float::from_f64(1e-2).near_zero(&Float::one(), 1e-3));
    }

    #[test]
    fn complex_division() {
        let i = Complex::<Rational>::i();
        let two = Complex::real(Rational::from_i64(2));
        let r = two.div(&i).unwrap();
        assert_eq!(r, Complex::new(Rational::zero(), Rational::from_i64(-2)));
        assert!(two.div(&Complex::zero()).is_none());
    }

    #[test]
    fn exp_is_accurate() {
        let e = Float::one().exp();
        assert!((e.to_f64() - core::f64::consts::E).abs() < 1e-15);
    }
}
