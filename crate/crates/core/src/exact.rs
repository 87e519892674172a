//! Exact rational scalars and plane points.
//!
//! Every coordinate produced by the generator maps is rational, so the whole
//! pipeline runs on [`num::BigRational`]. Floating point is derived from the
//! exact values at the edges (rendering, estimates), never the other way
//! around.

use num::bigint::BigInt;
use num::{BigRational, One, Signed, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Exact rational scalar used throughout the crate.
pub type Rational = BigRational;

/// `2^k` as an exact rational, for any sign of `k`.
pub fn pow2(k: i64) -> Rational {
    let one = BigInt::one();
    if k >= 0 {
        Rational::from_integer(one << (k as usize))
    } else {
        Rational::new(one.clone(), one << ((-k) as usize))
    }
}

/// Rational from an integer pair `p/q`.
pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Rational from an integer.
pub fn int(p: i64) -> Rational {
    Rational::from_integer(BigInt::from(p))
}

/// Parses `"p/q"` or `"p"` (arbitrary precision, optional sign).
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                None
            } else {
                Some(Rational::new(p, q))
            }
        }
        None => {
            let p: BigInt = s.parse().ok()?;
            Some(Rational::from_integer(p))
        }
    }
}

/// Decimal expansion with `sig` significant digits, trailing zeros trimmed
/// but at least one digit kept after the point (`2 → "2.0"`).
pub fn decimal_string(x: &Rational, sig: usize) -> String {
    if x.is_zero() {
        return "0.0".to_string();
    }
    let neg = x.is_negative();
    let a = x.abs();
    // Scale so that the integer part has `sig` significant digits.
    let mut exp10: i64 = 0;
    let ten = int(10);
    let mut v = a.clone();
    while v >= ten {
        v = &v / &ten;
        exp10 += 1;
    }
    while v < Rational::one() {
        v = &v * &ten;
        exp10 -= 1;
    }
    // v in [1, 10); want sig digits total.
    let shift = sig as i64 - 1 - exp10;
    let scaled = if shift >= 0 {
        &a * pow10(shift as u64)
    } else {
        &a / pow10((-shift) as u64)
    };
    let digits = scaled.round().to_integer().to_string();
    // Place the decimal point after the first (exp10 + 1) digits.
    let point = exp10 + 1;
    let mut s = String::new();
    if neg {
        s.push('-');
    }
    if point <= 0 {
        s.push_str("0.");
        for _ in 0..(-point) {
            s.push('0');
        }
        s.push_str(digits.trim_end_matches('0'));
        if s.ends_with('.') {
            s.push('0');
        }
    } else if (point as usize) >= digits.len() {
        s.push_str(&digits);
        for _ in 0..(point as usize - digits.len()) {
            s.push('0');
        }
        s.push_str(".0");
    } else {
        s.push_str(&digits[..point as usize]);
        let frac = digits[point as usize..].trim_end_matches('0');
        s.push('.');
        if frac.is_empty() {
            s.push('0');
        } else {
            s.push_str(frac);
        }
    }
    s
}

fn pow10(k: u64) -> Rational {
    let mut b = BigInt::one();
    for _ in 0..k {
        b *= 10;
    }
    Rational::from_integer(b)
}

/// Exact `f64` conversion (the input floats of interest are dyadic).
pub fn rational_from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

/// A point of the plane with exact rational coordinates, identified with a
/// complex number `x + iy`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub x: Rational,
    pub y: Rational,
}

impl Point {
    pub fn new(x: Rational, y: Rational) -> Self {
        Point { x, y }
    }

    pub fn zero() -> Self {
        Point::new(Rational::zero(), Rational::zero())
    }

    pub fn real(x: Rational) -> Self {
        Point::new(x, Rational::zero())
    }

    pub fn from_ints(x: i64, y: i64) -> Self {
        Point::new(int(x), int(y))
    }

    /// Complex conjugate.
    pub fn conj(&self) -> Self {
        Point::new(self.x.clone(), -self.y.clone())
    }

    /// Complex multiplication.
    pub fn mul_c(&self, o: &Point) -> Self {
        Point::new(
            &self.x * &o.x - &self.y * &o.y,
            &self.x * &o.y + &self.y * &o.x,
        )
    }

    /// Squared Euclidean norm, exact.
    pub fn norm_sqr(&self) -> Rational {
        &self.x * &self.x + &self.y * &self.y
    }

    /// Euclidean norm as `f64`.
    pub fn norm_f64(&self) -> f64 {
        rational_to_f64(&self.norm_sqr()).sqrt()
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (rational_to_f64(&self.x), rational_to_f64(&self.y))
    }

    /// Exact distance squared to another point.
    pub fn dist_sqr(&self, o: &Point) -> Rational {
        (self.clone() - o.clone()).norm_sqr()
    }

    /// Canonical string form `(p/q, r/s)`.
    pub fn canonical_string(&self) -> String {
        format!("({},{})", self.x, self.y)
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

impl Mul<Rational> for Point {
    type Output = Point;
    fn mul(self, s: Rational) -> Point {
        Point::new(self.x * s.clone(), self.y * s)
    }
}

/// `BigRational → f64`, with the usual rounding.
pub fn rational_to_f64(x: &Rational) -> f64 {
    num::ToPrimitive::to_f64(x).unwrap_or(f64::NAN)
}
