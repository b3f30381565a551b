//! Scalar abstraction shared by the exact and floating-point code paths.
//!
//! Probabilities and expectations in the domain model are always exact
//! [`Rational`]s. The LP solver and the capped-sum machinery are written
//! against [`Scalar`] so the same code runs over `f64` at scale.

use std::cmp::Ordering;
use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Numeric field used by the generic solvers.
pub trait Scalar:
    Clone + Debug + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// True when arithmetic is exact and comparisons need no tolerance.
    const EXACT: bool;

    /// Magnitude below which a value is treated as zero.
    fn epsilon() -> Self;

    fn from_rational(r: &Rational) -> Self;

    /// Exact value for exact scalars, the binary expansion otherwise.
    fn to_rational(&self) -> Rational;

    fn approx(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn is_negligible(&self) -> bool {
        self.abs() <= Self::epsilon()
    }

    fn is_positive_strict(&self) -> bool {
        *self > Self::epsilon()
    }

    fn is_negative_strict(&self) -> bool {
        *self < -Self::epsilon()
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn epsilon() -> Self {
        1e-11
    }

    fn from_rational(r: &Rational) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }

    fn to_rational(&self) -> Rational {
        Rational::from_float(*self).unwrap_or_else(Rational::zero)
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn epsilon() -> Self {
        Rational::zero()
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_rational(&self) -> Rational {
        self.clone()
    }
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: impl Into<BigInt>) -> Rational {
    Rational::from_integer(n.into())
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"p/q"`, `"p"` or a finite decimal such as `"0.25"` exactly.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Schema(format!("not an exact rational: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::Schema(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = whole.starts_with('-');
        let whole_abs: BigInt = match whole.trim_start_matches(['-', '+']) {
            "" => BigInt::zero(),
            w => w.parse().map_err(|_| bad())?,
        };
        let frac_num: BigInt = frac.parse().map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let mag = Rational::new(whole_abs * &den + frac_num, den);
        return Ok(if neg { -mag } else { mag });
    }
    let p: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(p))
}

pub fn parse_bigint(s: &str) -> Result<BigInt> {
    s.trim()
        .parse()
        .map_err(|_| Error::Schema(format!("not an integer: {s:?}")))
}

/// Canonical text form: `"p"` for integers, `"p/q"` otherwise.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Bracket `(lo, hi)` around `1/e` from the alternating factorial series.
/// Width is at most `1/(terms+1)!`.
pub fn inv_e_bracket(terms: u32) -> (Rational, Rational) {
    let terms = terms.max(2);
    let mut sum = Rational::zero();
    let mut fact = BigInt::one();
    let mut prev = Rational::zero();
    for j in 0..=terms {
        if j > 0 {
            fact *= BigInt::from(j);
        }
        prev = sum.clone();
        let term = Rational::new(BigInt::one(), fact.clone());
        if j % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if sum < prev {
        (sum, prev)
    } else {
        (prev, sum)
    }
}

/// Bracket around `1 - 1/e`.
pub fn one_minus_inv_e_bracket(terms: u32) -> (Rational, Rational) {
    let (lo, hi) = inv_e_bracket(terms);
    (Rational::one() - hi, Rational::one() - lo)
}

/// Bracket around `e/(e-1) = 1/(1 - 1/e)`.
pub fn e_over_e_minus_one_bracket(terms: u32) -> (Rational, Rational) {
    let (lo, hi) = one_minus_inv_e_bracket(terms);
    (hi.recip(), lo.recip())
}

/// Compares `lhs` with `coeff * c` where `c` is an irrational constant known
/// only through nested brackets. Refines until the order is certain.
/// Returns `None` if `max_terms` is not enough (never happens for rational
/// `lhs` unless `coeff * c` is rational, i.e. `coeff == 0`, handled directly).
pub fn certified_cmp(
    lhs: &Rational,
    coeff: &Rational,
    bracket: impl Fn(u32) -> (Rational, Rational),
    max_terms: u32,
) -> Option<Ordering> {
    if coeff.is_zero() {
        return Some(lhs.cmp(&Rational::zero()));
    }
    let mut terms = 12;
    loop {
        let (lo, hi) = bracket(terms);
        let (a, b) = if coeff.is_positive() {
            (coeff * &lo, coeff * &hi)
        } else {
            (coeff * &hi, coeff * &lo)
        };
        if *lhs < a {
            return Some(Ordering::Less);
        }
        if *lhs > b {
            return Some(Ordering::Greater);
        }
        if terms >= max_terms {
            return None;
        }
        terms = (terms * 2).min(max_terms);
    }
}

/// Lowest common multiple of the denominators.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |l, v| num_integer::Integer::lcm(&l, v.denom()))
}

/// Exact `numer/denom * scale` as an unsigned integer if it is integral and fits.
pub fn scaled_u128(r: &Rational, scale: &BigInt) -> Option<u128> {
    let s = r * Rational::from_integer(scale.clone());
    if !s.is_integer() || s.is_negative() {
        return None;
    }
    s.numer().to_u128()
}

pub fn max_rational(a: Rational, b: Rational) -> Rational {
    if a >= b {
        a
    } else {
        b
    }
}

pub fn min_bigint(a: &BigInt, b: &BigInt) -> BigInt {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}
