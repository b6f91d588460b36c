//! Scalar abstraction shared by the weighted model, the influence matrix and
//! the probability bounds.
//!
//! Everything that only needs field arithmetic is generic over [`Scalar`], so
//! it runs on `f32`, `f64` and on exact [`BigRational`] values. Code that
//! needs `exp`/`ln` additionally requires [`num_traits::Float`].

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync
{
    /// Converts a small nonnegative integer count.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
impl Scalar for BigRational {}

/// Exact rational from a big-integer ratio.
pub fn ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> BigRational {
    BigRational::new(num.into(), den.into())
}

/// Parses `"p/q"`, `"p"` or a finite decimal literal such as `"0.75"` or
/// `"1e-9"` into an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q == BigInt::from(0) {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    if let Some((mant, exp)) = s.split_once(['e', 'E']) {
        let m = parse_rational(mant).filter(|_| !mant.contains('/'))?;
        let e: i32 = exp.parse().ok()?;
        let scale = num_traits::pow(BigInt::from(10), e.unsigned_abs() as usize);
        return Some(if e >= 0 { m * scale } else { m / scale });
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
        let mag: BigInt = digits.parse().ok()?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let r = BigRational::new(mag, den);
        return Some(if neg { -r } else { r });
    }
    let p: BigInt = s.parse().ok()?;
    Some(BigRational::from_integer(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rationals() {
        assert_eq!(parse_rational("3/4"), Some(ratio(3, 4)));
        assert_eq!(parse_rational("-2"), Some(ratio(-2, 1)));
        assert_eq!(parse_rational("0.25"), Some(ratio(1, 4)));
        assert_eq!(parse_rational("-1.5"), Some(ratio(-3, 2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational("1e-9"), Some(ratio(1, 1_000_000_000)));
        assert_eq!(parse_rational("2.5E2"), Some(ratio(250, 1)));
        assert_eq!(parse_rational("1/2e3"), None);
        assert_eq!(parse_rational("e5"), None);
    }
}
