//! Small helpers on top of [`BigRational`].

use alloc::format;
use alloc::string::{String, ToString};
use core::cmp::Ordering;
use core::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::{Error, Result};

pub type Rational = BigRational;

pub fn int<T: Into<BigInt>>(v: T) -> BigRational {
    BigRational::from_integer(v.into())
}

pub fn ratio<A: Into<BigInt>, B: Into<BigInt>>(num: A, den: B) -> BigRational {
    BigRational::new(num.into(), den.into())
}

/// `⌊r⌋` as an integer.
pub fn floor(r: &BigRational) -> BigInt {
    r.numer().div_floor(r.denom())
}

pub fn ceil(r: &BigRational) -> BigInt {
    -((-r.numer()).div_floor(r.denom()))
}

/// Fractional part in `[0, 1)`.
pub fn frac(r: &BigRational) -> BigRational {
    let (num, den) = (r.numer(), r.denom());
    BigRational::new(num.mod_floor(den), den.clone())
}

/// Representative of `r` modulo 1 in `[-1/2, 1/2)`.
pub fn centered(r: &BigRational) -> BigRational {
    let half = ratio(1, 2);
    frac(&(r + &half)) - half
}

/// Distance from `r` to the nearest integer.
pub fn dist_to_int(r: &BigRational) -> BigRational {
    centered(r).abs()
}

/// Formats as `num/den` (denominator always printed).
pub fn fmt(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `p/q`, a plain integer, or a finite decimal such as `0.25`.
pub fn parse(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::InvalidArgument(format!("cannot parse rational {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((whole, fraction)) = s.split_once('.') {
        if fraction.is_empty() || !fraction.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let digits = whole.trim_start_matches(['-', '+']).to_string() + fraction;
        let mut n = BigInt::from_str(&digits).map_err(|_| bad())?;
        if negative {
            n = -n;
        }
        let d = num_traits::pow(BigInt::from(10u32), fraction.len());
        return Ok(BigRational::new(n, d));
    }
    BigInt::from_str(s).map(BigRational::from_integer).map_err(|_| bad())
}

/// Nearest `f64` (for display and plots only).
pub fn to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    if let Some(v) = r.to_f64() {
        return v;
    }
    // Scale both sides down when they overflow f64.
    let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
    let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

pub fn sign(r: &BigRational) -> i8 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

pub fn is_one(r: &BigRational) -> bool {
    r.is_one()
}

/// Sum over the product denominator, reduced once at the end.
pub fn sum<'a, I: IntoIterator<Item = &'a BigRational>>(terms: I) -> BigRational {
    let mut num = BigInt::zero();
    let mut den = BigInt::one();
    for t in terms {
        if t.denom() == &den {
            num += t.numer();
        } else {
            num = num * t.denom() + t.numer() * &den;
            den *= t.denom();
        }
    }
    BigRational::new(num, den)
}

/// Sign of `Σ c_i r_i` for small integer weights, without normalising.
pub fn signum_combination(terms: &[(i64, &BigRational)]) -> Ordering {
    let mut num = BigInt::zero();
    let mut den = BigInt::one();
    for &(c, t) in terms {
        if c == 0 {
            continue;
        }
        if t.denom() == &den {
            num += t.numer() * c;
        } else {
            num = num * t.denom() + t.numer() * c * &den;
            den *= t.denom();
        }
    }
    num.sign().cmp(&num_bigint::Sign::NoSign)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse("1/7").unwrap(), ratio(1, 7));
        assert_eq!(parse("-3").unwrap(), int(-3));
        assert_eq!(parse("0.25").unwrap(), ratio(1, 4));
        assert_eq!(parse("-1.5").unwrap(), ratio(-3, 2));
        assert!(parse("1/0").is_err());
        assert!(parse("abc").is_err());
    }

    #[test]
    fn frac_and_centered() {
        assert_eq!(frac(&ratio(-1, 3)), ratio(2, 3));
        assert_eq!(centered(&ratio(3, 4)), ratio(-1, 4));
        assert_eq!(dist_to_int(&ratio(7, 5)), ratio(2, 5));
        assert_eq!(floor(&ratio(-7, 2)), BigInt::from(-4));
        assert_eq!(ceil(&ratio(-7, 2)), BigInt::from(-3));
    }

    #[test]
    fn to_f64_handles_huge_parts() {
        let big = num_traits::pow(BigInt::from(10u32), 400);
        let r = BigRational::new(big.clone() * 3u32, big);
        assert!((to_f64(&r) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn unreduced_sum_and_sign() {
        let xs = [ratio(1, 6), ratio(-3, 10), ratio(7, 15), ratio(1, 6)];
        let reduced = xs.iter().fold(BigRational::zero(), |a, b| a + b);
        assert_eq!(sum(&xs), reduced);
        assert_eq!(sum(&[]), BigRational::zero());
        let (a, b) = (ratio(1, 3), ratio(2, 7));
        assert_eq!(signum_combination(&[(1, &a), (-1, &b)]), Ordering::Greater);
        assert_eq!(signum_combination(&[(6, &b), (-1, &ratio(12, 7))]), Ordering::Equal);
        assert_eq!(signum_combination(&[(-2, &a), (1, &b)]), Ordering::Less);
    }
}
