//! Certified natural logarithms of big integers and rationals.
//!
//! Values are computed in binary fixed point (`W` fractional bits) with every
//! truncation accounted for, then widened outward to an `f64` enclosure.
//! `ln z` for `z ∈ [1, 2)` uses `2 atanh((z − 1)/(z + 1))`.

use core::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Working fractional bits; comfortably below a relative tolerance of 2⁻⁴⁰.
pub const DEFAULT_BITS: u32 = 64;

/// Closed interval `[lo, hi]` of reals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Enclosure {
    pub lo: f64,
    pub hi: f64,
}

impl Enclosure {
    pub fn point(v: f64) -> Self {
        Enclosure { lo: v, hi: v }
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Width relative to the magnitude of the midpoint.
    pub fn relative_width(&self) -> f64 {
        let m = self.mid().abs();
        if m == 0.0 {
            self.width()
        } else {
            self.width() / m
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn certainly_gt(&self, v: f64) -> bool {
        self.lo > v
    }

    pub fn certainly_lt(&self, v: f64) -> bool {
        self.hi < v
    }

    pub fn scale(self, k: f64) -> Enclosure {
        self * Enclosure::point(k)
    }
}

fn fold_min(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

fn fold_max(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn outward(lo: f64, hi: f64) -> Enclosure {
    Enclosure { lo: lo.next_down(), hi: hi.next_up() }
}

impl Add for Enclosure {
    type Output = Enclosure;
    fn add(self, o: Enclosure) -> Enclosure {
        outward(self.lo + o.lo, self.hi + o.hi)
    }
}

impl Sub for Enclosure {
    type Output = Enclosure;
    fn sub(self, o: Enclosure) -> Enclosure {
        outward(self.lo - o.hi, self.hi - o.lo)
    }
}

impl Mul for Enclosure {
    type Output = Enclosure;
    fn mul(self, o: Enclosure) -> Enclosure {
        let c = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        outward(fold_min(&c), fold_max(&c))
    }
}

/// Panics if the divisor contains zero.
impl Div for Enclosure {
    type Output = Enclosure;
    fn div(self, o: Enclosure) -> Enclosure {
        assert!(o.lo > 0.0 || o.hi < 0.0, "divisor enclosure contains zero");
        let c = [self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi];
        outward(fold_min(&c), fold_max(&c))
    }
}

impl Neg for Enclosure {
    type Output = Enclosure;
    fn neg(self) -> Enclosure {
        Enclosure { lo: -self.hi, hi: -self.lo }
    }
}

/// Fixed-point enclosure `[lo, hi] · 2^-bits`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Fixed {
    lo: BigInt,
    hi: BigInt,
    bits: u32,
}

impl Fixed {
    fn to_enclosure(&self) -> Enclosure {
        let scale = |v: &BigInt| -> f64 {
            // Keep ~80 significant bits before converting.
            let shift = v.bits().saturating_sub(80);
            let m = (v >> shift).to_f64().unwrap();
            m * pow2(shift as i64 - self.bits as i64)
        };
        // Shifting a negative BigInt right floors, so `lo` only moves down;
        // `hi` is nudged up by one unit of the shift to stay outward.
        let lo = scale(&self.lo);
        let hi_shift = self.hi.bits().saturating_sub(80);
        let hi = if hi_shift > 0 {
            ((&self.hi >> hi_shift) + BigInt::one()).to_f64().unwrap() * pow2(hi_shift as i64 - self.bits as i64)
        } else {
            scale(&self.hi)
        };
        Enclosure { lo: lo.next_down(), hi: hi.next_up() }
    }
}

fn pow2(e: i64) -> f64 {
    // Exact for the exponent range used here.
    let mut v = 1.0f64;
    let (base, n) = if e >= 0 { (2.0f64, e) } else { (0.5f64, -e) };
    let mut b = base;
    let mut n = n as u64;
    while n > 0 {
        if n & 1 == 1 {
            v *= b;
        }
        b *= b;
        n >>= 1;
    }
    v
}

/// `atanh(a/b)` for `0 <= a/b <= 1/3`, in fixed point with `bits` fraction bits.
fn atanh_fixed(a: &BigInt, b: &BigInt, bits: u32) -> Fixed {
    if a.is_zero() {
        return Fixed { lo: BigInt::zero(), hi: BigInt::zero(), bits };
    }
    let a2 = a * a;
    let b2 = b * b;
    let mut num = a.clone();
    let mut den = b.clone();
    let mut sum = BigInt::zero();
    let mut terms = 0u32;
    let mut k = 0u32;
    loop {
        let t = (&num << bits) / (&den * (2 * k + 1));
        if t.is_zero() {
            break;
        }
        sum += t;
        terms += 1;
        num *= &a2;
        den *= &b2;
        k += 1;
    }
    // Each floor loses < 1 ulp; the omitted tail is below (9/8) ulp.
    Fixed { hi: &sum + terms + 2, lo: sum, bits }
}

fn ln2_fixed(bits: u32) -> Fixed {
    let t = atanh_fixed(&BigInt::one(), &BigInt::from(3), bits);
    Fixed { lo: t.lo * 2, hi: t.hi * 2, bits }
}

/// `ln(y / 2^bits)` for `2^bits <= y < 2^(bits+1)`.
fn ln_mantissa(y: &BigInt, bits: u32) -> Fixed {
    let one = BigInt::one() << bits;
    let t = atanh_fixed(&(y - &one), &(y + &one), bits);
    Fixed { lo: t.lo * 2, hi: t.hi * 2, bits }
}

fn ln_int_fixed(n: &BigInt, bits: u32) -> Fixed {
    assert!(n.sign() == Sign::Plus, "logarithm of a non-positive integer");
    let e = n.bits() - 1;
    let (y, exact) = if e <= bits as u64 {
        (n << (bits as u64 - e), true)
    } else {
        let y = n >> (e - bits as u64);
        let exact = (&y << (e - bits as u64)) == *n;
        (y, exact)
    };
    let lo_m = ln_mantissa(&y, bits);
    let hi_m = if exact { lo_m.clone() } else { ln_mantissa(&(&y + 1), bits) };
    let ln2 = ln2_fixed(bits);
    let e = BigInt::from(e);
    Fixed { lo: &e * ln2.lo + lo_m.lo, hi: &e * ln2.hi + hi_m.hi, bits }
}

/// Enclosure of `ln n` for a positive integer.
pub fn ln_int(n: &BigInt, bits: u32) -> Enclosure {
    ln_int_fixed(n, bits).to_enclosure()
}

/// Enclosure of `ln r` for a positive rational.
pub fn ln_rational(r: &BigRational, bits: u32) -> Enclosure {
    assert!(r.is_positive(), "logarithm of a non-positive rational");
    let a = ln_int_fixed(r.numer(), bits);
    let b = ln_int_fixed(r.denom(), bits);
    Fixed { lo: a.lo - b.hi, hi: a.hi - b.lo, bits }.to_enclosure()
}

/// Working bits that meet a relative tolerance of `2^-tolerance_bits`.
pub fn bits_for_tolerance(tolerance_bits: u32) -> u32 {
    tolerance_bits + 24
}
