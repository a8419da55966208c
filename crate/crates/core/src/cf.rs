//! Continued fractions of quadratic irrationals in `(0, 1)`.
//!
//! α is only ever described by its partial quotients `[0; a_1, a_2, ...]`
//! (a finite head followed by a periodic tail), so every quantity derived
//! from it is an exact integer or rational.

use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::rat::ratio;
use crate::{Error, Result};

/// Extra depth (beyond the first attempt) that comparisons against α may use
/// before giving up.
pub const MAX_EXTRA_DEPTH: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// `(√5 − 1)/2 = [0; 1, 1, 1, ...]`
    Golden,
    /// `√2 − 1 = [0; 2, 2, 2, ...]`
    Sqrt2Minus1,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Golden => "golden",
            Preset::Sqrt2Minus1 => "sqrt2m1",
        }
    }
}

/// An irrational α ∈ (0, 1) given as `[0; head..., (tail...)^∞]`.
///
/// `head` holds `a_1, ..., a_h` (the leading `a_0 = 0` is implicit) and
/// `tail` repeats forever, so α is a quadratic irrational.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IrrationalSpec {
    head: Vec<u64>,
    tail: Vec<u64>,
    preset: Option<Preset>,
}

impl IrrationalSpec {
    pub fn new(head: Vec<u64>, tail: Vec<u64>) -> Result<Self> {
        if tail.is_empty() {
            return Err(Error::InvalidSpec("periodic tail must be nonempty".into()));
        }
        if head.iter().chain(tail.iter()).any(|&a| a == 0) {
            return Err(Error::InvalidSpec(
                "partial quotients a_i (i >= 1) must be positive".into(),
            ));
        }
        let preset = match (head.as_slice(), tail.as_slice()) {
            ([], [1]) => Some(Preset::Golden),
            ([], [2]) => Some(Preset::Sqrt2Minus1),
            _ => None,
        };
        Ok(IrrationalSpec { head, tail, preset })
    }

    pub fn preset(preset: Preset) -> Self {
        let q = match preset {
            Preset::Golden => 1,
            Preset::Sqrt2Minus1 => 2,
        };
        IrrationalSpec { head: Vec::new(), tail: alloc::vec![q], preset: Some(preset) }
    }

    pub fn golden() -> Self {
        Self::preset(Preset::Golden)
    }

    pub fn sqrt2m1() -> Self {
        Self::preset(Preset::Sqrt2Minus1)
    }

    pub fn head(&self) -> &[u64] {
        &self.head
    }

    pub fn tail(&self) -> &[u64] {
        &self.tail
    }

    pub fn preset_kind(&self) -> Option<Preset> {
        self.preset
    }

    /// Partial quotient `a_i`; `a_0 = 0`.
    pub fn quotient(&self, i: usize) -> u64 {
        match i {
            0 => 0,
            i if i <= self.head.len() => self.head[i - 1],
            i => self.tail[(i - 1 - self.head.len()) % self.tail.len()],
        }
    }

    pub fn convergents(&self) -> Convergents<'_> {
        Convergents {
            spec: self,
            index: 0,
            prev: (BigInt::one(), BigInt::zero()),
            prev2: (BigInt::zero(), BigInt::one()),
        }
    }
}

/// `golden`, `sqrt2m1`, `quotients=a1,a2,...` (purely periodic) or
/// `periodic=head;tail` with comma-separated lists.
impl core::str::FromStr for IrrationalSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let list = |v: &str| -> Result<Vec<u64>> {
            v.split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<u64>().map_err(|_| Error::InvalidSpec(format!("bad partial quotient {t:?}"))))
                .collect()
        };
        match s {
            "golden" => Ok(Self::golden()),
            "sqrt2m1" => Ok(Self::sqrt2m1()),
            _ => {
                if let Some(rest) = s.strip_prefix("quotients=") {
                    Self::new(Vec::new(), list(rest)?)
                } else if let Some(rest) = s.strip_prefix("periodic=") {
                    let (head, tail) = rest
                        .split_once(';')
                        .ok_or_else(|| Error::InvalidSpec("periodic spec needs head;tail".into()))?;
                    Self::new(list(head)?, list(tail)?)
                } else {
                    Err(Error::InvalidSpec(format!("unknown alpha {s:?}")))
                }
            }
        }
    }
}

impl fmt::Display for IrrationalSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(p) = self.preset {
            return f.write_str(p.name());
        }
        let join = |v: &[u64]| {
            v.iter().map(|a| format!("{a}")).collect::<Vec<_>>().join(",")
        };
        write!(f, "periodic={};{}", join(&self.head), join(&self.tail))
    }
}

/// The convergent `p_n / q_n` of α.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Convergent {
    pub index: usize,
    pub p: BigInt,
    pub q: BigInt,
}

impl Convergent {
    /// `(−1)^n`, the sign of `α − p_n/q_n`.
    pub fn parity(&self) -> i8 {
        if self.index.is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    pub fn value(&self) -> BigRational {
        BigRational::new(self.p.clone(), self.q.clone())
    }
}

/// Iterator over `(p_n, q_n)`, `n = 0, 1, 2, ...`, seeded with
/// `p_{−1} = 1, q_{−1} = 0` and `p_{−2} = 0, q_{−2} = 1`.
pub struct Convergents<'a> {
    spec: &'a IrrationalSpec,
    index: usize,
    prev: (BigInt, BigInt),
    prev2: (BigInt, BigInt),
}

impl Iterator for Convergents<'_> {
    type Item = Convergent;

    fn next(&mut self) -> Option<Convergent> {
        let a = BigInt::from(self.spec.quotient(self.index));
        let p = &a * &self.prev.0 + &self.prev2.0;
        let q = &a * &self.prev.1 + &self.prev2.1;
        self.prev2 = core::mem::replace(&mut self.prev, (p.clone(), q.clone()));
        let c = Convergent { index: self.index, p, q };
        self.index += 1;
        Some(c)
    }
}

/// Convergents `0..=upto`.
pub fn convergents(spec: &IrrationalSpec, upto: usize) -> Vec<Convergent> {
    spec.convergents().take(upto + 1).collect()
}

pub fn convergent(spec: &IrrationalSpec, n: usize) -> Convergent {
    spec.convergents().nth(n).expect("convergent iterator is infinite")
}

/// `lo < α < hi`, built from two consecutive convergents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalBracket {
    pub depth: usize,
    pub lo: BigRational,
    pub hi: BigRational,
}

impl RationalBracket {
    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    /// Compares α against `r`, or `None` when `r` falls inside the bracket.
    pub fn compare(&self, r: &BigRational) -> Option<Ordering> {
        if r <= &self.lo {
            Some(Ordering::Greater)
        } else if r >= &self.hi {
            Some(Ordering::Less)
        } else {
            None
        }
    }
}

/// Bracket from convergents `depth` and `depth + 1`; its width is
/// `1/(q_N q_{N+1})`.
pub fn alpha_bracket(spec: &IrrationalSpec, depth: usize) -> Result<RationalBracket> {
    if depth == 0 {
        return Err(Error::InvalidArgument("bracket depth must be >= 1".into()));
    }
    let mut it = spec.convergents().skip(depth);
    let a = it.next().unwrap().value();
    let b = it.next().unwrap().value();
    let (lo, hi) = if depth.is_multiple_of(2) { (a, b) } else { (b, a) };
    Ok(RationalBracket { depth, lo, hi })
}

/// Sign of `α − r`, escalating the bracket depth from `start` until decided.
pub fn compare_alpha(spec: &IrrationalSpec, r: &BigRational, start: usize) -> Result<Ordering> {
    let start = start.max(1);
    // Walk consecutive convergents once instead of rebuilding brackets.
    let mut it = spec.convergents().skip(start);
    let mut cur = it.next().unwrap();
    for depth in start..start + MAX_EXTRA_DEPTH {
        let next = it.next().unwrap();
        let (a, b) = (cur.value(), next.value());
        let (lo, hi) = if depth % 2 == 0 { (a, b) } else { (b, a) };
        if let Some(ord) = (RationalBracket { depth, lo, hi }).compare(r) {
            return Ok(ord);
        }
        cur = next;
    }
    Err(Error::DepthCapExceeded { max_depth: start + MAX_EXTRA_DEPTH })
}

/// Exact check of the classical two-sided estimate
/// `1/(2 q_n q_{n+1}) < (−1)^n (α − p_n/q_n) < 1/(q_n q_{n+1})`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapCertificate {
    pub n: usize,
    /// Bracket depth used for the decision.
    pub depth: usize,
    /// Observed sign of `α − p_n/q_n`.
    pub sign: i8,
    pub lower_bound: BigRational,
    pub upper_bound: BigRational,
    /// Enclosure `(lo, hi)` of `|α − p_n/q_n|` (open interval).
    pub witness: (BigRational, BigRational),
    pub lower_ok: bool,
    pub upper_ok: bool,
}

impl GapCertificate {
    pub fn sign_ok(&self) -> bool {
        self.sign == if self.n.is_multiple_of(2) { 1 } else { -1 }
    }

    pub fn passed(&self) -> bool {
        self.sign_ok() && self.lower_ok && self.upper_ok
    }
}

/// Decides the estimate with the bracket at exactly `depth`
/// (`IndecisiveBracket` if that bracket is too wide).
pub fn gap_bounds_check_at(spec: &IrrationalSpec, n: usize, depth: usize) -> Result<GapCertificate> {
    if n == 0 {
        return Err(Error::InvalidArgument("gap bounds need n >= 1".into()));
    }
    if depth <= n + 1 {
        return Err(Error::IndecisiveBracket { depth });
    }
    let conv = spec.convergents().skip(n).take(2).collect::<Vec<_>>();
    let (cn, cn1) = (&conv[0], &conv[1]);
    let pq = cn.value();
    let qq = &cn.q * &cn1.q;
    let upper_bound = ratio(1, qq.clone());
    let lower_bound = ratio(1, qq * 2);

    let bracket = alpha_bracket(spec, depth)?;
    // α − p/q lies strictly inside (lo − p/q, hi − p/q).
    let d_lo = &bracket.lo - &pq;
    let d_hi = &bracket.hi - &pq;
    let sign = if d_lo >= BigRational::zero() {
        1
    } else if d_hi <= BigRational::zero() {
        -1
    } else {
        return Err(Error::IndecisiveBracket { depth });
    };
    let (w_lo, w_hi) = if sign > 0 { (d_lo, d_hi) } else { (-d_hi, -d_lo) };

    let decide = |holds: bool, fails: bool| -> Result<bool> {
        match (holds, fails) {
            (true, _) => Ok(true),
            (_, true) => Ok(false),
            _ => Err(Error::IndecisiveBracket { depth }),
        }
    };
    let lower_ok = decide(w_lo >= lower_bound, w_hi <= lower_bound)?;
    let upper_ok = decide(w_hi <= upper_bound, w_lo >= upper_bound)?;
    Ok(GapCertificate {
        n,
        depth,
        sign,
        lower_bound,
        upper_bound,
        witness: (w_lo, w_hi),
        lower_ok,
        upper_ok,
    })
}

/// Like [`gap_bounds_check_at`], starting at depth `n + 3` and deepening the
/// bracket until the comparison is decided.
pub fn gap_bounds_check(spec: &IrrationalSpec, n: usize) -> Result<GapCertificate> {
    let start = n + 3;
    for depth in start..start + MAX_EXTRA_DEPTH {
        match gap_bounds_check_at(spec, n, depth) {
            Err(Error::IndecisiveBracket { .. }) => continue,
            other => return other,
        }
    }
    Err(Error::DepthCapExceeded { max_depth: start + MAX_EXTRA_DEPTH })
}

/// `1/(q_N q_{N+1})`, an upper bound for `|α − p_N/q_N|`.
pub fn approximation_width(spec: &IrrationalSpec, depth: usize) -> BigRational {
    let mut it = spec.convergents().skip(depth);
    let a = it.next().unwrap();
    let b = it.next().unwrap();
    ratio(1, a.q * b.q)
}
