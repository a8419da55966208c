//! The four nested interval families `F^{s₋s₊}`.
//!
//! At level `n` each family is a `P_n`-periodic array of closed intervals of
//! length `P_n/6`, `P_n = 1/(A_n q_{k_n})`, offset inside the period by
//! `[-1/12, 1/12]` (`++`), `[1/6, 1/3]` (`−+`), `[5/12, 7/12]` (`−−`) or
//! `[2/3, 5/6]` (`+−`). Intervals are kept in lifted coordinates on ℝ so the
//! `++` interval around 0 stays in one piece; reduce mod 1 for the circle.

use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::params::{LevelParams, Profile};
use crate::rat::{ceil, centered, floor, frac, int, ratio};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

/// `(s₋, s₊)`: the signs of the limits of `φ^(m)` as `m → −∞` and `m → +∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignPair {
    pub minus: Sign,
    pub plus: Sign,
}

impl SignPair {
    pub const PP: SignPair = SignPair { minus: Sign::Plus, plus: Sign::Plus };
    pub const MM: SignPair = SignPair { minus: Sign::Minus, plus: Sign::Minus };
    pub const PM: SignPair = SignPair { minus: Sign::Plus, plus: Sign::Minus };
    pub const MP: SignPair = SignPair { minus: Sign::Minus, plus: Sign::Plus };
    pub const ALL: [SignPair; 4] = [Self::PP, Self::MM, Self::PM, Self::MP];

    pub fn is_aligned(self) -> bool {
        self.minus == self.plus
    }

    /// `pp`, `mm`, `pm` or `mp` (first letter is `s₋`).
    pub fn code(self) -> &'static str {
        match (self.minus, self.plus) {
            (Sign::Plus, Sign::Plus) => "pp",
            (Sign::Minus, Sign::Minus) => "mm",
            (Sign::Plus, Sign::Minus) => "pm",
            (Sign::Minus, Sign::Plus) => "mp",
        }
    }

    pub fn from_code(code: &str) -> Result<Self> {
        match code {
            "pp" => Ok(Self::PP),
            "mm" => Ok(Self::MM),
            "pm" => Ok(Self::PM),
            "mp" => Ok(Self::MP),
            _ => Err(Error::InvalidArgument(alloc::format!("unknown family {code:?}"))),
        }
    }

    /// Left end of the interval inside one period, in units of the period.
    pub fn offset(self) -> BigRational {
        match (self.minus, self.plus) {
            (Sign::Plus, Sign::Plus) => ratio(-1, 12),
            (Sign::Minus, Sign::Plus) => ratio(1, 6),
            (Sign::Minus, Sign::Minus) => ratio(5, 12),
            (Sign::Plus, Sign::Minus) => ratio(2, 3),
        }
    }
}

impl fmt::Display for SignPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// `F^{s₋s₊}_{n,j}` with lifted endpoints `lo = (offset + j) P_n`, `hi = lo + P_n/6`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetInterval {
    pub family: SignPair,
    pub n: u32,
    pub j: BigInt,
    pub lo: BigRational,
    pub hi: BigRational,
}

impl TargetInterval {
    pub fn length(&self) -> BigRational {
        &self.hi - &self.lo
    }

    /// Left endpoint on the circle, in `[0, 1)`.
    pub fn a(&self) -> BigRational {
        frac(&self.lo)
    }

    /// Right endpoint on the circle, in `[0, 1)`.
    pub fn b(&self) -> BigRational {
        frac(&self.hi)
    }

    /// True when the interval straddles `0 ≡ 1`.
    pub fn wraps(&self) -> bool {
        self.a() > self.b()
    }

    pub fn center(&self) -> BigRational {
        (&self.lo + &self.hi) / int(2)
    }
}

fn level_of(profile: &Profile, n: u32) -> Result<&LevelParams> {
    profile.level(n).ok_or(Error::DepthExceedsProfile { depth: n, available: profile.n_max() })
}

fn lifted(level: &LevelParams, family: SignPair, n: u32, j_lifted: &BigInt) -> TargetInterval {
    let p = level.period();
    let lo = (family.offset() + int(j_lifted.clone())) * &p;
    let hi = &lo + &p / int(6);
    TargetInterval { family, n, j: j_lifted.mod_floor(&level.cells()), lo, hi }
}

pub fn interval(profile: &Profile, family: SignPair, n: u32, j: &BigInt) -> Result<TargetInterval> {
    let level = level_of(profile, n)?;
    if j.is_negative() || j >= &level.cells() {
        return Err(Error::IndexOutOfRange { n, j: alloc::format!("{j}") });
    }
    Ok(lifted(level, family, n, j))
}

/// Level-`n+1` intervals lying inside a level-`n` parent (closed containment;
/// touching the parent's boundary counts).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChildRange {
    pub family: SignPair,
    pub n: u32,
    /// First child in lifted numbering (may be negative or exceed the cell count).
    pub first: BigInt,
    pub count: BigInt,
    cells: BigInt,
}

impl ChildRange {
    /// Canonical child indices `j ∈ [0, A q)`, in increasing lifted order.
    pub fn indices(&self) -> impl Iterator<Item = BigInt> + '_ {
        let mut k = BigInt::zero();
        core::iter::from_fn(move || {
            if k >= self.count {
                return None;
            }
            let j = (&self.first + &k).mod_floor(&self.cells);
            k += 1;
            Some(j)
        })
    }

    /// Lifted index of the `i`-th child.
    pub fn lifted(&self, i: &BigInt) -> BigInt {
        &self.first + i
    }

    pub fn to_vec(&self) -> Vec<BigInt> {
        self.indices().collect()
    }
}

pub fn children(profile: &Profile, family: SignPair, parent: &TargetInterval) -> Result<ChildRange> {
    let child = level_of(profile, parent.n + 1)?;
    Ok(child_range_of(child, family, &parent.lo, &parent.hi))
}

/// Children of an arbitrary lifted interval `[lo, hi]` at the given level.
pub fn child_range_of(child: &LevelParams, family: SignPair, lo: &BigRational, hi: &BigRational) -> ChildRange {
    let cells = int(child.cells());
    let off = family.offset();
    // (off + j') P' >= lo  and  (off + 1/6 + j') P' <= hi
    let first = ceil(&(lo * &cells - &off));
    let last = floor(&(hi * &cells - &off - ratio(1, 6)));
    let count = if last >= first { &last - &first + 1 } else { BigInt::zero() };
    ChildRange { family, n: child.n, first, count, cells: child.cells() }
}

/// A nested choice of intervals, one per level, and the point it represents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitPath {
    pub family: SignPair,
    /// Canonical `j_l`, `l = 1..=depth`.
    pub js: Vec<BigInt>,
    /// Center of the deepest interval, in `[0, 1)`.
    pub x: BigRational,
}

impl DigitPath {
    pub fn depth(&self) -> u32 {
        self.js.len() as u32
    }

    /// `x_l = x − j_l P_l`, represented in `[−1/2, 1/2)`.
    pub fn reductions(&self, profile: &Profile) -> Vec<BigRational> {
        reductions(profile, &self.x, &self.js)
    }
}

pub fn reductions(profile: &Profile, x: &BigRational, js: &[BigInt]) -> Vec<BigRational> {
    js.iter()
        .zip(&profile.levels)
        .map(|(j, l)| centered(&(x - int(j.clone()) * l.period())))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SamplePolicy {
    /// First child at every level.
    Leftmost,
    /// Middle child at every level (`j_1 = 0`).
    Center,
    /// Explicit canonical indices.
    Given(Vec<BigInt>),
}

/// Center of a depth-`depth` interval of the family, chosen by `policy`.
pub fn sample_point(profile: &Profile, family: SignPair, policy: &SamplePolicy, depth: u32) -> Result<DigitPath> {
    if depth == 0 || depth > profile.n_max() {
        return Err(Error::DepthExceedsProfile { depth, available: profile.n_max() });
    }
    let mut js = Vec::with_capacity(depth as usize);
    let first_j = match policy {
        SamplePolicy::Given(path) => {
            if path.len() < depth as usize {
                return Err(Error::InvalidArgument("digit path shorter than depth".into()));
            }
            path[0].clone()
        }
        _ => BigInt::zero(),
    };
    let mut current = interval(profile, family, 1, &first_j)?;
    js.push(current.j.clone());
    for n in 2..=depth {
        let range = children(profile, family, &current)?;
        if range.count.is_zero() {
            return Err(Error::InvalidArgument(alloc::format!("interval at level {} has no children", n - 1)));
        }
        let pick = match policy {
            SamplePolicy::Leftmost => BigInt::zero(),
            SamplePolicy::Center => &range.count / 2,
            SamplePolicy::Given(path) => {
                let want = &path[(n - 1) as usize];
                let cells = profile.level(n).unwrap().cells();
                let k = (want - &range.first).mod_floor(&cells);
                if k >= range.count {
                    return Err(Error::InvalidArgument(alloc::format!(
                        "j = {want} at level {n} is not nested in its parent"
                    )));
                }
                k
            }
        };
        let lifted_j = range.lifted(&pick);
        current = lifted(profile.level(n).unwrap(), family, n, &lifted_j);
        js.push(current.j.clone());
    }
    let x = frac(&current.center());
    Ok(DigitPath { family, js, x })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Membership {
    pub member: bool,
    /// Smallest level whose union misses `x`.
    pub first_failing_level: Option<u32>,
    /// Canonical `j_l` of the containing intervals found before the failure.
    pub js: Vec<BigInt>,
}

/// Whether `x` lies in the level-`l` union for every `l <= up_to`.
pub fn member(profile: &Profile, family: SignPair, x: &BigRational, up_to: u32) -> Result<Membership> {
    if up_to > profile.n_max() {
        return Err(Error::DepthExceedsProfile { depth: up_to, available: profile.n_max() });
    }
    let x = frac(x);
    let off = family.offset();
    let sixth = ratio(1, 6);
    let mut js = Vec::new();
    for l in profile.levels.iter().take(up_to as usize) {
        let t = &x * int(l.cells()) - &off;
        let j = floor(&t);
        if t - int(j.clone()) > sixth {
            return Ok(Membership { member: false, first_failing_level: Some(l.n), js });
        }
        js.push(j.mod_floor(&l.cells()));
    }
    Ok(Membership { member: true, first_failing_level: None, js })
}

/// Every level-`n` interval reachable through nesting from level 1, in lifted
/// order, refusing to produce more than `cap` of them.
pub fn nested_intervals(profile: &Profile, family: SignPair, n: u32, cap: u64) -> Result<Vec<TargetInterval>> {
    level_of(profile, n)?;
    let l1 = &profile.levels[0];
    let too_many = |count: &BigInt| Error::EnumerationCapExceeded { requested: alloc::format!("{count}"), cap };
    if l1.cells() > BigInt::from(cap) {
        return Err(too_many(&l1.cells()));
    }
    let mut current: Vec<TargetInterval> = Vec::new();
    let mut j = BigInt::zero();
    while j < l1.cells() {
        current.push(lifted(l1, family, 1, &j));
        j += 1;
    }
    for level in 2..=n {
        let child = profile.level(level).unwrap();
        let mut next = Vec::new();
        for iv in &current {
            let r = child_range_of(child, family, &iv.lo, &iv.hi);
            let total = BigInt::from(next.len()) + &r.count;
            if total > BigInt::from(cap) {
                return Err(too_many(&total));
            }
            let mut k = BigInt::zero();
            while k < r.count {
                next.push(lifted(child, family, level, &r.lifted(&k)));
                k += 1;
            }
        }
        current = next;
    }
    Ok(current)
}

/// Iterates over all `A_n q_{k_n}` intervals of level `n`.
pub fn level_intervals<'a>(profile: &'a Profile, family: SignPair, n: u32) -> Result<impl Iterator<Item = TargetInterval> + 'a> {
    let level = level_of(profile, n)?;
    let cells = level.cells();
    let mut j = BigInt::zero();
    Ok(core::iter::from_fn(move || {
        if j >= cells {
            return None;
        }
        let iv = lifted(level, family, n, &j);
        j += BigInt::one();
        Some(iv)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cf::IrrationalSpec;
    use crate::params::{select_levels, Strategy, Variant};

    fn greedy_main(n: u32) -> Profile {
        select_levels(&IrrationalSpec::golden(), Strategy::Greedy, Variant::Main, n).unwrap()
    }

    #[test]
    fn first_pp_interval_wraps() {
        let p = greedy_main(3);
        let iv = interval(&p, SignPair::PP, 1, &BigInt::zero()).unwrap();
        let period = p.levels[0].period();
        assert_eq!(iv.lo, -&period / int(12));
        assert_eq!(iv.hi, &period / int(12));
        assert!(iv.wraps());
        assert_eq!(iv.a(), int(1) - &period / int(12));
    }

    #[test]
    fn family_offsets_and_lengths() {
        let p = greedy_main(3);
        for n in 1..=3 {
            let l = p.level(n).unwrap();
            let half = l.period() / int(2);
            for j in [0i64, 1, 17] {
                let j = BigInt::from(j);
                let pp = interval(&p, SignPair::PP, n, &j).unwrap();
                let mm = interval(&p, SignPair::MM, n, &j).unwrap();
                let mp = interval(&p, SignPair::MP, n, &j).unwrap();
                let pm = interval(&p, SignPair::PM, n, &j).unwrap();
                assert_eq!(&mm.lo - &pp.lo, half);
                assert_eq!(&pm.lo - &mp.lo, half);
                for iv in [pp, mm, mp, pm] {
                    assert_eq!(iv.length() * int(l.cells() * 6), int(1));
                }
            }
        }
    }

    #[test]
    fn index_out_of_range() {
        let p = greedy_main(2);
        let cells = p.levels[0].cells();
        assert!(matches!(interval(&p, SignPair::PP, 1, &cells), Err(Error::IndexOutOfRange { .. })));
        assert!(interval(&p, SignPair::PP, 1, &BigInt::from(-1)).is_err());
        assert!(interval(&p, SignPair::PP, 3, &BigInt::zero()).is_err());
    }

    #[test]
    fn uniform_spacing_tiles_circle() {
        let p = greedy_main(2);
        let all: Vec<_> = level_intervals(&p, SignPair::MP, 1).unwrap().collect();
        assert_eq!(BigInt::from(all.len()), p.levels[0].cells());
        let period = p.levels[0].period();
        for w in all.windows(2) {
            assert_eq!(&w[1].lo - &w[0].lo, period);
            // gap = 5P/6 > P/2
            let gap = &w[1].lo - &w[0].hi;
            assert_eq!(gap, &period * ratio(5, 6));
        }
    }

    #[test]
    fn children_against_scan() {
        let p = greedy_main(3);
        for family in SignPair::ALL {
            for j in [0i64, 1, 35, 71] {
                let parent = interval(&p, family, 1, &BigInt::from(j)).unwrap();
                let range = children(&p, family, &parent).unwrap();
                // brute force over every level-2 interval, with circle shifts
                let mut scan = Vec::new();
                for iv in level_intervals(&p, family, 2).unwrap() {
                    let inside = [-1i64, 0, 1].iter().any(|s| {
                        let lo = &iv.lo + int(*s);
                        let hi = &iv.hi + int(*s);
                        lo >= parent.lo && hi <= parent.hi
                    });
                    if inside {
                        scan.push(iv.j);
                    }
                }
                let mut fast = range.to_vec();
                fast.sort();
                scan.sort();
                assert_eq!(fast, scan, "family {family} parent {j}");
                assert!(range.count >= BigInt::from(3));
            }
        }
    }

    #[test]
    fn center_pp_sample_is_zero() {
        let p = greedy_main(4);
        for depth in 1..=4 {
            let s = sample_point(&p, SignPair::PP, &SamplePolicy::Center, depth).unwrap();
            assert!(s.x.is_zero());
        }
    }

    #[test]
    fn sample_reductions_in_band() {
        let p = greedy_main(5);
        for family in SignPair::ALL {
            for policy in [SamplePolicy::Center, SamplePolicy::Leftmost] {
                let s = sample_point(&p, family, &policy, 5).unwrap();
                let m = member(&p, family, &s.x, 5).unwrap();
                assert!(m.member);
                assert_eq!(m.js, s.js);
                for (xl, l) in s.reductions(&p).iter().zip(&p.levels) {
                    let u = xl / l.period();
                    let ok = if family.is_aligned() {
                        let u = if family == SignPair::MM { &u - ratio(1, 2) } else { u.clone() };
                        u.abs() <= ratio(1, 12)
                    } else {
                        (u >= ratio(1, 6) && u <= ratio(1, 3)) || (u >= ratio(2, 3) && u <= ratio(5, 6))
                    };
                    assert!(ok, "{family} level {} u = {u}", l.n);
                }
            }
        }
    }

    #[test]
    fn given_path_round_trip_and_injective() {
        let p = greedy_main(3);
        let a = sample_point(&p, SignPair::MP, &SamplePolicy::Leftmost, 2).unwrap();
        let b = sample_point(&p, SignPair::MP, &SamplePolicy::Given(a.js.clone()), 2).unwrap();
        assert_eq!(a, b);
        let c = sample_point(&p, SignPair::MP, &SamplePolicy::Center, 2).unwrap();
        assert_ne!(a.js, c.js);
        assert_ne!(a.x, c.x);
        let mut bad = a.js.clone();
        bad[1] += 1000;
        assert!(sample_point(&p, SignPair::MP, &SamplePolicy::Given(bad), 2).is_err());
        assert!(matches!(
            sample_point(&p, SignPair::MP, &SamplePolicy::Center, 4),
            Err(Error::DepthExceedsProfile { .. })
        ));
    }

    #[test]
    fn half_membership_matches_scan() {
        let p = greedy_main(2);
        let x = ratio(1, 2);
        let fast = member(&p, SignPair::PP, &x, 1).unwrap().member;
        let scan = level_intervals(&p, SignPair::PP, 1)
            .unwrap()
            .any(|iv| [int(0), int(1)].iter().any(|s| iv.lo <= &x + s && &x + s <= iv.hi));
        assert_eq!(fast, scan);
        // A_1 q_{k_1} = 72 is even, so 1/2 is an interval center.
        assert!(fast);
    }

    #[test]
    fn failing_level_is_minimal() {
        let p = greedy_main(3);
        let s = sample_point(&p, SignPair::PP, &SamplePolicy::Center, 3).unwrap();
        // Push the point just outside its level-2 interval but inside level 1.
        let l2 = &p.levels[1];
        let y = &s.x + l2.period() / int(12) + l2.period() / int(100);
        let m = member(&p, SignPair::PP, &y, 3).unwrap();
        assert!(!m.member);
        assert_eq!(m.first_failing_level, Some(2));
        assert!(member(&p, SignPair::PP, &y, 1).unwrap().member);
    }

    #[test]
    fn nested_counts_match_child_ranges() {
        let p = greedy_main(2);
        let v = nested_intervals(&p, SignPair::PM, 2, 10_000).unwrap();
        let mut expect = BigInt::zero();
        for iv in level_intervals(&p, SignPair::PM, 1).unwrap() {
            expect += children(&p, SignPair::PM, &iv).unwrap().count;
        }
        assert_eq!(BigInt::from(v.len()), expect);
        assert!(nested_intervals(&p, SignPair::PM, 2, 10).is_err());
    }
}
