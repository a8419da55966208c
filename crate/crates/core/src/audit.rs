//! Divergence certificates for `φ^(m)` on points of the interval families.
//!
//! Every row is an exact rational computed with α̂. Inequalities about the true
//! α are decided against the substitution budget `Σ Λ_l |m| |α − α̂|`: a claim
//! passes only if it holds with that much room, fails only if it is violated
//! with that much room, and is indeterminate otherwise.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::cocycle::{phi_m, CocycleSpec};
use crate::logs::Enclosure;
use crate::params::{LevelParams, Profile};
use crate::rat::{int, sign, signum_combination, sum};
use crate::targets::{reductions, DigitPath, SignPair};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WindowKind {
    Aligned,
    Mixed,
}

impl WindowKind {
    pub fn of(family: SignPair) -> Self {
        if family.is_aligned() {
            WindowKind::Aligned
        } else {
            WindowKind::Mixed
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            WindowKind::Aligned => "aligned",
            WindowKind::Mixed => "mixed",
        }
    }
}

/// The level `n(m)` controlling `φ^(m)`, with the exact window `lower ≤ |m| < upper`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowIndex {
    pub m: i64,
    pub n_of_m: u32,
    pub kind: WindowKind,
    pub lower: BigRational,
    pub upper: BigRational,
}

fn growth_over(level: &LevelParams, k: i64) -> BigRational {
    int(level.q_next.clone()) / int(&level.a * k)
}

/// Aligned: `[q_{k_{n−1}+1}/(2A_{n−1}), q_{k_n+1}/(2A_n))` for `n ≥ 2`.
/// Mixed: `[q_{k_n+1}/(12A_n), q_{k_{n+1}+1}/(12A_{n+1}))` for `n ≥ 1`.
pub fn window_bounds(profile: &Profile, kind: WindowKind, n: u32) -> Option<(BigRational, BigRational)> {
    match kind {
        WindowKind::Aligned => {
            let prev = profile.level(n.checked_sub(1)?)?;
            let cur = profile.level(n)?;
            Some((growth_over(prev, 2), growth_over(cur, 2)))
        }
        WindowKind::Mixed => {
            let cur = profile.level(n)?;
            let next = profile.level(n + 1)?;
            Some((growth_over(cur, 12), growth_over(next, 12)))
        }
    }
}

/// Levels that have a window: `2..=n_max` (aligned) or `1..n_max` (mixed).
pub fn window_levels(profile: &Profile, kind: WindowKind) -> core::ops::RangeInclusive<u32> {
    match kind {
        WindowKind::Aligned => 2..=profile.n_max(),
        WindowKind::Mixed => 1..=profile.n_max().saturating_sub(1),
    }
}

pub fn window(profile: &Profile, kind: WindowKind, m: i64) -> Result<WindowIndex> {
    let abs = int(m.unsigned_abs());
    let levels = window_levels(profile, kind);
    let first = *levels.start();
    let Some((lower0, _)) = window_bounds(profile, kind, first) else {
        return Err(Error::BeyondLastWindow(m));
    };
    if abs < lower0 {
        return Err(Error::BelowFirstWindow(m));
    }
    for n in levels {
        let (lower, upper) = window_bounds(profile, kind, n).unwrap();
        if abs >= lower && abs < upper {
            return Ok(WindowIndex { m, n_of_m: n, kind, lower, upper });
        }
    }
    Err(Error::BeyondLastWindow(m))
}

/// Integers `m > 0` of the level-`n` window.
pub fn window_range(profile: &Profile, kind: WindowKind, n: u32) -> Option<(i64, i64)> {
    use num_traits::ToPrimitive;
    let (lo, hi) = window_bounds(profile, kind, n)?;
    let first = crate::rat::ceil(&lo).max(BigInt::from(1));
    let last: BigInt = crate::rat::ceil(&hi) - 1;
    Some((first.to_i64()?, last.to_i64()?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Check {
    Pass,
    Fail,
    Indeterminate,
}

impl Check {
    /// Decides `true value > bound` where the true value lies within `budget` of `value`.
    pub fn greater(value: &BigRational, bound: &BigRational, budget: &BigRational) -> Check {
        Check::signed_greater(1, value, bound, budget)
    }

    /// `greater(s·value, bound, budget)` without forming `s·value`.
    pub fn signed_greater(s: i64, value: &BigRational, bound: &BigRational, budget: &BigRational) -> Check {
        if signum_combination(&[(s, value), (-1, bound), (-1, budget)]) == Ordering::Greater {
            Check::Pass
        } else if signum_combination(&[(s, value), (-1, bound), (1, budget)]) != Ordering::Greater {
            Check::Fail
        } else {
            Check::Indeterminate
        }
    }

    pub fn exact(ok: bool) -> Check {
        if ok {
            Check::Pass
        } else {
            Check::Fail
        }
    }

    pub fn and(self, other: Check) -> Check {
        match (self, other) {
            (Check::Fail, _) | (_, Check::Fail) => Check::Fail,
            (Check::Indeterminate, _) | (_, Check::Indeterminate) => Check::Indeterminate,
            _ => Check::Pass,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Check::Pass => "pass",
            Check::Fail => "fail",
            Check::Indeterminate => "indeterminate",
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub l: u32,
    /// `f_l(x + m α̂) − f_l(x)`
    pub term: BigRational,
    pub sign: i8,
    /// `x_l`, when the sample path reaches level `l`.
    pub reduction: Option<BigRational>,
    /// Magnitude the term must exceed (with the expected sign), if any.
    pub bound: Option<BigRational>,
    /// `None` for rows nothing is asserted about.
    pub check: Option<Check>,
}

/// Extra quantities of the mixed case.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedSummary {
    /// `Σ_{l ≤ n} 2 max f_l`
    pub head_upper: BigRational,
    /// `s·tail − budget`, `s` the expected sign.
    pub tail_lower: BigRational,
    /// `tail_lower − head_upper > 0`
    pub dominance: Check,
    /// `q_{k_n+1}/(50 A_n n)`, the bound the proof reaches for large `n`.
    pub asymptotic: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivergenceReport {
    pub family: SignPair,
    pub path: DigitPath,
    pub window: WindowIndex,
    pub rows: Vec<Row>,
    /// Sum of rows `l ≤ n(m)`.
    pub head: BigRational,
    /// Sum of rows `l > n(m)`.
    pub tail: BigRational,
    pub total: BigRational,
    /// α̂ substitution budget over all summed levels.
    pub budget: BigRational,
    /// `|m|/N`: bound on the levels beyond the truncation (informational).
    pub truncation_tail: BigRational,
    /// Sign `φ^(m)` must have.
    pub expected_sign: i8,
    /// `s·total − budget`
    pub certified_lower: BigRational,
    /// Conjunction of the row checks.
    pub rows_check: Check,
    /// Aligned: `s·total > q_{k_n+1}/(75 A_n n²)`. Mixed: not asserted.
    pub total_check: Option<Check>,
    pub mixed: Option<MixedSummary>,
}

impl DivergenceReport {
    pub fn m(&self) -> i64 {
        self.window.m
    }

    pub fn n_of_m(&self) -> u32 {
        self.window.n_of_m
    }

    /// Rows and total; the mixed dominance comparison is reported separately.
    pub fn status(&self) -> Check {
        match self.total_check {
            Some(c) => self.rows_check.and(c),
            None => self.rows_check,
        }
    }
}

/// `q_{k_n+1}/(75 A_n n²)`
pub fn aligned_bound(level: &LevelParams) -> BigRational {
    let n = level.n as i64;
    int(level.q_next.clone()) / int(&level.a * 75 * n * n)
}

/// `q_{k_n+1}/(24 A_n l²)`
pub fn mixed_term_bound(level: &LevelParams, l: u32) -> BigRational {
    let l = l as i64;
    int(level.q_next.clone()) / int(&level.a * 24 * l * l)
}

/// `q_{k_n+1}/(50 A_n n)`
pub fn mixed_asymptotic_bound(level: &LevelParams) -> BigRational {
    int(level.q_next.clone()) / int(&level.a * 50 * level.n as i64)
}

/// Audits one sample path against many shifts; reductions and head bounds
/// are computed once.
#[derive(Debug, Clone)]
pub struct Auditor<'a> {
    cspec: &'a CocycleSpec,
    family: SignPair,
    path: &'a DigitPath,
    reductions: Vec<BigRational>,
    /// `head_upper[n] = Σ_{l ≤ n} 2 max f_l`
    head_upper: Vec<BigRational>,
    /// `bounds[n][l]`: the row bound for window `n` at level `l`.
    bounds: Vec<Vec<BigRational>>,
}

impl<'a> Auditor<'a> {
    pub fn new(cspec: &'a CocycleSpec, family: SignPair, path: &'a DigitPath) -> Result<Self> {
        if path.family != family {
            return Err(Error::VariantMismatch("sample path belongs to another family"));
        }
        let mut head_upper = Vec::with_capacity(cspec.levels().len() + 1);
        let mut acc = BigRational::zero();
        head_upper.push(acc.clone());
        for l in cspec.levels() {
            acc += l.peak(cspec.variant()) * int(2);
            head_upper.push(acc.clone());
        }
        let levels = cspec.levels();
        let bounds = levels
            .iter()
            .map(|level_n| {
                if family.is_aligned() {
                    alloc::vec![aligned_bound(level_n)]
                } else {
                    (1..=levels.len() as u32).map(|l| mixed_term_bound(level_n, l)).collect()
                }
            })
            .collect();
        Ok(Auditor {
            cspec,
            family,
            path,
            reductions: reductions(cspec.profile(), &path.x, &path.js),
            head_upper,
            bounds,
        })
    }

    pub fn family(&self) -> SignPair {
        self.family
    }

    pub fn audit(&self, m: i64) -> Result<DivergenceReport> {
        if self.family.is_aligned() {
            self.aligned(m)
        } else {
            self.mixed(m)
        }
    }

    fn prepare(&self, m: i64) -> Result<Common> {
        let cspec = self.cspec;
        let window = window(cspec.profile(), WindowKind::of(self.family), m)?;
        let required = window.n_of_m + 2;
        if self.path.depth() < required {
            return Err(Error::InsufficientDepth { depth: self.path.depth(), required });
        }
        if cspec.truncation() < required {
            return Err(Error::InsufficientDepth { depth: cspec.truncation(), required });
        }
        let terms = cspec.terms(&self.path.x, m);
        let n = window.n_of_m as usize;
        let head = sum(&terms[..n]);
        let tail = sum(&terms[n..]);
        let total = &head + &tail;
        let truncation = cspec.truncation();
        Ok(Common {
            window,
            terms,
            head,
            tail,
            total,
            budget: cspec.budget(m),
            truncation_tail: int(m.unsigned_abs()) / int(truncation),
            depth: self.path.depth().min(truncation),
        })
    }

    fn row(&self, l: u32, term: BigRational, bound: Option<BigRational>, check: Option<Check>) -> Row {
        Row {
            l,
            sign: sign(&term),
            term,
            reduction: self.reductions.get(l as usize - 1).cloned(),
            bound,
            check,
        }
    }

    fn aligned(&self, m: i64) -> Result<DivergenceReport> {
        let c = self.prepare(m)?;
        let s = self.family.plus.value();
        let n = c.window.n_of_m;
        let bound = &self.bounds[n as usize - 1][0];
        let mut rows = Vec::with_capacity(c.terms.len());
        let mut rows_check = Check::Pass;
        for (i, t) in c.terms.into_iter().enumerate() {
            let l = i as u32 + 1;
            let nonneg = if s > 0 { !t.is_negative() } else { !t.is_positive() };
            let (row_bound, check) = if l == n {
                let ck = Check::exact(nonneg).and(Check::signed_greater(s.into(), &t, bound, &c.budget));
                (Some(bound.clone()), Some(ck))
            } else if l <= c.depth {
                (None, Some(Check::exact(nonneg)))
            } else {
                (None, None)
            };
            if let Some(ck) = check {
                rows_check = rows_check.and(ck);
            }
            rows.push(self.row(l, t, row_bound, check));
        }
        let signed_total = &c.total * int(s);
        let total_check = Check::greater(&signed_total, bound, &c.budget);
        Ok(DivergenceReport {
            family: self.family,
            path: self.path.clone(),
            window: c.window,
            rows,
            head: c.head,
            tail: c.tail,
            certified_lower: signed_total - &c.budget,
            total: c.total,
            budget: c.budget,
            truncation_tail: c.truncation_tail,
            expected_sign: s,
            rows_check,
            total_check: Some(total_check),
            mixed: None,
        })
    }

    fn mixed(&self, m: i64) -> Result<DivergenceReport> {
        let cspec = self.cspec;
        let c = self.prepare(m)?;
        let s = cspec.profile().parity_sign() * self.family.plus.value() * if m < 0 { -1 } else { 1 };
        let n = c.window.n_of_m;
        let level_n = cspec.level(n);
        let mut rows = Vec::with_capacity(c.terms.len());
        let mut rows_check = Check::Pass;
        for (i, t) in c.terms.into_iter().enumerate() {
            let l = i as u32 + 1;
            let (row_bound, check) = if l > n && l <= c.depth {
                let b = self.bounds[n as usize - 1][l as usize - 1].clone();
                let positive = if s > 0 { t.is_positive() } else { t.is_negative() };
                let ck = Check::exact(positive).and(Check::signed_greater(s.into(), &t, &b, &c.budget));
                (Some(b), Some(ck))
            } else {
                (None, None)
            };
            if let Some(ck) = check {
                rows_check = rows_check.and(ck);
            }
            rows.push(self.row(l, t, row_bound, check));
        }
        let head_upper = self.head_upper[n as usize].clone();
        let tail_lower = &c.tail * int(s) - &c.budget;
        let dominance = Check::greater(&tail_lower, &head_upper, &BigRational::zero());
        let signed_total = &c.total * int(s);
        Ok(DivergenceReport {
            family: self.family,
            path: self.path.clone(),
            window: c.window,
            rows,
            head: c.head,
            tail: c.tail,
            certified_lower: signed_total - &c.budget,
            total: c.total,
            budget: c.budget,
            truncation_tail: c.truncation_tail,
            expected_sign: s,
            rows_check,
            total_check: None,
            mixed: Some(MixedSummary {
                head_upper,
                tail_lower,
                dominance,
                asymptotic: mixed_asymptotic_bound(level_n),
            }),
        })
    }
}

struct Common {
    window: WindowIndex,
    terms: Vec<BigRational>,
    head: BigRational,
    tail: BigRational,
    total: BigRational,
    budget: BigRational,
    truncation_tail: BigRational,
    depth: u32,
}

/// `F^{++}` / `F^{−−}`: every asserted row has sign `s` (exactly), the
/// `n(m)`-th row exceeds `q_{k_n+1}/(75 A_n n²)` in magnitude and so does the total.
pub fn audit_aligned(cspec: &CocycleSpec, family: SignPair, path: &DigitPath, m: i64) -> Result<DivergenceReport> {
    if !family.is_aligned() {
        return Err(Error::VariantMismatch("aligned audit needs ++ or --"));
    }
    Auditor::new(cspec, family, path)?.aligned(m)
}

/// `F^{+−}` / `F^{−+}`: rows `l ∈ (n(m), depth]` have sign `(−1)^{k_1} s₊ sign m`
/// and magnitude above `q_{k_n+1}/(24 A_n l²)`; the tail is compared against
/// the head's crude upper bound.
pub fn audit_mixed(cspec: &CocycleSpec, family: SignPair, path: &DigitPath, m: i64) -> Result<DivergenceReport> {
    if family.is_aligned() {
        return Err(Error::VariantMismatch("mixed audit needs +- or -+"));
    }
    Auditor::new(cspec, family, path)?.mixed(m)
}

/// Dispatches on the family.
pub fn audit(cspec: &CocycleSpec, family: SignPair, path: &DigitPath, m: i64) -> Result<DivergenceReport> {
    if family.is_aligned() {
        audit_aligned(cspec, family, path, m)
    } else {
        audit_mixed(cspec, family, path, m)
    }
}

/// Enclosure of `Σ_{l>n} 1/l²` from the partial sum over `n < l ≤ upto`:
/// rounding is widened by `2k·2⁻⁵³` relative, and the omitted part lies in `(0, 1/upto)`.
pub fn inverse_square_tail(n: u64, upto: u64) -> Enclosure {
    assert!(upto > n, "partial sum needs upto > n");
    let mut s = 0.0f64;
    // smallest terms first
    for l in (n + 1..=upto).rev() {
        let lf = l as f64;
        s += 1.0 / (lf * lf);
    }
    let k = (upto - n) as f64;
    let rel = 2.0 * (k + 2.0) * f64::EPSILON;
    Enclosure { lo: s * (1.0 - rel), hi: s * (1.0 + rel) + 1.0 / upto as f64 }
}

/// Decides `Σ_{l>n} 1/l² > 24/(25n)`, the condition under which the tail of
/// a mixed sum is at least `q_{k_n+1}/(25 A_n n)`. `None` if the enclosure straddles the bound.
pub fn inverse_square_tail_condition(n: u64, upto: u64) -> Option<bool> {
    let tail = inverse_square_tail(n, upto);
    let b = 24.0 / (25.0 * n as f64);
    let slack = 4.0 * f64::EPSILON * b;
    if tail.lo > b + slack {
        Some(true)
    } else if tail.hi < b - slack {
        Some(false)
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowMinimum {
    pub n: u32,
    /// Number of `m` scanned in this window.
    pub count: u64,
    /// `min |φ^(m)(x)|` over the scanned `m ≠ 0`.
    pub min_abs: Option<BigRational>,
    pub argmin: Option<i64>,
    /// `q_{k_n+1}/(75A_n n²)` (aligned) or `q_{k_n+1}/(50A_n n)` (mixed).
    pub bound: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscretenessScan {
    pub family: SignPair,
    pub windows: Vec<WindowMinimum>,
    /// Window bounds never decrease with `n`.
    pub bounds_monotone: bool,
    /// Nonempty window minima never decrease with `n`.
    pub minima_monotone: bool,
    /// Every scanned minimum is positive.
    pub minima_positive: bool,
}

/// Minimum of `|φ^(m)(x)|` per window over `m ∈ [lo, hi]`, `m ≠ 0`.
/// Values of `m` outside every window are skipped.
pub fn discreteness_scan(cspec: &CocycleSpec, family: SignPair, x: &BigRational, lo: i64, hi: i64) -> Result<DiscretenessScan> {
    if lo > hi {
        return Err(Error::InvalidArgument("empty m range".into()));
    }
    let kind = WindowKind::of(family);
    let profile = cspec.profile();
    let mut windows: Vec<WindowMinimum> = Vec::new();
    for n in window_levels(profile, kind) {
        let level = profile.level(n).unwrap();
        let bound = match kind {
            WindowKind::Aligned => aligned_bound(level),
            WindowKind::Mixed => mixed_asymptotic_bound(level),
        };
        let Some((a, b)) = window_range(profile, kind, n) else { continue };
        let mut w = WindowMinimum { n, count: 0, min_abs: None, argmin: None, bound };
        for sgn in [-1i64, 1] {
            let (from, to) = if sgn > 0 { (a.max(lo), b.min(hi)) } else { ((-b).max(lo), (-a).min(hi)) };
            for m in from..=to {
                if m == 0 {
                    continue;
                }
                let v = phi_m(cspec, x, m).abs();
                w.count += 1;
                if w.min_abs.as_ref().is_none_or(|cur| v < *cur) {
                    w.min_abs = Some(v);
                    w.argmin = Some(m);
                }
            }
        }
        if w.count > 0 {
            windows.push(w);
        }
    }
    let bounds_monotone = windows.windows(2).all(|p| p[0].bound <= p[1].bound);
    let minima: Vec<&BigRational> = windows.iter().filter_map(|w| w.min_abs.as_ref()).collect();
    let minima_monotone = minima.windows(2).all(|p| p[0] <= p[1]);
    let minima_positive = minima.iter().all(|v| v.is_positive());
    Ok(DiscretenessScan { family, windows, bounds_monotone, minima_monotone, minima_positive })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cf::IrrationalSpec;
    use crate::cocycle::term;
    use crate::params::{Strategy, Variant};
    use crate::rat::ratio;
    use crate::targets::{sample_point, SamplePolicy};

    fn cspec(variant: Variant, n: u32) -> CocycleSpec {
        CocycleSpec::standard(&IrrationalSpec::golden(), Strategy::Greedy, variant, n).unwrap()
    }

    #[test]
    fn tent_mixed_windows_by_integer_count() {
        let c = cspec(Variant::Tent, 3);
        let p = c.profile();
        assert_eq!(window_range(p, WindowKind::Mixed, 1), Some((2, 19)));
        assert_eq!(window_range(p, WindowKind::Mixed, 2), Some((20, 912)));
        assert_eq!(window_range(p, WindowKind::Mixed, 3), Some((913, 42852)));
        // direct count against the exact bounds
        for n in 1..=3 {
            let (lo, hi) = window_bounds(p, WindowKind::Mixed, n).unwrap();
            let (a, b) = window_range(p, WindowKind::Mixed, n).unwrap();
            assert!(int(a) >= lo && int(a - 1) < lo);
            assert!(int(b) < hi && int(b + 1) >= hi);
        }
    }

    #[test]
    fn windows_partition_and_increase() {
        for variant in [Variant::Main, Variant::Tent] {
            let c = cspec(variant, 4);
            let p = c.profile();
            for kind in [WindowKind::Aligned, WindowKind::Mixed] {
                let mut prev: Option<BigRational> = None;
                for n in window_levels(p, kind) {
                    let (lo, hi) = window_bounds(p, kind, n).unwrap();
                    assert!(lo < hi);
                    if let Some(pv) = &prev {
                        assert_eq!(pv, &lo);
                    }
                    prev = Some(hi);
                }
            }
            let (a, _) = window_range(p, WindowKind::Mixed, 1).unwrap();
            let (_, b) = window_range(p, WindowKind::Mixed, 3).unwrap();
            for m in a..=b.min(3000) {
                let w = window(p, WindowKind::Mixed, m).unwrap();
                assert_eq!(window(p, WindowKind::Mixed, -m).unwrap().n_of_m, w.n_of_m);
                assert!(int(m) >= w.lower && int(m) < w.upper);
            }
        }
    }

    #[test]
    fn aligned_greedy_main_windows() {
        let c = cspec(Variant::Main, 7);
        let p = c.profile();
        assert_eq!(window_range(p, WindowKind::Aligned, 2), Some((1, 0)));
        assert_eq!(window_range(p, WindowKind::Aligned, 3), Some((1, 1)));
        assert!(matches!(window(p, WindowKind::Aligned, 0), Err(Error::BelowFirstWindow(0))));
        assert_eq!(window(p, WindowKind::Aligned, 1).unwrap().n_of_m, 3);
        assert_eq!(window(p, WindowKind::Aligned, -2).unwrap().n_of_m, 5);
        assert!(matches!(window(p, WindowKind::Aligned, 1 << 40), Err(Error::BeyondLastWindow(_))));
    }

    #[test]
    fn aligned_rows_and_mirror() {
        let c = cspec(Variant::Main, 5);
        let pp = sample_point(c.profile(), SignPair::PP, &SamplePolicy::Center, 5).unwrap();
        for m in [-1i64, 1] {
            let r = audit_aligned(&c, SignPair::PP, &pp, m).unwrap();
            assert_eq!(r.n_of_m(), 3);
            assert_eq!(r.status(), Check::Pass);
            assert!(r.rows.iter().all(|row| !row.term.is_negative()));
            assert_eq!(r.total, phi_m(&c, &pp.x, m));
            assert_eq!(&r.head + &r.tail, r.total);
            // f(y + P/2) = plateau − f(y) turns each row into its negative.
            let shift = c.shift(m);
            for (row, l) in r.rows.iter().zip(c.levels()) {
                let mirrored = term(l, Variant::Main, &(&pp.x + l.period() / int(2)), &shift);
                assert_eq!(mirrored, -row.term.clone(), "level {}", row.l);
            }
        }
        let mm = sample_point(c.profile(), SignPair::MM, &SamplePolicy::Center, 5).unwrap();
        let r = audit_aligned(&c, SignPair::MM, &mm, 1).unwrap();
        assert_eq!(r.status(), Check::Pass);
        assert!(r.total.is_negative());
    }

    #[test]
    fn insufficient_depth_rejected() {
        let c = cspec(Variant::Main, 5);
        let pp = sample_point(c.profile(), SignPair::PP, &SamplePolicy::Center, 4).unwrap();
        assert!(matches!(audit_aligned(&c, SignPair::PP, &pp, 1), Err(Error::InsufficientDepth { .. })));
        assert!(audit_mixed(&c, SignPair::PP, &pp, 1).is_err());
    }

    #[test]
    fn mixed_rows_constant_sign() {
        let c = cspec(Variant::Tent, 3);
        let path = sample_point(c.profile(), SignPair::MP, &SamplePolicy::Center, 6).unwrap();
        for m in [20i64, 21, 100, 911, 912, -20, -500] {
            let r = audit_mixed(&c, SignPair::MP, &path, m).unwrap();
            assert_eq!(r.n_of_m(), 2);
            assert_eq!(r.rows_check, Check::Pass, "m = {m}");
            for row in r.rows.iter().filter(|row| row.l > 2) {
                assert_eq!(row.sign, r.expected_sign);
            }
            let mx = r.mixed.as_ref().unwrap();
            assert_eq!(mx.head_upper, ratio(13, 1) + ratio(233, 4));
        }
        // k_1 odd: −+ escapes to −∞ as m → +∞
        let r = audit_mixed(&c, SignPair::MP, &path, 50).unwrap();
        assert_eq!(r.expected_sign, -1);
    }

    #[test]
    fn inverse_square_tail_against_trigamma() {
        // Σ_{l>n} 1/l² = ψ'(n+1) ~ 1/x + 1/(2x²) + 1/(6x³) − 1/(30x⁵), x = n + 1
        let basel = core::f64::consts::PI * core::f64::consts::PI / 6.0 - 1.0;
        let e = inverse_square_tail(1, 100_000);
        assert!(e.lo <= basel && basel <= e.hi);
        for n in [5u64, 12, 13, 40] {
            let x = (n + 1) as f64;
            let psi1 = 1.0 / x + 1.0 / (2.0 * x * x) + 1.0 / (6.0 * x * x * x) - 1.0 / (30.0 * x.powi(5));
            let e = inverse_square_tail(n, 100_000);
            assert!(e.lo <= psi1 + 1e-6 && psi1 - 1e-6 <= e.hi, "n = {n}");
        }
        assert_eq!(inverse_square_tail_condition(12, 100_000), Some(false));
        assert_eq!(inverse_square_tail_condition(13, 100_000), Some(true));
    }

    #[test]
    fn check_logic() {
        let b = ratio(1, 10);
        assert_eq!(Check::greater(&int(2), &int(1), &b), Check::Pass);
        assert_eq!(Check::greater(&ratio(21, 20), &int(1), &b), Check::Indeterminate);
        assert_eq!(Check::greater(&ratio(9, 10), &int(1), &b), Check::Fail);
        assert_eq!(Check::Pass.and(Check::Indeterminate), Check::Indeterminate);
    }

    #[test]
    fn scan_tent_minima_positive() {
        let c = cspec(Variant::Tent, 3);
        let path = sample_point(c.profile(), SignPair::PM, &SamplePolicy::Center, 6).unwrap();
        let scan = discreteness_scan(&c, SignPair::PM, &path.x, -912, 912).unwrap();
        assert_eq!(scan.windows.len(), 2);
        assert!(scan.minima_positive);
        assert!(scan.bounds_monotone);
        assert!(scan.windows.iter().all(|w| w.argmin != Some(0)));
    }
}
