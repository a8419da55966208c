//! Nested-interval bounds on the Hausdorff dimension of the families, and a
//! box-counting cross-check.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use crate::logs::{ln_int, ln_rational, Enclosure};
use crate::params::Profile;
use crate::rat::{floor, int, ratio};
use crate::targets::{nested_intervals, SignPair, TargetInterval};
use crate::{Error, Result};

/// Refuse to enumerate more parents or intervals than this by default.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

/// Finest grid `box_count` accepts.
pub const MAX_GRID: u64 = 1 << 28;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountMode {
    /// `m_n`, `m̄_n` from the closed formulas.
    Formula,
    /// `m_n`, `m̄_n` as exact min/max child counts over all parents.
    Measured { cap: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NestingLevel {
    pub n: u32,
    /// Interval length `1/(6 A_n q_{k_n})`.
    pub delta: BigRational,
    /// True gap `5/(6 A_n q_{k_n})`.
    pub epsilon: BigRational,
    /// The weaker gap bound `1/(2 A_n q_{k_n})`.
    pub epsilon_weak: BigRational,
    /// `A_n q_{k_n}/(12 A_{n−1} q_{k_{n−1}})`, `n ≥ 2`.
    pub m_formula: Option<BigRational>,
    /// `A_n q_{k_n}/(6 A_{n−1} q_{k_{n−1}})`, `n ≥ 2`.
    pub mbar_formula: Option<BigRational>,
    /// Exact minimum children per level-`(n−1)` parent (measured mode).
    pub m_measured: Option<BigInt>,
    /// Exact maximum children per level-`(n−1)` parent (measured mode).
    pub mbar_measured: Option<BigInt>,
}

impl NestingLevel {
    /// The `m_n` used by the bounds: measured if present, else the formula.
    pub fn m(&self) -> Option<BigRational> {
        self.m_measured.clone().map(int).or_else(|| self.m_formula.clone())
    }

    pub fn mbar(&self) -> Option<BigRational> {
        self.mbar_measured.clone().map(int).or_else(|| self.mbar_formula.clone())
    }

    /// `m^formula ≤ m ≤ m̄ ≤ m̄^formula + 1` and `m ≥ 2`, for measured counts.
    pub fn sandwich_holds(&self) -> Option<bool> {
        let (m, mb) = (self.m_measured.clone()?, self.mbar_measured.clone()?);
        let (lo, hi) = (self.m_formula.as_ref()?, self.mbar_formula.as_ref()?);
        let (m, mb) = (int(m), int(mb));
        Some(&m >= lo && m <= mb && mb <= hi + int(1) && m >= int(2))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NestingStats {
    pub family: SignPair,
    pub mode: CountMode,
    pub levels: Vec<NestingLevel>,
}

impl NestingStats {
    pub fn level(&self, n: u32) -> Option<&NestingLevel> {
        n.checked_sub(1).and_then(|i| self.levels.get(i as usize))
    }
}

/// Min and max child counts over every level-`(n−1)` parent of the family.
pub fn measured_counts(profile: &Profile, family: SignPair, n: u32, cap: u64) -> Result<(BigInt, BigInt)> {
    let parent = profile
        .level(n.wrapping_sub(1))
        .ok_or(Error::DepthExceedsProfile { depth: n, available: profile.n_max() })?;
    let child = profile.level(n).ok_or(Error::DepthExceedsProfile { depth: n, available: profile.n_max() })?;
    let parents = parent.cells();
    if parents > BigInt::from(cap) {
        return Err(Error::EnumerationCapExceeded { requested: alloc::format!("{parents}"), cap });
    }
    // With `off = a/12`, parent `j` has children `ceil(u_j/D) ..= floor(v_j/D)` where
    // `u_j = (a + 12j)Q' − aQ`, `v_j = (a + 2 + 12j)Q' − (a + 2)Q`, `D = 12Q`.
    let a = floor(&(family.offset() * int(12)));
    let (q, qc) = (parents.clone(), child.cells());
    let (lo_count, hi_count) = match (
        (q.to_i128(), qc.to_i128(), a.to_i128()),
        (&qc * (&q * 12u32 + 14u32) * 2u32).to_i128(),
    ) {
        ((Some(q), Some(qc), Some(a)), Some(_)) => {
            let d = 12 * q;
            let (mut lo, mut hi) = (i128::MAX, i128::MIN);
            for j in 0..q {
                let u = (a + 12 * j) * qc - a * q;
                let v = (a + 2 + 12 * j) * qc - (a + 2) * q;
                let c = (v.div_euclid(d) + (-u).div_euclid(d) + 1).max(0);
                lo = lo.min(c);
                hi = hi.max(c);
            }
            (BigInt::from(lo), BigInt::from(hi))
        }
        _ => counts_bigint(&a, &q, &qc),
    };
    Ok((lo_count, hi_count))
}

fn counts_bigint(a: &BigInt, q: &BigInt, qc: &BigInt) -> (BigInt, BigInt) {
    let d: BigInt = q * 12u32;
    let (mut lo, mut hi): (Option<BigInt>, Option<BigInt>) = (None, None);
    let mut j = BigInt::from(0);
    while &j < q {
        let u: BigInt = (a + &j * 12u32) * qc - a * q;
        let v: BigInt = (a + 2u32 + &j * 12u32) * qc - (a + 2u32) * q;
        let first: BigInt = -((-u).div_floor(&d));
        let c: BigInt = (v.div_floor(&d) - first + 1u32).max(BigInt::from(0));
        if lo.as_ref().is_none_or(|x| &c < x) {
            lo = Some(c.clone());
        }
        if hi.as_ref().is_none_or(|x| &c > x) {
            hi = Some(c);
        }
        j += 1;
    }
    (lo.unwrap(), hi.unwrap())
}

pub fn nesting_stats(profile: &Profile, family: SignPair, mode: CountMode) -> Result<NestingStats> {
    let mut levels = Vec::with_capacity(profile.levels.len());
    for (i, l) in profile.levels.iter().enumerate() {
        let cells = int(l.cells());
        let prev = i.checked_sub(1).map(|p| int(profile.levels[p].cells()));
        let (m_measured, mbar_measured) = match (mode, i) {
            (CountMode::Measured { cap }, i) if i > 0 => {
                let (a, b) = measured_counts(profile, family, l.n, cap)?;
                (Some(a), Some(b))
            }
            _ => (None, None),
        };
        levels.push(NestingLevel {
            n: l.n,
            delta: ratio(1, 6) / &cells,
            epsilon: ratio(5, 6) / &cells,
            epsilon_weak: ratio(1, 2) / &cells,
            m_formula: prev.as_ref().map(|p| &cells / (p * int(12))),
            mbar_formula: prev.as_ref().map(|p| &cells / (p * int(6))),
            m_measured,
            mbar_measured,
        });
    }
    Ok(NestingStats { family, mode, levels })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionRow {
    pub n: u32,
    /// `log(m_2⋯m_n) / −log(m_{n+1} ε_{n+1})`; needs level `n + 1`.
    pub lower: Option<Enclosure>,
    /// `log(m̄_2⋯m̄_n) / −log δ_n`.
    pub upper: Enclosure,
    /// `1 − n log 12 / log(A_n q_{k_n})`
    pub closed_lower: Enclosure,
    /// `1 − n log 6 / log(A_n q_{k_n})`
    pub closed_upper: Enclosure,
}

impl DimensionRow {
    /// `lower ≤ upper` up to the width of the enclosures.
    pub fn ordered(&self) -> bool {
        self.lower.is_none_or(|lo| lo.lo <= self.upper.hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DimensionBounds {
    pub family: SignPair,
    pub bits: u32,
    pub rows: Vec<DimensionRow>,
}

impl DimensionBounds {
    pub fn row(&self, n: u32) -> Option<&DimensionRow> {
        self.rows.iter().find(|r| r.n == n)
    }
}

/// `1 − n log c / log(A_n q_{k_n})`
pub fn closed_form(n: u32, cells: &BigInt, c: u32, bits: u32) -> Enclosure {
    let one = Enclosure::point(1.0);
    let num = ln_int(&BigInt::from(c), bits).scale(n as f64);
    one - num / ln_int(cells, bits)
}

/// Rows for `n = 2..=n_max`; the lower bound is missing on the last level.
pub fn falconer_bounds(profile: &Profile, stats: &NestingStats, bits: u32) -> Result<DimensionBounds> {
    if stats.levels.len() < 2 {
        return Err(Error::InvalidArgument("dimension bounds need at least two levels".into()));
    }
    let mut rows = Vec::new();
    let mut prod_m = BigRational::one();
    let mut prod_mbar = BigRational::one();
    for n in 2..=stats.levels.len() as u32 {
        let cur = stats.level(n).unwrap();
        prod_m *= cur.m().unwrap();
        prod_mbar *= cur.mbar().unwrap();
        let upper = ln_rational(&prod_mbar, bits) / -ln_rational(&cur.delta, bits);
        let lower = stats.level(n + 1).map(|next| {
            let denom = -ln_rational(&(next.m().unwrap() * &next.epsilon), bits);
            ln_rational(&prod_m, bits) / denom
        });
        let cells = profile.level(n).unwrap().cells();
        rows.push(DimensionRow {
            n,
            lower,
            upper,
            closed_lower: closed_form(n, &cells, 12, bits),
            closed_upper: closed_form(n, &cells, 6, bits),
        });
    }
    Ok(DimensionBounds { family: stats.family, bits, rows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxCount {
    pub n: u32,
    /// `(g, N(g))`, finest grid first.
    pub ladder: Vec<(u64, u64)>,
    /// Least-squares slope of `log N(g)` against `log g`.
    pub slope: f64,
}

fn occupied(intervals: &[TargetInterval], g: u64) -> u64 {
    let mut bits = vec![0u64; g.div_ceil(64) as usize];
    let gb = BigInt::from(g);
    let gr = int(g);
    for iv in intervals {
        let a = floor(&(&iv.lo * &gr));
        let b = floor(&(&iv.hi * &gr));
        let mut c = a;
        while c <= b {
            let idx = num_integer::Integer::mod_floor(&c, &gb).to_u64().unwrap();
            bits[(idx / 64) as usize] |= 1 << (idx % 64);
            c += 1;
        }
    }
    bits.iter().map(|w| w.count_ones() as u64).sum()
}

/// Occupied cells of the nested level-`n` union on grids `g, g/2, g/4, ...`
/// down to `g_min`, and the fitted slope.
pub fn box_count(profile: &Profile, family: SignPair, n: u32, g: u64, g_min: u64, cap: u64) -> Result<BoxCount> {
    if g > MAX_GRID {
        return Err(Error::EnumerationCapExceeded { requested: alloc::format!("grid {g}"), cap: MAX_GRID });
    }
    if g_min == 0 || g_min > g {
        return Err(Error::InvalidArgument("need 0 < g_min <= g".into()));
    }
    let intervals = nested_intervals(profile, family, n, cap)?;
    let mut ladder = Vec::new();
    let mut cur = g;
    while cur >= g_min {
        ladder.push((cur, occupied(&intervals, cur)));
        cur /= 2;
    }
    let pts: Vec<(f64, f64)> = ladder
        .iter()
        .map(|&(g, c)| (ln_int(&BigInt::from(g), 53).mid(), ln_int(&BigInt::from(c.max(1)), 53).mid()))
        .collect();
    Ok(BoxCount { n, slope: least_squares_slope(&pts), ladder })
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let k = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}
