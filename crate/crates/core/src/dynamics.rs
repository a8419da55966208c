//! Orbits of the cylinder map `(x, t) ↦ (x + α̂, t + φ(x))` in binary fixed
//! point, and the empirical probes built on them.
//!
//! A state holds integers `X`, `T` standing for `X/2^P` and `T/2^P`. The
//! rotation is exact in integers once α̂ is rounded to `P` bits; each `f_l` is
//! evaluated by flooring, so every deviation from the exact rational orbit is
//! covered by [`OrbitEngine::error_bound`].

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::cocycle::CocycleSpec;
use crate::params::Variant;
use crate::rat::{floor, frac, int, ratio};
use crate::targets::SignPair;
use crate::{Error, Result};

pub const MIN_PRECISION: u32 = 64;

struct LevelFixed {
    cells: BigInt,
    c_num: BigInt,
    c_den: BigInt,
    plateau: BigInt,
}

/// Precomputed fixed-point data for one cocycle at one precision.
pub struct OrbitEngine {
    bits: u32,
    variant: Variant,
    one: BigInt,
    mask: BigInt,
    half: BigInt,
    alpha: BigInt,
    levels: Vec<LevelFixed>,
    lambda_sum: BigRational,
    truncation: u32,
    error_cap: Option<BigRational>,
}

fn to_fixed(r: &BigRational, bits: u32) -> BigInt {
    floor(&(r * int(BigInt::one() << bits) + ratio(1, 2)))
}

impl OrbitEngine {
    pub fn new(cspec: &CocycleSpec, bits: u32) -> Result<Self> {
        if bits < MIN_PRECISION {
            return Err(Error::InvalidArgument(alloc::format!("precision must be at least {MIN_PRECISION} bits")));
        }
        let one = BigInt::one() << bits;
        let levels = cspec
            .levels()
            .iter()
            .map(|l| {
                // f_l(x) = c·s(u), c = Λ_l P_l = q_{k_l+1}/(A_l l²), u the position in the period
                let c = l.growth() / int(l.n as u64 * l.n as u64);
                let (c_num, c_den) = (c.numer().clone(), c.denom().clone());
                let plateau = (&c_num * &one) / (&c_den * 3u32);
                LevelFixed { cells: l.cells(), c_num, c_den, plateau }
            })
            .collect();
        Ok(OrbitEngine {
            bits,
            variant: cspec.variant(),
            mask: &one - 1u32,
            half: &one >> 1u32,
            alpha: to_fixed(cspec.alpha_hat(), bits),
            one,
            levels,
            lambda_sum: cspec.levels().iter().fold(BigRational::zero(), |a, l| a + l.lambda()),
            truncation: cspec.truncation(),
            error_cap: None,
        })
    }

    /// Refuse orbits whose error bound would exceed `cap`.
    pub fn with_error_cap(mut self, cap: BigRational) -> Self {
        self.error_cap = Some(cap);
        self
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn to_fixed(&self, r: &BigRational) -> BigInt {
        to_fixed(r, self.bits)
    }

    pub fn from_fixed(&self, v: &BigInt) -> BigRational {
        BigRational::new(v.clone(), self.one.clone())
    }

    fn f_level(&self, lv: &LevelFixed, x: &BigInt) -> BigInt {
        let mut r = (x * &lv.cells) & &self.mask;
        if r > self.half {
            r = &self.one - r;
        }
        match self.variant {
            Variant::Main => {
                let s12 = &r * 12u32;
                if s12 <= self.one {
                    BigInt::zero()
                } else if s12 >= &self.one * 5u32 {
                    lv.plateau.clone()
                } else {
                    (&lv.c_num * (s12 - &self.one)) / (&lv.c_den * 12u32)
                }
            }
            Variant::Tent => (&lv.c_num * r) / &lv.c_den,
        }
    }

    /// `Σ_l f_l(X/2^P)` in fixed point, each level floored.
    pub fn potential(&self, x: &BigInt) -> BigInt {
        self.levels.iter().fold(BigInt::zero(), |acc, lv| acc + self.f_level(lv, x))
    }

    /// Bound on `|X_m/2^P − (x_0 + m α̂)|` on the circle.
    pub fn position_error(&self, m: u64) -> BigRational {
        BigRational::new(BigInt::from(m) + 1u32, &self.one * 2u32)
    }

    /// Bound on `|T_m/2^P − (t_0 + φ^(m)(x_0))|` for the truncated φ with α̂:
    /// `2^{-P-1} + 2^{-P} [ΣΛ_l (m² + 2m)/2 + 2mN]`.
    pub fn error_bound(&self, m: u64) -> BigRational {
        let m_int = BigInt::from(m);
        let quad = int(&m_int * &m_int + &m_int * 2u32) / int(2);
        let lin = int(&m_int * 2u32 * self.truncation);
        (&self.lambda_sum * quad + lin + ratio(1, 2)) / int(self.one.clone())
    }

    /// `|m|/N`: distance between the truncated and the full cocycle sums
    /// (informational; not part of [`Self::error_bound`]).
    pub fn truncation_tail(&self, m: u64) -> Option<BigRational> {
        (self.truncation > 0).then(|| ratio(m, self.truncation))
    }

    fn check_cap(&self, steps: u64) -> Result<()> {
        if let Some(cap) = &self.error_cap {
            let b = self.error_bound(steps);
            if &b > cap {
                return Err(Error::ErrorBudgetBlown {
                    bound: alloc::format!("{}", crate::rat::to_f64(&b)),
                    cap: alloc::format!("{}", crate::rat::to_f64(cap)),
                });
            }
        }
        Ok(())
    }

    /// Streaming orbit from `(x0, t0)`; at most `steps` iterations.
    pub fn walk(&self, x0: &BigRational, t0: &BigRational, steps: u64) -> Result<OrbitWalker<'_>> {
        self.check_cap(steps)?;
        let x = self.to_fixed(&frac(x0)) & &self.mask;
        let pot = self.potential(&x);
        Ok(OrbitWalker { engine: self, state: OrbitState { step: 0, x, t: self.to_fixed(t0) }, pot, remaining: steps, started: false })
    }
}

/// `(X, T)` after `step` iterations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitState {
    pub step: u64,
    pub x: BigInt,
    pub t: BigInt,
}

impl OrbitState {
    pub fn x_f64(&self, engine: &OrbitEngine) -> f64 {
        crate::rat::to_f64(&engine.from_fixed(&self.x))
    }

    pub fn t_f64(&self, engine: &OrbitEngine) -> f64 {
        crate::rat::to_f64(&engine.from_fixed(&self.t))
    }
}

/// Yields the start state, then one state per step.
pub struct OrbitWalker<'a> {
    engine: &'a OrbitEngine,
    state: OrbitState,
    pot: BigInt,
    remaining: u64,
    started: bool,
}

impl Iterator for OrbitWalker<'_> {
    type Item = OrbitState;

    fn next(&mut self) -> Option<OrbitState> {
        if !self.started {
            self.started = true;
            return Some(self.state.clone());
        }
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let e = self.engine;
        let x = (&self.state.x + &e.alpha) & &e.mask;
        let pot = e.potential(&x);
        // φ(x_i) = Σ_l (f_l(x_{i+1}) − f_l(x_i))
        self.state.t += &pot - &self.pot;
        self.state.x = x;
        self.state.step += 1;
        self.pot = pot;
        Some(self.state.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitRecord {
    pub bits: u32,
    pub x0: BigRational,
    pub t0: BigRational,
    /// Fixed-point states, `steps + 1` of them (start included).
    pub states: Vec<OrbitState>,
    /// Bound on the `t` deviation at the last step.
    pub error_bound: BigRational,
    pub truncation_tail: Option<BigRational>,
}

impl OrbitRecord {
    pub fn steps(&self) -> u64 {
        self.states.len() as u64 - 1
    }
}

pub fn orbit(cspec: &CocycleSpec, x0: &BigRational, t0: &BigRational, steps: u64, bits: u32) -> Result<OrbitRecord> {
    orbit_with(&OrbitEngine::new(cspec, bits)?, x0, t0, steps)
}

pub fn orbit_with(engine: &OrbitEngine, x0: &BigRational, t0: &BigRational, steps: u64) -> Result<OrbitRecord> {
    if steps == 0 {
        return Err(Error::InvalidArgument("orbit needs at least one step".into()));
    }
    let states = engine.walk(x0, t0, steps)?.collect();
    Ok(OrbitRecord {
        bits: engine.bits,
        x0: x0.clone(),
        t0: t0.clone(),
        states,
        error_bound: engine.error_bound(steps),
        truncation_tail: engine.truncation_tail(steps),
    })
}

/// Fraction of the `grid × grid` cells of `[0,1) × [−h, h]` visited by `points`.
pub fn coverage(points: impl IntoIterator<Item = (f64, f64)>, h: f64, grid: usize) -> f64 {
    if grid == 0 || h <= 0.0 {
        return 0.0;
    }
    let mut seen = alloc::vec![false; grid * grid];
    let mut count = 0usize;
    for (x, t) in points {
        if !(0.0..1.0).contains(&x) || t < -h || t >= h {
            continue;
        }
        let i = ((x * grid as f64) as usize).min(grid - 1);
        let j = (((t + h) / (2.0 * h) * grid as f64) as usize).min(grid - 1);
        if !seen[i * grid + j] {
            seen[i * grid + j] = true;
            count += 1;
        }
    }
    count as f64 / (grid * grid) as f64
}

/// Circle distance `min(|a − b|, 1 − |a − b|)` of fixed-point positions.
fn circle_gap(engine: &OrbitEngine, a: &BigInt, b: &BigInt) -> BigInt {
    let d = (a - b).mod_floor(&engine.one);
    let e = &engine.one - &d;
    d.min(e)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProbeKind {
    Sensitivity,
    Nonrecurrence,
    Coverage,
    Classification,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Pass,
    Fail,
    /// ε is within the error bound of the observed value.
    Indeterminate,
    Found,
    NotFound,
}

impl Outcome {
    pub fn name(self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
            Outcome::Indeterminate => "indeterminate",
            Outcome::Found => "found",
            Outcome::NotFound => "not-found",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    /// Second starting point (sensitivity) or the base point.
    pub y: BigRational,
    /// Iterate at which the claim is observed.
    pub k: u64,
    /// Observed taxicab distance.
    pub distance: BigRational,
    /// Which candidate produced it (0 is the family sample).
    pub candidate: usize,
    /// Confirmed by re-running at twice the precision.
    pub reverified: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeResult {
    pub kind: ProbeKind,
    pub eps: Option<BigRational>,
    pub delta: Option<BigRational>,
    pub horizon: u64,
    pub samples: usize,
    pub seed: Option<u64>,
    pub outcome: Outcome,
    pub witness: Option<Witness>,
    /// Error bound in force at the horizon.
    pub error_bound: BigRational,
}

/// Does the forward orbit of `(x, t)` stay at taxicab distance `≥ eps` from
/// its start for `0 < k ≤ horizon`?
pub fn nonrecurrence_test(cspec: &CocycleSpec, x: &BigRational, t: &BigRational, eps: &BigRational, horizon: u64, bits: u32) -> Result<ProbeResult> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be positive".into()));
    }
    let engine = OrbitEngine::new(cspec, bits)?;
    // distance error: t deviation plus both position deviations
    let err = engine.error_bound(horizon) + engine.position_error(horizon) + engine.position_error(0);
    if &err >= eps {
        return Err(Error::ErrorBudgetBlown { bound: alloc::format!("{}", crate::rat::to_f64(&err)), cap: alloc::format!("{}", crate::rat::to_f64(eps)) });
    }
    let mut walk = engine.walk(x, t, horizon)?;
    let start = walk.next().unwrap();
    let mut best: Option<(BigInt, u64)> = None;
    for s in walk {
        let d = circle_gap(&engine, &s.x, &start.x) + (&s.t - &start.t).abs();
        if best.as_ref().is_none_or(|(b, _)| &d < b) {
            best = Some((d, s.step));
        }
    }
    let (d, k) = best.unwrap();
    let d = engine.from_fixed(&d);
    let outcome = if &d - &err >= *eps {
        Outcome::Pass
    } else if &d + &err < *eps {
        Outcome::Fail
    } else {
        Outcome::Indeterminate
    };
    Ok(ProbeResult {
        kind: ProbeKind::Nonrecurrence,
        eps: Some(eps.clone()),
        delta: None,
        horizon,
        samples: 1,
        seed: None,
        outcome,
        witness: Some(Witness { y: x.clone(), k, distance: d, candidate: 0, reverified: false }),
        error_bound: err,
    })
}

/// First `k ≤ horizon` with taxicab separation above `eps + error`, if any.
fn separation(engine: &OrbitEngine, x: &BigRational, y: &BigRational, eps: &BigRational, horizon: u64) -> Result<Option<(u64, BigRational)>> {
    let t0 = BigRational::zero();
    let err = (engine.error_bound(horizon) + engine.position_error(horizon)) * int(2);
    let thresh = engine.to_fixed(&(eps + &err));
    let a = engine.walk(x, &t0, horizon)?;
    let b = engine.walk(y, &t0, horizon)?;
    for (p, q) in a.zip(b) {
        let d = circle_gap(engine, &p.x, &q.x) + (&p.t - &q.t).abs();
        if d > thresh {
            return Ok(Some((p.step, engine.from_fixed(&d))));
        }
    }
    Ok(None)
}

/// A point of the most suitable family within `delta` of `x`: the center of
/// the nearest interval at the first level whose period is below `delta`.
fn family_candidate(cspec: &CocycleSpec, x: &BigRational, delta: &BigRational) -> Option<BigRational> {
    let family = match cspec.variant() {
        Variant::Main => SignPair::PP,
        Variant::Tent => SignPair::MP,
    };
    let level = cspec.levels().iter().find(|l| &l.period() < delta)?;
    let cells = int(level.cells());
    let off = family.offset() + ratio(1, 12);
    let j = floor(&(x * &cells - &off + ratio(1, 2)));
    Some(frac(&((int(j) + off) / cells)))
}

/// Searches for `y` with `|x − y| < delta` whose orbit separates from that of
/// `x` by more than `eps` within `horizon` steps. Candidate 0 is a family
/// point, the rest are seeded uniform perturbations. A witness is re-checked
/// at doubled precision.
#[allow(clippy::too_many_arguments)]
pub fn sensitivity_probe(
    cspec: &CocycleSpec,
    x: &BigRational,
    delta: &BigRational,
    eps: &BigRational,
    horizon: u64,
    samples: usize,
    seed: u64,
    bits: u32,
) -> Result<ProbeResult> {
    if !delta.is_positive() || !eps.is_positive() {
        return Err(Error::InvalidArgument("delta and eps must be positive".into()));
    }
    let engine = OrbitEngine::new(cspec, bits)?;
    let fine = OrbitEngine::new(cspec, bits * 2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut candidates: Vec<BigRational> = Vec::with_capacity(samples + 1);
    if let Some(c) = family_candidate(cspec, x, delta) {
        if (&c - x).abs() < *delta {
            candidates.push(c);
        }
    }
    for _ in 0..samples {
        // y = x + delta (2u − 1), u uniform in [0, 1)
        let u = BigRational::new(BigInt::from(rng.next_u64()), BigInt::one() << 64u32);
        candidates.push(frac(&(x + delta * (u * int(2) - int(1)))));
    }
    let mut witness = None;
    for (i, y) in candidates.iter().enumerate() {
        if let Some((k, d)) = separation(&engine, x, y, eps, horizon)? {
            let reverified = separation(&fine, x, y, eps, k)?.is_some();
            witness = Some(Witness { y: y.clone(), k, distance: d, candidate: i, reverified });
            break;
        }
    }
    let outcome = if witness.as_ref().is_some_and(|w| w.reverified) { Outcome::Found } else { Outcome::NotFound };
    Ok(ProbeResult {
        kind: ProbeKind::Sensitivity,
        eps: Some(eps.clone()),
        delta: Some(delta.clone()),
        horizon,
        samples: candidates.len(),
        seed: Some(seed),
        outcome,
        witness,
        error_bound: engine.error_bound(horizon),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OrbitClass {
    EscapingPlus,
    EscapingMinus,
    Oscillating,
    Undetermined,
}

impl OrbitClass {
    pub fn name(self) -> &'static str {
        match self {
            OrbitClass::EscapingPlus => "escaping+",
            OrbitClass::EscapingMinus => "escaping-",
            OrbitClass::Oscillating => "oscillating",
            OrbitClass::Undetermined => "undetermined",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Level `|t − t_0|` must clear.
    pub level: f64,
    /// Number of consecutive blocks the second half of the orbit is cut into.
    pub blocks: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { level: 1.0, blocks: 4 }
    }
}

/// Labels the forward orbit by `t_m − t_0` over the second half of
/// `1..=horizon`: escaping when every block stays beyond `level` on one side
/// with block extremes moving outward, oscillating when both sides are
/// cleared, undetermined otherwise.
pub fn classify_orbit(cspec: &CocycleSpec, x: &BigRational, horizon: u64, thresholds: Thresholds, bits: u32) -> Result<OrbitClass> {
    if horizon < 2 * thresholds.blocks as u64 || thresholds.blocks == 0 {
        return Err(Error::InvalidArgument("horizon too short for the block count".into()));
    }
    let engine = OrbitEngine::new(cspec, bits)?;
    let slack = crate::rat::to_f64(&engine.error_bound(horizon));
    let level = thresholds.level + slack;
    let t0 = BigRational::zero();
    let half = horizon / 2;
    let block_len = (horizon - half).div_ceil(thresholds.blocks as u64);
    let mut mins = alloc::vec![f64::INFINITY; thresholds.blocks];
    let mut maxs = alloc::vec![f64::NEG_INFINITY; thresholds.blocks];
    for s in engine.walk(x, &t0, horizon)?.skip(half as usize + 1) {
        let b = (((s.step - half - 1) / block_len) as usize).min(thresholds.blocks - 1);
        let t = s.t_f64(&engine);
        mins[b] = mins[b].min(t);
        maxs[b] = maxs[b].max(t);
    }
    let lo = mins.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = maxs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let outward_up = mins.windows(2).all(|w| w[1] >= w[0]);
    let outward_down = maxs.windows(2).all(|w| w[1] <= w[0]);
    Ok(if lo > level && outward_up {
        OrbitClass::EscapingPlus
    } else if hi < -level && outward_down {
        OrbitClass::EscapingMinus
    } else if lo < -level && hi > level {
        OrbitClass::Oscillating
    } else {
        OrbitClass::Undetermined
    })
}

/// Decimal rendering of a fixed-point value with `digits` fractional digits (truncated).
pub fn fixed_to_decimal(engine: &OrbitEngine, v: &BigInt, digits: usize) -> alloc::string::String {
    let neg = v.is_negative();
    let a = v.abs();
    let whole = &a >> engine.bits;
    let mut rest = &a & &engine.mask;
    let mut s = alloc::format!("{}{}", if neg { "-" } else { "" }, whole);
    if digits > 0 {
        s.push('.');
        for _ in 0..digits {
            rest *= 10u32;
            let d = (&rest >> engine.bits).to_u32().unwrap_or(0);
            s.push(char::from(b'0' + d as u8));
            rest &= &engine.mask;
        }
    }
    s
}
