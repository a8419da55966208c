//! Exact evaluation of the level functions, the cocycle
//! `φ(x) = Σ_{l ≤ N} (f_l(x + α̂) − f_l(x))` and its ergodic sums.
//!
//! α is replaced by one deep convergent `α̂ = p_D/q_D` everywhere, so every
//! identity below holds exactly; the price is the substitution error
//! `Λ_l |m| |α − α̂|` per level, reported by [`CocycleSpec::substitution_budget`].

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::cf::approximation_width;
use crate::params::{select_levels, LevelParams, Profile, Strategy, Variant};
use crate::rat::{dist_to_int, int, ratio};
use crate::{Error, Result};

/// `q_D` must exceed `GUARD · max_l Λ_l`.
pub const GUARD: u64 = 1_000_000;

/// Extra levels the default truncation carries beyond the audited `n_max`.
pub const DEFAULT_EXTRA_LEVELS: u32 = 3;

/// A period-`P` piecewise-linear function given by breakpoints on `[0, P]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiecewisePeriodic {
    pub period: BigRational,
    pub points: Vec<(BigRational, BigRational)>,
    pub slope: BigRational,
}

impl PiecewisePeriodic {
    pub fn for_level(level: &LevelParams, variant: Variant) -> Self {
        let p = level.period();
        let at = |num: i64, den: i64| &p * ratio(num, den);
        let points = match variant {
            Variant::Main => {
                let h = level.plateau();
                alloc::vec![
                    (int(0), int(0)),
                    (at(1, 12), int(0)),
                    (at(5, 12), h.clone()),
                    (at(7, 12), h),
                    (at(11, 12), int(0)),
                    (p.clone(), int(0)),
                ]
            }
            Variant::Tent => alloc::vec![
                (int(0), int(0)),
                (at(1, 2), level.lambda() * at(1, 2)),
                (p.clone(), int(0)),
            ],
        };
        PiecewisePeriodic { period: p, points, slope: level.lambda() }
    }

    /// Linear interpolation between breakpoints after reducing mod the period.
    pub fn eval(&self, x: &BigRational) -> BigRational {
        let y = crate::rat::frac(&(x / &self.period)) * &self.period;
        for w in self.points.windows(2) {
            let ((x0, y0), (x1, y1)) = (&w[0], &w[1]);
            if &y >= x0 && &y <= x1 {
                return y0 + (y1 - y0) * (&y - x0) / (x1 - x0);
            }
        }
        unreachable!("reduced argument lies in [0, P)")
    }

    pub fn max(&self) -> BigRational {
        self.points.iter().map(|p| p.1.clone()).max().unwrap()
    }
}

/// `f_l(x)` (main) or `g_l(x)` (tent), exactly.
pub fn eval_level(level: &LevelParams, variant: Variant, x: &BigRational) -> BigRational {
    let (num, den) = eval_raw(level, variant, x);
    BigRational::new(num, den)
}

/// Unreduced `(num, den)` of `f_l(x)`, `den > 0`.
fn eval_raw(level: &LevelParams, variant: Variant, x: &BigRational) -> (BigInt, BigInt) {
    let den = x.denom();
    // u = r/den is the position inside the period, folded into [0, 1/2].
    let mut r = (x.numer() * level.cells()).mod_floor(den);
    if &(&r * 2u32) > den {
        r = den - r;
    }
    let scale_den = &level.a * BigInt::from(level.n) * BigInt::from(level.n);
    match variant {
        Variant::Main => {
            let twelve_r = &r * 12u32;
            if &twelve_r <= den {
                (BigInt::zero(), BigInt::one())
            } else if twelve_r <= den * 5u32 {
                (&level.q_next * (twelve_r - den), den * scale_den * 12u32)
            } else {
                (level.q_next.clone(), scale_den * 3u32)
            }
        }
        Variant::Tent => (&level.q_next * r, den * scale_den),
    }
}

fn diff(level: &LevelParams, variant: Variant, y: &BigRational, x: &BigRational) -> BigRational {
    let (a, b) = eval_raw(level, variant, y);
    let (c, d) = eval_raw(level, variant, x);
    if b == d {
        BigRational::new(a - c, b)
    } else {
        BigRational::new(a * &d - c * &b, b * d)
    }
}

/// `f_l(x + shift) − f_l(x)`.
pub fn term(level: &LevelParams, variant: Variant, x: &BigRational, shift: &BigRational) -> BigRational {
    diff(level, variant, &(x + shift), x)
}

/// `Λ_l · dist(shift, P_l ℤ)`, an upper bound for `|term(l, x, shift)|`.
pub fn lipschitz_bound(level: &LevelParams, shift: &BigRational) -> BigRational {
    level.lambda() * level.period() * dist_to_int(&(shift * int(level.cells())))
}

/// A profile truncated at `N` levels together with the rational stand-in α̂.
#[derive(Debug, Clone)]
pub struct CocycleSpec {
    profile: Profile,
    truncation: u32,
    alpha_depth: usize,
    alpha_hat: BigRational,
    alpha_width: BigRational,
    /// `Σ_{l ≤ N} Λ_l |α − α̂|` bound
    unit_budget: BigRational,
}

impl CocycleSpec {
    /// Uses the first `truncation` levels and picks the shallowest α̂ that
    /// satisfies the guard.
    pub fn new(profile: Profile, truncation: u32) -> Result<Self> {
        let depth = Self::min_alpha_depth(&profile, truncation)?;
        Self::with_alpha_depth(profile, truncation, depth)
    }

    pub fn with_alpha_depth(profile: Profile, truncation: u32, alpha_depth: usize) -> Result<Self> {
        if truncation > profile.n_max() {
            return Err(Error::DepthExceedsProfile { depth: truncation, available: profile.n_max() });
        }
        let c = crate::cf::convergent(&profile.alpha, alpha_depth);
        let bound = Self::guard_bound(&profile, truncation);
        if int(c.q.clone()) <= bound {
            return Err(Error::InvalidArgument(alloc::format!(
                "alpha depth {alpha_depth} violates the guard q_D > {GUARD} max Λ_l"
            )));
        }
        let alpha_width = approximation_width(&profile.alpha, alpha_depth);
        let lambda: BigRational =
            profile.levels[..truncation as usize].iter().fold(BigRational::zero(), |a, l| a + l.lambda());
        Ok(CocycleSpec {
            unit_budget: lambda * &alpha_width,
            alpha_hat: c.value(),
            alpha_width,
            profile,
            truncation,
            alpha_depth,
        })
    }

    /// Default construction: `n_max + 3` levels, all of them in the sum.
    pub fn standard(
        spec: &crate::cf::IrrationalSpec,
        strategy: Strategy,
        variant: Variant,
        n_max: u32,
    ) -> Result<Self> {
        let total = n_max + DEFAULT_EXTRA_LEVELS;
        let profile = select_levels(spec, strategy, variant, total)?;
        Self::new(profile, total)
    }

    fn guard_bound(profile: &Profile, truncation: u32) -> BigRational {
        let max_lambda = profile.levels[..truncation as usize]
            .iter()
            .map(|l| l.lambda())
            .max()
            .unwrap_or_else(BigRational::one);
        max_lambda * int(GUARD)
    }

    fn min_alpha_depth(profile: &Profile, truncation: u32) -> Result<usize> {
        let bound = Self::guard_bound(profile, truncation);
        let start = profile.levels[..truncation as usize].iter().map(|l| l.k + 2).max().unwrap_or(2);
        for c in profile.alpha.convergents().skip(start) {
            if int(c.q.clone()) > bound {
                return Ok(c.index);
            }
        }
        unreachable!("convergent denominators are unbounded")
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn variant(&self) -> Variant {
        self.profile.variant
    }

    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    pub fn alpha_depth(&self) -> usize {
        self.alpha_depth
    }

    pub fn alpha_hat(&self) -> &BigRational {
        &self.alpha_hat
    }

    /// Upper bound for `|α − α̂|`.
    pub fn alpha_width(&self) -> &BigRational {
        &self.alpha_width
    }

    /// The summed levels `1..=N`.
    pub fn levels(&self) -> &[LevelParams] {
        &self.profile.levels[..self.truncation as usize]
    }

    pub fn level(&self, l: u32) -> &LevelParams {
        &self.profile.levels[(l - 1) as usize]
    }

    /// `Σ_{l>N} 1/l² < 1/N`, the uniform bound on the omitted levels of `φ`.
    pub fn tail_bound(&self) -> Option<BigRational> {
        (self.truncation > 0).then(|| ratio(1, self.truncation))
    }

    /// `Σ_{l ∈ levels} Λ_l |m| |α − α̂|` (using the bracket width).
    pub fn substitution_budget(&self, m: i64, levels: impl IntoIterator<Item = u32>) -> BigRational {
        let lam: BigRational = levels.into_iter().map(|l| self.level(l).lambda()).fold(BigRational::zero(), |a, b| a + b);
        lam * int(m.unsigned_abs()) * &self.alpha_width
    }

    /// The substitution budget over all summed levels.
    pub fn budget(&self, m: i64) -> BigRational {
        &self.unit_budget * int(m.unsigned_abs())
    }

    pub fn shift(&self, m: i64) -> BigRational {
        &self.alpha_hat * int(m)
    }

    /// Per-level terms `f_l(x + m α̂) − f_l(x)`, `l = 1..=N`.
    pub fn terms(&self, x: &BigRational, m: i64) -> Vec<BigRational> {
        let y = x + self.shift(m);
        self.levels()
            .iter()
            .map(|l| diff(l, self.variant(), &y, x))
            .collect()
    }
}

/// `φ(x)`, truncated at `N` levels.
pub fn phi(cspec: &CocycleSpec, x: &BigRational) -> BigRational {
    phi_m(cspec, x, 1)
}

/// `φ^(m)(x) = Σ_l (f_l(x + m α̂) − f_l(x))`.
pub fn phi_m(cspec: &CocycleSpec, x: &BigRational, m: i64) -> BigRational {
    if m == 0 {
        return BigRational::zero();
    }
    let y = x + cspec.shift(m);
    let mut acc = BigRational::zero();
    for l in cspec.levels() {
        acc += eval_level(l, cspec.variant(), &y) - eval_level(l, cspec.variant(), x);
    }
    acc
}

/// Direct ergodic sum: `φ(x) + φ(x + α̂) + ... + φ(x + (m−1)α̂)` for `m > 0`,
/// `−φ(x − α̂) − ... − φ(x + mα̂)` for `m < 0`.
pub fn birkhoff(cspec: &CocycleSpec, x: &BigRational, m: i64) -> BigRational {
    let a = cspec.alpha_hat();
    let mut total = BigRational::zero();
    if m > 0 {
        let mut y = x.clone();
        for _ in 0..m {
            total += phi(cspec, &y);
            y += a;
        }
    } else {
        let mut y = x.clone();
        for _ in 0..m.unsigned_abs() {
            y -= a;
            total -= phi(cspec, &y);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;
    use crate::cf::IrrationalSpec;
    use crate::params::select_levels;
    use proptest::prelude::{prop_assert, prop_assert_eq, proptest, ProptestConfig};
    use proptest::strategy::Strategy as Gen;

    fn greedy(variant: Variant, n: u32) -> CocycleSpec {
        let p = select_levels(&IrrationalSpec::golden(), Strategy::Greedy, variant, n).unwrap();
        CocycleSpec::new(p, n).unwrap()
    }

    #[test]
    fn zero_and_plateau() {
        let c = greedy(Variant::Main, 4);
        for l in c.levels() {
            assert!(eval_level(l, Variant::Main, &int(0)).is_zero());
            let half = l.period() / int(2);
            assert_eq!(eval_level(l, Variant::Main, &half), l.plateau());
        }
    }

    #[test]
    fn fast_path_matches_interpolation() {
        for variant in [Variant::Main, Variant::Tent] {
            let c = greedy(variant, 4);
            for l in c.levels() {
                let pw = PiecewisePeriodic::for_level(l, variant);
                assert_eq!(pw.max(), l.peak(variant));
                for i in 0..200i64 {
                    let x = ratio(i * 7919 + 3, 100_003);
                    assert_eq!(eval_level(l, variant, &x), pw.eval(&x), "l={} x={x}", l.n);
                }
            }
        }
    }

    #[test]
    fn breakpoints_are_continuous() {
        let eps = ratio(1, num_traits::pow(BigInt::from(10), 40));
        for variant in [Variant::Main, Variant::Tent] {
            let c = greedy(variant, 3);
            for l in c.levels() {
                let pw = PiecewisePeriodic::for_level(l, variant);
                for (bx, by) in &pw.points {
                    let left = eval_level(l, variant, &(bx - &eps));
                    let right = eval_level(l, variant, &(bx + &eps));
                    let slack = l.lambda() * &eps;
                    assert!((&left - by).abs() <= slack && (&right - by).abs() <= slack);
                    assert_eq!(&eval_level(l, variant, bx), by);
                }
            }
        }
    }

    #[test]
    fn phi_m_zero_and_one() {
        let c = greedy(Variant::Tent, 4);
        let x = ratio(1, 7);
        assert!(phi_m(&c, &x, 0).is_zero());
        assert_eq!(phi_m(&c, &x, 1), phi(&c, &x));
        assert_eq!(phi(&c, &x), phi(&c, &(&x + int(1))));
    }

    #[test]
    fn tail_bound_and_guard() {
        let c = greedy(Variant::Main, 5);
        assert_eq!(c.tail_bound(), Some(ratio(1, 5)));
        let q = crate::cf::convergent(&c.profile().alpha, c.alpha_depth()).q;
        let max_lambda = c.levels().iter().map(|l| l.lambda()).max().unwrap();
        assert!(int(q) > max_lambda * int(GUARD));
        assert!(CocycleSpec::with_alpha_depth(c.profile().clone(), 5, 20).is_err());
    }

    #[test]
    fn standard_adds_three_levels() {
        let c = CocycleSpec::standard(&IrrationalSpec::golden(), Strategy::Greedy, Variant::Main, 4).unwrap();
        assert_eq!(c.truncation(), 7);
        assert_eq!(c.profile().n_max(), 7);
    }

    #[test]
    fn telescoping_small() {
        let c = greedy(Variant::Main, 4);
        let x = ratio(3, 11);
        for m in -12..=12 {
            assert_eq!(phi_m(&c, &x, m), birkhoff(&c, &x, m), "m={m}");
        }
    }

    #[test]
    fn uniform_convergence_bound() {
        let c = greedy(Variant::Main, 5);
        for l in c.levels() {
            let bound = ratio(1, l.n * l.n) + l.lambda() * c.alpha_width();
            for i in 0..50i64 {
                let x = ratio(i * 31 + 1, 1553);
                let t = term(l, Variant::Main, &x, c.alpha_hat());
                assert!(t.abs() < bound);
            }
        }
    }

    fn small_rational() -> impl Gen<Value = BigRational> {
        (0i64..10_000, 1i64..10_000).prop_map(|(a, b)| ratio(a % b, b))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn even_and_periodic(x in small_rational(), k in -5i64..5) {
            for variant in [Variant::Main, Variant::Tent] {
                let c = greedy(variant, 3);
                for l in c.levels() {
                    let p = l.period();
                    let v = eval_level(l, variant, &x);
                    prop_assert_eq!(&v, &eval_level(l, variant, &(&p - &x)));
                    prop_assert_eq!(&v, &eval_level(l, variant, &(&x + &p * int(k))));
                    prop_assert!(!v.is_negative() && v <= l.peak(variant));
                }
            }
        }

        #[test]
        fn lipschitz_certificate(x in small_rational(), m in -40i64..40) {
            let c = greedy(Variant::Main, 4);
            let s = c.shift(m);
            for l in c.levels() {
                prop_assert!(term(l, Variant::Main, &x, &s).abs() <= lipschitz_bound(l, &s));
            }
        }

        #[test]
        fn cocycle_identity(x in small_rational(), a in -20i64..20, b in -20i64..20) {
            let c = greedy(Variant::Tent, 4);
            let xa = crate::rat::frac(&(&x + c.shift(a)));
            prop_assert_eq!(phi_m(&c, &x, a + b), phi_m(&c, &x, a) + phi_m(&c, &xa, b));
        }

        #[test]
        fn term_invariant_under_period_shift(x in small_rational(), k in 0i64..50) {
            let c = greedy(Variant::Main, 3);
            for l in c.levels() {
                let y = &x + l.period() * int(k);
                prop_assert_eq!(term(l, Variant::Main, &x, c.alpha_hat()), term(l, Variant::Main, &y, c.alpha_hat()));
            }
        }
    }
}
