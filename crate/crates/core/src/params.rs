//! Level selection and the per-level scalars of the construction.
//!
//! Level `n` uses the convergent index `k_n`; from it come
//! `A_n = ⌊(3/4)^n q_{k_n+1}⌋` (or 1 for the tent variant),
//! `Λ_n = q_{k_n} q_{k_n+1} / n²`, the period `1/(A_n q_{k_n})` and the
//! plateau height `q_{k_n+1}/(3 A_n n²)` of the bump `f_n`.

use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::One;

use crate::cf::{gap_bounds_check, Convergent, IrrationalSpec};
use crate::logs;
use crate::rat::{int, ratio};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// `k_n = 4n² + 1`.
    Fixed,
    /// Smallest admissible `k_n`, level by level.
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Trapezoidal bumps with flat zero and plateau pieces.
    Main,
    /// Tent functions with `A_n = 1`.
    Tent,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Fixed => "fixed",
            Strategy::Greedy => "greedy",
        }
    }
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Main => "main",
            Variant::Tent => "tent",
        }
    }
}

impl core::str::FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(Strategy::Fixed),
            "greedy" => Ok(Strategy::Greedy),
            _ => Err(Error::InvalidArgument(alloc::format!("unknown strategy {s:?}"))),
        }
    }
}

impl core::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "main" => Ok(Variant::Main),
            "tent" => Ok(Variant::Tent),
            _ => Err(Error::InvalidArgument(alloc::format!("unknown variant {s:?}"))),
        }
    }
}

/// One construction level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelParams {
    pub n: u32,
    pub k: usize,
    pub p: BigInt,
    pub q: BigInt,
    /// `q_{k_n + 1}`
    pub q_next: BigInt,
    /// `A_n`
    pub a: BigInt,
}

impl LevelParams {
    fn n_sq(&self) -> BigInt {
        BigInt::from(self.n) * BigInt::from(self.n)
    }

    /// `Λ_n = q_{k_n} q_{k_n+1} / n²`
    pub fn lambda(&self) -> BigRational {
        BigRational::new(&self.q * &self.q_next, self.n_sq())
    }

    /// Number of period cells in `[0, 1)`: `A_n q_{k_n}`.
    pub fn cells(&self) -> BigInt {
        &self.a * &self.q
    }

    /// `1/(A_n q_{k_n})`
    pub fn period(&self) -> BigRational {
        BigRational::new(BigInt::one(), self.cells())
    }

    /// `q_{k_n+1}/(3 A_n n²)`, the plateau of the main bump.
    pub fn plateau(&self) -> BigRational {
        BigRational::new(self.q_next.clone(), &self.a * self.n_sq() * 3)
    }

    /// Maximum of the level function: the plateau for the main bump,
    /// `Λ_n/(2 A_n q_{k_n})` for the tent.
    pub fn peak(&self, variant: Variant) -> BigRational {
        match variant {
            Variant::Main => self.plateau(),
            Variant::Tent => BigRational::new(self.q_next.clone(), &self.a * self.n_sq() * 2),
        }
    }

    /// `q_{k_n+1}/A_n`, the growth sequence of the construction.
    pub fn growth(&self) -> BigRational {
        BigRational::new(self.q_next.clone(), self.a.clone())
    }

    /// `p_{k_n}/q_{k_n}`
    pub fn convergent(&self) -> BigRational {
        BigRational::new(self.p.clone(), self.q.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelScalars {
    pub lambda: BigRational,
    pub period: BigRational,
    pub plateau: BigRational,
    pub a: BigInt,
}

pub fn level_scalars(level: &LevelParams) -> LevelScalars {
    LevelScalars {
        lambda: level.lambda(),
        period: level.period(),
        plateau: level.plateau(),
        a: level.a.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Profile {
    pub alpha: IrrationalSpec,
    pub strategy: Strategy,
    pub variant: Variant,
    pub levels: Vec<LevelParams>,
}

impl Profile {
    pub fn n_max(&self) -> u32 {
        self.levels.len() as u32
    }

    /// Level `n` (1-based).
    pub fn level(&self, n: u32) -> Option<&LevelParams> {
        n.checked_sub(1).and_then(|i| self.levels.get(i as usize))
    }

    /// `(−1)^{k_1}`
    pub fn parity_sign(&self) -> i8 {
        match self.levels.first() {
            Some(l) if l.k % 2 == 1 => -1,
            _ => 1,
        }
    }

    /// Rebuilds a profile from stored `(n, k, p, q, q_next, A)` rows, checking
    /// them against the convergents of `alpha`.
    pub fn from_rows(
        alpha: IrrationalSpec,
        strategy: Strategy,
        variant: Variant,
        levels: Vec<LevelParams>,
    ) -> Result<Self> {
        let mut table = ConvergentTable::new(&alpha);
        for (i, l) in levels.iter().enumerate() {
            if l.n as usize != i + 1 {
                return Err(Error::InvalidSpec("levels must be numbered 1, 2, ...".into()));
            }
            let c = table.get(l.k).clone();
            let c1 = table.get(l.k + 1);
            if c.p != l.p || c.q != l.q || c1.q != l.q_next {
                return Err(Error::InvalidSpec(alloc::format!(
                    "level {} does not match convergent k = {}",
                    l.n,
                    l.k
                )));
            }
            if l.a < BigInt::one() {
                return Err(Error::InvalidSpec("A_n must be positive".into()));
            }
        }
        Ok(Profile { alpha, strategy, variant, levels })
    }
}

/// Lazily grown table of convergents.
pub(crate) struct ConvergentTable<'a> {
    iter: crate::cf::Convergents<'a>,
    items: Vec<Convergent>,
}

impl<'a> ConvergentTable<'a> {
    pub(crate) fn new(spec: &'a IrrationalSpec) -> Self {
        ConvergentTable { iter: spec.convergents(), items: Vec::new() }
    }

    pub(crate) fn get(&mut self, k: usize) -> &Convergent {
        while self.items.len() <= k {
            self.items.push(self.iter.next().unwrap());
        }
        &self.items[k]
    }
}

fn make_level(table: &mut ConvergentTable<'_>, n: u32, k: usize, variant: Variant) -> LevelParams {
    let c = table.get(k).clone();
    let q_next = table.get(k + 1).q.clone();
    let a = match variant {
        Variant::Main => {
            let three = num_traits::pow(BigInt::from(3u32), n as usize);
            let four = num_traits::pow(BigInt::from(4u32), n as usize);
            (three * &q_next).div_floor(&four)
        }
        Variant::Tent => BigInt::one(),
    };
    LevelParams { n, k, p: c.p, q: c.q, q_next, a }
}

/// Picks `k_1, ..., k_{n_max}` and the derived scalars.
///
/// Greedy selection starts from the smallest `k_1 >= 1` with
/// `q_{k_1+1} >= 9` and then takes the smallest `k_n` of the same parity with
/// `q_{k_n} >= 5 q_{k_{n-1}}` and `q_{k_n+1} >= 5 q_{k_{n-1}+1}` (main) or
/// `q_{k_n} >= 18 q_{k_{n-1}}` (tent).
pub fn select_levels(
    spec: &IrrationalSpec,
    strategy: Strategy,
    variant: Variant,
    n_max: u32,
) -> Result<Profile> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be >= 1".into()));
    }
    let mut table = ConvergentTable::new(spec);
    let mut levels: Vec<LevelParams> = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        let k = match strategy {
            Strategy::Fixed => 4 * (n as usize) * (n as usize) + 1,
            Strategy::Greedy => match levels.last() {
                None => {
                    let nine = BigInt::from(9);
                    let mut k = 1;
                    while table.get(k + 1).q < nine {
                        k += 1;
                    }
                    k
                }
                Some(prev) => {
                    let mut k = prev.k + 2;
                    loop {
                        let q = table.get(k).q.clone();
                        let ok = match variant {
                            Variant::Main => {
                                q >= &prev.q * 5 && table.get(k + 1).q >= &prev.q_next * 5
                            }
                            Variant::Tent => q >= &prev.q * 18,
                        };
                        if ok {
                            break k;
                        }
                        k += 2;
                    }
                }
            },
        };
        levels.push(make_level(&mut table, n, k, variant));
    }
    Ok(Profile { alpha: spec.clone(), strategy, variant, levels })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
}

impl Relation {
    pub fn holds(self, value: &BigRational, bound: &BigRational) -> bool {
        match self {
            Relation::Lt => value < bound,
            Relation::Le => value <= bound,
            Relation::Gt => value > bound,
            Relation::Ge => value >= bound,
            Relation::Eq => value == bound,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Gt => ">",
            Relation::Ge => ">=",
            Relation::Eq => "==",
        }
    }
}

/// One named inequality together with the exact value it was decided on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub name: &'static str,
    pub level: Option<u32>,
    pub value: BigRational,
    pub relation: Relation,
    pub bound: BigRational,
    pub passed: bool,
    /// Reported but not part of the pass/fail verdict.
    pub informational: bool,
}

impl Certificate {
    fn new(name: &'static str, level: Option<u32>, value: BigRational, relation: Relation, bound: BigRational) -> Self {
        let passed = relation.holds(&value, &bound);
        Certificate { name, level, value, relation, bound, passed, informational: false }
    }

    fn info(mut self) -> Self {
        self.informational = true;
        self
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}[{}]: {} {} {} -> {}",
            self.name,
            self.level.map(|l| l.to_string()).unwrap_or_else(|| "-".into()),
            crate::rat::fmt(&self.value),
            self.relation.symbol(),
            crate::rat::fmt(&self.bound),
            if self.passed { "pass" } else if self.informational { "note" } else { "FAIL" }
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Validation {
    pub certificates: Vec<Certificate>,
    /// `(1/n) ln q_{k_n}` for inspection; the growth condition it stands for
    /// is asymptotic and is not decided here.
    pub growth_rate: Vec<f64>,
}

impl Validation {
    pub fn passed(&self) -> bool {
        self.certificates.iter().all(|c| c.passed || c.informational)
    }

    pub fn first_failure(&self) -> Option<&Certificate> {
        self.certificates.iter().find(|c| !c.passed && !c.informational)
    }

    pub fn check(&self) -> Result<()> {
        match self.first_failure() {
            None => Ok(()),
            Some(c) => Err(Error::ValidationFailure {
                name: c.name.into(),
                level: c.level,
                value: crate::rat::fmt(&c.value),
                bound: crate::rat::fmt(&c.bound),
            }),
        }
    }

    pub fn get(&self, name: &str, level: u32) -> Option<&Certificate> {
        self.certificates.iter().find(|c| c.name == name && c.level == Some(level))
    }
}

/// Checks the growth and consistency conditions the divergence estimates use.
pub fn validate_levels(profile: &Profile) -> Result<Validation> {
    let mut certs = Vec::new();
    let levels = &profile.levels;
    let Some(first) = levels.first() else {
        return Err(Error::InvalidArgument("profile has no levels".into()));
    };
    let parity = int(BigInt::from(first.k % 2));
    for l in levels {
        let lv = Some(l.n);
        certs.push(Certificate::new("parity", lv, int(BigInt::from(l.k % 2)), Relation::Eq, parity.clone()));
        let gap = gap_bounds_check(&profile.alpha, l.k)?;
        certs.push(Certificate::new("gap_sign", lv, int(gap.sign), Relation::Eq, int(if l.k % 2 == 0 { 1 } else { -1 })));
        let (w_lo, w_hi) = gap.witness.clone();
        let mut lower = Certificate::new("gap_lower", lv, w_lo, Relation::Ge, gap.lower_bound.clone());
        lower.passed = gap.lower_ok;
        let mut upper = Certificate::new("gap_upper", lv, w_hi, Relation::Le, gap.upper_bound.clone());
        upper.passed = gap.upper_ok;
        certs.push(lower);
        certs.push(upper);
    }

    match profile.variant {
        Variant::Main => {
            certs.push(Certificate::new("first_q_next", Some(1), int(first.q_next.clone()), Relation::Ge, int(9)));
            certs.push(Certificate::new("first_q", Some(1), int(first.q.clone()), Relation::Ge, int(9)).info());
            let g1 = first.growth();
            for (i, l) in levels.iter().enumerate() {
                let lv = Some(l.n);
                let n = l.n as usize;
                certs.push(Certificate::new("a_positive", lv, int(l.a.clone()), Relation::Ge, int(1)));
                let scaled = BigRational::new(
                    num_traits::pow(BigInt::from(3u32), n) * &l.q_next,
                    num_traits::pow(BigInt::from(4u32), n),
                );
                certs.push(Certificate::new("a_floor", lv, int(l.a.clone()), Relation::Gt, scaled - int(1)));
                if i == 0 {
                    continue;
                }
                let prev = &levels[i - 1];
                certs.push(Certificate::new("q_growth", lv, ratio(l.q.clone(), prev.q.clone()), Relation::Ge, int(5)));
                certs.push(Certificate::new(
                    "q_next_growth",
                    lv,
                    ratio(l.q_next.clone(), prev.q_next.clone()),
                    Relation::Ge,
                    int(5),
                ));
                let a_ratio = ratio(&l.a * &prev.q_next, &prev.a * &l.q_next);
                certs.push(Certificate::new("a_ratio", lv, a_ratio.clone(), Relation::Gt, ratio(18, 25)));
                certs.push(Certificate::new("a_ratio_inverse", lv, a_ratio.recip(), Relation::Gt, ratio(11, 10)));
                let r = l.growth() / prev.growth();
                certs.push(Certificate::new("growth_ratio_lower", lv, r.clone(), Relation::Gt, ratio(11, 10)));
                certs.push(Certificate::new("growth_ratio_upper", lv, r, Relation::Lt, ratio(25, 18)));
                certs.push(Certificate::new("growth_monotone", lv, l.growth(), Relation::Gt, prev.growth()));
                let geo = num_traits::pow(ratio(11, 10), i) * &g1;
                certs.push(Certificate::new("growth_geometric", lv, l.growth(), Relation::Ge, geo));
            }
        }
        Variant::Tent => {
            for (i, l) in levels.iter().enumerate() {
                let lv = Some(l.n);
                certs.push(Certificate::new("tent_unit_a", lv, int(l.a.clone()), Relation::Eq, int(1)));
                if i > 0 {
                    let prev = &levels[i - 1];
                    certs.push(Certificate::new(
                        "tent_growth",
                        lv,
                        ratio(l.cells(), prev.cells()),
                        Relation::Ge,
                        int(18),
                    ));
                }
            }
        }
    }

    let growth_rate = levels
        .iter()
        .map(|l| logs::ln_int(&l.q, logs::DEFAULT_BITS).mid() / l.n as f64)
        .collect();
    Ok(Validation { certificates: certs, growth_rate })
}
