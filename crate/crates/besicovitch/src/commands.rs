//! One function per subcommand, each producing a [`Report`].

use besicovitch_core::audit::{window, Auditor, Check, DivergenceReport, WindowKind};
use besicovitch_core::cf::{convergents, gap_bounds_check};
use besicovitch_core::cocycle::{birkhoff, eval_level, phi_m, term, CocycleSpec, DEFAULT_EXTRA_LEVELS};
use besicovitch_core::dimension::{box_count, falconer_bounds, nesting_stats, CountMode};
use besicovitch_core::dynamics::{
    classify_orbit, coverage, fixed_to_decimal, nonrecurrence_test, sensitivity_probe, OrbitEngine, ProbeResult,
    Thresholds,
};
use besicovitch_core::params::{select_levels, validate_levels, Profile};
use besicovitch_core::rat;
use besicovitch_core::targets::{member, nested_intervals, sample_point, DigitPath, SamplePolicy, SignPair};
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::cli::{Command, Context, ProbeCommand, ProfileSource};
use crate::error::{CliError, Result};
use crate::formats::{big, enclosure, enclosure_json, load_profile, rat, save_profile, ProfileJson, Report};

fn parse_rat(s: &str) -> Result<BigRational> {
    rat::parse(s).map_err(|e| CliError::Usage(e.to_string()))
}

fn parse_family(s: &str) -> Result<SignPair> {
    SignPair::from_code(s).map_err(|_| CliError::Usage(format!("unknown family {s:?} (pp|mm|pm|mp)")))
}

/// `lo:hi`, inclusive, without `0`.
pub fn parse_m_range(s: &str) -> Result<Vec<i64>> {
    let bad = || CliError::Usage(format!("bad --m-range {s:?}; expected lo:hi"));
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    let lo: i64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: i64 = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok((lo..=hi).filter(|&m| m != 0).collect())
}

/// The stored profile, or `levels` freshly selected levels.
fn profile(ctx: &Context, levels: u32) -> Result<Profile> {
    match &ctx.source {
        ProfileSource::File(path) => load_profile(path),
        ProfileSource::Select => {
            let c = &ctx.config;
            Ok(select_levels(&c.alpha_spec()?, c.strategy()?, c.variant()?, levels)?)
        }
    }
}

/// `n_max + 3` levels (or enough for `--trunc`), summed up to the truncation.
fn cocycle(ctx: &Context) -> Result<CocycleSpec> {
    let c = &ctx.config;
    let wanted = (c.n_max + DEFAULT_EXTRA_LEVELS).max(c.truncation.unwrap_or(0));
    let p = profile(ctx, wanted)?;
    let trunc = c.truncation.unwrap_or(p.n_max());
    Ok(match c.alpha_depth {
        Some(d) => CocycleSpec::with_alpha_depth(p, trunc, d)?,
        None => CocycleSpec::new(p, trunc)?,
    })
}

pub fn run(ctx: &Context, cmd: &Command) -> Result<Report> {
    match cmd {
        Command::Cf { upto } => cf(ctx, *upto),
        Command::Levels { save } => levels(ctx, save.as_deref()),
        Command::Eval { x, m } => eval(ctx, &parse_rat(x)?, *m),
        Command::Sum { x, m } => sum(ctx, &parse_rat(x)?, *m),
        Command::Target { family, depth, x } => target(ctx, parse_family(family)?, *depth, x.as_deref()),
        Command::Audit { family, m, m_range, depth } => {
            let ms = match (m, m_range) {
                (Some(m), None) => Shifts::One(*m),
                (None, Some(r)) => Shifts::Range(parse_m_range(r)?),
                _ => return Err(CliError::Usage("audit needs --m or --m-range".into())),
            };
            audit(ctx, parse_family(family)?, ms, *depth)
        }
        Command::Dimension { family, measured, grid, grid_min } => {
            dimension(ctx, parse_family(family)?, *measured, *grid, *grid_min)
        }
        Command::Orbit { x, t, horizon, stride } => orbit(ctx, &parse_rat(x)?, &parse_rat(t)?, *horizon, *stride),
        Command::Probe { kind, x, family, horizon, eps, delta, samples, grid, height } => {
            let cspec = cocycle(ctx)?;
            let x = match x {
                Some(x) => parse_rat(x)?,
                None => sample_point(cspec.profile(), parse_family(family)?, &SamplePolicy::Center, cspec.truncation())?.x,
            };
            let eps = eps.as_deref().map(parse_rat).transpose()?;
            let delta = delta.as_deref().map(parse_rat).transpose()?;
            let args = ProbeArgs { x, horizon: *horizon, eps, delta, samples: *samples, grid: *grid, height: *height };
            probe(ctx, &cspec, *kind, &args)
        }
    }
}

fn cf(ctx: &Context, upto: usize) -> Result<Report> {
    let spec = ctx.config.alpha_spec()?;
    let mut r = Report::new(vec!["n", "a", "p", "q", "sign", "gap_lower", "gap_upper", "pass"]);
    for c in convergents(&spec, upto) {
        let (sign, lower, upper, pass) = if c.index == 0 {
            (String::new(), String::new(), String::new(), String::new())
        } else {
            let g = gap_bounds_check(&spec, c.index)?;
            r.ok &= g.passed();
            (g.sign.to_string(), g.lower_ok.to_string(), g.upper_ok.to_string(), g.passed().to_string())
        };
        r.push(vec![
            c.index.to_string(),
            spec.quotient(c.index).to_string(),
            big(&c.p),
            big(&c.q),
            sign,
            lower,
            upper,
            pass,
        ]);
    }
    Ok(r)
}

fn levels(ctx: &Context, save: Option<&std::path::Path>) -> Result<Report> {
    let p = profile(ctx, ctx.config.n_max)?;
    let v = validate_levels(&p)?;
    let variant = p.variant;
    let mut r = Report::new(vec!["n", "k", "p", "q", "q_next", "A", "lambda", "period", "peak"]);
    for l in &p.levels {
        r.push(vec![
            l.n.to_string(),
            l.k.to_string(),
            big(&l.p),
            big(&l.q),
            big(&l.q_next),
            big(&l.a),
            rat(&l.lambda()),
            rat(&l.period()),
            rat(&l.peak(variant)),
        ]);
    }
    let certs: Vec<Value> = v
        .certificates
        .iter()
        .map(|c| {
            json!({
                "name": c.name,
                "level": c.level,
                "value": rat(&c.value),
                "relation": c.relation.symbol(),
                "bound": rat(&c.bound),
                "passed": c.passed,
                "informational": c.informational,
            })
        })
        .collect();
    r.ok = v.passed();
    r.json = json!({
        "profile": ProfileJson::from_profile(&p),
        "certificates": certs,
        "growth_rate": v.growth_rate,
        "passed": r.ok,
    });
    if let Some(path) = save {
        save_profile(&p, path)?;
    }
    Ok(r)
}

fn eval(ctx: &Context, x: &BigRational, m: Option<i64>) -> Result<Report> {
    let cspec = cocycle(ctx)?;
    let variant = cspec.variant();
    let mut headers = vec!["l", "f_l"];
    if m.is_some() {
        headers.push("term");
    }
    let mut r = Report::new(headers);
    let shift = m.map(|m| cspec.shift(m));
    let mut phi = BigRational::zero();
    let mut rows = Vec::new();
    for l in cspec.levels() {
        let f = eval_level(l, variant, x);
        let mut row = vec![l.n.to_string(), rat(&f)];
        let mut obj = json!({ "l": l.n, "f_l": rat(&f) });
        if let Some(s) = &shift {
            let t = term(l, variant, x, s);
            row.push(rat(&t));
            obj["term"] = json!(rat(&t));
        }
        phi += f;
        r.push(row);
        rows.push(obj);
    }
    r.json = json!({
        "x": rat(x),
        "m": m,
        "alpha_hat": rat(cspec.alpha_hat()),
        "levels": rows,
        "sum_f_l": rat(&phi),
        "phi_m": m.map(|m| rat(&phi_m(&cspec, x, m))),
    });
    Ok(r)
}

fn sum(ctx: &Context, x: &BigRational, m: i64) -> Result<Report> {
    let cspec = cocycle(ctx)?;
    let a = phi_m(&cspec, x, m);
    let b = birkhoff(&cspec, x, m);
    let mut r = Report::new(vec!["x", "m", "phi_m", "birkhoff", "equal"]);
    r.ok = a == b;
    r.push(vec![rat(x), m.to_string(), rat(&a), rat(&b), r.ok.to_string()]);
    r.json = json!({
        "x": rat(x),
        "m": m,
        "truncation": cspec.truncation(),
        "alpha_hat": rat(cspec.alpha_hat()),
        "phi_m": rat(&a),
        "birkhoff": rat(&b),
        "equal": r.ok,
    });
    Ok(r)
}

fn path_json(p: &DigitPath) -> Value {
    json!({
        "family": p.family.code(),
        "js": p.js.iter().map(big).collect::<Vec<_>>(),
        "x": rat(&p.x),
    })
}

fn target(ctx: &Context, family: SignPair, depth: Option<u32>, x: Option<&str>) -> Result<Report> {
    let n = ctx.config.n_max;
    let p = profile(ctx, n.max(depth.unwrap_or(0)))?;
    if let Some(x) = x {
        let x = parse_rat(x)?;
        let m = member(&p, family, &x, n)?;
        let js = m.js.iter().map(big).collect::<Vec<_>>();
        let mut r = Report::new(vec!["x", "family", "up_to", "member", "first_failing_level", "js"]);
        let failing = m.first_failing_level.map(|l| l.to_string()).unwrap_or_default();
        r.push(vec![rat(&x), family.code().into(), n.to_string(), m.member.to_string(), failing, js.join(" ")]);
        r.json = json!({
            "x": rat(&x),
            "family": family.code(),
            "up_to": n,
            "member": m.member,
            "first_failing_level": m.first_failing_level,
            "js": js,
        });
        return Ok(r);
    }
    if let Some(depth) = depth {
        let path = sample_point(&p, family, &SamplePolicy::Center, depth)?;
        let reds = path.reductions(&p);
        let mut r = Report::new(vec!["l", "j", "reduction"]);
        for (i, (j, red)) in path.js.iter().zip(&reds).enumerate() {
            r.push(vec![(i + 1).to_string(), big(j), rat(red)]);
        }
        let mut doc = path_json(&path);
        doc["reductions"] = json!(reds.iter().map(rat).collect::<Vec<_>>());
        r.json = doc;
        return Ok(r);
    }
    let mut r = Report::new(vec!["n", "j", "family", "a_num", "a_den", "b_num", "b_den"]);
    for iv in nested_intervals(&p, family, n, ctx.config.enumeration_cap)? {
        let (a, b) = (iv.a(), iv.b());
        r.push(vec![
            iv.n.to_string(),
            big(&iv.j),
            family.code().into(),
            big(a.numer()),
            big(a.denom()),
            big(b.numer()),
            big(b.denom()),
        ]);
    }
    Ok(r)
}

pub fn report_json(rep: &DivergenceReport) -> Value {
    let opt = |v: &Option<BigRational>| v.as_ref().map(rat);
    json!({
        "family": rep.family.code(),
        "m": rep.m(),
        "n_of_m": rep.n_of_m(),
        "window": {
            "kind": rep.window.kind.name(),
            "lower": rat(&rep.window.lower),
            "upper": rat(&rep.window.upper),
        },
        "path": path_json(&rep.path),
        "rows": rep.rows.iter().map(|row| json!({
            "l": row.l,
            "term": rat(&row.term),
            "sign": row.sign,
            "reduction": opt(&row.reduction),
            "bound": opt(&row.bound),
            "check": row.check.map(Check::name),
        })).collect::<Vec<_>>(),
        "head": rat(&rep.head),
        "tail": rat(&rep.tail),
        "total": rat(&rep.total),
        "budget": rat(&rep.budget),
        "truncation_tail": rat(&rep.truncation_tail),
        "expected_sign": rep.expected_sign,
        "certified_lower": rat(&rep.certified_lower),
        "rows_check": rep.rows_check.name(),
        "total_check": rep.total_check.map(Check::name),
        "status": rep.status().name(),
        "mixed": rep.mixed.as_ref().map(|mx| json!({
            "head_upper": rat(&mx.head_upper),
            "tail_lower": rat(&mx.tail_lower),
            "dominance": mx.dominance.name(),
            "asymptotic": rat(&mx.asymptotic),
        })),
    })
}

pub enum Shifts {
    One(i64),
    /// Values outside every window are dropped.
    Range(Vec<i64>),
}

fn audit(ctx: &Context, family: SignPair, shifts: Shifts, depth: Option<u32>) -> Result<Report> {
    let cspec = cocycle(ctx)?;
    let ms = match shifts {
        Shifts::One(m) => vec![m],
        Shifts::Range(all) => {
            let kind = WindowKind::of(family);
            let ms: Vec<i64> = all.into_iter().filter(|&m| window(cspec.profile(), kind, m).is_ok()).collect();
            if ms.is_empty() {
                return Err(CliError::Usage("no m in the range falls inside a window of this profile".into()));
            }
            ms
        }
    };
    let depth = depth.unwrap_or(cspec.truncation());
    let path = sample_point(cspec.profile(), family, &SamplePolicy::Center, depth)?;
    let auditor = Auditor::new(&cspec, family, &path)?;
    // collect() keeps the order of ms whatever the scheduling
    let reports: Vec<DivergenceReport> = ms
        .par_iter()
        .map(|&m| auditor.audit(m))
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| match e {
            besicovitch_core::Error::InsufficientDepth { required, .. } => CliError::Usage(format!(
                "{e}; this m needs {required} levels in the sum and the sample (raise --n or --trunc/--depth)"
            )),
            e => e.into(),
        })?;
    let mut r = Report::new(vec!["m", "n_of_m", "l", "term", "sign", "bound", "pass"]);
    for rep in &reports {
        r.ok &= rep.status() == Check::Pass;
        for row in &rep.rows {
            r.push(vec![
                rep.m().to_string(),
                rep.n_of_m().to_string(),
                row.l.to_string(),
                rat(&row.term),
                row.sign.to_string(),
                row.bound.as_ref().map(rat).unwrap_or_default(),
                row.check.map(|c| c.name().to_string()).unwrap_or_default(),
            ]);
        }
    }
    r.json = Value::Array(reports.iter().map(report_json).collect());
    Ok(r)
}

fn dimension(ctx: &Context, family: SignPair, measured: bool, grid: Option<u64>, grid_min: u64) -> Result<Report> {
    let c = &ctx.config;
    let p = profile(ctx, c.n_max)?;
    if let Some(g) = grid {
        let bc = box_count(&p, family, p.n_max(), g, grid_min, c.enumeration_cap)?;
        let mut r = Report::new(vec!["g", "occupied"]);
        for (g, count) in &bc.ladder {
            r.push(vec![g.to_string(), count.to_string()]);
        }
        r.json = json!({
            "family": family.code(),
            "n": bc.n,
            "ladder": bc.ladder.iter().map(|(g, k)| json!({ "g": g, "occupied": k })).collect::<Vec<_>>(),
            "slope": bc.slope,
        });
        return Ok(r);
    }
    let mode = if measured { CountMode::Measured { cap: c.enumeration_cap } } else { CountMode::Formula };
    let stats = nesting_stats(&p, family, mode)?;
    let bounds = falconer_bounds(&p, &stats, c.precision_bits)?;
    let mut r = Report::new(vec![
        "n", "delta", "epsilon", "m", "mbar", "lower", "upper", "closed_lower", "closed_upper",
    ]);
    let mut rows = Vec::new();
    for row in &bounds.rows {
        let lv = stats.level(row.n).expect("stats cover every bound row");
        let m = lv.m().expect("m_n exists for n >= 2");
        let mbar = lv.mbar().expect("mbar_n exists for n >= 2");
        r.ok &= row.ordered();
        r.push(vec![
            row.n.to_string(),
            rat(&lv.delta),
            rat(&lv.epsilon),
            rat(&m),
            rat(&mbar),
            row.lower.as_ref().map(enclosure).unwrap_or_default(),
            enclosure(&row.upper),
            enclosure(&row.closed_lower),
            enclosure(&row.closed_upper),
        ]);
        rows.push(json!({
            "n": row.n,
            "delta": rat(&lv.delta),
            "epsilon": rat(&lv.epsilon),
            "m": rat(&m),
            "mbar": rat(&mbar),
            "measured": lv.m_measured.is_some(),
            "lower": row.lower.as_ref().map(enclosure_json),
            "upper": enclosure_json(&row.upper),
            "closed_lower": enclosure_json(&row.closed_lower),
            "closed_upper": enclosure_json(&row.closed_upper),
            "ordered": row.ordered(),
        }));
    }
    r.json = json!({ "family": family.code(), "bits": bounds.bits, "rows": rows });
    Ok(r)
}

/// Decimal digits carried by `bits` fractional bits.
fn digits_for(bits: u32) -> usize {
    (bits as f64 * std::f64::consts::LOG10_2).floor() as usize
}

fn orbit(ctx: &Context, x0: &BigRational, t0: &BigRational, horizon: u64, stride: u64) -> Result<Report> {
    if stride == 0 {
        return Err(CliError::Usage("--stride must be positive".into()));
    }
    let cspec = cocycle(ctx)?;
    let engine = OrbitEngine::new(&cspec, ctx.config.precision_bits)?;
    let digits = digits_for(engine.bits());
    let mut r = Report::new(vec!["step", "x", "t"]);
    let mut states = Vec::new();
    for s in engine.walk(x0, t0, horizon)? {
        if s.step % stride != 0 && s.step != horizon {
            continue;
        }
        let (x, t) = (fixed_to_decimal(&engine, &s.x, digits), fixed_to_decimal(&engine, &s.t, digits));
        states.push(json!({ "step": s.step, "x": x, "t": t }));
        r.push(vec![s.step.to_string(), x, t]);
    }
    r.json = json!({
        "bits": engine.bits(),
        "x0": rat(x0),
        "t0": rat(t0),
        "steps": horizon,
        "error_bound": rat(&engine.error_bound(horizon)),
        "position_error": rat(&engine.position_error(horizon)),
        "truncation_tail": engine.truncation_tail(horizon).as_ref().map(rat),
        "states": states,
    });
    Ok(r)
}

pub struct ProbeArgs {
    pub x: BigRational,
    pub horizon: u64,
    pub eps: Option<BigRational>,
    pub delta: Option<BigRational>,
    pub samples: usize,
    pub grid: usize,
    pub height: f64,
}

fn probe_result(res: &ProbeResult) -> Report {
    let w = res.witness.as_ref();
    let mut r = Report::new(vec![
        "kind", "outcome", "eps", "delta", "horizon", "samples", "seed", "witness_y", "witness_k",
        "witness_distance", "reverified", "error_bound",
    ]);
    let kind = format!("{:?}", res.kind).to_lowercase();
    r.push(vec![
        kind.clone(),
        res.outcome.name().into(),
        res.eps.as_ref().map(rat).unwrap_or_default(),
        res.delta.as_ref().map(rat).unwrap_or_default(),
        res.horizon.to_string(),
        res.samples.to_string(),
        res.seed.map(|s| s.to_string()).unwrap_or_default(),
        w.map(|w| rat(&w.y)).unwrap_or_default(),
        w.map(|w| w.k.to_string()).unwrap_or_default(),
        w.map(|w| rat(&w.distance)).unwrap_or_default(),
        w.map(|w| w.reverified.to_string()).unwrap_or_default(),
        rat(&res.error_bound),
    ]);
    r.json = json!({
        "kind": kind,
        "outcome": res.outcome.name(),
        "eps": res.eps.as_ref().map(rat),
        "delta": res.delta.as_ref().map(rat),
        "horizon": res.horizon,
        "samples": res.samples,
        "seed": res.seed,
        "witness": w.map(|w| json!({
            "y": rat(&w.y),
            "k": w.k,
            "distance": rat(&w.distance),
            "candidate": w.candidate,
            "reverified": w.reverified,
        })),
        "error_bound": rat(&res.error_bound),
    });
    r
}

fn probe(ctx: &Context, cspec: &CocycleSpec, kind: ProbeCommand, a: &ProbeArgs) -> Result<Report> {
    let bits = ctx.config.precision_bits;
    match kind {
        ProbeCommand::Sensitivity => {
            let delta = a.delta.clone().unwrap_or_else(|| rat::ratio(1, 1000));
            let eps = a.eps.clone().unwrap_or_else(|| rat::int(1));
            let res = sensitivity_probe(cspec, &a.x, &delta, &eps, a.horizon, a.samples, ctx.config.seed, bits)?;
            Ok(probe_result(&res))
        }
        ProbeCommand::Nonrecurrence => {
            let eps = a.eps.clone().unwrap_or_else(|| rat::ratio(1, 10));
            let res = nonrecurrence_test(cspec, &a.x, &BigRational::zero(), &eps, a.horizon, bits)?;
            let mut r = probe_result(&res);
            r.ok = res.outcome != besicovitch_core::dynamics::Outcome::Fail;
            Ok(r)
        }
        ProbeCommand::Classify => {
            let class = classify_orbit(cspec, &a.x, a.horizon, Thresholds::default(), bits)?;
            let mut r = Report::new(vec!["x", "horizon", "class"]);
            r.push(vec![rat(&a.x), a.horizon.to_string(), class.name().into()]);
            r.json = json!({ "x": rat(&a.x), "horizon": a.horizon, "class": class.name() });
            Ok(r)
        }
        ProbeCommand::Coverage => {
            let engine = OrbitEngine::new(cspec, bits)?;
            let pts = engine.walk(&a.x, &BigRational::zero(), a.horizon)?.map(|s| (s.x_f64(&engine), s.t_f64(&engine)));
            let frac = coverage(pts, a.height, a.grid);
            let mut r = Report::new(vec!["x", "horizon", "height", "grid", "coverage"]);
            r.push(vec![
                rat(&a.x),
                a.horizon.to_string(),
                a.height.to_string(),
                a.grid.to_string(),
                format!("{frac:.6}"),
            ]);
            r.json = json!({ "x": rat(&a.x), "horizon": a.horizon, "height": a.height, "grid": a.grid, "coverage": frac });
            Ok(r)
        }
    }
}
