//! The five pipelines behind the subcommands. Each returns the files to write and a verdict.

use std::fmt::Write as _;

use ncindex_core::algebra::{crossed_product, group_algebra, Algebra, GSetSpec, GroupSpec, Haar};
use ncindex_core::assembly::{assembly_index_pushed, chirality_indices, cutoff_matrix, index_class, AlmostInvertiblePair};
use ncindex_core::chern::{
    canonical_idempotent, crossed_split, cutoff_function, finite_idempotent_letters, finite_split, gamma_chern, idempotent_lift, noncommutative_chern, psi_big,
    CrossedAlgebra, MixedForm,
};
use ncindex_core::forms::{FormChain, Word};
use ncindex_core::identities::identity_suite;
use ncindex_core::jlo::{Jlo, CHAIN_SIGN_EVEN, CHAIN_SIGN_ODD, INSERTION, TRANSGRESSION_SIGNS_EVEN, TRANSGRESSION_SIGNS_ODD};
use ncindex_core::localization::{compare_sides, localized_limit, CircleRotation, LocalizationBase, LocalizationReport, ReportEntry};
use ncindex_core::manifold::{AffineMap, FiniteModel, ManifoldModel, TorusModel};
use ncindex_core::scalar::{q_to_f64, Scalar, C64, Q, QI};
use ncindex_core::spectral::{
    circle_model, equivariant_trace, index_model, mckean_singer, random_finite_model, rank_index, torus2_dirac, CMat, FunctionRep, Parity, SpectralModel,
};
use ncindex_core::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::scenario::Scenario;

pub struct Outcome {
    pub pass: bool,
    pub files: Vec<(String, String)>,
    pub summary: String,
}

pub struct Ctx<'a> {
    pub scenario: Option<&'a Scenario>,
    pub seed: u64,
    pub pool: &'a rayon::ThreadPool,
}

#[derive(Serialize)]
struct Conventions {
    chain_sign_even: f64,
    chain_sign_odd: f64,
    transgression_signs_even: (f64, f64),
    transgression_signs_odd: (f64, f64),
    odd_trace_factor: &'static str,
    insertion: String,
}

fn conventions() -> Conventions {
    Conventions {
        chain_sign_even: CHAIN_SIGN_EVEN,
        chain_sign_odd: CHAIN_SIGN_ODD,
        transgression_signs_even: TRANSGRESSION_SIGNS_EVEN,
        transgression_signs_odd: TRANSGRESSION_SIGNS_ODD,
        odd_trace_factor: "sqrt(2i)",
        insertion: format!("{INSERTION:?}"),
    }
}

fn envelope(command: &str, ctx: &Ctx, pass: bool, report: Value) -> String {
    let v = json!({
        "command": command,
        "scenario": ctx.scenario.map(|s| s.id.clone()),
        "scenario_hash": ctx.scenario.map(|s| s.hash.clone()),
        "seed": ctx.seed,
        "conventions": conventions(),
        "pass": pass,
        "report": report,
    });
    serde_json::to_string_pretty(&v).expect("report serializes") + "\n"
}

fn scenario<'a>(ctx: &Ctx<'a>) -> Result<&'a Scenario> {
    ctx.scenario.ok_or_else(|| Error::Precondition("this command needs --scenario".into()))
}

pub fn cmd_identities(ctx: &Ctx, count: Option<usize>) -> Result<Outcome> {
    let count = match (count, ctx.scenario) {
        (Some(n), _) => n,
        (None, Some(s)) => s.number("count", 50)?,
        (None, None) => 50,
    };
    let r = identity_suite(ctx.seed, count);
    let failures: usize = r.tallies.iter().map(|t| t.failures).sum();
    let summary = format!("identities: {} algebras, {} identity runs, {failures} failures", r.algebras, r.tallies.iter().map(|t| t.runs).sum::<usize>());
    let pass = r.pass;
    let body = serde_json::to_value(&r).expect("suite serializes");
    Ok(Outcome { pass, files: vec![("identities.json".into(), envelope("identities", ctx, pass, body))], summary })
}

// ---- base spaces

enum Base {
    Finite(FiniteModel),
    Torus(TorusModel),
    Circle(CircleRotation),
}

fn build_base(s: &Scenario) -> Result<Base> {
    let group = s.group()?;
    let haar = s.haar()?;
    match s.get("base").unwrap_or("finite") {
        "finite" => {
            let gset = s.gset(&group)?;
            Ok(Base::Finite(FiniteModel { group, gset, haar }))
        }
        "torus" => {
            let d: usize = s.number("torus_dim", 2)?;
            let maps = match s.get("torus_action").unwrap_or("negation") {
                // odd elements act by x -> -x, even ones trivially
                "negation" => (0..group.order()).map(|g| if g % 2 == 0 { AffineMap::identity(d) } else { AffineMap::negation(d) }).collect(),
                "trivial" => vec![AffineMap::identity(d); group.order()],
                a => return Err(Error::InvalidAction(format!("unknown torus action {a:?}"))),
            };
            Ok(Base::Torus(TorusModel::new(d, group, maps, haar)?))
        }
        "circle" => {
            let step: i64 = s.number("circle_step", 1)?;
            Ok(Base::Circle(CircleRotation::new(group.order(), step, haar)))
        }
        b => Err(Error::Precondition(format!("unknown base {b:?}"))),
    }
}

/// c(g x)² summed to one under the Haar weights on a single point.
fn constant_cutoff_square(group: &GroupSpec, haar: Haar) -> Result<Q> {
    let gset = GSetSpec::trivial(group, 1);
    Ok(cutoff_function(group, &gset, haar)?.pair(0, 0))
}

/// e = Σ_g c² δ_g ⊗ 1 on a connected base.
fn constant_idempotent<M: ManifoldModel>(m: &M) -> Result<Vec<((u32, M::Mono), QI)>> {
    let one = m.one();
    let [(mono, unit)] = one.as_slice() else { return Err(Error::Precondition("base has no single constant monomial".into())) };
    let c2 = QI::from_q(&constant_cutoff_square(m.group(), m.haar())?);
    Ok((0..m.group().order() as u32).map(|g| ((g, mono.clone()), c2.clone() * unit.clone())).collect())
}

struct Truncation {
    k_max: usize,
    n_max: usize,
    max_degree: usize,
}

impl Truncation {
    fn from(s: &Scenario, base_dim: usize) -> Result<Self> {
        let n_max: usize = s.number("n_max", 0)?;
        let k_max: usize = s.number("k_max", n_max)?;
        let max_degree: usize = s.number("max_degree", base_dim + 2 * n_max)?;
        if k_max < n_max || max_degree < 2 * n_max {
            return Err(Error::Truncation(format!(
                "ch_n for n <= {n_max} needs k_max >= {n_max} and max_degree >= {}; got k_max = {k_max}, max_degree = {max_degree}",
                2 * n_max
            )));
        }
        Ok(Truncation { k_max, n_max, max_degree })
    }
}

fn base_chern<M: ManifoldModel, A: Algebra<Scalar = QI>>(
    m: &M,
    split: &dyn Fn(&A::Letter) -> (u32, Vec<(M::Mono, QI)>),
    alg: &A,
    e: &[(A::Letter, QI)],
    tr: &Truncation,
    oracle: bool,
) -> Result<(MixedForm<M>, Option<bool>)> {
    let lift = idempotent_lift(alg, e, tr.k_max)?;
    let ch = noncommutative_chern(m, split, &lift, tr.n_max, tr.max_degree)?;
    let brute = if oracle {
        // Ψ adds the inner degrees of TA letters to the outer degree, so in the n >= 1 terms
        // letters of ê above max_degree - 2 only produce discarded forms.
        let ta = ncindex_core::ta::TruncatedTensorAlgebra::new(alg, 2 * tr.k_max);
        let b = group_algebra(m.group(), m.haar());
        let short = lift.below((tr.max_degree + 1).saturating_sub(2));
        let full = psi_big(m, split, &b, &gamma_chern(&ta, &lift, 0, 0), tr.max_degree)?;
        let higher = psi_big(m, split, &b, &gamma_chern(&ta, &short, tr.n_max, 2 * tr.n_max), tr.max_degree)?;
        let low = psi_big(m, split, &b, &gamma_chern(&ta, &short, 0, 0), tr.max_degree)?;
        Some(full.plus(&higher).minus(&low) == ch)
    } else {
        None
    };
    Ok((ch, brute))
}

/// Runs `$body` with `$m` the base model and `($ch, $brute)` its Chern character.
macro_rules! with_base_chern {
    ($s:expr, $oracle:expr, |$m:ident, $tr:ident, $ch:ident, $brute:ident| $body:expr) => {{
        match build_base($s)? {
            Base::Finite(model) => {
                let $m = &model;
                let $tr = Truncation::from($s, 0)?;
                let cut = cutoff_function(&model.group, &model.gset, model.haar)?;
                let e = finite_idempotent_letters(&model, &cut)?;
                let alg = crossed_product(&model.group, &model.gset, model.haar)?.map_scalars(|q| QI::from_q(q));
                let split = finite_split(&model);
                let ($ch, $brute) = base_chern($m, &split, &alg, &e, &$tr, $oracle)?;
                $body
            }
            Base::Torus(model) => {
                let $m = &model;
                let $tr = Truncation::from($s, model.dimension())?;
                let alg = CrossedAlgebra::new(&model);
                let e = constant_idempotent(&model)?;
                let ($ch, $brute) = base_chern($m, &crossed_split, &alg, &e, &$tr, $oracle)?;
                $body
            }
            Base::Circle(model) => {
                let $m = &model;
                let $tr = Truncation::from($s, model.dimension())?;
                let alg = CrossedAlgebra::new(&model);
                let e = constant_idempotent(&model)?;
                let ($ch, $brute) = base_chern($m, &crossed_split, &alg, &e, &$tr, $oracle)?;
                $body
            }
        }
    }};
}

/// ch_0 restricted to group letters equals the constant function 1 at every g.
fn ch0_is_unit<M: ManifoldModel>(m: &M, ch: &MixedForm<M>) -> bool {
    let ch0 = ch.component(0);
    let mut one = m.one();
    one.sort_by(|a, b| a.0.cmp(&b.0));
    (0..m.group().order() as u32).all(|g| {
        let mut at = ch0.at(&Word::letter(g));
        at.sort_by(|a, b| a.0.cmp(&b.0));
        at == one
    })
}

pub fn cmd_chern(ctx: &Ctx) -> Result<Outcome> {
    let s = scenario(ctx)?;
    let oracle = s.get("chern_oracle") == Some("brute");
    let expect_unit = s.get("expect_ch0") == Some("unit");
    with_base_chern!(s, oracle, |m, tr, ch, brute| {
        let mut files = Vec::new();
        let mut rows = Vec::new();
        // one table per B-degree; ch_n sits in degree 2n
        for k in 0..=tr.max_degree {
            let comp = ch.component(k);
            files.push((format!("ch_deg{k}.csv"), comp.to_csv(m)));
            rows.push(json!({ "degree": k, "terms": comp.len() }));
        }
        let unit = ch0_is_unit(m, &ch);
        let pass = brute.unwrap_or(true) && (!expect_unit || unit);
        let body = json!({
            "k_max": tr.k_max,
            "n_max": tr.n_max,
            "max_degree": tr.max_degree,
            "tables": rows,
            "ch0_is_unit": unit,
            "brute_force_agrees": brute,
        });
        files.push(("chern.json".into(), envelope("chern", ctx, pass, body)));
        let summary = format!("chern: n <= {}, ch0 unit = {unit}, brute force = {brute:?}", tr.n_max);
        Ok(Outcome { pass, files, summary })
    })
}

// ---- spectral models

fn build_spectral(s: &Scenario, seed: u64) -> Result<SpectralModel> {
    let spec = s.require("spectral")?;
    let (kind, args) = spec.split_once(':').unwrap_or((spec, ""));
    let args: Vec<&str> = args.split(',').map(str::trim).filter(|a| !a.is_empty()).collect();
    let bad = || Error::Precondition(format!("bad spectral constructor {spec:?}"));
    let int = |i: usize| -> Result<i64> { args.get(i).and_then(|a| a.parse().ok()).ok_or_else(bad) };
    let group = s.group()?;
    let haar = s.haar()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = match kind {
        "index" => {
            if group.order() != 1 {
                return Err(Error::Precondition("index models carry the trivial group".into()));
            }
            index_model(&mut rng, int(0)? as usize, int(1)? as usize)
        }
        "random_finite" => {
            let parity = match args.first().copied() {
                Some("even") => Parity::Even,
                Some("odd") => Parity::Odd,
                _ => return Err(bad()),
            };
            let swap = args.get(1) == Some(&"swap");
            random_finite_model(&mut rng, parity, swap, haar)
        }
        "torus2" => {
            let sigma: f64 = args.get(1).and_then(|a| a.parse().ok()).ok_or_else(bad)?;
            if sigma.abs() != 1.0 {
                return Err(Error::Precondition("spin lift sign must be 1 or -1".into()));
            }
            torus2_dirac(int(0)?, true, sigma)
        }
        "circle" => circle_model(int(0)?, group.order(), s.number("circle_step", 1)?, s.number("circle_twist", 0.0)?),
        _ => return Err(bad()),
    };
    if m.group.order() != group.order() {
        return Err(Error::Precondition(format!("spectral model carries a group of order {}, scenario has {}", m.group.order(), group.order())));
    }
    Ok(m)
}

fn spectral_gset(m: &SpectralModel) -> Result<GSetSpec> {
    Ok(m.infer_gset()?.unwrap_or_else(|| GSetSpec::trivial(&m.group, 1)))
}

/// ê for the cut-off idempotent of the spectral model's algebra.
fn spectral_lift(m: &SpectralModel, jlo: &Jlo, k_max: usize) -> Result<FormChain<u32, Q>> {
    let gset = spectral_gset(m)?;
    let cut = cutoff_function(&m.group, &gset, m.haar)?;
    let (_, e) = canonical_idempotent(&m.group, &gset, m.haar, &cut)?;
    let letters: Vec<(u32, Q)> = e.coeffs.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(i, v)| (i as u32, v.clone())).collect();
    idempotent_lift(&jlo.ma.algebra, &letters, k_max)
}

fn conjugacy_classes(g: &GroupSpec) -> Vec<Vec<usize>> {
    let mut seen = vec![false; g.order()];
    let mut out = Vec::new();
    for x in 0..g.order() {
        if seen[x] {
            continue;
        }
        let mut class: Vec<usize> = (0..g.order()).map(|h| g.mul(g.mul(h, x), g.inv(h))).collect();
        class.sort_unstable();
        class.dedup();
        for &y in &class {
            seen[y] = true;
        }
        out.push(class);
    }
    out
}

fn cz(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn cmd_jlo(ctx: &Ctx) -> Result<Outcome> {
    let s = scenario(ctx)?;
    let m = build_spectral(s, ctx.seed)?;
    let n_max: usize = s.number("n_max", 0)?;
    let k_max: usize = s.number("k_max", n_max)?;
    if k_max < n_max {
        return Err(Error::Truncation(format!("ch_n for n <= {n_max} needs k_max >= {n_max}, got {k_max}")));
    }
    let times = s.times()?;
    let tol = s.tolerance("tol_drift", 1e-8)?;
    let jlo = Jlo::new(&m, 2 * k_max.max(n_max))?;
    let lift = spectral_lift(&m, &jlo, k_max)?;
    let cycles: Vec<_> = ctx.pool.install(|| times.par_iter().map(|&t| jlo.chern_cycle(t, &lift, n_max)).collect::<Result<Vec<_>>>())?;

    let mut csv = String::from("t,part,tuple,re,im\n");
    for (t, x) in times.iter().zip(&cycles) {
        for (part, chain) in [("even", &x.even), ("odd", &x.odd)] {
            for (w, z) in chain.sorted_terms() {
                let tuple: Vec<String> = w.head.iter().chain(w.tail.iter()).map(|g| g.to_string()).collect();
                let head = if w.head.is_none() { "1 " } else { "" };
                let _ = writeln!(csv, "{t},{part},({head}{}),{:e},{:e}", tuple.join(" "), z.re, z.im);
            }
        }
    }

    // degree-zero group coefficients summed over conjugacy classes are t-independent
    let even = m.parity == Parity::Even;
    let mut classes = Vec::new();
    let mut drift_max: f64 = 0.0;
    for class in conjugacy_classes(&m.group) {
        let vals: Vec<C64> = cycles
            .iter()
            .map(|x| class.iter().map(|&g| if even { x.even.coeff(&Word::letter(g as u32)) } else { C64::new(0.0, 0.0) }).sum())
            .collect();
        let drift = vals.iter().flat_map(|a| vals.iter().map(move |b| (a - b).norm())).fold(0.0, f64::max);
        drift_max = drift_max.max(drift);
        classes.push(json!({ "class": class, "values": vals.iter().map(|z| cz(*z)).collect::<Vec<_>>(), "drift": drift }));
    }
    let ms = if even { Some(mckean_singer(&m, &times, tol)?) } else { None };
    let pass = !even || (drift_max <= tol && ms.as_ref().is_some_and(|r| r.pass));
    let body = json!({
        "model": m.label,
        "parity": m.parity,
        "times": times,
        "n_max": n_max,
        "k_max": k_max,
        "classes": classes,
        "max_drift": drift_max,
        "tolerance": tol,
        "mckean_singer": ms,
    });
    let summary = format!("jlo: {} on {} times, max class drift {drift_max:.3e}", m.label, times.len());
    Ok(Outcome { pass, files: vec![("jlo.csv".into(), csv), ("jlo.json".into(), envelope("jlo", ctx, pass, body))], summary })
}

fn cutoff_squares(m: &SpectralModel) -> Result<Vec<f64>> {
    let gset = spectral_gset(m)?;
    let cut = cutoff_function(&m.group, &gset, m.haar)?;
    let points = match &m.functions {
        FunctionRep::Points { points, .. } => *points,
        FunctionRep::ConstantsOnly => 1,
    };
    Ok((0..points).map(|x| q_to_f64(&cut.pair(x, x))).collect())
}

pub fn cmd_index(ctx: &Ctx) -> Result<Outcome> {
    let s = scenario(ctx)?;
    let m = build_spectral(s, ctx.seed)?;
    if m.parity != Parity::Even {
        return Err(Error::Precondition("index needs an even spectral model".into()));
    }
    let tol = s.tolerance("tol_index", 1e-8)?;
    let times = s.times()?;
    let (plus, minus) = chirality_indices(&m)?;
    let q = CMat::from_fn(minus.len(), plus.len(), |i, j| m.dirac[(minus[i], plus[j])]);
    let pair = AlmostInvertiblePair::with_pseudo_inverse(q)?;
    let class = index_class(&pair)?;
    let n = pair.dims().0 + pair.dims().1;
    let t2 = (&class.lift * &class.lift - CMat::identity(n, n)).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let cm = cutoff_matrix(&m, &cutoff_squares(&m)?)?;
    let pushed = assembly_index_pushed(&pair, &m, &cm)?;
    let rank = rank_index(&m)?;
    let traces: Vec<Vec<C64>> =
        ctx.pool.install(|| (0..m.group.order()).into_par_iter().map(|g| times.iter().map(|&t| equivariant_trace(&m, g, t)).collect()).collect());
    let mut gap: f64 = (pushed[0] - C64::new(rank as f64, 0.0)).norm();
    let mut rows = Vec::new();
    for (g, (p, tr)) in pushed.iter().zip(&traces).enumerate() {
        for z in tr {
            gap = gap.max((p - z).norm());
        }
        rows.push(json!({ "g": g, "pushed": cz(*p), "heat_supertrace": tr.iter().map(|z| cz(*z)).collect::<Vec<_>>() }));
    }
    let pass = gap <= tol && t2 <= 1e-10;
    let body = json!({
        "model": m.label,
        "times": times,
        "rank_index": rank,
        "trace_index": class.trace,
        "lift_square_residual": t2,
        "elements": rows,
        "max_gap": gap,
        "tolerance": tol,
    });
    let summary = format!("index: {} rank index {rank}, max gap {gap:.3e}", m.label);
    Ok(Outcome { pass, files: vec![("index.json".into(), envelope("index", ctx, pass, body))], summary })
}

/// Odd models pair the idempotent trivially; their spectral side is Tr(r(g) e^{-t²D²}).
#[allow(clippy::too_many_arguments)]
fn trace_sides<M: LocalizationBase>(
    id: &str,
    m: &SpectralModel,
    base: &M,
    data: &[ncindex_core::localization::FixedPointDatum],
    ch: &MixedForm<M>,
    tuples: &[Word<u32>],
    times: &[f64],
    tol: f64,
) -> Result<LocalizationReport> {
    let tmin = times.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut entries = Vec::new();
    for w in tuples {
        let g = w.head.ok_or_else(|| Error::Precondition("tuples start with a group element".into()))?;
        let fp = localized_limit(base, data, ch, w)?;
        let vals: Vec<C64> = times.iter().map(|&t| equivariant_trace(m, g as usize, t)).collect();
        let at_min = equivariant_trace(m, g as usize, tmin);
        let drift = vals.iter().flat_map(|a| vals.iter().map(move |b| (a - b).norm())).fold(0.0, f64::max);
        entries.push(ReportEntry {
            tuple: vec![g],
            degree: 0,
            spectral: vals.iter().map(|z| (z.re, z.im)).collect(),
            fixed_point: (fp.re, fp.im),
            drift,
            gap_min_t: (at_min - fp).norm(),
            gap_extrapolated: (at_min - fp).norm(),
        });
    }
    let pass = entries.iter().all(|e| e.gap_min_t <= tol);
    Ok(LocalizationReport { scenario: id.to_string(), times: times.to_vec(), entries, tolerance: tol, pass })
}

pub fn cmd_localize(ctx: &Ctx) -> Result<Outcome> {
    let s = scenario(ctx)?;
    let m = build_spectral(s, ctx.seed)?;
    let tol = s.tolerance("tol", 1e-8)?;
    let drift_tol = match s.get("tol_drift") {
        Some(_) => Some(s.tolerance("tol_drift", 1e-8)?),
        None => None,
    };
    let times = s.times()?;
    let data = s.fixed_data()?;
    let tuples: Vec<Word<u32>> = s.tuples(m.group.order())?.into_iter().map(Word::letter).collect();
    let report = with_base_chern!(s, false, |base, tr, ch, _brute| {
        if base.group() != &m.group {
            return Err(Error::Precondition("base and spectral model carry different groups".into()));
        }
        match m.parity {
            Parity::Even => {
                let jlo = Jlo::new(&m, 2 * tr.n_max)?;
                let lift = spectral_lift(&m, &jlo, tr.n_max)?;
                compare_sides(&s.id, &jlo, &lift, tr.n_max, base, &data, &ch, &tuples, &times, tol)?
            }
            Parity::Odd => trace_sides(&s.id, &m, base, &data, &ch, &tuples, &times, tol)?,
        }
    });
    let drift_ok = drift_tol.is_none_or(|d| report.entries.iter().all(|e| e.drift <= d));
    let pass = report.pass && drift_ok;
    let worst = report.entries.iter().map(|e| e.gap_min_t).fold(0.0, f64::max);
    let body = json!({
        "spectral_side": if m.parity == Parity::Even { "chern_cycle" } else { "equivariant_trace" },
        "drift_tolerance": drift_tol,
        "localization": serde_json::to_value(&report).expect("report serializes"),
    });
    let summary = format!("localize: {} tuples, max gap {worst:.3e}, tolerance {tol:e}", report.entries.len());
    Ok(Outcome { pass, files: vec![("localize.json".into(), envelope("localize", ctx, pass, body))], summary })
}
