//! Multivalued families: cosets `x + span`, shift extensions and support-restricted
//! grid cosets.

use std::collections::BTreeSet;

use ddchaos::chaos::{
    classify_unbounded, clause_sets, eval_condition, orbit_trace, pair_trace, strict_weak_verdict,
    ClassifyParams, ConditionSpec, DensityRule, Regime, Schedule, SelectionMode, TraceMatrix,
    TraceMetric, DEFAULT_CAP,
};
use ddchaos::indexset::full_density_partition;
use ddchaos::mlo::{extension_power_coset, select_exceeding, AffineCoset, MloFamily, Subspace};
use ddchaos::{Error, GridFunction, IndexDomain, Point, Result, SeminormSpace, SeqVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::gallery::{block_rule, separated_points, TRACE_HORIZON};
use super::{Outcome, Params, Scenario, TraceExport};

fn seq(pairs: &[(i64, f64)]) -> Point {
    Point::Seq(
        SeqVector::from_pairs(IndexDomain::Natural, pairs.iter().copied())
            .expect("natural indices"),
    )
}

fn dual_traces(
    fam: &MloFamily,
    points: &[Point],
    horizon: u64,
    checkpoints: &[u64],
) -> Result<Vec<TraceMatrix>> {
    let space = SeminormSpace::lp(2.0);
    let mut out = Vec::new();
    for a in 0..points.len() {
        for b in a + 1..points.len() {
            out.push(pair_trace(
                fam,
                &space,
                TraceMetric::Norm,
                &points[a],
                &points[b],
                horizon,
                checkpoints,
                SelectionMode::MloDual,
                DEFAULT_CAP,
            )?);
        }
    }
    Ok(out)
}

fn export(t: TraceMatrix, p: &Params, rule: DensityRule) -> TraceExport {
    TraceExport {
        trace: t,
        sigma: p.sigma,
        eps: p.eps_min(),
        rule,
    }
}

/// `x ↦ x + 𝕂³` for both members: every value is the whole space.
fn totan_family() -> MloFamily {
    MloFamily::IdentityPlusSpan {
        count: 2,
        span: (1..=3).collect(),
    }
}

fn totan_points() -> Vec<Point> {
    vec![seq(&[]), seq(&[(1, 1.0)]), seq(&[(1, 1.0), (2, 1.0)])]
}

fn totan_rule(p: &Params) -> (u64, DensityRule) {
    let k = p.horizon_or(TRACE_HORIZON);
    (k, block_rule(k, p.delta))
}

fn run_totan(p: &Params) -> Result<Outcome> {
    let (k, rule) = totan_rule(p);
    let DensityRule::Checkpoints { checkpoints, .. } = &rule else {
        unreachable!()
    };
    let a = full_density_partition(2, 2, k)?[0].to_piece_set();
    let schedules = vec![("max_on_A".to_string(), a)];
    let spec = ConditionSpec::new(1)?;
    let mut reports = Vec::new();
    for t in dual_traces(&totan_family(), &totan_points(), k, checkpoints)? {
        for &eps in &p.eps {
            reports.push(strict_weak_verdict(
                &t, spec, p.sigma, eps, &rule, &schedules,
            )?);
        }
    }
    let mut out = Outcome::default();
    out.claim(
        "condition 1 holds with one selection per pair (far on A, equal on B)",
        true,
        reports.iter().all(|r| r.regime == Regime::Strict),
        "example totan",
    );
    out.claim(
        "weak condition 1 holds",
        true,
        reports.iter().all(|r| r.weak),
        "strict implies weak",
    );
    out.detail("horizon", k);
    out.detail("regimes", &reports);
    Ok(out)
}

fn totan_trace(p: &Params) -> Result<TraceExport> {
    let (k, rule) = totan_rule(p);
    let DensityRule::Checkpoints { checkpoints, .. } = &rule else {
        unreachable!()
    };
    let pts = totan_points();
    let t = dual_traces(&totan_family(), &pts[..2], k, checkpoints)?.remove(0);
    Ok(export(t, p, rule))
}

/// `I + span{e_1}` on 𝕂³ with the scrambled set inside the span.
fn span_family() -> MloFamily {
    MloFamily::IdentityPlusSpan {
        count: 2,
        span: BTreeSet::from([1]),
    }
}

fn run_identity_plus_span(p: &Params) -> Result<Outcome> {
    let k = p.horizon_or(1000);
    let rule = DensityRule::checkpoints(vec![k], p.delta);
    let spec = ConditionSpec::new(1)?;
    let mut reports = Vec::new();
    for t in dual_traces(&span_family(), &separated_points(), k, &[k])? {
        for &eps in &p.eps {
            reports.push(strict_weak_verdict(&t, spec, p.sigma, eps, &rule, &[])?);
        }
    }
    let mut out = Outcome::default();
    out.claim(
        "weak condition 1 holds with S inside W",
        true,
        reports.iter().all(|r| r.weak),
        "I + W, weak but not strict",
    );
    out.claim(
        "condition 1 holds with one selection",
        false,
        reports.iter().any(|r| r.strict_witness.is_some()),
        "I + W, weak but not strict",
    );
    out.claim(
        "regime is weak only",
        true,
        reports.iter().all(|r| r.regime == Regime::WeakOnly),
        "I + W",
    );
    out.detail("horizon", k);
    out.detail("regimes", &reports);
    Ok(out)
}

fn span_trace(p: &Params) -> Result<TraceExport> {
    let k = p.horizon_or(1000);
    let t = dual_traces(&span_family(), &separated_points()[..2], k, &[k])?.remove(0);
    Ok(export(t, p, DensityRule::checkpoints(vec![k], p.delta)))
}

fn qwer_family() -> MloFamily {
    MloFamily::ShiftExtension { orders: vec![1, 2] }
}

/// Random elements of a span coset.
fn sample_coset(c: &AffineCoset, rng: &mut ChaCha8Rng) -> Result<SeqVector> {
    let (Point::Seq(base), Subspace::Span(span)) = (&c.base, &c.subspace) else {
        return Err(Error::InvalidInput("expected a sequence coset".into()));
    };
    let scale = 10f64.powf(rng.gen_range(-2.0..2.0));
    let mut z = base.clone();
    for &i in span {
        if rng.gen_bool(0.5) {
            z.set(i, z.get(i) + scale * rng.gen_range(-1.0..1.0))?;
        }
    }
    Ok(z)
}

fn run_qwer(p: &Params) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let l2 = SeminormSpace::lp(2.0);
    let mut bound_ok = true;
    let mut checked = 0u64;
    for _ in 0..10 {
        let len = rng.gen_range(1..=8);
        let x = SeqVector::from_pairs(
            IndexDomain::Natural,
            (1..=len).map(|n| (n, rng.gen_range(-3.0..3.0))),
        )?;
        for j in [1u64, 2] {
            for k in 1..=20 {
                let c = extension_power_coset(j, j, k, &x)?;
                for _ in 0..20 {
                    let z = sample_coset(&c, &mut rng)?;
                    bound_ok &= l2.seminorm(1, &z)? >= x.max_abs();
                    checked += 1;
                }
            }
        }
    }
    let k = p.horizon_or(400);
    let rule = DensityRule::checkpoints(vec![k], p.delta);
    let traces = dual_traces(&qwer_family(), &separated_points(), k, &[k])?;
    let mut out = Outcome::default();
    out.claim(
        "every sampled z in (A^j + W_j)^k x has norm at least max |x_n|, k <= 20",
        true,
        bound_ok,
        "example qwer",
    );
    for spec in ConditionSpec::all() {
        let mut holds = true;
        for t in &traces {
            for &eps in &p.eps {
                holds &= eval_condition(spec, &clause_sets(t, p.sigma, eps)?, &rule)?.holds;
            }
        }
        out.claim(
            format!("weak condition {} holds", spec.index),
            false,
            holds,
            "example qwer: no weak chaos for the extension",
        );
    }
    let min_gap = traces
        .iter()
        .flat_map(|t| t.values.iter().flatten())
        .copied()
        .fold(f64::INFINITY, f64::min);
    out.detail("sampled_elements", checked);
    out.detail("smallest_min_distance", min_gap);
    out.detail("horizon", k);
    out.detail("seed", p.seed);
    Ok(out)
}

fn qwer_trace(p: &Params) -> Result<TraceExport> {
    let k = p.horizon_or(400);
    let t = dual_traces(&qwer_family(), &separated_points()[..2], k, &[k])?.remove(0);
    Ok(export(t, p, DensityRule::checkpoints(vec![k], p.delta)))
}

/// Grid function supported on `[-3, 3]`.
fn gos_grid_vector() -> GridFunction {
    let mut f = GridFunction::default_grid();
    f.set_index(0, 1.0);
    f.set_index(8, 0.5);
    f.set_index(-16, 2.0);
    f
}

const GOS_M: u64 = 3;

fn gos_grid_trace(k: u64) -> Result<TraceMatrix> {
    let fam = MloFamily::SupportBeyond { count: 2 };
    orbit_trace(
        &fam,
        &SeminormSpace::grid_sup(),
        TraceMetric::Seminorm { m: GOS_M },
        &Point::Grid(gos_grid_vector()),
        k,
        &[k],
        SelectionMode::MloMax,
    )
}

fn run_gos(p: &Params) -> Result<Outcome> {
    let mut out = Outcome::default();
    let l2 = SeminormSpace::lp(2.0);
    let x = seq(&[(2, 1.0), (3, 0.5)]);
    let coset = AffineCoset::new(x.clone(), Subspace::Span(BTreeSet::from([1])))?;
    let mut banach = Vec::new();
    for t in [1.0, 1e3, 1e6, 1e9] {
        let ok = match select_exceeding(&coset, &l2, 1, t) {
            Ok(z) => l2.point_seminorm(1, &z)? > t,
            Err(Error::NotAttainable { .. }) => false,
            Err(e) => return Err(e),
        };
        banach.push((t, ok));
    }
    out.claim(
        "Banach case: a selection exceeds every threshold",
        true,
        banach.iter().all(|b| b.1),
        "example gos",
    );

    let k = p.horizon_or(200);
    let mut cp = ClassifyParams::new(DensityRule::checkpoints(vec![k], p.delta));
    cp.schedule = Schedule::LogOnePlus;
    let fam = span_family();
    let t = orbit_trace(
        &fam,
        &l2,
        TraceMetric::Norm,
        &x,
        k,
        &[k],
        SelectionMode::MloMax,
    )?;
    let banach_unb = classify_unbounded(&t, 1, &cp)?;
    out.claim(
        "Banach case: x is distributionally unbounded of type 1",
        true,
        banach_unb.holds,
        "example gos",
    );

    let grid = SeminormSpace::grid_sup();
    let f = Point::Grid(gos_grid_vector());
    let base = grid.point_seminorm(GOS_M, &f)?;
    let sfam = MloFamily::SupportBeyond { count: 2 };
    let mut blocked = true;
    let mut tried = 0u64;
    for j in 1..=2usize {
        for kk in 1..=20u64 {
            let c = sfam.value(j, kk, &f)?;
            for m in 1..=(j as u64 * kk) {
                let pm = grid.point_seminorm(m, &f)?;
                blocked &= matches!(
                    select_exceeding(&c, &grid, m, pm + 1.0),
                    Err(Error::NotAttainable { .. })
                );
                tried += 1;
            }
        }
    }
    out.claim(
        "grid case: no selection raises p_m when m <= jk",
        true,
        blocked,
        "example gos",
    );
    let unb = classify_unbounded(&gos_grid_trace(k)?, 1, &cp)?;
    out.claim(
        format!("grid case: f is distributionally {GOS_M}-unbounded of type 1"),
        false,
        unb.holds,
        "example gos",
    );
    out.detail("banach_thresholds", banach);
    out.detail("grid_base_seminorm", base);
    out.detail("grid_cases_tried", tried);
    out.detail("banach_classification", banach_unb);
    out.detail("grid_classification", unb);
    Ok(out)
}

fn gos_trace(p: &Params) -> Result<TraceExport> {
    let k = p.horizon_or(200);
    Ok(export(
        gos_grid_trace(k)?,
        p,
        DensityRule::checkpoints(vec![k], p.delta),
    ))
}

pub fn scenarios() -> Vec<Scenario> {
    vec![
        Scenario {
            name: "totan",
            anchor: "totan: X x X counted twice on K^3 (every value is the whole space); one selection far apart on A, equal on B, for a density-one 2-partition A, B",
            defaults: || Params::new(1.0, &[0.5, 0.05]),
            run: run_totan,
            trace: Some(totan_trace),
        },
        Scenario {
            name: "identity-plus-span",
            anchor: "I + W with W = span{e_1} on K^3 and S = {0, e_1, 2e_1} inside W: weakly but not strictly (d,1)-chaotic",
            defaults: || Params::new(1.0, &[0.5, 0.05]),
            run: run_identity_plus_span,
            trace: Some(span_trace),
        },
        Scenario {
            name: "qwer",
            anchor: "qwer: extensions A^j + span{e_1..e_j} of powers of the forward shift on l^2, j = 1, 2; (A^j + W_j)^k x = shifted x + span{e_1..e_jk}",
            defaults: || Params::new(0.5, &[0.5, 0.05]),
            run: run_qwer,
            trace: Some(qwer_trace),
        },
        Scenario {
            name: "gos",
            anchor: "gos: x + span{e_1} on l^2 (selections of any size) against f + C_[jk,inf) on grid functions with sup seminorms p_m (blind for m <= jk)",
            defaults: || Params::new(1.0, &[0.5]),
            run: run_gos,
            trace: Some(gos_trace),
        },
    ]
}
