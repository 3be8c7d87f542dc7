//! Scenarios about the implication structure between the twelve conditions.

use ddchaos::chaos::{
    diagonal_equivalence, implication_lattice, pair_trace, DensityRule, SelectionMode, TraceMatrix,
    TraceMetric, DEFAULT_CAP,
};
use ddchaos::operators::OperatorFamily;
use ddchaos::{Result, SeminormSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::gallery::{
    analytic_horizon, block_rule, condition_pattern, separated_points, Config, TRACE_HORIZON,
};
use super::{Outcome, Params, Scenario, TraceExport};

fn grow_and_zero_trace(p: &Params) -> Result<(TraceMatrix, DensityRule)> {
    let k = p.horizon_or(TRACE_HORIZON).min(TRACE_HORIZON);
    let (fam, _) = Config::GrowAndZero.build(k)?;
    let pts = separated_points();
    let rule = block_rule(k, p.delta);
    let DensityRule::Checkpoints { checkpoints, .. } = &rule else {
        unreachable!()
    };
    let t = pair_trace(
        &OperatorFamily::Diagonal(fam),
        &SeminormSpace::lp(2.0),
        TraceMetric::Norm,
        &pts[0],
        &pts[1],
        k,
        checkpoints,
        SelectionMode::SingleValued,
        DEFAULT_CAP,
    )?;
    Ok((t, rule))
}

/// Values cluster near `σ` and `ε` so both strict and non-strict comparisons get exercised.
pub fn random_trace(rng: &mut ChaCha8Rng, sigma: f64, eps: f64) -> Result<TraceMatrix> {
    let n = rng.gen_range(1..=5);
    let k = rng.gen_range(1..=200);
    let values = (0..n)
        .map(|_| {
            (0..k)
                .map(|_| match rng.gen_range(0..4) {
                    0 => sigma,
                    1 => eps,
                    2 => 0.0,
                    _ => rng.gen_range(0.0..2.0 * sigma),
                })
                .collect()
        })
        .collect();
    TraceMatrix::new(values, vec![k as u64], SelectionMode::SingleValued)
}

fn run_tuple_profo(p: &Params) -> Result<Outcome> {
    let (t, rule) = grow_and_zero_trace(p)?;
    let mut out = Outcome::default();
    let eps = p.eps_min();
    let r = diagonal_equivalence(&t, p.sigma, eps, &rule)?;
    out.claim(
        "condition 9 holds on the components (grow_and_zero, pair 0, e_1)",
        true,
        r.condition_9,
        "example 9 configuration",
    );
    out.claim(
        "the max-diagonal trace is distributionally chaotic",
        true,
        r.diagonal,
        "product metric d_max",
    );
    out.claim(
        "{max_j s >= sigma} equals the union of the upper sets",
        true,
        r.upper_identity,
        "pointwise",
    );
    out.claim(
        "{max_j s < eps} equals the intersection of the lower sets",
        true,
        r.lower_identity,
        "pointwise",
    );
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut identities = true;
    let mut agree = true;
    for _ in 0..200 {
        let rt = random_trace(&mut rng, p.sigma, eps)?;
        let rr = diagonal_equivalence(
            &rt,
            p.sigma,
            eps,
            &DensityRule::checkpoints(vec![rt.len()], p.delta),
        )?;
        identities &= rr.upper_identity && rr.lower_identity;
        agree &= rr.condition_9 == rr.diagonal;
    }
    out.claim(
        "set identities hold on 200 random traces",
        true,
        identities,
        "seeded sample",
    );
    out.claim(
        "condition 9 and the diagonal verdict agree on 200 random traces",
        true,
        agree,
        "seeded sample",
    );
    out.detail("horizon", t.len());
    out.detail("seed", p.seed);
    Ok(out)
}

fn tuple_profo_trace(p: &Params) -> Result<TraceExport> {
    let (trace, rule) = grow_and_zero_trace(p)?;
    Ok(TraceExport {
        trace,
        sigma: p.sigma,
        eps: p.eps_min(),
        rule,
    })
}

const DC_SECOND: [u8; 4] = [5, 8, 9, 10];
const DC_FIRST: [u8; 4] = [4, 6, 11, 12];
const NEVER: [u8; 4] = [1, 2, 3, 7];

fn run_count_grof(p: &Params) -> Result<Outcome> {
    let mut out = Outcome::default();
    let mut claimed = [false; 12];
    for i in DC_SECOND.iter().chain(&DC_FIRST) {
        claimed[*i as usize - 1] = true;
    }
    let lat = implication_lattice();
    let violations: Vec<(usize, usize)> = (0..12)
        .flat_map(|a| (0..12).map(move |b| (a, b)))
        .filter(|&(a, b)| lat[a][b] && claimed[a] && !claimed[b])
        .map(|(a, b)| (a + 1, b + 1))
        .collect();
    out.claim(
        "no implication leads from a holding condition to a failing one",
        true,
        violations.is_empty(),
        "consequences of the scaled-operator pair",
    );

    let horizon = p.horizon_or(analytic_horizon());
    let pts = separated_points();
    let on =
        |pat: &[bool; 12], set: &[u8]| (1..=12u8).all(|i| pat[i as usize - 1] == set.contains(&i));
    let (first, _) = Config::GrowAndDouble.build(horizon)?;
    let first = condition_pattern(&first, &pts, p, horizon)?;
    out.claim(
        "only the first operator chaotic gives exactly 4, 6, 11, 12",
        true,
        on(&first, &DC_FIRST),
        "grow_and_double",
    );
    let (second, _) = Config::GrowAndZero.build(horizon)?;
    let second = condition_pattern(&second, &pts, p, horizon)?;
    out.claim(
        "only the second operator chaotic gives exactly 5, 8, 9, 10",
        true,
        on(&second, &DC_SECOND),
        "grow_and_zero",
    );
    let neither = (0..12)
        .filter(|&i| !first[i] && !second[i])
        .map(|i| i as u8 + 1)
        .collect::<Vec<_>>();
    out.claim(
        "conditions 1, 2, 3, 7 follow from neither",
        true,
        neither == NEVER,
        "complement of the two patterns",
    );
    out.detail("violations", violations);
    out.detail("horizon", horizon);
    Ok(out)
}

pub fn scenarios() -> Vec<Scenario> {
    vec![
        Scenario {
            name: "tuple-profo",
            anchor: "tuple-profo: condition 9 on the components against chaos of the max-diagonal, on the grow_and_zero pair and on random traces",
            defaults: || Params::new(1.0, &[0.05]),
            run: run_tuple_profo,
            trace: Some(tuple_profo_trace),
        },
        Scenario {
            name: "count-grof",
            anchor: "count-grof: scaled copies l_1 T, l_2 T with l_1 < l_2; 4, 5, 6, 8, 9, 10, 11, 12 hold and 1, 2, 3, 7 fail",
            defaults: || Params::new(1.0, &[0.5, 0.05]),
            run: run_count_grof,
            trace: None,
        },
    ]
}
