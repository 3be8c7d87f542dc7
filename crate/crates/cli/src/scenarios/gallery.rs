//! Diagonal families on 𝕂² built from density-one block partitions. Six
//! configurations cover every separating example between the twelve
//! conditions; `totanr` grows on one half of a partition and vanishes on the other.

use ddchaos::chaos::{
    clause_sets, pair_trace, verify_scrambled_with, ConditionSpec, DensityRule, DiagonalPairSets,
    OrbitSets, SelectionMode, TraceMetric, DEFAULT_CAP,
};
use ddchaos::indexset::{full_density_partition, partition_block_ends};
use ddchaos::operators::{DiagonalFamily, DiagonalRule, OperatorFamily};
use ddchaos::{PieceSet, Point, Result, SeminormSpace, SeqVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Outcome, Params, Scenario, TraceExport};

const GROWTH: u64 = 2;
/// End of the fourth partition block; explicit traces stop here.
pub const TRACE_HORIZON: u64 = 66066;

/// End of the seventh partition block, the default analytic horizon.
pub fn analytic_horizon() -> u64 {
    (1..=7u32).map(|i| 1u64 << (i * i)).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Config {
    /// `T_1` grows on one half of a 2-partition, `T_2 = 2I`.
    GrowAndDouble,
    /// `T_1` grows on one half of a 2-partition, `T_2 = 0`.
    GrowAndZero,
    /// 3-partition `A, B_1, B_2`; `T_j` grows on `B_j`.
    DisjointGrowth,
    /// 3-partition `A, B_1, B_2`; `T_j` grows off `B_j`.
    ComplementGrowth,
    /// `A` from a 2-partition split by parity; `T_j` grows on the `j`-th half of `A`.
    SplitGrowth,
    /// As `SplitGrowth`, with `T_j` growing off the `j`-th half of `A`.
    SplitComplement,
}

impl Config {
    pub fn label(self) -> &'static str {
        match self {
            Config::GrowAndDouble => "grow_and_double",
            Config::GrowAndZero => "grow_and_zero",
            Config::DisjointGrowth => "disjoint_growth",
            Config::ComplementGrowth => "complement_growth",
            Config::SplitGrowth => "split_growth",
            Config::SplitComplement => "split_complement",
        }
    }

    /// Conditions that hold, by construction.
    pub fn pattern(self) -> [bool; 12] {
        let on: &[u8] = match self {
            Config::GrowAndDouble => &[4, 6, 11, 12],
            Config::GrowAndZero => &[5, 8, 9, 10],
            Config::DisjointGrowth => &[3, 4, 5, 7, 8, 9, 10, 12],
            Config::ComplementGrowth => &[2, 3, 4, 5, 6, 10, 11, 12],
            Config::SplitGrowth => &[9, 10],
            Config::SplitComplement => &[11, 12],
        };
        let mut p = [false; 12];
        for &i in on {
            p[i as usize - 1] = true;
        }
        p
    }

    /// The family and the density-one sets it is built from.
    pub fn build(self, horizon: u64) -> Result<(DiagonalFamily, Vec<PieceSet>)> {
        let two: Vec<PieceSet> = full_density_partition(2, GROWTH, horizon)?
            .iter()
            .map(|b| b.to_piece_set())
            .collect();
        let three: Vec<PieceSet> = full_density_partition(3, GROWTH, horizon)?
            .iter()
            .map(|b| b.to_piece_set())
            .collect();
        let grow = |s: PieceSet| DiagonalRule::GrowOn { support: s };
        let halves = || -> Result<Vec<PieceSet>> {
            Ok(vec![
                two[0].intersect(&PieceSet::residue_class(1, 2, Some(horizon))?)?,
                two[0].intersect(&PieceSet::residue_class(0, 2, Some(horizon))?)?,
            ])
        };
        let (rules, witnesses) = match self {
            Config::GrowAndDouble => (
                vec![grow(two[0].clone()), DiagonalRule::Scaled { c: 2.0 }],
                two,
            ),
            Config::GrowAndZero => (
                vec![grow(two[0].clone()), DiagonalRule::Scaled { c: 0.0 }],
                two,
            ),
            Config::DisjointGrowth => (vec![grow(three[1].clone()), grow(three[2].clone())], three),
            Config::ComplementGrowth => (
                vec![grow(three[1].complement()), grow(three[2].complement())],
                three,
            ),
            Config::SplitGrowth => (halves()?.into_iter().map(grow).collect(), two),
            Config::SplitComplement => (
                halves()?
                    .into_iter()
                    .map(|s| grow(s.complement()))
                    .collect(),
                two,
            ),
        };
        Ok((DiagonalFamily { dim: 2, rules }, witnesses))
    }
}

pub fn block_rule(horizon: u64, delta: f64) -> DensityRule {
    DensityRule::checkpoints(
        partition_block_ends(GROWTH, horizon)
            .into_iter()
            .skip(2)
            .collect(),
        delta,
    )
}

fn e1(c: f64) -> Point {
    Point::Seq(SeqVector::basis(1).scale(c))
}

/// `{0, e_1, 2e_1}`: pairwise distances at least 1.
pub fn separated_points() -> Vec<Point> {
    vec![
        Point::Seq(SeqVector::zeros(ddchaos::IndexDomain::Natural)),
        e1(1.0),
        e1(2.0),
    ]
}

/// The twelve scrambled-set verdicts for `points` under `family`.
pub fn condition_pattern(
    family: &DiagonalFamily,
    points: &[Point],
    p: &Params,
    horizon: u64,
) -> Result<[bool; 12]> {
    let space = SeminormSpace::lp(2.0);
    let rule = block_rule(horizon, p.delta);
    let mut out = [false; 12];
    for spec in ConditionSpec::all() {
        let r = verify_scrambled_with(
            points,
            |x, y| {
                Ok(Box::new(DiagonalPairSets::for_pair(
                    family,
                    &space,
                    x,
                    y,
                    Some(horizon),
                )?) as Box<dyn OrbitSets>)
            },
            spec,
            p.sigma,
            &p.eps,
            &rule,
        )?;
        out[spec.index as usize - 1] = r.holds;
    }
    Ok(out)
}

/// Whether the analytic clause sets agree with explicit pair traces on `[1, K]`.
pub fn traces_agree(
    family: &DiagonalFamily,
    points: &[Point],
    p: &Params,
    horizon: u64,
) -> Result<bool> {
    let k = horizon.min(TRACE_HORIZON);
    let space = SeminormSpace::lp(2.0);
    let op = OperatorFamily::Diagonal(family.clone());
    for a in 0..points.len() {
        for b in a + 1..points.len() {
            let t = pair_trace(
                &op,
                &space,
                TraceMetric::Norm,
                &points[a],
                &points[b],
                k,
                &[k],
                SelectionMode::SingleValued,
                DEFAULT_CAP,
            )?;
            let d =
                DiagonalPairSets::for_pair(family, &space, &points[a], &points[b], Some(horizon))?;
            for &eps in &p.eps {
                let (st, sd) = (
                    clause_sets(&t, p.sigma, eps)?,
                    clause_sets(&d, p.sigma, eps)?,
                );
                for (x, y) in st
                    .upper
                    .iter()
                    .chain(&st.lower)
                    .zip(sd.upper.iter().chain(&sd.lower))
                {
                    if x.bitmap(k) != y.bitmap(k) {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Each density-one witness reaches ratio `1 − 2/m` at the end of its own `m`-th block.
pub fn witness_profiles_hold(witnesses: &[PieceSet], horizon: u64) -> Result<bool> {
    let ends = partition_block_ends(GROWTH, horizon);
    for w in witnesses {
        let own: Vec<u64> = ends.iter().copied().filter(|&e| w.contains(e)).collect();
        let prof = w.profile(&own)?;
        for (m, pt) in prof.points.iter().enumerate() {
            let bound = 1.0 - 2.0 / (m + 1) as f64;
            if pt.ratio < bound {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn gallery_defaults() -> Params {
    Params::new(1.0, &[0.5, 0.05])
}

/// For each configuration, the conditions the example says it violates.
fn example_plan(i: u8) -> Vec<(Config, Vec<u8>)> {
    use Config::*;
    match i {
        2 => vec![(ComplementGrowth, vec![1, 7, 8, 9])],
        3 => vec![
            (DisjointGrowth, vec![1, 2, 6, 11]),
            (ComplementGrowth, vec![7, 8, 9]),
        ],
        4 => vec![
            (GrowAndDouble, vec![1, 2, 3, 5, 7, 8, 9, 10]),
            (DisjointGrowth, vec![6, 11]),
        ],
        5 => vec![
            (GrowAndZero, vec![1, 2, 3, 4, 6, 7, 11, 12]),
            (ComplementGrowth, vec![8, 9]),
        ],
        6 => vec![(GrowAndDouble, vec![1, 2, 3, 5, 7, 8, 9, 10])],
        7 => vec![(DisjointGrowth, vec![1, 2, 6, 11])],
        8 => vec![(GrowAndZero, vec![1, 2, 3, 4, 6, 7, 11, 12])],
        9 => vec![
            (GrowAndZero, vec![1, 2, 3, 4, 6, 7, 11, 12]),
            (SplitGrowth, vec![5, 8]),
        ],
        10 => vec![
            (SplitGrowth, vec![1, 2, 3, 4, 5, 6, 7, 8, 11, 12]),
            (ComplementGrowth, vec![9]),
        ],
        11 => vec![
            (GrowAndDouble, vec![1, 2, 3, 5, 7, 8, 9, 10]),
            (SplitComplement, vec![4, 6]),
        ],
        12 => vec![
            (GrowAndDouble, vec![1, 2, 3, 5, 7, 8, 9, 10]),
            (SplitComplement, vec![4, 6]),
            (DisjointGrowth, vec![11]),
        ],
        _ => Vec::new(),
    }
}

fn run_example(i: u8, p: &Params) -> Result<Outcome> {
    let horizon = p.horizon_or(analytic_horizon());
    let points = separated_points();
    let mut out = Outcome::default();
    let mut patterns = serde_json::Map::new();
    for (cfg, fails) in example_plan(i) {
        let (fam, witnesses) = cfg.build(horizon)?;
        let pat = condition_pattern(&fam, &points, p, horizon)?;
        let name = cfg.label();
        let note = format!("example {i}");
        out.claim(
            format!("{name}: condition {i} holds"),
            true,
            pat[i as usize - 1],
            &note,
        );
        for t in fails {
            out.claim(
                format!("{name}: condition {t} fails"),
                false,
                pat[t as usize - 1],
                format!("example {i}: {i} does not imply {t}"),
            );
        }
        out.claim(
            format!("{name}: witness blocks reach 1 - 2/m at their m-th end"),
            true,
            witness_profiles_hold(&witnesses, horizon)?,
            "block construction",
        );
        out.claim(
            format!("{name}: analytic sets match explicit traces"),
            true,
            traces_agree(&fam, &points, p, horizon)?,
            "cross-check",
        );
        patterns.insert(name.into(), serde_json::json!({ "holds": holding(&pat), "construction_holds": holding(&cfg.pattern()) }));
    }
    out.detail("horizon", horizon);
    out.detail("checkpoints", block_rule(horizon, p.delta));
    out.detail("patterns", patterns);
    Ok(out)
}

fn holding(p: &[bool; 12]) -> Vec<usize> {
    (1..=12).filter(|i| p[i - 1]).collect()
}

fn gallery_trace(cfg: Config, p: &Params) -> Result<TraceExport> {
    let horizon = p.horizon_or(TRACE_HORIZON).min(TRACE_HORIZON);
    let (fam, _) = cfg.build(horizon)?;
    let pts = separated_points();
    let rule = block_rule(horizon, p.delta);
    let DensityRule::Checkpoints { checkpoints, .. } = &rule else {
        unreachable!()
    };
    let trace = pair_trace(
        &OperatorFamily::Diagonal(fam),
        &SeminormSpace::lp(2.0),
        TraceMetric::Norm,
        &pts[0],
        &pts[1],
        horizon,
        checkpoints,
        SelectionMode::SingleValued,
        DEFAULT_CAP,
    )?;
    Ok(TraceExport {
        trace,
        sigma: p.sigma,
        eps: p.eps_min(),
        rule,
    })
}

fn totanr_points(seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = vec![
        Point::Seq(SeqVector::zeros(ddchaos::IndexDomain::Natural)),
        e1(1.0),
    ];
    for _ in 0..2 {
        let v = SeqVector::from_dense(&[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
        pts.push(Point::Seq(v));
    }
    pts
}

/// Both members grow like `(j + k)·I` on one half of a 2-partition and vanish on the other.
pub fn totanr_family(horizon: u64) -> Result<DiagonalFamily> {
    let a = full_density_partition(2, GROWTH, horizon)?[0].to_piece_set();
    Ok(DiagonalFamily {
        dim: 2,
        rules: vec![
            DiagonalRule::GrowOn { support: a.clone() },
            DiagonalRule::GrowOn { support: a },
        ],
    })
}

fn run_totanr(p: &Params) -> Result<Outcome> {
    let horizon = p.horizon_or(analytic_horizon());
    let fam = totanr_family(horizon)?;
    let pts = totanr_points(p.seed);
    let pat = condition_pattern(&fam, &pts, p, horizon)?;
    let mut out = Outcome::default();
    out.claim(
        "condition 1 holds for S = {0, e_1, random pair}",
        true,
        pat[0],
        "example totanr",
    );
    for i in 2..=12 {
        out.claim(
            format!("condition {i} holds"),
            true,
            pat[i - 1],
            "implied by condition 1",
        );
    }
    out.claim(
        "analytic sets match explicit traces",
        true,
        traces_agree(&fam, &pts, p, horizon)?,
        "cross-check",
    );
    out.detail("horizon", horizon);
    out.detail("points", &pts);
    out.detail("seed", p.seed);
    Ok(out)
}

fn totanr_trace(p: &Params) -> Result<TraceExport> {
    let horizon = p.horizon_or(TRACE_HORIZON).min(TRACE_HORIZON);
    let fam = totanr_family(horizon)?;
    let pts = totanr_points(p.seed);
    let rule = block_rule(horizon, p.delta);
    let DensityRule::Checkpoints { checkpoints, .. } = &rule else {
        unreachable!()
    };
    let trace = pair_trace(
        &OperatorFamily::Diagonal(fam),
        &SeminormSpace::lp(2.0),
        TraceMetric::Norm,
        &pts[0],
        &pts[1],
        horizon,
        checkpoints,
        SelectionMode::SingleValued,
        DEFAULT_CAP,
    )?;
    Ok(TraceExport {
        trace,
        sigma: p.sigma,
        eps: p.eps_min(),
        rule,
    })
}

macro_rules! example {
    ($i:literal, $anchor:literal) => {
        Scenario {
            name: concat!("example-", stringify!($i)),
            anchor: $anchor,
            defaults: gallery_defaults,
            run: |p| run_example($i, p),
            trace: Some(|p| gallery_trace(example_plan($i)[0].0, p)),
        }
    };
}

pub fn scenarios() -> Vec<Scenario> {
    vec![
        Scenario {
            name: "totanr",
            anchor: "totanr: diagonal (j+k)I on one half A of a density-one 2-partition of N, 0 on the other half; S = {0, e_1, random pair} in K^2, sigma = 1",
            defaults: || Params::new(1.0, &[0.5, 0.05]),
            run: run_totanr,
            trace: Some(totanr_trace),
        },
        example!(2, "example 2: condition 2 without 1, 7, 8, 9 (T_j grows off B_j of a 3-partition A, B_1, B_2)"),
        example!(3, "example 3: condition 3 without 1, 2, 6, 7, 8, 9, 11 (growth on B_j, and off B_j)"),
        example!(4, "example 4: condition 4 without 1, 2, 3, 5, 6, 7, 8, 9, 10, 11 (T_1 grows on A, T_2 = 2I; growth on B_j)"),
        example!(5, "example 5: condition 5 without 1, 2, 3, 4, 6, 7, 8, 9, 11, 12 (T_1 grows on A, T_2 = 0; growth off B_j)"),
        example!(6, "example 6: condition 6 without 1, 2, 3, 5, 7, 8, 9, 10 (T_1 grows on A, T_2 = 2I)"),
        example!(7, "example 7: condition 7 without 1, 2, 6, 11 (T_j grows on B_j of a 3-partition)"),
        example!(8, "example 8: condition 8 without 1, 2, 3, 4, 6, 7, 11, 12 (T_1 grows on A, T_2 = 0)"),
        example!(9, "example 9: condition 9 without 1, 2, 3, 4, 5, 6, 7, 8, 11, 12 (T_2 = 0; A split by parity)"),
        example!(10, "example 10: condition 10 without any other (A split by parity; growth off B_j)"),
        example!(11, "example 11: condition 11 without 1, 2, 3, 4, 5, 6, 7, 8, 9, 10 (T_2 = 2I; growth off the parity halves of A)"),
        example!(12, "example 12: condition 12 without any other (T_2 = 2I; growth off the parity halves of A; growth on B_j)"),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_configuration_has_its_pattern() {
        let h = analytic_horizon();
        let p = gallery_defaults();
        for cfg in [
            Config::GrowAndDouble,
            Config::GrowAndZero,
            Config::DisjointGrowth,
            Config::ComplementGrowth,
            Config::SplitGrowth,
            Config::SplitComplement,
        ] {
            let (fam, _) = cfg.build(h).unwrap();
            assert_eq!(
                condition_pattern(&fam, &separated_points(), &p, h).unwrap(),
                cfg.pattern(),
                "{cfg:?}"
            );
        }
    }

    #[test]
    fn every_plan_separates() {
        for i in 2..=12u8 {
            for (cfg, fails) in example_plan(i) {
                let pat = cfg.pattern();
                assert!(pat[i as usize - 1], "{i} {cfg:?}");
                assert!(fails.iter().all(|t| !pat[*t as usize - 1]), "{i} {cfg:?}");
            }
        }
    }
}
