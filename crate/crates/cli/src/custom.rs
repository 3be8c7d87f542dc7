//! The `density` and `classify` commands: JSON in, JSON out.

use ddchaos::chaos::{
    classify_near_zero, classify_unbounded, orbit_trace, verify_scrambled_set, ClassifyParams,
    ConditionSpec, DensityRule, SelectionMode, TraceMetric,
};
use ddchaos::indexset::exact_upper_density;
use ddchaos::operators::{OperatorFamily, Regularizer, TranslationWeight, WeightSequence};
use ddchaos::{Error, ExactSet, PieceSet, Point, Result, SeminormSpace, SeqVector};
use serde::Deserialize;
use serde_json::{json, Value};

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum DensityInput {
    Blocks(Blocks),
    Exact(ExactSet),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Blocks {
    intervals: Vec<(u64, u64)>,
    horizon: u64,
    checkpoints: Option<Vec<u64>>,
}

/// Exact density for an ultimately periodic set, a checkpoint profile for a union of intervals.
pub fn density(input: &str) -> Result<Value> {
    let parsed: DensityInput =
        serde_json::from_str(input).map_err(|e| Error::InvalidInput(format!("set: {e}")))?;
    Ok(match parsed {
        DensityInput::Exact(s) => {
            json!({ "kind": "exact", "density": exact_upper_density(&s)?.to_string(), "set": s.canonical()? })
        }
        DensityInput::Blocks(b) => {
            if b.horizon == 0 || b.intervals.iter().any(|&(lo, hi)| lo == 0 || lo > hi) {
                return Err(Error::InvalidInput(
                    "intervals need 1 ≤ lo ≤ hi and a positive horizon".into(),
                ));
            }
            let set = PieceSet::from_intervals(&b.intervals, Some(b.horizon));
            let cps = b.checkpoints.unwrap_or_else(|| vec![b.horizon]);
            json!({ "kind": "profile", "profile": set.profile(&cps)? })
        }
    })
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum FamilySpec {
    Backward {
        weights: Vec<WeightSequence>,
        multipliers: Option<Vec<u64>>,
    },
    Forward {
        weights: Vec<WeightSequence>,
    },
    Regularized {
        weights: Vec<WeightSequence>,
        regularizer: Regularizer,
    },
    Translation {
        steps: Vec<(i64, TranslationWeight)>,
    },
}

impl FamilySpec {
    fn build(self) -> Result<OperatorFamily> {
        let check = |ws: &[WeightSequence]| -> Result<()> {
            if ws.is_empty() {
                return Err(Error::InvalidInput(
                    "family needs at least one member".into(),
                ));
            }
            ws.iter().try_for_each(WeightSequence::validate)
        };
        Ok(match self {
            FamilySpec::Backward {
                weights,
                multipliers,
            } => {
                check(&weights)?;
                let multipliers = multipliers.unwrap_or_else(|| vec![1; weights.len()]);
                if multipliers.len() != weights.len() || multipliers.contains(&0) {
                    return Err(Error::InvalidInput(
                        "one positive multiplier per weight sequence".into(),
                    ));
                }
                OperatorFamily::BackwardShift {
                    weights,
                    multipliers,
                }
            }
            FamilySpec::Forward { weights } => {
                check(&weights)?;
                OperatorFamily::ForwardShift { weights }
            }
            FamilySpec::Regularized {
                weights,
                regularizer,
            } => {
                check(&weights)?;
                OperatorFamily::RegularizedShift {
                    weights,
                    regularizer,
                }
            }
            FamilySpec::Translation { steps } => {
                if steps.is_empty() {
                    return Err(Error::InvalidInput(
                        "family needs at least one member".into(),
                    ));
                }
                OperatorFamily::Translation { steps }
            }
        })
    }
}

fn default_delta() -> f64 {
    0.1
}

fn default_sigma() -> f64 {
    1.0
}

fn default_eps() -> Vec<f64> {
    vec![0.5]
}

fn default_tol() -> f64 {
    1e-6
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassifyInput {
    family: FamilySpec,
    space: Option<SeminormSpace>,
    metric: Option<TraceMetric>,
    vector: Option<SeqVector>,
    points: Option<Vec<SeqVector>>,
    horizon: u64,
    checkpoints: Option<Vec<u64>>,
    #[serde(default = "default_delta")]
    delta: f64,
    #[serde(default = "default_sigma")]
    sigma: f64,
    #[serde(default = "default_eps")]
    eps: Vec<f64>,
    #[serde(default = "default_tol")]
    tol_zero: f64,
}

/// Near-zero and unbounded types 1–4 of one vector, or the twelve
/// scrambled-set verdicts of a list of points.
pub fn classify(input: &str) -> Result<Value> {
    let c: ClassifyInput =
        serde_json::from_str(input).map_err(|e| Error::InvalidInput(format!("scenario: {e}")))?;
    if c.horizon == 0 {
        return Err(Error::InvalidInput("horizon must be positive".into()));
    }
    let family = c.family.build()?;
    let space = c.space.unwrap_or_else(|| SeminormSpace::lp(2.0));
    let metric = c.metric.unwrap_or(TraceMetric::Norm);
    let cps = c.checkpoints.unwrap_or_else(|| vec![c.horizon]);
    let rule = DensityRule::checkpoints(cps.clone(), c.delta);
    match (c.vector, c.points) {
        (Some(v), None) => {
            let t = orbit_trace(
                &family,
                &space,
                metric,
                &Point::Seq(v),
                c.horizon,
                &cps,
                SelectionMode::SingleValued,
            )?;
            let mut params = ClassifyParams::new(rule);
            params.tol_zero = c.tol_zero;
            let near = (1..=4)
                .map(|ty| classify_near_zero(&t, ty, &params))
                .collect::<Result<Vec<_>>>()?;
            let unb = (1..=4)
                .map(|ty| classify_unbounded(&t, ty, &params))
                .collect::<Result<Vec<_>>>()?;
            Ok(json!({
                "near_zero": near.iter().map(|c| json!({ "type": c.vector_type, "holds": c.holds })).collect::<Vec<_>>(),
                "unbounded": unb.iter().map(|c| json!({ "type": c.vector_type, "holds": c.holds })).collect::<Vec<_>>(),
                "details": { "near_zero": near, "unbounded": unb },
            }))
        }
        (None, Some(pts)) => {
            let pts: Vec<Point> = pts.into_iter().map(Point::Seq).collect();
            let mut conditions = serde_json::Map::new();
            for spec in ConditionSpec::all() {
                let r = verify_scrambled_set(
                    &pts,
                    &family,
                    &space,
                    metric,
                    spec,
                    c.sigma,
                    &c.eps,
                    c.horizon,
                    &rule,
                    SelectionMode::SingleValued,
                )?;
                conditions.insert(format!("{:02}", spec.index), r.holds.into());
            }
            Ok(
                json!({ "conditions": conditions, "sigma": c.sigma, "eps": c.eps, "checkpoints": cps }),
            )
        }
        _ => Err(Error::InvalidInput(
            "give exactly one of `vector` or `points`".into(),
        )),
    }
}
