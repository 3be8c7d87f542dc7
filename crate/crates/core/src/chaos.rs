//! Orbit traces, the twelve disjointness conditions, near-zero / unbounded /
//! irregular classification and scrambled-set verification.
//!
//! Everything is phrased through index sets: a trace (or an analytic
//! description of one) yields level sets, the combinators fold them, and a
//! [`DensityRule`] turns each folded set into a pass/fail.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::indexset::{Density, DensityProfile, PieceSet, SetSummary};
use crate::mlo::{distance_range, min_seminorm, sup_seminorm, AffineCoset, MloFamily, Subspace};
use crate::operators::{apply_point, BlockWeights, DiagonalFamily, DiagonalRule, OperatorFamily};
use crate::space::{Point, SeminormSpace};

/// Default cap on max-selections so traces stay finite.
pub const DEFAULT_CAP: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Combinator {
    #[serde(rename = "all_intersect")]
    Intersect,
    #[serde(rename = "any_union")]
    Union,
    #[serde(rename = "forall_each")]
    ForAll,
    #[serde(rename = "exists_one")]
    Exists,
}

impl Combinator {
    /// Position in the order `∪ < ∃ < ∀ < ∩`; a stronger combinator demands more.
    pub fn strength(self) -> u8 {
        match self {
            Combinator::Union => 0,
            Combinator::Exists => 1,
            Combinator::ForAll => 2,
            Combinator::Intersect => 3,
        }
    }

    /// Type number of the matching near-zero / unbounded notion.
    pub fn vector_type(self) -> u8 {
        match self {
            Combinator::Intersect => 1,
            Combinator::Union => 2,
            Combinator::ForAll => 3,
            Combinator::Exists => 4,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Combinator::Intersect => "∩",
            Combinator::Union => "∪",
            Combinator::ForAll => "∀",
            Combinator::Exists => "∃",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionSpec {
    pub index: u8,
    pub upper: Combinator,
    pub lower: Combinator,
}

impl ConditionSpec {
    pub fn new(index: u8) -> Result<Self> {
        use Combinator::*;
        let (upper, lower) = match index {
            1 => (Intersect, Intersect),
            2 => (Intersect, ForAll),
            3 => (ForAll, ForAll),
            4 => (ForAll, Exists),
            5 => (Exists, ForAll),
            6 => (Intersect, Exists),
            7 => (ForAll, Intersect),
            8 => (Exists, Intersect),
            9 => (Union, Intersect),
            10 => (Union, ForAll),
            11 => (Intersect, Union),
            12 => (ForAll, Union),
            _ => return invalid(format!("condition index {index} outside 1..=12")),
        };
        Ok(ConditionSpec {
            index,
            upper,
            lower,
        })
    }

    pub fn all() -> Vec<ConditionSpec> {
        (1..=12)
            .map(|i| ConditionSpec::new(i).expect("in range"))
            .collect()
    }
}

/// How a set's density is judged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensityRule {
    /// Horizon-free set whose exact density is 1.
    Exact,
    /// Largest ratio over the checkpoints at least `1 − δ`.
    Checkpoints { checkpoints: Vec<u64>, delta: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SetVerdict {
    pub label: String,
    pub passes: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_density: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<DensityProfile>,
}

impl DensityRule {
    pub fn checkpoints(checkpoints: Vec<u64>, delta: f64) -> Self {
        DensityRule::Checkpoints { checkpoints, delta }
    }

    pub fn judge(&self, label: impl Into<String>, set: &PieceSet) -> Result<SetVerdict> {
        let label = label.into();
        match self {
            DensityRule::Exact => {
                let d: Density = set.exact_density().ok_or_else(|| {
                    Error::InvalidInput("exact rule needs a horizon-free set".into())
                })?;
                Ok(SetVerdict {
                    label,
                    passes: d == Density::from_integer(1),
                    exact_density: Some(d.to_string()),
                    profile: None,
                })
            }
            DensityRule::Checkpoints { checkpoints, delta } => {
                if !(0.0..1.0).contains(delta) {
                    return invalid("δ must lie in [0, 1)");
                }
                let profile = set.profile(checkpoints)?;
                Ok(SetVerdict {
                    label,
                    passes: profile.reaches(*delta),
                    exact_density: None,
                    profile: Some(profile),
                })
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClauseVerdict {
    pub combinator: Combinator,
    pub passes: bool,
    pub sets: Vec<SetVerdict>,
}

pub fn eval_clause(
    comb: Combinator,
    sets: &[PieceSet],
    rule: &DensityRule,
) -> Result<ClauseVerdict> {
    if sets.is_empty() {
        return invalid("no sets to combine");
    }
    let (passes, verdicts) = match comb {
        Combinator::Intersect => {
            let v = rule.judge("∩", &PieceSet::intersect_all(sets)?)?;
            (v.passes, vec![v])
        }
        Combinator::Union => {
            let v = rule.judge("∪", &PieceSet::union_all(sets)?)?;
            (v.passes, vec![v])
        }
        Combinator::ForAll | Combinator::Exists => {
            let vs = sets
                .iter()
                .enumerate()
                .map(|(j, s)| rule.judge(format!("j={}", j + 1), s))
                .collect::<Result<Vec<_>>>()?;
            let p = if comb == Combinator::ForAll {
                vs.iter().all(|v| v.passes)
            } else {
                vs.iter().any(|v| v.passes)
            };
            (p, vs)
        }
    };
    Ok(ClauseVerdict {
        combinator: comb,
        passes,
        sets: verdicts,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub condition: u8,
    pub holds: bool,
    pub upper: ClauseVerdict,
    pub lower: ClauseVerdict,
}

/// `U_j = {k : s ≥ σ}` and `L_j = {k : s < ε}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClauseSets {
    pub upper: Vec<PieceSet>,
    pub lower: Vec<PieceSet>,
}

pub fn eval_condition(
    spec: ConditionSpec,
    sets: &ClauseSets,
    rule: &DensityRule,
) -> Result<Verdict> {
    if sets.upper.len() != sets.lower.len() {
        return invalid("upper and lower clause sets disagree on N");
    }
    let upper = eval_clause(spec.upper, &sets.upper, rule)?;
    let lower = eval_clause(spec.lower, &sets.lower, rule)?;
    Ok(Verdict {
        condition: spec.index,
        holds: upper.passes && lower.passes,
        upper,
        lower,
    })
}

/// Growth schedule `g(k)` for unboundedness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[derive(Default)]
pub enum Schedule {
    Constant {
        c: f64,
    },
    /// `ln(1 + k)`.
    #[default]
    LogOnePlus,
    /// `c·base^k`.
    Exponential {
        c: f64,
        base: f64,
    },
}

impl Schedule {
    pub fn at(&self, k: u64) -> f64 {
        match self {
            Schedule::Constant { c } => *c,
            Schedule::LogOnePlus => (k as f64).ln_1p(),
            Schedule::Exponential { c, base } => c * base.powf(k as f64),
        }
    }
}

/// Level sets of the per-`j` orbit values `v_j(k)`, `1 ≤ k ≤ horizon`.
/// `below` reads the smallest selection and `reaching` the largest, which
/// coincide for single-valued families.
pub trait OrbitSets {
    fn families(&self) -> usize;
    fn horizon(&self) -> Option<u64>;
    /// `{k : v_j(k) < t}`.
    fn below(&self, j: usize, t: f64) -> Result<PieceSet>;
    /// `{k : v_j(k) ≥ g(k)}`.
    fn reaching(&self, j: usize, g: &Schedule) -> Result<PieceSet>;
    /// `{k : Σ_j v_j(k) ≥ g(k)}`.
    fn sum_reaching(&self, _g: &Schedule) -> Result<PieceSet> {
        invalid("sums across the family are only available on explicit traces")
    }
}

pub fn clause_sets(src: &dyn OrbitSets, sigma: f64, eps: f64) -> Result<ClauseSets> {
    if !(sigma > 0.0 && eps > 0.0) {
        return invalid("σ and ε must be positive");
    }
    let n = src.families();
    let upper = (1..=n)
        .map(|j| src.reaching(j, &Schedule::Constant { c: sigma }))
        .collect::<Result<_>>()?;
    let lower = (1..=n).map(|j| src.below(j, eps)).collect::<Result<_>>()?;
    Ok(ClauseSets { upper, lower })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMode {
    SingleValued,
    MloMin,
    MloMax,
    MloDual,
}

/// `s[j][k]` for `1 ≤ j ≤ N`, `1 ≤ k ≤ K`, stored at `values[j−1][k−1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceMatrix {
    pub values: Vec<Vec<f64>>,
    /// Max-selection matrix when both selections are recorded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<Vec<Vec<f64>>>,
    pub checkpoints: Vec<u64>,
    pub selection: SelectionMode,
}

impl TraceMatrix {
    pub fn new(
        values: Vec<Vec<f64>>,
        checkpoints: Vec<u64>,
        selection: SelectionMode,
    ) -> Result<Self> {
        let t = TraceMatrix {
            values,
            upper: None,
            checkpoints,
            selection,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn dual(lower: Vec<Vec<f64>>, upper: Vec<Vec<f64>>, checkpoints: Vec<u64>) -> Result<Self> {
        let t = TraceMatrix {
            values: lower,
            upper: Some(upper),
            checkpoints,
            selection: SelectionMode::MloDual,
        };
        t.validate()?;
        Ok(t)
    }

    fn validate(&self) -> Result<()> {
        let k = self.values.first().map_or(0, Vec::len);
        if self.values.is_empty() || k == 0 {
            return invalid("trace needs N ≥ 1 and K ≥ 1");
        }
        for m in std::iter::once(&self.values).chain(self.upper.as_ref()) {
            if m.len() != self.values.len() || m.iter().any(|row| row.len() != k) {
                return invalid("ragged trace matrix");
            }
            if m.iter().flatten().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return invalid("trace values must be finite and nonnegative");
            }
        }
        if self.checkpoints.iter().any(|&c| c == 0 || c > k as u64) {
            return invalid("checkpoints must lie in [1, K]");
        }
        Ok(())
    }

    pub fn families(&self) -> usize {
        self.values.len()
    }

    pub fn len(&self) -> u64 {
        self.values[0].len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.values[0].is_empty()
    }

    pub fn value(&self, j: usize, k: u64) -> f64 {
        self.values[j - 1][k as usize - 1]
    }

    pub fn upper_value(&self, j: usize, k: u64) -> f64 {
        self.upper.as_ref().unwrap_or(&self.values)[j - 1][k as usize - 1]
    }

    /// Single-selection trace: the max-selection on `max_on`, the min-selection elsewhere.
    pub fn select(&self, max_on: &PieceSet) -> TraceMatrix {
        let values = (1..=self.families())
            .map(|j| {
                (1..=self.len())
                    .map(|k| {
                        if max_on.contains(k) {
                            self.upper_value(j, k)
                        } else {
                            self.value(j, k)
                        }
                    })
                    .collect()
            })
            .collect();
        TraceMatrix {
            values,
            upper: None,
            checkpoints: self.checkpoints.clone(),
            selection: SelectionMode::SingleValued,
        }
    }

    /// `max_j s[j][k]`, the trace of the tuple in the product metric.
    pub fn diagonal(&self) -> TraceMatrix {
        let row = |m: &Vec<Vec<f64>>| {
            (0..self.len() as usize)
                .map(|k| m.iter().map(|r| r[k]).fold(0.0, f64::max))
                .collect::<Vec<f64>>()
        };
        TraceMatrix {
            values: vec![row(&self.values)],
            upper: self.upper.as_ref().map(|u| vec![row(u)]),
            checkpoints: self.checkpoints.clone(),
            selection: self.selection,
        }
    }

    fn bitmap_set(&self, f: impl Fn(u64) -> bool) -> PieceSet {
        PieceSet::from_bitmap(&(1..=self.len()).map(f).collect::<Vec<bool>>())
    }
}

impl OrbitSets for TraceMatrix {
    fn families(&self) -> usize {
        self.values.len()
    }

    fn horizon(&self) -> Option<u64> {
        Some(self.len())
    }

    fn below(&self, j: usize, t: f64) -> Result<PieceSet> {
        Ok(self.bitmap_set(|k| self.value(j, k) < t))
    }

    fn reaching(&self, j: usize, g: &Schedule) -> Result<PieceSet> {
        Ok(self.bitmap_set(|k| self.upper_value(j, k) >= g.at(k)))
    }

    fn sum_reaching(&self, g: &Schedule) -> Result<PieceSet> {
        Ok(self.bitmap_set(|k| {
            (1..=self.families())
                .map(|j| self.upper_value(j, k))
                .sum::<f64>()
                >= g.at(k)
        }))
    }
}

/// Values of a family member at `x`: a point, or a coset for MLOs.
#[derive(Clone, Debug, PartialEq)]
pub enum Orbit {
    Single(Point),
    Coset(AffineCoset),
}

pub trait OrbitFamily {
    fn families(&self) -> usize;
    fn orbit(&self, j: usize, k: u64, x: &Point) -> Result<Orbit>;
}

impl OrbitFamily for OperatorFamily {
    fn families(&self) -> usize {
        self.count()
    }

    fn orbit(&self, j: usize, k: u64, x: &Point) -> Result<Orbit> {
        Ok(Orbit::Single(apply_point(self, j, k, x)?))
    }
}

impl OrbitFamily for MloFamily {
    fn families(&self) -> usize {
        self.count()
    }

    fn orbit(&self, j: usize, k: u64, x: &Point) -> Result<Orbit> {
        Ok(Orbit::Coset(self.value(j, k, x)?))
    }
}

/// A family whose domain is cut down by a predicate.
pub struct Restricted<'a> {
    inner: &'a dyn OrbitFamily,
    predicate: Box<dyn Fn(&Point) -> bool + 'a>,
}

pub fn restrict_family<'a>(
    family: &'a dyn OrbitFamily,
    predicate: impl Fn(&Point) -> bool + 'a,
) -> Restricted<'a> {
    Restricted {
        inner: family,
        predicate: Box::new(predicate),
    }
}

impl OrbitFamily for Restricted<'_> {
    fn families(&self) -> usize {
        self.inner.families()
    }

    fn orbit(&self, j: usize, k: u64, x: &Point) -> Result<Orbit> {
        if !(self.predicate)(x) {
            return Err(Error::DomainViolation);
        }
        self.inner.orbit(j, k, x)
    }
}

/// How a distance between orbit elements is measured.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceMetric {
    /// The norm (first seminorm) of the difference.
    Norm,
    /// The seminorm `p_m` of the difference.
    Seminorm { m: u64 },
    /// The truncated Fréchet metric.
    Frechet { tol: f64 },
}

fn coset_of(o: Orbit) -> AffineCoset {
    match o {
        Orbit::Single(p) => AffineCoset::single(p),
        Orbit::Coset(c) => c,
    }
}

/// Smallest and largest value of the metric over `diff`.
fn metric_range(
    space: &SeminormSpace,
    metric: TraceMetric,
    diff: &AffineCoset,
) -> Result<(f64, f64)> {
    match metric {
        TraceMetric::Norm => Ok((
            min_seminorm(diff, space, 1)?.0,
            sup_seminorm(diff, space, 1)?,
        )),
        TraceMetric::Seminorm { m } => Ok((
            min_seminorm(diff, space, m)?.0,
            sup_seminorm(diff, space, m)?,
        )),
        TraceMetric::Frechet { tol } => distance_range(diff, space, tol),
    }
}

/// Distances between the orbits of `x` and `y`.
#[allow(clippy::too_many_arguments)]
pub fn pair_trace(
    family: &dyn OrbitFamily,
    space: &SeminormSpace,
    metric: TraceMetric,
    x: &Point,
    y: &Point,
    horizon: u64,
    checkpoints: &[u64],
    selection: SelectionMode,
    cap: f64,
) -> Result<TraceMatrix> {
    if x == y {
        return invalid("trace of a pair needs distinct vectors");
    }
    orbit_difference_trace(
        family,
        space,
        metric,
        x,
        Some(y),
        horizon,
        checkpoints,
        selection,
        cap,
    )
}

/// `p(T_{j,k} x)` for a nonzero vector.
pub fn orbit_trace(
    family: &dyn OrbitFamily,
    space: &SeminormSpace,
    metric: TraceMetric,
    x: &Point,
    horizon: u64,
    checkpoints: &[u64],
    selection: SelectionMode,
) -> Result<TraceMatrix> {
    if x.is_zero() {
        return invalid("classification needs a nonzero vector");
    }
    orbit_difference_trace(
        family,
        space,
        metric,
        x,
        None,
        horizon,
        checkpoints,
        selection,
        DEFAULT_CAP,
    )
}

#[allow(clippy::too_many_arguments)]
fn orbit_difference_trace(
    family: &dyn OrbitFamily,
    space: &SeminormSpace,
    metric: TraceMetric,
    x: &Point,
    y: Option<&Point>,
    horizon: u64,
    checkpoints: &[u64],
    selection: SelectionMode,
    cap: f64,
) -> Result<TraceMatrix> {
    if horizon == 0 {
        return invalid("horizon must be at least 1");
    }
    let n = family.families();
    let mut lo = vec![Vec::with_capacity(horizon as usize); n];
    let mut hi = vec![Vec::with_capacity(horizon as usize); n];
    for j in 1..=n {
        for k in 1..=horizon {
            let at = |e: Error| Error::AtIndex {
                j,
                k,
                source: Box::new(e),
            };
            let cx = coset_of(family.orbit(j, k, x).map_err(at)?);
            let diff = match y {
                Some(y) => {
                    let cy = coset_of(family.orbit(j, k, y).map_err(at)?);
                    let subspace = match (&cx.subspace, &cy.subspace) {
                        (a, b) if a == b => a.clone(),
                        (Subspace::Zero, b) => b.clone(),
                        (a, Subspace::Zero) => a.clone(),
                        _ => {
                            return Err(at(Error::InvalidInput(
                                "orbit cosets over different subspaces".into(),
                            )))
                        }
                    };
                    AffineCoset {
                        base: cx.base.sub(&cy.base).map_err(at)?,
                        subspace,
                    }
                }
                None => cx,
            };
            if selection == SelectionMode::SingleValued && !diff.subspace.is_zero() {
                return Err(at(Error::InvalidInput(
                    "multivalued orbit under single-valued selection".into(),
                )));
            }
            let (a, b) = metric_range(space, metric, &diff).map_err(at)?;
            lo[j - 1].push(a);
            hi[j - 1].push(b.min(cap));
        }
    }
    let cps = checkpoints.to_vec();
    match selection {
        SelectionMode::SingleValued | SelectionMode::MloMin => {
            let mut t = TraceMatrix::new(lo, cps, selection)?;
            t.selection = selection;
            Ok(t)
        }
        SelectionMode::MloMax => TraceMatrix::new(hi, cps, selection),
        SelectionMode::MloDual => TraceMatrix::dual(lo, hi, cps),
    }
}

/// First index in `[lo, hi]` where a false→true predicate flips, else `hi + 1`.
fn first_true(lo: u64, hi: u64, f: impl Fn(u64) -> bool) -> u64 {
    let (mut a, mut b) = (lo, hi.saturating_add(1));
    while a < b {
        let mid = a + (b - a) / 2;
        if f(mid) {
            b = mid;
        } else {
            a = mid + 1;
        }
    }
    a
}

const OPEN_END: u64 = 1 << 62;

/// `{k : a + b·k ≥ g(k)}` for `b ≥ 0`; exact for the supported schedules.
fn linear_reaching(a: f64, b: f64, g: &Schedule, horizon: Option<u64>) -> Result<PieceSet> {
    let end = horizon.unwrap_or(OPEN_END);
    let f = |k: u64| a + b * k as f64 >= g.at(k);
    match g {
        Schedule::Constant { .. } if b == 0.0 => Ok(if f(1) {
            PieceSet::universe(horizon)
        } else {
            PieceSet::empty(horizon)
        }),
        Schedule::Constant { .. } => Ok(PieceSet::interval(first_true(1, end, f), None, horizon)),
        Schedule::LogOnePlus if b > 0.0 => {
            // a + b·k − ln(1 + k) is increasing once k ≥ 1/b − 1
            let turn = (1.0 / b).ceil().max(1.0);
            if turn > 1e7 {
                return invalid("growth rate too small to resolve the level set");
            }
            let turn = turn as u64;
            let mut iv: Vec<(u64, u64)> = (1..turn.min(end + 1))
                .filter(|&k| f(k))
                .map(|k| (k, k))
                .collect();
            if turn <= end {
                iv.push((first_true(turn, end, f), end));
            }
            Ok(PieceSet::from_intervals(&iv, horizon))
        }
        Schedule::LogOnePlus => {
            // a ≥ ln(1 + k) on a prefix
            let stop = first_true(1, end, |k| !f(k));
            Ok(PieceSet::from_intervals(
                &[(1, stop.saturating_sub(1))],
                horizon,
            ))
        }
        Schedule::Exponential { .. } => {
            invalid("exponential schedules are only available on explicit traces")
        }
    }
}

/// Analytic level sets for a diagonal family applied to `x − y`: every
/// member acts as a scalar, so `v_j(k) = |λ_j(k)|·‖x − y‖`.
#[derive(Clone, Debug)]
pub struct DiagonalPairSets<'a> {
    family: &'a DiagonalFamily,
    scale: f64,
    horizon: Option<u64>,
}

impl<'a> DiagonalPairSets<'a> {
    pub fn new(family: &'a DiagonalFamily, scale: f64, horizon: Option<u64>) -> Result<Self> {
        if !(scale.is_finite() && scale >= 0.0) {
            return invalid("distance scale must be finite and nonnegative");
        }
        Ok(DiagonalPairSets {
            family,
            scale,
            horizon,
        })
    }

    pub fn for_pair(
        family: &'a DiagonalFamily,
        space: &SeminormSpace,
        x: &Point,
        y: &Point,
        horizon: Option<u64>,
    ) -> Result<Self> {
        if x == y {
            return invalid("trace of a pair needs distinct vectors");
        }
        Self::new(family, space.point_seminorm(1, &x.sub(y)?)?, horizon)
    }

    fn rule(&self, j: usize) -> Result<&DiagonalRule> {
        self.family
            .rules
            .get(j.wrapping_sub(1))
            .ok_or_else(|| Error::InvalidInput(format!("family index {j} out of range")))
    }

    fn clip(&self, s: &PieceSet) -> PieceSet {
        match self.horizon {
            Some(h) => s.with_horizon(h),
            None => s.clone(),
        }
    }
}

impl OrbitSets for DiagonalPairSets<'_> {
    fn families(&self) -> usize {
        self.family.rules.len()
    }

    fn horizon(&self) -> Option<u64> {
        self.horizon
    }

    fn below(&self, j: usize, t: f64) -> Result<PieceSet> {
        match self.rule(j)? {
            DiagonalRule::Scaled { c } => Ok(if c.abs() * self.scale < t {
                PieceSet::universe(self.horizon)
            } else {
                PieceSet::empty(self.horizon)
            }),
            DiagonalRule::GrowOn { support } => {
                let j = j as f64;
                let small = if self.scale == 0.0 {
                    PieceSet::universe(self.horizon)
                } else {
                    let end = self.horizon.unwrap_or(OPEN_END);
                    let first_big = first_true(1, end, |k| (j + k as f64) * self.scale >= t);
                    PieceSet::from_intervals(&[(1, first_big - 1)], self.horizon)
                };
                self.clip(&support.complement()).union(&small)
            }
        }
    }

    fn reaching(&self, j: usize, g: &Schedule) -> Result<PieceSet> {
        match self.rule(j)? {
            DiagonalRule::Scaled { c } => {
                linear_reaching(c.abs() * self.scale, 0.0, g, self.horizon)
            }
            DiagonalRule::GrowOn { support } => {
                let big = linear_reaching(j as f64 * self.scale, self.scale, g, self.horizon)?;
                self.clip(support).intersect(&big)
            }
        }
    }
}

/// Analytic level sets of `‖F_j^k (c·e_1)‖ = |c|·(w_1⋯w_k)^{±1}` for forward
/// shifts whose weights are runs of 2's and 1/2's.
#[derive(Clone, Debug)]
pub struct PrefixProductSets {
    pub blocks: BlockWeights,
    /// `+1` for the weights themselves, `−1` for their reciprocals.
    pub signs: Vec<i64>,
    pub coefficient: f64,
    pub horizon: u64,
}

impl PrefixProductSets {
    fn level(&self, j: usize, t: &dyn Fn(u64) -> f64) -> Result<PieceSet> {
        let sign = *self
            .signs
            .get(j.wrapping_sub(1))
            .ok_or_else(|| Error::InvalidInput(format!("family index {j} out of range")))?;
        let shift = self.coefficient.abs().log2();
        Ok(self
            .blocks
            .prefix_level_set(&|m| t(m) - shift, sign, self.horizon))
    }
}

impl OrbitSets for PrefixProductSets {
    fn families(&self) -> usize {
        self.signs.len()
    }

    fn horizon(&self) -> Option<u64> {
        Some(self.horizon)
    }

    fn below(&self, j: usize, t: f64) -> Result<PieceSet> {
        let lt = t.log2();
        Ok(self.level(j, &|_| lt)?.complement())
    }

    fn reaching(&self, j: usize, g: &Schedule) -> Result<PieceSet> {
        match g {
            Schedule::Exponential { base, .. } if *base >= 2.0 => {
                invalid("schedule grows too fast for run-wise level sets")
            }
            _ => self.level(j, &|m| g.at(m).log2()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitKind {
    NearZero,
    Unbounded,
}

/// One witness set and how its tail behaves.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitCheck {
    /// `None` for joint (∩/∪) checks.
    pub family: Option<usize>,
    pub witness: SetSummary,
    /// Past this index every witness member satisfies the bound; `None` when no tail does.
    pub threshold_index: Option<u64>,
    pub tail: SetVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub kind: LimitKind,
    pub vector_type: u8,
    pub holds: bool,
    pub checks: Vec<LimitCheck>,
}

/// Tail of the witness along which the bound holds, judged by the rule.
fn limit_check(
    family: Option<usize>,
    good: &PieceSet,
    witness: Option<&PieceSet>,
    rule: &DensityRule,
) -> Result<LimitCheck> {
    let w = witness.cloned().unwrap_or_else(|| good.clone());
    let bad = w.difference(good)?;
    let (k0, tail) = if !bad.is_finite() {
        (None, PieceSet::empty(w.horizon()))
    } else {
        let k0 = bad.last_member(u64::MAX).map_or(1, |k| k + 1);
        (Some(k0), w.intersect(&PieceSet::interval(k0, None, None))?)
    };
    Ok(LimitCheck {
        family,
        witness: w.summary(),
        threshold_index: k0,
        tail: rule.judge("tail", &tail)?,
    })
}

/// Classification parameters shared by the near-zero and unbounded checks.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassifyParams {
    pub tol_zero: f64,
    pub schedule: Schedule,
    pub rule: DensityRule,
    /// Supplied witness sets: one for joint types, one per `j` otherwise. Empty means the level sets.
    pub near_witness: Vec<PieceSet>,
    pub unbounded_witness: Vec<PieceSet>,
}

impl ClassifyParams {
    pub fn new(rule: DensityRule) -> Self {
        ClassifyParams {
            tol_zero: 1e-6,
            schedule: Schedule::LogOnePlus,
            rule,
            near_witness: Vec::new(),
            unbounded_witness: Vec::new(),
        }
    }
}

fn classify(
    kind: LimitKind,
    src: &dyn OrbitSets,
    ty: u8,
    level: &dyn Fn(usize) -> Result<PieceSet>,
    joint_sum: &dyn Fn() -> Result<PieceSet>,
    witness: &[PieceSet],
    rule: &DensityRule,
) -> Result<Classification> {
    let n = src.families();
    let pick = |i: usize| witness.get(i);
    let (holds, checks) = match ty {
        1 | 2 => {
            let good = if ty == 1 {
                PieceSet::intersect_all(&(1..=n).map(level).collect::<Result<Vec<_>>>()?)?
            } else {
                joint_sum()?
            };
            let c = limit_check(None, &good, pick(0), rule)?;
            (c.tail.passes, vec![c])
        }
        3 | 4 => {
            let cs = (1..=n)
                .map(|j| limit_check(Some(j), &level(j)?, pick(j - 1), rule))
                .collect::<Result<Vec<_>>>()?;
            let h = if ty == 3 {
                cs.iter().all(|c| c.tail.passes)
            } else {
                cs.iter().any(|c| c.tail.passes)
            };
            (h, cs)
        }
        _ => return invalid(format!("vector type {ty} outside 1..=4")),
    };
    Ok(Classification {
        kind,
        vector_type: ty,
        holds,
        checks,
    })
}

/// Near-zero of type 1 (`max_j → 0` on one set), 2 (`min_j → 0`, the union
/// of smallness sets), 3 (per `j`) or 4 (some `j`).
pub fn classify_near_zero(
    src: &dyn OrbitSets,
    ty: u8,
    params: &ClassifyParams,
) -> Result<Classification> {
    let tol = params.tol_zero;
    let level = |j: usize| src.below(j, tol);
    let union = || {
        PieceSet::union_all(
            &(1..=src.families())
                .map(|j| src.below(j, tol))
                .collect::<Result<Vec<_>>>()?,
        )
    };
    classify(
        LimitKind::NearZero,
        src,
        ty,
        &level,
        &union,
        &params.near_witness,
        &params.rule,
    )
}

/// Unbounded of type 1 (`min_j ≥ g` on one set), 2 (`Σ_j ≥ g`), 3 (per `j`) or 4 (some `j`).
pub fn classify_unbounded(
    src: &dyn OrbitSets,
    ty: u8,
    params: &ClassifyParams,
) -> Result<Classification> {
    let g = &params.schedule;
    let level = |j: usize| src.reaching(j, g);
    let sum = || src.sum_reaching(g);
    classify(
        LimitKind::Unbounded,
        src,
        ty,
        &level,
        &sum,
        &params.unbounded_witness,
        &params.rule,
    )
}

/// Type pairings as printed alongside the definition of irregular vectors.
const LITERAL_PAIRING: [(u8, u8); 12] = [
    (1, 1),
    (3, 1),
    (3, 3),
    (4, 3),
    (3, 4),
    (4, 1),
    (1, 2),
    (1, 4),
    (1, 2),
    (3, 2),
    (2, 1),
    (2, 3),
];

/// `(near-zero type, unbounded type)` read off the combinators of condition `i`.
pub fn irregular_pairing(i: u8) -> Result<(u8, u8)> {
    let spec = ConditionSpec::new(i)?;
    Ok((spec.lower.vector_type(), spec.upper.vector_type()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IrregularReport {
    pub condition: u8,
    pub pairing: (u8, u8),
    pub near_zero: Classification,
    pub unbounded: Classification,
    pub holds: bool,
    /// The printed pairing and its verdict, when it differs from the combinator reading.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub literal_pairing: Option<(u8, u8)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub literal_holds: Option<bool>,
}

/// Irregularity for condition `i`. `near` should come from min-selections
/// and `unbounded` from max-selections; for `i = 1` a single selection must
/// serve both, so `near` is used for both halves.
pub fn classify_irregular(
    near: &dyn OrbitSets,
    unbounded: &dyn OrbitSets,
    i: u8,
    params: &ClassifyParams,
) -> Result<IrregularReport> {
    let pairing = irregular_pairing(i)?;
    let unb_src = if i == 1 { near } else { unbounded };
    let nz = classify_near_zero(near, pairing.0, params)?;
    let ub = classify_unbounded(unb_src, pairing.1, params)?;
    let holds = nz.holds && ub.holds;
    let lit = LITERAL_PAIRING[i as usize - 1];
    let (literal_pairing, literal_holds) = if lit != pairing {
        let nz2 = classify_near_zero(near, lit.0, params)?;
        let ub2 = classify_unbounded(unb_src, lit.1, params)?;
        (Some(lit), Some(nz2.holds && ub2.holds))
    } else {
        (None, None)
    };
    Ok(IrregularReport {
        condition: i,
        pairing,
        near_zero: nz,
        unbounded: ub,
        holds,
        literal_pairing,
        literal_holds,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairVerdict {
    pub first: usize,
    pub second: usize,
    pub eps: f64,
    pub holds: bool,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScrambledReport {
    pub condition: u8,
    pub sigma: f64,
    pub holds: bool,
    pub pairs: Vec<PairVerdict>,
}

/// Scrambled-set check with level sets from any source.
pub fn verify_scrambled_with<'s>(
    points: &[Point],
    sources: impl Fn(&Point, &Point) -> Result<Box<dyn OrbitSets + 's>>,
    spec: ConditionSpec,
    sigma: f64,
    eps_list: &[f64],
    rule: &DensityRule,
) -> Result<ScrambledReport> {
    if points.len() < 2 {
        return invalid("a scrambled set needs at least two vectors");
    }
    if eps_list.is_empty() {
        return invalid("no ε values given");
    }
    for a in 0..points.len() {
        for b in a + 1..points.len() {
            if points[a] == points[b] {
                return invalid(format!("vectors {a} and {b} coincide"));
            }
        }
    }
    let mut pairs = Vec::new();
    for a in 0..points.len() {
        for b in a + 1..points.len() {
            let src = sources(&points[a], &points[b])?;
            for &eps in eps_list {
                let verdict = eval_condition(spec, &clause_sets(src.as_ref(), sigma, eps)?, rule)?;
                pairs.push(PairVerdict {
                    first: a,
                    second: b,
                    eps,
                    holds: verdict.holds,
                    verdict,
                });
            }
        }
    }
    Ok(ScrambledReport {
        condition: spec.index,
        sigma,
        holds: pairs.iter().all(|p| p.holds),
        pairs,
    })
}

/// Scrambled-set check on explicit traces of horizon `K`.
#[allow(clippy::too_many_arguments)]
pub fn verify_scrambled_set(
    points: &[Point],
    family: &dyn OrbitFamily,
    space: &SeminormSpace,
    metric: TraceMetric,
    spec: ConditionSpec,
    sigma: f64,
    eps_list: &[f64],
    horizon: u64,
    rule: &DensityRule,
    selection: SelectionMode,
) -> Result<ScrambledReport> {
    let cps = match rule {
        DensityRule::Checkpoints { checkpoints, .. } => checkpoints.clone(),
        DensityRule::Exact => return invalid("explicit traces are finite; use a checkpoint rule"),
    };
    verify_scrambled_with(
        points,
        |x, y| {
            Ok(Box::new(pair_trace(
                family,
                space,
                metric,
                x,
                y,
                horizon,
                &cps,
                selection,
                DEFAULT_CAP,
            )?) as Box<dyn OrbitSets>)
        },
        spec,
        sigma,
        eps_list,
        rule,
    )
}

/// `implication_lattice()[a][b]`: condition `a + 1` implies condition `b + 1`.
pub fn implication_lattice() -> [[bool; 12]; 12] {
    let direct: [&[usize]; 12] = [
        &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12],
        &[3, 4, 5, 6, 10, 11, 12],
        &[4, 5, 10, 12],
        &[12],
        &[10],
        &[4, 11, 12],
        &[3, 4, 5, 8, 9, 10, 12],
        &[5, 9, 10],
        &[10],
        &[],
        &[12],
        &[],
    ];
    let mut m = [[false; 12]; 12];
    for (a, row) in direct.iter().enumerate() {
        m[a][a] = true;
        for &b in *row {
            m[a][b - 1] = true;
        }
    }
    m
}

pub fn implies(a: u8, b: u8) -> Result<bool> {
    if !(1..=12).contains(&a) || !(1..=12).contains(&b) {
        return invalid("condition indices run from 1 to 12");
    }
    Ok(implication_lattice()[a as usize - 1][b as usize - 1])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LatticeReport {
    pub verdicts: Vec<bool>,
    pub violations: Vec<(u8, u8)>,
}

pub fn all_conditions(sets: &ClauseSets, rule: &DensityRule) -> Result<Vec<bool>> {
    ConditionSpec::all()
        .into_iter()
        .map(|s| Ok(eval_condition(s, sets, rule)?.holds))
        .collect()
}

/// Every lattice implication checked against the evaluators on one configuration.
pub fn lattice_consistency(sets: &ClauseSets, rule: &DensityRule) -> Result<LatticeReport> {
    let verdicts = all_conditions(sets, rule)?;
    let lat = implication_lattice();
    let mut violations = Vec::new();
    for a in 0..12 {
        for b in 0..12 {
            if lat[a][b] && verdicts[a] && !verdicts[b] {
                violations.push((a as u8 + 1, b as u8 + 1));
            }
        }
    }
    Ok(LatticeReport {
        verdicts,
        violations,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagonalReport {
    pub condition_9: bool,
    pub diagonal: bool,
    /// `{max_j s ≥ σ} = ∪_j U_j`.
    pub upper_identity: bool,
    /// `{max_j s < ε} = ∩_j L_j`.
    pub lower_identity: bool,
}

/// Condition 9 on the components against plain distributional chaos of the
/// tuple under the max product metric.
pub fn diagonal_equivalence(
    t: &TraceMatrix,
    sigma: f64,
    eps: f64,
    rule: &DensityRule,
) -> Result<DiagonalReport> {
    let sets = clause_sets(t, sigma, eps)?;
    let d = t.diagonal();
    let dsets = clause_sets(&d, sigma, eps)?;
    let k = t.len();
    let upper_identity = PieceSet::union_all(&sets.upper)?.bitmap(k) == dsets.upper[0].bitmap(k);
    let lower_identity =
        PieceSet::intersect_all(&sets.lower)?.bitmap(k) == dsets.lower[0].bitmap(k);
    let condition_9 = eval_condition(ConditionSpec::new(9)?, &sets, rule)?.holds;
    let diagonal = eval_condition(ConditionSpec::new(1)?, &dsets, rule)?.holds;
    Ok(DiagonalReport {
        condition_9,
        diagonal,
        upper_identity,
        lower_identity,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// One selection serves both clauses.
    Strict,
    /// Only separate selections for the two clauses pass.
    WeakOnly,
    Neither,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegimeReport {
    pub regime: Regime,
    pub weak: bool,
    /// Name of the single selection that passes, if any.
    pub strict_witness: Option<String>,
    pub tried: Vec<(String, bool)>,
}

/// Strict versus weak verdict for a dual trace. The weak verdict takes the
/// σ-clause from max-selections and the ε-clause from min-selections; the
/// strict one needs a single selection, tried as uniform min, uniform max and
/// each supplied schedule (max on the schedule set, min elsewhere).
pub fn strict_weak_verdict(
    t: &TraceMatrix,
    spec: ConditionSpec,
    sigma: f64,
    eps: f64,
    rule: &DensityRule,
    schedules: &[(String, PieceSet)],
) -> Result<RegimeReport> {
    if t.upper.is_none() {
        return invalid("strict/weak comparison needs a dual trace");
    }
    let weak = eval_condition(spec, &clause_sets(t, sigma, eps)?, rule)?.holds;
    let k = t.len();
    let mut candidates = vec![
        ("uniform_min".to_string(), PieceSet::empty(Some(k))),
        ("uniform_max".to_string(), PieceSet::universe(Some(k))),
    ];
    candidates.extend(schedules.iter().cloned());
    let mut tried = Vec::new();
    let mut strict_witness = None;
    for (name, set) in candidates {
        let single = t.select(&set);
        let ok = eval_condition(spec, &clause_sets(&single, sigma, eps)?, rule)?.holds;
        if ok && strict_witness.is_none() {
            strict_witness = Some(name.clone());
        }
        tried.push((name, ok));
    }
    let regime = match (strict_witness.is_some(), weak) {
        (true, _) => Regime::Strict,
        (false, true) => Regime::WeakOnly,
        (false, false) => Regime::Neither,
    };
    Ok(RegimeReport {
        regime,
        weak,
        strict_witness,
        tried,
    })
}
