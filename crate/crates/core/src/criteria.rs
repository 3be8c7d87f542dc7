//! Sufficient-condition checkers: orbit conditions on basis samples and on
//! zero sequences, summability heuristics, index interleaving, the jump-shift
//! chain recursion, Q-set density and growth of weighted translations.

use serde::{Deserialize, Serialize};

use crate::chaos::{
    classify_near_zero, orbit_trace, Classification, ClassifyParams, DensityRule, OrbitFamily,
    Schedule, SelectionMode, TraceMetric,
};
use crate::error::{invalid, Result};
use crate::indexset::{exact_upper_density, q_set, Density, ExactSet, PieceSet};
use crate::operators::{
    b_jk, translation_power, JumpShift, OperatorFamily, Regularizer, TranslationWeight,
    WeightSequence,
};
use crate::space::{luxemburg_norm, Point, SeminormSpace, SeqVector, YoungFunction};

/// How the per-`j` requirements combine.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Cap,
    Cup,
    Forall,
    Exists,
}

impl Variant {
    fn symbol(self) -> &'static str {
        match self {
            Variant::Cap => "∩",
            Variant::Cup => "∪",
            Variant::Forall => "∀",
            Variant::Exists => "∃",
        }
    }

    fn vector_type(self) -> u8 {
        match self {
            Variant::Cap => 1,
            Variant::Cup => 2,
            Variant::Forall => 3,
            Variant::Exists => 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionReport {
    pub name: String,
    pub passed: bool,
    pub status: String,
    pub evidence: Evidence,
}

impl CriterionReport {
    fn new(name: impl Into<String>, passed: bool, evidence: Evidence) -> Self {
        let status = if passed { "passed" } else { "failed" }.to_string();
        CriterionReport {
            name: name.into(),
            passed,
            status,
            evidence,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    ZeroOrbits {
        vectors: Vec<ZeroOrbitEvidence>,
    },
    Counts {
        rows: Vec<CountRow>,
    },
    Series(SeriesEvidence),
    Chain {
        n: u64,
        j: usize,
        k: u64,
        chain: Chain,
        coefficient: Option<f64>,
    },
    Density {
        density: String,
        required: String,
        set: ExactSet,
    },
    Growth {
        rows: Vec<GrowthRow>,
        coefficient_sum: f64,
        threshold_index: Vec<Option<u64>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroOrbitEvidence {
    pub vector: usize,
    pub passes: bool,
    /// Every orbit value vanishes from this index on.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vanishes_from: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<Classification>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct I0Params {
    pub horizon: u64,
    pub tol_zero: f64,
    pub delta: f64,
}

/// For each sampled vector, a density-one set along which the orbits tend
/// to 0, combined across `j` as the variant says. Orbits that vanish beyond
/// the support make the set cofinite and the check exact; otherwise the
/// trace up to the horizon is classified with the ratio at the horizon.
pub fn check_i0(
    family: &OperatorFamily,
    space: &SeminormSpace,
    variant: Variant,
    sample: &[SeqVector],
    params: I0Params,
) -> Result<CriterionReport> {
    if sample.is_empty() {
        return invalid("basis sample is empty");
    }
    let mut vectors = Vec::with_capacity(sample.len());
    for (i, x) in sample.iter().enumerate() {
        if let Some(m) = family.vanishes_after(x) {
            let zero = (1..=family.count())
                .map(|j| family.apply(j, m, x).map(|v| v.is_zero()))
                .collect::<Result<Vec<_>>>()?;
            if zero.iter().all(|z| *z) {
                let tail =
                    DensityRule::Exact.judge("cofinite", &PieceSet::interval(m, None, None))?;
                vectors.push(ZeroOrbitEvidence {
                    vector: i,
                    passes: tail.passes,
                    vanishes_from: Some(m),
                    classification: None,
                });
                continue;
            }
        }
        let t = orbit_trace(
            family,
            space,
            TraceMetric::Norm,
            &Point::Seq(x.clone()),
            params.horizon,
            &[params.horizon],
            SelectionMode::SingleValued,
        )?;
        let mut cp =
            ClassifyParams::new(DensityRule::checkpoints(vec![params.horizon], params.delta));
        cp.tol_zero = params.tol_zero;
        let c = classify_near_zero(&t, variant.vector_type(), &cp)?;
        vectors.push(ZeroOrbitEvidence {
            vector: i,
            passes: c.holds,
            vanishes_from: None,
            classification: Some(c),
        });
    }
    let passed = vectors.iter().all(|v| v.passes);
    Ok(CriterionReport::new(
        format!("I_{{0,{}}}", variant.symbol()),
        passed,
        Evidence::ZeroOrbits { vectors },
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountRow {
    pub l: u64,
    pub n_l: u64,
    /// Qualifying `k ≤ N_l`: one entry for ∩/∪, one per `j` otherwise.
    pub counts: Vec<u64>,
    pub required: f64,
    pub passes: bool,
}

/// For each `l`, the number of `k ≤ N_l` with `p_m(T_{j,k} y_l) > ε`
/// (quantified over `j` by the variant) against `N_l(1 − 1/l)`.
pub fn check_i_inf(
    family: &dyn OrbitFamily,
    space: &SeminormSpace,
    variant: Variant,
    y_seq: &[SeqVector],
    eps: f64,
    n_l: &[u64],
    m: u64,
) -> Result<CriterionReport> {
    if y_seq.is_empty() || y_seq.len() != n_l.len() {
        return invalid("need one N_l per vector y_l");
    }
    if n_l.windows(2).any(|w| w[0] >= w[1]) || n_l[0] == 0 {
        return invalid("N_l must be positive and strictly increasing");
    }
    if !(eps > 0.0) {
        return invalid("ε must be positive");
    }
    let mut rows = Vec::with_capacity(y_seq.len());
    for (i, (y, &nl)) in y_seq.iter().zip(n_l).enumerate() {
        let l = i as u64 + 1;
        let t = orbit_trace(
            family,
            space,
            TraceMetric::Seminorm { m },
            &Point::Seq(y.clone()),
            nl,
            &[nl],
            SelectionMode::SingleValued,
        )?;
        let big = |j: usize, k: u64| t.value(j, k) > eps;
        let jn = t.families();
        let counts: Vec<u64> = match variant {
            Variant::Cap => vec![(1..=nl).filter(|&k| (1..=jn).all(|j| big(j, k))).count() as u64],
            Variant::Cup => vec![(1..=nl).filter(|&k| (1..=jn).any(|j| big(j, k))).count() as u64],
            Variant::Forall | Variant::Exists => (1..=jn)
                .map(|j| (1..=nl).filter(|&k| big(j, k)).count() as u64)
                .collect(),
        };
        let required = nl as f64 * (1.0 - 1.0 / l as f64);
        let ok = |c: &u64| *c as f64 >= required;
        let passes = if variant == Variant::Exists {
            counts.iter().any(ok)
        } else {
            counts.iter().all(ok)
        };
        rows.push(CountRow {
            l,
            n_l: nl,
            counts,
            required,
            passes,
        });
    }
    let passed = rows.iter().all(|r| r.passes);
    Ok(CriterionReport::new(
        format!("I_{{∞,{}}}", variant.symbol()),
        passed,
        Evidence::Counts { rows },
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesStatus {
    #[serde(rename = "converged (heuristic)")]
    Converged,
    Diverged,
    Inconclusive,
}

impl SeriesStatus {
    pub fn label(self) -> &'static str {
        match self {
            SeriesStatus::Converged => "converged (heuristic)",
            SeriesStatus::Diverged => "diverged",
            SeriesStatus::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesEvidence {
    pub partial_sum: f64,
    pub window: (u64, u64),
    pub window_sum: f64,
    /// `½·ln(end/start)`: a window sum this large looks harmonic or worse.
    pub divergence_bound: f64,
    /// Geometric ratio fitted to the window's increments.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub remainder: Option<f64>,
    pub tail: Vec<f64>,
    pub status: SeriesStatus,
}

const REMAINDER_TOL: f64 = 1e-6;

/// Verdict on `Σ_{k ≥ 1} inc[k−1]` from its first `inc.len()` terms.
pub fn series_verdict(inc: &[f64], tail_window: usize) -> Result<SeriesEvidence> {
    if inc.is_empty() || tail_window < 2 || tail_window > inc.len() {
        return invalid("tail window must hold at least two of the computed terms");
    }
    if inc.iter().any(|v| !(*v >= 0.0) || v.is_infinite()) {
        return invalid("series terms must be finite and nonnegative");
    }
    let n_end = inc.len() as u64;
    let n_start = n_end - tail_window as u64 + 1;
    let tail = inc[inc.len() - tail_window..].to_vec();
    let partial_sum: f64 = inc.iter().sum();
    let window_sum: f64 = tail.iter().sum();
    let divergence_bound = 0.5 * (n_end as f64 / n_start as f64).ln();
    let (ratio, remainder) = if tail.iter().all(|v| *v == 0.0) {
        (Some(0.0), Some(0.0))
    } else {
        // least squares slope of ln inc against k over the positive terms
        let pts: Vec<(f64, f64)> = tail
            .iter()
            .enumerate()
            .filter(|(_, v)| **v > 0.0)
            .map(|(i, v)| ((n_start + i as u64) as f64, v.ln()))
            .collect();
        if pts.len() < 2 {
            (None, None)
        } else {
            let n = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
            let r = (sxy / sxx).exp();
            let last = *tail.last().expect("nonempty");
            (Some(r), (r < 1.0).then(|| last * r / (1.0 - r)))
        }
    };
    let status = if window_sum >= divergence_bound && divergence_bound > 0.0 {
        SeriesStatus::Diverged
    } else if ratio.is_some_and(|r| r < 1.0)
        && remainder.is_some_and(|rem| rem < REMAINDER_TOL * partial_sum.max(1.0))
    {
        SeriesStatus::Converged
    } else {
        SeriesStatus::Inconclusive
    };
    Ok(SeriesEvidence {
        partial_sum,
        window: (n_start, n_end),
        window_sum,
        divergence_bound,
        ratio,
        remainder,
        tail,
        status,
    })
}

fn series_report(name: &str, ev: SeriesEvidence) -> CriterionReport {
    let status = ev.status;
    CriterionReport {
        name: name.into(),
        passed: status == SeriesStatus::Converged,
        status: status.label().into(),
        evidence: Evidence::Series(ev),
    }
}

/// Partial sums of `1/values(k)^power` for `k ≤ horizon`.
pub fn summability_test(
    values: &dyn Fn(u64) -> f64,
    power: u32,
    horizon: u64,
    tail_window: usize,
) -> Result<CriterionReport> {
    if !(power == 1 || power == 2) {
        return invalid("power must be 1 or 2");
    }
    let mut inc = Vec::with_capacity(horizon as usize);
    for k in 1..=horizon {
        let v = values(k);
        if !(v > 0.0) {
            return invalid(format!("value at k = {k} is not positive"));
        }
        inc.push(1.0 / v.powi(power as i32));
    }
    Ok(series_report(
        "summability",
        series_verdict(&inc, tail_window)?,
    ))
}

/// `Σ_k 1/B_{j,k}` for the regularized shift with weights `w`.
pub fn b_jk_summability(
    w: &WeightSequence,
    a: &Regularizer,
    n_horizon: u64,
    k_max: u64,
    tail_window: usize,
) -> Result<CriterionReport> {
    let mut r = summability_test(&|k| b_jk(w, a, k, n_horizon), 1, k_max, tail_window)?;
    r.name = "B_jk_summability".into();
    Ok(r)
}

/// `j + (k − 1)·N`.
pub fn interleave_index(j: u64, k: u64, n: u64) -> Result<u64> {
    if n == 0 || j == 0 || j > n || k == 0 {
        return invalid("need 1 ≤ j ≤ N and k ≥ 1");
    }
    (k - 1)
        .checked_mul(n)
        .and_then(|v| v.checked_add(j))
        .ok_or_else(|| crate::Error::InvalidInput("index overflows".into()))
}

/// Inverse of [`interleave_index`]; `j = N` when `N` divides the index.
pub fn deinterleave(index: u64, n: u64) -> Result<(u64, u64)> {
    if n == 0 || index == 0 {
        return invalid("need N ≥ 1 and index ≥ 1");
    }
    Ok(((index - 1) % n + 1, (index - 1) / n + 1))
}

/// Preimage chain `c_1(n, j), c_2, …` of the jump map `i ↦ i + a(i, j)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Chain {
    /// All `k` steps exist and the last lands on 1.
    Reached { chain: Vec<u64> },
    /// All `k` steps exist but the last is not 1.
    Missed { chain: Vec<u64> },
    /// No preimage at `step` (1-based).
    Stalled { step: u64, partial: Vec<u64> },
}

impl Chain {
    pub fn steps(&self) -> &[u64] {
        match self {
            Chain::Reached { chain } | Chain::Missed { chain } => chain,
            Chain::Stalled { partial, .. } => partial,
        }
    }
}

pub fn chain_recursion(op: &JumpShift, n: u64, j: usize, k: u64) -> Chain {
    let mut chain = Vec::with_capacity(k as usize);
    let mut cur = n;
    for step in 1..=k {
        match op.preimage(cur, j) {
            Some(i) => {
                chain.push(i);
                cur = i;
            }
            None => {
                return Chain::Stalled {
                    step,
                    partial: chain,
                }
            }
        }
    }
    if cur == 1 {
        Chain::Reached { chain }
    } else {
        Chain::Missed { chain }
    }
}

/// Whether `B_j^k (b_n e_n) = e_1`: the chain reaches 1 and the weights along it multiply to `1/b_n`.
pub fn p_membership(op: &JumpShift, n: u64, j: usize, k: u64, b_n: f64) -> CriterionReport {
    let chain = chain_recursion(op, n, j, k);
    let coefficient = match &chain {
        Chain::Reached { chain } => {
            Some(b_n * chain.iter().map(|&c| op.weight(c, j)).product::<f64>())
        }
        _ => None,
    };
    let passed = coefficient.is_some_and(|c| (c - 1.0).abs() <= 1e-12);
    CriterionReport::new(
        "P_chain",
        passed,
        Evidence::Chain {
            n,
            j,
            k,
            chain,
            coefficient,
        },
    )
}

/// Exact density of `{k : r_j·k − 1 ∈ S for all j}` against `required`.
pub fn q_density_criterion(s: &ExactSet, r: &[u64], required: Density) -> Result<CriterionReport> {
    let q = q_set(s, r)?;
    let d = exact_upper_density(&q)?;
    Ok(CriterionReport::new(
        "Q_density",
        d >= required,
        Evidence::Density {
            density: d.to_string(),
            required: required.to_string(),
            set: q,
        },
    ))
}

/// Norm used for translation orbits on ℤ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrbitNorm {
    Luxemburg { phi: YoungFunction },
    Lp { p: f64 },
}

impl OrbitNorm {
    fn eval(&self, f: &SeqVector) -> Result<f64> {
        match self {
            OrbitNorm::Luxemburg { phi } => luxemburg_norm(f, phi, 1e-12),
            OrbitNorm::Lp { p } => SeminormSpace::new(
                crate::SeminormKind::Lp { p: *p },
                crate::IndexDomain::Integer,
            )?
            .seminorm(1, f),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthRow {
    pub j: usize,
    pub n: u64,
    pub norm: f64,
    pub bound: f64,
}

/// Growth of `T_j^n g` along `B`, where `g = Σ_{k ∈ B, k ≤ horizon} c_k·χ_K`.
/// Family `j` passes when, from some index at most `horizon/2` on, every
/// `n ∈ B` up to the horizon has norm at least `schedule(n)`.
#[allow(clippy::too_many_arguments)]
pub fn qwea_condition(
    c: &dyn Fn(u64) -> f64,
    b: &PieceSet,
    k_support: &[i64],
    steps: &[(i64, TranslationWeight)],
    norm: &OrbitNorm,
    horizon: u64,
    schedule: &Schedule,
) -> Result<CriterionReport> {
    if k_support.is_empty() || steps.is_empty() || horizon < 2 {
        return invalid("need a nonempty support, at least one translation and horizon ≥ 2");
    }
    let members: Vec<u64> = (1..=horizon).filter(|&k| b.contains(k)).collect();
    let inc: Vec<f64> = members.iter().map(|&k| c(k).abs()).collect();
    if inc.iter().any(|v| !v.is_finite()) {
        return invalid("coefficients must be finite");
    }
    if inc.len() >= 2 {
        let ev = series_verdict(&inc, (inc.len() / 4).max(2))?;
        if ev.status == SeriesStatus::Diverged {
            return invalid("coefficients are not absolutely summable");
        }
    }
    let coefficient_sum: f64 = members.iter().map(|&k| c(k)).sum();
    let mut chi = SeqVector::zeros(crate::IndexDomain::Integer);
    for &x in k_support {
        chi.set(x, coefficient_sum)?;
    }
    let mut rows = Vec::new();
    let mut thresholds = Vec::new();
    for (j, (a, w)) in steps.iter().enumerate() {
        let mut ok = Vec::with_capacity(members.len());
        for &n in &members {
            let value = norm.eval(&translation_power(*a, w, n, &chi))?;
            let bound = schedule.at(n);
            ok.push(value >= bound);
            rows.push(GrowthRow {
                j: j + 1,
                n,
                norm: value,
                bound,
            });
        }
        // first member after the last failure
        let k0 = match ok.iter().rposition(|o| !o) {
            None => Some(members.first().copied().unwrap_or(1)),
            Some(i) => members.get(i + 1).copied(),
        };
        thresholds.push(k0.filter(|&k| k <= horizon / 2));
    }
    let passed = thresholds.iter().all(Option::is_some);
    Ok(CriterionReport::new(
        "qwea",
        passed,
        Evidence::Growth {
            rows,
            coefficient_sum,
            threshold_index: thresholds,
        },
    ))
}
