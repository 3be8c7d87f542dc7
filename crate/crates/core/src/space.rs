//! Sparse sequences, grid functions, seminorm families, Young functions and
//! the metrics built from them.

use std::collections::BTreeMap;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Stopping tolerance used when a seminorm call needs a Luxemburg norm.
pub const LUXEMBURG_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexDomain {
    Natural,
    Integer,
}

impl IndexDomain {
    pub fn admits(self, index: i64) -> bool {
        match self {
            IndexDomain::Natural => index >= 1,
            IndexDomain::Integer => true,
        }
    }
}

/// Finitely supported scalar sequence. Zero entries are never stored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "VectorLiteral", try_from = "VectorLiteral")]
pub struct SeqVector {
    domain: IndexDomain,
    entries: BTreeMap<i64, f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct VectorLiteral {
    domain: IndexDomain,
    entries: Vec<(i64, f64)>,
}

impl From<SeqVector> for VectorLiteral {
    fn from(v: SeqVector) -> Self {
        VectorLiteral {
            domain: v.domain,
            entries: v.entries.into_iter().collect(),
        }
    }
}

impl TryFrom<VectorLiteral> for SeqVector {
    type Error = crate::Error;
    fn try_from(lit: VectorLiteral) -> Result<Self> {
        SeqVector::from_pairs(lit.domain, lit.entries)
    }
}

impl SeqVector {
    pub fn zeros(domain: IndexDomain) -> Self {
        SeqVector {
            domain,
            entries: BTreeMap::new(),
        }
    }

    /// Builds a vector from `(index, value)` pairs; repeated indices are summed.
    pub fn from_pairs(
        domain: IndexDomain,
        pairs: impl IntoIterator<Item = (i64, f64)>,
    ) -> Result<Self> {
        let mut v = SeqVector::zeros(domain);
        for (i, x) in pairs {
            if !domain.admits(i) {
                return invalid(format!("index {i} outside the {domain:?} domain"));
            }
            if !x.is_finite() {
                return invalid(format!("non-finite entry at index {i}"));
            }
            let cur = v.get(i);
            v.put(i, cur + x);
        }
        Ok(v)
    }

    /// Natural-domain vector with entries `values[0]` at index 1, `values[1]` at index 2, ...
    pub fn from_dense(values: &[f64]) -> Self {
        let mut v = SeqVector::zeros(IndexDomain::Natural);
        for (i, &x) in values.iter().enumerate() {
            v.put(i as i64 + 1, x);
        }
        v
    }

    /// The basis vector e_n of the natural domain.
    pub fn basis(n: i64) -> Self {
        assert!(n >= 1, "basis index must be positive");
        let mut v = SeqVector::zeros(IndexDomain::Natural);
        v.put(n, 1.0);
        v
    }

    pub fn integer_basis(n: i64) -> Self {
        let mut v = SeqVector::zeros(IndexDomain::Integer);
        v.put(n, 1.0);
        v
    }

    pub fn domain(&self) -> IndexDomain {
        self.domain
    }

    pub fn get(&self, i: i64) -> f64 {
        self.entries.get(&i).copied().unwrap_or(0.0)
    }

    pub(crate) fn put(&mut self, i: i64, x: f64) {
        if x == 0.0 {
            self.entries.remove(&i);
        } else {
            self.entries.insert(i, x);
        }
    }

    pub fn set(&mut self, i: i64, x: f64) -> Result<()> {
        if !self.domain.admits(i) {
            return invalid(format!("index {i} outside the {:?} domain", self.domain));
        }
        self.put(i, x);
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + Clone + '_ {
        self.entries.iter().map(|(&i, &x)| (i, x))
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn support_max(&self) -> Option<i64> {
        self.entries.keys().next_back().copied()
    }

    pub fn support_min(&self) -> Option<i64> {
        self.entries.keys().next().copied()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.values().fold(0.0, |m, x| m.max(x.abs()))
    }

    fn combined_domain(&self, other: &SeqVector) -> IndexDomain {
        if self.domain == IndexDomain::Integer || other.domain == IndexDomain::Integer {
            IndexDomain::Integer
        } else {
            IndexDomain::Natural
        }
    }

    /// `a·self + b·other`.
    pub fn lin_comb(&self, a: f64, other: &SeqVector, b: f64) -> SeqVector {
        let mut out = SeqVector::zeros(self.combined_domain(other));
        for (i, x) in self.iter() {
            out.put(i, a * x);
        }
        for (i, y) in other.iter() {
            let cur = out.get(i);
            out.put(i, cur + b * y);
        }
        out
    }

    pub fn add(&self, other: &SeqVector) -> SeqVector {
        self.lin_comb(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &SeqVector) -> SeqVector {
        self.lin_comb(1.0, other, -1.0)
    }

    pub fn scale(&self, c: f64) -> SeqVector {
        let mut out = SeqVector::zeros(self.domain);
        for (i, x) in self.iter() {
            out.put(i, c * x);
        }
        out
    }

    /// Largest absolute entry difference, used for approximate comparisons.
    pub fn max_abs_diff(&self, other: &SeqVector) -> f64 {
        self.sub(other).max_abs()
    }
}

/// Function on the grid `step·ℤ` with finitely many nonzero samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "GridLiteral", try_from = "GridLiteral")]
pub struct GridFunction {
    step: Ratio<i64>,
    samples: BTreeMap<i64, f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct GridLiteral {
    step: (i64, i64),
    samples: Vec<(i64, f64)>,
}

impl From<GridFunction> for GridLiteral {
    fn from(f: GridFunction) -> Self {
        GridLiteral {
            step: (*f.step.numer(), *f.step.denom()),
            samples: f.samples.into_iter().collect(),
        }
    }
}

impl TryFrom<GridLiteral> for GridFunction {
    type Error = crate::Error;
    fn try_from(lit: GridLiteral) -> Result<Self> {
        if lit.step.1 == 0 {
            return invalid("grid step has zero denominator");
        }
        let mut f = GridFunction::new(Ratio::new(lit.step.0, lit.step.1))?;
        for (i, x) in lit.samples {
            f.set_index(i, x);
        }
        Ok(f)
    }
}

impl GridFunction {
    pub fn new(step: Ratio<i64>) -> Result<Self> {
        if step <= Ratio::from_integer(0) {
            return invalid("grid step must be positive");
        }
        Ok(GridFunction {
            step,
            samples: BTreeMap::new(),
        })
    }

    /// Empty function on the default grid of step 1/8.
    pub fn default_grid() -> Self {
        GridFunction {
            step: Ratio::new(1, 8),
            samples: BTreeMap::new(),
        }
    }

    pub fn step(&self) -> Ratio<i64> {
        self.step
    }

    pub fn point(&self, index: i64) -> Ratio<i64> {
        self.step * index
    }

    pub fn set_index(&mut self, index: i64, x: f64) {
        if x == 0.0 {
            self.samples.remove(&index);
        } else {
            self.samples.insert(index, x);
        }
    }

    /// Sets the sample at grid point `t`; `t` must be a multiple of the step.
    pub fn set(&mut self, t: Ratio<i64>, x: f64) -> Result<()> {
        let q = t / self.step;
        if !q.is_integer() {
            return invalid(format!("{t} is not a grid point"));
        }
        self.set_index(q.to_integer(), x);
        Ok(())
    }

    pub fn value_at_index(&self, index: i64) -> f64 {
        self.samples.get(&index).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Ratio<i64>, f64)> + '_ {
        self.samples.iter().map(move |(&i, &x)| (self.step * i, x))
    }

    pub fn index_iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.samples.iter().map(|(&i, &x)| (i, x))
    }

    /// `sup |f|` over grid points in `[lo, hi]`.
    pub fn sup_on(&self, lo: Ratio<i64>, hi: Ratio<i64>) -> f64 {
        self.iter()
            .filter(|(t, _)| *t >= lo && *t <= hi)
            .fold(0.0, |m, (_, x)| m.max(x.abs()))
    }

    pub fn lin_comb(&self, a: f64, other: &GridFunction, b: f64) -> Result<GridFunction> {
        if self.step != other.step {
            return invalid("grid functions on different grids");
        }
        let mut out = GridFunction {
            step: self.step,
            samples: BTreeMap::new(),
        };
        for (i, x) in self.index_iter() {
            out.set_index(i, a * x);
        }
        for (i, y) in other.index_iter() {
            let cur = out.value_at_index(i);
            out.set_index(i, cur + b * y);
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Either kind of vector a seminorm space can measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Point {
    Seq(SeqVector),
    Grid(GridFunction),
}

impl Point {
    pub fn lin_comb(&self, a: f64, other: &Point, b: f64) -> Result<Point> {
        match (self, other) {
            (Point::Seq(x), Point::Seq(y)) => Ok(Point::Seq(x.lin_comb(a, y, b))),
            (Point::Grid(f), Point::Grid(g)) => Ok(Point::Grid(f.lin_comb(a, g, b)?)),
            _ => invalid("cannot combine a sequence with a grid function"),
        }
    }

    pub fn sub(&self, other: &Point) -> Result<Point> {
        self.lin_comb(1.0, other, -1.0)
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Point::Seq(x) => x.is_zero(),
            Point::Grid(f) => f.is_zero(),
        }
    }
}

/// Positive weight sequence `a_n` of a weighted ℓ^p space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weights {
    /// `a_n = n^{-s}`.
    PowerDecay { s: f64 },
    /// `a_n = values[n-1]` for `n ≤ len`, `tail` afterwards.
    Table { values: Vec<f64>, tail: f64 },
}

impl Weights {
    pub fn at(&self, n: i64) -> f64 {
        match self {
            Weights::PowerDecay { s } => (n as f64).powf(-s),
            Weights::Table { values, tail } => {
                if n >= 1 && (n as usize) <= values.len() {
                    values[n as usize - 1]
                } else {
                    *tail
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Weights::PowerDecay { s } if s.is_finite() => Ok(()),
            Weights::Table { values, tail }
                if values
                    .iter()
                    .chain([tail])
                    .all(|w| *w > 0.0 && w.is_finite()) =>
            {
                Ok(())
            }
            _ => invalid("weights must be positive and finite"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum YoungFunction {
    /// `Φ(t) = |t|^p / p`.
    Power { p: f64 },
    /// `Φ(t) = |t|^α (1 + |log|t||)`.
    LogPower { alpha: f64 },
    /// Piecewise linear through `(t, Φ(t))` samples starting at `(0, 0)`,
    /// extended linearly past the last sample.
    Table { points: Vec<(f64, f64)> },
}

impl YoungFunction {
    pub fn eval(&self, t: f64) -> f64 {
        let t = t.abs();
        match self {
            YoungFunction::Power { p } => {
                if p.fract() == 0.0 && *p <= 64.0 {
                    t.powi(*p as i32) / p
                } else {
                    t.powf(*p) / p
                }
            }
            YoungFunction::LogPower { alpha } => {
                if t == 0.0 {
                    0.0
                } else {
                    t.powf(*alpha) * (1.0 + t.ln().abs())
                }
            }
            YoungFunction::Table { points } => {
                let idx = points.partition_point(|(x, _)| *x <= t);
                let (a, b) = if idx >= points.len() {
                    (points[points.len() - 2], points[points.len() - 1])
                } else {
                    (points[idx - 1], points[idx])
                };
                a.1 + (b.1 - a.1) * (t - a.0) / (b.0 - a.0)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            YoungFunction::Power { p } if *p >= 1.0 && p.is_finite() => Ok(()),
            YoungFunction::Power { .. } => invalid("power Young function needs p ≥ 1"),
            YoungFunction::LogPower { alpha } if *alpha > 1.0 && alpha.is_finite() => Ok(()),
            YoungFunction::LogPower { .. } => invalid("log-power Young function needs α > 1"),
            YoungFunction::Table { points } => {
                if points.len() < 2 || points[0] != (0.0, 0.0) {
                    return invalid("table must start at (0, 0) and have at least two points");
                }
                let mut last_slope = 0.0;
                for w in points.windows(2) {
                    let (a, b) = (w[0], w[1]);
                    if b.0 <= a.0 || b.1 <= 0.0 {
                        return invalid("table abscissae must increase and values be positive");
                    }
                    let slope = (b.1 - a.1) / (b.0 - a.0);
                    if slope < last_slope - 1e-12 * slope.abs().max(1.0) {
                        return invalid("table is not convex");
                    }
                    last_slope = slope;
                }
                if last_slope <= 0.0 {
                    return invalid("table must grow without bound");
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeminormKind {
    Lp {
        p: f64,
    },
    C0,
    WeightedLp {
        p: f64,
        weights: Weights,
    },
    /// `p_m(x) = sup_{|i| ≤ m} |x_i|`.
    FrechetTruncation,
    /// `p_m(f) = sup_{[-m, m]} |f|` on grid functions.
    GridSup,
    Orlicz {
        phi: YoungFunction,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeminormSpace {
    pub kind: SeminormKind,
    pub domain: IndexDomain,
}

impl SeminormSpace {
    pub fn new(kind: SeminormKind, domain: IndexDomain) -> Result<Self> {
        match &kind {
            SeminormKind::Lp { p } | SeminormKind::WeightedLp { p, .. }
                if !(*p >= 1.0 && p.is_finite()) =>
            {
                return invalid("ℓ^p needs finite p ≥ 1")
            }
            SeminormKind::WeightedLp { weights, .. } => weights.validate()?,
            SeminormKind::Orlicz { phi } => phi.validate()?,
            _ => {}
        }
        Ok(SeminormSpace { kind, domain })
    }

    pub fn lp(p: f64) -> Self {
        SeminormSpace::new(SeminormKind::Lp { p }, IndexDomain::Natural).expect("p ≥ 1")
    }

    pub fn c0() -> Self {
        SeminormSpace {
            kind: SeminormKind::C0,
            domain: IndexDomain::Natural,
        }
    }

    pub fn frechet(domain: IndexDomain) -> Self {
        SeminormSpace {
            kind: SeminormKind::FrechetTruncation,
            domain,
        }
    }

    pub fn grid_sup() -> Self {
        SeminormSpace {
            kind: SeminormKind::GridSup,
            domain: IndexDomain::Integer,
        }
    }

    /// Whether the space is described by a countable family `p_m` rather than one norm.
    pub fn is_frechet(&self) -> bool {
        matches!(
            self.kind,
            SeminormKind::FrechetTruncation | SeminormKind::GridSup
        )
    }

    fn check_domain(&self, v: &SeqVector) -> Result<()> {
        if self.domain == IndexDomain::Natural
            && v.domain() == IndexDomain::Integer
            && v.support_min().is_some_and(|i| i < 1)
        {
            return invalid("ℤ-indexed vector in an ℕ-indexed space");
        }
        Ok(())
    }

    /// `p_m(v)`; norm kinds ignore `m`.
    pub fn seminorm(&self, m: u64, v: &SeqVector) -> Result<f64> {
        if m == 0 {
            return invalid("seminorm index starts at 1");
        }
        self.check_domain(v)?;
        Ok(match &self.kind {
            SeminormKind::Lp { p } => lp_norm(v.iter().map(|(_, x)| x), *p),
            SeminormKind::C0 => v.max_abs(),
            SeminormKind::WeightedLp { p, weights } => {
                lp_norm(v.iter().map(|(i, x)| x * weights.at(i)), *p)
            }
            SeminormKind::FrechetTruncation => {
                let m = m.min(i64::MAX as u64) as i64;
                v.iter()
                    .filter(|(i, _)| i.abs() <= m)
                    .fold(0.0, |acc, (_, x)| acc.max(x.abs()))
            }
            SeminormKind::GridSup => return invalid("grid seminorm applied to a sequence"),
            SeminormKind::Orlicz { phi } => luxemburg_norm(v, phi, LUXEMBURG_TOL)?,
        })
    }

    pub fn grid_seminorm(&self, m: u64, f: &GridFunction) -> Result<f64> {
        if m == 0 {
            return invalid("seminorm index starts at 1");
        }
        match self.kind {
            SeminormKind::GridSup => {
                let m = Ratio::from_integer(m as i64);
                Ok(f.sup_on(-m, m))
            }
            _ => invalid("sequence seminorm applied to a grid function"),
        }
    }

    pub fn point_seminorm(&self, m: u64, v: &Point) -> Result<f64> {
        match v {
            Point::Seq(x) => self.seminorm(m, x),
            Point::Grid(f) => self.grid_seminorm(m, f),
        }
    }

    /// Metric distance: the truncated Fréchet metric for seminorm families,
    /// the norm of the difference otherwise.
    pub fn distance(&self, x: &Point, y: &Point, tol: f64) -> Result<f64> {
        let diff = x.sub(y)?;
        if self.is_frechet() {
            frechet_sum(tol, |n| self.point_seminorm(n, &diff))
        } else {
            self.point_seminorm(1, &diff)
        }
    }
}

fn lp_norm(values: impl Iterator<Item = f64> + Clone, p: f64) -> f64 {
    let scale = values.clone().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let s: f64 = values.map(|x| (x.abs() / scale).powf(p)).sum();
    scale * s.powf(1.0 / p)
}

/// Number of terms kept in the Fréchet sum so that the tail is below `tol`.
pub fn truncation_terms(tol: f64) -> u64 {
    (1.0 / tol).log2().ceil().max(1.0) as u64
}

/// `Σ_{n ≤ M} 2^{-n} p_n / (1 + p_n)` with `M = ⌈log2(1/tol)⌉`.
pub fn frechet_sum(tol: f64, mut p: impl FnMut(u64) -> Result<f64>) -> Result<f64> {
    if !(tol > 0.0) {
        return invalid("tolerance must be positive");
    }
    let mut total = 0.0;
    let mut w = 1.0;
    for n in 1..=truncation_terms(tol) {
        w *= 0.5;
        let v = p(n)?;
        total += w * if v.is_infinite() { 1.0 } else { v / (1.0 + v) };
    }
    Ok(total)
}

pub fn frechet_metric(
    space: &SeminormSpace,
    x: &SeqVector,
    y: &SeqVector,
    tol: f64,
) -> Result<f64> {
    if !space.is_frechet() {
        return invalid("space has no countable seminorm family");
    }
    let diff = x.sub(y);
    frechet_sum(tol, |n| space.seminorm(n, &diff))
}

pub fn frechet_metric_grid(
    space: &SeminormSpace,
    f: &GridFunction,
    g: &GridFunction,
    tol: f64,
) -> Result<f64> {
    if !space.is_frechet() {
        return invalid("space has no countable seminorm family");
    }
    let diff = f.lin_comb(1.0, g, -1.0)?;
    frechet_sum(tol, |n| space.grid_seminorm(n, &diff))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// `rhs − lhs`.
    pub slack: f64,
}

impl InequalityCheck {
    fn new(lhs: f64, rhs: f64) -> Self {
        InequalityCheck {
            lhs,
            rhs,
            holds: lhs <= rhs + 1e-12,
            slack: rhs - lhs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricPropertiesReport {
    /// `d(x+u, y+v) ≤ d(x,y) + d(u,v)`.
    pub triangle: InequalityCheck,
    /// `d(cx, cy) ≤ (|c|+1) d(x,y)`.
    pub scaling: InequalityCheck,
    /// `|α−β|/(1+|α−β|) · d(0,x) ≤ d(αx, βx)`.
    pub separation: InequalityCheck,
}

impl MetricPropertiesReport {
    pub fn all_hold(&self) -> bool {
        self.triangle.holds && self.scaling.holds && self.separation.holds
    }
}

#[allow(clippy::too_many_arguments)]
pub fn metric_properties_check(
    space: &SeminormSpace,
    x: &SeqVector,
    y: &SeqVector,
    u: &SeqVector,
    v: &SeqVector,
    alpha: f64,
    beta: f64,
    c: f64,
    tol: f64,
) -> Result<MetricPropertiesReport> {
    let d = |a: &SeqVector, b: &SeqVector| {
        space.distance(&Point::Seq(a.clone()), &Point::Seq(b.clone()), tol)
    };
    let zero = SeqVector::zeros(x.domain());
    let triangle = InequalityCheck::new(d(&x.add(u), &y.add(v))?, d(x, y)? + d(u, v)?);
    let scaling = InequalityCheck::new(d(&x.scale(c), &y.scale(c))?, (c.abs() + 1.0) * d(x, y)?);
    let gap = (alpha - beta).abs();
    let separation = InequalityCheck::new(
        gap / (1.0 + gap) * d(&zero, x)?,
        d(&x.scale(alpha), &x.scale(beta))?,
    );
    Ok(MetricPropertiesReport {
        triangle,
        scaling,
        separation,
    })
}

pub fn product_metric_max(dists: &[f64]) -> Result<f64> {
    if dists.is_empty() {
        return invalid("product metric over an empty family");
    }
    Ok(dists.iter().copied().fold(0.0, f64::max))
}

/// Fréchet metric on `Y^N` built from the summed seminorms `Σ_j p_n(x_j − y_j)`.
pub fn product_metric_sum(
    space: &SeminormSpace,
    xs: &[SeqVector],
    ys: &[SeqVector],
    tol: f64,
) -> Result<f64> {
    if xs.len() != ys.len() || xs.is_empty() {
        return invalid("component lists must be nonempty and of equal length");
    }
    if !space.is_frechet() {
        return invalid("space has no countable seminorm family");
    }
    let diffs: Vec<SeqVector> = xs.iter().zip(ys).map(|(x, y)| x.sub(y)).collect();
    frechet_sum(tol, |n| diffs.iter().map(|d| space.seminorm(n, d)).sum())
}

/// `inf{k > 0 : Σ Φ(|f(x)|/k) ≤ 1}` for counting measure, by bisection.
pub fn luxemburg_norm(f: &SeqVector, phi: &YoungFunction, tol: f64) -> Result<f64> {
    phi.validate()?;
    if !(tol > 0.0) {
        return invalid("tolerance must be positive");
    }
    if f.is_zero() {
        return Ok(0.0);
    }
    let modular = |k: f64| -> f64 { f.iter().map(|(_, x)| phi.eval(x.abs() / k)).sum() };
    let start = f.max_abs();
    let (mut lo, mut hi) = (start, start);
    if modular(start) > 1.0 {
        for _ in 0..4000 {
            hi *= 2.0;
            if modular(hi) <= 1.0 {
                break;
            }
            lo = hi;
        }
    } else {
        for _ in 0..4000 {
            lo /= 2.0;
            if modular(lo) > 1.0 {
                break;
            }
            hi = lo;
        }
    }
    if !(modular(hi) <= 1.0 && modular(lo) > 1.0) {
        return invalid("could not bracket the Luxemburg norm");
    }
    for (_, x) in f.iter() {
        let (t1, t2) = (x.abs() / hi, x.abs() / lo);
        let (f1, f2, fm) = (phi.eval(t1), phi.eval(t2), phi.eval(0.5 * (t1 + t2)));
        if fm > 0.5 * (f1 + f2) + 1e-12 * (f1 + f2).max(1.0) {
            return invalid("Young function is not convex on the bracket");
        }
    }
    while hi - lo >= tol * (1.0 + hi) {
        let mid = 0.5 * (lo + hi);
        if modular(mid) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `sup_{0 ≤ x ≤ bracket} (x|y| − Φ(x))` by golden-section search.
pub fn complementary_young(phi: &YoungFunction, y: f64, bracket: f64) -> Result<f64> {
    phi.validate()?;
    if !(bracket > 0.0) {
        return invalid("bracket must be positive");
    }
    let y = y.abs();
    if y == 0.0 {
        return Ok(0.0);
    }
    let g = |x: f64| x * y - phi.eval(x);
    let h = bracket * 1e-7;
    if g(bracket) > g(bracket - h) + 1e-14 * g(bracket).abs().max(1.0) {
        return Err(crate::Error::BracketTooSmall(bracket));
    }
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, bracket);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    while b - a > 1e-15 * bracket.max(1.0) {
        if gc >= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = g(d);
        }
    }
    Ok(g(0.5 * (a + b)).max(gc).max(gd).max(0.0))
}

/// Largest sampled `Φ(2t)/Φ(t)` over log-spaced `t ∈ [t_min, t_max]`.
pub fn delta2_check(
    phi: &YoungFunction,
    t_min: f64,
    t_max: f64,
    samples: usize,
) -> Result<(f64, bool)> {
    phi.validate()?;
    if !(t_min > 0.0 && t_min < t_max) {
        return invalid("need 0 < t_min < t_max");
    }
    let samples = samples.max(2);
    let (l0, l1) = (t_min.ln(), t_max.ln());
    let mut m = 0.0f64;
    for i in 0..samples {
        let t = (l0 + (l1 - l0) * i as f64 / (samples - 1) as f64).exp();
        let base = phi.eval(t);
        if base <= 0.0 {
            return invalid(format!("Φ vanishes at t = {t}"));
        }
        m = m.max(phi.eval(2.0 * t) / base);
    }
    Ok((m, m.is_finite()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn approx(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn truncated_seminorm_ignores_far_support() {
        let s = SeminormSpace::frechet(IndexDomain::Natural);
        assert_eq!(s.seminorm(2, &SeqVector::basis(5)).unwrap(), 0.0);
        assert_eq!(s.seminorm(5, &SeqVector::basis(5)).unwrap(), 1.0);
    }

    #[test]
    fn l2_norm_of_two_basis_vectors() {
        let v = SeqVector::basis(1).add(&SeqVector::basis(2));
        assert!(approx(
            SeminormSpace::lp(2.0).seminorm(7, &v).unwrap(),
            2f64.sqrt(),
            1e-15
        ));
    }

    #[test]
    fn grid_seminorm_misses_support_beyond_window() {
        let mut f = GridFunction::default_grid();
        for i in 40..80 {
            f.set_index(i, 3.0);
        }
        assert_eq!(SeminormSpace::grid_sup().grid_seminorm(3, &f).unwrap(), 0.0);
        assert_eq!(SeminormSpace::grid_sup().grid_seminorm(6, &f).unwrap(), 3.0);
    }

    #[test]
    fn integer_vector_rejected_by_natural_space() {
        let v = SeqVector::integer_basis(-2);
        assert!(SeminormSpace::lp(2.0).seminorm(1, &v).is_err());
    }

    #[test]
    fn frechet_metric_basics() {
        let s = SeminormSpace::frechet(IndexDomain::Integer);
        let x = SeqVector::from_pairs(IndexDomain::Integer, [(0, 1.0)]).unwrap();
        assert_eq!(frechet_metric(&s, &x, &x, 1e-9).unwrap(), 0.0);
        let zero = SeqVector::zeros(IndexDomain::Integer);
        // p_n(x) = 1 for every n.
        assert!((frechet_metric(&s, &x, &zero, 1e-9).unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn frechet_metric_matches_direct_sum() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let s = SeminormSpace::frechet(IndexDomain::Natural);
        for _ in 0..50 {
            let x = SeqVector::from_pairs(
                IndexDomain::Natural,
                (0..5).map(|_| (rng.gen_range(1..40), rng.gen_range(-3.0..3.0))),
            )
            .unwrap();
            let y = SeqVector::from_pairs(
                IndexDomain::Natural,
                (0..5).map(|_| (rng.gen_range(1..40), rng.gen_range(-3.0..3.0))),
            )
            .unwrap();
            let mut direct = 0.0;
            for n in 1..=60i64 {
                let p = (1..=n)
                    .map(|i| (x.get(i) - y.get(i)).abs())
                    .fold(0.0, f64::max);
                direct += 0.5f64.powi(n as i32) * p / (1.0 + p);
            }
            assert!((frechet_metric(&s, &x, &y, 1e-9).unwrap() - direct).abs() < 1e-9);
        }
    }

    #[test]
    fn product_metric_max_examples() {
        assert_eq!(product_metric_max(&[0.1, 0.5]).unwrap(), 0.5);
        assert_eq!(product_metric_max(&[0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert!(product_metric_max(&[]).is_err());
    }

    #[test]
    fn product_metric_sum_single_component_is_frechet() {
        let s = SeminormSpace::frechet(IndexDomain::Natural);
        let x = SeqVector::from_dense(&[1.0, -2.0, 0.5]);
        let y = SeqVector::basis(2);
        let single = product_metric_sum(
            &s,
            std::slice::from_ref(&x),
            std::slice::from_ref(&y),
            1e-10,
        )
        .unwrap();
        assert_eq!(single, frechet_metric(&s, &x, &y, 1e-10).unwrap());
        assert_eq!(
            product_metric_sum(&s, &[x.clone(), y.clone()], &[x, y], 1e-10).unwrap(),
            0.0
        );
    }

    #[test]
    fn luxemburg_examples() {
        let p2 = YoungFunction::Power { p: 2.0 };
        let e0 = SeqVector::integer_basis(0);
        assert!(approx(
            luxemburg_norm(&e0, &p2, 1e-13).unwrap(),
            0.5f64.sqrt(),
            1e-11
        ));
        assert_eq!(
            luxemburg_norm(&SeqVector::zeros(IndexDomain::Integer), &p2, 1e-9).unwrap(),
            0.0
        );
    }

    #[test]
    fn luxemburg_rejects_nonconvex_table() {
        let bad = YoungFunction::Table {
            points: vec![(0.0, 0.0), (1.0, 2.0), (2.0, 2.5)],
        };
        assert!(luxemburg_norm(&SeqVector::integer_basis(0), &bad, 1e-9).is_err());
    }

    #[test]
    fn complementary_young_examples() {
        let p2 = YoungFunction::Power { p: 2.0 };
        assert!(approx(
            complementary_young(&p2, 1.0, 10.0).unwrap(),
            0.5,
            1e-12
        ));
        assert_eq!(complementary_young(&p2, 0.0, 10.0).unwrap(), 0.0);
        let p1 = YoungFunction::Power { p: 1.0 };
        assert!(matches!(
            complementary_young(&p1, 2.0, 10.0),
            Err(crate::Error::BracketTooSmall(_))
        ));
        for p in [1.5, 2.0, 3.0, 4.5] {
            let q = p / (p - 1.0);
            for y in [0.3, 1.0, 2.7] {
                let phi = YoungFunction::Power { p };
                let want = f64::powf(y, q) / q;
                assert!(
                    approx(complementary_young(&phi, y, 100.0).unwrap(), want, 1e-10),
                    "p={p} y={y}"
                );
            }
        }
    }

    #[test]
    fn delta2_examples() {
        for p in [1.0, 2.0, 3.0] {
            let (m, holds) = delta2_check(&YoungFunction::Power { p }, 0.01, 100.0, 200).unwrap();
            assert!(holds);
            assert!(approx(m, 2f64.powf(p), 1e-12));
        }
        let (m, holds) =
            delta2_check(&YoungFunction::LogPower { alpha: 2.0 }, 0.01, 100.0, 500).unwrap();
        assert!(holds && m < 16.0);
        assert!(delta2_check(&YoungFunction::Power { p: 2.0 }, 1.0, 1.0, 10).is_err());
    }

    fn sparse_vec() -> impl Strategy<Value = SeqVector> {
        proptest::collection::vec((1i64..30, -5.0f64..5.0), 0..8)
            .prop_map(|pairs| SeqVector::from_pairs(IndexDomain::Natural, pairs).unwrap())
    }

    proptest! {
        #[test]
        fn frechet_metric_in_unit_interval_and_translation_invariant(x in sparse_vec(), y in sparse_vec(), z in sparse_vec()) {
            let s = SeminormSpace::frechet(IndexDomain::Natural);
            let d = frechet_metric(&s, &x, &y, 1e-9).unwrap();
            prop_assert!((0.0..1.0).contains(&d));
            let shifted = frechet_metric(&s, &x.add(&z), &y.add(&z), 1e-9).unwrap();
            prop_assert!((d - shifted).abs() <= 1e-15);
        }

        #[test]
        fn truncated_seminorms_are_monotone(v in sparse_vec(), m in 1u64..40) {
            let s = SeminormSpace::frechet(IndexDomain::Natural);
            prop_assert!(s.seminorm(m, &v).unwrap() <= s.seminorm(m + 1, &v).unwrap());
        }

        #[test]
        fn grid_seminorms_are_monotone(samples in proptest::collection::vec((-80i64..80, -5.0f64..5.0), 0..10), m in 1u64..12) {
            let mut f = GridFunction::default_grid();
            for (i, x) in samples { f.set_index(i, x); }
            let s = SeminormSpace::grid_sup();
            prop_assert!(s.grid_seminorm(m, &f).unwrap() <= s.grid_seminorm(m + 1, &f).unwrap());
        }

        #[test]
        fn young_inequality(x in 0.0f64..5.0, y in 0.0f64..2.5, p in 1.2f64..4.0) {
            let phi = YoungFunction::Power { p };
            let psi = complementary_young(&phi, y, 1e3).unwrap();
            prop_assert!(x * y <= phi.eval(x) + psi + 1e-9);
        }
    }
}
