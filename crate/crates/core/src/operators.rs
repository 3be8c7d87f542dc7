//! Single-valued operator families with closed-form powers. Weight products
//! are accumulated as logarithms so factorial-size magnitudes stay finite.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::indexset::PieceSet;
use crate::space::{IndexDomain, Point, SeqVector};

const LN2: f64 = std::f64::consts::LN_2;

/// Weight sequence `(w_n)_{n ≥ 1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightSequence {
    Constant {
        w: f64,
    },
    /// `w_n = 2^j n^j`.
    Geometric {
        j: u32,
    },
    /// `w_n = table[n-1]`, then `tail`.
    Explicit {
        table: Vec<f64>,
        tail: f64,
    },
    /// Runs of 2's and 1/2's.
    Block(BlockWeights),
    Reciprocal {
        of: Box<WeightSequence>,
    },
}

impl WeightSequence {
    pub fn validate(&self) -> Result<()> {
        match self {
            WeightSequence::Constant { w } if *w > 0.0 && w.is_finite() => Ok(()),
            WeightSequence::Constant { .. } => invalid("constant weight must be positive"),
            WeightSequence::Geometric { .. } => Ok(()),
            WeightSequence::Explicit { table, tail } => {
                if table
                    .iter()
                    .chain([tail])
                    .all(|w| *w > 0.0 && w.is_finite())
                {
                    Ok(())
                } else {
                    invalid("weights must be positive")
                }
            }
            WeightSequence::Block(b) => b.validate(),
            WeightSequence::Reciprocal { of } => of.validate(),
        }
    }

    pub fn ln_weight(&self, n: u64) -> f64 {
        match self {
            WeightSequence::Constant { w } => w.ln(),
            WeightSequence::Geometric { j } => *j as f64 * (LN2 + (n as f64).ln()),
            WeightSequence::Explicit { table, tail } => {
                if n >= 1 && (n as usize) <= table.len() {
                    table[n as usize - 1].ln()
                } else {
                    tail.ln()
                }
            }
            WeightSequence::Block(b) => b.log2_weight(n) as f64 * LN2,
            WeightSequence::Reciprocal { of } => -of.ln_weight(n),
        }
    }

    pub fn weight(&self, n: u64) -> f64 {
        match self {
            WeightSequence::Constant { w } => *w,
            _ => self.ln_weight(n).exp(),
        }
    }

    /// `ln ∏_{i=n}^{n+k-1} w_i`.
    pub fn ln_window(&self, n: u64, k: u64) -> f64 {
        if k == 0 {
            return 0.0;
        }
        match self {
            WeightSequence::Constant { w } => k as f64 * w.ln(),
            WeightSequence::Block(b) => b.log2_window(n, k) as f64 * LN2,
            WeightSequence::Reciprocal { of } => -of.ln_window(n, k),
            _ => (n..n + k).map(|i| self.ln_weight(i)).sum(),
        }
    }

    /// `∏_{i=n}^{n+k−1} w_i`, exact for constant and dyadic weights.
    pub fn window(&self, n: u64, k: u64) -> f64 {
        if let WeightSequence::Constant { w } = self {
            return if k <= i32::MAX as u64 {
                w.powi(k as i32)
            } else {
                w.powf(k as f64)
            };
        }
        match self.log2_window_exact(n, k) {
            Some(e) => (e as f64).exp2(),
            None => self.ln_window(n, k).exp(),
        }
    }

    /// Exact `log2` of a window product when every weight is a power of two.
    pub fn log2_window_exact(&self, n: u64, k: u64) -> Option<i64> {
        match self {
            WeightSequence::Block(b) => Some(b.log2_window(n, k)),
            WeightSequence::Reciprocal { of } => of.log2_window_exact(n, k).map(|v| -v),
            WeightSequence::Constant { w } if *w == 2.0 => Some(k as i64),
            WeightSequence::Constant { w } if *w == 0.5 => Some(-(k as i64)),
            WeightSequence::Constant { w } if *w == 1.0 => Some(0),
            _ => None,
        }
    }
}

/// Weights made of runs: pair `i` contributes `b_i` weights equal to 2
/// followed by `a_i` weights equal to 1/2. Past the last pair every weight is 1.
/// Inclusive index range `(lo, hi)`.
pub type Block = (u64, u64);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockWeights {
    /// `(b_i, a_i)`.
    pub pairs: Vec<(u64, u64)>,
}

impl BlockWeights {
    pub fn new(pairs: Vec<(u64, u64)>) -> Result<Self> {
        let b = BlockWeights { pairs };
        b.validate()?;
        Ok(b)
    }

    /// `b_n = Σ_{i ≤ 2n−1} 2^{i²}`, `a_n = Σ_{i ≤ 2n} 2^{i²}`.
    pub fn squares_of_two(pairs: usize) -> Result<Self> {
        let mut acc = 0u64;
        let mut out = Vec::with_capacity(pairs);
        let mut i = 1u32;
        for _ in 0..pairs {
            let mut next = || -> Result<u64> {
                let term = 1u64
                    .checked_shl(i * i)
                    .filter(|_| i * i < 64)
                    .ok_or_else(|| Error::InvalidInput("block length overflows u64".into()))?;
                i += 1;
                acc = acc
                    .checked_add(term)
                    .ok_or_else(|| Error::InvalidInput("block length overflows u64".into()))?;
                Ok(acc)
            };
            let b = next()?;
            let a = next()?;
            out.push((b, a));
        }
        let bw = BlockWeights { pairs: out };
        bw.total_length()
            .ok_or_else(|| Error::InvalidInput("block horizon overflows u64".into()))?;
        Ok(bw)
    }

    fn validate(&self) -> Result<()> {
        let mut prev = 1u64;
        for &(b, a) in &self.pairs {
            if !(b > prev && a > b) {
                return invalid("block lengths must satisfy 1 < b_1 < a_1 < b_2 < a_2 < ...");
            }
            prev = a;
        }
        Ok(())
    }

    pub fn total_length(&self) -> Option<u64> {
        self.pairs
            .iter()
            .try_fold(0u64, |acc, (b, a)| acc.checked_add(*b)?.checked_add(*a))
    }

    /// `Σ_{i<n} (a_i + b_i)` for pair index `n` starting at 1.
    pub fn offset(&self, n: usize) -> u64 {
        self.pairs[..n - 1].iter().map(|(b, a)| b + a).sum()
    }

    pub fn log2_weight(&self, m: u64) -> i64 {
        self.log2_prefix(m) - self.log2_prefix(m - 1)
    }

    /// `log2(w_1 ⋯ w_m)`.
    pub fn log2_prefix(&self, m: u64) -> i64 {
        let mut s = 0u64;
        let mut total = 0i64;
        for &(b, a) in &self.pairs {
            if m <= s {
                break;
            }
            let twos = (m - s).min(b);
            let halves = (m - s).saturating_sub(b).min(a);
            total += twos as i64 - halves as i64;
            s += b + a;
        }
        total
    }

    pub fn log2_window(&self, n: u64, k: u64) -> i64 {
        self.log2_prefix(n + k - 1) - self.log2_prefix(n - 1)
    }

    /// Maximal runs `[lo, hi]` on which `log2 w_1⋯w_m` is linear with slope `slope`.
    pub fn runs(&self) -> Vec<(u64, u64, i64)> {
        let mut out = Vec::new();
        let mut s = 0u64;
        for &(b, a) in &self.pairs {
            out.push((s + 1, s + b, 1));
            out.push((s + b + 1, s + b + a, -1));
            s += b + a;
        }
        out
    }

    /// Witness index blocks of pair `n`: `B_n` inside the run of 2's
    /// and `A_n` inside the run of 1/2's, both possibly empty.
    pub fn witness_blocks(&self, n: usize) -> (Option<Block>, Option<Block>) {
        let (b, a) = self.pairs[n - 1];
        let s = self.offset(n);
        let nn = n as u64;
        let b_lo = 1 + s + b.div_ceil(nn) + nn;
        let b_hi = s + b;
        let a_lo = 1 + s + b + a.div_ceil(nn) + nn;
        let a_hi = s + b + a;
        (
            (b_lo <= b_hi).then_some((b_lo, b_hi)),
            (a_lo <= a_hi).then_some((a_lo, a_hi)),
        )
    }

    /// Whether the growth inequalities of the block construction hold at pair `n`.
    pub fn growth_condition(&self, n: usize) -> bool {
        let nn = n as u128;
        let gap: u128 = self.pairs[..n - 1]
            .iter()
            .map(|(b, a)| (a - b) as u128)
            .sum();
        let (b, a) = self.pairs[n - 1];
        let base = nn * gap + nn * nn + nn + 1;
        (b as u128) > base && (a as u128) > base + nn * b as u128
    }

    /// Smallest `n_0` such that the growth condition holds for every generated pair `n ≥ n_0`.
    pub fn scan_n0(&self) -> Option<usize> {
        let mut n0 = None;
        for n in (1..=self.pairs.len()).rev() {
            if self.growth_condition(n) {
                n0 = Some(n);
            } else {
                break;
            }
        }
        n0
    }

    /// Smallest and largest `log2 w_1⋯w_m` over `m ∈ [lo, hi]`, exact.
    pub fn log2_prefix_range(&self, lo: u64, hi: u64) -> (i64, i64) {
        let mut pts = vec![lo, hi];
        for (s, e, _) in self.runs() {
            for p in [s - 1, s, e] {
                if p >= lo && p <= hi {
                    pts.push(p);
                }
            }
        }
        let vals: Vec<i64> = pts.iter().map(|&m| self.log2_prefix(m)).collect();
        (*vals.iter().min().unwrap(), *vals.iter().max().unwrap())
    }

    /// `{m ≤ horizon : sign·log2(w_1⋯w_m) ≥ t(m)}` computed run by run.
    /// `t` must be nondecreasing and grow by less than 1 per step, so that on
    /// each run the set is a prefix or a suffix.
    pub fn prefix_level_set(&self, t: &dyn Fn(u64) -> f64, sign: i64, horizon: u64) -> PieceSet {
        let f = |m: u64| (sign * self.log2_prefix(m)) as f64 >= t(m);
        let total = self.total_length().unwrap_or(u64::MAX);
        let mut runs: Vec<(u64, u64, i64)> = self
            .runs()
            .into_iter()
            .filter(|r| r.0 <= horizon)
            .map(|(a, b, s)| (a, b.min(horizon), s))
            .collect();
        if horizon > total {
            runs.push((total + 1, horizon, 0));
        }
        let mut iv = Vec::new();
        for (lo, hi, slope) in runs {
            let rising = sign * slope > 0;
            // first index where the predicate flips
            let (mut a, mut b) = (lo, hi + 1);
            while a < b {
                let mid = a + (b - a) / 2;
                if f(mid) == rising {
                    b = mid;
                } else {
                    a = mid + 1;
                }
            }
            if rising {
                if a <= hi {
                    iv.push((a, hi));
                }
            } else if a > lo {
                iv.push((lo, a - 1));
            }
        }
        PieceSet::from_intervals(&iv, Some(horizon))
    }
}

/// Regularizer `C = diag(a_n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regularizer {
    Constant {
        a: f64,
    },
    /// `a_n = (n−1)!^{e}`.
    FactorialPower {
        e: f64,
    },
    Explicit {
        table: Vec<f64>,
        tail: f64,
    },
}

impl Regularizer {
    pub fn ln_at(&self, n: u64) -> f64 {
        match self {
            Regularizer::Constant { a } => a.ln(),
            Regularizer::FactorialPower { e } => e * ln_factorial(n - 1),
            Regularizer::Explicit { table, tail } => {
                if n >= 1 && (n as usize) <= table.len() {
                    table[n as usize - 1].ln()
                } else {
                    tail.ln()
                }
            }
        }
    }

    pub fn at(&self, n: u64) -> f64 {
        self.ln_at(n).exp()
    }

    pub fn apply(&self, x: &SeqVector) -> SeqVector {
        let mut out = SeqVector::zeros(x.domain());
        for (i, v) in x.iter() {
            out.put(i, v * self.at(i as u64));
        }
        out
    }
}

/// `ln(n!)` by direct summation.
pub fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

fn require_natural(x: &SeqVector) -> Result<()> {
    if x.domain() != IndexDomain::Natural {
        return invalid("shift operators act on ℕ-indexed vectors");
    }
    Ok(())
}

/// `T^k x = ⟨(∏_{i=n}^{n+k−1} w_i) x_{n+k}⟩`.
pub fn backward_shift_power(w: &WeightSequence, k: u64, x: &SeqVector) -> Result<SeqVector> {
    require_natural(x)?;
    let mut out = SeqVector::zeros(IndexDomain::Natural);
    for (m, v) in x.iter() {
        let m = m as u64;
        if m > k {
            let n = m - k;
            out.put(n as i64, v * w.window(n, k));
        }
    }
    Ok(out)
}

/// `F^k x` for `F(x_1, x_2, …) = (0, w_1 x_1, w_2 x_2, …)`.
pub fn forward_shift_power(w: &WeightSequence, k: u64, x: &SeqVector) -> Result<SeqVector> {
    require_natural(x)?;
    let mut out = SeqVector::zeros(IndexDomain::Natural);
    for (n, v) in x.iter() {
        let n = n as u64;
        out.put((n + k) as i64, v * w.window(n, k));
    }
    Ok(out)
}

/// `ln sup_{n ≤ horizon} w_n ⋯ w_{n+k−1}`, a lower bound for `ln ‖F^k‖`.
pub fn ln_shift_power_norm(w: &WeightSequence, k: u64, horizon: u64) -> f64 {
    (1..=horizon.max(1))
        .map(|n| w.ln_window(n, k))
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn shift_power_norm(w: &WeightSequence, k: u64, horizon: u64) -> f64 {
    (1..=horizon.max(1))
        .map(|n| w.window(n, k))
        .fold(0.0, f64::max)
}

/// `T^k C x = ⟨a_{k+n} x_{k+n} ∏_{i=n}^{k+n−1} w_i⟩`.
pub fn regularized_power_apply(
    w: &WeightSequence,
    a: &Regularizer,
    k: u64,
    x: &SeqVector,
) -> Result<SeqVector> {
    require_natural(x)?;
    let mut out = SeqVector::zeros(IndexDomain::Natural);
    for (m, v) in x.iter() {
        let m = m as u64;
        if m > k {
            let n = m - k;
            out.put(n as i64, v * (a.ln_at(m) + w.ln_window(n, k)).exp());
        }
    }
    Ok(out)
}

/// `ln sup_{n ≤ horizon} a_{k+n} ∏_{i=n}^{k+n−1} w_i`, with the maximizing `n`.
pub fn ln_b_jk(w: &WeightSequence, a: &Regularizer, k: u64, horizon: u64) -> (f64, u64) {
    let upto = horizon + k;
    let mut ln_w = vec![0.0; upto as usize + 1];
    for i in 1..=upto {
        ln_w[i as usize] = ln_w[i as usize - 1] + w.ln_weight(i);
    }
    let mut ln_a = vec![0.0; upto as usize + 1];
    let factorial = matches!(a, Regularizer::FactorialPower { .. });
    let mut ln_fact = 0.0;
    for n in 1..=upto {
        ln_a[n as usize] = match a {
            Regularizer::FactorialPower { e } => e * ln_fact,
            _ => a.ln_at(n),
        };
        if factorial {
            ln_fact += (n as f64).ln();
        }
    }
    let mut best = (f64::NEG_INFINITY, 1);
    for n in 1..=horizon.max(1) {
        let v = ln_a[(n + k) as usize] + ln_w[(n + k - 1) as usize] - ln_w[n as usize - 1];
        if v > best.0 {
            best = (v, n);
        }
    }
    best
}

pub fn b_jk(w: &WeightSequence, a: &Regularizer, k: u64, horizon: u64) -> f64 {
    ln_b_jk(w, a, k, horizon).0.exp()
}

/// Componentwise product of a diagonal with a vector.
pub fn diagonal_apply(entries: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    if entries.len() != x.len() {
        return invalid(format!(
            "diagonal of length {} applied to vector of length {}",
            entries.len(),
            x.len()
        ));
    }
    Ok(entries.iter().zip(x).map(|(a, b)| a * b).collect())
}

/// Positive weight function on ℤ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TranslationWeight {
    Constant {
        c: f64,
    },
    /// `nonneg` for `x ≥ 0`, `neg` otherwise.
    Step {
        nonneg: f64,
        neg: f64,
    },
    Table {
        values: Vec<(i64, f64)>,
        default: f64,
    },
}

impl TranslationWeight {
    pub fn at(&self, x: i64) -> f64 {
        match self {
            TranslationWeight::Constant { c } => *c,
            TranslationWeight::Step { nonneg, neg } => {
                if x >= 0 {
                    *nonneg
                } else {
                    *neg
                }
            }
            TranslationWeight::Table { values, default } => values
                .iter()
                .find(|(i, _)| *i == x)
                .map_or(*default, |(_, v)| *v),
        }
    }
}

/// `∏_{s=1}^{n} w(x + s·a)`.
pub fn phi_product(w: &TranslationWeight, a: i64, n: u64, x: i64) -> f64 {
    (1..=n as i64)
        .map(|s| w.at(x + s * a).ln())
        .sum::<f64>()
        .exp()
}

/// `T^n f` for `(T f)(x) = w(x) f(x − a)` on ℤ.
pub fn translation_power(a: i64, w: &TranslationWeight, n: u64, f: &SeqVector) -> SeqVector {
    let mut out = SeqVector::zeros(IndexDomain::Integer);
    for (y, v) in f.iter() {
        out.put(y + n as i64 * a, v * phi_product(w, a, n, y));
    }
    out
}

type WeightFn = Arc<dyn Fn(u64, usize) -> f64 + Send + Sync>;
type JumpFn = Arc<dyn Fn(u64, usize) -> u64 + Send + Sync>;

/// `B_j x = ⟨ω(n, j) x_{n + a(n, j)}⟩` with `n ↦ a(n, j)` nondecreasing.
#[derive(Clone)]
pub struct JumpShift {
    pub families: usize,
    weight: WeightFn,
    jump: JumpFn,
}

impl fmt::Debug for JumpShift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JumpShift")
            .field("families", &self.families)
            .finish_non_exhaustive()
    }
}

impl JumpShift {
    pub fn new(
        families: usize,
        weight: impl Fn(u64, usize) -> f64 + Send + Sync + 'static,
        jump: impl Fn(u64, usize) -> u64 + Send + Sync + 'static,
    ) -> Self {
        JumpShift {
            families,
            weight: Arc::new(weight),
            jump: Arc::new(jump),
        }
    }

    pub fn weight(&self, n: u64, j: usize) -> f64 {
        (self.weight)(n, j)
    }

    pub fn jump(&self, n: u64, j: usize) -> u64 {
        (self.jump)(n, j)
    }

    /// The unique `i` with `i + a(i, j) = n`, by binary search.
    pub fn preimage(&self, n: u64, j: usize) -> Option<u64> {
        let (mut lo, mut hi) = (1u64, n);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if mid + self.jump(mid, j) < n {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        (lo + self.jump(lo, j) == n).then_some(lo)
    }

    pub fn apply_once(&self, j: usize, x: &SeqVector) -> SeqVector {
        let mut out = SeqVector::zeros(IndexDomain::Natural);
        for (m, v) in x.iter() {
            if let Some(i) = self.preimage(m as u64, j) {
                out.put(i as i64, v * self.weight(i, j));
            }
        }
        out
    }
}

/// `B_j^k x` by `k` single steps.
pub fn generalized_backward_apply(
    op: &JumpShift,
    j: usize,
    k: u64,
    x: &SeqVector,
) -> Result<SeqVector> {
    require_natural(x)?;
    let mut cur = x.clone();
    for _ in 0..k {
        if cur.is_zero() {
            break;
        }
        cur = op.apply_once(j, &cur);
    }
    Ok(cur)
}

/// Diagonal rule for family `j` on `𝕂^dim`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiagonalRule {
    /// `c·I` for every `k`.
    Scaled { c: f64 },
    /// `(j + k)·I` for `k` in the set, `0` otherwise.
    GrowOn { support: PieceSet },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagonalFamily {
    pub dim: usize,
    pub rules: Vec<DiagonalRule>,
}

impl DiagonalFamily {
    pub fn entries(&self, j: usize, k: u64) -> Vec<f64> {
        let v = match &self.rules[j - 1] {
            DiagonalRule::Scaled { c } => *c,
            DiagonalRule::GrowOn { support } => {
                if support.contains(k) {
                    (j as u64 + k) as f64
                } else {
                    0.0
                }
            }
        };
        vec![v; self.dim]
    }
}

/// Doubly indexed single-valued family `(j, k) ↦ T_{j,k}`, with `j` from 1.
#[derive(Clone, Debug)]
pub enum OperatorFamily {
    /// `T_{j,k} = T_j^{r_j k}` for the weighted backward shift `T_j`.
    BackwardShift {
        weights: Vec<WeightSequence>,
        multipliers: Vec<u64>,
    },
    ForwardShift {
        weights: Vec<WeightSequence>,
    },
    Diagonal(DiagonalFamily),
    RegularizedShift {
        weights: Vec<WeightSequence>,
        regularizer: Regularizer,
    },
    Translation {
        steps: Vec<(i64, TranslationWeight)>,
    },
    GeneralizedBackward(JumpShift),
}

impl OperatorFamily {
    pub fn backward(weights: Vec<WeightSequence>) -> Self {
        let n = weights.len();
        OperatorFamily::BackwardShift {
            weights,
            multipliers: vec![1; n],
        }
    }

    pub fn count(&self) -> usize {
        match self {
            OperatorFamily::BackwardShift { weights, .. }
            | OperatorFamily::ForwardShift { weights }
            | OperatorFamily::RegularizedShift { weights, .. } => weights.len(),
            OperatorFamily::Diagonal(d) => d.rules.len(),
            OperatorFamily::Translation { steps } => steps.len(),
            OperatorFamily::GeneralizedBackward(op) => op.families,
        }
    }

    pub fn apply(&self, j: usize, k: u64, x: &SeqVector) -> Result<SeqVector> {
        if j == 0 || j > self.count() {
            return invalid(format!("family index {j} out of range"));
        }
        match self {
            OperatorFamily::BackwardShift {
                weights,
                multipliers,
            } => backward_shift_power(&weights[j - 1], multipliers[j - 1] * k, x),
            OperatorFamily::ForwardShift { weights } => forward_shift_power(&weights[j - 1], k, x),
            OperatorFamily::RegularizedShift {
                weights,
                regularizer,
            } => regularized_power_apply(&weights[j - 1], regularizer, k, x),
            OperatorFamily::Diagonal(d) => {
                let dense: Vec<f64> = (1..=d.dim as i64).map(|i| x.get(i)).collect();
                if x.support_max().is_some_and(|m| m > d.dim as i64) {
                    return invalid("vector longer than the diagonal dimension");
                }
                Ok(SeqVector::from_dense(&diagonal_apply(
                    &d.entries(j, k),
                    &dense,
                )?))
            }
            OperatorFamily::Translation { steps } => {
                let (a, w) = &steps[j - 1];
                Ok(translation_power(*a, w, k, x))
            }
            OperatorFamily::GeneralizedBackward(op) => generalized_backward_apply(op, j, k, x),
        }
    }

    /// Some `m` with `T_{j,k} x = 0` for every `j` and every `k ≥ m`, when known.
    pub fn vanishes_after(&self, x: &SeqVector) -> Option<u64> {
        let top = x.support_max().unwrap_or(0).max(0) as u64;
        match self {
            OperatorFamily::BackwardShift { .. }
            | OperatorFamily::RegularizedShift { .. }
            | OperatorFamily::GeneralizedBackward(_) => Some(top.max(1)),
            _ => None,
        }
    }
}

/// Image of a single vector under a family member; shared by the chaos evaluators.
pub fn apply_point(family: &OperatorFamily, j: usize, k: u64, x: &Point) -> Result<Point> {
    match x {
        Point::Seq(v) => Ok(Point::Seq(family.apply(j, k, v)?)),
        Point::Grid(_) => invalid("sequence operators cannot act on grid functions"),
    }
}
