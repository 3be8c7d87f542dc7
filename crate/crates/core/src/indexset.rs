//! Subsets of ℕ: ultimately periodic sets with exact rational density, block
//! sets with checkpoint profiles, and a piecewise-periodic representation
//! that both convert into for boolean algebra and counting.

use std::collections::BTreeSet;

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub type Density = Ratio<u64>;

/// Largest period a periodic pattern may reach before operations refuse.
pub const MAX_PERIOD: u64 = 1 << 20;
/// Largest finite head an ultimately periodic set may carry.
pub const MAX_HEAD: u64 = 1 << 22;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Mask {
    words: Vec<u64>,
}

impl Mask {
    fn empty(period: u64) -> Self {
        Mask {
            words: vec![0; period.div_ceil(64) as usize],
        }
    }

    fn full(period: u64) -> Self {
        let mut m = Mask::empty(period);
        for r in 0..period {
            m.set(r);
        }
        m
    }

    fn get(&self, r: u64) -> bool {
        self.words[(r / 64) as usize] >> (r % 64) & 1 == 1
    }

    fn set(&mut self, r: u64) {
        self.words[(r / 64) as usize] |= 1 << (r % 64);
    }

    fn count(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    fn lift(&self, from: u64, to: u64) -> Mask {
        if from == to {
            return self.clone();
        }
        let mut m = Mask::empty(to);
        for r in 0..to {
            if self.get(r % from) {
                m.set(r);
            }
        }
        m
    }

    fn zip(&self, other: &Mask, f: impl Fn(u64, u64) -> u64) -> Mask {
        Mask {
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }

    fn complement(&self, period: u64) -> Mask {
        let full = Mask::full(period);
        full.zip(self, |a, b| a & !b)
    }

    /// Number of `k ∈ [a, b]` whose residue mod `period` is set.
    fn count_range(&self, period: u64, a: u64, b: u64) -> u64 {
        if a > b {
            return 0;
        }
        let len = b - a + 1;
        let mut total = (len / period) * self.count();
        let rem = len % period;
        let base = a % period;
        for t in 0..rem {
            if self.get((base + t) % period) {
                total += 1;
            }
        }
        total
    }

    fn residues(&self, period: u64) -> Vec<u64> {
        (0..period).filter(|r| self.get(*r)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Segment {
    start: u64,
    mask: Mask,
}

/// Subset of ℕ described by consecutive segments `[start_i, start_{i+1})`,
/// each carrying a residue pattern modulo a shared period. With a horizon
/// `h` the set is only known on `[1, h]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PieceSet {
    period: u64,
    segs: Vec<Segment>,
    horizon: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetOp {
    Union,
    Intersect,
    Difference,
}

fn min_horizon(a: Option<u64>, b: Option<u64>) -> Option<u64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

fn checked_lcm(a: u64, b: u64) -> Result<u64> {
    let l = a.lcm(&b);
    if l > MAX_PERIOD {
        return invalid(format!("combined period {l} exceeds {MAX_PERIOD}"));
    }
    Ok(l)
}

impl PieceSet {
    fn build(period: u64, mut segs: Vec<Segment>, horizon: Option<u64>) -> PieceSet {
        if let Some(h) = horizon {
            segs.retain(|s| s.start <= h + 1);
            if segs.last().is_some_and(|s| s.start == h + 1) {
                segs.pop();
            }
            segs.push(Segment {
                start: h + 1,
                mask: Mask::empty(period),
            });
        }
        let mut out: Vec<Segment> = Vec::with_capacity(segs.len());
        for s in segs {
            match out.last() {
                Some(last) if last.mask == s.mask => {}
                _ => out.push(s),
            }
        }
        PieceSet {
            period,
            segs: out,
            horizon,
        }
    }

    pub fn empty(horizon: Option<u64>) -> PieceSet {
        PieceSet::build(
            1,
            vec![Segment {
                start: 1,
                mask: Mask::empty(1),
            }],
            horizon,
        )
    }

    pub fn universe(horizon: Option<u64>) -> PieceSet {
        PieceSet::build(
            1,
            vec![Segment {
                start: 1,
                mask: Mask::full(1),
            }],
            horizon,
        )
    }

    /// Union of closed intervals, known on `[1, horizon]` (or all of ℕ).
    pub fn from_intervals(intervals: &[(u64, u64)], horizon: Option<u64>) -> PieceSet {
        let mut iv: Vec<(u64, u64)> = intervals
            .iter()
            .copied()
            .filter(|(a, b)| a <= b)
            .map(|(a, b)| (a.max(1), b))
            .collect();
        iv.sort_unstable();
        let mut segs = vec![Segment {
            start: 1,
            mask: Mask::empty(1),
        }];
        let mut covered_to = 0u64;
        for (a, b) in iv {
            let a = a.max(covered_to + 1);
            if a > b {
                continue;
            }
            if segs.last().unwrap().start == a {
                segs.pop();
            }
            segs.push(Segment {
                start: a,
                mask: Mask::full(1),
            });
            if b < u64::MAX {
                segs.push(Segment {
                    start: b + 1,
                    mask: Mask::empty(1),
                });
            }
            covered_to = b;
        }
        PieceSet::build(1, segs, horizon)
    }

    /// `[lo, ∞)` or `[lo, hi]`.
    pub fn interval(lo: u64, hi: Option<u64>, horizon: Option<u64>) -> PieceSet {
        PieceSet::from_intervals(&[(lo, hi.unwrap_or(u64::MAX))], horizon)
    }

    /// Members `k = i + 1` for every `bits[i] == true`, known on `[1, bits.len()]`.
    pub fn from_bitmap(bits: &[bool]) -> PieceSet {
        let mut iv = Vec::new();
        let mut i = 0;
        while i < bits.len() {
            if bits[i] {
                let s = i;
                while i < bits.len() && bits[i] {
                    i += 1;
                }
                iv.push((s as u64 + 1, i as u64));
            } else {
                i += 1;
            }
        }
        PieceSet::from_intervals(&iv, Some(bits.len() as u64))
    }

    /// `{k ≥ 1 : k ≡ r (mod modulus)}`.
    pub fn residue_class(r: u64, modulus: u64, horizon: Option<u64>) -> Result<PieceSet> {
        if modulus == 0 || modulus > MAX_PERIOD {
            return invalid("modulus out of range");
        }
        let mut m = Mask::empty(modulus);
        m.set(r % modulus);
        Ok(PieceSet::build(
            modulus,
            vec![Segment { start: 1, mask: m }],
            horizon,
        ))
    }

    pub fn horizon(&self) -> Option<u64> {
        self.horizon
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    pub fn with_horizon(&self, horizon: u64) -> PieceSet {
        let h = self.horizon.map_or(horizon, |h| h.min(horizon));
        PieceSet::build(self.period, self.segs.clone(), Some(h))
    }

    fn seg_end(&self, i: usize) -> u64 {
        self.segs.get(i + 1).map_or(u64::MAX, |s| s.start - 1)
    }

    pub fn contains(&self, k: u64) -> bool {
        if k == 0 || self.horizon.is_some_and(|h| k > h) {
            return false;
        }
        let i = self.segs.partition_point(|s| s.start <= k) - 1;
        self.segs[i].mask.get(k % self.period)
    }

    /// `card(self ∩ [1, n])`.
    pub fn count_upto(&self, n: u64) -> u64 {
        let mut total = 0;
        for (i, s) in self.segs.iter().enumerate() {
            if s.start > n {
                break;
            }
            total += s
                .mask
                .count_range(self.period, s.start, self.seg_end(i).min(n));
        }
        total
    }

    pub fn is_empty_upto(&self, n: u64) -> bool {
        self.count_upto(n) == 0
    }

    /// Exact density when the set is described on all of ℕ.
    pub fn exact_density(&self) -> Option<Density> {
        if self.horizon.is_some() {
            return None;
        }
        let last = self.segs.last().expect("at least one segment");
        Some(Ratio::new(last.mask.count(), self.period))
    }

    fn combine(&self, other: &PieceSet, f: impl Fn(u64, u64) -> u64) -> Result<PieceSet> {
        let period = checked_lcm(self.period, other.period)?;
        let (mut i, mut j) = (0usize, 0usize);
        let mut segs = Vec::new();
        let mut cur = 1u64;
        loop {
            let a = self.segs[i].mask.lift(self.period, period);
            let b = other.segs[j].mask.lift(other.period, period);
            segs.push(Segment {
                start: cur,
                mask: a.zip(&b, &f),
            });
            let na = self.segs.get(i + 1).map(|s| s.start);
            let nb = other.segs.get(j + 1).map(|s| s.start);
            match (na, nb) {
                (None, None) => break,
                (Some(x), None) => {
                    cur = x;
                    i += 1;
                }
                (None, Some(y)) => {
                    cur = y;
                    j += 1;
                }
                (Some(x), Some(y)) => {
                    cur = x.min(y);
                    if x == cur {
                        i += 1;
                    }
                    if y == cur {
                        j += 1;
                    }
                }
            }
        }
        Ok(PieceSet::build(
            period,
            segs,
            min_horizon(self.horizon, other.horizon),
        ))
    }

    pub fn union(&self, other: &PieceSet) -> Result<PieceSet> {
        self.combine(other, |a, b| a | b)
    }

    pub fn intersect(&self, other: &PieceSet) -> Result<PieceSet> {
        self.combine(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &PieceSet) -> Result<PieceSet> {
        self.combine(other, |a, b| a & !b)
    }

    pub fn apply(&self, other: &PieceSet, op: SetOp) -> Result<PieceSet> {
        match op {
            SetOp::Union => self.union(other),
            SetOp::Intersect => self.intersect(other),
            SetOp::Difference => self.difference(other),
        }
    }

    /// Complement within the known range.
    pub fn complement(&self) -> PieceSet {
        let segs = self
            .segs
            .iter()
            .map(|s| Segment {
                start: s.start,
                mask: s.mask.complement(self.period),
            })
            .collect();
        PieceSet::build(self.period, segs, self.horizon)
    }

    pub fn intersect_all(sets: &[PieceSet]) -> Result<PieceSet> {
        let mut it = sets.iter();
        let mut acc = it
            .next()
            .cloned()
            .unwrap_or_else(|| PieceSet::universe(None));
        for s in it {
            acc = acc.intersect(s)?;
        }
        Ok(acc)
    }

    pub fn union_all(sets: &[PieceSet]) -> Result<PieceSet> {
        let mut it = sets.iter();
        let mut acc = it.next().cloned().unwrap_or_else(|| PieceSet::empty(None));
        for s in it {
            acc = acc.union(s)?;
        }
        Ok(acc)
    }

    /// Membership bitmap over `[1, n]` (index `k − 1`).
    pub fn bitmap(&self, n: u64) -> Vec<bool> {
        (1..=n).map(|k| self.contains(k)).collect()
    }

    /// Smallest member `≥ k`, searching up to `limit`.
    pub fn next_member(&self, k: u64, limit: u64) -> Option<u64> {
        let mut i = self.segs.partition_point(|s| s.start <= k.max(1)) - 1;
        let mut k = k.max(1);
        while i < self.segs.len() && k <= limit {
            let end = self.seg_end(i).min(limit);
            let s = &self.segs[i];
            if !s.mask.is_empty() {
                let stop = end.min(k.saturating_add(self.period - 1));
                for c in k..=stop {
                    if s.mask.get(c % self.period) {
                        return if self.horizon.is_some_and(|h| c > h) {
                            None
                        } else {
                            Some(c)
                        };
                    }
                }
            }
            i += 1;
            k = end.saturating_add(1);
        }
        None
    }

    /// Largest member `≤ limit`, also capped by the horizon.
    pub fn last_member(&self, limit: u64) -> Option<u64> {
        let limit = self.horizon.map_or(limit, |h| h.min(limit));
        for i in (0..self.segs.len()).rev() {
            let s = &self.segs[i];
            if s.start > limit || s.mask.is_empty() {
                continue;
            }
            let end = self.seg_end(i).min(limit);
            let stop = s.start.max(end.saturating_sub(self.period - 1));
            if let Some(k) = (stop..=end).rev().find(|k| s.mask.get(k % self.period)) {
                return Some(k);
            }
        }
        None
    }

    /// Whether only finitely many members are described.
    pub fn is_finite(&self) -> bool {
        self.horizon.is_some() || self.segs.last().is_some_and(|s| s.mask.is_empty())
    }

    /// Splits the set by the rank of each member modulo `n`: the member of
    /// rank `ρ` (starting at 1) goes to part `(ρ − 1) mod n`.
    pub fn rank_subpartition(&self, n: u64) -> Result<Vec<PieceSet>> {
        if n < 2 {
            return invalid("subpartition needs at least two parts");
        }
        let period = self.period * n;
        if period > MAX_PERIOD {
            return invalid("subpartition period too large");
        }
        let mut parts: Vec<Vec<Segment>> = vec![Vec::new(); n as usize];
        for (i, s) in self.segs.iter().enumerate() {
            let mut masks = vec![Mask::empty(period); n as usize];
            let rank_before = if s.start > 1 {
                self.count_upto(s.start - 1)
            } else {
                0
            };
            let end = self.seg_end(i);
            let mut seen = rank_before;
            let span_end = end.min(s.start.saturating_add(period - 1));
            let mut k = s.start;
            while k <= span_end {
                if s.mask.get(k % self.period) {
                    masks[(seen % n) as usize].set(k % period);
                    seen += 1;
                }
                if k == u64::MAX {
                    break;
                }
                k += 1;
            }
            for (p, m) in masks.into_iter().enumerate() {
                parts[p].push(Segment {
                    start: s.start,
                    mask: m,
                });
            }
        }
        Ok(parts
            .into_iter()
            .map(|segs| PieceSet::build(period, segs, self.horizon))
            .collect())
    }

    /// Density profile at the given checkpoints.
    pub fn profile(&self, checkpoints: &[u64]) -> Result<DensityProfile> {
        let mut cps: Vec<u64> = checkpoints.to_vec();
        cps.sort_unstable();
        cps.dedup();
        if cps.is_empty() || cps[0] == 0 {
            return invalid("checkpoints must be a nonempty list of positive integers");
        }
        if let (Some(h), Some(&last)) = (self.horizon, cps.last()) {
            if last > h {
                return invalid(format!("checkpoint {last} beyond horizon {h}"));
            }
        }
        let points = cps
            .iter()
            .map(|&n| DensityPoint::new(n, self.count_upto(n)))
            .collect();
        Ok(DensityProfile::from_points(points, None))
    }

    /// Maximal runs of consecutive members in `[1, limit]`.
    pub fn runs(&self, limit: u64) -> Vec<(u64, u64)> {
        let limit = self.horizon.map_or(limit, |h| h.min(limit));
        let mut out: Vec<(u64, u64)> = Vec::new();
        fn push(out: &mut Vec<(u64, u64)>, lo: u64, hi: u64) {
            match out.last_mut() {
                Some((_, b)) if *b + 1 == lo => *b = hi,
                _ => out.push((lo, hi)),
            }
        }
        for (i, s) in self.segs.iter().enumerate() {
            if s.start > limit {
                break;
            }
            let end = self.seg_end(i).min(limit);
            if s.mask.is_empty() {
                continue;
            }
            if s.mask.count() == self.period {
                push(&mut out, s.start, end);
                continue;
            }
            for k in s.start..=end {
                if s.mask.get(k % self.period) {
                    push(&mut out, k, k);
                }
            }
        }
        out
    }

    /// Compact description used in reports.
    pub fn summary(&self) -> SetSummary {
        let pieces = self
            .segs
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.mask.is_empty())
            .map(|(i, s)| PieceSummary {
                start: s.start,
                end: self.segs.get(i + 1).map(|n| n.start - 1),
                residues: if s.mask.count() == self.period {
                    None
                } else {
                    Some(s.mask.residues(self.period))
                },
            })
            .collect();
        SetSummary {
            period: self.period,
            horizon: self.horizon,
            pieces,
        }
    }
}

impl Serialize for PieceSet {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        self.summary().serialize(serializer)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PieceSummary {
    pub start: u64,
    /// Inclusive end; `None` for an unbounded tail.
    pub end: Option<u64>,
    /// Residues modulo the period; `None` means every residue.
    pub residues: Option<Vec<u64>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetSummary {
    pub period: u64,
    pub horizon: Option<u64>,
    pub pieces: Vec<PieceSummary>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityPoint {
    pub n: u64,
    pub count: u64,
    pub ratio: f64,
}

impl DensityPoint {
    pub fn new(n: u64, count: u64) -> Self {
        DensityPoint {
            n,
            count,
            ratio: count as f64 / n as f64,
        }
    }

    pub fn exact(&self) -> Density {
        Ratio::new(self.count, self.n)
    }

    /// Ratio at least `1 − δ`; with `δ = 0` the comparison is exact.
    pub fn reaches(&self, delta: f64) -> bool {
        if delta <= 0.0 {
            self.count == self.n
        } else {
            self.count as f64 >= (1.0 - delta) * self.n as f64
        }
    }

    fn beats(&self, other: &DensityPoint) -> bool {
        (self.count as u128) * (other.n as u128) > (other.count as u128) * (self.n as u128)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityProfile {
    pub points: Vec<DensityPoint>,
    /// Checkpoint with the largest ratio.
    pub sup: DensityPoint,
    /// Largest ratio over every `n ≤ horizon`, when the profile came from a full scan.
    pub running_max: Option<DensityPoint>,
}

impl DensityProfile {
    fn from_points(points: Vec<DensityPoint>, running_max: Option<DensityPoint>) -> Self {
        let mut sup = points[0];
        for p in &points[1..] {
            if p.beats(&sup) {
                sup = *p;
            }
        }
        DensityProfile {
            points,
            sup,
            running_max,
        }
    }

    pub fn sup_ratio(&self) -> Density {
        self.sup.exact()
    }

    pub fn reaches(&self, delta: f64) -> bool {
        self.sup.reaches(delta)
    }
}

/// Scans `n = 1..=horizon`, recording ratios at the checkpoints and the
/// running maximum.
pub fn empirical_density_profile(
    membership: impl Fn(u64) -> bool,
    horizon: u64,
    checkpoints: &[u64],
) -> Result<DensityProfile> {
    let mut cps: Vec<u64> = checkpoints.to_vec();
    cps.sort_unstable();
    cps.dedup();
    if cps.is_empty() || cps[0] == 0 {
        return invalid("checkpoints must be a nonempty list of positive integers");
    }
    if *cps.last().unwrap() > horizon {
        return invalid("checkpoint beyond horizon");
    }
    let mut count = 0u64;
    let mut points = Vec::with_capacity(cps.len());
    let mut next = 0usize;
    let mut best: Option<DensityPoint> = None;
    for n in 1..=horizon {
        if membership(n) {
            count += 1;
        }
        let p = DensityPoint::new(n, count);
        if best.is_none_or(|b| p.beats(&b)) {
            best = Some(p);
        }
        if next < cps.len() && cps[next] == n {
            points.push(p);
            next += 1;
        }
    }
    Ok(DensityProfile::from_points(points, best))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progression {
    pub offset: u64,
    pub step: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<u64>,
}

impl Progression {
    pub fn new(offset: u64, step: u64) -> Self {
        Progression {
            offset,
            step,
            start: None,
        }
    }

    pub fn contains(&self, k: u64) -> bool {
        k >= self.offset
            && (k - self.offset).is_multiple_of(self.step)
            && self.start.is_none_or(|s| k >= s)
    }

    fn first(&self) -> u64 {
        let s = self.start.unwrap_or(0);
        if s <= self.offset {
            self.offset
        } else {
            self.offset + (s - self.offset).div_ceil(self.step) * self.step
        }
    }
}

/// Ultimately periodic subset of ℕ: a union of progressions, plus finitely
/// many added and removed points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactSet {
    pub progressions: Vec<Progression>,
    #[serde(default)]
    pub include: BTreeSet<u64>,
    #[serde(default)]
    pub exclude: BTreeSet<u64>,
}

/// Members below `threshold` are listed in `head`; from `threshold` on,
/// membership is `residues[k mod period]`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct PeriodicForm {
    period: u64,
    threshold: u64,
    residues: Vec<bool>,
    head: BTreeSet<u64>,
}

impl PeriodicForm {
    fn contains(&self, k: u64) -> bool {
        if k == 0 {
            false
        } else if k < self.threshold {
            self.head.contains(&k)
        } else {
            self.residues[(k % self.period) as usize]
        }
    }

    fn reduce(mut self) -> PeriodicForm {
        let p = self.period;
        for d in 1..=p {
            if p.is_multiple_of(d)
                && (0..p).all(|r| self.residues[r as usize] == self.residues[(r % d) as usize])
            {
                self.residues.truncate(d as usize);
                self.period = d;
                break;
            }
        }
        while self.threshold > 1 {
            let k = self.threshold - 1;
            if self.head.contains(&k) != self.residues[(k % self.period) as usize] {
                break;
            }
            self.head.remove(&k);
            self.threshold = k;
        }
        self
    }

    fn into_exact(self) -> ExactSet {
        let f = self.reduce();
        let progressions = (0..f.period)
            .filter(|r| f.residues[*r as usize])
            .map(|r| {
                let mut o = f.threshold + (r + f.period - f.threshold % f.period) % f.period;
                if o == 0 {
                    o = f.period;
                }
                Progression::new(o, f.period)
            })
            .collect();
        ExactSet {
            progressions,
            include: f.head,
            exclude: BTreeSet::new(),
        }
    }
}

impl ExactSet {
    pub fn naturals() -> Self {
        ExactSet::progression(1, 1)
    }

    pub fn progression(offset: u64, step: u64) -> Self {
        ExactSet {
            progressions: vec![Progression::new(offset, step)],
            include: BTreeSet::new(),
            exclude: BTreeSet::new(),
        }
    }

    pub fn from_progressions(ps: impl IntoIterator<Item = (u64, u64)>) -> Self {
        ExactSet {
            progressions: ps
                .into_iter()
                .map(|(o, s)| Progression::new(o, s))
                .collect(),
            include: BTreeSet::new(),
            exclude: BTreeSet::new(),
        }
    }

    pub fn finite(points: impl IntoIterator<Item = u64>) -> Self {
        ExactSet {
            progressions: Vec::new(),
            include: points.into_iter().filter(|k| *k >= 1).collect(),
            exclude: BTreeSet::new(),
        }
    }

    fn validate(&self) -> Result<()> {
        for p in &self.progressions {
            if p.offset == 0 || p.step == 0 {
                return invalid("progression offsets and steps start at 1");
            }
        }
        if self.include.intersection(&self.exclude).next().is_some() {
            return invalid("include and exclude overlap");
        }
        Ok(())
    }

    pub fn contains(&self, k: u64) -> bool {
        k >= 1
            && !self.exclude.contains(&k)
            && (self.include.contains(&k) || self.progressions.iter().any(|p| p.contains(k)))
    }

    fn form(&self) -> Result<PeriodicForm> {
        self.validate()?;
        let mut period = 1u64;
        for p in &self.progressions {
            period = checked_lcm(period, p.step)?;
        }
        let mut threshold = 1u64;
        for p in &self.progressions {
            threshold = threshold.max(p.first());
        }
        for k in self.include.iter().chain(&self.exclude) {
            threshold = threshold.max(k + 1);
        }
        if threshold > MAX_HEAD {
            return invalid("finite head of the set is too long");
        }
        let residues = (0..period)
            .map(|r| {
                self.progressions
                    .iter()
                    .any(|p| (r + p.step - p.offset % p.step) % p.step == 0)
            })
            .collect();
        let head = (1..threshold).filter(|&k| self.contains(k)).collect();
        Ok(PeriodicForm {
            period,
            threshold,
            residues,
            head,
        })
    }

    /// Canonical representative: one progression per residue of the minimal
    /// period, no exclusions, and the finite head in `include`.
    pub fn canonical(&self) -> Result<ExactSet> {
        Ok(self.form()?.into_exact())
    }

    pub fn is_disjoint_family(&self) -> bool {
        let ps = &self.progressions;
        for i in 0..ps.len() {
            for j in i + 1..ps.len() {
                let g = ps[i].step.gcd(&ps[j].step);
                if ps[i].offset % g == ps[j].offset % g {
                    return false;
                }
            }
        }
        true
    }

    pub fn to_piece_set(&self) -> Result<PieceSet> {
        let f = self.form()?.reduce();
        let mut segs = vec![Segment {
            start: 1,
            mask: Mask::empty(f.period),
        }];
        for &k in &f.head {
            if segs.last().unwrap().start == k {
                segs.pop();
            }
            segs.push(Segment {
                start: k,
                mask: Mask::full(f.period),
            });
            segs.push(Segment {
                start: k + 1,
                mask: Mask::empty(f.period),
            });
        }
        let mut tail = Mask::empty(f.period);
        for r in 0..f.period {
            if f.residues[r as usize] {
                tail.set(r);
            }
        }
        if segs.last().unwrap().start == f.threshold {
            segs.pop();
        }
        segs.push(Segment {
            start: f.threshold,
            mask: tail,
        });
        Ok(PieceSet::build(f.period, segs, None))
    }
}

/// `Σ 1/step` over a disjoint progression family; finite corrections add nothing.
pub fn exact_upper_density(s: &ExactSet) -> Result<Density> {
    s.validate()?;
    if !s.is_disjoint_family() {
        return invalid("progressions overlap; canonicalize first");
    }
    Ok(s.progressions
        .iter()
        .fold(Ratio::from_integer(0), |acc, p| acc + Ratio::new(1, p.step)))
}

pub fn set_algebra(a: &ExactSet, b: &ExactSet, op: SetOp) -> Result<ExactSet> {
    let (fa, fb) = (a.form()?, b.form()?);
    let period = checked_lcm(fa.period, fb.period)?;
    let threshold = fa.threshold.max(fb.threshold);
    let eval = |x: bool, y: bool| match op {
        SetOp::Union => x || y,
        SetOp::Intersect => x && y,
        SetOp::Difference => x && !y,
    };
    let residues = (0..period)
        .map(|r| {
            eval(
                fa.residues[(r % fa.period) as usize],
                fb.residues[(r % fb.period) as usize],
            )
        })
        .collect();
    let head = (1..threshold)
        .filter(|&k| eval(fa.contains(k), fb.contains(k)))
        .collect();
    Ok(PeriodicForm {
        period,
        threshold,
        residues,
        head,
    }
    .into_exact())
}

/// `{k ∈ ℕ : r_j·k − 1 ∈ S for every j}`.
pub fn q_set(s: &ExactSet, r: &[u64]) -> Result<ExactSet> {
    if r.is_empty() || r.contains(&0) {
        return invalid("multipliers must be positive");
    }
    let f = s.form()?;
    let threshold = f.threshold + 1;
    let member = |k: u64| {
        r.iter()
            .all(|&rj| rj.checked_mul(k).is_some_and(|v| f.contains(v - 1)))
    };
    // Past the threshold `r_j·k − 1 ≥ T`, so membership depends only on `k mod P`.
    let residues = (0..f.period)
        .map(|c| {
            let k = threshold + (c + f.period - threshold % f.period) % f.period;
            member(k)
        })
        .collect();
    let head = (1..threshold).filter(|&k| member(k)).collect();
    Ok(PeriodicForm {
        period: f.period,
        threshold,
        residues,
        head,
    }
    .into_exact())
}

/// Splits `base` by the rank of its members modulo `n`.
pub fn bounded_density_subpartition(base: &ExactSet, n: u64) -> Result<Vec<ExactSet>> {
    if n < 2 {
        return invalid("subpartition needs at least two parts");
    }
    let f = base.form()?.reduce();
    let period = checked_lcm(f.period, 1)? * n;
    if period > MAX_PERIOD {
        return invalid("subpartition period too large");
    }
    let mut heads = vec![BTreeSet::new(); n as usize];
    let mut rank = 0u64;
    for &k in &f.head {
        heads[(rank % n) as usize].insert(k);
        rank += 1;
    }
    let mut residues = vec![vec![false; period as usize]; n as usize];
    for k in f.threshold..f.threshold + period {
        if f.contains(k) {
            residues[(rank % n) as usize][(k % period) as usize] = true;
            rank += 1;
        }
    }
    Ok((0..n as usize)
        .map(|i| {
            PeriodicForm {
                period,
                threshold: f.threshold,
                residues: residues[i].clone(),
                head: heads[i].clone(),
            }
            .into_exact()
        })
        .collect())
}

/// Increasing disjoint integer intervals; their right ends are the checkpoints.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSet {
    pub intervals: Vec<(u64, u64)>,
    pub horizon: u64,
}

impl BlockSet {
    pub fn new(intervals: Vec<(u64, u64)>, horizon: u64) -> Result<Self> {
        for w in intervals.windows(2) {
            if w[0].1 >= w[1].0 {
                return invalid("block intervals must be increasing and disjoint");
            }
        }
        if intervals
            .iter()
            .any(|(a, b)| a > b || *a == 0 || *b > horizon)
        {
            return invalid("block interval out of range");
        }
        Ok(BlockSet { intervals, horizon })
    }

    pub fn checkpoints(&self) -> Vec<u64> {
        self.intervals.iter().map(|iv| iv.1).collect()
    }

    pub fn contains(&self, k: u64) -> bool {
        let i = self.intervals.partition_point(|iv| iv.1 < k);
        i < self.intervals.len() && self.intervals[i].0 <= k
    }

    pub fn to_piece_set(&self) -> PieceSet {
        PieceSet::from_intervals(&self.intervals, Some(self.horizon))
    }

    /// Profile at the set's own block ends.
    pub fn own_profile(&self) -> Result<DensityProfile> {
        self.to_piece_set().profile(&self.checkpoints())
    }
}

/// `n` disjoint block sets covering `[1, horizon]`; block `i` has length
/// `growth^{i²}` and goes to part `(i − 1) mod n`.
pub fn full_density_partition(n: usize, growth: u64, horizon: u64) -> Result<Vec<BlockSet>> {
    if n < 2 || growth < 2 {
        return invalid("need at least two parts and growth ≥ 2");
    }
    if horizon < growth {
        return invalid("horizon shorter than the first block");
    }
    let mut parts = vec![Vec::new(); n];
    let mut start = 1u64;
    let mut i = 1u32;
    while start <= horizon {
        let len = i
            .checked_mul(i)
            .and_then(|e| growth.checked_pow(e))
            .unwrap_or(u64::MAX);
        let end = start.saturating_add(len - 1).min(horizon);
        parts[(i as usize - 1) % n].push((start, end));
        start = end + 1;
        i += 1;
    }
    parts
        .into_iter()
        .map(|iv| BlockSet::new(iv, horizon))
        .collect()
}

/// Ends of the blocks of `full_density_partition(_, growth, horizon)`, in order.
pub fn partition_block_ends(growth: u64, horizon: u64) -> Vec<u64> {
    let mut ends = Vec::new();
    let mut start = 1u64;
    let mut i = 1u32;
    while start <= horizon {
        let len = i
            .checked_mul(i)
            .and_then(|e| growth.checked_pow(e))
            .unwrap_or(u64::MAX);
        let end = start.saturating_add(len - 1).min(horizon);
        ends.push(end);
        start = end + 1;
        i += 1;
    }
    ends
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(a: u64, b: u64) -> Density {
        Ratio::new(a, b)
    }

    #[test]
    fn exact_density_examples() {
        assert_eq!(
            exact_upper_density(&ExactSet::progression(2, 2)).unwrap(),
            r(1, 2)
        );
        assert_eq!(exact_upper_density(&ExactSet::naturals()).unwrap(), r(1, 1));
        assert_eq!(
            exact_upper_density(&ExactSet::from_progressions([(1, 3), (2, 3)])).unwrap(),
            r(2, 3)
        );
        assert!(exact_upper_density(&ExactSet::from_progressions([(1, 2), (3, 4)])).is_err());
    }

    #[test]
    fn canonical_form_is_minimal() {
        let s = ExactSet::from_progressions([(2, 4), (4, 4)])
            .canonical()
            .unwrap();
        assert_eq!(s, ExactSet::progression(2, 2));
        let odds_evens = set_algebra(
            &ExactSet::progression(1, 2),
            &ExactSet::progression(2, 2),
            SetOp::Union,
        )
        .unwrap();
        assert_eq!(odds_evens, ExactSet::naturals());
        let a = ExactSet::from_progressions([(3, 5)]);
        assert_eq!(
            set_algebra(&a, &ExactSet::naturals(), SetOp::Intersect).unwrap(),
            a.canonical().unwrap()
        );
    }

    #[test]
    fn q_set_examples() {
        let q = q_set(&ExactSet::progression(1, 2), &[1, 2]).unwrap();
        assert_eq!(exact_upper_density(&q).unwrap(), r(1, 2));
        assert!((1..200).all(|k| q.contains(k) == (k % 2 == 0)));
        let q = q_set(&ExactSet::naturals(), &[1, 2, 3]).unwrap();
        assert_eq!(exact_upper_density(&q).unwrap(), r(1, 1));
        assert!(!q.contains(1) && q.contains(2));
    }

    #[test]
    fn subpartition_examples() {
        let parts = bounded_density_subpartition(&ExactSet::naturals(), 2).unwrap();
        assert_eq!(exact_upper_density(&parts[0]).unwrap(), r(1, 2));
        assert_eq!(exact_upper_density(&parts[1]).unwrap(), r(1, 2));
        let parts = bounded_density_subpartition(&ExactSet::progression(2, 2), 2).unwrap();
        assert_eq!(exact_upper_density(&parts[0]).unwrap(), r(1, 4));
        assert_eq!(exact_upper_density(&parts[1]).unwrap(), r(1, 4));
        for k in 1..2000 {
            let hits = parts.iter().filter(|p| p.contains(k)).count();
            assert_eq!(hits, usize::from(k % 2 == 0));
        }
    }

    #[test]
    fn empirical_profile_examples() {
        let p = empirical_density_profile(|_| true, 100, &[10, 100]).unwrap();
        assert!(p.points.iter().all(|q| q.count == q.n));
        let p = empirical_density_profile(|k| k % 2 == 0, 1000, &[1000]).unwrap();
        assert_eq!(p.points[0].exact(), r(1, 2));
        assert!(empirical_density_profile(|_| true, 10, &[]).is_err());
    }

    #[test]
    fn partition_covers_and_is_dense() {
        let parts = full_density_partition(2, 2, 1_000_000).unwrap();
        let sets: Vec<PieceSet> = parts.iter().map(BlockSet::to_piece_set).collect();
        assert_eq!(
            sets[0].intersect(&sets[1]).unwrap().count_upto(1_000_000),
            0
        );
        assert_eq!(
            sets[0].union(&sets[1]).unwrap().count_upto(1_000_000),
            1_000_000
        );
        for p in &parts {
            let prof =
                empirical_density_profile(|k| p.contains(k), 1_000_000, &p.checkpoints()).unwrap();
            assert!(prof.sup.ratio >= 0.9);
        }
        assert_eq!(
            partition_block_ends(2, 70_000),
            vec![2, 18, 530, 66066, 70_000]
        );
        let three = full_density_partition(3, 2, 100_000).unwrap();
        let u = three.iter().map(BlockSet::to_piece_set).collect::<Vec<_>>();
        assert_eq!(
            PieceSet::union_all(&u).unwrap().count_upto(100_000),
            100_000
        );
        assert!(full_density_partition(2, 2, 1).is_err());
    }

    #[test]
    fn piece_set_basics() {
        let a = PieceSet::from_intervals(&[(3, 7), (10, 12)], Some(20));
        assert_eq!(a.count_upto(20), 8);
        assert_eq!(a.complement().count_upto(20), 12);
        assert_eq!(a.runs(100), vec![(3, 7), (10, 12)]);
        assert_eq!(a.next_member(8, 20), Some(10));
        let ev = PieceSet::residue_class(0, 2, None).unwrap();
        assert_eq!(ev.exact_density(), Some(r(1, 2)));
        let both = a.intersect(&ev).unwrap();
        assert_eq!(both.runs(20), vec![(4, 4), (6, 6), (10, 10), (12, 12)]);
        assert_eq!(both.horizon(), Some(20));
    }

    fn exact_strategy() -> impl Strategy<Value = ExactSet> {
        (
            proptest::collection::vec((1u64..12, 1u64..7), 0..4),
            proptest::collection::btree_set(1u64..40, 0..4),
            proptest::collection::btree_set(1u64..40, 0..4),
        )
            .prop_map(|(ps, inc, exc)| {
                let exclude: BTreeSet<u64> = exc.difference(&inc).copied().collect();
                ExactSet {
                    progressions: ps
                        .into_iter()
                        .map(|(o, s)| Progression::new(o, s))
                        .collect(),
                    include: inc,
                    exclude,
                }
            })
    }

    proptest! {
        #[test]
        fn set_algebra_matches_bitmap(a in exact_strategy(), b in exact_strategy()) {
            for op in [SetOp::Union, SetOp::Intersect, SetOp::Difference] {
                let c = set_algebra(&a, &b, op).unwrap();
                for k in 1..600u64 {
                    let want = match op {
                        SetOp::Union => a.contains(k) || b.contains(k),
                        SetOp::Intersect => a.contains(k) && b.contains(k),
                        SetOp::Difference => a.contains(k) && !b.contains(k),
                    };
                    prop_assert_eq!(c.contains(k), want);
                }
                prop_assert!(c.is_disjoint_family());
            }
        }

        #[test]
        fn canonical_density_matches_long_run_count(a in exact_strategy()) {
            let c = a.canonical().unwrap();
            let d = exact_upper_density(&c).unwrap();
            let ps = c.to_piece_set().unwrap();
            prop_assert_eq!(ps.exact_density().unwrap(), d);
            let n = 55_440u64;
            let cnt = (1..=n).filter(|&k| a.contains(k)).count() as u64;
            prop_assert_eq!(ps.count_upto(n), cnt);
            let approx = cnt as f64 / n as f64;
            prop_assert!((approx - *d.numer() as f64 / *d.denom() as f64).abs() < 1e-3);
        }

        #[test]
        fn q_set_matches_scan(a in exact_strategy(), r1 in 1u64..5, r2 in 1u64..5) {
            let q = q_set(&a, &[r1, r2]).unwrap();
            for k in 1..800u64 {
                let want = [r1, r2].iter().all(|&rj| a.contains(rj * k - 1));
                prop_assert_eq!(q.contains(k), want);
            }
        }

        #[test]
        fn piece_ops_match_bitmaps(
            iv1 in proptest::collection::vec((1u64..300, 0u64..40), 0..6),
            iv2 in proptest::collection::vec((1u64..300, 0u64..40), 0..6),
            m in 1u64..6, res in 0u64..6,
        ) {
            let a = PieceSet::from_intervals(&iv1.iter().map(|(s, l)| (*s, s + l)).collect::<Vec<_>>(), Some(400));
            let b = PieceSet::from_intervals(&iv2.iter().map(|(s, l)| (*s, s + l)).collect::<Vec<_>>(), None)
                .intersect(&PieceSet::residue_class(res, m, None).unwrap()).unwrap();
            let u = a.union(&b).unwrap();
            let i = a.intersect(&b).unwrap();
            let d = a.difference(&b).unwrap();
            let c = b.complement();
            let mut cnt = 0;
            for k in 1..=400u64 {
                let (x, y) = (a.contains(k), b.contains(k));
                prop_assert_eq!(u.contains(k), x || y);
                prop_assert_eq!(i.contains(k), x && y);
                prop_assert_eq!(d.contains(k), x && !y);
                prop_assert_eq!(c.contains(k), !y);
                cnt += u64::from(x || y);
                prop_assert_eq!(u.count_upto(k), cnt);
            }
            let parts = u.rank_subpartition(3).unwrap();
            let mut rank = 0u64;
            for k in 1..=400u64 {
                if u.contains(k) {
                    prop_assert!(parts[(rank % 3) as usize].contains(k));
                    rank += 1;
                } else {
                    prop_assert!(parts.iter().all(|p| !p.contains(k)));
                }
            }
        }

        #[test]
        fn profiles_match_bitmap_and_stay_below_one(iv in proptest::collection::vec((1u64..5000, 0u64..400), 0..8)) {
            let ivs: Vec<(u64, u64)> = iv.iter().map(|(s, l)| (*s, s + l)).collect();
            let ps = PieceSet::from_intervals(&ivs, Some(10_000));
            let cps = [10, 100, 1000, 5000, 10_000];
            let prof = ps.profile(&cps).unwrap();
            let scan = empirical_density_profile(|k| ps.contains(k), 10_000, &cps).unwrap();
            for (p, q) in prof.points.iter().zip(&scan.points) {
                prop_assert_eq!(p.count, q.count);
                prop_assert!(p.ratio <= 1.0);
            }
        }
    }
}
