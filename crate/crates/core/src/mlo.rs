//! Values of multivalued linear operators as affine cosets `base + subspace`.

use std::collections::BTreeSet;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::space::{
    frechet_sum, GridFunction, IndexDomain, Point, SeminormKind, SeminormSpace, SeqVector,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subspace {
    /// Span of the listed basis vectors.
    Span(BTreeSet<i64>),
    /// Grid functions vanishing on `(-∞, t]`.
    SupportBeyond(f64),
    Zero,
}

impl Subspace {
    pub fn span_upto(n: u64) -> Subspace {
        if n == 0 {
            Subspace::Zero
        } else {
            Subspace::Span((1..=n as i64).collect())
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Subspace::Span(s) => s.is_empty(),
            Subspace::SupportBeyond(_) => false,
            Subspace::Zero => true,
        }
    }

    /// Whether `v` lies in the subspace.
    pub fn contains(&self, v: &Point) -> bool {
        match (self, v) {
            (_, v) if v.is_zero() => true,
            (Subspace::Span(s), Point::Seq(x)) => x.iter().all(|(i, _)| s.contains(&i)),
            (Subspace::SupportBeyond(t), Point::Grid(f)) => {
                f.iter().all(|(p, _)| ratio_f64(p) > *t)
            }
            _ => false,
        }
    }
}

fn ratio_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineCoset {
    pub base: Point,
    pub subspace: Subspace,
}

impl AffineCoset {
    pub fn new(base: Point, subspace: Subspace) -> Result<Self> {
        match (&base, &subspace) {
            (Point::Grid(_), Subspace::Span(s)) if !s.is_empty() => {
                invalid("basis span attached to a grid function")
            }
            (Point::Seq(_), Subspace::SupportBeyond(_)) => {
                invalid("support subspace attached to a sequence")
            }
            (_, Subspace::SupportBeyond(t)) if !t.is_finite() => {
                invalid("support threshold must be finite")
            }
            _ => Ok(AffineCoset { base, subspace }),
        }
    }

    pub fn single(base: Point) -> Self {
        AffineCoset {
            base,
            subspace: Subspace::Zero,
        }
    }

    pub fn contains(&self, z: &Point) -> bool {
        z.sub(&self.base).is_ok_and(|d| self.subspace.contains(&d))
    }
}

pub fn canonicalize(c: &AffineCoset) -> AffineCoset {
    let base = match (&c.base, &c.subspace) {
        (Point::Seq(x), Subspace::Span(s)) => Point::Seq(
            SeqVector::from_pairs(x.domain(), x.iter().filter(|(i, _)| !s.contains(i)))
                .expect("same domain"),
        ),
        (Point::Grid(f), Subspace::SupportBeyond(t)) => {
            let mut g = f.clone();
            for (i, _) in f.index_iter() {
                if ratio_f64(f.point(i)) > *t {
                    g.set_index(i, 0.0);
                }
            }
            Point::Grid(g)
        }
        _ => c.base.clone(),
    };
    AffineCoset {
        base,
        subspace: c.subspace.clone(),
    }
}

/// Smallest `p_m` over the coset and an element attaining it.
///
/// Every seminorm handled here is monotone in the absolute values of the
/// coordinates, so zeroing the free coordinates minimizes it.
pub fn min_seminorm(c: &AffineCoset, space: &SeminormSpace, m: u64) -> Result<(f64, Point)> {
    let base = canonicalize(c).base;
    Ok((space.point_seminorm(m, &base)?, base))
}

/// Whether some subspace vector has positive `p_m`.
fn subspace_seen_by(space: &SeminormSpace, sub: &Subspace, m: u64) -> bool {
    match sub {
        Subspace::Zero => false,
        Subspace::Span(s) => match space.kind {
            SeminormKind::FrechetTruncation => s.iter().any(|i| i.unsigned_abs() <= m),
            _ => !s.is_empty(),
        },
        Subspace::SupportBeyond(t) => *t < m as f64,
    }
}

/// `sup p_m` over the coset, possibly `+∞`.
pub fn sup_seminorm(c: &AffineCoset, space: &SeminormSpace, m: u64) -> Result<f64> {
    if subspace_seen_by(space, &c.subspace, m) {
        return Ok(f64::INFINITY);
    }
    space.point_seminorm(m, &canonicalize(c).base)
}

/// Smallest free coordinate visible to `p_m`, as a unit vector.
fn free_direction(space: &SeminormSpace, c: &AffineCoset, m: u64) -> Option<Point> {
    match (&c.subspace, &c.base) {
        (Subspace::Span(s), Point::Seq(x)) => {
            let i = s.iter().copied().find(|i| {
                !matches!(space.kind, SeminormKind::FrechetTruncation) || i.unsigned_abs() <= m
            })?;
            let mut v = SeqVector::zeros(x.domain());
            v.put(i, 1.0);
            Some(Point::Seq(v))
        }
        (Subspace::SupportBeyond(t), Point::Grid(f)) => {
            let step = ratio_f64(f.step());
            let idx = (t / step).floor() as i64 + 1;
            let idx = (idx..).find(|&i| ratio_f64(f.point(i)) > *t)?;
            if ratio_f64(f.point(idx)) > m as f64 {
                return None;
            }
            let mut g = GridFunction::new(f.step()).ok()?;
            g.set_index(idx, 1.0);
            Some(Point::Grid(g))
        }
        _ => None,
    }
}

/// An element of the coset whose `p_m` exceeds `threshold`.
pub fn select_exceeding(
    c: &AffineCoset,
    space: &SeminormSpace,
    m: u64,
    threshold: f64,
) -> Result<Point> {
    let (low, base) = min_seminorm(c, space, m)?;
    if low > threshold {
        return Ok(base);
    }
    let sup = sup_seminorm(c, space, m)?;
    if sup.is_finite() {
        return Err(Error::NotAttainable { sup, threshold });
    }
    let dir = free_direction(space, c, m).ok_or(Error::NotAttainable { sup, threshold })?;
    let mut s = threshold.abs() + 1.0;
    for _ in 0..2000 {
        let z = base.lin_comb(1.0, &dir, s)?;
        if space.point_seminorm(m, &z)? > threshold {
            return Ok(z);
        }
        s *= 2.0;
    }
    Err(Error::NotAttainable { sup, threshold })
}

/// `(A^j + W)^k x` for the forward shift `A` on ℓ² and `W = span{e_1, …, e_w}`.
pub fn extension_power_coset(j: u64, w: u64, k: u64, x: &SeqVector) -> Result<AffineCoset> {
    if x.domain() != IndexDomain::Natural {
        return invalid("shift extensions act on ℕ-indexed vectors");
    }
    let shift = (j * k) as i64;
    let base = SeqVector::from_pairs(IndexDomain::Natural, x.iter().map(|(n, v)| (n + shift, v)))?;
    let mut span = BTreeSet::new();
    for i in 0..k {
        for n in 1..=w {
            span.insert((n + j * i) as i64);
        }
    }
    Ok(canonicalize(&AffineCoset {
        base: Point::Seq(base),
        subspace: Subspace::Span(span),
    }))
}

pub fn purely_multivalued(c: &AffineCoset) -> bool {
    !c.subspace.is_zero()
}

/// Range of the distance to the origin over the coset: the Fréchet metric
/// truncated at `tol` for seminorm families, the norm otherwise.
pub fn distance_range(c: &AffineCoset, space: &SeminormSpace, tol: f64) -> Result<(f64, f64)> {
    if space.is_frechet() {
        let lo = frechet_sum(tol, |n| Ok(min_seminorm(c, space, n)?.0))?;
        let hi = frechet_sum(tol, |n| sup_seminorm(c, space, n))?;
        Ok((lo, hi))
    } else {
        Ok((min_seminorm(c, space, 1)?.0, sup_seminorm(c, space, 1)?))
    }
}

/// Doubly indexed MLO families whose values are cosets in closed form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MloFamily {
    /// `𝒜_{j,k} = (A^{r_j} + span{e_1..e_{r_j}})^k` on ℓ².
    ShiftExtension { orders: Vec<u64> },
    /// `𝒜_{j,k} x = x + span`, the same for every `j` and `k`.
    IdentityPlusSpan { count: usize, span: BTreeSet<i64> },
    /// `𝒜_{j,k} f = f + C_{[jk, ∞)}` on grid functions.
    SupportBeyond { count: usize },
}

impl MloFamily {
    pub fn count(&self) -> usize {
        match self {
            MloFamily::ShiftExtension { orders } => orders.len(),
            MloFamily::IdentityPlusSpan { count, .. } | MloFamily::SupportBeyond { count } => {
                *count
            }
        }
    }

    pub fn value(&self, j: usize, k: u64, x: &Point) -> Result<AffineCoset> {
        if j == 0 || j > self.count() {
            return invalid(format!("family index {j} out of range"));
        }
        match (self, x) {
            (MloFamily::ShiftExtension { orders }, Point::Seq(v)) => {
                let r = orders[j - 1];
                extension_power_coset(r, r, k, v)
            }
            (MloFamily::IdentityPlusSpan { span, .. }, Point::Seq(_)) => Ok(canonicalize(
                &AffineCoset::new(x.clone(), Subspace::Span(span.clone()))?,
            )),
            (MloFamily::SupportBeyond { .. }, Point::Grid(_)) => Ok(canonicalize(
                &AffineCoset::new(x.clone(), Subspace::SupportBeyond((j as u64 * k) as f64))?,
            )),
            _ => invalid("vector kind does not match the family"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn span(ix: &[i64]) -> Subspace {
        Subspace::Span(ix.iter().copied().collect())
    }

    fn seq(pairs: &[(i64, f64)]) -> Point {
        Point::Seq(SeqVector::from_pairs(IndexDomain::Natural, pairs.iter().copied()).unwrap())
    }

    fn sample(c: &AffineCoset, rng: &mut ChaCha8Rng) -> Point {
        match (&c.subspace, &c.base) {
            (Subspace::Span(s), Point::Seq(x)) => {
                let mut v = x.clone();
                for &i in s {
                    v.put(i, x.get(i) + rng.gen_range(-5.0..5.0));
                }
                Point::Seq(v)
            }
            (Subspace::SupportBeyond(t), Point::Grid(f)) => {
                let mut g = f.clone();
                let first = (t * 8.0).floor() as i64 + 1;
                for i in first..first + 40 {
                    g.set_index(i, f.value_at_index(i) + rng.gen_range(-5.0..5.0));
                }
                Point::Grid(g)
            }
            _ => c.base.clone(),
        }
    }

    #[test]
    fn canonicalize_examples() {
        let c = AffineCoset::new(seq(&[(1, 1.0), (5, 1.0)]), span(&[1])).unwrap();
        assert_eq!(canonicalize(&c).base, seq(&[(5, 1.0)]));
        let z = AffineCoset::new(seq(&[(1, 1.0), (5, 1.0)]), Subspace::Zero).unwrap();
        assert_eq!(canonicalize(&z), z);
    }

    #[test]
    fn min_and_sup_examples() {
        let l2 = SeminormSpace::lp(2.0);
        let c = AffineCoset::new(seq(&[(5, 1.0)]), Subspace::span_upto(4)).unwrap();
        assert_eq!(min_seminorm(&c, &l2, 1).unwrap(), (1.0, seq(&[(5, 1.0)])));
        let c = AffineCoset::new(seq(&[(1, 1.0), (2, 1.0)]), span(&[1])).unwrap();
        assert_eq!(min_seminorm(&c, &l2, 1).unwrap().0, 1.0);
        assert_eq!(sup_seminorm(&c, &l2, 1).unwrap(), f64::INFINITY);
        let zero = AffineCoset::new(seq(&[(3, 2.0)]), Subspace::Zero).unwrap();
        assert_eq!(sup_seminorm(&zero, &l2, 1).unwrap(), 2.0);

        let grid = SeminormSpace::grid_sup();
        let mut f = GridFunction::default_grid();
        f.set(Ratio::new(-5, 2), 3.0).unwrap();
        f.set(Ratio::new(1, 1), -1.5).unwrap();
        let c = AffineCoset::new(Point::Grid(f.clone()), Subspace::SupportBeyond(5.0)).unwrap();
        assert_eq!(
            min_seminorm(&c, &grid, 3).unwrap().0,
            grid.grid_seminorm(3, &f).unwrap()
        );
        let c7 = AffineCoset::new(Point::Grid(f.clone()), Subspace::SupportBeyond(7.0)).unwrap();
        assert_eq!(sup_seminorm(&c7, &grid, 3).unwrap(), 3.0);
        assert_eq!(sup_seminorm(&c7, &grid, 8).unwrap(), f64::INFINITY);
    }

    #[test]
    fn select_exceeding_examples() {
        let l2 = SeminormSpace::lp(2.0);
        let c = AffineCoset::new(seq(&[(3, 0.5)]), span(&[1])).unwrap();
        let z = select_exceeding(&c, &l2, 1, 1024.0).unwrap();
        assert!(l2.point_seminorm(1, &z).unwrap() > 1024.0);
        assert!(c.contains(&z));
        assert_eq!(select_exceeding(&c, &l2, 1, 0.1).unwrap(), c.base);

        let grid = SeminormSpace::grid_sup();
        let mut f = GridFunction::default_grid();
        f.set_index(4, 2.0);
        let c = AffineCoset::new(Point::Grid(f), Subspace::SupportBeyond(5.0)).unwrap();
        assert!(matches!(
            select_exceeding(&c, &grid, 3, 2.5),
            Err(Error::NotAttainable { .. })
        ));
        let z = select_exceeding(&c, &grid, 6, 2.5).unwrap();
        assert!(grid.point_seminorm(6, &z).unwrap() > 2.5 && c.contains(&z));
    }

    #[test]
    fn extension_power_examples() {
        let c = extension_power_coset(1, 1, 1, &SeqVector::basis(1)).unwrap();
        assert_eq!(c, AffineCoset::new(seq(&[(2, 1.0)]), span(&[1])).unwrap());
        let c = extension_power_coset(2, 2, 3, &SeqVector::basis(1)).unwrap();
        assert_eq!(
            c,
            AffineCoset::new(seq(&[(7, 1.0)]), Subspace::span_upto(6)).unwrap()
        );
        assert!(purely_multivalued(&c));
        assert!(!purely_multivalued(&AffineCoset::single(seq(&[(1, 1.0)]))));
        assert!(purely_multivalued(
            &AffineCoset::new(seq(&[]), span(&[1])).unwrap()
        ));
    }

    #[test]
    fn extension_power_equals_iterated_sum() {
        // (A^j + W)^k x by iterating the relation: the image of a coset b + V is A^j b + A^j V + W.
        for (j, k) in [(1u64, 4u64), (2, 3), (3, 2)] {
            let x = SeqVector::from_dense(&[0.5, -1.0, 2.0]);
            let mut base = x.clone();
            let mut sub: BTreeSet<i64> = BTreeSet::new();
            for _ in 0..k {
                base = SeqVector::from_pairs(
                    IndexDomain::Natural,
                    base.iter().map(|(n, v)| (n + j as i64, v)),
                )
                .unwrap();
                sub = sub
                    .iter()
                    .map(|i| i + j as i64)
                    .chain(1..=j as i64)
                    .collect();
            }
            let got = extension_power_coset(j, j, k, &x).unwrap();
            assert_eq!(
                got,
                canonicalize(&AffineCoset::new(Point::Seq(base), Subspace::Span(sub)).unwrap())
            );
        }
    }

    #[test]
    fn zero_coset_has_zero_minimum() {
        let c = AffineCoset::new(seq(&[]), span(&[1, 2, 3])).unwrap();
        assert_eq!(min_seminorm(&c, &SeminormSpace::lp(2.0), 1).unwrap().0, 0.0);
        assert_eq!(min_seminorm(&c, &SeminormSpace::c0(), 1).unwrap().0, 0.0);
    }

    #[test]
    fn qwer_lower_bound_on_samples() {
        let l2 = SeminormSpace::lp(2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = SeqVector::from_dense(&[0.3, -2.0, 1.1]);
        for j in 1..=3 {
            for k in 1..=20 {
                let c = extension_power_coset(j, j, k, &x).unwrap();
                for _ in 0..20 {
                    let z = sample(&c, &mut rng);
                    assert!(l2.point_seminorm(1, &z).unwrap() >= x.max_abs());
                }
            }
        }
    }

    fn coset_strategy() -> impl Strategy<Value = AffineCoset> {
        (
            proptest::collection::vec((1i64..12, -3.0f64..3.0), 0..6),
            proptest::collection::btree_set(1i64..12, 0..5),
        )
            .prop_map(|(b, s)| AffineCoset::new(seq(&b), Subspace::Span(s)).unwrap())
    }

    fn space_strategy() -> impl Strategy<Value = SeminormSpace> {
        prop_oneof![
            (1.0f64..4.0).prop_map(SeminormSpace::lp),
            Just(SeminormSpace::c0()),
            Just(SeminormSpace::frechet(IndexDomain::Natural)),
        ]
    }

    proptest! {
        #[test]
        fn canonical_base_is_in_the_same_coset(c in coset_strategy()) {
            let d = canonicalize(&c);
            prop_assert!(c.subspace.contains(&d.base.sub(&c.base).unwrap()));
            prop_assert_eq!(canonicalize(&d), d.clone());
        }

        #[test]
        fn sampled_elements_lie_between_min_and_sup(c in coset_strategy(), space in space_strategy(), m in 1u64..15, seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = canonicalize(&c);
            let lo = min_seminorm(&c, &space, m).unwrap().0;
            let hi = sup_seminorm(&c, &space, m).unwrap();
            for _ in 0..100 {
                let z = sample(&c, &mut rng);
                let v = space.point_seminorm(m, &z).unwrap();
                prop_assert!(lo <= v + 1e-12 && v <= hi + 1e-12);
            }
        }

        #[test]
        fn selection_is_a_member_and_exceeds(c in coset_strategy(), space in space_strategy(), m in 1u64..15, thr in 0.0f64..1e6) {
            let c = canonicalize(&c);
            match select_exceeding(&c, &space, m, thr) {
                Ok(z) => {
                    prop_assert!(c.contains(&z));
                    prop_assert!(space.point_seminorm(m, &z).unwrap() > thr);
                }
                Err(Error::NotAttainable { sup, .. }) => prop_assert!(sup <= thr),
                Err(e) => prop_assert!(false, "{e}"),
            }
        }

        #[test]
        fn grid_selection_matches_attainability(t in 0.0f64..10.0, m in 1u64..12, thr in 0.0f64..100.0) {
            let grid = SeminormSpace::grid_sup();
            let mut f = GridFunction::default_grid();
            f.set_index(0, 1.0);
            let c = AffineCoset::new(Point::Grid(f), Subspace::SupportBeyond(t)).unwrap();
            let r = select_exceeding(&c, &grid, m, thr);
            if thr < 1.0 || t < m as f64 {
                let z = r.unwrap();
                prop_assert!(c.contains(&z) && grid.point_seminorm(m, &z).unwrap() > thr);
            } else {
                let is_not_attainable = matches!(r, Err(Error::NotAttainable { .. }));
                prop_assert!(is_not_attainable);
            }
        }
    }
}
