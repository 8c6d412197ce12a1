//! Interval domination along the walk: the Z and W counters, extraction of
//! the unique xi-good collection of a trajectory, variant enumeration and the
//! brute-force satisfactory check.
//!
//! Index conventions. The distinguished times of a collection are the k >= 2
//! with (i) w_{k-1}(J) dominating w_l(J) for all 0 <= l < k-1, (ii) the
//! increment g_k in {a, e}, and (iii) w_k^{-1}(xi) outside J. The W counter
//! counts k in [1, n-1] with the domination chain at k, the pullback
//! condition at k and g_{k+1} in {a, e}. Because a fixes the complement of J
//! and maps J onto J, condition (iii) at k is equivalent to the same
//! condition at k-1 whenever g_k is in {a, e}, so the two families are in
//! exact bijection (distinguished time k <-> W-time k-1) and the counts
//! agree trajectory by trajectory.

use std::collections::HashSet;
use std::sync::Arc as StdArc;

use crate::error::{Error, Result};
use crate::exact::{CirclePoint, Rational};
use crate::map::{CircleArc, PiecewiseAffineCircleMap, Support};
use crate::walk::Trajectory;

/// Default hard cap on distinguished times for the 2^k enumeration.
pub const VARIANT_CAP: usize = 16;

/// Arc domination: disjoint, or i2 inside the open interior of i1.
pub fn dominates(i1: &CircleArc, i2: &CircleArc) -> bool {
    let s = i2.left().offset_from(i1.left());
    let l1 = i1.length();
    let l2 = i2.length();
    let contained = s.is_positive() && &s + &l2 < l1;
    let disjoint = s > l1 && &s + &l2 < Rational::one();
    contained || disjoint
}

/// The arcs J, w_1(J), ..., w_n(J).
pub fn arc_images(trajectory: &Trajectory, j: &CircleArc, n: usize) -> Result<Vec<CircleArc>> {
    if n > trajectory.horizon() {
        return Err(Error::InvalidParameter(format!(
            "n = {n} beyond trajectory horizon {}",
            trajectory.horizon()
        )));
    }
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..=n {
        out.push(CircleArc::new(
            trajectory.evaluate_position(k, j.left()),
            trajectory.evaluate_position(k, j.right()),
        ));
    }
    Ok(out)
}

/// Z^J_{n,s}: the number of k <= ceil(n/s) such that w_{ks}(J) dominates
/// w_{js}(J) for all 0 <= j <= k-1.
pub fn count_z(trajectory: &Trajectory, j: &CircleArc, sparsity: usize, n: usize) -> Result<u64> {
    if sparsity == 0 || sparsity >= n.max(2) {
        return Err(Error::InvalidParameter(format!(
            "sparsity {sparsity} outside [1, n)"
        )));
    }
    let k_max = n.div_ceil(sparsity);
    let top = k_max * sparsity;
    if top > trajectory.horizon() {
        return Err(Error::InvalidParameter(format!(
            "Z needs horizon >= {top}, trajectory has {}",
            trajectory.horizon()
        )));
    }
    let mut arcs = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        arcs.push(CircleArc::new(
            trajectory.evaluate_position(k * sparsity, j.left()),
            trajectory.evaluate_position(k * sparsity, j.right()),
        ));
    }
    let mut z = 0u64;
    for k in 1..=k_max {
        if (0..k).all(|l| dominates(&arcs[k], &arcs[l])) {
            z += 1;
        }
    }
    Ok(z)
}

/// Indicator of the event behind the sparsity lower bound: w_{js}(J)
/// dominates J itself for every 1 <= j <= j_max.
pub fn dominates_base_for_all(
    trajectory: &Trajectory,
    j: &CircleArc,
    sparsity: usize,
    j_max: usize,
) -> Result<bool> {
    if sparsity == 0 {
        return Err(Error::InvalidParameter("sparsity must be positive".into()));
    }
    if sparsity * j_max > trajectory.horizon() {
        return Err(Error::InvalidParameter(format!(
            "needs horizon >= {}, trajectory has {}",
            sparsity * j_max,
            trajectory.horizon()
        )));
    }
    for step in 1..=j_max {
        let arc = CircleArc::new(
            trajectory.evaluate_position(step * sparsity, j.left()),
            trajectory.evaluate_position(step * sparsity, j.right()),
        );
        if !dominates(&arc, j) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn require_support_inside(a: &PiecewiseAffineCircleMap, j: &CircleArc) -> Result<()> {
    match a.support() {
        Support::Empty => Err(Error::InvalidParameter(
            "a must be a nontrivial element".into(),
        )),
        Support::Full => Err(Error::InvalidParameter(
            "support of a must avoid part of the circle".into(),
        )),
        Support::Arcs(arcs) => {
            for arc in &arcs {
                if !j.contains_arc(arc) {
                    return Err(Error::InvalidParameter(format!(
                        "support arc {arc} of a is not inside J = {j}"
                    )));
                }
            }
            Ok(())
        }
    }
}

/// W_n: number of k in [1, n-1] with the domination chain at k, the pulled
/// back boundary point outside J at k, and g_{k+1} in {a, e}.
pub fn count_w(
    trajectory: &Trajectory,
    xi_hat: &CirclePoint,
    a: &PiecewiseAffineCircleMap,
    j: &CircleArc,
    n: usize,
) -> Result<u64> {
    require_support_inside(a, j)?;
    if n > trajectory.horizon() {
        return Err(Error::InvalidParameter(format!(
            "W needs horizon >= {n}, trajectory has {}",
            trajectory.horizon()
        )));
    }
    let arcs = arc_images(trajectory, j, n.saturating_sub(1))?;
    let mut w = 0u64;
    let mut orbit = trajectory.pullback_orbit(xi_hat);
    for k in 1..n {
        let pullback = orbit.advance().expect("k < n <= horizon").clone();
        let chain = (0..k).all(|l| dominates(&arcs[k], &arcs[l]));
        if !chain {
            continue;
        }
        if j.contains(&pullback) {
            continue;
        }
        let g_next = trajectory.increment(k + 1);
        if g_next == a || g_next.is_identity() {
            w += 1;
        }
    }
    Ok(w)
}

/// A collection of length n: distinguished times with the other increments
/// frozen.
#[derive(Clone, Debug)]
pub struct Collection {
    pub length: usize,
    /// Strictly increasing distinguished times in [1, n].
    pub times: Vec<usize>,
    /// (index, increment) for every index in [1, n] outside `times`.
    pub fixed: Vec<(usize, StdArc<PiecewiseAffineCircleMap>)>,
}

impl Collection {
    pub fn distinguished_count(&self) -> usize {
        self.times.len()
    }

    /// Keeps only the first `max_k` distinguished times; later distinguished
    /// increments are frozen to their trajectory values.
    pub fn truncated(&self, max_k: usize, trajectory: &Trajectory) -> Collection {
        if self.times.len() <= max_k {
            return self.clone();
        }
        let (keep, drop) = self.times.split_at(max_k);
        let mut fixed = self.fixed.clone();
        for &idx in drop {
            fixed.push((idx, StdArc::new(trajectory.increment(idx).clone())));
        }
        fixed.sort_by_key(|(i, _)| *i);
        Collection {
            length: self.length,
            times: keep.to_vec(),
            fixed,
        }
    }
}

/// Extracts the unique xi-good collection of the trajectory over [1, n]:
/// distinguished times are exactly the k with the (non-vacuous) domination
/// chain at k-1, increment g_k in {a, e}, and w_k^{-1}(xi) outside J.
pub fn extract_good_collection(
    trajectory: &Trajectory,
    xi_hat: &CirclePoint,
    a: &PiecewiseAffineCircleMap,
    j: &CircleArc,
    n: usize,
) -> Result<Collection> {
    require_support_inside(a, j)?;
    if n > trajectory.horizon() {
        return Err(Error::InvalidParameter(format!(
            "collection window {n} beyond trajectory horizon {}",
            trajectory.horizon()
        )));
    }
    let arcs = arc_images(trajectory, j, n.saturating_sub(1))?;
    let mut times = Vec::new();
    let mut fixed = Vec::new();
    let mut orbit = trajectory.pullback_orbit(xi_hat);
    for k in 1..=n {
        let pullback = orbit.advance().expect("k <= n <= horizon").clone();
        let g_k = trajectory.increment(k);
        let distinguished = k >= 2
            && (g_k == a || g_k.is_identity())
            && !j.contains(&pullback)
            && (0..k - 1).all(|l| dominates(&arcs[k - 1], &arcs[l]));
        if distinguished {
            times.push(k);
        } else {
            fixed.push((k, StdArc::new(g_k.clone())));
        }
    }
    Ok(Collection {
        length: n,
        times,
        fixed,
    })
}

/// The 2^k endpoints w_n over all substitutions of the distinguished
/// increments by a or e, sharing prefix products across the expansion tree.
pub fn enumerate_variants(
    q: &Collection,
    a: &PiecewiseAffineCircleMap,
) -> Result<Vec<PiecewiseAffineCircleMap>> {
    enumerate_variants_capped(q, a, VARIANT_CAP)
}

pub fn enumerate_variants_capped(
    q: &Collection,
    a: &PiecewiseAffineCircleMap,
    cap: usize,
) -> Result<Vec<PiecewiseAffineCircleMap>> {
    let k = q.times.len();
    if k > cap {
        return Err(Error::CollectionCapExceeded { k, cap });
    }
    // blocks[r] = product of frozen increments strictly between distinguished
    // times r and r+1 (block 0 before the first, block k after the last)
    let mut blocks = vec![PiecewiseAffineCircleMap::identity(); k + 1];
    {
        let mut block_idx = 0usize;
        let mut fixed_iter = q.fixed.iter().peekable();
        for idx in 1..=q.length {
            if block_idx < k && idx == q.times[block_idx] {
                block_idx += 1;
                continue;
            }
            match fixed_iter.peek() {
                Some((fi, g)) if *fi == idx => {
                    blocks[block_idx] = blocks[block_idx].compose(g);
                    fixed_iter.next();
                }
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "collection is missing a fixed increment at index {idx}"
                    )))
                }
            }
        }
    }
    let mut frontier = vec![blocks[0].clone()];
    for block in blocks.iter().skip(1) {
        let mut next = Vec::with_capacity(frontier.len() * 2);
        for prefix in &frontier {
            // substitute e: the block follows directly
            next.push(prefix.compose(block));
            // substitute a
            next.push(prefix.compose(a).compose(block));
        }
        frontier = next;
    }
    Ok(frontier)
}

/// True iff all 2^k variant endpoints are pairwise distinct under canonical
/// equality.
pub fn is_satisfactory(q: &Collection, a: &PiecewiseAffineCircleMap) -> Result<bool> {
    is_satisfactory_capped(q, a, VARIANT_CAP)
}

pub fn is_satisfactory_capped(
    q: &Collection,
    a: &PiecewiseAffineCircleMap,
    cap: usize,
) -> Result<bool> {
    let endpoints = enumerate_variants_capped(q, a, cap)?;
    let mut seen: HashSet<&PiecewiseAffineCircleMap> = HashSet::with_capacity(endpoints.len());
    for e in &endpoints {
        if !seen.insert(e) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The increment sequence of one variant trajectory: frozen increments at
/// their indices, a or e (per `choices`) at the distinguished times.
pub fn variant_increments(
    q: &Collection,
    a: &PiecewiseAffineCircleMap,
    choices: &[bool],
) -> Result<Vec<PiecewiseAffineCircleMap>> {
    if choices.len() != q.times.len() {
        return Err(Error::InvalidParameter(
            "one choice per distinguished time".into(),
        ));
    }
    let mut increments: Vec<PiecewiseAffineCircleMap> = Vec::with_capacity(q.length);
    let mut fixed_iter = q.fixed.iter().peekable();
    let mut t_idx = 0usize;
    for idx in 1..=q.length {
        if t_idx < q.times.len() && idx == q.times[t_idx] {
            increments.push(if choices[t_idx] {
                a.clone()
            } else {
                PiecewiseAffineCircleMap::identity()
            });
            t_idx += 1;
        } else {
            let (fi, g) = fixed_iter.next().ok_or_else(|| {
                Error::InvalidParameter("collection fixed increments exhausted".into())
            })?;
            if *fi != idx {
                return Err(Error::InvalidParameter(
                    "collection fixed increments out of order".into(),
                ));
            }
            increments.push(g.as_ref().clone());
        }
    }
    Ok(increments)
}

/// Rebuilds the full variant trajectory (positions w_1..w_n) for one choice
/// vector over the distinguished times; test and diagnostics helper.
pub fn variant_positions(
    q: &Collection,
    a: &PiecewiseAffineCircleMap,
    choices: &[bool],
) -> Result<Vec<PiecewiseAffineCircleMap>> {
    let increments = variant_increments(q, a, choices)?;
    let mut positions = Vec::with_capacity(q.length);
    let mut acc = PiecewiseAffineCircleMap::identity();
    for g in &increments {
        acc = acc.compose(g);
        positions.push(acc.clone());
    }
    Ok(positions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::StepDistribution;
    use crate::thompson::{remark_element, GeneratorSet};
    use crate::walk::rng_for;

    fn pt(n: i64, d: i64) -> CirclePoint {
        CirclePoint::from_ratio(n, d).unwrap()
    }

    fn arc(l: (i64, i64), r: (i64, i64)) -> CircleArc {
        CircleArc::new(pt(l.0, l.1), pt(r.0, r.1))
    }

    #[test]
    fn dominates_basic() {
        let i1 = arc((0, 1), (1, 4));
        let i2 = arc((1, 2), (5, 8));
        assert!(dominates(&i1, &i2), "disjoint arcs dominate");
        assert!(dominates(&i2, &i1));
        assert!(!dominates(&i1, &i1), "irreflexive");
        let inner = arc((1, 16), (1, 8));
        assert!(dominates(&i1, &inner), "strict interior containment");
        assert!(!dominates(&inner, &i1));
        // shared endpoint: neither disjoint nor interior
        let touching = arc((1, 4), (1, 2));
        assert!(!dominates(&i1, &touching));
        // containment touching the boundary does not dominate
        let flush = arc((0, 1), (1, 8));
        assert!(!dominates(&i1, &flush));
    }

    #[test]
    fn dominates_wrapping() {
        let big = arc((3, 4), (1, 4));
        let small = arc((7, 8), (1, 8));
        assert!(dominates(&big, &small));
        assert!(!dominates(&small, &big));
        let outside = arc((3, 8), (1, 2));
        assert!(dominates(&big, &outside));
        assert!(dominates(&outside, &big));
    }

    #[test]
    fn dominates_is_equivariant() {
        let gens = GeneratorSet::bundled().unwrap();
        let mut rng = rng_for(5);
        let arcs = [
            arc((0, 1), (1, 4)),
            arc((1, 8), (3, 8)),
            arc((3, 4), (1, 8)),
            arc((1, 2), (9, 16)),
        ];
        for _ in 0..50 {
            let g = gens.random_element(&mut rng, 8);
            for x in &arcs {
                for y in &arcs {
                    let before = dominates(x, y);
                    let after = dominates(&x.map_through(&g), &y.map_through(&g));
                    assert_eq!(before, after, "domination not preserved by {g:?}");
                }
            }
        }
    }

    #[test]
    fn z_identity_walk_is_zero() {
        let mu = StepDistribution::dirac(PiecewiseAffineCircleMap::identity());
        let t = Trajectory::sample(&mu, 20, 1);
        let j = arc((1, 2), (9, 16));
        assert_eq!(count_z(&t, &j, 1, 20).unwrap(), 0);
        assert_eq!(count_z(&t, &j, 3, 18).unwrap(), 0);
    }

    #[test]
    fn z_bounded_by_ceil_n_over_s() {
        let gens = GeneratorSet::bundled().unwrap();
        let mu = StepDistribution::uniform_on(&gens).unwrap();
        let j = arc((1, 2), (9, 16));
        for s in [1usize, 2, 4] {
            for trial in 0..10u64 {
                let n = 24usize;
                let t = Trajectory::sample(&mu, n.div_ceil(s) * s, 100 + trial);
                let z = count_z(&t, &j, s, n).unwrap();
                assert!(z as usize <= n.div_ceil(s));
            }
        }
    }

    #[test]
    fn z_hand_built_trajectory() {
        // w_1(J) strictly contains J (so w_1(J) dominates w_0(J)) and w_2(J)
        // is disjoint from both: Z = 2 at s = 1, n = 2.
        let j = arc((3, 32), (5, 32));
        // g1 expands around its repelling fixed point 1/8 with slope 2
        let g1 = PiecewiseAffineCircleMap::canonicalize(vec![
            crate::map::RawSegment {
                left: pt(1, 16),
                slope: Rational::integer(2),
                value: pt(0, 1),
            },
            crate::map::RawSegment {
                left: pt(3, 16),
                slope: Rational::new(6, 7).unwrap(),
                value: pt(1, 4),
            },
        ])
        .unwrap();
        let w1j = j.map_through(&g1);
        assert_eq!(w1j, arc((1, 16), (3, 16)));
        assert!(dominates(&w1j, &j), "w1(J) = {w1j} must dominate J");
        // g2 chosen so that w_2 = g1 g2 = rot(1/2) g1 sends J across the circle
        let r = PiecewiseAffineCircleMap::rotation(&Rational::new(1, 2).unwrap());
        let g2 = g1.invert().compose(&r).compose(&g1);
        let w2 = g1.compose(&g2);
        let w2j = j.map_through(&w2);
        assert!(dominates(&w2j, &j) && dominates(&w2j, &w1j));
        let t = Trajectory::from_increments(vec![g1, g2], 0);
        assert_eq!(count_z(&t, &j, 1, 2).unwrap(), 2);
    }

    #[test]
    fn w_identity_walk_is_zero() {
        let mu = StepDistribution::dirac(PiecewiseAffineCircleMap::identity());
        let t = Trajectory::sample(&mu, 20, 1);
        let a = remark_element(&pt(1, 2), 3).unwrap();
        let j = a.smallest_interval_containing_support().unwrap();
        let w = count_w(&t, &pt(0, 1), &a, &j, 20).unwrap();
        assert_eq!(w, 0);
    }

    #[test]
    fn collection_of_identity_walk_is_empty() {
        let mu = StepDistribution::dirac(PiecewiseAffineCircleMap::identity());
        let t = Trajectory::sample(&mu, 12, 1);
        let a = remark_element(&pt(1, 2), 3).unwrap();
        let j = a.smallest_interval_containing_support().unwrap();
        let q = extract_good_collection(&t, &pt(0, 1), &a, &j, 12).unwrap();
        assert!(q.times.is_empty());
        assert_eq!(q.fixed.len(), 12);
    }

    fn walk_measure() -> (StepDistribution, PiecewiseAffineCircleMap, CircleArc) {
        let gens = GeneratorSet::bundled().unwrap();
        let a = remark_element(&pt(1, 2), 4).unwrap();
        let j = a.smallest_interval_containing_support().unwrap();
        let base = StepDistribution::uniform_on(&gens).unwrap().lazify();
        let mu = base
            .mix(
                &StepDistribution::dirac(a.clone()),
                &Rational::new(1, 8).unwrap(),
            )
            .unwrap();
        (mu, a, j)
    }

    #[test]
    fn extraction_is_deterministic_and_matches_w() {
        let (mu, a, j) = walk_measure();
        let params = crate::boundary::XiParams::default();
        for trial in 0..30u64 {
            let n = 30;
            let t = Trajectory::sample(&mu, 4 * n, crate::walk::derive_seed(909, trial));
            let xi = crate::boundary::estimate_xi(&t, 4 * n, &params).unwrap();
            let q1 = extract_good_collection(&t, &xi.xi_hat, &a, &j, n).unwrap();
            let q2 = extract_good_collection(&t, &xi.xi_hat, &a, &j, n).unwrap();
            assert_eq!(q1.times, q2.times, "rerun extracts the same collection");
            let w = count_w(&t, &xi.xi_hat, &a, &j, n).unwrap();
            assert_eq!(
                w as usize,
                q1.times.len(),
                "trial {trial}: W and collection size must agree"
            );
            // the partition structure: times + fixed cover [1, n] exactly
            let mut all: Vec<usize> = q1.times.clone();
            all.extend(q1.fixed.iter().map(|(i, _)| *i));
            all.sort_unstable();
            assert_eq!(all, (1..=n).collect::<Vec<_>>());
        }
    }

    #[test]
    fn variants_match_direct_products() {
        let (mu, a, j) = walk_measure();
        let params = crate::boundary::XiParams::default();
        let mut checked = 0;
        for trial in 0..40u64 {
            let n = 16;
            let t = Trajectory::sample(&mu, 4 * n, crate::walk::derive_seed(411, trial));
            let xi = crate::boundary::estimate_xi(&t, 4 * n, &params).unwrap();
            let q = extract_good_collection(&t, &xi.xi_hat, &a, &j, n).unwrap();
            let k = q.times.len();
            if k == 0 || k > 4 {
                continue;
            }
            checked += 1;
            let variants = enumerate_variants(&q, &a).unwrap();
            assert_eq!(variants.len(), 1 << k);
            // brute-force oracle: rebuild each variant trajectory and compare
            for mask in 0..(1usize << k) {
                let choices: Vec<bool> = (0..k).map(|r| mask & (1 << r) != 0).collect();
                let positions = variant_positions(&q, &a, &choices).unwrap();
                // enumerate_variants orders by expansion: bit r of the index
                // chosen at level r+1... recover by matching the set instead
                assert!(
                    variants.contains(positions.last().unwrap()),
                    "variant endpoint missing from enumeration"
                );
            }
            // the actual trajectory endpoint is among the variants
            let w_n = t.position(n);
            assert!(variants.contains(w_n.as_ref()));
        }
        assert!(checked > 0, "no usable collections sampled");
    }

    #[test]
    fn k_zero_collection_is_vacuously_satisfactory() {
        let (mu, a, j) = walk_measure();
        let t = Trajectory::sample(
            &StepDistribution::dirac(PiecewiseAffineCircleMap::identity()),
            8,
            3,
        );
        let q = extract_good_collection(&t, &pt(0, 1), &a, &j, 8).unwrap();
        assert_eq!(q.times.len(), 0);
        assert!(is_satisfactory(&q, &a).unwrap());
        let _ = mu;
    }

    #[test]
    fn degenerate_substitute_is_never_satisfactory() {
        // substituting a = e makes all variants equal: with k >= 1 the
        // endpoints collapse
        let (mu, a, j) = walk_measure();
        let params = crate::boundary::XiParams::default();
        for trial in 0..50u64 {
            let n = 20;
            let t = Trajectory::sample(&mu, 4 * n, crate::walk::derive_seed(88, trial));
            let xi = crate::boundary::estimate_xi(&t, 4 * n, &params).unwrap();
            let q = extract_good_collection(&t, &xi.xi_hat, &a, &j, n).unwrap();
            if q.times.is_empty() {
                continue;
            }
            let id = PiecewiseAffineCircleMap::identity();
            assert!(!is_satisfactory(&q, &id).unwrap());
            return;
        }
        panic!("no collection with distinguished times sampled");
    }

    #[test]
    fn cap_is_enforced() {
        let (mu, a, j) = walk_measure();
        let params = crate::boundary::XiParams::default();
        for trial in 0..80u64 {
            let n = 40;
            let t = Trajectory::sample(&mu, 4 * n, crate::walk::derive_seed(33, trial));
            let xi = crate::boundary::estimate_xi(&t, 4 * n, &params).unwrap();
            let q = extract_good_collection(&t, &xi.xi_hat, &a, &j, n).unwrap();
            if q.times.len() < 3 {
                continue;
            }
            assert!(matches!(
                enumerate_variants_capped(&q, &a, 2),
                Err(Error::CollectionCapExceeded { .. })
            ));
            // truncation keeps the first times and freezes the rest
            let cut = q.truncated(2, &t);
            assert_eq!(cut.times, q.times[..2].to_vec());
            assert_eq!(cut.length, q.length);
            assert!(is_satisfactory_capped(&cut, &a, 2).unwrap());
            return;
        }
        panic!("no collection with >= 3 distinguished times sampled");
    }

    #[test]
    fn partition_property_variants_extract_same_collection() {
        // Any trajectory agreeing with the collection on the frozen
        // increments and {a, e}-valued at the distinguished times extracts
        // exactly the same collection for the same boundary point.
        let (mu, a, j) = walk_measure();
        let params = crate::boundary::XiParams::default();
        let mut checked = 0;
        for trial in 0..60u64 {
            let n = 16;
            let t = Trajectory::sample(&mu, 4 * n, crate::walk::derive_seed(606, trial));
            let xi = crate::boundary::estimate_xi(&t, 4 * n, &params).unwrap();
            let q = extract_good_collection(&t, &xi.xi_hat, &a, &j, n).unwrap();
            let k = q.times.len();
            if k == 0 || k > 4 {
                continue;
            }
            checked += 1;
            for mask in 0..(1usize << k) {
                let choices: Vec<bool> = (0..k).map(|r| mask & (1 << r) != 0).collect();
                let increments = variant_increments(&q, &a, &choices).unwrap();
                let vt = Trajectory::from_increments(increments, 0);
                let q2 = extract_good_collection(&vt, &xi.xi_hat, &a, &j, n).unwrap();
                assert_eq!(q2.times, q.times, "trial {trial} mask {mask}");
                let fixed_maps = |c: &Collection| -> Vec<(usize, PiecewiseAffineCircleMap)> {
                    c.fixed
                        .iter()
                        .map(|(i, g)| (*i, g.as_ref().clone()))
                        .collect()
                };
                assert_eq!(fixed_maps(&q2), fixed_maps(&q), "trial {trial} mask {mask}");
            }
        }
        assert!(checked > 0, "no usable collections sampled");
    }

    #[test]
    fn good_collections_have_stable_arcs_across_variants() {
        // For a xi-good collection all variants share the same arcs
        // w_{i_r - 1}(J); exhaustive check at small k.
        let (mu, a, j) = walk_measure();
        let params = crate::boundary::XiParams::default();
        let mut checked = 0;
        for trial in 0..60u64 {
            let n = 18;
            let t = Trajectory::sample(&mu, 4 * n, crate::walk::derive_seed(7321, trial));
            let xi = crate::boundary::estimate_xi(&t, 4 * n, &params).unwrap();
            let q = extract_good_collection(&t, &xi.xi_hat, &a, &j, n).unwrap();
            let k = q.times.len();
            if k == 0 || k > 5 {
                continue;
            }
            checked += 1;
            let reference: Vec<CircleArc> = {
                let positions = variant_positions(&q, &a, &vec![false; k]).unwrap();
                q.times
                    .iter()
                    .map(|&ir| j.map_through(&positions[ir - 2]))
                    .collect()
            };
            for mask in 1..(1usize << k) {
                let choices: Vec<bool> = (0..k).map(|r| mask & (1 << r) != 0).collect();
                let positions = variant_positions(&q, &a, &choices).unwrap();
                for (r, &ir) in q.times.iter().enumerate() {
                    let got = j.map_through(&positions[ir - 2]);
                    assert_eq!(got, reference[r], "arc differs at r={r} mask={mask}");
                }
            }
        }
        assert!(checked > 0, "no usable collections sampled");
    }
}
