//! Exact algebra of orientation-preserving piecewise-affine circle
//! homeomorphisms: the group-element type with canonical form, evaluation,
//! composition, inversion, breakpoints and supports.
//!
//! A map is stored as its canonical segment list. Canonical means: the
//! breakpoint list contains exactly the derivative discontinuities (no
//! removable breakpoints), sorted increasingly in [0, 1), except that a map
//! with no derivative discontinuity (a rotation) is stored as a single
//! segment anchored at 0. Two maps are equal as functions iff their canonical
//! data coincide, which is what makes exact entropy counting possible.

use std::fmt;
use std::hash::{Hash, Hasher};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{CirclePoint, Rational};

/// Orientation-preserving piecewise-affine homeomorphism of R/Z.
#[derive(Clone)]
pub struct PiecewiseAffineCircleMap {
    /// Strictly increasing in [0, 1). For m >= 2 these are exactly the
    /// derivative discontinuities; for m == 1 the single entry is 0.
    breakpoints: Vec<CirclePoint>,
    /// slopes[i] is the (positive) slope on [breakpoints[i], breakpoints[i+1])
    /// with indices mod m.
    slopes: Vec<Rational>,
    /// g(breakpoints[0]).
    anchor: CirclePoint,
    /// Cached per-segment image start g(breakpoints[i]); determined by the
    /// canonical fields, never hashed or compared.
    values: Vec<CirclePoint>,
}

/// One raw segment of a not-yet-canonical map: g(x) = value + slope * (x - left)
/// for x in [left, next-left).
#[derive(Clone, Debug)]
pub struct RawSegment {
    pub left: CirclePoint,
    pub slope: Rational,
    pub value: CirclePoint,
}

impl PartialEq for PiecewiseAffineCircleMap {
    fn eq(&self, other: &Self) -> bool {
        self.breakpoints == other.breakpoints
            && self.slopes == other.slopes
            && self.anchor == other.anchor
    }
}

impl Eq for PiecewiseAffineCircleMap {}

impl Hash for PiecewiseAffineCircleMap {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.breakpoints.hash(state);
        self.slopes.hash(state);
        self.anchor.hash(state);
    }
}

impl fmt::Debug for PiecewiseAffineCircleMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::with_capacity(self.segment_count());
        for i in 0..self.segment_count() {
            parts.push(format!(
                "[{} ~{}~> {}]",
                self.breakpoints[i], self.slopes[i], self.values[i]
            ));
        }
        write!(f, "PAff({})", parts.join(" "))
    }
}

impl PiecewiseAffineCircleMap {
    pub fn identity() -> Self {
        PiecewiseAffineCircleMap {
            breakpoints: vec![CirclePoint::zero()],
            slopes: vec![Rational::one()],
            anchor: CirclePoint::zero(),
            values: vec![CirclePoint::zero()],
        }
    }

    /// The rigid rotation x -> x + t.
    pub fn rotation(t: &Rational) -> Self {
        PiecewiseAffineCircleMap {
            breakpoints: vec![CirclePoint::zero()],
            slopes: vec![Rational::one()],
            anchor: CirclePoint::new(t.clone()),
            values: vec![CirclePoint::new(t.clone())],
        }
    }

    pub fn is_identity(&self) -> bool {
        self.segment_count() == 1 && self.anchor == CirclePoint::zero()
    }

    pub fn is_rotation(&self) -> bool {
        self.segment_count() == 1
    }

    pub fn segment_count(&self) -> usize {
        self.breakpoints.len()
    }

    /// Derivative discontinuities. Empty for rotations.
    pub fn breakpoints(&self) -> &[CirclePoint] {
        if self.is_rotation() {
            &[]
        } else {
            &self.breakpoints
        }
    }

    pub fn breakpoint_count(&self) -> usize {
        self.breakpoints().len()
    }

    pub fn slopes(&self) -> &[Rational] {
        &self.slopes
    }

    pub fn anchor(&self) -> &CirclePoint {
        &self.anchor
    }

    /// Length of segment i, as a rational in (0, 1].
    fn segment_len(&self, i: usize) -> Rational {
        let m = self.segment_count();
        if m == 1 {
            return Rational::one();
        }
        let next = &self.breakpoints[(i + 1) % m];
        let mut len = next.value() - self.breakpoints[i].value();
        if !len.is_positive() {
            len += Rational::one();
        }
        len
    }

    /// Index of the segment whose half-open interval [b_i, b_{i+1}) contains x.
    fn segment_of(&self, x: &CirclePoint) -> usize {
        let m = self.segment_count();
        if m == 1 {
            return 0;
        }
        // partition_point: first index with b_i > x
        let upper = self.breakpoints.partition_point(|b| b <= x);
        if upper == 0 {
            // x < b_0: wrapping segment
            m - 1
        } else {
            upper - 1
        }
    }

    /// Exact image g(x).
    pub fn evaluate(&self, x: &CirclePoint) -> CirclePoint {
        let i = self.segment_of(x);
        let delta = x.offset_from(&self.breakpoints[i]);
        if delta.is_zero() {
            return self.values[i].clone();
        }
        CirclePoint::new(self.values[i].value() + &(&self.slopes[i] * &delta))
    }

    /// Slope immediately to the right of x.
    pub fn slope_right(&self, x: &CirclePoint) -> &Rational {
        &self.slopes[self.segment_of(x)]
    }

    /// Slope immediately to the left of x.
    pub fn slope_left(&self, x: &CirclePoint) -> &Rational {
        let i = self.segment_of(x);
        if &self.breakpoints[i] == x {
            let m = self.segment_count();
            &self.slopes[(i + m - 1) % m]
        } else {
            &self.slopes[i]
        }
    }

    /// g'(x+) / g'(x-); equals 1 iff x is not a breakpoint of g.
    pub fn derivative_jump_ratio(&self, x: &CirclePoint) -> Rational {
        self.slope_right(x) / self.slope_left(x)
    }

    /// Builds the canonical map from raw segments. The input must describe a
    /// continuous, positive-slope, degree-one circle map; anything else is
    /// rejected. Removable breakpoints (equal slopes on both sides) are
    /// merged, including across the wrap, and a breakpoint-free result is
    /// re-anchored at 0.
    pub fn canonicalize(mut raw: Vec<RawSegment>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::InvalidMap("empty segment list".into()));
        }
        raw.sort_by(|a, b| a.left.cmp(&b.left));
        for w in raw.windows(2) {
            if w[0].left == w[1].left {
                return Err(Error::InvalidMap(format!(
                    "duplicate breakpoint {}",
                    w[0].left
                )));
            }
        }
        for seg in &raw {
            if !seg.slope.is_positive() {
                return Err(Error::NotBijective(format!(
                    "nonpositive slope {} at {}",
                    seg.slope, seg.left
                )));
            }
        }

        let m = raw.len();
        let seg_len = |i: usize| -> Rational {
            let next = &raw[(i + 1) % m].left;
            let mut len = next.value() - raw[i].left.value();
            if !len.is_positive() {
                len += Rational::one();
            }
            len
        };

        // Continuity at every interior breakpoint, and total rise exactly 1
        // around the circle (degree one == injectivity here).
        let mut total_rise = Rational::zero();
        for i in 0..m {
            let len = seg_len(i);
            let end = CirclePoint::new(raw[i].value.value() + &(&raw[i].slope * &len));
            let next_start = &raw[(i + 1) % m].value;
            if &end != next_start {
                return Err(Error::InvalidMap(format!(
                    "discontinuity approaching {}: limit {} vs declared {}",
                    raw[(i + 1) % m].left,
                    end,
                    next_start
                )));
            }
            total_rise += &raw[i].slope * &len;
        }
        if !total_rise.is_one() {
            return Err(Error::NotBijective(format!(
                "total slope-weighted length is {}, expected 1",
                total_rise
            )));
        }

        // Merge removable breakpoints circularly. Continuity already holds, so
        // equal adjacent slopes are the whole condition.
        let mut segs = raw;
        loop {
            let m = segs.len();
            if m == 1 {
                break;
            }
            let mut removed = false;
            for i in 0..segs.len() {
                let m = segs.len();
                if m == 1 {
                    break;
                }
                let j = (i + 1) % m;
                if segs[i].slope == segs[j].slope && i != j {
                    segs.remove(j);
                    removed = true;
                    break;
                }
            }
            if !removed {
                break;
            }
        }

        if segs.len() == 1 {
            // A breakpoint-free map has slope 1 throughout: a rotation.
            let seg = segs.pop().expect("nonempty");
            debug_assert!(seg.slope.is_one());
            let at_zero = CirclePoint::new(seg.value.value() - seg.left.value());
            return Ok(PiecewiseAffineCircleMap::rotation(&at_zero.into_value()));
        }

        let breakpoints: Vec<CirclePoint> = segs.iter().map(|s| s.left.clone()).collect();
        let slopes: Vec<Rational> = segs.iter().map(|s| s.slope.clone()).collect();
        let values: Vec<CirclePoint> = segs.iter().map(|s| s.value.clone()).collect();
        Ok(PiecewiseAffineCircleMap {
            anchor: values[0].clone(),
            breakpoints,
            slopes,
            values,
        })
    }

    /// Raw segments of this map (already canonical).
    pub fn segments(&self) -> Vec<RawSegment> {
        (0..self.segment_count())
            .map(|i| RawSegment {
                left: self.breakpoints[i].clone(),
                slope: self.slopes[i].clone(),
                value: self.values[i].clone(),
            })
            .collect()
    }

    /// Exact inverse; slopes invert, breakpoints move to their images.
    pub fn invert(&self) -> Self {
        let raw: Vec<RawSegment> = (0..self.segment_count())
            .map(|i| RawSegment {
                left: self.values[i].clone(),
                slope: self.slopes[i].recip().expect("slopes are positive"),
                value: self.breakpoints[i].clone(),
            })
            .collect();
        Self::canonicalize(raw).expect("inverse of a canonical map is canonical input")
    }

    /// Group law: (g compose h)(x) = g(h(x)).
    pub fn compose(&self, h: &Self) -> Self {
        let g = self;
        let h_inv = h.invert();
        let mut cuts: Vec<CirclePoint> = h.breakpoints.clone();
        for c in &g.breakpoints {
            cuts.push(h_inv.evaluate(c));
        }
        cuts.sort();
        cuts.dedup();
        let raw: Vec<RawSegment> = cuts
            .into_iter()
            .map(|left| {
                let h_left = h.evaluate(&left);
                let slope = g.slope_right(&h_left) * h.slope_right(&left);
                let value = g.evaluate(&h_left);
                RawSegment { left, slope, value }
            })
            .collect();
        Self::canonicalize(raw).expect("composite of homeomorphisms is a homeomorphism")
    }

    /// True iff all breakpoints and the anchor are dyadic and all slopes are
    /// powers of two: membership in Thompson's group T.
    pub fn is_in_thompson_t(&self) -> bool {
        self.breakpoints.iter().all(|b| b.is_dyadic())
            && self.anchor.is_dyadic()
            && self.slopes.iter().all(|s| s.log2_exact().is_some())
    }

    /// Closure of the set of moved points.
    pub fn support(&self) -> Support {
        if self.is_identity() {
            return Support::Empty;
        }
        // Collect the maximal fixed arcs / isolated fixed points per segment.
        let m = self.segment_count();
        let mut fixed_arcs: Vec<(CirclePoint, CirclePoint)> = Vec::new(); // closed, possibly degenerate
        for i in 0..m {
            let left = &self.breakpoints[i];
            let len = self.segment_len(i);
            let slope = &self.slopes[i];
            let value = &self.values[i];
            if slope.is_one() {
                // Fixed everywhere on the closed segment or nowhere.
                if value == left {
                    let right = CirclePoint::new(left.value() + &len);
                    fixed_arcs.push((left.clone(), right));
                }
            } else {
                // Solve value + slope*t = left + t (mod 1) for t in [0, len]:
                // t = (d0 + j) / (slope - 1) with d0 = (left - value) mod 1,
                // over integers j. slope*len <= 1 bounds the j-range to at
                // most a couple of candidates.
                let d0 = left.offset_from(value);
                let denom = slope - &Rational::one();
                let lo = -d0.clone();
                let hi = &(&denom * &len) - &d0;
                let (lo, hi) = if denom.is_positive() {
                    (lo, hi)
                } else {
                    (hi, lo)
                };
                let mut j = lo.floor();
                let j_end = hi.floor();
                while j <= j_end {
                    let jq = Rational::integer(j.clone());
                    if jq >= lo && jq <= hi {
                        let t = (&d0 + &jq).checked_div(&denom).expect("slope != 1");
                        if !t.is_negative() && t <= len {
                            let p = CirclePoint::new(left.value() + &t);
                            fixed_arcs.push((p.clone(), p));
                        }
                    }
                    j += BigInt::from(1);
                }
            }
        }
        if fixed_arcs.is_empty() {
            return Support::Full;
        }

        // Merge touching/overlapping fixed arcs circularly, then complement
        // the open interiors. Degenerate fixed arcs have empty interior and
        // do not reduce the support.
        let interiors: Vec<(CirclePoint, CirclePoint)> = {
            let mut merged = merge_circular_arcs(fixed_arcs);
            merged.retain(|(l, r)| l != r);
            merged
        };
        if interiors.is_empty() {
            return Support::Full;
        }
        // The support is the closed complement of the union of open fixed
        // intervals: arcs from each interior's right end to the next
        // interior's left end (circularly).
        let mut arcs = Vec::with_capacity(interiors.len());
        for k in 0..interiors.len() {
            let right_end = &interiors[k].1;
            let next_left = &interiors[(k + 1) % interiors.len()].0;
            if interiors.len() == 1 && right_end == next_left {
                // the single fixed interval closed back on itself: nothing moves
                return Support::Empty;
            }
            arcs.push(CircleArc::new(right_end.clone(), next_left.clone()));
        }
        Support::Arcs(arcs)
    }

    /// The smallest closed arc containing the support: complement of the
    /// largest gap between support arcs. Errors for the identity (empty
    /// support) and for full-circle support.
    pub fn smallest_interval_containing_support(&self) -> Result<CircleArc> {
        let arcs = match self.support() {
            Support::Empty => return Err(Error::EmptySupport),
            Support::Full => return Err(Error::FullCircleSupport),
            Support::Arcs(arcs) => arcs,
        };
        smallest_covering_arc(&arcs)
    }
}

/// Smallest closed arc covering all given pairwise-disjoint arcs: drop the
/// largest gap between circularly consecutive arcs. Ties choose the covering
/// arc with the smallest left endpoint.
pub fn smallest_covering_arc(arcs: &[CircleArc]) -> Result<CircleArc> {
    if arcs.is_empty() {
        return Err(Error::EmptySupport);
    }
    let mut sorted: Vec<&CircleArc> = arcs.iter().collect();
    sorted.sort_by(|a, b| a.left().cmp(b.left()));
    let n = sorted.len();
    let mut best: Option<(Rational, CircleArc)> = None;
    for k in 0..n {
        // Candidate: cover everything except the gap after arc k.
        let gap_start = sorted[k].right();
        let next_left = sorted[(k + 1) % n].left();
        let gap = next_left.offset_from(gap_start);
        let gap = if n == 1 {
            // single arc: the gap is the complement
            Rational::one() - sorted[k].length()
        } else {
            gap
        };
        let candidate = CircleArc::new(next_left.clone(), gap_start.clone());
        let better = match &best {
            None => true,
            Some((best_gap, best_arc)) => {
                gap > *best_gap || (gap == *best_gap && candidate.left() < best_arc.left())
            }
        };
        if better {
            best = Some((gap, candidate));
        }
    }
    Ok(best.expect("nonempty arcs").1)
}

/// Closed arc traversed counterclockwise from `left` to `right`; may wrap
/// through 0; `left == right` is the degenerate point arc. The full circle is
/// not representable.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CircleArc {
    left: CirclePoint,
    right: CirclePoint,
}

impl CircleArc {
    pub fn new(left: CirclePoint, right: CirclePoint) -> Self {
        CircleArc { left, right }
    }

    pub fn point(p: CirclePoint) -> Self {
        CircleArc {
            left: p.clone(),
            right: p,
        }
    }

    pub fn left(&self) -> &CirclePoint {
        &self.left
    }

    pub fn right(&self) -> &CirclePoint {
        &self.right
    }

    pub fn length(&self) -> Rational {
        self.right.offset_from(&self.left)
    }

    pub fn is_degenerate(&self) -> bool {
        self.left == self.right
    }

    pub fn midpoint(&self) -> CirclePoint {
        let half = Rational::new(1, 2).expect("2 != 0");
        CirclePoint::new(self.left.value() + &(&self.length() * &half))
    }

    pub fn contains(&self, x: &CirclePoint) -> bool {
        x.offset_from(&self.left) <= self.length()
    }

    pub fn contains_in_interior(&self, x: &CirclePoint) -> bool {
        let off = x.offset_from(&self.left);
        off.is_positive() && off < self.length()
    }

    /// Whole-arc containment (closed in closed).
    pub fn contains_arc(&self, other: &CircleArc) -> bool {
        let s = other.left.offset_from(&self.left);
        &s + &other.length() <= self.length()
    }

    /// Image arc under an orientation-preserving map.
    pub fn map_through(&self, g: &PiecewiseAffineCircleMap) -> CircleArc {
        CircleArc {
            left: g.evaluate(&self.left),
            right: g.evaluate(&self.right),
        }
    }
}

impl fmt::Debug for CircleArc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.left, self.right)
    }
}

impl fmt::Display for CircleArc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.left, self.right)
    }
}

/// Support of a map: rotations move everything (Full), the identity moves
/// nothing, every other map moves a finite union of closed arcs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Support {
    Empty,
    Full,
    Arcs(Vec<CircleArc>),
}

impl Support {
    pub fn arcs(&self) -> &[CircleArc] {
        match self {
            Support::Arcs(a) => a,
            _ => &[],
        }
    }

    pub fn total_length(&self) -> Rational {
        match self {
            Support::Empty => Rational::zero(),
            Support::Full => Rational::one(),
            Support::Arcs(arcs) => {
                let mut sum = Rational::zero();
                for a in arcs {
                    sum += a.length();
                }
                sum
            }
        }
    }
}

/// Merge closed arcs (given as endpoint pairs) that touch or overlap,
/// circularly. Inputs may be degenerate. Returns disjoint closed arcs sorted
/// by left endpoint. A union covering the whole circle returns a single
/// wrapping arc and is the caller's concern.
fn merge_circular_arcs(
    mut arcs: Vec<(CirclePoint, CirclePoint)>,
) -> Vec<(CirclePoint, CirclePoint)> {
    arcs.sort_by(|a, b| a.0.cmp(&b.0));
    let mut merged: Vec<(CirclePoint, CirclePoint)> = Vec::new();
    for (l, r) in arcs {
        if let Some(last) = merged.last_mut() {
            // touches or overlaps the previous arc (linear order, no wrap yet)
            let reach = last.1.offset_from(&last.0);
            let start = l.offset_from(&last.0);
            if start <= reach {
                let new_end = start + r.offset_from(&l);
                if new_end > reach {
                    last.1 = CirclePoint::new(last.0.value() + &new_end);
                }
                continue;
            }
        }
        merged.push((l, r));
    }
    // wrap: the last arc may reach past 0 and swallow leading arcs
    loop {
        if merged.len() <= 1 {
            break;
        }
        let (first_l, first_r) = merged[0].clone();
        let (last_l, last_r) = merged.last().expect("nonempty").clone();
        let reach = last_r.offset_from(&last_l);
        let start = first_l.offset_from(&last_l);
        if start <= reach && last_l != first_l {
            let ext = &start + &first_r.offset_from(&first_l);
            if ext > reach {
                let last = merged.last_mut().expect("nonempty");
                last.1 = CirclePoint::new(last_l.value() + &ext);
            }
            merged.remove(0);
        } else {
            break;
        }
    }
    merged
}

// ---------------------------------------------------------------------------
// serde wire format: {"breakpoints": ["num/den", ...], "slopes": [...],
// "anchor": "num/den"}; the reader validates all invariants.
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct MapWire {
    breakpoints: Vec<String>,
    slopes: Vec<String>,
    anchor: String,
}

impl Serialize for PiecewiseAffineCircleMap {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        MapWire {
            breakpoints: self.breakpoints.iter().map(|b| b.to_string()).collect(),
            slopes: self.slopes.iter().map(|s| s.to_string()).collect(),
            anchor: self.anchor.to_string(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PiecewiseAffineCircleMap {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let wire = MapWire::deserialize(deserializer)?;
        let parse = |s: &String| -> std::result::Result<Rational, D::Error> {
            s.parse().map_err(DeError::custom)
        };
        if wire.breakpoints.len() != wire.slopes.len() {
            return Err(DeError::custom("breakpoints and slopes differ in length"));
        }
        let mut raw = Vec::with_capacity(wire.breakpoints.len());
        let anchor = CirclePoint::new(parse(&wire.anchor)?);
        let mut value = anchor.clone();
        let breakpoints: Vec<CirclePoint> = wire
            .breakpoints
            .iter()
            .map(|b| Ok(CirclePoint::new(parse(b)?)))
            .collect::<std::result::Result<_, D::Error>>()?;
        let slopes: Vec<Rational> = wire
            .slopes
            .iter()
            .map(parse)
            .collect::<std::result::Result<_, D::Error>>()?;
        // Reconstruct per-segment values from the anchor, then canonicalize,
        // which re-validates everything.
        for i in 0..breakpoints.len() {
            raw.push(RawSegment {
                left: breakpoints[i].clone(),
                slope: slopes[i].clone(),
                value: value.clone(),
            });
            if !slopes[i].is_positive() {
                return Err(DeError::custom(format!("nonpositive slope {}", slopes[i])));
            }
            let next = breakpoints.get(i + 1).unwrap_or(&breakpoints[0]);
            let len = next.offset_from(&breakpoints[i]);
            let len = if len.is_zero() { Rational::one() } else { len };
            value = CirclePoint::new(value.value() + &(&slopes[i] * &len));
        }
        let map = PiecewiseAffineCircleMap::canonicalize(raw).map_err(DeError::custom)?;
        // Reject wire data with removable breakpoints so that files are
        // canonical on disk.
        if map.segment_count() != wire.breakpoints.len() {
            return Err(DeError::custom(
                "map data contains removable breakpoints; store the canonical form",
            ));
        }
        Ok(map)
    }
}
