//! Laminates: curves transverse to a dissection, stored as sequences of
//! polygon segments.  Each segment records which side of it holds the
//! polygon's circle-point (the marked side); marked sides alternate along
//! a curve and determine crossing signs, hence g-vectors.
//!
//! Crossing counts between two laminates are computed combinatorially in
//! per-polygon models: a puncture polygon unrolls to a strip with the
//! puncture at +infinity (period = edge count), a boundary polygon cuts
//! open at its circle-point.  Strand order on a shared edge is resolved by
//! following both curves until they diverge.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use crate::dissection::{ArcId, ArcSide, Dissection, Flavor, Occurrence, PolygonEdge, PolygonId};

/// One end of a segment inside a polygon.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum End {
    /// Crossing point on the arc edge at this position of the polygon.
    Arc { pos: usize },
    /// Endpoint on the boundary segment; `plus` is the zone on the far
    /// side of the circle-point in cut coordinates (where `d*_+` ends).
    Bd { plus: bool },
    /// Spiral into the polygon's puncture; `ccw` matches `sp+`.
    Spiral { ccw: bool },
}

impl End {
    fn is_arc(self) -> bool {
        matches!(self, End::Arc { .. })
    }
}

/// Side of a directed segment on which the polygon's circle-point lies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Marked {
    Left,
    Right,
}

impl Marked {
    pub fn flip(self) -> Marked {
        match self {
            Marked::Left => Marked::Right,
            Marked::Right => Marked::Left,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Segment {
    pub polygon: PolygonId,
    pub from: End,
    pub to: End,
    pub marked: Marked,
}

impl Segment {
    pub fn reversed(self) -> Segment {
        Segment {
            polygon: self.polygon,
            from: self.to,
            to: self.from,
            marked: self.marked.flip(),
        }
    }
}

/// A validated curve in canonical form: consecutive segments glue across
/// arcs, marked sides alternate, crossing signs are constant per arc, the
/// curve is embedded, and closed curves are primitive.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Laminate {
    segments: Vec<Segment>,
    closed: bool,
}

impl Laminate {
    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Number of arc crossings: one between each pair of consecutive segments.
    pub fn crossing_count(&self) -> usize {
        if self.closed {
            self.segments.len()
        } else {
            self.segments.len() - 1
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LaminateError {
    #[error("laminate has no segments")]
    Empty,
    #[error("segment {0}: no such polygon")]
    BadPolygon(usize),
    #[error("segment {seg}: end {end} is not legal in this polygon")]
    BadEnd { seg: usize, end: String },
    #[error("segment {0}: both ends on the same edge occurrence")]
    SameOccurrence(usize),
    #[error("segment {seg}: marked side must be {want:?} here")]
    MarkedForced { seg: usize, want: Marked },
    #[error("segments {0} and {1} do not glue across an arc")]
    BadGlue(usize, usize),
    #[error("curve endpoint at segment {0} must lie on a boundary zone or spiral")]
    BadEndpoint(usize),
    #[error("marked sides of segments {0} and {1} do not alternate")]
    NoAlternation(usize, usize),
    #[error("crossings on arc {0} have inconsistent signs")]
    MixedSigns(usize),
    #[error("curve has fewer than one arc crossing")]
    NoCrossing,
    #[error("curve crosses itself")]
    SelfCrossing,
    #[error("closed curve is a repetition of a shorter one")]
    NotPrimitive,
    #[error("cannot parse laminate: {0}")]
    Parse(String),
}

fn check_end_legal(d: &Dissection, seg: usize, p: PolygonId, e: End) -> Result<(), LaminateError> {
    let poly = d.polygon(p);
    let bad = |e: End| LaminateError::BadEnd {
        seg,
        end: format!("{e:?}"),
    };
    match e {
        End::Arc { pos } => {
            if pos >= poly.edges.len() || !matches!(poly.edges[pos], PolygonEdge::Arc { .. }) {
                return Err(bad(e));
            }
        }
        End::Bd { .. } => {
            if poly.flavor != Flavor::Boundary {
                return Err(bad(e));
            }
        }
        End::Spiral { .. } => {
            if poly.flavor != Flavor::Puncture {
                return Err(bad(e));
            }
        }
    }
    Ok(())
}

/// Cut coordinate (in sixths) of an end inside a boundary polygon: the
/// circle-point splits its boundary segment, zone `bd-` sits at 0, the
/// arcs follow in ccw order, zone `bd+` at the far end.
fn bd_coord(d: &Dissection, p: PolygonId, e: End) -> i64 {
    let poly = d.polygon(p);
    let k = poly.edges.len();
    let beta = poly.boundary_pos().expect("boundary polygon");
    match e {
        End::Arc { pos } => 6 * (((pos + k - beta) % k) as i64),
        End::Bd { plus: false } => 0,
        End::Bd { plus: true } => 6 * k as i64,
        End::Spiral { .. } => unreachable!("spiral in boundary polygon"),
    }
}

/// Marked side forced by the segment's ends, if any.  Boundary-polygon
/// chords are forced by cut coordinates (circle-point on the left when the
/// coordinate increases); spiral ends are forced by winding direction.
fn forced_marked(d: &Dissection, s: &Segment) -> Option<Marked> {
    match d.polygon(s.polygon).flavor {
        Flavor::Boundary => {
            let (cf, ct) = (bd_coord(d, s.polygon, s.from), bd_coord(d, s.polygon, s.to));
            Some(if cf < ct { Marked::Left } else { Marked::Right })
        }
        Flavor::Puncture => match (s.from, s.to) {
            (End::Spiral { ccw }, _) => Some(if ccw { Marked::Right } else { Marked::Left }),
            (_, End::Spiral { ccw }) => Some(if ccw { Marked::Left } else { Marked::Right }),
            _ => None,
        },
    }
}

fn occ_of(s: &Segment, to_end: bool) -> Option<Occurrence> {
    let e = if to_end { s.to } else { s.from };
    match e {
        End::Arc { pos } => Some(Occurrence {
            polygon: s.polygon,
            position: pos,
        }),
        _ => None,
    }
}

/// Sign of the crossing after segment `i` (between `i` and its successor).
fn crossing_sign(s: &Segment) -> i64 {
    match s.marked {
        Marked::Right => 1,
        Marked::Left => -1,
    }
}

/// Arc crossed between segment `i` and its successor.
fn crossing_arc(d: &Dissection, s: &Segment) -> ArcId {
    let occ = occ_of(s, true).expect("interior end is an arc");
    d.arc_at(occ)
}

fn occs(d: &Dissection, arc: ArcId) -> (Occurrence, Occurrence) {
    d.arc_occurrences(arc).expect("arc id in range")
}

pub fn build_laminate(
    d: &Dissection,
    segments: Vec<Segment>,
    closed: bool,
) -> Result<Laminate, LaminateError> {
    build_inner(d, segments, closed, false)
}

/// Like [`build_laminate`] but the curve may cross itself.  Every other
/// invariant (legal ends, gluing, alternation, constant sign per arc,
/// primitivity) still holds.
pub fn build_generalized(
    d: &Dissection,
    segments: Vec<Segment>,
    closed: bool,
) -> Result<Laminate, LaminateError> {
    build_inner(d, segments, closed, true)
}

fn build_inner(
    d: &Dissection,
    segments: Vec<Segment>,
    closed: bool,
    allow_self: bool,
) -> Result<Laminate, LaminateError> {
    if segments.is_empty() {
        return Err(LaminateError::Empty);
    }
    let n = segments.len();
    for (i, s) in segments.iter().enumerate() {
        if s.polygon >= d.polygons.len() {
            return Err(LaminateError::BadPolygon(i));
        }
        check_end_legal(d, i, s.polygon, s.from)?;
        check_end_legal(d, i, s.polygon, s.to)?;
        if s.from.is_arc() && s.from == s.to {
            return Err(LaminateError::SameOccurrence(i));
        }
        if let Some(want) = forced_marked(d, s) {
            if s.marked != want {
                return Err(LaminateError::MarkedForced { seg: i, want });
            }
        }
    }
    // Interior ends glue across arcs; marked sides alternate there.
    let pairs: Vec<(usize, usize)> = if closed {
        (0..n).map(|i| (i, (i + 1) % n)).collect()
    } else {
        (0..n - 1).map(|i| (i, i + 1)).collect()
    };
    for &(i, j) in &pairs {
        let (oi, oj) = (occ_of(&segments[i], true), occ_of(&segments[j], false));
        match (oi, oj) {
            (Some(a), Some(b)) if d.glued(a) == b => {}
            _ => return Err(LaminateError::BadGlue(i, j)),
        }
        if segments[j].marked != segments[i].marked.flip() {
            return Err(LaminateError::NoAlternation(i, j));
        }
    }
    if !closed {
        if segments[0].from.is_arc() {
            return Err(LaminateError::BadEndpoint(0));
        }
        if segments[n - 1].to.is_arc() {
            return Err(LaminateError::BadEndpoint(n - 1));
        }
        if n < 2 {
            return Err(LaminateError::NoCrossing);
        }
    }
    // Constant crossing sign per arc.
    let mut arc_sign: Vec<Option<i64>> = vec![None; d.arc_count];
    for &(i, _) in &pairs {
        let arc = crossing_arc(d, &segments[i]);
        let sg = crossing_sign(&segments[i]);
        match arc_sign[arc] {
            None => arc_sign[arc] = Some(sg),
            Some(prev) if prev == sg => {}
            Some(_) => return Err(LaminateError::MixedSigns(arc + 1)),
        }
    }
    let lam = Laminate { segments, closed };
    if !allow_self && self_crossings(d, &lam) > 0 {
        return Err(LaminateError::SelfCrossing);
    }
    if closed {
        for p in 1..n {
            if n % p == 0 && (0..n).all(|i| lam.segments[i] == lam.segments[(i + p) % n]) {
                return Err(LaminateError::NotPrimitive);
            }
        }
    }
    Ok(canonicalize(lam))
}

fn canonicalize(lam: Laminate) -> Laminate {
    let fwd = lam.segments.clone();
    let rev: Vec<Segment> = fwd.iter().rev().map(|s| s.reversed()).collect();
    let segments = if !lam.closed {
        fwd.min(rev)
    } else {
        let n = fwd.len();
        let mut best: Option<Vec<Segment>> = None;
        for word in [&fwd, &rev] {
            for r in 0..n {
                let mut cand = word[r..].to_vec();
                cand.extend_from_slice(&word[..r]);
                if best.as_ref().map_or(true, |b| cand < *b) {
                    best = Some(cand);
                }
            }
        }
        best.unwrap()
    };
    Laminate {
        segments,
        closed: lam.closed,
    }
}

/// Signed crossing sequence: (arc, sign) between consecutive segments.
pub fn crossing_sequence(d: &Dissection, lam: &Laminate) -> Vec<(ArcId, i64)> {
    let n = lam.segments.len();
    let upto = if lam.closed { n } else { n - 1 };
    (0..upto)
        .map(|i| {
            let s = &lam.segments[i];
            (crossing_arc(d, s), crossing_sign(s))
        })
        .collect()
}

pub fn g_vector(d: &Dissection, lam: &Laminate) -> Vec<i64> {
    let mut g = vec![0i64; d.arc_count];
    for (arc, sg) in crossing_sequence(d, lam) {
        g[arc] += sg;
    }
    g
}

/// The laminate running along the dual curve of `arc` with both endpoints
/// shifted so every crossing is positive (`plus`) or negative.
pub fn elementary(d: &Dissection, arc: ArcId, plus: bool) -> Laminate {
    let (oa, ob) = occs(d, arc);
    let endpoint = |occ: Occurrence| match d.polygon(occ.polygon).flavor {
        Flavor::Puncture => End::Spiral { ccw: plus },
        Flavor::Boundary => End::Bd { plus },
    };
    let m = if plus { Marked::Right } else { Marked::Left };
    let segs = vec![
        Segment {
            polygon: oa.polygon,
            from: endpoint(oa),
            to: End::Arc { pos: oa.position },
            marked: m,
        },
        Segment {
            polygon: ob.polygon,
            from: End::Arc { pos: ob.position },
            to: endpoint(ob),
            marked: m.flip(),
        },
    ];
    build_laminate(d, segs, false).expect("elementary laminate is valid")
}

// ---------------------------------------------------------------------------
// Crossing engine.

/// A directed traversal position: segment `seg` of `lam`, walked from its
/// stored `from` end (`fwd`) or from its `to` end.
#[derive(Clone, Copy)]
struct Strand<'a> {
    lam: &'a Laminate,
    seg: usize,
    fwd: bool,
}

impl<'a> Strand<'a> {
    fn dir(&self) -> (End, End, Marked) {
        let s = &self.lam.segments[self.seg];
        if self.fwd {
            (s.from, s.to, s.marked)
        } else {
            (s.to, s.from, s.marked.flip())
        }
    }

    fn polygon(&self) -> PolygonId {
        self.lam.segments[self.seg].polygon
    }

    /// Next segment in travel direction, across the arc at the current
    /// `to` end.  Exists whenever that end is an arc crossing.
    fn next(&self) -> Strand<'a> {
        let n = self.lam.segments.len();
        let seg = if self.fwd {
            if self.seg + 1 == n {
                assert!(self.lam.closed);
                0
            } else {
                self.seg + 1
            }
        } else if self.seg == 0 {
            assert!(self.lam.closed);
            n - 1
        } else {
            self.seg - 1
        };
        Strand {
            lam: self.lam,
            seg,
            fwd: self.fwd,
        }
    }
}

/// Germ key of a strand entering its polygon at `entry`: strands entering
/// the same place leave their entry edge ordered by key (ascending along
/// the polygon's ccw direction).  Keys are in quarter-units.
fn germ_key(d: &Dissection, strand: &Strand, entry: End) -> (i64, i64) {
    let p = strand.polygon();
    let poly = d.polygon(p);
    let (_, to, marked) = strand.dir();
    match poly.flavor {
        Flavor::Puncture => {
            let m = poly.edges.len() as i64;
            let i = match entry {
                End::Arc { pos } => pos as i64,
                _ => unreachable!("puncture entry is an arc edge"),
            };
            match to {
                End::Arc { pos } => {
                    let o = ((pos as i64) - i).rem_euclid(m);
                    match marked {
                        Marked::Right => (0, 4 * (m - o)),
                        Marked::Left => (0, 4 * (2 * m - o)),
                    }
                }
                End::Spiral { ccw } => (0, if ccw { 4 * m + 1 } else { 4 * m - 1 }),
                End::Bd { .. } => unreachable!(),
            }
        }
        Flavor::Boundary => {
            let c_slot = bd_coord(d, p, entry);
            let e = bd_coord(d, p, to);
            assert_ne!(c_slot, e, "germ target equals its entry");
            if e < c_slot {
                (0, -e)
            } else {
                (1, -e)
            }
        }
    }
}

/// Ordered query over crossing-end pairs, for cycle detection while
/// resolving strand orders that are not forced by local germ data.
type PairKey = (usize, usize, bool, usize, usize, bool);

/// Resolved orders of crossing-end pairs, shared across all queries of one
/// crossing computation.  A free orbit is broken by germ keys at whichever
/// divergence a query reaches first; without the cache, two queries
/// entering the orbit at different sites can break it at different
/// divergences, and the two tie-breaks need not be transport-consistent,
/// which fakes a crossing between strands that a consistent choice nests.
type OrderCache = HashMap<(ArcId, PairKey), Ordering>;

fn pair_key(x: &EndRef, y: &EndRef) -> PairKey {
    (
        x.lam as *const Laminate as usize,
        x.seg,
        x.is_to,
        y.lam as *const Laminate as usize,
        y.seg,
        y.is_to,
    )
}

/// Order of two strands entering a common slot, ascending along the
/// polygon-ccw direction there.  Equal means the strands stay parallel.
///
/// A divergence where one germ winds into a puncture or stops at a free
/// boundary end is not ordered by the germs alone (either side of the
/// other germ is realizable); the order is inherited from the crossing
/// points where the two strands enter the polygon, resolved recursively.
/// Divergences between two through-chords, or between free ends on
/// opposite sides of a circle-point, stay locally forced.  On a cycle of
/// such queries the orbit is free and any consistent choice is
/// crossing-minimal, so the germ keys break the tie.
fn cmp_strands(
    d: &Dissection,
    mut x: Strand,
    mut y: Strand,
    visited: &mut HashSet<PairKey>,
    cache: &mut OrderCache,
) -> Ordering {
    if std::ptr::eq(x.lam, y.lam) && x.seg == y.seg && x.fwd == y.fwd {
        return Ordering::Equal;
    }
    let mut seen: HashSet<(usize, bool, usize, bool)> = HashSet::new();
    loop {
        debug_assert_eq!(x.polygon(), y.polygon());
        let entry = x.dir().0;
        debug_assert_eq!(entry, y.dir().0);
        let (kx, ky) = (germ_key(d, &x, entry), germ_key(d, &y, entry));
        if kx != ky {
            let forced = match (x.dir().1, y.dir().1) {
                (End::Arc { .. }, End::Arc { .. }) => true,
                (End::Bd { plus: a }, End::Bd { plus: b }) => a != b,
                _ => false,
            };
            if forced {
                return kx.cmp(&ky);
            }
            // Parallel transport through the tied prefix preserves order
            // (each hop reverses twice), so the answer at the divergence
            // site is the answer at the original slot.
            let ex = EndRef {
                lam: x.lam,
                seg: x.seg,
                is_to: !x.fwd,
            };
            let ey = EndRef {
                lam: y.lam,
                seg: y.seg,
                is_to: !y.fwd,
            };
            let occ = ex.occurrence();
            debug_assert_eq!(occ, ey.occurrence());
            if !visited.insert(pair_key(&ex, &ey)) {
                return kx.cmp(&ky);
            }
            let arc = d.arc_at(occ);
            let r = cmp_on_arc_rec(d, arc, &ex, &ey, visited, cache);
            return if occs(d, arc).0 == occ { r } else { r.reverse() };
        }
        let to = x.dir().1;
        if !to.is_arc() {
            return Ordering::Equal;
        }
        if !seen.insert((x.seg, x.fwd, y.seg, y.fwd)) {
            return Ordering::Equal;
        }
        x = x.next();
        y = y.next();
        if std::ptr::eq(x.lam, y.lam) && x.seg == y.seg && x.fwd == y.fwd {
            return Ordering::Equal;
        }
    }
}

/// Reference to one arc-crossing end of a stored segment.
#[derive(Clone, Copy)]
pub struct EndRef<'a> {
    pub lam: &'a Laminate,
    pub seg: usize,
    pub is_to: bool,
}

impl<'a> EndRef<'a> {
    fn occurrence(&self) -> Occurrence {
        let s = &self.lam.segments[self.seg];
        occ_of(s, self.is_to).expect("end ref is an arc end")
    }

    /// Germ leaving the crossing into the segment's own polygon.
    fn inward(&self) -> Strand<'a> {
        Strand {
            lam: self.lam,
            seg: self.seg,
            fwd: !self.is_to,
        }
    }

    /// Germ leaving the crossing into the glued polygon (via the adjacent
    /// segment of the curve).
    fn outward(&self) -> Strand<'a> {
        Strand {
            lam: self.lam,
            seg: self.seg,
            fwd: self.is_to,
        }
        .next()
    }

    /// The germ of this crossing whose entry occurrence is `occ`.
    fn germ_through(&self, occ: Occurrence) -> Strand<'a> {
        if self.occurrence() == occ {
            self.inward()
        } else {
            self.outward()
        }
    }
}

/// Transverse order of two crossings on the same arc, ascending along the
/// side-A occurrence in its polygon's ccw direction.  Resolved by strand
/// divergence on the A side first, then the B side; Equal means parallel.
pub fn cmp_on_arc(d: &Dissection, arc: ArcId, x: &EndRef, y: &EndRef) -> Ordering {
    cmp_on_arc_rec(d, arc, x, y, &mut HashSet::new(), &mut HashMap::new())
}

fn cmp_on_arc_rec(
    d: &Dissection,
    arc: ArcId,
    x: &EndRef,
    y: &EndRef,
    visited: &mut HashSet<PairKey>,
    cache: &mut OrderCache,
) -> Ordering {
    if let Some(&r) = cache.get(&(arc, pair_key(x, y))) {
        return r;
    }
    visited.insert(pair_key(x, y));
    let (oa, ob) = occs(d, arc);
    let ra = cmp_strands(d, x.germ_through(oa), y.germ_through(oa), visited, cache);
    let r = if ra != Ordering::Equal {
        ra
    } else {
        cmp_strands(d, x.germ_through(ob), y.germ_through(ob), visited, cache).reverse()
    };
    cache.insert((arc, pair_key(x, y)), r);
    cache.insert((arc, pair_key(y, x)), r.reverse());
    r
}

/// Lifted support of a segment in its polygon model, in sixths.
#[derive(Clone, Copy, Debug)]
enum Support {
    Chord { lo: i64, hi: i64 },
    /// Winds toward +infinity from its arc-end coordinate (ccw spiral).
    Up { base: i64 },
    /// Winds toward -infinity from its arc-end coordinate (cw spiral).
    Down { base: i64 },
}

impl Support {
    fn shift(self, t: i64) -> Support {
        match self {
            Support::Chord { lo, hi } => Support::Chord {
                lo: lo + t,
                hi: hi + t,
            },
            Support::Up { base } => Support::Up { base: base + t },
            Support::Down { base } => Support::Down { base: base + t },
        }
    }

    /// Strands oriented with the circle-point on the right all travel in
    /// the decreasing direction; the one with the larger support maximum
    /// passes from the other's right to its left.
    fn max_above(self, other: Support) -> bool {
        let hi = |s: Support| match s {
            Support::Chord { hi, .. } => Some(hi),
            Support::Up { .. } => None, // +infinity
            Support::Down { base } => Some(base),
        };
        match (hi(self), hi(other)) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(a), Some(b)) => a > b,
        }
    }
}

fn crossing_once(a: Support, b: Support) -> bool {
    match (a, b) {
        (Support::Chord { lo: al, hi: ah }, Support::Chord { lo: bl, hi: bh }) => {
            (al < bl && bl < ah && ah < bh) || (bl < al && al < bh && bh < ah)
        }
        (Support::Chord { lo, hi }, Support::Up { base } | Support::Down { base })
        | (Support::Up { base } | Support::Down { base }, Support::Chord { lo, hi }) => {
            lo < base && base < hi
        }
        // Same-direction spirals stay nested; opposite ones are handled
        // separately (once per pair, not per period).
        _ => false,
    }
}

/// One crossing between segment `ai` of the first curve and `bi` of the
/// second; `rtl` is true when the first passes the second right-to-left
/// (both oriented with the local circle-point on their right).
#[derive(Clone, Copy, Debug)]
pub struct Crossing {
    pub ai: usize,
    pub bi: usize,
    pub rtl: bool,
}

/// Crossings contributed by one segment pair sharing a polygon, or None
/// when the strands are parallel there.
fn pair_crossings(
    d: &Dissection,
    a: &Laminate,
    ai: usize,
    b: &Laminate,
    bi: usize,
    cache: &mut OrderCache,
) -> Vec<Crossing> {
    let sa = &a.segments[ai];
    let sb = &b.segments[bi];
    debug_assert_eq!(sa.polygon, sb.polygon);
    let p = sa.polygon;
    let poly = d.polygon(p);

    // Fractions (in sixths) for ends sharing a slot, from strand order
    // along polygon ccw.  Default mid-edge is 3.
    let mut frac = [[3i64; 2]; 2]; // [which curve][which end: from=0,to=1]
    for (ia, xa) in [sa.from, sa.to].iter().enumerate() {
        for (ib, xb) in [sb.from, sb.to].iter().enumerate() {
            match (*xa, *xb) {
                (End::Arc { pos: pa }, End::Arc { pos: pb }) if pa == pb => {
                    let occ = Occurrence {
                        polygon: p,
                        position: pa,
                    };
                    let arc = d.arc_at(occ);
                    let xr = EndRef {
                        lam: a,
                        seg: ai,
                        is_to: ia == 1,
                    };
                    let yr = EndRef {
                        lam: b,
                        seg: bi,
                        is_to: ib == 1,
                    };
                    let r = cmp_on_arc_rec(d, arc, &xr, &yr, &mut HashSet::new(), cache);
                    let r = if occs(d, arc).0 == occ { r } else { r.reverse() };
                    match r {
                        Ordering::Equal => return vec![],
                        Ordering::Less => {
                            frac[0][ia] = 2;
                            frac[1][ib] = 4;
                        }
                        Ordering::Greater => {
                            frac[0][ia] = 4;
                            frac[1][ib] = 2;
                        }
                    }
                }
                (End::Bd { plus: za }, End::Bd { plus: zb }) if za == zb => {
                    let ga = if ia == 0 {
                        Strand { lam: a, seg: ai, fwd: true }
                    } else {
                        Strand { lam: a, seg: ai, fwd: false }
                    };
                    let gb = if ib == 0 {
                        Strand { lam: b, seg: bi, fwd: true }
                    } else {
                        Strand { lam: b, seg: bi, fwd: false }
                    };
                    match cmp_strands(d, ga, gb, &mut HashSet::new(), cache) {
                        Ordering::Equal => return vec![],
                        Ordering::Less => {
                            frac[0][ia] = 2;
                            frac[1][ib] = 4;
                        }
                        Ordering::Greater => {
                            frac[0][ia] = 4;
                            frac[1][ib] = 2;
                        }
                    }
                }
                (End::Spiral { ccw: ca }, End::Spiral { ccw: cb }) if ca == cb => {
                    // Same-direction spirals at the puncture stay nested.
                    return vec![];
                }
                _ => {}
            }
        }
    }

    let support = |s: &Segment, fr: &[i64; 2], flavor: Flavor| -> Support {
        let coord = |e: End, f: i64| -> Option<i64> {
            match flavor {
                Flavor::Boundary => Some(bd_coord(d, p, e) + if e.is_arc() { f } else { f - 3 }),
                Flavor::Puncture => match e {
                    End::Arc { pos } => Some(6 * pos as i64 + f),
                    _ => None,
                },
            }
        };
        let (cf, ct) = (coord(s.from, fr[0]), coord(s.to, fr[1]));
        match (cf, ct) {
            (Some(x), Some(y)) => {
                // Lift the `to` end next to the `from` end: the circle
                // point sits above, so marked Left means increasing.
                let y = match flavor {
                    Flavor::Boundary => y,
                    Flavor::Puncture => {
                        let m = 6 * poly.edges.len() as i64;
                        let o = (y - x).rem_euclid(m);
                        match s.marked {
                            Marked::Left => x + o,
                            Marked::Right => x + o - m,
                        }
                    }
                };
                Support::Chord {
                    lo: x.min(y),
                    hi: x.max(y),
                }
            }
            (Some(x), None) => match s.to {
                End::Spiral { ccw: true } => Support::Up { base: x },
                End::Spiral { ccw: false } => Support::Down { base: x },
                _ => unreachable!(),
            },
            (None, Some(y)) => match s.from {
                End::Spiral { ccw: true } => Support::Up { base: y },
                End::Spiral { ccw: false } => Support::Down { base: y },
                _ => unreachable!(),
            },
            (None, None) => unreachable!("segment with two spiral ends"),
        }
    };

    let mut out = Vec::new();
    match poly.flavor {
        Flavor::Boundary => {
            let ia = support(sa, &frac[0], Flavor::Boundary);
            let ib = support(sb, &frac[1], Flavor::Boundary);
            if crossing_once(ia, ib) {
                out.push(Crossing {
                    ai,
                    bi,
                    rtl: ia.max_above(ib),
                });
            }
        }
        Flavor::Puncture => {
            let ia = support(sa, &frac[0], Flavor::Puncture);
            let ib = support(sb, &frac[1], Flavor::Puncture);
            match (ia, ib) {
                (Support::Up { .. }, Support::Down { .. })
                | (Support::Down { .. }, Support::Up { .. }) => {
                    // Opposite spirals around one puncture: recorded as a
                    // single crossing marking incompatibility.
                    out.push(Crossing {
                        ai,
                        bi,
                        rtl: matches!(ia, Support::Up { .. }),
                    });
                }
                _ => {
                    let m = 6 * poly.edges.len() as i64;
                    for k in [-1i64, 0, 1] {
                        let shifted = ib.shift(k * m);
                        if crossing_once(ia, shifted) {
                            out.push(Crossing {
                                ai,
                                bi,
                                rtl: ia.max_above(shifted),
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

/// Coarse position of the crossing of `b`'s segment `bi` along `a`'s
/// segment `ai`, increasing from the from-end.  Mid-edge resolution: ends
/// sharing one edge slot may tie, which only matters when one segment
/// carries several crossings through the same slot.
pub(crate) fn along_key(d: &Dissection, a: &Laminate, ai: usize, b: &Laminate, bi: usize) -> i64 {
    const FAR: i64 = i64::MAX / 4;
    let sa = &a.segments[ai];
    let sb = &b.segments[bi];
    let p = sa.polygon;
    let poly = d.polygon(p);
    let coord = |e: End| -> Option<i64> {
        match poly.flavor {
            Flavor::Boundary => Some(bd_coord(d, p, e) + if e.is_arc() { 3 } else { 0 }),
            Flavor::Puncture => match e {
                End::Arc { pos } => Some(6 * pos as i64 + 3),
                _ => None,
            },
        }
    };
    let support = |s: &Segment| -> Support {
        let (cf, ct) = (coord(s.from), coord(s.to));
        match (cf, ct) {
            (Some(x), Some(y)) => {
                let y = match poly.flavor {
                    Flavor::Boundary => y,
                    Flavor::Puncture => {
                        let m = 6 * poly.edges.len() as i64;
                        let o = (y - x).rem_euclid(m);
                        match s.marked {
                            Marked::Left => x + o,
                            Marked::Right => x + o - m,
                        }
                    }
                };
                Support::Chord {
                    lo: x.min(y),
                    hi: x.max(y),
                }
            }
            (Some(x), None) | (None, Some(x)) => {
                let spiral = if cf.is_none() { s.from } else { s.to };
                match spiral {
                    End::Spiral { ccw: true } => Support::Up { base: x },
                    End::Spiral { ccw: false } => Support::Down { base: x },
                    _ => unreachable!(),
                }
            }
            (None, None) => unreachable!(),
        }
    };
    let ia = support(sa);
    let mut ib = support(sb);
    if poly.flavor == Flavor::Puncture {
        let m = 6 * poly.edges.len() as i64;
        match (0..3).map(|i| [0, -1, 1][i] * m).find(|&t| crossing_once(ia, ib.shift(t))) {
            Some(t) => ib = ib.shift(t),
            None => return FAR,
        }
    } else if !crossing_once(ia, ib) {
        return FAR;
    }
    let width = |s: Support| match s {
        Support::Chord { lo, hi } => hi - lo,
        _ => FAR,
    };
    match ia {
        Support::Chord { lo, hi } => {
            let inner = match ib {
                Support::Chord { lo: bl, hi: bh } => {
                    if lo < bl && bl < hi {
                        bl
                    } else {
                        bh
                    }
                }
                Support::Up { base } | Support::Down { base } => base,
            };
            let xf = coord(sa.from).expect("chord from-end has a coordinate");
            if xf <= lo {
                inner - lo
            } else {
                hi - inner
            }
        }
        // A spiral winds outward from its chord end: narrower straddling
        // chords are met nearer the base.
        Support::Up { .. } | Support::Down { .. } => {
            let w = width(ib);
            if coord(sa.from).is_some() {
                w
            } else {
                -w
            }
        }
    }
}

/// All crossings of `a` with `b`, one entry per geometric intersection
/// point in minimal position.  Parallel copies of one curve yield none.
pub fn crossings_with(d: &Dissection, a: &Laminate, b: &Laminate) -> Vec<Crossing> {
    let mut out = Vec::new();
    let mut cache = OrderCache::new();
    for ai in 0..a.segments.len() {
        for bi in 0..b.segments.len() {
            if a.segments[ai].polygon == b.segments[bi].polygon {
                out.extend(pair_crossings(d, a, ai, b, bi, &mut cache));
            }
        }
    }
    out
}

/// Self-intersections of one curve in minimal position.
pub fn self_crossings(d: &Dissection, a: &Laminate) -> usize {
    let mut total = 0;
    let mut cache = OrderCache::new();
    for i in 0..a.segments.len() {
        for j in i + 1..a.segments.len() {
            if a.segments[i].polygon == a.segments[j].polygon {
                total += pair_crossings(d, a, i, a, j, &mut cache).len();
            }
        }
    }
    total
}

pub fn compatible(d: &Dissection, a: &Laminate, b: &Laminate) -> bool {
    crossings_with(d, a, b).is_empty()
}

/// True when `a` never intersects `b`, or passes it from right to left at
/// every intersection (both oriented with circle-points on the right).
pub fn positive_position(d: &Dissection, a: &Laminate, b: &Laminate) -> bool {
    crossings_with(d, a, b).iter().all(|c| c.rtl)
}

// ---------------------------------------------------------------------------
// Text form: `P0:1A>2B/R; ...`, closed curves wrapped in `loop(...)`.

fn end_to_string(d: &Dissection, p: PolygonId, e: End) -> String {
    match e {
        End::Arc { pos } => match d.edge_at(Occurrence {
            polygon: p,
            position: pos,
        }) {
            PolygonEdge::Arc { arc, side } => format!("{}{}", arc + 1, side),
            PolygonEdge::Boundary => unreachable!(),
        },
        End::Bd { plus } => format!("bd{}", if plus { "+" } else { "-" }),
        End::Spiral { ccw } => format!("sp{}", if ccw { "+" } else { "-" }),
    }
}

pub fn laminate_to_string(d: &Dissection, lam: &Laminate) -> String {
    let mut body = String::new();
    for (i, s) in lam.segments.iter().enumerate() {
        if i > 0 {
            body.push_str("; ");
        }
        let _ = write!(
            body,
            "{}:{}>{}/{}",
            d.polygon(s.polygon).name,
            end_to_string(d, s.polygon, s.from),
            end_to_string(d, s.polygon, s.to),
            match s.marked {
                Marked::Left => "L",
                Marked::Right => "R",
            }
        );
    }
    if lam.closed {
        format!("loop({body})")
    } else {
        body
    }
}

fn parse_end(d: &Dissection, p: PolygonId, tok: &str) -> Result<End, LaminateError> {
    let tok = tok.trim().replace('\u{2212}', "-");
    let err = |m: String| LaminateError::Parse(m);
    match tok.as_str() {
        "bd+" => return Ok(End::Bd { plus: true }),
        "bd-" => return Ok(End::Bd { plus: false }),
        "sp+" => return Ok(End::Spiral { ccw: true }),
        "sp-" => return Ok(End::Spiral { ccw: false }),
        _ => {}
    }
    let side = match tok.chars().last() {
        Some('A') => ArcSide::A,
        Some('B') => ArcSide::B,
        _ => return Err(err(format!("bad end token '{tok}'"))),
    };
    let num: usize = tok[..tok.len() - 1]
        .parse()
        .map_err(|_| err(format!("bad end token '{tok}'")))?;
    if num == 0 || num > d.arc_count {
        return Err(err(format!("no arc {num}")));
    }
    let (oa, ob) = occs(d, num - 1);
    let occ = if side == ArcSide::A { oa } else { ob };
    if occ.polygon != p {
        return Err(err(format!(
            "edge {tok} is not on polygon {}",
            d.polygon(p).name
        )));
    }
    Ok(End::Arc { pos: occ.position })
}

pub fn parse_laminate(d: &Dissection, text: &str) -> Result<Laminate, LaminateError> {
    parse_inner(d, text, false)
}

/// [`parse_laminate`] with self-crossings allowed; see [`build_generalized`].
pub fn parse_generalized(d: &Dissection, text: &str) -> Result<Laminate, LaminateError> {
    parse_inner(d, text, true)
}

fn parse_inner(d: &Dissection, text: &str, allow_self: bool) -> Result<Laminate, LaminateError> {
    let err = |m: &str| LaminateError::Parse(m.to_string());
    let text = text.trim();
    let (body, closed) = if let Some(rest) = text.strip_prefix("loop(") {
        (
            rest.strip_suffix(')')
                .ok_or_else(|| err("unclosed loop(...)"))?,
            true,
        )
    } else {
        (text, false)
    };
    let mut segments = Vec::new();
    for part in body.split(';') {
        let part = part.trim();
        if part.is_empty() {
            return Err(err("empty segment"));
        }
        let (pname, rest) = part
            .split_once(':')
            .ok_or_else(|| err("segment must look like P0:1A>2B/R"))?;
        let polygon = d
            .polygon_named(pname.trim())
            .ok_or_else(|| LaminateError::Parse(format!("no polygon '{}'", pname.trim())))?;
        let (endpart, mark) = rest
            .rsplit_once('/')
            .ok_or_else(|| err("segment needs a marked side '/L' or '/R'"))?;
        let marked = match mark.trim() {
            "L" => Marked::Left,
            "R" => Marked::Right,
            other => return Err(LaminateError::Parse(format!("bad marked side '{other}'"))),
        };
        let (from, to) = endpart
            .split_once('>')
            .ok_or_else(|| err("segment needs 'from>to'"))?;
        segments.push(Segment {
            polygon,
            from: parse_end(d, polygon, from)?,
            to: parse_end(d, polygon, to)?,
            marked,
        });
    }
    build_inner(d, segments, closed, allow_self)
}

/// Crossing ends of the given laminates on `arc`, grouped into classes of
/// pairwise-parallel strands and sorted along the side-A occurrence.
/// Returned entries are (laminate index, segment index of the crossing's
/// earlier segment).
pub fn arc_crossing_classes(
    d: &Dissection,
    lams: &[&Laminate],
    arc: ArcId,
) -> Vec<Vec<(usize, usize)>> {
    let mut refs: Vec<(usize, usize)> = Vec::new();
    for (li, lam) in lams.iter().enumerate() {
        for (arc_i, _) in crossing_sequence(d, lam).iter().enumerate() {
            let s = &lam.segments[arc_i];
            if crossing_arc(d, s) == arc {
                refs.push((li, arc_i));
            }
        }
    }
    let endref = |(li, si): (usize, usize)| EndRef {
        lam: lams[li],
        seg: si,
        is_to: true,
    };
    // One cache for the whole classification keeps every free-orbit
    // tie-break consistent, so the comparator is a total preorder.
    let cache = std::cell::RefCell::new(OrderCache::new());
    let cmp = |x: &EndRef, y: &EndRef| {
        cmp_on_arc_rec(d, arc, x, y, &mut HashSet::new(), &mut cache.borrow_mut())
    };
    let mut classes: Vec<Vec<(usize, usize)>> = Vec::new();
    'outer: for r in refs {
        for class in classes.iter_mut() {
            if cmp(&endref(class[0]), &endref(r)) == Ordering::Equal {
                class.push(r);
                continue 'outer;
            }
        }
        classes.push(vec![r]);
    }
    classes.sort_by(|x, y| cmp(&endref(x[0]), &endref(y[0])));
    classes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dissection::parse_dissection;

    fn fixture(name: &str) -> Dissection {
        let text =
            std::fs::read_to_string(format!("../../fixtures/{name}.dsc")).expect("fixture file");
        parse_dissection(&text).expect("fixture parses")
    }

    #[test]
    fn elementary_g_vectors() {
        for name in ["disk8", "pdisk", "torus", "disk10p"] {
            let d = fixture(name);
            for arc in 0..d.arc_count {
                for plus in [true, false] {
                    let lam = elementary(&d, arc, plus);
                    let mut want = vec![0i64; d.arc_count];
                    want[arc] = if plus { 1 } else { -1 };
                    assert_eq!(g_vector(&d, &lam), want, "{name} arc {arc} plus={plus}");
                }
            }
        }
    }

    #[test]
    fn text_round_trip_and_reversal() {
        let d = fixture("disk8");
        let lam = elementary(&d, 0, true);
        let text = laminate_to_string(&d, &lam);
        assert_eq!(parse_laminate(&d, &text).unwrap(), lam);
        // Reversed segment list canonicalizes to the same laminate.
        let rev: Vec<Segment> = lam.segments().iter().rev().map(|s| s.reversed()).collect();
        let again = build_laminate(&d, rev, false).unwrap();
        assert_eq!(again, lam);
        assert_eq!(g_vector(&d, &again), g_vector(&d, &lam));
    }

    #[test]
    fn torus_core_loop() {
        let d = fixture("torus");
        let lam = parse_laminate(&d, "loop(P0:1A>2A/L; P0:2B>1B/R)").unwrap();
        assert!(lam.is_closed());
        assert_eq!(g_vector(&d, &lam), vec![1, -1]);
        // Same loop entered rotated and reversed.
        let other = parse_laminate(&d, "loop(P0:1B>2B/L; P0:2A>1A/R)").unwrap();
        assert_eq!(other, lam);
        assert_eq!(self_crossings(&d, &lam), 0);
        assert!(compatible(&d, &lam, &lam));
    }

    #[test]
    fn opposite_elementaries_incompatible() {
        for name in ["disk8", "pdisk", "torus"] {
            let d = fixture(name);
            let plus = elementary(&d, 0, true);
            let minus = elementary(&d, 0, false);
            assert!(!compatible(&d, &plus, &minus), "{name}");
            assert!(compatible(&d, &plus, &plus), "{name}");
        }
        // Without punctures the opposite pair meets in exactly one point.
        let d = fixture("disk8");
        let crossings = crossings_with(&d, &elementary(&d, 0, true), &elementary(&d, 0, false));
        assert_eq!(crossings.len(), 1);
    }

    #[test]
    fn torus_elementary_meets_core_loop() {
        let d = fixture("torus");
        let loop_ = parse_laminate(&d, "loop(P0:1A>2A/L; P0:2B>1B/R)").unwrap();
        let plus = elementary(&d, 0, true);
        let crossings = crossings_with(&d, &plus, &loop_);
        assert_eq!(crossings.len(), 1);
        // A laminate with positive weight on the arc sits in positive
        // position for the loop.
        assert!(positive_position(&d, &plus, &loop_));
        assert!(!positive_position(&d, &loop_, &plus));
    }

    #[test]
    fn disk8_distinct_elementaries_compatible() {
        let d = fixture("disk8");
        for a in 0..3 {
            for b in 0..3 {
                if a != b {
                    let la = elementary(&d, a, true);
                    let lb = elementary(&d, b, true);
                    assert!(compatible(&d, &la, &lb), "arcs {a} {b}");
                }
            }
        }
    }

    #[test]
    fn validation_errors() {
        let d = fixture("disk8");
        // Marked side forced in boundary polygons.
        assert!(matches!(
            parse_laminate(&d, "P0:bd+>1A/L; P1:1B>bd+/R"),
            Err(LaminateError::MarkedForced { .. })
        ));
        // Interior ends must glue.
        assert!(matches!(
            parse_laminate(&d, "P0:bd+>1A/R; P2:2B>bd+/L"),
            Err(LaminateError::BadGlue(..))
        ));
        // Curve endpoints cannot sit on an arc.
        assert!(matches!(
            parse_laminate(&d, "P0:2A>1A/R"),
            Err(LaminateError::BadEndpoint(..))
        ));
        let t = fixture("torus");
        // A closed curve of odd length cannot alternate marked sides.
        assert!(parse_laminate(&t, "loop(P0:1A>2A/L; P0:2B>1A/R; P0:1B>1B/L)").is_err());
        // Doubled core loop is not primitive.
        assert!(matches!(
            parse_laminate(
                &t,
                "loop(P0:1A>2A/L; P0:2B>1B/R; P0:1A>2A/L; P0:2B>1B/R)"
            ),
            Err(LaminateError::NotPrimitive)
        ));
    }

    #[test]
    fn pdisk_spiral_pairs() {
        let d = fixture("pdisk");
        // Opposite spirals around the central puncture force a crossing;
        // same-direction spirals nest and stay compatible.
        let p1 = elementary(&d, 0, true);
        let m2 = elementary(&d, 1, false);
        let p2 = elementary(&d, 1, true);
        assert!(!compatible(&d, &p1, &m2));
        assert!(compatible(&d, &p1, &p2));
    }
}
