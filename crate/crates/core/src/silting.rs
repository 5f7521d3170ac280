//! Gentle presentation of a dissection (quiver, relations, special cycles,
//! Brauer relations) and two-term string complexes of laminates, with the
//! combinatorial obstruction scan deciding Hom(T, T'[1]) = 0 and an exact
//! rational linear-algebra cross-check.

use std::collections::{BTreeMap, BTreeSet};

use crate::dissection::{dual, ArcId, Dissection, Flavor, PolygonEdge, PolygonId};
use crate::fan::Lamination;
use crate::laminate::{crossing_sequence, End, Laminate, Marked, Segment};
use crate::ratmat::rank;

/// Arc sides of one polygon in quiver order: the full cycle of a puncture
/// polygon, or the linear run starting just after the boundary zone.
struct Window {
    cyclic: bool,
    /// (edge position, arc) per side, in arrow order.
    sides: Vec<(usize, ArcId)>,
    /// Global id of this window's first arrow.
    arrow_base: usize,
}

impl Window {
    fn arrow_count(&self) -> usize {
        if self.cyclic {
            self.sides.len()
        } else {
            self.sides.len().saturating_sub(1)
        }
    }

    fn arc(&self, cidx: usize) -> ArcId {
        self.sides[cidx % self.sides.len()].1
    }
}

fn windows_of(d: &Dissection) -> Vec<Window> {
    let mut wins = Vec::new();
    let mut base = 0;
    for p in &d.polygons {
        let arc_of = |pos: usize| match p.edges[pos] {
            PolygonEdge::Arc { arc, .. } => arc,
            PolygonEdge::Boundary => unreachable!("zone positions are skipped"),
        };
        let (cyclic, sides) = match p.flavor {
            Flavor::Puncture => (true, (0..p.edges.len()).map(|i| (i, arc_of(i))).collect()),
            Flavor::Boundary => {
                let ec = p.edges.len();
                let z = p.boundary_pos().expect("boundary polygon has a zone");
                let sides: Vec<_> = (1..ec).map(|i| ((z + i) % ec, arc_of((z + i) % ec))).collect();
                (false, sides)
            }
        };
        let w = Window {
            cyclic,
            sides,
            arrow_base: base,
        };
        base += w.arrow_count();
        wins.push(w);
    }
    wins
}

/// Quiver index of the arc side at edge `pos` of polygon `p`.
fn cindex_of(d: &Dissection, p: PolygonId, pos: usize) -> usize {
    let poly = d.polygon(p);
    match poly.flavor {
        Flavor::Puncture => pos,
        Flavor::Boundary => {
            let ec = poly.edges.len();
            let z = poly.boundary_pos().expect("boundary polygon has a zone");
            (pos + ec - z - 1) % ec
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Arrow {
    pub source: ArcId,
    pub target: ArcId,
    pub polygon: PolygonId,
    /// Edge position of the source arc side.
    pub position: usize,
}

pub struct Quiver {
    pub arc_count: usize,
    pub arrows: Vec<Arrow>,
    /// Pairs of arrow ids (first, second) whose composite is zero: every
    /// composable length-2 path that is not two consecutive arrows of one
    /// polygon's cycle or run.
    pub relations: Vec<(usize, usize)>,
    windows: Vec<Window>,
}

/// Compact arrow names a, b, ..., z, aa, ab, ... in global id order.
pub fn arrow_name(mut i: usize) -> String {
    let mut s = Vec::new();
    loop {
        s.push(b'a' + (i % 26) as u8);
        i /= 26;
        if i == 0 {
            break;
        }
        i -= 1;
    }
    s.reverse();
    String::from_utf8(s).unwrap()
}

pub fn quiver_of(d: &Dissection) -> Quiver {
    let windows = windows_of(d);
    let mut arrows = Vec::new();
    for (pi, w) in windows.iter().enumerate() {
        for i in 0..w.arrow_count() {
            arrows.push(Arrow {
                source: w.arc(i),
                target: w.arc(i + 1),
                polygon: pi,
                position: w.sides[i].0,
            });
        }
    }
    // A composite is nonzero exactly when the second arrow directly follows
    // the first inside the same window.
    let follows = |i: usize, j: usize| -> bool {
        let (wi, ci) = locate_arrow(&windows, i);
        let (wj, cj) = locate_arrow(&windows, j);
        wi == wj && cj == (ci + 1) % windows[wi].sides.len().max(1) && {
            let w = &windows[wi];
            w.cyclic || ci + 1 == cj
        }
    };
    let mut relations = Vec::new();
    for i in 0..arrows.len() {
        for j in 0..arrows.len() {
            if arrows[i].target == arrows[j].source && !follows(i, j) {
                relations.push((i, j));
            }
        }
    }
    let q = Quiver {
        arc_count: d.arc_count,
        arrows,
        relations,
        windows,
    };
    assert_gentle(&q);
    q
}

fn locate_arrow(windows: &[Window], id: usize) -> (usize, usize) {
    for (pi, w) in windows.iter().enumerate() {
        if id >= w.arrow_base && id < w.arrow_base + w.arrow_count() {
            return (pi, id - w.arrow_base);
        }
    }
    panic!("arrow id out of range");
}

/// In-/out-degree at most two per vertex, and unique nonzero / zero
/// continuation per arrow on each side.
fn assert_gentle(q: &Quiver) {
    let n = q.arc_count;
    let (mut indeg, mut outdeg) = (vec![0usize; n], vec![0usize; n]);
    for a in &q.arrows {
        outdeg[a.source] += 1;
        indeg[a.target] += 1;
    }
    assert!(indeg.iter().all(|&k| k <= 2) && outdeg.iter().all(|&k| k <= 2));
    let rel: BTreeSet<(usize, usize)> = q.relations.iter().copied().collect();
    for i in 0..q.arrows.len() {
        let mut zero_after = 0;
        let mut nonzero_after = 0;
        let mut zero_before = 0;
        let mut nonzero_before = 0;
        for j in 0..q.arrows.len() {
            if q.arrows[i].target == q.arrows[j].source {
                if rel.contains(&(i, j)) {
                    zero_after += 1;
                } else {
                    nonzero_after += 1;
                }
            }
            if q.arrows[j].target == q.arrows[i].source {
                if rel.contains(&(j, i)) {
                    zero_before += 1;
                } else {
                    nonzero_before += 1;
                }
            }
        }
        assert!(zero_after <= 1 && nonzero_after <= 1);
        assert!(zero_before <= 1 && nonzero_before <= 1);
    }
}

/// A nonzero path of t-degree zero: `len` consecutive arrows of one
/// polygon's window starting at side index `start`.  Wrapping past the end
/// of the cycle is allowed only in puncture polygons and only short of a
/// full turn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ShortPath {
    pub polygon: PolygonId,
    pub start: usize,
    pub len: usize,
}

impl ShortPath {
    fn end(&self, w: &Window) -> usize {
        if w.cyclic {
            (self.start + self.len) % w.sides.len()
        } else {
            self.start + self.len
        }
    }
}

fn path_valid(windows: &[Window], p: &ShortPath) -> bool {
    let w = &windows[p.polygon];
    p.len >= 1
        && p.start < w.sides.len()
        && if w.cyclic {
            p.len < w.sides.len()
        } else {
            p.start + p.len <= w.arrow_count()
        }
}

fn path_target_arc(windows: &[Window], p: &ShortPath) -> ArcId {
    let w = &windows[p.polygon];
    w.arc(p.end(w))
}

/// Global arrow ids along the path.
fn path_arrows(windows: &[Window], p: &ShortPath) -> Vec<usize> {
    let w = &windows[p.polygon];
    (0..p.len)
        .map(|k| w.arrow_base + (p.start + k) % w.sides.len())
        .collect()
}

fn common_arrows(windows: &[Window], p: &ShortPath, q: &ShortPath) -> bool {
    if p.polygon != q.polygon {
        return false;
    }
    let pa: BTreeSet<usize> = path_arrows(windows, p).into_iter().collect();
    path_arrows(windows, q).iter().any(|a| pa.contains(a))
}

/// `small` is a trailing factor of `big`: big = rest . small.  With
/// `proper`, `rest` must be non-constant.
fn divides_suffix(windows: &[Window], small: &ShortPath, big: &ShortPath, proper: bool) -> bool {
    if small.polygon != big.polygon || small.len > big.len || (proper && small.len == big.len) {
        return false;
    }
    let w = &windows[small.polygon];
    if w.cyclic {
        let m = w.sides.len();
        small.start == (big.start + big.len - small.len) % m
    } else {
        small.start == big.start + big.len - small.len
    }
}

/// `small` is a leading factor of `big`: big = small . rest.
fn divides_prefix(_windows: &[Window], small: &ShortPath, big: &ShortPath, proper: bool) -> bool {
    small.polygon == big.polygon
        && small.start == big.start
        && small.len <= big.len
        && !(proper && small.len == big.len)
}

/// All t-degree-zero paths starting at an occurrence of `from` and ending
/// at an occurrence of `to`.
fn paths_between(windows: &[Window], from: ArcId, to: ArcId) -> Vec<ShortPath> {
    let mut out = Vec::new();
    for (pi, w) in windows.iter().enumerate() {
        let max = if w.cyclic {
            w.sides.len() - 1
        } else {
            w.arrow_count()
        };
        for s in 0..w.sides.len() {
            if w.arc(s) != from {
                continue;
            }
            for len in 1..=max {
                let p = ShortPath {
                    polygon: pi,
                    start: s,
                    len,
                };
                if path_valid(windows, &p) && path_target_arc(windows, &p) == to {
                    out.push(p);
                }
            }
        }
    }
    out
}

/// One full turn of a puncture polygon's cycle, based at one occurrence of
/// the base arc.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecialCycle {
    pub polygon: PolygonId,
    pub base_arc: ArcId,
    /// Window index of the base occurrence.
    pub base: usize,
    /// Global arrow ids of the full cycle starting at the base.
    pub arrows: Vec<usize>,
}

pub fn special_cycles(q: &Quiver) -> Vec<SpecialCycle> {
    let mut out = Vec::new();
    for (pi, w) in q.windows.iter().enumerate() {
        if !w.cyclic {
            continue;
        }
        let m = w.sides.len();
        for base in 0..m {
            out.push(SpecialCycle {
                polygon: pi,
                base_arc: w.arc(base),
                base,
                arrows: (0..m).map(|k| w.arrow_base + (base + k) % m).collect(),
            });
        }
    }
    out
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SiltingError {
    #[error("closed curves have no two-term complex")]
    Closed,
    #[error("operation requires t-exponent zero on every map")]
    NotShort,
    #[error("lamination must consist of distinct non-closed members")]
    NotReduced,
    #[error("multiplicities must cover exactly the puncture polygons")]
    BrauerDomain,
}

/// Two-term complex of projectives written as a homotopy string: node i
/// carries (arc, degree), maps[i] joins nodes i and i+1 and always runs
/// from the degree -1 node of the pair to the degree 0 node.  Stored in
/// canonical orientation (minimum of the word and its reversal).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StringComplex {
    pub arc_count: usize,
    pub entries: Vec<(ArcId, i8)>,
    /// (path, t-exponent); the exponent is zero for laminate complexes.
    pub maps: Vec<(ShortPath, u32)>,
}

impl StringComplex {
    pub fn is_short(&self) -> bool {
        self.maps.iter().all(|&(_, h)| h == 0)
    }

    fn canonical(mut self) -> StringComplex {
        let rev_entries: Vec<_> = self.entries.iter().rev().copied().collect();
        let rev_maps: Vec<_> = self.maps.iter().rev().copied().collect();
        if (&rev_entries, &rev_maps) < (&self.entries, &self.maps) {
            self.entries = rev_entries;
            self.maps = rev_maps;
        }
        self
    }
}

/// Short map of a segment with both ends on arcs: the quiver path from the
/// degree-0 side's arc to the degree -1 side's arc, read inside the
/// segment's polygon.
fn sigma(d: &Dissection, windows: &[Window], s: &Segment) -> ShortPath {
    let (End::Arc { pos: fp }, End::Arc { pos: tp }) = (s.from, s.to) else {
        panic!("interior segments cross arcs at both ends");
    };
    let w = &windows[s.polygon];
    let m = w.sides.len();
    let (cf, ct) = (cindex_of(d, s.polygon, fp), cindex_of(d, s.polygon, tp));
    let p = match s.marked {
        Marked::Right => ShortPath {
            polygon: s.polygon,
            start: ct,
            len: if w.cyclic {
                (cf + m - ct) % m
            } else {
                assert!(cf > ct, "marked side fixes the run direction");
                cf - ct
            },
        },
        Marked::Left => ShortPath {
            polygon: s.polygon,
            start: cf,
            len: if w.cyclic {
                (ct + m - cf) % m
            } else {
                assert!(ct > cf, "marked side fixes the run direction");
                ct - cf
            },
        },
    };
    assert!(path_valid(windows, &p), "segment map stays inside its window");
    p
}

/// The two-term complex of a non-closed (possibly self-crossing) curve:
/// one node per arc crossing, degree 0 at positive crossings, and one
/// short map per interior segment.
pub fn string_complex(d: &Dissection, lam: &Laminate) -> Result<StringComplex, SiltingError> {
    if lam.is_closed() {
        return Err(SiltingError::Closed);
    }
    let windows = windows_of(d);
    let entries: Vec<(ArcId, i8)> = crossing_sequence(d, lam)
        .into_iter()
        .map(|(arc, sg)| (arc, if sg > 0 { 0 } else { -1 }))
        .collect();
    let segs = lam.segments();
    let maps: Vec<(ShortPath, u32)> = segs[1..segs.len() - 1]
        .iter()
        .map(|s| (sigma(d, &windows, s), 0))
        .collect();
    debug_assert!(entries
        .windows(2)
        .all(|p| (p[0].1 == 0) != (p[1].1 == 0)));
    Ok(StringComplex {
        arc_count: d.arc_count,
        entries,
        maps,
    }
    .canonical())
}

/// Degree-0 multiplicity minus degree -1 multiplicity per arc.
pub fn complex_g(t: &StringComplex) -> Vec<i64> {
    let mut g = vec![0i64; t.arc_count];
    for &(arc, deg) in &t.entries {
        g[arc] += if deg == 0 { 1 } else { -1 };
    }
    g
}

/// One complex per member of a reduced lamination.
pub fn lamination_complex(d: &Dissection, x: &Lamination) -> Result<Vec<StringComplex>, SiltingError> {
    if !x.is_reduced() {
        return Err(SiltingError::NotReduced);
    }
    x.members
        .iter()
        .map(|(lam, _)| string_complex(d, lam))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum HomObstruction {
    /// A single short map p from the degree -1 node `from` of the source to
    /// the degree 0 node `to` of the target; every neighboring map either
    /// shares no arrow with p or factors through it properly, with at most
    /// one non-sharing map per side.  `form` records which sides carry a
    /// factoring: 'a' neither, 'b' source only, 'c' target only, 'd' both.
    SingletonSingle {
        form: char,
        path: ShortPath,
        from: usize,
        to: usize,
    },
    /// A maximal common subword of the two strings (same arcs, degrees and
    /// maps; `reversed` when read against the target's orientation) both of
    /// whose ends reject a factoring of the outside maps.
    QuasiGraph {
        from: usize,
        to: usize,
        len: usize,
        reversed: bool,
    },
    /// An arc in degree -1 of the source and degree 0 of the target: the
    /// identity component can never be cancelled by a homotopy, whose
    /// entries compose with a differential and are never constant.
    SharedArc { from: usize, to: usize },
}

fn check_short(t: &StringComplex, t2: &StringComplex) -> Result<(), SiltingError> {
    if t.is_short() && t2.is_short() {
        Ok(())
    } else {
        Err(SiltingError::NotShort)
    }
}

/// Maps adjacent to node `i`.
fn adjacent_maps(t: &StringComplex, i: usize) -> Vec<ShortPath> {
    let mut out = Vec::new();
    if i > 0 {
        out.push(t.maps[i - 1].0);
    }
    if i < t.maps.len() {
        out.push(t.maps[i].0);
    }
    out
}

pub fn singleton_single_maps(
    d: &Dissection,
    t: &StringComplex,
    t2: &StringComplex,
) -> Result<Vec<HomObstruction>, SiltingError> {
    check_short(t, t2)?;
    let windows = windows_of(d);
    let mut out = Vec::new();
    for (x, &(ax, degx)) in t.entries.iter().enumerate() {
        if degx != -1 {
            continue;
        }
        for (y, &(ay, degy)) in t2.entries.iter().enumerate() {
            if degy != 0 {
                continue;
            }
            for p in paths_between(&windows, ay, ax) {
                // Each neighbor of the source node must avoid p's arrows or
                // end with p; each neighbor of the target node must avoid
                // them or start with p.  One avoider at most per side.
                let mut ok = true;
                let (mut src_avoid, mut src_factor) = (0, 0);
                for g in adjacent_maps(t, x) {
                    if divides_suffix(&windows, &p, &g, true) {
                        src_factor += 1;
                    } else if !common_arrows(&windows, &p, &g) {
                        src_avoid += 1;
                    } else {
                        ok = false;
                    }
                }
                let (mut dst_avoid, mut dst_factor) = (0, 0);
                for g in adjacent_maps(t2, y) {
                    if divides_prefix(&windows, &p, &g, true) {
                        dst_factor += 1;
                    } else if !common_arrows(&windows, &p, &g) {
                        dst_avoid += 1;
                    } else {
                        ok = false;
                    }
                }
                if ok && src_avoid <= 1 && dst_avoid <= 1 {
                    let form = match (src_factor > 0, dst_factor > 0) {
                        (false, false) => 'a',
                        (true, false) => 'b',
                        (false, true) => 'c',
                        (true, true) => 'd',
                    };
                    out.push(HomObstruction::SingletonSingle {
                        form,
                        path: p,
                        from: x,
                        to: y,
                    });
                }
            }
        }
    }
    Ok(out)
}

fn node_match(t: &StringComplex, t2: &StringComplex, i: usize, j: usize) -> bool {
    t.entries[i] == t2.entries[j]
}

fn map_eq(t: &StringComplex, t2: &StringComplex, i: usize, j: usize) -> bool {
    t.maps[i] == t2.maps[j]
}

/// Can the single matched pair (i, j) grow by one node in the given
/// orientation, in either direction?
fn pair_extends(t: &StringComplex, t2: &StringComplex, i: usize, j: usize, rev: bool) -> bool {
    let (n1, n2) = (t.entries.len(), t2.entries.len());
    if !rev {
        (i > 0 && j > 0 && node_match(t, t2, i - 1, j - 1) && map_eq(t, t2, i - 1, j - 1))
            || (i + 1 < n1 && j + 1 < n2 && node_match(t, t2, i + 1, j + 1) && map_eq(t, t2, i, j))
    } else {
        (i > 0 && j + 1 < n2 && node_match(t, t2, i - 1, j + 1) && map_eq(t, t2, i - 1, j))
            || (i + 1 < n1 && j > 0 && node_match(t, t2, i + 1, j - 1) && map_eq(t, t2, i, j - 1))
    }
}

/// End test for one side of an overlap run.  `deg` is the degree of the
/// boundary node, `own` the source-side map just beyond the run, `other`
/// the target-side one.
fn end_holds(
    windows: &[Window],
    deg: i8,
    own: Option<ShortPath>,
    other: Option<ShortPath>,
) -> bool {
    if deg == -1 {
        // Outgoing maps q (source) and q' (target): fails when q' is
        // missing or q divides it from the right (a factoring p with
        // p . q' = q exists; equality counts).
        match (own, other) {
            (_, None) => false,
            (None, Some(_)) => true,
            (Some(q), Some(q2)) => !divides_suffix(windows, &q, &q2, false),
        }
    } else {
        // Incoming maps r (source) and r' (target): fails when r is
        // missing or r' divides it from the left.
        match (own, other) {
            (None, _) => false,
            (Some(_), None) => true,
            (Some(r), Some(r2)) => !divides_prefix(windows, &r2, &r, false),
        }
    }
}

pub fn quasi_graph_reps(
    d: &Dissection,
    t: &StringComplex,
    t2: &StringComplex,
) -> Result<Vec<HomObstruction>, SiltingError> {
    check_short(t, t2)?;
    let windows = windows_of(d);
    let (n1, n2) = (t.entries.len(), t2.entries.len());
    let mut out = BTreeSet::new();
    for (x, &(ax, degx)) in t.entries.iter().enumerate() {
        if degx != -1 {
            continue;
        }
        for (y, &(ay, degy)) in t2.entries.iter().enumerate() {
            if degy == 0 && ax == ay {
                out.insert(HomObstruction::SharedArc { from: x, to: y });
            }
        }
    }
    // Maximal equal-degree common subwords, scanned in both orientations.
    let mut runs: Vec<(usize, usize, usize, bool)> = Vec::new();
    for rev in [false, true] {
        let offsets: Vec<i64> = if !rev {
            (-(n1 as i64 - 1)..=(n2 as i64 - 1)).collect()
        } else {
            (0..=(n1 as i64 + n2 as i64 - 2)).collect()
        };
        for c in offsets {
            let mut i = 0usize;
            while i < n1 {
                let j = if !rev { i as i64 + c } else { c - i as i64 };
                if j < 0 || j >= n2 as i64 || !node_match(t, t2, i, j as usize) {
                    i += 1;
                    continue;
                }
                let start = i;
                let jstart = j as usize;
                let mut len = 1;
                loop {
                    let ni = start + len;
                    let nj = if !rev {
                        jstart as i64 + len as i64
                    } else {
                        jstart as i64 - len as i64
                    };
                    if ni >= n1 || nj < 0 || nj >= n2 as i64 || !node_match(t, t2, ni, nj as usize) {
                        break;
                    }
                    let mlink = if !rev {
                        map_eq(t, t2, ni - 1, jstart + len - 1)
                    } else {
                        map_eq(t, t2, ni - 1, jstart - len)
                    };
                    if !mlink {
                        break;
                    }
                    len += 1;
                }
                runs.push((start, jstart, len, rev));
                i = start + len;
            }
        }
    }
    for (i0, j0, len, rev) in runs {
        if len == 1 && pair_extends(t, t2, i0, j0, !rev) {
            continue;
        }
        // Beyond-the-run maps at the two ends, on each side of the pair.
        let top_own = if i0 > 0 { Some(t.maps[i0 - 1].0) } else { None };
        let (iend, jend) = (i0 + len - 1, if !rev { j0 + len - 1 } else { j0 + 1 - len });
        let bot_own = t.maps.get(iend).map(|&(p, _)| p);
        let (top_other, bot_other) = if !rev {
            (
                if j0 > 0 { Some(t2.maps[j0 - 1].0) } else { None },
                t2.maps.get(j0 + len - 1).map(|&(p, _)| p),
            )
        } else {
            (
                t2.maps.get(j0).map(|&(p, _)| p),
                if jend > 0 { Some(t2.maps[jend - 1].0) } else { None },
            )
        };
        if end_holds(&windows, t.entries[i0].1, top_own, top_other)
            && end_holds(&windows, t.entries[iend].1, bot_own, bot_other)
        {
            out.insert(HomObstruction::QuasiGraph {
                from: i0,
                to: j0,
                len,
                reversed: rev && len > 1,
            });
        }
    }
    Ok(out.into_iter().collect())
}

/// Exact check of Hom(T, T'[1]) = 0 at t-degree zero: the chain maps are
/// the paths from degree-0 arcs of T' to degree -1 arcs of T, and the
/// null-homotopies are spanned by composites of arbitrary degree-wise maps
/// with either differential; products leaving a polygon window pick up a
/// factor of t and vanish at degree zero.  A length argument lifts the
/// degree-zero answer over the formal parameter.
pub fn hom_vanishes(
    d: &Dissection,
    t: &StringComplex,
    t2: &StringComplex,
) -> Result<bool, SiltingError> {
    check_short(t, t2)?;
    let windows = windows_of(d);
    // Hom-unit basis: Const identities plus every short path.
    #[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
    enum P {
        Const,
        Word(ShortPath),
    }
    let homs = |a: ArcId, b: ArcId| -> Vec<P> {
        let mut v: Vec<P> = paths_between(&windows, a, b).into_iter().map(P::Word).collect();
        if a == b {
            v.push(P::Const);
        }
        v
    };
    // first . second, or None when zero (relation or t-positive).
    let compose = |first: &P, second: &P| -> Option<P> {
        match (first, second) {
            (P::Const, x) | (x, P::Const) => Some(*x),
            (P::Word(f), P::Word(s)) => {
                let w = &windows[f.polygon];
                if f.polygon != s.polygon || s.start != f.end(w) {
                    return None;
                }
                let joined = ShortPath {
                    polygon: f.polygon,
                    start: f.start,
                    len: f.len + s.len,
                };
                path_valid(&windows, &joined).then_some(P::Word(joined))
            }
        }
    };
    let deg_nodes = |c: &StringComplex, deg: i8| -> Vec<usize> {
        (0..c.entries.len()).filter(|&i| c.entries[i].1 == deg).collect()
    };
    let (tm1, t0) = (deg_nodes(t, -1), deg_nodes(t, 0));
    let (t2m1, t20) = (deg_nodes(t2, -1), deg_nodes(t2, 0));
    // Chain-map coordinates (x, y, path).
    let mut basis: Vec<(usize, usize, P)> = Vec::new();
    for &x in &tm1 {
        for &y in &t20 {
            for p in homs(t2.entries[y].0, t.entries[x].0) {
                basis.push((x, y, p));
            }
        }
    }
    if basis.is_empty() {
        return Ok(true);
    }
    let coord = |x: usize, y: usize, p: &P| basis.iter().position(|b| b.0 == x && b.1 == y && b.2 == *p);
    let mut rows: Vec<Vec<i64>> = Vec::new();
    // Differential components as (deg -1 node, deg 0 node, path).
    let diff = |c: &StringComplex| -> Vec<(usize, usize, ShortPath)> {
        (0..c.maps.len())
            .map(|k| {
                let (a, b) = (k, k + 1);
                if c.entries[a].1 == -1 {
                    (a, b, c.maps[k].0)
                } else {
                    (b, a, c.maps[k].0)
                }
            })
            .collect()
    };
    let (dt, dt2) = (diff(t), diff(t2));
    // Homotopy generators u: T^{-1} -> T'^{-1}, pushed forward along d'.
    for &x in &tm1 {
        for &z in &t2m1 {
            for u in homs(t2.entries[z].0, t.entries[x].0) {
                let mut row = vec![0i64; basis.len()];
                for &(dz, dy, dp) in &dt2 {
                    if dz != z {
                        continue;
                    }
                    if let Some(res) = compose(&P::Word(dp), &u) {
                        if let Some(ci) = coord(x, dy, &res) {
                            row[ci] += 1;
                        }
                    }
                }
                rows.push(row);
            }
        }
    }
    // Homotopy generators v: T^0 -> T'^0, pulled back along d.
    for &w0 in &t0 {
        for &y in &t20 {
            for v in homs(t2.entries[y].0, t.entries[w0].0) {
                let mut row = vec![0i64; basis.len()];
                for &(dx, dw, dp) in &dt {
                    if dw != w0 {
                        continue;
                    }
                    if let Some(res) = compose(&v, &P::Word(dp)) {
                        if let Some(ci) = coord(dx, y, &res) {
                            row[ci] += 1;
                        }
                    }
                }
                rows.push(row);
            }
        }
    }
    Ok(rank(&rows) == basis.len())
}

/// Every ordered pair, self-pairs included, has an empty obstruction list.
pub fn is_presilting(d: &Dissection, ts: &[StringComplex]) -> Result<bool, SiltingError> {
    for a in ts {
        for b in ts {
            if !singleton_single_maps(d, a, b)?.is_empty()
                || !quasi_graph_reps(d, a, b)?.is_empty()
            {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Presilting with as many pairwise distinct members as there are arcs.
pub fn is_silting(d: &Dissection, ts: &[StringComplex]) -> Result<bool, SiltingError> {
    let distinct: BTreeSet<&StringComplex> = ts.iter().collect();
    Ok(is_presilting(d, ts)? && distinct.len() == d.arc_count)
}

#[derive(Clone, Debug, Default)]
pub struct BrauerSpec {
    pub multiplicity: BTreeMap<PolygonId, u32>,
}

/// Difference of cycle powers at the two dual endpoints of an arc; a side
/// landing in a boundary polygon contributes zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BrauerRelation {
    pub arc: ArcId,
    /// Arrow words of the side-A and side-B endpoint cycles.
    pub lhs: Option<Vec<usize>>,
    pub rhs: Option<Vec<usize>>,
}

pub fn brauer_relations(
    d: &Dissection,
    spec: &BrauerSpec,
) -> Result<Vec<BrauerRelation>, SiltingError> {
    let punctures: BTreeSet<PolygonId> = (0..d.polygons.len())
        .filter(|&p| d.polygon(p).flavor == Flavor::Puncture)
        .collect();
    let keys: BTreeSet<PolygonId> = spec.multiplicity.keys().copied().collect();
    if keys != punctures || spec.multiplicity.values().any(|&m| m == 0) {
        return Err(SiltingError::BrauerDomain);
    }
    let windows = windows_of(d);
    let ends = dual(d).dual_arcs;
    let mut out = Vec::new();
    for arc in 0..d.arc_count {
        let (occ_a, occ_b) = d.arc_occurrences(arc).expect("validated dissection");
        let word = |p: PolygonId, pos: usize| -> Option<Vec<usize>> {
            if d.polygon(p).flavor != Flavor::Puncture {
                return None;
            }
            let w = &windows[p];
            let m = w.sides.len();
            let turn: Vec<usize> = (0..m).map(|k| w.arrow_base + (pos + k) % m).collect();
            Some(turn.repeat(spec.multiplicity[&p] as usize))
        };
        let (lhs, rhs) = (word(ends[arc].0, occ_a.position), word(ends[arc].1, occ_b.position));
        if lhs.is_some() || rhs.is_some() {
            out.push(BrauerRelation { arc, lhs, rhs });
        }
    }
    Ok(out)
}

/// Arrow-name word of a path, for display.
pub fn path_word(q: &Quiver, p: &ShortPath) -> String {
    path_arrows(&q.windows, p)
        .iter()
        .map(|&a| arrow_name(a))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dissection::parse_dissection;
    use crate::fan::{invert_g, lamination_g};
    use crate::laminate::{compatible, elementary, g_vector, parse_generalized, parse_laminate};

    fn fixture(name: &str) -> Dissection {
        let text =
            std::fs::read_to_string(format!("../../fixtures/{name}.dsc")).expect("fixture file");
        parse_dissection(&text).expect("fixture parses")
    }

    fn word(ids: &[usize]) -> String {
        ids.iter().map(|&i| arrow_name(i)).collect()
    }

    #[test]
    fn arrow_names_roll_over() {
        assert_eq!(arrow_name(0), "a");
        assert_eq!(arrow_name(25), "z");
        assert_eq!(arrow_name(26), "aa");
        assert_eq!(arrow_name(27), "ab");
    }

    #[test]
    fn quiver_disk10p() {
        let d = fixture("disk10p");
        let q = quiver_of(&d);
        assert_eq!(q.arc_count, 5);
        let arrows: Vec<(String, usize, usize)> = q
            .arrows
            .iter()
            .enumerate()
            .map(|(i, a)| (arrow_name(i), a.source + 1, a.target + 1))
            .collect();
        let expect = [
            ("a", 1, 2),
            ("b", 2, 3),
            ("c", 3, 4),
            ("d", 4, 1),
            ("e", 5, 4),
            ("f", 4, 3),
        ];
        assert_eq!(
            arrows,
            expect
                .iter()
                .map(|&(n, s, t)| (n.to_string(), s, t))
                .collect::<Vec<_>>()
        );
        let rels: BTreeSet<String> = q
            .relations
            .iter()
            .map(|&(i, j)| format!("{}{}", arrow_name(i), arrow_name(j)))
            .collect();
        let want: BTreeSet<String> = ["cf", "fc", "ed"].iter().map(|s| s.to_string()).collect();
        assert_eq!(rels, want);
    }

    #[test]
    fn quiver_torus() {
        let d = fixture("torus");
        let q = quiver_of(&d);
        let sig: Vec<(usize, usize)> =
            q.arrows.iter().map(|a| (a.source + 1, a.target + 1)).collect();
        assert_eq!(sig, vec![(1, 2), (2, 1), (1, 2), (2, 1)]);
        let mut rels = q.relations.clone();
        rels.sort();
        assert_eq!(rels, vec![(0, 3), (1, 0), (2, 1), (3, 2)]);
    }

    #[test]
    fn quiver_trivial_disk() {
        let d = parse_dissection("dissection d2\narcs 1\npolygon P0 boundary 1A @\npolygon P1 boundary 1B @\n")
            .unwrap();
        let q = quiver_of(&d);
        assert_eq!((q.arc_count, q.arrows.len(), q.relations.len()), (1, 0, 0));
        assert!(special_cycles(&q).is_empty());
    }

    #[test]
    fn cycles_per_puncture() {
        let q = quiver_of(&fixture("torus"));
        let cs = special_cycles(&q);
        assert_eq!(cs.len(), 4);
        let words: BTreeSet<String> = cs.iter().map(|c| word(&c.arrows)).collect();
        let want: BTreeSet<String> =
            ["abcd", "bcda", "cdab", "dabc"].iter().map(|s| s.to_string()).collect();
        assert_eq!(words, want);
        assert_eq!(cs.iter().filter(|c| c.base_arc == 0).count(), 2);

        let q = quiver_of(&fixture("pdisk"));
        let cs = special_cycles(&q);
        assert_eq!(cs.len(), 3);
        assert!(cs.iter().all(|c| c.arrows.len() == 3));
        assert_eq!(
            cs.iter().map(|c| c.base_arc).collect::<BTreeSet<_>>(),
            (0..3).collect()
        );

        assert!(special_cycles(&quiver_of(&fixture("disk8"))).is_empty());
    }

    const GAMMA: &str =
        "P3:bd+>2B/R; P0:2A>3A/L; P1:3B>4B/R; P0:4A>3A/L; P1:3B>5A/R; P4:5B>bd+/L";
    const DELTA: &str = "P2:bd+>1B/R; P0:1A>3A/L; P1:3B>5A/R; P4:5B>bd+/L";
    const DELTA2: &str = "P3:bd+>2B/R; P0:2A>4A/L; P1:4B>5A/R; P4:5B>bd+/L";

    fn sp(polygon: usize, start: usize, len: usize) -> (ShortPath, u32) {
        (
            ShortPath {
                polygon,
                start,
                len,
            },
            0,
        )
    }

    #[test]
    fn self_crossing_curve_complex() {
        let d = fixture("disk10p");
        let gamma = parse_generalized(&d, GAMMA).expect("generalized curve");
        let t = string_complex(&d, &gamma).unwrap();
        let expect = StringComplex {
            arc_count: 5,
            entries: vec![(1, 0), (2, -1), (3, 0), (2, -1), (4, 0)],
            maps: vec![sp(0, 1, 1), sp(1, 1, 1), sp(0, 3, 3), sp(1, 0, 2)],
        }
        .canonical();
        assert_eq!(t, expect);
        let q = quiver_of(&d);
        let words: Vec<String> = t.maps.iter().map(|(p, _)| path_word(&q, p)).collect();
        let mut sorted = words.clone();
        sorted.sort();
        assert_eq!(sorted, vec!["b", "dab", "ef", "f"]);
        assert_eq!(complex_g(&t), g_vector(&d, &gamma));
        assert_eq!(complex_g(&t), vec![0, 1, -2, 1, 1]);

        assert!(singleton_single_maps(&d, &t, &t).unwrap().is_empty());
        assert!(!quasi_graph_reps(&d, &t, &t).unwrap().is_empty());
        assert!(!hom_vanishes(&d, &t, &t).unwrap());
        assert!(!is_presilting(&d, std::slice::from_ref(&t)).unwrap());
    }

    #[test]
    fn crossing_pair_single_map() {
        let d = fixture("disk10p");
        let delta = parse_laminate(&d, DELTA).unwrap();
        let delta2 = parse_laminate(&d, DELTA2).unwrap();
        assert!(!compatible(&d, &delta, &delta2));
        let t = string_complex(&d, &delta).unwrap();
        let t2 = string_complex(&d, &delta2).unwrap();
        assert_eq!(
            t,
            StringComplex {
                arc_count: 5,
                entries: vec![(0, 0), (2, -1), (4, 0)],
                maps: vec![sp(0, 0, 2), sp(1, 0, 2)],
            }
            .canonical()
        );
        let obs = singleton_single_maps(&d, &t, &t2).unwrap();
        match obs.as_slice() {
            [HomObstruction::SingletonSingle { form, path, .. }] => {
                assert_eq!(*form, 'd');
                assert_eq!(
                    *path,
                    ShortPath {
                        polygon: 0,
                        start: 1,
                        len: 1
                    }
                );
            }
            other => panic!("expected one shape-d obstruction, got {other:?}"),
        }
        assert!(singleton_single_maps(&d, &t2, &t).unwrap().is_empty());
        assert!(quasi_graph_reps(&d, &t2, &t).unwrap().is_empty());
        assert!(hom_vanishes(&d, &t2, &t).unwrap());
        assert!(!hom_vanishes(&d, &t, &t2).unwrap());
        // Each complex alone is fine; the pair is not.
        assert!(is_presilting(&d, std::slice::from_ref(&t)).unwrap());
        assert!(is_presilting(&d, std::slice::from_ref(&t2)).unwrap());
        assert!(!is_presilting(&d, &[t, t2]).unwrap());
    }

    #[test]
    fn stalks_of_dual_curves() {
        let d = fixture("disk10p");
        let mut plus = Vec::new();
        for arc in 0..d.arc_count {
            let tp = string_complex(&d, &elementary(&d, arc, true)).unwrap();
            assert_eq!(tp.entries, vec![(arc, 0)]);
            assert!(tp.maps.is_empty());
            let tm = string_complex(&d, &elementary(&d, arc, false)).unwrap();
            assert_eq!(tm.entries, vec![(arc, -1)]);
            let mut e = vec![0i64; d.arc_count];
            e[arc] = 1;
            assert_eq!(complex_g(&tp), e);
            e[arc] = -1;
            assert_eq!(complex_g(&tm), e);
            assert!(singleton_single_maps(&d, &tp, &tp).unwrap().is_empty());
            assert!(quasi_graph_reps(&d, &tp, &tp).unwrap().is_empty());
            plus.push(tp);
        }
        assert!(is_silting(&d, &plus).unwrap());
        assert!(!is_silting(&d, &plus[..4]).unwrap());
    }

    #[test]
    fn torus_family_silting_window() {
        let d = fixture("torus");
        let ts: Vec<StringComplex> = (-3..=3)
            .map(|i| {
                let x = invert_g(&d, &[i, 1 - i]);
                assert_eq!(lamination_g(&d, &x), vec![i, 1 - i]);
                let mut cs = lamination_complex(&d, &x).unwrap();
                assert_eq!(cs.len(), 1, "family members are single curves");
                cs.pop().unwrap()
            })
            .collect();
        for (ti, t) in ts.iter().enumerate() {
            let i = ti as i64 - 3;
            assert_eq!(complex_g(t), vec![i, 1 - i]);
            assert_eq!(t.entries.len(), (2 * i - 1).unsigned_abs().max(1) as usize);
            for (tj, t2) in ts.iter().enumerate() {
                let j = tj as i64 - 3;
                let ss = singleton_single_maps(&d, t, t2).unwrap();
                let qg = quasi_graph_reps(&d, t, t2).unwrap();
                let empty = ss.is_empty() && qg.is_empty();
                assert_eq!(
                    empty,
                    hom_vanishes(&d, t, t2).unwrap(),
                    "scan vs linear algebra at ({i},{j})"
                );
                let pair = [t.clone(), t2.clone()];
                assert_eq!(is_presilting(&d, &pair).unwrap(), (i - j).abs() <= 1);
                assert_eq!(
                    is_silting(&d, &pair).unwrap(),
                    i != j && (i - j).abs() <= 1
                );
            }
        }
        // A far pair is blocked by a bare identity between the two degrees.
        let qg = quasi_graph_reps(&d, &ts[5], &ts[3]).unwrap();
        assert!(qg
            .iter()
            .any(|o| matches!(o, HomObstruction::SharedArc { .. })));
    }

    #[test]
    fn non_reduced_laminations_are_rejected() {
        let d = fixture("torus");
        let x = invert_g(&d, &[2, -2]);
        assert!(x.has_closed());
        assert_eq!(
            lamination_complex(&d, &x).unwrap_err(),
            SiltingError::NotReduced
        );
        let loopy = parse_laminate(&d, "loop(P0:1A>2A/L; P0:2B>1B/R)").unwrap();
        assert_eq!(string_complex(&d, &loopy).unwrap_err(), SiltingError::Closed);
    }

    #[test]
    fn brauer_words() {
        let d = fixture("torus");
        let spec = BrauerSpec {
            multiplicity: [(0, 1)].into_iter().collect(),
        };
        let rels = brauer_relations(&d, &spec).unwrap();
        let view: Vec<(usize, String, String)> = rels
            .iter()
            .map(|r| {
                (
                    r.arc,
                    word(r.lhs.as_ref().unwrap()),
                    word(r.rhs.as_ref().unwrap()),
                )
            })
            .collect();
        assert_eq!(
            view,
            vec![
                (0, "abcd".to_string(), "cdab".to_string()),
                (1, "bcda".to_string(), "dabc".to_string()),
            ]
        );

        let d = fixture("pdisk");
        let spec = BrauerSpec {
            multiplicity: [(0, 2)].into_iter().collect(),
        };
        let rels = brauer_relations(&d, &spec).unwrap();
        assert_eq!(rels.len(), 3);
        for (arc, r) in rels.iter().enumerate() {
            assert_eq!(r.arc, arc);
            assert_eq!(r.lhs.as_ref().unwrap().len(), 6);
            assert!(r.rhs.is_none());
        }

        let d = fixture("disk8");
        assert!(brauer_relations(&d, &BrauerSpec::default()).unwrap().is_empty());
        let bad = BrauerSpec {
            multiplicity: [(0, 1)].into_iter().collect(),
        };
        assert_eq!(
            brauer_relations(&d, &bad).unwrap_err(),
            SiltingError::BrauerDomain
        );
    }

    #[test]
    fn geometric_oracle_matches_scan() {
        for name in ["disk8", "pdisk", "annulus"] {
            let d = fixture(&name);
            let mut lams = Vec::new();
            for arc in 0..d.arc_count {
                lams.push(elementary(&d, arc, true));
                lams.push(elementary(&d, arc, false));
            }
            for a in &lams {
                for b in &lams {
                    let ta = string_complex(&d, a).unwrap();
                    let tb = string_complex(&d, b).unwrap();
                    let ss = singleton_single_maps(&d, &ta, &tb).unwrap();
                    let qg = quasi_graph_reps(&d, &ta, &tb).unwrap();
                    let empty = ss.is_empty() && qg.is_empty();
                    assert_eq!(
                        empty,
                        hom_vanishes(&d, &ta, &tb).unwrap(),
                        "{name}: scan vs linear algebra"
                    );
                    assert_eq!(
                        crate::laminate::positive_position(&d, a, b),
                        empty,
                        "{name}: geometry vs algebra"
                    );
                }
            }
        }
    }
}
