//! Polygon-complex presentation of a dissected marked surface.
//!
//! A surface is never embedded; it exists as a collection of polygons whose
//! arc sides are glued in pairs with reversed orientation.  Edge lists are
//! counterclockwise, which fixes the orientation convention for the whole
//! crate: "left" and "right" downstream always refer to this rotation system.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

pub type ArcId = usize;
pub type PolygonId = usize;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum ArcSide {
    A,
    B,
}

impl ArcSide {
    pub fn other(self) -> ArcSide {
        match self {
            ArcSide::A => ArcSide::B,
            ArcSide::B => ArcSide::A,
        }
    }
}

impl fmt::Display for ArcSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ArcSide::A => "A",
            ArcSide::B => "B",
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum PolygonEdge {
    Arc { arc: ArcId, side: ArcSide },
    Boundary,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Flavor {
    Puncture,
    Boundary,
}

#[derive(Clone, Debug)]
pub struct Polygon {
    pub name: String,
    pub flavor: Flavor,
    /// Counterclockwise cyclic edge list; Boundary flavor has exactly one
    /// `PolygonEdge::Boundary` entry, Puncture flavor has none.
    pub edges: Vec<PolygonEdge>,
}

impl Polygon {
    pub fn arc_side_count(&self) -> usize {
        self.edges
            .iter()
            .filter(|e| matches!(e, PolygonEdge::Arc { .. }))
            .count()
    }

    pub fn boundary_pos(&self) -> Option<usize> {
        self.edges.iter().position(|e| matches!(e, PolygonEdge::Boundary))
    }
}

/// One of the two sides of an arc: a position in a polygon's edge list.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Occurrence {
    pub polygon: PolygonId,
    pub position: usize,
}

#[derive(Clone, Debug)]
pub struct Dissection {
    pub name: String,
    pub arc_count: usize,
    pub polygons: Vec<Polygon>,
    /// occ[arc] = (side-A occurrence, side-B occurrence).
    occ: Vec<(Occurrence, Occurrence)>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct SurfaceInvariants {
    pub genus: usize,
    pub boundary_components: usize,
    pub circ_punctures: usize,
    pub bullet_punctures: usize,
    pub circ_marked: usize,
    pub bullet_marked: usize,
    pub euler_characteristic: i64,
}

/// For each arc `d`, the ordered pair of polygons adjacent to it: the dual
/// curve of `d` runs from the circle-point of the side-A polygon to the
/// circle-point of the side-B polygon.
#[derive(Clone, Debug)]
pub struct DualDissection {
    pub dual_arcs: Vec<(PolygonId, PolygonId)>,
}

#[derive(Error, Debug, PartialEq, Eq)]
pub enum DissectionError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("arc {0} must appear exactly once per side (A and B)")]
    ArcSides(String),
    #[error("polygon {0} has more than one boundary segment")]
    ExtraBoundary(String),
    #[error("polygon {0} has no arc sides")]
    EmptyPolygon(String),
    #[error("surface is not connected")]
    Disconnected,
    #[error("boundary structure is pinched at a corner point")]
    PinchedBoundary,
    #[error("euler characteristic {chi} and boundary count {b} give no genus")]
    BadGenus { chi: i64, b: usize },
    #[error("arc count {n} differs from |M_circ| + p_bullet + b + 2g - 2 = {expected}")]
    ArcCountMismatch { n: usize, expected: i64 },
    #[error("unknown arc id {0}")]
    UnknownArc(usize),
}

impl Dissection {
    /// Both sides of an arc, side A first.
    pub fn arc_occurrences(&self, arc: ArcId) -> Result<(Occurrence, Occurrence), DissectionError> {
        self.occ
            .get(arc)
            .copied()
            .ok_or(DissectionError::UnknownArc(arc))
    }

    /// Deterministic adjacency: the two glued sides sorted by polygon, then
    /// position.
    pub fn adjacency(&self, arc: ArcId) -> Result<(Occurrence, Occurrence), DissectionError> {
        let (a, b) = self.arc_occurrences(arc)?;
        Ok(if a <= b { (a, b) } else { (b, a) })
    }

    pub fn edge_at(&self, o: Occurrence) -> PolygonEdge {
        self.polygons[o.polygon].edges[o.position]
    }

    /// The occurrence glued to `o` (the other side of the same arc).
    pub fn glued(&self, o: Occurrence) -> Occurrence {
        match self.edge_at(o) {
            PolygonEdge::Arc { arc, side } => {
                let (a, b) = self.occ[arc];
                match side {
                    ArcSide::A => b,
                    ArcSide::B => a,
                }
            }
            PolygonEdge::Boundary => panic!("boundary segments are not glued"),
        }
    }

    pub fn arc_at(&self, o: Occurrence) -> ArcId {
        match self.edge_at(o) {
            PolygonEdge::Arc { arc, .. } => arc,
            PolygonEdge::Boundary => panic!("boundary segment has no arc"),
        }
    }

    pub fn polygon(&self, p: PolygonId) -> &Polygon {
        &self.polygons[p]
    }

    pub fn polygon_named(&self, name: &str) -> Option<PolygonId> {
        self.polygons.iter().position(|p| p.name == name)
    }
}

/// Parse the line-oriented dissection file format.  Gluing is computed; the
/// surface axioms are checked separately by [`validate`].
pub fn parse_dissection(text: &str) -> Result<Dissection, DissectionError> {
    let syntax = |line: usize, msg: String| DissectionError::Syntax { line, msg };
    let mut name = None;
    let mut arc_count = None;
    let mut polygons: Vec<Polygon> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let head = tokens.next().unwrap();
        match head {
            "dissection" => {
                let n = tokens
                    .next()
                    .ok_or_else(|| syntax(line_no, "missing dissection name".into()))?;
                name = Some(n.to_string());
            }
            "arcs" => {
                let n = tokens
                    .next()
                    .ok_or_else(|| syntax(line_no, "missing arc count".into()))?;
                arc_count = Some(
                    n.parse::<usize>()
                        .map_err(|_| syntax(line_no, format!("bad arc count `{n}`")))?,
                );
            }
            "polygon" => {
                let pname = tokens
                    .next()
                    .ok_or_else(|| syntax(line_no, "missing polygon name".into()))?
                    .to_string();
                let flavor = match tokens.next() {
                    Some("puncture") => Flavor::Puncture,
                    Some("boundary") => Flavor::Boundary,
                    other => {
                        return Err(syntax(
                            line_no,
                            format!("expected puncture|boundary, got {other:?}"),
                        ))
                    }
                };
                let mut edges = Vec::new();
                for tok in tokens {
                    if tok == "@" {
                        if edges.iter().any(|e| matches!(e, PolygonEdge::Boundary)) {
                            return Err(DissectionError::ExtraBoundary(pname));
                        }
                        edges.push(PolygonEdge::Boundary);
                        continue;
                    }
                    let (num, side) = tok.split_at(tok.len() - 1);
                    let side = match side {
                        "A" => ArcSide::A,
                        "B" => ArcSide::B,
                        _ => return Err(syntax(line_no, format!("bad edge token `{tok}`"))),
                    };
                    let id: usize = num
                        .parse()
                        .map_err(|_| syntax(line_no, format!("bad edge token `{tok}`")))?;
                    if id == 0 {
                        return Err(syntax(line_no, format!("arc ids are 1-based: `{tok}`")));
                    }
                    edges.push(PolygonEdge::Arc { arc: id - 1, side });
                }
                let has_bd = edges.iter().any(|e| matches!(e, PolygonEdge::Boundary));
                match (flavor, has_bd) {
                    (Flavor::Boundary, false) => {
                        return Err(syntax(line_no, format!("boundary polygon {pname} needs an @")))
                    }
                    (Flavor::Puncture, true) => {
                        return Err(syntax(
                            line_no,
                            format!("puncture polygon {pname} cannot contain @"),
                        ))
                    }
                    _ => {}
                }
                if !edges.iter().any(|e| matches!(e, PolygonEdge::Arc { .. })) {
                    return Err(DissectionError::EmptyPolygon(pname));
                }
                polygons.push(Polygon {
                    name: pname,
                    flavor,
                    edges,
                });
            }
            other => return Err(syntax(line_no, format!("unknown directive `{other}`"))),
        }
    }

    let name = name.ok_or_else(|| syntax(0, "missing `dissection` line".into()))?;
    let arc_count = arc_count.ok_or_else(|| syntax(0, "missing `arcs` line".into()))?;

    // Pair up the two sides of every arc.
    let mut seen: BTreeMap<(ArcId, ArcSide), Occurrence> = BTreeMap::new();
    for (pi, poly) in polygons.iter().enumerate() {
        for (ei, edge) in poly.edges.iter().enumerate() {
            if let PolygonEdge::Arc { arc, side } = *edge {
                let occ = Occurrence {
                    polygon: pi,
                    position: ei,
                };
                if seen.insert((arc, side), occ).is_some() {
                    return Err(DissectionError::ArcSides(format!("{}{}", arc + 1, side)));
                }
            }
        }
    }
    let mut occ = Vec::with_capacity(arc_count);
    for arc in 0..arc_count {
        let a = seen
            .remove(&(arc, ArcSide::A))
            .ok_or_else(|| DissectionError::ArcSides(format!("{}A", arc + 1)))?;
        let b = seen
            .remove(&(arc, ArcSide::B))
            .ok_or_else(|| DissectionError::ArcSides(format!("{}B", arc + 1)))?;
        occ.push((a, b));
    }
    if let Some(((arc, side), _)) = seen.into_iter().next() {
        return Err(DissectionError::ArcSides(format!("{}{}", arc + 1, side)));
    }

    Ok(Dissection {
        name,
        arc_count,
        polygons,
        occ,
    })
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }
    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let r = self.find(self.parent[x]);
            self.parent[x] = r;
        }
        self.parent[x]
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

/// Derive the surface invariants from the rotation system and check the
/// shape laws: every bullet point is a corner orbit, the boundary closes up
/// into circles, and the arc count matches the invariant formula.
pub fn validate(d: &Dissection) -> Result<SurfaceInvariants, DissectionError> {
    // Connectivity over polygons through shared arcs.
    if d.polygons.is_empty() {
        return Err(DissectionError::Disconnected);
    }
    let mut comp = UnionFind::new(d.polygons.len());
    for &(a, b) in &d.occ {
        comp.union(a.polygon, b.polygon);
    }
    let root = comp.find(0);
    for p in 0..d.polygons.len() {
        if comp.find(p) != root {
            return Err(DissectionError::Disconnected);
        }
    }

    // Corner orbits.  Corner (p, i) sits at the start of edge i in the ccw
    // traversal of polygon p.  Gluing an arc's two sides with reversed
    // orientation identifies start corners with end corners crosswise.
    let poly_len: Vec<usize> = d.polygons.iter().map(|p| p.edges.len()).collect();
    let corner_base: Vec<usize> = poly_len
        .iter()
        .scan(0, |acc, len| {
            let base = *acc;
            *acc += len;
            Some(base)
        })
        .collect();
    let corner_id =
        |o: Occurrence| -> usize { corner_base[o.polygon] + o.position % poly_len[o.polygon] };
    let corner_after = |o: Occurrence| -> usize {
        corner_base[o.polygon] + (o.position + 1) % poly_len[o.polygon]
    };
    let total_corners: usize = poly_len.iter().sum();
    let mut uf = UnionFind::new(total_corners);
    for &(a, b) in &d.occ {
        uf.union(corner_after(a), corner_id(b));
        uf.union(corner_id(a), corner_after(b));
    }

    // Boundary darts: for each boundary segment, its start and end corners.
    let mut bd_start: BTreeMap<usize, Vec<Occurrence>> = BTreeMap::new();
    let mut bd_end: BTreeMap<usize, Vec<Occurrence>> = BTreeMap::new();
    let mut bd_edges: Vec<Occurrence> = Vec::new();
    for (pi, poly) in d.polygons.iter().enumerate() {
        if let Some(pos) = poly.boundary_pos() {
            let o = Occurrence {
                polygon: pi,
                position: pos,
            };
            bd_edges.push(o);
            bd_start.entry(uf.find(corner_id(o))).or_default().push(o);
            bd_end.entry(uf.find(corner_after(o))).or_default().push(o);
        }
    }
    for v in bd_start.values().chain(bd_end.values()) {
        if v.len() > 1 {
            return Err(DissectionError::PinchedBoundary);
        }
    }
    if bd_start.len() != bd_end.len() {
        return Err(DissectionError::PinchedBoundary);
    }

    // Follow boundary cycles: end corner of one segment is the start corner
    // class of the next.
    let mut visited: Vec<bool> = vec![false; bd_edges.len()];
    let mut cycles = 0usize;
    for i in 0..bd_edges.len() {
        if visited[i] {
            continue;
        }
        cycles += 1;
        let mut cur = bd_edges[i];
        loop {
            let idx = bd_edges.iter().position(|&o| o == cur).unwrap();
            if visited[idx] {
                break;
            }
            visited[idx] = true;
            let cls = uf.find(corner_after(cur));
            let next = bd_start
                .get(&cls)
                .and_then(|v| v.first())
                .copied()
                .ok_or(DissectionError::PinchedBoundary)?;
            cur = next;
        }
    }

    // Count corner classes; the ones never touching a boundary segment are
    // interior bullet punctures.
    let mut classes: BTreeMap<usize, bool> = BTreeMap::new();
    for c in 0..total_corners {
        classes.entry(uf.find(c)).or_insert(false);
    }
    for cls in bd_start.keys().chain(bd_end.keys()) {
        if let Some(f) = classes.get_mut(cls) {
            *f = true;
        }
    }
    let vertex_count = classes.len();
    let bullet_punctures = classes.values().filter(|&&on_bd| !on_bd).count();

    let b = cycles;
    let edges = d.arc_count + bd_edges.len();
    let faces = d.polygons.len();
    let chi = vertex_count as i64 - edges as i64 + faces as i64;
    let two_g = 2 - chi - b as i64;
    if two_g < 0 || two_g % 2 != 0 {
        return Err(DissectionError::BadGenus { chi, b });
    }
    let genus = (two_g / 2) as usize;

    let circ_marked = faces;
    let circ_punctures = d
        .polygons
        .iter()
        .filter(|p| p.flavor == Flavor::Puncture)
        .count();
    let expected = circ_marked as i64 + bullet_punctures as i64 + b as i64 + 2 * genus as i64 - 2;
    if d.arc_count as i64 != expected {
        return Err(DissectionError::ArcCountMismatch {
            n: d.arc_count,
            expected,
        });
    }

    Ok(SurfaceInvariants {
        genus,
        boundary_components: b,
        circ_punctures,
        bullet_punctures,
        circ_marked,
        bullet_marked: vertex_count,
        euler_characteristic: chi,
    })
}

/// The dual curve of each arc, as the ordered pair (side-A polygon,
/// side-B polygon).
pub fn dual(d: &Dissection) -> DualDissection {
    DualDissection {
        dual_arcs: d.occ.iter().map(|&(a, b)| (a.polygon, b.polygon)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE_ARC_DISK: &str = "dissection mono\narcs 1\npolygon P0 boundary 1A @\npolygon P1 boundary 1B @\n";

    fn fixture(name: &str) -> Dissection {
        let text = std::fs::read_to_string(format!("../../fixtures/{name}.dsc")).unwrap();
        parse_dissection(&text).unwrap()
    }

    #[test]
    fn one_arc_disk() {
        let d = parse_dissection(ONE_ARC_DISK).unwrap();
        assert_eq!(d.arc_count, 1);
        let inv = validate(&d).unwrap();
        assert_eq!(inv.genus, 0);
        assert_eq!(inv.boundary_components, 1);
        assert_eq!(inv.circ_punctures, 0);
        assert_eq!(inv.bullet_punctures, 0);
        assert_eq!(inv.circ_marked, 2);
        assert_eq!(inv.bullet_marked, 2);
        let du = dual(&d);
        assert_eq!(du.dual_arcs, vec![(0, 1)]);
        assert_eq!(
            d.adjacency(0).unwrap(),
            (
                Occurrence { polygon: 0, position: 0 },
                Occurrence { polygon: 1, position: 0 }
            )
        );
    }

    #[test]
    fn disk8_invariants() {
        let d = fixture("disk8");
        let inv = validate(&d).unwrap();
        assert_eq!(inv.genus, 0);
        assert_eq!(inv.boundary_components, 1);
        assert_eq!(inv.circ_punctures, 0);
        assert_eq!(inv.bullet_punctures, 0);
        assert_eq!(inv.circ_marked, 4);
        assert_eq!(inv.bullet_marked, 4);
        assert_eq!(inv.euler_characteristic, 1);
        // Arc 2 separates the central polygon from its lune.
        assert_eq!(dual(&d).dual_arcs[1], (0, 2));
    }

    #[test]
    fn pdisk_invariants() {
        let d = fixture("pdisk");
        let inv = validate(&d).unwrap();
        assert_eq!(inv.genus, 0);
        assert_eq!(inv.boundary_components, 1);
        assert_eq!(inv.circ_punctures, 1);
        assert_eq!(inv.bullet_punctures, 0);
        assert_eq!(inv.circ_marked, 4);
        assert_eq!(inv.bullet_marked, 3);
    }

    #[test]
    fn torus_invariants() {
        let d = fixture("torus");
        let inv = validate(&d).unwrap();
        assert_eq!(inv.genus, 1);
        assert_eq!(inv.boundary_components, 0);
        assert_eq!(inv.circ_punctures, 1);
        assert_eq!(inv.bullet_punctures, 1);
        assert_eq!(inv.circ_marked, 1);
        assert_eq!(inv.bullet_marked, 1);
        assert_eq!(inv.euler_characteristic, 0);
        // Both dual arcs are loops at the unique circle point.
        assert_eq!(dual(&d).dual_arcs, vec![(0, 0), (0, 0)]);
        assert_eq!(
            d.adjacency(0).unwrap(),
            (
                Occurrence { polygon: 0, position: 0 },
                Occurrence { polygon: 0, position: 2 }
            )
        );
    }

    #[test]
    fn disk10p_invariants() {
        let d = fixture("disk10p");
        let inv = validate(&d).unwrap();
        assert_eq!(inv.genus, 0);
        assert_eq!(inv.boundary_components, 1);
        assert_eq!(inv.circ_punctures, 1);
        assert_eq!(inv.bullet_punctures, 1);
        assert_eq!(inv.circ_marked, 5);
        assert_eq!(inv.bullet_marked, 5);
    }

    #[test]
    fn dual_matches_adjacency() {
        for name in ["disk8", "pdisk", "torus", "disk10p"] {
            let d = fixture(name);
            validate(&d).unwrap();
            let du = dual(&d);
            for arc in 0..d.arc_count {
                let (u, v) = du.dual_arcs[arc];
                let (a, b) = d.adjacency(arc).unwrap();
                let mut want = [u, v];
                let mut got = [a.polygon, b.polygon];
                want.sort();
                got.sort();
                assert_eq!(want, got);
            }
        }
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_dissection("dissection x\narcs 1\npolygon P0 boundary 1A 1A @\n"),
            Err(DissectionError::ArcSides(_))
        ));
        assert!(matches!(
            parse_dissection("dissection x\narcs 1\npolygon P0 boundary 1A @\npolygon P1 boundary 1B @ @\n"),
            Err(DissectionError::ExtraBoundary(_))
        ));
        assert!(matches!(
            parse_dissection("dissection x\narcs 0\npolygon P0 boundary @\n"),
            Err(DissectionError::EmptyPolygon(_))
        ));
    }

    #[test]
    fn disconnected_rejected() {
        let text = "dissection x\narcs 2\npolygon P0 boundary 1A @\npolygon P1 boundary 1B @\npolygon P2 boundary 2A @\npolygon P3 boundary 2B @\n";
        let d = parse_dissection(text).unwrap();
        assert_eq!(validate(&d), Err(DissectionError::Disconnected));
    }
}
