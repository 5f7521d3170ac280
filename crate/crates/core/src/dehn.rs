//! Dehn twists along closed laminates, bridge curves that replace a
//! closed laminate by a non-closed one crossing it positively, and
//! density certificates: explicit twisted families whose cones approach
//! the ray of any integer vector.

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::dissection::{ArcId, Dissection};
use crate::fan::{invert_g, Lamination};
use crate::laminate::{
    along_key, build_laminate, compatible, crossings_with, elementary, g_vector,
    positive_position, End, Laminate, LaminateError, Marked, Segment,
};
use crate::ratmat::{rat, solve_square, Rat};

#[derive(Debug, Error)]
pub enum TwistError {
    #[error("twisting requires a closed curve to twist along")]
    LoopNotClosed,
    #[error("only non-closed curves can be twisted")]
    CurveClosed,
    #[error("curve is not in positive position for the twisting loop")]
    NotPositive,
    #[error("curves must be pairwise compatible")]
    Incompatible,
    #[error("bridge arc needs a positive loop g-vector entry")]
    BadBridgeArc,
    #[error("surgery produced an invalid curve: {0}")]
    Surgery(#[from] LaminateError),
}

/// Dehn twist along `l`, iterated `m` times, by curve surgery: every
/// crossing with `l` is replaced by a connector pair wrapping `m` copies
/// of `l`'s cyclic segment word.
pub fn twist(d: &Dissection, gamma: &Laminate, l: &Laminate, m: usize) -> Result<Laminate, TwistError> {
    if !l.is_closed() {
        return Err(TwistError::LoopNotClosed);
    }
    if gamma.is_closed() {
        return Err(TwistError::CurveClosed);
    }
    if !positive_position(d, gamma, l) {
        return Err(TwistError::NotPositive);
    }
    let cs = crossings_with(d, gamma, l);
    if m == 0 || cs.is_empty() {
        return Ok(gamma.clone());
    }
    let q = l.segments().len();
    let mut word: Vec<Segment> = Vec::new();
    for (i, s) in gamma.segments().iter().enumerate() {
        let mut here: Vec<usize> = cs.iter().filter(|c| c.ai == i).map(|c| c.bi).collect();
        if here.is_empty() {
            word.push(*s);
            continue;
        }
        here.sort_by_key(|&bi| along_key(d, gamma, i, l, bi));
        let mut cur_from = s.from;
        for b in here {
            let t = l.segments()[b];
            // The connector keeps `s`'s marked side (the inserted run has
            // even length, preserving alternation parity); that fixes the
            // travel direction around the loop.
            if s.marked == t.marked {
                word.push(Segment {
                    polygon: s.polygon,
                    from: cur_from,
                    to: t.to,
                    marked: s.marked,
                });
                for step in 1..m * q {
                    word.push(l.segments()[(b + step) % q]);
                }
                cur_from = t.from;
            } else {
                word.push(Segment {
                    polygon: s.polygon,
                    from: cur_from,
                    to: t.from,
                    marked: s.marked,
                });
                for step in 1..m * q {
                    word.push(l.segments()[(b + q - (step % q)) % q].reversed());
                }
                cur_from = t.to;
            }
        }
        word.push(Segment {
            polygon: s.polygon,
            from: cur_from,
            to: s.to,
            marked: s.marked,
        });
    }
    // A connector degenerates to an immediate backtrack when its splice
    // point sits on the same occurrence as the cut end.  Cancelling it
    // merges its neighbors, whose marked sides agree by alternation.
    let mut i = 0;
    while i < word.len() {
        let v = word[i];
        if v.from == v.to && matches!(v.from, End::Arc { .. }) {
            debug_assert!(i > 0 && i + 1 < word.len(), "backtrack has glued neighbors");
            let u = word[i - 1];
            let w = word[i + 1];
            debug_assert_eq!(u.marked, w.marked);
            word.splice(
                i - 1..=i + 1,
                [Segment {
                    polygon: u.polygon,
                    from: u.from,
                    to: w.to,
                    marked: u.marked,
                }],
            );
            i = i.saturating_sub(2);
        } else {
            i += 1;
        }
    }
    Ok(build_laminate(d, word, false)?)
}

/// Commuting multi-twist: each curve is twisted `exp` times along every
/// loop.  Loops must be pairwise compatible and every curve in positive
/// position for every loop.
pub fn multi_twist(
    d: &Dissection,
    curves: &[Laminate],
    loops: &[(Laminate, usize)],
) -> Result<Vec<Laminate>, TwistError> {
    for (i, (a, _)) in loops.iter().enumerate() {
        for (b, _) in &loops[i + 1..] {
            if !compatible(d, a, b) {
                return Err(TwistError::Incompatible);
            }
        }
    }
    for (i, a) in curves.iter().enumerate() {
        for b in &curves[i + 1..] {
            if !compatible(d, a, b) {
                return Err(TwistError::Incompatible);
            }
        }
    }
    curves
        .iter()
        .map(|c| {
            let mut cur = c.clone();
            for (l, m) in loops {
                cur = twist(d, &cur, l, *m)?;
            }
            Ok(cur)
        })
        .collect()
}

pub struct BridgeCurve {
    pub curve: Laminate,
    pub arc: ArcId,
    /// Index range (inclusive, exclusive) of the segments between the two
    /// splice points, containing the positive crossing of `arc`.
    pub center: (usize, usize),
}

/// Sign of the crossing at the chosen end of segment `bi`, or None at a
/// free end.
fn end_sign(x: &Laminate, bi: usize, to_end: bool) -> Option<i64> {
    let last = x.segments().len() - 1;
    let marked = if to_end {
        if bi == last && !x.is_closed() {
            return None;
        }
        x.segments()[bi].marked
    } else {
        if bi == 0 && !x.is_closed() {
            return None;
        }
        x.segments()[(bi + x.segments().len() - 1) % x.segments().len()].marked
    };
    Some(if marked == Marked::Right { 1 } else { -1 })
}

/// The non-closed curve crossing `l` positively at `arc`, compatible with
/// every `ambient` member: each half runs from the crossing of `arc`
/// outward along the matching one-crossing curve, rerouted onto the
/// nearest ambient strand toward that strand's negative-crossing end.
pub fn bridge(
    d: &Dissection,
    l: &Laminate,
    arc: ArcId,
    ambient: &[Laminate],
) -> Result<BridgeCurve, TwistError> {
    if !l.is_closed() || g_vector(d, l)[arc] <= 0 {
        return Err(TwistError::BadBridgeArc);
    }
    for (i, a) in ambient.iter().enumerate() {
        if a.is_closed() || !compatible(d, a, l) {
            return Err(TwistError::Incompatible);
        }
        for b in &ambient[i + 1..] {
            if !compatible(d, a, b) {
                return Err(TwistError::Incompatible);
            }
        }
    }
    // Base curve: the one-crossing laminate at `arc` that sits in positive
    // position for `l`; the mirror is used when the first choice fails.
    let mut base = elementary(d, arc, true);
    if !positive_position(d, &base, l) {
        base = elementary(d, arc, false);
    }
    if !positive_position(d, &base, l) || crossings_with(d, &base, l).is_empty() {
        return Err(TwistError::NotPositive);
    }
    assert_eq!(base.segments().len(), 2);

    // Half `h` keeps the part of base segment `h` next to the `arc`
    // crossing; the far part is rerouted onto the nearest crossing
    // ambient strand when one exists.
    let half = |h: usize| -> Vec<Segment> {
        let s = base.segments()[h];
        // Nearest ambient crossing to the arc end of `s` (its to-end for
        // h=0, from-end for h=1).
        let mut best: Option<(usize, usize, i64)> = None;
        for (xi, x) in ambient.iter().enumerate() {
            for c in crossings_with(d, &base, x) {
                if c.ai != h {
                    continue;
                }
                let key = along_key(d, &base, h, x, c.bi);
                let key = if h == 0 { -key } else { key };
                if best.map_or(true, |(_, _, bk)| key < bk) {
                    best = Some((xi, c.bi, key));
                }
            }
        }
        let Some((xi, bt, _)) = best else {
            return vec![s];
        };
        let x = &ambient[xi];
        let t = x.segments()[bt];
        // Reroute toward the end of `t` whose crossing is negative (the
        // free end when only the other one crosses an arc).
        let toward_to = match (end_sign(x, bt, false), end_sign(x, bt, true)) {
            (Some(-1), _) => false,
            (_, Some(-1)) => true,
            (None, _) => false,
            (_, None) => true,
            _ => unreachable!("interior crossing signs alternate"),
        };
        // Words oriented so the half ends at the `arc` crossing.
        let mut w: Vec<Segment> = Vec::new();
        let hybrid_to = s.to; // arc end for h=0
        let hybrid_from = s.from; // arc end for h=1
        if h == 0 {
            if toward_to {
                for j in (bt + 1..x.segments().len()).rev() {
                    w.push(x.segments()[j].reversed());
                }
                w.push(Segment {
                    polygon: s.polygon,
                    from: t.to,
                    to: hybrid_to,
                    marked: t.marked.flip(),
                });
            } else {
                w.extend_from_slice(&x.segments()[..bt]);
                w.push(Segment {
                    polygon: s.polygon,
                    from: t.from,
                    to: hybrid_to,
                    marked: t.marked,
                });
            }
        } else if toward_to {
            w.push(Segment {
                polygon: s.polygon,
                from: hybrid_from,
                to: t.to,
                marked: t.marked,
            });
            w.extend_from_slice(&x.segments()[bt + 1..]);
        } else {
            w.push(Segment {
                polygon: s.polygon,
                from: hybrid_from,
                to: t.from,
                marked: t.marked.flip(),
            });
            for j in (0..bt).rev() {
                w.push(x.segments()[j].reversed());
            }
        }
        w
    };
    let first = half(0);
    let center_lo = first.len() - 1;
    let mut word = first;
    word.extend(half(1));
    let n = word.len();
    let curve = build_laminate(d, word.clone(), false)?;
    let center = if curve.segments() == &word[..] {
        (center_lo, center_lo + 2)
    } else {
        (n - center_lo - 2, n - center_lo)
    };
    Ok(BridgeCurve { curve, arc, center })
}

/// Squared L2 distance from `point` to the cone spanned by `gens`,
/// minimized exactly over active sets.
pub fn dist_sq_to_cone(point: &[Rat], gens: &[Vec<i64>]) -> Rat {
    let n = point.len();
    let norm_sq = |v: &[Rat]| -> Rat {
        v.iter().map(|x| x.clone() * x.clone()).fold(Rat::zero(), |a, b| a + b)
    };
    let mut best = norm_sq(point);
    for mask in 1u32..(1 << gens.len()) {
        let sel: Vec<&Vec<i64>> = (0..gens.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| &gens[i])
            .collect();
        let k = sel.len();
        let gram: Vec<Vec<Rat>> = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| (0..n).map(|t| rat(sel[i][t]) * rat(sel[j][t])).fold(Rat::zero(), |a, b| a + b))
                    .collect()
            })
            .collect();
        let rhs: Vec<Rat> = (0..k)
            .map(|i| (0..n).map(|t| rat(sel[i][t]) * point[t].clone()).fold(Rat::zero(), |a, b| a + b))
            .collect();
        let Some(c) = solve_square(&gram, &rhs) else {
            continue;
        };
        if c.iter().any(|x| x.is_negative()) {
            continue;
        }
        let residual: Vec<Rat> = (0..n)
            .map(|t| {
                let mut acc = point[t].clone();
                for i in 0..k {
                    acc -= c[i].clone() * rat(sel[i][t]);
                }
                acc
            })
            .collect();
        let r = norm_sq(&residual);
        if r < best {
            best = r;
        }
    }
    best
}

pub struct DensityStep {
    pub m: usize,
    pub members: Vec<Laminate>,
    pub gvectors: Vec<Vec<i64>>,
    /// Squared L2 distance from target/|target|_1 to the step's cone.
    pub ray_distance: Rat,
}

pub struct DensityCertificate {
    pub target: Vec<i64>,
    pub non_closed: Vec<Laminate>,
    pub closed: Vec<(Laminate, usize)>,
    pub bridges: Vec<BridgeCurve>,
    /// Per closed-part copy: crossings with the bridge family (n_j) and
    /// the twist exponent N/n_j.
    pub loop_data: Vec<(Laminate, i64, usize)>,
    pub big_n: i64,
    pub steps: Vec<DensityStep>,
}

/// Certificate that the ray of `g` is approached by cones of laminations
/// without closed members: the closed part is traded for bridge curves
/// and the multi-twist pushes their cone toward the target ray.
pub fn density_sequence(d: &Dissection, g: &[i64], steps: usize) -> DensityCertificate {
    assert!(steps >= 1);
    let x: Lamination = invert_g(d, g);
    let mut non_closed = Vec::new();
    let mut closed = Vec::new();
    for (lam, mult) in &x.members {
        if lam.is_closed() {
            closed.push((lam.clone(), *mult));
        } else {
            for _ in 0..*mult {
                non_closed.push(lam.clone());
            }
        }
    }
    let l1: Rat = g.iter().map(|&v| rat(v.abs())).fold(Rat::zero(), |a, b| a + b);
    let point: Vec<Rat> = if l1.is_zero() {
        g.iter().map(|_| Rat::zero()).collect()
    } else {
        g.iter().map(|&v| rat(v) / l1.clone()).collect()
    };
    if closed.is_empty() {
        let gv: Vec<Vec<i64>> = non_closed.iter().map(|m| g_vector(d, m)).collect();
        let dist = dist_sq_to_cone(&point, &gv);
        let steps = (0..=steps)
            .map(|m| DensityStep {
                m,
                members: non_closed.clone(),
                gvectors: gv.clone(),
                ray_distance: dist.clone(),
            })
            .collect();
        return DensityCertificate {
            target: g.to_vec(),
            non_closed,
            closed,
            bridges: Vec::new(),
            loop_data: Vec::new(),
            big_n: 1,
            steps,
        };
    }
    // Bridge loop: bridge a remaining loop against everything built so
    // far until every loop meets some bridge.
    let mut bridges: Vec<BridgeCurve> = Vec::new();
    loop {
        let next = closed.iter().find(|(l, _)| {
            bridges.iter().all(|b| crossings_with(d, l, &b.curve).is_empty())
        });
        let Some((l, _)) = next else { break };
        let arc = g_vector(d, l)
            .iter()
            .position(|&v| v > 0)
            .expect("closed laminates have a positive g entry");
        let mut ambient = non_closed.clone();
        ambient.extend(bridges.iter().map(|b| b.curve.clone()));
        let b = bridge(d, l, arc, &ambient).expect("bridge construction is total here");
        bridges.push(b);
    }
    // One loop entry per closed copy; n_j = crossings with all bridges.
    let mut loop_data: Vec<(Laminate, i64, usize)> = Vec::new();
    for (l, mult) in &closed {
        let nj: i64 = bridges
            .iter()
            .map(|b| crossings_with(d, &b.curve, l).len() as i64)
            .sum();
        assert!(nj > 0);
        for _ in 0..*mult {
            loop_data.push((l.clone(), nj, 0));
        }
    }
    let big_n: i64 = loop_data.iter().map(|(_, nj, _)| *nj).product();
    for (_, nj, exp) in &mut loop_data {
        *exp = (big_n / *nj) as usize;
    }
    // Aggregate exponents per distinct loop for the actual twisting.
    let mut distinct: Vec<(Laminate, usize)> = Vec::new();
    for (l, _, exp) in &loop_data {
        match distinct.iter_mut().find(|(dl, _)| dl == l) {
            Some((_, e)) => *e += exp,
            None => distinct.push((l.clone(), *exp)),
        }
    }
    let bridge_curves: Vec<Laminate> = bridges.iter().map(|b| b.curve.clone()).collect();
    let mut out_steps = Vec::new();
    for m in 0..=steps {
        let loops: Vec<(Laminate, usize)> =
            distinct.iter().map(|(l, e)| (l.clone(), e * m)).collect();
        let twisted =
            multi_twist(d, &bridge_curves, &loops).expect("twisting bridges stays valid");
        let mut members = non_closed.clone();
        members.extend(twisted);
        let gv: Vec<Vec<i64>> = members.iter().map(|mem| g_vector(d, mem)).collect();
        let mut gens = gv.clone();
        gens.sort();
        gens.dedup();
        out_steps.push(DensityStep {
            m,
            ray_distance: dist_sq_to_cone(&point, &gens),
            members,
            gvectors: gv,
        });
    }
    DensityCertificate {
        target: g.to_vec(),
        non_closed,
        closed,
        bridges,
        loop_data,
        big_n,
        steps: out_steps,
    }
}
