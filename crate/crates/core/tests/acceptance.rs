//! End-to-end checks, one per criterion, each printing a single
//! `criterion N (...): pass` line on success.  Tolerances and time limits
//! are pinned in the constants below.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use gentlefan::dissection::{parse_dissection, validate, Dissection, Flavor};
use gentlefan::fan::{
    cones_meet_in_face, coverage, enumerate_fan, invert_g, invert_g_cached, lamination_g,
    model_laminates, Cone, Fan, ModelCache, ModelSignature,
};
use gentlefan::laminate::{
    compatible, g_vector, parse_generalized, parse_laminate, positive_position, Laminate,
};
use gentlefan::dehn::{density_sequence, twist};
use gentlefan::ratmat::{rat, Rat};
use gentlefan::silting::{
    brauer_relations, is_presilting, is_silting, lamination_complex, path_word, quasi_graph_reps,
    quiver_of, singleton_single_maps, string_complex, BrauerSpec, HomObstruction, StringComplex,
};

const FAN_TIME: Duration = Duration::from_secs(5);
const ROUND_TRIP_TIME: Duration = Duration::from_secs(60);
const DENSITY_TIME: Duration = Duration::from_secs(10);
/// Squared-distance target for the density certificate at the last step.
fn density_tol() -> Rat {
    rat(1) / rat(100)
}

fn fixture(name: &str) -> Dissection {
    let text =
        std::fs::read_to_string(format!("../../fixtures/{name}.dsc")).expect("fixture file");
    let d = parse_dissection(&text).expect("fixture parses");
    validate(&d).expect("fixture is a surface dissection");
    d
}

fn ray_set(fan: &Fan) -> BTreeSet<Vec<i64>> {
    fan.rays.iter().map(|(_, g)| g.clone()).collect()
}

fn vecs(rows: &[[i64; 3]]) -> BTreeSet<Vec<i64>> {
    rows.iter().map(|r| r.to_vec()).collect()
}

#[test]
fn criterion_01_disk_fan() {
    let d = fixture("disk8");
    let start = Instant::now();
    let fan = enumerate_fan(&d, 3);
    assert!(start.elapsed() < FAN_TIME);
    let want = vecs(&[
        [1, 0, 0],
        [-1, 0, 0],
        [0, 1, 0],
        [0, -1, 0],
        [0, 0, 1],
        [0, 0, -1],
        [1, -1, 0],
        [0, 1, -1],
        [1, 0, -1],
    ]);
    assert_eq!(ray_set(&fan), want);
    assert_eq!(fan.maximal_cones.len(), 14);
    println!("criterion 1 (disk fan: 9 rays, 14 maximal cones): pass");
}

#[test]
fn criterion_02_punctured_disk_fan() {
    let d = fixture("pdisk");
    let start = Instant::now();
    let fan = enumerate_fan(&d, 3);
    assert!(start.elapsed() < FAN_TIME);
    let want = vecs(&[
        [1, 0, 0],
        [-1, 0, 0],
        [0, 1, 0],
        [0, -1, 0],
        [0, 0, 1],
        [0, 0, -1],
        [1, -1, 0],
        [-1, 1, 0],
        [0, 1, -1],
        [0, -1, 1],
        [1, 0, -1],
        [-1, 0, 1],
    ]);
    assert_eq!(ray_set(&fan), want);
    assert_eq!(fan.maximal_cones.len(), 20);
    println!("criterion 2 (punctured disk fan: 12 rays, 20 maximal cones): pass");
}

#[test]
fn criterion_03_model_counts() {
    for m in 1..=6usize {
        let boundary = model_laminates(ModelSignature {
            m,
            flavor: Flavor::Boundary,
        });
        assert_eq!(boundary.laminates.len(), m * (m + 3) / 2, "boundary m={m}");
        let puncture = model_laminates(ModelSignature {
            m,
            flavor: Flavor::Puncture,
        });
        assert_eq!(puncture.laminates.len(), m * (m + 1), "puncture m={m}");
    }
    println!("criterion 3 (model laminate counts m(m+3)/2 and m(m+1), m=1..6): pass");
}

#[test]
fn criterion_04_inversion_round_trip() {
    let start = Instant::now();
    for name in ["disk8", "pdisk", "torus"] {
        let d = fixture(name);
        let mut cache = ModelCache::default();
        let mut g = vec![-3i64; d.arc_count];
        loop {
            let x = invert_g_cached(&d, &g, &mut cache);
            assert_eq!(lamination_g(&d, &x), g, "{name} {g:?}");
            let again = invert_g_cached(&d, &g, &mut cache);
            assert_eq!(x.members, again.members, "{name} {g:?} idempotent");
            // Next point of the box [-3,3]^n.
            let mut i = 0;
            while i < g.len() && g[i] == 3 {
                g[i] = -3;
                i += 1;
            }
            if i == g.len() {
                break;
            }
            g[i] += 1;
        }
    }
    assert!(start.elapsed() < ROUND_TRIP_TIME);
    println!("criterion 4 (g-vector inversion round trip on [-3,3]^n): pass");
}

#[test]
fn criterion_05_torus_twist_tables() {
    let d = fixture("torus");
    let single = |g: [i64; 2]| -> Laminate {
        let x = invert_g(&d, &g);
        assert_eq!(x.members.len(), 1);
        x.members[0].0.clone()
    };
    let (l, l2) = (single([1, -1]), single([-1, 1]));
    let (g0, g0p) = (single([0, 1]), single([0, -1]));
    for m in 0..=4usize {
        let mi = m as i64;
        assert_eq!(g_vector(&d, &twist(&d, &g0, &l, m).unwrap()), vec![mi, 1 - mi]);
        assert_eq!(g_vector(&d, &twist(&d, &g0, &l2, m).unwrap()), vec![-mi, 1 + mi]);
        assert_eq!(g_vector(&d, &twist(&d, &g0p, &l, m).unwrap()), vec![mi, -mi - 1]);
        assert_eq!(g_vector(&d, &twist(&d, &g0p, &l2, m).unwrap()), vec![-mi, mi - 1]);
    }
    let g1 = single([1, 0]);
    for m in 0..=8usize {
        let mi = m as i64;
        assert_eq!(g_vector(&d, &twist(&d, &g1, &l, m).unwrap()), vec![1 + mi, -mi]);
    }
    println!("criterion 5 (torus twist tables and twist law): pass");
}

#[test]
fn criterion_06_density_certificate() {
    let d = fixture("torus");
    let start = Instant::now();
    let cert = density_sequence(&d, &[1, -1], 8);
    assert!(start.elapsed() < DENSITY_TIME);
    let base: Vec<i64> = cert
        .bridges
        .iter()
        .map(|b| g_vector(&d, &b.curve))
        .fold(vec![0i64; 2], |acc, g| vec![acc[0] + g[0], acc[1] + g[1]]);
    let mut prev: Option<Rat> = None;
    for step in &cert.steps {
        let m = step.m as i64;
        let sum: Vec<i64> = step
            .gvectors
            .iter()
            .fold(vec![0i64; 2], |acc, g| vec![acc[0] + g[0], acc[1] + g[1]]);
        let want = vec![
            base[0] + m * cert.big_n * 1,
            base[1] + m * cert.big_n * -1,
        ];
        assert_eq!(sum, want, "step {m}");
        if let Some(p) = prev {
            assert!(step.ray_distance < p, "distance decreases at step {m}");
        }
        prev = Some(step.ray_distance.clone());
    }
    assert!(prev.unwrap() < density_tol(), "final squared distance below 1/100");
    println!("criterion 6 (density certificate toward (1,-1)): pass");
}

#[test]
fn criterion_07_coverage() {
    let d = fixture("disk8");
    // Full coverage of the 5^3 box reduces to 1/1.
    let (covered, total) = coverage(&d, 2);
    assert_eq!((covered, total), (1, 1));
    let d = fixture("torus");
    assert_eq!(coverage(&d, 3), (43, 49));
    println!("criterion 7 (coverage 1 on the disk, 43/49 on the torus): pass");
}

#[test]
fn criterion_08_quiver_fixtures() {
    let d = fixture("disk10p");
    let q = quiver_of(&d);
    let sig: Vec<(usize, usize)> = q.arrows.iter().map(|a| (a.source, a.target)).collect();
    assert_eq!(sig, vec![(0, 1), (1, 2), (2, 3), (3, 0), (4, 3), (3, 2)]);
    let rels: BTreeSet<(usize, usize)> = q.relations.iter().copied().collect();
    assert_eq!(rels, [(2, 5), (5, 2), (4, 3)].into_iter().collect());

    let d = fixture("torus");
    let q = quiver_of(&d);
    let sig: Vec<(usize, usize)> = q.arrows.iter().map(|a| (a.source, a.target)).collect();
    assert_eq!(sig, vec![(0, 1), (1, 0), (0, 1), (1, 0)]);
    let rels: BTreeSet<(usize, usize)> = q.relations.iter().copied().collect();
    assert_eq!(rels, [(0, 3), (1, 0), (2, 1), (3, 2)].into_iter().collect());
    let spec = BrauerSpec {
        multiplicity: [(0, 1)].into_iter().collect(),
    };
    let brauer = brauer_relations(&d, &spec).unwrap();
    let view: Vec<(Vec<usize>, Vec<usize>)> = brauer
        .iter()
        .map(|r| (r.lhs.clone().unwrap(), r.rhs.clone().unwrap()))
        .collect();
    assert_eq!(
        view,
        vec![
            (vec![0, 1, 2, 3], vec![2, 3, 0, 1]),
            (vec![1, 2, 3, 0], vec![3, 0, 1, 2]),
        ]
    );
    println!("criterion 8 (quiver presentations and torus cycle binomials): pass");
}

#[test]
fn criterion_09_silting_fixtures() {
    let d = fixture("disk10p");
    let gamma = parse_generalized(
        &d,
        "P3:bd+>2B/R; P0:2A>3A/L; P1:3B>4B/R; P0:4A>3A/L; P1:3B>5A/R; P4:5B>bd+/L",
    )
    .unwrap();
    let t_gamma = string_complex(&d, &gamma).unwrap();
    assert!(!is_presilting(&d, std::slice::from_ref(&t_gamma)).unwrap());

    let delta = parse_laminate(&d, "P2:bd+>1B/R; P0:1A>3A/L; P1:3B>5A/R; P4:5B>bd+/L").unwrap();
    let delta2 = parse_laminate(&d, "P3:bd+>2B/R; P0:2A>4A/L; P1:4B>5A/R; P4:5B>bd+/L").unwrap();
    let td = string_complex(&d, &delta).unwrap();
    let td2 = string_complex(&d, &delta2).unwrap();
    assert!(!is_presilting(&d, &[td.clone(), td2.clone()]).unwrap());
    let q = quiver_of(&d);
    let obs = singleton_single_maps(&d, &td, &td2).unwrap();
    match obs.as_slice() {
        [HomObstruction::SingletonSingle { form: 'd', path, .. }] => {
            assert_eq!(path_word(&q, path), "b");
        }
        other => panic!("expected one shape-d obstruction via b, got {other:?}"),
    }

    let d = fixture("torus");
    let ts: Vec<StringComplex> = (-3..=3i64)
        .map(|i| {
            let x = invert_g(&d, &[i, 1 - i]);
            lamination_complex(&d, &x).unwrap().pop().unwrap()
        })
        .collect();
    for (ti, t) in ts.iter().enumerate() {
        for (tj, t2) in ts.iter().enumerate() {
            let (i, j) = (ti as i64 - 3, tj as i64 - 3);
            let pair = [t.clone(), t2.clone()];
            // Off the diagonal the formula is |i-j| <= 1; on it the two
            // members coincide, so the list stays presilting but has only
            // one distinct member out of the required two.
            assert_eq!(
                is_silting(&d, &pair).unwrap(),
                i != j && (i - j).abs() <= 1,
                "({i},{j})"
            );
            if i == j {
                assert!(is_presilting(&d, &pair).unwrap());
            }
        }
    }
    println!("criterion 9 (silting verdicts on the worked examples): pass");
}

#[test]
fn criterion_10_oracle_equivalence() {
    let mut suites: Vec<(Dissection, Vec<Laminate>)> = Vec::new();
    for name in ["disk8", "pdisk"] {
        let d = fixture(name);
        let fan = enumerate_fan(&d, 3);
        let lams: Vec<Laminate> = fan.rays.iter().map(|(l, _)| l.clone()).collect();
        suites.push((d, lams));
    }
    let d = fixture("torus");
    let mut lams = Vec::new();
    for m in -3..=3i64 {
        for g in [[m, 1 - m], [m, -m - 1]] {
            let x = invert_g(&d, &g);
            assert_eq!(x.members.len(), 1);
            lams.push(x.members[0].0.clone());
        }
    }
    lams.sort();
    lams.dedup();
    suites.push((d, lams));
    for (d, lams) in &suites {
        for a in lams {
            for b in lams {
                let ta = string_complex(d, a).unwrap();
                let tb = string_complex(d, b).unwrap();
                let empty = singleton_single_maps(d, &ta, &tb).unwrap().is_empty()
                    && quasi_graph_reps(d, &ta, &tb).unwrap().is_empty();
                assert_eq!(positive_position(d, a, b), empty);
                assert_eq!(
                    compatible(d, a, b),
                    is_presilting(d, &[ta, tb]).unwrap()
                );
            }
        }
    }
    println!("criterion 10 (geometric and algebraic oracles agree): pass");
}

#[test]
fn criterion_11_fan_geometry() {
    for name in ["disk8", "pdisk"] {
        let d = fixture(name);
        let fan = enumerate_fan(&d, 3);
        let cones: Vec<Cone> = fan
            .maximal_cones
            .iter()
            .map(|support| Cone {
                generators: support.iter().map(|&i| fan.rays[i].1.clone()).collect(),
            })
            .collect();
        for c in &cones {
            assert!(c.is_simplicial(), "{name}");
        }
        for (i, c1) in cones.iter().enumerate() {
            for c2 in &cones[i + 1..] {
                assert!(cones_meet_in_face(c1, c2), "{name}");
            }
        }
    }
    println!("criterion 11 (maximal cones simplicial, pairwise meeting in faces): pass");
}
