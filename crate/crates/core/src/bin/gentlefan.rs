//! Command-line front end: every subcommand is a thin adapter over the
//! library, with deterministic output.  Exit codes: 0 success or positive
//! verdict, 1 negative verdict, 2 bad input, 3 internal assertion.

use std::collections::BTreeMap;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_traits::ToPrimitive;
use serde_json::json;

use gentlefan::dehn::{density_sequence, twist};
use gentlefan::dissection::{dual, parse_dissection, validate, Dissection};
use gentlefan::fan::{coverage, enumerate_fan, invert_g, Fan, Finiteness};
use gentlefan::laminate::{
    compatible, g_vector, laminate_to_string, parse_generalized, parse_laminate,
};
use gentlefan::silting::{
    arrow_name, brauer_relations, complex_g, is_presilting, is_silting, path_word,
    quasi_graph_reps, quiver_of, singleton_single_maps, special_cycles, string_complex,
    BrauerSpec, StringComplex,
};

#[derive(Parser)]
#[command(name = "gentlefan", version, about = "Dissections, laminate fans, twists and silting")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the surface axioms and print the invariants.
    Validate { file: String },
    /// Print the dual polygon pair of every arc.
    Dual { file: String },
    /// Print the gentle presentation; --brauer adds cycle-power relations.
    Quiver {
        file: String,
        #[arg(long)]
        brauer: Option<String>,
    },
    /// Print the g-vector of a laminate.
    Gvector {
        file: String,
        #[arg(long)]
        laminate: String,
    },
    /// Exit 0 when the two laminates do not cross, 1 when they do.
    Compat {
        file: String,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    /// Print the lamination with the given g-vector.
    Invert {
        file: String,
        #[arg(long)]
        g: String,
    },
    /// Enumerate the g-vector fan inside a box.
    Fan {
        file: String,
        #[arg(long)]
        bound: i64,
        #[arg(long)]
        json: Option<String>,
    },
    /// Fraction of box grid points covered by the fan.
    Coverage {
        file: String,
        #[arg(long)]
        bound: i64,
    },
    /// Dehn twist a laminate along a closed one.
    Twist {
        file: String,
        #[arg(long)]
        laminate: String,
        #[arg(long)]
        along: String,
        #[arg(long, default_value_t = 1)]
        times: usize,
    },
    /// Density certificate for a ray outside the fan support.
    Density {
        file: String,
        #[arg(long)]
        g: String,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        json: Option<String>,
    },
    /// Print the two-term complex of a (possibly self-crossing) curve.
    Complex {
        file: String,
        #[arg(long)]
        laminate: String,
    },
    /// Exit 0 when the complexes of the given curves are presilting.
    Presilt {
        file: String,
        /// Laminate specs separated by '|'.
        #[arg(long)]
        laminates: String,
    },
    /// Exit 0 when they are silting (presilting with |D| distinct members).
    Silt {
        file: String,
        /// Laminate specs separated by '|'.
        #[arg(long)]
        laminates: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| run(&cli.command)) {
        Ok(Ok(code)) => ExitCode::from(code),
        Ok(Err(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(_) => ExitCode::from(3),
    }
}

fn load(file: &str) -> Result<Dissection, String> {
    let text = std::fs::read_to_string(file).map_err(|e| format!("{file}: {e}"))?;
    let d = parse_dissection(&text).map_err(|e| e.to_string())?;
    validate(&d).map_err(|e| e.to_string())?;
    Ok(d)
}

fn parse_g(s: &str, n: usize) -> Result<Vec<i64>, String> {
    let g: Vec<i64> = s
        .split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|e| format!("bad g entry '{t}': {e}")))
        .collect::<Result<_, _>>()?;
    if g.len() != n {
        return Err(format!("g has {} entries, dissection has {n} arcs", g.len()));
    }
    Ok(g)
}

// Laminate specs already use ';' between segments, so lists of specs are
// separated by '|'.
fn complexes(d: &Dissection, specs: &str) -> Result<Vec<StringComplex>, String> {
    specs
        .split('|')
        .map(|s| {
            let lam = parse_generalized(d, s).map_err(|e| e.to_string())?;
            string_complex(d, &lam).map_err(|e| e.to_string())
        })
        .collect()
}

fn run(cmd: &Cmd) -> Result<u8, String> {
    match cmd {
        Cmd::Validate { file } => {
            let d = load(file)?;
            let inv = validate(&d).map_err(|e| e.to_string())?;
            println!("n={}", d.arc_count);
            println!("genus={}", inv.genus);
            println!("boundary={}", inv.boundary_components);
            println!("circ_punctures={}", inv.circ_punctures);
            println!("bullet_punctures={}", inv.bullet_punctures);
            println!("circ_marked={}", inv.circ_marked);
            println!("bullet_marked={}", inv.bullet_marked);
            println!("euler={}", inv.euler_characteristic);
            Ok(0)
        }
        Cmd::Dual { file } => {
            let d = load(file)?;
            for (arc, (pa, pb)) in dual(&d).dual_arcs.iter().enumerate() {
                println!(
                    "arc {}: {} -- {}",
                    arc + 1,
                    d.polygon(*pa).name,
                    d.polygon(*pb).name
                );
            }
            Ok(0)
        }
        Cmd::Quiver { file, brauer } => {
            let d = load(file)?;
            let q = quiver_of(&d);
            println!("vertices={}", q.arc_count);
            for (i, a) in q.arrows.iter().enumerate() {
                println!("arrow {}: {}->{}", arrow_name(i), a.source + 1, a.target + 1);
            }
            let mut rels: Vec<String> = q
                .relations
                .iter()
                .map(|&(i, j)| format!("{}{}", arrow_name(i), arrow_name(j)))
                .collect();
            rels.sort();
            println!("relations={}", rels.join(","));
            for c in special_cycles(&q) {
                if c.base == 0 {
                    let w: String = c.arrows.iter().map(|&a| arrow_name(a)).collect();
                    println!("cycle {}: {}", d.polygon(c.polygon).name, w);
                }
            }
            if let Some(spec) = brauer {
                let mut mult = BTreeMap::new();
                for part in spec.split(',') {
                    let (name, m) = part
                        .split_once('=')
                        .ok_or_else(|| format!("bad multiplicity '{part}'"))?;
                    let p = d
                        .polygon_named(name.trim())
                        .ok_or_else(|| format!("no polygon '{name}'"))?;
                    let m: u32 = m.trim().parse().map_err(|e| format!("bad multiplicity: {e}"))?;
                    mult.insert(p, m);
                }
                let rels = brauer_relations(&d, &BrauerSpec { multiplicity: mult })
                    .map_err(|e| e.to_string())?;
                for r in rels {
                    let side = |w: &Option<Vec<usize>>| match w {
                        Some(ids) => ids.iter().map(|&a| arrow_name(a)).collect(),
                        None => "0".to_string(),
                    };
                    println!("brauer arc {}: {} - {}", r.arc + 1, side(&r.lhs), side(&r.rhs));
                }
            }
            Ok(0)
        }
        Cmd::Gvector { file, laminate } => {
            let d = load(file)?;
            let lam = parse_generalized(&d, laminate).map_err(|e| e.to_string())?;
            println!("g={}", join_i64(&g_vector(&d, &lam)));
            Ok(0)
        }
        Cmd::Compat { file, a, b } => {
            let d = load(file)?;
            let la = parse_laminate(&d, a).map_err(|e| e.to_string())?;
            let lb = parse_laminate(&d, b).map_err(|e| e.to_string())?;
            if compatible(&d, &la, &lb) {
                println!("compatible");
                Ok(0)
            } else {
                println!("crossing");
                Ok(1)
            }
        }
        Cmd::Invert { file, g } => {
            let d = load(file)?;
            let g = parse_g(g, d.arc_count)?;
            let x = invert_g(&d, &g);
            for (lam, mult) in &x.members {
                println!("{mult}x {}", laminate_to_string(&d, lam));
            }
            Ok(0)
        }
        Cmd::Fan { file, bound, json } => {
            let d = load(file)?;
            let fan = enumerate_fan(&d, *bound);
            let finite = match fan.finite {
                Finiteness::Finite => "finite",
                Finiteness::InfiniteWitnessed => "infinite",
                Finiteness::Unknown => "unknown",
            };
            println!(
                "rays={} maximal={} finite={finite}",
                fan.rays.len(),
                fan.maximal_cones.len()
            );
            if let Some(out) = json {
                emit_fan_slice(&d, &fan, out)?;
            }
            Ok(0)
        }
        Cmd::Coverage { file, bound } => {
            let d = load(file)?;
            let (covered, total) = coverage(&d, *bound);
            println!("covered={covered} total={total}");
            Ok(0)
        }
        Cmd::Twist {
            file,
            laminate,
            along,
            times,
        } => {
            let d = load(file)?;
            let lam = parse_laminate(&d, laminate).map_err(|e| e.to_string())?;
            let l = parse_laminate(&d, along).map_err(|e| e.to_string())?;
            let res = twist(&d, &lam, &l, *times).map_err(|e| e.to_string())?;
            println!("{}", laminate_to_string(&d, &res));
            println!("g={}", join_i64(&g_vector(&d, &res)));
            Ok(0)
        }
        Cmd::Density {
            file,
            g,
            steps,
            json,
        } => {
            let d = load(file)?;
            let g = parse_g(g, d.arc_count)?;
            if *steps == 0 {
                return Err("steps must be positive".to_string());
            }
            let cert = density_sequence(&d, &g, *steps);
            for s in &cert.steps {
                let dist = s.ray_distance.to_f64().unwrap_or(f64::NAN).sqrt();
                println!("m={} ray_distance={} ({dist:.6})", s.m, s.ray_distance);
            }
            if let Some(out) = json {
                let doc = json!({
                    "target": cert.target,
                    "closed_part": cert
                        .closed
                        .iter()
                        .map(|(l, m)| json!({"spec": laminate_to_string(&d, l), "mult": m}))
                        .collect::<Vec<_>>(),
                    "bridges": cert
                        .bridges
                        .iter()
                        .map(|b| json!({"arc": b.arc + 1, "spec": laminate_to_string(&d, &b.curve)}))
                        .collect::<Vec<_>>(),
                    "N": cert.big_n,
                    "steps": cert
                        .steps
                        .iter()
                        .map(|s| json!({
                            "m": s.m,
                            "gvectors": s.gvectors,
                            "ray_distance": s.ray_distance.to_string(),
                        }))
                        .collect::<Vec<_>>(),
                });
                write_json(out, &doc)?;
            }
            Ok(0)
        }
        Cmd::Complex { file, laminate } => {
            let d = load(file)?;
            let lam = parse_generalized(&d, laminate).map_err(|e| e.to_string())?;
            let t = string_complex(&d, &lam).map_err(|e| e.to_string())?;
            let q = quiver_of(&d);
            let mut line = String::new();
            for (i, &(arc, deg)) in t.entries.iter().enumerate() {
                if i > 0 {
                    line.push_str(&format!(" -{}- ", path_word(&q, &t.maps[i - 1].0)));
                }
                line.push_str(&format!("P{}[{}]", arc + 1, deg));
            }
            println!("{line}");
            println!("g={}", join_i64(&complex_g(&t)));
            Ok(0)
        }
        Cmd::Presilt { file, laminates } => {
            let d = load(file)?;
            let ts = complexes(&d, laminates)?;
            let bad = obstructed_pairs(&d, &ts)?;
            println!("pairs_with_obstructions={bad}");
            let ok = is_presilting(&d, &ts).map_err(|e| e.to_string())?;
            println!("presilting={}", if ok { "yes" } else { "no" });
            Ok(u8::from(!ok))
        }
        Cmd::Silt { file, laminates } => {
            let d = load(file)?;
            let ts = complexes(&d, laminates)?;
            let ok = is_silting(&d, &ts).map_err(|e| e.to_string())?;
            println!("silting={}", if ok { "yes" } else { "no" });
            Ok(u8::from(!ok))
        }
    }
}

fn obstructed_pairs(d: &Dissection, ts: &[StringComplex]) -> Result<usize, String> {
    let mut bad = 0;
    for a in ts {
        for b in ts {
            let ss = singleton_single_maps(d, a, b).map_err(|e| e.to_string())?;
            let qg = quasi_graph_reps(d, a, b).map_err(|e| e.to_string())?;
            if !ss.is_empty() || !qg.is_empty() {
                bad += 1;
            }
        }
    }
    Ok(bad)
}

fn join_i64(v: &[i64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn write_json(path: &str, doc: &serde_json::Value) -> Result<(), String> {
    let text = serde_json::to_string_pretty(doc).expect("serializable");
    std::fs::write(path, text + "\n").map_err(|e| format!("{path}: {e}"))
}

/// Cross-section of the fan on the sphere of radius one in the 1-norm:
/// every ray becomes a point, every maximal cone a polyline through its
/// normalized generators (closed into a triangle for three arcs).
fn emit_fan_slice(d: &Dissection, fan: &Fan, out: &str) -> Result<(), String> {
    let n = d.arc_count;
    if n != 2 && n != 3 {
        return Err(format!("fan slice needs 2 or 3 arcs, dissection has {n}"));
    }
    let point = |g: &[i64]| -> Vec<f64> {
        let norm: i64 = g.iter().map(|x| x.abs()).sum();
        g.iter().map(|&x| x as f64 / norm as f64).collect()
    };
    let rays: Vec<serde_json::Value> = fan
        .rays
        .iter()
        .map(|(lam, g)| {
            json!({
                "label": laminate_to_string(d, lam),
                "g": g,
                "point": point(g),
            })
        })
        .collect();
    let cones: Vec<serde_json::Value> = fan
        .maximal_cones
        .iter()
        .map(|support| {
            let mut poly: Vec<Vec<f64>> =
                support.iter().map(|&i| point(&fan.rays[i].1)).collect();
            if n == 3 && poly.len() > 2 {
                poly.push(poly[0].clone());
            }
            json!({"rays": support, "polyline": poly})
        })
        .collect();
    write_json(out, &json!({"rays": rays, "cones": cones}))
}
