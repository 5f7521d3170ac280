use gentlefan::fan::invert_g;
use gentlefan::laminate::{crossings_with, g_vector, laminate_to_string};
use gentlefan::silting::*;
use gentlefan::*;
fn main() {
    let text = std::fs::read_to_string("fixtures/torus.dsc").unwrap();
    let d = parse_dissection(&text).unwrap();
    let mk = |g: [i64; 2]| invert_g(&d, &g).members[0].0.clone();
    for (ga, gb) in [
        ([2i64, -1i64], [1i64, -2i64]),
        ([1, 0], [1, -2]),
        ([2, -1], [0, -1]),
        ([1, 0], [0, -1]),
    ] {
        let a = mk(ga);
        let b = mk(gb);
        println!("--- a(g={ga:?}) = {}", laminate_to_string(&d, &a));
        println!("    b(g={gb:?}) = {}", laminate_to_string(&d, &b));
        for c in crossings_with(&d, &a, &b) {
            println!(
                "    a-seg {} {:?}  x  b-seg {} {:?}  rtl={}",
                c.ai,
                a.segments()[c.ai],
                c.bi,
                b.segments()[c.bi],
                c.rtl
            );
        }
        let ta = string_complex(&d, &a).unwrap();
        let tb = string_complex(&d, &b).unwrap();
        println!(
            "    hom(a,b[1])=0: {}   hom(b,a[1])=0: {}",
            hom_vanishes(&d, &ta, &tb).unwrap(),
            hom_vanishes(&d, &tb, &ta).unwrap()
        );
        let ob_ba = singleton_single_maps(&d, &tb, &ta).unwrap().len()
            + quasi_graph_reps(&d, &tb, &ta).unwrap().len();
        let ob_ab = singleton_single_maps(&d, &ta, &tb).unwrap().len()
            + quasi_graph_reps(&d, &ta, &tb).unwrap().len();
        println!("    obstructions a->b: {ob_ab}, b->a: {ob_ba}");
        println!("    g check: {:?} {:?}", g_vector(&d, &a), g_vector(&d, &b));
    }
}
