//! Surface-model toolkit for complete gentle algebras: dissections of
//! marked surfaces, laminates and their g-vectors, the integer-vector /
//! lamination bijection and its fan, Dehn twist density certificates, and
//! two-term string complexes with a combinatorial presilting test.

pub mod dehn;
pub mod dissection;
pub mod fan;
pub mod laminate;
pub mod ratmat;
pub mod silting;

pub use dissection::{parse_dissection, validate, Dissection};
pub use dehn::{bridge, density_sequence, multi_twist, twist, DensityCertificate};
pub use fan::{coverage, enumerate_fan, invert_g, lamination_g, Cone, Fan, Lamination};
pub use laminate::{
    build_generalized, build_laminate, compatible, crossings_with, elementary, g_vector,
    laminate_to_string, parse_generalized, parse_laminate, positive_position, Laminate,
};
pub use silting::{
    brauer_relations, complex_g, hom_vanishes, is_presilting, is_silting, lamination_complex,
    quasi_graph_reps, quiver_of, singleton_single_maps, special_cycles, string_complex,
    BrauerSpec, HomObstruction, Quiver, ShortPath, SpecialCycle, StringComplex,
};
