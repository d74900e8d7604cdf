//! Kantorovich–Rubinstein distances with logarithmic cost, the mixing scale
//! and the companion `BV` and `H^{-1}` functionals.

mod kr;
mod measure;
mod mixing;
mod network_simplex;
mod oracle;
mod sinkhorn;
mod sobolev;

pub use kr::{kr_distance, kr_exact};
pub use measure::{split_difference, DiscreteMeasure, KrResult, KrSetup, Metric, Normalization, TransportPlan};
pub use mixing::{bv_seminorm, mixing_scale, sign_field, MixingScale};
pub use network_simplex::{solve_transportation, CostMatrix, TransportSolution, MAX_ENTRIES};
pub use oracle::{enumerate_vertices, ENUMERATION_LIMIT};
pub use sinkhorn::{kr_entropic, EntropicOptions};
pub use sobolev::{neg_sobolev, Boundary};
