//! Exact, enumerable-scale finite-field combinatorics: distance and quotient
//! sets over `F_q^d`, the quadruple count `V(r)`, `O(2)` tallies with their
//! exact energy identity, and constructive similar-configuration search.

pub mod counting;
pub mod field;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod pointset;
pub mod report;

pub use counting::{
    count_n_zero, count_vr_bruteforce, count_vr_fast, distance_histogram, distance_set,
    energy_identity_check, eta_tally, quotient_set, vr_table, CountingError, DistanceHistogram,
    EtaTally, VrMethod, VrTable,
};
pub use field::{
    ArithOp, Elem, Field, FieldDescriptor, FieldElement, FieldError, QuadraticExtension,
};
pub use harness::{
    find_similar_configuration, gen_subfield_example, verify_bhowmik, verify_main_theorem,
    verify_quotient_coverage, verify_sharpness, FinderOutcome, FinderRun, HarnessError,
    SimilarConfiguration,
};
pub use linalg::{
    build_similarity_even, build_similarity_odd, enumerate_o2, norm_sq, sphere_points,
    sum_of_two_squares, LinalgError, OrthogonalGroup2, Point, SimilarityMatrix, SquareMatrix,
};
pub use pointset::{gen_random_pointset, PointSet, PointSetError};
pub use report::{Ratio, VerificationReport};
