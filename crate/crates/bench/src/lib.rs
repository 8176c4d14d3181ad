//! Shared setup for the criterion benchmarks.

use swe_afc::benchmarks;
use swe_afc::{Scheme, Solver};

/// A wet dam break solver advanced a few steps so that the rarefaction and
/// the shock are both resolved on the mesh.
pub fn dam_break_solver(scheme: Scheme, elements: usize) -> Solver {
    let case = benchmarks::benchmark("wet-dam-break").expect("registered benchmark");
    let mut solver = case.solver(scheme, elements).expect("valid setup");
    for _ in 0..elements / 8 {
        solver.step().expect("stable step");
    }
    solver
}
