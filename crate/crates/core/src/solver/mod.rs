pub mod bnb;
pub mod conic;
pub mod separation;

pub use bnb::{
    relative_gap, solve_micp, solve_relaxation, BnbConfig, NodeSelection, SolveResult, SolveStatus,
    TracePoint,
};
pub use conic::{solve_conic, ConicProgram, ConicSolution, ConicStatus};
pub use separation::{separate_subtours, SubtourPolicy, SubtourSeparator};
