pub mod conic;
pub mod error;
pub mod expr;
pub mod ilp;
pub mod io;
pub mod micp;
pub mod model;
pub mod problems;
pub mod solver;
pub mod tailor;

pub use error::{GcsError, Result};
pub use model::{EdgeId, GcsGraph, VertexId, VertexPoints};
