//! Exact enumeration and verification tools for orientations of graphs with no
//! directed cycle of a fixed length.

pub mod containers;
pub mod counting;
pub mod density;
pub mod encode;
pub mod error;
pub mod graph;
pub mod io;
pub mod keylemma;
pub mod sampling;
pub mod sweep;

pub use error::{Error, Result};
pub use graph::{Digraph, Dir, Graph, Orientation, VertexSet};
pub use sampling::Seed;
