//! Weighted edge-degree constrained subgraphs for maximum-weight
//! b-matching, with a random-order semi-streaming driver.

pub mod edcs;
pub mod generators;
pub mod graph;
pub mod io;
pub mod matching;
pub mod streaming;
pub mod trial;

pub use edcs::{EdcsError, EdcsParams, ParamMode, ViolationReport};
pub use graph::{Capacities, EdgeId, GraphError, MultiGraph, Subgraph, Vertex, Weight, WeightedEdge};
