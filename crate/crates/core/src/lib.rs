//! Classical samplers for Gaussian boson sampling on graphs and for boson
//! sampling with non-negative matrices, built on weighted-matching Markov
//! chains, together with brute-force oracles for checking them.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the command line
//! and parallel batch drivers live in the companion `gbsamp` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod bipartite;
pub mod bs;
pub mod error;
pub mod gadget;
pub mod gbs;
pub mod graph;
pub mod matching_chain;
pub mod matrix;
pub mod oracle;
pub mod pm_chain;
pub mod product;
pub mod seed;
pub mod verify;

pub use bipartite::{BipartiteGraph, Side};
pub use error::{Error, Result};
pub use gadget::{bs_gadget, extract_occupancy, BipartiteGadget, OccupancyVector};
pub use graph::{Edge, EdgeId, Graph, Matching, VertexSubset};
pub use matrix::Matrix;
pub use oracle::{tv_distance, DistributionTable, PartitionProfile};
pub use product::{cartesian_product_k2, project_to_subset, EdgeClass, ProductGraph};
