//! Thick embeddings of simplicial complexes and the invariants around them.
//!
//! The crate is organised by capability:
//!
//! - [`complex`]: simplicial and cubical complexes, lattice skeleta, random
//!   bipartite graphs, expansion constants and mod-2 Betti numbers.
//! - [`geometry`]: embedded complexes and the thickness, crossing and volume
//!   measurements taken on them.
//! - [`construct`]: random, two-scale, folded-grid and routed embeddings, plus
//!   the Monte Carlo probes for their bad events.
//! - [`width`]: relative fillings on dual grids and width bounds.
//! - [`nerve`]: separated ball covers and their Cech nerves.
//! - [`knot`]: polygonal knots, distortion, conformal length and nested block
//!   decompositions.
//! - [`sweep`]: scaling sweeps, log-log fits and SVG plots.
//!
//! All randomness flows through explicit `u64` seeds, so every pipeline is
//! reproducible bit for bit.

pub mod cli;
pub mod complex;
pub mod construct;
pub mod error;
pub mod geometry;
pub mod gf2;
pub mod io;
pub mod knot;
pub mod linalg;
pub mod nerve;
pub mod rng;
pub mod sweep;
pub mod width;

pub use error::{Error, Result};
