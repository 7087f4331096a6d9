//! spikelab-core: desk-scale computations for diagonal flows on lattices
//! and grids.
//!
//! The crate computes the objects behind shrinking-target Diophantine
//! experiments: spike hit-times of flows against open box targets,
//! shortest vectors and grid points in exact rational or float arithmetic,
//! threshold excursions and heaviness diagnostics of orbits, epsilon-bad
//! target sets and their survivor scans, anisotropic box-counting
//! dimension estimates, and a continued-fraction driven fractal
//! construction with a mass-distribution certificate.

pub mod accept;
pub mod cf;
pub mod dimension;
pub mod diophantine;
pub mod dynamics;
pub mod error;
pub mod exact;
pub mod flow;
pub mod fractal;
pub mod interval;
pub mod lattice;
pub mod region;
pub mod spikes;
pub mod util;

pub use error::{Error, Result};
pub use flow::FlowSpec;
pub use interval::IntervalSet;
pub use lattice::{gauss_reduce, Grid, Lattice, Norm};
pub use region::BoxRegion;
