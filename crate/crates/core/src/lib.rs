//! heatlab-core: random walks, exit times, heat kernels and potential theory
//! on finite weighted graphs, with falsifiable sub-Gaussian scaling checks.
//!
//! The crate is organised around five layers:
//!
//! * [`graph`] — weighted-graph families (lattices, Sierpinski gasket,
//!   Cartesian products, bottlenecks) with the hop metric, balls and
//!   geodesic chains;
//! * [`kernel`] — the reversible lazy transition operator, killed
//!   restrictions, exact exit/hitting-time distributions, the discrete heat
//!   kernel and a reproducible Monte Carlo sampler;
//! * [`exit`] — mean exit times, the sup/center comparison, walk-dimension
//!   scaling fits and the kappa/nu iteration counts;
//! * [`potential`] — harmonic extension, Harnack constants, Green kernels,
//!   capacity and effective resistance;
//! * [`bounds`] — chaining lower bounds, exit-time distribution envelopes,
//!   sub-Gaussian profile regressions and the short-time scaling-window
//!   experiment.

pub mod bounds;
pub mod error;
pub mod exit;
pub mod fit;
pub mod graph;
pub mod kernel;
pub mod linalg;
pub mod potential;
pub mod report;
pub mod rng;
pub mod verify;

pub use error::{Error, Result};
pub use graph::{
    gen_bottleneck, gen_lattice, gen_product, gen_sierpinski, Ball, Edge, GraphMeta, Vertex,
    WeightedGraph,
};
pub use kernel::{KilledOperator, TransitionOperator};
pub use rng::RngStream;
