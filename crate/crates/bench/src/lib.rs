//! Shared fixtures for the criterion benchmarks.

use std::sync::Arc;

use heatlab_core::{gen_lattice, gen_sierpinski, TransitionOperator, WeightedGraph};

pub fn lattice_2d(side: u32) -> Arc<WeightedGraph> {
    Arc::new(gen_lattice(2, side).expect("lattice fixture"))
}

pub fn gasket(level: u32) -> Arc<WeightedGraph> {
    Arc::new(gen_sierpinski(level).expect("gasket fixture"))
}

pub fn lazy_walk(g: Arc<WeightedGraph>) -> TransitionOperator {
    TransitionOperator::new(g, 0.5).expect("operator fixture")
}
