//! Generalized once-excited random walks on rooted trees.
//!
//! The walk moves to the parent with relative weight `λ_v` the first time it
//! sits at `v` and `μ_v` on every later visit, and to each child with weight 1.
//! This crate provides tree generators and cutset sums ([`tree`]), random
//! environments and their ruin potentials ([`environment`]), direct and
//! clock-driven simulation ([`walk`]), the ruin percolation built from the
//! clocks ([`percolation`]) and numerical diagnostics ([`analysis`]).
//!
//! ```
//! use goerw::environment::{sample_random_environment, AlphaDistribution};
//! use goerw::tree::build_polynomial;
//! use goerw::walk::{simulate, StopRule};
//!
//! let tree = build_polynomial(1.5, 12).unwrap();
//! let env = sample_random_environment(&tree, &AlphaDistribution::Point(1.0), 7).unwrap();
//! let traj = simulate(&tree, &env, &StopRule::max_steps(500), 11).unwrap();
//! assert!(traj.is_consistent(&tree));
//! ```

pub mod analysis;
pub mod environment;
pub mod percolation;
pub mod seed;
pub mod stats;
pub mod tree;
pub mod walk;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/trees.md")]
    mod trees {}
    #[doc = include_str!("../../../book/src/environments.md")]
    mod environments {}
    #[doc = include_str!("../../../book/src/walks.md")]
    mod walks {}
    #[doc = include_str!("../../../book/src/percolation.md")]
    mod percolation {}
    #[doc = include_str!("../../../book/src/analysis.md")]
    mod analysis {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
