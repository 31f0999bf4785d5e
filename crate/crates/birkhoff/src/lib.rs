//! A simulation laboratory for uniform doubly stochastic matrices.
//!
//! The library samples (approximately or exactly) uniformly from the
//! Birkhoff polytope and related transportation polytopes, and empirically
//! checks the limit laws such samples obey at large n: exponential
//! rescaled marginals, near-independent submatrices, logarithmic max
//! entries, the quarter-circle singular-value law, mixing time 2 for the
//! associated Markov chains, Beta-distributed vertex mixtures, and
//! asymptotic volume formulas.
//!
//! ```
//! use birkhoff::samplers::{gibbs_chain, GibbsConfig};
//! use birkhoff::matrix::check_doubly_stochastic;
//!
//! let batch = gibbs_chain(GibbsConfig::defaults(4), 10, 42).unwrap();
//! for m in batch.matrices() {
//!     assert!(check_doubly_stochastic(m, 1e-8).unwrap().ok);
//! }
//! ```

pub mod batch;
pub mod empirical;
pub mod error;
pub mod harness;
pub mod laws;
pub mod margins;
pub mod matrix;
pub mod rng;
pub mod samplers;
pub mod sinkhorn;
pub mod stats;
pub mod volumes;

pub use batch::{SampleBatch, SamplerId};
pub use empirical::EmpiricalDistribution;
pub use error::{Error, Result};
pub use laws::ReferenceLaw;
pub use margins::MarginSpec;
pub use matrix::SquareMatrix;

// The guide chapters double as doc-tests so their snippets stay in sync
// with the API.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            #[allow(dead_code)]
            struct $name;
        };
    }
    chapter!(Sampling, "../../../book/src/sampling.md");
    chapter!(Statistics, "../../../book/src/statistics.md");
    chapter!(Volumes, "../../../book/src/volumes.md");
    chapter!(Harness, "../../../book/src/harness.md");
}
