//! Cost-accounted simulation of output-sensitive quantum Boolean matrix
//! multiplication.
//!
//! Products are computed exactly, each non-zero entry with a witness, while a
//! [`CostLedger`] is charged the quantum-search cost the algorithm would pay.
//! The charged `quantum_units` grow like `n√ℓ` for sparse products and `ℓ√n`
//! for dense ones, which the [`bench`] module measures as log-log slopes.
//!
//! Layers, bottom up:
//!
//! - [`boolmat`]: bit-packed matrices, counted oracles, planted instances,
//!   the BMM1 file format and the brute-force reference product.
//! - [`cost`]: the ledger and the charged search primitives.
//! - [`store`]: the shrinking bipartite graph with order-statistic access.
//! - [`finder`]: single collision search and the "up to λ entries" product.
//! - [`blocking`]: random permutation and block decomposition for large ℓ.
//! - [`driver`]: regime selection, λ doubling and the block-reduction mode.
//!
//! All library indices are 0-based; the file format and CLI are 1-based.

pub mod bench;
pub mod blocking;
pub mod boolmat;
pub mod cost;
pub mod driver;
mod error;
pub mod finder;
pub mod ostree;
pub mod store;

pub use boolmat::{
    brute_force_product, generate_planted, BoolMatrix, EntrySet, MatrixView, OracleHandle,
    PlantMode, PlantedInstance, Side, WitnessedEntry,
};
pub use cost::{CostLedger, SearchConfig, SearchContext};
pub use driver::{Mode, RunReport};

pub use error::{Error, Result};
pub use store::CollisionStore;
