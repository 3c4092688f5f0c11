//! Conditional-gradient (Frank-Wolfe with unit step) solvers for sparse
//! rank-one matrix approximation: sparse PCA under explicit cardinality or
//! sparsity-penalty models, plus sparse SVD, sparse nonnegative PCA, and a
//! sparse CCA surrogate.
//!
//! The building blocks are deliberately small:
//!
//! * [`linalg`] - dense vectors, symmetric operators (explicit, factored
//!   Gram, deflated), thresholding maps, norms, preprocessing.
//! * [`oracles`] - closed-form maximizers of linear forms over sparsity
//!   constraint sets; every solver step reduces to one of these.
//! * [`engine`] - the generic ascent loop with its stationarity gap
//!   certificate and trace diagnostics.
//! * [`spca`] - the algorithm catalog assembled from the pieces above.
//! * [`extensions`] - sparse SVD, nonnegative sparse PCA, sparse CCA proxy.
//! * [`reference`] - brute-force baselines (exhaustive, greedy) and
//!   enumeration/sampling validators for the closed-form oracles.
//! * [`io`], [`synth`], [`bench`] - matrix I/O, seeded instance generation,
//!   and the reproducible benchmark harness behind the CLI.

pub mod bench;
pub mod engine;
pub mod error;
pub mod extensions;
pub mod io;
pub mod linalg;
pub mod oracles;
pub mod reference;
pub mod spca;
pub mod synth;

pub use error::{Error, Result};
