//! Smooth graph signal interpolation driven by the Markov variation
//! `||s - P s||`, where `P = D^{-1} W` is the random-walk matrix of an
//! undirected weighted graph.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`graph`] | graphs, k-NN and sensor affinities, Markov matrix, one-hop closure |
//! | [`spectral`] | Markov eigenpairs via the normalized Laplacian, GFT, diffusion embeddings |
//! | [`smoothness`] | Markov variation, total variation, Laplacian quadratic form |
//! | [`l1`] | minimum-l1 solver with an elementwise residual box |
//! | [`interpolation`] | one-shot and iterative interpolation, least-squares and spectral-regression baselines |
//! | [`nystrom`] | Nystrom-extended approximate Markov spectra and interpolation |
//! | [`sampling`] | uniform and greedy spectral sample selection |
//! | [`experiments`] | synthetic generators, metrics and the benchmark runner |
//! | [`io`] | CSV and JSON formats |

pub mod error;
pub mod experiments;
pub mod graph;
pub mod interpolation;
pub mod io;
pub mod l1;
pub mod nystrom;
pub mod sampling;
pub mod smoothness;
pub mod sparse;
pub mod spectral;

pub use error::{GsiError, Result};
