//! Spectral graph learning: sparse graph Laplacians, graph Fourier analysis,
//! spectral clustering, spline and Chebyshev filters, and the GCN and SIGN
//! node classifiers with their training harness.
//!
//! The crate is organized bottom-up:
//!
//! | module | contents |
//! |--------|----------|
//! | [`graph`] | CSR graphs, Laplacians, incidence matrix, SIGN aggregators |
//! | [`spectral`] | symmetric eigensolvers, GFT/IGFT, Fiedler bipartition, conductance |
//! | [`filters`] | spectral convolution, cubic-spline kernels, Chebyshev filtering |
//! | [`nn`] | dense layers, activations, masked cross-entropy, dropout, Adam |
//! | [`models`] | GCN (plain and residual) and SIGN with exact backward passes |
//! | [`data`] | Cora ingestion, splits, normalization, synthetic graphs |
//! | [`harness`] | training loops, repeated seeded runs, confidence intervals, export |

// Index loops mirror the reference formulations of the numerical kernels.
#![allow(clippy::needless_range_loop)]

pub mod checkpoint;
pub mod data;
mod error;
pub mod filters;
pub mod graph;
pub mod harness;
pub mod models;
pub mod nn;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::{LaplacianKind, SparseGraph, SparseSymMatrix};
pub use spectral::SpectralBasis;

/// Dense per-vertex signal: one row per vertex, one column per feature channel.
pub type GraphSignal = ndarray::Array2<f64>;
