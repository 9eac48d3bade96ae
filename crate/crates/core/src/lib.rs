//! Multivariate unimodality testing with the dip statistic of distances from
//! observers over random projections, plus the mp-means clustering wrapper
//! built on top of it.
//!
//! The pieces, bottom up:
//! - [`dip`]: Hartigan's dip statistic and bootstrap p-values.
//! - [`mahalanobis`], [`projection`]: covariance whitening and Gaussian
//!   random projections.
//! - [`mudpod`]: the Monte Carlo test over random views.
//! - [`mpmeans`]: incremental k-means that splits multimodal clusters.
//! - [`datagen`], [`io`], [`evaluation`], [`bench`]: synthetic data, CSV,
//!   NMI and the benchmark suites.
//! - [`cli`], [`report`]: the command line and its JSON reports.

pub mod bench;
pub mod cli;
pub mod dataset;
pub mod datagen;
pub mod dip;
pub mod error;
pub mod evaluation;
pub mod io;
pub mod mahalanobis;
pub mod mpmeans;
pub mod mudpod;
pub mod projection;
pub mod report;
pub mod seed;

pub use dataset::Dataset;
pub use error::{Error, Result};
