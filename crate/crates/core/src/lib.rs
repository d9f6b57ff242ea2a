//! Robust functional Ward's linkages for hierarchical clustering of curves.
//!
//! The crate is organised bottom-up:
//!
//! - [`curves`]: sampled functional data, bands and band widths.
//! - [`depth`]: modified band depth, directional outlyingness and the two
//!   central-curve selectors.
//! - [`linkage`]: conventional Ward's, functional Ward's, MS- and BD-linkage.
//! - [`hclust`]: the agglomerative engine with full distance recomputation.
//! - [`spectral`]: periodograms and bias-corrected smoothed log-periodograms.
//! - [`simgen`]: seeded generators for the outlier models and the AR(2)
//!   mixture EEG simulation.
//! - [`metrics`]: adjusted Rand index and the SIM agreement index.

// Numerical kernels below read more clearly with explicit indices.
#![allow(clippy::needless_range_loop)]

pub mod curves;
pub mod depth;
pub mod error;
pub mod hclust;
pub mod linkage;
pub mod metrics;
pub mod simgen;
pub mod spectral;

pub use curves::{Band, Curve, CurveSet, Grid};
pub use error::{Error, Result};
pub use hclust::{agglomerate, cut_history, MergeHistory, MergeStep, Partition};
pub use linkage::{DistanceMatrix, LinkageKind};
