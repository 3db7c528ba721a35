//! Core algorithms for benchmarking unsupervised near-duplicate image detection.
//!
//! Near-duplicate discovery is a threshold-limited range search over image
//! descriptors. Each image pair is classified by comparing its Euclidean
//! distance against a threshold, so the finder can be characterized as a
//! binary classifier of near-duplicate (ND) vs. not-near-duplicate (NND)
//! pairs. This crate contains the pure parts of that pipeline:
//!
//! * [`dataset`]: image identities, ND ground truth and exact-duplicate removal.
//! * [`descriptors`]: GIST, SPoC and R-MAC descriptors, PCA whitening, triplet loss.
//! * [`index`]: exact flat L2 index with kNN and range queries.
//! * [`mining`]: hard negative mining (`hn1`, `hn2`) and specificity arithmetic.
//! * [`evaluation`]: ROC curves, AUC with confidence intervals, FP projections.
//! * [`querysim`]: range-query simulation (average recall vs. FPs/query).
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature. The `parallel` feature fans queries out over a rayon pool; results
//! are identical for every thread count.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod dataset;
pub mod descriptors;
pub mod error;
pub mod evaluation;
pub mod index;
pub mod mining;
pub mod querysim;

pub use error::{Error, Result};
