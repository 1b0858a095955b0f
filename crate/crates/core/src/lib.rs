//! Coarse-to-fine lesion segmentation primitives.
//!
//! Everything here is pure computation over in-memory planes: gray-level
//! co-occurrence texture descriptors, color moments, correlation-based
//! feature selection, the fuzzy clustering family (FCM, kernel FCM, spatial
//! kernel FCM and its dual-spatial variant) with k-means and GMM baselines,
//! region-growing refinement, and the segmentation metric suite.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, dataset
//! layout and the command line live in the `duskfcm` crate.
#![no_std]

extern crate alloc;

mod error;
mod math;

pub mod clustering;
pub mod color;
pub mod features;
pub mod image;
pub mod metrics;
pub mod overlay;
pub mod phantom;
pub mod pipeline;
pub mod refine;
pub mod texture;

pub use error::{Error, Result};
pub use image::{BinaryMask, GrayImage, LabelImage, QuantizedImage, RgbImage};
