//! Seam finding for two-image stitching, with an object-aware soft-mask
//! optimiser alongside dynamic-programming, graph-cut and Voronoi baselines.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod alignment;
pub mod error;
pub mod imaging;
pub mod io;
pub mod metrics;
pub mod object_aware;
pub mod pipeline;
pub mod saliency;
pub mod seams;
pub mod synth;

pub use alignment::{AlignedPair, Correspondence, Homography};
pub use error::{Error, ErrorClass, Result};
pub use imaging::{BinaryMask, CostKind, CostMap, Dims, GrayImage, Image, SoftMask};
pub use metrics::MetricsReport;
pub use object_aware::{LossBreakdown, MaskLogits, OptimConfig, TraceRecord};
pub use seams::{Label, LabelMap, SeamResult};
