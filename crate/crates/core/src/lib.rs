//! Benchmark engine for RGB-D salient object detection: saliency-map
//! metrics (MAE, PR/F curves, structure and enhanced-alignment measures,
//! cross-entropy), a depth-aware fusion gate, ground-truth dataset
//! statistics, and a parallel harness that turns per-image scores into
//! deterministic leaderboards and reports.
//!
//! Scoring one prediction against its ground truth:
//!
//! ```
//! use sodbench_core::{BinaryMask, MetricRecord, SaliencyMap, DEFAULT_BETA2};
//!
//! let gt = BinaryMask::new(2, 2, vec![1, 0, 1, 0]).unwrap();
//! let pred = SaliencyMap::new(2, 2, vec![0.9, 0.2, 0.8, 0.1]).unwrap();
//! let record = MetricRecord::compute(&pred, &gt, DEFAULT_BETA2).unwrap();
//! assert!(record.mae < 0.2);
//! assert_eq!(record.f_max, 1.0);
//! assert_eq!(record.curve.len(), 256);
//! ```

pub mod bench;
pub mod error;
pub mod fusion;
pub mod map;
pub mod metrics;
pub mod stats;

pub use error::{Error, Result};
pub use map::{load_map, load_mask, save_map, BinaryMask, SaliencyMap};
pub use metrics::{MetricRecord, DEFAULT_BETA2};
