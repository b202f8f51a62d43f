//! Rate change point detection in point processes with m-dependent intervals.
//!
//! The multiple filter test compares event counts in adjacent windows of
//! several sizes, scales the difference with a local estimate of the
//! long-run interval variance, and rejects a constant rate when the rescaled
//! maximum exceeds a threshold from a Brownian limit process. The multiple
//! filter algorithm then locates the change points.
//!
//! ```no_run
//! use mft_core::{detect, grid::WindowSet, limit::threshold_q, scenarios, simulate};
//!
//! let s = scenarios::four_step().unwrap();
//! let out = simulate::sim_piecewise(&s.segments, 7).unwrap();
//! let ws = WindowSet::new(&s.windows, out.train.duration(), None).unwrap();
//! let table = threshold_q(&ws, 0.05, 10_000, 1).unwrap();
//! let report = detect::detect(&out.train, &ws, &detect::DetectConfig::default(), &table).unwrap();
//! println!("{:?}", report.change_point_times());
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod detect;
pub mod error;
pub mod estimate;
pub mod grid;
pub mod io;
pub mod limit;
pub mod model_spec;
pub mod rng;
pub mod scenarios;
pub mod simulate;
pub mod train;

pub use detect::{detect, mft_test, DetectConfig, DetectionReport, TestResult};
pub use error::{MftError, Result};
pub use grid::WindowSet;
pub use train::{IsiSequence, SpikeTrain};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
