//! Forecasting by matrix-to-image transformation and exemplar inpainting.
//!
//! A series is scaled, turned into a square matrix, extended with unknown
//! cells for the forecast horizon, encoded as a 24-bit image, inpainted and
//! decoded; the forecast is read back from the filled cells.

pub mod bench;
pub mod error;
pub mod exec;
pub mod imaging;
pub mod inpaint;
pub mod series;
pub mod spectral;
pub mod transforms;
pub mod tuner;

pub use error::{Error, Result, Stage};
pub use exec::Execution;
pub use series::{Category, Period, ScalingRecord, TimeSeries};
pub use transforms::{Estimator, TransformKind};
