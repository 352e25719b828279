//! Correlator accumulation, binning, and jackknife error analysis.

pub mod binning;
pub mod measure;

pub use binning::{jackknife, mean_with_error, Accumulator, BinnedSeries, BinningError, EstimateWithError};
pub use measure::{Measurer, Schema, DEFAULT_MEAS_LEVELS};
