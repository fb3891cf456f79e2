//! Elastic distances and summative time-warp kernels for time series.

// `!(x > 0.0)` is used on purpose so that NaN parameters are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod datasets;
pub mod distance;
pub mod error;
pub mod gram;
pub mod kernel;
pub mod measure;
pub mod series;
pub mod smo;
pub mod verify;

pub use classify::{GridSpec, SvmKernel, SvmModel};
pub use datasets::{LabeledDataset, Split};
pub use distance::{dtw, erp, euclidean, levenshtein, twed, Boundary, CostParams};
pub use error::{Error, Result};
pub use gram::{build_gram, definiteness_report, eigen_symmetric, GramMatrix, SpectrumReport};
pub use kernel::{
    kernel_value, stwk_me, stwk_me_log, twip1, twip2, KernelFamily, KernelId, KernelParams,
};
pub use measure::{DistanceKind, Measure};
pub use series::{Norm, SymbolSequence, TimeSeries};
