//! A single handle over every distance and kernel, as used by Gram
//! construction, the classifiers and the CLI.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distance::{self, CostParams};
use crate::error::{Error, Result};
use crate::kernel::{self, KernelId, TwipVariant};
use crate::series::{check_dims, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceKind {
    Levenshtein,
    Dtw,
    Erp,
    Twed,
    Euclidean,
    /// Distance induced by the first time-warp inner product.
    Twip1,
    /// Distance induced by the second time-warp inner product.
    Twip2,
}

impl DistanceKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Levenshtein => "lev",
            Self::Dtw => "dtw",
            Self::Erp => "erp",
            Self::Twed => "twed",
            Self::Euclidean => "euclidean",
            Self::Twip1 => "twip1",
            Self::Twip2 => "twip2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "lev" | "levenshtein" => Self::Levenshtein,
            "dtw" => Self::Dtw,
            "erp" => Self::Erp,
            "twed" => Self::Twed,
            "ed" | "euclidean" => Self::Euclidean,
            "twip1" => Self::Twip1,
            "twip2" => Self::Twip2,
            _ => return None,
        })
    }

    /// Whether the triangle inequality is guaranteed.
    pub fn is_metric(self) -> bool {
        !matches!(self, Self::Dtw)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceId {
    pub kind: DistanceKind,
    pub params: CostParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Measure {
    Distance(DistanceId),
    Kernel(KernelId),
}

impl Measure {
    pub fn distance(kind: DistanceKind, params: CostParams) -> Self {
        Self::Distance(DistanceId { kind, params })
    }

    pub fn kernel(id: KernelId) -> Self {
        Self::Kernel(id)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Distance(d) => d.kind.name(),
            Self::Kernel(k) => k.family.name(),
        }
    }

    pub fn is_kernel(&self) -> bool {
        matches!(self, Self::Kernel(_))
    }

    /// The parameters as JSON, for sidecars and result files.
    pub fn params_json(&self) -> serde_json::Value {
        match self {
            Self::Distance(d) => serde_json::to_value(&d.params),
            Self::Kernel(k) => serde_json::to_value(&k.params),
        }
        .unwrap_or(serde_json::Value::Null)
    }

    /// Raw value: the distance, or the (unnormalised) kernel.
    pub fn value(&self, a: &TimeSeries, b: &TimeSeries) -> Result<f64> {
        match self {
            Self::Distance(d) => distance_value(a, b, d),
            Self::Kernel(k) => kernel::kernel_value(a, b, k),
        }
    }

    /// A dissimilarity for nearest-neighbour search and RBF wrapping: the
    /// distance itself, or the distance induced by the kernel.
    pub fn dissimilarity(&self, a: &TimeSeries, b: &TimeSeries) -> Result<f64> {
        match self {
            Self::Distance(d) => distance_value(a, b, d),
            Self::Kernel(k) => kernel::kernel_induced_distance(a, b, k),
        }
    }

    /// Dissimilarities between every row item and every column item,
    /// row-major. Kernel self-similarities are computed once per item.
    pub fn dissimilarity_matrix(
        &self,
        rows: &[TimeSeries],
        cols: &[TimeSeries],
    ) -> Result<Vec<f64>> {
        let nc = cols.len();
        let cell = |(r, c): (usize, usize)| -> Result<f64> {
            self.dissimilarity(&rows[r], &cols[c])
                .map_err(|e| Error::Item {
                    row: r,
                    col: c,
                    source: Box::new(e),
                })
        };
        match self {
            Self::Kernel(k) if k.family.is_multiplicative() => {
                let self_log = |items: &[TimeSeries]| -> Result<Vec<f64>> {
                    items
                        .par_iter()
                        .map(|x| kernel::stwk_me_log(x, x, k))
                        .collect()
                };
                let sr = self_log(rows)?;
                let sc = self_log(cols)?;
                (0..rows.len() * nc)
                    .into_par_iter()
                    .map(|idx| {
                        let (r, c) = (idx / nc, idx % nc);
                        let ab = kernel::stwk_me_log(&rows[r], &cols[c], k).map_err(|e| {
                            Error::Item {
                                row: r,
                                col: c,
                                source: Box::new(e),
                            }
                        })?;
                        let cos = if ab == f64::NEG_INFINITY {
                            0.0
                        } else {
                            (ab - 0.5 * (sr[r] + sc[c])).exp().min(1.0)
                        };
                        Ok((2.0 - 2.0 * cos).max(0.0).sqrt())
                    })
                    .collect()
            }
            _ => (0..rows.len() * nc)
                .into_par_iter()
                .map(|idx| cell((idx / nc, idx % nc)))
                .collect(),
        }
    }
}

fn distance_value(a: &TimeSeries, b: &TimeSeries, d: &DistanceId) -> Result<f64> {
    let p = &d.params;
    match d.kind {
        DistanceKind::Levenshtein => {
            check_dims(a, b)?;
            let ta: Vec<&[f64]> = (0..a.len()).map(|i| a.value(i)).collect();
            let tb: Vec<&[f64]> = (0..b.len()).map(|i| b.value(i)).collect();
            Ok(distance::levenshtein(&ta, &tb))
        }
        DistanceKind::Dtw => distance::dtw(a, b, p),
        DistanceKind::Erp => distance::erp(a, b, p),
        DistanceKind::Twed => distance::twed(a, b, p),
        DistanceKind::Euclidean => distance::euclidean(a, b),
        DistanceKind::Twip1 => twip(a, b, p, TwipVariant::One),
        DistanceKind::Twip2 => twip(a, b, p, TwipVariant::Two),
    }
}

fn twip(a: &TimeSeries, b: &TimeSeries, p: &CostParams, v: TwipVariant) -> Result<f64> {
    kernel::twip_induced_distance(a, b, p.nu, v, p.corridor)
}
