//! Sequence data model: timestamped multivariate series, symbolic sequences,
//! the pointwise vector-space operators on equal-length series, and the
//! elementary L1/L2 distances between sample values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Norm used for the local distance between two sample values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    #[default]
    L1,
    L2,
}

impl Norm {
    pub fn from_order(p: u32) -> Result<Self> {
        match p {
            1 => Ok(Norm::L1),
            2 => Ok(Norm::L2),
            _ => Err(Error::InvalidParam(format!(
                "norm order {p} (only 1 and 2)"
            ))),
        }
    }

    #[inline]
    pub(crate) fn eval(self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            Norm::L1 => x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum(),
            Norm::L2 => x
                .iter()
                .zip(y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
        }
    }
}

/// `‖x − y‖_p` for p ∈ {1, 2}.
pub fn lp_norm_dist(x: &[f64], y: &[f64], norm: Norm) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(norm.eval(x, y))
}

/// Borrowed view of one sample of a [`TimeSeries`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample<'a> {
    pub value: &'a [f64],
    pub timestamp: f64,
}

/// A finite sequence of `(value, timestamp)` samples with strictly
/// increasing timestamps. The empty series is valid.
///
/// Values are stored row-major: sample `i` occupies
/// `values[i * dim .. (i + 1) * dim]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    dim: usize,
    values: Vec<f64>,
    times: Vec<f64>,
}

impl TimeSeries {
    /// Builds a series from flat row-major values.
    pub fn from_flat(dim: usize, values: Vec<f64>, times: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParam("sample dimension must be >= 1".into()));
        }
        if values.len() != dim * times.len() {
            return Err(Error::DimensionMismatch {
                expected: dim * times.len(),
                found: values.len(),
            });
        }
        for (i, w) in times.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(Error::NonIncreasingTimestamps { index: i + 1 });
            }
        }
        Ok(Self { dim, values, times })
    }

    /// Builds a series from one vector per sample.
    pub fn new(samples: Vec<Vec<f64>>, times: Vec<f64>) -> Result<Self> {
        if samples.len() != times.len() {
            return Err(Error::LengthMismatch {
                left: samples.len(),
                right: times.len(),
            });
        }
        let dim = samples.first().map_or(1, Vec::len);
        let mut values = Vec::with_capacity(dim * samples.len());
        for s in &samples {
            if s.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: s.len(),
                });
            }
            values.extend_from_slice(s);
        }
        Self::from_flat(dim, values, times)
    }

    /// Univariate series stamped with the sample index `1..=N`.
    pub fn univariate(values: Vec<f64>) -> Self {
        let times = (1..=values.len()).map(|t| t as f64).collect();
        Self {
            dim: 1,
            values,
            times,
        }
    }

    pub fn univariate_with_times(values: Vec<f64>, times: Vec<f64>) -> Result<Self> {
        Self::from_flat(1, values, times)
    }

    /// The empty series Ω of the given sample dimension.
    pub fn empty(dim: usize) -> Self {
        Self {
            dim: dim.max(1),
            values: Vec::new(),
            times: Vec::new(),
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.times.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Value of the sample at 0-based index `i`.
    #[inline]
    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn time(&self, i: usize) -> f64 {
        self.times[i]
    }

    pub fn sample(&self, i: usize) -> Sample<'_> {
        Sample {
            value: self.value(i),
            timestamp: self.times[i],
        }
    }

    pub fn samples(&self) -> impl Iterator<Item = Sample<'_>> {
        (0..self.len()).map(move |i| self.sample(i))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// A series with the same timestamps and all-zero values.
    pub fn zeros_like(&self) -> Self {
        Self {
            dim: self.dim,
            values: vec![0.0; self.values.len()],
            times: self.times.clone(),
        }
    }

    /// Prefix made of the first `n` samples.
    pub fn prefix(&self, n: usize) -> Self {
        let n = n.min(self.len());
        Self {
            dim: self.dim,
            values: self.values[..n * self.dim].to_vec(),
            times: self.times[..n].to_vec(),
        }
    }
}

/// `λ ⊗ A`: every value scaled by `lambda`, timestamps kept.
pub fn scale(lambda: f64, a: &TimeSeries) -> TimeSeries {
    TimeSeries {
        dim: a.dim,
        values: a.values.iter().map(|v| lambda * v).collect(),
        times: a.times.clone(),
    }
}

/// `A ⊕ B`: element-wise value sum of two series sharing their timestamps.
pub fn add(a: &TimeSeries, b: &TimeSeries) -> Result<TimeSeries> {
    check_same_support(a, b)?;
    Ok(TimeSeries {
        dim: a.dim,
        values: a.values.iter().zip(&b.values).map(|(x, y)| x + y).collect(),
        times: a.times.clone(),
    })
}

pub(crate) fn check_same_support(a: &TimeSeries, b: &TimeSeries) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            found: b.dim,
        });
    }
    if let Some(index) = a.times.iter().zip(&b.times).position(|(s, t)| s != t) {
        return Err(Error::TimestampMismatch { index });
    }
    Ok(())
}

pub(crate) fn check_dims(a: &TimeSeries, b: &TimeSeries) -> Result<()> {
    if a.dim != b.dim && !a.is_empty() && !b.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            found: b.dim,
        });
    }
    Ok(())
}

#[inline]
pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// A sequence of discrete tokens compared by equality only.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymbolSequence {
    pub symbols: Vec<char>,
}

impl SymbolSequence {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

impl From<&str> for SymbolSequence {
    fn from(s: &str) -> Self {
        Self {
            symbols: s.chars().collect(),
        }
    }
}

impl std::fmt::Display for SymbolSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.symbols.iter().try_for_each(|c| write!(f, "{c}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn series(vals: &[f64]) -> TimeSeries {
        TimeSeries::univariate(vals.to_vec())
    }

    #[test]
    fn scale_cases() {
        let a = series(&[1.0, 3.0]);
        assert_eq!(scale(2.0, &a).values(), &[2.0, 6.0]);
        assert_eq!(scale(2.0, &a).times(), a.times());
        assert_eq!(scale(1.0, &a), a);
        let z = scale(0.0, &a);
        assert!(z.values().iter().all(|&v| v == 0.0));
        assert_eq!(z.times(), a.times());
    }

    #[test]
    fn add_cases() {
        let a = TimeSeries::univariate_with_times(vec![1.0], vec![1.0]).unwrap();
        let b = TimeSeries::univariate_with_times(vec![2.0], vec![1.0]).unwrap();
        assert_eq!(add(&a, &b).unwrap().values(), &[3.0]);

        let a = series(&[1.5, -2.0, 4.0]);
        let inv = add(&a, &scale(-1.0, &a)).unwrap();
        assert!(inv.values().iter().all(|&v| v == 0.0));
        assert_eq!(add(&a, &a.zeros_like()).unwrap(), a);
    }

    #[test]
    fn add_rejects_mismatched_support() {
        let a = series(&[1.0, 2.0]);
        let b = series(&[1.0, 2.0, 3.0]);
        assert!(matches!(add(&a, &b), Err(Error::LengthMismatch { .. })));
        let c = TimeSeries::univariate_with_times(vec![1.0, 2.0], vec![1.0, 3.0]).unwrap();
        assert!(matches!(
            add(&a, &c),
            Err(Error::TimestampMismatch { index: 1 })
        ));
    }

    #[test]
    fn lp_norm_cases() {
        assert_eq!(lp_norm_dist(&[0.0], &[2.0], Norm::L1).unwrap(), 2.0);
        assert_eq!(
            lp_norm_dist(&[3.0, 4.0], &[0.0, 0.0], Norm::L2).unwrap(),
            5.0
        );
        assert_eq!(
            lp_norm_dist(&[1.0, 7.0], &[1.0, 7.0], Norm::L2).unwrap(),
            0.0
        );
        assert!(matches!(
            lp_norm_dist(&[1.0], &[1.0, 2.0], Norm::L1),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(Norm::from_order(3).is_err());
    }

    #[test]
    fn constructor_validation() {
        assert!(matches!(
            TimeSeries::univariate_with_times(vec![1.0, 2.0], vec![2.0, 2.0]),
            Err(Error::NonIncreasingTimestamps { index: 1 })
        ));
        assert!(TimeSeries::new(vec![vec![1.0, 2.0], vec![3.0]], vec![1.0, 2.0]).is_err());
        let e = TimeSeries::empty(2);
        assert_eq!(e.len(), 0);
        assert_eq!(e.dim(), 2);
    }

    fn vec3() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0..10.0f64, 3)
    }

    proptest! {
        #[test]
        fn vector_space_axioms(a in vec3(), b in vec3(), c in vec3(), l in -3.0..3.0f64) {
            let (a, b, c) = (series(&a), series(&b), series(&c));
            let ab = add(&a, &b).unwrap();
            let ba = add(&b, &a).unwrap();
            prop_assert_eq!(&ab, &ba);
            let l1 = add(&ab, &c).unwrap();
            let r1 = add(&a, &add(&b, &c).unwrap()).unwrap();
            for (x, y) in l1.values().iter().zip(r1.values()) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
            let lhs = scale(l, &ab);
            let rhs = add(&scale(l, &a), &scale(l, &b)).unwrap();
            for (x, y) in lhs.values().iter().zip(rhs.values()) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }

        #[test]
        fn lp_norm_is_a_metric(x in vec3(), y in vec3(), z in vec3(), p in 1u32..=2) {
            let n = Norm::from_order(p).unwrap();
            let dxy = lp_norm_dist(&x, &y, n).unwrap();
            prop_assert!(dxy >= 0.0);
            prop_assert_eq!(dxy, lp_norm_dist(&y, &x, n).unwrap());
            prop_assert_eq!(lp_norm_dist(&x, &x, n).unwrap(), 0.0);
            if x != y { prop_assert!(dxy > 0.0); }
            let dxz = lp_norm_dist(&x, &z, n).unwrap();
            let dzy = lp_norm_dist(&z, &y, n).unwrap();
            prop_assert!(dxy <= dxz + dzy + 1e-12);
        }
    }
}
