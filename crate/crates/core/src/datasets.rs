//! UCR-format I/O, fixed fixtures and seeded synthetic datasets.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub items: Vec<TimeSeries>,
    /// Dense class ids, indices into `classes`.
    pub labels: Vec<usize>,
    /// Original label text of each dense id.
    pub classes: Vec<String>,
    pub split: Split,
}

impl LabeledDataset {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.classes.len()];
        for &l in &self.labels {
            c[l] += 1;
        }
        c
    }

    /// Items and labels at `idx`, sharing the class table.
    pub fn subset(&self, idx: &[usize]) -> Self {
        Self {
            items: idx.iter().map(|&i| self.items[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            classes: self.classes.clone(),
            split: self.split,
        }
    }

    /// Re-expresses `other`'s labels in this dataset's class table, adding
    /// classes it lacks.
    pub fn align_classes(&mut self, other: &mut LabeledDataset) {
        let mut classes = self.classes.clone();
        for c in &other.classes {
            if !classes.contains(c) {
                classes.push(c.clone());
            }
        }
        let remap = |ds: &mut LabeledDataset| {
            for l in ds.labels.iter_mut() {
                let name = &ds.classes[*l];
                *l = classes.iter().position(|c| c == name).unwrap_or(*l);
            }
            ds.classes = classes.clone();
        };
        remap(self);
        remap(other);
    }
}

/// Parses UCR text: one series per line, label first, values separated by
/// commas or whitespace. Timestamps are `1..=N`. Labels are mapped to dense
/// ids in numeric order when all are numeric, lexicographic otherwise.
pub fn parse_ucr_str(text: &str, split: Split) -> Result<LabeledDataset> {
    let mut raw_labels = Vec::new();
    let mut items = Vec::new();
    let mut width = None;
    for (k, line) in text.lines().enumerate() {
        let line_no = k + 1;
        let mut tokens = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty());
        let Some(label) = tokens.next() else {
            continue;
        };
        let values = tokens
            .map(|t| {
                t.parse::<f64>().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("non-numeric value {t:?}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        match width {
            None => width = Some(values.len()),
            Some(w) if w != values.len() => {
                return Err(Error::RaggedRows {
                    line: line_no,
                    expected: w,
                    found: values.len(),
                })
            }
            _ => {}
        }
        raw_labels.push(normalize_label(label));
        items.push(TimeSeries::univariate(values));
    }
    if items.is_empty() {
        return Err(Error::EmptyFile);
    }
    let distinct: BTreeSet<&str> = raw_labels.iter().map(String::as_str).collect();
    let mut classes: Vec<String> = distinct.into_iter().map(str::to_string).collect();
    if classes.iter().all(|c| c.parse::<f64>().is_ok()) {
        classes.sort_by(|a, b| {
            a.parse::<f64>()
                .unwrap()
                .total_cmp(&b.parse::<f64>().unwrap())
        });
    }
    let labels = raw_labels
        .iter()
        .map(|l| classes.iter().position(|c| c == l).unwrap())
        .collect();
    Ok(LabeledDataset {
        items,
        labels,
        classes,
        split,
    })
}

/// `"1.0"` and `"1"` name the same class.
fn normalize_label(label: &str) -> String {
    match label.parse::<f64>() {
        Ok(v) if v.fract() == 0.0 && v.abs() < 1e15 => format!("{}", v as i64),
        _ => label.to_string(),
    }
}

pub fn parse_ucr(path: &Path, split: Split) -> Result<LabeledDataset> {
    parse_ucr_str(&fs::read_to_string(path)?, split)
}

/// Space-separated UCR text with 17 significant digits per value.
pub fn serialize_ucr(ds: &LabeledDataset) -> String {
    let mut out = String::new();
    for (x, &l) in ds.items.iter().zip(&ds.labels) {
        out.push_str(&ds.classes[l]);
        for v in x.values() {
            let _ = write!(out, " {v:.16e}");
        }
        out.push('\n');
    }
    out
}

/// Loads `DIR/NAME/NAME_TRAIN` and `DIR/NAME/NAME_TEST` (optionally with a
/// `.tsv` or `.txt` extension), sharing one class table.
pub fn load_ucr_pair(dir: &Path, name: &str) -> Result<(LabeledDataset, LabeledDataset)> {
    let find = |suffix: &str| -> Result<std::path::PathBuf> {
        for ext in ["", ".tsv", ".txt", ".csv"] {
            let p = dir.join(name).join(format!("{name}_{suffix}{ext}"));
            if p.exists() {
                return Ok(p);
            }
        }
        Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("{}/{name}/{name}_{suffix} not found", dir.display()),
        )))
    };
    let mut train = parse_ucr(&find("TRAIN")?, Split::Train)?;
    let mut test = parse_ucr(&find("TEST")?, Split::Test)?;
    train.align_classes(&mut test);
    Ok((train, test))
}

/// Sequences used to show that the classical elastic distances do not give
/// definite kernels.
#[derive(Debug, Clone)]
pub struct AppendixA {
    pub lev_strings: Vec<&'static str>,
    pub dtw_series: Vec<TimeSeries>,
    pub dtw_names: Vec<&'static str>,
    pub three_digit: Vec<TimeSeries>,
    pub three_digit_names: Vec<&'static str>,
    /// Reference Levenshtein matrix over `lev_strings`.
    pub m_lev: Vec<Vec<f64>>,
    pub lev_c: Vec<f64>,
    pub lev_d: Vec<f64>,
    /// DTW matrix as printed; it does not match DTW over `dtw_series`.
    pub m_dtw_printed: Vec<Vec<f64>>,
    pub dtw_c: Vec<f64>,
    pub dtw_d: Vec<f64>,
    /// Reference TWED matrix (ν = 1, λ = 0) over `three_digit`.
    pub m_twed: Vec<Vec<f64>>,
    /// Reference ERP matrix (g = 0) over `three_digit`.
    pub m_erp: Vec<Vec<f64>>,
}

fn matrix<const N: usize>(rows: [[u8; N]; N]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|r| r.iter().map(|&v| v as f64).collect())
        .collect()
}

fn digits(s: &str) -> TimeSeries {
    TimeSeries::univariate(s.chars().map(|c| c.to_digit(10).unwrap() as f64).collect())
}

pub fn fixtures_appendix_a() -> AppendixA {
    let lev_strings = vec!["abc", "bad", "dab", "adc", "bcd"];
    let dtw_names = vec!["01", "012", "0123", "01234"];
    let three_digit_names = vec![
        "010", "012", "103", "301", "032", "123", "023", "003", "302", "321",
    ];
    AppendixA {
        lev_strings,
        dtw_series: dtw_names.iter().map(|s| digits(s)).collect(),
        dtw_names,
        three_digit: three_digit_names.iter().map(|s| digits(s)).collect(),
        three_digit_names,
        m_lev: matrix([
            [0, 3, 2, 1, 2],
            [3, 0, 2, 2, 1],
            [2, 2, 0, 3, 3],
            [1, 2, 3, 0, 3],
            [2, 1, 3, 3, 0],
        ]),
        lev_c: vec![1.0, 1.0, -2.0 / 3.0, -2.0 / 3.0, -2.0 / 3.0],
        lev_d: vec![1.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0, -2.0 / 3.0, -2.0 / 3.0],
        m_dtw_printed: matrix([[0, 1, 2, 3], [1, 0, 0, 0], [2, 0, 0, 0], [3, 0, 0, 0]]),
        dtw_c: vec![1.0 / 4.0, -3.0 / 8.0, -1.0 / 8.0, 1.0 / 4.0],
        dtw_d: vec![-1.0 / 4.0, -1.0 / 4.0, 1.0 / 4.0, 1.0 / 4.0],
        m_twed: matrix([
            [0, 2, 7, 9, 6, 7, 5, 5, 10, 9],
            [2, 0, 5, 9, 4, 5, 3, 3, 8, 9],
            [7, 5, 0, 6, 7, 4, 6, 2, 5, 10],
            [9, 9, 6, 0, 13, 10, 12, 8, 1, 4],
            [6, 4, 7, 13, 0, 5, 3, 5, 12, 9],
            [7, 5, 4, 10, 5, 0, 2, 6, 9, 6],
            [5, 3, 6, 12, 3, 2, 0, 4, 11, 8],
            [5, 3, 2, 8, 5, 6, 4, 0, 7, 10],
            [10, 8, 5, 1, 12, 9, 11, 7, 0, 5],
            [9, 9, 10, 4, 9, 6, 8, 10, 5, 0],
        ]),
        m_erp: matrix([
            [0, 2, 3, 3, 4, 5, 4, 2, 4, 5],
            [2, 0, 3, 5, 2, 3, 2, 2, 4, 5],
            [3, 3, 0, 4, 3, 2, 3, 1, 3, 4],
            [3, 5, 4, 0, 7, 6, 7, 5, 1, 2],
            [4, 2, 3, 7, 0, 3, 2, 2, 6, 5],
            [5, 3, 2, 6, 3, 0, 1, 3, 5, 4],
            [4, 2, 3, 7, 2, 1, 0, 2, 6, 5],
            [2, 2, 1, 5, 2, 3, 2, 0, 4, 5],
            [4, 4, 3, 1, 6, 5, 6, 4, 0, 1],
            [5, 5, 4, 2, 5, 4, 5, 5, 1, 0],
        ]),
    }
}

/// Two series whose Euclidean inner product vanishes although their peaks
/// are one time step apart.
pub fn fixture_fig2() -> (TimeSeries, TimeSeries) {
    let a = TimeSeries::univariate(vec![0.0, 2.0, 0.0, 0.0, 0.0, 3.0, 0.0, 0.0, 0.0]);
    let b = TimeSeries::univariate(vec![0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 3.0, 0.0]);
    (a, b)
}

/// Seeded classes of randomly time-warped sinusoids.
///
/// Class `k` oscillates `k + 1` times over the series. Each instance gets a
/// random monotone warp `φ(t) = t + a·sin(πt)/π` with `|a| ≤ 0.6`, a small
/// random phase, amplitude jitter and Gaussian-like noise of scale `noise`.
pub fn synth_gaussian_classes(
    classes: usize,
    per_class: usize,
    length: usize,
    noise: f64,
    seed: u64,
) -> Result<LabeledDataset> {
    if classes == 0 || per_class == 0 || length == 0 {
        return Err(Error::InvalidParam("all counts must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut items = Vec::with_capacity(classes * per_class);
    let mut labels = Vec::with_capacity(classes * per_class);
    for _ in 0..per_class {
        for k in 0..classes {
            items.push(warped_sinusoid(k, length, noise, &mut rng));
            labels.push(k);
        }
    }
    Ok(LabeledDataset {
        items,
        labels,
        classes: (0..classes).map(|k| k.to_string()).collect(),
        split: Split::Train,
    })
}

/// Train and test sets drawn from the same generator.
pub fn synth_train_test(
    classes: usize,
    train_per_class: usize,
    test_per_class: usize,
    length: usize,
    noise: f64,
    seed: u64,
) -> Result<(LabeledDataset, LabeledDataset)> {
    let all = synth_gaussian_classes(
        classes,
        train_per_class + test_per_class,
        length,
        noise,
        seed,
    )?;
    let cut = classes * train_per_class;
    let train_idx: Vec<usize> = (0..cut).collect();
    let test_idx: Vec<usize> = (cut..all.len()).collect();
    let train = all.subset(&train_idx);
    let mut test = all.subset(&test_idx);
    test.split = Split::Test;
    Ok((train, test))
}

fn warped_sinusoid(class: usize, length: usize, noise: f64, rng: &mut ChaCha8Rng) -> TimeSeries {
    let a = rng.random_range(-0.6..0.6);
    let phase = rng.random_range(-0.15..0.15);
    let amp = rng.random_range(0.8..1.2);
    let freq = (class + 1) as f64;
    let values = (0..length)
        .map(|i| {
            let t = if length > 1 {
                i as f64 / (length - 1) as f64
            } else {
                0.0
            };
            let warped = t + a * (std::f64::consts::PI * t).sin() / std::f64::consts::PI;
            let clean = amp * (2.0 * std::f64::consts::PI * (freq * warped + phase)).sin();
            // Sum of uniforms: cheap, bounded, roughly Gaussian.
            let eps: f64 = (0..4).map(|_| rng.random_range(-1.0..1.0)).sum::<f64>() * 0.5;
            clean + noise * eps
        })
        .collect();
    TimeSeries::univariate(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_whitespace_and_commas() {
        let a = parse_ucr_str("1 0.5 0.7\n2 0.1 0.2", Split::Train).unwrap();
        let b = parse_ucr_str("1,0.5,0.7\n2,0.1,0.2\n", Split::Train).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 2);
        assert_eq!(a.items[0].len(), 2);
        assert_eq!(a.classes, vec!["1", "2"]);
        assert_eq!(a.items[1].times(), &[1.0, 2.0]);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_ucr_str("1 0.5 0.7\n2 0.1 x", Split::Train),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_ucr_str("1 0.5 0.7\n2 0.1", Split::Train),
            Err(Error::RaggedRows {
                line: 2,
                expected: 2,
                found: 1
            })
        ));
        assert!(matches!(
            parse_ucr_str("\n  \n", Split::Train),
            Err(Error::EmptyFile)
        ));
    }

    #[test]
    fn labels_are_dense_and_ordered() {
        let d = parse_ucr_str("10 1\n-1 2\n2.0 3\n10 4", Split::Test).unwrap();
        assert_eq!(d.classes, vec!["-1", "2", "10"]);
        assert_eq!(d.labels, vec![2, 0, 1, 2]);
        let s = parse_ucr_str("cat 1\ndog 2\ncat 3", Split::Test).unwrap();
        assert_eq!(s.labels, vec![0, 1, 0]);
    }

    #[test]
    fn fixtures() {
        let f = fixtures_appendix_a();
        assert_eq!(f.lev_strings.len(), 5);
        assert_eq!(f.three_digit.len(), 10);
        assert!(f
            .three_digit
            .iter()
            .all(|s| s.len() == 3 && s.times() == [1.0, 2.0, 3.0]));
        let lens: Vec<usize> = f.dtw_series.iter().map(TimeSeries::len).collect();
        assert_eq!(lens, vec![2, 3, 4, 5]);
        assert_eq!(f.three_digit[5].values(), &[1.0, 2.0, 3.0]);
        let (a, b) = fixture_fig2();
        assert_eq!((a.len(), b.len()), (9, 9));
        let dot: f64 = a.values().iter().zip(b.values()).map(|(x, y)| x * y).sum();
        assert_eq!(dot, 0.0);
    }

    #[test]
    fn synthetic_is_deterministic() {
        let a = synth_gaussian_classes(3, 4, 20, 0.1, 9).unwrap();
        let b = synth_gaussian_classes(3, 4, 20, 0.1, 9).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, synth_gaussian_classes(3, 4, 20, 0.1, 10).unwrap());
        assert_eq!(a.class_counts(), vec![4, 4, 4]);
        let (tr, te) = synth_train_test(3, 2, 5, 10, 0.0, 1).unwrap();
        assert_eq!((tr.len(), te.len()), (6, 15));
        assert_eq!(te.split, Split::Test);
        assert!(synth_gaussian_classes(0, 1, 1, 0.0, 0).is_err());
    }

    #[test]
    fn align_classes_shares_ids() {
        let mut a = parse_ucr_str("1 0\n2 0", Split::Train).unwrap();
        let mut b = parse_ucr_str("2 0\n3 0", Split::Test).unwrap();
        a.align_classes(&mut b);
        assert_eq!(a.classes, b.classes);
        assert_eq!(b.labels, vec![1, 2]);
    }

    proptest! {
        #[test]
        fn serialize_round_trips_bitwise(
            rows in prop::collection::vec(prop::collection::vec(-1e6..1e6f64, 4), 1..6),
            labels in prop::collection::vec(0u8..3, 6),
        ) {
            let text: String = rows
                .iter()
                .zip(&labels)
                .map(|(r, l)| {
                    let vals: Vec<String> = r.iter().map(|v| format!("{v:e}")).collect();
                    format!("{l} {}\n", vals.join(" "))
                })
                .collect();
            let ds = parse_ucr_str(&text, Split::Train).unwrap();
            let back = parse_ucr_str(&serialize_ucr(&ds), Split::Train).unwrap();
            prop_assert_eq!(&back, &ds);
            for (x, y) in ds.items.iter().zip(&back.items) {
                for (u, v) in x.values().iter().zip(y.values()) {
                    prop_assert_eq!(u.to_bits(), v.to_bits());
                }
            }
        }
    }
}
