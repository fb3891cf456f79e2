//! Gram matrices, symmetric eigendecomposition and definiteness diagnostics.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::series::TimeSeries;

/// Default relative positivity threshold.
pub const DEFAULT_TAU: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    n: usize,
    entries: Vec<f64>,
    /// Name of the measure that produced the entries.
    pub kernel: String,
    pub params: serde_json::Value,
    pub items: Vec<String>,
}

impl GramMatrix {
    /// Wraps a row-major square matrix. Fails unless it is exactly symmetric.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for r in &rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: r.len(),
                });
            }
            entries.extend_from_slice(r);
        }
        let g = Self {
            n,
            entries,
            kernel: String::new(),
            params: serde_json::Value::Null,
            items: (0..n).map(|i| i.to_string()).collect(),
        };
        check_symmetric(&g.entries, n, 0.0)?;
        Ok(g)
    }

    /// Evaluates `f(i, j)` once per cell with `i <= j` and mirrors it.
    pub fn build_with<F>(n: usize, f: F) -> Result<Self>
    where
        F: Fn(usize, usize) -> Result<f64> + Sync,
    {
        let cells: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
        let values: Vec<f64> = cells
            .par_iter()
            .map(|&(i, j)| {
                f(i, j).map_err(|e| Error::Item {
                    row: i,
                    col: j,
                    source: Box::new(e),
                })
            })
            .collect::<Result<_>>()?;
        let mut entries = vec![0.0; n * n];
        for (&(i, j), v) in cells.iter().zip(values) {
            entries[i * n + j] = v;
            entries[j * n + i] = v;
        }
        Ok(Self {
            n,
            entries,
            kernel: String::new(),
            params: serde_json::Value::Null,
            items: (0..n).map(|i| i.to_string()).collect(),
        })
    }

    pub fn with_items(mut self, items: Vec<String>) -> Self {
        self.items = items;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries
            .chunks(self.n.max(1))
            .map(<[f64]>::to_vec)
            .collect()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for row in self.entries.chunks(self.n.max(1)).take(self.n) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        fs::write(path, out)?;
        let sidecar = Sidecar {
            kernel: self.kernel.clone(),
            params: self.params.clone(),
            items: self.items.clone(),
            n: self.n,
        };
        fs::write(sidecar_path(path), serde_json::to_string_pretty(&sidecar)?)?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut rows = Vec::new();
        for (k, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|t| {
                    t.trim().parse::<f64>().map_err(|e| Error::Parse {
                        line: k + 1,
                        message: format!("{t:?}: {e}"),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        let mut g = Self::from_rows(rows)?;
        let side = sidecar_path(path);
        if side.exists() {
            let s: Sidecar = serde_json::from_str(&fs::read_to_string(side)?)?;
            if s.n != g.n {
                return Err(Error::DimensionMismatch {
                    expected: s.n,
                    found: g.n,
                });
            }
            g.kernel = s.kernel;
            g.params = s.params;
            g.items = s.items;
        }
        Ok(g)
    }

    /// Whether the sidecar metadata describes the same computation.
    pub fn same_provenance(
        &self,
        kernel: &str,
        params: &serde_json::Value,
        items: &[String],
    ) -> bool {
        self.kernel == kernel && &self.params == params && self.items == items
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    kernel: String,
    params: serde_json::Value,
    items: Vec<String>,
    n: usize,
}

/// `<csv path>.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Gram matrix of `measure` over `items` (raw kernel or distance values).
pub fn build_gram(items: &[TimeSeries], measure: &Measure) -> Result<GramMatrix> {
    let mut g = GramMatrix::build_with(items.len(), |i, j| measure.value(&items[i], &items[j]))?;
    g.kernel = measure.name().to_string();
    g.params = measure.params_json();
    Ok(g)
}

fn check_symmetric(m: &[f64], n: usize, tol: f64) -> Result<()> {
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (m[i * n + j], m[j * n + i]);
            if (a - b).abs() > tol * a.abs().max(b.abs()).max(1.0) || a.is_nan() != b.is_nan() {
                return Err(Error::NotSymmetric { row: i, col: j });
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Eigen {
    /// Descending.
    pub values: Vec<f64>,
    /// Row-major; column `k` is the unit eigenvector of `values[k]`.
    pub vectors: Vec<f64>,
}

/// Full eigendecomposition of a row-major symmetric `n × n` matrix by cyclic
/// Jacobi rotations.
pub fn eigen_symmetric(m: &[f64], n: usize) -> Result<Eigen> {
    if m.len() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            found: m.len(),
        });
    }
    check_symmetric(m, n, 1e-12)?;
    let mut a = m.to_vec();
    // Symmetrise exactly so rotations stay consistent.
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (a[i * n + j] + a[j * n + i]);
            a[i * n + j] = v;
            a[j * n + i] = v;
        }
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let fro = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let target = 1e-13 * fro;
    for _sweep in 0..100 {
        let off = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= target {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[y * n + y].total_cmp(&a[x * n + x]));
    let values = order.iter().map(|&k| a[k * n + k]).collect();
    let mut vectors = vec![0.0; n * n];
    for (col, &k) in order.iter().enumerate() {
        for r in 0..n {
            vectors[r * n + col] = v[r * n + k];
        }
    }
    Ok(Eigen { values, vectors })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "PSD")]
    Psd,
    #[serde(rename = "NSD")]
    Nsd,
    /// Exactly one positive eigenvalue, as for the negation of a
    /// conditionally positive definite matrix.
    #[serde(rename = "CPD-candidate")]
    CpdCandidate,
    #[serde(rename = "indefinite")]
    Indefinite,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Psd => "PSD",
            Verdict::Nsd => "NSD",
            Verdict::CpdCandidate => "CPD-candidate",
            Verdict::Indefinite => "indefinite",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<f64>,
    pub pev_count: usize,
    pub delta_p: f64,
    pub verdict: Verdict,
    /// Absolute threshold used: `tau · max|G|`.
    pub threshold: f64,
}

/// Report on a spectrum; `tau` is relative to `scale` (normally `max|G|`).
pub fn spectrum_report(mut eigenvalues: Vec<f64>, scale: f64, tau: f64) -> SpectrumReport {
    eigenvalues.sort_by(|a, b| b.total_cmp(a));
    let threshold = tau * scale;
    let positive: Vec<f64> = eigenvalues
        .iter()
        .copied()
        .filter(|&e| e > threshold)
        .collect();
    let pev_count = positive.len();
    let delta_p = if pev_count <= 1 {
        0.0
    } else {
        let sum: f64 = positive.iter().sum();
        100.0 * (sum - positive[0]) / sum
    };
    let max = eigenvalues.first().copied().unwrap_or(0.0);
    let min = eigenvalues.last().copied().unwrap_or(0.0);
    let verdict = if min >= -threshold {
        Verdict::Psd
    } else if max <= threshold {
        Verdict::Nsd
    } else if pev_count == 1 {
        Verdict::CpdCandidate
    } else {
        Verdict::Indefinite
    };
    SpectrumReport {
        eigenvalues,
        pev_count,
        delta_p,
        verdict,
        threshold,
    }
}

pub fn definiteness_report(g: &GramMatrix, tau: f64) -> Result<SpectrumReport> {
    let e = eigen_symmetric(g.entries(), g.n())?;
    Ok(spectrum_report(e.values, g.max_abs(), tau))
}

/// `cᵀ·M·c` for a row-major `n × n` matrix.
pub fn quadratic_form(m: &[f64], n: usize, c: &[f64]) -> Result<f64> {
    if c.len() != n || m.len() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: c.len(),
        });
    }
    Ok((0..n)
        .map(|i| c[i] * (0..n).map(|j| m[i * n + j] * c[j]).sum::<f64>())
        .sum())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Witness {
    pub positive: Vec<f64>,
    pub positive_form: f64,
    pub negative: Vec<f64>,
    pub negative_form: f64,
    /// Candidates examined before both signs were seen.
    pub trials_used: usize,
}

/// Looks for zero-sum `c`, `d` with `cᵀGc > τ‖c‖²` and `dᵀGd < −τ‖d‖²`
/// (`τ` relative to `max|G|`). Eigenvectors of the matrix projected on the
/// zero-sum subspace are tried first, then `trials` random zero-sum vectors.
pub fn indefiniteness_witness_search(
    g: &GramMatrix,
    trials: usize,
    tau: f64,
    seed: u64,
) -> Result<Option<Witness>> {
    let n = g.n();
    if n < 2 {
        return Err(Error::InvalidParam("witness search needs n >= 2".into()));
    }
    let threshold = tau * g.max_abs();
    let project = |c: &mut [f64]| {
        let mean = c.iter().sum::<f64>() / n as f64;
        c.iter_mut().for_each(|x| *x -= mean);
    };

    // P·G·P with P = I − 11ᵀ/n.
    let m = g.entries();
    let row_mean: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| m[i * n + j]).sum::<f64>() / n as f64)
        .collect();
    let all_mean = row_mean.iter().sum::<f64>() / n as f64;
    let mut projected = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            projected[i * n + j] = m[i * n + j] - row_mean[i] - row_mean[j] + all_mean;
        }
    }
    let eig = eigen_symmetric(&projected, n)?;
    let mut seeds: Vec<Vec<f64>> = (0..n)
        .map(|k| (0..n).map(|r| eig.vectors[r * n + k]).collect())
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos: Option<(Vec<f64>, f64)> = None;
    let mut neg: Option<(Vec<f64>, f64)> = None;
    let total = seeds.len() + trials;
    for t in 0..total {
        let mut c = if t < seeds.len() {
            std::mem::take(&mut seeds[t])
        } else {
            (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
        };
        project(&mut c);
        let norm2: f64 = c.iter().map(|x| x * x).sum();
        if norm2 == 0.0 {
            continue;
        }
        let q = quadratic_form(m, n, &c)?;
        if q > threshold * norm2 && pos.is_none() {
            pos = Some((c, q));
        } else if q < -threshold * norm2 && neg.is_none() {
            neg = Some((c, q));
        }
        if let (Some(p), Some(d)) = (&pos, &neg) {
            return Ok(Some(Witness {
                positive: p.0.clone(),
                positive_form: p.1,
                negative: d.0.clone(),
                negative_form: d.1,
                trials_used: t + 1,
            }));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn random_symmetric(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = rng.random_range(-5.0..5.0);
                m[i * n + j] = v;
                m[j * n + i] = v;
            }
        }
        m
    }

    #[test]
    fn analytic_spectra() {
        let id = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        assert_eq!(eigen_symmetric(&id, 3).unwrap().values, vec![1.0, 1.0, 1.0]);
        let e = eigen_symmetric(&[2.0, 1.0, 1.0, 2.0], 2).unwrap().values;
        assert!((e[0] - 3.0).abs() < 1e-14 && (e[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn reconstruction_and_trace() {
        for seed in 0..5 {
            let n = 8;
            let m = random_symmetric(n, seed);
            let e = eigen_symmetric(&m, n).unwrap();
            for i in 0..n {
                for j in 0..n {
                    let r: f64 = (0..n)
                        .map(|k| e.vectors[i * n + k] * e.values[k] * e.vectors[j * n + k])
                        .sum();
                    assert!((r - m[i * n + j]).abs() < 1e-9);
                }
            }
            let trace: f64 = (0..n).map(|i| m[i * n + i]).sum();
            assert!((e.values.iter().sum::<f64>() - trace).abs() < 1e-9);
            assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn rejects_asymmetric() {
        assert!(matches!(
            eigen_symmetric(&[1.0, 2.0, 2.5, 1.0], 2),
            Err(Error::NotSymmetric { row: 0, col: 1 })
        ));
        assert!(GramMatrix::from_rows(vec![vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
    }

    #[test]
    fn delta_p_formula() {
        let r = spectrum_report(vec![3.0, 1.0, -4.0], 4.0, DEFAULT_TAU);
        assert_eq!(r.pev_count, 2);
        assert_eq!(r.delta_p, 25.0);
        assert_eq!(r.verdict, Verdict::Indefinite);
        let r = spectrum_report(vec![5.0, -1.0, -4.0], 5.0, DEFAULT_TAU);
        assert_eq!(
            (r.pev_count, r.delta_p, r.verdict),
            (1, 0.0, Verdict::CpdCandidate)
        );
        let r = spectrum_report(vec![2.0, 1.0, 1e-15], 2.0, DEFAULT_TAU);
        assert_eq!(r.verdict, Verdict::Psd);
        let r = spectrum_report(vec![-2.0, -1.0], 2.0, DEFAULT_TAU);
        assert_eq!(r.verdict, Verdict::Nsd);
    }

    #[test]
    fn quadratic_form_basics() {
        let m = [1.0, 2.0, 2.0, 3.0];
        assert_eq!(quadratic_form(&m, 2, &[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(quadratic_form(&m, 2, &[1.0, 1.0]).unwrap(), 8.0);
        assert!(matches!(
            quadratic_form(&m, 2, &[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn no_positive_witness_on_negative_ones() {
        let n = 5;
        let g = GramMatrix::from_rows(vec![vec![-1.0; n]; n]).unwrap();
        assert!(indefiniteness_witness_search(&g, 2000, DEFAULT_TAU, 3)
            .unwrap()
            .is_none());
    }

    #[test]
    fn witness_on_indefinite_matrix() {
        // diag(1, −1, 0) shifted: zero-sum vectors see both signs.
        let g = GramMatrix::from_rows(vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, -1.0, 0.0],
            vec![0.0, 0.0, 0.0],
        ])
        .unwrap();
        let w = indefiniteness_witness_search(&g, 100, DEFAULT_TAU, 1)
            .unwrap()
            .unwrap();
        assert!(w.positive_form > 0.0 && w.negative_form < 0.0);
        assert!(w.positive.iter().sum::<f64>().abs() < 1e-12);
        assert!(w.negative.iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn build_mirrors_upper_triangle() {
        let g = GramMatrix::build_with(4, |i, j| Ok((i * 10 + j) as f64)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(g.get(i, j), (i.min(j) * 10 + i.max(j)) as f64);
            }
        }
        let single = GramMatrix::build_with(1, |_, _| Ok(7.0)).unwrap();
        assert_eq!(single.rows(), vec![vec![7.0]]);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.csv");
        let mut g =
            GramMatrix::from_rows(vec![vec![0.1, 1e-300], vec![1e-300, 2.0 / 3.0]]).unwrap();
        g.kernel = "erp".into();
        g.params = serde_json::json!({"g": [0.0]});
        g.items = vec!["a".into(), "b".into()];
        g.write_csv(&path).unwrap();
        let back = GramMatrix::read_csv(&path).unwrap();
        assert_eq!(back, g);
        let side: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(sidecar_path(&path)).unwrap()).unwrap();
        assert_eq!(side["n"], 2);
        assert_eq!(side["kernel"], "erp");
    }

    proptest! {
        #[test]
        fn permutation_invariant_spectrum(seed in 0u64..1000, n in 2usize..7) {
            let m = random_symmetric(n, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
            let mut perm: Vec<usize> = (0..n).collect();
            rand::seq::SliceRandom::shuffle(&mut perm[..], &mut rng);
            let pm: Vec<f64> = (0..n * n).map(|k| m[perm[k / n] * n + perm[k % n]]).collect();
            let a = eigen_symmetric(&m, n).unwrap().values;
            let b = eigen_symmetric(&pm, n).unwrap().values;
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }
    }
}
