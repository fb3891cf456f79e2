//! 1-NN with leave-one-out parameter selection, and one-vs-one SVMs over
//! Gaussian RBF kernels with stratified cross-validated grid search.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datasets::LabeledDataset;
use crate::distance::CostParams;
use crate::error::{Error, Result};
use crate::kernel::{KernelFamily, KernelId, KernelParams};
use crate::measure::{DistanceKind, Measure};
use crate::series::TimeSeries;
use crate::smo::{smo_train_binary, SmoConfig};

/// Default seed for fold assignment.
pub const DEFAULT_SEED: u64 = 20_240_601;

/// `exp(−δ² / (2σ²))`.
pub fn rbf_kernel(d: f64, sigma2: f64) -> f64 {
    (-d * d / (2.0 * sigma2)).exp()
}

/// `100 · wrong / total`.
pub fn error_rate(predicted: &[usize], truth: &[usize]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    let wrong = predicted.iter().zip(truth).filter(|(p, t)| p != t).count();
    100.0 * wrong as f64 / truth.len() as f64
}

/// Index of the smallest entry, lowest index on ties, skipping `skip`.
fn argmin(row: &[f64], skip: Option<usize>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, &d) in row.iter().enumerate() {
        if Some(j) == skip {
            continue;
        }
        if best.is_none_or(|(_, b)| d < b) {
            best = Some((j, d));
        }
    }
    best.map(|(j, _)| j)
}

pub fn knn1_classify(
    train: &LabeledDataset,
    query: &TimeSeries,
    measure: &Measure,
) -> Result<usize> {
    if train.is_empty() {
        return Err(Error::InvalidParam("empty training set".into()));
    }
    let row = train
        .items
        .iter()
        .map(|x| measure.dissimilarity(query, x))
        .collect::<Result<Vec<f64>>>()?;
    Ok(train.labels[argmin(&row, None).unwrap()])
}

pub fn knn1_predict(
    train: &LabeledDataset,
    test: &[TimeSeries],
    measure: &Measure,
) -> Result<Vec<usize>> {
    if train.is_empty() {
        return Err(Error::InvalidParam("empty training set".into()));
    }
    let n = train.len();
    let d = measure.dissimilarity_matrix(test, &train.items)?;
    Ok(d.chunks(n)
        .map(|row| train.labels[argmin(row, None).unwrap()])
        .collect())
}

/// Leave-one-out 1-NN error (percent) from a square dissimilarity matrix.
pub fn loo_error(d: &[f64], labels: &[usize]) -> f64 {
    let n = labels.len();
    if n < 2 {
        return 0.0;
    }
    let pred: Vec<usize> = (0..n)
        .map(|i| labels[argmin(&d[i * n..(i + 1) * n], Some(i)).unwrap()])
        .collect();
    error_rate(&pred, labels)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LooResult {
    pub best: Measure,
    pub error: f64,
    pub scores: Vec<f64>,
}

/// TWED-style parameters used by the tie rule.
fn twed_key(m: &Measure) -> Option<(f64, f64)> {
    match m {
        Measure::Distance(d) if d.kind == DistanceKind::Twed => {
            Some((d.params.nu, d.params.lambda))
        }
        Measure::Kernel(k) if k.family == KernelFamily::StwkTwed => {
            Some((k.params.base.nu, k.params.base.lambda))
        }
        _ => None,
    }
}

/// Exhaustive LOO 1-NN scan over `candidates`. Among minimal-error TWED
/// candidates the highest ν wins, then the highest λ; otherwise the first
/// in grid order.
pub fn loo_metaparam_search(train: &LabeledDataset, candidates: &[Measure]) -> Result<LooResult> {
    if candidates.is_empty() {
        return Err(Error::EmptyParams("empty parameter grid".into()));
    }
    if train.len() < 2 {
        return Err(Error::InvalidParam(
            "leave-one-out needs at least 2 items".into(),
        ));
    }
    let scores = candidates
        .iter()
        .map(|m| {
            Ok(loo_error(
                &m.dissimilarity_matrix(&train.items, &train.items)?,
                &train.labels,
            ))
        })
        .collect::<Result<Vec<f64>>>()?;
    let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let mut best = scores.iter().position(|&s| s == min).unwrap();
    for (i, m) in candidates.iter().enumerate() {
        if scores[i] != min {
            continue;
        }
        if let (Some((nu, lambda)), Some((bnu, blambda))) =
            (twed_key(m), twed_key(&candidates[best]))
        {
            if nu > bnu || (nu == bnu && lambda > blambda) {
                best = i;
            }
        }
    }
    Ok(LooResult {
        best: candidates[best].clone(),
        error: min,
        scores,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BinaryMachine {
    /// Class voted for by a non-negative decision value.
    pub positive: usize,
    pub negative: usize,
    /// Indices into the training set.
    pub support: Vec<usize>,
    /// `α_i · y_i` per support vector.
    pub coef: Vec<f64>,
    pub bias: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// How a measure becomes the SVM kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SvmKernel {
    /// `exp(-δ²/(2σ²))` over the measure's dissimilarity.
    #[default]
    Rbf,
    /// The kernel itself, cosine-normalised for the multiplicative
    /// families. Kernel measures only; `σ²` is unused.
    Direct,
}

impl SvmKernel {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "rbf" => Some(Self::Rbf),
            "direct" => Some(Self::Direct),
            _ => None,
        }
    }
}

/// Kernel values between `rows` and `cols`, row-major.
pub fn svm_kernel_matrix(
    measure: &Measure,
    mode: SvmKernel,
    sigma2: f64,
    rows: &[TimeSeries],
    cols: &[TimeSeries],
) -> Result<Vec<f64>> {
    match (mode, measure) {
        (SvmKernel::Rbf, _) => {
            if !(sigma2 > 0.0) {
                return Err(Error::InvalidParam(format!(
                    "sigma2 = {sigma2} must be > 0"
                )));
            }
            Ok(rbf_matrix(
                &measure.dissimilarity_matrix(rows, cols)?,
                sigma2,
            ))
        }
        (SvmKernel::Direct, Measure::Kernel(k)) if k.family.is_multiplicative() => Ok(measure
            .dissimilarity_matrix(rows, cols)?
            .into_iter()
            .map(|d| 1.0 - 0.5 * d * d)
            .collect()),
        (SvmKernel::Direct, Measure::Kernel(_)) => {
            let nc = cols.len();
            (0..rows.len() * nc)
                .into_par_iter()
                .map(|idx| measure.value(&rows[idx / nc], &cols[idx % nc]))
                .collect()
        }
        (SvmKernel::Direct, Measure::Distance(_)) => Err(Error::InvalidParam(
            "direct SVM kernels need a kernel measure".into(),
        )),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SvmModel {
    pub measure: Measure,
    #[serde(default)]
    pub kernel_mode: SvmKernel,
    #[serde(rename = "C")]
    pub c: f64,
    pub sigma2: f64,
    pub classes: Vec<usize>,
    pub machines: Vec<BinaryMachine>,
}

impl SvmModel {
    pub fn all_converged(&self) -> bool {
        self.machines.iter().all(|m| m.converged)
    }

    /// Majority vote from kernel values against every training item; ties go
    /// to the lowest class id.
    pub fn predict_row(&self, k_row: &[f64]) -> usize {
        let max_class = self.classes.iter().copied().max().unwrap_or(0);
        let mut votes = vec![0usize; max_class + 1];
        for m in &self.machines {
            let f: f64 = m
                .support
                .iter()
                .zip(&m.coef)
                .map(|(&i, c)| c * k_row[i])
                .sum::<f64>()
                + m.bias;
            votes[if f >= 0.0 { m.positive } else { m.negative }] += 1;
        }
        let top = votes.iter().copied().max().unwrap_or(0);
        self.classes
            .iter()
            .copied()
            .filter(|&c| votes[c] == top)
            .min()
            .unwrap_or(0)
    }

    pub fn predict(&self, train: &LabeledDataset, test: &[TimeSeries]) -> Result<Vec<usize>> {
        let k = svm_kernel_matrix(
            &self.measure,
            self.kernel_mode,
            self.sigma2,
            test,
            &train.items,
        )?;
        Ok(k.chunks(train.len().max(1))
            .map(|row| self.predict_row(row))
            .collect())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// One-vs-one machines on a precomputed `n × n` kernel matrix.
pub fn svm_train_gram(
    k: &[f64],
    labels: &[usize],
    c: f64,
) -> Result<(Vec<usize>, Vec<BinaryMachine>)> {
    let n = labels.len();
    let mut classes: Vec<usize> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::InvalidParam(
            "SVM training needs at least 2 classes".into(),
        ));
    }
    let mut machines = Vec::new();
    for (a, &pos) in classes.iter().enumerate() {
        for &neg in &classes[a + 1..] {
            let idx: Vec<usize> = (0..n)
                .filter(|&i| labels[i] == pos || labels[i] == neg)
                .collect();
            let m = idx.len();
            let y: Vec<f64> = idx
                .iter()
                .map(|&i| if labels[i] == pos { 1.0 } else { -1.0 })
                .collect();
            let mut sub = vec![0.0; m * m];
            for (r, &i) in idx.iter().enumerate() {
                for (s, &j) in idx.iter().enumerate() {
                    sub[r * m + s] = k[i * n + j];
                }
            }
            let sol = smo_train_binary(&sub, &y, &SmoConfig::new(c))?;
            let (support, coef) = idx
                .iter()
                .zip(&sol.alpha)
                .zip(&y)
                .filter(|((_, a), _)| **a > 0.0)
                .map(|((&i, a), y)| (i, a * y))
                .unzip();
            machines.push(BinaryMachine {
                positive: pos,
                negative: neg,
                support,
                coef,
                bias: sol.bias,
                converged: sol.converged,
                iterations: sol.iterations,
            });
        }
    }
    Ok((classes, machines))
}

fn rbf_matrix(d: &[f64], sigma2: f64) -> Vec<f64> {
    d.iter().map(|&x| rbf_kernel(x, sigma2)).collect()
}

pub fn svm_train(
    train: &LabeledDataset,
    measure: &Measure,
    c: f64,
    sigma2: f64,
) -> Result<SvmModel> {
    svm_train_with(train, measure, SvmKernel::Rbf, c, sigma2)
}

pub fn svm_train_with(
    train: &LabeledDataset,
    measure: &Measure,
    mode: SvmKernel,
    c: f64,
    sigma2: f64,
) -> Result<SvmModel> {
    let k = svm_kernel_matrix(measure, mode, sigma2, &train.items, &train.items)?;
    let (classes, machines) = svm_train_gram(&k, &train.labels, c)?;
    Ok(SvmModel {
        measure: measure.clone(),
        kernel_mode: mode,
        c,
        sigma2,
        classes,
        machines,
    })
}

/// Stratified folds: each class is shuffled with the seed and dealt
/// round-robin, continuing where the previous class stopped. When a class
/// has fewer members than `k`, `k` drops to the smallest class count.
pub fn stratified_folds(labels: &[usize], k: usize, seed: u64) -> Vec<Vec<usize>> {
    let n_classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &l) in labels.iter().enumerate() {
        by_class[l].push(i);
    }
    by_class.retain(|c| !c.is_empty());
    let min_count = by_class.iter().map(Vec::len).min().unwrap_or(0);
    let k = k.min(min_count).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for members in &mut by_class {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            folds[next].push(i);
            next = (next + 1) % k;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    folds
}

/// Meta-parameter grids. Every field defaults to the full grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    #[serde(rename = "C")]
    pub c: Vec<f64>,
    pub sigma2: Vec<f64>,
    /// Stiffness of the time-warp inner products.
    pub twip_nu: Vec<f64>,
    pub twed_nu: Vec<f64>,
    pub twed_lambda: Vec<f64>,
    pub erp_g: Vec<f64>,
    /// Values of `1/ν′` for the exponentiated kernels.
    pub inv_nu_prime: Vec<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::full()
    }
}

impl GridSpec {
    pub fn full() -> Self {
        let pow2: Vec<f64> = (-5..=10).map(|e| 2f64.powi(e)).collect();
        Self {
            c: pow2.clone(),
            sigma2: pow2,
            twip_nu: (-5..=2).rev().map(|e| 10f64.powi(e)).collect(),
            twed_nu: (-5..=0).map(|e| 10f64.powi(e)).collect(),
            twed_lambda: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            erp_g: (-300..=300).map(|i| i as f64 / 100.0).collect(),
            inv_nu_prime: (-5..=2).map(|e| 10f64.powi(e)).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, v: &[f64], positive: bool| -> Result<()> {
            if v.is_empty() {
                return Err(Error::EmptyParams(format!("grid {name}")));
            }
            if positive && v.iter().any(|&x| !(x > 0.0)) {
                return Err(Error::InvalidParam(format!("grid {name} must be positive")));
            }
            Ok(())
        };
        check("C", &self.c, true)?;
        check("sigma2", &self.sigma2, true)?;
        check("twip_nu", &self.twip_nu, false)?;
        check("twed_nu", &self.twed_nu, false)?;
        check("twed_lambda", &self.twed_lambda, false)?;
        check("erp_g", &self.erp_g, false)?;
        check("inv_nu_prime", &self.inv_nu_prime, true)
    }

    /// Distance candidates for a LOO scan, built on `base`.
    pub fn distance_candidates(&self, kind: DistanceKind, base: &CostParams) -> Vec<Measure> {
        let with = |f: &dyn Fn(&mut CostParams)| {
            let mut p = base.clone();
            f(&mut p);
            Measure::distance(kind, p)
        };
        match kind {
            DistanceKind::Erp => self
                .erp_g
                .iter()
                .map(|&g| with(&|p| p.g = vec![g]))
                .collect(),
            DistanceKind::Twed => self
                .twed_nu
                .iter()
                .flat_map(|&nu| self.twed_lambda.iter().map(move |&l| (nu, l)))
                .map(|(nu, l)| {
                    with(&|p| {
                        p.nu = nu;
                        p.lambda = l;
                    })
                })
                .collect(),
            DistanceKind::Twip1 | DistanceKind::Twip2 => self
                .twip_nu
                .iter()
                .map(|&nu| with(&|p| p.nu = nu))
                .collect(),
            _ => vec![Measure::distance(kind, base.clone())],
        }
    }

    /// Kernel candidates: `ν′` for the exponentiated kernels (other costs fixed
    /// by `base`), `ν` for the inner products.
    pub fn kernel_candidates(&self, family: KernelFamily, base: &KernelParams) -> Vec<Measure> {
        let with = |f: &dyn Fn(&mut KernelParams)| {
            let mut p = base.clone();
            f(&mut p);
            Measure::kernel(KernelId::new(family, p))
        };
        match family {
            f if f.is_multiplicative() => self
                .inv_nu_prime
                .iter()
                .map(|&inv| with(&|p| p.nu_prime = 1.0 / inv))
                .collect(),
            KernelFamily::Twip1 | KernelFamily::Twip2 => self
                .twip_nu
                .iter()
                .map(|&nu| with(&|p| p.nu = nu))
                .collect(),
            _ => vec![Measure::kernel(KernelId::new(family, base.clone()))],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvResult {
    pub measure: Measure,
    #[serde(rename = "C")]
    pub c: f64,
    pub sigma2: f64,
    /// Mean fold error, percent.
    pub cv_error: f64,
    pub folds: usize,
    /// Binary machines that hit the iteration cap at the chosen point.
    pub nonconverged: usize,
}

/// Grid search over measures × `C` × `σ²` with stratified k-fold CV.
/// Ties go to the smaller `C`, then the smaller `σ²`, then the earlier
/// measure. Direct kernels only scan the first `σ²`, which they ignore.
#[allow(clippy::too_many_arguments)]
pub fn crossval_grid_search(
    train: &LabeledDataset,
    measures: &[Measure],
    mode: SvmKernel,
    c_grid: &[f64],
    sigma2_grid: &[f64],
    folds: usize,
    seed: u64,
) -> Result<CvResult> {
    if measures.is_empty() || c_grid.is_empty() || sigma2_grid.is_empty() {
        return Err(Error::EmptyParams("empty SVM grid".into()));
    }
    let sigma2_grid = match mode {
        SvmKernel::Rbf => sigma2_grid,
        SvmKernel::Direct => &sigma2_grid[..1],
    };
    let fold_idx = stratified_folds(&train.labels, folds, seed);
    let k = fold_idx.len();
    if k < 2 {
        return Err(Error::InvalidParam(
            "cross-validation needs at least 2 members in every class".into(),
        ));
    }
    let n = train.len();
    let mut best: Option<(CvResult, usize)> = None;
    for (mi, m) in measures.iter().enumerate() {
        let d = match mode {
            SvmKernel::Rbf => m.dissimilarity_matrix(&train.items, &train.items)?,
            SvmKernel::Direct => svm_kernel_matrix(m, mode, 1.0, &train.items, &train.items)?,
        };
        let points: Vec<(f64, f64)> = sigma2_grid
            .iter()
            .flat_map(|&s| c_grid.iter().map(move |&c| (c, s)))
            .collect();
        let evaluated = points
            .par_iter()
            .map(|&(c, s2)| -> Result<(f64, f64, f64, usize)> {
                let kmat = match mode {
                    SvmKernel::Rbf => rbf_matrix(&d, s2),
                    SvmKernel::Direct => d.clone(),
                };
                let mut total = 0.0;
                let mut nonconv = 0;
                for held in &fold_idx {
                    let mut in_fold = vec![false; n];
                    held.iter().for_each(|&i| in_fold[i] = true);
                    let tr: Vec<usize> = (0..n).filter(|&i| !in_fold[i]).collect();
                    let m = tr.len();
                    let mut sub = vec![0.0; m * m];
                    for (r, &i) in tr.iter().enumerate() {
                        for (s, &j) in tr.iter().enumerate() {
                            sub[r * m + s] = kmat[i * n + j];
                        }
                    }
                    let labels: Vec<usize> = tr.iter().map(|&i| train.labels[i]).collect();
                    let (classes, machines) = svm_train_gram(&sub, &labels, c)?;
                    nonconv += machines.iter().filter(|m| !m.converged).count();
                    let model = SvmModel {
                        measure: Measure::distance(DistanceKind::Euclidean, CostParams::default()),
                        kernel_mode: mode,
                        c,
                        sigma2: s2,
                        classes,
                        machines,
                    };
                    let pred: Vec<usize> = held
                        .iter()
                        .map(|&q| {
                            let row: Vec<f64> = tr.iter().map(|&i| kmat[q * n + i]).collect();
                            model.predict_row(&row)
                        })
                        .collect();
                    let truth: Vec<usize> = held.iter().map(|&i| train.labels[i]).collect();
                    total += error_rate(&pred, &truth);
                }
                Ok((c, s2, total / k as f64, nonconv))
            })
            .collect::<Result<Vec<_>>>()?;
        for (c, s2, err, nonconv) in evaluated {
            let better = match &best {
                None => true,
                Some((b, bmi)) => {
                    (err, c, s2, mi).partial_cmp(&(b.cv_error, b.c, b.sigma2, *bmi))
                        == Some(std::cmp::Ordering::Less)
                }
            };
            if better {
                best = Some((
                    CvResult {
                        measure: m.clone(),
                        c,
                        sigma2: s2,
                        cv_error: err,
                        folds: k,
                        nonconverged: nonconv,
                    },
                    mi,
                ));
            }
        }
    }
    Ok(best.unwrap().0)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KnnOutcome {
    pub loo: LooResult,
    pub test_error: f64,
}

/// LOO selection on train, then 1-NN on test.
pub fn knn_protocol(
    train: &LabeledDataset,
    test: &LabeledDataset,
    candidates: &[Measure],
) -> Result<KnnOutcome> {
    let loo = loo_metaparam_search(train, candidates)?;
    let pred = knn1_predict(train, &test.items, &loo.best)?;
    Ok(KnnOutcome {
        test_error: error_rate(&pred, &test.labels),
        loo,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SvmOutcome {
    pub cv: CvResult,
    pub model: SvmModel,
    pub train_error: f64,
    pub test_error: f64,
}

/// CV grid search on train, refit on all of train, evaluate on both sets.
#[allow(clippy::too_many_arguments)]
pub fn svm_protocol(
    train: &LabeledDataset,
    test: &LabeledDataset,
    measures: &[Measure],
    mode: SvmKernel,
    c_grid: &[f64],
    sigma2_grid: &[f64],
    folds: usize,
    seed: u64,
) -> Result<SvmOutcome> {
    let cv = crossval_grid_search(train, measures, mode, c_grid, sigma2_grid, folds, seed)?;
    let model = svm_train_with(train, &cv.measure, mode, cv.c, cv.sigma2)?;
    let train_pred = model.predict(train, &train.items)?;
    let test_pred = model.predict(train, &test.items)?;
    Ok(SvmOutcome {
        train_error: error_rate(&train_pred, &train.labels),
        test_error: error_rate(&test_pred, &test.labels),
        cv,
        model,
    })
}

/// First line of every results file.
pub const RESULTS_HEADER: &str =
    "# twk-results v1\ndataset,classifier,measure,params,train_error,cv_error,test_error";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultRow {
    pub dataset: String,
    pub classifier: String,
    pub measure: String,
    pub params: serde_json::Value,
    /// LOO error for 1-NN, training-set error for SVM.
    pub train_error: f64,
    /// Only for SVM.
    pub cv_error: Option<f64>,
    pub test_error: f64,
}

impl ResultRow {
    pub fn to_csv_line(&self) -> String {
        let quote = |s: &str| format!("\"{}\"", s.replace('"', "\"\""));
        format!(
            "{},{},{},{},{:.2},{},{:.2}",
            quote(&self.dataset),
            self.classifier,
            self.measure,
            quote(&self.params.to_string()),
            self.train_error,
            self.cv_error.map(|e| format!("{e:.2}")).unwrap_or_default(),
            self.test_error
        )
    }
}
