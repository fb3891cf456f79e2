mod input;

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use twk::classify::{
    knn_protocol, loo_metaparam_search, svm_protocol, GridSpec, ResultRow, SvmKernel, DEFAULT_SEED,
    RESULTS_HEADER,
};
use twk::gram::{
    build_gram, definiteness_report, indefiniteness_witness_search, sidecar_path, GramMatrix,
    DEFAULT_TAU,
};
use twk::kernel::{kernel_value, normalized_kernel, stwk_me_log};
use twk::{
    verify, Boundary, CostParams, DistanceKind, Error, KernelFamily, KernelId, KernelParams,
    Measure, Norm, Result,
};

#[derive(Parser, Debug)]
#[command(
    name = "twk",
    version,
    about = "Elastic distances and time-warp kernels for time series"
)]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the distance between two series (kernels: the induced distance).
    Distance {
        #[arg(allow_hyphen_values = true)]
        a: String,
        #[arg(allow_hyphen_values = true)]
        b: String,
        #[command(flatten)]
        m: MeasureArgs,
    },
    /// Print a kernel value between two series.
    Kernel {
        #[arg(allow_hyphen_values = true)]
        a: String,
        #[arg(allow_hyphen_values = true)]
        b: String,
        #[command(flatten)]
        m: MeasureArgs,
        /// Print k(A,B) / sqrt(k(A,A) k(B,B)).
        #[arg(long)]
        normalized: bool,
        /// Print the natural log (multiplicative kernels only).
        #[arg(long, conflicts_with = "normalized")]
        log: bool,
    },
    /// Build a Gram matrix, write it as CSV with a JSON sidecar, and report its spectrum.
    Gram {
        /// appendix-a:{lev,dtw,three-digit}, synth:SEED, or a UCR file.
        #[arg(long)]
        items: String,
        #[command(flatten)]
        m: MeasureArgs,
        /// Gram CSV path; the sidecar goes to PATH.json and the report to PATH.report.json.
        #[arg(long)]
        out: PathBuf,
        /// Positivity threshold relative to max|G|.
        #[arg(long, default_value_t = DEFAULT_TAU)]
        tau: f64,
        /// Random zero-sum trials for an indefiniteness witness (0 = skip).
        #[arg(long, default_value_t = 0)]
        witness_trials: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Run 1-NN (leave-one-out selection) or SVM (cross-validated grid search).
    Classify {
        #[arg(long, value_enum, default_value_t = Classifier::Knn)]
        classifier: Classifier,
        /// SVM kernel: an RBF over the dissimilarity, or the normalised kernel itself.
        #[arg(long, value_enum, default_value_t = SvmMode::Rbf)]
        svm_kernel: SvmMode,
        #[arg(long)]
        train: Option<PathBuf>,
        #[arg(long)]
        test: Option<PathBuf>,
        /// Directory holding NAME/NAME_TRAIN and NAME/NAME_TEST.
        #[arg(long)]
        ucr_dir: Option<PathBuf>,
        /// Dataset name, or synth:SEED for the built-in synthetic problem.
        #[arg(long)]
        dataset: Option<String>,
        #[command(flatten)]
        m: MeasureArgs,
        /// JSON file with grid overrides (keys: C, sigma2, twip_nu, twed_nu, twed_lambda, erp_g, inv_nu_prime).
        #[arg(long)]
        grid: Option<PathBuf>,
        /// Fix C instead of searching the grid.
        #[arg(long = "C")]
        c: Option<f64>,
        /// Fix sigma^2 instead of searching the grid.
        #[arg(long)]
        sigma2: Option<f64>,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Append the result row to this CSV (created with a header if missing).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the trained SVM as JSON.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Run the built-in fixture and property checks.
    Verify {
        /// Restrict to a group (repeatable): appendix-a, fig2, oracle, psd, euclid-limit, metric, delta-p.
        #[arg(long)]
        only: Vec<String>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Classifier {
    Knn,
    Svm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SvmMode {
    Rbf,
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BoundaryArg {
    Anchored,
    Free,
}

#[derive(Args, Debug, Clone)]
struct MeasureArgs {
    /// lev, dtw, erp, twed, ed, twip1, twip2.
    #[arg(long, conflicts_with = "kernel")]
    measure: Option<String>,
    /// stwk_lev, stwk_dtw, stwk_erp, stwk_twed, twip1, twip2, euclid_dot.
    #[arg(long)]
    kernel: Option<String>,
    /// TWED or TWIP stiffness.
    #[arg(long)]
    nu: Option<f64>,
    /// Stiffness of the exponentiated kernels.
    #[arg(long = "nu-prime")]
    nu_prime: Option<f64>,
    /// TWED gap penalty.
    #[arg(long)]
    lambda: Option<f64>,
    /// ERP gap value, one number or one per dimension (comma-separated).
    #[arg(long, allow_hyphen_values = true)]
    g: Option<String>,
    /// Order of the local Lp distance (1 or 2).
    #[arg(long, default_value_t = 1)]
    norm: u32,
    /// Sakoe-Chiba half-width.
    #[arg(long)]
    corridor: Option<usize>,
    /// Boundary of the ERP and TWED recursions.
    #[arg(long, value_enum, default_value_t = BoundaryArg::Anchored)]
    boundary: BoundaryArg,
}

enum Selected {
    Distance(DistanceKind),
    Kernel(KernelFamily),
}

impl MeasureArgs {
    fn selected(&self) -> Result<Selected> {
        match (&self.measure, &self.kernel) {
            (Some(m), None) => DistanceKind::parse(m)
                .map(Selected::Distance)
                .ok_or_else(|| Error::InvalidParam(format!("unknown measure {m:?}"))),
            (None, Some(k)) => KernelFamily::parse(k)
                .map(Selected::Kernel)
                .ok_or_else(|| Error::InvalidParam(format!("unknown kernel {k:?}"))),
            _ => Err(Error::InvalidParam(
                "give one of --measure or --kernel".into(),
            )),
        }
    }

    fn cost_params(&self) -> Result<CostParams> {
        let g = match &self.g {
            None => Vec::new(),
            Some(s) => s
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidParam(format!("bad --g value {t:?}")))
                })
                .collect::<Result<Vec<f64>>>()?,
        };
        let defaults = CostParams::default();
        let p = CostParams {
            norm: Norm::from_order(self.norm)?,
            g,
            lambda: self.lambda.unwrap_or(defaults.lambda),
            nu: self.nu.unwrap_or(defaults.nu),
            corridor: self.corridor,
            boundary: match self.boundary {
                BoundaryArg::Anchored => Boundary::Anchored,
                BoundaryArg::Free => Boundary::Free,
            },
        };
        p.validate()?;
        Ok(p)
    }

    fn kernel_params(&self) -> Result<KernelParams> {
        let base = self.cost_params()?;
        Ok(KernelParams {
            nu_prime: self.nu_prime.unwrap_or(1.0),
            nu: base.nu,
            xi: None,
            base,
        })
    }

    fn build(&self) -> Result<Measure> {
        Ok(match self.selected()? {
            Selected::Distance(k) => Measure::distance(k, self.cost_params()?),
            Selected::Kernel(f) => Measure::kernel(KernelId::new(f, self.kernel_params()?)),
        })
    }

    fn is_lev(&self) -> bool {
        matches!(
            self.selected(),
            Ok(Selected::Distance(DistanceKind::Levenshtein))
        ) || matches!(self.selected(), Ok(Selected::Kernel(KernelFamily::StwkLev)))
    }
}

fn fmt_value(v: f64) -> String {
    format!("{v}")
}

fn cmd_distance(a: &str, b: &str, m: &MeasureArgs) -> Result<()> {
    let lev = m.is_lev();
    let (a, b) = (input::parse_series(a, lev)?, input::parse_series(b, lev)?);
    println!("{}", fmt_value(m.build()?.dissimilarity(&a, &b)?));
    Ok(())
}

fn cmd_kernel(a: &str, b: &str, m: &MeasureArgs, normalized: bool, log: bool) -> Result<()> {
    let Selected::Kernel(family) = m.selected()? else {
        return Err(Error::InvalidParam("kernel needs --kernel".into()));
    };
    let lev = m.is_lev();
    let (a, b) = (input::parse_series(a, lev)?, input::parse_series(b, lev)?);
    let id = KernelId::new(family, m.kernel_params()?);
    let v = if log {
        stwk_me_log(&a, &b, &id)?
    } else if normalized {
        normalized_kernel(&a, &b, &id)?
    } else {
        kernel_value(&a, &b, &id)?
    };
    println!("{}", fmt_value(v));
    Ok(())
}

fn report_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".report.json");
    PathBuf::from(s)
}

fn cmd_gram(
    items: &str,
    m: &MeasureArgs,
    out: &Path,
    tau: f64,
    witness_trials: usize,
    seed: u64,
) -> Result<()> {
    let measure = m.build()?;
    let (series, ids) = input::parse_items(items)?;
    let kernel = measure.name();
    let params = measure.params_json();

    let cached = if out.exists() && sidecar_path(out).exists() {
        GramMatrix::read_csv(out)
            .ok()
            .filter(|g| g.same_provenance(kernel, &params, &ids))
    } else {
        None
    };
    let gram = match cached {
        Some(g) => {
            eprintln!("cache hit: reusing {}", out.display());
            g
        }
        None => {
            let g = build_gram(&series, &measure)?.with_items(ids);
            g.write_csv(out)?;
            g
        }
    };

    let report = definiteness_report(&gram, tau)?;
    let mut json = serde_json::to_value(&report)?;
    if witness_trials > 0 && gram.n() >= 2 {
        let w = indefiniteness_witness_search(&gram, witness_trials, tau, seed)?;
        json["witness"] = serde_json::to_value(&w)?;
    }
    fs::write(report_path(out), serde_json::to_string_pretty(&json)?)?;
    println!("n = {}", gram.n());
    println!("#Pev = {}", report.pev_count);
    println!("delta_p = {}", report.delta_p);
    println!("verdict = {}", report.verdict.label());
    println!(
        "eigenvalues = [{}]",
        report
            .eigenvalues
            .iter()
            .map(|e| format!("{e:.6e}"))
            .collect::<Vec<_>>()
            .join(", ")
    );
    if witness_trials > 0 {
        println!(
            "witness = {}",
            if json["witness"].is_null() {
                "none"
            } else {
                "found"
            }
        );
    }
    Ok(())
}

/// Candidates for a leave-one-out scan: flags given explicitly pin a
/// parameter, the rest come from the grid.
fn loo_candidates(m: &MeasureArgs, grid: &GridSpec) -> Result<Vec<Measure>> {
    let base = m.cost_params()?;
    let mut g = grid.clone();
    if m.nu.is_some() {
        g.twed_nu = vec![base.nu];
        g.twip_nu = vec![base.nu];
    }
    if m.lambda.is_some() {
        g.twed_lambda = vec![base.lambda];
    }
    if m.g.is_some() {
        // Multivariate gap vectors are taken verbatim.
        return Ok(vec![Measure::distance(
            match m.selected()? {
                Selected::Distance(k) => k,
                Selected::Kernel(_) => DistanceKind::Erp,
            },
            base,
        )]);
    }
    Ok(match m.selected()? {
        Selected::Distance(k) => g.distance_candidates(k, &base),
        Selected::Kernel(f) => {
            let mut kp = m.kernel_params()?;
            if m.nu_prime.is_some() {
                g.inv_nu_prime = vec![1.0 / kp.nu_prime];
            }
            kp.nu = base.nu;
            g.kernel_candidates(f, &kp)
        }
    })
}

/// Cost parameters of the distance underlying a kernel family, picked by
/// leave-one-out 1-NN unless pinned by flags.
fn base_costs_by_loo(
    m: &MeasureArgs,
    grid: &GridSpec,
    train: &twk::LabeledDataset,
    kind: DistanceKind,
) -> Result<CostParams> {
    let base = m.cost_params()?;
    let pinned = match kind {
        DistanceKind::Erp => m.g.is_some(),
        DistanceKind::Twed => m.nu.is_some() && m.lambda.is_some(),
        DistanceKind::Twip1 | DistanceKind::Twip2 => m.nu.is_some(),
        _ => true,
    };
    if pinned {
        return Ok(base);
    }
    let mut g = grid.clone();
    if m.nu.is_some() {
        g.twed_nu = vec![base.nu];
    }
    if m.lambda.is_some() {
        g.twed_lambda = vec![base.lambda];
    }
    match loo_metaparam_search(train, &g.distance_candidates(kind, &base))?.best {
        Measure::Distance(d) => Ok(d.params),
        Measure::Kernel(_) => Ok(base),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_classify(
    classifier: Classifier,
    svm_mode: SvmMode,
    train: Option<&Path>,
    test: Option<&Path>,
    ucr_dir: Option<&Path>,
    dataset: Option<&str>,
    m: &MeasureArgs,
    grid_path: Option<&Path>,
    c: Option<f64>,
    sigma2: Option<f64>,
    folds: usize,
    seed: u64,
    out: Option<&Path>,
    model_path: Option<&Path>,
) -> Result<()> {
    let (name, train, test) = input::load_split(train, test, ucr_dir, dataset)?;
    let mut grid = match grid_path {
        Some(p) => serde_json::from_str::<GridSpec>(&fs::read_to_string(p)?)?,
        None => GridSpec::full(),
    };
    if let Some(c) = c {
        grid.c = vec![c];
    }
    if let Some(s) = sigma2 {
        grid.sigma2 = vec![s];
    }
    grid.validate()?;

    let row = match classifier {
        Classifier::Knn => {
            let outcome = knn_protocol(&train, &test, &loo_candidates(m, &grid)?)?;
            ResultRow {
                dataset: name,
                classifier: "1nn".into(),
                measure: outcome.loo.best.name().into(),
                params: outcome.loo.best.params_json(),
                train_error: outcome.loo.error,
                cv_error: None,
                test_error: outcome.test_error,
            }
        }
        Classifier::Svm => {
            let measures = match m.selected()? {
                Selected::Distance(kind) => {
                    vec![Measure::distance(
                        kind,
                        base_costs_by_loo(m, &grid, &train, kind)?,
                    )]
                }
                Selected::Kernel(family) => {
                    let mut kp = m.kernel_params()?;
                    let underlying = match family {
                        KernelFamily::StwkErp => Some(DistanceKind::Erp),
                        KernelFamily::StwkTwed => Some(DistanceKind::Twed),
                        KernelFamily::Twip1 => Some(DistanceKind::Twip1),
                        KernelFamily::Twip2 => Some(DistanceKind::Twip2),
                        _ => None,
                    };
                    if let Some(kind) = underlying {
                        kp.base = base_costs_by_loo(m, &grid, &train, kind)?;
                        kp.nu = kp.base.nu;
                    }
                    let mut g = grid.clone();
                    if m.nu_prime.is_some() {
                        g.inv_nu_prime = vec![1.0 / kp.nu_prime];
                    }
                    if family.is_multiplicative() {
                        g.kernel_candidates(family, &kp)
                    } else {
                        vec![Measure::kernel(KernelId::new(family, kp))]
                    }
                }
            };
            let mode = match svm_mode {
                SvmMode::Rbf => SvmKernel::Rbf,
                SvmMode::Direct => SvmKernel::Direct,
            };
            let outcome = svm_protocol(
                &train,
                &test,
                &measures,
                mode,
                &grid.c,
                &grid.sigma2,
                folds,
                seed,
            )?;
            if !outcome.model.all_converged() || outcome.cv.nonconverged > 0 {
                eprintln!(
                    "warning: SMO hit its iteration cap ({} machines during CV, {} in the final model)",
                    outcome.cv.nonconverged,
                    outcome.model.machines.iter().filter(|m| !m.converged).count()
                );
            }
            if let Some(p) = model_path {
                fs::write(p, outcome.model.to_json()?)?;
            }
            let mut params = outcome.cv.measure.params_json();
            params["C"] = outcome.cv.c.into();
            match mode {
                SvmKernel::Rbf => params["sigma2"] = outcome.cv.sigma2.into(),
                SvmKernel::Direct => params["svm_kernel"] = "direct".into(),
            }
            ResultRow {
                dataset: name,
                classifier: "svm".into(),
                measure: outcome.cv.measure.name().into(),
                params,
                train_error: outcome.train_error,
                cv_error: Some(outcome.cv.cv_error),
                test_error: outcome.test_error,
            }
        }
    };

    let line = row.to_csv_line();
    match out {
        Some(p) => {
            let fresh = !p.exists() || fs::metadata(p)?.len() == 0;
            let mut f = OpenOptions::new().create(true).append(true).open(p)?;
            if fresh {
                writeln!(f, "{RESULTS_HEADER}")?;
            }
            writeln!(f, "{line}")?;
            println!("{RESULTS_HEADER}\n{line}");
        }
        None => println!("{RESULTS_HEADER}\n{line}"),
    }
    Ok(())
}

fn cmd_verify(only: &[String], json: bool) -> Result<bool> {
    for o in only {
        if !verify::GROUPS.contains(&o.as_str()) {
            return Err(Error::InvalidParam(format!(
                "unknown group {o:?}; expected one of {}",
                verify::GROUPS.join(", ")
            )));
        }
    }
    let report = verify::run(only)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{}", report.table());
        let failed = report
            .checks
            .iter()
            .filter(|c| !c.passed && c.gating)
            .count();
        let known = report
            .checks
            .iter()
            .filter(|c| !c.passed && !c.gating)
            .count();
        println!(
            "{} checks, {failed} failed, {known} known deviations",
            report.checks.len()
        );
    }
    Ok(report.ok())
}

fn run(cli: Cli) -> Result<bool> {
    match &cli.command {
        Command::Distance { a, b, m } => cmd_distance(a, b, m).map(|_| true),
        Command::Kernel {
            a,
            b,
            m,
            normalized,
            log,
        } => cmd_kernel(a, b, m, *normalized, *log).map(|_| true),
        Command::Gram {
            items,
            m,
            out,
            tau,
            witness_trials,
            seed,
        } => cmd_gram(items, m, out, *tau, *witness_trials, *seed).map(|_| true),
        Command::Classify {
            classifier,
            svm_kernel,
            train,
            test,
            ucr_dir,
            dataset,
            m,
            grid,
            c,
            sigma2,
            folds,
            seed,
            out,
            model,
        } => cmd_classify(
            *classifier,
            *svm_kernel,
            train.as_deref(),
            test.as_deref(),
            ucr_dir.as_deref(),
            dataset.as_deref(),
            m,
            grid.as_deref(),
            *c,
            *sigma2,
            *folds,
            *seed,
            out.as_deref(),
            model.as_deref(),
        )
        .map(|_| true),
        Command::Verify { only, json } => cmd_verify(only, *json),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                eprintln!("  caused by: {s}");
                src = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
