//! Self-check suite behind `twk verify`: fixed fixtures, worked values,
//! oracle equivalence and property spot checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::datasets::{fixture_fig2, fixtures_appendix_a};
use crate::distance::{self, CostParams};
use crate::error::Result;
use crate::gram::{
    build_gram, definiteness_report, indefiniteness_witness_search, quadratic_form,
    spectrum_report, GramMatrix, DEFAULT_TAU,
};
use crate::kernel::{
    self, path_sum_oracle, KernelFamily, KernelId, KernelParams, Star, SummativeRecursion,
    TabulatedLocal,
};
use crate::measure::{DistanceKind, Measure};
use crate::series::TimeSeries;

pub const GROUPS: [&str; 7] = [
    "appendix-a",
    "fig2",
    "oracle",
    "psd",
    "euclid-limit",
    "metric",
    "delta-p",
];

/// Inner products of the `fixture_fig2` pair at ν = 0.1 from a separate
/// straightforward evaluation of the full recursion table.
pub const FIG2_TWIP1_FULL: f64 = 0.883_203_003_451_000_6;
pub const FIG2_TWIP2_FULL: f64 = 0.916_882_059_766_415_8;
/// Reference values listed for the same pair.
pub const FIG2_TWIP1_QUOTED: f64 = 0.459;
pub const FIG2_TWIP2_QUOTED: f64 = 0.475;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub group: &'static str,
    pub name: String,
    pub passed: bool,
    /// Known deviations are reported but do not affect the exit status.
    pub gating: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| c.passed || !c.gating)
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let status = match (c.passed, c.gating) {
                (true, _) => "PASS",
                (false, true) => "FAIL",
                (false, false) => "KNOWN",
            };
            out.push_str(&format!(
                "{status:<5} {:<12} {:<44} {}\n",
                c.group, c.name, c.detail
            ));
        }
        out
    }

    fn push(&mut self, group: &'static str, name: impl Into<String>, passed: bool, detail: String) {
        self.checks.push(Check {
            group,
            name: name.into(),
            passed,
            gating: true,
            detail,
        });
    }

    fn known(
        &mut self,
        group: &'static str,
        name: impl Into<String>,
        passed: bool,
        detail: String,
    ) {
        self.checks.push(Check {
            group,
            name: name.into(),
            passed,
            gating: false,
            detail,
        });
    }
}

/// Runs the selected groups (all when `only` is empty).
pub fn run(only: &[String]) -> Result<VerifyReport> {
    let want = |g: &str| only.is_empty() || only.iter().any(|o| o == g);
    let mut r = VerifyReport::default();
    if want("appendix-a") {
        appendix_a(&mut r)?;
    }
    if want("fig2") {
        fig2(&mut r)?;
    }
    if want("oracle") {
        oracle(&mut r)?;
    }
    if want("psd") {
        psd(&mut r)?;
    }
    if want("euclid-limit") {
        euclid_limit(&mut r)?;
    }
    if want("metric") {
        metric(&mut r)?;
    }
    if want("delta-p") {
        delta_p(&mut r);
    }
    Ok(r)
}

fn mismatches(g: &GramMatrix, expected: &[Vec<f64>]) -> usize {
    expected
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, &v)| (i, j, v)))
        .filter(|&(i, j, v)| g.get(i, j) != v)
        .count()
}

fn flat(m: &[Vec<f64>]) -> Vec<f64> {
    m.concat()
}

fn appendix_a(r: &mut VerifyReport) -> Result<()> {
    const G: &str = "appendix-a";
    let f = fixtures_appendix_a();

    let words: Vec<Vec<char>> = f.lev_strings.iter().map(|s| s.chars().collect()).collect();
    let lev = GramMatrix::build_with(words.len(), |i, j| {
        Ok(distance::levenshtein(&words[i], &words[j]))
    })?;
    let bad = mismatches(&lev, &f.m_lev);
    r.push(
        G,
        "lev matrix",
        bad == 0,
        format!("{bad} of 25 entries differ"),
    );
    let qc = quadratic_form(lev.entries(), 5, &f.lev_c)?;
    let qd = quadratic_form(lev.entries(), 5, &f.lev_d)?;
    r.push(
        G,
        "lev quadratic forms",
        (qc - 2.0 / 3.0).abs() <= 1e-12 && (qd + 4.0 / 3.0).abs() <= 1e-12,
        format!("C: {qc:.15}, D: {qd:.15} (expected 2/3, -4/3)"),
    );

    let erp = build_gram(
        &f.three_digit,
        &Measure::distance(DistanceKind::Erp, CostParams::default()),
    )?;
    let bad = mismatches(&erp, &f.m_erp);
    r.push(
        G,
        "erp matrix",
        bad == 0,
        format!("{bad} of 100 entries differ"),
    );
    let rep = definiteness_report(&erp, DEFAULT_TAU)?;
    let third_ok =
        rep.pev_count == 2 || (rep.pev_count == 3 && rep.eigenvalues[2] < 1e-12 * erp.max_abs());
    r.push(
        G,
        "erp #Pev",
        third_ok,
        format!(
            "#Pev = {}, spectrum head {:?}",
            rep.pev_count,
            &rep.eigenvalues[..3]
        ),
    );

    let twed_params = CostParams {
        nu: 1.0,
        lambda: 0.0,
        ..CostParams::default()
    };
    let twed = build_gram(
        &f.three_digit,
        &Measure::distance(DistanceKind::Twed, twed_params),
    )?;
    let bad = mismatches(&twed, &f.m_twed);
    r.push(
        G,
        "twed matrix",
        bad == 0,
        format!("{bad} of 100 entries differ"),
    );
    let rep = definiteness_report(&twed, DEFAULT_TAU)?;
    r.push(
        G,
        "twed #Pev",
        rep.pev_count == 2,
        format!("#Pev = {}", rep.pev_count),
    );

    let printed = flat(&f.m_dtw_printed);
    let qc = quadratic_form(&printed, 4, &f.dtw_c)?;
    let qd = quadratic_form(&printed, 4, &f.dtw_d)?;
    r.push(
        G,
        "printed dtw matrix quadratic forms",
        (qc - 2.0 / 32.0).abs() <= 1e-12 && (qd + 0.5).abs() <= 1e-12,
        format!("C: {qc}, D: {qd} (expected 2/32, -1/2)"),
    );
    let dtw = build_gram(
        &f.dtw_series,
        &Measure::distance(DistanceKind::Dtw, CostParams::default()),
    )?;
    let w = indefiniteness_witness_search(&dtw, 10_000, DEFAULT_TAU, 1)?;
    r.known(
        G,
        "computed dtw matrix witness",
        w.is_some(),
        format!(
            "computed matrix {:?}: {}",
            dtw.rows(),
            if w.is_some() {
                "witness found"
            } else {
                "no zero-sum witness; this matrix is conditionally negative definite"
            }
        ),
    );
    Ok(())
}

fn fig2(r: &mut VerifyReport) -> Result<()> {
    const G: &str = "fig2";
    let (a, b) = fixture_fig2();
    let dot = kernel::euclid_dot(&a, &b)?;
    r.push(G, "euclidean dot product", dot == 0.0, format!("{dot}"));
    let t1 = kernel::twip1(&a, &b, 0.1)?;
    let t2 = kernel::twip2(&a, &b, 0.1)?;
    r.push(
        G,
        "twip1 nu=0.1 (full recursion)",
        (t1 - FIG2_TWIP1_FULL).abs() <= 1e-12,
        format!("expected {FIG2_TWIP1_FULL}, got {t1}"),
    );
    r.push(
        G,
        "twip2 nu=0.1 (full recursion)",
        (t2 - FIG2_TWIP2_FULL).abs() <= 1e-12,
        format!("expected {FIG2_TWIP2_FULL}, got {t2}"),
    );
    for (name, v) in [
        ("twip1 nu=100", kernel::twip1(&a, &b, 100.0)?),
        ("twip2 nu=100", kernel::twip2(&a, &b, 100.0)?),
    ] {
        r.push(G, name, v.abs() < 1e-6, format!("{v:e}"));
    }
    let p1 = kernel::twip1(&a.prefix(7), &b.prefix(7), 0.1)?;
    let p2 = kernel::twip2(&a.prefix(7), &b.prefix(7), 0.1)?;
    r.known(
        G,
        "quoted twip values 0.459 / 0.475",
        (t1 - FIG2_TWIP1_QUOTED).abs() <= 1e-3 && (t2 - FIG2_TWIP2_QUOTED).abs() <= 1e-3,
        format!("full series give {t1:.5} / {t2:.5}; 7-sample prefixes give {p1:.5} / {p2:.5}"),
    );
    Ok(())
}

fn oracle(r: &mut VerifyReport) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        for p in 0..=4 {
            for q in 0..=4 {
                let t = TabulatedLocal::random(p, q, &mut rng);
                for star in [Star::Add, Star::Multiply] {
                    let rec = SummativeRecursion::new(star, rng.random_range(0.1..2.0));
                    let a = rec.evaluate(&t)?;
                    let b = path_sum_oracle(&t, &rec)?;
                    let scale = a.abs().max(b.abs());
                    if scale > 0.0 {
                        worst = worst.max((a - b).abs() / scale);
                    }
                }
            }
        }
    }
    r.push(
        "oracle",
        "recursion = path sum (p,q <= 4)",
        worst <= 1e-12,
        format!("max relative difference {worst:e}"),
    );
    Ok(())
}

fn random_series(rng: &mut ChaCha8Rng, min_len: usize, max_len: usize) -> TimeSeries {
    let n = rng.random_range(min_len..=max_len);
    TimeSeries::univariate((0..n).map(|_| rng.random_range(-2.0..2.0)).collect())
}

fn psd(r: &mut VerifyReport) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for fam in [
        KernelFamily::StwkLev,
        KernelFamily::StwkDtw,
        KernelFamily::StwkErp,
        KernelFamily::StwkTwed,
        KernelFamily::Twip1,
        KernelFamily::Twip2,
    ] {
        let mut worst = f64::INFINITY;
        for _ in 0..3 {
            let items: Vec<TimeSeries> = (0..10).map(|_| random_series(&mut rng, 5, 12)).collect();
            let params = KernelParams {
                nu_prime: 10f64.powi(rng.random_range(-1..=1)),
                nu: 10f64.powi(rng.random_range(-3..=1)),
                ..KernelParams::default()
            };
            let g = build_gram(&items, &Measure::kernel(KernelId::new(fam, params)))?;
            let rep = definiteness_report(&g, DEFAULT_TAU)?;
            worst = worst.min(rep.eigenvalues.last().unwrap() / g.max_abs());
        }
        r.push(
            "psd",
            fam.name(),
            worst >= -1e-9,
            format!("min eigenvalue / max|G| = {worst:e}"),
        );
    }
    Ok(())
}

fn euclid_limit(r: &mut VerifyReport) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(1..=20);
        let a = TimeSeries::univariate((0..n).map(|_| rng.random_range(-2.0..2.0)).collect());
        let b = TimeSeries::univariate((0..n).map(|_| rng.random_range(-2.0..2.0)).collect());
        worst = worst.max((kernel::twip2(&a, &b, 100.0)? - kernel::euclid_dot(&a, &b)?).abs());
    }
    r.push(
        "euclid-limit",
        "twip2 nu=100 vs dot product",
        worst <= 1e-6,
        format!("max |difference| {worst:e}"),
    );
    Ok(())
}

fn metric(r: &mut VerifyReport) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let series = |rng: &mut ChaCha8Rng| {
        let n = rng.random_range(1..=6);
        TimeSeries::univariate((0..n).map(|_| rng.random_range(-3..=3) as f64).collect())
    };
    let triples: Vec<[TimeSeries; 3]> = (0..2000)
        .map(|_| [series(&mut rng), series(&mut rng), series(&mut rng)])
        .collect();
    let twed = CostParams {
        nu: 0.5,
        lambda: 0.25,
        ..CostParams::default()
    };
    for (kind, params) in [
        (DistanceKind::Levenshtein, CostParams::default()),
        (DistanceKind::Erp, CostParams::default()),
        (DistanceKind::Twed, twed),
    ] {
        let m = Measure::distance(kind, params);
        let mut violations = 0;
        for [x, y, z] in &triples {
            let (xy, xz, zy) = (m.value(x, y)?, m.value(x, z)?, m.value(z, y)?);
            if xy > xz + zy + 1e-9 {
                violations += 1;
            }
        }
        r.push(
            "metric",
            format!("{} triangle inequality", kind.name()),
            violations == 0,
            format!("{violations} violations in {} triples", triples.len()),
        );
    }
    let dtw = Measure::distance(DistanceKind::Dtw, CostParams::default());
    let mut found = None;
    for [x, y, z] in &triples {
        let (xy, xz, zy) = (dtw.value(x, y)?, dtw.value(x, z)?, dtw.value(z, y)?);
        if xy > xz + zy + 1e-9 {
            found = Some(format!(
                "{:?} {:?} {:?}: {xy} > {xz} + {zy}",
                x.values(),
                y.values(),
                z.values()
            ));
            break;
        }
    }
    r.push(
        "metric",
        "dtw triangle violation exists",
        found.is_some(),
        found.unwrap_or_else(|| "none found".into()),
    );
    Ok(())
}

fn delta_p(r: &mut VerifyReport) {
    let a = spectrum_report(vec![3.0, 1.0, -4.0], 4.0, DEFAULT_TAU);
    r.push(
        "delta-p",
        "{3,1,-4} -> 25%",
        a.delta_p == 25.0,
        format!("{}", a.delta_p),
    );
    let b = spectrum_report(vec![7.0, -2.0, -5.0], 7.0, DEFAULT_TAU);
    r.push(
        "delta-p",
        "single positive -> 0%",
        b.delta_p == 0.0,
        format!("{}", b.delta_p),
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_run_passes_all_gating_checks() {
        let rep = run(&[]).unwrap();
        assert!(rep.ok(), "{}", rep.table());
        for g in GROUPS {
            assert!(rep.checks.iter().any(|c| c.group == g), "{g} missing");
        }
    }

    #[test]
    fn only_filter() {
        let rep = run(&["delta-p".to_string()]).unwrap();
        assert!(rep.checks.iter().all(|c| c.group == "delta-p"));
        assert_eq!(rep.checks.len(), 2);
    }
}
