//! Series and dataset sources named on the command line.

use std::path::Path;

use twk::datasets::{
    fixture_fig2, fixtures_appendix_a, load_ucr_pair, parse_ucr, synth_train_test, LabeledDataset,
    Split,
};
use twk::{Error, Result, TimeSeries};

/// A token string as a univariate series of character codes, compared by
/// equality under the Levenshtein measure.
pub fn symbols(s: &str) -> TimeSeries {
    TimeSeries::univariate(s.chars().map(|c| c as u32 as f64).collect())
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidParam(msg.into())
}

/// Parses one series:
///
/// * `fig2:A`, `fig2:B`
/// * `appendix-a:NAME` (`012`, `0123`, `abc`, ...)
/// * `PATH:ROW`, a 0-based row of a UCR file
/// * `0,1,2` or `0 1 2`, literal values with timestamps 1..N
/// * anything else as a symbol string when `allow_symbols` is set
pub fn parse_series(spec: &str, allow_symbols: bool) -> Result<TimeSeries> {
    if let Some(which) = spec.strip_prefix("fig2:") {
        let (a, b) = fixture_fig2();
        return match which {
            "A" | "a" => Ok(a),
            "B" | "b" => Ok(b),
            _ => Err(bad(format!("fig2 has series A and B, not {which:?}"))),
        };
    }
    if let Some(name) = spec.strip_prefix("appendix-a:") {
        let f = fixtures_appendix_a();
        if let Some(i) = f.three_digit_names.iter().position(|n| *n == name) {
            return Ok(f.three_digit[i].clone());
        }
        if let Some(i) = f.dtw_names.iter().position(|n| *n == name) {
            return Ok(f.dtw_series[i].clone());
        }
        if f.lev_strings.contains(&name) {
            return Ok(symbols(name));
        }
        return Err(bad(format!("no appendix-a sequence named {name:?}")));
    }
    if let Some((path, row)) = spec.rsplit_once(':') {
        if let Ok(row) = row.parse::<usize>() {
            if Path::new(path).exists() {
                let ds = parse_ucr(Path::new(path), Split::Train)?;
                return ds
                    .items
                    .get(row)
                    .cloned()
                    .ok_or_else(|| bad(format!("{path} has {} rows", ds.len())));
            }
        }
    }
    let values: std::result::Result<Vec<f64>, _> = spec
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(str::parse::<f64>)
        .collect();
    match values {
        Ok(v) => Ok(TimeSeries::univariate(v)),
        Err(_) if allow_symbols => Ok(symbols(spec)),
        Err(_) => Err(bad(format!(
            "cannot read {spec:?} as a series (expected values like 0,1,2 or a named source)"
        ))),
    }
}

/// Named items for Gram matrices:
///
/// * `appendix-a:lev`, `appendix-a:dtw`, `appendix-a:three-digit`
/// * `synth:SEED`, the train split of the warped-sinusoid set
/// * a UCR file path
pub fn parse_items(spec: &str) -> Result<(Vec<TimeSeries>, Vec<String>)> {
    let f = fixtures_appendix_a();
    let named = |names: &[&str], items: Vec<TimeSeries>| {
        (items, names.iter().map(|s| s.to_string()).collect())
    };
    match spec {
        "appendix-a:lev" => Ok(named(
            &f.lev_strings,
            f.lev_strings.iter().map(|s| symbols(s)).collect(),
        )),
        "appendix-a:dtw" => Ok(named(&f.dtw_names, f.dtw_series)),
        "appendix-a:three-digit" => Ok(named(&f.three_digit_names, f.three_digit)),
        _ => {
            let ds = if let Some(seed) = spec.strip_prefix("synth:") {
                synthetic(seed)?.0
            } else {
                parse_ucr(Path::new(spec), Split::Train)?
            };
            let ids = (0..ds.len())
                .map(|i| format!("{}#{i}", ds.classes[ds.labels[i]]))
                .collect();
            Ok((ds.items, ids))
        }
    }
}

/// The desk-scale synthetic problem: 3 classes, 20 train and 50 test series
/// per class, length 40.
pub fn synthetic(seed: &str) -> Result<(LabeledDataset, LabeledDataset)> {
    let seed: u64 = seed
        .parse()
        .map_err(|_| bad(format!("synth seed {seed:?} is not an integer")))?;
    synth_train_test(3, 20, 50, 40, 0.1, seed)
}

/// Train/test pair from explicit files, a UCR directory, or `synth:SEED`.
pub fn load_split(
    train: Option<&Path>,
    test: Option<&Path>,
    ucr_dir: Option<&Path>,
    dataset: Option<&str>,
) -> Result<(String, LabeledDataset, LabeledDataset)> {
    if let Some(seed) = dataset.and_then(|d| d.strip_prefix("synth:")) {
        let (tr, te) = synthetic(seed)?;
        return Ok((format!("synth:{seed}"), tr, te));
    }
    if let (Some(dir), Some(name)) = (ucr_dir, dataset) {
        let (tr, te) = load_ucr_pair(dir, name)?;
        return Ok((name.to_string(), tr, te));
    }
    match (train, test) {
        (Some(tr), Some(te)) => {
            let mut train = parse_ucr(tr, Split::Train)?;
            let mut test = parse_ucr(te, Split::Test)?;
            train.align_classes(&mut test);
            let name = dataset.map(str::to_string).unwrap_or_else(|| {
                tr.file_stem()
                    .map(|s| s.to_string_lossy().trim_end_matches("_TRAIN").to_string())
                    .unwrap_or_default()
            });
            Ok((name, train, test))
        }
        _ => Err(bad(
            "need --train and --test files, --ucr-dir with --dataset, or --dataset synth:SEED",
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_and_named_series() {
        assert_eq!(
            parse_series("0,1,2", false).unwrap().values(),
            &[0.0, 1.0, 2.0]
        );
        assert_eq!(
            parse_series("0 1 2", false).unwrap().values(),
            &[0.0, 1.0, 2.0]
        );
        assert_eq!(parse_series("fig2:B", false).unwrap().values()[3], 2.0);
        assert_eq!(
            parse_series("appendix-a:321", false).unwrap().values(),
            &[3.0, 2.0, 1.0]
        );
        assert_eq!(parse_series("appendix-a:abc", false).unwrap().len(), 3);
        assert_eq!(parse_series("abc", true).unwrap().len(), 3);
        assert!(parse_series("abc", false).is_err());
        assert!(parse_series("fig2:C", false).is_err());
    }

    #[test]
    fn ucr_row_source() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.txt");
        std::fs::write(&p, "1 0.5 0.7\n2 0.1 0.2\n").unwrap();
        let s = parse_series(&format!("{}:1", p.display()), false).unwrap();
        assert_eq!(s.values(), &[0.1, 0.2]);
    }

    #[test]
    fn item_sets() {
        assert_eq!(parse_items("appendix-a:three-digit").unwrap().0.len(), 10);
        let (items, ids) = parse_items("appendix-a:lev").unwrap();
        assert_eq!((items.len(), ids[0].as_str()), (5, "abc"));
        assert_eq!(parse_items("synth:1").unwrap().0.len(), 60);
    }
}
