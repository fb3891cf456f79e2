//! Elastic distances computed by the generic delete / match / insert
//! dynamic program: Levenshtein, DTW, ERP and TWED.
//!
//! Cost tables index samples from 1; index 0 stands for the null element
//! Λ (or, for TWED, the virtual sample `A(0) = (0, t = 0)`). A cost of
//! `f64::INFINITY` marks an operation that is not admissible.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{check_dims, Norm, TimeSeries};

/// Costs of the three elementary edit operations.
///
/// `(i, j)` is always the cell the operation arrives at: a delete of `A(i)`
/// goes from `(i - 1, j)` to `(i, j)`, a match from `(i - 1, j - 1)`, an
/// insert of `B(j)` from `(i, j - 1)`.
pub trait EditCosts {
    fn len_a(&self) -> usize;
    fn len_b(&self) -> usize;
    fn delete(&self, i: usize, j: usize) -> f64;
    fn substitute(&self, i: usize, j: usize) -> f64;
    fn insert(&self, i: usize, j: usize) -> f64;
}

/// How row and column 0 of the DP table are initialised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Row/column 0 accumulate delete/insert costs from Ω: alignments may
    /// open with gaps.
    Free,
    /// When both operands are non-empty, alignments open by matching the
    /// first samples (row/column 0 are unreachable past the origin). An
    /// empty operand still aligns through its single all-gap path.
    #[default]
    Anchored,
}

/// Swaps the roles of the two operands of a cost table.
pub(crate) struct Transposed<'a, C: ?Sized>(pub &'a C);

impl<C: EditCosts + ?Sized> EditCosts for Transposed<'_, C> {
    fn len_a(&self) -> usize {
        self.0.len_b()
    }
    fn len_b(&self) -> usize {
        self.0.len_a()
    }
    fn delete(&self, i: usize, j: usize) -> f64 {
        self.0.insert(j, i)
    }
    fn substitute(&self, i: usize, j: usize) -> f64 {
        self.0.substitute(j, i)
    }
    fn insert(&self, i: usize, j: usize) -> f64 {
        self.0.delete(j, i)
    }
}

/// Checks the Sakoe-Chiba band `|i - j| <= halfwidth` against the operand
/// lengths and returns the effective half-width.
pub(crate) fn corridor_width(p: usize, q: usize, corridor: Option<usize>) -> Result<usize> {
    match corridor {
        None => Ok(p.max(q)),
        Some(0) => Err(Error::InvalidParam(
            "corridor half-width must be >= 1".into(),
        )),
        Some(w) if p.abs_diff(q) > w => Err(Error::CorridorTooNarrow {
            len_a: p,
            len_b: q,
            halfwidth: w,
        }),
        Some(w) => Ok(w),
    }
}

/// Minimum-cost alignment by the delete / match / insert recursion.
///
/// Runs in `O(|a|·|b|)` time (`O(|a|·w)` inside a corridor) with two rolling
/// rows sized by the shorter operand.
pub fn edit_distance_dp<C: EditCosts + ?Sized>(
    costs: &C,
    boundary: Boundary,
    corridor: Option<usize>,
) -> Result<f64> {
    if costs.len_b() > costs.len_a() {
        return edit_distance_rows(&Transposed(costs), boundary, corridor);
    }
    edit_distance_rows(costs, boundary, corridor)
}

fn edit_distance_rows<C: EditCosts + ?Sized>(
    costs: &C,
    boundary: Boundary,
    corridor: Option<usize>,
) -> Result<f64> {
    let (p, q) = (costs.len_a(), costs.len_b());
    let w = corridor_width(p, q, corridor)?;
    let anchored = boundary == Boundary::Anchored && p > 0 && q > 0;
    let inf = f64::INFINITY;

    let mut prev = vec![inf; q + 2];
    let mut cur = vec![inf; q + 2];
    prev[0] = 0.0;
    for j in 1..=q.min(w) {
        prev[j] = if anchored {
            inf
        } else {
            prev[j - 1] + costs.insert(0, j)
        };
    }
    for i in 1..=p {
        let lo = i.saturating_sub(w);
        let hi = (i + w).min(q);
        if lo > 0 {
            cur[lo - 1] = inf;
        }
        cur[hi + 1] = inf;
        for j in lo..=hi {
            cur[j] = if j == 0 {
                if anchored {
                    inf
                } else {
                    prev[0] + costs.delete(i, 0)
                }
            } else {
                let del = prev[j] + costs.delete(i, j);
                let sub = prev[j - 1] + costs.substitute(i, j);
                let ins = cur[j - 1] + costs.insert(i, j);
                del.min(sub).min(ins)
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[q])
}

/// Meta-parameters shared by the elastic distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostParams {
    pub norm: Norm,
    /// ERP gap value. Empty means the origin; a single value is broadcast
    /// over all dimensions.
    pub g: Vec<f64>,
    /// TWED gap penalty.
    pub lambda: f64,
    /// TWED stiffness (also the TWIP stiffness when used by a distance).
    pub nu: f64,
    pub corridor: Option<usize>,
    /// Boundary convention for ERP and TWED. Levenshtein always uses the
    /// free boundary and DTW is anchored by construction.
    pub boundary: Boundary,
}

impl Default for CostParams {
    fn default() -> Self {
        Self {
            norm: Norm::L1,
            g: Vec::new(),
            lambda: 0.0,
            nu: 1.0,
            corridor: None,
            boundary: Boundary::Anchored,
        }
    }
}

impl CostParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) {
            return Err(Error::InvalidParam(format!("lambda = {} < 0", self.lambda)));
        }
        if !(self.nu >= 0.0) {
            return Err(Error::InvalidParam(format!("nu = {} < 0", self.nu)));
        }
        if self.corridor == Some(0) {
            return Err(Error::InvalidParam(
                "corridor half-width must be >= 1".into(),
            ));
        }
        Ok(())
    }

    pub(crate) fn gap_vector(&self, dim: usize) -> Result<Vec<f64>> {
        match self.g.len() {
            0 => Ok(vec![0.0; dim]),
            1 => Ok(vec![self.g[0]; dim]),
            n if n == dim => Ok(self.g.clone()),
            n => Err(Error::DimensionMismatch {
                expected: dim,
                found: n,
            }),
        }
    }
}

/// Unit delete/insert costs, match cost 0 on equal tokens and 1 otherwise.
pub struct LevenshteinCosts<'a, T> {
    pub a: &'a [T],
    pub b: &'a [T],
}

impl<T: PartialEq> EditCosts for LevenshteinCosts<'_, T> {
    fn len_a(&self) -> usize {
        self.a.len()
    }
    fn len_b(&self) -> usize {
        self.b.len()
    }
    fn delete(&self, _: usize, _: usize) -> f64 {
        1.0
    }
    fn substitute(&self, i: usize, j: usize) -> f64 {
        if self.a[i - 1] == self.b[j - 1] {
            0.0
        } else {
            1.0
        }
    }
    fn insert(&self, _: usize, _: usize) -> f64 {
        1.0
    }
}

/// Every operation costs `d_LP(a(i), b(j))`; nothing aligns against Λ.
pub struct DtwCosts<'a> {
    a: &'a TimeSeries,
    b: &'a TimeSeries,
    norm: Norm,
}

impl<'a> DtwCosts<'a> {
    pub fn new(a: &'a TimeSeries, b: &'a TimeSeries, norm: Norm) -> Result<Self> {
        check_dims(a, b)?;
        Ok(Self { a, b, norm })
    }

    #[inline]
    fn local(&self, i: usize, j: usize) -> f64 {
        if i == 0 || j == 0 {
            f64::INFINITY
        } else {
            self.norm.eval(self.a.value(i - 1), self.b.value(j - 1))
        }
    }
}

impl EditCosts for DtwCosts<'_> {
    fn len_a(&self) -> usize {
        self.a.len()
    }
    fn len_b(&self) -> usize {
        self.b.len()
    }
    fn delete(&self, i: usize, j: usize) -> f64 {
        self.local(i, j)
    }
    fn substitute(&self, i: usize, j: usize) -> f64 {
        self.local(i, j)
    }
    fn insert(&self, i: usize, j: usize) -> f64 {
        self.local(i, j)
    }
}

/// Gaps cost the distance to the constant `g`, matches `d_LP(a(i), b(j))`.
pub struct ErpCosts<'a> {
    a: &'a TimeSeries,
    b: &'a TimeSeries,
    norm: Norm,
    gap_a: Vec<f64>,
    gap_b: Vec<f64>,
}

impl<'a> ErpCosts<'a> {
    pub fn new(a: &'a TimeSeries, b: &'a TimeSeries, params: &CostParams) -> Result<Self> {
        check_dims(a, b)?;
        let dim = if a.is_empty() { b.dim() } else { a.dim() };
        let g = params.gap_vector(dim)?;
        let gap = |s: &TimeSeries| -> Vec<f64> {
            (0..s.len())
                .map(|i| params.norm.eval(s.value(i), &g))
                .collect()
        };
        Ok(Self {
            a,
            b,
            norm: params.norm,
            gap_a: gap(a),
            gap_b: gap(b),
        })
    }
}

impl EditCosts for ErpCosts<'_> {
    fn len_a(&self) -> usize {
        self.a.len()
    }
    fn len_b(&self) -> usize {
        self.b.len()
    }
    fn delete(&self, i: usize, _: usize) -> f64 {
        self.gap_a[i - 1]
    }
    fn substitute(&self, i: usize, j: usize) -> f64 {
        self.norm.eval(self.a.value(i - 1), self.b.value(j - 1))
    }
    fn insert(&self, _: usize, j: usize) -> f64 {
        self.gap_b[j - 1]
    }
}

/// Timestamp-aware costs with stiffness `nu` and gap penalty `lambda`.
///
/// The local distance between two samples is
/// `d_LP(x, y) + nu · |t_x − t_y|`, and index 0 refers to the virtual
/// sample `(0, t = 0)`.
pub struct TwedCosts<'a> {
    a: &'a TimeSeries,
    b: &'a TimeSeries,
    norm: Norm,
    nu: f64,
    gap_a: Vec<f64>,
    gap_b: Vec<f64>,
    origin: Vec<f64>,
}

impl<'a> TwedCosts<'a> {
    pub fn new(a: &'a TimeSeries, b: &'a TimeSeries, params: &CostParams) -> Result<Self> {
        params.validate()?;
        check_dims(a, b)?;
        let dim = if a.is_empty() { b.dim() } else { a.dim() };
        let mut costs = Self {
            a,
            b,
            norm: params.norm,
            nu: params.nu,
            gap_a: Vec::new(),
            gap_b: Vec::new(),
            origin: vec![0.0; dim],
        };
        costs.gap_a = (1..=a.len())
            .map(|i| costs.local(a, i, a, i - 1) + params.lambda)
            .collect();
        costs.gap_b = (1..=b.len())
            .map(|j| costs.local(b, j, b, j - 1) + params.lambda)
            .collect();
        Ok(costs)
    }

    #[inline]
    fn point<'s>(&'s self, s: &'s TimeSeries, i: usize) -> (&'s [f64], f64) {
        if i == 0 {
            (&self.origin, 0.0)
        } else {
            (s.value(i - 1), s.time(i - 1))
        }
    }

    #[inline]
    fn local(&self, s: &TimeSeries, i: usize, r: &TimeSeries, j: usize) -> f64 {
        let (x, tx) = self.point(s, i);
        let (y, ty) = self.point(r, j);
        self.norm.eval(x, y) + self.nu * (tx - ty).abs()
    }
}

impl EditCosts for TwedCosts<'_> {
    fn len_a(&self) -> usize {
        self.a.len()
    }
    fn len_b(&self) -> usize {
        self.b.len()
    }
    fn delete(&self, i: usize, _: usize) -> f64 {
        self.gap_a[i - 1]
    }
    fn substitute(&self, i: usize, j: usize) -> f64 {
        self.local(self.a, i, self.b, j) + self.local(self.a, i - 1, self.b, j - 1)
    }
    fn insert(&self, _: usize, j: usize) -> f64 {
        self.gap_b[j - 1]
    }
}

/// Unit-cost edit distance between two token sequences.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> f64 {
    edit_distance_dp(&LevenshteinCosts { a, b }, Boundary::Free, None)
        .expect("unrestricted Levenshtein cannot fail")
}

/// Dynamic time warping; timestamps are ignored.
pub fn dtw(a: &TimeSeries, b: &TimeSeries, params: &CostParams) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySeries);
    }
    params.validate()?;
    edit_distance_dp(
        &DtwCosts::new(a, b, params.norm)?,
        Boundary::Anchored,
        params.corridor,
    )
}

/// Edit distance with real penalty; timestamps are ignored.
pub fn erp(a: &TimeSeries, b: &TimeSeries, params: &CostParams) -> Result<f64> {
    params.validate()?;
    edit_distance_dp(
        &ErpCosts::new(a, b, params)?,
        params.boundary,
        params.corridor,
    )
}

/// Time warp edit distance.
pub fn twed(a: &TimeSeries, b: &TimeSeries, params: &CostParams) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySeries);
    }
    edit_distance_dp(
        &TwedCosts::new(a, b, params)?,
        params.boundary,
        params.corridor,
    )
}

/// Plain Euclidean distance between equal-length series.
pub fn euclidean(a: &TimeSeries, b: &TimeSeries) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    check_dims(a, b)?;
    Ok(a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Exhaustive forward enumeration of every delete/match/insert sequence
    /// from (0, 0) to (p, q); returns the cheapest total.
    fn brute_force_min<C: EditCosts>(c: &C, boundary: Boundary, band: Option<usize>) -> f64 {
        #[allow(clippy::too_many_arguments)]
        fn walk<C: EditCosts>(
            c: &C,
            i: usize,
            j: usize,
            acc: f64,
            first: bool,
            anchored: bool,
            band: Option<usize>,
            best: &mut f64,
        ) {
            let (p, q) = (c.len_a(), c.len_b());
            if let Some(w) = band {
                if i.abs_diff(j) > w {
                    return;
                }
            }
            if i == p && j == q {
                *best = best.min(acc);
                return;
            }
            let gaps_ok = !(first && anchored);
            if i < p && gaps_ok {
                walk(
                    c,
                    i + 1,
                    j,
                    acc + c.delete(i + 1, j),
                    false,
                    anchored,
                    band,
                    best,
                );
            }
            if i < p && j < q {
                walk(
                    c,
                    i + 1,
                    j + 1,
                    acc + c.substitute(i + 1, j + 1),
                    false,
                    anchored,
                    band,
                    best,
                );
            }
            if j < q && gaps_ok {
                walk(
                    c,
                    i,
                    j + 1,
                    acc + c.insert(i, j + 1),
                    false,
                    anchored,
                    band,
                    best,
                );
            }
        }
        let anchored = boundary == Boundary::Anchored && c.len_a() > 0 && c.len_b() > 0;
        let mut best = f64::INFINITY;
        walk(c, 0, 0, 0.0, true, anchored, band, &mut best);
        best
    }

    fn s(v: &[f64]) -> TimeSeries {
        TimeSeries::univariate(v.to_vec())
    }

    fn twed_params(nu: f64, lambda: f64) -> CostParams {
        CostParams {
            nu,
            lambda,
            ..CostParams::default()
        }
    }

    #[test]
    fn levenshtein_examples() {
        assert_eq!(levenshtein(b"abc", b"bad"), 3.0);
        assert_eq!(levenshtein(b"abc", b"adc"), 1.0);
        assert_eq!(levenshtein(b"abc", b"bcd"), 2.0);
        assert_eq!(levenshtein(b"kitten", b"kitten"), 0.0);
        assert_eq!(levenshtein(b"", b"abc"), 3.0);
    }

    #[test]
    fn dtw_examples() {
        let p = CostParams::default();
        assert_eq!(dtw(&s(&[0.0, 1.0]), &s(&[0.0, 1.0, 2.0]), &p).unwrap(), 1.0);
        assert_eq!(dtw(&s(&[0.5]), &s(&[-1.5]), &p).unwrap(), 2.0);
        let a = s(&[1.0, 3.0, -2.0, 0.5]);
        assert_eq!(dtw(&a, &a, &p).unwrap(), 0.0);
        assert!(matches!(
            dtw(&TimeSeries::empty(1), &a, &p),
            Err(Error::EmptySeries)
        ));
    }

    #[test]
    fn dtw_two_by_three_matches_enumeration() {
        let (a, b) = (s(&[0.0, 1.0]), s(&[0.0, 1.0, 2.0]));
        let c = DtwCosts::new(&a, &b, Norm::L1).unwrap();
        assert_eq!(brute_force_min(&c, Boundary::Anchored, None), 1.0);
    }

    #[test]
    fn erp_examples() {
        let p = CostParams::default();
        assert_eq!(
            erp(&s(&[0.0, 1.0, 0.0]), &s(&[0.0, 1.0, 2.0]), &p).unwrap(),
            2.0
        );
        let a = s(&[1.0, -2.0, 3.5]);
        assert_eq!(erp(&a, &TimeSeries::empty(1), &p).unwrap(), 6.5);
        assert_eq!(erp(&TimeSeries::empty(1), &a, &p).unwrap(), 6.5);
        assert_eq!(erp(&a, &a, &p).unwrap(), 0.0);
        let bad = CostParams {
            g: vec![0.0, 0.0],
            ..p
        };
        assert!(matches!(
            erp(&a, &a, &bad),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn erp_boundaries_differ_on_leading_gaps() {
        let (a, b) = (s(&[0.0, 1.0, 2.0]), s(&[1.0, 0.0, 3.0]));
        let free = CostParams {
            boundary: Boundary::Free,
            ..CostParams::default()
        };
        assert_eq!(erp(&a, &b, &free).unwrap(), 1.0);
        assert_eq!(erp(&a, &b, &CostParams::default()).unwrap(), 3.0);
    }

    #[test]
    fn twed_examples() {
        let p = twed_params(1.0, 0.0);
        assert_eq!(
            twed(&s(&[0.0, 1.0, 0.0]), &s(&[0.0, 1.0, 2.0]), &p).unwrap(),
            2.0
        );
        let a = s(&[0.3, -1.0, 2.0]);
        for (nu, lambda) in [(0.0, 0.0), (0.5, 1.0), (3.0, 0.25)] {
            assert_eq!(twed(&a, &a, &twed_params(nu, lambda)).unwrap(), 0.0);
        }
        let (x, y) = (s(&[0.0, 1.0]), s(&[0.0, 1.0, 2.0]));
        let c = TwedCosts::new(&x, &y, &p).unwrap();
        assert_eq!(
            twed(&x, &y, &p).unwrap(),
            brute_force_min(&c, Boundary::Anchored, None)
        );
        assert!(matches!(
            twed(&x, &TimeSeries::empty(1), &p),
            Err(Error::EmptySeries)
        ));
        assert!(twed(&x, &y, &twed_params(-1.0, 0.0)).is_err());
    }

    #[test]
    fn corridor_too_narrow() {
        let p = CostParams {
            corridor: Some(1),
            ..CostParams::default()
        };
        let r = dtw(&s(&[0.0; 2]), &s(&[0.0; 5]), &p);
        assert!(matches!(
            r,
            Err(Error::CorridorTooNarrow { halfwidth: 1, .. })
        ));
    }

    fn series_strategy(max_len: usize) -> impl Strategy<Value = TimeSeries> {
        prop::collection::vec(-3.0..3.0f64, 1..=max_len).prop_map(TimeSeries::univariate)
    }

    fn boundary_strategy() -> impl Strategy<Value = Boundary> {
        prop_oneof![Just(Boundary::Free), Just(Boundary::Anchored)]
    }

    proptest! {
        #[test]
        fn dp_equals_enumeration(
            a in series_strategy(5),
            b in series_strategy(5),
            nu in 0.0..2.0f64,
            lambda in 0.0..2.0f64,
            bnd in boundary_strategy(),
        ) {
            let p = CostParams { nu, lambda, boundary: bnd, ..CostParams::default() };
            let c = DtwCosts::new(&a, &b, Norm::L2).unwrap();
            let dp = edit_distance_dp(&c, Boundary::Anchored, None).unwrap();
            prop_assert!((dp - brute_force_min(&c, Boundary::Anchored, None)).abs() < 1e-9);
            let c = ErpCosts::new(&a, &b, &p).unwrap();
            let dp = edit_distance_dp(&c, bnd, None).unwrap();
            prop_assert!((dp - brute_force_min(&c, bnd, None)).abs() < 1e-9);
            let c = TwedCosts::new(&a, &b, &p).unwrap();
            let dp = edit_distance_dp(&c, bnd, None).unwrap();
            prop_assert!((dp - brute_force_min(&c, bnd, None)).abs() < 1e-9);
        }

        #[test]
        fn levenshtein_equals_enumeration(a in "[abc]{0,5}", b in "[abc]{0,5}") {
            let (a, b): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
            let c = LevenshteinCosts { a: &a, b: &b };
            prop_assert_eq!(levenshtein(&a, &b), brute_force_min(&c, Boundary::Free, None));
        }

        #[test]
        fn corridor_restricts_like_enumeration(
            a in series_strategy(5),
            b in series_strategy(5),
            w in 1usize..5,
        ) {
            let c = ErpCosts::new(&a, &b, &CostParams::default()).unwrap();
            match edit_distance_dp(&c, Boundary::Free, Some(w)) {
                Ok(d) => {
                    let e = brute_force_min(&c, Boundary::Free, Some(w));
                    prop_assert!((d - e).abs() < 1e-9);
                }
                Err(Error::CorridorTooNarrow { .. }) => prop_assert!(a.len().abs_diff(b.len()) > w),
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            }
        }

        #[test]
        fn full_corridor_equals_unrestricted(a in series_strategy(8), b in series_strategy(8)) {
            let w = a.len().max(b.len());
            let banded = CostParams { corridor: Some(w), ..CostParams::default() };
            let p = CostParams::default();
            prop_assert_eq!(dtw(&a, &b, &p).unwrap(), dtw(&a, &b, &banded).unwrap());
            prop_assert_eq!(erp(&a, &b, &p).unwrap(), erp(&a, &b, &banded).unwrap());
            prop_assert_eq!(twed(&a, &b, &p).unwrap(), twed(&a, &b, &banded).unwrap());
        }

        #[test]
        fn distance_axioms(a in series_strategy(7), b in series_strategy(7), nu in 0.0..1.0f64) {
            let p = twed_params(nu, 0.5);
            for f in [dtw, erp, twed] {
                let ab = f(&a, &b, &p).unwrap();
                prop_assert!(ab >= 0.0);
                prop_assert!((ab - f(&b, &a, &p).unwrap()).abs() <= 1e-12);
                prop_assert_eq!(f(&a, &a, &p).unwrap(), 0.0);
            }
        }
    }
}
