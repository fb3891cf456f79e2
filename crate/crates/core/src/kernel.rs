//! Summative time-warp kernels.
//!
//! The elastic recursion with its `min` replaced by a sum over the three
//! edit branches. Each branch combines the kernel value of the predecessor
//! cell with a local kernel value, either multiplicatively or additively,
//! and `<Ω, Ω> = ξ` seeds the table. A cell's value is then the sum over
//! every editing sequence reaching it of `ξ ⋆ (⋆-combination of the local
//! values along the sequence)`, each sequence weighted by the per-cell
//! normaliser raised to its length.
//!
//! On top of the generic engine sit the multiplicative exponentiated
//! kernels (local value `e^{−ν′·Γ}` for the Levenshtein, DTW, ERP and TWED
//! costs, normaliser 1/3) and the two additive time-warp inner products.

use serde::{Deserialize, Serialize};

use crate::distance::{
    corridor_width, CostParams, DtwCosts, EditCosts, ErpCosts, LevenshteinCosts, TwedCosts,
};
use crate::error::{Error, Result};
use crate::series::{add, check_dims, check_same_support, dot, scale, TimeSeries};

/// Local kernel values of the three edit operations, indexed like
/// [`EditCosts`]. `None` marks an operation that does not exist at that
/// cell; editing sequences through it are dropped.
pub trait LocalKernel {
    fn len_a(&self) -> usize;
    fn len_b(&self) -> usize;
    fn delete(&self, i: usize, j: usize) -> Option<f64>;
    fn substitute(&self, i: usize, j: usize) -> Option<f64>;
    fn insert(&self, i: usize, j: usize) -> Option<f64>;

    fn log_delete(&self, i: usize, j: usize) -> Option<f64> {
        self.delete(i, j).map(f64::ln)
    }
    fn log_substitute(&self, i: usize, j: usize) -> Option<f64> {
        self.substitute(i, j).map(f64::ln)
    }
    fn log_insert(&self, i: usize, j: usize) -> Option<f64> {
        self.insert(i, j).map(f64::ln)
    }
}

/// A local kernel given by explicit tables, one value per arrival cell and
/// operation.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedLocal {
    pub p: usize,
    pub q: usize,
    /// Row-major `(p + 1) × (q + 1)`.
    pub delete: Vec<Option<f64>>,
    pub substitute: Vec<Option<f64>>,
    pub insert: Vec<Option<f64>>,
}

impl TabulatedLocal {
    /// Values uniform in `[0.05, 1.5)`, about one in ten operations absent.
    pub fn random<R: rand::Rng>(p: usize, q: usize, rng: &mut R) -> Self {
        let n = (p + 1) * (q + 1);
        let mut draw = || {
            (0..n)
                .map(|_| (rng.random::<f64>() > 0.1).then(|| rng.random_range(0.05..1.5)))
                .collect::<Vec<_>>()
        };
        Self {
            p,
            q,
            delete: draw(),
            substitute: draw(),
            insert: draw(),
        }
    }

    fn at(&self, v: &[Option<f64>], i: usize, j: usize) -> Option<f64> {
        v[i * (self.q + 1) + j]
    }
}

impl LocalKernel for TabulatedLocal {
    fn len_a(&self) -> usize {
        self.p
    }
    fn len_b(&self) -> usize {
        self.q
    }
    fn delete(&self, i: usize, j: usize) -> Option<f64> {
        self.at(&self.delete, i, j)
    }
    fn substitute(&self, i: usize, j: usize) -> Option<f64> {
        self.at(&self.substitute, i, j)
    }
    fn insert(&self, i: usize, j: usize) -> Option<f64> {
        self.at(&self.insert, i, j)
    }
}

/// `e^{−ν′·Γ}` over an edit cost table. Infinite costs become absent
/// operations.
pub struct Exponentiated<C> {
    pub costs: C,
    pub nu_prime: f64,
}

impl<C: EditCosts> Exponentiated<C> {
    #[inline]
    fn lift(&self, cost: f64) -> Option<f64> {
        cost.is_finite().then(|| (-self.nu_prime * cost).exp())
    }

    #[inline]
    fn log_lift(&self, cost: f64) -> Option<f64> {
        cost.is_finite().then(|| -self.nu_prime * cost)
    }
}

impl<C: EditCosts> LocalKernel for Exponentiated<C> {
    fn len_a(&self) -> usize {
        self.costs.len_a()
    }
    fn len_b(&self) -> usize {
        self.costs.len_b()
    }
    fn delete(&self, i: usize, j: usize) -> Option<f64> {
        self.lift(self.costs.delete(i, j))
    }
    fn substitute(&self, i: usize, j: usize) -> Option<f64> {
        self.lift(self.costs.substitute(i, j))
    }
    fn insert(&self, i: usize, j: usize) -> Option<f64> {
        self.lift(self.costs.insert(i, j))
    }
    fn log_delete(&self, i: usize, j: usize) -> Option<f64> {
        self.log_lift(self.costs.delete(i, j))
    }
    fn log_substitute(&self, i: usize, j: usize) -> Option<f64> {
        self.log_lift(self.costs.substitute(i, j))
    }
    fn log_insert(&self, i: usize, j: usize) -> Option<f64> {
        self.log_lift(self.costs.insert(i, j))
    }
}

/// How a branch combines the predecessor value with the local kernel value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Star {
    Add,
    Multiply,
}

/// Configuration of the summative recursion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummativeRecursion {
    pub star: Star,
    /// `<Ω, Ω>`.
    pub xi: f64,
    /// Factor applied to every cell (1/3 for the exponentiated kernels).
    pub normalizer: f64,
    pub corridor: Option<usize>,
}

/// Largest operand length accepted by [`path_sum_oracle`].
pub const ORACLE_MAX_LEN: usize = 6;

impl SummativeRecursion {
    pub fn new(star: Star, xi: f64) -> Self {
        Self {
            star,
            xi,
            normalizer: 1.0,
            corridor: None,
        }
    }

    pub fn with_normalizer(mut self, normalizer: f64) -> Self {
        self.normalizer = normalizer;
        self
    }

    pub fn with_corridor(mut self, corridor: Option<usize>) -> Self {
        self.corridor = corridor;
        self
    }

    /// Evaluates the recursion in `O(|a|·|b|)` with rolling rows.
    ///
    /// The additive form carries, next to each cell's value, the total
    /// weight of the editing sequences reaching it, so that every sequence
    /// collects each local term exactly once.
    pub fn evaluate<K: LocalKernel + ?Sized>(&self, k: &K) -> Result<f64> {
        let (p, q) = (k.len_a(), k.len_b());
        let w = corridor_width(p, q, self.corridor)?;
        let c = self.normalizer;
        match self.star {
            Star::Multiply => {
                let mut prev = vec![0.0; q + 2];
                let mut cur = vec![0.0; q + 2];
                prev[0] = self.xi;
                for j in 1..=q.min(w) {
                    prev[j] = k.insert(0, j).map_or(0.0, |v| c * prev[j - 1] * v);
                }
                for i in 1..=p {
                    let lo = i.saturating_sub(w);
                    let hi = (i + w).min(q);
                    if lo > 0 {
                        cur[lo - 1] = 0.0;
                    }
                    cur[hi + 1] = 0.0;
                    for j in lo..=hi {
                        let mut s = k.delete(i, j).map_or(0.0, |v| prev[j] * v);
                        if j > 0 {
                            s += k.substitute(i, j).map_or(0.0, |v| prev[j - 1] * v);
                            s += k.insert(i, j).map_or(0.0, |v| cur[j - 1] * v);
                        }
                        cur[j] = c * s;
                    }
                    std::mem::swap(&mut prev, &mut cur);
                }
                Ok(prev[q])
            }
            Star::Add => {
                // (value, path weight)
                let mut prev = vec![(0.0, 0.0); q + 2];
                let mut cur = vec![(0.0, 0.0); q + 2];
                prev[0] = (self.xi, 1.0);
                let step = |(s, n): (f64, f64), v: Option<f64>| -> (f64, f64) {
                    v.map_or((0.0, 0.0), |v| (s + v * n, n))
                };
                for j in 1..=q.min(w) {
                    let (s, n) = step(prev[j - 1], k.insert(0, j));
                    prev[j] = (c * s, c * n);
                }
                for i in 1..=p {
                    let lo = i.saturating_sub(w);
                    let hi = (i + w).min(q);
                    if lo > 0 {
                        cur[lo - 1] = (0.0, 0.0);
                    }
                    cur[hi + 1] = (0.0, 0.0);
                    for j in lo..=hi {
                        let (mut s, mut n) = step(prev[j], k.delete(i, j));
                        if j > 0 {
                            let (s2, n2) = step(prev[j - 1], k.substitute(i, j));
                            let (s3, n3) = step(cur[j - 1], k.insert(i, j));
                            s += s2 + s3;
                            n += n2 + n3;
                        }
                        cur[j] = (c * s, c * n);
                    }
                    std::mem::swap(&mut prev, &mut cur);
                }
                Ok(prev[q].0)
            }
        }
    }

    /// Natural log of the multiplicative recursion, computed with
    /// log-sum-exp so long series do not underflow. Returns `-inf` when no
    /// editing sequence survives.
    pub fn evaluate_log<K: LocalKernel + ?Sized>(&self, k: &K) -> Result<f64> {
        if self.star != Star::Multiply {
            return Err(Error::InvalidParam(
                "log-domain evaluation needs the multiplicative form".into(),
            ));
        }
        if !(self.xi > 0.0) || !(self.normalizer > 0.0) {
            return Err(Error::InvalidParam(
                "log-domain evaluation needs xi > 0 and a positive normaliser".into(),
            ));
        }
        let (p, q) = (k.len_a(), k.len_b());
        let w = corridor_width(p, q, self.corridor)?;
        let lc = self.normalizer.ln();
        let ninf = f64::NEG_INFINITY;
        let mut prev = vec![ninf; q + 2];
        let mut cur = vec![ninf; q + 2];
        prev[0] = self.xi.ln();
        for j in 1..=q.min(w) {
            prev[j] = k.log_insert(0, j).map_or(ninf, |v| lc + prev[j - 1] + v);
        }
        for i in 1..=p {
            let lo = i.saturating_sub(w);
            let hi = (i + w).min(q);
            if lo > 0 {
                cur[lo - 1] = ninf;
            }
            cur[hi + 1] = ninf;
            for j in lo..=hi {
                let a = k.log_delete(i, j).map_or(ninf, |v| prev[j] + v);
                let (b, d) = if j > 0 {
                    (
                        k.log_substitute(i, j).map_or(ninf, |v| prev[j - 1] + v),
                        k.log_insert(i, j).map_or(ninf, |v| cur[j - 1] + v),
                    )
                } else {
                    (ninf, ninf)
                };
                cur[j] = lc + log_sum_exp3(a, b, d);
            }
            std::mem::swap(&mut prev, &mut cur);
        }
        Ok(prev[q])
    }
}

#[inline]
fn log_sum_exp3(a: f64, b: f64, c: f64) -> f64 {
    let m = a.max(b).max(c);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp() + (c - m).exp()).ln()
}

/// Unnormalised summative recursion `<A, B>` (normaliser 1).
pub fn stwk_recursion<K: LocalKernel + ?Sized>(
    local: &K,
    star: Star,
    xi: f64,
    corridor: Option<usize>,
) -> Result<f64> {
    SummativeRecursion::new(star, xi)
        .with_corridor(corridor)
        .evaluate(local)
}

/// Sum over every editing sequence of `ξ ⋆ (⋆-combination of local values)`
/// by explicit enumeration, each sequence weighted by `normalizer^length`.
/// Exponential in the operand lengths; both must be at most
/// [`ORACLE_MAX_LEN`].
pub fn path_sum_oracle<K: LocalKernel + ?Sized>(k: &K, rec: &SummativeRecursion) -> Result<f64> {
    let (p, q) = (k.len_a(), k.len_b());
    if p > ORACLE_MAX_LEN || q > ORACLE_MAX_LEN {
        return Err(Error::TooLarge {
            len_a: p,
            len_b: q,
            max: ORACLE_MAX_LEN,
        });
    }
    let w = corridor_width(p, q, rec.corridor)?;

    struct Walk<'a, K: ?Sized> {
        k: &'a K,
        rec: &'a SummativeRecursion,
        band: usize,
        total: f64,
    }

    impl<K: LocalKernel + ?Sized> Walk<'_, K> {
        // `acc` is the ⋆-combination of the local values so far, `weight`
        // the normaliser power.
        fn go(&mut self, i: usize, j: usize, acc: f64, weight: f64) {
            if i.abs_diff(j) > self.band {
                return;
            }
            let (p, q) = (self.k.len_a(), self.k.len_b());
            if i == p && j == q {
                self.total += weight
                    * match self.rec.star {
                        Star::Add => self.rec.xi + acc,
                        Star::Multiply => self.rec.xi * acc,
                    };
                return;
            }
            let c = self.rec.normalizer;
            let star = self.rec.star;
            let combine = |acc: f64, v: f64| match star {
                Star::Add => acc + v,
                Star::Multiply => acc * v,
            };
            if i < p {
                if let Some(v) = self.k.delete(i + 1, j) {
                    self.go(i + 1, j, combine(acc, v), weight * c);
                }
            }
            if i < p && j < q {
                if let Some(v) = self.k.substitute(i + 1, j + 1) {
                    self.go(i + 1, j + 1, combine(acc, v), weight * c);
                }
            }
            if j < q {
                if let Some(v) = self.k.insert(i, j + 1) {
                    self.go(i, j + 1, combine(acc, v), weight * c);
                }
            }
        }
    }

    let identity = match rec.star {
        Star::Add => 0.0,
        Star::Multiply => 1.0,
    };
    let mut walk = Walk {
        k,
        rec,
        band: w,
        total: 0.0,
    };
    walk.go(0, 0, identity, 1.0);
    Ok(walk.total)
}

/// Kernel families exposed through [`KernelId`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    StwkLev,
    StwkDtw,
    StwkErp,
    StwkTwed,
    Twip1,
    Twip2,
    EuclidDot,
}

impl KernelFamily {
    pub fn is_multiplicative(self) -> bool {
        matches!(
            self,
            Self::StwkLev | Self::StwkDtw | Self::StwkErp | Self::StwkTwed
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::StwkLev => "stwk_lev",
            Self::StwkDtw => "stwk_dtw",
            Self::StwkErp => "stwk_erp",
            Self::StwkTwed => "stwk_twed",
            Self::Twip1 => "twip1",
            Self::Twip2 => "twip2",
            Self::EuclidDot => "euclid_dot",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "stwk_lev" => Self::StwkLev,
            "stwk_dtw" => Self::StwkDtw,
            "stwk_erp" => Self::StwkErp,
            "stwk_twed" => Self::StwkTwed,
            "twip1" => Self::Twip1,
            "twip2" => Self::Twip2,
            "euclid_dot" => Self::EuclidDot,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelParams {
    /// Stiffness ν′ of the exponentiated local kernels.
    pub nu_prime: f64,
    /// Stiffness ν of the time-warp inner products.
    pub nu: f64,
    /// `<Ω, Ω>`; defaults to 1 for multiplicative and 0 for additive kernels.
    pub xi: Option<f64>,
    /// Costs of the underlying distance; `corridor` also restricts the kernel.
    pub base: CostParams,
}

impl Default for KernelParams {
    fn default() -> Self {
        Self {
            nu_prime: 1.0,
            nu: 1.0,
            xi: None,
            base: CostParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelId {
    pub family: KernelFamily,
    pub params: KernelParams,
}

impl KernelId {
    pub fn new(family: KernelFamily, params: KernelParams) -> Self {
        Self { family, params }
    }

    fn multiplicative_recursion(&self) -> Result<SummativeRecursion> {
        if !self.family.is_multiplicative() {
            return Err(Error::EmptyParams(format!(
                "{} is not a multiplicative exponentiated kernel",
                self.family.name()
            )));
        }
        let p = &self.params;
        if !(p.nu_prime > 0.0) {
            return Err(Error::EmptyParams(format!(
                "{} needs nu_prime > 0",
                self.family.name()
            )));
        }
        let xi = p.xi.unwrap_or(1.0);
        if !(xi > 0.0) {
            return Err(Error::InvalidParam(format!(
                "multiplicative kernels need xi > 0, got {xi}"
            )));
        }
        p.base.validate()?;
        Ok(SummativeRecursion::new(Star::Multiply, xi)
            .with_normalizer(1.0 / 3.0)
            .with_corridor(p.base.corridor))
    }

    fn twip_variant(&self) -> Result<TwipVariant> {
        let v = match self.family {
            KernelFamily::Twip1 => TwipVariant::One,
            KernelFamily::Twip2 => TwipVariant::Two,
            other => {
                return Err(Error::InvalidParam(format!(
                    "{} is not a time-warp inner product",
                    other.name()
                )))
            }
        };
        if self.params.xi.is_some_and(|x| x != 0.0) {
            return Err(Error::InvalidParam(
                "time-warp inner products require xi = 0".into(),
            ));
        }
        Ok(v)
    }
}

/// Runs `f` on the multiplicative local kernel of `id`'s family.
fn with_exp_local<R>(
    a: &TimeSeries,
    b: &TimeSeries,
    id: &KernelId,
    f: impl FnOnce(&dyn LocalKernel) -> Result<R>,
) -> Result<R> {
    let p = &id.params;
    let nu_prime = p.nu_prime;
    match id.family {
        KernelFamily::StwkLev => {
            check_dims(a, b)?;
            let ta: Vec<&[f64]> = (0..a.len()).map(|i| a.value(i)).collect();
            let tb: Vec<&[f64]> = (0..b.len()).map(|i| b.value(i)).collect();
            f(&Exponentiated {
                costs: LevenshteinCosts { a: &ta, b: &tb },
                nu_prime,
            })
        }
        KernelFamily::StwkDtw => f(&Exponentiated {
            costs: DtwCosts::new(a, b, p.base.norm)?,
            nu_prime,
        }),
        KernelFamily::StwkErp => f(&Exponentiated {
            costs: ErpCosts::new(a, b, &p.base)?,
            nu_prime,
        }),
        KernelFamily::StwkTwed => f(&Exponentiated {
            costs: TwedCosts::new(a, b, &p.base)?,
            nu_prime,
        }),
        other => Err(Error::EmptyParams(format!(
            "{} is not a multiplicative exponentiated kernel",
            other.name()
        ))),
    }
}

/// Multiplicative exponentiated STWK on time series. For `stwk_lev`, sample
/// values act as tokens compared by equality.
pub fn stwk_me(a: &TimeSeries, b: &TimeSeries, id: &KernelId) -> Result<f64> {
    let rec = id.multiplicative_recursion()?;
    with_exp_local(a, b, id, |k| rec.evaluate(k))
}

/// Natural log of [`stwk_me`], immune to underflow on long series.
pub fn stwk_me_log(a: &TimeSeries, b: &TimeSeries, id: &KernelId) -> Result<f64> {
    let rec = id.multiplicative_recursion()?;
    with_exp_local(a, b, id, |k| rec.evaluate_log(k))
}

/// Multiplicative exponentiated Levenshtein kernel on token sequences.
pub fn stwk_lev<T: PartialEq>(a: &[T], b: &[T], params: &KernelParams) -> Result<f64> {
    let id = KernelId::new(KernelFamily::StwkLev, params.clone());
    let rec = id.multiplicative_recursion()?;
    rec.evaluate(&Exponentiated {
        costs: LevenshteinCosts { a, b },
        nu_prime: params.nu_prime,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TwipVariant {
    One,
    Two,
}

/// Time-warp inner product.
///
/// Delete/insert branches carry no local term (variant 1) or an `e^{−ν}`
/// weight on the predecessor (variant 2); the match branch adds
/// `e^{−ν·|t_a − t_b|} · (a · b)`. Every cell is scaled by 1/3
/// (variant 1) or `1 / (1 + 2 e^{−ν})` (variant 2), with `<Ω, Ω> = 0`.
pub fn twip(
    a: &TimeSeries,
    b: &TimeSeries,
    nu: f64,
    variant: TwipVariant,
    corridor: Option<usize>,
) -> Result<f64> {
    if !(nu >= 0.0) {
        return Err(Error::InvalidParam(format!("nu = {nu} < 0")));
    }
    check_dims(a, b)?;
    let (p, q) = (a.len(), b.len());
    let w = corridor_width(p, q, corridor)?;
    let (gap, norm) = match variant {
        TwipVariant::One => (1.0, 1.0 / 3.0),
        TwipVariant::Two => {
            let e = (-nu).exp();
            (e, 1.0 / (1.0 + 2.0 * e))
        }
    };
    // With ξ = 0 every cell on row or column 0 is zero.
    let mut prev = vec![0.0; q + 2];
    let mut cur = vec![0.0; q + 2];
    for i in 1..=p {
        let lo = i.saturating_sub(w).max(1);
        let hi = (i + w).min(q);
        cur[lo - 1] = 0.0;
        cur[hi + 1] = 0.0;
        let (x, tx) = (a.value(i - 1), a.time(i - 1));
        for j in lo..=hi {
            let local = (-nu * (tx - b.time(j - 1)).abs()).exp() * dot(x, b.value(j - 1));
            cur[j] = norm * (gap * prev[j] + prev[j - 1] + local + gap * cur[j - 1]);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[q])
}

pub fn twip1(a: &TimeSeries, b: &TimeSeries, nu: f64) -> Result<f64> {
    twip(a, b, nu, TwipVariant::One, None)
}

pub fn twip2(a: &TimeSeries, b: &TimeSeries, nu: f64) -> Result<f64> {
    twip(a, b, nu, TwipVariant::Two, None)
}

/// Norm of `A ⊕ (−1 ⊗ B)` under the chosen inner product. The operands must
/// share length and timestamps.
pub fn twip_distance(a: &TimeSeries, b: &TimeSeries, nu: f64, variant: TwipVariant) -> Result<f64> {
    check_same_support(a, b)?;
    let diff = add(a, &scale(-1.0, b))?;
    Ok(twip(&diff, &diff, nu, variant, None)?.max(0.0).sqrt())
}

/// `sqrt(<A,A> + <B,B> − 2<A,B>)`: the distance induced by the inner
/// product, also defined for series of different lengths.
pub fn twip_induced_distance(
    a: &TimeSeries,
    b: &TimeSeries,
    nu: f64,
    variant: TwipVariant,
    corridor: Option<usize>,
) -> Result<f64> {
    let aa = twip(a, a, nu, variant, corridor)?;
    let bb = twip(b, b, nu, variant, corridor)?;
    let ab = twip(a, b, nu, variant, corridor)?;
    Ok((aa + bb - 2.0 * ab).max(0.0).sqrt())
}

/// Euclidean inner product of equal-length series.
pub fn euclid_dot(a: &TimeSeries, b: &TimeSeries) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    check_dims(a, b)?;
    Ok(dot(a.values(), b.values()))
}

/// Kernel value for any family.
pub fn kernel_value(a: &TimeSeries, b: &TimeSeries, id: &KernelId) -> Result<f64> {
    match id.family {
        KernelFamily::Twip1 | KernelFamily::Twip2 => {
            let v = id.twip_variant()?;
            twip(a, b, id.params.nu, v, id.params.base.corridor)
        }
        KernelFamily::EuclidDot => euclid_dot(a, b),
        _ => stwk_me(a, b, id),
    }
}

/// Distance induced by the kernel in its feature space.
///
/// Multiplicative kernels are cosine-normalised first (in the log domain),
/// giving `d² = 2 − 2·k(A,B)/sqrt(k(A,A)·k(B,B))`; the inner products use
/// `d² = <A,A> + <B,B> − 2<A,B>` unnormalised.
pub fn kernel_induced_distance(a: &TimeSeries, b: &TimeSeries, id: &KernelId) -> Result<f64> {
    match id.family {
        KernelFamily::Twip1 | KernelFamily::Twip2 => {
            let v = id.twip_variant()?;
            twip_induced_distance(a, b, id.params.nu, v, id.params.base.corridor)
        }
        KernelFamily::EuclidDot => crate::distance::euclidean(a, b),
        _ => {
            let cos = normalized_kernel(a, b, id)?;
            Ok((2.0 - 2.0 * cos).max(0.0).sqrt())
        }
    }
}

/// `k(A,B) / sqrt(k(A,A)·k(B,B))`, computed in the log domain for the
/// multiplicative kernels.
pub fn normalized_kernel(a: &TimeSeries, b: &TimeSeries, id: &KernelId) -> Result<f64> {
    if id.family.is_multiplicative() {
        let ab = stwk_me_log(a, b, id)?;
        let aa = stwk_me_log(a, a, id)?;
        let bb = stwk_me_log(b, b, id)?;
        if ab == f64::NEG_INFINITY {
            return Ok(0.0);
        }
        return Ok((ab - 0.5 * (aa + bb)).exp().min(1.0));
    }
    let ab = kernel_value(a, b, id)?;
    let aa = kernel_value(a, a, id)?;
    let bb = kernel_value(b, b, id)?;
    let den = (aa * bb).sqrt();
    Ok(if den > 0.0 { ab / den } else { 0.0 })
}
