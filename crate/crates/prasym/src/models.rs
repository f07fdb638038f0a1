//! Seeded construction of random graph families and their expected-degree
//! vectors.
//!
//! Every generator samples each unordered pair `{i, j}`, `i < j`,
//! independently by comparing a counter-based uniform for that pair against
//! the model's edge probability. The uniform stream is shared across
//! models, so two models whose probabilities coincide (constant-weight
//! Chung-Lu and `G(n, w/n)`, or a block model with `p = q = r` and
//! `G(n, r)`) produce bit-identical graphs from the same seed. Self-loops
//! are never sampled.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng;

/// Recipe for an expected-degree vector.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightSpec {
    /// All vertices share the same expected degree.
    Constant { weight: f64 },
    /// I.i.d. geometric draws with mean `target_mean`, clipped into
    /// `[L, ratio * L]` where `L` is tuned so the post-clip mean matches
    /// `target_mean` within 1%.
    GeometricClipped { target_mean: f64, ratio: f64 },
    /// `w_i = c (i0 + i)^{-1/(beta-1)}` for `i = 1..n`, with
    /// `c = ((beta-2)/(beta-1)) * avg_degree * n^{1/(beta-1)}` and the
    /// index offset `i0` chosen by `offset`.
    PowerLaw {
        beta: f64,
        avg_degree: f64,
        max_degree: f64,
        offset: PowerLawOffset,
    },
    /// An explicit vector of positive expected degrees.
    Explicit { weights: Vec<f64> },
}

/// The two published forms of the power-law index offset `i0`. Both are
/// implemented because the literature is not consistent; neither is
/// asserted correct.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerLawOffset {
    /// `i0 = n * (avg (beta-1)) / (max (beta-2))` — a plain ratio.
    LinearRatio,
    /// `i0 = n * ((avg (beta-2)) / (max (beta-1)))^{beta-1}` — the form for
    /// which the largest weight equals `max_degree` exactly.
    PoweredRatio,
}

impl WeightSpec {
    pub fn constant(weight: f64) -> Self {
        WeightSpec::Constant { weight }
    }

    pub fn explicit(weights: Vec<f64>) -> Self {
        WeightSpec::Explicit { weights }
    }
}

/// Realize a weight spec into a concrete positive vector of length `n`.
/// The seed only matters for the geometric-clipped variant; it is mixed
/// into a per-vertex stream independent of the edge stream.
pub fn realize_weights(spec: &WeightSpec, n: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::parameter("weight vector length must be >= 1"));
    }
    match spec {
        WeightSpec::Constant { weight } => {
            if *weight <= 0.0 || !weight.is_finite() {
                return Err(Error::parameter(format!(
                    "constant weight must be positive, got {weight}"
                )));
            }
            Ok(vec![*weight; n])
        }
        WeightSpec::GeometricClipped { target_mean, ratio } => {
            geometric_clipped(*target_mean, *ratio, n, seed)
        }
        WeightSpec::PowerLaw {
            beta,
            avg_degree,
            max_degree,
            offset,
        } => power_law(*beta, *avg_degree, *max_degree, *offset, n),
        WeightSpec::Explicit { weights } => {
            if weights.len() != n {
                return Err(Error::parameter(format!(
                    "explicit weight vector has length {}, expected {n}",
                    weights.len()
                )));
            }
            if let Some(i) = weights.iter().position(|w| !(*w > 0.0) || !w.is_finite()) {
                return Err(Error::parameter(format!(
                    "weight at index {i} must be positive, got {}",
                    weights[i]
                )));
            }
            Ok(weights.clone())
        }
    }
}

fn geometric_clipped(target_mean: f64, ratio: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    if !(target_mean >= 1.0) || !target_mean.is_finite() {
        return Err(Error::parameter(format!(
            "geometric target mean must be >= 1, got {target_mean}"
        )));
    }
    if !(ratio > 1.0) || !ratio.is_finite() {
        return Err(Error::parameter(format!(
            "clip ratio must be > 1, got {ratio}"
        )));
    }
    // Geometric on {1, 2, ...} with success probability 1/target_mean.
    let theta = 1.0 / target_mean;
    let log1m = (1.0 - theta).ln();
    let draws: Vec<f64> = (0..n)
        .map(|i| {
            let u = rng::unit(seed, rng::tag::WEIGHT, i as u64);
            // Inverse CDF; u = 0 maps to 1.
            1.0 + ((1.0 - u).ln() / log1m).floor()
        })
        .collect();
    let clipped_mean = |low: f64| -> f64 {
        let high = ratio * low;
        draws.iter().map(|&x| x.clamp(low, high)).sum::<f64>() / n as f64
    };
    // The clipped mean is continuous and nondecreasing in the lower clip,
    // from ~0 up to +inf, so bisection always lands in the 1% band.
    let (mut lo, mut hi) = (f64::MIN_POSITIVE, target_mean * 2.0);
    while clipped_mean(hi) < target_mean {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::parameter(
                "clipping cannot reach the target mean".to_string(),
            ));
        }
    }
    let mut low = target_mean; // placeholder, set below
    for _ in 0..200 {
        low = 0.5 * (lo + hi);
        let m = clipped_mean(low);
        if (m - target_mean).abs() <= 0.01 * target_mean {
            break;
        }
        if m < target_mean {
            lo = low;
        } else {
            hi = low;
        }
    }
    let m = clipped_mean(low);
    if (m - target_mean).abs() > 0.01 * target_mean {
        return Err(Error::parameter(format!(
            "clipped mean {m} cannot match target {target_mean} within 1%"
        )));
    }
    let high = ratio * low;
    Ok(draws.iter().map(|&x| x.clamp(low, high)).collect())
}

fn power_law(
    beta: f64,
    avg_degree: f64,
    max_degree: f64,
    offset: PowerLawOffset,
    n: usize,
) -> Result<Vec<f64>> {
    if !(beta > 2.0) {
        return Err(Error::parameter(format!(
            "power-law exponent must be > 2, got {beta}"
        )));
    }
    if !(avg_degree > 0.0) || !(max_degree > 0.0) {
        return Err(Error::parameter(
            "power-law average and max degree must be positive".to_string(),
        ));
    }
    let nf = n as f64;
    let c = (beta - 2.0) / (beta - 1.0) * avg_degree * nf.powf(1.0 / (beta - 1.0));
    let i0 = match offset {
        PowerLawOffset::LinearRatio => nf * (avg_degree * (beta - 1.0)) / (max_degree * (beta - 2.0)),
        PowerLawOffset::PoweredRatio => {
            nf * ((avg_degree * (beta - 2.0)) / (max_degree * (beta - 1.0))).powf(beta - 1.0)
        }
    };
    let expo = -1.0 / (beta - 1.0);
    Ok((1..=n).map(|i| c * (i0 + i as f64).powf(expo)).collect())
}

/// Two-community stochastic block model parameters.
///
/// Vertices `0..m` form community 1, `m..n` community 2. Within-community
/// pairs connect with probability `p`, cross pairs with probability `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SbmParams {
    pub m: usize,
    pub n: usize,
    pub p: f64,
    pub q: f64,
}

impl SbmParams {
    pub fn new(m: usize, n: usize, p: f64, q: f64) -> Result<SbmParams> {
        if m < 1 || m > n.saturating_sub(1) {
            return Err(Error::parameter(format!(
                "community size m = {m} must satisfy 1 <= m <= n-1 (n = {n})"
            )));
        }
        for (name, v) in [("p", p), ("q", q)] {
            if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                return Err(Error::parameter(format!(
                    "probability {name} = {v} outside [0, 1]"
                )));
            }
        }
        Ok(SbmParams { m, n, p, q })
    }

    /// Expected degree of a community-1 vertex (diagonal-p convention).
    pub fn expected_degree_c1(&self) -> f64 {
        self.m as f64 * self.p + (self.n - self.m) as f64 * self.q
    }

    /// Expected degree of a community-2 vertex.
    pub fn expected_degree_c2(&self) -> f64 {
        (self.n - self.m) as f64 * self.p + self.m as f64 * self.q
    }

    pub fn w_max(&self) -> f64 {
        self.expected_degree_c1().max(self.expected_degree_c2())
    }

    pub fn w_min(&self) -> f64 {
        self.expected_degree_c1().min(self.expected_degree_c2())
    }

    /// Community contrast `(p - q) / (p + q)`. Only meaningful when
    /// `p + q > 0`.
    pub fn beta(&self) -> f64 {
        (self.p - self.q) / (self.p + self.q)
    }

    /// Expected degree vector (diagonal-p convention).
    pub fn expected_degrees(&self) -> Vec<f64> {
        let (w1, w2) = (self.expected_degree_c1(), self.expected_degree_c2());
        (0..self.n)
            .map(|i| if i < self.m { w1 } else { w2 })
            .collect()
    }
}

/// The expected adjacency of a block model as an implicit rank-2 operator:
/// value `p` on within-community pairs (including the diagonal, by
/// convention) and `q` across. The diagonal convention intentionally
/// differs from the loop-free generator; the discrepancy is `-p I`.
#[derive(Debug, Clone, Copy)]
pub struct SbmExpectedAdjacency {
    params: SbmParams,
}

/// Rank-2 description of the expected adjacency matrix `E(A)`.
pub fn expected_adjacency_sbm(params: SbmParams) -> SbmExpectedAdjacency {
    SbmExpectedAdjacency { params }
}

impl SbmExpectedAdjacency {
    pub fn params(&self) -> SbmParams {
        self.params
    }

    /// `y = E(A) x` in O(n).
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let SbmParams { m, n, p, q } = self.params;
        debug_assert_eq!(x.len(), n);
        let s1: f64 = x[..m].iter().sum();
        let s2: f64 = x[m..].iter().sum();
        let (a, b) = (p * s1 + q * s2, q * s1 + p * s2);
        y[..m].fill(a);
        y[m..].fill(b);
    }
}

/// The expected adjacency matrix of a generator as an implicit low-rank
/// operator, used by the norm verifiers. The diagonal follows the same
/// full-block / rank-one convention as [`SbmExpectedAdjacency`], so the
/// row sums equal the model's expected degrees exactly.
#[derive(Debug, Clone)]
pub enum ExpectedAdjacency {
    /// Chung-Lu style: `E(A)_ij = w_i w_j / sum(w)`.
    Rank1 { weights: Vec<f64>, total: f64 },
    /// Two-community block model, value `p` within and `q` across.
    TwoBlock(SbmParams),
}

impl ExpectedAdjacency {
    pub fn rank1(weights: Vec<f64>) -> Result<ExpectedAdjacency> {
        if weights.is_empty() {
            return Err(Error::parameter("weight vector must be nonempty"));
        }
        if let Some(i) = weights.iter().position(|w| !(*w > 0.0)) {
            return Err(Error::parameter(format!(
                "weight at index {i} must be positive"
            )));
        }
        let total = weights.iter().sum();
        Ok(ExpectedAdjacency::Rank1 { weights, total })
    }

    pub fn two_block(params: SbmParams) -> ExpectedAdjacency {
        ExpectedAdjacency::TwoBlock(params)
    }

    pub fn dim(&self) -> usize {
        match self {
            ExpectedAdjacency::Rank1 { weights, .. } => weights.len(),
            ExpectedAdjacency::TwoBlock(p) => p.n,
        }
    }

    /// `y = E(A) x` in O(n).
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        match self {
            ExpectedAdjacency::Rank1 { weights, total } => {
                let s: f64 = weights.iter().zip(x).map(|(w, xi)| w * xi).sum();
                let scale = s / total;
                for (yi, w) in y.iter_mut().zip(weights) {
                    *yi = scale * w;
                }
            }
            ExpectedAdjacency::TwoBlock(params) => {
                expected_adjacency_sbm(*params).matvec(x, y);
            }
        }
    }

    /// Row sums (the model's expected degrees under the diagonal
    /// convention).
    pub fn expected_degrees(&self) -> Vec<f64> {
        match self {
            ExpectedAdjacency::Rank1 { weights, .. } => weights.clone(),
            ExpectedAdjacency::TwoBlock(params) => params.expected_degrees(),
        }
    }

    pub fn w_max(&self) -> f64 {
        self.expected_degrees()
            .iter()
            .fold(0.0f64, |a, &b| a.max(b))
    }

    pub fn w_min(&self) -> f64 {
        self.expected_degrees()
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b))
    }

    /// Dense realization (oracle path for small n).
    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let n = self.dim();
        let mut a = nalgebra::DMatrix::zeros(n, n);
        match self {
            ExpectedAdjacency::Rank1 { weights, total } => {
                for i in 0..n {
                    for j in 0..n {
                        a[(i, j)] = weights[i] * weights[j] / total;
                    }
                }
            }
            ExpectedAdjacency::TwoBlock(params) => {
                for i in 0..n {
                    for j in 0..n {
                        a[(i, j)] = if (i < params.m) == (j < params.m) {
                            params.p
                        } else {
                            params.q
                        };
                    }
                }
            }
        }
        a
    }
}

/// Erdős–Rényi graph `G(n, p)`: each pair is an edge independently with
/// probability `p`. Identical `(n, p, seed)` reproduce the identical graph
/// at any thread count.
pub fn gen_er(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(Error::parameter(format!("edge probability {p} outside [0, 1]")));
    }
    if n == 0 {
        return Err(Error::parameter("graph must have at least one vertex"));
    }
    Ok(sample_pairs(n, seed, |_, _| p))
}

/// Chung-Lu graph with expected degrees `w`: pair `{i, j}` is an edge with
/// probability `w_i w_j / sum(w)`.
pub fn gen_chung_lu(spec: &WeightSpec, n: usize, seed: u64) -> Result<Graph> {
    let w = realize_weights(spec, n, seed)?;
    gen_chung_lu_with(&w, seed)
}

/// Chung-Lu generation from an already realized weight vector.
pub fn gen_chung_lu_with(w: &[f64], seed: u64) -> Result<Graph> {
    let n = w.len();
    if n == 0 {
        return Err(Error::parameter("graph must have at least one vertex"));
    }
    let total: f64 = w.iter().sum();
    let (argmax, &wmax) = w
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    if wmax * wmax > total {
        return Err(Error::parameter(format!(
            "infeasible weights: w[{argmax}]^2 = {:.6} exceeds sum {:.6}",
            wmax * wmax,
            total
        )));
    }
    let inv_total = 1.0 / total;
    Ok(sample_pairs(n, seed, |i, j| w[i] * w[j] * inv_total))
}

/// Two-community stochastic block model graph. Pass `allow_q_above_p` to
/// permit `q > p` (disassortative) instances.
pub fn gen_sbm(params: &SbmParams, seed: u64, allow_q_above_p: bool) -> Result<Graph> {
    if params.q > params.p && !allow_q_above_p {
        return Err(Error::parameter(format!(
            "q = {} > p = {}; the block model assumes p >= q (override to permit)",
            params.q, params.p
        )));
    }
    let (m, p, q) = (params.m, params.p, params.q);
    Ok(sample_pairs(params.n, seed, move |i, j| {
        if (i < m) == (j < m) {
            p
        } else {
            q
        }
    }))
}

/// Sample all pairs i < j against `prob(i, j)` using the shared per-pair
/// uniform stream. Rows are generated in parallel; output does not depend
/// on the number of threads.
fn sample_pairs<F>(n: usize, seed: u64, prob: F) -> Graph
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    let upper: Vec<Vec<u32>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = Vec::new();
            for j in (i + 1)..n {
                let p = prob(i, j);
                if p >= 1.0 || rng::pair_unit(seed, i as u32, j as u32) < p {
                    row.push(j as u32);
                }
            }
            row
        })
        .collect();
    Graph::from_upper_rows(n, &upper)
}
