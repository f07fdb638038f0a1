//! Closed-form asymptotic approximations of PageRank.
//!
//! For expander-like graphs PageRank tends to the mixture
//! `alpha d / vol + (1 - alpha) v` of the walk's stationary vector and the
//! restart distribution. For the two-community block model the limit picks
//! up a correction along the community split vector; it is computed here
//! exactly in O(n) by reducing the block-structured resolvent to a 2x2
//! system in community aggregates.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::metrics::pairwise_sum;
use crate::models::SbmParams;
use crate::pagerank::PreferenceVector;

/// Mixture approximation `alpha d/vol + (1 - alpha) v`. Exact formula, no
/// iteration; defined for the full closed interval `alpha in [0, 1]`.
pub fn approx_mixture(g: &Graph, v: &PreferenceVector, alpha: f64) -> Result<Vec<f64>> {
    if g.volume() == 0 {
        return Err(Error::structure("graph has no edges"));
    }
    if v.len() != g.n() {
        return Err(Error::parameter("preference length mismatch"));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::parameter(format!("alpha {alpha} outside [0, 1]")));
    }
    let vol = g.volume() as f64;
    Ok(g.degrees()
        .iter()
        .zip(v.as_slice())
        .map(|(&d, &vi)| alpha * d as f64 / vol + (1.0 - alpha) * vi)
        .collect())
}

/// Structure shared by the block-model approximations: the community
/// contrast `beta = (p - q)/(p + q)` and the unit split vector `u`
/// (+1/sqrt(n) on community 1, -1/sqrt(n) on community 2).
#[derive(Debug, Clone)]
pub struct SbmApproxStructure {
    pub beta: f64,
    pub u: Vec<f64>,
    m: usize,
}

impl SbmApproxStructure {
    pub fn new(params: &SbmParams) -> SbmApproxStructure {
        let n = params.n;
        let s = 1.0 / (n as f64).sqrt();
        let u = (0..n)
            .map(|i| if i < params.m { s } else { -s })
            .collect();
        SbmApproxStructure {
            beta: params.beta(),
            u,
            m: params.m,
        }
    }

    /// Per-community sums of a vector — the two aggregates that drive the
    /// rank-reduced resolvent solve.
    pub fn community_sums(&self, x: &[f64]) -> (f64, f64) {
        (
            pairwise_sum(&x[..self.m]),
            pairwise_sum(&x[self.m..]),
        )
    }
}

/// Solve `(I - alpha Pbar) x = (1 - alpha) v` exactly in O(n), where
/// `Pbar = E(A) W^{-1}` is the average Markov matrix of the block model
/// (diagonal-p convention). Works for any community sizes.
pub fn approx_sbm_general(
    params: &SbmParams,
    v: &PreferenceVector,
    alpha: f64,
) -> Result<Vec<f64>> {
    if v.len() != params.n {
        return Err(Error::parameter(format!(
            "preference length {} does not match n = {}",
            v.len(),
            params.n
        )));
    }
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::parameter(format!("alpha {alpha} outside [0, 1)")));
    }
    let (m, n, p, q) = (params.m, params.n, params.p, params.q);
    let (w1, w2) = (params.expected_degree_c1(), params.expected_degree_c2());
    let structure = SbmApproxStructure::new(params);
    let (v1, v2) = structure.community_sums(v.as_slice());

    // x_i = (1-a) v_i + a (p X1/w1 + q X2/w2)      for i in C1
    // x_i = (1-a) v_i + a (q X1/w1 + p X2/w2)      for i in C2
    // Summing per community closes a 2x2 system in (X1, X2).
    let mf = m as f64;
    let rf = (n - m) as f64;
    let a11 = 1.0 - alpha * mf * p / w1;
    let a12 = -alpha * mf * q / w2;
    let a21 = -alpha * rf * q / w1;
    let a22 = 1.0 - alpha * rf * p / w2;
    let det = a11 * a22 - a12 * a21;
    // The 2x2 block matrix is column-stochastic, so I - alpha * (block)
    // is invertible for alpha < 1.
    assert!(
        det.abs() > 1e-300,
        "rank-reduced resolvent is singular (det = {det})"
    );
    let b1 = (1.0 - alpha) * v1;
    let b2 = (1.0 - alpha) * v2;
    let x1 = (b1 * a22 - b2 * a12) / det;
    let x2 = (b2 * a11 - b1 * a21) / det;

    let c1 = alpha * (p * x1 / w1 + q * x2 / w2);
    let c2 = alpha * (q * x1 / w1 + p * x2 / w2);
    Ok(v
        .as_slice()
        .iter()
        .enumerate()
        .map(|(i, &vi)| (1.0 - alpha) * vi + if i < m { c1 } else { c2 })
        .collect())
}

/// Closed form for equal communities (`m = n/2`, `n` even):
/// `alpha/n 1 + (1 - alpha)(v + alpha beta/(1 - alpha beta) (v^T u) u)`.
pub fn approx_sbm_equal(
    n: usize,
    p: f64,
    q: f64,
    v: &PreferenceVector,
    alpha: f64,
) -> Result<Vec<f64>> {
    if n % 2 != 0 {
        return Err(Error::parameter(format!(
            "equal-community closed form needs even n, got {n}"
        )));
    }
    let params = SbmParams::new(n / 2, n, p, q)?;
    if v.len() != n {
        return Err(Error::parameter("preference length mismatch"));
    }
    let structure = SbmApproxStructure::new(&params);
    let beta = structure.beta;
    if !(alpha * beta < 1.0) {
        return Err(Error::parameter(format!(
            "alpha beta = {} must be below 1",
            alpha * beta
        )));
    }
    let vu: f64 = {
        let terms: Vec<f64> = v
            .as_slice()
            .iter()
            .zip(&structure.u)
            .map(|(a, b)| a * b)
            .collect();
        pairwise_sum(&terms)
    };
    let coef = alpha * beta / (1.0 - alpha * beta) * vu;
    Ok(v
        .as_slice()
        .iter()
        .zip(&structure.u)
        .map(|(&vi, &ui)| alpha / n as f64 + (1.0 - alpha) * (vi + coef * ui))
        .collect())
}

/// Componentwise error `pi - pibar`. Both inputs sum to 1, so the entries
/// sum to zero.
pub fn error_vector(pi: &[f64], pibar: &[f64]) -> Result<Vec<f64>> {
    if pi.len() != pibar.len() {
        return Err(Error::parameter(format!(
            "length mismatch: {} vs {}",
            pi.len(),
            pibar.len()
        )));
    }
    Ok(pi.iter().zip(pibar).map(|(a, b)| a - b).collect())
}
