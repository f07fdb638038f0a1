//! Empirical measurement of the concentration and spectral-norm bounds
//! behind the asymptotic approximations.
//!
//! Each check computes a measurable quantity on a realized graph, the
//! corresponding bound with an explicit constant, and a pass flag. The
//! bounds hold with high probability, so sweep harnesses aggregate pass
//! rates over seeds rather than treating a single failure as fatal.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::metrics::pairwise_sum;
use crate::models::ExpectedAdjacency;
use crate::pagerank::{pagerank_dense, PreferenceVector};
use crate::spectral::{
    dense_q, matvec_q, neighbor_sums, perron_vector, second_eigenvalue_magnitude,
    spectral_norm_sym, FnOp,
};
use crate::{asymptotics, DENSE_LIMIT};

/// One measured bound: `passed` holds exactly when `measured <= bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    pub constant_used: f64,
    pub passed: bool,
    pub n: usize,
    pub seed: u64,
    /// Extra context: "uninformative" when the bound exceeds the trivial
    /// range, "estimate-not-converged" when the iterative measurement hit
    /// its iteration cap.
    pub note: Option<String>,
}

impl BoundCheck {
    fn new(
        name: &str,
        measured: f64,
        bound: f64,
        constant_used: f64,
        n: usize,
        seed: u64,
    ) -> BoundCheck {
        BoundCheck {
            name: name.to_string(),
            measured,
            bound,
            constant_used,
            passed: measured <= bound,
            n,
            seed,
            note: None,
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> BoundCheck {
        self.note = Some(note.into());
        self
    }
}

/// Degree concentration: `max_i |d_i / w_i - 1|` against
/// `C sqrt(log(n) / w_min)`.
pub fn check_degree_concentration(
    g: &Graph,
    w: &[f64],
    c: f64,
    seed: u64,
) -> Result<BoundCheck> {
    if w.len() != g.n() {
        return Err(Error::parameter("weight vector length mismatch"));
    }
    if let Some(i) = w.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::parameter(format!("zero weight at index {i}")));
    }
    let measured = g
        .degrees()
        .iter()
        .zip(w)
        .map(|(&d, &wi)| (d as f64 / wi - 1.0).abs())
        .fold(0.0, f64::max);
    let w_min = w.iter().cloned().fold(f64::INFINITY, f64::min);
    let bound = c * ((g.n() as f64).ln() / w_min).sqrt();
    let check = BoundCheck::new("degree-concentration", measured, bound, c, g.n(), seed);
    if bound >= 1.0 {
        Ok(check.with_note("uninformative: bound exceeds 1"))
    } else {
        Ok(check)
    }
}

/// Bounded degree spread: `d_max / d_min` against a caller-supplied `K`.
pub fn check_degree_ratio(g: &Graph, k: f64, seed: u64) -> Result<BoundCheck> {
    let d_min = g.min_degree();
    if d_min == 0 {
        return Err(Error::structure("isolated vertex"));
    }
    let measured = g.max_degree() as f64 / d_min as f64;
    Ok(BoundCheck::new("degree-ratio", measured, k, k, g.n(), seed))
}

/// Spectral expansion: the second eigenvalue magnitude of `Q` against a
/// caller-supplied threshold (e.g. `3 / sqrt(mean degree)`).
pub fn check_spectral_expansion(
    g: &Graph,
    threshold: f64,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<BoundCheck> {
    let est = second_eigenvalue_magnitude(g, tol, max_iter, seed)?;
    let mut check = BoundCheck::new(
        "spectral-expansion",
        est.value,
        threshold,
        threshold,
        g.n(),
        seed,
    );
    if !est.converged {
        check = check.with_note("estimate-not-converged");
    }
    Ok(check)
}

/// Adjacency concentration: `||A - E(A)||_2` against
/// `K sqrt(log(n) w_max)`. The expected adjacency keeps its full-block
/// diagonal, so the loop-free generator contributes an extra `-p I`
/// inside the measured norm.
pub fn check_adjacency_norm(
    g: &Graph,
    expected: &ExpectedAdjacency,
    k: f64,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<BoundCheck> {
    let n = g.n();
    if expected.dim() != n {
        return Err(Error::parameter("expected adjacency dimension mismatch"));
    }
    let op = FnOp::new(n, |x: &[f64], y: &mut [f64]| {
        let mut ax = vec![0.0; n];
        neighbor_sums(g, x, &mut ax);
        expected.matvec(x, y);
        for i in 0..n {
            y[i] = ax[i] - y[i];
        }
    });
    let est = spectral_norm_sym(&op, tol, max_iter, seed);
    let bound = k * ((n as f64).ln() * expected.w_max()).sqrt();
    let mut check = BoundCheck::new("adjacency-norm", est.value, bound, k, n, seed);
    if !est.converged {
        check = check.with_note("estimate-not-converged");
    }
    Ok(check)
}

/// Normalized-walk concentration: `||Q - Qbar||_2` with
/// `Qbar = W^{-1/2} E(A) W^{-1/2}` against `C sqrt(log(n) w_max) / w_min`.
pub fn check_q_norm(
    g: &Graph,
    expected: &ExpectedAdjacency,
    c: f64,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<BoundCheck> {
    let n = g.n();
    if expected.dim() != n {
        return Err(Error::parameter("expected adjacency dimension mismatch"));
    }
    if g.min_degree() == 0 {
        return Err(Error::structure("isolated vertex"));
    }
    let inv_sqrt_d = crate::spectral::inv_sqrt_degrees(g);
    let w = expected.expected_degrees();
    let inv_sqrt_w: Vec<f64> = w.iter().map(|&x| 1.0 / x.sqrt()).collect();
    let op = FnOp::new(n, |x: &[f64], y: &mut [f64]| {
        // Q x
        let zd: Vec<f64> = (0..n).map(|i| x[i] * inv_sqrt_d[i]).collect();
        let mut qx = vec![0.0; n];
        neighbor_sums(g, &zd, &mut qx);
        // Qbar x
        let zw: Vec<f64> = (0..n).map(|i| x[i] * inv_sqrt_w[i]).collect();
        expected.matvec(&zw, y);
        for i in 0..n {
            y[i] = qx[i] * inv_sqrt_d[i] - y[i] * inv_sqrt_w[i];
        }
    });
    let est = spectral_norm_sym(&op, tol, max_iter, seed);
    let (w_max, w_min) = (expected.w_max(), expected.w_min());
    let bound = c * ((n as f64).ln() * w_max).sqrt() / w_min;
    let mut check = BoundCheck::new("q-norm", est.value, bound, c, n, seed);
    if !est.converged {
        check = check.with_note("estimate-not-converged");
    }
    Ok(check)
}

/// Dense `Qbar = W^{-1/2} E(A) W^{-1/2}` (oracle path for small n).
pub fn dense_expected_q(expected: &ExpectedAdjacency) -> nalgebra::DMatrix<f64> {
    let n = expected.dim();
    let w = expected.expected_degrees();
    let mut qbar = expected.to_dense();
    for i in 0..n {
        for j in 0..n {
            qbar[(i, j)] /= (w[i] * w[j]).sqrt();
        }
    }
    qbar
}

/// Restart-vector alignment: `||(Q - u1 u1^T) v'||_inf` with
/// `v' = n D^{-1/2} v`, against `ratio_threshold / sqrt(w_min)`. The
/// statistic times `sqrt(w_min)` is the quantity expected to shrink
/// across a size sweep for uniform-like restarts, and to stall for point
/// masses.
pub fn check_qtilde_vprime(
    g: &Graph,
    v: &PreferenceVector,
    w_min: f64,
    ratio_threshold: f64,
    seed: u64,
) -> Result<BoundCheck> {
    if v.len() != g.n() {
        return Err(Error::parameter("preference length mismatch"));
    }
    if !(w_min > 0.0) {
        return Err(Error::parameter("w_min must be positive"));
    }
    let n = g.n();
    let vprime: Vec<f64> = v
        .as_slice()
        .iter()
        .zip(g.degrees())
        .map(|(&vi, &d)| n as f64 * vi / (d as f64).sqrt())
        .collect();
    let qv = matvec_q(g, &vprime)?;
    let u1 = perron_vector(g)?;
    let coef: f64 = u1.iter().zip(&vprime).map(|(a, b)| a * b).sum();
    let measured = qv
        .iter()
        .zip(&u1)
        .map(|(qi, ui)| (qi - coef * ui).abs())
        .fold(0.0, f64::max);
    let bound = ratio_threshold / w_min.sqrt();
    Ok(BoundCheck::new(
        "qtilde-vprime",
        measured,
        bound,
        ratio_threshold,
        n,
        seed,
    ))
}

/// `||S||_inf` for the symmetrized resolvent `S = (I - alpha Q)^{-1}`
/// against the bound `sqrt(d_max / d_min) / (1 - alpha)`.
///
/// `S` is entrywise nonnegative (its Neumann series has nonnegative
/// terms), so the max row L1 norm equals the largest entry of `S 1`; a
/// single matrix-free solve computes it exactly at any size.
pub fn check_s_infty_norm(g: &Graph, alpha: f64, seed: u64) -> Result<BoundCheck> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::parameter(format!("alpha {alpha} outside [0, 1)")));
    }
    if g.min_degree() == 0 {
        return Err(Error::structure("isolated vertex"));
    }
    let (value, converged) = s_one_solve(g, alpha)?;
    let bound = (g.max_degree() as f64 / g.min_degree() as f64).sqrt() / (1.0 - alpha);
    let mut check = BoundCheck::new("s-infty", value, bound, alpha, g.n(), seed);
    if !converged {
        check = check.with_note("estimate-not-converged");
    }
    Ok(check)
}

/// Solve `(I - alpha Q) y = 1` by fixed-point iteration and return
/// `max_i y_i` (exactly `||S||_inf`).
fn s_one_solve(g: &Graph, alpha: f64) -> Result<(f64, bool)> {
    let n = g.n();
    let mut y = vec![1.0; n];
    let target = 1e-10 / (1.0 - alpha);
    let max_iter = 200_000usize;
    for _ in 0..max_iter {
        let qy = matvec_q(g, &y)?;
        let mut residual = 0.0f64;
        for i in 0..n {
            let next = 1.0 + alpha * qy[i];
            residual = residual.max((next - y[i]).abs());
            y[i] = next;
        }
        if residual <= target {
            return Ok((y.iter().cloned().fold(0.0, f64::max), true));
        }
    }
    Ok((y.iter().cloned().fold(0.0, f64::max), false))
}

/// Dense `||S||_inf` via per-row resolvent solves (oracle path,
/// `n <= DENSE_LIMIT`).
pub fn s_infty_dense(g: &Graph, alpha: f64) -> Result<f64> {
    if g.n() > DENSE_LIMIT {
        return Err(Error::Size {
            n: g.n(),
            limit: DENSE_LIMIT,
        });
    }
    let q = dense_q(g)?;
    let n = g.n();
    let m = nalgebra::DMatrix::<f64>::identity(n, n) - alpha * q;
    let inv = m
        .try_inverse()
        .ok_or_else(|| Error::structure("resolvent inversion failed"))?;
    let mut best = 0.0f64;
    for i in 0..n {
        let row_l1: f64 = inv.row(i).iter().map(|x| x.abs()).sum();
        best = best.max(row_l1);
    }
    Ok(best)
}

/// End-to-end error-norm chain on a dense-regime instance: the exact
/// mixture error must satisfy
/// `||eps||_1 / (1-alpha) <= sqrt(d_max/d_min) sqrt(n)
///   max_{i>1} |alpha lambda_i / (1 - alpha lambda_i)| ||v||_2`.
pub fn check_error_norm_chain(
    g: &Graph,
    v: &PreferenceVector,
    alpha: f64,
    seed: u64,
) -> Result<BoundCheck> {
    let n = g.n();
    if n > DENSE_LIMIT {
        return Err(Error::Size {
            n,
            limit: DENSE_LIMIT,
        });
    }
    let pi = pagerank_dense(g, v, alpha)?.pi;
    let pibar = asymptotics::approx_mixture(g, v, alpha)?;
    let eps = asymptotics::error_vector(&pi, &pibar)?;
    let abs_eps: Vec<f64> = eps.iter().map(|x| x.abs()).collect();
    let measured = pairwise_sum(&abs_eps) / (1.0 - alpha);

    let spectrum = crate::spectral::dense_spectrum(g)?;
    let factor = spectrum.eigenvalues[1..]
        .iter()
        .map(|&l| (alpha * l / (1.0 - alpha * l)).abs())
        .fold(0.0, f64::max);
    let v_l2 = {
        let sq: Vec<f64> = v.as_slice().iter().map(|x| x * x).collect();
        pairwise_sum(&sq).sqrt()
    };
    let ratio = (g.max_degree() as f64 / g.min_degree() as f64).sqrt();
    let bound = ratio * (n as f64).sqrt() * factor * v_l2;
    Ok(BoundCheck::new(
        "error-norm-chain",
        measured,
        bound,
        1.0,
        n,
        seed,
    ))
}

/// Scalar concentration tail `2 exp(-eps^2 / (2 (B^2 + b eps / 3)))` for a
/// sum of independent variables with range bound `b` and variance `B^2`.
pub fn bernstein_tail(b2: f64, b: f64, eps: f64) -> f64 {
    2.0 * (-eps * eps / (2.0 * (b2 + b * eps / 3.0))).exp()
}

/// Deviation `eps` at which [`bernstein_tail`] drops to `delta`; used to
/// size statistical tolerances in the generator tests.
pub fn bernstein_deviation(b2: f64, b: f64, delta: f64) -> f64 {
    let l = (2.0 / delta).ln();
    b * l / 3.0 + ((b * l / 3.0).powi(2) + 2.0 * b2 * l).sqrt()
}

/// Matrix concentration tail
/// `(d1 + d2) exp(-(t^2 / 2) / (sigma^2 + R t / 3))`.
pub fn matrix_bernstein_tail(sigma2: f64, r: f64, t: f64, d1: usize, d2: usize) -> f64 {
    (d1 + d2) as f64 * (-(t * t / 2.0) / (sigma2 + r * t / 3.0)).exp()
}
