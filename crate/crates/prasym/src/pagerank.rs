//! Exact personalized PageRank by three mutually checking routes.
//!
//! The solved equation is `pi = alpha P pi + (1 - alpha) v` with
//! `P = A D^{-1}`. Power iteration is the production path; the dense
//! resolvent solve `(I - alpha P) pi = (1 - alpha) v` is the ground-truth
//! oracle below [`crate::DENSE_LIMIT`]; the truncated series provides an
//! analytic truncation bound.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::metrics::pairwise_sum;
use crate::spectral::matvec_p;

/// A restart distribution: nonnegative entries summing to 1 within 1e-12.
#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceVector {
    entries: Vec<f64>,
}

impl PreferenceVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::parameter("preference vector must be nonempty"));
        }
        if let Some(i) = entries.iter().position(|&v| v < 0.0 || !v.is_finite()) {
            return Err(Error::parameter(format!(
                "preference entry {i} = {} is negative or non-finite",
                entries[i]
            )));
        }
        let sum = pairwise_sum(&entries);
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::parameter(format!(
                "preference vector sums to {sum}, expected 1"
            )));
        }
        Ok(PreferenceVector { entries })
    }

    /// Uniform restart 1/n.
    pub fn uniform(n: usize) -> Self {
        PreferenceVector {
            entries: vec![1.0 / n as f64; n],
        }
    }

    /// Point mass at `vertex`.
    pub fn point_mass(n: usize, vertex: usize) -> Result<Self> {
        if vertex >= n {
            return Err(Error::parameter(format!(
                "point mass vertex {vertex} out of range for n = {n}"
            )));
        }
        let mut entries = vec![0.0; n];
        entries[vertex] = 1.0;
        Ok(PreferenceVector { entries })
    }

    /// Uniform over `support`, zero elsewhere.
    pub fn indicator(n: usize, support: std::ops::Range<usize>) -> Result<Self> {
        if support.is_empty() || support.end > n {
            return Err(Error::parameter(format!(
                "indicator support {support:?} invalid for n = {n}"
            )));
        }
        let mass = 1.0 / support.len() as f64;
        let mut entries = vec![0.0; n];
        for e in &mut entries[support] {
            *e = mass;
        }
        Ok(PreferenceVector { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }
}

/// Solver settings. `alpha` is the damping factor: with probability
/// `1 - alpha` the walk restarts into the preference vector.
#[derive(Debug, Clone, Copy)]
pub struct PageRankConfig {
    pub alpha: f64,
    /// L1 residual target for `||pi - (alpha P pi + (1-alpha) v)||_1`.
    pub tol: f64,
    pub max_iter: usize,
}

impl PageRankConfig {
    pub fn new(alpha: f64, tol: f64, max_iter: usize) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::parameter(format!(
                "damping factor {alpha} outside [0, 1); the alpha = 1 limit is served by stationary()"
            )));
        }
        if !(tol > 0.0) {
            return Err(Error::parameter(format!("tolerance {tol} must be positive")));
        }
        Ok(PageRankConfig {
            alpha,
            tol,
            max_iter,
        })
    }
}

impl Default for PageRankConfig {
    fn default() -> Self {
        PageRankConfig {
            alpha: 0.85,
            tol: 1e-12,
            max_iter: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Power,
    Dense,
    Series,
}

/// A solved PageRank vector with its exit diagnostics.
#[derive(Debug, Clone)]
pub struct PageRankResult {
    pub pi: Vec<f64>,
    /// L1 fixed-point residual at exit.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub method: SolveMethod,
}

/// Power iteration `x <- alpha P x + (1 - alpha) v`, renormalized each
/// step, stopping on the L1 residual of the fixed-point equation (not on
/// the successive-iterate distance).
pub fn pagerank_power(g: &Graph, v: &PreferenceVector, cfg: &PageRankConfig) -> Result<PageRankResult> {
    check_lengths(g, v)?;
    if cfg.alpha == 0.0 {
        return Ok(PageRankResult {
            pi: v.as_slice().to_vec(),
            residual: 0.0,
            iterations: 0,
            converged: true,
            method: SolveMethod::Power,
        });
    }
    let mut x = v.as_slice().to_vec();
    let mut iterations = 0usize;
    let mut residual = f64::INFINITY;
    while iterations < cfg.max_iter {
        let px = matvec_p(g, &x)?;
        let mut y: Vec<f64> = px
            .iter()
            .zip(v.as_slice())
            .map(|(pxi, vi)| cfg.alpha * pxi + (1.0 - cfg.alpha) * vi)
            .collect();
        let diffs: Vec<f64> = y.iter().zip(&x).map(|(a, b)| (a - b).abs()).collect();
        residual = pairwise_sum(&diffs);
        iterations += 1;
        if residual <= cfg.tol {
            // x itself satisfies the residual bound; keep it so the
            // reported residual is exactly what was measured.
            return Ok(PageRankResult {
                pi: x,
                residual,
                iterations,
                converged: true,
                method: SolveMethod::Power,
            });
        }
        // Renormalize to guard against drift; the iteration preserves
        // total mass exactly in real arithmetic.
        let mass = pairwise_sum(&y);
        let inv = 1.0 / mass;
        y.iter_mut().for_each(|e| *e *= inv);
        x = y;
    }
    Ok(PageRankResult {
        pi: x,
        residual,
        iterations,
        converged: false,
        method: SolveMethod::Power,
    })
}

/// Direct solve of `(I - alpha P) pi = (1 - alpha) v`. Oracle path,
/// `n <= DENSE_LIMIT`.
pub fn pagerank_dense(g: &Graph, v: &PreferenceVector, alpha: f64) -> Result<PageRankResult> {
    check_lengths(g, v)?;
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::parameter(format!("alpha {alpha} outside [0, 1)")));
    }
    let n = g.n();
    if n > crate::DENSE_LIMIT {
        return Err(Error::Size {
            n,
            limit: crate::DENSE_LIMIT,
        });
    }
    if g.min_degree() == 0 {
        return Err(Error::structure("isolated vertex"));
    }
    let mut m = DMatrix::<f64>::identity(n, n);
    for j in 0..n {
        let inv_d = 1.0 / g.degree(j) as f64;
        for &i in g.neighbors(j) {
            m[(i as usize, j)] -= alpha * inv_d;
        }
    }
    let b = DVector::from_iterator(n, v.as_slice().iter().map(|&vi| (1.0 - alpha) * vi));
    let lu = m.lu();
    let sol = lu
        .solve(&b)
        .ok_or_else(|| Error::structure("resolvent solve failed"))?;
    let mut pi: Vec<f64> = sol.iter().copied().collect();
    // The solution is a probability vector in exact arithmetic; clean up
    // rounding so downstream probability checks hold.
    let mass = pairwise_sum(&pi);
    let inv = 1.0 / mass;
    pi.iter_mut().for_each(|e| *e *= inv);
    let residual = fixed_point_residual(g, v, alpha, &pi)?;
    Ok(PageRankResult {
        pi,
        residual,
        iterations: 1,
        converged: true,
        method: SolveMethod::Dense,
    })
}

/// Truncated series `(1 - alpha) sum_{t=0..=k} alpha^t P^t v` together
/// with the analytic L1 tail bound `alpha^{k+1}`.
pub fn pagerank_series(
    g: &Graph,
    v: &PreferenceVector,
    alpha: f64,
    k: usize,
) -> Result<(Vec<f64>, f64)> {
    check_lengths(g, v)?;
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::parameter(format!("alpha {alpha} outside [0, 1)")));
    }
    let n = g.n();
    let mut term: Vec<f64> = v.as_slice().to_vec(); // P^t v
    let mut coeff = 1.0 - alpha; // (1 - alpha) alpha^t
    let mut sum = vec![0.0; n];
    for t in 0..=k {
        for i in 0..n {
            sum[i] += coeff * term[i];
        }
        if t < k {
            term = matvec_p(g, &term)?;
            coeff *= alpha;
        }
    }
    let tail = alpha.powi(k as i32 + 1);
    Ok((sum, tail))
}

/// Stationary distribution `d / vol` of the simple random walk, with a
/// connectivity flag (for a disconnected graph the alpha = 1 limit is not
/// unique, so the caller should treat the vector as one of many).
pub fn stationary(g: &Graph) -> Result<(Vec<f64>, bool)> {
    if g.volume() == 0 {
        return Err(Error::structure("graph has no edges"));
    }
    let vol = g.volume() as f64;
    Ok((
        g.degrees().iter().map(|&d| d as f64 / vol).collect(),
        g.is_connected(),
    ))
}

/// `||pi - (alpha P pi + (1 - alpha) v)||_1`.
pub fn fixed_point_residual(
    g: &Graph,
    v: &PreferenceVector,
    alpha: f64,
    pi: &[f64],
) -> Result<f64> {
    let ppi = matvec_p(g, pi)?;
    let diffs: Vec<f64> = (0..pi.len())
        .map(|i| (pi[i] - (alpha * ppi[i] + (1.0 - alpha) * v.as_slice()[i])).abs())
        .collect();
    Ok(pairwise_sum(&diffs))
}

fn check_lengths(g: &Graph, v: &PreferenceVector) -> Result<()> {
    if v.len() != g.n() {
        return Err(Error::parameter(format!(
            "preference vector length {} does not match n = {}",
            v.len(),
            g.n()
        )));
    }
    Ok(())
}

/// Serialize a vector as one decimal per line, 17 significant digits.
pub fn vector_to_text(x: &[f64]) -> String {
    let mut s = String::with_capacity(x.len() * 24);
    for v in x {
        s.push_str(&format!("{v:.16e}\n"));
    }
    s
}

/// Parse the one-decimal-per-line format.
pub fn vector_from_text(text: &str) -> Result<Vec<f64>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad decimal '{l}'")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn uniform3() -> PreferenceVector {
        PreferenceVector::uniform(3)
    }

    #[test]
    fn alpha_zero_returns_preference() {
        let g = Graph::path(3);
        let cfg = PageRankConfig::new(0.0, 1e-12, 100).unwrap();
        let r = pagerank_power(&g, &uniform3(), &cfg).unwrap();
        assert_eq!(r.pi, uniform3().as_slice());
        let d = pagerank_dense(&g, &uniform3(), 0.0).unwrap();
        for (a, b) in d.pi.iter().zip(uniform3().as_slice()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
        let (s, tail) = pagerank_series(&g, &uniform3(), 0.0, 7).unwrap();
        assert_eq!(s, uniform3().as_slice());
        assert_eq!(tail, 0.0);
    }

    #[test]
    fn three_path_half_alpha_fixture() {
        // Exact solution [5/18, 4/9, 5/18].
        let g = Graph::path(3);
        let expect = [5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0];

        let cfg = PageRankConfig::new(0.5, 1e-14, 10_000).unwrap();
        let r = pagerank_power(&g, &uniform3(), &cfg).unwrap();
        assert!(r.converged);
        for (a, b) in r.pi.iter().zip(&expect) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }

        let d = pagerank_dense(&g, &uniform3(), 0.5).unwrap();
        for (a, b) in d.pi.iter().zip(&expect) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn uniform_is_fixed_point_on_regular_graphs() {
        let g = Graph::complete(3);
        for alpha in [0.15, 0.5, 0.85] {
            let r = pagerank_dense(&g, &uniform3(), alpha).unwrap();
            for &p in &r.pi {
                assert_abs_diff_eq!(p, 1.0 / 3.0, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn stationary_vector_is_fixed_for_every_alpha() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (1, 3)]).unwrap();
        let (pi_s, connected) = stationary(&g).unwrap();
        assert!(connected);
        let v = PreferenceVector::new(pi_s.clone()).unwrap();
        for alpha in [0.15, 0.85] {
            let r = pagerank_dense(&g, &v, alpha).unwrap();
            for (a, b) in r.pi.iter().zip(&pi_s) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn stationary_fixtures() {
        let (pi, _) = stationary(&Graph::path(3)).unwrap();
        assert_eq!(pi, vec![0.25, 0.5, 0.25]);
        let (pi, _) = stationary(&Graph::complete(3)).unwrap();
        for &p in &pi {
            assert_abs_diff_eq!(p, 1.0 / 3.0, epsilon = 1e-16);
        }
        let g = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        let (_, connected) = stationary(&g).unwrap();
        assert!(!connected);
    }

    #[test]
    fn series_matches_dense_within_tail_bound() {
        let g = Graph::path(3);
        let alpha = 0.5;
        let dense = pagerank_dense(&g, &uniform3(), alpha).unwrap();
        let (s, tail) = pagerank_series(&g, &uniform3(), alpha, 40).unwrap();
        assert_abs_diff_eq!(tail, alpha.powi(41), epsilon = 1e-30);
        let l1: f64 = s.iter().zip(&dense.pi).map(|(a, b)| (a - b).abs()).sum();
        assert!(l1 <= tail + 1e-12, "l1 = {l1}, tail = {tail}");

        // k = 0 is (1 - alpha) v with tail alpha.
        let (s0, tail0) = pagerank_series(&g, &uniform3(), alpha, 0).unwrap();
        assert_eq!(tail0, alpha);
        for (a, b) in s0.iter().zip(uniform3().as_slice()) {
            assert_abs_diff_eq!(*a, (1.0 - alpha) * b, epsilon = 1e-16);
        }
    }

    #[test]
    fn power_flags_non_convergence() {
        let g = Graph::path(50);
        let cfg = PageRankConfig::new(0.99, 1e-15, 3).unwrap();
        let r = pagerank_power(&g, &PreferenceVector::uniform(50), &cfg).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 3);
    }

    #[test]
    fn result_is_probability_vector() {
        let g = Graph::from_edges(6, &[(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (4, 5), (3, 5)])
            .unwrap();
        let v = PreferenceVector::point_mass(6, 2).unwrap();
        let cfg = PageRankConfig::new(0.85, 1e-13, 10_000).unwrap();
        let r = pagerank_power(&g, &v, &cfg).unwrap();
        assert!(r.converged);
        let mass: f64 = r.pi.iter().sum();
        assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-12);
        assert!(r.pi.iter().all(|&p| p >= 0.0));
        assert!(r.residual <= 1e-13);
    }

    #[test]
    fn preference_vector_validation() {
        assert!(PreferenceVector::new(vec![0.5, 0.6]).is_err());
        assert!(PreferenceVector::new(vec![-0.1, 1.1]).is_err());
        assert!(PreferenceVector::new(vec![0.25; 4]).is_ok());
        assert!(PreferenceVector::point_mass(3, 5).is_err());
        let ind = PreferenceVector::indicator(4, 0..2).unwrap();
        assert_eq!(ind.as_slice(), &[0.5, 0.5, 0.0, 0.0]);
    }

    #[test]
    fn alpha_one_rejected_by_solvers() {
        let g = Graph::path(3);
        assert!(PageRankConfig::new(1.0, 1e-10, 10).is_err());
        assert!(pagerank_dense(&g, &uniform3(), 1.0).is_err());
    }

    #[test]
    fn vector_text_round_trip() {
        let x = vec![0.123456789012345678, -1.5e-17, 3.0];
        let parsed = vector_from_text(&vector_to_text(&x)).unwrap();
        assert_eq!(x, parsed);
    }
}
