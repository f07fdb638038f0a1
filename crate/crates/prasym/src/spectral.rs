//! Matrix-free spectral operators and iterative eigenvalue estimates.
//!
//! The operators act on the random-walk matrices of a [`Graph`]:
//! `P = A D^{-1}` (column-stochastic) and `Q = D^{-1/2} A D^{-1/2}`
//! (symmetric, same spectrum as `P`). Iterative estimates use power
//! iteration with explicit deflation of the Perron vector; a dense
//! eigendecomposition is available below [`crate::DENSE_LIMIT`] as the
//! oracle for everything the iterative paths report.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::{self, Stream};

/// Result of an iterative eigenvalue estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralEstimate {
    /// Estimated eigenvalue magnitude (Rayleigh quotient of the final
    /// iterate; a lower-bound-style estimate).
    pub value: f64,
    /// Achieved residual `||op x - theta x||_2` at exit.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// A symmetric linear operator given by its action.
pub trait SymOp: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

/// Wrap a closure as a [`SymOp`].
pub struct FnOp<F> {
    n: usize,
    f: F,
}

impl<F: Fn(&[f64], &mut [f64]) + Sync> FnOp<F> {
    pub fn new(n: usize, f: F) -> Self {
        FnOp { n, f }
    }
}

impl<F: Fn(&[f64], &mut [f64]) + Sync> SymOp for FnOp<F> {
    fn dim(&self) -> usize {
        self.n
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (self.f)(x, y)
    }
}

const PAR_VOLUME_THRESHOLD: u64 = 1 << 21;

/// `y[i] = sum of z[j] over neighbors j of i`. Rows are independent, so the
/// parallel path is bit-deterministic at any thread count.
pub(crate) fn neighbor_sums(g: &Graph, z: &[f64], y: &mut [f64]) {
    let serial_row = |i: usize, out: &mut f64| {
        let mut acc = 0.0;
        for &j in g.neighbors(i) {
            acc += z[j as usize];
        }
        *out = acc;
    };
    if g.volume() >= PAR_VOLUME_THRESHOLD {
        y.par_iter_mut()
            .enumerate()
            .for_each(|(i, out)| serial_row(i, out));
    } else {
        for (i, out) in y.iter_mut().enumerate() {
            serial_row(i, out);
        }
    }
}

fn require_positive_degrees(g: &Graph) -> Result<()> {
    if g.n() == 0 {
        return Err(Error::structure("empty graph"));
    }
    if g.min_degree() == 0 {
        let v = g.degrees().iter().position(|&d| d == 0).unwrap();
        return Err(Error::structure(format!("isolated vertex {v}")));
    }
    Ok(())
}

/// `y = P x = A D^{-1} x`. Preserves `1^T x` up to floating-point
/// summation.
pub fn matvec_p(g: &Graph, x: &[f64]) -> Result<Vec<f64>> {
    require_positive_degrees(g)?;
    assert_eq!(x.len(), g.n());
    let z: Vec<f64> = x
        .iter()
        .zip(g.degrees())
        .map(|(xi, &d)| xi / d as f64)
        .collect();
    let mut y = vec![0.0; g.n()];
    neighbor_sums(g, &z, &mut y);
    Ok(y)
}

/// `y = Q x = D^{-1/2} A D^{-1/2} x`.
pub fn matvec_q(g: &Graph, x: &[f64]) -> Result<Vec<f64>> {
    require_positive_degrees(g)?;
    assert_eq!(x.len(), g.n());
    let s = inv_sqrt_degrees(g);
    let z: Vec<f64> = x.iter().zip(&s).map(|(xi, si)| xi * si).collect();
    let mut y = vec![0.0; g.n()];
    neighbor_sums(g, &z, &mut y);
    for (yi, si) in y.iter_mut().zip(&s) {
        *yi *= si;
    }
    Ok(y)
}

pub(crate) fn inv_sqrt_degrees(g: &Graph) -> Vec<f64> {
    g.degrees().iter().map(|&d| 1.0 / (d as f64).sqrt()).collect()
}

/// Perron eigenvector `u_1 = D^{1/2} 1 / sqrt(vol)`, unit 2-norm.
pub fn perron_vector(g: &Graph) -> Result<Vec<f64>> {
    if g.n() == 0 || g.volume() == 0 {
        return Err(Error::structure("graph has no edges"));
    }
    let inv_sqrt_vol = 1.0 / (g.volume() as f64).sqrt();
    Ok(g.degrees()
        .iter()
        .map(|&d| (d as f64).sqrt() * inv_sqrt_vol)
        .collect())
}

/// The symmetric walk operator `Q` as a [`SymOp`]. Holds precomputed
/// `1/sqrt(d)` so repeated applications avoid per-call setup.
pub struct QOperator<'a> {
    g: &'a Graph,
    inv_sqrt_d: Vec<f64>,
    /// Optional deflation vector; when set, applies `Q - u u^T`.
    deflate: Option<Vec<f64>>,
}

impl<'a> QOperator<'a> {
    pub fn new(g: &'a Graph) -> Result<Self> {
        require_positive_degrees(g)?;
        Ok(QOperator {
            g,
            inv_sqrt_d: inv_sqrt_degrees(g),
            deflate: None,
        })
    }

    /// `Q - u1 u1^T`: the walk operator restricted to the orthogonal
    /// complement of the Perron vector.
    pub fn deflated(g: &'a Graph) -> Result<Self> {
        let mut op = QOperator::new(g)?;
        op.deflate = Some(perron_vector(g)?);
        Ok(op)
    }
}

impl SymOp for QOperator<'_> {
    fn dim(&self) -> usize {
        self.g.n()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.g.n();
        debug_assert_eq!(x.len(), n);
        let mut z = vec![0.0; n];
        for i in 0..n {
            z[i] = x[i] * self.inv_sqrt_d[i];
        }
        neighbor_sums(self.g, &z, y);
        for i in 0..n {
            y[i] *= self.inv_sqrt_d[i];
        }
        if let Some(u) = &self.deflate {
            let c = dot(u, x);
            for i in 0..n {
                y[i] -= c * u[i];
            }
        }
    }
}

/// Serial dot product (deterministic accumulation order).
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// Estimate `max(|lambda_2|, |lambda_n|)` of `Q` by power iteration on the
/// deflated operator `Q - u1 u1^T`, re-orthogonalizing against `u1` every
/// step. The value is clamped into `[0, 1]`.
pub fn second_eigenvalue_magnitude(
    g: &Graph,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<SpectralEstimate> {
    let op = QOperator::deflated(g)?;
    let u1 = perron_vector(g)?;
    let mut est = power_iteration(&op, Some(&u1), tol, max_iter, seed);
    est.value = est.value.clamp(0.0, 1.0);
    Ok(est)
}

/// Estimate the largest eigenvalue magnitude of a symmetric operator.
pub fn spectral_norm_sym(op: &dyn SymOp, tol: f64, max_iter: usize, seed: u64) -> SpectralEstimate {
    power_iteration(op, None, tol, max_iter, seed)
}

/// Power iteration with a stalling-aware convergence test: the Rayleigh
/// quotient must move by at most `tol` (relatively) for 5 consecutive
/// iterations while the residual is below `10 tol` (scaled by the value
/// for operators with norms above 1). When the residual plateaus — the
/// signature of a `+a / -a` eigenvalue tie — the estimate restarts on the
/// squared operator and reports the square root.
fn power_iteration(
    op: &dyn SymOp,
    orth: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> SpectralEstimate {
    let n = op.dim();
    if n == 0 {
        return SpectralEstimate {
            value: 0.0,
            residual: 0.0,
            iterations: 0,
            converged: true,
        };
    }
    let mut x = start_vector(n, seed, orth);
    let mut y = vec![0.0; n];
    let mut theta_prev = f64::NAN;
    let mut stable = 0usize;
    let mut residual = f64::INFINITY;
    let mut theta = 0.0;
    let mut window_residual = f64::INFINITY;

    for k in 1..=max_iter {
        op.apply(&x, &mut y);
        theta = dot(&x, &y);
        let mut r2 = 0.0;
        for i in 0..n {
            let r = y[i] - theta * x[i];
            r2 += r * r;
        }
        residual = r2.sqrt();
        let scale = theta.abs().max(1.0);
        let rel = if theta_prev.is_finite() {
            (theta - theta_prev).abs() / theta.abs().max(f64::MIN_POSITIVE)
        } else {
            f64::INFINITY
        };
        theta_prev = theta;
        if rel <= tol {
            stable += 1;
        } else {
            stable = 0;
        }
        if stable >= 5 && residual <= 10.0 * tol * scale {
            return SpectralEstimate {
                value: theta.abs(),
                residual,
                iterations: k,
                converged: true,
            };
        }
        // Plateau detection: residual refusing to shrink while far from
        // the convergence target means two extreme eigenvalues of equal
        // magnitude and opposite sign are fighting.
        if k % 50 == 0 {
            if residual > 0.9 * window_residual && residual > 100.0 * tol * scale {
                return squared_fallback(op, orth, tol, max_iter, seed, k);
            }
            window_residual = residual;
        }
        let norm = norm2(&y);
        if norm == 0.0 {
            // x is (numerically) in the kernel; the dominant eigenvalue
            // reachable from this start vector is 0.
            return SpectralEstimate {
                value: 0.0,
                residual: 0.0,
                iterations: k,
                converged: true,
            };
        }
        let inv = 1.0 / norm;
        for i in 0..n {
            x[i] = y[i] * inv;
        }
        if let Some(u) = orth {
            let c = dot(u, &x);
            for i in 0..n {
                x[i] -= c * u[i];
            }
            let nn = norm2(&x);
            if nn > 0.0 {
                let inv = 1.0 / nn;
                x.iter_mut().for_each(|v| *v *= inv);
            }
        }
    }
    SpectralEstimate {
        value: theta.abs(),
        residual,
        iterations: max_iter,
        converged: false,
    }
}

fn squared_fallback(
    op: &dyn SymOp,
    orth: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
    seed: u64,
    spent: usize,
) -> SpectralEstimate {
    let n = op.dim();
    let squared = FnOp::new(n, |x: &[f64], y: &mut [f64]| {
        let mut mid = vec![0.0; n];
        op.apply(x, &mut mid);
        op.apply(&mid, y);
    });
    let budget = max_iter.saturating_sub(spent).max(50);
    let inner = power_iteration(&squared, orth, tol, budget, seed ^ 0xabcd_ef01);
    SpectralEstimate {
        value: inner.value.max(0.0).sqrt(),
        residual: inner.residual,
        iterations: spent + inner.iterations,
        converged: inner.converged,
    }
}

fn start_vector(n: usize, seed: u64, orth: Option<&[f64]>) -> Vec<f64> {
    let mut stream = Stream::new(seed, rng::tag::POWER_START);
    let mut x: Vec<f64> = (0..n).map(|_| stream.next_symmetric()).collect();
    if let Some(u) = orth {
        let c = dot(u, &x);
        for i in 0..n {
            x[i] -= c * u[i];
        }
    }
    let norm = norm2(&x);
    if norm > 0.0 {
        let inv = 1.0 / norm;
        x.iter_mut().for_each(|v| *v *= inv);
    } else {
        x[0] = 1.0;
    }
    x
}

/// Dense symmetric eigendecomposition of `Q`, eigenvalues descending.
pub struct DenseSpectrum {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors; column `k` pairs with `eigenvalues[k]`.
    pub eigenvectors: DMatrix<f64>,
}

/// Dense `Q` matrix (oracle path, `n <= DENSE_LIMIT`).
pub fn dense_q(g: &Graph) -> Result<DMatrix<f64>> {
    require_positive_degrees(g)?;
    if g.n() > crate::DENSE_LIMIT {
        return Err(Error::Size {
            n: g.n(),
            limit: crate::DENSE_LIMIT,
        });
    }
    let n = g.n();
    let s = inv_sqrt_degrees(g);
    let mut q = DMatrix::zeros(n, n);
    for i in 0..n {
        for &j in g.neighbors(i) {
            q[(i, j as usize)] = s[i] * s[j as usize];
        }
    }
    Ok(q)
}

/// Full eigendecomposition of `Q` — the oracle for all iterative
/// estimates. Errors above [`crate::DENSE_LIMIT`].
pub fn dense_spectrum(g: &Graph) -> Result<DenseSpectrum> {
    let q = dense_q(g)?;
    Ok(sorted_symmetric_eigen(q))
}

/// Eigendecomposition of an arbitrary symmetric matrix, descending.
pub fn sorted_symmetric_eigen(mat: DMatrix<f64>) -> DenseSpectrum {
    let n = mat.nrows();
    let eig = SymmetricEigen::new(mat);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    DenseSpectrum {
        eigenvalues,
        eigenvectors,
    }
}

/// Dense spectral norm `||M||_2` of a symmetric matrix (oracle path).
pub fn dense_spectral_norm(mat: DMatrix<f64>) -> f64 {
    let eig = SymmetricEigen::new(mat);
    eig.eigenvalues.iter().fold(0.0f64, |a, &l| a.max(l.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn matvec_p_stationary_and_splits() {
        let g = Graph::path(3);
        // Stationary vector d / vol is a fixed point.
        let pi: Vec<f64> = g.degrees().iter().map(|&d| d as f64 / 4.0).collect();
        let y = matvec_p(&g, &pi).unwrap();
        for (a, b) in y.iter().zip(&pi) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
        // Center mass splits to the endpoints.
        let y = matvec_p(&g, &[0.0, 1.0, 0.0]).unwrap();
        assert_eq!(y, vec![0.5, 0.0, 0.5]);
        // K3: point mass splits over the two neighbors.
        let k3 = Graph::complete(3);
        let y = matvec_p(&k3, &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(y, vec![0.0, 0.5, 0.5]);
    }

    #[test]
    fn matvec_p_conserves_mass() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (1, 3)]).unwrap();
        let x = [0.1, 0.3, 0.2, 0.25, 0.15];
        let y = matvec_p(&g, &x).unwrap();
        let sx: f64 = x.iter().sum();
        let sy: f64 = y.iter().sum();
        assert_abs_diff_eq!(sx, sy, epsilon = 1e-12);
    }

    #[test]
    fn matvec_q_fixture_and_symmetry() {
        let g = Graph::path(3);
        let x = [1.0, 1.0 / 2.0_f64.sqrt(), 1.0];
        let y = matvec_q(&g, &x).unwrap();
        assert_abs_diff_eq!(y[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(y[1], 2.0_f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(y[2], 0.5, epsilon = 1e-15);
        // Perron vector is fixed.
        let u1 = perron_vector(&g).unwrap();
        let qu = matvec_q(&g, &u1).unwrap();
        for (a, b) in qu.iter().zip(&u1) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn matvec_rejects_isolated_vertex() {
        let g = Graph::from_edges(3, &[(0, 1)]).unwrap();
        assert!(matvec_p(&g, &[1.0, 0.0, 0.0]).is_err());
        assert!(matvec_q(&g, &[1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn perron_fixtures() {
        let g = Graph::path(3);
        let u = perron_vector(&g).unwrap();
        assert_abs_diff_eq!(u[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(u[1], 2.0_f64.sqrt() / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(u[2], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(norm2(&u), 1.0, epsilon = 1e-14);

        let k3 = Graph::complete(3);
        let u = perron_vector(&k3).unwrap();
        for &v in &u {
            assert_abs_diff_eq!(v, 1.0 / 3.0_f64.sqrt(), epsilon = 1e-15);
        }
    }

    #[test]
    fn second_eigenvalue_small_fixtures() {
        // 3-path is bipartite: lambda_n = -1.
        let est = second_eigenvalue_magnitude(&Graph::path(3), 1e-10, 5000, 1).unwrap();
        assert!(est.converged);
        assert_abs_diff_eq!(est.value, 1.0, epsilon = 1e-8);

        // K3: eigenvalues 1, -1/2, -1/2.
        let est = second_eigenvalue_magnitude(&Graph::complete(3), 1e-10, 5000, 1).unwrap();
        assert!(est.converged);
        assert_abs_diff_eq!(est.value, 0.5, epsilon = 1e-8);
    }

    #[test]
    fn spectral_norm_trivial_operators() {
        let identity = FnOp::new(5, |x: &[f64], y: &mut [f64]| y.copy_from_slice(x));
        let est = spectral_norm_sym(&identity, 1e-10, 1000, 3);
        assert!(est.converged);
        assert_abs_diff_eq!(est.value, 1.0, epsilon = 1e-9);

        let zero = FnOp::new(5, |_: &[f64], y: &mut [f64]| y.fill(0.0));
        let est = spectral_norm_sym(&zero, 1e-10, 1000, 3);
        assert_abs_diff_eq!(est.value, 0.0, epsilon = 1e-12);

        // Rank one c u u^T has |c| as its only nonzero eigenvalue.
        let u: Vec<f64> = {
            let raw = [1.0, 2.0, -1.5, 0.3];
            let nrm = norm2(&raw);
            raw.iter().map(|v| v / nrm).collect()
        };
        let c = -3.25;
        let u2 = u.clone();
        let rank1 = FnOp::new(4, move |x: &[f64], y: &mut [f64]| {
            let s = dot(&u2, x) * c;
            for (yi, ui) in y.iter_mut().zip(&u2) {
                *yi = s * ui;
            }
        });
        let est = spectral_norm_sym(&rank1, 1e-10, 2000, 5);
        assert!(est.converged);
        assert_abs_diff_eq!(est.value, 3.25, epsilon = 1e-8);
    }

    #[test]
    fn squared_fallback_resolves_sign_tie() {
        // diag(0.5, -0.5, 0.1): plain power iteration cannot converge, the
        // squared restart reports 0.5.
        let d = [0.5, -0.5, 0.1];
        let op = FnOp::new(3, move |x: &[f64], y: &mut [f64]| {
            for i in 0..3 {
                y[i] = d[i] * x[i];
            }
        });
        let est = spectral_norm_sym(&op, 1e-10, 20_000, 11);
        assert!(est.converged, "estimate = {est:?}");
        assert_abs_diff_eq!(est.value, 0.5, epsilon = 1e-7);
    }

    #[test]
    fn dense_spectrum_fixtures() {
        let spec = dense_spectrum(&Graph::complete(3)).unwrap();
        assert_abs_diff_eq!(spec.eigenvalues[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(spec.eigenvalues[1], -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(spec.eigenvalues[2], -0.5, epsilon = 1e-12);

        let spec = dense_spectrum(&Graph::path(3)).unwrap();
        assert_abs_diff_eq!(spec.eigenvalues[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(spec.eigenvalues[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(spec.eigenvalues[2], -1.0, epsilon = 1e-12);

        let spec = dense_spectrum(&Graph::path(2)).unwrap();
        assert_abs_diff_eq!(spec.eigenvalues[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(spec.eigenvalues[1], -1.0, epsilon = 1e-12);
    }

    #[test]
    fn dense_spectrum_reconstructs_q() {
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5), (1, 4)])
            .unwrap();
        let spec = dense_spectrum(&g).unwrap();
        let q = dense_q(&g).unwrap();
        let mut rec = DMatrix::zeros(6, 6);
        for k in 0..6 {
            let u = spec.eigenvectors.column(k);
            rec += spec.eigenvalues[k] * &u * u.transpose();
        }
        assert!(dense_spectral_norm(q - rec) <= 1e-8);
    }

    #[test]
    fn dense_spectrum_respects_size_limit() {
        // Can't build a huge graph cheaply here; check the guard directly.
        let g = Graph::path(3);
        assert!(dense_spectrum(&g).is_ok());
        assert!(matches!(
            dense_q(&Graph::path(crate::DENSE_LIMIT + 1)),
            Err(Error::Size { .. })
        ));
    }

    #[test]
    fn iterative_matches_dense_on_random_graphs() {
        for seed in [2u64, 5, 9] {
            let g = crate::models::gen_er(60, 0.2, seed).unwrap();
            if !g.is_connected() {
                continue;
            }
            let spec = dense_spectrum(&g).unwrap();
            let dense_second = spec.eigenvalues[1]
                .abs()
                .max(spec.eigenvalues[g.n() - 1].abs());
            let est = second_eigenvalue_magnitude(&g, 1e-9, 50_000, seed).unwrap();
            assert!(
                (est.value - dense_second).abs() <= 1e-6,
                "seed {seed}: est {} vs dense {dense_second}",
                est.value
            );
        }
    }
}
