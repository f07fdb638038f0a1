//! Distances and error functionals on probability vectors.
//!
//! All summations use pairwise (tree) accumulation so the identities
//! asserted by the tests hold at vector lengths up to 10^6.

use crate::error::{Error, Result};

/// Pairwise (tree) summation.
pub fn pairwise_sum(x: &[f64]) -> f64 {
    const BASE: usize = 32;
    if x.len() <= BASE {
        return x.iter().sum();
    }
    let mid = x.len() / 2;
    pairwise_sum(&x[..mid]) + pairwise_sum(&x[mid..])
}

fn check_same_length(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::parameter(format!(
            "length mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

fn check_probability(name: &str, x: &[f64]) -> Result<()> {
    if let Some(i) = x.iter().position(|&v| v < 0.0 || !v.is_finite()) {
        return Err(Error::parameter(format!(
            "{name}[{i}] = {} is negative or non-finite",
            x[i]
        )));
    }
    let sum = pairwise_sum(x);
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::parameter(format!(
            "{name} sums to {sum}, expected 1 within 1e-9"
        )));
    }
    Ok(())
}

/// Total variation distance `1/2 sum_i |a_i - b_i|` between probability
/// vectors. Rejects non-probability inputs; use [`half_l1_distance`] when
/// the inputs are deliberately unnormalized.
pub fn tv_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    check_same_length(a, b)?;
    check_probability("first argument", a)?;
    check_probability("second argument", b)?;
    Ok(half_l1_distance(a, b))
}

/// `1/2 ||a - b||_1` without probability validation (relaxed mode for
/// property tests).
pub fn half_l1_distance(a: &[f64], b: &[f64]) -> f64 {
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - y).abs()).collect();
    0.5 * pairwise_sum(&diffs)
}

/// `max_i |pi_i - pibar_i| / pibar_i`; every reference entry must be
/// strictly positive.
pub fn max_relative_error(pi: &[f64], pibar: &[f64]) -> Result<f64> {
    check_same_length(pi, pibar)?;
    if let Some(i) = pibar.iter().position(|&v| v <= 0.0 || !v.is_finite()) {
        return Err(Error::parameter(format!(
            "reference entry {i} = {} is not strictly positive",
            pibar[i]
        )));
    }
    Ok(pi
        .iter()
        .zip(pibar)
        .map(|(p, q)| (p - q).abs() / q)
        .fold(0.0, f64::max))
}

/// `|sum_i f_i (pi_i - pibar_i)|` for a test function bounded by 1 in
/// absolute value. Always at most `2 tv_distance(pi, pibar)`.
pub fn weak_convergence_gap(pi: &[f64], pibar: &[f64], f: &[f64]) -> Result<f64> {
    check_same_length(pi, pibar)?;
    check_same_length(pi, f)?;
    if let Some(i) = f.iter().position(|&v| v.abs() > 1.0 || !v.is_finite()) {
        return Err(Error::parameter(format!(
            "test function entry {i} = {} exceeds 1 in absolute value",
            f[i]
        )));
    }
    let terms: Vec<f64> = (0..pi.len()).map(|i| f[i] * (pi[i] - pibar[i])).collect();
    Ok(pairwise_sum(&terms).abs())
}

/// Norms of a vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

/// L1, L2 and max norms in one pass (pairwise accumulation).
pub fn norms(x: &[f64]) -> Norms {
    let abs: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    let sq: Vec<f64> = x.iter().map(|v| v * v).collect();
    Norms {
        l1: pairwise_sum(&abs),
        l2: pairwise_sum(&sq).sqrt(),
        linf: abs.iter().fold(0.0, |a, &b| a.max(b)),
    }
}

/// All the error functionals of a (pi, pibar) pair in one report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub tv: f64,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    /// `max_i |pi_i - pibar_i| / pibar_i`.
    pub max_relative: f64,
    /// `|f . pi - f . pibar|` for a supplied bounded test function.
    pub weak_gap: Option<f64>,
}

impl ErrorReport {
    pub fn new(pi: &[f64], pibar: &[f64]) -> Result<ErrorReport> {
        Self::with_test_function(pi, pibar, None)
    }

    pub fn with_test_function(
        pi: &[f64],
        pibar: &[f64],
        f: Option<&[f64]>,
    ) -> Result<ErrorReport> {
        check_same_length(pi, pibar)?;
        let eps: Vec<f64> = pi.iter().zip(pibar).map(|(a, b)| a - b).collect();
        let n = norms(&eps);
        let weak_gap = match f {
            Some(f) => Some(weak_convergence_gap(pi, pibar, f)?),
            None => None,
        };
        Ok(ErrorReport {
            tv: 0.5 * n.l1,
            l1: n.l1,
            l2: n.l2,
            linf: n.linf,
            max_relative: max_relative_error(pi, pibar)?,
            weak_gap,
        })
    }
}
