//! The sweep runner: one record per (n, seed) cell.

use std::time::Instant;

use rayon::prelude::*;

use prasym::error::Result;
use prasym::metrics::ErrorReport;
use prasym::pagerank::{pagerank_power, PageRankConfig, PreferenceVector};
use prasym::rng;
use prasym::spectral::second_eigenvalue_magnitude;
use prasym::{asymptotics, Graph};

use crate::config::{ExperimentConfig, ModelConfig};

const CELL_TAG: u64 = 0x5eed_ce11_5eed_ce11;

/// One measured sweep cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub model: String,
    pub n: usize,
    pub seed: u64,
    pub alpha: f64,
    pub preference: String,
    pub tv_error: f64,
    pub max_relative_error: f64,
    pub lambda2: f64,
    pub degree_ratio: f64,
    pub iterations: usize,
    pub wall_time_ms: f64,
    pub flags: String,
}

impl ExperimentRecord {
    pub fn is_excluded(&self) -> bool {
        self.flags.split(';').any(|f| f == "excluded")
    }
}

/// Vectors persisted when `dump_vectors` is on.
pub struct CellVectors {
    pub n: usize,
    pub seed: u64,
    pub pi: Vec<f64>,
    pub pibar: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SizeSummary {
    pub n: usize,
    pub median_tv: f64,
    pub median_max_rel: f64,
    pub included: usize,
    pub excluded: usize,
}

#[derive(Debug, Clone)]
pub struct ExperimentSummary {
    pub per_size: Vec<SizeSummary>,
    /// Least-squares slope of log10(median tv) against log10(n).
    pub tv_slope: Option<f64>,
    pub max_rel_slope: Option<f64>,
    pub total_wall_ms: f64,
}

pub struct ExperimentOutput {
    pub records: Vec<ExperimentRecord>,
    pub summary: ExperimentSummary,
    pub vectors: Vec<CellVectors>,
}

/// Seed for the (n, seed_index) cell, independent of every other cell.
pub fn cell_seed(master: u64, n: usize, seed_index: u32) -> u64 {
    rng::mix(master, CELL_TAG, ((n as u64) << 24) | seed_index as u64)
}

/// Run the sweep. Sizes run sequentially; the seeds of one size run in a
/// work pool. Records are deterministic functions of (config, master
/// seed) — cell timings are measured but only forwarded when the config
/// asks for them.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let start = Instant::now();
    let mut records = Vec::new();
    let mut vectors = Vec::new();
    for &n in &cfg.sizes {
        let mut row: Vec<(ExperimentRecord, Option<CellVectors>)> = (0..cfg.seeds_per_size)
            .into_par_iter()
            .map(|idx| run_cell(cfg, n, cell_seed(cfg.master_seed, n, idx)))
            .collect::<Result<Vec<_>>>()?;
        // Deterministic order: by (model, n, seed); model and n are
        // constant within a row.
        row.sort_by_key(|(r, _)| r.seed);
        for (record, cell_vectors) in row {
            if let Some(v) = cell_vectors {
                vectors.push(v);
            }
            records.push(record);
        }
    }
    let summary = summarize(cfg, &records, start.elapsed().as_secs_f64() * 1e3);
    Ok(ExperimentOutput {
        records,
        summary,
        vectors,
    })
}

fn run_cell(
    cfg: &ExperimentConfig,
    n: usize,
    seed: u64,
) -> Result<(ExperimentRecord, Option<CellVectors>)> {
    let started = Instant::now();
    let mut flags: Vec<String> = Vec::new();

    let (full, _weights) = cfg.model.realize(n, seed)?;

    // The approximations assume a connected graph; when a sample is
    // disconnected (sparse power-law graphs at bench sizes) the cell is
    // evaluated on the largest connected component and flagged.
    let (graph, kept): (Graph, Option<Vec<u32>>) = if full.is_connected() {
        (full, None)
    } else {
        let kept = full.largest_component();
        flags.push("disconnected".to_string());
        flags.push(format!("lcc:{}/{}", kept.len(), n));
        let sub = full.induced(&kept);
        (sub, Some(kept))
    };

    let preference = cfg.preference.build(kept.as_deref(), n);
    let record = |flags: Vec<String>,
                  tv: f64,
                  max_rel: f64,
                  lambda2: f64,
                  degree_ratio: f64,
                  iterations: usize,
                  wall: f64,
                  vecs: Option<CellVectors>| {
        (
            ExperimentRecord {
                model: cfg.model.name().to_string(),
                n,
                seed,
                alpha: cfg.alpha,
                preference: cfg.preference.tag(),
                tv_error: tv,
                max_relative_error: max_rel,
                lambda2,
                degree_ratio,
                iterations,
                wall_time_ms: if cfg.timings { wall } else { 0.0 },
                flags: flags.join(";"),
            },
            vecs,
        )
    };

    let Some(v) = preference else {
        flags.push("excluded".to_string());
        flags.push("preference-unrealizable".to_string());
        return Ok(record(
            flags,
            f64::NAN,
            f64::NAN,
            f64::NAN,
            f64::NAN,
            0,
            started.elapsed().as_secs_f64() * 1e3,
            None,
        ));
    };
    if graph.n() < 2 || graph.volume() == 0 || graph.min_degree() == 0 {
        flags.push("excluded".to_string());
        flags.push("degenerate-component".to_string());
        return Ok(record(
            flags,
            f64::NAN,
            f64::NAN,
            f64::NAN,
            f64::NAN,
            0,
            started.elapsed().as_secs_f64() * 1e3,
            None,
        ));
    }

    let pr_cfg = PageRankConfig::new(cfg.alpha, cfg.pagerank_tol, cfg.pagerank_max_iter)?;
    let solved = pagerank_power(&graph, &v, &pr_cfg)?;
    if !solved.converged {
        flags.push("nonconverged:pagerank".to_string());
    }

    let pibar = approximate(cfg, &graph, &v, kept.is_some(), &mut flags)?;

    let report = ErrorReport::new(&solved.pi, &pibar)?;
    let spectral = second_eigenvalue_magnitude(&graph, cfg.spectral_tol, cfg.spectral_max_iter, seed)?;
    if !spectral.converged {
        flags.push("nonconverged:lambda2".to_string());
    }
    let degree_ratio = graph.max_degree() as f64 / graph.min_degree() as f64;

    let vecs = cfg.dump_vectors.then(|| CellVectors {
        n,
        seed,
        pi: solved.pi.clone(),
        pibar: pibar.clone(),
    });
    Ok(record(
        flags,
        report.tv,
        report.max_relative,
        spectral.value,
        degree_ratio,
        solved.iterations,
        started.elapsed().as_secs_f64() * 1e3,
        vecs,
    ))
}

/// The asymptotic approximation the sweep compares against: the
/// block-model closed form for SBM configs, the degree/restart mixture
/// for everything else.
fn approximate(
    cfg: &ExperimentConfig,
    graph: &Graph,
    v: &PreferenceVector,
    restricted: bool,
    flags: &mut Vec<String>,
) -> Result<Vec<f64>> {
    match (&cfg.model, restricted) {
        (ModelConfig::Sbm { p, q }, false) => {
            let n = graph.n();
            if n % 2 == 0 {
                asymptotics::approx_sbm_equal(n, *p, *q, v, cfg.alpha)
            } else {
                let params = prasym::models::SbmParams::new(n / 2, n, *p, *q)?;
                asymptotics::approx_sbm_general(&params, v, cfg.alpha)
            }
        }
        (ModelConfig::Sbm { .. }, true) => {
            // The component no longer matches the block parameters; fall
            // back to the realized-degree mixture.
            flags.push("approx:mixture-fallback".to_string());
            asymptotics::approx_mixture(graph, v, cfg.alpha)
        }
        _ => asymptotics::approx_mixture(graph, v, cfg.alpha),
    }
}

fn summarize(
    cfg: &ExperimentConfig,
    records: &[ExperimentRecord],
    total_wall_ms: f64,
) -> ExperimentSummary {
    let mut per_size = Vec::new();
    for &n in &cfg.sizes {
        let included: Vec<&ExperimentRecord> = records
            .iter()
            .filter(|r| r.n == n && !r.is_excluded())
            .collect();
        let excluded = records
            .iter()
            .filter(|r| r.n == n && r.is_excluded())
            .count();
        per_size.push(SizeSummary {
            n,
            median_tv: median(included.iter().map(|r| r.tv_error)),
            median_max_rel: median(included.iter().map(|r| r.max_relative_error)),
            included: included.len(),
            excluded,
        });
    }
    let tv_slope = loglog_slope(per_size.iter().map(|s| (s.n, s.median_tv)));
    let max_rel_slope = loglog_slope(per_size.iter().map(|s| (s.n, s.median_max_rel)));
    ExperimentSummary {
        per_size,
        tv_slope,
        max_rel_slope,
        total_wall_ms,
    }
}

/// Median of the finite values (NaN when none).
pub fn median(values: impl Iterator<Item = f64>) -> f64 {
    let mut vals: Vec<f64> = values.filter(|v| v.is_finite()).collect();
    if vals.is_empty() {
        return f64::NAN;
    }
    vals.sort_by(f64::total_cmp);
    let k = vals.len();
    if k % 2 == 1 {
        vals[k / 2]
    } else {
        0.5 * (vals[k / 2 - 1] + vals[k / 2])
    }
}

/// Least-squares slope of log10(y) on log10(x) over positive finite
/// points; None with fewer than two usable points.
pub fn loglog_slope(points: impl Iterator<Item = (usize, f64)>) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .filter(|(_, y)| y.is_finite() && *y > 0.0)
        .map(|(x, y)| ((x as f64).log10(), y.log10()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-30 {
        return None;
    }
    Some((n * sxy - sx * sy) / denom)
}

/// Render the summary as the human-readable block the CLI prints.
pub fn format_summary(cfg: &ExperimentConfig, summary: &ExperimentSummary) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "model={} preference={} alpha={} seeds/size={}\n",
        cfg.model.name(),
        cfg.preference.tag(),
        cfg.alpha,
        cfg.seeds_per_size
    ));
    out.push_str("      n     median_tv          median_max_rel     included excluded\n");
    for s in &summary.per_size {
        out.push_str(&format!(
            "{:>7}  {:<18.6e} {:<18.6e} {:>8} {:>8}\n",
            s.n, s.median_tv, s.median_max_rel, s.included, s.excluded
        ));
    }
    match summary.tv_slope {
        Some(s) => out.push_str(&format!("log-log slope (tv): {s:.4}\n")),
        None => out.push_str("log-log slope (tv): n/a\n"),
    }
    match summary.max_rel_slope {
        Some(s) => out.push_str(&format!("log-log slope (max relative): {s:.4}\n")),
        None => out.push_str("log-log slope (max relative): n/a\n"),
    }
    out.push_str(&format!(
        "total wall time: {:.1} ms\n",
        summary.total_wall_ms
    ));
    out
}
