//! Experiment configuration: models, preferences, sweep settings, presets.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use prasym::error::{Error, Result};
use prasym::graph::Graph;
use prasym::models::{
    gen_chung_lu_with, gen_er, gen_sbm, realize_weights, PowerLawOffset, SbmParams, WeightSpec,
};
use prasym::pagerank::PreferenceVector;

/// Default master seed for presets; override with `--seed` or the
/// `PRASYM_SEED` environment variable.
pub const DEFAULT_MASTER_SEED: u64 = 42;

/// Density coefficient for the ER sweeps: `p(n) = min(cap, c ln^7(n) / n)`
/// with `c` calibrated so that `p = 0.5` at `n = 1024`. The raw `ln^7 / n`
/// form exceeds 1 at bench scale for any `c` near 1, so the density is
/// capped while keeping the growth shape.
pub fn er_density_coefficient() -> f64 {
    0.5 * 1024.0 / (1024.0f64).ln().powi(7)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OffsetChoice {
    /// Plain index-offset ratio (the default).
    LinearRatio,
    /// Powered form that pins the largest weight at the max degree.
    PoweredRatio,
}

impl From<OffsetChoice> for PowerLawOffset {
    fn from(c: OffsetChoice) -> PowerLawOffset {
        match c {
            OffsetChoice::LinearRatio => PowerLawOffset::LinearRatio,
            OffsetChoice::PoweredRatio => PowerLawOffset::PoweredRatio,
        }
    }
}

/// Model family plus its size-dependent parameter rules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelConfig {
    /// ER with `p(n) = min(p_cap, c ln^7(n) / n)`.
    Er { c: f64, p_cap: f64 },
    /// ER with a size-independent density.
    ErFixedP { p: f64 },
    /// Chung-Lu with geometric-clipped weights of mean
    /// `mean_coefficient * n^{1/3}` and clip ratio `ratio`.
    ChungLuGeometric { mean_coefficient: f64, ratio: f64 },
    /// Chung-Lu power-law weights with average degree `n^{avg_exponent}`
    /// and max degree `n^{max_exponent}`.
    PowerLaw {
        beta: f64,
        avg_exponent: f64,
        max_exponent: f64,
        offset: OffsetChoice,
    },
    /// Two equal communities.
    Sbm { p: f64, q: f64 },
}

impl ModelConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ModelConfig::Er { .. } | ModelConfig::ErFixedP { .. } => "er",
            ModelConfig::ChungLuGeometric { .. } => "chung_lu",
            ModelConfig::PowerLaw { .. } => "power_law",
            ModelConfig::Sbm { .. } => "sbm",
        }
    }

    /// Edge density of the ER variants at size n.
    pub fn er_probability(&self, n: usize) -> Option<f64> {
        match self {
            ModelConfig::Er { c, p_cap } => {
                Some((c * (n as f64).ln().powi(7) / n as f64).min(*p_cap))
            }
            ModelConfig::ErFixedP { p } => Some(*p),
            _ => None,
        }
    }

    /// Mean expected degree at size n (drives the spectral-expansion
    /// threshold).
    pub fn mean_expected_degree(&self, n: usize) -> f64 {
        match self {
            ModelConfig::Er { .. } | ModelConfig::ErFixedP { .. } => {
                self.er_probability(n).unwrap() * n as f64
            }
            ModelConfig::ChungLuGeometric {
                mean_coefficient, ..
            } => mean_coefficient * (n as f64).powf(1.0 / 3.0),
            ModelConfig::PowerLaw { avg_exponent, .. } => (n as f64).powf(*avg_exponent),
            ModelConfig::Sbm { p, q } => (n as f64) / 2.0 * (p + q),
        }
    }

    pub fn sbm_params(&self, n: usize) -> Option<SbmParams> {
        match self {
            ModelConfig::Sbm { p, q } => SbmParams::new(n / 2, n, *p, *q).ok(),
            _ => None,
        }
    }

    /// Generate the graph and its expected-degree vector at size n.
    pub fn realize(&self, n: usize, seed: u64) -> Result<(Graph, Vec<f64>)> {
        match self {
            ModelConfig::Er { .. } | ModelConfig::ErFixedP { .. } => {
                let p = self.er_probability(n).unwrap();
                let g = gen_er(n, p, seed)?;
                Ok((g, vec![p * n as f64; n]))
            }
            ModelConfig::ChungLuGeometric {
                mean_coefficient,
                ratio,
            } => {
                let spec = WeightSpec::GeometricClipped {
                    target_mean: mean_coefficient * (n as f64).powf(1.0 / 3.0),
                    ratio: *ratio,
                };
                let w = realize_weights(&spec, n, seed)?;
                let g = gen_chung_lu_with(&w, seed)?;
                Ok((g, w))
            }
            ModelConfig::PowerLaw {
                beta,
                avg_exponent,
                max_exponent,
                offset,
            } => {
                let spec = WeightSpec::PowerLaw {
                    beta: *beta,
                    avg_degree: (n as f64).powf(*avg_exponent),
                    max_degree: (n as f64).powf(*max_exponent),
                    offset: (*offset).into(),
                };
                let w = realize_weights(&spec, n, seed)?;
                let g = gen_chung_lu_with(&w, seed)?;
                Ok((g, w))
            }
            ModelConfig::Sbm { p, q } => {
                let params = SbmParams::new(n / 2, n, *p, *q)?;
                let g = gen_sbm(&params, seed, false)?;
                Ok((g, params.expected_degrees()))
            }
        }
    }
}

/// Restart distribution rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PreferenceSpec {
    Uniform,
    /// Point mass at a 0-based vertex index.
    PointMass { vertex: usize },
    /// Uniform over one block of the two-community model (block 1 or 2).
    CommunityIndicator { block: u8 },
}

impl PreferenceSpec {
    pub fn tag(&self) -> String {
        match self {
            PreferenceSpec::Uniform => "uniform".to_string(),
            // 1-based in the tag, matching the usual e_i notation.
            PreferenceSpec::PointMass { vertex } => format!("e{}", vertex + 1),
            PreferenceSpec::CommunityIndicator { block } => format!("c{block}"),
        }
    }

    /// Build the vector on a graph whose vertices are `kept` (a sorted
    /// subset of the originally generated vertex ids). Returns None when
    /// the spec cannot be realized on the kept set (point mass dropped).
    pub fn build(&self, kept: Option<&[u32]>, n_full: usize) -> Option<PreferenceVector> {
        let k = kept.map_or(n_full, |s| s.len());
        match self {
            PreferenceSpec::Uniform => Some(PreferenceVector::uniform(k)),
            PreferenceSpec::PointMass { vertex } => {
                if *vertex >= n_full {
                    return None;
                }
                let idx = match kept {
                    None => *vertex,
                    Some(s) => s.binary_search(&(*vertex as u32)).ok()?,
                };
                PreferenceVector::point_mass(k, idx).ok()
            }
            PreferenceSpec::CommunityIndicator { block } => {
                let m = n_full / 2;
                let in_block = |v: usize| match block {
                    1 => v < m,
                    _ => v >= m,
                };
                match kept {
                    None => {
                        let range = if *block == 1 { 0..m } else { m..n_full };
                        PreferenceVector::indicator(n_full, range).ok()
                    }
                    Some(s) => {
                        let members: Vec<usize> = s
                            .iter()
                            .enumerate()
                            .filter(|(_, &orig)| in_block(orig as usize))
                            .map(|(i, _)| i)
                            .collect();
                        if members.is_empty() {
                            return None;
                        }
                        let mass = 1.0 / members.len() as f64;
                        let mut entries = vec![0.0; k];
                        for i in members {
                            entries[i] = mass;
                        }
                        PreferenceVector::new(entries).ok()
                    }
                }
            }
        }
    }
}

fn default_sizes() -> Vec<usize> {
    vec![1024, 2048, 4096, 8192]
}
fn default_seeds_per_size() -> u32 {
    10
}
fn default_alpha() -> f64 {
    0.85
}
fn default_master_seed() -> u64 {
    DEFAULT_MASTER_SEED
}
fn default_pagerank_tol() -> f64 {
    1e-10
}
fn default_pagerank_max_iter() -> usize {
    5000
}
fn default_spectral_tol() -> f64 {
    1e-6
}
fn default_spectral_max_iter() -> usize {
    300
}

/// A full sweep description. Serializes to/from a single JSON document;
/// CLI flags override individual fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    #[serde(default = "default_sizes")]
    pub sizes: Vec<usize>,
    #[serde(default = "default_seeds_per_size")]
    pub seeds_per_size: u32,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_preference")]
    pub preference: PreferenceSpec,
    #[serde(default = "default_master_seed")]
    pub master_seed: u64,
    #[serde(default = "default_pagerank_tol")]
    pub pagerank_tol: f64,
    #[serde(default = "default_pagerank_max_iter")]
    pub pagerank_max_iter: usize,
    #[serde(default = "default_spectral_tol")]
    pub spectral_tol: f64,
    #[serde(default = "default_spectral_max_iter")]
    pub spectral_max_iter: usize,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Persist per-cell pi and pibar vectors next to the CSV.
    #[serde(default)]
    pub dump_vectors: bool,
    /// Emit real wall times into the CSV. Off by default so that CSV
    /// output is byte-identical across runs and thread counts.
    #[serde(default)]
    pub timings: bool,
}

fn default_preference() -> PreferenceSpec {
    PreferenceSpec::Uniform
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::parameter("sizes must be nonempty"));
        }
        if !self.sizes.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::parameter("sizes must be strictly increasing"));
        }
        if self.seeds_per_size < 1 {
            return Err(Error::parameter("seeds_per_size must be >= 1"));
        }
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(Error::parameter(format!(
                "alpha {} outside [0, 1)",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// The named sweeps. `fig1_*` and `fig2_*` share runs and differ only in
/// which error the headline plot shows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig1Er,
    Fig1Cl,
    Fig2Er,
    Fig2Cl,
    Fig3Powerlaw,
    Fig4Pointmass,
    Fig5Sbm,
}

pub const PRESET_NAMES: &[&str] = &[
    "fig1_er",
    "fig1_cl",
    "fig2_er",
    "fig2_cl",
    "fig3_powerlaw",
    "fig4_pointmass",
    "fig5_sbm",
];

impl Preset {
    pub fn from_name(name: &str) -> Result<Preset> {
        match name {
            "fig1_er" => Ok(Preset::Fig1Er),
            "fig1_cl" => Ok(Preset::Fig1Cl),
            "fig2_er" => Ok(Preset::Fig2Er),
            "fig2_cl" => Ok(Preset::Fig2Cl),
            "fig3_powerlaw" => Ok(Preset::Fig3Powerlaw),
            "fig4_pointmass" => Ok(Preset::Fig4Pointmass),
            "fig5_sbm" => Ok(Preset::Fig5Sbm),
            other => Err(Error::parameter(format!(
                "unknown preset '{other}' (expected one of {PRESET_NAMES:?})"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Fig1Er => "fig1_er",
            Preset::Fig1Cl => "fig1_cl",
            Preset::Fig2Er => "fig2_er",
            Preset::Fig2Cl => "fig2_cl",
            Preset::Fig3Powerlaw => "fig3_powerlaw",
            Preset::Fig4Pointmass => "fig4_pointmass",
            Preset::Fig5Sbm => "fig5_sbm",
        }
    }

    /// The error field the preset's headline plot shows.
    pub fn headline_field(&self) -> crate::plot::PlotField {
        use crate::plot::PlotField;
        match self {
            Preset::Fig2Er | Preset::Fig2Cl => PlotField::TvError,
            _ => PlotField::MaxRelativeError,
        }
    }

    pub fn config(&self) -> ExperimentConfig {
        let model = match self {
            Preset::Fig1Er | Preset::Fig2Er | Preset::Fig4Pointmass => ModelConfig::Er {
                c: er_density_coefficient(),
                p_cap: 0.5,
            },
            Preset::Fig1Cl | Preset::Fig2Cl => ModelConfig::ChungLuGeometric {
                mean_coefficient: 10.0,
                ratio: 7.0,
            },
            Preset::Fig3Powerlaw => ModelConfig::PowerLaw {
                beta: 4.0,
                avg_exponent: 1.0 / 6.0,
                max_exponent: 1.0 / 3.0,
                offset: OffsetChoice::LinearRatio,
            },
            Preset::Fig5Sbm => ModelConfig::Sbm { p: 0.1, q: 0.01 },
        };
        let preference = match self {
            Preset::Fig4Pointmass => PreferenceSpec::PointMass { vertex: 0 },
            _ => PreferenceSpec::Uniform,
        };
        ExperimentConfig {
            model,
            sizes: default_sizes(),
            seeds_per_size: default_seeds_per_size(),
            alpha: default_alpha(),
            preference,
            master_seed: default_master_seed(),
            pagerank_tol: default_pagerank_tol(),
            pagerank_max_iter: default_pagerank_max_iter(),
            spectral_tol: default_spectral_tol(),
            spectral_max_iter: default_spectral_max_iter(),
            output_dir: None,
            dump_vectors: false,
            timings: false,
        }
    }
}
