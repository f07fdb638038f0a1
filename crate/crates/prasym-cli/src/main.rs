//! Command-line interface: graph generation, PageRank solves, asymptotic
//! approximations, spectral estimates, lemma verification sweeps, and the
//! full experiment harness.
//!
//! Exit codes: 0 success, 1 parameter error, 2 numerical non-convergence,
//! 3 I/O error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use prasym::graph::Graph;
use prasym::models::{
    gen_chung_lu, gen_er, gen_sbm, realize_weights, PowerLawOffset, SbmParams, WeightSpec,
};
use prasym::pagerank::{
    pagerank_dense, pagerank_power, pagerank_series, stationary, vector_from_text, vector_to_text,
    PageRankConfig, PreferenceVector,
};
use prasym::spectral::{perron_vector, second_eigenvalue_magnitude};
use prasym::{asymptotics, Error};

use prasym_cli::config::{ExperimentConfig, Preset};
use prasym_cli::csv::records_to_csv;
use prasym_cli::experiment::{format_summary, run_experiment};
use prasym_cli::plot::{emit_loglog_plot, PlotField};
use prasym_cli::verify_suite::{format_outcome, rows_to_csv, run_verify, VerifyConstants};

#[derive(Parser)]
#[command(
    name = "prasym",
    about = "PageRank asymptotics on random graphs: generators, exact solvers, closed-form approximations, and bound verification",
    version
)]
struct Cli {
    /// Size of the worker pool (defaults to the number of cores). Output
    /// bytes do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random graph and write it as an edge list.
    Generate(GenerateArgs),
    /// Solve personalized PageRank on an edge-list graph.
    Pagerank(PagerankArgs),
    /// Evaluate a closed-form PageRank approximation.
    Approx(ApproxArgs),
    /// Estimate spectral quantities of an edge-list graph.
    Spectrum(SpectrumArgs),
    /// Run the bound-verification sweep and print the pass/fail table.
    Verify(VerifyArgs),
    /// Run a sweep preset or JSON config; emit CSV and SVG plots.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[command(subcommand)]
    model: GenerateModel,
}

#[derive(Subcommand)]
enum GenerateModel {
    /// Erdos-Renyi G(n, p).
    Er {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Chung-Lu with an expected-degree recipe.
    ChungLu {
        #[arg(long)]
        n: usize,
        /// constant:<w> | geometric:<mean>,<ratio> | powerlaw:<beta>,<avg>,<max>[,powered] | file:<path>
        #[arg(long)]
        weights: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: PathBuf,
        /// Also write the realized weight vector here.
        #[arg(long)]
        weights_out: Option<PathBuf>,
    },
    /// Two-community stochastic block model.
    Sbm {
        #[arg(long)]
        n: usize,
        /// Size of community 1 (defaults to n/2).
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        /// Permit q > p (disassortative) instances.
        #[arg(long)]
        allow_q_above_p: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct PagerankArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value_t = 0.85)]
    alpha: f64,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iter: usize,
    /// uniform | e<k> (1-based point mass) | file:<path>
    #[arg(long, default_value = "uniform")]
    preference: String,
    /// power | dense | series
    #[arg(long, default_value = "power")]
    method: String,
    /// Term count for the series method.
    #[arg(long, default_value_t = 60)]
    k: usize,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct ApproxArgs {
    /// Mixture approximation on this graph (mutually exclusive with the
    /// block-model parameters below).
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Block-model closed form: total vertex count.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long, default_value_t = 0.85)]
    alpha: f64,
    #[arg(long, default_value = "uniform")]
    preference: String,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct SpectrumArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 50_000)]
    max_iter: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct VerifyArgs {
    /// Preset naming the model family to verify.
    #[arg(long)]
    preset: String,
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    seeds_per_size: Option<u32>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Master seed (also PRASYM_SEED).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 4.0)]
    concentration_c: f64,
    #[arg(long, default_value_t = 3.0)]
    adjacency_k: f64,
    #[arg(long, default_value_t = 4.0)]
    q_norm_c: f64,
    #[arg(long, default_value_t = 1.5)]
    expansion_slack: f64,
    #[arg(long, default_value_t = 0.2)]
    qtilde_ratio: f64,
}

#[derive(Args)]
struct ExperimentArgs {
    /// One of the named sweeps.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// JSON config mirroring the experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Master seed (overrides config and PRASYM_SEED).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    seeds_per_size: Option<u32>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Persist per-cell pi / pibar vectors.
    #[arg(long)]
    dump_vectors: bool,
    /// Emit real wall times into the CSV (costs byte-reproducibility).
    #[arg(long)]
    timings: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: failed to size worker pool: {e}");
            return ExitCode::from(1);
        }
    }
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = err
                .downcast_ref::<Error>()
                .map(|e| match e {
                    Error::Parameter(_) | Error::Structure(_) | Error::Size { .. } => 1u8,
                    Error::Parse(_) => 1,
                })
                .unwrap_or_else(|| {
                    if err.downcast_ref::<std::io::Error>().is_some() {
                        3
                    } else {
                        1
                    }
                });
            ExitCode::from(code)
        }
    }
}

fn dispatch(command: Command) -> anyhow::Result<ExitCode> {
    match command {
        Command::Generate(args) => generate(args),
        Command::Pagerank(args) => pagerank(args),
        Command::Approx(args) => approx(args),
        Command::Spectrum(args) => spectrum(args),
        Command::Verify(args) => verify(args),
        Command::Experiment(args) => experiment(args),
    }
}

fn master_seed(flag: Option<u64>) -> Option<u64> {
    flag.or_else(|| {
        std::env::var("PRASYM_SEED")
            .ok()
            .and_then(|s| s.parse().ok())
    })
}

fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, contents)?;
    Ok(())
}

fn parse_weight_spec(text: &str, n: usize) -> anyhow::Result<WeightSpec> {
    let (kind, rest) = text.split_once(':').unwrap_or((text, ""));
    match kind {
        "constant" => Ok(WeightSpec::Constant {
            weight: rest.parse()?,
        }),
        "geometric" => {
            let parts: Vec<&str> = rest.split(',').collect();
            if parts.len() != 2 {
                anyhow::bail!("geometric weights need <mean>,<ratio>");
            }
            Ok(WeightSpec::GeometricClipped {
                target_mean: parts[0].parse()?,
                ratio: parts[1].parse()?,
            })
        }
        "powerlaw" => {
            let parts: Vec<&str> = rest.split(',').collect();
            if parts.len() < 3 {
                anyhow::bail!("powerlaw weights need <beta>,<avg>,<max>[,powered]");
            }
            let offset = if parts.get(3) == Some(&"powered") {
                PowerLawOffset::PoweredRatio
            } else {
                PowerLawOffset::LinearRatio
            };
            Ok(WeightSpec::PowerLaw {
                beta: parts[0].parse()?,
                avg_degree: parts[1].parse()?,
                max_degree: parts[2].parse()?,
                offset,
            })
        }
        "file" => {
            let text = fs::read_to_string(rest)?;
            let w = vector_from_text(&text)?;
            if w.len() != n {
                anyhow::bail!("weight file has {} entries, expected {n}", w.len());
            }
            Ok(WeightSpec::Explicit { weights: w })
        }
        other => anyhow::bail!("unknown weight spec '{other}'"),
    }
}

fn parse_preference(text: &str, n: usize) -> anyhow::Result<PreferenceVector> {
    if text == "uniform" {
        return Ok(PreferenceVector::uniform(n));
    }
    if let Some(rest) = text.strip_prefix('e') {
        if let Ok(k) = rest.parse::<usize>() {
            if k == 0 {
                anyhow::bail!("point-mass indices are 1-based");
            }
            return Ok(PreferenceVector::point_mass(n, k - 1)?);
        }
    }
    if let Some(path) = text.strip_prefix("file:") {
        let v = vector_from_text(&fs::read_to_string(path)?)?;
        return Ok(PreferenceVector::new(v)?);
    }
    anyhow::bail!("unknown preference '{text}' (uniform | e<k> | file:<path>)")
}

fn generate(args: GenerateArgs) -> anyhow::Result<ExitCode> {
    match args.model {
        GenerateModel::Er { n, p, seed, out } => {
            let g = gen_er(n, p, seed)?;
            write_file(&out, &g.to_edge_list())?;
            println!(
                "er n={} edges={} connected={}",
                g.n(),
                g.edge_count(),
                g.is_connected()
            );
        }
        GenerateModel::ChungLu {
            n,
            weights,
            seed,
            out,
            weights_out,
        } => {
            let spec = parse_weight_spec(&weights, n)?;
            let w = realize_weights(&spec, n, seed)?;
            let g = gen_chung_lu(&spec, n, seed)?;
            write_file(&out, &g.to_edge_list())?;
            if let Some(path) = weights_out {
                write_file(&path, &vector_to_text(&w))?;
            }
            println!(
                "chung_lu n={} edges={} connected={}",
                g.n(),
                g.edge_count(),
                g.is_connected()
            );
        }
        GenerateModel::Sbm {
            n,
            m,
            p,
            q,
            allow_q_above_p,
            seed,
            out,
        } => {
            let params = SbmParams::new(m.unwrap_or(n / 2), n, p, q)?;
            if q > p && allow_q_above_p {
                eprintln!("warning: q > p inverts the community structure assumption");
            }
            let g = gen_sbm(&params, seed, allow_q_above_p)?;
            write_file(&out, &g.to_edge_list())?;
            println!(
                "sbm n={} m={} edges={} connected={}",
                g.n(),
                params.m,
                g.edge_count(),
                g.is_connected()
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn pagerank(args: PagerankArgs) -> anyhow::Result<ExitCode> {
    let g = Graph::from_edge_list(&fs::read_to_string(&args.graph)?)?;
    let v = parse_preference(&args.preference, g.n())?;
    match args.method.as_str() {
        "power" => {
            let cfg = PageRankConfig::new(args.alpha, args.tol, args.max_iter)?;
            let r = pagerank_power(&g, &v, &cfg)?;
            write_file(&args.out, &vector_to_text(&r.pi))?;
            println!(
                "power alpha={} iterations={} residual={:.3e} converged={}",
                args.alpha, r.iterations, r.residual, r.converged
            );
            if !r.converged {
                return Ok(ExitCode::from(2));
            }
        }
        "dense" => {
            let r = pagerank_dense(&g, &v, args.alpha)?;
            write_file(&args.out, &vector_to_text(&r.pi))?;
            println!("dense alpha={} residual={:.3e}", args.alpha, r.residual);
        }
        "series" => {
            let (pi, tail) = pagerank_series(&g, &v, args.alpha, args.k)?;
            write_file(&args.out, &vector_to_text(&pi))?;
            println!(
                "series alpha={} k={} tail_bound={:.3e}",
                args.alpha, args.k, tail
            );
        }
        other => anyhow::bail!("unknown method '{other}' (power | dense | series)"),
    }
    Ok(ExitCode::SUCCESS)
}

fn approx(args: ApproxArgs) -> anyhow::Result<ExitCode> {
    match (&args.graph, args.n) {
        (Some(path), None) => {
            let g = Graph::from_edge_list(&fs::read_to_string(path)?)?;
            let v = parse_preference(&args.preference, g.n())?;
            let pibar = asymptotics::approx_mixture(&g, &v, args.alpha)?;
            write_file(&args.out, &vector_to_text(&pibar))?;
            println!("mixture alpha={} n={}", args.alpha, g.n());
        }
        (None, Some(n)) => {
            let (p, q) = match (args.p, args.q) {
                (Some(p), Some(q)) => (p, q),
                _ => anyhow::bail!("block-model approximation needs --p and --q"),
            };
            let v = parse_preference(&args.preference, n)?;
            let m = args.m.unwrap_or(n / 2);
            let pibar = if m * 2 == n {
                asymptotics::approx_sbm_equal(n, p, q, &v, args.alpha)?
            } else {
                let params = SbmParams::new(m, n, p, q)?;
                asymptotics::approx_sbm_general(&params, &v, args.alpha)?
            };
            write_file(&args.out, &vector_to_text(&pibar))?;
            println!("sbm alpha={} n={n} m={m}", args.alpha);
        }
        _ => anyhow::bail!("pass exactly one of --graph (mixture) or --n with --p/--q (block model)"),
    }
    Ok(ExitCode::SUCCESS)
}

fn spectrum(args: SpectrumArgs) -> anyhow::Result<ExitCode> {
    let g = Graph::from_edge_list(&fs::read_to_string(&args.graph)?)?;
    let est = second_eigenvalue_magnitude(&g, args.tol, args.max_iter, args.seed)?;
    let u1 = perron_vector(&g)?;
    let qu1 = prasym::spectral::matvec_q(&g, &u1)?;
    let perron_residual = qu1
        .iter()
        .zip(&u1)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    let (pi, connected) = stationary(&g)?;
    println!(
        "n={} edges={} connected={connected}",
        g.n(),
        g.edge_count()
    );
    println!(
        "second_eigenvalue_magnitude={:.12e} residual={:.3e} iterations={} converged={}",
        est.value, est.residual, est.iterations, est.converged
    );
    println!("spectral_gap={:.12e}", 1.0 - est.value);
    println!("perron_residual={perron_residual:.3e}");
    println!(
        "stationary_max={:.6e}",
        pi.iter().cloned().fold(0.0f64, f64::max)
    );
    if !est.converged {
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn verify(args: VerifyArgs) -> anyhow::Result<ExitCode> {
    let preset = Preset::from_name(&args.preset)?;
    let mut cfg = preset.config();
    if let Some(sizes) = args.sizes {
        cfg.sizes = sizes;
    }
    if let Some(seeds) = args.seeds_per_size {
        cfg.seeds_per_size = seeds;
    }
    if let Some(alpha) = args.alpha {
        cfg.alpha = alpha;
    }
    if let Some(seed) = master_seed(args.seed) {
        cfg.master_seed = seed;
    }
    let constants = VerifyConstants {
        concentration_c: args.concentration_c,
        adjacency_k: args.adjacency_k,
        q_norm_c: args.q_norm_c,
        expansion_slack: args.expansion_slack,
        qtilde_ratio: args.qtilde_ratio,
    };
    let outcome = run_verify(&cfg, &constants)?;
    print!("{}", format_outcome(&outcome));
    if let Some(dir) = args.output_dir {
        let path = dir.join(format!("verify_{}.csv", preset.name()));
        write_file(&path, &rows_to_csv(&outcome.rows))?;
        println!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn experiment(args: ExperimentArgs) -> anyhow::Result<ExitCode> {
    let (mut cfg, name): (ExperimentConfig, String) = match (&args.preset, &args.config) {
        (Some(preset), None) => {
            let p = Preset::from_name(preset)?;
            (p.config(), p.name().to_string())
        }
        (None, Some(path)) => {
            let cfg: ExperimentConfig = serde_json::from_str(&fs::read_to_string(path)?)
                .map_err(|e| Error::parameter(format!("bad config JSON: {e}")))?;
            (cfg, "custom".to_string())
        }
        _ => anyhow::bail!("pass exactly one of --preset or --config"),
    };
    if let Some(sizes) = args.sizes {
        cfg.sizes = sizes;
    }
    if let Some(seeds) = args.seeds_per_size {
        cfg.seeds_per_size = seeds;
    }
    if let Some(alpha) = args.alpha {
        cfg.alpha = alpha;
    }
    if let Some(seed) = master_seed(args.seed) {
        cfg.master_seed = seed;
    }
    if args.dump_vectors {
        cfg.dump_vectors = true;
    }
    if args.timings {
        cfg.timings = true;
    }
    if let Some(dir) = args.output_dir {
        cfg.output_dir = Some(dir);
    }
    let out_dir = cfg
        .output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("prasym-out"));

    let output = run_experiment(&cfg)?;
    print!("{}", format_summary(&cfg, &output.summary));

    let csv_path = out_dir.join(format!("{name}.csv"));
    write_file(&csv_path, &records_to_csv(&output.records)?)?;
    println!("wrote {}", csv_path.display());

    for field in [PlotField::TvError, PlotField::MaxRelativeError] {
        let title = format!("{name}: {} vs n", field.label());
        match emit_loglog_plot(&output.records, field, &title) {
            Ok(plot) => {
                let svg_path = out_dir.join(format!("{name}_{}.svg", field.label()));
                let dat_path = out_dir.join(format!("{name}_{}.dat", field.label()));
                write_file(&svg_path, &plot.svg)?;
                write_file(&dat_path, &plot.dat)?;
                if plot.skipped > 0 {
                    eprintln!(
                        "warning: {} records skipped in {} plot (nonpositive or excluded)",
                        plot.skipped,
                        field.label()
                    );
                }
                println!("wrote {}", svg_path.display());
            }
            Err(e) => eprintln!("warning: no {} plot: {e}", field.label()),
        }
    }

    if cfg.dump_vectors {
        let dir = out_dir.join("vectors");
        for v in &output.vectors {
            write_file(
                &dir.join(format!("{name}_n{}_s{}_pi.txt", v.n, v.seed)),
                &vector_to_text(&v.pi),
            )?;
            write_file(
                &dir.join(format!("{name}_n{}_s{}_pibar.txt", v.n, v.seed)),
                &vector_to_text(&v.pibar),
            )?;
        }
        println!(
            "wrote {} vector pairs under {}",
            output.vectors.len(),
            dir.display()
        );
    }
    Ok(ExitCode::SUCCESS)
}
