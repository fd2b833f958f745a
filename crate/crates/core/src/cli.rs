//! Command-line interface.
//!
//! Subcommands: `prob exact|bound|mc`, `safe-region`, `lengthmap`,
//! `train`, `classify`, and `experiment <fig_id>`. The environment
//! variable `COLLAPSELAB_SEED` overrides the default seed 0 wherever a
//! `--seed` flag is omitted. Artifacts are CSV (canonical) plus SVG
//! renderings, all written atomically with an embedded (seed, config
//! hash, version) header line.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::collapse::{classify_state, default_tolerance, Grid};
use crate::error::{Error, Result};
use crate::exact::{
    collapse_probability_bound, exact_constant_probability, length_map_general, length_map_relu,
    max_safe_depth, LengthMapParams,
};
use crate::init::{BiasMode, InitializerSpec, Scheme};
use crate::mc::{estimate_zero_function, sweep, MCEstimate};
use crate::net::{ActivationKind, Architecture, NetworkDocument};
use crate::report::{artifact_header, config_hash, csv_artifact, write_atomic, TOOL_VERSION};
use crate::svg::Plot;
use crate::targets::TargetId;
use crate::train::{train, LossKind, Normalization, OptimizerKind, TrainConfig};

#[derive(Parser, Debug)]
#[command(name = "collapselab", version, about = "Numerical laboratory for deep, narrow ReLU network collapse")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Collapse probabilities: exact width-2 chain, closed form, Monte Carlo.
    Prob {
        #[command(subcommand)]
        which: ProbCommand,
    },
    /// Safe (width, depth) table: max depth keeping the collapse bound below p.
    SafeRegion(SafeRegionArgs),
    /// Expected squared-length trajectory across layers.
    Lengthmap(LengthmapArgs),
    /// Train a network on an analytic target and classify the outcome.
    Train(TrainArgs),
    /// Classify a serialized network against a target.
    Classify(ClassifyArgs),
    /// Regenerate a figure-style artifact set.
    Experiment(ExperimentArgs),
}

#[derive(Subcommand, Debug)]
enum ProbCommand {
    /// Exact constant-function probability for bias-free width-2 chains.
    Exact {
        #[arg(long)]
        depth: usize,
        /// Apply ReLU on the last layer as well.
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        last_layer_relu: bool,
    },
    /// Closed-form zero-output probability for a fixed nonzero input.
    Bound {
        /// Layer widths: "3x10" (width 3, 10 layers) or "4,3,2".
        #[arg(long)]
        widths: String,
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        last_layer_relu: bool,
        #[arg(long, default_value_t = false)]
        biases_nonzero: bool,
    },
    /// Monte Carlo zero-function estimate for a constant-width chain.
    Mc {
        #[arg(long)]
        width: usize,
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value = "he_normal")]
        scheme: String,
        /// Samples per estimate (paper scale: 1000000).
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long)]
        seed: Option<u64>,
        /// Optional CSV artifact path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct SafeRegionArgs {
    /// Collapse budgets; repeatable. Defaults to 0.01 and 0.1.
    #[arg(long = "p")]
    p: Vec<f64>,
    #[arg(long, default_value_t = 64)]
    max_width: usize,
    #[arg(long, default_value = "safe_region.csv")]
    out: PathBuf,
    /// Optional SVG rendering path.
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct LengthmapArgs {
    #[arg(long, default_value_t = 2.0)]
    sigma_w_sq: f64,
    #[arg(long, default_value_t = 0.0)]
    sigma_b_sq: f64,
    #[arg(long, default_value_t = 1.0)]
    q0: f64,
    #[arg(long, default_value_t = 100)]
    depth: usize,
    /// relu, selu, or identity.
    #[arg(long, default_value = "relu")]
    activation: String,
    /// Evaluate by Gauss-Hermite quadrature instead of the ReLU closed form.
    #[arg(long, default_value_t = false)]
    general: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    target: String,
    /// Total layer count including the affine output layer.
    #[arg(long, default_value_t = 10)]
    depth: usize,
    /// Hidden-layer width.
    #[arg(long, default_value_t = 2)]
    width: usize,
    #[arg(long, default_value = "he_normal")]
    init: String,
    #[arg(long, default_value = "zero")]
    bias_mode: String,
    #[arg(long, default_value = "mse")]
    loss: String,
    #[arg(long, default_value = "adam")]
    opt: String,
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    #[arg(long, default_value_t = 20_000)]
    steps: usize,
    #[arg(long, default_value_t = 128)]
    batch: usize,
    /// none, batchnorm, weightnorm, selu, dropout, or dropout:<rate>.
    #[arg(long, default_value = "none")]
    norm: String,
    #[arg(long)]
    seed: Option<u64>,
    /// Where to write the JSON train report.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    /// Serialized network document (JSON).
    #[arg(long)]
    network: PathBuf,
    #[arg(long)]
    target: String,
    #[arg(long, default_value = "mse")]
    loss: String,
    /// Classification tolerance; defaults to 2e-2 of the output range.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// fig5a_curves, fig5b_safe_region, fig6_orthogonal, or collapse_gallery.
    fig_id: String,
    #[arg(long, default_value = "artifacts")]
    out_dir: PathBuf,
    /// Monte Carlo samples per cell (desk scale default).
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    /// Plot probability curves on a log10 y axis (fig5a_curves only).
    #[arg(long, default_value_t = false)]
    log_y: bool,
    #[arg(long)]
    seed: Option<u64>,
}

/// Parses argv and runs; returns the process exit code.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap uses exit code 2 for usage errors and 0 for --help.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            let report = serde_json::json!({
                "error": e.to_string(),
                "version": TOOL_VERSION,
            });
            eprintln!("{report}");
            1
        }
    }
}

fn resolved_seed(flag: Option<u64>) -> u64 {
    flag.or_else(|| {
        std::env::var("COLLAPSELAB_SEED")
            .ok()
            .and_then(|v| v.parse().ok())
    })
    .unwrap_or(0)
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Prob { which } => match which {
            ProbCommand::Exact {
                depth,
                last_layer_relu,
            } => {
                let p = exact_constant_probability(depth, last_layer_relu)?;
                let f = p.to_f64().unwrap_or(f64::NAN);
                println!("exact constant probability depth={depth} last_layer_relu={last_layer_relu}: {p} = {f}");
                Ok(())
            }
            ProbCommand::Bound {
                widths,
                last_layer_relu,
                biases_nonzero,
            } => {
                let widths = parse_widths(&widths)?;
                let p = collapse_probability_bound(&widths, last_layer_relu, biases_nonzero);
                println!(
                    "collapse probability bound widths={widths:?} last_layer_relu={last_layer_relu} biases_nonzero={biases_nonzero}: {p}"
                );
                Ok(())
            }
            ProbCommand::Mc {
                width,
                depth,
                scheme,
                samples,
                seed,
                out,
            } => {
                let seed = resolved_seed(seed);
                let scheme = parse_scheme(&scheme)?;
                let arch = Architecture::chain(1, width, depth, true, true)?;
                let spec = InitializerSpec {
                    scheme,
                    bias_mode: BiasMode::Zero,
                    seed,
                };
                let e = estimate_zero_function(&arch, &spec, samples, seed)?;
                println!(
                    "mc zero-function width={width} depth={depth} scheme={} n={}: p_hat={} ci=[{}, {}]",
                    scheme.name(),
                    e.n,
                    e.p_hat,
                    e.ci_low,
                    e.ci_high
                );
                if let Some(path) = out {
                    let cfg = format!(
                        "{{\"cmd\":\"prob mc\",\"width\":{width},\"depth\":{depth},\"scheme\":\"{}\",\"n\":{samples},\"seed\":{seed}}}",
                        scheme.name()
                    );
                    let rows = vec![mc_row(width, depth, scheme.name(), &e)];
                    let text = csv_artifact(seed, &config_hash(&cfg), &MC_COLUMNS, &rows);
                    write_atomic(&path, text.as_bytes())?;
                    println!("wrote {}", path.display());
                }
                Ok(())
            }
        },
        Command::SafeRegion(args) => safe_region(args),
        Command::Lengthmap(args) => lengthmap(args),
        Command::Train(args) => run_train(args),
        Command::Classify(args) => classify(args),
        Command::Experiment(args) => {
            let seed = resolved_seed(args.seed);
            let options = FigureOptions {
                samples: args.samples,
                log_y: args.log_y,
            };
            let paths = figure_scripts_with(&args.fig_id, &args.out_dir, &options, seed)?;
            for p in paths {
                println!("wrote {}", p.display());
            }
            Ok(())
        }
    }
}

const MC_COLUMNS: [&str; 8] = [
    "width", "depth", "scheme", "n", "p_hat", "ci_low", "ci_high", "seed",
];

fn mc_row(width: usize, depth: usize, scheme: &str, e: &MCEstimate) -> Vec<String> {
    vec![
        width.to_string(),
        depth.to_string(),
        scheme.to_string(),
        e.n.to_string(),
        format!("{}", e.p_hat),
        format!("{}", e.ci_low),
        format!("{}", e.ci_high),
        e.seed.to_string(),
    ]
}

fn parse_widths(text: &str) -> Result<Vec<usize>> {
    if let Some((w, d)) = text.split_once('x') {
        let w: usize = w
            .parse()
            .map_err(|_| Error::arg(format!("bad width in `{text}`")))?;
        let d: usize = d
            .parse()
            .map_err(|_| Error::arg(format!("bad depth in `{text}`")))?;
        if w == 0 || d == 0 {
            return Err(Error::arg("width and depth must be >= 1"));
        }
        return Ok(vec![w; d]);
    }
    let widths: std::result::Result<Vec<usize>, _> =
        text.split(',').map(|t| t.trim().parse::<usize>()).collect();
    let widths = widths.map_err(|_| Error::arg(format!("bad widths list `{text}`")))?;
    if widths.is_empty() || widths.contains(&0) {
        return Err(Error::arg("widths must be non-empty and positive"));
    }
    Ok(widths)
}

fn parse_scheme(name: &str) -> Result<Scheme> {
    if let Some(rest) = name.strip_prefix("symmetric_normal:") {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() != 2 {
            return Err(Error::arg(
                "symmetric_normal takes `symmetric_normal:<sigma_w_sq>,<sigma_b_sq>`",
            ));
        }
        let sigma_w_sq: f64 = parts[0]
            .parse()
            .map_err(|_| Error::arg("bad sigma_w_sq"))?;
        let sigma_b_sq: f64 = parts[1]
            .parse()
            .map_err(|_| Error::arg("bad sigma_b_sq"))?;
        return Ok(Scheme::SymmetricNormal {
            sigma_w_sq,
            sigma_b_sq,
        });
    }
    match name {
        "he_normal" => Ok(Scheme::HeNormal),
        "lecun_normal" => Ok(Scheme::LecunNormal),
        "glorot_uniform" => Ok(Scheme::GlorotUniform),
        "symmetric_uniform" => Ok(Scheme::SymmetricUniform),
        "rademacher" => Ok(Scheme::Rademacher),
        "orthogonal" => Ok(Scheme::Orthogonal),
        "lsuv" => Ok(Scheme::Lsuv),
        other => Err(Error::Unsupported(format!("unknown scheme `{other}`"))),
    }
}

fn parse_bias_mode(name: &str) -> Result<BiasMode> {
    match name {
        "zero" => Ok(BiasMode::Zero),
        "symmetric" => Ok(BiasMode::Symmetric),
        other => Err(Error::Unsupported(format!("unknown bias mode `{other}`"))),
    }
}

fn safe_region(args: SafeRegionArgs) -> Result<()> {
    let seed = resolved_seed(args.seed);
    let ps = if args.p.is_empty() {
        vec![0.01, 0.1]
    } else {
        args.p.clone()
    };
    let cfg = format!(
        "{{\"cmd\":\"safe-region\",\"p\":{ps:?},\"max_width\":{}}}",
        args.max_width
    );
    let hash = config_hash(&cfg);
    let mut rows = Vec::new();
    let mut curves: Vec<(f64, Vec<(f64, f64)>)> = ps.iter().map(|&p| (p, Vec::new())).collect();
    for width in 1..=args.max_width {
        for (p, curve) in ps.iter().zip(curves.iter_mut()) {
            let depth = max_safe_depth(width, *p)?;
            rows.push(vec![width.to_string(), format!("{p}"), depth.to_string()]);
            curve.1.push((width as f64, depth as f64));
        }
    }
    let text = csv_artifact(seed, &hash, &["width", "p", "max_depth"], &rows);
    write_atomic(&args.out, text.as_bytes())?;
    println!("wrote {} ({} rows)", args.out.display(), rows.len());
    if let Some(svg_path) = args.svg {
        let mut plot = Plot::new("safe operating region", "width", "max safe depth");
        for (p, pts) in curves {
            plot.line(&format!("p = {p}"), pts);
        }
        let mut svg = artifact_header(seed, &hash);
        svg.push_str(&plot.render());
        write_atomic(&svg_path, svg.as_bytes())?;
        println!("wrote {}", svg_path.display());
    }
    Ok(())
}

fn parse_activation(name: &str) -> Result<ActivationKind> {
    match name {
        "relu" => Ok(ActivationKind::Relu),
        "selu" => Ok(ActivationKind::Selu),
        "identity" => Ok(ActivationKind::Identity),
        other => Err(Error::Unsupported(format!("unknown activation `{other}`"))),
    }
}

fn lengthmap(args: LengthmapArgs) -> Result<()> {
    let seed = resolved_seed(args.seed);
    let activation = parse_activation(&args.activation)?;
    let params = LengthMapParams {
        sigma_w_sq: args.sigma_w_sq,
        sigma_b_sq: args.sigma_b_sq,
        q0: args.q0,
        depth: args.depth,
        activation,
    };
    let (trajectory, quad_note) = if args.general || activation != ActivationKind::Relu {
        let (t, info) = length_map_general(&params)?;
        let note = if info.converged {
            format!("quadrature converged (doubling delta {:.3e})", info.max_doubling_delta)
        } else {
            format!(
                "quadrature NOT converged (doubling delta {:.3e})",
                info.max_doubling_delta
            )
        };
        (t, Some(note))
    } else {
        (length_map_relu(&params)?, None)
    };
    let first = trajectory.0.first().copied().unwrap_or(f64::NAN);
    let last = trajectory.0.last().copied().unwrap_or(f64::NAN);
    println!(
        "lengthmap {} depth={}: q1={first} qL={last}{}",
        activation.name(),
        args.depth,
        quad_note.map(|n| format!(" [{n}]")).unwrap_or_default()
    );
    if let Some(path) = args.out {
        let cfg = serde_json::to_string(&params)?;
        let rows: Vec<Vec<String>> = trajectory
            .0
            .iter()
            .enumerate()
            .map(|(i, q)| vec![(i + 1).to_string(), format!("{q}")])
            .collect();
        let text = csv_artifact(seed, &config_hash(&cfg), &["layer", "q"], &rows);
        write_atomic(&path, text.as_bytes())?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// Builds the chain architecture used by the training experiments:
/// `depth` total layers, hidden width `width`, affine output layer.
pub fn train_architecture(width: usize, depth: usize, target: TargetId) -> Result<Architecture> {
    if depth == 0 {
        return Err(Error::arg("depth must be >= 1"));
    }
    let mut widths = vec![width; depth - 1];
    widths.push(target.d_out());
    Architecture::new(target.d_in(), widths, false, false)
}

fn run_train(args: TrainArgs) -> Result<()> {
    let seed = resolved_seed(args.seed);
    let target = TargetId::parse(&args.target)?;
    let arch = train_architecture(args.width, args.depth, target)?;
    let spec = InitializerSpec {
        scheme: parse_scheme(&args.init)?,
        bias_mode: parse_bias_mode(&args.bias_mode)?,
        seed: crate::rng::split(seed, 0x1717),
    };
    let config = TrainConfig {
        optimizer: OptimizerKind::parse(&args.opt)?,
        lr: args.lr,
        steps: args.steps,
        batch_size: args.batch,
        loss: LossKind::parse(&args.loss)?,
        normalization: Normalization::parse(&args.norm)?,
        seed,
    };
    let report = train(&arch, &spec, target, &config)?;
    println!(
        "train {} depth={} width={} norm={}: final_loss={:.6} kind={:?} diverged={}",
        target.name(),
        args.depth,
        args.width,
        args.norm,
        report.final_loss,
        report.collapse.kind,
        report.diverged
    );
    if let Some(path) = args.report {
        let text = serde_json::to_string_pretty(&report)?;
        write_atomic(&path, text.as_bytes())?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

#[derive(Serialize)]
struct ClassifyRecord<'a> {
    network: &'a Path,
    target: &'a str,
    loss: &'a str,
    tol: f64,
    version: &'a str,
    report: crate::collapse::CollapseReport,
}

fn classify(args: ClassifyArgs) -> Result<()> {
    let target = TargetId::parse(&args.target)?;
    let loss = LossKind::parse(&args.loss)?;
    let text = std::fs::read_to_string(&args.network)?;
    let net = NetworkDocument::from_json(&text)?.to_network()?;
    let grid = Grid::default_for(target.d_in());
    let tol = match args.tol {
        Some(t) => t,
        None => default_tolerance(target, &grid),
    };
    let report = classify_state(&net, target, &grid, loss, tol)?;
    println!(
        "classify {} vs {}: kind={:?} zero_layer={:?} constant={:?}",
        args.network.display(),
        target.name(),
        report.kind,
        report.zero_layer,
        report.constant_value
    );
    if let Some(path) = args.report {
        let record = ClassifyRecord {
            network: &args.network,
            target: target.name(),
            loss: loss.name(),
            tol,
            version: TOOL_VERSION,
            report,
        };
        let text = serde_json::to_string_pretty(&record)?;
        write_atomic(&path, text.as_bytes())?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// Rendering options for the figure scripts.
#[derive(Debug, Clone, Copy)]
pub struct FigureOptions {
    /// Monte Carlo samples per cell.
    pub samples: u64,
    /// Render probability curves on a log10 y axis where applicable.
    pub log_y: bool,
}

impl Default for FigureOptions {
    fn default() -> Self {
        FigureOptions {
            samples: 10_000,
            log_y: false,
        }
    }
}

/// Regenerates one of the figure-style artifact sets at desk scale.
pub fn figure_scripts(fig_id: &str, out_dir: &Path, samples: u64, seed: u64) -> Result<Vec<PathBuf>> {
    figure_scripts_with(
        fig_id,
        out_dir,
        &FigureOptions {
            samples,
            ..FigureOptions::default()
        },
        seed,
    )
}

/// [`figure_scripts`] with full rendering options.
pub fn figure_scripts_with(
    fig_id: &str,
    out_dir: &Path,
    options: &FigureOptions,
    seed: u64,
) -> Result<Vec<PathBuf>> {
    match fig_id {
        "fig5a_curves" => fig_probability_curves(out_dir, options, seed),
        "fig5b_safe_region" => fig_safe_region(out_dir, seed),
        "fig6_orthogonal" => fig_orthogonal(out_dir, options.samples, seed),
        "collapse_gallery" => collapse_gallery(out_dir, seed),
        other => Err(Error::Unsupported(format!(
            "unknown figure id `{other}` (expected fig5a_curves, fig5b_safe_region, fig6_orthogonal, collapse_gallery)"
        ))),
    }
}

/// Monte Carlo dots against the exact width-2 chain and the closed-form
/// bound, widths 2..10 over depths 1..30.
fn fig_probability_curves(out_dir: &Path, options: &FigureOptions, seed: u64) -> Result<Vec<PathBuf>> {
    let samples = options.samples;
    let widths: Vec<usize> = (2..=10).collect();
    let depths: Vec<usize> = (1..=30).collect();
    let cfg = format!(
        "{{\"fig\":\"fig5a_curves\",\"samples\":{samples},\"widths\":{widths:?},\"depths\":{depths:?},\"log_y\":{}}}",
        options.log_y
    );
    let hash = config_hash(&cfg);
    let cells = sweep(&widths, &depths, &[Scheme::HeNormal], samples, seed)?;
    let mut rows = Vec::new();
    for cell in &cells {
        let bound = collapse_probability_bound(&vec![cell.width; cell.depth], true, false);
        let chain = if cell.width == 2 {
            exact_constant_probability(cell.depth, true)?
                .to_f64()
                .map(|v| format!("{v}"))
                .unwrap_or_default()
        } else {
            String::new()
        };
        rows.push(vec![
            cell.width.to_string(),
            cell.depth.to_string(),
            cell.estimate.n.to_string(),
            format!("{}", cell.estimate.p_hat),
            format!("{}", cell.estimate.ci_low),
            format!("{}", cell.estimate.ci_high),
            format!("{bound}"),
            chain,
            cell.estimate.seed.to_string(),
        ]);
    }
    let csv_path = out_dir.join("fig5a_curves.csv");
    let text = csv_artifact(
        seed,
        &hash,
        &["width", "depth", "n", "p_hat", "ci_low", "ci_high", "bound", "chain", "seed"],
        &rows,
    );
    write_atomic(&csv_path, text.as_bytes())?;

    let y_axis = |p: f64| -> Option<f64> {
        if options.log_y {
            (p > 0.0).then(|| p.log10())
        } else {
            Some(p)
        }
    };
    let y_label = if options.log_y { "log10 probability" } else { "probability" };
    let mut plot = Plot::new("zero-function probability vs depth", "layers", y_label);
    let chain: Vec<(f64, f64)> = depths
        .iter()
        .filter_map(|&d| {
            let p = exact_constant_probability(d, true)
                .unwrap()
                .to_f64()
                .unwrap();
            y_axis(p).map(|y| (d as f64, y))
        })
        .collect();
    plot.line("chain width 2", chain);
    for &w in &[2usize, 3, 5, 10] {
        let bound: Vec<(f64, f64)> = depths
            .iter()
            .filter_map(|&d| {
                y_axis(collapse_probability_bound(&vec![w; d], true, false)).map(|y| (d as f64, y))
            })
            .collect();
        plot.line(&format!("bound width {w}"), bound);
        let dots: Vec<(f64, f64)> = cells
            .iter()
            .filter(|c| c.width == w)
            .filter_map(|c| y_axis(c.estimate.p_hat).map(|y| (c.depth as f64, y)))
            .collect();
        plot.scatter(&format!("mc width {w}"), dots);
    }
    let svg_path = out_dir.join("fig5a_curves.svg");
    let mut svg = artifact_header(seed, &hash);
    svg.push_str(&plot.render());
    write_atomic(&svg_path, svg.as_bytes())?;
    Ok(vec![csv_path, svg_path])
}

fn fig_safe_region(out_dir: &Path, seed: u64) -> Result<Vec<PathBuf>> {
    let args = SafeRegionArgs {
        p: vec![0.01, 0.1],
        max_width: 64,
        out: out_dir.join("fig5b_safe_region.csv"),
        svg: Some(out_dir.join("fig5b_safe_region.svg")),
        seed: Some(seed),
    };
    let csv = args.out.clone();
    let svg = args.svg.clone().unwrap();
    safe_region(args)?;
    Ok(vec![csv, svg])
}

/// Orthogonal vs symmetric initialization at matched cells.
fn fig_orthogonal(out_dir: &Path, samples: u64, seed: u64) -> Result<Vec<PathBuf>> {
    let widths: Vec<usize> = (2..=5).collect();
    let depths: Vec<usize> = vec![2, 4, 6, 8, 10, 12, 14];
    let cfg = format!("{{\"fig\":\"fig6_orthogonal\",\"samples\":{samples}}}");
    let hash = config_hash(&cfg);
    let cells = sweep(
        &widths,
        &depths,
        &[Scheme::HeNormal, Scheme::Orthogonal],
        samples,
        seed,
    )?;
    let rows: Vec<Vec<String>> = cells
        .iter()
        .map(|c| mc_row(c.width, c.depth, &c.scheme, &c.estimate))
        .collect();
    let csv_path = out_dir.join("fig6_orthogonal.csv");
    let text = csv_artifact(seed, &hash, &MC_COLUMNS, &rows);
    write_atomic(&csv_path, text.as_bytes())?;

    let mut plot = Plot::new("orthogonal vs symmetric initialization", "layers", "probability");
    for &w in &widths {
        for scheme in ["he_normal", "orthogonal"] {
            let pts: Vec<(f64, f64)> = cells
                .iter()
                .filter(|c| c.width == w && c.scheme == scheme)
                .map(|c| (c.depth as f64, c.estimate.p_hat))
                .collect();
            if scheme == "he_normal" {
                plot.line(&format!("sym w{w}"), pts);
            } else {
                plot.scatter(&format!("orth w{w}"), pts);
            }
        }
    }
    let svg_path = out_dir.join("fig6_orthogonal.svg");
    let mut svg = artifact_header(seed, &hash);
    svg.push_str(&plot.render());
    write_atomic(&svg_path, svg.as_bytes())?;
    Ok(vec![csv_path, svg_path])
}

/// Trains the default protocol once per target and emits overlay data.
fn collapse_gallery(out_dir: &Path, seed: u64) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for target in TargetId::ALL {
        let width = if target == TargetId::Abs2d { 4 } else { 2 };
        let arch = train_architecture(width, 10, target)?;
        let spec = InitializerSpec {
            scheme: Scheme::HeNormal,
            bias_mode: BiasMode::Zero,
            seed: crate::rng::split2(seed, 0x9a11, target.d_in() as u64 + target.d_out() as u64 * 7),
        };
        let config = TrainConfig {
            seed: crate::rng::split(seed, 0x9a12),
            ..TrainConfig::default()
        };
        let report = train(&arch, &spec, target, &config)?;
        let cfg = serde_json::to_string(&config)?;
        let hash = config_hash(&cfg);

        let report_path = out_dir.join(format!("gallery_{}.json", target.name()));
        write_atomic(&report_path, serde_json::to_string_pretty(&report)?.as_bytes())?;
        written.push(report_path);

        let net = report.network.to_network()?;
        let csv_path = out_dir.join(format!("gallery_{}.csv", target.name()));
        let svg_path = out_dir.join(format!("gallery_{}.svg", target.name()));
        if target.d_in() == 1 {
            let grid = Grid::uniform(1, 512);
            let mut rows = Vec::new();
            let mut target_curve = Vec::new();
            let mut net_curve = Vec::new();
            for i in 0..grid.len() {
                let x = grid.point(i)[0];
                let y = crate::targets::evaluate(target, &[x])?.value[0];
                let n = net.output(&[x])?[0];
                rows.push(vec![format!("{x}"), format!("{y}"), format!("{n}")]);
                target_curve.push((x, y));
                net_curve.push((x, n));
            }
            let text = csv_artifact(seed, &hash, &["x", "y", "n"], &rows);
            write_atomic(&csv_path, text.as_bytes())?;
            let mut plot = Plot::new(
                &format!("trained network vs target ({})", target.name()),
                "x",
                "value",
            );
            plot.line("target", target_curve);
            plot.line("network", net_curve);
            let mut svg = artifact_header(seed, &hash);
            svg.push_str(&plot.render());
            write_atomic(&svg_path, svg.as_bytes())?;
        } else {
            // 2-D target: raster CSV plus an SVG slice along x2 = 0.7.
            let grid = Grid::uniform(2, 64);
            let mut rows = Vec::new();
            for i in 0..grid.len() {
                let p = grid.point(i);
                let y = crate::targets::evaluate(target, p)?.value;
                let n = net.output(p)?;
                rows.push(vec![
                    format!("{}", p[0]),
                    format!("{}", p[1]),
                    format!("{}", y[0]),
                    format!("{}", y[1]),
                    format!("{}", n[0]),
                    format!("{}", n[1]),
                ]);
            }
            let text = csv_artifact(seed, &hash, &["x1", "x2", "y1", "y2", "n1", "n2"], &rows);
            write_atomic(&csv_path, text.as_bytes())?;
            let slice = Grid::uniform(1, 512);
            let mut t1 = Vec::new();
            let mut n1 = Vec::new();
            for i in 0..slice.len() {
                let x = slice.point(i)[0];
                let p = [x, 0.7];
                t1.push((x, crate::targets::evaluate(target, &p)?.value[0]));
                n1.push((x, net.output(&p)?[0]));
            }
            let mut plot = Plot::new("abs2d component 1 along x2 = 0.7", "x1", "value");
            plot.line("target", t1);
            plot.line("network", n1);
            let mut svg = artifact_header(seed, &hash);
            svg.push_str(&plot.render());
            write_atomic(&svg_path, svg.as_bytes())?;
        }
        written.push(csv_path);
        written.push(svg_path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn widths_parsing() {
        assert_eq!(parse_widths("3x10").unwrap(), vec![3; 10]);
        assert_eq!(parse_widths("4,3,2").unwrap(), vec![4, 3, 2]);
        assert_eq!(parse_widths("7").unwrap(), vec![7]);
        assert!(parse_widths("0x5").is_err());
        assert!(parse_widths("a,b").is_err());
    }

    #[test]
    fn train_architecture_shape() {
        let a = train_architecture(2, 10, TargetId::Abs1d).unwrap();
        assert_eq!(a.widths.len(), 10);
        assert_eq!(a.widths[..9], vec![2; 9][..]);
        assert_eq!(a.d_out(), 1);
        assert!(!a.last_layer_relu);
        let b = train_architecture(4, 10, TargetId::Abs2d).unwrap();
        assert_eq!(b.d_in, 2);
        assert_eq!(b.d_out(), 2);
    }

    #[test]
    fn scheme_parsing() {
        assert_eq!(parse_scheme("he_normal").unwrap(), Scheme::HeNormal);
        assert!(matches!(
            parse_scheme("symmetric_normal:2.0,0.5").unwrap(),
            Scheme::SymmetricNormal { .. }
        ));
        assert!(parse_scheme("bogus").is_err());
    }

    #[test]
    fn bad_subcommand_exits_2() {
        assert_eq!(run_command(["collapselab", "bogus"]), 2);
    }

    #[test]
    fn prob_exact_runs() {
        assert_eq!(run_command(["collapselab", "prob", "exact", "--depth", "2"]), 0);
    }
}
