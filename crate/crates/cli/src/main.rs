//! Batch front-end: run the sampler, compute the BIC baseline, simulate
//! networks and rebuild summaries from saved draws.

mod artifacts;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use lpcm::io::{format_edge_list, read_network, NetworkFormat};
use lpcm::sampler::run_chains;
use lpcm::synth::{sample_network, GenSpec};
use lpcm::{Hyperparams, RunConfig};

use artifacts::{Artifacts, Metadata};

#[derive(Parser, Debug)]
#[command(name = "lpcm", version, about = "Collapsed latent position cluster model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the sampler and write draws, summaries and counters.
    Run(RunArgs),
    /// Two-stage BIC baseline on a finished run.
    Baseline(BaselineArgs),
    /// Simulate a network from a generator specification (JSON).
    Simulate(SimulateArgs),
    /// Recompute summary.json from a run's draws.
    Summarize(SummarizeArgs),
}

#[derive(Args, Debug)]
struct DataArgs {
    /// Network file.
    #[arg(long)]
    data: PathBuf,
    /// `edgelist` or `adjacency`.
    #[arg(long, default_value = "edgelist")]
    format: NetworkFormat,
    /// Treat ties as directed (overrides any directive in the file).
    #[arg(long)]
    directed: bool,
}

impl DataArgs {
    fn directed(&self) -> Option<bool> {
        self.directed.then_some(true)
    }
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Total sweeps, burn-in included.
    #[arg(long)]
    iters: usize,
    /// Discarded sweeps; defaults to a tenth of --iters.
    #[arg(long)]
    burnin: Option<usize>,
    #[arg(long, default_value_t = 1)]
    thin: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Latent dimension.
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long = "sigma-z2", default_value_t = 1.0)]
    sigma_z2: f64,
    #[arg(long = "sigma-beta2", default_value_t = 1.0)]
    sigma_beta2: f64,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    omega2: Option<f64>,
    #[arg(long)]
    xi: Option<f64>,
    #[arg(long)]
    psi: Option<f64>,
    #[arg(long = "a-eject")]
    a_eject: Option<f64>,
    /// Largest number of components; defaults to n/2.
    #[arg(long)]
    gmax: Option<usize>,
    /// Independent chains with seeds seed, seed+1, ...
    #[arg(long, default_value_t = 1)]
    chains: usize,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct BaselineArgs {
    /// Directory of a finished run.
    #[arg(long)]
    run: PathBuf,
    /// Network file; defaults to the one recorded in the run's metadata.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    format: Option<NetworkFormat>,
    #[arg(long)]
    directed: bool,
    /// Largest G to fit.
    #[arg(long, default_value_t = 5)]
    gcap: usize,
    /// Position estimate the baseline conditions on.
    #[arg(long, value_enum, default_value_t = Estimate::MinKl)]
    estimate: Estimate,
    /// Take the position estimate from draws with this G only.
    #[arg(long = "at-g")]
    at_g: Option<usize>,
    /// Report path; defaults to bic.json in the run directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Estimate {
    /// Positions closest in Kullback-Leibler divergence to the posterior
    /// mean tie probabilities.
    MinKl,
    /// The highest-likelihood draw.
    MaxLik,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Generator specification (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// Output directory for network.edges and truth.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SummarizeArgs {
    /// Directory of a finished run.
    #[arg(long)]
    run: PathBuf,
    /// Summary path; defaults to summary.json in the run directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn hyperparams(args: &RunArgs, n: usize) -> Hyperparams<f64> {
    let mut hp = Hyperparams::defaults_for(n).with_dim(args.d).with_proposals(args.sigma_z2, args.sigma_beta2);
    let set = |slot: &mut f64, v: Option<f64>| {
        if let Some(v) = v {
            *slot = v;
        }
    };
    set(&mut hp.alpha, args.alpha);
    set(&mut hp.delta, args.delta);
    set(&mut hp.nu, args.nu);
    set(&mut hp.omega2, args.omega2);
    set(&mut hp.xi, args.xi);
    set(&mut hp.psi, args.psi);
    set(&mut hp.a_eject, args.a_eject);
    if let Some(g) = args.gmax {
        hp.g_max = g;
    }
    hp
}

fn run(args: RunArgs) -> Result<()> {
    if args.iters == 0 {
        bail!("--iters must be at least 1");
    }
    if args.chains == 0 {
        bail!("--chains must be at least 1");
    }
    let net = read_network(&args.data.data, args.data.format, args.data.directed())?;
    let hp = hyperparams(&args, net.n());
    hp.validate()?;
    let burnin = args.burnin.unwrap_or(args.iters / 10);
    let cfg = RunConfig::new(args.iters, burnin, args.thin, args.seed);
    cfg.validate()?;
    let outputs = run_chains(&net, &hp, &cfg, args.chains)?;
    let meta = Metadata::new(&args.data.data, args.data.format, &net, &hp, &cfg, args.chains, outputs[0].draws.len())?;
    let written = Artifacts::new(&args.out).write_run(&outputs, &meta)?;
    eprintln!("wrote {written} draws to {}", args.out.display());
    Ok(())
}

fn baseline(args: BaselineArgs) -> Result<()> {
    let art = Artifacts::new(&args.run);
    let meta = art.read_metadata()?;
    let data = args.data.clone().unwrap_or_else(|| PathBuf::from(&meta.data.path));
    let format = args.format.unwrap_or(meta.data.format.parse()?);
    let directed = if args.directed { Some(true) } else { Some(meta.data.directed) };
    let net = read_network(&data, format, directed)?;
    let draws = art.read_draws()?;
    let (z_hat, label) = match args.estimate {
        Estimate::MinKl => (lpcm::bic::min_kl_positions(&net, &draws, args.at_g)?.z, "minimum-KL positions over posterior draws"),
        Estimate::MaxLik => (lpcm::bic::point_estimate_positions(&draws, args.at_g)?, "highest-likelihood posterior draw"),
    };
    let mut report = lpcm::bic::bic_baseline(&net, &z_hat, args.gcap)?;
    report.position_estimate = match args.at_g {
        Some(g) => format!("{label}, draws with G = {g}"),
        None => label.to_string(),
    };
    let out = args.out.unwrap_or_else(|| art.path("bic.json"));
    artifacts::write_json(&out, &report)?;
    println!("selected G = {}", report.selected_g);
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.spec).with_context(|| format!("{}: cannot read", args.spec.display()))?;
    let spec: GenSpec = serde_json::from_str(&text).with_context(|| format!("{}: invalid generator spec", args.spec.display()))?;
    let syn = sample_network(&spec)?;
    std::fs::create_dir_all(&args.out).with_context(|| format!("{}: cannot create", args.out.display()))?;
    artifacts::write_text(&args.out.join("network.edges"), &format_edge_list(&syn.network))?;
    let truth = artifacts::Truth {
        spec,
        z: syn.z.rows().map(<[f64]>::to_vec).collect(),
        alloc: syn.alloc.iter().map(|k| k + 1).collect(),
    };
    artifacts::write_json(&args.out.join("truth.json"), &truth)
}

fn summarize(args: SummarizeArgs) -> Result<()> {
    let art = Artifacts::new(&args.run);
    let summary = art.summarize()?;
    let out = args.out.unwrap_or_else(|| art.path("summary.json"));
    artifacts::write_json(&out, &summary)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Baseline(a) => baseline(a),
        Command::Simulate(a) => simulate(a),
        Command::Summarize(a) => summarize(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
