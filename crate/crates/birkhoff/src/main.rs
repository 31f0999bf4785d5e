use birkhoff::harness::{
    emit_plot_data, run_experiment, ExperimentConfig, ExperimentKind,
};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Monte Carlo laboratory for uniform doubly stochastic matrices.
#[derive(Parser)]
#[command(name = "birkhoff", version, about)]
struct Cli {
    /// Master seed (overridden by BIRKHOFF_SEED if set; the effective seed
    /// is echoed into the report).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Number of parallel chains.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// JSON experiment config; must agree with the subcommand. Unknown
    /// keys are errors.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for the report, CSV files, and batches.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Matrix side length.
    #[arg(long)]
    n: Option<usize>,

    /// Number of retained samples.
    #[arg(long)]
    samples: Option<usize>,

    /// Override the default burn-in move count.
    #[arg(long)]
    burn_in: Option<u64>,

    /// Override the default spacing move count.
    #[arg(long)]
    spacing: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a batch and persist it in the binary batch format.
    Sample {
        #[command(flatten)]
        common: Common,
        /// One of gibbs, rejection, vertex_mixture, iid_exponential,
        /// dirichlet_rows.
        #[arg(long, default_value = "gibbs")]
        sampler: String,
    },
    /// Rescaled marginal of X_11 against Exp(1) across a list of n.
    Marginal {
        #[command(flatten)]
        common: Common,
        /// Comma-separated side lengths.
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
    },
    /// Independence diagnostics for the leading k x k block.
    Submatrix {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Exceedance fraction of (2 + eps) log(n) / n by the max entry.
    MaxEntry {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Pooled singular values against the quarter-circle law.
    Singular {
        #[command(flatten)]
        common: Common,
    },
    /// Total variation mixing profile of sampled transition matrices.
    Mixing {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        t_max: Option<usize>,
    },
    /// Rescaled product moments against iid Exp(1) targets.
    Moments {
        #[command(flatten)]
        common: Common,
    },
    /// Uniform convex combinations of permutation matrices vs Beta laws.
    VertexMixture {
        #[command(flatten)]
        common: Common,
    },
    /// Transportation polytope volume estimates and asymptotic formulas.
    Volume {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        proposals: Option<u64>,
    },
    /// Gibbs chain vs exact rejection sampler at small n.
    OracleCompare {
        #[command(flatten)]
        common: Common,
    },
    /// Binned density ratio of Gibbs marginals vs Dirichlet rows against
    /// the e^{r/2} bound.
    RadonRatio {
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    fn kind(&self) -> ExperimentKind {
        match self {
            Command::Sample { .. } => ExperimentKind::Sample,
            Command::Marginal { .. } => ExperimentKind::Marginal,
            Command::Submatrix { .. } => ExperimentKind::Submatrix,
            Command::MaxEntry { .. } => ExperimentKind::MaxEntry,
            Command::Singular { .. } => ExperimentKind::Singular,
            Command::Mixing { .. } => ExperimentKind::Mixing,
            Command::Moments { .. } => ExperimentKind::Moments,
            Command::VertexMixture { .. } => ExperimentKind::VertexMixture,
            Command::Volume { .. } => ExperimentKind::Volume,
            Command::OracleCompare { .. } => ExperimentKind::OracleCompare,
            Command::RadonRatio { .. } => ExperimentKind::RadonRatio,
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Sample { common, .. }
            | Command::Marginal { common, .. }
            | Command::Submatrix { common, .. }
            | Command::MaxEntry { common, .. }
            | Command::Singular { common }
            | Command::Mixing { common, .. }
            | Command::Moments { common }
            | Command::VertexMixture { common }
            | Command::Volume { common, .. }
            | Command::OracleCompare { common }
            | Command::RadonRatio { common } => common,
        }
    }
}

fn build_config(cli: &Cli) -> birkhoff::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let cfg = ExperimentConfig::from_json_file(path)?;
            if cfg.experiment != cli.command.kind() {
                return Err(birkhoff::Error::InvalidConfig(format!(
                    "config file is for {:?}, subcommand is {:?}",
                    cfg.experiment,
                    cli.command.kind()
                )));
            }
            cfg
        }
        None => ExperimentConfig::new(cli.command.kind()),
    };

    // precedence: BIRKHOFF_SEED env var, then --seed, then the config file
    match std::env::var("BIRKHOFF_SEED") {
        Ok(v) => {
            cfg.seed = v.parse().map_err(|_| {
                birkhoff::Error::InvalidConfig(format!("BIRKHOFF_SEED = '{v}' is not a u64"))
            })?;
        }
        Err(_) => {
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
        }
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if cli.out.is_some() {
        cfg.out_dir = cli.out.clone();
    }

    let common = cli.command.common();
    if common.n.is_some() {
        cfg.n = common.n;
    }
    if let Some(s) = common.samples {
        cfg.samples = s;
    }
    if common.burn_in.is_some() {
        cfg.burn_in = common.burn_in;
    }
    if common.spacing.is_some() {
        cfg.spacing = common.spacing;
    }
    match &cli.command {
        Command::Sample { sampler, .. } => cfg.sampler = Some(sampler.clone()),
        Command::Marginal { n_list, .. } => {
            if n_list.is_some() {
                cfg.n_list = n_list.clone();
            }
        }
        Command::Submatrix { k, .. } => {
            if k.is_some() {
                cfg.k = *k;
            }
        }
        Command::MaxEntry { epsilon, .. } => {
            if epsilon.is_some() {
                cfg.epsilon = *epsilon;
            }
        }
        Command::Mixing { t_max, .. } => {
            if t_max.is_some() {
                cfg.t_max = *t_max;
            }
        }
        Command::Volume { trials, proposals, .. } => {
            if trials.is_some() {
                cfg.trials = *trials;
            }
            if proposals.is_some() {
                cfg.proposals = *proposals;
            }
        }
        _ => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let report = match run_experiment(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    for v in &report.verdicts {
        println!(
            "{}: {} = {:.6} {} {:.6}",
            if v.pass { "PASS" } else { "FAIL" },
            v.name,
            v.value,
            v.comparison,
            v.threshold
        );
    }
    let out_dir = cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    if let Err(e) = std::fs::create_dir_all(&out_dir) {
        eprintln!("error creating {}: {e}", out_dir.display());
        return ExitCode::FAILURE;
    }
    let report_path = out_dir.join("report.json");
    if let Err(e) = report.write_json(&report_path) {
        eprintln!("error writing report: {e}");
        return ExitCode::FAILURE;
    }
    if let Err(e) = emit_plot_data(&report, &out_dir) {
        eprintln!("error writing plot data: {e}");
        return ExitCode::FAILURE;
    }
    println!("report: {}", report_path.display());
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
