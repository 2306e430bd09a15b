//! `ptlp` command-line driver.
//!
//! Exit codes: 0 on success, 1 for usage or data errors, 2 when a distance
//! method rejects its inputs.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use ptlp::harness::grid::{DEFAULT_BETA_GRID, DEFAULT_FOLDS};
use ptlp::harness::synth::{gen_separability_data_on_grid, DEFAULT_GRID_LEN};
use ptlp::harness::{
    cross_matrix, grid_search, knn_1, load_ucr_tsv, pairwise_matrix, write_ucr_tsv, DistanceConfig,
    Method,
};
use ptlp::sliced::DEFAULT_SLICES;
use ptlp::{Beta, Error, GroundCostParams};

#[derive(Debug, Parser)]
#[command(
    name = "ptlp",
    version,
    about = "Partial-transport Lp distances for signals"
)]
struct Cli {
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Pairwise distance matrix of a dataset, as CSV plus a JSON sidecar.
    Dist(DistArgs),
    /// 1NN classification of a test set against a training set.
    Knn(KnnArgs),
    /// Synthetic two-class bump signals in the UCR text format.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct MethodArgs {
    /// lp, dtw, ot, tlp, stlp, ptlp, sptlp, ptlp_beta0 or ptlp_betainf.
    #[arg(long)]
    method: String,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Positive real, `zero` or `inf`.
    #[arg(long, default_value = "1")]
    beta: String,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Number of random projections for sliced methods.
    #[arg(long, default_value_t = DEFAULT_SLICES)]
    slices: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl MethodArgs {
    fn config(&self) -> Result<DistanceConfig, Error> {
        let method: Method = self.method.parse()?;
        let beta: Beta = self.beta.parse()?;
        let params = GroundCostParams::new(self.p, beta, self.lambda)?;
        if method.is_sliced() && self.slices == 0 {
            return Err(Error::InvalidParameter("--slices must be >= 1".into()));
        }
        Ok(DistanceConfig::new(method, params).with_slices(self.slices, self.seed))
    }
}

#[derive(Debug, Args)]
struct DistArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    method: MethodArgs,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct KnnArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[command(flatten)]
    method: MethodArgs,
    /// Select (beta, lambda) by cross-validated 1NN on the training set.
    #[arg(long)]
    grid_search: bool,
    #[arg(long, default_value_t = DEFAULT_FOLDS)]
    folds: usize,
    /// Comma-separated beta candidates.
    #[arg(long, value_delimiter = ',')]
    beta_grid: Option<Vec<f64>>,
    /// Comma-separated lambda candidates (default: 10 values from 0.1 to
    /// the radius of the training signals' graphs).
    #[arg(long, value_delimiter = ',')]
    lambda_grid: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Signals per class.
    #[arg(long)]
    n: usize,
    #[arg(long)]
    noisy: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_GRID_LEN)]
    grid_len: usize,
    #[arg(long)]
    output: PathBuf,
}

fn cmd_dist(args: &DistArgs) -> Result<(), Error> {
    let config = args.method.config()?;
    let dataset = load_ucr_tsv(&args.input)?;
    let matrix = pairwise_matrix(&dataset, &config)?;
    matrix.write(&args.output)
}

fn cmd_knn(args: &KnnArgs) -> Result<(), Error> {
    if args.folds < 2 {
        return Err(Error::InvalidParameter(format!(
            "--folds must be >= 2, got {}",
            args.folds
        )));
    }
    let mut config = args.method.config()?;
    let train = load_ucr_tsv(&args.train)?;
    let test = load_ucr_tsv(&args.test)?;

    let report = if args.grid_search {
        let betas = args
            .beta_grid
            .clone()
            .unwrap_or_else(|| DEFAULT_BETA_GRID.to_vec());
        let report = grid_search(
            &train,
            &config,
            &betas,
            args.lambda_grid.as_deref(),
            args.folds,
            args.method.seed,
        )?;
        if config.method.uses_beta() {
            config.params = config
                .params
                .with_beta_value(Beta::Finite(report.best_beta))?;
        }
        if config.method.uses_lambda() {
            config.params = config.params.with_lambda(report.best_lambda)?;
        }
        Some(report)
    } else {
        None
    };

    let distances = cross_matrix(&test, &train, &config)?;
    let predicted = knn_1(&distances, train.labels());
    let rows: Vec<_> = predicted
        .iter()
        .zip(test.labels())
        .enumerate()
        .map(|(i, (&p, &t))| {
            json!({
                "index": i,
                "predicted": train.class_name(p),
                "actual": test.class_name(t),
            })
        })
        .collect();
    let hits = predicted
        .iter()
        .zip(test.labels())
        .filter(|(&p, &t)| train.class_name(p) == test.class_name(t))
        .count();
    let out = json!({
        "method": config.method,
        "p": config.params.p(),
        "beta": config.params.beta().to_string(),
        "lambda": config.params.lambda(),
        "predictions": rows,
        "accuracy": hits as f64 / test.len() as f64,
        "grid_search": report,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn cmd_synth(args: &SynthArgs) -> Result<(), Error> {
    let dataset = gen_separability_data_on_grid(args.n, args.noisy, args.seed, args.grid_len)?;
    write_ucr_tsv(&dataset, &args.output)
}

fn run(cli: &Cli) -> Result<(), Error> {
    match &cli.command {
        Command::Dist(a) => cmd_dist(a),
        Command::Knn(a) => cmd_knn(a),
        Command::Synth(a) => cmd_synth(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be >= 1");
            return ExitCode::from(1);
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };

    match pool.install(|| run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_method_precondition() { 2 } else { 1 })
        }
    }
}
