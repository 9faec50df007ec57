use std::path::PathBuf;
use std::process::ExitCode;

use amr_cli::commands::{self, load_cohort, load_json, load_marginals, load_schema, parse_models};
use amr_cli::{service, CliError, RunConfig, SynthConfig, TrainedModelBundle};
use amr_core::correlation::ReportOptions;
use amr_core::data_model::{FoldMode, LabelRule};
use amr_core::model::{ModelConfig, ModelKind};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "amr", version, about = "Antibiotic-resistance prediction pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CohortArgs {
    /// `gpc`, `gnb`, or a schema JSON file.
    #[arg(long)]
    schema: String,
    #[arg(long)]
    cohort: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Feature × family association matrix with permutation p-values.
    Analyze {
        #[command(flatten)]
        cohort: CohortArgs,
        #[arg(long, default_value_t = 2000)]
        permutations: usize,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
    /// Cross-validate every family and model kind, then write the serving bundle.
    Train {
        #[command(flatten)]
        cohort: CohortArgs,
        /// `kfold:K` or `mc:ITERATIONS:FRACTION`.
        #[arg(long, default_value = "mc:10:0.8", value_parser = parse_folds)]
        folds: FoldMode,
        #[arg(long, default_value = "rf,mlp,cnn", value_parser = parse_model_list)]
        models: ModelList,
        /// Model hyper-parameters as JSON; defaults otherwise.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Out-of-bag permutation importance of the bundled forests.
    Importance {
        #[arg(long)]
        bundle: PathBuf,
        /// The cohort the bundle was trained on.
        #[arg(long)]
        cohort: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// Sample a synthetic cohort CSV.
    Synth {
        #[arg(long)]
        schema: String,
        /// `gpc`, `gnb`, or a marginals JSON file.
        #[arg(long)]
        marginals: String,
        /// Label rule JSON; independent labels with p = 0.5 otherwise.
        #[arg(long)]
        rule: Option<PathBuf>,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        /// Output CSV file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve predictions over HTTP.
    Serve {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: String,
    },
}

#[derive(Clone)]
struct ModelList(Vec<ModelKind>);

fn parse_model_list(s: &str) -> Result<ModelList, String> {
    parse_models(s).map(ModelList)
}

fn parse_folds(s: &str) -> Result<FoldMode, String> {
    s.parse().map_err(|e: amr_core::data_model::DataError| e.to_string())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze {
            cohort,
            permutations,
            alpha,
        } => {
            let schema = load_schema(&cohort.schema)?;
            let dataset = load_cohort(&cohort.cohort, &schema)?;
            let options = ReportOptions {
                n_perm: permutations,
                seed: cohort.seed,
                alpha,
            };
            commands::analyze(&dataset, &cohort.out, options)?;
        }
        Command::Train {
            cohort,
            folds,
            models,
            config,
        } => {
            let schema = load_schema(&cohort.schema)?;
            let dataset = load_cohort(&cohort.cohort, &schema)?;
            let config: ModelConfig = match config {
                Some(path) => load_json(&path)?,
                None => ModelConfig::default(),
            };
            let run = RunConfig {
                folds,
                models: models.0,
                config,
                seed: cohort.seed,
            };
            let (report, _) = commands::train(&dataset, &run, &cohort.out)?;
            print!("{}", report.to_csv());
        }
        Command::Importance {
            bundle,
            cohort,
            out,
            seed,
            repeats,
            top,
        } => {
            let b = TrainedModelBundle::load(&bundle)?;
            let dataset = load_cohort(&cohort, &b.schema)?;
            let report = commands::importance(&b, &dataset, &cohort, seed, repeats, top)?;
            report.write(&out)?;
            print!("{}", report.render_text());
        }
        Command::Synth {
            schema,
            marginals,
            rule,
            n,
            seed,
            out,
        } => {
            let rule = match rule {
                Some(path) => load_json(&path)?,
                None => LabelRule::IndependentBernoulli { p: 0.5 },
            };
            commands::synth(&SynthConfig {
                schema: load_schema(&schema)?,
                marginals: load_marginals(&marginals)?,
                rule,
                n,
                seed,
                out,
            })?;
        }
        Command::Serve { bundle, bind } => {
            let b = TrainedModelBundle::load(&bundle)?;
            let runtime = tokio::runtime::Builder::new_multi_thread()
                .enable_all()
                .build()
                .map_err(|source| CliError::Io {
                    path: bundle.clone(),
                    source,
                })?;
            eprintln!("serving {} on http://{bind}", bundle.display());
            runtime
                .block_on(service::serve(b, &bind))
                .map_err(|source| CliError::Io {
                    path: PathBuf::from(bind),
                    source,
                })?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("AMR_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
