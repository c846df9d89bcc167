use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use posterkit::config::{Stage, StageConfig};
use posterkit::manifest::{read_jsonl, MANIFEST_FILE};
use posterkit::stages::LossResult;
use posterkit::vlm::Mode;

#[derive(Parser)]
#[command(name = "posterkit", version, about = "Poster dataset construction and evaluation stages")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic text-rendering samples.
    Forge(StageArgs),
    /// Deduplicate, score-filter and annotate posters with weight maps.
    Curate(StageArgs),
    /// Build preference pairs from scored candidate sets.
    Pairs(StageArgs),
    /// Build reflection pairs from six-image sets.
    Reflect(StageArgs),
    /// Score OCR output against ground truth.
    OcrEval(StageArgs),
    /// Evaluate loss kernels on stored tensors and print the values.
    Losscheck(StageArgs),
}

#[derive(Args)]
struct StageArgs {
    /// Stage configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Master seed; overrides `master_seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; overrides `workers` in the config.
    #[arg(long)]
    workers: Option<usize>,
    /// Answer model requests only from captured responses in this directory.
    #[arg(long, conflicts_with = "live")]
    replay_dir: Option<PathBuf>,
    /// Send cache misses to the endpoint named by POSTERKIT_VLM_ENDPOINT.
    #[arg(long)]
    live: bool,
}

fn run(stage: Stage, args: StageArgs) -> Result<()> {
    let mut config = StageConfig::load_for(&args.config, stage)?;
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    if let Some(w) = args.workers {
        config.workers = w;
    }
    if let Some(dir) = args.replay_dir {
        config.vlm.mode = Mode::Replay;
        config.vlm.cache_dir = Some(dir);
    }
    if args.live {
        config.vlm.mode = Mode::Live;
    }
    let report = posterkit::run_stage(&config)?;
    if stage == Stage::Losscheck {
        for r in read_jsonl::<LossResult>(&config.output.join(MANIFEST_FILE))? {
            println!("{}\t{}\t{:.17e}", r.id, r.kind, r.loss);
        }
    }
    eprintln!("{}", report.summary());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (stage, args) = match cli.command {
        Command::Forge(a) => (Stage::Forge, a),
        Command::Curate(a) => (Stage::Curate, a),
        Command::Pairs(a) => (Stage::Pairs, a),
        Command::Reflect(a) => (Stage::Reflect, a),
        Command::OcrEval(a) => (Stage::OcrEval, a),
        Command::Losscheck(a) => (Stage::Losscheck, a),
    };
    match run(stage, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
