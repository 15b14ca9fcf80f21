use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use spoofeval::fusion::sweep_csv;
use spoofeval::metrics::asv_operating_point;
use spoofeval::trialdata::{write_scores, Precision};
use spoofeval::{
    average_fuse, join, normalize_by_bonafide_std, oracle_sweep, tdcf_coefficients, train_lr, AsvKey, CmKey,
    FusionModel, ScoreMatrix,
};

use crate::config::RunConfig;
use crate::io::{read_protocol, read_scores, read_text, sibling, write_file};
use crate::ConfigArg;

#[derive(clap::Subcommand)]
pub enum FuseCommand {
    /// Fit logistic-regression fusion weights.
    Train(TrainArgs),
    /// Apply a trained fusion model to a score matrix.
    Apply(ApplyArgs),
    /// Unweighted mean of the systems.
    Average(AverageArgs),
}

#[derive(clap::Args)]
pub struct TrainArgs {
    /// Whitespace table: header `trial_id sys1 sys2 ...`, one trial per row.
    #[arg(long)]
    matrix: PathBuf,
    /// CM protocol supplying the bona fide / spoof labels.
    #[arg(long)]
    labels: PathBuf,
    /// Overrides `[fusion] prior`.
    #[arg(long)]
    prior: Option<f64>,
    /// Overrides `[fusion] l2`.
    #[arg(long)]
    l2: Option<f64>,
    #[arg(long)]
    out_model: PathBuf,
    #[command(flatten)]
    config: ConfigArg,
}

#[derive(clap::Args)]
pub struct ApplyArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    full_precision: bool,
}

#[derive(clap::Args)]
pub struct AverageArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Scale each system by its bona fide standard deviation first.
    #[arg(long, requires = "labels")]
    normalize: bool,
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long)]
    full_precision: bool,
}

#[derive(clap::Args)]
pub struct SweepArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    #[arg(long)]
    asv_scores: PathBuf,
    #[arg(long)]
    asv_protocol: PathBuf,
    /// Largest ensemble size; defaults to every system.
    #[arg(long)]
    k_max: Option<usize>,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArg,
}

fn load_matrix(path: &Path) -> Result<ScoreMatrix<f64>> {
    ScoreMatrix::parse(&read_text(path)?).with_context(|| format!("parsing score matrix {}", path.display()))
}

fn labels_for(matrix: &ScoreMatrix<f64>, protocol: &Path) -> Result<Vec<CmKey>> {
    matrix
        .labels_from(&read_protocol::<CmKey>(protocol)?)
        .with_context(|| format!("matching matrix rows to {}", protocol.display()))
}

fn precision(full: bool) -> Precision {
    if full {
        Precision::Full
    } else {
        Precision::Standard
    }
}

pub fn run(cmd: FuseCommand) -> Result<ExitCode> {
    match cmd {
        FuseCommand::Train(a) => train(a),
        FuseCommand::Apply(a) => apply(a),
        FuseCommand::Average(a) => average(a),
    }
}

fn train(args: TrainArgs) -> Result<ExitCode> {
    let mut cfg = RunConfig::load_or_default(args.config.config.as_deref())?;
    if let Some(p) = args.prior {
        cfg.fusion.prior = p;
    }
    if let Some(l2) = args.l2 {
        cfg.fusion.l2 = l2;
    }
    cfg.validate()?;
    let matrix = load_matrix(&args.matrix)?;
    let labels = labels_for(&matrix, &args.labels)?;
    let model = train_lr(&matrix, &labels, &cfg.fusion)?;
    write_file(&args.out_model, model.to_text())?;
    write_file(&sibling(&args.out_model, ".config.txt"), cfg.to_text())?;
    Ok(ExitCode::SUCCESS)
}

fn apply(args: ApplyArgs) -> Result<ExitCode> {
    let model = FusionModel::<f64>::parse(&read_text(&args.model)?)
        .with_context(|| format!("parsing fusion model {}", args.model.display()))?;
    let matrix = load_matrix(&args.matrix)?;
    let fused = model.apply(&matrix)?;
    write_file(&args.out, write_scores(matrix.trials().iter().zip(fused), precision(args.full_precision)))?;
    Ok(ExitCode::SUCCESS)
}

fn average(args: AverageArgs) -> Result<ExitCode> {
    let mut matrix = load_matrix(&args.matrix)?;
    if args.normalize {
        let labels = labels_for(&matrix, args.labels.as_ref().expect("enforced by clap"))?;
        let mask: Vec<bool> = labels.iter().map(|k| *k == CmKey::BonaFide).collect();
        let columns = (0..matrix.n_systems())
            .map(|j| normalize_by_bonafide_std(&matrix.column(j), &mask))
            .collect::<spoofeval::Result<Vec<_>>>()?;
        matrix = ScoreMatrix::from_columns(matrix.systems().to_vec(), matrix.trials().to_vec(), &columns)?;
    }
    let fused = average_fuse(&matrix);
    write_file(&args.out, write_scores(matrix.trials().iter().zip(fused), precision(args.full_precision)))?;
    Ok(ExitCode::SUCCESS)
}

pub fn sweep(args: SweepArgs) -> Result<ExitCode> {
    let cfg = RunConfig::load_or_default(args.config.config.as_deref())?;
    let matrix = load_matrix(&args.matrix)?;
    let labels = labels_for(&matrix, &args.labels)?;
    let asv = join(&read_protocol::<AsvKey>(&args.asv_protocol)?, &read_scores(&args.asv_scores)?)
        .with_context(|| format!("joining {} with {}", args.asv_scores.display(), args.asv_protocol.display()))?;
    let (_, rates) = asv_operating_point(&asv)?;
    let coeffs = tdcf_coefficients(&rates, &cfg.cost)?;
    let k_max = args.k_max.unwrap_or(matrix.n_systems());
    if k_max == 0 {
        bail!("--k-max must be at least 1");
    }
    let rows = oracle_sweep(&matrix, &labels, &coeffs, k_max, &cfg.fusion)?;
    let csv = sweep_csv(&matrix, &rows);
    match &args.out {
        Some(out) => {
            write_file(out, &csv)?;
            write_file(&sibling(out, ".config.txt"), cfg.to_text())?;
        }
        None => print!("{csv}"),
    }
    Ok(ExitCode::SUCCESS)
}
