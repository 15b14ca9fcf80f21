use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use spoofeval::trialdata::{write_scores, Precision};
use spoofeval::{llr_score, train_em, CmKey, FeatureMatrix, Gmm, TrialRecord};

use crate::config::RunConfig;
use crate::io::{load_features, read_protocol, sibling, write_file};
use crate::ConfigArg;

#[derive(clap::Args)]
pub struct TrainArgs {
    #[arg(long)]
    features_dir: PathBuf,
    /// CM protocol; only trials of `--class` are pooled.
    #[arg(long)]
    protocol: PathBuf,
    #[arg(long, value_parser = ["bonafide", "spoof"])]
    class: String,
    /// Mixture components; overrides `[em] components`.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    /// Overrides `[em] seed`.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    config: ConfigArg,
}

fn load_all(dir: &std::path::Path, records: &[&TrialRecord<CmKey>]) -> Result<Vec<FeatureMatrix<f64>>> {
    let loaded: Vec<Result<_>> = records.par_iter().map(|r| load_features(dir, &r.trial_id)).collect();
    loaded.into_iter().collect()
}

pub fn train(args: TrainArgs) -> Result<ExitCode> {
    let mut cfg = RunConfig::load_or_default(args.config.config.as_deref())?;
    if let Some(k) = args.k {
        cfg.components = k;
    }
    if let Some(seed) = args.seed {
        cfg.em.seed = seed;
    }
    cfg.validate()?;
    let class = if args.class == "bonafide" { CmKey::BonaFide } else { CmKey::Spoof };
    let protocol = read_protocol::<CmKey>(&args.protocol)?;
    let chosen: Vec<&TrialRecord<CmKey>> = protocol.iter().filter(|r| r.key == class).collect();
    if chosen.is_empty() {
        bail!("protocol has no {} trials", args.class);
    }
    let parts = load_all(&args.features_dir, &chosen)?;
    let pool = FeatureMatrix::vstack(&parts).context("pooling features")?;
    drop(parts);
    let outcome = train_em(&pool, cfg.components, &cfg.em)
        .with_context(|| format!("training {}-component {} model", cfg.components, args.class))?;

    let mut trace = String::new();
    for v in &outcome.trace {
        let _ = writeln!(trace, "{v:?}");
    }
    write_file(&args.out, outcome.model.to_bytes())?;
    write_file(&sibling(&args.out, ".trace.txt"), &trace)?;
    write_file(&sibling(&args.out, ".config.txt"), cfg.to_text())?;
    eprintln!(
        "{} frames, {} iterations, final average log-likelihood {:.6}",
        pool.frames(),
        outcome.trace.len() - 1,
        outcome.trace.last().copied().unwrap_or(f64::NAN)
    );
    Ok(ExitCode::SUCCESS)
}

#[derive(clap::Args)]
pub struct ScoreArgs {
    #[arg(long)]
    bona_model: PathBuf,
    #[arg(long)]
    spoof_model: PathBuf,
    #[arg(long)]
    features_dir: PathBuf,
    /// Trials to score, in output order.
    #[arg(long)]
    protocol: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Shortest round-trip decimal instead of six significant digits.
    #[arg(long)]
    full_precision: bool,
}

fn load_model(path: &std::path::Path) -> Result<Gmm<f64>> {
    let file = std::fs::File::open(path).with_context(|| format!("opening model {}", path.display()))?;
    Gmm::read_binary(std::io::BufReader::new(file)).with_context(|| format!("reading model {}", path.display()))
}

pub fn score(args: ScoreArgs) -> Result<ExitCode> {
    let bona = load_model(&args.bona_model)?;
    let spoof = load_model(&args.spoof_model)?;
    if bona.dims() != spoof.dims() {
        bail!("model dimensions differ: {} vs {}", bona.dims(), spoof.dims());
    }
    let protocol = read_protocol::<CmKey>(&args.protocol)?;
    let scores: Vec<Result<f64>> = protocol
        .par_iter()
        .map(|r| {
            let features = load_features(&args.features_dir, &r.trial_id)?;
            llr_score(&bona, &spoof, &features).with_context(|| format!("scoring trial {}", r.trial_id))
        })
        .collect();
    // first failure in protocol order, whatever the scheduling
    let scores: Vec<f64> = scores.into_iter().collect::<Result<_>>()?;
    let precision = if args.full_precision { Precision::Full } else { Precision::Standard };
    let text = write_scores(protocol.iter().map(|r| &r.trial_id).zip(scores), precision);
    write_file(&args.out, text)?;
    Ok(ExitCode::SUCCESS)
}
