use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use spoofeval::frontends::{Cqcc, Lfcc};
use spoofeval::{AudioBuffer, FeatureMatrix, Frontend, TrialId};

use crate::config::{FrontendKind, RunConfig};
use crate::io::{feature_path, read_text, write_file};
use crate::ConfigArg;

#[derive(clap::Args)]
pub struct Args {
    /// Overrides `[frontend] kind`.
    #[arg(long, value_parser = ["cqcc", "lfcc"])]
    frontend: Option<String>,
    /// One utterance per line: `path` or `id path`. A bare path takes its
    /// file stem as the id.
    #[arg(long)]
    wav_list: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    #[command(flatten)]
    config: ConfigArg,
}

struct Entry {
    line: usize,
    id: String,
    path: PathBuf,
}

fn parse_list(text: &str) -> Result<Vec<Entry>> {
    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let (id, path) = match fields.as_slice() {
            [path] => {
                let stem = Path::new(path).file_stem().and_then(|s| s.to_str());
                let Some(stem) = stem else { bail!("line {}: cannot derive an id from `{path}`", i + 1) };
                (stem.to_owned(), PathBuf::from(path))
            }
            [id, path] => ((*id).to_owned(), PathBuf::from(path)),
            _ => bail!("line {}: expected `path` or `id path`", i + 1),
        };
        TrialId::new(id.as_str()).with_context(|| format!("line {}", i + 1))?;
        if !seen.insert(id.clone()) {
            bail!("line {}: duplicate id `{id}`", i + 1);
        }
        entries.push(Entry { line: i + 1, id, path });
    }
    Ok(entries)
}

fn extract(cfg: &RunConfig, path: &Path) -> Result<FeatureMatrix<f64>> {
    let audio = AudioBuffer::<f64>::open_wav(path)?;
    let frontend = match cfg.frontend {
        FrontendKind::Cqcc => Frontend::Cqcc(Cqcc::new(cfg.cqcc, audio.sample_rate())?),
        FrontendKind::Lfcc => Frontend::Lfcc(Lfcc::new(cfg.lfcc, audio.sample_rate())?),
    };
    Ok(frontend.extract(&audio)?)
}

pub fn run(args: Args) -> Result<ExitCode> {
    let mut cfg = RunConfig::load_or_default(args.config.config.as_deref())?;
    if let Some(kind) = &args.frontend {
        cfg.frontend = FrontendKind::parse(kind)?;
    }
    let entries = parse_list(&read_text(&args.wav_list)?)?;
    if entries.is_empty() {
        bail!("{} lists no files", args.wav_list.display());
    }

    let results: Vec<Result<FeatureMatrix<f64>>> = entries.par_iter().map(|e| extract(&cfg, &e.path)).collect();

    let mut manifest = String::from("id\tframes\tdims\tfile\n");
    let mut errors = String::new();
    let mut written = 0usize;
    for (entry, result) in entries.iter().zip(&results) {
        match result {
            Ok(features) => {
                let id = TrialId::new(entry.id.as_str())?;
                let out = feature_path(&args.out_dir, &id);
                write_file(&out, features.to_bytes())?;
                let name = out.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_owned();
                let _ = writeln!(manifest, "{}\t{}\t{}\t{name}", entry.id, features.frames(), features.dims());
                written += 1;
            }
            Err(e) => {
                let _ = writeln!(errors, "{}\t{}\tline {}: {e:#}", entry.id, entry.path.display(), entry.line);
            }
        }
    }
    write_file(&args.out_dir.join("manifest.tsv"), &manifest)?;
    write_file(&args.out_dir.join("errors.log"), &errors)?;
    write_file(&args.out_dir.join("effective_config.txt"), cfg.to_text())?;

    let failed = entries.len() - written;
    eprintln!("{written} feature file(s) written, {failed} failure(s)");
    if failed > 0 {
        eprint!("{errors}");
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}
