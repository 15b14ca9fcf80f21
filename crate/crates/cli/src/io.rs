use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use spoofeval::trialdata::TrialKey;
use spoofeval::{parse_protocol, parse_scores, FeatureMatrix, TrialId, TrialRecord};

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn read_protocol<K: TrialKey>(path: &Path) -> Result<Vec<TrialRecord<K>>> {
    parse_protocol(&read_text(path)?).with_context(|| format!("parsing protocol {}", path.display()))
}

pub fn read_scores(path: &Path) -> Result<spoofeval::trialdata::ScoreMap<f64>> {
    parse_scores(&read_text(path)?).with_context(|| format!("parsing scores {}", path.display()))
}

/// Writes through a temporary sibling and renames, so readers never see a
/// half-written file.
pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))
}

/// `<path><suffix>`, e.g. `model.gmm` -> `model.gmm.trace.txt`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn feature_path(dir: &Path, id: &TrialId) -> PathBuf {
    dir.join(format!("{id}.fea"))
}

pub fn load_features(dir: &Path, id: &TrialId) -> Result<FeatureMatrix<f64>> {
    let path = feature_path(dir, id);
    let file = fs::File::open(&path).with_context(|| format!("trial {id}: no feature file {}", path.display()))?;
    FeatureMatrix::read_binary(std::io::BufReader::new(file))
        .with_context(|| format!("trial {id}: reading {}", path.display()))
}
