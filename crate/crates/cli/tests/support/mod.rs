#![allow(dead_code)]

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use spoofeval::trialdata::{write_protocol, Condition, ScoredTrial, TrialKey};
use spoofeval::{AudioBuffer, CmKey, ScoreSet, TrialId, TrialRecord};

pub const SR: u32 = 16_000;

/// Four random partials, 150 Hz to 3.5 kHz, with a faint noise floor.
pub fn multitone(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let partials: Vec<(f64, f64, f64)> = (0..4)
        .map(|_| (rng.random_range(150.0..3500.0), rng.random_range(0.05..0.2), rng.random_range(0.0..2.0 * PI)))
        .collect();
    (0..n)
        .map(|t| {
            let time = t as f64 / f64::from(SR);
            let tone: f64 = partials.iter().map(|&(f, a, p)| a * (2.0 * PI * f * time + p).sin()).sum();
            tone + 0.003 * rng.sample::<f64, _>(StandardNormal)
        })
        .collect()
}

/// Memoryless cubic nonlinearity, rescaled back to the input RMS.
pub fn cubic_distort(x: &[f64]) -> Vec<f64> {
    let y: Vec<f64> = x.iter().map(|&v| v + 3.0 * v * v * v).collect();
    let rms = |s: &[f64]| (s.iter().map(|v| v * v).sum::<f64>() / s.len() as f64).sqrt();
    let g = rms(x) / rms(&y);
    y.iter().map(|v| v * g).collect()
}

pub fn write_wav(path: &Path, samples: Vec<f64>) {
    let audio = AudioBuffer::new(samples, SR).unwrap();
    audio.write_wav(fs::File::create(path).unwrap()).unwrap();
}

pub fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_spoofeval"))
}

pub fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("spawn spoofeval")
}

pub fn run_ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(out.status.success(), "spoofeval {args:?} failed:\n{}", String::from_utf8_lossy(&out.stderr));
    out
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Writes a score set as a protocol file and a score file.
pub fn write_set<K: TrialKey>(set: &ScoreSet<f64, K>, protocol: &Path, scores: &Path) {
    fs::write(protocol, write_protocol(&set.protocol())).unwrap();
    fs::write(scores, set.write_scores(spoofeval::trialdata::Precision::Full)).unwrap();
}

pub fn cm_record(id: &str, key: CmKey) -> TrialRecord<CmKey> {
    let attack = if key == CmKey::Spoof { "A01" } else { "-" };
    TrialRecord {
        speaker_id: "S1".into(),
        trial_id: TrialId::new(id).unwrap(),
        condition: Condition { attack_id: attack.into(), env_id: None },
        key,
    }
}

/// Every regular file under `dir`, sorted, with its bytes.
pub fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

pub fn scored(record: TrialRecord<CmKey>, score: f64) -> ScoredTrial<f64, CmKey> {
    ScoredTrial { record, score }
}
