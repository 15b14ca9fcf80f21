#![allow(dead_code)]

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use spoofeval::trialdata::{Condition, EnvId, ScoredTrial};
use spoofeval::{AsvKey, AudioBuffer, CmKey, ScoreSet, TrialId, TrialRecord};

pub const SR: u32 = 16_000;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng, mean: f64, std: f64, n: usize) -> Vec<f64> {
    (0..n).map(|_| mean + std * rng.sample::<f64, _>(StandardNormal)).collect()
}

pub fn sine(freq: f64, n: usize, amp: f64, phase: f64) -> Vec<f64> {
    (0..n).map(|t| amp * (2.0 * PI * freq * t as f64 / f64::from(SR) + phase).sin()).collect()
}

pub fn audio(samples: Vec<f64>) -> AudioBuffer<f64> {
    AudioBuffer::new(samples, SR).unwrap()
}

pub fn noise(rng: &mut ChaCha8Rng, n: usize, std: f64) -> Vec<f64> {
    normal(rng, 0.0, std, n)
}

fn record<K>(i: usize, attack: &str, env: Option<&str>, key: K) -> TrialRecord<K> {
    TrialRecord {
        speaker_id: format!("S{:02}", i % 7),
        trial_id: TrialId::new(format!("T{i:06}")).unwrap(),
        condition: Condition { attack_id: attack.to_owned(), env_id: env.map(|e| EnvId::parse(e).unwrap()) },
        key,
    }
}

/// CM set: bona fide scores, then spoof scores labelled `(attack, env, score)`.
pub fn cm_set(bona: &[f64], spoof: &[(&str, Option<&str>, f64)]) -> ScoreSet<f64, CmKey> {
    let mut records = Vec::new();
    for &s in bona {
        let env = spoof.first().and_then(|x| x.1);
        records.push(ScoredTrial { record: record(records.len(), "-", env, CmKey::BonaFide), score: s });
    }
    for &(attack, env, s) in spoof {
        records.push(ScoredTrial { record: record(records.len(), attack, env, CmKey::Spoof), score: s });
    }
    ScoreSet::from_records(records).unwrap()
}

pub fn cm_plain(bona: &[f64], spoof: &[f64]) -> ScoreSet<f64, CmKey> {
    let tagged: Vec<(&str, Option<&str>, f64)> = spoof.iter().map(|&s| ("A01", None, s)).collect();
    cm_set(bona, &tagged)
}

pub fn asv_set(targets: &[f64], nontargets: &[f64], spoof: &[(&str, Option<&str>, f64)]) -> ScoreSet<f64, AsvKey> {
    let mut records = Vec::new();
    let env = spoof.first().and_then(|x| x.1);
    for &s in targets {
        records.push(ScoredTrial { record: record(records.len(), "-", env, AsvKey::Target), score: s });
    }
    for &s in nontargets {
        records.push(ScoredTrial { record: record(records.len(), "-", env, AsvKey::Nontarget), score: s });
    }
    for &(attack, env, s) in spoof {
        records.push(ScoredTrial { record: record(records.len(), attack, env, AsvKey::Spoof), score: s });
    }
    ScoreSet::from_records(records).unwrap()
}

/// Brute-force reference for the threshold sweep: every candidate threshold
/// is scored by direct counting.
pub mod oracle {
    pub fn candidates(pos: &[f64], neg: &[f64]) -> Vec<f64> {
        let mut all: Vec<f64> = pos.iter().chain(neg).copied().collect();
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        all.dedup();
        let mut out = vec![f64::NEG_INFINITY];
        out.extend(all);
        out.push(f64::INFINITY);
        out
    }

    pub fn rates(pos: &[f64], neg: &[f64], tau: f64) -> (f64, f64) {
        let miss = pos.iter().filter(|&&s| s < tau).count() as f64 / pos.len() as f64;
        let fa = neg.iter().filter(|&&s| s >= tau).count() as f64 / neg.len() as f64;
        (miss, fa)
    }

    /// `(value, threshold)` with ties going to the smallest threshold.
    pub fn min_tdcf(pos: &[f64], neg: &[f64], c0: f64, c1: f64, c2: f64) -> (f64, f64) {
        let den = c0 + c1.min(c2);
        let mut best = (f64::INFINITY, f64::INFINITY);
        for tau in candidates(pos, neg) {
            let (m, f) = rates(pos, neg, tau);
            let v = (c0 + c1 * m + c2 * f) / den;
            if v < best.0 {
                best = (v, tau);
            }
        }
        best
    }

    /// `(eer, threshold)`: first exact crossing, else interpolation between
    /// the straddling candidates.
    pub fn eer(pos: &[f64], neg: &[f64]) -> (f64, f64) {
        let cands = candidates(pos, neg);
        let pts: Vec<(f64, f64, f64)> = cands
            .iter()
            .map(|&t| {
                let (m, f) = rates(pos, neg, t);
                (t, m, f)
            })
            .collect();
        for (i, &(t, m, f)) in pts.iter().enumerate() {
            if m == f {
                return (m, t);
            }
            if m > f {
                let (t0, m0, f0) = pts[i - 1];
                let d0 = m0 - f0;
                let d1 = m - f;
                let a = -d0 / (d1 - d0);
                let thr = if t0.is_infinite() {
                    t
                } else if t.is_infinite() {
                    t0
                } else {
                    t0 + a * (t - t0)
                };
                return (m0 + a * (m - m0), thr);
            }
        }
        unreachable!("miss rate reaches 1 at +inf")
    }
}
