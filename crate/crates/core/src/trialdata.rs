//! Protocol and score files.
//!
//! A protocol line carries five whitespace-separated fields:
//!
//! ```text
//! speaker_id trial_id env_id attack_id key
//! ```
//!
//! `env_id` is `-` for logical access trials and a three-letter code over
//! `{a,b,c}` for physical access trials. `attack_id` is `-` for bona fide
//! trials. A score line is `trial_id score`. Blank lines and lines starting
//! with `#` are skipped; LF and CRLF are both accepted.

use std::collections::HashSet;
use std::fmt;
use std::fmt::Write as _;

use indexmap::IndexMap;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Number of ids listed when reporting join failures.
const REPORTED_IDS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TrialId(String);

impl TrialId {
    pub fn new(value: impl Into<String>) -> Result<Self> {
        let value = value.into();
        if value.is_empty() || value.chars().any(char::is_whitespace) {
            return Err(Error::InvalidArgument(format!("invalid trial id `{value}`")));
        }
        Ok(Self(value))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TrialId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Key vocabulary of the fifth protocol field.
pub trait TrialKey: Copy + Eq + fmt::Debug + Send + Sync + 'static {
    fn parse_token(token: &str) -> Option<Self>;
    fn token(self) -> &'static str;
    fn is_spoof(self) -> bool;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CmKey {
    BonaFide,
    Spoof,
}

impl TrialKey for CmKey {
    fn parse_token(token: &str) -> Option<Self> {
        match token {
            "bonafide" => Some(Self::BonaFide),
            "spoof" => Some(Self::Spoof),
            _ => None,
        }
    }

    fn token(self) -> &'static str {
        match self {
            Self::BonaFide => "bonafide",
            Self::Spoof => "spoof",
        }
    }

    fn is_spoof(self) -> bool {
        self == Self::Spoof
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum AsvKey {
    Target,
    Nontarget,
    Spoof,
}

impl TrialKey for AsvKey {
    fn parse_token(token: &str) -> Option<Self> {
        match token {
            "target" => Some(Self::Target),
            "nontarget" => Some(Self::Nontarget),
            "spoof" => Some(Self::Spoof),
            _ => None,
        }
    }

    fn token(self) -> &'static str {
        match self {
            Self::Target => "target",
            Self::Nontarget => "nontarget",
            Self::Spoof => "spoof",
        }
    }

    fn is_spoof(self) -> bool {
        self == Self::Spoof
    }
}

/// Physical access environment id: room size, T60 class, talker-to-ASV
/// distance, each over `{a,b,c}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EnvId([u8; 3]);

impl EnvId {
    pub fn parse(token: &str) -> Option<Self> {
        let bytes = token.as_bytes();
        if bytes.len() != 3 || !bytes.iter().all(|b| (b'a'..=b'c').contains(b)) {
            return None;
        }
        Some(Self([bytes[0], bytes[1], bytes[2]]))
    }

    pub fn char_at(self, pos: usize) -> char {
        self.0[pos] as char
    }

    pub fn as_str(&self) -> &str {
        // only ASCII a..c is ever stored
        std::str::from_utf8(&self.0).expect("ascii env id")
    }
}

impl fmt::Display for EnvId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for EnvId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

pub const BONAFIDE_ATTACK: &str = "-";

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Condition {
    pub attack_id: String,
    pub env_id: Option<EnvId>,
}

impl Condition {
    pub fn is_bonafide(&self) -> bool {
        self.attack_id == BONAFIDE_ATTACK
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialRecord<K> {
    pub speaker_id: String,
    pub trial_id: TrialId,
    pub condition: Condition,
    pub key: K,
}

pub fn parse_protocol<K: TrialKey>(text: &str) -> Result<Vec<TrialRecord<K>>> {
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r').trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let err = |msg: String| Error::Parse { line: line_no, msg };
        if fields.len() != 5 {
            return Err(err(format!("expected 5 fields, found {}", fields.len())));
        }
        let [speaker, trial, env, attack, key] = [fields[0], fields[1], fields[2], fields[3], fields[4]];
        let env_id = match env {
            "-" => None,
            token => Some(EnvId::parse(token).ok_or_else(|| err(format!("malformed env_id `{token}`")))?),
        };
        let key = K::parse_token(key).ok_or_else(|| err(format!("unknown key `{key}`")))?;
        let condition = Condition { attack_id: attack.to_string(), env_id };
        if key.is_spoof() == condition.is_bonafide() {
            return Err(err(format!("attack_id `{attack}` inconsistent with key `{}`", key.token())));
        }
        if !seen.insert(trial.to_string()) {
            return Err(Error::DuplicateTrial(trial.to_string()));
        }
        records.push(TrialRecord { speaker_id: speaker.to_string(), trial_id: TrialId::new(trial)?, condition, key });
    }
    Ok(records)
}

/// Trial id to score, in file order.
pub type ScoreMap<T> = IndexMap<TrialId, T>;

pub fn parse_scores<T: Real>(text: &str) -> Result<ScoreMap<T>> {
    let mut scores = ScoreMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r').trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::Parse { line: line_no, msg: format!("expected 2 fields, found {}", fields.len()) });
        }
        let value: f64 = fields[1]
            .parse()
            .map_err(|_| Error::Parse { line: line_no, msg: format!("unparseable score `{}`", fields[1]) })?;
        if !value.is_finite() {
            return Err(Error::Parse { line: line_no, msg: format!("non-finite score `{}`", fields[1]) });
        }
        let id = TrialId::new(fields[0])?;
        if scores.contains_key(&id) {
            return Err(Error::DuplicateTrial(fields[0].to_string()));
        }
        scores.insert(id, T::lit(value));
    }
    Ok(scores)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredTrial<T, K> {
    pub record: TrialRecord<K>,
    pub score: T,
}

/// Protocol records joined with detector scores, in protocol order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreSet<T, K> {
    records: Vec<ScoredTrial<T, K>>,
}

impl<T: Real, K: TrialKey> ScoreSet<T, K> {
    pub fn from_records(records: Vec<ScoredTrial<T, K>>) -> Result<Self> {
        if let Some(bad) = records.iter().find(|r| !r.score.is_finite()) {
            return Err(Error::NonFinite(format!("score of trial {}", bad.record.trial_id)));
        }
        Ok(Self { records })
    }

    pub fn records(&self) -> &[ScoredTrial<T, K>] {
        &self.records
    }

    pub fn iter(&self) -> impl Iterator<Item = &ScoredTrial<T, K>> {
        self.records.iter()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Scores of every trial whose key matches.
    pub fn scores_with_key(&self, key: K) -> Vec<T> {
        self.records.iter().filter(|r| r.record.key == key).map(|r| r.score).collect()
    }

    /// Subset keeping protocol order.
    pub fn filter(&self, mut keep: impl FnMut(&ScoredTrial<T, K>) -> bool) -> Self {
        Self { records: self.records.iter().filter(|r| keep(r)).cloned().collect() }
    }

    pub fn protocol(&self) -> Vec<TrialRecord<K>> {
        self.records.iter().map(|r| r.record.clone()).collect()
    }
}

impl<T: Real> ScoreSet<T, CmKey> {
    /// `(bona fide, spoof)` scores.
    pub fn cm_split(&self) -> (Vec<T>, Vec<T>) {
        (self.scores_with_key(CmKey::BonaFide), self.scores_with_key(CmKey::Spoof))
    }
}

pub fn join<T: Real, K: TrialKey>(protocol: &[TrialRecord<K>], scores: &ScoreMap<T>) -> Result<ScoreSet<T, K>> {
    let protocol_ids: HashSet<&TrialId> = protocol.iter().map(|r| &r.trial_id).collect();
    if !protocol.iter().any(|r| scores.contains_key(&r.trial_id)) {
        return Err(Error::EmptyIntersection);
    }
    let missing: Vec<&TrialId> = protocol.iter().map(|r| &r.trial_id).filter(|id| !scores.contains_key(*id)).collect();
    if !missing.is_empty() {
        return Err(Error::MissingScores {
            count: missing.len(),
            first: missing.iter().take(REPORTED_IDS).map(|id| id.to_string()).collect(),
        });
    }
    let unmatched: Vec<&TrialId> = scores.keys().filter(|id| !protocol_ids.contains(id)).collect();
    if !unmatched.is_empty() {
        return Err(Error::UnmatchedScores {
            count: unmatched.len(),
            first: unmatched.iter().take(REPORTED_IDS).map(|id| id.to_string()).collect(),
        });
    }
    let records =
        protocol.iter().map(|record| ScoredTrial { record: record.clone(), score: scores[&record.trial_id] }).collect();
    ScoreSet::from_records(records)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Precision {
    /// Six significant digits.
    #[default]
    Standard,
    /// Shortest representation that parses back to the same value.
    Full,
}

/// Six significant digits, positional notation for moderate exponents.
pub fn format_significant(value: f64, digits: usize) -> String {
    if value == 0.0 || !value.is_finite() {
        return format!("{value:.prec$}", prec = digits.saturating_sub(1));
    }
    let exp = value.abs().log10().floor() as i32;
    if (-5..digits as i32).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        format!("{value:.decimals$}")
    } else {
        format!("{value:.prec$e}", prec = digits - 1)
    }
}

pub fn format_score(value: f64, precision: Precision) -> String {
    match precision {
        Precision::Standard => format_significant(value, 6),
        Precision::Full => format!("{value:?}"),
    }
}

pub fn write_protocol<K: TrialKey>(records: &[TrialRecord<K>]) -> String {
    let mut out = String::new();
    for r in records {
        let env = r.condition.env_id.map(|e| e.to_string()).unwrap_or_else(|| "-".into());
        let _ = writeln!(out, "{} {} {} {} {}", r.speaker_id, r.trial_id, env, r.condition.attack_id, r.key.token());
    }
    out
}

pub fn write_scores<'a, T: Real + 'a>(
    scores: impl IntoIterator<Item = (&'a TrialId, T)>,
    precision: Precision,
) -> String {
    let mut out = String::new();
    for (id, score) in scores {
        let _ = writeln!(out, "{} {}", id, format_score(score.as_f64(), precision));
    }
    out
}

impl<T: Real, K: TrialKey> ScoreSet<T, K> {
    pub fn write_scores(&self, precision: Precision) -> String {
        write_scores(self.records.iter().map(|r| (&r.record.trial_id, r.score)), precision)
    }
}
