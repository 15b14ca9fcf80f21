//! Pooled and per-condition evaluation, worst-case reporting and box-plot
//! summaries.
//!
//! Per-condition results restrict the spoof trials to one group and keep
//! every bona fide trial. The ASV threshold stays at the global EER point,
//! so only the ASV spoof false alarm rate changes between groups.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::{
    asv_operating_point, asv_rates_at, eer_of, min_tdcf, tdcf_coefficients, AsvErrorRates, CostModel, EerPoint,
    TdcfCoeffs, TdcfResult,
};
use crate::scalar::{total_cmp, Real};
use crate::trialdata::{AsvKey, CmKey, Condition, EnvId, ScoreSet, TrialKey};

/// Position in a three-letter environment id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum EidAxis {
    RoomSize,
    T60,
    TalkerDistance,
}

/// Position in a two-letter replay attack id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum AidAxis {
    AttackerDistance,
    DeviceQuality,
}

impl EidAxis {
    pub const ALL: [EidAxis; 3] = [EidAxis::RoomSize, EidAxis::T60, EidAxis::TalkerDistance];

    pub fn position(self) -> usize {
        self as usize
    }
}

impl AidAxis {
    pub fn position(self) -> usize {
        self as usize
    }
}

pub fn eid_category(env_id: &str, axis: EidAxis) -> Result<char> {
    let env = EnvId::parse(env_id).ok_or_else(|| Error::InvalidArgument(format!("malformed env_id `{env_id}`")))?;
    Ok(env.char_at(axis.position()))
}

/// Character of a replay attack id such as `AC`; both letters in `A..=C`.
pub fn aid_category(attack_id: &str, axis: AidAxis) -> Result<char> {
    let b = attack_id.as_bytes();
    if b.len() != 2 || !b.iter().all(|c| (b'A'..=b'C').contains(c)) {
        return Err(Error::InvalidArgument(format!("malformed replay attack id `{attack_id}`")));
    }
    Ok(b[axis.position()] as char)
}

/// Coarse label derived from a condition or a group key.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Category {
    Eid(EidAxis),
    Aid(AidAxis),
    /// `attack_id -> label`, e.g. known / varied / unknown.
    Map(BTreeMap<String, String>),
}

impl Category {
    fn label_of(&self, attack: &str, env: Option<&str>) -> Result<String> {
        match self {
            Category::Eid(axis) => {
                let env = env.ok_or_else(|| Error::InvalidArgument(format!("trial of `{attack}` has no env_id")))?;
                Ok(eid_category(env, *axis)?.to_string())
            }
            Category::Aid(axis) => Ok(aid_category(attack, *axis)?.to_string()),
            Category::Map(map) => map
                .get(attack)
                .cloned()
                .ok_or_else(|| Error::InvalidArgument(format!("attack `{attack}` missing from category map"))),
        }
    }

    pub fn of_condition(&self, condition: &Condition) -> Result<String> {
        self.label_of(&condition.attack_id, condition.env_id.as_ref().map(EnvId::as_str))
    }

    /// Category of a group key produced by [`Grouping::key_of`]. Keys are an
    /// attack id, an env id, or `attack/env`.
    pub fn of_key(&self, key: &str) -> Result<String> {
        match key.split_once('/') {
            Some((attack, env)) => self.label_of(attack, Some(env)),
            None => match self {
                Category::Eid(_) => self.label_of("", Some(key)),
                _ => self.label_of(key, None),
            },
        }
    }
}

/// Parses `attack_id label` lines.
pub fn parse_category_map(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [attack, label] = fields[..] else {
            return Err(Error::Parse { line: i + 1, msg: format!("expected 2 fields, found {}", fields.len()) });
        };
        if map.insert(attack.to_owned(), label.to_owned()).is_some() {
            return Err(Error::Parse { line: i + 1, msg: format!("attack `{attack}` mapped twice") });
        }
    }
    Ok(map)
}

/// How spoof trials are partitioned.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Grouping {
    Attack,
    Env,
    /// `attack_id/env_id`.
    AttackEnv,
    Category(Category),
}

impl Grouping {
    pub fn key_of(&self, condition: &Condition) -> Result<String> {
        let env = || {
            condition
                .env_id
                .map(|e| e.to_string())
                .ok_or_else(|| Error::InvalidArgument(format!("trial of `{}` has no env_id", condition.attack_id)))
        };
        match self {
            Grouping::Attack => Ok(condition.attack_id.clone()),
            Grouping::Env => env(),
            Grouping::AttackEnv => Ok(format!("{}/{}", condition.attack_id, env()?)),
            Grouping::Category(c) => c.of_condition(condition),
        }
    }
}

/// One evaluated trial subset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evaluation<T> {
    pub tdcf: TdcfResult<T>,
    pub eer: EerPoint<T>,
    pub coeffs: TdcfCoeffs<T>,
    pub asv_rates: AsvErrorRates<T>,
    pub n_spoof: usize,
}

/// Global ASV operating point shared by every group.
struct AsvContext<'a, T> {
    asv: &'a ScoreSet<T, AsvKey>,
    threshold: T,
    targets: Vec<T>,
    nontargets: Vec<T>,
    cost: CostModel<T>,
}

impl<'a, T: Real> AsvContext<'a, T> {
    fn new(asv: &'a ScoreSet<T, AsvKey>, cost: &CostModel<T>) -> Result<Self> {
        cost.validate()?;
        let (threshold, _) = asv_operating_point(asv)?;
        Ok(Self {
            asv,
            threshold,
            targets: asv.scores_with_key(AsvKey::Target),
            nontargets: asv.scores_with_key(AsvKey::Nontarget),
            cost: *cost,
        })
    }

    /// Evaluates all bona fide CM trials against the spoof trials kept by
    /// `keep`, on both the CM and the ASV side.
    fn evaluate(
        &self,
        cm: &ScoreSet<T, CmKey>,
        label: &str,
        keep: impl Fn(&Condition) -> Result<bool>,
    ) -> Result<Evaluation<T>> {
        let mut asv_spoof = Vec::new();
        for r in self.asv.iter().filter(|r| r.record.key.is_spoof()) {
            if keep(&r.record.condition)? {
                asv_spoof.push(r.score);
            }
        }
        if asv_spoof.is_empty() {
            return Err(Error::EmptyGroup(format!("{label} (no ASV spoof trials)")));
        }
        let asv_rates = asv_rates_at(self.threshold, &self.targets, &self.nontargets, &asv_spoof)?;
        let coeffs = tdcf_coefficients(&asv_rates, &self.cost)?;
        evaluate_cm(cm, label, &keep, coeffs, asv_rates)
    }
}

fn evaluate_cm<T: Real>(
    cm: &ScoreSet<T, CmKey>,
    label: &str,
    keep: &impl Fn(&Condition) -> Result<bool>,
    coeffs: TdcfCoeffs<T>,
    asv_rates: AsvErrorRates<T>,
) -> Result<Evaluation<T>> {
    let mut bona = Vec::new();
    let mut spoof = Vec::new();
    for r in cm.iter() {
        match r.record.key {
            CmKey::BonaFide => bona.push(r.score),
            CmKey::Spoof => {
                if keep(&r.record.condition)? {
                    spoof.push(r.score);
                }
            }
        }
    }
    if spoof.is_empty() {
        return Err(Error::EmptyGroup(label.to_owned()));
    }
    if bona.is_empty() {
        return Err(Error::EmptyClass("CM bona fide"));
    }
    Ok(Evaluation {
        tdcf: min_tdcf(&bona, &spoof, &coeffs)?,
        eer: eer_of(&bona, &spoof)?,
        coeffs,
        asv_rates,
        n_spoof: spoof.len(),
    })
}

/// min t-DCF over all CM trials with the ASV threshold at its global EER.
pub fn pooled_min_tdcf<T: Real>(
    cm: &ScoreSet<T, CmKey>,
    asv: &ScoreSet<T, AsvKey>,
    cost: &CostModel<T>,
) -> Result<Evaluation<T>> {
    AsvContext::new(asv, cost)?.evaluate(cm, "pooled", |_| Ok(true))
}

/// Spoof group keys present in the CM set, sorted.
pub fn group_keys<T: Real>(cm: &ScoreSet<T, CmKey>, grouping: &Grouping) -> Result<Vec<String>> {
    let mut keys = BTreeSet::new();
    for r in cm.iter().filter(|r| r.record.key == CmKey::Spoof) {
        keys.insert(grouping.key_of(&r.record.condition)?);
    }
    Ok(keys.into_iter().collect())
}

/// One result per spoof group, keyed and ordered lexicographically.
pub fn per_condition_min_tdcf<T: Real>(
    cm: &ScoreSet<T, CmKey>,
    asv: &ScoreSet<T, AsvKey>,
    cost: &CostModel<T>,
    grouping: &Grouping,
) -> Result<BTreeMap<String, Evaluation<T>>> {
    let ctx = AsvContext::new(asv, cost)?;
    let keys = group_keys(cm, grouping)?;
    keys.par_iter()
        .map(|key| {
            let eval = ctx.evaluate(cm, key, |c| Ok(grouping.key_of(c)? == *key))?;
            Ok((key.clone(), eval))
        })
        .collect::<Result<Vec<_>>>()
        .map(|v| v.into_iter().collect())
}

/// Per-group evaluation with coefficients fixed in advance, for instance
/// borrowed from another ASV set. Every group shares `coeffs`.
pub fn per_condition_min_tdcf_with<T: Real>(
    cm: &ScoreSet<T, CmKey>,
    coeffs: &TdcfCoeffs<T>,
    asv_rates: &AsvErrorRates<T>,
    grouping: &Grouping,
) -> Result<BTreeMap<String, Evaluation<T>>> {
    let keys = group_keys(cm, grouping)?;
    keys.par_iter()
        .map(|key| {
            let eval = evaluate_cm(cm, key, &|c| Ok(grouping.key_of(c)? == *key), *coeffs, *asv_rates)?;
            Ok((key.clone(), eval))
        })
        .collect::<Result<Vec<_>>>()
        .map(|v| v.into_iter().collect())
}

pub fn pooled_min_tdcf_with<T: Real>(
    cm: &ScoreSet<T, CmKey>,
    coeffs: &TdcfCoeffs<T>,
    asv_rates: &AsvErrorRates<T>,
) -> Result<Evaluation<T>> {
    evaluate_cm(cm, "pooled", &|_| Ok(true), *coeffs, *asv_rates)
}

/// Evaluates the union of several groups as one pool.
pub fn pool_groups<T: Real>(
    cm: &ScoreSet<T, CmKey>,
    asv: &ScoreSet<T, AsvKey>,
    cost: &CostModel<T>,
    grouping: &Grouping,
    keys: &[String],
) -> Result<Evaluation<T>> {
    let wanted: BTreeSet<&str> = keys.iter().map(String::as_str).collect();
    AsvContext::new(asv, cost)?.evaluate(cm, &keys.join(","), |c| Ok(wanted.contains(grouping.key_of(c)?.as_str())))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstCase<T> {
    pub value: T,
    /// Every group attaining the maximum, in key order.
    pub keys: Vec<String>,
}

impl<T: Real> WorstCase<T> {
    pub fn label(&self) -> String {
        format_keys(&self.keys)
    }
}

/// Highest per-group min t-DCF, exact ties reported jointly.
pub fn max_min_tdcf<T: Real>(per_condition: &BTreeMap<String, Evaluation<T>>) -> Option<WorstCase<T>> {
    let value = per_condition.values().map(|e| e.tdcf.min_tdcf_norm).max_by(total_cmp)?;
    let keys = per_condition.iter().filter(|(_, e)| e.tdcf.min_tdcf_norm == value).map(|(k, _)| k.clone()).collect();
    Some(WorstCase { value, keys })
}

/// Joins keys with commas, folding a shared `/env` suffix: `AA,AC/acc`.
pub fn format_keys(keys: &[String]) -> String {
    let split: Vec<Option<(&str, &str)>> = keys.iter().map(|k| k.split_once('/')).collect();
    if let Some(Some((_, suffix))) = split.first() {
        if split.iter().all(|s| matches!(s, Some((_, x)) if x == suffix)) {
            let heads: Vec<&str> = split.iter().map(|s| s.expect("checked").0).collect();
            return format!("{}/{}", heads.join(","), suffix);
        }
    }
    keys.join(",")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxStats<T> {
    pub min: T,
    pub q1: T,
    pub median: T,
    pub q3: T,
    pub max: T,
}

fn quantile_sorted<T: Real>(sorted: &[T], p: f64) -> T {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = T::lit(pos - lo as f64);
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Five-number summary with quartiles interpolated at `p * (n - 1)`.
pub fn box_stats<T: Real>(values: &[T]) -> Result<BoxStats<T>> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("box statistics of an empty list".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("box statistics input".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(total_cmp);
    Ok(BoxStats {
        min: sorted[0],
        q1: quantile_sorted(&sorted, 0.25),
        median: quantile_sorted(&sorted, 0.5),
        q3: quantile_sorted(&sorted, 0.75),
        max: sorted[sorted.len() - 1],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Section {
    All,
    WithoutWorst,
    WorstOnly,
}

impl Section {
    pub fn as_str(self) -> &'static str {
        match self {
            Section::All => "all",
            Section::WithoutWorst => "without_worst",
            Section::WorstOnly => "worst_only",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow<T> {
    pub category: String,
    pub section: Section,
    pub groups: Vec<String>,
    /// `None` when the section holds no group.
    pub min_tdcf: Option<BoxStats<T>>,
    pub asv_floor: Option<BoxStats<T>>,
}

impl<T> ReportRow<T> {
    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupReport<T> {
    pub worst: Vec<String>,
    pub rows: Vec<ReportRow<T>>,
}

/// Three rows per category: every group, the groups other than the worst
/// case, and the worst-case group(s) alone.
pub fn group_report<T: Real>(
    per_condition: &BTreeMap<String, Evaluation<T>>,
    category: &Category,
    worst: &[String],
) -> Result<GroupReport<T>> {
    let mut by_category: BTreeMap<String, Vec<&String>> = BTreeMap::new();
    for key in per_condition.keys() {
        by_category.entry(category.of_key(key)?).or_default().push(key);
    }
    let worst_set: BTreeSet<&str> = worst.iter().map(String::as_str).collect();
    let mut rows = Vec::with_capacity(3 * by_category.len());
    for (cat, keys) in &by_category {
        for section in [Section::All, Section::WithoutWorst, Section::WorstOnly] {
            let members: Vec<String> = keys
                .iter()
                .filter(|k| match section {
                    Section::All => true,
                    Section::WithoutWorst => !worst_set.contains(k.as_str()),
                    Section::WorstOnly => worst_set.contains(k.as_str()),
                })
                .map(|k| (*k).clone())
                .collect();
            let stats = |f: fn(&Evaluation<T>) -> T| -> Result<Option<BoxStats<T>>> {
                if members.is_empty() {
                    return Ok(None);
                }
                let vals: Vec<T> = members.iter().map(|k| f(&per_condition[k])).collect();
                box_stats(&vals).map(Some)
            };
            rows.push(ReportRow {
                category: cat.clone(),
                section,
                min_tdcf: stats(|e| e.tdcf.min_tdcf_norm)?,
                asv_floor: stats(|e| e.tdcf.asv_floor)?,
                groups: members,
            });
        }
    }
    Ok(GroupReport { worst: worst.to_vec(), rows })
}

impl<T: Real> GroupReport<T> {
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("category,section,n_groups,min,q1,median,q3,max,floor_min,floor_median,floor_max,empty\n");
        for r in &self.rows {
            let _ = write!(out, "{},{},{}", r.category, r.section.as_str(), r.groups.len());
            match (&r.min_tdcf, &r.asv_floor) {
                (Some(b), Some(f)) => {
                    for v in [b.min, b.q1, b.median, b.q3, b.max, f.min, f.median, f.max] {
                        let _ = write!(out, ",{:.6}", v.as_f64());
                    }
                    out.push_str(",false\n");
                }
                _ => out.push_str(",,,,,,,,,true\n"),
            }
        }
        out
    }
}

/// `key,min_tdcf,asv_floor,eer,n_spoof_trials`, one row per group.
pub fn per_condition_csv<T: Real>(per_condition: &BTreeMap<String, Evaluation<T>>) -> String {
    let mut out = String::from("key,min_tdcf,asv_floor,eer,n_spoof_trials\n");
    for (key, e) in per_condition {
        let _ = writeln!(
            out,
            "{key},{:.6},{:.6},{:.6},{}",
            e.tdcf.min_tdcf_norm.as_f64(),
            e.tdcf.asv_floor.as_f64(),
            e.eer.eer.as_f64(),
            e.n_spoof
        );
    }
    out
}

/// Per-condition results nested by category label.
pub fn nest_by_category<'a, T: Real>(
    per_condition: &'a BTreeMap<String, Evaluation<T>>,
    category: &Category,
) -> Result<BTreeMap<String, BTreeMap<&'a str, &'a Evaluation<T>>>> {
    let mut nested: BTreeMap<String, BTreeMap<&str, &Evaluation<T>>> = BTreeMap::new();
    for (key, eval) in per_condition {
        nested.entry(category.of_key(key)?).or_default().insert(key.as_str(), eval);
    }
    Ok(nested)
}

/// Builds a category map from a mapping of attack ids.
pub fn category_map_from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Category {
    Category::Map(pairs.into_iter().map(|(a, b)| (a.to_owned(), b.to_owned())).collect())
}
