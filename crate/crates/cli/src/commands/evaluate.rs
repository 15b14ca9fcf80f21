use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use spoofeval::analysis::{
    parse_category_map, per_condition_csv, per_condition_min_tdcf_with, pooled_min_tdcf_with, AidAxis, GroupReport,
};
use spoofeval::metrics::asv_operating_point;
use spoofeval::{
    group_report, join, max_min_tdcf, per_condition_min_tdcf, pooled_min_tdcf, tdcf_coefficients, AsvKey, Category,
    CmKey, CostModel, EidAxis, Evaluation, Grouping, ScoreSet,
};

use crate::config::RunConfig;
use crate::io::{read_protocol, read_scores, read_text, write_file};

#[derive(clap::Args)]
pub struct Args {
    #[arg(long)]
    cm_scores: PathBuf,
    /// CM protocol matching `--cm-scores`.
    #[arg(long)]
    protocol: PathBuf,
    #[arg(long)]
    asv_scores: Option<PathBuf>,
    #[arg(long)]
    asv_protocol: Option<PathBuf>,
    /// Run configuration; only the `[cost]` section matters here.
    #[arg(long, alias = "cost-config")]
    config: Option<PathBuf>,
    /// Group spoof trials by attack, env, attack-env, or a category axis
    /// (s, t60, ds, da, q, map).
    #[arg(long)]
    by: Option<String>,
    /// Category axis for the box-statistics report over `--by` groups.
    #[arg(long)]
    category: Option<String>,
    /// `attack_id label` lines, used when an axis is `map`.
    #[arg(long)]
    category_map: Option<PathBuf>,
    /// ASV scores whose operating point supplies the t-DCF coefficients.
    #[arg(long, requires = "coeffs_from_protocol")]
    coeffs_from: Option<PathBuf>,
    #[arg(long)]
    coeffs_from_protocol: Option<PathBuf>,
    /// Writes per_condition.csv, report.json, box_stats.csv and
    /// effective_config.txt here.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn category(name: &str, map: Option<&PathBuf>) -> Result<Category> {
    Ok(match name {
        "s" => Category::Eid(EidAxis::RoomSize),
        "t60" => Category::Eid(EidAxis::T60),
        "ds" => Category::Eid(EidAxis::TalkerDistance),
        "da" => Category::Aid(AidAxis::AttackerDistance),
        "q" => Category::Aid(AidAxis::DeviceQuality),
        "map" => {
            let Some(path) = map else { bail!("axis `map` needs --category-map") };
            Category::Map(parse_category_map(&read_text(path)?).with_context(|| format!("in {}", path.display()))?)
        }
        other => bail!("unknown category axis `{other}` (expected s, t60, ds, da, q or map)"),
    })
}

fn grouping(name: &str, map: Option<&PathBuf>) -> Result<Grouping> {
    Ok(match name {
        "attack" => Grouping::Attack,
        "env" => Grouping::Env,
        "attack-env" => Grouping::AttackEnv,
        other => Grouping::Category(category(other, map)?),
    })
}

#[derive(Serialize)]
struct Worst {
    value: f64,
    keys: Vec<String>,
    label: String,
}

#[derive(Serialize)]
struct Report<'a> {
    cost: &'a CostModel<f64>,
    coefficients_borrowed: bool,
    pooled: &'a Evaluation<f64>,
    grouping: Option<&'a str>,
    per_condition: Option<&'a BTreeMap<String, Evaluation<f64>>>,
    worst: Option<Worst>,
    category_report: Option<&'a GroupReport<f64>>,
}

enum Coefficients {
    FromAsv(ScoreSet<f64, AsvKey>),
    /// Pooled result under borrowed coefficients; groups reuse them.
    Borrowed(Evaluation<f64>),
}

fn load_asv(scores: &Path, protocol: &Path) -> Result<ScoreSet<f64, AsvKey>> {
    join(&read_protocol::<AsvKey>(protocol)?, &read_scores(scores)?)
        .with_context(|| format!("joining {} with {}", scores.display(), protocol.display()))
}

pub fn run(args: Args) -> Result<ExitCode> {
    let cfg = RunConfig::load_or_default(args.config.as_deref())?;
    let cost = cfg.cost;
    let cm = join(&read_protocol::<CmKey>(&args.protocol)?, &read_scores(&args.cm_scores)?)
        .with_context(|| format!("joining {} with {}", args.cm_scores.display(), args.protocol.display()))?;

    let source = match (&args.coeffs_from, &args.asv_scores) {
        (Some(other), _) => {
            let other_protocol = args.coeffs_from_protocol.as_ref().expect("enforced by clap");
            let borrowed = load_asv(other, other_protocol)?;
            let (_, rates) = asv_operating_point(&borrowed).context("operating point of --coeffs-from")?;
            let coeffs = tdcf_coefficients(&rates, &cost)?;
            Coefficients::Borrowed(pooled_min_tdcf_with(&cm, &coeffs, &rates)?)
        }
        (None, Some(scores)) => {
            let Some(protocol) = &args.asv_protocol else { bail!("--asv-scores needs --asv-protocol") };
            Coefficients::FromAsv(load_asv(scores, protocol)?)
        }
        (None, None) => bail!("need --asv-scores with --asv-protocol, or --coeffs-from"),
    };

    let pooled = match &source {
        Coefficients::FromAsv(asv) => pooled_min_tdcf(&cm, asv, &cost)?,
        Coefficients::Borrowed(e) => *e,
    };
    println!("pooled_min_tdcf: {:.6}", pooled.tdcf.min_tdcf_norm);
    println!("eer: {:.6}", pooled.eer.eer);
    println!("asv_floor: {:.6}", pooled.tdcf.asv_floor);

    let map = args.category_map.as_ref();
    let grouped = match &args.by {
        Some(by) => {
            let g = grouping(by, map)?;
            let per = match &source {
                Coefficients::FromAsv(asv) => per_condition_min_tdcf(&cm, asv, &cost, &g)?,
                Coefficients::Borrowed(e) => per_condition_min_tdcf_with(&cm, &e.coeffs, &e.asv_rates, &g)?,
            };
            Some(per)
        }
        None => {
            if args.category.is_some() {
                bail!("--category needs --by");
            }
            None
        }
    };
    let worst = grouped.as_ref().and_then(max_min_tdcf);
    if let Some(w) = &worst {
        println!("worst: {:.6} ({})", w.value, w.label());
    }
    let report = match (&args.category, &worst, &grouped) {
        (Some(axis), Some(w), Some(per)) => Some(group_report(per, &category(axis, map)?, &w.keys)?),
        _ => None,
    };

    match &args.out_dir {
        Some(dir) => {
            let json = Report {
                cost: &cost,
                coefficients_borrowed: matches!(source, Coefficients::Borrowed(_)),
                pooled: &pooled,
                grouping: args.by.as_deref(),
                per_condition: grouped.as_ref(),
                worst: worst.as_ref().map(|w| Worst { value: w.value, keys: w.keys.clone(), label: w.label() }),
                category_report: report.as_ref(),
            };
            let mut text = serde_json::to_string_pretty(&json)?;
            text.push('\n');
            if let Some(per) = &grouped {
                write_file(&dir.join("per_condition.csv"), per_condition_csv(per))?;
            }
            if let Some(r) = &report {
                write_file(&dir.join("box_stats.csv"), r.to_csv())?;
            }
            write_file(&dir.join("report.json"), text)?;
            write_file(&dir.join("effective_config.txt"), cfg.to_text())?;
        }
        None => {
            if let Some(per) = &grouped {
                print!("\n{}", per_condition_csv(per));
            }
            if let Some(r) = &report {
                print!("\n{}", r.to_csv());
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
