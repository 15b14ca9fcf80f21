mod common;

use std::collections::BTreeMap;

use common::{asv_set, cm_set, normal, oracle, rng};
use proptest::prelude::*;
use spoofeval::analysis::{format_keys, group_keys, pool_groups, Section};
use spoofeval::{
    box_stats, eid_category, group_report, max_min_tdcf, per_condition_min_tdcf, pooled_min_tdcf, Category, CostModel,
    EidAxis, Grouping,
};

type Tagged = (&'static str, Option<&'static str>, f64);

fn tag(attack: &'static str, env: Option<&'static str>, scores: &[f64]) -> Vec<Tagged> {
    scores.iter().map(|&s| (attack, env, s)).collect()
}

#[test]
fn twelve_trial_fixture_matches_enumeration() {
    let bona = [2.0, 1.5, 0.4, 3.0];
    let spoof: Vec<Tagged> =
        [tag("A01", None, &[-1.0, 0.5, 1.6, -2.0]), tag("A02", None, &[0.0, 2.5, -0.5, 0.4])].concat();
    let cm = cm_set(&bona, &spoof);
    let asv_spoof = [tag("A01", None, &[1.0, 2.2]), tag("A02", None, &[0.2, 2.9])].concat();
    let tar = [3.0, 2.5, 0.8, 4.0];
    let non = [0.0, -1.0, 1.2, -0.3];
    let asv = asv_set(&tar, &non, &asv_spoof);
    let cost = CostModel::default();
    let pooled = pooled_min_tdcf(&cm, &asv, &cost).unwrap();

    let (_, thr) = oracle::eer(&tar, &non);
    let spf: Vec<f64> = asv_spoof.iter().map(|t| t.2).collect();
    let (pm, pf) = oracle::rates(&tar, &non, thr);
    let pfs = oracle::rates(&tar, &spf, thr).1;
    let c0 = cost.p_tar * cost.c_miss * pm + cost.p_non * cost.c_fa * pf;
    let c1 = cost.p_tar * cost.c_miss - c0;
    let c2 = cost.p_spoof * cost.c_fa_spoof * pfs;
    let cm_spoof: Vec<f64> = spoof.iter().map(|t| t.2).collect();
    let (v, tau) = oracle::min_tdcf(&bona, &cm_spoof, c0, c1, c2);
    assert!((pooled.tdcf.min_tdcf_norm - v).abs() < 1e-12);
    assert_eq!(pooled.tdcf.threshold, tau);
    assert_eq!(pooled.n_spoof, 8);
}

fn three_attacks(seed: u64) -> (spoofeval::CmScoreSet, spoofeval::AsvScoreSet) {
    let mut r = rng(seed);
    let bona = normal(&mut r, 3.0, 1.0, 300);
    let a1 = normal(&mut r, -3.0, 1.0, 200);
    let a2 = normal(&mut r, -2.0, 1.0, 200);
    let a3 = normal(&mut r, 2.5, 1.0, 200);
    let spoof = [tag("A01", None, &a1), tag("A02", None, &a2), tag("A03", None, &a3)].concat();
    let tar = normal(&mut r, 4.0, 1.0, 300);
    let non = normal(&mut r, 0.0, 1.0, 600);
    let asv_spoof = [
        tag("A01", None, &normal(&mut r, 1.0, 1.0, 100)),
        tag("A02", None, &normal(&mut r, 2.0, 1.0, 100)),
        tag("A03", None, &normal(&mut r, 3.0, 1.0, 100)),
    ]
    .concat();
    (cm_set(&bona, &spoof), asv_set(&tar, &non, &asv_spoof))
}

#[test]
fn dominating_group_is_the_worst_case() {
    let (cm, asv) = three_attacks(1);
    let cost = CostModel::default();
    let groups = per_condition_min_tdcf(&cm, &asv, &cost, &Grouping::Attack).unwrap();
    assert_eq!(groups.keys().cloned().collect::<Vec<_>>(), ["A01", "A02", "A03"]);
    let worst = max_min_tdcf(&groups).unwrap();
    assert_eq!(worst.keys, ["A03"]);
    let pooled = pooled_min_tdcf(&cm, &asv, &cost).unwrap();
    assert!(worst.value >= pooled.tdcf.min_tdcf_norm);
    for (key, e) in &groups {
        assert!(e.tdcf.asv_floor <= e.tdcf.min_tdcf_norm + 1e-12, "{key}");
    }
}

#[test]
fn regrouping_all_groups_reproduces_pooled() {
    let (cm, asv) = three_attacks(2);
    let cost = CostModel::default();
    let keys = group_keys(&cm, &Grouping::Attack).unwrap();
    let pooled = pooled_min_tdcf(&cm, &asv, &cost).unwrap();
    let repooled = pool_groups(&cm, &asv, &cost, &Grouping::Attack, &keys).unwrap();
    assert_eq!(pooled, repooled);
}

#[test]
fn single_condition_equals_pooled() {
    let mut r = rng(3);
    let bona = normal(&mut r, 1.0, 1.0, 100);
    let cm = cm_set(&bona, &tag("A05", None, &normal(&mut r, 0.0, 1.0, 100)));
    let asv =
        asv_set(&normal(&mut r, 2.0, 1.0, 50), &normal(&mut r, 0.0, 1.0, 50), &tag("A05", None, &[0.5, 1.5, 2.5]));
    let cost = CostModel::default();
    let groups = per_condition_min_tdcf(&cm, &asv, &cost, &Grouping::Attack).unwrap();
    assert_eq!(groups["A05"], pooled_min_tdcf(&cm, &asv, &cost).unwrap());
}

#[test]
fn tied_groups_are_reported_jointly() {
    let bona = [1.0, 2.0, 3.0, 2.5];
    let same = [0.5, 2.2, -1.0];
    let spoof =
        [tag("AA", Some("acc"), &same), tag("AC", Some("acc"), &same), tag("BA", Some("acc"), &[-3.0, -2.0, -4.0])]
            .concat();
    let asv_spoof =
        [tag("AA", Some("acc"), &[2.5, 0.1]), tag("AC", Some("acc"), &[0.2, 2.6]), tag("BA", Some("acc"), &[2.4])]
            .concat();
    let cm = cm_set(&bona, &spoof);
    let asv = asv_set(&[3.0, 2.0, 0.8], &[0.0, 0.5, 1.0], &asv_spoof);
    let groups = per_condition_min_tdcf(&cm, &asv, &CostModel::default(), &Grouping::AttackEnv).unwrap();
    assert_eq!(groups["AA/acc"], groups["AC/acc"]);
    let worst = max_min_tdcf(&groups).unwrap();
    assert_eq!(worst.keys, ["AA/acc", "AC/acc"]);
    assert_eq!(worst.label(), "AA,AC/acc");
    assert_eq!(format_keys(&worst.keys), "AA,AC/acc");
}

#[test]
fn eid_category_is_total_over_valid_ids() {
    let letters = ['a', 'b', 'c'];
    let mut cases = 0;
    for &s in &letters {
        for &t in &letters {
            for &d in &letters {
                let id: String = [s, t, d].iter().collect();
                assert_eq!(eid_category(&id, EidAxis::RoomSize).unwrap(), s);
                assert_eq!(eid_category(&id, EidAxis::T60).unwrap(), t);
                assert_eq!(eid_category(&id, EidAxis::TalkerDistance).unwrap(), d);
                cases += 3;
            }
        }
    }
    assert_eq!(cases, 81);
}

#[test]
fn group_report_sections() {
    let (cm, asv) = three_attacks(4);
    let groups = per_condition_min_tdcf(&cm, &asv, &CostModel::default(), &Grouping::Attack).unwrap();
    let worst = max_min_tdcf(&groups).unwrap();
    let everything = Category::Map(groups.keys().map(|k| (k.clone(), "all".to_owned())).collect());
    let report = group_report(&groups, &everything, &worst.keys).unwrap();
    assert_eq!(report.rows.len(), 3);
    assert_eq!(report.to_csv().lines().count(), 3 + 1);
    let all = report.rows[0].min_tdcf.unwrap();
    let without = report.rows[1].min_tdcf.unwrap();
    assert_eq!(report.rows[1].section, Section::WithoutWorst);
    assert!(without.max < all.max);
    assert_eq!(report.rows[2].groups, ["A03"]);

    let one: BTreeMap<String, _> = groups.iter().take(1).map(|(k, v)| (k.clone(), *v)).collect();
    let single_worst = max_min_tdcf(&one).unwrap();
    let r = group_report(&one, &everything, &single_worst.keys).unwrap();
    assert!(r.rows[1].is_empty());
    assert!(r.to_csv().lines().nth(2).unwrap().ends_with(",true"));
}

proptest! {
    #[test]
    fn box_stats_are_ordered(values in prop::collection::vec(-1e3f64..1e3, 1..60)) {
        let b = box_stats(&values).unwrap();
        prop_assert!(b.min <= b.q1 && b.q1 <= b.median && b.median <= b.q3 && b.q3 <= b.max);
    }
}
