#[path = "../../core/tests/common/mod.rs"]
mod common;
mod support;

use std::fs;
use std::path::Path;

use spoofeval::trialdata::write_protocol;
use spoofeval::{CmKey, Gmm, ScoreSet};
use support::*;
use tempfile::TempDir;

/// `n` half-second utterances named `u0..`, written under `dir/wav`.
fn wavs(dir: &Path, n: usize, seed: u64) -> Vec<String> {
    fs::create_dir_all(dir.join("wav")).unwrap();
    let mut r = common::rng(seed);
    (0..n)
        .map(|i| {
            let path = dir.join("wav").join(format!("u{i}.wav"));
            let x = multitone(&mut r, 8000);
            write_wav(&path, if i % 2 == 0 { x } else { cubic_distort(&x) });
            path.to_str().unwrap().to_owned()
        })
        .collect()
}

fn protocol_for(dir: &Path, n: usize) -> std::path::PathBuf {
    let records: Vec<_> =
        (0..n).map(|i| cm_record(&format!("u{i}"), if i % 2 == 0 { CmKey::BonaFide } else { CmKey::Spoof })).collect();
    let path = dir.join("cm.txt");
    fs::write(&path, write_protocol(&records)).unwrap();
    path
}

fn extract(dir: &Path, n: usize, frontend: &str) -> std::path::PathBuf {
    let list = dir.join("list.txt");
    fs::write(&list, wavs(dir, n, 3).join("\n")).unwrap();
    let out = dir.join("fea");
    run_ok(&["features", "--frontend", frontend, "--wav-list", p(&list), "--out-dir", p(&out)]);
    out
}

#[test]
fn features_log_the_bad_file_and_keep_the_rest() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let mut paths = wavs(dir, 3, 1);
    let bad = dir.join("wav").join("broken.wav");
    fs::write(&bad, b"RIFF\x10\0\0\0WAVEjunk").unwrap();
    paths.insert(1, bad.to_str().unwrap().to_owned());
    let list = dir.join("list.txt");
    fs::write(&list, paths.join("\n")).unwrap();
    let out = dir.join("fea");

    let res = run(&["features", "--frontend", "lfcc", "--wav-list", p(&list), "--out-dir", p(&out)]);
    assert_eq!(res.status.code(), Some(1));
    for i in 0..3 {
        assert!(out.join(format!("u{i}.fea")).exists());
    }
    assert!(!out.join("broken.fea").exists());
    let manifest = fs::read_to_string(out.join("manifest.tsv")).unwrap();
    let rows: Vec<&str> = manifest.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.split('\t').nth(2) == Some("60")));
    let log = fs::read_to_string(out.join("errors.log")).unwrap();
    assert_eq!(log.lines().count(), 1);
    assert!(log.contains("broken.wav"), "{log}");
}

#[test]
fn features_are_identical_across_reruns_and_jobs() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let list = dir.join("list.txt");
    let lines: Vec<String> = wavs(dir, 3, 2).iter().enumerate().map(|(i, p)| format!("utt{i} {p}")).collect();
    fs::write(&list, lines.join("\n")).unwrap();
    let mut snaps = Vec::new();
    for (k, jobs) in ["1", "1", "3"].iter().enumerate() {
        let out = dir.join(format!("fea{k}"));
        run_ok(&["--jobs", jobs, "features", "--frontend", "cqcc", "--wav-list", p(&list), "--out-dir", p(&out)]);
        snaps.push(snapshot(&out));
    }
    assert_eq!(snaps[0].len(), 6, "3 features + manifest + errors.log + config");
    assert_eq!(snaps[0], snaps[1]);
    assert_eq!(snaps[0], snaps[2]);
    let manifest = String::from_utf8(snaps[0].iter().find(|f| f.0 == "manifest.tsv").unwrap().1.clone()).unwrap();
    assert!(manifest.lines().skip(1).all(|r| r.starts_with("utt") && r.split('\t').nth(2) == Some("90")));
}

#[test]
fn train_gmm_is_seeded_and_loadable() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let fea = extract(dir, 4, "lfcc");
    let proto = protocol_for(dir, 4);
    let model = |name: &str, k: &str, seed: &str| {
        let out = dir.join(name);
        run_ok(&[
            "train-gmm",
            "--features-dir",
            p(&fea),
            "--protocol",
            p(&proto),
            "--class",
            "bonafide",
            "--k",
            k,
            "--seed",
            seed,
            "--out",
            p(&out),
        ]);
        out
    };
    let k1 = model("k1.gmm", "1", "0");
    let g = Gmm::<f64>::read_binary(fs::File::open(&k1).unwrap()).unwrap();
    assert_eq!((g.components(), g.dims()), (1, 60));
    assert_eq!(fs::read(&k1).unwrap(), g.to_bytes());
    let trace = fs::read_to_string(dir.join("k1.gmm.trace.txt")).unwrap();
    assert!(trace.lines().count() >= 2);
    assert!(fs::read_to_string(dir.join("k1.gmm.config.txt")).unwrap().contains("components = 1"));

    let a = model("a.gmm", "4", "7");
    let b = model("b.gmm", "4", "7");
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
}

#[test]
fn train_gmm_rejects_more_components_than_frames() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let fea = extract(dir, 2, "lfcc");
    let proto = protocol_for(dir, 2);
    let res = run(&[
        "train-gmm",
        "--features-dir",
        p(&fea),
        "--protocol",
        p(&proto),
        "--class",
        "spoof",
        "--k",
        "5000",
        "--out",
        p(&dir.join("m.gmm")),
    ]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("frames"));
    assert!(!dir.join("m.gmm").exists());
}

#[test]
fn score_cm_identical_models_and_missing_features() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let fea = extract(dir, 4, "lfcc");
    let proto = protocol_for(dir, 4);
    let model = dir.join("m.gmm");
    run_ok(&[
        "train-gmm",
        "--features-dir",
        p(&fea),
        "--protocol",
        p(&proto),
        "--class",
        "bonafide",
        "--k",
        "2",
        "--out",
        p(&model),
    ]);
    let scores = dir.join("scores.txt");
    let args = ["score-cm", "--bona-model", p(&model), "--spoof-model", p(&model), "--features-dir", p(&fea)];
    run_ok(&[&args[..], &["--protocol", p(&proto), "--out", p(&scores)]].concat());
    let text = fs::read_to_string(&scores).unwrap();
    let ids: Vec<&str> = text.lines().map(|l| l.split(' ').next().unwrap()).collect();
    assert_eq!(ids, ["u0", "u1", "u2", "u3"]);
    for line in text.lines() {
        let v: f64 = line.split(' ').nth(1).unwrap().parse().unwrap();
        assert_eq!(v, 0.0);
    }

    fs::remove_file(fea.join("u2.fea")).unwrap();
    let res = run(&[&args[..], &["--protocol", p(&proto), "--out", p(&dir.join("s2.txt"))]].concat());
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("trial u2"));
    assert!(!dir.join("s2.txt").exists());
}

fn tag<'a>(attack: &'a str, env: Option<&'a str>, scores: &[f64]) -> Vec<(&'a str, Option<&'a str>, f64)> {
    scores.iter().map(|&s| (attack, env, s)).collect()
}

fn evaluate(dir: &Path, cm: &ScoreSet<f64, CmKey>, asv: &ScoreSet<f64, spoofeval::AsvKey>, extra: &[&str]) -> String {
    let files = ["cm_p.txt", "cm_s.txt", "asv_p.txt", "asv_s.txt"].map(|f| dir.join(f));
    write_set(cm, &files[0], &files[1]);
    write_set(asv, &files[2], &files[3]);
    let base = [
        "evaluate",
        "--protocol",
        p(&files[0]),
        "--cm-scores",
        p(&files[1]),
        "--asv-protocol",
        p(&files[2]),
        "--asv-scores",
        p(&files[3]),
    ];
    stdout(&run_ok(&[&base[..], extra].concat()))
}

fn value(out: &str, key: &str) -> String {
    let prefix = format!("{key}: ");
    out.lines().find_map(|l| l.strip_prefix(&prefix)).unwrap_or_else(|| panic!("no {key} in {out}")).to_owned()
}

fn simple_asv() -> ScoreSet<f64, spoofeval::AsvKey> {
    common::asv_set(&[3.0, 2.0, 0.8, 2.2], &[0.0, 0.5, 1.0, -1.0], &tag("A01", None, &[2.5, 0.1, 1.5]))
}

#[test]
fn evaluate_perfect_and_constant_fixtures() {
    let tmp = TempDir::new().unwrap();
    let perfect = common::cm_plain(&[5.0, 6.0, 7.0], &[-1.0, 0.0, 1.0]);
    let out = evaluate(tmp.path(), &perfect, &simple_asv(), &[]);
    assert_eq!(value(&out, "pooled_min_tdcf"), value(&out, "asv_floor"));
    assert_eq!(value(&out, "eer"), "0.000000");

    let constant = common::cm_plain(&[2.0; 4], &[2.0; 5]);
    let out = evaluate(tmp.path(), &constant, &simple_asv(), &[]);
    assert_eq!(value(&out, "pooled_min_tdcf"), "1.000000");
}

fn tie_fixture() -> (ScoreSet<f64, CmKey>, ScoreSet<f64, spoofeval::AsvKey>) {
    let same = [0.5, 2.2, -1.0];
    let spoof =
        [tag("AA", Some("acc"), &same), tag("AC", Some("acc"), &same), tag("BA", Some("acc"), &[-3.0, -2.0, -4.0])]
            .concat();
    let asv_spoof =
        [tag("AA", Some("acc"), &[2.5, 0.1]), tag("AC", Some("acc"), &[0.2, 2.6]), tag("BA", Some("acc"), &[2.4])]
            .concat();
    (common::cm_set(&[1.0, 2.0, 3.0, 2.5], &spoof), common::asv_set(&[3.0, 2.0, 0.8], &[0.0, 0.5, 1.0], &asv_spoof))
}

#[test]
fn evaluate_tie_lists_both_keys() {
    let tmp = TempDir::new().unwrap();
    let (cm, asv) = tie_fixture();
    let out = evaluate(tmp.path(), &cm, &asv, &["--by", "attack-env"]);
    let worst = value(&out, "worst");
    assert!(worst.ends_with(" (AA,AC/acc)"), "{worst}");
}

#[test]
fn evaluate_out_dir_is_complete_and_reproducible() {
    let tmp = TempDir::new().unwrap();
    let (cm, asv) = tie_fixture();
    let mut snaps = Vec::new();
    for (k, jobs) in ["1", "1", "2"].iter().enumerate() {
        let out = tmp.path().join(format!("out{k}"));
        let args = ["--jobs", jobs, "--by", "attack-env", "--category", "da", "--out-dir", p(&out)];
        evaluate(tmp.path(), &cm, &asv, &args);
        snaps.push(snapshot(&out));
    }
    let names: Vec<&str> = snaps[0].iter().map(|f| f.0.as_str()).collect();
    assert_eq!(names, ["box_stats.csv", "effective_config.txt", "per_condition.csv", "report.json"]);
    assert_eq!(snaps[0], snaps[1]);
    assert_eq!(snaps[0], snaps[2]);
    let csv = String::from_utf8(snaps[0][2].1.clone()).unwrap();
    assert_eq!(csv.lines().next(), Some("key,min_tdcf,asv_floor,eer,n_spoof_trials"));
    assert_eq!(csv.lines().count(), 4);
    let json: serde_json::Value = serde_json::from_slice(&snaps[0][3].1).unwrap();
    assert_eq!(json["worst"]["label"], "AA,AC/acc");
}

#[test]
fn borrowed_coefficients_come_from_the_other_set() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let cm = common::cm_plain(&[1.0, 2.0, 3.0], &[0.0, 2.5, -1.0]);
    let other = simple_asv();
    write_set(&other, &dir.join("o_p.txt"), &dir.join("o_s.txt"));
    let (cm_p, cm_s) = (dir.join("cm_p.txt"), dir.join("cm_s.txt"));
    write_set(&cm, &cm_p, &cm_s);
    let borrowed = stdout(&run_ok(&[
        "evaluate",
        "--protocol",
        p(&cm_p),
        "--cm-scores",
        p(&cm_s),
        "--coeffs-from",
        p(&dir.join("o_s.txt")),
        "--coeffs-from-protocol",
        p(&dir.join("o_p.txt")),
    ]));
    let direct = evaluate(dir, &cm, &other, &[]);
    assert_eq!(value(&borrowed, "pooled_min_tdcf"), value(&direct, "pooled_min_tdcf"));
    assert_eq!(value(&borrowed, "asv_floor"), value(&direct, "asv_floor"));
}

#[test]
fn config_rejects_unknown_keys_and_overrides_apply() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let cfg = dir.join("bad.cfg");
    fs::write(&cfg, "[cost]\np_tarr = 0.9\n").unwrap();
    let cm = common::cm_plain(&[1.0, 2.0], &[0.0]);
    let (cm_p, cm_s) = (dir.join("cm_p.txt"), dir.join("cm_s.txt"));
    write_set(&cm, &cm_p, &cm_s);
    let res = run(&["evaluate", "--protocol", p(&cm_p), "--cm-scores", p(&cm_s), "--cost-config", p(&cfg)]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("p_tarr"));

    let fea = extract(dir, 2, "lfcc");
    let proto = protocol_for(dir, 2);
    let good = dir.join("em.cfg");
    fs::write(&good, "[em]\ncomponents = 3\nseed = 11\nmax_iters = 2\n").unwrap();
    let out = dir.join("m.gmm");
    run_ok(&[
        "train-gmm",
        "--features-dir",
        p(&fea),
        "--protocol",
        p(&proto),
        "--class",
        "bonafide",
        "--k",
        "2",
        "--config",
        p(&good),
        "--out",
        p(&out),
    ]);
    let echoed = fs::read_to_string(dir.join("m.gmm.config.txt")).unwrap();
    assert!(echoed.contains("components = 2") && echoed.contains("seed = 11") && echoed.contains("max_iters = 2"));
}

fn matrix_fixture(dir: &Path, identical: bool) -> (std::path::PathBuf, std::path::PathBuf) {
    let mut r = common::rng(5);
    let n = 60;
    let mut text = String::from("trial_id s1 s2 s3\n");
    let mut records = Vec::new();
    for i in 0..n {
        let bona = i % 3 != 0;
        let mu = if bona { 1.0 } else { -1.0 };
        let base = mu + common::normal(&mut r, 0.0, 1.0, 1)[0];
        let row: Vec<f64> = if identical {
            vec![base; 3]
        } else {
            (0..3).map(|_| mu + common::normal(&mut r, 0.0, 1.2, 1)[0]).collect()
        };
        text.push_str(&format!("t{i} {} {} {}\n", row[0], row[1], row[2]));
        records.push(cm_record(&format!("t{i}"), if bona { CmKey::BonaFide } else { CmKey::Spoof }));
    }
    let (m, l) = (dir.join("matrix.txt"), dir.join("labels.txt"));
    fs::write(&m, text).unwrap();
    fs::write(&l, write_protocol(&records)).unwrap();
    (m, l)
}

#[test]
fn fuse_train_apply_and_average() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let (m, l) = matrix_fixture(dir, false);
    let model = dir.join("fusion.txt");
    run_ok(&["fuse", "train", "--matrix", p(&m), "--labels", p(&l), "--prior", "0.3", "--out-model", p(&model)]);
    let text = fs::read_to_string(&model).unwrap();
    assert!(text.contains("systems = s1 s2 s3") && text.contains("prior = 0.3"), "{text}");
    let fused = dir.join("fused.txt");
    run_ok(&["fuse", "apply", "--model", p(&model), "--matrix", p(&m), "--out", p(&fused)]);
    assert_eq!(fs::read_to_string(&fused).unwrap().lines().count(), 60);

    let avg = dir.join("avg.txt");
    run_ok(&["fuse", "average", "--matrix", p(&m), "--out", p(&avg), "--full-precision"]);
    let first = fs::read_to_string(&avg).unwrap();
    let row0: Vec<f64> = fs::read_to_string(&m)
        .unwrap()
        .lines()
        .nth(1)
        .unwrap()
        .split(' ')
        .skip(1)
        .map(|v| v.parse().unwrap())
        .collect();
    let v0: f64 = first.lines().next().unwrap().split(' ').nth(1).unwrap().parse().unwrap();
    assert!((v0 - row0.iter().sum::<f64>() / 3.0).abs() < 1e-12);
    run_ok(&["fuse", "average", "--matrix", p(&m), "--out", p(&avg), "--normalize", "--labels", p(&l)]);
}

#[test]
fn oracle_sweep_is_flat_for_identical_columns_and_reproducible() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let asv = simple_asv();
    let (ap, as_) = (dir.join("asv_p.txt"), dir.join("asv_s.txt"));
    write_set(&asv, &ap, &as_);
    for identical in [true, false] {
        let (m, l) = matrix_fixture(dir, identical);
        let mut outs = Vec::new();
        for (k, jobs) in ["1", "1", "2"].iter().enumerate() {
            let out = dir.join(format!("sweep{k}.csv"));
            run_ok(&[
                "--jobs",
                jobs,
                "oracle-sweep",
                "--matrix",
                p(&m),
                "--labels",
                p(&l),
                "--asv-scores",
                p(&as_),
                "--asv-protocol",
                p(&ap),
                "--k-max",
                "3",
                "--out",
                p(&out),
            ]);
            outs.push(fs::read(&out).unwrap());
        }
        assert_eq!(outs[0], outs[1]);
        assert_eq!(outs[0], outs[2]);
        let csv = String::from_utf8(outs[0].clone()).unwrap();
        assert_eq!(csv.lines().next(), Some("k,subset,min_tdcf"));
        assert_eq!(csv.lines().count(), 1 + 3 + 2);
        let vals: Vec<f64> = csv.lines().skip(1).map(|r| r.rsplit(',').next().unwrap().parse().unwrap()).collect();
        if identical {
            assert!(vals.iter().all(|v| (v - vals[0]).abs() < 1e-9), "{csv}");
        }
        let best_single = vals[..3].iter().copied().fold(f64::INFINITY, f64::min);
        assert!(vals[3] <= best_single + 1e-6 && vals[4] <= vals[3] + 1e-6, "{csv}");
    }
}
