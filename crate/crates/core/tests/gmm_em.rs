mod common;

use common::{normal, rng};
use rand::Rng;
use spoofeval::gmm::VarianceFloor;
use spoofeval::{llr_score, train_em, EmConfig, FeatureMatrix, Gmm};

fn clusters(seed: u64, per: usize) -> FeatureMatrix<f64> {
    let mut r = rng(seed);
    let mut data = Vec::with_capacity(per * 4);
    for center in [-5.0, 5.0] {
        for _ in 0..per {
            data.extend(normal(&mut r, center, 1.0, 2));
        }
    }
    FeatureMatrix::new(2 * per, 2, data).unwrap()
}

#[test]
fn em_is_monotone_and_recovers_means() {
    let pool = clusters(100, 5000);
    for seed in 0..10 {
        let cfg = EmConfig { max_iters: 30, rel_tol: 0.0, seed, ..EmConfig::default() };
        let out = train_em(&pool, 2, &cfg).unwrap();
        for w in out.trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-8 * w[0].abs(), "seed {seed}: {:?}", out.trace);
        }
        let m = &out.model;
        let total: f64 = m.weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-10);
        let mut means: Vec<f64> = (0..2).map(|k| m.mean(k)[0]).collect();
        means.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((means[0] + 5.0).abs() < 0.05 && (means[1] - 5.0).abs() < 0.05, "seed {seed}: {means:?}");
    }
}

#[test]
fn one_iteration_gives_trace_of_two() {
    let pool = clusters(1, 100);
    let out = train_em(&pool, 3, &EmConfig { max_iters: 1, ..EmConfig::default() }).unwrap();
    assert_eq!(out.trace.len(), 2);
}

#[test]
fn variance_floor_holds() {
    let mut r = rng(8);
    // one tight cluster forces the floor on its component
    let mut data: Vec<f64> = (0..200).map(|_| 1.0 + 1e-9 * r.random::<f64>()).collect();
    data.extend(normal(&mut r, 10.0, 3.0, 200));
    let pool = FeatureMatrix::new(400, 1, data).unwrap();
    let global = {
        let mean = pool.as_slice().iter().sum::<f64>() / 400.0;
        pool.as_slice().iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 400.0
    };
    let out = train_em(&pool, 4, &EmConfig { seed: 2, max_iters: 20, ..EmConfig::default() }).unwrap();
    for k in 0..4 {
        assert!(out.model.variance(k)[0] >= 1e-3 * global * (1.0 - 1e-12));
        assert!(out.model.weights()[k] > 0.0);
    }
    let ll = out.model.avg_log_likelihood(&pool).unwrap();
    assert!(ll.is_finite());
    let abs = train_em(&pool, 2, &EmConfig { var_floor: VarianceFloor::Absolute(0.5), ..EmConfig::default() }).unwrap();
    assert!((0..2).all(|k| abs.model.variance(k)[0] >= 0.5));
}

#[test]
fn same_seed_same_bytes_any_thread_count() {
    let pool = clusters(3, 3000);
    let cfg = EmConfig { seed: 9, ..EmConfig::default() };
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let multi = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = single.install(|| train_em(&pool, 8, &cfg).unwrap().model.to_bytes());
    let b = multi.install(|| train_em(&pool, 8, &cfg).unwrap().model.to_bytes());
    assert_eq!(a, b);
    let other = train_em(&pool, 8, &EmConfig { seed: 10, ..cfg }).unwrap().model.to_bytes();
    assert_ne!(a, other);
}

#[test]
fn sampled_bona_utterances_score_positive() {
    let bona = Gmm::new(vec![0.4f64, 0.6], vec![0.0, 0.0, 2.0, 1.0], vec![1.0, 0.5, 0.7, 1.0]).unwrap();
    let spoof = Gmm::new(vec![1.0], vec![6.0, -4.0], vec![1.0, 1.0]).unwrap();
    let mut r = rng(77);
    for _ in 0..100 {
        let mut data = Vec::new();
        for _ in 0..50 {
            let k = usize::from(r.random::<f64>() >= 0.4);
            for d in 0..2 {
                let z = normal(&mut r, 0.0, 1.0, 1)[0];
                data.push(bona.mean(k)[d] + bona.variance(k)[d].sqrt() * z);
            }
        }
        let utt = FeatureMatrix::new(50, 2, data).unwrap();
        assert!(llr_score(&bona, &spoof, &utt).unwrap() > 0.0);
    }
}
