//! Diagonal-covariance Gaussian mixtures trained by EM, and log-likelihood
//! ratio scoring between a bona fide and a spoof model.

use std::io::{Read, Write};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frontends::features::{read_u32, u32_of};
use crate::frontends::FeatureMatrix;
use crate::scalar::Real;

const GMM_MAGIC: &[u8; 4] = b"GMM1";

/// Frames per E-step work unit. Fixed so the reduction order, and hence the
/// trained model, does not depend on the thread count.
const CHUNK_FRAMES: usize = 512;

/// Chunks reduced per batch, bounding the memory held by partial statistics.
const CHUNKS_PER_BATCH: usize = 64;

/// Smallest mixture weight kept after renormalization.
const MIN_WEIGHT: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gmm<T> {
    components: usize,
    dims: usize,
    weights: Vec<T>,
    means: Vec<T>,
    variances: Vec<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum VarianceFloor {
    /// Fraction of the per-dimension variance of the training pool.
    RelativeToGlobal(f64),
    Absolute(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmConfig {
    pub max_iters: usize,
    pub rel_tol: f64,
    pub var_floor: VarianceFloor,
    pub seed: u64,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self { max_iters: 10, rel_tol: 1e-5, var_floor: VarianceFloor::RelativeToGlobal(1e-3), seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmOutcome<T> {
    pub model: Gmm<T>,
    /// Average log-likelihood per frame, before the first iteration and after
    /// each completed one.
    pub trace: Vec<T>,
}

impl<T: Real> Gmm<T> {
    pub fn new(weights: Vec<T>, means: Vec<T>, variances: Vec<T>) -> Result<Self> {
        let components = weights.len();
        if components == 0 {
            return Err(Error::InvalidArgument("mixture needs at least one component".into()));
        }
        let dims = means.len() / components;
        if dims == 0 || means.len() != components * dims {
            return Err(Error::DimensionMismatch { expected: components * dims.max(1), found: means.len() });
        }
        if variances.len() != means.len() {
            return Err(Error::DimensionMismatch { expected: means.len(), found: variances.len() });
        }
        let model = Self { components, dims, weights, means, variances };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        if self.weights.iter().chain(&self.means).chain(&self.variances).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("mixture parameters".into()));
        }
        if self.weights.iter().any(|&w| w <= T::zero()) {
            return Err(Error::InvalidArgument("mixture weights must be positive".into()));
        }
        let total: f64 = self.weights.iter().map(|w| w.as_f64()).sum();
        let tol = 1e-10_f64.max(T::epsilon().as_f64() * self.components as f64 * 4.0);
        if (total - 1.0).abs() > tol {
            return Err(Error::InvalidArgument(format!("mixture weights sum to {total}")));
        }
        if self.variances.iter().any(|&v| v <= T::zero()) {
            return Err(Error::InvalidArgument("variances must be positive".into()));
        }
        Ok(())
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn mean(&self, k: usize) -> &[T] {
        &self.means[k * self.dims..(k + 1) * self.dims]
    }

    pub fn variance(&self, k: usize) -> &[T] {
        &self.variances[k * self.dims..(k + 1) * self.dims]
    }

    fn scorer(&self) -> Scorer<'_, T> {
        let half = T::lit(0.5);
        let log_2pi = T::lit((2.0 * std::f64::consts::PI).ln());
        let consts = (0..self.components)
            .map(|k| {
                let log_det: T = self.variance(k).iter().map(|v| v.ln()).sum();
                self.weights[k].ln() - half * (T::from_count(self.dims) * log_2pi + log_det)
            })
            .collect();
        let inv_var = self.variances.iter().map(|&v| T::one() / v).collect();
        Scorer { model: self, consts, inv_var }
    }

    /// Mean over frames of `ln sum_k w_k N(x_t; mu_k, sigma_k^2)`.
    pub fn avg_log_likelihood(&self, features: &FeatureMatrix<T>) -> Result<T> {
        if features.dims() != self.dims {
            return Err(Error::DimensionMismatch { expected: self.dims, found: features.dims() });
        }
        if features.frames() == 0 {
            return Err(Error::InvalidArgument("no frames to score".into()));
        }
        let scorer = self.scorer();
        let mut buf = vec![T::zero(); self.components];
        let total: T = features.rows().map(|x| scorer.frame_log_likelihood(x, &mut buf)).sum();
        Ok(total / T::from_count(features.frames()))
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(GMM_MAGIC)?;
        w.write_all(&u32_of(self.components)?.to_le_bytes())?;
        w.write_all(&u32_of(self.dims)?.to_le_bytes())?;
        for v in self.weights.iter().chain(&self.means).chain(&self.variances) {
            w.write_all(&v.as_f64().to_le_bytes())?;
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_binary(&mut out).expect("in-memory write");
        out
    }

    /// Reads a `GMM1` container and validates the mixture invariants.
    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != GMM_MAGIC {
            return Err(Error::Format("bad mixture magic".into()));
        }
        let k = read_u32(&mut r)? as usize;
        let d = read_u32(&mut r)? as usize;
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        let expected = 8 * (k + 2 * k * d);
        if bytes.len() != expected {
            return Err(Error::Format(format!("payload of {} bytes, expected {expected}", bytes.len())));
        }
        let mut values = bytes.chunks_exact(8).map(|c| T::lit(f64::from_le_bytes(c.try_into().expect("8 bytes"))));
        let weights = values.by_ref().take(k).collect();
        let means = values.by_ref().take(k * d).collect();
        let variances = values.collect();
        Self::new(weights, means, variances)
    }
}

struct Scorer<'a, T> {
    model: &'a Gmm<T>,
    consts: Vec<T>,
    inv_var: Vec<T>,
}

impl<T: Real> Scorer<'_, T> {
    /// Fills `log_joint[k] = ln w_k + ln N(x; k)` and returns the log-sum-exp.
    fn frame_log_likelihood(&self, x: &[T], log_joint: &mut [T]) -> T {
        let d = self.model.dims;
        let half = T::lit(0.5);
        let mut max = T::neg_infinity();
        for (k, slot) in log_joint.iter_mut().enumerate() {
            let mean = &self.model.means[k * d..(k + 1) * d];
            let inv = &self.inv_var[k * d..(k + 1) * d];
            let mut maha = T::zero();
            for ((&xi, &mi), &iv) in x.iter().zip(mean).zip(inv) {
                let diff = xi - mi;
                maha += diff * diff * iv;
            }
            *slot = self.consts[k] - half * maha;
            max = max.max(*slot);
        }
        let sum: T = log_joint.iter().map(|&v| (v - max).exp()).sum();
        max + sum.ln()
    }
}

/// Zeroth, first and second order statistics plus total log-likelihood.
struct SufficientStats<T> {
    occupancy: Vec<T>,
    first: Vec<T>,
    second: Vec<T>,
    log_likelihood: T,
}

impl<T: Real> SufficientStats<T> {
    fn zeros(k: usize, d: usize) -> Self {
        Self {
            occupancy: vec![T::zero(); k],
            first: vec![T::zero(); k * d],
            second: vec![T::zero(); k * d],
            log_likelihood: T::zero(),
        }
    }

    fn accumulate(&mut self, other: &Self) {
        self.log_likelihood += other.log_likelihood;
        for (a, b) in self.occupancy.iter_mut().zip(&other.occupancy) {
            *a += *b;
        }
        for (a, b) in self.first.iter_mut().zip(&other.first) {
            *a += *b;
        }
        for (a, b) in self.second.iter_mut().zip(&other.second) {
            *a += *b;
        }
    }
}

fn chunk_stats<T: Real>(scorer: &Scorer<'_, T>, rows: &[T]) -> SufficientStats<T> {
    let (k, d) = (scorer.model.components, scorer.model.dims);
    let mut stats = SufficientStats::zeros(k, d);
    let mut log_joint = vec![T::zero(); k];
    for x in rows.chunks_exact(d) {
        let ll = scorer.frame_log_likelihood(x, &mut log_joint);
        stats.log_likelihood += ll;
        for (c, &lj) in log_joint.iter().enumerate() {
            let gamma = (lj - ll).exp();
            if gamma == T::zero() {
                continue;
            }
            stats.occupancy[c] += gamma;
            let first = &mut stats.first[c * d..(c + 1) * d];
            let second = &mut stats.second[c * d..(c + 1) * d];
            for ((f, s), &xi) in first.iter_mut().zip(second.iter_mut()).zip(x) {
                let gx = gamma * xi;
                *f += gx;
                *s += gx * xi;
            }
        }
    }
    stats
}

/// E-step over the pool; chunk statistics are summed in chunk order.
fn expectation<T: Real>(model: &Gmm<T>, pool: &FeatureMatrix<T>) -> SufficientStats<T> {
    let scorer = model.scorer();
    let d = model.dims;
    let mut total = SufficientStats::zeros(model.components, d);
    let chunks: Vec<&[T]> = pool.as_slice().chunks(CHUNK_FRAMES * d).collect();
    for batch in chunks.chunks(CHUNKS_PER_BATCH) {
        let partial: Vec<SufficientStats<T>> = batch.par_iter().map(|rows| chunk_stats(&scorer, rows)).collect();
        for p in &partial {
            total.accumulate(p);
        }
    }
    total
}

fn maximization<T: Real>(model: &Gmm<T>, stats: &SufficientStats<T>, floor: &[T], n_frames: usize) -> Gmm<T> {
    let (k, d) = (model.components, model.dims);
    let mut means = model.means.clone();
    let mut variances = model.variances.clone();
    let min_weight = T::lit(MIN_WEIGHT);
    let mut weights: Vec<T> = stats.occupancy.iter().map(|&n| (n / T::from_count(n_frames)).max(min_weight)).collect();
    let total: T = weights.iter().copied().sum();
    for w in &mut weights {
        *w /= total;
    }
    for c in 0..k {
        let occ = stats.occupancy[c];
        // a component with no support keeps its previous shape
        if !(occ > T::min_positive_value()) {
            continue;
        }
        for j in 0..d {
            let mean = stats.first[c * d + j] / occ;
            let var = stats.second[c * d + j] / occ - mean * mean;
            means[c * d + j] = mean;
            variances[c * d + j] = var.max(floor[j]);
        }
    }
    Gmm { components: k, dims: d, weights, means, variances }
}

fn global_moments<T: Real>(pool: &FeatureMatrix<T>) -> (Vec<T>, Vec<T>) {
    let d = pool.dims();
    let n = T::from_count(pool.frames());
    let mut mean = vec![T::zero(); d];
    for row in pool.rows() {
        for (m, &x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut var = vec![T::zero(); d];
    for row in pool.rows() {
        for ((v, &m), &x) in var.iter_mut().zip(&mean).zip(row) {
            *v += (x - m) * (x - m);
        }
    }
    for v in &mut var {
        *v /= n;
    }
    (mean, var)
}

/// Trains a `k`-component diagonal mixture on pooled frames.
///
/// Means start at `k` distinct frames drawn with `cfg.seed`; weights start
/// uniform and variances at the global per-dimension variance.
pub fn train_em<T: Real>(pool: &FeatureMatrix<T>, k: usize, cfg: &EmConfig) -> Result<EmOutcome<T>> {
    if k == 0 {
        return Err(Error::InvalidArgument("component count must be >= 1".into()));
    }
    if cfg.max_iters == 0 {
        return Err(Error::InvalidArgument("max_iters must be >= 1".into()));
    }
    if !(cfg.rel_tol >= 0.0) {
        return Err(Error::InvalidArgument("rel_tol must be >= 0".into()));
    }
    let (n, d) = (pool.frames(), pool.dims());
    if d == 0 {
        return Err(Error::InvalidArgument("features have no dimensions".into()));
    }
    if n < k {
        return Err(Error::TooFewFrames { needed: k, got: n });
    }
    let (_, global_var) = global_moments(pool);
    if let Some(j) = global_var.iter().position(|&v| !(v > T::zero())) {
        return Err(Error::ZeroVariance(j));
    }
    let floor: Vec<T> = match cfg.var_floor {
        VarianceFloor::RelativeToGlobal(r) => global_var.iter().map(|&v| v * T::lit(r)).collect(),
        VarianceFloor::Absolute(a) => vec![T::lit(a); d],
    };
    if floor.iter().any(|&f| !(f > T::zero())) {
        return Err(Error::InvalidArgument("variance floor must be positive".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let picks = sample(&mut rng, n, k);
    let mut means = Vec::with_capacity(k * d);
    for idx in picks.iter() {
        means.extend_from_slice(pool.row(idx));
    }
    let variances: Vec<T> = (0..k).flat_map(|_| global_var.iter().zip(&floor).map(|(&v, &f)| v.max(f))).collect();
    let mut model = Gmm { components: k, dims: d, weights: vec![T::one() / T::from_count(k); k], means, variances };

    let n_t = T::from_count(n);
    let mut stats = expectation(&model, pool);
    let mut trace = vec![stats.log_likelihood / n_t];
    for _ in 0..cfg.max_iters {
        model = maximization(&model, &stats, &floor, n);
        stats = expectation(&model, pool);
        let ll = stats.log_likelihood / n_t;
        let prev = *trace.last().expect("non-empty trace");
        trace.push(ll);
        let gain = (ll - prev).as_f64() / prev.abs().as_f64().max(f64::MIN_POSITIVE);
        if gain < cfg.rel_tol {
            break;
        }
    }
    Ok(EmOutcome { model, trace })
}

/// `avg_ll(bona) - avg_ll(spoof)`; positive favours bona fide.
pub fn llr_score<T: Real>(bona: &Gmm<T>, spoof: &Gmm<T>, features: &FeatureMatrix<T>) -> Result<T> {
    Ok(bona.avg_log_likelihood(features)? - spoof.avg_log_likelihood(features)?)
}
