//! Score-level fusion of several countermeasure systems.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::{min_tdcf, TdcfCoeffs};
use crate::scalar::Real;
use crate::trialdata::{format_score, CmKey, Precision, TrialId, TrialRecord};

/// Scores of `N` systems over the same `M` trials, row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreMatrix<T> {
    systems: Vec<String>,
    trials: Vec<TrialId>,
    values: Vec<T>,
}

impl<T: Real> ScoreMatrix<T> {
    pub fn new(systems: Vec<String>, trials: Vec<TrialId>, values: Vec<T>) -> Result<Self> {
        if systems.is_empty() {
            return Err(Error::InvalidArgument("score matrix needs at least one system".into()));
        }
        if values.len() != systems.len() * trials.len() {
            return Err(Error::DimensionMismatch { expected: systems.len() * trials.len(), found: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "score of trial {} in system {}",
                trials[i / systems.len()],
                systems[i % systems.len()]
            )));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = trials.iter().find(|t| !seen.insert(*t)) {
            return Err(Error::DuplicateTrial(dup.to_string()));
        }
        Ok(Self { systems, trials, values })
    }

    /// Builds a matrix from per-system columns sharing one trial order.
    pub fn from_columns(systems: Vec<String>, trials: Vec<TrialId>, columns: &[Vec<T>]) -> Result<Self> {
        if columns.len() != systems.len() {
            return Err(Error::DimensionMismatch { expected: systems.len(), found: columns.len() });
        }
        if let Some(c) = columns.iter().find(|c| c.len() != trials.len()) {
            return Err(Error::DimensionMismatch { expected: trials.len(), found: c.len() });
        }
        let values = (0..trials.len()).flat_map(|i| columns.iter().map(move |c| c[i])).collect();
        Self::new(systems, trials, values)
    }

    pub fn systems(&self) -> &[String] {
        &self.systems
    }

    pub fn trials(&self) -> &[TrialId] {
        &self.trials
    }

    pub fn n_systems(&self) -> usize {
        self.systems.len()
    }

    pub fn n_trials(&self) -> usize {
        self.trials.len()
    }

    pub fn row(&self, i: usize) -> &[T] {
        let n = self.n_systems();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[T]> + '_ {
        self.values.chunks_exact(self.n_systems())
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        self.rows().map(|r| r[j]).collect()
    }

    /// Matrix restricted to the given columns, in the given order.
    pub fn select(&self, columns: &[usize]) -> Result<Self> {
        if let Some(&j) = columns.iter().find(|&&j| j >= self.n_systems()) {
            return Err(Error::InvalidArgument(format!("no system column {j}")));
        }
        let systems = columns.iter().map(|&j| self.systems[j].clone()).collect();
        let values = self.rows().flat_map(|r| columns.iter().map(move |&j| r[j])).collect();
        Self::new(systems, self.trials.clone(), values)
    }

    /// Parses `trial_id sys1 sys2 ...` followed by one row per trial.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "missing header".into() })?;
        let mut head = header.split_whitespace();
        if head.next() != Some("trial_id") {
            return Err(Error::Parse { line: hline, msg: "header must start with `trial_id`".into() });
        }
        let systems: Vec<String> = head.map(str::to_owned).collect();
        if systems.is_empty() {
            return Err(Error::Parse { line: hline, msg: "header names no systems".into() });
        }
        let mut trials = Vec::new();
        let mut values = Vec::new();
        for (line, content) in lines {
            let mut fields = content.split_whitespace();
            let id = fields.next().expect("non-empty line");
            trials.push(TrialId::new(id).map_err(|e| Error::Parse { line, msg: e.to_string() })?);
            let before = values.len();
            for tok in fields {
                let v: f64 = tok.parse().map_err(|_| Error::Parse { line, msg: format!("bad score `{tok}`") })?;
                if !v.is_finite() {
                    return Err(Error::Parse { line, msg: format!("non-finite score `{tok}`") });
                }
                values.push(T::lit(v));
            }
            if values.len() - before != systems.len() {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected {} scores, found {}", systems.len(), values.len() - before),
                });
            }
        }
        Self::new(systems, trials, values).map_err(|e| match e {
            Error::DuplicateTrial(id) => Error::Parse { line: 0, msg: format!("duplicate trial {id}") },
            other => other,
        })
    }

    pub fn to_text(&self, precision: Precision) -> String {
        let mut out = String::from("trial_id");
        for s in &self.systems {
            out.push(' ');
            out.push_str(s);
        }
        out.push('\n');
        for (id, row) in self.trials.iter().zip(self.rows()) {
            out.push_str(id.as_str());
            for v in row {
                out.push(' ');
                out.push_str(&format_score(v.as_f64(), precision));
            }
            out.push('\n');
        }
        out
    }

    /// CM keys for each row, looked up by trial id in a protocol covering
    /// exactly the same trials.
    pub fn labels_from(&self, protocol: &[TrialRecord<CmKey>]) -> Result<Vec<CmKey>> {
        let by_id: HashMap<&TrialId, CmKey> = protocol.iter().map(|r| (&r.trial_id, r.key)).collect();
        let missing: Vec<String> =
            self.trials.iter().filter(|t| !by_id.contains_key(t)).take(10).map(|t| t.to_string()).collect();
        if !missing.is_empty() {
            let count = self.trials.iter().filter(|t| !by_id.contains_key(t)).count();
            return Err(Error::UnmatchedScores { count, first: missing });
        }
        if by_id.len() != self.trials.len() {
            let rows: std::collections::HashSet<&TrialId> = self.trials.iter().collect();
            let absent: Vec<&TrialId> = protocol.iter().map(|r| &r.trial_id).filter(|t| !rows.contains(t)).collect();
            return Err(Error::MissingScores {
                count: absent.len(),
                first: absent.iter().take(10).map(|t| t.to_string()).collect(),
            });
        }
        Ok(self.trials.iter().map(|t| by_id[t]).collect())
    }
}

/// Divides every score by the sample standard deviation of the bona fide
/// subset.
pub fn normalize_by_bonafide_std<T: Real>(column: &[T], bona_mask: &[bool]) -> Result<Vec<T>> {
    if column.len() != bona_mask.len() {
        return Err(Error::DimensionMismatch { expected: column.len(), found: bona_mask.len() });
    }
    let bona: Vec<f64> = column.iter().zip(bona_mask).filter(|(_, &m)| m).map(|(v, _)| v.as_f64()).collect();
    if bona.len() < 2 {
        return Err(Error::ZeroBonafideVariance);
    }
    let mean = bona.iter().sum::<f64>() / bona.len() as f64;
    let var = bona.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (bona.len() - 1) as f64;
    if !(var > 0.0) {
        return Err(Error::ZeroBonafideVariance);
    }
    let std = T::lit(var.sqrt());
    Ok(column.iter().map(|&v| v / std).collect())
}

/// Row-wise arithmetic mean.
pub fn average_fuse<T: Real>(matrix: &ScoreMatrix<T>) -> Vec<T> {
    let n = T::from_count(matrix.n_systems());
    matrix.rows().map(|r| r.iter().copied().sum::<T>() / n).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FusionModel<T> {
    pub systems: Vec<String>,
    pub weights: Vec<T>,
    pub bias: T,
    pub prior: T,
}

impl<T: Real> FusionModel<T> {
    /// Linear fused score `w . s + b` for every row.
    pub fn apply(&self, matrix: &ScoreMatrix<T>) -> Result<Vec<T>> {
        if matrix.n_systems() != self.weights.len() {
            return Err(Error::DimensionMismatch { expected: self.weights.len(), found: matrix.n_systems() });
        }
        Ok(matrix.rows().map(|r| dot(&self.weights, r) + self.bias).collect())
    }

    pub fn to_text(&self) -> String {
        let join = |vals: &mut dyn Iterator<Item = String>| vals.collect::<Vec<_>>().join(" ");
        let mut out = String::new();
        let _ = writeln!(out, "systems = {}", self.systems.join(" "));
        let _ = writeln!(out, "weights = {}", join(&mut self.weights.iter().map(|w| format!("{:?}", w.as_f64()))));
        let _ = writeln!(out, "bias = {:?}", self.bias.as_f64());
        let _ = writeln!(out, "prior = {:?}", self.prior.as_f64());
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut fields: HashMap<&str, (usize, &str)> = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or(Error::Parse { line: i + 1, msg: "expected `key = value`".into() })?;
            let key = key.trim();
            if !matches!(key, "systems" | "weights" | "bias" | "prior") {
                return Err(Error::Parse { line: i + 1, msg: format!("unknown key `{key}`") });
            }
            if fields.insert(key, (i + 1, value.trim())).is_some() {
                return Err(Error::Parse { line: i + 1, msg: format!("duplicate key `{key}`") });
            }
        }
        let get = |key: &str| fields.get(key).copied().ok_or(Error::Format(format!("fusion model lacks `{key}`")));
        let number = |(line, tok): (usize, &str)| -> Result<T> {
            let v: f64 = tok.parse().map_err(|_| Error::Parse { line, msg: format!("bad number `{tok}`") })?;
            if !v.is_finite() {
                return Err(Error::Parse { line, msg: format!("non-finite `{tok}`") });
            }
            Ok(T::lit(v))
        };
        let systems: Vec<String> = get("systems")?.1.split_whitespace().map(str::to_owned).collect();
        let (wline, wtext) = get("weights")?;
        let weights = wtext.split_whitespace().map(|t| number((wline, t))).collect::<Result<Vec<T>>>()?;
        if weights.len() != systems.len() || weights.is_empty() {
            return Err(Error::Parse {
                line: wline,
                msg: format!("{} weights for {} systems", weights.len(), systems.len()),
            });
        }
        let bias = number(get("bias")?)?;
        let (pline, ptext) = get("prior")?;
        let prior = number((pline, ptext))?;
        if !(prior > T::zero() && prior < T::one()) {
            return Err(Error::Parse { line: pline, msg: "prior must lie in (0, 1)".into() });
        }
        Ok(Self { systems, weights, bias, prior })
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LrOptions {
    /// Effective prior of the bona fide class.
    pub prior: f64,
    pub l2: f64,
    pub max_iters: usize,
    pub grad_tol: f64,
}

impl Default for LrOptions {
    fn default() -> Self {
        Self { prior: 0.5, l2: 0.0, max_iters: 200, grad_tol: 1e-8 }
    }
}

impl LrOptions {
    fn validate(&self) -> Result<()> {
        if !(self.prior > 0.0 && self.prior < 1.0) {
            return Err(Error::InvalidArgument(format!("prior {} outside (0, 1)", self.prior)));
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(Error::InvalidArgument("l2 penalty must be finite and >= 0".into()));
        }
        if self.max_iters == 0 || !(self.grad_tol > 0.0) {
            return Err(Error::InvalidArgument("need max_iters >= 1 and grad_tol > 0".into()));
        }
        Ok(())
    }
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Training problem in double precision with per-row class weights.
struct LrProblem {
    n: usize,
    rows: Vec<f64>,
    positive: Vec<bool>,
    class_weight: [f64; 2],
    l2: f64,
}

impl LrProblem {
    fn new<T: Real>(matrix: &ScoreMatrix<T>, labels: &[CmKey], prior: f64, l2: f64) -> Result<Self> {
        if labels.len() != matrix.n_trials() {
            return Err(Error::DimensionMismatch { expected: matrix.n_trials(), found: labels.len() });
        }
        let positive: Vec<bool> = labels.iter().map(|k| *k == CmKey::BonaFide).collect();
        let n_bona = positive.iter().filter(|&&p| p).count();
        let n_spoof = positive.len() - n_bona;
        if n_bona == 0 {
            return Err(Error::EmptyClass("bona fide"));
        }
        if n_spoof == 0 {
            return Err(Error::EmptyClass("spoof"));
        }
        Ok(Self {
            n: matrix.n_systems(),
            rows: matrix.values.iter().map(|v| v.as_f64()).collect(),
            positive,
            class_weight: [(1.0 - prior) / n_spoof as f64, prior / n_bona as f64],
            l2,
        })
    }

    fn params(&self) -> usize {
        self.n + 1
    }

    fn value(&self, theta: &[f64]) -> f64 {
        let (w, b) = theta.split_at(self.n);
        let data: f64 = self
            .rows
            .chunks_exact(self.n)
            .zip(&self.positive)
            .map(|(s, &pos)| {
                let z = w.iter().zip(s).map(|(a, x)| a * x).sum::<f64>() + b[0];
                self.class_weight[pos as usize] * softplus(if pos { -z } else { z })
            })
            .sum();
        data + 0.5 * self.l2 * w.iter().map(|v| v * v).sum::<f64>()
    }

    /// Objective, gradient and (optionally) Hessian, row-major.
    fn evaluate(&self, theta: &[f64], hessian: bool) -> (f64, Vec<f64>, Vec<f64>) {
        let p = self.params();
        let (w, b) = theta.split_at(self.n);
        let mut value = 0.0;
        let mut grad = vec![0.0; p];
        let mut hess = if hessian { vec![0.0; p * p] } else { Vec::new() };
        let mut x = vec![1.0; p];
        for (s, &pos) in self.rows.chunks_exact(self.n).zip(&self.positive) {
            x[..self.n].copy_from_slice(s);
            let z = w.iter().zip(s).map(|(a, v)| a * v).sum::<f64>() + b[0];
            let cw = self.class_weight[pos as usize];
            let (loss, slope) = if pos { (softplus(-z), -sigmoid(-z)) } else { (softplus(z), sigmoid(z)) };
            value += cw * loss;
            let g = cw * slope;
            for (gi, xi) in grad.iter_mut().zip(&x) {
                *gi += g * xi;
            }
            if hessian {
                let h = cw * sigmoid(z) * sigmoid(-z);
                for i in 0..p {
                    let hx = h * x[i];
                    for j in 0..=i {
                        hess[i * p + j] += hx * x[j];
                    }
                }
            }
        }
        for i in 0..self.n {
            value += 0.5 * self.l2 * w[i] * w[i];
            grad[i] += self.l2 * w[i];
        }
        if hessian {
            for i in 0..p {
                if i < self.n {
                    hess[i * p + i] += self.l2;
                }
                for j in 0..i {
                    hess[j * p + i] = hess[i * p + j];
                }
            }
        }
        (value, grad, hess)
    }
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Solves `(A + mu I) x = rhs` by Cholesky; `None` if not positive definite.
fn solve_damped(a: &[f64], rhs: &[f64], mu: f64) -> Option<Vec<f64>> {
    let p = rhs.len();
    let mut l = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..=i {
            let mut sum = a[i * p + j] + if i == j { mu } else { 0.0 };
            for k in 0..j {
                sum -= l[i * p + k] * l[j * p + k];
            }
            if i == j {
                if !(sum > 0.0) {
                    return None;
                }
                l[i * p + i] = sum.sqrt();
            } else {
                l[i * p + j] = sum / l[j * p + j];
            }
        }
    }
    let mut y = vec![0.0; p];
    for i in 0..p {
        let s: f64 = (0..i).map(|k| l[i * p + k] * y[k]).sum();
        y[i] = (rhs[i] - s) / l[i * p + i];
    }
    let mut x = vec![0.0; p];
    for i in (0..p).rev() {
        let s: f64 = (i + 1..p).map(|k| l[k * p + i] * x[k]).sum();
        x[i] = (y[i] - s) / l[i * p + i];
    }
    Some(x)
}

/// Prior-weighted cross-entropy objective and its gradient at `(w, b)`.
///
/// ```text
/// f = prior/Nb sum_bona softplus(-z) + (1-prior)/Ns sum_spoof softplus(z) + l2/2 |w|^2
/// ```
///
/// with `z = w . s + b`. The gradient lists the weights first, then the bias.
pub fn lr_objective<T: Real>(
    matrix: &ScoreMatrix<T>,
    labels: &[CmKey],
    prior: f64,
    l2: f64,
    weights: &[f64],
    bias: f64,
) -> Result<(f64, Vec<f64>)> {
    let problem = LrProblem::new(matrix, labels, prior, l2)?;
    if weights.len() != problem.n {
        return Err(Error::DimensionMismatch { expected: problem.n, found: weights.len() });
    }
    let theta: Vec<f64> = weights.iter().copied().chain([bias]).collect();
    let (value, grad, _) = problem.evaluate(&theta, false);
    Ok((value, grad))
}

/// Logistic-regression fusion from the fixed start `w = 0, b = logit(prior)`.
pub fn train_lr<T: Real>(matrix: &ScoreMatrix<T>, labels: &[CmKey], opts: &LrOptions) -> Result<FusionModel<T>> {
    let start = vec![0.0; matrix.n_systems()];
    train_lr_from(matrix, labels, opts, &start, (opts.prior / (1.0 - opts.prior)).ln())
}

/// Logistic-regression fusion from an explicit starting point.
///
/// Damped Newton steps with Armijo backtracking, stopping once the largest
/// gradient component is below `opts.grad_tol`.
pub fn train_lr_from<T: Real>(
    matrix: &ScoreMatrix<T>,
    labels: &[CmKey],
    opts: &LrOptions,
    start_weights: &[f64],
    start_bias: f64,
) -> Result<FusionModel<T>> {
    opts.validate()?;
    let problem = LrProblem::new(matrix, labels, opts.prior, opts.l2)?;
    if start_weights.len() != problem.n {
        return Err(Error::DimensionMismatch { expected: problem.n, found: start_weights.len() });
    }
    let p = problem.params();
    let mut theta: Vec<f64> = start_weights.iter().copied().chain([start_bias]).collect();
    let finish = |theta: &[f64]| FusionModel {
        systems: matrix.systems().to_vec(),
        weights: theta[..problem.n].iter().map(|&w| T::lit(w)).collect(),
        bias: T::lit(theta[problem.n]),
        prior: T::lit(opts.prior),
    };
    for _ in 0..opts.max_iters {
        let (value, grad, hess) = problem.evaluate(&theta, true);
        if !value.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("fusion objective".into()));
        }
        let gnorm = max_norm(&grad);
        if gnorm < opts.grad_tol {
            return Ok(finish(&theta));
        }
        let scale = (0..p).map(|i| hess[i * p + i]).fold(0.0f64, f64::max).max(f64::MIN_POSITIVE);
        let neg_grad: Vec<f64> = grad.iter().map(|g| -g).collect();
        let mut mu = 1e-12 * scale;
        let mut accepted = false;
        while !accepted && mu < 1e12 * scale.max(1.0) {
            let Some(step) = solve_damped(&hess, &neg_grad, mu) else {
                mu *= 10.0;
                continue;
            };
            let slope: f64 = grad.iter().zip(&step).map(|(g, s)| g * s).sum();
            let mut t = 1.0;
            for _ in 0..50 {
                let trial: Vec<f64> = theta.iter().zip(&step).map(|(x, s)| x + t * s).collect();
                let trial_value = problem.value(&trial);
                let armijo = trial_value <= value + 1e-4 * t * slope;
                // near the optimum the decrease can drop below rounding; a
                // full step that shrinks the gradient is still progress
                let flat = t == 1.0
                    && trial_value <= value + 1e-12 * value.abs()
                    && max_norm(&problem.evaluate(&trial, false).1) < gnorm;
                if trial_value.is_finite() && (armijo || flat) {
                    theta = trial;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            mu = mu.max(1e-12 * scale) * 100.0;
        }
        if !accepted {
            return Err(Error::NoConvergence { iters: opts.max_iters, grad_norm: gnorm });
        }
    }
    let gnorm = max_norm(&problem.evaluate(&theta, false).1);
    if gnorm < opts.grad_tol {
        return Ok(finish(&theta));
    }
    Err(Error::NoConvergence { iters: opts.max_iters, grad_norm: gnorm })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow<T> {
    pub k: usize,
    /// Column indices in selection order.
    pub subset: Vec<usize>,
    pub min_tdcf: T,
}

fn split_by_label<T: Real>(scores: &[T], labels: &[CmKey]) -> (Vec<T>, Vec<T>) {
    let mut bona = Vec::new();
    let mut spoof = Vec::new();
    for (&s, &k) in scores.iter().zip(labels) {
        match k {
            CmKey::BonaFide => bona.push(s),
            CmKey::Spoof => spoof.push(s),
        }
    }
    (bona, spoof)
}

fn scores_min_tdcf<T: Real>(scores: &[T], labels: &[CmKey], coeffs: &TdcfCoeffs<T>) -> Result<T> {
    let (bona, spoof) = split_by_label(scores, labels);
    Ok(min_tdcf(&bona, &spoof, coeffs)?.min_tdcf_norm)
}

/// Oracle ensemble-size sweep by greedy forward selection.
///
/// The first `N` rows give every single system (`k = 1`). The greedy path
/// then starts from the best single system and, for `k = 2..=k_max`, adds
/// whichever remaining column gives the lowest fused min t-DCF, ties going
/// to the lower column index. Fusion weights are trained on `labels`
/// themselves. A step may also keep the previous fusion unchanged (zero
/// weight on the new column), so the reported curve never increases.
pub fn oracle_sweep<T: Real>(
    matrix: &ScoreMatrix<T>,
    labels: &[CmKey],
    coeffs: &TdcfCoeffs<T>,
    k_max: usize,
    opts: &LrOptions,
) -> Result<Vec<SweepRow<T>>> {
    let n = matrix.n_systems();
    if k_max < 1 || k_max > n {
        return Err(Error::InvalidArgument(format!("k_max {k_max} outside 1..={n}")));
    }
    if labels.len() != matrix.n_trials() {
        return Err(Error::DimensionMismatch { expected: matrix.n_trials(), found: labels.len() });
    }
    let singles = (0..n)
        .into_par_iter()
        .map(|j| scores_min_tdcf(&matrix.column(j), labels, coeffs))
        .collect::<Result<Vec<T>>>()?;
    let mut rows: Vec<SweepRow<T>> =
        singles.iter().enumerate().map(|(j, &v)| SweepRow { k: 1, subset: vec![j], min_tdcf: v }).collect();
    let best = (0..n).min_by(|&a, &b| singles[a].partial_cmp(&singles[b]).expect("finite").then(a.cmp(&b)));
    let mut chosen = vec![best.expect("n >= 1")];
    let mut current = singles[chosen[0]];
    for k in 2..=k_max {
        let remaining: Vec<usize> = (0..n).filter(|j| !chosen.contains(j)).collect();
        let candidates = remaining
            .par_iter()
            .map(|&j| {
                let mut subset = chosen.clone();
                subset.push(j);
                let sub = matrix.select(&subset)?;
                let model = train_lr(&sub, labels, opts)?;
                let refit = scores_min_tdcf(&model.apply(&sub)?, labels, coeffs)?;
                Ok((refit.min(current), refit, j))
            })
            .collect::<Result<Vec<(T, T, usize)>>>()?;
        let (value, _, j) = candidates
            .into_iter()
            .min_by(|a, b| {
                a.0.partial_cmp(&b.0).expect("finite").then(a.1.partial_cmp(&b.1).expect("finite")).then(a.2.cmp(&b.2))
            })
            .expect("at least one candidate");
        chosen.push(j);
        current = value;
        rows.push(SweepRow { k, subset: chosen.clone(), min_tdcf: value });
    }
    Ok(rows)
}

/// CSV with header `k,subset,min_tdcf`; subsets are `+`-joined system names.
pub fn sweep_csv<T: Real>(matrix: &ScoreMatrix<T>, rows: &[SweepRow<T>]) -> String {
    let mut out = String::from("k,subset,min_tdcf\n");
    for r in rows {
        let names: Vec<&str> = r.subset.iter().map(|&j| matrix.systems()[j].as_str()).collect();
        let _ = writeln!(out, "{},{},{:.6}", r.k, names.join("+"), r.min_tdcf.as_f64());
    }
    out
}
