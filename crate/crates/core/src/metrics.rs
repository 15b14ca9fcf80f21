//! Detection error curves, EER and the ASV-constrained tandem detection
//! cost function.
//!
//! Decision convention throughout: a trial is accepted (as bona fide, or as
//! target for ASV) iff `score >= threshold`. Higher scores are more
//! positive-like; no polarity detection is attempted.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{total_cmp, Real};
use crate::trialdata::{AsvKey, ScoreSet};

/// Priors and detection costs of the tandem system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostModel<T> {
    pub p_tar: T,
    pub p_non: T,
    pub p_spoof: T,
    pub c_miss: T,
    pub c_fa: T,
    pub c_fa_spoof: T,
}

impl<T: Real> CostModel<T> {
    pub fn new(p_tar: T, p_non: T, p_spoof: T, c_miss: T, c_fa: T, c_fa_spoof: T) -> Result<Self> {
        let model = Self { p_tar, p_non, p_spoof, c_miss, c_fa, c_fa_spoof };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        let priors = [self.p_tar, self.p_non, self.p_spoof];
        if priors.iter().any(|p| !(*p > T::zero() && *p < T::one())) {
            return Err(Error::InvalidArgument("priors must lie in (0, 1)".into()));
        }
        let sum = self.p_tar + self.p_non + self.p_spoof;
        if (sum - T::one()).abs().as_f64() > 1e-12_f64.max(T::epsilon().as_f64() * 4.0) {
            return Err(Error::InvalidArgument(format!("priors sum to {sum}, expected 1")));
        }
        if [self.c_miss, self.c_fa, self.c_fa_spoof].iter().any(|c| !(*c > T::zero()) || !c.is_finite()) {
            return Err(Error::InvalidArgument("costs must be positive".into()));
        }
        Ok(())
    }
}

impl<T: Real> Default for CostModel<T> {
    /// The challenge-style operating point: p_tar 0.9405, p_non 0.0095,
    /// p_spoof 0.05, C_miss 1, C_fa 10, C_fa,spoof 10.
    fn default() -> Self {
        Self {
            p_tar: T::lit(0.9405),
            p_non: T::lit(0.0095),
            p_spoof: T::lit(0.05),
            c_miss: T::one(),
            c_fa: T::lit(10.0),
            c_fa_spoof: T::lit(10.0),
        }
    }
}

/// ASV error rates at its fixed operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsvErrorRates<T> {
    pub p_miss: T,
    pub p_fa: T,
    pub p_fa_spoof: T,
}

impl<T: Real> AsvErrorRates<T> {
    pub fn new(p_miss: T, p_fa: T, p_fa_spoof: T) -> Result<Self> {
        let in_unit = |v: T| v >= T::zero() && v <= T::one();
        if !(in_unit(p_miss) && in_unit(p_fa) && in_unit(p_fa_spoof)) {
            return Err(Error::InvalidArgument("ASV error rates must lie in [0, 1]".into()));
        }
        Ok(Self { p_miss, p_fa, p_fa_spoof })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TdcfCoeffs<T> {
    pub c0: T,
    pub c1: T,
    pub c2: T,
}

impl<T: Real> TdcfCoeffs<T> {
    pub fn new(c0: T, c1: T, c2: T) -> Result<Self> {
        for (name, value) in [("C0", c0), ("C1", c1), ("C2", c2)] {
            if !value.is_finite() {
                return Err(Error::NonFinite(format!("coefficient {name}")));
            }
            if value < T::zero() {
                return Err(Error::NegativeCoefficient { name, value: value.as_f64() });
            }
        }
        let coeffs = Self { c0, c1, c2 };
        let default = coeffs.default_cost();
        if !(default > T::zero()) {
            return Err(Error::DegenerateCost(default.as_f64()));
        }
        Ok(coeffs)
    }

    /// Cost of a CM that accepts or rejects everything: `C0 + min(C1, C2)`.
    pub fn default_cost(&self) -> T {
        self.c0 + self.c1.min(self.c2)
    }

    /// Normalized cost of an error-free CM.
    pub fn asv_floor(&self) -> T {
        self.c0 / self.default_cost()
    }

    /// Normalized t-DCF at one CM operating point.
    #[inline]
    pub fn normalized(&self, p_miss_cm: T, p_fa_cm: T) -> T {
        (self.c0 + self.c1 * p_miss_cm + self.c2 * p_fa_cm) / self.default_cost()
    }
}

pub fn tdcf_coefficients<T: Real>(rates: &AsvErrorRates<T>, cost: &CostModel<T>) -> Result<TdcfCoeffs<T>> {
    let c0 = cost.p_tar * cost.c_miss * rates.p_miss + cost.p_non * cost.c_fa * rates.p_fa;
    let c1 = cost.p_tar * cost.c_miss - c0;
    let c2 = cost.p_spoof * cost.c_fa_spoof * rates.p_fa_spoof;
    TdcfCoeffs::new(c0, c1, c2)
}

/// Miss and false alarm rates as a function of the threshold.
///
/// Candidate thresholds are `-inf`, every distinct pooled score in ascending
/// order, and `+inf`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorCurve<T> {
    pub thresholds: Vec<T>,
    pub p_miss: Vec<T>,
    pub p_fa: Vec<T>,
}

impl<T: Real> ErrorCurve<T> {
    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = (T, T, T)> + '_ {
        self.thresholds.iter().zip(&self.p_miss).zip(&self.p_fa).map(|((&t, &m), &f)| (t, m, f))
    }
}

fn sorted_checked<T: Real>(scores: &[T], class: &'static str) -> Result<Vec<T>> {
    if scores.is_empty() {
        return Err(Error::EmptyClass(class));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite(format!("{class} scores")));
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(total_cmp);
    Ok(sorted)
}

pub fn error_curve<T: Real>(positive: &[T], negative: &[T]) -> Result<ErrorCurve<T>> {
    let pos = sorted_checked(positive, "positive")?;
    let neg = sorted_checked(negative, "negative")?;
    let n_pos = T::from_count(pos.len());
    let n_neg = T::from_count(neg.len());

    let mut pooled: Vec<T> = pos.iter().chain(&neg).copied().collect();
    pooled.sort_by(total_cmp);
    pooled.dedup();

    let cap = pooled.len() + 2;
    let mut curve = ErrorCurve {
        thresholds: Vec::with_capacity(cap),
        p_miss: Vec::with_capacity(cap),
        p_fa: Vec::with_capacity(cap),
    };
    curve.thresholds.push(T::neg_infinity());
    curve.p_miss.push(T::zero());
    curve.p_fa.push(T::one());

    // counts of scores strictly below the current threshold
    let (mut pos_below, mut neg_below) = (0usize, 0usize);
    for &tau in &pooled {
        while pos_below < pos.len() && pos[pos_below] < tau {
            pos_below += 1;
        }
        while neg_below < neg.len() && neg[neg_below] < tau {
            neg_below += 1;
        }
        curve.thresholds.push(tau);
        curve.p_miss.push(T::from_count(pos_below) / n_pos);
        curve.p_fa.push(T::from_count(neg.len() - neg_below) / n_neg);
    }

    curve.thresholds.push(T::infinity());
    curve.p_miss.push(T::one());
    curve.p_fa.push(T::zero());
    Ok(curve)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EerPoint<T> {
    pub eer: T,
    pub threshold: T,
}

/// Equal error rate of a curve.
///
/// Returns the first operating point where the two rates coincide, or the
/// linear interpolation between the two adjacent points that straddle the
/// crossing. When one of those points is an infinite sentinel the finite
/// neighbour is reported as the threshold.
pub fn eer<T: Real>(curve: &ErrorCurve<T>) -> EerPoint<T> {
    let diff = |i: usize| curve.p_miss[i] - curve.p_fa[i];
    // diff is non-decreasing from -1 to +1, so a crossing always exists
    let j = (0..curve.len()).find(|&i| diff(i) >= T::zero()).unwrap_or(curve.len() - 1);
    if diff(j) == T::zero() || j == 0 {
        return EerPoint { eer: curve.p_miss[j], threshold: curve.thresholds[j] };
    }
    let i = j - 1;
    let (d0, d1) = (diff(i), diff(j));
    let alpha = -d0 / (d1 - d0);
    let eer = curve.p_miss[i] + alpha * (curve.p_miss[j] - curve.p_miss[i]);
    let (t0, t1) = (curve.thresholds[i], curve.thresholds[j]);
    let threshold = if t0.is_infinite() {
        t1
    } else if t1.is_infinite() {
        t0
    } else {
        t0 + alpha * (t1 - t0)
    };
    EerPoint { eer, threshold }
}

/// EER of two score lists.
pub fn eer_of<T: Real>(positive: &[T], negative: &[T]) -> Result<EerPoint<T>> {
    Ok(eer(&error_curve(positive, negative)?))
}

/// Fraction of `scores` with `score >= threshold`.
pub fn accept_rate<T: Real>(scores: &[T], threshold: T) -> T {
    let accepted = scores.iter().filter(|&&s| s >= threshold).count();
    T::from_count(accepted) / T::from_count(scores.len())
}

/// Fraction of `scores` with `score < threshold`.
pub fn reject_rate<T: Real>(scores: &[T], threshold: T) -> T {
    let rejected = scores.iter().filter(|&&s| s < threshold).count();
    T::from_count(rejected) / T::from_count(scores.len())
}

/// ASV threshold at the target/nontarget EER and the three error rates
/// measured at it.
pub fn asv_operating_point_from_scores<T: Real>(
    targets: &[T],
    nontargets: &[T],
    spoofs: &[T],
) -> Result<(T, AsvErrorRates<T>)> {
    if targets.is_empty() {
        return Err(Error::EmptyClass("ASV target"));
    }
    if nontargets.is_empty() {
        return Err(Error::EmptyClass("ASV nontarget"));
    }
    if spoofs.is_empty() {
        return Err(Error::EmptyClass("ASV spoof"));
    }
    let threshold = eer_of(targets, nontargets)?.threshold;
    let rates = asv_rates_at(threshold, targets, nontargets, spoofs)?;
    Ok((threshold, rates))
}

pub fn asv_rates_at<T: Real>(threshold: T, targets: &[T], nontargets: &[T], spoofs: &[T]) -> Result<AsvErrorRates<T>> {
    AsvErrorRates::new(
        reject_rate(targets, threshold),
        accept_rate(nontargets, threshold),
        accept_rate(spoofs, threshold),
    )
}

pub fn asv_operating_point<T: Real>(asv: &ScoreSet<T, AsvKey>) -> Result<(T, AsvErrorRates<T>)> {
    asv_operating_point_from_scores(
        &asv.scores_with_key(AsvKey::Target),
        &asv.scores_with_key(AsvKey::Nontarget),
        &asv.scores_with_key(AsvKey::Spoof),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TdcfResult<T> {
    pub min_tdcf_norm: T,
    /// CM threshold attaining the minimum.
    pub threshold: T,
    pub asv_floor: T,
}

/// Minimum over the curve; ties resolve toward the smallest threshold.
pub fn min_tdcf_of_curve<T: Real>(curve: &ErrorCurve<T>, coeffs: &TdcfCoeffs<T>) -> TdcfResult<T> {
    let mut best = (T::infinity(), T::infinity());
    for (tau, p_miss, p_fa) in curve.points() {
        let value = coeffs.normalized(p_miss, p_fa);
        if value < best.0 {
            best = (value, tau);
        }
    }
    TdcfResult { min_tdcf_norm: best.0, threshold: best.1, asv_floor: coeffs.asv_floor() }
}

pub fn min_tdcf<T: Real>(cm_bona: &[T], cm_spoof: &[T], coeffs: &TdcfCoeffs<T>) -> Result<TdcfResult<T>> {
    Ok(min_tdcf_of_curve(&error_curve(cm_bona, cm_spoof)?, coeffs))
}

/// `asv_floor <= min_tdcf_norm <= 1` up to `1e-12`.
pub fn normalize_bounds_check<T: Real>(result: &TdcfResult<T>) -> bool {
    let slack = T::lit(1e-12);
    result.asv_floor <= result.min_tdcf_norm + slack && result.min_tdcf_norm <= T::one() + slack
}
