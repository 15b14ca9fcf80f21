//! Natural cubic spline resampling onto a fixed query grid.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Natural cubic spline through fixed knots, evaluated on a fixed set of
/// query points. The tridiagonal factorization and interval lookups depend
/// only on the abscissae and are computed once.
#[derive(Debug, Clone)]
pub struct SplineResampler {
    knots: Vec<f64>,
    /// Modified super-diagonal and inverse pivots of the Thomas algorithm.
    c_prime: Vec<f64>,
    inv_pivot: Vec<f64>,
    queries: Vec<Query>,
}

#[derive(Debug, Clone, Copy)]
struct Query {
    interval: usize,
    x: f64,
}

impl SplineResampler {
    pub fn new(knots: &[f64], queries: &[f64]) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidArgument("spline needs at least two knots".into()));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("spline knots must be strictly increasing".into()));
        }
        let n = knots.len();
        let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
        // interior unknowns M_1..M_{n-2}
        let m = n - 2;
        let mut c_prime = vec![0.0; m];
        let mut inv_pivot = vec![0.0; m];
        for i in 0..m {
            let sub = if i == 0 { 0.0 } else { h[i] };
            let diag = 2.0 * (h[i] + h[i + 1]);
            let sup = h[i + 1];
            let pivot = diag - sub * if i == 0 { 0.0 } else { c_prime[i - 1] };
            inv_pivot[i] = 1.0 / pivot;
            c_prime[i] = sup * inv_pivot[i];
        }
        let queries = queries
            .iter()
            .map(|&x| {
                let upper = knots.partition_point(|&k| k <= x);
                Query { interval: upper.saturating_sub(1).min(n - 2), x }
            })
            .collect();
        Ok(Self { knots: knots.to_vec(), c_prime, inv_pivot, queries })
    }

    pub fn n_knots(&self) -> usize {
        self.knots.len()
    }

    pub fn n_queries(&self) -> usize {
        self.queries.len()
    }

    fn second_derivatives(&self, y: &[f64]) -> Vec<f64> {
        let n = self.knots.len();
        let x = &self.knots;
        let mut m2 = vec![0.0; n];
        let interior = n - 2;
        if interior == 0 {
            return m2;
        }
        let mut d = vec![0.0; interior];
        for i in 0..interior {
            let (h0, h1) = (x[i + 1] - x[i], x[i + 2] - x[i + 1]);
            let rhs = 6.0 * ((y[i + 2] - y[i + 1]) / h1 - (y[i + 1] - y[i]) / h0);
            let prev = if i == 0 { 0.0 } else { h0 * d[i - 1] };
            d[i] = (rhs - prev) * self.inv_pivot[i];
        }
        m2[interior] = d[interior - 1];
        for i in (0..interior - 1).rev() {
            m2[i + 1] = d[i] - self.c_prime[i] * m2[i + 2];
        }
        m2
    }

    /// Spline of `values` (one per knot) at every query point. Queries
    /// beyond the knot range extrapolate linearly.
    pub fn apply<T: Real>(&self, values: &[T]) -> Result<Vec<T>> {
        if values.len() != self.knots.len() {
            return Err(Error::DimensionMismatch { expected: self.knots.len(), found: values.len() });
        }
        let y: Vec<f64> = values.iter().map(|v| v.as_f64()).collect();
        let m2 = self.second_derivatives(&y);
        let x = &self.knots;
        let last = x.len() - 1;
        let out = self
            .queries
            .iter()
            .map(|q| {
                let i = q.interval;
                let h = x[i + 1] - x[i];
                let v = if q.x < x[0] {
                    let slope = (y[1] - y[0]) / h - h * (2.0 * m2[0] + m2[1]) / 6.0;
                    y[0] + slope * (q.x - x[0])
                } else if q.x > x[last] {
                    let slope = (y[last] - y[last - 1]) / h + h * (m2[last - 1] + 2.0 * m2[last]) / 6.0;
                    y[last] + slope * (q.x - x[last])
                } else {
                    let (a, b) = (x[i + 1] - q.x, q.x - x[i]);
                    m2[i] * a * a * a / (6.0 * h)
                        + m2[i + 1] * b * b * b / (6.0 * h)
                        + (y[i] / h - m2[i] * h / 6.0) * a
                        + (y[i + 1] / h - m2[i + 1] * h / 6.0) * b
                };
                T::lit(v)
            })
            .collect();
        Ok(out)
    }
}

/// Linear grid from `start` with spacing `step`, covering `[start, stop]`.
pub fn linear_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    (0..count).map(|j| start + j as f64 * step).collect()
}
