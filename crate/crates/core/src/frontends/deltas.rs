use crate::frontends::features::FeatureMatrix;
use crate::scalar::Real;

/// Regression deltas over `+-half_window` frames with edge replication:
/// `d_t = sum_n n (x_{t+n} - x_{t-n}) / (2 sum_n n^2)`.
pub fn deltas<T: Real>(features: &FeatureMatrix<T>, half_window: usize) -> FeatureMatrix<T> {
    let (frames, dims) = (features.frames(), features.dims());
    let mut out = FeatureMatrix::zeros(frames, dims);
    if frames == 0 || half_window == 0 {
        return out;
    }
    let denom = T::from_count(2 * (1..=half_window).map(|n| n * n).sum::<usize>());
    let last = frames - 1;
    for t in 0..frames {
        let row = out.row_mut(t);
        for n in 1..=half_window {
            let ahead = features.row((t + n).min(last));
            let behind = features.row(t.saturating_sub(n));
            let w = T::from_count(n);
            for d in 0..dims {
                row[d] += w * (ahead[d] - behind[d]);
            }
        }
        for v in row.iter_mut() {
            *v /= denom;
        }
    }
    out
}

/// Static features followed by deltas and delta-deltas.
pub fn with_deltas<T: Real>(statics: &FeatureMatrix<T>, half_window: usize) -> FeatureMatrix<T> {
    let d1 = deltas(statics, half_window);
    let d2 = deltas(&d1, half_window);
    FeatureMatrix::hstack(&[statics, &d1, &d2]).expect("equal frame counts")
}
