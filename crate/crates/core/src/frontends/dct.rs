use crate::error::{Error, Result};
use crate::scalar::Real;

/// Orthonormal DCT-II truncated to the first `n_out` coefficients, with the
/// basis precomputed for a fixed input length.
#[derive(Debug, Clone)]
pub struct Dct<T> {
    n_in: usize,
    n_out: usize,
    basis: Vec<T>,
}

impl<T: Real> Dct<T> {
    pub fn new(n_in: usize, n_out: usize) -> Result<Self> {
        if n_in == 0 || n_out == 0 || n_out > n_in {
            return Err(Error::InvalidArgument(format!("DCT of {n_in} inputs cannot yield {n_out} outputs")));
        }
        let n = n_in as f64;
        let mut basis = Vec::with_capacity(n_in * n_out);
        for k in 0..n_out {
            let scale = if k == 0 { (1.0 / n).sqrt() } else { (2.0 / n).sqrt() };
            for i in 0..n_in {
                let arg = std::f64::consts::PI * (i as f64 + 0.5) * k as f64 / n;
                basis.push(T::lit(scale * arg.cos()));
            }
        }
        Ok(Self { n_in, n_out, basis })
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn apply(&self, input: &[T]) -> Result<Vec<T>> {
        if input.len() != self.n_in {
            return Err(Error::DimensionMismatch { expected: self.n_in, found: input.len() });
        }
        Ok(self.basis.chunks_exact(self.n_in).map(|row| row.iter().zip(input).map(|(&b, &x)| b * x).sum()).collect())
    }

    /// Transpose of the basis (DCT-III); exact inverse when untruncated.
    pub fn inverse(&self, coeffs: &[T]) -> Result<Vec<T>> {
        if coeffs.len() != self.n_out {
            return Err(Error::DimensionMismatch { expected: self.n_out, found: coeffs.len() });
        }
        let mut out = vec![T::zero(); self.n_in];
        for (row, &c) in self.basis.chunks_exact(self.n_in).zip(coeffs) {
            for (o, &b) in out.iter_mut().zip(row) {
                *o += b * c;
            }
        }
        Ok(out)
    }
}

pub fn dct_ii<T: Real>(input: &[T], n_out: usize) -> Result<Vec<T>> {
    Dct::new(input.len(), n_out)?.apply(input)
}
