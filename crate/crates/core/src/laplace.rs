//! Numerical Laplace inversion by the Fourier-series method with Euler
//! summation (Abate–Whitt), in the two-sided form that also handles
//! complex-valued originals.

use crate::error::{Error, Result};
use crate::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerInversion {
    /// Discretisation parameter; the aliasing error is about `e^{-a}`.
    pub a: f64,
    /// Partial sums are formed up to `n`, ..., `n + m`.
    pub n: usize,
    pub m: usize,
}

impl Default for EulerInversion {
    fn default() -> Self {
        Self { a: 18.4, n: 15, m: 10 }
    }
}

impl EulerInversion {
    /// From a total number of transform evaluations `2(n + m) + 1`.
    pub fn with_terms(terms: usize) -> Result<Self> {
        if terms < 5 || terms.is_multiple_of(2) {
            return Err(Error::OutOfRange {
                what: "laplace_terms",
                value: terms as f64,
                range: "odd integers >= 5".into(),
            });
        }
        let total = (terms - 1) / 2;
        let m = ((total as f64) * 0.4).round().max(1.0) as usize;
        Ok(Self { a: 18.4, n: total - m, m })
    }

    pub fn terms(&self) -> usize {
        2 * (self.n + self.m) + 1
    }

    /// Abscissae `(a + 2πik)/(2t)` for `k = -(n+m), …, n+m`, in that order.
    pub fn nodes(&self, t: f64) -> Vec<Complex64> {
        let kmax = (self.n + self.m) as i64;
        (-kmax..=kmax)
            .map(|k| Complex64::new(self.a, 2.0 * core::f64::consts::PI * k as f64) / (2.0 * t))
            .collect()
    }

    /// Combines transform values at [`Self::nodes`] into `f(t)`.
    pub fn combine(&self, t: f64, values: &[Complex64]) -> Complex64 {
        let kmax = self.n + self.m;
        debug_assert_eq!(values.len(), 2 * kmax + 1);
        let sign = |k: usize| if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        let mut partial = Vec::with_capacity(kmax + 1);
        let mut s = values[kmax];
        partial.push(s);
        for k in 1..=kmax {
            s += (values[kmax + k] + values[kmax - k]) * sign(k);
            partial.push(s);
        }
        let mut binom = 1.0;
        let mut acc = c(0.0);
        for j in 0..=self.m {
            acc += partial[self.n + j] * binom;
            binom = binom * (self.m - j) as f64 / (j + 1) as f64;
        }
        let scale = (0.5 * self.a).exp() / (2.0 * t) * 2f64.powi(-(self.m as i32));
        acc * scale
    }

    pub fn invert(&self, t: f64, mut transform: impl FnMut(Complex64) -> Result<Complex64>) -> Result<Complex64> {
        if !(t > 0.0) {
            return Err(Error::OutOfRange { what: "inversion time", value: t, range: "(0, inf)".into() });
        }
        let values = self.nodes(t).into_iter().map(&mut transform).collect::<Result<Vec<_>>>()?;
        Ok(self.combine(t, &values))
    }
}
