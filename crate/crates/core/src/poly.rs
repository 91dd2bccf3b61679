//! Dense complex polynomials, coefficients in ascending order.

use crate::error::{Error, Result};
use crate::prelude::*;
use nalgebra::DMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Poly(pub Vec<Complex64>);

impl Poly {
    pub fn constant(a: Complex64) -> Self {
        Poly(vec![a])
    }

    /// `a + bz`
    pub fn linear(a: Complex64, b: Complex64) -> Self {
        Poly(vec![a, b])
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![Complex64::new(0.0, 0.0); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }

    pub fn add_assign(&mut self, other: &Poly) {
        if other.0.len() > self.0.len() {
            self.0.resize(other.0.len(), Complex64::new(0.0, 0.0));
        }
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b;
        }
    }

    pub fn scale(&self, s: Complex64) -> Poly {
        Poly(self.0.iter().map(|a| a * s).collect())
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.0.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * z + a)
    }

    /// Drops leading coefficients that are negligible relative to the largest one.
    pub fn trim(&mut self, rel: f64) {
        let big = self.0.iter().map(|a| a.norm()).fold(0.0, f64::max);
        while self.0.len() > 1 && self.0.last().unwrap().norm() <= rel * big {
            self.0.pop();
        }
    }

    /// All roots, from the eigenvalues of the companion matrix.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        let n = self.degree();
        if n == 0 {
            return Ok(Vec::new());
        }
        let lead = self.0[n];
        if lead.norm() == 0.0 {
            return Err(Error::DegenerateModel("leading coefficient vanishes".into()));
        }
        if n == 1 {
            return Ok(vec![-self.0[0] / lead]);
        }
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        for i in 1..n {
            m[(i, i - 1)] = c(1.0);
        }
        for i in 0..n {
            m[(i, n - 1)] = -self.0[i] / lead;
        }
        let schur = nalgebra::linalg::Schur::try_new(m, f64::EPSILON, 10_000)
            .ok_or_else(|| Error::DegenerateModel("companion eigenvalue iteration did not converge".into()))?;
        let eig = schur
            .eigenvalues()
            .ok_or_else(|| Error::DegenerateModel("complex Schur form is not triangular".into()))?;
        Ok(eig.iter().copied().collect())
    }
}
