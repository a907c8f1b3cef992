//! Sparse multivariate polynomials in monomial form.

use std::collections::BTreeMap;

use crate::jet::Jet;
use crate::numeric::{Matrix, Vector};

/// `Σ c_e x^e` with exponent vectors `e` as keys.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms<I: IntoIterator<Item = (Vec<u32>, f64)>>(nvars: usize, terms: I) -> Self {
        let mut p = Poly::zero(nvars);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    /// One-variable polynomial from ascending coefficients.
    pub fn univariate(coeffs: &[f64]) -> Self {
        Poly::from_terms(
            1,
            coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| (vec![k as u32], c)),
        )
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: f64) {
        assert_eq!(exps.len(), self.nvars, "exponent vector length");
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(exps.clone()).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.terms.remove(&exps);
        }
    }

    pub fn coeff(&self, exps: &[u32]) -> f64 {
        self.terms.get(exps).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &f64)> {
        self.terms.iter()
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// Homogeneous part of the given total degree.
    pub fn homogeneous_part(&self, degree: u32) -> Poly {
        Poly::from_terms(
            self.nvars,
            self.terms
                .iter()
                .filter(|(e, _)| e.iter().sum::<u32>() == degree)
                .map(|(e, c)| (e.clone(), *c)),
        )
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                c * e
                    .iter()
                    .zip(x)
                    .map(|(&k, &xi)| xi.powi(k as i32))
                    .product::<f64>()
            })
            .sum()
    }

    pub fn eval_jet(&self, x: &[Jet]) -> Jet {
        let mut acc = Jet::constant(0.0);
        for (e, c) in &self.terms {
            let mut m = Jet::constant(*c);
            for (&k, xi) in e.iter().zip(x) {
                if k > 0 {
                    m = m * xi.powi(k);
                }
            }
            acc = acc + m;
        }
        acc
    }

    pub fn partial(&self, i: usize) -> Poly {
        let mut p = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut e2 = e.clone();
                e2[i] -= 1;
                p.add_term(e2, c * e[i] as f64);
            }
        }
        p
    }

    /// Mixed partial derivative for a multi-index of derivative orders.
    pub fn derivative(&self, orders: &[u32]) -> Poly {
        let mut p = self.clone();
        for (i, &k) in orders.iter().enumerate() {
            for _ in 0..k {
                p = p.partial(i);
            }
        }
        p
    }

    pub fn gradient(&self, x: &[f64]) -> Vector {
        Vector::from_iterator(self.nvars, (0..self.nvars).map(|i| self.partial(i).eval(x)))
    }

    pub fn hessian(&self, x: &[f64]) -> Matrix {
        let n = self.nvars;
        let mut h = Matrix::zeros(n, n);
        for i in 0..n {
            let pi = self.partial(i);
            for j in i..n {
                let v = pi.partial(j).eval(x);
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_of_mixed_monomials() {
        // p = x^2 y + 3 y^3
        let p = Poly::from_terms(2, vec![(vec![2, 1], 1.0), (vec![0, 3], 3.0)]);
        let x = [0.5, -2.0];
        assert!((p.eval(&x) - (0.25 * -2.0 + 3.0 * -8.0)).abs() < 1e-14);
        let g = p.gradient(&x);
        assert!((g[0] - 2.0 * 0.5 * -2.0).abs() < 1e-14);
        assert!((g[1] - (0.25 + 9.0 * 4.0)).abs() < 1e-14);
        let h = p.hessian(&x);
        assert!((h[(0, 1)] - 1.0).abs() < 1e-14);
        assert!((h[(1, 1)] - 18.0 * -2.0).abs() < 1e-14);
    }

    #[test]
    fn jet_evaluation_matches_pointwise() {
        let p = Poly::univariate(&[0.0, 0.0, 0.5, 0.0, 0.0, 0.1]);
        let j = p.eval_jet(&[Jet::variable(0.2)]);
        assert!((j.value() - p.eval(&[0.2])).abs() < 1e-15);
        assert!((j.derivative_at(1) - (0.2 + 0.5 * 0.2f64.powi(4))).abs() < 1e-14);
    }
}
