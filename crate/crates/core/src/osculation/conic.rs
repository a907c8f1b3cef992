use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::numeric::{Matrix, Vector};

/// A conic or quadric hypersurface `{Q = 0}` in `ℝⁿ`, stored as the
/// coefficients of `Q` in the monomial order `x_i x_j (i ≤ j)`, then `x_i`,
/// then `1`. Coefficients are normalized to unit Euclidean norm with the
/// first significant coefficient positive.
#[derive(Clone, Debug, PartialEq)]
pub struct ConicQuadric {
    dim: usize,
    coeffs: Vec<f64>,
}

pub fn coefficient_count(n: usize) -> usize {
    (n + 1) * (n + 2) / 2
}

impl ConicQuadric {
    pub fn from_coeffs(dim: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != coefficient_count(dim) {
            return Err(Error::DimensionMismatch {
                expected: coefficient_count(dim),
                got: coeffs.len(),
            });
        }
        let norm = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::DegenerateData("quadric coefficients vanish".into()));
        }
        let mut coeffs: Vec<f64> = coeffs.iter().map(|c| c / norm).collect();
        if let Some(first) = coeffs.iter().find(|c| c.abs() > 1e-12) {
            if *first < 0.0 {
                coeffs.iter_mut().for_each(|c| *c = -*c);
            }
        }
        Ok(ConicQuadric { dim, coeffs })
    }

    /// From the symmetric `(n+1) × (n+1)` matrix of the form on homogeneous
    /// coordinates `(x, 1)`.
    pub fn from_matrix(m: &Matrix) -> Result<Self> {
        let n = m.nrows() - 1;
        let mut coeffs = Vec::with_capacity(coefficient_count(n));
        for i in 0..n {
            for j in i..n {
                coeffs.push(if i == j { m[(i, i)] } else { m[(i, j)] + m[(j, i)] });
            }
        }
        for i in 0..n {
            coeffs.push(m[(i, n)] + m[(n, i)]);
        }
        coeffs.push(m[(n, n)]);
        ConicQuadric::from_coeffs(n, coeffs)
    }

    pub fn matrix(&self) -> Matrix {
        let n = self.dim;
        let mut m = Matrix::zeros(n + 1, n + 1);
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                if i == j {
                    m[(i, i)] = self.coeffs[k];
                } else {
                    m[(i, j)] = 0.5 * self.coeffs[k];
                    m[(j, i)] = 0.5 * self.coeffs[k];
                }
                k += 1;
            }
        }
        for i in 0..n {
            m[(i, n)] = 0.5 * self.coeffs[k];
            m[(n, i)] = 0.5 * self.coeffs[k];
            k += 1;
        }
        m[(n, n)] = self.coeffs[k];
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, x: &Vector) -> f64 {
        let xh = x.clone().insert_row(self.dim, 1.0);
        xh.dot(&(self.matrix() * &xh))
    }

    pub fn gradient(&self, x: &Vector) -> Vector {
        let m = self.matrix();
        let xh = x.clone().insert_row(self.dim, 1.0);
        (&m * xh).rows(0, self.dim) * 2.0
    }

    /// `Q` evaluated along a curve given by coordinate jets.
    pub fn eval_jet(&self, x: &[Jet]) -> Jet {
        let n = self.dim;
        let mut acc = Jet::constant(0.0);
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                acc = acc + x[i] * x[j] * self.coeffs[k];
                k += 1;
            }
        }
        for xi in x.iter().take(n) {
            acc = acc + *xi * self.coeffs[k];
            k += 1;
        }
        acc + self.coeffs[k]
    }

    /// The quadric `{y : Q(L y + b) = 0}` in the coordinates `y`.
    pub fn pullback(&self, l: &Matrix, b: &Vector) -> Result<Self> {
        if l.nrows() != self.dim || b.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: l.nrows(),
            });
        }
        let k = l.ncols();
        let mut s = Matrix::zeros(self.dim + 1, k + 1);
        s.view_mut((0, 0), (self.dim, k)).copy_from(l);
        s.view_mut((0, k), (self.dim, 1)).copy_from(b);
        s[(self.dim, k)] = 1.0;
        ConicQuadric::from_matrix(&(s.transpose() * self.matrix() * s))
    }

    /// Distance between normalized coefficient vectors, up to sign.
    pub fn distance(&self, other: &ConicQuadric) -> f64 {
        let plus: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).powi(2))
            .sum();
        let minus: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a + b).powi(2))
            .sum();
        plus.min(minus).sqrt()
    }
}

/// Small root `y` of the conic `y = A x² + B x y + C y²` near the origin.
pub fn conic_height(abc: [f64; 3], x: f64) -> f64 {
    let [a, b, c] = abc;
    let p = 1.0 - b * x;
    let disc = p * p - 4.0 * a * c * x * x;
    2.0 * a * x * x / (p + disc.max(0.0).sqrt())
}

/// Graph series of the conic `y = A x² + B x y + C y²` at the origin.
pub fn conic_series(abc: [f64; 3]) -> Jet {
    let [a, b, c] = abc;
    let x = Jet::variable(0.0);
    let mut y = Jet::constant(0.0);
    for _ in 0..crate::jet::ORDER {
        y = (x * x).scale(a) + (x * y).scale(b) + (y * y).scale(c);
    }
    y
}

/// `(A, B, C)` of the conic `y = A x² + B x y + C y²` sharing the 4-jet of
/// a graph `y = a2 x² + a3 x³ + a4 x⁴ + ...`.
pub fn conic_from_jet(a2: f64, a3: f64, a4: f64) -> Result<[f64; 3]> {
    if !(a2.abs() > 1e-12) {
        return Err(Error::DegenerateData("zero curvature".into()));
    }
    let b = a3 / a2;
    let c = (a4 - b * a3) / (a2 * a2);
    Ok([a2, b, c])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip_and_eval() {
        let q = ConicQuadric::from_coeffs(2, vec![1.0, 0.5, 2.0, -1.0, 0.3, -4.0]).unwrap();
        let back = ConicQuadric::from_matrix(&q.matrix()).unwrap();
        assert!(q.distance(&back) < 1e-15);
        let x = Vector::from_vec(vec![0.7, -1.1]);
        let c = q.coeffs();
        let direct = c[0] * 0.49 + c[1] * 0.7 * -1.1 + c[2] * 1.21 + c[3] * 0.7 + c[4] * -1.1 + c[5];
        assert!((q.eval(&x) - direct).abs() < 1e-14);
        let jets = [Jet::constant(0.7), Jet::constant(-1.1)];
        assert!((q.eval_jet(&jets).value() - direct).abs() < 1e-14);
    }

    #[test]
    fn conic_series_matches_closed_root() {
        let abc = [0.5, 0.3, -0.2];
        let s = conic_series(abc);
        for x in [1e-3, 1e-2, -2e-2] {
            let poly: f64 = (0..=crate::jet::ORDER).rev().fold(0.0, |acc, k| acc * x + s.c[k]);
            assert!((poly - conic_height(abc, x)).abs() < 1e-15);
        }
        let [a, b, c] = conic_from_jet(s.c[2], s.c[3], s.c[4]).unwrap();
        assert!((a - 0.5).abs() < 1e-14 && (b - 0.3).abs() < 1e-14 && (c + 0.2).abs() < 1e-14);
    }
}
