use crate::error::{Error, Result};
use crate::numeric::{sorted_symmetric_eigen, Matrix, Vector};
use crate::poly::Poly;

/// Germ of a hypersurface `x_n = h(x_1, .., x_{n-1})` tangent to `{x_n = 0}`
/// at the origin, with `h` a Taylor polynomial.
///
/// The body side is the epigraph `x_n > h`, so the exterior normal at the
/// origin is `-e_n`.
#[derive(Clone, Debug)]
pub struct GraphGerm {
    poly: Poly,
    grad: Vec<Poly>,
    hess: Vec<Vec<Poly>>,
    radius: f64,
}

impl GraphGerm {
    /// `poly` lives in `n - 1` variables; `radius` bounds the region where
    /// the germ is evaluated.
    pub fn new(poly: Poly, radius: f64) -> Result<Self> {
        let m = poly.nvars();
        if m == 0 {
            return Err(Error::Domain("graph germ needs at least one variable".into()));
        }
        if !(radius > 0.0) {
            return Err(Error::Domain("evaluation radius must be positive".into()));
        }
        if poly.homogeneous_part(0).terms().count() > 0
            || poly.homogeneous_part(1).terms().count() > 0
        {
            return Err(Error::Precondition(
                "graph germ must have zero constant and linear terms".into(),
            ));
        }
        let grad: Vec<Poly> = (0..m).map(|i| poly.partial(i)).collect();
        let hess: Vec<Vec<Poly>> = grad
            .iter()
            .map(|g| (0..m).map(|j| g.partial(j)).collect())
            .collect();
        let germ = GraphGerm {
            poly,
            grad,
            hess,
            radius,
        };
        let h0 = germ.hessian(&vec![0.0; m]);
        let (vals, _) = sorted_symmetric_eigen(&h0);
        if vals[0] <= 0.0 {
            return Err(Error::ConvexityViolation { eigenvalue: vals[0] });
        }
        Ok(germ)
    }

    /// Planar germ `y = Σ coeffs[k] x^k`.
    pub fn planar(coeffs: &[f64], radius: f64) -> Result<Self> {
        GraphGerm::new(Poly::univariate(coeffs), radius)
    }

    /// Ambient dimension `n`.
    pub fn dim(&self) -> usize {
        self.poly.nvars() + 1
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    /// Taylor coefficient at the monomial with the given exponents.
    pub fn coeff(&self, exps: &[u32]) -> f64 {
        self.poly.coeff(exps)
    }

    pub fn height(&self, x: &[f64]) -> f64 {
        self.poly.eval(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vector {
        Vector::from_iterator(self.grad.len(), self.grad.iter().map(|g| g.eval(x)))
    }

    pub fn hessian(&self, x: &[f64]) -> Matrix {
        let m = self.grad.len();
        Matrix::from_fn(m, m, |i, j| self.hess[i][j].eval(x))
    }

    /// Mixed partial derivative of `h` of the given orders.
    pub fn derivative(&self, orders: &[u32], x: &[f64]) -> f64 {
        self.poly.derivative(orders).eval(x)
    }

    /// Solves `∇h(x) = slope` by damped Newton from the origin.
    pub fn solve_gradient(&self, slope: &Vector) -> Result<Vector> {
        let m = self.grad.len();
        let mut x = Vector::zeros(m);
        let mut res = self.gradient(x.as_slice()) - slope;
        for it in 0..100 {
            let r = res.norm();
            if r <= 4.0 * f64::EPSILON * slope.norm().max(f64::MIN_POSITIVE) {
                return Ok(x);
            }
            let h = self.hessian(x.as_slice());
            let step = h.lu().solve(&res).ok_or(Error::Convergence {
                iterations: it,
                residual: r,
            })?;
            let mut lambda = 1.0;
            loop {
                let cand = &x - &step * lambda;
                let cand_res = self.gradient(cand.as_slice()) - slope;
                if cand_res.norm() < r || lambda < 1e-6 {
                    if cand_res.norm() >= r {
                        // Stalled at round-off level.
                        return if r <= 1e-12 * slope.norm().max(1.0) {
                            Ok(x)
                        } else {
                            Err(Error::Convergence {
                                iterations: it,
                                residual: r,
                            })
                        };
                    }
                    x = cand;
                    res = cand_res;
                    break;
                }
                lambda *= 0.5;
            }
            if x.norm() > self.radius {
                return Err(Error::Domain("gradient preimage leaves the germ radius".into()));
            }
        }
        let r = res.norm();
        if r <= 1e-12 * slope.norm().max(1.0) {
            Ok(x)
        } else {
            Err(Error::Convergence {
                iterations: 100,
                residual: r,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_linear_terms_and_flat_germs() {
        assert!(GraphGerm::planar(&[0.0, 0.1, 0.5], 1.0).is_err());
        assert!(matches!(
            GraphGerm::planar(&[0.0, 0.0, 0.0, 1.0], 1.0),
            Err(Error::ConvexityViolation { .. })
        ));
    }

    #[test]
    fn jets_agree_with_central_differences() {
        let g = GraphGerm::new(
            Poly::from_terms(
                2,
                vec![
                    (vec![2, 0], 1.0),
                    (vec![1, 1], 0.4),
                    (vec![0, 2], 0.8),
                    (vec![2, 1], 0.3),
                    (vec![5, 0], 0.02),
                    (vec![1, 3], -0.1),
                ],
            ),
            1.0,
        )
        .unwrap();
        let x = [0.21, -0.13];
        let h = 1e-3;
        // Fourth-order central differences for first derivatives.
        for i in 0..2 {
            let mut xp = x;
            let mut xm = x;
            let mut xpp = x;
            let mut xmm = x;
            xp[i] += h;
            xm[i] -= h;
            xpp[i] += 2.0 * h;
            xmm[i] -= 2.0 * h;
            let fd = (-g.height(&xpp) + 8.0 * g.height(&xp) - 8.0 * g.height(&xm)
                + g.height(&xmm))
                / (12.0 * h);
            let exact = g.gradient(&x)[i];
            assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1e-3));
        }
        let fd5 = {
            // fifth derivative along x1 from the exact fourth derivative
            let d4 = |t: f64| g.derivative(&[4, 0], &[t, x[1]]);
            (d4(x[0] + h) - d4(x[0] - h)) / (2.0 * h)
        };
        assert!((fd5 - g.derivative(&[5, 0], &x)).abs() < 1e-6 * 2.4);
    }

    #[test]
    fn gradient_solve_inverts() {
        let g = GraphGerm::planar(&[0.0, 0.0, 0.5, 0.0, 0.0, 0.01], 1.0).unwrap();
        let s = Vector::from_vec(vec![0.2]);
        let x = g.solve_gradient(&s).unwrap();
        assert!((g.gradient(x.as_slice())[0] - 0.2).abs() < 1e-15);
    }
}
