use crate::convex_body::GraphGerm;
use crate::error::{Error, Result};
use crate::numeric::find_root;

/// A planar strictly convex graph `y = ν(x)` with `ν(0) = ν'(0) = 0`.
pub trait SectionGraph {
    fn level_at(&self, x: f64) -> Result<f64>;
    fn slope_at(&self, x: f64) -> Result<f64>;
}

impl SectionGraph for GraphGerm {
    fn level_at(&self, x: f64) -> Result<f64> {
        let mut p = vec![0.0; self.dim() - 1];
        p[0] = x;
        Ok(GraphGerm::height(self, &p))
    }

    fn slope_at(&self, x: f64) -> Result<f64> {
        let mut p = vec![0.0; self.dim() - 1];
        p[0] = x;
        Ok(self.gradient(&p)[0])
    }
}

/// Solves `ν(y) = level` on the branch containing `guess`.
pub fn level_root(graph: &dyn SectionGraph, level: f64, guess: f64) -> Result<f64> {
    if guess == 0.0 {
        return Ok(0.0);
    }
    let f = |y: f64| graph.level_at(y).map_or(f64::NAN, |h| h - level);
    let df = |y: f64| graph.slope_at(y).unwrap_or(f64::NAN);
    let (a, b) = (0.25 * guess, 4.0 * guess);
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    find_root(f, df, lo, hi).map_err(|_| {
        Error::Domain(format!("no level crossing near {guess:.3e} on this branch"))
    })
}

/// Two graphs tangent at the origin; `α` is the curve and `Γ` its
/// comparison conic.
pub struct GraphPair<'a> {
    alpha: &'a dyn SectionGraph,
    gamma: &'a dyn SectionGraph,
}

impl<'a> GraphPair<'a> {
    pub fn new(alpha: &'a dyn SectionGraph, gamma: &'a dyn SectionGraph) -> Self {
        GraphPair { alpha, gamma }
    }

    /// `ζ` near `x` with `ν_α(ζ) = ν_Γ(x)`.
    pub fn zeta(&self, x: f64) -> Result<f64> {
        level_root(self.alpha, self.gamma.level_at(x)?, x)
    }

    /// The other point `x̂` of `Γ` at the height of `x`.
    pub fn x_hat(&self, x: f64) -> Result<f64> {
        level_root(self.gamma, self.gamma.level_at(x)?, -x)
    }

    /// The other point `ζ̃` of `α` at the height of `ζ(x)`.
    pub fn zeta_tilde(&self, x: f64) -> Result<f64> {
        let zeta = self.zeta(x)?;
        level_root(self.alpha, self.alpha.level_at(zeta)?, -zeta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn definitional_identities() {
        let c = 1e-2;
        let alpha = GraphGerm::planar(&[0.0, 0.0, 0.5, 0.0, 0.0, c], 1.0).unwrap();
        let gamma = GraphGerm::planar(&[0.0, 0.0, 0.5], 1.0).unwrap();
        let pair = GraphPair::new(&alpha, &gamma);
        for x in [0.1, 0.02, -0.05, 1e-3] {
            let z = pair.zeta(x).unwrap();
            assert!((alpha.level_at(z).unwrap() - gamma.level_at(x).unwrap()).abs() < 1e-12);
            let xh = pair.x_hat(x).unwrap();
            assert!((gamma.level_at(xh).unwrap() - gamma.level_at(x).unwrap()).abs() < 1e-12);
            assert!((xh + x).abs() < 1e-14);
            let zt = pair.zeta_tilde(x).unwrap();
            assert!((alpha.level_at(zt).unwrap() - alpha.level_at(z).unwrap()).abs() < 1e-12);
            assert!(zt * x < 0.0);
            // ζ - x ≈ -c x⁴.
            assert!(((z - x) / (-c * x.powi(4)) - 1.0).abs() < 0.25);
        }
    }
}
