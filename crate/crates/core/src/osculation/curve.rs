use super::conic::{conic_from_jet, conic_height, conic_series, ConicQuadric};
use crate::convex_body::{ConvexBody, GraphGerm};
use crate::error::{Error, Result};
use crate::jet::{Jet, ORDER};
use crate::numeric::{Matrix, Vector};

/// Taylor jets of a planar curve `t ↦ (x(t), y(t))` at one parameter value.
#[derive(Clone, Debug)]
pub struct CurveJet {
    pub x: Jet,
    pub y: Jet,
}

/// The curve as a graph `Y = Σ a_k X^k` over its tangent line, with the
/// normal chosen so that `a_2 > 0`.
#[derive(Clone, Debug)]
pub struct LocalGraph {
    pub origin: Vector,
    pub tangent: Vector,
    pub normal: Vector,
    pub series: Jet,
}

impl LocalGraph {
    /// Homothety factor `2 a_2` taking the chart to unit curvature.
    pub fn unit_scale(&self) -> f64 {
        2.0 * self.series.c[2]
    }

    /// Series coefficient `a_k` in the unit-curvature chart.
    pub fn normalized(&self, k: usize) -> f64 {
        self.series.c[k] * self.unit_scale().powi(1 - k as i32)
    }

    pub fn height(&self, x: f64) -> f64 {
        (0..=ORDER).rev().fold(0.0, |acc, k| acc * x + self.series.c[k])
    }

    /// Columns `(T, N)`; local coordinates are `Rᵀ (p - origin)`.
    pub fn rotation(&self) -> Matrix {
        Matrix::from_columns(&[self.tangent.clone(), self.normal.clone()])
    }
}

impl CurveJet {
    pub fn new(x: Jet, y: Jet) -> Self {
        CurveJet { x, y }
    }

    /// The graph `y = h(x)` of a planar germ at `x0`.
    pub fn graph(germ: &GraphGerm, x0: f64) -> Result<Self> {
        if germ.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: germ.dim(),
            });
        }
        let x = Jet::variable(x0);
        Ok(CurveJet {
            x,
            y: germ.poly().eval_jet(&[x]),
        })
    }

    /// A parametrized curve evaluated on jets at `t0`.
    pub fn parametric<F: Fn(Jet) -> [Jet; 2]>(f: F, t0: f64) -> Self {
        let [x, y] = f(Jet::variable(t0));
        CurveJet { x, y }
    }

    /// The boundary of a planar body near the boundary point `p`, as a
    /// graph over its tangent line.
    pub fn boundary(body: &ConvexBody, p: &Vector) -> Result<Self> {
        if body.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: body.dim(),
            });
        }
        let n = body.exterior_normal(p)?;
        let t = Vector::from_vec(vec![-n[1], n[0]]);
        let inward = -&n;
        let h = super::quadric::implicit_height(body, p, &t, &inward)?;
        let s = Jet::variable(0.0);
        Ok(CurveJet {
            x: s.scale(t[0]) + h.scale(inward[0]) + p[0],
            y: s.scale(t[1]) + h.scale(inward[1]) + p[1],
        })
    }

    /// Image under `p ↦ L p + b`.
    pub fn mapped(&self, l: &Matrix, b: &Vector) -> Self {
        CurveJet {
            x: self.x.scale(l[(0, 0)]) + self.y.scale(l[(0, 1)]) + b[0],
            y: self.x.scale(l[(1, 0)]) + self.y.scale(l[(1, 1)]) + b[1],
        }
    }

    pub fn point(&self) -> Vector {
        Vector::from_vec(vec![self.x.value(), self.y.value()])
    }

    pub fn local_graph(&self) -> Result<LocalGraph> {
        let (dx, dy) = (self.x.centered(), self.y.centered());
        let speed = dx.c[1].hypot(dy.c[1]);
        if !(speed > 0.0) {
            return Err(Error::DegenerateData("curve is singular at the point".into()));
        }
        let tangent = Vector::from_vec(vec![dx.c[1] / speed, dy.c[1] / speed]);
        let mut normal = Vector::from_vec(vec![-tangent[1], tangent[0]]);
        let big_x = dx.scale(tangent[0]) + dy.scale(tangent[1]);
        let big_y = dx.scale(normal[0]) + dy.scale(normal[1]);
        let mut series = big_y.compose(&big_x.revert());
        series.c[0] = 0.0;
        series.c[1] = 0.0;
        if series.c[2] < 0.0 {
            series = -series;
            normal = -normal;
        }
        if !(series.c[2] > 1e-12) {
            return Err(Error::DegenerateData("zero curvature".into()));
        }
        Ok(LocalGraph {
            origin: self.point(),
            tangent,
            normal,
            series,
        })
    }
}

/// The unique conic through the point sharing the curve's 4-jet.
pub fn osculating_conic(curve: &CurveJet) -> Result<ConicQuadric> {
    let lg = curve.local_graph()?;
    let abc = conic_from_jet(lg.series.c[2], lg.series.c[3], lg.series.c[4])?;
    local_conic_to_world(&lg, abc)
}

fn local_conic_to_world(lg: &LocalGraph, [a, b, c]: [f64; 3]) -> Result<ConicQuadric> {
    let local = ConicQuadric::from_coeffs(2, vec![a, b, c, 0.0, -1.0, 0.0])?;
    let rt = lg.rotation().transpose();
    local.pullback(&rt, &(-(&rt * &lg.origin)))
}

/// Conic read in the unit-curvature chart of the curve, as
/// `(q_xx, q_xy, q_yy, q_x, q_y, q_0)` with unit norm.
fn normalized_local_coeffs(lg: &LocalGraph, conic: &ConicQuadric) -> Result<Vec<f64>> {
    let lambda = lg.unit_scale();
    let l = lg.rotation() / lambda;
    Ok(conic.pullback(&l, &lg.origin)?.coeffs().to_vec())
}

/// Largest Taylor coefficient of order ≤ 4 of `Q(γ)` in the unit-curvature
/// chart; zero iff the conic has contact of order ≥ 5 with the curve.
pub fn jet_match_residual(conic: &ConicQuadric, curve: &CurveJet) -> Result<f64> {
    let lg = curve.local_graph()?;
    let q = ConicQuadric::from_coeffs(2, normalized_local_coeffs(&lg, conic)?)?;
    let x = Jet::variable(0.0);
    let y = Jet::from_coeffs(
        &(0..=ORDER)
            .map(|k| lg.normalized(k))
            .collect::<Vec<_>>(),
    );
    let v = q.eval_jet(&[x, y]);
    Ok(v.c[..=4].iter().fold(0.0, |m, c| m.max(c.abs())))
}

fn abc_of_tangent_conic(coeffs: &[f64]) -> Result<[f64; 3]> {
    let qy = coeffs[4];
    if !(qy.abs() > 1e-9) {
        return Err(Error::Precondition("conic is not tangent to the curve".into()));
    }
    if coeffs[5].abs() > 1e-7 * qy.abs() || coeffs[3].abs() > 1e-7 * qy.abs() {
        return Err(Error::Precondition(
            "conic does not pass through the point tangentially".into(),
        ));
    }
    Ok([-coeffs[0] / qy, -coeffs[1] / qy, -coeffs[2] / qy])
}

/// Coefficient `c` of the `x⁵` discrepancy between the curve and a conic
/// sharing its 4-jet, in the unit-curvature chart.
pub fn fifth_order_gap(curve: &CurveJet, conic: &ConicQuadric) -> Result<f64> {
    let lg = curve.local_graph()?;
    let abc = abc_of_tangent_conic(&normalized_local_coeffs(&lg, conic)?)?;
    let conic_jet = conic_series(abc);
    let curve_coeff = |k: usize| lg.normalized(k);
    for k in 2..=4 {
        if (curve_coeff(k) - conic_jet.c[k]).abs() > 1e-7 * (1.0 + curve_coeff(k).abs()) {
            return Err(Error::Precondition(format!(
                "conic does not match the curve's 4-jet (order {k})"
            )));
        }
    }
    let gap = curve_coeff(5) - conic_jet.c[5];

    // Independent estimate from the graphs themselves.
    let lambda = lg.unit_scale();
    let g = |x: f64| (lambda * lg.height(x / lambda) - conic_height(abc, x)) / x.powi(5);
    let coarse = 2.0 * g(0.01) - g(0.02);
    let fine = 2.0 * g(0.005) - g(0.01);
    for estimate in [coarse, fine] {
        if (estimate - gap).abs() > 0.05 * gap.abs() + 1e-6 {
            return Err(Error::Precision(format!(
                "gap {gap:.6e} disagrees with extrapolated {estimate:.6e}"
            )));
        }
    }
    Ok(gap)
}

/// Whether the osculating conic has contact of order > 5, with the gap.
pub fn is_sextactic(curve: &CurveJet, tol: f64) -> Result<(bool, f64)> {
    let lg = curve.local_graph()?;
    let abc = conic_from_jet(lg.normalized(2), lg.normalized(3), lg.normalized(4))?;
    let gap = lg.normalized(5) - conic_series(abc).c[5];
    Ok((gap.abs() <= tol, gap))
}

/// Equi-affine curvature and its derivative in affine arclength.
pub fn affine_curvature(curve: &CurveJet) -> Result<(f64, f64)> {
    let (x, mut y) = (curve.x, curve.y);
    let (x1, y1) = (x.differentiate(), y.differentiate());
    let (x2, y2) = (x1.differentiate(), y1.differentiate());
    let mut phi = x1 * y2 - y1 * x2;
    let scale = x1.value().hypot(y1.value()).powi(3);
    if phi.value().abs() <= 1e-12 * scale {
        return Err(Error::Domain("curvature vanishes at the point".into()));
    }
    if phi.value() < 0.0 {
        y = -y;
        phi = -phi;
    }
    let speed = phi.powf(1.0 / 3.0);
    let along = |f: &Jet| f.differentiate() / speed;
    let (xs, ys) = (along(&x), along(&y));
    let (xss, yss) = (along(&xs), along(&ys));
    let (xsss, ysss) = (along(&xss), along(&yss));
    let kappa = xss * ysss - yss * xsss;
    Ok((kappa.value(), along(&kappa).value()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn germ5(c: f64) -> GraphGerm {
        GraphGerm::planar(&[0.0, 0.0, 0.5, 0.0, 0.0, c], 1.0).unwrap()
    }

    fn ellipse(a: f64, b: f64) -> impl Fn(Jet) -> [Jet; 2] {
        move |t: Jet| {
            let (s, c) = t.sin_cos();
            [c.scale(a), s.scale(b)]
        }
    }

    #[test]
    fn osculating_conic_examples() {
        let parabola = ConicQuadric::from_coeffs(2, vec![0.5, 0.0, 0.0, 0.0, -1.0, 0.0]).unwrap();
        let g = CurveJet::graph(&germ5(0.0), 0.0).unwrap();
        assert!(osculating_conic(&g).unwrap().distance(&parabola) < 1e-12);
        let g = CurveJet::graph(&germ5(1.0), 0.0).unwrap();
        let conic = osculating_conic(&g).unwrap();
        assert!(conic.distance(&parabola) < 1e-12);
        assert!((fifth_order_gap(&g, &conic).unwrap() - 1.0).abs() < 1e-12);

        // Unit circle through the origin, centered at (0, 1).
        let circle = ConicQuadric::from_coeffs(2, vec![1.0, 0.0, 1.0, 0.0, -2.0, 0.0]).unwrap();
        for t0 in [0.0, 0.4, 1.3, 2.9, 4.0] {
            let c = CurveJet::parametric(
                |t: Jet| {
                    let (s, c) = t.sin_cos();
                    [s, -c + 1.0]
                },
                t0,
            );
            let conic = osculating_conic(&c).unwrap();
            assert!(conic.distance(&circle) < 1e-10, "{t0}");
            assert!(jet_match_residual(&conic, &c).unwrap() < 1e-10);
        }
        let flat = GraphGerm::planar(&[0.0, 0.0, 1.0], 1.0).unwrap();
        let line = CurveJet::graph(&flat, 0.0).unwrap();
        assert!(osculating_conic(&line).is_ok());
        let inflection = CurveJet::parametric(|t: Jet| [t, t * t * t], 0.0);
        assert!(matches!(osculating_conic(&inflection), Err(Error::DegenerateData(_))));
    }

    #[test]
    fn conic_is_affinely_natural() {
        let curve = CurveJet::graph(&GraphGerm::planar(&[0.0, 0.0, 0.7, 0.3, -0.4, 0.2, 0.1], 1.0).unwrap(), 0.1).unwrap();
        let conic = osculating_conic(&curve).unwrap();
        assert!(jet_match_residual(&conic, &curve).unwrap() < 1e-10);
        let l = Matrix::from_row_slice(2, 2, &[1.3, 0.4, -0.2, 0.8]);
        let b = Vector::from_vec(vec![0.5, -1.0]);
        let image = curve.mapped(&l, &b);
        let inv = l.clone().try_inverse().unwrap();
        let moved = conic.pullback(&inv, &(-(&inv * &b))).unwrap();
        assert!(jet_match_residual(&moved, &image).unwrap() < 1e-9);
        assert!(moved.distance(&osculating_conic(&image).unwrap()) < 1e-9);
    }

    #[test]
    fn gap_examples_and_scaling() {
        for c0 in [1e-2, -1e-2, 1e-3, -1e-3] {
            let g = CurveJet::graph(&germ5(c0), 0.0).unwrap();
            let conic = osculating_conic(&g).unwrap();
            let gap = fifth_order_gap(&g, &conic).unwrap();
            assert!((gap - c0).abs() < 1e-12 * c0.abs().max(1.0));
            for lambda in [0.5, 2.0, 3.0] {
                let l = Matrix::from_row_slice(2, 2, &[1.0 / lambda, 0.0, 0.0, 1.0 / (lambda * lambda)]);
                let image = g.mapped(&l, &Vector::zeros(2));
                let conic = osculating_conic(&image).unwrap();
                let scaled = fifth_order_gap(&image, &conic).unwrap();
                assert!((scaled - lambda.powi(3) * c0).abs() < 1e-9 * (lambda.powi(3) * c0).abs());
            }
        }
        let e = CurveJet::parametric(ellipse(2.0, 1.0), 0.7);
        let conic = osculating_conic(&e).unwrap();
        assert!(fifth_order_gap(&e, &conic).unwrap().abs() < 1e-9);
        let wrong = ConicQuadric::from_coeffs(2, vec![1.0, 0.0, 0.0, 0.0, -1.0, 0.0]).unwrap();
        let g = CurveJet::graph(&germ5(0.0), 0.0).unwrap();
        assert!(matches!(fifth_order_gap(&g, &wrong), Err(Error::Precondition(_))));
    }

    #[test]
    fn affine_curvature_examples() {
        let circle: Vec<f64> = [0.0, 0.9, 2.2, 4.5]
            .iter()
            .map(|&t0| affine_curvature(&CurveJet::parametric(ellipse(1.0, 1.0), t0)).unwrap().0)
            .collect();
        assert!(circle.iter().all(|k| (k - circle[0]).abs() < 1e-8));
        for t0 in [0.0, 0.5, 2.0, 3.5] {
            let (_, dk) = affine_curvature(&CurveJet::parametric(ellipse(3.0, 0.5), t0)).unwrap();
            assert!(dk.abs() < 1e-9);
            let (_, dk) = affine_curvature(&CurveJet::parametric(ellipse(3.0, 0.5), -t0)).unwrap();
            assert!(dk.abs() < 1e-9);
        }
        let (_, dk) = affine_curvature(&CurveJet::graph(&germ5(1.0), 0.0).unwrap()).unwrap();
        assert!((dk - 40.0).abs() < 1e-9, "{dk}");
        let inflection = CurveJet::parametric(|t: Jet| [t, t * t * t], 0.0);
        assert!(matches!(affine_curvature(&inflection), Err(Error::Domain(_))));
    }

    #[test]
    fn sextactic_agrees_with_affine_curvature() {
        let bumped = |eps: f64| {
            move |t: Jet| {
                let (s, c) = t.sin_cos();
                let r = (t.scale(5.0)).cos().scale(eps) + 1.0;
                [(c * r).scale(2.0), s * r]
            }
        };
        let curves = [
            CurveJet::parametric(ellipse(2.0, 1.0), 0.3),
            CurveJet::graph(&germ5(1e-3), 0.0).unwrap(),
            CurveJet::graph(&germ5(0.2), 0.1).unwrap(),
            CurveJet::parametric(bumped(1e-3), 0.2),
            CurveJet::parametric(bumped(1e-3), 0.0),
        ];
        for c in &curves {
            let lg = c.local_graph().unwrap();
            let (_, gap) = is_sextactic(c, 1e-6).unwrap();
            let (_, dk) = affine_curvature(c).unwrap();
            let predicted = 40.0 * gap * lg.unit_scale().powi(2);
            assert!((dk - predicted).abs() < 1e-7 * (1.0 + dk.abs()), "{dk} vs {predicted}");
        }
        assert!(is_sextactic(&curves[0], 1e-9).unwrap().0);
        let (flag, gap) = is_sextactic(&CurveJet::graph(&germ5(1.0), 0.0).unwrap(), 1e-6).unwrap();
        assert!(!flag && (gap - 1.0).abs() < 1e-12);
        // Cos(5t) bump: sextactic where its derivative vanishes.
        assert!(is_sextactic(&curves[4], 1e-9).unwrap().0);
        assert!(!is_sextactic(&curves[3], 1e-9).unwrap().0);
    }
}
